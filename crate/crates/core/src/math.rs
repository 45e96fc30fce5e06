//! Float helpers backed by `libm` so the crate builds without `std`.

pub use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, SQRT_2, TAU};

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    // in-range values pass through untouched so that negation stays exact
    if a > -PI && a <= PI {
        return a;
    }
    let mut w = a - TAU * floor(a / TAU);
    // w in [0, 2π)
    if w > PI {
        w -= TAU;
    }
    w
}

/// Wraps an angle into [0, 2π).
pub fn wrap_positive(a: f64) -> f64 {
    let w = a - TAU * floor(a / TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub fn deg(rad: f64) -> f64 {
    rad * 180.0 / PI
}

pub fn rad(deg: f64) -> f64 {
    deg * PI / 180.0
}
