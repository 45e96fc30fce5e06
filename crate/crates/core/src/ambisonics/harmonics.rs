//! Real spherical harmonics with Schmidt semi-normalisation (SN3D) and no
//! Condon–Shortley phase, so that the first-order set reduces to the
//! direction cosines of the B-format.

use crate::geometry::Direction;
use crate::math;

use super::AmbisonicsError;

/// Harmonic of degree `m`, order `n ≤ m` and sign `sigma` (+1 selects
/// `cos(nθ)`, −1 selects `sin(nθ)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SphericalHarmonicIndex {
    degree: u32,
    order: u32,
    sigma: i8,
}

impl SphericalHarmonicIndex {
    pub fn new(degree: u32, order: u32, sigma: i8) -> Result<Self, AmbisonicsError> {
        if order > degree || !(sigma == 1 || sigma == -1) || (order == 0 && sigma != 1) {
            return Err(AmbisonicsError::InvalidIndex { degree, order, sigma });
        }
        Ok(Self { degree, order, sigma })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn sigma(&self) -> i8 {
        self.sigma
    }

    /// ACN channel number `m² + m + σ·n`.
    pub fn acn(&self) -> usize {
        let m = self.degree as i64;
        (m * m + m + self.sigma as i64 * self.order as i64) as usize
    }

    /// Inverse of [`acn`](Self::acn).
    pub fn from_acn(acn: usize) -> Self {
        let m = math::floor(math::sqrt(acn as f64)) as i64;
        // guard against rounding of the square root
        let m = if (m + 1) * (m + 1) <= acn as i64 { m + 1 } else { m };
        let k = acn as i64 - m * m - m;
        Self {
            degree: m as u32,
            order: k.unsigned_abs() as u32,
            sigma: if k < 0 { -1 } else { 1 },
        }
    }

    /// True for the sectoral harmonics (`n = m`) that carry horizontal detail.
    pub fn is_sectoral(&self) -> bool {
        self.degree == self.order
    }
}

/// SN3D associated Legendre function `P̃_mn(x)` without Condon–Shortley phase.
pub fn associated_legendre_sn3d(degree: u32, order: u32, x: f64) -> f64 {
    let (m, n) = (degree as usize, order as usize);
    if n > m {
        return 0.0;
    }
    let s = math::sqrt((1.0 - x * x).max(0.0));
    // P_nn = (2n−1)!! s^n
    let mut pnn = 1.0;
    for k in 1..=n {
        pnn *= (2 * k - 1) as f64 * s;
    }
    let p = if m == n {
        pnn
    } else {
        let mut prev = pnn;
        let mut cur = x * (2 * n + 1) as f64 * pnn;
        for l in n + 2..=m {
            let next = ((2 * l - 1) as f64 * x * cur - (l + n - 1) as f64 * prev) / (l - n) as f64;
            prev = cur;
            cur = next;
        }
        cur
    };
    // sqrt((2 − δ_n0) (m−n)! / (m+n)!)
    let mut ratio = 1.0;
    for k in (m - n + 1)..=(m + n) {
        ratio /= k as f64;
    }
    let delta = if n == 0 { 1.0 } else { 2.0 };
    p * math::sqrt(delta * ratio)
}

/// `Y^σ_mn(θ, φ) = P̃_mn(sin φ) · {cos nθ | sin nθ}`.
pub fn spherical_harmonic(idx: SphericalHarmonicIndex, d: Direction) -> f64 {
    let legendre = associated_legendre_sn3d(idx.degree, idx.order, math::sin(d.elevation()));
    let angle = idx.order as f64 * d.azimuth();
    let azimuthal = if idx.sigma > 0 {
        math::cos(angle)
    } else {
        math::sin(angle)
    };
    legendre * azimuthal
}
