//! JSON documents: loudspeaker layouts, scenes, HRIR indexes and the
//! Ambisonic channel-format sidecar. Angles are in degrees in every file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spatium_core::ambisonics::{
    AmbisonicFormat, AmbisonicStream, ChannelOrdering, ComponentNormalization, DecoderFlavour,
};
use spatium_core::binaural::{
    synthesize_spherical_head_hrir, DistanceClass, Hrir, HrirSet, DEFAULT_HEAD_RADIUS, DEFAULT_HRIR_TAPS,
};
use spatium_core::hull::Dimensionality;
use spatium_core::math;
use spatium_core::panning::{Normalization, DEFAULT_MAX_DELAY};
use spatium_core::scene::{
    Algorithm, Interpolation, Keyframe, Location, Scene, Source, SourceSignal, ValidationIssue, ValidationReport,
    YawKey, DEFAULT_BLOCK_SIZE,
};
use spatium_core::{Direction, LayoutCategory, LoudspeakerLayout, Vec3};

use crate::wav::{read_wav, write_wav, Audio, SampleFormat, WavError};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: {source}")]
    Wav { path: String, source: WavError },
    #[error("{0}")]
    Invalid(String),
    #[error("scene is invalid:\n{0}")]
    Report(ValidationReport),
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FileError> {
    let text = fs::read_to_string(path).map_err(|source| FileError::Io {
        path: display(path),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| FileError::Json {
        path: display(path),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FileError> {
    let text = serde_json::to_string_pretty(value).expect("serialisable document");
    fs::write(path, text + "\n").map_err(|source| FileError::Io {
        path: display(path),
        source,
    })
}

pub fn read_audio(path: &Path) -> Result<Audio, FileError> {
    read_wav(path).map_err(|source| FileError::Wav {
        path: display(path),
        source,
    })
}

pub fn write_audio(
    path: &Path,
    sample_rate: u32,
    channels: &[Vec<f64>],
    format: SampleFormat,
) -> Result<(), FileError> {
    write_wav(path, sample_rate, channels, format).map_err(|source| FileError::Wav {
        path: display(path),
        source,
    })
}

// ---------------------------------------------------------------- layouts

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerEntry {
    pub az_deg: f64,
    #[serde(default)]
    pub el_deg: f64,
    #[serde(default = "one")]
    pub dist_m: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub name: String,
    #[serde(default = "irregular")]
    pub category: String,
    pub speakers: Vec<SpeakerEntry>,
}

fn irregular() -> String {
    "irregular".into()
}

impl LayoutFile {
    pub fn from_layout(layout: &LoudspeakerLayout) -> Self {
        Self {
            name: layout.name.clone(),
            category: layout.category.as_str().into(),
            speakers: layout
                .speakers
                .iter()
                .map(|p| {
                    let d = p.direction();
                    SpeakerEntry {
                        az_deg: math::deg(d.azimuth()),
                        el_deg: math::deg(d.elevation()),
                        dist_m: p.norm(),
                    }
                })
                .collect(),
        }
    }

    pub fn to_layout(&self) -> Result<LoudspeakerLayout, FileError> {
        let category = LayoutCategory::parse(&self.category).ok_or_else(|| {
            FileError::Invalid(format!(
                "unknown layout category '{}' (expected regular, diametric-pairs or irregular)",
                self.category
            ))
        })?;
        if self.speakers.is_empty() {
            return Err(FileError::Invalid("layout has no speakers".into()));
        }
        if self
            .speakers
            .iter()
            .any(|s| !s.az_deg.is_finite() || !s.el_deg.is_finite() || !(s.dist_m > 0.0 && s.dist_m.is_finite()))
        {
            return Err(FileError::Invalid(
                "speaker angles must be finite and distances positive".into(),
            ));
        }
        if self.speakers.iter().any(|s| s.el_deg.abs() > 90.0) {
            return Err(FileError::Invalid(
                "speaker elevation must lie within [-90, 90] degrees".into(),
            ));
        }
        let triples: Vec<(f64, f64, f64)> = self.speakers.iter().map(|s| (s.az_deg, s.el_deg, s.dist_m)).collect();
        Ok(LoudspeakerLayout::from_degrees(self.name.clone(), category, &triples))
    }
}

/// Loads a layout file, or a built-in preset when `spec` names one and no
/// such file exists.
pub fn load_layout(spec: &str) -> Result<LoudspeakerLayout, FileError> {
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(l) = LoudspeakerLayout::preset(spec) {
            return Ok(l);
        }
    }
    read_json::<LayoutFile>(path)?.to_layout()
}

// ---------------------------------------------------------------- sidecar

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbiSidecar {
    /// `"fuma"` or `"acn"`.
    pub ordering: String,
    /// `"fuma"` or `"sn3d"`.
    pub normalization: String,
    #[serde(rename = "H")]
    pub horizontal_order: u32,
    #[serde(rename = "P")]
    pub periphonic_order: u32,
}

impl AmbiSidecar {
    pub fn from_format(f: AmbisonicFormat) -> Self {
        Self {
            ordering: match f.ordering {
                ChannelOrdering::FumaWxyz => "fuma",
                ChannelOrdering::Acn => "acn",
            }
            .into(),
            normalization: match f.normalization {
                ComponentNormalization::Fuma => "fuma",
                ComponentNormalization::Sn3d => "sn3d",
            }
            .into(),
            horizontal_order: f.horizontal_order,
            periphonic_order: f.periphonic_order,
        }
    }

    pub fn to_format(&self) -> Result<AmbisonicFormat, FileError> {
        let ordering = match self.ordering.as_str() {
            "fuma" => ChannelOrdering::FumaWxyz,
            "acn" => ChannelOrdering::Acn,
            o => return Err(FileError::Invalid(format!("unknown channel ordering '{o}'"))),
        };
        let normalization = match self.normalization.as_str() {
            "fuma" => ComponentNormalization::Fuma,
            "sn3d" => ComponentNormalization::Sn3d,
            n => return Err(FileError::Invalid(format!("unknown normalisation '{n}'"))),
        };
        let f = AmbisonicFormat {
            ordering,
            normalization,
            horizontal_order: self.horizontal_order,
            periphonic_order: self.periphonic_order,
        };
        f.validate().map_err(|e| FileError::Invalid(e.to_string()))?;
        Ok(f)
    }
}

/// `<dir>/<name>.ambi.json` for `<dir>/<name>.wav`.
pub fn sidecar_path(audio: &Path) -> PathBuf {
    let stem = audio
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    audio.with_file_name(format!("{stem}.ambi.json"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbisonicFile {
    pub stream: AmbisonicStream,
    pub sample_rate: u32,
    pub sample_format: SampleFormat,
}

/// Reads an Ambisonic WAV. Without a sidecar a 4-channel file is taken as
/// FuMa B-format and an `(N+1)²`-channel file as full-sphere ACN/SN3D.
pub fn read_ambisonic(path: &Path) -> Result<AmbisonicFile, FileError> {
    let audio = read_audio(path)?;
    let side = sidecar_path(path);
    let n = audio.channels.len();
    let format = if side.exists() {
        read_json::<AmbiSidecar>(&side)?.to_format()?
    } else if n == 4 {
        AmbisonicFormat::FUMA
    } else {
        let side_len = (n as f64).sqrt().round() as u32;
        if side_len == 0 || (side_len * side_len) as usize != n {
            return Err(FileError::Invalid(format!(
                "{}: cannot infer the Ambisonic format of a {n}-channel file without {}",
                display(path),
                display(&side)
            )));
        }
        AmbisonicFormat::acn_sn3d(side_len - 1, side_len - 1).map_err(|e| FileError::Invalid(e.to_string()))?
    };
    let sample_rate = audio.spec.sample_rate;
    let sample_format = audio.spec.format;
    let stream = AmbisonicStream::new(format, audio.channels)
        .map_err(|e| FileError::Invalid(format!("{}: {e}", display(path))))?;
    Ok(AmbisonicFile {
        stream,
        sample_rate,
        sample_format,
    })
}

pub fn write_ambisonic(
    path: &Path,
    stream: &AmbisonicStream,
    sample_rate: u32,
    format: SampleFormat,
) -> Result<(), FileError> {
    write_audio(path, sample_rate, &stream.channels, format)?;
    write_json(&sidecar_path(path), &AmbiSidecar::from_format(stream.format))
}

// ---------------------------------------------------------------- HRIRs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HrirIndexEntry {
    pub az_deg: f64,
    #[serde(default)]
    pub el_deg: f64,
    /// `"far"` or a near-field measurement distance in metres.
    #[serde(default = "far")]
    pub distance: serde_json::Value,
    pub left: String,
    pub right: String,
}

fn far() -> serde_json::Value {
    serde_json::Value::String("far".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HrirIndex {
    pub sample_rate: u32,
    #[serde(default)]
    pub symmetric_head: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub azimuth_spacing_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elevation_spacing_deg: Option<f64>,
    pub entries: Vec<HrirIndexEntry>,
}

pub struct LoadedHrirs {
    pub set: HrirSet,
    pub sample_rate: u32,
}

pub fn load_hrir_index(path: &Path) -> Result<LoadedHrirs, FileError> {
    let index: HrirIndex = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mono = |name: &str| -> Result<Vec<f64>, FileError> {
        let p = dir.join(name);
        let a = read_audio(&p)?;
        if a.channels.len() != 1 {
            return Err(FileError::Invalid(format!("{}: HRIR files must be mono", display(&p))));
        }
        if a.spec.sample_rate != index.sample_rate {
            return Err(FileError::Invalid(format!(
                "{}: sample rate {} differs from the index ({})",
                display(&p),
                a.spec.sample_rate,
                index.sample_rate
            )));
        }
        Ok(a.channels.into_iter().next().unwrap_or_default())
    };
    let mut entries = Vec::with_capacity(index.entries.len());
    for e in &index.entries {
        let mut h = Hrir::new(
            mono(&e.left)?,
            mono(&e.right)?,
            Direction::from_degrees(e.az_deg, e.el_deg),
        )
        .map_err(|err| FileError::Invalid(format!("HRIR at ({}, {}): {err}", e.az_deg, e.el_deg)))?;
        h.distance_class = match &e.distance {
            serde_json::Value::String(s) if s == "far" => DistanceClass::FarField,
            serde_json::Value::Number(n) => DistanceClass::NearField(n.as_f64().unwrap_or(f64::NAN)),
            other => return Err(FileError::Invalid(format!("bad HRIR distance class {other}"))),
        };
        entries.push(h);
    }
    let set = HrirSet::new(entries, index.symmetric_head)
        .map_err(|e| FileError::Invalid(format!("{}: {e}", display(path))))?
        .with_grid(
            index.azimuth_spacing_deg.map(math::rad),
            index.elevation_spacing_deg.map(math::rad),
        );
    Ok(LoadedHrirs {
        set,
        sample_rate: index.sample_rate,
    })
}

/// Writes every HRIR as a pair of mono float WAVs next to `index_path`.
pub fn write_hrir_index(index_path: &Path, set: &HrirSet, sample_rate: u32) -> Result<HrirIndex, FileError> {
    let dir = index_path.parent().unwrap_or(Path::new("."));
    let mut entries = Vec::new();
    for h in set.entries() {
        let az = math::deg(h.direction.azimuth());
        let el = math::deg(h.direction.elevation());
        let tag = format!("az{:+08.3}_el{:+07.3}", az, el).replace('.', "p");
        let (l, r) = (format!("{tag}_L.wav"), format!("{tag}_R.wav"));
        write_audio(
            &dir.join(&l),
            sample_rate,
            std::slice::from_ref(&h.left),
            SampleFormat::Float64,
        )?;
        write_audio(
            &dir.join(&r),
            sample_rate,
            std::slice::from_ref(&h.right),
            SampleFormat::Float64,
        )?;
        entries.push(HrirIndexEntry {
            az_deg: az,
            el_deg: el,
            distance: match h.distance_class {
                DistanceClass::FarField => far(),
                DistanceClass::NearField(d) => serde_json::json!(d),
            },
            left: l,
            right: r,
        });
    }
    let index = HrirIndex {
        sample_rate,
        symmetric_head: set.symmetric_head(),
        azimuth_spacing_deg: set.azimuth_spacing().map(math::deg),
        elevation_spacing_deg: set.elevation_spacing().map(math::deg),
        entries,
    };
    write_json(index_path, &index)?;
    Ok(index)
}

/// Spherical-head HRIRs exactly at each speaker of a virtual layout.
pub fn synthetic_hrirs_for(layout: &LoudspeakerLayout, sample_rate: u32, head_radius: f64, taps: usize) -> HrirSet {
    let mut entries: Vec<Hrir> = Vec::new();
    for d in layout.directions() {
        if entries.iter().any(|e| e.direction.angle_to(&d) < 1e-9) {
            continue;
        }
        entries.push(synthesize_spherical_head_hrir(d, head_radius, sample_rate as f64, taps));
    }
    HrirSet::new(entries, false).expect("distinct, valid HRIRs")
}

// ---------------------------------------------------------------- scenes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    StereoTangent {
        /// `"power"` (default) or `"amplitude"`.
        #[serde(default)]
        normalization: Option<String>,
    },
    StereoDelay {
        #[serde(default)]
        max_delay_ms: Option<f64>,
    },
    RingPairwise,
    Ambisonics {
        #[serde(default = "one_u32")]
        horizontal_order: u32,
        #[serde(default)]
        periphonic_order: Option<u32>,
        #[serde(default)]
        decoder: Option<String>,
        #[serde(default)]
        delay_compensation: bool,
    },
    Vbap {
        #[serde(default = "two_u8")]
        dimensions: u8,
        #[serde(default)]
        power: Option<f64>,
    },
    Dbap {
        #[serde(default)]
        rolloff_db: Option<f64>,
        #[serde(default)]
        blur: f64,
        #[serde(default)]
        exterior_attenuation: bool,
    },
}

fn one_u32() -> u32 {
    1
}

fn two_u8() -> u8 {
    2
}

impl AlgorithmSpec {
    pub fn to_algorithm(&self) -> Result<Algorithm, String> {
        Ok(match self {
            AlgorithmSpec::StereoTangent { normalization } => Algorithm::StereoTangent {
                normalization: parse_normalization(normalization.as_deref().unwrap_or("power"))?,
            },
            AlgorithmSpec::StereoDelay { max_delay_ms } => Algorithm::StereoDelay {
                max_delay: max_delay_ms.map_or(DEFAULT_MAX_DELAY, |ms| ms / 1000.0),
            },
            AlgorithmSpec::RingPairwise => Algorithm::RingPairwise,
            AlgorithmSpec::Ambisonics {
                horizontal_order,
                periphonic_order,
                decoder,
                delay_compensation,
            } => Algorithm::Ambisonics {
                horizontal_order: *horizontal_order,
                periphonic_order: periphonic_order.unwrap_or(*horizontal_order),
                flavour: parse_flavour(decoder.as_deref().unwrap_or("projection"))?,
                delay_compensation: *delay_compensation,
            },
            AlgorithmSpec::Vbap { dimensions, power } => Algorithm::Vbap {
                dimensionality: Dimensionality::from_u8(*dimensions)
                    .ok_or_else(|| format!("VBAP dimensions must be 2 or 3, got {dimensions}"))?,
                power: power.unwrap_or(1.0),
            },
            AlgorithmSpec::Dbap {
                rolloff_db,
                blur,
                exterior_attenuation,
            } => Algorithm::Dbap {
                rolloff_db: rolloff_db.unwrap_or(spatium_core::dbap::DEFAULT_ROLLOFF_DB),
                blur: *blur,
                exterior_attenuation: *exterior_attenuation,
            },
        })
    }
}

pub fn parse_normalization(s: &str) -> Result<Normalization, String> {
    match s {
        "power" => Ok(Normalization::UnitPower),
        "amplitude" => Ok(Normalization::UnitAmplitude),
        other => Err(format!("unknown normalisation '{other}' (expected power or amplitude)")),
    }
}

pub fn parse_flavour(s: &str) -> Result<DecoderFlavour, String> {
    DecoderFlavour::parse(s).ok_or_else(|| format!("unknown decoder '{s}' (expected projection or pseudoinverse)"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayoutRef {
    /// Preset name or path to a layout file.
    Named(String),
    Inline(LayoutFile),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticHead {
    #[serde(default = "head_radius")]
    pub head_radius: f64,
    #[serde(default = "hrir_taps")]
    pub taps: usize,
}

fn head_radius() -> f64 {
    DEFAULT_HEAD_RADIUS
}

fn hrir_taps() -> usize {
    DEFAULT_HRIR_TAPS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum BinauralSpec {
    /// Path to an HRIR index.
    Hrir(String),
    Synthetic(SyntheticHead),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalSpec {
    Sine {
        frequency: f64,
    },
    Noise {
        seed: u64,
    },
    Impulse,
    File {
        path: String,
        #[serde(default)]
        channel: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeSpec {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub az_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub el_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    #[serde(default = "one")]
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub name: String,
    pub signal: SignalSpec,
    #[serde(default)]
    pub interpolation: Option<String>,
    pub keyframes: Vec<KeyframeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YawKeySpec {
    pub t: f64,
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub sample_rate: u32,
    pub duration: f64,
    pub algorithm: AlgorithmSpec,
    pub layout: LayoutRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binaural: Option<BinauralSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_yaw: Option<Vec<YawKeySpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default)]
    pub precise: bool,
    pub sources: Vec<SourceSpec>,
}

fn issue(code: &'static str, source: Option<&str>, message: impl Into<String>) -> ValidationIssue {
    ValidationIssue {
        code,
        source: source.map(str::to_string),
        message: message.into(),
    }
}

impl SceneFile {
    /// Resolves file references relative to `base_dir` and builds the
    /// scene. Every problem found on the way is reported together.
    pub fn to_scene(&self, base_dir: &Path) -> Result<Scene, ValidationReport> {
        let mut issues = Vec::new();
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let algorithm = self.algorithm.to_algorithm().unwrap_or_else(|e| {
            issues.push(issue("algorithm", None, e));
            Algorithm::RingPairwise
        });
        let layout = match &self.layout {
            LayoutRef::Named(n) => {
                let path = resolve(n);
                let spec = if path.exists() {
                    path.to_string_lossy().into_owned()
                } else {
                    n.clone()
                };
                load_layout(&spec)
                    .map_err(|e| issues.push(issue("file", None, format!("layout: {e}"))))
                    .ok()
            }
            LayoutRef::Inline(f) => f
                .to_layout()
                .map_err(|e| issues.push(issue("layout", None, e.to_string())))
                .ok(),
        };
        let binaural = match (&self.binaural, &layout) {
            (None, _) => None,
            (Some(BinauralSpec::Hrir(p)), _) => match load_hrir_index(&resolve(p)) {
                Ok(h) if h.sample_rate == self.sample_rate => Some(h.set),
                Ok(h) => {
                    issues.push(issue(
                        "hrir",
                        None,
                        format!(
                            "HRIR sample rate {} differs from the scene ({})",
                            h.sample_rate, self.sample_rate
                        ),
                    ));
                    None
                }
                Err(e) => {
                    issues.push(issue("file", None, format!("HRIR index: {e}")));
                    None
                }
            },
            (Some(BinauralSpec::Synthetic(head)), Some(l)) => {
                if head.taps == 0 || !(head.head_radius >= 0.0) {
                    issues.push(issue(
                        "hrir",
                        None,
                        "synthetic head needs taps >= 1 and a non-negative radius",
                    ));
                    None
                } else {
                    Some(synthetic_hrirs_for(l, self.sample_rate, head.head_radius, head.taps))
                }
            }
            (Some(_), None) => None,
        };
        let mut sources = Vec::new();
        for s in &self.sources {
            let name = Some(s.name.as_str());
            let signal = match &s.signal {
                SignalSpec::Sine { frequency } => SourceSignal::Sine { frequency: *frequency },
                SignalSpec::Noise { seed } => SourceSignal::Noise { seed: *seed },
                SignalSpec::Impulse => SourceSignal::Impulse,
                SignalSpec::File { path, channel } => match read_audio(&resolve(path)) {
                    Ok(a) if a.spec.sample_rate != self.sample_rate => {
                        issues.push(issue(
                            "file",
                            name,
                            format!("{path}: sample rate {} differs from the scene", a.spec.sample_rate),
                        ));
                        SourceSignal::Impulse
                    }
                    Ok(a) => match a.channels.into_iter().nth(*channel) {
                        Some(c) => SourceSignal::Samples(c),
                        None => {
                            issues.push(issue("file", name, format!("{path} has no channel {channel}")));
                            SourceSignal::Impulse
                        }
                    },
                    Err(e) => {
                        issues.push(issue("file", name, e.to_string()));
                        SourceSignal::Impulse
                    }
                },
            };
            let interpolation = match s.interpolation.as_deref() {
                None | Some("linear") => Interpolation::Linear,
                Some("hold") => Interpolation::Hold,
                Some(other) => {
                    issues.push(issue("interpolation", name, format!("unknown interpolation '{other}'")));
                    Interpolation::Linear
                }
            };
            let mut keyframes = Vec::new();
            for k in &s.keyframes {
                let location = match (k.position, k.az_deg, k.el_deg) {
                    (Some(p), None, None) => Location::Position(Vec3::new(p[0], p[1], p[2])),
                    (None, Some(az), el) => Location::Direction(Direction::from_degrees(az, el.unwrap_or(0.0))),
                    _ => {
                        issues.push(issue(
                            "keyframe-location",
                            name,
                            format!("keyframe at t = {} needs either az_deg/el_deg or position", k.t),
                        ));
                        continue;
                    }
                };
                keyframes.push(Keyframe {
                    time: k.t,
                    location,
                    gain: k.gain,
                });
            }
            sources.push(Source {
                name: s.name.clone(),
                signal,
                keyframes,
                interpolation,
            });
        }
        let Some(layout) = layout else {
            return Err(ValidationReport { issues });
        };
        let mut scene = Scene::new(self.sample_rate, self.duration, algorithm, layout);
        scene.binaural = binaural;
        scene.sources = sources;
        scene.head_yaw = self.head_yaw.as_ref().map(|ks| {
            ks.iter()
                .map(|k| YawKey {
                    time: k.t,
                    yaw: math::rad(k.yaw_deg),
                })
                .collect()
        });
        scene.block_size = self.block_size.unwrap_or(DEFAULT_BLOCK_SIZE);
        scene.precise = self.precise;
        let mut report = spatium_core::scene::validate_scene(&scene);
        issues.append(&mut report.issues);
        if issues.is_empty() {
            Ok(scene)
        } else {
            Err(ValidationReport { issues })
        }
    }
}

/// Parses a scene file and resolves its references; validation problems
/// come back as [`FileError::Report`].
pub fn load_scene(path: &Path) -> Result<Scene, FileError> {
    let file: SceneFile = read_json(path)?;
    file.to_scene(path.parent().unwrap_or(Path::new(".")))
        .map_err(FileError::Report)
}
