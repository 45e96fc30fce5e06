//! The `spatium` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error (bad input
//! data, failed preconditions), 3 runtime error (I/O, rendering).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use spatium_core::ambisonics::{
    build_decoder_with, decode, encode_coefficients, rotate_x, rotate_y, rotate_z, AmbisonicFormat, AmbisonicStream,
    DecoderOptions,
};
use spatium_core::binaural::{
    precompute_filter_matrix, stereo_widen, synthesize_spherical_head_set, virtual_speaker_hrirs, FilterRenderer,
    WidenerParams, DEFAULT_HEAD_RADIUS, DEFAULT_HRIR_TAPS,
};
use spatium_core::dbap::{dbap_pan, DbapConfig, DEFAULT_ROLLOFF_DB};
use spatium_core::geometry::validate_layout;
use spatium_core::hull::Dimensionality;
use spatium_core::math;
use spatium_core::panning::{delay_pan, ring_pan, tangent_law_gains_with, GainVector, PairwiseRing, DEFAULT_MAX_DELAY};
use spatium_core::render::{delay_signal, normalize_peak, RenderError, Renderer};
use spatium_core::scene::{stereo_pair_of, ValidationReport};
use spatium_core::vbap::vbap_pan;
use spatium_core::{Direction, LoudspeakerLayout, Vec3};

use crate::files::{
    load_hrir_index, load_layout, load_scene, parse_flavour, parse_normalization, read_ambisonic, read_audio,
    synthetic_hrirs_for, write_ambisonic, write_audio, write_hrir_index, write_json, FileError, LayoutFile,
};
use crate::wav::SampleFormat;

#[derive(Debug, Parser)]
#[command(
    name = "spatium",
    version,
    about = "Spatial audio panning, Ambisonics and binaural rendering"
)]
pub struct Cli {
    /// Emit results and errors as a single JSON document
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print per-speaker gains for a source direction or position
    Pan(PanArgs),
    /// Encode a mono file into an Ambisonic file
    Encode(EncodeArgs),
    /// Decode an Ambisonic file to loudspeakers or headphones
    Decode(DecodeArgs),
    /// Rotate a first-order Ambisonic file
    Rotate(RotateArgs),
    /// Render a scene file
    Render(RenderArgs),
    /// Inspect loudspeaker layouts
    #[command(subcommand)]
    Layout(LayoutCommand),
    /// Generate or inspect HRIR sets
    #[command(subcommand)]
    Hrir(HrirCommand),
    /// Widen a stereo file
    Widen(WidenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    StereoTangent,
    StereoDelay,
    RingPairwise,
    Vbap,
    Dbap,
    Ambisonics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    F32,
    F64,
}

impl OutFormat {
    fn resolve(choice: Option<OutFormat>, input: Option<SampleFormat>) -> SampleFormat {
        match (choice, input) {
            (Some(OutFormat::F32), _) => SampleFormat::Float32,
            (Some(OutFormat::F64), _) => SampleFormat::Float64,
            (None, Some(SampleFormat::Float64)) => SampleFormat::Float64,
            _ => SampleFormat::Float32,
        }
    }
}

#[derive(Debug, Args)]
pub struct PanArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Layout file or preset name
    #[arg(long)]
    pub layout: Option<String>,
    /// Degrees, counter-clockwise from the front
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,
    /// Degrees above the horizontal plane
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
    /// Source position `x,y,z` in metres (dbap)
    #[arg(long, allow_hyphen_values = true)]
    pub position: Option<String>,
    /// Spatial blur in metres (dbap)
    #[arg(long)]
    pub blur: Option<f64>,
    /// Rolloff in dB per distance doubling (dbap)
    #[arg(long)]
    pub rolloff: Option<f64>,
    /// Total power C of the gain vector (vbap)
    #[arg(long)]
    pub power: Option<f64>,
    /// 2 or 3 (vbap)
    #[arg(long)]
    pub dims: Option<u8>,
    /// Speaker half-angle in degrees when no layout is given (stereo)
    #[arg(long)]
    pub half_angle: Option<f64>,
    /// power or amplitude (stereo-tangent)
    #[arg(long)]
    pub normalization: Option<String>,
    /// Maximum inter-channel delay in ms (stereo-delay)
    #[arg(long)]
    pub max_delay_ms: Option<f64>,
    /// Horizontal order (ambisonics)
    #[arg(long)]
    pub order: Option<u32>,
    /// Periphonic order, defaults to the horizontal order (ambisonics)
    #[arg(long)]
    pub periphonic: Option<u32>,
    /// projection or pseudoinverse (ambisonics)
    #[arg(long)]
    pub decoder: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmbiFormatArg {
    Fuma,
    Acn,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,
    /// Input channel to encode
    #[arg(long, default_value_t = 0)]
    pub channel: usize,
    #[arg(long, value_enum, default_value_t = AmbiFormatArg::Fuma)]
    pub format: AmbiFormatArg,
    /// Horizontal order (acn)
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Periphonic order (acn), defaults to the horizontal order
    #[arg(long)]
    pub periphonic: Option<u32>,
    #[arg(long, value_enum)]
    pub sample_format: Option<OutFormat>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Loudspeaker layout (file or preset)
    #[arg(long, required_unless_present = "binaural")]
    pub layout: Option<String>,
    /// projection or pseudoinverse
    #[arg(long, default_value = "projection")]
    pub decoder: String,
    /// Delay nearer speakers to line up with the farthest one
    #[arg(long)]
    pub delay_compensation: bool,
    /// Render to headphones through virtual loudspeakers
    #[arg(long, conflicts_with = "layout")]
    pub binaural: bool,
    /// HRIR index; a synthetic spherical head is used when omitted
    #[arg(long, requires = "binaural")]
    pub hrir: Option<PathBuf>,
    /// Virtual layout, defaults to an octagon (horizontal) or cube
    #[arg(long, requires = "binaural")]
    pub virtual_layout: Option<String>,
    #[arg(long, value_enum)]
    pub sample_format: Option<OutFormat>,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Degrees about the vertical axis
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub yaw: f64,
    /// Degrees about the left-right axis (positive raises the front)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub pitch: f64,
    /// Degrees about the front axis (positive raises the left)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub roll: f64,
    #[arg(long, value_enum)]
    pub sample_format: Option<OutFormat>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Override the scene's block size
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Evaluate trajectories at every sample
    #[arg(long)]
    pub precise: bool,
    /// Scale the result so its peak magnitude equals this value
    #[arg(long)]
    pub normalize: Option<f64>,
    #[arg(long, value_enum)]
    pub sample_format: Option<OutFormat>,
}

#[derive(Debug, Subcommand)]
pub enum LayoutCommand {
    /// Check a layout against its declared category
    Validate {
        /// Layout file or preset name
        layout: String,
    },
    /// Print (or write) a built-in layout as a layout file
    Preset {
        name: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum HrirCommand {
    /// Generate a synthetic spherical-head HRIR set
    Gen {
        /// Index file to write; HRIR WAVs go next to it
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 48000)]
        sample_rate: u32,
        #[arg(long, default_value_t = DEFAULT_HRIR_TAPS)]
        taps: usize,
        /// Azimuth grid step in degrees
        #[arg(long, default_value_t = 15.0)]
        az_step: f64,
        /// Comma-separated elevations in degrees
        #[arg(long, default_value = "-30,0,30,60,90", allow_hyphen_values = true)]
        elevations: String,
        /// Metres
        #[arg(long, default_value_t = DEFAULT_HEAD_RADIUS)]
        head_radius: f64,
    },
    /// Summarise an HRIR index
    Info { index: PathBuf },
}

#[derive(Debug, Args)]
pub struct WidenArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = WidenerParams::default().side_gain)]
    pub side_gain: f64,
    #[arg(long, default_value_t = WidenerParams::default().crossfeed_gain)]
    pub crossfeed_gain: f64,
    /// Hz
    #[arg(long, default_value_t = WidenerParams::default().crossfeed_cutoff)]
    pub crossfeed_cutoff: f64,
    #[arg(long, default_value_t = WidenerParams::default().reflection_delay * 1000.0)]
    pub reflection_delay_ms: f64,
    #[arg(long, default_value_t = WidenerParams::default().reflection_gain)]
    pub reflection_gain: f64,
    /// Hz
    #[arg(long, default_value_t = WidenerParams::default().reflection_cutoff)]
    pub reflection_cutoff: f64,
    #[arg(long, value_enum)]
    pub sample_format: Option<OutFormat>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String, Option<ValidationReport>),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(..) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(..) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m, _) | CliError::Runtime(m) => m,
        }
    }
}

fn invalid(msg: impl std::fmt::Display) -> CliError {
    CliError::Validation(msg.to_string(), None)
}

/// Input problems are validation errors, write failures are runtime errors.
fn input_error(e: FileError) -> CliError {
    match e {
        FileError::Report(r) => CliError::Validation("scene is invalid".into(), Some(r)),
        FileError::Io { .. } => CliError::Validation(e.to_string(), None),
        other => CliError::Validation(other.to_string(), None),
    }
}

fn output_error(e: FileError) -> CliError {
    CliError::Runtime(e.to_string())
}

fn report_json(r: &ValidationReport) -> Value {
    Value::Array(
        r.issues
            .iter()
            .map(|i| json!({"code": i.code, "source": i.source, "message": i.message}))
            .collect(),
    )
}

/// A successful run: a JSON result plus its plain-text rendering.
pub struct Outcome {
    pub result: Value,
    pub text: String,
}

/// Runs the CLI with explicit arguments (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json_mode = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            if json_mode {
                let doc = json!({"ok": false, "exit_code": 1, "error": {"kind": "usage", "message": e.kind().to_string(), "details": e.to_string()}});
                eprintln!("{doc}");
            } else {
                eprint!("{e}");
            }
            return 1;
        }
    };
    let command = command_name(&cli.command);
    match execute(&cli.command) {
        Ok(out) => {
            if cli.json {
                println!("{}", json!({"ok": true, "command": command, "result": out.result}));
            } else if !out.text.is_empty() {
                print!("{}", out.text);
            }
            0
        }
        Err(e) => {
            if cli.json {
                let mut err = json!({"kind": e.kind(), "message": e.message()});
                if let CliError::Validation(_, Some(r)) = &e {
                    err["issues"] = report_json(r);
                }
                eprintln!(
                    "{}",
                    json!({"ok": false, "command": command, "exit_code": e.exit_code(), "error": err})
                );
            } else {
                eprintln!("error: {}", e.message());
                if let CliError::Validation(_, Some(r)) = &e {
                    eprintln!("{r}");
                }
            }
            e.exit_code()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Pan(_) => "pan",
        Command::Encode(_) => "encode",
        Command::Decode(_) => "decode",
        Command::Rotate(_) => "rotate",
        Command::Render(_) => "render",
        Command::Layout(_) => "layout",
        Command::Hrir(_) => "hrir",
        Command::Widen(_) => "widen",
    }
}

pub fn execute(c: &Command) -> Result<Outcome, CliError> {
    match c {
        Command::Pan(a) => pan(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Rotate(a) => rotate(a),
        Command::Render(a) => render_cmd(a),
        Command::Layout(a) => layout_cmd(a),
        Command::Hrir(a) => hrir_cmd(a),
        Command::Widen(a) => widen(a),
    }
}

/// `x` with nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-30..30).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn parse_position(s: &str) -> Result<Vec3, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
    match nums {
        Ok(v) if v.len() == 3 && v.iter().all(|x| x.is_finite()) => Ok(Vec3::new(v[0], v[1], v[2])),
        _ => Err(CliError::Usage(format!("--position expects x,y,z, got '{s}'"))),
    }
}

fn require_layout(a: &PanArgs) -> Result<LoudspeakerLayout, CliError> {
    let spec = a
        .layout
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--layout is required for {:?}", a.algo)))?;
    load_layout(spec).map_err(input_error)
}

fn pan(a: &PanArgs) -> Result<Outcome, CliError> {
    let only = |present: bool, flag: &str, algos: &[Algo]| -> Result<(), CliError> {
        if present && !algos.contains(&a.algo) {
            return Err(CliError::Usage(format!(
                "{flag} cannot be used with --algo {}",
                a.algo
                    .to_possible_value()
                    .map(|v| v.get_name().to_string())
                    .unwrap_or_default()
            )));
        }
        Ok(())
    };
    only(a.position.is_some(), "--position", &[Algo::Dbap])?;
    only(a.blur.is_some(), "--blur", &[Algo::Dbap])?;
    only(a.rolloff.is_some(), "--rolloff", &[Algo::Dbap])?;
    only(a.power.is_some(), "--power", &[Algo::Vbap])?;
    only(a.dims.is_some(), "--dims", &[Algo::Vbap])?;
    only(
        a.half_angle.is_some(),
        "--half-angle",
        &[Algo::StereoTangent, Algo::StereoDelay],
    )?;
    only(a.normalization.is_some(), "--normalization", &[Algo::StereoTangent])?;
    only(a.max_delay_ms.is_some(), "--max-delay-ms", &[Algo::StereoDelay])?;
    only(a.order.is_some(), "--order", &[Algo::Ambisonics])?;
    only(a.periphonic.is_some(), "--periphonic", &[Algo::Ambisonics])?;
    only(a.decoder.is_some(), "--decoder", &[Algo::Ambisonics])?;
    if a.layout.is_some() && a.half_angle.is_some() {
        return Err(CliError::Usage(
            "--half-angle and --layout are mutually exclusive".into(),
        ));
    }
    let position = a.position.as_deref().map(parse_position).transpose()?;
    let dir = Direction::from_degrees(a.azimuth, a.elevation);
    let stereo = || -> Result<(LoudspeakerLayout, f64, usize), CliError> {
        let layout = match &a.layout {
            Some(spec) => load_layout(spec).map_err(input_error)?,
            None => {
                let h = a.half_angle.unwrap_or(30.0);
                LoudspeakerLayout::from_degrees(
                    "stereo",
                    spatium_core::LayoutCategory::Irregular,
                    &[(h, 0.0, 1.0), (-h, 0.0, 1.0)],
                )
            }
        };
        let (half, left) = stereo_pair_of(&layout).map_err(invalid)?;
        Ok((layout, half, left))
    };
    let order_pair = |g: GainVector, left: usize| -> GainVector {
        if left == 0 {
            g
        } else {
            GainVector {
                gains: vec![g.gains[1], g.gains[0]],
                delays: vec![g.delays[1], g.delays[0]],
            }
        }
    };
    let mut extra = json!({});
    let (layout, gains) = match a.algo {
        Algo::StereoTangent => {
            let (layout, half, left) = stereo()?;
            let norm = parse_normalization(a.normalization.as_deref().unwrap_or("power")).map_err(CliError::Usage)?;
            let g = tangent_law_gains_with(dir.azimuth(), half, norm).map_err(invalid)?;
            (layout, order_pair(g, left))
        }
        Algo::StereoDelay => {
            let (layout, half, left) = stereo()?;
            let max = a.max_delay_ms.map_or(DEFAULT_MAX_DELAY, |ms| ms / 1000.0);
            let g = delay_pan(dir.azimuth(), half, max).map_err(invalid)?;
            (layout, order_pair(g, left))
        }
        Algo::RingPairwise => {
            let layout = require_layout(a)?;
            let ring = PairwiseRing::new(layout.clone()).map_err(invalid)?;
            (layout, ring_pan(dir.azimuth(), &ring))
        }
        Algo::Vbap => {
            let layout = require_layout(a)?;
            let dims = match a.dims {
                Some(d) => Dimensionality::from_u8(d).ok_or_else(|| CliError::Usage("--dims must be 2 or 3".into()))?,
                None if layout.is_horizontal() => Dimensionality::Two,
                None => Dimensionality::Three,
            };
            let power = a.power.unwrap_or(1.0);
            let g = vbap_pan(&layout, dims, dir, power).map_err(invalid)?;
            (layout, g)
        }
        Algo::Dbap => {
            let layout = require_layout(a)?;
            let cfg = DbapConfig::new(
                layout.clone(),
                a.rolloff.unwrap_or(DEFAULT_ROLLOFF_DB),
                a.blur.unwrap_or(0.0),
            )
            .map_err(invalid)?;
            let p = position.unwrap_or_else(|| Vec3::from_spherical(dir, layout.mean_distance()));
            let out = dbap_pan(p, &cfg);
            let e = out.effective_position;
            extra = json!({
                "effective_position": [e.x, e.y, e.z],
                "exterior_distance": out.exterior_distance,
                "coincident_speaker": out.coincident_speaker,
            });
            (layout, out.gains)
        }
        Algo::Ambisonics => {
            let layout = require_layout(a)?;
            let h = a.order.unwrap_or(1);
            let p = a.periphonic.unwrap_or(h);
            let flavour = parse_flavour(a.decoder.as_deref().unwrap_or("projection")).map_err(CliError::Usage)?;
            let format = AmbisonicFormat::acn_sn3d(h, p).map_err(invalid)?;
            let d = build_decoder_with(
                &layout,
                format,
                DecoderOptions {
                    flavour,
                    delay_compensation: !layout.is_equidistant(1e-6),
                },
            )
            .map_err(invalid)?;
            let coeffs = encode_coefficients(format, dir).map_err(invalid)?;
            let g = d.matrix().mul_vec(&coeffs);
            (
                layout.clone(),
                GainVector {
                    gains: g,
                    delays: d.delays().to_vec(),
                },
            )
        }
    };
    let algo = a
        .algo
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    let mut text = format!(
        "# algorithm {algo}, layout {}, {} speakers\n",
        layout.name,
        layout.len()
    );
    text.push_str("speaker\taz_deg\tel_deg\tgain\tdelay_ms\n");
    let mut rows = Vec::new();
    for (i, d) in layout.directions().iter().enumerate() {
        let (az, el) = (math::deg(d.azimuth()), math::deg(d.elevation()));
        let g = gains.gains[i];
        let delay_ms = gains.delays.get(i).copied().unwrap_or(0.0) * 1000.0;
        text.push_str(&format!(
            "{i}\t{}\t{}\t{}\t{}\n",
            sig9(az),
            sig9(el),
            sig9(g),
            sig9(delay_ms)
        ));
        rows.push(json!({"speaker": i, "az_deg": az, "el_deg": el, "gain": g, "delay_ms": delay_ms}));
    }
    let mut result = json!({
        "algorithm": algo,
        "layout": layout.name,
        "speakers": rows,
        "power": gains.power(),
    });
    if let (Value::Object(r), Value::Object(e)) = (&mut result, extra) {
        r.extend(e);
    }
    Ok(Outcome { result, text })
}

fn written(path: &Path, channels: usize, frames: usize, sample_rate: u32) -> Outcome {
    Outcome {
        result: json!({"output": path.display().to_string(), "channels": channels, "frames": frames, "sample_rate": sample_rate}),
        text: format!(
            "wrote {} ({channels} channels, {frames} frames at {sample_rate} Hz)\n",
            path.display()
        ),
    }
}

fn encode(a: &EncodeArgs) -> Result<Outcome, CliError> {
    let audio = read_audio(&a.input).map_err(input_error)?;
    let signal = audio
        .channels
        .get(a.channel)
        .ok_or_else(|| invalid(format!("{} has no channel {}", a.input.display(), a.channel)))?;
    let format = match a.format {
        AmbiFormatArg::Fuma => {
            if a.order != 1 || a.periphonic.is_some_and(|p| p != 1) {
                return Err(CliError::Usage("FuMa output is first order only".into()));
            }
            AmbisonicFormat::FUMA
        }
        AmbiFormatArg::Acn => AmbisonicFormat::acn_sn3d(a.order, a.periphonic.unwrap_or(a.order)).map_err(invalid)?,
    };
    let stream = AmbisonicStream::encode_mono(format, signal, Direction::from_degrees(a.azimuth, a.elevation))
        .map_err(invalid)?;
    let sf = OutFormat::resolve(a.sample_format, Some(audio.spec.format));
    write_ambisonic(&a.output, &stream, audio.spec.sample_rate, sf).map_err(output_error)?;
    Ok(written(
        &a.output,
        stream.channels.len(),
        stream.len(),
        audio.spec.sample_rate,
    ))
}

fn decode_cmd(a: &DecodeArgs) -> Result<Outcome, CliError> {
    let input = read_ambisonic(&a.input).map_err(input_error)?;
    let format = input.stream.format;
    let sr = input.sample_rate;
    let flavour = parse_flavour(&a.decoder).map_err(CliError::Usage)?;
    let options = DecoderOptions {
        flavour,
        delay_compensation: a.delay_compensation,
    };
    let sf = OutFormat::resolve(a.sample_format, Some(input.sample_format));
    let channels = if a.binaural {
        let layout = match &a.virtual_layout {
            Some(spec) => load_layout(spec).map_err(input_error)?,
            None if format.periphonic_order == 0 => LoudspeakerLayout::preset("octagon").expect("preset"),
            None => LoudspeakerLayout::preset("cube").expect("preset"),
        };
        let decoder = build_decoder_with(&layout, format, options).map_err(invalid)?;
        let set = match &a.hrir {
            Some(p) => {
                let loaded = load_hrir_index(p).map_err(input_error)?;
                if loaded.sample_rate != sr {
                    return Err(invalid(format!(
                        "HRIR sample rate {} differs from the input ({sr})",
                        loaded.sample_rate
                    )));
                }
                loaded.set
            }
            None => synthetic_hrirs_for(&layout, sr, DEFAULT_HEAD_RADIUS, DEFAULT_HRIR_TAPS),
        };
        let hrirs = virtual_speaker_hrirs(&layout, &set);
        let filters = precompute_filter_matrix(&decoder, &hrirs).map_err(invalid)?;
        let [l, r] = FilterRenderer::new(filters)
            .render(&input.stream, 4096)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        vec![l, r]
    } else {
        let spec = a.layout.as_deref().expect("clap enforces --layout");
        let layout = load_layout(spec).map_err(input_error)?;
        let decoder = build_decoder_with(&layout, format, options).map_err(invalid)?;
        let mut feeds = decode(&input.stream, &decoder).map_err(invalid)?;
        for (f, d) in feeds.iter_mut().zip(decoder.delays()) {
            if *d != 0.0 {
                *f = delay_signal(f, d * sr as f64);
            }
        }
        feeds
    };
    write_audio(&a.output, sr, &channels, sf).map_err(output_error)?;
    Ok(written(&a.output, channels.len(), channels[0].len(), sr))
}

fn rotate(a: &RotateArgs) -> Result<Outcome, CliError> {
    let input = read_ambisonic(&a.input).map_err(input_error)?;
    let (yaw, pitch, roll) = (math::rad(a.yaw), math::rad(a.pitch), math::rad(a.roll));
    let out = input
        .stream
        .map_frames(|_, f| {
            let mut f = f.clone();
            if roll != 0.0 {
                f = rotate_x(&f, roll)?;
            }
            if pitch != 0.0 {
                f = rotate_y(&f, pitch)?;
            }
            if yaw != 0.0 {
                f = rotate_z(&f, yaw)?;
            }
            Ok(f)
        })
        .map_err(|e: spatium_core::ambisonics::AmbisonicsError| invalid(e))?;
    let sf = OutFormat::resolve(a.sample_format, Some(input.sample_format));
    write_ambisonic(&a.output, &out, input.sample_rate, sf).map_err(output_error)?;
    Ok(written(&a.output, out.channels.len(), out.len(), input.sample_rate))
}

fn render_cmd(a: &RenderArgs) -> Result<Outcome, CliError> {
    let mut scene = load_scene(&a.scene).map_err(input_error)?;
    if let Some(b) = a.block_size {
        if b == 0 {
            return Err(CliError::Usage("--block-size must be at least 1".into()));
        }
        scene.block_size = b;
    }
    scene.precise |= a.precise;
    let sr = scene.sample_rate;
    let mut renderer = Renderer::new(scene).map_err(|e| match e {
        RenderError::Invalid(r) => CliError::Validation("scene is invalid".into(), Some(r)),
        other => CliError::Runtime(other.to_string()),
    })?;
    let mut out = vec![Vec::with_capacity(renderer.total_samples()); renderer.output_channels()];
    while let Some(block) = renderer.next_block().map_err(|e| CliError::Runtime(e.to_string()))? {
        for (o, b) in out.iter_mut().zip(block) {
            o.extend(b);
        }
    }
    let mut gain = 1.0;
    if let Some(peak) = a.normalize {
        if !(peak > 0.0) {
            return Err(CliError::Usage("--normalize expects a positive peak".into()));
        }
        gain = normalize_peak(&mut out, peak);
    }
    let sf = OutFormat::resolve(a.sample_format, None);
    write_audio(&a.output, sr, &out, sf).map_err(output_error)?;
    let mut o = written(&a.output, out.len(), out[0].len(), sr);
    o.result["normalization_gain"] = json!(gain);
    Ok(o)
}

fn layout_cmd(c: &LayoutCommand) -> Result<Outcome, CliError> {
    match c {
        LayoutCommand::Validate { layout } => {
            let l = load_layout(layout).map_err(input_error)?;
            let report = validate_layout(&l).map_err(invalid)?;
            let messages = report.messages();
            if !report.is_valid() {
                return Err(invalid(format!(
                    "layout '{}' does not satisfy category {}: {}",
                    l.name,
                    l.category.as_str(),
                    messages.join("; ")
                )));
            }
            Ok(Outcome {
                result: json!({"layout": l.name, "category": l.category.as_str(), "speakers": l.len(), "valid": true}),
                text: format!(
                    "layout '{}' ({}, {} speakers) is valid\n",
                    l.name,
                    l.category.as_str(),
                    l.len()
                ),
            })
        }
        LayoutCommand::Preset { name, output } => {
            let l = LoudspeakerLayout::preset(name).ok_or_else(|| {
                invalid(format!(
                    "unknown preset '{name}' (available: {})",
                    LoudspeakerLayout::PRESETS.join(", ")
                ))
            })?;
            let file = LayoutFile::from_layout(&l);
            let value = serde_json::to_value(&file).expect("serialisable layout");
            match output {
                Some(p) => {
                    write_json(p, &file).map_err(output_error)?;
                    Ok(Outcome {
                        result: json!({"output": p.display().to_string(), "layout": value}),
                        text: format!("wrote {}\n", p.display()),
                    })
                }
                None => Ok(Outcome {
                    text: serde_json::to_string_pretty(&value).expect("json") + "\n",
                    result: value,
                }),
            }
        }
    }
}

fn hrir_cmd(c: &HrirCommand) -> Result<Outcome, CliError> {
    match c {
        HrirCommand::Gen {
            output,
            sample_rate,
            taps,
            az_step,
            elevations,
            head_radius,
        } => {
            let els: Result<Vec<f64>, _> = elevations.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let els = els.map_err(|_| CliError::Usage(format!("--elevations expects numbers, got '{elevations}'")))?;
            if els.iter().any(|e| e.abs() > 90.0) {
                return Err(invalid("elevations must lie within [-90, 90] degrees"));
            }
            if *taps == 0 || *sample_rate == 0 {
                return Err(invalid("taps and sample rate must be positive"));
            }
            let els: Vec<f64> = els.into_iter().map(math::rad).collect();
            let set =
                synthesize_spherical_head_set(math::rad(*az_step), &els, *head_radius, *sample_rate as f64, *taps)
                    .map_err(invalid)?;
            if let Some(dir) = output.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
                }
            }
            let index = write_hrir_index(output, &set, *sample_rate).map_err(output_error)?;
            Ok(Outcome {
                result: json!({"output": output.display().to_string(), "entries": index.entries.len(), "taps": taps, "sample_rate": sample_rate}),
                text: format!(
                    "wrote {} ({} directions, {taps} taps)\n",
                    output.display(),
                    index.entries.len()
                ),
            })
        }
        HrirCommand::Info { index } => {
            let loaded = load_hrir_index(index).map_err(input_error)?;
            let set = &loaded.set;
            let result = json!({
                "entries": set.len(),
                "sample_rate": loaded.sample_rate,
                "max_taps": set.max_taps(),
                "symmetric_head": set.symmetric_head(),
                "azimuth_spacing_deg": set.azimuth_spacing().map(math::deg),
                "elevation_spacing_deg": set.elevation_spacing().map(math::deg),
            });
            let text = format!(
                "{} directions, {} Hz, up to {} taps, symmetric head: {}\n",
                set.len(),
                loaded.sample_rate,
                set.max_taps(),
                set.symmetric_head()
            );
            Ok(Outcome { result, text })
        }
    }
}

fn widen(a: &WidenArgs) -> Result<Outcome, CliError> {
    let audio = read_audio(&a.input).map_err(input_error)?;
    if audio.channels.len() != 2 {
        return Err(invalid(format!(
            "{} has {} channels, widening needs stereo",
            a.input.display(),
            audio.channels.len()
        )));
    }
    let params = WidenerParams {
        side_gain: a.side_gain,
        crossfeed_gain: a.crossfeed_gain,
        crossfeed_cutoff: a.crossfeed_cutoff,
        reflection_delay: a.reflection_delay_ms / 1000.0,
        reflection_gain: a.reflection_gain,
        reflection_cutoff: a.reflection_cutoff,
    };
    let sr = audio.spec.sample_rate;
    let (l, r) = stereo_widen(&audio.channels[0], &audio.channels[1], params, sr as f64).map_err(invalid)?;
    let sf = OutFormat::resolve(a.sample_format, Some(audio.spec.format));
    let frames = l.len();
    write_audio(&a.output, sr, &[l, r], sf).map_err(output_error)?;
    Ok(written(&a.output, 2, frames, sr))
}
