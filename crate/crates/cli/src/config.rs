//! Flat `key = value` pipeline configuration.
//!
//! Lines are `section.key = value`; `#` starts a comment. Later assignments
//! win, so `--set` overrides are applied after the file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use turbodetect::decomposition::{DecompositionParams, TransformConfig};
use turbodetect::detection::{DetectionParams, ThresholdMode};
use turbodetect::flow::{FlowMethod, FlowParams};
use turbodetect::io::GroundTruthFormat;
use turbodetect::synth::{SynthSpec, TemporalModel};
use turbodetect::transforms::CurveletConfig;
use turbodetect::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInput {
    pub dir: PathBuf,
    pub pattern: Option<String>,
    pub bit_depth: Option<u8>,
    pub groundtruth: Option<PathBuf>,
    pub groundtruth_format: GroundTruthFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Sequence(SequenceInput),
    Synth(SynthSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFlags {
    /// `.flo` files for the raw, u and v fields.
    pub flows: bool,
    /// Color-coded PNG renders of the same fields.
    pub renders: bool,
    pub masks: bool,
    pub report: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags { flows: true, renders: true, masks: true, report: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: InputSource,
    pub flow: FlowParams,
    pub decomposition: DecompositionParams,
    pub detection: DetectionParams,
    pub output: PathBuf,
    pub emit: EmitFlags,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: InputSource::Synth(SynthSpec::default()),
            flow: FlowParams::default(),
            decomposition: DecompositionParams::default(),
            detection: DetectionParams::default(),
            output: PathBuf::from("out"),
            emit: EmitFlags::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key}: cannot parse '{value}': {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse { path: path.to_path_buf(), line, msg },
            e => e,
        })?;
        Ok(cfg)
    }

    /// Applies every assignment in `text`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse { path: PathBuf::new(), line: k + 1, msg };
            let (key, value) =
                line.split_once('=').ok_or_else(|| parse_err(format!("expected key = value, got '{line}'")))?;
            self.set(key.trim(), value.trim()).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(key.trim(), value.trim())
    }

    fn synth_mut(&mut self, key: &str) -> Result<&mut SynthSpec> {
        match &mut self.input {
            InputSource::Synth(s) => Ok(s),
            InputSource::Sequence(_) => Err(Error::Config(format!("{key} requires input.kind = synth"))),
        }
    }

    fn sequence_mut(&mut self, key: &str) -> Result<&mut SequenceInput> {
        match &mut self.input {
            InputSource::Sequence(s) => Ok(s),
            InputSource::Synth(_) => Err(Error::Config(format!("{key} requires input.kind = sequence"))),
        }
    }

    fn curvelet_mut(&mut self, key: &str) -> Result<&mut CurveletConfig> {
        match &mut self.decomposition.transform {
            TransformConfig::Curvelet3(c) => Ok(c),
            TransformConfig::Wavelet3 { .. } => {
                Err(Error::Config(format!("{key} requires decomp.transform = curvelet")))
            }
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "input.kind" => {
                self.input = match v {
                    "synth" => InputSource::Synth(SynthSpec::default()),
                    "sequence" => InputSource::Sequence(SequenceInput {
                        dir: PathBuf::new(),
                        pattern: None,
                        bit_depth: None,
                        groundtruth: None,
                        groundtruth_format: GroundTruthFormat::CsvBoxes,
                    }),
                    _ => return Err(Error::Config(format!("input.kind must be synth or sequence, got '{v}'"))),
                }
            }
            "input.dir" => self.sequence_mut(key)?.dir = PathBuf::from(v),
            "input.pattern" => self.sequence_mut(key)?.pattern = Some(v.to_string()),
            "input.bit_depth" => self.sequence_mut(key)?.bit_depth = Some(parse(key, v)?),
            "input.groundtruth" => self.sequence_mut(key)?.groundtruth = Some(PathBuf::from(v)),
            "input.groundtruth_format" => self.sequence_mut(key)?.groundtruth_format = parse(key, v)?,

            "synth.nx" => self.synth_mut(key)?.nx = parse(key, v)?,
            "synth.ny" => self.synth_mut(key)?.ny = parse(key, v)?,
            "synth.nt" => self.synth_mut(key)?.nt = parse(key, v)?,
            "synth.seed" => self.synth_mut(key)?.seed = parse(key, v)?,
            "synth.target_width" => self.synth_mut(key)?.target.width = parse(key, v)?,
            "synth.target_height" => self.synth_mut(key)?.target.height = parse(key, v)?,
            "synth.target_x" => self.synth_mut(key)?.target.start.0 = parse(key, v)?,
            "synth.target_y" => self.synth_mut(key)?.target.start.1 = parse(key, v)?,
            "synth.velocity_x" => self.synth_mut(key)?.target.velocity.0 = parse(key, v)?,
            "synth.velocity_y" => self.synth_mut(key)?.target.velocity.1 = parse(key, v)?,
            "synth.intensity" => self.synth_mut(key)?.target.intensity = parse(key, v)?,
            "synth.sigma_w" => self.synth_mut(key)?.turbulence.sigma_w = parse(key, v)?,
            "synth.corr_len" => self.synth_mut(key)?.turbulence.corr_len = parse(key, v)?,
            "synth.ar1" => {
                let rho: f64 = parse(key, v)?;
                self.synth_mut(key)?.turbulence.temporal =
                    if rho == 0.0 { TemporalModel::Iid } else { TemporalModel::Ar1(rho) };
            }
            "synth.background_smoothing" => self.synth_mut(key)?.background_smoothing = parse(key, v)?,
            "synth.noise_sigma" => self.synth_mut(key)?.noise_sigma = parse(key, v)?,

            "flow.method" => self.flow.method = parse::<FlowMethod>(key, v)?,
            "flow.pyramid_levels" => self.flow.pyramid_levels = parse(key, v)?,
            "flow.alpha" | "flow.hs.alpha" => self.flow.hs.alpha = parse(key, v)?,
            "flow.hs.iterations" => self.flow.hs.iterations = parse(key, v)?,
            "flow.tv_l1.lambda" => self.flow.tv_l1.lambda = parse(key, v)?,
            "flow.tv_l1.tau" => self.flow.tv_l1.tau = parse(key, v)?,
            "flow.tv_l1.theta" => self.flow.tv_l1.theta = parse(key, v)?,
            "flow.tv_l1.warps" => self.flow.tv_l1.warps = parse(key, v)?,
            "flow.tv_l1.iterations" => self.flow.tv_l1.iterations = parse(key, v)?,
            "flow.tv_l1.epsilon" => self.flow.tv_l1.epsilon = parse(key, v)?,
            "flow.tv_l1.median_radius" => self.flow.tv_l1.median_radius = parse(key, v)?,
            "flow.demons.sigma_fluid" => self.flow.demons.sigma_fluid = parse(key, v)?,
            "flow.demons.sigma_diffusion" => self.flow.demons.sigma_diffusion = parse(key, v)?,
            "flow.demons.iterations" => self.flow.demons.iterations = parse(key, v)?,
            "flow.demons.max_step" => self.flow.demons.max_step = parse(key, v)?,

            "decomp.transform" => {
                self.decomposition.transform = match v {
                    "curvelet" => TransformConfig::Curvelet3(CurveletConfig::default()),
                    "wavelet" => TransformConfig::Wavelet3 { levels: 3 },
                    _ => return Err(Error::Config(format!("decomp.transform must be curvelet or wavelet, got '{v}'"))),
                }
            }
            "decomp.lambda" => self.decomposition.lambda = parse(key, v)?,
            "decomp.mu" => self.decomposition.mu = parse(key, v)?,
            "decomp.n_max" => self.decomposition.n_max = parse(key, v)?,
            "decomp.tol" => self.decomposition.tol = parse(key, v)?,
            "decomp.exempt_coarse" => self.decomposition.exempt_coarse = parse_bool(key, v)?,
            "decomp.levels" => match &mut self.decomposition.transform {
                TransformConfig::Wavelet3 { levels } => *levels = parse(key, v)?,
                TransformConfig::Curvelet3(_) => {
                    return Err(Error::Config("decomp.levels requires decomp.transform = wavelet".into()))
                }
            },
            "decomp.scales" => self.curvelet_mut(key)?.num_scales = parse(key, v)?,
            "decomp.wedges" => self.curvelet_mut(key)?.wedges_coarsest = parse(key, v)?,
            "decomp.finest_angular" => self.curvelet_mut(key)?.finest_angular = parse_bool(key, v)?,

            "detect.threshold" => self.detection.threshold = parse(key, v)?,
            "detect.mode" => {
                self.detection.mode = match v {
                    "manual" => ThresholdMode::Manual,
                    "otsu" => ThresholdMode::Otsu,
                    _ => return Err(Error::Config(format!("detect.mode must be manual or otsu, got '{v}'"))),
                }
            }
            "detect.min_component_size" => self.detection.min_component_size = parse(key, v)?,
            "baseline.window" => self.detection.baseline.window = parse(key, v)?,
            "baseline.k" => self.detection.baseline.k = parse(key, v)?,
            "baseline.opening_radius" => self.detection.baseline.opening_radius = parse(key, v)?,

            "output.dir" => self.output = PathBuf::from(v),
            "emit.flows" => self.emit.flows = parse_bool(key, v)?,
            "emit.renders" => self.emit.renders = parse_bool(key, v)?,
            "emit.masks" => self.emit.masks = parse_bool(key, v)?,
            "emit.report" => self.emit.report = parse_bool(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Sets the synthetic seed; a no-op for recorded sequences.
    pub fn set_seed(&mut self, seed: u64) {
        if let InputSource::Synth(s) = &mut self.input {
            s.seed = seed;
        }
    }

    /// Parameter invariants plus existence of every referenced input path.
    pub fn validate(&self) -> Result<()> {
        match &self.input {
            InputSource::Synth(s) => s.validate()?,
            InputSource::Sequence(s) => {
                if s.dir.as_os_str().is_empty() {
                    return Err(Error::Config("input.dir is required for input.kind = sequence".into()));
                }
                if !s.dir.is_dir() {
                    return Err(Error::Config(format!("input directory {} does not exist", s.dir.display())));
                }
                if let Some(gt) = &s.groundtruth {
                    if !gt.exists() {
                        return Err(Error::Config(format!("ground truth {} does not exist", gt.display())));
                    }
                }
                if let Some(b) = s.bit_depth {
                    if b != 8 && b != 16 {
                        return Err(Error::Config(format!("input.bit_depth must be 8 or 16, got {b}")));
                    }
                }
            }
        }
        self.flow.validate()?;
        self.decomposition.validate()?;
        self.detection.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        PipelineConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_sections_comments_and_overrides() {
        let mut c = PipelineConfig::default();
        c.apply_text(
            "# comment\nflow.method = hs\nflow.alpha=20 # trailing\n\ndecomp.transform = wavelet\ndecomp.levels = 2\n",
        )
        .unwrap();
        assert_eq!(c.flow.method, FlowMethod::HornSchunck);
        assert_eq!(c.flow.hs.alpha, 20.0);
        assert_eq!(c.decomposition.transform, TransformConfig::Wavelet3 { levels: 2 });
        c.apply_override("detect.threshold=0.7").unwrap();
        assert_eq!(c.detection.threshold, 0.7);
        c.apply_override("synth.ar1=0.5").unwrap();
        assert_eq!(
            c.input,
            InputSource::Synth(SynthSpec {
                turbulence: turbodetect::synth::TurbulenceSpec {
                    temporal: TemporalModel::Ar1(0.5),
                    ..SynthSpec::default().turbulence
                },
                ..SynthSpec::default()
            })
        );
    }

    #[test]
    fn errors_name_the_key_and_line() {
        let mut c = PipelineConfig::default();
        let e = c.apply_text("flow.method = tvl1\nflow.nope = 3\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        assert!(e.to_string().contains("flow.nope"));
        assert!(c.apply_override("detect.threshold").is_err());
        assert!(c.apply_override("decomp.levels=2").is_err());
        assert!(c.apply_override("input.dir=/x").is_err());
    }

    #[test]
    fn missing_input_dir_is_named() {
        let mut c = PipelineConfig::default();
        c.apply_text("input.kind = sequence\ninput.dir = /definitely/not/here").unwrap();
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("/definitely/not/here"), "{msg}");
    }
}
