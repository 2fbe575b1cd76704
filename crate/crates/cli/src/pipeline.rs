//! Stage orchestration: input, flow, decomposition, detection, evaluation.
//!
//! Every stage writes its outputs under the output directory and records
//! them in the MANIFEST, so a later stage can be run on its own from what an
//! earlier run left on disk. Data handed between stages in memory is rounded
//! exactly as the files round it (16-bit frames, `f32` flows), which makes a
//! full run and a resumed run produce the same numbers.

use std::fmt;
use std::path::{Path, PathBuf};

use turbodetect::decomposition::{decompose_field, DecompositionReport};
use turbodetect::detection::{
    background_subtraction_baseline, detect_by_magnitude, effective_threshold, evaluate_masks, match_recall, MaskVolume,
};
use turbodetect::field::{magnitude, ScalarVolume, VectorField3};
use turbodetect::flow::flow_sequence_report;
use turbodetect::io::{
    crop, flow_to_rgb, flow_wheel_legend, pad_for_transform, read_flo_sequence, read_groundtruth, read_sequence,
    write_flo_sequence, write_masks, write_sequence, CropRecord, GroundTruthFormat, SequenceSource,
};
use turbodetect::synth::synth_turbulent_sequence;
use turbodetect::Error;

use crate::config::{InputSource, PipelineConfig};
use crate::manifest::Manifest;
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Synth,
    Input,
    Flow,
    Decompose,
    Detect,
    Evaluate,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Synth => "synth",
            Stage::Input => "input",
            Stage::Flow => "flow",
            Stage::Decompose => "decompose",
            Stage::Detect => "detect",
            Stage::Evaluate => "evaluate",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub type StageResult<T> = std::result::Result<T, PipelineError>;

trait InStage<T> {
    fn stage(self, stage: Stage) -> StageResult<T>;
}

impl<T> InStage<T> for turbodetect::Result<T> {
    fn stage(self, stage: Stage) -> StageResult<T> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

/// Input frames and, when known, the true target masks.
#[derive(Debug, Clone)]
pub struct Frames {
    pub frames: ScalarVolume,
    pub truth: Option<MaskVolume>,
}

#[derive(Debug, Clone)]
pub struct Decomposed {
    pub u: VectorField3,
    pub v: VectorField3,
    pub report: DecompositionReport,
    pub crop: CropRecord,
}

#[derive(Debug, Clone)]
pub struct Masks {
    pub raw: MaskVolume,
    pub u: MaskVolume,
    pub baseline: MaskVolume,
}

pub const METHODS: [&str; 3] = ["raw", "u", "baseline"];

impl Masks {
    fn get(&self, method: &str) -> &MaskVolume {
        match method {
            "raw" => &self.raw,
            "u" => &self.u,
            _ => &self.baseline,
        }
    }
}

fn quantize_frames(v: &ScalarVolume) -> ScalarVolume {
    v.map(|x| (x.clamp(0.0, 1.0) * 65535.0).round() / 65535.0)
}

fn to_f32(f: &VectorField3) -> VectorField3 {
    VectorField3 { v1: f.v1.map(|&x| x as f32 as f64), v2: f.v2.map(|&x| x as f32 as f64) }
}

pub struct Pipeline {
    cfg: PipelineConfig,
    out: PathBuf,
    manifest: Manifest,
}

impl Pipeline {
    /// Validates `cfg` and opens (creating if needed) its output directory.
    pub fn new(cfg: PipelineConfig) -> StageResult<Self> {
        cfg.validate().stage(Stage::Config)?;
        let out = cfg.output.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e)).stage(Stage::Config)?;
        let manifest = Manifest::load_or_default(&out).stage(Stage::Config)?;
        Ok(Pipeline { cfg, out, manifest })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn record(&mut self, paths: &[PathBuf]) {
        for p in paths {
            self.manifest.add_artifact(&self.out, p);
        }
    }

    fn complete(&mut self, stage: Stage) -> StageResult<()> {
        self.manifest.add_stage(stage.name());
        self.manifest.save(&self.out).stage(stage)
    }

    fn write_stats(&mut self, stage: Stage, r: &Report) -> StageResult<()> {
        let dir = self.path("stats");
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)).stage(stage)?;
        let path = dir.join(format!("{}.txt", stage.name()));
        r.write(&path).stage(stage)?;
        self.record(&[path]);
        Ok(())
    }

    /// Generates the synthetic sequence and writes its frames and truth masks.
    pub fn synth(&mut self) -> StageResult<Frames> {
        let InputSource::Synth(spec) = self.cfg.input else {
            return Err(Error::Config("synth requires input.kind = synth".into())).stage(Stage::Synth);
        };
        let (frames, truth) = synth_turbulent_sequence(&spec).stage(Stage::Synth)?;
        let frames = quantize_frames(&frames);
        let written = write_sequence(&self.path("frames"), &frames).stage(Stage::Synth)?;
        self.record(&written);
        let written = write_masks(&self.path("groundtruth"), &truth.masks).stage(Stage::Synth)?;
        self.record(&written);
        let mut stats = Report::new();
        stats.set("input.kind", "synth");
        stats.set("input.seed", spec.seed);
        self.write_stats(Stage::Synth, &stats)?;
        self.complete(Stage::Synth)?;
        Ok(Frames { frames, truth: Some(truth.masks) })
    }

    /// Frames from the configured sequence, or from a previous `synth`.
    pub fn load_input(&self) -> StageResult<Frames> {
        match &self.cfg.input {
            InputSource::Sequence(s) => {
                let mut src = SequenceSource::new(&s.dir);
                if let Some(p) = &s.pattern {
                    src.pattern = p.clone();
                }
                src.bit_depth = s.bit_depth;
                let frames = read_sequence(&src).stage(Stage::Input)?;
                let truth = match &s.groundtruth {
                    Some(p) => {
                        Some(read_groundtruth(p, s.groundtruth_format, frames.shape()).stage(Stage::Input)?.rasterize())
                    }
                    None => None,
                };
                Ok(Frames { frames, truth })
            }
            InputSource::Synth(_) => {
                let src = SequenceSource { pattern: "frame_*.png".into(), ..SequenceSource::new(self.path("frames")) };
                let frames = read_sequence(&src).stage(Stage::Input)?;
                let truth = read_groundtruth(&self.path("groundtruth"), GroundTruthFormat::MaskDir, frames.shape())
                    .stage(Stage::Input)?
                    .rasterize();
                Ok(Frames { frames, truth: Some(truth) })
            }
        }
    }

    fn write_field(&mut self, stage: Stage, name: &str, f: &VectorField3) -> StageResult<()> {
        if self.cfg.emit.flows {
            let written = write_flo_sequence(&self.path("flow"), name, f).stage(stage)?;
            self.record(&written);
        }
        if self.cfg.emit.renders {
            let dir = self.path("renders").join(name);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e)).stage(stage)?;
            let max = magnitude(f).as_slice().iter().fold(0.0f64, |m, &x| m.max(x));
            let mut written = Vec::new();
            for n in 0..f.shape().2 {
                let path = dir.join(format!("frame_{n:05}.png"));
                flow_to_rgb(&f.slot(n), Some(max))
                    .save(&path)
                    .map_err(|e| Error::Format { path: path.clone(), msg: e.to_string() })
                    .stage(stage)?;
                written.push(path);
            }
            let legend = self.path("renders").join("legend.png");
            flow_wheel_legend(65)
                .save(&legend)
                .map_err(|e| Error::Format { path: legend.clone(), msg: e.to_string() })
                .stage(stage)?;
            written.push(legend);
            self.record(&written);
        }
        Ok(())
    }

    fn read_field(&self, stage: Stage, name: &str) -> StageResult<VectorField3> {
        read_flo_sequence(&self.path("flow"), name).stage(stage)
    }

    pub fn flow(&mut self, frames: &ScalarVolume) -> StageResult<VectorField3> {
        let seq = flow_sequence_report(frames, &self.cfg.flow).stage(Stage::Flow)?;
        let raw = to_f32(&seq.field);
        self.write_field(Stage::Flow, "raw", &raw)?;
        let mut stats = Report::new();
        stats.set("flow.method", self.cfg.flow.method.name());
        stats.set("flow.degenerate_pairs", seq.degenerate_pairs.len());
        self.write_stats(Stage::Flow, &stats)?;
        self.complete(Stage::Flow)?;
        Ok(raw)
    }

    pub fn load_raw_flow(&self) -> StageResult<VectorField3> {
        self.read_field(Stage::Decompose, "raw")
    }

    /// Pads to a transform-valid size, decomposes jointly, crops back.
    pub fn decompose(&mut self, raw: &VectorField3) -> StageResult<Decomposed> {
        let p = self.cfg.decomposition;
        let (v1, rec) = pad_for_transform(&raw.v1, &p.transform);
        let (v2, _) = pad_for_transform(&raw.v2, &p.transform);
        let padded = VectorField3::new(v1, v2).stage(Stage::Decompose)?;
        let d = decompose_field(&padded, &p).stage(Stage::Decompose)?;
        let back = |f: &VectorField3| -> StageResult<VectorField3> {
            let v1 = crop(&f.v1, &rec).stage(Stage::Decompose)?;
            let v2 = crop(&f.v2, &rec).stage(Stage::Decompose)?;
            Ok(to_f32(&VectorField3 { v1, v2 }))
        };
        let (u, v) = (back(&d.u)?, back(&d.v)?);
        self.write_field(Stage::Decompose, "u", &u)?;
        self.write_field(Stage::Decompose, "v", &v)?;
        let mut stats = Report::new();
        stats.set("decomp.iterations", d.report.iterations_run);
        stats.set("decomp.final_delta", format!("{:.6e}", d.report.final_delta));
        let (px, py, pt) = rec.padded;
        stats.set("decomp.padded_shape", format!("{px}x{py}x{pt}"));
        self.write_stats(Stage::Decompose, &stats)?;
        self.complete(Stage::Decompose)?;
        Ok(Decomposed { u, v, report: d.report, crop: rec })
    }

    pub fn load_u_flow(&self, stage: Stage) -> StageResult<VectorField3> {
        self.read_field(stage, "u")
    }

    pub fn detect(&mut self, frames: &ScalarVolume, raw: &VectorField3, u: &VectorField3) -> StageResult<Masks> {
        let p = self.cfg.detection;
        let masks = Masks {
            raw: detect_by_magnitude(raw, &p).stage(Stage::Detect)?,
            u: detect_by_magnitude(u, &p).stage(Stage::Detect)?,
            baseline: background_subtraction_baseline(frames, &p).stage(Stage::Detect)?,
        };
        let mut stats = Report::new();
        stats.set_f64("detect.threshold.raw", effective_threshold(raw, &p));
        stats.set_f64("detect.threshold.u", effective_threshold(u, &p));
        for m in METHODS {
            let mask = masks.get(m);
            stats.set(format!("{m}.detected_pixels"), mask.as_slice().iter().filter(|&&b| b).count());
            if self.cfg.emit.masks {
                let written = write_masks(&self.path("masks").join(m), mask).stage(Stage::Detect)?;
                self.record(&written);
            }
        }
        self.write_stats(Stage::Detect, &stats)?;
        self.complete(Stage::Detect)?;
        Ok(masks)
    }

    pub fn load_masks(&self, shape: (usize, usize, usize)) -> StageResult<Masks> {
        let read = |m: &str| {
            read_groundtruth(&self.path("masks").join(m), GroundTruthFormat::MaskDir, shape)
                .map(|g| g.rasterize())
                .stage(Stage::Evaluate)
        };
        Ok(Masks { raw: read("raw")?, u: read("u")?, baseline: read("baseline")? })
    }

    /// Scores each method against the truth and assembles the report from
    /// the stage statistics on disk.
    pub fn evaluate(&mut self, masks: &Masks, u: &VectorField3, truth: Option<&MaskVolume>) -> StageResult<Report> {
        let mut report = Report::new();
        for stage in [Stage::Synth, Stage::Flow, Stage::Decompose, Stage::Detect] {
            let path = self.path("stats").join(format!("{}.txt", stage.name()));
            if path.exists() {
                report.merge(&Report::read(&path).stage(Stage::Evaluate)?);
            }
        }
        let (nx, ny, nt) = u.shape();
        report.set("input.shape", format!("{nx}x{ny}x{nt}"));
        match truth {
            Some(gt) => {
                report.set("groundtruth", "yes");
                for m in METHODS {
                    let r = evaluate_masks(masks.get(m), gt).stage(Stage::Evaluate)?;
                    report.add_eval(m, &r);
                }
                // False positives of u-magnitude thresholding at the recall the
                // baseline reached.
                let base = evaluate_masks(&masks.baseline, gt).stage(Stage::Evaluate)?;
                if gt.as_slice().iter().any(|&b| b) {
                    let m = match_recall(&magnitude(u), gt, base.recall).stage(Stage::Evaluate)?;
                    report.set_f64("matched.recall", base.recall);
                    report.set("matched.baseline_fp", base.fp);
                    report.set("matched.u_fp", m.fp);
                    report.set_f64("matched.u_recall", m.recall);
                    report.set_f64("matched.u_threshold", m.threshold);
                }
            }
            None => report.set("groundtruth", "none"),
        }
        if self.cfg.emit.report {
            let path = self.path("report.txt");
            report.write(&path).stage(Stage::Evaluate)?;
            self.record(&[path]);
        }
        self.complete(Stage::Evaluate)?;
        Ok(report)
    }

    pub fn load_truth(&self, shape: (usize, usize, usize)) -> StageResult<Option<MaskVolume>> {
        match &self.cfg.input {
            InputSource::Sequence(s) => match &s.groundtruth {
                Some(p) => {
                    Ok(Some(read_groundtruth(p, s.groundtruth_format, shape).stage(Stage::Evaluate)?.rasterize()))
                }
                None => Ok(None),
            },
            InputSource::Synth(_) => read_groundtruth(&self.path("groundtruth"), GroundTruthFormat::MaskDir, shape)
                .map(|g| Some(g.rasterize()))
                .stage(Stage::Evaluate),
        }
    }

    /// Every stage in order, passing data in memory.
    pub fn run(&mut self) -> StageResult<Report> {
        let input = match self.cfg.input {
            InputSource::Synth(_) => self.synth()?,
            InputSource::Sequence(_) => self.load_input()?,
        };
        let raw = self.flow(&input.frames)?;
        let d = self.decompose(&raw)?;
        let masks = self.detect(&input.frames, &raw, &d.u)?;
        self.evaluate(&masks, &d.u, input.truth.as_ref())
    }

    /// `flow` from frames on disk.
    pub fn resume_flow(&mut self) -> StageResult<VectorField3> {
        let input = self.load_input()?;
        self.flow(&input.frames)
    }

    /// `decompose` from the raw flow on disk.
    pub fn resume_decompose(&mut self) -> StageResult<Decomposed> {
        let raw = self.load_raw_flow()?;
        self.decompose(&raw)
    }

    /// `detect` from frames and flows on disk.
    pub fn resume_detect(&mut self) -> StageResult<Masks> {
        let input = self.load_input().map_err(|e| PipelineError { stage: Stage::Detect, ..e })?;
        let raw = self.read_field(Stage::Detect, "raw")?;
        let u = self.load_u_flow(Stage::Detect)?;
        self.detect(&input.frames, &raw, &u)
    }

    /// `evaluate` from masks and the u flow on disk.
    pub fn resume_evaluate(&mut self) -> StageResult<Report> {
        let u = self.load_u_flow(Stage::Evaluate)?;
        let masks = self.load_masks(u.shape())?;
        let truth = self.load_truth(u.shape())?;
        self.evaluate(&masks, &u, truth.as_ref())
    }
}
