//! Frame-to-frame motion estimation.
//!
//! Every estimator returns the displacement `w` that maps frame `a` onto
//! frame `b`, i.e. `b(x + w(x)) ~ a(x)`. Inputs are expected in `[0, 1]`;
//! the Horn-Schunck and TV-L1 weights are quoted on the 8-bit scale, so
//! those solvers work on `255 * I` internally.

mod demons;
mod hs;
mod tvl1;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Flow2, Image, ScalarVolume, VectorField3};
use crate::imgproc;

pub use demons::{demons, demons_force};
pub use hs::horn_schunck;
pub use tvl1::tv_l1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowMethod {
    HornSchunck,
    TvL1,
    Demons,
}

impl FlowMethod {
    pub fn name(self) -> &'static str {
        match self {
            FlowMethod::HornSchunck => "horn_schunck",
            FlowMethod::TvL1 => "tv_l1",
            FlowMethod::Demons => "demons",
        }
    }
}

impl std::str::FromStr for FlowMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "horn_schunck" | "hs" => Ok(FlowMethod::HornSchunck),
            "tv_l1" | "tvl1" => Ok(FlowMethod::TvL1),
            "demons" => Ok(FlowMethod::Demons),
            _ => Err(Error::Config(format!("unknown flow method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsParams {
    /// Smoothness weight.
    pub alpha: f64,
    /// Gauss-Seidel sweeps per pyramid level.
    pub iterations: usize,
}

impl Default for HsParams {
    fn default() -> Self {
        HsParams { alpha: 15.0, iterations: 100 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvL1Params {
    /// Data attachment weight.
    pub lambda: f64,
    /// Dual time step.
    pub tau: f64,
    /// Coupling between the two sub-problems.
    pub theta: f64,
    pub warps: usize,
    /// Cap on inner iterations per warp.
    pub iterations: usize,
    /// Inner loop stops when the RMS update falls below this.
    pub epsilon: f64,
    /// Median filter radius applied to the flow after each warp; 0 disables.
    pub median_radius: usize,
}

impl Default for TvL1Params {
    fn default() -> Self {
        TvL1Params { lambda: 0.15, tau: 0.25, theta: 0.3, warps: 5, iterations: 300, epsilon: 0.01, median_radius: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemonsParams {
    /// Smoothing of each update field.
    pub sigma_fluid: f64,
    /// Smoothing of the accumulated displacement.
    pub sigma_diffusion: f64,
    pub iterations: usize,
    /// Bound on the length of a single update, in pixels.
    pub max_step: f64,
}

impl Default for DemonsParams {
    fn default() -> Self {
        DemonsParams { sigma_fluid: 1.5, sigma_diffusion: 1.5, iterations: 50, max_step: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub method: FlowMethod,
    pub pyramid_levels: usize,
    pub hs: HsParams,
    pub tv_l1: TvL1Params,
    pub demons: DemonsParams,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            method: FlowMethod::TvL1,
            pyramid_levels: 3,
            hs: HsParams::default(),
            tv_l1: TvL1Params::default(),
            demons: DemonsParams::default(),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive (got {x})")))
    }
}

fn at_least_one(name: &str, n: usize) -> Result<()> {
    if n >= 1 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be at least 1")))
    }
}

impl FlowParams {
    pub fn with_method(method: FlowMethod) -> Self {
        FlowParams { method, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        at_least_one("flow.pyramid_levels", self.pyramid_levels)?;
        positive("flow.hs.alpha", self.hs.alpha)?;
        at_least_one("flow.hs.iterations", self.hs.iterations)?;
        positive("flow.tv_l1.lambda", self.tv_l1.lambda)?;
        positive("flow.tv_l1.tau", self.tv_l1.tau)?;
        positive("flow.tv_l1.theta", self.tv_l1.theta)?;
        positive("flow.tv_l1.epsilon", self.tv_l1.epsilon)?;
        at_least_one("flow.tv_l1.warps", self.tv_l1.warps)?;
        at_least_one("flow.tv_l1.iterations", self.tv_l1.iterations)?;
        positive("flow.demons.sigma_fluid", self.demons.sigma_fluid)?;
        positive("flow.demons.sigma_diffusion", self.demons.sigma_diffusion)?;
        positive("flow.demons.max_step", self.demons.max_step)?;
        at_least_one("flow.demons.iterations", self.demons.iterations)
    }
}

/// Two frames of equal shape with finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    a: Image,
    b: Image,
}

impl FramePair {
    pub fn new(a: Image, b: Image) -> Result<Self> {
        if a.shape() != b.shape() {
            return Err(Error::Dimension(format!(
                "frame pair shapes differ: {}x{} vs {}x{}",
                a.width(),
                a.height(),
                b.width(),
                b.height()
            )));
        }
        if a.width() == 0 || a.height() == 0 {
            return Err(Error::Dimension("empty frames".into()));
        }
        if !a.as_slice().iter().chain(b.as_slice()).all(|x| x.is_finite()) {
            return Err(Error::NonFinite("frame pair"));
        }
        Ok(FramePair { a, b })
    }

    pub fn a(&self) -> &Image {
        &self.a
    }

    pub fn b(&self) -> &Image {
        &self.b
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// Both frames have no spatial variation, so motion is unobservable.
    pub fn is_degenerate(&self) -> bool {
        let flat = |img: &Image| {
            let first = img.as_slice()[0];
            img.as_slice().iter().all(|&x| x == first)
        };
        flat(&self.a) && flat(&self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowEstimate {
    pub flow: Flow2,
    /// Set when the inputs were constant and a zero flow was returned.
    pub degenerate: bool,
}

impl FlowEstimate {
    fn degenerate(w: usize, h: usize) -> Self {
        FlowEstimate { flow: Flow2::zeros(w, h), degenerate: true }
    }
}

pub fn estimate(pair: &FramePair, p: &FlowParams) -> Result<FlowEstimate> {
    match p.method {
        FlowMethod::HornSchunck => horn_schunck(pair, p),
        FlowMethod::TvL1 => tv_l1(pair, p),
        FlowMethod::Demons => demons(pair, p),
    }
}

/// Per-frame flows stacked into a field with the same `nt` as `frames`.
#[derive(Debug, Clone)]
pub struct SequenceFlow {
    pub field: VectorField3,
    /// Pairs `(n, n + 1)` whose frames were constant.
    pub degenerate_pairs: Vec<usize>,
}

/// Estimates `frame n -> frame n+1` into slot `n`; the last slot repeats the
/// one before it.
pub fn flow_sequence(frames: &ScalarVolume, p: &FlowParams) -> Result<VectorField3> {
    flow_sequence_report(frames, p).map(|s| s.field)
}

pub fn flow_sequence_report(frames: &ScalarVolume, p: &FlowParams) -> Result<SequenceFlow> {
    p.validate()?;
    let (nx, ny, nt) = frames.shape();
    if nt < 2 {
        return Err(Error::Dimension(format!("flow needs at least 2 frames (got {nt})")));
    }
    let estimates: Vec<FlowEstimate> = (0..nt - 1)
        .into_par_iter()
        .map(|n| estimate(&FramePair::new(frames.frame(n), frames.frame(n + 1))?, p))
        .collect::<Result<_>>()?;
    let mut field = VectorField3::zeros(nx, ny, nt);
    for (n, e) in estimates.iter().enumerate() {
        field.set_slot(n, &e.flow);
    }
    field.set_slot(nt - 1, &estimates[nt - 2].flow);
    let degenerate_pairs = estimates.iter().enumerate().filter(|(_, e)| e.degenerate).map(|(n, _)| n).collect();
    Ok(SequenceFlow { field, degenerate_pairs })
}

/// Resamples a flow to `(w, h)` and rescales its vectors to the new grid.
pub(crate) fn upsample_flow(f: &Flow2, w: usize, h: usize) -> Flow2 {
    let (w0, h0) = f.shape();
    let sx = w as f64 / w0 as f64;
    let sy = h as f64 / h0 as f64;
    Flow2 { u: imgproc::resize(&f.u, w, h).map(|x| x * sx), v: imgproc::resize(&f.v, w, h).map(|x| x * sy) }
}

/// Pyramids of both frames, coarsest first.
pub(crate) fn pair_pyramid(pair: &FramePair, levels: usize, scale: f64) -> Vec<(Image, Image)> {
    let a = imgproc::pyramid(&pair.a.map(|x| x * scale), levels, 8);
    let b = imgproc::pyramid(&pair.b.map(|x| x * scale), levels, 8);
    a.into_iter().zip(b).rev().collect()
}
