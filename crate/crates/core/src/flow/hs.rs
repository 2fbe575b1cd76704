use super::{pair_pyramid, upsample_flow, FlowEstimate, FlowParams, FramePair};
use crate::error::Result;
use crate::field::{Flow2, Image};
use crate::imgproc::{gradient, warp};

/// Coarse-to-fine Horn-Schunck with one warp per level.
pub fn horn_schunck(pair: &FramePair, p: &FlowParams) -> Result<FlowEstimate> {
    p.validate()?;
    let (w, h) = pair.shape();
    if pair.is_degenerate() {
        return Ok(FlowEstimate::degenerate(w, h));
    }
    let levels = pair_pyramid(pair, p.pyramid_levels, 255.0);
    let alpha2 = p.hs.alpha * p.hs.alpha;
    let mut flow = Flow2::zeros(levels[0].0.width(), levels[0].0.height());
    for (a, b) in &levels {
        if flow.shape() != a.shape() {
            flow = upsample_flow(&flow, a.width(), a.height());
        }
        flow = refine(a, b, &flow, alpha2, p.hs.iterations);
    }
    Ok(FlowEstimate { flow, degenerate: false })
}

fn refine(a: &Image, b: &Image, init: &Flow2, alpha2: f64, iterations: usize) -> Flow2 {
    let (w, h) = a.shape();
    let bw = warp(b, &init.u, &init.v);
    let (ax, ay) = gradient(a);
    let (bx, by) = gradient(&bw);
    let n = w * h;
    let mut ix = vec![0.0; n];
    let mut iy = vec![0.0; n];
    // Constant part of the linearized residual: It - Ix u0 - Iy v0.
    let mut r0 = vec![0.0; n];
    let mut denom = vec![0.0; n];
    for k in 0..n {
        ix[k] = 0.5 * (ax.as_slice()[k] + bx.as_slice()[k]);
        iy[k] = 0.5 * (ay.as_slice()[k] + by.as_slice()[k]);
        r0[k] = bw.as_slice()[k] - a.as_slice()[k] - ix[k] * init.u.as_slice()[k] - iy[k] * init.v.as_slice()[k];
        denom[k] = alpha2 + ix[k] * ix[k] + iy[k] * iy[k];
    }
    let mut u = init.u.clone();
    let mut v = init.v.clone();
    for _ in 0..iterations {
        for j in 0..h {
            for i in 0..w {
                let (ubar, vbar) = neighbour_mean(&u, &v, i, j);
                let k = j * w + i;
                let r = ix[k] * ubar + iy[k] * vbar + r0[k];
                u[(i, j)] = ubar - ix[k] * r / denom[k];
                v[(i, j)] = vbar - iy[k] * r / denom[k];
            }
        }
    }
    Flow2 { u, v }
}

/// Weighted 8-neighbour average (1/6 edges, 1/12 corners), clamped borders.
#[inline]
fn neighbour_mean(u: &Image, v: &Image, i: usize, j: usize) -> (f64, f64) {
    let (w, h) = u.shape();
    let im = i.saturating_sub(1);
    let ip = (i + 1).min(w - 1);
    let jm = j.saturating_sub(1);
    let jp = (j + 1).min(h - 1);
    let avg = |f: &Image| {
        (f[(im, j)] + f[(ip, j)] + f[(i, jm)] + f[(i, jp)]) / 6.0
            + (f[(im, jm)] + f[(ip, jm)] + f[(im, jp)] + f[(ip, jp)]) / 12.0
    };
    (avg(u), avg(v))
}
