use super::{pair_pyramid, upsample_flow, DemonsParams, FlowEstimate, FlowParams, FramePair};
use crate::error::Result;
use crate::field::{Flow2, Image};
use crate::imgproc::{gaussian_blur, gradient, sample_bilinear, warp};

/// Diffeomorphic demons: symmetric-gradient forces, fluid smoothing,
/// exponential update composed onto the current map, diffusion smoothing.
pub fn demons(pair: &FramePair, p: &FlowParams) -> Result<FlowEstimate> {
    p.validate()?;
    let (w, h) = pair.shape();
    if pair.is_degenerate() {
        return Ok(FlowEstimate::degenerate(w, h));
    }
    let levels = pair_pyramid(pair, p.pyramid_levels, 1.0);
    let mut flow = Flow2::zeros(levels[0].0.width(), levels[0].0.height());
    for (a, b) in &levels {
        if flow.shape() != a.shape() {
            flow = upsample_flow(&flow, a.width(), a.height());
        }
        for _ in 0..p.demons.iterations {
            flow = demons_step(a, b, &flow, &p.demons);
        }
    }
    Ok(FlowEstimate { flow, degenerate: false })
}

/// Unregularized demons force for `b` warped by `s` against `a`.
pub fn demons_force(a: &Image, b: &Image, s: &Flow2, max_step: f64) -> Flow2 {
    let (w, h) = a.shape();
    let bw = warp(b, &s.u, &s.v);
    let (ax, ay) = gradient(a);
    let (bx, by) = gradient(&bw);
    // Bounds each force vector by max_step / 2.
    let k = max_step * max_step;
    let mut out = Flow2::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let diff = a[(i, j)] - bw[(i, j)];
            let jx = 0.5 * (ax[(i, j)] + bx[(i, j)]);
            let jy = 0.5 * (ay[(i, j)] + by[(i, j)]);
            let den = jx * jx + jy * jy + diff * diff / k;
            if den > 1e-12 {
                out.u[(i, j)] = diff * jx / den;
                out.v[(i, j)] = diff * jy / den;
            }
        }
    }
    out
}

fn demons_step(a: &Image, b: &Image, s: &Flow2, q: &DemonsParams) -> Flow2 {
    let force = demons_force(a, b, s, q.max_step);
    let update = Flow2 { u: gaussian_blur(&force.u, q.sigma_fluid), v: gaussian_blur(&force.v, q.sigma_fluid) };
    let composed = compose(s, &exp_field(&update));
    Flow2 { u: gaussian_blur(&composed.u, q.sigma_diffusion), v: gaussian_blur(&composed.v, q.sigma_diffusion) }
}

/// Displacement of `(id + s) o (id + e)`.
pub(crate) fn compose(s: &Flow2, e: &Flow2) -> Flow2 {
    let (w, h) = s.shape();
    let mut out = Flow2::zeros(w, h);
    for j in 0..h {
        for i in 0..w {
            let x = i as f64 + e.u[(i, j)];
            let y = j as f64 + e.v[(i, j)];
            out.u[(i, j)] = e.u[(i, j)] + sample_bilinear(&s.u, x, y);
            out.v[(i, j)] = e.v[(i, j)] + sample_bilinear(&s.v, x, y);
        }
    }
    out
}

/// Group exponential of a stationary field by scaling and squaring.
pub(crate) fn exp_field(v: &Flow2) -> Flow2 {
    let m = v.max_abs();
    if m == 0.0 {
        return v.clone();
    }
    let mut n = 0;
    while m / f64::from(1u32 << n) > 0.5 && n < 20 {
        n += 1;
    }
    let s = 1.0 / f64::from(1u32 << n);
    let mut e = Flow2 { u: v.u.map(|x| x * s), v: v.v.map(|x| x * s) };
    for _ in 0..n {
        e = compose(&e, &e);
    }
    e
}
