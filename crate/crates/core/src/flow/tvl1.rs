use super::{pair_pyramid, upsample_flow, FlowEstimate, FlowParams, FramePair, TvL1Params};
use crate::error::Result;
use crate::field::{Flow2, Image};
use crate::imgproc::{gradient, warp};

/// TV-L1 flow by the Chambolle projection scheme with iterated warping,
/// coarse to fine.
pub fn tv_l1(pair: &FramePair, p: &FlowParams) -> Result<FlowEstimate> {
    p.validate()?;
    let (w, h) = pair.shape();
    if pair.is_degenerate() {
        return Ok(FlowEstimate::degenerate(w, h));
    }
    let levels = pair_pyramid(pair, p.pyramid_levels, 255.0);
    let mut flow = Flow2::zeros(levels[0].0.width(), levels[0].0.height());
    for (a, b) in &levels {
        if flow.shape() != a.shape() {
            flow = upsample_flow(&flow, a.width(), a.height());
        }
        flow = solve_level(a, b, flow, &p.tv_l1);
    }
    Ok(FlowEstimate { flow, degenerate: false })
}

struct Dual {
    p11: Vec<f64>,
    p12: Vec<f64>,
    p21: Vec<f64>,
    p22: Vec<f64>,
}

fn solve_level(a: &Image, b: &Image, init: Flow2, q: &TvL1Params) -> Flow2 {
    let (w, h) = a.shape();
    let n = w * h;
    let l_t = q.lambda * q.theta;
    let step = q.tau / q.theta;
    let mut u1 = init.u.into_vec();
    let mut u2 = init.v.into_vec();
    let mut dual = Dual { p11: vec![0.0; n], p12: vec![0.0; n], p21: vec![0.0; n], p22: vec![0.0; n] };
    let mut v1 = vec![0.0; n];
    let mut v2 = vec![0.0; n];
    for _ in 0..q.warps {
        let u0 = Flow2 { u: Image::from_vec(w, h, u1.clone()).unwrap(), v: Image::from_vec(w, h, u2.clone()).unwrap() };
        let bw = warp(b, &u0.u, &u0.v);
        let (gx, gy) = gradient(&bw);
        let (gx, gy) = (gx.into_vec(), gy.into_vec());
        let grad2: Vec<f64> = gx.iter().zip(&gy).map(|(x, y)| x * x + y * y).collect();
        let rho_c: Vec<f64> =
            (0..n).map(|k| bw.as_slice()[k] - gx[k] * u1[k] - gy[k] * u2[k] - a.as_slice()[k]).collect();
        for _ in 0..q.iterations {
            for k in 0..n {
                let rho = rho_c[k] + gx[k] * u1[k] + gy[k] * u2[k];
                let (d1, d2) = if rho < -l_t * grad2[k] {
                    (l_t * gx[k], l_t * gy[k])
                } else if rho > l_t * grad2[k] {
                    (-l_t * gx[k], -l_t * gy[k])
                } else if grad2[k] > 1e-10 {
                    (-rho * gx[k] / grad2[k], -rho * gy[k] / grad2[k])
                } else {
                    (0.0, 0.0)
                };
                v1[k] = u1[k] + d1;
                v2[k] = u2[k] + d2;
            }
            let div1 = divergence(&dual.p11, &dual.p12, w, h);
            let div2 = divergence(&dual.p21, &dual.p22, w, h);
            let mut err = 0.0;
            for k in 0..n {
                let n1 = v1[k] + q.theta * div1[k];
                let n2 = v2[k] + q.theta * div2[k];
                err += (n1 - u1[k]).powi(2) + (n2 - u2[k]).powi(2);
                u1[k] = n1;
                u2[k] = n2;
            }
            project(&u1, &mut dual.p11, &mut dual.p12, w, h, step);
            project(&u2, &mut dual.p21, &mut dual.p22, w, h, step);
            if err / (n as f64) < q.epsilon * q.epsilon {
                break;
            }
        }
        if q.median_radius > 0 {
            u1 = median_filter(&u1, w, h, q.median_radius);
            u2 = median_filter(&u2, w, h, q.median_radius);
        }
    }
    Flow2 { u: Image::from_vec(w, h, u1).unwrap(), v: Image::from_vec(w, h, u2).unwrap() }
}

/// Square-window median with clamped borders.
fn median_filter(f: &[f64], w: usize, h: usize, r: usize) -> Vec<f64> {
    let r = r as i64;
    let mut buf = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    (0..w * h)
        .map(|k| {
            let (i, j) = ((k % w) as i64, (k / w) as i64);
            buf.clear();
            for dj in -r..=r {
                for di in -r..=r {
                    let x = (i + di).clamp(0, w as i64 - 1) as usize;
                    let y = (j + dj).clamp(0, h as i64 - 1) as usize;
                    buf.push(f[y * w + x]);
                }
            }
            let mid = buf.len() / 2;
            *buf.select_nth_unstable_by(mid, |a, b| a.total_cmp(b)).1
        })
        .collect()
}

/// Forward differences, zero on the last row/column.
fn forward_gradient(f: &[f64], w: usize, h: usize, k: usize) -> (f64, f64) {
    let i = k % w;
    let j = k / w;
    let fx = if i + 1 < w { f[k + 1] - f[k] } else { 0.0 };
    let fy = if j + 1 < h { f[k + w] - f[k] } else { 0.0 };
    (fx, fy)
}

/// Negative adjoint of `forward_gradient`.
fn divergence(p1: &[f64], p2: &[f64], w: usize, h: usize) -> Vec<f64> {
    (0..w * h)
        .map(|k| {
            let i = k % w;
            let j = k / w;
            let dx = if i == 0 {
                p1[k]
            } else if i + 1 == w {
                -p1[k - 1]
            } else {
                p1[k] - p1[k - 1]
            };
            let dy = if j == 0 {
                p2[k]
            } else if j + 1 == h {
                -p2[k - w]
            } else {
                p2[k] - p2[k - w]
            };
            dx + dy
        })
        .collect()
}

fn project(u: &[f64], p1: &mut [f64], p2: &mut [f64], w: usize, h: usize, step: f64) {
    for k in 0..w * h {
        let (ux, uy) = forward_gradient(u, w, h, k);
        let ng = 1.0 + step * ux.hypot(uy);
        p1[k] = (p1[k] + step * ux) / ng;
        p2[k] = (p2[k] + step * uy) / ng;
    }
}
