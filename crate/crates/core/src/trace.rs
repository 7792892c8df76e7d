//! Trace extraction `gamma(t) = lim_{y -> 0} f_t(iy + U_t)` with adaptive
//! dyadic depth, plus the cadlag and hull-generation checks.

use crate::error::{Error, Result};
use crate::levy::DriverPath;
use crate::loewner::{
    hull_grid, slit_step_inverse, slit_step_inverse_derivative, LoewnerChain, Window,
};
use crate::report::{SubCheck, VerificationReport};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// One evaluated trace point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    /// Final evaluation height `y`.
    pub depth: f64,
    /// `|f_t'(iy + U_t)|` at the final height.
    pub deriv_mag: f64,
    /// First-order bound `deriv_mag * depth` on the remaining tail.
    pub error_est: f64,
    pub converged: bool,
    /// Marks the left-limit evaluation paired with a driver jump.
    pub is_left_limit: bool,
}

impl TraceSample {
    pub fn point(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Time-ordered trace samples; at every recorded big-jump time both the
/// left limit and the right value are present.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceCurve {
    pub samples: Vec<TraceSample>,
    pub jump_times: Vec<f64>,
}

/// `f_t(w)`: composes inverse slit steps in reverse chain order.
pub fn inverse_map_at(chain: &LoewnerChain, t: f64, w: Complex64) -> Result<Complex64> {
    let mut cur = w;
    for &(h, u) in chain.segments_until(t).iter().rev() {
        if h > 0.0 {
            cur = slit_step_inverse(cur, h, u)?;
        }
    }
    Ok(cur)
}

/// `f_t'(w)` as the product of elementary inverse-step derivatives.
pub fn derivative_at(chain: &LoewnerChain, t: f64, w: Complex64) -> Result<Complex64> {
    Ok(inverse_with_derivative(chain, t, w)?.1)
}

fn inverse_with_derivative(
    chain: &LoewnerChain,
    t: f64,
    w: Complex64,
) -> Result<(Complex64, Complex64)> {
    let mut cur = w;
    let mut deriv = Complex64::new(1.0, 0.0);
    for &(h, u) in chain.segments_until(t).iter().rev() {
        if h > 0.0 {
            let prev = cur;
            cur = slit_step_inverse(prev, h, u)?;
            deriv *= slit_step_inverse_derivative(prev, cur, u);
        }
    }
    Ok((cur, deriv))
}

/// Per-level diagnostics of the dyadic descent: `(y, f_t(iy+u), |f_t'|)`.
pub fn depth_profile(
    chain: &LoewnerChain,
    t: f64,
    u_eval: f64,
    levels: u32,
) -> Result<Vec<(f64, Complex64, f64)>> {
    let mut out = Vec::with_capacity(levels as usize + 1);
    for j in 0..=levels {
        let y = 2f64.powi(-(j as i32));
        let w = Complex64::new(u_eval, y);
        let (z, d) = inverse_with_derivative(chain, t, w)?;
        out.push((y, z, d.norm()));
    }
    Ok(out)
}

fn trace_point_at_drive(
    chain: &LoewnerChain,
    t: f64,
    u_eval: f64,
    tol: f64,
    y_min: f64,
    is_left_limit: bool,
) -> Result<TraceSample> {
    assert!(tol > 0.0 && y_min > 0.0);
    let mut y = 1.0;
    let mut sample = None;
    loop {
        let w = Complex64::new(u_eval, y);
        let (z, d) = inverse_with_derivative(chain, t, w)?;
        let deriv_mag = d.norm();
        let err = deriv_mag * y;
        let converged = err < tol;
        sample = Some(TraceSample {
            t,
            re: z.re,
            im: z.im,
            depth: y,
            deriv_mag,
            error_est: err,
            converged,
            is_left_limit,
        });
        if converged || y * 0.5 < y_min {
            break;
        }
        y *= 0.5;
    }
    Ok(sample.expect("at least one depth level evaluated"))
}

/// Evaluates `gamma(t)` along `y = 2^-j`, stopping when the first-order
/// tail bound `|f_t'| y` drops below `tol` or `y` reaches `y_min`.
/// Non-convergence at `y_min` flags the sample instead of failing.
pub fn trace_point(
    chain: &LoewnerChain,
    t: f64,
    tol: f64,
    y_min: f64,
) -> Result<TraceSample> {
    trace_point_at_drive(chain, t, chain.drive_at(t), tol, y_min, false)
}

/// Left limit at a jump time: the same composed map evaluated at the
/// pre-jump driving value (exact, no approach from the left needed).
pub fn trace_left_limit(
    chain: &LoewnerChain,
    driver: &DriverPath,
    t: f64,
    tol: f64,
    y_min: f64,
) -> Result<TraceSample> {
    trace_point_at_drive(chain, t, driver.left_value_at(t), tol, y_min, true)
}

/// Trace on an explicit time grid. The grid is augmented with every
/// recorded driver jump of magnitude above `big_jump_threshold`, and both
/// one-sided samples are produced at those times.
pub fn trace_curve(
    chain: &LoewnerChain,
    driver: &DriverPath,
    grid: &[f64],
    tol: f64,
    y_min: f64,
    big_jump_threshold: f64,
) -> Result<TraceCurve> {
    let horizon = chain.total_time();
    let jump_times: Vec<f64> = driver
        .jumps
        .iter()
        .filter(|j| j.size.abs() > big_jump_threshold && j.time <= horizon)
        .map(|j| j.time)
        .collect();
    let mut ts: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| (0.0..=horizon + 1e-12).contains(&t))
        .collect();
    ts.extend(jump_times.iter().copied());
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let tasks: Vec<(f64, bool)> = ts
        .iter()
        .flat_map(|&t| {
            if jump_times.binary_search_by(|j| j.total_cmp(&t)).is_ok() {
                vec![(t, true), (t, false)]
            } else {
                vec![(t, false)]
            }
        })
        .collect();
    let samples: Result<Vec<TraceSample>> = tasks
        .par_iter()
        .map(|&(t, left)| {
            if left {
                trace_left_limit(chain, driver, t, tol, y_min)
            } else {
                trace_point(chain, t, tol, y_min)
            }
        })
        .collect();
    Ok(TraceCurve {
        samples: samples?,
        jump_times,
    })
}

/// Trace on a dyadically refined grid: intervals whose endpoint images are
/// farther apart than `gap_tol` are split until the spacing reaches
/// `h_min`, except across recorded driver jumps. Produces the curve the
/// cadlag and generation checks run on.
pub fn trace_curve_adaptive(
    chain: &LoewnerChain,
    driver: &DriverPath,
    t_end: f64,
    base_steps: usize,
    h_min: f64,
    gap_tol: f64,
    tol: f64,
    y_min: f64,
    big_jump_threshold: f64,
) -> Result<TraceCurve> {
    let base: Vec<f64> = (0..=base_steps)
        .map(|i| t_end * i as f64 / base_steps as f64)
        .collect();
    let mut curve = trace_curve(chain, driver, &base, tol, y_min, big_jump_threshold)?;
    loop {
        let mut new_ts: Vec<f64> = Vec::new();
        {
            let regular: Vec<&TraceSample> =
                curve.samples.iter().filter(|s| !s.is_left_limit).collect();
            for w in regular.windows(2) {
                let (a, b) = (w[0], w[1]);
                let dt = b.t - a.t;
                if dt <= h_min {
                    continue;
                }
                let gap = (b.point() - a.point()).norm();
                if gap > gap_tol
                    && !driver
                        .jumps
                        .iter()
                        .any(|j| j.time > a.t && j.time <= b.t)
                {
                    new_ts.push(0.5 * (a.t + b.t));
                }
            }
        }
        if new_ts.is_empty() {
            return Ok(curve);
        }
        let fresh: Result<Vec<TraceSample>> = new_ts
            .par_iter()
            .map(|&t| trace_point(chain, t, tol, y_min))
            .collect();
        curve.samples.extend(fresh?);
        curve
            .samples
            .sort_by(|a, b| (a.t, !a.is_left_limit).partial_cmp(&(b.t, !b.is_left_limit)).unwrap());
    }
}

/// Cadlag verification on a sampled curve:
/// (i) adjacent-sample gaps above `osc_tol` must contain a recorded driver
/// jump of magnitude at least `jump_match_threshold` (discontinuities only
/// at driver jumps);
/// (ii) at every marked big-jump time the one-sided samples must be
/// consistent: the left limit agrees with the approach from the left and
/// the right value with the approach from the right, to `osc_tol`.
pub fn cadlag_check(
    curve: &TraceCurve,
    driver: &DriverPath,
    osc_tol: f64,
    jump_match_threshold: f64,
) -> VerificationReport {
    let start = std::time::Instant::now();
    let mut report = VerificationReport::new("cadlag");
    report.params = serde_json::json!({
        "osc_tol": osc_tol,
        "jump_match_threshold": jump_match_threshold,
        "n_samples": curve.samples.len(),
    });
    let regular: Vec<&TraceSample> = curve.samples.iter().filter(|s| !s.is_left_limit).collect();

    // (i): discontinuity attribution; also the max gap over jump-free pairs
    // doubles as the right-continuity modulus at non-jump times.
    let mut unexplained = 0usize;
    let mut max_free_gap: f64 = 0.0;
    let mut discontinuities: Vec<f64> = Vec::new();
    for w in regular.windows(2) {
        let (a, b) = (w[0], w[1]);
        let gap = (b.point() - a.point()).norm();
        let has_jump = driver.jumps.iter().any(|j| {
            j.time > a.t && j.time <= b.t && j.size.abs() >= jump_match_threshold
        });
        if has_jump {
            if gap > osc_tol {
                discontinuities.push(b.t);
            }
        } else {
            max_free_gap = max_free_gap.max(gap);
            if gap > osc_tol {
                unexplained += 1;
                report
                    .notes
                    .push(format!("gap {gap:.3e} over ({:.6}, {:.6}] has no driver jump", a.t, b.t));
            }
        }
    }
    report.subchecks.push(SubCheck::upper(
        "unexplained_discontinuities",
        unexplained as f64,
        0.0,
    ));
    report.subchecks.push(SubCheck::upper(
        "max_gap_between_jumps",
        max_free_gap,
        osc_tol,
    ));

    // (ii): one-sided consistency at marked jump times.
    let mut left_err: f64 = 0.0;
    let mut right_err: f64 = 0.0;
    for &tj in &curve.jump_times {
        let left = curve
            .samples
            .iter()
            .find(|s| s.t == tj && s.is_left_limit);
        let right = curve.samples.iter().find(|s| s.t == tj && !s.is_left_limit);
        let (Some(left), Some(right)) = (left, right) else {
            report.notes.push(format!("missing one-sided samples at jump {tj}"));
            continue;
        };
        if let Some(prev) = regular.iter().rev().find(|s| {
            s.t < tj && !driver.jumps.iter().any(|j| j.time > s.t && j.time < tj)
        }) {
            left_err = left_err.max((prev.point() - left.point()).norm());
        }
        if let Some(next) = regular.iter().find(|s| {
            s.t > tj && !driver.jumps.iter().any(|j| j.time > tj && j.time <= s.t)
        }) {
            right_err = right_err.max((next.point() - right.point()).norm());
        }
    }
    report
        .subchecks
        .push(SubCheck::upper("left_limit_consistency", left_err, osc_tol));
    report
        .subchecks
        .push(SubCheck::upper("right_continuity_at_jumps", right_err, osc_tol));
    report.details = serde_json::json!({ "discontinuity_times": discontinuities });
    report.finish_from_subchecks();
    report.wall_time_s = start.elapsed().as_secs_f64();
    report
}

/// Polyline of the sampled curve up to time `t`, broken at jump times (the
/// image is a union of arcs, one per inter-jump interval).
fn polyline_segments(curve: &TraceCurve, t: f64) -> Vec<(Complex64, Complex64)> {
    let pts: Vec<&TraceSample> = curve.samples.iter().filter(|s| s.t <= t).collect();
    let mut segs = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        // No segment across the jump: the right sample at a jump time starts
        // a new arc (a left-limit sample closes the previous one).
        if !a.is_left_limit && b.is_left_limit {
            segs.push((a.point(), b.point()));
        } else if !a.is_left_limit && !b.is_left_limit && a.t < b.t {
            segs.push((a.point(), b.point()));
        }
    }
    segs
}

fn dist_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let s = s.clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Verifies that the hull is generated by the trace at the grid scale:
/// every hull-boundary grid point lies within `resolution` of the sampled
/// trace image, and no alive grid point is cut off from infinity by the
/// trace polyline (4-connected flood fill over the grid complement).
pub fn generation_check(
    chain: &LoewnerChain,
    curve: &TraceCurve,
    t: f64,
    resolution: f64,
) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let mut report = VerificationReport::new("generation");
    let segs = polyline_segments(curve, t);
    if segs.is_empty() {
        return Err(Error::Domain("trace curve has no samples before t".into()));
    }
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_hi: f64 = 0.0;
    for &(a, b) in &segs {
        x_lo = x_lo.min(a.re).min(b.re);
        x_hi = x_hi.max(a.re).max(b.re);
        y_hi = y_hi.max(a.im).max(b.im);
    }
    let pad = 12.0 * resolution;
    let window = Window {
        x_min: x_lo - pad,
        x_max: x_hi + pad,
        y_min: resolution,
        y_max: y_hi + pad,
    };
    report.params = serde_json::json!({
        "t": t, "resolution": resolution,
        "window": window, "polyline_segments": segs.len(),
    });

    let hull = hull_grid(chain, t, &window, resolution);
    let nx = ((window.x_max - window.x_min) / resolution).round() as usize + 1;
    let ny = hull.len() / nx;
    let idx = |ix: usize, iy: usize| iy * nx + ix;

    // Rasterize the polyline: cells the curve passes through are barrier.
    let mut barrier = vec![false; hull.len()];
    for &(a, b) in &segs {
        let n_sub = ((b - a).norm() / (0.25 * resolution)).ceil() as usize + 1;
        for k in 0..=n_sub {
            let p = a + (b - a) * (k as f64 / n_sub as f64);
            let ix = ((p.re - window.x_min) / resolution).round();
            let iy = ((p.im - window.y_min) / resolution).round();
            if ix >= 0.0 && iy >= 0.0 && (ix as usize) < nx && (iy as usize) < ny {
                barrier[idx(ix as usize, iy as usize)] = true;
            }
        }
    }

    // Sub-check 1: hull boundary lies on the trace.
    let mut boundary_off_trace = 0usize;
    let mut max_boundary_dist: f64 = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let p = &hull[idx(ix, iy)];
            if p.zeta.is_none() {
                continue;
            }
            let mut is_boundary = ix == 0 || ix + 1 == nx || iy == 0 || iy + 1 == ny;
            for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                    if hull[idx(jx as usize, jy as usize)].zeta.is_none() {
                        is_boundary = true;
                    }
                }
            }
            if is_boundary {
                let z = Complex64::new(p.x, p.y);
                let d = segs
                    .iter()
                    .map(|&(a, b)| dist_to_segment(z, a, b))
                    .fold(f64::INFINITY, f64::min);
                max_boundary_dist = max_boundary_dist.max(d);
                if d > resolution {
                    boundary_off_trace += 1;
                    if report.notes.len() < 8 {
                        report
                            .notes
                            .push(format!("hull boundary point ({}, {}) is {d:.3} from the trace", p.x, p.y));
                    }
                }
            }
        }
    }

    // Sub-check 2: flood fill from the window edge through non-barrier
    // cells; every alive cell off the barrier must be reached.
    let mut reached = vec![false; hull.len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for ix in 0..nx {
        for iy in [0, ny - 1] {
            if !barrier[idx(ix, iy)] {
                reached[idx(ix, iy)] = true;
                stack.push((ix, iy));
            }
        }
    }
    for iy in 0..ny {
        for ix in [0, nx - 1] {
            if !barrier[idx(ix, iy)] && !reached[idx(ix, iy)] {
                reached[idx(ix, iy)] = true;
                stack.push((ix, iy));
            }
        }
    }
    while let Some((ix, iy)) = stack.pop() {
        for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
            let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
            if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                let j = idx(jx as usize, jy as usize);
                if !barrier[j] && !reached[j] {
                    reached[j] = true;
                    stack.push((jx as usize, jy as usize));
                }
            }
        }
    }
    let mut trapped_alive = 0usize;
    for iy in 0..ny {
        for ix in 0..nx {
            let j = idx(ix, iy);
            if hull[j].zeta.is_none() && !barrier[j] && !reached[j] {
                trapped_alive += 1;
                if report.notes.len() < 8 {
                    report.notes.push(format!(
                        "alive point ({}, {}) is disconnected from infinity by the trace",
                        hull[j].x, hull[j].y
                    ));
                }
            }
        }
    }

    report.subchecks.push(SubCheck::upper(
        "hull_boundary_off_trace",
        boundary_off_trace as f64,
        0.0,
    ));
    report.subchecks.push(SubCheck::upper(
        "max_hull_boundary_distance",
        if max_boundary_dist.is_finite() {
            max_boundary_dist
        } else {
            0.0
        },
        resolution,
    ));
    report.subchecks.push(SubCheck::upper(
        "alive_points_disconnected",
        trapped_alive as f64,
        0.0,
    ));
    report.finish_from_subchecks();
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}
