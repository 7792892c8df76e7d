//! Exact elementary slit maps for piecewise-constant drivers with jumps:
//! the forward chain `g_t`, inverse steps, swallowing times, hull grids,
//! and the backward flow.
//!
//! Over a step of duration `h` with constant drive `u` the chordal Loewner
//! equation `dg/dt = 2/(g - u)` integrates in closed form to
//! `(g - u)^2 = (z - u)^2 + 4t`, so composition of such steps solves the
//! equation exactly; the only approximation in the whole pipeline is the
//! piecewise-constant reading of the driver. Driver jumps are applied
//! atomically at step boundaries (the flow itself is continuous in time;
//! only the drive value changes).

use crate::error::{Error, Result};
use crate::levy::DriverPath;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point is declared swallowed when its image comes within
/// `SWALLOW_TOL * (1 + |u|)` of the driving value, or when the step's
/// closed form yields a real radicand crossing.
pub const SWALLOW_TOL: f64 = 1e-8;

/// One elementary step: evolve with constant drive `u` for `duration`,
/// then (possibly) let the driver jump by `post_jump_shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitStep {
    pub duration: f64,
    pub drive: f64,
    pub post_jump_shift: f64,
}

/// Ordered sequence of elementary slit-map steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerChain {
    steps: Vec<SlitStep>,
    total_time: f64,
}

impl LoewnerChain {
    pub fn from_steps(steps: Vec<SlitStep>) -> LoewnerChain {
        assert!(steps.iter().all(|s| s.duration >= 0.0));
        assert!(steps
            .iter()
            .all(|s| s.duration > 0.0 || s.post_jump_shift != 0.0));
        let total_time = steps.iter().map(|s| s.duration).sum();
        LoewnerChain { steps, total_time }
    }

    pub fn steps(&self) -> &[SlitStep] {
        &self.steps
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    /// Driving value in force at time `t` (right-continuous).
    pub fn drive_at(&self, t: f64) -> f64 {
        let mut elapsed = 0.0;
        let mut last = match self.steps.first() {
            Some(s) => s.drive,
            None => return 0.0,
        };
        for s in &self.steps {
            if t < elapsed + s.duration {
                return s.drive;
            }
            elapsed += s.duration;
            last = s.drive + s.post_jump_shift;
        }
        last
    }

    /// Effective (duration, drive) segments covering `[0, t]`, with the
    /// final segment clipped. Zero-duration segments are kept so that the
    /// drive sequence (and hence jump handling) is preserved.
    pub fn segments_until(&self, t: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut remaining = t;
        for s in &self.steps {
            if remaining <= 0.0 && s.duration > 0.0 {
                break;
            }
            let h = s.duration.min(remaining.max(0.0));
            out.push((h, s.drive));
            remaining -= h;
            if h < s.duration {
                break;
            }
        }
        out
    }
}

/// Outcome of evolving a point: its image, or the time it was swallowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwallowResult {
    Alive { point: Complex64 },
    Swallowed { zeta: f64 },
}

impl SwallowResult {
    pub fn is_swallowed(&self) -> bool {
        matches!(self, SwallowResult::Swallowed { .. })
    }

    pub fn point(&self) -> Option<Complex64> {
        match self {
            SwallowResult::Alive { point } => Some(*point),
            SwallowResult::Swallowed { .. } => None,
        }
    }
}

/// Principal square root flipped to the branch that preserves the sign of
/// the real part (and maps into the closed upper half-plane for x = 0).
#[inline]
fn branch_sqrt(re: f64, im: f64, sign_x: f64) -> Complex64 {
    let s = Complex64::new(re, im).sqrt();
    if sign_x < 0.0 {
        -s
    } else {
        s
    }
}

#[inline]
fn canon_zero(x: f64) -> f64 {
    // Rewrites -0.0 as +0.0 so the k = 2 x y imaginary part lands on the
    // correct side of the branch cut.
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// One forward slit step of duration `h` >= 0 with drive `u`, applied to a
/// point of the closed upper half-plane. `swallow_scale` is the absolute
/// proximity tolerance (callers pass `SWALLOW_TOL * (1 + |u|)`).
fn forward_step(z: Complex64, h: f64, u: f64, swallow_scale: f64) -> SwallowResult {
    let x0 = canon_zero(z.re - u);
    let y0 = z.im.max(0.0);
    // Exact singularity crossing: the trajectory from the vertical line
    // above u reaches the drive at time y0^2/4.
    if x0.abs() <= swallow_scale && y0 * y0 <= 4.0 * h {
        return SwallowResult::Swallowed {
            zeta: 0.25 * y0 * y0,
        };
    }
    // Along the step, |g - u|^2 = sqrt((x0^2-y0^2+4t)^2 + 4 x0^2 y0^2) is
    // minimized at t* = (y0^2 - x0^2)/4 with minimum 2|x0| y0.
    if y0 >= x0.abs() {
        let t_star = 0.25 * (y0 * y0 - x0 * x0);
        if t_star <= h && 2.0 * x0.abs() * y0 < swallow_scale * swallow_scale {
            return SwallowResult::Swallowed { zeta: t_star };
        }
    }
    let w = branch_sqrt(x0 * x0 - y0 * y0 + 4.0 * h, 2.0 * x0 * y0, x0);
    SwallowResult::Alive {
        point: Complex64::new(u + w.re, w.im.max(0.0)),
    }
}

/// Closed-form slit map for a constant driver: returns the image, or the
/// in-step swallowing time when `z - u` lies on the singular vertical
/// segment of height `2 sqrt(h)`.
pub fn slit_step_forward(z: Complex64, h: f64, u: f64) -> SwallowResult {
    assert!(h >= 0.0, "step duration must be >= 0");
    forward_step(z, h, u, SWALLOW_TOL * (1.0 + u.abs()))
}

/// Inverse slit step `z = u + sqrt((w-u)^2 - 4h)`, branch mapping the upper
/// half-plane into itself. Errors when `w` lies strictly inside the slit
/// base on the real axis.
pub fn slit_step_inverse(w: Complex64, h: f64, u: f64) -> Result<Complex64> {
    assert!(h >= 0.0, "step duration must be >= 0");
    let x = canon_zero(w.re - u);
    let y = w.im;
    if y <= 0.0 {
        if x.abs() < 2.0 * h.sqrt() {
            return Err(Error::Domain(format!(
                "point {w} lies inside the removed slit (|w-u| < 2 sqrt(h))"
            )));
        }
        let z = branch_sqrt(x * x - 4.0 * h, 0.0, x);
        return Ok(Complex64::new(u + z.re, z.im.max(0.0)));
    }
    let z = branch_sqrt(x * x - y * y - 4.0 * h, 2.0 * x * y, x);
    Ok(Complex64::new(u + z.re, z.im))
}

/// Derivative of the inverse slit step at `w`: `(w-u)/sqrt((w-u)^2-4h)`,
/// expressed with the already-computed image `z`.
#[inline]
pub fn slit_step_inverse_derivative(w: Complex64, z: Complex64, u: f64) -> Complex64 {
    (w - u) / (z - u)
}

/// Approximates a driver by a piecewise-constant chain: between consecutive
/// grid times the drive is the left-endpoint value, every recorded jump
/// becomes a `post_jump_shift` at its exact time, and durations never
/// exceed `max_step`.
pub fn build_chain(path: &DriverPath, max_step: f64) -> LoewnerChain {
    assert!(max_step > 0.0);
    let mut steps = Vec::new();
    let mut ji = 0;
    for i in 0..path.grid.len() - 1 {
        let t0 = path.grid[i];
        let t1 = path.grid[i + 1];
        let drive = path.values[i];
        let d = t1 - t0;
        let mut shift = 0.0;
        while ji < path.jumps.len() && path.jumps[ji].time <= t1 {
            debug_assert_eq!(path.jumps[ji].time, t1, "jump times must be grid points");
            if path.jumps[ji].time == t1 {
                shift += path.jumps[ji].size;
            }
            ji += 1;
        }
        let n_sub = (d / max_step).ceil().max(1.0) as usize;
        let h = d / n_sub as f64;
        for k in 0..n_sub {
            steps.push(SlitStep {
                duration: h,
                drive,
                post_jump_shift: if k + 1 == n_sub { shift } else { 0.0 },
            });
        }
    }
    LoewnerChain::from_steps(steps)
}

/// Composes forward slit steps up to time `t`. Swallowing is checked
/// against the drive in force during each step, at each boundary against
/// both the pre-jump and post-jump values, and at `t` itself.
pub fn forward_map(chain: &LoewnerChain, t: f64, z: Complex64) -> Result<SwallowResult> {
    if !(0.0..=chain.total_time + 1e-12).contains(&t) {
        return Err(Error::Domain(format!(
            "time {t} outside [0, {}]",
            chain.total_time
        )));
    }
    let mut cur = z;
    let mut elapsed = 0.0;
    let mut remaining = t;
    for step in &chain.steps {
        if remaining <= 0.0 {
            break;
        }
        let u = step.drive;
        let scale = SWALLOW_TOL * (1.0 + u.abs());
        // Post-jump clause of the swallowing-time definition: the state may
        // sit exactly on the new driving value.
        if (cur - u).norm() < scale {
            return Ok(SwallowResult::Swallowed { zeta: elapsed });
        }
        let h = step.duration.min(remaining);
        match forward_step(cur, h, u, scale) {
            SwallowResult::Swallowed { zeta } => {
                return Ok(SwallowResult::Swallowed {
                    zeta: elapsed + zeta,
                })
            }
            SwallowResult::Alive { point } => cur = point,
        }
        elapsed += h;
        remaining -= h;
        // Pre-jump clause at the step's right endpoint.
        if (cur - u).norm() < scale {
            return Ok(SwallowResult::Swallowed { zeta: elapsed });
        }
    }
    let u_final = chain.drive_at(t);
    if (cur - u_final).norm() < SWALLOW_TOL * (1.0 + u_final.abs()) {
        return Ok(SwallowResult::Swallowed { zeta: t });
    }
    Ok(SwallowResult::Alive { point: cur })
}

/// Swallowing-time outcome for a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwallowTime {
    AliveAtHorizon,
    /// `zeta` lies in `[lo, hi]` with `hi - lo <= bracket_tol`.
    Bracket { lo: f64, hi: f64 },
}

/// Brackets the swallowing time by bisection on the evolution time.
pub fn swallow_time(chain: &LoewnerChain, z: Complex64, bracket_tol: f64) -> Result<SwallowTime> {
    let horizon = chain.total_time();
    let zeta_hint = match forward_map(chain, horizon, z)? {
        SwallowResult::Alive { .. } => return Ok(SwallowTime::AliveAtHorizon),
        SwallowResult::Swallowed { zeta } => zeta,
    };
    let mut hi = zeta_hint.min(horizon);
    if forward_map(chain, hi, z)?.is_swallowed() {
        // keep hi
    } else {
        hi = horizon;
    }
    let mut lo = 0.0;
    if forward_map(chain, lo, z)?.is_swallowed() {
        return Ok(SwallowTime::Bracket { lo: 0.0, hi: 0.0 });
    }
    while hi - lo > bracket_tol {
        let mid = 0.5 * (lo + hi);
        if forward_map(chain, mid, z)?.is_swallowed() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(SwallowTime::Bracket { lo, hi })
}

/// Rectangle in the closed upper half-plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// A hull-grid entry: swallowed points carry their `zeta` bracket.
#[derive(Debug, Clone, Copy)]
pub struct HullPoint {
    pub x: f64,
    pub y: f64,
    pub zeta: Option<(f64, f64)>,
}

/// Swallowed/alive flags at time `t` on a regular grid over `window`.
/// Rows with y = 0 are excluded (boundary points of the half-plane).
pub fn hull_grid(chain: &LoewnerChain, t: f64, window: &Window, resolution: f64) -> Vec<HullPoint> {
    assert!(resolution > 0.0);
    let nx = ((window.x_max - window.x_min) / resolution).round() as usize;
    let ny = ((window.y_max - window.y_min) / resolution).round() as usize;
    let mut coords = Vec::with_capacity((nx + 1) * (ny + 1));
    for iy in 0..=ny {
        let y = window.y_min + iy as f64 * resolution;
        if y <= 0.0 {
            continue;
        }
        for ix in 0..=nx {
            coords.push((window.x_min + ix as f64 * resolution, y));
        }
    }
    coords
        .par_iter()
        .map(|&(x, y)| {
            let z = Complex64::new(x, y);
            let zeta = match forward_map(chain, t, z).expect("t within chain horizon") {
                SwallowResult::Alive { .. } => None,
                SwallowResult::Swallowed { zeta } => Some((
                    (zeta - 0.5 * resolution * resolution).max(0.0),
                    zeta,
                )),
            };
            HullPoint { x, y, zeta }
        })
        .collect()
}

/// State of the backward flow `z(t) = g_{-t}(z_hat) - V_{-t}` together with
/// the accumulated `log psi = log(y_hat |g'| / y)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BackwardState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub log_psi: f64,
}

/// Runs the backward flow for driver `path` up to time `t`, composing exact
/// inverse slit steps in forward time order. Returns the trajectory sampled
/// at step boundaries (state 0 is the initial point).
pub fn backward_flow(
    path: &DriverPath,
    z_hat: Complex64,
    t: f64,
    max_step: f64,
) -> Result<Vec<BackwardState>> {
    if !(z_hat.im > 0.0) {
        return Err(Error::Domain("backward flow needs Im(z) > 0".into()));
    }
    if t > path.horizon + 1e-12 {
        return Err(Error::Domain(format!(
            "t = {t} exceeds the driver horizon {}",
            path.horizon
        )));
    }
    let chain = build_chain(path, max_step);
    let y_hat = z_hat.im;
    let mut states = Vec::new();
    states.push(BackwardState {
        t: 0.0,
        x: z_hat.re - chain.drive_at(0.0),
        y: y_hat,
        log_psi: 0.0,
    });
    let mut cur = z_hat;
    let mut log_gp = 0.0;
    let mut elapsed = 0.0;
    let mut remaining = t;
    for step in chain.steps() {
        if remaining <= 0.0 {
            break;
        }
        let h = step.duration.min(remaining);
        let u = step.drive;
        if h > 0.0 {
            let w = cur;
            cur = slit_step_inverse(w, h, u)?;
            log_gp += slit_step_inverse_derivative(w, cur, u).norm().ln();
        }
        elapsed += h;
        remaining -= h;
        let v_now = chain.drive_at(elapsed);
        states.push(BackwardState {
            t: elapsed,
            x: cur.re - v_now,
            y: cur.im,
            log_psi: y_hat.ln() + log_gp - cur.im.ln(),
        });
    }
    Ok(states)
}

/// The backward map `g_{-t}(z_hat)` itself (no driver centering).
pub fn backward_map(
    path: &DriverPath,
    z_hat: Complex64,
    t: f64,
    max_step: f64,
) -> Result<Complex64> {
    if !(z_hat.im > 0.0) {
        return Err(Error::Domain("backward map needs Im(z) > 0".into()));
    }
    let chain = build_chain(path, max_step);
    let mut cur = z_hat;
    let mut remaining = t;
    for step in chain.steps() {
        if remaining <= 0.0 {
            break;
        }
        let h = step.duration.min(remaining);
        if h > 0.0 {
            cur = slit_step_inverse(cur, h, step.drive)?;
        }
        remaining -= h;
    }
    Ok(cur)
}

/// Backward flow stopped exactly when the height first reaches `y_star`.
#[derive(Debug, Clone, Copy)]
pub struct StoppedBackward {
    /// The stopping time `T_u`.
    pub t_u: f64,
    /// Centered coordinates at the stopping time.
    pub x: f64,
    pub y: f64,
    /// `log |g'_{-T_u}(z_hat)|`.
    pub log_gprime: f64,
}

/// Runs the backward flow until `Im` first reaches `y_star`, solving for the
/// exact in-step stopping time (within a constant-drive step, `x y` is
/// conserved, which closes the crossing equation in closed form).
pub fn backward_flow_to_height(
    path: &DriverPath,
    z_hat: Complex64,
    y_star: f64,
    max_step: f64,
) -> Result<StoppedBackward> {
    if !(z_hat.im > 0.0) {
        return Err(Error::Domain("backward flow needs Im(z) > 0".into()));
    }
    if y_star < z_hat.im {
        return Err(Error::Domain(format!(
            "target height {y_star} below the initial height {}",
            z_hat.im
        )));
    }
    let chain = build_chain(path, max_step);
    let mut cur = z_hat;
    let mut log_gp = 0.0;
    let mut elapsed = 0.0;
    if cur.im >= y_star {
        return Ok(StoppedBackward {
            t_u: 0.0,
            x: cur.re - chain.drive_at(0.0),
            y: cur.im,
            log_gprime: 0.0,
        });
    }
    for step in chain.steps() {
        let u = step.drive;
        if step.duration > 0.0 {
            let x0 = cur.re - u;
            let y0 = cur.im;
            let tau = 0.25 * (y_star * y_star - y0 * y0) * (y_star * y_star + x0 * x0)
                / (y_star * y_star);
            let h = if tau <= step.duration {
                tau
            } else {
                step.duration
            };
            let w = cur;
            cur = slit_step_inverse(w, h, u)?;
            log_gp += slit_step_inverse_derivative(w, cur, u).norm().ln();
            elapsed += h;
            if tau <= step.duration {
                return Ok(StoppedBackward {
                    t_u: elapsed,
                    x: cur.re - u,
                    y: cur.im,
                    log_gprime: log_gp,
                });
            }
        }
    }
    Err(Error::Horizon {
        horizon: path.horizon,
        target: y_star,
    })
}

/// First time the backward flow's height reaches `e^u`, by linear
/// interpolation within a trajectory step.
pub fn time_change_tu(trajectory: &[BackwardState], u: f64) -> Result<f64> {
    let target = u.exp();
    let first = trajectory
        .first()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    if target < first.y {
        return Err(Error::Domain(format!(
            "e^u = {target} is below the initial height {}",
            first.y
        )));
    }
    if target == first.y {
        return Ok(0.0);
    }
    for w in trajectory.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.y >= target {
            let frac = (target - a.y) / (b.y - a.y);
            return Ok(a.t + frac * (b.t - a.t));
        }
    }
    Err(Error::Horizon {
        horizon: trajectory.last().unwrap().t,
        target,
    })
}
