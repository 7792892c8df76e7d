//! Driving processes: Brownian motion, symmetric alpha-stable paths with an
//! explicit jump record, truncation, and the mixed driver
//! `U_t = sqrt(kappa) B_t + theta^(1/alpha) S_t`.
//!
//! Stable paths are simulated as a compound Poisson process of jumps with
//! magnitude at least `eps_smalljump` (inverse-transform sampling from the
//! restricted Levy density, mirrored in sign) plus a Gaussian component that
//! matches the variance `2 A eps^(2-alpha) / (2-alpha)` per unit time of the
//! discarded small jumps. The jump list must be explicit because truncation
//! and the stopping times at big jumps operate on individual jumps.
//!
//! Grid convention: the continuous component advances at base grid points
//! only; a grid point inserted at a jump time carries exactly that jump.
//! The variance of a base cell is never split, so `value(t) - value(t-)`
//! equals the recorded jump size exactly and the Loewner solver sees jumps
//! aligned to the grid with no smearing.

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

/// Normalization constant of the symmetric alpha-stable Levy density
/// `A(1,-alpha) |x|^(-1-alpha)`, chosen so that the characteristic function
/// is `exp(-t |lambda|^alpha)`.
pub fn norm_const(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0,2), got {alpha}"
        )));
    }
    Ok(alpha * 2f64.powf(alpha - 1.0) / std::f64::consts::PI.sqrt() * gamma((1.0 + alpha) / 2.0)
        / gamma(1.0 - alpha / 2.0))
}

/// Expected number of jumps with `|size| > r` per unit time.
pub fn jump_rate_above(alpha: f64, r: f64) -> Result<f64> {
    Ok(2.0 * norm_const(alpha)? * r.powf(-alpha) / alpha)
}

/// Variance per unit time of the jumps below `eps` that the sampler folds
/// into its Gaussian component.
pub fn small_jump_variance_rate(alpha: f64, eps: f64) -> Result<f64> {
    Ok(2.0 * norm_const(alpha)? * eps.powf(2.0 - alpha) / (2.0 - alpha))
}

/// Parameter block of the mixed driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    /// Stability index in (0,2).
    pub alpha: f64,
    /// Weight of the stable component, >= 0.
    pub theta: f64,
    /// Weight of the Brownian component, >= 0.
    pub kappa: f64,
    /// Truncation level, > 0.
    pub delta: f64,
    /// Small-jump simulation cutoff in (0, delta).
    pub eps_smalljump: f64,
    /// A(1,-alpha); always recomputed from alpha, never taken on trust.
    pub norm_const: f64,
}

impl StableParams {
    pub fn new(alpha: f64, theta: f64, kappa: f64, delta: f64, eps_smalljump: f64) -> Result<Self> {
        let norm = norm_const(alpha)?;
        if theta < 0.0 || kappa < 0.0 {
            return Err(Error::Domain("theta and kappa must be >= 0".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::Domain("delta must be > 0".into()));
        }
        if !(eps_smalljump > 0.0 && eps_smalljump < delta) {
            return Err(Error::Domain(format!(
                "eps_smalljump must lie in (0, delta): eps={eps_smalljump}, delta={delta}"
            )));
        }
        Ok(StableParams {
            alpha,
            theta,
            kappa,
            delta,
            eps_smalljump,
            norm_const: norm,
        })
    }

    /// Default cutoff `eps = delta / 64`.
    pub fn with_default_cutoff(alpha: f64, theta: f64, kappa: f64, delta: f64) -> Result<Self> {
        Self::new(alpha, theta, kappa, delta, delta / 64.0)
    }

    /// Checks the stored normalization constant against a fresh evaluation.
    pub fn validate(&self) -> Result<()> {
        let fresh = norm_const(self.alpha)?;
        if (fresh - self.norm_const).abs() > 1e-12 * fresh.abs() {
            return Err(Error::Domain("stale normalization constant".into()));
        }
        Ok(())
    }

    /// Truncation level seen by the mixed driver, `theta^(1/alpha) * delta`.
    pub fn scaled_delta(&self) -> f64 {
        self.theta.powf(1.0 / self.alpha) * self.delta
    }
}

/// One recorded jump of a cadlag path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub time: f64,
    pub size: f64,
}

/// Provenance carried by every sampled path for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverMeta {
    pub kind: String,
    pub params: Option<StableParams>,
    pub seed: Option<u64>,
    pub step: f64,
    /// Smallest jump magnitude recorded explicitly, in path units.
    pub cutoff: f64,
}

/// Piecewise record of a cadlag driving function: grid samples (each value
/// is the right limit) plus the explicit jump list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriverPath {
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub jumps: Vec<JumpRecord>,
    pub meta: DriverMeta,
}

impl DriverPath {
    /// Right-continuous lookup: value at the largest grid time <= t.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.grid.partition_point(|&g| g <= t);
        if idx == 0 {
            self.values[0]
        } else {
            self.values[idx - 1]
        }
    }

    /// Value at the largest grid time strictly below t.
    pub fn left_value_at(&self, t: f64) -> f64 {
        let idx = self.grid.partition_point(|&g| g < t);
        if idx == 0 {
            self.values[0]
        } else {
            self.values[idx - 1]
        }
    }

    /// Identically-zero driver on a uniform grid.
    pub fn zero(horizon: f64, step: f64) -> DriverPath {
        let (grid, values) = uniform_zero_grid(horizon, step);
        DriverPath {
            horizon,
            grid,
            values,
            jumps: Vec::new(),
            meta: DriverMeta {
                kind: "zero".into(),
                params: None,
                seed: None,
                step,
                cutoff: f64::INFINITY,
            },
        }
    }

    /// Deterministic path from explicit jumps on an otherwise flat driver.
    /// Used for two-slit style oracles.
    pub fn pure_jumps(horizon: f64, step: f64, jumps: &[(f64, f64)]) -> DriverPath {
        let (mut grid, _) = uniform_zero_grid(horizon, step);
        let mut jrecs: Vec<JumpRecord> = jumps
            .iter()
            .map(|&(time, size)| JumpRecord { time, size })
            .collect();
        jrecs.sort_by(|a, b| a.time.total_cmp(&b.time));
        for j in &jrecs {
            assert!(j.time > 0.0 && j.time <= horizon && j.size != 0.0);
            if let Err(pos) = grid.binary_search_by(|g| g.total_cmp(&j.time)) {
                grid.insert(pos, j.time);
            }
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut acc = 0.0;
        let mut ji = 0;
        for &t in &grid {
            while ji < jrecs.len() && jrecs[ji].time <= t {
                acc += jrecs[ji].size;
                ji += 1;
            }
            values.push(acc);
        }
        DriverPath {
            horizon,
            grid,
            values,
            jumps: jrecs,
            meta: DriverMeta {
                kind: "pure-jumps".into(),
                params: None,
                seed: None,
                step,
                cutoff: f64::INFINITY,
            },
        }
    }
}

fn uniform_zero_grid(horizon: f64, step: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(step > 0.0 && horizon >= step, "need step > 0 and horizon >= step");
    let n = (horizon / step).ceil() as usize;
    let mut grid = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = (i as f64 * step).min(horizon);
        grid.push(t);
    }
    if *grid.last().unwrap() < horizon {
        grid.push(horizon);
    }
    grid.dedup();
    let values = vec![0.0; grid.len()];
    (grid, values)
}

/// Draws the compound-Poisson jumps with magnitude >= eps (and < max_size
/// when finite) on [0, horizon]. Sorted by time, no duplicate times.
fn draw_jumps(
    alpha: f64,
    a_const: f64,
    eps: f64,
    max_size: f64,
    horizon: f64,
    rng: &mut Rng,
) -> Vec<JumpRecord> {
    let rate = if max_size.is_finite() {
        2.0 * a_const * (eps.powf(-alpha) - max_size.powf(-alpha)) / alpha
    } else {
        2.0 * a_const * eps.powf(-alpha) / alpha
    };
    let mean = rate * horizon;
    let n = if mean > 0.0 {
        Poisson::new(mean).unwrap().sample(rng) as usize
    } else {
        0
    };
    let mut jumps = Vec::with_capacity(n);
    for _ in 0..n {
        let time = rng.random::<f64>() * horizon;
        let u: f64 = rng.random();
        let magnitude = if max_size.is_finite() {
            // Inverse transform on the tail function restricted to [eps, max).
            let lo = max_size.powf(-alpha);
            let hi = eps.powf(-alpha);
            (hi - u * (hi - lo)).powf(-1.0 / alpha)
        } else {
            eps * (1.0 - u).powf(-1.0 / alpha)
        };
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        jumps.push(JumpRecord {
            time,
            size: sign * magnitude,
        });
    }
    jumps.retain(|j| j.time > 0.0 && j.time <= horizon);
    jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    // Equal f64 jump times are astronomically unlikely; merge them so the
    // grid stays strictly increasing.
    let mut merged: Vec<JumpRecord> = Vec::with_capacity(jumps.len());
    for j in jumps {
        match merged.last_mut() {
            Some(last) if last.time == j.time => last.size += j.size,
            _ => merged.push(j),
        }
    }
    merged.retain(|j| j.size != 0.0);
    merged
}

/// Builds grid/values from a continuous variance rate plus explicit jumps,
/// returning the jump records at their final (possibly nudged) grid times.
/// Base cells keep their full Gaussian increment even when a jump time
/// splits them, so jump-time grid entries carry exactly the jump.
fn assemble(
    horizon: f64,
    step: f64,
    var_rate: f64,
    jumps: &[JumpRecord],
    rng: &mut Rng,
) -> (Vec<f64>, Vec<f64>, Vec<JumpRecord>) {
    let (base, _) = uniform_zero_grid(horizon, step);
    let mut grid = Vec::with_capacity(base.len() + jumps.len());
    let mut values = Vec::with_capacity(base.len() + jumps.len());
    let mut placed = Vec::with_capacity(jumps.len());
    grid.push(0.0);
    values.push(0.0);
    let mut v = 0.0;
    let mut ji = 0;
    for w in base.windows(2) {
        let (t_prev, t_next) = (w[0], w[1]);
        while ji < jumps.len() && jumps[ji].time <= t_next {
            let j = jumps[ji];
            ji += 1;
            // A jump landing exactly on a base point is nudged one ulp below
            // so its grid entry carries the jump size and nothing else.
            let t = if j.time == t_next {
                nudge_down(t_next)
            } else {
                j.time
            };
            if t <= *grid.last().unwrap() {
                continue; // one-ulp cell: drop rather than break ordering
            }
            v += j.size;
            grid.push(t);
            values.push(v);
            placed.push(JumpRecord { time: t, size: j.size });
        }
        let dt = t_next - t_prev;
        let z: f64 = rng.sample(StandardNormal);
        v += (var_rate * dt).sqrt() * z;
        grid.push(t_next);
        values.push(v);
    }
    (grid, values, placed)
}

fn nudge_down(t: f64) -> f64 {
    f64::from_bits(t.to_bits() - 1)
}

/// Standard Brownian path: Gaussian increments with variance `step`.
pub fn sample_brownian(horizon: f64, step: f64, seed: u64) -> Result<DriverPath> {
    if !(step > 0.0 && horizon >= step) {
        return Err(Error::Domain("need step > 0 and horizon >= step".into()));
    }
    let mut rng = rng_from_seed(seed);
    let (grid, values, _) = assemble(horizon, step, 1.0, &[], &mut rng);
    Ok(DriverPath {
        horizon,
        grid,
        values,
        jumps: Vec::new(),
        meta: DriverMeta {
            kind: "brownian".into(),
            params: None,
            seed: Some(seed),
            step,
            cutoff: f64::INFINITY,
        },
    })
}

/// Symmetric alpha-stable path with characteristic function
/// `exp(-t |lambda|^alpha)`. Jumps with magnitude >= `eps_smalljump` are
/// recorded explicitly; smaller jumps are folded into the Gaussian
/// component with matched variance.
pub fn sample_stable(params: &StableParams, horizon: f64, step: f64, seed: u64) -> Result<DriverPath> {
    params.validate()?;
    if !(step > 0.0 && horizon >= step) {
        return Err(Error::Domain("need step > 0 and horizon >= step".into()));
    }
    let mut rng = rng_from_seed(seed);
    let raw = draw_jumps(
        params.alpha,
        params.norm_const,
        params.eps_smalljump,
        f64::INFINITY,
        horizon,
        &mut rng,
    );
    let var_rate = small_jump_variance_rate(params.alpha, params.eps_smalljump)?;
    let (grid, values, jumps) = assemble(horizon, step, var_rate, &raw, &mut rng);
    Ok(DriverPath {
        horizon,
        grid,
        values,
        jumps,
        meta: DriverMeta {
            kind: "stable".into(),
            params: Some(*params),
            seed: Some(seed),
            step,
            cutoff: params.eps_smalljump,
        },
    })
}

/// Removes every jump with `|size| >= delta` and compensates the running
/// value, leaving the truncated process.
pub fn truncate(path: &DriverPath, delta: f64) -> Result<DriverPath> {
    if delta < path.meta.cutoff {
        return Err(Error::Precision(format!(
            "truncation level {delta} is below the simulation cutoff {}",
            path.meta.cutoff
        )));
    }
    let mut removed_acc = 0.0;
    let mut ji = 0;
    let removed: Vec<JumpRecord> = path
        .jumps
        .iter()
        .copied()
        .filter(|j| j.size.abs() >= delta)
        .collect();
    let mut values = Vec::with_capacity(path.values.len());
    for (i, &t) in path.grid.iter().enumerate() {
        while ji < removed.len() && removed[ji].time <= t {
            removed_acc += removed[ji].size;
            ji += 1;
        }
        values.push(path.values[i] - removed_acc);
    }
    let jumps: Vec<JumpRecord> = path
        .jumps
        .iter()
        .copied()
        .filter(|j| j.size.abs() < delta)
        .collect();
    let mut meta = path.meta.clone();
    if !meta.kind.ends_with("-truncated") {
        meta.kind = format!("{}-truncated", meta.kind);
    }
    Ok(DriverPath {
        horizon: path.horizon,
        grid: path.grid.clone(),
        values,
        jumps,
        meta,
    })
}

/// Mixed driver `U_t = sqrt(kappa) B_t + theta^(1/alpha) S_t`, with `S`
/// replaced by its truncation at `delta` when `truncated` is set. The jump
/// list is rescaled by `theta^(1/alpha)` and carried through.
pub fn combined_driver(
    params: &StableParams,
    horizon: f64,
    step: f64,
    seed: u64,
    truncated: bool,
) -> Result<DriverPath> {
    params.validate()?;
    if !(step > 0.0 && horizon >= step) {
        return Err(Error::Domain("need step > 0 and horizon >= step".into()));
    }
    let mut rng = rng_from_seed(seed);
    let theta_scale = if params.theta > 0.0 {
        params.theta.powf(1.0 / params.alpha)
    } else {
        0.0
    };
    let raw: Vec<JumpRecord> = if params.theta > 0.0 {
        draw_jumps(
            params.alpha,
            params.norm_const,
            params.eps_smalljump,
            if truncated { params.delta } else { f64::INFINITY },
            horizon,
            &mut rng,
        )
        .into_iter()
        .map(|j| JumpRecord {
            time: j.time,
            size: theta_scale * j.size,
        })
        .collect()
    } else {
        Vec::new()
    };
    let stable_var = if params.theta > 0.0 {
        theta_scale * theta_scale
            * small_jump_variance_rate(params.alpha, params.eps_smalljump)?
    } else {
        0.0
    };
    let var_rate = params.kappa + stable_var;
    let (grid, values, jumps) = assemble(horizon, step, var_rate, &raw, &mut rng);
    Ok(DriverPath {
        horizon,
        grid,
        values,
        jumps,
        meta: DriverMeta {
            kind: if truncated {
                "combined-truncated".into()
            } else {
                "combined".into()
            },
            params: Some(*params),
            seed: Some(seed),
            step,
            cutoff: theta_scale * params.eps_smalljump,
        },
    })
}

/// Increasing sequence of recorded jumps with `|size| > threshold`.
pub fn jump_times_above(path: &DriverPath, threshold: f64) -> Vec<JumpRecord> {
    path.jumps
        .iter()
        .copied()
        .filter(|j| j.size.abs() > threshold)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for_sample;

    #[test]
    fn norm_const_known_values() {
        // alpha = 1 gives the Cauchy density x^-2 / pi.
        assert!((norm_const(1.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
        // Independent high-precision evaluations.
        assert!((norm_const(0.5).unwrap() - 0.19947114020071633897).abs() < 1e-15);
        assert!((norm_const(1.2).unwrap() - 0.33354942991224811386).abs() < 2e-15);
        assert!((norm_const(1.5).unwrap() - 0.29920671030107450845).abs() < 2e-15);
        // The prefactor alpha forces the limit 0.
        assert!(norm_const(1e-9).unwrap() < 1e-8);
        assert!(norm_const(0.0).is_err());
        assert!(norm_const(2.0).is_err());
    }

    #[test]
    fn brownian_starts_at_zero_and_is_deterministic() {
        let p = sample_brownian(1.0, 0.125, 7).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.grid[0], 0.0);
        assert_eq!(*p.grid.last().unwrap(), 1.0);
        let q = sample_brownian(1.0, 0.125, 7).unwrap();
        assert_eq!(p, q);
        let r = sample_brownian(1.0, 0.125, 8).unwrap();
        assert_ne!(p.values, r.values);
    }

    #[test]
    fn brownian_unit_variance_and_independent_increments() {
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut cross = 0.0;
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        for seed in 0..n {
            let p = sample_brownian(1.0, 0.25, seed).unwrap();
            let b1 = *p.values.last().unwrap();
            sum += b1;
            sumsq += b1 * b1;
            // Increments over [0, 0.5] and [0.5, 1.0].
            let a = p.value_at(0.5);
            let b = b1 - a;
            sum_a += a;
            sum_b += b;
            cross += a * b;
        }
        let nf = n as f64;
        let var = sumsq / nf - (sum / nf).powi(2);
        assert!((var - 1.0).abs() < 0.02, "Var(B_1) = {var}");
        let corr = (cross / nf - (sum_a / nf) * (sum_b / nf)) / 0.5;
        assert!(corr.abs() < 0.02, "increment correlation = {corr}");
    }

    #[test]
    fn stable_jump_count_matches_levy_measure() {
        // Expected jumps with |size| > 1 on [0,1] is 2A/alpha = 2/pi for alpha=1.
        let params = StableParams::new(1.0, 1.0, 0.0, 10.0, 0.05).unwrap();
        let n = 20_000;
        let mut count = 0usize;
        for seed in 0..n {
            let p = sample_stable(&params, 1.0, 0.25, seed).unwrap();
            count += jump_times_above(&p, 1.0).len();
        }
        let mean = count as f64 / n as f64;
        let expect = 2.0 / std::f64::consts::PI;
        // Counts are Poisson(expect): stderr = sqrt(expect/n).
        let se = (expect / n as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * se,
            "mean count {mean} vs {expect} (se {se})"
        );
    }

    #[test]
    fn stable_characteristic_function() {
        let params = StableParams::new(1.2, 1.0, 0.0, 10.0, 0.01).unwrap();
        let n = 100_000u64;
        for &lam in &[0.5f64, 1.0, 2.0] {
            let mut s = 0.0;
            let mut ssq = 0.0;
            for seed in 0..n {
                let p = sample_stable(&params, 1.0, 0.5, seed).unwrap();
                let c = (lam * p.values.last().unwrap()).cos();
                s += c;
                ssq += c * c;
            }
            let nf = n as f64;
            let mean = s / nf;
            let se = ((ssq / nf - mean * mean) / nf).sqrt();
            let exact = (-lam.powf(1.2)).exp();
            assert!(
                (mean - exact).abs() < 3.0 * se + 1e-6,
                "lambda={lam}: {mean} vs {exact} (se {se})"
            );
        }
    }

    #[test]
    fn jump_value_identity_is_exact() {
        let params = StableParams::new(1.2, 1.0, 2.0, 0.5, 0.5 / 64.0).unwrap();
        for seed in [1u64, 2, 3, 4, 5] {
            let p = combined_driver(&params, 1.0, 0.01, seed, false).unwrap();
            assert!(!p.jumps.is_empty());
            for j in &p.jumps {
                let idx = p.grid.binary_search_by(|g| g.total_cmp(&j.time)).unwrap();
                assert!(idx > 0);
                let dv = p.values[idx] - p.values[idx - 1];
                assert_eq!(dv, j.size, "jump at t={} seed={seed}", j.time);
            }
            // Jumps sorted strictly by time.
            for w in p.jumps.windows(2) {
                assert!(w[0].time < w[1].time);
            }
            // Grid strictly increasing.
            for w in p.grid.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn truncate_removes_big_jumps_and_compensates() {
        let params = StableParams::new(1.0, 1.0, 0.0, 10.0, 0.05).unwrap();
        let p = sample_stable(&params, 1.0, 0.25, 42).unwrap();
        let t = truncate(&p, 0.5).unwrap();
        assert!(t.jumps.iter().all(|j| j.size.abs() < 0.5));
        // Identity when nothing is removed.
        let id = truncate(&p, f64::INFINITY).unwrap();
        assert_eq!(id.values, p.values);
        assert_eq!(id.jumps, p.jumps);
        // Idempotence.
        let tt = truncate(&t, 0.5).unwrap();
        assert_eq!(tt.values, t.values);
        assert_eq!(tt.jumps, t.jumps);
        // Compensation: value change equals the removed jump mass.
        let removed: f64 = p
            .jumps
            .iter()
            .filter(|j| j.size.abs() >= 0.5)
            .map(|j| j.size)
            .sum();
        let diff = p.values.last().unwrap() - t.values.last().unwrap();
        assert!((diff - removed).abs() < 1e-12);
        // Below the cutoff the truncation is not representable.
        assert!(matches!(truncate(&p, 0.01), Err(Error::Precision(_))));
    }

    #[test]
    fn truncated_second_moment_alpha_one() {
        // E |S_{1,1}|^2 = 2 A(1,-1) = 2/pi for alpha = 1, c = 1, t = 1.
        let params = StableParams::new(1.0, 1.0, 0.0, 1.0, 1.0 / 64.0).unwrap();
        let n = 100_000u64;
        let mut s = 0.0;
        let mut ssq = 0.0;
        for seed in 0..n {
            let p = sample_stable(&params, 1.0, 0.5, seed).unwrap();
            let t = truncate(&p, 1.0).unwrap();
            let x = *t.values.last().unwrap();
            s += x * x;
            ssq += x.powi(4);
        }
        let nf = n as f64;
        let mean = s / nf;
        let se = ((ssq / nf - mean * mean) / nf).sqrt();
        let exact = 2.0 / std::f64::consts::PI;
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "E|S|^2 = {mean} vs {exact} (se {se})"
        );
    }

    #[test]
    fn combined_driver_degenerate_cases() {
        let p0 = StableParams::new(1.2, 0.0, 2.0, 0.5, 0.001).unwrap();
        let b = combined_driver(&p0, 1.0, 0.1, 3, false).unwrap();
        assert!(b.jumps.is_empty());
        // kappa = 0, theta = 1: pure stable path.
        let p1 = StableParams::new(1.2, 1.0, 0.0, 0.5, 0.01).unwrap();
        let s = combined_driver(&p1, 1.0, 0.1, 3, false).unwrap();
        assert!(!s.jumps.is_empty());
        // Var(U_1) = kappa for theta = 0.
        let n = 50_000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for seed in 0..n {
            let p = combined_driver(&p0, 1.0, 0.25, seed, false).unwrap();
            let u = *p.values.last().unwrap();
            sum += u;
            sumsq += u * u;
        }
        let nf = n as f64;
        let var = sumsq / nf - (sum / nf).powi(2);
        let se = (2.0f64 / nf).sqrt() * 2.0; // Var of sample variance of N(0,2) ~ 2 var^2/n
        assert!((var - 2.0).abs() < 3.0 * se + 0.02, "Var(U_1) = {var}");
    }

    #[test]
    fn jump_times_above_filters() {
        let p = DriverPath::pure_jumps(1.0, 0.25, &[(0.3, 0.2), (0.6, -1.5), (0.9, 0.7)]);
        assert_eq!(jump_times_above(&p, f64::INFINITY).len(), 0);
        assert_eq!(jump_times_above(&p, 1.0).len(), 1);
        let all = jump_times_above(&p, 0.0);
        assert_eq!(all.len(), 3);
        assert!(all.windows(2).all(|w| w[0].time < w[1].time));
    }

    #[test]
    fn per_sample_streams_differ() {
        let mut a = rng_for_sample(9, 0);
        let mut b = rng_for_sample(9, 1);
        let xa: f64 = a.random();
        let xb: f64 = b.random();
        assert_ne!(xa, xb);
    }
}
