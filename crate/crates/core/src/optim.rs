//! Classical optimizers over black-box cost functions.
//!
//! Three methods cover the stochastic-vs-gradient-based dichotomy: a
//! simultaneous-perturbation stochastic approximation (SPSA), the
//! Nelder-Mead simplex, and a BFGS-style quasi-Newton method with
//! finite-difference gradients. All three account for every cost invocation
//! in the returned trace and share the `(ftol, patience)` cost-change
//! convergence rule.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum OptimizerKind {
    Spsa,
    NelderMead,
    QuasiNewton,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimError {
    #[error("cost function returned a non-finite value")]
    NonFiniteCost,
    #[error("empty parameter vector")]
    EmptyParameters,
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
}

/// SPSA gain schedules `a_k = a / (k+1+A)^alpha`, `c_k = c / (k+1)^gamma`.
/// `a` is calibrated from the first gradient estimate so that the first
/// update has parameter-space magnitude `first_step`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpsaConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Stability offset `A`; `None` means `0.1 * max_iterations`.
    pub stability_offset: Option<f64>,
    pub c: f64,
    pub first_step: f64,
    /// Safety clamp on the per-iteration step infinity norm.
    pub max_step: f64,
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self {
            alpha: 0.602,
            gamma: 0.101,
            stability_offset: None,
            c: 0.1,
            first_step: 0.1,
            max_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NelderMeadConfig {
    /// Per-coordinate displacement of the initial simplex, in radians.
    pub initial_step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { initial_step: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuasiNewtonConfig {
    /// Central finite-difference step.
    pub gradient_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Line-search halving budget before reporting convergence.
    pub max_halvings: usize,
    /// Gradient infinity-norm termination threshold.
    pub gradient_tolerance: f64,
}

impl Default for QuasiNewtonConfig {
    fn default() -> Self {
        Self {
            gradient_step: 1e-6,
            armijo_c1: 1e-4,
            max_halvings: 40,
            gradient_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iterations: usize,
    /// Cost-change tolerance of the shared convergence rule.
    pub ftol: f64,
    /// Consecutive small-change iterations required before stopping.
    pub patience: usize,
    pub spsa: SpsaConfig,
    pub nelder_mead: NelderMeadConfig,
    pub quasi_newton: QuasiNewtonConfig,
}

impl OptimizerConfig {
    /// Defaults for exact (full-wavefunction) cost evaluation.
    pub fn exact(kind: OptimizerKind) -> Self {
        Self {
            kind,
            max_iterations: match kind {
                OptimizerKind::Spsa => 250,
                OptimizerKind::NelderMead => 500,
                OptimizerKind::QuasiNewton => 150,
            },
            ftol: 1e-6,
            patience: match kind {
                OptimizerKind::Spsa => 10,
                _ => 1,
            },
            spsa: SpsaConfig::default(),
            nelder_mead: NelderMeadConfig::default(),
            quasi_newton: QuasiNewtonConfig::default(),
        }
    }

    /// Defaults for finite-shot cost evaluation, where the noise floor
    /// pushes the tolerance up.
    pub fn sampled(kind: OptimizerKind) -> Self {
        Self {
            ftol: 1e-2,
            ..Self::exact(kind)
        }
    }

    fn validate(&self, dim: usize) -> Result<(), OptimError> {
        if dim == 0 {
            return Err(OptimError::EmptyParameters);
        }
        if self.max_iterations == 0 {
            return Err(OptimError::BadConfig("max_iterations must be >= 1"));
        }
        if !(self.ftol > 0.0) {
            return Err(OptimError::BadConfig("ftol must be > 0"));
        }
        if self.patience == 0 {
            return Err(OptimError::BadConfig("patience must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Termination {
    Converged,
    MaxIterations,
}

/// Outcome of one optimization run, with exact evaluation accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    /// True number of cost-function invocations.
    pub evaluations: u64,
    /// Running best cost, one entry per iteration.
    pub cost_history: Vec<f64>,
    pub terminated_by: Termination,
}

/// Counting wrapper around the black-box cost; rejects non-finite values.
struct Evaluator<F> {
    cost: F,
    evaluations: u64,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    fn new(cost: F) -> Self {
        Self {
            cost,
            evaluations: 0,
        }
    }

    fn eval(&mut self, x: &[f64]) -> Result<f64, OptimError> {
        let v = (self.cost)(x);
        self.evaluations += 1;
        if !v.is_finite() {
            return Err(OptimError::NonFiniteCost);
        }
        Ok(v)
    }
}

/// Tracks the `(ftol, patience)` convergence rule over per-iteration cost
/// changes. [`ConvergenceRule::smoothed`] filters through an exponential
/// moving average (for noisy objectives); [`ConvergenceRule::raw`] compares
/// each change directly.
struct ConvergenceRule {
    ftol: f64,
    patience: usize,
    smooth: bool,
    smoothed: Option<f64>,
    streak: usize,
}

impl ConvergenceRule {
    fn smoothed(ftol: f64, patience: usize) -> Self {
        Self {
            ftol,
            patience,
            smooth: true,
            smoothed: None,
            streak: 0,
        }
    }

    fn raw(ftol: f64, patience: usize) -> Self {
        Self {
            smooth: false,
            ..Self::smoothed(ftol, patience)
        }
    }

    fn observe(&mut self, change: f64) -> bool {
        let change = math::abs(change);
        let s = match self.smoothed {
            Some(prev) if self.smooth => 0.9 * prev + 0.1 * change,
            _ => change,
        };
        self.smoothed = Some(s);
        if s < self.ftol {
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        self.streak >= self.patience
    }
}

/// Dispatches to the optimizer selected in the configuration.
pub fn minimize<F, R>(
    cost: F,
    x0: &[f64],
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    match cfg.kind {
        OptimizerKind::Spsa => spsa(cost, x0, cfg, rng),
        OptimizerKind::NelderMead => nelder_mead(cost, x0, cfg),
        OptimizerKind::QuasiNewton => quasi_newton(cost, x0, cfg),
    }
}

/// Simultaneous perturbation stochastic approximation.
///
/// Each iteration spends exactly two cost evaluations at `x +- c_k Delta`
/// with a random sign vector `Delta`; two extra evaluations anchor the
/// trace at the initial and final iterate, so a run of `k` iterations
/// makes `2k + 2` cost calls. The `a` gain is calibrated from gradient
/// estimates averaged over the first few iterations (the iterate holds
/// still meanwhile) so that early updates have magnitude near
/// `first_step`; a single-sample calibration is too fragile against an
/// unluckily small or vanishing first estimate.
pub fn spsa<F, R>(
    cost: F,
    x0: &[f64],
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let dim = x0.len();
    cfg.validate(dim)?;
    let sc = &cfg.spsa;
    let big_a = sc
        .stability_offset
        .unwrap_or(0.1 * cfg.max_iterations as f64);

    let mut ev = Evaluator::new(cost);
    let mut x = x0.to_vec();
    let f0 = ev.eval(&x)?;
    let mut best_params = x.clone();
    let mut best_cost = f0;
    let mut history = Vec::with_capacity(cfg.max_iterations);
    let mut rule = ConvergenceRule::smoothed(cfg.ftol, cfg.patience);
    let mut prev_proxy = f0;
    let mut gain_a: Option<f64> = None;
    let mut grad_sum = 0.0;
    let calibration_samples = 10usize.min(cfg.max_iterations.div_ceil(2));
    let mut terminated_by = Termination::MaxIterations;

    let mut xp = vec![0.0; dim];
    let mut xm = vec![0.0; dim];
    for k in 0..cfg.max_iterations {
        let ck = sc.c / math::powf(k as f64 + 1.0, sc.gamma);
        let delta: Vec<f64> = (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        for i in 0..dim {
            xp[i] = x[i] + ck * delta[i];
            xm[i] = x[i] - ck * delta[i];
        }
        let fp = ev.eval(&xp)?;
        let fm = ev.eval(&xm)?;
        if fp < best_cost {
            best_cost = fp;
            best_params.copy_from_slice(&xp);
        }
        if fm < best_cost {
            best_cost = fm;
            best_params.copy_from_slice(&xm);
        }

        let diff = fp - fm;
        let grad_mag = math::abs(diff) / (2.0 * ck);
        if let Some(a) = gain_a {
            let ak = a / math::powf(k as f64 + 1.0 + big_a, sc.alpha);
            // All components share the same magnitude; clamp it once.
            let step = (ak * grad_mag).min(sc.max_step);
            for i in 0..dim {
                let dir = if diff / delta[i] > 0.0 { 1.0 } else { -1.0 };
                x[i] -= dir * step;
            }
        } else {
            grad_sum += grad_mag;
            if k + 1 >= calibration_samples {
                let mean = grad_sum / (k as f64 + 1.0);
                if mean > 1e-12 {
                    // The update moves every coordinate by the same amount, so
                    // divide by sqrt(dim) to give the first step a euclidean
                    // length of `first_step` independent of dimension.
                    gain_a = Some(
                        sc.first_step * math::powf(1.0 + big_a, sc.alpha)
                            / (mean * math::sqrt(dim as f64)),
                    );
                }
            }
        }

        let proxy = 0.5 * (fp + fm);
        let change = proxy - prev_proxy;
        prev_proxy = proxy;
        history.push(best_cost);
        // Convergence is only judged once the iterate is actually moving.
        if gain_a.is_some() && rule.observe(change) {
            terminated_by = Termination::Converged;
            break;
        }
    }

    // The perturbed probes never visit the iterate itself; measure it once
    // so the reported best reflects the converged parameters.
    let f_final = ev.eval(&x)?;
    if f_final < best_cost {
        best_cost = f_final;
        best_params.copy_from_slice(&x);
    }

    Ok(OptimizationTrace {
        best_params,
        best_cost,
        evaluations: ev.evaluations,
        cost_history: history,
        terminated_by,
    })
}

/// Nelder-Mead simplex with the standard reflection/expansion/contraction/
/// shrink coefficients (1, 2, 0.5, 0.5). The initial simplex displaces each
/// coordinate of `x0` by `initial_step`; termination is by simplex cost
/// spread below `ftol` or by the iteration budget.
pub fn nelder_mead<F>(
    cost: F,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    cfg.validate(dim)?;
    let mut ev = Evaluator::new(cost);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = ev.eval(x0)?;
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += cfg.nelder_mead.initial_step;
        let f = ev.eval(&v)?;
        simplex.push((v, f));
    }

    let mut best_params = x0.to_vec();
    let mut best_cost = f0;
    let update_best = |simplex: &[(Vec<f64>, f64)], bp: &mut Vec<f64>, bc: &mut f64| {
        for (v, f) in simplex {
            if *f < *bc {
                *bc = *f;
                bp.clone_from(v);
            }
        }
    };
    update_best(&simplex, &mut best_params, &mut best_cost);

    let mut history = Vec::new();
    let mut terminated_by = Termination::MaxIterations;

    for _ in 0..cfg.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        if spread < cfg.ftol {
            terminated_by = Termination::Converged;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for i in 0..dim {
                centroid[i] += v[i];
            }
        }
        for c in &mut centroid {
            *c /= dim as f64;
        }
        let worst = simplex[dim].clone();
        let shifted = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + t * (centroid[i] - worst.0[i]))
                .collect()
        };

        let xr = shifted(1.0);
        let fr = ev.eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = shifted(2.0);
            let fe = ev.eval(&xe)?;
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, use_outside) = if fr < worst.1 {
                (shifted(0.5), true)
            } else {
                (shifted(-0.5), false)
            };
            let fc = ev.eval(&xc)?;
            let threshold = if use_outside { fr } else { worst.1 };
            if fc < threshold {
                simplex[dim] = (xc, fc);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    for i in 0..dim {
                        entry.0[i] = anchor[i] + 0.5 * (entry.0[i] - anchor[i]);
                    }
                    entry.1 = ev.eval(&entry.0)?;
                }
            }
        }
        update_best(&simplex, &mut best_params, &mut best_cost);
        history.push(best_cost);
    }

    Ok(OptimizationTrace {
        best_params,
        best_cost,
        evaluations: ev.evaluations,
        cost_history: history,
        terminated_by,
    })
}

/// BFGS-style quasi-Newton minimization with central finite-difference
/// gradients and an Armijo backtracking line search. A failed line search
/// (step underflow after the halving budget) is reported as convergence to
/// local structure.
pub fn quasi_newton<F>(
    cost: F,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimizationTrace, OptimError>
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    cfg.validate(dim)?;
    let qc = &cfg.quasi_newton;
    let mut ev = Evaluator::new(cost);

    let mut x = x0.to_vec();
    let mut f = ev.eval(&x)?;
    let mut best_params = x.clone();
    let mut best_cost = f;
    let mut history = Vec::new();
    let mut rule = ConvergenceRule::raw(cfg.ftol, cfg.patience);
    let mut terminated_by = Termination::MaxIterations;

    let gradient = |ev: &mut Evaluator<F>, x: &[f64]| -> Result<Vec<f64>, OptimError> {
        let mut g = vec![0.0; dim];
        let mut probe = x.to_vec();
        for i in 0..dim {
            probe[i] = x[i] + qc.gradient_step;
            let fp = ev.eval(&probe)?;
            probe[i] = x[i] - qc.gradient_step;
            let fm = ev.eval(&probe)?;
            probe[i] = x[i];
            g[i] = (fp - fm) / (2.0 * qc.gradient_step);
        }
        Ok(g)
    };

    let mut g = gradient(&mut ev, &x)?;
    // Inverse Hessian approximation, row-major identity.
    let mut h = vec![0.0; dim * dim];
    for i in 0..dim {
        h[i * dim + i] = 1.0;
    }

    'outer: for _ in 0..cfg.max_iterations {
        if g.iter().fold(0.0f64, |m, v| m.max(math::abs(*v))) < qc.gradient_tolerance {
            terminated_by = Termination::Converged;
            break;
        }
        // Search direction p = -H g, reset to steepest descent if not a
        // descent direction.
        let mut p = vec![0.0; dim];
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..dim {
                acc += h[i * dim + j] * g[j];
            }
            p[i] = -acc;
        }
        let mut gp: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
        if gp >= 0.0 {
            for i in 0..dim {
                h[i * dim + i] = 1.0;
                p[i] = -g[i];
            }
            for i in 0..dim {
                for j in 0..dim {
                    if i != j {
                        h[i * dim + j] = 0.0;
                    }
                }
            }
            gp = -g.iter().map(|v| v * v).sum::<f64>();
        }

        // Armijo backtracking by halving.
        let mut t = 1.0;
        let mut halvings = 0;
        let (x_new, f_new) = loop {
            let candidate: Vec<f64> = x.iter().zip(&p).map(|(xi, pi)| xi + t * pi).collect();
            let fc = ev.eval(&candidate)?;
            if fc <= f + qc.armijo_c1 * t * gp {
                break (candidate, fc);
            }
            t *= 0.5;
            halvings += 1;
            if halvings > qc.max_halvings {
                terminated_by = Termination::Converged;
                break 'outer;
            }
        };

        let g_new = gradient(&mut ev, &x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            bfgs_update(&mut h, &s, &y, sy, dim);
        }

        let change = f - f_new;
        x = x_new;
        f = f_new;
        g = g_new;
        if f < best_cost {
            best_cost = f;
            best_params.clone_from(&x);
        }
        history.push(best_cost);
        if rule.observe(change) {
            terminated_by = Termination::Converged;
            break;
        }
    }

    Ok(OptimizationTrace {
        best_params,
        best_cost,
        evaluations: ev.evaluations,
        cost_history: history,
        terminated_by,
    })
}

/// Inverse-Hessian BFGS update
/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T` with `r = 1/sy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, dim: usize) {
    let r = 1.0 / sy;
    // hy = H y, yhy = y^T H y
    let mut hy = vec![0.0; dim];
    for i in 0..dim {
        let mut acc = 0.0;
        for j in 0..dim {
            acc += h[i * dim + j] * y[j];
        }
        hy[i] = acc;
    }
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    for i in 0..dim {
        for j in 0..dim {
            h[i * dim + j] += -r * (s[i] * hy[j] + hy[i] * s[j])
                + r * r * (sy + yhy) * s[i] * s[j];
        }
    }
}
