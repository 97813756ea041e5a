//! Explicit time stepping of the one-dimensional model flow
//! `φ_t = sign(𝓕φ) |𝓕φ|^{1/(p-1)}`, with `𝓕φ = (w |φ'|^{p-2} φ')' / w`.
//!
//! The state lives on a uniform mesh of `[0, end]` with `φ_0 = 0` and zero
//! flux at the right end. A separable solution `g(t) φ₁` decays like
//! `exp(-μ^{1/(p-1)} t)`, which [`decay_rate`] measures.

use crate::compfun::signed_pow;
use crate::error::{Error, Result};
use crate::model::ModelProblem;

/// `0.2 h^p / (p-1)`, the nominal explicit bound.
const BASE_SAFETY: f64 = 0.2;
/// Fraction of the linearized stability limit `2/|J|` actually used
/// (`0.4/|J|` is a fifth of it).
const JACOBIAN_SAFETY: f64 = 0.4;
const POW_FLOOR: f64 = 1e-300;
/// Relative floors used only when estimating the stiffness.
const SLOPE_FLOOR: f64 = 1e-8;
const UNDERFLOW: f64 = 1e-280;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub h: f64,
    /// Nodal values `φ_0..φ_n`.
    pub values: Vec<f64>,
    pub time: f64,
}

impl FlowState {
    /// Samples `f` on `n` cells of `[0, problem.end()]`. The first value is
    /// forced to zero.
    pub fn from_fn(problem: &ModelProblem, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = problem.end() / n as f64;
        let mut values: Vec<f64> = (0..=n).map(|i| f(i as f64 * h)).collect();
        values[0] = 0.0;
        FlowState { h, values, time: 0.0 }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn mesh(&self) -> Vec<f64> {
        (0..=self.n()).map(|i| i as f64 * self.h).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
    }

    /// Number of strict sign changes, skipping zeros.
    pub fn sign_changes(&self) -> usize {
        let mut last = 0.0f64;
        let mut count = 0;
        for &v in &self.values {
            if v != 0.0 {
                if last != 0.0 && (v > 0.0) != (last > 0.0) {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }
}

/// The discrete operator with cached mesh weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowOperator {
    pub p: f64,
    pub h: f64,
    node_weights: Vec<f64>,
    mid_weights: Vec<f64>,
    safety: f64,
}

impl FlowOperator {
    pub fn new(problem: &ModelProblem, n: usize) -> Result<Self> {
        problem.validate()?;
        if n < 4 {
            return Err(Error::domain(format!("flow mesh needs at least 4 cells, got {n}")));
        }
        if problem.singular_end() {
            return Err(Error::domain("the flow needs a weight that stays positive at the right end"));
        }
        let end = problem.end();
        let h = end / n as f64;
        let node_weights = (0..=n)
            .map(|i| problem.weight(if i == n { end } else { i as f64 * h }))
            .collect::<Result<Vec<_>>>()?;
        let mid_weights = (0..n)
            .map(|i| problem.weight((i as f64 + 0.5) * h))
            .collect::<Result<Vec<_>>>()?;
        Ok(FlowOperator {
            p: problem.p,
            h,
            node_weights,
            mid_weights,
            safety: 1.0,
        })
    }

    /// Scales every time step by `factor` (halving checks use 0.5).
    pub fn with_safety(mut self, factor: f64) -> Self {
        self.safety = factor;
        self
    }

    pub fn n(&self) -> usize {
        self.mid_weights.len()
    }

    fn check(&self, state: &FlowState) -> Result<()> {
        if state.values.len() != self.n() + 1 || (state.h - self.h).abs() > 1e-12 * self.h {
            return Err(Error::domain("flow state does not match the operator mesh"));
        }
        Ok(())
    }

    fn slopes(&self, values: &[f64]) -> Vec<f64> {
        values.windows(2).map(|v| (v[1] - v[0]) / self.h).collect()
    }

    /// `𝓕φ` at every node; zero at `s = 0`, one-sided half cell at the end.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n();
        let h = self.h;
        let flux: Vec<f64> = self
            .slopes(values)
            .iter()
            .zip(&self.mid_weights)
            .map(|(&d, &w)| w * signed_pow(d, self.p - 1.0))
            .collect();
        let mut out = vec![0.0; n + 1];
        for i in 1..n {
            out[i] = (flux[i] - flux[i - 1]) / (h * self.node_weights[i]);
        }
        out[n] = -flux[n - 1] / (0.5 * h * self.node_weights[n]);
        out
    }

    /// Time step for the current state: the nominal `0.2 h^p/(p-1)`, capped
    /// by the linearized explicit-Euler limit of the degenerate diffusion.
    pub fn stable_dt(&self, values: &[f64]) -> f64 {
        self.dt_for(values, &self.apply(values))
    }

    fn dt_for(&self, values: &[f64], f: &[f64]) -> f64 {
        let p = self.p;
        let n = self.n();
        let h = self.h;
        let nominal = BASE_SAFETY * h.powf(p) / (p - 1.0);
        if p == 2.0 {
            // Linear case: the Jacobian does not depend on the state.
            let jmax = (1..=n)
                .map(|i| {
                    let right = if i < n { self.mid_weights[i] } else { 0.0 };
                    let cell = if i < n { h } else { 0.5 * h };
                    (self.mid_weights[i - 1] + right) / (h * cell * self.node_weights[i])
                })
                .fold(0.0f64, f64::max);
            return self.safety * nominal.min(JACOBIAN_SAFETY / jmax);
        }
        let slopes = self.slopes(values);
        let dmax = slopes.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let fmax = f.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if dmax == 0.0 || fmax == 0.0 {
            return self.safety * nominal;
        }
        let dfloor = SLOPE_FLOOR * dmax;
        let ffloor = SLOPE_FLOOR * fmax;
        let stiff = |d: f64| d.abs().max(dfloor).powf(p - 2.0);
        let mut jmax = 0.0f64;
        for i in 1..=n {
            let right = if i < n { self.mid_weights[i] * stiff(slopes[i]) } else { 0.0 };
            let left = self.mid_weights[i - 1] * stiff(slopes[i - 1]);
            let cell = if i < n { h } else { 0.5 * h };
            let df = (p - 1.0) * (left + right) / (h * cell * self.node_weights[i]);
            let dg = f[i].abs().max(ffloor).powf((2.0 - p) / (p - 1.0)) / (p - 1.0);
            jmax = jmax.max(df * dg);
        }
        self.safety * nominal.min(JACOBIAN_SAFETY / jmax)
    }

    /// One forward-Euler step of length `dt`.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        self.check(state)?;
        self.advance(state, &self.apply(&state.values), dt)
    }

    fn advance(&self, state: &FlowState, f: &[f64], dt: f64) -> Result<FlowState> {
        let e = 1.0 / (self.p - 1.0);
        let mut values = state.values.clone();
        for (v, &fi) in values.iter_mut().zip(f).skip(1) {
            if fi != 0.0 {
                let g = if self.p == 2.0 { fi } else { fi.signum() * fi.abs().max(POW_FLOOR).powf(e) };
                *v += dt * g;
            }
        }
        values[0] = 0.0;
        let next = FlowState {
            h: state.h,
            values,
            time: state.time + dt,
        };
        let (before, after) = (state.sign_changes(), next.sign_changes());
        if after > before {
            return Err(Error::Stability {
                time: next.time,
                before,
                after,
            });
        }
        Ok(next)
    }

    /// Runs to time `t_final` with [`Self::stable_dt`] steps and fits the
    /// exponential decay of the max-norm over `[t_final/2, t_final]`.
    pub fn decay_fit(&self, initial: &FlowState, t_final: f64) -> Result<DecayFit> {
        self.check(initial)?;
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::domain(format!("final time {t_final} must be positive")));
        }
        if initial.max_norm() == 0.0 {
            return Err(Error::domain("initial data vanish identically"));
        }
        let start = initial.time;
        let window = start + 0.5 * t_final;
        let stop = start + t_final;
        let reference = unit(&initial.values);
        let mut state = initial.clone();
        let mut fit = LineFit::default();
        let mut min_cosine = f64::INFINITY;
        let mut steps = 0;
        loop {
            if state.time >= window {
                let norm = state.max_norm();
                if norm.is_nan() || norm <= UNDERFLOW {
                    return Err(Error::domain(format!("solution underflowed at t = {}", state.time)));
                }
                fit.push(state.time, norm.ln());
                let u = unit(&state.values);
                min_cosine = min_cosine.min(u.iter().zip(&reference).map(|(a, b)| a * b).sum());
            }
            if state.time >= stop {
                break;
            }
            let f = self.apply(&state.values);
            let dt = self.dt_for(&state.values, &f).min(stop - state.time);
            state = self.advance(&state, &f, dt)?;
            steps += 1;
            if state.time < window && state.max_norm() <= UNDERFLOW {
                return Err(Error::domain(format!(
                    "solution underflowed at t = {} before the fit window",
                    state.time
                )));
            }
        }
        let rate = -fit.slope().ok_or_else(|| Error::domain("fit window holds fewer than two samples"))?;
        Ok(DecayFit {
            rate,
            min_cosine,
            steps,
            final_state: state,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Fitted rate `r` in `|φ|_∞ ~ exp(-r t)`.
    pub rate: f64,
    /// Smallest cosine similarity to the initial data over the fit window.
    pub min_cosine: f64,
    pub steps: usize,
    pub final_state: FlowState,
}

#[derive(Debug, Default)]
struct LineFit {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
}

impl LineFit {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
    }

    fn slope(&self) -> Option<f64> {
        let det = self.n * self.sxx - self.sx * self.sx;
        (self.n >= 2.0 && det > 0.0).then(|| (self.n * self.sxy - self.sx * self.sy) / det)
    }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// `𝓕φ` for a state on `problem`.
pub fn apply_f(problem: &ModelProblem, state: &FlowState) -> Result<Vec<f64>> {
    let op = FlowOperator::new(problem, state.n())?;
    op.check(state)?;
    Ok(op.apply(&state.values))
}

/// One explicit step.
pub fn step(problem: &ModelProblem, state: &FlowState, dt: f64) -> Result<FlowState> {
    FlowOperator::new(problem, state.n())?.step(state, dt)
}

/// Exponential decay rate of the max-norm fitted over `[T/2, T]`.
pub fn decay_rate(problem: &ModelProblem, initial: &FlowState, t_final: f64) -> Result<f64> {
    Ok(FlowOperator::new(problem, initial.n())?.decay_fit(initial, t_final)?.rate)
}
