//! Discrete weighted Rayleigh-quotient minimization on a uniform mesh.
//!
//! The quotient
//!
//! ```text
//! R(φ) = Σ w_{i+1/2} |(φ_{i+1} - φ_i)/h|^p h  /  Σ c_i w_i |φ_i|^p h
//! ```
//!
//! (trapezoid node weights `c_0 = c_n = 1/2`, otherwise 1) is minimized over
//! vectors with `φ_0 = 0` and `φ_n` free. Weights come straight from the
//! comparison functions, so the oracle shares nothing with the ODE path of
//! the shooting solver.

use crate::compfun::{check_exponent, signed_pow};
use crate::error::{Error, Result};
use crate::model::ModelProblem;

pub const MIN_CELLS: usize = 16;
pub const DEFAULT_MAX_ITERS: usize = 20_000;
const TOL: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteProblem {
    pub n: usize,
    pub h: f64,
    pub p: f64,
    /// `w(s_i)`, `i = 0..=n`.
    pub node_weights: Vec<f64>,
    /// `w(s_i + h/2)`, `i = 0..n`.
    pub mid_weights: Vec<f64>,
}

impl DiscreteProblem {
    /// Builds the mesh problem from explicit weights.
    pub fn new(p: f64, end: f64, node_weights: Vec<f64>, mid_weights: Vec<f64>) -> Result<Self> {
        check_exponent(p)?;
        let n = mid_weights.len();
        if n < MIN_CELLS {
            return Err(Error::domain(format!("mesh needs at least {MIN_CELLS} cells, got {n}")));
        }
        if node_weights.len() != n + 1 {
            return Err(Error::domain(format!(
                "expected {} node weights, got {}",
                n + 1,
                node_weights.len()
            )));
        }
        if !(end.is_finite() && end > 0.0) {
            return Err(Error::domain(format!("length {end} must be positive")));
        }
        // The last node weight may vanish at a singular end; it only enters
        // the denominator.
        let bad_node = node_weights[..n].iter().any(|&w| !(w.is_finite() && w > 0.0))
            || !(node_weights[n].is_finite() && node_weights[n] >= 0.0);
        if bad_node || mid_weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::domain("mesh weights must be positive and finite"));
        }
        Ok(DiscreteProblem {
            n,
            h: end / n as f64,
            p,
            node_weights,
            mid_weights,
        })
    }

    /// Unit weights on `[0, end]`.
    pub fn uniform(p: f64, end: f64, n: usize) -> Result<Self> {
        Self::new(p, end, vec![1.0; n + 1], vec![1.0; n])
    }

    /// Discretizes a validated model problem on `[0, end]` with `n` cells.
    pub fn from_model(problem: &ModelProblem, n: usize) -> Result<Self> {
        problem.validate()?;
        if n < MIN_CELLS {
            return Err(Error::domain(format!("mesh needs at least {MIN_CELLS} cells, got {n}")));
        }
        let end = problem.end();
        let h = end / n as f64;
        let singular = problem.singular_end();
        let node_weights = (0..=n)
            .map(|i| {
                if i == n && singular {
                    Ok(problem.weight(end).unwrap_or(0.0).max(0.0))
                } else {
                    problem.weight(if i == n { end } else { i as f64 * h })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mid_weights = (0..n)
            .map(|i| problem.weight((i as f64 + 0.5) * h))
            .collect::<Result<Vec<_>>>()?;
        Self::new(problem.p, end, node_weights, mid_weights)
    }

    pub fn end(&self) -> f64 {
        self.h * self.n as f64
    }

    /// Node coordinates `s_i = i h`.
    pub fn mesh(&self) -> Vec<f64> {
        (0..=self.n).map(|i| i as f64 * self.h).collect()
    }

    fn mass(&self, i: usize) -> f64 {
        let c = if i == self.n { 0.5 } else { 1.0 };
        c * self.node_weights[i]
    }

    fn parts(&self, phi: &[f64]) -> (f64, f64) {
        let p = self.p;
        let h = self.h;
        let num: f64 = (0..self.n)
            .map(|i| self.mid_weights[i] * ((phi[i + 1] - phi[i]) / h).abs().powf(p))
            .sum::<f64>()
            * h;
        let den: f64 = (1..=self.n).map(|i| self.mass(i) * phi[i].abs().powf(p)).sum::<f64>() * h;
        (num, den)
    }
}

/// Discrete Rayleigh quotient of `phi` (length `n + 1`, `phi[0] = 0`).
pub fn rayleigh(dp: &DiscreteProblem, phi: &[f64]) -> Result<f64> {
    if phi.len() != dp.n + 1 {
        return Err(Error::domain(format!("expected {} values, got {}", dp.n + 1, phi.len())));
    }
    if phi[0] != 0.0 {
        return Err(Error::domain(format!("phi(0) = {} must vanish", phi[0])));
    }
    let (num, den) = dp.parts(phi);
    if den.is_nan() || den <= 0.0 {
        return Err(Error::domain("zero denominator in the Rayleigh quotient"));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub eigenvalue: f64,
    /// Minimizing vector, nonnegative, normalized to max 1.
    pub phi: Vec<f64>,
    pub iterations: usize,
}

/// Minimizes the discrete quotient. `p = 2` uses inverse iteration with a
/// tridiagonal factorization; other `p` use descent along the nonlinear
/// inverse-power direction with Armijo backtracking, started from the
/// `p = 2` minimizer.
pub fn minimize(dp: &DiscreteProblem, max_iters: usize) -> Result<Minimizer> {
    let linear = inverse_iteration(dp, max_iters)?;
    if dp.p == 2.0 {
        return Ok(linear);
    }
    descent(dp, linear.phi, max_iters)
}

fn normalize(phi: &mut [f64]) {
    let m = phi.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let s = if phi.iter().sum::<f64>() < 0.0 { -1.0 / m } else { 1.0 / m };
    phi.iter_mut().for_each(|x| *x *= s);
}

fn inverse_iteration(dp: &DiscreteProblem, max_iters: usize) -> Result<Minimizer> {
    let n = dp.n;
    let h2 = dp.h * dp.h;
    // Unknowns φ_1..φ_n stored at 0..n-1.
    let diag: Vec<f64> = (1..=n)
        .map(|j| {
            let right = if j < n { dp.mid_weights[j] } else { 0.0 };
            (dp.mid_weights[j - 1] + right) / h2
        })
        .collect();
    let off: Vec<f64> = (1..n).map(|j| -dp.mid_weights[j] / h2).collect();
    let mass: Vec<f64> = (1..=n).map(|j| dp.mass(j)).collect();

    // LDLᵀ of the stiffness matrix.
    let mut d = diag.clone();
    let mut l = vec![0.0; n];
    for j in 1..n {
        l[j] = off[j - 1] / d[j - 1];
        d[j] -= l[j] * off[j - 1];
    }
    let solve = |rhs: &mut [f64]| {
        for j in 1..n {
            rhs[j] -= l[j] * rhs[j - 1];
        }
        for j in 0..n {
            rhs[j] /= d[j];
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= l[j + 1] * rhs[j + 1];
        }
    };

    let mut x: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
    let mut full = vec![0.0; n + 1];
    let mut lambda = f64::INFINITY;
    let mut change = f64::INFINITY;
    for it in 1..=max_iters {
        let mut y: Vec<f64> = x.iter().zip(&mass).map(|(a, m)| a * m).collect();
        solve(&mut y);
        normalize(&mut y);
        let dx = x.iter().zip(&y).fold(0.0f64, |a, (u, v)| a.max((u - v).abs()));
        x = y;
        full[1..].copy_from_slice(&x);
        let next = rayleigh(dp, &full)?;
        change = ((lambda - next) / next).abs();
        lambda = next;
        if change <= TOL && dx <= 1e-10 {
            return Ok(Minimizer {
                eigenvalue: lambda,
                phi: full,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        last_value: lambda,
        last_change: change,
    })
}

/// Exact solution `t` of the discrete weighted p-Poisson problem
/// `-(w |t'|^{p-2} t')' = c w |φ|^{p-2} φ` with `t_0 = 0` and zero flux at
/// the right end.
fn inverse_map(dp: &DiscreteProblem, phi: &[f64]) -> Vec<f64> {
    let n = dp.n;
    let q = 1.0 / (dp.p - 1.0);
    let mut flux = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        acc += dp.h * dp.mass(j + 1) * signed_pow(phi[j + 1], dp.p - 1.0);
        flux[j] = acc;
    }
    let mut t = vec![0.0; n + 1];
    for j in 0..n {
        t[j + 1] = t[j] + dp.h * signed_pow(flux[j] / dp.mid_weights[j], q);
    }
    t
}

fn gradient(dp: &DiscreteProblem, phi: &[f64], value: f64) -> Vec<f64> {
    let n = dp.n;
    let p = dp.p;
    let h = dp.h;
    let (_, den) = dp.parts(phi);
    let g: Vec<f64> = (0..n)
        .map(|i| dp.mid_weights[i] * signed_pow((phi[i + 1] - phi[i]) / h, p - 1.0))
        .collect();
    let mut grad = vec![0.0; n + 1];
    for j in 1..=n {
        let right = if j < n { g[j] } else { 0.0 };
        let dnum = p * (g[j - 1] - right);
        let dden = p * h * dp.mass(j) * signed_pow(phi[j], p - 1.0);
        grad[j] = (dnum - value * dden) / den;
    }
    grad
}

fn descent(dp: &DiscreteProblem, mut phi: Vec<f64>, max_iters: usize) -> Result<Minimizer> {
    let mut value = rayleigh(dp, &phi)?;
    let mut change = f64::INFINITY;
    for it in 1..=max_iters {
        let mut target = inverse_map(dp, &phi);
        normalize(&mut target);
        let dir: Vec<f64> = target.iter().zip(&phi).map(|(t, x)| t - x).collect();
        let grad = gradient(dp, &phi, value);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if slope.is_nan() || slope >= 0.0 {
            return finish(phi, value, it);
        }
        let mut alpha = 1.0;
        let accepted = loop {
            let cand: Vec<f64> = phi.iter().zip(&dir).map(|(x, d)| x + alpha * d).collect();
            if let Ok(v) = rayleigh(dp, &cand) {
                if v <= value + ARMIJO * alpha * slope {
                    break Some((cand, v));
                }
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some((mut cand, next)) = accepted else {
            return finish(phi, value, it);
        };
        normalize(&mut cand);
        change = (value - next) / value;
        phi = cand;
        value = next;
        if change < TOL {
            return finish(phi, value, it);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        last_value: value,
        last_change: change,
    })
}

fn finish(mut phi: Vec<f64>, eigenvalue: f64, iterations: usize) -> Result<Minimizer> {
    normalize(&mut phi);
    phi.iter_mut().for_each(|x| *x = x.abs());
    Ok(Minimizer {
        eigenvalue,
        phi,
        iterations,
    })
}

/// Raw values on `n` and `2n` cells together with the extrapolated one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Richardson {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

impl Richardson {
    pub fn new(coarse: f64, fine: f64) -> Self {
        Richardson {
            coarse,
            fine,
            extrapolated: (4.0 * fine - coarse) / 3.0,
        }
    }

    /// `|λ(2n) - λ(n)|`.
    pub fn residual(&self) -> f64 {
        (self.fine - self.coarse).abs()
    }
}

/// Minimizes on `n` and `2n` cells and extrapolates the second-order error.
pub fn minimize_richardson(problem: &ModelProblem, n: usize, max_iters: usize) -> Result<Richardson> {
    let coarse = minimize(&DiscreteProblem::from_model(problem, n)?, max_iters)?;
    let fine = minimize(&DiscreteProblem::from_model(problem, 2 * n)?, max_iters)?;
    Ok(Richardson::new(coarse.eigenvalue, fine.eigenvalue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compfun::pi_p;
    use crate::model::{quaternionic_profile, GeometryProfile};
    use crate::shoot;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn flat(p: f64, end: f64) -> ModelProblem {
        ModelProblem::dirichlet(GeometryProfile::custom(&[(3.0, 0.0)]).unwrap(), p, end).unwrap()
    }

    #[test]
    fn linear_ramp_quotient_is_three() {
        let dp = DiscreteProblem::uniform(2.0, 1.0, 256).unwrap();
        let r = rayleigh(&dp, &dp.mesh()).unwrap();
        assert!((r - 3.0).abs() < 1e-4, "{r}");
    }

    #[test]
    fn rayleigh_rejects_bad_input() {
        let dp = DiscreteProblem::uniform(2.0, 1.0, 16).unwrap();
        assert!(rayleigh(&dp, &[0.0; 17]).is_err());
        let mut v = dp.mesh();
        v[0] = 0.1;
        assert!(rayleigh(&dp, &v).is_err());
        assert!(rayleigh(&dp, &v[1..]).is_err());
        assert!(DiscreteProblem::uniform(2.0, 1.0, 8).is_err());
    }

    #[test]
    fn quarter_wave_sine_with_richardson() {
        let r = minimize_richardson(&flat(2.0, 1.0), 4096, DEFAULT_MAX_ITERS).unwrap();
        let exact = PI * PI / 4.0;
        assert!(((r.extrapolated - exact) / exact).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn minimizer_is_consistent_with_quotient() {
        let dp = DiscreteProblem::from_model(&flat(1.7, 1.3), 256).unwrap();
        let m = minimize(&dp, DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(rayleigh(&dp, &m.phi).unwrap(), m.eigenvalue);
        assert!(m.phi.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn p3_closed_form() {
        let dp = DiscreteProblem::from_model(&flat(3.0, 1.0), 8192).unwrap();
        let m = minimize(&dp, DEFAULT_MAX_ITERS).unwrap();
        // Independent of the model module: 2 (π_3 / 2)^3.
        let exact = 2.0 * (2.0 * PI / (3.0 * (PI / 3.0).sin()) / 2.0).powi(3);
        assert!((exact - 3.5361).abs() < 1e-4);
        assert!(((m.eigenvalue - exact) / exact).abs() < 1e-3, "{}", m.eigenvalue);
    }

    #[test]
    fn low_p_closed_form() {
        let r = minimize_richardson(&flat(1.5, 1.0), 2048, DEFAULT_MAX_ITERS).unwrap();
        let exact = 0.5 * (pi_p(1.5).unwrap() / 2.0).powf(1.5);
        assert!(((r.extrapolated - exact) / exact).abs() < 1e-3, "{r:?} {exact}");
    }

    #[test]
    fn mesh_convergence_is_second_order() {
        let prob = ModelProblem::neumann(quaternionic_profile(2, -1.0).unwrap(), 2.0, 2.0).unwrap();
        let l: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| minimize(&DiscreteProblem::from_model(&prob, n).unwrap(), DEFAULT_MAX_ITERS).unwrap().eigenvalue)
            .collect();
        let ratio = (l[0] - l[1]) / (l[1] - l[2]);
        assert!(ratio >= 3.0, "{l:?} {ratio}");
    }

    #[test]
    fn matches_shooting_on_quaternionic_problem() {
        let prob = ModelProblem::neumann(quaternionic_profile(2, -1.0).unwrap(), 2.0, 2.0).unwrap();
        let o = minimize(&DiscreteProblem::from_model(&prob, 8192).unwrap(), DEFAULT_MAX_ITERS).unwrap();
        let s = shoot::solve(&prob, 1e-10).unwrap().eigenvalue;
        assert!(((o.eigenvalue - s) / s).abs() < 1e-3, "{} {s}", o.eigenvalue);
        assert!(o.eigenvalue >= s * (1.0 - 1e-3));
    }

    #[test]
    fn singular_end_mesh_is_accepted() {
        let prob = ModelProblem::neumann(crate::model::riemannian_profile(3, 1.0).unwrap(), 2.0, PI).unwrap();
        let r = minimize_richardson(&prob, 1024, DEFAULT_MAX_ITERS).unwrap();
        assert!((r.extrapolated - 3.0).abs() < 1e-4, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quotient_is_scale_invariant(c in 0.01f64..100.0, p in 1.2f64..4.0) {
            let dp = DiscreteProblem::uniform(p, 1.0, 32).unwrap();
            let phi: Vec<f64> = dp.mesh().iter().map(|s| (2.0 * s).sin() + s * s).collect();
            let scaled: Vec<f64> = phi.iter().map(|x| c * x).collect();
            let a = rayleigh(&dp, &phi).unwrap();
            let b = rayleigh(&dp, &scaled).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-13);
        }

        #[test]
        fn absolute_value_does_not_raise_quotient(seed in proptest::collection::vec(-1.0f64..1.0, 33), p in 1.2f64..4.0) {
            let dp = DiscreteProblem::uniform(p, 1.0, 32).unwrap();
            let mut phi = seed.clone();
            phi[0] = 0.0;
            prop_assume!(phi.iter().any(|&x| x != 0.0));
            let abs: Vec<f64> = phi.iter().map(|x| x.abs()).collect();
            prop_assert!(rayleigh(&dp, &abs).unwrap() <= rayleigh(&dp, &phi).unwrap() + 1e-14);
        }

        #[test]
        fn longer_domain_lowers_the_minimum(p in 1.5f64..3.0, r in 0.5f64..1.5, grow in 1.05f64..1.5) {
            let prof = quaternionic_profile(2, -1.0).unwrap();
            let a = ModelProblem::dirichlet(prof.clone(), p, r).unwrap();
            let b = ModelProblem::dirichlet(prof, p, r * grow).unwrap();
            let la = minimize(&DiscreteProblem::from_model(&a, 128).unwrap(), DEFAULT_MAX_ITERS).unwrap().eigenvalue;
            let lb = minimize(&DiscreteProblem::from_model(&b, 128).unwrap(), DEFAULT_MAX_ITERS).unwrap().eigenvalue;
            prop_assert!(lb < la);
        }
    }
}
