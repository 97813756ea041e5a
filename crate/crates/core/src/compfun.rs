//! Comparison functions of the constant-curvature model ODE `φ'' + κφ = 0`
//! and the generalized sine of the one-dimensional p-Laplacian.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Solution, Termination};

/// Relative clearance kept from tangent poles and from zeros of `C_{κ,Λ}`.
pub const EPS_SING: f64 = 1e-9;

/// Sectional-curvature scale κ (units 1/length²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvature(pub f64);

/// Lower bound Λ for the second fundamental form of the boundary (1/length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConvexity(pub f64);

/// `c_κ(t)`: cosine analogue, `cos(√κ t)`, `1` or `cosh(√-κ t)`.
pub fn c_kappa(kappa: f64, t: f64) -> f64 {
    if kappa > 0.0 {
        (kappa.sqrt() * t).cos()
    } else if kappa == 0.0 {
        1.0
    } else {
        ((-kappa).sqrt() * t).cosh()
    }
}

/// `s_κ(t)`: sine analogue with `s(0) = 0`, `s'(0) = 1`.
pub fn s_kappa(kappa: f64, t: f64) -> f64 {
    if kappa > 0.0 {
        let a = kappa.sqrt();
        (a * t).sin() / a
    } else if kappa == 0.0 {
        t
    } else {
        let b = (-kappa).sqrt();
        (b * t).sinh() / b
    }
}

/// First positive zero of `c_κ`, if any.
pub fn c_kappa_first_zero(kappa: f64) -> Option<f64> {
    (kappa > 0.0).then(|| FRAC_PI_2 / kappa.sqrt())
}

/// `T_κ(t) = -c_κ'(t) / c_κ(t)`.
pub fn t_kappa(kappa: f64, t: f64) -> Result<f64> {
    if kappa > 0.0 {
        let a = kappa.sqrt();
        let x = a * t;
        if x.abs() >= FRAC_PI_2 * (1.0 - EPS_SING) {
            return Err(Error::domain(format!(
                "T_kappa(kappa = {kappa}, t = {t}) is at or beyond the tangent pole {}",
                FRAC_PI_2 / a
            )));
        }
        Ok(a * x.tan())
    } else if kappa == 0.0 {
        Ok(0.0)
    } else {
        let b = (-kappa).sqrt();
        Ok(-b * (b * t).tanh())
    }
}

/// `C_{κ,Λ}(t) = c_κ(t) - Λ s_κ(t)`, the solution of `φ'' + κφ = 0`,
/// `φ(0) = 1`, `φ'(0) = -Λ`.
pub fn c_kl(kappa: f64, lambda: f64, t: f64) -> f64 {
    c_kappa(kappa, t) - lambda * s_kappa(kappa, t)
}

/// Derivative of [`c_kl`] in `t`.
pub fn c_kl_prime(kappa: f64, lambda: f64, t: f64) -> f64 {
    -kappa * s_kappa(kappa, t) - lambda * c_kappa(kappa, t)
}

/// First positive zero of `C_{κ,Λ}`, if it has one on `(0, ∞)`.
pub fn c_kl_first_zero(kappa: f64, lambda: f64) -> Option<f64> {
    if kappa > 0.0 {
        let a = kappa.sqrt();
        // cot(a t) = Λ / a
        let x = if lambda > 0.0 {
            (a / lambda).atan()
        } else if lambda == 0.0 {
            FRAC_PI_2
        } else {
            PI + (a / lambda).atan()
        };
        Some(x / a)
    } else if kappa == 0.0 {
        (lambda > 0.0).then(|| 1.0 / lambda)
    } else {
        let b = (-kappa).sqrt();
        // tanh(b t) = b / Λ needs Λ > b
        (lambda > b).then(|| (b / lambda).atanh() / b)
    }
}

/// `T_{κ,Λ}(t) = -C'_{κ,Λ}(t) / C_{κ,Λ}(t)`; requires `C_{κ,Λ} > 0` on
/// the segment between 0 and `t`.
pub fn t_kl(kappa: f64, lambda: f64, t: f64) -> Result<f64> {
    // C_{κ,Λ}(-t) = C_{κ,-Λ}(t), so negative arguments reflect Λ
    let zero = if t >= 0.0 {
        c_kl_first_zero(kappa, lambda)
    } else {
        c_kl_first_zero(kappa, -lambda)
    };
    let c = c_kl(kappa, lambda, t);
    let past_zero = zero.is_some_and(|z| t.abs() >= z * (1.0 - EPS_SING));
    if past_zero || c <= EPS_SING {
        return Err(Error::domain(format!(
            "T_kappa,Lambda(kappa = {kappa}, Lambda = {lambda}, t = {t}): C vanishes (C = {c:e})"
        )));
    }
    Ok(-c_kl_prime(kappa, lambda, t) / c)
}

/// Half-period of the generalized sine, `2π / (p sin(π/p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(2.0 * PI / (p * (PI / p).sin()))
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("exponent p = {p} must satisfy p > 1")))
    }
}

/// `sign(x) |x|^e`.
#[inline]
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if e == 1.0 {
        x
    } else {
        x.signum() * x.abs().powf(e)
    }
}

/// Generalized sine `u = sin_p`, normalized by `|u'|^{p-2} u'' = -|u|^{p-2} u`,
/// `u(0) = 0`, `u'(0) = 1`, so that `|u|^p + |u'|^p = 1` and the first
/// maximum sits at `π_p / 2`.
///
/// The quarter wave is integrated once in flux variables `(u, q = |u'|^{p-2}u')`:
/// forward from `(0, 1)` for the lower half and backward from the crest
/// `(1, 0)` for the upper half, so both ends carry exact initial data.
#[derive(Debug, Clone)]
pub struct SinP {
    p: f64,
    half_period: f64,
    rising: Solution<2>,
    falling: Solution<2>,
}

/// Largest change of `|u|^p + |q|^{p/(p-1)}` tolerated within one step.
const PYTHAGOREAN_STEP_DRIFT: f64 = 1e-10;

impl SinP {
    pub fn new(p: f64) -> Result<Self> {
        let half_period = pi_p(p)?;
        let quarter = 0.5 * half_period;
        let mid = 0.5 * quarter;
        let rhs = flux_rhs(p);
        let accept = pythagorean_guard(p);
        let solver = Dopri5::default();
        let rising = solver.solve_with(rhs, 0.0, [0.0, 1.0], mid, |_, _| 1.0, &accept)?;
        let falling = solver.solve_with(rhs, quarter, [1.0, 0.0], mid, |_, _| 1.0, &accept)?;
        Ok(SinP {
            p,
            half_period,
            rising,
            falling,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `π_p`.
    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    /// `(sin_p(t), sin_p'(t))` for any real `t`, extended from the quarter
    /// wave by oddness, reflection about `π_p/2` and antiperiodicity.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let period = 2.0 * self.half_period;
        let mut x = t.rem_euclid(period);
        let mut sign = 1.0;
        if x > self.half_period {
            x -= self.half_period;
            sign = -1.0;
        }
        let quarter = 0.5 * self.half_period;
        let (u, q) = if x <= quarter {
            self.quarter_wave(x)
        } else {
            let (u, q) = self.quarter_wave(self.half_period - x);
            (u, -q)
        };
        (sign * u, sign * signed_pow(q, 1.0 / (self.p - 1.0)))
    }

    /// Flux-variable state `(u, q)` on `[0, π_p/2]`.
    fn quarter_wave(&self, x: f64) -> (f64, f64) {
        let mid = 0.25 * self.half_period;
        let y = if x <= mid {
            self.rising.eval(x)
        } else {
            self.falling.eval(x)
        };
        (y[0], y[1])
    }

    /// Largest deviation of `|u|^p + |u'|^p` from 1 over all accepted steps.
    pub fn pythagorean_drift(&self) -> f64 {
        let p = self.p;
        self.rising
            .states
            .iter()
            .chain(self.falling.states.iter())
            .map(|y| (pythagorean(p, y) - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn pythagorean(p: f64, y: &[f64; 2]) -> f64 {
    y[0].abs().powf(p) + y[1].abs().powf(p / (p - 1.0))
}

fn flux_rhs(p: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + Copy {
    let inv = 1.0 / (p - 1.0);
    move |_, y| [signed_pow(y[1], inv), -(p - 1.0) * signed_pow(y[0], p - 1.0)]
}

fn pythagorean_guard(p: f64) -> impl Fn(&[f64; 2], &[f64; 2]) -> bool {
    move |a, b| (pythagorean(p, a) - pythagorean(p, b)).abs() <= PYTHAGOREAN_STEP_DRIFT
}

/// `(sin_p(t), sin_p'(t))`. Builds a fresh [`SinP`]; reuse one instance for
/// repeated evaluation.
pub fn sin_p(p: f64, t: f64) -> Result<(f64, f64)> {
    Ok(SinP::new(p)?.eval(t))
}

/// Integrates the generalized sine forward from `t = 0` until its derivative
/// first vanishes and returns that location (which should be `π_p / 2`),
/// together with the largest Pythagorean drift seen along the way.
pub fn sin_p_first_critical_point(p: f64) -> Result<(f64, f64)> {
    let horizon = pi_p(p)?;
    let sol = Dopri5::default().solve_with(
        flux_rhs(p),
        0.0,
        [0.0, 1.0],
        horizon,
        |_, y| y[1],
        pythagorean_guard(p),
    )?;
    let drift = sol
        .states
        .iter()
        .map(|y| (pythagorean(p, y) - 1.0).abs())
        .fold(0.0, f64::max);
    match sol.termination {
        Termination::Event(t) => Ok((t, drift)),
        Termination::ReachedEnd => Err(Error::domain(format!(
            "sin_p derivative did not vanish on [0, {horizon}] for p = {p}"
        ))),
    }
}
