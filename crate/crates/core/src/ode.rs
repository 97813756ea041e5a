//! Embedded Dormand–Prince 5(4) integrator with continuous output and
//! terminal event location.
//!
//! The integrator is small and specialised: fixed-size state arrays, an
//! optional terminal event `g(t, y)` that fires when `g` drops from positive
//! to non-positive, and an optional per-step acceptance hook that lets a
//! caller reject steps violating a known first integral.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// continuous extension (Hairer & Wanner, contd5)
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const EVENT_TOL: f64 = 1e-12;

/// Interpolation data of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        y
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    ReachedEnd,
    /// The event function crossed zero at this time.
    Event(f64),
}

/// Output of [`Dopri5::solve_with`]: the accepted step endpoints plus a
/// piecewise continuous interpolant.
#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub termination: Termination,
    steps: Vec<DenseStep<N>>,
    rejected: usize,
}

impl<const N: usize> Solution<N> {
    /// Final time reached (the event location when an event fired).
    pub fn final_time(&self) -> f64 {
        match self.termination {
            Termination::ReachedEnd => *self.times.last().unwrap(),
            Termination::Event(t) => t,
        }
    }

    pub fn final_state(&self) -> [f64; N] {
        match self.termination {
            Termination::ReachedEnd => *self.states.last().unwrap(),
            Termination::Event(t) => self.eval(t),
        }
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Evaluates the continuous output. Times outside the integrated range
    /// are clamped to the first / last step polynomial.
    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.steps.is_empty() {
            return self.states[0];
        }
        let forward = self.steps[0].h > 0.0;
        // first step whose end lies at or beyond t in the direction of travel
        let idx = self.steps.partition_point(|st| {
            if forward {
                st.end() < t
            } else {
                st.end() > t
            }
        });
        self.steps[idx.min(self.steps.len() - 1)].eval(t)
    }
}

/// Adaptive Dormand–Prince 5(4) integrator.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step as a fraction of the integration span.
    pub initial_fraction: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            rtol: 1e-11,
            atol: 1e-11,
            initial_fraction: 1e-4,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Dopri5 {
            rtol,
            atol,
            ..Dopri5::default()
        }
    }

    /// Integrates without events.
    pub fn solve<F, const N: usize>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
    ) -> Result<Solution<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        self.solve_with(rhs, t0, y0, t_end, |_, _| 1.0, |_, _| true)
    }

    /// Integrates `y' = rhs(t, y)` from `t0` towards `t_end` (either
    /// direction). Integration stops early when `event(t, y)` changes from
    /// positive to non-positive; the crossing is located on the continuous
    /// output to `1e-12` in `t`. Steps for which `accept(y_old, y_new)`
    /// returns false are rejected and retried with half the step.
    pub fn solve_with<F, G, A, const N: usize>(
        &self,
        rhs: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        event: G,
        accept: A,
    ) -> Result<Solution<N>>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
        G: Fn(f64, &[f64; N]) -> f64,
        A: Fn(&[f64; N], &[f64; N]) -> bool,
    {
        let span = t_end - t0;
        let mut sol = Solution {
            times: vec![t0],
            states: vec![y0],
            termination: Termination::ReachedEnd,
            steps: Vec::new(),
            rejected: 0,
        };
        if span == 0.0 {
            return Ok(sol);
        }
        let dir = span.signum();
        let h_min = 1e-14 * span.abs().max(t0.abs());

        let mut t = t0;
        let mut y = y0;
        let mut k1 = rhs(t, &y);
        let mut g_prev = event(t, &y);
        let mut h = span * self.initial_fraction;
        let mut last_rejected = false;

        for _ in 0..self.max_steps {
            let remaining = t_end - t;
            let last = h.abs() >= remaining.abs();
            if last {
                h = remaining;
            }

            let (y_new, k7, err_vec, k) = stage(&rhs, t, &y, &k1, h);
            let mut err = 0.0;
            for i in 0..N {
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (err_vec[i] / sc).powi(2);
            }
            err = (err / N as f64).sqrt();

            let finite = y_new.iter().all(|v| v.is_finite()) && err.is_finite();
            if !finite || err > 1.0 || !accept(&y, &y_new) {
                sol.rejected += 1;
                let fac = if finite && err > 1.0 {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    0.5
                };
                h *= fac;
                last_rejected = true;
                if h.abs() < h_min {
                    return Err(Error::StepFailure { at: t, step: h.abs() });
                }
                continue;
            }

            let t_new = if last { t_end } else { t + h };
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k7[i] - bspl;
                rcont[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k7[i]);
            }
            let step = DenseStep { t0: t, h, rcont };

            let g_new = event(t_new, &y_new);
            if g_prev > 0.0 && g_new <= 0.0 {
                let t_ev = locate_event(&step, &event, t, t_new, dir);
                sol.steps.push(step);
                sol.times.push(t_new);
                sol.states.push(y_new);
                sol.termination = Termination::Event(t_ev);
                return Ok(sol);
            }
            g_prev = g_new;

            sol.steps.push(step);
            sol.times.push(t_new);
            sol.states.push(y_new);
            if last {
                return Ok(sol);
            }

            t = t_new;
            y = y_new;
            k1 = k7;

            let mut fac = (SAFETY * err.max(1e-10).powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
            if h.abs() < h_min {
                return Err(Error::StepFailure { at: t, step: h.abs() });
            }
        }
        Err(Error::StepFailure { at: t, step: h.abs() })
    }
}

type StageOut<const N: usize> = ([f64; N], [f64; N], [f64; N], [[f64; N]; 6]);

fn stage<F, const N: usize>(rhs: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> StageOut<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = y[i] + h * A21 * k1[i];
    }
    let k2 = rhs(t + C2 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
    }
    let k3 = rhs(t + C3 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
    }
    let k4 = rhs(t + C4 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
    }
    let k5 = rhs(t + C5 * h, &tmp);
    for i in 0..N {
        tmp[i] = y[i]
            + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
    }
    let k6 = rhs(t + h, &tmp);
    let mut y_new = [0.0; N];
    for i in 0..N {
        y_new[i] = y[i]
            + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
    }
    let k7 = rhs(t + h, &y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h
            * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, k7, err, [*k1, k2, k3, k4, k5, k6])
}

fn locate_event<G, const N: usize>(step: &DenseStep<N>, event: &G, a: f64, b: f64, dir: f64) -> f64
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    // invariant: g(lo) > 0 >= g(hi), lo before hi in the direction of travel
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        if (hi - lo).abs() <= EVENT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if event(mid, &step.eval(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!((hi - lo) * dir >= 0.0);
    hi
}
