//! Shooting in flux variables.
//!
//! With `q = |φ'|^{p-2} φ'` the model equation
//! `(p-1)|φ'|^{p-2}φ'' - drift·|φ'|^{p-2}φ' = -μ|φ|^{p-2}φ` becomes the
//! first-order system
//!
//! ```text
//! φ' = sign(q) |q|^{1/(p-1)}
//! q' = drift(s) q - μ |φ|^{p-2} φ
//! ```
//!
//! which stays regular where `φ' = 0`. Starting from `(φ, q)(0) = (0, 1)`,
//! the first eigenvalue is the `μ` whose first flux zero lands exactly on the
//! right end of the interval.

use crate::compfun::signed_pow;
use crate::error::{Error, Result};
use crate::model::{BoundaryKind, ModelProblem};
use crate::ode::{Dopri5, Solution, Termination};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
const MIN_REL_TOL: f64 = 1e-12;
/// Bracketing gives up after this many doublings / halvings of the guess.
const MAX_BRACKET_DOUBLINGS: i32 = 60;
/// Matching point of two-piece certificates, as a fraction of the length.
/// Kept off the midpoint so it is not a Chebyshev node of odd order.
const MATCH_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub s: f64,
    pub phi: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TerminalEvent {
    ReachedEnd,
    FluxZero(f64),
}

#[derive(Debug, Clone)]
struct Piece {
    lo: f64,
    hi: f64,
    sol: Solution<2>,
    /// Multipliers applied to `(φ, q)`; the equation is invariant under
    /// `(φ, q) -> (c φ, c^{p-1} q)` for `c > 0`.
    scale: (f64, f64),
}

impl Piece {
    fn new(lo: f64, hi: f64, sol: Solution<2>) -> Self {
        Piece {
            lo,
            hi,
            sol,
            scale: (1.0, 1.0),
        }
    }

    fn eval(&self, s: f64) -> (f64, f64) {
        let y = self.sol.eval(s);
        (self.scale.0 * y[0], self.scale.1 * y[1])
    }
}

/// IVP solution for a fixed trial eigenvalue: samples at the accepted steps
/// plus continuous output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminal_event: TerminalEvent,
    pieces: Vec<Piece>,
}

impl Trajectory {
    fn from_pieces(pieces: Vec<Piece>, terminal_event: TerminalEvent) -> Self {
        let mut samples: Vec<Sample> = pieces
            .iter()
            .flat_map(|pc| {
                pc.sol.times.iter().zip(&pc.sol.states).filter_map(move |(&s, y)| {
                    (s >= pc.lo && s <= pc.hi).then_some(Sample {
                        s,
                        phi: pc.scale.0 * y[0],
                        q: pc.scale.1 * y[1],
                    })
                })
            })
            .collect();
        if let TerminalEvent::FluxZero(s) = terminal_event {
            let (phi, q) = pieces.last().unwrap().eval(s);
            samples.retain(|x| x.s < s);
            samples.push(Sample { s, phi, q });
        }
        samples.sort_by(|a, b| a.s.total_cmp(&b.s));
        samples.dedup_by(|a, b| a.s == b.s);
        Trajectory {
            samples,
            terminal_event,
            pieces,
        }
    }

    /// Interval covered by the trajectory.
    pub fn range(&self) -> (f64, f64) {
        let lo = self.pieces.iter().map(|p| p.lo).fold(f64::INFINITY, f64::min);
        let mut hi = self.pieces.iter().map(|p| p.hi).fold(f64::NEG_INFINITY, f64::max);
        if let TerminalEvent::FluxZero(s) = self.terminal_event {
            hi = hi.min(s);
        }
        (lo, hi)
    }

    /// `(φ(s), q(s))` from the continuous output.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let piece = self
            .pieces
            .iter()
            .find(|p| s >= p.lo && s <= p.hi)
            .unwrap_or_else(|| {
                if s < self.pieces[0].lo {
                    &self.pieces[0]
                } else {
                    self.pieces.last().unwrap()
                }
            });
        piece.eval(s)
    }

    /// `(s, φ(s))` at `n` uniform points across [`Self::range`].
    pub fn table(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.range();
        (0..n)
            .map(|i| {
                let s = if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                };
                (s, self.eval(s).0)
            })
            .collect()
    }
}

fn flux_system(problem: &ModelProblem, mu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    let p = problem.p;
    let inv = 1.0 / (p - 1.0);
    move |s, y| {
        [
            signed_pow(y[1], inv),
            problem.drift_unchecked(s) * y[1] - mu * signed_pow(y[0], p - 1.0),
        ]
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("trial eigenvalue mu = {mu} must be positive")))
    }
}

/// Integrates from `(φ, q)(0) = (0, 1)` until the right end or the first
/// zero of the flux, whichever comes first.
pub fn integrate(problem: &ModelProblem, mu: f64) -> Result<Trajectory> {
    problem.validate()?;
    check_mu(mu)?;
    let end = problem.integration_end();
    let sol = Dopri5::default().solve_with(
        flux_system(problem, mu),
        0.0,
        [0.0, 1.0],
        end,
        |_, y| y[1],
        |_, _| true,
    )?;
    let event = match sol.termination {
        Termination::ReachedEnd => TerminalEvent::ReachedEnd,
        Termination::Event(s) => TerminalEvent::FluxZero(s),
    };
    Ok(Trajectory::from_pieces(vec![Piece::new(0.0, end, sol)], event))
}

/// Location of the first flux zero, or `None` if `q > 0` up to the end.
pub fn first_flux_zero(problem: &ModelProblem, mu: f64) -> Result<Option<f64>> {
    Ok(match integrate(problem, mu)?.terminal_event {
        TerminalEvent::ReachedEnd => None,
        TerminalEvent::FluxZero(s) => Some(s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Final eigenvalue bracket `[lo, hi]`.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|q(end)|` of the certificate trajectory (half-interval solves), the
    /// flux mismatch at the matching point (singular right end), or the
    /// absolute matching mismatch at `s = 0` (two-sided solves).
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub eigenvalue: f64,
    pub certificate: Trajectory,
    pub diagnostics: Diagnostics,
}

impl EigenResult {
    pub fn samples(&self) -> &[Sample] {
        &self.certificate.samples
    }

    /// Largest normalized residual of the divergence form
    /// `(w q)' + μ w |φ|^{p-2} φ` at `points` Chebyshev–Gauss nodes of
    /// `(0, end)`, with `(w q)'` from centred differences of the continuous
    /// output. Normalized by `μ max|φ|^{p-1}`.
    pub fn divergence_residual(&self, problem: &ModelProblem, points: usize) -> Result<f64> {
        let end = problem.end();
        let p = problem.p;
        let mu = self.eigenvalue;
        let phi_max = self
            .certificate
            .samples
            .iter()
            .map(|x| x.phi.abs())
            .fold(0.0, f64::max);
        let h = 1e-5 * end;
        let flux = |s: f64| -> Result<f64> { Ok(problem.weight(s)? * self.certificate.eval(s).1) };
        let mut worst = 0.0f64;
        for k in 0..points {
            let x = (std::f64::consts::PI * (k as f64 + 0.5) / points as f64).cos();
            let s = 0.5 * end * (1.0 - x);
            let dflux = (flux(s + h)? - flux(s - h)?) / (2.0 * h);
            let phi = self.certificate.eval(s).0;
            let r = dflux + mu * problem.weight(s)? * signed_pow(phi, p - 1.0);
            worst = worst.max(r.abs());
        }
        Ok(worst / (mu * phi_max.powf(p - 1.0)))
    }
}

/// First eigenvalue of the half-interval problem by bracketing and
/// bisection on whether the flux zero arrives before the end.
pub fn solve(problem: &ModelProblem, rel_tol: f64) -> Result<EigenResult> {
    problem.validate()?;
    check_rel_tol(rel_tol)?;
    let end = problem.integration_end();
    let crosses = |mu: f64| -> Result<bool> {
        Ok(first_flux_zero(problem, mu)?.is_some_and(|s| s <= end))
    };
    let mu0 = problem.zero_drift_eigenvalue();
    let (mut lo, mut hi) = bracket(mu0, |mu| crosses(mu).map(|c| !c))?;
    let mut iterations = 0;
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if crosses(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let eigenvalue = 0.5 * (lo + hi);
    let (certificate, residual) = if problem.singular_end() {
        matched_certificate(problem, eigenvalue)?
    } else {
        // the lower end never fires the event, so its trajectory spans [0, end]
        let tr = integrate(problem, lo)?;
        let residual = tr.eval(end).1.abs();
        (tr, residual)
    };
    Ok(EigenResult {
        eigenvalue,
        certificate,
        diagnostics: Diagnostics {
            bracket: (lo, hi),
            iterations,
            residual,
        },
    })
}

/// State `(φ, q)` at `integration_end` for the solution that is regular at
/// the right end, with `φ = phi_end` there. At a regular end this is just
/// `(phi_end, 0)`; at a singular end the drift behaves like `a/x` with
/// `x = end - s` and the regular branch has `q ≈ μ |φ|^{p-2} φ x / (a + 1)`.
fn right_end_state(problem: &ModelProblem, mu: f64, phi_end: f64) -> [f64; 2] {
    if problem.singular_end() {
        let x = problem.end() - problem.integration_end();
        let a = problem.singular_end_multiplicity();
        [phi_end, mu * signed_pow(phi_end, problem.p - 1.0) * x / (a + 1.0)]
    } else {
        [phi_end, 0.0]
    }
}

/// Certificate for a singular right end. Integrating forward into the
/// singular point amplifies the singular branch, so the eigenfunction is
/// assembled from a forward piece on `[0, s_m]` and a backward piece
/// started on the regular branch, rescaled to agree in `φ` at `s_m`.
/// Returns the trajectory and the flux mismatch at the matching point.
fn matched_certificate(problem: &ModelProblem, mu: f64) -> Result<(Trajectory, f64)> {
    let end = problem.integration_end();
    let mid = MATCH_FRACTION * problem.end();
    let solver = Dopri5::default();
    let fwd = solver.solve(flux_system(problem, mu), 0.0, [0.0, 1.0], mid)?;
    let bwd = solver.solve(flux_system(problem, mu), end, right_end_state(problem, mu, 1.0), mid)?;
    let f = fwd.final_state();
    let b = bwd.final_state();
    let c = f[0] / b[0];
    let scale = (c, signed_pow(c, problem.p - 1.0));
    let mismatch = (f[1] - scale.1 * b[1]).abs();
    let mut back = Piece::new(mid, end, bwd);
    back.scale = scale;
    let tr = Trajectory::from_pieces(vec![Piece::new(0.0, mid, fwd), back], TerminalEvent::ReachedEnd);
    Ok((tr, mismatch))
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if (MIN_REL_TOL..1.0).contains(&rel_tol) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "rel_tol = {rel_tol} must lie in [{MIN_REL_TOL}, 1)"
        )))
    }
}

/// Finds `lo < hi` with `below(lo)` true and `below(hi)` false, starting at
/// `guess` and doubling or halving.
fn bracket<F>(guess: f64, below: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<bool>,
{
    let limit = 2f64.powi(MAX_BRACKET_DOUBLINGS);
    if below(guess)? {
        let mut lo = guess;
        let mut hi = 2.0 * guess;
        while below(hi)? {
            lo = hi;
            hi *= 2.0;
            if hi > limit * guess {
                return Err(Error::BracketFailure { last_mu: hi });
            }
        }
        Ok((lo, hi))
    } else {
        let mut hi = guess;
        let mut lo = 0.5 * guess;
        while !below(lo)? {
            hi = lo;
            lo *= 0.5;
            if lo < guess / limit {
                return Err(Error::BracketFailure { last_mu: lo });
            }
        }
        Ok((lo, hi))
    }
}

struct TwoSided {
    left: Solution<2>,
    right: Solution<2>,
    mismatch: f64,
}

fn shoot_two_sided(problem: &ModelProblem, mu: f64) -> Result<TwoSided> {
    let end = problem.integration_end();
    let solver = Dopri5::default();
    let right_start = right_end_state(problem, mu, 1.0);
    let left_start = [-right_start[0], right_start[1]];
    let left = solver.solve(flux_system(problem, mu), -end, left_start, 0.0)?;
    let right = solver.solve(flux_system(problem, mu), end, right_start, 0.0)?;
    let l = left.final_state();
    let r = right.final_state();
    Ok(TwoSided {
        mismatch: l[1] * r[0] - r[1] * l[0],
        left,
        right,
    })
}

/// Neumann eigenvalue on the full interval `[-D/2, D/2]` without the
/// odd-symmetry reduction: shoot from both ends with `(∓1, 0)` and match
/// `q_l φ_r - q_r φ_l = 0` at `s = 0`; the smallest positive root is taken.
pub fn solve_neumann_full(problem: &ModelProblem, rel_tol: f64) -> Result<EigenResult> {
    if problem.kind != BoundaryKind::NeumannPair {
        return Err(Error::domain("two-sided shooting needs a Neumann-pair problem"));
    }
    problem.validate()?;
    check_rel_tol(rel_tol)?;
    let mu0 = problem.zero_drift_eigenvalue();
    let positive = |mu: f64| -> Result<bool> { Ok(shoot_two_sided(problem, mu)?.mismatch > 0.0) };

    // the mismatch is positive on (0, μ₁); start well inside that range
    let floor = mu0 / 2f64.powi(MAX_BRACKET_DOUBLINGS);
    let mut lo = mu0 / 16.0;
    while !positive(lo)? {
        lo *= 0.5;
        if lo < floor {
            return Err(Error::BracketFailure { last_mu: lo });
        }
    }
    let ceiling = mu0 * 2f64.powi(MAX_BRACKET_DOUBLINGS);
    let mut hi = lo * 1.25;
    while positive(hi)? {
        lo = hi;
        hi *= 1.25;
        if hi > ceiling {
            return Err(Error::BracketFailure { last_mu: hi });
        }
    }
    let mut iterations = 0;
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let eigenvalue = 0.5 * (lo + hi);
    let shot = shoot_two_sided(problem, eigenvalue)?;
    let end = problem.integration_end();
    let certificate = Trajectory::from_pieces(
        vec![Piece::new(-end, 0.0, shot.left), Piece::new(0.0, end, shot.right)],
        TerminalEvent::ReachedEnd,
    );
    Ok(EigenResult {
        eigenvalue,
        certificate,
        diagnostics: Diagnostics {
            bracket: (lo, hi),
            iterations,
            residual: shot.mismatch.abs(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compfun::{pi_p, SinP};
    use crate::model::{quaternionic_profile, riemannian_profile, GeometryProfile};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn flat_neumann(p: f64, diameter: f64) -> ModelProblem {
        ModelProblem::neumann(quaternionic_profile(2, 0.0).unwrap(), p, diameter).unwrap()
    }

    #[test]
    fn harmonic_oscillator_trajectory() {
        let prob = flat_neumann(2.0, 4.0);
        let tr = integrate(&prob, 1.0).unwrap();
        match tr.terminal_event {
            TerminalEvent::FluxZero(s) => assert!((s - FRAC_PI_2).abs() < 1e-10),
            e => panic!("{e:?}"),
        }
        assert_eq!(tr.samples[0], Sample { s: 0.0, phi: 0.0, q: 1.0 });
        for w in tr.samples.windows(2) {
            assert!(w[1].s > w[0].s);
        }
        for x in &tr.samples {
            assert!((x.phi - x.s.sin()).abs() < 1e-9);
            assert!((x.q - x.s.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_solves_classical_model_at_mu_equal_m() {
        for m in [2u32, 3, 5] {
            let prob = ModelProblem::neumann(riemannian_profile(m, 1.0).unwrap(), 2.0, PI).unwrap();
            let tr = integrate(&prob, m as f64).unwrap();
            // forward integration into the pole amplifies the singular branch
            // like (π/2 - s)^{2-m}; compare away from it
            for x in tr.samples.iter().filter(|x| x.s <= 1.4) {
                assert!((x.phi - x.s.sin()).abs() < 1e-6, "m={m} s={}", x.s);
                assert!((x.q - x.s.cos()).abs() < 1e-6, "m={m} s={}", x.s);
            }
        }
    }

    #[test]
    fn first_flux_zero_examples() {
        let prob = flat_neumann(2.0, 4.0);
        assert!((first_flux_zero(&prob, 1.0).unwrap().unwrap() - FRAC_PI_2).abs() < 1e-10);
        assert!((first_flux_zero(&prob, 4.0).unwrap().unwrap() - FRAC_PI_4).abs() < 1e-10);
        for p in [1.5, 2.0, 3.0] {
            let prof = quaternionic_profile(3, -1.0).unwrap().with_boundary(0.5).unwrap();
            let dir = ModelProblem::dirichlet(prof, p, 1.0).unwrap();
            assert_eq!(first_flux_zero(&dir, 1e-8).unwrap(), None);
            let tr = integrate(&dir, 1e-8).unwrap();
            assert!(tr.samples.iter().all(|x| x.q > 0.0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let prob = flat_neumann(2.0, 2.0);
        assert!(integrate(&prob, 0.0).is_err());
        assert!(integrate(&prob, -1.0).is_err());
        assert!(solve(&prob, 1e-13).is_err());
        let bad = ModelProblem::neumann(quaternionic_profile(2, 1.0).unwrap(), 2.0, PI).unwrap();
        assert!(matches!(solve(&bad, 1e-9), Err(Error::Validation { .. })));
        let dir = ModelProblem::dirichlet(quaternionic_profile(2, 0.0).unwrap(), 2.0, 1.0).unwrap();
        assert!(solve_neumann_full(&dir, 1e-9).is_err());
    }

    #[test]
    fn flat_neumann_closed_form() {
        let r = solve(&flat_neumann(2.0, 2.0), DEFAULT_REL_TOL).unwrap();
        assert!((r.eigenvalue - PI * PI / 4.0).abs() < 1e-8 * r.eigenvalue);
        let (lo, hi) = r.diagnostics.bracket;
        assert!(lo <= r.eigenvalue && r.eigenvalue <= hi);
        assert!(r.diagnostics.iterations > 0);
    }

    #[test]
    fn classical_eigenvalue_is_dimension() {
        for m in [2u32, 3, 5] {
            let prob = ModelProblem::neumann(riemannian_profile(m, 1.0).unwrap(), 2.0, PI).unwrap();
            let r = solve(&prob, DEFAULT_REL_TOL).unwrap();
            assert!((r.eigenvalue - m as f64).abs() <= 1e-6 * m as f64, "m={m}: {}", r.eigenvalue);
            let err = r
                .samples()
                .iter()
                .map(|x| (x.phi - x.s.sin()).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-5, "m={m}: certificate error {err}");
            let (_, hi) = r.certificate.range();
            assert!((hi - PI / 2.0).abs() < 1e-6);
            let res = r.divergence_residual(&prob, 33).unwrap();
            assert!(res <= 1e-6, "m={m}: residual {res}, mismatch {}", r.diagnostics.residual);
        }
    }

    #[test]
    fn dirichlet_flat_p3_quarter_wave() {
        let prob = ModelProblem::dirichlet(quaternionic_profile(2, 0.0).unwrap(), 3.0, 1.0).unwrap();
        let r = solve(&prob, DEFAULT_REL_TOL).unwrap();
        let exact = 2.0 * (pi_p(3.0).unwrap() / 2.0).powi(3);
        assert!((exact - 3.5361).abs() < 1e-4);
        assert!((r.eigenvalue - exact).abs() <= 1e-7 * exact);
        // certificate is a rescaled sin_p quarter wave: φ(s) = sin_p(b s)/b
        let sp = SinP::new(3.0).unwrap();
        let b = sp.half_period() / 2.0;
        for x in r.samples() {
            let expected = sp.eval(b * x.s).0 / b;
            assert!((x.phi - expected).abs() < 1e-6, "s={}", x.s);
        }
    }

    #[test]
    fn scaling_law_for_flat_problems() {
        for p in [1.5, 2.0, 3.0] {
            let base = solve(&flat_neumann(p, 1.0), 1e-11).unwrap().eigenvalue;
            for l in [0.5, 2.0, 7.0] {
                let scaled = solve(&flat_neumann(p, l), 1e-11).unwrap().eigenvalue * l.powf(p);
                assert!((scaled - base).abs() <= 1e-8 * base, "p={p} L={l}");
            }
        }
    }

    #[test]
    fn certificate_residual_and_positivity() {
        let cases = [
            ModelProblem::neumann(quaternionic_profile(2, -1.0).unwrap(), 1.5, 1.0).unwrap(),
            ModelProblem::neumann(quaternionic_profile(3, 0.2).unwrap(), 3.0, 1.0).unwrap(),
            ModelProblem::dirichlet(
                quaternionic_profile(2, 0.2).unwrap().with_boundary(0.5).unwrap(),
                2.0,
                0.8,
            )
            .unwrap(),
        ];
        for prob in &cases {
            let r = solve(prob, DEFAULT_REL_TOL).unwrap();
            let res = r.divergence_residual(prob, 33).unwrap();
            assert!(res <= 1e-6, "{prob:?}: residual {res}");
            assert!(r.samples().iter().skip(1).all(|x| x.phi > 0.0));
            assert!(r.diagnostics.residual < 1e-6);
        }
    }

    #[test]
    fn shooting_monotonicity() {
        let prob = ModelProblem::neumann(quaternionic_profile(2, 0.2).unwrap(), 1.5, 1.0).unwrap();
        let mu1 = solve(&prob, 1e-9).unwrap().eigenvalue;
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let mu = mu1 * 1.05 * 4f64.powf(i as f64 / 49.0);
            let s = first_flux_zero(&prob, mu).unwrap().expect("event above mu1");
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn full_interval_examples() {
        let r = solve_neumann_full(&flat_neumann(2.0, PI), 1e-10).unwrap();
        assert!((r.eigenvalue - 1.0).abs() < 1e-8);
        let p = 1.5;
        let r = solve_neumann_full(&flat_neumann(p, pi_p(p).unwrap()), 1e-10).unwrap();
        assert!((r.eigenvalue - 0.5).abs() < 1e-8, "{}", r.eigenvalue);
        let (lo, hi) = r.certificate.range();
        assert!((lo + 0.5 * pi_p(p).unwrap()).abs() < 1e-12 && hi > 0.0);
    }

    #[test]
    fn full_interval_matches_reduction() {
        for kappa in [-1.0, 0.0, 0.2] {
            for p in [1.5, 2.0] {
                let prob =
                    ModelProblem::neumann(quaternionic_profile(2, kappa).unwrap(), p, 1.0).unwrap();
                let half = solve(&prob, 1e-10).unwrap().eigenvalue;
                let full = solve_neumann_full(&prob, 1e-10).unwrap().eigenvalue;
                assert!((half - full).abs() <= 1e-8 * half, "k={kappa} p={p}: {half} {full}");
            }
        }
    }

    #[test]
    fn custom_profile_matches_named_constructor() {
        let named = ModelProblem::neumann(quaternionic_profile(2, -1.0).unwrap(), 2.0, 1.0).unwrap();
        let custom = ModelProblem::neumann(
            GeometryProfile::custom(&[(4.0, -1.0), (3.0, -4.0)]).unwrap(),
            2.0,
            1.0,
        )
        .unwrap();
        let a = solve(&named, 1e-10).unwrap().eigenvalue;
        let b = solve(&custom, 1e-10).unwrap().eigenvalue;
        assert_eq!(a, b);
    }
}
