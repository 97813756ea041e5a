//! Geometry profiles and the one-dimensional model problems built from them.
//!
//! A profile is a list of `(multiplicity a_i, curvature κ_i)` pairs. For a
//! Neumann-pair problem the drift is `Σ a_i T_{κ_i}(s)` and the weight is
//! `Π c_{κ_i}(s)^{a_i}`; for a Dirichlet–Neumann problem the comparison
//! functions carry the boundary parameter Λ, i.e. `T_{κ_i,Λ}` and
//! `C_{κ_i,Λ}`. Either way `w'/w = -drift`, which is what lets the drift form
//! of the ODE be rewritten as `(w q)' = -μ w |φ|^{p-2} φ`.

use crate::compfun::{
    self, c_kappa, c_kappa_first_zero, c_kl, c_kl_first_zero, t_kappa, t_kl, EPS_SING,
};
use crate::error::{Error, Result};

/// Relative distance kept from a singular right end during integration.
pub const SINGULAR_END_CLEARANCE: f64 = 1e-7;

/// One `(multiplicity, curvature)` pair of a profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub multiplicity: f64,
    pub curvature: f64,
    /// Symbolic name of the curvature used in messages (`κ`, `4κ`, ...).
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryProfile {
    terms: Vec<Term>,
    boundary: Option<f64>,
}

impl GeometryProfile {
    /// Profile from raw `(multiplicity, curvature)` pairs.
    pub fn custom(terms: &[(f64, f64)]) -> Result<Self> {
        let labelled = terms
            .iter()
            .map(|&(a, k)| (a, k, format!("κ={k}")))
            .collect();
        Self::from_labelled(labelled)
    }

    fn from_labelled(terms: Vec<(f64, f64, String)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::domain("a geometry profile needs at least one term"));
        }
        let mut out = Vec::with_capacity(terms.len());
        for (multiplicity, curvature, label) in terms {
            if !(multiplicity.is_finite() && multiplicity > 0.0) {
                return Err(Error::domain(format!(
                    "multiplicity {multiplicity} must be positive"
                )));
            }
            if !curvature.is_finite() {
                return Err(Error::domain(format!("curvature {curvature} must be finite")));
            }
            out.push(Term {
                multiplicity,
                curvature,
                label,
            });
        }
        Ok(GeometryProfile {
            terms: out,
            boundary: None,
        })
    }

    /// Attaches the boundary convexity Λ used by Dirichlet–Neumann problems.
    pub fn with_boundary(mut self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::domain(format!("boundary parameter {lambda} must be finite")));
        }
        self.boundary = Some(lambda);
        Ok(self)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn boundary(&self) -> Option<f64> {
        self.boundary
    }

    pub fn total_multiplicity(&self) -> f64 {
        self.terms.iter().map(|t| t.multiplicity).sum()
    }

    /// `(multiplicity, curvature)` pairs without labels.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.terms.iter().map(|t| (t.multiplicity, t.curvature)).collect()
    }
}

/// Drift `4(m-1) T_κ + 3 T_{4κ}` of the quaternionic Kähler comparison.
pub fn quaternionic_profile(m: u32, kappa: f64) -> Result<GeometryProfile> {
    if m < 2 {
        return Err(Error::domain(format!("quaternionic dimension m = {m} must be >= 2")));
    }
    GeometryProfile::from_labelled(vec![
        (4.0 * (m as f64 - 1.0), kappa, "κ".to_string()),
        (3.0, 4.0 * kappa, "4κ".to_string()),
    ])
}

/// Drift `(n-1) T_κ` of the classical Ricci comparison.
pub fn riemannian_profile(n: u32, kappa: f64) -> Result<GeometryProfile> {
    if n < 2 {
        return Err(Error::domain(format!("dimension n = {n} must be >= 2")));
    }
    GeometryProfile::from_labelled(vec![(n as f64 - 1.0, kappa, "κ".to_string())])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// First nonzero Neumann eigenvalue on `[-D/2, D/2]`, solved on the
    /// half interval `[0, D/2]` with `φ(0) = 0`, `φ'(D/2) = 0`.
    NeumannPair,
    /// First eigenvalue on `[0, R]` with `φ(0) = 0`, `φ'(R) = 0`.
    DirichletNeumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelProblem {
    pub profile: GeometryProfile,
    pub p: f64,
    /// `D/2` for Neumann-pair problems, `R` for Dirichlet–Neumann problems.
    pub half_length: f64,
    pub kind: BoundaryKind,
}

impl ModelProblem {
    pub fn new(profile: GeometryProfile, p: f64, half_length: f64, kind: BoundaryKind) -> Result<Self> {
        compfun::check_exponent(p)?;
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::domain(format!("length {half_length} must be positive")));
        }
        Ok(ModelProblem {
            profile,
            p,
            half_length,
            kind,
        })
    }

    /// Neumann problem on `[-D/2, D/2]`.
    pub fn neumann(profile: GeometryProfile, p: f64, diameter: f64) -> Result<Self> {
        Self::new(profile, p, 0.5 * diameter, BoundaryKind::NeumannPair)
    }

    /// Dirichlet–Neumann problem on `[0, R]`.
    pub fn dirichlet(profile: GeometryProfile, p: f64, inradius: f64) -> Result<Self> {
        Self::new(profile, p, inradius, BoundaryKind::DirichletNeumann)
    }

    /// Right end of the working interval `[0, end]`.
    pub fn end(&self) -> f64 {
        self.half_length
    }

    /// Same problem on a different working length.
    pub fn with_half_length(&self, half_length: f64) -> Result<Self> {
        Self::new(self.profile.clone(), self.p, half_length, self.kind)
    }

    /// Boundary parameter Λ (zero when the profile carries none).
    pub fn lambda(&self) -> f64 {
        self.profile.boundary.unwrap_or(0.0)
    }

    /// True when every comparison function is identically 1, so the problem
    /// reduces to the plain one-dimensional p-Laplacian.
    pub fn is_drift_free(&self) -> bool {
        let flat = self.profile.terms.iter().all(|t| t.curvature == 0.0);
        match self.kind {
            BoundaryKind::NeumannPair => flat,
            BoundaryKind::DirichletNeumann => flat && self.lambda() == 0.0,
        }
    }

    /// `(p-1) (π_p / (2 end))^p`: the exact eigenvalue without drift.
    pub fn zero_drift_eigenvalue(&self) -> f64 {
        let pi_p = compfun::pi_p(self.p).expect("p validated on construction");
        (self.p - 1.0) * (pi_p / (2.0 * self.half_length)).powf(self.p)
    }

    /// Closed-form eigenvalue when [`Self::is_drift_free`] holds.
    pub fn closed_form(&self) -> Option<f64> {
        self.is_drift_free().then(|| self.zero_drift_eigenvalue())
    }

    fn check_in_interval(&self, s: f64) -> Result<()> {
        let slack = 1e-12 * self.half_length;
        let lo = match self.kind {
            BoundaryKind::NeumannPair => -self.half_length,
            BoundaryKind::DirichletNeumann => 0.0,
        };
        if s.is_nan() || s < lo - slack || s > self.half_length + slack {
            return Err(Error::domain(format!(
                "s = {s} outside the working interval [{lo}, {}]",
                self.half_length
            )));
        }
        Ok(())
    }

    /// Drift coefficient at `s`.
    pub fn drift(&self, s: f64) -> Result<f64> {
        self.check_in_interval(s)?;
        let lambda = self.lambda();
        let mut acc = 0.0;
        for t in &self.profile.terms {
            let v = match self.kind {
                BoundaryKind::NeumannPair => t_kappa(t.curvature, s)?,
                BoundaryKind::DirichletNeumann => t_kl(t.curvature, lambda, s)?,
            };
            acc += t.multiplicity * v;
        }
        Ok(acc)
    }

    /// Weight `w(s)` of the divergence form; `w(0) = 1`.
    pub fn weight(&self, s: f64) -> Result<f64> {
        self.check_in_interval(s)?;
        let mut acc = 1.0;
        for t in &self.profile.terms {
            let f = self.factor(t.curvature, s);
            if f <= 0.0 {
                return Err(Error::domain(format!(
                    "weight factor {} is {f:e} at s = {s}",
                    self.factor_name(t)
                )));
            }
            acc *= f.powf(t.multiplicity);
        }
        Ok(acc)
    }

    /// Drift without range checks, for validated problems inside solver loops.
    pub(crate) fn drift_unchecked(&self, s: f64) -> f64 {
        let lambda = self.lambda();
        self.profile
            .terms
            .iter()
            .map(|t| {
                let v = match self.kind {
                    BoundaryKind::NeumannPair => {
                        if t.curvature > 0.0 {
                            let a = t.curvature.sqrt();
                            a * (a * s).tan()
                        } else if t.curvature == 0.0 {
                            0.0
                        } else {
                            let b = (-t.curvature).sqrt();
                            -b * (b * s).tanh()
                        }
                    }
                    BoundaryKind::DirichletNeumann => {
                        -compfun::c_kl_prime(t.curvature, lambda, s) / c_kl(t.curvature, lambda, s)
                    }
                };
                t.multiplicity * v
            })
            .sum()
    }

    fn factor(&self, curvature: f64, s: f64) -> f64 {
        match self.kind {
            BoundaryKind::NeumannPair => c_kappa(curvature, s),
            BoundaryKind::DirichletNeumann => c_kl(curvature, self.lambda(), s),
        }
    }

    /// Printable name of the comparison factor of `term`, e.g. `c_{4κ}` or `C_{κ,Λ}`.
    pub fn factor_name(&self, term: &Term) -> String {
        match self.kind {
            BoundaryKind::NeumannPair => format!("c_{{{}}}", term.label),
            BoundaryKind::DirichletNeumann => format!("C_{{{},Λ}}", term.label),
        }
    }

    fn first_zero(&self, curvature: f64) -> Option<f64> {
        match self.kind {
            BoundaryKind::NeumannPair => c_kappa_first_zero(curvature),
            BoundaryKind::DirichletNeumann => c_kl_first_zero(curvature, self.lambda()),
        }
    }

    /// Smallest value of one comparison factor on `[0, end]`, assuming it has
    /// no zero there. Positive factors are concave for κ > 0 and linear for
    /// κ = 0, so only κ < 0 can have an interior minimum.
    fn factor_min(&self, curvature: f64) -> f64 {
        let end = self.half_length;
        let mut m = self.factor(curvature, end).min(1.0);
        if self.kind == BoundaryKind::DirichletNeumann && curvature < 0.0 {
            let b = (-curvature).sqrt();
            let lambda = self.lambda();
            if lambda > 0.0 && lambda < b {
                let t_star = (lambda / b).atanh() / b;
                if t_star <= end {
                    m = m.min(self.factor(curvature, t_star));
                }
            }
        }
        m
    }

    /// Factors whose first zero coincides with the right end (within the
    /// relative clearance). Such an end is a regular singular point of the
    /// model ODE, as for the round sphere at `D = π/√κ`.
    fn endpoint_zero(&self, curvature: f64) -> bool {
        let end = self.half_length;
        self.first_zero(curvature)
            .is_some_and(|z| (z - end).abs() <= EPS_SING * end)
    }

    /// True when some weight factor vanishes exactly at the right end.
    pub fn singular_end(&self) -> bool {
        self.profile.terms.iter().any(|t| self.endpoint_zero(t.curvature))
    }

    /// Total multiplicity of the factors vanishing at a singular right end;
    /// near such an end the drift behaves like `a / (end - s)`.
    pub fn singular_end_multiplicity(&self) -> f64 {
        self.profile
            .terms
            .iter()
            .filter(|t| self.endpoint_zero(t.curvature))
            .map(|t| t.multiplicity)
            .sum()
    }

    /// Where IVP integration stops: the right end, pulled back by
    /// [`SINGULAR_END_CLEARANCE`] when the end is singular.
    pub fn integration_end(&self) -> f64 {
        if self.singular_end() {
            self.half_length * (1.0 - SINGULAR_END_CLEARANCE)
        } else {
            self.half_length
        }
    }

    /// Checks that no weight factor vanishes inside the working interval and
    /// that the weight stays at least [`EPS_SING`] on it. A factor whose zero
    /// sits exactly at the right end is accepted (see [`Self::singular_end`]).
    /// The error names the factor whose zero comes first.
    pub fn validate(&self) -> Result<()> {
        let end = self.half_length;
        let offending = self
            .profile
            .terms
            .iter()
            .filter_map(|t| {
                self.first_zero(t.curvature)
                    .filter(|&z| z < end * (1.0 - EPS_SING) || (z <= end && !self.endpoint_zero(t.curvature)))
                    .map(|z| (t, z))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((term, z)) = offending {
            return Err(Error::Validation {
                factor: self.factor_name(term),
                location: z,
                end,
            });
        }
        let mut log_min = 0.0;
        let mut worst: Option<(&Term, f64)> = None;
        for t in self.profile.terms.iter().filter(|t| !self.endpoint_zero(t.curvature)) {
            let m = self.factor_min(t.curvature);
            log_min += t.multiplicity * m.ln();
            if worst.is_none_or(|(_, w)| m < w) {
                worst = Some((t, m));
            }
        }
        if log_min < EPS_SING.ln() {
            let (term, _) = worst.expect("checked at least one term");
            return Err(Error::Validation {
                factor: self.factor_name(term),
                location: end,
                end,
            });
        }
        Ok(())
    }
}
