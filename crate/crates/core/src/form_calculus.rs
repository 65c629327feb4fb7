//! Discrete carré du champ calculus for `Γ(φ) = c |∇φ|²` on radial functions.
//!
//! Functions are carried as first-order jets (value and radial derivative) at
//! the Gauss points of every element, so products and compositions obey the
//! Leibniz and chain rules exactly and the algebraic identities of the form
//! calculus hold to rounding.

use std::ops::{Add, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::rellich_constant;
use crate::error::{Error, Result};
use crate::quadrature::{GL5_NODES, GL5_WEIGHTS};
use crate::radial::{AssembledForms, RadialGrid};
use crate::weights::{WeightParams, WeightProfile};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub dv: f64,
}

impl Jet {
    pub fn new(v: f64, dv: f64) -> Self {
        Jet { v, dv }
    }

    pub fn constant(v: f64) -> Self {
        Jet { v, dv: 0.0 }
    }

    /// `f ∘ self` given `f` and `f'`.
    pub fn map(self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        Jet {
            v: f(self.v),
            dv: df(self.v) * self.dv,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.dv + o.dv)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.dv - o.dv)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.dv * o.v + self.v * o.dv)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet::new(self.v * s, self.dv * s)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.dv)
    }
}

/// A function sampled as jets at the quadrature points of a [`DiscreteForm`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field(pub Vec<Jet>);

impl Field {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn jets(&self) -> &[Jet] {
        &self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|j| j.map(&f, &df)).collect())
    }

    pub fn scale(&self, s: f64) -> Field {
        Field(self.0.iter().map(|j| *j * s).collect())
    }

    pub fn square(&self) -> Field {
        self * self
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().map(|j| j.v.abs()).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().map(|j| j.v).fold(f64::INFINITY, f64::min)
    }

    fn zip(&self, other: &Field, f: impl Fn(Jet, Jet) -> Jet) -> Field {
        assert_eq!(self.len(), other.len(), "fields live on different forms");
        Field(self.0.iter().zip(&other.0).map(|(a, b)| f(*a, *b)).collect())
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, o: &Field) -> Field {
        self.zip(o, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, o: &Field) -> Field {
        self.zip(o, |a, b| a - b)
    }
}

impl Mul for &Field {
    type Output = Field;
    fn mul(self, o: &Field) -> Field {
        self.zip(o, |a, b| a * b)
    }
}

/// Nodal values of a continuous piecewise-linear function on a radial grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFunction {
    pub values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("nodal value {v} is not finite")));
        }
        Ok(DiscreteFunction { values })
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid.nodes().iter().map(|r| f(*r)).collect())
    }

    /// Vanishes at both ends of the grid, i.e. lies in the compactly supported core.
    pub fn is_compactly_supported(&self) -> bool {
        matches!((self.values.first(), self.values.last()), (Some(a), Some(b)) if *a == 0.0 && *b == 0.0)
    }
}

/// Energy and measure densities at the five Gauss points of every element.
#[derive(Clone, Debug)]
pub struct DiscreteForm {
    profile: WeightProfile,
    grid: RadialGrid,
    points: Vec<f64>,
    /// `c r^{d-1}` times the quadrature weight.
    energy_density: Vec<f64>,
    /// `r^{d-1}` times the quadrature weight.
    measure: Vec<f64>,
}

/// Value of `E_ξ(φ)` by the two routes that must agree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncated {
    /// `E(φ, ξφ) − ½E(ξ, φ²)`.
    pub defining: f64,
    /// `∫ ξ Γ(φ) dμ`.
    pub carre: f64,
}

/// `lhs` against `rhs`, with the magnitude that rounding errors scale with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub scale: f64,
}

impl Comparison {
    fn new(name: &'static str, lhs: f64, rhs: f64, scale: f64) -> Self {
        Comparison {
            name,
            lhs,
            rhs,
            scale: scale.abs().max(lhs.abs()).max(rhs.abs()),
        }
    }

    /// `|lhs − rhs| / scale`, zero when everything vanishes.
    pub fn residual(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / self.scale
        }
    }

    /// `(lhs − rhs) / scale`; positive when `lhs ≤ rhs` is violated.
    pub fn excess(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs) / self.scale
        }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.excess() <= slack
    }

    pub fn agrees(&self, tolerance: f64) -> bool {
        self.residual() <= tolerance
    }
}

impl DiscreteForm {
    pub fn new(profile: &WeightProfile, grid: &RadialGrid) -> Result<Self> {
        let d = profile.dim() as f64;
        let mut points = Vec::with_capacity(5 * grid.elements());
        let mut energy_density = Vec::with_capacity(points.capacity());
        let mut measure = Vec::with_capacity(points.capacity());
        for e in 0..grid.elements() {
            let (a, b) = grid.element(e);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
                let r = mid + half * x;
                let m = half * w * r.powf(d - 1.0);
                let ed = m * profile.eval_c(r)?;
                if !(m > 0.0 && ed.is_finite()) {
                    return Err(Error::Overflow(format!("form density at r = {r:e}")));
                }
                points.push(r);
                measure.push(m);
                energy_density.push(ed);
            }
        }
        Ok(DiscreteForm {
            profile: profile.clone(),
            grid: grid.clone(),
            points,
            energy_density,
            measure,
        })
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn lift(&self, f: &DiscreteFunction) -> Result<Field> {
        if f.values.len() != self.grid.len() {
            return Err(Error::Domain(format!(
                "function has {} nodal values, grid has {} nodes",
                f.values.len(),
                self.grid.len()
            )));
        }
        let mut jets = Vec::with_capacity(self.points.len());
        for e in 0..self.grid.elements() {
            let (a, b) = self.grid.element(e);
            let (u0, u1) = (f.values[e], f.values[e + 1]);
            let slope = (u1 - u0) / (b - a);
            for r in &self.points[5 * e..5 * e + 5] {
                jets.push(Jet::new(u0 + slope * (r - a), slope));
            }
        }
        Ok(Field(jets))
    }

    /// Samples an analytic function given as `r ↦ (f(r), f'(r))`.
    pub fn analytic(&self, f: impl Fn(f64) -> (f64, f64)) -> Field {
        Field(
            self.points
                .iter()
                .map(|r| {
                    let (v, dv) = f(*r);
                    Jet::new(v, dv)
                })
                .collect(),
        )
    }

    pub fn constant(&self, c: f64) -> Field {
        Field(vec![Jet::constant(c); self.points.len()])
    }

    /// `χ(r) = r`, whose carré du champ is `c` itself.
    pub fn radius(&self) -> Field {
        self.analytic(|r| (r, 1.0))
    }

    /// `η = (a₁ c)^{1/2} r⁻¹`.
    pub fn eta(&self, a1: f64) -> Field {
        self.analytic(|r| self.profile.eta_jet(a1, r))
    }

    /// `E(f, g) = ∫ c f' g' r^{d-1} dr`.
    pub fn energy(&self, f: &Field, g: &Field) -> f64 {
        self.energy_density
            .iter()
            .zip(f.jets().iter().zip(g.jets()))
            .map(|(w, (a, b))| w * a.dv * b.dv)
            .sum()
    }

    /// `∫ f g r^{d-1} dr`.
    pub fn inner(&self, f: &Field, g: &Field) -> f64 {
        self.measure
            .iter()
            .zip(f.jets().iter().zip(g.jets()))
            .map(|(w, (a, b))| w * a.v * b.v)
            .sum()
    }

    /// `∫ ξ Γ(φ) dμ`.
    pub fn carre(&self, xi: &Field, phi: &Field) -> f64 {
        self.energy_density
            .iter()
            .zip(xi.jets().iter().zip(phi.jets()))
            .map(|(w, (x, p))| w * x.v * p.dv * p.dv)
            .sum()
    }

    /// `E(φ, ξφ) − ½E(ξ, φ²)`.
    pub fn defining(&self, xi: &Field, phi: &Field) -> f64 {
        self.energy(phi, &(xi * phi)) - 0.5 * self.energy(xi, &phi.square())
    }

    /// `E_ξ(φ)` by both routes; errors if they differ by more than `10⁻¹⁰`
    /// relative to `E_{|ξ|}(φ)`.
    pub fn truncated_form(&self, xi: &Field, phi: &Field) -> Result<Truncated> {
        let t = Truncated {
            defining: self.defining(xi, phi),
            carre: self.carre(xi, phi),
        };
        let c = self.truncated_comparison(xi, phi, t);
        if !c.agrees(1e-10) {
            return Err(Error::IdentityViolation {
                name: "truncated form",
                residual: c.residual(),
                tolerance: 1e-10,
            });
        }
        Ok(t)
    }

    fn truncated_comparison(&self, xi: &Field, phi: &Field, t: Truncated) -> Comparison {
        let abs_xi = xi.map(f64::abs, |_| 0.0);
        let scale = self.carre(&abs_xi, phi) + self.energy(phi, &(xi * phi)).abs();
        Comparison::new("truncated form", t.defining, t.carre, scale)
    }

    /// `E_{φ²}(χ) = E(χφ) − E(φ, χ²φ)`, with the left side by the defining
    /// combination and the carré du champ as an independent second route.
    pub fn check_key_identity(&self, phi: &Field, chi: &Field) -> [Comparison; 2] {
        let phi2 = phi.square();
        let chi_phi = chi * phi;
        let a = self.energy(&chi_phi, &chi_phi);
        let b = self.energy(phi, &(&chi.square() * phi));
        let lhs = self.defining(&phi2, chi);
        let routes = self.truncated_comparison(&phi2, chi, Truncated {
            defining: lhs,
            carre: self.carre(&phi2, chi),
        });
        [routes, Comparison::new("key identity", lhs, a - b, a.abs() + b.abs())]
    }

    /// `E_{φ²}(χ(1+βχ)⁻¹) ≤ E_{(1+βχ)⁻²φ²}(χ)` for `χ ≥ 0`, `β ≥ 0`.
    pub fn check_resolvent_bound(&self, phi: &Field, chi: &Field, beta: f64) -> Result<Comparison> {
        if !(beta >= 0.0) || chi.min_value() < 0.0 {
            return Err(Error::Domain("resolvent bound needs chi >= 0 and beta >= 0".into()));
        }
        let damped = chi.map(|x| x / (1.0 + beta * x), |x| 1.0 / (1.0 + beta * x).powi(2));
        let weight = &chi.map(|x| 1.0 / (1.0 + beta * x).powi(2), |x| -2.0 * beta / (1.0 + beta * x).powi(3)) * &phi.square();
        let lhs = self.carre(&phi.square(), &damped);
        let rhs = self.carre(&weight, chi);
        Ok(Comparison::new("resolvent bound", lhs, rhs, 0.0))
    }

    /// `E_{ψ²}(χφ) ≤ (1+δ)E_{ψ²χ²}(φ) + (1+δ⁻¹)E_{ψ²φ²}(χ)`, first with `ψ ≡ 1`.
    pub fn check_locality_bounds(&self, phi: &Field, chi: &Field, psi: &Field, delta: f64) -> Result<[Comparison; 2]> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("locality bound needs delta > 0, got {delta}")));
        }
        let one = self.constant(1.0);
        let bound = |w: &Field| {
            let chi_phi = chi * phi;
            let lhs = self.carre(w, &chi_phi);
            let t1 = (1.0 + delta) * self.carre(&(w * &chi.square()), phi);
            let t2 = (1.0 + 1.0 / delta) * self.carre(&(w * &phi.square()), chi);
            (lhs, t1 + t2)
        };
        let (l0, r0) = bound(&one);
        let (l1, r1) = bound(&psi.square());
        Ok([
            Comparison::new("locality bound", l0, r0, 0.0),
            Comparison::new("weighted locality bound", l1, r1, 0.0),
        ])
    }

    /// `E_{φ²}(χ²) = 4 E_{χ²φ²}(χ)`.
    pub fn check_leibniz_square(&self, phi: &Field, chi: &Field) -> Comparison {
        let phi2 = phi.square();
        let lhs = self.carre(&phi2, &chi.square());
        let rhs = 4.0 * self.carre(&(&chi.square() * &phi2), chi);
        Comparison::new("leibniz square", lhs, rhs, 0.0)
    }

    /// The contraction properties of `φ_ε` against `φ`, each as `lhs ≤ rhs`.
    pub fn check_normal_contraction(&self, phi: &Field, xi: &Field, eps: f64) -> Result<[Comparison; 3]> {
        let contracted = normal_contraction(phi, eps)?;
        Ok([
            Comparison::new("contraction norm", self.inner(&contracted, &contracted), self.inner(phi, phi), 0.0),
            Comparison::new("contraction energy", self.energy(&contracted, &contracted), self.energy(phi, phi), 0.0),
            Comparison::new("contraction truncated energy", self.carre(xi, &contracted), self.carre(xi, phi), 0.0),
        ])
    }

    /// `E_{φ²}(η) ≤ γ (η²φ, η²φ)` with `φ` rescaled so that `(η²φ, η²φ) = 1`.
    pub fn condition_two(&self, phi: &Field, a1: f64, gamma: f64) -> Comparison {
        let eta = self.eta(a1);
        let eta2 = eta.square();
        let norm = self.inner(&(&eta2 * phi), &(&eta2 * phi)).sqrt();
        let phi = phi.scale(1.0 / norm);
        let lhs = self.carre(&phi.square(), &eta);
        let rhs = gamma * self.inner(&(&eta2 * &phi), &(&eta2 * &phi));
        Comparison::new("condition II", lhs, rhs, 1.0)
    }
}

/// `φ_ε = φ (1 + εφ²)^{-1/2}`, applied pointwise to the jets.
pub fn normal_contraction(phi: &Field, eps: f64) -> Result<Field> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive, got {eps}")));
    }
    Ok(phi.map(|x| x / (1.0 + eps * x * x).sqrt(), |x| (1.0 + eps * x * x).powf(-1.5)))
}

/// `(1−γ)‖η²u‖² ≤ ‖Hu‖·‖η²u‖` for the discrete strong operator.
pub fn rellich_chain(forms: &AssembledForms, a1: f64, gamma: f64, u: &[f64]) -> Comparison {
    let eta2 = a1 * a1 * forms.rellich_weight.quadratic(u);
    let h = forms.strong_norm_sq(u);
    Comparison::new("rellich chain", (1.0 - gamma) * eta2, (h * eta2).sqrt(), 0.0)
}

/// Worst outcome of one named check over a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    /// Equalities report `|lhs − rhs|/scale`, inequalities `(lhs − rhs)/scale`.
    pub equality: bool,
    pub worst: f64,
}

/// Worst outcomes of the identity suite on one weight family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub params: WeightParams,
    pub samples: usize,
    pub checks: Vec<CheckSummary>,
}

impl FamilyReport {
    fn record(&mut self, c: &Comparison, equality: bool) {
        let value = if equality { c.residual() } else { c.excess() };
        match self.checks.iter_mut().find(|s| s.name == c.name) {
            Some(s) => s.worst = s.worst.max(value),
            None => self.checks.push(CheckSummary {
                name: c.name.to_string(),
                equality,
                worst: value,
            }),
        }
    }

    pub fn max_equality_residual(&self) -> f64 {
        self.checks.iter().filter(|c| c.equality).map(|c| c.worst).fold(0.0, f64::max)
    }

    pub fn max_inequality_excess(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| !c.equality)
            .map(|c| c.worst)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passes(&self, equality_tol: f64, inequality_slack: f64) -> bool {
        self.max_equality_residual() <= equality_tol && self.max_inequality_excess() <= inequality_slack
    }
}

/// The default families: `d ∈ {1,3,5}`, `δ, δ' ∈ {0,1,2,4}`.
pub fn default_families() -> Vec<WeightParams> {
    let mut out = Vec::new();
    for d in [1, 3, 5] {
        for a in [0, 1, 2, 4] {
            for b in [0, 1, 2, 4] {
                out.push(WeightParams::new(d, a as f64, b as f64).expect("integer exponents are valid"));
            }
        }
    }
    out
}

/// A random nodal function on `grid`, zero at both ends when `compact`.
pub fn random_function(rng: &mut impl Rng, grid: &RadialGrid, lo: f64, hi: f64, compact: bool) -> DiscreteFunction {
    let n = grid.len();
    let values = (0..n)
        .map(|i| {
            if compact && (i == 0 || i == n - 1) {
                0.0
            } else {
                rng.gen_range(lo..hi)
            }
        })
        .collect();
    DiscreteFunction { values }
}

/// Runs every form-calculus check on `samples` random inputs drawn from
/// stream `stream` of `seed`.
pub fn run_family(params: &WeightParams, grid: &RadialGrid, samples: usize, seed: u64, stream: u64) -> Result<FamilyReport> {
    let profile = WeightProfile::new(params.clone());
    let form = DiscreteForm::new(&profile, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);

    let mut report = FamilyReport {
        params: params.clone(),
        samples,
        checks: Vec::new(),
    };
    for _ in 0..samples {
        let phi = form.lift(&random_function(&mut rng, grid, -1.0, 1.0, true))?;
        let chi = form.lift(&random_function(&mut rng, grid, -2.0, 2.0, false))?;
        let chi_pos = form.lift(&random_function(&mut rng, grid, 0.0, 3.0, false))?;
        let psi = form.lift(&random_function(&mut rng, grid, -1.0, 1.0, false))?;
        let xi = form.lift(&random_function(&mut rng, grid, -1.0, 1.0, false))?;
        let xi_pos = xi.map(f64::abs, |_| 0.0);
        let beta = 10f64.powf(rng.gen_range(-3.0..3.0));
        let delta = 10f64.powf(rng.gen_range(-2.0..2.0));
        let eps = 10f64.powf(rng.gen_range(-4.0..2.0));

        let t = Truncated {
            defining: form.defining(&xi, &phi),
            carre: form.carre(&xi, &phi),
        };
        report.record(&form.truncated_comparison(&xi, &phi, t), true);
        for c in form.check_key_identity(&phi, &chi) {
            report.record(&c, true);
        }
        report.record(&form.check_leibniz_square(&phi, &chi), true);
        report.record(&form.check_resolvent_bound(&phi, &chi_pos, beta)?, false);
        for c in form.check_locality_bounds(&phi, &chi, &psi, delta)? {
            report.record(&c, false);
        }
        for c in form.check_normal_contraction(&phi, &xi_pos, eps)? {
            report.record(&c, false);
        }
    }
    Ok(report)
}

/// Worst `E_{φ²}(η) − γ(η²φ, η²φ)` over random compactly supported `φ` with
/// `(η²φ, η²φ) = 1`.
pub fn condition_two_witness(params: &WeightParams, grid: &RadialGrid, samples: usize, seed: u64) -> Result<f64> {
    let ledger = rellich_constant(params);
    let a1 = ledger
        .a1_f64()
        .ok_or_else(|| Error::Domain(format!("no Hardy constant for {params}")))?;
    let form = DiscreteForm::new(&WeightProfile::new(params.clone()), grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let phi = form.lift(&random_function(&mut rng, grid, -1.0, 1.0, true))?;
        let c = form.condition_two(&phi, a1, ledger.gamma_f64());
        worst = worst.max(c.lhs - c.rhs);
    }
    Ok(worst)
}
