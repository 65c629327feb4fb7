//! Operators `−div_{x₁}(c ∇_{x₁}) − b Δ_{x₂}` on `(ℝ^{d₁}∖{0}) × ℝ^{d₂}`
//! tested on separated functions `ψ(|x₁|) χ(x₂)`.
//!
//! Everything is expressed through one-dimensional factors; the product
//! operator is only ever applied directly on a small grid to cross-check the
//! separation identities.

use serde::{Deserialize, Serialize};

use crate::banded::SymBanded;
use crate::constants::grushin_constants;
use crate::error::{Error, Result};
use crate::quadrature::QuadTolerance;
use crate::radial::{
    assemble, assemble_weighted_mass, hardy_quotient_min, AssembledForms, ConvergenceReport, GridSpec, QuotientEstimate,
    QuotientKind, SolverOptions,
};
use crate::weights::{WeightParams, WeightProfile};

/// The coefficient `b(r)` of the second-factor Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BProfile {
    Constant { value: f64 },
    /// `(inner + outer·r)/(1 + r)`, running from `inner` at the origin to `outer` at infinity.
    Radial { inner: f64, outer: f64 },
}

impl Default for BProfile {
    fn default() -> Self {
        BProfile::Constant { value: 1.0 }
    }
}

impl BProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            BProfile::Constant { value } => value,
            BProfile::Radial { inner, outer } => (inner + outer * r) / (1.0 + r),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            BProfile::Constant { value } => (value, value),
            BProfile::Radial { inner, outer } => (inner.min(outer), inner.max(outer)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if lo > 0.0 && hi.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("b must lie in (0, inf), got bounds [{lo}, {hi}]")))
        }
    }

    pub fn constant(&self) -> Option<f64> {
        match *self {
            BProfile::Constant { value } => Some(value),
            BProfile::Radial { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrushinConfig {
    /// Weight exponents, with `dim` the first-factor dimension `d₁`.
    pub params: WeightParams,
    pub dim2: u32,
    #[serde(default)]
    pub b: BProfile,
    /// Half-width of the second-factor interval `[-L, L]`.
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Nodes of the second-factor grid, ends included.
    #[serde(default = "default_second_nodes")]
    pub second_nodes: usize,
}

fn default_half_width() -> f64 {
    1.0
}

fn default_second_nodes() -> usize {
    65
}

impl GrushinConfig {
    pub fn new(params: WeightParams, dim2: u32) -> Self {
        GrushinConfig {
            params,
            dim2,
            b: BProfile::default(),
            half_width: default_half_width(),
            second_nodes: default_second_nodes(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.b.validate()?;
        if self.dim2 == 0 {
            return Err(Error::Config("second-factor dimension must be positive".into()));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) || self.second_nodes < 3 {
            return Err(Error::Config("second-factor grid needs L > 0 and at least 3 nodes".into()));
        }
        Ok(())
    }
}

/// λ values swept by the Hardy estimate.
pub const LAMBDA_SWEEP: [f64; 5] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4];

/// The radial grids of the Grushin Hardy estimate. They end at `r = 1` so that
/// `(ψ, ψ)/‖c^{1/2} r⁻¹ψ‖² ≤ 1` and the `λ²` term is negligible at `λ = 10⁻⁴`.
pub fn default_schedule() -> Vec<GridSpec> {
    vec![
        GridSpec::log(1e-8, 1.0, 1025),
        GridSpec::log(1e-12, 1.0, 1537),
        GridSpec::log(1e-16, 1.0, 2049),
    ]
}

/// A one-dimensional profile `χ₁` on `[-L, L]` with Dirichlet ends; the
/// second factor is `χ(x₂) = Π_i χ₁(x₂ᵢ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondFactor {
    pub dim2: u32,
    pub spacing: f64,
    /// Interior nodal values of `χ₁`.
    pub values: Vec<f64>,
}

/// `‖χ₁‖²`, `‖χ₁'‖²` and `‖L χ₁‖²` with lumped mass `h` and `L = −A/h`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Factor1d {
    norm: f64,
    grad: f64,
    lap: f64,
}

impl SecondFactor {
    pub fn from_fn(dim2: u32, half_width: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if nodes < 3 || !(half_width > 0.0) {
            return Err(Error::Domain("second-factor grid needs L > 0 and at least 3 nodes".into()));
        }
        let h = 2.0 * half_width / (nodes - 1) as f64;
        let values: Vec<f64> = (1..nodes - 1).map(|i| f(-half_width + h * i as f64)).collect();
        if values.iter().all(|v| *v == 0.0) {
            return Err(Error::Domain("second factor vanishes".into()));
        }
        Ok(SecondFactor { dim2, spacing: h, values })
    }

    /// `(1 − (x/L)²)²`.
    pub fn bump(config: &GrushinConfig) -> Result<Self> {
        let l = config.half_width;
        Self::from_fn(config.dim2, l, config.second_nodes, |x| (1.0 - (x / l).powi(2)).powi(2))
    }

    /// `−L χ₁ = A χ₁ / h` at the interior nodes.
    pub fn neg_laplacian(&self) -> Vec<f64> {
        let h = self.spacing;
        let v = &self.values;
        (0..v.len())
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = v.get(i + 1).copied().unwrap_or(0.0);
                (2.0 * v[i] - left - right) / (h * h)
            })
            .collect()
    }

    fn factor_1d(&self) -> Factor1d {
        let h = self.spacing;
        let norm = h * self.values.iter().map(|v| v * v).sum::<f64>();
        let lap_v = self.neg_laplacian();
        let grad = h * self.values.iter().zip(&lap_v).map(|(a, b)| a * b).sum::<f64>();
        let lap = h * lap_v.iter().map(|v| v * v).sum::<f64>();
        Factor1d { norm, grad, lap }
    }

    /// `‖χ_λ‖²`, independent of `λ` for `χ_λ(x) = λ^{d₂/2} χ(λx)`.
    pub fn norm_sq(&self) -> f64 {
        self.factor_1d().norm.powi(self.dim2 as i32)
    }

    /// `‖∇χ_λ‖² = λ² d₂ ‖χ₁'‖² ‖χ₁‖^{2(d₂−1)}`.
    pub fn grad_sq(&self, lambda: f64) -> f64 {
        let f = self.factor_1d();
        let k = self.dim2 as i32;
        lambda * lambda * k as f64 * f.grad * f.norm.powi(k - 1)
    }

    /// `‖Δχ_λ‖² = λ⁴ (d₂ ‖Lχ₁‖² N^{d₂−1} + d₂(d₂−1) ‖χ₁'‖⁴ N^{d₂−2})`.
    pub fn laplacian_sq(&self, lambda: f64) -> f64 {
        let f = self.factor_1d();
        let k = self.dim2 as i32;
        let diag = k as f64 * f.lap * f.norm.powi(k - 1);
        let cross = if k > 1 {
            (k * (k - 1)) as f64 * f.grad * f.grad * f.norm.powi(k - 2)
        } else {
            0.0
        };
        lambda.powi(4) * (diag + cross)
    }

    /// The same factor on the grid scaled by `λ`: spacing `h/λ`, values `λ^{1/2}χ₁`.
    pub fn scaled(&self, lambda: f64) -> SecondFactor {
        SecondFactor {
            dim2: self.dim2,
            spacing: self.spacing / lambda,
            values: self.values.iter().map(|v| v * lambda.sqrt()).collect(),
        }
    }
}

/// First-factor matrices: the radial forms plus `∫ b u v r^{d₁−1} dr`.
#[derive(Clone, Debug)]
pub struct RadialFactor {
    pub forms: AssembledForms,
    pub b_mass: SymBanded,
    pub b: BProfile,
}

impl RadialFactor {
    pub fn new(config: &GrushinConfig, spec: &GridSpec) -> Result<Self> {
        config.validate()?;
        let profile = WeightProfile::new(config.params.clone());
        let grid = spec.build()?;
        let tol = QuadTolerance::default();
        let forms = assemble(&profile, &grid, tol)?;
        let b = config.b;
        let b_mass = assemble_weighted_mass(&profile, &grid, |r| b.eval(r), tol)?;
        Ok(RadialFactor { forms, b_mass, b })
    }
}

/// `h(ψχ_λ) / (‖c^{1/2} r⁻¹ψ‖² ‖χ_λ‖²)` through the separation identity
/// `h(ψχ) = h⁽¹⁾(ψ)‖χ‖² + (bψ, ψ)‖∇χ‖²`.
pub fn product_quotient(radial: &RadialFactor, psi: &[f64], chi: &SecondFactor, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let h1 = radial.forms.stiffness.quadratic(psi);
    let w1 = radial.forms.hardy_weight.quadratic(psi);
    let bpp = radial.b_mass.quadratic(psi);
    let n = chi.norm_sq();
    if !(w1 > 0.0 && n > 0.0) {
        return Err(Error::Domain("product quotient has a zero denominator".into()));
    }
    Ok((h1 * n + bpp * chi.grad_sq(lambda)) / (w1 * n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrushinHardyReport {
    pub convergence: ConvergenceReport,
    /// `(λ, quotient)` on the finest grid.
    pub lambda_sweep: Vec<(f64, f64)>,
    /// The first-factor quotient `h⁽¹⁾(ψ*)/‖c^{1/2}r⁻¹ψ*‖²` on the finest grid.
    pub first_factor: f64,
}

/// Minimizes the product quotient over `ψ*·χ_λ` with `ψ*` the discrete
/// first-factor minimizer and `λ` running through [`LAMBDA_SWEEP`].
pub fn grushin_hardy_estimate(config: &GrushinConfig, schedule: &[GridSpec], opts: &SolverOptions) -> Result<GrushinHardyReport> {
    config.validate()?;
    let ledger = grushin_constants(&config.params);
    let target = ledger
        .a1_f64()
        .ok_or_else(|| Error::Config(format!("no Hardy inequality for d1 = {}", config.params.dim)))?;
    let chi = SecondFactor::bump(config)?;
    let mut estimates = Vec::with_capacity(schedule.len());
    let mut sweep = Vec::new();
    let mut first_factor = f64::NAN;
    for (step, spec) in schedule.iter().enumerate() {
        let wrap = |e: Error| Error::Refinement {
            step,
            source: Box::new(e),
        };
        let radial = RadialFactor::new(config, spec).map_err(wrap)?;
        let psi = hardy_quotient_min(&radial.forms, opts).map_err(wrap)?;
        sweep = LAMBDA_SWEEP
            .iter()
            .map(|l| product_quotient(&radial, &psi.eigenvector, &chi, *l).map(|q| (*l, q)))
            .collect::<Result<Vec<_>>>()
            .map_err(wrap)?;
        first_factor = psi.value;
        let best = sweep.iter().map(|(_, q)| *q).fold(f64::INFINITY, f64::min);
        estimates.push(QuotientEstimate { value: best, ..psi });
    }
    let convergence = ConvergenceReport::from_estimates(target, QuotientKind::Hardy, true, estimates);
    Ok(GrushinHardyReport {
        convergence,
        lambda_sweep: sweep,
        first_factor,
    })
}

/// The three terms of `‖H(ψχ)‖² = ‖H₁ψ‖²‖χ‖² + 2(bψ, H₁ψ)‖∇χ‖² + ‖bψ‖²‖Δχ‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RellichNorm {
    pub terms: [f64; 3],
}

impl RellichNorm {
    pub fn total(&self) -> f64 {
        self.terms.iter().sum()
    }
}

/// The discrete three-term expansion; needs constant `b`.
pub fn grushin_rellich_norm(radial: &RadialFactor, psi: &[f64], chi: &SecondFactor, lambda: f64) -> Result<RellichNorm> {
    let b = radial
        .b
        .constant()
        .ok_or_else(|| Error::Unsupported("the Rellich norm identity needs a constant b".into()))?;
    let forms = &radial.forms;
    let h1 = forms.strong_norm_sq(psi);
    let energy = forms.stiffness.quadratic(psi);
    let mass: f64 = psi.iter().zip(&forms.lumped_mass).map(|(p, m)| p * p * m).sum();
    Ok(RellichNorm {
        terms: [
            h1 * chi.norm_sq(),
            2.0 * b * energy * chi.grad_sq(lambda),
            b * b * mass * chi.laplacian_sq(lambda),
        ],
    })
}

/// `‖H(ψχ_λ)‖² / (‖c r⁻²ψ‖² ‖χ_λ‖²)`.
pub fn product_rellich_quotient(radial: &RadialFactor, psi: &[f64], chi: &SecondFactor, lambda: f64) -> Result<f64> {
    let norm = grushin_rellich_norm(radial, psi, chi, lambda)?;
    let w2 = radial.forms.rellich_weight.quadratic(psi);
    Ok(norm.total() / (w2 * chi.norm_sq()))
}

/// `‖(H₁ ⊗ I + b I ⊗ (−L₂)) U‖²` for `U = ψ ⊗ χ₁` with `d₂ = 1`, by direct
/// application on the tensor grid.
pub fn direct_tensor_norm(radial: &RadialFactor, psi: &[f64], chi: &SecondFactor) -> Result<f64> {
    let b = radial
        .b
        .constant()
        .ok_or_else(|| Error::Unsupported("direct tensor check needs a constant b".into()))?;
    if chi.dim2 != 1 {
        return Err(Error::Unsupported("direct tensor check is for d2 = 1".into()));
    }
    let (n1, n2) = (psi.len(), chi.values.len());
    if n1 > 64 || n2 > 64 {
        return Err(Error::Unsupported(format!("tensor grid {n1}x{n2} exceeds 64x64")));
    }
    let forms = &radial.forms;
    let h = chi.spacing;
    let mut total = 0.0;
    let mut column = vec![0.0; n1];
    for j in 0..n2 {
        for i in 0..n1 {
            column[i] = psi[i] * chi.values[j];
        }
        let h1 = forms.apply_strong(&column);
        let left = if j > 0 { chi.values[j - 1] } else { 0.0 };
        let right = chi.values.get(j + 1).copied().unwrap_or(0.0);
        for i in 0..n1 {
            let lap = psi[i] * (2.0 * chi.values[j] - left - right) / (h * h);
            let v = h1[i] + b * lap;
            total += forms.lumped_mass[i] * h * v * v;
        }
    }
    Ok(total)
}

/// The Grushin ledger must coincide with the ℝ^{d₁}∖{0} ledger.
pub fn ledger_matches_first_factor(params: &WeightParams) -> bool {
    let g = grushin_constants(params);
    let r = crate::constants::rellich_constant(params);
    g.a1 == r.a1 && g.a2 == r.a2 && g.nu == r.nu && g.rellich_valid == r.rellich_valid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::rellich_quotient_min;

    fn config(d1: u32, dim2: u32) -> GrushinConfig {
        GrushinConfig::new(WeightParams::new(d1, 0.0, 0.0).unwrap(), dim2)
    }

    fn radial(cfg: &GrushinConfig, n: usize) -> RadialFactor {
        RadialFactor::new(cfg, &GridSpec::log(1e-2, 1.0, n)).unwrap()
    }

    #[test]
    fn scaling_preserves_norm_and_scales_derivatives() {
        for dim2 in [1, 2, 3] {
            let chi = SecondFactor::bump(&config(3, dim2)).unwrap();
            for lambda in [1.0, 0.3, 1e-2] {
                let s = chi.scaled(lambda);
                assert!((s.norm_sq() - chi.norm_sq()).abs() <= 1e-12 * chi.norm_sq());
                assert!((s.grad_sq(1.0) - chi.grad_sq(lambda)).abs() <= 1e-12 * chi.grad_sq(lambda));
                assert!((s.laplacian_sq(1.0) - chi.laplacian_sq(lambda)).abs() <= 1e-11 * chi.laplacian_sq(lambda));
            }
        }
    }

    #[test]
    fn bump_matches_continuum_ratio() {
        // ∫χ'²/∫χ² = 3 for χ = (1−x²)² on [−1, 1]
        let mut cfg = config(3, 1);
        cfg.second_nodes = 2001;
        let chi = SecondFactor::bump(&cfg).unwrap();
        assert!((chi.grad_sq(1.0) / chi.norm_sq() - 3.0).abs() < 1e-4);
    }

    #[test]
    fn quotient_is_affine_in_lambda_squared() {
        let cfg = config(3, 2);
        let r = radial(&cfg, 40);
        let chi = SecondFactor::bump(&cfg).unwrap();
        let psi: Vec<f64> = (0..r.forms.grid.interior()).map(|i| ((i + 1) as f64).sin().abs() + 0.1).collect();
        let q0 = r.forms.stiffness.quadratic(&psi) / r.forms.hardy_weight.quadratic(&psi);
        let q1 = product_quotient(&r, &psi, &chi, 1.0).unwrap();
        let q2 = product_quotient(&r, &psi, &chi, 0.5).unwrap();
        assert!(((q1 - q0) / 4.0 - (q2 - q0)).abs() <= 1e-12 * q1);
        let slope = chi.grad_sq(1.0) / chi.norm_sq() * r.b_mass.quadratic(&psi) / r.forms.hardy_weight.quadratic(&psi);
        assert!((q1 - q0 - slope).abs() <= 1e-12 * q1);
        assert!(q2 >= q0);
        assert!(product_quotient(&r, &vec![0.0; psi.len()], &chi, 1.0).is_err());
    }

    #[test]
    fn scaling_b_leaves_limit_unchanged() {
        let mut cfg = config(3, 1);
        let r1 = radial(&cfg, 40);
        cfg.b = BProfile::Constant { value: 7.0 };
        let r7 = radial(&cfg, 40);
        let chi = SecondFactor::bump(&cfg).unwrap();
        let psi = hardy_quotient_min(&r1.forms, &SolverOptions::default()).unwrap().eigenvector;
        let a = product_quotient(&r1, &psi, &chi, 1e-8).unwrap();
        let b = product_quotient(&r7, &psi, &chi, 1e-8).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn radial_b_is_bounded_and_rejected_for_rellich() {
        let mut cfg = config(5, 1);
        cfg.b = BProfile::Radial { inner: 0.5, outer: 2.0 };
        assert_eq!(cfg.b.bounds(), (0.5, 2.0));
        let r = radial(&cfg, 30);
        let chi = SecondFactor::bump(&cfg).unwrap();
        let psi = vec![1.0; r.forms.grid.interior()];
        assert!(product_quotient(&r, &psi, &chi, 0.1).is_ok());
        assert!(matches!(grushin_rellich_norm(&r, &psi, &chi, 1.0), Err(Error::Unsupported(_))));
        cfg.b = BProfile::Radial { inner: 0.0, outer: 2.0 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rellich_terms_scale_and_converge() {
        let cfg = config(5, 2);
        let r = radial(&cfg, 60);
        let chi = SecondFactor::bump(&cfg).unwrap();
        let est = rellich_quotient_min(&r.forms, &SolverOptions::default()).unwrap();
        let a = grushin_rellich_norm(&r, &est.eigenvector, &chi, 1.0).unwrap();
        let b = grushin_rellich_norm(&r, &est.eigenvector, &chi, 0.5).unwrap();
        assert!(a.terms.iter().all(|t| *t > 0.0));
        assert!((a.terms[0] - b.terms[0]).abs() <= 1e-15 * a.terms[0]);
        assert!((a.terms[1] / 4.0 - b.terms[1]).abs() <= 1e-12 * a.terms[1]);
        assert!((a.terms[2] / 16.0 - b.terms[2]).abs() <= 1e-12 * a.terms[2]);
        let q = product_rellich_quotient(&r, &est.eigenvector, &chi, 1e-6).unwrap();
        assert!((q - est.value).abs() <= 1e-9 * est.value);
    }

    #[test]
    fn tensor_application_matches_expansion() {
        let mut cfg = config(5, 1);
        cfg.second_nodes = 40;
        cfg.b = BProfile::Constant { value: 1.7 };
        let r = radial(&cfg, 50);
        let chi = SecondFactor::bump(&cfg).unwrap();
        let psi: Vec<f64> = (0..r.forms.grid.interior()).map(|i| (0.3 * i as f64).cos() + 1.2).collect();
        let expansion = grushin_rellich_norm(&r, &psi, &chi, 1.0).unwrap().total();
        let direct = direct_tensor_norm(&r, &psi, &chi).unwrap();
        assert!((expansion - direct).abs() <= 1e-8 * direct);
    }

    #[test]
    fn grushin_ledger_is_first_factor_ledger() {
        for d1 in 1..=6 {
            for (a, b) in [(0.0, 0.0), (1.0, 3.0), (2.0, 2.0), (4.0, 0.5)] {
                assert!(ledger_matches_first_factor(&WeightParams::new(d1, a, b).unwrap()));
            }
        }
    }
}
