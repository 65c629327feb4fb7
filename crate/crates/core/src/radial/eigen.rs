use serde::{Deserialize, Serialize};

use crate::banded::{norm, SymBanded};
use crate::error::{Error, Result};

use super::assembly::AssembledForms;
use super::grid::GridSummary;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuotientKind {
    Hardy,
    Rellich,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Residual target relative to `‖K‖∞·‖u‖`.
    pub residual_tolerance: f64,
    /// Relative width at which the definiteness bisection stops.
    pub bisection_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            residual_tolerance: 1e-8,
            bisection_tolerance: 1e-10,
        }
    }
}

/// Smallest eigenvalue of a discretized quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientEstimate {
    pub value: f64,
    pub residual_norm: f64,
    /// `‖K‖∞ ‖u‖` of the scaled problem, the yardstick for `residual_norm`.
    pub residual_scale: f64,
    pub iterations: usize,
    pub grid: GridSummary,
    pub kind: QuotientKind,
    /// Interior nodal values of the minimizer, normalised in the weighted norm.
    #[serde(skip)]
    pub eigenvector: Vec<f64>,
}

/// Left-hand operator of a pencil `K u = λ W u`.
trait PencilOperator {
    /// Banded matrix used for factorizations.
    fn matrix(&self) -> &SymBanded;
    /// Accurate `K x`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    /// Accurate `xᵀ K x`.
    fn quadratic(&self, x: &[f64]) -> f64;
}

struct Plain(SymBanded);

impl PencilOperator for Plain {
    fn matrix(&self) -> &SymBanded {
        &self.0
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.matvec(x)
    }
    fn quadratic(&self, x: &[f64]) -> f64 {
        self.0.quadratic(x)
    }
}

/// `K = A M⁻¹ A`, applied in factored form so that `xᵀKx = ‖M^{-1/2} A x‖²`
/// never cancels.
struct Factored {
    a: SymBanded,
    m: Vec<f64>,
    k: SymBanded,
}

impl PencilOperator for Factored {
    fn matrix(&self) -> &SymBanded {
        &self.k
    }
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let ax: Vec<f64> = self.a.matvec(x).iter().zip(&self.m).map(|(a, m)| a / m).collect();
        self.a.matvec(&ax)
    }
    fn quadratic(&self, x: &[f64]) -> f64 {
        self.a.matvec(x).iter().zip(&self.m).map(|(a, m)| a * a / m).sum()
    }
}

struct EigenPair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    scale: f64,
    iterations: usize,
}

fn rayleigh(op: &dyn PencilOperator, w: &SymBanded, x: &[f64]) -> f64 {
    op.quadratic(x) / w.quadratic(x)
}

fn normalise(w: &SymBanded, x: &mut [f64]) {
    let s = w.quadratic(x).sqrt();
    for v in x.iter_mut() {
        *v /= s;
    }
}

/// Smallest eigenpair of `K u = λ W u` with `K`, `W` symmetric positive definite.
///
/// A few unshifted inverse iterations give an upper bound; bisection on the
/// definiteness of `K − σW` (no negative `LDLᵀ` pivots) brackets `λ_min`; then
/// inverse iteration shifted to the lower bracket end converges in a handful
/// of steps.
fn smallest_pair(op: &dyn PencilOperator, w: &SymBanded, opts: &SolverOptions) -> Result<EigenPair> {
    let n = w.dim();
    let k = op.matrix();
    let k_norm = k.norm_inf();
    let mut iterations = 0;
    let bump = |iterations: &mut usize| -> Result<()> {
        *iterations += 1;
        if *iterations > opts.max_iterations {
            Err(Error::NoConvergence {
                iterations: opts.max_iterations,
            })
        } else {
            Ok(())
        }
    };

    let mut x: Vec<f64> = (0..n)
        .map(|i| (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).sin())
        .collect();
    normalise(w, &mut x);
    let unshifted = k.ldl().map_err(|row| Error::Factorization { row })?;
    if unshifted.negative_pivots() > 0 {
        return Err(Error::Factorization { row: 0 });
    }
    for _ in 0..3 {
        bump(&mut iterations)?;
        x = unshifted.solve(&w.matvec(&x));
        normalise(w, &mut x);
    }
    let mut hi = rayleigh(op, w, &x);
    let mut lo = 0.0;

    while hi - lo > opts.bisection_tolerance * hi {
        bump(&mut iterations)?;
        let mid = 0.5 * (lo + hi);
        match k.shifted(mid, w).ldl() {
            Ok(f) if f.negative_pivots() == 0 => lo = mid,
            _ => hi = mid,
        }
    }

    let shifted = k
        .shifted(lo, w)
        .ldl()
        .map_err(|row| Error::Factorization { row })?;
    let mut value = rayleigh(op, w, &x);
    loop {
        bump(&mut iterations)?;
        x = shifted.solve(&w.matvec(&x));
        normalise(w, &mut x);
        let next = rayleigh(op, w, &x);
        let kx = op.apply(&x);
        let wx = w.matvec(&x);
        let r: Vec<f64> = kx.iter().zip(&wx).map(|(a, b)| a - next * b).collect();
        let residual = norm(&r);
        let scale = k_norm * norm(&x);
        // the Rayleigh quotient is resolved once it only moves at rounding level
        let settled = (next - value).abs() <= 1e-12 * next.abs();
        value = next;
        if residual <= opts.residual_tolerance * scale && settled {
            return Ok(EigenPair {
                value,
                vector: x,
                residual,
                scale,
                iterations,
            });
        }
    }
}

/// Symmetric diagonal scaling `s_i = W_ii^{-1/2}`; the pencil's eigenvalues
/// are unchanged and the weighted matrix gets a unit diagonal.
fn scaling(w: &SymBanded) -> Vec<f64> {
    w.diagonal().iter().map(|d| 1.0 / d.sqrt()).collect()
}

fn estimate(forms: &AssembledForms, kind: QuotientKind, opts: &SolverOptions) -> Result<QuotientEstimate> {
    let w = match kind {
        QuotientKind::Hardy => &forms.hardy_weight,
        QuotientKind::Rellich => &forms.rellich_weight,
    };
    let s = scaling(w);
    let ws = w.congruence(&s);
    let pair = match kind {
        QuotientKind::Hardy => smallest_pair(&Plain(forms.stiffness.congruence(&s)), &ws, opts)?,
        QuotientKind::Rellich => {
            let a = forms.stiffness.congruence(&s);
            let m: Vec<f64> = forms.lumped_mass.iter().zip(&s).map(|(m, s)| m * s * s).collect();
            let k = forms.strong_op.congruence(&s);
            smallest_pair(&Factored { a, m, k }, &ws, opts)?
        }
    };
    let mut vector: Vec<f64> = pair.vector.iter().zip(&s).map(|(x, s)| x * s).collect();
    let sign = if vector.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    vector.iter_mut().for_each(|v| *v *= sign);
    Ok(QuotientEstimate {
        value: pair.value,
        residual_norm: pair.residual,
        residual_scale: pair.scale,
        iterations: pair.iterations,
        grid: forms.grid.summary(),
        kind,
        eigenvector: vector,
    })
}

/// `min h(u)/‖c^{1/2} r⁻¹ u‖²` over the discrete space: `A u = λ W₁ u`.
pub fn hardy_quotient_min(forms: &AssembledForms, opts: &SolverOptions) -> Result<QuotientEstimate> {
    estimate(forms, QuotientKind::Hardy, opts)
}

/// `min ‖H u‖²/‖c r⁻² u‖²` over the discrete space: `K u = λ W₂ u`.
pub fn rellich_quotient_min(forms: &AssembledForms, opts: &SolverOptions) -> Result<QuotientEstimate> {
    estimate(forms, QuotientKind::Rellich, opts)
}

/// Rayleigh quotient of an arbitrary interior vector for either pencil.
pub fn quotient_of(forms: &AssembledForms, kind: QuotientKind, u: &[f64]) -> f64 {
    match kind {
        QuotientKind::Hardy => forms.stiffness.quadratic(u) / forms.hardy_weight.quadratic(u),
        QuotientKind::Rellich => forms.strong_norm_sq(u) / forms.rellich_weight.quadratic(u),
    }
}
