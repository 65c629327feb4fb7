use crate::banded::SymBanded;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, QuadTolerance};
use crate::weights::WeightProfile;

use super::grid::RadialGrid;

/// Matrices of the radially reduced forms on the interior nodes.
///
/// With `φ₀, φ₁` the hat functions of an element and `d` the dimension:
///
/// * `stiffness`: `∫ c u'v' r^{d-1} dr` (the energy form),
/// * `mass`: `∫ u v r^{d-1} dr`,
/// * `hardy_weight`: `∫ c r^{-2} u v r^{d-1} dr`,
/// * `rellich_weight`: `∫ c² r^{-4} u v r^{d-1} dr`,
/// * `strong_op`: `A M_L⁻¹ A`, the Gram matrix of the discrete operator
///   `H = M_L⁻¹ A` in the lumped-mass inner product.
///
/// The surface measure of the unit sphere is a common factor and is dropped.
#[derive(Clone, Debug)]
pub struct AssembledForms {
    pub profile: WeightProfile,
    pub grid: RadialGrid,
    pub stiffness: SymBanded,
    pub mass: SymBanded,
    pub hardy_weight: SymBanded,
    pub rellich_weight: SymBanded,
    /// `∫ φ_i r^{d-1} dr` for every interior node.
    pub lumped_mass: Vec<f64>,
    pub strong_op: SymBanded,
    /// Total number of quadrature subintervals used.
    pub quadrature_intervals: usize,
}

impl AssembledForms {
    /// `H u = M_L⁻¹ A u`.
    pub fn apply_strong(&self, u: &[f64]) -> Vec<f64> {
        self.stiffness
            .matvec(u)
            .into_iter()
            .zip(&self.lumped_mass)
            .map(|(a, m)| a / m)
            .collect()
    }

    /// `‖H u‖²` in the lumped-mass inner product.
    pub fn strong_norm_sq(&self, u: &[f64]) -> f64 {
        self.stiffness
            .matvec(u)
            .iter()
            .zip(&self.lumped_mass)
            .map(|(a, m)| a * a / m)
            .sum()
    }
}

/// `exp(ln c(r)·power_c + p ln r)` without intermediate overflow.
#[inline]
fn weight(profile: &WeightProfile, r: f64, c_power: f64, r_power: f64) -> f64 {
    if c_power == 0.0 {
        return r.powf(r_power);
    }
    (c_power * profile.ln_c(r) + r_power * r.ln()).exp()
}

/// Integrates the ten element quantities on `[r0, r1]` in the local coordinate.
fn element_integrals(
    profile: &WeightProfile,
    r0: f64,
    r1: f64,
    tol: QuadTolerance,
) -> std::result::Result<([f64; 10], usize), f64> {
    let d = profile.dim() as f64;
    let h = r1 - r0;
    let integrand = |x: f64| {
        let r = r0 + h * x;
        let (p0, p1) = (1.0 - x, x);
        let energy = weight(profile, r, 1.0, d - 1.0);
        let mass = weight(profile, r, 0.0, d - 1.0);
        let hardy = weight(profile, r, 1.0, d - 3.0);
        let rellich = weight(profile, r, 2.0, d - 5.0);
        [
            energy,
            mass * p0 * p0,
            mass * p0 * p1,
            mass * p1 * p1,
            hardy * p0 * p0,
            hardy * p0 * p1,
            hardy * p1 * p1,
            rellich * p0 * p0,
            rellich * p0 * p1,
            rellich * p1 * p1,
        ]
    };
    match integrate_vec(integrand, 0.0, 1.0, tol) {
        Ok(q) => {
            let mut v = q.value;
            for x in v.iter_mut() {
                *x *= h;
            }
            Ok((v, q.intervals))
        }
        Err(e) => Err(e.max_error()),
    }
}

/// Assembles all forms with per-element adaptive quadrature.
pub fn assemble(profile: &WeightProfile, grid: &RadialGrid, tol: QuadTolerance) -> Result<AssembledForms> {
    let n = grid.interior();
    let mut stiffness = SymBanded::zeros(n, 1);
    let mut mass = SymBanded::zeros(n, 1);
    let mut hardy = SymBanded::zeros(n, 1);
    let mut rellich = SymBanded::zeros(n, 1);
    let mut lumped = vec![0.0; n];
    let mut intervals = 0;

    for e in 0..grid.elements() {
        let (r0, r1) = grid.element(e);
        let (v, used) = element_integrals(profile, r0, r1, tol)
            .map_err(|error| Error::Quadrature { element: e, error })?;
        intervals += used;
        let h = r1 - r0;
        let k = v[0] / (h * h);
        let local = |m: &mut SymBanded, a00: f64, a01: f64, a11: f64| {
            // global node e is interior index e-1
            let (i0, i1) = (e.checked_sub(1), (e + 1 < grid.len() - 1).then_some(e));
            if let Some(i) = i0 {
                m.add(i, i, a00);
            }
            if let Some(j) = i1 {
                m.add(j, j, a11);
            }
            if let (Some(i), Some(j)) = (i0, i1) {
                m.add(j, i, a01);
            }
        };
        local(&mut stiffness, k, -k, k);
        local(&mut mass, v[1], v[2], v[3]);
        local(&mut hardy, v[4], v[5], v[6]);
        local(&mut rellich, v[7], v[8], v[9]);
        if let Some(i) = e.checked_sub(1) {
            lumped[i] += v[1] + v[2];
        }
        if e + 1 < grid.len() - 1 {
            lumped[e] += v[2] + v[3];
        }
    }

    let strong = gram_of_strong(&stiffness, &lumped);
    let forms = AssembledForms {
        profile: profile.clone(),
        grid: grid.clone(),
        stiffness,
        mass,
        hardy_weight: hardy,
        rellich_weight: rellich,
        lumped_mass: lumped,
        strong_op: strong,
        quadrature_intervals: intervals,
    };
    for (name, m) in [
        ("stiffness", &forms.stiffness),
        ("mass", &forms.mass),
        ("hardy weight", &forms.hardy_weight),
        ("rellich weight", &forms.rellich_weight),
        ("strong operator", &forms.strong_op),
    ] {
        if !m.is_finite() {
            return Err(Error::Overflow(format!("{name} matrix on {:?}", grid.summary())));
        }
    }
    Ok(forms)
}

/// `A M⁻¹ A` for tridiagonal `A` and diagonal `M`; pentadiagonal.
fn gram_of_strong(a: &SymBanded, m: &[f64]) -> SymBanded {
    let n = a.dim();
    let mut k = SymBanded::zeros(n, 2);
    for c in 0..n {
        // column c of A has entries at rows c-1, c, c+1
        let rows: Vec<(usize, f64)> = [c.checked_sub(1), Some(c), (c + 1 < n).then_some(c + 1)]
            .into_iter()
            .flatten()
            .map(|r| (r, a.get(r, c)))
            .collect();
        for &(i, ai) in &rows {
            for &(j, aj) in &rows {
                if i >= j {
                    k.add(i, j, ai * aj / m[c]);
                }
            }
        }
    }
    k
}

/// `∫ b(r) u v r^{d-1} dr` on the interior nodes, for a bounded weight `b`.
pub fn assemble_weighted_mass<B: Fn(f64) -> f64>(
    profile: &WeightProfile,
    grid: &RadialGrid,
    b: B,
    tol: QuadTolerance,
) -> Result<SymBanded> {
    let d = profile.dim() as f64;
    let n = grid.interior();
    let mut out = SymBanded::zeros(n, 1);
    for e in 0..grid.elements() {
        let (r0, r1) = grid.element(e);
        let h = r1 - r0;
        let q = integrate_vec(
            |x: f64| {
                let r = r0 + h * x;
                let w = b(r) * r.powf(d - 1.0);
                [w * (1.0 - x) * (1.0 - x), w * (1.0 - x) * x, w * x * x]
            },
            0.0,
            1.0,
            tol,
        )
        .map_err(|err| Error::Quadrature {
            element: e,
            error: err.max_error(),
        })?;
        let [a00, a01, a11] = q.value.map(|v| v * h);
        let i0 = e.checked_sub(1);
        let i1 = (e + 1 < grid.len() - 1).then_some(e);
        if let Some(i) = i0 {
            out.add(i, i, a00);
        }
        if let Some(j) = i1 {
            out.add(j, j, a11);
        }
        if let (Some(i), Some(j)) = (i0, i1) {
            out.add(j, i, a01);
        }
    }
    Ok(out)
}
