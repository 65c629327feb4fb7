//! Closed-form constants in exact rational arithmetic: the Hardy constant
//! `a₁`, the commutator bound `ν`, the ratio `γ = ν/a₁`, and the Rellich
//! constant `a₂ = (a₁ − ν)²` together with its regime-specific closed forms.

use std::fmt;

use num::{BigRational, Signed};
use serde::{Deserialize, Serialize};

use crate::weights::{format_rational, ratio_to_f64, WeightParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `δ + δ' ≤ 4`
    SumAtMost4,
    /// `δ + δ' > 4`; both closed forms coincide on `δ + δ' = 4`.
    SumAtLeast4,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SumAtMost4 => "delta+delta'<=4",
            Regime::SumAtLeast4 => "delta+delta'>=4",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantLedger {
    pub params: WeightParams,
    /// `None` when `d + (δ∧δ') − 2 ≤ 0`.
    pub a1: Option<BigRational>,
    pub nu: BigRational,
    /// `None` stands for `+∞` (no Hardy inequality).
    pub gamma: Option<BigRational>,
    pub a2: Option<BigRational>,
    /// `σ = (1 − γ)²`, present with `a2`.
    pub sigma: Option<BigRational>,
    pub regime: Regime,
    pub hardy_valid: bool,
    pub rellich_valid: bool,
    /// The dimension is the first-factor dimension of a Grushin-type form.
    pub grushin: bool,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn dim(params: &WeightParams) -> BigRational {
    q(params.dim as i64)
}

/// `(d + (δ∧δ') − 2)²/4` when the base is strictly positive.
pub fn hardy_constant(params: &WeightParams) -> Option<BigRational> {
    let base = dim(params) + params.exact_min() - q(2);
    if base.is_positive() {
        Some(&base * &base / q(4))
    } else {
        None
    }
}

/// `sup |1 − t/2|²` over `[δ∧δ', δ∨δ']`, attained at an endpoint.
pub fn nu_constant(params: &WeightParams) -> BigRational {
    let at = |t: &BigRational| {
        let v = q(1) - t / q(2);
        &v * &v
    };
    std::cmp::max(at(params.exact_min()), at(params.exact_max()))
}

pub fn regime(params: &WeightParams) -> Regime {
    if params.delta.exact() + params.delta_prime.exact() <= q(4) {
        Regime::SumAtMost4
    } else {
        Regime::SumAtLeast4
    }
}

/// `d²(d + 2(δ∧δ') − 4)²/16`.
pub fn rellich_formula_small_sum(params: &WeightParams) -> BigRational {
    let d = dim(params);
    let inner = &d + q(2) * params.exact_min() - q(4);
    &d * &d * &inner * &inner / q(16)
}

/// `(d − |δ−δ'|)²(d + δ + δ' − 4)²/16`.
pub fn rellich_formula_large_sum(params: &WeightParams) -> BigRational {
    let d = dim(params);
    let (delta, delta_prime) = (params.delta.exact(), params.delta_prime.exact());
    let first = &d - (delta - delta_prime).abs();
    let second = &d + delta + delta_prime - q(4);
    &first * &first * &second * &second / q(16)
}

/// The closed form for `a₂` that applies in the parameters' regime.
pub fn regime_formula(params: &WeightParams) -> BigRational {
    match regime(params) {
        Regime::SumAtMost4 => rellich_formula_small_sum(params),
        Regime::SumAtLeast4 => rellich_formula_large_sum(params),
    }
}

/// `d(d+2(δ∧δ')−4) − (d−|δ−δ'|)(d+δ+δ'−4) − |δ−δ'|(δ+δ'−4)`; identically zero.
pub fn regime_gap(params: &WeightParams) -> BigRational {
    let d = dim(params);
    let (delta, delta_prime) = (params.delta.exact(), params.delta_prime.exact());
    let spread = (delta - delta_prime).abs();
    let sum_minus_4 = delta + delta_prime - q(4);
    let lhs = &d * (&d + q(2) * params.exact_min() - q(4))
        - (&d - &spread) * (&d + &sum_minus_4);
    lhs - spread * sum_minus_4
}

/// Fills the full ledger for `ℝ^d∖{0}`.
pub fn rellich_constant(params: &WeightParams) -> ConstantLedger {
    build_ledger(params, false)
}

/// The Grushin ledger: `params.dim` is the first-factor dimension `d₁`.
pub fn grushin_constants(params: &WeightParams) -> ConstantLedger {
    build_ledger(params, true)
}

fn build_ledger(params: &WeightParams, grushin: bool) -> ConstantLedger {
    let a1 = hardy_constant(params);
    let nu = nu_constant(params);
    let gamma = a1.as_ref().map(|a1| &nu / a1);
    // γ = 1 is excluded: the commutator bound must be strict.
    let rellich_valid = gamma.as_ref().is_some_and(|g| *g < q(1));
    let (a2, sigma) = match (&a1, &gamma) {
        (Some(a1), Some(gamma)) if rellich_valid => {
            let diff = a1 - &nu;
            let one_minus = q(1) - gamma;
            (Some(&diff * &diff), Some(&one_minus * &one_minus))
        }
        _ => (None, None),
    };
    let ledger = ConstantLedger {
        params: params.clone(),
        hardy_valid: a1.is_some(),
        a1,
        nu,
        gamma,
        a2,
        sigma,
        regime: regime(params),
        rellich_valid,
        grushin,
    };
    debug_assert!(ledger.a2.as_ref().is_none_or(|a2| *a2 == regime_formula(params)));
    ledger
}

impl ConstantLedger {
    pub fn a1_f64(&self) -> Option<f64> {
        self.a1.as_ref().map(ratio_to_f64)
    }

    pub fn nu_f64(&self) -> f64 {
        ratio_to_f64(&self.nu)
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma.as_ref().map_or(f64::INFINITY, ratio_to_f64)
    }

    pub fn a2_f64(&self) -> Option<f64> {
        self.a2.as_ref().map(ratio_to_f64)
    }

    /// Whether `a₂` is known to be optimal (only for `δ + δ' ≤ 4`).
    pub fn a2_is_sharp(&self) -> bool {
        self.rellich_valid && self.regime == Regime::SumAtMost4
    }

    /// Whether the stored `a₂` equals the regime formula exactly.
    pub fn formula_agrees(&self) -> bool {
        match &self.a2 {
            Some(a2) => *a2 == regime_formula(&self.params),
            None => true,
        }
    }

    /// Tabular rendering with exact and decimal values.
    pub fn render(&self) -> String {
        let exact = |v: &Option<BigRational>, missing: &str| match v {
            Some(v) => format!("{:<14} {:.12}", format_rational(v), ratio_to_f64(v)),
            None => missing.to_string(),
        };
        let mut out = String::new();
        let kind = if self.grushin { " (Grushin, d = d1)" } else { "" };
        out.push_str(&format!("parameters   {}{}\n", self.params, kind));
        out.push_str(&format!("regime       {}\n", self.regime));
        out.push_str(&format!("a1           {}\n", exact(&self.a1, "invalid (d + min(delta, delta') - 2 <= 0)")));
        out.push_str(&format!("nu           {}\n", exact(&Some(self.nu.clone()), "")));
        out.push_str(&format!("gamma        {}\n", exact(&self.gamma, "inf")));
        out.push_str(&format!("a2           {}\n", exact(&self.a2, "n/a")));
        out.push_str(&format!("sigma        {}\n", exact(&self.sigma, "n/a")));
        out.push_str(&format!("hardy_valid  {}\n", self.hardy_valid));
        out.push_str(&format!("rellich_valid {}\n", self.rellich_valid));
        if self.hardy_valid && !self.rellich_valid {
            out.push_str("criterion nu<a1 fails\n");
        }
        out
    }
}
