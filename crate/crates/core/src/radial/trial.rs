//! Power-law trial functions `φ = r^{-α} ξ(r)` that approach the Hardy
//! constant from above as `α` tends to its critical value.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_vec, QuadTolerance};
use crate::weights::WeightProfile;

/// Which end of `(0, ∞)` the trial function concentrates at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialSide {
    Origin,
    Infinity,
}

/// Shape of the transition of `ξ` between its plateau and zero, in `ln r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Taper {
    Smooth,
    LogLinear,
}

/// `ξ` equals one on the plateau side of `[inner, outer]` and zero on the other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoff {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub taper: Taper,
}

impl Cutoff {
    /// One decade of smooth taper a decade away from `r = 1`, where `c` is
    /// already close to its power-law asymptote on the relevant side.
    pub fn default_for(side: TrialSide) -> Self {
        let (inner_radius, outer_radius) = match side {
            TrialSide::Origin => (0.01, 0.1),
            TrialSide::Infinity => (10.0, 100.0),
        };
        Cutoff {
            inner_radius,
            outer_radius,
            taper: Taper::Smooth,
        }
    }
}

/// `α = (d+δ−2−ε)/2` at the origin, `(d+δ'−2+ε)/2` at infinity.
pub fn trial_alpha(profile: &WeightProfile, side: TrialSide, eps: f64) -> f64 {
    let p = profile.params();
    let d = p.dim as f64;
    match side {
        TrialSide::Origin => (d + p.delta.value() - 2.0 - eps) / 2.0,
        TrialSide::Infinity => (d + p.delta_prime.value() - 2.0 + eps) / 2.0,
    }
}

/// `a(δ) = ((d+δ−2)/2)²` for the exponent governing `side`.
pub fn side_constant(profile: &WeightProfile, side: TrialSide) -> f64 {
    let alpha = trial_alpha(profile, side, 0.0);
    alpha * alpha
}

/// Taper value and `t`-derivative for `s ∈ [0,1]` running from plateau to zero.
fn taper(shape: Taper, s: f64, len: f64) -> (f64, f64) {
    match shape {
        Taper::Smooth => (0.5 * (1.0 + (PI * s).cos()), -0.5 * PI * (PI * s).sin() / len),
        Taper::LogLinear => (1.0 - s, -1.0 / len),
    }
}

/// `h(φ_α)/‖c^{1/2} r⁻¹ φ_α‖²` by quadrature.
///
/// On the plateau the numerator density is exactly `α²` times the
/// denominator density, so only the denominator is integrated there, after a
/// substitution that removes the endpoint singularity.
pub fn trial_quotient(profile: &WeightProfile, alpha: f64, cutoff: &Cutoff, side: TrialSide) -> Result<f64> {
    let (numerator, denominator) = trial_integrals(profile, alpha, cutoff, side)?;
    let q = numerator / denominator;
    if !q.is_finite() || !(denominator > 0.0) {
        return Err(Error::Overflow(format!("trial quotient at alpha = {alpha}")));
    }
    Ok(q)
}

/// `(h(φ_α), ‖c^{1/2} r⁻¹ φ_α‖²)`.
pub fn trial_integrals(profile: &WeightProfile, alpha: f64, cutoff: &Cutoff, side: TrialSide) -> Result<(f64, f64)> {
    let p = profile.params();
    let d = p.dim as f64;
    let (delta, delta_prime) = (p.delta.value(), p.delta_prime.value());
    let (r0, r1) = (cutoff.inner_radius, cutoff.outer_radius);
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(Error::Domain(format!("cutoff radii {r0}, {r1}")));
    }
    let tol = QuadTolerance::relative(1e-12);
    let power = delta + d - 3.0 - 2.0 * alpha;
    let plateau = match side {
        TrialSide::Origin => {
            let q = power + 1.0;
            if !(q > 0.0) {
                return Err(Error::Domain(format!(
                    "alpha = {alpha} makes the weighted integral diverge at the origin"
                )));
            }
            let inner = integrate(|v: f64| ((delta_prime - delta) * (r0 * v.powf(1.0 / q)).ln_1p()).exp(), 0.0, 1.0, tol)
                .map_err(|e| Error::Quadrature { element: 0, error: e.max_error() })?;
            (q * r0.ln()).exp() / q * inner.value[0]
        }
        TrialSide::Infinity => {
            let kappa = -(power + delta_prime - delta) - 1.0;
            if !(kappa > 0.0) {
                return Err(Error::Domain(format!(
                    "alpha = {alpha} makes the weighted integral diverge at infinity"
                )));
            }
            let inner = integrate(|v: f64| ((delta_prime - delta) * (v.powf(1.0 / kappa) / r1).ln_1p()).exp(), 0.0, 1.0, tol)
                .map_err(|e| Error::Quadrature { element: 0, error: e.max_error() })?;
            (-kappa * r1.ln()).exp() / kappa * inner.value[0]
        }
    };

    let (t0, t1) = (r0.ln(), r1.ln());
    let len = t1 - t0;
    let exponent = d - 2.0 - 2.0 * alpha;
    let shape = cutoff.taper;
    let band = integrate_vec(
        |t: f64| {
            let s = (t - t0) / len;
            let (mut xi, mut xi_t) = taper(shape, s, len);
            if side == TrialSide::Infinity {
                xi = 1.0 - xi;
                xi_t = -xi_t;
            }
            let w = (profile.ln_c(t.exp()) + exponent * t).exp();
            let slope = xi_t - alpha * xi;
            [w * slope * slope, w * xi * xi]
        },
        t0,
        t1,
        tol,
    )
    .map_err(|e| Error::Quadrature { element: 1, error: e.max_error() })?;

    Ok((alpha * alpha * plateau + band.value[0], plateau + band.value[1]))
}

/// `φ_α(r)` and `φ_α'(r)`.
pub fn trial_jet(alpha: f64, cutoff: &Cutoff, side: TrialSide, r: f64) -> (f64, f64) {
    let (t0, t1) = (cutoff.inner_radius.ln(), cutoff.outer_radius.ln());
    let t = r.ln();
    let (mut xi, mut xi_t) = if t <= t0 {
        (1.0, 0.0)
    } else if t >= t1 {
        (0.0, 0.0)
    } else {
        taper(cutoff.taper, (t - t0) / (t1 - t0), t1 - t0)
    };
    if side == TrialSide::Infinity {
        xi = 1.0 - xi;
        xi_t = -xi_t;
    }
    let p = (-alpha * t).exp();
    (p * xi, p * (xi_t - alpha * xi) / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightParams;

    fn profile(d: u32, a: f64, b: f64) -> WeightProfile {
        WeightProfile::new(WeightParams::new(d, a, b).unwrap())
    }

    /// Brute-force `h(φ)/‖c^{1/2}r⁻¹φ‖²` in `t = ln r` over a long finite window.
    fn brute(p: &WeightProfile, alpha: f64, cut: &Cutoff, side: TrialSide, lo: f64, hi: f64) -> f64 {
        let d = p.dim() as f64;
        let (t0, t1) = (cut.inner_radius.ln(), cut.outer_radius.ln());
        let tol = QuadTolerance { relative: 1e-10, absolute: 0.0, max_intervals: 20_000 };
        let q = integrate_vec(
            |t: f64| {
                let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
                let (mut xi, mut xi_t) = taper(cut.taper, s, t1 - t0);
                if !(t0..=t1).contains(&t) {
                    xi_t = 0.0;
                }
                if side == TrialSide::Infinity {
                    xi = 1.0 - xi;
                    xi_t = -xi_t;
                }
                let w = (p.ln_c(t.exp()) + (d - 2.0 - 2.0 * alpha) * t).exp();
                [w * (xi_t - alpha * xi).powi(2), w * xi * xi]
            },
            lo,
            hi,
            tol,
        )
        .unwrap();
        q.value[0] / q.value[1]
    }

    #[test]
    fn origin_example_bracket() {
        let p = profile(3, 0.0, 0.0);
        let alpha = trial_alpha(&p, TrialSide::Origin, 0.1);
        assert!((alpha - 0.45).abs() < 1e-15);
        let q = trial_quotient(&p, alpha, &Cutoff::default_for(TrialSide::Origin), TrialSide::Origin).unwrap();
        assert!(q > alpha * alpha && q <= 0.25 + 0.2, "{q}");
    }

    #[test]
    fn matches_truncated_brute_force() {
        // ε = 1 keeps the plateau tail short enough for a finite window
        for (p, side) in [
            (profile(3, 0.0, 0.0), TrialSide::Origin),
            (profile(3, 1.0, 3.0), TrialSide::Origin),
            (profile(3, 0.0, 4.0), TrialSide::Infinity),
            (profile(4, 2.0, 0.5), TrialSide::Infinity),
        ] {
            for taper in [Taper::Smooth, Taper::LogLinear] {
                let cut = Cutoff { inner_radius: 0.5, outer_radius: 20.0, taper };
                let alpha = trial_alpha(&p, side, 1.0);
                let exact = trial_quotient(&p, alpha, &cut, side).unwrap();
                let (lo, hi) = match side {
                    TrialSide::Origin => (-60.0, cut.outer_radius.ln()),
                    TrialSide::Infinity => (cut.inner_radius.ln(), 60.0),
                };
                let reference = brute(&p, alpha, &cut, side, lo, hi);
                assert!((exact - reference).abs() <= 1e-8 * reference, "{exact} vs {reference}");
            }
        }
    }

    #[test]
    fn decreases_towards_side_constant() {
        for (p, side) in [
            (profile(3, 0.0, 0.0), TrialSide::Origin),
            (profile(3, 0.0, 4.0), TrialSide::Infinity),
            (profile(5, 2.0, 2.0), TrialSide::Origin),
        ] {
            let target = side_constant(&p, side);
            let mut last = f64::INFINITY;
            for eps in [0.4, 0.2, 0.1, 0.05, 0.01] {
                let q = trial_quotient(&p, trial_alpha(&p, side, eps), &Cutoff::default_for(side), side).unwrap();
                assert!(q < last && q > target, "{eps}: {q}");
                last = q;
            }
            assert!(last < target * 1.05, "{last} vs {target}");
        }
    }

    #[test]
    fn out_of_range_alpha_is_rejected() {
        let p = profile(3, 0.0, 0.0);
        let cut = Cutoff::default_for(TrialSide::Origin);
        assert!(matches!(trial_quotient(&p, 0.5, &cut, TrialSide::Origin), Err(Error::Domain(_))));
        assert!(matches!(trial_quotient(&p, 0.5, &cut, TrialSide::Infinity), Err(Error::Domain(_))));
        let bad = Cutoff { inner_radius: 2.0, outer_radius: 1.0, taper: Taper::Smooth };
        assert!(trial_quotient(&p, 0.4, &bad, TrialSide::Origin).is_err());
    }
}
