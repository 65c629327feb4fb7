use serde::{Deserialize, Serialize};

use crate::constants::rellich_constant;
use crate::error::{Error, Result};
use crate::quadrature::QuadTolerance;
use crate::weights::WeightProfile;

use super::assembly::assemble;
use super::eigen::{hardy_quotient_min, rellich_quotient_min, QuotientEstimate, QuotientKind, SolverOptions};
use super::grid::{RadialGrid, Spacing};

/// One refinement step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

impl GridSpec {
    pub fn log(r_min: f64, r_max: f64, n: usize) -> Self {
        GridSpec {
            r_min,
            r_max,
            n,
            spacing: Spacing::Log,
        }
    }

    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_min, self.r_max, self.n, self.spacing)
    }
}

/// Domain and mesh grow together at about 128 nodes per decade.
pub fn default_schedule() -> Vec<GridSpec> {
    vec![
        GridSpec::log(1e-4, 1e4, 1025),
        GridSpec::log(1e-6, 1e6, 1537),
        GridSpec::log(1e-8, 1e8, 2049),
        GridSpec::log(1e-10, 1e10, 2561),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub target: f64,
    pub kind: QuotientKind,
    pub estimates: Vec<QuotientEstimate>,
    /// `estimate − target` per step.
    pub gaps: Vec<f64>,
    /// Gaps non-increasing up to `10⁻⁶·target`.
    pub monotone: bool,
    /// False when the target is only known to be a lower bound.
    pub sharp: bool,
}

impl ConvergenceReport {
    pub fn from_estimates(target: f64, kind: QuotientKind, sharp: bool, estimates: Vec<QuotientEstimate>) -> Self {
        let gaps: Vec<f64> = estimates.iter().map(|e| e.value - target).collect();
        let slack = 1e-6 * target;
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + slack);
        ConvergenceReport {
            target,
            kind,
            estimates,
            gaps,
            monotone,
            sharp,
        }
    }

    /// Every estimate lies above the target up to `10⁻⁶` relative.
    pub fn one_sided(&self) -> bool {
        self.gaps.iter().all(|g| *g >= -1e-6 * self.target)
    }

    pub fn final_estimate(&self) -> Option<&QuotientEstimate> {
        self.estimates.last()
    }

    pub fn final_relative_gap(&self) -> Option<f64> {
        self.gaps.last().map(|g| g / self.target)
    }
}

fn run(
    profile: &WeightProfile,
    schedule: &[GridSpec],
    opts: &SolverOptions,
    solve: fn(&super::AssembledForms, &SolverOptions) -> Result<QuotientEstimate>,
) -> Result<Vec<QuotientEstimate>> {
    schedule
        .iter()
        .enumerate()
        .map(|(step, spec)| {
            let wrap = |e: Error| Error::Refinement {
                step,
                source: Box::new(e),
            };
            let grid = spec.build().map_err(wrap)?;
            let forms = assemble(profile, &grid, QuadTolerance::default()).map_err(wrap)?;
            solve(&forms, opts).map_err(wrap)
        })
        .collect()
}

pub fn hardy_convergence(
    profile: &WeightProfile,
    schedule: &[GridSpec],
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    let ledger = rellich_constant(profile.params());
    let target = ledger
        .a1_f64()
        .ok_or_else(|| Error::Domain(format!("no Hardy inequality for {}", profile.params())))?;
    let estimates = run(profile, schedule, opts, hardy_quotient_min)?;
    Ok(ConvergenceReport::from_estimates(target, QuotientKind::Hardy, true, estimates))
}

/// Refuses to run when `ν < a₁` fails, since then there is no positive constant to approach.
pub fn rellich_convergence(
    profile: &WeightProfile,
    schedule: &[GridSpec],
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    let ledger = rellich_constant(profile.params());
    let target = match (ledger.rellich_valid, ledger.a2_f64()) {
        (true, Some(a2)) => a2,
        _ => {
            return Err(Error::Domain(format!(
                "criterion nu<a1 fails for {}",
                profile.params()
            )))
        }
    };
    let estimates = run(profile, schedule, opts, rellich_quotient_min)?;
    Ok(ConvergenceReport::from_estimates(
        target,
        QuotientKind::Rellich,
        ledger.a2_is_sharp(),
        estimates,
    ))
}
