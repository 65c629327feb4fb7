use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use hardy_rellich::weights::format_rational;
use hardy_rellich::{ConstantLedger, ConvergenceReport, Regime};

/// Exact and decimal renderings of a ledger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerSnapshot {
    pub dim: u32,
    pub delta: String,
    pub delta_prime: String,
    pub a1: Option<String>,
    pub a1_decimal: Option<f64>,
    pub nu: String,
    pub nu_decimal: f64,
    /// `None` when `a₁` does not exist.
    pub gamma: Option<String>,
    pub gamma_decimal: Option<f64>,
    pub a2: Option<String>,
    pub a2_decimal: Option<f64>,
    pub regime: Regime,
    pub hardy_valid: bool,
    pub rellich_valid: bool,
    pub a2_sharp: bool,
}

impl LedgerSnapshot {
    pub fn of(ledger: &ConstantLedger) -> Self {
        let p = &ledger.params;
        LedgerSnapshot {
            dim: p.dim,
            delta: p.delta.to_string(),
            delta_prime: p.delta_prime.to_string(),
            a1: ledger.a1.as_ref().map(format_rational),
            a1_decimal: ledger.a1_f64(),
            nu: format_rational(&ledger.nu),
            nu_decimal: ledger.nu_f64(),
            gamma: ledger.gamma.as_ref().map(format_rational),
            gamma_decimal: ledger.gamma.as_ref().map(|_| ledger.gamma_f64()),
            a2: ledger.a2.as_ref().map(format_rational),
            a2_decimal: ledger.a2_f64(),
            regime: ledger.regime,
            hardy_valid: ledger.hardy_valid,
            rellich_valid: ledger.rellich_valid,
            a2_sharp: ledger.a2_is_sharp(),
        }
    }
}

/// One row of a convergence CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub estimate: f64,
    pub target: f64,
    pub gap: f64,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub monotone: bool,
    pub one_sided: bool,
    pub sharp: bool,
    pub iterations: Vec<usize>,
    pub final_relative_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub run_id: String,
    pub command: String,
    /// Seconds since the Unix epoch, only when timings are recorded.
    pub timestamp: Option<u64>,
    pub ledger: LedgerSnapshot,
    pub estimates: Vec<EstimateRow>,
    pub gaps: Vec<f64>,
    pub diagnostics: Option<Diagnostics>,
}

impl ReportRecord {
    pub fn new(
        run_id: String,
        command: &str,
        ledger: &ConstantLedger,
        record_timings: bool,
    ) -> Self {
        let timestamp = record_timings.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        ReportRecord {
            run_id,
            command: command.to_string(),
            timestamp,
            ledger: LedgerSnapshot::of(ledger),
            estimates: Vec::new(),
            gaps: Vec::new(),
            diagnostics: None,
        }
    }

    /// Fills in estimates from a convergence report; `seconds` per step.
    pub fn with_convergence(mut self, report: &ConvergenceReport, seconds: &[f64]) -> Self {
        self.estimates = report
            .estimates
            .iter()
            .zip(&report.gaps)
            .enumerate()
            .map(|(i, (e, gap))| EstimateRow {
                n: e.grid.n,
                r_min: e.grid.r_min,
                r_max: e.grid.r_max,
                estimate: e.value,
                target: report.target,
                gap: *gap,
                residual: e.residual_norm,
                seconds: seconds.get(i).copied().unwrap_or(0.0),
            })
            .collect();
        self.gaps = report.gaps.clone();
        self.diagnostics = Some(Diagnostics {
            monotone: report.monotone,
            one_sided: report.one_sided(),
            sharp: report.sharp,
            iterations: report.estimates.iter().map(|e| e.iterations).collect(),
            final_relative_gap: report.final_relative_gap(),
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(path: &Path, record: &ReportRecord) -> anyhow::Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(record.to_json().as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use hardy_rellich::{rellich_constant, WeightParams};

    #[test]
    fn snapshot_keeps_exact_values() {
        let s = LedgerSnapshot::of(&rellich_constant(&WeightParams::new(5, 0.0, 0.0).unwrap()));
        assert_eq!(s.a1.as_deref(), Some("9/4"));
        assert_eq!(s.nu, "1");
        assert_eq!(s.gamma.as_deref(), Some("4/9"));
        assert_eq!(s.a2.as_deref(), Some("25/16"));
        assert_eq!(s.a2_decimal, Some(1.5625));
    }
}
