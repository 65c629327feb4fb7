use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use hardy_rellich::agmon::AgmonConfig;
use hardy_rellich::grushin::BProfile;
use hardy_rellich::radial::{default_schedule, GridSpec, SolverOptions};
use hardy_rellich::{Exponent, WeightParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level run configuration, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weights: WeightsBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub identities: IdentitiesBlock,
    #[serde(default)]
    pub agmon: AgmonConfig,
    #[serde(default)]
    pub grushin: GrushinBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub report: ReportBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            weights: WeightsBlock::default(),
            grid: GridBlock::default(),
            solver: SolverOptions::default(),
            identities: IdentitiesBlock::default(),
            agmon: AgmonConfig::default(),
            grushin: GrushinBlock::default(),
            sweep: SweepBlock::default(),
            report: ReportBlock::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsBlock {
    pub dim: u32,
    pub delta: Exponent,
    pub delta_prime: Exponent,
}

impl Default for WeightsBlock {
    fn default() -> Self {
        WeightsBlock {
            dim: 3,
            delta: Exponent::from_integer(0),
            delta_prime: Exponent::from_integer(0),
        }
    }
}

impl WeightsBlock {
    pub fn params(&self) -> anyhow::Result<WeightParams> {
        Ok(WeightParams::from_exponents(
            self.dim,
            self.delta.clone(),
            self.delta_prime.clone(),
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub schedule: Vec<GridSpec>,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            schedule: default_schedule(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesBlock {
    pub samples: usize,
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub dims: Vec<u32>,
    pub exponents: Vec<Exponent>,
    pub equality_tolerance: f64,
    pub inequality_slack: f64,
}

impl Default for IdentitiesBlock {
    fn default() -> Self {
        IdentitiesBlock {
            samples: 1000,
            nodes: 33,
            r_min: 1e-2,
            r_max: 1e2,
            dims: vec![1, 3, 5],
            exponents: [0, 1, 2, 4]
                .into_iter()
                .map(Exponent::from_integer)
                .collect(),
            equality_tolerance: 1e-10,
            inequality_slack: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrushinBlock {
    pub dim2: u32,
    pub b: BProfile,
    pub half_width: f64,
    pub second_nodes: usize,
    pub schedule: Vec<GridSpec>,
}

impl Default for GrushinBlock {
    fn default() -> Self {
        GrushinBlock {
            dim2: 1,
            b: BProfile::default(),
            half_width: 1.0,
            second_nodes: 65,
            schedule: hardy_rellich::grushin::default_schedule(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepBlock {
    pub dims: Vec<u32>,
    pub exponents: Vec<Exponent>,
    /// Also run the Hardy (and, where valid, Rellich) solvers per cell.
    pub verify: bool,
    pub schedule: Vec<GridSpec>,
}

impl Default for SweepBlock {
    fn default() -> Self {
        SweepBlock {
            dims: (1..=8).collect(),
            exponents: ["0", "1/2", "1", "2", "3", "4"]
                .iter()
                .map(|s| s.parse().expect("literal exponents parse"))
                .collect(),
            verify: false,
            schedule: vec![GridSpec::log(1e-3, 1e3, 385)],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportBlock {
    /// Wall-clock seconds and a timestamp in reports. Off by default so that
    /// identical configs give identical bytes.
    pub record_timings: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        self.weights.params()?;
        let s = &self.solver;
        if s.max_iterations == 0 || !(s.residual_tolerance > 0.0) || !(s.bisection_tolerance > 0.0)
        {
            bail!("solver tolerances must be positive and max_iterations nonzero");
        }
        for spec in self
            .grid
            .schedule
            .iter()
            .chain(&self.grushin.schedule)
            .chain(&self.sweep.schedule)
        {
            spec.build().with_context(|| format!("grid {spec:?}"))?;
        }
        let id = &self.identities;
        if id.nodes < 3 || !(id.r_min > 0.0 && id.r_max > id.r_min) {
            bail!("identities grid needs r_max > r_min > 0 and at least 3 nodes");
        }
        if !(id.equality_tolerance > 0.0 && id.inequality_slack >= 0.0) {
            bail!("identity tolerances must be positive");
        }
        let a = &self.agmon;
        if !(a.m > 0.0) || a.nodes_per_decade == 0 || !(a.r_min > 0.0 && a.r_max > a.r_min) {
            bail!("agmon block needs m > 0, nodes_per_decade > 0 and r_max > r_min > 0");
        }
        if self.grushin.dim2 == 0 {
            bail!("grushin.dim2 must be positive");
        }
        self.grushin.b.validate()?;
        Ok(())
    }

    /// Canonical TOML rendering; hashes of it identify runs.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn run_id(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(self.canonical().as_bytes());
        hex::encode(h.finalize())
    }
}
