//! The metric `d₂` with line element `dl / d_Ω`, which on `(0, ∞)` with
//! `d_Ω(r) = r` is the log-ratio distance, and the cutoffs
//! `ρ_n = ρ(d₂(·; Ω∖Ω_n))` with `ρ(t) = (t/m) ∧ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form_calculus::{DiscreteForm, DiscreteFunction, Field};
use crate::radial::RadialGrid;

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} must be positive and finite")))
    }
}

/// `d₂(r₁; r₂) = |log(r₂/r₁)|`.
pub fn d2_distance(r1: f64, r2: f64) -> Result<f64> {
    check_radius(r1)?;
    check_radius(r2)?;
    Ok((r2.ln() - r1.ln()).abs())
}

/// Distances `log(r/δ₁)` from `r` to a decreasing list of boundary shells.
pub fn completeness_probe(r: f64, shells: &[f64]) -> Result<Vec<f64>> {
    check_radius(r)?;
    for s in shells {
        check_radius(*s)?;
    }
    if shells.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("shells must be strictly decreasing".into()));
    }
    Ok(shells.iter().map(|s| r.ln() - s.ln()).collect())
}

/// Index of the first shell whose distance from `r` exceeds `m`.
pub fn first_shell_beyond(r: f64, shells: &[f64], m: f64) -> Result<Option<usize>> {
    Ok(completeness_probe(r, shells)?.iter().position(|d| *d > m))
}

/// A log-symmetric shell `Ω = (inner, outer)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    /// `d₂(r; (0,∞)∖Ω)`, zero outside the shell.
    pub fn distance_to_complement(&self, r: f64) -> f64 {
        (r.ln() - self.inner.ln()).min(self.outer.ln() - r.ln()).max(0.0)
    }
}

/// `Ω_n = (10^{-n·step}, 10^{n·step})` for `n = 1..=depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Exhaustion {
    pub step_decades: f64,
    pub depth: usize,
}

impl Exhaustion {
    pub fn shells(&self) -> Vec<Shell> {
        (1..=self.depth)
            .map(|n| {
                let e = n as f64 * self.step_decades;
                Shell {
                    inner: 10f64.powf(-e),
                    outer: 10f64.powf(e),
                }
            })
            .collect()
    }
}

/// Grid, plateau scale and exhaustion used by the decay checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgmonConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
    pub m: f64,
    pub exhaustion: Exhaustion,
}

impl Default for AgmonConfig {
    /// The `ψ²` tail of the `ε = 0.1` Hardy trial function decays like
    /// `r^{0.1}`, so the shells must reach about `10⁻⁶⁰` before the cutoff
    /// energy drops below `10⁻⁶·E(φ)`.
    fn default() -> Self {
        AgmonConfig {
            r_min: 1e-64,
            r_max: 1e64,
            nodes_per_decade: 20,
            m: 1.0,
            exhaustion: Exhaustion {
                step_decades: 1.0,
                depth: 62,
            },
        }
    }
}

impl AgmonConfig {
    pub fn grid(&self) -> Result<RadialGrid> {
        let decades = (self.r_max / self.r_min).log10();
        let n = (decades * self.nodes_per_decade as f64).round() as usize + 1;
        RadialGrid::log(self.r_min, self.r_max, n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSequence {
    pub m: f64,
    pub shells: Vec<Shell>,
    pub grid: RadialGrid,
    /// Nodal values of `ρ_n`, read as piecewise linear in `log r`.
    pub values: Vec<DiscreteFunction>,
}

/// `ρ_n(r) = (d₂(r; Ω∖Ω_n)/m) ∧ 1` and its derivative in `r`.
fn rho_jet(shell: &Shell, m: f64, r: f64) -> (f64, f64) {
    let (li, lo) = (r.ln() - shell.inner.ln(), shell.outer.ln() - r.ln());
    let t = li.min(lo);
    if t <= 0.0 || t >= m {
        return ((t / m).clamp(0.0, 1.0), 0.0);
    }
    let slope = if li <= lo { 1.0 } else { -1.0 };
    (t / m, slope / (m * r))
}

pub fn build_cutoffs(grid: &RadialGrid, m: f64, exhaustion: &Exhaustion) -> Result<CutoffSequence> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("plateau scale m = {m} must be positive")));
    }
    let shells = exhaustion.shells();
    if let Some(last) = shells.last() {
        if last.inner < grid.r_min() || last.outer > grid.r_max() {
            return Err(Error::Domain(format!(
                "deepest shell ({:e}, {:e}) leaves the grid [{:e}, {:e}]",
                last.inner,
                last.outer,
                grid.r_min(),
                grid.r_max()
            )));
        }
    }
    let values = shells
        .iter()
        .map(|s| DiscreteFunction::from_fn(grid, |r| rho_jet(s, m, r).0))
        .collect::<Result<_>>()?;
    Ok(CutoffSequence {
        m,
        shells,
        grid: grid.clone(),
        values,
    })
}

impl CutoffSequence {
    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn rho(&self, n: usize, r: f64) -> (f64, f64) {
        rho_jet(&self.shells[n], self.m, r)
    }

    pub fn field(&self, form: &DiscreteForm, n: usize) -> Field {
        form.analytic(|r| self.rho(n, r))
    }

    /// `r ∈ Ω_{m,n}`, where `d₂(r; Ω∖Ω_n) ≤ m` and `∇ρ_n` may be nonzero.
    pub fn in_transition(&self, n: usize, r: f64) -> bool {
        self.shells[n].distance_to_complement(r) <= self.m
    }

    /// Largest `d_Ω²|∇ρ_n|² − m⁻²` over elements and `n`, with the gradient
    /// taken as the difference quotient in `log r`.
    pub fn eikonal_excess(&self) -> f64 {
        let logs: Vec<f64> = self.grid.nodes().iter().map(|r| r.ln()).collect();
        let bound = 1.0 / (self.m * self.m);
        self.values
            .iter()
            .flat_map(|rho| {
                logs.windows(2)
                    .zip(rho.values.windows(2))
                    .map(|(t, v)| ((v[1] - v[0]) / (t[1] - t[0])).powi(2) - bound)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|ρ_n(x) − ρ_n(y)| − d₂(x;y)/m` over node pairs.
    ///
    /// On a line the metric is additive, so adjacent pairs suffice.
    pub fn lipschitz_excess(&self) -> f64 {
        let nodes = self.grid.nodes();
        self.values
            .iter()
            .flat_map(|rho| {
                nodes.windows(2).zip(rho.values.windows(2)).map(|(r, v)| {
                    (v[1] - v[0]).abs() - d2_distance(r[0], r[1]).expect("grid nodes are positive") / self.m
                })
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The same excess over all node pairs; quadratic in the grid size.
    pub fn lipschitz_excess_all_pairs(&self) -> f64 {
        let nodes = self.grid.nodes();
        let mut worst = f64::NEG_INFINITY;
        for rho in &self.values {
            for i in 0..nodes.len() {
                for j in i + 1..nodes.len() {
                    let d = d2_distance(nodes[i], nodes[j]).expect("grid nodes are positive");
                    worst = worst.max((rho.values[j] - rho.values[i]).abs() - d / self.m);
                }
            }
        }
        worst
    }
}

/// `h_{φ²}(ρ_n)` with its a-priori bound `m⁻² ∫_{Ω_{m,n}} ψ²`, `ψ = c^{1/2} r⁻¹ φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTerm {
    pub n: usize,
    pub value: f64,
    pub bound: f64,
}

pub fn energy_decay(form: &DiscreteForm, cutoffs: &CutoffSequence, phi: &Field) -> Vec<DecayTerm> {
    let profile = form.profile();
    let phi2 = phi.square();
    let psi2: Vec<f64> = form
        .points()
        .iter()
        .zip(phi2.jets())
        .map(|(r, p)| profile.c(*r) * p.v / (r * r))
        .collect();
    (0..cutoffs.len())
        .map(|n| {
            let rho = cutoffs.field(form, n);
            let mask = form.analytic(|r| (if cutoffs.in_transition(n, r) { 1.0 } else { 0.0 }, 0.0));
            let tail = Field(
                mask.jets()
                    .iter()
                    .zip(&psi2)
                    .map(|(m, p)| crate::form_calculus::Jet::constant(m.v * p))
                    .collect(),
            );
            DecayTerm {
                n: n + 1,
                value: form.carre(&phi2, &rho),
                bound: form.inner(&tail, &form.constant(1.0)) / (cutoffs.m * cutoffs.m),
            }
        })
        .collect()
}

/// `‖(ρ_n − 1)φ‖² + E((ρ_n − 1)φ)` for every `n`.
pub fn graph_norm_defect(form: &DiscreteForm, cutoffs: &CutoffSequence, phi: &Field) -> Vec<f64> {
    let one = form.constant(1.0);
    (0..cutoffs.len())
        .map(|n| {
            let g = &(&cutoffs.field(form, n) - &one) * phi;
            form.inner(&g, &g) + form.energy(&g, &g)
        })
        .collect()
}
