use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Uniform,
}

/// Nodes on `[r_min, r_max]`; both end nodes carry Dirichlet conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    spacing: Spacing,
}

/// What a report needs to identify a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialGrid {
    /// Log-uniform nodes: `ln(r_{i+1}/r_i)` is constant.
    pub fn log(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        check(r_min, r_max, n)?;
        let span = (r_max / r_min).ln();
        let mut nodes: Vec<f64> = (0..n)
            .map(|i| r_min * (span * i as f64 / (n - 1) as f64).exp())
            .collect();
        nodes[0] = r_min;
        nodes[n - 1] = r_max;
        Ok(RadialGrid {
            nodes,
            spacing: Spacing::Log,
        })
    }

    pub fn uniform(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        check(r_min, r_max, n)?;
        let h = (r_max - r_min) / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| r_min + h * i as f64).collect();
        nodes[n - 1] = r_max;
        Ok(RadialGrid {
            nodes,
            spacing: Spacing::Uniform,
        })
    }

    pub fn new(r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Result<Self> {
        match spacing {
            Spacing::Log => Self::log(r_min, r_max, n),
            Spacing::Uniform => Self::uniform(r_min, r_max, n),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    /// Number of nodes carrying unknowns after removing the Dirichlet ends.
    pub fn interior(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn summary(&self) -> GridSummary {
        GridSummary {
            n: self.len(),
            r_min: self.r_min(),
            r_max: self.r_max(),
        }
    }
}

fn check(r_min: f64, r_max: f64, n: usize) -> Result<()> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::Domain(format!(
            "grid interval [{r_min:e}, {r_max:e}] must satisfy 0 < r_min < r_max < inf"
        )));
    }
    if n < 3 {
        return Err(Error::Domain(format!("grid needs at least 3 nodes, got {n}")));
    }
    Ok(())
}
