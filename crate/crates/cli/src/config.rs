//! Run configuration shared by the CLI, the runner, and the reports.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use picmm_core::{AssemblyOptions, Grid, Kind, Order, PrecisionPolicy, TileShape};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Scalar,
    Tensorial,
}

impl KindArg {
    pub fn core(self) -> Kind {
        match self {
            KindArg::Scalar => Kind::Scalar,
            KindArg::Tensorial => Kind::Tensorial,
        }
    }
}

/// Built-in tile/precision profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum TileProfile {
    #[value(name = "fp64-8x8x4", alias = "fp64")]
    #[serde(rename = "fp64-8x8x4")]
    Fp64,
    #[value(name = "tf32-16x16x8", alias = "tf32")]
    #[serde(rename = "tf32-16x16x8")]
    Tf32,
}

impl TileProfile {
    pub fn tile(self) -> TileShape {
        match self {
            TileProfile::Fp64 => TileShape::FP64_8X8X4,
            TileProfile::Tf32 => TileShape::TF32_16X16X8,
        }
    }

    pub fn policy(self) -> PrecisionPolicy {
        match self {
            TileProfile::Fp64 => PrecisionPolicy::FP64,
            TileProfile::Tf32 => PrecisionPolicy::TF32,
        }
    }

    /// Default pairing: CIC runs FP64, TSC runs TF32.
    pub fn default_for_order(order: usize) -> TileProfile {
        if order == 1 {
            TileProfile::Fp64
        } else {
            TileProfile::Tf32
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Positions i.i.d. uniform within each cell.
    Uniform,
    /// Positions biased 7:1 toward the lower half of each cell per axis,
    /// stressing support-group imbalance for TSC.
    Clustered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dims: Vec<usize>,
    pub spacing: f64,
    pub order: usize,
    pub kind: KindArg,
    pub ppc: usize,
    pub profile: TileProfile,
    pub seed: u64,
    pub repeats: usize,
    pub threads: usize,
    pub distribution: Distribution,
}

impl RunConfig {
    pub fn order_core(&self) -> Result<Order> {
        Order::from_n(self.order).context("unsupported interpolation order")
    }

    pub fn grid(&self) -> Result<Grid> {
        let spacing = vec![self.spacing; self.dims.len()];
        Grid::new(&self.dims, &spacing).context("invalid grid")
    }

    pub fn assembly_options(&self) -> Result<AssemblyOptions> {
        Ok(AssemblyOptions::new(
            self.order_core()?,
            self.kind.core(),
            self.profile.tile(),
            self.profile.policy(),
        ))
    }

    /// Feasibility checks for a benchmark run. Grids must hold at least
    /// 2(n+1) cells per axis so periodic stencils never alias.
    pub fn validate(&self) -> Result<()> {
        let order = self.order_core()?;
        if self.dims.is_empty() || self.dims.len() > 3 {
            bail!("dims must list 1 to 3 axes, got {}", self.dims.len());
        }
        if self.repeats < 1 {
            bail!("repeats must be at least 1");
        }
        if self.threads < 1 {
            bail!("threads must be at least 1");
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            bail!("spacing must be positive");
        }
        let min_cells = 2 * (order.n() + 1);
        for (axis, &cells) in self.dims.iter().enumerate() {
            if cells < min_cells {
                bail!(
                    "grid too small for order {}: axis {} has {} cells, need at least {}",
                    order.n(),
                    axis,
                    cells,
                    min_cells
                );
            }
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dims: vec![16, 16, 16],
            spacing: 1.0,
            order: 1,
            kind: KindArg::Scalar,
            ppc: 16,
            profile: TileProfile::Fp64,
            seed: 1,
            repeats: 3,
            threads: 1,
            distribution: Distribution::Uniform,
        }
    }
}
