use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::siggen::RngStream;
use crate::{db_to_linear, linear_to_db};

/// Average transmitted power `S`. A "1" carries `2S`, a pause none.
pub const AVERAGE_SIGNAL_POWER: f64 = 1.0;

/// Second axis of an experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grid {
    SnrDb(Vec<f64>),
    EbN0Db(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> &[f64] {
        match self {
            Grid::SnrDb(v) | Grid::EbN0Db(v) => v,
        }
    }
}

/// One `(n, S/N)` operating point with its Eb/N0 equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridValue {
    pub n: usize,
    pub snr: f64,
    pub snr_db: f64,
    pub ebn0: f64,
    pub ebn0_db: f64,
}

impl GridValue {
    pub fn from_snr_db(n: usize, snr_db: f64) -> Self {
        let snr = db_to_linear(snr_db);
        let ebn0 = snr * n as f64 / 2.0;
        Self {
            n,
            snr,
            snr_db,
            ebn0,
            ebn0_db: linear_to_db(ebn0),
        }
    }

    pub fn from_ebn0_db(n: usize, ebn0_db: f64) -> Self {
        let ebn0 = db_to_linear(ebn0_db);
        let snr = 2.0 * ebn0 / n as f64;
        Self {
            n,
            snr,
            snr_db: linear_to_db(snr),
            ebn0,
            ebn0_db,
        }
    }

    /// Per-sample noise variance giving this S/N at unit average power.
    pub fn noise_power(&self) -> f64 {
        AVERAGE_SIGNAL_POWER / self.snr
    }

    pub fn s1_power(&self) -> f64 {
        2.0 * AVERAGE_SIGNAL_POWER
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub n_values: Vec<usize>,
    pub grid: Grid,
    pub symbols_per_point: usize,
    pub training_symbols: usize,
    /// Grid points whose analytic Pb falls below this are not simulated.
    pub pb_floor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            n_values: vec![105],
            grid: Grid::EbN0Db(vec![6.0, 8.0, 10.0, 12.0]),
            symbols_per_point: 200_000,
            training_symbols: 10_000,
            pb_floor: 1e-5,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.grid.values().is_empty() {
            return invalid("experiment grid is empty");
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return invalid(format!("samples per symbol must be at least 2, got {n}"));
        }
        if let Some(v) = self.grid.values().iter().find(|v| !v.is_finite()) {
            return invalid(format!("grid values must be finite, got {v}"));
        }
        if self.training_symbols < 4 {
            return invalid("need at least 4 training symbols");
        }
        if self.symbols_per_point == 0 {
            return invalid("need at least one payload symbol per point");
        }
        if !(self.pb_floor > 0.0 && self.pb_floor < 0.5) {
            return invalid(format!(
                "Pb floor must lie in (0, 0.5), got {}",
                self.pb_floor
            ));
        }
        Ok(())
    }

    /// Every grid cell, `n` outermost.
    pub fn cells(&self) -> Vec<GridValue> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &v in self.grid.values() {
                cells.push(match self.grid {
                    Grid::SnrDb(_) => GridValue::from_snr_db(n, v),
                    Grid::EbN0Db(_) => GridValue::from_ebn0_db(n, v),
                });
            }
        }
        cells
    }

    /// Stream of one cell, keyed by its coordinates rather than its
    /// position so that editing the grid leaves other cells untouched.
    pub fn cell_stream(&self, n: usize, grid_value: f64) -> RngStream {
        RngStream::new(self.master_seed, 0)
            .child(n as u64)
            .child(grid_value.to_bits())
    }

    /// Stream of a cell produced by [`cells`](Self::cells).
    pub fn stream_for(&self, cell: &GridValue) -> RngStream {
        match self.grid {
            Grid::SnrDb(_) => self.cell_stream(cell.n, cell.snr_db),
            Grid::EbN0Db(_) => self.cell_stream(cell.n, cell.ebn0_db),
        }
    }

    /// Warnings about settings that undermine the binomial intervals.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        let needed = (100.0 / self.pb_floor).ceil();
        if (self.symbols_per_point as f64) < needed {
            out.push(format!(
                "{} symbols per point is below 100/pb_floor = {needed}; intervals near the floor rest on few errors",
                self.symbols_per_point
            ));
        }
        out
    }
}
