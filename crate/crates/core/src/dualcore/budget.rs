//! Multiply-accumulate budget of the adaptive filter against the board.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Peak multiply-accumulate rate of the board.
pub const BOARD_MACS_PER_SECOND: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FilterKind {
    Fir,
    /// Equation-error IIR with `na` feedback taps.
    Iir {
        na: usize,
    },
}

impl FromStr for FilterKind {
    type Err = String;

    /// `fir`, or `iir:<na>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "fir" {
            return Ok(FilterKind::Fir);
        }
        s.strip_prefix("iir:")
            .and_then(|na| na.parse().ok())
            .map(|na| FilterKind::Iir { na })
            .ok_or_else(|| format!("unknown topology {s:?} (expected `fir` or `iir:<na>`)"))
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::Fir => write!(f, "fir"),
            FilterKind::Iir { na } => write!(f, "iir:{na}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacBudget {
    pub macs_per_sample: u64,
    pub sample_rate_hz: f64,
    pub macs_per_second: f64,
    pub budget_macs_per_second: f64,
    pub utilization: f64,
}

impl MacBudget {
    pub fn over_budget(&self) -> bool {
        self.utilization > 1.0
    }

    pub fn to_table(&self) -> String {
        format!(
            "macs_per_sample         {}\n\
             sample_rate_hz          {}\n\
             macs_per_second         {:.6e}\n\
             budget_macs_per_second  {:.6e}\n\
             utilization             {:.6}\n\
             over_budget             {}\n",
            self.macs_per_sample,
            self.sample_rate_hz,
            self.macs_per_second,
            self.budget_macs_per_second,
            self.utilization,
            self.over_budget()
        )
    }

    pub fn to_csv(&self) -> String {
        format!(
            "macs_per_sample,sample_rate_hz,macs_per_second,budget_macs_per_second,utilization,over_budget\n{},{},{},{},{},{}\n",
            self.macs_per_sample,
            self.sample_rate_hz,
            self.macs_per_second,
            self.budget_macs_per_second,
            self.utilization,
            self.over_budget()
        )
    }
}

/// One MAC per regressor entry for the filter and one for the update.
pub fn mac_budget(num_taps: usize, kind: FilterKind, sample_rate_hz: f64) -> MacBudget {
    let regressor = match kind {
        FilterKind::Fir => num_taps,
        FilterKind::Iir { na } => num_taps + na,
    } as u64;
    let macs_per_sample = 2 * regressor;
    let macs_per_second = macs_per_sample as f64 * sample_rate_hz;
    MacBudget {
        macs_per_sample,
        sample_rate_hz,
        macs_per_second,
        budget_macs_per_second: BOARD_MACS_PER_SECOND,
        utilization: macs_per_second / BOARD_MACS_PER_SECOND,
    }
}
