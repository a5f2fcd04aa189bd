//! Placement of the pipeline's shared state in the dual-port RAM.
//!
//! | region            | words              | contents                                  |
//! |-------------------|--------------------|-------------------------------------------|
//! | `flag_data_ready` | 1                  | 0 = slot free, else block tag             |
//! | `flag_coeff_ready`| 1                  | 0 = slot free, else block tag             |
//! | `seqno`           | 1                  | block number (mod 2^16) of the data slot   |
//! | coefficients      | 2 · `coeff_count`  | binary32 pairs, tap 0 first               |
//! | data              | 4 · `block_len`    | `block_len` regressor heads, then errors  |
//!
//! The textual form is one `key = 0xHEX` line per field, e.g.
//!
//! ```text
//! coeff_base = 0x0010
//! coeff_count = 0x0020
//! data_base = 0x0100
//! block_len = 0x0040
//! flag_data_ready = 0x0000
//! flag_coeff_ready = 0x0001
//! seqno = 0x0002
//! ```

use super::dpram::DPRAM_WORDS;
use serde::Deserialize;
use std::fmt::Write as _;
use std::ops::Range;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("{0} must be at least 1")]
    Empty(&'static str),
    #[error("region {name} ({start:#x}..{end:#x}) does not fit in the 64K word space")]
    OutOfSpace {
        name: &'static str,
        start: usize,
        end: usize,
    },
    #[error("regions {0} and {1} overlap")]
    Overlap(&'static str, &'static str),
    #[error("layout text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharedLayout {
    pub coeff_base: u32,
    pub coeff_count: u32,
    pub data_base: u32,
    pub block_len: u32,
    pub flag_data_ready: u32,
    pub flag_coeff_ready: u32,
    pub seqno: u32,
}

impl SharedLayout {
    /// Flags at 0..3, coefficients from 0x10, data on the next 256-word page.
    pub fn standard(coeff_count: usize, block_len: usize) -> Result<Self, LayoutError> {
        let coeff_base = 0x10usize;
        let data_base = (coeff_base + 2 * coeff_count).div_ceil(0x100) * 0x100;
        let to_u32 = |v: usize, name| {
            u32::try_from(v).map_err(|_| LayoutError::OutOfSpace {
                name,
                start: v,
                end: v,
            })
        };
        let layout = Self {
            coeff_base: coeff_base as u32,
            coeff_count: to_u32(coeff_count, "coefficients")?,
            data_base: to_u32(data_base, "data")?,
            block_len: to_u32(block_len, "data")?,
            flag_data_ready: 0,
            flag_coeff_ready: 1,
            seqno: 2,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn coeff_region(&self) -> Range<usize> {
        let s = self.coeff_base as usize;
        s..s + 2 * self.coeff_count as usize
    }

    pub fn data_region(&self) -> Range<usize> {
        let s = self.data_base as usize;
        s..s + 4 * self.block_len as usize
    }

    /// Address of the `i`-th regressor head in the data slot.
    pub fn regressor_addr(&self, i: usize) -> u32 {
        self.data_base + 2 * i as u32
    }

    /// Address of the `i`-th error in the data slot.
    pub fn error_addr(&self, i: usize) -> u32 {
        self.data_base + 2 * (self.block_len as usize + i) as u32
    }

    pub fn coeff_addr(&self, i: usize) -> u32 {
        self.coeff_base + 2 * i as u32
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.coeff_count == 0 {
            return Err(LayoutError::Empty("coeff_count"));
        }
        if self.block_len == 0 {
            return Err(LayoutError::Empty("block_len"));
        }
        let single = |a: u32| a as usize..a as usize + 1;
        let regions = [
            ("flag_data_ready", single(self.flag_data_ready)),
            ("flag_coeff_ready", single(self.flag_coeff_ready)),
            ("seqno", single(self.seqno)),
            ("coefficients", self.coeff_region()),
            ("data", self.data_region()),
        ];
        for (name, r) in &regions {
            if r.end > DPRAM_WORDS {
                return Err(LayoutError::OutOfSpace {
                    name,
                    start: r.start,
                    end: r.end,
                });
            }
        }
        for (i, (na, ra)) in regions.iter().enumerate() {
            for (nb, rb) in &regions[i + 1..] {
                if ra.start < rb.end && rb.start < ra.end {
                    return Err(LayoutError::Overlap(na, nb));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, LayoutError> {
        let layout: Self = toml::from_str(text).map_err(|e| LayoutError::Parse(e.to_string()))?;
        layout.validate()?;
        Ok(layout)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("coeff_base", self.coeff_base),
            ("coeff_count", self.coeff_count),
            ("data_base", self.data_base),
            ("block_len", self.block_len),
            ("flag_data_ready", self.flag_data_ready),
            ("flag_coeff_ready", self.flag_coeff_ready),
            ("seqno", self.seqno),
        ] {
            let _ = writeln!(s, "{k} = 0x{v:04X}");
        }
        s
    }
}
