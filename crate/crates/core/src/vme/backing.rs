//! What sits behind the slave window.

use crate::board::{Board, ADC_BASE, DPRAM_BASE};

/// Word-addressed storage behind the window. Offsets are byte offsets from
/// the window base and always even.
pub trait Backing {
    fn read16(&mut self, offset: u32) -> Result<u16, String>;
    fn write16(&mut self, offset: u32, value: u16) -> Result<(), String>;
}

/// Plain RAM, for conformance runs that should not touch the board.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VmeRam {
    words: Vec<u16>,
}

impl VmeRam {
    pub fn new(size_bytes: u32) -> Self {
        Self {
            words: vec![0; (size_bytes / 2) as usize],
        }
    }

    pub fn peek(&self, offset: u32) -> u16 {
        self.words[(offset / 2) as usize]
    }

    pub fn words(&self) -> &[u16] {
        &self.words
    }
}

impl Backing for VmeRam {
    fn read16(&mut self, offset: u32) -> Result<u16, String> {
        self.words
            .get((offset / 2) as usize)
            .copied()
            .ok_or_else(|| format!("offset {offset:#x} beyond RAM"))
    }

    fn write16(&mut self, offset: u32, value: u16) -> Result<(), String> {
        let w = self
            .words
            .get_mut((offset / 2) as usize)
            .ok_or_else(|| format!("offset {offset:#x} beyond RAM"))?;
        *w = value;
        Ok(())
    }
}

/// Window size the board decodes.
pub const BOARD_WINDOW: u32 = 0x20_0000;
/// Where the CE3 peripheral pages start inside the window.
pub const VME_CE3_OFFSET: u32 = 0x10_0000;
const DPRAM_BYTES: u32 = 0x2_0000;
const CE3_BYTES: u32 = 0x4000;

/// EMIF address seen by the board for a window offset.
///
/// | window offset            | EMIF address            |
/// |--------------------------|-------------------------|
/// | `0x00_0000..0x02_0000`   | DPRAM, `0xA000_0000..`  |
/// | `0x10_0000..0x10_4000`   | CE3 pages, `0xB000_0000..` |
pub fn board_address(offset: u32) -> Option<u32> {
    if offset < DPRAM_BYTES {
        Some(DPRAM_BASE + offset)
    } else if (VME_CE3_OFFSET..VME_CE3_OFFSET + CE3_BYTES).contains(&offset) {
        Some(ADC_BASE + offset - VME_CE3_OFFSET)
    } else {
        None
    }
}

impl Backing for Board {
    fn read16(&mut self, offset: u32) -> Result<u16, String> {
        let addr =
            board_address(offset).ok_or_else(|| format!("offset {offset:#x} not decoded"))?;
        Board::read16(self, addr).map_err(|e| e.to_string())
    }

    fn write16(&mut self, offset: u32, value: u16) -> Result<(), String> {
        let addr =
            board_address(offset).ok_or_else(|| format!("offset {offset:#x} not decoded"))?;
        Board::write16(self, addr, value).map_err(|e| e.to_string())
    }
}
