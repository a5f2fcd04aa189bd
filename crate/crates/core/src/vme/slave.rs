//! The slave state machine.

use super::{Backing, BerrReason, BusResult, Outcome, StatusWidth, VmeError, VmeTransaction};

/// Address phase plus one data phase.
pub const SINGLE_CYCLES: u32 = 4;
/// Address phase plus read and write data phases.
pub const RMW_CYCLES: u32 = 6;
pub const ADO_CYCLES: u32 = 2;
pub const BERR_CYCLES: u32 = 3;
/// Bus timer for cycles nobody answers.
pub const BUS_TIMEOUT_CYCLES: u32 = 16;
/// BLT transfers may not cross a 256-byte boundary.
pub const BLOCK_BOUNDARY: u32 = 256;

const ADDRESS_PHASE: u32 = 2;
const DATA_PHASE: u32 = 2;

#[derive(Debug, Clone)]
pub struct VmeSlave<B> {
    base: u32,
    window: u32,
    backing: B,
    pipeline_reg: Option<u32>,
    pending: [Option<(u16, StatusWidth)>; 7],
}

impl<B: Backing> VmeSlave<B> {
    pub fn new(base: u32, window: u32, backing: B) -> Result<Self, VmeError> {
        if window == 0
            || !window.is_multiple_of(2)
            || !base.is_multiple_of(2)
            || base as u64 + window as u64 > 1 << 32
        {
            return Err(VmeError::InvalidWindow);
        }
        Ok(Self {
            base,
            window,
            backing,
            pipeline_reg: None,
            pending: [None; 7],
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn backing(&self) -> &B {
        &self.backing
    }

    pub fn backing_mut(&mut self) -> &mut B {
        &mut self.backing
    }

    pub fn into_backing(self) -> B {
        self.backing
    }

    pub fn pipeline_reg(&self) -> Option<u32> {
        self.pipeline_reg
    }

    pub fn pending(&self, level: u8) -> Option<(u16, StatusWidth)> {
        (1..=7)
            .contains(&level)
            .then(|| self.pending[level as usize - 1])
            .flatten()
    }

    fn offset(&self, address: u32) -> Result<u32, BerrReason> {
        address
            .checked_sub(self.base)
            .filter(|&o| o < self.window)
            .ok_or(BerrReason::OutOfWindow(address))
    }

    fn aligned_offset(&self, address: u32) -> Result<u32, BerrReason> {
        let o = self.offset(address)?;
        if !address.is_multiple_of(2) {
            return Err(BerrReason::Alignment(address));
        }
        Ok(o)
    }

    fn read(&mut self, offset: u32) -> Result<u16, BerrReason> {
        self.backing.read16(offset).map_err(BerrReason::Device)
    }

    fn write(&mut self, offset: u32, value: u16) -> Result<(), BerrReason> {
        self.backing
            .write16(offset, value)
            .map_err(BerrReason::Device)
    }

    fn block(&self, address: u32, count: usize) -> Result<u32, BerrReason> {
        if count == 0 {
            return Err(BerrReason::EmptyBlock);
        }
        let start = self.aligned_offset(address)?;
        let last = address as u64 + 2 * count as u64 - 1;
        if address as u64 / BLOCK_BOUNDARY as u64 != last / BLOCK_BOUNDARY as u64 {
            return Err(BerrReason::BlockBoundary { address, count });
        }
        // Same 256-byte page, so `last` fits in u32.
        self.offset(last as u32)?;
        Ok(start)
    }

    /// Runs one data cycle, returning the data and the cycles it took.
    fn data_cycle(&mut self, txn: &VmeTransaction) -> Result<(Vec<u16>, u32), BerrReason> {
        use VmeTransaction::*;
        let single = ADDRESS_PHASE + DATA_PHASE;
        match *txn {
            D16Read { address } => {
                let o = self.aligned_offset(address)?;
                Ok((vec![self.read(o)?], single))
            }
            D16Write { address, data } => {
                let o = self.aligned_offset(address)?;
                self.write(o, data)?;
                Ok((vec![], single))
            }
            D08Read { address } => {
                let o = self.offset(address)?;
                let word = self.read(o & !1)?;
                let byte = if o % 2 == 0 { word >> 8 } else { word & 0xFF };
                Ok((vec![byte], single))
            }
            D08Write { address, data } => {
                let o = self.offset(address)?;
                let word = self.read(o & !1)?;
                let merged = if o % 2 == 0 {
                    (word & 0x00FF) | (data as u16) << 8
                } else {
                    (word & 0xFF00) | data as u16
                };
                self.write(o & !1, merged)?;
                Ok((vec![], single))
            }
            BltRead { address, count } => {
                let start = self.block(address, count)?;
                let data = (0..count as u32)
                    .map(|i| self.read(start + 2 * i))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((data, ADDRESS_PHASE + DATA_PHASE * count as u32))
            }
            BltWrite { address, ref data } => {
                let start = self.block(address, data.len())?;
                for (i, &w) in data.iter().enumerate() {
                    self.write(start + 2 * i as u32, w)?;
                }
                Ok((vec![], ADDRESS_PHASE + DATA_PHASE * data.len() as u32))
            }
            Rmw { address, and, or } => {
                let o = self.aligned_offset(address)?;
                let pre = self.read(o)?;
                self.write(o, (pre & and) | or)?;
                Ok((vec![pre], RMW_CYCLES))
            }
            Ado { .. } | Iack { .. } => unreachable!("handled by execute"),
        }
    }

    /// One indivisible bus cycle.
    pub fn execute(&mut self, txn: &VmeTransaction) -> BusResult {
        let address = match *txn {
            VmeTransaction::Iack { level } => return self.iack_cycle(level),
            VmeTransaction::Ado { address } => {
                return match self.offset(address) {
                    Ok(_) => {
                        self.pipeline_reg = Some(address);
                        BusResult {
                            outcome: Outcome::Dtack(vec![]),
                            cycles: ADO_CYCLES,
                        }
                    }
                    Err(reason) => {
                        self.pipeline_reg = None;
                        berr(reason)
                    }
                };
            }
            _ => txn.address().expect("data cycles carry an address"),
        };
        let hit = self.pipeline_reg.take() == Some(address);
        match self.data_cycle(txn) {
            Ok((data, cycles)) => BusResult {
                outcome: Outcome::Dtack(data),
                cycles: cycles - hit as u32,
            },
            Err(reason) => {
                log::debug!("BERR on {txn}: {reason}");
                berr(reason)
            }
        }
    }

    /// Posts an interrupt request at `level` (1..=7).
    pub fn raise_interrupt(
        &mut self,
        level: u8,
        status_id: u16,
        width: StatusWidth,
    ) -> Result<(), VmeError> {
        if !(1..=7).contains(&level) {
            return Err(VmeError::InvalidLevel(level));
        }
        if width == StatusWidth::D08 && status_id > 0xFF {
            return Err(VmeError::StatusTooWide { status_id, width });
        }
        let slot = &mut self.pending[level as usize - 1];
        if slot.is_some() {
            return Err(VmeError::AlreadyPending(level));
        }
        *slot = Some((status_id, width));
        Ok(())
    }

    /// Acknowledges `level`. Returns the Status/ID and clears the request, or
    /// times out when nothing is pending there.
    pub fn iack_cycle(&mut self, level: u8) -> BusResult {
        let pending = (1..=7)
            .contains(&level)
            .then(|| self.pending[level as usize - 1].take())
            .flatten();
        match pending {
            Some((id, _)) => BusResult {
                outcome: Outcome::Dtack(vec![id]),
                cycles: SINGLE_CYCLES,
            },
            None => BusResult {
                outcome: Outcome::NoResponse,
                cycles: BUS_TIMEOUT_CYCLES,
            },
        }
    }
}

fn berr(reason: BerrReason) -> BusResult {
    BusResult {
        outcome: Outcome::Berr(reason),
        cycles: BERR_CYCLES,
    }
}
