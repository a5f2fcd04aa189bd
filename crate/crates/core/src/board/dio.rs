//! Eight digital inputs and eight digital outputs.

use super::BoardError;

pub const DIO_LINES: u8 = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DigitalIo {
    inputs: u8,
    outputs: u8,
}

impl DigitalIo {
    pub fn new() -> Self {
        Self::default()
    }

    fn check(line: u8) -> Result<u8, BoardError> {
        if line < DIO_LINES {
            Ok(1 << line)
        } else {
            Err(BoardError::InvalidLine(line))
        }
    }

    /// Drives an input line from the outside world.
    pub fn set_input(&mut self, line: u8, high: bool) -> Result<(), BoardError> {
        let bit = Self::check(line)?;
        self.inputs = if high {
            self.inputs | bit
        } else {
            self.inputs & !bit
        };
        Ok(())
    }

    pub fn input(&self, line: u8) -> Result<bool, BoardError> {
        Ok(self.inputs & Self::check(line)? != 0)
    }

    pub fn set_output(&mut self, line: u8, high: bool) -> Result<(), BoardError> {
        let bit = Self::check(line)?;
        self.outputs = if high {
            self.outputs | bit
        } else {
            self.outputs & !bit
        };
        Ok(())
    }

    pub fn output(&self, line: u8) -> Result<bool, BoardError> {
        Ok(self.outputs & Self::check(line)? != 0)
    }

    pub fn input_mask(&self) -> u8 {
        self.inputs
    }

    pub fn set_input_mask(&mut self, mask: u8) {
        self.inputs = mask;
    }

    pub fn output_mask(&self) -> u8 {
        self.outputs
    }

    pub fn set_output_mask(&mut self, mask: u8) {
        self.outputs = mask;
    }
}
