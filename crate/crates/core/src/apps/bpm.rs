//! Difference-over-sum beam position, one axis per DSP.

use super::AppError;
use crate::dualcore::{
    run_pair, DualPortMemory, Limits, PipelineError, Port, Progress, Schedule, Worker,
};

/// Electrode amplitudes in volts and the position scale in mm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmReading {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub k_scale: f64,
}

impl BpmReading {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            a,
            b,
            c,
            d,
            k_scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if ![self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return Err(AppError::InvalidReading(
                "electrode amplitudes must be finite and non-negative",
            ));
        }
        if !self.k_scale.is_finite() {
            return Err(AppError::InvalidReading("scale must be finite"));
        }
        if self.a + self.b <= 0.0 {
            return Err(AppError::InvalidReading("a + b is zero"));
        }
        if self.c + self.d <= 0.0 {
            return Err(AppError::InvalidReading("c + d is zero"));
        }
        Ok(())
    }
}

fn ratio(k: f64, plus: f64, minus: f64) -> f64 {
    k * (plus - minus) / (plus + minus)
}

/// `(k·(a−b)/(a+b), k·(c−d)/(c+d))` evaluated in place.
pub fn bpm_direct(r: &BpmReading) -> Result<(f64, f64), AppError> {
    r.validate()?;
    Ok((ratio(r.k_scale, r.a, r.b), ratio(r.k_scale, r.c, r.d)))
}

/// DPRAM word address of the X result (binary64, four words).
pub const BPM_X_ADDR: u32 = 0x20;
pub const BPM_Y_ADDR: u32 = 0x24;
const BPM_X_READY: u32 = 0x28;
const BPM_Y_READY: u32 = 0x29;

struct AxisWorker {
    name: &'static str,
    plus: f64,
    minus: f64,
    k: f64,
    result_addr: u32,
    ready_addr: u32,
    stage: u8,
}

impl Worker for AxisWorker {
    fn name(&self) -> &'static str {
        self.name
    }

    fn step(&mut self, mem: &mut DualPortMemory, port: Port) -> Result<Progress, PipelineError> {
        self.stage += 1;
        match self.stage {
            1 => {
                mem.write_f64(port, self.result_addr, ratio(self.k, self.plus, self.minus))?;
                Ok(Progress::Advanced)
            }
            _ => {
                mem.write(port, self.ready_addr, 1)?;
                Ok(Progress::Done)
            }
        }
    }
}

/// Computes X on the port A DSP and Y on the port B DSP, each depositing
/// its result in the shared memory, then reads both back.
pub fn bpm_position(reading: &BpmReading) -> Result<(f64, f64), AppError> {
    reading.validate()?;
    let mut mem = DualPortMemory::new();
    let mut x = AxisWorker {
        name: "bpm-x",
        plus: reading.a,
        minus: reading.b,
        k: reading.k_scale,
        result_addr: BPM_X_ADDR,
        ready_addr: BPM_X_READY,
        stage: 0,
    };
    let mut y = AxisWorker {
        name: "bpm-y",
        plus: reading.c,
        minus: reading.d,
        k: reading.k_scale,
        result_addr: BPM_Y_ADDR,
        ready_addr: BPM_Y_READY,
        stage: 0,
    };
    run_pair(
        &mut mem,
        &mut x,
        &mut y,
        Schedule::RoundRobin,
        Limits::default(),
    )?;
    debug_assert!(mem.peek(BPM_X_READY as u16) == 1 && mem.peek(BPM_Y_READY as u16) == 1);
    Ok((
        mem.read_f64(Port::A, BPM_X_ADDR)
            .map_err(PipelineError::from)?,
        mem.read_f64(Port::A, BPM_Y_ADDR)
            .map_err(PipelineError::from)?,
    ))
}
