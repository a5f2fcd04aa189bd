//! Filtering on one DSP, coefficient update on the other.
//!
//! The filter worker (F) owns the ADC stream. For block `n` it waits for the
//! coefficient set tagged `n`, filters the block, and posts the regressor
//! heads and errors to the data slot. The LMS worker (L) consumes block `n`
//! while F is already filtering block `n + 1`, folds it into its private
//! master coefficients, and publishes the result as the set for block
//! `n + 2`. Blocks 0 and 1 both use the initial coefficients.
//!
//! In other words every block is filtered with coefficients that are one
//! block staler than a block-synchronous update would allow. That staleness
//! is the price of running the two halves concurrently, and it is the
//! defined behaviour: [`delayed_update_reference`](super::delayed_update_reference)
//! computes the same thing serially.

use super::dpram::{wire_round, DualPortMemory, Port};
use super::layout::SharedLayout;
use super::sched::{run_pair, Limits, Progress, RunStats, Schedule, Worker};
use super::{Access, Hazard, PipelineError};
use crate::adaptive::{
    adapt, delayed, dot, AdaptiveError, AdaptiveRun, DelayLine, FilterCoefficients, LmsConfig,
    PredictorConfig, Snapshot,
};
use crate::signal::{check_compatible, SampleStream};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Predictor(PredictorConfig),
    Identification(LmsConfig),
}

impl Topology {
    pub fn lms(&self) -> &LmsConfig {
        match self {
            Topology::Predictor(p) => &p.lms,
            Topology::Identification(l) => l,
        }
    }

    /// Delay between the input and the regressor head (0 for identification).
    pub fn regressor_delay(&self) -> usize {
        match self {
            Topology::Predictor(p) => p.delay,
            Topology::Identification(_) => 0,
        }
    }
}

/// Which DPRAM port (DSP) runs the filter; the LMS worker takes the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoleAssignment {
    #[default]
    FilterOnA,
    FilterOnB,
}

impl RoleAssignment {
    pub fn filter_port(self) -> Port {
        match self {
            RoleAssignment::FilterOnA => Port::A,
            RoleAssignment::FilterOnB => Port::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub block_len: usize,
    pub topology: Topology,
    pub roles: RoleAssignment,
    /// Starting coefficients; zeros when `None`.
    pub initial: Option<FilterCoefficients>,
    pub schedule: Schedule,
    pub limits: Limits,
    pub record_log: bool,
}

impl PipelineConfig {
    pub fn new(block_len: usize, topology: Topology) -> Self {
        Self {
            block_len,
            topology,
            roles: RoleAssignment::default(),
            initial: None,
            schedule: Schedule::default(),
            limits: Limits::default(),
            record_log: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.block_len == 0 {
            return Err(PipelineError::Config("block_len must be at least 1"));
        }
        match &self.topology {
            Topology::Predictor(p) => p.validate()?,
            Topology::Identification(l) => l.validate()?,
        }
        if let Some(init) = &self.initial {
            if init.b.len() != self.topology.lms().num_taps
                || init.a.as_ref().is_some_and(|a| !a.is_empty())
            {
                return Err(AdaptiveError::InitialMismatch {
                    expected: self.topology.lms().num_taps,
                    got: init.flat().len(),
                }
                .into());
            }
            if !init.b.iter().all(|v| v.is_finite()) {
                return Err(AdaptiveError::NonFinite.into());
            }
        }
        Ok(())
    }

    pub(crate) fn initial_taps(&self) -> Vec<f64> {
        self.initial
            .as_ref()
            .map(|c| c.b.clone())
            .unwrap_or_else(|| vec![0.0; self.topology.lms().num_taps])
    }
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub run: AdaptiveRun,
    pub stats: RunStats,
    pub hazards: Vec<Hazard>,
    pub log: Option<Vec<Access>>,
}

/// Block tag carried in a ready flag: never zero.
fn tag(block: usize) -> u16 {
    (block % 0xFFFF) as u16 + 1
}

/// Validated inputs shared by the pipeline and its serial reference.
pub(crate) struct Streams<'a> {
    pub x: &'a [f64],
    pub d: &'a [f64],
    pub delay: usize,
    pub rate_hz: f64,
}

pub(crate) fn prepare<'a>(
    input: &'a SampleStream,
    desired: Option<&'a SampleStream>,
    cfg: &PipelineConfig,
) -> Result<Streams<'a>, PipelineError> {
    cfg.validate()?;
    let d = match (&cfg.topology, desired) {
        (Topology::Identification(_), Some(d)) => {
            check_compatible(input, d).map_err(AdaptiveError::from)?;
            d.samples()
        }
        (Topology::Identification(_), None) => return Err(PipelineError::MissingDesired),
        (Topology::Predictor(p), None) => {
            if input.len() < p.delay {
                return Err(AdaptiveError::TooShort {
                    len: input.len(),
                    delay: p.delay,
                }
                .into());
            }
            input.samples()
        }
        (Topology::Predictor(_), Some(_)) => return Err(PipelineError::UnexpectedDesired),
    };
    Ok(Streams {
        x: input.samples(),
        d,
        delay: cfg.topology.regressor_delay(),
        rate_hz: input.rate_hz(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FilterState {
    AwaitCoeffs,
    ReadCoeffs,
    AckCoeffs,
    Filter,
    AwaitSlot,
    WriteData,
    RaiseData,
    Done,
}

struct FilterWorker<'a> {
    streams: &'a Streams<'a>,
    layout: SharedLayout,
    block_len: usize,
    num_blocks: usize,
    block: usize,
    state: FilterState,
    coeffs: Vec<f64>,
    line: DelayLine,
    y: Vec<f64>,
    e: Vec<f64>,
}

impl FilterWorker<'_> {
    fn block_range(&self) -> std::ops::Range<usize> {
        let start = self.block * self.block_len;
        start..(start + self.block_len).min(self.streams.x.len())
    }
}

impl Worker for FilterWorker<'_> {
    fn name(&self) -> &'static str {
        "filter"
    }

    fn step(&mut self, mem: &mut DualPortMemory, port: Port) -> Result<Progress, PipelineError> {
        let l = self.layout;
        match self.state {
            FilterState::AwaitCoeffs => {
                let flag = mem.read(port, l.flag_coeff_ready)?;
                if flag == 0 {
                    return Ok(Progress::Blocked);
                }
                if flag != tag(self.block) {
                    return Err(PipelineError::SequenceMismatch {
                        expected: tag(self.block),
                        found: flag,
                    });
                }
                self.state = FilterState::ReadCoeffs;
            }
            FilterState::ReadCoeffs => {
                for i in 0..self.coeffs.len() {
                    self.coeffs[i] = mem.read_f32(port, l.coeff_addr(i))? as f64;
                }
                self.state = FilterState::AckCoeffs;
            }
            FilterState::AckCoeffs => {
                mem.write(port, l.flag_coeff_ready, 0)?;
                self.state = FilterState::Filter;
            }
            FilterState::Filter => {
                let s = self.streams;
                for k in self.block_range() {
                    self.line.push(delayed(s.x, k, s.delay));
                    let y = dot(&self.coeffs, self.line.window());
                    if !y.is_finite() {
                        return Err(AdaptiveError::Diverged { index: k }.into());
                    }
                    self.y.push(y);
                    self.e.push(s.d[k] - y);
                }
                self.state = FilterState::AwaitSlot;
            }
            FilterState::AwaitSlot => {
                if mem.read(port, l.flag_data_ready)? != 0 {
                    return Ok(Progress::Blocked);
                }
                self.state = FilterState::WriteData;
            }
            FilterState::WriteData => {
                let s = self.streams;
                for (i, k) in self.block_range().enumerate() {
                    mem.write_f32(port, l.regressor_addr(i), delayed(s.x, k, s.delay) as f32)?;
                    mem.write_f32(port, l.error_addr(i), self.e[k] as f32)?;
                }
                mem.write(port, l.seqno, self.block as u16)?;
                self.state = FilterState::RaiseData;
            }
            FilterState::RaiseData => {
                mem.write(port, l.flag_data_ready, tag(self.block))?;
                self.block += 1;
                self.state = if self.block < self.num_blocks {
                    FilterState::AwaitCoeffs
                } else {
                    FilterState::Done
                };
            }
            FilterState::Done => return Ok(Progress::Done),
        }
        Ok(Progress::Advanced)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LmsState {
    AwaitCoeffSlot,
    WriteCoeffs,
    RaiseCoeffs,
    AwaitData,
    ReadData,
    AckData,
    Update,
    Done,
}

struct LmsWorker<'c> {
    cfg: &'c LmsConfig,
    layout: SharedLayout,
    block_len: usize,
    total_len: usize,
    num_blocks: usize,
    /// Data blocks consumed so far.
    block: usize,
    /// Tag of the next coefficient set to publish.
    next_publish: usize,
    state: LmsState,
    master: Vec<f64>,
    line: DelayLine,
    heads: Vec<f64>,
    errors: Vec<f64>,
    trajectory: Option<Vec<Snapshot>>,
}

impl LmsWorker<'_> {
    fn after_publish_or_update(&self) -> LmsState {
        if self.next_publish < self.num_blocks && self.next_publish <= self.block + 1 {
            LmsState::AwaitCoeffSlot
        } else if self.block < self.num_blocks {
            LmsState::AwaitData
        } else {
            LmsState::Done
        }
    }

    fn current_block_len(&self) -> usize {
        let start = self.block * self.block_len;
        self.block_len.min(self.total_len - start)
    }
}

impl Worker for LmsWorker<'_> {
    fn name(&self) -> &'static str {
        "lms"
    }

    fn step(&mut self, mem: &mut DualPortMemory, port: Port) -> Result<Progress, PipelineError> {
        let l = self.layout;
        match self.state {
            LmsState::AwaitCoeffSlot => {
                if mem.read(port, l.flag_coeff_ready)? != 0 {
                    return Ok(Progress::Blocked);
                }
                self.state = LmsState::WriteCoeffs;
            }
            LmsState::WriteCoeffs => {
                for (i, &c) in self.master.iter().enumerate() {
                    mem.write_f32(port, l.coeff_addr(i), c as f32)?;
                }
                self.state = LmsState::RaiseCoeffs;
            }
            LmsState::RaiseCoeffs => {
                mem.write(port, l.flag_coeff_ready, tag(self.next_publish))?;
                self.next_publish += 1;
                self.state = self.after_publish_or_update();
            }
            LmsState::AwaitData => {
                let flag = mem.read(port, l.flag_data_ready)?;
                if flag == 0 {
                    return Ok(Progress::Blocked);
                }
                if flag != tag(self.block) {
                    return Err(PipelineError::SequenceMismatch {
                        expected: tag(self.block),
                        found: flag,
                    });
                }
                self.state = LmsState::ReadData;
            }
            LmsState::ReadData => {
                let seq = mem.read(port, l.seqno)?;
                if seq != self.block as u16 {
                    return Err(PipelineError::SequenceMismatch {
                        expected: self.block as u16,
                        found: seq,
                    });
                }
                let n = self.current_block_len();
                self.heads.clear();
                self.errors.clear();
                for i in 0..n {
                    self.heads
                        .push(mem.read_f32(port, l.regressor_addr(i))? as f64);
                    self.errors
                        .push(mem.read_f32(port, l.error_addr(i))? as f64);
                }
                self.state = LmsState::AckData;
            }
            LmsState::AckData => {
                mem.write(port, l.flag_data_ready, 0)?;
                self.state = LmsState::Update;
            }
            LmsState::Update => {
                let start = self.block * self.block_len;
                for (i, (&r, &e)) in self.heads.iter().zip(&self.errors).enumerate() {
                    self.line.push(r);
                    adapt(&mut self.master, self.line.window(), e, self.cfg);
                    record_snapshot(&mut self.trajectory, self.cfg, start + i, &self.master);
                }
                self.block += 1;
                self.state = self.after_publish_or_update();
            }
            LmsState::Done => return Ok(Progress::Done),
        }
        Ok(Progress::Advanced)
    }
}

pub(crate) fn record_snapshot(
    trajectory: &mut Option<Vec<Snapshot>>,
    cfg: &LmsConfig,
    k: usize,
    coeffs: &[f64],
) {
    if let (Some(t), Some(stride)) = (trajectory.as_mut(), cfg.snapshot_stride) {
        if (k + 1).is_multiple_of(stride) {
            t.push(Snapshot {
                k,
                coeffs: FilterCoefficients::fir(coeffs.to_vec()),
            });
        }
    }
}

/// Runs the two-worker pipeline over `input`.
///
/// `desired` must be given for the identification topology and omitted for
/// the predictor.
pub fn run_dual_pipeline(
    input: &SampleStream,
    desired: Option<&SampleStream>,
    cfg: &PipelineConfig,
    layout: &SharedLayout,
) -> Result<PipelineOutcome, PipelineError> {
    let streams = prepare(input, desired, cfg)?;
    layout.validate()?;
    let lms = cfg.topology.lms();
    if (layout.coeff_count as usize) < lms.num_taps {
        return Err(PipelineError::LayoutTooSmall("coefficient region"));
    }
    if (layout.block_len as usize) < cfg.block_len {
        return Err(PipelineError::LayoutTooSmall("data slot"));
    }

    let n = streams.x.len();
    let num_blocks = n.div_ceil(cfg.block_len);
    let mut filter = FilterWorker {
        streams: &streams,
        layout: *layout,
        block_len: cfg.block_len,
        num_blocks,
        block: 0,
        state: if num_blocks == 0 {
            FilterState::Done
        } else {
            FilterState::AwaitCoeffs
        },
        coeffs: vec![0.0; lms.num_taps],
        line: DelayLine::new(lms.num_taps),
        y: Vec::with_capacity(n),
        e: Vec::with_capacity(n),
    };
    let mut updater = LmsWorker {
        cfg: lms,
        layout: *layout,
        block_len: cfg.block_len,
        total_len: n,
        num_blocks,
        block: 0,
        next_publish: 0,
        state: LmsState::Done,
        master: cfg.initial_taps(),
        line: DelayLine::new(lms.num_taps),
        heads: Vec::with_capacity(cfg.block_len),
        errors: Vec::with_capacity(cfg.block_len),
        trajectory: lms.snapshot_stride.map(|_| Vec::new()),
    };
    updater.state = updater.after_publish_or_update();

    let mut mem = if cfg.record_log {
        DualPortMemory::with_log()
    } else {
        DualPortMemory::new()
    };
    let stats = match cfg.roles {
        RoleAssignment::FilterOnA => run_pair(
            &mut mem,
            &mut filter,
            &mut updater,
            cfg.schedule,
            cfg.limits,
        )?,
        RoleAssignment::FilterOnB => run_pair(
            &mut mem,
            &mut updater,
            &mut filter,
            cfg.schedule,
            cfg.limits,
        )?,
    };

    let run = AdaptiveRun {
        y: SampleStream::from_parts(filter.y, streams.rate_hz),
        e: SampleStream::from_parts(filter.e, streams.rate_hz),
        coeff_trajectory: updater.trajectory,
        final_coeffs: FilterCoefficients::fir(updater.master),
    };
    Ok(PipelineOutcome {
        run,
        stats,
        hazards: mem.hazards().to_vec(),
        log: mem.take_log(),
    })
}

/// Serial model of the pipeline: same staleness, same binary32 exchange.
pub fn delayed_update_reference(
    input: &SampleStream,
    desired: Option<&SampleStream>,
    cfg: &PipelineConfig,
) -> Result<AdaptiveRun, PipelineError> {
    let s = prepare(input, desired, cfg)?;
    let lms = cfg.topology.lms();
    let n = s.x.len();

    let mut master = cfg.initial_taps();
    let mut current = master.clone();
    let mut next = master.clone();
    let mut filter_line = DelayLine::new(lms.num_taps);
    let mut update_line = DelayLine::new(lms.num_taps);
    let mut trajectory = lms.snapshot_stride.map(|_| Vec::new());
    let (mut y, mut e) = (Vec::with_capacity(n), Vec::with_capacity(n));

    let mut start = 0;
    while start < n {
        let end = (start + cfg.block_len).min(n);
        let used: Vec<f64> = current.iter().map(|&c| wire_round(c)).collect();
        for k in start..end {
            filter_line.push(delayed(s.x, k, s.delay));
            let yk = dot(&used, filter_line.window());
            if !yk.is_finite() {
                return Err(AdaptiveError::Diverged { index: k }.into());
            }
            y.push(yk);
            e.push(s.d[k] - yk);
        }
        for (k, &ek) in e.iter().enumerate().take(end).skip(start) {
            update_line.push(wire_round(delayed(s.x, k, s.delay)));
            adapt(&mut master, update_line.window(), wire_round(ek), lms);
            record_snapshot(&mut trajectory, lms, k, &master);
        }
        current = std::mem::replace(&mut next, master.clone());
        start = end;
    }
    Ok(AdaptiveRun {
        y: SampleStream::from_parts(y, s.rate_hz),
        e: SampleStream::from_parts(e, s.rate_hz),
        coeff_trajectory: trajectory,
        final_coeffs: FilterCoefficients::fir(master),
    })
}
