//! Two-worker step scheduler.
//!
//! A worker is a state machine that performs one action per call: a flag
//! poll, a burst over one shared region, or a chunk of local computation.
//! The scheduler decides, step by step, which worker acts (and in which
//! order when both do), then closes the step on the memory so the hazard
//! detector sees step boundaries. Workers only communicate through the
//! memory, so any schedule that respects the handshake must give the same
//! result; [`Schedule::Seeded`] exists to demonstrate exactly that.

use super::dpram::{DualPortMemory, Port};
use super::PipelineError;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    /// Did something; may be called again.
    Advanced,
    /// Waiting on a flag held by the other worker.
    Blocked,
    /// Finished; will not be called again.
    Done,
}

pub trait Worker {
    fn name(&self) -> &'static str;
    fn step(&mut self, mem: &mut DualPortMemory, port: Port) -> Result<Progress, PipelineError>;
}

/// Interleaving policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every step: port A's worker, then port B's.
    #[default]
    RoundRobin,
    /// Every step picks uniformly among {A}, {B}, {A then B}, {B then A}.
    Seeded(u64),
    /// Every step runs exactly one worker, A with probability
    /// `a / (a + b)`. A zero weight starves that worker.
    Weighted { seed: u64, a: u32, b: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Consecutive blocked polls tolerated before a handshake timeout.
    pub max_wait_steps: u64,
    pub max_total_steps: u64,
    /// Escalate dual-port write collisions to errors.
    pub strict_hazards: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_wait_steps: 10_000,
            max_total_steps: u64::MAX,
            strict_hazards: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub steps: u64,
    pub actions: [u64; 2],
    pub blocked: [u64; 2],
}

struct Slot<'w> {
    worker: &'w mut dyn Worker,
    port: Port,
    done: bool,
    waiting: u64,
}

/// Runs both workers to completion.
pub fn run_pair(
    mem: &mut DualPortMemory,
    on_a: &mut dyn Worker,
    on_b: &mut dyn Worker,
    schedule: Schedule,
    limits: Limits,
) -> Result<RunStats, PipelineError> {
    let mut slots = [
        Slot {
            worker: on_a,
            port: Port::A,
            done: false,
            waiting: 0,
        },
        Slot {
            worker: on_b,
            port: Port::B,
            done: false,
            waiting: 0,
        },
    ];
    let mut rng = match schedule {
        Schedule::RoundRobin => None,
        Schedule::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Schedule::Weighted { seed, a, b } => {
            if a == 0 && b == 0 {
                return Err(PipelineError::Config("scheduler weights are both zero"));
            }
            Some(ChaCha8Rng::seed_from_u64(seed))
        }
    };
    let mut stats = RunStats::default();
    let mut hazards_seen = mem.hazards().len();

    while !(slots[0].done && slots[1].done) {
        if stats.steps >= limits.max_total_steps {
            return Err(PipelineError::StepLimit(stats.steps));
        }
        let order: &[usize] = match (schedule, rng.as_mut()) {
            (Schedule::Weighted { a, b, .. }, Some(r)) => {
                if (r.next_u64() % (a as u64 + b as u64)) < a as u64 {
                    &[0]
                } else {
                    &[1]
                }
            }
            (_, Some(r)) => match r.next_u32() % 4 {
                0 => &[0],
                1 => &[1],
                2 => &[0, 1],
                _ => &[1, 0],
            },
            (_, None) => &[0, 1],
        };
        for &i in order {
            let slot = &mut slots[i];
            if slot.done {
                continue;
            }
            match slot.worker.step(mem, slot.port)? {
                Progress::Advanced => {
                    slot.waiting = 0;
                    stats.actions[i] += 1;
                }
                Progress::Blocked => {
                    slot.waiting += 1;
                    stats.blocked[i] += 1;
                    if slot.waiting > limits.max_wait_steps {
                        return Err(PipelineError::HandshakeTimeout {
                            worker: slot.worker.name(),
                            port: slot.port,
                            waited: slot.waiting,
                        });
                    }
                }
                Progress::Done => slot.done = true,
            }
        }
        // A starved worker never polls, so its partner is the one that trips
        // the timeout above.
        mem.advance_step();
        stats.steps += 1;
        if mem.hazards().len() > hazards_seen {
            if limits.strict_hazards {
                return Err(PipelineError::Hazard(mem.hazards()[hazards_seen]));
            }
            hazards_seen = mem.hazards().len();
        }
    }
    Ok(stats)
}
