//! Latching watchdog timer counted in board steps.

/// State seen by the caller after a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WatchdogStatus {
    Running,
    Expired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WatchdogTimer {
    timeout: u64,
    last_kick: u64,
    expired: bool,
}

impl WatchdogTimer {
    /// Armed at step 0.
    pub fn new(timeout: u64) -> Self {
        Self {
            timeout,
            last_kick: 0,
            expired: false,
        }
    }

    pub fn timeout(&self) -> u64 {
        self.timeout
    }

    pub fn last_kick(&self) -> u64 {
        self.last_kick
    }

    pub fn is_expired(&self) -> bool {
        self.expired
    }

    /// Expires once `now - last_kick` exceeds the timeout. Expiry latches.
    pub fn tick(&mut self, now: u64) -> WatchdogStatus {
        if !self.expired && now.saturating_sub(self.last_kick) > self.timeout {
            log::debug!(
                "watchdog expired at step {now} (last kick {})",
                self.last_kick
            );
            self.expired = true;
        }
        self.status()
    }

    /// Restarts the count. Has no effect once expired, only [`reset`](Self::reset)
    /// clears that.
    pub fn kick(&mut self, now: u64) -> WatchdogStatus {
        if self.tick(now) == WatchdogStatus::Running {
            self.last_kick = now;
        }
        self.status()
    }

    pub fn reset(&mut self, now: u64) {
        self.expired = false;
        self.last_kick = now;
    }

    pub fn status(&self) -> WatchdogStatus {
        if self.expired {
            WatchdogStatus::Expired
        } else {
            WatchdogStatus::Running
        }
    }
}
