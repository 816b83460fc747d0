//! Step and wall-clock budgets for long computations.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

/// How far a computation got before its budget ran out.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("budget exhausted after {done} of {requested} steps")]
pub struct Exhausted {
    pub done: u64,
    pub requested: u64,
}

/// A limit on work. Step limits are deterministic; the deadline is not and
/// is meant only for the command-line `--max-seconds` guard.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub max_steps: Option<u64>,
    pub deadline: Option<Instant>,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_steps: None,
        deadline: None,
    };

    pub fn steps(max_steps: u64) -> Budget {
        Budget {
            max_steps: Some(max_steps),
            deadline: None,
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Budget {
        self.deadline = Some(Instant::now() + limit);
        self
    }

    /// Fails up front when `requested` steps exceed the step limit.
    pub fn admit(&self, requested: u64) -> Result<(), Exhausted> {
        match self.max_steps {
            Some(m) if requested > m => Err(Exhausted { done: 0, requested }),
            _ => Ok(()),
        }
    }

    /// Polled from inner loops every few thousand steps.
    #[inline]
    pub fn poll(&self, done: u64, requested: u64) -> Result<(), Exhausted> {
        if let Some(m) = self.max_steps {
            if done > m {
                return Err(Exhausted { done, requested });
            }
        }
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(Exhausted { done, requested });
            }
        }
        Ok(())
    }

    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}
