//! Path-count schedules: how many new paths each epoch appends.

use crate::error::{Error, Result};

/// Paths appended per epoch plus the shared iteration budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochSchedule {
    pub paths_per_epoch: Vec<usize>,
    pub iterations_per_epoch: usize,
}

impl EpochSchedule {
    pub fn new(paths_per_epoch: Vec<usize>, iterations_per_epoch: usize) -> Result<Self> {
        if paths_per_epoch.is_empty() || paths_per_epoch.iter().any(|&n| n == 0) {
            return Err(Error::InvalidConfig(
                "schedule must be a non-empty list of positive path counts".into(),
            ));
        }
        if iterations_per_epoch == 0 {
            return Err(Error::InvalidConfig(
                "iterations per epoch must be positive".into(),
            ));
        }
        Ok(Self {
            paths_per_epoch,
            iterations_per_epoch,
        })
    }

    pub fn total_paths(&self) -> usize {
        self.paths_per_epoch.iter().sum()
    }
}

/// Doubling schedule term: `clamp(2^(i-2), 1, cap)` for 1-based epoch `i`.
/// Epoch 1 maps to fractional `2^-1`, which the lower clamp lifts to 1.
pub fn schedule_clamp(i: usize, cap: usize) -> usize {
    assert!(i >= 1 && cap >= 1);
    if i < 2 {
        return 1;
    }
    let exp = i - 2;
    if exp >= usize::BITS as usize - 1 {
        return cap;
    }
    (1usize << exp).clamp(1, cap)
}

/// Expand the doubling schedule until the epoch counts sum to exactly
/// `total`, clipping the final epoch.
pub fn expand_clamp_schedule(cap: usize, total: usize) -> Vec<usize> {
    assert!(cap >= 1 && total >= 1);
    let mut out = Vec::new();
    let mut sum = 0usize;
    let mut i = 1usize;
    while sum < total {
        let n = schedule_clamp(i, cap).min(total - sum);
        out.push(n);
        sum += n;
        i += 1;
    }
    out
}
