//! Restart schedule and learned-nogood deletion policy.

/// The `i`-th term (1-based) of the Luby sequence 1, 1, 2, 1, 1, 2, 4, 1, ...
pub fn luby(i: u64) -> u64 {
    assert!(i >= 1);
    // Find the finite subsequence 2^k - 1 containing i.
    let mut k = 1u32;
    while (1u64 << k) - 1 < i {
        k += 1;
    }
    let mut i = i;
    loop {
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        // Strip the first half of the subsequence and recurse.
        i -= (1u64 << (k - 1)) - 1;
        k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RestartSchedule {
    unit: u64,
    index: u64,
    conflicts: u64,
}

impl RestartSchedule {
    pub fn new(unit: u64) -> RestartSchedule {
        RestartSchedule { unit: unit.max(1), index: 1, conflicts: 0 }
    }

    pub fn on_conflict(&mut self) {
        self.conflicts += 1;
    }

    pub fn budget(&self) -> u64 {
        luby(self.index) * self.unit
    }

    pub fn due(&self) -> bool {
        self.conflicts >= self.budget()
    }

    /// Moves to the next term of the sequence.
    pub fn advance(&mut self) {
        self.index += 1;
        self.conflicts = 0;
    }

    /// Resets the counter without consuming a term (restarts requested by a heuristic).
    pub fn reset_counter(&mut self) {
        self.conflicts = 0;
    }
}

/// Deletion threshold: learned nogoods beyond `max(base, factor * input)` trigger a reduction.
pub(crate) fn deletion_threshold(base: usize, factor: f64, input: usize) -> usize {
    base.max((factor * input as f64) as usize)
}
