//! Counter-based, splittable randomness.
//!
//! Every trial owns a ChaCha stream selected by its index, and every step of
//! that trial reads from its own block range inside the stream. Trial `i`,
//! step `t` therefore sees the same random words no matter how many trials
//! run, in which order, or on how many threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Words reserved for a single step (2^32 words, far more than any step uses).
const STEP_WORDS_SHIFT: u32 = 32;

/// Randomness handed to [`crate::Process::step`] and [`crate::Process::initial`].
pub struct StepRng {
    inner: ChaCha8Rng,
}

impl StepRng {
    /// Stream for `(seed, trial)` positioned at `step`. Step 0 is reserved for
    /// the initial state; transition `t -> t+1` reads step `t + 1`.
    pub fn new(seed: u64, trial: u64, step: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(trial);
        inner.set_word_pos(u128::from(step) << STEP_WORDS_SHIFT);
        Self { inner }
    }

    /// Reposition on another step of the same trial.
    pub fn seek(&mut self, step: u64) {
        self.inner.set_word_pos(u128::from(step) << STEP_WORDS_SHIFT);
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            self.inner.random_bool(p)
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for StepRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Per-trial driver: hands out a correctly positioned [`StepRng`] per step.
pub struct TrialStreams {
    rng: StepRng,
}

impl TrialStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        Self {
            rng: StepRng::new(seed, trial, 0),
        }
    }

    pub fn at(&mut self, step: u64) -> &mut StepRng {
        self.rng.seek(step);
        &mut self.rng
    }
}
