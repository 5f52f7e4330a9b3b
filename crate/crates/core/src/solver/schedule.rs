use alloc::vec::Vec;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How the active scenario block `Ξ_n` is chosen at each iteration.
///
/// Every variant activates all scenarios at iteration 0 and activates each
/// scenario at least once in every window of `m + 1` consecutive iterations,
/// with `m` given by [`ActivationSchedule::cover_window`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum ActivationSchedule {
    #[default]
    Full,
    /// Cyclic sweep over contiguous blocks of scenario indices.
    RoundRobin { block_size: usize },
    /// A uniformly random block each iteration, plus every scenario that sat
    /// idle for the last `cover_window` iterations.
    SeededRandom {
        block_size: usize,
        cover_window: usize,
        seed: u64,
    },
}

impl ActivationSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            ActivationSchedule::RoundRobin { block_size: 0 }
            | ActivationSchedule::SeededRandom { block_size: 0, .. } => Err(Error::BadBlockSize),
            _ => Ok(()),
        }
    }

    /// The `m` of the covering guarantee for a tree with `scenarios` leaves.
    pub fn cover_window(&self, scenarios: usize) -> usize {
        match self {
            ActivationSchedule::Full => 0,
            ActivationSchedule::RoundRobin { block_size } => scenarios.div_ceil(*block_size).max(1) - 1,
            ActivationSchedule::SeededRandom { cover_window, .. } => *cover_window,
        }
    }

    pub(crate) fn seed(&self) -> u64 {
        match self {
            ActivationSchedule::SeededRandom { seed, .. } => *seed,
            _ => 0,
        }
    }

    /// Active block for iteration `n`, sorted ascending.
    pub(crate) fn select(&self, n: usize, last_activated: &[Option<usize>], rng: &mut ChaCha8Rng) -> Vec<usize> {
        let scenarios = last_activated.len();
        if n == 0 {
            return (0..scenarios).collect();
        }
        match *self {
            ActivationSchedule::Full => (0..scenarios).collect(),
            ActivationSchedule::RoundRobin { block_size } => {
                let blocks = scenarios.div_ceil(block_size);
                let start = ((n - 1) % blocks) * block_size;
                (start..(start + block_size).min(scenarios)).collect()
            }
            ActivationSchedule::SeededRandom {
                block_size,
                cover_window,
                ..
            } => {
                let (mut block, rest): (Vec<usize>, Vec<usize>) =
                    (0..scenarios).partition(|&s| match last_activated[s] {
                        None => true,
                        Some(last) => n - last > cover_window,
                    });
                let wanted = block_size.min(scenarios);
                if block.len() < wanted {
                    let extra = index::sample(rng, rest.len(), wanted - block.len());
                    block.extend(extra.iter().map(|i| rest[i]));
                    block.sort_unstable();
                }
                block
            }
        }
    }
}
