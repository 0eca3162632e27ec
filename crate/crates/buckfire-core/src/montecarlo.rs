//! Plays the actual game as a statistical oracle for the exact engines.
//!
//! Determinism contract: the generator is ChaCha8, seeded with
//! `seed_from_u64(seed)`. Trials are split into fixed chunks of
//! [`TRIALS_PER_CHUNK`]; chunk `i` draws from stream `i` of the same seed
//! (`set_stream`), so results depend only on `(graph, trials, seed)` and
//! never on how chunks are scheduled across workers. Merging is exact count
//! addition. Uniform selection over the `d + 1` outcomes at a vertex uses
//! bitmask rejection on `next_u64`, which has no modulo bias.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};

/// Fixed chunk size for trial splitting. Part of the determinism contract:
/// changing it changes the stream layout and therefore the results.
pub const TRIALS_PER_CHUNK: u64 = 10_000;

/// Unbiased uniform draw from `0..n` by bitmask rejection: draw the minimal
/// number of low bits, reject values of `n` and above.
pub fn uniform_below(rng: &mut impl RngCore, n: usize) -> usize {
    debug_assert!(n > 0);
    let bits = usize::BITS - (n - 1).leading_zeros();
    let mask = if bits == 0 { 0 } else { (!0u64) >> (64 - bits) };
    loop {
        let draw = (rng.next_u64() & mask) as usize;
        if draw < n {
            return draw;
        }
    }
}

/// The result of one full game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameOutcome {
    pub winner: VertexId,
    /// Number of passes before the buck stopped.
    pub steps: u64,
}

/// Plays one game from `g.start()`: at a vertex of degree `d`, each of the
/// `d + 1` outcomes (win here, or pass to each neighbour) has probability
/// exactly `1/(d+1)`.
pub fn play_game(g: &Graph, rng: &mut impl RngCore) -> GameOutcome {
    let mut at = g.start();
    let mut steps = 0u64;
    loop {
        let d = g.degree(at);
        let pick = uniform_below(rng, d + 1);
        if pick == d {
            return GameOutcome { winner: at, steps };
        }
        at = g.neighbors(at)[pick];
        steps += 1;
    }
}

/// Per-vertex win counts over a fixed number of seeded trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    pub trials: u64,
    pub seed: u64,
    pub wins: Vec<u64>,
}

impl EmpiricalDistribution {
    pub fn frequency(&self, v: VertexId) -> f64 {
        self.wins[v.0] as f64 / self.trials as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.wins
            .iter()
            .map(|&w| w as f64 / self.trials as f64)
            .collect()
    }
}

/// Number of chunks that `trials` splits into.
pub fn chunk_count(trials: u64) -> u64 {
    trials.div_ceil(TRIALS_PER_CHUNK)
}

/// Trials assigned to chunk `index` (the last chunk may be short).
pub fn chunk_trials(trials: u64, index: u64) -> u64 {
    let start = index * TRIALS_PER_CHUNK;
    TRIALS_PER_CHUNK.min(trials - start)
}

/// Runs one chunk on its own stream and returns its per-vertex win counts.
/// Drivers (sequential or parallel) merge chunks by addition.
pub fn run_chunk(g: &Graph, trials: u64, seed: u64, index: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut wins = vec![0u64; g.vertex_count()];
    for _ in 0..trials {
        wins[play_game(g, &mut rng).winner.0] += 1;
    }
    wins
}

/// Estimates the winning distribution over `trials` seeded games,
/// sequentially. Identical to any parallel driver that merges the same
/// chunks.
pub fn estimate(g: &Graph, trials: u64, seed: u64) -> EmpiricalDistribution {
    assert!(trials >= 1);
    let mut wins = vec![0u64; g.vertex_count()];
    for index in 0..chunk_count(trials) {
        let chunk = run_chunk(g, chunk_trials(trials, index), seed, index);
        for (total, w) in wins.iter_mut().zip(chunk) {
            *total += w;
        }
    }
    EmpiricalDistribution { trials, seed, wins }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, TreeSpec};

    fn fig1() -> Graph {
        Graph::complete_kary_tree(TreeSpec::new(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn single_vertex_wins_immediately() {
        let g = Graph::from_edge_list(&[], 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let outcome = play_game(&g, &mut rng);
        assert_eq!(outcome.winner, VertexId(0));
        assert_eq!(outcome.steps, 0);
    }

    #[test]
    fn wins_sum_to_trials() {
        let est = estimate(&fig1(), 25_001, 3);
        assert_eq!(est.wins.iter().sum::<u64>(), 25_001);
        let one = estimate(&fig1(), 1, 7);
        assert_eq!(one.wins.iter().sum::<u64>(), 1);
    }

    #[test]
    fn estimates_are_reproducible() {
        let g = fig1();
        let a = estimate(&g, 30_000, 42);
        let b = estimate(&g, 30_000, 42);
        assert_eq!(a, b);
        let c = estimate(&g, 30_000, 43);
        assert_ne!(a.wins, c.wins);
    }

    #[test]
    fn manual_chunk_merge_matches_estimate() {
        let g = fig1();
        let trials = 2 * TRIALS_PER_CHUNK + 123;
        let est = estimate(&g, trials, 5);
        let mut wins = vec![0u64; g.vertex_count()];
        for index in (0..chunk_count(trials)).rev() {
            for (t, w) in wins
                .iter_mut()
                .zip(run_chunk(&g, chunk_trials(trials, index), 5, index))
            {
                *t += w;
            }
        }
        assert_eq!(wins, est.wins);
    }

    #[test]
    fn level_one_tree_frequencies_near_exact() {
        let est = estimate(&fig1(), 1_000_000, 2024);
        let root = est.frequency(VertexId(0));
        assert!((root - 0.5).abs() < 0.0015, "freq(root) = {}", root);
        // Leaves are symmetric; allow 4 sigma on the difference.
        let diff = (est.frequency(VertexId(1)) - est.frequency(VertexId(2))).abs();
        assert!(diff < 0.0028, "leaf asymmetry {}", diff);
    }

    #[test]
    fn branch_choice_is_uniform() {
        // Chi-square on 1e5 three-way choices, the sampler used at the
        // level-one root. Critical value for df = 2 at significance 1e-4
        // is -2 ln(1e-4) = 18.42.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u64; 3];
        let draws = 100_000;
        for _ in 0..draws {
            counts[uniform_below(&mut rng, 3)] += 1;
        }
        let expected = draws as f64 / 3.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let dev = c as f64 - expected;
                dev * dev / expected
            })
            .sum();
        assert!(chi2 < 18.4207, "chi2 = {}", chi2);
    }

    #[test]
    fn uniform_below_covers_range_without_bias_artifacts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in 1..=9 {
            let mut seen = vec![false; n];
            for _ in 0..400 {
                seen[uniform_below(&mut rng, n)] = true;
            }
            assert!(seen.iter().all(|&s| s), "n = {}", n);
        }
    }
}
