//! The stochastic abacus: a chip-firing machine that computes exact winning
//! probabilities.
//!
//! The board graph is augmented by treating each undirected edge as a pair
//! of directed edges and attaching one terminal vertex to every internal
//! vertex, so internal vertex `v` has outdegree `degree(v) + 1`. The machine
//! starts critically loaded (`outdegree - 1` chips on each internal vertex,
//! terminals empty) and then cycles: add one chip to the start vertex, fire
//! loaded vertices until none remains, stop once the internal configuration
//! is critically loaded again. Firing a vertex sends one chip along each
//! outgoing edge: one to every neighbour and one into its own terminal.
//!
//! When the machine stops, vertex `v` wins the game with probability
//! `terminal[v] / total terminal chips`, exactly. The final counts do not
//! depend on the order in which loaded vertices fire, so [`FiringPolicy`]
//! only changes the trace, never the result.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};
use crate::montecarlo::uniform_below;

/// Default ceiling on total fires per run. Termination is guaranteed for
/// valid boards; the cap only catches implementation bugs.
pub const DEFAULT_FIRE_CAP: u64 = 1_000_000_000;

/// A board graph augmented with one terminal vertex per internal vertex.
///
/// Terminal slots reuse the internal vertex numbering: the terminal of
/// internal vertex `v` is slot `v`.
#[derive(Debug, Clone)]
pub struct AbacusGraph {
    base: Graph,
    outdegree: Vec<usize>,
}

/// Chip counts on internal vertices and terminal slots. Counts are unbounded
/// integers; they grow exponentially with tree depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipConfig {
    pub internal: Vec<BigUint>,
    pub terminal: Vec<BigUint>,
}

/// Final terminal chip counts of a completed run, indexed by internal vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalCounts {
    counts: Vec<BigUint>,
}

impl TerminalCounts {
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Exact winning probability of each vertex: `counts[v] / total`, reduced
    /// to lowest terms. The probabilities sum to exactly 1.
    pub fn win_probabilities(&self) -> Result<Vec<BigRational>, AbacusError> {
        let total = self.total();
        if total.is_zero() {
            return Err(AbacusError::EmptyRun);
        }
        let total = BigInt::from(total);
        Ok(self
            .counts
            .iter()
            .map(|c| BigRational::new(BigInt::from(c.clone()), total.clone()))
            .collect())
    }
}

/// Which loaded vertex fires next when several are loaded. The abelian
/// property makes the choice semantically free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiringPolicy {
    /// Smallest vertex index first. The default: deterministic traces.
    LowestIndex,
    /// Largest vertex index first.
    HighestIndex,
    /// First-loaded, first-fired.
    Queue,
    /// Uniformly random among loaded vertices, from the given seed.
    RandomSeeded(u64),
}

impl Default for FiringPolicy {
    fn default() -> Self {
        FiringPolicy::LowestIndex
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbacusError {
    /// Tried to fire a vertex holding fewer chips than its outdegree.
    NotLoaded(VertexId),
    /// The safety cap on total fires was hit before recurrence.
    CapExceeded { cap: u64 },
    /// No terminal chips: probabilities are undefined.
    EmptyRun,
}

impl fmt::Display for AbacusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbacusError::NotLoaded(v) => write!(f, "vertex {} is not loaded", v),
            AbacusError::CapExceeded { cap } => {
                write!(f, "fire cap of {} exceeded before recurrence", cap)
            }
            AbacusError::EmptyRun => write!(f, "no terminal chips to divide"),
        }
    }
}

impl core::error::Error for AbacusError {}

/// Counters for a completed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStats {
    pub chips_added: u64,
    pub total_fires: u64,
}

/// A completed run: final terminal counts plus counters.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub terminals: TerminalCounts,
    pub stats: RunStats,
}

/// One recorded action with the chip state after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub action: TraceAction,
    pub internal: Vec<BigUint>,
    pub terminal: Vec<BigUint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceAction {
    /// One chip added to the start vertex.
    AddChip,
    /// The given vertex fired.
    Fire(VertexId),
}

/// Full record of a run: the initial critically loaded state followed by
/// every add and fire. Replaying the steps reproduces the run's outcome.
#[derive(Debug, Clone)]
pub struct Trace {
    pub initial: ChipConfig,
    pub steps: Vec<TraceStep>,
    pub stats: RunStats,
}

impl AbacusGraph {
    /// Augments a board graph: every internal vertex gains an edge into a
    /// fresh terminal vertex, so `outdegree[v] = degree(v) + 1`.
    pub fn augment(base: Graph) -> AbacusGraph {
        let outdegree = base.vertices().map(|v| base.degree(v) + 1).collect();
        AbacusGraph { base, outdegree }
    }

    pub fn base(&self) -> &Graph {
        &self.base
    }

    pub fn outdegree(&self, v: VertexId) -> usize {
        self.outdegree[v.0]
    }

    /// Terminal slot of internal vertex `v`.
    pub fn terminal_of(&self, v: VertexId) -> usize {
        v.0
    }

    /// The critical loading: `outdegree - 1` chips on every internal vertex,
    /// all terminals empty. Recurrence of this configuration ends a run.
    pub fn critical_loading(&self) -> ChipConfig {
        ChipConfig {
            internal: self
                .outdegree
                .iter()
                .map(|&d| BigUint::from(d - 1))
                .collect(),
            terminal: vec![BigUint::zero(); self.base.vertex_count()],
        }
    }

    fn is_loaded(&self, config: &ChipConfig, v: VertexId) -> bool {
        config.internal[v.0] >= BigUint::from(self.outdegree[v.0])
    }

    /// Fires `v`: removes `outdegree(v)` chips from it, adds one chip to each
    /// neighbour and one to its terminal.
    pub fn fire(&self, config: &mut ChipConfig, v: VertexId) -> Result<(), AbacusError> {
        if !self.is_loaded(config, v) {
            return Err(AbacusError::NotLoaded(v));
        }
        config.internal[v.0] -= BigUint::from(self.outdegree[v.0]);
        for &u in self.base.neighbors(v) {
            config.internal[u.0] += BigUint::one();
        }
        config.terminal[self.terminal_of(v)] += BigUint::one();
        Ok(())
    }

    /// Runs add-and-fire until the internal configuration returns to the
    /// critical loading, with the default fire cap.
    pub fn run(&self, policy: FiringPolicy) -> Result<RunOutcome, AbacusError> {
        self.run_with_cap(policy, DEFAULT_FIRE_CAP)
    }

    pub fn run_with_cap(
        &self,
        policy: FiringPolicy,
        fire_cap: u64,
    ) -> Result<RunOutcome, AbacusError> {
        let (config, stats) = self.drive(policy, fire_cap, &mut |_, _| {})?;
        Ok(RunOutcome {
            terminals: TerminalCounts {
                counts: config.terminal,
            },
            stats,
        })
    }

    /// As [`run`](Self::run), but records every action with a snapshot of the
    /// chip state after it.
    pub fn trace_run(&self, policy: FiringPolicy) -> Result<Trace, AbacusError> {
        self.trace_run_with_cap(policy, DEFAULT_FIRE_CAP)
    }

    pub fn trace_run_with_cap(
        &self,
        policy: FiringPolicy,
        fire_cap: u64,
    ) -> Result<Trace, AbacusError> {
        let mut steps = Vec::new();
        let (_, stats) = self.drive(policy, fire_cap, &mut |action, config| {
            steps.push(TraceStep {
                action,
                internal: config.internal.clone(),
                terminal: config.terminal.clone(),
            });
        })?;
        Ok(Trace {
            initial: self.critical_loading(),
            steps,
            stats,
        })
    }

    /// The add-and-fire loop. `observe` sees every action with the state
    /// after it. Termination check: no vertex is loaded, the internal state
    /// equals the critical loading, and at least one chip has been added.
    fn drive(
        &self,
        policy: FiringPolicy,
        fire_cap: u64,
        observe: &mut dyn FnMut(TraceAction, &ChipConfig),
    ) -> Result<(ChipConfig, RunStats), AbacusError> {
        let critical = self.critical_loading();
        let mut config = critical.clone();
        let mut chips_added: u64 = 0;
        let mut total_fires: u64 = 0;
        let start = self.base.start();

        let mut rng = match policy {
            FiringPolicy::RandomSeeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        let mut queue: VecDeque<VertexId> = VecDeque::new();

        loop {
            config.internal[start.0] += BigUint::one();
            chips_added += 1;
            if policy == FiringPolicy::Queue && self.is_loaded(&config, start) {
                queue.push_back(start);
            }
            observe(TraceAction::AddChip, &config);

            while let Some(v) = self.pick_loaded(&config, policy, &mut queue, &mut rng) {
                if total_fires == fire_cap {
                    return Err(AbacusError::CapExceeded { cap: fire_cap });
                }
                self.fire(&mut config, v)?;
                total_fires += 1;
                if policy == FiringPolicy::Queue {
                    // Gainers may have become loaded; v itself may still be.
                    for &u in self.base.neighbors(v) {
                        if self.is_loaded(&config, u) && !queue.contains(&u) {
                            queue.push_back(u);
                        }
                    }
                    if self.is_loaded(&config, v) && !queue.contains(&v) {
                        queue.push_back(v);
                    }
                }
                observe(TraceAction::Fire(v), &config);
            }

            if config.internal == critical.internal {
                let stats = RunStats {
                    chips_added,
                    total_fires,
                };
                return Ok((config, stats));
            }
        }
    }

    fn pick_loaded(
        &self,
        config: &ChipConfig,
        policy: FiringPolicy,
        queue: &mut VecDeque<VertexId>,
        rng: &mut Option<ChaCha8Rng>,
    ) -> Option<VertexId> {
        match policy {
            FiringPolicy::LowestIndex => self.base.vertices().find(|&v| self.is_loaded(config, v)),
            FiringPolicy::HighestIndex => (0..self.base.vertex_count())
                .rev()
                .map(VertexId)
                .find(|&v| self.is_loaded(config, v)),
            FiringPolicy::Queue => {
                while let Some(v) = queue.pop_front() {
                    if self.is_loaded(config, v) {
                        return Some(v);
                    }
                }
                None
            }
            FiringPolicy::RandomSeeded(_) => {
                let loaded: Vec<VertexId> = self
                    .base
                    .vertices()
                    .filter(|&v| self.is_loaded(config, v))
                    .collect();
                if loaded.is_empty() {
                    None
                } else {
                    let rng = rng.as_mut().expect("random policy carries an rng");
                    Some(loaded[uniform_below(rng, loaded.len())])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path, Graph, TreeSpec};
    use alloc::string::ToString;

    fn tree(k: usize, n: usize) -> AbacusGraph {
        AbacusGraph::augment(Graph::complete_kary_tree(TreeSpec::new(k, n).unwrap()).unwrap())
    }

    fn chips(values: &[u32]) -> Vec<BigUint> {
        values.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn augment_outdegrees() {
        let a = tree(2, 1);
        assert_eq!(a.outdegree, vec![3, 2, 2]);
        let single = tree(2, 0);
        assert_eq!(single.outdegree, vec![1]);
        let p = AbacusGraph::augment(path(3, 0).unwrap());
        assert_eq!(p.outdegree, vec![2, 3, 2]);
    }

    #[test]
    fn critical_loading_is_outdegree_minus_one() {
        let a = tree(2, 1);
        let c = a.critical_loading();
        assert_eq!(c.internal, chips(&[2, 1, 1]));
        assert_eq!(c.terminal, chips(&[0, 0, 0]));

        assert_eq!(tree(2, 0).critical_loading().internal, chips(&[0]));
        assert_eq!(tree(3, 1).critical_loading().internal, chips(&[3, 1, 1, 1]));
    }

    #[test]
    fn fire_moves_one_chip_per_out_edge() {
        let a = tree(2, 1);
        let mut c = a.critical_loading();
        c.internal[0] += BigUint::one(); // (3, 1, 1) as after the first add
        a.fire(&mut c, VertexId(0)).unwrap();
        assert_eq!(c.internal, chips(&[0, 2, 2]));
        assert_eq!(c.terminal, chips(&[1, 0, 0]));
        a.fire(&mut c, VertexId(1)).unwrap();
        assert_eq!(c.internal, chips(&[1, 0, 2]));
        assert_eq!(c.terminal, chips(&[1, 1, 0]));
    }

    #[test]
    fn fire_unloaded_vertex_fails() {
        let a = tree(2, 1);
        let mut c = a.critical_loading();
        assert_eq!(
            a.fire(&mut c, VertexId(1)),
            Err(AbacusError::NotLoaded(VertexId(1)))
        );
    }

    #[test]
    fn run_level_one_binary_tree() {
        let out = tree(2, 1).run(FiringPolicy::LowestIndex).unwrap();
        assert_eq!(out.terminals.counts(), &chips(&[2, 1, 1])[..]);
        assert_eq!(out.terminals.total(), BigUint::from(4u32));
        assert_eq!(out.stats.chips_added, 4);
        assert_eq!(out.stats.total_fires, 4);
    }

    #[test]
    fn run_single_vertex() {
        let out = tree(2, 0).run(FiringPolicy::LowestIndex).unwrap();
        assert_eq!(out.terminals.counts(), &chips(&[1])[..]);
        assert_eq!(out.stats.chips_added, 1);
        assert_eq!(out.stats.total_fires, 1);
    }

    #[test]
    fn run_level_two_binary_tree() {
        // Frozen from the per-level counts 6, 2, 1 (root, level 1, leaves);
        // cross-checked against the Markov engine in the integration tests.
        let out = tree(2, 2).run(FiringPolicy::LowestIndex).unwrap();
        assert_eq!(out.terminals.counts(), &chips(&[6, 2, 2, 1, 1, 1, 1])[..]);
        assert_eq!(out.terminals.total(), BigUint::from(14u32));
    }

    #[test]
    fn win_probabilities_reduce_and_sum_to_one() {
        let probs = TerminalCounts {
            counts: chips(&[2, 1, 1]),
        }
        .win_probabilities()
        .unwrap();
        assert_eq!(probs[0].to_string(), "1/2");
        assert_eq!(probs[1].to_string(), "1/4");
        assert_eq!(probs[2].to_string(), "1/4");

        let single = TerminalCounts {
            counts: chips(&[1]),
        }
        .win_probabilities()
        .unwrap();
        assert!(single[0].is_one());

        let deep = TerminalCounts {
            counts: chips(&[6, 2, 2, 1, 1, 1, 1]),
        }
        .win_probabilities()
        .unwrap();
        assert_eq!(deep[0].to_string(), "3/7");
        assert_eq!(deep[3].to_string(), "1/14");
        let sum: BigRational = deep.iter().sum();
        assert!(sum.is_one());
    }

    #[test]
    fn empty_run_has_no_probabilities() {
        let empty = TerminalCounts {
            counts: chips(&[0, 0]),
        };
        assert_eq!(empty.win_probabilities(), Err(AbacusError::EmptyRun));
    }

    #[test]
    fn trace_level_one_binary_tree_lowest_index() {
        // The nine-row account: initial loading plus eight actions. The
        // state after the root's first fire has exactly one terminal chip
        // (in the root's terminal); chip conservation and every later row
        // pin this down.
        let trace = tree(2, 1).trace_run(FiringPolicy::LowestIndex).unwrap();
        assert_eq!(trace.initial.internal, chips(&[2, 1, 1]));
        assert_eq!(trace.initial.terminal, chips(&[0, 0, 0]));

        let expected: &[(TraceAction, [u32; 3], [u32; 3])] = &[
            (TraceAction::AddChip, [3, 1, 1], [0, 0, 0]),
            (TraceAction::Fire(VertexId(0)), [0, 2, 2], [1, 0, 0]),
            (TraceAction::Fire(VertexId(1)), [1, 0, 2], [1, 1, 0]),
            (TraceAction::Fire(VertexId(2)), [2, 0, 0], [1, 1, 1]),
            (TraceAction::AddChip, [3, 0, 0], [1, 1, 1]),
            (TraceAction::Fire(VertexId(0)), [0, 1, 1], [2, 1, 1]),
            (TraceAction::AddChip, [1, 1, 1], [2, 1, 1]),
            (TraceAction::AddChip, [2, 1, 1], [2, 1, 1]),
        ];
        assert_eq!(trace.steps.len(), expected.len());
        for (step, (action, internal, terminal)) in trace.steps.iter().zip(expected) {
            assert_eq!(step.action, *action);
            assert_eq!(step.internal, chips(internal));
            assert_eq!(step.terminal, chips(terminal));
        }
        assert_eq!(trace.stats.chips_added, 4);
    }

    #[test]
    fn trace_single_vertex_is_add_then_fire() {
        let trace = tree(2, 0).trace_run(FiringPolicy::LowestIndex).unwrap();
        assert_eq!(trace.steps.len(), 2);
        assert_eq!(trace.steps[0].action, TraceAction::AddChip);
        assert_eq!(trace.steps[1].action, TraceAction::Fire(VertexId(0)));
        assert_eq!(trace.steps[1].terminal, chips(&[1]));
    }

    #[test]
    fn trace_highest_index_fires_right_leaf_first() {
        let trace = tree(2, 1).trace_run(FiringPolicy::HighestIndex).unwrap();
        let fires: Vec<VertexId> = trace
            .steps
            .iter()
            .filter_map(|s| match s.action {
                TraceAction::Fire(v) => Some(v),
                TraceAction::AddChip => None,
            })
            .collect();
        assert_eq!(
            fires,
            vec![VertexId(0), VertexId(2), VertexId(1), VertexId(0)]
        );
        let last = trace.steps.last().unwrap();
        assert_eq!(last.terminal, chips(&[2, 1, 1]));
    }

    #[test]
    fn trace_conserves_chips() {
        for policy in [
            FiringPolicy::LowestIndex,
            FiringPolicy::HighestIndex,
            FiringPolicy::Queue,
            FiringPolicy::RandomSeeded(7),
        ] {
            let a = tree(2, 2);
            let critical_sum: BigUint = a.critical_loading().internal.iter().sum();
            let trace = a.trace_run(policy).unwrap();
            let mut added = BigUint::zero();
            for step in &trace.steps {
                if step.action == TraceAction::AddChip {
                    added += BigUint::one();
                }
                let internal_sum: BigUint = step.internal.iter().sum();
                let terminal_sum: BigUint = step.terminal.iter().sum();
                assert_eq!(internal_sum + terminal_sum, &critical_sum + &added);
            }
        }
    }

    #[test]
    fn post_run_state_is_critical() {
        let a = tree(3, 2);
        let trace = a.trace_run(FiringPolicy::Queue).unwrap();
        let last = trace.steps.last().unwrap();
        assert_eq!(last.internal, a.critical_loading().internal);
    }

    #[test]
    fn all_policies_agree() {
        let policies = [
            FiringPolicy::LowestIndex,
            FiringPolicy::HighestIndex,
            FiringPolicy::Queue,
            FiringPolicy::RandomSeeded(1),
            FiringPolicy::RandomSeeded(2),
        ];
        for (k, n) in [(2, 2), (3, 1), (2, 3)] {
            let a = tree(k, n);
            let reference = a.run(FiringPolicy::LowestIndex).unwrap();
            for policy in policies {
                let out = a.run(policy).unwrap();
                assert_eq!(out.terminals, reference.terminals);
                assert_eq!(out.stats.chips_added, reference.stats.chips_added);
            }
        }
    }

    #[test]
    fn cap_exceeded_is_reported() {
        let a = tree(2, 2);
        let err = a.run_with_cap(FiringPolicy::LowestIndex, 3).unwrap_err();
        assert_eq!(err, AbacusError::CapExceeded { cap: 3 });
    }

    #[test]
    fn non_root_start_runs_to_completion() {
        // Path of three vertices started at an end; exact values checked
        // against the Markov engine in the integration tests.
        let a = AbacusGraph::augment(path(3, 0).unwrap());
        let out = a.run(FiringPolicy::LowestIndex).unwrap();
        let probs = out.terminals.win_probabilities().unwrap();
        let sum: BigRational = probs.iter().sum();
        assert!(sum.is_one());
        assert_eq!(probs[0].to_string(), "5/8");
    }

}
