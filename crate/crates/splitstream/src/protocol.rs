//! Executable semantics of the collision-resolution algorithm.
//!
//! Two equivalent views are implemented side by side and cross-checked in
//! the acceptance suite rather than assumed equal:
//!
//! * the *tree* view: a group of `n >= D` items splits at random, every
//!   child receives a fresh batch of arrivals at creation, and the recursion
//!   stops below `D`; the statistic of interest is the node count;
//! * the *stack* view: a Markov chain on finite integer sequences, serving
//!   the head cell each slot. A head below `D` is served and removed
//!   (`SSHIFT`), with the next cell receiving its arrival batch as it
//!   reaches the head; a head of `D` or more is split in place (`SPLIT`),
//!   with only the first subgroup receiving arrivals immediately. The time
//!   for the stack to empty from `(n)` has the law of the tree's node count.
//!
//! When the stack empties while arrivals continue, the next slot starts a
//! fresh head cell holding one arrival batch. The chain is regenerative
//! under this convention, which is what the stability probe exploits; it is
//! a modelling choice and is only reachable through [`stack_step`] and
//! [`stability_probe`], never through [`hitting_time`].

use crate::error::Error;
use crate::rng::{self, STREAM_PROBE, STREAM_TRIAL};
use crate::splitting::BranchingLaw;
use crate::stats::{fit_line, RunningMoments};
use crate::Result;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Law of the i.i.d. arrival batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalLaw {
    None,
    Poisson(f64),
    Deterministic(u64),
    /// Finite pmf over nonnegative integers.
    Pmf(Vec<(u64, f64)>),
}

impl ArrivalLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ArrivalLaw::None | ArrivalLaw::Deterministic(_) => Ok(()),
            ArrivalLaw::Poisson(lam) => {
                if *lam < 0.0 || !lam.is_finite() {
                    Err(Error::InvalidArrivals(format!("poisson rate {lam}")))
                } else {
                    Ok(())
                }
            }
            ArrivalLaw::Pmf(entries) => {
                if entries.is_empty() {
                    return Err(Error::InvalidArrivals("empty pmf".into()));
                }
                let total: f64 = entries.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidArrivals(format!(
                        "pmf masses sum to {total}"
                    )));
                }
                if entries.iter().any(|(_, p)| *p < 0.0) {
                    return Err(Error::InvalidArrivals("negative pmf mass".into()));
                }
                Ok(())
            }
        }
    }

    /// Mean batch size.
    pub fn mean(&self) -> f64 {
        match self {
            ArrivalLaw::None => 0.0,
            ArrivalLaw::Poisson(lam) => *lam,
            ArrivalLaw::Deterministic(a) => *a as f64,
            ArrivalLaw::Pmf(entries) => entries.iter().map(|(v, p)| *v as f64 * p).sum(),
        }
    }

    /// Pre-built sampler (validates once, draws many).
    pub fn sampler(&self) -> Result<ArrivalSampler> {
        self.validate()?;
        Ok(match self {
            ArrivalLaw::None => ArrivalSampler::Zero,
            ArrivalLaw::Poisson(lam) if *lam == 0.0 => ArrivalSampler::Zero,
            ArrivalLaw::Poisson(lam) => {
                ArrivalSampler::Poisson(Poisson::new(*lam).expect("validated rate"))
            }
            ArrivalLaw::Deterministic(a) => ArrivalSampler::Constant(*a),
            ArrivalLaw::Pmf(entries) => {
                let mut cumulative = Vec::with_capacity(entries.len());
                let mut acc = 0.0;
                for (v, p) in entries {
                    acc += p;
                    cumulative.push((acc, *v));
                }
                cumulative.last_mut().expect("nonempty").0 = 1.0;
                ArrivalSampler::Table(cumulative)
            }
        })
    }
}

/// Sampler compiled from an [`ArrivalLaw`].
#[derive(Debug, Clone)]
pub enum ArrivalSampler {
    Zero,
    Constant(u64),
    Poisson(Poisson<f64>),
    Table(Vec<(f64, u64)>),
}

impl ArrivalSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            ArrivalSampler::Zero => 0,
            ArrivalSampler::Constant(a) => *a,
            ArrivalSampler::Poisson(p) => p.sample(rng) as u64,
            ArrivalSampler::Table(cum) => {
                let u: f64 = rng.random();
                cum.iter()
                    .find(|(c, _)| u < *c)
                    .map(|(_, v)| *v)
                    .unwrap_or(cum.last().unwrap().1)
            }
        }
    }
}

/// Split `n` items into `G` subgroups: draw `(G, weights)` from the law,
/// then a multinomial allocation of the items over the weights.
pub fn split_group<R: Rng + ?Sized>(
    n: u64,
    law: &BranchingLaw,
    rng: &mut R,
) -> (Vec<u64>, usize) {
    let (g, weights) = law.sample_split(rng);
    let mut counts = vec![0u64; g];
    let mut remaining = n;
    let mut rem_weight = 1.0;
    for i in 0..g - 1 {
        if remaining == 0 {
            break;
        }
        let p = (weights[i] / rem_weight).clamp(0.0, 1.0);
        let c = if p >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, p).expect("valid binomial").sample(rng)
        };
        counts[i] = c;
        remaining -= c;
        rem_weight -= weights[i];
    }
    counts[g - 1] = remaining;
    (counts, g)
}

/// Statistics of one simulated tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    pub nodes: u64,
    pub depth: u32,
    pub leaves: u64,
    /// Total items resolved at the leaves (initial items plus arrivals).
    pub items_processed: u64,
}

/// Simulate the tree started from `n` items. Every child of a split
/// receives one fresh arrival batch at creation; the root does not.
/// Returns `None` when the node count would exceed `node_budget`
/// (censoring, usually a sign of instability — callers must count it).
pub fn simulate_tree<R: Rng + ?Sized>(
    n: u64,
    d: u64,
    arrivals: &ArrivalLaw,
    law: &BranchingLaw,
    node_budget: u64,
    rng: &mut R,
) -> Option<TreeStats> {
    assert!(d >= 1, "termination threshold must be at least 1");
    assert!(node_budget >= 1);
    let sampler = arrivals.sampler().expect("valid arrival law");
    let mut stats = TreeStats {
        nodes: 0,
        depth: 0,
        leaves: 0,
        items_processed: 0,
    };
    // Explicit DFS frontier; survives trees far deeper than any call stack.
    let mut frontier: Vec<(u64, u32)> = vec![(n, 0)];
    while let Some((items, depth)) = frontier.pop() {
        stats.nodes += 1;
        if stats.nodes > node_budget {
            return None;
        }
        stats.depth = stats.depth.max(depth);
        if items < d {
            stats.leaves += 1;
            stats.items_processed += items;
            continue;
        }
        let (counts, _) = split_group(items, law, rng);
        for c in counts.into_iter().rev() {
            frontier.push((c + sampler.draw(rng), depth + 1));
        }
    }
    Some(stats)
}

/// Stack-chain state: pending subgroup sizes, head first. The empty
/// sequence is the idle state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StackState {
    pub cells: VecDeque<u64>,
    pub time: u64,
}

impl StackState {
    pub fn start(n: u64) -> Self {
        Self {
            cells: VecDeque::from([n]),
            time: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn backlog(&self) -> u64 {
        self.cells.iter().sum()
    }
}

/// One slot of the stack chain (see the module docs for the conventions).
pub fn stack_step<R: Rng + ?Sized>(
    mut s: StackState,
    d: u64,
    law: &BranchingLaw,
    arrivals: &ArrivalLaw,
    rng: &mut R,
) -> StackState {
    let sampler = arrivals.sampler().expect("valid arrival law");
    step_in_place(&mut s, d, law, &sampler, rng);
    s
}

/// Advance one slot; returns the change in total backlog.
fn step_in_place<R: Rng + ?Sized>(
    s: &mut StackState,
    d: u64,
    law: &BranchingLaw,
    sampler: &ArrivalSampler,
    rng: &mut R,
) -> i64 {
    s.time += 1;
    match s.cells.pop_front() {
        None => {
            // Idle: a new slot opens with whatever arrived during it.
            match sampler {
                ArrivalSampler::Zero => 0,
                _ => {
                    let a = sampler.draw(rng);
                    s.cells.push_front(a);
                    a as i64
                }
            }
        }
        Some(head) if head < d => {
            // SSHIFT: the served cell leaves; the next cell (if any) takes
            // the head and receives its arrival batch.
            let mut delta = -(head as i64);
            if let Some(next) = s.cells.front_mut() {
                let a = sampler.draw(rng);
                *next += a;
                delta += a as i64;
            }
            delta
        }
        Some(head) => {
            // SPLIT: the head is replaced by its subgroups; only the first
            // receives arrivals now, the rest collect theirs on reaching
            // the head.
            let (counts, _) = split_group(head, law, rng);
            let mut delta = 0i64;
            for (i, c) in counts.into_iter().enumerate().rev() {
                let extra = if i == 0 {
                    let a = sampler.draw(rng);
                    delta += a as i64;
                    a
                } else {
                    0
                };
                s.cells.push_front(c + extra);
            }
            delta
        }
    }
}

/// Steps for the stack chain to empty from `(n)`, or `None` if `horizon`
/// slots pass first (possible instability).
pub fn hitting_time<R: Rng + ?Sized>(
    n: u64,
    d: u64,
    law: &BranchingLaw,
    arrivals: &ArrivalLaw,
    horizon: u64,
    rng: &mut R,
) -> Option<u64> {
    assert!(horizon >= 1);
    let sampler = arrivals.sampler().expect("valid arrival law");
    let mut s = StackState::start(n);
    while s.time < horizon {
        step_in_place(&mut s, d, law, &sampler, rng);
        if s.is_empty() {
            return Some(s.time);
        }
    }
    None
}

/// Monte Carlo estimate of the mean tree size.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    /// Runs that exceeded the node budget; excluded from the mean.
    pub censored: u64,
    /// False when more than 1% of runs were censored: near the critical
    /// rate the size distribution is heavy tailed and the truncated mean is
    /// biased.
    pub trusted: bool,
}

/// Mean node count over independent trees. Trial `i` draws its generator
/// from `(seed, i)`, and per-chunk partial moments merge in index order, so
/// the estimate is independent of the worker count.
pub fn estimate_mean_size(
    n: u64,
    d: u64,
    arrivals: &ArrivalLaw,
    law: &BranchingLaw,
    trials: u64,
    node_budget: u64,
    seed: u64,
) -> SimEstimate {
    assert!(trials >= 1);
    const CHUNK: u64 = 1024;
    let n_chunks = trials.div_ceil(CHUNK);
    let partials: Vec<(RunningMoments, u64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let lo = chunk * CHUNK;
            let hi = ((chunk + 1) * CHUNK).min(trials);
            let mut acc = RunningMoments::new();
            let mut censored = 0u64;
            for trial in lo..hi {
                let mut r = rng::derive(seed, STREAM_TRIAL, trial);
                match simulate_tree(n, d, arrivals, law, node_budget, &mut r) {
                    Some(stats) => acc.push(stats.nodes as f64),
                    None => censored += 1,
                }
            }
            (acc, censored)
        })
        .collect();
    let mut acc = RunningMoments::new();
    let mut censored = 0u64;
    for (part, c) in partials {
        acc = RunningMoments::merge(acc, part);
        censored += c;
    }
    SimEstimate {
        mean: acc.mean(),
        std_error: acc.std_error(),
        trials,
        censored,
        trusted: (censored as f64) <= 0.01 * trials as f64,
    }
}

/// Verdict of the stability probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Inconclusive,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Backlog-drift report of the stability probe.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    /// Fitted linear drift of the mean backlog, items per slot.
    pub slope: f64,
    pub slope_std_error: f64,
    pub classification: Stability,
    /// Fraction of replicas whose stack emptied at least once in the second
    /// half of the horizon.
    pub regenerated_late: f64,
    pub final_mean_backlog: f64,
    pub horizon: u64,
    pub reps: u64,
}

/// Run the stack chain from `(D)` under continuous arrivals and classify
/// the backlog drift.
///
/// Regeneration evidence is decisive: when at least 80% of the replicas
/// emptied during the second half of the horizon, the chain is still
/// renewing and is classified stable regardless of the fitted drift — a
/// mildly positive full-horizon drift is what the approach from the small
/// start state to the stationary backlog level looks like. Without that
/// evidence the fitted drift decides, with a dead zone of two standard
/// errors on either side: above it unstable, below it stable, inside it
/// inconclusive.
pub fn stability_probe(
    d: u64,
    law: &BranchingLaw,
    arrivals: &ArrivalLaw,
    horizon: u64,
    reps: u64,
    seed: u64,
) -> DriftReport {
    assert!(horizon >= 1000, "horizon too short for a drift fit");
    assert!(reps >= 1);
    let sampler = arrivals.sampler().expect("valid arrival law");
    let len = horizon as usize + 1;
    let per_rep: Vec<(Vec<f64>, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let mut r = rng::derive(seed, STREAM_PROBE, rep);
            let mut s = StackState::start(d);
            let mut backlog = d as i64;
            let mut traj = Vec::with_capacity(len);
            traj.push(backlog as f64);
            let mut emptied_late = false;
            for t in 0..horizon {
                backlog += step_in_place(&mut s, d, law, &sampler, &mut r);
                if s.is_empty() && t >= horizon / 2 {
                    emptied_late = true;
                }
                traj.push(backlog as f64);
            }
            (traj, emptied_late)
        })
        .collect();

    let mut mean_traj = vec![0.0f64; len];
    let mut regenerated = 0u64;
    for (traj, emptied) in &per_rep {
        for (m, v) in mean_traj.iter_mut().zip(traj) {
            *m += v;
        }
        if *emptied {
            regenerated += 1;
        }
    }
    for m in &mut mean_traj {
        *m /= reps as f64;
    }
    let fit = fit_line(&mean_traj);
    let regenerated_late = regenerated as f64 / reps as f64;
    let classification = if regenerated_late >= 0.8 {
        Stability::Stable
    } else if fit.slope > 2.0 * fit.slope_std_error {
        Stability::Unstable
    } else if fit.slope < -2.0 * fit.slope_std_error {
        Stability::Stable
    } else {
        Stability::Inconclusive
    };
    DriftReport {
        slope: fit.slope,
        slope_std_error: fit.slope_std_error,
        classification,
        regenerated_late,
        final_mean_backlog: *mean_traj.last().unwrap(),
        horizon,
        reps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn sym_binary() -> BranchingLaw {
        BranchingLaw::symmetric(2).unwrap()
    }

    #[test]
    fn split_of_zero_is_all_zero() {
        let law = sym_binary();
        let mut r = rng::from_seed(1);
        let (counts, g) = split_group(0, &law, &mut r);
        assert_eq!(g, 2);
        assert!(counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn split_counts_conserve_and_concentrate() {
        let law = sym_binary();
        let mut r = rng::from_seed(2);
        let (counts, _) = split_group(1_000_000, &law, &mut r);
        assert_eq!(counts.iter().sum::<u64>(), 1_000_000);
        // 3 sigma of Binomial(1e6, 1/2) is 1500.
        assert!((counts[0] as f64 - 500_000.0).abs() < 1500.0, "{counts:?}");
    }

    #[test]
    fn split_mean_matches_binomial() {
        let law = BranchingLaw::binary(0.3).unwrap();
        let mut acc = RunningMoments::new();
        for i in 0..10_000u64 {
            let mut r = rng::derive(3, rng::STREAM_TRIAL, i);
            let (counts, _) = split_group(100, &law, &mut r);
            acc.push(counts[0] as f64);
        }
        assert!((acc.mean() - 30.0).abs() < 1.4, "mean {}", acc.mean());
    }

    #[test]
    fn tiny_trees() {
        let law = sym_binary();
        let mut r = rng::from_seed(4);
        let t = simulate_tree(1, 2, &ArrivalLaw::None, &law, 1_000, &mut r).unwrap();
        assert_eq!((t.nodes, t.depth, t.leaves, t.items_processed), (1, 0, 1, 1));
        let t = simulate_tree(0, 2, &ArrivalLaw::None, &law, 1_000, &mut r).unwrap();
        assert_eq!((t.nodes, t.depth), (1, 0));
    }

    #[test]
    fn static_mean_size_matches_recurrence() {
        // One-unknown recurrence for n = 2, D = 2, symmetric binary, no
        // arrivals: a2 = 1 + 2 (a2 / 4 + 3/4), so a2 = 5, with variance 8.
        let est = estimate_mean_size(2, 2, &ArrivalLaw::None, &sym_binary(), 1_000_000, 10_000, 7);
        assert_eq!(est.censored, 0);
        assert!(est.trusted);
        assert!(
            (est.mean - 5.0).abs() < 3.0 * est.std_error,
            "mean {} se {}",
            est.mean,
            est.std_error
        );
    }

    #[test]
    fn conservation_without_arrivals() {
        let law = BranchingLaw::binary(0.3).unwrap();
        for i in 0..50u64 {
            let mut r = rng::derive(8, rng::STREAM_TRIAL, i);
            let n = 1 + (i % 200);
            let t = simulate_tree(n, 2, &ArrivalLaw::None, &law, 1 << 20, &mut r).unwrap();
            assert_eq!(t.items_processed, n);
            assert!(t.leaves <= t.nodes);
            assert!(u64::from(t.depth) < t.nodes);
        }
    }

    #[test]
    fn identical_seeds_identical_trees() {
        let law = BranchingLaw::binary(0.3).unwrap();
        let arrivals = ArrivalLaw::Poisson(0.2);
        let a = simulate_tree(64, 2, &arrivals, &law, 1 << 20, &mut rng::from_seed(99)).unwrap();
        let b = simulate_tree(64, 2, &arrivals, &law, 1 << 20, &mut rng::from_seed(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stack_sshift_examples() {
        let law = sym_binary();
        // (1) with no arrivals empties in one slot.
        let s = StackState::start(1);
        let s = stack_step(s, 2, &law, &ArrivalLaw::None, &mut rng::from_seed(0));
        assert!(s.is_empty());
        assert_eq!(s.time, 1);

        // (0, 4) exposes the next cell plus its (zero) arrivals.
        let mut s = StackState::start(0);
        s.cells.push_back(4);
        let s = stack_step(s, 2, &law, &ArrivalLaw::None, &mut rng::from_seed(0));
        assert_eq!(s.cells, VecDeque::from([4]));
    }

    #[test]
    fn stack_split_structure() {
        // (3, 2) with D = 2: the head splits into two cells, the first of
        // which receives the deterministic arrival batch of 1; the tail
        // cell is untouched.
        let law = sym_binary();
        let mut s = StackState::start(3);
        s.cells.push_back(2);
        let s = stack_step(s, 2, &law, &ArrivalLaw::Deterministic(1), &mut rng::from_seed(5));
        assert_eq!(s.cells.len(), 3);
        assert_eq!(*s.cells.back().unwrap(), 2);
        assert_eq!(s.cells.iter().sum::<u64>(), 6);
        assert_eq!(s.time, 1);
    }

    #[test]
    fn hitting_time_boundary_cases() {
        let law = sym_binary();
        for arrivals in [ArrivalLaw::None, ArrivalLaw::Poisson(0.4)] {
            for n in 0..2u64 {
                let t = hitting_time(n, 2, &law, &arrivals, 100, &mut rng::from_seed(n)).unwrap();
                assert_eq!(t, 1, "n = {n}, arrivals {arrivals:?}");
            }
        }
    }

    #[test]
    fn hitting_time_mean_matches_tree_size() {
        let law = sym_binary();
        let mut acc = RunningMoments::new();
        for i in 0..1_000_000u64 {
            let mut r = rng::derive(13, rng::STREAM_TRIAL, i);
            let t = hitting_time(2, 2, &law, &ArrivalLaw::None, 100_000, &mut r).unwrap();
            acc.push(t as f64);
        }
        assert!(
            (acc.mean() - 5.0).abs() < 3.0 * acc.std_error(),
            "mean {}",
            acc.mean()
        );
    }

    #[test]
    fn empirical_means_are_monotone() {
        let law = sym_binary();
        let mut prev = 0.0;
        for n in [2u64, 4, 8] {
            let est = estimate_mean_size(n, 2, &ArrivalLaw::None, &law, 40_000, 1 << 22, 15);
            assert!(est.mean > prev, "n = {n}: {} vs {prev}", est.mean);
            prev = est.mean;
        }
        let mut prev = 0.0;
        for lam in [0.0, 0.1, 0.2] {
            let est =
                estimate_mean_size(4, 2, &ArrivalLaw::Poisson(lam), &law, 40_000, 1 << 22, 16);
            assert!(est.mean > prev, "lam = {lam}: {} vs {prev}", est.mean);
            prev = est.mean;
        }
    }

    #[test]
    fn estimate_n1_is_exact() {
        let est = estimate_mean_size(1, 2, &ArrivalLaw::None, &sym_binary(), 100, 100, 0);
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn probe_classifications() {
        let law = sym_binary();
        // No arrivals: the backlog drains and stays at zero.
        let rep = stability_probe(2, &law, &ArrivalLaw::None, 5_000, 4, 21);
        assert_eq!(rep.classification, Stability::Stable);

        // lambda = D - 1 + 0.5: each slot serves at most D - 1 items.
        let rep = stability_probe(2, &law, &ArrivalLaw::Poisson(1.5), 5_000, 4, 22);
        assert_eq!(rep.classification, Stability::Unstable);
    }

    #[test]
    fn probe_brackets_critical_rate() {
        let law = sym_binary();
        let rep = stability_probe(2, &law, &ArrivalLaw::Poisson(0.30), 30_000, 8, 23);
        assert_eq!(rep.classification, Stability::Stable, "{rep:?}");
        let rep = stability_probe(2, &law, &ArrivalLaw::Poisson(0.42), 30_000, 8, 24);
        assert_eq!(rep.classification, Stability::Unstable, "{rep:?}");
    }
}
