//! Exact minimum-depth strategy search.
//!
//! `feasible(D, t)` decides whether `D` can be resolved in `t` weighings.
//! The root is deepened from the information bound upward, so a solved depth
//! `t` comes with an exhaustive refutation of every depth below it (or with
//! the counting bound). Subproblems are memoized on their canonical key;
//! each entry records the smallest depth proven feasible and the largest
//! depth proven infeasible, both monotone.

mod arrow;
pub mod canon;
pub mod enumerate;
mod oracle;

pub use arrow::{close_arrow, find_arrow, ArrowResult, ArrowSpec, CloseError, LeafProfile};
pub use canon::{canonical_key, CanonicalKey};
pub use oracle::{oracle_min_depth, OracleError, ORACLE_MAX_CANDIDATES, ORACLE_MAX_COINS};

use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use dashmap::DashMap;
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::exact::{ceil_log3, ceil_log3_u64};
use crate::family::{mask_candidate, mask_to_coins, Classes, Family, Mask, MAX_COINS};
use crate::model::{CandidateSet, Instance, ModelError, Weighing};
use crate::strategy::StrategyTree;
use enumerate::{enumerate, for_each_move, Move};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("instance has {0} coins; the solver handles at most {MAX_COINS}")]
    TooManyCoins(u32),
    #[error("candidate set is empty")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_depth: u32,
    pub node_limit: u64,
    pub time_limit: Duration,
}

impl SearchBudget {
    /// Depth up to the information bound plus two, 60 s, 10^8 nodes.
    pub fn for_lower_bound(lower: u32) -> Self {
        SearchBudget {
            max_depth: lower + 2,
            node_limit: 100_000_000,
            time_limit: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Memoize on canonical keys rather than raw member lists.
    pub canonicalize: bool,
    /// Enumerate weighings over interchangeability classes.
    pub class_reduction: bool,
    /// Drop weighings repeating an earlier partition.
    pub dedupe: bool,
    pub threads: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            canonicalize: true,
            class_reduction: true,
            dedupe: true,
            threads: 1,
        }
    }
}

impl SolverOptions {
    /// No symmetry reduction at all; for cross-checking.
    pub fn unreduced() -> Self {
        SolverOptions {
            canonicalize: false,
            class_reduction: false,
            dedupe: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchResult {
    Optimal {
        tree: StrategyTree,
        depth: u32,
    },
    /// No strategy of depth `<= max_depth` exists.
    Infeasible {
        max_depth: u32,
    },
    /// The budget ran out; depths below `lower_bound` are refuted.
    Exhausted {
        lower_bound: u32,
        upper_bound: Option<u32>,
        nodes: u64,
    },
}

impl SearchResult {
    pub fn depth(&self) -> Option<u32> {
        match self {
            SearchResult::Optimal { depth, .. } => Some(*depth),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub memo_hits: u64,
    pub memo_entries: usize,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Exhausted;

#[derive(Debug, Clone, Copy)]
struct Entry {
    /// smallest depth known feasible
    feasible: u32,
    /// largest depth known infeasible, +1 (0 = none)
    infeasible: u32,
}

/// Internal tree over coin masks.
#[derive(Debug, Clone)]
pub(crate) enum Plan {
    Empty,
    Leaf(Mask),
    Node {
        left: Mask,
        right: Mask,
        children: Box<[Plan; 3]>,
    },
}

impl Plan {
    pub(crate) fn into_tree(self, inst: &Instance) -> StrategyTree {
        match self {
            Plan::Empty => StrategyTree::Unreachable,
            Plan::Leaf(m) => StrategyTree::Leaf(mask_candidate(inst, m).expect("member mask")),
            Plan::Node {
                left,
                right,
                children,
            } => {
                let w = Weighing::new(inst, mask_to_coins(inst, left), mask_to_coins(inst, right))
                    .expect("search emits valid weighings");
                let [a, b, c] = *children;
                StrategyTree::node(w, [a.into_tree(inst), b.into_tree(inst), c.into_tree(inst)])
            }
        }
    }
}

/// Parallel sibling evaluation kicks in from this family size.
const PARALLEL_MIN: usize = 27;

pub struct Solver {
    options: SolverOptions,
    budget: SearchBudget,
    memo: DashMap<CanonicalKey, Entry>,
    nodes: AtomicU64,
    hits: AtomicU64,
    started: Instant,
    pool: Option<rayon::ThreadPool>,
}

impl Solver {
    pub fn new(options: SolverOptions, budget: SearchBudget) -> Self {
        let pool = (options.threads > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(options.threads)
                .build()
                .expect("thread pool")
        });
        Solver {
            options,
            budget,
            memo: DashMap::new(),
            nodes: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            started: Instant::now(),
            pool,
        }
    }

    pub fn stats(&self) -> SearchStats {
        SearchStats {
            nodes: self.nodes.load(Ordering::Relaxed),
            memo_hits: self.hits.load(Ordering::Relaxed),
            memo_entries: self.memo.len(),
            wall_time_ms: self.started.elapsed().as_millis(),
        }
    }

    fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    pub(crate) fn classes(&self, f: &Family) -> Classes {
        if self.options.class_reduction {
            f.classes()
        } else {
            f.singleton_classes()
        }
    }

    pub(crate) fn key(&self, f: &Family, classes: &Classes) -> CanonicalKey {
        if self.options.canonicalize {
            canonical_key(f, classes)
        } else {
            CanonicalKey::raw(f)
        }
    }

    pub(crate) fn moves(&self, f: &Family, classes: &Classes, cap: usize) -> Vec<Move> {
        enumerate(f, classes, cap, self.options.dedupe)
    }

    fn stream<B>(
        &self,
        f: &Family,
        classes: &Classes,
        cap: usize,
        visit: impl FnMut(Move) -> ControlFlow<B>,
    ) -> Option<B> {
        for_each_move(f, classes, cap, self.options.dedupe, visit)
    }

    pub(crate) fn tick(&self) -> Result<(), Exhausted> {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.budget.node_limit {
            return Err(Exhausted);
        }
        if n.is_multiple_of(256) && self.started.elapsed() > self.budget.time_limit {
            return Err(Exhausted);
        }
        Ok(())
    }

    pub(crate) fn hit(&self) {
        self.hits.fetch_add(1, Ordering::Relaxed);
    }

    /// Moves tried concurrently per round; a round stops the search at its
    /// first success, so at most this many siblings are explored in vain.
    fn chunk(&self, n: usize) -> Option<usize> {
        let pool = self.pool.as_ref()?;
        (n >= PARALLEL_MIN).then(|| 2 * pool.current_num_threads())
    }

    /// Can `f` be resolved within `t` weighings? Sibling moves run in
    /// parallel only at the top level (`top`).
    fn feasible(&self, f: &Family, t: u32, top: bool) -> Result<bool, Exhausted> {
        let n = f.len();
        if n <= 1 {
            return Ok(true);
        }
        if t == 0 || (t < 40 && n as u128 > 3u128.pow(t)) {
            return Ok(false);
        }
        // two members always differ in a pair of coins that can be weighed
        // against each other; three need at most two such weighings
        if n == 2 || (n == 3 && t >= 2) {
            return Ok(true);
        }
        let classes = self.classes(f);
        let key = self.key(f, &classes);
        if let Some(e) = self.memo.get(&key) {
            if e.feasible <= t {
                self.hit();
                return Ok(true);
            }
            if t < e.infeasible {
                self.hit();
                return Ok(false);
            }
        }
        self.tick()?;

        let cap = 3usize.saturating_pow(t - 1);
        let check = |mv: &Move| -> Result<bool, Exhausted> {
            let mut parts: Vec<&Vec<Mask>> = mv.parts.iter().collect();
            parts.sort_by_key(|p| std::cmp::Reverse(p.len()));
            for p in parts {
                let child = Family {
                    members: p.clone(),
                    coins: f.coins,
                };
                if !self.feasible(&child, t - 1, false)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let outcome = if let Some(size) = self.chunk(n).filter(|_| top) {
            let round = |batch: &[Move]| {
                batch.par_iter().map(check).find_map_first(|r| match r {
                    Ok(false) => None,
                    other => Some(other),
                })
            };
            let mut batch = Vec::with_capacity(size);
            let hit = self.stream(f, &classes, cap, |mv| {
                batch.push(mv);
                if batch.len() < size {
                    return ControlFlow::Continue(());
                }
                match round(&batch) {
                    Some(r) => ControlFlow::Break(r),
                    None => {
                        batch.clear();
                        ControlFlow::Continue(())
                    }
                }
            });
            hit.or_else(|| round(&batch))
        } else {
            self.stream(f, &classes, cap, |mv| match check(&mv) {
                Ok(false) => ControlFlow::Continue(()),
                other => ControlFlow::Break(other),
            })
        };
        let found = outcome.transpose()?.is_some();
        self.record(key, t, found);
        Ok(found)
    }

    fn record(&self, key: CanonicalKey, t: u32, feasible: bool) {
        let mut e = self.memo.entry(key).or_insert(Entry {
            feasible: u32::MAX,
            infeasible: 0,
        });
        if feasible {
            e.feasible = e.feasible.min(t);
        } else {
            e.infeasible = e.infeasible.max(t + 1);
        }
    }

    /// Strategy of depth `<= t` for `f`; `f` must be feasible at `t`.
    fn build(&self, f: &Family, t: u32) -> Result<Plan, Exhausted> {
        match f.len() {
            0 => return Ok(Plan::Empty),
            1 => return Ok(Plan::Leaf(f.members[0])),
            _ => {}
        }
        let classes = self.classes(f);
        let cap = 3usize.saturating_pow(t - 1);
        let chosen = self.stream(f, &classes, cap, |mv| {
            for p in &mv.parts {
                let child = Family {
                    members: p.clone(),
                    coins: f.coins,
                };
                match self.feasible(&child, t - 1, false) {
                    Ok(true) => {}
                    Ok(false) => return ControlFlow::Continue(()),
                    Err(e) => return ControlFlow::Break(Err(e)),
                }
            }
            ControlFlow::Break(Ok(mv))
        });
        let mv = chosen.expect("build called on an infeasible family")?;
        let mut children: [Plan; 3] = [Plan::Empty, Plan::Empty, Plan::Empty];
        for (slot, p) in children.iter_mut().zip(&mv.parts) {
            let child = Family {
                members: p.clone(),
                coins: f.coins,
            };
            *slot = self.build(&child, t - 1)?;
        }
        Ok(Plan::Node {
            left: mv.left,
            right: mv.right,
            children: Box::new(children),
        })
    }

    /// Exact minimax depth of `d` with a proof tree.
    pub fn min_depth(&self, d: &CandidateSet) -> Result<SearchResult, SolverError> {
        if d.is_empty() {
            return Err(SolverError::Empty);
        }
        let inst = d.instance();
        let f =
            Family::from_candidate_set(d).ok_or(SolverError::TooManyCoins(inst.total_coins()))?;
        let lower = ceil_log3(&BigUint::from(d.len()));
        let upper_hint = if d.len() == d.space_len() {
            Some(inst.sizes().iter().map(|&n| ceil_log3_u64(n as u64)).sum())
        } else {
            None
        };
        Ok(self.install(|| self.deepen(&f, inst, lower, upper_hint)))
    }

    fn deepen(
        &self,
        f: &Family,
        inst: &Instance,
        lower: u32,
        upper_hint: Option<u32>,
    ) -> SearchResult {
        let exhausted = |t: u32| SearchResult::Exhausted {
            lower_bound: t,
            upper_bound: upper_hint,
            nodes: self.nodes.load(Ordering::Relaxed),
        };
        for t in lower..=self.budget.max_depth {
            match self.feasible(f, t, true) {
                Ok(true) => {
                    return match self.build(f, t) {
                        Ok(plan) => SearchResult::Optimal {
                            tree: plan.into_tree(inst),
                            depth: t,
                        },
                        Err(Exhausted) => exhausted(t),
                    };
                }
                Ok(false) => {}
                Err(Exhausted) => return exhausted(t),
            }
        }
        SearchResult::Infeasible {
            max_depth: self.budget.max_depth,
        }
    }
}

/// Solver report for a whole instance.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub instance: Instance,
    pub lower_bound: u32,
    pub result: SearchResult,
    pub stats: SearchStats,
}

/// `g_1(n_1, ..., n_m)`: exact minimum over the full candidate space.
pub fn solve_exact(
    inst: &Instance,
    budget: SearchBudget,
    options: SolverOptions,
) -> Result<SolveReport, SolverError> {
    let d = CandidateSet::full_space(inst)?;
    let solver = Solver::new(options, budget);
    let result = solver.min_depth(&d)?;
    Ok(SolveReport {
        instance: inst.clone(),
        lower_bound: ceil_log3(&inst.space_size()),
        result,
        stats: solver.stats(),
    })
}

/// Convenience: exact depth of `d` with default options and a generous budget.
pub fn min_depth(d: &CandidateSet, budget: SearchBudget) -> Result<SearchResult, SolverError> {
    Solver::new(SolverOptions::default(), budget).min_depth(d)
}

/// Weighings of `d` after class reduction, mirror and partition dedupe.
pub fn enumerate_weighings(d: &CandidateSet) -> Result<Vec<Weighing>, SolverError> {
    let inst = d.instance();
    let f = Family::from_candidate_set(d).ok_or(SolverError::TooManyCoins(inst.total_coins()))?;
    Ok(enumerate(&f, &f.classes(), usize::MAX, true)
        .into_iter()
        .map(|mv| {
            Weighing::new(
                inst,
                mask_to_coins(inst, mv.left),
                mask_to_coins(inst, mv.right),
            )
            .expect("valid weighing")
        })
        .collect())
}
