//! Search for arrow reductions: adaptive prefixes whose leaves all fall into
//! an allowed class within an allowed number of weighings.

use std::fmt;
use std::str::FromStr;

use dashmap::DashMap;
use thiserror::Error;

use super::{CanonicalKey, Exhausted, SearchBudget, Solver, SolverError, SolverOptions};
use crate::family::{bit, mask_candidate, mask_coins, mask_to_coins, Family, Mask};
use crate::model::{CandidateSet, Instance, ModelError, Weighing};
use crate::representability::{
    classify_leaf, close_one_representable, family_one_rep, family_two_rep, is_one_representable,
    LeafClass, RepError,
};
use crate::strategy::{splice, PrefixTree, StrategyError, StrategyTree};

/// A leaf reached after at most `depth` weighings must be of class `class`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafProfile {
    pub depth: u32,
    pub class: LeafClass,
}

impl LeafProfile {
    /// Largest leaf this profile accepts.
    fn size_cap(&self) -> u128 {
        match self.class {
            LeafClass::Singleton => 1,
            LeafClass::OneRep(r) => r.max(1) as u128,
            LeafClass::TwoRep { t: 0, s } => s.max(1) as u128,
            LeafClass::TwoRep { t, s } => (t * s).max(1) as u128,
            LeafClass::Unclassified => u128::MAX,
        }
    }
}

impl fmt::Display for LeafProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.class, self.depth)
    }
}

/// `one-rep:4@3` style.
impl FromStr for LeafProfile {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (class, depth) = s.rsplit_once('@').ok_or_else(|| ModelError::Parse {
            what: "leaf profile",
            input: s.to_string(),
        })?;
        Ok(LeafProfile {
            depth: depth.parse().map_err(|_| ModelError::Parse {
                what: "leaf profile depth",
                input: s.to_string(),
            })?,
            class: class.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowSpec {
    pub instance: Instance,
    pub profiles: Vec<LeafProfile>,
}

impl ArrowSpec {
    pub fn new(instance: Instance, profiles: Vec<LeafProfile>) -> Result<Self, SolverError> {
        if profiles.is_empty() {
            return Err(SolverError::Model(ModelError::InvalidWeighing(
                "arrow needs at least one leaf profile".into(),
            )));
        }
        Ok(ArrowSpec { instance, profiles })
    }

    pub fn max_depth(&self) -> u32 {
        self.profiles.iter().map(|p| p.depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrowResult {
    Found {
        prefix: PrefixTree,
        depth: u32,
        /// class of every open leaf, in [`PrefixTree::open_leaves`] order
        leaves: Vec<LeafClass>,
    },
    Infeasible {
        max_depth: u32,
    },
    Exhausted {
        nodes: u64,
    },
}

struct ArrowSearch<'a> {
    solver: Solver,
    spec: &'a ArrowSpec,
    set_masks: Vec<Mask>,
    raw_keys: bool,
    memo: DashMap<(CanonicalKey, u32), bool>,
}

impl ArrowSearch<'_> {
    fn matches(&self, f: &Family, used: u32) -> bool {
        let n = f.len();
        if n <= 1 {
            return true;
        }
        self.spec
            .profiles
            .iter()
            .filter(|p| p.depth >= used && n as u128 <= p.size_cap())
            .any(|p| match p.class {
                LeafClass::Singleton => false,
                LeafClass::OneRep(_) => family_one_rep(f),
                LeafClass::TwoRep { t: 0, .. } => family_two_rep(f),
                LeafClass::TwoRep { t, s } => self.product_form_fits(f, t, s),
                LeafClass::Unclassified => true,
            })
    }

    /// Some set splits the members into at most `s` groups of at most `t`,
    /// each member owning a coin private within its group.
    fn product_form_fits(&self, f: &Family, t: usize, s: usize) -> bool {
        self.set_masks.iter().any(|&sj| {
            let mut groups: Vec<(Mask, Vec<Mask>)> = Vec::new();
            for &x in &f.members {
                match groups.iter_mut().find(|g| g.0 == x & sj) {
                    Some(g) => g.1.push(x),
                    None => groups.push((x & sj, vec![x])),
                }
            }
            groups.len() <= s
                && groups.iter().all(|(_, g)| {
                    g.len() <= t
                        && g.iter().all(|&x| {
                            mask_coins(x & !sj)
                                .any(|c| g.iter().filter(|&&y| y & bit(c) != 0).count() == 1)
                        })
                })
        })
    }

    /// Largest family that can still be finished from `used` weighings on.
    fn reach(&self, used: u32, extra: u32) -> u128 {
        self.spec
            .profiles
            .iter()
            .filter(|p| p.depth >= used + extra)
            .map(|p| {
                let k = p.depth - used - extra;
                if k >= 40 {
                    u128::MAX
                } else {
                    3u128.pow(k).saturating_mul(p.size_cap())
                }
            })
            .max()
            .unwrap_or(0)
    }

    fn ok(&self, f: &Family, used: u32) -> Result<bool, Exhausted> {
        if self.matches(f, used) {
            return Ok(true);
        }
        if used >= self.spec.max_depth() || f.len() as u128 > self.reach(used, 0) {
            return Ok(false);
        }
        let classes = self.solver.classes(f);
        let key = if self.raw_keys {
            CanonicalKey::raw(f)
        } else {
            self.solver.key(f, &classes)
        };
        let memo_key = (key, used);
        if let Some(v) = self.memo.get(&memo_key) {
            self.solver.hit();
            return Ok(*v);
        }
        self.solver.tick()?;
        let cap = self.reach(used, 1).min(usize::MAX as u128) as usize;
        let mut found = false;
        for mv in self.solver.moves(f, &classes, cap) {
            let mut all = true;
            let mut parts: Vec<&Vec<Mask>> = mv.parts.iter().collect();
            parts.sort_by_key(|p| std::cmp::Reverse(p.len()));
            for p in parts {
                let child = Family {
                    members: p.clone(),
                    coins: f.coins,
                };
                if !self.ok(&child, used + 1)? {
                    all = false;
                    break;
                }
            }
            if all {
                found = true;
                break;
            }
        }
        self.memo.insert(memo_key, found);
        Ok(found)
    }

    fn build(&self, f: &Family, used: u32) -> Result<PrefixTree, Exhausted> {
        let inst = &self.spec.instance;
        if self.matches(f, used) {
            let d = CandidateSet::from_candidates(
                inst,
                f.members
                    .iter()
                    .map(|&m| mask_candidate(inst, m).expect("member mask")),
            )
            .expect("members fit instance");
            return Ok(PrefixTree::Open(d));
        }
        let classes = self.solver.classes(f);
        let cap = self.reach(used, 1).min(usize::MAX as u128) as usize;
        for mv in self.solver.moves(f, &classes, cap) {
            let children: Vec<Family> = mv
                .parts
                .iter()
                .map(|p| Family {
                    members: p.clone(),
                    coins: f.coins,
                })
                .collect();
            let mut all = true;
            for c in &children {
                if !self.ok(c, used + 1)? {
                    all = false;
                    break;
                }
            }
            if !all {
                continue;
            }
            let out: [PrefixTree; 3] = [
                self.build(&children[0], used + 1)?,
                self.build(&children[1], used + 1)?,
                self.build(&children[2], used + 1)?,
            ];
            let w = Weighing::new(
                inst,
                mask_to_coins(inst, mv.left),
                mask_to_coins(inst, mv.right),
            )
            .expect("valid weighing");
            return Ok(PrefixTree::Node {
                weighing: w,
                children: Box::new(out),
            });
        }
        unreachable!("build called on a family without an arrow")
    }
}

/// Looks for a prefix tree meeting `spec`; the first one in search order is returned.
pub fn find_arrow(
    spec: &ArrowSpec,
    budget: SearchBudget,
    options: SolverOptions,
) -> Result<ArrowResult, SolverError> {
    let inst = &spec.instance;
    let d = CandidateSet::full_space(inst)?;
    let f = Family::from_candidate_set(&d).ok_or(SolverError::TooManyCoins(inst.total_coins()))?;
    let mut offset = 0u32;
    let set_masks = inst
        .sizes()
        .iter()
        .map(|&n| {
            let m = (offset..offset + n).fold(0, |a, c| a | bit(c));
            offset += n;
            m
        })
        .collect();
    let search = ArrowSearch {
        solver: Solver::new(
            SolverOptions {
                threads: 1,
                ..options
            },
            budget,
        ),
        spec,
        set_masks,
        raw_keys: !options.canonicalize
            || spec
                .profiles
                .iter()
                .any(|p| matches!(p.class, LeafClass::TwoRep { .. })),
        memo: DashMap::new(),
    };
    let exhausted = || ArrowResult::Exhausted {
        nodes: search.solver.stats().nodes,
    };
    match search.ok(&f, 0) {
        Err(Exhausted) => Ok(exhausted()),
        Ok(false) => Ok(ArrowResult::Infeasible {
            max_depth: spec.max_depth(),
        }),
        Ok(true) => match search.build(&f, 0) {
            Err(Exhausted) => Ok(exhausted()),
            Ok(prefix) => {
                let leaves = prefix
                    .open_leaves()
                    .iter()
                    .map(|(_, d)| classify_leaf(d))
                    .collect();
                Ok(ArrowResult::Found {
                    depth: prefix.depth() as u32,
                    prefix,
                    leaves,
                })
            }
        },
    }
}

#[derive(Debug, Error)]
pub enum CloseError {
    #[error("open leaf {leaf} is {class}; only 1-representable leaves can be closed")]
    Unclosable { leaf: usize, class: LeafClass },
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Closes every 1-representable leaf by ternary search and splices the result.
pub fn close_arrow(prefix: &PrefixTree) -> Result<StrategyTree, CloseError> {
    let closers = prefix
        .open_leaves()
        .into_iter()
        .enumerate()
        .map(|(leaf, (_, d))| {
            if d.len() <= 1 {
                return Ok(None);
            }
            match is_one_representable(d) {
                Some(reps) => Ok(Some(close_one_representable(d, &reps)?)),
                None => Err(CloseError::Unclosable {
                    leaf,
                    class: classify_leaf(d),
                }),
            }
        })
        .collect::<Result<Vec<_>, CloseError>>()?;
    Ok(splice(prefix, &closers)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::verify;
    use std::time::Duration;

    fn budget() -> SearchBudget {
        SearchBudget {
            max_depth: 8,
            node_limit: 5_000_000,
            time_limit: Duration::from_secs(120),
        }
    }

    fn spec(inst: &str, profiles: &[&str]) -> ArrowSpec {
        ArrowSpec::new(
            inst.parse().unwrap(),
            profiles.iter().map(|p| p.parse().unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn singleton_at_depth_zero_is_infeasible() {
        let r = find_arrow(
            &spec("2,2", &["singleton@0"]),
            budget(),
            SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(r, ArrowResult::Infeasible { max_depth: 0 });
    }

    #[test]
    fn trivial_root_match() {
        let r = find_arrow(
            &spec("2,2", &["other@0"]),
            budget(),
            SolverOptions::default(),
        )
        .unwrap();
        assert!(matches!(r, ArrowResult::Found { depth: 0, .. }));
    }

    #[test]
    fn one_weighing_to_one_rep_leaves() {
        let s = spec("3,3", &["one-rep:3@1"]);
        let r = find_arrow(&s, budget(), SolverOptions::default()).unwrap();
        let ArrowResult::Found {
            prefix,
            depth,
            leaves,
        } = r
        else {
            panic!("{r:?}")
        };
        assert_eq!(depth, 1);
        assert!(leaves
            .iter()
            .all(|c| matches!(c, LeafClass::Singleton | LeafClass::OneRep(_))));
        let tree = close_arrow(&prefix).unwrap();
        let report = verify(&tree, &s.instance).unwrap();
        assert!(report.ok());
        assert_eq!(report.depth, 2);
    }

    /// Existence of a one-weighing arrow, checked against brute force over all pans.
    #[test]
    fn one_step_arrows_match_brute_force() {
        let cases = [
            ("3,3", 3, true),
            ("3,3", 4, true),
            ("2,2", 2, true),
            ("4,4", 6, false),
            ("3,4", 4, true),
            ("2,3", 2, true),
            ("2,4", 3, true),
            ("5,5", 9, false),
        ];
        for (inst, r, exists) in cases {
            let s = spec(inst, &[&format!("one-rep:{r}@1")]);
            for options in [SolverOptions::default(), SolverOptions::unreduced()] {
                let got = find_arrow(&s, budget(), options).unwrap();
                assert_eq!(
                    matches!(got, ArrowResult::Found { .. }),
                    exists,
                    "{inst} r={r}"
                );
            }
        }
    }

    #[test]
    fn profile_syntax() {
        let p: LeafProfile = "two-rep:2x7@3".parse().unwrap();
        assert_eq!(p.depth, 3);
        assert_eq!(p.class, LeafClass::TwoRep { t: 2, s: 7 });
        assert_eq!(p.to_string(), "two-rep:2x7@3");
        assert!("one-rep:4".parse::<LeafProfile>().is_err());
    }
}
