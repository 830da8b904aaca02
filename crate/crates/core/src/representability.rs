//! 1- and 2-representable candidate sets.
//!
//! A set `D` is 1-representable when every member `Z` owns a coin that no
//! other member contains; such a set with `r` members is resolved by a plain
//! ternary search over those coins in `ceil(log3 r)` weighings. It is
//! 2-representable when every member owns a pair of coins that no other
//! member contains jointly.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::family::{Family, Mask};
use crate::model::{Candidate, CandidateSet, CoinId, Instance, ModelError, Weighing};
use crate::strategy::{verify_domain, StrategyError, StrategyTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeafClass {
    Singleton,
    OneRep(usize),
    /// `t` is the largest group sharing one coin, `s` the number of groups;
    /// `t == 0` when the set is 2-representable without that product shape.
    TwoRep {
        t: usize,
        s: usize,
    },
    Unclassified,
}

impl fmt::Display for LeafClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafClass::Singleton => write!(f, "singleton"),
            LeafClass::OneRep(r) => write!(f, "one-rep:{r}"),
            LeafClass::TwoRep { t, s } => write!(f, "two-rep:{t}x{s}"),
            LeafClass::Unclassified => write!(f, "other"),
        }
    }
}

impl FromStr for LeafClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ModelError::Parse {
            what: "leaf class",
            input: s.to_string(),
        };
        match s {
            "singleton" => return Ok(LeafClass::Singleton),
            "other" => return Ok(LeafClass::Unclassified),
            _ => {}
        }
        if let Some(r) = s.strip_prefix("one-rep:") {
            return r.parse().map(LeafClass::OneRep).map_err(|_| err());
        }
        if let Some(ts) = s.strip_prefix("two-rep:") {
            let (t, s2) = ts.split_once('x').ok_or_else(err)?;
            return Ok(LeafClass::TwoRep {
                t: t.parse().map_err(|_| err())?,
                s: s2.parse().map_err(|_| err())?,
            });
        }
        Err(err())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representative {
    One(CoinId),
    Two(CoinId, CoinId),
}

/// Member to representative, in the set's enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentativeMap {
    pub entries: Vec<(Candidate, Representative)>,
}

impl RepresentativeMap {
    pub fn get(&self, x: &Candidate) -> Option<Representative> {
        self.entries.iter().find(|(c, _)| c == x).map(|(_, r)| *r)
    }
}

#[derive(Debug, Error)]
pub enum RepError {
    #[error("representative map does not fit the candidate set")]
    BadMap,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

fn occurrences(d: &CandidateSet) -> HashMap<CoinId, usize> {
    let mut count = HashMap::new();
    for x in d.iter() {
        for c in x.coins() {
            *count.entry(c).or_insert(0) += 1;
        }
    }
    count
}

/// Smallest private coin per member, or `None` if some member has none.
pub fn is_one_representable(d: &CandidateSet) -> Option<RepresentativeMap> {
    let count = occurrences(d);
    let entries = d
        .iter()
        .map(|x| {
            let rep = x.coins().find(|c| count[c] == 1)?;
            Some((x, Representative::One(rep)))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(RepresentativeMap { entries })
}

/// Lexicographically smallest jointly-private pair per member.
pub fn is_two_representable(d: &CandidateSet) -> Option<RepresentativeMap> {
    let mut pairs: HashMap<(CoinId, CoinId), usize> = HashMap::new();
    for x in d.iter() {
        let coins: Vec<CoinId> = x.coins().collect();
        for i in 0..coins.len() {
            for j in i + 1..coins.len() {
                *pairs.entry((coins[i], coins[j])).or_insert(0) += 1;
            }
        }
    }
    let entries = d
        .iter()
        .map(|x| {
            let coins: Vec<CoinId> = x.coins().collect();
            let pair = (0..coins.len())
                .flat_map(|i| (i + 1..coins.len()).map(move |j| (i, j)))
                .map(|(i, j)| (coins[i], coins[j]))
                .find(|p| pairs[p] == 1)?;
            Some((x, Representative::Two(pair.0, pair.1)))
        })
        .collect::<Option<Vec<_>>>()?;
    Some(RepresentativeMap { entries })
}

/// Best `(t, s)` over all sets `j`: members grouped by their coin in `S_j`,
/// each member owning a coin private within its group.
pub fn product_form(d: &CandidateSet) -> Option<(usize, usize)> {
    let members: Vec<Candidate> = d.iter().collect();
    if members.is_empty() || d.instance().num_sets() < 2 {
        return None;
    }
    (0..d.instance().num_sets())
        .filter_map(|j| {
            let mut groups: HashMap<u32, Vec<&Candidate>> = HashMap::new();
            for x in &members {
                groups.entry(x.0[j]).or_default().push(x);
            }
            let ok = groups.values().all(|g| {
                let mut count: HashMap<CoinId, usize> = HashMap::new();
                for x in g {
                    for c in x.coins() {
                        *count.entry(c).or_insert(0) += 1;
                    }
                }
                g.iter()
                    .all(|x| x.coins().any(|c| c.set as usize != j + 1 && count[&c] == 1))
            });
            let t = groups.values().map(|g| g.len()).max().unwrap_or(0);
            ok.then_some((t, groups.len()))
        })
        .min()
}

pub fn classify_leaf(d: &CandidateSet) -> LeafClass {
    match d.len() {
        0 => LeafClass::Unclassified,
        1 => LeafClass::Singleton,
        r if is_one_representable(d).is_some() => LeafClass::OneRep(r),
        r => {
            if is_two_representable(d).is_none() {
                return LeafClass::Unclassified;
            }
            match product_form(d) {
                Some((t, s)) => LeafClass::TwoRep { t, s },
                None => LeafClass::TwoRep { t: 0, s: r },
            }
        }
    }
}

/// Ternary search over the representative coins: weigh two groups of
/// `ceil(r/3)` against each other, the rest stays off the balance.
pub fn close_one_representable(
    d: &CandidateSet,
    reps: &RepresentativeMap,
) -> Result<StrategyTree, RepError> {
    let inst = d.instance();
    let mut pool: Vec<(CoinId, Candidate)> = Vec::with_capacity(reps.entries.len());
    for (x, r) in &reps.entries {
        match r {
            Representative::One(c) if d.contains(x) && x.contains(*c) => pool.push((*c, x.clone())),
            _ => return Err(RepError::BadMap),
        }
    }
    if pool.len() != d.len() {
        return Err(RepError::BadMap);
    }
    pool.sort();
    let tree = ternary(inst, &pool)?;
    let report = verify_domain(&tree, d)?;
    if !report.ok() {
        return Err(RepError::BadMap);
    }
    Ok(tree)
}

fn ternary(inst: &Instance, pool: &[(CoinId, Candidate)]) -> Result<StrategyTree, ModelError> {
    match pool.len() {
        0 => return Ok(StrategyTree::Unreachable),
        1 => return Ok(StrategyTree::Leaf(pool[0].1.clone())),
        _ => {}
    }
    let p = pool.len().div_ceil(3);
    let (left, rest) = pool.split_at(p);
    let (right, off) = rest.split_at(p);
    let w = Weighing::new(
        inst,
        left.iter().map(|e| e.0).collect(),
        right.iter().map(|e| e.0).collect(),
    )?;
    // the pan holding the light coin rises
    Ok(StrategyTree::node(
        w,
        [
            ternary(inst, right)?,
            ternary(inst, off)?,
            ternary(inst, left)?,
        ],
    ))
}

/// Fast 1-representability test on coin masks.
pub(crate) fn family_one_rep(f: &Family) -> bool {
    f.private_coins().iter().all(|&p| p != 0)
}

/// Fast 2-representability test on coin masks.
pub(crate) fn family_two_rep(f: &Family) -> bool {
    f.members.iter().all(|&z| {
        let coins: Vec<u32> = crate::family::mask_coins(z).collect();
        (0..coins.len()).any(|i| {
            (i + 1..coins.len()).any(|j| {
                let pair: Mask = (1u128 << coins[i]) | (1u128 << coins[j]);
                f.members.iter().filter(|&&x| x & pair == pair).count() == 1
            })
        })
    })
}
