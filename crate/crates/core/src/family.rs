//! Compact view of a candidate set as a family of coin bitmasks.
//!
//! Every candidate `X` becomes the mask of its coin set `X~` over the flat
//! coin order of the instance. Outcomes only depend on these masks, so the
//! search machinery works here and converts back to [`Candidate`]s at the end.

use std::cmp::Reverse;

use crate::model::{Candidate, CandidateSet, CoinId, Instance, Outcome};

pub type Mask = u128;

/// Largest number of coins a [`Family`] can address.
pub const MAX_COINS: u32 = 128;

#[inline]
pub fn bit(i: u32) -> Mask {
    1u128 << i
}

pub fn mask_coins(mut m: Mask) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros();
        m &= m - 1;
        Some(i)
    })
}

#[inline]
pub fn weigh(left: Mask, right: Mask, x: Mask) -> Outcome {
    Outcome::from_counts(
        (x & left).count_ones() as usize,
        (x & right).count_ones() as usize,
    )
}

/// Sorted, duplicate-free candidate masks plus the size of the coin universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Family {
    pub members: Vec<Mask>,
    pub coins: u32,
}

impl Family {
    pub fn new(mut members: Vec<Mask>, coins: u32) -> Self {
        members.sort_unstable();
        members.dedup();
        Family { members, coins }
    }

    pub fn from_candidate_set(d: &CandidateSet) -> Option<Self> {
        let inst = d.instance();
        if inst.total_coins() > MAX_COINS {
            return None;
        }
        let members = d.iter().map(|x| candidate_mask(inst, &x)).collect();
        Some(Family::new(members, inst.total_coins()))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Coins appearing in at least one member.
    pub fn support(&self) -> Mask {
        self.members.iter().fold(0, |a, &m| a | m)
    }

    pub fn universe(&self) -> Mask {
        if self.coins == 128 {
            u128::MAX
        } else {
            bit(self.coins) - 1
        }
    }

    pub fn degree(&self, coin: u32) -> usize {
        self.members.iter().filter(|&&m| m & bit(coin) != 0).count()
    }

    pub fn partition(&self, left: Mask, right: Mask) -> [Vec<Mask>; 3] {
        let mut parts: [Vec<Mask>; 3] = Default::default();
        for &x in &self.members {
            parts[weigh(left, right, x).index()].push(x);
        }
        parts
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.members.binary_search(&m).is_ok()
    }

    /// Coins held by exactly one member, per member.
    pub fn private_coins(&self) -> Vec<Mask> {
        let mut once: Mask = 0;
        let mut twice: Mask = 0;
        for &m in &self.members {
            twice |= once & m;
            once |= m;
        }
        let unique = once & !twice;
        self.members.iter().map(|&m| m & unique).collect()
    }

    /// Whether exchanging coins `a` and `b` maps the family onto itself.
    pub fn swappable(&self, a: u32, b: u32) -> bool {
        let (ba, bb) = (bit(a), bit(b));
        let mut only_a = 0usize;
        let mut only_b = 0usize;
        for &m in &self.members {
            match (m & ba != 0, m & bb != 0) {
                (true, false) => {
                    only_a += 1;
                    if !self.contains((m & !ba) | bb) {
                        return false;
                    }
                }
                (false, true) => only_b += 1,
                _ => {}
            }
        }
        only_a == only_b
    }

    /// Interchangeability classes of coins (see [`CandidateSet::coin_classes`]),
    /// rarest coins first, larger classes first among equals.
    pub fn classes(&self) -> Classes {
        let support = self.support();
        let mut ballast = Vec::new();
        let mut groups: Vec<Vec<u32>> = Vec::new();
        let degrees: Vec<usize> = (0..self.coins).map(|c| self.degree(c)).collect();
        for c in 0..self.coins {
            if support & bit(c) == 0 {
                ballast.push(c);
                continue;
            }
            let home = groups
                .iter_mut()
                .find(|g| degrees[g[0] as usize] == degrees[c as usize] && self.swappable(g[0], c));
            match home {
                Some(g) => g.push(c),
                None => groups.push(vec![c]),
            }
        }
        let mut classes = groups
            .into_iter()
            .map(|coins| {
                let kind = if coins.len() == 1 {
                    ClassKind::Single
                } else if self.degree_pair(coins[0], coins[1]) == degrees[coins[0] as usize] {
                    ClassKind::Twin
                } else {
                    ClassKind::Exclusive
                };
                CoinClass { coins, kind }
            })
            .collect::<Vec<_>>();
        classes.sort_by_key(|c| (degrees[c.coins[0] as usize], Reverse(c.coins.len())));
        Classes { classes, ballast }
    }

    fn degree_pair(&self, a: u32, b: u32) -> usize {
        let both = bit(a) | bit(b);
        self.members.iter().filter(|&&m| m & both == both).count()
    }

    /// Every coin as its own class; used to switch the class reduction off.
    pub fn singleton_classes(&self) -> Classes {
        Classes {
            classes: (0..self.coins)
                .map(|c| CoinClass {
                    coins: vec![c],
                    kind: ClassKind::Single,
                })
                .collect(),
            ballast: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    Single,
    /// Coins always appear together.
    Twin,
    /// At most one coin of the class appears in any member.
    Exclusive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinClass {
    pub coins: Vec<u32>,
    pub kind: ClassKind,
}

#[derive(Debug, Clone)]
pub struct Classes {
    pub classes: Vec<CoinClass>,
    /// Coins in no member: known genuine.
    pub ballast: Vec<u32>,
}

pub fn candidate_mask(inst: &Instance, x: &Candidate) -> Mask {
    x.coins()
        .map(|c| bit(inst.global_index(c).expect("candidate fits instance")))
        .fold(0, |a, b| a | b)
}

/// Inverse of [`candidate_mask`]; `None` unless the mask holds one coin per set.
pub fn mask_candidate(inst: &Instance, m: Mask) -> Option<Candidate> {
    let mut v = vec![0u32; inst.num_sets()];
    for g in mask_coins(m) {
        let c = inst.coin_at(g);
        let slot = &mut v[c.set as usize - 1];
        if *slot != 0 {
            return None;
        }
        *slot = c.index;
    }
    if v.contains(&0) {
        return None;
    }
    Some(Candidate(v))
}

pub fn mask_to_coins(inst: &Instance, m: Mask) -> Vec<CoinId> {
    mask_coins(m).map(|g| inst.coin_at(g)).collect()
}

pub fn coins_to_mask(inst: &Instance, coins: &[CoinId]) -> Mask {
    coins
        .iter()
        .map(|&c| bit(inst.global_index(c).expect("coin fits instance")))
        .fold(0, |a, b| a | b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_agree_with_model_on_small_sets() {
        let inst: Instance = "2,3".parse().unwrap();
        let d = CandidateSet::from_candidates(
            &inst,
            [
                Candidate(vec![1, 1]),
                Candidate(vec![1, 2]),
                Candidate(vec![2, 1]),
                Candidate(vec![2, 2]),
            ],
        )
        .unwrap();
        let f = Family::from_candidate_set(&d).unwrap();
        let cl = f.classes();
        // s1.1~s1.2 and s2.1~s2.2 exclusive, s2.3 ballast
        assert_eq!(cl.ballast, vec![4]);
        assert_eq!(cl.classes.len(), 2);
        assert!(cl.classes.iter().all(|c| c.kind == ClassKind::Exclusive));
        assert_eq!(d.coin_classes().len(), 3);
    }

    #[test]
    fn twin_class_detected() {
        let inst: Instance = "2,2".parse().unwrap();
        let d =
            CandidateSet::from_candidates(&inst, [Candidate(vec![1, 1]), Candidate(vec![2, 2])])
                .unwrap();
        let f = Family::from_candidate_set(&d).unwrap();
        let cl = f.classes();
        assert_eq!(cl.classes.len(), 2);
        assert!(cl.classes.iter().all(|c| c.kind == ClassKind::Twin));
    }

    #[test]
    fn mask_roundtrip() {
        let inst: Instance = "3,4,2".parse().unwrap();
        let x = Candidate(vec![3, 1, 2]);
        let m = candidate_mask(&inst, &x);
        assert_eq!(mask_candidate(&inst, m), Some(x));
        assert_eq!(mask_candidate(&inst, 0b11), None);
    }
}
