//! Weighing enumeration over coin classes.
//!
//! A weighing is described by how many coins of each interchangeability
//! class go on each pan; known-genuine coins fill the shorter pan. The
//! enumeration walks the classes depth-first and drops a partial assignment
//! as soon as more members are certain to land in one outcome than `cap`
//! allows.

use std::collections::HashSet;
use std::ops::ControlFlow;

use crate::family::{bit, ClassKind, Classes, Family, Mask};
use crate::model::Outcome;

/// One candidate weighing together with the partition it induces.
#[derive(Debug, Clone)]
pub struct Move {
    pub left: Mask,
    pub right: Mask,
    /// `(left, right)` coin counts per class, in class order.
    pub counts: Vec<(u8, u8)>,
    pub parts: [Vec<Mask>; 3],
}

impl Move {
    pub fn pan_size(&self) -> u32 {
        self.left.count_ones()
    }

    pub fn largest_part(&self) -> usize {
        self.parts.iter().map(|p| p.len()).max().unwrap_or(0)
    }
}

struct Slot {
    /// per member: position of its coin within the class, or -1
    pos: Vec<i16>,
    kind: ClassKind,
    size: u8,
    /// largest change this class can make to a member's left-right count
    reach: Vec<u8>,
}

struct Walk<'a> {
    family: &'a Family,
    classes: &'a Classes,
    slots: Vec<Slot>,
    cap: usize,
    dedupe: bool,
    diff: Vec<i32>,
    remaining: Vec<i32>,
    /// coins in classes `k..`, the most they can still rebalance the pans
    slack: Vec<u32>,
    /// pan size of the current pass
    target: u32,
    counts: Vec<(u8, u8)>,
    seen: HashSet<Vec<u8>>,
}

/// All useful weighings of `family` whose parts each hold at most `cap` members.
///
/// Weighings that leave the whole family in one outcome are dropped. With
/// `dedupe`, weighings inducing the same partition (or its mirror) as an
/// earlier one are dropped too. Output is ordered by pan size, then by the
/// class-count tuple.
pub fn enumerate(family: &Family, classes: &Classes, cap: usize, dedupe: bool) -> Vec<Move> {
    let mut out = Vec::new();
    for_each_move(family, classes, cap, dedupe, |mv| {
        out.push(mv);
        ControlFlow::<()>::Continue(())
    });
    out
}

/// Streams the weighings of [`enumerate`] in the same order until `visit` breaks.
pub fn for_each_move<B>(
    family: &Family,
    classes: &Classes,
    cap: usize,
    dedupe: bool,
    mut visit: impl FnMut(Move) -> ControlFlow<B>,
) -> Option<B> {
    if family.len() < 2 {
        return None;
    }
    let n = family.len();
    let slots: Vec<Slot> = classes
        .classes
        .iter()
        .map(|class| {
            let mut pos = vec![-1i16; n];
            let mut reach = vec![0u8; n];
            for (xi, &x) in family.members.iter().enumerate() {
                for (k, &c) in class.coins.iter().enumerate() {
                    if x & bit(c) != 0 {
                        if pos[xi] < 0 {
                            pos[xi] = k as i16;
                        }
                        reach[xi] += 1;
                    }
                }
            }
            Slot {
                pos,
                kind: class.kind,
                size: class.coins.len() as u8,
                reach,
            }
        })
        .collect();
    let mut remaining = vec![0i32; n];
    for s in &slots {
        for (r, &d) in remaining.iter_mut().zip(&s.reach) {
            *r += d as i32;
        }
    }
    let mut slack = vec![0u32; slots.len() + 1];
    for k in (0..slots.len()).rev() {
        slack[k] = slack[k + 1] + slots[k].size as u32;
    }
    let mut walk = Walk {
        family,
        classes,
        slots,
        cap,
        dedupe,
        diff: vec![0; n],
        remaining,
        target: 0,
        slack,
        counts: Vec::new(),
        seen: HashSet::new(),
    };
    let widest = (walk.slack[0] + classes.ballast.len() as u32) / 2;
    for p in 1..=widest {
        walk.target = p;
        if let ControlFlow::Break(b) = walk.descend(0, 0, 0, &mut visit) {
            return Some(b);
        }
    }
    None
}

impl Walk<'_> {
    fn options(slot: &Slot) -> Vec<(u8, u8)> {
        let s = slot.size;
        match slot.kind {
            ClassKind::Twin => (0..=s)
                .map(|d| (0, d))
                .chain((1..=s).map(|d| (d, 0)))
                .collect(),
            ClassKind::Single | ClassKind::Exclusive => (0..=s)
                .flat_map(|l| (0..=s - l).map(move |r| (l, r)))
                .collect(),
        }
    }

    fn contribution(slot: &Slot, xi: usize, l: u8, r: u8) -> i32 {
        let p = slot.pos[xi];
        if p < 0 {
            return 0;
        }
        match slot.kind {
            ClassKind::Twin => l as i32 - r as i32,
            _ => {
                let p = p as u8;
                if p < l {
                    1
                } else if p < l + r {
                    -1
                } else {
                    0
                }
            }
        }
    }

    fn hopeless(&self) -> bool {
        let mut sure = [0usize; 3];
        for (d, u) in self.diff.iter().zip(&self.remaining) {
            if d + u < 0 {
                sure[0] += 1;
            } else if d - u > 0 {
                sure[2] += 1;
            } else if *u == 0 {
                sure[1] += 1;
            }
        }
        sure.iter().any(|&s| s > self.cap)
    }

    fn descend<B>(
        &mut self,
        k: usize,
        left: u32,
        right: u32,
        visit: &mut impl FnMut(Move) -> ControlFlow<B>,
    ) -> ControlFlow<B> {
        let p = self.target;
        if left > p
            || right > p
            || left.max(right) + self.slack[k] < p
            || left.abs_diff(right) > self.slack[k] + self.classes.ballast.len() as u32
        {
            return ControlFlow::Continue(());
        }
        if k == self.slots.len() {
            return match self.finish(left, right) {
                Some(mv) => visit(mv),
                None => ControlFlow::Continue(()),
            };
        }
        let n = self.diff.len();
        let opts = Self::options(&self.slots[k]);
        for xi in 0..n {
            self.remaining[xi] -= self.slots[k].reach[xi] as i32;
        }
        for (l, r) in opts {
            let slot = &self.slots[k];
            for xi in 0..n {
                self.diff[xi] += Self::contribution(slot, xi, l, r);
            }
            self.counts.push((l, r));
            let flow = if self.hopeless() {
                ControlFlow::Continue(())
            } else {
                self.descend(k + 1, left + l as u32, right + r as u32, visit)
            };
            self.counts.pop();
            let slot = &self.slots[k];
            for xi in 0..n {
                self.diff[xi] -= Self::contribution(slot, xi, l, r);
            }
            if flow.is_break() {
                for xi in 0..n {
                    self.remaining[xi] += self.slots[k].reach[xi] as i32;
                }
                return flow;
            }
        }
        for xi in 0..n {
            self.remaining[xi] += self.slots[k].reach[xi] as i32;
        }
        ControlFlow::Continue(())
    }

    fn finish(&mut self, left: u32, right: u32) -> Option<Move> {
        let gap = left.abs_diff(right) as usize;
        if gap > self.classes.ballast.len() || left.max(right) != self.target {
            return None;
        }
        let mut sizes = [0usize; 3];
        let sig: Vec<u8> = self
            .diff
            .iter()
            .map(|&d| {
                let o = match d.signum() {
                    -1 => Outcome::LeftHeavy,
                    0 => Outcome::Balanced,
                    _ => Outcome::RightHeavy,
                };
                sizes[o.index()] += 1;
                o as u8
            })
            .collect();
        let n = self.diff.len();
        if sizes.iter().any(|&s| s > self.cap || s == n) {
            return None;
        }
        if self.dedupe {
            let mirrored: Vec<u8> = sig.iter().map(|&o| 2 - o).collect();
            let norm = sig.clone().min(mirrored);
            if !self.seen.insert(norm) {
                return None;
            }
        }

        let mut lmask: Mask = 0;
        let mut rmask: Mask = 0;
        for (class, &(l, r)) in self.classes.classes.iter().zip(&self.counts) {
            for &c in &class.coins[..l as usize] {
                lmask |= bit(c);
            }
            for &c in &class.coins[l as usize..(l + r) as usize] {
                rmask |= bit(c);
            }
        }
        let fill = &self.classes.ballast[..gap];
        for &c in fill {
            if left < right {
                lmask |= bit(c);
            } else {
                rmask |= bit(c);
            }
        }
        let mut parts: [Vec<Mask>; 3] = Default::default();
        for (&x, &o) in self.family.members.iter().zip(&sig) {
            parts[o as usize].push(x);
        }
        Some(Move {
            left: lmask,
            right: rmask,
            counts: self.counts.clone(),
            parts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::weigh;
    use crate::model::{CandidateSet, Instance};

    fn full(s: &str) -> Family {
        let inst: Instance = s.parse().unwrap();
        Family::from_candidate_set(&CandidateSet::full_space(&inst).unwrap()).unwrap()
    }

    #[test]
    fn single_pair_has_one_weighing() {
        let f = full("2");
        let moves = enumerate(&f, &f.classes(), usize::MAX, true);
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].counts, vec![(1, 1)]);
    }

    #[test]
    fn singleton_has_none() {
        let f = Family::new(vec![0b101], 4);
        assert!(enumerate(&f, &f.classes(), usize::MAX, true).is_empty());
    }

    #[test]
    fn parts_match_masks() {
        let f = full("3,4");
        for mv in enumerate(&f, &f.classes(), usize::MAX, true) {
            assert_eq!(mv.left.count_ones(), mv.right.count_ones());
            assert_eq!(mv.left & mv.right, 0);
            for o in Outcome::ALL {
                for &x in &mv.parts[o.index()] {
                    assert_eq!(weigh(mv.left, mv.right, x), o);
                }
            }
        }
    }

    /// On the full (5,16) space the weighings are exactly the tuples
    /// (l1, r1, l2, r2) with l1 + l2 = r1 + r2 >= 1, one per mirror pair.
    #[test]
    fn full_5_16_class_tuples() {
        let f = full("5,16");
        let classes = f.classes();
        let flip = classes.classes[0].coins[0] >= 5;
        let moves = enumerate(&f, &classes, usize::MAX, false);
        let mut tuples = HashSet::new();
        for l1 in 0..=5u8 {
            for r1 in 0..=5 - l1 {
                for l2 in 0..=16u8 {
                    for r2 in 0..=16 - l2 {
                        if l1 + l2 != r1 + r2 || l1 + l2 == 0 {
                            continue;
                        }
                        tuples.insert(vec![(l1, r1), (l2, r2)]);
                    }
                }
            }
        }
        // every enumerated weighing is one of the tuples
        for mv in &moves {
            let mut counts = mv.counts.clone();
            if flip {
                counts.reverse();
            }
            assert!(tuples.contains(&counts));
        }
        // every non-trivial tuple is enumerated
        let nontrivial = tuples
            .iter()
            .filter(|t| {
                let l: Mask = (0..t[0].0 as u32).map(bit).fold(0, |a, b| a | b)
                    | (0..t[1].0 as u32).map(|i| bit(5 + i)).fold(0, |a, b| a | b);
                let r: Mask = (t[0].0 as u32..(t[0].0 + t[0].1) as u32)
                    .map(bit)
                    .fold(0, |a, b| a | b)
                    | (t[1].0 as u32..(t[1].0 + t[1].1) as u32)
                        .map(|i| bit(5 + i))
                        .fold(0, |a, b| a | b);
                let first = weigh(l, r, f.members[0]);
                f.members.iter().any(|&x| weigh(l, r, x) != first)
            })
            .count();
        assert_eq!(moves.len(), nontrivial);
    }
}
