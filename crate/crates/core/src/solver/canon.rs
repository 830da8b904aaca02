//! Canonical keys for candidate families.
//!
//! The minimax value of a family depends only on the hypergraph of coin sets
//! (up to coin renaming) and on how many known-genuine coins are available to
//! fill pans. The key is the lexicographically smallest relabeled member list
//! over the orderings reached by colour refinement plus individualisation.
//! Coins of one interchangeability class never need separate branches.

use crate::family::{bit, mask_coins, Classes, Family, Mask};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    /// `false` when the leaf budget ran out and the raw family was used.
    canonical: bool,
    ballast: u32,
    members: Box<[Mask]>,
}

impl CanonicalKey {
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Key without any symmetry reduction.
    pub fn raw(f: &Family) -> Self {
        CanonicalKey {
            canonical: false,
            ballast: f.coins,
            members: f.members.clone().into_boxed_slice(),
        }
    }
}

/// Maximum number of refinement leaves explored before falling back to the raw key.
const LEAF_BUDGET: usize = 4096;

#[inline]
fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(a << 6)
        .wrapping_add(a >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Ctx<'a> {
    members: &'a [Mask],
    coins: Vec<u32>,
    /// class id per coin position
    class_of: Vec<usize>,
    /// member indices per coin position
    incident: Vec<Vec<usize>>,
    best: Option<Vec<Mask>>,
    leaves: usize,
}

pub fn canonical_key(f: &Family, classes: &Classes) -> CanonicalKey {
    let support = f.support();
    let nonzero = support.count_ones();
    let ballast = (f.coins - nonzero).min(nonzero);
    if f.members.len() <= 1 {
        return CanonicalKey {
            canonical: true,
            ballast: 0,
            members: vec![0; f.members.len()].into_boxed_slice(),
        };
    }

    let coins: Vec<u32> = mask_coins(support).collect();
    let pos_of = |c: u32| coins.binary_search(&c).expect("support coin");
    let mut class_of = vec![usize::MAX; coins.len()];
    let mut colors = vec![0u64; coins.len()];
    for (ci, class) in classes.classes.iter().enumerate() {
        for &c in &class.coins {
            if support & bit(c) != 0 {
                let p = pos_of(c);
                class_of[p] = ci;
                colors[p] = mix(class.coins.len() as u64, class.kind as u64);
            }
        }
    }
    // coins not covered by `classes` (reduction disabled) get their own class
    let mut next = classes.classes.len();
    for c in class_of.iter_mut() {
        if *c == usize::MAX {
            *c = next;
            next += 1;
        }
    }
    let mut incident = vec![Vec::new(); coins.len()];
    for (xi, &x) in f.members.iter().enumerate() {
        for c in mask_coins(x) {
            incident[pos_of(c)].push(xi);
        }
    }
    for (p, inc) in incident.iter().enumerate() {
        colors[p] = mix(colors[p], inc.len() as u64);
    }

    let mut ctx = Ctx {
        members: &f.members,
        coins,
        class_of,
        incident,
        best: None,
        leaves: 0,
    };
    ctx.refine(&mut colors);
    if ctx.search(colors, 0).is_err() {
        return CanonicalKey::raw(f);
    }
    CanonicalKey {
        canonical: true,
        ballast,
        members: ctx.best.expect("at least one leaf").into_boxed_slice(),
    }
}

struct OverBudget;

impl Ctx<'_> {
    fn distinct(colors: &[u64]) -> usize {
        let mut v = colors.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    fn refine(&self, colors: &mut Vec<u64>) {
        let mut cells = Self::distinct(colors);
        let mut member_colors = vec![0u64; self.members.len()];
        let mut buf = Vec::new();
        loop {
            for (xi, &x) in self.members.iter().enumerate() {
                buf.clear();
                buf.extend(mask_coins(x).map(|c| colors[self.coins.binary_search(&c).unwrap()]));
                buf.sort_unstable();
                member_colors[xi] = buf.iter().fold(0x51, |h, &c| mix(h, c));
            }
            let mut fresh = Vec::with_capacity(colors.len());
            for (p, inc) in self.incident.iter().enumerate() {
                buf.clear();
                buf.extend(inc.iter().map(|&xi| member_colors[xi]));
                buf.sort_unstable();
                fresh.push(buf.iter().fold(colors[p], |h, &c| mix(h, c)));
            }
            let n = Self::distinct(&fresh);
            *colors = fresh;
            if n == cells {
                return;
            }
            cells = n;
        }
    }

    fn search(&mut self, colors: Vec<u64>, depth: u64) -> Result<(), OverBudget> {
        // first cell (by colour) mixing several classes
        let mut order: Vec<usize> = (0..self.coins.len()).collect();
        order.sort_by_key(|&p| (colors[p], self.class_of[p], p));
        let mut target: Option<u64> = None;
        let mut i = 0;
        while i < order.len() {
            let col = colors[order[i]];
            let mut j = i;
            while j < order.len() && colors[order[j]] == col {
                j += 1;
            }
            if self.class_of[order[i]] != self.class_of[order[j - 1]] {
                target = Some(col);
                break;
            }
            i = j;
        }

        let Some(col) = target else {
            self.leaf(&order);
            return Ok(());
        };

        let mut tried = Vec::new();
        for &p in &order {
            if colors[p] != col || tried.contains(&self.class_of[p]) {
                continue;
            }
            tried.push(self.class_of[p]);
            let mut next = colors.clone();
            next[p] = mix(mix(col, 0xabc0_0000 + depth), 1);
            self.refine(&mut next);
            self.search(next, depth + 1)?;
            if self.leaves > LEAF_BUDGET {
                return Err(OverBudget);
            }
        }
        Ok(())
    }

    fn leaf(&mut self, order: &[usize]) {
        self.leaves += 1;
        let mut label = vec![0u32; 128];
        for (new, &p) in order.iter().enumerate() {
            label[self.coins[p] as usize] = new as u32;
        }
        let mut relabeled: Vec<Mask> = self
            .members
            .iter()
            .map(|&x| mask_coins(x).fold(0, |m, c| m | bit(label[c as usize])))
            .collect();
        relabeled.sort_unstable();
        if self.best.as_ref().is_none_or(|b| relabeled < *b) {
            self.best = Some(relabeled);
        }
    }
}
