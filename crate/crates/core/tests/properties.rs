use proptest::prelude::*;

use coinweigh::bounds::info_lower_bound;
use coinweigh::family::{bit, candidate_mask, mask_candidate, Family};
use coinweigh::model::{outcome, Candidate, CandidateSet, CoinId, Instance, Weighing};
use coinweigh::representability::{
    classify_leaf, close_one_representable, is_one_representable, is_two_representable,
    Representative,
};
use coinweigh::solver::{
    canonical_key, oracle_min_depth, SearchBudget, SearchResult, Solver, SolverOptions,
};
use coinweigh::strategy::{self, verify_domain, Strategy as StrategyFile};

/// Instance with at most `max_space` candidates, plus a nonempty subset of it.
fn domain(max_sets: usize, max_size: u32, max_space: u32) -> impl Strategy<Value = CandidateSet> {
    prop::collection::vec(1..=max_size, 1..=max_sets)
        .prop_filter("space too large", move |v| {
            v.iter().product::<u32>() <= max_space
        })
        .prop_flat_map(|sizes| {
            let space = sizes.iter().product::<u32>() as usize;
            (Just(sizes), prop::collection::vec(any::<bool>(), space))
        })
        .prop_filter_map("empty subset", |(sizes, keep)| {
            let inst = Instance::new(sizes).unwrap();
            let mut d = CandidateSet::empty(&inst).unwrap();
            for (r, k) in keep.into_iter().enumerate() {
                if k {
                    d.insert_rank(r);
                }
            }
            (!d.is_empty()).then_some(d)
        })
}

/// A domain together with a valid weighing on its instance.
fn weighed(max_sets: usize, max_size: u32) -> impl Strategy<Value = (CandidateSet, Weighing)> {
    domain(max_sets, max_size, 64)
        .prop_flat_map(|d| {
            let n = d.instance().total_coins() as usize;
            (Just(d), prop::collection::vec(0u8..3, n))
        })
        .prop_filter_map("no weighing", |(d, side)| {
            let inst = d.instance().clone();
            let coins: Vec<CoinId> = inst.coins().collect();
            let mut left: Vec<CoinId> = coins
                .iter()
                .zip(&side)
                .filter(|(_, s)| **s == 1)
                .map(|(c, _)| *c)
                .collect();
            let mut right: Vec<CoinId> = coins
                .iter()
                .zip(&side)
                .filter(|(_, s)| **s == 2)
                .map(|(c, _)| *c)
                .collect();
            let m = left.len().min(right.len());
            left.truncate(m);
            right.truncate(m);
            Weighing::new(&inst, left, right).ok().map(|w| (d, w))
        })
}

fn parts(d: &CandidateSet, w: &Weighing) -> [Vec<Candidate>; 3] {
    let mut out: [Vec<Candidate>; 3] = Default::default();
    for x in d.iter() {
        out[outcome(d.instance(), w, &x).unwrap().index()].push(x);
    }
    out
}

/// Relabeling of an instance: set order plus a coin permutation per set.
#[derive(Debug, Clone)]
struct Relabel {
    order: Vec<usize>,
    perms: Vec<Vec<u32>>,
}

impl Relabel {
    fn instance(&self, inst: &Instance) -> Instance {
        Instance::new(self.order.iter().map(|&i| inst.sizes()[i]).collect()).unwrap()
    }

    fn candidate(&self, x: &Candidate) -> Candidate {
        Candidate(
            self.order
                .iter()
                .map(|&i| self.perms[i][x.0[i] as usize - 1])
                .collect(),
        )
    }

    fn set(&self, d: &CandidateSet) -> CandidateSet {
        let inst = self.instance(d.instance());
        CandidateSet::from_candidates(&inst, d.iter().map(|x| self.candidate(&x))).unwrap()
    }
}

fn relabeled(
    max_sets: usize,
    max_size: u32,
    max_space: u32,
) -> impl Strategy<Value = (CandidateSet, Relabel)> {
    domain(max_sets, max_size, max_space).prop_flat_map(|d| {
        let sizes = d.instance().sizes().to_vec();
        let order = Just((0..sizes.len()).collect::<Vec<_>>()).prop_shuffle();
        let perms: Vec<_> = sizes
            .iter()
            .map(|&n| Just((1..=n).collect::<Vec<u32>>()).prop_shuffle())
            .collect();
        (Just(d), order, perms).prop_map(|(d, order, perms)| (d, Relabel { order, perms }))
    })
}

fn exact_depth(d: &CandidateSet, options: SolverOptions) -> u32 {
    let budget = SearchBudget::for_lower_bound(8);
    match Solver::new(options, budget).min_depth(d).unwrap() {
        SearchResult::Optimal { depth, .. } => depth,
        other => panic!("unexpected {other:?}"),
    }
}

fn ceil_log3(n: usize) -> usize {
    let (mut t, mut p) = (0, 1);
    while p < n {
        p *= 3;
        t += 1;
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn conservation((d, w) in weighed(4, 5)) {
        let [a, b, c] = d.partition(&w).unwrap();
        prop_assert_eq!(a.len() + b.len() + c.len(), d.len());
        for x in d.iter() {
            let hits = [&a, &b, &c].iter().filter(|p| p.contains(&x)).count();
            prop_assert_eq!(hits, 1);
        }
        let expect = parts(&d, &w);
        prop_assert_eq!(a.iter().collect::<Vec<_>>(), expect[0].clone());
        prop_assert_eq!(c.iter().collect::<Vec<_>>(), expect[2].clone());
    }

    #[test]
    fn swap_antisymmetry((d, w) in weighed(4, 5)) {
        let p = d.partition(&w).unwrap();
        let q = d.partition(&w.swap()).unwrap();
        prop_assert_eq!(&p[0], &q[2]);
        prop_assert_eq!(&p[1], &q[1]);
        prop_assert_eq!(&p[2], &q[0]);
    }

    #[test]
    fn ballast_neutrality((d, w) in weighed(4, 5)) {
        let inst = d.instance();
        let on_pan = |c: &CoinId| w.left().contains(c) || w.right().contains(c);
        let idle: Vec<CoinId> = inst.coins().filter(|c| !on_pan(c)).take(2).collect();
        prop_assume!(idle.len() == 2);
        let d = CandidateSet::from_candidates(
            inst,
            d.iter().filter(|x| idle.iter().all(|&c| !x.contains(c))),
        )
        .unwrap();
        prop_assume!(!d.is_empty());
        let mut left = w.left().to_vec();
        let mut right = w.right().to_vec();
        left.push(idle[0]);
        right.push(idle[1]);
        let padded = Weighing::new(inst, left, right).unwrap();
        prop_assert_eq!(d.partition(&w).unwrap(), d.partition(&padded).unwrap());
    }

    #[test]
    fn class_swaps_permute_parts((d, w) in weighed(3, 5), pick in any::<prop::sample::Index>()) {
        let classes: Vec<Vec<CoinId>> = d.coin_classes().into_iter().filter(|c| c.len() >= 2).collect();
        prop_assume!(!classes.is_empty());
        let class = &classes[pick.index(classes.len())];
        let (a, b) = (class[0], class[1]);
        let swap_coin = |c: CoinId| if c == a { b } else if c == b { a } else { c };
        let inst = d.instance();
        let w2 = Weighing::new(
            inst,
            w.left().iter().map(|&c| swap_coin(c)).collect(),
            w.right().iter().map(|&c| swap_coin(c)).collect(),
        )
        .unwrap();
        let (ga, gb) = (inst.global_index(a).unwrap(), inst.global_index(b).unwrap());
        let swap_candidate = |x: &Candidate| {
            let m = candidate_mask(inst, x);
            let keep = m & !(bit(ga) | bit(gb));
            let moved = if m & bit(ga) != 0 { bit(gb) } else { 0 } | if m & bit(gb) != 0 { bit(ga) } else { 0 };
            mask_candidate(inst, keep | moved).unwrap()
        };
        let before = parts(&d, &w);
        let after = parts(&d, &w2);
        for o in 0..3 {
            let mut image: Vec<Candidate> = before[o].iter().map(swap_candidate).collect();
            image.sort();
            let mut got = after[o].clone();
            got.sort();
            prop_assert_eq!(image, got);
        }
    }

    #[test]
    fn one_rep_maps_are_private(d in domain(4, 4, 64)) {
        if let Some(map) = is_one_representable(&d) {
            let mut seen = std::collections::BTreeSet::new();
            for (x, r) in &map.entries {
                let Representative::One(c) = *r else { panic!("pair in a 1-rep map") };
                prop_assert!(x.contains(c));
                prop_assert!(seen.insert(c));
                prop_assert_eq!(d.iter().filter(|y| y.contains(c)).count(), 1);
            }
        }
    }

    #[test]
    fn one_rep_implies_two_rep(d in domain(4, 4, 64)) {
        prop_assume!(d.instance().num_sets() >= 2);
        if is_one_representable(&d).is_some() {
            prop_assert!(is_two_representable(&d).is_some());
        }
    }

    #[test]
    fn closing_one_rep_is_optimal(d in domain(4, 4, 64)) {
        if let Some(map) = is_one_representable(&d) {
            let tree = close_one_representable(&d, &map).unwrap();
            let r = verify_domain(&tree, &d).unwrap();
            prop_assert!(r.ok());
            prop_assert_eq!(r.depth, ceil_log3(d.len()));
        }
    }

    #[test]
    fn classification_ignores_labels((d, relabel) in relabeled(4, 4, 64)) {
        prop_assert_eq!(classify_leaf(&d), classify_leaf(&relabel.set(&d)));
    }

    #[test]
    fn key_ignores_labels((d, relabel) in relabeled(4, 4, 64)) {
        let f = Family::from_candidate_set(&d).unwrap();
        let g = Family::from_candidate_set(&relabel.set(&d)).unwrap();
        let (kf, kg) = (canonical_key(&f, &f.classes()), canonical_key(&g, &g.classes()));
        prop_assume!(kf.is_canonical() && kg.is_canonical());
        prop_assert_eq!(kf, kg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn solver_matches_oracle(d in domain(3, 6, 12).prop_filter("coins", |d| d.instance().total_coins() <= 10)) {
        let fast = exact_depth(&d, SolverOptions::default());
        prop_assert_eq!(fast, oracle_min_depth(&d).unwrap());
    }

    #[test]
    fn pruning_is_safe(d in domain(3, 4, 24)) {
        prop_assert_eq!(
            exact_depth(&d, SolverOptions::default()),
            exact_depth(&d, SolverOptions::unreduced())
        );
    }

    #[test]
    fn relabeled_copies_agree((d, relabel) in relabeled(3, 4, 36)) {
        prop_assert_eq!(
            exact_depth(&d, SolverOptions::default()),
            exact_depth(&relabel.set(&d), SolverOptions::default())
        );
    }

    #[test]
    fn solutions_verify_and_respect_the_bound(d in domain(3, 5, 40)) {
        let budget = SearchBudget::for_lower_bound(8);
        let SearchResult::Optimal { tree, depth } = Solver::new(SolverOptions::default(), budget).min_depth(&d).unwrap() else {
            panic!("not solved")
        };
        let r = verify_domain(&tree, &d).unwrap();
        prop_assert!(r.ok());
        prop_assert_eq!(r.depth as u32, depth);
        prop_assert!(depth as usize >= ceil_log3(d.len()));
        if d.len() == d.space_len() {
            prop_assert_eq!(depth >= info_lower_bound(d.instance().sizes()), true);
            let s = StrategyFile { instance: d.instance().clone(), tree };
            let text = strategy::serialize(&s);
            let back = strategy::parse(&text).unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(strategy::serialize(&back), text);
        }
    }
}
