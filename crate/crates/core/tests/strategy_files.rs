use coinweigh::model::Candidate;
use coinweigh::solver::{solve_exact, SearchBudget, SearchResult, SolverOptions};
use coinweigh::strategy::{self, verify, FailureReason, Strategy};
use coinweigh::StrategyTree;

const GOLDEN: [(&str, &str); 4] = [
    ("3", include_str!("golden/3.json")),
    ("2,2,2", include_str!("golden/2-2-2.json")),
    ("3,4", include_str!("golden/3-4.json")),
    ("5,5", include_str!("golden/5-5.json")),
];

#[test]
fn golden_files_are_byte_stable() {
    for (name, text) in GOLDEN {
        let s = strategy::parse(text).unwrap();
        assert_eq!(strategy::serialize(&s), text, "{name}");
        let r = verify(&s.tree, &s.instance).unwrap();
        assert!(r.ok(), "{name}: {:?}", r.failures);
    }
}

#[test]
fn hand_written_three_coin_tree() {
    let s = strategy::parse(GOLDEN[0].1).unwrap();
    let r = verify(&s.tree, &s.instance).unwrap();
    assert_eq!((r.depth, r.leaf_census.clone()), (1, vec![0, 3]));
}

#[test]
fn solver_reproduces_goldens() {
    for (name, text) in &GOLDEN[1..] {
        let inst = name.parse().unwrap();
        let r = solve_exact(
            &inst,
            SearchBudget::for_lower_bound(6),
            SolverOptions::default(),
        )
        .unwrap();
        let SearchResult::Optimal { tree, .. } = r.result else {
            panic!("{name}")
        };
        let out = strategy::serialize(&Strategy {
            instance: inst,
            tree,
        });
        assert_eq!(&out, text, "{name}");
    }
}

#[test]
fn threads_do_not_change_the_tree() {
    let inst = "4,4,5".parse().unwrap();
    let run = |threads| {
        let r = solve_exact(
            &inst,
            SearchBudget::for_lower_bound(4),
            SolverOptions {
                threads,
                ..SolverOptions::default()
            },
        )
        .unwrap();
        let SearchResult::Optimal { tree, .. } = r.result else {
            panic!()
        };
        strategy::serialize_tree(&tree)
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn swapped_answers_are_reported() {
    let mut s = strategy::parse(GOLDEN[0].1).unwrap();
    *s.tree.leaf_mut(0).unwrap() = Candidate(vec![3]);
    *s.tree.leaf_mut(1).unwrap() = Candidate(vec![2]);
    let r = verify(&s.tree, &s.instance).unwrap();
    assert!(!r.ok());
    assert_eq!(r.failures.len(), 2);
    assert!(r
        .failures
        .iter()
        .all(|f| matches!(f.reason, FailureReason::WrongAnswer(_))));
}

#[test]
fn unreachable_branch_is_a_failure_when_reached() {
    let mut s = strategy::parse(GOLDEN[0].1).unwrap();
    if let StrategyTree::Node { children, .. } = &mut s.tree {
        children[1] = StrategyTree::Unreachable;
    }
    let r = verify(&s.tree, &s.instance).unwrap();
    assert!(!r.complete);
    assert!(matches!(r.failures[0].reason, FailureReason::NoLeaf));
}

#[test]
fn malformed_files_are_rejected() {
    let good = GOLDEN[0].1;
    for bad in [
        "",
        "{}",
        &good.replace("\"s1.2\"", "\"s1.9\""),
        &good.replace("\"s1.2\"", "\"s1.1\""),
        &good.replace("\"s1\": 3", "\"s1\": 0"),
        &good.replace("\"right\": [\n        \"s1.2\"\n      ]", "\"right\": []"),
    ] {
        assert!(strategy::parse(bad).is_err(), "accepted {bad:?}");
    }
}
