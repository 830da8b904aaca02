use rayon::prelude::*;
use serde::Serialize;

use super::{StrategyError, StrategyTree};
use crate::model::{outcome, Candidate, CandidateSet, Instance, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// The walk ended on a leaf naming another candidate.
    WrongAnswer(String),
    /// The walk ended on a branch marked unreachable.
    NoLeaf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub candidate: String,
    pub path: Vec<&'static str>,
    pub reason: FailureReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub sound: bool,
    pub complete: bool,
    pub depth: usize,
    /// `leaf_census[d]` = number of answer leaves at depth `d`.
    pub leaf_census: Vec<usize>,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.sound && self.complete
    }
}

/// Runs every candidate of the instance through the tree.
pub fn verify(tree: &StrategyTree, inst: &Instance) -> Result<VerificationReport, StrategyError> {
    verify_domain(tree, &CandidateSet::full_space(inst)?)
}

/// Runs every member of `domain` through the tree. Only the model's
/// `outcome` is shared with the rest of the crate.
pub fn verify_domain(
    tree: &StrategyTree,
    domain: &CandidateSet,
) -> Result<VerificationReport, StrategyError> {
    let inst = domain.instance();
    check_structure(tree, inst, &mut String::new())?;

    let members: Vec<Candidate> = domain.iter().collect();
    let mut failures: Vec<(Candidate, Failure)> = members
        .par_iter()
        .filter_map(|x| walk(tree, inst, x).map(|f| (x.clone(), f)))
        .collect();
    failures.sort_by(|a, b| a.0.cmp(&b.0));
    let failures: Vec<Failure> = failures.into_iter().map(|(_, f)| f).collect();

    let sound = !failures
        .iter()
        .any(|f| matches!(f.reason, FailureReason::WrongAnswer(_)));
    let complete = !failures.iter().any(|f| f.reason == FailureReason::NoLeaf);
    let depth = tree.depth();
    let mut leaf_census = vec![0; depth + 1];
    census(tree, 0, &mut leaf_census);
    Ok(VerificationReport {
        sound,
        complete,
        depth,
        leaf_census,
        failures,
    })
}

fn walk(tree: &StrategyTree, inst: &Instance, x: &Candidate) -> Option<Failure> {
    let mut node = tree;
    let mut path = Vec::new();
    loop {
        match node {
            StrategyTree::Leaf(answer) => {
                return (answer != x).then(|| Failure {
                    candidate: x.to_string(),
                    path,
                    reason: FailureReason::WrongAnswer(answer.to_string()),
                });
            }
            StrategyTree::Unreachable => {
                return Some(Failure {
                    candidate: x.to_string(),
                    path,
                    reason: FailureReason::NoLeaf,
                });
            }
            StrategyTree::Node { weighing, children } => {
                let o: Outcome = outcome(inst, weighing, x).expect("structure checked");
                path.push(o.key());
                node = &children[o.index()];
            }
        }
    }
}

fn check_structure(
    tree: &StrategyTree,
    inst: &Instance,
    path: &mut String,
) -> Result<(), StrategyError> {
    let bad = |path: &str, message: String| StrategyError::Structure {
        path: if path.is_empty() {
            "root".into()
        } else {
            path.to_string()
        },
        message,
    };
    match tree {
        StrategyTree::Unreachable => Ok(()),
        StrategyTree::Leaf(x) => inst
            .check_candidate(x)
            .map_err(|e| bad(path, e.to_string())),
        StrategyTree::Node { weighing, children } => {
            for &c in weighing.left().iter().chain(weighing.right()) {
                inst.check_coin(c).map_err(|e| bad(path, e.to_string()))?;
            }
            for o in Outcome::ALL {
                let len = path.len();
                path.push('.');
                path.push_str(o.key());
                check_structure(&children[o.index()], inst, path)?;
                path.truncate(len);
            }
            Ok(())
        }
    }
}

fn census(tree: &StrategyTree, depth: usize, out: &mut [usize]) {
    match tree {
        StrategyTree::Leaf(_) => out[depth] += 1,
        StrategyTree::Node { children, .. } => {
            children.iter().for_each(|c| census(c, depth + 1, out))
        }
        StrategyTree::Unreachable => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoinId, Weighing};

    #[test]
    fn zero_weighing_leaf() {
        let inst: Instance = "1,1".parse().unwrap();
        let r = verify(&StrategyTree::Leaf(Candidate(vec![1, 1])), &inst).unwrap();
        assert!(r.ok());
        assert_eq!(r.depth, 0);
        assert_eq!(r.leaf_census, vec![1]);
    }

    #[test]
    fn missing_branch_is_incomplete() {
        let inst: Instance = "3".parse().unwrap();
        let w = Weighing::new(&inst, vec![CoinId::new(1, 1)], vec![CoinId::new(1, 2)]).unwrap();
        let tree = StrategyTree::node(
            w,
            [
                StrategyTree::Leaf(Candidate(vec![2])),
                StrategyTree::Unreachable,
                StrategyTree::Leaf(Candidate(vec![1])),
            ],
        );
        let r = verify(&tree, &inst).unwrap();
        assert!(r.sound);
        assert!(!r.complete);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].candidate, "(3)");
        assert_eq!(r.failures[0].path, vec!["balanced"]);
    }

    #[test]
    fn out_of_range_coin_is_structural() {
        let big: Instance = "4".parse().unwrap();
        let w = Weighing::new(&big, vec![CoinId::new(1, 4)], vec![CoinId::new(1, 1)]).unwrap();
        let tree = StrategyTree::node(
            w,
            [
                StrategyTree::Unreachable,
                StrategyTree::Unreachable,
                StrategyTree::Unreachable,
            ],
        );
        let err = verify(&tree, &"3".parse().unwrap()).unwrap_err();
        assert!(matches!(err, StrategyError::Structure { .. }));
    }
}
