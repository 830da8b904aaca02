//! Adaptive weighing strategies: the tree type, its JSON file format, an
//! independent verifier and prefix/closer splicing.

mod format;
mod splice;
mod verify;

pub use format::{parse, parse_tree, serialize, serialize_tree};
pub use splice::{splice, PrefixTree};
pub use verify::{verify, verify_domain, Failure, FailureReason, VerificationReport};

use thiserror::Error;

use crate::model::{Candidate, Instance, ModelError, Outcome, Weighing};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed strategy at {path}: {message}")]
    Structure { path: String, message: String },
    #[error("closer for open leaf {leaf} does not resolve its candidates")]
    DomainMismatch { leaf: usize },
    #[error("expected {expected} closers, got {got}")]
    CloserCount { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A weighing decision tree. `Unreachable` marks a branch no candidate of the
/// strategy's domain can take.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum StrategyTree {
    Leaf(Candidate),
    Node {
        weighing: Weighing,
        children: Box<[StrategyTree; 3]>,
    },
    #[default]
    Unreachable,
}

impl StrategyTree {
    pub fn node(weighing: Weighing, children: [StrategyTree; 3]) -> Self {
        StrategyTree::Node {
            weighing,
            children: Box::new(children),
        }
    }

    /// Number of weighings on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            StrategyTree::Node { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
            _ => 0,
        }
    }

    pub fn child(&self, o: Outcome) -> Option<&StrategyTree> {
        match self {
            StrategyTree::Node { children, .. } => Some(&children[o.index()]),
            _ => None,
        }
    }

    /// Leaves in depth-first order (left_heavy, balanced, right_heavy).
    pub fn leaves(&self) -> Vec<&Candidate> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Candidate>) {
        match self {
            StrategyTree::Leaf(x) => out.push(x),
            StrategyTree::Node { children, .. } => {
                children.iter().for_each(|c| c.collect_leaves(out))
            }
            StrategyTree::Unreachable => {}
        }
    }

    /// Mutable access to the `i`-th leaf answer in depth-first order.
    pub fn leaf_mut(&mut self, i: usize) -> Option<&mut Candidate> {
        fn walk<'a>(t: &'a mut StrategyTree, i: &mut usize) -> Option<&'a mut Candidate> {
            match t {
                StrategyTree::Leaf(x) => {
                    if *i == 0 {
                        Some(x)
                    } else {
                        *i -= 1;
                        None
                    }
                }
                StrategyTree::Node { children, .. } => children.iter_mut().find_map(|c| walk(c, i)),
                StrategyTree::Unreachable => None,
            }
        }
        let mut i = i;
        walk(self, &mut i)
    }
}

/// A strategy file: the instance it solves plus the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    pub instance: Instance,
    pub tree: StrategyTree,
}
