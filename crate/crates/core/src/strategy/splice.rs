use super::{verify_domain, StrategyError, StrategyTree};
use crate::model::{CandidateSet, Outcome, Weighing};

/// A strategy prefix whose leaves still hold unresolved candidate sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefixTree {
    Open(CandidateSet),
    Node {
        weighing: Weighing,
        children: Box<[PrefixTree; 3]>,
    },
}

impl PrefixTree {
    pub fn depth(&self) -> usize {
        match self {
            PrefixTree::Open(_) => 0,
            PrefixTree::Node { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Open leaves in depth-first order with their depth.
    pub fn open_leaves(&self) -> Vec<(usize, &CandidateSet)> {
        fn go<'a>(t: &'a PrefixTree, d: usize, out: &mut Vec<(usize, &'a CandidateSet)>) {
            match t {
                PrefixTree::Open(s) => out.push((d, s)),
                PrefixTree::Node { children, .. } => {
                    children.iter().for_each(|c| go(c, d + 1, out))
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, &mut out);
        out
    }
}

/// Replaces every open leaf of `prefix` by its closer.
///
/// `closers` is indexed like [`PrefixTree::open_leaves`]. Empty and singleton
/// leaves need no closer; an empty slice means "no closers at all". Each
/// closer must resolve every candidate of its leaf.
pub fn splice(
    prefix: &PrefixTree,
    closers: &[Option<StrategyTree>],
) -> Result<StrategyTree, StrategyError> {
    let leaves = prefix.open_leaves().len();
    if !closers.is_empty() && closers.len() != leaves {
        return Err(StrategyError::CloserCount {
            expected: leaves,
            got: closers.len(),
        });
    }
    let mut next = 0usize;
    build(prefix, closers, &mut next)
}

fn build(
    t: &PrefixTree,
    closers: &[Option<StrategyTree>],
    next: &mut usize,
) -> Result<StrategyTree, StrategyError> {
    match t {
        PrefixTree::Node { weighing, children } => {
            let mut out: [StrategyTree; 3] = Default::default();
            for o in Outcome::ALL {
                out[o.index()] = build(&children[o.index()], closers, next)?;
            }
            Ok(StrategyTree::node(weighing.clone(), out))
        }
        PrefixTree::Open(domain) => {
            let leaf = *next;
            *next += 1;
            let closer = closers.get(leaf).and_then(|c| c.as_ref());
            let tree = match (closer, domain.len()) {
                (Some(c), _) => c.clone(),
                (None, 0) => StrategyTree::Unreachable,
                (None, 1) => StrategyTree::Leaf(domain.iter().next().expect("one member")),
                (None, _) => return Err(StrategyError::DomainMismatch { leaf }),
            };
            let report = verify_domain(&tree, domain)?;
            if !report.ok() {
                return Err(StrategyError::DomainMismatch { leaf });
            }
            Ok(tree)
        }
    }
}
