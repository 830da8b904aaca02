//! Brute-force reference for the minimax depth.
//!
//! Tries every pair of equal, disjoint pans at every node, evaluates them with
//! [`model::outcome`](crate::model::outcome) and recurses without memo or any
//! symmetry reduction. Only the counting bound `|D| <= 3^t` is used to cut.

use thiserror::Error;

use crate::model::{outcome, Candidate, CandidateSet, CoinId, Instance, Weighing};

pub const ORACLE_MAX_CANDIDATES: usize = 12;
pub const ORACLE_MAX_COINS: u32 = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle handles at most {ORACLE_MAX_CANDIDATES} candidates, got {0}")]
    TooManyCandidates(usize),
    #[error("oracle handles at most {ORACLE_MAX_COINS} coins, got {0}")]
    TooManyCoins(u32),
    #[error("candidate set is empty")]
    Empty,
}

pub fn oracle_min_depth(d: &CandidateSet) -> Result<u32, OracleError> {
    let inst = d.instance();
    if d.is_empty() {
        return Err(OracleError::Empty);
    }
    if d.len() > ORACLE_MAX_CANDIDATES {
        return Err(OracleError::TooManyCandidates(d.len()));
    }
    let n = inst.total_coins();
    if n > ORACLE_MAX_COINS {
        return Err(OracleError::TooManyCoins(n));
    }
    let coins: Vec<CoinId> = inst.coins().collect();
    let pick = |m: u32| -> Vec<CoinId> {
        (0..n)
            .filter(|i| m >> i & 1 == 1)
            .map(|i| coins[i as usize])
            .collect()
    };
    let mut weighings = Vec::new();
    for left in 1u32..1 << n {
        let rest = !left & ((1 << n) - 1);
        // every subset of the remaining coins with the same size
        let mut right = rest;
        while right != 0 {
            if right.count_ones() == left.count_ones() {
                weighings.push(Weighing::new(inst, pick(left), pick(right)).expect("valid pans"));
            }
            right = (right - 1) & rest;
        }
    }
    let members: Vec<Candidate> = d.iter().collect();
    let mut t = 0;
    while !solvable(inst, &members, t, &weighings) {
        t += 1;
    }
    Ok(t)
}

fn solvable(inst: &Instance, d: &[Candidate], t: u32, weighings: &[Weighing]) -> bool {
    if d.len() <= 1 {
        return true;
    }
    if d.len() > 3usize.pow(t) {
        return false;
    }
    weighings.iter().any(|w| {
        let mut parts: [Vec<Candidate>; 3] = Default::default();
        for x in d {
            let o = outcome(inst, w, x).expect("weighing fits instance");
            parts[o.index()].push(x.clone());
        }
        parts.iter().all(|p| solvable(inst, p, t - 1, weighings))
    })
}
