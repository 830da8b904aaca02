//! Upper bounds derived from the claim database.
//!
//! Rules:
//! - R1: `g(A + B) <= g(A) + g(B)` for disjoint unions of sets;
//! - R2: an arrow into 1-representable leaves of size `<= r` after `k`
//!   weighings gives `k + ceil(log3 r)`; a single set is such a leaf at depth 0;
//! - R3: with several leaf profiles, the maximum over them;
//! - R4: the rate table, `g(n|k0) <= mu(n) k0`, and `ceil(k mu(n))` for
//!   `k0` not dividing `k`.
//!
//! Bounds for a target are minimized over all of its sub-multisets, so the
//! search is finite without any limit on trace length.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::claims::{Fact, FactKind, Multiset, Status, Subject};
use super::exact::{ceil_k_log3, ceil_log3_u64};
use super::table::mu_entry;
use crate::representability::LeafClass;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Derivation {
    /// A fact used as is, or one rule applied to a single source.
    Base {
        tag: String,
        via: &'static str,
        subject: String,
        bound: u32,
    },
    /// R1.
    Sum { parts: Vec<Derivation>, bound: u32 },
}

impl Derivation {
    pub fn bound(&self) -> u32 {
        match self {
            Derivation::Base { bound, .. } | Derivation::Sum { bound, .. } => *bound,
        }
    }

    /// Source tags, left to right.
    pub fn sources(&self) -> Vec<String> {
        match self {
            Derivation::Base { tag, .. } => vec![tag.clone()],
            Derivation::Sum { parts, .. } => parts.iter().flat_map(|p| p.sources()).collect(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Derivation::Base {
                tag,
                via,
                subject,
                bound,
            } => format!("{tag}[{via}] {subject}<={bound}"),
            Derivation::Sum { parts, bound } => {
                let inner: Vec<String> = parts.iter().map(|p| p.render()).collect();
                format!("R1({}) ={bound}", inner.join(" + "))
            }
        }
    }

    fn sum(a: Derivation, b: Derivation) -> Derivation {
        let bound = a.bound() + b.bound();
        let mut parts = Vec::new();
        for d in [a, b] {
            match d {
                Derivation::Sum { parts: p, .. } => parts.extend(p),
                base => parts.push(base),
            }
        }
        Derivation::Sum { parts, bound }
    }
}

/// Bound from an arrow's leaf profiles, `None` when a profile has no known closing cost.
pub fn arrow_bound(fact: &Fact) -> Option<(u32, &'static str)> {
    let profiles = fact.leaf_profiles().ok()?;
    let mut best = 0;
    for p in &profiles {
        let close = match p.class {
            LeafClass::Singleton => 0,
            LeafClass::OneRep(r) => ceil_log3_u64(r as u64),
            LeafClass::TwoRep { .. } | LeafClass::Unclassified => return None,
        };
        best = best.max(p.depth + close);
    }
    Some((best, if profiles.len() > 1 { "R3" } else { "R2" }))
}

fn mu_times(n: u32, k: u32) -> Option<u32> {
    let e = mu_entry(n)?;
    let v = &e.mu * BigRational::from_integer(BigInt::from(k));
    v.ceil().to_integer().to_u32()
}

/// Indexed view of the database.
pub struct Engine<'a> {
    facts: &'a [Fact],
}

const MAX_STATES: usize = 4096;

impl<'a> Engine<'a> {
    pub fn new(facts: &'a [Fact]) -> Self {
        Engine { facts }
    }

    /// Single-source bounds for exactly the multiset `m`.
    fn base(&self, m: &Multiset, exclude: &BTreeSet<String>) -> Option<Derivation> {
        let mut best: Option<Derivation> = None;
        let mut offer = |tag: String, via: &'static str, bound: u32| {
            if exclude.contains(&tag) {
                return;
            }
            if best.as_ref().is_none_or(|b| bound < b.bound()) {
                best = Some(Derivation::Base {
                    tag,
                    via,
                    subject: m.to_string(),
                    bound,
                });
            }
        };
        for f in self.facts {
            if &f.subject.multiset() != m {
                continue;
            }
            match f.kind {
                FactKind::Exact | FactKind::Upper => {
                    if let Some(v) = f.value {
                        offer(f.tag.clone(), "claim", v);
                    }
                }
                FactKind::Arrow => {
                    if let Some((b, rule)) = arrow_bound(f) {
                        offer(f.tag.clone(), rule, b);
                    }
                }
            }
        }
        if m.0.len() == 1 {
            let (&n, &k) = m.0.iter().next().unwrap();
            if k == 1 {
                offer("single".into(), "R2", ceil_log3_u64(n as u64));
            }
            if let Some(e) = mu_entry(n) {
                if k == e.k0 {
                    offer(format!("list1:{n}"), "R4", e.weighings());
                } else if k % e.k0 != 0 {
                    offer("eq65b".into(), "R4", mu_times(n, k).expect("small"));
                }
            }
        }
        best
    }

    /// Best bound for `subject` using every source except `exclude`.
    pub fn derive(&self, subject: &Subject, exclude: &BTreeSet<String>) -> Option<Derivation> {
        let target = subject.multiset();
        let sizes: Vec<u32> = target.0.keys().copied().collect();
        let counts: Vec<u32> = target.0.values().copied().collect();
        let radix: Vec<usize> = counts.iter().map(|&c| c as usize + 1).collect();
        let states: usize = radix.iter().product();
        if states > MAX_STATES {
            return None;
        }
        let decode = |mut i: usize| -> Vec<u32> {
            radix
                .iter()
                .map(|&r| {
                    let d = i % r;
                    i /= r;
                    d as u32
                })
                .collect()
        };
        let encode = |v: &[u32]| -> usize {
            v.iter()
                .zip(&radix)
                .rev()
                .fold(0, |acc, (&d, &r)| acc * r + d as usize)
        };
        let to_multiset = |v: &[u32]| {
            Multiset(
                sizes
                    .iter()
                    .zip(v)
                    .filter(|(_, &c)| c > 0)
                    .map(|(&n, &c)| (n, c))
                    .collect(),
            )
        };

        let mut best: Vec<Option<Derivation>> = vec![None; states];
        for s in 1..states {
            let v = decode(s);
            let mut cur = self.base(&to_multiset(&v), exclude);
            // splits S = A + B with index(A) <= index(B)
            for a in 1..s {
                let va = decode(a);
                if va.iter().zip(&v).any(|(x, y)| x > y) {
                    continue;
                }
                let vb: Vec<u32> = v.iter().zip(&va).map(|(y, x)| y - x).collect();
                let b = encode(&vb);
                if b < a {
                    continue;
                }
                if let (Some(da), Some(db)) = (&best[a], &best[b]) {
                    let bound = da.bound() + db.bound();
                    if cur.as_ref().is_none_or(|c| bound < c.bound()) {
                        cur = Some(Derivation::sum(da.clone(), db.clone()));
                    }
                }
            }
            best[s] = cur;
        }
        best.pop().flatten()
    }
}

/// Derived upper bound for every subject mentioned in `db`.
pub fn derive_bounds(db: &[Fact]) -> Vec<Fact> {
    let engine = Engine::new(db);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in db {
        if !seen.insert(f.subject.multiset()) {
            continue;
        }
        if let Some(d) = engine.derive(&f.subject, &BTreeSet::new()) {
            out.push(Fact {
                tag: "derived".into(),
                subject: f.subject.clone(),
                kind: FactKind::Upper,
                value: Some(d.bound()),
                profiles: Vec::new(),
                status: Status::Derived,
                trace: Some(d.render()),
            });
        }
    }
    out
}

pub fn derive_bound(db: &[Fact], subject: &Subject) -> Option<Derivation> {
    Engine::new(db).derive(subject, &BTreeSet::new())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimAudit {
    pub tag: String,
    pub subject: String,
    pub value: u32,
    pub info_bound: u32,
    /// `value >= info_bound`
    pub consistent: bool,
    pub it_tight: bool,
    /// best bound obtained without this claim (and without its table row)
    pub derived_bound: Option<u32>,
    pub derivation: Option<String>,
    pub reproduced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RateCheck {
    pub n: u32,
    pub k0: u32,
    pub mu: String,
    pub mu_k0: u32,
    pub tag: String,
    pub claimed: u32,
    pub consistent: bool,
}

/// A claim whose per-set rate beats the table entry for its `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BetterRate {
    pub tag: String,
    pub rate: String,
    pub mu: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub claims: Vec<ClaimAudit>,
    pub rate_checks: Vec<RateCheck>,
    pub better_than_table: Vec<BetterRate>,
    pub not_reproduced: Vec<String>,
    /// every exact claim is consistent and IT-tight, every rate check agrees
    pub certified: bool,
}

fn info_bound_of(subject: &Subject) -> u32 {
    super::info_lower_bound(&subject.multiset().sizes())
}

pub fn audit_claims(db: &[Fact]) -> AuditReport {
    let engine = Engine::new(db);
    let mut claims = Vec::new();
    let mut rate_checks = Vec::new();
    let mut better = Vec::new();
    for f in db.iter().filter(|f| f.kind == FactKind::Exact) {
        let Some(value) = f.value else { continue };
        let info = match f.subject.as_power() {
            Some((n, k)) => ceil_k_log3(n as u64, k),
            None => info_bound_of(&f.subject),
        };
        let mut exclude = BTreeSet::from([f.tag.clone()]);
        if let Some((n, k)) = f.subject.as_power() {
            if let Some(e) = mu_entry(n) {
                if e.k0 == k {
                    exclude.insert(format!("list1:{n}"));
                    rate_checks.push(RateCheck {
                        n,
                        k0: k,
                        mu: e.mu.to_string(),
                        mu_k0: e.weighings(),
                        tag: f.tag.clone(),
                        claimed: value,
                        consistent: e.weighings() == value,
                    });
                }
                let rate = BigRational::new(BigInt::from(value), BigInt::from(k));
                if rate < e.mu {
                    better.push(BetterRate {
                        tag: f.tag.clone(),
                        rate: rate.to_string(),
                        mu: e.mu.to_string(),
                    });
                }
            }
        }
        let d = engine.derive(&f.subject, &exclude);
        let reproduced = d.as_ref().is_some_and(|d| d.bound() <= value);
        claims.push(ClaimAudit {
            tag: f.tag.clone(),
            subject: f.subject.to_string(),
            value,
            info_bound: info,
            consistent: value >= info,
            it_tight: value == info,
            derived_bound: d.as_ref().map(|d| d.bound()),
            derivation: d.map(|d| d.render()),
            reproduced,
        });
    }
    let not_reproduced = claims
        .iter()
        .filter(|c| !c.reproduced)
        .map(|c| c.tag.clone())
        .collect();
    let certified = claims.iter().all(|c| c.consistent && c.it_tight)
        && rate_checks.iter().all(|r| r.consistent);
    AuditReport {
        claims,
        rate_checks,
        better_than_table: better,
        not_reproduced,
        certified,
    }
}
