//! Bound calculus with exact arithmetic: information bounds, the rate table,
//! its extension to large `n`, and the claim database.

pub mod claims;
pub mod derive;
pub mod exact;
pub mod table;

pub use claims::{bundled_claims, parse_claims, ClaimsError, Fact, FactKind, Status, Subject};
pub use derive::{audit_claims, derive_bound, derive_bounds, AuditReport, Derivation};
pub use table::{lambda_ladder, mu_entry, mu_table, LambdaLadder, MuEntry};

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use exact::{
    ceil_k_log3, ceil_log3, cmp_pow3, floor_scaled_gap, int, log3_f64, pow3, rational, to_f64,
};
use table::LADDER;

/// The additive constant of the general upper bound, `0.076`.
pub fn stated_epsilon() -> BigRational {
    rational(76, 1000)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("the rate table covers 1..=81, got {0}")]
    OutOfTable(u64),
    #[error("reduction needs n > 81, got {0}")]
    NotLarge(u64),
    #[error("k must be positive")]
    ZeroK,
    #[error("n must be positive")]
    ZeroN,
}

/// Smallest `t` with `3^t >= prod sizes`.
pub fn info_lower_bound(sizes: &[u32]) -> u32 {
    let product = sizes
        .iter()
        .fold(BigUint::one(), |acc, &n| acc * BigUint::from(n));
    ceil_log3(&product)
}

/// Smallest `t` with `3^t >= n^k`.
pub fn info_lower_bound_power(n: u64, k: u32) -> u32 {
    ceil_k_log3(n, k)
}

pub fn mu(n: u64) -> Result<BigRational, BoundsError> {
    u32::try_from(n)
        .ok()
        .and_then(mu_entry)
        .map(|e| e.mu)
        .ok_or(BoundsError::OutOfTable(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prop1Bound {
    pub value: u32,
    /// `Derived` when `k0 | k` (copies of the table's algorithm), otherwise `PaperClaimed`
    pub status: Status,
}

/// `ceil(k mu(n))`.
pub fn upper_bound_prop1(n: u64, k: u32) -> Result<Prop1Bound, BoundsError> {
    if k == 0 {
        return Err(BoundsError::ZeroK);
    }
    let e = u32::try_from(n)
        .ok()
        .and_then(mu_entry)
        .ok_or(BoundsError::OutOfTable(n))?;
    let value = (&e.mu * int(k as i64)).ceil().to_integer();
    Ok(Prop1Bound {
        value: value.to_u32().expect("small"),
        status: if k.is_multiple_of(e.k0) {
            Status::Derived
        } else {
            Status::PaperClaimed
        },
    })
}

/// `n = lambda 3^l` with `lambda` in `(1, 3]`, located on the ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub l: u32,
    #[serde(serialize_with = "ser_rational")]
    pub lambda: BigRational,
    /// `lambda_{j-1} < lambda <= lambda_j`
    pub j: usize,
    /// `ceil(27 lambda)`, the set size left after `l - 3` weighings
    pub d: u32,
    /// `27 lambda_j`
    pub d_j: u32,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn reduce_large_n(n: u64) -> Result<Reduction, BoundsError> {
    if n <= 81 {
        return Err(BoundsError::NotLarge(n));
    }
    let big = BigUint::from(n);
    // 3^l < n <= 3^(l+1)
    let l = ceil_log3(&big) - 1;
    let lambda = BigRational::new(BigInt::from(n), BigInt::from(pow3(l)));
    let j = (1..LADDER.len())
        .find(|&j| lambda <= rational(LADDER[j] as i64, 27))
        .expect("lambda <= 3");
    let d = (&lambda * int(27))
        .ceil()
        .to_integer()
        .to_u32()
        .expect("<= 81");
    Ok(Reduction {
        l,
        lambda,
        j,
        d,
        d_j: LADDER[j],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsilonMode {
    /// the constant `0.076`
    Paper,
    /// the largest ladder gap, computed from the table
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prop2Bound {
    pub mode: EpsilonMode,
    /// `ceil(k (log3 n + eps))`
    pub value: u32,
    /// `k (l - 3) + ceil(k mu(d_j))`, for `n > 81`
    pub constructive: Option<u32>,
}

/// Smallest `t >= start` with `3^(t/k - shift) >= target`.
fn smallest_t(start: u32, k: u32, shift: &BigRational, target: &BigRational) -> u32 {
    let mut t = start;
    loop {
        let e = rational(t as i64, k as i64) - shift;
        if cmp_pow3(&e, target) != Ordering::Less {
            return t;
        }
        t += 1;
    }
}

pub fn upper_bound_prop2(n: u64, k: u32, mode: EpsilonMode) -> Result<Prop2Bound, BoundsError> {
    if k == 0 {
        return Err(BoundsError::ZeroK);
    }
    if n == 0 {
        return Err(BoundsError::ZeroN);
    }
    let start = ceil_k_log3(n, k);
    let target = int(n as i64);
    let value = match mode {
        // t/k >= log3 n + eps
        EpsilonMode::Paper => smallest_t(start, k, &stated_epsilon(), &target),
        // eps = mu_i - log3 x_i, so t/k - mu_i >= log3(n / x_i)
        EpsilonMode::Derived => {
            let report = gap_report();
            let g = report.max_entry();
            let x = int(g.d_prev as i64 + 1);
            smallest_t(start, k, &g.mu, &(target / x))
        }
    };
    let constructive = if n > 81 {
        let r = reduce_large_n(n)?;
        Some(k * (r.l - 3) + upper_bound_prop1(r.d_j as u64, k)?.value)
    } else {
        None
    };
    Ok(Prop2Bound {
        mode,
        value,
        constructive,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    pub i: usize,
    pub d_prev: u32,
    pub d: u32,
    #[serde(serialize_with = "ser_rational")]
    pub mu: BigRational,
    /// `mu(d_i) - log3(d_{i-1} + 1)`, for display
    pub gap: f64,
    /// certified `floor(gap * 10^4)`
    pub gap_floor_e4: i64,
    /// `gap > 0.076`, decided exactly
    pub exceeds_stated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    /// index into `entries` of the largest gap, decided exactly
    pub argmax: usize,
    pub epsilon_star: f64,
    /// `[lo, hi)` certified to four decimals
    pub epsilon_star_bracket: (String, String),
    pub stated_constant: String,
    /// `epsilon_star > 0.076`
    pub exceeds_stated: bool,
}

impl GapReport {
    pub fn max_entry(&self) -> &GapEntry {
        &self.entries[self.argmax]
    }
}

fn decimal_e4(v: i64) -> String {
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:04}", a / 10_000, a % 10_000)
}

pub fn gap_report() -> GapReport {
    let eps = stated_epsilon();
    let entries: Vec<GapEntry> = (1..LADDER.len())
        .map(|i| {
            let d_prev = LADDER[i - 1];
            let d = LADDER[i];
            let mu = mu_entry(d).expect("ladder inside table").mu;
            let x = int(d_prev as i64 + 1);
            let floor = floor_scaled_gap(&mu, &x, 4).to_i64().expect("small");
            GapEntry {
                i,
                d_prev,
                d,
                gap: to_f64(&mu) - log3_f64(d_prev as f64 + 1.0),
                gap_floor_e4: floor,
                exceeds_stated: cmp_pow3(&(&mu - &eps), &x) == Ordering::Greater,
                mu,
            }
        })
        .collect();
    // gap_a > gap_b  <=>  3^(mu_a - mu_b) > x_a / x_b
    let larger = |a: &GapEntry, b: &GapEntry| {
        let ratio = rational(a.d_prev as i64 + 1, b.d_prev as i64 + 1);
        cmp_pow3(&(&a.mu - &b.mu), &ratio) == Ordering::Greater
    };
    let mut argmax = 0;
    for k in 1..entries.len() {
        if larger(&entries[k], &entries[argmax]) {
            argmax = k;
        }
    }
    let top = &entries[argmax];
    GapReport {
        argmax,
        epsilon_star: top.gap,
        epsilon_star_bracket: (
            decimal_e4(top.gap_floor_e4),
            decimal_e4(top.gap_floor_e4 + 1),
        ),
        stated_constant: "0.076".into(),
        exceeds_stated: top.exceeds_stated,
        entries,
    }
}

/// One row of the rate table set against recomputed logarithms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u32,
    #[serde(serialize_with = "ser_rational")]
    pub mu: BigRational,
    pub k0: u32,
    pub log3: f64,
    pub printed: Option<&'static str>,
    pub delta: Option<f64>,
    /// `|printed - log3 n| <= 0.001`, decided exactly
    pub printed_within: Option<bool>,
    /// `mu >= log3 n`, decided exactly
    pub mu_at_least_log: bool,
}

fn parse_decimal(s: &str) -> BigRational {
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits = format!("{whole}{frac}");
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    BigRational::new(digits.parse::<BigInt>().expect("decimal"), scale)
}

/// Table tolerance for printed logarithms.
pub fn printed_tolerance() -> BigRational {
    rational(1, 1000)
}

pub fn table_rows() -> Vec<TableRow> {
    let tol = printed_tolerance();
    mu_table()
        .into_iter()
        .map(|e| {
            let n = int(e.n as i64);
            let log3 = log3_f64(e.n as f64);
            let printed_within = e.log3_listed.map(|p| {
                let p = parse_decimal(p);
                // p - tol <= log3 n <= p + tol
                cmp_pow3(&(&p - &tol), &n) != Ordering::Greater
                    && cmp_pow3(&(&p + &tol), &n) != Ordering::Less
            });
            TableRow {
                n: e.n,
                k0: e.k0,
                log3,
                printed: e.log3_listed,
                delta: e
                    .log3_listed
                    .map(|p| p.parse::<f64>().expect("decimal") - log3),
                printed_within,
                mu_at_least_log: cmp_pow3(&e.mu, &n) != Ordering::Less,
                mu: e.mu,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn info_bounds() {
        assert_eq!(info_lower_bound(&[5, 5]), 3);
        assert_eq!(info_lower_bound_power(4, 7), 9);
        assert_eq!(info_lower_bound(&[1]), 0);
        assert_eq!(info_lower_bound(&[4, 4, 4, 4, 76]), 9);
        assert_eq!(info_lower_bound_power(20, 4), 11);
    }

    #[test]
    fn prop1() {
        assert_eq!(upper_bound_prop1(10, 16).unwrap().value, 34);
        assert_eq!(upper_bound_prop1(10, 16).unwrap().status, Status::Derived);
        assert_eq!(upper_bound_prop1(27, 5).unwrap().value, 15);
        assert_eq!(upper_bound_prop1(5, 2).unwrap().value, 3);
        assert_eq!(
            upper_bound_prop1(10, 3).unwrap().status,
            Status::PaperClaimed
        );
        assert_eq!(upper_bound_prop1(82, 1), Err(BoundsError::OutOfTable(82)));
        assert_eq!(upper_bound_prop1(5, 0), Err(BoundsError::ZeroK));
    }

    #[test]
    fn reductions() {
        let r = reduce_large_n(100).unwrap();
        assert_eq!((r.l, r.d, r.d_j), (4, 34, 35));
        assert_eq!(r.lambda, rational(100, 81));
        let r = reduce_large_n(243).unwrap();
        assert_eq!((r.l, r.j, r.d, r.d_j), (4, 25, 81, 81));
        assert_eq!(r.lambda, int(3));
        let r = reduce_large_n(82).unwrap();
        assert_eq!((r.l, r.j, r.d, r.d_j), (4, 1, 28, 28));
        assert_eq!(reduce_large_n(81), Err(BoundsError::NotLarge(81)));
    }

    #[test]
    fn prop2() {
        assert_eq!(
            upper_bound_prop2(27, 1, EpsilonMode::Paper).unwrap().value,
            4
        );
        assert_eq!(
            upper_bound_prop2(81, 1, EpsilonMode::Paper).unwrap().value,
            5
        );
        let b = upper_bound_prop2(100, 2, EpsilonMode::Paper).unwrap();
        assert_eq!(b.constructive, Some(9));
        assert_eq!(b.value, 9);
        assert!(upper_bound_prop2(1, 0, EpsilonMode::Paper).is_err());
    }

    #[test]
    fn table_checks() {
        let rows = table_rows();
        assert_eq!(rows.len(), 81);
        assert!(rows.iter().all(|r| r.mu_at_least_log));
        let off: Vec<u32> = rows
            .iter()
            .filter(|r| r.printed_within == Some(false))
            .map(|r| r.n)
            .collect();
        assert_eq!(off, vec![8, 26]);
        assert_eq!(rows[77].printed_within, None);
        assert_eq!(parse_decimal("3.033"), rational(3033, 1000));
        assert_eq!(parse_decimal("4"), int(4));
    }

    #[test]
    fn gaps() {
        let g = gap_report();
        assert_eq!(g.entries.len(), 25);
        assert_eq!(g.max_entry().d, 28);
        assert_eq!(
            g.epsilon_star_bracket,
            ("0.0780".to_string(), "0.0781".to_string())
        );
        assert!(g.exceeds_stated);
        let at33 = g.entries.iter().find(|e| e.d == 33).unwrap();
        assert_eq!(at33.gap_floor_e4, 173);
        let at44 = g.entries.iter().find(|e| e.d == 44).unwrap();
        assert_eq!(at44.gap_floor_e4, 764);
        assert!(at44.exceeds_stated);
    }
}
