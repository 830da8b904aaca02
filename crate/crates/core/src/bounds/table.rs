//! The amortized rate table for `n <= 81` and the ladder used to reduce larger `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// `(n, numerator, denominator, printed log3 n)`; `None` where the row is blank.
const MU: [(u32, i64, i64, Option<&str>); 81] = [
    (1, 0, 1, Some("0")),
    (2, 2, 3, Some("0.631")),
    (3, 1, 1, Some("1")),
    (4, 9, 7, Some("1.262")),
    (5, 3, 2, Some("1.465")),
    (6, 5, 3, Some("1.631")),
    (7, 9, 5, Some("1.771")),
    (8, 21, 11, Some("1.891")),
    (9, 2, 1, Some("2")),
    (10, 17, 8, Some("2.096")),
    (11, 11, 5, Some("2.183")),
    (12, 16, 7, Some("2.262")),
    (13, 19, 8, Some("2.335")),
    (14, 22, 9, Some("2.402")),
    (15, 5, 2, Some("2.465")),
    (16, 23, 9, Some("2.524")),
    (17, 13, 5, Some("2.579")),
    (18, 8, 3, Some("2.631")),
    (19, 19, 7, Some("2.680")),
    (20, 11, 4, Some("2.727")),
    (21, 14, 5, Some("2.771")),
    (22, 17, 6, Some("2.814")),
    (23, 23, 8, Some("2.854")),
    (24, 32, 11, Some("2.893")),
    (25, 3, 1, Some("2.93")),
    (26, 3, 1, Some("2.96")),
    (27, 3, 1, Some("3")),
    (28, 28, 9, Some("3.033")),
    (29, 31, 10, Some("3.065")),
    (30, 25, 8, Some("3.096")),
    (31, 19, 6, Some("3.126")),
    (32, 19, 6, Some("3.155")),
    (33, 16, 5, Some("3.183")),
    (34, 13, 4, Some("3.210")),
    (35, 13, 4, Some("3.236")),
    (36, 23, 7, Some("3.262")),
    (37, 10, 3, Some("3.287")),
    (38, 10, 3, Some("3.311")),
    (39, 27, 8, Some("3.335")),
    (40, 27, 8, Some("3.358")),
    (41, 31, 9, Some("3.380")),
    (42, 31, 9, Some("3.402")),
    (43, 7, 2, Some("3.424")),
    (44, 7, 2, Some("3.445")),
    (45, 7, 2, Some("3.465")),
    (46, 7, 2, Some("3.485")),
    (47, 32, 9, Some("3.505")),
    (48, 32, 9, Some("3.524")),
    (49, 32, 9, Some("3.543")),
    (50, 18, 5, Some("3.561")),
    (51, 18, 5, Some("3.579")),
    (52, 29, 8, Some("3.597")),
    (53, 11, 3, Some("3.614")),
    (54, 11, 3, Some("3.631")),
    (55, 37, 10, Some("3.648")),
    (56, 37, 10, Some("3.664")),
    (57, 26, 7, Some("3.680")),
    (58, 26, 7, Some("3.696")),
    (59, 15, 4, Some("3.712")),
    (60, 15, 4, Some("3.727")),
    (61, 15, 4, Some("3.742")),
    (62, 19, 5, Some("3.757")),
    (63, 19, 5, Some("3.771")),
    (64, 23, 6, Some("3.786")),
    (65, 23, 6, Some("3.800")),
    (66, 23, 6, Some("3.814")),
    (67, 31, 8, Some("3.827")),
    (68, 31, 8, Some("3.841")),
    (69, 31, 8, Some("3.854")),
    (70, 39, 10, Some("3.867")),
    (71, 43, 11, Some("3.880")),
    (72, 43, 11, Some("3.893")),
    (73, 47, 12, Some("3.905")),
    (74, 75, 19, Some("3.918")),
    (75, 75, 19, Some("3.930")),
    (76, 75, 19, Some("3.942")),
    (77, 4, 1, Some("3.954")),
    (78, 4, 1, None),
    (79, 4, 1, None),
    (80, 4, 1, None),
    (81, 4, 1, Some("4")),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuEntry {
    pub n: u32,
    pub mu: BigRational,
    /// denominator of `mu` in lowest terms
    pub k0: u32,
    /// `log3 n` exactly as printed in the table, when printed
    pub log3_listed: Option<&'static str>,
}

impl MuEntry {
    /// `mu * k0`, the claimed number of weighings for `k0` sets.
    pub fn weighings(&self) -> u32 {
        (&self.mu * BigRational::from_integer(BigInt::from(self.k0)))
            .to_integer()
            .to_u32()
            .expect("small")
    }
}

pub fn mu_entry(n: u32) -> Option<MuEntry> {
    let &(n, p, q, printed) = MU.get(n.checked_sub(1)? as usize)?;
    let mu = BigRational::new(BigInt::from(p), BigInt::from(q));
    Some(MuEntry {
        n,
        k0: mu.denom().to_u32().expect("small"),
        mu,
        log3_listed: printed,
    })
}

pub fn mu_table() -> Vec<MuEntry> {
    (1..=81).map(|n| mu_entry(n).expect("in range")).collect()
}

/// Numerators of `lambda_i * 27`, `i = 0..=25`.
pub const LADDER: [u32; 26] = [
    27, 28, 30, 32, 33, 35, 36, 38, 40, 42, 44, 46, 49, 51, 52, 54, 56, 58, 61, 63, 66, 69, 70, 72,
    76, 81,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaLadder {
    pub lambdas: Vec<BigRational>,
    pub d: Vec<u32>,
}

pub fn lambda_ladder() -> LambdaLadder {
    LambdaLadder {
        lambdas: LADDER
            .iter()
            .map(|&d| BigRational::new(BigInt::from(d), BigInt::from(27)))
            .collect(),
        d: LADDER.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::exact::{int, rational};

    #[test]
    fn sample_rows() {
        assert_eq!(mu_entry(27).unwrap().mu, int(3));
        assert_eq!(mu_entry(10).unwrap().mu, rational(17, 8));
        assert_eq!(mu_entry(76).unwrap().mu, rational(75, 19));
        assert_eq!(mu_entry(76).unwrap().k0, 19);
        assert_eq!(mu_entry(76).unwrap().weighings(), 75);
        assert_eq!(mu_entry(79).unwrap().log3_listed, None);
        assert!(mu_entry(0).is_none());
        assert!(mu_entry(82).is_none());
    }

    #[test]
    fn ladder_shape() {
        let l = lambda_ladder();
        assert_eq!(l.lambdas.len(), 26);
        assert_eq!(l.lambdas[0], int(1));
        assert_eq!(l.lambdas[25], int(3));
        assert_eq!(l.lambdas[2], rational(10, 9));
        assert!(l.lambdas.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rows_are_ordered() {
        for (i, e) in mu_table().iter().enumerate() {
            assert_eq!(e.n as usize, i + 1);
        }
    }
}
