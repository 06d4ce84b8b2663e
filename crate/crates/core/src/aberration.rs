//! Alias matrices of the main-effects model and the G2-aberration values
//! `C2` and `C3`, computed exactly.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::canon::{canonicalize, CanonicalKey};
use crate::column::SignColumn;
use crate::design::Design;
use crate::exact::{format_fixed, rational_inverse, to_rational};
use crate::par::Workers;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AberrationError {
    #[error("information matrix of a {n}x{p} design is singular")]
    Singular { n: usize, p: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasStats {
    /// `tr(A2* A2*')`: aliasing of main effects with two-factor interactions.
    pub c2: BigRational,
    /// `tr(A3* A3*')`: aliasing of main effects with three-factor interactions.
    pub c3: BigRational,
    /// Number of factors.
    pub k: usize,
}

impl AliasStats {
    /// Sequential `(C2, C3)` order.
    pub fn cmp_sequential(&self, other: &Self) -> Ordering {
        self.c2.cmp(&other.c2).then_with(|| self.c3.cmp(&other.c3))
    }

    pub fn c2_display(&self) -> String {
        format_fixed(&self.c2, 2)
    }

    pub fn c3_display(&self) -> String {
        format_fixed(&self.c3, 2)
    }
}

/// All order-`order` elementwise products of the factor columns, in
/// lexicographic order of the index tuples.
pub fn interaction_columns(factors: &[SignColumn], order: usize) -> Vec<SignColumn> {
    let k = factors.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..order).collect();
    if order == 0 || order > k {
        return out;
    }
    loop {
        let col = idx[1..]
            .iter()
            .fold(factors[idx[0]], |acc, &i| acc.hadamard(factors[i]));
        out.push(col);
        // next combination
        let mut i = order;
        while i > 0 && idx[i - 1] == k - order + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..order {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact `C2`, `C3` of a design. The intercept row of every alias matrix
/// is dropped before summing squares.
#[allow(clippy::needless_range_loop)]
pub fn alias_stats(design: &Design) -> Result<AliasStats, AberrationError> {
    let (n, p) = (design.n(), design.p());
    let singular = AberrationError::Singular { n, p };
    let inv = rational_inverse(&to_rational(&design.gram())).ok_or(singular)?;
    // inv = scaled / denom with an integer matrix `scaled`
    let denom = inv
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let scaled: Vec<Vec<BigInt>> = inv
        .iter()
        .map(|row| {
            row.iter()
                .map(|q| q.numer() * (&denom / q.denom()))
                .collect()
        })
        .collect();
    let factors = design.factors();
    let k = factors.len();
    let sq_denom = &denom * &denom;
    let mut values = [BigRational::zero(), BigRational::zero()];
    for (slot, order) in [(0usize, 2usize), (1, 3)] {
        let inter = interaction_columns(factors, order);
        if inter.is_empty() {
            continue;
        }
        // X_m' X_i, one column per interaction
        let cross: Vec<Vec<i64>> = design
            .columns()
            .iter()
            .map(|&c| inter.iter().map(|&x| c.dot(x) as i64).collect())
            .collect();
        let mut total = BigInt::zero();
        for row in scaled.iter().skip(1) {
            for q in 0..inter.len() {
                let mut v = BigInt::zero();
                for (l, coef) in row.iter().enumerate() {
                    let m = cross[l][q];
                    if m != 0 {
                        v += coef * m;
                    }
                }
                total += &v * &v;
            }
        }
        values[slot] = BigRational::new(total, sq_denom.clone());
    }
    let [c2, c3] = values;
    Ok(AliasStats { c2, c3, k })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedDesign {
    /// 1-based position after sorting.
    pub rank: usize,
    pub key: CanonicalKey,
    pub stats: AliasStats,
    pub design: Design,
}

/// Sorts by `(C2, C3)` exactly, ties broken by canonical key bytes; the head
/// is the minimally aliased design.
pub fn rank_catalog(
    designs: &[Design],
    workers: &Workers,
) -> Result<Vec<RankedDesign>, AberrationError> {
    let scored = workers.map(designs, |d| {
        alias_stats(d).map(|stats| (canonicalize(d), stats, d.clone()))
    });
    let mut scored = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    scored.sort_by(|a, b| a.1.cmp_sequential(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (key, stats, design))| RankedDesign {
            rank: i + 1,
            key,
            stats,
            design,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columns::initial_design;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn initial_design_n7() {
        // G = 8I - J, rhs (-1,-1,-1): every coefficient is -1/5
        let st = alias_stats(&initial_design(7).unwrap()).unwrap();
        assert_eq!(st.c2, q(2, 25));
        assert_eq!(st.c3, q(0, 1));
        assert_eq!(st.k, 2);
    }

    #[test]
    fn orthogonal_case_matches_scaled_cross_products() {
        // 8-run full factorial in three factors: X_m'X_m = 8I
        let signs = |f: &dyn Fn(usize) -> bool| -> Vec<i8> {
            (0..8).map(|r| if f(r) { 1 } else { -1 }).collect()
        };
        let a = SignColumn::from_signs(&signs(&|r| r & 1 == 1));
        let b = SignColumn::from_signs(&signs(&|r| r & 2 == 2));
        let c = SignColumn::from_signs(&signs(&|r| r & 4 == 4));
        // the fourth factor aliased with ab
        let d = a.hadamard(b);
        let design = Design::from_factors(8, &[a, b, c, d]);
        assert!(design.gram().iter().enumerate().all(|(i, row)| row
            .iter()
            .enumerate()
            .all(|(j, &v)| v == if i == j { 8 } else { 0 })));
        let st = alias_stats(&design).unwrap();
        // direct: A2 = X_m'X_2 / 8
        let mut direct = BigRational::zero();
        for col in design.factors() {
            for x in interaction_columns(design.factors(), 2) {
                let v = q(col.dot(x) as i64, 8);
                direct += &v * &v;
            }
        }
        assert_eq!(st.c2, direct);
        // ab = d, ad = b, bd = a: three unit aliases
        assert_eq!(st.c2, q(3, 1));
    }

    #[test]
    fn interaction_column_counts() {
        let cols: Vec<SignColumn> = (0..5).map(|i| SignColumn::from_bits(7, 1 << i)).collect();
        assert_eq!(interaction_columns(&cols, 2).len(), 10);
        assert_eq!(interaction_columns(&cols, 3).len(), 10);
        assert!(interaction_columns(&cols[..2], 3).is_empty());
        assert_eq!(interaction_columns(&cols[..1], 1).len(), 1);
    }

    #[test]
    fn singular_design_is_rejected() {
        let a = SignColumn::from_signs(&[1, -1, 1, -1, 1, -1, 1]);
        let d = Design::from_factors(7, &[a, a]);
        assert!(matches!(
            alias_stats(&d),
            Err(AberrationError::Singular { .. })
        ));
    }

    #[test]
    fn ranking_orders_by_c2_then_c3() {
        let d1 = initial_design(7).unwrap();
        let d2 = initial_design(11).unwrap();
        let ranked = rank_catalog(&[d2.clone(), d1.clone()], &Workers::sequential()).unwrap();
        assert_eq!(ranked.len(), 2);
        assert!(ranked[0].stats.cmp_sequential(&ranked[1].stats) != Ordering::Greater);
        assert_eq!(ranked[0].rank, 1);
        let single = rank_catalog(std::slice::from_ref(&d1), &Workers::sequential()).unwrap();
        assert_eq!(single[0].design, d1);
    }
}
