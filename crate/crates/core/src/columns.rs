//! The initial two-factor design and the reduced candidate column sets.
//!
//! Every design built by the engine keeps the two factor columns of
//! [`initial_design`] in positions 1 and 2, so candidate columns only need
//! to be drawn from the subsets of the sum `-1` and sum `3` universes that
//! have admissible inner products with those two columns.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::column::{fixed_weight_words, SignColumn};
use crate::design::Design;
use crate::exact::binomial;
use crate::matrix::{check_run_size, SpecError};

/// Intercept plus two factor columns whose rows are `(N+1)/4` copies each of
/// `(-,-)`, `(-,+)`, `(+,-)` followed by `(N-3)/4` copies of `(+,+)`.
pub fn initial_design(n: usize) -> Result<Design, SpecError> {
    check_run_size(n)?;
    if n < 7 {
        return Err(SpecError::Shape { n, p: 3, s: 3 });
    }
    let rep = (n + 1) / 4;
    let x = (n - 3) / 4;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for (sa, sb, count) in [(-1, -1, rep), (-1, 1, rep), (1, -1, rep), (1, 1, x)] {
        for _ in 0..count {
            a.push(sa);
            b.push(sb);
        }
    }
    Ok(Design::new(
        vec![
            SignColumn::ones(n),
            SignColumn::from_signs(&a),
            SignColumn::from_signs(&b),
        ],
        vec![1, 2, 3],
    ))
}

/// Candidate columns relative to the initial design's factor columns
/// `col_a` and `col_b`. Every list is sorted by packed encoding.
#[derive(Debug, Clone)]
pub struct CandidateSets {
    pub n: usize,
    pub col_a: SignColumn,
    pub col_b: SignColumn,
    /// `|ζ^3|`: all columns summing to 3.
    pub zeta3_len: usize,
    /// `|ζ^-1|`: all columns summing to -1.
    pub zeta_m1_len: usize,
    /// Sum 3, inner product -1 with both `col_a` and `col_b`.
    pub zeta3_star: Vec<SignColumn>,
    /// Sum -1, inner products `(3, -1)` with `(col_a, col_b)`.
    pub with_a: Vec<SignColumn>,
    /// Sum -1, inner products `(-1, 3)`.
    pub with_b: Vec<SignColumn>,
    /// Sum -1, inner products `(-1, -1)`: `ζ^-1*(s)`.
    pub separate: Vec<SignColumn>,
}

impl CandidateSets {
    /// `ζ^-1*`: the union of the three sum `-1` sub-cases.
    pub fn zeta_m1_star(&self) -> Vec<SignColumn> {
        let mut all: Vec<SignColumn> = self
            .with_a
            .iter()
            .chain(&self.with_b)
            .chain(&self.separate)
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    pub fn zeta_m1_star_len(&self) -> usize {
        self.with_a.len() + self.with_b.len() + self.separate.len()
    }
}

/// Exhaustive filter of the sum `-1` and sum `3` universes.
pub fn enumerate_candidates(n: usize) -> Result<CandidateSets, SpecError> {
    let init = initial_design(n)?;
    let (col_a, col_b) = (init.columns()[1], init.columns()[2]);
    let mut sets = CandidateSets {
        n,
        col_a,
        col_b,
        zeta3_len: 0,
        zeta_m1_len: 0,
        zeta3_star: Vec::new(),
        with_a: Vec::new(),
        with_b: Vec::new(),
        separate: Vec::new(),
    };
    // sum 3 <=> (N+3)/2 plus entries
    for w in fixed_weight_words(n, (n + 3) / 2) {
        sets.zeta3_len += 1;
        let c = SignColumn::from_bits(n, w);
        if c.dot(col_a) == -1 && c.dot(col_b) == -1 {
            sets.zeta3_star.push(c);
        }
    }
    for w in fixed_weight_words(n, (n - 1) / 2) {
        sets.zeta_m1_len += 1;
        let c = SignColumn::from_bits(n, w);
        match (c.dot(col_a), c.dot(col_b)) {
            (3, -1) => sets.with_a.push(c),
            (-1, 3) => sets.with_b.push(c),
            (-1, -1) => sets.separate.push(c),
            _ => {}
        }
    }
    Ok(sets)
}

/// Closed-form sizes `(|ζ^3*|, |ζ^-1*|, |ζ^-1*(s)|)` with `x = (N-3)/4`.
pub fn count_formulas(n: usize) -> Result<(BigInt, BigInt, BigInt), SpecError> {
    check_run_size(n)?;
    let x = ((n - 3) / 4) as u64;
    let (mut c3, mut cm1, mut cs) = (BigInt::zero(), BigInt::zero(), BigInt::zero());
    for i in 0..=x {
        let base = binomial(x, i) * binomial(x + 1, i + 1);
        let hi = binomial(x + 1, i + 1);
        let lo = binomial(x + 1, i);
        c3 += &base * &lo * &lo;
        cm1 += &base * (&hi * &hi + BigInt::from(2) * &lo * &lo);
        cs += &base * &hi * &hi;
    }
    Ok((c3, cm1, cs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_design_rows() {
        let d = initial_design(7).unwrap();
        let rows: Vec<Vec<i8>> = (0..7).map(|i| d.row(i)[1..].to_vec()).collect();
        assert_eq!(
            rows,
            vec![
                vec![-1, -1],
                vec![-1, -1],
                vec![-1, 1],
                vec![-1, 1],
                vec![1, -1],
                vec![1, -1],
                vec![1, 1]
            ]
        );
        assert_eq!(d.columns()[1].sum(), -1);
        assert_eq!(d.columns()[2].sum(), -1);
        assert_eq!(d.columns()[1].dot(d.columns()[2]), -1);
        let g = initial_design(15).unwrap().gram();
        assert_eq!(
            g,
            vec![vec![15, -1, -1], vec![-1, 15, -1], vec![-1, -1, 15]]
        );
    }

    #[test]
    fn initial_design_rejects_bad_n() {
        assert!(initial_design(8).is_err());
        assert!(initial_design(3).is_err());
    }

    #[test]
    fn n7_sets_by_brute_force() {
        let sets = enumerate_candidates(7).unwrap();
        // independent brute force over every ±1 column of length 7
        let (mut z3, mut zm1, mut s3, mut sm1, mut ss) = (0, 0, 0, 0, 0);
        for bits in 0u64..128 {
            let c = SignColumn::from_bits(7, bits);
            let (ia, ib) = (c.dot(sets.col_a), c.dot(sets.col_b));
            match c.sum() {
                3 => {
                    z3 += 1;
                    if (ia, ib) == (-1, -1) {
                        s3 += 1;
                    }
                }
                -1 => {
                    zm1 += 1;
                    if matches!((ia, ib), (-1, -1) | (3, -1) | (-1, 3)) {
                        sm1 += 1;
                    }
                    if (ia, ib) == (-1, -1) {
                        ss += 1;
                    }
                }
                _ => {}
            }
        }
        assert_eq!((z3, zm1, s3, sm1, ss), (21, 35, 6, 21, 9));
        assert_eq!(sets.zeta3_len, 21);
        assert_eq!(sets.zeta_m1_len, 35);
        assert_eq!(sets.zeta3_star.len(), 6);
        assert_eq!(sets.zeta_m1_star_len(), 21);
        assert_eq!(sets.separate.len(), 9);
    }

    #[test]
    fn formulas_n7() {
        let (a, b, c) = count_formulas(7).unwrap();
        assert_eq!((a, b, c), (6.into(), 21.into(), 9.into()));
    }

    #[test]
    fn sets_are_sorted_and_constrained() {
        let sets = enumerate_candidates(11).unwrap();
        for list in [&sets.zeta3_star, &sets.with_a, &sets.with_b, &sets.separate] {
            assert!(list.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(sets.zeta3_star.iter().all(|c| c.sum() == 3));
        assert!(sets
            .with_a
            .iter()
            .all(|c| c.sum() == -1 && c.dot(sets.col_a) == 3 && c.dot(sets.col_b) == -1));
        let (a, b, c) = count_formulas(11).unwrap();
        assert_eq!(a, sets.zeta3_star.len().into());
        assert_eq!(b, sets.zeta_m1_star_len().into());
        assert_eq!(c, sets.separate.len().into());
    }
}
