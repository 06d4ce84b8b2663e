//! Plain rational Gaussian elimination, used as an oracle for the closed
//! forms and for the crate's own fraction-free routines.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn rational(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect()
        })
        .collect()
}

/// Determinant by elimination with row swaps.
pub fn det(m: &[Vec<i64>]) -> BigRational {
    let mut a = rational(m);
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let t = &f * &a[c][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

/// `tr(M^-1)` by Gauss-Jordan elimination of `[M | I]`.
pub fn trace_inverse(m: &[Vec<i64>]) -> Option<BigRational> {
    let n = m.len();
    let mut a = rational(m);
    for (r, row) in a.iter_mut().enumerate() {
        row.extend((0..n).map(|k| {
            if k == r {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }));
    }
    for c in 0..n {
        let piv = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(piv, c);
        let inv = a[c][c].recip();
        for k in c..2 * n {
            a[c][k] *= &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for k in c..2 * n {
                    let t = &f * &a[c][k];
                    a[r][k] -= t;
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n + i].clone()).sum())
}
