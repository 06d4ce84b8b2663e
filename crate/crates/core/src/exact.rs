//! Exact dense linear algebra over the integers and the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Determinant of a square integer matrix by Bareiss fraction-free elimination.
pub fn bareiss_det(matrix: &[Vec<i64>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = matrix
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "matrix must be square");
            row.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Inverse of a square rational matrix by Gauss-Jordan elimination.
/// Returns `None` when the matrix is singular.
pub fn rational_inverse(matrix: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = matrix.len();
    let mut a: Vec<Vec<BigRational>> = matrix.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

/// Integer matrix lifted to rationals.
pub fn to_rational(matrix: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| BigRational::from_integer(x.into()))
                .collect()
        })
        .collect()
}

/// Trace of the exact inverse of an integer matrix, `None` if singular.
pub fn trace_of_inverse(matrix: &[Vec<i64>]) -> Option<BigRational> {
    let inv = rational_inverse(&to_rational(matrix))?;
    Some((0..inv.len()).fold(BigRational::zero(), |acc, i| acc + &inv[i][i]))
}

/// `floor(q * 10^decimals + 1/2) / 10^decimals`, i.e. round half up.
pub fn round_half_up(q: &BigRational, decimals: u32) -> BigRational {
    let scale = BigInt::from(10u32).pow(decimals);
    let shifted = q * BigRational::from_integer(scale.clone())
        + BigRational::new(BigInt::one(), BigInt::from(2));
    BigRational::new(shifted.floor().to_integer(), scale)
}

/// Fixed-point rendering of a rational with round-half-up.
pub fn format_fixed(q: &BigRational, decimals: u32) -> String {
    let rounded = round_half_up(q, decimals);
    let scale = BigInt::from(10u32).pow(decimals);
    let scaled = (rounded * BigRational::from_integer(scale.clone())).to_integer();
    let negative = scaled.is_negative();
    let (whole, frac) = scaled.abs().div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if decimals == 0 {
        return format!("{sign}{whole}");
    }
    format!("{sign}{whole}.{:0width$}", frac, width = decimals as usize)
}

/// Lossy conversion used only for display.
pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}
