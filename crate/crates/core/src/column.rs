//! Bit-packed `±1` columns.
//!
//! Row `i` of an `n`-row column lives at bit `n - 1 - i`, so comparing the
//! packed words compares the columns lexicographically from the top row
//! with `-1 < +1`.

use std::fmt;

/// Longest supported column.
pub const MAX_RUNS: usize = 63;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignColumn {
    bits: u64,
    n: u8,
}

impl SignColumn {
    pub fn from_bits(n: usize, bits: u64) -> Self {
        assert!(n <= MAX_RUNS, "at most {MAX_RUNS} runs");
        debug_assert_eq!(bits & !mask(n), 0);
        Self { bits, n: n as u8 }
    }

    pub fn ones(n: usize) -> Self {
        Self::from_bits(n, mask(n))
    }

    pub fn from_signs(signs: &[i8]) -> Self {
        let n = signs.len();
        let bits = signs.iter().enumerate().fold(0u64, |acc, (i, &x)| {
            debug_assert!(x == 1 || x == -1);
            if x > 0 {
                acc | 1 << (n - 1 - i)
            } else {
                acc
            }
        });
        Self::from_bits(n, bits)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(self, row: usize) -> i8 {
        if self.bits >> (self.len() - 1 - row) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn signs(self) -> Vec<i8> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    /// `#plus - #minus`.
    #[inline]
    pub fn sum(self) -> i32 {
        2 * self.bits.count_ones() as i32 - self.n as i32
    }

    #[inline]
    pub fn dot(self, other: SignColumn) -> i32 {
        debug_assert_eq!(self.n, other.n);
        self.n as i32 - 2 * (self.bits ^ other.bits).count_ones() as i32
    }

    /// Elementwise product.
    #[inline]
    pub fn hadamard(self, other: SignColumn) -> SignColumn {
        Self {
            bits: !(self.bits ^ other.bits) & mask(self.len()),
            n: self.n,
        }
    }

    pub fn negate(self) -> SignColumn {
        Self {
            bits: !self.bits & mask(self.len()),
            n: self.n,
        }
    }

    pub fn flip_row(self, row: usize) -> SignColumn {
        Self {
            bits: self.bits ^ 1 << (self.len() - 1 - row),
            n: self.n,
        }
    }

    /// Applies a row permutation: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(self, perm: &[usize]) -> SignColumn {
        let n = self.len();
        let bits = perm.iter().enumerate().fold(0u64, |acc, (i, &src)| {
            acc | (self.bits >> (n - 1 - src) & 1) << (n - 1 - i)
        });
        Self { bits, n: self.n }
    }

    /// `(N - 3) / 4` for the run sizes of interest.
    pub fn x(self) -> usize {
        (self.len().saturating_sub(3)) / 4
    }
}

#[inline]
pub fn mask(n: usize) -> u64 {
    debug_assert!(n <= MAX_RUNS);
    (1u64 << n) - 1
}

impl fmt::Debug for SignColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignColumn({self})")
    }
}

impl fmt::Display for SignColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// All `n`-bit words with exactly `k` bits set, ascending.
pub fn fixed_weight_words(n: usize, k: usize) -> impl Iterator<Item = u64> {
    assert!(n <= MAX_RUNS, "at most {MAX_RUNS} runs");
    let limit = 1u64 << n;
    let mut next = (k <= n).then(|| mask(k));
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let low = cur & cur.wrapping_neg();
            let ripple = cur + low;
            let word = (((ripple ^ cur) >> 2) / low) | ripple;
            (word < limit).then_some(word)
        };
        Some(cur)
    })
}
