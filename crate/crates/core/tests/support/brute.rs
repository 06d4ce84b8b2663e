//! Brute-force catalogs for small run sizes.
//!
//! Every factor column of a design whose information matrix has Ehlich form
//! sums to 3 or -1, which fixes its sign. A class is therefore an orbit of
//! column *sets* under row permutations alone. The search below takes the
//! full column universe (no reduction, no fixed starting design), collects
//! every set whose Gram matrix is a permuted Ehlich matrix and partitions
//! the sets into row-permutation orbits.

use std::collections::{BTreeMap, HashSet};

/// `(p, s, type)` with type 0 when `s | p`, 1 when the intercept's block
/// has `floor(p/s)` columns and 2 when it has one more.
pub type Cell = (usize, usize, u8);

fn dot(n: usize, a: u32, b: u32) -> i32 {
    n as i32 - 2 * (a ^ b).count_ones() as i32
}

fn all_ones(n: usize) -> u32 {
    (1u32 << n) - 1
}

/// Block sizes of the Gram matrix when it is a permuted Ehlich matrix:
/// entries 3 or -1 off the diagonal and `+3` transitive. Returns the sizes
/// with the intercept's block first.
fn blocks(n: usize, cols: &[u32]) -> Option<Vec<usize>> {
    let p = cols.len();
    let mut block = vec![usize::MAX; p];
    let mut sizes = Vec::new();
    for i in 0..p {
        if block[i] != usize::MAX {
            continue;
        }
        let b = sizes.len();
        let mut size = 0;
        for j in i..p {
            if j == i || dot(n, cols[i], cols[j]) == 3 {
                if block[j] != usize::MAX {
                    return None;
                }
                block[j] = b;
                size += 1;
            }
        }
        sizes.push(size);
    }
    for i in 0..p {
        for j in i + 1..p {
            let d = dot(n, cols[i], cols[j]);
            if d != 3 && d != -1 {
                return None;
            }
            if (d == 3) != (block[i] == block[j]) {
                return None;
            }
        }
    }
    Some(sizes)
}

/// Classifies a block layout as `(p, s, type)`, or `None` when the sizes
/// are not those of `K(N, p, s)`.
fn classify(sizes: &[usize]) -> Option<Cell> {
    let p: usize = sizes.iter().sum();
    let s = sizes.len();
    let r = p / s;
    let v = p % s;
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable();
    let mut expected = vec![r; s - v];
    expected.extend(std::iter::repeat_n(r + 1, v));
    if sorted != expected {
        return None;
    }
    let t = if v == 0 {
        0
    } else if sizes[0] == r {
        1
    } else {
        2
    };
    Some((p, s, t))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0usize; n];
    out.push(perm.clone());
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn permute(col: u32, perm: &[usize]) -> u32 {
    let mut out = 0;
    for (i, &src) in perm.iter().enumerate() {
        if col >> src & 1 == 1 {
            out |= 1 << i;
        }
    }
    out
}

/// Orbit counts per cell for every `p <= p_max` (the intercept counts as a
/// column), together with one sorted factor-column set per orbit.
pub fn catalog(n: usize, p_max: usize) -> BTreeMap<Cell, Vec<Vec<u32>>> {
    let ones = all_ones(n);
    let universe: Vec<u32> = (0..=ones)
        .filter(|&c| {
            let s = dot(n, c, ones);
            s == 3 || s == -1
        })
        .collect();
    // grow column sets in increasing universe order; keep those whose Gram
    // entries stay in {3, -1}
    let mut valid: Vec<Vec<u32>> = Vec::new();
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    while let Some((set, from)) = stack.pop() {
        if !set.is_empty() {
            valid.push(set.iter().map(|&i| universe[i]).collect());
        }
        if set.len() + 1 >= p_max {
            continue;
        }
        for j in from..universe.len() {
            let c = universe[j];
            if set.iter().all(|&i| {
                let d = dot(n, universe[i], c);
                d == 3 || d == -1
            }) {
                let mut next = set.clone();
                next.push(j);
                stack.push((next, j + 1));
            }
        }
    }
    let perms = permutations(n);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out: BTreeMap<Cell, Vec<Vec<u32>>> = BTreeMap::new();
    for set in valid {
        let mut cols = vec![ones];
        cols.extend_from_slice(&set);
        let Some(cell) = blocks(n, &cols).and_then(|b| classify(&b)) else {
            continue;
        };
        if seen.contains(&set) {
            continue;
        }
        for perm in &perms {
            let mut image: Vec<u32> = set.iter().map(|&c| permute(c, perm)).collect();
            image.sort_unstable();
            seen.insert(image);
        }
        out.entry(cell).or_default().push(set);
    }
    out
}
