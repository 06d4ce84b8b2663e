//! Canonical forms of two-level designs under row permutations, factor
//! column permutations and factor sign switches (the intercept is fixed).
//!
//! The canonical representative is found column by column. Rows are kept
//! sorted by the prefix of columns chosen so far, so the first `d` columns
//! of the row-sorted matrix depend only on the first `d` choices and a
//! prefix that is not minimal can be cut immediately.
//!
//! Two reductions shrink the search without breaking equivariance:
//!
//! * a column with nonzero sum is only used with the sign that makes its
//!   sum negative (zero-sum columns are tried with both signs);
//! * columns are consumed in ascending order of a sign-free invariant
//!   (`|sum|`, sorted `|inner products|`, sorted `|3-way products|`), and
//!   only ties inside one invariant class are searched.
//!
//! Key bytes: format version, `N`, `p`, then the canonical factor matrix
//! row-major at one bit per cell (`+1` = 1), most significant bit first,
//! zero padded to a whole byte.

use std::collections::HashSet;
use std::fmt;
use std::sync::Mutex;

use indexmap::IndexMap;

use crate::column::{mask, SignColumn};
use crate::design::Design;

/// Bumped whenever the search order or byte layout changes.
pub const KEY_FORMAT_VERSION: u8 = 1;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn from_bytes(bytes: Vec<u8>) -> Option<Self> {
        if bytes.len() < 3 || bytes[0] != KEY_FORMAT_VERSION {
            return None;
        }
        let (n, p) = (bytes[1] as usize, bytes[2] as usize);
        if p == 0 || bytes.len() != 3 + (n * (p - 1)).div_ceil(8) {
            return None;
        }
        Some(Self(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0[1] as usize
    }

    pub fn p(&self) -> usize {
        self.0[2] as usize
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    /// The canonical representative as a design (intercept first).
    pub fn decode(&self) -> Design {
        let (n, k) = (self.n(), self.p() - 1);
        let body = &self.0[3..];
        let mut factors = vec![0u64; k];
        for row in 0..n {
            for (j, f) in factors.iter_mut().enumerate() {
                let idx = row * k + j;
                if body[idx / 8] >> (7 - idx % 8) & 1 == 1 {
                    *f |= 1 << (n - 1 - row);
                }
            }
        }
        let factors: Vec<SignColumn> = factors
            .into_iter()
            .map(|b| SignColumn::from_bits(n, b))
            .collect();
        Design::from_factors(n, &factors)
    }

    fn encode(n: usize, codes: &[u64]) -> Self {
        let k = codes.len();
        let mut bytes = vec![0u8; 3 + (n * k).div_ceil(8)];
        bytes[0] = KEY_FORMAT_VERSION;
        bytes[1] = n as u8;
        bytes[2] = (k + 1) as u8;
        for row in 0..n {
            for (j, &code) in codes.iter().enumerate() {
                if code >> (n - 1 - row) & 1 == 1 {
                    let idx = row * k + j;
                    bytes[3 + idx / 8] |= 1 << (7 - idx % 8);
                }
            }
        }
        Self(bytes)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

/// An element of the design isomorphism group.
///
/// Applying it yields the design whose factor `j` is original factor
/// `col_order[j]` (negated when `flips[col_order[j]]`), with row `i` taken
/// from original row `row_order[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub row_order: Vec<usize>,
    pub col_order: Vec<usize>,
    pub flips: Vec<bool>,
}

impl Isomorphism {
    pub fn identity(n: usize, k: usize) -> Self {
        Self {
            row_order: (0..n).collect(),
            col_order: (0..k).collect(),
            flips: vec![false; k],
        }
    }

    pub fn apply(&self, design: &Design) -> Design {
        let n = design.n();
        let factors = design.factors();
        let out: Vec<SignColumn> = self
            .col_order
            .iter()
            .map(|&j| {
                let c = if self.flips[j] {
                    factors[j].negate()
                } else {
                    factors[j]
                };
                c.permute_rows(&self.row_order)
            })
            .collect();
        Design::from_factors(n, &out)
    }

    /// The inverse group element.
    pub fn inverse(&self) -> Self {
        let mut row_order = vec![0; self.row_order.len()];
        for (i, &r) in self.row_order.iter().enumerate() {
            row_order[r] = i;
        }
        let mut col_order = vec![0; self.col_order.len()];
        let mut flips = vec![false; self.flips.len()];
        for (j, &c) in self.col_order.iter().enumerate() {
            col_order[c] = j;
            flips[j] = self.flips[c];
        }
        Self {
            row_order,
            col_order,
            flips,
        }
    }

    /// `other ∘ self`: apply `self` first, then `other`.
    pub fn then(&self, other: &Isomorphism) -> Self {
        let row_order = other.row_order.iter().map(|&i| self.row_order[i]).collect();
        let col_order: Vec<usize> = other.col_order.iter().map(|&j| self.col_order[j]).collect();
        let mut flips = vec![false; self.flips.len()];
        for (j, &orig) in col_order.iter().enumerate() {
            let mid = other.col_order[j];
            flips[orig] = self.flips[orig] ^ other.flips[mid];
        }
        Self {
            row_order,
            col_order,
            flips,
        }
    }
}

#[derive(Clone)]
struct Node {
    used: u64,
    chosen: Vec<(u8, bool)>,
    blocks: Vec<u64>,
}

/// Sign-free column invariant: `|sum|`, then the sorted `|inner products|`
/// with the other factors, then the sorted `|3-way products|`.
fn column_invariants(factors: &[SignColumn]) -> Vec<Vec<i32>> {
    let k = factors.len();
    let mut pair = vec![vec![0i32; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let v = factors[a].dot(factors[b]).abs();
            pair[a][b] = v;
            pair[b][a] = v;
        }
    }
    let mut triples: Vec<Vec<i32>> = vec![Vec::new(); k];
    for a in 0..k {
        for b in a + 1..k {
            let ab = factors[a].hadamard(factors[b]);
            for c in b + 1..k {
                let v = ab.dot(factors[c]).abs();
                triples[a].push(v);
                triples[b].push(v);
                triples[c].push(v);
            }
        }
    }
    (0..k)
        .map(|a| {
            let mut inv = vec![factors[a].sum().abs()];
            let mut ips: Vec<i32> = (0..k).filter(|&b| b != a).map(|b| pair[a][b]).collect();
            ips.sort_unstable();
            inv.extend(ips);
            let t = &mut triples[a];
            t.sort_unstable();
            inv.extend(t.iter().copied());
            inv
        })
        .collect()
}

/// Canonical key together with a group element mapping `design` onto the
/// canonical representative.
pub fn canonical_form(design: &Design) -> (CanonicalKey, Isomorphism) {
    let n = design.n();
    debug_assert!(
        design.columns()[0].sum() == n as i32,
        "intercept must be all ones"
    );
    let factors = design.factors();
    let k = factors.len();
    assert!(k < 64, "at most 63 factors");
    let full = mask(n);

    let invariants = column_invariants(factors);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| invariants[a].cmp(&invariants[b]));
    // class id of every column and the class required at each depth
    let mut class_of = vec![0usize; k];
    let mut slot_class = vec![0usize; k];
    let mut class = 0;
    for (pos, &col) in order.iter().enumerate() {
        if pos > 0 && invariants[col] != invariants[order[pos - 1]] {
            class += 1;
        }
        class_of[col] = class;
        slot_class[pos] = class;
    }
    // allowed orientations: `true` means negate
    let orientations: Vec<&[bool]> = factors
        .iter()
        .map(|c| match c.sum() {
            s if s > 0 => &[true][..],
            s if s < 0 => &[false][..],
            _ => &[false, true][..],
        })
        .collect();

    let mut frontier = vec![Node {
        used: 0,
        chosen: Vec::with_capacity(k),
        blocks: vec![full],
    }];
    let mut codes = Vec::with_capacity(k);
    for &want in slot_class.iter() {
        let mut best: Option<u64> = None;
        let mut next: Vec<Node> = Vec::new();
        let mut seen: HashSet<(u64, Vec<u64>)> = HashSet::new();
        for node in &frontier {
            for col in 0..k {
                if node.used >> col & 1 == 1 || class_of[col] != want {
                    continue;
                }
                for &neg in orientations[col] {
                    let bits = if neg {
                        !factors[col].bits() & full
                    } else {
                        factors[col].bits()
                    };
                    let code = column_code(&node.blocks, bits);
                    match best {
                        Some(b) if code > b => continue,
                        Some(b) if code < b => {
                            next.clear();
                            seen.clear();
                            best = Some(code);
                        }
                        None => best = Some(code),
                        _ => {}
                    }
                    let blocks = split_blocks(&node.blocks, bits);
                    let used = node.used | 1 << col;
                    if !seen.insert((used, blocks.clone())) {
                        continue;
                    }
                    let mut chosen = node.chosen.clone();
                    chosen.push((col as u8, neg));
                    next.push(Node {
                        used,
                        chosen,
                        blocks,
                    });
                }
            }
        }
        codes.push(best.expect("every depth has a candidate"));
        frontier = next;
    }

    let leaf = &frontier[0];
    let mut flips = vec![false; k];
    let mut col_order = Vec::with_capacity(k);
    for &(col, neg) in &leaf.chosen {
        col_order.push(col as usize);
        flips[col as usize] = neg;
    }
    let row_order = leaf
        .blocks
        .iter()
        .flat_map(|&b| (0..n).filter(move |&row| b >> (n - 1 - row) & 1 == 1))
        .collect();
    (
        CanonicalKey::encode(n, &codes),
        Isomorphism {
            row_order,
            col_order,
            flips,
        },
    )
}

pub fn canonicalize(design: &Design) -> CanonicalKey {
    canonical_form(design).0
}

/// Group element mapping `a` onto `b`, if they are isomorphic.
pub fn find_isomorphism(a: &Design, b: &Design) -> Option<Isomorphism> {
    let (ka, ta) = canonical_form(a);
    let (kb, tb) = canonical_form(b);
    (ka == kb).then(|| ta.then(&tb.inverse()))
}

/// The column as it reads after sorting each block `-1` first, packed with
/// the first row in the most significant position.
#[inline]
fn column_code(blocks: &[u64], bits: u64) -> u64 {
    let mut code = 0u64;
    for &b in blocks {
        let size = b.count_ones();
        let ones = (b & bits).count_ones();
        code = (code << size) | ((1u64 << ones) - 1);
    }
    code
}

#[inline]
fn split_blocks(blocks: &[u64], bits: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(blocks.len() + 4);
    for &b in blocks {
        let lo = b & !bits;
        let hi = b & bits;
        if lo != 0 {
            out.push(lo);
        }
        if hi != 0 {
            out.push(hi);
        }
    }
    out
}

/// Isomorphism-class store: canonical keys plus one representative design
/// per key, in insertion order. Safe for concurrent writers.
#[derive(Debug, Default)]
pub struct DedupStore {
    reps: Mutex<IndexMap<CanonicalKey, Design>>,
}

impl DedupStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `(key, design)` unless `key` is already present; returns
    /// whether the insert happened.
    pub fn test_and_insert(&self, key: CanonicalKey, design: Design) -> bool {
        let mut reps = self.reps.lock().expect("dedup store poisoned");
        if reps.contains_key(&key) {
            return false;
        }
        reps.insert(key, design);
        true
    }

    pub fn contains(&self, key: &CanonicalKey) -> bool {
        self.reps
            .lock()
            .expect("dedup store poisoned")
            .contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.reps.lock().expect("dedup store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_entries(self) -> Vec<(CanonicalKey, Design)> {
        self.reps
            .into_inner()
            .expect("dedup store poisoned")
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columns::initial_design;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_iso(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Isomorphism {
        let mut row_order: Vec<usize> = (0..n).collect();
        row_order.shuffle(rng);
        let mut col_order: Vec<usize> = (0..k).collect();
        col_order.shuffle(rng);
        let flips = (0..k).map(|_| rng.random_bool(0.5)).collect();
        Isomorphism {
            row_order,
            col_order,
            flips,
        }
    }

    fn random_design(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Design {
        let factors: Vec<SignColumn> = (0..k)
            .map(|_| SignColumn::from_bits(n, rng.random::<u64>() & mask(n)))
            .collect();
        Design::from_factors(n, &factors)
    }

    #[test]
    fn key_roundtrip_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, k) in [(7, 3), (11, 5), (15, 8), (8, 4)] {
            let d = random_design(n, k, &mut rng);
            let (key, iso) = canonical_form(&d);
            let rep = key.decode();
            assert_eq!(iso.apply(&d), rep);
            assert_eq!(canonicalize(&rep), key);
            assert_eq!(
                CanonicalKey::from_bytes(key.as_bytes().to_vec()),
                Some(key.clone())
            );
            assert_eq!(key.n(), n);
            assert_eq!(key.p(), k + 1);
        }
    }

    #[test]
    fn scrambles_preserve_key() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (n, k) in [(7, 4), (11, 6), (15, 9), (10, 5)] {
            let d = random_design(n, k, &mut rng);
            let key = canonicalize(&d);
            for _ in 0..50 {
                let g = random_iso(n, k, &mut rng);
                assert_eq!(canonicalize(&g.apply(&d)), key);
            }
        }
    }

    #[test]
    fn inverse_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_design(11, 6, &mut rng);
        let g = random_iso(11, 6, &mut rng);
        let h = random_iso(11, 6, &mut rng);
        assert_eq!(g.inverse().apply(&g.apply(&d)), d);
        assert_eq!(g.then(&h).apply(&d), h.apply(&g.apply(&d)));
        assert_eq!(Isomorphism::identity(11, 6).apply(&d), d);
    }

    #[test]
    fn witness_maps_between_isomorphic_designs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_design(15, 7, &mut rng);
        let e = random_iso(15, 7, &mut rng).apply(&d);
        let w = find_isomorphism(&d, &e).unwrap();
        assert_eq!(w.apply(&d), e);
    }

    #[test]
    fn non_isomorphic_designs_differ() {
        let d = initial_design(7).unwrap();
        let mut cols = d.factors().to_vec();
        cols[1] = cols[1].flip_row(0).flip_row(6);
        let e = Design::from_factors(7, &cols);
        // inner product changed from -1 to +3 (invariant under the group up to sign)
        assert_ne!(
            d.factors()[0].dot(d.factors()[1]).abs(),
            cols[0].dot(cols[1]).abs()
        );
        assert_ne!(canonicalize(&d), canonicalize(&e));
        assert!(find_isomorphism(&d, &e).is_none());
    }

    #[test]
    fn store_test_and_insert() {
        let store = DedupStore::new();
        let d = initial_design(7).unwrap();
        let key = canonicalize(&d);
        assert!(store.test_and_insert(key.clone(), d.clone()));
        assert!(!store.test_and_insert(key.clone(), d.clone()));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scrambled = random_iso(7, 2, &mut rng).apply(&d);
        assert!(!store.test_and_insert(canonicalize(&scrambled), scrambled));
        assert_eq!(store.len(), 1);
        assert_eq!(store.into_entries()[0].1, d);
    }

    #[test]
    fn store_concurrent_inserts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let designs: Vec<Design> = (0..40).map(|_| random_design(11, 4, &mut rng)).collect();
        let classes: HashSet<CanonicalKey> = designs.iter().map(canonicalize).collect();
        let store = DedupStore::new();
        std::thread::scope(|scope| {
            for t in 0..8 {
                let store = &store;
                let designs = &designs;
                scope.spawn(move || {
                    for (i, d) in designs.iter().enumerate() {
                        let mut rng = ChaCha8Rng::seed_from_u64((t * 1000 + i) as u64);
                        let g = random_iso(11, 4, &mut rng).apply(d);
                        store.test_and_insert(canonicalize(&g), g);
                    }
                });
            }
        });
        assert_eq!(store.len(), classes.len());
    }

    #[test]
    fn malformed_key_bytes_rejected() {
        assert!(CanonicalKey::from_bytes(vec![]).is_none());
        assert!(CanonicalKey::from_bytes(vec![9, 7, 3, 0, 0]).is_none());
        assert!(CanonicalKey::from_bytes(vec![KEY_FORMAT_VERSION, 7, 3, 0]).is_none());
        assert!(CanonicalKey::from_bytes(vec![KEY_FORMAT_VERSION, 7, 3, 0, 0]).is_some());
    }
}
