//! Ehlich matrices `K(N, p, s)`, their closed-form determinant and trace of
//! the inverse, and the D-/A-efficiency grid over the block count `s`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("run size {0} is not 3 mod 4")]
    RunSize(usize),
    #[error("need 1 <= s <= p <= N, got N={n}, p={p}, s={s}")]
    Shape { n: usize, p: usize, s: usize },
    #[error("K({n},{p},{s}) is singular")]
    Singular { n: usize, p: usize, s: usize },
}

/// The tuple `(N, p, s)` together with its block data.
///
/// `r = floor(p / s)`, `u` blocks have size `r` and `v = s - u` blocks have
/// size `r + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EhlichSpec {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub r: usize,
    pub u: usize,
    pub v: usize,
}

pub fn check_run_size(n: usize) -> Result<(), SpecError> {
    if n % 4 == 3 {
        Ok(())
    } else {
        Err(SpecError::RunSize(n))
    }
}

impl EhlichSpec {
    pub fn new(n: usize, p: usize, s: usize) -> Result<Self, SpecError> {
        check_run_size(n)?;
        if s == 0 || s > p || p > n {
            return Err(SpecError::Shape { n, p, s });
        }
        let r = p / s;
        let v = p - r * s;
        let u = s - v;
        Ok(Self { n, p, s, r, u, v })
    }

    /// Block sizes in matrix order: the `u` blocks of size `r`, then the
    /// `v` blocks of size `r + 1`.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.r; self.u];
        sizes.extend(std::iter::repeat_n(self.r + 1, self.v));
        sizes
    }

    fn block_lengths(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let n = self.n as i64;
        self.block_sizes()
            .into_iter()
            .map(move |r| (r as i64, n - 3 + 4 * r as i64))
    }

    /// `1 - Σ r_i / L_i`.
    fn schur_factor(&self) -> BigRational {
        self.block_lengths()
            .fold(BigRational::one(), |acc, (r, l)| {
                acc - BigRational::new(r.into(), l.into())
            })
    }
}

impl std::fmt::Display for EhlichSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "K({},{},{})", self.n, self.p, self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EhlichMatrix {
    pub spec: EhlichSpec,
    pub entries: Vec<Vec<i64>>,
}

pub fn build_matrix(spec: &EhlichSpec) -> EhlichMatrix {
    let mut block_of = Vec::with_capacity(spec.p);
    for (b, size) in spec.block_sizes().into_iter().enumerate() {
        block_of.extend(std::iter::repeat_n(b, size));
    }
    let n = spec.n as i64;
    let entries = (0..spec.p)
        .map(|i| {
            (0..spec.p)
                .map(|j| match () {
                    _ if i == j => n,
                    _ if block_of[i] == block_of[j] => 3,
                    _ => -1,
                })
                .collect()
        })
        .collect();
    EhlichMatrix {
        spec: *spec,
        entries,
    }
}

/// `(N-3)^(p-s) · (1 - Σ r_i/L_i) · Π L_i` with `L_i = N - 3 + 4 r_i`.
pub fn det_closed_form(spec: &EhlichSpec) -> BigInt {
    let base = BigInt::from(spec.n - 3).pow((spec.p - spec.s) as u32);
    let prod = spec
        .block_lengths()
        .fold(BigInt::one(), |acc, (_, l)| acc * BigInt::from(l));
    let value = BigRational::from_integer(base * prod) * spec.schur_factor();
    debug_assert!(value.is_integer());
    value.to_integer()
}

/// `Σ 1/L_i + (p-s)/(N-3) + (Σ r_i/L_i²) / (1 - Σ r_i/L_i)`.
pub fn trace_inv_closed_form(spec: &EhlichSpec) -> Result<BigRational, SpecError> {
    let schur = spec.schur_factor();
    if schur.is_zero() {
        return Err(SpecError::Singular {
            n: spec.n,
            p: spec.p,
            s: spec.s,
        });
    }
    let mut inv_sum = BigRational::zero();
    let mut weighted = BigRational::zero();
    for (r, l) in spec.block_lengths() {
        inv_sum += BigRational::new(1.into(), l.into());
        weighted += BigRational::new(r.into(), (l * l).into());
    }
    let within = BigRational::new(BigInt::from(spec.p - spec.s), BigInt::from(spec.n - 3));
    Ok(inv_sum + within + weighted / schur)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCell {
    pub det: BigInt,
    pub trace_inv: BigRational,
    /// `(det / max det)^(1/p)`.
    pub d_eff: f64,
    /// `min trace / trace`.
    pub a_eff: f64,
    pub is_d_opt: bool,
    pub is_a_opt: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyGrid {
    pub n: usize,
    pub cells: BTreeMap<(usize, usize), EfficiencyCell>,
    pub optimal_d: BTreeMap<usize, BTreeSet<usize>>,
    pub optimal_a: BTreeMap<usize, BTreeSet<usize>>,
}

impl EfficiencyGrid {
    pub fn cell(&self, p: usize, s: usize) -> Option<&EfficiencyCell> {
        self.cells.get(&(p, s))
    }

    pub fn is_d_optimal(&self, p: usize, s: usize) -> bool {
        self.optimal_d.get(&p).is_some_and(|set| set.contains(&s))
    }

    pub fn is_a_optimal(&self, p: usize, s: usize) -> bool {
        self.optimal_a.get(&p).is_some_and(|set| set.contains(&s))
    }
}

/// Efficiencies of every `K(N, p, s)` for `p = 4..=p_max`, `s = 1..=p`.
/// Optimal sets are decided by exact comparison.
pub fn efficiency_grid(n: usize, p_max: usize) -> Result<EfficiencyGrid, SpecError> {
    check_run_size(n)?;
    if p_max > n {
        return Err(SpecError::Shape { n, p: p_max, s: 1 });
    }
    let mut grid = EfficiencyGrid {
        n,
        cells: BTreeMap::new(),
        optimal_d: BTreeMap::new(),
        optimal_a: BTreeMap::new(),
    };
    for p in 4..=p_max {
        let mut column = Vec::with_capacity(p);
        for s in 1..=p {
            let spec = EhlichSpec::new(n, p, s)?;
            column.push((s, det_closed_form(&spec), trace_inv_closed_form(&spec)?));
        }
        let max_det = column.iter().map(|(_, d, _)| d).max().unwrap().clone();
        let min_tr = column.iter().map(|(_, _, t)| t).min().unwrap().clone();
        let d_set: BTreeSet<usize> = column
            .iter()
            .filter(|(_, d, _)| *d == max_det)
            .map(|(s, _, _)| *s)
            .collect();
        let a_set: BTreeSet<usize> = column
            .iter()
            .filter(|(_, _, t)| *t == min_tr)
            .map(|(s, _, _)| *s)
            .collect();
        for (s, det, trace_inv) in column {
            let d_ratio = BigRational::new(det.clone(), max_det.clone());
            let d_eff = exact::to_f64(&d_ratio).powf(1.0 / p as f64);
            let a_eff = exact::to_f64(&(&min_tr / &trace_inv));
            grid.cells.insert(
                (p, s),
                EfficiencyCell {
                    det,
                    trace_inv,
                    d_eff,
                    a_eff,
                    is_d_opt: d_set.contains(&s),
                    is_a_opt: a_set.contains(&s),
                },
            );
        }
        grid.optimal_d.insert(p, d_set);
        grid.optimal_a.insert(p, a_set);
    }
    Ok(grid)
}

/// CSV rendering with columns `p,s,det,traceInv,dEff,aEff,isDOpt,isAOpt`;
/// efficiencies are percentages to two decimals.
pub fn grid_csv(grid: &EfficiencyGrid) -> String {
    let mut out = String::from("p,s,det,traceInv,dEff,aEff,isDOpt,isAOpt\n");
    for (&(p, s), cell) in &grid.cells {
        out.push_str(&format!(
            "{p},{s},{},{},{:.2},{:.2},{},{}\n",
            cell.det,
            cell.trace_inv,
            cell.d_eff * 100.0,
            cell.a_eff * 100.0,
            cell.is_d_opt,
            cell.is_a_opt
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn spec_block_data() {
        let s = EhlichSpec::new(15, 14, 4).unwrap();
        assert_eq!((s.r, s.u, s.v), (3, 2, 2));
        assert_eq!(s.block_sizes(), vec![3, 3, 4, 4]);
        let s = EhlichSpec::new(15, 15, 15).unwrap();
        assert_eq!((s.r, s.u, s.v), (1, 15, 0));
        let s = EhlichSpec::new(15, 15, 4).unwrap();
        assert_eq!((s.r, s.u, s.v), (3, 1, 3));
    }

    #[test]
    fn spec_rejects_bad_input() {
        assert_eq!(EhlichSpec::new(16, 4, 4), Err(SpecError::RunSize(16)));
        assert!(matches!(
            EhlichSpec::new(15, 4, 5),
            Err(SpecError::Shape { .. })
        ));
        assert!(matches!(
            EhlichSpec::new(7, 8, 4),
            Err(SpecError::Shape { .. })
        ));
        assert!(matches!(
            EhlichSpec::new(7, 4, 0),
            Err(SpecError::Shape { .. })
        ));
    }

    #[test]
    fn block_identities_hold() {
        for n in [7usize, 11, 15, 19] {
            for p in 1..=n {
                for s in 1..=p {
                    let sp = EhlichSpec::new(n, p, s).unwrap();
                    assert_eq!(sp.v, sp.s - sp.u);
                    assert_eq!(sp.p, sp.u * sp.r + sp.v * (sp.r + 1));
                    if p % s == 0 {
                        assert_eq!((sp.u, sp.v), (s, 0));
                    } else {
                        assert_eq!(sp.u, s * (sp.r + 1) - p);
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_15_14_4_layout() {
        let m = build_matrix(&EhlichSpec::new(15, 14, 4).unwrap());
        let blocks = [0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 3, 3, 3, 3];
        for i in 0..14 {
            for j in 0..14 {
                let want = if i == j {
                    15
                } else if blocks[i] == blocks[j] {
                    3
                } else {
                    -1
                };
                assert_eq!(m.entries[i][j], want, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn matrix_extremes() {
        let m = build_matrix(&EhlichSpec::new(7, 3, 3).unwrap());
        assert_eq!(
            m.entries,
            vec![vec![7, -1, -1], vec![-1, 7, -1], vec![-1, -1, 7]]
        );
        let m = build_matrix(&EhlichSpec::new(15, 4, 1).unwrap());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.entries[i][j], if i == j { 15 } else { 3 });
            }
        }
    }

    #[test]
    fn closed_forms_small() {
        let sp = |p, s| EhlichSpec::new(15, p, s).unwrap();
        assert_eq!(det_closed_form(&sp(4, 4)), BigInt::from(49152));
        assert_eq!(det_closed_form(&sp(4, 1)), BigInt::from(41472));
        assert_eq!(
            det_closed_form(&EhlichSpec::new(7, 3, 3).unwrap()),
            BigInt::from(320)
        );
        assert_eq!(trace_inv_closed_form(&sp(4, 4)).unwrap(), q(13, 48));
        assert_eq!(trace_inv_closed_form(&sp(4, 1)).unwrap(), q(7, 24));
        // 7I - (J - I) has eigenvalues 8, 8, 5
        assert_eq!(
            trace_inv_closed_form(&EhlichSpec::new(7, 3, 3).unwrap()).unwrap(),
            q(1, 8) + q(1, 8) + q(1, 5)
        );
    }

    #[test]
    fn grid_examples() {
        let g = efficiency_grid(15, 15).unwrap();
        let c = g.cell(4, 1).unwrap();
        assert_eq!(format!("{:.2}", c.d_eff * 100.0), "95.84");
        assert_eq!(format!("{:.2}", c.a_eff * 100.0), "92.86");
        assert_eq!(g.optimal_d[&10], BTreeSet::from([9, 10]));
        assert_eq!(g.optimal_a[&10], BTreeSet::from([5]));
        assert_eq!(g.optimal_a[&8], BTreeSet::from([7, 8]));
        assert_eq!(g.optimal_d[&8], BTreeSet::from([8]));
    }

    #[test]
    fn grid_rejects_pmax_above_n() {
        assert!(efficiency_grid(7, 8).is_err());
    }
}
