//! Designs (model matrices with the intercept first), their Gram matrices
//! and recovery of the Ehlich form from a bare matrix.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::SignColumn;
use crate::matrix::{EhlichSpec, SpecError};

/// Which group holds the intercept when `p` is not a multiple of `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeTag {
    /// `v = 0`: all groups have the same size.
    Pure,
    /// The intercept sits in a group of `r` columns.
    Type1,
    /// The intercept sits in a group of `r + 1` columns.
    Type2,
}

impl TypeTag {
    pub fn code(self) -> u8 {
        match self {
            TypeTag::Pure => 0,
            TypeTag::Type1 => 1,
            TypeTag::Type2 => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(TypeTag::Pure),
            1 => Some(TypeTag::Type1),
            2 => Some(TypeTag::Type2),
            _ => None,
        }
    }

    /// The tags that exist for a spec: `Pure` alone when `v = 0`, otherwise
    /// both types.
    pub fn for_spec(spec: &EhlichSpec) -> Vec<TypeTag> {
        if spec.v == 0 {
            vec![TypeTag::Pure]
        } else {
            vec![TypeTag::Type1, TypeTag::Type2]
        }
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// An `N × p` two-level model matrix, column 0 being the intercept, together
/// with the group label of every column (the intercept is in group 1).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Design {
    columns: Vec<SignColumn>,
    group_of: Vec<u8>,
}

impl Design {
    pub fn new(columns: Vec<SignColumn>, group_of: Vec<u8>) -> Self {
        assert!(!columns.is_empty(), "a design has at least the intercept");
        assert_eq!(columns.len(), group_of.len());
        let n = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == n), "ragged design");
        Self { columns, group_of }
    }

    /// A design with every column in its own group; the group labels are
    /// only meaningful for designs produced by the enumeration engine.
    pub fn from_columns(columns: Vec<SignColumn>) -> Self {
        let group_of = (1..=columns.len() as u8).collect();
        Self::new(columns, group_of)
    }

    /// Builds the matrix from an intercept-free list of factor columns.
    pub fn from_factors(n: usize, factors: &[SignColumn]) -> Self {
        let mut columns = Vec::with_capacity(factors.len() + 1);
        columns.push(SignColumn::ones(n));
        columns.extend_from_slice(factors);
        Self::from_columns(columns)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[SignColumn] {
        &self.columns
    }

    pub fn factors(&self) -> &[SignColumn] {
        &self.columns[1..]
    }

    pub fn group_of(&self) -> &[u8] {
        &self.group_of
    }

    pub fn group_count(&self) -> usize {
        self.group_of.iter().copied().max().unwrap_or(0) as usize
    }

    /// Size of every group, indexed by `label - 1`.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.group_count()];
        for &g in &self.group_of {
            sizes[g as usize - 1] += 1;
        }
        sizes
    }

    /// Appends a column to group `group`, which may be a new label.
    pub fn push(&mut self, column: SignColumn, group: u8) {
        assert_eq!(column.len(), self.n());
        self.columns.push(column);
        self.group_of.push(group);
    }

    pub fn with_column(&self, column: SignColumn, group: u8) -> Self {
        let mut d = self.clone();
        d.push(column, group);
        d
    }

    /// `X'X`.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        let cols = &self.columns;
        (0..cols.len())
            .map(|i| {
                (0..cols.len())
                    .map(|j| cols[i].dot(cols[j]) as i64)
                    .collect()
            })
            .collect()
    }

    /// Row `i` as signs.
    pub fn row(&self, i: usize) -> Vec<i8> {
        self.columns.iter().map(|c| c.get(i)).collect()
    }

    /// `+`/`-` rendering, one line per run.
    pub fn to_lines(&self) -> Vec<String> {
        (0..self.n())
            .map(|i| {
                self.columns
                    .iter()
                    .map(|c| if c.get(i) > 0 { '+' } else { '-' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Debug for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "Design(N={}, p={}, groups={:?})",
            self.n(),
            self.p(),
            self.group_of
        )?;
        for line in self.to_lines() {
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Why a matrix is not of Ehlich form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormMismatch {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("column 0 is not the all-ones intercept (row {row})")]
    Intercept { row: usize },
    #[error("Gram entry ({row},{col}) = {value}, expected 3 or -1")]
    Entry { row: usize, col: usize, value: i64 },
    #[error("Gram entry ({row},{col}) = -1 inside a block of +3 entries")]
    NotClique { row: usize, col: usize },
    #[error("block sizes {found:?} do not match {expected:?}")]
    BlockSizes {
        found: Vec<usize>,
        expected: Vec<usize>,
    },
}

/// Recovered block structure of an Ehlich-form design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EhlichForm {
    pub spec: EhlichSpec,
    pub type_tag: TypeTag,
    /// Block of every column, blocks numbered by first appearance (the
    /// intercept's block is 0).
    pub block_of: Vec<usize>,
}

/// Checks that `X'X` is a (permuted) Ehlich matrix and recovers `(N, p, s)`,
/// the block partition and the design type.
#[allow(clippy::needless_range_loop)]
pub fn check_ehlich_form(design: &Design) -> Result<EhlichForm, FormMismatch> {
    let n = design.n();
    crate::matrix::check_run_size(n)?;
    if let Some(row) = (0..n).find(|&i| design.columns()[0].get(i) < 0) {
        return Err(FormMismatch::Intercept { row });
    }
    let gram = design.gram();
    let p = design.p();
    for i in 0..p {
        for j in i + 1..p {
            let value = gram[i][j];
            if value != 3 && value != -1 {
                return Err(FormMismatch::Entry {
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    let mut block_of = vec![usize::MAX; p];
    let mut sizes = Vec::new();
    for i in 0..p {
        if block_of[i] != usize::MAX {
            continue;
        }
        let b = sizes.len();
        let members: Vec<usize> = (i..p)
            .filter(|&j| j == i || (block_of[j] == usize::MAX && gram[i][j] == 3))
            .collect();
        for &a in &members {
            for &c in &members {
                if a < c && gram[a][c] != 3 {
                    return Err(FormMismatch::NotClique { row: a, col: c });
                }
            }
            block_of[a] = b;
        }
        sizes.push(members.len());
    }
    // every +3 edge must stay inside a block
    for i in 0..p {
        for j in i + 1..p {
            if gram[i][j] == 3 && block_of[i] != block_of[j] {
                return Err(FormMismatch::NotClique { row: i, col: j });
            }
        }
    }
    let spec = EhlichSpec::new(n, p, sizes.len())?;
    let mut found = sizes.clone();
    found.sort_unstable();
    let expected = spec.block_sizes();
    if found != expected {
        return Err(FormMismatch::BlockSizes { found, expected });
    }
    let type_tag = if spec.v == 0 {
        TypeTag::Pure
    } else if sizes[0] == spec.r + 1 {
        TypeTag::Type2
    } else {
        TypeTag::Type1
    };
    Ok(EhlichForm {
        spec,
        type_tag,
        block_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::columns::initial_design;

    #[test]
    fn initial_design_is_k_n33() {
        let d = initial_design(11).unwrap();
        let form = check_ehlich_form(&d).unwrap();
        assert_eq!(form.spec, EhlichSpec::new(11, 3, 3).unwrap());
        assert_eq!(form.type_tag, TypeTag::Pure);
    }

    #[test]
    fn sign_flip_is_reported() {
        let d = initial_design(7).unwrap();
        let mut cols = d.columns().to_vec();
        cols[2] = cols[2].negate();
        let err = check_ehlich_form(&Design::from_columns(cols)).unwrap_err();
        assert_eq!(
            err,
            FormMismatch::Entry {
                row: 0,
                col: 2,
                value: 1
            }
        );
    }

    #[test]
    fn bad_intercept_is_reported() {
        let d = initial_design(7).unwrap();
        let mut cols = d.columns().to_vec();
        cols[0] = cols[0].flip_row(4);
        assert_eq!(
            check_ehlich_form(&Design::from_columns(cols)).unwrap_err(),
            FormMismatch::Intercept { row: 4 }
        );
    }

    #[test]
    fn non_transitive_block_is_reported() {
        // search the sum -1 columns of 7 runs for a path a ~ b ~ c with a, c at -1
        let pool: Vec<SignColumn> = crate::column::fixed_weight_words(7, 3)
            .map(|w| SignColumn::from_bits(7, w))
            .collect();
        let (a, b, c) = pool
            .iter()
            .flat_map(|&a| pool.iter().map(move |&b| (a, b)))
            .filter(|(a, b)| a.dot(*b) == 3)
            .flat_map(|(a, b)| pool.iter().map(move |&c| (a, b, c)))
            .find(|(a, b, c)| b.dot(*c) == 3 && a.dot(*c) == -1)
            .expect("path exists");
        let d = Design::from_factors(7, &[a, b, c]);
        assert!(matches!(
            check_ehlich_form(&d),
            Err(FormMismatch::NotClique { .. })
        ));
    }

    #[test]
    fn gram_and_lines() {
        let d = initial_design(7).unwrap();
        assert_eq!(
            d.gram(),
            vec![vec![7, -1, -1], vec![-1, 7, -1], vec![-1, -1, 7]]
        );
        assert_eq!(
            d.to_lines(),
            vec!["+--", "+--", "+-+", "+-+", "++-", "++-", "+++"]
        );
    }
}
