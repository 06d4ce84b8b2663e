//! Enumeration of non-isomorphic two-level main-effects designs whose
//! information matrix has the Ehlich block form `K(N, p, s)` for run sizes
//! `N ≡ 3 (mod 4)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: fraction-free determinants and rational inverses.
//! * [`matrix`]: Ehlich matrices, closed-form determinant and trace of the
//!   inverse, efficiency grids and the optimal block counts.
//! * [`column`] / [`columns`]: bit-packed sign columns and the reduced
//!   candidate column universes.
//! * [`design`]: designs, Gram matrices and the Ehlich-form validator.
//! * [`canon`]: canonical keys and the dedup store.
//! * [`enumerate`]: the phase schedule and the column-extension engine.
//! * [`aberration`]: alias matrices, `C2`/`C3` and catalog ranking.
//! * [`catalog`]: on-disk catalogs, `index.json` and grid emission.

pub mod aberration;
pub mod canon;
pub mod catalog;
pub mod column;
pub mod columns;
pub mod design;
pub mod enumerate;
pub mod exact;
pub mod matrix;
pub mod par;

pub use aberration::{alias_stats, rank_catalog, AliasStats, RankedDesign};
pub use canon::{canonicalize, CanonicalKey, DedupStore};
pub use column::SignColumn;
pub use columns::{count_formulas, enumerate_candidates, initial_design, CandidateSets};
pub use design::{check_ehlich_form, Design, FormMismatch, TypeTag};
pub use enumerate::{schedule, EnumerateOptions, Enumerator, Signature, Step};
pub use matrix::{
    build_matrix, det_closed_form, efficiency_grid, trace_inv_closed_form, EfficiencyGrid,
    EhlichMatrix, EhlichSpec, SpecError,
};
