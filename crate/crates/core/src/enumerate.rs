//! The column-extension engine.
//!
//! Designs are grown one column at a time from [`initial_design`]. The
//! target `K(N, p, s)` fixes a schedule of steps: phase 1 opens singleton
//! groups `4..=s`, each later full phase adds one column to groups `2..=s`
//! and then to the intercept's group, and when `s` does not divide `p` a
//! partial phase tops up `v` groups (type 1) or the intercept's group and
//! `v - 1` others (type 2).
//!
//! After every step the children are reduced to one representative per
//! isomorphism class. Representatives keep the initial design's factor
//! columns in positions 1 and 2, so the reduced candidate sets stay valid.
//! An isomorphism between two stage designs can exchange non-intercept
//! groups of equal size, so a step that grows a group of size `m` grows
//! every non-intercept group of size `m`; stages are therefore identified by
//! the multiset of group sizes ([`Signature`]) rather than by labels.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::canon::{canonicalize, CanonicalKey, DedupStore};
use crate::column::SignColumn;
use crate::columns::{enumerate_candidates, initial_design, CandidateSets};
use crate::design::{Design, TypeTag};
use crate::matrix::{EhlichSpec, SpecError};
use crate::par::{Parallelism, Workers};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("designs need s >= 3, got s = {0}")]
    TooFewBlocks(usize),
    #[error("type {tag:?} does not exist for {spec}")]
    Type { spec: EhlichSpec, tag: TypeTag },
}

/// One column-extension step: the group label that receives the column and
/// the phase it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Step {
    pub group: usize,
    pub phase: usize,
}

/// The `p - 3` extension steps leading from `K(N,3,3)` to `spec`.
pub fn schedule(spec: &EhlichSpec, tag: TypeTag) -> Result<Vec<Step>, EnumerateError> {
    if spec.s < 3 {
        return Err(EnumerateError::TooFewBlocks(spec.s));
    }
    let type_ok = match tag {
        TypeTag::Pure => spec.v == 0,
        TypeTag::Type1 | TypeTag::Type2 => spec.v > 0,
    };
    if !type_ok {
        return Err(EnumerateError::Type { spec: *spec, tag });
    }
    let s = spec.s;
    let mut steps: Vec<Step> = (4..=s).map(|group| Step { group, phase: 1 }).collect();
    for phase in 2..=spec.r {
        steps.extend((2..=s).chain([1]).map(|group| Step { group, phase }));
    }
    let last = spec.r + 1;
    match tag {
        TypeTag::Pure => {}
        TypeTag::Type1 => {
            steps.extend((s - spec.v + 1..=s).map(|group| Step { group, phase: last }));
        }
        TypeTag::Type2 => {
            steps.push(Step {
                group: 1,
                phase: last,
            });
            steps.extend((s - spec.v + 2..=s).map(|group| Step { group, phase: last }));
        }
    }
    debug_assert_eq!(steps.len(), spec.p - 3);
    Ok(steps)
}

/// Stage identity: run size, size of the intercept's group and the sorted
/// sizes of the other groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub n: usize,
    pub intercept_group_size: usize,
    pub other_sizes: Vec<usize>,
}

impl Signature {
    pub fn of(design: &Design) -> Self {
        let sizes = design.group_sizes();
        let mut other_sizes = sizes[1..].to_vec();
        other_sizes.sort_unstable();
        Self {
            n: design.n(),
            intercept_group_size: sizes[0],
            other_sizes,
        }
    }

    pub fn s(&self) -> usize {
        1 + self.other_sizes.len()
    }

    pub fn p(&self) -> usize {
        self.intercept_group_size + self.other_sizes.iter().sum::<usize>()
    }

    fn initial(n: usize) -> Self {
        Self {
            n,
            intercept_group_size: 1,
            other_sizes: vec![1, 1],
        }
    }

    fn after(&self, kind: StepKind) -> Self {
        let mut next = self.clone();
        match kind {
            StepKind::NewGroup => next.other_sizes.push(1),
            StepKind::GrowIntercept => next.intercept_group_size += 1,
            StepKind::Grow(m) => {
                let i = next
                    .other_sizes
                    .iter()
                    .position(|&x| x == m)
                    .expect("a group of that size exists");
                next.other_sizes[i] += 1;
            }
        }
        next.other_sizes.sort_unstable();
        next
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum StepKind {
    NewGroup,
    GrowIntercept,
    /// Grow a non-intercept group currently holding this many columns.
    Grow(usize),
}

/// Appends every candidate `c` with `<c, x> = 3` for the columns `x` of
/// group `group` and `<c, x> = -1` for all others. `group` may be the next
/// unused label, which opens a new singleton group.
pub fn extend_one(parent: &Design, group: u8, candidates: &CandidateSets) -> Vec<Design> {
    let pool = candidate_pool(parent, group, candidates);
    let required: Vec<(SignColumn, i32)> = parent
        .columns()
        .iter()
        .zip(parent.group_of())
        .map(|(&c, &g)| (c, if g == group { 3 } else { -1 }))
        .collect();
    pool.iter()
        .filter(|&&c| required.iter().all(|&(x, ip)| c.dot(x) == ip))
        .map(|&c| parent.with_column(c, group))
        .collect()
}

fn candidate_pool<'a>(
    parent: &Design,
    group: u8,
    candidates: &'a CandidateSets,
) -> &'a [SignColumn] {
    if group == 1 {
        return &candidates.zeta3_star;
    }
    let groups = parent.group_of();
    match (groups.get(1), groups.get(2)) {
        (Some(&g), _) if g == group => &candidates.with_a,
        (_, Some(&g)) if g == group => &candidates.with_b,
        _ => &candidates.separate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub parallelism: Parallelism,
    /// Worker cap; `None` uses every core.
    pub threads: Option<usize>,
    /// Parents extended per parallel batch.
    pub chunk_size: usize,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        Self {
            parallelism: Parallelism::Parallel,
            threads: crate::par::threads_from_env(),
            chunk_size: 256,
        }
    }
}

impl EnumerateOptions {
    pub fn sequential() -> Self {
        Self {
            parallelism: Parallelism::Sequential,
            threads: None,
            ..Self::default()
        }
    }

    pub fn with_threads(threads: usize) -> Self {
        Self {
            parallelism: Parallelism::Parallel,
            threads: Some(threads),
            ..Self::default()
        }
    }
}

/// A catalog together with its design type.
pub type TypedCatalog = (TypeTag, Arc<Vec<Design>>);

/// Enumeration state for one run size: candidate sets, workers and the
/// per-signature stage cache.
#[derive(Debug)]
pub struct Enumerator {
    n: usize,
    candidates: CandidateSets,
    workers: Workers,
    chunk_size: usize,
    cache: Mutex<HashMap<Signature, Arc<Vec<Design>>>>,
}

impl Enumerator {
    pub fn new(n: usize, options: EnumerateOptions) -> Result<Self, SpecError> {
        let candidates = enumerate_candidates(n)?;
        let initial = initial_design(n)?;
        let mut cache = HashMap::new();
        cache.insert(Signature::initial(n), Arc::new(vec![initial]));
        Ok(Self {
            n,
            candidates,
            workers: Workers::new(options.parallelism, options.threads),
            chunk_size: options.chunk_size.max(1),
            cache: Mutex::new(cache),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn candidates(&self) -> &CandidateSets {
        &self.candidates
    }

    pub fn workers(&self) -> &Workers {
        &self.workers
    }

    /// All non-isomorphic designs with information matrix `K(N, p, s)` of
    /// the given type. Infeasible classes yield an empty catalog.
    pub fn enumerate_class(
        &self,
        p: usize,
        s: usize,
        tag: TypeTag,
    ) -> Result<Arc<Vec<Design>>, EnumerateError> {
        let spec = EhlichSpec::new(self.n, p, s)?;
        let steps = schedule(&spec, tag)?;
        // replay the labelled schedule to learn the size of each target group
        let mut labelled = vec![1usize, 1, 1];
        let mut sig = Signature::initial(self.n);
        let mut stage = self.cached(&sig).expect("initial stage is cached");
        for step in steps {
            let kind = if step.group == 1 {
                StepKind::GrowIntercept
            } else if step.group > labelled.len() {
                StepKind::NewGroup
            } else {
                StepKind::Grow(labelled[step.group - 1])
            };
            if step.group > labelled.len() {
                labelled.push(1);
            } else {
                labelled[step.group - 1] += 1;
            }
            let next_sig = sig.after(kind);
            stage = match self.cached(&next_sig) {
                Some(hit) => hit,
                None => {
                    let designs = Arc::new(self.extend_stage(&stage, kind));
                    self.cache
                        .lock()
                        .expect("stage cache poisoned")
                        .entry(next_sig.clone())
                        .or_insert(designs)
                        .clone()
                }
            };
            sig = next_sig;
        }
        Ok(stage)
    }

    /// Every type of `K(N, p, s)`: one catalog when `s | p`, two otherwise.
    pub fn enumerate_spec(&self, p: usize, s: usize) -> Result<Vec<TypedCatalog>, EnumerateError> {
        let spec = EhlichSpec::new(self.n, p, s)?;
        TypeTag::for_spec(&spec)
            .into_iter()
            .map(|tag| Ok((tag, self.enumerate_class(p, s, tag)?)))
            .collect()
    }

    /// Drops every cached stage except the initial design.
    pub fn clear_cache(&self) {
        let mut cache = self.cache.lock().expect("stage cache poisoned");
        cache.retain(|sig, _| *sig == Signature::initial(self.n));
    }

    fn cached(&self, sig: &Signature) -> Option<Arc<Vec<Design>>> {
        self.cache
            .lock()
            .expect("stage cache poisoned")
            .get(sig)
            .cloned()
    }

    fn extend_stage(&self, parents: &[Design], kind: StepKind) -> Vec<Design> {
        let store = DedupStore::new();
        for chunk in parents.chunks(self.chunk_size) {
            let batches = self
                .workers
                .map(chunk, |parent| self.children(parent, kind));
            for (key, child) in batches.into_iter().flatten() {
                store.test_and_insert(key, child);
            }
        }
        store.into_entries().into_iter().map(|(_, d)| d).collect()
    }

    /// Canonicalized children of one parent, first occurrence per key.
    fn children(&self, parent: &Design, kind: StepKind) -> Vec<(CanonicalKey, Design)> {
        let groups: Vec<u8> = match kind {
            StepKind::NewGroup => vec![parent.group_count() as u8 + 1],
            StepKind::GrowIntercept => vec![1],
            StepKind::Grow(m) => parent
                .group_sizes()
                .iter()
                .enumerate()
                .skip(1)
                .filter(|&(_, &size)| size == m)
                .map(|(i, _)| i as u8 + 1)
                .collect(),
        };
        let mut seen = HashSet::new();
        groups
            .into_iter()
            .flat_map(|g| extend_one(parent, g, &self.candidates))
            .filter_map(|child| {
                let key = canonicalize(&child);
                seen.insert(key.clone()).then_some((key, child))
            })
            .collect()
    }
}
