//! On-disk catalogs.
//!
//! A catalog directory holds one subdirectory per run size, `N<K>/`, with a
//! `p<P>_s<S>_t<T>.designs` file per enumerated cell and an `index.json`
//! summarising every cell of that run size. A `.designs` file starts with a
//! header line `N p s type count`; each design follows as a blank line and
//! `N` lines of `p` characters from `{+,-}`, intercept first. Designs are
//! stored as sign-adjusted canonical representatives (see
//! [`stored_design`]), sorted by `(C2, C3, key)`, so the
//! first design of a file is the minimally aliased one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aberration::{rank_catalog, AberrationError, AliasStats};
use crate::canon::{canonicalize, CanonicalKey, KEY_FORMAT_VERSION};
use crate::column::SignColumn;
use crate::design::{check_ehlich_form, Design, FormMismatch, TypeTag};
use crate::enumerate::{EnumerateError, Enumerator};
use crate::exact::format_fixed;
use crate::matrix::{efficiency_grid, EfficiencyGrid, EhlichSpec, SpecError};
use crate::par::Workers;

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: character {ch:?} is not + or -")]
    BadChar {
        path: PathBuf,
        line: usize,
        ch: char,
    },
    #[error("{path}: design {design}: Gram entry at row {row}, column {col} is {value}, not of Ehlich form")]
    Gram {
        path: PathBuf,
        design: usize,
        row: usize,
        col: usize,
        value: i64,
    },
    #[error("{path}: design {design}: {source}")]
    Form {
        path: PathBuf,
        design: usize,
        #[source]
        source: FormMismatch,
    },
    #[error("{path}: design {design} has form {found}, file is for {expected}")]
    SpecMismatch {
        path: PathBuf,
        design: usize,
        expected: CellSpec,
        found: CellSpec,
    },
    #[error("{path}: design {design} is not stored in canonical form")]
    NotCanonical { path: PathBuf, design: usize },
    #[error("{path}: design {design} repeats an earlier design")]
    Duplicate { path: PathBuf, design: usize },
    #[error("{path}: checksum {found} does not match index entry {expected}")]
    Checksum {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: {reason}")]
    Index { path: PathBuf, reason: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error(transparent)]
    Aberration(#[from] AberrationError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// `(N, p, s, type)` of a catalog cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellSpec {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub tag: TypeTag,
}

impl CellSpec {
    pub fn new(n: usize, p: usize, s: usize, tag: TypeTag) -> Self {
        Self { n, p, s, tag }
    }

    pub fn file_name(&self) -> String {
        format!("p{}_s{}_t{}.designs", self.p, self.s, self.tag.code())
    }

    /// `N<K>/p<P>_s<S>_t<T>.designs` relative to the catalog root.
    pub fn relative_path(&self) -> PathBuf {
        Path::new(&run_dir_name(self.n)).join(self.file_name())
    }

    fn parse_file_name(n: usize, name: &str) -> Option<Self> {
        let stem = name.strip_suffix(".designs")?;
        let mut parts = stem.split('_');
        let p = parts.next()?.strip_prefix('p')?.parse().ok()?;
        let s = parts.next()?.strip_prefix('s')?.parse().ok()?;
        let t = parts.next()?.strip_prefix('t')?.parse().ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Self::new(n, p, s, TypeTag::from_code(t)?))
    }
}

impl std::fmt::Display for CellSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "K({},{},{}) {}", self.n, self.p, self.s, self.tag)
    }
}

fn run_dir_name(n: usize) -> String {
    format!("N{n}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OptimalityFlags {
    pub d_optimal: bool,
    pub a_optimal: bool,
}

impl OptimalityFlags {
    pub fn from_grid(grid: &EfficiencyGrid, p: usize, s: usize) -> Self {
        Self {
            d_optimal: grid.is_d_optimal(p, s),
            a_optimal: grid.is_a_optimal(p, s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub spec: CellSpec,
    pub key: CanonicalKey,
    /// The canonical representative of the class.
    pub design: Design,
    pub stats: AliasStats,
    pub flags: OptimalityFlags,
}

/// The stored form of a class: the canonical representative with every
/// factor column signed so that its sum is 3 or -1. Column sums are odd, so
/// the choice is unique and the Gram matrix is of Ehlich form again.
pub fn stored_design(key: &CanonicalKey) -> Design {
    let rep = key.decode();
    let columns = rep
        .columns()
        .iter()
        .map(|&c| {
            if c.sum() == 3 || c.sum() == -1 || c.sum() == c.len() as i32 {
                c
            } else {
                c.negate()
            }
        })
        .collect();
    Design::from_columns(columns)
}

/// One enumerated cell: its designs in rank order and, when known, the wall
/// time spent enumerating it.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub spec: CellSpec,
    pub entries: Vec<CatalogEntry>,
    pub seconds: Option<f64>,
    pub flags: OptimalityFlags,
}

impl Cell {
    /// Canonicalizes and ranks `designs`.
    pub fn build(
        spec: CellSpec,
        designs: &[Design],
        flags: OptimalityFlags,
        seconds: Option<f64>,
        workers: &Workers,
    ) -> Result<Self, CatalogError> {
        let ranked = rank_catalog(designs, workers)?;
        let entries = ranked
            .into_iter()
            .map(|r| CatalogEntry {
                spec,
                design: stored_design(&r.key),
                key: r.key,
                stats: r.stats,
                flags,
            })
            .collect();
        Ok(Self {
            spec,
            entries,
            seconds,
            flags,
        })
    }

    /// The minimally aliased entry.
    pub fn head(&self) -> Option<&CatalogEntry> {
        self.entries.first()
    }

    fn render(&self) -> String {
        let sp = &self.spec;
        let mut out = format!(
            "{} {} {} {} {}\n",
            sp.n,
            sp.p,
            sp.s,
            sp.tag.code(),
            self.entries.len()
        );
        for e in &self.entries {
            out.push('\n');
            for line in e.design.to_lines() {
                out.push_str(&line);
                out.push('\n');
            }
        }
        out
    }
}

/// Per-cell summary stored in `index.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCell {
    pub p: usize,
    pub s: usize,
    #[serde(rename = "type")]
    pub type_code: u8,
    pub file: String,
    pub count: usize,
    /// Exact rational, `num/den`.
    pub min_c2: Option<String>,
    pub min_c2_display: Option<String>,
    pub min_c3_at_min_c2: Option<String>,
    pub d_optimal: bool,
    pub a_optimal: bool,
    pub sha256: String,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    pub engine_version: String,
    pub key_format_version: u8,
    pub n: usize,
    pub cells: Vec<IndexCell>,
}

impl Index {
    fn empty(n: usize) -> Self {
        Self {
            engine_version: ENGINE_VERSION.to_string(),
            key_format_version: KEY_FORMAT_VERSION,
            n,
            cells: Vec::new(),
        }
    }

    fn find(&self, spec: &CellSpec) -> Option<&IndexCell> {
        self.cells
            .iter()
            .find(|c| c.p == spec.p && c.s == spec.s && c.type_code == spec.tag.code())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CatalogError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Reads `N<K>/index.json`, if present.
pub fn read_index(root: &Path, n: usize) -> Result<Option<Index>, CatalogError> {
    let path = root.join(run_dir_name(n)).join(INDEX_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err(&path)(e)),
    };
    let index: Index = serde_json::from_str(&text).map_err(|e| CatalogError::Index {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    if index.n != n {
        return Err(CatalogError::Index {
            path,
            reason: format!("index is for N={}, directory for N={n}", index.n),
        });
    }
    Ok(Some(index))
}

/// Writes the cells and merges them into each run size's `index.json`.
/// Cells already indexed are replaced.
pub fn write_catalog(root: &Path, cells: &[Cell]) -> Result<Vec<PathBuf>, CatalogError> {
    let mut by_n: BTreeMap<usize, Vec<&Cell>> = BTreeMap::new();
    for cell in cells {
        by_n.entry(cell.spec.n).or_default().push(cell);
    }
    let mut written = Vec::new();
    for (n, cells) in by_n {
        let dir = root.join(run_dir_name(n));
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let mut index = read_index(root, n)?.unwrap_or_else(|| Index::empty(n));
        index.engine_version = ENGINE_VERSION.to_string();
        index.key_format_version = KEY_FORMAT_VERSION;
        for cell in cells {
            let text = cell.render();
            let path = dir.join(cell.spec.file_name());
            write_atomic(&path, text.as_bytes())?;
            let head = cell.head();
            let summary = IndexCell {
                p: cell.spec.p,
                s: cell.spec.s,
                type_code: cell.spec.tag.code(),
                file: cell.spec.file_name(),
                count: cell.entries.len(),
                min_c2: head.map(|h| h.stats.c2.to_string()),
                min_c2_display: head.map(|h| h.stats.c2_display()),
                min_c3_at_min_c2: head.map(|h| h.stats.c3.to_string()),
                d_optimal: cell.flags.d_optimal,
                a_optimal: cell.flags.a_optimal,
                sha256: sha256_hex(text.as_bytes()),
                seconds: cell.seconds,
            };
            index.cells.retain(|c| {
                !(c.p == summary.p && c.s == summary.s && c.type_code == summary.type_code)
            });
            index.cells.push(summary);
            written.push(path);
        }
        index.cells.sort_by_key(|c| (c.p, c.s, c.type_code));
        let json = serde_json::to_string_pretty(&index).expect("index serializes");
        write_atomic(&dir.join(INDEX_FILE), json.as_bytes())?;
    }
    Ok(written)
}

/// Parses the raw sign matrices of a `.designs` file without validating
/// their Gram matrices.
fn parse_designs(path: &Path, text: &str) -> Result<(CellSpec, Vec<Design>), CatalogError> {
    let malformed = |line: usize, reason: String| CatalogError::Malformed {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| malformed(1, "empty file".into()))?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|f| f.parse())
        .collect::<Result<_, _>>()
        .map_err(|_| malformed(1, format!("bad header {header:?}")))?;
    let [n, p, s, t, count] = fields[..] else {
        return Err(malformed(1, format!("header needs 5 fields: {header:?}")));
    };
    let tag = u8::try_from(t)
        .ok()
        .and_then(TypeTag::from_code)
        .ok_or_else(|| malformed(1, format!("unknown type {t}")))?;
    let spec = CellSpec::new(n, p, s, tag);
    if n == 0 || n > crate::column::MAX_RUNS || p == 0 {
        return Err(malformed(1, format!("unsupported size {n}x{p}")));
    }
    let mut designs = Vec::with_capacity(count);
    for _ in 0..count {
        match lines.next() {
            Some((_, "")) => {}
            Some((no, l)) => {
                return Err(malformed(no, format!("expected blank line, found {l:?}")))
            }
            None => {
                return Err(malformed(
                    0,
                    format!("{} of {count} designs present", designs.len()),
                ))
            }
        }
        let mut cols = vec![0u64; p];
        for row in 0..n {
            let (no, l) = lines
                .next()
                .ok_or_else(|| malformed(0, "truncated design".into()))?;
            if l.chars().count() != p {
                return Err(malformed(
                    no,
                    format!("expected {p} characters, found {}", l.chars().count()),
                ));
            }
            for (j, ch) in l.chars().enumerate() {
                match ch {
                    '+' => cols[j] |= 1 << (n - 1 - row),
                    '-' => {}
                    _ => {
                        return Err(CatalogError::BadChar {
                            path: path.to_path_buf(),
                            line: no,
                            ch,
                        })
                    }
                }
            }
        }
        let columns = cols
            .into_iter()
            .map(|b| SignColumn::from_bits(n, b))
            .collect();
        designs.push(Design::from_columns(columns));
    }
    if let Some((no, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(malformed(no, format!("trailing content {l:?}")));
    }
    Ok((spec, designs))
}

/// Reads, validates and re-ranks one `.designs` file. The Gram matrix of
/// every design is checked before the file checksum, so a corrupted cell is
/// reported by position.
pub fn read_cell(
    path: &Path,
    index: Option<&Index>,
    grid: &EfficiencyGrid,
    workers: &Workers,
) -> Result<Cell, CatalogError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let (spec, designs) = parse_designs(path, &text)?;
    let named = path
        .file_name()
        .and_then(|f| f.to_str())
        .and_then(|f| CellSpec::parse_file_name(spec.n, f));
    if named != Some(spec) {
        return Err(CatalogError::Malformed {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("header {spec} does not match the file name"),
        });
    }
    for (i, d) in designs.iter().enumerate() {
        let design = i + 1;
        let form = check_ehlich_form(d).map_err(|source| match source {
            FormMismatch::Entry { row, col, value } => CatalogError::Gram {
                path: path.to_path_buf(),
                design,
                row,
                col,
                value,
            },
            FormMismatch::NotClique { row, col } => CatalogError::Gram {
                path: path.to_path_buf(),
                design,
                row,
                col,
                value: -1,
            },
            source => CatalogError::Form {
                path: path.to_path_buf(),
                design,
                source,
            },
        })?;
        let found = CellSpec::new(form.spec.n, form.spec.p, form.spec.s, form.type_tag);
        if found != spec {
            return Err(CatalogError::SpecMismatch {
                path: path.to_path_buf(),
                design,
                expected: spec,
                found,
            });
        }
    }
    let summary = index.and_then(|ix| ix.find(&spec));
    if let Some(summary) = summary {
        let found = sha256_hex(text.as_bytes());
        if found != summary.sha256 {
            return Err(CatalogError::Checksum {
                path: path.to_path_buf(),
                expected: summary.sha256.clone(),
                found,
            });
        }
    }
    let flags = if spec.p <= grid.n && spec.p >= 4 {
        OptimalityFlags::from_grid(grid, spec.p, spec.s)
    } else {
        OptimalityFlags::default()
    };
    let cell = Cell::build(
        spec,
        &designs,
        flags,
        summary.and_then(|s| s.seconds),
        workers,
    )?;
    let mut keys = BTreeSet::new();
    for (i, d) in designs.iter().enumerate() {
        let key = canonicalize(d);
        if stored_design(&key) != *d {
            return Err(CatalogError::NotCanonical {
                path: path.to_path_buf(),
                design: i + 1,
            });
        }
        if !keys.insert(key) {
            return Err(CatalogError::Duplicate {
                path: path.to_path_buf(),
                design: i + 1,
            });
        }
    }
    // stored order is rank order
    if cell.entries.iter().map(|e| &e.design).ne(designs.iter()) {
        return Err(CatalogError::Malformed {
            path: path.to_path_buf(),
            line: 1,
            reason: "designs are not in (C2, C3, key) order".into(),
        });
    }
    Ok(cell)
}

fn run_sizes(root: &Path) -> Result<Vec<usize>, CatalogError> {
    let mut sizes = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        let name = entry.file_name();
        if let Some(n) = name
            .to_str()
            .and_then(|s| s.strip_prefix('N'))
            .and_then(|s| s.parse::<usize>().ok())
        {
            if entry.path().is_dir() {
                sizes.push(n);
            }
        }
    }
    sizes.sort_unstable();
    Ok(sizes)
}

fn cell_files(dir: &Path) -> Result<Vec<PathBuf>, CatalogError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "designs") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Every cell under `root`, sorted by `(N, p, s, type)`.
pub fn read_catalog(root: &Path, workers: &Workers) -> Result<Vec<Cell>, CatalogError> {
    let mut cells = Vec::new();
    for n in run_sizes(root)? {
        let index = read_index(root, n)?;
        let grid = efficiency_grid(n, n)?;
        for path in cell_files(&root.join(run_dir_name(n)))? {
            cells.push(read_cell(&path, index.as_ref(), &grid, workers)?);
        }
    }
    cells.sort_by_key(|c| c.spec);
    Ok(cells)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub cells: usize,
    pub designs: usize,
    pub problems: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Re-checks every cell under `root`: file format, Gram matrices, canonical
/// storage, checksums, index counts and the disjointness of the type-1 and
/// type-2 catalogs of each form.
pub fn verify(root: &Path, workers: &Workers) -> Result<VerifyReport, CatalogError> {
    let mut report = VerifyReport::default();
    for n in run_sizes(root)? {
        let dir = root.join(run_dir_name(n));
        let index = match read_index(root, n) {
            Ok(ix) => ix,
            Err(e) => {
                report.problems.push(e.to_string());
                None
            }
        };
        if index.is_none() {
            report
                .problems
                .push(format!("{}: missing {INDEX_FILE}", dir.display()));
        }
        let grid = efficiency_grid(n, n)?;
        let mut keys_by_form: BTreeMap<(usize, usize), BTreeSet<CanonicalKey>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for path in cell_files(&dir)? {
            let cell = match read_cell(&path, index.as_ref(), &grid, workers) {
                Ok(c) => c,
                Err(e) => {
                    report.problems.push(e.to_string());
                    continue;
                }
            };
            report.cells += 1;
            report.designs += cell.entries.len();
            seen.insert(cell.spec);
            match index.as_ref().and_then(|ix| ix.find(&cell.spec)) {
                Some(summary) if summary.count != cell.entries.len() => {
                    report.problems.push(format!(
                        "{}: index count {} but {} designs on disk",
                        path.display(),
                        summary.count,
                        cell.entries.len()
                    ))
                }
                Some(summary) if summary.min_c2 != cell.head().map(|h| h.stats.c2.to_string()) => {
                    report.problems.push(format!(
                        "{}: index min C2 disagrees with the designs",
                        path.display()
                    ))
                }
                Some(_) => {}
                None if index.is_some() => report
                    .problems
                    .push(format!("{}: not listed in {INDEX_FILE}", path.display())),
                None => {}
            }
            let keys = keys_by_form.entry((cell.spec.p, cell.spec.s)).or_default();
            for (i, e) in cell.entries.iter().enumerate() {
                if !keys.insert(e.key.clone()) {
                    report.problems.push(format!(
                        "{}: design {} also appears in another type of {}",
                        path.display(),
                        i + 1,
                        cell.spec
                    ));
                }
            }
        }
        if let Some(ix) = &index {
            for c in &ix.cells {
                let tag = TypeTag::from_code(c.type_code);
                if tag.is_none_or(|t| !seen.contains(&CellSpec::new(n, c.p, c.s, t))) {
                    report.problems.push(format!(
                        "{}: indexed cell {} has no readable file",
                        dir.display(),
                        c.file
                    ));
                }
            }
        }
    }
    Ok(report)
}

/// Enumerates and ranks every type of `K(N, p, s)` in `tags` (all types when
/// `None`), timing each cell.
pub fn generate(
    enumerator: &Enumerator,
    grid: &EfficiencyGrid,
    p: usize,
    s: usize,
    tags: Option<&[TypeTag]>,
) -> Result<Vec<Cell>, CatalogError> {
    let n = enumerator.n();
    let spec = EhlichSpec::new(n, p, s)?;
    let mut cells = Vec::new();
    for tag in TypeTag::for_spec(&spec) {
        if tags.is_some_and(|t| !t.contains(&tag) && tag != TypeTag::Pure) {
            continue;
        }
        let start = Instant::now();
        let designs = enumerator.enumerate_class(p, s, tag)?;
        let seconds = start.elapsed().as_secs_f64();
        let flags = if p >= 4 && p <= grid.n {
            OptimalityFlags::from_grid(grid, p, s)
        } else {
            OptimalityFlags::default()
        };
        cells.push(Cell::build(
            CellSpec::new(n, p, s, tag),
            &designs,
            flags,
            Some(seconds),
            enumerator.workers(),
        )?);
    }
    Ok(cells)
}

/// Counts, wall-time and minimum-`C2` tables in `s × p` orientation (rows
/// by descending `s`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grids {
    pub counts: String,
    pub times: String,
    pub min_c2: String,
}

#[derive(Default)]
struct GridCell {
    count: usize,
    seconds: Option<f64>,
    min_c2: Option<num_rational::BigRational>,
}

/// Builds the three grids for run size `n` from the files on disk. Counts
/// are taken from the `.designs` files; cells that were enumerated but have
/// no designs show `0` in the counts grid and `-` elsewhere, and cells never
/// enumerated are left blank.
pub fn emit_grids(root: &Path, n: usize) -> Result<Grids, CatalogError> {
    let index = read_index(root, n)?;
    let dir = root.join(run_dir_name(n));
    let mut cells: BTreeMap<(usize, usize), GridCell> = BTreeMap::new();
    if dir.is_dir() {
        for path in cell_files(&dir)? {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let (spec, designs) = parse_designs(&path, &text)?;
            let cell = cells.entry((spec.p, spec.s)).or_default();
            cell.count += designs.len();
            if let Some(summary) = index.as_ref().and_then(|ix| ix.find(&spec)) {
                if let Some(t) = summary.seconds {
                    *cell.seconds.get_or_insert(0.0) += t;
                }
                if let Some(c2) = summary.min_c2.as_ref().and_then(|v| v.parse().ok()) {
                    if cell.min_c2.as_ref().is_none_or(|m| &c2 < m) {
                        cell.min_c2 = Some(c2);
                    }
                }
            }
        }
    }
    let p_lo = cells.keys().map(|k| k.0).min().unwrap_or(4).min(4);
    let p_hi = cells.keys().map(|k| k.0).max().unwrap_or(n).max(n);
    let s_lo = cells.keys().map(|k| k.1).min().unwrap_or(3).min(3);
    let table = |show: &dyn Fn(&GridCell) -> String| {
        let mut out = String::from("s\\p");
        for p in p_lo..=p_hi {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
        for s in (s_lo..=p_hi).rev() {
            let _ = write!(out, "{s}");
            for p in p_lo..=p_hi {
                out.push(',');
                if let Some(c) = cells.get(&(p, s)) {
                    out.push_str(&show(c));
                }
            }
            out.push('\n');
        }
        out
    };
    Ok(Grids {
        counts: table(&|c| c.count.to_string()),
        times: table(&|c| match c.seconds {
            Some(t) if c.count > 0 => format!("{t:.2}"),
            _ => "-".into(),
        }),
        min_c2: table(&|c| match &c.min_c2 {
            Some(v) if c.count > 0 => format_fixed(v, 2),
            _ => "-".into(),
        }),
    })
}
