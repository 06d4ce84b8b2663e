use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use ehlich::catalog::{self, write_catalog, Cell};
use ehlich::enumerate::EnumerateOptions;
use ehlich::matrix::grid_csv;
use ehlich::par::{Parallelism, Workers};
use ehlich::{count_formulas, efficiency_grid, enumerate_candidates, Enumerator, TypeTag};

#[derive(Parser)]
#[command(
    name = "ehlich-enum",
    version,
    about = "Catalogs of D- and A-optimal two-level designs for N = 3 mod 4"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TypeArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// D- and A-efficiency of every K(N,p,s) as CSV.
    Tables {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pmax: usize,
    },
    /// Sizes of the candidate column sets and their closed forms.
    Candidates {
        #[arg(long)]
        n: usize,
    },
    /// Enumerate one or more cells and write them to a catalog directory.
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// Number of blocks; not needed with --all-s or --grid.
        #[arg(long, required_unless_present_any = ["all_s", "grid"])]
        s: Option<usize>,
        #[arg(long = "type", value_enum, default_value = "both")]
        type_: TypeArg,
        #[arg(long)]
        out: PathBuf,
        /// Every s from 3 to p.
        #[arg(long)]
        all_s: bool,
        /// Every cell with 4 <= p' <= p and 3 <= s <= p'.
        #[arg(long)]
        grid: bool,
    },
    /// Enumerate one form and report its minimally aliased design.
    Characterize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "catalogs")]
        out: PathBuf,
    },
    /// Counts, wall-time and minimum-C2 grids of a catalog as CSV.
    Grids {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "catalogs")]
        dir: PathBuf,
    },
    /// Re-check every catalog under a directory.
    Verify {
        #[arg(long, default_value = "catalogs")]
        dir: PathBuf,
    },
}

fn enumerator(n: usize) -> Result<Enumerator> {
    Ok(Enumerator::new(n, EnumerateOptions::default())?)
}

fn run_cells(
    e: &Enumerator,
    cells: &[(usize, usize)],
    tags: Option<&[TypeTag]>,
    out: &Path,
) -> Result<Vec<Cell>> {
    let grid = efficiency_grid(e.n(), e.n())?;
    let mut all = Vec::new();
    for &(p, s) in cells {
        let generated = catalog::generate(e, &grid, p, s, tags)
            .with_context(|| format!("enumerating K({},{p},{s})", e.n()))?;
        write_catalog(out, &generated)?;
        for c in &generated {
            println!(
                "{}\t{}\t{} designs\t{:.2}s",
                c.spec,
                out.join(c.spec.relative_path()).display(),
                c.entries.len(),
                c.seconds.unwrap_or(0.0)
            );
        }
        all.extend(generated);
    }
    Ok(all)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Tables { n, pmax } => {
            print!("{}", grid_csv(&efficiency_grid(n, pmax)?));
        }
        Command::Candidates { n } => {
            let sets = enumerate_candidates(n)?;
            let (f3, fm1, fs) = count_formulas(n)?;
            println!("zeta3\t{}", sets.zeta3_len);
            println!("zeta-1\t{}", sets.zeta_m1_len);
            println!("zeta3*\t{}", sets.zeta3_star.len());
            println!("zeta-1*\t{}", sets.zeta_m1_star_len());
            println!("zeta-1*(s)\t{}", sets.separate.len());
            println!("formula zeta3*\t{f3}");
            println!("formula zeta-1*\t{fm1}");
            println!("formula zeta-1*(s)\t{fs}");
        }
        Command::Run {
            n,
            p,
            s,
            type_,
            out,
            all_s,
            grid,
        } => {
            let tags: Option<&[TypeTag]> = match type_ {
                TypeArg::One => Some(&[TypeTag::Type1]),
                TypeArg::Two => Some(&[TypeTag::Type2]),
                TypeArg::Both => None,
            };
            let cells: Vec<(usize, usize)> = if grid {
                (4..=p).flat_map(|q| (3..=q).map(move |s| (q, s))).collect()
            } else if all_s {
                (3..=p).map(|s| (p, s)).collect()
            } else {
                vec![(p, s.expect("clap requires --s"))]
            };
            let e = enumerator(n)?;
            run_cells(&e, &cells, tags, &out)?;
        }
        Command::Characterize { n, p, s, out } => {
            let e = enumerator(n)?;
            let cells = run_cells(&e, &[(p, s)], None, &out)?;
            let count: usize = cells.iter().map(|c| c.entries.len()).sum();
            println!("count\t{count}");
            let head = cells.iter().filter_map(|c| c.head()).min_by(|a, b| {
                a.stats
                    .cmp_sequential(&b.stats)
                    .then_with(|| a.key.cmp(&b.key))
            });
            match head {
                Some(h) => {
                    println!("min C2\t{} ({})", h.stats.c2_display(), h.stats.c2);
                    println!(
                        "min C3 at min C2\t{} ({})",
                        h.stats.c3_display(),
                        h.stats.c3
                    );
                    println!(
                        "head\t{} (design 1)",
                        out.join(h.spec.relative_path()).display()
                    );
                }
                None => println!("no designs"),
            }
        }
        Command::Grids { n, dir } => {
            let grids = catalog::emit_grids(&dir, n)?;
            let target = dir.join(format!("N{n}"));
            if target.is_dir() {
                fs::write(target.join("counts.csv"), &grids.counts)?;
                fs::write(target.join("times.csv"), &grids.times)?;
                fs::write(target.join("min_c2.csv"), &grids.min_c2)?;
            }
            println!("# counts\n{}", grids.counts);
            println!("# seconds\n{}", grids.times);
            println!("# min C2\n{}", grids.min_c2);
        }
        Command::Verify { dir } => {
            if !dir.is_dir() {
                bail!("{} is not a directory", dir.display());
            }
            let workers = Workers::new(Parallelism::Parallel, ehlich::par::threads_from_env());
            let report = match catalog::verify(&dir, &workers) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("verify failed: {e}");
                    return Ok(ExitCode::from(2));
                }
            };
            for problem in &report.problems {
                eprintln!("{problem}");
            }
            println!("{} cells, {} designs checked", report.cells, report.designs);
            if !report.ok() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
