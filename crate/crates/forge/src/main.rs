use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use forge_core::canonical::canonical_code;
use forge_core::counting::{stage_plan_with, PlanConfig};
use forge_core::drawing::seed_k4;
use forge_core::extension::ExtendOptions;
use forge_core::format::write_drawing;
use forge_core::k12check::{check_base, K12Params, K12Report};
use forge_core::pipeline::{
    collect_stats, merge_outputs, read_drawing_file, run_stage_file, stats_table, verify_file, Mode, Shard,
    StageConfig,
};

const EXIT_INPUT: u8 = 1;
const EXIT_ARTIFACTS: u8 = 2;

#[derive(Parser)]
#[command(name = "forge", version, about = "Generate good drawings of complete graphs with few crossings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extend every drawing in a file by one vertex.
    Generate {
        #[arg(long)]
        from: PathBuf,
        /// Size of the output drawings.
        #[arg(long)]
        n: usize,
        /// Crossing budget; defaults to the stage plan for K13 with 217.
        #[arg(long)]
        max_cr: Option<usize>,
        #[arg(long, default_value = "alg1")]
        mode: Mode,
        #[arg(long, default_value = "0/1")]
        shard: Shard,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_parity: bool,
        #[arg(long)]
        no_distinct_faces: bool,
        /// Try every face instead of one per automorphism orbit.
        #[arg(long)]
        all_faces: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Combine shard outputs into one file.
    Merge {
        #[arg(long)]
        out: PathBuf,
        /// Keep duplicates (for representative-mode outputs).
        #[arg(long)]
        no_dedup: bool,
        parts: Vec<PathBuf>,
    },
    /// Look for heavy subdrawings in the final two stages.
    K12check {
        #[arg(long)]
        k10: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = K12Params::default().middle_budget)]
        middle_budget: usize,
        #[arg(long, default_value_t = K12Params::default().target)]
        target: usize,
        #[arg(long, default_value_t = K12Params::default().threshold)]
        threshold: usize,
        #[arg(long, default_value = "0/1")]
        shard: Shard,
        /// Visit every product and check the counting identity on each.
        #[arg(long)]
        audit: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check every drawing in a file.
    Verify { file: PathBuf },
    /// Print the canonical code of every drawing in a file.
    Canon { file: PathBuf },
    /// Tabulate the stats files found in run directories.
    Stats { dirs: Vec<PathBuf> },
    /// Print the crossing budgets of every stage.
    Plan {
        #[arg(long, default_value_t = 13)]
        target_n: usize,
        #[arg(long, default_value_t = 217)]
        target_cr: u64,
        #[arg(long)]
        no_parity: bool,
        /// Derive stage minima from counting alone.
        #[arg(long)]
        no_known_bounds: bool,
    },
    /// Write the planar K4 that every run starts from.
    Seed {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Generate {
            from,
            n,
            max_cr,
            mode,
            shard,
            out,
            no_parity,
            no_distinct_faces,
            all_faces,
            workers,
        } => {
            let max_cr = match max_cr {
                Some(c) => c,
                None => {
                    let plan = stage_plan_with(13, 217, PlanConfig::default())?;
                    let Some(st) = plan.stage(n) else {
                        bail!("no planned budget for K_{n}; pass --max-cr");
                    };
                    st.max_crossings as usize
                }
            };
            let cfg = StageConfig {
                n,
                max_cr,
                mode,
                shard,
                parity: !no_parity,
                extend: ExtendOptions {
                    distinct_faces: !no_distinct_faces,
                    face_orbits: !all_faces,
                },
                workers,
            };
            let res = run_stage_file(&from, &out, &cfg)?;
            print!("{}", res.stats.to_text());
            for e in &res.input_errors {
                eprintln!("skipped {e}");
            }
            if !res.errors.is_empty() {
                eprintln!("{} entangled class products recorded", res.errors.len());
            }
            Ok(if !res.input_errors.is_empty() {
                EXIT_INPUT
            } else if !res.errors.is_empty() {
                EXIT_ARTIFACTS
            } else {
                0
            })
        }
        Command::Merge { out, no_dedup, parts } => {
            let st = merge_outputs(&parts, &out, !no_dedup)?;
            print!("{}", st.to_text());
            Ok(0)
        }
        Command::K12check {
            k10,
            report,
            middle_budget,
            target,
            threshold,
            shard,
            audit,
            workers,
        } => {
            let params = K12Params {
                middle_budget,
                target,
                threshold,
            };
            let (bases, bad) = read_drawing_file(&k10)?;
            for b in &bad {
                eprintln!("skipped {b}");
            }
            let mine: Vec<_> = bases
                .iter()
                .enumerate()
                .filter(|(j, _)| shard.contains(*j))
                .map(|(_, d)| d)
                .collect();
            let total = Mutex::new(K12Report::default());
            let work = || {
                use rayon::prelude::*;
                mine.par_iter().try_for_each(|d| {
                    let r = check_base(d, params, ExtendOptions::default(), audit)?;
                    total.lock().unwrap().merge(r);
                    Ok::<(), forge_core::error::ExtendError>(())
                })
            };
            match workers {
                Some(w) => rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build()?.install(work)?,
                None => work()?,
            }
            let mut total = total.into_inner().unwrap();
            total.verdicts.sort_by(|a, b| (&a.middle, a.face).cmp(&(&b.middle, b.face)));
            let text = total.to_text();
            match report {
                Some(path) => fs::write(&path, &text).with_context(|| path.display().to_string())?,
                None => print!("{text}"),
            }
            if total.clean() {
                println!(
                    "no vertex deletion reaches {threshold} in any {target}-crossing extension of {} base drawings",
                    total.bases
                );
            } else {
                println!(
                    "artifacts: {} hits, {} anomalies, {} entangled products",
                    total.hits.len(),
                    total.anomalies,
                    total.errors.len()
                );
            }
            Ok(if !bad.is_empty() {
                EXIT_INPUT
            } else if total.clean() {
                0
            } else {
                EXIT_ARTIFACTS
            })
        }
        Command::Verify { file } => {
            let report = verify_file(&file)?;
            print!("{}", report.to_text());
            Ok(if report.ok() { 0 } else { EXIT_INPUT })
        }
        Command::Canon { file } => {
            let (ds, bad) = read_drawing_file(&file)?;
            for (i, d) in ds.iter().enumerate() {
                let c = canonical_code(d);
                println!("{i} {} {}", c.hash_hex(), c.to_hex());
            }
            for b in &bad {
                eprintln!("skipped {b}");
            }
            Ok(if bad.is_empty() { 0 } else { EXIT_INPUT })
        }
        Command::Stats { dirs } => {
            print!("{}", stats_table(&collect_stats(&dirs)?));
            Ok(0)
        }
        Command::Plan {
            target_n,
            target_cr,
            no_parity,
            no_known_bounds,
        } => {
            let plan = stage_plan_with(
                target_n,
                target_cr,
                PlanConfig {
                    parity: !no_parity,
                    known_bounds: !no_known_bounds,
                },
            )?;
            print!("{}", plan.to_table());
            Ok(0)
        }
        Command::Seed { out } => {
            fs::write(&out, write_drawing(&seed_k4())).with_context(|| out.display().to_string())?;
            Ok(0)
        }
    }
}
