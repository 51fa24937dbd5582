//! ergolab: exact wandering rates, ergodicity certificates, Rokhlin towers,
//! and continuity probes for concrete measure-preserving systems.

mod lex;
mod plan;
mod report;
mod setexpr;
mod sysspec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use ergolab_core::phi::Budgets;
use ergolab_core::System;

use plan::{Runner, TaskSpec};
use report::Format;

#[derive(Parser)]
#[command(
    name = "ergolab",
    version,
    about = "Exact wandering rates and continuity probes on concrete measure-preserving systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Path to a system spec file (kind=odometer base=2, ...).
    #[arg(long)]
    system: PathBuf,
    /// Report format: csv, json, or markdown.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write the report here instead of stdout (atomic).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Saturation step budget.
    #[arg(long)]
    m_max: Option<u64>,
    /// Largest power explored by phi*.
    #[arg(long)]
    exponent_budget: Option<u64>,
    /// Root seed for randomized tasks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add truncated decimal columns with this many digits.
    #[arg(long)]
    decimals: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// The limit of the wandering rate, with certificate.
    Phi {
        #[command(flatten)]
        common: Common,
        /// Set expression, e.g. 'cyl("01") | cyl("10")'.
        #[arg(long)]
        set: String,
    },
    /// Exact phi^(m) rows for a list of m values.
    Phitable {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
        /// Comma-separated m values, ranges allowed: 0,1,2 or 0..8.
        #[arg(long)]
        m: String,
    },
    /// The infimum of phi over powers, with power profile.
    Phistar {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
    },
    /// Seeded continuity probe around a point.
    Probe {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
        /// Comma-separated radii, e.g. 1/4,1/16,1/256.
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 16)]
        samples: u32,
    },
    /// Constructive discontinuity witness at a point with phi < 1.
    Witness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
        /// Tower eps in (0, 1/2]; the jump guarantee is (1-eps)*mu(gap).
        #[arg(long, default_value = "1/2")]
        eps: String,
        /// Tower height; the witness distance is at most mu(gap)/n0.
        #[arg(long, default_value_t = 32)]
        n0: u64,
    },
    /// Rokhlin tower inside an invariant region.
    Tower {
        #[command(flatten)]
        common: Common,
        /// Region expression (default: full).
        #[arg(long)]
        region: Option<String>,
        #[arg(long)]
        n0: u64,
        #[arg(long)]
        eps: String,
    },
    /// phi*-discontinuity witness over listed exponents.
    PhistarWitness {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        set: String,
        #[arg(long)]
        delta: String,
        /// Comma-separated exponents, e.g. 2,4,8.
        #[arg(long)]
        exponents: String,
    },
    /// Invariant partition with ergodic restrictions.
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Run a named check suite (see `check list`).
    Check {
        /// Suite name: lipschitz, ergodicity, tm1-witness, tm1-null,
        /// periodic, tm2-suite, tower, oracle, totally-ergodic, tm1-suite,
        /// all — or `list`.
        suite: String,
    },
    /// Execute a JSON experiment plan, one report file per task.
    Run {
        plan: PathBuf,
        /// Output directory for the per-task reports.
        #[arg(long, default_value = "ergolab-out")]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Parse and usage problems exit 2; runtime failures exit 1.
            let rendered = format!("{err:#}");
            if err.downcast_ref::<lex::ParseError>().is_some()
                || rendered.contains("expression:")
                || rendered.contains("system spec:")
                || rendered.contains("parsing plan")
                || rendered.contains("unknown check suite")
            {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn load_system(path: &PathBuf) -> anyhow::Result<System> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading system spec {}", path.display()))?;
    sysspec::parse_system_spec(&text).map_err(|e| anyhow::Error::new(e).context("system spec"))
}

fn runner_for(common: &Common) -> anyhow::Result<(Runner, Format)> {
    let system = load_system(&common.system)?;
    let format: Format = common.format.parse()?;
    Ok((
        Runner {
            system: Some(system),
            budgets: Budgets {
                m_max: common.m_max.unwrap_or(Budgets::default().m_max),
                exponent_budget: common
                    .exponent_budget
                    .unwrap_or(Budgets::default().exponent_budget),
            },
            seed: common.seed,
            decimals: common.decimals,
        },
        format,
    ))
}

fn emit(common: &Common, format: Format, report: report::Report) -> anyhow::Result<ExitCode> {
    let rendered = report.render(format)?;
    match &common.out {
        Some(path) => report::write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// "0,1,2" or "0..8" (inclusive) or mixtures of both.
fn parse_m_list(text: &str) -> anyhow::Result<Vec<u64>> {
    let mut out = Vec::new();
    for piece in text.split(',') {
        let piece = piece.trim();
        if let Some((lo, hi)) = piece.split_once("..") {
            let lo: u64 = lo.trim().parse().context("m range start")?;
            let hi: u64 = hi.trim().parse().context("m range end")?;
            out.extend(lo..=hi);
        } else if !piece.is_empty() {
            out.push(piece.parse().context("m value")?);
        }
    }
    if out.is_empty() {
        anyhow::bail!("empty m list");
    }
    Ok(out)
}

fn parse_u64_list(text: &str) -> anyhow::Result<Vec<u64>> {
    parse_m_list(text)
}

fn run_simple(common: Common, task: TaskSpec) -> anyhow::Result<ExitCode> {
    let (runner, format) = runner_for(&common)?;
    let (report, _) = runner.run_task(&task)?;
    emit(&common, format, report)
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Phi { common, set } => run_simple(common, TaskSpec::Phi { set }),
        Command::Phitable { common, set, m } => {
            let m = parse_m_list(&m)?;
            run_simple(common, TaskSpec::PhiTable { set, m })
        }
        Command::Phistar { common, set } => run_simple(common, TaskSpec::PhiStar { set }),
        Command::Probe {
            common,
            set,
            radii,
            samples,
        } => {
            let radii: Vec<String> = radii.split(',').map(|s| s.trim().to_string()).collect();
            let seed = common.seed;
            run_simple(
                common,
                TaskSpec::Probe {
                    set,
                    radii,
                    samples: Some(samples),
                    seed: Some(seed),
                },
            )
        }
        Command::Witness {
            common,
            set,
            eps,
            n0,
        } => run_simple(
            common,
            TaskSpec::Witness {
                set,
                eps: Some(eps),
                n0: Some(n0),
            },
        ),
        Command::Tower {
            common,
            region,
            n0,
            eps,
        } => run_simple(common, TaskSpec::Tower { region, n0, eps }),
        Command::PhistarWitness {
            common,
            set,
            delta,
            exponents,
        } => {
            let exponents = parse_u64_list(&exponents)?;
            run_simple(
                common,
                TaskSpec::PhiStarWitness {
                    set,
                    delta,
                    exponents,
                },
            )
        }
        Command::Decompose { common } => run_simple(common, TaskSpec::Decompose {}),
        Command::Check { suite } => {
            if suite == "list" {
                for name in ergolab_core::checks::SUITE_NAMES {
                    println!("{name}");
                }
                println!("tm1-suite");
                println!("all");
                return Ok(ExitCode::SUCCESS);
            }
            let outcomes = ergolab_core::checks::run_suite(&suite)?;
            let mut failed = false;
            for o in &outcomes {
                println!("{}", o.line());
                failed |= !o.passed;
            }
            Ok(if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Run { plan, out_dir } => {
            let (plan, system) = plan::load_plan(&plan)?;
            let code = plan::run_plan(&plan, system, &out_dir)?;
            Ok(ExitCode::from(code as u8))
        }
    }
}
