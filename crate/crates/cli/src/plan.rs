//! Experiment plans: a JSON task list over one system, executed in order
//! with deterministic outputs.

use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use ergolab_core::checks;
use ergolab_core::phi::{self, Budgets};
use ergolab_core::probes;
use ergolab_core::{Scalar, SetClass, System};

use crate::report::{Format, Provenance, Report, ReportRow};
use crate::setexpr::parse_set_expr;
use crate::sysspec::parse_system_spec;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    /// Path to a system spec file, relative to the plan file.
    #[serde(default)]
    pub system: Option<String>,
    /// Inline system spec text (alternative to `system`).
    #[serde(default)]
    pub system_text: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub m_max: Option<u64>,
    #[serde(default)]
    pub exponent_budget: Option<u64>,
    #[serde(default)]
    pub decimals: Option<u32>,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Phi {
        set: String,
    },
    PhiTable {
        set: String,
        m: Vec<u64>,
    },
    #[serde(rename = "phistar")]
    PhiStar {
        set: String,
    },
    Probe {
        set: String,
        radii: Vec<String>,
        #[serde(default)]
        samples: Option<u32>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Witness {
        set: String,
        #[serde(default)]
        eps: Option<String>,
        #[serde(default)]
        n0: Option<u64>,
    },
    #[serde(rename = "phistar-witness")]
    PhiStarWitness {
        set: String,
        delta: String,
        exponents: Vec<u64>,
    },
    Tower {
        #[serde(default)]
        region: Option<String>,
        n0: u64,
        eps: String,
    },
    Decompose {},
    Check {
        suite: String,
    },
}

impl TaskSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TaskSpec::Phi { .. } => "phi",
            TaskSpec::PhiTable { .. } => "phi-table",
            TaskSpec::PhiStar { .. } => "phistar",
            TaskSpec::Probe { .. } => "probe",
            TaskSpec::Witness { .. } => "witness",
            TaskSpec::PhiStarWitness { .. } => "phistar-witness",
            TaskSpec::Tower { .. } => "tower",
            TaskSpec::Decompose {} => "decompose",
            TaskSpec::Check { .. } => "check",
        }
    }
}

/// Execution context shared by the subcommands and the plan runner.
pub struct Runner {
    pub system: Option<System>,
    pub budgets: Budgets,
    pub seed: u64,
    pub decimals: Option<u32>,
}

impl Runner {
    fn system(&self) -> anyhow::Result<&System> {
        self.system
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("this task needs a system (--system or plan.system)"))
    }

    fn set(&self, expr: &str) -> anyhow::Result<SetClass> {
        let space = self.system()?.space();
        parse_set_expr(expr, &space).map_err(|e| anyhow::anyhow!("set expression: {e}"))
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(self.seed, self.budgets.m_max, self.budgets.exponent_budget)
    }

    /// Runs one task; the bool is true when a check suite found violations.
    pub fn run_task(&self, task: &TaskSpec) -> anyhow::Result<(Report, bool)> {
        let mut report = Report::new(self.provenance());
        if let Some(system) = &self.system {
            report
                .notes
                .push(format!("system: {}", crate::sysspec::to_spec_text(system)));
        }
        let mut violation = false;
        match task {
            TaskSpec::Phi { set } => {
                let t = self.system()?;
                let a = self.set(set)?;
                let r = phi::phi(t, &a, self.budgets.m_max)?;
                report
                    .rows
                    .push(ReportRow::new("phi", set.clone()).phi(&r, self.decimals));
            }
            TaskSpec::PhiTable { set, m } => {
                let t = self.system()?;
                let a = self.set(set)?;
                for (mm, v) in phi::phi_table(t, &a, m)? {
                    report.rows.push(
                        ReportRow::new("phi-table", mm.to_string())
                            .value(&v, self.decimals)
                            .steps(mm),
                    );
                }
            }
            TaskSpec::PhiStar { set } => {
                let t = self.system()?;
                let a = self.set(set)?;
                let (r, profile) = phi::phi_star(t, &a, &self.budgets)?;
                let cert = format!(
                    "{}; k0={}; generators={:?}; kappa={}",
                    r.certificate,
                    profile
                        .k0
                        .map(|k| k.to_string())
                        .unwrap_or_else(|| "none".into()),
                    profile.generators,
                    profile.kappa
                );
                report.rows.push(
                    ReportRow::new("phistar", set.clone())
                        .phi(&r, self.decimals)
                        .certificate(cert),
                );
            }
            TaskSpec::Probe {
                set,
                radii,
                samples,
                seed,
            } => {
                let t = self.system()?;
                let a = self.set(set)?;
                let radii: Vec<Scalar> = radii
                    .iter()
                    .map(|r| r.parse::<Scalar>().map_err(|e| anyhow::anyhow!("radius: {e}")))
                    .collect::<anyhow::Result<_>>()?;
                let probe = probes::continuity_probe(
                    t,
                    &a,
                    &radii,
                    samples.unwrap_or(16),
                    seed.unwrap_or(self.seed),
                    &self.budgets,
                )?;
                for row in &probe.rows {
                    report.rows.push(
                        ReportRow::new("probe", row.radius.to_string())
                            .value(&row.sup_jump, self.decimals)
                            .exact(row.exact)
                            .steps(row.samples as u64)
                            .certificate(format!("bracketed={}", row.bracketed)),
                    );
                }
                if let Some(w) = &probe.witness {
                    report.rows.push(
                        ReportRow::new("probe-witness", w.distance.to_string())
                            .value(&w.jump, self.decimals)
                            .certificate(format!(
                                "discontinuity-witnessed; guarantee={}",
                                w.guarantee
                            )),
                    );
                    report.witness = Some(serde_json::to_value(w)?);
                }
                report.notes.extend(probe.notes.iter().cloned());
                report
                    .notes
                    .push(format!("verdict: {:?}", probe.verdict));
            }
            TaskSpec::Witness { set, eps, n0 } => {
                let t = self.system()?;
                let a = self.set(set)?;
                let eps = match eps {
                    Some(text) => text
                        .parse::<Scalar>()
                        .map_err(|e| anyhow::anyhow!("eps: {e}"))?,
                    None => Scalar::rat(1, 2),
                };
                let w = probes::discontinuity_witness(t, &a, &eps, n0.unwrap_or(32), &self.budgets)?;
                report.rows.push(
                    ReportRow::new("witness", format!("d={}", w.distance))
                        .value(&w.jump, self.decimals)
                        .certificate(format!("guarantee={}; phi(A)={}", w.guarantee, w.phi_at_point)),
                );
                report.witness = Some(serde_json::to_value(&w)?);
            }
            TaskSpec::PhiStarWitness {
                set,
                delta,
                exponents,
            } => {
                let t = self.system()?;
                let a = self.set(set)?;
                let delta = delta
                    .parse::<Scalar>()
                    .map_err(|e| anyhow::anyhow!("delta: {e}"))?;
                let w = probes::phi_star_discontinuity_witness(
                    t,
                    &a,
                    &delta,
                    exponents,
                    &self.budgets,
                )?;
                for (m, jump) in &w.per_exponent {
                    report.rows.push(
                        ReportRow::new("phistar-witness", format!("m={m}"))
                            .value(jump, self.decimals)
                            .certificate(format!(
                                "guarantee={}; d={}; kappa={}",
                                w.guarantee, w.distance, w.kappa
                            )),
                    );
                }
                report.witness = Some(serde_json::to_value(&w)?);
            }
            TaskSpec::Tower { region, n0, eps } => {
                let t = self.system()?;
                let space = t.space();
                let region = match region {
                    Some(expr) => self.set(expr)?,
                    None => SetClass::full(&space),
                };
                let eps = eps
                    .parse::<Scalar>()
                    .map_err(|e| anyhow::anyhow!("eps: {e}"))?;
                let tower = probes::rokhlin_tower(t, &region, *n0, &eps)?;
                report.rows.push(
                    ReportRow::new("tower", format!("n0={n0}"))
                        .value(&tower.residual_measure, self.decimals)
                        .certificate(format!(
                            "base-measure={}; region-measure={}",
                            tower.base.measure(&space)?,
                            tower.region_measure
                        )),
                );
                report.witness = Some(serde_json::to_value(&tower)?);
            }
            TaskSpec::Decompose {} => {
                let t = self.system()?;
                let comps = phi::ergodic_decomposition(t)?;
                for (i, (set, measure)) in comps.iter().enumerate() {
                    report.rows.push(
                        ReportRow::new("component", i.to_string())
                            .value(measure, self.decimals)
                            .certificate(set.to_string()),
                    );
                }
            }
            TaskSpec::Check { suite } => {
                let outcomes = checks::run_suite(suite)?;
                for o in &outcomes {
                    if !o.passed {
                        violation = true;
                    }
                    report.rows.push(
                        ReportRow::new("check", o.name)
                            .exact(o.passed)
                            .certificate(o.details.clone()),
                    );
                    println!("{}", o.line());
                }
            }
        }
        Ok((report, violation))
    }
}

/// Loads a plan file (JSON) and resolves its system spec.
pub fn load_plan(path: &Path) -> anyhow::Result<(Plan, Option<System>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading plan {}", path.display()))?;
    let plan: Plan = serde_json::from_str(&text)
        .with_context(|| format!("parsing plan {}", path.display()))?;
    let system = match (&plan.system, &plan.system_text) {
        (Some(p), None) => {
            let spec_path = path.parent().unwrap_or(Path::new(".")).join(p);
            let spec = std::fs::read_to_string(&spec_path)
                .with_context(|| format!("reading system spec {}", spec_path.display()))?;
            Some(parse_system_spec(&spec).map_err(|e| anyhow::anyhow!("system spec: {e}"))?)
        }
        (None, Some(text)) => {
            Some(parse_system_spec(text).map_err(|e| anyhow::anyhow!("system spec: {e}"))?)
        }
        (Some(_), Some(_)) => bail!("plan sets both system and system_text"),
        (None, None) => None,
    };
    Ok((plan, system))
}

/// Runs every task in order, writing one report file per task into
/// `out_dir`. Returns the exit code (1 when a check suite failed).
pub fn run_plan(plan: &Plan, system: Option<System>, out_dir: &Path) -> anyhow::Result<i32> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let format: Format = plan.format.as_deref().unwrap_or("csv").parse()?;
    let runner = Runner {
        system,
        budgets: Budgets {
            m_max: plan.m_max.unwrap_or(Budgets::default().m_max),
            exponent_budget: plan
                .exponent_budget
                .unwrap_or(Budgets::default().exponent_budget),
        },
        seed: plan.seed.unwrap_or(0),
        decimals: plan.decimals,
    };
    let mut any_violation = false;
    for (i, task) in plan.tasks.iter().enumerate() {
        let (report, violation) = runner.run_task(task)?;
        any_violation |= violation;
        let name = format!("{:02}-{}.{}", i + 1, task.kind_name(), format.extension());
        let rendered = report.render(format)?;
        crate::report::write_atomic(&out_dir.join(name), &rendered)?;
    }
    Ok(if any_violation { 1 } else { 0 })
}
