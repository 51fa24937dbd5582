//! Deterministic report rendering: CSV (one row per result, provenance in
//! comment lines), JSON (provenance + rows + nested objects), markdown.
//! Scalars are printed exactly; decimal columns appear only on request.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use ergolab_core::phi::PhiResult;
use ergolab_core::Scalar;

pub const SCHEMA: &str = "ergolab.report/1";

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema: &'static str,
    pub seed: u64,
    pub m_max: u64,
    pub exponent_budget: u64,
}

impl Provenance {
    pub fn new(seed: u64, m_max: u64, exponent_budget: u64) -> Provenance {
        Provenance {
            tool: "ergolab",
            version: env!("CARGO_PKG_VERSION"),
            schema: SCHEMA,
            seed,
            m_max,
            exponent_budget,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub task: String,
    pub param: String,
    pub lower: String,
    pub upper: String,
    pub exact: bool,
    pub steps: u64,
    pub certificate: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_decimal: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_decimal: Option<String>,
}

impl ReportRow {
    pub fn new(task: &str, param: impl Into<String>) -> ReportRow {
        ReportRow {
            task: task.into(),
            param: param.into(),
            lower: String::new(),
            upper: String::new(),
            exact: true,
            steps: 0,
            certificate: String::new(),
            lower_decimal: None,
            upper_decimal: None,
        }
    }

    pub fn value(mut self, v: &Scalar, decimals: Option<u32>) -> ReportRow {
        self.lower = v.to_string();
        self.upper = v.to_string();
        if let Some(d) = decimals {
            self.lower_decimal = Some(v.to_decimal(d));
            self.upper_decimal = Some(v.to_decimal(d));
        }
        self
    }

    pub fn phi(mut self, r: &PhiResult, decimals: Option<u32>) -> ReportRow {
        self.lower = r.lower.to_string();
        self.upper = r.upper.to_string();
        self.exact = r.exact;
        self.steps = r.steps_used;
        self.certificate = r.certificate.to_string();
        if let Some(d) = decimals {
            self.lower_decimal = Some(r.lower.to_decimal(d));
            self.upper_decimal = Some(r.upper.to_decimal(d));
        }
        self
    }

    pub fn steps(mut self, steps: u64) -> ReportRow {
        self.steps = steps;
        self
    }

    pub fn exact(mut self, exact: bool) -> ReportRow {
        self.exact = exact;
        self
    }

    pub fn certificate(mut self, c: impl Into<String>) -> ReportRow {
        self.certificate = c.into();
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub rows: Vec<ReportRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => anyhow::bail!("unknown format '{other}' (csv, json, markdown)"),
        }
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Markdown => "md",
        }
    }
}

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

impl Report {
    pub fn new(provenance: Provenance) -> Report {
        Report {
            provenance,
            rows: Vec::new(),
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn render(&self, format: Format) -> anyhow::Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(self)? + "\n",
            Format::Csv => {
                let p = &self.provenance;
                let mut out = format!(
                    "# tool={} version={} schema={}\n# seed={} m_max={} exponent_budget={}\n",
                    p.tool, p.version, p.schema, p.seed, p.m_max, p.exponent_budget
                );
                for note in &self.notes {
                    out.push_str(&format!("# note: {note}\n"));
                }
                let decimals = self.rows.iter().any(|r| r.lower_decimal.is_some());
                out.push_str("task,param,lower,upper,exact,steps,certificate");
                if decimals {
                    out.push_str(",lower_decimal,upper_decimal");
                }
                out.push('\n');
                for r in &self.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}",
                        csv_quote(&r.task),
                        csv_quote(&r.param),
                        csv_quote(&r.lower),
                        csv_quote(&r.upper),
                        r.exact,
                        r.steps,
                        csv_quote(&r.certificate)
                    ));
                    if decimals {
                        out.push_str(&format!(
                            ",{},{}",
                            r.lower_decimal.as_deref().unwrap_or(""),
                            r.upper_decimal.as_deref().unwrap_or("")
                        ));
                    }
                    out.push('\n');
                }
                out
            }
            Format::Markdown => {
                let p = &self.provenance;
                let mut out = format!(
                    "**{} {}** · schema {} · seed {} · m_max {} · exponent_budget {}\n\n",
                    p.tool, p.version, p.schema, p.seed, p.m_max, p.exponent_budget
                );
                out.push_str("| task | param | lower | upper | exact | steps | certificate |\n");
                out.push_str("|---|---|---|---|---|---|---|\n");
                for r in &self.rows {
                    out.push_str(&format!(
                        "| {} | {} | {} | {} | {} | {} | {} |\n",
                        r.task, r.param, r.lower, r.upper, r.exact, r.steps, r.certificate
                    ));
                }
                for note in &self.notes {
                    out.push_str(&format!("\n> note: {note}\n"));
                }
                out
            }
        })
    }
}

/// Writes via a temporary sibling and renames, so readers never observe a
/// partial report.
pub fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_embedded_commas() {
        assert_eq!(csv_quote("plain"), "plain");
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }

    #[test]
    fn render_is_deterministic() {
        let mut report = Report::new(Provenance::new(7, 4096, 64));
        report.rows.push(
            ReportRow::new("phi", "")
                .value(&Scalar::rat(1, 2), None)
                .steps(3)
                .certificate("stabilized(step=3)"),
        );
        let a = report.render(Format::Csv).unwrap();
        let b = report.render(Format::Csv).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("task,param,lower,upper,exact,steps,certificate"));
        assert!(a.contains("phi,,1/2,1/2,true,3,stabilized(step=3)"));
        let j = report.render(Format::Json).unwrap();
        assert!(j.contains("\"schema\": \"ergolab.report/1\""));
    }

    #[test]
    fn decimal_columns_are_opt_in() {
        let mut report = Report::new(Provenance::new(7, 4096, 64));
        report
            .rows
            .push(ReportRow::new("phi", "").value(&Scalar::rat(1, 3), Some(4)));
        let csv = report.render(Format::Csv).unwrap();
        assert!(csv.contains("lower_decimal"));
        assert!(csv.contains("0.3333"));
    }
}
