//! CSV and markdown output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qnop::lab::OracleReport;

use crate::experiment::{AngleRow, ExperimentId, Report, ResultRow};
use crate::methods::Variant;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn io(e: impl ToString) -> CliError {
    CliError::Io(e.to_string())
}

/// Result rows as CSV. `mean_angle` and `wall_ms` columns appear only when
/// some row carries them.
pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String, CliError> {
    if rows.is_empty() {
        return Err(CliError::Usage("no rows to emit".into()));
    }
    let angle = rows.iter().any(|r| r.mean_angle.is_some());
    let wall = rows.iter().any(|r| r.wall_ms.is_some());
    let mut w = writer();
    let mut header = vec!["problem", "method", "lambda", "iterations", "status", "fallbacks"];
    if angle {
        header.push("mean_angle");
    }
    if wall {
        header.push("wall_ms");
    }
    w.write_record(&header).map_err(io)?;
    for r in rows {
        let mut rec = vec![
            r.problem.clone(),
            r.method.to_string(),
            fmt_opt(r.lambda),
            r.iterations.to_string(),
            r.status.as_str().to_string(),
            r.fallbacks.to_string(),
        ];
        if angle {
            rec.push(fmt_opt(r.mean_angle));
        }
        if wall {
            rec.push(fmt_opt(r.wall_ms));
        }
        w.write_record(&rec).map_err(io)?;
    }
    finish(w)
}

fn parse_opt(s: &str) -> Result<Option<f64>, CliError> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| CliError::Parse(format!("bad number `{s}`")))
    }
}

/// Inverse of [`rows_to_csv`].
pub fn parse_rows_csv(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| CliError::Parse(e.to_string()))?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| col(name).ok_or_else(|| CliError::Parse(format!("missing column `{name}`")));
    let (problem, method, lambda, iterations, status, fallbacks) =
        (need("problem")?, need("method")?, need("lambda")?, need("iterations")?, need("status")?, need("fallbacks")?);
    let (angle, wall) = (col("mean_angle"), col("wall_ms"));
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| CliError::Parse(format!("bad integer `{}`", &rec[i])));
        out.push(ResultRow {
            problem: rec[problem].to_string(),
            method: rec[method].parse().map_err(|e: CliError| CliError::Parse(e.to_string()))?,
            lambda: parse_opt(&rec[lambda])?,
            iterations: int(iterations)?,
            status: rec[status].parse()?,
            fallbacks: int(fallbacks)?,
            mean_angle: angle.map(|i| parse_opt(&rec[i])).transpose()?.flatten(),
            wall_ms: wall.map(|i| parse_opt(&rec[i])).transpose()?.flatten(),
        });
    }
    Ok(out)
}

/// Angles at four decimals.
pub fn angles_to_csv(angles: &[AngleRow]) -> Result<String, CliError> {
    let mut w = writer();
    w.write_record(["iteration", "angle_degrees"]).map_err(io)?;
    for a in angles {
        w.write_record([a.iteration.to_string(), format!("{:.4}", a.angle)]).map_err(io)?;
    }
    finish(w)
}

pub fn oracles_to_csv(reports: &[OracleReport]) -> Result<String, CliError> {
    let mut w = writer();
    w.write_record(["oracle", "trials", "violations", "skipped", "max_residual", "informational"]).map_err(io)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.trials.to_string(),
            r.violations.to_string(),
            r.skipped.to_string(),
            format!("{:e}", r.max_residual),
            r.informational.to_string(),
        ])
        .map_err(io)?;
    }
    finish(w)
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn md_rule(n: usize) -> String {
    md_row(&vec!["---".to_string(); n])
}

fn cell(r: &ResultRow) -> String {
    match r.status {
        crate::experiment::RunStatus::Converged => r.iterations.to_string(),
        _ => format!("{}*", r.iterations),
    }
}

/// Methods down, λ across; standard methods in bold start each group.
fn pivot_markdown(rows: &[ResultRow]) -> String {
    let mut lambdas: Vec<f64> = Vec::new();
    let mut methods = Vec::new();
    for r in rows {
        let l = r.lambda.unwrap_or(f64::NAN);
        if !lambdas.iter().any(|x| x.to_bits() == l.to_bits()) {
            lambdas.push(l);
        }
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let mut out = String::new();
    let mut header = vec!["λ".to_string()];
    header.extend(lambdas.iter().map(|l| l.to_string()));
    out.push_str(&md_row(&header));
    out.push_str(&md_rule(header.len()));
    for m in &methods {
        let label = if m.variant == Variant::Standard { format!("**{m}**") } else { m.to_string() };
        let mut line = vec![label];
        for l in &lambdas {
            let c = rows
                .iter()
                .find(|r| r.method == *m && r.lambda.unwrap_or(f64::NAN).to_bits() == l.to_bits())
                .map(cell)
                .unwrap_or_default();
            line.push(c);
        }
        out.push_str(&md_row(&line));
    }
    if rows.iter().any(|r| r.status != crate::experiment::RunStatus::Converged) {
        out.push_str("\n\\* did not converge\n");
    }
    out
}

/// Angle sequence in rows of six, as `Iteration` / `Angle (degrees)` pairs.
pub fn angles_markdown(angles: &[AngleRow]) -> String {
    let mut out = String::new();
    for (i, chunk) in angles.chunks(6).enumerate() {
        let mut it = vec!["**Iteration**".to_string()];
        let mut an = vec!["**Angle (degrees)**".to_string()];
        it.extend(chunk.iter().map(|a| a.iteration.to_string()));
        an.extend(chunk.iter().map(|a| format!("{:.4}", a.angle)));
        while it.len() < 7 {
            it.push(String::new());
            an.push(String::new());
        }
        if i == 0 {
            out.push_str(&md_row(&it));
            out.push_str(&md_rule(7));
        } else {
            out.push_str(&md_row(&it));
        }
        out.push_str(&md_row(&an));
    }
    out
}

fn oracles_markdown(reports: &[OracleReport]) -> String {
    let mut out = md_row(&["oracle", "trials", "violations", "skipped", "max residual"].map(String::from));
    out.push_str(&md_rule(5));
    for r in reports {
        let name = if r.informational { format!("{} (informational)", r.name) } else { r.name.clone() };
        out.push_str(&md_row(&[name, r.trials.to_string(), r.violations.to_string(), r.skipped.to_string(), format!("{:.3e}", r.max_residual)]));
    }
    out
}

/// Rendered report: the main table and, for example1, the angle table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub main: String,
    pub angles: Option<String>,
}

pub fn render(report: &Report, format: Format) -> Result<Rendered, CliError> {
    let angles = (!report.angles.is_empty()).then_some(&report.angles);
    match format {
        Format::Csv => {
            let main = if report.id == ExperimentId::Lab { oracles_to_csv(&report.oracles)? } else { rows_to_csv(&report.rows)? };
            Ok(Rendered { main, angles: angles.map(|a| angles_to_csv(a)).transpose()? })
        }
        Format::Markdown => {
            let main = match report.id {
                ExperimentId::Table2 | ExperimentId::Table3 => pivot_markdown(&report.rows),
                ExperimentId::Lab => oracles_markdown(&report.oracles),
                ExperimentId::Systems | ExperimentId::Example1 => {
                    let angle = report.id == ExperimentId::Example1;
                    let mut header = vec!["problem", "method", "iterations", "status"];
                    if angle {
                        header.push("mean angle (deg)");
                    }
                    let mut out = md_row(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
                    out.push_str(&md_rule(header.len()));
                    for r in &report.rows {
                        let mut line = vec![r.problem.clone(), r.method.to_string(), r.iterations.to_string(), r.status.as_str().into()];
                        if angle {
                            line.push(r.mean_angle.map(|a| format!("{a:.4}")).unwrap_or_default());
                        }
                        out.push_str(&md_row(&line));
                    }
                    out
                }
            };
            Ok(Rendered { main, angles: angles.map(|a| angles_markdown(a)) })
        }
    }
}

/// `results.csv` → `results_angles.csv`.
pub fn angles_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_angles.{ext}"),
        None => format!("{stem}_angles"),
    };
    out.with_file_name(name)
}

/// Writes the report to `out`, or returns the text for stdout.
pub fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<Option<String>, CliError> {
    let r = render(report, format)?;
    match out {
        Some(path) => {
            fs::write(path, &r.main).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if let Some(a) = &r.angles {
                let p = angles_path(path);
                fs::write(&p, a).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            }
            Ok(None)
        }
        None => {
            let mut s = r.main;
            if let Some(a) = r.angles {
                let _ = write!(s, "\n{a}");
            }
            Ok(Some(s))
        }
    }
}
