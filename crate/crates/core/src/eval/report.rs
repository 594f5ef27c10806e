use std::fmt::Write;

use super::{EvalError, Metric, MetricReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(format!("unknown report format '{s}' (md or csv)")),
        }
    }
}

fn cell(m: Option<&Metric>) -> String {
    match m.and_then(|m| m.value) {
        Some(v) => format!("{v:.3}"),
        None => "n/a".to_string(),
    }
}

fn label(r: &MetricReport) -> &str {
    if r.label.is_empty() {
        "-"
    } else {
        &r.label
    }
}

/// Renders reports as tables. Markdown groups consecutive reports of the
/// same task into one table whose columns follow the first report's
/// metric order; notes and n/a reasons follow each table. CSV is long
/// form: `label,task,metric,value,evaluated,skipped_invalid`.
pub fn render_report(reports: &[MetricReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => markdown(reports),
        ReportFormat::Csv => csv(reports),
    }
}

fn markdown(reports: &[MetricReport]) -> String {
    let mut out = String::new();
    let mut start = 0;
    while start < reports.len() {
        let task = &reports[start].task;
        let end = start + reports[start..].iter().take_while(|r| &r.task == task).count();
        let group = &reports[start..end];
        let cols: Vec<&str> = group[0].metrics.iter().map(|m| m.name.as_str()).collect();

        let _ = writeln!(out, "### {task}\n");
        let _ = writeln!(out, "| Model | {} | evaluated | skipped |", cols.join(" | "));
        let _ = writeln!(out, "|---|{}---:|---:|", "---:|".repeat(cols.len()));
        for r in group {
            let cells: Vec<String> = cols.iter().map(|c| cell(r.metrics.iter().find(|m| m.name == *c))).collect();
            let _ = writeln!(out, "| {} | {} | {} | {} |", label(r), cells.join(" | "), r.evaluated, r.skipped_invalid);
        }
        let mut notes: Vec<String> = Vec::new();
        for r in group {
            for m in &r.metrics {
                if let (None, Some(why)) = (m.value, &m.reason) {
                    let line = format!("{} {}: n/a ({why})", label(r), m.name);
                    if !notes.contains(&line) {
                        notes.push(line);
                    }
                }
            }
            for n in &r.notes {
                if !notes.contains(n) {
                    notes.push(n.clone());
                }
            }
        }
        if !notes.is_empty() {
            out.push('\n');
            for n in notes {
                let _ = writeln!(out, "- {n}");
            }
        }
        out.push('\n');
        start = end;
    }
    out
}

fn csv(reports: &[MetricReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(["label", "task", "metric", "value", "evaluated", "skipped_invalid"]);
    for r in reports {
        for m in &r.metrics {
            let _ = w.write_record([
                r.label.as_str(),
                &r.task,
                &m.name,
                &cell(Some(m)),
                &r.evaluated.to_string(),
                &r.skipped_invalid.to_string(),
            ]);
        }
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

/// Reads the CSV form back as (label, task, metric, value) rows; "n/a"
/// becomes `None`.
pub fn parse_csv_report(text: &str) -> Result<Vec<(String, String, String, Option<f64>)>, EvalError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let bad = |reason: String| EvalError::BadConstraint { row: i + 1, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() != 6 {
            return Err(bad(format!("{} fields", row.len())));
        }
        let value = match &row[3] {
            "n/a" => None,
            v => Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
        };
        out.push((row[0].to_string(), row[1].to_string(), row[2].to_string(), value));
    }
    Ok(out)
}

/// Rebuilds reports from the CSV form, one per consecutive (label, task)
/// run of rows. Metric values keep their 3-decimal rounding and n/a
/// reasons are not stored, so they come back empty.
pub fn reports_from_csv(text: &str) -> Result<Vec<MetricReport>, EvalError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out: Vec<MetricReport> = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let bad = |reason: String| EvalError::BadConstraint { row: i + 1, reason };
        let row = row.map_err(|e| bad(e.to_string()))?;
        if row.len() != 6 {
            return Err(bad(format!("{} fields", row.len())));
        }
        let count = |s: &str| s.parse::<usize>().map_err(|e| bad(e.to_string()));
        let metric = match &row[3] {
            "n/a" => Metric { name: row[2].to_string(), value: None, reason: None },
            v => Metric::new(&row[2], v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
        };
        match out.last_mut() {
            Some(r) if r.label == row[0] && r.task == row[1] => r.metrics.push(metric),
            _ => out.push(MetricReport {
                label: row[0].to_string(),
                task: row[1].to_string(),
                metrics: vec![metric],
                evaluated: count(&row[4])?,
                skipped_invalid: count(&row[5])?,
                notes: vec![],
            }),
        }
    }
    Ok(out)
}
