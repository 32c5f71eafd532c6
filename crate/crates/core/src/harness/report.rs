use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Column headers, in table order.
pub const COLUMNS: [&str; 5] = ["BERTscore_F1", "ROUGE-L_F1", "BLEU", "SUP", "BOW"];
const DECIMALS: [usize; 5] = [3, 3, 3, 3, 4];

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub bertscore_f1: f64,
    pub rouge_l_f1: f64,
    pub bleu: f64,
    pub sup: f64,
    pub bow: f64,
}

impl ReportRow {
    pub fn values(&self) -> [f64; 5] {
        [self.bertscore_f1, self.rouge_l_f1, self.bleu, self.sup, self.bow]
    }

    fn from_values(label: String, v: [f64; 5]) -> Self {
        ReportRow { label, bertscore_f1: v[0], rouge_l_f1: v[1], bleu: v[2], sup: v[3], bow: v[4] }
    }

    /// The row as it reads back after rendering.
    pub fn rounded(&self) -> ReportRow {
        let mut v = self.values();
        for (x, d) in v.iter_mut().zip(DECIMALS) {
            *x = format!("{:.*}", d, *x).parse().expect("formatted float parses");
        }
        ReportRow::from_values(self.label.clone(), v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv, markdown or json")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

fn cells(row: &ReportRow) -> Vec<String> {
    row.values().iter().zip(DECIMALS).map(|(v, d)| format!("{:.*}", d, v)).collect()
}

pub fn render_report(rows: &[ReportRow], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            let mut header = vec!["label"];
            header.extend(COLUMNS);
            w.write_record(&header).expect("in-memory write");
            for row in rows {
                let mut record = vec![row.label.clone()];
                record.extend(cells(row));
                w.write_record(&record).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
        }
        ReportFormat::Markdown => {
            let mut out = format!("| label | {} |\n", COLUMNS.join(" | "));
            out.push_str(&format!("|---|{}\n", "---:|".repeat(COLUMNS.len())));
            for row in rows {
                let label = row.label.replace('|', "\\|").replace('\n', " ");
                out.push_str(&format!("| {} | {} |\n", label, cells(row).join(" | ")));
            }
            out
        }
        ReportFormat::Json => serde_json::to_string_pretty(rows).expect("rows serialize") + "\n",
    }
}

/// Reads a rendered table back into rows (values at printed precision).
pub fn parse_report(text: &str, format: ReportFormat) -> Result<Vec<ReportRow>, ReportError> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_str(text)?),
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let mut rows = Vec::new();
            for (i, rec) in r.records().enumerate() {
                let rec = rec?;
                let fields: Vec<&str> = rec.iter().collect();
                rows.push(row_from_fields(fields[0].to_owned(), &fields[1..], i + 2)?);
            }
            Ok(rows)
        }
        ReportFormat::Markdown => text
            .lines()
            .enumerate()
            .skip(2)
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                let inner = line.trim().trim_start_matches('|').trim_end_matches('|');
                let fields = split_markdown_cells(inner);
                let label = fields.first().cloned().unwrap_or_default();
                let values: Vec<&str> = fields[1.min(fields.len())..].iter().map(String::as_str).collect();
                row_from_fields(label, &values, i + 1)
            })
            .collect(),
    }
}

fn split_markdown_cells(inner: &str) -> Vec<String> {
    let mut cells = vec![String::new()];
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'|') => {
                cells.last_mut().unwrap().push('|');
                chars.next();
            }
            '|' => cells.push(String::new()),
            _ => cells.last_mut().unwrap().push(c),
        }
    }
    cells.into_iter().map(|c| c.trim().to_owned()).collect()
}

fn row_from_fields(label: String, fields: &[&str], line: usize) -> Result<ReportRow, ReportError> {
    if fields.len() != COLUMNS.len() {
        return Err(ReportError::Malformed { line, message: format!("expected {} values, found {}", COLUMNS.len(), fields.len()) });
    }
    let mut v = [0.0; 5];
    for (slot, f) in v.iter_mut().zip(fields) {
        *slot = f.trim().parse().map_err(|_| ReportError::Malformed { line, message: format!("not a number: {f:?}") })?;
    }
    Ok(ReportRow::from_values(label, v))
}
