//! Corpus evaluation, early-stopping selection and report tables.

mod early_stop;
mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{self, DiagnosticsReport};
use crate::embed::{greedy_match_score, EmbedError, EmbeddingProvider};
use crate::entropy::{self, EntropyError, LogBase};
use crate::ngram::{self, BleuConfig, NgramError};
use crate::text::SentenceSplitter;

pub use early_stop::{early_stop_select, EarlyStopError, EarlyStopOutcome, EarlyStopPolicy};
pub use report::{parse_report, render_report, ReportError, ReportFormat, ReportRow};

/// One evaluated document as read from JSON lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub source_id: String,
    #[serde(rename = "source")]
    pub source_text: String,
    #[serde(rename = "hypothesis")]
    pub hypothesis_text: String,
    #[serde(rename = "reference")]
    pub reference_text: String,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("embedding: {0}")]
    Embed(#[from] EmbedError),
    #[error("entropy: {0}")]
    Entropy(#[from] EntropyError),
    #[error("n-gram metric: {0}")]
    Ngram(#[from] NgramError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] diagnostics::DiagnosticsError),
}

#[derive(Debug, Clone, Default)]
pub struct EvalConfig {
    pub bleu: BleuConfig,
    pub log_base: LogBase,
    pub splitter: SentenceSplitter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub bertscore_precision: f64,
    pub bertscore_recall: f64,
    pub bertscore_f1: f64,
    pub rouge_l_f1: f64,
    pub bleu: f64,
    pub sup: f64,
    pub bow: f64,
    pub diagnostics: DiagnosticsReport,
}

impl MetricVector {
    pub fn report_row(&self, label: impl Into<String>) -> ReportRow {
        ReportRow {
            label: label.into(),
            bertscore_f1: self.bertscore_f1,
            rouge_l_f1: self.rouge_l_f1,
            bleu: self.bleu,
            sup: self.sup,
            bow: self.bow,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RecordOutcome {
    pub source_id: String,
    #[serde(flatten)]
    pub status: RecordStatus,
}

#[derive(Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum RecordStatus {
    Ok { metrics: MetricVector },
    Failed { error: String },
}

impl RecordOutcome {
    pub fn metrics(&self) -> Option<&MetricVector> {
        match &self.status {
            RecordStatus::Ok { metrics } => Some(metrics),
            RecordStatus::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CorpusEvaluation {
    pub records: Vec<RecordOutcome>,
    /// Arithmetic mean over the records that scored; `None` if none did.
    pub average: Option<ReportRow>,
}

impl CorpusEvaluation {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.metrics().is_none()).count()
    }
}

/// Scores one record: similarity of hypothesis to reference, entropy of the
/// hypothesis, and diagnostics of the hypothesis against its source.
pub fn evaluate_record(record: &EvalRecord, provider: &dyn EmbeddingProvider, config: &EvalConfig) -> Result<MetricVector, RecordError> {
    let hyp = crate::text::tokenize(&record.hypothesis_text);
    let reference = crate::text::tokenize(&record.reference_text);

    let hyp_emb = provider.embed(&format!("{}.hypothesis", record.source_id), &hyp)?;
    let ref_emb = provider.embed(&format!("{}.reference", record.source_id), &reference)?;
    let bert = greedy_match_score(&hyp_emb, &ref_emb)?;
    let entropy = entropy::entropy(&hyp, config.log_base)?;
    Ok(MetricVector {
        bertscore_precision: bert.precision,
        bertscore_recall: bert.recall,
        bertscore_f1: bert.f1,
        rouge_l_f1: ngram::rouge_l(&hyp, &reference).f1,
        bleu: ngram::bleu(&hyp, &reference, &config.bleu)?.score,
        sup: entropy.sup_value,
        bow: entropy.bow_bits,
        diagnostics: diagnostics::diagnose(&record.hypothesis_text, &record.source_text, &config.splitter)?,
    })
}

/// Scores every record in parallel. Failures are recorded per record; the
/// average row covers the successful ones, summed in input order.
pub fn evaluate_corpus(records: &[EvalRecord], provider: &dyn EmbeddingProvider, config: &EvalConfig, label: &str) -> CorpusEvaluation {
    let outcomes: Vec<RecordOutcome> = records
        .par_iter()
        .map(|r| RecordOutcome {
            source_id: r.source_id.clone(),
            status: match evaluate_record(r, provider, config) {
                Ok(metrics) => RecordStatus::Ok { metrics },
                Err(e) => RecordStatus::Failed { error: e.to_string() },
            },
        })
        .collect();
    let scored: Vec<&MetricVector> = outcomes.iter().filter_map(RecordOutcome::metrics).collect();
    let average = average_row(&scored, label);
    CorpusEvaluation { records: outcomes, average }
}

fn average_row(scored: &[&MetricVector], label: &str) -> Option<ReportRow> {
    if scored.is_empty() {
        return None;
    }
    let n = scored.len() as f64;
    let mean = |f: fn(&MetricVector) -> f64| scored.iter().map(|m| f(m)).sum::<f64>() / n;
    Some(ReportRow {
        label: label.to_owned(),
        bertscore_f1: mean(|m| m.bertscore_f1),
        rouge_l_f1: mean(|m| m.rouge_l_f1),
        bleu: mean(|m| m.bleu),
        sup: mean(|m| m.sup),
        bow: mean(|m| m.bow),
    })
}

/// Reads JSON-lines evaluation records.
pub fn parse_records(content: &str) -> Result<Vec<EvalRecord>, (usize, serde_json::Error)> {
    content
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::ProviderSpec;

    fn record(id: &str, src: &str, hyp: &str, reference: &str) -> EvalRecord {
        EvalRecord { source_id: id.into(), source_text: src.into(), hypothesis_text: hyp.into(), reference_text: reference.into() }
    }

    #[test]
    fn perfect_batch() {
        let records = vec![
            record("a", "Der Sandmann kommt.", "Der Sandmann kommt heute.", "Der Sandmann kommt heute."),
            record("b", "Es war einmal ein Müller.", "Ein Müller war arm.", "Ein Müller war arm."),
            record("c", "Nathanael an Lothar.", "Nathanael schreibt Lothar einen Brief.", "Nathanael schreibt Lothar einen Brief."),
        ];
        let eval = evaluate_corpus(&records, &ProviderSpec::Deterministic { seed: 7, dimension: 16 }, &EvalConfig::default(), "identity");
        assert_eq!(eval.failed(), 0);
        let avg = eval.average.unwrap();
        assert_eq!(avg.rouge_l_f1, 1.0);
        assert_eq!(avg.bleu, 100.0);
        assert!((avg.bertscore_f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_batch() {
        let records: Vec<_> =
            (0..3).map(|i| record(&format!("d{i}"), "Er ging nach Hause.", &"so ".repeat(40), "Er ging heim und schlief.")).collect();
        let eval = evaluate_corpus(&records, &ProviderSpec::Deterministic { seed: 1, dimension: 8 }, &EvalConfig::default(), "collapsed");
        let avg = eval.average.unwrap();
        assert_eq!(avg.bow, 0.0);
        assert_eq!(avg.bleu, 0.0);
    }

    #[test]
    fn average_is_arithmetic_mean_and_failures_are_isolated() {
        let records = vec![
            record("a", "Er kam.", "Er kam nach Hause.", "Er kam heim."),
            record("b", "Sie ging.", "x", "Sie ging fort."),
            record("c", "Wir blieben.", "Wir blieben lange dort.", "Wir blieben."),
        ];
        let eval = evaluate_corpus(&records, &ProviderSpec::Deterministic { seed: 3, dimension: 8 }, &EvalConfig::default(), "mix");
        // "x" has a single token: too short for the match-length estimator
        assert_eq!(eval.failed(), 1);
        assert!(matches!(eval.records[1].status, RecordStatus::Failed { .. }));
        let ok: Vec<_> = eval.records.iter().filter_map(|r| r.metrics()).collect();
        let avg = eval.average.unwrap();
        assert_eq!(avg.bleu, (ok[0].bleu + ok[1].bleu) / 2.0);
        assert_eq!(avg.sup, (ok[0].sup + ok[1].sup) / 2.0);
    }

    #[test]
    fn records_parse() {
        let text = "{\"source_id\":\"a\",\"source\":\"s\",\"hypothesis\":\"h\",\"reference\":\"r\"}\n\n";
        assert_eq!(parse_records(text).unwrap().len(), 1);
        assert_eq!(parse_records("{}").unwrap_err().0, 1);
    }
}
