//! Known results compiled into the binary, and the regression runner over
//! them.

use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineConfig};
use crate::error::Error;
use crate::partition::{parse_datum, CandidateDatum};
use crate::verdict::{Status, Verdict};

const CORPUS: &str = include_str!("data/corpus.jsonl");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Realizable,
    Exceptional,
}

impl Expected {
    pub fn status(self) -> Status {
        match self {
            Expected::Realizable => Status::Realizable,
            Expected::Exceptional => Status::Exceptional,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub datum_text: String,
    pub expected: Expected,
    pub source: String,
    /// Decided by the filters alone; the oracle is out of budget.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub filter_only: bool,
}

impl CorpusEntry {
    pub fn datum(&self) -> Result<CandidateDatum, Error> {
        parse_datum(&self.datum_text)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("corpus line {line}: {source}")]
    Datum { line: usize, source: Error },
    #[error("corpus line {line}: Riemann-Hurwitz defect {defect}")]
    Defect { line: usize, defect: i64 },
}

/// Parses JSONL corpus text, rejecting entries that are not candidates.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let entry: CorpusEntry =
            serde_json::from_str(raw).map_err(|source| CorpusError::Json { line, source })?;
        let datum = entry.datum().map_err(|source| CorpusError::Datum { line, source })?;
        if datum.rh_defect() != 0 {
            return Err(CorpusError::Defect { line, defect: datum.rh_defect() });
        }
        out.push(entry);
    }
    Ok(out)
}

/// The embedded corpus.
pub fn load() -> Vec<CorpusEntry> {
    parse_corpus(CORPUS).expect("embedded corpus is valid")
}

#[derive(Clone, Debug)]
pub struct CorpusOutcome {
    pub entry: CorpusEntry,
    pub verdict: Verdict,
}

impl CorpusOutcome {
    pub fn matches(&self) -> bool {
        self.verdict.status == self.entry.expected.status()
    }
}

/// Decides every entry with one shared engine.
pub fn run(entries: &[CorpusEntry], config: EngineConfig) -> Vec<CorpusOutcome> {
    let engine = Engine::new(config);
    entries
        .iter()
        .map(|entry| {
            let datum = entry.datum().expect("validated at load");
            CorpusOutcome { entry: entry.clone(), verdict: engine.decide(&datum) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SearchBudget;
    use crate::verdict::Method;

    #[test]
    fn embedded_corpus_loads() {
        let entries = load();
        assert!(entries.len() >= 10);
        assert!(entries.iter().any(|e| e.datum_text == "4: [3,1] [2,2] [2,2]"));
    }

    #[test]
    fn defect_rejected_at_load() {
        let bad = r#"{"datum_text": "4: [3,1] [2,2]", "expected": "exceptional", "source": "x"}"#;
        assert!(matches!(parse_corpus(bad), Err(CorpusError::Defect { line: 1, .. })));
        let unparsable = r#"{"datum_text": "4: [3,2]", "expected": "exceptional", "source": "x"}"#;
        assert!(matches!(parse_corpus(unparsable), Err(CorpusError::Datum { .. })));
    }

    #[test]
    fn filter_only_entries_need_no_search() {
        let config = EngineConfig { budget: SearchBudget::deterministic(), ..Default::default() };
        let filter_only: Vec<CorpusEntry> = load().into_iter().filter(|e| e.filter_only).collect();
        for out in run(&filter_only, config) {
            assert!(out.matches(), "{}", out.entry.datum_text);
            assert!(matches!(out.verdict.method, Method::Filter(_)));
        }
    }
}
