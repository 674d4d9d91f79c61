use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

use super::lda::TopicModel;

pub const DEFAULT_TOP_N: usize = 10;
const LOG_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PairScore {
    pub first: String,
    pub second: String,
    pub npmi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    /// Mean pair NPMI per topic.
    pub npmi: Vec<f64>,
    pub top_words: Vec<Vec<String>>,
    pub pairs: Vec<Vec<PairScore>>,
}

impl CoherenceReport {
    pub fn mean(&self) -> f64 {
        self.npmi.iter().sum::<f64>() / self.npmi.len().max(1) as f64
    }
}

/// Which documents contain each word.
#[derive(Clone, Debug)]
pub struct DocumentOccurrence {
    n_docs: usize,
    docs_of: BTreeMap<String, BTreeSet<usize>>,
}

impl DocumentOccurrence {
    pub fn new(corpus: &Corpus) -> Self {
        let mut docs_of: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (i, doc) in corpus.documents.iter().enumerate() {
            if let Some(toks) = corpus.tokens(&doc.id) {
                for t in &toks.tokens {
                    docs_of.entry(t.clone()).or_default().insert(i);
                }
            }
        }
        Self {
            n_docs: corpus.len(),
            docs_of,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn doc_frequency(&self, word: &str) -> usize {
        self.docs_of.get(word).map_or(0, BTreeSet::len)
    }

    pub fn co_frequency(&self, a: &str, b: &str) -> usize {
        match (self.docs_of.get(a), self.docs_of.get(b)) {
            (Some(x), Some(y)) => x.intersection(y).count(),
            _ => 0,
        }
    }

    /// NPMI of a word pair from document shares.
    pub fn npmi(&self, a: &str, b: &str) -> f64 {
        let n = self.n_docs as f64;
        npmi_from_probs(
            self.doc_frequency(a) as f64 / n,
            self.doc_frequency(b) as f64 / n,
            self.co_frequency(a, b) as f64 / n,
        )
    }
}

/// `ln(p_ab / (p_a p_b)) / -ln(p_ab)`, with a small epsilon on the joint
/// share; a pair present in every document scores 1. Clamped to [-1, 1].
pub fn npmi_from_probs(p_a: f64, p_b: f64, p_ab: f64) -> f64 {
    if p_ab >= 1.0 {
        return 1.0;
    }
    let joint = p_ab + LOG_EPS;
    let value = (joint.ln() - (p_a * p_b).ln()) / -joint.ln();
    value.clamp(-1.0, 1.0)
}

/// Mean NPMI over unordered pairs of `words`. Words missing from the corpus
/// are dropped with a warning.
pub fn word_set_coherence(words: &[String], occ: &DocumentOccurrence) -> Result<(f64, Vec<PairScore>)> {
    let present: Vec<&String> = words
        .iter()
        .filter(|w| {
            let found = occ.doc_frequency(w) > 0;
            if !found {
                log::warn!("coherence: `{w}` does not occur in the reference corpus; skipped");
            }
            found
        })
        .collect();
    if present.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need two words present in the corpus, have {}",
            present.len()
        )));
    }
    let mut pairs = Vec::new();
    for i in 0..present.len() {
        for j in i + 1..present.len() {
            pairs.push(PairScore {
                first: present[i].clone(),
                second: present[j].clone(),
                npmi: occ.npmi(present[i], present[j]),
            });
        }
    }
    let mean = pairs.iter().map(|p| p.npmi).sum::<f64>() / pairs.len() as f64;
    Ok((mean, pairs))
}

pub fn npmi_coherence(model: &TopicModel, corpus: &Corpus, top_n: usize) -> Result<CoherenceReport> {
    if top_n < 2 {
        return Err(Error::InvalidArgument(format!("top_n must be >= 2, got {top_n}")));
    }
    if corpus.is_empty() {
        return Err(Error::InsufficientData("empty reference corpus".into()));
    }
    let occ = DocumentOccurrence::new(corpus);
    let mut report = CoherenceReport {
        npmi: Vec::with_capacity(model.k),
        top_words: Vec::with_capacity(model.k),
        pairs: Vec::with_capacity(model.k),
    };
    for t in 0..model.k {
        let words: Vec<String> = model.top_words(t, top_n).into_iter().map(|(w, _)| w.to_string()).collect();
        let (mean, pairs) = word_set_coherence(&words, &occ).map_err(|e| e.context(format!("topic {t}")))?;
        report.npmi.push(mean);
        report.top_words.push(words);
        report.pairs.push(pairs);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::lda::tests::corpus_from;

    fn strings(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn perfectly_paired_words_score_one() {
        let c = corpus_from(&[vec!["a", "b"], vec!["a", "b", "c"], vec!["c"], vec!["d"]]);
        let occ = DocumentOccurrence::new(&c);
        assert!((occ.npmi("a", "b") - 1.0).abs() < 1e-9);
        // everywhere-present pair
        let all = corpus_from(&[vec!["x", "y"], vec!["x", "y"]]);
        assert_eq!(DocumentOccurrence::new(&all).npmi("x", "y"), 1.0);
    }

    #[test]
    fn disjoint_words_score_near_minus_one() {
        let c = corpus_from(&[vec!["a"], vec!["b"], vec!["c"]]);
        let occ = DocumentOccurrence::new(&c);
        let eps: f64 = 1e-12;
        let expected = (eps.ln() - (1.0f64 / 9.0).ln()) / -eps.ln();
        assert!((occ.npmi("a", "b") - expected).abs() < 1e-12);
        assert!(expected < -0.9);
    }

    #[test]
    fn independent_words_near_zero() {
        // a in half the docs, b in half, independently laid out on a grid
        let docs: Vec<Vec<&str>> = (0..4000)
            .map(|i| {
                let mut d = vec!["filler"];
                if i % 2 == 0 {
                    d.push("a");
                }
                if (i / 2) % 2 == 0 {
                    d.push("b");
                }
                d
            })
            .collect();
        let c = corpus_from(&docs);
        let occ = DocumentOccurrence::new(&c);
        assert!(occ.npmi("a", "b").abs() < 1e-9);
    }

    #[test]
    fn missing_words_are_skipped() {
        let c = corpus_from(&[vec!["a", "b"], vec!["a"], vec!["c"]]);
        let occ = DocumentOccurrence::new(&c);
        let (_, pairs) = word_set_coherence(&strings(&["a", "zzz", "b", "c"]), &occ).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(word_set_coherence(&strings(&["a", "zzz"]), &occ).is_err());
    }
}
