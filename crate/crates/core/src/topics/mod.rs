//! LDA topic models, NPMI coherence and KL divergence between periods.

mod coherence;
mod divergence;
mod lda;

use std::io::Write;

use crate::error::{Error, Result};

pub use coherence::{
    npmi_coherence, npmi_from_probs, word_set_coherence, CoherenceReport, DocumentOccurrence, PairScore,
    DEFAULT_TOP_N,
};
pub use divergence::{
    kl_divergence, kl_permutation_test, period_topic_distribution, PeriodTopicDistribution, PermutationTest,
    DEFAULT_PERMUTATIONS,
};
pub use lda::{fit_lda, top_topics, topic_probabilities, LdaParams, TopicModel, DEFAULT_BETA, DEFAULT_ITERATIONS};

fn dump_error(what: &str, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("writing {what}: {e}"))
}

/// Writes `topic,word,prob` rows.
pub fn write_phi<W: Write>(model: &TopicModel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "word", "prob"]).map_err(|e| dump_error("phi", e))?;
    for (t, row) in model.phi.iter().enumerate() {
        for (word, p) in model.words.iter().zip(row) {
            w.write_record([t.to_string(), word.clone(), p.to_string()])
                .map_err(|e| dump_error("phi", e))?;
        }
    }
    w.flush().map_err(|e| dump_error("phi", e))
}

/// Writes `doc_id,topic,prob` rows.
pub fn write_theta<W: Write>(model: &TopicModel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["doc_id", "topic", "prob"]).map_err(|e| dump_error("theta", e))?;
    for (doc, row) in model.doc_ids.iter().zip(&model.theta) {
        for (t, p) in row.iter().enumerate() {
            w.write_record([doc.clone(), t.to_string(), p.to_string()])
                .map_err(|e| dump_error("theta", e))?;
        }
    }
    w.flush().map_err(|e| dump_error("theta", e))
}

/// Writes `topic,npmi,top_words`; words are space separated.
pub fn write_coherence<W: Write>(report: &CoherenceReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "npmi", "top_words"]).map_err(|e| dump_error("coherence", e))?;
    for (t, (v, words)) in report.npmi.iter().zip(&report.top_words).enumerate() {
        w.write_record([t.to_string(), format!("{v:.6}"), words.join(" ")])
            .map_err(|e| dump_error("coherence", e))?;
    }
    w.flush().map_err(|e| dump_error("coherence", e))
}
