use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Vocabulary entries ignored by the sampler.
    pub stop_words: BTreeSet<String>,
}

impl LdaParams {
    /// `alpha = 50 / k`, `beta = 0.01`, 2000 sweeps, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: 50.0 / k.max(1) as f64,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            stop_words: BTreeSet::new(),
        }
    }

    pub fn alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn stop_words<I: IntoIterator<Item = S>, S: Into<String>>(mut self, words: I) -> Self {
        self.stop_words = words.into_iter().map(Into::into).collect();
        self
    }
}

/// A fitted topic model. Rows of `phi` (topic × word) and `theta`
/// (document × topic) are probability vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    /// Fitted documents, in corpus order; indexes rows of `theta`.
    pub doc_ids: Vec<String>,
    /// Model vocabulary; indexes columns of `phi`.
    pub words: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// Human-assigned names, one per topic when set.
    pub labels: Vec<Option<String>>,
}

/// Count tables of the collapsed sampler.
pub(crate) struct GibbsState {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u32>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl GibbsState {
    pub(crate) fn new(docs: Vec<Vec<usize>>, v: usize, params: &LdaParams) -> Self {
        let k = params.k;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; v]; k];
        let mut topic_total = vec![0u32; k];
        let assignments = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.random_range(0..k);
                        doc_topic[d][z] += 1;
                        topic_word[z][w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        Self {
            k,
            v,
            alpha: params.alpha,
            beta: params.beta,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
            rng,
            weights: vec![0.0; k],
        }
    }

    /// One pass over every token, documents and tokens in order.
    pub(crate) fn sweep(&mut self) {
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for t in 0..self.k {
                    total += (f64::from(self.doc_topic[d][t]) + self.alpha)
                        * (f64::from(self.topic_word[t][w]) + self.beta)
                        / (f64::from(self.topic_total[t]) + vbeta);
                    self.weights[t] = total;
                }
                let u = self.rng.random::<f64>() * total;
                let new = self.weights.partition_point(|&c| c <= u).min(self.k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        debug_assert!(self.counts_consistent());
    }

    /// Every count table sums to the token total and agrees with the
    /// assignments.
    pub(crate) fn counts_consistent(&self) -> bool {
        let tokens: usize = self.docs.iter().map(Vec::len).sum();
        let sum = |rows: &[Vec<u32>]| rows.iter().flatten().map(|&c| c as usize).sum::<usize>();
        let totals: usize = self.topic_total.iter().map(|&c| c as usize).sum();
        let per_doc = self
            .doc_topic
            .iter()
            .zip(&self.docs)
            .all(|(row, words)| row.iter().map(|&c| c as usize).sum::<usize>() == words.len());
        sum(&self.doc_topic) == tokens && sum(&self.topic_word) == tokens && totals == tokens && per_doc
    }

    fn phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.v as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let denom = f64::from(self.topic_total[t]) + vbeta;
                self.topic_word[t]
                    .iter()
                    .map(|&c| (f64::from(c) + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    fn theta(&self) -> Vec<Vec<f64>> {
        let kalpha = self.k as f64 * self.alpha;
        self.doc_topic
            .iter()
            .zip(&self.docs)
            .map(|(row, words)| {
                let denom = words.len() as f64 + kalpha;
                row.iter().map(|&c| (f64::from(c) + self.alpha) / denom).collect()
            })
            .collect()
    }
}

/// Word-id streams over the model vocabulary: corpus vocabulary minus stop
/// words, re-indexed densely in vocabulary order.
pub(crate) fn model_documents(corpus: &Corpus, stop_words: &BTreeSet<String>) -> (Vec<String>, Vec<Vec<usize>>) {
    let mut remap = vec![None; corpus.vocab.len()];
    let mut words = Vec::new();
    for (id, w) in corpus.vocab.words().iter().enumerate() {
        if !stop_words.contains(w) {
            remap[id] = Some(words.len());
            words.push(w.clone());
        }
    }
    let docs = corpus
        .documents
        .iter()
        .map(|d| {
            corpus
                .tokens(&d.id)
                .map(|t| {
                    t.tokens
                        .iter()
                        .filter_map(|tok| corpus.vocab.id(tok).and_then(|id| remap[id]))
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();
    (words, docs)
}

/// Collapsed Gibbs sampling LDA.
///
/// Documents are visited in corpus order and tokens in text order, so the
/// result is a pure function of `(corpus, params)`; reordering the manifest
/// changes the random stream and may change the fit.
pub fn fit_lda(corpus: &Corpus, params: &LdaParams) -> Result<TopicModel> {
    if params.k < 2 {
        return Err(Error::InvalidArgument(format!("K must be >= 2, got {}", params.k)));
    }
    if params.iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be >= 1".into()));
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(Error::InvalidArgument("alpha and beta must be positive".into()));
    }
    if corpus.vocab.is_empty() {
        return Err(Error::InvalidArgument("vocabulary not built".into()));
    }
    if params.k > corpus.len() {
        return Err(Error::InvalidArgument(format!(
            "K = {} exceeds the number of documents ({})",
            params.k,
            corpus.len()
        )));
    }
    let (words, docs) = model_documents(corpus, &params.stop_words);
    if words.len() < params.k {
        return Err(Error::InvalidArgument(format!(
            "vocabulary size {} is smaller than K = {}",
            words.len(),
            params.k
        )));
    }

    let mut state = GibbsState::new(docs, words.len(), params);
    for _ in 0..params.iterations {
        state.sweep();
    }
    log::debug!(
        "lda: K={} V={} D={} sweeps={}",
        params.k,
        words.len(),
        corpus.len(),
        params.iterations
    );

    Ok(TopicModel {
        k: params.k,
        alpha: params.alpha,
        beta: params.beta,
        seed: params.seed,
        iterations: params.iterations,
        doc_ids: corpus.documents.iter().map(|d| d.id.clone()).collect(),
        words,
        phi: state.phi(),
        theta: state.theta(),
        labels: vec![None; params.k],
    })
}

impl TopicModel {
    pub fn doc_index(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }

    /// Attaches display names; extra labels are ignored.
    pub fn set_labels<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, labels: I) {
        for (slot, label) in self.labels.iter_mut().zip(labels) {
            *slot = Some(label.into());
        }
    }

    pub fn label(&self, topic: usize) -> String {
        self.labels
            .get(topic)
            .cloned()
            .flatten()
            .unwrap_or_else(|| format!("topic_{topic}"))
    }

    /// Words of `topic` by descending probability, ties by word order.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<(&str, f64)> {
        let row = &self.phi[topic];
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        ids.into_iter()
            .take(n)
            .map(|i| (self.words[i].as_str(), row[i]))
            .collect()
    }

    /// Corpus-wide mean of each theta column.
    pub fn mean_theta(&self) -> Vec<f64> {
        let d = self.theta.len().max(1) as f64;
        (0..self.k)
            .map(|t| self.theta.iter().map(|row| row[t]).sum::<f64>() / d)
            .collect()
    }
}

pub fn topic_probabilities<'m>(model: &'m TopicModel, doc_id: &str) -> Result<&'m [f64]> {
    model
        .doc_index(doc_id)
        .map(|i| model.theta[i].as_slice())
        .ok_or_else(|| Error::UnknownDocument(doc_id.to_string()))
}

/// The `n` topics with the largest mean theta; ties go to the lower id.
pub fn top_topics(model: &TopicModel, n: usize) -> Vec<usize> {
    let mean = model.mean_theta();
    let mut ids: Vec<usize> = (0..model.k).collect();
    ids.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]).then(a.cmp(&b)));
    ids.truncate(n.min(model.k));
    ids
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{Channel, Document, TokenizedDocument};
    use chrono::NaiveDate;

    pub(crate) fn corpus_from(docs: &[Vec<&str>]) -> Corpus {
        let documents = (0..docs.len())
            .map(|i| Document {
                id: format!("d{i}"),
                channel: Channel::Announcement,
                date: NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Duration::days(i as i64),
                raw_text: String::new(),
            })
            .collect();
        let mut c = Corpus::new(documents).unwrap();
        for (i, toks) in docs.iter().enumerate() {
            let id = format!("d{i}");
            c.tokenized.insert(id.clone(), TokenizedDocument::from_tokens(&id, toks));
        }
        c.build_vocab(1).unwrap();
        c
    }

    fn rows_are_distributions(rows: &[Vec<f64>]) -> bool {
        rows.iter()
            .all(|r| r.iter().all(|&p| p >= 0.0) && (r.iter().sum::<f64>() - 1.0).abs() < 1e-9)
    }

    #[test]
    fn symmetric_corpus_gives_uniform_theta() {
        // two-word vocabulary so that V >= K holds
        let docs = vec![vec!["rate", "policy"]; 10];
        let c = corpus_from(&docs);
        let m = fit_lda(&c, &LdaParams::new(2).iterations(50).seed(3)).unwrap();
        for row in &m.theta {
            for p in row {
                assert!((p - 0.5).abs() < 0.05, "{row:?}");
            }
        }
        assert!(rows_are_distributions(&m.phi));
        assert!(rows_are_distributions(&m.theta));
        assert_eq!(topic_probabilities(&m, "d0").unwrap().len(), 2);
        assert!(topic_probabilities(&m, "nope").is_err());
    }

    #[test]
    fn argument_errors() {
        let c = corpus_from(&[vec!["a", "b", "c"], vec!["a", "b"]]);
        assert!(fit_lda(&c, &LdaParams::new(1)).is_err());
        assert!(fit_lda(&c, &LdaParams::new(3)).is_err(), "K > D");
        assert!(fit_lda(&c, &LdaParams::new(2).iterations(0)).is_err());
        let tiny = corpus_from(&[vec!["a"], vec!["a"], vec!["a"]]);
        assert!(fit_lda(&tiny, &LdaParams::new(2)).is_err(), "V < K");
        let stop = LdaParams::new(2).stop_words(["a", "b"]);
        assert!(fit_lda(&c, &stop).is_err(), "stop words shrink V below K");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let docs: Vec<Vec<&str>> = (0..12)
            .map(|i| if i % 2 == 0 { vec!["inflation", "prices", "rate"] } else { vec!["virus", "health", "rate"] })
            .collect();
        let c = corpus_from(&docs);
        let p = LdaParams::new(2).alpha(0.1).iterations(30).seed(11);
        assert_eq!(fit_lda(&c, &p).unwrap(), fit_lda(&c, &p).unwrap());
        let other = fit_lda(&c, &p.clone().seed(12)).unwrap();
        assert_eq!(other.theta.len(), 12);
    }

    #[test]
    fn count_tables_stay_consistent() {
        let docs: Vec<Vec<&str>> = (0..8).map(|i| vec!["a", "b", "c", "d"][..(i % 4 + 1)].to_vec()).collect();
        let c = corpus_from(&docs);
        let params = LdaParams::new(3).seed(5);
        let (words, ids) = model_documents(&c, &params.stop_words);
        let mut state = GibbsState::new(ids, words.len(), &params);
        assert!(state.counts_consistent());
        for _ in 0..20 {
            state.sweep();
            assert!(state.counts_consistent());
        }
    }

    #[test]
    fn stop_words_leave_the_model_vocabulary() {
        let c = corpus_from(&[vec!["the", "rate", "the"], vec!["the", "virus"], vec!["rate", "virus"]]);
        let m = fit_lda(&c, &LdaParams::new(2).iterations(5).stop_words(["the"])).unwrap();
        assert_eq!(m.words, ["rate", "virus"]);
    }

    #[test]
    fn top_topics_ordering() {
        let mut m = TopicModel {
            k: 4,
            alpha: 1.0,
            beta: 0.1,
            seed: 0,
            iterations: 1,
            doc_ids: vec!["a".into(), "b".into()],
            words: vec!["w".into()],
            phi: vec![vec![1.0]; 4],
            theta: vec![vec![0.25; 4]; 2],
            labels: vec![None; 4],
        };
        assert_eq!(top_topics(&m, 4), [0, 1, 2, 3]);
        assert_eq!(top_topics(&m, 2), [0, 1]);
        m.theta = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.1, 0.5, 0.1, 0.3]];
        // means 0.1, 0.35, 0.2, 0.35
        assert_eq!(top_topics(&m, 4), [1, 3, 2, 0]);
        m.set_labels(["Policy Intervention"]);
        assert_eq!(m.label(0), "Policy Intervention");
        assert_eq!(m.label(1), "topic_1");
    }
}
