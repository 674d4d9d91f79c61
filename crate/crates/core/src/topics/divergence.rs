use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calendar::DateRange;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

use super::lda::TopicModel;

const Q_SMOOTHING: f64 = 1e-10;
const SUM_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_PERMUTATIONS: usize = 1000;

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(Error::InvalidArgument(format!("{name} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::InvalidArgument(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// `KL(P || Q)` in nats. `Q` is smoothed by 1e-10 per cell and renormalized;
/// cells with `P = 0` contribute nothing.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_distribution(p, "P")?;
    check_distribution(q, "Q")?;
    let z: f64 = q.iter().map(|x| x + Q_SMOOTHING).sum();
    let kl = p
        .iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / ((qi + Q_SMOOTHING) / z)).ln())
        .sum::<f64>();
    Ok(kl.max(0.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodTopicDistribution {
    pub label: String,
    pub probs: Vec<f64>,
    pub n_docs: usize,
}

fn mean_of_rows(model: &TopicModel, rows: &[usize]) -> Vec<f64> {
    let mut acc = vec![0.0; model.k];
    for &r in rows {
        for (a, p) in acc.iter_mut().zip(&model.theta[r]) {
            *a += p;
        }
    }
    let s: f64 = acc.iter().sum();
    acc.iter_mut().for_each(|a| *a /= s);
    acc
}

fn rows_in_window(model: &TopicModel, corpus: &Corpus, window: &DateRange) -> Vec<usize> {
    model
        .doc_ids
        .iter()
        .enumerate()
        .filter(|(_, id)| corpus.document(id).is_some_and(|d| window.contains(d.date)))
        .map(|(i, _)| i)
        .collect()
}

/// Mean topic mix of the fitted documents dated inside `window`.
pub fn period_topic_distribution(
    model: &TopicModel,
    corpus: &Corpus,
    window: &DateRange,
    label: &str,
) -> Result<PeriodTopicDistribution> {
    let rows = rows_in_window(model, corpus, window);
    if rows.is_empty() {
        return Err(Error::InsufficientData(format!("no fitted documents in window {window}")));
    }
    Ok(PeriodTopicDistribution {
        label: label.to_string(),
        probs: mean_of_rows(model, &rows),
        n_docs: rows.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermutationTest {
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

/// Shuffles period membership among the documents of both windows and
/// reports `(1 + #{KL* >= KL}) / (1 + n)`. A stand-in for an unreported
/// resampling scheme, not a reproduction of one.
pub fn kl_permutation_test(
    model: &TopicModel,
    corpus: &Corpus,
    first: &DateRange,
    second: &DateRange,
    permutations: usize,
    seed: u64,
) -> Result<PermutationTest> {
    let a = rows_in_window(model, corpus, first);
    let b = rows_in_window(model, corpus, second);
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("a window holds no fitted documents".into()));
    }
    if permutations == 0 {
        return Err(Error::InvalidArgument("permutations must be >= 1".into()));
    }
    let statistic = kl_divergence(&mean_of_rows(model, &a), &mean_of_rows(model, &b))?;
    let mut pool: Vec<usize> = a.iter().chain(&b).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        pool.shuffle(&mut rng);
        let (pa, pb) = pool.split_at(a.len());
        let kl = kl_divergence(&mean_of_rows(model, pa), &mean_of_rows(model, pb))?;
        if kl >= statistic - 1e-15 {
            extreme += 1;
        }
    }
    Ok(PermutationTest {
        statistic,
        p_value: (1 + extreme) as f64 / (1 + permutations) as f64,
        permutations,
    })
}
