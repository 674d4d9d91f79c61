//! Fits LDA to the demo announcements, then reports top words, coherence
//! and how topic mixes shift between two windows.
//!
//! ```text
//! cargo run --release --example topic_model
//! ```

use std::path::Path;

use chrono::NaiveDate;

use cbtext::calendar::DateRange;
use cbtext::corpus::{load_corpus, Channel, NormalizationRules};
use cbtext::topics::{fit_lda, kl_permutation_test, npmi_coherence, period_topic_distribution, LdaParams};

fn main() -> cbtext::error::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/demo");
    let mut corpus = load_corpus(&root, &root.join("manifest.csv"))?;
    corpus.tokenize_all(&NormalizationRules::default());
    let mut corpus = corpus.filtered(|d| d.channel == Channel::Announcement);
    corpus.build_vocab(1)?;

    let stop = ["the", "of", "and", "in", "to", "that", "with", "for", "on", "over", "remains", "were"];
    let params = LdaParams::new(6).iterations(500).seed(42).stop_words(stop);
    let model = fit_lda(&corpus, &params)?;
    let coherence = npmi_coherence(&model, &corpus, 10)?;
    for t in 0..model.k {
        let words: Vec<&str> = model.top_words(t, 6).into_iter().map(|(w, _)| w).collect();
        println!("topic {t}  npmi {:+.3}  {}", coherence.npmi[t], words.join(" "));
    }
    println!("mean npmi {:.3}", coherence.mean());

    let date = |y, m, d| NaiveDate::from_ymd_opt(y, m, d).unwrap();
    let calm = DateRange::new(date(2018, 3, 1), date(2019, 6, 30))?;
    let covid = DateRange::new(date(2020, 1, 1), date(2021, 6, 30))?;
    let a = period_topic_distribution(&model, &corpus, &calm, "calm")?;
    let b = period_topic_distribution(&model, &corpus, &covid, "covid")?;
    println!("calm  ({:>2} docs) {:.3?}", a.n_docs, a.probs);
    println!("covid ({:>2} docs) {:.3?}", b.n_docs, b.probs);
    let test = kl_permutation_test(&model, &corpus, &calm, &covid, 500, 7)?;
    println!("KL(calm || covid) = {:.4}, permutation p = {:.4}", test.statistic, test.p_value);
    Ok(())
}
