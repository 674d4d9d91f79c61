//! Counts policy and pandemic terms with the shipped term lists.
//!
//! ```text
//! cargo run --example term_counts
//! ```

use cbtext::corpus::{tokenize_text, NormalizationRules};
use cbtext::lexicon::{covid_terms, match_terms, ump_terms};

fn main() {
    let text = "The Committee will increase its holdings through asset purchases and will \
                use its balance sheet to support market functioning. The coronavirus outbreak \
                and COVID-19 vaccinations dominate the outlook; SARS-CoV-2 infection rates \
                remain high.";
    let doc = tokenize_text("demo", text, &NormalizationRules::default());
    for lex in [ump_terms(), covid_terms()] {
        let m = match_terms(&doc, &lex);
        let hits: Vec<String> = m.spans.iter().map(|&(s, n)| doc.tokens[s..s + n].join(" ")).collect();
        println!("{:<6} {} hits of {} tokens: {}", lex.name, m.count, doc.len(), hits.join(" | "));
    }
}
