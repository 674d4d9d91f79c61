//! Scores a few sentences with the illustrative fixture lexicons.
//!
//! ```text
//! cargo run --example score_documents
//! ```

use std::path::Path;

use cbtext::corpus::{tokenize_text, NormalizationRules};
use cbtext::lexicon::{default_shifters, load_sentiment_lexicon, load_weighted_lexicon};
use cbtext::sentiment::{Indicator, IndicatorKind};

fn main() -> cbtext::error::Result<()> {
    let lexicons = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/lexicons");
    let lm = load_sentiment_lexicon(&lexicons.join("lm.csv"))?;
    let fss = load_sentiment_lexicon(&lexicons.join("fss.csv"))?;
    let jockers = load_weighted_lexicon(&lexicons.join("jockers.csv"))?;

    let indicators = [
        Indicator::new("lm_score", IndicatorKind::Ratio(lm.clone())),
        Indicator::new("lm_uncertainty", IndicatorKind::Uncertainty(lm.clone())),
        Indicator::new("lm_polarity", IndicatorKind::PolarityClasses(lm, default_shifters())),
        Indicator::new("jockers_polarity", IndicatorKind::PolarityWeighted(jockers, default_shifters())),
        Indicator::new("fss", IndicatorKind::Net(fss)),
    ];

    let statements = [
        "The labor market remains strong and inflation is stable.",
        "Conditions are not good. The outlook is highly uncertain.",
        "Financial markets came under severe stress and funding strains were very adverse.",
        "The banking system is resilient and well-capitalized.",
    ];
    print!("{:<60}", "statement");
    for ind in &indicators {
        print!("{:>18}", ind.name);
    }
    println!();
    for (i, text) in statements.iter().enumerate() {
        let doc = tokenize_text(&format!("s{i}"), text, &NormalizationRules::default());
        print!("{:<60}", &text[..text.len().min(58)]);
        for ind in &indicators {
            print!("{:>18.4}", ind.score(&doc)?);
        }
        println!();
    }
    Ok(())
}
