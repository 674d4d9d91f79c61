//! Writes the synthetic demo corpus and market series used by
//! `fixtures/demo/config.toml`.
//!
//! ```text
//! cargo run --example generate_demo_data -- crates/core/fixtures/demo
//! ```
//!
//! A weekly latent stress factor drives both the tone of the texts and the
//! volatility index, with a jump in March 2020 so the crisis windows differ.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const RATES: &[&str] = &[
    "rate", "federal", "funds", "target", "range", "inflation", "percent", "price", "objective", "mandate",
    "longer-run", "policy", "committee", "expectations",
];
const LABOR: &[&str] = &[
    "labor", "market", "unemployment", "payroll", "wages", "jobs", "participation", "workers", "hiring", "employment",
];
const GROWTH: &[&str] = &[
    "economic", "activity", "spending", "household", "business", "investment", "output", "growth", "demand",
    "consumer", "housing", "exports",
];
const FINANCE: &[&str] = &[
    "bank", "banks", "capital", "liquidity", "credit", "lending", "treasury", "securities", "dealers", "leverage",
    "valuations", "borrowing",
];
const COVID: &[&str] = &[
    "covid-19", "pandemic", "virus", "coronavirus", "vaccinations", "outbreak", "lockdown", "health", "cases",
    "hospital", "quarantine", "infection",
];
const UMP: &[&str] = &[
    "asset purchases", "quantitative easing", "forward guidance", "balance sheet", "lending facilities",
    "swap line", "market functioning", "lower bound", "securities purchases", "credit facility",
];
const POSITIVE: &[&str] = &[
    "strong", "solid", "gains", "improved", "stable", "robust", "progress", "confidence", "resilient", "sound",
    "good", "recovery", "support", "accommodative",
];
const NEGATIVE: &[&str] = &[
    "weak", "decline", "losses", "adverse", "stress", "disruption", "severe", "crisis", "fragile", "strain",
    "turmoil", "difficult", "fear", "contraction",
];
const UNCERTAIN: &[&str] = &["uncertain", "uncertainty", "risks", "may", "possible", "unclear", "volatility"];
const SHIFTERS: &[&str] = &["not", "very", "highly", "somewhat", "slightly"];
const FILLER: &[&str] = &["the", "of", "and", "in", "to", "that", "with", "for", "on", "over", "remains", "were"];

struct Week {
    monday: NaiveDate,
    stress: f64,
    covid: f64,
    ump: f64,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn weeks(rng: &mut ChaCha8Rng, start: NaiveDate, end: NaiveDate) -> Vec<Week> {
    let shock = NaiveDate::from_ymd_opt(2020, 3, 9).unwrap();
    let mut out = Vec::new();
    let mut d = start;
    let mut s: f64 = 0.0;
    while d <= end {
        let jump = if d >= shock { 1.6 * (-(d - shock).num_days() as f64 / 240.0).exp() } else { 0.0 };
        s = 0.85 * s + 0.25 * normal(rng);
        let covid = if d >= NaiveDate::from_ymd_opt(2020, 1, 20).unwrap() {
            (0.35 + 0.4 * jump).min(0.6)
        } else {
            0.0
        };
        let ump = if d >= shock { 0.25 + 0.2 * jump } else { 0.04 };
        out.push(Week {
            monday: d,
            stress: s + jump,
            covid,
            ump,
        });
        d += Duration::days(7);
    }
    out
}

fn sentence(rng: &mut ChaCha8Rng, w: &Week, topic_bias: &[f64; 4]) -> String {
    // topic weights: rates, labor, growth, finance; covid and ump are mixed in by regime
    let r: f64 = rng.random();
    let pool = if r < w.covid {
        COVID
    } else if r < w.covid + w.ump {
        UMP
    } else {
        let mut u = rng.random::<f64>() * topic_bias.iter().sum::<f64>();
        let mut pick = RATES;
        for (p, b) in [RATES, LABOR, GROWTH, FINANCE].into_iter().zip(topic_bias) {
            if u < *b {
                pick = p;
                break;
            }
            u -= b;
        }
        pick
    };
    let mut words: Vec<String> = Vec::new();
    let n = rng.random_range(6..11);
    for _ in 0..n {
        if rng.random_bool(0.3) {
            words.push(FILLER.choose(rng).unwrap().to_string());
        }
        words.push(pool.choose(rng).unwrap().to_string());
    }
    let p_neg = 1.0 / (1.0 + (-(1.4 * w.stress - 0.4)).exp());
    for _ in 0..rng.random_range(1..3) {
        let word = if rng.random_bool(p_neg) { NEGATIVE } else { POSITIVE }.choose(rng).unwrap();
        let at = rng.random_range(0..=words.len());
        if rng.random_bool(0.12) {
            words.insert(at, format!("{} {word}", SHIFTERS.choose(rng).unwrap()));
        } else {
            words.insert(at, word.to_string());
        }
    }
    if rng.random_bool((0.15 + 0.2 * w.stress.max(0.0)).min(0.8)) {
        let at = rng.random_range(0..=words.len());
        words.insert(at, UNCERTAIN.choose(rng).unwrap().to_string());
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get(0..1) {
        text.replace_range(0..1, &first.to_uppercase());
    }
    text.push('.');
    text
}

fn document(rng: &mut ChaCha8Rng, w: &Week, sentences: usize, bias: &[f64; 4]) -> String {
    let mut text = String::new();
    for i in 0..sentences {
        if i > 0 {
            text.push(if i % 4 == 0 { '\n' } else { ' ' });
        }
        text.push_str(&sentence(rng, w, bias));
    }
    text.push('\n');
    text
}

fn write(path: &Path, text: &str) {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).expect("create directory");
    }
    fs::write(path, text).unwrap_or_else(|e| panic!("writing {}: {e}", path.display()));
}

fn main() {
    let root: PathBuf = std::env::args().nth(1).map_or_else(|| "crates/core/fixtures/demo".into(), PathBuf::from);
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 6, 21).unwrap();
    let weeks = weeks(&mut rng, start, end);

    let mut manifest = String::from("id,channel,date,filename\n");
    let mut n = 0usize;
    for (i, w) in weeks.iter().enumerate() {
        let mut docs: Vec<(&str, NaiveDate, usize, [f64; 4])> = Vec::new();
        // speech on Thursdays
        docs.push(("speech", w.monday + Duration::days(3), rng.random_range(10..16), [1.0, 1.0, 1.5, 1.0]));
        // policy meetings roughly every six and a half weeks, minutes three weeks later
        if i % 13 == 2 || i % 13 == 8 {
            docs.push(("announcement", w.monday + Duration::days(2), rng.random_range(6..9), [2.5, 1.0, 1.0, 0.5]));
        }
        if i >= 3 && ((i - 3) % 13 == 2 || (i - 3) % 13 == 8) {
            docs.push(("minutes", w.monday + Duration::days(2), rng.random_range(18..26), [1.0, 1.5, 1.5, 1.5]));
        }
        docs.sort_by_key(|d| d.1);
        for (channel, date, sentences, bias) in docs {
            n += 1;
            let id = format!("{}{:03}", &channel[..1], n);
            let file = format!("texts/{id}.txt");
            write(&root.join(&file), &document(&mut rng, w, sentences, &bias));
            writeln!(manifest, "{id},{channel},{date},{file}").unwrap();
        }
    }
    write(&root.join("manifest.csv"), &manifest);

    // daily market series on weekdays
    let mut vix = String::from("date,close\n");
    let mut ffr = String::from("date,rate\n");
    let mut neer = String::from("date,index\n");
    let mut level = 100.0;
    for w in &weeks {
        for day in 0..5 {
            let d = w.monday + Duration::days(day);
            let v = (16.0 + 9.0 * w.stress + 1.5 * normal(&mut rng)).max(9.0);
            writeln!(vix, "{d},{v:.2}").unwrap();
            let policy = if d < NaiveDate::from_ymd_opt(2019, 8, 1).unwrap() {
                2.4
            } else if d < NaiveDate::from_ymd_opt(2020, 3, 16).unwrap() {
                1.6
            } else {
                0.08
            };
            writeln!(ffr, "{d},{:.2}", policy + 0.02 * normal(&mut rng)).unwrap();
            level *= 1.0 + 0.002 * normal(&mut rng) + 0.0004 * w.stress;
            writeln!(neer, "{d},{level:.3}").unwrap();
        }
    }
    write(&root.join("external/vix.csv"), &vix);
    write(&root.join("external/ffr.csv"), &ffr);
    write(&root.join("external/neer.csv"), &neer);

    // Wednesday balance sheet, billions
    let mut assets = String::from("date,total_assets\n");
    let mut bs = 4400.0;
    for w in &weeks {
        bs += if w.ump > 0.1 { 60.0 * w.ump / 0.25 } else { -8.0 } + 5.0 * normal(&mut rng);
        writeln!(assets, "{},{bs:.1}", w.monday + Duration::days(2)).unwrap();
    }
    write(&root.join("external/fed_assets.csv"), &assets);

    // daily new cases from late January 2020
    let mut cases = String::from("date,new_cases\n");
    let mut d = NaiveDate::from_ymd_opt(2020, 1, 22).unwrap();
    while d <= end + Duration::days(6) {
        let t = (d - NaiveDate::from_ymd_opt(2020, 1, 22).unwrap()).num_days() as f64;
        let waves = 30000.0 * (-((t - 80.0) / 25.0).powi(2)).exp()
            + 60000.0 * (-((t - 180.0) / 30.0).powi(2)).exp()
            + 220000.0 * (-((t - 350.0) / 40.0).powi(2)).exp();
        let noise = 1.0 + 0.1 * normal(&mut rng);
        writeln!(cases, "{d},{:.0}", (waves * noise).max(0.0)).unwrap();
        d += Duration::days(1);
    }
    write(&root.join("external/covid_cases.csv"), &cases);

    // monthly unemployment rate
    let mut unemp = String::from("date,rate\n");
    let mut m = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    while m <= end {
        let base = if m < NaiveDate::from_ymd_opt(2020, 4, 1).unwrap() {
            4.0 - 0.25 * (m.year() - 2018) as f64
        } else {
            let months = (m.year() - 2020) * 12 + m.month() as i32 - 4;
            3.6 + 11.0 * (-(months as f64) / 5.0).exp() + 2.0
        };
        writeln!(unemp, "{m},{:.1}", base + 0.1 * normal(&mut rng)).unwrap();
        m = if m.month() == 12 {
            NaiveDate::from_ymd_opt(m.year() + 1, 1, 1).unwrap()
        } else {
            NaiveDate::from_ymd_opt(m.year(), m.month() + 1, 1).unwrap()
        };
    }
    write(&root.join("external/unemployment.csv"), &unemp);

    write(&root.join("nber.csv"), "start,end\n2020-02-01,2020-04-30\n");
    debug_assert_eq!(start.weekday(), Weekday::Mon);
    println!("wrote {n} documents and market series under {}", root.display());
}
