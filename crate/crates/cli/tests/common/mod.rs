//! Synthetic news articles for end-to-end runs.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOURCES: &[&str] = &["delfi.lt", "15min.lt", "lrt.lt", "vz.lt", "bernardinai.lt"];

const WORDS: &[&str] = &[
    "vyriausybė",
    "seimas",
    "ministras",
    "sprendimas",
    "savivaldybė",
    "gyventojai",
    "miestas",
    "vilniaus",
    "kauno",
    "klaipėdos",
    "mokykla",
    "ligoninė",
    "biudžetas",
    "mokesčiai",
    "kaina",
    "energija",
    "rinka",
    "bendrovė",
    "darbuotojai",
    "atlyginimas",
    "pranešė",
    "teigė",
    "nusprendė",
    "pradės",
    "baigė",
    "svarsto",
    "projektas",
    "statyba",
    "kelias",
    "tiltas",
    "traukinys",
    "oro",
    "uostas",
    "policija",
    "teismas",
    "byla",
    "tyrimas",
    "rinkimai",
    "partija",
    "kandidatas",
    "krepšinis",
    "rinktinė",
    "varžybos",
    "pergalė",
    "čempionatas",
    "festivalis",
    "paroda",
    "koncertas",
    "knyga",
    "universitetas",
    "studentai",
    "mokslininkai",
    "tyrėjai",
    "europos",
    "sąjunga",
    "parama",
    "lėšos",
    "investicijos",
    "eksportas",
    "ūkininkai",
    "derlius",
    "orai",
    "šiluma",
    "šaltis",
    "savaitė",
    "metai",
    "diena",
    "praėjusią",
    "šiemet",
    "naujas",
    "didelis",
    "svarbus",
    "pirmas",
    "paskutinis",
    "ir",
    "bet",
    "kad",
    "nes",
    "apie",
    "dėl",
    "po",
    "per",
];

fn sentence(rng: &mut ChaCha8Rng, words: usize) -> String {
    let mut s = String::new();
    for i in 0..words {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(WORDS.choose(rng).unwrap());
    }
    s.push('.');
    s
}

/// One JSON line per article. Roughly one in eight is built to fail a
/// filter rule; the rest pass with default settings.
pub fn synthetic_articles_jsonl(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..n {
        let source = SOURCES[i % SOURCES.len()];
        let body_words = rng.random_range(60..140);
        let mut body = String::new();
        let mut written = 0;
        while written < body_words {
            let len = rng.random_range(6..14);
            if !body.is_empty() {
                body.push(' ');
            }
            body.push_str(&sentence(&mut rng, len));
            written += len;
        }
        let summary_words = rng.random_range(8..18);
        let mut summary = sentence(&mut rng, summary_words);
        match rng.random_range(0..8) {
            0 => summary = "Trumpai.".to_string(),
            1 => summary = body.chars().take(body.chars().count() / 3).collect(),
            _ => {}
        }
        let date = format!(
            "20{:02}-{:02}-{:02}",
            rng.random_range(7..21),
            rng.random_range(1..13),
            rng.random_range(1..29)
        );
        let record = serde_json::json!({
            "source": source,
            "url": format!("https://{source}/{i}"),
            "published_at": date,
            "summary": summary,
            "body": body,
        });
        let _ = writeln!(out, "{record}");
    }
    out
}
