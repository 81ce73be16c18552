#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &[
    "the", "of", "and", "in", "to", "a", "was", "is", "for", "on", "as", "with", "by", "that",
    "river", "station", "north", "season", "album", "county", "church", "league", "village",
    "between", "released", "located", "population", "including", "national", "government",
    "american", "british", "century", "during", "several", "however", "production", "record",
    "building", "series", "played", "became", "following", "originally", "members", "history",
];

/// Word salad with a skewed word distribution, capitalized sentences and line breaks.
pub fn prose(seed: u64, chars: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::with_capacity(chars + 64);
    while out.len() < chars {
        let n = rng.random_range(3..15);
        for i in 0..n {
            // Squaring a uniform draw favours the front of the list.
            let u: f64 = rng.random();
            let w = WORDS[((u * u) * WORDS.len() as f64) as usize];
            if i == 0 {
                let mut c = w.chars();
                out.extend(c.next().unwrap().to_uppercase());
                out.push_str(c.as_str());
            } else {
                out.push(' ');
                out.push_str(w);
            }
        }
        out.push_str(if rng.random_bool(0.2) { ".\n" } else { ". " });
    }
    out
}
