//! Deterministic test corpora.

#![allow(dead_code)]

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONSETS: &[&str] = &[
    "", "b", "c", "d", "f", "g", "h", "l", "m", "n", "p", "r", "s", "t", "v", "w", "br", "ch",
    "cl", "cr", "dr", "fr", "gr", "pl", "pr", "sh", "sp", "st", "str", "th", "tr", "wh",
];
const NUCLEI: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ee", "ou", "oo", "y"];
const CODAS: &[&str] = &[
    "", "", "", "n", "r", "s", "t", "l", "d", "m", "ng", "nd", "st", "ck", "rt", "th", "nt",
];
const SUFFIXES: &[&str] = &["", "", "", "", "s", "ed", "ing", "er", "ly", "tion", "ness"];
const FUNCTION_WORDS: &[&str] = &[
    "the", "of", "and", "in", "to", "a", "was", "is", "for", "on", "as", "with", "by", "that",
    "he", "at", "from", "his", "it", "an", "were", "which", "are", "this", "also", "be", "or",
    "had", "first", "one", "their", "its", "new", "after", "but", "who", "not", "they", "have",
    "her", "she", "two", "been", "other", "when", "there", "all", "during", "into", "school",
];

fn syllable(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    s.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
    s.push_str(NUCLEI[rng.random_range(0..NUCLEI.len())]);
    s.push_str(CODAS[rng.random_range(0..CODAS.len())]);
    s
}

fn lexicon(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut words: Vec<String> = FUNCTION_WORDS.iter().map(|w| w.to_string()).collect();
    let mut seen: std::collections::HashSet<String> = words.iter().cloned().collect();
    while words.len() < size {
        let n = 1 + rng.random_range(0..3) + usize::from(rng.random_bool(0.2));
        let mut w: String = (0..n).map(|_| syllable(rng)).collect();
        w.push_str(SUFFIXES[rng.random_range(0..SUFFIXES.len())]);
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Pseudo-English prose: a Zipf-distributed lexicon of syllable-built words,
/// capitalized sentences, light punctuation, numbers and paragraph breaks.
/// ASCII only, at least `chars` characters long.
pub fn pseudo_english(seed: u64, chars: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = lexicon(&mut rng, 6000);
    let weights: Vec<f64> = (1..=words.len()).map(|r| 1.0 / (r as f64).powf(1.07)).collect();
    let zipf = WeightedIndex::new(&weights).expect("positive weights");
    let mut out = String::with_capacity(chars + 256);
    let mut sentences_in_par = 0;
    while out.len() < chars {
        let len = rng.random_range(4..22);
        for i in 0..len {
            let w = &words[zipf.sample(&mut rng)];
            let w = if i == 0 || rng.random_bool(0.03) { capitalize(w) } else { w.clone() };
            out.push_str(&w);
            if rng.random_bool(0.015) {
                out.push(' ');
                out.push_str(&rng.random_range(1..2030u32).to_string());
            }
            if i + 1 < len {
                out.push_str(if rng.random_bool(0.07) { ", " } else { " " });
            }
        }
        out.push_str([".", ".", ".", ".", "?", "!", ";"][rng.random_range(0..7)]);
        sentences_in_par += 1;
        if sentences_in_par >= rng.random_range(3..9) {
            out.push('\n');
            sentences_in_par = 0;
        } else {
            out.push(' ');
        }
    }
    out
}

/// Random text over a small alphabet. Half the draws are i.i.d. characters,
/// half are concatenations of a few random "words" so repeated structure and
/// count ties both occur.
pub fn small_corpus(rng: &mut impl Rng, max_len: usize, max_alphabet: usize) -> String {
    const POOL: &[char] = &[
        'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i', 'j', 'k', 'l', 'm', ' ', '\n', 'é', 'ß',
        'Ω', 'ж', '中', '😀', '.', ',', '0', '1',
    ];
    let k = rng.random_range(1..=max_alphabet.min(POOL.len()));
    let mut alphabet: Vec<char> = POOL.to_vec();
    for i in 0..k {
        let j = rng.random_range(i..alphabet.len());
        alphabet.swap(i, j);
    }
    alphabet.truncate(k);
    let len = rng.random_range(1..=max_len);
    let mut out = String::new();
    if rng.random_bool(0.5) {
        for _ in 0..len {
            out.push(alphabet[rng.random_range(0..k)]);
        }
    } else {
        let words: Vec<String> = (0..rng.random_range(1..12))
            .map(|_| {
                (0..rng.random_range(1..7))
                    .map(|_| alphabet[rng.random_range(0..k)])
                    .collect()
            })
            .collect();
        while out.chars().count() < len {
            out.push_str(&words[rng.random_range(0..words.len())]);
        }
        out = out.chars().take(len).collect();
    }
    out
}
