//! Deterministic synthetic languages with known answers.
//!
//! [`Cipher`] is a substitution script with a few digraphs, used to check
//! that training recovers a known mapping. [`bilingual_world`] builds two
//! lexicons, a dictionary and clustered embeddings with planted true and
//! false friends.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::ingest::Lexicon;
use crate::model::{PiecePair, TransliterationModel};
use crate::semantics::{EmbeddingTable, TranslationDict};

const SOURCE_CHARS: &str = "abcdefghijklmnopqrstuvwxyzäöüé";
const DIGRAPHS: [&str; 3] = ["sh", "ch", "th"];

/// Source letters map one-to-one onto Cyrillic-range letters; three
/// digraphs map to letters of their own. Application is greedy left to
/// right, digraphs first.
#[derive(Debug, Clone)]
pub struct Cipher {
    units: BTreeMap<String, char>,
    source: Vec<char>,
    digraph_prob: f64,
}

impl Default for Cipher {
    fn default() -> Self {
        Cipher::new()
    }
}

impl Cipher {
    pub fn new() -> Self {
        let source: Vec<char> = SOURCE_CHARS.chars().collect();
        let mut units = BTreeMap::new();
        let mut next = 0x430u32;
        let mut take = || {
            let c = char::from_u32(next).expect("valid code point");
            next += 1;
            c
        };
        for &c in &source {
            units.insert(c.to_string(), take());
        }
        for d in DIGRAPHS {
            units.insert(d.to_string(), take());
        }
        Cipher {
            units,
            source,
            digraph_prob: 0.1,
        }
    }

    pub fn source_alphabet(&self) -> &[char] {
        &self.source
    }

    pub fn target_alphabet(&self) -> Vec<char> {
        self.units.values().copied().collect()
    }

    pub fn apply(&self, s: &str) -> String {
        let chars: Vec<char> = s.chars().collect();
        let mut out = String::new();
        let mut i = 0;
        while i < chars.len() {
            if i + 1 < chars.len() {
                let pair: String = chars[i..i + 2].iter().collect();
                if let Some(&c) = self.units.get(&pair) {
                    out.push(c);
                    i += 2;
                    continue;
                }
            }
            match self.units.get(&chars[i].to_string()) {
                Some(&c) => out.push(c),
                None => out.push(chars[i]),
            }
            i += 1;
        }
        out
    }

    /// A name of `min_units..=max_units` units, each a digraph with
    /// probability 0.1 and a single letter otherwise.
    pub fn random_name(&self, rng: &mut impl Rng, min_units: usize, max_units: usize) -> String {
        let n = rng.gen_range(min_units..=max_units);
        (0..n)
            .map(|_| {
                if rng.gen_bool(self.digraph_prob) {
                    DIGRAPHS.choose(rng).unwrap().to_string()
                } else {
                    self.source.choose(rng).unwrap().to_string()
                }
            })
            .collect()
    }

    /// `n` distinct source names with their cipher forms.
    pub fn pairs(&self, n: usize, seed: u64) -> Vec<(String, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = FxHashSet::default();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let name = self.random_name(&mut rng, 3, 8);
            if seen.insert(name.clone()) {
                let t = self.apply(&name);
                out.push((name, t));
            }
        }
        out
    }

    /// Replace the target of a `fraction` of pairs with an unrelated random
    /// string over the target alphabet. Returns the noisy pairs and a flag
    /// per pair marking the replaced ones.
    pub fn add_noise(
        &self,
        pairs: &[(String, String)],
        fraction: f64,
        seed: u64,
    ) -> (Vec<(String, String)>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (pairs.len() as f64 * fraction).round() as usize;
        let mut idx: Vec<usize> = (0..pairs.len()).collect();
        idx.shuffle(&mut rng);
        let noisy: BTreeSet<usize> = idx[..k].iter().copied().collect();
        let alphabet = self.target_alphabet();
        let mut flags = vec![false; pairs.len()];
        let out = pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| {
                if noisy.contains(&i) {
                    flags[i] = true;
                    let len = rng.gen_range(3..=8);
                    let junk: String = (0..len)
                        .map(|_| *alphabet.choose(&mut rng).unwrap())
                        .collect();
                    (s.clone(), junk)
                } else {
                    (s.clone(), t.clone())
                }
            })
            .collect();
        (out, flags)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub concepts: usize,
    /// Lexically similar pairs that are translations.
    pub planted: usize,
    /// Lexically similar pairs that are not.
    pub false_friends: usize,
    pub cluster_size: usize,
    pub dim: usize,
    /// Chance an ordinary concept is in the dictionary; planted pairs always are.
    pub dict_coverage: f64,
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            concepts: 5000,
            planted: 500,
            false_friends: 150,
            cluster_size: 301,
            dim: 32,
            dict_coverage: 0.8,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BilingualWorld {
    pub lex_src: Lexicon,
    pub lex_tgt: Lexicon,
    pub dict: TranslationDict,
    pub emb_src: EmbeddingTable,
    pub emb_tgt: EmbeddingTable,
    /// Near-identity cost model shared by both languages' spelling.
    pub model: TransliterationModel,
    pub true_friends: Vec<(String, String)>,
    pub false_friends: Vec<(String, String)>,
}

const WORLD_LETTERS: &str = "abcdefghijklmnopqrst";
const SOUND_CHANGES: [(char, char); 3] = [('c', 'k'), ('f', 'p'), ('t', 'd')];

fn random_word(rng: &mut ChaCha8Rng, letters: &[char]) -> String {
    let len = rng.gen_range(6..=9);
    (0..len).map(|_| *letters.choose(rng).unwrap()).collect()
}

/// One cheap edit: a sound change, an insertion, a deletion, or nothing.
fn perturb(rng: &mut ChaCha8Rng, w: &str, letters: &[char]) -> String {
    let mut cs: Vec<char> = w.chars().collect();
    match rng.gen_range(0..4) {
        0 => {
            let spots: Vec<usize> = (0..cs.len())
                .filter(|&i| SOUND_CHANGES.iter().any(|(a, _)| *a == cs[i]))
                .collect();
            if let Some(&i) = spots.choose(rng) {
                cs[i] = SOUND_CHANGES.iter().find(|(a, _)| *a == cs[i]).unwrap().1;
            }
        }
        1 => {
            let at = rng.gen_range(0..=cs.len());
            cs.insert(at, *letters.choose(rng).unwrap());
        }
        2 => {
            let at = rng.gen_range(0..cs.len());
            cs.remove(at);
        }
        _ => {}
    }
    cs.into_iter().collect()
}

/// Two languages over the same letters. Concept `k` has word `k` in each
/// lexicon and sits in embedding cluster `k / cluster_size` on both sides.
/// Planted true friends spell concept `k` alike in both languages; a false
/// friend spells concept `j`'s target word like concept `k`'s source word
/// for `j` and `k` in different clusters.
pub fn bilingual_world(cfg: &WorldConfig) -> BilingualWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let letters: Vec<char> = WORLD_LETTERS.chars().collect();
    let mut used_src = FxHashSet::default();
    let mut used_tgt = FxHashSet::default();
    let fresh = |rng: &mut ChaCha8Rng, used: &mut FxHashSet<String>| loop {
        let w = random_word(rng, &letters);
        if used.insert(w.clone()) {
            return w;
        }
    };
    let src: Vec<String> = (0..cfg.concepts)
        .map(|_| fresh(&mut rng, &mut used_src))
        .collect();
    let mut tgt: Vec<Option<String>> = vec![None; cfg.concepts];

    // only whole clusters host planted pairs, so neighbour sets stay inside one cluster
    let full = (cfg.concepts / cfg.cluster_size) * cfg.cluster_size;
    let mut pool: Vec<usize> = (0..full).collect();
    pool.shuffle(&mut rng);
    let mut pool = pool.into_iter();
    let mut true_friends = Vec::new();
    let mut planted_ids = BTreeSet::new();
    while true_friends.len() < cfg.planted {
        let Some(k) = pool.next() else { break };
        let w = perturb(&mut rng, &src[k], &letters);
        if w.chars().count() >= 5 && used_tgt.insert(w.clone()) {
            tgt[k] = Some(w.clone());
            planted_ids.insert(k);
            true_friends.push((src[k].clone(), w));
        }
    }
    let mut false_friends = Vec::new();
    let mut rest: Vec<usize> = pool.collect();
    while false_friends.len() < cfg.false_friends && rest.len() >= 2 {
        let k = rest.pop().unwrap();
        let Some(pos) = rest
            .iter()
            .position(|&j| j / cfg.cluster_size != k / cfg.cluster_size)
        else {
            break;
        };
        let j = rest.swap_remove(pos);
        let w = perturb(&mut rng, &src[k], &letters);
        if w.chars().count() >= 5 && used_tgt.insert(w.clone()) {
            tgt[j] = Some(w.clone());
            false_friends.push((src[k].clone(), w));
        }
    }
    let tgt: Vec<String> = tgt
        .into_iter()
        .map(|w| w.unwrap_or_else(|| fresh(&mut rng, &mut used_tgt)))
        .collect();

    let dict = TranslationDict::new((0..cfg.concepts).filter_map(|k| {
        let keep = planted_ids.contains(&k) || rng.gen_bool(cfg.dict_coverage);
        keep.then(|| (src[k].clone(), tgt[k].clone()))
    }));

    let clusters = cfg.concepts.div_ceil(cfg.cluster_size);
    let centers: Vec<Vec<f64>> = (0..clusters)
        .map(|g| {
            (0..cfg.dim)
                .map(|d| if d % clusters.max(1) == g { 10.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut embed = |lang: &str, words: &[String]| {
        let mut e = EmbeddingTable::new(lang, cfg.dim);
        for (k, w) in words.iter().enumerate() {
            let v: Vec<f64> = centers[k / cfg.cluster_size]
                .iter()
                .map(|c| c + rng.gen_range(-1.0..1.0))
                .collect();
            e.insert(w, &v).expect("dimension matches");
        }
        e
    };
    let emb_src = embed("xs", &src);
    let emb_tgt = embed("xt", &tgt);

    let mut model = TransliterationModel::new("xs", "xt", 3);
    for &c in &letters {
        model
            .set_cost(PiecePair::new(c.to_string(), c.to_string()), 0.01)
            .expect("valid cost");
    }
    for (a, b) in SOUND_CHANGES {
        model
            .set_cost(PiecePair::new(a.to_string(), b.to_string()), 0.5)
            .expect("valid cost");
    }
    model.set_alphabets(
        letters.iter().copied().collect(),
        letters.iter().copied().collect(),
    );

    BilingualWorld {
        lex_src: Lexicon::new(src, "xs"),
        lex_tgt: Lexicon::new(tgt, "xt"),
        dict,
        emb_src,
        emb_tgt,
        model,
        true_friends,
        false_friends,
    }
}
