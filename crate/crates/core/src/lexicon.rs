//! Detected-best search: the lexicon words closest to a query under the
//! learned cost, and the rank of a gold reference among them.

use rayon::prelude::*;

use crate::align::BoundedScorer;
use crate::error::{Error, Result};
use crate::ingest::Lexicon;
use crate::model::TransliterationModel;
use crate::util::COST_EPS;

const CHUNK: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub word: String,
    pub cost: f64,
    /// Position in the lexicon (frequency order).
    pub index: usize,
}

fn by_cost_then_index(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Words whose approximate cost is within slack of the chunk's kth best.
fn scan_chunk(
    m: &TransliterationModel,
    word: &str,
    words: &[String],
    offset: usize,
    k: usize,
) -> Vec<(f64, usize)> {
    let mut scorer = BoundedScorer::new(m, word);
    let mut kept: Vec<(f64, usize)> = Vec::new();
    let mut threshold = f64::INFINITY;
    for (i, w) in words.iter().enumerate() {
        if let Some(c) = scorer.score(w, threshold + COST_EPS) {
            kept.push((c, offset + i));
            if kept.len() >= 2 * k.max(16) {
                kept.sort_by(by_cost_then_index);
                threshold = kept[k - 1].0;
                kept.retain(|x| x.0 <= threshold + COST_EPS);
            }
        }
    }
    kept
}

/// The `k` lexicon words of least alignment cost to `word`, ties broken by
/// lexicon order. Exact: pruning only discards words whose lower bound is
/// already above the current kth best.
pub fn detect_best(
    m: &TransliterationModel,
    lex: &Lexicon,
    word: &str,
    k: usize,
) -> Result<Vec<Match>> {
    if lex.is_empty() {
        return Err(Error::Empty("lexicon has no words".into()));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if word.is_empty() {
        return Err(Error::contract("cannot match an empty word"));
    }
    let mut pooled: Vec<(f64, usize)> = lex
        .words
        .par_chunks(CHUNK)
        .enumerate()
        .flat_map_iter(|(ci, chunk)| scan_chunk(m, word, chunk, ci * CHUNK, k))
        .collect();
    pooled.sort_by(by_cost_then_index);
    if pooled.len() > k {
        let kth = pooled[k - 1].0;
        pooled.retain(|x| x.0 <= kth + 2.0 * COST_EPS);
    }
    // exact rescoring so ties and order match a plain `align_cost` scan
    let scorer = BoundedScorer::new(m, word);
    let mut exact: Vec<(f64, usize)> = pooled
        .into_iter()
        .map(|(_, i)| (scorer.exact_cost(&lex.words[i]), i))
        .collect();
    exact.sort_by(by_cost_then_index);
    exact.truncate(k);
    Ok(exact
        .into_iter()
        .map(|(cost, index)| Match {
            word: lex.words[index].clone(),
            cost,
            index,
        })
        .collect())
}

/// 1-based rank of `gold` in the whole lexicon sorted by cost (ties by
/// lexicon order); `None` when `gold` is not a lexicon word.
pub fn rank_of(
    m: &TransliterationModel,
    lex: &Lexicon,
    word: &str,
    gold: &str,
) -> Result<Option<usize>> {
    let Some(gold_idx) = lex.position(gold) else {
        return Ok(None);
    };
    if word.is_empty() {
        return Err(Error::contract("cannot match an empty word"));
    }
    let gold_cost = BoundedScorer::new(m, word).exact_cost(gold);
    let ahead: usize = lex
        .words
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            let mut scorer = BoundedScorer::new(m, word);
            chunk
                .iter()
                .enumerate()
                .filter(|&(i, w)| {
                    let idx = ci * CHUNK + i;
                    if idx == gold_idx {
                        return false;
                    }
                    match scorer.score(w, gold_cost + COST_EPS) {
                        None => false,
                        Some(_) => {
                            let c = scorer.exact_cost(w);
                            c < gold_cost || (c == gold_cost && idx < gold_idx)
                        }
                    }
                })
                .count()
        })
        .sum();
    Ok(Some(ahead + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::align_cost;
    use crate::model::PiecePair;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lex(words: &[&str]) -> Lexicon {
        Lexicon::new(words.iter().map(|w| w.to_string()), "y")
    }

    #[test]
    fn identity_self_match() {
        let mut m = TransliterationModel::new("x", "y", 3);
        for c in "abc".chars() {
            m.set_cost(PiecePair::new(c.to_string(), c.to_string()), 0.01)
                .unwrap();
        }
        let out = detect_best(&m, &lex(&["cab"]), "cab", 1).unwrap();
        assert_eq!(out[0].word, "cab");
        assert!(out[0].cost < 0.05);
    }

    #[test]
    fn k_larger_than_lexicon() {
        let m = TransliterationModel::new("x", "y", 3);
        let l = lex(&["abcd", "a", "ab"]);
        let out = detect_best(&m, &l, "q", 10).unwrap();
        let words: Vec<&str> = out.iter().map(|m| m.word.as_str()).collect();
        assert_eq!(words, ["a", "ab", "abcd"]);
        assert!(detect_best(&m, &lex(&[]), "q", 1).is_err());
    }

    #[test]
    fn rank_with_hand_set_costs() {
        let mut m = TransliterationModel::new("x", "y", 3);
        m.set_cost(PiecePair::new("q", "a"), 0.5).unwrap();
        m.set_cost(PiecePair::new("q", "b"), 1.0).unwrap();
        // "c" stays at the default 2.0
        let l = lex(&["c", "b", "a"]);
        assert_eq!(rank_of(&m, &l, "q", "b").unwrap(), Some(2));
        assert_eq!(rank_of(&m, &l, "q", "a").unwrap(), Some(1));
        assert_eq!(rank_of(&m, &l, "q", "c").unwrap(), Some(3));
        assert_eq!(rank_of(&m, &l, "q", "zzz").unwrap(), None);
    }

    fn random_model(rng: &mut ChaCha8Rng) -> TransliterationModel {
        let src: Vec<char> = "abcd".chars().collect();
        let tgt: Vec<char> = "wxyz".chars().collect();
        let mut m = TransliterationModel::new("x", "y", 3);
        let piece = |rng: &mut ChaCha8Rng, alpha: &[char], max: usize| -> String {
            let n = rng.gen_range(0..=max);
            (0..n)
                .map(|_| alpha[rng.gen_range(0..alpha.len())])
                .collect()
        };
        for _ in 0..60 {
            let p = PiecePair::new(piece(rng, &src, 2), piece(rng, &tgt, 2));
            if p.src.is_empty() && p.tgt.is_empty() {
                continue;
            }
            let c = rng.gen_range(0.05..1.0) * p.init_cost();
            m.set_cost(p, c).unwrap();
        }
        m
    }

    #[test]
    fn exact_against_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tgt: Vec<char> = "wxyz".chars().collect();
        for _ in 0..5 {
            let m = random_model(&mut rng);
            let words: Vec<String> = (0..1000)
                .map(|_| {
                    let n = rng.gen_range(1..=7);
                    (0..n).map(|_| tgt[rng.gen_range(0..4)]).collect()
                })
                .collect();
            let l = Lexicon::new(words, "y");
            let query: String = (0..5)
                .map(|_| ['a', 'b', 'c', 'd'][rng.gen_range(0..4)])
                .collect();
            let mut naive: Vec<(f64, usize)> = l
                .words
                .iter()
                .enumerate()
                .map(|(i, w)| (align_cost(&m, &query, w).unwrap(), i))
                .collect();
            naive.sort_by(by_cost_then_index);
            for k in [1, 10, 100, l.len()] {
                let got: Vec<(f64, usize)> = detect_best(&m, &l, &query, k)
                    .unwrap()
                    .into_iter()
                    .map(|m| (m.cost, m.index))
                    .collect();
                assert_eq!(got, naive[..k.min(naive.len())].to_vec());
            }
            for probe in [0, 17, 500] {
                let gold = &l.words[probe];
                let pos = naive.iter().position(|x| x.1 == probe).unwrap() + 1;
                assert_eq!(rank_of(&m, &l, &query, gold).unwrap(), Some(pos));
            }
        }
    }
}
