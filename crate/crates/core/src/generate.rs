//! k-best transliteration construction from the cost matrix alone.
//!
//! The search runs A* over states `(source position, emitted target
//! prefix)`. Edges consume a source piece and emit one of its stored target
//! pieces, delete one source char, or insert a target piece without
//! consuming source. The heuristic is the exact cheapest way to consume the
//! remaining source, ignoring what gets emitted, so it is consistent and
//! final states pop in order of their true minimum cost.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::align::{Alignment, SourceView};
use crate::error::{Error, Result};
use crate::model::TransliterationModel;
use crate::util::{OrdF64, COST_EPS};

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    pub cost: f64,
    pub segmentation: Alignment,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenConfig {
    /// Extra cost allowed above `len(word)`; `None` means `len(word)`.
    pub budget: Option<f64>,
    /// Longest target string considered, in chars.
    pub max_len: Option<usize>,
}

#[derive(Debug, Clone)]
struct Edge {
    next: usize,
    tgt: String,
    cost: f64,
}

/// Symbols a candidate may contain: the model's target alphabet, every char
/// of a stored target piece, and the word's own chars (identity defaults).
pub fn candidate_symbols(m: &TransliterationModel, word: &str) -> BTreeSet<char> {
    let mut out: BTreeSet<char> = m.alphabet_tgt().clone();
    for (p, _) in m.entries() {
        out.extend(p.tgt.chars());
    }
    out.extend(word.chars());
    out
}

struct Lattice {
    // edges leaving node i that consume source
    forward: Vec<Vec<Edge>>,
    // insertions, identical at every node
    inserts: Vec<(String, f64)>,
    // cheapest way to consume source i..
    heuristic: Vec<f64>,
}

impl Lattice {
    fn build(m: &TransliterationModel, word: &str) -> Lattice {
        let view = SourceView::new(m, word);
        let n = view.len();
        let lmax = m.lmax();

        let mut forward: Vec<Vec<Edge>> = vec![Vec::new(); n];
        for (i, edges) in forward.iter_mut().enumerate() {
            for a in 1..=lmax.min(n - i) {
                if let Some(row) = view.stored_row(i, a) {
                    for (tgt, &cost) in row {
                        edges.push(Edge {
                            next: i + a,
                            tgt: tgt.to_string(),
                            cost,
                        });
                    }
                }
            }
            let has_del = view.stored_row(i, 1).is_some_and(|r| r.contains_key(""));
            if !has_del {
                edges.push(Edge {
                    next: i + 1,
                    tgt: String::new(),
                    cost: 1.0,
                });
            }
            // sorted so expansion order never depends on hash order
            edges.sort_by(|x, y| x.next.cmp(&y.next).then_with(|| x.tgt.cmp(&y.tgt)));
        }

        let stored_ins = m.targets("");
        let mut inserts: FxHashMap<String, f64> = FxHashMap::default();
        if let Some(row) = stored_ins {
            for (t, &c) in row {
                inserts.insert(t.to_string(), c);
            }
        }
        for c in candidate_symbols(m, word) {
            inserts.entry(c.to_string()).or_insert(1.0);
        }
        let mut inserts: Vec<(String, f64)> = inserts.into_iter().collect();
        inserts.sort_by(|a, b| a.0.cmp(&b.0));

        let mut heuristic = vec![0.0; n + 1];
        for i in (0..n).rev() {
            heuristic[i] = forward[i]
                .iter()
                .map(|e| e.cost + heuristic[e.next])
                .fold(f64::INFINITY, f64::min);
        }
        Lattice {
            forward,
            inserts,
            heuristic,
        }
    }
}

/// The `k` distinct non-empty target strings of least alignment cost to
/// `word`, cheapest first, ties broken lexicographically. Only strings with
/// cost at most `len(word) + budget` are considered, so fewer than `k` may
/// come back.
pub fn construct_topk(
    m: &TransliterationModel,
    word: &str,
    k: usize,
    cfg: &GenConfig,
) -> Result<Vec<Candidate>> {
    if k < 1 {
        return Err(Error::contract("k must be at least 1"));
    }
    if word.is_empty() {
        return Err(Error::contract("cannot transliterate an empty word"));
    }
    let n = word.chars().count();
    let bound = n as f64 + cfg.budget.unwrap_or(n as f64);
    let max_len = cfg.max_len.unwrap_or(usize::MAX);
    let lattice = Lattice::build(m, word);

    type Entry = Reverse<(OrdF64, String, usize, OrdF64)>;
    let mut heap: BinaryHeap<Entry> = BinaryHeap::new();
    let mut done: FxHashSet<(usize, String)> = FxHashSet::default();
    let mut finals: Vec<String> = Vec::new();
    let mut cutoff = f64::INFINITY;

    heap.push(Reverse((
        OrdF64(lattice.heuristic[0]),
        String::new(),
        0,
        OrdF64(0.0),
    )));
    while let Some(Reverse((OrdF64(f), prefix, node, OrdF64(g)))) = heap.pop() {
        if f > cutoff + COST_EPS {
            break;
        }
        if !done.insert((node, prefix.clone())) {
            continue;
        }
        if node == n && !prefix.is_empty() {
            finals.push(prefix.clone());
            if finals.len() == k {
                cutoff = f;
            }
        }
        let prefix_len = prefix.chars().count();
        let mut push = |next: usize, tgt: &str, cost: f64| {
            let g2 = g + cost;
            let f2 = g2 + lattice.heuristic[next];
            if f2 > bound + COST_EPS || prefix_len + tgt.chars().count() > max_len {
                return;
            }
            let text = format!("{prefix}{tgt}");
            if done.contains(&(next, text.clone())) {
                return;
            }
            heap.push(Reverse((OrdF64(f2), text, next, OrdF64(g2))));
        };
        if node < n {
            for e in &lattice.forward[node] {
                push(e.next, &e.tgt, e.cost);
            }
        }
        for (tgt, cost) in &lattice.inserts {
            push(node, tgt, *cost);
        }
    }

    // Rescore with the canonical alignment so costs and segmentations agree
    // with `align` exactly.
    let view = SourceView::new(m, word);
    let mut out: Vec<Candidate> = finals
        .into_iter()
        .map(|text| {
            let segmentation = crate::align::align_view(&view, word, &text);
            Candidate {
                cost: segmentation.total_cost,
                text,
                segmentation,
            }
        })
        .collect();
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.text.cmp(&b.text)));
    out.truncate(k);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotCandidate {
    pub text: String,
    pub cost: f64,
    /// The intermediate (pivot-language) string on the cheapest route.
    pub via: String,
}

/// Transliterate through a pivot language: `beam` intermediates from the
/// first model, `beam` expansions of each with the second, summed costs.
pub fn pivot_topk(
    first: &TransliterationModel,
    second: &TransliterationModel,
    word: &str,
    k: usize,
    beam: usize,
    cfg: &GenConfig,
) -> Result<Vec<PivotCandidate>> {
    if beam < k {
        return Err(Error::contract(format!("beam {beam} smaller than k {k}")));
    }
    let mids = construct_topk(first, word, beam, cfg)?;
    let mut best: FxHashMap<String, PivotCandidate> = FxHashMap::default();
    for mid in mids {
        for c in construct_topk(second, &mid.text, beam, cfg)? {
            let cost = mid.cost + c.cost;
            let better = best
                .get(&c.text)
                .is_none_or(|old| cost < old.cost || (cost == old.cost && mid.text < old.via));
            if better {
                best.insert(
                    c.text.clone(),
                    PivotCandidate {
                        text: c.text,
                        cost,
                        via: mid.text.clone(),
                    },
                );
            }
        }
    }
    let mut out: Vec<PivotCandidate> = best.into_values().collect();
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.text.cmp(&b.text)));
    out.truncate(k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::align;
    use crate::model::PiecePair;

    fn model(entries: &[(&str, &str, f64)], tgt_alpha: &str) -> TransliterationModel {
        let mut m = TransliterationModel::new("x", "y", 3);
        for &(s, t, c) in entries {
            m.set_cost(PiecePair::new(s, t), c).unwrap();
        }
        m.set_alphabets(BTreeSet::new(), tgt_alpha.chars().collect());
        m
    }

    #[test]
    fn single_learned_pair() {
        let m = model(&[("a", "α", 0.1)], "α");
        let c = construct_topk(&m, "a", 1, &GenConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].text, "α");
        assert_eq!(c[0].cost, 0.1);
    }

    #[test]
    fn identity_model() {
        let m = model(
            &[("a", "a", 0.01), ("b", "b", 0.01), ("c", "c", 0.01)],
            "abc",
        );
        let c = construct_topk(&m, "abc", 1, &GenConfig::default()).unwrap();
        assert_eq!(c[0].text, "abc");
    }

    #[test]
    fn two_options_per_char() {
        let m = model(
            &[
                ("a", "x", 0.25),
                ("a", "y", 0.5),
                ("b", "u", 0.125),
                ("b", "v", 0.75),
            ],
            "xyuv",
        );
        let c = construct_topk(&m, "ab", 3, &GenConfig::default()).unwrap();
        // products: xu .375, yu .625, xv 1.0, yv 1.25
        let got: Vec<(&str, f64)> = c.iter().map(|c| (c.text.as_str(), c.cost)).collect();
        assert_eq!(got, vec![("xu", 0.375), ("yu", 0.625), ("xv", 1.0)]);
        for cand in &c {
            assert_eq!(align(&m, "ab", &cand.text).unwrap().total_cost, cand.cost);
        }
    }

    #[test]
    fn bad_arguments() {
        let m = model(&[], "a");
        assert!(construct_topk(&m, "a", 0, &GenConfig::default()).is_err());
        assert!(construct_topk(&m, "", 1, &GenConfig::default()).is_err());
        assert!(pivot_topk(&m, &m, "a", 5, 2, &GenConfig::default()).is_err());
    }

    #[test]
    fn pivot_chain() {
        let m1 = model(&[("a", "b", 0.1)], "b");
        let m2 = model(&[("b", "c", 0.1)], "c");
        let out = pivot_topk(&m1, &m2, "a", 1, 1, &GenConfig::default()).unwrap();
        assert_eq!(out[0].text, "c");
        assert_eq!(out[0].via, "b");
        assert!((out[0].cost - 0.2).abs() < 1e-12);
    }

    #[test]
    fn pivot_identity_and_beam_one() {
        let id = model(&[("a", "a", 0.01), ("b", "b", 0.01)], "ab");
        let out = pivot_topk(&id, &id, "ab", 3, 15, &GenConfig::default()).unwrap();
        assert_eq!(out[0].text, "ab");

        let m1 = model(&[("a", "p", 0.25), ("a", "q", 0.5)], "pq");
        let m2 = model(&[("p", "z", 1.0), ("q", "w", 0.125)], "zw");
        let cfg = GenConfig::default();
        let best1 = construct_topk(&m1, "a", 1, &cfg).unwrap();
        let best2 = construct_topk(&m2, &best1[0].text, 1, &cfg).unwrap();
        let out = pivot_topk(&m1, &m2, "a", 1, 1, &cfg).unwrap();
        assert_eq!(out[0].text, best2[0].text);
        assert_eq!(out[0].cost, best1[0].cost + best2[0].cost);
    }

    #[test]
    fn costs_nondecreasing_and_coherent() {
        let m = model(
            &[
                ("sh", "ш", 0.3),
                ("s", "с", 0.4),
                ("h", "х", 0.5),
                ("a", "а", 0.2),
            ],
            "шсха",
        );
        let c = construct_topk(&m, "sasha", 50, &GenConfig::default()).unwrap();
        assert_eq!(c.len(), 50);
        assert_eq!(c[0].text, "саша");
        for w in c.windows(2) {
            assert!(w[0].cost <= w[1].cost);
        }
        for cand in &c {
            assert_eq!(
                align(&m, "sasha", &cand.text).unwrap().total_cost,
                cand.cost
            );
        }
    }
}
