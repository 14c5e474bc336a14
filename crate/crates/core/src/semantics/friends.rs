use std::collections::BinaryHeap;
use std::fmt::{self, Write as _};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};

use super::embed::{count_links, EmbeddingTable, TranslationDict};
use crate::align::{align_cost, BoundedScorer};
use crate::error::{Error, Result};
use crate::ingest::Lexicon;
use crate::model::TransliterationModel;
use crate::util::{OrdF64, COST_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FriendClass {
    /// Dictionary only.
    Tp,
    /// Embedding links only.
    Ep,
    /// Both tests.
    B,
    /// Neither.
    N,
}

impl FriendClass {
    pub fn from_flags(has_translation: bool, passes_embedding: bool) -> Self {
        match (has_translation, passes_embedding) {
            (true, false) => FriendClass::Tp,
            (false, true) => FriendClass::Ep,
            (true, true) => FriendClass::B,
            (false, false) => FriendClass::N,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FriendClass::Tp => "TP",
            FriendClass::Ep => "EP",
            FriendClass::B => "B",
            FriendClass::N => "N",
        }
    }
}

impl fmt::Display for FriendClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cohort {
    /// Cost at most `d_max`.
    A,
    /// The next cheapest pairs after cohort A.
    B,
}

impl Cohort {
    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::A => "A",
            Cohort::B => "B",
        }
    }
}

/// Which signals make a pair a predicted true friend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FriendPolicy {
    #[default]
    Either,
    Translation,
    Embedding,
    Both,
}

impl FriendPolicy {
    pub fn predicts(self, r: &FriendRecord) -> bool {
        match self {
            FriendPolicy::Either => r.has_translation || r.passes_embedding,
            FriendPolicy::Translation => r.has_translation,
            FriendPolicy::Embedding => r.passes_embedding,
            FriendPolicy::Both => r.has_translation && r.passes_embedding,
        }
    }
}

impl std::str::FromStr for FriendPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "either" => Ok(FriendPolicy::Either),
            "translation" => Ok(FriendPolicy::Translation),
            "embedding" => Ok(FriendPolicy::Embedding),
            "both" => Ok(FriendPolicy::Both),
            _ => Err(Error::Config(format!(
                "unknown policy {s:?} (either, translation, embedding, both)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriendConfig {
    pub d_max: f64,
    pub next_cohort: usize,
    /// Neighbours per word in the embedding test.
    pub n: usize,
    pub tau: usize,
    /// Minimum word length in chars, both sides.
    pub min_len: usize,
}

impl Default for FriendConfig {
    fn default() -> Self {
        FriendConfig {
            d_max: 2.0,
            next_cohort: 10_000,
            n: 300,
            tau: 3,
            min_len: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriendRecord {
    pub w_src: String,
    pub w_tgt: String,
    pub lex_cost: f64,
    pub has_translation: bool,
    pub passes_embedding: bool,
    pub link_count: usize,
    /// A word lacked a vector, so the embedding test failed closed.
    pub embedding_missing: bool,
    pub class: FriendClass,
    pub cohort: Cohort,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSummary {
    pub cohort: Cohort,
    pub pairs: usize,
    pub translation_fraction: f64,
    pub median_link_count: f64,
    /// Pairs left after dropping link counts below the median.
    pub pruned_pairs: usize,
    pub pruned_translation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FriendScan {
    /// Cohort A then cohort B, each by ascending cost.
    pub records: Vec<FriendRecord>,
    pub summary: Vec<CohortSummary>,
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn median(mut xs: Vec<usize>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_unstable();
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid] as f64
    } else {
        (xs[mid - 1] + xs[mid]) as f64 / 2.0
    }
}

fn summarize(cohort: Cohort, records: &[FriendRecord]) -> CohortSummary {
    let rs: Vec<&FriendRecord> = records.iter().filter(|r| r.cohort == cohort).collect();
    let med = median(rs.iter().map(|r| r.link_count).collect());
    let kept: Vec<&&FriendRecord> = rs.iter().filter(|r| r.link_count as f64 >= med).collect();
    CohortSummary {
        cohort,
        pairs: rs.len(),
        translation_fraction: fraction(rs.iter().filter(|r| r.has_translation).count(), rs.len()),
        median_link_count: med,
        pruned_pairs: kept.len(),
        pruned_translation_fraction: fraction(
            kept.iter().filter(|r| r.has_translation).count(),
            kept.len(),
        ),
    }
}

type Hit = (OrdF64, usize, usize);

/// Keeps the `cap` smallest hits; `bound` mirrors the current largest kept
/// cost once full so scanners can abandon anything above it.
struct NextCohort {
    cap: usize,
    heap: Mutex<BinaryHeap<Hit>>,
    bound: AtomicU64,
}

impl NextCohort {
    fn new(cap: usize) -> Self {
        NextCohort {
            cap,
            heap: Mutex::new(BinaryHeap::with_capacity(cap + 1)),
            bound: AtomicU64::new(f64::INFINITY.to_bits()),
        }
    }

    fn bound(&self) -> f64 {
        f64::from_bits(self.bound.load(Ordering::Relaxed))
    }

    fn offer(&self, hit: Hit) {
        if self.cap == 0 {
            return;
        }
        let mut heap = self.heap.lock().expect("cohort heap poisoned");
        if heap.len() < self.cap {
            heap.push(hit);
        } else if hit < *heap.peek().unwrap() {
            heap.pop();
            heap.push(hit);
        } else {
            return;
        }
        if heap.len() == self.cap {
            self.bound
                .store(heap.peek().unwrap().0 .0.to_bits(), Ordering::Relaxed);
        }
    }
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Missing(format!("{what} is empty")))
    }
}

/// Scan every cross-lexicon pair, form the two cost cohorts, and run both
/// semantic tests on each member.
pub fn scan_friends(
    m: &TransliterationModel,
    lex_src: &Lexicon,
    lex_tgt: &Lexicon,
    dict: &TranslationDict,
    e_src: &EmbeddingTable,
    e_tgt: &EmbeddingTable,
    cfg: &FriendConfig,
) -> Result<FriendScan> {
    require(!lex_src.is_empty(), "source lexicon")?;
    require(!lex_tgt.is_empty(), "target lexicon")?;
    require(!dict.is_empty(), "translation dictionary")?;
    require(!e_src.is_empty(), "source embeddings")?;
    require(!e_tgt.is_empty(), "target embeddings")?;
    if cfg.d_max.is_nan() || cfg.d_max < 0.0 {
        return Err(Error::Config("d_max must be non-negative".into()));
    }

    let long_enough = |lex: &Lexicon| -> Vec<usize> {
        (0..lex.len())
            .filter(|&i| lex.words[i].chars().count() >= cfg.min_len)
            .collect()
    };
    let src_ids = long_enough(lex_src);
    let tgt_ids = long_enough(lex_tgt);
    let next = NextCohort::new(cfg.next_cohort);
    let d_max = cfg.d_max;

    let mut hits: Vec<Hit> = src_ids
        .par_iter()
        .flat_map_iter(|&i| {
            let mut scorer = BoundedScorer::new(m, &lex_src.words[i]);
            let mut near = Vec::new();
            for &j in &tgt_ids {
                let cut = d_max.max(next.bound()) + COST_EPS;
                if let Some(c) = scorer.score(&lex_tgt.words[j], cut) {
                    if c <= d_max + COST_EPS {
                        near.push((OrdF64(c), i, j));
                    } else {
                        next.offer((OrdF64(c), i, j));
                    }
                }
            }
            near
        })
        .collect();
    hits.extend(next.heap.into_inner().expect("cohort heap poisoned"));

    // exact costs decide membership and order
    let mut scored: Vec<(f64, usize, usize)> = hits
        .par_iter()
        .map(|&(_, i, j)| {
            let c = align_cost(m, &lex_src.words[i], &lex_tgt.words[j])?;
            Ok((c, i, j))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let n_a = scored.iter().take_while(|x| x.0 <= d_max).count();
    scored.truncate(n_a + cfg.next_cohort);

    let neighbours = |e: &EmbeddingTable, words: Vec<&str>| -> FxHashMap<usize, Vec<usize>> {
        let ids: FxHashSet<usize> = words.into_iter().filter_map(|w| e.id(w)).collect();
        let mut ids: Vec<usize> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.into_par_iter()
            .map(|id| (id, e.neighbor_ids(id, cfg.n)))
            .collect()
    };
    let nn_src = neighbours(
        e_src,
        scored.iter().map(|x| lex_src.words[x.1].as_str()).collect(),
    );
    let nn_tgt = neighbours(
        e_tgt,
        scored.iter().map(|x| lex_tgt.words[x.2].as_str()).collect(),
    );

    let records: Vec<FriendRecord> = scored
        .par_iter()
        .enumerate()
        .map(|(rank, &(cost, i, j))| {
            let (ws, wt) = (&lex_src.words[i], &lex_tgt.words[j]);
            let has_translation = dict.contains(ws, wt);
            let (links, missing) = match (e_src.id(ws), e_tgt.id(wt)) {
                (Some(a), Some(b)) => (
                    count_links(&nn_src[&a], e_src, &nn_tgt[&b], e_tgt, dict),
                    false,
                ),
                _ => (0, true),
            };
            let passes = !missing && links >= cfg.tau;
            FriendRecord {
                w_src: ws.clone(),
                w_tgt: wt.clone(),
                lex_cost: cost,
                has_translation,
                passes_embedding: passes,
                link_count: links,
                embedding_missing: missing,
                class: FriendClass::from_flags(has_translation, passes),
                cohort: if rank < n_a { Cohort::A } else { Cohort::B },
            }
        })
        .collect();
    let summary = vec![
        summarize(Cohort::A, &records),
        summarize(Cohort::B, &records),
    ];
    Ok(FriendScan { records, summary })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub ep: usize,
    pub b: usize,
    pub n: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.tp + self.ep + self.b + self.n
    }

    /// B / (B + TP); above one half means the embedding test confirms most
    /// dictionary-backed pairs.
    pub fn quality_ratio(&self) -> Option<f64> {
        let d = self.b + self.tp;
        (d > 0).then(|| self.b as f64 / d as f64)
    }

    pub fn csv_header() -> &'static str {
        "lang,tp,ep,b,n,b_ratio"
    }

    pub fn csv_row(&self, lang: &str) -> String {
        let ratio = self
            .quality_ratio()
            .map_or_else(|| "nan".to_string(), |r| format!("{r:.3}"));
        format!(
            "{lang},{},{},{},{},{ratio}",
            self.tp, self.ep, self.b, self.n
        )
    }
}

pub fn classify_counts(records: &[FriendRecord]) -> ClassCounts {
    let mut c = ClassCounts::default();
    for r in records {
        match r.class {
            FriendClass::Tp => c.tp += 1,
            FriendClass::Ep => c.ep += 1,
            FriendClass::B => c.b += 1,
            FriendClass::N => c.n += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldScore {
    pub f1: f64,
    pub accuracy: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

/// F1 on the true-friend class and overall accuracy over the gold pairs. A
/// gold pair with no record is predicted false.
pub fn eval_gold(
    records: &[FriendRecord],
    gold_true: &[(String, String)],
    gold_false: &[(String, String)],
    policy: FriendPolicy,
) -> Result<GoldScore> {
    let t: FxHashSet<&(String, String)> = gold_true.iter().collect();
    let f: FxHashSet<&(String, String)> = gold_false.iter().collect();
    if let Some(p) = t.iter().find(|p| f.contains(*p)) {
        return Err(Error::contract(format!(
            "gold pair ({}, {}) is labelled both true and false",
            p.0, p.1
        )));
    }
    let mut predicted: FxHashMap<(&str, &str), bool> = FxHashMap::default();
    for r in records {
        let e = predicted.entry((&r.w_src, &r.w_tgt)).or_insert(false);
        *e |= policy.predicts(r);
    }
    let says = |p: &(String, String)| {
        predicted
            .get(&(p.0.as_str(), p.1.as_str()))
            .copied()
            .unwrap_or(false)
    };
    let mut s = GoldScore {
        f1: 0.0,
        accuracy: 0.0,
        true_pos: 0,
        false_pos: 0,
        false_neg: 0,
        true_neg: 0,
    };
    for p in &t {
        if says(p) {
            s.true_pos += 1;
        } else {
            s.false_neg += 1;
        }
    }
    for p in &f {
        if says(p) {
            s.false_pos += 1;
        } else {
            s.true_neg += 1;
        }
    }
    let denom = 2 * s.true_pos + s.false_pos + s.false_neg;
    s.f1 = fraction(2 * s.true_pos, denom);
    s.accuracy = fraction(s.true_pos + s.true_neg, t.len() + f.len());
    Ok(s)
}

pub fn records_tsv(records: &[FriendRecord]) -> String {
    let mut out = String::from("w_src\tw_tgt\tlex_cost\thas_translation\tlink_count\tclass\n");
    for r in records {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{}",
            r.w_src, r.w_tgt, r.lex_cost, r.has_translation, r.link_count, r.class
        )
        .unwrap();
    }
    out
}

pub fn summary_csv(summary: &[CohortSummary]) -> String {
    let mut out = String::from(
        "cohort,pairs,translation_fraction,median_link_count,pruned_pairs,pruned_translation_fraction\n",
    );
    for s in summary {
        writeln!(
            out,
            "{},{},{:.6},{},{},{:.6}",
            s.cohort.as_str(),
            s.pairs,
            s.translation_fraction,
            s.median_link_count,
            s.pruned_pairs,
            s.pruned_translation_fraction
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(src: &str, tgt: &str, t: bool, e: bool) -> FriendRecord {
        FriendRecord {
            w_src: src.into(),
            w_tgt: tgt.into(),
            lex_cost: 0.5,
            has_translation: t,
            passes_embedding: e,
            link_count: if e { 5 } else { 0 },
            embedding_missing: false,
            class: FriendClass::from_flags(t, e),
            cohort: Cohort::A,
        }
    }

    fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
        xs.iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn counts() {
        let rs = vec![
            rec("a", "a", true, false),
            rec("b", "b", false, true),
            rec("c", "c", true, true),
            rec("d", "d", false, false),
        ];
        assert_eq!(
            classify_counts(&rs),
            ClassCounts {
                tp: 1,
                ep: 1,
                b: 1,
                n: 1
            }
        );
        assert_eq!(classify_counts(&[]), ClassCounts::default());
        let fr = ClassCounts {
            tp: 486,
            ep: 949,
            b: 2108,
            n: 1804,
        };
        assert_eq!(fr.csv_row("fr"), "fr,486,949,2108,1804,0.813");
    }

    #[test]
    fn gold_scores() {
        let rs = vec![
            rec("a", "a", true, false),
            rec("b", "b", false, true),
            rec("c", "c", false, false),
            rec("d", "d", false, false),
        ];
        let t = pairs(&[("a", "a"), ("b", "b")]);
        let f = pairs(&[("c", "c"), ("d", "d")]);
        let s = eval_gold(&rs, &t, &f, FriendPolicy::Either).unwrap();
        assert_eq!((s.f1, s.accuracy), (1.0, 1.0));
        let s = eval_gold(&rs, &t, &f, FriendPolicy::Both).unwrap();
        assert_eq!((s.f1, s.accuracy), (0.0, 0.5));
        assert!(eval_gold(&rs, &t, &pairs(&[("a", "a")]), FriendPolicy::Either).is_err());
        // unseen gold pairs count as predicted false
        let s = eval_gold(&[], &t, &f, FriendPolicy::Either).unwrap();
        assert_eq!(s.false_neg, 2);
    }

    #[test]
    fn median_pruning_rule() {
        assert_eq!(median(vec![]), 0.0);
        assert_eq!(median(vec![3, 1, 2]), 2.0);
        assert_eq!(median(vec![4, 1, 2, 3]), 2.5);
        let mut rs = vec![
            rec("a", "a", true, true),
            rec("b", "b", false, false),
            rec("c", "c", false, false),
        ];
        rs[0].link_count = 9;
        let s = summarize(Cohort::A, &rs);
        assert_eq!((s.pairs, s.pruned_pairs), (3, 3));
        assert!((s.translation_fraction - 1.0 / 3.0).abs() < 1e-12);
        rs[1].link_count = 4;
        let s = summarize(Cohort::A, &rs);
        assert_eq!(s.pruned_pairs, 2);
        assert_eq!(s.pruned_translation_fraction, 0.5);
    }
}
