//! Minimum-cost segmentation matching.
//!
//! Both strings are cut into the same number of contiguous pieces (each at
//! most `lmax` chars, one side may be empty) and piece `k` of the source is
//! matched with piece `k` of the target. The cost of a matching is the sum
//! of the model's piece-pair costs.

use std::cmp::Ordering;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::model::{init_cost, PiecePair, TargetCosts, TransliterationModel};
use crate::util::char_offsets;

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub segments: Vec<PiecePair>,
    pub total_cost: f64,
}

impl Alignment {
    pub fn source(&self) -> String {
        self.segments.iter().map(|p| p.src.as_str()).collect()
    }

    pub fn target(&self) -> String {
        self.segments.iter().map(|p| p.tgt.as_str()).collect()
    }
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    // sum over segments of (len(src) - 1)^2 + (len(tgt) - 1)^2: zero only for
    // 1:1 pieces, so a length mismatch goes into as few small pieces as possible
    skew: u32,
    segs: u32,
    step: (u8, u8),
}

impl Cell {
    const UNSET: Cell = Cell {
        cost: f64::INFINITY,
        skew: u32::MAX,
        segs: u32::MAX,
        step: (0, 0),
    };

    /// Ordering of two candidate moves out of the same cell; `Less` wins.
    fn rank(&self, other: &Cell) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.skew.cmp(&other.skew))
            .then(self.segs.cmp(&other.segs))
            // longer source piece first, then the lexicographically smaller
            // target piece, which among prefixes of one suffix is the shorter
            .then(other.step.0.cmp(&self.step.0))
            .then(self.step.1.cmp(&other.step.1))
    }
}

/// Per-query view of one source string: its char offsets and the stored
/// target maps of every source piece `s[i..i+a]`.
pub(crate) struct SourceView<'m> {
    pub(crate) offsets: Vec<usize>,
    pub(crate) lmax: usize,
    // rows[i][a] for a in 0..=lmax (None when the piece runs past the end
    // or has no stored targets)
    rows: Vec<Vec<Option<&'m TargetCosts>>>,
}

impl<'m> SourceView<'m> {
    pub(crate) fn new(m: &'m TransliterationModel, s: &str) -> Self {
        let offsets = char_offsets(s);
        let n = offsets.len() - 1;
        let lmax = m.lmax();
        let rows = (0..=n)
            .map(|i| {
                (0..=lmax)
                    .map(|a| {
                        if i + a > n {
                            None
                        } else {
                            m.targets(&s[offsets[i]..offsets[i + a]])
                        }
                    })
                    .collect()
            })
            .collect();
        SourceView {
            offsets,
            lmax,
            rows,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub(crate) fn stored_row(&self, i: usize, a: usize) -> Option<&'m TargetCosts> {
        self.rows[i][a]
    }

    #[inline]
    fn cost(&self, i: usize, a: usize, tgt: &str, b: usize) -> f64 {
        self.rows[i][a]
            .and_then(|m| m.get(tgt))
            .copied()
            .unwrap_or_else(|| init_cost(a, b))
    }
}

fn check_inputs(s: &str, t: &str) -> Result<()> {
    if s.is_empty() && t.is_empty() {
        return Err(Error::contract("cannot align two empty strings"));
    }
    Ok(())
}

/// Suffix DP: `cells[i][j]` is the best matching of `s[i..]` with `t[j..]`.
fn solve(view: &SourceView<'_>, t: &str) -> (Vec<Cell>, usize, Vec<usize>) {
    let n = view.len();
    let toff = char_offsets(t);
    let m_len = toff.len() - 1;
    let width = m_len + 1;
    let lmax = view.lmax;
    let mut cells = vec![Cell::UNSET; (n + 1) * width];
    cells[n * width + m_len] = Cell {
        cost: 0.0,
        skew: 0,
        segs: 0,
        step: (0, 0),
    };
    for i in (0..=n).rev() {
        for j in (0..=m_len).rev() {
            if i == n && j == m_len {
                continue;
            }
            let mut best = Cell::UNSET;
            for a in 0..=lmax.min(n - i) {
                for b in 0..=lmax.min(m_len - j) {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let next = &cells[(i + a) * width + j + b];
                    if !next.cost.is_finite() {
                        continue;
                    }
                    let c = view.cost(i, a, &t[toff[j]..toff[j + b]], b);
                    let cand = Cell {
                        cost: c + next.cost,
                        skew: next.skew + ((a as i32 - 1).pow(2) + (b as i32 - 1).pow(2)) as u32,
                        segs: next.segs + 1,
                        step: (a as u8, b as u8),
                    };
                    if cand.rank(&best) == Ordering::Less {
                        best = cand;
                    }
                }
            }
            cells[i * width + j] = best;
        }
    }
    (cells, width, toff)
}

/// Globally minimum-cost segmentation matching of `s` and `t`.
///
/// Ties are broken by the least total squared deviation of piece lengths
/// from 1 (so 1:1 pieces are preferred), then fewer segments, then the
/// longer first source piece, then the lexicographically smaller pieces.
pub fn align(m: &TransliterationModel, s: &str, t: &str) -> Result<Alignment> {
    SourceAligner::new(m, s).align(t)
}

pub(crate) fn align_view(view: &SourceView<'_>, s: &str, t: &str) -> Alignment {
    let (cells, width, toff) = solve(view, t);
    let soff = &view.offsets;
    let (n, m_len) = (view.len(), toff.len() - 1);
    let mut segments = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < n || j < m_len {
        let (a, b) = cells[i * width + j].step;
        let (a, b) = (a as usize, b as usize);
        segments.push(PiecePair::new(
            &s[soff[i]..soff[i + a]],
            &t[toff[j]..toff[j + b]],
        ));
        i += a;
        j += b;
    }
    Alignment {
        segments,
        total_cost: cells[0].cost,
    }
}

/// Cost of [`align`] without building the segment list. Bit-identical to
/// `align(..).total_cost`.
pub fn align_cost(m: &TransliterationModel, s: &str, t: &str) -> Result<f64> {
    SourceAligner::new(m, s).cost(t)
}

/// One source string aligned against many targets; the source's piece
/// lookups are done once.
pub struct SourceAligner<'m> {
    source: String,
    view: SourceView<'m>,
}

impl<'m> SourceAligner<'m> {
    pub fn new(m: &'m TransliterationModel, s: &str) -> Self {
        SourceAligner {
            source: s.to_string(),
            view: SourceView::new(m, s),
        }
    }

    /// Same result as [`align`] on this source.
    pub fn align(&self, t: &str) -> Result<Alignment> {
        check_inputs(&self.source, t)?;
        Ok(align_view(&self.view, &self.source, t))
    }

    /// Same result as [`align_cost`] on this source.
    pub fn cost(&self, t: &str) -> Result<f64> {
        check_inputs(&self.source, t)?;
        Ok(align_cost_view(&self.view, t))
    }
}

pub(crate) fn align_cost_view(view: &SourceView<'_>, t: &str) -> f64 {
    solve(view, t).0[0].cost
}

/// A pair is flawed when its best matching saves less than the fraction
/// `delta` of the initialization cost, i.e. the model found essentially no
/// learned correspondence between the two strings.
pub fn is_flawed(m: &TransliterationModel, s: &str, t: &str, delta: f64) -> Result<bool> {
    let cost = align_cost(m, s, t)?;
    Ok(flawed_cost(
        cost,
        s.chars().count() + t.chars().count(),
        delta,
    ))
}

pub(crate) fn flawed_cost(cost: f64, total_len: usize, delta: f64) -> bool {
    cost >= (1.0 - delta) * total_len as f64
}

/// Cost-only forward DP for scanning many targets against one source, with
/// early abandoning once a lower bound exceeds a threshold.
///
/// Only stored pairs plus single-char deletions and insertions are used as
/// moves; an unstored multi-char pair costs exactly as much as spelling it
/// out with those defaults, so the optimum equals [`align`]'s cost up to
/// summation order.
pub(crate) struct BoundedScorer<'m> {
    view: SourceView<'m>,
    // suffix_lb[i]: lower bound on covering source chars i.. ; per-char
    // minimum of cost / len(src) over every piece of this source covering it
    suffix_lb: Vec<f64>,
    // A piece's cost split evenly over all its chars, both sides. Per source
    // char: (mask of the target piece's chars, share) for every stored piece
    // covering it, cheapest first.
    src_opts: Vec<Vec<(u64, f64)>>,
    // per target char: cheapest share over this source's stored pieces (and
    // stored insertions) emitting it
    tgt_share: FxHashMap<char, f64>,
    del_cost: Vec<f64>,
    ins_row: Option<&'m TargetCosts>,
    scratch: Vec<f64>,
}

/// One bit per char class; collisions only weaken the bound.
#[inline]
fn char_bit(c: char) -> u64 {
    1u64 << (c as u32 % 64)
}

fn char_mask(s: &str) -> u64 {
    s.chars().fold(0, |m, c| m | char_bit(c))
}

impl<'m> BoundedScorer<'m> {
    pub(crate) fn new(m: &'m TransliterationModel, s: &str) -> Self {
        let view = SourceView::new(m, s);
        let n = view.len();
        let mut per_char = vec![1.0f64; n];
        let mut src_opts: Vec<Vec<(u64, f64)>> = vec![Vec::new(); n];
        let mut tgt_share: FxHashMap<char, f64> = FxHashMap::default();
        let mut note_tgt = |a: usize, tgt: &str, cost: f64| {
            let b = tgt.chars().count();
            if b > 0 {
                let share = cost / (a + b) as f64;
                for c in tgt.chars() {
                    let e = tgt_share.entry(c).or_insert(1.0);
                    *e = e.min(share);
                }
            }
        };
        for i in 0..n {
            for a in 1..=view.lmax.min(n - i) {
                if let Some(row) = view.stored_row(i, a) {
                    let mut best = f64::INFINITY;
                    for (tgt, &cost) in row {
                        best = best.min(cost);
                        note_tgt(a, tgt, cost);
                        let share = cost / (a + tgt.chars().count()) as f64;
                        if share < 1.0 {
                            let mask = char_mask(tgt);
                            for opts in &mut src_opts[i..i + a] {
                                opts.push((mask, share));
                            }
                        }
                    }
                    let share = best / a as f64;
                    for slot in &mut per_char[i..i + a] {
                        *slot = slot.min(share);
                    }
                }
            }
        }
        let ins_row = m.targets("");
        if let Some(row) = ins_row {
            for (tgt, &cost) in row {
                note_tgt(0, tgt, cost);
            }
        }
        for opts in &mut src_opts {
            opts.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        }
        let mut suffix_lb = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix_lb[i] = suffix_lb[i + 1] + per_char[i];
        }
        let del_cost = (0..n)
            .map(|i| {
                view.stored_row(i, 1)
                    .and_then(|r| r.get(""))
                    .copied()
                    .unwrap_or(1.0)
            })
            .collect();
        BoundedScorer {
            view,
            suffix_lb,
            src_opts,
            tgt_share,
            del_cost,
            ins_row,
            scratch: Vec::new(),
        }
    }

    /// Lower bound on the cost of aligning with `t` from char content alone.
    ///
    /// Spread each piece's cost evenly over its chars on both sides. A source
    /// char sits in a piece whose target chars all occur in `t`, a target
    /// char in a piece of this source, and an unstored piece has share 1, so
    /// summing the cheapest possible share of every char bounds the total.
    pub(crate) fn content_bound(&self, t: &str) -> f64 {
        let tmask = char_mask(t);
        let src: f64 = self
            .src_opts
            .iter()
            .map(|opts| {
                opts.iter()
                    .find(|(mask, _)| mask & !tmask == 0)
                    .map_or(1.0, |x| x.1)
            })
            .sum();
        let tgt: f64 = t
            .chars()
            .map(|c| self.tgt_share.get(&c).copied().unwrap_or(1.0))
            .sum();
        src + tgt
    }

    /// Cost of the best matching with `t`, or `None` once it provably
    /// exceeds `threshold`.
    pub(crate) fn score(&mut self, t: &str, threshold: f64) -> Option<f64> {
        if self.suffix_lb[0] > threshold || self.content_bound(t) > threshold {
            return None;
        }
        let toff = char_offsets(t);
        let m_len = toff.len() - 1;
        let n = self.view.len();
        let lmax = self.view.lmax;
        let width = m_len + 1;
        let d = &mut self.scratch;
        d.clear();
        d.resize((n + 1) * width, f64::INFINITY);
        for i in 0..=n {
            for j in 0..=m_len {
                if i == 0 && j == 0 {
                    d[0] = 0.0;
                    continue;
                }
                let mut best = f64::INFINITY;
                for a in 0..=lmax.min(i) {
                    let row = if a == 0 {
                        self.ins_row
                    } else {
                        self.view.stored_row(i - a, a)
                    };
                    for b in 0..=lmax.min(j) {
                        if a == 0 && b == 0 {
                            continue;
                        }
                        let prev = d[(i - a) * width + j - b];
                        if prev == f64::INFINITY {
                            continue;
                        }
                        let stored = row.and_then(|r| r.get(&t[toff[j - b]..toff[j]])).copied();
                        let c = match (stored, a, b) {
                            (Some(c), _, _) => c,
                            (None, 1, 0) => self.del_cost[i - 1],
                            (None, 0, 1) => 1.0,
                            _ => continue,
                        };
                        best = best.min(prev + c);
                    }
                }
                d[i * width + j] = best;
            }
            if i < n {
                let lo = i.saturating_sub(lmax - 1);
                let mut bound = f64::INFINITY;
                for r in lo..=i {
                    let row_min = d[r * width..(r + 1) * width]
                        .iter()
                        .copied()
                        .fold(f64::INFINITY, f64::min);
                    bound = bound.min(row_min + self.suffix_lb[r]);
                }
                if bound > threshold {
                    return None;
                }
            }
        }
        let cost = d[n * width + m_len];
        (cost <= threshold).then_some(cost)
    }

    pub(crate) fn exact_cost(&self, t: &str) -> f64 {
        align_cost_view(&self.view, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(s: &str, t: &str) -> PiecePair {
        PiecePair::new(s, t)
    }

    /// Every segmentation matching, enumerated explicitly.
    fn brute_min(m: &TransliterationModel, s: &[char], t: &[char]) -> f64 {
        if s.is_empty() && t.is_empty() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for a in 0..=m.lmax().min(s.len()) {
            for b in 0..=m.lmax().min(t.len()) {
                if a == 0 && b == 0 {
                    continue;
                }
                let p = pp(
                    &s[..a].iter().collect::<String>(),
                    &t[..b].iter().collect::<String>(),
                );
                let c = m.cost_of(&p).unwrap() + brute_min(m, &s[a..], &t[b..]);
                best = best.min(c);
            }
        }
        best
    }

    #[test]
    fn fresh_costs() {
        let m = TransliterationModel::new("x", "y", 3);
        assert_eq!(align(&m, "ab", "xy").unwrap().total_cost, 4.0);
        let a = align(&m, "", "x").unwrap();
        assert_eq!(a.segments, vec![pp("", "x")]);
        assert_eq!(a.total_cost, 1.0);
        assert!(align(&m, "", "").is_err());
    }

    #[test]
    fn learned_digraph() {
        let mut m = TransliterationModel::new("en", "ru", 3);
        m.set_cost(pp("sh", "ш"), 0.2).unwrap();
        let a = align(&m, "sh", "ш").unwrap();
        assert_eq!(a.segments, vec![pp("sh", "ш")]);
        assert_eq!(a.total_cost, 0.2);
        let s: Vec<char> = "sh".chars().collect();
        let t: Vec<char> = "ш".chars().collect();
        assert_eq!(brute_min(&m, &s, &t), 0.2);
    }

    #[test]
    fn fresh_tie_break_prefers_one_to_one() {
        let m = TransliterationModel::new("x", "y", 3);
        let a = align(&m, "abc", "xyz").unwrap();
        assert_eq!(a.segments, vec![pp("a", "x"), pp("b", "y"), pp("c", "z")]);
        // one length mismatch: a single 2:1 piece, placed first
        let a = align(&m, "abc", "xy").unwrap();
        assert_eq!(a.segments, vec![pp("ab", "x"), pp("c", "y")]);
        let a = align(&m, "a", "xy").unwrap();
        assert_eq!(a.segments, vec![pp("a", "xy")]);
        // a larger mismatch is spread over small pieces
        let a = align(&m, "abcd", "xy").unwrap();
        assert_eq!(a.segments, vec![pp("ab", "x"), pp("cd", "y")]);
    }

    #[test]
    fn flaw_examples() {
        let fresh = TransliterationModel::new("x", "y", 3);
        assert!(is_flawed(&fresh, "abc", "xyz", 0.5).unwrap());
        assert!(is_flawed(&fresh, "a", "α", 0.5).unwrap());
        let mut m = fresh.clone();
        m.set_cost(pp("a", "α"), 0.1).unwrap();
        assert!(!is_flawed(&m, "a", "α", 0.5).unwrap());
        assert!(is_flawed(&m, "abc", "xyz", 0.5).unwrap());
    }

    fn arb_model() -> impl Strategy<Value = TransliterationModel> {
        let piece =
            || proptest::collection::vec(prop_oneof![Just('a'), Just('b'), Just('c')], 0..=3);
        let tpiece =
            || proptest::collection::vec(prop_oneof![Just('x'), Just('y'), Just('a')], 0..=3);
        proptest::collection::vec((piece(), tpiece(), 1u32..=64), 0..40).prop_map(move |entries| {
            let mut m = TransliterationModel::new("x", "y", 3);
            for (s, t, k) in entries {
                if s.is_empty() && t.is_empty() {
                    continue;
                }
                let p = pp(&s.iter().collect::<String>(), &t.iter().collect::<String>());
                // dyadic costs keep every sum exact
                let c = p.init_cost() * k as f64 / 64.0;
                m.set_cost(p, c).unwrap();
            }
            m
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn matches_enumeration(m in arb_model(), s in "[abc]{0,4}", t in "[xya]{0,4}") {
            prop_assume!(!(s.is_empty() && t.is_empty()));
            let sc: Vec<char> = s.chars().collect();
            let tc: Vec<char> = t.chars().collect();
            let a = align(&m, &s, &t).unwrap();
            prop_assert_eq!(a.total_cost, brute_min(&m, &sc, &tc));
            prop_assert_eq!(a.source(), s.clone());
            prop_assert_eq!(a.target(), t.clone());
            let sum: f64 = a.segments.iter().map(|p| m.cost_of(p).unwrap()).sum();
            prop_assert_eq!(sum, a.total_cost);
            prop_assert!(a.segments.iter().all(|p| !(p.src.is_empty() && p.tgt.is_empty())));
            prop_assert_eq!(align_cost(&m, &s, &t).unwrap(), a.total_cost);
            let mut scorer = BoundedScorer::new(&m, &s);
            prop_assert_eq!(scorer.score(&t, f64::INFINITY), Some(a.total_cost));
            // abandoning never drops a matching under the threshold
            prop_assert_eq!(scorer.score(&t, a.total_cost), Some(a.total_cost));
            if a.total_cost > 0.1 {
                prop_assert_eq!(scorer.score(&t, a.total_cost - 0.01), None);
            }
        }

        #[test]
        fn fresh_cost_law(s in "[a-z]{0,8}", t in "[α-ω]{0,8}") {
            prop_assume!(!(s.is_empty() && t.is_empty()));
            let m = TransliterationModel::new("x", "y", 3);
            let want = (s.chars().count() + t.chars().count()) as f64;
            prop_assert_eq!(align(&m, &s, &t).unwrap().total_cost, want);
        }

        #[test]
        fn lowering_a_cost_never_hurts(m in arb_model(), s in "[abc]{1,4}", t in "[xya]{1,4}", k in 0usize..40) {
            let entries = m.entries();
            prop_assume!(!entries.is_empty());
            let (p, c) = entries[k % entries.len()].clone();
            let before = align(&m, &s, &t).unwrap().total_cost;
            let mut lower = m.clone();
            lower.set_cost(p, c / 2.0).unwrap();
            prop_assert!(align(&lower, &s, &t).unwrap().total_cost <= before);
        }
    }
}
