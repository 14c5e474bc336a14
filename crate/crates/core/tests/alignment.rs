//! Alignment against a brute-force enumeration of segmentations.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translit_core::{align, align_cost, PiecePair, SourceAligner, TransliterationModel};

fn strings(alpha: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alpha {
                next.push(format!("{s}{c}"));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn random_model(rng: &mut ChaCha8Rng) -> TransliterationModel {
    let mut m = TransliterationModel::new("x", "y", 3);
    let pieces = strings(&['a', 'b'], 3);
    for _ in 0..rng.gen_range(5..40) {
        let s = &pieces[rng.gen_range(0..pieces.len())];
        let t = &pieces[rng.gen_range(0..pieces.len())];
        if s.is_empty() && t.is_empty() {
            continue;
        }
        let p = PiecePair::new(s.clone(), t.clone());
        let c = rng.gen_range(0.01..=p.init_cost());
        m.set_cost(p, c).unwrap();
    }
    m
}

/// Least cost over every way of cutting `s` and `t` into aligned pieces.
fn brute(m: &TransliterationModel, s: &[char], t: &[char]) -> f64 {
    if s.is_empty() && t.is_empty() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for a in 0..=s.len().min(3) {
        for b in 0..=t.len().min(3) {
            if a + b == 0 {
                continue;
            }
            let p = PiecePair::new(
                s[..a].iter().collect::<String>(),
                t[..b].iter().collect::<String>(),
            );
            let c = m.cost_of(&p).unwrap() + brute(m, &s[a..], &t[b..]);
            best = best.min(c);
        }
    }
    best
}

#[test]
fn matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let words = strings(&['a', 'b'], 4);
    for _ in 0..5 {
        let m = random_model(&mut rng);
        for s in &words {
            let sc: Vec<char> = s.chars().collect();
            for t in &words {
                if s.is_empty() && t.is_empty() {
                    continue;
                }
                let tc: Vec<char> = t.chars().collect();
                let want = brute(&m, &sc, &tc);
                let got = align_cost(&m, s, t).unwrap();
                assert!((got - want).abs() < 1e-9, "{s:?}/{t:?}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn shared_source_agrees_with_one_shot() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_model(&mut rng);
    let words = strings(&['a', 'b'], 4);
    for s in words.iter().skip(1) {
        let sa = SourceAligner::new(&m, s);
        for t in &words {
            assert_eq!(sa.align(t).unwrap(), align(&m, s, t).unwrap());
            assert_eq!(sa.cost(t).unwrap(), align_cost(&m, s, t).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn segments_cover_both_strings(s in "[ab]{0,6}", t in "[ab]{0,6}", seed in 0u64..50) {
        prop_assume!(!(s.is_empty() && t.is_empty()));
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = align(&m, &s, &t).unwrap();
        prop_assert_eq!(a.source(), s.clone());
        prop_assert_eq!(a.target(), t.clone());
        let sum: f64 = a.segments.iter().map(|p| m.cost_of(p).unwrap()).sum();
        prop_assert!((sum - a.total_cost).abs() < 1e-9);
        for p in &a.segments {
            prop_assert!(p.src_len() <= 3 && p.tgt_len() <= 3);
            prop_assert!(p.src_len() + p.tgt_len() > 0);
        }
    }

    #[test]
    fn untrained_cost_is_total_length(s in "\\PC{0,8}", t in "\\PC{0,8}") {
        prop_assume!(!(s.is_empty() && t.is_empty()));
        let m = TransliterationModel::new("x", "y", 3);
        let want = (s.chars().count() + t.chars().count()) as f64;
        prop_assert_eq!(align_cost(&m, &s, &t).unwrap(), want);
    }
}
