use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use translit_core::{
    align_cost, construct_topk, pivot_topk, GenConfig, PiecePair, TransliterationModel,
};

fn strings(alpha: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for len in 1..=max_len {
        let start = out.len() - alpha.len().pow(len as u32 - 1);
        let prev: Vec<String> = out[start..].to_vec();
        for s in prev {
            for &c in alpha {
                out.push(format!("{s}{c}"));
            }
        }
    }
    out
}

fn random_model(rng: &mut ChaCha8Rng, src: &[char], tgt: &[char]) -> TransliterationModel {
    let mut m = TransliterationModel::new("x", "y", 2);
    m.set_alphabets(src.iter().copied().collect(), tgt.iter().copied().collect());
    let sp = strings(src, 2);
    let tp = strings(tgt, 2);
    for _ in 0..30 {
        let p = PiecePair::new(
            sp[rng.gen_range(0..sp.len())].clone(),
            tp[rng.gen_range(0..tp.len())].clone(),
        );
        if p.src.is_empty() && p.tgt.is_empty() {
            continue;
        }
        let c = rng.gen_range(0.01..=p.init_cost());
        m.set_cost(p, c).unwrap();
    }
    m
}

#[test]
fn topk_equals_brute_force_ranking() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let targets = strings(&['x', 'y'], 4);
    let gen = GenConfig {
        budget: None,
        max_len: Some(4),
    };
    for _ in 0..10 {
        let m = random_model(&mut rng, &['a', 'b'], &['x', 'y']);
        for w in ["a", "ab", "ba", "abb"] {
            let bound = 2.0 * w.len() as f64;
            let mut brute: Vec<(f64, String)> = targets
                .iter()
                .filter(|t| !t.is_empty() && !t.contains(['a', 'b']))
                .map(|t| (align_cost(&m, w, t).unwrap(), t.clone()))
                .filter(|(c, _)| *c <= bound + 1e-9)
                .collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let got = construct_topk(&m, w, 10, &gen).unwrap();
            // the word's own letters are also legal output symbols
            let got: Vec<_> = got
                .into_iter()
                .filter(|c| !c.text.contains(['a', 'b']))
                .collect();
            for (g, (c, _)) in got.iter().zip(&brute) {
                assert!(
                    (g.cost - c).abs() < 1e-9,
                    "{w}: {} at {} vs {c}",
                    g.text,
                    g.cost
                );
            }
        }
    }
}

#[test]
fn candidates_sorted_distinct_and_rescored() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = random_model(&mut rng, &['a', 'b'], &['x', 'y']);
    let got = construct_topk(&m, "abab", 25, &GenConfig::default()).unwrap();
    assert!(!got.is_empty() && got.len() <= 25);
    for w in got.windows(2) {
        assert!(w[0].cost <= w[1].cost);
        assert_ne!(w[0].text, w[1].text);
    }
    for c in &got {
        assert!(!c.text.is_empty());
        assert_eq!(c.cost, align_cost(&m, "abab", &c.text).unwrap());
        assert_eq!(c.segmentation.target(), c.text);
    }
}

#[test]
fn rejects_bad_requests() {
    let m = TransliterationModel::new("x", "y", 3);
    assert!(construct_topk(&m, "ab", 0, &GenConfig::default()).is_err());
    assert!(construct_topk(&m, "", 3, &GenConfig::default()).is_err());
}

#[test]
fn pivot_through_identity_keeps_first_leg() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let first = random_model(&mut rng, &['a', 'b'], &['x', 'y']);
    let mut second = TransliterationModel::new("y", "z", 2);
    for c in ['x', 'y'] {
        second
            .set_cost(PiecePair::new(c.to_string(), c.to_string()), 0.01)
            .unwrap();
    }
    let out = pivot_topk(&first, &second, "ab", 5, 25, &GenConfig::default()).unwrap();
    assert!(!out.is_empty());
    for w in out.windows(2) {
        assert!(w[0].cost <= w[1].cost);
    }
}
