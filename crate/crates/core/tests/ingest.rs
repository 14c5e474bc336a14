use proptest::prelude::*;
use translit_core::ingest::{
    clean_corpus, load_lexicon, load_pairs, split_corpus, split_sizes, write_pairs, NormConfig,
};
use translit_core::{normalize_text, PairCorpus, PiecePair, Split, TransliterationModel};

proptest! {
    #[test]
    fn normalization_is_idempotent(s in "\\PC{0,20}") {
        let cfg = NormConfig::default();
        let once = normalize_text(&s, &cfg);
        prop_assert_eq!(normalize_text(&once, &cfg), once.clone());
        prop_assert!(!once.starts_with('_') && !once.ends_with('_'));
        prop_assert!(!once.contains("__"));
        prop_assert!(!once.contains(['-', '.', ',']));
    }

    #[test]
    fn split_is_a_seeded_partition(n in 1usize..300, seed in any::<u64>()) {
        let pairs: Vec<(String, String)> = (0..n).map(|i| (i.to_string(), "x".into())).collect();
        let a = split_corpus(PairCorpus::from_pairs(pairs.clone(), "a", "b"), seed).unwrap();
        let b = split_corpus(PairCorpus::from_pairs(pairs, "a", "b"), seed).unwrap();
        prop_assert_eq!(&a, &b);
        let (tr, tu, te) = split_sizes(n);
        prop_assert_eq!(tr + tu + te, n);
        prop_assert_eq!(a.bucket_len(Split::Train), tr);
        prop_assert_eq!(a.bucket_len(Split::Tune), tu);
        prop_assert_eq!(a.bucket_len(Split::Test), te);
    }
}

#[test]
fn cleaning_drops_and_dedups() {
    let raw: Vec<(String, String)> = [
        ("Jean-Paul", "Жан-Поль"),
        ("jean paul", "жан поль"),
        ("JEAN-PAUL", "ЖАН-ПОЛЬ"),
        ("", "x"),
        ("a b c d", "x"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let (corpus, report) = clean_corpus(&raw, &NormConfig::default(), "fr", "ru");
    assert_eq!(corpus.pairs[0], ("jean_paul".into(), "жан_поль".into()));
    assert_eq!(corpus.len(), 2);
    assert_eq!(report.duplicates, 1);
    assert_eq!(report.rejects.len(), 2);
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = vec![
        ("a".to_string(), "б".to_string()),
        ("cd".into(), "ef".into()),
    ];
    let p = dir.path().join("p.tsv");
    write_pairs(&p, &pairs).unwrap();
    std::fs::write(
        dir.path().join("q.tsv"),
        "\u{feff}# note\na\tb\r\nbroken\n\nc\td\n",
    )
    .unwrap();
    assert_eq!(load_pairs(&p).unwrap().pairs, pairs);
    let q = load_pairs(dir.path().join("q.tsv")).unwrap();
    assert_eq!(q.pairs.len(), 2);
    assert_eq!(q.rejects.len(), 1);
    assert_eq!(q.rejects[0].position, 3);

    std::fs::write(dir.path().join("bad.tsv"), b"a\t\xff\n").unwrap();
    assert!(load_pairs(dir.path().join("bad.tsv")).is_err());
    assert!(load_pairs(dir.path().join("missing.tsv")).is_err());

    std::fs::write(dir.path().join("lex.txt"), "one\ntwo\n").unwrap();
    let lex = load_lexicon(dir.path().join("lex.txt"), "en").unwrap();
    assert_eq!(lex.words, ["one", "two"]);

    let mut m = TransliterationModel::new("en", "ru", 3);
    m.set_cost(PiecePair::new("sh", "ш"), 0.1 + 0.2).unwrap();
    m.set_cost(PiecePair::new("", "ь"), 0.5).unwrap();
    let mp = dir.path().join("m.txt");
    m.save(&mp).unwrap();
    let back = TransliterationModel::load(&mp).unwrap();
    assert_eq!(back.to_text(), m.to_text());
    assert_eq!(back.stored("sh", "ш"), Some(0.1 + 0.2));
}
