use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use translit_core::eval::{evaluate, heatmap_csv, DEFAULT_K_LIST};
use translit_core::ingest::{
    clean_corpus, load_lexicon, load_pairs, split_corpus, write_pairs, NormConfig,
};
use translit_core::lexicon::{detect_best, rank_of};
use translit_core::semantics::{
    classify_counts, eval_gold, load_dictionary, load_embeddings, records_tsv, scan_friends,
    summary_csv, ClassCounts, FriendConfig, FriendPolicy,
};
use translit_core::train::{dirtiness, stats_csv};
use translit_core::{
    construct_topk, normalize_text, pivot_topk, train, GenConfig, PairCorpus, Split, TrainConfig,
    TransliterationModel,
};

use crate::config::FileConfig;
use crate::{
    CleanArgs, Cli, Command, EvaluateArgs, FriendsArgs, GenFlags, HeatmapArgs, MatchArgs,
    PivotArgs, ReportFormat, TrainArgs, TranslitArgs,
};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_K: usize = 100;
const DEFAULT_MATCH_K: usize = 10;

pub fn run(cli: &Cli, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    match &cli.command {
        Command::Clean(a) => clean(a, seed),
        Command::Train(a) => train_cmd(a, file, seed),
        Command::Transliterate(a) => transliterate(a, file, out),
        Command::Pivot(a) => pivot(a, file, out),
        Command::Match(a) => match_cmd(a, out),
        Command::Evaluate(a) => evaluate_cmd(a, file, out),
        Command::Heatmap(a) => heatmap(a),
        Command::Friends(a) => friends(a, file, out),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn norm(s: &str) -> String {
    normalize_text(s, &NormConfig::default())
}

fn load_model(path: &Path) -> Result<TransliterationModel> {
    Ok(TransliterationModel::load(path)?)
}

/// Load a pair file and clean it with default normalization.
fn load_corpus(path: &Path, src: &str, tgt: &str) -> Result<PairCorpus> {
    let file = load_pairs(path)?;
    for r in &file.rejects {
        eprintln!("{}:{}: skipped ({})", path.display(), r.position, r.reason);
    }
    let (corpus, report) = clean_corpus(&file.pairs, &NormConfig::default(), src, tgt);
    if report.dropped() > 0 {
        eprintln!(
            "{}: dropped {} pairs while cleaning",
            path.display(),
            report.dropped()
        );
    }
    if corpus.is_empty() {
        bail!("{} holds no usable pairs", path.display());
    }
    Ok(corpus)
}

fn gen_config(flags: &GenFlags, file: &FileConfig) -> GenConfig {
    GenConfig {
        budget: flags.budget.or(file.generate.budget),
        max_len: flags.max_len.or(file.generate.max_len),
    }
}

fn clean(a: &CleanArgs, seed: u64) -> Result<()> {
    let cfg = NormConfig {
        lowercase: !a.keep_case,
        punctuation_to_underscore: !a.keep_punctuation,
        strip_outer_whitespace: !a.keep_whitespace,
    };
    let file = load_pairs(&a.input)?;
    let (corpus, report) = clean_corpus(&file.pairs, &cfg, "src", "tgt");
    if corpus.is_empty() {
        bail!("{} holds no usable pairs", a.input.display());
    }
    let corpus = split_corpus(corpus, seed)?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    for split in [Split::Train, Split::Tune, Split::Test] {
        let path = a.out_dir.join(format!("{}.tsv", split.as_str()));
        write_pairs(&path, corpus.bucket(split))?;
    }
    let mut rejects = String::from("line\treason\traw\n");
    for r in &file.rejects {
        writeln!(
            rejects,
            "{}\t{}\t{}",
            r.position,
            r.reason,
            r.raw.replace('\t', " ")
        )?;
    }
    // cleaning rejects carry an index into the parsed pairs, not a line number
    for r in &report.rejects {
        let raw = r.raw.replace('\t', " ");
        writeln!(rejects, "pair {}\t{}\t{raw}", r.position + 1, r.reason)?;
    }
    write_file(&a.out_dir.join("rejects.tsv"), &rejects)?;
    eprintln!(
        "kept {} pairs ({} train, {} tune, {} test); {} duplicates, {} rejects",
        corpus.len(),
        corpus.bucket_len(Split::Train),
        corpus.bucket_len(Split::Tune),
        corpus.bucket_len(Split::Test),
        report.duplicates,
        file.rejects.len() + report.rejects.len()
    );
    Ok(())
}

fn train_config(a: &TrainArgs, file: &FileConfig) -> TrainConfig {
    let d = TrainConfig::default();
    let f = &file.train;
    TrainConfig {
        rounds: a.rounds.or(f.rounds).unwrap_or(d.rounds),
        lmax: a.lmax.or(f.lmax).unwrap_or(d.lmax),
        alpha: a.alpha.or(f.alpha).unwrap_or(d.alpha),
        delta_flaw: a.delta.or(f.delta_flaw).unwrap_or(d.delta_flaw),
        cost_floor: a.cost_floor.or(f.cost_floor).unwrap_or(d.cost_floor),
        early_stop: a.early_stop.or(f.early_stop).unwrap_or(d.early_stop),
        shrink: a.shrink.or(f.shrink).unwrap_or(d.shrink),
        warmup_rounds: a
            .warmup_rounds
            .or(f.warmup_rounds)
            .unwrap_or(d.warmup_rounds),
    }
}

fn train_cmd(a: &TrainArgs, file: &FileConfig, seed: u64) -> Result<()> {
    let cfg = train_config(a, file);
    let mut corpus = load_corpus(&a.pairs, &a.src_lang, &a.tgt_lang)?;
    if a.split {
        corpus = split_corpus(corpus, seed)?;
    }
    let (model, stats) = train(&corpus, &cfg)?;
    model.save(&a.out)?;
    let stats_path = a.stats.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".stats.csv");
        PathBuf::from(p)
    });
    write_file(&stats_path, &stats_csv(&stats))?;
    eprintln!(
        "trained {} rounds on {} pairs; {} stored pieces; dirtiness {:.4}",
        stats.len(),
        corpus.bucket_len(Split::Train),
        model.len(),
        dirtiness(&model, &corpus, cfg.delta_flaw)?
    );
    Ok(())
}

fn transliterate(a: &TranslitArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let k =
        a.k.map(|k| k as usize)
            .or(file.generate.k)
            .unwrap_or(DEFAULT_K);
    let word = norm(&a.word);
    if word.is_empty() {
        bail!("the word is empty after normalization");
    }
    let cands = construct_topk(&model, &word, k, &gen_config(&a.gen, file))?;
    writeln!(out, "rank\tcandidate\tcost")?;
    for (i, c) in cands.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}", i + 1, c.text, c.cost)?;
    }
    Ok(())
}

fn pivot(a: &PivotArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let first = load_model(&a.first)?;
    let second = load_model(&a.second)?;
    if first.target_lang != second.source_lang {
        eprintln!(
            "warning: first model targets {:?} but second model reads {:?}",
            first.target_lang, second.source_lang
        );
    }
    let k =
        a.k.map(|k| k as usize)
            .or(file.generate.k)
            .unwrap_or(DEFAULT_K);
    let beam = a
        .beam
        .map(|b| b as usize)
        .or(file.generate.beam)
        .unwrap_or(5 * k);
    let word = norm(&a.word);
    if word.is_empty() {
        bail!("the word is empty after normalization");
    }
    let cands = pivot_topk(&first, &second, &word, k, beam, &gen_config(&a.gen, file))?;
    writeln!(out, "rank\tcandidate\tcost\tvia")?;
    for (i, c) in cands.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}\t{}", i + 1, c.text, c.cost, c.via)?;
    }
    Ok(())
}

fn match_cmd(a: &MatchArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let lex = load_lexicon(&a.lexicon, &model.target_lang)?;
    let word = norm(&a.word);
    let k = a.k.map_or(DEFAULT_MATCH_K, |k| k as usize);
    let found = detect_best(&model, &lex, &word, k)?;
    writeln!(out, "rank\tword\tcost")?;
    for (i, m) in found.iter().enumerate() {
        writeln!(out, "{}\t{}\t{:.6}", i + 1, m.word, m.cost)?;
    }
    if let Some(gold) = &a.gold {
        match rank_of(&model, &lex, &word, &norm(gold))? {
            Some(r) => eprintln!("gold rank: {r}"),
            None => eprintln!("gold rank: absent"),
        }
    }
    Ok(())
}

fn evaluate_cmd(a: &EvaluateArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let test = load_corpus(&a.pairs, &model.source_lang, &model.target_lang)?;
    let k_list = if a.k_list.is_empty() {
        DEFAULT_K_LIST.to_vec()
    } else {
        a.k_list.clone()
    };
    let report = evaluate(&model, &test, &k_list, &a.name, &gen_config(&a.gen, file))?;
    let text = match a.format {
        ReportFormat::Table => report.to_table(),
        ReportFormat::Csv => report.to_csv(),
    };
    match &a.out {
        Some(p) => write_file(p, &text),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

fn heatmap(a: &HeatmapArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let pick = |given: &Option<String>, fallback: Vec<char>| match given {
        Some(s) => s.chars().collect::<Vec<char>>(),
        None => fallback,
    };
    let src = pick(&a.src_chars, model.alphabet_src().iter().copied().collect());
    let tgt = pick(&a.tgt_chars, model.alphabet_tgt().iter().copied().collect());
    write_file(&a.out, &heatmap_csv(&model, &src, &tgt)?)
}

fn friend_config(a: &FriendsArgs, file: &FileConfig) -> FriendConfig {
    let d = FriendConfig::default();
    let f = &file.friends;
    FriendConfig {
        d_max: a.d_max.or(f.d_max).unwrap_or(d.d_max),
        next_cohort: a.next_cohort.or(f.next_cohort).unwrap_or(d.next_cohort),
        n: a.n.or(f.n).unwrap_or(d.n),
        tau: a.tau.or(f.tau).unwrap_or(d.tau),
        min_len: a.min_len.or(f.min_len).unwrap_or(d.min_len),
    }
}

fn gold_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let file = load_pairs(path)?;
    if let Some(r) = file.rejects.first() {
        bail!("{}:{}: {}", path.display(), r.position, r.reason);
    }
    Ok(file.pairs.iter().map(|(s, t)| (norm(s), norm(t))).collect())
}

fn friends(a: &FriendsArgs, file: &FileConfig, out: &mut dyn Write) -> Result<()> {
    let cfg = friend_config(a, file);
    let policy: FriendPolicy = match a.policy.as_deref().or(file.friends.policy.as_deref()) {
        Some(p) => p.parse()?,
        None => FriendPolicy::default(),
    };
    let model = load_model(&a.model)?;
    let lex_src = load_lexicon(&a.src_lexicon, &model.source_lang)?;
    let lex_tgt = load_lexicon(&a.tgt_lexicon, &model.target_lang)?;
    let dict = load_dictionary(&a.dict)?;
    let e_src = load_embeddings(&a.src_emb, &model.source_lang)?;
    let e_tgt = load_embeddings(&a.tgt_emb, &model.target_lang)?;
    let scan = scan_friends(&model, &lex_src, &lex_tgt, &dict, &e_src, &e_tgt, &cfg)?;
    write_file(&a.out, &records_tsv(&scan.records))?;
    if let Some(p) = &a.summary {
        write_file(p, &summary_csv(&scan.summary))?;
    }
    let counts = classify_counts(&scan.records);
    let lang = a.lang.clone().unwrap_or_else(|| model.target_lang.clone());
    let counts_csv = format!("{}\n{}\n", ClassCounts::csv_header(), counts.csv_row(&lang));
    match &a.counts {
        Some(p) => write_file(p, &counts_csv)?,
        None => out.write_all(counts_csv.as_bytes())?,
    }
    if let (Some(t), Some(f)) = (&a.gold_true, &a.gold_false) {
        let s = eval_gold(&scan.records, &gold_pairs(t)?, &gold_pairs(f)?, policy)?;
        writeln!(out, "f1,accuracy,true_pos,false_pos,false_neg,true_neg")?;
        writeln!(
            out,
            "{:.4},{:.4},{},{},{},{}",
            s.f1, s.accuracy, s.true_pos, s.false_pos, s.false_neg, s.true_neg
        )?;
    }
    Ok(())
}
