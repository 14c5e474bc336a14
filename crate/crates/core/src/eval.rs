//! Top-k and Levenshtein-1 scoring, report rendering, and heatmap export.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generate::{construct_topk, Candidate, GenConfig};
use crate::ingest::PairCorpus;
use crate::model::{PiecePair, TransliterationModel};

pub const DEFAULT_K_LIST: [usize; 3] = [1, 20, 100];

/// Whether unit-cost edit distance between `hyp` and `gold` is at most one.
pub fn levenshtein1(hyp: &str, gold: &str) -> bool {
    let a: Vec<char> = hyp.chars().collect();
    let b: Vec<char> = gold.chars().collect();
    let (short, long) = if a.len() <= b.len() {
        (&a, &b)
    } else {
        (&b, &a)
    };
    match long.len() - short.len() {
        0 => {
            short
                .iter()
                .zip(long.iter())
                .filter(|(x, y)| x != y)
                .count()
                <= 1
        }
        1 => {
            let p = short
                .iter()
                .zip(long.iter())
                .take_while(|(x, y)| x == y)
                .count();
            short[p..] == long[p + 1..]
        }
        _ => false,
    }
}

pub fn topk_hit(cands: &[Candidate], gold: &str, k: usize) -> bool {
    cands.iter().take(k).any(|c| c.text == gold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub source_lang: String,
    pub target_lang: String,
    pub model_name: String,
    pub items: usize,
    /// `(k, percentage of items with gold in the top k)`, ascending k.
    pub topk: Vec<(usize, f64)>,
    pub levenshtein1: f64,
}

impl Report {
    pub fn direction(&self) -> String {
        format!("{}->{}", self.source_lang, self.target_lang)
    }

    /// The non-English side when one side is English, else the target.
    pub fn language(&self) -> &str {
        if self.target_lang == "en" {
            &self.source_lang
        } else {
            &self.target_lang
        }
    }

    pub fn top(&self, k: usize) -> Option<f64> {
        self.topk.iter().find(|(kk, _)| *kk == k).map(|x| x.1)
    }

    pub fn csv_header(&self) -> String {
        let mut s = String::from("direction,lang,model");
        for (k, _) in &self.topk {
            write!(s, ",top_{k}").unwrap();
        }
        s.push_str(",levenshtein_1");
        s
    }

    pub fn csv_row(&self) -> String {
        let mut s = format!(
            "{},{},{}",
            self.direction(),
            self.language(),
            self.model_name
        );
        for (_, v) in &self.topk {
            write!(s, ",{v:.2}").unwrap();
        }
        write!(s, ",{:.2}", self.levenshtein1).unwrap();
        s
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", self.csv_header(), self.csv_row())
    }

    pub fn to_table(&self) -> String {
        let mut head = vec![
            "Direction".to_string(),
            "Lang".to_string(),
            "Model".to_string(),
        ];
        let mut row = vec![
            self.direction(),
            self.language().to_string(),
            self.model_name.clone(),
        ];
        for (k, v) in &self.topk {
            head.push(format!("Top-{k}"));
            row.push(format!("{v:.2}%"));
        }
        head.push("Lev-1".into());
        row.push(format!("{:.2}%", self.levenshtein1));
        let widths: Vec<usize> = head
            .iter()
            .zip(&row)
            .map(|(h, r)| h.chars().count().max(r.chars().count()))
            .collect();
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let rule = widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-");
        format!("{}\n{}\n{}\n", line(&head), rule, line(&row))
    }
}

/// Score every pair of `test` (all buckets) with candidates from
/// `construct_topk`. Gold and source are expected to be normalized already.
pub fn evaluate(
    m: &TransliterationModel,
    test: &PairCorpus,
    k_list: &[usize],
    model_name: &str,
    gen: &GenConfig,
) -> Result<Report> {
    if test.is_empty() {
        return Err(Error::Empty("test split has no pairs".into()));
    }
    let mut ks: Vec<usize> = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.first().is_none_or(|&k| k == 0) {
        return Err(Error::Config("k list must hold positive values".into()));
    }
    let kmax = *ks.last().unwrap();
    let per_item: Vec<(Vec<bool>, bool)> = test
        .pairs
        .par_iter()
        .map(|(s, gold)| {
            let cands = construct_topk(m, s, kmax, gen)?;
            let hits = ks.iter().map(|&k| topk_hit(&cands, gold, k)).collect();
            let lev = cands.first().is_some_and(|c| levenshtein1(&c.text, gold));
            Ok((hits, lev))
        })
        .collect::<Result<_>>()?;
    let n = per_item.len();
    let pct = |count: usize| 100.0 * count as f64 / n as f64;
    let topk = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, pct(per_item.iter().filter(|x| x.0[i]).count())))
        .collect();
    let lev = pct(per_item.iter().filter(|x| x.1).count());
    Ok(Report {
        source_lang: m.source_lang.clone(),
        target_lang: m.target_lang.clone(),
        model_name: model_name.to_string(),
        items: n,
        topk,
        levenshtein1: lev,
    })
}

/// Single-character cost matrix as CSV: a header row of target chars, then
/// one row per source char.
pub fn heatmap_csv(m: &TransliterationModel, src: &[char], tgt: &[char]) -> Result<String> {
    if src.is_empty() || tgt.is_empty() {
        return Err(Error::contract("heatmap needs at least one char per side"));
    }
    let mut out = String::new();
    for c in tgt {
        write!(out, ",{c}").unwrap();
    }
    out.push('\n');
    for &a in src {
        out.push(a);
        for &b in tgt {
            let cost = m.cost_of(&PiecePair::new(a.to_string(), b.to_string()))?;
            write!(out, ",{cost}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn export_heatmap(
    m: &TransliterationModel,
    src: &[char],
    tgt: &[char],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let csv = heatmap_csv(m, src, tgt)?;
    std::fs::write(path, csv).map_err(|e| Error::io(path, e))
}
