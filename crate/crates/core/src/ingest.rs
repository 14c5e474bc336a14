//! Normalization, cleaning and splitting of name-pair corpora, plus the
//! plain-text loaders for pair files and frequency lexicons.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Names with more tokens than this are not treated as person/place names.
pub const MAX_NAME_TOKENS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormConfig {
    pub lowercase: bool,
    pub punctuation_to_underscore: bool,
    pub strip_outer_whitespace: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            lowercase: true,
            punctuation_to_underscore: true,
            strip_outer_whitespace: true,
        }
    }
}

fn is_unified_punct(c: char) -> bool {
    matches!(c, '-' | '.' | ',')
}

/// Normalize one string: NFC, optional lowercasing, hyphen/period/comma to a
/// single underscore with underscore runs collapsed and outer underscores
/// stripped, optional outer whitespace stripping.
pub fn normalize_text(s: &str, cfg: &NormConfig) -> String {
    let composed: String = s.nfc().collect();
    let cased = if cfg.lowercase {
        composed.to_lowercase()
    } else {
        composed
    };

    let mut out = String::with_capacity(cased.len());
    if cfg.punctuation_to_underscore {
        for c in cased.chars() {
            let c = if is_unified_punct(c) { '_' } else { c };
            if c == '_' && out.ends_with('_') {
                continue;
            }
            out.push(c);
        }
    } else {
        out = cased;
    }

    let trimmed = out.trim_matches(|c: char| {
        (cfg.punctuation_to_underscore && c == '_')
            || (cfg.strip_outer_whitespace && c.is_whitespace())
    });
    trimmed.nfc().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Tune,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Tune => "tune",
            Split::Test => "test",
        }
    }
}

/// Cleaned pairs with their split assignment. Freshly cleaned corpora tag
/// everything as [`Split::Train`] until [`split_corpus`] runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCorpus {
    pub pairs: Vec<(String, String)>,
    pub source_lang: String,
    pub target_lang: String,
    pub split_tags: Vec<Split>,
}

impl PairCorpus {
    /// Wrap already-normalized pairs; all tagged as training data.
    pub fn from_pairs(
        pairs: Vec<(String, String)>,
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
    ) -> Self {
        let n = pairs.len();
        PairCorpus {
            pairs,
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            split_tags: vec![Split::Train; n],
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn bucket(&self, split: Split) -> impl Iterator<Item = &(String, String)> {
        self.pairs
            .iter()
            .zip(&self.split_tags)
            .filter(move |(_, &t)| t == split)
            .map(|(p, _)| p)
    }

    pub fn bucket_len(&self, split: Split) -> usize {
        self.split_tags.iter().filter(|&&t| t == split).count()
    }

    /// A new corpus holding only one bucket, retagged as training data.
    pub fn subset(&self, split: Split) -> PairCorpus {
        PairCorpus::from_pairs(
            self.bucket(split).cloned().collect(),
            self.source_lang.clone(),
            self.target_lang.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    FieldCount(usize),
    EmptySide,
    TooManyTokens,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::FieldCount(n) => write!(f, "expected 2 fields, found {n}"),
            RejectReason::EmptySide => f.write_str("empty side after cleaning"),
            RejectReason::TooManyTokens => {
                write!(f, "more than {MAX_NAME_TOKENS} name tokens")
            }
        }
    }
}

/// `position` is a 1-based line number for file rejects and a 0-based
/// input index for cleaning rejects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub position: usize,
    pub reason: RejectReason,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanReport {
    pub rejects: Vec<Reject>,
    pub duplicates: usize,
}

impl CleanReport {
    pub fn dropped(&self) -> usize {
        self.rejects.len() + self.duplicates
    }
}

fn token_count(s: &str) -> usize {
    s.split(|c: char| c == '_' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .count()
}

/// Normalize, drop empty sides and over-long names, dedup keeping the first
/// occurrence.
pub fn clean_corpus(
    raw: &[(String, String)],
    cfg: &NormConfig,
    source_lang: &str,
    target_lang: &str,
) -> (PairCorpus, CleanReport) {
    let mut report = CleanReport::default();
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for (idx, (src, tgt)) in raw.iter().enumerate() {
        let s = normalize_text(src, cfg);
        let t = normalize_text(tgt, cfg);
        let reason = if s.is_empty() || t.is_empty() {
            Some(RejectReason::EmptySide)
        } else if token_count(&s) > MAX_NAME_TOKENS || token_count(&t) > MAX_NAME_TOKENS {
            Some(RejectReason::TooManyTokens)
        } else {
            None
        };
        if let Some(reason) = reason {
            report.rejects.push(Reject {
                position: idx,
                reason,
                raw: format!("{src}\t{tgt}"),
            });
            continue;
        }
        if !seen.insert((s.clone(), t.clone())) {
            report.duplicates += 1;
            continue;
        }
        pairs.push((s, t));
    }
    (
        PairCorpus::from_pairs(pairs, source_lang, target_lang),
        report,
    )
}

/// Bucket sizes for `n` items: round(0.8n) train, round(0.1n) tune, rest test.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = (n * 8 + 5) / 10;
    let tune = ((n + 5) / 10).min(n - train);
    (train, tune, n - train - tune)
}

/// Seeded 80/10/10 assignment. The permutation depends only on the seed and
/// the corpus size.
pub fn split_corpus(mut corpus: PairCorpus, seed: u64) -> Result<PairCorpus> {
    let n = corpus.len();
    if n == 0 {
        return Err(Error::Empty("cannot split an empty corpus".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let (train, tune, _) = split_sizes(n);
    let mut tags = vec![Split::Test; n];
    for (rank, &idx) in order.iter().enumerate() {
        tags[idx] = if rank < train {
            Split::Train
        } else if rank < train + tune {
            Split::Tune
        } else {
            Split::Test
        };
    }
    corpus.split_tags = tags;
    Ok(corpus)
}

/// Read a UTF-8 text file line by line, stripping a leading BOM and `\r`.
/// Invalid UTF-8 is reported with its 1-based line number.
pub(crate) fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(&bytes);
    let mut lines = Vec::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        let line = std::str::from_utf8(raw)
            .map_err(|e| Error::parse(path, i + 1, format!("invalid UTF-8: {e}")))?;
        lines.push(line.to_string());
    }
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairFile {
    pub pairs: Vec<(String, String)>,
    pub rejects: Vec<Reject>,
}

/// Parse a `source<TAB>target` file. `#` lines and blank lines are skipped;
/// lines with the wrong field count go to `rejects`.
pub fn load_pairs(path: impl AsRef<Path>) -> Result<PairFile> {
    let path = path.as_ref();
    let mut out = PairFile::default();
    for (i, line) in read_lines(path)?.into_iter().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            out.rejects.push(Reject {
                position: i + 1,
                reason: RejectReason::FieldCount(fields.len()),
                raw: line.clone(),
            });
            continue;
        }
        out.pairs
            .push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(out)
}

pub fn write_pairs<'a>(
    path: impl AsRef<Path>,
    pairs: impl IntoIterator<Item = &'a (String, String)>,
) -> Result<()> {
    let path = path.as_ref();
    let mut buf = String::new();
    for (s, t) in pairs {
        buf.push_str(s);
        buf.push('\t');
        buf.push_str(t);
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub words: Vec<String>,
    pub language: String,
}

impl Lexicon {
    /// Normalize and dedup `words`, keeping their given (frequency) order.
    pub fn new(words: impl IntoIterator<Item = String>, language: impl Into<String>) -> Self {
        let cfg = NormConfig::default();
        let mut seen = HashSet::new();
        let words = words
            .into_iter()
            .map(|w| normalize_text(&w, &cfg))
            .filter(|w| !w.is_empty() && seen.insert(w.clone()))
            .collect();
        Lexicon {
            words,
            language: language.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }
}

/// Load a lexicon: one word per line in descending frequency. An optional
/// second tab-separated integer column is taken as the frequency; the list
/// is then ordered by (frequency desc, word asc).
pub fn load_lexicon(path: impl AsRef<Path>, language: &str) -> Result<Lexicon> {
    let path = path.as_ref();
    let mut rows: Vec<(String, Option<u64>)> = Vec::new();
    for (i, line) in read_lines(path)?.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default().to_string();
        let freq = match fields.next() {
            Some(f) => Some(
                f.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad frequency {f:?}")))?,
            ),
            None => None,
        };
        rows.push((word, freq));
    }
    if rows.iter().all(|(_, f)| f.is_some()) && !rows.is_empty() {
        let cfg = NormConfig::default();
        rows.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| normalize_text(&a.0, &cfg).cmp(&normalize_text(&b.0, &cfg)))
        });
    }
    Ok(Lexicon::new(rows.into_iter().map(|(w, _)| w), language))
}
