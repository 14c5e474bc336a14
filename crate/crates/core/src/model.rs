//! The directional substring-pair cost matrix.
//!
//! A model only stores pairs whose cost was learned. Every other pair costs
//! its initialization value, the total length of both pieces, so an
//! untrained model prices every alignment of `(s, t)` at `len(s) + len(t)`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub const DEFAULT_LMAX: usize = 3;
pub const MODEL_MAGIC: &str = "#translit-model v1";

/// A source piece matched to a target piece. Either side may be empty but
/// not both.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PiecePair {
    pub src: String,
    pub tgt: String,
}

impl PiecePair {
    pub fn new(src: impl Into<String>, tgt: impl Into<String>) -> Self {
        PiecePair {
            src: src.into(),
            tgt: tgt.into(),
        }
    }

    pub fn src_len(&self) -> usize {
        self.src.chars().count()
    }

    pub fn tgt_len(&self) -> usize {
        self.tgt.chars().count()
    }

    /// The initialization cost `len(src) + len(tgt)`.
    pub fn init_cost(&self) -> f64 {
        (self.src_len() + self.tgt_len()) as f64
    }
}

#[inline]
pub(crate) fn init_cost(src_len: usize, tgt_len: usize) -> f64 {
    (src_len + tgt_len) as f64
}

pub(crate) type TargetCosts = FxHashMap<Box<str>, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TransliterationModel {
    pub source_lang: String,
    pub target_lang: String,
    lmax: usize,
    pub rounds_trained: u32,
    // src piece -> tgt piece -> cost; nested so lookups work on borrowed slices
    costs: FxHashMap<Box<str>, TargetCosts>,
    alphabet_src: BTreeSet<char>,
    alphabet_tgt: BTreeSet<char>,
}

impl TransliterationModel {
    pub fn new(
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
        lmax: usize,
    ) -> Self {
        assert!(lmax >= 1, "lmax must be at least 1");
        TransliterationModel {
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            lmax,
            rounds_trained: 0,
            costs: FxHashMap::default(),
            alphabet_src: BTreeSet::new(),
            alphabet_tgt: BTreeSet::new(),
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn alphabet_src(&self) -> &BTreeSet<char> {
        &self.alphabet_src
    }

    pub fn alphabet_tgt(&self) -> &BTreeSet<char> {
        &self.alphabet_tgt
    }

    pub fn set_alphabets(&mut self, src: BTreeSet<char>, tgt: BTreeSet<char>) {
        self.alphabet_src = src;
        self.alphabet_tgt = tgt;
    }

    /// Number of stored (learned) pairs.
    pub fn len(&self) -> usize {
        self.costs.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// A copy with the same metadata and no stored costs.
    pub fn fresh_like(&self) -> Self {
        TransliterationModel {
            costs: FxHashMap::default(),
            ..self.clone()
        }
    }

    fn check(&self, p: &PiecePair) -> Result<()> {
        if p.src.is_empty() && p.tgt.is_empty() {
            return Err(Error::contract("piece pair with both sides empty"));
        }
        if p.src_len() > self.lmax || p.tgt_len() > self.lmax {
            return Err(Error::contract(format!(
                "piece pair {:?}/{:?} exceeds lmax {}",
                p.src, p.tgt, self.lmax
            )));
        }
        Ok(())
    }

    /// Stored cost if present, else `len(src) + len(tgt)`.
    pub fn cost_of(&self, p: &PiecePair) -> Result<f64> {
        self.check(p)?;
        Ok(self.stored(&p.src, &p.tgt).unwrap_or_else(|| p.init_cost()))
    }

    pub fn stored(&self, src: &str, tgt: &str) -> Option<f64> {
        self.costs.get(src)?.get(tgt).copied()
    }

    /// Stored targets for one source piece.
    pub(crate) fn targets(&self, src: &str) -> Option<&TargetCosts> {
        self.costs.get(src)
    }

    /// Store a learned cost. Costs must lie in `(0, len(src)+len(tgt)]`.
    pub fn set_cost(&mut self, p: PiecePair, cost: f64) -> Result<()> {
        self.check(&p)?;
        let init = p.init_cost();
        if !(cost > 0.0 && cost <= init) {
            return Err(Error::contract(format!(
                "cost {cost} for {:?}/{:?} outside (0, {init}]",
                p.src, p.tgt
            )));
        }
        self.costs
            .entry(p.src.into_boxed_str())
            .or_default()
            .insert(p.tgt.into_boxed_str(), cost);
        Ok(())
    }

    /// Stored entries in (src, tgt) order.
    pub fn entries(&self) -> Vec<(PiecePair, f64)> {
        let mut v: Vec<(PiecePair, f64)> = self
            .costs
            .iter()
            .flat_map(|(s, m)| {
                m.iter()
                    .map(move |(t, &c)| (PiecePair::new(s.as_ref(), t.as_ref()), c))
            })
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let alpha = |set: &BTreeSet<char>| set.iter().collect::<String>();
        let _ = writeln!(out, "{MODEL_MAGIC}");
        let _ = writeln!(out, "#src {}", self.source_lang);
        let _ = writeln!(out, "#tgt {}", self.target_lang);
        let _ = writeln!(out, "#lmax {}", self.lmax);
        let _ = writeln!(out, "#rounds {}", self.rounds_trained);
        let _ = writeln!(out, "#alphabet_src {}", alpha(&self.alphabet_src));
        let _ = writeln!(out, "#alphabet_tgt {}", alpha(&self.alphabet_tgt));
        for (p, c) in self.entries() {
            // 17 significant digits round-trip every f64
            let _ = writeln!(out, "{}\t{}\t{:.16e}", p.src, p.tgt, c);
        }
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == MODEL_MAGIC => {}
            Some((_, l)) if l.starts_with("#translit-model") => {
                return Err(Error::parse(
                    path,
                    1,
                    format!("unsupported model version {l:?}"),
                ))
            }
            _ => return Err(Error::parse(path, 1, "missing model header")),
        }
        let mut src_lang = None;
        let mut tgt_lang = None;
        let mut lmax = None;
        let mut rounds = None;
        let mut alpha_src = BTreeSet::new();
        let mut alpha_tgt = BTreeSet::new();
        let mut records = Vec::new();
        for (i, line) in lines {
            let lineno = i + 1;
            if let Some(h) = line.strip_prefix('#') {
                let (key, value) = h.split_once(' ').unwrap_or((h, ""));
                let num = |v: &str| {
                    v.parse::<u64>()
                        .map_err(|_| Error::parse(path, lineno, format!("bad number {v:?}")))
                };
                match key {
                    "src" => src_lang = Some(value.to_string()),
                    "tgt" => tgt_lang = Some(value.to_string()),
                    "lmax" => lmax = Some(num(value)? as usize),
                    "rounds" => rounds = Some(num(value)? as u32),
                    "alphabet_src" => alpha_src = value.chars().collect(),
                    "alphabet_tgt" => alpha_tgt = value.chars().collect(),
                    _ => {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("unknown header {key:?}"),
                        ))
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let cost: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad cost {:?}", fields[2])))?;
            records.push((lineno, PiecePair::new(fields[0], fields[1]), cost));
        }
        let missing = |what: &str| Error::parse(path, 1, format!("missing #{what} header"));
        let lmax = lmax.ok_or_else(|| missing("lmax"))?;
        if lmax == 0 {
            return Err(Error::parse(path, 1, "lmax must be at least 1"));
        }
        let mut m = TransliterationModel::new(
            src_lang.ok_or_else(|| missing("src"))?,
            tgt_lang.ok_or_else(|| missing("tgt"))?,
            lmax,
        );
        m.rounds_trained = rounds.ok_or_else(|| missing("rounds"))?;
        m.set_alphabets(alpha_src, alpha_tgt);
        for (lineno, p, c) in records {
            m.set_cost(p, c)
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes)
            .map_err(|e| Error::parse(path, 0, format!("invalid UTF-8: {e}")))?;
        Self::from_text(&text, path)
    }
}

/// Counts of matched piece pairs collected over one training round.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ObservationTable {
    counts: FxHashMap<PiecePair, u64>,
    totals: FxHashMap<String, u64>,
    grand_total: u64,
}

impl ObservationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, p: PiecePair, n: u64) {
        if n == 0 {
            return;
        }
        *self.totals.entry(p.src.clone()).or_default() += n;
        *self.counts.entry(p).or_default() += n;
        self.grand_total += n;
    }

    pub fn merge(mut self, other: ObservationTable) -> Self {
        for (p, n) in other.counts {
            self.record(p, n);
        }
        self
    }

    pub fn count(&self, p: &PiecePair) -> u64 {
        self.counts.get(p).copied().unwrap_or(0)
    }

    /// Marginal count of one source piece.
    pub fn total_for(&self, src: &str) -> u64 {
        self.totals.get(src).copied().unwrap_or(0)
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grand_total == 0
    }

    /// Entries sorted by pair.
    pub fn entries(&self) -> Vec<(&PiecePair, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(p, &n)| (p, n)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}
