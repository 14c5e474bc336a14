//! Iterative cost learning.
//!
//! Each round aligns every training pair under the current model, counts
//! the piece pairs of each minimum-cost matching, and re-estimates the
//! costs from those counts with a smoothed (pseudo-count plus base measure)
//! probability. Pairs the model cannot explain are flagged as flawed and do
//! not contribute counts once the model has learned anything.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::align::{align, flawed_cost, SourceView};
use crate::error::{Error, Result};
use crate::ingest::PairCorpus;
use crate::model::{ObservationTable, TransliterationModel, DEFAULT_LMAX};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub rounds: u32,
    pub lmax: usize,
    /// Pseudo-count mass given to the base measure.
    pub alpha: f64,
    /// Fraction of the initialization cost a matching must save for the pair
    /// to count as explained.
    pub delta_flaw: f64,
    pub cost_floor: f64,
    /// Stop once dirtiness moves by less than this between rounds; 0 disables.
    pub early_stop: f64,
    /// Pseudo-count pulling a learned cost back towards its initialization:
    /// a pair seen `c` times gets `(c * learned + k * init) / (c + k)`, so a
    /// long piece seen once stays expensive. 0 disables.
    pub shrink: f64,
    /// Rounds at the start that count every pair, flawed or not.
    pub warmup_rounds: u32,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rounds: 10,
            lmax: DEFAULT_LMAX,
            alpha: 1.0,
            delta_flaw: 0.5,
            cost_floor: 0.01,
            early_stop: 0.001,
            shrink: 1.0,
            warmup_rounds: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if self.lmax < 1 {
            return Err(Error::Config("lmax must be at least 1".into()));
        }
        if self.alpha.is_nan() || self.alpha <= 0.0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.delta_flaw) {
            return Err(Error::Config("delta_flaw must lie in [0, 1]".into()));
        }
        if !(self.shrink >= 0.0 && self.shrink.is_finite()) {
            return Err(Error::Config(
                "shrink must be a finite non-negative number".into(),
            ));
        }
        if !(self.cost_floor > 0.0 && self.cost_floor <= 1.0) {
            return Err(Error::Config("cost_floor must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub round_index: u32,
    pub mean_alignment_cost: f64,
    pub dirtiness: f64,
    pub distinct_pairs_observed: usize,
}

pub fn stats_csv(stats: &[RoundStats]) -> String {
    let mut out = String::from("round,mean_cost,dirtiness,distinct_pairs\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{},{:.9},{:.6},{}",
            s.round_index, s.mean_alignment_cost, s.dirtiness, s.distinct_pairs_observed
        );
    }
    out
}

fn train_pairs(corpus: &PairCorpus) -> Result<Vec<&(String, String)>> {
    let pairs: Vec<_> = corpus.bucket(crate::ingest::Split::Train).collect();
    if pairs.is_empty() {
        return Err(Error::Empty("training split has no pairs".into()));
    }
    Ok(pairs)
}

/// Align every training pair and count the pieces of each matching.
///
/// Flawed pairs contribute nothing once the model has finished its warm-up
/// rounds; before that (and in particular under an untrained model, where
/// every pair is flawed by construction) all pairs are counted.
pub fn run_round(
    m: &TransliterationModel,
    corpus: &PairCorpus,
    cfg: &TrainConfig,
) -> Result<(ObservationTable, RoundStats)> {
    let pairs = train_pairs(corpus)?;
    let exclude_flawed = m.rounds_trained >= cfg.warmup_rounds;
    let aligned: Vec<(f64, bool, Option<ObservationTable>)> = pairs
        .par_iter()
        .map(|(s, t)| {
            let a = align(m, s, t)?;
            let len = s.chars().count() + t.chars().count();
            let flawed = flawed_cost(a.total_cost, len, cfg.delta_flaw);
            let table = (!flawed || !exclude_flawed).then(|| {
                let mut obs = ObservationTable::new();
                for seg in a.segments {
                    obs.record(seg, 1);
                }
                obs
            });
            Ok((a.total_cost, flawed, table))
        })
        .collect::<Result<_>>()?;

    let n = aligned.len() as f64;
    let mean = aligned.iter().map(|x| x.0).sum::<f64>() / n;
    let flawed = aligned.iter().filter(|x| x.1).count() as f64;
    let obs = aligned
        .into_iter()
        .filter_map(|x| x.2)
        .fold(ObservationTable::new(), ObservationTable::merge);
    let stats = RoundStats {
        round_index: m.rounds_trained + 1,
        mean_alignment_cost: mean,
        dirtiness: flawed / n,
        distinct_pairs_observed: obs.distinct(),
    };
    Ok((obs, stats))
}

/// Re-estimate costs from one round of observations.
///
/// For an observed pair `p` the smoothed probability is
/// `(count(p) + alpha * P0(p)) / (N + alpha)` with base measure
/// `P0(p) = |src alphabet|^-len(src) * |tgt alphabet|^-len(tgt)`. The
/// ratio `-ln p / -ln p_min`, with `p_min` the least probable observed pair
/// or a pair seen once (`1 / (N + alpha)`) if that is less probable,
/// lies in `(0, 1]`. It is shrunk towards the initialization cost by the
/// `shrink` pseudo-count and clamped to `[cost_floor, len(src) + len(tgt)]`.
/// Pairs not observed this round fall back to their initialization cost.
pub fn update_costs(
    m: &TransliterationModel,
    obs: &ObservationTable,
    cfg: &TrainConfig,
) -> TransliterationModel {
    if obs.is_empty() {
        return m.clone();
    }
    let sigma_src = m.alphabet_src().len().max(1) as f64;
    let sigma_tgt = m.alphabet_tgt().len().max(1) as f64;
    let total = obs.grand_total() as f64;
    let entries = obs.entries();
    let probs: Vec<f64> = entries
        .iter()
        .map(|(p, n)| {
            let base =
                sigma_src.powi(-(p.src_len() as i32)) * sigma_tgt.powi(-(p.tgt_len() as i32));
            (*n as f64 + cfg.alpha * base) / (total + cfg.alpha)
        })
        .collect();
    // a peaked table must not stretch its costs towards the defaults
    let singleton = 1.0 / (total + cfg.alpha);
    let p_min = probs.iter().copied().fold(singleton, f64::min);
    let scale = -p_min.ln();

    let mut next = m.fresh_like();
    next.rounds_trained = m.rounds_trained + 1;
    for ((p, n), prob) in entries.into_iter().zip(probs) {
        let ratio = if scale > 0.0 { -prob.ln() / scale } else { 0.0 };
        let n = n as f64;
        let raw = (n * ratio + cfg.shrink * p.init_cost()) / (n + cfg.shrink);
        let cost = raw.clamp(cfg.cost_floor, p.init_cost());
        next.set_cost(p.clone(), cost)
            .expect("clamped cost lies in (0, init]");
    }
    next
}

fn alphabets(corpus: &PairCorpus) -> (BTreeSet<char>, BTreeSet<char>) {
    let mut src = BTreeSet::new();
    let mut tgt = BTreeSet::new();
    for (s, t) in corpus.bucket(crate::ingest::Split::Train) {
        src.extend(s.chars());
        tgt.extend(t.chars());
    }
    (src, tgt)
}

/// Train from scratch on the corpus's training split.
pub fn train(
    corpus: &PairCorpus,
    cfg: &TrainConfig,
) -> Result<(TransliterationModel, Vec<RoundStats>)> {
    cfg.validate()?;
    train_pairs(corpus)?;
    let mut model = TransliterationModel::new(&corpus.source_lang, &corpus.target_lang, cfg.lmax);
    let (src, tgt) = alphabets(corpus);
    model.set_alphabets(src, tgt);

    let mut stats: Vec<RoundStats> = Vec::new();
    for r in 0..cfg.rounds {
        let (obs, mut round) = run_round(&model, corpus, cfg)?;
        round.round_index = r + 1;
        model = update_costs(&model, &obs, cfg);
        // dirtiness only means something once flawed pairs are excluded
        let settled = stats.len() > cfg.warmup_rounds as usize
            && stats
                .last()
                .is_some_and(|prev| (prev.dirtiness - round.dirtiness).abs() < cfg.early_stop);
        stats.push(round);
        if settled {
            break;
        }
    }
    Ok((model, stats))
}

/// Fraction of training pairs the model flags as flawed.
pub fn dirtiness(m: &TransliterationModel, corpus: &PairCorpus, delta: f64) -> Result<f64> {
    let pairs = train_pairs(corpus)?;
    let flawed = pairs
        .par_iter()
        .map(|(s, t)| {
            let view = SourceView::new(m, s);
            let cost = crate::align::align_cost_view(&view, t);
            flawed_cost(cost, s.chars().count() + t.chars().count(), delta)
        })
        .filter(|&f| f)
        .count();
    Ok(flawed as f64 / pairs.len() as f64)
}
