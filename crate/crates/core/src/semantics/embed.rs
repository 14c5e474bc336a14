use std::path::Path;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::ingest::{normalize_text, read_lines, NormConfig};

/// Monolingual word vectors, words normalized like lexicon entries.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub language: String,
    dim: usize,
    words: Vec<String>,
    vectors: Vec<f64>,
    index: FxHashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(language: impl Into<String>, dim: usize) -> Self {
        EmbeddingTable {
            language: language.into(),
            dim,
            words: Vec::new(),
            vectors: Vec::new(),
            index: FxHashMap::default(),
        }
    }

    /// Adds a word; a word already present keeps its first vector.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::contract(format!(
                "vector for {word:?} has {} components, expected {}",
                vector.len(),
                self.dim
            )));
        }
        let w = normalize_text(word, &NormConfig::default());
        if w.is_empty() || self.index.contains_key(&w) {
            return Ok(());
        }
        self.index.insert(w.clone(), self.words.len());
        self.words.push(w);
        self.vectors.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// The `V D` text format read by [`load_embeddings`], insertion order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (id, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for x in self.vector(id) {
                out.push(' ');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub(crate) fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub(crate) fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    fn vector(&self, id: usize) -> &[f64] {
        &self.vectors[id * self.dim..(id + 1) * self.dim]
    }

    /// Ids of the `n` nearest other words, nearest first, ties by word.
    pub(crate) fn neighbor_ids(&self, id: usize, n: usize) -> Vec<usize> {
        let q = self.vector(id);
        let mut dist: Vec<(f64, usize)> = (0..self.len())
            .filter(|&j| j != id)
            .map(|j| {
                let d = q
                    .iter()
                    .zip(self.vector(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d, j)
            })
            .collect();
        let order = |x: &(f64, usize), y: &(f64, usize)| {
            x.0.total_cmp(&y.0)
                .then_with(|| self.words[x.1].cmp(&self.words[y.1]))
        };
        if n < dist.len() {
            dist.select_nth_unstable_by(n, order);
            dist.truncate(n);
        }
        dist.sort_by(order);
        dist.into_iter().map(|x| x.1).collect()
    }
}

/// `V D` header, then `word v1 .. vD` per line.
pub fn load_embeddings(path: impl AsRef<Path>, language: &str) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut it = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = it
        .next()
        .ok_or_else(|| Error::parse(path, 1, "missing `V D` header"))?;
    let nums: Vec<&str> = header.split_whitespace().collect();
    let parse_usize = |s: &str| s.parse::<usize>().ok();
    let (declared, dim) = match nums.as_slice() {
        [v, d] => match (parse_usize(v), parse_usize(d)) {
            (Some(v), Some(d)) if d > 0 => (v, d),
            _ => {
                return Err(Error::parse(
                    path,
                    1,
                    "header must be two positive integers",
                ))
            }
        },
        _ => return Err(Error::parse(path, 1, "header must be `V D`")),
    };
    let mut table = EmbeddingTable::new(language, dim);
    let mut rows = 0usize;
    let mut buf = Vec::with_capacity(dim);
    for (i, line) in it {
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let word = fields.next().unwrap_or_default();
        buf.clear();
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number {f:?}")))?;
            buf.push(v);
        }
        if buf.len() != dim {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dim} components, found {}", buf.len()),
            ));
        }
        table.insert(word, &buf)?;
        rows += 1;
    }
    if rows != declared {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {declared} vectors, file has {rows}"),
        ));
    }
    Ok(table)
}

/// Nearest words to `w` by Euclidean distance, excluding `w`; ties broken
/// lexicographically. Asking for more than exist returns all others.
pub fn nearest_neighbors(e: &EmbeddingTable, w: &str, n: usize) -> Result<Vec<String>> {
    let id = e
        .id(w)
        .ok_or_else(|| Error::Missing(format!("{w:?} not in {} embeddings", e.language)))?;
    Ok(e.neighbor_ids(id, n)
        .into_iter()
        .map(|j| e.word(j).to_string())
        .collect())
}

/// Known translation pairs with exact membership tests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TranslationDict {
    by_src: FxHashMap<String, Vec<String>>,
    pairs: FxHashSet<(String, String)>,
}

impl TranslationDict {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let cfg = NormConfig::default();
        let mut d = TranslationDict::default();
        for (a, b) in pairs {
            let (a, b) = (normalize_text(&a, &cfg), normalize_text(&b, &cfg));
            if a.is_empty() || b.is_empty() || d.pairs.contains(&(a.clone(), b.clone())) {
                continue;
            }
            d.by_src.entry(a.clone()).or_default().push(b.clone());
            d.pairs.insert((a, b));
        }
        d
    }

    pub fn contains(&self, src: &str, tgt: &str) -> bool {
        self.by_src
            .get(src)
            .is_some_and(|v| v.iter().any(|t| t == tgt))
    }

    pub fn translations(&self, src: &str) -> &[String] {
        self.by_src.get(src).map_or(&[], |v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// All pairs as sorted `src<TAB>tgt` lines.
    pub fn to_tsv(&self) -> String {
        let mut pairs: Vec<&(String, String)> = self.pairs.iter().collect();
        pairs.sort();
        pairs.iter().map(|(a, b)| format!("{a}\t{b}\n")).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `src<TAB>tgt` per line.
pub fn load_dictionary(path: impl AsRef<Path>) -> Result<TranslationDict> {
    let path = path.as_ref();
    let mut pairs = Vec::new();
    for (i, line) in read_lines(path)?.iter().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        pairs.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(TranslationDict::new(pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkOutcome {
    pub passes: bool,
    pub link_count: usize,
    /// A word was absent from its table; the test failed closed.
    pub missing: bool,
}

/// Dictionary pairs linking the two neighbour lists.
pub(crate) fn count_links(
    nn1: &[usize],
    e1: &EmbeddingTable,
    nn2: &[usize],
    e2: &EmbeddingTable,
    dict: &TranslationDict,
) -> usize {
    let right: FxHashSet<&str> = nn2.iter().map(|&j| e2.word(j)).collect();
    nn1.iter()
        .map(|&i| {
            dict.translations(e1.word(i))
                .iter()
                .filter(|t| right.contains(t.as_str()))
                .count()
        })
        .sum()
}

/// Count dictionary pairs between the `n` neighbours of `w1` (in `e1`) and
/// of `w2` (in `e2`); the test passes at `tau` or more links.
pub fn embedding_test(
    w1: &str,
    w2: &str,
    e1: &EmbeddingTable,
    e2: &EmbeddingTable,
    dict: &TranslationDict,
    n: usize,
    tau: usize,
) -> LinkOutcome {
    let (Some(i1), Some(i2)) = (e1.id(w1), e2.id(w2)) else {
        return LinkOutcome {
            passes: false,
            link_count: 0,
            missing: true,
        };
    };
    let links = count_links(
        &e1.neighbor_ids(i1, n),
        e1,
        &e2.neighbor_ids(i2, n),
        e2,
        dict,
    );
    LinkOutcome {
        passes: links >= tau,
        link_count: links,
        missing: false,
    }
}
