//! Word vectors: pre-trained embeddings read from a text file, or TF-IDF
//! rows fitted on a corpus of triple sets.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triple_model::{ObjectValue, TripleSet};

/// Word vectors loaded from a plain-text embedding file.
///
/// The format is a `<vocab_count> <dimension>` header followed by one line
/// per word: the word, then `dimension` space-separated components.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dimension: usize,
    entries: HashMap<String, Vec<f64>>,
}

impl EmbeddingStore {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::in_file(path, e))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let format = |line: usize, message: String| Error::EmbeddingFormat { line, message };

        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines
            .next()
            .ok_or_else(|| format(1, "missing header".into()))?;
        let header: Vec<&str> = header.split_whitespace().collect();
        let [count, dimension] = header[..] else {
            return Err(format(
                header_line,
                "header must be `<vocab_count> <dimension>`".into(),
            ));
        };
        let count: usize = count
            .parse()
            .map_err(|_| format(header_line, format!("bad vocabulary count {count:?}")))?;
        let dimension: usize = dimension
            .parse()
            .map_err(|_| format(header_line, format!("bad dimension {dimension:?}")))?;
        if dimension < 1 {
            return Err(format(header_line, "dimension must be at least 1".into()));
        }

        let mut entries = HashMap::with_capacity(count);
        let mut rows = 0usize;
        let mut last_line = header_line;
        for (line_no, line) in lines {
            last_line = line_no;
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let vector = fields
                .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| format(line_no, format!("non-numeric component for {word:?}")))?;
            if vector.len() != dimension {
                return Err(format(
                    line_no,
                    format!(
                        "{word:?} has {} components, expected {dimension}",
                        vector.len()
                    ),
                ));
            }
            rows += 1;
            entries.entry(word.to_string()).or_insert(vector);
        }
        if rows != count {
            return Err(format(
                last_line,
                format!("header declares {count} rows, found {rows}"),
            ));
        }
        Ok(EmbeddingStore { dimension, entries })
    }

    /// Builds a store from in-memory vectors. Later duplicates are ignored.
    pub fn from_entries<I, S>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dimension < 1 {
            return Err(Error::EmbeddingFormat {
                line: 0,
                message: "dimension must be at least 1".into(),
            });
        }
        let mut map = HashMap::new();
        for (word, vector) in entries {
            let word = word.into();
            if vector.len() != dimension || vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::EmbeddingFormat {
                    line: 0,
                    message: format!("bad vector for {word:?}"),
                });
            }
            map.entry(word).or_insert(vector);
        }
        Ok(EmbeddingStore {
            dimension,
            entries: map,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.entries.get(word).map(Vec::as_slice)
    }
}

/// Tokens of one triple set seen as a TF-IDF document: subjects,
/// predicates and qualitative objects. Numeric objects are left out.
pub fn document_tokens(set: &TripleSet) -> Vec<&str> {
    let mut tokens = Vec::new();
    for triple in &set.triples {
        tokens.extend(triple.subject.tokens().iter().map(String::as_str));
        tokens.extend(triple.predicate.tokens().iter().map(String::as_str));
        if let ObjectValue::Qualitative(term) = &triple.object {
            tokens.extend(term.tokens().iter().map(String::as_str));
        }
    }
    tokens
}

/// TF-IDF weights over a corpus where each triple set is one document.
///
/// `tf(m,d) = f(m,d) / |d|`, `idf(m) = ln(N / df(m)) + 1`. The vector of a
/// word is its row of the word-by-document weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocabulary: BTreeMap<String, usize>,
    documents: Vec<String>,
    doc_frequencies: Vec<usize>,
    counts: Vec<Vec<usize>>,
    doc_lengths: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl TfIdfModel {
    pub fn fit<'a, I>(corpus: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a TripleSet>,
    {
        let docs: Vec<(&str, Vec<&str>)> = corpus
            .into_iter()
            .map(|set| (set.label.as_str(), document_tokens(set)))
            .collect();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if let Some((label, _)) = docs.iter().find(|(_, tokens)| tokens.is_empty()) {
            return Err(Error::EmptyDocument(label.to_string()));
        }

        let mut vocabulary = BTreeMap::new();
        for (_, tokens) in &docs {
            for &token in tokens {
                vocabulary.entry(token.to_string()).or_insert(0);
            }
        }
        for (index, slot) in vocabulary.values_mut().enumerate() {
            *slot = index;
        }

        let n_docs = docs.len();
        let mut counts = vec![vec![0usize; n_docs]; vocabulary.len()];
        let mut doc_lengths = Vec::with_capacity(n_docs);
        for (d, (_, tokens)) in docs.iter().enumerate() {
            for token in tokens {
                counts[vocabulary[*token]][d] += 1;
            }
            doc_lengths.push(tokens.len());
        }

        let doc_frequencies: Vec<usize> = counts
            .iter()
            .map(|row| row.iter().filter(|&&c| c > 0).count())
            .collect();

        let rows = counts
            .iter()
            .zip(&doc_frequencies)
            .map(|(row, &df)| {
                let idf = (n_docs as f64 / df as f64).ln() + 1.0;
                row.iter()
                    .zip(&doc_lengths)
                    .map(|(&c, &len)| c as f64 / len as f64 * idf)
                    .collect()
            })
            .collect();

        Ok(TfIdfModel {
            vocabulary,
            documents: docs.iter().map(|(label, _)| label.to_string()).collect(),
            doc_frequencies,
            counts,
            doc_lengths,
            rows,
        })
    }

    pub fn document_count(&self) -> usize {
        self.documents.len()
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.keys().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vocabulary.contains_key(word)
    }

    pub fn doc_frequency(&self, word: &str) -> Option<usize> {
        self.vocabulary.get(word).map(|&i| self.doc_frequencies[i])
    }

    /// Relative frequency of `word` in document `doc`.
    pub fn tf(&self, word: &str, doc: usize) -> Option<f64> {
        let i = *self.vocabulary.get(word)?;
        let len = *self.doc_lengths.get(doc)?;
        Some(self.counts[i][doc] as f64 / len as f64)
    }

    pub fn idf(&self, word: &str) -> Option<f64> {
        let df = self.doc_frequency(word)?;
        Some((self.document_count() as f64 / df as f64).ln() + 1.0)
    }

    pub fn tfidf(&self, word: &str, doc: usize) -> Option<f64> {
        self.row(word)?.get(doc).copied()
    }

    pub fn row(&self, word: &str) -> Option<&[f64]> {
        self.vocabulary.get(word).map(|&i| self.rows[i].as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Embedding,
    TfIdf,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Embedding => "embedding",
            Backend::TfIdf => "tfidf",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "embedding" => Ok(Backend::Embedding),
            "tfidf" | "tf-idf" => Ok(Backend::TfIdf),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

/// Source of word vectors for one similarity run.
#[derive(Debug, Clone)]
pub enum VectorModel {
    Embedding(EmbeddingStore),
    TfIdf(TfIdfModel),
}

impl VectorModel {
    pub fn backend(&self) -> Backend {
        match self {
            VectorModel::Embedding(_) => Backend::Embedding,
            VectorModel::TfIdf(_) => Backend::TfIdf,
        }
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        match self {
            VectorModel::Embedding(store) => store.get(word),
            VectorModel::TfIdf(model) => model.row(word),
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.vector(word).is_some()
    }
}

impl From<EmbeddingStore> for VectorModel {
    fn from(store: EmbeddingStore) -> Self {
        VectorModel::Embedding(store)
    }
}

impl From<TfIdfModel> for VectorModel {
    fn from(model: TfIdfModel) -> Self {
        VectorModel::TfIdf(model)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WordSimPolicy {
    pub backend: Backend,
    /// Map negative cosines to 0.
    pub clamp_negative: bool,
}

impl WordSimPolicy {
    pub fn new(backend: Backend) -> Self {
        WordSimPolicy {
            backend,
            clamp_negative: true,
        }
    }
}

/// Cosine of two vectors, `None` when either has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

/// Similarity of two words.
///
/// Cosine of their vectors when both have one. A word without a vector only
/// matches its exact byte-identical twin (1.0), everything else is 0.0.
pub fn word_similarity(a: &str, b: &str, policy: &WordSimPolicy, model: &VectorModel) -> f64 {
    if a == b {
        return 1.0;
    }
    match (model.vector(a), model.vector(b)) {
        (Some(va), Some(vb)) => match cosine(va, vb) {
            Some(c) if policy.clamp_negative => c.clamp(0.0, 1.0),
            Some(c) => c.clamp(-1.0, 1.0),
            None => 0.0,
        },
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triple_model::parse_listing;

    fn store() -> VectorModel {
        EmbeddingStore::parse("2 3\nnoir 1 0 0\nbleu 0 1 0")
            .unwrap()
            .into()
    }

    #[test]
    fn minimal_file() {
        let s = EmbeddingStore::parse("2 3\nnoir 1 0 0\nbleu 0 1 0").unwrap();
        assert_eq!(s.dimension(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("noir"), Some(&[1.0, 0.0, 0.0][..]));
        assert_eq!(s.get("noir"), s.get("noir"));
        assert_eq!(s.get("rouge"), None);
    }

    #[test]
    fn short_row_is_an_arity_error() {
        match EmbeddingStore::parse("2 3\nnoir 1 0 0\nbleu 0 1") {
            Err(Error::EmbeddingFormat { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_headers() {
        assert!(EmbeddingStore::parse("1 0\nnoir").is_err());
        assert!(EmbeddingStore::parse("").is_err());
        assert!(EmbeddingStore::parse("3\nnoir 1").is_err());
        assert!(EmbeddingStore::parse("3 1\nnoir 1").is_err());
        assert!(EmbeddingStore::parse("1 1\nnoir nan").is_err());
    }

    #[test]
    fn duplicates_keep_first() {
        let s = EmbeddingStore::parse("2 1\nnoir 1\nnoir 2").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get("noir"), Some(&[1.0][..]));
    }

    #[test]
    fn word_similarity_rules() {
        let model = store();
        let policy = WordSimPolicy::new(Backend::Embedding);
        assert_eq!(word_similarity("noir", "noir", &policy, &model), 1.0);
        assert_eq!(word_similarity("noir", "bleu", &policy, &model), 0.0);
        assert_eq!(word_similarity("xyzzy", "xyzzy", &policy, &model), 1.0);
        assert_eq!(word_similarity("xyzzy", "noir", &policy, &model), 0.0);
    }

    #[test]
    fn negative_cosine_clamped() {
        let model: VectorModel = EmbeddingStore::from_entries(2, [("a", vec![1.0, 0.0]), ("b", vec![-1.0, 0.1])])
            .unwrap()
            .into();
        let mut policy = WordSimPolicy::new(Backend::Embedding);
        assert_eq!(word_similarity("a", "b", &policy, &model), 0.0);
        policy.clamp_negative = false;
        assert!(word_similarity("a", "b", &policy, &model) < -0.9);
    }

    #[test]
    fn cosine_closed_form() {
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), None);
    }

    #[test]
    fn tfidf_empty_inputs() {
        let none: Vec<TripleSet> = Vec::new();
        assert!(matches!(TfIdfModel::fit(&none), Err(Error::EmptyCorpus)));

        let blank = parse_listing("<&,-,5>", "blank").unwrap();
        match TfIdfModel::fit([&blank]) {
            Err(Error::EmptyDocument(label)) => assert_eq!(label, "blank"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numeric_objects_are_not_tfidf_tokens() {
        let set = parse_listing("<vo:a,vo:b,vo:5>\n<vo:a,vo:c,vo:noir>", "x").unwrap();
        assert_eq!(document_tokens(&set), ["a", "b", "a", "c", "noir"]);
    }
}
