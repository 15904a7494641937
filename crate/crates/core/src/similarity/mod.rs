//! Similarity between terms, triples and triple sets.
//!
//! Textual components (subjects, predicates and qualitative objects) are
//! compared word by word with a best-match average. Numeric objects are
//! compared by `1 / (1 + euclidean distance)`. A triple score is the
//! weighted mean of its three component scores, and a set score aggregates
//! the scores of predicate-aligned triple pairs.

mod align;
mod matrix;
mod taxonomy;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::triple_model::{ObjectValue, Term, Triple, TripleSet};
use crate::vector_space::{word_similarity, VectorModel, WordSimPolicy};

pub use align::{align_triples, AlignedPairs};
pub(crate) use matrix::csv_field as csv_label;
pub use matrix::SimilarityMatrix;
pub use taxonomy::{batet_from_sets, batet_similarity, Taxonomy, DEFAULT_BATET_CEILING};

const WEIGHT_SUM: f64 = 3.0;
const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Subject, predicate and object weights. They sum to 3 so a triple score is
/// a convex combination of its component scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

impl Weights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_components(alpha, beta, gamma)?;
        let sum = alpha + beta + gamma;
        if (sum - WEIGHT_SUM).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "alpha + beta + gamma must be 3, got {sum}"
            )));
        }
        Ok(Weights { alpha, beta, gamma })
    }

    /// Scales arbitrary non-negative weights so they sum to 3.
    pub fn rescaled(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_components(alpha, beta, gamma)?;
        let sum = alpha + beta + gamma;
        if sum <= 0.0 {
            return Err(Error::InvalidWeights("weights sum to zero".into()));
        }
        let k = WEIGHT_SUM / sum;
        Ok(Weights {
            alpha: alpha * k,
            beta: beta * k,
            gamma: gamma * k,
        })
    }

    /// Subject excluded, predicate and object sharing the weight.
    pub fn subject_ablation() -> Self {
        Weights {
            alpha: 0.0,
            beta: 1.5,
            gamma: 1.5,
        }
    }
}

fn check_components(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    if [alpha, beta, gamma].iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weights must be finite and non-negative, got ({alpha}, {beta}, {gamma})"
        )));
    }
    Ok(())
}

macro_rules! named_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($name))),
                }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SetMode {
    /// Sum of pair scores over pairs plus unmatched triples; in [0,1].
    #[default]
    Normalized,
    /// Mean over qualitative pairs plus mean over quantitative pairs; in [0,2].
    Literal,
}

named_enum!(SetMode { Normalized => "normalized", Literal => "literal" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    #[default]
    Literal,
    /// Rescale each component to [0,1] with the corpus min/max of its predicate.
    MinMax,
}

named_enum!(NumericMode { Literal => "literal", MinMax => "minmax" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Alignment {
    #[default]
    ByPredicate,
}

named_enum!(Alignment { ByPredicate => "bypredicate" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityConfig {
    pub weights: Weights,
    pub policy: WordSimPolicy,
    pub alignment: Alignment,
    pub set_mode: SetMode,
    pub numeric_mode: NumericMode,
}

impl SimilarityConfig {
    pub fn new(policy: WordSimPolicy) -> Self {
        SimilarityConfig {
            weights: Weights::default(),
            policy,
            alignment: Alignment::ByPredicate,
            set_mode: SetMode::Normalized,
            numeric_mode: NumericMode::Literal,
        }
    }
}

/// Per-predicate, per-component value ranges used by [`NumericMode::MinMax`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NumericRanges {
    ranges: BTreeMap<String, Vec<(f64, f64)>>,
}

impl NumericRanges {
    pub fn from_sets<'a, I>(sets: I) -> Self
    where
        I: IntoIterator<Item = &'a TripleSet>,
    {
        let mut ranges: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for set in sets {
            for triple in &set.triples {
                let Some(values) = triple.object.numeric() else {
                    continue;
                };
                let entry = ranges.entry(triple.predicate.label().to_string()).or_default();
                for (i, &v) in values.iter().enumerate() {
                    match entry.get_mut(i) {
                        Some((lo, hi)) => {
                            *lo = lo.min(v);
                            *hi = hi.max(v);
                        }
                        None => entry.push((v, v)),
                    }
                }
            }
        }
        NumericRanges { ranges }
    }

    pub fn get(&self, predicate: &str) -> Option<&[(f64, f64)]> {
        self.ranges.get(predicate).map(Vec::as_slice)
    }

    fn rescale(&self, predicate: &str, values: &[f64]) -> Vec<f64> {
        let Some(ranges) = self.get(predicate) else {
            return values.to_vec();
        };
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| match ranges.get(i) {
                Some(&(lo, hi)) if hi > lo => (v - lo) / (hi - lo),
                Some(_) => 0.0,
                None => v,
            })
            .collect()
    }
}

/// Weighted mean of subject, predicate and object scores, kept within the
/// range of its inputs against rounding.
pub fn weighted_triple_score(weights: &Weights, subject: f64, predicate: f64, object: f64) -> f64 {
    let mean = (weights.alpha * subject + weights.beta * predicate + weights.gamma * object) / WEIGHT_SUM;
    let lo = subject.min(predicate).min(object);
    let hi = subject.max(predicate).max(object);
    mean.clamp(lo, hi)
}

/// `1 / (1 + ||a - b||)`.
pub fn distance_similarity(a: &[f64], b: &[f64]) -> f64 {
    let squared: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 / (1.0 + squared.sqrt())
}

/// Computes similarities under one fixed configuration and vector model.
#[derive(Debug, Clone)]
pub struct SimilarityEngine<'m> {
    model: &'m VectorModel,
    config: SimilarityConfig,
    ranges: NumericRanges,
}

impl<'m> SimilarityEngine<'m> {
    pub fn new(model: &'m VectorModel, config: SimilarityConfig) -> Result<Self> {
        if model.backend() != config.policy.backend {
            return Err(Error::BackendMismatch {
                policy: config.policy.backend.as_str(),
                model: model.backend().as_str(),
            });
        }
        Ok(SimilarityEngine {
            model,
            config,
            ranges: NumericRanges::default(),
        })
    }

    /// Sets the ranges used when `numeric_mode` is min-max. Predicates with
    /// no recorded range are compared on raw values.
    pub fn with_ranges(mut self, ranges: NumericRanges) -> Self {
        self.ranges = ranges;
        self
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    pub fn model(&self) -> &VectorModel {
        self.model
    }

    fn word(&self, a: &str, b: &str) -> f64 {
        word_similarity(a, b, &self.config.policy, self.model)
    }

    /// Best match of `word` among the tokens of `term`.
    pub fn sim_word_term(&self, word: &str, term: &Term) -> Result<f64> {
        if term.tokens().is_empty() {
            return Err(Error::EmptyTerm(term.raw().to_string()));
        }
        Ok(self.best_match(word, term.tokens()))
    }

    fn best_match(&self, word: &str, tokens: &[String]) -> f64 {
        tokens
            .iter()
            .map(|t| self.word(word, t))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Average over the words of both terms of each word's best match in
    /// the other term.
    pub fn sim_qualitative(&self, a: &Term, b: &Term) -> Result<f64> {
        for term in [a, b] {
            if term.tokens().is_empty() {
                return Err(Error::EmptyTerm(term.raw().to_string()));
            }
        }
        let forward: f64 = a.tokens().iter().map(|m| self.best_match(m, b.tokens())).sum();
        let backward: f64 = b.tokens().iter().map(|m| self.best_match(m, a.tokens())).sum();
        Ok((forward + backward) / (a.tokens().len() + b.tokens().len()) as f64)
    }

    /// Distance-based similarity of two numeric objects sharing `predicate`.
    pub fn sim_quantitative(&self, predicate: &Term, a: &ObjectValue, b: &ObjectValue) -> Result<f64> {
        let not_numeric = || Error::ObjectKind {
            predicate: predicate.raw().to_string(),
            expected: "quantitative",
        };
        let va = a.numeric().ok_or_else(not_numeric)?;
        let vb = b.numeric().ok_or_else(not_numeric)?;
        if va.len() != vb.len() {
            return Err(Error::ArityMismatch {
                predicate: predicate.raw().to_string(),
                left: va.len(),
                right: vb.len(),
            });
        }
        Ok(match self.config.numeric_mode {
            NumericMode::Literal => distance_similarity(va, vb),
            NumericMode::MinMax => {
                let label = predicate.label();
                distance_similarity(&self.ranges.rescale(label, va), &self.ranges.rescale(label, vb))
            }
        })
    }

    /// Score of two triples with qualitative objects.
    pub fn sim_triple_qualitative(&self, a: &Triple, b: &Triple) -> Result<f64> {
        let (ObjectValue::Qualitative(oa), ObjectValue::Qualitative(ob)) = (&a.object, &b.object)
        else {
            return Err(Error::ObjectKind {
                predicate: a.predicate.raw().to_string(),
                expected: "qualitative",
            });
        };
        let subject = self.sim_qualitative(&a.subject, &b.subject)?;
        let predicate = self.sim_qualitative(&a.predicate, &b.predicate)?;
        let object = self.sim_qualitative(oa, ob)?;
        Ok(weighted_triple_score(&self.config.weights, subject, predicate, object))
    }

    /// Score of two triples with quantitative objects.
    pub fn sim_triple_quantitative(&self, a: &Triple, b: &Triple) -> Result<f64> {
        let object = self.sim_quantitative(&a.predicate, &a.object, &b.object)?;
        let subject = self.sim_qualitative(&a.subject, &b.subject)?;
        let predicate = self.sim_qualitative(&a.predicate, &b.predicate)?;
        Ok(weighted_triple_score(&self.config.weights, subject, predicate, object))
    }

    /// Aggregate similarity of two triple sets under the configured set mode.
    pub fn sim_sets(&self, g1: &TripleSet, g2: &TripleSet) -> Result<f64> {
        for set in [g1, g2] {
            if set.is_empty() {
                return Err(Error::EmptySet(set.label.clone()));
            }
        }
        let aligned = align_triples(g1, g2);
        let qual = self.pair_scores(&aligned.qual_pairs, Self::sim_triple_qualitative)?;
        let quant = self.pair_scores(&aligned.quant_pairs, Self::sim_triple_quantitative)?;

        Ok(match self.config.set_mode {
            SetMode::Normalized => {
                let mut all: Vec<f64> = qual.into_iter().chain(quant).collect();
                let total = ordered_sum(&mut all);
                let count = aligned.pair_count() + aligned.unmatched_count();
                total / count as f64
            }
            SetMode::Literal => mean_or_zero(qual) + mean_or_zero(quant),
        })
    }

    fn pair_scores(
        &self,
        pairs: &[(&Triple, &Triple)],
        score: fn(&Self, &Triple, &Triple) -> Result<f64>,
    ) -> Result<Vec<f64>> {
        pairs.iter().map(|(a, b)| score(self, a, b)).collect()
    }

    /// Pairwise set similarities. Cells are computed in parallel; the
    /// lower triangle mirrors the upper one.
    pub fn similarity_matrix(&self, catalog: &[TripleSet]) -> Result<SimilarityMatrix> {
        let n = catalog.len();
        if n < 2 {
            return Err(Error::TooFewSets(n));
        }
        let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let scores = cells
            .par_iter()
            .map(|&(i, j)| self.sim_sets(&catalog[i], &catalog[j]))
            .collect::<Result<Vec<f64>>>()?;

        let mut values = vec![0.0; n * n];
        for (&(i, j), score) in cells.iter().zip(scores) {
            values[i * n + j] = score;
            values[j * n + i] = score;
        }
        Ok(SimilarityMatrix::new(
            catalog.iter().map(|s| s.label.clone()).collect(),
            values,
            self.config,
        ))
    }
}

// Sorting first makes the sum independent of pair order, so swapping the
// two sets gives a bit-identical result.
fn ordered_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

fn mean_or_zero(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        ordered_sum(&mut values) / values.len() as f64
    }
}
