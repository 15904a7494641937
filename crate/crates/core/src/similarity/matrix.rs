use serde_json::{json, Value};

use super::SimilarityConfig;

/// A labelled symmetric matrix of set similarities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    config: SimilarityConfig,
}

impl SimilarityMatrix {
    pub(crate) fn new(labels: Vec<String>, values: Vec<f64>, config: SimilarityConfig) -> Self {
        debug_assert_eq!(labels.len() * labels.len(), values.len());
        SimilarityMatrix {
            labels,
            values,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn config(&self) -> &SimilarityConfig {
        &self.config
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.len() + col]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Upper-triangle entries `(row label, column label, value)`, row by row.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (&str, &str, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).map(move |j| (self.labels[i].as_str(), self.labels[j].as_str(), self.get(i, j)))
        })
    }

    pub fn to_json(&self) -> Value {
        let c = &self.config;
        json!({
            "labels": self.labels,
            "mode": c.set_mode,
            "backend": c.policy.backend,
            "weights": c.weights,
            "numeric_mode": c.numeric_mode,
            "alignment": c.alignment,
            "clamp_negative": c.policy.clamp_negative,
            "values": self.values,
        })
    }

    /// Header row of labels, then one row per label. Full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for label in &self.labels {
            out.push(',');
            out.push_str(&csv_field(label));
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&csv_field(label));
            for j in 0..self.len() {
                out.push(',');
                out.push_str(&self.get(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text table rounded to two decimals.
    pub fn to_table(&self) -> String {
        let width = self
            .labels
            .iter()
            .map(|l| l.chars().count())
            .max()
            .unwrap_or(0)
            .max(4);
        let mut out = format!("{:width$}", "");
        for label in &self.labels {
            out.push_str(&format!("  {label:>width$}"));
        }
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("{label:width$}"));
            for j in 0..self.len() {
                out.push_str(&format!("  {:>width$.2}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector_space::{Backend, WordSimPolicy};

    fn matrix() -> SimilarityMatrix {
        SimilarityMatrix::new(
            vec!["V1".into(), "V2".into()],
            vec![1.0, 0.25, 0.25, 1.0],
            SimilarityConfig::new(WordSimPolicy::new(Backend::TfIdf)),
        )
    }

    #[test]
    fn csv_layout() {
        assert_eq!(matrix().to_csv(), "label,V1,V2\nV1,1,0.25\nV2,0.25,1\n");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
    }

    #[test]
    fn json_fields() {
        let v = matrix().to_json();
        assert_eq!(v["labels"], json!(["V1", "V2"]));
        assert_eq!(v["mode"], "normalized");
        assert_eq!(v["backend"], "tfidf");
        assert_eq!(v["weights"]["alpha"], 1.0);
        assert_eq!(v["values"], json!([1.0, 0.25, 0.25, 1.0]));
    }

    #[test]
    fn table_rounds() {
        let m = matrix();
        let table = m.to_table();
        assert!(table.contains("0.25"));
        assert!(table.contains("1.00"));
        let pairs: Vec<_> = m.off_diagonal().collect();
        assert_eq!(pairs, [("V1", "V2", 0.25)]);
    }
}
