//! Triples, triple sets and the `<S,P,O>` listing format.
//!
//! A listing is a UTF-8 text file with one triple per line:
//!
//! ```text
//! # comment
//! <vo:RC2,vo:kilométrage,vo:5493>
//! <vo:RC2,vo:type de véhicule,vo:4x4, SUV & Crossover occasion>
//! ```
//!
//! Lines are split on their first two commas only, so objects may contain
//! commas. Blank lines and lines starting with `#` are skipped.

use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};

/// One component of a triple, split into namespace, label and word tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Term {
    raw: String,
    namespace: String,
    label: String,
    tokens: Vec<String>,
}

impl Term {
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ObjectKind {
    Qualitative,
    Quantitative,
}

/// The object of a triple: either text compared word by word, or a numeric
/// vector compared by distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ObjectValue {
    Qualitative(Term),
    Quantitative { term: Term, values: Vec<f64> },
}

impl ObjectValue {
    pub fn kind(&self) -> ObjectKind {
        match self {
            ObjectValue::Qualitative(_) => ObjectKind::Qualitative,
            ObjectValue::Quantitative { .. } => ObjectKind::Quantitative,
        }
    }

    pub fn term(&self) -> &Term {
        match self {
            ObjectValue::Qualitative(term) => term,
            ObjectValue::Quantitative { term, .. } => term,
        }
    }

    pub fn numeric(&self) -> Option<&[f64]> {
        match self {
            ObjectValue::Qualitative(_) => None,
            ObjectValue::Quantitative { values, .. } => Some(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: ObjectValue,
}

impl Triple {
    pub fn new(subject: &str, predicate: &str, object: &str) -> Self {
        Triple {
            subject: tokenize_term(subject),
            predicate: tokenize_term(predicate),
            object: classify_object(tokenize_term(object)),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "<{},{},{}>",
            self.subject.raw,
            self.predicate.raw,
            self.object.term().raw
        )
    }
}

/// A labelled, ordered collection of triples describing one item or profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleSet {
    pub label: String,
    pub triples: Vec<Triple>,
}

impl TripleSet {
    pub fn new(label: impl Into<String>, triples: Vec<Triple>) -> Self {
        TripleSet {
            label: label.into(),
            triples,
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Number of triples with a qualitative object.
    pub fn qualitative_count(&self) -> usize {
        self.count_kind(ObjectKind::Qualitative)
    }

    /// Number of triples with a quantitative object.
    pub fn quantitative_count(&self) -> usize {
        self.count_kind(ObjectKind::Quantitative)
    }

    fn count_kind(&self, kind: ObjectKind) -> usize {
        self.triples
            .iter()
            .filter(|t| t.object.kind() == kind)
            .count()
    }

    /// Renders the set back into the listing format, one triple per line.
    pub fn to_listing(&self) -> String {
        let mut out = String::new();
        for triple in &self.triples {
            out.push_str(&triple.to_string());
            out.push('\n');
        }
        out
    }
}

/// Splits a raw component into namespace and label, then the label into
/// lowercase word tokens.
///
/// Separators are underscores, whitespace and punctuation. A hyphen between
/// two alphanumerics and a dot between two digits stay inside the token, so
/// `2022-04-28` and `1.5` survive as single tokens. Accents are preserved.
pub fn tokenize_term(raw: &str) -> Term {
    let raw = raw.trim();
    let (namespace, label) = match raw.split_once(':') {
        Some((ns, label)) => (ns.trim(), label.trim()),
        None => ("", raw),
    };

    let chars: Vec<char> = label.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).map(|j| chars[j]);
        let next = chars.get(i + 1).copied();
        let joined = match c {
            '-' => {
                prev.is_some_and(char::is_alphanumeric) && next.is_some_and(char::is_alphanumeric)
            }
            '.' => {
                prev.is_some_and(|p| p.is_ascii_digit()) && next.is_some_and(|n| n.is_ascii_digit())
            }
            _ => c.is_alphanumeric(),
        };
        if joined {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }

    Term {
        raw: raw.to_string(),
        namespace: namespace.to_string(),
        label: label.to_string(),
        tokens,
    }
}

fn parse_number(token: &str) -> Option<f64> {
    let digits = token.strip_prefix(['-', '+']).unwrap_or(token);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_iso_date(token: &str) -> Option<f64> {
    let b = token.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let date = NaiveDate::parse_from_str(token, "%Y-%m-%d").ok()?;
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1)?;
    Some((date - epoch).num_days() as f64)
}

/// Decides whether an object term is numeric.
///
/// All tokens numeric gives a quantitative vector in token order; a lone
/// `YYYY-MM-DD` token becomes a day count since 1970-01-01. Anything else,
/// including mixed tokens like `12 mois`, is qualitative.
pub fn classify_object(term: Term) -> ObjectValue {
    let tokens = term.tokens();
    if !tokens.is_empty() {
        let numbers: Option<Vec<f64>> = tokens.iter().map(|t| parse_number(t)).collect();
        if let Some(values) = numbers {
            return ObjectValue::Quantitative { term, values };
        }
        if let [single] = tokens {
            if let Some(days) = parse_iso_date(single) {
                return ObjectValue::Quantitative {
                    term,
                    values: vec![days],
                };
            }
        }
    }
    ObjectValue::Qualitative(term)
}

fn parse_line(line: &str, line_no: usize) -> Result<Triple> {
    let malformed = |message: &str| Error::Parse {
        line: line_no,
        message: message.to_string(),
    };
    let inner = line
        .strip_prefix('<')
        .and_then(|rest| rest.strip_suffix('>'))
        .ok_or_else(|| malformed("expected a line of the form <S,P,O>"))?;

    let mut parts = inner.splitn(3, ',');
    let (Some(s), Some(p), Some(o)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(malformed("expected two commas separating subject, predicate and object"));
    };
    if [s, p, o].iter().any(|part| part.trim().is_empty()) {
        return Err(malformed("empty triple component"));
    }
    Ok(Triple::new(s, p, o))
}

/// Parses a listing document into a triple set named `label`.
pub fn parse_listing(text: &str, label: &str) -> Result<TripleSet> {
    let mut triples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        triples.push(parse_line(line, idx + 1)?);
    }
    if triples.is_empty() {
        return Err(Error::NoTriples);
    }
    Ok(TripleSet::new(label, triples))
}

/// Reads and parses a listing file. Without an explicit label the file stem
/// is used.
pub fn parse_listing_file(path: &Path, label: Option<&str>) -> Result<TripleSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let label = match label {
        Some(label) => label.to_string(),
        None => file_label(path),
    };
    parse_listing(&text, &label).map_err(|e| Error::in_file(path, e))
}

pub(crate) fn file_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}
