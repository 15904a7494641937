//! Item catalogs, user profiles, top-k ranking and the interaction log.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use walkdir::WalkDir;

use crate::error::{Error, Result};
use crate::similarity::SimilarityEngine;
use crate::triple_model::{parse_listing_file, TripleSet};

/// File extension of listing files inside a catalog directory.
pub const LISTING_EXTENSION: &str = "triples";

/// A user's stated preferences, written as triples whose subject is the user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub user_id: String,
    pub preferences: TripleSet,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>, preferences: TripleSet) -> Self {
        UserProfile {
            user_id: user_id.into(),
            preferences,
        }
    }

    /// Loads a profile listing. The user id defaults to the subject label
    /// of the first triple.
    pub fn load(path: &Path, user_id: Option<&str>) -> Result<Self> {
        let preferences = parse_listing_file(path, None)?;
        let user_id = match user_id {
            Some(id) => id.to_string(),
            None => preferences.triples[0].subject.label().to_string(),
        };
        Ok(UserProfile {
            user_id,
            preferences,
        })
    }
}

/// Items keyed by label. Iteration is in label order whatever the load order.
#[derive(Debug, Clone, Default)]
pub struct ItemCatalog {
    items: BTreeMap<String, TripleSet>,
    provenance: BTreeMap<String, PathBuf>,
}

impl ItemCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: TripleSet, source: Option<PathBuf>) -> Result<()> {
        if self.items.contains_key(&item.label) {
            return Err(Error::DuplicateLabel(item.label));
        }
        if let Some(path) = source {
            self.provenance.insert(item.label.clone(), path);
        }
        self.items.insert(item.label.clone(), item);
        Ok(())
    }

    pub fn from_sets(sets: impl IntoIterator<Item = TripleSet>) -> Result<Self> {
        let mut catalog = ItemCatalog::new();
        for set in sets {
            catalog.insert(set, None)?;
        }
        Ok(catalog)
    }

    /// Parses every given listing file; the label of each item is its file stem.
    pub fn from_files<P: AsRef<Path>>(paths: &[P]) -> Result<Self> {
        let mut catalog = ItemCatalog::new();
        for path in paths {
            let path = path.as_ref();
            let set = parse_listing_file(path, None)?;
            catalog.insert(set, Some(path.to_path_buf()))?;
        }
        Ok(catalog)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&TripleSet> {
        self.items.get(label)
    }

    pub fn source(&self, label: &str) -> Option<&Path> {
        self.provenance.get(label).map(PathBuf::as_path)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.items.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TripleSet> {
        self.items.values()
    }

    pub fn to_vec(&self) -> Vec<TripleSet> {
        self.items.values().cloned().collect()
    }
}

/// Listing files (`*.triples`) under `dir`, recursively, sorted by path.
pub fn listing_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        if entry.file_type().is_file()
            && path.extension().is_some_and(|ext| ext == LISTING_EXTENSION)
        {
            files.push(path.to_path_buf());
        }
    }
    Ok(files)
}

/// Loads every listing file under `dir` as one catalog item.
pub fn load_catalog(dir: &Path) -> Result<ItemCatalog> {
    let files = listing_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyCatalog(dir.to_path_buf()));
    }
    ItemCatalog::from_files(&files)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedItem {
    pub label: String,
    pub score: f64,
}

/// Items by descending score, ties by ascending label.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub user_id: String,
    pub items: Vec<RankedItem>,
    pub config: crate::similarity::SimilarityConfig,
}

impl RankedList {
    pub fn to_json(&self) -> Value {
        let c = &self.config;
        json!({
            "user_id": self.user_id,
            "mode": c.set_mode,
            "backend": c.policy.backend,
            "weights": c.weights,
            "numeric_mode": c.numeric_mode,
            "alignment": c.alignment,
            "clamp_negative": c.policy.clamp_negative,
            "items": self.items,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,label,score\n");
        for (i, item) in self.items.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                i + 1,
                crate::similarity::csv_label(&item.label),
                item.score
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let width = self
            .items
            .iter()
            .map(|i| i.label.chars().count())
            .max()
            .unwrap_or(0)
            .max(5);
        let mut out = format!("{:>4}  {:width$}  score\n", "rank", "label");
        for (i, item) in self.items.iter().enumerate() {
            out.push_str(&format!("{:>4}  {:width$}  {:.2}\n", i + 1, item.label, item.score));
        }
        out
    }
}

/// Scores every catalog item against the profile and keeps the best `k`.
pub fn rank_items(
    profile: &UserProfile,
    catalog: &ItemCatalog,
    engine: &SimilarityEngine<'_>,
    k: usize,
) -> Result<RankedList> {
    if k == 0 {
        return Err(Error::ZeroTopK);
    }
    if profile.preferences.is_empty() {
        return Err(Error::EmptySet(profile.preferences.label.clone()));
    }
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog(PathBuf::new()));
    }
    let items: Vec<&TripleSet> = catalog.iter().collect();
    let mut scored = items
        .par_iter()
        .map(|item| {
            engine
                .sim_sets(&profile.preferences, item)
                .map(|score| RankedItem {
                    label: item.label.clone(),
                    score,
                })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.label.cmp(&b.label)));
    scored.truncate(k);
    Ok(RankedList {
        user_id: profile.user_id.clone(),
        items: scored,
        config: *engine.config(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InteractionKind {
    Rating(f64),
    Comment(String),
    Favorite,
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InteractionKind::Rating(v) => write!(f, "rating:{v}"),
            InteractionKind::Comment(text) => write!(f, "comment:{text}"),
            InteractionKind::Favorite => f.write_str("favorite"),
        }
    }
}

impl std::str::FromStr for InteractionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidEvent(format!("unknown interaction kind {s:?}"));
        if s == "favorite" {
            return Ok(InteractionKind::Favorite);
        }
        match s.split_once(':') {
            Some(("rating", v)) => v
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(InteractionKind::Rating)
                .ok_or_else(bad),
            Some(("comment", text)) => Ok(InteractionKind::Comment(text.to_string())),
            _ => Err(bad()),
        }
    }
}

/// One user action on an item, with free-form context such as location or
/// time of day.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEvent {
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    pub item_label: String,
    pub kind: InteractionKind,
    pub context: BTreeMap<String, String>,
}

impl InteractionEvent {
    pub fn new(user_id: &str, item_label: &str, kind: InteractionKind) -> Self {
        InteractionEvent {
            timestamp: Utc::now(),
            user_id: user_id.to_string(),
            item_label: item_label.to_string(),
            kind,
            context: BTreeMap::new(),
        }
    }

    pub fn with_context(mut self, key: &str, value: &str) -> Self {
        self.context.insert(key.to_string(), value.to_string());
        self
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidEvent(msg));
        let breaks_line = |s: &str| s.contains(['\t', '\n', '\r']);
        for (name, value) in [("user_id", &self.user_id), ("item_label", &self.item_label)] {
            if value.is_empty() || breaks_line(value) {
                return invalid(format!("{name} must be non-empty without tabs or newlines"));
            }
        }
        match &self.kind {
            InteractionKind::Rating(v) if !v.is_finite() => {
                return invalid(format!("rating must be finite, got {v}"))
            }
            InteractionKind::Comment(text) if breaks_line(text) => {
                return invalid("comment must not contain tabs or newlines".into())
            }
            _ => {}
        }
        for (key, value) in &self.context {
            let bad = |s: &str| breaks_line(s) || s.contains([';', '=']);
            if key.is_empty() || bad(key) || bad(value) {
                return invalid(format!("bad context entry {key:?}={value:?}"));
            }
        }
        Ok(())
    }

    /// `timestamp<TAB>user_id<TAB>item_label<TAB>kind<TAB>k=v;k=v`
    pub fn to_line(&self) -> String {
        let context: Vec<String> = self
            .context
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true),
            self.user_id,
            self.item_label,
            self.kind,
            context.join(";")
        )
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [timestamp, user_id, item_label, kind, context] = fields[..] else {
            return Err(Error::InvalidEvent(format!(
                "expected 5 tab-separated fields, got {}",
                fields.len()
            )));
        };
        let timestamp = DateTime::parse_from_rfc3339(timestamp)
            .map_err(|e| Error::InvalidEvent(format!("bad timestamp {timestamp:?}: {e}")))?
            .with_timezone(&Utc);
        let mut pairs = BTreeMap::new();
        for pair in context.split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidEvent(format!("bad context entry {pair:?}")))?;
            pairs.insert(k.to_string(), v.to_string());
        }
        let event = InteractionEvent {
            timestamp,
            user_id: user_id.to_string(),
            item_label: item_label.to_string(),
            kind: kind.parse()?,
            context: pairs,
        };
        event.validate()?;
        Ok(event)
    }
}

/// Appends one event to the log and syncs it to disk before returning.
///
/// Events must not be older than the last logged event. The log has a
/// single writer; concurrent callers must serialize externally.
pub fn record_interaction(event: &InteractionEvent, log: &Path) -> Result<()> {
    event.validate()?;
    if let Some(last) = read_log(log)?.last() {
        if event.timestamp < last.timestamp {
            return Err(Error::InvalidEvent(format!(
                "timestamp {} precedes the last logged event",
                event.timestamp
            )));
        }
    }
    let mut line = event.to_line();
    line.push('\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(log)
        .map_err(|e| Error::io(log, e))?;
    file.write_all(line.as_bytes())
        .and_then(|_| file.sync_data())
        .map_err(|e| Error::io(log, e))
}

/// Reads every event of a log; a missing file is an empty log.
pub fn read_log(log: &Path) -> Result<Vec<InteractionEvent>> {
    let text = match std::fs::read_to_string(log) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(log, e)),
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            InteractionEvent::parse_line(l).map_err(|e| {
                Error::in_file(log, Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })
            })
        })
        .collect()
}
