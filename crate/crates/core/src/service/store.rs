//! Append-only match-record storage keyed by match id.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::MatchRecord;

#[derive(Debug, Error)]
pub enum StoreError {
    /// Worth retrying.
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("match {0} already stored")]
    Duplicate(String),
    #[error("corrupt store line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

impl StoreError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, StoreError::Io(_))
    }
}

pub trait RecordStore: Send + Sync {
    /// Persists `record` and links it to the players' tokens.
    fn append(&self, record: &MatchRecord, tokens: &[String]) -> Result<(), StoreError>;
    /// The stored JSON line, exactly as written.
    fn get_raw(&self, match_id: &str) -> Result<Option<String>, StoreError>;
    fn matches_of(&self, token: &str) -> Vec<String>;

    fn get(&self, match_id: &str) -> Result<Option<MatchRecord>, StoreError> {
        match self.get_raw(match_id)? {
            Some(line) => serde_json::from_str(&line)
                .map(Some)
                .map_err(|e| StoreError::Corrupt { line: 0, message: e.to_string() }),
            None => Ok(None),
        }
    }
}

#[derive(Default)]
struct Index {
    lines: HashMap<String, String>,
    by_token: HashMap<String, Vec<String>>,
}

impl Index {
    fn insert(&mut self, record: &MatchRecord, line: String, tokens: &[String]) -> Result<(), StoreError> {
        if self.lines.contains_key(&record.match_id) {
            return Err(StoreError::Duplicate(record.match_id.clone()));
        }
        self.lines.insert(record.match_id.clone(), line);
        for t in tokens {
            self.by_token.entry(t.clone()).or_default().push(record.match_id.clone());
        }
        Ok(())
    }
}

/// Everything in memory; for tests and ephemeral servers.
#[derive(Default)]
pub struct MemoryStore {
    index: Mutex<Index>,
}

impl RecordStore for MemoryStore {
    fn append(&self, record: &MatchRecord, tokens: &[String]) -> Result<(), StoreError> {
        self.index.lock().expect("store lock").insert(record, record.to_json_line(), tokens)
    }

    fn get_raw(&self, match_id: &str) -> Result<Option<String>, StoreError> {
        Ok(self.index.lock().expect("store lock").lines.get(match_id).cloned())
    }

    fn matches_of(&self, token: &str) -> Vec<String> {
        self.index.lock().expect("store lock").by_token.get(token).cloned().unwrap_or_default()
    }
}

#[derive(Serialize, Deserialize)]
struct TokenLine {
    token: String,
    match_id: String,
}

/// `records.jsonl` plus `tokens.jsonl` in one directory.
pub struct JsonlStore {
    dir: PathBuf,
    index: Mutex<(Index, File, File)>,
}

impl JsonlStore {
    /// Opens or creates the store, loading existing lines.
    pub fn open(dir: impl AsRef<Path>) -> Result<JsonlStore, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let records_path = dir.join("records.jsonl");
        let tokens_path = dir.join("tokens.jsonl");
        let mut index = Index::default();
        if records_path.exists() {
            for (i, line) in BufReader::new(File::open(&records_path)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: MatchRecord = serde_json::from_str(&line)
                    .map_err(|e| StoreError::Corrupt { line: i + 1, message: e.to_string() })?;
                index.insert(&record, line, &[])?;
            }
        }
        if tokens_path.exists() {
            for (i, line) in BufReader::new(File::open(&tokens_path)?).lines().enumerate() {
                let line = line?;
                let t: TokenLine = serde_json::from_str(&line)
                    .map_err(|e| StoreError::Corrupt { line: i + 1, message: e.to_string() })?;
                index.by_token.entry(t.token).or_default().push(t.match_id);
            }
        }
        let open = |p: &Path| OpenOptions::new().create(true).append(true).open(p);
        let records = open(&records_path)?;
        let tokens = open(&tokens_path)?;
        Ok(JsonlStore { dir, index: Mutex::new((index, records, tokens)) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl RecordStore for JsonlStore {
    fn append(&self, record: &MatchRecord, tokens: &[String]) -> Result<(), StoreError> {
        let mut guard = self.index.lock().expect("store lock");
        let (index, records, token_file) = &mut *guard;
        if index.lines.contains_key(&record.match_id) {
            return Err(StoreError::Duplicate(record.match_id.clone()));
        }
        let line = record.to_json_line();
        writeln!(records, "{line}")?;
        records.flush()?;
        for t in tokens {
            let entry = TokenLine { token: t.clone(), match_id: record.match_id.clone() };
            writeln!(token_file, "{}", serde_json::to_string(&entry).expect("token line"))?;
        }
        token_file.flush()?;
        index.insert(record, line, tokens)
    }

    fn get_raw(&self, match_id: &str) -> Result<Option<String>, StoreError> {
        Ok(self.index.lock().expect("store lock").0.lines.get(match_id).cloned())
    }

    fn matches_of(&self, token: &str) -> Vec<String> {
        self.index.lock().expect("store lock").0.by_token.get(token).cloned().unwrap_or_default()
    }
}
