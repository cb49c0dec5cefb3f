use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use gestalt_core::Label;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::session::Phase;

/// An exhibited training image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shown {
    pub class: Label,
    pub key: String,
}

/// A drawn test item. The label never leaves the service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestItem {
    pub id: u64,
    pub key: String,
    pub label: Label,
}

/// Everything that changes a session. Times are Unix milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum Event {
    Created {
        session: String,
        task: String,
        seed: u64,
        biased: bool,
        at: u64,
    },
    Exhibited {
        round: u8,
        items: Vec<Shown>,
        at: u64,
    },
    TestingBegun {
        round: u8,
        items: Vec<TestItem>,
        at: u64,
    },
    Answered {
        item: u64,
        answer: Label,
        correct: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        response_ms: Option<u64>,
        at: u64,
    },
    RoundClosed {
        round: u8,
        correct: usize,
        next: Phase,
        at: u64,
    },
    Abandoned {
        at: u64,
    },
}

impl Event {
    pub fn at(&self) -> u64 {
        match self {
            Event::Created { at, .. }
            | Event::Exhibited { at, .. }
            | Event::TestingBegun { at, .. }
            | Event::Answered { at, .. }
            | Event::RoundClosed { at, .. }
            | Event::Abandoned { at } => *at,
        }
    }
}

/// Append-only JSON-lines file, one event per line, synced per append.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(EventLog {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, events: &[Event]) -> Result<()> {
        if events.is_empty() {
            return Ok(());
        }
        let mut buf = Vec::new();
        for e in events {
            serde_json::to_writer(&mut buf, e)?;
            buf.push(b'\n');
        }
        self.file.write_all(&buf).map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }

    /// All events in `path`. A final line without its newline is a torn
    /// write and is dropped; any other bad line is an error.
    pub fn read(path: &Path) -> Result<Vec<Event>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let complete = match text.rfind('\n') {
            Some(i) => &text[..=i],
            None => "",
        };
        complete
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(n, l)| {
                serde_json::from_str(l)
                    .map_err(|e| Error::Replay(format!("{} line {}: {e}", path.display(), n + 1)))
            })
            .collect()
    }
}
