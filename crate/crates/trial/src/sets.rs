use std::path::{Path, PathBuf};

use gestalt_core::dataset::{set_dir, Manifest, MANIFEST_FILE};
use gestalt_core::Label;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optional per-task override, read from `<root>/<task>/trial.json`.
pub const LAYOUT_FILE: &str = "trial.json";

/// Which sets feed the three training rounds and the four test rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialLayout {
    pub training: [String; 3],
    pub tests: [String; 4],
}

impl TrialLayout {
    /// The curriculum layout. `biased` swaps the first training set for its
    /// single-component variant.
    pub fn standard(biased: bool) -> Self {
        let a1 = if biased { "A1-biased" } else { "A1" };
        TrialLayout {
            training: [a1.into(), "A2".into(), "A3".into()],
            tests: ["C1".into(), "D1(A1)".into(), "D2(A2)".into(), "D3(A3)".into()],
        }
    }

    /// `trial.json` under the task directory if present, else [`standard`](Self::standard).
    /// The file may name `training_biased` to replace `training` for
    /// biased sessions.
    pub fn for_task(root: &Path, task: &str, biased: bool) -> Result<Self> {
        #[derive(Deserialize)]
        struct File {
            training: [String; 3],
            #[serde(default)]
            training_biased: Option<[String; 3]>,
            tests: [String; 4],
        }
        let path = root.join(task).join(LAYOUT_FILE);
        if !path.is_file() {
            return Ok(TrialLayout::standard(biased));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let f: File = serde_json::from_str(&text)?;
        let training = match (biased, f.training_biased) {
            (true, Some(t)) => t,
            (true, None) => {
                return Err(Error::InvalidInput(format!(
                    "{} has no training_biased sets",
                    path.display()
                )))
            }
            (false, _) => f.training,
        };
        Ok(TrialLayout {
            training,
            tests: f.tests,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// Image path relative to the data root, `/`-separated.
    pub key: String,
    pub label: Label,
}

/// One set flattened to root-relative image keys.
#[derive(Debug, Clone)]
pub struct SetIndex {
    pub name: String,
    pub entries: Vec<Entry>,
}

impl SetIndex {
    pub fn from_manifest(manifest: &Manifest, root: &Path) -> Result<Self> {
        let entries = manifest
            .records
            .iter()
            .map(|r| {
                let key = manifest.relative_to(r, root)?;
                if key.starts_with("..") {
                    return Err(Error::InvalidInput(format!("{key} lies outside the data root")));
                }
                Ok(Entry { key, label: r.label })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SetIndex {
            name: manifest.round.clone(),
            entries,
        })
    }
}

/// Read-only sets shared by every session of one task and layout.
#[derive(Debug, Clone)]
pub struct TrialSets {
    pub task: String,
    pub root: PathBuf,
    pub training: [SetIndex; 3],
    pub tests: [SetIndex; 4],
}

impl TrialSets {
    pub fn load(root: &Path, task: &str, biased: bool) -> Result<Self> {
        let layout = TrialLayout::for_task(root, task, biased)?;
        Self::load_layout(root, task, &layout)
    }

    pub fn load_layout(root: &Path, task: &str, layout: &TrialLayout) -> Result<Self> {
        let open = |set: &String| -> Result<SetIndex> {
            let dir = set_dir(root, task, set);
            if !dir.join(MANIFEST_FILE).is_file() {
                return Err(Error::MissingDataset {
                    set: format!("{task}/{set}"),
                    root: root.to_path_buf(),
                });
            }
            SetIndex::from_manifest(&Manifest::open(&dir)?, root)
        };
        let [t1, t2, t3] = &layout.training;
        let [c1, c2, c3, c4] = &layout.tests;
        Ok(TrialSets {
            task: task.to_string(),
            root: root.to_path_buf(),
            training: [open(t1)?, open(t2)?, open(t3)?],
            tests: [open(c1)?, open(c2)?, open(c3)?, open(c4)?],
        })
    }

    /// Training set of round `r` (1-based).
    pub fn training(&self, r: u8) -> &SetIndex {
        &self.training[usize::from(r) - 1]
    }

    /// Test set of round `k` (1-based).
    pub fn test(&self, k: u8) -> &SetIndex {
        &self.tests[usize::from(k) - 1]
    }
}
