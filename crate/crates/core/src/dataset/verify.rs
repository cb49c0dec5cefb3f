use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emit::regenerate_record;
use super::manifest::{Manifest, Origin, Record};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::{Evidence, OracleVerdict};
use crate::sample::Label;
use crate::tasks::{Registry, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Rebuild every reproducible record and compare bytes.
    pub regenerate: bool,
    /// Judge every image with the task oracle.
    pub oracle: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            regenerate: true,
            oracle: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub path: String,
    pub label: Label,
    pub oracle: Label,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub task: String,
    pub round: String,
    pub records: usize,
    pub regenerated: usize,
    pub judged: usize,
    /// Unreadable, missing or undecodable files, with the reason.
    pub unreadable: Vec<(String, String)>,
    pub checksum_mismatches: Vec<String>,
    pub regeneration_mismatches: Vec<String>,
    pub disagreements: Vec<Disagreement>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.unreadable.is_empty()
            && self.checksum_mismatches.is_empty()
            && self.regeneration_mismatches.is_empty()
            && self.disagreements.is_empty()
    }

    /// Oracle agreement in percent over judged records.
    pub fn agreement(&self) -> f64 {
        if self.judged == 0 {
            return 100.0;
        }
        100.0 * (self.judged - self.disagreements.len()) as f64 / self.judged as f64
    }
}

enum Outcome {
    Unreadable(String),
    Checked {
        checksum_ok: bool,
        regenerated: Option<bool>,
        verdict: Option<OracleVerdict>,
    },
}

fn judge(registry: &Registry, task: Task, record: &Record, img: &GrayImage) -> Result<Option<OracleVerdict>> {
    let verdict = match &record.origin {
        Origin::Generated { round } => registry.get(task, round)?.judge(img),
        _ => task.judge(img),
    };
    match verdict {
        Ok(v) => Ok(Some(v)),
        // Photographs have no rule-based ground truth.
        Err(Error::Unclassifiable(_)) if task == Task::Face => Ok(None),
        Err(e) => Err(e),
    }
}

fn check(registry: &Registry, m: &Manifest, task: Task, r: &Record, opts: VerifyOptions) -> Result<Outcome> {
    let path = m.path_of(r);
    let bytes = match std::fs::read(&path) {
        Ok(b) => b,
        Err(e) => return Ok(Outcome::Unreadable(e.to_string())),
    };
    let img = match GrayImage::decode_png(&bytes) {
        Ok(i) => i,
        Err(e) => return Ok(Outcome::Unreadable(e.to_string())),
    };
    let checksum_ok = GrayImage::sha256_hex(&bytes) == r.sha256;
    let regenerated = if opts.regenerate {
        match regenerate_record(registry, m, r) {
            Ok(Some(again)) => Some(again.encode_png()? == bytes),
            Ok(None) => None,
            Err(Error::Io { .. }) | Err(Error::Decode(_)) => Some(false),
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let verdict = if opts.oracle { judge(registry, task, r, &img)? } else { None };
    Ok(Outcome::Checked {
        checksum_ok,
        regenerated,
        verdict,
    })
}

/// Check counts, files, checksums, regeneration and oracle labels.
pub fn verify(registry: &Registry, manifest: &Manifest, opts: VerifyOptions) -> Result<VerifyReport> {
    manifest.check_counts()?;
    let task = Task::from_name(&manifest.task)?;
    let outcomes = manifest
        .records
        .par_iter()
        .map(|r| check(registry, manifest, task, r, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = VerifyReport {
        task: manifest.task.clone(),
        round: manifest.round.clone(),
        records: manifest.len(),
        ..VerifyReport::default()
    };
    for (r, o) in manifest.records.iter().zip(outcomes) {
        match o {
            Outcome::Unreadable(why) => rep.unreadable.push((r.path.clone(), why)),
            Outcome::Checked {
                checksum_ok,
                regenerated,
                verdict,
            } => {
                if !checksum_ok {
                    rep.checksum_mismatches.push(r.path.clone());
                }
                if let Some(same) = regenerated {
                    rep.regenerated += 1;
                    if !same {
                        rep.regeneration_mismatches.push(r.path.clone());
                    }
                }
                if let Some(v) = verdict {
                    rep.judged += 1;
                    if v.label != r.label {
                        rep.disagreements.push(Disagreement {
                            path: r.path.clone(),
                            label: r.label,
                            oracle: v.label,
                            evidence: v.evidence,
                        });
                    }
                }
            }
        }
    }
    Ok(rep)
}
