//! Task generators behind a common trait, registered by `task/round` name.
//!
//! Each generator is a pure function of a seeded stream and a target label,
//! and checks its own output against the task's oracle before returning.

mod counting;
mod fate;
mod global_sym;
mod local_sym;
mod types;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::{self, FateOracleConfig, OracleVerdict, TypeOracleConfig};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe, Sample, SampleMeta};

pub use counting::{deliberate_count_1, deliberate_count_2, gen_count, CountSpec};
pub use fate::{gen_fate, gen_fate_doubled, gen_fate_holdout, FateRound, NegativeMode};
pub use global_sym::{d1, d2, d3, gen_a1, gen_a4, gen_c4, scale_about_center, A1Options, D3Strategy};
pub use local_sym::{deliberate_local_1, deliberate_local_2, gen_local, AsymmetryMode, LocalObject, LocalSymSpec};
pub use types::{deliberate_types, gen_types, TypeSpec, TypeVariant};

/// Attempts a generator makes before reporting [`Error::Rejection`].
pub const MAX_REGENERATIONS: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "global-sym")]
    GlobalSymmetry,
    #[serde(rename = "local-sym")]
    LocalSymmetry,
    #[serde(rename = "count")]
    Counting,
    #[serde(rename = "types")]
    TypeCounting,
    #[serde(rename = "fate")]
    CommonFate,
    #[serde(rename = "face")]
    Face,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::GlobalSymmetry,
        Task::LocalSymmetry,
        Task::Counting,
        Task::TypeCounting,
        Task::CommonFate,
        Task::Face,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::GlobalSymmetry => "global-sym",
            Task::LocalSymmetry => "local-sym",
            Task::Counting => "count",
            Task::TypeCounting => "types",
            Task::CommonFate => "fate",
            Task::Face => "face",
        }
    }

    pub fn from_name(name: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::Unknown {
                kind: "task",
                name: name.to_string(),
            })
    }

    /// Ground truth from the task's rule-based oracle at default settings.
    pub fn judge(self, img: &GrayImage) -> Result<OracleVerdict> {
        match self {
            Task::GlobalSymmetry => Ok(oracles::oracle_global_sym(img, 0.0)),
            Task::LocalSymmetry => Ok(oracles::oracle_local_sym(img)),
            Task::Counting => Ok(oracles::oracle_count(img)),
            Task::TypeCounting => oracles::oracle_type_count(img, &TypeOracleConfig::default()),
            Task::CommonFate => oracles::oracle_common_fate(img, &FateOracleConfig::default()),
            Task::Face => Err(Error::Unclassifiable(
                "photographic faces have no rule-based ground truth".into(),
            )),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One round of one task: a recipe that turns a seeded stream and a target
/// label into an image.
pub trait TaskGenerator: Send + Sync {
    fn task(&self) -> Task;

    /// Canonical round name.
    fn round(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)>;

    /// Oracle used to verify this round's labels.
    fn judge(&self, img: &GrayImage) -> Result<OracleVerdict> {
        self.task().judge(img)
    }
}

/// Retry `attempt` until it yields a value. `Ok(None)` and recoverable
/// generation errors (placement, bounds, nested rejection) trigger another try.
pub(crate) fn regenerate<T>(what: &str, mut attempt: impl FnMut() -> Result<Option<T>>) -> Result<T> {
    for _ in 0..MAX_REGENERATIONS {
        match attempt() {
            Ok(Some(v)) => return Ok(v),
            Ok(None)
            | Err(Error::Placement { .. })
            | Err(Error::OutOfBounds { .. })
            | Err(Error::Rejection { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Rejection {
        attempts: MAX_REGENERATIONS,
        what: what.to_string(),
    })
}

/// Foreground intensity for generated objects, uniform in `[64, 255)`.
pub(crate) fn object_intensity(rng: &mut SeededRng) -> u8 {
    rng.int_in(64, 254) as u8
}

pub(crate) fn size_in(rng: &mut SeededRng, range: (f64, f64)) -> f64 {
    rng.int_in(range.0.round() as i64, range.1.round() as i64) as f64
}

#[derive(Clone, Default)]
pub struct Registry {
    entries: BTreeMap<String, Arc<dyn TaskGenerator>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    /// Every round of every synthetic task.
    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        global_sym::register(&mut r);
        local_sym::register(&mut r);
        counting::register(&mut r);
        types::register(&mut r);
        fate::register(&mut r);
        r
    }

    fn key(task: Task, round: &str) -> String {
        format!("{}/{}", task.name(), round)
    }

    pub fn register(&mut self, generator: Arc<dyn TaskGenerator>) {
        let key = Registry::key(generator.task(), generator.round());
        self.entries.insert(key, generator);
    }

    /// Make `alias` resolve to the generator registered as `round`.
    pub fn alias(&mut self, task: Task, alias: &str, round: &str) {
        let g = self.entries[&Registry::key(task, round)].clone();
        self.entries.insert(Registry::key(task, alias), g);
    }

    pub fn get(&self, task: Task, round: &str) -> Result<Arc<dyn TaskGenerator>> {
        self.entries
            .get(&Registry::key(task, round))
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "round",
                name: Registry::key(task, round),
            })
    }

    /// Registered `(task, round)` names, aliases included.
    pub fn rounds(&self) -> Vec<(Task, String)> {
        self.entries
            .iter()
            .map(|(k, g)| (g.task(), k.split_once('/').unwrap().1.to_string()))
            .collect()
    }

    /// Canonical rounds only (aliases skipped).
    pub fn canonical_rounds(&self) -> Vec<(Task, &'static str)> {
        self.entries
            .iter()
            .filter(|(k, g)| k.split_once('/').unwrap().1 == g.round())
            .map(|(_, g)| (g.task(), g.round()))
            .collect()
    }

    /// Generate one sample from `seed`; `meta.seed` reproduces it.
    pub fn sample(&self, task: Task, round: &str, seed: u64, label: Label) -> Result<Sample> {
        let g = self.get(task, round)?;
        let mut rng = SeededRng::new(seed);
        let (image, recipe) = g.generate(&mut rng, label)?;
        Ok(Sample {
            image,
            label,
            meta: SampleMeta {
                task: task.name().to_string(),
                round: round.to_string(),
                seed,
                recipe,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            assert_eq!(Task::from_name(t.name()).unwrap(), t);
        }
        assert!(Task::from_name("nope").is_err());
    }

    #[test]
    fn builtin_has_every_round() {
        let r = Registry::builtin();
        for (task, round) in [
            (Task::GlobalSymmetry, "A1"),
            (Task::GlobalSymmetry, "C1"),
            (Task::GlobalSymmetry, "D3"),
            (Task::GlobalSymmetry, "C4"),
            (Task::LocalSymmetry, "deliberate-2"),
            (Task::Counting, "s3-deliberate-1"),
            (Task::TypeCounting, "sizes-40-50"),
            (Task::CommonFate, "doubled"),
        ] {
            assert!(r.get(task, round).is_ok(), "{task}/{round}");
        }
        assert!(r.get(Task::Face, "A1").is_err());
    }

    #[test]
    fn sample_is_reproducible_from_meta_seed() {
        let r = Registry::builtin();
        let s = r.sample(Task::Counting, "s2", 99, Label::Holds).unwrap();
        let again = r.sample(Task::Counting, "s2", s.meta.seed, Label::Holds).unwrap();
        assert_eq!(s.image, again.image);
        assert_eq!(s.meta, again.meta);
    }
}
