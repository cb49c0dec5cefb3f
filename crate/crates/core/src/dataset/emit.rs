use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::manifest::{compose, rebase, set_dir, Manifest, Origin, Record};
use crate::error::{Error, Result};
use crate::face::{self, FacePair};
use crate::image::GrayImage;
use crate::rng::{split_seed, SeededRng};
use crate::sample::{Label, Recipe};
use crate::tasks::{d1, d2, d3, Registry, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitSpec {
    pub task: Task,
    pub round: String,
    pub count: usize,
    pub master_seed: u64,
}

/// Label of record `index`: alternating, so every prefix is balanced.
pub fn label_for(index: usize) -> Label {
    Label::BOTH[index % 2]
}

fn record_path(label: Label, index: usize) -> String {
    format!("{}/{:06}.png", label.id(), index)
}

/// Write `spec.count` samples under `dir` plus `dir/manifest.json`. Sample
/// `i` is drawn from seed `split_seed(master_seed, i)`.
pub fn emit_dataset(registry: &Registry, spec: &EmitSpec, dir: &Path) -> Result<Manifest> {
    if spec.count == 0 {
        return Err(Error::InvalidParameter("sample count must be positive".into()));
    }
    let generator = registry.get(spec.task, &spec.round)?;
    let records = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let label = label_for(i);
            let seed = split_seed(spec.master_seed, i as u64);
            let (image, recipe) = generator.generate(&mut SeededRng::new(seed), label)?;
            let path = record_path(label, i);
            let bytes = image.save_png(&dir.join(&path))?;
            Ok(Record {
                path,
                label,
                seed,
                sha256: GrayImage::sha256_hex(&bytes),
                origin: Origin::Generated {
                    round: spec.round.clone(),
                },
                recipe,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Manifest::new(spec.task.name(), &spec.round, spec.master_seed, records, dir.to_path_buf());
    m.save()?;
    Ok(m)
}

/// Deliberate operators of the global-symmetry curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeliberateOp {
    D1,
    D2,
    D3,
}

impl DeliberateOp {
    pub fn name(self) -> &'static str {
        match self {
            DeliberateOp::D1 => "D1",
            DeliberateOp::D2 => "D2",
            DeliberateOp::D3 => "D3",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [DeliberateOp::D1, DeliberateOp::D2, DeliberateOp::D3]
            .into_iter()
            .find(|op| op.name() == name)
            .ok_or_else(|| Error::Unknown {
                kind: "operator",
                name: name.to_string(),
            })
    }

    /// D1 reverses `source_label`; D2 and D3 need a symmetric source and
    /// produce `target`.
    pub fn apply(
        self,
        img: &GrayImage,
        source_label: Label,
        target: Label,
        rng: &mut SeededRng,
    ) -> Result<(GrayImage, Label, Recipe)> {
        match self {
            DeliberateOp::D1 => d1(img, source_label, rng),
            DeliberateOp::D2 => d2(img, rng, target).map(|(i, r)| (i, target, r)),
            DeliberateOp::D3 => d3(img, rng, target).map(|(i, r)| (i, target, r)),
        }
    }
}

/// `op(source)` with `count` records (default `|source|`). D1 maps record
/// `i` of the source; D2 and D3 walk the symmetric records, using each once
/// per target class.
pub fn emit_deliberate(
    op: DeliberateOp,
    source: &Manifest,
    dir: &Path,
    master_seed: u64,
    count: Option<usize>,
) -> Result<Manifest> {
    if source.task != Task::GlobalSymmetry.name() {
        return Err(Error::InvalidParameter(format!(
            "{} applies to global-symmetry sets, not {}",
            op.name(),
            source.task
        )));
    }
    let count = count.unwrap_or(source.len());
    let pool: Vec<&Record> = match op {
        DeliberateOp::D1 => source.records.iter().collect(),
        _ => source.records.iter().filter(|r| r.label == Label::Holds).collect(),
    };
    if count == 0 || pool.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{}({}) would be empty",
            op.name(),
            source.round
        )));
    }
    let round = format!("{}({})", op.name(), source.round);
    let records = (0..count)
        .into_par_iter()
        .map(|i| {
            let (src, target) = match op {
                DeliberateOp::D1 => (pool[i % pool.len()], pool[i % pool.len()].label.flipped()),
                _ => (pool[(i / 2) % pool.len()], label_for(i)),
            };
            let seed = split_seed(master_seed, i as u64);
            let img = GrayImage::load_png(&source.path_of(src))?;
            let (out, label, recipe) = op.apply(&img, src.label, target, &mut SeededRng::new(seed))?;
            let path = record_path(label, i);
            let bytes = out.save_png(&dir.join(&path))?;
            let origin = Origin::Derived {
                op: op.name().to_string(),
                source: rebase(&src.path, &source.base, dir)?,
                source_label: src.label,
            };
            Ok(Record {
                path,
                label,
                seed,
                sha256: GrayImage::sha256_hex(&bytes),
                origin,
                recipe,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = Manifest::new(&source.task, &round, master_seed, records, dir.to_path_buf());
    m.save()?;
    Ok(m)
}

/// Rebuild a record's image from its seed (and source, if derived). `None`
/// for external records.
pub fn regenerate_record(registry: &Registry, manifest: &Manifest, record: &Record) -> Result<Option<GrayImage>> {
    match &record.origin {
        Origin::Generated { round } => {
            let task = Task::from_name(&manifest.task)?;
            let g = registry.get(task, round)?;
            let (img, _) = g.generate(&mut SeededRng::new(record.seed), record.label)?;
            Ok(Some(img))
        }
        Origin::Derived {
            op,
            source,
            source_label,
        } => {
            let op = DeliberateOp::from_name(op)?;
            let img = GrayImage::load_png(&manifest.resolve(source))?;
            let (out, _, _) = op.apply(&img, *source_label, record.label, &mut SeededRng::new(record.seed))?;
            Ok(Some(out))
        }
        Origin::External { .. } => Ok(None),
    }
}

/// The six-set global-symmetry curriculum plus the fresh C1 test set.
#[derive(Debug, Clone)]
pub struct Curriculum {
    pub a1: Manifest,
    pub d1_a1: Manifest,
    pub a2: Manifest,
    pub d2_a2: Manifest,
    pub a3: Manifest,
    pub d3_a3: Manifest,
    pub c1: Manifest,
}

impl Curriculum {
    /// Training sets in round order.
    pub fn training(&self) -> [&Manifest; 3] {
        [&self.a1, &self.a2, &self.a3]
    }

    /// Test sets in round order.
    pub fn tests(&self) -> [&Manifest; 4] {
        [&self.c1, &self.d1_a1, &self.d2_a2, &self.d3_a3]
    }
}

/// Emit A1 (`a1_count` samples) and C1 (`c1_count`), derive D1(A1),
/// D2(A2), D3(A3) at the size of their sources, and compose
/// A2 = A1 ∪ D1(A1), A3 = A2 ∪ D2(A2) by reference.
pub fn build_curriculum(registry: &Registry, root: &Path, a1_count: usize, c1_count: usize, master_seed: u64) -> Result<Curriculum> {
    let task = Task::GlobalSymmetry;
    let dir = |round: &str| set_dir(root, task.name(), round);
    let seed = |k: u64| split_seed(master_seed ^ 0x5EED_C0DE, k);
    let a1 = emit_dataset(
        registry,
        &EmitSpec {
            task,
            round: "A1".into(),
            count: a1_count,
            master_seed: seed(0),
        },
        &dir("A1"),
    )?;
    let c1 = emit_dataset(
        registry,
        &EmitSpec {
            task,
            round: "C1".into(),
            count: c1_count,
            master_seed: seed(1),
        },
        &dir("C1"),
    )?;
    let d1_a1 = emit_deliberate(DeliberateOp::D1, &a1, &dir("D1(A1)"), seed(2), None)?;
    let a2 = compose("A2", &[&a1, &d1_a1], &dir("A2"))?;
    a2.save()?;
    let d2_a2 = emit_deliberate(DeliberateOp::D2, &a2, &dir("D2(A2)"), seed(3), None)?;
    let a3 = compose("A3", &[&a2, &d2_a2], &dir("A3"))?;
    a3.save()?;
    let d3_a3 = emit_deliberate(DeliberateOp::D3, &a3, &dir("D3(A3)"), seed(4), None)?;
    Ok(Curriculum {
        a1,
        d1_a1,
        a2,
        d2_a2,
        a3,
        d3_a3,
        c1,
    })
}

/// Fused faces (class 1) for every listed pair, plus each distinct source
/// photograph as a real face (class 0). Classes are not balanced.
pub fn emit_faces(pairs: &[FacePair], sigma: f64, dir: &Path) -> Result<Manifest> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("pair list is empty".into()));
    }
    let mut records = Vec::new();
    for (i, pair) in pairs.iter().enumerate() {
        let s = face::fuse_pair(pair, sigma)?;
        let path = record_path(Label::Violated, i);
        let bytes = s.image.save_png(&dir.join(&path))?;
        records.push(Record {
            path,
            label: Label::Violated,
            seed: 0,
            sha256: GrayImage::sha256_hex(&bytes),
            origin: Origin::External {
                note: format!("{} + {}", pair.a.display(), pair.b.display()),
            },
            recipe: s.meta.recipe,
        });
    }
    let sources: BTreeSet<&Path> = pairs.iter().flat_map(|p| [p.a.as_path(), p.b.as_path()]).collect();
    for (i, src) in sources.into_iter().enumerate() {
        let img = GrayImage::load_photo(src)?;
        let path = record_path(Label::Holds, i);
        let bytes = img.save_png(&dir.join(&path))?;
        records.push(Record {
            path,
            label: Label::Holds,
            seed: 0,
            sha256: GrayImage::sha256_hex(&bytes),
            origin: Origin::External {
                note: src.display().to_string(),
            },
            recipe: Recipe::new(),
        });
    }
    let m = Manifest::new(Task::Face.name(), "fused", 0, records, dir.to_path_buf());
    m.save()?;
    Ok(m)
}
