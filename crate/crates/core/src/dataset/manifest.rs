use std::collections::HashSet;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{Label, Recipe};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Version string stamped into every manifest. Bump the suffix whenever a
/// generator change alters output for an unchanged seed.
pub const GENERATOR_VERSION: &str = concat!("gestalt-core/", env!("CARGO_PKG_VERSION"), "+gen1");

/// How a record's image came to be.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    /// Drawn by the registered generator for `round` from the record seed.
    Generated { round: String },
    /// A deliberate operator applied to another record's image.
    Derived {
        op: String,
        source: String,
        source_label: Label,
    },
    /// Not reproducible from a seed (photographs, fused faces).
    External { note: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Image path relative to the manifest's directory, `/`-separated.
    pub path: String,
    pub label: Label,
    pub seed: u64,
    pub sha256: String,
    pub origin: Origin,
    #[serde(default, skip_serializing_if = "recipe_is_empty")]
    pub recipe: Recipe,
}

fn recipe_is_empty(r: &Recipe) -> bool {
    r.0.is_empty()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub task: String,
    pub round: String,
    pub generator_version: String,
    pub master_seed: u64,
    /// Class 0 and class 1 record counts.
    pub class_counts: [usize; 2],
    /// Names of the sets a union was composed from; empty for emitted sets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<String>,
    pub records: Vec<Record>,
    /// Directory record paths are relative to. Set by load and save.
    #[serde(skip)]
    pub base: PathBuf,
}

impl Manifest {
    pub fn new(task: &str, round: &str, master_seed: u64, records: Vec<Record>, base: PathBuf) -> Manifest {
        let class_counts = count_classes(&records);
        Manifest {
            task: task.to_string(),
            round: round.to_string(),
            generator_version: GENERATOR_VERSION.to_string(),
            master_seed,
            class_counts,
            parts: Vec::new(),
            records,
            base,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.base.join(relative)
    }

    pub fn path_of(&self, record: &Record) -> PathBuf {
        self.resolve(&record.path)
    }

    /// Structural checks that need no file access.
    pub fn check_counts(&self) -> Result<()> {
        let actual = count_classes(&self.records);
        if actual != self.class_counts {
            return Err(Error::Integrity(format!(
                "class counts {:?} do not match records {:?}",
                self.class_counts, actual
            )));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = self.records.iter().find(|r| !seen.insert(r.path.as_str())) {
            return Err(Error::Integrity(format!("duplicate record {}", dup.path)));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
            what: "manifest",
            detail: format!("{}: {e}", path.display()),
        })?;
        m.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.check_counts()?;
        Ok(m)
    }

    /// Load `dir/manifest.json`, or `path` itself when it names a file.
    pub fn open(path: &Path) -> Result<Manifest> {
        if path.is_dir() {
            Manifest::load(&path.join(MANIFEST_FILE))
        } else {
            Manifest::load(path)
        }
    }

    /// Write to `base/manifest.json`.
    pub fn save(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.base).map_err(|e| Error::io(&self.base, e))?;
        let path = self.base.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// `record`'s file as a `/`-separated path relative to `root`.
    pub fn relative_to(&self, record: &Record, root: &Path) -> Result<String> {
        rebase(&record.path, &self.base, root)
    }

    /// Record paths re-expressed relative to `new_base`.
    fn rebased_records(&self, new_base: &Path) -> Result<Vec<Record>> {
        self.records
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.path = rebase(&r.path, &self.base, new_base)?;
                if let Origin::Derived { source, .. } = &mut r.origin {
                    *source = rebase(source, &self.base, new_base)?;
                }
                Ok(r)
            })
            .collect()
    }
}

fn count_classes(records: &[Record]) -> [usize; 2] {
    let mut c = [0, 0];
    for r in records {
        c[r.label.id() as usize] += 1;
    }
    c
}

/// Lexically normalized absolute path (`..` folded without touching disk).
fn normalize(p: &Path) -> Result<PathBuf> {
    let abs = std::path::absolute(p).map_err(|e| Error::io(p, e))?;
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::ParentDir => {
                out.pop();
            }
            Component::CurDir => {}
            other => out.push(other.as_os_str()),
        }
    }
    Ok(out)
}

fn to_slash(p: &Path) -> String {
    p.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

/// `relative` (against `from`) re-expressed against `to`.
pub(crate) fn rebase(relative: &str, from: &Path, to: &Path) -> Result<String> {
    let target = normalize(&from.join(relative))?;
    let to = normalize(to)?;
    let rel = pathdiff::diff_paths(&target, &to)
        .ok_or_else(|| Error::Integrity(format!("cannot express {} relative to {}", target.display(), to.display())))?;
    Ok(to_slash(&rel))
}

/// Union of `parts`, written nowhere: records point back at the constituent
/// files. Records already present (same file) are kept once, in first-seen
/// order, which makes composition idempotent and order-stable.
pub fn compose(round: &str, parts: &[&Manifest], base: &Path) -> Result<Manifest> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidParameter("a union needs at least one part".into()))?;
    if let Some(other) = parts.iter().find(|p| p.task != first.task) {
        return Err(Error::InvalidParameter(format!(
            "cannot compose {} with {}",
            first.task, other.task
        )));
    }
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    let mut names = Vec::new();
    for part in parts {
        if !names.contains(&part.round) {
            names.push(part.round.clone());
        }
        for r in part.rebased_records(base)? {
            if seen.insert(r.path.clone()) {
                records.push(r);
            }
        }
    }
    let mut m = Manifest::new(&first.task, round, first.master_seed, records, base.to_path_buf());
    m.parts = names;
    Ok(m)
}

/// Directory name for a round id: anything outside `[A-Za-z0-9_-]` becomes `-`.
pub fn dir_name(round: &str) -> String {
    let s: String = round
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect();
    s.trim_end_matches('-').to_string()
}

/// `<root>/<task>/<round>` as laid out by emission.
pub fn set_dir(root: &Path, task: &str, round: &str) -> PathBuf {
    root.join(task).join(dir_name(round))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(path: &str, label: Label) -> Record {
        Record {
            path: path.into(),
            label,
            seed: 1,
            sha256: String::new(),
            origin: Origin::Generated { round: "A1".into() },
            recipe: Recipe::new(),
        }
    }

    #[test]
    fn dir_names_are_path_safe() {
        assert_eq!(dir_name("D1(A1)"), "D1-A1");
        assert_eq!(dir_name("s2-deliberate-1"), "s2-deliberate-1");
    }

    #[test]
    fn rebase_walks_up_and_down() {
        let r = rebase("0/000001.png", Path::new("/d/global-sym/A1"), Path::new("/d/global-sym/A2")).unwrap();
        assert_eq!(r, "../A1/0/000001.png");
        let back = rebase(&r, Path::new("/d/global-sym/A2"), Path::new("/d/global-sym/A3")).unwrap();
        assert_eq!(back, "../A1/0/000001.png");
    }

    #[test]
    fn composition_is_idempotent_and_ordered() {
        let a = Manifest::new("t", "A", 0, vec![rec("0/a.png", Label::Holds), rec("1/b.png", Label::Violated)], "/x/A".into());
        let b = Manifest::new("t", "B", 0, vec![rec("0/c.png", Label::Holds)], "/x/B".into());
        let u = compose("U", &[&a, &b], Path::new("/x/U")).unwrap();
        assert_eq!(u.len(), 3);
        assert_eq!(u.class_counts, [2, 1]);
        assert_eq!(u.records[2].path, "../B/0/c.png");
        let uu = compose("U", &[&u, &u], Path::new("/x/U")).unwrap();
        assert_eq!(uu.records, u.records);
        let ua = compose("U", &[&u, &a], Path::new("/x/U")).unwrap();
        assert_eq!(ua.records, u.records);
        assert_eq!(ua.parts, vec!["U", "A"]);
    }

    #[test]
    fn count_mismatch_is_an_integrity_error() {
        let mut m = Manifest::new("t", "A", 0, vec![rec("0/a.png", Label::Holds)], PathBuf::new());
        m.class_counts = [0, 1];
        assert!(matches!(m.check_counts(), Err(Error::Integrity(_))));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = Manifest::new("t", "A", 5, vec![rec("0/a.png", Label::Holds)], dir.path().to_path_buf());
        let p = m.save().unwrap();
        assert_eq!(Manifest::load(&p).unwrap(), m);
        assert_eq!(Manifest::open(dir.path()).unwrap(), m);
    }
}
