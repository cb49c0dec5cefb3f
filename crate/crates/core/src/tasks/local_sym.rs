//! Local symmetry: several objects, each symmetric about its own vertical
//! centre line (label 0), or with one or two asymmetric objects (label 1).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{object_intensity, regenerate, size_in, Registry, Task, TaskGenerator};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::{oracle_local_sym, Evidence};
use crate::placement::Layout;
use crate::raster::{
    random_polygon, random_symmetric_polygon, Mask, Point, PolygonSpec, Rect, ShapeInstance, ShapeKind,
};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe};

const POINTS: (u32, u32) = (3, 8);
/// Nominal centre objects are built around before being moved into place.
const ORIGIN: Point = Point::new(100.0, 100.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalObject {
    Shape(ShapeKind),
    SymmetricPolygon,
}

/// How asymmetric objects are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymmetryMode {
    RandomPolygon,
    /// A symmetric polygon with one half rescaled or a small shape added to
    /// (or cut out of) one side.
    Asymmetrized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSymSpec {
    pub shape_pool: Vec<LocalObject>,
    pub size_range: (f64, f64),
    pub object_count_range: (u32, u32),
    pub asymmetry: AsymmetryMode,
}

impl LocalSymSpec {
    pub fn training() -> Self {
        LocalSymSpec {
            shape_pool: vec![
                LocalObject::Shape(ShapeKind::Triangle),
                LocalObject::Shape(ShapeKind::Square),
                LocalObject::Shape(ShapeKind::Ball),
                LocalObject::SymmetricPolygon,
            ],
            size_range: (30.0, 40.0),
            object_count_range: (3, 6),
            asymmetry: AsymmetryMode::RandomPolygon,
        }
    }

    pub fn deliberate_1() -> Self {
        LocalSymSpec {
            shape_pool: ShapeKind::NOVEL.into_iter().map(LocalObject::Shape).collect(),
            asymmetry: AsymmetryMode::Asymmetrized,
            ..LocalSymSpec::training()
        }
    }

    pub fn deliberate_2() -> Self {
        LocalSymSpec {
            size_range: (40.0, 45.0),
            ..LocalSymSpec::training()
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.object_count_range;
        if self.shape_pool.is_empty() || lo == 0 || lo > hi || self.size_range.0 > self.size_range.1 {
            return Err(Error::InvalidParameter(format!("inconsistent local-symmetry spec {self:?}")));
        }
        Ok(())
    }
}

/// Fold a mask about the vertical centre line of its own bounding box.
fn mask_symmetric(mask: &Mask) -> bool {
    let Some((x0, _, x1, _)) = mask.bbox() else {
        return true;
    };
    mask.pixels().all(|(x, y)| mask.contains(x0 + x1 - x, y))
}

/// Rescale `spec` about its centre until its mask spans `size` +-1 pixels.
fn fit_polygon(spec: PolygonSpec, size: f64, about: Point) -> Option<Mask> {
    let mut spec = spec;
    for _ in 0..8 {
        let mask = spec.mask();
        let e = mask.extent() as f64;
        if e == 0.0 {
            return None;
        }
        if (e - size).abs() <= 1.0 {
            return Some(mask);
        }
        spec = spec.scaled(size / e, about);
    }
    None
}

fn symmetric_polygon(rng: &mut SeededRng, size: f64) -> Result<Option<Mask>> {
    let region = Rect::centered(ORIGIN.x, ORIGIN.y, size, size);
    let spec = random_symmetric_polygon(rng, region, POINTS)?;
    Ok(fit_polygon(spec, size, ORIGIN))
}

fn symmetric_object(rng: &mut SeededRng, obj: LocalObject, size: f64) -> Result<Option<Mask>> {
    match obj {
        LocalObject::Shape(kind) => Ok(Some(ShapeInstance::new(kind, ORIGIN, size, 1).mask())),
        LocalObject::SymmetricPolygon => symmetric_polygon(rng, size),
    }
}

/// Keep one half of `mask` and replace the other with a rescaled copy.
fn rescale_half(rng: &mut SeededRng, mask: &Mask) -> Mask {
    let factor = 1.0 + rng.float_in(0.3, 0.5) * if rng.coin(0.5) { 1.0 } else { -1.0 };
    let (x0, y0, x1, y1) = mask.bbox().expect("non-empty object");
    let axis2 = x0 + x1; // twice the centre line
    let cy = (y0 + y1 + 1) as f64 / 2.0;
    let right = rng.coin(0.5);
    let reach = ((x1 - x0 + 1) as f64 * factor.max(1.0)).ceil() as i64 + 2;
    let (ox, oy) = (axis2 / 2 - reach, (cy - reach as f64) as i64);
    let side = (2 * reach + 2) as u32;
    let mut out = Mask::empty(ox, oy, side, side);
    for ly in 0..side {
        for lx in 0..side {
            let (x, y) = (ox + lx as i64, oy + ly as i64);
            let in_changed = if right { 2 * x > axis2 } else { 2 * x < axis2 };
            let hit = if in_changed {
                let cx = axis2 as f64 / 2.0 + 0.5;
                let sx = ((x as f64 + 0.5 - cx) / factor + cx).floor() as i64;
                let sy = ((y as f64 + 0.5 - cy) / factor + cy).floor() as i64;
                mask.contains(sx, sy)
            } else {
                mask.contains(x, y)
            };
            out.set_local(lx, ly, hit);
        }
    }
    out
}

/// Add a small basic shape at a foreground pixel in one half, or cut it out.
fn add_or_cut(rng: &mut SeededRng, mask: &Mask, size: f64) -> Mask {
    let pixels: Vec<(i64, i64)> = mask.pixels().collect();
    let (x0, _, x1, _) = mask.bbox().expect("non-empty object");
    let right = rng.coin(0.5);
    let side: Vec<(i64, i64)> = pixels
        .iter()
        .copied()
        .filter(|&(x, _)| if right { 2 * x > x0 + x1 + 2 } else { 2 * x < x0 + x1 - 2 })
        .collect();
    let pool = if side.is_empty() { &pixels } else { &side };
    let (px, py) = rng.choose(pool).clone();
    let kind = rng.choose(&ShapeKind::BASIC).clone();
    let small = (size / 3.0).round().max(6.0);
    let extra = ShapeInstance::new(kind, Point::new(px as f64, py as f64), small, 1).mask();
    if rng.coin(0.5) {
        mask.union(&extra)
    } else {
        mask.minus(&extra)
    }
}

fn asymmetric_object(rng: &mut SeededRng, mode: AsymmetryMode, size: f64) -> Result<Option<Mask>> {
    let mask = match mode {
        AsymmetryMode::RandomPolygon => {
            let region = Rect::centered(ORIGIN.x, ORIGIN.y, size, size);
            let spec = random_polygon(rng, region, POINTS)?;
            fit_polygon(spec, size, ORIGIN)
        }
        AsymmetryMode::Asymmetrized => symmetric_polygon(rng, size)?.map(|m| {
            if rng.coin(0.5) {
                rescale_half(rng, &m)
            } else {
                add_or_cut(rng, &m, size)
            }
        }),
    };
    Ok(mask.filter(|m| m.count() > 0 && !mask_symmetric(m) && is_one_piece(m)))
}

/// 8-connected and non-empty.
fn is_one_piece(mask: &Mask) -> bool {
    let pixels: Vec<(i64, i64)> = mask.pixels().collect();
    let Some(&start) = pixels.first() else {
        return false;
    };
    let mut seen = std::collections::HashSet::from([start]);
    let mut stack = vec![start];
    while let Some((x, y)) = stack.pop() {
        for dy in -1..=1 {
            for dx in -1..=1 {
                let n = (x + dx, y + dy);
                if mask.contains(n.0, n.1) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
    }
    seen.len() == pixels.len()
}

#[derive(Serialize)]
struct PlacedObject {
    kind: String,
    symmetric: bool,
    size: f64,
    center: (i64, i64),
    intensity: u8,
}

fn try_layout(
    rng: &mut SeededRng,
    spec: &LocalSymSpec,
    count: u32,
    failing: u32,
) -> Result<Option<(GrayImage, Vec<PlacedObject>)>> {
    let mut img = GrayImage::blank();
    let mut layout = Layout::for_canvas(&img);
    let mut placed = Vec::new();
    let mut asym_slots: Vec<bool> = (0..count).map(|i| i < failing).collect();
    rng.shuffle(&mut asym_slots);
    for asym in asym_slots {
        let size = size_in(rng, spec.size_range);
        let (mask, kind) = if asym {
            (asymmetric_object(rng, spec.asymmetry, size)?, "asymmetric")
        } else {
            let obj = rng.choose(&spec.shape_pool).clone();
            let name = match &obj {
                LocalObject::Shape(k) => k.name(),
                LocalObject::SymmetricPolygon => "symmetric-polygon",
            };
            (symmetric_object(rng, obj, size)?, name)
        };
        let Some(mask) = mask else {
            return Ok(None);
        };
        let (bx0, by0, bx1, by1) = mask.bbox().expect("non-empty object");
        let region = Rect::new(
            (ORIGIN.x as i64 - bx0 + 1) as f64,
            (ORIGIN.y as i64 - by0 + 1) as f64,
            (img.width() as i64 - 2 - (bx1 - ORIGIN.x as i64)) as f64,
            (img.height() as i64 - 2 - (by1 - ORIGIN.y as i64)) as f64,
        );
        let (c, moved) = layout.place_with(rng, region, |c| {
            let m = mask.translated(c.x as i64 - ORIGIN.x as i64, c.y as i64 - ORIGIN.y as i64);
            ((c.x as i64, c.y as i64), m)
        })?;
        let intensity = object_intensity(rng);
        moved.paint(&mut img, intensity)?;
        placed.push(PlacedObject {
            kind: kind.to_string(),
            symmetric: !asym,
            size,
            center: c,
            intensity,
        });
    }
    Ok(Some((img, placed)))
}

/// Multi-object image; label 1 holds one or two asymmetric objects (0.8 / 0.2).
pub fn gen_local(rng: &mut SeededRng, label: Label, spec: &LocalSymSpec) -> Result<(GrayImage, Recipe)> {
    spec.validate()?;
    let (lo, hi) = spec.object_count_range;
    regenerate("local-symmetry sample", || {
        let failing = match label {
            Label::Holds => 0,
            Label::Violated => {
                if rng.coin(0.8) {
                    1
                } else {
                    2
                }
            }
        };
        let mut count = rng.int_in(lo as i64, hi as i64) as u32;
        count = count.max(failing);
        // Placement failures shed objects before giving up on the draw.
        let layout = loop {
            match try_layout(rng, spec, count, failing) {
                Err(Error::Placement { .. }) if count > failing.max(1) => count -= 1,
                other => break other?,
            }
        };
        let Some((img, placed)) = layout else {
            return Ok(None);
        };
        let verdict = oracle_local_sym(&img);
        let Evidence::LocalSymmetry { components, failing: bad, .. } = &verdict.evidence else {
            unreachable!("local oracle reports local evidence");
        };
        if verdict.label != label || *components != placed.len() || bad.len() != failing as usize {
            return Ok(None);
        }
        let recipe = Recipe::new()
            .with("objects", &placed)
            .with("object_count", placed.len())
            .with("failing", failing)
            .with("size_range", spec.size_range);
        Ok(Some((img, recipe)))
    })
}

pub fn deliberate_local_1(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_local(rng, label, &LocalSymSpec::deliberate_1())
}

pub fn deliberate_local_2(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_local(rng, label, &LocalSymSpec::deliberate_2())
}

struct LocalRound {
    round: &'static str,
    summary: &'static str,
    spec: LocalSymSpec,
}

impl TaskGenerator for LocalRound {
    fn task(&self) -> Task {
        Task::LocalSymmetry
    }
    fn round(&self) -> &'static str {
        self.round
    }
    fn summary(&self) -> &'static str {
        self.summary
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        gen_local(rng, label, &self.spec)
    }
}

pub(super) fn register(r: &mut Registry) {
    r.register(Arc::new(LocalRound {
        round: "train",
        summary: "basic shapes and symmetric polygons vs random polygons, sizes 30-40",
        spec: LocalSymSpec::training(),
    }));
    for alias in ["val", "test"] {
        r.alias(Task::LocalSymmetry, alias, "train");
    }
    r.register(Arc::new(LocalRound {
        round: "deliberate-1",
        summary: "hexagrams and flowers vs asymmetrized symmetric polygons",
        spec: LocalSymSpec::deliberate_1(),
    }));
    r.register(Arc::new(LocalRound {
        round: "deliberate-2",
        summary: "training objects at sizes 40-45",
        spec: LocalSymSpec::deliberate_2(),
    }));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::connected_components;

    #[test]
    fn training_labels_agree_with_oracle() {
        for seed in 0..30 {
            for label in Label::BOTH {
                let mut rng = SeededRng::new(seed);
                let (img, recipe) = gen_local(&mut rng, label, &LocalSymSpec::training()).unwrap();
                let v = oracle_local_sym(&img);
                assert_eq!(v.label, label);
                if let Evidence::LocalSymmetry { failing, .. } = v.evidence {
                    assert_eq!(failing.len() as u64, recipe.get_u64("failing").unwrap());
                }
            }
        }
    }

    #[test]
    fn deliberate_1_symmetric_objects_avoid_training_pool() {
        for seed in 0..20 {
            let mut rng = SeededRng::new(seed);
            let (img, recipe) = deliberate_local_1(&mut rng, Label::Holds).unwrap();
            assert_eq!(oracle_local_sym(&img).label, Label::Holds);
            for obj in recipe.get("objects").unwrap().as_array().unwrap() {
                let k = obj["kind"].as_str().unwrap();
                assert!(["hexagram", "f4", "f2"].contains(&k), "{k}");
            }
            let mut rng = SeededRng::new(seed);
            let (img, _) = deliberate_local_1(&mut rng, Label::Violated).unwrap();
            assert_eq!(oracle_local_sym(&img).label, Label::Violated);
        }
    }

    #[test]
    fn deliberate_2_sizes() {
        for seed in 0..20 {
            for label in Label::BOTH {
                let mut rng = SeededRng::new(seed);
                let (img, _) = deliberate_local_2(&mut rng, label).unwrap();
                for c in connected_components(&img) {
                    assert!((39..=46).contains(&c.extent()), "extent {}", c.extent());
                }
            }
        }
    }

    #[test]
    fn object_counts_stay_in_range() {
        for seed in 0..20 {
            let mut rng = SeededRng::new(seed);
            let (_, recipe) = gen_local(&mut rng, Label::Violated, &LocalSymSpec::training()).unwrap();
            let n = recipe.get_u64("object_count").unwrap();
            assert!((1..=6).contains(&n));
        }
    }
}
