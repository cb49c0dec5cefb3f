//! Object counting: exactly three objects (label 0) vs 1, 2, 4 or 5.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{object_intensity, regenerate, size_in, Registry, Task, TaskGenerator};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::oracle_count;
use crate::placement::{inner_region, Layout};
use crate::raster::{ShapeInstance, ShapeKind};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe};

pub const POSITIVE_COUNT: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSpec {
    pub setting: u8,
    pub pool: Vec<ShapeKind>,
    /// Kinds may differ within one image.
    pub mixed: bool,
    pub size_range: (f64, f64),
    pub negative_counts: Vec<u32>,
}

impl CountSpec {
    /// Training distribution of setting 1 (balls), 2 (one basic kind per
    /// image) or 3 (mixed basic kinds).
    pub fn setting(setting: u8) -> Result<Self> {
        let (pool, mixed) = match setting {
            1 => (vec![ShapeKind::Ball], false),
            2 => (ShapeKind::BASIC.to_vec(), false),
            3 => (ShapeKind::BASIC.to_vec(), true),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "counting setting must be 1, 2 or 3, got {setting}"
                )))
            }
        };
        Ok(CountSpec {
            setting,
            pool,
            mixed,
            size_range: (20.0, 30.0),
            negative_counts: vec![1, 2, 4, 5],
        })
    }

    /// New kinds (hexagram, F4, F2) at training sizes.
    pub fn deliberate_1(setting: u8) -> Result<Self> {
        Ok(CountSpec {
            pool: ShapeKind::NOVEL.to_vec(),
            ..CountSpec::setting(setting)?
        })
    }

    /// Training kinds at sizes 30-40.
    pub fn deliberate_2(setting: u8) -> Result<Self> {
        Ok(CountSpec {
            size_range: (30.0, 40.0),
            ..CountSpec::setting(setting)?
        })
    }
}

#[derive(Serialize)]
struct Placed {
    kind: &'static str,
    size: f64,
    rotation: f64,
}

pub fn gen_count(rng: &mut SeededRng, label: Label, spec: &CountSpec) -> Result<(GrayImage, Recipe)> {
    if spec.pool.is_empty() || spec.negative_counts.contains(&POSITIVE_COUNT) || spec.negative_counts.is_empty() {
        return Err(Error::InvalidParameter(format!("invalid count spec {spec:?}")));
    }
    regenerate("counting sample", || {
        let n = match label {
            Label::Holds => POSITIVE_COUNT,
            Label::Violated => rng.choose(&spec.negative_counts).clone(),
        };
        let image_kind = rng.choose(&spec.pool).clone();
        let mut img = GrayImage::blank();
        let mut layout = Layout::for_canvas(&img);
        let mut placed = Vec::new();
        for _ in 0..n {
            let kind = if spec.mixed { rng.choose(&spec.pool).clone() } else { image_kind.clone() };
            let size = size_in(rng, spec.size_range);
            let rotation = if kind == ShapeKind::Ball { 0.0 } else { rng.float_in(0.0, 360.0) };
            let intensity = object_intensity(rng);
            let region = inner_region(img.width(), img.height(), size, 2.0);
            let (shape, mask) = layout.place(rng, region, |c| {
                ShapeInstance::new(kind.clone(), c, size, intensity).with_rotation(rotation)
            })?;
            mask.paint(&mut img, shape.intensity)?;
            placed.push(Placed {
                kind: shape.kind.name(),
                size,
                rotation,
            });
        }
        if oracle_count(&img).label != label {
            return Ok(None);
        }
        let recipe = Recipe::new()
            .with("setting", spec.setting)
            .with("count", n)
            .with("objects", &placed);
        Ok(Some((img, recipe)))
    })
}

pub fn deliberate_count_1(rng: &mut SeededRng, label: Label, setting: u8) -> Result<(GrayImage, Recipe)> {
    gen_count(rng, label, &CountSpec::deliberate_1(setting)?)
}

pub fn deliberate_count_2(rng: &mut SeededRng, label: Label, setting: u8) -> Result<(GrayImage, Recipe)> {
    gen_count(rng, label, &CountSpec::deliberate_2(setting)?)
}

struct CountRound {
    round: &'static str,
    spec: CountSpec,
}

impl TaskGenerator for CountRound {
    fn task(&self) -> Task {
        Task::Counting
    }
    fn round(&self) -> &'static str {
        self.round
    }
    fn summary(&self) -> &'static str {
        "three objects vs one, two, four or five"
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        gen_count(rng, label, &self.spec)
    }
}

pub(super) fn register(r: &mut Registry) {
    const NAMES: [[&str; 3]; 3] = [
        ["s1", "s1-deliberate-1", "s1-deliberate-2"],
        ["s2", "s2-deliberate-1", "s2-deliberate-2"],
        ["s3", "s3-deliberate-1", "s3-deliberate-2"],
    ];
    for setting in 1..=3u8 {
        let names = NAMES[setting as usize - 1];
        let specs = [
            CountSpec::setting(setting),
            CountSpec::deliberate_1(setting),
            CountSpec::deliberate_2(setting),
        ];
        for (round, spec) in names.into_iter().zip(specs) {
            r.register(Arc::new(CountRound {
                round,
                spec: spec.expect("built-in settings are valid"),
            }));
        }
    }
}
