//! Type counting: every object of one kind (label 0) vs exactly two kinds.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{object_intensity, regenerate, size_in, Registry, Task, TaskGenerator};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::{oracle_type_count, OracleVerdict, TypeOracleConfig};
use crate::placement::{inner_region, Layout};
use crate::raster::{ShapeInstance, ShapeKind};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe};

use ShapeKind::{Ball, FlowerF4, Hexagram, Square, Triangle};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpec {
    /// Kinds a single-type image may use.
    pub single_pool: Vec<ShapeKind>,
    /// Kinds two-type images combine (any two distinct members).
    pub pair_pool: Vec<ShapeKind>,
    /// Sizes are drawn from one of these intervals, chosen uniformly.
    pub size_ranges: Vec<(f64, f64)>,
    pub object_count_range: (u32, u32),
    pub rotate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeVariant {
    Train,
    NewShapes,
    Sizes30To40,
    Sizes40To50,
    Aug1Train,
    Aug2Train,
    Aug2Test,
}

impl TypeVariant {
    pub const ALL: [TypeVariant; 7] = [
        TypeVariant::Train,
        TypeVariant::NewShapes,
        TypeVariant::Sizes30To40,
        TypeVariant::Sizes40To50,
        TypeVariant::Aug1Train,
        TypeVariant::Aug2Train,
        TypeVariant::Aug2Test,
    ];

    pub fn round(self) -> &'static str {
        match self {
            TypeVariant::Train => "train",
            TypeVariant::NewShapes => "new-shapes",
            TypeVariant::Sizes30To40 => "sizes-30-40",
            TypeVariant::Sizes40To50 => "sizes-40-50",
            TypeVariant::Aug1Train => "aug1-train",
            TypeVariant::Aug2Train => "aug2-train",
            TypeVariant::Aug2Test => "aug2-test",
        }
    }

    pub fn spec(self) -> TypeSpec {
        let train = TypeSpec {
            single_pool: vec![Triangle, Square],
            pair_pool: vec![Triangle, Square],
            size_ranges: vec![(20.0, 30.0)],
            object_count_range: (3, 8),
            rotate: false,
        };
        match self {
            TypeVariant::Train => train,
            TypeVariant::NewShapes => TypeSpec {
                single_pool: vec![Ball, Hexagram, FlowerF4],
                pair_pool: vec![Triangle, Square, Ball, Hexagram, FlowerF4],
                ..train
            },
            TypeVariant::Sizes30To40 => TypeSpec {
                size_ranges: vec![(30.0, 40.0)],
                ..train
            },
            TypeVariant::Sizes40To50 => TypeSpec {
                size_ranges: vec![(40.0, 50.0)],
                ..train
            },
            TypeVariant::Aug1Train => TypeSpec {
                single_pool: vec![Triangle, Square, FlowerF4],
                pair_pool: vec![Triangle, Square, FlowerF4],
                ..train
            },
            TypeVariant::Aug2Train => TypeSpec {
                size_ranges: vec![(20.0, 25.0), (40.0, 45.0)],
                ..train
            },
            TypeVariant::Aug2Test => TypeSpec {
                size_ranges: vec![(30.0, 35.0)],
                ..train
            },
        }
    }
}

fn judge(img: &GrayImage, rotate: bool) -> Result<OracleVerdict> {
    let cfg = TypeOracleConfig {
        rotation_sweep: rotate,
        ..TypeOracleConfig::default()
    };
    oracle_type_count(img, &cfg)
}

pub fn gen_types(rng: &mut SeededRng, label: Label, spec: &TypeSpec) -> Result<(GrayImage, Recipe)> {
    let (lo, hi) = spec.object_count_range;
    if spec.single_pool.is_empty() || spec.pair_pool.len() < 2 || spec.size_ranges.is_empty() || lo < 2 || lo > hi {
        return Err(Error::InvalidParameter(format!("invalid type spec {spec:?}")));
    }
    regenerate("type-counting sample", || {
        let n = rng.int_in(lo as i64, hi as i64) as usize;
        let kinds: Vec<ShapeKind> = match label {
            Label::Holds => vec![rng.choose(&spec.single_pool).clone(); n],
            Label::Violated => {
                let a = rng.index(spec.pair_pool.len());
                let b = (a + 1 + rng.index(spec.pair_pool.len() - 1)) % spec.pair_pool.len();
                let pair = [spec.pair_pool[a].clone(), spec.pair_pool[b].clone()];
                let mut ks: Vec<ShapeKind> = pair.to_vec();
                ks.extend((2..n).map(|_| rng.choose(&pair).clone()));
                rng.shuffle(&mut ks);
                ks
            }
        };
        let mut img = GrayImage::blank();
        let mut layout = Layout::for_canvas(&img);
        let mut placed = Vec::with_capacity(n);
        for kind in kinds {
            let range = rng.choose(&spec.size_ranges).clone();
            let size = size_in(rng, range);
            let rotation = if spec.rotate { rng.float_in(0.0, 360.0) } else { 0.0 };
            let intensity = object_intensity(rng);
            let region = inner_region(img.width(), img.height(), size, 2.0);
            let (shape, mask) = layout.place(rng, region, |c| {
                ShapeInstance::new(kind.clone(), c, size, intensity).with_rotation(rotation)
            })?;
            mask.paint(&mut img, intensity)?;
            placed.push(shape);
        }
        if judge(&img, spec.rotate)?.label != label {
            return Ok(None);
        }
        let names: std::collections::BTreeSet<&str> = placed.iter().map(|s| s.kind.name()).collect();
        let recipe = Recipe::new()
            .with("kinds", names)
            .with("object_count", placed.len())
            .with("objects", &placed);
        Ok(Some((img, recipe)))
    })
}

pub fn deliberate_types(rng: &mut SeededRng, label: Label, variant: TypeVariant) -> Result<(GrayImage, Recipe)> {
    gen_types(rng, label, &variant.spec())
}

struct TypeRound(TypeVariant);

impl TaskGenerator for TypeRound {
    fn task(&self) -> Task {
        Task::TypeCounting
    }
    fn round(&self) -> &'static str {
        self.0.round()
    }
    fn summary(&self) -> &'static str {
        match self.0 {
            TypeVariant::Train => "triangles and squares, sizes 20-30",
            TypeVariant::NewShapes => "single kinds from ball, hexagram, F4; pairs of any two of five kinds",
            TypeVariant::Sizes30To40 => "training kinds at sizes 30-40",
            TypeVariant::Sizes40To50 => "training kinds at sizes 40-50",
            TypeVariant::Aug1Train => "training kinds plus F4",
            TypeVariant::Aug2Train => "training kinds at sizes 20-25 and 40-45",
            TypeVariant::Aug2Test => "training kinds at sizes 30-35",
        }
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        deliberate_types(rng, label, self.0)
    }
    fn judge(&self, img: &GrayImage) -> Result<OracleVerdict> {
        judge(img, self.0.spec().rotate)
    }
}

pub(super) fn register(r: &mut Registry) {
    for v in TypeVariant::ALL {
        r.register(Arc::new(TypeRound(v)));
    }
    for alias in ["val", "test"] {
        r.alias(Task::TypeCounting, alias, "train");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::connected_components;
    use crate::oracles::Evidence;

    fn kinds_reported(img: &GrayImage) -> usize {
        match judge(img, false).unwrap().evidence {
            Evidence::TypeCount { kinds, .. } => kinds,
            e => panic!("unexpected evidence {e:?}"),
        }
    }

    #[test]
    fn every_variant_agrees_with_oracle() {
        for v in TypeVariant::ALL {
            for seed in 0..8 {
                let mut rng = SeededRng::new(seed);
                let (img, _) = deliberate_types(&mut rng, Label::Holds, v).unwrap();
                assert_eq!(kinds_reported(&img), 1, "{v:?}");
                let (img, _) = deliberate_types(&mut rng, Label::Violated, v).unwrap();
                assert_eq!(kinds_reported(&img), 2, "{v:?}");
            }
        }
    }

    #[test]
    fn sizes_40_50_are_respected() {
        for seed in 0..10 {
            let mut rng = SeededRng::new(seed);
            let (img, _) = deliberate_types(&mut rng, Label::Violated, TypeVariant::Sizes40To50).unwrap();
            for c in connected_components(&img) {
                assert!((39..=51).contains(&c.extent()));
            }
        }
    }

    #[test]
    fn training_uses_triangles_and_squares_only() {
        for seed in 0..10 {
            let mut rng = SeededRng::new(seed);
            let (_, recipe) = gen_types(&mut rng, Label::Violated, &TypeVariant::Train.spec()).unwrap();
            let kinds: Vec<String> = serde_json::from_value(recipe.get("kinds").unwrap().clone()).unwrap();
            assert_eq!(kinds, vec!["square", "triangle"]);
        }
    }
}
