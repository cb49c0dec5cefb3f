//! Common fate: pointy triangles all facing one target dot (label 0) vs
//! scenes with random orientations or a few outliers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{object_intensity, regenerate, size_in, Registry, Task, TaskGenerator};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::{oracle_common_fate, Evidence, FateOracleConfig};
use crate::placement::{inner_region, Layout};
use crate::raster::{rotation_towards, Point, ShapeInstance, ShapeKind};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe};

/// Target dot diameter.
pub const DOT_SIZE: f64 = 6.0;
pub const DOT_INTENSITY: u8 = 255;
/// Outliers turn at least this far away from the target.
pub const MIN_OUTLIER_DEG: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeMode {
    AllRandom,
    Outliers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FateRound {
    pub n_range: (u32, u32),
    pub negative_mode: NegativeMode,
    pub outlier_count_range: (u32, u32),
    pub triangle_size_range: (f64, f64),
}

const SIZES: (f64, f64) = (20.0, 24.0);

impl FateRound {
    pub fn round(k: u8) -> Result<FateRound> {
        let outliers = |n_range, outlier_count_range| FateRound {
            n_range,
            negative_mode: NegativeMode::Outliers,
            outlier_count_range,
            triangle_size_range: SIZES,
        };
        Ok(match k {
            1 => FateRound {
                n_range: (10, 17),
                negative_mode: NegativeMode::AllRandom,
                outlier_count_range: (0, 0),
                triangle_size_range: SIZES,
            },
            2 => outliers((10, 17), (1, 2)),
            3 => outliers((30, 34), (1, 1)),
            4 => outliers((5, 7), (1, 1)),
            _ => return Err(Error::InvalidParameter(format!("common-fate round must be 1-4, got {k}"))),
        })
    }

    pub fn holdout() -> FateRound {
        FateRound {
            n_range: (2, 2),
            negative_mode: NegativeMode::Outliers,
            outlier_count_range: (1, 1),
            triangle_size_range: SIZES,
        }
    }

    pub fn doubled() -> FateRound {
        FateRound {
            triangle_size_range: (SIZES.0 * 2.0, SIZES.1 * 2.0),
            ..FateRound::holdout()
        }
    }
}

fn oracle_outliers(img: &GrayImage) -> Result<usize> {
    match oracle_common_fate(img, &FateOracleConfig::default())?.evidence {
        Evidence::CommonFate { outliers, .. } => Ok(outliers.len()),
        _ => unreachable!("fate oracle reports fate evidence"),
    }
}

pub fn gen_fate(rng: &mut SeededRng, label: Label, round: &FateRound) -> Result<(GrayImage, Recipe)> {
    let (lo, hi) = round.n_range;
    if lo == 0 || lo > hi || round.outlier_count_range.1 > lo {
        return Err(Error::InvalidParameter(format!("invalid common-fate round {round:?}")));
    }
    let mut rejected_positive = 0u32;
    regenerate("common-fate sample", || {
        let mut img = GrayImage::blank();
        let mut layout = Layout::for_canvas(&img);
        let dot_region = inner_region(img.width(), img.height(), DOT_SIZE, 10.0);
        let (dot, dot_mask) =
            layout.place(rng, dot_region, |c| ShapeInstance::new(ShapeKind::Ball, c, DOT_SIZE, DOT_INTENSITY))?;
        dot_mask.paint(&mut img, DOT_INTENSITY)?;

        let n = rng.int_in(lo as i64, hi as i64) as usize;
        let k = match (label, round.negative_mode) {
            (Label::Holds, _) | (_, NegativeMode::AllRandom) => 0,
            (Label::Violated, NegativeMode::Outliers) => {
                rng.int_in(round.outlier_count_range.0 as i64, round.outlier_count_range.1 as i64) as usize
            }
        };
        let mut is_outlier: Vec<bool> = (0..n).map(|i| i < k).collect();
        rng.shuffle(&mut is_outlier);
        let all_random = label == Label::Violated && round.negative_mode == NegativeMode::AllRandom;

        let mut triangles = Vec::with_capacity(n);
        for outlier in is_outlier {
            let size = size_in(rng, round.triangle_size_range);
            let offset = if all_random {
                Some(rng.float_in(0.0, 360.0))
            } else if outlier {
                let turn = rng.float_in(MIN_OUTLIER_DEG, 180.0);
                Some(if rng.coin(0.5) { turn } else { -turn })
            } else {
                None
            };
            let intensity = object_intensity(rng);
            let region = inner_region(img.width(), img.height(), size, 2.0);
            let target = dot.center;
            let (shape, mask) = layout.place(rng, region, |c| {
                let facing = rotation_towards(Point::new(target.x - c.x, target.y - c.y));
                let rotation = match offset {
                    Some(d) if all_random => d,
                    Some(d) => facing + d,
                    None => facing,
                };
                ShapeInstance::new(ShapeKind::Pointer, c, size, intensity).with_rotation(rotation)
            })?;
            mask.paint(&mut img, intensity)?;
            triangles.push(shape);
        }

        let found = oracle_outliers(&img)?;
        let agrees = match (label, round.negative_mode) {
            (Label::Holds, _) => found == 0,
            (Label::Violated, NegativeMode::AllRandom) => {
                if found == 0 {
                    rejected_positive += 1;
                }
                found > 0
            }
            (Label::Violated, NegativeMode::Outliers) => found == k,
        };
        if !agrees {
            return Ok(None);
        }
        let mut recipe = Recipe::new()
            .with("dot", dot.center)
            .with("triangles", &triangles)
            .with("outliers", k);
        if all_random {
            recipe.set("rejected_positive", rejected_positive);
        }
        Ok(Some((img, recipe)))
    })
}

pub fn gen_fate_holdout(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_fate(rng, label, &FateRound::holdout())
}

pub fn gen_fate_doubled(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_fate(rng, label, &FateRound::doubled())
}

struct FateGen {
    round: &'static str,
    summary: &'static str,
    params: FateRound,
}

impl TaskGenerator for FateGen {
    fn task(&self) -> Task {
        Task::CommonFate
    }
    fn round(&self) -> &'static str {
        self.round
    }
    fn summary(&self) -> &'static str {
        self.summary
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        gen_fate(rng, label, &self.params)
    }
}

pub(super) fn register(r: &mut Registry) {
    let rounds = [
        ("r1", "10-17 triangles; negatives face random directions"),
        ("r2", "10-17 triangles; negatives have one or two outliers"),
        ("r3", "30-34 triangles; negatives have one outlier"),
        ("r4", "5-7 triangles; negatives have one outlier"),
    ];
    for (k, (round, summary)) in rounds.into_iter().enumerate() {
        r.register(Arc::new(FateGen {
            round,
            summary,
            params: FateRound::round(k as u8 + 1).expect("rounds 1-4 exist"),
        }));
    }
    r.register(Arc::new(FateGen {
        round: "holdout",
        summary: "two triangles; negatives have one outlier",
        params: FateRound::holdout(),
    }));
    r.register(Arc::new(FateGen {
        round: "doubled",
        summary: "hold-out scenes with triangles twice as large",
        params: FateRound::doubled(),
    }));
}
