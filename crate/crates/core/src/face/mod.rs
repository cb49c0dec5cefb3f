//! Tampered faces built from two half faces, plus loaders for photographs
//! and landmark sidecars.

mod fuse;
mod landmarks;

use std::path::{Path, PathBuf};

pub use fuse::{
    blend_fuse, center_crop, fuse_faces, omega, sample_bilinear, scale_height, upright_align, AlignedFace,
    FusionReport, DEFAULT_SIGMA,
};
pub use landmarks::{LandmarkSet, EYES, LANDMARK_COUNT, MOUTH, NOSE, NOSE_BOTTOM, NOSE_TOP};

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::raster::Point;
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe, Sample, SampleMeta};

pub const TASK: &str = "face";

/// Fuse the left half of `a` with the right half of `b` (label 1).
pub fn make_tampered(a: &GrayImage, la: &LandmarkSet, b: &GrayImage, lb: &LandmarkSet, sigma: f64) -> Result<Sample> {
    let (image, report) = fuse_faces(a, la, b, lb, sigma)?;
    Ok(Sample {
        image,
        label: Label::Violated,
        meta: SampleMeta {
            task: TASK.into(),
            round: "fused".into(),
            seed: 0,
            recipe: Recipe::new().with("fusion", report),
        },
    })
}

/// An unmodified photograph (label 0).
pub fn real_face(image: GrayImage) -> Sample {
    Sample {
        image,
        label: Label::Holds,
        meta: SampleMeta {
            task: TASK.into(),
            round: "real".into(),
            seed: 0,
            recipe: Recipe::new(),
        },
    }
}

/// Landmark file next to `image`: same stem with `.pts`, else `.txt`.
pub fn sidecar_for(image: &Path) -> Result<PathBuf> {
    for ext in ["pts", "txt"] {
        let p = image.with_extension(ext);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(Error::Format {
        what: "landmarks",
        detail: format!("no .pts or .txt sidecar for {}", image.display()),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacePair {
    pub a: PathBuf,
    pub b: PathBuf,
    pub landmarks_a: PathBuf,
    pub landmarks_b: PathBuf,
}

/// Read a pairing list: `face_a,face_b[,landmarks_a,landmarks_b]` per line,
/// paths relative to the list's directory. `#` lines are comments.
pub fn read_pairs(path: &Path) -> Result<Vec<FacePair>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Format {
            what: "pair list",
            detail: format!("{}: {e}", path.display()),
        })?;
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cols: Vec<PathBuf> = rec.iter().map(|s| base.join(s)).collect();
        let pair = match cols.len() {
            2 => FacePair {
                landmarks_a: sidecar_for(&cols[0])?,
                landmarks_b: sidecar_for(&cols[1])?,
                a: cols[0].clone(),
                b: cols[1].clone(),
            },
            4 => FacePair {
                a: cols[0].clone(),
                b: cols[1].clone(),
                landmarks_a: cols[2].clone(),
                landmarks_b: cols[3].clone(),
            },
            n => {
                return Err(Error::Format {
                    what: "pair list",
                    detail: format!("row {}: expected 2 or 4 columns, found {n}", i + 1),
                })
            }
        };
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Fuse one listed pair from disk.
pub fn fuse_pair(pair: &FacePair, sigma: f64) -> Result<Sample> {
    let a = GrayImage::load_photo(&pair.a)?;
    let b = GrayImage::load_photo(&pair.b)?;
    let la = LandmarkSet::load(&pair.landmarks_a)?;
    let lb = LandmarkSet::load(&pair.landmarks_b)?;
    make_tampered(&a, &la, &b, &lb, sigma)
}

/// A drawn stand-in face (oval, eyes, nose, mouth) with matching landmarks,
/// tilted `tilt_deg` clockwise about the image centre. For tests and demos.
pub fn synthetic_face(width: u32, height: u32, tilt_deg: f64, seed: u64) -> Result<(GrayImage, LandmarkSet)> {
    let mut rng = SeededRng::new(seed);
    let (w, h) = (width as f64, height as f64);
    let (cx, cy) = (w / 2.0, h / 2.0);
    let (rx, ry) = (w * rng.float_in(0.28, 0.34), h * rng.float_in(0.36, 0.42));
    let skin = rng.int_in(150, 220) as f64;
    let eye_dx = rx * rng.float_in(0.35, 0.45);
    let eye_y = cy - ry * 0.25;
    let mouth_y = cy + ry * 0.5;
    let nose = (cy - ry * 0.25, cy + ry * 0.2);

    // Upright template, symmetric about x = cx.
    let mut pts = vec![Point::new(cx, cy); LANDMARK_COUNT];
    for i in 0..17 {
        let t = std::f64::consts::PI * (i as f64 / 16.0);
        pts[i] = Point::new(cx - rx * t.cos(), cy + ry * t.sin() * 0.9);
    }
    for i in 0..5 {
        let dx = eye_dx * (0.4 + 0.3 * i as f64);
        pts[21 - i] = Point::new(cx - dx * 0.9, eye_y - ry * 0.15);
        pts[22 + i] = Point::new(cx + dx * 0.9, eye_y - ry * 0.15);
    }
    for i in 0..4 {
        pts[NOSE_TOP + i] = Point::new(cx, nose.0 + (nose.1 - nose.0) * i as f64 / 3.0);
    }
    for i in 0..5 {
        pts[31 + i] = Point::new(cx + (i as f64 - 2.0) * rx * 0.08, nose.1 + 2.0);
    }
    for (k, side) in [(36usize, -1.0), (42usize, 1.0)] {
        for i in 0..6 {
            let t = std::f64::consts::TAU * i as f64 / 6.0;
            pts[k + i] = Point::new(cx + side * eye_dx + rx * 0.12 * t.cos(), eye_y + ry * 0.05 * t.sin());
        }
    }
    for i in 0..20 {
        let t = std::f64::consts::TAU * i as f64 / 20.0;
        pts[48 + i] = Point::new(cx + rx * 0.35 * t.cos(), mouth_y + ry * 0.06 * t.sin());
    }

    let mut img = GrayImage::new(width, height)?;
    let (s, c) = tilt_deg.to_radians().sin_cos();
    for y in 0..height {
        for x in 0..width {
            // Evaluate the upright drawing at the un-tilted position.
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            let (ux, uy) = (cx + dx * c + dy * s, cy - dx * s + dy * c);
            let inside = |px: f64, py: f64, ax: f64, ay: f64| ((ux - px) / ax).powi(2) + ((uy - py) / ay).powi(2) <= 1.0;
            let mut v = if inside(cx, cy, rx, ry) {
                skin - 40.0 * ((ux - cx) / rx).powi(2)
            } else {
                20.0
            };
            if inside(cx - eye_dx, eye_y, rx * 0.12, ry * 0.05) || inside(cx + eye_dx, eye_y, rx * 0.12, ry * 0.05) {
                v = 40.0;
            }
            if inside(cx, mouth_y, rx * 0.35, ry * 0.06) {
                v = 90.0;
            }
            if (ux - cx).abs() < 1.5 && uy > nose.0 && uy < nose.1 {
                v -= 30.0;
            }
            img.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    let lm = LandmarkSet::new(pts)?.map(|p| {
        let (dx, dy) = (p.x - cx, p.y - cy);
        Point::new(cx + dx * c - dy * s, cy + dx * s + dy * c)
    });
    Ok((img, lm))
}
