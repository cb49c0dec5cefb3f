//! Rule-based ground truth for every synthetic task.
//!
//! These classifiers look only at pixels (fold-compare, connected components,
//! shape signatures, apex rays); they never consult generator recipes.

use serde::{Deserialize, Serialize};

use crate::components::{connected_components, Component};
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::raster::Mask;
use crate::sample::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "oracle", rename_all = "snake_case")]
pub enum Evidence {
    GlobalSymmetry {
        mismatched_pixels: usize,
        mismatch_fraction: f64,
    },
    LocalSymmetry {
        components: usize,
        /// Indices (area order) of components that fail their own fold.
        failing: Vec<usize>,
        /// Bounding boxes of the failing components.
        failing_bboxes: Vec<(u32, u32, u32, u32)>,
        vacuous: bool,
    },
    Count {
        count: usize,
    },
    TypeCount {
        kinds: usize,
        /// Cluster id per component (area order).
        assignment: Vec<usize>,
    },
    CommonFate {
        triangles: usize,
        dot_center: (f64, f64),
        /// Angle (degrees) between apex ray and the ray to the dot, per
        /// triangle in area order.
        deviations: Vec<f64>,
        outliers: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub label: Label,
    pub evidence: Evidence,
}

fn verdict(holds: bool, evidence: Evidence) -> OracleVerdict {
    OracleVerdict {
        label: if holds { Label::Holds } else { Label::Violated },
        evidence,
    }
}

/// Fold along the vertical mid-line and compare overlapping pixels.
/// Symmetric iff the fraction of pixels differing from their reflection is
/// at most `tol`.
pub fn oracle_global_sym(img: &GrayImage, tol: f64) -> OracleVerdict {
    let w = img.width() as usize;
    let mut mismatched = 0usize;
    for y in 0..img.height() {
        let row = img.row(y);
        for x in 0..w {
            if row[x] != row[w - 1 - x] {
                mismatched += 1;
            }
        }
    }
    let fraction = mismatched as f64 / img.pixels().len() as f64;
    verdict(
        fraction <= tol,
        Evidence::GlobalSymmetry {
            mismatched_pixels: mismatched,
            mismatch_fraction: fraction,
        },
    )
}

fn component_is_symmetric(img: &GrayImage, c: &Component, mask: &Mask) -> bool {
    let axis_sum = (c.bbox.0 + c.bbox.2) as i64;
    c.pixels.iter().all(|&(x, y)| {
        let mx = axis_sum - x as i64;
        mask.contains(mx, y as i64) && img.get(mx as u32, y) == img.get(x, y)
    })
}

/// Positive iff every component is mirror-symmetric about the vertical line
/// through the centre of its own bounding box.
pub fn oracle_local_sym(img: &GrayImage) -> OracleVerdict {
    let comps = connected_components(img);
    let mut failing = Vec::new();
    let mut failing_bboxes = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if !component_is_symmetric(img, c, &c.mask()) {
            failing.push(i);
            failing_bboxes.push(c.bbox);
        }
    }
    verdict(
        failing.is_empty(),
        Evidence::LocalSymmetry {
            components: comps.len(),
            vacuous: comps.is_empty(),
            failing,
            failing_bboxes,
        },
    )
}

/// Count connected components; positive iff exactly three.
pub fn oracle_count(img: &GrayImage) -> OracleVerdict {
    let count = connected_components(img).len();
    verdict(count == 3, Evidence::Count { count })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeOracleConfig {
    /// Side of the scale-normalized signature grid.
    pub signature_side: u32,
    /// Two components are the same kind iff signature IoU reaches this...
    pub iou_threshold: f64,
    /// ...their bounding-box fill ratios differ by at most this...
    pub fill_tolerance: f64,
    /// ...and their bounding-box aspect ratios (short over long edge) by at
    /// most this.
    pub aspect_tolerance: f64,
    /// Compare over rotations (for rotated objects).
    pub rotation_sweep: bool,
    pub sweep_step_deg: f64,
}

impl Default for TypeOracleConfig {
    fn default() -> Self {
        TypeOracleConfig {
            signature_side: 32,
            iou_threshold: 0.73,
            fill_tolerance: 0.1,
            aspect_tolerance: 0.15,
            rotation_sweep: false,
            sweep_step_deg: 5.0,
        }
    }
}

/// Components smaller than this cannot be classified.
pub const MIN_CLASSIFIABLE_AREA: usize = 4;

/// Scale-normalized binary signature: the mask's bounding box resampled to a
/// `side x side` grid by sampling each cell centre.
pub fn signature(mask: &Mask, side: u32) -> Vec<bool> {
    let Some((x0, y0, x1, y1)) = mask.bbox() else {
        return vec![false; (side * side) as usize];
    };
    let (bw, bh) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
    let mut out = Vec::with_capacity((side * side) as usize);
    for j in 0..side {
        for i in 0..side {
            let sx = x0 + ((i as f64 + 0.5) * bw / side as f64).floor() as i64;
            let sy = y0 + ((j as f64 + 0.5) * bh / side as f64).floor() as i64;
            out.push(mask.contains(sx, sy));
        }
    }
    out
}

/// Scale-free description of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDescriptor {
    pub signature: Vec<bool>,
    /// Covered fraction of the bounding box.
    pub fill: f64,
    /// Short over long bounding-box edge.
    pub aspect: f64,
}

pub fn describe(mask: &Mask, side: u32) -> ShapeDescriptor {
    let (fill, aspect) = match mask.bbox() {
        None => (0.0, 1.0),
        Some((x0, y0, x1, y1)) => {
            let (w, h) = ((x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64);
            (mask.count() as f64 / (w * h), w.min(h) / w.max(h))
        }
    };
    ShapeDescriptor {
        signature: signature(mask, side),
        fill,
        aspect,
    }
}

pub fn same_kind(a: &ShapeDescriptor, b: &ShapeDescriptor, cfg: &TypeOracleConfig) -> bool {
    (a.fill - b.fill).abs() <= cfg.fill_tolerance
        && (a.aspect - b.aspect).abs() <= cfg.aspect_tolerance
        && iou(&a.signature, &b.signature) >= cfg.iou_threshold
}

pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &q) in a.iter().zip(b) {
        inter += (p && q) as usize;
        union += (p || q) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Nearest-neighbour rotation of a mask about its pixel centroid.
pub fn rotate_mask(mask: &Mask, deg: f64) -> Mask {
    let pts: Vec<(i64, i64)> = mask.pixels().collect();
    if pts.is_empty() {
        return mask.clone();
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0 as f64 + 0.5).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1 as f64 + 0.5).sum::<f64>() / n;
    let r = (mask.w.max(mask.h) as f64) * 0.75 + 2.0;
    let (x0, y0) = ((cx - r).floor() as i64, (cy - r).floor() as i64);
    let side = (2.0 * r).ceil() as u32 + 1;
    let mut out = Mask::empty(x0, y0, side, side);
    let (s, c) = deg.to_radians().sin_cos();
    for ly in 0..side {
        for lx in 0..side {
            let px = (x0 + lx as i64) as f64 + 0.5 - cx;
            let py = (y0 + ly as i64) as f64 + 0.5 - cy;
            // inverse rotation
            let sx = c * px + s * py + cx;
            let sy = -s * px + c * py + cy;
            if mask.contains(sx.floor() as i64, sy.floor() as i64) {
                out.set_local(lx, ly, true);
            }
        }
    }
    out
}

/// Number of distinct shape kinds, clustering components greedily by
/// [`same_kind`] against each cluster's first member.
/// Positive iff exactly one kind.
pub fn oracle_type_count(img: &GrayImage, cfg: &TypeOracleConfig) -> Result<OracleVerdict> {
    let comps = connected_components(img);
    if let Some(small) = comps.iter().find(|c| c.area() < MIN_CLASSIFIABLE_AREA) {
        return Err(Error::Unclassifiable(format!(
            "component at {:?} has only {} pixels",
            small.bbox,
            small.area()
        )));
    }
    let side = cfg.signature_side;
    let sweep: Vec<Vec<ShapeDescriptor>> = comps
        .iter()
        .map(|c| {
            let m = c.mask();
            if cfg.rotation_sweep {
                let steps = (360.0 / cfg.sweep_step_deg).round() as usize;
                (0..steps)
                    .map(|k| describe(&rotate_mask(&m, k as f64 * cfg.sweep_step_deg), side))
                    .collect()
            } else {
                vec![describe(&m, side)]
            }
        })
        .collect();

    let mut reps: Vec<usize> = Vec::new();
    let mut assignment = Vec::with_capacity(comps.len());
    for i in 0..comps.len() {
        let upright = &sweep[i][0];
        let found = reps.iter().position(|&r| {
            sweep[r]
                .iter()
                .any(|d| same_kind(d, upright, cfg))
        });
        match found {
            Some(k) => assignment.push(k),
            None => {
                assignment.push(reps.len());
                reps.push(i);
            }
        }
    }
    Ok(verdict(
        reps.len() == 1,
        Evidence::TypeCount {
            kinds: reps.len(),
            assignment,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FateOracleConfig {
    pub angle_tol_deg: f64,
    /// Components at most this large are target dots.
    pub max_dot_area: usize,
}

impl Default for FateOracleConfig {
    fn default() -> Self {
        FateOracleConfig {
            angle_tol_deg: 5.0,
            max_dot_area: 60,
        }
    }
}

fn angle_between(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dot = a.0 * b.0 + a.1 * b.1;
    let cross = a.0 * b.1 - a.1 * b.0;
    cross.atan2(dot).abs().to_degrees()
}

/// Apex of a pointer: the pixel centre farthest from the centroid (always
/// a convex-hull vertex), ties broken by raster order.
fn apex(c: &Component) -> (f64, f64) {
    let (cx, cy) = c.centroid;
    let mut best = (f64::MIN, (cx, cy));
    for &(x, y) in &c.pixels {
        let p = (x as f64 + 0.5, y as f64 + 0.5);
        let d = (p.0 - cx).powi(2) + (p.1 - cy).powi(2);
        if d > best.0 {
            best = (d, p);
        }
    }
    best.1
}

/// Positive iff every triangle's apex ray (centroid to apex) points at the
/// single target dot within `angle_tol_deg`.
pub fn oracle_common_fate(img: &GrayImage, cfg: &FateOracleConfig) -> Result<OracleVerdict> {
    let comps = connected_components(img);
    let (dots, triangles): (Vec<&Component>, Vec<&Component>) =
        comps.iter().partition(|c| c.area() <= cfg.max_dot_area);
    if dots.len() != 1 {
        return Err(Error::Unclassifiable(format!(
            "expected exactly one target dot, found {}",
            dots.len()
        )));
    }
    let dot = dots[0].centroid;
    let mut deviations = Vec::with_capacity(triangles.len());
    let mut outliers = Vec::new();
    for (i, t) in triangles.iter().enumerate() {
        let (cx, cy) = t.centroid;
        let tip = apex(t);
        let dev = angle_between((tip.0 - cx, tip.1 - cy), (dot.0 - cx, dot.1 - cy));
        if dev > cfg.angle_tol_deg {
            outliers.push(i);
        }
        deviations.push(dev);
    }
    Ok(verdict(
        outliers.is_empty(),
        Evidence::CommonFate {
            triangles: triangles.len(),
            dot_center: dot,
            deviations,
            outliers,
        },
    ))
}
