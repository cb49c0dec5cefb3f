//! Half-face fusion: upright alignment, height normalization, centre
//! alignment and sigmoid blending across the vertical mid-line.

use serde::{Deserialize, Serialize};

use super::landmarks::LandmarkSet;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::raster::Point;

pub const DEFAULT_SIGMA: f64 = 4.0;

/// Blend weight of the first image at column `x` of a `width`-wide output.
pub fn omega(x: f64, width: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + ((x - width / 2.0) / sigma).exp())
}

/// Bilinear sample at continuous coordinates (pixel centres at `i + 0.5`);
/// outside the image reads as 0.
pub fn sample_bilinear(img: &GrayImage, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x - 0.5, y - 0.5);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let px = |dx: i64, dy: i64| img.get_or_zero(x0 as i64 + dx, y0 as i64 + dy) as f64;
    let top = px(0, 0) * (1.0 - tx) + px(1, 0) * tx;
    let bottom = px(0, 1) * (1.0 - tx) + px(1, 1) * tx;
    top * (1.0 - ty) + bottom * ty
}

fn to_u8(v: f64) -> u8 {
    v.round_ties_even().clamp(0.0, 255.0) as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFace {
    pub image: GrayImage,
    pub landmarks: LandmarkSet,
    /// Rotation applied, degrees clockwise.
    pub angle_deg: f64,
    /// Some landmarks left the frame and were clamped to its border.
    pub clipped: bool,
}

/// Rotate about the image centre so the nose bridge is vertical. An already
/// vertical face is returned without resampling.
pub fn upright_align(face: &GrayImage, landmarks: &LandmarkSet) -> Result<AlignedFace> {
    let angle = landmarks.nose_angle()?;
    if angle == 0.0 {
        return Ok(AlignedFace {
            image: face.clone(),
            landmarks: landmarks.clone(),
            angle_deg: 0.0,
            clipped: false,
        });
    }
    let (w, h) = (face.width() as f64, face.height() as f64);
    let c = Point::new(w / 2.0, h / 2.0);
    let (s, co) = angle.to_radians().sin_cos();
    let forward = |p: Point| {
        let (dx, dy) = (p.x - c.x, p.y - c.y);
        Point::new(c.x + dx * co - dy * s, c.y + dx * s + dy * co)
    };
    let mut out = GrayImage::new(face.width(), face.height())?;
    for y in 0..face.height() {
        for x in 0..face.width() {
            let (dx, dy) = (x as f64 + 0.5 - c.x, y as f64 + 0.5 - c.y);
            // inverse rotation
            let sx = c.x + dx * co + dy * s;
            let sy = c.y - dx * s + dy * co;
            out.set(x, y, to_u8(sample_bilinear(face, sx, sy)));
        }
    }
    let mut lm = landmarks.map(forward);
    let clipped = lm.clip(w, h);
    Ok(AlignedFace {
        image: out,
        landmarks: lm,
        angle_deg: angle,
        clipped,
    })
}

/// Scale vertically by `factor` (width unchanged).
pub fn scale_height(face: &GrayImage, landmarks: &LandmarkSet, factor: f64) -> Result<(GrayImage, LandmarkSet)> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::Alignment(format!("invalid height factor {factor}")));
    }
    if factor == 1.0 {
        return Ok((face.clone(), landmarks.clone()));
    }
    let h = ((face.height() as f64) * factor).round().max(1.0) as u32;
    let mut out = GrayImage::new(face.width(), h)?;
    for y in 0..h {
        let sy = (y as f64 + 0.5) / factor;
        for x in 0..face.width() {
            out.set(x, y, to_u8(sample_bilinear(face, x as f64 + 0.5, sy)));
        }
    }
    Ok((out, landmarks.map(|p| Point::new(p.x, p.y * factor))))
}

/// Per-pixel `omega * a + (1 - omega) * b` across the columns, rounded half
/// to even.
pub fn blend_fuse(a: &GrayImage, b: &GrayImage, sigma: f64) -> Result<GrayImage> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Fusion(format!(
            "faces differ in size: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::Fusion(format!("sigma must be positive, got {sigma}")));
    }
    let w = a.width();
    let weights: Vec<f64> = (0..w).map(|x| omega(x as f64, w as f64, sigma)).collect();
    let mut out = GrayImage::new(w, a.height())?;
    for y in 0..a.height() {
        for x in 0..w {
            let o = weights[x as usize];
            let v = o * a.get(x, y) as f64 + (1.0 - o) * b.get(x, y) as f64;
            out.set(x, y, to_u8(v));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionReport {
    pub angle_a_deg: f64,
    pub angle_b_deg: f64,
    pub height_factor_b: f64,
    /// Crop of each aligned face that became the output, `(x0, y0)`.
    pub offset_a: (u32, u32),
    pub offset_b: (u32, u32),
    pub width: u32,
    pub height: u32,
    pub sigma: f64,
    pub clipped: bool,
}

/// Align `a` and `b` by their face centres and crop both to the common
/// window. The window is centred horizontally on the face centre, so its
/// mid-line (the blend seam) runs through it. Centres are matched to the
/// nearest pixel, which keeps this step free of resampling.
pub fn center_crop(
    a: &GrayImage,
    la: &LandmarkSet,
    b: &GrayImage,
    lb: &LandmarkSet,
) -> Result<(GrayImage, GrayImage, (u32, u32), (u32, u32))> {
    let (ca, cb) = (la.face_center(), lb.face_center());
    let (ax, ay) = (ca.x.round() as i64, ca.y.round() as i64);
    let (bx, by) = (cb.x.round() as i64, cb.y.round() as i64);
    let half = ax
        .min(a.width() as i64 - ax)
        .min(bx)
        .min(b.width() as i64 - bx);
    let top = ay.min(by);
    let bottom = (a.height() as i64 - ay).min(b.height() as i64 - by);
    if half <= 0 || top + bottom <= 0 {
        return Err(Error::Fusion("aligned faces do not overlap".into()));
    }
    let (w, h) = (2 * half as u32, (top + bottom) as u32);
    let oa = ((ax - half) as u32, (ay - top) as u32);
    let ob = ((bx - half) as u32, (by - top) as u32);
    Ok((a.crop(oa.0, oa.1, w, h)?, b.crop(ob.0, ob.1, w, h)?, oa, ob))
}

/// Full pipeline: left half from `a`, right half from `b`.
pub fn fuse_faces(
    a: &GrayImage,
    la: &LandmarkSet,
    b: &GrayImage,
    lb: &LandmarkSet,
    sigma: f64,
) -> Result<(GrayImage, FusionReport)> {
    let fa = upright_align(a, la)?;
    let fb = upright_align(b, lb)?;
    let (ta, ba) = fa.landmarks.vertical_extent();
    let (tb, bb) = fb.landmarks.vertical_extent();
    if ba - ta <= 0.0 || bb - tb <= 0.0 {
        return Err(Error::Alignment("landmarks have no vertical extent".into()));
    }
    let factor = (ba - ta) / (bb - tb);
    let (img_b, lm_b) = scale_height(&fb.image, &fb.landmarks, factor)?;
    let (ca, cb, oa, ob) = center_crop(&fa.image, &fa.landmarks, &img_b, &lm_b)?;
    let fused = blend_fuse(&ca, &cb, sigma)?;
    let report = FusionReport {
        angle_a_deg: fa.angle_deg,
        angle_b_deg: fb.angle_deg,
        height_factor_b: factor,
        offset_a: oa,
        offset_b: ob,
        width: fused.width(),
        height: fused.height(),
        sigma,
        clipped: fa.clipped || fb.clipped,
    };
    Ok((fused, report))
}
