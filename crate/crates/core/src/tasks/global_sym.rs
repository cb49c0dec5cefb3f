//! Global (mid-line) symmetry: base polygons, the three deliberate operators,
//! and the shape-placement sets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{object_intensity, regenerate, size_in, Registry, Task, TaskGenerator};
use crate::components::connected_components;
use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::oracles::oracle_global_sym;
use crate::placement::Layout;
use crate::raster::{
    random_polygon, random_symmetric_polygon, Mask, Point, Rect, ShapeInstance, ShapeKind,
};
use crate::rng::SeededRng;
use crate::sample::{Label, Recipe};

const POINTS: (u32, u32) = (3, 8);
const ADDED_SIZE: f64 = 25.0;
const D3_SIZES: (f64, f64) = (20.0, 30.0);
const PLACED_SIZES: (f64, f64) = (20.0, 40.0);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct A1Options {
    /// Symmetric images hold exactly one connected component.
    pub biased: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum D3Strategy {
    AsymmetricLocations,
    DifferentShapes,
    DifferentSizes,
}

impl D3Strategy {
    pub const ALL: [D3Strategy; 3] = [
        D3Strategy::AsymmetricLocations,
        D3Strategy::DifferentShapes,
        D3Strategy::DifferentSizes,
    ];
}

fn is_symmetric(img: &GrayImage) -> bool {
    oracle_global_sym(img, 0.0).label == Label::Holds
}

fn paint_polygon(rng: &mut SeededRng, img: &mut GrayImage, region: Rect, symmetric: bool) -> Result<()> {
    let spec = if symmetric {
        random_symmetric_polygon(rng, region, POINTS)?
    } else {
        random_polygon(rng, region, POINTS)?
    };
    spec.mask().paint(img, object_intensity(rng))
}

fn asymmetric_regions(rng: &mut SeededRng, count: u32, w: f64, h: f64) -> Vec<Rect> {
    if count == 1 {
        let (rw, rh) = (rng.float_in(100.0, 160.0), rng.float_in(100.0, 160.0));
        let (cx, cy) = (w / 2.0 + rng.float_in(-15.0, 15.0), h / 2.0 + rng.float_in(-15.0, 15.0));
        return vec![Rect::centered(cx, cy, rw, rh)];
    }
    (0..count)
        .map(|_| {
            let (rw, rh) = (rng.float_in(60.0, 100.0), rng.float_in(60.0, 100.0));
            let cx = rng.float_in(rw / 2.0 + 5.0, w - rw / 2.0 - 5.0);
            let cy = rng.float_in(rh / 2.0 + 5.0, h - rh / 2.0 - 5.0);
            Rect::centered(cx, cy, rw, rh)
        })
        .collect()
}

/// Base round: random polygons (label 1) or symmetric polygons / mirror
/// completions (label 0).
pub fn gen_a1(rng: &mut SeededRng, label: Label, opts: A1Options) -> Result<(GrayImage, Recipe)> {
    regenerate("A1 sample", || {
        let mut img = GrayImage::blank();
        let (w, h) = (img.width() as f64, img.height() as f64);
        let count = if rng.coin(0.7) { 1 } else { 2 };
        let mut recipe = Recipe::new().with("polygons", count);
        match label {
            Label::Violated => {
                for region in asymmetric_regions(rng, count, w, h) {
                    paint_polygon(rng, &mut img, region, false)?;
                }
                recipe.set("method", "random-polygons");
            }
            Label::Holds => {
                if rng.coin(0.5) {
                    for region in asymmetric_regions(rng, count, w, h) {
                        paint_polygon(rng, &mut img, region, false)?;
                    }
                    img = img.mirror_left_onto_right();
                    recipe.set("method", "mirror-completion");
                } else {
                    let axis_region = |rng: &mut SeededRng, hmin: f64, hmax: f64| {
                        let (rw, rh) = (rng.float_in(100.0, 160.0), rng.float_in(hmin, hmax));
                        let cy = rng.float_in(rh / 2.0 + 5.0, h - rh / 2.0 - 5.0);
                        Rect::centered(w / 2.0, cy, rw, rh)
                    };
                    if count == 1 {
                        let r = axis_region(rng, 100.0, 160.0);
                        paint_polygon(rng, &mut img, r, true)?;
                    } else {
                        for _ in 0..2 {
                            let r = axis_region(rng, 50.0, 90.0);
                            paint_polygon(rng, &mut img, r, true)?;
                        }
                    }
                    recipe.set("method", "symmetric-points");
                }
            }
        }
        if img.is_blank() || is_symmetric(&img) != (label == Label::Holds) {
            return Ok(None);
        }
        if opts.biased && label == Label::Holds && connected_components(&img).len() != 1 {
            return Ok(None);
        }
        recipe.set("biased", opts.biased);
        Ok(Some((img, recipe)))
    })
}

fn erase(img: &mut GrayImage, r: (u32, u32, u32, u32)) {
    let (x0, y0, x1, y1) = r;
    for y in y0..y1 {
        for x in x0..x1 {
            img.set(x, y, 0);
        }
    }
}

fn foreground_in(img: &GrayImage, r: (u32, u32, u32, u32)) -> usize {
    let (x0, y0, x1, y1) = r;
    (y0..y1)
        .flat_map(|y| (x0..x1).map(move |x| (x, y)))
        .filter(|&(x, y)| img.get(x, y) > 0)
        .count()
}

/// Rectangle with edges in [10, 40] lying entirely in one half and covering
/// some foreground. `left` picks the half.
fn erase_rect(rng: &mut SeededRng, img: &GrayImage, left: bool) -> Option<(u32, u32, u32, u32)> {
    let half = img.width() / 2;
    for _ in 0..200 {
        let rw = rng.int_in(10, 40) as u32;
        let rh = rng.int_in(10, 40) as u32;
        let x0 = if left {
            rng.int_in(0, (half - rw) as i64) as u32
        } else {
            rng.int_in(half as i64, (img.width() - rw) as i64) as u32
        };
        let y0 = rng.int_in(0, (img.height() - rh) as i64) as u32;
        let r = (x0, y0, x0 + rw, y0 + rh);
        if foreground_in(img, r) > 0 {
            return Some(r);
        }
    }
    None
}

/// First deliberate operator; reverses the label of `img`.
///
/// Symmetric input loses a rectangle of foreground from one half. Asymmetric
/// input has one half mirrored onto the other, then with probability one half
/// loses a rectangle and its mirror image.
pub fn d1(img: &GrayImage, label: Label, rng: &mut SeededRng) -> Result<(GrayImage, Label, Recipe)> {
    if img.is_blank() {
        return Err(Error::InvalidParameter("D1 needs a non-blank source".into()));
    }
    let w = img.width();
    regenerate("D1 sample", || match label {
        Label::Holds => {
            let left = rng.coin(0.5);
            let Some(r) = erase_rect(rng, img, left) else {
                return Ok(None);
            };
            let mut out = img.clone();
            erase(&mut out, r);
            if is_symmetric(&out) || out.is_blank() {
                return Ok(None);
            }
            let recipe = Recipe::new()
                .with("op", "erase-one-half")
                .with("side", if left { "left" } else { "right" })
                .with("rect", r);
            Ok(Some((out, Label::Violated, recipe)))
        }
        Label::Violated => {
            let left_fg = img.crop(0, 0, w / 2, img.height())?.foreground_count();
            let right_fg = img.crop(w / 2, 0, w / 2, img.height())?.foreground_count();
            let keep_left = match (left_fg > 0, right_fg > 0) {
                (true, true) => rng.coin(0.5),
                (l, _) => l,
            };
            let mut out = if keep_left {
                img.mirror_left_onto_right()
            } else {
                img.mirror_right_onto_left()
            };
            let mut recipe = Recipe::new()
                .with("op", "mirror")
                .with("kept", if keep_left { "left" } else { "right" });
            if rng.coin(0.5) {
                let Some(r) = erase_rect(rng, &out, true) else {
                    return Ok(None);
                };
                erase(&mut out, r);
                erase(&mut out, (w - r.2, r.1, w - r.0, r.3));
                recipe.set("symmetric_erase", r);
            }
            if out.is_blank() || !is_symmetric(&out) {
                return Ok(None);
            }
            Ok(Some((out, Label::Holds, recipe)))
        }
    })
}

/// Nearest-neighbour rescale about the image centre, computed on the left
/// half and reflected when `mirror` is set (keeps symmetric input exact).
pub fn scale_about_center(img: &GrayImage, factor: f64, mirror: bool) -> Result<GrayImage> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::InvalidParameter(format!("scale factor {factor}")));
    }
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let mut out = GrayImage::new(w, h)?;
    let xmax = if mirror { w / 2 } else { w };
    for y in 0..h {
        let sy = ((y as f64 + 0.5 - cy) / factor + cy).floor() as i64;
        for x in 0..xmax {
            let sx = ((x as f64 + 0.5 - cx) / factor + cx).floor() as i64;
            out.set(x, y, img.get_or_zero(sx, sy));
        }
    }
    Ok(if mirror { out.mirror_left_onto_right() } else { out })
}

fn scale_factor(rng: &mut SeededRng) -> f64 {
    let delta = rng.float_in(0.3, 0.5);
    if rng.coin(0.5) {
        1.0 + delta
    } else {
        1.0 - delta
    }
}

/// Does scaling by `factor` keep every foreground pixel on the canvas?
fn scale_fits(img: &GrayImage, factor: f64) -> bool {
    let (cx, cy) = (img.width() as f64 / 2.0, img.height() as f64 / 2.0);
    let (w, h) = (img.width() as f64, img.height() as f64);
    (0..img.height()).all(|y| {
        (0..img.width()).all(|x| {
            img.get(x, y) == 0 || {
                let nx0 = (x as f64 - cx) * factor + cx;
                let nx1 = (x as f64 + 1.0 - cx) * factor + cx;
                let ny0 = (y as f64 - cy) * factor + cy;
                let ny1 = (y as f64 + 1.0 - cy) * factor + cy;
                nx0 >= 0.0 && ny0 >= 0.0 && nx1 <= w && ny1 <= h
            }
        })
    })
}

/// Draw a scale factor whose result stays on the canvas; enlargements that
/// would overflow are retried, then replaced by a reduction.
fn fitting_factor(rng: &mut SeededRng, img: &GrayImage) -> f64 {
    for _ in 0..20 {
        let f = scale_factor(rng);
        if scale_fits(img, f) {
            return f;
        }
    }
    1.0 - rng.float_in(0.3, 0.5)
}

/// Basic shape of size 25 whose intensity is 0 (a hole) when its centre lies
/// on foreground, otherwise uniform in [128, 255).
fn added_shape(rng: &mut SeededRng, img: &GrayImage, center: Point, kind: ShapeKind, size: f64) -> ShapeInstance {
    let on_fg = img.get_or_zero(center.x as i64, center.y as i64) > 0;
    let intensity = if on_fg { 0 } else { rng.int_in(128, 254) as u8 };
    ShapeInstance::new(kind, center, size, intensity)
}

fn left_center(rng: &mut SeededRng, img: &GrayImage, size: f64) -> Point {
    let m = (size / 2.0).ceil() + 1.0;
    let half = (img.width() / 2) as f64;
    Point::new(
        rng.int_in(m as i64, (half - m) as i64) as f64,
        rng.int_in(m as i64, (img.height() as f64 - m) as i64) as f64,
    )
}

fn mirror_point(p: Point, width: u32) -> Point {
    Point::new(width as f64 - p.x, p.y)
}

/// Paint `shape` (possibly a hole) and return its mask.
fn stamp(img: &mut GrayImage, shape: &ShapeInstance) -> Result<Mask> {
    let mask = shape.mask();
    mask.paint(img, shape.intensity)?;
    Ok(mask)
}

fn stamp_pair(img: &mut GrayImage, shape: &ShapeInstance) -> Result<()> {
    let mask = shape.mask();
    mask.paint(img, shape.intensity)?;
    mask.mirrored(img.width()).paint(img, shape.intensity)
}

fn require_symmetric(img: &GrayImage, op: &str) -> Result<()> {
    if !is_symmetric(img) {
        return Err(Error::InvalidParameter(format!("{op} needs a symmetric source")));
    }
    Ok(())
}

/// Second deliberate operator on a symmetric image.
///
/// Target 0 scales the whole image or adds a mirrored shape pair; target 1
/// scales one half or adds a single shape on one side.
pub fn d2(img: &GrayImage, rng: &mut SeededRng, target: Label) -> Result<(GrayImage, Recipe)> {
    require_symmetric(img, "D2")?;
    let w = img.width();
    regenerate("D2 sample", || {
        let scale = rng.coin(0.5);
        let mut recipe = Recipe::new().with("target", target.id());
        let out = if scale {
            let factor = fitting_factor(rng, img);
            recipe.set("op", "scale");
            recipe.set("factor", factor);
            match target {
                Label::Holds => scale_about_center(img, factor, true)?,
                Label::Violated => {
                    let scaled = scale_about_center(img, factor, false)?;
                    let left = rng.coin(0.5);
                    recipe.set("half", if left { "left" } else { "right" });
                    let mut out = img.clone();
                    let (x0, x1) = if left { (0, w / 2) } else { (w / 2, w) };
                    for y in 0..img.height() {
                        for x in x0..x1 {
                            out.set(x, y, scaled.get(x, y));
                        }
                    }
                    out
                }
            }
        } else {
            let kind = rng.choose(&ShapeKind::BASIC).clone();
            let c = left_center(rng, img, ADDED_SIZE);
            let mut out = img.clone();
            recipe.set("op", "add-shape");
            recipe.set("kind", kind.name());
            match target {
                Label::Holds => {
                    let shape = added_shape(rng, img, c, kind, ADDED_SIZE);
                    stamp_pair(&mut out, &shape)?;
                    recipe.set("shape", &shape);
                }
                Label::Violated => {
                    let c = if rng.coin(0.5) { c } else { mirror_point(c, w) };
                    let shape = added_shape(rng, img, c, kind, ADDED_SIZE);
                    stamp(&mut out, &shape)?;
                    recipe.set("shape", &shape);
                }
            }
            out
        };
        if out.is_blank() || is_symmetric(&out) != (target == Label::Holds) {
            return Ok(None);
        }
        Ok(Some((out, recipe)))
    })
}

fn d3_shape(rng: &mut SeededRng, img: &GrayImage, kind: ShapeKind, size: f64, center: Point) -> ShapeInstance {
    added_shape(rng, img, center, kind, size)
}

/// Third deliberate operator on a symmetric image: several small objects.
///
/// Target 0 adds 2-4 mirrored pairs. Target 1 adds one violating pair using a
/// uniformly chosen [`D3Strategy`] plus 1-3 mirrored pairs, so object counts
/// look alike in both classes.
pub fn d3(img: &GrayImage, rng: &mut SeededRng, target: Label) -> Result<(GrayImage, Recipe)> {
    require_symmetric(img, "D3")?;
    let strategy = rng.choose(&D3Strategy::ALL).clone();
    d3_with(img, rng, target, strategy)
}

pub(crate) fn d3_with(
    img: &GrayImage,
    rng: &mut SeededRng,
    target: Label,
    strategy: D3Strategy,
) -> Result<(GrayImage, Recipe)> {
    let w = img.width();
    regenerate("D3 sample", || {
        let mut out = img.clone();
        let mut recipe = Recipe::new().with("target", target.id());
        let pairs = match target {
            Label::Holds => rng.int_in(2, 4),
            Label::Violated => rng.int_in(1, 3),
        };
        recipe.set("symmetric_pairs", pairs);
        for _ in 0..pairs {
            let size = size_in(rng, D3_SIZES);
            let kind = rng.choose(&ShapeKind::BASIC).clone();
            let c = left_center(rng, img, size);
            let shape = d3_shape(rng, img, kind, size, c);
            stamp_pair(&mut out, &shape)?;
        }
        if target == Label::Violated {
            recipe.set("strategy", strategy);
            let size = size_in(rng, D3_SIZES);
            let kind = rng.choose(&ShapeKind::BASIC).clone();
            let c = left_center(rng, img, size);
            let left = d3_shape(rng, img, kind.clone(), size, c);
            let right = match strategy {
                D3Strategy::AsymmetricLocations => {
                    let (dx, dy) = loop {
                        let dx = rng.int_in(-15, 15);
                        let dy = rng.int_in(-15, 15);
                        if dx.abs().max(dy.abs()) >= 6 {
                            break (dx, dy);
                        }
                    };
                    let m = mirror_point(c, w);
                    let p = Point::new(m.x + dx as f64, m.y + dy as f64);
                    d3_shape(rng, img, kind, size, p)
                }
                D3Strategy::DifferentShapes => {
                    let others: Vec<ShapeKind> =
                        ShapeKind::BASIC.into_iter().filter(|k| *k != kind).collect();
                    let other = rng.choose(&others).clone();
                    d3_shape(rng, img, other, size, mirror_point(c, w))
                }
                D3Strategy::DifferentSizes => {
                    let other = loop {
                        let s = size_in(rng, D3_SIZES);
                        if (s - size).abs() >= 4.0 {
                            break s;
                        }
                    };
                    d3_shape(rng, img, kind, other, mirror_point(c, w))
                }
            };
            let rmask = right.mask();
            if rmask.bbox().map_or(true, |b| b.0 < (w / 2) as i64) {
                return Ok(None);
            }
            stamp(&mut out, &left)?;
            rmask.paint(&mut out, right.intensity)?;
            recipe.set("left", &left);
            recipe.set("right", &right);
        }
        if out.is_blank() || is_symmetric(&out) != (target == Label::Holds) {
            return Ok(None);
        }
        Ok(Some((out, recipe)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Violation {
    Placement,
    Shape,
    Size,
}

/// Shape-placement set: 1-3 pairs in the left half mirrored to the right,
/// sometimes with an upright symmetric shape on the mid-line. Label 1 breaks
/// one pair by position, kind or size.
fn gen_placed(rng: &mut SeededRng, label: Label, pool: &[ShapeKind]) -> Result<(GrayImage, Recipe)> {
    regenerate("placement sample", || {
        let mut img = GrayImage::blank();
        let (w, h) = (img.width(), img.height());
        let mut layout = Layout::for_canvas(&img);
        let mut recipe = Recipe::new();

        if rng.coin(0.3) {
            let size = size_in(rng, PLACED_SIZES);
            let kind = rng.choose(pool).clone();
            let m = (size / 2.0).ceil() + 2.0;
            let region = Rect::new(w as f64 / 2.0, m, w as f64 / 2.0, h as f64 - m);
            let intensity = object_intensity(rng);
            let (shape, mask) = layout.place(rng, region, |c| ShapeInstance::new(kind.clone(), c, size, intensity))?;
            mask.paint(&mut img, intensity)?;
            recipe.set("center_shape", &shape);
        }

        let pairs = rng.int_in(1, 3) as usize;
        let broken = rng.index(pairs);
        let violation = rng.choose(&[Violation::Placement, Violation::Shape, Violation::Size]).clone();
        let mut placed = Vec::new();
        for i in 0..pairs {
            let size = size_in(rng, PLACED_SIZES);
            let kind = rng.choose(pool).clone();
            let rotation = rng.float_in(0.0, 360.0);
            let intensity = object_intensity(rng);
            let breaks = label == Label::Violated && i == broken;
            let shift = (rng.int_in(-20, 20), rng.int_in(-20, 20));
            let shift = if shift.0.abs().max(shift.1.abs()) < 6 {
                (if shift.0 < 0 { -6 } else { 6 }, shift.1)
            } else {
                shift
            };
            let other_kind = {
                let others: Vec<ShapeKind> = pool.iter().filter(|k| **k != kind).cloned().collect();
                rng.choose(&others).clone()
            };
            let other_size = {
                let d = rng.int_in(6, 12) as f64;
                if size + d <= PLACED_SIZES.1 || size - d < PLACED_SIZES.0 {
                    size + d
                } else {
                    size - d
                }
            };
            let m = (size.max(other_size) / 2.0 * std::f64::consts::SQRT_2).ceil() + 1.0;
            let region = Rect::new(m, m, w as f64 / 2.0 - m, h as f64 - m);
            let ((left, right), mask) = layout.place_with(rng, region, |c| {
                let left = ShapeInstance::new(kind.clone(), c, size, intensity).with_rotation(rotation);
                let lmask = left.mask();
                let mc = mirror_point(c, w);
                let (right, rmask) = if !breaks {
                    let r = ShapeInstance::new(kind.clone(), mc, size, intensity).with_rotation(-rotation);
                    (r, lmask.mirrored(w))
                } else {
                    let r = match violation {
                        Violation::Placement => ShapeInstance::new(
                            kind.clone(),
                            Point::new(mc.x + shift.0 as f64, mc.y + shift.1 as f64),
                            size,
                            intensity,
                        ),
                        Violation::Shape => ShapeInstance::new(other_kind.clone(), mc, size, intensity),
                        Violation::Size => ShapeInstance::new(kind.clone(), mc, other_size, intensity),
                    }
                    .with_rotation(-rotation);
                    let rm = if violation == Violation::Placement {
                        lmask.mirrored(w).translated(shift.0, shift.1)
                    } else {
                        r.mask()
                    };
                    (r, rm)
                };
                let mask = lmask.union(&rmask);
                ((left, (right, lmask, rmask)), mask)
            })?;
            let _ = mask;
            let (right, lmask, rmask) = right;
            if !rmask.fits(&img) || rmask.bbox().map_or(true, |b| b.0 < (w / 2) as i64) {
                return Ok(None);
            }
            lmask.paint(&mut img, intensity)?;
            rmask.paint(&mut img, intensity)?;
            placed.push((left, right));
        }
        if is_symmetric(&img) != (label == Label::Holds) {
            return Ok(None);
        }
        recipe.set("pairs", &placed);
        if label == Label::Violated {
            recipe.set("broken_pair", broken);
            recipe.set("violation", violation);
        }
        Ok(Some((img, recipe)))
    })
}

pub fn gen_a4(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_placed(rng, label, &ShapeKind::BASIC)
}

pub fn gen_c4(rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
    gen_placed(rng, label, &ShapeKind::NOVEL)
}

/// A symmetric image from the second curriculum set: an A1 symmetric sample
/// or the D1 reversal of an asymmetric one.
fn a2_symmetric(rng: &mut SeededRng) -> Result<(GrayImage, Recipe)> {
    if rng.coin(0.5) {
        let (img, r) = gen_a1(rng, Label::Holds, A1Options::default())?;
        Ok((img, Recipe::new().with("source", "A1").with("a1", r)))
    } else {
        let (src, r) = gen_a1(rng, Label::Violated, A1Options::default())?;
        let (img, _, d) = d1(&src, Label::Violated, rng)?;
        Ok((img, Recipe::new().with("source", "D1(A1)").with("a1", r).with("d1", d)))
    }
}

/// A symmetric image from the third curriculum set.
fn a3_symmetric(rng: &mut SeededRng) -> Result<(GrayImage, Recipe)> {
    let (img, r) = a2_symmetric(rng)?;
    if rng.coin(0.5) {
        return Ok((img, Recipe::new().with("source", "A2").with("a2", r)));
    }
    let (img, d) = d2(&img, rng, Label::Holds)?;
    Ok((img, Recipe::new().with("source", "D2(A2)").with("a2", r).with("d2", d)))
}

struct A1Round {
    round: &'static str,
    opts: A1Options,
}

impl TaskGenerator for A1Round {
    fn task(&self) -> Task {
        Task::GlobalSymmetry
    }
    fn round(&self) -> &'static str {
        self.round
    }
    fn summary(&self) -> &'static str {
        if self.opts.biased {
            "random polygons; symmetric images are a single component"
        } else {
            "random polygons vs symmetric polygons and mirror completions"
        }
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        gen_a1(rng, label, self.opts)
    }
}

struct DRound(u8);

impl TaskGenerator for DRound {
    fn task(&self) -> Task {
        Task::GlobalSymmetry
    }
    fn round(&self) -> &'static str {
        ["D1", "D2", "D3"][self.0 as usize - 1]
    }
    fn summary(&self) -> &'static str {
        match self.0 {
            1 => "A1 samples with the label reversed by erasing or mirroring",
            2 => "symmetric A2 samples scaled or given added shapes",
            _ => "symmetric A3 samples given several small shapes",
        }
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        match self.0 {
            1 => {
                let (src, r) = gen_a1(rng, label.flipped(), A1Options::default())?;
                let (img, _, d) = d1(&src, label.flipped(), rng)?;
                Ok((img, Recipe::new().with("a1", r).with("d1", d)))
            }
            2 => {
                let (src, r) = a2_symmetric(rng)?;
                let (img, d) = d2(&src, rng, label)?;
                Ok((img, Recipe::new().with("a2", r).with("d2", d)))
            }
            _ => {
                let (src, r) = a3_symmetric(rng)?;
                let (img, d) = d3(&src, rng, label)?;
                Ok((img, Recipe::new().with("a3", r).with("d3", d)))
            }
        }
    }
}

struct PlacedRound {
    novel: bool,
}

impl TaskGenerator for PlacedRound {
    fn task(&self) -> Task {
        Task::GlobalSymmetry
    }
    fn round(&self) -> &'static str {
        if self.novel {
            "C4"
        } else {
            "A4"
        }
    }
    fn summary(&self) -> &'static str {
        if self.novel {
            "mirrored placements of hexagrams and flowers"
        } else {
            "mirrored placements of triangles, squares and balls"
        }
    }
    fn generate(&self, rng: &mut SeededRng, label: Label) -> Result<(GrayImage, Recipe)> {
        if self.novel {
            gen_c4(rng, label)
        } else {
            gen_a4(rng, label)
        }
    }
}

pub(super) fn register(r: &mut Registry) {
    r.register(Arc::new(A1Round {
        round: "A1",
        opts: A1Options { biased: false },
    }));
    r.register(Arc::new(A1Round {
        round: "A1-biased",
        opts: A1Options { biased: true },
    }));
    for alias in ["B1", "C1"] {
        r.alias(Task::GlobalSymmetry, alias, "A1");
    }
    for k in 1..=3 {
        r.register(Arc::new(DRound(k)));
    }
    r.register(Arc::new(PlacedRound { novel: false }));
    r.register(Arc::new(PlacedRound { novel: true }));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(img: &GrayImage) -> bool {
        is_symmetric(img)
    }

    #[test]
    fn a1_labels_agree_with_fold() {
        for seed in 0..40 {
            for label in Label::BOTH {
                let mut rng = SeededRng::new(seed);
                let (img, _) = gen_a1(&mut rng, label, A1Options::default()).unwrap();
                assert_eq!(sym(&img), label == Label::Holds, "seed {seed} {label}");
            }
        }
    }

    #[test]
    fn biased_symmetric_images_are_one_component() {
        for seed in 0..20 {
            let mut rng = SeededRng::new(seed);
            let (img, _) = gen_a1(&mut rng, Label::Holds, A1Options { biased: true }).unwrap();
            assert_eq!(connected_components(&img).len(), 1);
        }
    }

    #[test]
    fn d1_reverses_labels() {
        for seed in 0..30 {
            for label in Label::BOTH {
                let mut rng = SeededRng::new(seed);
                let (src, _) = gen_a1(&mut rng, label, A1Options::default()).unwrap();
                let (out, l, _) = d1(&src, label, &mut rng).unwrap();
                assert_eq!(l, label.flipped());
                assert_eq!(sym(&out), l == Label::Holds);
            }
        }
    }

    #[test]
    fn scaling_symmetric_input_stays_exact() {
        let mut rng = SeededRng::new(5);
        let (img, _) = gen_a1(&mut rng, Label::Holds, A1Options::default()).unwrap();
        for f in [0.5, 0.7, 1.3, 1.5] {
            assert!(sym(&scale_about_center(&img, f, true).unwrap()));
        }
        assert_eq!(scale_about_center(&img, 1.0, false).unwrap(), img);
    }

    #[test]
    fn d2_honours_target_and_added_intensity() {
        for seed in 0..30 {
            let mut rng = SeededRng::new(seed);
            let (src, _) = gen_a1(&mut rng, Label::Holds, A1Options::default()).unwrap();
            for target in Label::BOTH {
                let (out, recipe) = d2(&src, &mut rng, target).unwrap();
                assert_eq!(sym(&out), target == Label::Holds);
                if let Some(shape) = recipe.get("shape") {
                    let s: ShapeInstance = serde_json::from_value(shape.clone()).unwrap();
                    assert!(s.intensity == 0 || (128..255).contains(&s.intensity));
                    assert_eq!(s.size, 25.0);
                }
            }
        }
    }

    #[test]
    fn d2_rejects_asymmetric_source() {
        let mut rng = SeededRng::new(1);
        let (src, _) = gen_a1(&mut rng, Label::Violated, A1Options::default()).unwrap();
        assert!(d2(&src, &mut rng, Label::Holds).is_err());
    }

    #[test]
    fn d3_strategies_are_uniform() {
        let mut rng = SeededRng::new(8);
        let (src, _) = gen_a1(&mut rng, Label::Holds, A1Options::default()).unwrap();
        let mut counts = [0usize; 3];
        let n = 3000;
        for seed in 0..n {
            let mut rng = SeededRng::new(seed);
            let (_, recipe) = d3(&src, &mut rng, Label::Violated).unwrap();
            let s: D3Strategy = serde_json::from_value(recipe.get("strategy").unwrap().clone()).unwrap();
            counts[D3Strategy::ALL.iter().position(|x| *x == s).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 1.0 / 3.0).abs() <= 0.03, "{counts:?}");
        }
    }

    #[test]
    fn d3_each_strategy_breaks_symmetry() {
        let mut rng = SeededRng::new(2);
        let (src, _) = gen_a1(&mut rng, Label::Holds, A1Options::default()).unwrap();
        for s in D3Strategy::ALL {
            for seed in 0..10 {
                let mut rng = SeededRng::new(seed);
                let (out, _) = d3_with(&src, &mut rng, Label::Violated, s).unwrap();
                assert!(!sym(&out));
            }
        }
        let (out, _) = d3(&src, &mut rng, Label::Holds).unwrap();
        assert!(sym(&out));
    }

    #[test]
    fn placement_sets_use_their_pools() {
        for seed in 0..20 {
            for label in Label::BOTH {
                let mut rng = SeededRng::new(seed);
                let (img, recipe) = gen_c4(&mut rng, label).unwrap();
                assert_eq!(sym(&img), label == Label::Holds);
                let pairs: Vec<(ShapeInstance, ShapeInstance)> =
                    serde_json::from_value(recipe.get("pairs").unwrap().clone()).unwrap();
                for (a, b) in pairs {
                    assert!(ShapeKind::NOVEL.contains(&a.kind) && ShapeKind::NOVEL.contains(&b.kind));
                }
                let (img, _) = gen_a4(&mut rng, label).unwrap();
                assert_eq!(sym(&img), label == Label::Holds);
            }
        }
    }
}
