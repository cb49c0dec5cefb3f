use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

use super::fill::{fill_rings, fill_rings_mirrored};
use super::geometry::{Point, Rect};
use super::mask::Mask;
use super::polygon::PolygonSpec;

/// Apex angle of the pointer triangle used by the common-fate scenes.
pub const POINTER_APEX_DEG: f64 = 40.0;

const CIRCLE_VERTICES: usize = 256;
const PETAL_VERTICES: usize = 96;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    /// Equilateral, apex up at rotation 0.
    Triangle,
    /// Isosceles with a 40 degree apex, apex up at rotation 0; anchored at
    /// its centroid so that the apex ray starts at the instance centre.
    Pointer,
    Square,
    /// Filled disc.
    Ball,
    /// Six-pointed star (two overlapping equilateral triangles).
    Hexagram,
    /// Four-leaf flower.
    FlowerF4,
    /// Two-leaf flower.
    FlowerF2,
    Polygon(PolygonSpec),
}

impl ShapeKind {
    /// Triangle, square and ball.
    pub const BASIC: [ShapeKind; 3] = [ShapeKind::Triangle, ShapeKind::Square, ShapeKind::Ball];
    /// Hexagram, F4 and F2.
    pub const NOVEL: [ShapeKind; 3] = [ShapeKind::Hexagram, ShapeKind::FlowerF4, ShapeKind::FlowerF2];

    pub fn name(&self) -> &'static str {
        match self {
            ShapeKind::Triangle => "triangle",
            ShapeKind::Pointer => "pointer",
            ShapeKind::Square => "square",
            ShapeKind::Ball => "ball",
            ShapeKind::Hexagram => "hexagram",
            ShapeKind::FlowerF4 => "f4",
            ShapeKind::FlowerF2 => "f2",
            ShapeKind::Polygon(_) => "polygon",
        }
    }

    pub fn from_name(name: &str) -> Result<ShapeKind> {
        Ok(match name {
            "triangle" => ShapeKind::Triangle,
            "pointer" => ShapeKind::Pointer,
            "square" => ShapeKind::Square,
            "ball" => ShapeKind::Ball,
            "hexagram" => ShapeKind::Hexagram,
            "f4" => ShapeKind::FlowerF4,
            "f2" => ShapeKind::FlowerF2,
            other => {
                return Err(Error::Unknown {
                    kind: "shape kind",
                    name: other.to_string(),
                })
            }
        })
    }

    /// Whether the outline is mirror-symmetric about its vertical centre
    /// line at rotation 0.
    fn symmetric_upright(&self) -> bool {
        match self {
            ShapeKind::Polygon(spec) => spec.mirror_axis.is_some(),
            _ => true,
        }
    }

    fn unit_rings(&self) -> Vec<Vec<Point>> {
        match self {
            ShapeKind::Triangle => {
                let h = 3f64.sqrt() / 4.0;
                vec![vec![
                    Point::new(0.0, -h),
                    Point::new(0.5, h),
                    Point::new(-0.5, h),
                ]]
            }
            ShapeKind::Pointer => {
                let half_base = (POINTER_APEX_DEG / 2.0).to_radians().tan();
                vec![vec![
                    Point::new(0.0, -2.0 / 3.0),
                    Point::new(half_base, 1.0 / 3.0),
                    Point::new(-half_base, 1.0 / 3.0),
                ]]
            }
            ShapeKind::Square => vec![vec![
                Point::new(-0.5, -0.5),
                Point::new(0.5, -0.5),
                Point::new(0.5, 0.5),
                Point::new(-0.5, 0.5),
            ]],
            ShapeKind::Ball => vec![ellipse(Point::new(0.0, 0.0), 0.5, 0.5, 0.0, CIRCLE_VERTICES)],
            ShapeKind::Hexagram => {
                let tri = |start: f64| {
                    (0..3)
                        .map(|k| {
                            let a = (start + 120.0 * k as f64).to_radians();
                            Point::new(0.5 * a.cos(), 0.5 * a.sin())
                        })
                        .collect::<Vec<_>>()
                };
                vec![tri(-90.0), tri(90.0)]
            }
            ShapeKind::FlowerF4 => {
                let mut rings: Vec<Vec<Point>> = (0..4)
                    .map(|k| {
                        let a = (90.0 * k as f64).to_radians();
                        ellipse(
                            Point::new(0.25 * a.cos(), 0.25 * a.sin()),
                            0.25,
                            0.14,
                            a,
                            PETAL_VERTICES,
                        )
                    })
                    .collect();
                rings.push(ellipse(Point::new(0.0, 0.0), 0.12, 0.12, 0.0, PETAL_VERTICES));
                rings
            }
            ShapeKind::FlowerF2 => vec![
                ellipse(Point::new(0.25, 0.0), 0.25, 0.16, 0.0, PETAL_VERTICES),
                ellipse(Point::new(-0.25, 0.0), 0.25, 0.16, 0.0, PETAL_VERTICES),
                ellipse(Point::new(0.0, 0.0), 0.08, 0.08, 0.0, PETAL_VERTICES),
            ],
            ShapeKind::Polygon(spec) => vec![spec.flatten()],
        }
    }
}

fn ellipse(c: Point, a: f64, b: f64, tilt: f64, n: usize) -> Vec<Point> {
    let (s, co) = tilt.sin_cos();
    (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            let (x, y) = (a * t.cos(), b * t.sin());
            Point::new(c.x + co * x - s * y, c.y + s * x + co * y)
        })
        .collect()
}

/// A drawable object. `size` is the longer edge of the axis-aligned bounding
/// box of the rotated outline; `center` is the bounding-box centre, except
/// for [`ShapeKind::Pointer`] where it is the centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeInstance {
    pub kind: ShapeKind,
    pub center: Point,
    pub size: f64,
    pub intensity: u8,
    /// Degrees, clockwise on screen.
    #[serde(default)]
    pub rotation: f64,
}

impl ShapeInstance {
    pub fn new(kind: ShapeKind, center: Point, size: f64, intensity: u8) -> Self {
        ShapeInstance {
            kind,
            center,
            size,
            intensity,
            rotation: 0.0,
        }
    }

    pub fn with_rotation(mut self, deg: f64) -> Self {
        self.rotation = deg;
        self
    }

    /// Outline rings in canvas coordinates.
    pub fn rings(&self) -> Vec<Vec<Point>> {
        self.rings_at(self.size)
    }

    fn rings_at(&self, size: f64) -> Vec<Vec<Point>> {
        let unit = self.kind.unit_rings();
        let rotated: Vec<Vec<Point>> = unit
            .iter()
            .map(|r| r.iter().map(|p| p.rotated(self.rotation)).collect())
            .collect();
        let bb = Rect::bounding(rotated.iter().flatten().copied())
            .expect("every kind has a non-empty outline");
        let longest = bb.width().max(bb.height());
        let scale = if longest > 0.0 { size / longest } else { 0.0 };
        let anchor = match self.kind {
            ShapeKind::Pointer => Point::new(0.0, 0.0),
            _ => Point::new((bb.x0 + bb.x1) / 2.0, (bb.y0 + bb.y1) / 2.0),
        };
        rotated
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|p| {
                        Point::new(
                            self.center.x + (p.x - anchor.x) * scale,
                            self.center.y + (p.y - anchor.y) * scale,
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Continuous bounding box of the placed outline.
    pub fn bounds(&self) -> Rect {
        Rect::bounding(self.rings().into_iter().flatten()).expect("non-empty outline")
    }

    /// Unit vector the apex points along (meaningful for triangles).
    pub fn apex_direction(&self) -> Point {
        Point::new(0.0, -1.0).rotated(self.rotation)
    }

    /// Binary coverage. Upright symmetric kinds are sampled on the left half
    /// and reflected, so their masks are exactly mirror-symmetric.
    ///
    /// Sharp corners can fall between pixel centres, so the outline is grown
    /// until the rendered bounding box is within one pixel of `size`.
    pub fn mask(&self) -> Mask {
        let mut effective = self.size;
        let mut mask = self.fill_at(effective);
        for _ in 0..12 {
            let shortfall = self.size - mask.extent() as f64;
            if shortfall.abs() <= 1.0 {
                break;
            }
            effective += 0.5 * shortfall.signum();
            mask = self.fill_at(effective);
        }
        mask
    }

    fn fill_at(&self, size: f64) -> Mask {
        let rings = self.rings_at(size);
        if self.rotation.rem_euclid(360.0) == 0.0 && self.kind.symmetric_upright() {
            fill_rings_mirrored(&rings, self.center.x)
        } else {
            fill_rings(&rings)
        }
    }
}

/// Rotation that makes a triangle's apex point along `dir`.
pub fn rotation_towards(dir: Point) -> f64 {
    dir.x.atan2(-dir.y).to_degrees()
}

/// Draw `shape` onto `canvas`, overwriting covered pixels with its intensity.
pub fn rasterize(shape: &ShapeInstance, canvas: &mut GrayImage) -> Result<Mask> {
    let mask = shape.mask();
    mask.paint(canvas, shape.intensity)?;
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_kinds() -> Vec<ShapeKind> {
        vec![
            ShapeKind::Triangle,
            ShapeKind::Pointer,
            ShapeKind::Square,
            ShapeKind::Ball,
            ShapeKind::Hexagram,
            ShapeKind::FlowerF4,
            ShapeKind::FlowerF2,
        ]
    }

    #[test]
    fn ball_bbox_matches_size() {
        let mut img = GrayImage::blank();
        let s = ShapeInstance::new(ShapeKind::Ball, Point::new(100.0, 100.0), 30.0, 200);
        let m = rasterize(&s, &mut img).unwrap();
        let (a, b, c, d) = m.bbox().unwrap();
        assert!((29..=31).contains(&(c - a + 1)));
        assert!((29..=31).contains(&(d - b + 1)));
        assert!(img.pixels().iter().all(|&v| v == 0 || v == 200));
    }

    #[test]
    fn square_40_has_1600_pixels() {
        let mut img = GrayImage::blank();
        let s = ShapeInstance::new(ShapeKind::Square, Point::new(100.0, 100.0), 40.0, 90);
        rasterize(&s, &mut img).unwrap();
        assert_eq!(img.foreground_count(), 1600);
    }

    #[test]
    fn size_metric_holds_for_every_kind() {
        for kind in all_kinds() {
            for size in 20..=50 {
                let s = ShapeInstance::new(kind.clone(), Point::new(100.0, 100.0), size as f64, 255);
                let e = s.mask().extent() as i64;
                assert!((e - size).abs() <= 1, "{} size {size} extent {e}", kind.name());
            }
        }
    }

    #[test]
    fn size_metric_holds_under_rotation() {
        for kind in all_kinds() {
            for rot in [15.0, 33.0, 90.0, 137.5, 250.0] {
                for size in [20.0, 35.0, 50.0] {
                    let s = ShapeInstance::new(kind.clone(), Point::new(100.0, 100.0), size, 255)
                        .with_rotation(rot);
                    let e = s.mask().extent() as f64;
                    assert!((e - size).abs() <= 1.0, "{} rot {rot} size {size} extent {e}", kind.name());
                }
            }
        }
    }

    #[test]
    fn upright_masks_are_mirror_exact() {
        // independent pixel-compare: reflect about the mask's own bbox centre
        for kind in all_kinds() {
            for size in [20.0, 25.0, 33.0, 45.0] {
                let m = ShapeInstance::new(kind.clone(), Point::new(77.0, 91.0), size, 1).mask();
                let (x0, _, x1, _) = m.bbox().unwrap();
                for (x, y) in m.pixels() {
                    assert!(m.contains(x0 + x1 - x, y), "{} size {size}", kind.name());
                }
            }
        }
    }

    #[test]
    fn out_of_bounds_is_error() {
        let mut img = GrayImage::blank();
        let s = ShapeInstance::new(ShapeKind::Square, Point::new(5.0, 100.0), 30.0, 9);
        assert!(matches!(rasterize(&s, &mut img), Err(Error::OutOfBounds { .. })));
        assert!(img.is_blank());
    }

    #[test]
    fn pointer_apex_follows_rotation() {
        let d = ShapeInstance::new(ShapeKind::Pointer, Point::new(0.0, 0.0), 20.0, 1)
            .with_rotation(90.0)
            .apex_direction();
        assert!((d.x - 1.0).abs() < 1e-12 && d.y.abs() < 1e-12);
        let r = rotation_towards(Point::new(-1.0, 1.0));
        let back = Point::new(0.0, -1.0).rotated(r);
        assert!((back.x + 0.5f64.sqrt()).abs() < 1e-12 && (back.y - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for kind in all_kinds() {
            assert_eq!(ShapeKind::from_name(kind.name()).unwrap(), kind);
        }
        assert!(ShapeKind::from_name("blob").is_err());
    }
}
