use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

use super::geometry::{Point, Rect};
use super::mask::Mask;

/// How consecutive control points are joined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Straight,
    /// Quadratic Bezier through one off-curve point.
    Bezier { control: Point },
}

/// Closed free-form outline. Segment `i` joins point `i` to point `i + 1`
/// (wrapping around).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonSpec {
    pub control_points: Vec<Point>,
    pub segments: Vec<Segment>,
    /// Control points and segments mirror each other about `x = axis`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mirror_axis: Option<f64>,
}

const BEZIER_STEPS: usize = 16;

/// Pixels a rasterized random polygon must cover.
pub const MIN_POLYGON_PIXELS: usize = 50;

impl PolygonSpec {
    pub fn new(control_points: Vec<Point>, segments: Vec<Segment>) -> Result<Self> {
        if control_points.len() < 3 {
            return Err(Error::InvalidParameter(
                "a polygon needs at least 3 control points".into(),
            ));
        }
        if segments.len() != control_points.len() {
            return Err(Error::InvalidParameter(
                "one segment per control point is required".into(),
            ));
        }
        Ok(PolygonSpec {
            control_points,
            segments,
            mirror_axis: None,
        })
    }

    /// Piecewise-linear outline with Bezier segments subdivided.
    pub fn flatten(&self) -> Vec<Point> {
        let n = self.control_points.len();
        let mut out = Vec::with_capacity(n * 4);
        for i in 0..n {
            let a = self.control_points[i];
            let b = self.control_points[(i + 1) % n];
            out.push(a);
            if let Segment::Bezier { control } = self.segments[i] {
                for s in 1..BEZIER_STEPS {
                    let t = s as f64 / BEZIER_STEPS as f64;
                    let u = 1.0 - t;
                    out.push(Point::new(
                        u * u * a.x + 2.0 * u * t * control.x + t * t * b.x,
                        u * u * a.y + 2.0 * u * t * control.y + t * t * b.y,
                    ));
                }
            }
        }
        out
    }

    /// Uniform scale about `about`; a mirror axis through `about.x` is kept.
    pub fn scaled(&self, factor: f64, about: Point) -> PolygonSpec {
        let f = |p: Point| Point::new(about.x + (p.x - about.x) * factor, about.y + (p.y - about.y) * factor);
        PolygonSpec {
            control_points: self.control_points.iter().map(|&p| f(p)).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| match *s {
                    Segment::Straight => Segment::Straight,
                    Segment::Bezier { control } => Segment::Bezier { control: f(control) },
                })
                .collect(),
            mirror_axis: self.mirror_axis.map(|a| about.x + (a - about.x) * factor),
        }
    }

    /// Coverage when drawn at its own (absolute) coordinates.
    pub fn mask(&self) -> Mask {
        let ring = self.flatten();
        match self.mirror_axis {
            Some(axis) => super::fill::fill_rings_mirrored(&[ring], axis),
            None => super::fill::fill_rings(&[ring]),
        }
    }
}

fn bezier_or_straight(rng: &mut SeededRng, a: Point, b: Point) -> Segment {
    if rng.coin(0.5) {
        let mid = Point::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let bulge = rng.float_in(-0.6, 0.6);
        Segment::Bezier {
            control: Point::new(mid.x - dy * bulge, mid.y + dx * bulge),
        }
    } else {
        Segment::Straight
    }
}

fn min_pixels(region: &Rect) -> usize {
    MIN_POLYGON_PIXELS.min((region.width() * region.height() / 8.0) as usize).max(4)
}

fn check_range(points: (u32, u32)) -> Result<()> {
    let (lo, hi) = points;
    if lo < 3 || hi > 12 || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "point count range [{lo},{hi}] must lie within [3,12]"
        )));
    }
    Ok(())
}

/// Random closed outline with control points uniform in `region`.
///
/// Points are joined in angular order about their mean, and each segment is
/// independently straight or Bezier with probability one half. Outlines that
/// rasterize to fewer than [`MIN_POLYGON_PIXELS`] pixels are redrawn.
pub fn random_polygon(
    rng: &mut SeededRng,
    region: Rect,
    point_count_range: (u32, u32),
) -> Result<PolygonSpec> {
    check_range(point_count_range)?;
    let need = min_pixels(&region);
    for _ in 0..100 {
        let n = rng.int_in(point_count_range.0 as i64, point_count_range.1 as i64) as usize;
        let mut pts: Vec<Point> = (0..n)
            .map(|_| {
                Point::new(
                    rng.float_in(region.x0, region.x1),
                    rng.float_in(region.y0, region.y1),
                )
            })
            .collect();
        let cx = pts.iter().map(|p| p.x).sum::<f64>() / n as f64;
        let cy = pts.iter().map(|p| p.y).sum::<f64>() / n as f64;
        pts.sort_by(|a, b| {
            let ta = (a.y - cy).atan2(a.x - cx);
            let tb = (b.y - cy).atan2(b.x - cx);
            ta.total_cmp(&tb)
        });
        let segments = (0..n)
            .map(|i| bezier_or_straight(rng, pts[i], pts[(i + 1) % n]))
            .collect();
        let spec = PolygonSpec::new(pts, segments)?;
        if spec.mask().count() >= need {
            return Ok(spec);
        }
    }
    Err(Error::Rejection {
        attempts: 100,
        what: "random polygon stayed degenerate".into(),
    })
}

/// Random outline that is bilaterally symmetric about the vertical line
/// through the centre of `region` (rounded to a pixel boundary).
///
/// Control points are drawn in the left half and reflected; the left chain is
/// ordered top to bottom, so the outline is simple.
pub fn random_symmetric_polygon(
    rng: &mut SeededRng,
    region: Rect,
    point_count_range: (u32, u32),
) -> Result<PolygonSpec> {
    check_range(point_count_range)?;
    let axis = ((region.x0 + region.x1) / 2.0).round();
    let half = (axis - region.x0).min(region.x1 - axis);
    let need = min_pixels(&region);
    for _ in 0..100 {
        // Total point count includes the two on-axis points.
        let total = rng.int_in(point_count_range.0.max(4) as i64, point_count_range.1.max(4) as i64);
        let k = ((total - 2) / 2).max(1) as usize;
        let mut left: Vec<Point> = (0..k)
            .map(|_| {
                Point::new(
                    axis - rng.float_in(0.15 * half, half),
                    rng.float_in(region.y0, region.y1),
                )
            })
            .collect();
        left.sort_by(|a, b| a.y.total_cmp(&b.y));
        let top = Point::new(axis, rng.float_in(region.y0, left[0].y));
        let bottom = Point::new(axis, rng.float_in(left[k - 1].y, region.y1));

        // top -> left chain -> bottom -> mirrored chain back up.
        let mut pts = vec![top];
        pts.extend(left.iter().copied());
        pts.push(bottom);
        pts.extend(left.iter().rev().map(|p| Point::new(2.0 * axis - p.x, p.y)));

        let n = pts.len();
        let mut segments = vec![Segment::Straight; n];
        // Segments 0..=k run down the left side; segment n-1-i mirrors segment i.
        for i in 0..=k {
            let seg = bezier_or_straight(rng, pts[i], pts[i + 1]);
            let mirrored = match seg {
                Segment::Straight => Segment::Straight,
                Segment::Bezier { control } => Segment::Bezier {
                    control: Point::new(2.0 * axis - control.x, control.y),
                },
            };
            segments[i] = seg;
            segments[n - 1 - i] = mirrored;
        }
        let mut spec = PolygonSpec::new(pts, segments)?;
        spec.mirror_axis = Some(axis);
        if spec.mask().count() >= need {
            return Ok(spec);
        }
    }
    Err(Error::Rejection {
        attempts: 100,
        what: "symmetric polygon stayed degenerate".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_point_count() {
        let mut rng = SeededRng::new(5);
        let region = Rect::new(20.0, 20.0, 180.0, 180.0);
        for _ in 0..20 {
            let p = random_polygon(&mut rng, region, (3, 3)).unwrap();
            assert_eq!(p.control_points.len(), 3);
        }
    }

    #[test]
    fn centred_region_covers_enough_pixels() {
        let region = Rect::new(20.0, 20.0, 180.0, 180.0);
        for seed in 0..50 {
            let mut rng = SeededRng::new(seed);
            let p = random_polygon(&mut rng, region, (3, 12)).unwrap();
            assert!(p.mask().count() >= 50, "seed {seed}");
        }
    }

    #[test]
    fn same_seed_same_polygon() {
        let region = Rect::new(20.0, 20.0, 180.0, 180.0);
        let a = random_polygon(&mut SeededRng::new(9), region, (3, 12)).unwrap();
        let b = random_polygon(&mut SeededRng::new(9), region, (3, 12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_ranges() {
        let region = Rect::new(0.0, 0.0, 10.0, 10.0);
        let mut rng = SeededRng::new(0);
        assert!(random_polygon(&mut rng, region, (2, 5)).is_err());
        assert!(random_polygon(&mut rng, region, (3, 13)).is_err());
        assert!(PolygonSpec::new(vec![Point::new(0.0, 0.0); 2], vec![Segment::Straight; 2]).is_err());
    }

    #[test]
    fn both_segment_kinds_appear() {
        let mut rng = SeededRng::new(11);
        let region = Rect::new(20.0, 20.0, 180.0, 180.0);
        let mut straight = 0;
        let mut bezier = 0;
        for _ in 0..50 {
            let p = random_polygon(&mut rng, region, (5, 8)).unwrap();
            for s in &p.segments {
                match s {
                    Segment::Straight => straight += 1,
                    Segment::Bezier { .. } => bezier += 1,
                }
            }
        }
        let frac = bezier as f64 / (straight + bezier) as f64;
        assert!((0.4..0.6).contains(&frac), "bezier fraction {frac}");
    }

    #[test]
    fn symmetric_polygon_mask_is_mirror_exact() {
        for seed in 0..30 {
            let mut rng = SeededRng::new(seed);
            let p = random_symmetric_polygon(&mut rng, Rect::new(40.0, 30.0, 160.0, 170.0), (4, 10))
                .unwrap();
            let m = p.mask();
            for (x, y) in m.pixels() {
                assert!(m.contains(199 - x, y), "seed {seed} pixel ({x},{y})");
            }
        }
    }
}
