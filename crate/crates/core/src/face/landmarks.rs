//! 68-point facial landmark sets read from sidecar files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Point;

pub const LANDMARK_COUNT: usize = 68;

/// Zero-based index ranges of the standard 68-point markup.
pub const NOSE: std::ops::Range<usize> = 27..36;
pub const EYES: std::ops::Range<usize> = 36..48;
pub const MOUTH: std::ops::Range<usize> = 48..68;
/// Nose bridge: top (point 28) and tip of the bridge (point 31).
pub const NOSE_TOP: usize = 27;
pub const NOSE_BOTTOM: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    points: Vec<Point>,
}

impl LandmarkSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::Format {
                what: "landmarks",
                detail: format!("expected {LANDMARK_COUNT} points, found {}", points.len()),
            });
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Format {
                what: "landmarks",
                detail: "non-finite coordinate".into(),
            });
        }
        Ok(LandmarkSet { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Point {
        self.points[index]
    }

    /// Parse either the iBUG `.pts` layout (`version`, `n_points`, braces) or
    /// bare `x y` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::with_capacity(LANDMARK_COUNT);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "{" || line == "}" || line.contains(':') {
                continue;
            }
            let nums: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            let parsed: std::result::Result<Vec<f64>, _> = nums.iter().map(|s| s.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 2 => points.push(Point::new(v[0], v[1])),
                _ => {
                    return Err(Error::Format {
                        what: "landmarks",
                        detail: format!("line {}: expected `x y`, got {raw:?}", lineno + 1),
                    })
                }
            }
        }
        LandmarkSet::new(points)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LandmarkSet::parse(&text).map_err(|e| match e {
            Error::Format { what, detail } => Error::Format {
                what,
                detail: format!("{}: {detail}", path.display()),
            },
            other => other,
        })
    }

    /// iBUG `.pts` text.
    pub fn to_pts(&self) -> String {
        let mut s = format!("version: 1\nn_points: {LANDMARK_COUNT}\n{{\n");
        for p in &self.points {
            s.push_str(&format!("{} {}\n", p.x, p.y));
        }
        s.push_str("}\n");
        s
    }

    /// Mass centre of the eye, nose and mouth points.
    pub fn face_center(&self) -> Point {
        let idx = EYES.chain(NOSE).chain(MOUTH);
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for i in idx {
            sx += self.points[i].x;
            sy += self.points[i].y;
            n += 1.0;
        }
        Point::new(sx / n, sy / n)
    }

    /// Clockwise angle (degrees) of the nose bridge away from straight down.
    pub fn nose_angle(&self) -> Result<f64> {
        let (a, b) = (self.points[NOSE_TOP], self.points[NOSE_BOTTOM]);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        if dx.hypot(dy) < 1e-9 {
            return Err(Error::Alignment("nose bridge has zero length".into()));
        }
        Ok(dx.atan2(dy).to_degrees())
    }

    pub fn vertical_extent(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)))
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> LandmarkSet {
        LandmarkSet {
            points: self.points.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Clamp every point into `[0, width] x [0, height]`; reports whether any
    /// point moved.
    pub fn clip(&mut self, width: f64, height: f64) -> bool {
        let mut clipped = false;
        for p in &mut self.points {
            let q = Point::new(p.x.clamp(0.0, width), p.y.clamp(0.0, height));
            clipped |= q != *p;
            *p = q;
        }
        clipped
    }
}
