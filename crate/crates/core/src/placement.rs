//! Rejection-sampled object placement with a minimum gap between objects.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::raster::{Mask, Point, Rect, ShapeInstance};
use crate::rng::SeededRng;

/// Minimum number of background pixels between distinct objects
/// (Chebyshev distance), which keeps them separate 8-connected components.
pub const SEPARATION: i64 = 2;
pub const MAX_ATTEMPTS: u32 = 1000;

/// Canvas-sized map of pixels that new objects may not cover.
#[derive(Debug, Clone)]
pub struct Layout {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
}

impl Layout {
    pub fn new(width: u32, height: u32) -> Self {
        Layout {
            width,
            height,
            blocked: vec![false; (width * height) as usize],
        }
    }

    pub fn for_canvas(canvas: &GrayImage) -> Self {
        Layout::new(canvas.width(), canvas.height())
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    fn is_blocked(&self, x: i64, y: i64) -> bool {
        self.blocked[(y * self.width as i64 + x) as usize]
    }

    /// True when `mask` lies on the canvas and keeps the required gap.
    pub fn accepts(&self, mask: &Mask) -> bool {
        if mask.count() == 0 {
            return false;
        }
        mask.pixels()
            .all(|(x, y)| self.in_bounds(x, y) && !self.is_blocked(x, y))
    }

    /// Block `mask` and its `SEPARATION`-neighbourhood.
    pub fn occupy(&mut self, mask: &Mask) {
        for (x, y) in mask.pixels() {
            for dy in -SEPARATION..=SEPARATION {
                for dx in -SEPARATION..=SEPARATION {
                    let (nx, ny) = (x + dx, y + dy);
                    if self.in_bounds(nx, ny) {
                        let w = self.width as i64;
                        self.blocked[(ny * w + nx) as usize] = true;
                    }
                }
            }
        }
    }

    /// Try up to [`MAX_ATTEMPTS`] integer centres in `region` and keep the
    /// first shape from `shape_at` whose mask is accepted.
    pub fn place(
        &mut self,
        rng: &mut SeededRng,
        region: Rect,
        shape_at: impl Fn(Point) -> ShapeInstance,
    ) -> Result<(ShapeInstance, Mask)> {
        self.place_with(rng, region, |c| {
            let shape = shape_at(c);
            let mask = shape.mask();
            (shape, mask)
        })
    }

    /// Generic form of [`Layout::place`]: `build` returns any payload along
    /// with the mask that must be accepted.
    pub fn place_with<T>(
        &mut self,
        rng: &mut SeededRng,
        region: Rect,
        build: impl Fn(Point) -> (T, Mask),
    ) -> Result<(T, Mask)> {
        let (x0, x1) = (region.x0.ceil() as i64, region.x1.floor() as i64);
        let (y0, y1) = (region.y0.ceil() as i64, region.y1.floor() as i64);
        if x0 > x1 || y0 > y1 {
            return Err(Error::Placement {
                attempts: 0,
                what: format!("empty placement region {region:?}"),
            });
        }
        for _ in 0..MAX_ATTEMPTS {
            let c = Point::new(rng.int_in(x0, x1) as f64, rng.int_in(y0, y1) as f64);
            let (payload, mask) = build(c);
            if self.accepts(&mask) {
                self.occupy(&mask);
                return Ok((payload, mask));
            }
        }
        Err(Error::Placement {
            attempts: MAX_ATTEMPTS,
            what: "no free position for object".into(),
        })
    }
}

/// Region of centres that keeps an object of `size` at least `pad` pixels
/// inside a `width x height` canvas.
pub fn inner_region(width: u32, height: u32, size: f64, pad: f64) -> Rect {
    let m = size / 2.0 + pad;
    Rect::new(m, m, width as f64 - m, height as f64 - m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::connected_components;
    use crate::raster::ShapeKind;

    #[test]
    fn placed_objects_stay_separate() {
        let mut rng = SeededRng::new(3);
        let mut layout = Layout::new(200, 200);
        let mut img = GrayImage::blank();
        for _ in 0..12 {
            let (shape, mask) = layout
                .place(&mut rng, inner_region(200, 200, 30.0, 1.0), |c| {
                    ShapeInstance::new(ShapeKind::Square, c, 30.0, 77).with_rotation(20.0)
                })
                .unwrap();
            mask.paint(&mut img, shape.intensity).unwrap();
        }
        assert_eq!(connected_components(&img).len(), 12);
    }

    #[test]
    fn full_canvas_fails_with_placement_error() {
        let mut rng = SeededRng::new(1);
        let mut layout = Layout::new(40, 40);
        let r = inner_region(40, 40, 30.0, 1.0);
        layout
            .place(&mut rng, r, |c| ShapeInstance::new(ShapeKind::Ball, c, 30.0, 1))
            .unwrap();
        let err = layout
            .place(&mut rng, r, |c| ShapeInstance::new(ShapeKind::Ball, c, 30.0, 1))
            .unwrap_err();
        assert!(matches!(err, Error::Placement { .. }));
    }
}
