use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Binary coverage of a shape, positioned on the canvas by its top-left
/// corner `(x0, y0)` in pixel indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub x0: i64,
    pub y0: i64,
    pub w: u32,
    pub h: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn empty(x0: i64, y0: i64, w: u32, h: u32) -> Self {
        Mask {
            x0,
            y0,
            w,
            h,
            bits: vec![false; (w as usize) * (h as usize)],
        }
    }

    #[inline]
    pub fn get_local(&self, lx: u32, ly: u32) -> bool {
        self.bits[(ly * self.w + lx) as usize]
    }

    #[inline]
    pub fn set_local(&mut self, lx: u32, ly: u32, v: bool) {
        let w = self.w;
        self.bits[(ly * w + lx) as usize] = v;
    }

    /// Membership at absolute canvas coordinates.
    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        let lx = x - self.x0;
        let ly = y - self.y0;
        lx >= 0
            && ly >= 0
            && lx < self.w as i64
            && ly < self.h as i64
            && self.get_local(lx as u32, ly as u32)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Absolute coordinates of covered pixels in raster order.
    pub fn pixels(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.h).flat_map(move |ly| {
            (0..self.w).filter_map(move |lx| {
                self.get_local(lx, ly)
                    .then(|| (self.x0 + lx as i64, self.y0 + ly as i64))
            })
        })
    }

    /// Tight bounding box `(x_min, y_min, x_max, y_max)` of covered pixels,
    /// inclusive. `None` when empty.
    pub fn bbox(&self) -> Option<(i64, i64, i64, i64)> {
        let mut bb: Option<(i64, i64, i64, i64)> = None;
        for (x, y) in self.pixels() {
            bb = Some(match bb {
                None => (x, y, x, y),
                Some((a, b, c, d)) => (a.min(x), b.min(y), c.max(x), d.max(y)),
            });
        }
        bb
    }

    /// Longer edge of the tight bounding box, in pixels.
    pub fn extent(&self) -> u32 {
        self.bbox()
            .map(|(a, b, c, d)| ((c - a + 1).max(d - b + 1)) as u32)
            .unwrap_or(0)
    }

    /// Reflection about the canvas mid-line of an image `canvas_width` wide.
    pub fn mirrored(&self, canvas_width: u32) -> Mask {
        let mut out = Mask::empty(
            canvas_width as i64 - self.x0 - self.w as i64,
            self.y0,
            self.w,
            self.h,
        );
        for ly in 0..self.h {
            for lx in 0..self.w {
                if self.get_local(lx, ly) {
                    out.set_local(self.w - 1 - lx, ly, true);
                }
            }
        }
        out
    }

    /// Same coverage shifted by `(dx, dy)`.
    pub fn translated(&self, dx: i64, dy: i64) -> Mask {
        Mask {
            x0: self.x0 + dx,
            y0: self.y0 + dy,
            ..self.clone()
        }
    }

    /// Coverage of either mask.
    pub fn union(&self, other: &Mask) -> Mask {
        if self.w == 0 || self.h == 0 {
            return other.clone();
        }
        if other.w == 0 || other.h == 0 {
            return self.clone();
        }
        let x0 = self.x0.min(other.x0);
        let y0 = self.y0.min(other.y0);
        let x1 = (self.x0 + self.w as i64).max(other.x0 + other.w as i64);
        let y1 = (self.y0 + self.h as i64).max(other.y0 + other.h as i64);
        let mut out = Mask::empty(x0, y0, (x1 - x0) as u32, (y1 - y0) as u32);
        for (x, y) in self.pixels().chain(other.pixels()) {
            out.set_local((x - x0) as u32, (y - y0) as u32, true);
        }
        out
    }

    /// Coverage of `self` without `other`.
    pub fn minus(&self, other: &Mask) -> Mask {
        let mut out = self.clone();
        for (x, y) in self.pixels() {
            if other.contains(x, y) {
                out.set_local((x - self.x0) as u32, (y - self.y0) as u32, false);
            }
        }
        out
    }

    pub fn fits(&self, canvas: &GrayImage) -> bool {
        match self.bbox() {
            None => true,
            Some((a, b, c, d)) => canvas.in_bounds(a, b) && canvas.in_bounds(c, d),
        }
    }

    /// Overwrite covered pixels with `intensity`.
    pub fn paint(&self, canvas: &mut GrayImage, intensity: u8) -> Result<()> {
        if !self.fits(canvas) {
            return Err(Error::OutOfBounds {
                width: canvas.width(),
                height: canvas.height(),
            });
        }
        for (x, y) in self.pixels() {
            canvas.set(x as u32, y as u32, intensity);
        }
        Ok(())
    }

    /// Number of covered pixels that are foreground in `img`.
    pub fn foreground_overlap(&self, img: &GrayImage) -> usize {
        self.pixels()
            .filter(|&(x, y)| img.get_or_zero(x, y) > 0)
            .count()
    }
}
