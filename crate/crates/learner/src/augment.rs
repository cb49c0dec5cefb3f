//! Random rotation, shift and flips. The same draw can be applied to a
//! training input (bilinear) or to a full-resolution image (nearest
//! neighbour), so label preservation can be checked with the oracles.

use gestalt_core::{GrayImage, SeededRng};
use serde::{Deserialize, Serialize};

use crate::config::AugmentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub angle_deg: f64,
    /// Shift as a fraction of width and height.
    pub dx: f64,
    pub dy: f64,
    pub hflip: bool,
    pub vflip: bool,
}

impl AugmentParams {
    pub const IDENTITY: AugmentParams = AugmentParams {
        angle_deg: 0.0,
        dx: 0.0,
        dy: 0.0,
        hflip: false,
        vflip: false,
    };

    /// Source position of output pixel centre `(x, y)`: undo the shift,
    /// then the rotation about the centre, then the flips.
    fn source(&self, x: f64, y: f64, w: f64, h: f64) -> (f64, f64) {
        let (cx, cy) = (w / 2.0, h / 2.0);
        let (px, py) = (x - self.dx * w - cx, y - self.dy * h - cy);
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let (mut sx, mut sy) = (px * c + py * s, -px * s + py * c);
        if self.hflip {
            sx = -sx;
        }
        if self.vflip {
            sy = -sy;
        }
        (sx + cx, sy + cy)
    }
}

impl AugmentConfig {
    pub fn draw(&self, rng: &mut SeededRng) -> AugmentParams {
        if !self.enabled {
            return AugmentParams::IDENTITY;
        }
        let r = self.max_rotation_deg;
        let s = self.max_shift_frac;
        AugmentParams {
            angle_deg: if r > 0.0 { rng.float_in(-r, r) } else { 0.0 },
            dx: if self.horizontal_shift && s > 0.0 { rng.float_in(-s, s) } else { 0.0 },
            dy: if s > 0.0 { rng.float_in(-s, s) } else { 0.0 },
            hflip: self.hflip && rng.coin(0.5),
            vflip: self.vflip && rng.coin(0.5),
        }
    }
}

/// Bilinear resample of a square `side x side` plane; outside reads 0.
pub fn apply_plane(x: &[f64], side: usize, p: &AugmentParams) -> Vec<f64> {
    if *p == AugmentParams::IDENTITY {
        return x.to_vec();
    }
    let n = side as f64;
    let at = |i: isize, j: isize| {
        if i < 0 || j < 0 || i >= side as isize || j >= side as isize {
            0.0
        } else {
            x[j as usize * side + i as usize]
        }
    };
    let mut out = Vec::with_capacity(side * side);
    for yo in 0..side {
        for xo in 0..side {
            let (sx, sy) = p.source(xo as f64 + 0.5, yo as f64 + 0.5, n, n);
            let (fx, fy) = (sx - 0.5, sy - 0.5);
            let (x0, y0) = (fx.floor(), fy.floor());
            let (tx, ty) = (fx - x0, fy - y0);
            let (i, j) = (x0 as isize, y0 as isize);
            let top = at(i, j) * (1.0 - tx) + at(i + 1, j) * tx;
            let bottom = at(i, j + 1) * (1.0 - tx) + at(i + 1, j + 1) * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// Nearest-neighbour version for 8-bit images.
pub fn apply_gray(img: &GrayImage, p: &AugmentParams) -> GrayImage {
    let (w, h) = (img.width(), img.height());
    let mut out = GrayImage::new(w, h).expect("same dimensions as a valid image");
    for y in 0..h {
        for x in 0..w {
            let (sx, sy) = p.source(x as f64 + 0.5, y as f64 + 0.5, w as f64, h as f64);
            out.set(x, y, img.get_or_zero(sx.floor() as i64, sy.floor() as i64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(side: usize) -> Vec<f64> {
        (0..side * side).map(|i| (i % side) as f64 + 0.1 * (i / side) as f64).collect()
    }

    #[test]
    fn disabled_config_is_identity() {
        let mut rng = SeededRng::new(3);
        assert_eq!(AugmentConfig::off().draw(&mut rng), AugmentParams::IDENTITY);
    }

    #[test]
    fn flips_are_exact_and_involutive() {
        let x = ramp(8);
        let h = AugmentParams {
            hflip: true,
            ..AugmentParams::IDENTITY
        };
        let f = apply_plane(&x, 8, &h);
        assert_eq!(f[0], x[7]);
        assert_eq!(apply_plane(&f, 8, &h), x);
    }

    #[test]
    fn draws_stay_in_range() {
        let cfg = AugmentConfig::full();
        let mut rng = SeededRng::new(9);
        for _ in 0..200 {
            let p = cfg.draw(&mut rng);
            assert!(p.angle_deg.abs() <= 5.0 && p.dx.abs() <= 0.02 && p.dy.abs() <= 0.02);
        }
    }

    #[test]
    fn symmetry_default_keeps_mirror_symmetry() {
        let cfg = AugmentConfig::for_task(gestalt_core::tasks::Task::GlobalSymmetry, false);
        let side = 16;
        let x: Vec<f64> = (0..side * side)
            .map(|i| {
                let (c, r) = (i % side, i / side);
                (c.min(side - 1 - c) * 3 + r) as f64
            })
            .collect();
        let mut rng = SeededRng::new(1);
        for _ in 0..50 {
            let y = apply_plane(&x, side, &cfg.draw(&mut rng));
            for r in 0..side {
                for c in 0..side / 2 {
                    assert!((y[r * side + c] - y[r * side + side - 1 - c]).abs() < 1e-12);
                }
            }
        }
    }
}
