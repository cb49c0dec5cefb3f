//! 8-connected component analysis over foreground (`> 0`) pixels.

use crate::image::GrayImage;
use crate::raster::Mask;

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Pixels in raster order.
    pub pixels: Vec<(u32, u32)>,
    /// Inclusive `(x_min, y_min, x_max, y_max)`.
    pub bbox: (u32, u32, u32, u32),
    /// Mean of pixel centres, `(x + 0.5, y + 0.5)`.
    pub centroid: (f64, f64),
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn bbox_width(&self) -> u32 {
        self.bbox.2 - self.bbox.0 + 1
    }

    pub fn bbox_height(&self) -> u32 {
        self.bbox.3 - self.bbox.1 + 1
    }

    /// Longer edge of the bounding box.
    pub fn extent(&self) -> u32 {
        self.bbox_width().max(self.bbox_height())
    }

    pub fn mask(&self) -> Mask {
        let (x0, y0, _, _) = self.bbox;
        let mut m = Mask::empty(x0 as i64, y0 as i64, self.bbox_width(), self.bbox_height());
        for &(x, y) in &self.pixels {
            m.set_local(x - x0, y - y0, true);
        }
        m
    }
}

/// Components sorted by area, largest first; ties keep raster order of their
/// first pixel.
pub fn connected_components(img: &GrayImage) -> Vec<Component> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut seen = vec![false; (w * h) as usize];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..(w * h) {
        if seen[start as usize] || img.pixels()[start as usize] == 0 {
            continue;
        }
        seen[start as usize] = true;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x as u32, y as u32));
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let j = (ny * w + nx) as usize;
                    if !seen[j] && img.pixels()[j] > 0 {
                        seen[j] = true;
                        stack.push(j as i64);
                    }
                }
            }
        }
        pixels.sort_by_key(|&(x, y)| (y, x));
        let n = pixels.len() as f64;
        let mut bbox = (u32::MAX, u32::MAX, 0, 0);
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(x, y) in &pixels {
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.min(y);
            bbox.2 = bbox.2.max(x);
            bbox.3 = bbox.3.max(y);
            sx += x as f64 + 0.5;
            sy += y as f64 + 0.5;
        }
        out.push(Component {
            pixels,
            bbox,
            centroid: (sx / n, sy / n),
        });
    }
    out.sort_by(|a, b| b.area().cmp(&a.area()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{rasterize, Point, ShapeInstance, ShapeKind};

    #[test]
    fn blank_has_no_components() {
        assert!(connected_components(&GrayImage::blank()).is_empty());
    }

    #[test]
    fn three_disjoint_discs() {
        let mut img = GrayImage::blank();
        for (i, x) in [40.0, 100.0, 160.0].into_iter().enumerate() {
            let s = ShapeInstance::new(ShapeKind::Ball, Point::new(x, 100.0), 20.0 + i as f64, 120);
            rasterize(&s, &mut img).unwrap();
        }
        let cc = connected_components(&img);
        assert_eq!(cc.len(), 3);
        assert!(cc[0].area() >= cc[1].area() && cc[1].area() >= cc[2].area());
    }

    #[test]
    fn squares_touching_at_a_shared_pixel_merge() {
        // Hand-checked 10x10 case: two 3x3 squares overlap in pixel (4,4).
        let mut img = GrayImage::new(10, 10).unwrap();
        for y in 2..5 {
            for x in 2..5 {
                img.set(x, y, 50);
            }
        }
        for y in 4..7 {
            for x in 4..7 {
                img.set(x, y, 90);
            }
        }
        let cc = connected_components(&img);
        assert_eq!(cc.len(), 1);
        assert_eq!(cc[0].area(), 17);
        assert_eq!(cc[0].bbox, (2, 2, 6, 6));
    }

    #[test]
    fn diagonal_neighbours_are_connected() {
        let mut img = GrayImage::new(4, 4).unwrap();
        img.set(0, 0, 1);
        img.set(1, 1, 1);
        img.set(3, 3, 1);
        let cc = connected_components(&img);
        assert_eq!(cc.len(), 2);
        assert_eq!(cc[0].area(), 2);
        assert_eq!(cc[0].centroid, (1.0, 1.0));
    }
}
