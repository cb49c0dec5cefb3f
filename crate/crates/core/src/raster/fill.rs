//! Scanline fill of closed rings sampled at pixel centres (no anti-aliasing).

use super::geometry::{Point, Rect};
use super::mask::Mask;

fn pixel_span(rings: &[Vec<Point>]) -> Option<(i64, i64, i64, i64)> {
    let bb = Rect::bounding(rings.iter().flatten().copied())?;
    Some((
        bb.x0.floor() as i64,
        bb.y0.floor() as i64,
        bb.x1.ceil() as i64,
        bb.y1.ceil() as i64,
    ))
}

/// Sorted x-coordinates where `ring` crosses the horizontal line `y = yc`.
fn crossings(ring: &[Point], yc: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = ring.len();
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        if (p.y <= yc) != (q.y <= yc) {
            let t = (yc - p.y) / (q.y - p.y);
            out.push(p.x + t * (q.x - p.x));
        }
    }
    out.sort_by(f64::total_cmp);
}

/// Union of the even-odd interiors of every ring.
pub fn fill_rings(rings: &[Vec<Point>]) -> Mask {
    fill_impl(rings, None)
}

/// As [`fill_rings`], but only the half left of `axis` (an integer pixel
/// boundary) is sampled and the right half is its exact reflection.
pub fn fill_rings_mirrored(rings: &[Vec<Point>], axis: f64) -> Mask {
    fill_impl(rings, Some(axis.round() as i64))
}

fn fill_impl(rings: &[Vec<Point>], axis: Option<i64>) -> Mask {
    let Some((mut x0, y0, mut x1, y1)) = pixel_span(rings) else {
        return Mask::empty(0, 0, 0, 0);
    };
    if let Some(a) = axis {
        let reach = (a - x0).max(x1 - a).max(0);
        x0 = a - reach;
        x1 = a + reach;
    }
    let w = (x1 - x0).max(0) as u32;
    let h = (y1 - y0).max(0) as u32;
    let mut mask = Mask::empty(x0, y0, w, h);
    let mut xs = Vec::new();
    for j in 0..h {
        let yc = (y0 + j as i64) as f64 + 0.5;
        for ring in rings {
            crossings(ring, yc, &mut xs);
            for pair in xs.chunks_exact(2) {
                let (a, b) = (pair[0], pair[1]);
                // pixel i is covered when a <= i + 0.5 < b
                let mut i_start = (a - 0.5).ceil() as i64;
                let mut i_end = (b - 0.5).ceil() as i64; // exclusive
                if let Some(ax) = axis {
                    i_end = i_end.min(ax);
                }
                i_start = i_start.max(x0);
                i_end = i_end.min(x1);
                for i in i_start..i_end {
                    let lx = (i - x0) as u32;
                    mask.set_local(lx, j, true);
                    if let Some(ax) = axis {
                        let mirror = 2 * ax - 1 - i;
                        mask.set_local((mirror - x0) as u32, j, true);
                    }
                }
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<Point> {
        vec![
            Point::new(x0, y0),
            Point::new(x0 + s, y0),
            Point::new(x0 + s, y0 + s),
            Point::new(x0, y0 + s),
        ]
    }

    #[test]
    fn integer_square_covers_exact_pixels() {
        let m = fill_rings(&[square(10.0, 10.0, 5.0)]);
        assert_eq!(m.count(), 25);
        assert_eq!(m.bbox(), Some((10, 10, 14, 14)));
    }

    #[test]
    fn union_of_overlapping_rings() {
        let m = fill_rings(&[square(0.0, 0.0, 4.0), square(2.0, 0.0, 4.0)]);
        assert_eq!(m.count(), 24);
    }

    #[test]
    fn mirrored_fill_matches_symmetric_square() {
        let m = fill_rings_mirrored(&[square(90.0, 10.0, 20.0)], 100.0);
        assert_eq!(m.count(), 400);
        let plain = fill_rings(&[square(90.0, 10.0, 20.0)]);
        assert_eq!(m.bbox(), plain.bbox());
    }
}
