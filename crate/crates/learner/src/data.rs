use gestalt_core::dataset::Manifest;
use gestalt_core::{GrayImage, Label};

use crate::error::Result;

/// Per-axis area weights: for each output cell, `(source index, overlap)`.
fn area_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let (lo, hi) = (o as f64 * scale, (o + 1) as f64 * scale);
            let mut w = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < src {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    w.push((i, overlap / scale));
                }
                i += 1;
            }
            w
        })
        .collect()
}

/// Area-average resample to `side x side`, scaled to `[0, 1]`.
pub fn downsample(img: &GrayImage, side: usize) -> Vec<f64> {
    let wx = area_weights(img.width() as usize, side);
    let wy = area_weights(img.height() as usize, side);
    let px = img.pixels();
    let w = img.width() as usize;
    let mut out = Vec::with_capacity(side * side);
    for ys in &wy {
        for xs in &wx {
            let mut acc = 0.0;
            for &(y, a) in ys {
                let row = &px[y * w..];
                for &(x, b) in xs {
                    acc += a * b * row[x] as f64;
                }
            }
            out.push(acc / 255.0);
        }
    }
    out
}

/// Preprocessed inputs with their labels and manifest paths.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub side: usize,
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    pub paths: Vec<String>,
}

impl Dataset {
    pub fn from_manifest(m: &Manifest, side: usize) -> Result<Dataset> {
        let mut d = Dataset {
            side,
            ..Dataset::default()
        };
        for r in &m.records {
            let img = GrayImage::load_png(&m.path_of(r))?;
            d.inputs.push(downsample(&img, side));
            d.labels.push(r.label);
            d.paths.push(r.path.clone());
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            side: self.side,
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            paths: indices.iter().map(|&i| self.paths[i].clone()).collect(),
        }
    }

    /// The first `n` samples of each class, in original order.
    pub fn balanced_prefix(&self, n_per_class: usize) -> Dataset {
        let mut taken = [0, 0];
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let c = self.labels[i].id() as usize;
                taken[c] += 1;
                taken[c] <= n_per_class
            })
            .collect();
        self.subset(&idx)
    }

    pub fn refs(&self) -> Vec<&[f64]> {
        self.inputs.iter().map(Vec::as_slice).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_each_output_cell() {
        for (src, dst) in [(200, 64), (200, 8), (64, 64), (10, 3)] {
            for w in area_weights(src, dst) {
                assert!((w.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = GrayImage::from_raw(200, 200, vec![255; 40000]).unwrap();
        assert!(downsample(&img, 64).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn mirror_symmetry_survives_downsampling() {
        let mut img = GrayImage::blank();
        for y in 30..120 {
            for x in 40..70 {
                img.set(x, y, 200);
            }
        }
        let img = img.mirror_left_onto_right();
        let d = downsample(&img, 64);
        for y in 0..64 {
            for x in 0..32 {
                assert!((d[y * 64 + x] - d[y * 64 + 63 - x]).abs() < 1e-12);
            }
        }
    }
}
