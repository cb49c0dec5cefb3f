//! Prints how well the type oracle's descriptor separates the shape kinds.

use gestalt_core::oracles::{describe, iou, same_kind, TypeOracleConfig};
use gestalt_core::raster::{Point, ShapeInstance, ShapeKind};

fn main() {
    let cfg = TypeOracleConfig::default();
    let kinds = [
        ShapeKind::Triangle,
        ShapeKind::Square,
        ShapeKind::Ball,
        ShapeKind::Hexagram,
        ShapeKind::FlowerF4,
        ShapeKind::FlowerF2,
    ];
    let descs: Vec<Vec<_>> = kinds
        .iter()
        .map(|k| {
            (20..=50)
                .map(|s| describe(&ShapeInstance::new(k.clone(), Point::new(100.0, 100.0), s as f64, 1).mask(), 32))
                .collect()
        })
        .collect();
    for (ai, a) in kinds.iter().enumerate() {
        let mut split = 0;
        let mut min_iou: f64 = 1.0;
        for p in &descs[ai] {
            for q in &descs[ai] {
                split += !same_kind(p, q, &cfg) as usize;
                min_iou = min_iou.min(iou(&p.signature, &q.signature));
            }
        }
        let merged: Vec<&str> = kinds
            .iter()
            .enumerate()
            .filter(|&(bi, _)| bi != ai)
            .filter(|&(bi, _)| descs[ai].iter().any(|p| descs[bi].iter().any(|q| same_kind(p, q, &cfg))))
            .map(|(_, b)| b.name())
            .collect();
        println!("{:>9}: split pairs {split:4}, min same-kind IoU {min_iou:.3}, merges with {merged:?}", a.name());
    }
}
