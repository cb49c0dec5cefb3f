use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hold-out accuracy (percent) after training on `size` samples. `None`
/// marks a failed run, such as a diverged one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub accuracy: Option<f64>,
}

/// Run `train_eval` once per training size. It returns `Ok(None)` for a
/// failed point, which is recorded rather than dropped.
pub fn learning_curve(
    sizes: &[usize],
    mut train_eval: impl FnMut(usize) -> Result<Option<f64>>,
) -> Result<Vec<CurvePoint>> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameter("no training sizes given".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidParameter("training size 0".into()));
    }
    sizes
        .iter()
        .map(|&size| {
            Ok(CurvePoint {
                size,
                accuracy: train_eval(size)?,
            })
        })
        .collect()
}

/// `size,accuracy` table; failed points leave the accuracy empty.
pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut rdr = csv::Reader::from_path(path)?;
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_row_per_size() {
        let c = learning_curve(&[10, 20, 30], |n| Ok(Some(n as f64))).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c[2], CurvePoint { size: 30, accuracy: Some(30.0) });
    }

    #[test]
    fn zero_or_no_sizes_rejected() {
        assert!(learning_curve(&[0, 10], |_| Ok(Some(1.0))).is_err());
        assert!(learning_curve(&[], |_| Ok(Some(1.0))).is_err());
    }

    #[test]
    fn csv_round_trip_with_failed_point() {
        let dir = tempfile::tempdir().unwrap();
        let c: Vec<CurvePoint> = (1..=5)
            .map(|i| CurvePoint {
                size: i * 100,
                accuracy: if i == 3 { None } else { Some(50.0 + i as f64 * 0.125) },
            })
            .collect();
        let p = dir.path().join("c.csv");
        write_curve_csv(&p, &c).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 6);
        assert_eq!(read_curve_csv(&p).unwrap(), c);
    }
}
