//! On-disk datasets: emission, manifests, curriculum unions, verification,
//! metrics and learning-curve tables.
//!
//! A set lives in `<root>/<task>/<round>/` with images at
//! `<class>/<index>.png` and a pretty-printed `manifest.json` beside them.

mod curve;
mod emit;
mod manifest;
mod metrics;
mod verify;

pub use curve::{learning_curve, read_curve_csv, write_curve_csv, CurvePoint};
pub use emit::{
    build_curriculum, emit_dataset, emit_deliberate, emit_faces, label_for, regenerate_record, Curriculum,
    DeliberateOp, EmitSpec,
};
pub use manifest::{compose, dir_name, set_dir, Manifest, Origin, Record, GENERATOR_VERSION, MANIFEST_FILE};
pub use metrics::{
    evaluate, read_predictions, read_report_csv, write_predictions, write_report_csv, MetricsReport,
};
pub use verify::{verify, Disagreement, VerifyOptions, VerifyReport};
