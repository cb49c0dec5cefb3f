//! Statistical versus deliberate accuracy of the classifier.
//!
//! `cargo run --release -p gestalt-cli --example gap -- <global|count> [per-class] [epochs] [seeds...]`
//!
//! global: train on A1, test on fresh C1 and on D1 of the training set.
//! count: train on s1 (sizes 20-30), test on fresh s1 and on sizes 30-40.

use std::time::Instant;

use gestalt_core::dataset::{emit_dataset, emit_deliberate, DeliberateOp, EmitSpec};
use gestalt_core::rng::split_seed;
use gestalt_core::tasks::{Registry, Task};
use gestalt_learner::{evaluate, train, AugmentConfig, Dataset, ModelConfig, TrainConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let which = args.first().map(String::as_str).unwrap_or("global");
    let per_class: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(70);
    let seeds: Vec<u64> = args.iter().skip(3).filter_map(|s| s.parse().ok()).collect();
    let seeds = if seeds.is_empty() { vec![0, 1, 2] } else { seeds };
    let (task, train_round, test_round) = match which {
        "global" => (Task::GlobalSymmetry, "A1", "C1"),
        "count" => (Task::Counting, "s1", "s1-deliberate-2"),
        other => panic!("unknown experiment {other}"),
    };
    let reg = Registry::builtin();
    let side = ModelConfig::default().input_side;
    for seed in seeds {
        let dir = tempfile::tempdir().unwrap();
        let emit = |round: &str, count: usize, k: u64, name: &str| {
            let spec = EmitSpec {
                task,
                round: round.into(),
                count,
                master_seed: split_seed(seed, k),
            };
            emit_dataset(&reg, &spec, &dir.path().join(name)).unwrap()
        };
        let t0 = Instant::now();
        let tr_m = emit(train_round, 2 * per_class, 0, "train");
        let val = Dataset::from_manifest(&emit(train_round, 400, 1, "val"), side).unwrap();
        let (stat, deli) = if task == Task::GlobalSymmetry {
            let d1 = emit_deliberate(DeliberateOp::D1, &tr_m, &dir.path().join("d1"), split_seed(seed, 3), None).unwrap();
            (emit(test_round, 2000, 2, "c1"), d1)
        } else {
            (emit(train_round, 2000, 2, "stat"), emit(test_round, 2000, 3, "deli"))
        };
        let tr = Dataset::from_manifest(&tr_m, side).unwrap();
        let stat = Dataset::from_manifest(&stat, side).unwrap();
        let deli = Dataset::from_manifest(&deli, side).unwrap();
        eprintln!("seed {seed}: data ready in {:.1}s", t0.elapsed().as_secs_f64());
        let tc = TrainConfig {
            epochs,
            augment: AugmentConfig::for_task(task, false),
            seed,
            ..TrainConfig::default()
        };
        let model = ModelConfig {
            seed,
            ..ModelConfig::default()
        };
        let t = train(&model, &tr, &val, &tc).unwrap();
        for e in &t.history.epochs {
            eprintln!(
                "  epoch {:>3} train loss {:.4} err {:5.2}% val err {:5.2}%",
                e.epoch, e.train_loss, e.train_error, e.val_error
            );
        }
        let s = evaluate(&t.model, &stat).unwrap();
        let d = evaluate(&t.model, &deli).unwrap();
        println!(
            "{which} seed {seed}: selected epoch {} statistical {:.2}% deliberate {:.2}% gap {:.2} ({:.0}s)",
            t.history.selected_epoch,
            s.accuracy,
            d.accuracy,
            s.accuracy - d.accuracy,
            t0.elapsed().as_secs_f64()
        );
    }
}
