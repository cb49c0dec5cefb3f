//! Generates `n` samples per class for every registered round and reports
//! oracle agreement and timing.

use std::time::Instant;

use gestalt_core::rng::split_seed;
use gestalt_core::tasks::Registry;
use gestalt_core::Label;

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100);
    let reg = Registry::builtin();
    let total = Instant::now();
    for (task, round) in reg.canonical_rounds() {
        let g = reg.get(task, round).unwrap();
        let t = Instant::now();
        let mut agree = 0;
        let mut errors = 0;
        for label in Label::BOTH {
            for i in 0..n {
                let seed = split_seed(7, i * 2 + label.id() as u64);
                match reg.sample(task, round, seed, label) {
                    Ok(s) => match g.judge(&s.image) {
                        Ok(v) if v.label == label => agree += 1,
                        Ok(_) => {}
                        Err(_) => errors += 1,
                    },
                    Err(e) => {
                        errors += 1;
                        eprintln!("{task}/{round} seed {seed}: {e}");
                    }
                }
            }
        }
        println!("{task}/{round}: {agree}/{} agree, {errors} errors, {:.2}s", 2 * n, t.elapsed().as_secs_f64());
    }
    println!("total {:.1}s", total.elapsed().as_secs_f64());
}
