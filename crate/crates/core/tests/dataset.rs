use gestalt_core::dataset::{
    build_curriculum, emit_dataset, emit_deliberate, emit_faces, verify, DeliberateOp, EmitSpec, Manifest, Origin,
    VerifyOptions,
};
use gestalt_core::face::{synthetic_face, FacePair};
use gestalt_core::tasks::{Registry, Task};
use gestalt_core::{GrayImage, Label};

fn spec(task: Task, round: &str, count: usize, seed: u64) -> EmitSpec {
    EmitSpec {
        task,
        round: round.into(),
        count,
        master_seed: seed,
    }
}

#[test]
fn balanced_emission_with_layout() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Registry::builtin();
    let m = emit_dataset(&reg, &spec(Task::Counting, "s1", 10, 4), &dir.path().join("count/s1")).unwrap();
    assert_eq!(m.class_counts, [5, 5]);
    assert_eq!(m.records[3].path, "1/000003.png");
    let loaded = Manifest::open(&dir.path().join("count/s1")).unwrap();
    assert_eq!(loaded.records, m.records);
    for r in &loaded.records {
        let img = GrayImage::load_png(&loaded.path_of(r)).unwrap();
        assert_eq!((img.width(), img.height()), (200, 200));
    }
}

#[test]
fn re_emission_reproduces_checksums() {
    let reg = Registry::builtin();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let s = spec(Task::GlobalSymmetry, "A1", 12, 77);
    let ma = emit_dataset(&reg, &s, a.path()).unwrap();
    let mb = emit_dataset(&reg, &s, b.path()).unwrap();
    let sums = |m: &Manifest| m.records.iter().map(|r| r.sha256.clone()).collect::<Vec<_>>();
    assert_eq!(sums(&ma), sums(&mb));
    for r in &ma.records {
        assert_eq!(std::fs::read(ma.path_of(r)).unwrap(), std::fs::read(mb.path_of(r)).unwrap());
    }
    let other = emit_dataset(&reg, &spec(Task::GlobalSymmetry, "A1", 12, 78), b.path()).unwrap();
    assert_ne!(sums(&ma), sums(&other));
}

#[test]
fn curriculum_sizes_and_references() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Registry::builtin();
    let c = build_curriculum(&reg, dir.path(), 8, 6, 1).unwrap();
    assert_eq!(c.a1.class_counts, [4, 4]);
    assert_eq!(c.d1_a1.len(), 8);
    assert_eq!(c.a2.len(), 16);
    assert_eq!(c.d2_a2.len(), 16);
    assert_eq!(c.a3.len(), 32);
    assert_eq!(c.d3_a3.len(), 32);
    assert_eq!(c.d2_a2.class_counts, [8, 8]);
    assert_eq!(c.a3.parts, vec!["A2", "D2(A2)"]);

    // D1 reverses each source label.
    for r in &c.d1_a1.records {
        match &r.origin {
            Origin::Derived { source_label, .. } => assert_eq!(*source_label, r.label.flipped()),
            o => panic!("unexpected origin {o:?}"),
        }
    }
    // Unions reference, never copy.
    let a3 = Manifest::open(&dir.path().join("global-sym/A3")).unwrap();
    assert!(a3.records.iter().all(|r| r.path.starts_with("../")));
    let pngs = walk_pngs(&dir.path().join("global-sym/A3"));
    assert_eq!(pngs, 0);
    for m in [&a3, &c.d3_a3] {
        let rep = verify(&reg, m, VerifyOptions::default()).unwrap();
        assert!(rep.is_clean(), "{rep:?}");
        assert_eq!(rep.regenerated, m.len());
    }
}

fn walk_pngs(dir: &std::path::Path) -> usize {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| if p.is_dir() { walk_pngs(&p) } else { (p.extension() == Some("png".as_ref())) as usize })
        .sum()
}

#[test]
fn verify_reports_tampering_and_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Registry::builtin();
    let mut m = emit_dataset(&reg, &spec(Task::Counting, "s2", 6, 9), dir.path()).unwrap();
    assert!(verify(&reg, &m, VerifyOptions::default()).unwrap().is_clean());

    // Overwrite one image with a blank canvas.
    GrayImage::blank().save_png(&m.path_of(&m.records[0])).unwrap();
    let rep = verify(&reg, &m, VerifyOptions::default()).unwrap();
    assert_eq!(rep.checksum_mismatches, vec![m.records[0].path.clone()]);
    assert_eq!(rep.regeneration_mismatches, vec![m.records[0].path.clone()]);
    assert_eq!(rep.disagreements.len(), 1);

    // Wrong label in the manifest: oracle disagreement, counts re-balanced.
    let dir2 = tempfile::tempdir().unwrap();
    m = emit_dataset(&reg, &spec(Task::Counting, "s2", 6, 9), dir2.path()).unwrap();
    m.records[1].label = Label::Holds;
    m.class_counts = [4, 2];
    let rep = verify(
        &reg,
        &m,
        VerifyOptions {
            regenerate: false,
            oracle: true,
        },
    )
    .unwrap();
    assert_eq!(rep.disagreements.len(), 1);
    assert_eq!(rep.disagreements[0].oracle, Label::Violated);
    assert!(rep.agreement() < 100.0);

    std::fs::remove_file(m.path_of(&m.records[2])).unwrap();
    let rep = verify(&reg, &m, VerifyOptions::default()).unwrap();
    assert_eq!(rep.unreadable.len(), 1);
}

#[test]
fn deliberate_ops_only_apply_to_global_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Registry::builtin();
    let m = emit_dataset(&reg, &spec(Task::Counting, "s1", 2, 1), &dir.path().join("a")).unwrap();
    assert!(emit_deliberate(DeliberateOp::D1, &m, &dir.path().join("b"), 0, None).is_err());
}

#[test]
fn face_sets_are_imbalanced_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let mut pairs = Vec::new();
    let names = ["a", "b", "c"];
    for (i, n) in names.iter().enumerate() {
        let (img, lm) = synthetic_face(160, 160, i as f64 * 3.0, i as u64).unwrap();
        img.save_png(&dir.path().join(format!("{n}.png"))).unwrap();
        std::fs::write(dir.path().join(format!("{n}.pts")), lm.to_pts()).unwrap();
    }
    for (a, b) in [("a", "b"), ("b", "c"), ("c", "a"), ("a", "c")] {
        pairs.push(FacePair {
            a: dir.path().join(format!("{a}.png")),
            b: dir.path().join(format!("{b}.png")),
            landmarks_a: dir.path().join(format!("{a}.pts")),
            landmarks_b: dir.path().join(format!("{b}.pts")),
        });
    }
    let m = emit_faces(&pairs, 4.0, &dir.path().join("face/fused")).unwrap();
    assert_eq!(m.class_counts, [3, 4]);
    let rep = verify(&Registry::builtin(), &m, VerifyOptions::default()).unwrap();
    assert!(rep.is_clean());
    assert_eq!((rep.regenerated, rep.judged), (0, 0));
}
