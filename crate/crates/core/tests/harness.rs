use std::fs;

use triadsat::fixture;
use triadsat::harness::{
    differential_run, replay_bundle, run_instances, ClauseCount, Instance, RunConfig,
};
use triadsat::{Formula, Mode, Outcome};

fn seed42(outdir: &std::path::Path) -> RunConfig {
    RunConfig {
        seed: 42,
        count: 100,
        n_min: 4,
        n_max: 6,
        clauses: ClauseCount::Density { min: 4.0, max: 4.0 },
        outdir: Some(outdir.to_path_buf()),
        ..RunConfig::default()
    }
}

#[test]
fn seeded_run_is_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ra = differential_run(&seed42(a.path())).unwrap();
    let rb = differential_run(&seed42(b.path())).unwrap();
    assert_eq!(ra.to_json(), rb.to_json());
    assert_eq!(ra.instances, 100);
    assert_eq!(ra.tallies.values().sum::<u64>(), 100);
    assert_eq!(ra.tally(Outcome::SoundnessViolation), 0);
    for id in &ra.counterexamples {
        let r = replay_bundle(&a.path().join(id)).unwrap();
        assert_eq!(r.recorded, r.replayed);
        assert!(r.identical);
    }
}

#[test]
fn low_density_bundles_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = RunConfig {
        seed: 7,
        count: 400,
        n_min: 8,
        n_max: 10,
        clauses: ClauseCount::Density { min: 1.0, max: 3.0 },
        outdir: Some(dir.path().to_path_buf()),
        ..RunConfig::default()
    };
    let report = differential_run(&config).unwrap();
    assert_eq!(report.tally(Outcome::SoundnessViolation), 0);
    let mut on_disk: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.sort();
    assert_eq!(on_disk, report.counterexamples);
    for id in &report.counterexamples {
        let r = replay_bundle(&dir.path().join(id)).unwrap();
        assert!(r.identical, "{id}");
        assert_eq!(r.recorded, r.replayed);
    }

    let robust_dir = tempfile::tempdir().unwrap();
    let robust = differential_run(&RunConfig {
        mode: Mode::Robust,
        outdir: Some(robust_dir.path().to_path_buf()),
        ..config
    })
    .unwrap();
    assert_eq!(robust.tally(Outcome::SoundnessViolation), 0);
}

#[test]
fn pinned_empty_formulas_audit_exactly() {
    let instances: Vec<Instance> = (4..=7)
        .map(|n| Instance {
            id: format!("empty-{n}"),
            spec: None,
            formula: Formula::empty(n),
        })
        .chain(std::iter::once(Instance {
            id: "example".into(),
            spec: None,
            formula: fixture::example_formula(),
        }))
        .collect();
    let config = RunConfig {
        count: instances.len(),
        pinned: instances.iter().map(|i| i.id.clone()).collect(),
        ..RunConfig::default()
    };
    let report = run_instances(&config, &instances).unwrap();
    assert_eq!(report.tally(Outcome::AgreeSat), 5);
    assert_eq!(report.audit.audited, 5);
    assert_eq!(report.audit.coincidence_pass, 5);
    assert!(report.counterexamples.is_empty());
}
