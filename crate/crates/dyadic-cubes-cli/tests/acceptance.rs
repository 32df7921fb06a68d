//! Acceptance suite: one test per release criterion, each printing a
//! single `ACCEPTANCE <n> <name>: PASS ...` line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Random inputs are generated from fixed seeds so every run checks the
//! same instances; golden files are regenerated by setting `REGEN_GOLDEN=1`.

use dyadic_cubes::json::{certificate_to_json, finalize_document};
use dyadic_cubes::plumpness::{DPlumpParams, PlumpParams};
use dyadic_cubes::{
    build_cube_system, build_order, build_plain_points, certify_cube_candidate, check_dplump,
    check_plump, dplump_to_plump, plump_to_dplump, verify_all_cubes_plump, verify_cube_system,
    FiniteMetricSpace, NetParams, SubsetMask,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

const CLOUD_SEED: u64 = 0x1ce;

fn dedup_cloud(raw: impl Iterator<Item = (f64, f64)>) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    raw.filter(|(x, y)| seen.insert((x.to_bits(), y.to_bits())))
        .map(|(x, y)| vec![x, y])
        .collect()
}

/// The shared corpus: 100 clouds, n in [16, 200], uniform in the unit square.
fn clouds100() -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha20Rng::seed_from_u64(CLOUD_SEED);
    (0..100)
        .map(|_| {
            let n = rng.gen_range(16..=200);
            dedup_cloud((0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())))
        })
        .collect()
}

fn build(space: &FiniteMetricSpace) -> dyadic_cubes::CubeSystem {
    let params = NetParams::with_default_range(space, 1.0 / 16.0, 1.0, 1.0).unwrap();
    let points = build_plain_points(space, &params).unwrap();
    let order = build_order(space, &points).unwrap();
    build_cube_system(space, &points, &order).unwrap()
}

fn grid16() -> FiniteMetricSpace {
    let pts: Vec<Vec<f64>> = (0..16).map(|i| vec![i as f64]).collect();
    FiniteMetricSpace::from_points(&pts).unwrap()
}

#[test]
fn acceptance_1_cube_axioms() {
    let start = Instant::now();
    let mut total_cubes = 0usize;
    for pts in clouds100() {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let cubes = build(&s);
        let report = verify_cube_system(&s, &cubes);
        assert_eq!(report.violations, vec![], "violations on an {}-point cloud", s.n());
        assert!(report.exhaustive);
        total_cubes += cubes.levels.iter().map(|l| l.cubes.len()).sum::<usize>();
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "cube-axiom suite took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 cube-axioms: PASS (100 systems, {total_cubes} cubes, 0 violations, {:.2}s)",
        elapsed.as_secs_f64()
    );
}

#[test]
fn acceptance_2_forward_plumpness() {
    let start = Instant::now();
    let mut total = 0usize;
    for pts in clouds100() {
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let cubes = build(&s);
        let report = verify_all_cubes_plump(&s, &cubes);
        assert!(report.all_certified, "uncertified cube on an {}-point cloud", s.n());
        for entry in &report.entries {
            assert_eq!(entry.params.dplump.inner, cubes.params.inner);
            assert_eq!(entry.params.dplump.outer, cubes.params.inner + cubes.params.outer);
            assert_eq!(entry.params.dplump.m, entry.k);
        }
        total += report.entries.len();
    }
    println!(
        "ACCEPTANCE 2 forward-plumpness: PASS ({total} cubes certified both sides, {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn acceptance_3_converse_fixture_with_golden_cert() {
    let s = grid16();
    let e = SubsetMask::from_indices(16, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
    let params = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
    let cert = certify_cube_candidate(&s, &e, &params, None).unwrap();
    assert!(cert.accepted);

    let cubes = cert.cubes.as_ref().unwrap();
    assert_eq!(cubes.params.inner, 2.0);
    assert_eq!(cubes.params.outer, 16.0);
    let (k, alpha) = cert.cube.unwrap();
    assert_eq!((k, alpha), (0, 0));
    assert_eq!(cubes.level(0).unwrap().cubes[0].members, e);

    let text = finalize_document(certificate_to_json(&cert));
    let path = golden_path("grid16_cert.json");
    if std::env::var("REGEN_GOLDEN").is_ok() {
        std::fs::write(&path, &text).unwrap();
    }
    let stored = std::fs::read_to_string(&path).expect("golden file present; REGEN_GOLDEN=1 writes it");
    assert_eq!(text, stored, "certificate differs from the golden file");
    println!("ACCEPTANCE 3 converse-fixture: PASS (accepted, c1=2, C1=16, cube = E, cert matches golden)");
}

/// One plumpness instance checked from scratch, no shared code with the
/// library's witness search.
fn plump_at_radius(s: &FiniteMetricSpace, e: &SubsetMask, r: f64, b: f64) -> bool {
    e.iter().all(|y| {
        (0..s.n()).filter(|&z| e.contains(z) && s.dist(y, z) < r).any(|z| {
            (0..s.n()).all(|p| s.dist(z, p) >= b * r || (e.contains(p) && s.dist(p, y) < r))
        })
    })
}

#[test]
fn acceptance_4_rejection_soundness() {
    let s = grid16();
    let evens = SubsetMask::from_indices(16, &[0, 2, 4, 6, 8, 10, 12, 14]).unwrap();

    let params = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 6.0, outer: 8.0 };
    let verdict = check_dplump(&s, &evens, &params).unwrap();
    assert!(!verdict.certified);
    let ce = verdict.counterexample.unwrap();
    assert_eq!((ce.y, ce.scale), (0, 0));
    // Re-run the failed instance directly: no z in B(0, 8) keeps B(z, 6)
    // inside B(0, 8) and the evens.
    let failed_again = !(0..16)
        .filter(|&z| evens.contains(z) && s.dist(0, z) < 8.0)
        .any(|z| (0..16).all(|p| s.dist(z, p) >= 6.0 || (evens.contains(p) && s.dist(p, 0) < 8.0)));
    assert!(failed_again);

    // The full pipeline rejects the evens too, at the plumpness stage once
    // the constraints admit the subset's diameter.
    let wide = DPlumpParams { delta: 1.0 / 16.0, m: 0, inner: 12.0, outer: 16.0 };
    let cert = certify_cube_candidate(&s, &evens, &wide, None).unwrap();
    assert!(!cert.accepted);
    let pipeline_ce = cert.subset_plump.as_ref().unwrap().counterexample.as_ref().unwrap();
    assert_eq!((pipeline_ce.y, pipeline_ce.scale), (0, 0));

    let pair = SubsetMask::from_indices(16, &[0, 15]).unwrap();
    let verdict = check_plump(&s, &pair, &PlumpParams { r_max: 8.0, b: 0.5 }).unwrap();
    assert!(!verdict.certified);
    let ce = verdict.counterexample.unwrap();
    assert_eq!(ce.scale, 3.0);
    assert!(!plump_at_radius(&s, &pair, ce.scale, 0.5));
    println!(
        "ACCEPTANCE 4 rejection-soundness: PASS (evens fail at (y=0, k=0), pair fails at r={}, both reconfirmed)",
        ce.scale
    );
}

fn random_subset(rng: &mut ChaCha20Rng, n: usize) -> SubsetMask {
    loop {
        let mut m = SubsetMask::empty(n);
        for i in 0..n {
            if rng.gen::<bool>() {
                m.insert(i);
            }
        }
        if !m.is_empty() {
            return m;
        }
    }
}

#[test]
fn acceptance_5_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(CLOUD_SEED + 5);
    let mut agreements = 0;
    while agreements < 50 {
        let n = rng.gen_range(4..=64);
        let pts = dedup_cloud((0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())));
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let e = random_subset(&mut rng, s.n());
        let params = PlumpParams { r_max: rng.gen_range(0.1..2.2), b: rng.gen_range(0.05..0.9) };
        let exact = check_plump(&s, &e, &params).unwrap().certified;
        let dense = (1..=1000)
            .all(|i| plump_at_radius(&s, &e, params.r_max * i as f64 / 1000.0, params.b));
        assert_eq!(exact, dense, "disagreement at instance {agreements}");
        agreements += 1;
    }
    println!(
        "ACCEPTANCE 5 oracle-equivalence: PASS (50/50 instances agree with the 1000-radius oracle, {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance_6_scale_transport() {
    let start = Instant::now();
    let deltas = [0.5, 0.25, 1.0 / 16.0];
    let mut rng = ChaCha20Rng::seed_from_u64(CLOUD_SEED + 6);

    let mut forward = 0;
    let mut attempts = 0;
    while forward < 50 {
        attempts += 1;
        assert!(attempts < 10_000, "certified instances should not be this rare");
        let n = rng.gen_range(4..=40);
        let pts = dedup_cloud((0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())));
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let e = random_subset(&mut rng, s.n());
        let params = PlumpParams { r_max: rng.gen_range(0.1..2.0), b: rng.gen_range(0.02..0.5) };
        if !check_plump(&s, &e, &params).unwrap().certified {
            continue;
        }
        let delta = deltas[forward % deltas.len()];
        let ladder = plump_to_dplump(&params, delta).unwrap();
        assert!(
            check_dplump(&s, &e, &ladder).unwrap().certified,
            "transported ladder params failed at instance {forward}"
        );
        forward += 1;
    }

    let mut backward = 0;
    let mut attempts = 0;
    while backward < 50 {
        attempts += 1;
        assert!(attempts < 10_000, "certified instances should not be this rare");
        let n = rng.gen_range(4..=40);
        let pts = dedup_cloud((0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())));
        let s = FiniteMetricSpace::from_points(&pts).unwrap();
        let e = random_subset(&mut rng, s.n());
        let delta = deltas[backward % deltas.len()];
        let outer = rng.gen_range(0.5..2.0);
        let ladder = DPlumpParams { delta, m: 0, inner: outer * rng.gen_range(0.02..0.5), outer };
        if !check_dplump(&s, &e, &ladder).unwrap().certified {
            continue;
        }
        let radial = dplump_to_plump(&ladder);
        assert!(
            check_plump(&s, &e, &radial).unwrap().certified,
            "transported radial params failed at instance {backward}"
        );
        backward += 1;
    }
    println!(
        "ACCEPTANCE 6 scale-transport: PASS (50 forward + 50 backward transports certified, {:.2}s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance_7_cli_determinism() {
    let start = Instant::now();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let grid = fixtures.join("grid16.csv").display().to_string();
    let line4 = fixtures.join("line4.json").display().to_string();
    let bad = fixtures.join("bad_triangle.json").display().to_string();
    let e = fixtures.join("subset_e.json").display().to_string();
    let evens = fixtures.join("subset_evens.json").display().to_string();

    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys.json");
    let built = std::process::Command::new(env!("CARGO_BIN_EXE_dyadic-cubes"))
        .args(["build-system", &grid, "--delta", "0.0625", "--out", sys.to_str().unwrap()])
        .env_remove("DYADIC_THREADS")
        .output()
        .unwrap();
    assert!(built.status.success());
    let sys = sys.to_str().unwrap();

    let invocations: Vec<Vec<&str>> = vec![
        vec!["validate", &grid],
        vec!["validate", &line4],
        vec!["validate", &bad],
        vec!["doubling", &grid],
        vec!["plump-check", &grid, "--subset", &e, "--delta", "0.0625", "--b0", "6", "--B0", "8"],
        vec!["plump-check", &grid, "--subset", &evens, "--delta", "0.0625", "--b0", "6", "--B0", "8"],
        vec!["plump-check", &grid, "--subset", &e, "--R", "8", "--b", "0.25"],
        vec!["build-system", &grid, "--delta", "0.0625"],
        vec!["build-system", &line4, "--delta", "0.0625", "--c0", "0.5"],
        vec!["certify-cube", &grid, "--subset", &e, "--delta", "0.0625", "--b0", "6", "--B0", "8"],
        vec!["certify-cube", &grid, "--subset", &e, "--auto"],
        vec!["certify-cube", &grid, "--subset", &evens, "--auto"],
        vec!["certify-cube", &grid, "--subset", &e, "--delta", "0.0625", "--b0", "6", "--B0", "8", "--kmax", "0"],
        vec!["verify-system", &grid, sys],
    ];
    for args in &invocations {
        let run = |threads: &str| {
            std::process::Command::new(env!("CARGO_BIN_EXE_dyadic-cubes"))
                .args(args)
                .env("DYADIC_THREADS", threads)
                .output()
                .unwrap()
        };
        let (a, b) = (run("1"), run("4"));
        assert_eq!(a.status.code(), b.status.code(), "exit codes differ for {args:?}");
        assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
        assert_eq!(a.stderr, b.stderr, "stderr differs for {args:?}");
    }
    println!(
        "ACCEPTANCE 7 determinism: PASS ({} command pairs byte-identical across runs and thread counts, {:.2}s)",
        invocations.len(),
        start.elapsed().as_secs_f64()
    );
}
