use std::path::PathBuf;

use perfchar_core::ingest;
use perfchar_core::scalefit::{
    self, CriticalDefinition, CriticalPoint, MpiShareFit, ScalingModel, SharePoint,
    TimeDecomposition, Weighting,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn amdahl(a: f64, b: f64, p: f64) -> f64 {
    1.0 / ((1.0 - a) + a / p) + b
}

fn gustafson(a: f64, p: f64) -> f64 {
    (1.0 - a) + a * p
}

/// `(model, a, b)` rows of the projection parameter table.
fn parameter_rows() -> Vec<(String, f64, f64)> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(fixtures().join("scaling/projection-parameters.csv"))
        .unwrap();
    rdr.records()
        .map(|r| {
            let r = r.unwrap();
            (
                r[3].to_string(),
                r[4].parse().unwrap(),
                r[6].parse().unwrap_or(0.0),
            )
        })
        .collect()
}

#[test]
fn noiseless_recovery_of_every_row() {
    let ps: Vec<f64> = [1, 2, 4, 8, 16, 32].map(f64::from).to_vec();
    for (model, a, b) in parameter_rows() {
        if model == "amdahl" {
            let pts: Vec<(f64, f64)> = ps.iter().map(|&p| (p, amdahl(a, b, p))).collect();
            let f = scalefit::fit_amdahl(&pts).unwrap();
            assert!(
                (f.a - a).abs() < 1e-6 && (f.b - b).abs() < 1e-6,
                "({a}, {b}) -> {f:?}"
            );
        } else {
            let pts: Vec<(f64, f64)> = ps.iter().map(|&p| (p, gustafson(a, p))).collect();
            let f = scalefit::fit_gustafson(&pts).unwrap();
            assert!((f.a - a).abs() < 1e-6, "{a} -> {f:?}");
        }
    }
}

#[test]
fn noisy_recovery_of_first_row() {
    // 6-point grid example: (0.96, -0.685) with 1% multiplicative noise
    let (a, b) = (0.960, -0.685);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let (mut hits_a, mut hits_b) = (0, 0);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&p| (p, amdahl(a, b, p) * (1.0 + noise.sample(&mut rng))))
            .collect();
        let f = scalefit::fit_amdahl(&pts).unwrap();
        hits_a += usize::from((f.a - a).abs() <= 2.0 * f.sigma_a);
        hits_b += usize::from((f.b - b).abs() <= 2.0 * f.sigma_b);
    }
    assert!(
        hits_a >= 90 && hits_b >= 90,
        "a {hits_a}/100, b {hits_b}/100"
    );
}

#[test]
fn fits_of_shipped_speedups_are_near_generators() {
    let text = std::fs::read_to_string(fixtures().join("scaling/strong-speedups.csv")).unwrap();
    let recs = ingest::parse_speedups(text.as_bytes()).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(fixtures().join("scaling/projection-parameters.csv"))
        .unwrap();
    for row in rdr
        .records()
        .map(Result::unwrap)
        .filter(|r| &r[3] == "amdahl")
    {
        let pts: Vec<(f64, f64)> = recs
            .iter()
            .filter(|s| {
                (s.platform.as_str(), s.app.as_str(), s.compiler.as_str())
                    == (&row[0], &row[1], &row[2])
            })
            .map(|s| (s.p, s.speedup))
            .collect();
        assert_eq!(pts.len(), 6);
        let f = scalefit::fit_amdahl(&pts).unwrap();
        let a: f64 = row[4].parse().unwrap();
        assert!((f.a - a).abs() < 0.02, "{row:?}: {f:?}");
    }
}

#[test]
fn underdetermined_and_bad_inputs() {
    let two = [(1.0, 1.0), (2.0, 1.9)];
    assert_eq!(
        scalefit::fit_amdahl(&two).unwrap_err().kind(),
        "underdetermined"
    );
    let repeated = [(2.0, 1.9), (2.0, 1.9), (2.0, 1.8)];
    assert_eq!(
        scalefit::fit_amdahl(&repeated).unwrap_err().kind(),
        "underdetermined"
    );
    assert_eq!(
        scalefit::fit_gustafson(&[(1.0, 1.0)]).unwrap_err().kind(),
        "underdetermined"
    );
    assert_eq!(
        scalefit::fit_amdahl(&[(0.5, 1.0), (2.0, 1.9), (4.0, 3.0)])
            .unwrap_err()
            .kind(),
        "invalid-parameter"
    );
}

#[test]
fn projection_of_perfect_scaling() {
    let pts = scalefit::project(
        &ScalingModel::Amdahl { a: 1.0, b: 0.0 },
        &scalefit::power_of_two_grid(4096.0),
    )
    .unwrap();
    assert_eq!(pts.len(), 13);
    assert!(pts.iter().all(|p| p.efficiency == 1.0));
}

/// Decomposition with the given percent shares and total time.
fn decomposition(lb: f64, com: f64, total: f64) -> TimeDecomposition {
    let cal = 100.0 - lb - com;
    TimeDecomposition::new(cal * total / 100.0, com * total / 100.0, lb * total / 100.0).unwrap()
}

#[test]
fn mpi_share_recovery_and_critical_points() {
    let (a, b, c) = (1.26, 3.86, 19.59);
    let pts: Vec<SharePoint> = (1..=32)
        .map(|p| {
            let p = f64::from(p);
            SharePoint::from_decomposition(p, &decomposition(a * p + b, c, 120.0 / p.sqrt()))
        })
        .collect();
    let f = scalefit::fit_mpi_shares(&pts).unwrap();
    assert!((f.a() - a).abs() < 1e-9 && (f.b() - b).abs() < 1e-9 && (f.c() - c).abs() < 1e-9);
    let lb = scalefit::critical_units(&f, CriticalDefinition::LbOnly, 100.0);
    let both = scalefit::critical_units(&f, CriticalDefinition::LbPlusCom, 100.0);
    let units = |cp: CriticalPoint| match cp {
        CriticalPoint::At { units } => units,
        CriticalPoint::NoCriticalPoint => panic!("expected a critical point"),
    };
    assert!((units(lb) - 76.3).abs() < 0.1);
    assert!((units(both) - 60.7).abs() < 0.1);
}

#[test]
fn shipped_graph500_decompositions_reproduce_parameters() {
    let text = std::fs::read_to_string(fixtures().join("scaling/graph500-mpi.csv")).unwrap();
    let recs = ingest::parse_mpi_decompositions(text.as_bytes()).unwrap();
    for (platform, a, b, c) in [
        ("dibona-tx2", 1.26, 3.86, 19.59),
        ("marenostrum4", 0.31, 3.29, 26.77),
    ] {
        let pts: Vec<SharePoint> = recs
            .iter()
            .filter(|r| r.platform == platform)
            .map(|r| SharePoint::from_decomposition(r.p, &r.times))
            .collect();
        let f = scalefit::fit_mpi_shares(&pts).unwrap();
        assert!((f.a() - a).abs() < 1e-6, "{platform}: {f:?}");
        assert!((f.b() - b).abs() < 1e-6);
        assert!((f.c() - c).abs() < 1e-6);
    }
}

#[test]
fn negative_slope_has_no_critical_point() {
    let f = MpiShareFit::from_percent(-0.5, 40.0, 10.0).unwrap();
    assert_eq!(
        scalefit::critical_units(&f, CriticalDefinition::LbOnly, 100.0),
        CriticalPoint::NoCriticalPoint
    );
}

#[test]
fn lbc_weak_sizing() {
    let big = scalefit::weak_scaling_size([256, 256, 32], [2, 2, 16]).unwrap();
    let small = scalefit::weak_scaling_size([256, 256, 32], [2, 2, 12]).unwrap();
    assert_eq!(big.global, [512, 512, 512]);
    assert_eq!(small.global, [512, 512, 384]);
    // oracle: 41 doubles per cell
    assert_eq!(big.memory_bytes, 512 * 512 * 512 * 41 * 8);
    assert!((big.memory_gib() - 41.0).abs() / 41.0 < 0.02);
    assert!((small.memory_gib() - 31.0).abs() / 31.0 < 0.02);
}

proptest! {
    #[test]
    fn share_sum_identity(cal in 0.0f64..1e4, com in 0.0f64..1e4, lb in 0.0f64..1e4) {
        prop_assume!(cal + com + lb > 1e-6);
        let t = TimeDecomposition::new(cal, com, lb).unwrap();
        let (x, y, z) = t.shares();
        prop_assert!((x + y + z - 1.0).abs() < 1e-9);
        prop_assert!((t.mpi() - (com + lb)).abs() <= 1e-9 * t.total().max(1.0));
    }

    #[test]
    fn noiseless_round_trip(a in 0.5f64..0.999, b in -1.5f64..0.5) {
        let pts: Vec<(f64, f64)> = (1..=16).map(|p| (f64::from(p), amdahl(a, b, f64::from(p)))).collect();
        for w in [Weighting::Relative, Weighting::Uniform] {
            prop_assume!(pts.iter().all(|&(_, s)| s != 0.0));
            let f = scalefit::fit_amdahl_weighted(&pts, w).unwrap();
            prop_assert!((f.a - a).abs() < 1e-6 && (f.b - b).abs() < 1e-6, "{:?}", f);
        }
    }
}
