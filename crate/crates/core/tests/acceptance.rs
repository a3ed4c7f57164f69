//! End-to-end acceptance checks. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stderr so the verdicts show up even when output is captured.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coherence_lab::bell::{self, deterministic_strategies, presets};
use coherence_lab::detection::{self, DetectorConfig, PoissonDetector, Source, ThresholdDetector};
use coherence_lab::experiment::lhv_sweep;
use coherence_lab::fields::ClassicalFieldModel;
use coherence_lab::hilbert::{commutator, ComplexMatrix};
use coherence_lab::stats::{chsh_from_counts, grangier_test, G2Estimate};
use coherence_lab::{BellScenario, StateVector};

const TRIALS: u64 = 1_000_000;

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {verdict}  {detail}");
}

fn check(n: u32, pass: bool, detail: String) {
    report(n, pass, &detail);
    assert!(pass, "criterion {n} failed: {detail}");
}

/// `𝓑² − (I − ¼[A1,A2][B1,B2])`, built from raw matrix products.
fn landau_defect(s: &BellScenario) -> f64 {
    let (a1, a2, b1, b2) = (s.a1.matrix(), s.a2.matrix(), s.b1.matrix(), s.b2.matrix());
    let bell = (&(a1 * &(b1 + b2)) + &(a2 * &(b1 - b2))).scale_real(0.5);
    let ca = &(a1 * a2) - &(a2 * a1);
    let cb = &(b1 * b2) - &(b2 * b1);
    let rhs = &ComplexMatrix::identity(s.dim()) - &(&ca * &cb).scale_real(0.25);
    (&bell * &bell).max_abs_diff(&rhs).unwrap()
}

#[test]
fn criterion_1_landau_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_lib = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..10_000 {
        let s: BellScenario = presets::random_local_dichotomous(2, 2, &mut rng);
        worst_lib = worst_lib.max(bell::landau_residual(&s).unwrap());
        worst_oracle = worst_oracle.max(landau_defect(&s));
    }
    let elapsed = start.elapsed();
    check(
        1,
        worst_lib < 1e-10 && worst_oracle < 1e-10 && elapsed < Duration::from_secs(30),
        format!("max residual {worst_lib:.2e} (oracle {worst_oracle:.2e}) over 10^4 scenarios in {elapsed:.2?}"),
    );
}

#[test]
fn criterion_2_compatibility_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::MIN;
    let mut worst_square_defect = 0.0f64;
    for _ in 0..10_000 {
        let s: BellScenario = presets::random_commuting_b(2, 2, &mut rng);
        worst = worst.max(bell::max_chsh(&s).unwrap());
        // with [B1, B2] = 0 the Landau identity collapses to 𝓑² = I
        let b = bell::bell_operator(&s).unwrap();
        let sq = b.matrix() * b.matrix();
        worst_square_defect =
            worst_square_defect.max(sq.max_abs_diff(&ComplexMatrix::identity(4)).unwrap());
    }
    let compatible = bell::max_chsh(&presets::compatible::<f64>()).unwrap();
    check(
        2,
        worst <= 1.0 + 1e-10 && worst_square_defect < 1e-10 && (compatible - 1.0).abs() <= 1e-10,
        format!("max_chsh over 10^4 commuting-B scenarios {worst:.12}, compatible preset {compatible:.12}"),
    );
}

#[test]
fn criterion_3_incompatibility_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut accepted = 0;
    let mut lowest = f64::MAX;
    while accepted < 1_000 {
        let s: BellScenario = presets::random_nontrivial(2, 2, &mut rng);
        let ca = commutator(&s.a1, &s.a2).unwrap().spectral_norm();
        let cb = commutator(&s.b1, &s.b2).unwrap().spectral_norm();
        if ca <= 0.1 || cb <= 0.1 {
            continue;
        }
        accepted += 1;
        lowest = lowest.min(bell::permutation_max(&s).unwrap().0);
    }
    let optimal = bell::max_chsh(&presets::optimal::<f64>()).unwrap();
    check(
        3,
        lowest > 1.0 && (optimal - 2f64.sqrt()).abs() <= 1e-9,
        format!(
            "min permutation_max over 10^3 scenarios {lowest:.6}, optimal preset {optimal:.12}"
        ),
    );
}

#[test]
fn criterion_4_single_photon_grangier() {
    let start = Instant::now();
    let st = detection::run_aggregated(
        Source::Quantum(StateVector::balanced_pair()),
        DetectorConfig::QuantumBorn,
        TRIALS,
        4,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let g2 = match st.g2() {
        G2Estimate::Defined { g2, .. } => g2,
        G2Estimate::InsufficientData => f64::NAN,
    };
    check(
        4,
        st.coincidences() == 0
            && (st.p1() - 0.5).abs() <= 0.0015
            && (st.p2() - 0.5).abs() <= 0.0015
            && g2 == 0.0
            && elapsed < Duration::from_secs(5),
        format!(
            "n_c = {}, p1 = {:.5}, p2 = {:.5}, g2 = {g2} in {elapsed:.2?}",
            st.coincidences(),
            st.p1(),
            st.p2()
        ),
    );
}

#[test]
fn criterion_5_classical_coincidence_bound() {
    // η·I·Δt = 0.1 per channel: the regime of the deterministic-field example.
    let moderate = DetectorConfig::SemiclassicalPoisson(PoissonDetector::new(1.0, 0.1));
    // The thermal ratio 2(1 + k)/(1 + 2k) approaches 2 only for small k = η·I·Δt,
    // while the noise grows as k shrinks; k = 0.03 balances the two at 10^6 trials.
    let linear = DetectorConfig::SemiclassicalPoisson(PoissonDetector::new(1.0, 0.03));
    let cases = [
        (
            "deterministic",
            ClassicalFieldModel::Deterministic {
                intensities: vec![1.0, 1.0],
            },
            moderate,
            Some((1.0, 0.02)),
        ),
        (
            "thermal",
            ClassicalFieldModel::Thermal {
                means: vec![1.0, 1.0],
                correlated: true,
            },
            linear,
            Some((2.0, 0.1)),
        ),
        (
            "anti-correlated",
            ClassicalFieldModel::anti_correlated(1.0, 0.01),
            moderate,
            None,
        ),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (k, (name, model, det, target)) in cases.into_iter().enumerate() {
        let st = detection::run_aggregated(Source::Classical(model), det, TRIALS, 50 + k as u64)
            .unwrap();
        let v = grangier_test(&st, 3.0).unwrap();
        let on_target = target.is_none_or(|(want, tol)| (v.alpha - want).abs() <= tol);
        pass &= v.classical_compatible && on_target;
        details.push(format!(
            "{name}: alpha = {:.4} ± {:.4}{}{}",
            v.alpha,
            v.se,
            if v.classical_compatible {
                ""
            } else {
                " [below 1 - 3se]"
            },
            if on_target { "" } else { " [off target]" },
        ));
    }
    check(5, pass, details.join("; "));
}

#[test]
fn criterion_6_threshold_scheme() {
    let start = Instant::now();
    let model = ClassicalFieldModel::anti_correlated(1.0, 0.01);
    let theta = model.total_intensity() / 2.0;
    let st = detection::run_aggregated(
        Source::Classical(model),
        DetectorConfig::Threshold(ThresholdDetector { threshold: theta }),
        TRIALS,
        6,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let g2 = match st.g2() {
        G2Estimate::Defined { g2, .. } => g2,
        G2Estimate::InsufficientData => f64::NAN,
    };
    check(
        6,
        st.max_clicks_per_trial() <= 1 && g2 < 0.05 && elapsed < Duration::from_secs(5),
        format!(
            "max clicks per trial {}, g2 = {g2:.4} in {elapsed:.2?}",
            st.max_clicks_per_trial()
        ),
    );
}

#[test]
fn criterion_7_lhv_ceiling_and_quantum_gap() {
    // integer oracle: ½|a1b1 + a1b2 + a2b1 − a2b2| over all {−1,0,1}⁴ patterns
    let oracle_max = deterministic_strategies()
        .map(|[a1, a2, b1, b2]| {
            let (a1, a2, b1, b2) = (a1 as i32, a2 as i32, b1 as i32, b2 as i32);
            Ratio::new((a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2).abs(), 2)
        })
        .max()
        .unwrap();
    let sweep = lhv_sweep(100_000, 7).unwrap();

    let est = chsh_from_counts(
        &detection::sample_chsh_counts(&presets::optimal(), &StateVector::singlet(), 100_000, 7)
            .unwrap(),
    )
    .unwrap();
    check(
        7,
        oracle_max == Ratio::from_integer(1)
            && sweep.deterministic_strategies == 81
            && sweep.max_s == "1"
            && (est.s - 2f64.sqrt()).abs() <= 0.01,
        format!(
            "LHV max S = {} over 81 strategies + {} mixtures; singlet counts S = {:.4} ± {:.4}",
            sweep.max_s, sweep.random_mixtures, est.s, est.se
        ),
    );
}

fn run_cli(args: &[&str], out: &Path, threads: &str) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_coherence-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--no-timestamp")
        .env("RAYON_NUM_THREADS", threads)
        .status()
        .unwrap();
    assert!(status.success(), "{args:?} exited with {status}");
    std::fs::read(out).unwrap()
}

#[test]
fn criterion_8_deterministic_output() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 6] = [
        &[
            "run", "grangier", "--source", "thermal", "--trials", "200000", "--seed", "8",
        ],
        &[
            "run",
            "threshold",
            "--trials",
            "200000",
            "--seed",
            "8",
            "--raw-clicks",
        ],
        &[
            "run",
            "chsh-operator",
            "--scenario",
            "doubly-incompatible-nonoptimal",
        ],
        &["run", "chsh-counts", "--trials", "20000", "--seed", "8"],
        &["run", "lhv", "--models", "5000", "--seed", "8"],
        &[
            "run",
            "grangier",
            "--source",
            "single-photon",
            "--trials",
            "100000",
            "--seed",
            "8",
            "--format",
            "csv",
        ],
    ];
    let mut mismatched = Vec::new();
    for (k, args) in runs.iter().enumerate() {
        // same path both times: the resolved config, path included, is part of the output
        let out = dir.path().join(format!("run{k}.out"));
        let first = run_cli(args, &out, "1");
        let first_clicks = std::fs::read(dir.path().join(format!("run{k}.clicks.csv"))).ok();
        let second = run_cli(args, &out, "4");
        let second_clicks = std::fs::read(dir.path().join(format!("run{k}.clicks.csv"))).ok();
        if first != second || first_clicks != second_clicks {
            mismatched.push(args[1]);
        }
    }
    let clicks_written = dir.path().join("run1.clicks.csv").exists();
    check(
        8,
        mismatched.is_empty() && clicks_written,
        format!(
            "{} experiments re-run on 1 and 4 threads; mismatches: {:?}; raw clicks compared: {clicks_written}",
            runs.len(),
            mismatched
        ),
    );
}
