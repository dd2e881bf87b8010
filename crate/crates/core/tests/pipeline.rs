use std::path::Path;

use kgtail::criteria::{full_verdict, letac_positivity, TailClaim};
use kgtail::engine::{sample_stationary, MapFamily, SimConfig};
use kgtail::experiment::{
    emit_plotdata, parse_experiment, run_experiment, write_report, TailOutcome,
};
use kgtail::io::{
    config_digest, parse_measure, read_binary, read_samples, write_binary, write_text,
};
use kgtail::measure::{common_fixed_point, validate, Atom, AtomicMeasure, Driver};
use kgtail::{solve_alpha, Error};
use proptest::prelude::*;

const COUNTEREXAMPLE: &str = r#"
label = "letac counterexample"
atoms = [
  { a = 3, b = 1, c = -1, w = 0.2 },
  { a = "1/2", b = -1, c = 0, w = 0.8 },
]
"#;

#[test]
fn measure_file_to_verdict() {
    let d = parse_measure(COUNTEREXAMPLE).unwrap();
    let m = d.as_atomic().unwrap();
    let v = full_verdict(m, &MapFamily::Letac).unwrap();
    assert_eq!(v.cl_positive, Some(false));
    assert_eq!(v.cv_flag, Some(true));
    assert!((v.alpha.unwrap().alpha - 1.0).abs() < 1e-12);
    let json = serde_json::to_value(&v).unwrap();
    assert_eq!(json["letac"]["n3"], -0.5);
    assert_eq!(json["right_tail"]["claim"], "zero");
}

#[test]
fn parametric_measures_are_simulation_only() {
    let d = parse_measure(
        "parametric = { family = \"log-normal-normal\", params = { mu = -0.5, sigma = 1, b_mean = 1, b_sd = 1 } }",
    )
    .unwrap();
    assert_eq!(d.as_atomic().unwrap_err(), Error::ParametricNotSupported);
    let cfg = SimConfig {
        n_samples: 1000,
        chains: 4,
        seed: 3,
        ..SimConfig::default()
    };
    let batch = sample_stationary(&MapFamily::Affine, &d, &cfg).unwrap();
    assert_eq!(batch.values.len(), 1000);
    assert!(batch.values.iter().all(|x| x.is_finite()));
}

#[test]
fn sample_files_round_trip() {
    let d = parse_measure(COUNTEREXAMPLE).unwrap();
    let cfg = SimConfig {
        n_samples: 500,
        chains: 3,
        seed: 11,
        ..SimConfig::default()
    };
    let batch = sample_stationary(&MapFamily::Letac, &d, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();

    let txt = dir.path().join("s.txt");
    write_text(std::fs::File::create(&txt).unwrap(), &batch.values).unwrap();
    assert_eq!(read_samples(&txt).unwrap(), batch.values);

    let bin = dir.path().join("s.bin");
    let digest = config_digest(&d, "letac", &batch.config);
    write_binary(
        std::fs::File::create(&bin).unwrap(),
        11,
        &digest,
        &batch.values,
    )
    .unwrap();
    assert_eq!(read_samples(&bin).unwrap(), batch.values);
    let parsed = read_binary(std::fs::File::open(&bin).unwrap()).unwrap();
    assert_eq!((parsed.seed, parsed.digest), (11, digest));
}

#[test]
fn experiment_end_to_end_is_deterministic() {
    let text = r#"
label = "positive affine"
atoms = [{ a = 2, b = -1, w = "1/3" }, { a = "1/2", b = 1, w = "2/3" }]
[experiment]
samples = 50000
chains = 16
seed = 5
k = 200
sup_pi_samples = 20000
"#;
    let cfg = parse_experiment(text, Path::new(".")).unwrap();
    let a = run_experiment(&cfg).unwrap();
    let right = a
        .right_tail
        .as_ref()
        .and_then(TailOutcome::report)
        .expect("right tail analyzed");
    assert!(right.flatness_ratio <= 3.0, "{}", right.flatness_ratio);
    assert!(a.forward_backward.as_ref().unwrap().statistic < 0.02);
    assert_eq!(a.agreement[0].analytic, TailClaim::Positive);

    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&d1, &d2] {
        let r = run_experiment(&cfg).unwrap();
        write_report(&r, d.path()).unwrap();
        emit_plotdata(&r, d.path()).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(d1.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 6, "{names:?}");
    for n in names {
        assert_eq!(
            std::fs::read(d1.path().join(&n)).unwrap(),
            std::fs::read(d2.path().join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn skipped_tail_is_recorded_in_manifest() {
    let text = format!(
        "{COUNTEREXAMPLE}\n[experiment]\nfamily = \"letac\"\nsamples = 5000\nsup_pi_samples = 0\n"
    );
    let r = run_experiment(&parse_experiment(&text, Path::new(".")).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_plotdata(&r, dir.path()).unwrap();
    assert!(dir.path().join("ccdf.csv").exists());
    assert!(!dir.path().join("tail_constant.csv").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(
        manifest.contains("tail_constant.csv") && manifest.contains("analytic tail is zero"),
        "{manifest}"
    );
}

fn letac_measures() -> impl Strategy<Value = AtomicMeasure> {
    let atom = (0.1f64..4.0, -3.0f64..3.0, -3.0f64..3.0, 0.05f64..1.0);
    prop::collection::vec(atom, 2..5).prop_filter_map("contracting, nondegenerate", |raw| {
        let total: f64 = raw.iter().map(|x| x.3).sum();
        let atoms = raw
            .iter()
            .map(|&(a, b, c, w)| Atom::with_threshold(a, b, c, w / total))
            .collect();
        let m = AtomicMeasure::new(atoms, "random").ok()?;
        let lm = validate(&m);
        (lm.mean_log_a < -0.05 && lm.has_expanding_atom && common_fixed_point(&m).is_none())
            .then_some(m)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounded_verdicts_bound_the_samples(m in letac_measures(), seed in any::<u64>()) {
        let pos = letac_positivity(&m).unwrap();
        prop_assume!(!pos.positive && pos.constants.n.is_finite());
        let n = pos.constants.n;
        let cfg = SimConfig { n_samples: 2000, chains: 4, seed, ..SimConfig::default() };
        let batch = sample_stationary(&MapFamily::Letac, &Driver::from(m), &cfg).unwrap();
        let max = batch.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(max <= n + 1e-9 * (1.0 + n.abs()), "max {} > N {}", max, n);
    }

    #[test]
    fn alpha_is_a_root_for_random_measures(m in letac_measures()) {
        let root = solve_alpha(&m).unwrap();
        prop_assert!(root.residual <= 1e-12);
    }
}

#[test]
fn shipped_measure_files_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../measures");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = kgtail::experiment::read_experiment(&path).unwrap();
        assert!(cfg.output_dir.is_some(), "{}", path.display());
        n += 1;
    }
    assert!(n >= 3);
}
