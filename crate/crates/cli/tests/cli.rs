use std::fs;
use std::process::Command;

use fracstab::char_eq::SystemSpec;
use fracstab::classifier::{classify, Reason, Verdict, VerdictKind};
use fracstab::error::Error;
use fracstab_cli::{exit_code_for_error, exit_code_for_kind, manifest_path, run, RunManifest};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE: [&str; 8] = [
    "--a11", "0.00001", "--a12", "1", "--a21", "-0.0022", "--a22", "0.1",
];

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fracstab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn with_example(cmd: &str, rest: &[&str]) -> Vec<String> {
    let mut v = vec![cmd.to_string()];
    v.extend(EXAMPLE.iter().map(|s| s.to_string()));
    v.extend(rest.iter().map(|s| s.to_string()));
    v
}

fn cli_owned(args: &[String]) -> (i32, String, String) {
    cli(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn exit_codes_follow_verdict_kind() {
    let table = [
        (VerdictKind::StableAllOrders, 0),
        (VerdictKind::StableForOrders, 0),
        (VerdictKind::UnstableAllOrders, 1),
        (VerdictKind::UnstableForOrders, 1),
        (VerdictKind::MarginalOnCurve, 2),
    ];
    for (kind, code) in table {
        assert_eq!(exit_code_for_kind(kind), code, "{kind:?}");
    }
    let errors = [
        (Error::InvalidOrder(2.0), 64),
        (Error::DeltaZeroUnclassified, 2),
        (Error::DeltaNotPositive(-1.0), 65),
        (Error::StepCap(1_000_000), 65),
        (
            Error::NotDecaying {
                initial_norm: 1.0,
                final_norm: 2.0,
            },
            1,
        ),
        (Error::RefinementLimit(24), 70),
    ];
    for (e, code) in errors {
        assert_eq!(exit_code_for_error(&e), code, "{e:?}");
    }

    let cases: [(&[&str], i32); 6] = [
        (
            &[
                "classify", "--a11", "-1", "--a12", "0", "--a21", "0", "--a22", "-1", "--q1",
                "0.9", "--q2", "0.1",
            ],
            0,
        ),
        (
            &[
                "classify", "--a11", "3", "--a12", "0", "--a21", "0", "--a22", "3", "--q1", "0.9",
                "--q2", "0.1",
            ],
            1,
        ),
        (
            &[
                "classify", "--a11", "1", "--a12", "0", "--a21", "0", "--a22", "0", "--q1", "0.9",
                "--q2", "0.1",
            ],
            2,
        ),
        (&["classify", "--a11", "1"], 64),
        (
            &[
                "classify", "--a11", "1", "--a12", "0", "--a21", "0", "--a22", "0", "--q1", "1.5",
                "--q2", "0.1",
            ],
            64,
        ),
        (&["bogus"], 64),
    ];
    for (args, code) in cases {
        assert_eq!(cli(args).0, code, "{args:?}");
    }
}

#[test]
fn classify_examples() {
    let (code, out, _) = cli_owned(&with_example(
        "classify",
        &["--q1", "0.5", "--q2", "0.25", "--json"],
    ));
    assert_eq!(code, 0);
    let v: Verdict = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v.kind, VerdictKind::StableForOrders);
    assert!((v.phi.unwrap() - 0.208493).abs() < 1e-6);
    assert_eq!(v.decay_exponent, Some(0.25));

    let (code, out, _) = cli_owned(&with_example(
        "classify",
        &["--q1", "0.25", "--q2", "0.5", "--json"],
    ));
    assert_eq!(code, 1);
    let v: Verdict = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v.kind, VerdictKind::UnstableForOrders);
    assert!((v.phi.unwrap() - 0.0271274).abs() < 1e-7);

    let (code, out, _) = cli(&[
        "classify", "--a11", "-1", "--a12", "0", "--a21", "0", "--a22", "-1", "--q1", "0.9",
        "--q2", "0.1",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("kind=StableAllOrders"));
    assert!(out.contains("reason=RsMembership"));
}

#[test]
fn classify_agrees_with_library() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..200 {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let q1: f64 = rng.gen_range(0.05..=1.0);
        let q2: f64 = rng.gen_range(0.05..=1.0);
        let flags: Vec<String> = ["--a11", "--a12", "--a21", "--a22"]
            .iter()
            .zip(&a)
            .flat_map(|(f, v)| [f.to_string(), format!("{v:e}")])
            .chain([
                "--q1".into(),
                format!("{q1:e}"),
                "--q2".into(),
                format!("{q2:e}"),
                "--json".into(),
            ])
            .collect();
        let mut args = vec!["classify".to_string()];
        args.extend(flags);
        let (code, out, err) = cli_owned(&args);
        assert!(err.is_empty(), "{args:?}: {err}");

        let lib = classify(&SystemSpec::new(a[0], a[1], a[2], a[3], q1, q2).unwrap()).unwrap();
        let got: Verdict = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(got, lib, "{args:?}");
        assert_eq!(code, exit_code_for_kind(lib.kind));
    }
}

#[test]
fn curve_output_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let p = path.to_str().unwrap();
    let args = [
        "curve",
        "--delta",
        "4",
        "--q1",
        "0.6",
        "--q2",
        "0.8",
        "--omega-min",
        "-3",
        "--omega-max",
        "3",
        "--n",
        "601",
        "--out",
        p,
        "--seed",
        "9",
    ];
    assert_eq!(cli(&args).0, 0);
    let first = fs::read(&path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("omega,a11,a22\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 601);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));

    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
    assert_eq!(manifest.command, "curve");
    assert_eq!(manifest.outputs, vec![p.to_string()]);
    assert_eq!(manifest.inputs["seed"], 9);
    assert_eq!(manifest.inputs["omega-min"], -3.0);

    // byte-identical numeric output on a re-run
    assert_eq!(cli(&args).0, 0);
    assert_eq!(fs::read(&path).unwrap(), first);
    for line in text.lines().skip(1) {
        assert!(
            line.chars()
                .all(|c| c.is_ascii_digit() || ".,-e".contains(c)),
            "{line}"
        );
    }
}

#[test]
fn commensurate_curve_is_a_line() {
    let (code, out, _) = cli(&[
        "curve",
        "--delta",
        "4",
        "--q1",
        "0.5",
        "--q2",
        "0.5",
        "--omega-min",
        "-2",
        "--omega-max",
        "2",
        "--n",
        "41",
    ]);
    assert_eq!(code, 0);
    for r in csv_rows(&out) {
        assert!((r[1] + r[2] - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn example_curve_passes_through_case_one() {
    let (code, out, _) = cli(&[
        "curve",
        "--delta",
        "0.002201",
        "--q1",
        "0.5",
        "--q2",
        "0.25",
        "--omega-min",
        "0",
        "--omega-max",
        "2",
        "--n",
        "2001",
    ]);
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    let i = rows
        .windows(2)
        .position(|w| (w[0][1] - 1e-5) * (w[1][1] - 1e-5) <= 0.0)
        .expect("bracket");
    let (r0, r1) = (&rows[i], &rows[i + 1]);
    let t = (1e-5 - r0[1]) / (r1[1] - r0[1]);
    let a22 = r0[2] + t * (r1[2] - r0[2]);
    assert!((a22 - 0.208493).abs() < 1e-5, "{a22}");
}

#[test]
fn qscan_spot_cells() {
    let (code, out, _) = cli_owned(&{
        let mut v = vec!["qscan".to_string()];
        v.extend(
            [
                "--a11", "0.00001", "--a12", "1", "--a21", "-0.0022", "--a22", "0.1", "--grid",
                "64",
            ]
            .map(String::from),
        );
        v
    });
    assert_eq!(code, 0);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 64 * 64);
    let cell = |q1: f64, q2: f64| rows.iter().find(|r| r[0] == q1 && r[1] == q2).unwrap()[2];
    assert_eq!(cell(0.5, 0.25), 1.0);
    assert_eq!(cell(0.25, 0.5), 0.0);
    // row-major by q1 then q2
    assert_eq!((rows[0][0], rows[0][1]), (1.0 / 64.0, 1.0 / 64.0));
    assert_eq!((rows[1][0], rows[1][1]), (1.0 / 64.0, 2.0 / 64.0));

    let (_, out, _) = cli(&[
        "qscan", "--a11", "-1", "--a22", "-1", "--delta", "1", "--grid", "8",
    ]);
    assert!(csv_rows(&out).iter().all(|r| r[2] == 1.0));
    let (_, out, _) = cli(&[
        "qscan", "--a11", "3", "--a22", "3", "--delta", "4", "--grid", "8",
    ]);
    assert!(csv_rows(&out).iter().all(|r| r[2] == 0.0));
}

#[test]
fn roots_examples() {
    let (code, out, _) = cli_owned(&with_example(
        "roots",
        &["--q1", "0.25", "--q2", "0.5", "--json"],
    ));
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["n_unstable"], 2);
    assert!(v["l"].as_f64().unwrap() < v["L"].as_f64().unwrap());

    let (code, out, _) = cli(&[
        "roots", "--a11", "-1", "--a22", "-1", "--delta", "1", "--q1", "0.5", "--q2", "0.25",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("n_unstable=0"), "{out}");

    let (code, _, err) = cli(&[
        "roots", "--a11", "-1", "--a22", "-1", "--delta", "-1", "--q1", "0.5", "--q2", "0.25",
    ]);
    assert_eq!(code, 65);
    assert!(err.contains("classify"), "{err}");
}

#[test]
fn simulate_records_and_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let p = path.to_str().unwrap();
    let (code, out, _) = cli(&[
        "simulate", "--a11", "-1", "--a12", "0", "--a21", "0", "--a22", "-1", "--q1", "0.5",
        "--q2", "0.5", "--t-end", "500", "--h", "0.05", "--out", p, "--json",
    ]);
    assert_eq!(code, 0);
    let est: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    let slope = est["slope"].as_f64().unwrap();
    assert!((slope + 0.5).abs() <= 0.1, "{slope}");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("t,x,y,norm\n"));
    assert_eq!(text.lines().count(), 10_002);
    assert!(manifest_path(&path).exists());

    let (code, out, _) = cli_owned(&with_example(
        "simulate",
        &[
            "--q1", "0.25", "--q2", "0.5", "--t-end", "200", "--h", "0.05",
        ],
    ));
    assert_eq!(code, 1);
    assert!(
        out.lines().last().unwrap().contains("growth_flagged=true"),
        "{out}"
    );

    let (code, _, err) = cli_owned(&with_example(
        "simulate",
        &[
            "--q1", "0.25", "--q2", "0.5", "--t-end", "1000", "--h", "0.001",
        ],
    ));
    assert_eq!(code, 65);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_fracstab");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let o = status(&[
        "classify", "--a11", "3", "--a12", "0", "--a21", "0", "--a22", "3", "--q1", "0.5", "--q2",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("UnstableAllOrders"));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
    assert_eq!(status(&["classify"]).status.code(), Some(64));
    let _ = Reason::BelowGamma;
}
