//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p qrnn-forge --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qrnn_forge::data::{synthetic, SyntheticSpec};
use qrnn_forge::depth::{depth_scan, ScanConfig};
use qrnn_forge::encoding::{
    amplitude_qsp, angle_feature_map, normalize_l2, AmplitudeAugmenter, Preprocessing,
};
use qrnn_forge::enqode::{EnqodeConfig, EnqodeModel};
use qrnn_forge::experiment::{amplitude_rows, fidelity_features, load_config, run_training};
use qrnn_forge::qrnn::{
    build_ansatz, build_encoded, encode_sequence, param_count, probability_to_value,
    AmplitudeEncoder, AngleEncoder, EncodingKind, Entanglement, FeatureEncoder, QrnnConfig,
    Structure,
};
use qrnn_forge::simulator::{
    fidelity, run_density, run_exact, sample, Circuit, Gate, GateKind, StateVector,
};
use qrnn_forge::training::{adam_step, spsa_gradient, target_probability, AdamState};

// Tolerances and thresholds.
const QSP_FIDELITY: f64 = 1.0 - 1e-10;
const QSP_SECONDS: f64 = 5.0;
const ANGLE_TOL: f64 = 1e-12;
const STRUCTURE_TV: f64 = 1e-9;
const RESET_SIGMAS: f64 = 3.0;
const RESET_SHOTS: usize = 10_000;
const ENQODE_2Q: f64 = 0.88;
const ENQODE_3Q: f64 = 0.80;
const REFINE_SLACK: f64 = 1e-9;
const ENQODE_SECONDS: f64 = 120.0;
const QSP_DEPTH_RATIO: f64 = 1.8;
const ADAM_TOL: f64 = 1e-12;
const SPSA_DRAWS: u64 = 500;
const SPSA_REL: f64 = 0.05;
const TRAIN_REDUCTION: f64 = 0.5;
const TRAIN_SECONDS: f64 = 600.0;
const MAPPING_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c01_exact_amplitude() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 1.0f64;
    for _ in 0..200 {
        let dim = rng.random_range(2..=32usize);
        let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let x = normalize_l2(&raw).map_err(|e| e.to_string())?;
        let mut padded = x.clone();
        padded.resize(dim.next_power_of_two(), 0.0);
        let prepared = amplitude_qsp(&x)
            .and_then(|c| c.statevector())
            .map_err(|e| e.to_string())?;
        let target = StateVector::from_real(&padded).map_err(|e| e.to_string())?;
        worst = worst.min(fidelity(&prepared, &target).map_err(|e| e.to_string())?);
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst >= QSP_FIDELITY && secs < QSP_SECONDS,
        format!(
            "min fidelity 1 - {:.1e} over 200 vectors in {secs:.2} s",
            1.0 - worst
        ),
    )
}

fn c02_angle_tensor_product() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=6usize);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let state = angle_feature_map(&x)
            .and_then(|c| c.statevector())
            .map_err(|e| e.to_string())?;
        for (idx, amp) in state.amplitudes().iter().enumerate() {
            let expected: f64 = (0..n)
                .map(|q| {
                    if (idx >> q) & 1 == 1 {
                        (x[q] / 2.0).sin()
                    } else {
                        (x[q] / 2.0).cos()
                    }
                })
                .product();
            worst = worst.max((amp.re - expected).abs()).max(amp.im.abs());
        }
    }
    check(
        worst <= ANGLE_TOL,
        format!("max amplitude error {worst:.1e} on 100 inputs"),
    )
}

fn c03_structures_agree() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = rng.random_range(1..=4usize);
        let n_hidden = rng.random_range(1..=3usize);
        let n_feature = rng.random_range(1..=2usize);
        let angle = rng.random::<bool>();
        let entanglement = if rng.random::<bool>() {
            Entanglement::Full
        } else {
            Entanglement::Linear
        };
        let (encoder, features): (Box<dyn FeatureEncoder>, usize) = if angle {
            (
                Box::new(AngleEncoder {
                    n_features: n_feature,
                }),
                n_feature,
            )
        } else {
            (
                Box::new(AmplitudeEncoder {
                    n_qubits: n_feature,
                }),
                1 << n_feature,
            )
        };
        let seq: Vec<Vec<f64>> = (0..t)
            .map(|_| {
                let raw: Vec<f64> = (0..features).map(|_| rng.random::<f64>() + 0.01).collect();
                if angle {
                    raw
                } else {
                    normalize_l2(&raw).unwrap()
                }
            })
            .collect();
        let encoded = encode_sequence(encoder.as_ref(), &seq).map_err(|e| e.to_string())?;
        let mut cfg = QrnnConfig {
            n_hidden,
            n_feature,
            encoding: encoder.kind(),
            structure: Structure::Canonical,
            ansatz_reps: rng.random_range(1..=2usize),
            entanglement,
            target_index: 0,
        };
        let params: Vec<f64> = (0..cfg.param_count())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        let canonical = run_density(
            &build_encoded(&cfg, &params, &encoded).map_err(|e| e.to_string())?,
            None,
        )
        .map_err(|e| e.to_string())?;
        cfg.structure = Structure::AlternatingF;
        let alternating = run_density(
            &build_encoded(&cfg, &params, &encoded).map_err(|e| e.to_string())?,
            None,
        )
        .map_err(|e| e.to_string())?;
        let tv = 0.5
            * canonical
                .iter()
                .zip(&alternating)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        worst = worst.max(tv);
    }
    check(
        worst < STRUCTURE_TV,
        format!("max total variation {worst:.1e} over 20 instances"),
    )
}

fn random_reset_circuit(rng: &mut ChaCha8Rng) -> Circuit {
    let n = 3;
    let mut c = Circuit::new(n);
    let mut resets = 0;
    for i in 0..24 {
        let q = rng.random_range(0..n);
        let gate = match rng.random_range(0..5) {
            0 => Gate::ry(q, rng.random_range(-PI..PI)),
            1 => Gate::rx(q, rng.random_range(-PI..PI)),
            2 => Gate::h(q),
            3 => Gate::cx(q, (q + 1 + rng.random_range(0..n - 1)) % n),
            _ if i > 4 => {
                resets += 1;
                Gate::reset(q)
            }
            _ => Gate::rz(q, rng.random_range(-PI..PI)),
        };
        c.push(gate).unwrap();
    }
    if resets == 0 {
        c.push(Gate::reset(0)).unwrap();
        c.push(Gate::ry(0, 1.0)).unwrap();
    }
    c.with_measured(vec![0, 1, 2]).unwrap()
}

fn c04_reset_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = 0.0f64;
    for k in 0..10 {
        let c = random_reset_circuit(&mut rng);
        assert!(c.has_reset());
        let exact = run_exact(&c).map_err(|e| e.to_string())?;
        let freq = sample(&c, RESET_SHOTS, 1000 + k, None)
            .map_err(|e| e.to_string())?
            .frequencies();
        for (p, f) in exact.iter().zip(&freq) {
            let sigma = (p * (1.0 - p) / RESET_SHOTS as f64).sqrt();
            let z = if sigma > 0.0 {
                (f - p).abs() / sigma
            } else if (f - p).abs() == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
        }
    }
    check(
        worst <= RESET_SIGMAS,
        format!("max |freq - p| = {worst:.2} sigma over 10 circuits x 8 outcomes"),
    )
}

fn c05_enqode_fidelity() -> Outcome {
    let start = Instant::now();
    let records = synthetic(5, 520, &SyntheticSpec::default()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, threshold) in [(2usize, ENQODE_2Q), (3, ENQODE_3Q)] {
        let features = fidelity_features(&records, n).map_err(|e| e.to_string())?;
        let rows = amplitude_rows(&features).map_err(|e| e.to_string())?;
        let cfg = EnqodeConfig {
            layers: Some(n),
            ..EnqodeConfig::default()
        };
        let model = EnqodeModel::fit(&rows, n, &cfg).map_err(|e| e.to_string())?;
        let refined = model
            .mean_fidelity(&rows, true)
            .map_err(|e| e.to_string())?;
        let plain = model
            .mean_fidelity(&rows, false)
            .map_err(|e| e.to_string())?;
        ok &= refined >= threshold && refined >= plain - REFINE_SLACK;
        parts.push(format!(
            "({n}q,{n}L) {} rows: {refined:.4} refined / {plain:.4} plain (need {threshold})",
            rows.len()
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        ok && secs < ENQODE_SECONDS,
        format!("{}; {secs:.1} s", parts.join("; ")),
    )
}

fn c06_depth_scaling() -> Outcome {
    let rows = depth_scan(&ScanConfig::default()).map_err(|e| e.to_string())?;
    let depth: BTreeMap<(String, String, usize), usize> = rows
        .iter()
        .map(|r| ((r.encoding.clone(), r.structure.clone(), r.n_f), r.depth))
        .collect();
    let structures = [Structure::Canonical, Structure::AlternatingF];
    let mut ok = true;
    let mut parts = Vec::new();

    let mut min_ratio = f64::INFINITY;
    for s in structures {
        for n in 4..=5 {
            let key = |n| {
                (
                    EncodingKind::AmplitudeExact.name().to_string(),
                    s.name().to_string(),
                    n,
                )
            };
            min_ratio = min_ratio.min(depth[&key(n)] as f64 / depth[&key(n - 1)] as f64);
        }
    }
    ok &= min_ratio >= QSP_DEPTH_RATIO;
    parts.push(format!("exact-QSP min ratio {min_ratio:.2}"));

    // C is fitted on the first successive difference and must bound the rest.
    let linear_bound = |enc: EncodingKind, s: Structure| -> (bool, f64) {
        let d = |n: usize| {
            let key = |n| (enc.name().to_string(), s.name().to_string(), n);
            depth[&key(n)] as f64 - depth[&key(n - 1)] as f64
        };
        let c = d(3) / 3.0;
        ((4..=5).all(|n| d(n) <= c * n as f64), c)
    };
    for s in structures {
        let (held, c) = linear_bound(EncodingKind::Enqode, s);
        ok &= held;
        parts.push(format!(
            "enqode {} C={c:.2} {}",
            s.name(),
            if held { "holds" } else { "violated" }
        ));
    }
    let (qsp_held, _) = linear_bound(EncodingKind::AmplitudeExact, Structure::Canonical);
    parts.push(format!(
        "(same test on exact QSP: {})",
        if qsp_held { "holds" } else { "violated" }
    ));

    let alt_ok = rows
        .iter()
        .filter(|r| r.structure == Structure::Canonical.name())
        .all(|r| {
            depth[&(
                r.encoding.clone(),
                Structure::AlternatingF.name().to_string(),
                r.n_f,
            )] <= r.depth
        });
    ok &= alt_ok;
    parts.push(format!(
        "alternating <= canonical at all {} points: {alt_ok}",
        rows.len() / 2
    ));
    check(ok, parts.join("; "))
}

fn c07_optimizers() -> Outcome {
    // Adam: two steps from hand-expanded moment recursions.
    let (lr, b1, b2, eps) = (0.03, 0.9, 0.999, 1e-8);
    let theta = [0.5, -1.0];
    let g1 = [0.2, -0.4];
    let g2 = [0.1, 0.3];
    let (p1, s1) = adam_step(&AdamState::new(2), &g1, &theta, lr).map_err(|e| e.to_string())?;
    let (p2, _) = adam_step(&s1, &g2, &p1, lr).map_err(|e| e.to_string())?;
    let mut adam_err = 0.0f64;
    for i in 0..2 {
        let x1 = theta[i] - lr * g1[i] / (g1[i].abs() + eps);
        let m2 = (b1 * (1.0 - b1) * g1[i] + (1.0 - b1) * g2[i]) / (1.0 - b1 * b1);
        let v2 = (b2 * (1.0 - b2) * g1[i] * g1[i] + (1.0 - b2) * g2[i] * g2[i]) / (1.0 - b2 * b2);
        let x2 = x1 - lr * m2 / (v2.sqrt() + eps);
        adam_err = adam_err.max((p1[i] - x1).abs()).max((p2[i] - x2).abs());
    }

    // SPSA on L(θ) = ½ θᵀAθ + bᵀθ with a dominant gradient component.
    let a = [[2.0, 0.3, 0.0], [0.3, 1.0, 0.1], [0.0, 0.1, 0.5]];
    let b = [1.0, -0.2, 0.05];
    let loss = |t: &[f64]| -> qrnn_forge::Result<f64> {
        let mut v = 0.0;
        for i in 0..3 {
            v += b[i] * t[i];
            for j in 0..3 {
                v += 0.5 * t[i] * a[i][j] * t[j];
            }
        }
        Ok(v)
    };
    let at = [0.4, 0.2, -0.3];
    let truth: Vec<f64> = (0..3)
        .map(|i| b[i] + (0..3).map(|j| a[i][j] * at[j]).sum::<f64>())
        .collect();
    let mut mean = [0.0; 3];
    for draw in 0..SPSA_DRAWS {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + draw);
        let g = spsa_gradient(loss, &at, 1e-3, &mut rng).map_err(|e| e.to_string())?;
        for i in 0..3 {
            mean[i] += g[i] / SPSA_DRAWS as f64;
        }
    }
    let largest = truth.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let mut spsa_ok = true;
    let mut rel = Vec::new();
    for i in 0..3 {
        if truth[i].abs() >= 0.5 * largest {
            let r = (mean[i] - truth[i]).abs() / truth[i].abs();
            spsa_ok &= r <= SPSA_REL;
            rel.push(format!("g{i} {r:.3}"));
        }
    }
    check(
        adam_err <= ADAM_TOL && spsa_ok,
        format!(
            "Adam max error {adam_err:.1e}; SPSA relative error on significant components [{}], true gradient {:?}",
            rel.join(", "),
            truth.iter().map(|g| (g * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

fn c08_training_sanity() -> Outcome {
    // 109 days -> 108 feature rows -> 100 windows of length 8, all used for training.
    let start = Instant::now();
    let cfg = load_config(
        None,
        &[
            r#"dataset.source={"synthetic":{"seed":11,"n_days":109,"params":{"ar_coefficient":0.9}}}"#.into(),
            "dataset.window=8".into(),
            "dataset.test_ratio=0".into(),
            "training.epochs=50".into(),
            "training.learning_rate=0.03".into(),
            "training.spsa_step=0.001".into(),
            r#"training.execution="exact""#.into(),
            "training.seeds=[0,1,2,3,4]".into(),
        ],
    )
    .map_err(|e| e.to_string())?;
    let run = run_training(&cfg).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = run
        .seeds
        .iter()
        .map(|(s, _)| s.final_train_mse / s.curve[0])
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let secs = start.elapsed().as_secs_f64();
    check(
        run.n_train == 100 && mean <= 1.0 - TRAIN_REDUCTION && secs < TRAIN_SECONDS,
        format!(
            "{} sequences; final/initial MSE per seed {:?}, mean {mean:.3} (need <= {}); {secs:.0} s",
            run.n_train,
            ratios.iter().map(|r| (r * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            1.0 - TRAIN_REDUCTION
        ),
    )
}

fn c09_maxmin_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut violations = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=6usize);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.5)).collect();
        let top = b.iter().fold(0.0f64, |m, v| m.max(*v));
        let s = rng.random_range(1.05..1.0 / top);
        let a: Vec<f64> = b.iter().map(|v| v * s).collect();
        let mut train: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
            .collect();
        train.push(a.clone());
        train.push(b.clone());
        let aug =
            AmplitudeAugmenter::fit(&train, Preprocessing::MaxMin).map_err(|e| e.to_string())?;
        let ua =
            normalize_l2(&aug.apply(&a).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let ub =
            normalize_l2(&aug.apply(&b).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if !(0..n).all(|i| ua[i] > ub[i]) {
            violations += 1;
        }
    }
    check(
        violations == 0,
        format!("{violations} ordering violations in 100 pairs"),
    )
}

fn c10_mapping_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lo = rng.random_range(-10.0..10.0);
        let hi = lo + rng.random_range(1e-3..10.0);
        let x = rng.random_range(lo..=hi);
        let p = target_probability(x, lo, hi).map_err(|e| e.to_string())?;
        worst = worst.max((probability_to_value(p, lo, hi) - x).abs());
    }
    check(
        worst <= MAPPING_TOL,
        format!("max round-trip error {worst:.1e} on 1000 draws"),
    )
}

fn c11_param_count() -> Outcome {
    let mut checked = 0;
    for n in 2..=8usize {
        for reps in 1..=4usize {
            for n_hidden in 1..n {
                let cfg = QrnnConfig {
                    n_hidden,
                    n_feature: n - n_hidden,
                    encoding: EncodingKind::AmplitudeExact,
                    structure: Structure::Canonical,
                    ansatz_reps: reps,
                    entanglement: Entanglement::Full,
                    target_index: 0,
                };
                let expected = 2 * n * (reps + 1);
                let template =
                    build_ansatz(n, reps, Entanglement::Full).map_err(|e| e.to_string())?;
                let bound = template
                    .bind(&vec![0.1; expected])
                    .map_err(|e| e.to_string())?;
                let tally = bound.count_kind(GateKind::Ry) + bound.count_kind(GateKind::Rz);
                if param_count(&cfg) != expected
                    || template.param_count() != expected
                    || tally != expected
                {
                    return Err(format!("mismatch at n={n}, reps={reps}, n_H={n_hidden}"));
                }
                checked += 1;
            }
        }
    }
    check(
        true,
        format!("{checked} configurations over n in [2,8], reps in [1,4]"),
    )
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timing.json") {
                out.insert(
                    path.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn c12_cli_determinism() -> Outcome {
    let source = r#"dataset.source={"synthetic":{"seed":3,"n_days":60}}"#;
    let cases: [(&str, &[&str]); 4] = [
        ("train", &["--seeds", "0,1", "--set", "training.epochs=3"]),
        (
            "ablate-preprocessing",
            &["--seeds", "0", "--set", "training.epochs=2"],
        ),
        (
            "compare-encoding",
            &["--seeds", "0", "--set", "training.epochs=2"],
        ),
        ("depth-scan", &["--set", "depth_scan.n_f_max=3"]),
    ];
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (cmd, extra) in cases {
        let mut trees = Vec::new();
        for run in 0..2 {
            let out = scratch.path().join(format!("{cmd}-{run}"));
            let status = Process::new(env!("CARGO_BIN_EXE_qrnn-forge"))
                .arg(cmd)
                .args(["--exact", "--set", source, "--out"])
                .arg(&out)
                .args(extra)
                .env("RUST_LOG", "error")
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{cmd} exited with {status}"));
            }
            trees.push(tree(&out));
        }
        let same = trees[0] == trees[1] && !trees[0].is_empty();
        ok &= same;
        parts.push(format!(
            "{cmd}: {} files {}",
            trees[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    check(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("exact amplitude encoding fidelity", c01_exact_amplitude),
        ("angle encoding tensor product", c02_angle_tensor_product),
        (
            "canonical and alternating distributions agree",
            c03_structures_agree,
        ),
        ("reset: exact vs sampled within 3 sigma", c04_reset_sampling),
        ("EnQode fidelity and refinement", c05_enqode_fidelity),
        ("depth scaling", c06_depth_scaling),
        ("Adam oracle and SPSA mean", c07_optimizers),
        ("training sanity", c08_training_sanity),
        ("MaxMin amplitude ordering", c09_maxmin_ordering),
        ("mapping inverse", c10_mapping_inverse),
        ("parameter counting", c11_param_count),
        ("CLI determinism", c12_cli_determinism),
    ];
    let mut failed = 0;
    let total = Instant::now();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = Duration::from_secs_f64(start.elapsed().as_secs_f64());
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{took:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{took:.1?}]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1?}",
        criteria.len() - failed,
        total.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
