//! Acceptance criteria for the letter-network build. Each criterion prints
//! one PASS/FAIL line; the test fails if any criterion fails.
//!
//! Run with `cargo test -p letternet-cli --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{manifest_note, run, tree};
use letternet::analysis::Heatmap9x9;
use letternet::featuresets::{builtin_feature_sets, targets_experiment2};
use letternet::glyphs::{apply_noise, builtin_alphabet, flatten, reshape, Grid};
use letternet::mlp::{init_random, sigmoid, Mlp};
use letternet::render::{render_ppm, Palette, Raster};
use letternet::seeded_rng;
use letternet::trainer::gradcheck::{check_backprop, ABS_FLOOR, REL_TOLERANCE, STEP};
use letternet::trainer::{train, TrainConfig};
use rand::Rng;

type Outcome = Result<String, String>;
type Files = BTreeMap<String, Vec<u8>>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// 1. Analytic gradients agree with central differences.
fn gradient_oracle() -> Outcome {
    ensure(
        STEP == 1e-5 && REL_TOLERANCE == 1e-6 && ABS_FLOOR == 1e-8,
        "tolerances changed",
    )?;
    let start = Instant::now();
    let report = check_backprop(20_251_017, 100).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let worst = report.worst();
    ensure(
        report.scales.iter().all(|s| s.instances >= 100),
        "fewer than 100 instances",
    )?;
    ensure(
        report.passed(),
        format!(
            "max rel {:.3e}, max abs {:.3e}",
            worst.max_relative, worst.max_absolute
        ),
    )?;
    ensure(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "max rel {:.3e} (<= 1e-6), max abs {:.3e} (<= 1e-8), {:?}",
        worst.max_relative, worst.max_absolute, elapsed
    ))
}

/// 2. Feature-set network reaches training accuracy 1.0 for most seeds.
///
/// Locked per-seed outcomes, recorded once from seeds 1 to 10.
const EXP2_ACCURACY_BY_SEED: [f64; 10] = [1.0; 10];

fn exp2_trainability() -> Outcome {
    let data = targets_experiment2();
    let mut perfect = 0;
    let mut slowest = Duration::ZERO;
    for (seed, &expected) in (1u64..=10).zip(&EXP2_ACCURACY_BY_SEED) {
        let start = Instant::now();
        let mut net = init_random(6, 10, &mut seeded_rng(seed)).map_err(|e| e.to_string())?;
        let config = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        ensure(
            config.eta == 0.5 && config.max_epochs == 5000 && config.noise_rate == 0.0,
            "defaults changed",
        )?;
        let report = train(&mut net, &data, &config).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure(
            elapsed < Duration::from_secs(10),
            format!("seed {seed} took {elapsed:?}"),
        )?;
        ensure(
            report.final_accuracy == expected,
            format!(
                "seed {seed}: accuracy {} != locked {expected}",
                report.final_accuracy
            ),
        )?;
        if report.final_accuracy == 1.0 {
            perfect += 1;
        }
    }
    ensure(perfect > 5, format!("only {perfect}/10 seeds reached 1.0"))?;
    Ok(format!(
        "{perfect}/10 seeds at accuracy 1.0, slowest {slowest:?}"
    ))
}

/// 3. Stopping rule and convergence flag.
fn stopping_semantics() -> Outcome {
    let data = targets_experiment2();
    let fresh = || init_random(6, 10, &mut seeded_rng(4)).unwrap();

    let report = train(&mut fresh(), &data, &TrainConfig::default()).map_err(|e| e.to_string())?;
    ensure(
        report.converged == (report.final_sse <= 0.01),
        "flag disagrees with final SSE",
    )?;
    ensure(report.sse_curve.len() == report.epochs_run, "curve length")?;

    let loose = TrainConfig {
        epsilon: 1e9,
        ..TrainConfig::default()
    };
    let report = train(&mut fresh(), &data, &loose).map_err(|e| e.to_string())?;
    ensure(
        report.epochs_run == 1 && report.converged,
        "epsilon 1e9 did not stop after epoch 1",
    )?;

    let strict = TrainConfig {
        epsilon: 0.0,
        max_epochs: 50,
        ..TrainConfig::default()
    };
    let report = train(&mut fresh(), &data, &strict).map_err(|e| e.to_string())?;
    ensure(
        report.epochs_run == 50 && report.sse_curve.len() == 50,
        format!("epsilon 0 ran {} epochs", report.epochs_run),
    )?;
    Ok("flag == (sse <= 0.01); 1 epoch at 1e9; 50 epochs at 0".into())
}

fn run_twice(args: &[&str]) -> Result<(Files, Files), String> {
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut full: Vec<&str> = args.to_vec();
        let out = dir.path().to_str().unwrap().to_string();
        full.extend(["--out", &out]);
        let result = run(&full);
        ensure(
            result.status.success(),
            format!(
                "{args:?} failed: {}",
                String::from_utf8_lossy(&result.stderr)
            ),
        )?;
        trees.push(tree(dir.path()));
    }
    let second = trees.pop().unwrap();
    Ok((trees.pop().unwrap(), second))
}

/// 4. Identical flags give byte-identical artifacts.
fn determinism() -> Outcome {
    let mut counts = Vec::new();
    for exp in ["exp1", "exp2"] {
        let (a, b) = run_twice(&[exp, "--seed", "5"])?;
        ensure(a.keys().eq(b.keys()), format!("{exp}: file sets differ"))?;
        for (path, bytes) in &a {
            ensure(
                &b[path] == bytes,
                format!("{exp}: {path} differs between runs"),
            )?;
        }
        ensure(
            a.keys().any(|k| k.ends_with("manifest.txt"))
                && a.keys().any(|k| k.ends_with("weights.txt")),
            format!("{exp}: manifest or weights missing"),
        )?;
        counts.push(format!("{exp} {} files", a.len()));
    }
    Ok(format!("byte-identical reruns ({})", counts.join(", ")))
}

/// 5. Pixel-flip noise statistics at rate 0.1.
fn noise_statistics() -> Outcome {
    let glyphs = builtin_alphabet();
    let mut rng = seeded_rng(5);
    let trials = 10_000;
    let mut flips = 0usize;
    for t in 0..trials {
        let x = glyphs[t % glyphs.len()].flatten();
        let y = apply_noise(&x, 0.1, &mut rng).map_err(|e| e.to_string())?;
        ensure(y.iter().all(|&v| v == 0.0 || v == 1.0), "non-binary output")?;
        flips += x.iter().zip(&y).filter(|(a, b)| a != b).count();
    }
    let mean = flips as f64 / trials as f64;
    ensure((7.9..=8.3).contains(&mean), format!("mean flips {mean}"))?;
    Ok(format!("mean flips per glyph {mean:.4} in [7.9, 8.3]"))
}

/// 6. The feature-set table, row by row.
fn feature_set_integrity() -> Outcome {
    let expected: [(char, &[char]); 10] = [
        ('A', &['A', 'H']),
        ('B', &['B', 'R', 'P']),
        ('C', &['C', 'G']),
        ('E', &['E', 'F', 'S']),
        ('I', &['Z', 'T', 'I', 'J']),
        ('K', &['Y', 'K', 'X']),
        ('L', &['L', 'U']),
        ('M', &['N', 'M']),
        ('O', &['O', 'Q', 'D']),
        ('V', &['V', 'W']),
    ];
    let table = builtin_feature_sets();
    ensure(table.len() == 10, format!("{} classes", table.len()))?;
    for (set, (label, letters)) in table.sets().iter().zip(expected) {
        ensure(
            set.label == label && set.letters == letters,
            format!("row {label}: {:?}", set.letters),
        )?;
    }
    let mut all: Vec<char> = table
        .sets()
        .iter()
        .flat_map(|s| s.letters.clone())
        .collect();
    all.sort_unstable();
    ensure(
        all == ('A'..='Z').collect::<Vec<_>>(),
        "rows do not partition A-Z",
    )?;
    Ok("10 rows match, partition of A-Z".into())
}

/// 7. Golden-file rendering and the constant-map midpoint.
fn render_bit_exactness() -> Outcome {
    const GOLDEN: &[u8] = include_bytes!("../../core/tests/golden/ramp_cell4.ppm");
    let flat: Vec<f64> = (0..81).map(f64::from).collect();
    let ramp = Heatmap9x9::from_flat(&flat, 0).map_err(|e| e.to_string())?;
    let bytes = render_ppm(&ramp, &Palette::default(), 4).map_err(|e| e.to_string())?;
    ensure(bytes == GOLDEN, "ramp render differs from golden file")?;

    let constant = Heatmap9x9::new([[-2.5; 9]; 9], 0);
    let raster = Raster::from_ppm(
        &render_ppm(&constant, &Palette::default(), 4).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        raster.pixels.chunks(3).all(|px| px == [255, 128, 0]),
        "constant map not midpoint",
    )?;
    Ok(format!(
        "{} bytes match golden; constant map uniform (255,128,0)",
        bytes.len()
    ))
}

/// 8. Sigmoid identities, zero-network forward pass, reshape/flatten.
fn math_unit_checks() -> Outcome {
    ensure(sigmoid(0.0, 1.0) == 0.5, "sigmoid(0) != 0.5")?;
    ensure(
        (sigmoid(3f64.ln(), 1.0) - 0.75).abs() <= 1e-12,
        "sigmoid(ln 3) != 0.75",
    )?;
    for i in -100..=100 {
        let x = f64::from(i) * 0.1;
        ensure(
            (sigmoid(-x, 1.0) - (1.0 - sigmoid(x, 1.0))).abs() <= 1e-12,
            format!("symmetry at {x}"),
        )?;
    }
    let zero = Mlp::zeros(81, 6, 26, 1.0).map_err(|e| e.to_string())?;
    for g in builtin_alphabet() {
        let t = zero.forward(&g.flatten()).map_err(|e| e.to_string())?;
        ensure(
            t.hidden_act.iter().chain(&t.output_act).all(|&a| a == 0.5),
            "zero network activation != 0.5",
        )?;
    }
    let mut rng = seeded_rng(8);
    for _ in 0..20 {
        let mut grid: Grid = [[0; 9]; 9];
        grid.iter_mut()
            .flatten()
            .for_each(|p| *p = rng.gen_range(0..=1));
        let back = reshape(&flatten(&grid)).map_err(|e| e.to_string())?;
        ensure(
            back == grid.map(|row| row.map(f64::from)),
            "reshape(flatten(grid)) != grid",
        )?;
    }
    Ok("sigmoid identities, zero forward, 20 reshape round trips".into())
}

/// 9. Experiment-2 overlay counts per set and shared initial weights.
fn exp2_manifest() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let result = run(&["exp2", "--seed", "3", "--out", out]);
    ensure(
        result.status.success(),
        String::from_utf8_lossy(&result.stderr).to_string(),
    )?;
    let files = tree(&dir.path().join("exp2"));
    let hidden = 6;
    let sizes = [
        ('A', 2),
        ('B', 3),
        ('C', 2),
        ('E', 3),
        ('I', 4),
        ('K', 3),
        ('L', 2),
        ('M', 2),
        ('O', 3),
        ('V', 2),
    ];
    for condition in ["clean", "noise10"] {
        for (set, size) in sizes {
            let prefix = format!("{condition}/{set}/");
            let overlays = files
                .keys()
                .filter(|k| k.starts_with(&prefix) && k.contains("_node") && k.ends_with(".ppm"))
                .count();
            ensure(
                overlays == hidden * size,
                format!(
                    "{condition}/{set}: {overlays} overlays, expected {}",
                    hidden * size
                ),
            )?;
        }
    }
    let manifest = String::from_utf8(files["manifest.txt"].clone()).map_err(|e| e.to_string())?;
    let clean = manifest_note(&manifest, "initial_weights_sha256.clean");
    let noisy = manifest_note(&manifest, "initial_weights_sha256.noise10");
    ensure(
        clean.is_some() && clean == noisy,
        "initial weight hashes differ or missing",
    )?;
    let summary = |c: &str| String::from_utf8(files[&format!("{c}/summary.txt")].clone()).unwrap();
    let line = format!("initial_weights_sha256={}\n", clean.clone().unwrap());
    ensure(
        summary("clean").starts_with(&line) && summary("noise10").starts_with(&line),
        "summaries log different initial hashes",
    )?;
    Ok(format!(
        "overlay counts 6x(2,3,2,3,4,3,2,2,3,2) per condition; shared init {}",
        &clean.unwrap()[..12]
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("gradient oracle", gradient_oracle),
        ("experiment-2 trainability", exp2_trainability),
        ("stopping semantics", stopping_semantics),
        ("determinism", determinism),
        ("noise statistics", noise_statistics),
        ("feature-set integrity", feature_set_integrity),
        ("render bit-exactness", render_bit_exactness),
        ("math unit checks", math_unit_checks),
        ("experiment-2 artifact manifest", exp2_manifest),
    ];
    let mut failures = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(why) => {
                println!("[FAIL] {}. {name}: {why}", i + 1);
                failures.push(format!("{}. {name}", i + 1));
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
