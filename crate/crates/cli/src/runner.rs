//! End-to-end experiment drivers.
//!
//! Layout under `--out`:
//!
//! ```text
//! exp1/weights.txt  sse_curve.txt  activations.txt  strong_letters.txt
//! exp1/node{j}.ppm  exp1/montage_nodes.ppm  exp1/manifest.txt
//! exp2/feature_sets.txt  exp2/accuracy.txt  exp2/manifest.txt
//! exp2/{condition}/weights.txt  sse_curve.txt  summary.txt
//! exp2/{condition}/{set}/{letter}_node{j}.ppm  montage_{letter}.ppm
//! ```
//!
//! Hidden nodes are numbered from 1 in file names. Conditions are `clean`
//! and `noise{percent}`.

use std::fmt::Write as _;
use std::fs;

use letternet::analysis::{
    activation_table, letter_overlay_heatmap, strong_letters_report, weight_heatmap,
};
use letternet::featuresets::{builtin_feature_sets, feature_set_samples, letter_samples};
use letternet::glyphs::{builtin_alphabet, parse_font};
use letternet::mlp::init_random;
use letternet::render::{render_montage, render_ppm, Palette, Raster};
use letternet::trainer::gradcheck::{self, GradCheckReport, GradientFn};
use letternet::trainer::{noisy_accuracy, train, TrainReport};
use letternet::{seeded_rng, Glyph, Mlp};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::manifest::{sha256_hex, ArtifactWriter, Manifest};

/// Offset added to the run seed for the noisy-evaluation random stream.
pub const EVAL_SEED_OFFSET: u64 = 0x9E37_79B9;

/// The built-in alphabet, or a font file that must define all of A to Z.
pub fn load_alphabet(config: &RunConfig) -> Result<Vec<Glyph>> {
    let Some(path) = &config.font_path else {
        return Ok(builtin_alphabet());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut glyphs = parse_font(&text)?;
    if glyphs.len() != 26 {
        return Err(CliError::Validation(format!(
            "{} defines {} letters, a complete alphabet needs 26",
            path.display(),
            glyphs.len()
        )));
    }
    glyphs.sort_by_key(Glyph::letter);
    Ok(glyphs)
}

fn ppm(writer: &mut ArtifactWriter, rel: &str, bytes: Vec<u8>) -> Result<()> {
    Raster::from_ppm(&bytes)?;
    writer.write(rel, &bytes)
}

fn summary_text(init_hash: &str, report: &TrainReport, noisy_acc: Option<f64>) -> String {
    let mut out = String::new();
    writeln!(out, "initial_weights_sha256={init_hash}").unwrap();
    writeln!(out, "epochs_run={}", report.epochs_run).unwrap();
    writeln!(out, "converged={}", report.converged).unwrap();
    writeln!(out, "final_sse={}", report.final_sse).unwrap();
    writeln!(out, "clean_accuracy={}", report.final_accuracy).unwrap();
    if let Some(acc) = noisy_acc {
        writeln!(out, "noisy_accuracy={acc}").unwrap();
    }
    out
}

/// Letter-identity network: weight heatmaps per hidden node and the
/// node-to-letter activation analysis.
pub fn run_experiment1(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let glyphs = load_alphabet(config)?;
    let data = letter_samples(&glyphs);
    let mut net = init_random(config.hidden_count, 26, &mut seeded_rng(config.seed))?;
    let init_hash = sha256_hex(net.to_text().as_bytes());
    let report = train(&mut net, &data, &config.train_config(config.noise_rate))?;

    let mut w = ArtifactWriter::new(config.output_dir.join("exp1"))?;
    for line in config.to_key_values().lines() {
        let (k, v) = line.split_once('=').expect("key=value");
        if k != "out" {
            w.note(k, v);
        }
    }
    w.note("initial_weights_sha256", &init_hash);
    w.note("epochs_run", report.epochs_run.to_string());
    w.note("converged", report.converged.to_string());
    w.note("final_sse", report.final_sse.to_string());
    w.note("clean_accuracy", report.final_accuracy.to_string());

    w.write("weights.txt", net.to_text().as_bytes())?;
    w.write("sse_curve.txt", report.to_table().as_bytes())?;
    let table = activation_table(&net, &glyphs)?;
    w.write("activations.txt", table.report().as_bytes())?;
    w.write(
        "strong_letters.txt",
        strong_letters_report(&table, config.threshold)?.as_bytes(),
    )?;

    let palette = Palette::default();
    let maps = (0..config.hidden_count)
        .map(|j| Ok(weight_heatmap(&net, j)?.with_tag("exp1")))
        .collect::<Result<Vec<_>>>()?;
    for (j, map) in maps.iter().enumerate() {
        ppm(
            &mut w,
            &format!("node{}.ppm", j + 1),
            render_ppm(map, &palette, config.cell_size)?,
        )?;
    }
    ppm(
        &mut w,
        "montage_nodes.ppm",
        render_montage(&maps, &palette, config.cell_size, config.gap)?,
    )?;
    w.finish()
}

pub fn condition_name(noise_rate: f64) -> String {
    if noise_rate == 0.0 {
        "clean".to_string()
    } else {
        format!("noise{}", (noise_rate * 100.0).round() as u64)
    }
}

struct ConditionResult {
    name: String,
    noise_rate: f64,
    init_hash: String,
    report: TrainReport,
    noisy_accuracy: f64,
}

/// Feature-set network trained twice from identical initial weights, once
/// on clean presentations and once with pixel noise.
pub fn run_experiment2(config: &RunConfig) -> Result<Manifest> {
    config.validate()?;
    let glyphs = load_alphabet(config)?;
    let table = builtin_feature_sets();
    let data = feature_set_samples(&glyphs, &table)?;
    let initial = init_random(
        config.hidden_count,
        table.len(),
        &mut seeded_rng(config.seed),
    )?;

    let mut w = ArtifactWriter::new(config.output_dir.join("exp2"))?;
    for line in config.to_key_values().lines() {
        let (k, v) = line.split_once('=').expect("key=value");
        if k != "out" {
            w.note(k, v);
        }
    }
    w.write("feature_sets.txt", table.report().as_bytes())?;

    let palette = Palette::default();
    let mut results = Vec::new();
    for noise_rate in [0.0, config.noise_rate] {
        let name = condition_name(noise_rate);
        let mut net: Mlp = initial.clone();
        let init_hash = sha256_hex(net.to_text().as_bytes());
        let report = train(&mut net, &data, &config.train_config(noise_rate))?;
        let noisy = noisy_accuracy(
            &net,
            &data,
            config.noise_rate,
            config.noisy_eval_copies,
            &mut seeded_rng(config.seed.wrapping_add(EVAL_SEED_OFFSET)),
        )?;

        w.write(&format!("{name}/weights.txt"), net.to_text().as_bytes())?;
        w.write(
            &format!("{name}/sse_curve.txt"),
            report.to_table().as_bytes(),
        )?;
        w.write(
            &format!("{name}/summary.txt"),
            summary_text(&init_hash, &report, Some(noisy)).as_bytes(),
        )?;

        for set in table.sets() {
            for &letter in &set.letters {
                let glyph = glyphs
                    .iter()
                    .find(|g| g.letter() == letter)
                    .expect("alphabet is complete");
                let maps = (0..config.hidden_count)
                    .map(|j| Ok(letter_overlay_heatmap(&net, j, glyph)?.with_tag(name.clone())))
                    .collect::<Result<Vec<_>>>()?;
                for (j, map) in maps.iter().enumerate() {
                    ppm(
                        &mut w,
                        &format!("{name}/{}/{letter}_node{}.ppm", set.label, j + 1),
                        render_ppm(map, &palette, config.cell_size)?,
                    )?;
                }
                ppm(
                    &mut w,
                    &format!("{name}/{}/montage_{letter}.ppm", set.label),
                    render_montage(&maps, &palette, config.cell_size, config.gap)?,
                )?;
            }
        }
        w.note(format!("initial_weights_sha256.{name}"), &init_hash);
        results.push(ConditionResult {
            name,
            noise_rate,
            init_hash,
            report,
            noisy_accuracy: noisy,
        });
    }

    if results[0].init_hash != results[1].init_hash {
        return Err(CliError::Validation(
            "conditions started from different weights".into(),
        ));
    }

    let mut acc = format!(
        "condition train_noise epochs converged final_sse clean_accuracy noisy_accuracy(rate {}, {} copies)\n",
        config.noise_rate, config.noisy_eval_copies
    );
    for r in &results {
        writeln!(
            acc,
            "{} {} {} {} {:.6} {:.4} {:.4}",
            r.name,
            r.noise_rate,
            r.report.epochs_run,
            r.report.converged,
            r.report.final_sse,
            r.report.final_accuracy,
            r.noisy_accuracy
        )
        .unwrap();
    }
    w.write("accuracy.txt", acc.as_bytes())?;
    w.finish()
}

/// Analytic-versus-numeric gradient check. Errors with a validation
/// failure when either scale exceeds tolerance.
pub fn run_gradcheck(seed: u64, instances: usize, gradient: GradientFn) -> Result<GradCheckReport> {
    if instances == 0 {
        return Err(CliError::Usage("--instances must be at least 1".into()));
    }
    Ok(gradcheck::run(seed, instances, gradient)?)
}

pub fn gradcheck_summary(report: &GradCheckReport) -> String {
    let mut out = String::new();
    for s in &report.scales {
        writeln!(
            out,
            "{:<8} instances={} max_relative_error={:.3e} max_absolute_error={:.3e} {}",
            s.scale.label(),
            s.instances,
            s.worst.max_relative,
            s.worst.max_absolute,
            if s.worst.within_tolerance() {
                "ok"
            } else {
                "FAIL"
            }
        )
        .unwrap();
    }
    let worst = report.worst();
    writeln!(
        out,
        "max relative error {:.3e} (tolerance {:e})",
        worst.max_relative,
        gradcheck::REL_TOLERANCE
    )
    .unwrap();
    out
}

/// Print the summary and map the outcome to an exit code.
pub fn gradcheck_exit(seed: u64, instances: usize, gradient: GradientFn) -> i32 {
    match run_gradcheck(seed, instances, gradient) {
        Ok(report) => {
            print!("{}", gradcheck_summary(&report));
            if report.passed() {
                0
            } else {
                eprintln!("gradient check exceeded tolerance");
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
