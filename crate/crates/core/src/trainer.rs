//! Online backpropagation on the total sum of squared errors.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::featuresets::Sample;
use crate::glyphs::apply_noise;
use crate::mlp::{dot, sigmoid, sigmoid_slope, Mlp};
use crate::seeded_rng;

pub mod gradcheck;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub max_epochs: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub noise_rate: f64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.5,
            max_epochs: 5000,
            epsilon: 0.01,
            seed: 1,
            noise_rate: 0.0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Argument(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::Argument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Argument("max_epochs must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Argument(format!(
                "noise rate must be in [0, 1], got {}",
                self.noise_rate
            )));
        }
        Ok(())
    }
}

/// Partial derivatives of the error, laid out like the network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            w1: vec![0.0; net.w1().len()],
            b1: vec![0.0; net.b1().len()],
            w2: vec![0.0; net.w2().len()],
            b2: vec![0.0; net.b2().len()],
        }
    }

    /// Values in the network's canonical parameter order.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .copied()
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn from_flat(net: &Mlp, flat: Vec<f64>) -> Self {
        let mut g = Self::zeros_like(net);
        let mut it = flat.into_iter();
        for buf in [&mut g.w1, &mut g.b1, &mut g.w2, &mut g.b2] {
            buf.iter_mut().for_each(|v| *v = it.next().unwrap());
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub converged: bool,
    /// Total clean-data SSE after each epoch.
    pub sse_curve: Vec<f64>,
    pub final_sse: f64,
    pub final_accuracy: f64,
}

impl TrainReport {
    /// Two-column `epoch sse` table, epochs counted from 1.
    pub fn to_table(&self) -> String {
        let mut out = String::from("epoch sse\n");
        for (i, sse) in self.sse_curve.iter().enumerate() {
            writeln!(out, "{} {}", i + 1, sse).unwrap();
        }
        out
    }
}

fn check_sample(net: &Mlp, input: &[f64], target: &[f64]) -> Result<()> {
    check_len("input", net.inputs(), input.len())?;
    check_len("target", net.outputs(), target.len())
}

/// Squared error of one pattern, Σ_k (t_k - o_k)².
pub fn pattern_sse(net: &Mlp, input: &[f64], target: &[f64]) -> Result<f64> {
    check_sample(net, input, target)?;
    let out = net.forward(input)?.output_act;
    Ok(out.iter().zip(target).map(|(o, t)| (t - o).powi(2)).sum())
}

/// Total sum of squared errors over every pattern and output; no ½, no mean.
pub fn sse(net: &Mlp, dataset: &[Sample]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    dataset
        .iter()
        .map(|s| pattern_sse(net, &s.input, &s.target))
        .sum()
}

pub fn backprop_gradients(net: &Mlp, input: &[f64], target: &[f64]) -> Result<Gradients> {
    check_sample(net, input, target)?;
    let trace = net.forward(input)?;
    let alpha = net.alpha();
    let (hidden, inputs) = (net.hidden(), net.inputs());

    let out_delta: Vec<f64> = trace
        .output_act
        .iter()
        .zip(target)
        .map(|(&o, &t)| -2.0 * (t - o) * sigmoid_slope(o, alpha))
        .collect();

    let mut g = Gradients::zeros_like(net);
    for (k, &d) in out_delta.iter().enumerate() {
        let row = &mut g.w2[k * hidden..(k + 1) * hidden];
        for (w, &h) in row.iter_mut().zip(&trace.hidden_act) {
            *w = d * h;
        }
        g.b2[k] = d;
    }

    for (j, &h) in trace.hidden_act.iter().enumerate() {
        let back: f64 = out_delta
            .iter()
            .enumerate()
            .map(|(k, d)| d * net.w2()[k * hidden + j])
            .sum();
        let d = back * sigmoid_slope(h, alpha);
        let row = &mut g.w1[j * inputs..(j + 1) * inputs];
        for (w, &x) in row.iter_mut().zip(input) {
            *w = d * x;
        }
        g.b1[j] = d;
    }
    Ok(g)
}

/// Central-difference estimate `(E(θ+h) − E(θ−h)) / 2h` of every partial
/// derivative of the single-pattern SSE. Independent of
/// [`backprop_gradients`]: only forward evaluations are used.
///
/// The two perturbed networks are evaluated side by side and their
/// difference is carried through each layer instead of being formed by
/// subtracting two nearly equal errors at the end. See [`PairedForward`].
/// The quotient divides by the step actually representable at the
/// parameter's magnitude.
pub fn finite_diff_gradients(
    net: &Mlp,
    input: &[f64],
    target: &[f64],
    step: f64,
) -> Result<Gradients> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Argument(format!(
            "step must be positive, got {step}"
        )));
    }
    check_sample(net, input, target)?;
    let mut up = net.clone();
    let mut down = net.clone();
    let mut flat = Vec::with_capacity(net.param_count());
    for (i, theta) in net.params().enumerate() {
        up.set_param(i, theta + step);
        down.set_param(i, theta - step);
        let pair = PairedForward::new(&up, &down, input);
        let error_diff: f64 = pair
            .out_up
            .iter()
            .zip(&pair.out_down)
            .zip(&pair.out_diff)
            .zip(target)
            .map(|(((p, m), d), t)| -d * (2.0 * t - p - m))
            .sum();
        flat.push(error_diff / (up.param(i) - down.param(i)));
        up.set_param(i, theta);
        down.set_param(i, theta);
    }
    Ok(Gradients::from_flat(net, flat))
}

/// Outputs of two same-shaped networks on one input, plus their difference
/// computed without cancellation.
///
/// Each linear layer forms `W⁺a⁺ − W⁻a⁻` as `W⁺(a⁺ − a⁻) + (W⁺ − W⁻)a⁻`, and
/// each sigmoid difference uses `σ(u) − σ(v) = σ(u)·σ(−v)·(1 − e^{v−u})`
/// with `expm1`, so a perturbation of size `h` yields an output difference
/// accurate to working precision rather than to `ε/h`.
#[derive(Debug, Clone)]
pub struct PairedForward {
    pub out_up: Vec<f64>,
    pub out_down: Vec<f64>,
    /// `out_up − out_down`
    pub out_diff: Vec<f64>,
}

impl PairedForward {
    /// Both networks must share the shape and slope of the first.
    pub fn new(up: &Mlp, down: &Mlp, input: &[f64]) -> Self {
        let alpha = up.alpha();
        let input_diff = vec![0.0; input.len()];
        let (h_up, h_down, h_diff) = paired_layer(
            (&up.w1, &up.b1),
            (&down.w1, &down.b1),
            (input, input, &input_diff),
            alpha,
        );
        let (out_up, out_down, out_diff) = paired_layer(
            (&up.w2, &up.b2),
            (&down.w2, &down.b2),
            (&h_up, &h_down, &h_diff),
            alpha,
        );
        PairedForward {
            out_up,
            out_down,
            out_diff,
        }
    }
}

type Layer<'a> = (&'a [f64], &'a [f64]);

fn paired_layer(
    (w_up, b_up): Layer<'_>,
    (w_down, b_down): Layer<'_>,
    (a_up, a_down, a_diff): (&[f64], &[f64], &[f64]),
    alpha: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let width = a_up.len();
    let mut up = Vec::with_capacity(b_up.len());
    let mut down = Vec::with_capacity(b_up.len());
    let mut diff = Vec::with_capacity(b_up.len());
    for (k, (&bu, &bd)) in b_up.iter().zip(b_down).enumerate() {
        let row_up = &w_up[k * width..(k + 1) * width];
        let row_down = &w_down[k * width..(k + 1) * width];
        let z_up = dot(row_up, a_up) + bu;
        let z_down = dot(row_down, a_down) + bd;
        let z_diff: f64 = row_up
            .iter()
            .zip(row_down)
            .zip(a_diff.iter().zip(a_down))
            .map(|((wu, wd), (da, ad))| wu * da + (wu - wd) * ad)
            .sum::<f64>()
            + (bu - bd);
        let (u, v) = (alpha * z_up, alpha * z_down);
        up.push(sigmoid(z_up, alpha));
        down.push(sigmoid(z_down, alpha));
        diff.push(sigmoid(u, 1.0) * sigmoid(-v, 1.0) * -(-alpha * z_diff).exp_m1());
    }
    (up, down, diff)
}

/// θ ← θ − eta·g for every parameter.
pub fn apply_gradients(net: &mut Mlp, grads: &Gradients, eta: f64) {
    let step = |p: &mut [f64], g: &[f64]| p.iter_mut().zip(g).for_each(|(p, g)| *p -= eta * g);
    step(&mut net.w1, &grads.w1);
    step(&mut net.b1, &grads.b1);
    step(&mut net.w2, &grads.w2);
    step(&mut net.b2, &grads.b2);
}

/// Train with a random source seeded from `config.seed`.
pub fn train(net: &mut Mlp, dataset: &[Sample], config: &TrainConfig) -> Result<TrainReport> {
    train_with_rng(net, dataset, config, &mut seeded_rng(config.seed))
}

/// Online training. Each epoch shuffles the presentation order (when
/// enabled), updates after every pattern, then records the SSE on the clean
/// dataset and stops once it is at most `epsilon`.
///
/// Random draws per epoch: one Fisher-Yates shuffle, then 81 noise draws
/// per presentation when `noise_rate > 0`.
pub fn train_with_rng<R: Rng + ?Sized>(
    net: &mut Mlp,
    dataset: &[Sample],
    config: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    for s in dataset {
        check_sample(net, &s.input, &s.target)?;
    }

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut sse_curve = Vec::new();
    for _ in 0..config.max_epochs {
        if config.shuffle {
            order.shuffle(rng);
        }
        for &i in &order {
            let sample = &dataset[i];
            let grads = if config.noise_rate > 0.0 {
                let noisy = apply_noise(&sample.input, config.noise_rate, rng)?;
                backprop_gradients(net, &noisy, &sample.target)?
            } else {
                backprop_gradients(net, &sample.input, &sample.target)?
            };
            apply_gradients(net, &grads, config.eta);
        }
        let total = sse(net, dataset)?;
        sse_curve.push(total);
        if total <= config.epsilon {
            break;
        }
    }

    let final_sse = *sse_curve.last().expect("at least one epoch");
    Ok(TrainReport {
        epochs_run: sse_curve.len(),
        converged: final_sse <= config.epsilon,
        sse_curve,
        final_sse,
        final_accuracy: accuracy(net, dataset)?,
    })
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

pub fn classify(net: &Mlp, input: &[f64]) -> Result<usize> {
    Ok(argmax(&net.forward(input)?.output_act))
}

/// Fraction of samples whose predicted class equals the target's hot index.
pub fn accuracy(net: &Mlp, dataset: &[Sample]) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::Argument("dataset is empty".into()));
    }
    let mut correct = 0usize;
    for s in dataset {
        check_sample(net, &s.input, &s.target)?;
        if classify(net, &s.input)? == s.hot_index() {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Accuracy on `copies` fresh noisy presentations of every sample.
pub fn noisy_accuracy<R: Rng + ?Sized>(
    net: &Mlp,
    dataset: &[Sample],
    rate: f64,
    copies: usize,
    rng: &mut R,
) -> Result<f64> {
    if dataset.is_empty() || copies == 0 {
        return Err(Error::Argument("nothing to evaluate".into()));
    }
    let mut correct = 0usize;
    for _ in 0..copies {
        for s in dataset {
            let noisy = apply_noise(&s.input, rate, rng)?;
            if classify(net, &noisy)? == s.hot_index() {
                correct += 1;
            }
        }
    }
    Ok(correct as f64 / (copies * dataset.len()) as f64)
}
