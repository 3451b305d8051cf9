//! The 81-H-K sigmoid network.
//!
//! Parameters live in flat row-major buffers. The canonical parameter order
//! (used by initialisation, gradients and the finite-difference oracle) is
//! `w1` row by row, then `b1`, then `w2` row by row, then `b2`.

use std::fmt::Write as _;

use rand::Rng;

use crate::error::{check_len, Error, Result};
use crate::glyphs::INPUT_COUNT;

pub const DEFAULT_HIDDEN: usize = 6;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const INIT_RANGE: f64 = 0.5;

/// Logistic sigmoid with slope `alpha`, evaluated without overflow for
/// large `|x|`.
pub fn sigmoid(x: f64, alpha: f64) -> f64 {
    let z = alpha * x;
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the sigmoid expressed through its output `s`.
pub fn sigmoid_slope(s: f64, alpha: f64) -> f64 {
    alpha * s * (1.0 - s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    inputs: usize,
    hidden: usize,
    outputs: usize,
    alpha: f64,
    /// hidden x inputs
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    /// outputs x hidden
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

/// Everything computed by one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pub hidden_net: Vec<f64>,
    pub hidden_act: Vec<f64>,
    pub output_net: Vec<f64>,
    pub output_act: Vec<f64>,
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(inputs: usize, hidden: usize, outputs: usize, alpha: f64) -> Result<Self> {
        Self::from_parts(
            inputs,
            alpha,
            vec![0.0; hidden * inputs],
            vec![0.0; hidden],
            vec![0.0; outputs * hidden],
            vec![0.0; outputs],
        )
    }

    /// Assemble a network from flat row-major weight buffers; the layer sizes
    /// are read off `b1` and `b2`.
    pub fn from_parts(
        inputs: usize,
        alpha: f64,
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self> {
        let hidden = b1.len();
        let outputs = b2.len();
        if inputs == 0 || hidden == 0 || outputs == 0 {
            return Err(Error::Argument(format!(
                "layer sizes must be positive, got {inputs}-{hidden}-{outputs}"
            )));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Argument(format!(
                "sigmoid slope must be positive, got {alpha}"
            )));
        }
        check_len("w1", hidden * inputs, w1.len())?;
        check_len("w2", outputs * hidden, w2.len())?;
        let net = Mlp {
            inputs,
            hidden,
            outputs,
            alpha,
            w1,
            b1,
            w2,
            b2,
        };
        if net.params().any(|p| !p.is_finite()) {
            return Err(Error::Argument("network parameters must be finite".into()));
        }
        Ok(net)
    }

    /// Every parameter drawn independently from U[-0.5, 0.5] in canonical order.
    pub fn random<R: Rng + ?Sized>(
        inputs: usize,
        hidden: usize,
        outputs: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(inputs, hidden, outputs, DEFAULT_ALPHA)?;
        for i in 0..net.param_count() {
            net.set_param(i, rng.gen_range(-INIT_RANGE..=INIT_RANGE));
        }
        Ok(net)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Argument(format!(
                "sigmoid slope must be positive, got {alpha}"
            )));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn w1(&self) -> &[f64] {
        &self.w1
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn w2(&self) -> &[f64] {
        &self.w2
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    /// Input weights feeding hidden node `node`.
    pub fn hidden_weights(&self, node: usize) -> Result<&[f64]> {
        if node >= self.hidden {
            return Err(Error::Argument(format!(
                "hidden node {node} out of range (network has {})",
                self.hidden
            )));
        }
        Ok(&self.w1[node * self.inputs..(node + 1) * self.inputs])
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// Parameters in canonical order.
    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .copied()
    }

    fn slot_mut(&mut self, mut i: usize) -> &mut f64 {
        for buf in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            if i < buf.len() {
                return &mut buf[i];
            }
            i -= buf.len();
        }
        panic!("parameter index out of range");
    }

    pub fn param(&self, i: usize) -> f64 {
        self.params().nth(i).expect("parameter index out of range")
    }

    pub fn set_param(&mut self, i: usize, value: f64) {
        *self.slot_mut(i) = value;
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        check_len("input", self.inputs, input.len())?;
        let hidden_net: Vec<f64> = self
            .w1
            .chunks_exact(self.inputs)
            .zip(&self.b1)
            .map(|(row, b)| dot(row, input) + b)
            .collect();
        let hidden_act: Vec<f64> = hidden_net.iter().map(|&n| sigmoid(n, self.alpha)).collect();
        let output_net: Vec<f64> = self
            .w2
            .chunks_exact(self.hidden)
            .zip(&self.b2)
            .map(|(row, b)| dot(row, &hidden_act) + b)
            .collect();
        let output_act = output_net.iter().map(|&n| sigmoid(n, self.alpha)).collect();
        Ok(ForwardTrace {
            input: input.to_vec(),
            hidden_net,
            hidden_act,
            output_net,
            output_act,
        })
    }

    /// Text persistence: `inputs hidden outputs alpha`, then one line per
    /// `w1` row, `b1`, one line per `w2` row, `b2`. Values use the shortest
    /// decimal form that parses back to the same bits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{} {} {} {}",
            self.inputs, self.hidden, self.outputs, self.alpha
        )
        .unwrap();
        let mut line = |vals: &[f64]| {
            let parts: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        };
        self.w1.chunks_exact(self.inputs).for_each(&mut line);
        line(&self.b1);
        self.w2.chunks_exact(self.hidden).for_each(&mut line);
        line(&self.b2);
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::WeightFormat { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty weight file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(
                1,
                "header must be `inputs hidden outputs alpha`".into(),
            ));
        }
        let dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| err(1, format!("bad layer size {s:?}: {e}")))
        };
        let (inputs, hidden, outputs) = (dim(fields[0])?, dim(fields[1])?, dim(fields[2])?);
        let alpha: f64 = fields[3]
            .parse()
            .map_err(|e| err(1, format!("bad alpha {:?}: {e}", fields[3])))?;

        let mut row = |expected: usize| -> Result<Vec<f64>> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| err(0, "unexpected end of weight file".into()))?;
            let vals = line
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(no, e.to_string()))?;
            if vals.len() != expected {
                return Err(err(
                    no,
                    format!("expected {expected} values, found {}", vals.len()),
                ));
            }
            Ok(vals)
        };

        let mut w1 = Vec::with_capacity(hidden * inputs);
        for _ in 0..hidden {
            w1.extend(row(inputs)?);
        }
        let b1 = row(hidden)?;
        let mut w2 = Vec::with_capacity(outputs * hidden);
        for _ in 0..outputs {
            w2.extend(row(hidden)?);
        }
        let b2 = row(outputs)?;
        if let Some((no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(err(no, format!("trailing data {extra:?}")));
        }
        Self::from_parts(inputs, alpha, w1, b1, w2, b2)
    }
}

/// Random 81-input network with the default slope.
pub fn init_random<R: Rng + ?Sized>(hidden: usize, outputs: usize, rng: &mut R) -> Result<Mlp> {
    Mlp::random(INPUT_COUNT, hidden, outputs, rng)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glyphs::builtin_alphabet;
    use crate::seeded_rng;

    fn tiny() -> Mlp {
        Mlp::from_parts(
            2,
            1.0,
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0],
        )
        .unwrap()
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0, 1.0), 0.5);
        assert!((sigmoid(3f64.ln(), 1.0) - 0.75).abs() <= 1e-12);
        for i in -40..=40 {
            let x = i as f64 * 0.37;
            for alpha in [0.5, 1.0, 2.0] {
                let s = sigmoid(x, alpha);
                assert!((sigmoid(-x, alpha) - (1.0 - s)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sigmoid_extremes_stay_finite() {
        for x in [-800.0, -500.0, 500.0, 800.0] {
            let s = sigmoid(x, 1.0);
            assert!(s.is_finite() && (0.0..=1.0).contains(&s));
        }
        assert!(sigmoid(-500.0, 1.0) > 0.0);
    }

    #[test]
    fn sigmoid_slope_matches_central_difference() {
        let h = 1e-5;
        for alpha in [1.0, 0.7] {
            for x in [-4.0, -1.0, 0.0, 1.0, 4.0] {
                let numeric = (sigmoid(x + h, alpha) - sigmoid(x - h, alpha)) / (2.0 * h);
                let analytic = sigmoid_slope(sigmoid(x, alpha), alpha);
                let rel = (numeric - analytic).abs() / analytic.abs();
                assert!(rel <= 1e-6, "x={x} alpha={alpha} rel={rel}");
            }
        }
    }

    #[test]
    fn sigmoid_is_strictly_increasing() {
        let mut prev = sigmoid(-30.0, 1.0);
        for i in -299..=300 {
            let s = sigmoid(i as f64 * 0.1, 1.0);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = init_random(6, 10, &mut seeded_rng(1)).unwrap();
        let b = init_random(6, 10, &mut seeded_rng(1)).unwrap();
        let c = init_random(6, 10, &mut seeded_rng(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.param_count(), 6 * 81 + 6 + 10 * 6 + 10);
        assert!(a.params().all(|p| (-0.5..=0.5).contains(&p)));
    }

    #[test]
    fn init_draw_order_is_canonical() {
        use rand::Rng as _;
        let net = Mlp::random(3, 2, 2, &mut seeded_rng(5)).unwrap();
        let mut rng = seeded_rng(5);
        let draws: Vec<f64> = (0..net.param_count())
            .map(|_| rng.gen_range(-0.5..=0.5))
            .collect();
        assert_eq!(&draws[..6], net.w1());
        assert_eq!(&draws[6..8], net.b1());
        assert_eq!(&draws[8..12], net.w2());
        assert_eq!(&draws[12..], net.b2());
    }

    #[test]
    fn zero_network_outputs_half() {
        let net = Mlp::zeros(81, 6, 26, 1.0).unwrap();
        let trace = net.forward(&builtin_alphabet()[4].flatten()).unwrap();
        assert!(trace.hidden_act.iter().all(|&a| a == 0.5));
        assert!(trace.output_act.iter().all(|&a| a == 0.5));
    }

    #[test]
    fn hand_built_network() {
        let trace = tiny().forward(&[0.0, 0.0]).unwrap();
        assert_eq!(trace.hidden_act, vec![0.5, 0.5]);
        assert_eq!(trace.output_net, vec![1.0]);
        assert!((trace.output_act[0] - 0.7310585786300049).abs() < 1e-12);
    }

    #[test]
    fn forward_trace_is_consistent() {
        let net = init_random(6, 10, &mut seeded_rng(8)).unwrap();
        let x = builtin_alphabet()[17].flatten();
        let t = net.forward(&x).unwrap();
        assert_eq!(t, net.forward(&x).unwrap());
        for (n, a) in t.hidden_net.iter().zip(&t.hidden_act) {
            assert_eq!(*a, sigmoid(*n, net.alpha()));
        }
        assert!(t
            .hidden_act
            .iter()
            .chain(&t.output_act)
            .all(|&a| a > 0.0 && a < 1.0));
    }

    #[test]
    fn alpha_keeps_argmax() {
        let net = init_random(6, 26, &mut seeded_rng(4)).unwrap();
        let x = builtin_alphabet()[2].flatten();
        let argmax = |v: &[f64]| {
            v.iter()
                .enumerate()
                .fold(0, |best, (i, &a)| if a > v[best] { i } else { best })
        };
        // scaling alpha changes hidden activations too, so compare against
        // the output nets of each network
        for alpha in [0.25, 1.0, 3.0] {
            let net = net.clone().with_alpha(alpha).unwrap();
            let t = net.forward(&x).unwrap();
            assert_eq!(argmax(&t.output_act), argmax(&t.output_net));
        }
    }

    #[test]
    fn dimension_errors() {
        let net = tiny();
        assert!(matches!(
            net.forward(&[0.0; 3]),
            Err(Error::Dimension {
                expected: 2,
                actual: 3,
                ..
            })
        ));
        assert!(
            Mlp::from_parts(2, 1.0, vec![0.0; 3], vec![0.0; 2], vec![0.0; 2], vec![0.0]).is_err()
        );
        assert!(Mlp::zeros(2, 2, 1, 0.0).is_err());
        assert!(Mlp::zeros(2, 0, 1, 1.0).is_err());
        assert!(net.hidden_weights(2).is_err());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let net = init_random(6, 26, &mut seeded_rng(11)).unwrap();
        let text = net.to_text();
        assert!(text.starts_with("81 6 26 1\n"));
        assert_eq!(text.lines().count(), 1 + 6 + 1 + 26 + 1);
        let back = Mlp::from_text(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_load_validates() {
        let text = tiny().to_text();
        assert!(Mlp::from_text("").is_err());
        assert!(Mlp::from_text(&text.replacen("2 2 1", "2 3 1", 1)).is_err());
        let short: String = text.lines().take(3).map(|l| format!("{l}\n")).collect();
        assert!(Mlp::from_text(&short).is_err());
        assert!(Mlp::from_text(&format!("{text}1 2\n")).is_err());
        let e = Mlp::from_text(&text.replacen("1 0", "1 x", 1)).unwrap_err();
        assert!(matches!(e, Error::WeightFormat { line: 2, .. }), "{e:?}");
    }
}
