//! Analytic-versus-numeric gradient comparison over random instances.

use rand::Rng;

use crate::error::Result;
use crate::featuresets::targets_experiment2;
use crate::mlp::Mlp;
use crate::seeded_rng;
use crate::trainer::{backprop_gradients, finite_diff_gradients, Gradients};

pub const STEP: f64 = 1e-5;
pub const REL_TOLERANCE: f64 = 1e-6;
/// Below this reference magnitude errors are compared absolutely.
pub const ABS_FLOOR: f64 = 1e-8;

/// Signature shared by [`backprop_gradients`] and any substitute under test.
pub type GradientFn = fn(&Mlp, &[f64], &[f64]) -> Result<Gradients>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Discrepancy {
    /// Largest |a - n| / max(|a|, |n|) over parameters with |n| ≥ floor.
    pub max_relative: f64,
    /// Largest |a - n| over parameters with |n| < floor.
    pub max_absolute: f64,
}

impl Discrepancy {
    pub fn within_tolerance(&self) -> bool {
        self.max_relative <= REL_TOLERANCE && self.max_absolute <= ABS_FLOOR
    }

    fn merge(self, other: Discrepancy) -> Discrepancy {
        Discrepancy {
            max_relative: self.max_relative.max(other.max_relative),
            max_absolute: self.max_absolute.max(other.max_absolute),
        }
    }
}

pub fn compare(analytic: &Gradients, numeric: &Gradients) -> Discrepancy {
    analytic
        .iter()
        .zip(numeric.iter())
        .fold(Discrepancy::default(), |acc, (a, n)| {
            let diff = (a - n).abs();
            let d = if n.abs() < ABS_FLOOR {
                Discrepancy {
                    max_relative: 0.0,
                    max_absolute: diff,
                }
            } else {
                Discrepancy {
                    max_relative: diff / a.abs().max(n.abs()),
                    max_absolute: 0.0,
                }
            };
            acc.merge(d)
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// 2-2-1 with real-valued inputs and a 0/1 target.
    Tiny,
    /// 81-6-10 on a glyph from the built-in alphabet with its feature-set target.
    Glyph,
}

impl Scale {
    pub fn label(self) -> &'static str {
        match self {
            Scale::Tiny => "2-2-1",
            Scale::Glyph => "81-6-10",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    pub scale: Scale,
    pub instances: usize,
    pub worst: Discrepancy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub scales: Vec<ScaleReport>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.scales.iter().all(|s| s.worst.within_tolerance())
    }

    pub fn worst(&self) -> Discrepancy {
        self.scales
            .iter()
            .fold(Discrepancy::default(), |acc, s| acc.merge(s.worst))
    }
}

/// One random (network, input, target) triple.
pub fn random_instance<R: Rng + ?Sized>(
    scale: Scale,
    rng: &mut R,
) -> Result<(Mlp, Vec<f64>, Vec<f64>)> {
    match scale {
        Scale::Tiny => {
            let net = Mlp::random(2, 2, 1, rng)?;
            let x = vec![rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)];
            let t = vec![f64::from(rng.gen_range(0..2u8))];
            Ok((net, x, t))
        }
        Scale::Glyph => {
            let net = Mlp::random(81, 6, 10, rng)?;
            let data = targets_experiment2();
            let s = &data[rng.gen_range(0..data.len())];
            Ok((net, s.input.clone(), s.target.clone()))
        }
    }
}

/// Compare `gradient` against central differences on `instances` random
/// instances per scale. Instances are drawn from a source seeded by `seed`.
pub fn run(seed: u64, instances: usize, gradient: GradientFn) -> Result<GradCheckReport> {
    let mut rng = seeded_rng(seed);
    let mut scales = Vec::new();
    for scale in [Scale::Tiny, Scale::Glyph] {
        let mut worst = Discrepancy::default();
        for _ in 0..instances {
            let (net, x, t) = random_instance(scale, &mut rng)?;
            let analytic = gradient(&net, &x, &t)?;
            let numeric = finite_diff_gradients(&net, &x, &t, STEP)?;
            worst = worst.merge(compare(&analytic, &numeric));
        }
        scales.push(ScaleReport {
            scale,
            instances,
            worst,
        });
    }
    Ok(GradCheckReport { scales })
}

/// [`run`] with the real backpropagation.
pub fn check_backprop(seed: u64, instances: usize) -> Result<GradCheckReport> {
    run(seed, instances, backprop_gradients)
}

#[doc(hidden)]
/// Backprop with the sigmoid slope dropped from the output deltas. Test
/// fixture for the checker; never used for training.
pub fn sabotaged_gradients(net: &Mlp, input: &[f64], target: &[f64]) -> Result<Gradients> {
    let mut g = backprop_gradients(net, input, target)?;
    let out = net.forward(input)?.output_act;
    let hidden = net.hidden();
    for (k, (&o, &t)) in out.iter().zip(target).enumerate() {
        let wrong = -2.0 * (t - o);
        let right = g.b2[k];
        if right != 0.0 {
            let scale = wrong / right;
            g.w2[k * hidden..(k + 1) * hidden]
                .iter_mut()
                .for_each(|w| *w *= scale);
        }
        g.b2[k] = wrong;
    }
    Ok(g)
}
