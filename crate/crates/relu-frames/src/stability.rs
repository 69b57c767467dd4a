//! Sample-based lower and upper bounds of ReLU layers, local stability
//! constants and the radius of the image ball.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::Domain;
use crate::error::{check_dim, Error, Result};
use crate::frame::{Bias, Frame, IndexSet};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Smallest lower frame bound among the active sub-collections seen;
    /// zero when some sample's active vectors do not span.
    pub a_alpha: f64,
    pub b_alpha: f64,
    pub samples: usize,
    pub distinct_active_sets: usize,
    /// Largest `B_J / A_J` over the samples.
    pub worst_condition: f64,
    /// A sample whose active vectors do not span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    /// `2 m / A_alpha`, reported only for the zero bias.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_bias_lipschitz: Option<f64>,
}

pub fn relu_frame_bounds(
    frame: &Frame,
    bias: &Bias,
    samples: &[Vec<f64>],
) -> Result<StabilityReport> {
    check_dim(frame.m(), bias.len())?;
    if samples.is_empty() {
        return Err(Error::Hypothesis("no samples".into()));
    }
    for s in samples {
        check_dim(frame.n(), s.len())?;
    }
    let sets: Vec<IndexSet> = samples
        .par_iter()
        .map(|x| frame.active_from_coefficients(&frame.coefficients(x), bias))
        .collect();
    let mut distinct: Vec<IndexSet> = sets.clone();
    distinct.sort_unstable_by(|a, b| a.as_slice().cmp(b.as_slice()));
    distinct.dedup();
    let cache: HashMap<Vec<usize>, (f64, f64, bool)> = distinct
        .par_iter()
        .map(|j| {
            let spans = frame.is_subframe(j);
            let b = frame.sub_bounds(j);
            (
                j.as_slice().to_vec(),
                (if spans { b.lower } else { 0.0 }, b.upper, spans),
            )
        })
        .collect();
    let mut a_alpha = f64::INFINITY;
    let mut b_alpha = 0.0f64;
    let mut worst = 1.0f64;
    let mut witness = None;
    for (x, j) in samples.iter().zip(&sets) {
        let (lo, hi, spans) = cache[j.as_slice()];
        a_alpha = a_alpha.min(lo);
        b_alpha = b_alpha.max(hi);
        worst = worst.max(if lo > 0.0 { hi / lo } else { f64::INFINITY });
        if !spans && witness.is_none() {
            witness = Some(x.clone());
        }
    }
    let zero_bias = bias.values().iter().all(|a| *a == 0.0);
    let zero_bias_lipschitz =
        (zero_bias && a_alpha > 0.0).then(|| 2.0 * frame.m() as f64 / a_alpha);
    Ok(StabilityReport {
        a_alpha,
        b_alpha,
        samples: samples.len(),
        distinct_active_sets: distinct.len(),
        worst_condition: worst,
        witness,
        zero_bias_lipschitz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStability {
    /// `1 / A_J` for the active set `J` at the point.
    pub constant: f64,
    pub active: IndexSet,
    /// Per member of `active`, whether its coefficient exceeds the bias.
    pub strict: Vec<bool>,
    /// All active inequalities strict: the constant holds for the bias
    /// itself; otherwise only for strictly smaller biases.
    pub holds_at_bias: bool,
}

pub fn local_stability(frame: &Frame, bias: &Bias, x0: &[f64]) -> Result<LocalStability> {
    let c = frame.analysis(x0)?;
    let active = frame.active_set(bias, x0)?;
    if !frame.is_subframe(&active) {
        return Err(Error::NotInvertible);
    }
    let a = bias.values();
    let strict: Vec<bool> = active.iter().map(|i| c[i] > a[i]).collect();
    let lower = frame.sub_bounds(&active).lower;
    Ok(LocalStability {
        constant: 1.0 / lower,
        holds_at_bias: strict.iter().all(|s| *s),
        strict,
        active,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageBound {
    /// `sqrt(B_alpha) * M`.
    pub radius: f64,
    /// `sqrt(B_alpha) * M + |min(alpha, 0)|`, valid for every bias.
    pub bias_corrected_radius: f64,
    pub b_alpha: f64,
    pub sup_norm: f64,
    pub max_output_norm: f64,
    pub nonnegative: bool,
    /// Samples whose output lies outside `radius`.
    pub violations: Vec<usize>,
}

impl ImageBound {
    pub fn holds(&self) -> bool {
        self.nonnegative && self.violations.is_empty()
    }
}

/// Radius of the ball around the origin holding all sampled outputs. For a
/// non-negative bias every output is within `sqrt(B_alpha) M`; a negative
/// bias can push outputs beyond it, which shows up as violations.
pub fn image_ball_radius(
    frame: &Frame,
    bias: &Bias,
    domain: &Domain,
    samples: &[Vec<f64>],
) -> Result<ImageBound> {
    let m_sup = domain
        .sup_norm()
        .ok_or_else(|| Error::Unsupported("image radius of an unbounded domain".into()))?;
    let report = relu_frame_bounds(frame, bias, samples)?;
    let radius = report.b_alpha.sqrt() * m_sup;
    let negative: Vec<f64> = bias.values().iter().map(|a| a.min(0.0)).collect();
    let outputs: Vec<Vec<f64>> = samples
        .par_iter()
        .map(|x| frame.relu(bias, x))
        .collect::<Result<_>>()?;
    let norms: Vec<f64> = outputs.iter().map(|o| linalg::norm(o)).collect();
    let slack = 1e-12 * (1.0 + radius);
    Ok(ImageBound {
        radius,
        bias_corrected_radius: radius + linalg::norm(&negative),
        b_alpha: report.b_alpha,
        sup_norm: m_sup,
        max_output_norm: norms.iter().copied().fold(0.0, f64::max),
        nonnegative: outputs.iter().all(|o| o.iter().all(|v| *v >= 0.0)),
        violations: norms
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > radius + slack)
            .map(|(k, _)| k)
            .collect(),
    })
}
