//! Recovering inputs from layer outputs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::frame::{Bias, Frame, IndexSet};
use crate::linalg;
use crate::polytope::FacetStructure;

/// Canonical dual `S_J^{-1} phi_i` of a spanning sub-collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSynthesis {
    pub subset: IndexSet,
    pub dual_vectors: Vec<Vec<f64>>,
}

pub fn canonical_dual(frame: &Frame, subset: &IndexSet) -> Result<DualSynthesis> {
    if subset.iter().any(|i| i >= frame.m()) {
        return Err(Error::InvalidFrame("index out of range".into()));
    }
    if !frame.is_subframe(subset) {
        return Err(Error::NotInvertible);
    }
    // with rows Phi_J = Q R, phi_i = R^T q_i and S_J = R^T R, so the dual
    // vector is R^{-1} q_i; this avoids squaring the condition number
    let n = frame.n();
    let rows: Vec<&[f64]> = subset.iter().map(|i| frame.vector(i)).collect();
    let (q, r) = linalg::thin_qr(&rows, n).ok_or(Error::NotInvertible)?;
    let dual_vectors = q.iter().map(|qi| linalg::upper_solve(&r, n, qi)).collect();
    Ok(DualSynthesis {
        subset: subset.clone(),
        dual_vectors,
    })
}

impl DualSynthesis {
    /// `max |sum_i dual_i phi_i^T - Id|` over the entries.
    pub fn identity_error(&self, frame: &Frame) -> f64 {
        let n = frame.n();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let mut v: f64 = self
                    .subset
                    .iter()
                    .zip(&self.dual_vectors)
                    .map(|(i, d)| d[r] * frame.vector(i)[c])
                    .sum();
                if r == c {
                    v -= 1.0;
                }
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// `sum_{i in J} coeff(i) dual_i`.
    pub fn synthesize(&self, coeff: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.dual_vectors.first().map_or(0, |d| d.len());
        let mut x = vec![0.0; n];
        for (i, d) in self.subset.iter().zip(&self.dual_vectors) {
            linalg::axpy(&mut x, coeff(i), d);
        }
        x
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.dual_vectors.clone()
    }
}

/// `sum_{i in J} (z_i + alpha_i) dual_i`.
pub fn relu_synthesis(dual: &DualSynthesis, z: &[f64], bias: &Bias) -> Result<Vec<f64>> {
    check_dim(z.len(), bias.len())?;
    if dual.subset.iter().any(|i| i >= z.len()) {
        return Err(Error::DimensionMismatch {
            expected: dual.subset.iter().max().unwrap_or(0) + 1,
            found: z.len(),
        });
    }
    let a = bias.values();
    Ok(dual.synthesize(|i| z[i] + a[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub x: Vec<f64>,
    pub subset: IndexSet,
    /// `|C_alpha x - z|`.
    pub residual: f64,
    pub iterations: usize,
    /// Zero outputs with non-positive bias: the input may sit exactly on
    /// the threshold, so these were left out.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ambiguous: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<f64>>,
}

fn output_residual(frame: &Frame, bias: &Bias, x: &[f64], z: &[f64]) -> f64 {
    let out = frame
        .relu(bias, x)
        .expect("dimensions checked by the caller");
    linalg::dist(&out, z)
}

/// Inverts the layer on an output `z`: the coordinates with `z_i > 0` are
/// active, a well-correlated basis among them is inverted, and the full
/// active set is used when that is better.
pub fn reconstruct(frame: &Frame, bias: &Bias, z: &[f64]) -> Result<ReconstructionResult> {
    check_dim(frame.m(), z.len())?;
    check_dim(frame.m(), bias.len())?;
    let a = bias.values();
    let active = IndexSet::new((0..z.len()).filter(|&i| z[i] > 0.0).collect());
    let ambiguous: Vec<usize> = (0..z.len())
        .filter(|&i| z[i] == 0.0 && a[i] <= 0.0)
        .collect();
    if !frame.is_subframe(&active) {
        return Err(Error::NotInvertible);
    }
    let coeff: Vec<f64> = z.iter().zip(a).map(|(zi, ai)| zi + ai).collect();
    // greedy basis over the active coordinates by decreasing coefficient
    let mut masked = vec![f64::NEG_INFINITY; z.len()];
    for i in active.iter() {
        masked[i] = coeff[i];
    }
    let mut candidates: Vec<(IndexSet, Vec<f64>)> = Vec::new();
    if let Ok(b) = frame.most_correlated_from_coefficients(&masked) {
        if b.indices.iter().all(|i| active.contains(i)) {
            let bounds = frame.sub_bounds(&b.indices);
            if bounds.lower > 1e-8 * bounds.upper {
                if let Ok(d) = canonical_dual(frame, &b.indices) {
                    candidates.push((b.indices.clone(), relu_synthesis(&d, z, bias)?));
                }
            }
        }
    }
    let scale = 1.0 + linalg::max_abs(&coeff);
    let good = candidates
        .first()
        .is_some_and(|(_, x)| output_residual(frame, bias, x, z) <= 1e-10 * scale);
    if !good {
        let d = canonical_dual(frame, &active)?;
        candidates.push((active.clone(), relu_synthesis(&d, z, bias)?));
    }
    let (subset, x) = candidates
        .into_iter()
        .min_by(|p, q| {
            output_residual(frame, bias, &p.1, z).total_cmp(&output_residual(frame, bias, &q.1, z))
        })
        .expect("at least one candidate");
    let residual = output_residual(frame, bias, &x, z);
    Ok(ReconstructionResult {
        x,
        subset,
        residual,
        iterations: 1,
        ambiguous,
        iterates: Vec::new(),
    })
}

/// Row-wise [`reconstruct`]; failures stay per row.
pub fn reconstruct_batch(
    frame: &Frame,
    bias: &Bias,
    outputs: &[Vec<f64>],
) -> Vec<Result<ReconstructionResult>> {
    outputs
        .par_iter()
        .map(|z| reconstruct(frame, bias, z))
        .collect()
}

/// Left inverse of `x -> max(gamma s, s)`, `s = Cx - alpha`, through a dual
/// of the whole frame.
pub fn prelu_inverse(
    frame: &Frame,
    bias: &Bias,
    gamma: f64,
    z: &[f64],
    dual: &DualSynthesis,
) -> Result<Vec<f64>> {
    check_dim(frame.m(), z.len())?;
    check_dim(frame.m(), bias.len())?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Hypothesis(
            "the leak factor must lie in (0, 1]".into(),
        ));
    }
    if dual.subset.len() != frame.m() {
        return Err(Error::Hypothesis(
            "the inverse needs a dual over every frame index".into(),
        ));
    }
    let a = bias.values();
    Ok(dual.synthesize(|i| {
        if z[i] >= 0.0 {
            z[i] + a[i]
        } else {
            z[i] / gamma + a[i]
        }
    }))
}

/// Duals of every facet sub-frame of an omnidirectional frame.
#[derive(Debug, Clone)]
pub struct FacetDuals {
    facets: FacetStructure,
    duals: Vec<DualSynthesis>,
}

impl FacetDuals {
    pub fn new(frame: &Frame, facets: &FacetStructure) -> Result<Self> {
        let duals = facets
            .facets
            .iter()
            .map(|f| canonical_dual(frame, &f.vertices))
            .collect::<Result<_>>()?;
        Ok(FacetDuals {
            facets: facets.clone(),
            duals,
        })
    }

    pub fn dual(&self, facet: usize) -> &DualSynthesis {
        &self.duals[facet]
    }

    /// Synthesis with the dual of the facet whose cone holds `x`.
    pub fn reconstruct_at(&self, x: &[f64], z: &[f64], bias: &Bias) -> Result<Vec<f64>> {
        let hit = self.facets.facet_for_point(x)?;
        relu_synthesis(&self.duals[hit.facet], z, bias)
    }

    /// Tries every facet whose vertices are all active in `z` and keeps
    /// the first reconstruction lying in that facet's cone and
    /// reproducing `z`.
    pub fn reconstruct(&self, frame: &Frame, bias: &Bias, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(frame.m(), z.len())?;
        let scale = 1.0 + linalg::max_abs(z);
        for (j, f) in self.facets.facets.iter().enumerate() {
            if !f.vertices.iter().all(|i| z[i] > 0.0) {
                continue;
            }
            let x = relu_synthesis(&self.duals[j], z, bias)?;
            if linalg::norm(&x) == 0.0 {
                continue;
            }
            let in_cone = linalg::dot(&f.normal, &x) / f.offset
                >= self
                    .facets
                    .facets
                    .iter()
                    .map(|g| linalg::dot(&g.normal, &x) / g.offset)
                    .fold(f64::NEG_INFINITY, f64::max)
                    - 1e-9 * linalg::norm(&x);
            if in_cone && output_residual(frame, bias, &x, z) <= 1e-9 * scale {
                return Ok(x);
            }
        }
        Err(Error::NotInvertible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAlgorithmOptions {
    /// Step on the active coordinates; `2 / (A + B)` by default.
    pub lambda: Option<f64>,
    /// Step on the bias proxy for wrongly active coordinates; `2 / (A + B)`
    /// by default, zero gives the plain frame algorithm on the active set.
    pub lambda0: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub keep_iterates: bool,
}

impl Default for FrameAlgorithmOptions {
    fn default() -> Self {
        FrameAlgorithmOptions {
            lambda: None,
            lambda0: None,
            tol: 1e-13,
            max_iter: 10_000,
            keep_iterates: false,
        }
    }
}

const DIVERGENCE_WINDOW: usize = 20;

/// Iterative reconstruction from `y_0 = 0`:
/// `y += lambda sum_{I} (z_i + alpha_i - <y, phi_i>) phi_i
///     + lambda0 sum_{I_y \ I} (alpha_i - <y, phi_i>) phi_i`,
/// with `I = {z_i > 0}` and `I_y` the active set of `y`.
pub fn relu_frame_algorithm(
    frame: &Frame,
    bias: &Bias,
    z: &[f64],
    opts: &FrameAlgorithmOptions,
) -> Result<ReconstructionResult> {
    check_dim(frame.m(), z.len())?;
    check_dim(frame.m(), bias.len())?;
    let bounds = frame.bounds()?;
    let default_step = 2.0 / (bounds.lower + bounds.upper);
    let lambda = opts.lambda.unwrap_or(default_step);
    let lambda0 = opts.lambda0.unwrap_or(default_step);
    let a = bias.values();
    let n = frame.n();
    let known: Vec<Option<f64>> = z
        .iter()
        .zip(a)
        .map(|(zi, ai)| (*zi > 0.0).then_some(zi + ai))
        .collect();
    let subset = IndexSet::new((0..z.len()).filter(|&i| known[i].is_some()).collect());
    let mut y = vec![0.0; n];
    let mut iterates = Vec::new();
    if opts.keep_iterates {
        iterates.push(y.clone());
    }
    let mut last_step = f64::INFINITY;
    let mut growth = 0;
    let mut k = 0;
    while k < opts.max_iter {
        let mut delta = vec![0.0; n];
        for (i, v) in frame.vectors().enumerate() {
            let c = linalg::dot(v, &y);
            match known[i] {
                Some(target) => linalg::axpy(&mut delta, lambda * (target - c), v),
                None if c >= a[i] && lambda0 != 0.0 => {
                    linalg::axpy(&mut delta, lambda0 * (a[i] - c), v)
                }
                None => {}
            }
        }
        linalg::axpy(&mut y, 1.0, &delta);
        k += 1;
        if opts.keep_iterates {
            iterates.push(y.clone());
        }
        let step = linalg::norm(&delta);
        if !step.is_finite() {
            return Err(Error::Diverged(k));
        }
        growth = if step > last_step { growth + 1 } else { 0 };
        if growth >= DIVERGENCE_WINDOW {
            return Err(Error::Diverged(k));
        }
        last_step = step;
        if step < opts.tol {
            break;
        }
    }
    let residual = output_residual(frame, bias, &y, z);
    Ok(ReconstructionResult {
        x: y,
        subset,
        residual,
        iterations: k,
        ambiguous: Vec::new(),
        iterates,
    })
}

/// `1 - 2 A_x / (A + B)` with `A_x` the lower bound of the vectors active
/// at `x`.
pub fn contraction_factor(
    frame: &Frame,
    bias: &Bias,
    x: &[f64],
    lambda: Option<f64>,
) -> Result<f64> {
    let bounds = frame.bounds()?;
    let lambda = lambda.unwrap_or(2.0 / (bounds.lower + bounds.upper));
    let active = frame.active_set(bias, x)?;
    let sub = frame.sub_bounds(&active);
    Ok((1.0 - lambda * sub.lower)
        .abs()
        .max((1.0 - lambda * sub.upper).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{Domain, SamplingMode};
    use crate::polytope::enumerate_facets;
    use crate::{rng, shapes};

    #[test]
    fn dual_examples() {
        let b = shapes::standard_basis(3);
        let d = canonical_dual(&b, &IndexSet::full(3)).unwrap();
        assert_eq!(d.dual_vectors, b.to_rows());
        let t = shapes::triangle();
        let d = canonical_dual(&t, &IndexSet::full(3)).unwrap();
        for (dv, v) in d.dual_vectors.iter().zip(t.vectors()) {
            assert!(linalg::dist(dv, &linalg::scale(v, 2.0 / 3.0)) < 1e-15);
        }
        let d = canonical_dual(&t, &IndexSet::new(vec![0, 2])).unwrap();
        // inverse transpose of rows (0, 1) and (sqrt3/2, -1/2)
        let h = 3f64.sqrt() / 2.0;
        let inv = [[1.0 / (2.0 * h), 1.0], [1.0 / h, 0.0]];
        assert!(
            linalg::dist(&d.dual_vectors[0], &inv[0]) < 1e-14,
            "{:?}",
            d.dual_vectors
        );
        assert!(linalg::dist(&d.dual_vectors[1], &inv[1]) < 1e-14);
        assert!(d.identity_error(&t) < 1e-15);
        assert!(matches!(
            canonical_dual(&t, &IndexSet::new(vec![1])),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn synthesis_examples() {
        let t = shapes::triangle();
        let alpha = Bias::constant(3, -1.0);
        let x = [0.3, 0.4];
        let z = t.relu(&alpha, &x).unwrap();
        let d = canonical_dual(&t, &IndexSet::full(3)).unwrap();
        assert!(linalg::dist(&relu_synthesis(&d, &z, &alpha).unwrap(), &x) < 1e-15);
        assert_eq!(
            relu_synthesis(&d, &[0.0; 3], &Bias::zeros(3)).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn dual_from_a_smaller_active_set() {
        let mut r = rng::stream(21, 0);
        for _ in 0..50 {
            let f = shapes::gaussian_frame(&mut r, 8, 3, true);
            let alpha = Bias::constant(8, -0.2);
            let x0 = shapes::gaussian_vector(&mut r, 3);
            let j0 = f.active_set(&alpha, &x0).unwrap();
            if !f.is_subframe(&j0) {
                continue;
            }
            let d = canonical_dual(&f, &j0).unwrap();
            // shrinking towards the origin only adds active coordinates for a negative bias
            let x = linalg::scale(&x0, 1.0 - rand::Rng::random::<f64>(&mut r));
            assert!(j0.is_subset(&f.active_set(&alpha, &x).unwrap()));
            let z = f.relu(&alpha, &x).unwrap();
            assert!(linalg::dist(&relu_synthesis(&d, &z, &alpha).unwrap(), &x) < 1e-10);
        }
    }

    #[test]
    fn reconstruct_triangle_round_trip() {
        let t = shapes::triangle();
        let alpha = Bias::constant(3, -0.5);
        let pts = Domain::sphere(2)
            .sample(1000, 1, SamplingMode::Uniform)
            .unwrap()
            .points;
        for x in &pts {
            let z = t.relu(&alpha, x).unwrap();
            let r = reconstruct(&t, &alpha, &z).unwrap();
            assert!(linalg::dist(&r.x, x) < 1e-9);
        }
    }

    #[test]
    fn reconstruct_ambiguous_output() {
        let t = shapes::triangle();
        let h = 3f64.sqrt() / 2.0;
        assert!(matches!(
            reconstruct(&t, &Bias::zeros(3), &[h, 0.0, 0.0]),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn reconstruct_basis() {
        let b = shapes::standard_basis(2);
        let alpha = Bias::constant(2, -1.0);
        let x = [0.25, -0.5];
        let z = [1.25, 0.5];
        assert_eq!(b.relu(&alpha, &x).unwrap(), z.to_vec());
        assert_eq!(reconstruct(&b, &alpha, &z).unwrap().x, x.to_vec());
    }

    #[test]
    fn prelu_examples() {
        let b = shapes::standard_basis(2);
        let d = canonical_dual(&b, &IndexSet::full(2)).unwrap();
        let z = b.prelu(&Bias::zeros(2), 0.5, &[-1.0, 2.0]).unwrap();
        assert_eq!(z, vec![-0.5, 2.0]);
        assert_eq!(
            prelu_inverse(&b, &Bias::zeros(2), 0.5, &z, &d).unwrap(),
            vec![-1.0, 2.0]
        );
        assert!(prelu_inverse(&b, &Bias::zeros(2), 0.0, &z, &d).is_err());
        let t = shapes::triangle();
        let d = canonical_dual(&t, &IndexSet::full(3)).unwrap();
        let mut r = rng::stream(2, 0);
        for _ in 0..1000 {
            let x = shapes::gaussian_vector(&mut r, 2);
            let alpha = Bias::new(shapes::gaussian_vector(&mut r, 3));
            for gamma in [0.25, 1.0] {
                let z = t.prelu(&alpha, gamma, &x).unwrap();
                assert!(
                    linalg::dist(&prelu_inverse(&t, &alpha, gamma, &z, &d).unwrap(), &x) < 1e-10
                );
            }
        }
    }

    #[test]
    fn facet_duals_reconstruct() {
        let ico = shapes::icosahedron();
        let fs = enumerate_facets(&ico).unwrap();
        let duals = FacetDuals::new(&ico, &fs).unwrap();
        let alpha = Bias::constant(12, 0.0);
        let pts = Domain::sphere(3)
            .sample(500, 3, SamplingMode::Uniform)
            .unwrap()
            .points;
        for x in &pts {
            let z = ico.relu(&alpha, x).unwrap();
            assert!(linalg::dist(&duals.reconstruct_at(x, &z, &alpha).unwrap(), x) < 1e-12);
            assert!(linalg::dist(&duals.reconstruct(&ico, &alpha, &z).unwrap(), x) < 1e-12);
        }
    }

    #[test]
    fn frame_algorithm_basis_one_step() {
        let b = shapes::standard_basis(2);
        let alpha = Bias::constant(2, -1.0);
        let x = [0.5, 0.0];
        let z = b.relu(&alpha, &x).unwrap();
        let r = relu_frame_algorithm(&b, &alpha, &z, &FrameAlgorithmOptions::default()).unwrap();
        assert!(linalg::dist(&r.x, &x) == 0.0);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn frame_algorithm_contracts() {
        let t = shapes::triangle();
        let alpha = Bias::constant(3, -0.6);
        let pts = Domain::ball(2, 1.0)
            .unwrap()
            .sample(100, 8, SamplingMode::Uniform)
            .unwrap()
            .points;
        for x in &pts {
            let z = t.relu(&alpha, x).unwrap();
            let kappa = contraction_factor(&t, &alpha, x, None).unwrap();
            let opts = FrameAlgorithmOptions {
                keep_iterates: true,
                max_iter: 60,
                lambda0: Some(0.0),
                ..Default::default()
            };
            let r = relu_frame_algorithm(&t, &alpha, &z, &opts).unwrap();
            let errs: Vec<f64> = r.iterates.iter().map(|y| linalg::dist(y, x)).collect();
            for w in errs.windows(2) {
                if w[0] > 1e-12 {
                    assert!(
                        w[1] <= kappa * w[0] + 1e-12,
                        "{} > {kappa} * {}",
                        w[1],
                        w[0]
                    );
                }
            }
            assert!(linalg::dist(&r.x, x) < 1e-10);
        }
    }
}
