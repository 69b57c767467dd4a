//! Maximal-bias estimates and injectivity certificates.
//!
//! Two independent routes lead to a bias `alpha` for which the frame is
//! `alpha`-rectifying on a domain. The sampling route sweeps domain points
//! and lowers, for every point, the coefficients of its most correlated
//! basis. The polytope route reads the bias off the facets of the hull of
//! the (unit) frame vectors.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{self, Domain, SamplingMode};
use crate::error::{check_dim, Error, Result};
use crate::frame::{Bias, Frame};
use crate::linalg;
use crate::polytope::FacetStructure;
use crate::rng::{self, GENERATOR_ID};
use crate::solvers::{self, LpOutcome};
use crate::tolerance::Tolerances;

pub const SCHEMA: &str = "relu-certify/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sampling,
    PbeBoundary,
    PbeSphere,
    PbeDonut,
    PbeNonneg,
    PbeComplement,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateMetadata {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_samples: Option<usize>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasEstimate {
    pub values: Bias,
    pub method: Method,
    /// Covering-radius term to subtract before certifying; zero for
    /// geometric estimates, infinite when no samples were drawn.
    #[serde(with = "crate::io::inf_f64")]
    pub correction: f64,
    /// Coordinates whose bias may be chosen freely.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub free: Vec<usize>,
    /// Coordinates where the cap solver failed its optimality check and a
    /// sampled bound was used instead.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flagged: Vec<usize>,
    /// Per coordinate, a domain point attaining the estimate (empty when
    /// not tracked or free).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub minimizers: Vec<Vec<f64>>,
    pub metadata: EstimateMetadata,
}

impl BiasEstimate {
    /// `values - correction`.
    pub fn certified(&self) -> Bias {
        Bias::new(
            self.values
                .values()
                .iter()
                .map(|v| v - self.correction)
                .collect(),
        )
    }
}

/// How the most correlated basis of a point is found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisRule {
    /// The `n` largest coefficients; exact for full-spark frames.
    TopCoefficients,
    /// Greedy rank-increasing scan; exact for every frame.
    Bottleneck,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Frame vectors lying in the domain are processed first; other
    /// coordinates start at `+inf`.
    Auto,
    Infinite,
    Given(Bias),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkPolicy {
    /// Enumerate all `n`-subsets and refuse frames that are not full spark.
    Verify,
    /// Trust that the frame is full spark.
    Assume,
    /// Use the exact greedy basis; no full-spark requirement.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub init: Init,
    pub spark: SparkPolicy,
    pub correction_factor: f64,
    /// Defaults to uniform on bounded domains and Gaussian otherwise.
    pub mode: Option<SamplingMode>,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            n_samples: 100_000,
            seed: 0,
            init: Init::Auto,
            spark: SparkPolicy::Verify,
            correction_factor: 0.05,
            mode: None,
        }
    }
}

fn default_mode(domain: &Domain, mode: Option<SamplingMode>) -> SamplingMode {
    mode.unwrap_or(if domain.is_bounded() {
        SamplingMode::Uniform
    } else {
        SamplingMode::Gaussian
    })
}

fn resolve_rule(frame: &Frame, spark: SparkPolicy) -> Result<BasisRule> {
    match spark {
        SparkPolicy::Verify => {
            if frame.is_full_spark()? {
                Ok(BasisRule::TopCoefficients)
            } else {
                Err(Error::NotFullSpark)
            }
        }
        SparkPolicy::Assume => Ok(BasisRule::TopCoefficients),
        SparkPolicy::General => {
            if frame.is_valid() {
                Ok(BasisRule::Bottleneck)
            } else {
                Err(Error::NotAFrame)
            }
        }
    }
}

/// Running state of the sampling estimate: every processed point lowers
/// the coefficients of its most correlated basis.
#[derive(Debug, Clone)]
pub struct SamplingState<'a> {
    frame: &'a Frame,
    rule: BasisRule,
    alpha: Vec<f64>,
    steps: usize,
}

impl<'a> SamplingState<'a> {
    pub fn new(frame: &'a Frame, rule: BasisRule, start: Vec<f64>) -> Result<Self> {
        check_dim(frame.m(), start.len())?;
        Ok(SamplingState {
            frame,
            rule,
            alpha: start,
            steps: 0,
        })
    }

    /// State after the initialisation pass of `init` for `domain`.
    pub fn initialised(
        frame: &'a Frame,
        rule: BasisRule,
        init: &Init,
        domain: &Domain,
    ) -> Result<Self> {
        let m = frame.m();
        let mut s = match init {
            Init::Given(b) => SamplingState::new(frame, rule, b.values().to_vec())?,
            _ => SamplingState::new(frame, rule, vec![f64::INFINITY; m])?,
        };
        if *init == Init::Auto {
            for i in 0..m {
                if domain.contains(frame.vector(i))? {
                    s.update(frame.vector(i));
                }
            }
        }
        s.steps = 0;
        Ok(s)
    }

    /// The most correlated basis, widened by every coefficient tied with
    /// its smallest member so that an ambiguous choice lowers all
    /// candidates.
    fn basis(&self, c: &[f64]) -> Vec<usize> {
        let mut idx = match self.rule {
            BasisRule::TopCoefficients => self.frame.top_coefficients(c),
            BasisRule::Bottleneck => self
                .frame
                .most_correlated_from_coefficients(c)
                .map(|b| b.indices.as_slice().to_vec())
                .unwrap_or_default(),
        };
        let low = idx.iter().map(|&j| c[j]).fold(f64::INFINITY, f64::min);
        let band = low - self.frame.tolerances().tie;
        if c.iter().filter(|&&v| v >= band).count() > idx.len() {
            idx = (0..c.len()).filter(|&j| c[j] >= band).collect();
        }
        idx
    }

    pub fn update(&mut self, x: &[f64]) {
        let c = self.frame.coefficients(x);
        for j in self.basis(&c) {
            if c[j] < self.alpha[j] {
                self.alpha[j] = c[j];
            }
        }
        self.steps += 1;
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn merge(&mut self, other: &[f64]) {
        for (a, b) in self.alpha.iter_mut().zip(other) {
            *a = a.min(*b);
        }
    }
}

fn correction_for(domain: &Domain, n: usize, count: usize, factor: f64) -> f64 {
    if count < 2 {
        return f64::INFINITY;
    }
    domains::covering_radius_proxy(n, count, factor) * domain.sup_norm().unwrap_or(1.0)
}

/// Monte-Carlo estimate of the maximal bias. The frame is rectifying for
/// the returned values on every processed sample, and for the values
/// minus the correction on the domain up to the covering error.
pub fn sampling_bias_estimate(
    frame: &Frame,
    domain: &Domain,
    opts: &SamplingOptions,
) -> Result<BiasEstimate> {
    check_dim(frame.n(), domain.dim())?;
    let rule = resolve_rule(frame, opts.spark)?;
    let mode = default_mode(domain, opts.mode);
    let mut state = SamplingState::initialised(frame, rule, &opts.init, domain)?;
    let partial = domain.map_blocks(opts.n_samples, opts.seed, mode, |pts| {
        let mut local = SamplingState {
            frame,
            rule,
            alpha: vec![f64::INFINITY; frame.m()],
            steps: 0,
        };
        for p in pts {
            local.update(p);
        }
        local.alpha
    })?;
    for p in &partial {
        state.merge(p);
    }
    Ok(BiasEstimate {
        values: Bias::new(state.alpha),
        method: Method::Sampling,
        correction: correction_for(domain, frame.n(), opts.n_samples, opts.correction_factor),
        free: Vec::new(),
        flagged: Vec::new(),
        minimizers: Vec::new(),
        metadata: EstimateMetadata {
            seed: Some(opts.seed),
            n_samples: Some(opts.n_samples),
            domain: Some(domain.clone()),
            iterations: Some(opts.n_samples),
            generator: Some(GENERATOR_ID.into()),
            correction_factor: Some(opts.correction_factor),
            tolerances: *frame.tolerances(),
            ..Default::default()
        },
    })
}

/// Euclidean change between two bias vectors; a coordinate leaving `+inf`
/// counts as `f64::MAX`.
fn window_change(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if x == y {
            continue;
        }
        if !x.is_finite() || !y.is_finite() {
            return f64::MAX;
        }
        s += (x - y) * (x - y);
    }
    s.sqrt()
}

/// Sampling estimate that stops once `steps` consecutive samples moved the
/// bias by less than `epsilon`, or after `max_n` samples.
pub fn stopping_variant(
    frame: &Frame,
    domain: &Domain,
    epsilon: f64,
    steps: usize,
    max_n: usize,
    opts: &SamplingOptions,
) -> Result<BiasEstimate> {
    check_dim(frame.n(), domain.dim())?;
    if steps == 0 || epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::Hypothesis(
            "stopping rule needs steps >= 1 and epsilon >= 0".into(),
        ));
    }
    let rule = resolve_rule(frame, opts.spark)?;
    let mode = default_mode(domain, opts.mode);
    let mut state = SamplingState::initialised(frame, rule, &opts.init, domain)?;
    let mut sampler = domain.sampler(opts.seed, mode)?;
    let mut used = 0;
    while used < max_n {
        let before = state.alpha.clone();
        let window = steps.min(max_n - used);
        for _ in 0..window {
            state.update(&sampler.next_point());
        }
        used += window;
        if window_change(&before, &state.alpha) < epsilon {
            break;
        }
    }
    let mut est = BiasEstimate {
        values: Bias::new(state.alpha),
        method: Method::Sampling,
        correction: correction_for(domain, frame.n(), used, opts.correction_factor),
        free: Vec::new(),
        flagged: Vec::new(),
        minimizers: Vec::new(),
        metadata: EstimateMetadata {
            seed: Some(opts.seed),
            n_samples: Some(used),
            domain: Some(domain.clone()),
            iterations: Some(used),
            generator: Some(GENERATOR_ID.into()),
            correction_factor: Some(opts.correction_factor),
            tolerances: *frame.tolerances(),
            ..Default::default()
        },
    };
    est.metadata.notes.push(format!(
        "stopping rule: epsilon={epsilon}, window={steps}, max_n={max_n}"
    ));
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Also evaluate `+-R phi_i / |phi_i|` (R the outer radius) when these
    /// points lie in the domain.
    pub with_frame_probes: bool,
    pub mode: Option<SamplingMode>,
}

impl Default for ConstantOptions {
    fn default() -> Self {
        ConstantOptions {
            n_samples: 100_000,
            seed: 0,
            with_frame_probes: true,
            mode: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantBias {
    pub value: f64,
    pub minimizer: Vec<f64>,
}

fn constant_value(frame: &Frame, x: &[f64]) -> f64 {
    let c = frame.coefficients(x);
    frame
        .most_correlated_from_coefficients(&c)
        .map(|b| b.value)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Smallest value of `max_J min_{j in J} <x, phi_j>` over the samples: an
/// approximation from above of the largest constant bias.
pub fn constant_bias_estimate(
    frame: &Frame,
    domain: &Domain,
    opts: &ConstantOptions,
) -> Result<ConstantBias> {
    check_dim(frame.n(), domain.dim())?;
    if !frame.is_valid() {
        return Err(Error::NotAFrame);
    }
    let mode = default_mode(domain, opts.mode);
    let better = |a: (f64, Vec<f64>), b: (f64, Vec<f64>)| if b.0 < a.0 { b } else { a };
    let mut best = (f64::INFINITY, Vec::new());
    if opts.with_frame_probes {
        if let Some(radius) = domain.sup_norm() {
            for v in frame.vectors() {
                let unit = linalg::scale(v, radius / linalg::norm(v));
                for p in [unit.clone(), linalg::scale(&unit, -1.0)] {
                    if domain.contains(&p)? {
                        best = better(best, (constant_value(frame, &p), p));
                    }
                }
            }
        }
    }
    let parts = domain.map_blocks(opts.n_samples, opts.seed, mode, |pts| {
        pts.iter()
            .map(|p| (constant_value(frame, p), p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(v, p)| (v, p.clone()))
    })?;
    for p in parts.into_iter().flatten() {
        best = better(best, p);
    }
    if best.1.is_empty() {
        return Err(Error::InvalidDomain(
            "no domain points were evaluated".into(),
        ));
    }
    Ok(ConstantBias {
        value: best.0,
        minimizer: best.1,
    })
}

/// [`constant_bias_estimate`] as a bias vector.
pub fn constant_estimate(
    frame: &Frame,
    domain: &Domain,
    opts: &ConstantOptions,
) -> Result<BiasEstimate> {
    let c = constant_bias_estimate(frame, domain, opts)?;
    let m = frame.m();
    Ok(BiasEstimate {
        values: Bias::constant(m, c.value),
        method: Method::Constant,
        correction: correction_for(domain, frame.n(), opts.n_samples, 0.05),
        free: Vec::new(),
        flagged: Vec::new(),
        minimizers: vec![c.minimizer; m],
        metadata: EstimateMetadata {
            seed: Some(opts.seed),
            n_samples: Some(opts.n_samples),
            domain: Some(domain.clone()),
            generator: Some(GENERATOR_ID.into()),
            correction_factor: Some(0.05),
            tolerances: *frame.tolerances(),
            ..Default::default()
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbeOptions {
    /// Points per facet cap used to cross-check the cone projection.
    pub cap_samples: usize,
    pub seed: u64,
    pub solver_iterations: usize,
}

impl Default for PbeOptions {
    fn default() -> Self {
        PbeOptions {
            cap_samples: 100_000,
            seed: 0,
            solver_iterations: 10_000,
        }
    }
}

fn require_pbe(frame: &Frame, fs: &FacetStructure) -> Result<()> {
    check_dim(frame.n(), fs.n)?;
    if !frame.is_normalized() {
        return Err(Error::Hypothesis(
            "polytope estimates need unit-norm frame vectors; normalize first".into(),
        ));
    }
    if !fs.is_omnidirectional(frame.tolerances().face) {
        return Err(Error::NotOmnidirectional);
    }
    Ok(())
}

/// Per vector, the smallest inner product with a vertex sharing a facet,
/// and that vertex.
fn vertex_minimum(frame: &Frame, fs: &FacetStructure) -> Vec<(f64, Option<usize>)> {
    (0..frame.m())
        .map(|i| {
            let mut best = (f64::INFINITY, None);
            for (_, f) in fs.facets_containing(i) {
                for l in f.vertices.iter() {
                    let v = linalg::dot(frame.vector(l), frame.vector(i));
                    if v < best.0 {
                        best = (v, Some(l));
                    }
                }
            }
            best
        })
        .collect()
}

fn estimate(
    frame: &Frame,
    method: Method,
    values: Vec<f64>,
    minimizers: Vec<Vec<f64>>,
    domain: Option<Domain>,
) -> BiasEstimate {
    let free = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == f64::INFINITY)
        .map(|(i, _)| i)
        .collect();
    BiasEstimate {
        values: Bias::new(values),
        method,
        correction: 0.0,
        free,
        flagged: Vec::new(),
        minimizers,
        metadata: EstimateMetadata {
            domain,
            tolerances: *frame.tolerances(),
            ..Default::default()
        },
    }
}

/// Bias valid on the boundary of the hull: per vector, the smallest inner
/// product with any vertex of a facet containing it.
pub fn pbe_boundary(frame: &Frame, fs: &FacetStructure) -> Result<BiasEstimate> {
    require_pbe(frame, fs)?;
    let vm = vertex_minimum(frame, fs);
    let values = vm.iter().map(|(v, _)| *v).collect();
    let minimizers = vm
        .iter()
        .map(|(_, l)| l.map(|l| frame.vector(l).to_vec()).unwrap_or_default())
        .collect();
    let surface = Domain::polytope_boundary(frame).ok();
    Ok(estimate(
        frame,
        Method::PbeBoundary,
        values,
        minimizers,
        surface,
    ))
}

/// Smallest `<u, phi_i>` over unit `u` in the cone of `verts`, found by
/// Dirichlet sampling of the facet.
fn cap_scan(verts: &[&[f64]], phi: &[f64], count: usize, seed: u64) -> (f64, Vec<f64>) {
    let mut rng = rng::stream(seed, 0);
    let n = phi.len();
    let mut best = (f64::INFINITY, Vec::new());
    let mut w = vec![0.0; verts.len()];
    for _ in 0..count {
        for wk in w.iter_mut() {
            *wk = -(1.0 - rng.random::<f64>()).ln();
        }
        let mut x = vec![0.0; n];
        for (wk, v) in w.iter().zip(verts) {
            linalg::axpy(&mut x, *wk, v);
        }
        let nx = linalg::norm(&x);
        let val = linalg::dot(&x, phi) / nx;
        if val < best.0 {
            best = (val, linalg::scale(&x, 1.0 / nx));
        }
    }
    best
}

struct CapMinimum {
    value: f64,
    point: Vec<f64>,
    flagged: bool,
}

fn sphere_coordinate(
    frame: &Frame,
    fs: &FacetStructure,
    i: usize,
    vertex_min: (f64, Option<usize>),
    opts: &PbeOptions,
) -> CapMinimum {
    let phi = frame.vector(i);
    let tol = frame.tolerances();
    let vertex_point = vertex_min
        .1
        .map(|l| frame.vector(l).to_vec())
        .unwrap_or_default();
    if vertex_min.0 >= 0.0 || vertex_min.1.is_none() {
        return CapMinimum {
            value: vertex_min.0,
            point: vertex_point,
            flagged: false,
        };
    }
    let mut best = CapMinimum {
        value: vertex_min.0,
        point: vertex_point,
        flagged: false,
    };
    let target = linalg::scale(phi, -1.0);
    for (j, f) in fs.facets_containing(i) {
        let verts: Vec<&[f64]> = f.vertices.iter().map(|l| frame.vector(l)).collect();
        if verts.iter().all(|v| linalg::dot(v, phi) >= 0.0) {
            continue;
        }
        let sol = solvers::nnls(&verts, &target, opts.solver_iterations, tol.solver);
        let proj: Vec<f64> = sol
            .residual
            .iter()
            .zip(&target)
            .map(|(r, t)| r + t)
            .collect();
        let np = linalg::norm(&proj);
        let sampled = cap_scan(
            &verts,
            phi,
            opts.cap_samples,
            rng::sub_seed(opts.seed, &[i as u64, j as u64]),
        );
        let (value, point, flagged) = if !sol.kkt || np == 0.0 {
            (sampled.0 - tol.solver, sampled.1, true)
        } else if -np <= sampled.0 {
            (-np, linalg::scale(&proj, 1.0 / np), false)
        } else {
            (sampled.0, sampled.1, false)
        };
        if value < best.value {
            best = CapMinimum {
                value,
                point,
                flagged,
            };
        } else if flagged {
            best.flagged = true;
        }
    }
    best
}

/// Bias valid on the unit sphere: per vector, the minimum of its
/// coefficient over the spherical caps of the facets containing it.
pub fn pbe_sphere(frame: &Frame, fs: &FacetStructure, opts: &PbeOptions) -> Result<BiasEstimate> {
    require_pbe(frame, fs)?;
    let vm = vertex_minimum(frame, fs);
    let caps: Vec<CapMinimum> = (0..frame.m())
        .into_par_iter()
        .map(|i| sphere_coordinate(frame, fs, i, vm[i], opts))
        .collect();
    let flagged = caps
        .iter()
        .enumerate()
        .filter(|(_, c)| c.flagged)
        .map(|(i, _)| i)
        .collect();
    let values = caps.iter().map(|c| c.value).collect();
    let minimizers = caps.into_iter().map(|c| c.point).collect();
    let mut est = estimate(
        frame,
        Method::PbeSphere,
        values,
        minimizers,
        Some(Domain::sphere(frame.n())),
    );
    est.flagged = flagged;
    est.metadata.seed = Some(opts.seed);
    est.metadata.cap_samples = Some(opts.cap_samples);
    Ok(est)
}

/// Bias valid on `s <= |x| <= r`: negative sphere values scale with the
/// outer radius, non-negative ones with the inner radius.
pub fn pbe_donut(
    frame: &Frame,
    fs: &FacetStructure,
    r: f64,
    s: f64,
    opts: &PbeOptions,
) -> Result<BiasEstimate> {
    let domain = Domain::donut(frame.n(), r, s)?;
    let sphere = pbe_sphere(frame, fs, opts)?;
    let mut values = Vec::with_capacity(frame.m());
    let mut minimizers = Vec::with_capacity(frame.m());
    for (v, p) in sphere.values.values().iter().zip(&sphere.minimizers) {
        let t = if *v < 0.0 { r } else { s };
        values.push(t * v);
        minimizers.push(linalg::scale(p, t));
    }
    let mut est = estimate(frame, Method::PbeDonut, values, minimizers, Some(domain));
    est.flagged = sphere.flagged;
    est.metadata.seed = sphere.metadata.seed;
    est.metadata.cap_samples = sphere.metadata.cap_samples;
    Ok(est)
}

/// Closed ball of radius `r`: the donut with `s = 0`.
pub fn pbe_ball(
    frame: &Frame,
    fs: &FacetStructure,
    r: f64,
    opts: &PbeOptions,
) -> Result<BiasEstimate> {
    let mut est = pbe_donut(frame, fs, r, 0.0, opts)?;
    est.metadata.domain = Some(Domain::ball(frame.n(), r)?);
    Ok(est)
}

/// Whether the facet spanned by `verts` meets the open non-negative
/// orthant: maximise `t` with `sum c = 1`, `c >= 0`, `D c >= t`.
pub fn facet_meets_open_orthant(verts: &[&[f64]], tol: f64) -> bool {
    let n = verts[0].len();
    let k = verts.len();
    // variables (c_1..c_k, s) with t = s - 1, so the origin is feasible
    let mut a = Vec::with_capacity(n + 1);
    for row in 0..n {
        let mut r: Vec<f64> = verts.iter().map(|v| -v[row]).collect();
        r.push(1.0);
        a.push(r);
    }
    let mut sum = vec![1.0; k];
    sum.push(0.0);
    a.push(sum);
    let mut obj = vec![0.0; k];
    obj.push(1.0);
    match solvers::simplex_max(&a, &vec![1.0; n + 1], &obj) {
        LpOutcome::Optimal { value, .. } => value - 1.0 > tol,
        LpOutcome::Unbounded => true,
    }
}

/// Bias valid on the non-negative part of the ball of radius `r`. Vectors
/// on no facet meeting the open orthant are free (`+inf`).
pub fn pbe_nonneg_ball(
    frame: &Frame,
    fs: &FacetStructure,
    r: f64,
    opts: &PbeOptions,
) -> Result<BiasEstimate> {
    let domain = Domain::nonneg_ball(frame.n(), r)?;
    let ball = pbe_ball(frame, fs, r, opts)?;
    let tol = frame.tolerances().face;
    let mut used = vec![false; frame.m()];
    for f in &fs.facets {
        let verts: Vec<&[f64]> = f.vertices.iter().map(|l| frame.vector(l)).collect();
        if facet_meets_open_orthant(&verts, tol) {
            for l in f.vertices.iter() {
                used[l] = true;
            }
        }
    }
    let mut values = ball.values.into_values();
    let mut minimizers = ball.minimizers;
    for i in 0..frame.m() {
        if !used[i] {
            values[i] = f64::INFINITY;
            minimizers[i].clear();
        }
    }
    let mut est = estimate(frame, Method::PbeNonneg, values, minimizers, Some(domain));
    est.flagged = ball.flagged.into_iter().filter(|i| used[*i]).collect();
    est.metadata.seed = Some(opts.seed);
    est.metadata.cap_samples = Some(opts.cap_samples);
    Ok(est)
}

/// Bias valid on `|x| >= s`, available when every facet has non-negative
/// vertex inner products.
pub fn pbe_ball_complement(frame: &Frame, fs: &FacetStructure, s: f64) -> Result<BiasEstimate> {
    let domain = Domain::ball_complement(frame.n(), s)?;
    require_pbe(frame, fs)?;
    let vm = vertex_minimum(frame, fs);
    let tol = frame.tolerances().face;
    if let Some((i, (v, _))) = vm.iter().enumerate().find(|(_, (v, _))| *v < -tol) {
        return Err(Error::Hypothesis(format!(
            "the ball complement estimate needs non-negative boundary bias, coordinate {i} has {v}"
        )));
    }
    let values = vm.iter().map(|(v, _)| s * v.max(0.0)).collect();
    let minimizers = vm
        .iter()
        .map(|(_, l)| {
            l.map(|l| linalg::scale(frame.vector(l), s))
                .unwrap_or_default()
        })
        .collect();
    Ok(estimate(
        frame,
        Method::PbeComplement,
        values,
        minimizers,
        Some(domain),
    ))
}

/// Polytope estimate matching the domain variant.
pub fn pbe_for_domain(
    frame: &Frame,
    fs: &FacetStructure,
    domain: &Domain,
    opts: &PbeOptions,
) -> Result<BiasEstimate> {
    check_dim(frame.n(), domain.dim())?;
    match domain {
        Domain::Sphere { .. } => pbe_sphere(frame, fs, opts),
        Domain::Ball { r, .. } => pbe_ball(frame, fs, *r, opts),
        Domain::Donut { r, s, .. } => pbe_donut(frame, fs, *r, *s, opts),
        Domain::NonnegBall { r, .. } => pbe_nonneg_ball(frame, fs, *r, opts),
        Domain::BallComplement { s, .. } => pbe_ball_complement(frame, fs, *s),
        Domain::PolytopeBoundary { frame: surface }
            if surface.frame().to_rows() == frame.to_rows() =>
        {
            pbe_boundary(frame, fs)
        }
        _ => Err(Error::Unsupported(
            "no polytope estimate for this domain".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Injective,
    NotInjective,
    Unknown,
}

/// Two distinct domain points with the same layer output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    pub verdict: Verdict,
    pub method: Method,
    /// `estimate - given` per coordinate.
    #[serde(with = "crate::io::inf_vec")]
    pub margin: Vec<f64>,
    #[serde(with = "crate::io::inf_f64")]
    pub min_margin: f64,
    #[serde(with = "crate::io::inf_f64")]
    pub correction: f64,
    pub given: Bias,
    pub estimate: BiasEstimate,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    pub refutation_samples: usize,
    pub refutation_seed: u64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    /// Domain points scanned for a collision when the bias is too large.
    pub refute_samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            refute_samples: 20_000,
            seed: 0,
        }
    }
}

pub fn certify(frame: &Frame, given: &Bias, estimate: &BiasEstimate) -> Result<Certificate> {
    certify_with(frame, given, estimate, &CertifyOptions::default())
}

/// Injective when `given <= values - correction` everywhere. Otherwise a
/// collision pair is searched for; without one the verdict is unknown.
pub fn certify_with(
    frame: &Frame,
    given: &Bias,
    estimate: &BiasEstimate,
    opts: &CertifyOptions,
) -> Result<Certificate> {
    check_dim(frame.m(), given.len())?;
    check_dim(frame.m(), estimate.values.len())?;
    let margin: Vec<f64> = estimate
        .values
        .values()
        .iter()
        .zip(given.values())
        .enumerate()
        .map(|(i, (e, g))| {
            if estimate.free.contains(&i) {
                f64::INFINITY
            } else {
                e - g
            }
        })
        .collect();
    let min_margin = margin.iter().copied().fold(f64::INFINITY, f64::min);
    let certified = estimate.certified();
    let passes = (0..frame.m())
        .all(|i| estimate.free.contains(&i) || given.values()[i] <= certified.values()[i]);
    let mut witnesses = Vec::new();
    let mut scanned = 0;
    let verdict = if passes {
        Verdict::Injective
    } else {
        if let Some(domain) = &estimate.metadata.domain {
            let mut probes: Vec<Vec<f64>> = estimate
                .minimizers
                .iter()
                .filter(|p| !p.is_empty() && p.len() == frame.n())
                .cloned()
                .collect();
            if opts.refute_samples > 0 {
                let mode = default_mode(domain, None);
                probes.extend(domain.sample(opts.refute_samples, opts.seed, mode)?.points);
            }
            scanned = probes.len();
            if let Some(w) = refute(frame, given, &probes, domain)? {
                witnesses.push(w);
            }
        }
        if witnesses.is_empty() {
            Verdict::Unknown
        } else {
            Verdict::NotInjective
        }
    };
    Ok(Certificate {
        schema: SCHEMA.into(),
        verdict,
        method: estimate.method,
        margin,
        min_margin,
        correction: estimate.correction,
        given: given.clone(),
        estimate: estimate.clone(),
        witnesses,
        refutation_samples: scanned,
        refutation_seed: opts.seed,
        parameters: serde_json::Value::Null,
    })
}

fn same_output(a: &[f64], b: &[f64]) -> bool {
    let scale = 1.0 + linalg::max_abs(a);
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale)
}

/// Looks for two distinct domain points with equal layer output, starting
/// from a sample whose active vectors do not span. Moves inside the null
/// space of the active vectors keep their coefficients; steps are kept
/// below the slack of the inactive ones.
pub fn refute(
    frame: &Frame,
    bias: &Bias,
    samples: &[Vec<f64>],
    domain: &Domain,
) -> Result<Option<Witness>> {
    check_dim(frame.m(), bias.len())?;
    let n = frame.n();
    let alpha = bias.values();
    for x in samples {
        check_dim(n, x.len())?;
        if !domain.contains(x)? {
            continue;
        }
        let c = frame.coefficients(x);
        let active = frame.active_from_coefficients(&c, bias);
        if frame.is_subframe(&active) {
            continue;
        }
        let (vals, vecs) = linalg::sym_eigen(&frame.sub_operator(&active), n);
        let top = vals[n - 1].max(1.0);
        let null: Vec<&Vec<f64>> = vals
            .iter()
            .zip(&vecs)
            .filter(|(v, _)| **v <= 1e-10 * top)
            .map(|(_, e)| e)
            .collect();
        if null.is_empty() {
            continue;
        }
        let output = frame.relu(bias, x)?;
        let try_point = |y: Vec<f64>| -> Result<Option<Witness>> {
            if linalg::dist(x, &y) > 1e-9 * (1.0 + linalg::norm(x)) && domain.contains(&y)? {
                let o = frame.relu(bias, &y)?;
                if same_output(&output, &o) && frame.active_set(bias, &y)? == active {
                    return Ok(Some(Witness {
                        x1: x.clone(),
                        x2: y,
                        output: output.clone(),
                    }));
                }
            }
            Ok(None)
        };
        // straight moves along a null direction
        let v = null[0];
        let mut t_max = 1.0 + linalg::norm(x);
        for k in 0..frame.m() {
            if !active.contains(k) {
                let slope = linalg::dot(v, frame.vector(k)).abs();
                if slope > 0.0 {
                    t_max = t_max.min((alpha[k] - c[k]) / slope);
                }
            }
        }
        let mut t = 0.5 * t_max;
        for _ in 0..60 {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                linalg::axpy(&mut y, sign * t, v);
                if let Some(w) = try_point(y)? {
                    return Ok(Some(w));
                }
            }
            t *= 0.5;
        }
        // norm-preserving moves: rotate the null-space component of x
        let mut w0 = vec![0.0; n];
        for u in &null {
            linalg::axpy(&mut w0, linalg::dot(x, u), u);
        }
        let rho = linalg::norm(&w0);
        if rho > 1e-12 {
            let fixed = linalg::sub(x, &w0);
            let w0u = linalg::scale(&w0, 1.0 / rho);
            let other = null
                .iter()
                .map(|u| {
                    let mut p = (*u).clone();
                    let along = linalg::dot(&p, &w0u);
                    linalg::axpy(&mut p, -along, &w0u);
                    p
                })
                .find(|p| linalg::norm(p) > 1e-6);
            let mut candidates = vec![linalg::sub(&fixed, &w0)];
            if let Some(p) = other {
                let p = linalg::scale(&p, 1.0 / linalg::norm(&p));
                let mut theta = std::f64::consts::FRAC_PI_2;
                for _ in 0..40 {
                    let mut y = fixed.clone();
                    linalg::axpy(&mut y, rho * theta.cos(), &w0u);
                    linalg::axpy(&mut y, rho * theta.sin(), &p);
                    candidates.push(y);
                    theta *= 0.5;
                }
            }
            for y in candidates {
                if let Some(w) = try_point(y)? {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::enumerate_facets;
    use crate::shapes;

    fn close_all(v: &[f64], target: f64, tol: f64) -> bool {
        v.iter().all(|x| (x - target).abs() <= tol)
    }

    fn quick() -> PbeOptions {
        PbeOptions {
            cap_samples: 20_000,
            ..Default::default()
        }
    }

    #[test]
    fn sampling_basis_on_ball() {
        let f = shapes::standard_basis(2);
        let d = Domain::ball(2, 1.0).unwrap();
        let e = sampling_bias_estimate(&f, &d, &SamplingOptions::default()).unwrap();
        assert!(
            e.values.values().iter().all(|v| *v > -1.0 && *v < -0.99),
            "{:?}",
            e.values
        );
        assert!(e.correction > 0.0);
    }

    #[test]
    fn sampling_triangle_on_ball() {
        let f = shapes::triangle();
        let d = Domain::ball(2, 1.0).unwrap();
        let opts = SamplingOptions {
            init: Init::Infinite,
            seed: 3,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&f, &d, &opts).unwrap();
        assert!(
            e.values.values().iter().all(|v| *v > -0.5 && *v < -0.49),
            "{:?}",
            e.values
        );
    }

    #[test]
    fn auto_init_on_sphere_with_no_samples() {
        let f = shapes::standard_basis(2);
        let opts = SamplingOptions {
            n_samples: 0,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&shapes::triangle(), &Domain::sphere(2), &opts).unwrap();
        // ties at the frame vectors lower every candidate
        assert!(close_all(e.values.values(), -0.5, 1e-15));
        let opts = SamplingOptions {
            n_samples: 0,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&f, &Domain::sphere(2), &opts).unwrap();
        // e1 lowers both coordinates to (1, 0), then e2 lowers the first to 0
        assert_eq!(e.values.values(), &[0.0, 0.0]);
        assert_eq!(e.correction, f64::INFINITY);
    }

    #[test]
    fn sampling_is_rectifying_on_its_samples() {
        let mut r = rng::stream(5, 0);
        let f = shapes::gaussian_frame(&mut r, 7, 3, true);
        let d = Domain::ball(3, 1.0).unwrap();
        let opts = SamplingOptions {
            n_samples: 5000,
            seed: 9,
            init: Init::Infinite,
            spark: SparkPolicy::Assume,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&f, &d, &opts).unwrap();
        let pts = d.sample(5000, 9, SamplingMode::Uniform).unwrap().points;
        assert!(
            f.is_alpha_rectifying_on(&e.values, &pts)
                .unwrap()
                .rectifying
        );
    }

    #[test]
    fn sampling_refuses_repeated_vectors() {
        let f = Frame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = Domain::ball(2, 1.0).unwrap();
        let err = sampling_bias_estimate(&f, &d, &SamplingOptions::default());
        assert!(matches!(err, Err(Error::NotFullSpark)));
        let opts = SamplingOptions {
            spark: SparkPolicy::General,
            n_samples: 1000,
            ..Default::default()
        };
        assert!(sampling_bias_estimate(&f, &d, &opts).is_ok());
    }

    #[test]
    fn parallel_blocks_match_sequential_sweep() {
        let f = shapes::triangle();
        let d = Domain::ball(2, 1.0).unwrap();
        let opts = SamplingOptions {
            n_samples: 10_000,
            seed: 4,
            init: Init::Infinite,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&f, &d, &opts).unwrap();
        let mut s =
            SamplingState::new(&f, BasisRule::TopCoefficients, vec![f64::INFINITY; 3]).unwrap();
        let mut sampler = d.sampler(4, SamplingMode::Uniform).unwrap();
        for _ in 0..10_000 {
            s.update(&sampler.next_point());
        }
        assert_eq!(e.values.values(), s.alpha());
    }

    #[test]
    fn stopping_rule_examples() {
        let f = shapes::triangle();
        let d = Domain::ball(2, 1.0).unwrap();
        let opts = SamplingOptions {
            seed: 1,
            ..Default::default()
        };
        let e = stopping_variant(&f, &d, 1e-4, 1000, 1_000_000, &opts).unwrap();
        assert!(close_all(e.values.values(), -0.5, 5e-3), "{:?}", e.values);
        let e = stopping_variant(&f, &d, f64::INFINITY, 1000, 1_000_000, &opts).unwrap();
        assert_eq!(e.metadata.iterations, Some(1000));
        let e = stopping_variant(&f, &d, 0.0, 1000, 5500, &opts).unwrap();
        assert_eq!(e.metadata.iterations, Some(5500));
    }

    #[test]
    fn constant_bias_examples() {
        let f = shapes::triangle();
        let c =
            constant_bias_estimate(&f, &Domain::sphere(2), &ConstantOptions::default()).unwrap();
        assert!((c.value + 0.5).abs() < 5e-3);
        let x = vec![0.3, -0.8];
        let single = Domain::sample_cloud(vec![x.clone()]).unwrap();
        let opts = ConstantOptions {
            n_samples: 10,
            with_frame_probes: false,
            ..Default::default()
        };
        let c = constant_bias_estimate(&f, &single, &opts).unwrap();
        let mut coeffs = f.analysis(&x).unwrap();
        coeffs.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(c.value, coeffs[1]);
    }

    #[test]
    fn boundary_examples() {
        for (f, target) in [
            (shapes::triangle(), -0.5),
            (shapes::tetrahedron(), -1.0 / 3.0),
            (shapes::square(), 0.0),
        ] {
            let fs = enumerate_facets(&f).unwrap();
            let e = pbe_boundary(&f, &fs).unwrap();
            assert!(
                close_all(e.values.values(), target, 1e-12),
                "{:?}",
                e.values
            );
        }
    }

    #[test]
    fn boundary_rejects_basis() {
        let h = 0.5f64.sqrt();
        let f = Frame::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![h, h]]).unwrap();
        let fs = enumerate_facets(&f).unwrap();
        assert!(matches!(
            pbe_boundary(&f, &fs),
            Err(Error::NotOmnidirectional)
        ));
    }

    #[test]
    fn sphere_examples() {
        let f = shapes::triangle();
        let e = pbe_sphere(&f, &enumerate_facets(&f).unwrap(), &quick()).unwrap();
        assert!(close_all(e.values.values(), -0.5, 1e-12));
        let t = shapes::tetrahedron();
        let e = pbe_sphere(&t, &enumerate_facets(&t).unwrap(), &quick()).unwrap();
        assert!(
            close_all(e.values.values(), -1.0 / 3f64.sqrt(), 1e-9),
            "{:?}",
            e.values
        );
        assert!(e.flagged.is_empty());
        // minimiser is the midpoint direction of the far edge
        for (i, p) in e.minimizers.iter().enumerate() {
            assert!((linalg::dot(p, t.vector(i)) + 1.0 / 3f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_never_exceeds_boundary() {
        let mut r = rng::stream(8, 0);
        for _ in 0..5 {
            let f = polytope_ready(&mut r, 9, 3);
            let fs = enumerate_facets(&f).unwrap();
            let b = pbe_boundary(&f, &fs).unwrap();
            let s = pbe_sphere(&f, &fs, &quick()).unwrap();
            assert!(s.values.le(&b.values));
        }
    }

    fn polytope_ready(r: &mut rng::Stream, m: usize, n: usize) -> Frame {
        loop {
            let f = shapes::gaussian_frame(r, m, n, true);
            if crate::polytope::is_omnidirectional(&f).unwrap() {
                return f;
            }
        }
    }

    #[test]
    fn donut_scaling() {
        let f = shapes::triangle();
        let fs = enumerate_facets(&f).unwrap();
        let e = pbe_donut(&f, &fs, 1.0, 0.0, &quick()).unwrap();
        assert!(close_all(e.values.values(), -0.5, 1e-9));
        let sq = shapes::square();
        let fs = enumerate_facets(&sq).unwrap();
        let e = pbe_donut(&sq, &fs, 3.0, 0.5, &quick()).unwrap();
        assert!(close_all(e.values.values(), 0.0, 1e-12));
        assert!(pbe_donut(&sq, &fs, 1.0, 2.0, &quick()).is_err());
    }

    #[test]
    fn tetrahedron_ball_of_radius_two() {
        // negative sphere values scale with the outer radius
        let t = shapes::tetrahedron();
        let fs = enumerate_facets(&t).unwrap();
        let e = pbe_ball(&t, &fs, 2.0, &quick()).unwrap();
        assert!(close_all(e.values.values(), -2.0 / 3f64.sqrt(), 1e-9));
        let d = Domain::ball(3, 2.0).unwrap();
        let pts = d.sample(20_000, 2, SamplingMode::Uniform).unwrap().points;
        assert!(
            t.is_alpha_rectifying_on(&e.values, &pts)
                .unwrap()
                .rectifying
        );
        // the reciprocal scaling is not valid: the radius-two point of a
        // minimiser already fails
        let half = Bias::constant(4, -0.5 / 3f64.sqrt());
        let witness = vec![e.minimizers[0].clone()];
        let probe: Vec<Vec<f64>> = witness.iter().map(|p| linalg::scale(p, 0.999)).collect();
        assert!(!t.is_alpha_rectifying_on(&half, &probe).unwrap().rectifying);
    }

    #[test]
    fn nonneg_square() {
        let sq = shapes::square();
        let fs = enumerate_facets(&sq).unwrap();
        let e = pbe_nonneg_ball(&sq, &fs, 1.0, &quick()).unwrap();
        assert_eq!(e.free, vec![2, 3]);
        assert_eq!(&e.values.values()[..2], &[0.0, 0.0]);
        let e2 = pbe_nonneg_ball(&sq, &fs, 2.0, &quick()).unwrap();
        assert_eq!(e2.free, e.free);
    }

    #[test]
    fn orthant_test() {
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 1.0];
        let m1 = [-1.0, 0.0];
        let m2 = [0.0, -1.0];
        assert!(facet_meets_open_orthant(&[&e1, &e2], 1e-9));
        assert!(!facet_meets_open_orthant(&[&e1, &m2], 1e-9));
        assert!(!facet_meets_open_orthant(&[&m1, &m2], 1e-9));
    }

    #[test]
    fn complement_examples() {
        let sq = shapes::square();
        let fs = enumerate_facets(&sq).unwrap();
        let e = pbe_ball_complement(&sq, &fs, 2.0).unwrap();
        assert!(close_all(e.values.values(), 0.0, 0.0));
        let t = shapes::triangle();
        let fs = enumerate_facets(&t).unwrap();
        assert!(matches!(
            pbe_ball_complement(&t, &fs, 1.0),
            Err(Error::Hypothesis(_))
        ));
        let oct = shapes::octahedron();
        let fs = enumerate_facets(&oct).unwrap();
        let b = pbe_boundary(&oct, &fs).unwrap();
        let c = pbe_ball_complement(&oct, &fs, 1.0).unwrap();
        assert_eq!(b.values, c.values);
    }

    #[test]
    fn certify_examples() {
        let f = shapes::triangle();
        let fs = enumerate_facets(&f).unwrap();
        let est = pbe_ball(&f, &fs, 1.0, &quick()).unwrap();
        let c = certify(&f, &Bias::constant(3, -0.6), &est).unwrap();
        assert_eq!(c.verdict, Verdict::Injective);
        assert!(c.margin.iter().all(|m| (m - 0.1).abs() < 1e-9));
        let c = certify(&f, &est.values, &est).unwrap();
        assert_eq!(c.verdict, Verdict::Injective);
        assert_eq!(c.min_margin, 0.0);
        let c = certify(&f, &Bias::zeros(3), &est).unwrap();
        assert_eq!(c.verdict, Verdict::NotInjective);
        let w = &c.witnesses[0];
        assert_ne!(w.x1, w.x2);
        let alpha = Bias::zeros(3);
        assert_eq!(
            f.relu(&alpha, &w.x1).unwrap(),
            f.relu(&alpha, &w.x2).unwrap()
        );
        assert_eq!(c.schema, SCHEMA);
    }

    #[test]
    fn certify_on_sphere_finds_mirror_pairs() {
        let f = shapes::triangle();
        let est = pbe_sphere(&f, &enumerate_facets(&f).unwrap(), &quick()).unwrap();
        let c = certify(&f, &Bias::zeros(3), &est).unwrap();
        assert_eq!(c.verdict, Verdict::NotInjective);
        let w = &c.witnesses[0];
        assert!(
            (linalg::norm(&w.x1) - 1.0).abs() < 1e-12 && (linalg::norm(&w.x2) - 1.0).abs() < 1e-9
        );
    }

    #[test]
    fn sampling_band_is_unknown() {
        let f = shapes::triangle();
        let d = Domain::ball(2, 1.0).unwrap();
        let opts = SamplingOptions {
            n_samples: 10_000,
            ..Default::default()
        };
        let e = sampling_bias_estimate(&f, &d, &opts).unwrap();
        let inside_band = Bias::new(
            e.values
                .values()
                .iter()
                .map(|v| v - 0.5 * e.correction)
                .collect(),
        );
        let cert = certify(&f, &inside_band, &e).unwrap();
        assert_eq!(
            cert.verdict,
            Verdict::Unknown,
            "{:?} {:?}",
            e.values,
            cert.witnesses
        );
        let below = e.certified();
        assert_eq!(certify(&f, &below, &e).unwrap().verdict, Verdict::Injective);
    }

    #[test]
    fn estimate_json_round_trip() {
        let sq = shapes::square();
        let fs = enumerate_facets(&sq).unwrap();
        let e = pbe_nonneg_ball(&sq, &fs, 1.0, &quick()).unwrap();
        let j = serde_json::to_string(&e).unwrap();
        assert!(j.contains("\"inf\""));
        let back: BiasEstimate = serde_json::from_str(&j).unwrap();
        assert_eq!(back, e);
    }
}
