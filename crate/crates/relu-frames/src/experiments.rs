//! Numerical experiments on random and regular frames: how the sampling
//! estimate evolves, where random layers turn injective as the redundancy
//! grows, and how slowly sampling approaches the maximal bias of a
//! regular polytope.
//!
//! Every trial draws from its own sub-seed, so results do not depend on
//! thread scheduling.

use rand::Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::{self, BasisRule, Init, PbeOptions, SamplingState};
use crate::domains::{self, Domain, SamplingMode};
use crate::error::{Error, Result};
use crate::frame::{Bias, Frame};
use crate::io::format_number;
use crate::{linalg, polytope, rng, shapes};

/// `0` followed by `1, 2, 5, 10, 20, 50, ...` up to and including `max`.
pub fn log_checkpoints(max: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut decade = 1usize;
    'outer: loop {
        for k in [1, 2, 5] {
            let v = k * decade;
            if v >= max {
                break 'outer;
            }
            out.push(v);
        }
        decade *= 10;
    }
    if max > 0 {
        out.push(max);
    }
    out
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

fn redundancy_to_m(n: usize, q: f64) -> usize {
    ((q * n as f64).round() as usize).max(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub n: usize,
    pub redundancies: Vec<f64>,
    pub trials: usize,
    pub iterations: usize,
    pub test_points: usize,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            n: 3,
            redundancies: vec![2.0, 3.3],
            trials: 20,
            iterations: 10_000,
            test_points: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionTrace {
    pub q: f64,
    pub m: usize,
    pub trial: usize,
    /// Fraction of test points in the maximal domain at each checkpoint.
    pub fractions: Vec<f64>,
}

impl EvolutionTrace {
    pub fn is_monotone(&self) -> bool {
        self.fractions.windows(2).all(|w| w[0] <= w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub n: usize,
    pub checkpoints: Vec<usize>,
    pub traces: Vec<EvolutionTrace>,
}

impl EvolutionResult {
    /// Mean and variance over trials of the fraction at each checkpoint.
    pub fn summary(&self, q: f64) -> Vec<(usize, f64, f64)> {
        let traces: Vec<&EvolutionTrace> = self.traces.iter().filter(|t| t.q == q).collect();
        self.checkpoints
            .iter()
            .enumerate()
            .map(|(c, &k)| {
                let xs: Vec<f64> = traces.iter().map(|t| t.fractions[c]).collect();
                let (m, v) = mean_var(&xs);
                (k, m, v)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut qs: Vec<f64> = self.traces.iter().map(|t| t.q).collect();
        qs.dedup();
        let rows = qs.into_iter().flat_map(|q| {
            let m = redundancy_to_m(self.n, q);
            self.summary(q).into_iter().map(move |(k, mean, var)| {
                vec![
                    self.n.to_string(),
                    m.to_string(),
                    format_number(q),
                    k.to_string(),
                    format_number(mean),
                    format_number(var),
                ]
            })
        });
        write_csv(
            &[
                "n",
                "m",
                "q",
                "iteration",
                "fraction_injective_mean",
                "fraction_injective_variance",
            ],
            rows,
        )
    }
}

/// Sampling estimate on the unit ball started at `+inf`, tracked on fresh
/// test points. Frame vectors are drawn uniformly in the ball and
/// normalised.
pub fn evolution(cfg: &EvolutionConfig) -> Result<EvolutionResult> {
    if cfg.redundancies.is_empty() || cfg.trials == 0 {
        return Err(Error::Hypothesis("empty experiment grid".into()));
    }
    let checkpoints = log_checkpoints(cfg.iterations);
    let domain = Domain::ball(cfg.n, 1.0)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.redundancies.len())
        .flat_map(|qi| (0..cfg.trials).map(move |t| (qi, t)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(qi, trial)| {
            let q = cfg.redundancies[qi];
            let m = redundancy_to_m(cfg.n, q);
            let seed = rng::sub_seed(cfg.seed, &[qi as u64, trial as u64]);
            let mut frng = rng::stream(seed, 0);
            let (frame, _) = shapes::uniform_ball_frame(&mut frng, m, cfg.n).normalized();
            let test = domain
                .sample(
                    cfg.test_points,
                    rng::sub_seed(seed, &[1]),
                    SamplingMode::Uniform,
                )?
                .points;
            let mut sampler = domain.sampler(rng::sub_seed(seed, &[2]), SamplingMode::Uniform)?;
            let mut state =
                SamplingState::new(&frame, BasisRule::TopCoefficients, vec![f64::INFINITY; m])?;
            let mut fractions = Vec::with_capacity(checkpoints.len());
            for &k in &checkpoints {
                while state.steps() < k {
                    state.update(&sampler.next_point());
                }
                let bias = Bias::new(state.alpha().to_vec());
                let inside = test
                    .iter()
                    .filter(|y| frame.in_maximal_domain(&bias, y).unwrap_or(false))
                    .count();
                fractions.push(inside as f64 / cfg.test_points as f64);
            }
            Ok(EvolutionTrace {
                q,
                m,
                trial,
                fractions,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionResult {
        n: cfg.n,
        checkpoints,
        traces,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionConfig {
    pub dims: Vec<usize>,
    /// Largest redundancy `m / n` of the grid.
    pub max_redundancy: usize,
    /// Optional cap on the number of frame vectors.
    pub max_vectors: Option<usize>,
    pub n_samples: usize,
    pub trials: usize,
    pub variances: Vec<f64>,
    pub correction_factor: f64,
    /// Rescale frame vectors to unit norm before sampling.
    pub normalize_frame: bool,
    pub seed: u64,
}

impl Default for TransitionConfig {
    fn default() -> Self {
        TransitionConfig {
            dims: vec![6, 8, 10],
            max_redundancy: 12,
            max_vectors: None,
            n_samples: 100_000,
            trials: 5,
            variances: vec![0.0],
            correction_factor: 0.05,
            normalize_frame: false,
            seed: 0,
        }
    }
}

impl TransitionConfig {
    /// The grid of the original study: `n` up to 30, `m` up to 150 and
    /// `5 * 10^5` samples per cell. Expect hours of runtime.
    pub fn full_scale() -> Self {
        TransitionConfig {
            dims: (2..=30).collect(),
            max_redundancy: 75,
            max_vectors: Some(150),
            n_samples: 500_000,
            trials: 1,
            variances: vec![0.0, 0.1, 1.0],
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionCell {
    pub n: usize,
    pub m: usize,
    pub variance: f64,
    /// Fraction of bias coordinates, over all trials, that lie below the
    /// corrected estimate.
    pub pass_fraction: f64,
    /// Fraction of trials in which every coordinate passed.
    pub certified_fraction: f64,
}

impl TransitionCell {
    pub fn redundancy(&self) -> f64 {
        self.m as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionResult {
    pub cells: Vec<TransitionCell>,
}

impl TransitionResult {
    /// Redundancy where the pass fraction first rises through `1/2`,
    /// interpolated linearly between neighbouring cells.
    pub fn crossing(&self, n: usize, variance: f64) -> Option<f64> {
        let col: Vec<&TransitionCell> = self
            .cells
            .iter()
            .filter(|c| c.n == n && c.variance == variance)
            .collect();
        for w in col.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.pass_fraction < 0.5 && b.pass_fraction >= 0.5 {
                let t = (0.5 - a.pass_fraction) / (b.pass_fraction - a.pass_fraction);
                return Some(a.redundancy() + t * (b.redundancy() - a.redundancy()));
            }
        }
        col.first()
            .filter(|c| c.pass_fraction >= 0.5)
            .map(|c| c.redundancy())
    }

    pub fn to_csv(&self) -> String {
        let rows = self.cells.iter().map(|c| {
            vec![
                c.n.to_string(),
                c.m.to_string(),
                format_number(c.redundancy()),
                format_number(c.variance),
                format_number(c.pass_fraction),
                format_number(c.certified_fraction),
            ]
        });
        write_csv(
            &[
                "n",
                "m",
                "q",
                "variance",
                "pass_fraction",
                "certified_fraction",
            ],
            rows,
        )
    }
}

/// Outcome of one trial: number of passing coordinates.
fn transition_trial(
    n: usize,
    m: usize,
    variance: f64,
    cfg: &TransitionConfig,
    seed: u64,
) -> Result<usize> {
    let mut frng = rng::stream(seed, 0);
    let frame = shapes::gaussian_frame(&mut frng, m, n, cfg.normalize_frame);
    let given: Vec<f64> = if variance > 0.0 {
        let dist =
            Normal::new(0.0, variance.sqrt()).map_err(|e| Error::Hypothesis(e.to_string()))?;
        (0..m).map(|_| frng.sample(dist)).collect()
    } else {
        vec![0.0; m]
    };
    let domain = Domain::full_space(n);
    let mut sampler = domain.sampler(rng::sub_seed(seed, &[1]), SamplingMode::Gaussian)?;
    let mut state = SamplingState::new(&frame, BasisRule::TopCoefficients, vec![f64::INFINITY; m])?;
    for _ in 0..cfg.n_samples {
        state.update(&sampler.next_point());
    }
    let rho = domains::covering_radius_proxy(n, cfg.n_samples, cfg.correction_factor);
    Ok(state
        .alpha()
        .iter()
        .zip(&given)
        .filter(|(a, g)| **a - rho >= **g)
        .count())
}

/// Gaussian frames against Gaussian samples; each
/// cell reports how many coordinates of a `N(0, variance)` bias the
/// corrected sampling estimate certifies.
pub fn transition(cfg: &TransitionConfig) -> Result<TransitionResult> {
    if cfg.dims.is_empty() || cfg.variances.is_empty() || cfg.trials == 0 || cfg.max_redundancy == 0
    {
        return Err(Error::Hypothesis("empty experiment grid".into()));
    }
    let mut grid = Vec::new();
    for (vi, &variance) in cfg.variances.iter().enumerate() {
        for &n in &cfg.dims {
            let top = cfg
                .max_vectors
                .map_or(cfg.max_redundancy * n, |c| c.min(cfg.max_redundancy * n));
            for m in n..=top {
                grid.push((vi, variance, n, m));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let passes = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (vi, variance, n, m) = grid[c];
            let seed = rng::sub_seed(cfg.seed, &[vi as u64, n as u64, m as u64, t as u64]);
            transition_trial(n, m, variance, cfg, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let cells = grid
        .iter()
        .enumerate()
        .map(|(c, &(_, variance, n, m))| {
            let p = &passes[c * cfg.trials..(c + 1) * cfg.trials];
            TransitionCell {
                n,
                m,
                variance,
                pass_fraction: p.iter().sum::<usize>() as f64 / (m * cfg.trials) as f64,
                certified_fraction: p.iter().filter(|&&k| k == m).count() as f64
                    / cfg.trials as f64,
            }
        })
        .collect();
    Ok(TransitionResult { cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBiasConfig {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for MaxBiasConfig {
    fn default() -> Self {
        MaxBiasConfig {
            iterations: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBiasResult {
    #[serde(with = "crate::io::inf_vec")]
    pub target: Vec<f64>,
    pub checkpoints: Vec<usize>,
    /// Euclidean distance to the target, `+inf` while a coordinate is
    /// still unset.
    #[serde(with = "crate::io::inf_vec")]
    pub distances: Vec<f64>,
}

impl MaxBiasResult {
    pub fn to_csv(&self) -> String {
        let rows = self
            .checkpoints
            .iter()
            .zip(&self.distances)
            .map(|(k, d)| vec![k.to_string(), format_number(*d)]);
        write_csv(&["iteration", "distance"], rows)
    }
}

/// Sampling on the sphere for the tetrahedron, compared with the facet
/// estimate of its maximal bias.
pub fn maxbias(cfg: &MaxBiasConfig) -> Result<MaxBiasResult> {
    let frame: Frame = shapes::tetrahedron();
    let fs = polytope::enumerate_facets(&frame)?;
    let target = bias::pbe_sphere(
        &frame,
        &fs,
        &PbeOptions {
            seed: cfg.seed,
            ..Default::default()
        },
    )?
    .values
    .into_values();
    let domain = Domain::sphere(3);
    let mut sampler = domain.sampler(cfg.seed, SamplingMode::Uniform)?;
    let mut state =
        SamplingState::initialised(&frame, BasisRule::TopCoefficients, &Init::Infinite, &domain)?;
    let checkpoints = log_checkpoints(cfg.iterations);
    let mut distances = Vec::with_capacity(checkpoints.len());
    for &k in &checkpoints {
        while state.steps() < k {
            state.update(&sampler.next_point());
        }
        let a = state.alpha();
        distances.push(if a.iter().all(|v| v.is_finite()) {
            linalg::dist(a, &target)
        } else {
            f64::INFINITY
        });
    }
    Ok(MaxBiasResult {
        target,
        checkpoints,
        distances,
    })
}
