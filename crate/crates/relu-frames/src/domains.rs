//! Input domains: membership, seeded samplers and covering radii.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::frame::Frame;
use crate::linalg;
use crate::polytope::{self, FacetStructure};
use crate::rng::{self, BLOCK, GENERATOR_ID};

const MEMBERSHIP_TOL: f64 = 1e-12;

/// Boundary of the hull of a frame, kept with its facets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Frame", into = "Frame")]
pub struct PolytopeSurface {
    frame: Frame,
    facets: FacetStructure,
}

impl TryFrom<Frame> for PolytopeSurface {
    type Error = Error;
    fn try_from(frame: Frame) -> Result<Self> {
        let facets = polytope::enumerate_facets(&frame)?;
        Ok(PolytopeSurface { frame, facets })
    }
}

impl From<PolytopeSurface> for Frame {
    fn from(p: PolytopeSurface) -> Frame {
        p.frame
    }
}

impl PolytopeSurface {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn facets(&self) -> &FacetStructure {
        &self.facets
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Domain {
    Ball {
        n: usize,
        r: f64,
    },
    Sphere {
        n: usize,
    },
    /// `s <= |x| <= r`
    Donut {
        n: usize,
        r: f64,
        s: f64,
    },
    NonnegBall {
        n: usize,
        r: f64,
    },
    /// `|x| >= s`
    BallComplement {
        n: usize,
        s: f64,
    },
    PolytopeBoundary {
        frame: PolytopeSurface,
    },
    SampleCloud {
        points: Vec<Vec<f64>>,
    },
    FullSpace {
        n: usize,
    },
}

/// How unbounded domains are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    #[default]
    Uniform,
    /// Full space draws standard normal points; the ball complement draws
    /// a uniform direction with radius `s + |g|`, `g` standard normal in `R^n`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSequence {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub generator: String,
}

impl Domain {
    pub fn ball(n: usize, r: f64) -> Result<Domain> {
        Domain::Ball { n, r }.validated()
    }

    pub fn sphere(n: usize) -> Domain {
        Domain::Sphere { n }
    }

    pub fn donut(n: usize, r: f64, s: f64) -> Result<Domain> {
        Domain::Donut { n, r, s }.validated()
    }

    pub fn nonneg_ball(n: usize, r: f64) -> Result<Domain> {
        Domain::NonnegBall { n, r }.validated()
    }

    pub fn ball_complement(n: usize, s: f64) -> Result<Domain> {
        Domain::BallComplement { n, s }.validated()
    }

    pub fn polytope_boundary(frame: &Frame) -> Result<Domain> {
        Ok(Domain::PolytopeBoundary {
            frame: PolytopeSurface::try_from(frame.clone())?,
        })
    }

    pub fn sample_cloud(points: Vec<Vec<f64>>) -> Result<Domain> {
        Domain::SampleCloud { points }.validated()
    }

    pub fn full_space(n: usize) -> Domain {
        Domain::FullSpace { n }
    }

    pub fn validated(self) -> Result<Domain> {
        let bad = |m: &str| Err(Error::InvalidDomain(m.into()));
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if self.dim() == 0 {
            return bad("dimension must be positive");
        }
        match &self {
            Domain::Ball { r, .. } | Domain::NonnegBall { r, .. } if !pos(*r) => {
                bad("radius must be positive")
            }
            Domain::BallComplement { s, .. } if !pos(*s) => bad("radius must be positive"),
            Domain::Donut { r, s, .. } if !(pos(*r) && *s >= 0.0 && s < r) => {
                bad("donut needs 0 <= s < r")
            }
            Domain::SampleCloud { points } => {
                let n = points[0].len();
                if points
                    .iter()
                    .any(|p| p.len() != n || p.iter().any(|x| !x.is_finite()))
                {
                    bad("cloud points must share a dimension and be finite")
                } else {
                    Ok(self)
                }
            }
            _ => Ok(self),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball { n, .. }
            | Domain::Sphere { n }
            | Domain::Donut { n, .. }
            | Domain::NonnegBall { n, .. }
            | Domain::BallComplement { n, .. }
            | Domain::FullSpace { n } => *n,
            Domain::PolytopeBoundary { frame } => frame.frame.n(),
            Domain::SampleCloud { points } => points.first().map_or(0, |p| p.len()),
        }
    }

    /// Largest norm of a point in the domain, if bounded.
    pub fn sup_norm(&self) -> Option<f64> {
        match self {
            Domain::Ball { r, .. } | Domain::NonnegBall { r, .. } | Domain::Donut { r, .. } => {
                Some(*r)
            }
            Domain::Sphere { .. } => Some(1.0),
            Domain::PolytopeBoundary { frame } => {
                Some(frame.frame.norms().into_iter().fold(0.0, f64::max))
            }
            Domain::SampleCloud { points } => {
                Some(points.iter().map(|p| linalg::norm(p)).fold(0.0, f64::max))
            }
            Domain::BallComplement { .. } | Domain::FullSpace { .. } => None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        let t = MEMBERSHIP_TOL;
        let nx = linalg::norm(x);
        Ok(match self {
            Domain::Ball { r, .. } => nx <= r * (1.0 + t),
            Domain::Sphere { .. } => (nx - 1.0).abs() <= t,
            Domain::Donut { r, s, .. } => nx <= r * (1.0 + t) && nx >= s * (1.0 - t),
            Domain::NonnegBall { r, .. } => nx <= r * (1.0 + t) && x.iter().all(|v| *v >= 0.0),
            Domain::BallComplement { s, .. } => nx >= s * (1.0 - t),
            Domain::PolytopeBoundary { frame } => {
                let worst = frame
                    .facets
                    .facets
                    .iter()
                    .map(|f| linalg::dot(&f.normal, x) - f.offset)
                    .fold(f64::NEG_INFINITY, f64::max);
                worst.abs() <= frame.frame.tolerances().face
            }
            Domain::SampleCloud { points } => points
                .iter()
                .any(|p| linalg::dist(p, x) <= t * (1.0 + linalg::norm(p))),
            Domain::FullSpace { .. } => true,
        })
    }

    pub fn is_bounded(&self) -> bool {
        self.sup_norm().is_some()
    }

    pub fn sampler(&self, seed: u64, mode: SamplingMode) -> Result<Sampler<'_>> {
        Sampler::new(self, seed, mode)
    }

    /// `count` points, deterministic in `seed`. Blocks of [`BLOCK`]
    /// points are drawn in parallel from their own streams.
    pub fn sample(&self, count: usize, seed: u64, mode: SamplingMode) -> Result<SampleSequence> {
        let chunks = self.map_blocks(count, seed, mode, |block| block.to_vec())?;
        Ok(SampleSequence {
            points: chunks.into_iter().flatten().collect(),
            seed,
            generator: GENERATOR_ID.into(),
        })
    }

    /// Applies `f` to consecutive blocks of the sequence `sample(count,
    /// seed, mode)` in parallel, returning the results in block order.
    pub fn map_blocks<T, F>(
        &self,
        count: usize,
        seed: u64,
        mode: SamplingMode,
        f: F,
    ) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[Vec<f64>]) -> T + Sync,
    {
        let proto = Sampler::new(self, seed, mode)?;
        let blocks = count.div_ceil(BLOCK);
        Ok((0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut s = proto.clone();
                s.jump_to(b * BLOCK);
                let len = BLOCK.min(count - b * BLOCK);
                let pts: Vec<Vec<f64>> = (0..len).map(|_| s.next_point()).collect();
                f(&pts)
            })
            .collect())
    }

    /// Parse `"ball:1.0"`, `"sphere"`, `"donut:r:s"`, `"nonneg_ball:r"`,
    /// `"ball_complement:s"`, `"full_space"` or a JSON object.
    pub fn parse(spec: &str, n: usize) -> Result<Domain> {
        let spec = spec.trim();
        if spec.starts_with('{') {
            let mut v: serde_json::Value = serde_json::from_str(spec)?;
            if let Some(obj) = v.as_object_mut() {
                obj.entry("n").or_insert(serde_json::json!(n));
            }
            let d: Domain = serde_json::from_value(v)?;
            check_dim(n, d.dim())?;
            return d.validated();
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Parse {
                    line: None,
                    msg: format!("domain '{spec}' is missing a radius"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse {
                    line: None,
                    msg: format!("domain '{spec}': {e}"),
                })
        };
        match parts[0].trim() {
            "ball" => Domain::ball(n, if parts.len() > 1 { num(1)? } else { 1.0 }),
            "sphere" => Ok(Domain::sphere(n)),
            "donut" => Domain::donut(n, num(1)?, num(2)?),
            "nonneg_ball" => Domain::nonneg_ball(n, if parts.len() > 1 { num(1)? } else { 1.0 }),
            "ball_complement" => Domain::ball_complement(n, num(1)?),
            "full_space" => Ok(Domain::full_space(n)),
            other => Err(Error::Parse {
                line: None,
                msg: format!("unknown domain '{other}'"),
            }),
        }
    }
}

/// Weighted simplices of a polytope boundary.
#[derive(Debug, Clone)]
struct SurfaceTable {
    simplices: Vec<Vec<Vec<f64>>>,
    cumulative: Vec<f64>,
}

fn surface_table(surface: &PolytopeSurface) -> Result<SurfaceTable> {
    let frame = &surface.frame;
    let n = frame.n();
    let tol = frame.tolerances();
    let mut simplices = Vec::new();
    let mut weights = Vec::new();
    for f in &surface.facets.facets {
        let verts: Vec<&[f64]> = f.vertices.iter().map(|i| frame.vector(i)).collect();
        let pieces = if verts.len() == n {
            vec![(0..n).collect::<Vec<usize>>()]
        } else {
            let coords = polytope::affine_coordinates(&verts, n - 1);
            polytope::triangulate(&coords, n - 1, tol.face, tol.enumeration_cap)?
        };
        for s in pieces {
            let pts: Vec<Vec<f64>> = s.iter().map(|&j| verts[j].to_vec()).collect();
            let edges: Vec<Vec<f64>> = pts[1..].iter().map(|p| linalg::sub(p, &pts[0])).collect();
            let w = if edges.is_empty() {
                1.0
            } else {
                let d = edges.len();
                let mut g = vec![0.0; d * d];
                for a in 0..d {
                    for b in 0..d {
                        g[a * d + b] = linalg::dot(&edges[a], &edges[b]);
                    }
                }
                linalg::determinant_spd(&g, d).max(0.0).sqrt()
            };
            simplices.push(pts);
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let cumulative = weights
        .iter()
        .map(|w| {
            acc += w / total;
            acc
        })
        .collect();
    Ok(SurfaceTable {
        simplices,
        cumulative,
    })
}

/// Endless stream of domain points. Point `k` comes from stream
/// `k / BLOCK` of the seed.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    domain: &'a Domain,
    mode: SamplingMode,
    seed: u64,
    position: usize,
    rng: rng::Stream,
    surface: Option<std::sync::Arc<SurfaceTable>>,
}

impl<'a> Sampler<'a> {
    fn new(domain: &'a Domain, seed: u64, mode: SamplingMode) -> Result<Self> {
        match (domain, mode) {
            (Domain::FullSpace { .. }, SamplingMode::Uniform) => {
                return Err(Error::Unsupported(
                    "uniform sampling of the full space; use Gaussian mode".into(),
                ))
            }
            (Domain::BallComplement { .. }, SamplingMode::Uniform) => {
                return Err(Error::Unsupported(
                    "uniform sampling of a ball complement; use Gaussian mode".into(),
                ))
            }
            _ => {}
        }
        let surface = match domain {
            Domain::PolytopeBoundary { frame } => Some(std::sync::Arc::new(surface_table(frame)?)),
            _ => None,
        };
        Ok(Sampler {
            domain,
            mode,
            seed,
            position: 0,
            rng: rng::stream(seed, 0),
            surface,
        })
    }

    fn jump_to(&mut self, position: usize) {
        self.position = position;
        self.rng = rng::stream(self.seed, (position / BLOCK) as u64);
    }

    fn direction(&mut self, n: usize) -> Vec<f64> {
        loop {
            let g: Vec<f64> = (0..n)
                .map(|_| self.rng.sample::<f64, _>(StandardNormal))
                .collect();
            let ng = linalg::norm(&g);
            if ng > 1e-300 {
                return linalg::scale(&g, 1.0 / ng);
            }
        }
    }

    fn ball_point(&mut self, n: usize, r: f64) -> Vec<f64> {
        let d = self.direction(n);
        let u: f64 = self.rng.random();
        linalg::scale(&d, r * u.powf(1.0 / n as f64))
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        if self.position > 0 && self.position % BLOCK == 0 {
            self.rng = rng::stream(self.seed, (self.position / BLOCK) as u64);
        }
        let k = self.position;
        self.position += 1;
        match self.domain {
            Domain::Ball { n, r } => self.ball_point(*n, *r),
            Domain::Sphere { n } => self.direction(*n),
            Domain::Donut { n, r, s } => {
                let d = self.direction(*n);
                let nf = *n as f64;
                let u: f64 = self.rng.random();
                let t = (s.powf(nf) + u * (r.powf(nf) - s.powf(nf))).powf(1.0 / nf);
                linalg::scale(&d, t)
            }
            Domain::NonnegBall { n, r } => {
                self.ball_point(*n, *r).into_iter().map(f64::abs).collect()
            }
            Domain::BallComplement { n, s } => {
                let d = self.direction(*n);
                let g: Vec<f64> = (0..*n)
                    .map(|_| self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                linalg::scale(&d, s + linalg::norm(&g))
            }
            Domain::FullSpace { n } => (0..*n)
                .map(|_| self.rng.sample::<f64, _>(StandardNormal))
                .collect(),
            Domain::SampleCloud { points } => points[k % points.len()].clone(),
            Domain::PolytopeBoundary { .. } => {
                let table = self
                    .surface
                    .clone()
                    .expect("surface table built with the sampler");
                let u: f64 = self.rng.random();
                let pick = table
                    .cumulative
                    .partition_point(|c| *c < u)
                    .min(table.simplices.len() - 1);
                let simplex = &table.simplices[pick];
                let w: Vec<f64> = simplex
                    .iter()
                    .map(|_| -(1.0 - self.rng.random::<f64>()).ln())
                    .collect();
                let total: f64 = w.iter().sum();
                let mut x = vec![0.0; simplex[0].len()];
                for (wi, p) in w.iter().zip(simplex) {
                    linalg::axpy(&mut x, wi / total, p);
                }
                x
            }
        }
    }

    pub fn mode(&self) -> SamplingMode {
        self.mode
    }
}

/// `factor * (ln N / N)^(1/n)`.
pub fn covering_radius_proxy(n: usize, count: usize, factor: f64) -> f64 {
    let nf = count as f64;
    factor * (nf.ln() / nf).powf(1.0 / n as f64)
}

/// Largest distance from a probe to its nearest sample, a lower bound
/// on the covering radius of the samples.
pub fn covering_radius_empirical(samples: &[Vec<f64>], probes: &[Vec<f64>]) -> f64 {
    probes
        .par_iter()
        .map(|p| {
            samples
                .iter()
                .map(|s| linalg::dist(p, s))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// `count` unit vectors spread round robin over geodesic disks of the
/// given radius around `centres`, uniform in the tangent disk of each.
pub fn sphere_points_near(
    centres: &[Vec<f64>],
    radius: f64,
    count: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = rng::stream(seed, 0);
    (0..count)
        .map(|k| {
            let c = linalg::scale(
                &centres[k % centres.len()],
                1.0 / linalg::norm(&centres[k % centres.len()]),
            );
            let n = c.len();
            if n == 1 {
                return c;
            }
            let mut g: Vec<f64> = (0..n)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let along = linalg::dot(&g, &c);
            linalg::axpy(&mut g, -along, &c);
            let dir = linalg::scale(&g, 1.0 / linalg::norm(&g));
            let len = radius * rng.random::<f64>().powf(1.0 / (n - 1) as f64);
            let mut p = linalg::scale(&c, len.cos());
            linalg::axpy(&mut p, len.sin(), &dir);
            p
        })
        .collect()
}
