//! Instance generators and randomized properties shared by the
//! integration suites and the acceptance runner.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;

use relu_frames::bias::{self, BasisRule, PbeOptions, SamplingState};
use relu_frames::polytope::{self, FacetStructure};
use relu_frames::{
    linalg, rng, shapes, solvers, Bias, BiasEstimate, Domain, Frame, IndexSet, SamplingMode,
};

pub type Stream = rng::Stream;

pub fn stream(seed: u64) -> Stream {
    rng::stream(seed, 7)
}

pub fn ball_points(n: usize, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    Domain::ball(n, r)
        .unwrap()
        .sample(count, seed, SamplingMode::Uniform)
        .unwrap()
        .points
}

/// Unit-norm Gaussian frame whose hull contains the origin in its interior.
pub fn omnidirectional_frame(rng: &mut Stream, m: usize, n: usize) -> (Frame, FacetStructure) {
    loop {
        let f = shapes::gaussian_frame(rng, m, n, true);
        if let Ok(fs) = polytope::enumerate_facets(&f) {
            if fs.is_omnidirectional(f.tolerances().face) {
                return (f, fs);
            }
        }
    }
}

/// A frame with a bias just below its polytope estimate on the unit ball,
/// and that estimate.
pub fn injective_instance(seed: u64, n: usize) -> (Frame, Bias, BiasEstimate) {
    let mut r = stream(seed);
    let (frame, fs) = omnidirectional_frame(&mut r, 2 * n, n);
    let est = bias::pbe_ball(
        &frame,
        &fs,
        1.0,
        &PbeOptions {
            cap_samples: 32,
            seed,
            ..Default::default()
        },
    )
    .unwrap();
    let given = Bias::new(est.certified().values().iter().map(|v| v - 1e-3).collect());
    (frame, given, est)
}

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

/// `(seed, n, extra vectors)`.
pub fn instance_strategy() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..6, 1usize..8)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

/// Every update of the sampling estimate only lowers coordinates.
pub fn sampling_is_monotone((seed, n, extra): (u64, usize, usize)) -> Result<(), TestCaseError> {
    let mut r = stream(seed);
    let frame = shapes::gaussian_frame(&mut r, n + extra, n, true);
    let mut state = SamplingState::new(
        &frame,
        BasisRule::Bottleneck,
        vec![f64::INFINITY; frame.m()],
    )
    .unwrap();
    for x in ball_points(n, 1.0, 40, seed) {
        let before = state.alpha().to_vec();
        state.update(&x);
        check(
            state.alpha().iter().zip(&before).all(|(a, b)| a <= b),
            "a coordinate increased",
        )?;
    }
    Ok(())
}

/// Rescaling vectors to unit norm and dividing the bias alike keeps every
/// active set.
pub fn normalization_preserves_active_sets(
    (seed, n, extra): (u64, usize, usize),
) -> Result<(), TestCaseError> {
    let mut r = stream(seed);
    let m = n + extra;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            linalg::scale(
                &shapes::gaussian_vector(&mut r, n),
                r.random_range(0.2..5.0),
            )
        })
        .collect();
    let frame = Frame::new(rows).unwrap();
    let alpha = Bias::new((0..m).map(|_| r.random_range(-1.0..0.5)).collect());
    let (unit, scaled, norms) = frame.normalize(&alpha).unwrap();
    for x in ball_points(n, 2.0, 30, seed) {
        let c = frame.analysis(&x).unwrap();
        // skip points whose coefficient sits on the threshold up to rounding
        let tied = c
            .iter()
            .zip(alpha.values())
            .zip(&norms)
            .any(|((ci, ai), w)| (ci - ai).abs() < 1e-12 * w.max(1.0));
        if tied {
            continue;
        }
        check(
            frame.active_set(&alpha, &x).unwrap() == unit.active_set(&scaled, &x).unwrap(),
            "active sets differ",
        )?;
        check(
            frame.in_maximal_domain(&alpha, &x).unwrap()
                == unit.in_maximal_domain(&scaled, &x).unwrap(),
            "maximal domain membership differs",
        )?;
    }
    Ok(())
}

/// A frame moved by less than `eps` per vector stays rectifying for the
/// bias lowered by `eps M`, as long as the move is small against the
/// smallest singular value of the active sub-collections.
pub fn perturbation_is_sound((seed, n, extra): (u64, usize, usize)) -> Result<(), TestCaseError> {
    let mut r = stream(seed);
    let m = n + extra;
    let frame = shapes::gaussian_frame(&mut r, m, n, true);
    let alpha = Bias::new((0..m).map(|_| r.random_range(-0.8..0.2)).collect());
    let radius = r.random_range(0.5..2.0);
    let pts: Vec<Vec<f64>> = ball_points(n, radius, 40, seed)
        .into_iter()
        .filter(|x| frame.in_maximal_domain(&alpha, x).unwrap())
        .collect();
    let sigma = pts
        .iter()
        .map(|x| {
            frame
                .sub_bounds(&frame.active_set(&alpha, x).unwrap())
                .lower
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    if !sigma.is_finite() {
        return Ok(());
    }
    let eps = 0.5 * sigma / (m as f64).sqrt();
    let moved: Vec<Vec<f64>> = frame
        .vectors()
        .map(|v| {
            let d = shapes::gaussian_vector(&mut r, n);
            let len = eps * r.random_range(0.0..0.999);
            let mut w = v.to_vec();
            linalg::axpy(&mut w, len / linalg::norm(&d), &d);
            w
        })
        .collect();
    let other = Frame::new(moved).unwrap();
    let lowered = alpha.perturbed(eps, radius).unwrap();
    for x in &pts {
        let before = frame.active_set(&alpha, x).unwrap();
        let after = other.active_set(&lowered, x).unwrap();
        check(before.is_subset(&after), "active set shrank")?;
        check(
            other.in_maximal_domain(&lowered, x).unwrap(),
            "perturbed frame not rectifying",
        )?;
    }
    Ok(())
}

/// Scaling the domain and the bias by a power of two keeps active sets.
pub fn scaling_is_consistent((seed, n, extra): (u64, usize, usize)) -> Result<(), TestCaseError> {
    let mut r = stream(seed);
    let frame = shapes::gaussian_frame(&mut r, n + extra, n, true);
    let alpha = Bias::new((0..frame.m()).map(|_| r.random_range(-1.0..0.3)).collect());
    let s = 2f64.powi(r.random_range(-4..5));
    let big = alpha.scaled(s);
    for x in ball_points(n, 1.0, 30, seed) {
        let sx = linalg::scale(&x, s);
        check(
            frame.active_set(&alpha, &x).unwrap() == frame.active_set(&big, &sx).unwrap(),
            "active sets differ",
        )?;
    }
    Ok(())
}

/// Facets support the hull, carry their vertices and their cones cover
/// the space.
pub fn facets_support_hull((seed, n, extra): (u64, usize, usize)) -> Result<(), TestCaseError> {
    let mut r = stream(seed);
    let n = n.min(4);
    let (frame, fs) = omnidirectional_frame(&mut r, n + 1 + extra.min(5), n);
    let tol = 1e-9;
    for f in &fs.facets {
        check(
            (linalg::norm(&f.normal) - 1.0).abs() < tol,
            "normal not unit",
        )?;
        check(f.offset > 0.0, "origin not interior")?;
        check(f.vertices.len() >= n, "too few vertices")?;
        for (j, v) in frame.vectors().enumerate() {
            let side = linalg::dot(&f.normal, v) - f.offset;
            check(side <= tol, "vertex beyond a facet")?;
            check(
                (side.abs() <= tol) == f.vertices.contains(j),
                "facet vertex list wrong",
            )?;
        }
        check(
            frame.rank_of(&f.vertices) == n,
            "facet vertices do not span",
        )?;
    }
    for x in ball_points(n, 1.0, 10, seed) {
        let hit = fs.facet_for_point(&x).unwrap();
        let verts: Vec<&[f64]> = fs.facets[hit.facet]
            .vertices
            .iter()
            .map(|j| frame.vector(j))
            .collect();
        let sol = solvers::nnls(&verts, &x, 10_000, 1e-12);
        check(
            linalg::norm(&sol.residual) < 1e-7,
            "point outside the cone of its facet",
        )?;
    }
    Ok(())
}

pub fn subset(idx: &[usize]) -> IndexSet {
    IndexSet::new(idx.to_vec())
}
