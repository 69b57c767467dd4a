//! Named frames used in examples, experiments and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::frame::Frame;
use crate::linalg;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = linalg::norm(&v);
    linalg::scale(&v, 1.0 / n)
}

/// Three unit vectors at 120 degrees, the first pointing up.
pub fn triangle() -> Frame {
    let h = 3f64.sqrt() / 2.0;
    Frame::new(vec![vec![0.0, 1.0], vec![-h, -0.5], vec![h, -0.5]]).unwrap()
}

pub fn standard_basis(n: usize) -> Frame {
    Frame::new(
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect(),
    )
    .unwrap()
}

/// `e1, e2, -e1, -e2`.
pub fn square() -> Frame {
    Frame::new(vec![
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![-1.0, 0.0],
        vec![0.0, -1.0],
    ])
    .unwrap()
}

pub fn tetrahedron() -> Frame {
    Frame::new(
        [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ]
        .iter()
        .map(|v| unit(v.to_vec()))
        .collect(),
    )
    .unwrap()
}

/// `+-e_i` in `R^3`.
pub fn octahedron() -> Frame {
    let mut rows = Vec::new();
    for i in 0..3 {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; 3];
            e[i] = s;
            rows.push(e);
        }
    }
    Frame::new(rows).unwrap()
}

pub fn icosahedron() -> Frame {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut rows = Vec::new();
    for a in [1.0, -1.0] {
        for b in [g, -g] {
            rows.push(unit(vec![0.0, a, b]));
            rows.push(unit(vec![a, b, 0.0]));
            rows.push(unit(vec![b, 0.0, a]));
        }
    }
    Frame::new(rows).unwrap()
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// `m` i.i.d. standard normal vectors, optionally rescaled to unit norm.
pub fn gaussian_frame<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, normalize: bool) -> Frame {
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let v = gaussian_vector(rng, n);
                if normalize {
                    unit(v)
                } else {
                    v
                }
            })
            .collect();
        if let Ok(f) = Frame::new(rows) {
            if f.is_valid() {
                return f;
            }
        }
    }
}

/// `m` i.i.d. points uniform in the unit ball.
pub fn uniform_ball_frame<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Frame {
    loop {
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let d = unit(gaussian_vector(rng, n));
                let r = rng.random::<f64>().powf(1.0 / n as f64);
                linalg::scale(&d, r)
            })
            .collect();
        if let Ok(f) = Frame::new(rows) {
            if f.is_valid() {
                return f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_frames_are_unit() {
        for f in [
            triangle(),
            square(),
            tetrahedron(),
            octahedron(),
            icosahedron(),
        ] {
            assert!(f.is_normalized());
            assert!(f.is_valid());
        }
        assert_eq!(icosahedron().m(), 12);
        let t = tetrahedron();
        for i in 0..4 {
            for j in 0..i {
                assert!((linalg::dot(t.vector(i), t.vector(j)) + 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn icosahedron_neighbours_have_equal_angles() {
        let f = icosahedron();
        let inv5 = 1.0 / 5f64.sqrt();
        for i in 0..12 {
            let close = (0..12)
                .filter(|&j| (linalg::dot(f.vector(i), f.vector(j)) - inv5).abs() < 1e-12)
                .count();
            assert_eq!(close, 5);
        }
    }
}
