//! Convex hull of the frame vectors: facets, omnidirectionality, cones.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::frame::{Frame, IndexSet};
use crate::linalg;

/// Supporting hyperplane `<normal, x> = offset` with the frame indices on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub vertices: IndexSet,
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetStructure {
    pub n: usize,
    pub facets: Vec<Facet>,
    pub simplicial: bool,
}

/// Facet whose cone contains a point; `boundary` is set when several
/// cones contain it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FacetHit {
    pub facet: usize,
    pub boundary: bool,
}

/// Brute-force hull of `points` in `R^dim`: every `dim`-subset spanning a
/// hyperplane that leaves all points on one side gives a facet, and
/// subsets on the same hyperplane are merged.
pub(crate) fn hull_facets(
    points: &[&[f64]],
    dim: usize,
    tol_face: f64,
    cap: f64,
) -> Result<Vec<Facet>> {
    let k = points.len();
    if k < dim + 1 {
        return Err(Error::DegenerateHull);
    }
    let count = linalg::binomial(k, dim);
    if count > cap {
        return Err(Error::EnumerationCap {
            subsets: count,
            cap,
        });
    }
    let mut centroid = vec![0.0; dim];
    for p in points {
        linalg::axpy(&mut centroid, 1.0 / k as f64, p);
    }
    let diffs: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| linalg::sub(p, points[0]))
        .collect();
    let diff_refs: Vec<&[f64]> = diffs.iter().map(|d| d.as_slice()).collect();
    if linalg::numerical_rank(&diff_refs, dim, 1e-10) < dim {
        return Err(Error::DegenerateHull);
    }
    let spread = diffs.iter().map(|d| linalg::norm(d)).fold(0.0, f64::max);
    let indep_cut = 1e-10 * dim as f64 * spread;

    let mut facets = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let base = points[idx[0]];
        let rows: Vec<Vec<f64>> = idx[1..]
            .iter()
            .map(|&i| linalg::sub(points[i], base))
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let (mut a, min_r) = linalg::null_vector(&refs, dim);
        if min_r > indep_cut {
            let mut b = linalg::dot(&a, base);
            if linalg::dot(&a, &centroid) > b {
                a.iter_mut().for_each(|x| *x = -*x);
                b = -b;
            }
            let gaps: Vec<f64> = points.iter().map(|p| linalg::dot(&a, p) - b).collect();
            if gaps.iter().all(|g| *g <= tol_face) {
                let on: Vec<usize> = (0..k).filter(|&i| gaps[i].abs() <= tol_face).collect();
                if seen.insert(on.clone()) {
                    facets.push(Facet {
                        vertices: IndexSet::new(on),
                        normal: a,
                        offset: b,
                    });
                }
            }
        }
        if !linalg::next_combination(&mut idx, k) {
            break;
        }
    }
    if facets.is_empty() {
        return Err(Error::DegenerateHull);
    }
    Ok(facets)
}

/// Simplices (as lists of `dim + 1` point indices) triangulating the hull
/// of `points` in `R^dim`, by coning from the first vertex over every
/// facet that misses it.
pub(crate) fn triangulate(
    points: &[Vec<f64>],
    dim: usize,
    tol_face: f64,
    cap: f64,
) -> Result<Vec<Vec<usize>>> {
    if dim == 0 {
        return Ok(vec![vec![0]]);
    }
    if dim == 1 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        return Ok(vec![vec![lo, hi]]);
    }
    if points.len() == dim + 1 {
        return Ok(vec![(0..=dim).collect()]);
    }
    let refs: Vec<&[f64]> = points.iter().map(|p| p.as_slice()).collect();
    let facets = hull_facets(&refs, dim, tol_face, cap)?;
    let apex = facets[0].vertices.as_slice()[0];
    let mut out = Vec::new();
    for f in facets.iter().filter(|f| !f.vertices.contains(apex)) {
        let local: Vec<usize> = f.vertices.iter().collect();
        let coords =
            affine_coordinates(&local.iter().map(|&i| refs[i]).collect::<Vec<_>>(), dim - 1);
        for s in triangulate(&coords, dim - 1, tol_face, cap)? {
            let mut simplex = vec![apex];
            simplex.extend(s.iter().map(|&j| local[j]));
            out.push(simplex);
        }
    }
    Ok(out)
}

/// Coordinates of points lying in a `d`-dimensional affine subspace,
/// expressed in an orthonormal basis of that subspace.
pub(crate) fn affine_coordinates(points: &[&[f64]], d: usize) -> Vec<Vec<f64>> {
    let origin = points[0];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    let spread = points
        .iter()
        .map(|p| linalg::dist(p, origin))
        .fold(0.0, f64::max);
    for p in &points[1..] {
        if basis.len() == d {
            break;
        }
        let mut r = linalg::sub(p, origin);
        for _ in 0..2 {
            for q in &basis {
                let c = linalg::dot(&r, q);
                linalg::axpy(&mut r, -c, q);
            }
        }
        let nr = linalg::norm(&r);
        if nr > 1e-9 * spread {
            basis.push(linalg::scale(&r, 1.0 / nr));
        }
    }
    points
        .iter()
        .map(|p| {
            let r = linalg::sub(p, origin);
            basis.iter().map(|q| linalg::dot(&r, q)).collect()
        })
        .collect()
}

pub fn enumerate_facets(frame: &Frame) -> Result<FacetStructure> {
    let tol = frame.tolerances();
    let pts: Vec<&[f64]> = frame.vectors().collect();
    let facets = hull_facets(&pts, frame.n(), tol.face, tol.enumeration_cap)?;
    let simplicial = facets.iter().all(|f| f.vertices.len() == frame.n());
    Ok(FacetStructure {
        n: frame.n(),
        facets,
        simplicial,
    })
}

/// Origin strictly inside the hull. A hull without interior is never
/// omnidirectional.
pub fn is_omnidirectional(frame: &Frame) -> Result<bool> {
    match enumerate_facets(frame) {
        Ok(fs) => Ok(fs.is_omnidirectional(frame.tolerances().face)),
        Err(Error::DegenerateHull) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Appends `-sum(phi) / |sum(phi)|`; a frame whose vectors sum to zero is
/// returned unchanged.
pub fn make_omnidirectional(frame: &Frame) -> Frame {
    let mut s = vec![0.0; frame.n()];
    for v in frame.vectors() {
        linalg::axpy(&mut s, 1.0, v);
    }
    let ns = linalg::norm(&s);
    if ns <= 1e-12 * frame.m() as f64 {
        return frame.clone();
    }
    let mut rows = frame.to_rows();
    rows.push(linalg::scale(&s, -1.0 / ns));
    Frame::new(rows)
        .expect("appended vector is a unit vector")
        .with_tolerances(*frame.tolerances())
}

impl FacetStructure {
    pub fn is_omnidirectional(&self, tol_face: f64) -> bool {
        self.facets.iter().all(|f| f.offset > tol_face)
    }

    pub fn facets_containing(&self, i: usize) -> impl Iterator<Item = (usize, &Facet)> + '_ {
        self.facets
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.vertices.contains(i))
    }

    /// The facet maximising `<a_j, x> / b_j`, i.e. the one the ray through
    /// `x` leaves the polytope by.
    pub fn facet_for_point(&self, x: &[f64]) -> Result<FacetHit> {
        check_dim(self.n, x.len())?;
        if linalg::norm(x) == 0.0 {
            return Err(Error::Hypothesis("the origin lies in every cone".into()));
        }
        let ratios: Vec<f64> = self
            .facets
            .iter()
            .map(|f| linalg::dot(&f.normal, x) / f.offset)
            .collect();
        let best = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let band = 1e-9 * best.abs().max(linalg::norm(x));
        let mut close = ratios
            .iter()
            .enumerate()
            .filter(|(_, r)| **r >= best - band)
            .map(|(j, _)| j);
        let facet = close
            .next()
            .expect("at least one facet attains the maximum");
        Ok(FacetHit {
            facet,
            boundary: close.next().is_some(),
        })
    }

    /// Unordered vertex pairs lying on a common ridge. Only meaningful in
    /// `R^3`, where ridges are edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = HashSet::new();
        for (a, fa) in self.facets.iter().enumerate() {
            for fb in &self.facets[a + 1..] {
                let common: Vec<usize> = fa
                    .vertices
                    .iter()
                    .filter(|&i| fb.vertices.contains(i))
                    .collect();
                if common.len() == 2 {
                    edges.insert((common[0], common[1]));
                }
            }
        }
        let mut e: Vec<_> = edges.into_iter().collect();
        e.sort_unstable();
        e
    }

    pub fn vertex_count(&self) -> usize {
        let mut all: Vec<usize> = self.facets.iter().flat_map(|f| f.vertices.iter()).collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;

    fn sets(fs: &FacetStructure) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = fs
            .facets
            .iter()
            .map(|f| f.vertices.as_slice().to_vec())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn triangle_has_three_edges() {
        let fs = enumerate_facets(&shapes::triangle()).unwrap();
        assert_eq!(sets(&fs), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(fs.simplicial);
        for f in &fs.facets {
            assert!((f.offset - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn tetrahedron_facets_omit_one_vertex() {
        let fs = enumerate_facets(&shapes::tetrahedron()).unwrap();
        assert_eq!(
            sets(&fs),
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
    }

    #[test]
    fn square_edges() {
        let fs = enumerate_facets(&shapes::square()).unwrap();
        assert_eq!(fs.facets.len(), 4);
        for i in 0..4 {
            assert_eq!(fs.facets_containing(i).count(), 2);
        }
    }

    #[test]
    fn cube_faces_merge() {
        let mut rows = Vec::new();
        for a in [1.0, -1.0] {
            for b in [1.0, -1.0] {
                for c in [1.0, -1.0] {
                    rows.push(vec![a, b, c]);
                }
            }
        }
        let fs = enumerate_facets(&Frame::new(rows).unwrap()).unwrap();
        assert_eq!(fs.facets.len(), 6);
        assert!(!fs.simplicial);
        assert!(fs.facets.iter().all(|f| f.vertices.len() == 4));
    }

    #[test]
    fn omnidirectional_examples() {
        assert!(is_omnidirectional(&shapes::triangle()).unwrap());
        assert!(!is_omnidirectional(&shapes::standard_basis(2)).unwrap());
        assert!(!is_omnidirectional(&shapes::standard_basis(3)).unwrap());
        let f = Frame::new(vec![vec![1.0, 0.2], vec![0.3, 1.0]]).unwrap();
        assert!(is_omnidirectional(&f.with_negatives()).unwrap());
    }

    #[test]
    fn augmentation() {
        let g = make_omnidirectional(&shapes::standard_basis(2));
        let h = 1.0 / 2f64.sqrt();
        let last = g.vector(2);
        assert!((last[0] + h).abs() < 1e-15 && (last[1] + h).abs() < 1e-15);
        assert!(is_omnidirectional(&g).unwrap());
        assert_eq!(
            make_omnidirectional(&shapes::triangle()),
            shapes::triangle()
        );
    }

    #[test]
    fn cones() {
        let t = shapes::tetrahedron();
        let fs = enumerate_facets(&t).unwrap();
        let f0 = &fs.facets[0];
        let mut c = vec![0.0; 3];
        for i in f0.vertices.iter() {
            linalg::axpy(&mut c, 1.0, t.vector(i));
        }
        let hit = fs.facet_for_point(&c).unwrap();
        assert_eq!(
            hit,
            FacetHit {
                facet: 0,
                boundary: false
            }
        );
        let tri = shapes::triangle();
        let fs = enumerate_facets(&tri).unwrap();
        assert!(fs.facet_for_point(&[0.0, 1.0]).unwrap().boundary);
        let x = [0.3, -0.7];
        let x2 = [0.6, -1.4];
        assert_eq!(
            fs.facet_for_point(&x).unwrap().facet,
            fs.facet_for_point(&x2).unwrap().facet
        );
        assert!(fs.facet_for_point(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn euler_characteristic_of_icosahedron() {
        let fs = enumerate_facets(&shapes::icosahedron()).unwrap();
        let v = fs.vertex_count() as i64;
        let e = fs.edges().len() as i64;
        let f = fs.facets.len() as i64;
        assert_eq!((v, e, f), (12, 30, 20));
        assert_eq!(v - e + f, 2);
    }

    #[test]
    fn triangulating_a_square_gives_two_triangles() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let simplices = triangulate(&pts, 2, 1e-9, 1e6).unwrap();
        assert_eq!(simplices.len(), 2);
        for s in &simplices {
            assert_eq!(s.len(), 3);
        }
    }
}
