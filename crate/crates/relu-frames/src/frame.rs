//! Frames, bias vectors, active index sets and the rectifying checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Sorted, duplicate-free set of zero-based frame indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        idx.dedup();
        IndexSet(idx)
    }

    pub fn full(m: usize) -> Self {
        IndexSet((0..m).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        IndexSet::new(v)
    }
}

/// Bias vector. Entries may be `+inf` for coordinates that never
/// received a finite value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bias(#[serde(with = "crate::io::inf_vec")] Vec<f64>);

impl Bias {
    pub fn new(values: Vec<f64>) -> Self {
        Bias(values)
    }

    pub fn constant(m: usize, value: f64) -> Self {
        Bias(vec![value; m])
    }

    pub fn zeros(m: usize) -> Self {
        Bias(vec![0.0; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `alpha_i - eps * bound` for every coordinate.
    pub fn perturbed(&self, eps: f64, bound: f64) -> Result<Bias> {
        if eps < 0.0 || bound < 0.0 || eps.is_nan() || bound.is_nan() {
            return Err(Error::Hypothesis(
                "perturbation needs eps >= 0 and M >= 0".into(),
            ));
        }
        Ok(Bias(self.0.iter().map(|a| a - eps * bound).collect()))
    }

    pub fn scaled(&self, r: f64) -> Bias {
        Bias(self.0.iter().map(|a| a * r).collect())
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Bias) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Result of the most-correlated-basis search.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChoice {
    pub indices: IndexSet,
    /// `min_{j in indices} <x, phi_j>`
    pub value: f64,
    /// False when another basis reaches the same value within the tie
    /// tolerance.
    pub unique: bool,
}

/// Active set with the indices whose coefficient is within the tie band
/// of the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    pub indices: IndexSet,
    pub ties: IndexSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RectifyingReport {
    pub rectifying: bool,
    /// Positions (into the sample list) of points whose active set is not a frame.
    pub failing: Vec<usize>,
}

/// `m` vectors in `R^n`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    n: usize,
    data: Vec<f64>,
    tol: Tolerances,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    n: usize,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<FrameRepr> for Frame {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Frame> {
        let f = Frame::new(r.vectors)?;
        check_dim(r.n, f.n)?;
        Ok(f)
    }
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> FrameRepr {
        FrameRepr {
            n: f.n,
            vectors: f.to_rows(),
        }
    }
}

impl Frame {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Frame> {
        let m = vectors.len();
        if m == 0 {
            return Err(Error::InvalidFrame("no vectors".into()));
        }
        let n = vectors[0].len();
        if n == 0 {
            return Err(Error::InvalidFrame("vectors have dimension 0".into()));
        }
        if m < n {
            return Err(Error::InvalidFrame(format!(
                "{m} vectors cannot span R^{n}"
            )));
        }
        let mut data = Vec::with_capacity(m * n);
        for (i, v) in vectors.iter().enumerate() {
            check_dim(n, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidFrame(format!(
                    "vector {i} has a non-finite entry"
                )));
            }
            if v.iter().all(|x| *x == 0.0) {
                return Err(Error::InvalidFrame(format!("vector {i} is zero")));
            }
            data.extend_from_slice(v);
        }
        Ok(Frame {
            n,
            data,
            tol: Tolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Frame {
        self.tol = tol;
        self
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn m(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vectors().map(|v| v.to_vec()).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.vectors().map(linalg::norm).collect()
    }

    /// The frame followed by the negatives of its vectors.
    pub fn with_negatives(&self) -> Frame {
        let mut rows = self.to_rows();
        rows.extend(self.vectors().map(|v| v.iter().map(|x| -x).collect()));
        Frame::new(rows)
            .expect("negation keeps vectors nonzero")
            .with_tolerances(self.tol)
    }

    pub(crate) fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        self.vectors().map(|v| linalg::dot(v, x)).collect()
    }

    pub fn analysis(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        Ok(self.coefficients(x))
    }

    /// Synthesis `sum_i c_i phi_i`.
    pub fn synthesis(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.m(), c.len())?;
        let mut y = vec![0.0; self.n];
        for (ci, v) in c.iter().zip(self.vectors()) {
            linalg::axpy(&mut y, *ci, v);
        }
        Ok(y)
    }

    fn check_bias(&self, bias: &Bias) -> Result<()> {
        check_dim(self.m(), bias.len())
    }

    /// `max(0, <x, phi_i> - alpha_i)` for every `i`.
    pub fn relu(&self, bias: &Bias, x: &[f64]) -> Result<Vec<f64>> {
        self.check_bias(bias)?;
        check_dim(self.n, x.len())?;
        Ok(self
            .vectors()
            .zip(bias.values())
            .map(|(v, a)| (linalg::dot(v, x) - a).max(0.0))
            .collect())
    }

    /// `max(gamma s, s)` with `s = <x, phi_i> - alpha_i`.
    pub fn prelu(&self, bias: &Bias, gamma: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.check_bias(bias)?;
        check_dim(self.n, x.len())?;
        Ok(self
            .vectors()
            .zip(bias.values())
            .map(|(v, a)| {
                let s = linalg::dot(v, x) - a;
                s.max(gamma * s)
            })
            .collect())
    }

    pub fn frame_operator(&self) -> Vec<f64> {
        linalg::gram_of_rows(self.vectors(), self.n)
    }

    pub fn sub_operator(&self, idx: &IndexSet) -> Vec<f64> {
        linalg::gram_of_rows(idx.iter().map(|i| self.vector(i)), self.n)
    }

    pub fn rank_of(&self, idx: &IndexSet) -> usize {
        let rows: Vec<&[f64]> = idx.iter().map(|i| self.vector(i)).collect();
        linalg::numerical_rank(&rows, self.n, self.tol.rank)
    }

    pub fn is_valid(&self) -> bool {
        self.rank_of(&IndexSet::full(self.m())) == self.n
    }

    pub fn bounds(&self) -> Result<FrameBounds> {
        if !self.is_valid() {
            return Err(Error::NotAFrame);
        }
        let ev = linalg::sym_eigenvalues(&self.frame_operator(), self.n);
        Ok(FrameBounds {
            lower: ev[0],
            upper: ev[self.n - 1],
        })
    }

    /// Extreme eigenvalues of the frame operator of a sub-collection.
    pub fn sub_bounds(&self, idx: &IndexSet) -> FrameBounds {
        let ev = linalg::sym_eigenvalues(&self.sub_operator(idx), self.n);
        FrameBounds {
            lower: ev[0].max(0.0),
            upper: ev[self.n - 1],
        }
    }

    pub fn is_subframe(&self, idx: &IndexSet) -> bool {
        idx.len() >= self.n && self.rank_of(idx) == self.n
    }

    pub(crate) fn active_from_coefficients(&self, c: &[f64], bias: &Bias) -> IndexSet {
        IndexSet(
            c.iter()
                .zip(bias.values())
                .enumerate()
                .filter(|(_, (ci, a))| *ci >= *a)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// `{ i : <x, phi_i> >= alpha_i }` with exact comparison.
    pub fn active_set(&self, bias: &Bias, x: &[f64]) -> Result<IndexSet> {
        self.check_bias(bias)?;
        let c = self.analysis(x)?;
        Ok(self.active_from_coefficients(&c, bias))
    }

    /// Active set together with the coordinates lying within the tie band.
    pub fn active_set_with_ties(&self, bias: &Bias, x: &[f64]) -> Result<ActiveSet> {
        self.check_bias(bias)?;
        let c = self.analysis(x)?;
        let ties = c
            .iter()
            .zip(bias.values())
            .enumerate()
            .filter(|(_, (ci, a))| (*ci - *a).abs() <= self.tol.tie)
            .map(|(i, _)| i)
            .collect();
        Ok(ActiveSet {
            indices: self.active_from_coefficients(&c, bias),
            ties: IndexSet(ties),
        })
    }

    /// Indices of the `n` largest coefficients. Exact most correlated
    /// basis for full-spark frames.
    pub(crate) fn top_coefficients(&self, c: &[f64]) -> Vec<usize> {
        let n = self.n;
        let mut order: Vec<usize> = (0..c.len()).collect();
        if n < c.len() {
            order.select_nth_unstable_by(n - 1, |&a, &b| c[b].total_cmp(&c[a]).then(a.cmp(&b)));
            order.truncate(n);
        }
        order
    }

    /// Basis maximising `min_{j in J} <x, phi_j>`.
    ///
    /// Bases of a spanning family form a matroid, so scanning the
    /// coefficients in decreasing order and keeping every vector that
    /// raises the rank yields a bottleneck-optimal basis. All maximisers
    /// live among the coefficients at or above the optimum, and that set
    /// holds exactly one basis iff it has exactly `n` members.
    pub fn most_correlated_basis(&self, x: &[f64]) -> Result<BasisChoice> {
        let c = self.analysis(x)?;
        self.most_correlated_from_coefficients(&c)
    }

    pub(crate) fn most_correlated_from_coefficients(&self, c: &[f64]) -> Result<BasisChoice> {
        let n = self.n;
        let m = self.m();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| c[b].total_cmp(&c[a]).then(a.cmp(&b)));
        let max_norm = self.norms().into_iter().fold(0.0, f64::max);
        let cutoff = self.tol.rank * (m.max(n) as f64) * max_norm;
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut chosen = Vec::with_capacity(n);
        for &i in &order {
            let mut r = self.vector(i).to_vec();
            for _ in 0..2 {
                for qk in &q {
                    let d = linalg::dot(&r, qk);
                    linalg::axpy(&mut r, -d, qk);
                }
            }
            let nr = linalg::norm(&r);
            if nr > cutoff {
                q.push(linalg::scale(&r, 1.0 / nr));
                chosen.push(i);
                if chosen.len() == n {
                    break;
                }
            }
        }
        if chosen.len() < n {
            return Err(Error::NotAFrame);
        }
        let value = chosen.iter().map(|&i| c[i]).fold(f64::INFINITY, f64::min);
        let contenders = c.iter().filter(|&&ci| ci >= value - self.tol.tie).count();
        Ok(BasisChoice {
            indices: IndexSet::new(chosen),
            value,
            unique: contenders == n,
        })
    }

    pub fn in_maximal_domain(&self, bias: &Bias, x: &[f64]) -> Result<bool> {
        Ok(self.is_subframe(&self.active_set(bias, x)?))
    }

    pub fn is_alpha_rectifying_on(
        &self,
        bias: &Bias,
        samples: &[Vec<f64>],
    ) -> Result<RectifyingReport> {
        self.check_bias(bias)?;
        for s in samples {
            check_dim(self.n, s.len())?;
        }
        let failing: Vec<usize> = samples
            .par_iter()
            .enumerate()
            .filter(|(_, x)| {
                let c = self.coefficients(x);
                !self.is_subframe(&self.active_from_coefficients(&c, bias))
            })
            .map(|(k, _)| k)
            .collect();
        Ok(RectifyingReport {
            rectifying: failing.is_empty(),
            failing,
        })
    }

    /// Every sample keeps at least `spark - 1` active coordinates.
    pub fn spark_rectifying_check(
        &self,
        spark: usize,
        bias: &Bias,
        samples: &[Vec<f64>],
    ) -> Result<bool> {
        self.check_bias(bias)?;
        let need = spark.saturating_sub(1);
        for x in samples {
            if self.active_set(bias, x)?.len() < need {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Unit-norm copy of the frame, the rescaled bias, and the original norms.
    pub fn normalize(&self, bias: &Bias) -> Result<(Frame, Bias, Vec<f64>)> {
        self.check_bias(bias)?;
        let norms = self.norms();
        let (frame, _) = self.normalized();
        let b = bias
            .values()
            .iter()
            .zip(&norms)
            .map(|(a, w)| a / w)
            .collect();
        Ok((frame, Bias(b), norms))
    }

    pub fn normalized(&self) -> (Frame, Vec<f64>) {
        let norms = self.norms();
        let mut data = self.data.clone();
        for (chunk, w) in data.chunks_exact_mut(self.n).zip(&norms) {
            for x in chunk.iter_mut() {
                *x /= w;
            }
        }
        (
            Frame {
                n: self.n,
                data,
                tol: self.tol,
            },
            norms,
        )
    }

    pub fn is_normalized(&self) -> bool {
        self.norms().iter().all(|w| (w - 1.0).abs() <= 1e-12)
    }

    /// Whether every `n`-subset is a basis. Errors when the number of
    /// subsets exceeds the enumeration cap.
    pub fn is_full_spark(&self) -> Result<bool> {
        let (m, n) = (self.m(), self.n);
        let count = linalg::binomial(m, n);
        if count > self.tol.enumeration_cap {
            return Err(Error::EnumerationCap {
                subsets: count,
                cap: self.tol.enumeration_cap,
            });
        }
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let rows: Vec<&[f64]> = idx.iter().map(|&i| self.vector(i)).collect();
            if linalg::numerical_rank(&rows, n, self.tol.rank) < n {
                return Ok(false);
            }
            if !linalg::next_combination(&mut idx, m) {
                return Ok(true);
            }
        }
    }
}
