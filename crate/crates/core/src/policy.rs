//! The policy space `H` of maps from scenarios to decision vectors.
//!
//! `H` carries the expectation scalar product
//! `⟨x, y⟩ = Σ_ξ π(ξ) ⟨x(ξ), y(ξ)⟩`. The nonanticipative policies form the
//! subspace `V` of maps whose stage-`k` block is constant on each stage-`k`
//! information class.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tree::ScenarioTree;

/// One decision vector per scenario, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    scenarios: usize,
    dim: usize,
    values: Vec<f64>,
}

impl Policy {
    pub fn zeros(scenarios: usize, dim: usize) -> Self {
        Self {
            scenarios,
            dim,
            values: vec![0.0; scenarios * dim],
        }
    }

    pub fn zeros_for(tree: &ScenarioTree) -> Self {
        Self::zeros(tree.len(), tree.dim())
    }

    /// Builds a policy from per-scenario rows; all rows must share a length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Ok(Self {
            scenarios: rows.len(),
            dim,
            values,
        })
    }

    /// The same vector in every scenario.
    pub fn constant(scenarios: usize, row: &[f64]) -> Self {
        let mut values = Vec::with_capacity(scenarios * row.len());
        for _ in 0..scenarios {
            values.extend_from_slice(row);
        }
        Self {
            scenarios,
            dim: row.len(),
            values,
        }
    }

    pub fn scenarios(&self) -> usize {
        self.scenarios
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.scenarios, self.dim)
    }

    pub fn row(&self, scenario: usize) -> &[f64] {
        &self.values[scenario * self.dim..(scenario + 1) * self.dim]
    }

    pub fn row_mut(&mut self, scenario: usize) -> &mut [f64] {
        &mut self.values[scenario * self.dim..(scenario + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // `chunks_exact(0)` panics, and a zero-dimensional policy has no data.
        (0..self.scenarios).map(move |s| self.row(s))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Errors unless the policy has one `tree.dim()`-vector per scenario.
    pub fn check_shape(&self, tree: &ScenarioTree) -> Result<()> {
        let expected = (tree.len(), tree.dim());
        if self.shape() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: self.shape(),
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Policy) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Policy) -> Result<()> {
        self.check_same_shape(other)?;
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s += alpha * o;
        }
        Ok(())
    }

    /// `self - other`.
    pub fn sub(&self, other: &Policy) -> Result<Policy> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn add(&self, other: &Policy) -> Result<Policy> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn scale(&mut self, alpha: f64) {
        self.values.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// An element `(y, x)` of `G ⊕ H`, where `y` is a real-valued random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPolicy {
    pub scalar: Vec<f64>,
    pub base: Policy,
}

impl AugmentedPolicy {
    pub fn new(scalar: Vec<f64>, base: Policy) -> Result<Self> {
        if scalar.len() != base.scenarios() {
            return Err(Error::ShapeMismatch {
                expected: (base.scenarios(), 1),
                found: (scalar.len(), 1),
            });
        }
        Ok(Self { scalar, base })
    }
}

/// Expectation scalar product `Σ_ξ π(ξ) ⟨x(ξ), y(ξ)⟩`.
pub fn inner(tree: &ScenarioTree, x: &Policy, y: &Policy) -> Result<f64> {
    x.check_shape(tree)?;
    y.check_shape(tree)?;
    Ok(inner_unchecked(tree, x, y))
}

pub(crate) fn inner_unchecked(tree: &ScenarioTree, x: &Policy, y: &Policy) -> f64 {
    tree.probabilities()
        .zip(x.rows().zip(y.rows()))
        .map(|(p, (a, b))| p * dot(a, b))
        .sum()
}

pub fn norm(tree: &ScenarioTree, x: &Policy) -> Result<f64> {
    Ok(libm::sqrt(inner(tree, x, x)?))
}

pub(crate) fn norm_sq_unchecked(tree: &ScenarioTree, x: &Policy) -> f64 {
    inner_unchecked(tree, x, x)
}

/// Orthogonal projection onto the nonanticipative subspace `V`: each stage
/// block is replaced by its conditional expectation over the stage's
/// information class.
pub fn project_nonanticipative(tree: &ScenarioTree, x: &Policy) -> Result<Policy> {
    x.check_shape(tree)?;
    Ok(project_nonanticipative_unchecked(tree, x))
}

pub(crate) fn project_nonanticipative_unchecked(tree: &ScenarioTree, x: &Policy) -> Policy {
    let mut out = Policy::zeros_for(tree);
    let mut sums = Vec::new();
    for k in 0..tree.stages() {
        let range = tree.stage_range(k);
        let width = range.len();
        let masses = tree.class_masses(k);
        sums.clear();
        sums.resize(masses.len() * width, 0.0);
        for s in 0..tree.len() {
            let c = tree.class_of(k, s);
            let p = tree.probability(s);
            let acc = &mut sums[c * width..(c + 1) * width];
            for (a, v) in acc.iter_mut().zip(&x.row(s)[range.clone()]) {
                *a += p * v;
            }
        }
        for (c, &m) in masses.iter().enumerate() {
            sums[c * width..(c + 1) * width].iter_mut().for_each(|a| *a /= m);
        }
        for s in 0..tree.len() {
            let c = tree.class_of(k, s);
            out.row_mut(s)[range.clone()].copy_from_slice(&sums[c * width..(c + 1) * width]);
        }
    }
    out
}

/// `x - proj_V x`, the projection onto `V⊥`.
pub fn project_nonanticipative_complement(tree: &ScenarioTree, x: &Policy) -> Result<Policy> {
    x.check_shape(tree)?;
    Ok(project_complement_unchecked(tree, x))
}

pub(crate) fn project_complement_unchecked(tree: &ScenarioTree, x: &Policy) -> Policy {
    let mut out = x.clone();
    let p = project_nonanticipative_unchecked(tree, x);
    for (o, q) in out.values.iter_mut().zip(&p.values) {
        *o -= q;
    }
    out
}

/// Relative membership test `‖x - proj_V x‖ ≤ tol (1 + ‖x‖)`.
pub fn is_nonanticipative(tree: &ScenarioTree, x: &Policy, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::ToleranceError(tol));
    }
    x.check_shape(tree)?;
    let r = project_complement_unchecked(tree, x);
    let gap = libm::sqrt(norm_sq_unchecked(tree, &r));
    Ok(gap <= tol * (1.0 + libm::sqrt(norm_sq_unchecked(tree, x))))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two(p: (f64, f64), split: bool, dims: &[usize]) -> ScenarioTree {
        let second = if split { "b" } else { "a" };
        let labels = |first: &'static str, last: &'static str| -> Vec<&'static str> {
            if dims.len() == 1 {
                return vec![last];
            }
            let mut l = vec![first];
            l.extend(core::iter::repeat_n(last, dims.len() - 1));
            l
        };
        ScenarioTree::new([(labels("a", "u"), p.0), (labels(second, "w"), p.1)], dims).unwrap()
    }

    #[test]
    fn inner_products() {
        let t = two((0.5, 0.5), false, &[1]);
        let one = Policy::constant(2, &[1.0]);
        assert_abs_diff_eq!(inner(&t, &one, &one).unwrap(), 1.0);
        assert_eq!(inner(&t, &one, &Policy::zeros(2, 1)).unwrap(), 0.0);

        let t = two((0.25, 0.75), false, &[1]);
        let x = Policy::from_rows(&[[2.0], [0.0]]).unwrap();
        assert_abs_diff_eq!(inner(&t, &x, &one).unwrap(), 0.5);
    }

    #[test]
    fn norms() {
        let t = ScenarioTree::new([(vec!["a"], 1.0)], &[2]).unwrap();
        assert_abs_diff_eq!(norm(&t, &Policy::from_rows(&[[3.0, 4.0]]).unwrap()).unwrap(), 5.0);
        assert_eq!(norm(&t, &Policy::zeros(1, 2)).unwrap(), 0.0);

        let t = two((0.5, 0.5), false, &[1]);
        let x = Policy::from_rows(&[[2.0], [0.0]]).unwrap();
        assert_abs_diff_eq!(norm(&t, &x).unwrap(), libm::sqrt(2.0), epsilon = 1e-15);
    }

    #[test]
    fn projection_averages_within_classes() {
        let t = two((0.5, 0.5), true, &[1, 1]);
        let x = Policy::from_rows(&[[1.0, 3.0], [3.0, 5.0]]).unwrap();
        let p = project_nonanticipative(&t, &x).unwrap();
        assert_eq!(p.row(0), &[2.0, 3.0]);
        assert_eq!(p.row(1), &[2.0, 5.0]);
        assert_eq!(project_nonanticipative(&t, &p).unwrap(), p);

        let t = two((0.25, 0.75), true, &[1]);
        let x = Policy::from_rows(&[[4.0], [0.0]]).unwrap();
        let p = project_nonanticipative(&t, &x).unwrap();
        assert_eq!(p, Policy::constant(2, &[1.0]));
    }

    #[test]
    fn projection_matches_least_squares_oracle() {
        // Brute force: minimise ‖x - p‖_H over the class representatives of
        // the first stage by scanning a fine grid.
        let t = two((0.3, 0.7), true, &[1, 1]);
        let x = Policy::from_rows(&[[1.0, 3.0], [3.0, 5.0]]).unwrap();
        let p = project_nonanticipative(&t, &x).unwrap();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=40_000 {
            let w = i as f64 * 1e-4;
            let obj = 0.3 * (1.0 - w) * (1.0 - w) + 0.7 * (3.0 - w) * (3.0 - w);
            if obj < best.0 {
                best = (obj, w);
            }
        }
        assert_abs_diff_eq!(p.row(0)[0], best.1, epsilon = 1e-4);
        assert_eq!(p.row(0)[1], 3.0);
    }

    #[test]
    fn complement_and_membership() {
        let t = two((0.5, 0.5), false, &[1]);
        let x = Policy::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert_eq!(project_nonanticipative_complement(&t, &x).unwrap(), x);
        assert!(!is_nonanticipative(&t, &x, 1e-12).unwrap());
        let c = Policy::constant(2, &[7.5]);
        assert!(project_nonanticipative_complement(&t, &c).unwrap().is_zero());
        assert!(is_nonanticipative(&t, &Policy::zeros(2, 1), 1e-12).unwrap());
        let p = project_nonanticipative(&t, &x).unwrap();
        assert!(is_nonanticipative(&t, &p, 1e-12).unwrap());
        assert_eq!(is_nonanticipative(&t, &p, 0.0), Err(Error::ToleranceError(0.0)));
    }

    #[test]
    fn shape_errors() {
        let t = two((0.5, 0.5), false, &[1]);
        let bad = Policy::zeros(3, 1);
        assert!(matches!(inner(&t, &bad, &bad), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(
            project_nonanticipative(&t, &bad),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(Policy::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }
}
