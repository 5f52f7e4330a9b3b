//! Slow brute-force reference solvers.
//!
//! Nothing here calls into the resolvents, projectors or solvers of the other
//! modules: every quantity is recomputed from the raw instance data, so that
//! a systematic error elsewhere shows up as a disagreement.
//!
//! Grid searches evaluate the objective on a tensor grid, then shrink the box
//! 10× around the incumbent and repeat. With the default 2001 points and 3
//! rounds a unit box ends at pitch `1e-3 / 2000 = 5e-7`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cvar::CvarProblem;
use crate::error::{Error, Result};
use crate::operators::{ConstraintSpec, CostSpec, OperatorSpec};
use crate::policy::Policy;
use crate::solver::Problem;
use crate::tree::ScenarioTree;

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_GRID_ROUNDS: usize = 3;
/// Box shrink factor between refinement rounds.
pub const GRID_SHRINK: f64 = 10.0;

/// Projected gradient stops after this many steps.
pub const PGD_MAX_ITER: usize = 1_000_000;
/// ... or once the gradient mapping is this small.
pub const PGD_TOL: f64 = 1e-12;

/// A tensor grid with refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Points per axis, endpoints included.
    pub points: usize,
    pub rounds: usize,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            lower,
            upper,
            points: DEFAULT_GRID_POINTS,
            rounds: DEFAULT_GRID_ROUNDS,
        }
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn with_points(self, points: usize) -> Self {
        Self { points, ..self }
    }

    pub fn with_rounds(self, rounds: usize) -> Self {
        Self { rounds, ..self }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::BadGrid(format!(
                "{} lower and {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::BadGrid(format!("axis {i}: bounds [{lo}, {hi}]")));
            }
        }
        if self.points < 3 {
            return Err(Error::BadGrid(format!(
                "{} points per axis, need at least 3",
                self.points
            )));
        }
        if self.rounds == 0 {
            return Err(Error::BadGrid("no refinement rounds".into()));
        }
        if self.points.checked_pow(self.dim() as u32).is_none() {
            return Err(Error::BadGrid(format!("{}^{} grid points", self.points, self.dim())));
        }
        Ok(())
    }

    /// Pitch of the last round along `axis`.
    pub fn final_pitch(&self, axis: usize) -> f64 {
        let width = self.upper[axis] - self.lower[axis];
        width / (self.points - 1) as f64 / libm::pow(GRID_SHRINK, (self.rounds - 1) as f64)
    }
}

/// Result of a grid search; `history` holds the incumbent value after each
/// round.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub history: Vec<f64>,
}

/// Minimises `objective` over the grid. Later rounds stay inside the initial
/// box and never replace the incumbent by a worse point.
pub fn grid_minimize<F: FnMut(&[f64]) -> f64>(grid: &GridSpec, mut objective: F) -> Result<GridMinimum> {
    grid.validate()?;
    let dim = grid.dim();
    let mut lower = grid.lower.clone();
    let mut upper = grid.upper.clone();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::with_capacity(grid.rounds);
    let mut index = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let last = (grid.points - 1) as f64;

    for _ in 0..grid.rounds {
        index.iter_mut().for_each(|i| *i = 0);
        loop {
            for k in 0..dim {
                let t = index[k] as f64 / last;
                point[k] = lower[k] + t * (upper[k] - lower[k]);
            }
            let value = objective(&point);
            if best.as_ref().is_none_or(|(_, v)| value < *v) {
                best = Some((point.clone(), value));
            }
            // Odometer increment.
            let mut k = 0;
            while k < dim {
                index[k] += 1;
                if index[k] < grid.points {
                    break;
                }
                index[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        let (center, value) = best.as_ref().expect("grid has points");
        history.push(*value);
        for k in 0..dim {
            let half = (upper[k] - lower[k]) / GRID_SHRINK / 2.0;
            let (lo, hi) = (grid.lower[k], grid.upper[k]);
            let mut a = center[k] - half;
            let mut b = center[k] + half;
            if a < lo {
                b += lo - a;
                a = lo;
            }
            if b > hi {
                a -= b - hi;
                b = hi;
            }
            lower[k] = a.max(lo);
            upper[k] = b;
        }
    }
    let (argmin, value) = best.expect("grid has points");
    Ok(GridMinimum { argmin, value, history })
}

/// Which function the 1-D prox oracle minimises against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxForm {
    /// `γ f(y) + ½ (y − x)²`
    Plain,
    /// `γ max{f(y), 0} + ½ (y − x)²`
    MaxNonneg,
}

fn cost_1d(f: &CostSpec) -> Result<impl Fn(f64) -> f64 + '_> {
    let (q, c, r, quadratic) = match f {
        CostSpec::Affine { c, r } if c.len() == 1 => (0.0, c[0], *r, false),
        CostSpec::SeparableQuadratic { q, c, r } if c.len() == 1 => (q[0], c[0], *r, true),
        other => {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: other.dim(),
            })
        }
    };
    Ok(move |y: f64| {
        if quadratic {
            0.5 * q * (y - c) * (y - c) + r
        } else {
            c * y + r
        }
    })
}

/// Grid minimiser of the prox objective of a 1-D cost.
pub fn oracle_prox_grid(f: &CostSpec, gamma: f64, x: f64, form: ProxForm, grid: &GridSpec) -> Result<f64> {
    if grid.dim() != 1 {
        return Err(Error::BadGrid(format!("expected a 1-D grid, got {} axes", grid.dim())));
    }
    let f = cost_1d(f)?;
    let min = grid_minimize(grid, |p| {
        let y = p[0];
        let fy = f(y);
        let penalty = match form {
            ProxForm::Plain => fy,
            ProxForm::MaxNonneg => fy.max(0.0),
        };
        gamma * penalty + 0.5 * (y - x) * (y - x)
    })?;
    Ok(min.argmin[0])
}

/// Points per inner `y′` search of the CVaR prox oracle. After a 10× shrink
/// the box still spans two pitches on each side of the incumbent, which is
/// enough for a convex function of one variable.
pub const CVAR_INNER_POINTS: usize = 41;
/// Final pitch of the inner `y′` search, relative to the axis width.
pub const CVAR_INNER_REL_PITCH: f64 = 1e-14;

/// Grid minimiser over `(y′, x′)` of
/// `γ (y′ + max{f(x′) − y′, 0} / (1 − α)) + ½ ((y′ − y)² + (x′ − x)²)`.
/// The first grid axis is `y′`.
///
/// The search is nested: the outer 1-D grid runs over `x′` and every outer
/// point minimises over `y′` on its own 1-D grid. A joint grid loses the
/// minimiser in the steep valley along `y′ = f(x′)`, while both nested
/// problems are convex in one variable, where the true minimiser lies within
/// one pitch of the grid argmin. The inner search is refined far below the
/// outer pitch so that its error does not perturb the outer comparison.
pub fn oracle_prox_cvar_grid(
    f: &CostSpec,
    alpha: f64,
    gamma: f64,
    y: f64,
    x: f64,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    if grid.dim() != 2 {
        return Err(Error::BadGrid(format!("expected a 2-D grid, got {} axes", grid.dim())));
    }
    grid.validate()?;
    let f = cost_1d(f)?;
    let width = grid.upper[0] - grid.lower[0];
    let first = width / (CVAR_INNER_POINTS - 1) as f64;
    let inner_rounds = 1 + libm::ceil(libm::log10(first / (CVAR_INNER_REL_PITCH * width))) as usize;
    let inner = GridSpec {
        lower: vec![grid.lower[0]],
        upper: vec![grid.upper[0]],
        points: CVAR_INNER_POINTS,
        rounds: inner_rounds,
    };
    let best_y = |xp: f64| {
        let fx = f(xp);
        grid_minimize(&inner, |p| {
            let yp = p[0];
            gamma * (yp + (fx - yp).max(0.0) / (1.0 - alpha)) + 0.5 * (yp - y) * (yp - y)
        })
    };
    let outer = GridSpec {
        lower: vec![grid.lower[1]],
        upper: vec![grid.upper[1]],
        points: grid.points,
        rounds: grid.rounds,
    };
    let mut failure = None;
    let min = grid_minimize(&outer, |p| match best_y(p[0]) {
        Ok(m) => m.value + 0.5 * (p[0] - x) * (p[0] - x),
        Err(e) => {
            failure = Some(e);
            f64::INFINITY
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let xp = min.argmin[0];
    Ok((best_y(xp)?.argmin[0], xp))
}

/// One free coordinate of a nonanticipative policy: stage, class within the
/// stage, and absolute coordinate index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeCoordinate {
    pub stage: usize,
    pub class: usize,
    pub coordinate: usize,
}

/// Parametrisation of `V` by one representative value per class and
/// coordinate.
pub fn free_coordinates(tree: &ScenarioTree) -> Vec<FreeCoordinate> {
    let mut out = Vec::new();
    for stage in 0..tree.stages() {
        let classes = tree.equivalence_classes(stage).expect("stage in range").len();
        for class in 0..classes {
            for coordinate in tree.stage_range(stage) {
                out.push(FreeCoordinate {
                    stage,
                    class,
                    coordinate,
                });
            }
        }
    }
    out
}

fn expand(tree: &ScenarioTree, layout: &[FreeCoordinate], z: &[f64]) -> Policy {
    let mut p = Policy::zeros_for(tree);
    for (fc, &value) in layout.iter().zip(z) {
        for &s in &tree.equivalence_classes(fc.stage).expect("stage in range")[fc.class] {
            p.row_mut(s)[fc.coordinate] = value;
        }
    }
    p
}

/// Per free coordinate, the intersection of the box bounds of its scenarios.
fn class_bounds(
    tree: &ScenarioTree,
    layout: &[FreeCoordinate],
    constraints: &[ConstraintSpec],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(layout.len());
    for fc in layout {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for &s in &tree.equivalence_classes(fc.stage).expect("stage in range")[fc.class] {
            match &constraints[s] {
                ConstraintSpec::WholeSpace => {}
                ConstraintSpec::Box { lo: l, hi: h } => {
                    lo = lo.max(l[fc.coordinate]);
                    hi = hi.min(h[fc.coordinate]);
                }
                _ => {
                    return Err(Error::UnsupportedInstance(format!(
                        "scenario {s}: only boxes are supported"
                    )))
                }
            }
        }
        if lo > hi {
            return Err(Error::UnsupportedInstance(format!(
                "coordinate {} has an empty feasible interval in stage {} class {}",
                fc.coordinate, fc.stage, fc.class
            )));
        }
        out.push((lo, hi));
    }
    Ok(out)
}

/// Minimises `E[½ Σ q_i (x_i − c_i)²]` over nonanticipative policies inside
/// the boxes by projected gradient descent on the class representatives.
pub fn oracle_solve_quadratic_box(problem: &Problem) -> Result<Policy> {
    let tree = problem.tree();
    let mut qc = Vec::with_capacity(tree.len());
    for (s, op) in problem.operators().iter().enumerate() {
        match op {
            OperatorSpec::GradSeparableQuadratic { q, c } => qc.push((q, c)),
            _ => {
                return Err(Error::UnsupportedInstance(format!(
                    "scenario {s}: operator is not a separable quadratic gradient"
                )))
            }
        }
    }
    if let Some(s) = problem
        .constraints()
        .iter()
        .position(|c| !matches!(c, ConstraintSpec::Box { .. }))
    {
        return Err(Error::UnsupportedInstance(format!(
            "scenario {s}: constraint is not a box"
        )));
    }
    let layout = free_coordinates(tree);
    let bounds = class_bounds(tree, &layout, problem.constraints())?;
    let members: Vec<&[usize]> = layout
        .iter()
        .map(|fc| tree.equivalence_classes(fc.stage).expect("stage in range")[fc.class].as_slice())
        .collect();

    // Curvature of the reduced objective along each free coordinate.
    let curvature: Vec<f64> = layout
        .iter()
        .zip(&members)
        .map(|(fc, m)| m.iter().map(|&s| tree.probability(s) * qc[s].0[fc.coordinate]).sum())
        .collect();
    let lipschitz = curvature.iter().copied().fold(0.0, f64::max);
    let clamp = |v: f64, (lo, hi): (f64, f64)| v.max(lo).min(hi);
    let mut z: Vec<f64> = bounds.iter().map(|&b| clamp(0.0, b)).collect();
    if lipschitz == 0.0 {
        return Ok(expand(tree, &layout, &z));
    }
    let step = 1.0 / lipschitz;
    let mut grad = vec![0.0; z.len()];
    for _ in 0..PGD_MAX_ITER {
        for (j, fc) in layout.iter().enumerate() {
            grad[j] = members[j]
                .iter()
                .map(|&s| {
                    let (q, c) = qc[s];
                    tree.probability(s) * q[fc.coordinate] * (z[j] - c[fc.coordinate])
                })
                .sum();
        }
        let mut mapping = 0.0;
        for j in 0..z.len() {
            let next = clamp(z[j] - step * grad[j], bounds[j]);
            let g = (z[j] - next) / step;
            mapping += g * g;
            z[j] = next;
        }
        if libm::sqrt(mapping) <= PGD_TOL {
            break;
        }
    }
    Ok(expand(tree, &layout, &z))
}

/// Largest free dimension `oracle_cvar_small` accepts.
pub const MAX_FREE_COORDINATES: usize = 3;

/// Grid minimiser of `cvar_α(f(·, x(·)))` over nonanticipative policies
/// inside the boxes.
///
/// `grid` has one axis per free coordinate in [`free_coordinates`] order; its
/// bounds are intersected with the constraint boxes. The CVaR of each
/// candidate is evaluated by enumerating the breakpoints of
/// `y ↦ y + E[max{loss − y, 0}] / (1 − α)`.
pub fn oracle_cvar_small(cp: &CvarProblem, grid: &GridSpec) -> Result<(Policy, f64)> {
    let tree = cp.tree();
    let layout = free_coordinates(tree);
    if layout.len() > MAX_FREE_COORDINATES {
        return Err(Error::TooManyFreeCoordinates { count: layout.len() });
    }
    if grid.dim() != layout.len() {
        return Err(Error::BadGrid(format!(
            "expected {} axes, got {}",
            layout.len(),
            grid.dim()
        )));
    }
    let bounds = class_bounds(tree, &layout, cp.constraints())?;
    let mut clipped = grid.clone();
    for (j, (lo, hi)) in bounds.into_iter().enumerate() {
        clipped.lower[j] = clipped.lower[j].max(lo);
        clipped.upper[j] = clipped.upper[j].min(hi);
    }
    let probabilities: Vec<f64> = tree.probabilities().collect();
    let alpha = cp.alpha();
    let mut losses = vec![0.0; tree.len()];
    let min = grid_minimize(&clipped, |z| {
        let x = expand(tree, &layout, z);
        for (s, f) in cp.costs().iter().enumerate() {
            losses[s] = f.value(x.row(s));
        }
        cvar_by_breakpoints(&probabilities, alpha, &losses)
    })?;
    Ok((expand(tree, &layout, &min.argmin), min.value))
}

fn cvar_by_breakpoints(probabilities: &[f64], alpha: f64, losses: &[f64]) -> f64 {
    losses
        .iter()
        .map(|&y| {
            let tail: f64 = probabilities
                .iter()
                .zip(losses)
                .map(|(p, l)| p * (l - y).max(0.0))
                .sum();
            y + tail / (1.0 - alpha)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvar::cvar_value;
    use approx::assert_abs_diff_eq;
    use core::cell::Cell;

    fn affine(c: f64, r: f64) -> CostSpec {
        CostSpec::Affine { c: vec![c], r }
    }

    fn quad(c: f64) -> CostSpec {
        CostSpec::SeparableQuadratic {
            q: vec![1.0],
            c: vec![c],
            r: 0.0,
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::cube(1, 0.0, 1.0).validate().is_ok());
        for bad in [
            GridSpec::cube(1, 1.0, 1.0),
            GridSpec::cube(1, 0.0, f64::INFINITY),
            GridSpec::cube(1, 0.0, 1.0).with_points(2),
            GridSpec::cube(1, 0.0, 1.0).with_rounds(0),
            GridSpec::new(vec![0.0], vec![1.0, 2.0]),
            GridSpec::cube(0, 0.0, 1.0),
        ] {
            assert!(matches!(bad.validate(), Err(Error::BadGrid(_))), "{bad:?}");
        }
    }

    #[test]
    fn refinement_never_worsens_incumbent() {
        // Kinked objective whose minimiser is off every grid.
        let grid = GridSpec::cube(2, -1.0, 1.0).with_points(11).with_rounds(6);
        let min = grid_minimize(&grid, |p| (p[0] - 0.123_456).abs() + 3.0 * (p[1] + 0.654_321).abs()).unwrap();
        assert!(min.history.windows(2).all(|w| w[1] <= w[0]));
        assert_abs_diff_eq!(min.argmin[0], 0.123_456, epsilon = 2.0 * grid.final_pitch(0));
        assert_abs_diff_eq!(min.argmin[1], -0.654_321, epsilon = 2.0 * grid.final_pitch(1));
    }

    #[test]
    fn refinement_stays_in_initial_box() {
        let grid = GridSpec::cube(1, 0.0, 1.0).with_points(5).with_rounds(4);
        let seen = Cell::new((f64::INFINITY, f64::NEG_INFINITY));
        let min = grid_minimize(&grid, |p| {
            let (lo, hi) = seen.get();
            seen.set((lo.min(p[0]), hi.max(p[0])));
            -p[0]
        })
        .unwrap();
        assert_eq!(min.argmin, vec![1.0]);
        assert_eq!(seen.get(), (0.0, 1.0));
    }

    #[test]
    fn prox_grid_examples() {
        let grid = GridSpec::cube(1, -3.0, 3.0);
        let pitch = 2.0 * grid.final_pitch(0);
        let f = affine(1.0, -1.0);
        assert_abs_diff_eq!(
            oracle_prox_grid(&f, 1.0, 1.5, ProxForm::MaxNonneg, &grid).unwrap(),
            1.0,
            epsilon = pitch
        );
        assert_abs_diff_eq!(
            oracle_prox_grid(&f, 1.0, 0.5, ProxForm::MaxNonneg, &grid).unwrap(),
            0.5,
            epsilon = pitch
        );
        assert_abs_diff_eq!(
            oracle_prox_grid(&f, 1e-6, 0.7, ProxForm::MaxNonneg, &grid).unwrap(),
            0.7,
            epsilon = pitch
        );
        assert_abs_diff_eq!(
            oracle_prox_grid(&f, 1.0, 0.7, ProxForm::Plain, &grid).unwrap(),
            -0.3,
            epsilon = pitch
        );
        assert!(oracle_prox_grid(&f, 1.0, 0.0, ProxForm::Plain, &GridSpec::cube(2, 0.0, 1.0)).is_err());
        let wide = CostSpec::Affine {
            c: vec![1.0, 1.0],
            r: 0.0,
        };
        assert!(oracle_prox_grid(&wide, 1.0, 0.0, ProxForm::Plain, &grid).is_err());
    }

    #[test]
    fn prox_cvar_grid_examples() {
        let grid = GridSpec::cube(2, -6.0, 6.0);
        let tol = 2.0 * grid.final_pitch(0);
        let f = affine(1.0, 0.0);
        for ((y, x), expected) in [
            ((5.0, 1.0), (4.0, 1.0)),
            ((0.0, 1.0), (0.0, 0.0)),
            ((-3.0, 1.0), (-2.0, -1.0)),
        ] {
            let (q, p) = oracle_prox_cvar_grid(&f, 0.5, 1.0, y, x, &grid).unwrap();
            assert_abs_diff_eq!(q, expected.0, epsilon = tol);
            assert_abs_diff_eq!(p, expected.1, epsilon = tol);
        }
    }

    #[test]
    fn prox_cvar_grid_follows_steep_valley() {
        // f(x) = 3x, α = 0.9: the minimiser sits on the kink y′ = 3x′ at
        // (−0.9, −0.3), where the walls have slope up to 30.
        let grid = GridSpec::new(vec![-3.0, -2.0], vec![2.0, 2.0])
            .with_points(41)
            .with_rounds(8);
        let (q, p) = oracle_prox_cvar_grid(&affine(3.0, 0.0), 0.9, 1.0, 0.0, 0.0, &grid).unwrap();
        assert_abs_diff_eq!(q, -0.9, epsilon = 2.0 * grid.final_pitch(0));
        assert_abs_diff_eq!(p, -0.3, epsilon = 2.0 * grid.final_pitch(1));
    }

    fn two_stage_tree() -> ScenarioTree {
        ScenarioTree::new([(vec!["a", "u"], 0.5), (vec!["b", "w"], 0.5)], &[1, 1]).unwrap()
    }

    #[test]
    fn free_coordinate_layout() {
        let layout = free_coordinates(&two_stage_tree());
        assert_eq!(
            layout,
            vec![
                FreeCoordinate {
                    stage: 0,
                    class: 0,
                    coordinate: 0
                },
                FreeCoordinate {
                    stage: 1,
                    class: 0,
                    coordinate: 1
                },
                FreeCoordinate {
                    stage: 1,
                    class: 1,
                    coordinate: 1
                },
            ]
        );
    }

    fn quadratic_box(tree: ScenarioTree, targets: &[&[f64]], lo: f64, hi: f64) -> Problem {
        let d = tree.dim();
        let ops = targets
            .iter()
            .map(|c| OperatorSpec::GradSeparableQuadratic {
                q: vec![1.0; d],
                c: c.to_vec(),
            })
            .collect();
        let cs = targets
            .iter()
            .map(|_| ConstraintSpec::Box {
                lo: vec![lo; d],
                hi: vec![hi; d],
            })
            .collect();
        Problem::with_full_subspaces(tree, ops, cs).unwrap()
    }

    #[test]
    fn quadratic_box_examples() {
        let single = ScenarioTree::new([(vec!["s"], 1.0)], &[2]).unwrap();
        let x = oracle_solve_quadratic_box(&quadratic_box(single, &[&[0.3, 0.7]], 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(x.row(0)[1], 0.7, epsilon = 1e-12);

        let one_stage = ScenarioTree::new([(vec!["a"], 0.5), (vec!["b"], 0.5)], &[1]).unwrap();
        let x = oracle_solve_quadratic_box(&quadratic_box(one_stage, &[&[0.0], &[1.0]], 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x.row(1)[0], 0.5, epsilon = 1e-12);

        let single = ScenarioTree::new([(vec!["s"], 1.0)], &[1]).unwrap();
        let x = oracle_solve_quadratic_box(&quadratic_box(single, &[&[2.0]], 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 1.0, epsilon = 1e-12);

        let x = oracle_solve_quadratic_box(&quadratic_box(two_stage_tree(), &[&[0.0, 0.2], &[1.0, 0.8]], 0.0, 1.0))
            .unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x.row(1)[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(x.row(0)[1], 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(x.row(1)[1], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_box_rejects_other_instances() {
        let tree = ScenarioTree::new([(vec!["s"], 1.0)], &[1]).unwrap();
        let p = Problem::with_full_subspaces(
            tree.clone(),
            vec![OperatorSpec::DiagonalAffine {
                a: vec![1.0],
                b: vec![0.0],
            }],
            vec![ConstraintSpec::Box {
                lo: vec![0.0],
                hi: vec![1.0],
            }],
        )
        .unwrap();
        assert!(matches!(
            oracle_solve_quadratic_box(&p),
            Err(Error::UnsupportedInstance(_))
        ));
        let p = Problem::with_full_subspaces(
            tree,
            vec![OperatorSpec::GradSeparableQuadratic {
                q: vec![1.0],
                c: vec![0.0],
            }],
            vec![ConstraintSpec::Ball {
                center: vec![0.0],
                radius: 1.0,
            }],
        )
        .unwrap();
        assert!(matches!(
            oracle_solve_quadratic_box(&p),
            Err(Error::UnsupportedInstance(_))
        ));
    }

    fn box01() -> ConstraintSpec {
        ConstraintSpec::Box {
            lo: vec![0.0],
            hi: vec![1.0],
        }
    }

    #[test]
    fn cvar_small_examples() {
        let single = ScenarioTree::new([(vec!["s"], 1.0)], &[1]).unwrap();
        let cp = CvarProblem::new(single, 0.7, vec![quad(0.3)], vec![box01()]).unwrap();
        let grid = GridSpec::cube(1, 0.0, 1.0);
        let (x, v) = oracle_cvar_small(&cp, &grid).unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 0.3, epsilon = 2.0 * grid.final_pitch(0));
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);

        // A shared decision with targets 0 and 1: the CVaR objective
        // max-weights the worse scenario, symmetric at 0.5 for any α.
        let two = ScenarioTree::new([(vec!["a"], 0.5), (vec!["b"], 0.5)], &[1]).unwrap();
        let cp = CvarProblem::new(two.clone(), 0.5, vec![quad(0.0), quad(1.0)], vec![box01(), box01()]).unwrap();
        let (x, v) = oracle_cvar_small(&cp, &grid).unwrap();
        assert_abs_diff_eq!(x.row(0)[0], 0.5, epsilon = 1e-5);
        assert_abs_diff_eq!(v, 0.125, epsilon = 1e-9);
        assert_abs_diff_eq!(v, cvar_value(&two, 0.5, &[0.125, 0.125]).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn cvar_small_high_alpha_favours_worse_scenario() {
        // Unequal probabilities: the unlikely scenario has target 1. The
        // risk-neutral optimum sits near 0.1; at α = 0.99 it moves to 0.5.
        let two = ScenarioTree::new([(vec!["a"], 0.9), (vec!["b"], 0.1)], &[1]).unwrap();
        let grid = GridSpec::cube(1, 0.0, 1.0);
        let make = |alpha| CvarProblem::new(two.clone(), alpha, vec![quad(0.0), quad(1.0)], vec![box01(), box01()]);
        let (low, _) = oracle_cvar_small(&make(0.01).unwrap(), &grid).unwrap();
        let (high, _) = oracle_cvar_small(&make(0.99).unwrap(), &grid).unwrap();
        assert!(high.row(0)[0] > low.row(0)[0] + 0.1);
        assert_abs_diff_eq!(high.row(0)[0], 0.5, epsilon = 1e-5);
    }

    #[test]
    fn cvar_small_dimension_limit() {
        let tree = ScenarioTree::new([(vec!["a", "u"], 0.5), (vec!["b", "w"], 0.5)], &[2, 1]).unwrap();
        let cost = CostSpec::SeparableQuadratic {
            q: vec![1.0; 3],
            c: vec![0.0; 3],
            r: 0.0,
        };
        let cp = CvarProblem::new(tree, 0.5, vec![cost.clone(), cost], vec![ConstraintSpec::WholeSpace; 2]).unwrap();
        assert_eq!(
            oracle_cvar_small(&cp, &GridSpec::cube(4, 0.0, 1.0)),
            Err(Error::TooManyFreeCoordinates { count: 4 })
        );
    }

    #[test]
    fn unsupported_messages_are_informative() {
        let tree = ScenarioTree::new([(vec!["s"], 1.0)], &[1]).unwrap();
        let cp = CvarProblem::new(
            tree,
            0.5,
            vec![quad(0.0)],
            vec![ConstraintSpec::Ball {
                center: vec![0.0],
                radius: 1.0,
            }],
        )
        .unwrap();
        match oracle_cvar_small(&cp, &GridSpec::cube(1, 0.0, 1.0)) {
            Err(Error::UnsupportedInstance(msg)) => assert!(msg.contains("scenario 0")),
            other => panic!("{other:?}"),
        }
    }
}
