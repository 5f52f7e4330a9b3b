//! Per-scenario building blocks: monotone operators with closed-form
//! resolvents, convex costs, constraint sets with closed-form projectors and
//! the residual subspaces `U(ξ)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::policy::{dot, norm2};
use crate::DEFAULT_BISECTION_TOL;

mod prox;

pub use prox::{
    prox_cvar_augmented, prox_cvar_augmented_with_case, prox_max_nonneg, prox_max_nonneg_with_case, CvarProxCase,
    ProxCase,
};

/// Magnitude used for "no bound" on a box axis.
pub const UNBOUNDED: f64 = f64::MAX;

/// A convex, real-valued cost `f: R^d → R`.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// `f(x) = ⟨c, x⟩ + r`
    Affine { c: Vec<f64>, r: f64 },
    /// `f(x) = ½ Σ q_i (x_i − c_i)² + r`, with `q ≥ 0`.
    SeparableQuadratic { q: Vec<f64>, c: Vec<f64>, r: f64 },
}

impl CostSpec {
    pub fn dim(&self) -> usize {
        match self {
            CostSpec::Affine { c, .. } => c.len(),
            CostSpec::SeparableQuadratic { c, .. } => c.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CostSpec::Affine { c, r } => {
                check_finite("affine cost", c)?;
                check_finite("affine cost", &[*r])
            }
            CostSpec::SeparableQuadratic { q, c, r } => {
                same_len("separable quadratic cost", q, c)?;
                check_finite("separable quadratic cost", q)?;
                check_finite("separable quadratic cost", c)?;
                check_finite("separable quadratic cost", &[*r])?;
                check_nonnegative("separable quadratic cost", "q", q)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            CostSpec::Affine { c, r } => dot(c, x) + r,
            CostSpec::SeparableQuadratic { q, c, r } => {
                0.5 * q
                    .iter()
                    .zip(c)
                    .zip(x)
                    .map(|((q, c), x)| q * (x - c) * (x - c))
                    .sum::<f64>()
                    + r
            }
        }
    }

    /// `prox_{γf}(x)`, the minimiser of `γ f(y) + ½‖y − x‖²`.
    pub fn prox(&self, gamma: f64, x: &[f64]) -> Vec<f64> {
        match self {
            CostSpec::Affine { c, .. } => x.iter().zip(c).map(|(x, c)| x - gamma * c).collect(),
            CostSpec::SeparableQuadratic { q, c, .. } => x
                .iter()
                .zip(q.iter().zip(c))
                .map(|(x, (q, c))| (x + gamma * q * c) / (1.0 + gamma * q))
                .collect(),
        }
    }
}

/// A maximally monotone operator `A(ξ, ·)` from the catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `A(x) = a ⊙ x + b`, with `a ≥ 0`.
    DiagonalAffine { a: Vec<f64>, b: Vec<f64> },
    /// `A(x) = q ⊙ (x − c)`, the gradient of `½ Σ q_i (x_i − c_i)²`.
    GradSeparableQuadratic { q: Vec<f64>, c: Vec<f64> },
    /// Subdifferential of `(y, x) ↦ y + max{f(x) − y, 0} / (1 − α)` on
    /// `R × R^d`; the scalar `y` is the leading coordinate.
    CvarAugmented { cost: CostSpec, alpha: f64 },
}

impl OperatorSpec {
    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::DiagonalAffine { a, .. } => a.len(),
            OperatorSpec::GradSeparableQuadratic { q, .. } => q.len(),
            OperatorSpec::CvarAugmented { cost, .. } => cost.dim() + 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorSpec::DiagonalAffine { a, b } => {
                same_len("diagonal affine operator", a, b)?;
                check_finite("diagonal affine operator", a)?;
                check_finite("diagonal affine operator", b)?;
                check_nonnegative("diagonal affine operator", "a", a)
            }
            OperatorSpec::GradSeparableQuadratic { q, c } => {
                same_len("separable quadratic gradient", q, c)?;
                check_finite("separable quadratic gradient", q)?;
                check_finite("separable quadratic gradient", c)?;
                check_nonnegative("separable quadratic gradient", "q", q)
            }
            OperatorSpec::CvarAugmented { cost, alpha } => {
                check_alpha(*alpha)?;
                cost.validate()
            }
        }
    }

    /// `J_{γA}(z)`: the unique `p` with `z ∈ p + γ A(p)`.
    pub fn resolvent(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_gamma(gamma)?;
        check_dim(self.dim(), z)?;
        Ok(match self {
            OperatorSpec::DiagonalAffine { a, b } => z
                .iter()
                .zip(a.iter().zip(b))
                .map(|(z, (a, b))| (z - gamma * b) / (1.0 + gamma * a))
                .collect(),
            OperatorSpec::GradSeparableQuadratic { q, c } => z
                .iter()
                .zip(q.iter().zip(c))
                .map(|(z, (q, c))| (z + gamma * q * c) / (1.0 + gamma * q))
                .collect(),
            OperatorSpec::CvarAugmented { cost, alpha } => {
                let (q, p) = prox_cvar_augmented(cost, *alpha, gamma, z[0], &z[1..], DEFAULT_BISECTION_TOL)?;
                let mut out = Vec::with_capacity(z.len());
                out.push(q);
                out.extend(p);
                out
            }
        })
    }

    /// `A(x)` for the single-valued variants, `None` for the set-valued one.
    pub fn apply(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            OperatorSpec::DiagonalAffine { a, b } => {
                Some(x.iter().zip(a.iter().zip(b)).map(|(x, (a, b))| a * x + b).collect())
            }
            OperatorSpec::GradSeparableQuadratic { q, c } => {
                Some(x.iter().zip(q.iter().zip(c)).map(|(x, (q, c))| q * (x - c)).collect())
            }
            OperatorSpec::CvarAugmented { .. } => None,
        }
    }
}

/// A nonempty closed convex set `C(ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    WholeSpace,
    /// Componentwise bounds; `±UNBOUNDED` (or infinities) mark free sides.
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{x : ⟨g, x⟩ ≤ h}`
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `{x : ⟨g, x⟩ = h}`
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `R × inner`: the leading coordinate is unconstrained.
    Lifted(Box<ConstraintSpec>),
}

impl ConstraintSpec {
    /// Dimension fixed by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ConstraintSpec::WholeSpace => None,
            ConstraintSpec::Box { lo, .. } => Some(lo.len()),
            ConstraintSpec::Ball { center, .. } => Some(center.len()),
            ConstraintSpec::Halfspace { normal, .. } | ConstraintSpec::Hyperplane { normal, .. } => Some(normal.len()),
            ConstraintSpec::Lifted(inner) => inner.dim().map(|d| d + 1),
        }
    }

    /// Checks the parameters and, when the set fixes a dimension, that it is `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if let Some(found) = self.dim() {
            if found != d {
                return Err(Error::DimensionMismatch { expected: d, found });
            }
        }
        match self {
            ConstraintSpec::WholeSpace => Ok(()),
            ConstraintSpec::Box { lo, hi } => {
                same_len("box", lo, hi)?;
                if lo.iter().chain(hi).any(|v| v.is_nan()) {
                    return Err(invalid("box", "bounds must not be NaN"));
                }
                if let Some(i) = lo.iter().zip(hi).position(|(l, h)| l > h) {
                    return Err(invalid("box", format!("lo > hi on axis {i}")));
                }
                Ok(())
            }
            ConstraintSpec::Ball { center, radius } => {
                check_finite("ball", center)?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(invalid("ball", format!("radius must be positive, got {radius}")));
                }
                Ok(())
            }
            ConstraintSpec::Halfspace { normal, offset } | ConstraintSpec::Hyperplane { normal, offset } => {
                check_finite("halfspace/hyperplane", normal)?;
                check_finite("halfspace/hyperplane", &[*offset])?;
                if normal.iter().all(|&g| g == 0.0) {
                    return Err(invalid("halfspace/hyperplane", "normal must be nonzero"));
                }
                Ok(())
            }
            ConstraintSpec::Lifted(inner) => {
                if d == 0 {
                    return Err(invalid("lifted constraint", "needs at least one coordinate"));
                }
                inner.validate(d - 1)
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if let Some(d) = self.dim() {
            check_dim(d, z)?;
        }
        Ok(match self {
            ConstraintSpec::WholeSpace => z.to_vec(),
            ConstraintSpec::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(z, (l, h))| z.max(*l).min(*h))
                .collect(),
            ConstraintSpec::Ball { center, radius } => {
                let diff: Vec<f64> = z.iter().zip(center).map(|(z, c)| z - c).collect();
                let dist = norm2(&diff);
                if dist <= *radius {
                    z.to_vec()
                } else {
                    let s = radius / dist;
                    center.iter().zip(&diff).map(|(c, d)| c + s * d).collect()
                }
            }
            ConstraintSpec::Halfspace { normal, offset } => {
                let excess = dot(normal, z) - offset;
                if excess <= 0.0 {
                    z.to_vec()
                } else {
                    shift_along(z, normal, excess)
                }
            }
            ConstraintSpec::Hyperplane { normal, offset } => shift_along(z, normal, dot(normal, z) - offset),
            ConstraintSpec::Lifted(inner) => {
                if z.is_empty() {
                    return Err(Error::DimensionMismatch { expected: 1, found: 0 });
                }
                let mut out = Vec::with_capacity(z.len());
                out.push(z[0]);
                out.extend(inner.project(&z[1..])?);
                out
            }
        })
    }

    /// Coordinates that `Id − proj_C` can move, for a `d`-dimensional space.
    fn residual_support(&self, d: usize) -> ResidualSupport {
        match self {
            ConstraintSpec::WholeSpace => ResidualSupport::Axes(vec![false; d]),
            ConstraintSpec::Box { lo, hi } => ResidualSupport::Axes(
                lo.iter()
                    .zip(hi)
                    .map(|(l, h)| !(*l <= -UNBOUNDED && *h >= UNBOUNDED))
                    .collect(),
            ),
            ConstraintSpec::Ball { .. } => ResidualSupport::Everything,
            ConstraintSpec::Halfspace { normal, .. } | ConstraintSpec::Hyperplane { normal, .. } => {
                ResidualSupport::Axes(normal.iter().map(|&g| g != 0.0).collect())
            }
            ConstraintSpec::Lifted(inner) => {
                let mut mask = vec![false];
                match inner.residual_support(d.saturating_sub(1)) {
                    ResidualSupport::Axes(m) => mask.extend(m),
                    ResidualSupport::Everything => mask.extend(core::iter::repeat_n(true, d.saturating_sub(1))),
                }
                ResidualSupport::Axes(mask)
            }
        }
    }
}

enum ResidualSupport {
    Axes(Vec<bool>),
    Everything,
}

/// A linear subspace `U(ξ)` of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum SubspaceSpec {
    Full,
    Zero,
    /// Span of the listed (0-based) coordinate axes.
    Coordinates(Vec<usize>),
}

impl SubspaceSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        if let SubspaceSpec::Coordinates(axes) = self {
            if let Some(&i) = axes.iter().find(|&&i| i >= d) {
                return Err(invalid(
                    "coordinate subspace",
                    format!("axis {i} out of range for dimension {d}"),
                ));
            }
        }
        Ok(())
    }

    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            SubspaceSpec::Full => z.to_vec(),
            SubspaceSpec::Zero => vec![0.0; z.len()],
            SubspaceSpec::Coordinates(axes) => {
                if let Some(&i) = axes.iter().find(|&&i| i >= z.len()) {
                    return Err(Error::DimensionMismatch {
                        expected: i + 1,
                        found: z.len(),
                    });
                }
                let mut out = vec![0.0; z.len()];
                for &i in axes {
                    out[i] = z[i];
                }
                out
            }
        })
    }

    fn contains_axes(&self, mask: &[bool]) -> bool {
        match self {
            SubspaceSpec::Full => true,
            SubspaceSpec::Zero => mask.iter().all(|m| !m),
            SubspaceSpec::Coordinates(axes) => mask.iter().enumerate().all(|(i, &m)| !m || axes.contains(&i)),
        }
    }
}

/// Sound (not complete) check of `ran(Id − proj_C) ⊂ U` in dimension `d`.
///
/// `U = R^d` always passes. Otherwise the set of axes along which the
/// projection residual can be nonzero must lie inside `U`; a ball moves every
/// direction and only passes with the full space.
pub fn validate_range_condition(cs: &ConstraintSpec, us: &SubspaceSpec, d: usize) -> bool {
    if *us == SubspaceSpec::Full {
        return true;
    }
    match cs.residual_support(d) {
        ResidualSupport::Everything => false,
        ResidualSupport::Axes(mask) => us.contains_axes(&mask),
    }
}

/// `J_{γ(A + N_C)}(z)` for the separable pairs that have a closed form:
/// diagonal operators with a box (or no constraint).
pub fn composite_resolvent(op: &OperatorSpec, cs: &ConstraintSpec, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
    let separable = matches!(
        op,
        OperatorSpec::DiagonalAffine { .. } | OperatorSpec::GradSeparableQuadratic { .. }
    );
    match cs {
        ConstraintSpec::WholeSpace if separable => op.resolvent(gamma, z),
        // Each coordinate solves a 1-D monotone inclusion on an interval, so
        // the constrained root is the clamp of the unconstrained one.
        ConstraintSpec::Box { .. } if separable => {
            let p = op.resolvent(gamma, z)?;
            cs.project(&p)
        }
        _ => Err(Error::UnsupportedComposite { scenario: None }),
    }
}

fn shift_along(z: &[f64], g: &[f64], excess: f64) -> Vec<f64> {
    let s = excess / dot(g, g);
    z.iter().zip(g).map(|(z, g)| z - s * g).collect()
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveGamma(gamma))
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

pub(crate) fn check_dim(expected: usize, z: &[f64]) -> Result<()> {
    if z.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: z.len(),
        })
    }
}

fn invalid(what: &'static str, reason: impl Into<alloc::string::String>) -> Error {
    Error::InvalidSpec {
        what,
        reason: reason.into(),
    }
}

fn same_len(what: &'static str, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(invalid(
            what,
            format!("parameter lengths differ ({} vs {})", a.len(), b.len()),
        ))
    }
}

fn check_finite(what: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(what, "parameters must be finite"))
    }
}

fn check_nonnegative(what: &'static str, name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|&x| x < 0.0) {
        None => Ok(()),
        Some(i) => Err(invalid(what, format!("{name}[{i}] = {} is negative", v[i]))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::boxed::Box;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diag(a: f64, b: f64) -> OperatorSpec {
        OperatorSpec::DiagonalAffine { a: vec![a], b: vec![b] }
    }

    fn unit_box(d: usize) -> ConstraintSpec {
        ConstraintSpec::Box {
            lo: vec![0.0; d],
            hi: vec![1.0; d],
        }
    }

    #[test]
    fn resolvent_examples() {
        let zero = OperatorSpec::DiagonalAffine {
            a: vec![0.0; 2],
            b: vec![0.0; 2],
        };
        assert_eq!(zero.resolvent(0.7, &[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);
        assert_eq!(diag(1.0, 1.0).resolvent(1.0, &[3.0]).unwrap(), vec![1.0]);
        let quad = OperatorSpec::GradSeparableQuadratic {
            q: vec![2.0],
            c: vec![0.0],
        };
        assert_eq!(quad.resolvent(0.5, &[4.0]).unwrap(), vec![2.0]);
    }

    #[test]
    fn resolvent_errors() {
        assert_eq!(diag(1.0, 0.0).resolvent(0.0, &[1.0]), Err(Error::NonPositiveGamma(0.0)));
        assert_eq!(
            diag(1.0, 0.0).resolvent(1.0, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        );
        assert!(diag(-1.0, 0.0).validate().is_err());
        assert!(OperatorSpec::CvarAugmented {
            cost: CostSpec::Affine { c: vec![1.0], r: 0.0 },
            alpha: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn cvar_resolvent_puts_threshold_first() {
        let op = OperatorSpec::CvarAugmented {
            cost: CostSpec::Affine { c: vec![1.0], r: 0.0 },
            alpha: 0.5,
        };
        assert_eq!(op.dim(), 2);
        let p = op.resolvent(1.0, &[5.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p[0], 4.0);
        assert_abs_diff_eq!(p[1], 1.0);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(unit_box(2).project(&[2.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        let ball = ConstraintSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let p = ball.project(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-15);
        let half = ConstraintSpec::Halfspace {
            normal: vec![1.0, 0.0],
            offset: 0.0,
        };
        assert_eq!(half.project(&[-1.0, 5.0]).unwrap(), vec![-1.0, 5.0]);
        assert_eq!(half.project(&[2.0, 5.0]).unwrap(), vec![0.0, 5.0]);
        let plane = ConstraintSpec::Hyperplane {
            normal: vec![1.0, 1.0],
            offset: 1.0,
        };
        assert_eq!(plane.project(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
        let lifted = ConstraintSpec::Lifted(Box::new(unit_box(1)));
        assert_eq!(lifted.project(&[9.0, 2.0]).unwrap(), vec![9.0, 1.0]);
        assert!(unit_box(2).project(&[1.0]).is_err());
    }

    #[test]
    fn constraint_validation() {
        assert!(unit_box(2).validate(2).is_ok());
        assert!(unit_box(2).validate(3).is_err());
        assert!(ConstraintSpec::Box {
            lo: vec![1.0],
            hi: vec![0.0]
        }
        .validate(1)
        .is_err());
        assert!(ConstraintSpec::Ball {
            center: vec![0.0],
            radius: 0.0
        }
        .validate(1)
        .is_err());
        assert!(ConstraintSpec::Halfspace {
            normal: vec![0.0],
            offset: 0.0
        }
        .validate(1)
        .is_err());
        assert!(ConstraintSpec::WholeSpace.validate(5).is_ok());
        assert!(ConstraintSpec::Lifted(Box::new(unit_box(1))).validate(2).is_ok());
    }

    #[test]
    fn subspace_examples() {
        assert_eq!(SubspaceSpec::Full.project(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(SubspaceSpec::Zero.project(&[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            SubspaceSpec::Coordinates(vec![0]).project(&[1.0, 2.0]).unwrap(),
            vec![1.0, 0.0]
        );
        assert!(SubspaceSpec::Coordinates(vec![2]).project(&[1.0, 2.0]).is_err());
        assert!(SubspaceSpec::Coordinates(vec![2]).validate(2).is_err());
    }

    #[test]
    fn range_condition_catalog() {
        let ball = ConstraintSpec::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        for cs in [ConstraintSpec::WholeSpace, unit_box(2), ball.clone()] {
            assert!(validate_range_condition(&cs, &SubspaceSpec::Full, 2));
        }
        assert!(validate_range_condition(
            &ConstraintSpec::WholeSpace,
            &SubspaceSpec::Zero,
            2
        ));
        // (2, 2) leaves residual (1, 1) outside {0}.
        assert!(!validate_range_condition(&unit_box(2), &SubspaceSpec::Zero, 2));
        assert!(!validate_range_condition(
            &ball,
            &SubspaceSpec::Coordinates(vec![0, 1]),
            2
        ));

        let half_free = ConstraintSpec::Box {
            lo: vec![0.0, -UNBOUNDED],
            hi: vec![1.0, UNBOUNDED],
        };
        assert!(validate_range_condition(
            &half_free,
            &SubspaceSpec::Coordinates(vec![0]),
            2
        ));
        assert!(!validate_range_condition(
            &half_free,
            &SubspaceSpec::Coordinates(vec![1]),
            2
        ));
        let one_sided = ConstraintSpec::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, UNBOUNDED],
        };
        assert!(!validate_range_condition(
            &one_sided,
            &SubspaceSpec::Coordinates(vec![0]),
            2
        ));

        let half = ConstraintSpec::Halfspace {
            normal: vec![0.0, 2.0],
            offset: 1.0,
        };
        assert!(validate_range_condition(&half, &SubspaceSpec::Coordinates(vec![1]), 2));
        assert!(!validate_range_condition(&half, &SubspaceSpec::Coordinates(vec![0]), 2));

        let lifted = ConstraintSpec::Lifted(Box::new(unit_box(1)));
        assert!(validate_range_condition(
            &lifted,
            &SubspaceSpec::Coordinates(vec![1]),
            2
        ));
        assert!(!validate_range_condition(
            &lifted,
            &SubspaceSpec::Coordinates(vec![0]),
            2
        ));
        let lifted_free = ConstraintSpec::Lifted(Box::new(ConstraintSpec::WholeSpace));
        assert!(validate_range_condition(&lifted_free, &SubspaceSpec::Zero, 2));
    }

    #[test]
    fn composite_examples() {
        let zero = diag(0.0, 0.0);
        assert_eq!(
            composite_resolvent(&zero, &unit_box(1), 1.0, &[1.7]).unwrap(),
            vec![1.0]
        );
        assert_eq!(
            composite_resolvent(&diag(1.0, 1.0), &unit_box(1), 1.0, &[3.0]).unwrap(),
            vec![1.0]
        );
        assert_eq!(
            composite_resolvent(&diag(1.0, 0.0), &unit_box(1), 1.0, &[-4.0]).unwrap(),
            vec![0.0]
        );
        let ball = ConstraintSpec::Ball {
            center: vec![0.0],
            radius: 1.0,
        };
        assert_eq!(
            composite_resolvent(&diag(1.0, 0.0), &ball, 1.0, &[0.0]),
            Err(Error::UnsupportedComposite { scenario: None })
        );
    }

    #[test]
    fn cost_prox_and_value() {
        let f = CostSpec::Affine { c: vec![1.0], r: -1.0 };
        assert_eq!(f.prox(1.0, &[3.0]), vec![2.0]);
        assert_eq!(f.value(&[2.0]), 1.0);
        let g = CostSpec::SeparableQuadratic {
            q: vec![2.0],
            c: vec![1.0],
            r: 0.5,
        };
        assert_eq!(g.value(&[2.0]), 1.5);
        assert_eq!(g.prox(0.5, &[3.0]), vec![2.0]);
        assert!(CostSpec::SeparableQuadratic {
            q: vec![-1.0],
            c: vec![0.0],
            r: 0.0
        }
        .validate()
        .is_err());
    }

    fn operator() -> impl Strategy<Value = OperatorSpec> {
        let diag = (prop::collection::vec(0.0..5.0, 3), prop::collection::vec(-3.0..3.0, 3))
            .prop_map(|(a, b)| OperatorSpec::DiagonalAffine { a, b });
        let quad = (prop::collection::vec(0.0..5.0, 3), prop::collection::vec(-3.0..3.0, 3))
            .prop_map(|(q, c)| OperatorSpec::GradSeparableQuadratic { q, c });
        let cvar = (
            prop::collection::vec(0.0..3.0, 2),
            prop::collection::vec(-2.0..2.0, 2),
            0.05..0.95,
        )
            .prop_map(|(q, c, alpha)| OperatorSpec::CvarAugmented {
                cost: CostSpec::SeparableQuadratic { q, c, r: 0.0 },
                alpha,
            });
        prop_oneof![diag, quad, cvar]
    }

    fn constraint() -> impl Strategy<Value = ConstraintSpec> {
        let boxed = prop::collection::vec((-2.0..0.0, 0.0..2.0), 3).prop_map(|b| ConstraintSpec::Box {
            lo: b.iter().map(|p| p.0).collect(),
            hi: b.iter().map(|p| p.1).collect(),
        });
        let ball = (prop::collection::vec(-1.0..1.0, 3), 0.1..2.0)
            .prop_map(|(center, radius)| ConstraintSpec::Ball { center, radius });
        let half = (prop::collection::vec(-1.0..1.0, 3), -1.0..1.0)
            .prop_filter("nonzero normal", |(g, _)| norm2(g) > 1e-3)
            .prop_map(|(normal, offset)| ConstraintSpec::Halfspace { normal, offset });
        let plane = (prop::collection::vec(-1.0..1.0, 3), -1.0..1.0)
            .prop_filter("nonzero normal", |(g, _)| norm2(g) > 1e-3)
            .prop_map(|(normal, offset)| ConstraintSpec::Hyperplane { normal, offset });
        prop_oneof![boxed, ball, half, plane]
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-4.0..4.0, 3)
    }

    proptest! {
        #[test]
        fn resolvents_are_firmly_nonexpansive(
            op in operator(), gamma in 0.1..5.0, z in vec3(), w in vec3()
        ) {
            let (z, w) = (&z[..op.dim()], &w[..op.dim()]);
            let jz = op.resolvent(gamma, z).unwrap();
            let jw = op.resolvent(gamma, w).unwrap();
            let dj: Vec<f64> = jz.iter().zip(&jw).map(|(a, b)| a - b).collect();
            let dz: Vec<f64> = z.iter().zip(w).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&dj, &dj) <= dot(&dz, &dj) + 1e-10);
        }

        #[test]
        fn single_valued_resolvent_identity(op in operator(), gamma in 0.1..5.0, z in vec3()) {
            let z = &z[..op.dim()];
            let p = op.resolvent(gamma, z).unwrap();
            if let Some(ap) = op.apply(&p) {
                for i in 0..z.len() {
                    prop_assert!((p[i] + gamma * ap[i] - z[i]).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn projectors_are_idempotent_and_obtuse(cs in constraint(), z in vec3(), c in vec3()) {
            let p = cs.project(&z).unwrap();
            let pp = cs.project(&p).unwrap();
            for i in 0..3 {
                prop_assert!((p[i] - pp[i]).abs() <= 1e-10);
            }
            // Any point of C, obtained by projecting a random point.
            let feasible = cs.project(&c).unwrap();
            let zp: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
            let cp: Vec<f64> = feasible.iter().zip(&p).map(|(a, b)| a - b).collect();
            prop_assert!(dot(&zp, &cp) <= 1e-10);
        }
    }
}
