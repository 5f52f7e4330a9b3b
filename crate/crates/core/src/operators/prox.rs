//! Proximity operators of `γ max{f, 0}` and of the CVaR integrand
//! `(y, x) ↦ y + max{f(x) − y, 0} / (1 − α)`.
//!
//! Both reduce to three cases: the kink is inactive on one side, inactive on
//! the other, or the prox lands on the kink. The last case is a scalar root
//! of a continuous decreasing function of `θ ∈ [0, 1]`, found by bisection.

use alloc::vec::Vec;

use super::{check_alpha, check_dim, check_gamma, CostSpec};
use crate::error::{Error, Result};
use crate::MAX_BISECTION_STEPS;

/// Which branch produced a `prox_{γ max{f,0}}` value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProxCase {
    /// `f(x) < 0`: the point is returned unchanged.
    Inactive,
    /// `f(prox_{γf} x) > 0`: the plain prox of `γf`.
    Active,
    /// Otherwise `prox_{θγf} x` with `f(prox_{θγf} x) = 0`.
    Kink { theta: f64 },
}

/// Which branch produced a CVaR-integrand prox value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CvarProxCase {
    /// `f(x) − y + γ < 0`
    BelowThreshold,
    /// `f(prox_{τf} x) − y > τ − γ`
    AboveThreshold,
    /// Root of `f(prox_{θτf} x) − y + γ − θτ = 0`.
    Kink { theta: f64 },
}

/// `prox_{γ max{f, 0}}(x)`.
pub fn prox_max_nonneg(f: &CostSpec, gamma: f64, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    prox_max_nonneg_with_case(f, gamma, x, tol).map(|(p, _)| p)
}

/// As [`prox_max_nonneg`], also reporting which case fired.
pub fn prox_max_nonneg_with_case(f: &CostSpec, gamma: f64, x: &[f64], tol: f64) -> Result<(Vec<f64>, ProxCase)> {
    check_gamma(gamma)?;
    check_tol(tol)?;
    check_dim(f.dim(), x)?;

    if f.value(x) < 0.0 {
        return Ok((x.to_vec(), ProxCase::Inactive));
    }
    let full = f.prox(gamma, x);
    if f.value(&full) > 0.0 {
        return Ok((full, ProxCase::Active));
    }
    let theta = bisect(tol, |theta| f.value(&f.prox(theta * gamma, x)));
    Ok((f.prox(theta * gamma, x), ProxCase::Kink { theta }))
}

/// `prox_{γ𝐟}(y, x)` for `𝐟(y, x) = y + max{f(x) − y, 0} / (1 − α)`.
///
/// Returns `(q, p)`: the new threshold and the new decision vector.
pub fn prox_cvar_augmented(
    f: &CostSpec,
    alpha: f64,
    gamma: f64,
    y: f64,
    x: &[f64],
    tol: f64,
) -> Result<(f64, Vec<f64>)> {
    prox_cvar_augmented_with_case(f, alpha, gamma, y, x, tol).map(|(q, p, _)| (q, p))
}

/// As [`prox_cvar_augmented`], also reporting which case fired.
pub fn prox_cvar_augmented_with_case(
    f: &CostSpec,
    alpha: f64,
    gamma: f64,
    y: f64,
    x: &[f64],
    tol: f64,
) -> Result<(f64, Vec<f64>, CvarProxCase)> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_tol(tol)?;
    check_dim(f.dim(), x)?;

    let tau = gamma / (1.0 - alpha);
    if f.value(x) - y + gamma < 0.0 {
        return Ok((y - gamma, x.to_vec(), CvarProxCase::BelowThreshold));
    }
    let full = f.prox(tau, x);
    if f.value(&full) - y > tau - gamma {
        return Ok((y - gamma + tau, full, CvarProxCase::AboveThreshold));
    }
    let theta = bisect(tol, |theta| f.value(&f.prox(theta * tau, x)) - y + gamma - theta * tau);
    Ok((
        y - gamma + theta * tau,
        f.prox(theta * tau, x),
        CvarProxCase::Kink { theta },
    ))
}

/// Root of a continuous decreasing `g` on `[0, 1]` with `g(0) ≥ 0 ≥ g(1)`.
fn bisect(tol: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if v > 0.0 {
            lo = mid;
        } else if v < 0.0 {
            hi = mid;
        } else {
            return mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::ToleranceError(tol))
    }
}
