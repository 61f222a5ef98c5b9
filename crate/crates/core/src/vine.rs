//! Three-dimensional vine (pair-copula) density decomposition.
//!
//! A trivariate density factors into its marginals, two unconditional pair
//! copula densities, and one conditional pair density:
//!
//! `f(x1, x2, x3) = f1 f2 f3 * c12(F1, F2) * c23(F2, F3)
//!                  * c13|2(F_{1|2}, F_{3|2})`
//!
//! The conditional CDF arguments `F_{1|2}` and `F_{3|2}` are computed by
//! numerically integrating the conditional density relation
//! `f_{1|2}(s | x2) = c12(F1(s), F2(x2)) f1(s)` with composite Simpson
//! quadrature (512 panels) and normalizing, which works for any pair family
//! with an evaluable density and avoids per-family conditional formulas.

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::numeric::simpson;

/// Quantile level standing in for the support endpoints of unbounded
/// margins when fixing integration limits.
const TAIL_EPS: f64 = 1e-9;

/// Clamp applied to copula-density arguments so endpoint evaluations stay
/// inside the open square.
const ARG_EPS: f64 = 1e-12;

/// Number of Simpson panels for conditional CDFs.
const SIMPSON_PANELS: usize = 512;

/// Which argument slot of the pair copula the integrated variable occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSlot {
    First,
    Second,
}

fn clamp_interior(u: f64) -> f64 {
    u.clamp(ARG_EPS, 1.0 - ARG_EPS)
}

fn support_limits(m: &Margin) -> Result<(f64, f64)> {
    let lo = match m.essential_infimum() {
        Some(v) => v,
        None => m.quantile(TAIL_EPS)?,
    };
    let hi = match m.essential_supremum() {
        Some(v) => v,
        None => m.quantile(1.0 - TAIL_EPS)?,
    };
    Ok((lo, hi))
}

/// Conditional CDF `F_{target | cond}(x | cond_value)` under the given pair
/// copula, by Simpson integration of the conditional density and
/// normalization over the target's support.
///
/// `slot` states which argument of the pair copula belongs to the target
/// variable; the conditioning variable takes the other slot.
pub fn conditional_cdf(
    target: &Margin,
    cond: &Margin,
    pair: &Copula,
    slot: PairSlot,
    x: f64,
    cond_value: f64,
) -> Result<f64> {
    let u_cond = clamp_interior(cond.cdf(cond_value)?);
    let (lo, hi) = support_limits(target)?;
    if x <= lo {
        return Ok(0.0);
    }

    // Resolve the pair density up front so singular families fail loudly
    // rather than mid-quadrature.
    pair.density(0.5, u_cond)?;

    let integrand = |s: f64| {
        let u_t = clamp_interior(target.cdf(s).unwrap_or(0.0));
        let d = match slot {
            PairSlot::First => pair.density(u_t, u_cond),
            PairSlot::Second => pair.density(u_cond, u_t),
        }
        .unwrap_or(0.0);
        d * target.pdf(s).unwrap_or(0.0)
    };

    let numerator = simpson(integrand, lo, x.min(hi), SIMPSON_PANELS);
    let normalizer = simpson(integrand, lo, hi, SIMPSON_PANELS);
    if normalizer <= 0.0 {
        return Err(Error::InternalConsistency(
            "conditional density normalizer is not positive".into(),
        ));
    }
    Ok((numerator / normalizer).clamp(0.0, 1.0))
}

/// Trivariate vine density
/// `f3 f2 f1 * c12(F1, F2) * c23(F2, F3) * c13|2(F_{1|2}, F_{3|2})`.
///
/// Margins must admit densities; pair families must be absolutely
/// continuous (singular families are rejected exactly as in the numerical
/// copula density).
pub fn vine_density_3(
    margins: &[Margin; 3],
    c12: &Copula,
    c23: &Copula,
    c13_2: &Copula,
    x: [f64; 3],
) -> Result<f64> {
    let f: Vec<f64> = margins
        .iter()
        .zip(x)
        .map(|(m, xi)| m.pdf(xi))
        .collect::<Result<_>>()?;
    if f.iter().any(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let u1 = clamp_interior(margins[0].cdf(x[0])?);
    let u2 = clamp_interior(margins[1].cdf(x[1])?);
    let u3 = clamp_interior(margins[2].cdf(x[2])?);

    let d12 = c12.density(u1, u2)?;
    let d23 = c23.density(u2, u3)?;

    let f1_given_2 = conditional_cdf(&margins[0], &margins[1], c12, PairSlot::First, x[0], x[1])?;
    let f3_given_2 = conditional_cdf(&margins[2], &margins[1], c23, PairSlot::Second, x[2], x[1])?;
    let d13_2 = c13_2.density(clamp_interior(f1_given_2), clamp_interior(f3_given_2))?;

    Ok(f[0] * f[1] * f[2] * d12 * d23 * d13_2)
}
