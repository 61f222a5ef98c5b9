//! Dependence measures and bounds: Pearson correlation through Hoeffding's
//! identity, extremal (Fréchet-bound) correlations, Kendall's tau and
//! Spearman's rho in sample and copula-integral form, the trivariate
//! compatibility inequality, and the `3 tau - 2 rho` bound.

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::numeric::mean_and_sd;
use crate::rng::RandomStream;
use serde::Serialize;

/// Minimum admissible quadrature grid.
pub const MIN_GRID: usize = 16;

/// Default quadrature grid for Hoeffding's identity.
pub const DEFAULT_GRID: usize = 512;

/// Rectangle `[x_lo, x_hi] x [y_lo, y_hi]` for 2-D quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Rect {
    /// The box spanning both margins' 0.001–0.999 quantile ranges.
    pub fn from_margins(mx: &Margin, my: &Margin) -> Result<Self> {
        Ok(Rect {
            x_lo: mx.quantile(0.001)?,
            x_hi: mx.quantile(0.999)?,
            y_lo: my.quantile(0.001)?,
            y_hi: my.quantile(0.999)?,
        })
    }
}

fn check_nondegenerate(m: &Margin) -> Result<f64> {
    let sd = m.std_dev();
    if !(sd.is_finite() && sd > 0.0) {
        return Err(Error::domain(format!(
            "margin has degenerate (zero or non-finite) standard deviation: {m:?}"
        )));
    }
    Ok(sd)
}

/// Pearson correlation by Hoeffding's identity,
/// `Cov(X, Y) = integral of [H(x, y) - F_X(x) F_Y(y)] dx dy`,
/// evaluated with the midpoint rule on an `n x n` grid over `rect`, then
/// divided by the margins' standard deviations.
///
/// `rect` must cover both margins' 0.001–0.999 quantile box.
pub fn pearson_via_hoeffding<H>(
    joint_cdf: H,
    mx: &Margin,
    my: &Margin,
    rect: Rect,
    grid_n: usize,
) -> Result<f64>
where
    H: Fn(f64, f64) -> Result<f64>,
{
    if grid_n < MIN_GRID {
        return Err(Error::Resolution {
            n: grid_n,
            min: MIN_GRID,
        });
    }
    let sx = check_nondegenerate(mx)?;
    let sy = check_nondegenerate(my)?;
    let required = Rect::from_margins(mx, my)?;
    let slack_x = 1e-9 * (required.x_hi - required.x_lo).abs().max(1.0);
    let slack_y = 1e-9 * (required.y_hi - required.y_lo).abs().max(1.0);
    if rect.x_lo > required.x_lo + slack_x
        || rect.x_hi < required.x_hi - slack_x
        || rect.y_lo > required.y_lo + slack_y
        || rect.y_hi < required.y_hi - slack_y
    {
        return Err(Error::domain(format!(
            "integration box {rect:?} does not cover the 0.001-0.999 quantile box {required:?}"
        )));
    }

    let wx = (rect.x_hi - rect.x_lo) / grid_n as f64;
    let wy = (rect.y_hi - rect.y_lo) / grid_n as f64;
    let xs: Vec<f64> = (0..grid_n)
        .map(|i| rect.x_lo + (i as f64 + 0.5) * wx)
        .collect();
    let ys: Vec<f64> = (0..grid_n)
        .map(|j| rect.y_lo + (j as f64 + 0.5) * wy)
        .collect();
    let fx: Vec<f64> = xs.iter().map(|&x| mx.cdf(x)).collect::<Result<_>>()?;
    let fy: Vec<f64> = ys.iter().map(|&y| my.cdf(y)).collect::<Result<_>>()?;

    let mut cov = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            cov += joint_cdf(x, y)? - fx[i] * fy[j];
        }
    }
    cov *= wx * wy;
    Ok(cov / (sx * sy))
}

/// One cell of a tail-refined quantile partition: midpoint node and width.
struct Cell {
    node: f64,
    weight: f64,
    cdf_at_node: f64,
}

/// Partition the real line into cells whose breakpoints are quantiles of a
/// probability grid: a uniform core of `core_cells` levels plus
/// geometrically refined levels down to `eps` in both tails. Heavy-tailed
/// margins get cells that track where their distribution actually varies,
/// which an equally spaced grid cannot do.
fn quantile_cells(m: &Margin, core_cells: usize, eps: f64) -> Result<Vec<Cell>> {
    let delta = 1.0 / core_cells as f64;
    let mut levels = Vec::with_capacity(core_cells + 80);
    let mut t = eps;
    while t < delta {
        levels.push(t);
        t *= 2.0;
    }
    for i in 1..core_cells {
        levels.push(i as f64 * delta);
    }
    let mut t = eps;
    while t < delta {
        levels.push(1.0 - t);
        t *= 2.0;
    }
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    levels.dedup();

    let breaks: Vec<f64> = levels
        .iter()
        .map(|&s| m.quantile(s))
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        let weight = w[1] - w[0];
        if weight > 0.0 {
            let node = 0.5 * (w[0] + w[1]);
            cells.push(Cell {
                node,
                weight,
                cdf_at_node: m.cdf(node)?,
            });
        }
    }
    Ok(cells)
}

const EXTREMAL_EPS: f64 = 1e-10;

/// The attainable correlation interval `(rho_min, rho_max)` for the given
/// margins: the Fréchet lower and upper bounds plugged into Hoeffding's
/// identity. Always `rho_min < 0 < rho_max` for nondegenerate margins.
///
/// Quadrature runs on quantile-spaced midpoint cells with geometric tail
/// refinement down to the 1e-10 quantile, so heavy-tailed margins (whose
/// covariance mass sits far beyond the 0.999 quantile) are integrated
/// accurately.
pub fn extremal_correlations(mx: &Margin, my: &Margin) -> Result<(f64, f64)> {
    let sx = check_nondegenerate(mx)?;
    let sy = check_nondegenerate(my)?;
    let xc = quantile_cells(mx, DEFAULT_GRID, EXTREMAL_EPS)?;
    let yc = quantile_cells(my, DEFAULT_GRID, EXTREMAL_EPS)?;

    let mut cov_upper = 0.0;
    let mut cov_lower = 0.0;
    for cx in &xc {
        for cy in &yc {
            let w = cx.weight * cy.weight;
            let prod = cx.cdf_at_node * cy.cdf_at_node;
            cov_upper += (cx.cdf_at_node.min(cy.cdf_at_node) - prod) * w;
            cov_lower += ((cx.cdf_at_node + cy.cdf_at_node - 1.0).max(0.0) - prod) * w;
        }
    }
    Ok((cov_lower / (sx * sy), cov_upper / (sx * sy)))
}

/// Closed-form extremal correlations for `X ~ Lognormal(0, 1)` against
/// `Y ~ Lognormal(0, sigma^2)`:
///
/// `rho_min = (e^-sigma - 1) / sqrt((e - 1)(e^(sigma^2) - 1))`
/// `rho_max = (e^sigma - 1) / sqrt((e - 1)(e^(sigma^2) - 1))`
///
/// Both tend to zero as sigma grows even though the pair is counter- or
/// comonotonic, the standard warning against reading small correlation as
/// weak dependence.
pub fn lognormal_extremal_closed_form(sigma: f64) -> Result<(f64, f64)> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    let denom = (1f64.exp_m1() * (sigma * sigma).exp_m1()).sqrt();
    Ok(((-sigma).exp_m1() / denom, sigma.exp_m1() / denom))
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::domain("pairs must be finite"));
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson_sample(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (mx, sx) = mean_and_sd(&xs);
    let (my, sy) = mean_and_sd(&ys);
    if sx == 0.0 || sy == 0.0 {
        return Err(Error::domain("degenerate sample: zero variance"));
    }
    let cov = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / pairs.len() as f64;
    Ok(cov / (sx * sy))
}

/// Kendall's tau over all distinct index pairs: concordant minus discordant
/// over `C(n, 2)`; ties count as neither (tau-a).
pub fn kendall_tau_sample(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let n = pairs.len();
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pairs[i].0 - pairs[j].0;
            let dy = pairs[i].1 - pairs[j].1;
            let s = dx * dy;
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    Ok((concordant as f64 - discordant as f64) / total)
}

/// Midranks (average ranks for ties), 1-based.
fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the (mid)ranks, i.e. the grade
/// correlation between `F(X)` and `G(Y)`.
pub fn spearman_rho_sample(pairs: &[(f64, f64)]) -> Result<f64> {
    check_pairs(pairs)?;
    let rx = midranks(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let ry = midranks(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let ranked: Vec<(f64, f64)> = rx.into_iter().zip(ry).collect();
    pearson_sample(&ranked)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Kendall's tau for a bivariate copula by Monte Carlo over the identity
/// `tau = 4 E[C(U, V)] - 1`, with `(U, V)` drawn from the copula itself.
pub fn kendall_tau_copula(c: &Copula, n: usize, rng: &mut RandomStream) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, v) = c.sample2(rng)?;
        values.push(c.eval2(u, v)?);
    }
    let (mean, sd) = mean_and_sd(&values);
    Ok(McEstimate {
        value: 4.0 * mean - 1.0,
        std_error: 4.0 * sd / (n as f64).sqrt(),
        n,
    })
}

/// Spearman's rho for a bivariate copula by Monte Carlo over
/// `rho = 12 E[U V] - 3`.
pub fn spearman_rho_copula(c: &Copula, n: usize, rng: &mut RandomStream) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let (u, v) = c.sample2(rng)?;
        values.push(u * v);
    }
    let (mean, sd) = mean_and_sd(&values);
    Ok(McEstimate {
        value: 12.0 * mean - 3.0,
        std_error: 12.0 * sd / (n as f64).sqrt(),
        n,
    })
}

/// A permutation violating the compatibility inequality, with the bounds it
/// broke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncompatibilityWitness {
    /// Variable labels `(i, j, k)`: the bound constrains `tau_ik` given
    /// `tau_ij` and `tau_jk`.
    pub permutation: (u8, u8, u8),
    pub lower: f64,
    pub upper: f64,
    pub value: f64,
}

/// Outcome of the pairwise-tau compatibility check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Compatibility {
    /// The necessary condition holds for all permutations (this does not
    /// certify that a trivariate distribution exists).
    CompatibleNecessary,
    /// The inequality fails; no trivariate law has these pairwise taus.
    Incompatible(IncompatibilityWitness),
}

/// Necessary condition for three pairwise Kendall taus to be compatible
/// with some trivariate distribution:
/// `-1 + |tau_ij + tau_jk| <= tau_ik <= 1 - |tau_ij - tau_jk|`
/// for every permutation `(i, j, k)`. Returns the first violated
/// permutation, if any.
pub fn compatibility_check(tau12: f64, tau13: f64, tau23: f64) -> Result<Compatibility> {
    for (name, t) in [("tau12", tau12), ("tau13", tau13), ("tau23", tau23)] {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("{name} = {t} outside [-1, 1]")));
        }
    }
    // (i, j, k): tau_ik bounded via pivot j
    let checks = [
        ((1u8, 2u8, 3u8), tau12, tau23, tau13),
        ((2, 1, 3), tau12, tau13, tau23),
        ((1, 3, 2), tau13, tau23, tau12),
    ];
    for (perm, t_ij, t_jk, t_ik) in checks {
        let lower = -1.0 + (t_ij + t_jk).abs();
        let upper = 1.0 - (t_ij - t_jk).abs();
        if t_ik < lower || t_ik > upper {
            return Ok(Compatibility::Incompatible(IncompatibilityWitness {
                permutation: perm,
                lower,
                upper,
                value: t_ik,
            }));
        }
    }
    Ok(Compatibility::CompatibleNecessary)
}

/// Result of evaluating `3 tau - 2 rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauRhoBound {
    pub value: f64,
    /// True when the universal bound `-1 <= 3 tau - 2 rho <= 1` fails
    /// beyond tolerance.
    pub violated: bool,
}

const TAU_RHO_TOL: f64 = 1e-9;

/// Evaluate `3 tau - 2 rho_S` and flag violations of the universal bound.
pub fn tau_rho_bound_check(tau: f64, rho: f64) -> Result<TauRhoBound> {
    for (name, t) in [("tau", tau), ("rho", rho)] {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("{name} = {t} outside [-1, 1]")));
        }
    }
    let value = 3.0 * tau - 2.0 * rho;
    Ok(TauRhoBound {
        value,
        violated: value.abs() > 1.0 + TAU_RHO_TOL,
    })
}

/// Dependence estimates from paired data, as emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceReport {
    pub n: usize,
    pub pearson: f64,
    /// Large-sample null standard error of the Pearson estimate.
    pub pearson_se: f64,
    pub kendall_tau: f64,
    /// Null standard error of tau-a.
    pub kendall_tau_se: f64,
    pub spearman_rho: f64,
    /// Null standard error of the rank correlation.
    pub spearman_rho_se: f64,
    pub tau_rho_bound: TauRhoBound,
}

/// Compute all three sample measures plus the `3 tau - 2 rho` check.
pub fn dependence_report(pairs: &[(f64, f64)]) -> Result<DependenceReport> {
    let n = pairs.len();
    let pearson = pearson_sample(pairs)?;
    let kendall_tau = kendall_tau_sample(pairs)?;
    let spearman_rho = spearman_rho_sample(pairs)?;
    let nf = n as f64;
    Ok(DependenceReport {
        n,
        pearson,
        pearson_se: ((1.0 - pearson * pearson) / (nf - 2.0).max(1.0)).sqrt(),
        kendall_tau,
        kendall_tau_se: (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt(),
        spearman_rho,
        spearman_rho_se: 1.0 / (nf - 1.0).sqrt(),
        tau_rho_bound: tau_rho_bound_check(kendall_tau.clamp(-1.0, 1.0), spearman_rho.clamp(-1.0, 1.0))?,
    })
}
