//! Copula families, Fréchet–Hoeffding bounds, Sklar composition and
//! extraction, copula transforms, and numerical densities.
//!
//! An n-copula is the joint CDF of a vector of standard uniforms;
//! analytically, a grounded n-increasing function on the unit cube with
//! uniform margins. Every copula is squeezed between the Fréchet–Hoeffding
//! bounds `W_n <= C <= M_n`; `M_n` is the comonotonicity copula for all n,
//! while `W_n` is a copula only for n = 2 (the countermonotonicity copula),
//! so it is exposed here as a bound function, not as a family.

use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::numeric::bisect_nondecreasing;
use crate::rng::RandomStream;
use serde::{Deserialize, Serialize};

/// Surrogate for `u = 1` (or `x = +inf`) when marginalizing a joint CDF.
pub const TAIL_SURROGATE: f64 = 1.0 - 1e-12;

/// Default step for the mixed finite difference in
/// [`copula_density_numeric`].
pub const DEFAULT_DENSITY_STEP: f64 = 1e-4;

/// Checkerboard copula: uniform mass spread over a `k x k` grid.
///
/// Built from pseudo-observations by coarsening the n x n empirical
/// checkerboard onto a `k x k` grid with `k = ceil(sqrt(n))`, which keeps
/// the margins exactly uniform, so the result is a valid copula for any
/// input sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkerboard {
    k: usize,
    /// Row-major cell masses, `masses[i * k + j]` for x-cell i, y-cell j.
    masses: Vec<f64>,
    /// Cumulative masses for sampling.
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl Checkerboard {
    fn from_masses(k: usize, masses: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for &m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Checkerboard {
            k,
            masses,
            cumulative,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.k
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        let k = self.k as f64;
        let mut total = 0.0;
        for i in 0..self.k {
            let ox = (u * k - i as f64).clamp(0.0, 1.0);
            if ox == 0.0 {
                break;
            }
            for j in 0..self.k {
                let oy = (v * k - j as f64).clamp(0.0, 1.0);
                if oy == 0.0 {
                    break;
                }
                total += self.masses[i * self.k + j] * ox * oy;
            }
        }
        total
    }

    fn density(&self, u: f64, v: f64) -> f64 {
        let i = ((u * self.k as f64) as usize).min(self.k - 1);
        let j = ((v * self.k as f64) as usize).min(self.k - 1);
        self.masses[i * self.k + j] * (self.k * self.k) as f64
    }

    fn sample(&self, rng: &mut RandomStream) -> (f64, f64) {
        let target = rng.uniform();
        let cell = self.cumulative.partition_point(|&c| c <= target);
        let cell = cell.min(self.masses.len() - 1);
        let (i, j) = (cell / self.k, cell % self.k);
        let k = self.k as f64;
        (
            (i as f64 + rng.uniform_open()) / k,
            (j as f64 + rng.uniform_open()) / k,
        )
    }
}

/// An n-dimensional copula from one of the supported families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Copula {
    /// Product copula of independent uniforms.
    Independence { dim: usize },
    /// Upper Fréchet–Hoeffding copula `M_n(u) = min u_i` (perfect positive
    /// dependence).
    Comonotone { dim: usize },
    /// Lower Fréchet–Hoeffding copula `W_2(u, v) = max(u + v - 1, 0)`
    /// (perfect negative dependence; bivariate only).
    Countermonotone,
    /// Bivariate extreme-value copula
    /// `C(u, v) = u v exp(((-ln u)^-d + (-ln v)^-d)^(-1/d))`, `d > 0`.
    GumbelBev { delta: f64 },
    /// Convex mixture `lambda W_2 + (1 - lambda) M_2`.
    FrechetMixture { lambda: f64 },
    /// Data-driven checkerboard copula.
    EmpiricalCheckerboard(Checkerboard),
}

impl Copula {
    pub fn independence(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Copula::Independence { dim })
    }

    pub fn comonotone(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Copula::Comonotone { dim })
    }

    pub fn countermonotone() -> Self {
        Copula::Countermonotone
    }

    pub fn gumbel_bev(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::domain(format!(
                "gumbel-bev copula requires delta > 0, got {delta}"
            )));
        }
        Ok(Copula::GumbelBev { delta })
    }

    pub fn frechet_mixture(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!(
                "frechet mixture requires lambda in [0, 1], got {lambda}"
            )));
        }
        Ok(Copula::FrechetMixture { lambda })
    }

    /// Checkerboard copula of the pseudo-observations of `pairs`, on a
    /// `k x k` grid with `k = ceil(sqrt(n))`.
    pub fn empirical_checkerboard(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::ingestion("checkerboard copula needs data"));
        }
        if pairs.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::ingestion("checkerboard data must be finite"));
        }
        let n = pairs.len();
        let k = (n as f64).sqrt().ceil() as usize;
        let rx = ordinal_ranks(pairs.iter().map(|p| p.0));
        let ry = ordinal_ranks(pairs.iter().map(|p| p.1));
        let mut masses = vec![0.0; k * k];
        for t in 0..n {
            // Observation t occupies [(r-1)/n, r/n] per axis with mass 1/n;
            // split that mass over the k-grid cells it overlaps.
            for (i, fx) in band_overlaps(rx[t], n, k) {
                for (j, fy) in band_overlaps(ry[t], n, k) {
                    masses[i * k + j] += fx * fy / n as f64;
                }
            }
        }
        Ok(Copula::EmpiricalCheckerboard(Checkerboard::from_masses(
            k, masses,
        )))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Copula::Independence { dim } | Copula::Comonotone { dim } => *dim,
            Copula::Countermonotone
            | Copula::GumbelBev { .. }
            | Copula::FrechetMixture { .. }
            | Copula::EmpiricalCheckerboard(_) => 2,
        }
    }

    /// Evaluate `C(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        Ok(match self {
            Copula::Independence { .. } => u.iter().product(),
            Copula::Comonotone { .. } => u.iter().copied().fold(f64::INFINITY, f64::min),
            Copula::Countermonotone => (u[0] + u[1] - 1.0).max(0.0),
            Copula::GumbelBev { delta } => gumbel_bev_cdf(*delta, u[0], u[1]),
            Copula::FrechetMixture { lambda } => {
                lambda * (u[0] + u[1] - 1.0).max(0.0) + (1.0 - lambda) * u[0].min(u[1])
            }
            Copula::EmpiricalCheckerboard(cb) => cb.cdf(u[0], u[1]),
        })
    }

    /// Bivariate convenience for [`Copula::eval`].
    pub fn eval2(&self, u: f64, v: f64) -> Result<f64> {
        self.eval(&[u, v])
    }

    /// C-volume of the rectangle `[a1, b1] x [a2, b2]` (bivariate only).
    pub fn rect_volume(&self, a: (f64, f64), b: (f64, f64)) -> Result<f64> {
        self.check_bivariate()?;
        Ok(self.eval2(b.0, b.1)? - self.eval2(a.0, b.1)? - self.eval2(b.0, a.1)?
            + self.eval2(a.0, a.1)?)
    }

    /// Closed-form copula density where the family is absolutely
    /// continuous (bivariate only); singular families are rejected.
    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        self.check_bivariate()?;
        if !(0.0 < u && u < 1.0 && 0.0 < v && v < 1.0) {
            return Err(Error::domain(format!(
                "density needs an interior point, got ({u}, {v})"
            )));
        }
        match self {
            Copula::Independence { .. } => Ok(1.0),
            Copula::GumbelBev { delta } => Ok(gumbel_bev_density(*delta, u, v)),
            Copula::EmpiricalCheckerboard(cb) => Ok(cb.density(u, v)),
            Copula::Comonotone { .. }
            | Copula::Countermonotone
            | Copula::FrechetMixture { .. } => Err(Error::SingularFamily),
        }
    }

    /// Draw one point from the copula.
    ///
    /// The Gumbel extreme-value family samples by conditional inversion:
    /// `U` uniform, then `V` solving `dC/du (U, V) = T` by bisection on the
    /// numerically differenced partial derivative.
    pub fn sample(&self, rng: &mut RandomStream) -> Vec<f64> {
        match self {
            Copula::Independence { dim } => (0..*dim).map(|_| rng.uniform_open()).collect(),
            Copula::Comonotone { dim } => vec![rng.uniform_open(); *dim],
            Copula::Countermonotone => {
                let u = rng.uniform_open();
                vec![u, 1.0 - u]
            }
            Copula::GumbelBev { .. } => {
                let u = rng.uniform_open();
                let t = rng.uniform_open();
                let v = self.conditional_quantile(u, t);
                vec![u, v]
            }
            Copula::FrechetMixture { lambda } => {
                let u = rng.uniform_open();
                if rng.bernoulli(*lambda) {
                    vec![u, 1.0 - u]
                } else {
                    vec![u, u]
                }
            }
            Copula::EmpiricalCheckerboard(cb) => {
                let (u, v) = cb.sample(rng);
                vec![u, v]
            }
        }
    }

    /// Bivariate convenience for [`Copula::sample`].
    pub fn sample2(&self, rng: &mut RandomStream) -> Result<(f64, f64)> {
        self.check_bivariate()?;
        let p = self.sample(rng);
        Ok((p[0], p[1]))
    }

    /// Solve `dC/du (u, v) = t` for `v` on the numerically differenced
    /// partial derivative.
    fn conditional_quantile(&self, u: f64, t: f64) -> f64 {
        let e = (0.5 * u.min(1.0 - u)).min(1e-6);
        let h = |v: f64| {
            let hi = self.eval2(u + e, v).expect("interior point");
            let lo = self.eval2(u - e, v).expect("interior point");
            (hi - lo) / (2.0 * e)
        };
        bisect_nondecreasing(h, 1e-15, 1.0 - 1e-15, t, 1e-9)
    }

    fn check_bivariate(&self) -> Result<()> {
        if self.dimension() != 2 {
            return Err(Error::UnsupportedDimension {
                required: 2,
                got: self.dimension(),
            });
        }
        Ok(())
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: u.len(),
            });
        }
        for &c in u {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::domain(format!(
                    "copula argument {c} lies outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::domain(format!(
            "copula dimension must be >= 2, got {dim}"
        )));
    }
    Ok(())
}

fn ordinal_ranks(values: impl Iterator<Item = f64>) -> Vec<usize> {
    let vals: Vec<f64> = values.collect();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite values"));
    let mut ranks = vec![0usize; vals.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

/// Overlap fractions of the rank band `[(r-1)/n, r/n]` with the k-grid
/// cells `[i/k, (i+1)/k]`; fractions sum to 1 over the returned cells.
fn band_overlaps(r: usize, n: usize, k: usize) -> Vec<(usize, f64)> {
    let lo = (r - 1) as f64 / n as f64;
    let hi = r as f64 / n as f64;
    let i_lo = ((lo * k as f64).floor() as usize).min(k - 1);
    let i_hi = ((hi * k as f64).ceil() as usize).clamp(1, k) - 1;
    (i_lo..=i_hi)
        .filter_map(|i| {
            let cell_lo = i as f64 / k as f64;
            let cell_hi = (i + 1) as f64 / k as f64;
            let overlap = (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0);
            (overlap > 0.0).then_some((i, overlap * n as f64))
        })
        .collect()
}

/// `C(u, v)` for the bivariate extreme-value family, with the boundary
/// handled as an explicit limit branch: `(-ln 1)^-d` is treated as +inf so
/// `C(u, 1) = u` and `C(1, v) = v` exactly.
fn gumbel_bev_cdf(delta: f64, u: f64, v: f64) -> f64 {
    if u == 0.0 || v == 0.0 {
        return 0.0;
    }
    if u == 1.0 {
        return v;
    }
    if v == 1.0 {
        return u;
    }
    let a = (-u.ln()).powf(-delta);
    let b = (-v.ln()).powf(-delta);
    u * v * ((a + b).powf(-1.0 / delta)).exp()
}

/// Closed-form density of the bivariate extreme-value family on the open
/// square.
fn gumbel_bev_density(delta: f64, u: f64, v: f64) -> f64 {
    let x = -u.ln();
    let y = -v.ln();
    let s = x.powf(-delta) + y.powf(-delta);
    let g = s.powf(-1.0 / delta);
    let gx = s.powf(-1.0 / delta - 1.0) * x.powf(-delta - 1.0);
    let gy = s.powf(-1.0 / delta - 1.0) * y.powf(-delta - 1.0);
    let gxy = (1.0 + delta) * s.powf(-1.0 / delta - 2.0) * (x * y).powf(-delta - 1.0);
    g.exp() * ((1.0 - gx) * (1.0 - gy) + gxy)
}

/// Upper Fréchet–Hoeffding bound `M_n(u) = min_i u_i`.
pub fn frechet_upper(u: &[f64]) -> f64 {
    u.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lower Fréchet–Hoeffding bound `W_n(u) = max(sum u_i - (n - 1), 0)`.
///
/// A copula only for n = 2; for n >= 3 it is still the best pointwise
/// lower bound, so it is exposed as a function rather than a family.
pub fn frechet_lower(u: &[f64]) -> f64 {
    (u.iter().sum::<f64>() - (u.len() as f64 - 1.0)).max(0.0)
}

/// Distance of `C(u)` from the Fréchet–Hoeffding bounds:
/// `(C(u) - W_n(u), M_n(u) - C(u))`, both nonnegative for any copula.
pub fn frechet_bound_gap(c: &Copula, u: &[f64]) -> Result<(f64, f64)> {
    let value = c.eval(u)?;
    Ok((value - frechet_lower(u), frechet_upper(u) - value))
}

/// Values of the standard bivariate copula transforms at `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CopulaTransforms {
    /// Survival copula `C(1-u, 1-v) + u + v - 1`.
    pub survival: f64,
    /// Dual `u + v - C(u, v)`; the probability `P(X <= x or Y <= y)` at
    /// `u = F_X(x)`, `v = F_Y(y)`.
    pub dual: f64,
    /// Co-copula `1 - C(1-u, 1-v)`.
    pub co_copula: f64,
    /// Diagonal section `C(u, u)` at the first argument.
    pub diagonal: f64,
}

/// Evaluate survival / dual / co-copula / diagonal at `(u, v)` (bivariate
/// copulas only).
pub fn copula_transforms(c: &Copula, u: f64, v: f64) -> Result<CopulaTransforms> {
    if c.dimension() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            got: c.dimension(),
        });
    }
    let at = c.eval2(u, v)?;
    let flipped = c.eval2(1.0 - u, 1.0 - v)?;
    Ok(CopulaTransforms {
        survival: flipped + u + v - 1.0,
        dual: u + v - at,
        co_copula: 1.0 - flipped,
        diagonal: c.eval2(u, u)?,
    })
}

/// Numerical copula density by the mixed central finite difference
/// `[C(u+h, v+h) - C(u+h, v-h) - C(u-h, v+h) + C(u-h, v-h)] / (4 h^2)`.
///
/// Families with a singular component (comonotone, countermonotone, and
/// their mixtures) are rejected: the density does not exist there.
pub fn copula_density_numeric(c: &Copula, u: f64, v: f64, h: f64) -> Result<f64> {
    if c.dimension() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            got: c.dimension(),
        });
    }
    if matches!(
        c,
        Copula::Comonotone { .. } | Copula::Countermonotone | Copula::FrechetMixture { .. }
    ) {
        return Err(Error::SingularFamily);
    }
    if h <= 0.0 {
        return Err(Error::domain(format!("step must be positive, got {h}")));
    }
    let margin = 2.0 * h;
    if u < margin || u > 1.0 - margin || v < margin || v > 1.0 - margin {
        return Err(Error::domain(format!(
            "density point ({u}, {v}) is within 2h = {margin} of the boundary"
        )));
    }
    Ok(
        (c.eval2(u + h, v + h)? - c.eval2(u + h, v - h)? - c.eval2(u - h, v + h)?
            + c.eval2(u - h, v - h)?)
            / (4.0 * h * h),
    )
}

/// Sign of the partial derivative of the comonotonicity copula `M_n` with
/// respect to one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComonotonePartial {
    /// `u_k < min` of the other coordinates: derivative 1.
    One,
    /// `u_k > min` of the other coordinates: derivative 0.
    Zero,
    /// Exact tie: the derivative is discontinuous here.
    UndefinedAtTie,
}

/// Partial derivative of `M_n` at an interior point: 1 below the minimum of
/// the other coordinates, 0 above it, undefined at a tie. The tie locus is
/// where the singular component of `M_n` lives.
pub fn m_partial_discontinuity(u: &[f64], k: usize) -> Result<ComonotonePartial> {
    if u.len() < 2 {
        return Err(Error::domain("need at least two coordinates"));
    }
    if k >= u.len() {
        return Err(Error::domain(format!(
            "coordinate index {k} out of range for dimension {}",
            u.len()
        )));
    }
    if u.iter().any(|&c| !(0.0 < c && c < 1.0)) {
        return Err(Error::domain("point must be interior to the unit cube"));
    }
    let other_min = u
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, &c)| c)
        .fold(f64::INFINITY, f64::min);
    Ok(if u[k] < other_min {
        ComonotonePartial::One
    } else if u[k] > other_min {
        ComonotonePartial::Zero
    } else {
        ComonotonePartial::UndefinedAtTie
    })
}

/// A joint distribution assembled from a copula and margins:
/// `F(x_1, ..., x_n) = C(F_1(x_1), ..., F_n(x_n))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SklarJoint {
    copula: Copula,
    margins: Vec<Margin>,
}

impl SklarJoint {
    pub fn new(copula: Copula, margins: Vec<Margin>) -> Result<Self> {
        if margins.len() != copula.dimension() {
            return Err(Error::DimensionMismatch {
                expected: copula.dimension(),
                got: margins.len(),
            });
        }
        Ok(SklarJoint { copula, margins })
    }

    pub fn copula(&self) -> &Copula {
        &self.copula
    }

    pub fn margins(&self) -> &[Margin] {
        &self.margins
    }

    /// Joint CDF at `x`.
    pub fn cdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.margins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.margins.len(),
                got: x.len(),
            });
        }
        let u: Vec<f64> = self
            .margins
            .iter()
            .zip(x)
            .map(|(m, &xi)| m.cdf(xi))
            .collect::<Result<_>>()?;
        self.copula.eval(&u)
    }

    /// Margin `i` recovered from the joint by pushing every other argument
    /// to its upper tail surrogate (`u = 1 - 1e-12`).
    pub fn margin_cdf(&self, i: usize, x: f64) -> Result<f64> {
        if i >= self.margins.len() {
            return Err(Error::domain(format!("margin index {i} out of range")));
        }
        let mut u: Vec<f64> = Vec::with_capacity(self.margins.len());
        for (j, m) in self.margins.iter().enumerate() {
            u.push(if j == i { m.cdf(x)? } else { TAIL_SURROGATE });
        }
        self.copula.eval(&u)
    }
}

/// Recover `C(u) = F(Q_1(u_1), ..., Q_n(u_n))` from a joint CDF and its
/// continuous margins (Sklar's theorem, extraction direction).
///
/// Boundary coordinates are handled by the limit convention: any `u_i = 0`
/// gives 0, and `u_i = 1` is replaced by the tail surrogate.
pub fn sklar_extract<F>(joint: F, margins: &[Margin], u: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if u.len() != margins.len() {
        return Err(Error::DimensionMismatch {
            expected: margins.len(),
            got: u.len(),
        });
    }
    if let Some(m) = margins.iter().find(|m| !m.is_continuous()) {
        return Err(Error::domain(format!(
            "sklar extraction needs continuous margins for uniqueness, got {m:?}"
        )));
    }
    let mut x = Vec::with_capacity(u.len());
    for (m, &ui) in margins.iter().zip(u) {
        if !(0.0..=1.0).contains(&ui) {
            return Err(Error::domain(format!("coordinate {ui} outside [0, 1]")));
        }
        if ui == 0.0 {
            return Ok(0.0);
        }
        let ui = if ui == 1.0 { TAIL_SURROGATE } else { ui };
        x.push(m.quantile(ui)?);
    }
    joint(&x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independence_eval() {
        let c = Copula::independence(2).unwrap();
        assert!((c.eval(&[0.7, 0.5]).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn frechet_bound_functions() {
        let u = [0.5, 0.5, 0.5];
        assert_eq!(frechet_lower(&u), 0.0);
        assert_eq!(frechet_upper(&u), 0.5);
        assert!((frechet_lower(&[0.9, 0.8, 0.7]) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn gumbel_bev_diagonal_closed_form() {
        // C(u, u) = u^(2 - 2^(-1/delta)); at delta = 1, u = e^-1 this is e^-1.5
        let c = Copula::gumbel_bev(1.0).unwrap();
        let u = (-1.0f64).exp();
        let got = c.eval(&[u, u]).unwrap();
        assert!((got - (-1.5f64).exp()).abs() < 1e-12);
        for &(delta, u) in &[(0.5, 0.3), (1.0, 0.8), (3.0, 0.12)] {
            let c = Copula::gumbel_bev(delta).unwrap();
            let expected = u.powf(2.0 - 2f64.powf(-1.0 / delta));
            assert!((c.eval(&[u, u]).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gumbel_bev_boundary_branches() {
        let c = Copula::gumbel_bev(2.0).unwrap();
        assert_eq!(c.eval(&[0.0, 0.4]).unwrap(), 0.0);
        assert_eq!(c.eval(&[1.0, 0.4]).unwrap(), 0.4);
        assert_eq!(c.eval(&[0.7, 1.0]).unwrap(), 0.7);
        assert_eq!(c.eval(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn eval_rejects_bad_input() {
        let c = Copula::independence(2).unwrap();
        assert!(matches!(
            c.eval(&[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(c.eval(&[0.5, 1.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn bound_gap_examples() {
        let m2 = Copula::comonotone(2).unwrap();
        let w2 = Copula::countermonotone();
        let pi = Copula::independence(2).unwrap();
        let (_, upper) = frechet_bound_gap(&m2, &[0.3, 0.8]).unwrap();
        assert_eq!(upper, 0.0);
        let (lower, _) = frechet_bound_gap(&w2, &[0.3, 0.8]).unwrap();
        assert_eq!(lower, 0.0);
        let (lo, hi) = frechet_bound_gap(&pi, &[0.5, 0.5]).unwrap();
        assert!((lo - 0.25).abs() < 1e-15);
        assert!((hi - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mixture_endpoints() {
        let w = Copula::frechet_mixture(1.0).unwrap();
        let m = Copula::frechet_mixture(0.0).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let (u, v) = (i as f64 / 19.0, j as f64 / 19.0);
                assert_eq!(w.eval(&[u, v]).unwrap(), (u + v - 1.0).max(0.0));
                assert_eq!(m.eval(&[u, v]).unwrap(), u.min(v));
            }
        }
    }

    #[test]
    fn transforms_examples() {
        let pi = Copula::independence(2).unwrap();
        for &(u, v) in &[(0.2, 0.9), (0.5, 0.5), (0.77, 0.31)] {
            let t = copula_transforms(&pi, u, v).unwrap();
            // independence is its own survival copula
            assert!((t.survival - u * v).abs() < 1e-12);
        }
        let t = copula_transforms(&pi, 0.5, 0.5).unwrap();
        assert!((t.dual - 0.75).abs() < 1e-15);
        assert!((t.co_copula - 0.75).abs() < 1e-15);

        let m2 = Copula::comonotone(2).unwrap();
        for i in 0..10 {
            let u = i as f64 / 9.0;
            assert_eq!(copula_transforms(&m2, u, 0.3).unwrap().diagonal, u);
        }
    }

    #[test]
    fn survival_is_an_involution() {
        let c = Copula::gumbel_bev(1.3).unwrap();
        let survival = |u: f64, v: f64| copula_transforms(&c, u, v).map(|t| t.survival);
        for i in 1..10 {
            for j in 1..10 {
                let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                let twice = survival(1.0 - u, 1.0 - v).unwrap() + u + v - 1.0;
                assert!((twice - c.eval2(u, v).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transforms_need_dimension_two() {
        let c = Copula::independence(3).unwrap();
        assert!(matches!(
            copula_transforms(&c, 0.5, 0.5),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn numeric_density_independence() {
        let pi = Copula::independence(2).unwrap();
        for &(u, v) in &[(0.3, 0.3), (0.5, 0.9), (0.8, 0.2)] {
            let d = copula_density_numeric(&pi, u, v, DEFAULT_DENSITY_STEP).unwrap();
            assert!((d - 1.0).abs() < 1e-4, "density {d} at ({u}, {v})");
        }
    }

    #[test]
    fn numeric_density_matches_two_step_oracle() {
        // oracle: same mixed difference at a distinct, finer step
        let c = Copula::gumbel_bev(1.0).unwrap();
        let coarse = copula_density_numeric(&c, 0.5, 0.5, 1e-4).unwrap();
        let fine = copula_density_numeric(&c, 0.5, 0.5, 1e-5).unwrap();
        assert!((coarse - fine).abs() / fine.abs() < 1e-3);
    }

    #[test]
    fn closed_form_density_matches_finite_difference() {
        for &delta in &[0.5, 1.0, 2.5] {
            let c = Copula::gumbel_bev(delta).unwrap();
            for &(u, v) in &[(0.2, 0.7), (0.5, 0.5), (0.85, 0.3)] {
                let exact = c.density(u, v).unwrap();
                let fd = copula_density_numeric(&c, u, v, 1e-5).unwrap();
                assert!(
                    (exact - fd).abs() / exact < 1e-4,
                    "delta {delta} at ({u}, {v}): exact {exact}, fd {fd}"
                );
            }
        }
    }

    #[test]
    fn singular_families_have_no_density() {
        let m2 = Copula::comonotone(2).unwrap();
        assert!(matches!(
            copula_density_numeric(&m2, 0.5, 0.5, 1e-4),
            Err(Error::SingularFamily)
        ));
        assert!(matches!(m2.density(0.5, 0.5), Err(Error::SingularFamily)));
        let mix = Copula::frechet_mixture(0.4).unwrap();
        assert!(matches!(
            copula_density_numeric(&mix, 0.5, 0.5, 1e-4),
            Err(Error::SingularFamily)
        ));
    }

    #[test]
    fn comonotone_partial_cases() {
        assert_eq!(
            m_partial_discontinuity(&[0.3, 0.7], 0).unwrap(),
            ComonotonePartial::One
        );
        assert_eq!(
            m_partial_discontinuity(&[0.7, 0.3], 0).unwrap(),
            ComonotonePartial::Zero
        );
        assert_eq!(
            m_partial_discontinuity(&[0.5, 0.5], 0).unwrap(),
            ComonotonePartial::UndefinedAtTie
        );
        assert_eq!(
            m_partial_discontinuity(&[0.2, 0.6, 0.4], 2).unwrap(),
            ComonotonePartial::Zero
        );
    }

    #[test]
    fn sklar_join_examples() {
        // product copula with two standard Gumbel margins at the origin
        let joint = SklarJoint::new(
            Copula::independence(2).unwrap(),
            vec![Margin::gumbel_std(), Margin::gumbel_std()],
        )
        .unwrap();
        assert!((joint.cdf(&[0.0, 0.0]).unwrap() - (-2.0f64).exp()).abs() < 1e-12);

        // comonotone with identical margins: F(t) on the diagonal
        let m = Margin::exponential(1.3).unwrap();
        let joint =
            SklarJoint::new(Copula::comonotone(2).unwrap(), vec![m.clone(), m.clone()]).unwrap();
        for &t in &[0.1, 0.5, 2.0] {
            assert!((joint.cdf(&[t, t]).unwrap() - m.cdf(t).unwrap()).abs() < 1e-15);
        }

        // extreme-value copula with Gumbel margins at the origin
        let joint = SklarJoint::new(
            Copula::gumbel_bev(1.0).unwrap(),
            vec![Margin::gumbel_std(), Margin::gumbel_std()],
        )
        .unwrap();
        assert!((joint.cdf(&[0.0, 0.0]).unwrap() - (-1.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn sklar_margin_recovery() {
        let joint = SklarJoint::new(
            Copula::gumbel_bev(2.0).unwrap(),
            vec![
                Margin::exponential(1.0).unwrap(),
                Margin::uniform(0.0, 2.0).unwrap(),
            ],
        )
        .unwrap();
        for i in 1..20 {
            let x = i as f64 / 5.0;
            let direct = joint.margins()[0].cdf(x).unwrap();
            let recovered = joint.margin_cdf(0, x).unwrap();
            assert!((direct - recovered).abs() < 1e-9);
        }
    }

    #[test]
    fn sklar_extract_round_trips() {
        let margins = vec![Margin::exponential(0.8).unwrap(), Margin::gumbel_std()];
        for copula in [
            Copula::independence(2).unwrap(),
            Copula::comonotone(2).unwrap(),
            Copula::gumbel_bev(1.7).unwrap(),
        ] {
            let joint = SklarJoint::new(copula.clone(), margins.clone()).unwrap();
            for i in 1..10 {
                for j in 1..10 {
                    let u = [i as f64 / 10.0, j as f64 / 10.0];
                    let got = sklar_extract(|x| joint.cdf(x), &margins, &u).unwrap();
                    assert!(
                        (got - copula.eval(&u).unwrap()).abs() < 1e-9,
                        "round trip failed for {copula:?} at {u:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn sklar_extract_rejects_discrete_margins() {
        let margins = vec![
            Margin::bernoulli(0.5).unwrap(),
            Margin::uniform(0.0, 1.0).unwrap(),
        ];
        let r = sklar_extract(|_| Ok(0.0), &margins, &[0.5, 0.5]);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn checkerboard_is_grounded_with_uniform_margins() {
        let mut rng = RandomStream::from_seed(101);
        let pairs: Vec<(f64, f64)> = (0..150)
            .map(|_| {
                let u = rng.uniform_open();
                (u + 0.1 * rng.uniform_open(), u * u)
            })
            .collect();
        let c = Copula::empirical_checkerboard(&pairs).unwrap();
        for i in 0..=20 {
            let u = i as f64 / 20.0;
            assert_eq!(c.eval(&[0.0, u]).unwrap(), 0.0);
            assert_eq!(c.eval(&[u, 0.0]).unwrap(), 0.0);
            assert!((c.eval(&[u, 1.0]).unwrap() - u).abs() < 1e-12);
            assert!((c.eval(&[1.0, u]).unwrap() - u).abs() < 1e-12);
        }
    }

    #[test]
    fn checkerboard_masses_sum_to_one() {
        let pairs: Vec<(f64, f64)> = (0..37).map(|i| (i as f64, (i * i % 11) as f64)).collect();
        match Copula::empirical_checkerboard(&pairs).unwrap() {
            Copula::EmpiricalCheckerboard(cb) => {
                let total: f64 = cb.masses().iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert_eq!(cb.grid_size(), 7);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn samplers_are_deterministic() {
        for c in [
            Copula::independence(2).unwrap(),
            Copula::comonotone(2).unwrap(),
            Copula::countermonotone(),
            Copula::gumbel_bev(1.5).unwrap(),
            Copula::frechet_mixture(0.3).unwrap(),
        ] {
            let a = c.sample(&mut RandomStream::from_seed(5));
            let b = c.sample(&mut RandomStream::from_seed(5));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn countermonotone_sampler_is_antithetic() {
        let c = Copula::countermonotone();
        let mut rng = RandomStream::from_seed(8);
        for _ in 0..100 {
            let p = c.sample(&mut rng);
            assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
        }
    }
}
