//! Univariate margins: CDF, quantile function, sampling, moments.
//!
//! The quantile function is the generalized inverse
//! `Q(u) = inf { x : F(x) >= u }`, which satisfies the Galois inequality
//! `Q(u) <= x  <=>  F(x) >= u`. For empirical margins both `F` and `Q` are
//! computed with the same counting arithmetic so the equivalence holds
//! exactly, not just up to rounding.

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use serde::{Deserialize, Serialize};

/// Euler–Mascheroni constant (mean of the standard Gumbel distribution).
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A univariate distribution, parametric or empirical.
///
/// Margins are immutable once constructed and cheap to clone; the empirical
/// variant stores its sample sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Margin {
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Exponential with the given rate (mean `1/rate`).
    Exponential { rate: f64 },
    /// Lognormal: `ln X ~ N(mu, sigma^2)`.
    Lognormal { mu: f64, sigma: f64 },
    /// Standard Gumbel, `F(x) = exp(-e^{-x})`.
    GumbelStd,
    /// Bernoulli with success probability `p`.
    Bernoulli { p: f64 },
    /// Empirical distribution of a finite sample (stored sorted).
    Empirical { sample: Vec<f64> },
}

impl Margin {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::domain(format!(
                "uniform margin requires finite a < b, got a = {a}, b = {b}"
            )));
        }
        Ok(Margin::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::domain(format!(
                "exponential margin requires rate > 0, got {rate}"
            )));
        }
        Ok(Margin::Exponential { rate })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::domain(format!(
                "lognormal margin requires finite mu and sigma > 0, got mu = {mu}, sigma = {sigma}"
            )));
        }
        Ok(Margin::Lognormal { mu, sigma })
    }

    pub fn gumbel_std() -> Self {
        Margin::GumbelStd
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!(
                "bernoulli margin requires p in [0, 1], got {p}"
            )));
        }
        Ok(Margin::Bernoulli { p })
    }

    /// Build an empirical margin from raw observations.
    pub fn empirical_from_sample(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::ingestion("empirical margin needs a nonempty sample"));
        }
        if let Some(bad) = xs.iter().find(|x| !x.is_finite()) {
            return Err(Error::ingestion(format!(
                "empirical margin sample contains non-finite value {bad}"
            )));
        }
        let mut sample = xs.to_vec();
        sample.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        Ok(Margin::Empirical { sample })
    }

    /// Distribution function `F(x) = P(X <= x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("cdf argument must be finite, got {x}")));
        }
        Ok(match self {
            Margin::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Margin::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Margin::Lognormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Margin::GumbelStd => (-(-x).exp()).exp(),
            Margin::Bernoulli { p } => {
                if x < 0.0 {
                    0.0
                } else if x < 1.0 {
                    1.0 - p
                } else {
                    1.0
                }
            }
            Margin::Empirical { sample } => {
                let count = sample.partition_point(|&s| s <= x);
                count as f64 / sample.len() as f64
            }
        })
    }

    /// Quantile function `Q(u) = inf { x : F(x) >= u }`.
    ///
    /// At `u = 0` (resp. `u = 1`) returns the essential infimum (supremum)
    /// of the distribution when finite and fails with
    /// [`Error::InfiniteQuantile`] otherwise; there is no sentinel value.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::domain(format!(
                "quantile argument must lie in [0, 1], got {u}"
            )));
        }
        if u == 0.0 {
            return self
                .essential_infimum()
                .ok_or(Error::InfiniteQuantile { u });
        }
        if u == 1.0 {
            return self
                .essential_supremum()
                .ok_or(Error::InfiniteQuantile { u });
        }
        Ok(match self {
            Margin::Uniform { a, b } => a + u * (b - a),
            Margin::Exponential { rate } => -(-u).ln_1p() / rate,
            Margin::Lognormal { mu, sigma } => (mu + sigma * std_normal_quantile(u)).exp(),
            Margin::GumbelStd => -(-u.ln()).ln(),
            Margin::Bernoulli { p } => {
                if u <= 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            Margin::Empirical { sample } => {
                let n = sample.len();
                // Smallest k with k/n >= u, in the same f64 arithmetic the
                // cdf uses, so the Galois inequality holds exactly.
                let mut k = ((u * n as f64).ceil() as usize).clamp(1, n);
                while k > 1 && (k - 1) as f64 / n as f64 >= u {
                    k -= 1;
                }
                while k < n && (k as f64 / n as f64) < u {
                    k += 1;
                }
                sample[k - 1]
            }
        })
    }

    /// Density, for the absolutely continuous parametric families.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("pdf argument must be finite, got {x}")));
        }
        match self {
            Margin::Uniform { a, b } => Ok(if x < *a || x > *b { 0.0 } else { 1.0 / (b - a) }),
            Margin::Exponential { rate } => Ok(if x < 0.0 { 0.0 } else { rate * (-rate * x).exp() }),
            Margin::Lognormal { mu, sigma } => Ok(if x <= 0.0 {
                0.0
            } else {
                let z = (x.ln() - mu) / sigma;
                std_normal_pdf(z) / (sigma * x)
            }),
            Margin::GumbelStd => Ok((-x - (-x).exp()).exp()),
            Margin::Bernoulli { .. } | Margin::Empirical { .. } => Err(Error::Capability(
                "margin has no density (discrete or empirical family)".into(),
            )),
        }
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> f64 {
        match self {
            Margin::Uniform { a, b } => 0.5 * (a + b),
            Margin::Exponential { rate } => 1.0 / rate,
            Margin::Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Margin::GumbelStd => EULER_GAMMA,
            Margin::Bernoulli { p } => *p,
            Margin::Empirical { sample } => sample.iter().sum::<f64>() / sample.len() as f64,
        }
    }

    /// Variance of the distribution (population variance for empirical
    /// margins, which are laws in their own right).
    pub fn variance(&self) -> f64 {
        match self {
            Margin::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Margin::Exponential { rate } => 1.0 / (rate * rate),
            Margin::Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu + s2).exp()
            }
            Margin::GumbelStd => std::f64::consts::PI.powi(2) / 6.0,
            Margin::Bernoulli { p } => p * (1.0 - p),
            Margin::Empirical { sample } => {
                let mean = self.mean();
                sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / sample.len() as f64
            }
        }
    }

    /// Standard deviation.
    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `n` independent draws by inverse-transform sampling; deterministic
    /// given the stream state.
    pub fn sample(&self, rng: &mut RandomStream, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok((0..n).map(|_| self.sample_one(rng)).collect())
    }

    /// One draw `Q(U)` with `U` uniform on the open unit interval.
    pub fn sample_one(&self, rng: &mut RandomStream) -> f64 {
        let u = rng.uniform_open();
        self.quantile(u).expect("quantile is finite on (0, 1)")
    }

    /// Largest lower bound of the support, when finite.
    pub fn essential_infimum(&self) -> Option<f64> {
        match self {
            Margin::Uniform { a, .. } => Some(*a),
            Margin::Exponential { .. } | Margin::Lognormal { .. } => Some(0.0),
            Margin::GumbelStd => None,
            Margin::Bernoulli { p } => Some(if *p < 1.0 { 0.0 } else { 1.0 }),
            Margin::Empirical { sample } => Some(sample[0]),
        }
    }

    /// Least upper bound of the support, when finite.
    pub fn essential_supremum(&self) -> Option<f64> {
        match self {
            Margin::Uniform { b, .. } => Some(*b),
            Margin::Exponential { .. } | Margin::Lognormal { .. } | Margin::GumbelStd => None,
            Margin::Bernoulli { p } => Some(if *p > 0.0 { 1.0 } else { 0.0 }),
            Margin::Empirical { sample } => Some(*sample.last().expect("nonempty")),
        }
    }

    /// Atoms of the distribution (empty for continuous families); used when
    /// building evaluation grids.
    pub fn atoms(&self) -> Vec<f64> {
        match self {
            Margin::Bernoulli { .. } => vec![0.0, 1.0],
            Margin::Empirical { sample } => {
                let mut atoms = sample.clone();
                atoms.dedup();
                atoms
            }
            _ => Vec::new(),
        }
    }

    /// True for families whose CDF is continuous and strictly increasing on
    /// its support (every parametric family here except Bernoulli).
    pub fn is_continuous(&self) -> bool {
        !matches!(self, Margin::Bernoulli { .. } | Margin::Empirical { .. })
    }
}

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, polished with two Newton steps so that
/// `cdf(quantile(u))` round-trips to ~1e-15.
pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    let mut z = -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
    for _ in 0..2 {
        let err = std_normal_cdf(z) - p;
        let d = std_normal_pdf(z);
        if d > 0.0 {
            z -= err / d;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn exponential_cdf_closed_form() {
        let m = Margin::exponential(1.0).unwrap();
        assert!((m.cdf(LN_2).unwrap() - 0.5).abs() < 1e-12);
        assert!((m.cdf(0.6931).unwrap() - (1.0 - (-0.6931f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn cdf_limits() {
        for m in [
            Margin::uniform(0.0, 1.0).unwrap(),
            Margin::exponential(2.0).unwrap(),
            Margin::lognormal(0.0, 1.0).unwrap(),
            Margin::gumbel_std(),
            Margin::bernoulli(0.4).unwrap(),
            Margin::empirical_from_sample(&[1.0, 2.0]).unwrap(),
        ] {
            assert_eq!(m.cdf(-1e300).unwrap(), 0.0);
            assert_eq!(m.cdf(1e300).unwrap(), 1.0);
        }
    }

    #[test]
    fn cdf_rejects_non_finite() {
        let m = Margin::uniform(0.0, 1.0).unwrap();
        assert!(matches!(m.cdf(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(m.cdf(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn empirical_counting() {
        let m = Margin::empirical_from_sample(&[3.0, 1.0, 2.0]).unwrap();
        assert!((m.cdf(2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let single = Margin::empirical_from_sample(&[5.0]).unwrap();
        assert_eq!(single.cdf(4.9).unwrap(), 0.0);
        assert_eq!(single.cdf(5.0).unwrap(), 1.0);
        let tied = Margin::empirical_from_sample(&[1.0, 1.0, 2.0]).unwrap();
        assert!((tied.cdf(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quantile_closed_forms() {
        let u01 = Margin::uniform(0.0, 1.0).unwrap();
        assert!((u01.quantile(0.25).unwrap() - 0.25).abs() < 1e-15);
        let e1 = Margin::exponential(1.0).unwrap();
        assert!((e1.quantile(0.5).unwrap() - LN_2).abs() < 1e-12);
        let emp = Margin::empirical_from_sample(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(emp.quantile(0.5).unwrap(), 2.0);
    }

    #[test]
    fn empirical_quantile_matches_inf_definition() {
        // brute-force oracle: scan candidate xs for the smallest with F(x) >= u
        let xs = [1.5, 2.5, 2.5, 4.0, 7.0];
        let m = Margin::empirical_from_sample(&xs).unwrap();
        for u in [0.05, 0.2, 0.4, 0.4000000001, 0.6, 0.799, 0.8, 0.9999, 1.0] {
            let oracle = xs
                .iter()
                .copied()
                .find(|&x| m.cdf(x).unwrap() >= u)
                .unwrap();
            assert_eq!(m.quantile(u).unwrap(), oracle, "u = {u}");
        }
    }

    #[test]
    fn quantile_boundary_contract() {
        let exp = Margin::exponential(1.0).unwrap();
        assert_eq!(exp.quantile(0.0).unwrap(), 0.0);
        assert!(matches!(
            exp.quantile(1.0),
            Err(Error::InfiniteQuantile { .. })
        ));
        let gum = Margin::gumbel_std();
        assert!(matches!(
            gum.quantile(0.0),
            Err(Error::InfiniteQuantile { .. })
        ));
        assert!(matches!(
            gum.quantile(1.0),
            Err(Error::InfiniteQuantile { .. })
        ));
        let uni = Margin::uniform(-2.0, 3.0).unwrap();
        assert_eq!(uni.quantile(0.0).unwrap(), -2.0);
        assert_eq!(uni.quantile(1.0).unwrap(), 3.0);
        assert!(matches!(uni.quantile(-0.1), Err(Error::Domain(_))));
        assert!(matches!(uni.quantile(1.1), Err(Error::Domain(_))));
    }

    #[test]
    fn bernoulli_quantile_inf_definition() {
        let m = Margin::bernoulli(0.3).unwrap();
        assert_eq!(m.quantile(0.5).unwrap(), 0.0);
        assert_eq!(m.quantile(0.7).unwrap(), 0.0); // F(0) = 0.7 >= 0.7
        assert_eq!(m.quantile(0.70001).unwrap(), 1.0);
        assert_eq!(m.quantile(1.0).unwrap(), 1.0);
    }

    #[test]
    fn round_trip_continuous() {
        let margins = [
            Margin::uniform(-1.0, 4.0).unwrap(),
            Margin::exponential(0.7).unwrap(),
            Margin::lognormal(0.3, 1.4).unwrap(),
            Margin::gumbel_std(),
        ];
        for m in &margins {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let x = m.quantile(u).unwrap();
                assert!(
                    (m.cdf(x).unwrap() - u).abs() < 1e-9,
                    "round trip failed for {m:?} at u = {u}"
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = Margin::lognormal(0.0, 1.0).unwrap();
        let a = m.sample(&mut RandomStream::from_seed(9), 64).unwrap();
        let b = m.sample(&mut RandomStream::from_seed(9), 64).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            m.sample(&mut RandomStream::from_seed(9), 0),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn bernoulli_sample_mean() {
        let m = Margin::bernoulli(0.3).unwrap();
        let xs = m.sample(&mut RandomStream::from_seed(11), 10_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.3).abs() < 0.015, "mean = {mean}");
    }

    #[test]
    fn moments_closed_forms() {
        let ln = Margin::lognormal(0.0, 1.0).unwrap();
        assert!((ln.mean() - 0.5f64.exp()).abs() < 1e-12);
        assert!((ln.variance() - (1f64.exp_m1() * 1f64.exp())).abs() < 1e-12);
        let g = Margin::gumbel_std();
        assert!((g.mean() - 0.5772156649015329).abs() < 1e-12);
        assert!((g.variance() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(Margin::uniform(1.0, 1.0).is_err());
        assert!(Margin::exponential(0.0).is_err());
        assert!(Margin::lognormal(0.0, -1.0).is_err());
        assert!(Margin::bernoulli(1.5).is_err());
        assert!(Margin::empirical_from_sample(&[]).is_err());
        assert!(Margin::empirical_from_sample(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn normal_quantile_round_trip() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let z = std_normal_quantile(p);
            assert!((std_normal_cdf(z) - p).abs() < 1e-14);
        }
    }
}
