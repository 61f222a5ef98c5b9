//! Couplings: joint constructions with prescribed margins.
//!
//! A coupling of random variables `X_i` is a family of jointly distributed
//! copies, one per margin. This module provides the quantile coupling (one
//! shared uniform driving every quantile function), the two-point Bernoulli
//! coupling, the maximal coupling of discrete laws via the splitting
//! representation, the coupling-event bound `sum_x inf_i p_i(x)`, total
//! variation distance, and monotone coupling under stochastic dominance.

use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::rng::RandomStream;
use serde::{Deserialize, Serialize};

const PROB_SUM_TOL: f64 = 1e-12;

/// A finite probability mass function with distinct support values,
/// stored in ascending value order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl Pmf {
    /// Build a pmf from `(value, probability)` pairs.
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::ingestion("pmf needs at least one support point"));
        }
        let mut pairs = pairs.to_vec();
        for &(v, p) in &pairs {
            if !v.is_finite() {
                return Err(Error::ingestion(format!("pmf support value {v} is not finite")));
            }
            if !p.is_finite() || p < 0.0 {
                return Err(Error::ingestion(format!(
                    "pmf probability {p} at value {v} must be finite and nonnegative"
                )));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::ingestion("pmf support values must be distinct"));
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::ingestion(format!(
                "pmf probabilities sum to {total}, expected 1 within {PROB_SUM_TOL}"
            )));
        }
        let (values, probs) = pairs.into_iter().unzip();
        Ok(Pmf { values, probs })
    }

    /// Pmf of a Bernoulli(p) variable on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("bernoulli pmf requires p in [0, 1], got {p}")));
        }
        Pmf::new(&[(0.0, 1.0 - p), (1.0, p)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of exactly `x` (0 when `x` is not a support point).
    pub fn prob_of(&self, x: f64) -> f64 {
        match self
            .values
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite values"))
        {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// Draw one value by cumulative-sum inversion in ascending value order.
    pub fn sample_one(&self, rng: &mut RandomStream) -> f64 {
        sample_from_weights(&self.values, &self.probs, rng)
    }
}

fn sample_from_weights(values: &[f64], weights: &[f64], rng: &mut RandomStream) -> f64 {
    let u = rng.uniform();
    let mut cum = 0.0;
    for (v, w) in values.iter().zip(weights) {
        cum += w;
        if u < cum {
            return *v;
        }
    }
    // Rounding can leave cum slightly below 1; fall back to the last value.
    *values.last().expect("nonempty support")
}

/// Merge the supports of several pmfs by exact value equality; returns the
/// merged support and one probability row per input pmf (zeros filled in).
pub fn merge_supports(pmfs: &[Pmf]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut support: Vec<f64> = pmfs.iter().flat_map(|p| p.values.iter().copied()).collect();
    support.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    support.dedup();
    let rows = pmfs
        .iter()
        .map(|p| support.iter().map(|&x| p.prob_of(x)).collect())
        .collect();
    (support, rows)
}

/// One draw from a coupled sampler: the coordinate values plus the
/// coupling-event flag where the construction defines one.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledDraw {
    pub values: Vec<f64>,
    /// `Some(true)` when the coupling event occurred; `None` for samplers
    /// without a distinguished coupling event.
    pub coupled: Option<bool>,
}

/// A joint sampler over `R^n` with declared margins.
pub trait CoupledSampler {
    fn dimension(&self) -> usize;
    fn draw(&self, rng: &mut RandomStream) -> CoupledDraw;
}

/// The two-point coupling of Bernoulli(p) and Bernoulli(q), p <= q, driven
/// by a single shared uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliCoupling {
    p: f64,
    q: f64,
}

impl BernoulliCoupling {
    /// Joint table `table[i][j] = P(X_p = i, X_q = j)`.
    pub fn table(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.q, self.q - self.p], [0.0, self.p]]
    }

    /// Covariance of the coupled pair, `p (1 - q)`.
    pub fn covariance(&self) -> f64 {
        self.p * (1.0 - self.q)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl CoupledSampler for BernoulliCoupling {
    fn dimension(&self) -> usize {
        2
    }

    fn draw(&self, rng: &mut RandomStream) -> CoupledDraw {
        let u = rng.uniform_open();
        let xp = if u <= self.p { 1.0 } else { 0.0 };
        let xq = if u <= self.q { 1.0 } else { 0.0 };
        CoupledDraw {
            values: vec![xp, xq],
            coupled: None,
        }
    }
}

/// Couple Bernoulli(p) with Bernoulli(q) for `p <= q` on one uniform.
pub fn bernoulli_coupling(p: f64, q: f64) -> Result<BernoulliCoupling> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!(
                "bernoulli coupling requires {name} in [0, 1], got {v}"
            )));
        }
    }
    if p > q {
        return Err(Error::Order { p, q });
    }
    Ok(BernoulliCoupling { p, q })
}

/// The quantile coupling: one uniform `U` per draw, coordinate `i` equal to
/// `Q_i(U)`. Coordinates are comonotone by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileCoupling {
    margins: Vec<Margin>,
}

impl QuantileCoupling {
    pub fn margins(&self) -> &[Margin] {
        &self.margins
    }
}

impl CoupledSampler for QuantileCoupling {
    fn dimension(&self) -> usize {
        self.margins.len()
    }

    fn draw(&self, rng: &mut RandomStream) -> CoupledDraw {
        let u = rng.uniform_open();
        let values = self
            .margins
            .iter()
            .map(|m| m.quantile(u).expect("quantile is finite on (0, 1)"))
            .collect();
        CoupledDraw {
            values,
            coupled: None,
        }
    }
}

/// Build the quantile coupling of the given margins.
pub fn quantile_coupling(margins: Vec<Margin>) -> Result<QuantileCoupling> {
    if margins.is_empty() {
        return Err(Error::domain("quantile coupling needs at least one margin"));
    }
    Ok(QuantileCoupling { margins })
}

/// The coupling-event bound `c = sum_x inf_i p_i(x)`: no coupling event can
/// have probability above `c`.
pub fn coupling_event_bound(pmfs: &[Pmf]) -> Result<f64> {
    if pmfs.len() < 2 {
        return Err(Error::domain(format!(
            "coupling event bound needs at least 2 pmfs, got {}",
            pmfs.len()
        )));
    }
    let (support, rows) = merge_supports(pmfs);
    let mut c = 0.0;
    for j in 0..support.len() {
        c += rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
    }
    Ok(c)
}

/// Total variation distance `max_A |a(A) - b(A)| = (1/2) sum_x |a(x) - b(x)|`.
///
/// Equals `1 - coupling_event_bound([a, b])`.
pub fn total_variation(a: &Pmf, b: &Pmf) -> f64 {
    let (support, rows) = merge_supports(&[a.clone(), b.clone()]);
    0.5 * (0..support.len())
        .map(|j| (rows[0][j] - rows[1][j]).abs())
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SplitBranch {
    /// `c = 0`: coordinates drawn independently, coupling event empty.
    Independent,
    /// `c = 1`: all coordinates identical, coupling event certain.
    Identical,
    /// `0 < c < 1`: the splitting mixture of the two cases above.
    Mixture,
}

/// Maximal coupling of discrete laws via the splitting representation:
/// a Bernoulli(c) switch `J`, a shared value `V ~ inf_i p_i(x)/c` when
/// `J = 1`, and independent residuals `W_i ~ (p_i(x) - c P(V=x))/(1-c)`
/// when `J = 0`. The coupling event `{J = 1}` attains the bound `c`.
#[derive(Debug, Clone)]
pub struct MaximalCoupling {
    support: Vec<f64>,
    event_probability: f64,
    branch: SplitBranch,
    /// Distribution of the shared value V (mixture branch only).
    shared_probs: Vec<f64>,
    /// Residual distribution W_i per coordinate (mixture branch), or the
    /// original margins (independent branch).
    residual_probs: Vec<Vec<f64>>,
}

impl MaximalCoupling {
    /// The attained coupling-event probability `c`.
    pub fn event_probability(&self) -> f64 {
        self.event_probability
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }
}

impl CoupledSampler for MaximalCoupling {
    fn dimension(&self) -> usize {
        self.residual_probs.len()
    }

    fn draw(&self, rng: &mut RandomStream) -> CoupledDraw {
        match self.branch {
            SplitBranch::Identical => {
                let v = sample_from_weights(&self.support, &self.residual_probs[0], rng);
                CoupledDraw {
                    values: vec![v; self.residual_probs.len()],
                    coupled: Some(true),
                }
            }
            SplitBranch::Independent => {
                let values = self
                    .residual_probs
                    .iter()
                    .map(|row| sample_from_weights(&self.support, row, rng))
                    .collect();
                CoupledDraw {
                    values,
                    coupled: Some(false),
                }
            }
            SplitBranch::Mixture => {
                if rng.bernoulli(self.event_probability) {
                    let v = sample_from_weights(&self.support, &self.shared_probs, rng);
                    CoupledDraw {
                        values: vec![v; self.residual_probs.len()],
                        coupled: Some(true),
                    }
                } else {
                    let values = self
                        .residual_probs
                        .iter()
                        .map(|row| sample_from_weights(&self.support, row, rng))
                        .collect();
                    CoupledDraw {
                        values,
                        coupled: Some(false),
                    }
                }
            }
        }
    }
}

/// Construct the maximal coupling of two or more discrete laws.
pub fn maximal_coupling(pmfs: &[Pmf]) -> Result<MaximalCoupling> {
    let c = coupling_event_bound(pmfs)?;
    let (support, rows) = merge_supports(pmfs);

    if c <= 0.0 {
        return Ok(MaximalCoupling {
            support,
            event_probability: 0.0,
            branch: SplitBranch::Independent,
            shared_probs: Vec::new(),
            residual_probs: rows,
        });
    }
    // Identical margins give c = 1 only up to the pmf sum tolerance.
    if c >= 1.0 - 1e-9 {
        return Ok(MaximalCoupling {
            support,
            event_probability: 1.0,
            branch: SplitBranch::Identical,
            shared_probs: rows[0].clone(),
            residual_probs: rows,
        });
    }

    let shared_probs: Vec<f64> = (0..support.len())
        .map(|j| rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min) / c)
        .collect();
    let mut residual_probs = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut w: Vec<f64> = row
            .iter()
            .zip(&shared_probs)
            .map(|(&p, &v)| (p - c * v) / (1.0 - c))
            .collect();
        if let Some(&bad) = w.iter().find(|&&x| x < -PROB_SUM_TOL) {
            return Err(Error::InternalConsistency(format!(
                "splitting residual probability {bad} below -{PROB_SUM_TOL}"
            )));
        }
        let total: f64 = w.iter().map(|&x| x.max(0.0)).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InternalConsistency(format!(
                "splitting residual probabilities sum to {total}"
            )));
        }
        for x in &mut w {
            *x = x.max(0.0) / total;
        }
        residual_probs.push(w);
    }

    Ok(MaximalCoupling {
        support,
        event_probability: c,
        branch: SplitBranch::Mixture,
        shared_probs,
        residual_probs,
    })
}

/// Result of checking `F(x) >= G(x)` on a dense grid (stochastic dominance
/// of the first margin by the second).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub holds: bool,
    /// Grid maximum of `G(x) - F(x)`; dominance holds when this is within
    /// tolerance of zero.
    pub max_gap: f64,
    /// First grid point where `F(x) < G(x)` beyond tolerance, if any.
    pub first_violation: Option<f64>,
    pub grid_size: usize,
}

/// Outcome of the monotone-coupling construction: either the quantile
/// coupling realizing the pointwise order, or the dominance report saying
/// where the order fails.
#[derive(Debug, Clone)]
pub enum StrassenOutcome {
    Coupled {
        sampler: QuantileCoupling,
        report: DominanceReport,
    },
    NotDominated(DominanceReport),
}

const DOMINANCE_TOL: f64 = 1e-9;
const DOMINANCE_GRID: usize = 1_000;

/// Check `X <=_d X'` (i.e. `F >= G` pointwise) on a dense grid and, when it
/// holds, return the quantile coupling, whose draws satisfy `x <= x'`
/// coordinatewise.
pub fn strassen_monotone_coupling(f: &Margin, g: &Margin) -> Result<StrassenOutcome> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in [f, g] {
        lo = lo.min(m.quantile(0.001)?);
        hi = hi.max(m.quantile(0.999)?);
    }
    let mut grid: Vec<f64> = (0..DOMINANCE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (DOMINANCE_GRID - 1) as f64)
        .collect();
    grid.extend(f.atoms());
    grid.extend(g.atoms());
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();

    let mut max_gap = f64::NEG_INFINITY;
    let mut first_violation = None;
    for &x in &grid {
        let gap = g.cdf(x)? - f.cdf(x)?;
        if gap > max_gap {
            max_gap = gap;
        }
        if gap > DOMINANCE_TOL && first_violation.is_none() {
            first_violation = Some(x);
        }
    }
    let report = DominanceReport {
        holds: first_violation.is_none(),
        max_gap,
        first_violation,
        grid_size: grid.len(),
    };
    if report.holds {
        Ok(StrassenOutcome::Coupled {
            sampler: quantile_coupling(vec![f.clone(), g.clone()])?,
            report,
        })
    } else {
        Ok(StrassenOutcome::NotDominated(report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_table_and_covariance() {
        let c = bernoulli_coupling(0.3, 0.6).unwrap();
        let t = c.table();
        assert!((t[0][0] - 0.4).abs() < 1e-15);
        assert!((t[0][1] - 0.3).abs() < 1e-15);
        assert!((t[1][1] - 0.3).abs() < 1e-15);
        assert_eq!(t[1][0], 0.0);
        assert!((c.covariance() - 0.3 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_equal_probs_couple_exactly() {
        let c = bernoulli_coupling(0.5, 0.5).unwrap();
        assert_eq!(c.table()[0][1], 0.0);
        let mut rng = RandomStream::from_seed(3);
        for _ in 0..1_000 {
            let d = c.draw(&mut rng);
            assert_eq!(d.values[0], d.values[1]);
        }
    }

    #[test]
    fn bernoulli_degenerate() {
        let c = bernoulli_coupling(0.0, 1.0).unwrap();
        assert_eq!(c.table(), [[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(c.covariance(), 0.0);
    }

    #[test]
    fn bernoulli_rejects_bad_order() {
        assert!(matches!(
            bernoulli_coupling(0.7, 0.2),
            Err(Error::Order { .. })
        ));
        assert!(bernoulli_coupling(-0.1, 0.5).is_err());
    }

    #[test]
    fn quantile_coupling_identical_margins() {
        let m = Margin::uniform(0.0, 1.0).unwrap();
        let qc = quantile_coupling(vec![m.clone(), m]).unwrap();
        let mut rng = RandomStream::from_seed(5);
        for _ in 0..200 {
            let d = qc.draw(&mut rng);
            assert_eq!(d.values[0], d.values[1]);
        }
    }

    #[test]
    fn quantile_coupling_positive_correlation() {
        let qc = quantile_coupling(vec![
            Margin::exponential(1.0).unwrap(),
            Margin::exponential(0.5).unwrap(),
        ])
        .unwrap();
        let mut rng = RandomStream::from_seed(17);
        let draws: Vec<_> = (0..10_000).map(|_| qc.draw(&mut rng).values).collect();
        let xs: Vec<f64> = draws.iter().map(|d| d[0]).collect();
        let ys: Vec<f64> = draws.iter().map(|d| d[1]).collect();
        let (mx, sx) = crate::numeric::mean_and_sd(&xs);
        let (my, sy) = crate::numeric::mean_and_sd(&ys);
        let cov = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.len() as f64;
        assert!(cov / (sx * sy) > 0.0);
    }

    #[test]
    fn event_bound_examples() {
        let a = Pmf::bernoulli(0.3).unwrap();
        let b = Pmf::bernoulli(0.6).unwrap();
        assert!((coupling_event_bound(&[a.clone(), b.clone()]).unwrap() - 0.7).abs() < 1e-15);
        assert!((coupling_event_bound(&[a.clone(), a.clone()]).unwrap() - 1.0).abs() < 1e-12);
        let disjoint = Pmf::new(&[(10.0, 0.5), (11.0, 0.5)]).unwrap();
        assert_eq!(coupling_event_bound(&[a.clone(), disjoint]).unwrap(), 0.0);
        assert!(coupling_event_bound(&[a]).is_err());
    }

    #[test]
    fn tv_examples() {
        let a = Pmf::bernoulli(0.3).unwrap();
        let b = Pmf::bernoulli(0.6).unwrap();
        assert!((total_variation(&a, &b) - 0.3).abs() < 1e-15);
        assert_eq!(total_variation(&a, &a), 0.0);
        let d1 = Pmf::new(&[(0.0, 1.0)]).unwrap();
        let d2 = Pmf::new(&[(1.0, 1.0)]).unwrap();
        assert_eq!(total_variation(&d1, &d2), 1.0);
    }

    #[test]
    fn tv_is_one_minus_event_bound() {
        let a = Pmf::new(&[(0.0, 0.2), (1.0, 0.5), (2.0, 0.3)]).unwrap();
        let b = Pmf::new(&[(0.0, 0.4), (1.5, 0.1), (2.0, 0.5)]).unwrap();
        let tv = total_variation(&a, &b);
        let c = coupling_event_bound(&[a, b]).unwrap();
        assert!((tv + c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_coupling_branches() {
        let mut rng = RandomStream::from_seed(23);

        let a = Pmf::bernoulli(0.4).unwrap();
        let same = maximal_coupling(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(same.event_probability(), 1.0);
        for _ in 0..500 {
            let d = same.draw(&mut rng);
            assert_eq!(d.coupled, Some(true));
            assert_eq!(d.values[0], d.values[1]);
        }

        let disjoint = Pmf::new(&[(5.0, 0.5), (6.0, 0.5)]).unwrap();
        let none = maximal_coupling(&[a.clone(), disjoint]).unwrap();
        assert_eq!(none.event_probability(), 0.0);
        for _ in 0..500 {
            let d = none.draw(&mut rng);
            assert_eq!(d.coupled, Some(false));
        }
    }

    #[test]
    fn maximal_coupling_event_rate() {
        let a = Pmf::bernoulli(0.3).unwrap();
        let b = Pmf::bernoulli(0.6).unwrap();
        let mc = maximal_coupling(&[a, b]).unwrap();
        assert!((mc.event_probability() - 0.7).abs() < 1e-12);
        let mut rng = RandomStream::from_seed(29);
        let n = 10_000;
        let mut hits = 0;
        for _ in 0..n {
            let d = mc.draw(&mut rng);
            let coupled = d.coupled.unwrap();
            if coupled {
                hits += 1;
                assert_eq!(d.values[0], d.values[1]);
            }
        }
        let rate = hits as f64 / n as f64;
        // 3 sigma for a Bernoulli(0.7) proportion at n = 1e4
        assert!((rate - 0.7).abs() < 3.0 * (0.7f64 * 0.3 / n as f64).sqrt() + 1e-9);
    }

    #[test]
    fn strassen_dominance_holds() {
        let f = Margin::exponential(1.0).unwrap();
        let g = Margin::exponential(0.5).unwrap();
        match strassen_monotone_coupling(&f, &g).unwrap() {
            StrassenOutcome::Coupled { sampler, report } => {
                assert!(report.holds);
                assert!(report.max_gap <= DOMINANCE_TOL);
                let mut rng = RandomStream::from_seed(31);
                for _ in 0..2_000 {
                    let d = sampler.draw(&mut rng);
                    assert!(d.values[0] <= d.values[1]);
                }
            }
            StrassenOutcome::NotDominated(r) => panic!("dominance should hold: {r:?}"),
        }
    }

    #[test]
    fn strassen_identical_margins() {
        let f = Margin::uniform(0.0, 1.0).unwrap();
        match strassen_monotone_coupling(&f, &f).unwrap() {
            StrassenOutcome::Coupled { sampler, .. } => {
                let mut rng = RandomStream::from_seed(37);
                let d = sampler.draw(&mut rng);
                assert_eq!(d.values[0], d.values[1]);
            }
            _ => panic!("identical margins dominate themselves"),
        }
    }

    #[test]
    fn strassen_reversed_order_fails() {
        let f = Margin::uniform(0.0, 1.0).unwrap();
        let g = Margin::uniform(-1.0, 0.0).unwrap();
        match strassen_monotone_coupling(&f, &g).unwrap() {
            StrassenOutcome::NotDominated(report) => {
                assert!(!report.holds);
                assert!(report.max_gap > 0.5);
                assert!(report.first_violation.is_some());
            }
            _ => panic!("reversed supports cannot dominate"),
        }
    }

    #[test]
    fn pmf_validation() {
        assert!(Pmf::new(&[]).is_err());
        assert!(Pmf::new(&[(0.0, 0.5), (0.0, 0.5)]).is_err());
        assert!(Pmf::new(&[(0.0, 0.6), (1.0, 0.6)]).is_err());
        assert!(Pmf::new(&[(0.0, -0.1), (1.0, 1.1)]).is_err());
        assert!(Pmf::new(&[(f64::NAN, 1.0)]).is_err());
    }
}
