//! Race-model analysis of redundant-signals reaction times and the
//! two-stage TWIN model.
//!
//! Under the race account, the bimodal RT is the minimum of coupled
//! unimodal RTs, so `F_VA(t) = F_V(t) + F_A(t) - H(t, t)` where `H` is the
//! (unobservable) joint CDF of the coupling. Squeezing `H` between the
//! Fréchet bounds yields the race-model inequality
//! `max{F_V, F_A} <= F_VA <= min{F_V + F_A, 1}`; the upper (Miller) bound
//! is what empirical tests try to violate.

use crate::copula::Copula;
use crate::error::{Error, Result};
use crate::margins::Margin;
use crate::rng::RandomStream;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Reaction-time samples keyed by condition label (canonically `V`, `A`,
/// `VA`). Times are positive, finite, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RtDataset {
    conditions: BTreeMap<String, Vec<f64>>,
}

impl RtDataset {
    /// Assemble a dataset from `(condition, rt)` records.
    pub fn from_records<I, S>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut conditions: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (label, rt) in records {
            if !rt.is_finite() || rt <= 0.0 {
                return Err(Error::ingestion(format!(
                    "reaction time {rt} must be positive and finite"
                )));
            }
            conditions.entry(label.into()).or_default().push(rt);
        }
        if conditions.is_empty() {
            return Err(Error::ingestion("reaction-time dataset is empty"));
        }
        Ok(RtDataset { conditions })
    }

    pub fn condition(&self, label: &str) -> Option<&[f64]> {
        self.conditions.get(label).map(Vec::as_slice)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.conditions.keys().map(String::as_str)
    }
}

/// Condition labels used by the race test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceLabels {
    pub visual: String,
    pub auditory: String,
    pub bimodal: String,
}

impl Default for RaceLabels {
    fn default() -> Self {
        RaceLabels {
            visual: "V".into(),
            auditory: "A".into(),
            bimodal: "VA".into(),
        }
    }
}

/// Tuning for [`test_race_inequality`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaceTestConfig {
    /// Number of equally spaced grid points over the pooled 1st–99th
    /// percentile range.
    pub grid_size: usize,
    /// Bootstrap resamples used for the violation proportion.
    pub resamples: usize,
}

impl Default for RaceTestConfig {
    fn default() -> Self {
        RaceTestConfig {
            grid_size: 100,
            resamples: 1_000,
        }
    }
}

/// One Miller-bound violation: where and by how much.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub magnitude: f64,
}

/// Everything the race-inequality test produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaceTestReport {
    pub t_grid: Vec<f64>,
    pub f_v: Vec<f64>,
    pub f_a: Vec<f64>,
    pub f_va: Vec<f64>,
    /// Lower (Grice) bound `max{F_V, F_A}` per grid point.
    pub grice: Vec<f64>,
    /// Upper (Miller) bound `min{F_V + F_A, 1}` per grid point.
    pub miller: Vec<f64>,
    /// Per-t flags: `F_VA(t)` exceeds the Miller bound.
    pub violation: Vec<bool>,
    /// Flagged grid points with their excess over the bound.
    pub violations: Vec<Violation>,
    pub max_violation: Option<Violation>,
    /// Fraction of bootstrap resamples violating the Miller bound at any t.
    pub bootstrap_violation_proportion: f64,
    pub config: RaceTestConfig,
}

/// Bimodal CDF under the race mechanism with the given coupling copula:
/// `F_VA(t) = F_V(t) + F_A(t) - C(F_V(t), F_A(t))` — the copula's dual
/// evaluated at the margins.
pub fn race_cdf(f_v: &Margin, f_a: &Margin, coupling: &Copula, t: f64) -> Result<f64> {
    if coupling.dimension() != 2 {
        return Err(Error::UnsupportedDimension {
            required: 2,
            got: coupling.dimension(),
        });
    }
    let u = f_v.cdf(t)?;
    let v = f_a.cdf(t)?;
    Ok(u + v - coupling.eval2(u, v)?)
}

/// The race-model inequality bounds at one time point:
/// `(max{F_V, F_A}, min{F_V + F_A, 1})`.
pub fn race_bounds(f_v_val: f64, f_a_val: f64) -> Result<(f64, f64)> {
    for (name, v) in [("F_V", f_v_val), ("F_A", f_a_val)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
        }
    }
    Ok((f_v_val.max(f_a_val), (f_v_val + f_a_val).min(1.0)))
}

fn empirical_cdf_at(sorted: &[f64], t: f64) -> f64 {
    sorted.partition_point(|&s| s <= t) as f64 / sorted.len() as f64
}

fn resample(sorted: &[f64], rng: &mut RandomStream) -> Vec<f64> {
    let mut out: Vec<f64> = (0..sorted.len())
        .map(|_| sorted[rng.index(sorted.len())])
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    out
}

fn any_violation(v: &[f64], a: &[f64], va: &[f64], grid: &[f64]) -> bool {
    grid.iter().any(|&t| {
        let miller = (empirical_cdf_at(v, t) + empirical_cdf_at(a, t)).min(1.0);
        empirical_cdf_at(va, t) > miller + 1e-12
    })
}

/// Test the race-model inequality on reaction-time data: empirical CDFs on
/// an equally spaced grid over the pooled 1st–99th percentile range, per-t
/// Miller-bound violation flags, and a bootstrap proportion of resamples
/// violating anywhere.
pub fn test_race_inequality(
    data: &RtDataset,
    labels: &RaceLabels,
    config: &RaceTestConfig,
    rng: &mut RandomStream,
) -> Result<RaceTestReport> {
    if config.grid_size < 2 {
        return Err(Error::Resolution {
            n: config.grid_size,
            min: 2,
        });
    }
    let mut samples = Vec::with_capacity(3);
    for label in [&labels.visual, &labels.auditory, &labels.bimodal] {
        let xs = data.condition(label).ok_or_else(|| {
            Error::ingestion(format!("condition \"{label}\" missing from dataset"))
        })?;
        let mut xs = xs.to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        samples.push(xs);
    }
    let (v, a, va) = (&samples[0], &samples[1], &samples[2]);

    let pooled = Margin::empirical_from_sample(
        &samples.iter().flatten().copied().collect::<Vec<f64>>(),
    )?;
    let lo = pooled.quantile(0.01)?;
    let hi = pooled.quantile(0.99)?;
    let t_grid: Vec<f64> = (0..config.grid_size)
        .map(|i| lo + (hi - lo) * i as f64 / (config.grid_size - 1) as f64)
        .collect();

    let f_v: Vec<f64> = t_grid.iter().map(|&t| empirical_cdf_at(v, t)).collect();
    let f_a: Vec<f64> = t_grid.iter().map(|&t| empirical_cdf_at(a, t)).collect();
    let f_va: Vec<f64> = t_grid.iter().map(|&t| empirical_cdf_at(va, t)).collect();
    let grice: Vec<f64> = f_v.iter().zip(&f_a).map(|(x, y)| x.max(*y)).collect();
    let miller: Vec<f64> = f_v.iter().zip(&f_a).map(|(x, y)| (x + y).min(1.0)).collect();

    let mut violation = vec![false; t_grid.len()];
    let mut violations = Vec::new();
    let mut max_violation: Option<Violation> = None;
    for i in 0..t_grid.len() {
        let excess = f_va[i] - miller[i];
        if excess > 1e-12 {
            violation[i] = true;
            let hit = Violation {
                t: t_grid[i],
                magnitude: excess,
            };
            violations.push(hit);
            if max_violation.is_none_or(|m| excess > m.magnitude) {
                max_violation = Some(hit);
            }
        }
    }

    let mut violating_resamples = 0usize;
    for _ in 0..config.resamples {
        let rv = resample(v, rng);
        let ra = resample(a, rng);
        let rva = resample(va, rng);
        if any_violation(&rv, &ra, &rva, &t_grid) {
            violating_resamples += 1;
        }
    }
    let bootstrap_violation_proportion = if config.resamples == 0 {
        0.0
    } else {
        violating_resamples as f64 / config.resamples as f64
    };

    Ok(RaceTestReport {
        t_grid,
        f_v,
        f_a,
        f_va,
        grice,
        miller,
        violation,
        violations,
        max_violation,
        bootstrap_violation_proportion,
        config: *config,
    })
}

/// Parameters of the two-stage TWIN model: integration probability `pi`
/// and the four stage margins conditioned on integration occurring (I) or
/// not (I^c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwinParams {
    pub integration_probability: f64,
    pub stage1_integrated: Margin,
    pub stage1_nonintegrated: Margin,
    pub stage2_integrated: Margin,
    pub stage2_nonintegrated: Margin,
}

impl TwinParams {
    pub fn new(
        integration_probability: f64,
        stage1_integrated: Margin,
        stage1_nonintegrated: Margin,
        stage2_integrated: Margin,
        stage2_nonintegrated: Margin,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&integration_probability) {
            return Err(Error::domain(format!(
                "integration probability must lie in [0, 1], got {integration_probability}"
            )));
        }
        Ok(TwinParams {
            integration_probability,
            stage1_integrated,
            stage1_nonintegrated,
            stage2_integrated,
            stage2_nonintegrated,
        })
    }
}

/// Joint CDF of the two stage times: the two-component mixture of products
/// `pi F_I(w1) G_I(w2) + (1 - pi) F_Ic(w1) G_Ic(w2)` (conditional
/// independence given the integration event).
pub fn twin_joint_cdf(p: &TwinParams, w1: f64, w2: f64) -> Result<f64> {
    let pi = p.integration_probability;
    Ok(
        pi * p.stage1_integrated.cdf(w1)? * p.stage2_integrated.cdf(w2)?
            + (1.0 - pi) * p.stage1_nonintegrated.cdf(w1)? * p.stage2_nonintegrated.cdf(w2)?,
    )
}

/// Closed-form covariance of the stage times:
/// `pi (1 - pi) {E(W1 | I^c) - E(W1 | I)} {E(W2 | I^c) - E(W2 | I)}`.
pub fn twin_covariance(p: &TwinParams) -> Result<f64> {
    let means = [
        p.stage1_integrated.mean(),
        p.stage1_nonintegrated.mean(),
        p.stage2_integrated.mean(),
        p.stage2_nonintegrated.mean(),
    ];
    if let Some(bad) = means.iter().find(|m| !m.is_finite()) {
        return Err(Error::domain(format!(
            "conditional stage mean {bad} is not finite"
        )));
    }
    let pi = p.integration_probability;
    Ok(pi * (1.0 - pi) * (means[1] - means[0]) * (means[3] - means[2]))
}

/// One simulated TWIN trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwinDraw {
    pub w1: f64,
    pub w2: f64,
    /// Total reaction time `W1 + W2`.
    pub rt: f64,
    /// Whether the integration event occurred this trial.
    pub integrated: bool,
}

/// Simulate `n` TWIN trials: flip the integration event with probability
/// `pi`, then draw the two stage times independently from the conditioned
/// margins.
pub fn twin_sample(p: &TwinParams, rng: &mut RandomStream, n: usize) -> Result<Vec<TwinDraw>> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let integrated = rng.bernoulli(p.integration_probability);
        let (s1, s2) = if integrated {
            (&p.stage1_integrated, &p.stage2_integrated)
        } else {
            (&p.stage1_nonintegrated, &p.stage2_nonintegrated)
        };
        let w1 = s1.sample_one(rng);
        let w2 = s2.sample_one(rng);
        out.push(TwinDraw {
            w1,
            w2,
            rt: w1 + w2,
            integrated,
        });
    }
    Ok(out)
}
