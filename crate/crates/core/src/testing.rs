//! Point-null hypothesis testing: the Bayes-factor bound `-e p ln p`, the
//! resulting lower bound on the local false discovery rate, and the blended
//! probability of the null hypothesis.

use std::f64::consts::E;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, Result};

/// An observed p-value together with a lower bound on the prior
/// probability of the null hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestInput {
    p_value: f64,
    pi0_lower: f64,
}

impl TestInput {
    /// `p_value` must lie in `(0, 1]` and `pi0_lower` in `[0, 1]`.
    pub fn new(p_value: f64, pi0_lower: f64) -> Result<Self> {
        check_p(p_value)?;
        if !(0.0..=1.0).contains(&pi0_lower) {
            return Err(Error::domain("pi0_lower", pi0_lower, "[0, 1]"));
        }
        Ok(Self { p_value, pi0_lower })
    }

    pub fn p_value(&self) -> f64 {
        self.p_value
    }

    pub fn pi0_lower(&self) -> f64 {
        self.pi0_lower
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("p_value", p, "(0, 1]"))
    }
}

/// Which side of the blend determines the reported probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The p-value is at least the LFDR bound and is reported as is.
    FrequentistDominated,
    /// The LFDR bound exceeds the p-value.
    BayesDominated,
    /// The prior probability of the null is known to be one.
    PriorKnown,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FrequentistDominated => "frequentist_dominated",
            Regime::BayesDominated => "bayes_dominated",
            Regime::PriorKnown => "prior_known",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendResult {
    pub blended_null_prob: f64,
    pub lfdr_lower: f64,
    pub bayes_factor_lower: f64,
    pub regime: Regime,
}

/// Lower bound on the Bayes factor in favour of the null when the
/// alternative's hazard rate in `-ln p` is nonincreasing: `-e p ln p` below
/// `1/e` and `1` from there on.
pub fn sellke_bound(p_value: f64) -> Result<f64> {
    check_p(p_value)?;
    if p_value < 1.0 / E {
        Ok((-E * p_value * p_value.ln()).min(1.0))
    } else {
        Ok(1.0)
    }
}

/// Lower bound on the posterior probability of the null,
/// `(1 + (1 - pi0) / (pi0 * b))^-1`, with `b` the Bayes-factor bound.
pub fn lfdr_lower_bound(input: &TestInput) -> Result<f64> {
    let b = sellke_bound(input.p_value)?;
    Ok(lfdr_from_bound(input.pi0_lower, b))
}

/// Written as `pi0 b / (pi0 b + 1 - pi0)`, which is exactly 0 at `pi0 = 0`
/// and exactly 1 at `pi0 = 1`.
fn lfdr_from_bound(pi0: f64, b: f64) -> f64 {
    let weighted = pi0 * b;
    weighted / (weighted + (1.0 - pi0))
}

/// The larger of the p-value and the LFDR bound.
pub fn blended_null_probability(input: &TestInput) -> Result<BlendResult> {
    let bayes_factor_lower = sellke_bound(input.p_value)?;
    let lfdr_lower = lfdr_from_bound(input.pi0_lower, bayes_factor_lower);
    let p = input.p_value;
    let blended_null_prob = if p >= lfdr_lower { p } else { lfdr_lower };
    let regime = if input.pi0_lower == 1.0 {
        Regime::PriorKnown
    } else if lfdr_lower > p {
        Regime::BayesDominated
    } else {
        Regime::FrequentistDominated
    };
    Ok(BlendResult {
        blended_null_prob,
        lfdr_lower,
        bayes_factor_lower,
        regime,
    })
}

/// Null probability from averaging the admissible posteriors uniformly
/// instead of blending: `(1 + lfdr_lower) / 2`.
pub fn maxent_alternative(input: &TestInput) -> Result<f64> {
    Ok((1.0 + lfdr_lower_bound(input)?) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub p: f64,
    pub pi0_lower: f64,
    pub sellke: f64,
    pub lfdr_lower: f64,
    pub blended: f64,
    pub maxent: f64,
}

impl TableRow {
    pub fn compute(p: f64, pi0_lower: f64) -> Result<Self> {
        let input = TestInput::new(p, pi0_lower)?;
        let blend = blended_null_probability(&input)?;
        Ok(Self {
            p,
            pi0_lower,
            sellke: blend.bayes_factor_lower,
            lfdr_lower: blend.lfdr_lower,
            blended: blend.blended_null_prob,
            maxent: (1.0 + blend.lfdr_lower) / 2.0,
        })
    }
}

/// Every `(p, pi0)` combination, `pi0` in the outer loop.
pub fn blend_table(p_grid: &[f64], pi0_grid: &[f64]) -> Result<Vec<TableRow>> {
    for &p in p_grid {
        check_p(p)?;
    }
    for &pi0 in pi0_grid {
        TestInput::new(1.0, pi0)?;
    }
    pi0_grid
        .par_iter()
        .flat_map_iter(|&pi0| p_grid.iter().map(move |&p| TableRow::compute(p, pi0)))
        .collect()
}
