//! Confidence posteriors built from a Student t location model.
//!
//! The significance function `S(theta; x)` of the model is the distribution
//! function of the confidence posterior of the location parameter. Reading
//! it at the null value gives a p-value, inverting it gives confidence
//! intervals, and folding the parameter at zero turns the two-sided p-value
//! into the posterior mass of the null hypothesis.

use crate::distributions::FiniteDistribution;
use crate::{Error, Result};

const BETA_CF_TOLERANCE: f64 = 1e-14;
const BETA_CF_MAX_ITER: usize = 300;
const QUANTILE_TOLERANCE: f64 = 1e-10;
const QUANTILE_MAX_BISECTIONS: usize = 200;

/// Lanczos approximation (g = 7, nine terms), good to about 1e-15 relative.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("a", a, "(0, inf)"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::domain("b", b, "(0, inf)"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    // The continued fraction converges quickly below the mean; use the
    // reflection I_x(a, b) = 1 - I_{1-x}(b, a) above it.
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - beta_continued_fraction(b, a, 1.0 - x)?)
    } else {
        beta_continued_fraction(a, b, x)
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let ln_prefix = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let prefix = ln_prefix.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + even * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + even / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + odd * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + odd / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < BETA_CF_TOLERANCE {
            return Ok(prefix * h);
        }
    }
    Err(Error::NoConvergence("incomplete beta continued fraction"))
}

/// Student t distribution function with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> Result<f64> {
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::domain("df", df, "(0, inf)"));
    }
    if t.is_nan() {
        return Err(Error::domain("t", t, "a number"));
    }
    if t == f64::INFINITY {
        return Ok(1.0);
    }
    if t == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(0.5);
    }
    // Lower tail mass of -|t|, computed without subtraction.
    let tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t))?;
    Ok(if t < 0.0 { tail } else { 1.0 - tail })
}

/// A location parameter estimated with a t-distributed pivot:
/// `(estimate - theta) / std_error ~ t(df)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationModel {
    estimate: f64,
    std_error: f64,
    df: f64,
}

impl LocationModel {
    pub fn new(estimate: f64, std_error: f64, df: f64) -> Result<Self> {
        if !estimate.is_finite() {
            return Err(Error::domain("estimate", estimate, "a finite number"));
        }
        if !(std_error > 0.0) || !std_error.is_finite() {
            return Err(Error::domain("std_error", std_error, "(0, inf)"));
        }
        if !(df > 0.0) || !df.is_finite() {
            return Err(Error::domain("df", df, "(0, inf)"));
        }
        Ok(Self {
            estimate,
            std_error,
            df,
        })
    }

    /// One-sample model: sample mean, its standard error, and `n - 1` degrees
    /// of freedom.
    pub fn from_sample(sample: &[f64]) -> Result<Self> {
        let n = sample.len();
        if n < 2 {
            return Err(Error::domain("sample size", n as f64, "at least 2"));
        }
        let nf = n as f64;
        let mean = sample.iter().sum::<f64>() / nf;
        let ss: f64 = sample.iter().map(|x| (x - mean).powi(2)).sum();
        let sd = (ss / (nf - 1.0)).sqrt();
        Self::new(mean, sd / nf.sqrt(), nf - 1.0)
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn std_error(&self) -> f64 {
        self.std_error
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn t_ratio(&self) -> f64 {
        self.estimate / self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceFunction {
    pub model: LocationModel,
}

impl SignificanceFunction {
    pub fn new(model: LocationModel) -> Self {
        Self { model }
    }
}

/// `S(theta; x)`, nondecreasing in `theta`.
pub fn significance(sf: &SignificanceFunction, theta: f64) -> Result<f64> {
    let m = &sf.model;
    t_cdf((theta - m.estimate) / m.std_error, m.df)
}

/// `[S^-1(alpha), S^-1(beta)]`, a `(beta - alpha)` confidence interval.
pub fn confidence_interval(sf: &SignificanceFunction, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    for (name, level) in [("alpha", alpha), ("beta", beta)] {
        if !(0.0..=1.0).contains(&level) {
            return Err(Error::domain(name, level, "[0, 1]"));
        }
    }
    if alpha > beta {
        return Err(Error::domain("alpha", alpha, "at most beta"));
    }
    Ok((quantile(sf, alpha)?, quantile(sf, beta)?))
}

fn quantile(sf: &SignificanceFunction, level: f64) -> Result<f64> {
    if level == 0.0 || level == 1.0 {
        return Err(Error::UnboundedEndpoint { level });
    }
    let center = sf.model.estimate;
    if level == 0.5 {
        return Ok(center);
    }
    let se = sf.model.std_error;
    let mut half_width = 10.0 * se;
    let (mut lo, mut hi) = (center - half_width, center + half_width);
    while significance(sf, lo)? > level || significance(sf, hi)? < level {
        half_width *= 2.0;
        if !half_width.is_finite() {
            return Err(Error::NoConvergence("quantile bracket"));
        }
        lo = center - half_width;
        hi = center + half_width;
    }
    for _ in 0..QUANTILE_MAX_BISECTIONS {
        if hi - lo <= QUANTILE_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if significance(sf, mid)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `2 P(T >= |estimate| / std_error)`.
pub fn two_sided_p(model: &LocationModel) -> Result<f64> {
    let lower = t_cdf(-model.t_ratio().abs(), model.df)?;
    Ok((2.0 * lower).min(1.0))
}

/// Confidence posterior on {null, alternative}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryConfidencePosterior {
    pub null_prob: f64,
    pub alt_prob: f64,
}

impl BinaryConfidencePosterior {
    pub fn to_distribution(&self) -> FiniteDistribution {
        FiniteDistribution::binary(self.null_prob)
            .expect("null probability of a confidence posterior lies in [0, 1]")
    }
}

/// Folding the parameter at zero puts the two-sided p-value on the null.
pub fn confidence_posterior_null(model: &LocationModel) -> Result<BinaryConfidencePosterior> {
    let null_prob = two_sided_p(model)?;
    Ok(BinaryConfidencePosterior {
        null_prob,
        alt_prob: 1.0 - null_prob,
    })
}
