//! Finite probability distributions, information divergence, and
//! inferential gain.
//!
//! Divergences are in nats. Infinite values are carried as explicit
//! variants of [`ExtendedReal`] so that `inf - inf` can be detected instead
//! of silently becoming NaN.

use std::fmt;

use crate::{Error, Result};

/// Tolerance on `|sum(probs) - 1|` accepted by the constructors.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// A real number extended with the two signed infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Lossy conversion for display and plotting.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
            ExtendedReal::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("inf"),
            ExtendedReal::NegInfinity => f.write_str("-inf"),
        }
    }
}

/// Outcome of a difference of two divergences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InferentialGain {
    Determinate(ExtendedReal),
    /// Both divergences were infinite.
    Indeterminate,
}

impl InferentialGain {
    pub fn value(self) -> Option<ExtendedReal> {
        match self {
            InferentialGain::Determinate(v) => Some(v),
            InferentialGain::Indeterminate => None,
        }
    }
}

/// A probability vector over an ordered list of unique atom labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    atoms: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Builds a distribution, rejecting negative or non-finite entries and
    /// sums further than [`NORMALIZATION_TOLERANCE`] from one. Sums within
    /// tolerance are rescaled unless they are already within rounding noise
    /// of one, which keeps construction idempotent.
    pub fn new<S: Into<String>>(atoms: Vec<S>, probs: Vec<f64>) -> Result<Self> {
        let atoms: Vec<String> = atoms.into_iter().map(Into::into).collect();
        validate_atoms(&atoms)?;
        if atoms.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms but {} probabilities",
                atoms.len(),
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "probability of atom {:?} is {p}",
                atoms[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        let probs = if (total - 1.0).abs() <= 8.0 * f64::EPSILON {
            probs
        } else {
            probs.into_iter().map(|p| p / total).collect()
        };
        Ok(Self { atoms, probs })
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights<S: Into<String>>(atoms: Vec<S>, weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(atoms, weights.iter().map(|w| w / total).collect())
    }

    /// Distribution on the atoms `"0"` (null) and `"1"` (alternative).
    pub fn binary(null_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&null_prob) {
            return Err(Error::InvalidDistribution(format!(
                "null probability {null_prob} outside [0, 1]"
            )));
        }
        Self::new(binary_atoms(), vec![null_prob, 1.0 - null_prob])
    }

    /// Caller guarantees the invariants (used for values already produced
    /// from a validated distribution or constraint set).
    pub(crate) fn from_parts_unchecked(atoms: Vec<String>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(atoms.len(), probs.len());
        Self { atoms, probs }
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, atom: &str) -> Option<f64> {
        self.atoms
            .iter()
            .position(|a| a == atom)
            .map(|i| self.probs[i])
    }

    /// `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        ensure_same_atoms(&self.atoms, &other.atoms)?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain("lambda", lambda, "[0, 1]"));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Self::new(self.atoms.clone(), probs)
    }
}

pub fn binary_atoms() -> Vec<String> {
    vec!["0".to_string(), "1".to_string()]
}

pub(crate) fn validate_atoms(atoms: &[String]) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidDistribution("no atoms".into()));
    }
    for (i, a) in atoms.iter().enumerate() {
        if atoms[..i].contains(a) {
            return Err(Error::InvalidDistribution(format!("duplicate atom {a:?}")));
        }
    }
    Ok(())
}

pub(crate) fn ensure_same_atoms(left: &[String], right: &[String]) -> Result<()> {
    if left != right {
        return Err(Error::AtomMismatch {
            left: left.to_vec(),
            right: right.to_vec(),
        });
    }
    Ok(())
}

/// `sum p ln(p/q)` over a pair of raw probability vectors of equal length.
pub(crate) fn kl_raw(p: &[f64], q: &[f64]) -> ExtendedReal {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return ExtendedReal::PosInfinity;
        }
        total += pi * (pi / qi).ln();
    }
    // Rounding can leave a tiny negative total when p and q nearly agree.
    ExtendedReal::Finite(total.max(0.0))
}

/// Kullback-Leibler divergence `I(p || q)` in nats.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<ExtendedReal> {
    ensure_same_atoms(&p.atoms, &q.atoms)?;
    Ok(kl_raw(&p.probs, &q.probs))
}

/// Information gained by using `q` instead of `benchmark` when `p` holds:
/// `I(p || benchmark) - I(p || q)`.
pub fn inferential_gain(
    p: &FiniteDistribution,
    benchmark: &FiniteDistribution,
    q: &FiniteDistribution,
) -> Result<InferentialGain> {
    let to_benchmark = kl_divergence(p, benchmark)?;
    let to_q = kl_divergence(p, q)?;
    use ExtendedReal::*;
    Ok(match (to_benchmark, to_q) {
        (Finite(a), Finite(b)) => InferentialGain::Determinate(Finite(a - b)),
        (PosInfinity, Finite(_)) => InferentialGain::Determinate(PosInfinity),
        (Finite(_), PosInfinity) => InferentialGain::Determinate(NegInfinity),
        _ => InferentialGain::Indeterminate,
    })
}
