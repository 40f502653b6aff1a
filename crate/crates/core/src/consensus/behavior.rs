use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::PROOF_RANGE_HZ;
use crate::error::{Error, Result};

/// What a validator submits each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Behavior {
    /// The true ENF plus Gaussian observation noise of this std (Hz).
    Honest(f64),
    /// Uniform draws over the admissible proof range.
    RandomVector,
    /// The true ENF shifted by this many Hz, clipped to the admissible range.
    OffsetVector(f64),
    /// A fixed vector, submitted verbatim.
    ColludingClone(Vec<f64>),
    /// Withholds its transaction.
    Silent,
}

impl Behavior {
    pub fn is_honest(&self) -> bool {
        matches!(self, Behavior::Honest(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Behavior::Honest(s) if !(*s >= 0.0 && s.is_finite()) => {
                Err(Error::config(format!("honest noise std must be non-negative, got {s}")))
            }
            Behavior::OffsetVector(d) if !d.is_finite() => Err(Error::config("offset must be finite")),
            _ => Ok(()),
        }
    }

    /// Stretches a one-value clone to `d` entries; other behaviors are
    /// returned unchanged.
    pub fn resized(self, d: usize) -> Self {
        match self {
            Behavior::ColludingClone(v) if v.len() == 1 => Behavior::ColludingClone(vec![v[0]; d]),
            other => other,
        }
    }

    /// The proof this validator broadcasts given the round's true ENF, or
    /// `None` when it stays silent.
    pub fn proof<R: Rng>(&self, truth: &[f64], nominal_hz: f64, rng: &mut R) -> Option<Vec<f64>> {
        let (lo, hi) = (nominal_hz - PROOF_RANGE_HZ, nominal_hz + PROOF_RANGE_HZ);
        match self {
            Behavior::Honest(std) => {
                if *std == 0.0 {
                    return Some(truth.to_vec());
                }
                let noise = Normal::new(0.0, *std).expect("validated std");
                Some(truth.iter().map(|v| v + noise.sample(rng)).collect())
            }
            Behavior::RandomVector => Some(truth.iter().map(|_| rng.random_range(lo..=hi)).collect()),
            Behavior::OffsetVector(delta) => Some(truth.iter().map(|v| (v + delta).clamp(lo, hi)).collect()),
            Behavior::ColludingClone(v) => Some(v.clone()),
            Behavior::Silent => None,
        }
    }
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Behavior::Honest(s) => write!(f, "honest:{s}"),
            Behavior::RandomVector => write!(f, "random"),
            Behavior::OffsetVector(d) => write!(f, "offset:{d}"),
            Behavior::ColludingClone(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "clone:{}", parts.join(","))
            }
            Behavior::Silent => write!(f, "silent"),
        }
    }
}

/// Parses `honest:<std>`, `random`, `offset:<hz>`, `clone:<hz>[,<hz>...]`
/// or `silent`. A clone given a single value repeats it to any length via
/// [`Behavior::resized`].
impl FromStr for Behavior {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::config(format!("behavior '{s}' needs a numeric argument")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::config(format!("behavior '{s}': {e}")))
        };
        let b = match head.trim() {
            "honest" => Behavior::Honest(num(arg)?),
            "random" => Behavior::RandomVector,
            "offset" => Behavior::OffsetVector(num(arg)?),
            "clone" => {
                let a = arg.ok_or_else(|| Error::config("clone needs a vector"))?;
                let v = a
                    .split(',')
                    .map(|x| num(Some(x)))
                    .collect::<Result<Vec<f64>>>()?;
                Behavior::ColludingClone(v)
            }
            "silent" => Behavior::Silent,
            other => return Err(Error::config(format!("unknown behavior '{other}'"))),
        };
        b.validate()?;
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips() {
        for s in ["honest:0.001", "random", "offset:1", "clone:60.5,60.5", "silent"] {
            let b: Behavior = s.parse().unwrap();
            assert_eq!(b.to_string().parse::<Behavior>().unwrap(), b);
        }
        assert!("offset".parse::<Behavior>().is_err());
        assert!("honest:-1".parse::<Behavior>().is_err());
        assert!("chaos".parse::<Behavior>().is_err());
        assert_eq!(
            "clone:61".parse::<Behavior>().unwrap().resized(3),
            Behavior::ColludingClone(vec![61.0; 3])
        );
    }

    #[test]
    fn random_vector_stays_in_range() {
        let mut rng = crate::seed::rng_for(3, &[]);
        let truth = vec![60.0; 500];
        let v = Behavior::RandomVector.proof(&truth, 60.0, &mut rng).unwrap();
        assert!(v.iter().all(|x| (59.0..=61.0).contains(x)));
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1.5);
    }

    #[test]
    fn offset_is_exact_and_clipped() {
        let mut rng = crate::seed::rng_for(3, &[]);
        let truth = vec![60.25, 59.75, 60.5];
        let v = Behavior::OffsetVector(1.0).proof(&truth, 60.0, &mut rng).unwrap();
        assert_eq!(v, vec![61.0, 60.75, 61.0]);
        assert_eq!(Behavior::Silent.proof(&truth, 60.0, &mut rng), None);
        assert_eq!(Behavior::Honest(0.0).proof(&truth, 60.0, &mut rng).unwrap(), truth);
    }
}
