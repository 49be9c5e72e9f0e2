//! Random streams and the distribution family used for arrivals, service
//! times and network round trips.
//!
//! Every distribution is described declaratively by a [`DistributionSpec`].
//! A spec is validated once by [`DistributionSpec::sampler`], after which the
//! returned [`Sampler`] draws variates from a caller-owned [`RandomStream`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

// Gamma derivation from SplittableRandom: odd, with enough bit transitions
// that the Weyl sequence is well mixed.
fn mix_gamma(z: u64) -> u64 {
    let mut z = (z ^ (z >> 33)).wrapping_mul(0xff51_afd7_ed55_8ccd);
    z = (z ^ (z >> 33)).wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    z = (z ^ (z >> 33)) | 1;
    if (z ^ (z >> 1)).count_ones() < 24 {
        z ^= 0xaaaa_aaaa_aaaa_aaaa;
    }
    z
}

/// A SplitMix64 generator addressed by `(seed, stream_id)`.
///
/// The pair determines both the starting state and the Weyl increment, so
/// distinct stream ids under one root seed walk distinct sequences. A stream
/// is single-owner mutable state and must not be shared between consumers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    state: u64,
    gamma: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let id_key = mix64(stream_id.wrapping_add(GOLDEN_GAMMA));
        let state = mix64(seed ^ id_key);
        let gamma = mix_gamma(seed.wrapping_mul(GOLDEN_GAMMA) ^ id_key);
        Self { state, gamma }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.gamma);
        mix64(self.state)
    }

    /// Uniform on `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, safe to pass to `ln`.
    fn next_open_unit(&mut self) -> f64 {
        1.0 - self.next_f64()
    }

    fn standard_exponential(&mut self) -> f64 {
        -self.next_open_unit().ln()
    }

    // Marsaglia polar method; the second variate of each pair is discarded so
    // that the stream carries no hidden state.
    fn standard_normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

/// Derives a child seed, e.g. one per replication, from a root seed.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    RandomStream::new(root, index ^ 0x5eed_0000_0000_0000).next_u64()
}

/// Mean and squared coefficient of variation of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub scv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Exponential { rate: f64 },
    /// A point mass; `value` may be zero (e.g. a zero network RTT).
    Deterministic { value: f64 },
    /// Sum of `phases` exponentials, each with the given `rate`.
    Erlang { phases: u32, rate: f64 },
    /// Exponential with `rate1` w.p. `p`, otherwise exponential with `rate2`.
    HyperExp2 { p: f64, rate1: f64, rate2: f64 },
    /// `exp(N(location, scale²))`.
    LogNormal { location: f64, scale: f64 },
    /// Resamples uniformly from the given observations.
    Empirical { samples: Vec<f64> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl DistributionSpec {
    pub fn exponential(rate: f64) -> Self {
        Self::Exponential { rate }
    }

    pub fn deterministic(value: f64) -> Self {
        Self::Deterministic { value }
    }

    pub fn erlang(phases: u32, rate: f64) -> Self {
        Self::Erlang { phases, rate }
    }

    pub fn hyperexp2(p: f64, rate1: f64, rate2: f64) -> Self {
        Self::HyperExp2 { p, rate1, rate2 }
    }

    pub fn lognormal(location: f64, scale: f64) -> Self {
        Self::LogNormal { location, scale }
    }

    /// Lognormal with the given mean and squared coefficient of variation.
    pub fn lognormal_with_moments(mean: f64, scv: f64) -> Result<Self> {
        positive("mean", mean)?;
        positive("scv", scv)?;
        let sigma2 = scv.ln_1p();
        Ok(Self::LogNormal {
            location: mean.ln() - sigma2 / 2.0,
            scale: sigma2.sqrt(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Exponential { rate } => positive("exponential rate", *rate),
            Self::Deterministic { value } => {
                if value.is_finite() && *value >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::config(format!(
                        "deterministic value must be finite and >= 0, got {value}"
                    )))
                }
            }
            Self::Erlang { phases, rate } => {
                if *phases == 0 {
                    return Err(Error::config("erlang phases must be >= 1"));
                }
                positive("erlang rate", *rate)
            }
            Self::HyperExp2 { p, rate1, rate2 } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::config(format!(
                        "hyperexp2 probability must lie in (0, 1), got {p}"
                    )));
                }
                positive("hyperexp2 rate1", *rate1)?;
                positive("hyperexp2 rate2", *rate2)
            }
            Self::LogNormal { location, scale } => {
                if !location.is_finite() {
                    return Err(Error::config("lognormal location must be finite"));
                }
                positive("lognormal scale", *scale)
            }
            Self::Empirical { samples } => {
                if samples.is_empty() {
                    return Err(Error::config("empirical distribution needs samples"));
                }
                match samples.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
                    Some(bad) => Err(Error::config(format!(
                        "empirical samples must be finite and >= 0, got {bad}"
                    ))),
                    None => Ok(()),
                }
            }
        }
    }

    /// Closed-form mean and squared coefficient of variation.
    ///
    /// Empirical specs report the moments of the resampling distribution,
    /// i.e. the sample mean and the population variance of the samples.
    pub fn moments(&self) -> Result<Moments> {
        self.validate()?;
        let m = match self {
            Self::Exponential { rate } => Moments {
                mean: 1.0 / rate,
                scv: 1.0,
            },
            Self::Deterministic { value } => Moments {
                mean: *value,
                scv: 0.0,
            },
            Self::Erlang { phases, rate } => Moments {
                mean: f64::from(*phases) / rate,
                scv: 1.0 / f64::from(*phases),
            },
            Self::HyperExp2 { p, rate1, rate2 } => {
                let mean = p / rate1 + (1.0 - p) / rate2;
                let second = 2.0 * p / (rate1 * rate1) + 2.0 * (1.0 - p) / (rate2 * rate2);
                Moments {
                    mean,
                    scv: second / (mean * mean) - 1.0,
                }
            }
            Self::LogNormal { location, scale } => {
                let s2 = scale * scale;
                Moments {
                    mean: (location + s2 / 2.0).exp(),
                    scv: s2.exp_m1(),
                }
            }
            Self::Empirical { samples } => {
                if samples.len() < 2 {
                    return Err(Error::config(
                        "empirical moments need at least 2 samples",
                    ));
                }
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                if mean <= 0.0 {
                    return Err(Error::config("empirical samples have zero mean"));
                }
                let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
                Moments {
                    mean,
                    scv: var / (mean * mean),
                }
            }
        };
        Ok(m)
    }

    pub fn mean(&self) -> Result<f64> {
        self.moments().map(|m| m.mean)
    }

    /// Validates the distribution and returns a sampler for it.
    pub fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(Sampler(self.clone()))
    }

    /// Draws one variate. Prefer [`DistributionSpec::sampler`] in loops.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<f64> {
        Ok(self.sampler()?.sample(stream))
    }
}

/// Matches a mean and squared coefficient of variation with the simplest
/// family member:
///
/// * `scv == 1`: exponential;
/// * `scv < 1`: Erlang with `round(1/scv)` phases (mean exact, scv rounded);
/// * `scv > 1`: balanced-means two-phase hyperexponential (both exact).
pub fn fit_scv(mean: f64, scv: f64) -> Result<DistributionSpec> {
    positive("mean", mean)?;
    positive("scv", scv)?;
    if (scv - 1.0).abs() <= 1e-12 {
        return Ok(DistributionSpec::exponential(1.0 / mean));
    }
    if scv < 1.0 {
        let phases = (1.0 / scv).round().max(1.0);
        if phases > f64::from(u32::MAX) {
            return Err(Error::config(format!("scv {scv} needs too many Erlang phases")));
        }
        let phases = phases as u32;
        if phases == 1 {
            return Ok(DistributionSpec::exponential(1.0 / mean));
        }
        return Ok(DistributionSpec::erlang(phases, f64::from(phases) / mean));
    }
    let p = 0.5 * (1.0 + ((scv - 1.0) / (scv + 1.0)).sqrt());
    Ok(DistributionSpec::hyperexp2(
        p,
        2.0 * p / mean,
        2.0 * (1.0 - p) / mean,
    ))
}

/// A validated distribution ready for repeated draws.
#[derive(Debug, Clone)]
pub struct Sampler(DistributionSpec);

impl Sampler {
    pub fn spec(&self) -> &DistributionSpec {
        &self.0
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match &self.0 {
            DistributionSpec::Exponential { rate } => stream.standard_exponential() / rate,
            DistributionSpec::Deterministic { value } => *value,
            DistributionSpec::Erlang { phases, rate } => {
                let sum: f64 = (0..*phases).map(|_| stream.standard_exponential()).sum();
                sum / rate
            }
            DistributionSpec::HyperExp2 { p, rate1, rate2 } => {
                let rate = if stream.next_f64() < *p { rate1 } else { rate2 };
                stream.standard_exponential() / rate
            }
            DistributionSpec::LogNormal { location, scale } => {
                (location + scale * stream.standard_normal()).exp()
            }
            DistributionSpec::Empirical { samples } => {
                let idx = (stream.next_f64() * samples.len() as f64) as usize;
                samples[idx.min(samples.len() - 1)]
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, values: &[f64]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(")")
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write_list(f, "exp", &[*rate]),
            Self::Deterministic { value } => write_list(f, "det", &[*value]),
            Self::Erlang { phases, rate } => write!(f, "erlang({phases},{rate})"),
            Self::HyperExp2 { p, rate1, rate2 } => write_list(f, "hyperexp2", &[*p, *rate1, *rate2]),
            Self::LogNormal { location, scale } => write_list(f, "lognormal", &[*location, *scale]),
            Self::Empirical { samples } => write_list(f, "empirical", samples),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses the canonical text form, e.g. `exp(12.0)` or `erlang(4, 48)`.
    /// Names are case-insensitive and whitespace is ignored anywhere.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_lowercase();
        let bad = |why: &str| Error::config(format!("cannot parse distribution `{s}`: {why}"));
        let open = compact.find('(').ok_or_else(|| bad("expected `name(args)`"))?;
        let args = compact[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| bad("missing closing parenthesis"))?;
        let name = &compact[..open];
        let values: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.parse::<f64>().map_err(|_| bad(&format!("`{a}` is not a number"))))
                .collect::<Result<_>>()?
        };
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("`{name}` takes {n} argument(s), got {}", values.len())))
            }
        };
        let spec = match name {
            "exp" | "exponential" => {
                arity(1)?;
                Self::exponential(values[0])
            }
            "det" | "deterministic" | "const" => {
                arity(1)?;
                Self::deterministic(values[0])
            }
            "erlang" => {
                arity(2)?;
                let phases = values[0];
                if phases.fract() != 0.0 || phases < 1.0 || phases > f64::from(u32::MAX) {
                    return Err(bad("erlang phases must be a positive integer"));
                }
                Self::erlang(phases as u32, values[1])
            }
            "hyperexp2" | "h2" => {
                arity(3)?;
                Self::hyperexp2(values[0], values[1], values[2])
            }
            "lognormal" | "lognorm" => {
                arity(2)?;
                Self::lognormal(values[0], values[1])
            }
            "empirical" => Self::Empirical { samples: values },
            other => return Err(bad(&format!("unknown distribution `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
