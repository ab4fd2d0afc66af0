//! Deterministic synthetic particle-like arrays.
//!
//! `PlantedPatterns` mimics irregular velocity data in which short runs
//! reappear shortly afterwards, shifted by a constant and perturbed by
//! small noise. Copies are block aligned, so a look-ahead sequence of `n`
//! points only finds an exact counterpart when the copy covers it with
//! matching alignment; longer sequences match less often.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SzError};

/// How far back (in points) planted copies look for their source.
pub const PLANTED_LOOKBACK: usize = 512;

// Defaults sized against the default theta (m / 2 with m = 1024, p = 0.5):
// random 8-point windows fall under it, random 32-point windows do not.
const NOISE: f64 = 0.3;
const SPREAD: f64 = 20.0;
const REPEAT: f64 = 0.7;
/// Probability that a copy extends by one more block.
const COPY_CONTINUE: f64 = 0.85;
/// AR(1) coefficient of the block level.
const LEVEL_MEMORY: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// Each value drawn from one of several Gaussians picked by weight.
    Mixture {
        components: Vec<MixtureComponent>,
    },
    PlantedPatterns {
        /// Block size in points; copies are whole blocks.
        pattern_len: usize,
        /// Probability that a block starts a copy of earlier data.
        repeat_prob: f64,
        /// Standard deviation of per-point noise added to copies.
        noise_sigma: f64,
        /// Standard deviation of fresh points around the slowly drifting level.
        spread: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Generator {
    pub fn gaussian() -> Self {
        Generator::Gaussian {
            mu: 0.0,
            sigma: 100.0,
        }
    }

    /// Three-component mixture loosely shaped like a velocity distribution
    /// with a bulk and two streams.
    pub fn mixture() -> Self {
        Generator::Mixture {
            components: vec![
                MixtureComponent { weight: 0.6, mu: 0.0, sigma: 80.0 },
                MixtureComponent { weight: 0.25, mu: 300.0, sigma: 40.0 },
                MixtureComponent { weight: 0.15, mu: -450.0, sigma: 120.0 },
            ],
        }
    }

    pub fn planted() -> Self {
        Generator::PlantedPatterns {
            pattern_len: 8,
            repeat_prob: REPEAT,
            noise_sigma: NOISE,
            spread: SPREAD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub count: usize,
    pub generator: Generator,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(count: usize, generator: Generator, seed: u64) -> Self {
        Self {
            count,
            generator,
            seed,
        }
    }
}

fn normal(mu: f64, sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0 && sigma.is_finite() && mu.is_finite()) {
        return Err(SzError::invalid(format!("bad normal({mu}, {sigma})")));
    }
    Normal::new(mu, sigma).map_err(|e| SzError::invalid(format!("bad normal({mu}, {sigma}): {e}")))
}

/// Generates the array described by `spec`; the same spec always yields
/// the same values.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match &spec.generator {
        Generator::Gaussian { mu, sigma } => {
            let d = normal(*mu, *sigma)?;
            Ok((0..spec.count).map(|_| d.sample(&mut rng) as f32).collect())
        }
        Generator::Mixture { components } => mixture(spec.count, components, &mut rng),
        Generator::PlantedPatterns {
            pattern_len,
            repeat_prob,
            noise_sigma,
            spread,
        } => planted(spec.count, *pattern_len, *repeat_prob, *noise_sigma, *spread, &mut rng),
    }
}

fn mixture(count: usize, components: &[MixtureComponent], rng: &mut ChaCha8Rng) -> Result<Vec<f32>> {
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if components.is_empty() || !(total > 0.0) || components.iter().any(|c| c.weight < 0.0) {
        return Err(SzError::invalid("mixture needs non-negative weights with a positive sum"));
    }
    let dists = components
        .iter()
        .map(|c| normal(c.mu, c.sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..count)
        .map(|_| {
            let mut u = rng.random::<f64>() * total;
            let mut k = 0;
            while k + 1 < components.len() && u >= components[k].weight {
                u -= components[k].weight;
                k += 1;
            }
            dists[k].sample(rng) as f32
        })
        .collect())
}

fn planted(
    count: usize,
    pattern_len: usize,
    repeat_prob: f64,
    noise_sigma: f64,
    spread: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f32>> {
    if pattern_len == 0 || pattern_len > PLANTED_LOOKBACK {
        return Err(SzError::invalid(format!(
            "pattern_len must be in 1..={PLANTED_LOOKBACK}"
        )));
    }
    if !(0.0..=1.0).contains(&repeat_prob) {
        return Err(SzError::invalid("repeat_prob must be in [0, 1]"));
    }
    let fresh = normal(0.0, spread)?;
    let drift = normal(0.0, spread)?;
    let noise = normal(0.0, noise_sigma)?;
    let max_blocks = PLANTED_LOOKBACK / pattern_len;

    let mut out: Vec<f64> = Vec::with_capacity(count + PLANTED_LOOKBACK);
    // level of every block, so copies can be re-based onto the current one
    let mut levels: Vec<f64> = Vec::new();
    let mut level = 0.0f64;
    while out.len() < count {
        let available = levels.len();
        if available > 0 && rng.random::<f64>() < repeat_prob {
            // Copy 1 or more whole blocks (geometric length) from recent history.
            let mut blocks = 1;
            while blocks < max_blocks.min(available) && rng.random::<f64>() < COPY_CONTINUE {
                blocks += 1;
            }
            let earliest = available.saturating_sub(max_blocks);
            let src_block = rng.random_range(earliest..=available - blocks);
            let shift = level - levels[src_block];
            for b in src_block..src_block + blocks {
                let src = b * pattern_len;
                for k in 0..pattern_len {
                    let v = out[src + k] + shift + noise.sample(rng);
                    out.push(v);
                }
                levels.push(levels[b] + shift);
            }
            // carry on from where the copy ended
            level = levels[levels.len() - 1];
        } else {
            for _ in 0..pattern_len {
                out.push(level + fresh.sample(rng));
            }
            levels.push(level);
        }
        level = LEVEL_MEMORY * level + drift.sample(rng);
    }
    out.truncate(count);
    Ok(out.into_iter().map(|v| v as f32).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        for g in [Generator::gaussian(), Generator::mixture(), Generator::planted()] {
            let a = generate(&SyntheticSpec::new(5000, g.clone(), 1)).unwrap();
            let b = generate(&SyntheticSpec::new(5000, g.clone(), 1)).unwrap();
            let c = generate(&SyntheticSpec::new(5000, g, 2)).unwrap();
            assert_eq!(a.len(), 5000);
            assert_eq!(a, b);
            assert_ne!(a, c);
            assert!(a.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn gaussian_moments() {
        let v = generate(&SyntheticSpec::new(
            100_000,
            Generator::Gaussian { mu: 5.0, sigma: 2.0 },
            7,
        ))
        .unwrap();
        let mean = v.iter().map(|&x| f64::from(x)).sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|&x| (f64::from(x) - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!((mean - 5.0).abs() < 0.05);
        assert!((var.sqrt() - 2.0).abs() < 0.05);
    }

    #[test]
    fn planted_copies_are_shifted_repeats() {
        let v = generate(&SyntheticSpec::new(
            4096,
            Generator::PlantedPatterns {
                pattern_len: 8,
                repeat_prob: 1.0,
                noise_sigma: 0.0,
                spread: 10.0,
            },
            3,
        ))
        .unwrap();
        // With certain repetition and no noise, every block after the first
        // is an earlier block plus a constant.
        let block = |i: usize| &v[i * 8..i * 8 + 8];
        for b in 1..v.len() / 8 {
            let found = (b.saturating_sub(64)..b).any(|s| {
                let d = f64::from(block(b)[0]) - f64::from(block(s)[0]);
                block(b)
                    .iter()
                    .zip(block(s))
                    .all(|(&x, &y)| (f64::from(x) - f64::from(y) - d).abs() < 1e-2)
            });
            assert!(found, "block {b} has no source");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = Generator::PlantedPatterns { pattern_len: 0, repeat_prob: 0.5, noise_sigma: 0.1, spread: 1.0 };
        assert!(generate(&SyntheticSpec::new(10, bad, 0)).is_err());
        let bad = Generator::PlantedPatterns { pattern_len: 8, repeat_prob: 1.5, noise_sigma: 0.1, spread: 1.0 };
        assert!(generate(&SyntheticSpec::new(10, bad, 0)).is_err());
        let bad = Generator::Gaussian { mu: 0.0, sigma: -1.0 };
        assert!(generate(&SyntheticSpec::new(10, bad, 0)).is_err());
        let bad = Generator::Mixture { components: vec![] };
        assert!(generate(&SyntheticSpec::new(10, bad, 0)).is_err());
    }
}
