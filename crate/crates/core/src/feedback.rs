//! Feedback channels: what a player observes in place of its true gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Player;

/// Additive noise law. Every offered law is zero-mean with moderate tails for
/// every exponent, so no runtime check of the tail constants is made.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseKind {
    None,
    Gaussian { sigma: f64 },
    UniformBounded { half_width: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    pub kind: NoiseKind,
    /// Tail exponent the model is documented to satisfy. Informational only.
    #[serde(default = "default_kappa")]
    pub declared_kappa: f64,
}

fn default_kappa() -> f64 {
    4.0
}

impl NoiseModel {
    pub const FULL: NoiseModel = NoiseModel {
        kind: NoiseKind::None,
        declared_kappa: 4.0,
    };

    pub fn gaussian(sigma: f64) -> Self {
        Self {
            kind: NoiseKind::Gaussian { sigma },
            declared_kappa: default_kappa(),
        }
    }

    pub fn uniform(half_width: f64) -> Self {
        Self {
            kind: NoiseKind::UniformBounded { half_width },
            declared_kappa: default_kappa(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.declared_kappa > 2.0) {
            return Err(Error::invalid("declared_kappa must exceed 2"));
        }
        match self.kind {
            NoiseKind::None => Ok(()),
            NoiseKind::Gaussian { sigma } if sigma >= 0.0 && sigma.is_finite() => Ok(()),
            NoiseKind::UniformBounded { half_width } if half_width >= 0.0 && half_width.is_finite() => {
                Ok(())
            }
            _ => Err(Error::invalid(format!("bad noise parameters: {:?}", self.kind))),
        }
    }

    pub fn is_noisy(&self) -> bool {
        !matches!(self.kind, NoiseKind::None)
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::FULL
    }
}

/// Splits one master seed into (player 1, player 2, auxiliary) seeds with a
/// SplitMix64 sequence.
pub fn derive_seeds(master_seed: u64) -> (u64, u64, u64) {
    let mut state = master_seed;
    let mut next = || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    (next(), next(), next())
}

enum Sampler {
    Identity,
    Gaussian(Normal<f64>),
    Uniform(Uniform<f64>),
}

/// Produces `q̂ = q + ξ` with one independent ChaCha8 stream per player.
pub struct FeedbackChannel {
    model: NoiseModel,
    sampler: Sampler,
    streams: [ChaCha8Rng; 2],
}

impl FeedbackChannel {
    pub fn new(model: NoiseModel, master_seed: u64) -> Result<Self> {
        model.validate()?;
        let sampler = match model.kind {
            NoiseKind::None => Sampler::Identity,
            NoiseKind::Gaussian { sigma } => {
                Sampler::Gaussian(Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?)
            }
            NoiseKind::UniformBounded { half_width: 0.0 } => Sampler::Identity,
            NoiseKind::UniformBounded { half_width } => Sampler::Uniform(
                Uniform::new_inclusive(-half_width, half_width)
                    .map_err(|e| Error::invalid(e.to_string()))?,
            ),
        };
        let (s1, s2, _) = derive_seeds(master_seed);
        Ok(Self {
            model,
            sampler,
            streams: [ChaCha8Rng::seed_from_u64(s1), ChaCha8Rng::seed_from_u64(s2)],
        })
    }

    pub fn full() -> Self {
        Self::new(NoiseModel::FULL, 0).expect("identity channel")
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    /// Observation for `player` given its true gradient. Only that player's
    /// stream advances.
    pub fn observe(&mut self, true_grad: &[f64], player: Player) -> Vec<f64> {
        let mut out = true_grad.to_vec();
        self.observe_in_place(&mut out, player);
        out
    }

    pub fn observe_in_place(&mut self, grad: &mut [f64], player: Player) {
        let rng = &mut self.streams[player.index()];
        match &self.sampler {
            Sampler::Identity => {}
            Sampler::Gaussian(d) => grad.iter_mut().for_each(|q| *q += d.sample(rng)),
            Sampler::Uniform(d) => grad.iter_mut().for_each(|q| *q += d.sample(rng)),
        }
    }
}
