//! Named experiment settings for the figures of the evaluation.
//!
//! Every preset comes in two scales. [`Scale::Paper`] uses 100 seeds and the
//! full horizon. [`Scale::Desk`] (the default) uses 10 seeds and a horizon
//! five times shorter.
//!
//! Initial strategies are drawn uniformly from the simplex interior for BRPS
//! and M-Ne under full feedback, and are uniform in every other setting.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::feedback::NoiseModel;
use crate::learners::Schedule;

use super::config::{ExperimentConfig, FeedbackKind, GameKind, InitKind, LearnerConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl Scale {
    fn seeds(self) -> Vec<u64> {
        match self {
            Scale::Desk => (0..10).collect(),
            Scale::Paper => (0..100).collect(),
        }
    }

    fn iterations(self, paper: u64) -> u64 {
        match self {
            Scale::Desk => paper / 5,
            Scale::Paper => paper,
        }
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4a", "fig4b", "fig4c", "fig4d", "fig5", "fig6",
    "fig7", "fig8a", "fig8b",
];

const FULL_ETA: f64 = 0.1;
const FULL_MU: f64 = 0.1;
const FULL_N: u64 = 100;
const FULL_T: u64 = 100_000;

const NOISY_ETA: f64 = 0.001;
const NOISY_SIGMA: f64 = 0.1;
const NOISY_MU_F: f64 = 0.1;
const NOISY_MU_A: f64 = 0.5;
const NOISY_N: u64 = 20_000;
const NOISY_T: u64 = 1_000_000;

const ETA_SWEEP: [f64; 5] = [0.1, 0.05, 0.01, 0.005, 0.001];

fn four(mu_f: f64, mu_a: f64, n: u64) -> Vec<LearnerConfig> {
    vec![
        LearnerConfig::mwu(),
        LearnerConfig::omwu(),
        LearnerConfig::m2wu(mu_f, 0),
        LearnerConfig::m2wu(mu_a, n),
    ]
}

fn base(name: &str, game: GameKind, size: Option<usize>, scale: Scale) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        game,
        game_size: size,
        iterations: 1,
        record_every: None,
        seeds: scale.seeds(),
        init: InitKind::Uniform,
        feedback: FeedbackKind::Full,
        noise: None,
        keep_strategies: false,
        track_stationary: false,
        per_seed_csv: true,
        output_path: PathBuf::from("out").join(name),
        schedule: Schedule::constant(FULL_ETA),
        learners: Vec::new(),
    }
}

fn full(name: &str, game: GameKind, size: Option<usize>, scale: Scale) -> ExperimentConfig {
    let mut c = base(name, game, size, scale);
    c.iterations = scale.iterations(FULL_T);
    if matches!(game, GameKind::Brps | GameKind::Mne) {
        c.init = InitKind::Random;
    }
    c.learners = four(FULL_MU, FULL_MU, FULL_N);
    c
}

fn noisy(name: &str, game: GameKind, size: Option<usize>, scale: Scale) -> ExperimentConfig {
    let mut c = base(name, game, size, scale);
    c.iterations = scale.iterations(NOISY_T);
    c.feedback = FeedbackKind::Noisy;
    c.noise = Some(NoiseModel::gaussian(NOISY_SIGMA));
    c.schedule = Schedule::constant(NOISY_ETA);
    c.learners = four(NOISY_MU_F, NOISY_MU_A, NOISY_N);
    c
}

fn eta_sweep(name: &str, game: GameKind, scale: Scale) -> ExperimentConfig {
    let mut c = noisy(name, game, None, scale);
    c.learners = ETA_SWEEP
        .iter()
        .flat_map(|&eta| {
            four(NOISY_MU_F, NOISY_MU_A, NOISY_N).into_iter().map(move |l| {
                let label = format!("{}_eta{eta}", l.label());
                l.with_eta0(eta).with_label(label)
            })
        })
        .collect();
    c
}

fn decayed(name: &str, game: GameKind, scale: Scale) -> ExperimentConfig {
    let mut c = noisy(name, game, None, scale);
    // t^(-3/4) counted from t = 1
    c.schedule = Schedule::Power {
        eta0: 1.0,
        lambda: 0.75,
    };
    c
}

/// Resolves a preset name. `fig8` is accepted as an alias of `fig8a`.
pub fn preset(name: &str, scale: Scale) -> Result<ExperimentConfig> {
    use GameKind::*;
    let cfg = match name {
        "fig2a" => full(name, Brps, None, scale),
        "fig2b" => full(name, Mne, None, scale),
        "fig2c" => full(name, Random, Some(25), scale),
        "fig2d" => full(name, Random, Some(100), scale),
        "fig3" => {
            let mut c = full(name, Brps, None, scale);
            c.learners = [0.1, 0.01]
                .iter()
                .flat_map(|&mu| {
                    [0.1, 0.01, 0.001].into_iter().map(move |eta| {
                        LearnerConfig::m2wu(mu, 0)
                            .with_eta0(eta)
                            .with_label(format!("m2wu-f_mu{mu}_eta{eta}"))
                    })
                })
                .collect();
            c
        }
        "fig4a" => noisy(name, Brps, None, scale),
        "fig4b" => noisy(name, Mne, None, scale),
        "fig4c" => noisy(name, Random, Some(25), scale),
        "fig4d" => noisy(name, Random, Some(100), scale),
        // strategy trajectories of a single noisy BRPS run
        "fig5" => {
            let mut c = noisy(name, Brps, None, scale);
            c.seeds = vec![0];
            c.keep_strategies = true;
            c
        }
        "fig6" => eta_sweep(name, Brps, scale),
        "fig7" => eta_sweep(name, Mne, scale),
        "fig8" | "fig8a" => decayed("fig8a", Brps, scale),
        "fig8b" => decayed(name, Mne, scale),
        _ => {
            return Err(Error::Config(format!(
                "unknown preset {name:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::Algorithm;

    #[test]
    fn every_preset_resolves_and_round_trips() {
        for scale in [Scale::Desk, Scale::Paper] {
            for name in PRESET_NAMES.iter().chain(&["fig8"]) {
                let c = preset(name, scale).unwrap();
                assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c, "{name}");
            }
        }
        assert!(preset("fig9", Scale::Desk).is_err());
    }

    #[test]
    fn settings() {
        let a = preset("fig2a", Scale::Paper).unwrap();
        assert_eq!(a.seeds.len(), 100);
        assert_eq!(a.init, InitKind::Random);
        assert_eq!(a.schedule, Schedule::constant(0.1));
        let algos: Vec<_> = a.learners.iter().map(|l| l.algorithm().unwrap()).collect();
        assert_eq!(
            algos,
            [Algorithm::Mwu, Algorithm::Omwu, Algorithm::m2wu_fixed(0.1), Algorithm::m2wu_adaptive(0.1, 100)]
        );

        let d = preset("fig4a", Scale::Desk).unwrap();
        assert_eq!((d.iterations, d.seeds.len()), (200_000, 10));
        assert_eq!(d.init, InitKind::Uniform);
        assert_eq!(d.noise_model(), NoiseModel::gaussian(0.1));
        assert_eq!(d.learners[3].algorithm().unwrap(), Algorithm::m2wu_adaptive(0.5, 20_000));

        assert_eq!(preset("fig2c", Scale::Desk).unwrap().init, InitKind::Uniform);
        assert_eq!(preset("fig3", Scale::Desk).unwrap().learners.len(), 6);
        assert_eq!(preset("fig6", Scale::Desk).unwrap().learners.len(), 20);
        let f8 = preset("fig8", Scale::Desk).unwrap();
        assert_eq!(f8.name, "fig8a");
        assert_eq!(f8.schedule.eta(0), 1.0);
    }
}
