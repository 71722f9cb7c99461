//! Browser bindings for the demo page in `www/`.
//!
//! Each exported function has a plain Rust twin returning `Result<_, String>`
//! so the logic can be tested natively; the wasm wrappers only convert errors.

use m2wu::dynamics::{integrate, solve_stationary, OdeConfig};
use m2wu::harness::GameKind;
use m2wu::{run, Algorithm, FeedbackChannel, NoiseModel, RunSpec, Schedule, StrategyProfile};
use wasm_bindgen::prelude::*;

const LABELS: [&str; 4] = ["mwu", "omwu", "m2wu-f", "m2wu-a"];

/// Largest run the page may request; keeps the tab responsive.
pub const MAX_ITERATIONS: u64 = 2_000_000;

fn fixed_game(name: &str) -> Result<(GameKind, m2wu::GameMatrix), String> {
    let kind = GameKind::parse(name).map_err(|e| e.to_string())?;
    let game = kind.fixed().ok_or("the demo only supports brps, brps_fig1 and mne")?;
    Ok((kind, game))
}

/// Exploitability-vs-t curves for all four learners on one game.
#[wasm_bindgen]
pub struct Curves {
    t: Vec<f64>,
    series: Vec<Vec<f64>>,
    failed: Vec<bool>,
}

#[wasm_bindgen]
impl Curves {
    pub fn count(&self) -> usize {
        self.series.len()
    }

    pub fn label(&self, i: usize) -> String {
        LABELS.get(i).copied().unwrap_or("").to_string()
    }

    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    /// Exploitability at each `t`; truncated where the run diverged.
    pub fn series(&self, i: usize) -> Vec<f64> {
        self.series.get(i).cloned().unwrap_or_default()
    }

    pub fn failed(&self, i: usize) -> bool {
        self.failed.get(i).copied().unwrap_or(false)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn curves_native(
    game: &str,
    sigma: f64,
    eta: f64,
    mu: f64,
    update_freq: u64,
    iterations: u64,
    points: u64,
    seed: u64,
) -> Result<Curves, String> {
    let (_, g) = fixed_game(game)?;
    if iterations == 0 || iterations > MAX_ITERATIONS {
        return Err(format!("iterations must be in 1..={MAX_ITERATIONS}"));
    }
    let algos = [
        Algorithm::Mwu,
        Algorithm::Omwu,
        Algorithm::m2wu_fixed(mu),
        Algorithm::m2wu_adaptive(mu, update_freq),
    ];
    let model = if sigma > 0.0 { NoiseModel::gaussian(sigma) } else { NoiseModel::default() };
    let record_every = (iterations / points.max(1)).max(1);
    let mut t = Vec::new();
    let mut series = Vec::new();
    let mut failed = Vec::new();
    for algo in algos {
        algo.validate().map_err(|e| e.to_string())?;
        let mut spec = RunSpec::new(algo, Schedule::constant(eta), iterations, StrategyProfile::uniform(&g));
        spec.record_every = record_every;
        let channel = FeedbackChannel::new(model, seed).map_err(|e| e.to_string())?;
        match run(&g, &spec, channel) {
            Ok(trace) => {
                if t.is_empty() {
                    t = trace.records.iter().map(|r| r.t as f64).collect();
                }
                series.push(trace.records.iter().map(|r| r.exploitability).collect());
                failed.push(false);
            }
            Err(m2wu::Error::Diverged { .. }) => {
                series.push(Vec::new());
                failed.push(true);
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(Curves { t, series, failed })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn curves(
    game: &str,
    sigma: f64,
    eta: f64,
    mu: f64,
    update_freq: u32,
    iterations: u32,
    points: u32,
    seed: u32,
) -> Result<Curves, JsError> {
    curves_native(game, sigma, eta, mu, update_freq as u64, iterations as u64, points as u64, seed as u64)
        .map_err(|e| JsError::new(&e))
}

/// Player 1's RMD path from `start` (three probabilities) on a 3x3 game,
/// flattened as `[p(0), p(1), p(2)]` per sample.
pub fn trajectory_native(game: &str, mu: f64, start: &[f64], t_end: f64, samples: usize) -> Result<Vec<f64>, String> {
    let (_, g) = fixed_game(game)?;
    if g.rows() != 3 || g.cols() != 3 {
        return Err("trajectories are drawn for 3x3 games only".into());
    }
    let p = m2wu::Strategy::from_weights(start).map_err(|e| e.to_string())?;
    let init = StrategyProfile::new(p.clone(), p);
    let uniform = StrategyProfile::uniform(&g);
    let cfg = OdeConfig::new(0.01, t_end).map_err(|e| e.to_string())?;
    let path = integrate(&g, &init, mu, &uniform, &cfg).map_err(|e| e.to_string())?;
    let stride = (path.len() / samples.max(1)).max(1);
    let mut out = Vec::new();
    for (i, (_, prof)) in path.iter().enumerate() {
        if i % stride == 0 || i + 1 == path.len() {
            out.extend_from_slice(prof.p1.probs());
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn trajectory(game: &str, mu: f64, start: &[f64], t_end: f64, samples: u32) -> Result<Vec<f64>, JsError> {
    trajectory_native(game, mu, start, t_end, samples as usize).map_err(|e| JsError::new(&e))
}

/// Stationary points for each `mu` with a uniform reference, flattened as
/// `[mu, exploitability, p1..., p2...]` per entry.
pub fn stationary_native(game: &str, mus: &[f64]) -> Result<Vec<f64>, String> {
    let (_, g) = fixed_game(game)?;
    let uniform = StrategyProfile::uniform(&g);
    let mut out = Vec::new();
    for &mu in mus {
        let sp = solve_stationary(&g, mu, &uniform, 1e-10, 5_000_000).map_err(|e| e.to_string())?;
        let e = g.exploitability(&sp.profile).map_err(|e| e.to_string())?;
        out.push(mu);
        out.push(e);
        out.extend_from_slice(sp.profile.p1.probs());
        out.extend_from_slice(sp.profile.p2.probs());
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn stationary(game: &str, mus: &[f64]) -> Result<Vec<f64>, JsError> {
    stationary_native(game, mus).map_err(|e| JsError::new(&e))
}

/// Row and column counts of a named game.
#[wasm_bindgen]
pub fn game_shape(game: &str) -> Vec<u32> {
    fixed_game(game).map(|(_, g)| vec![g.rows() as u32, g.cols() as u32]).unwrap_or_default()
}
