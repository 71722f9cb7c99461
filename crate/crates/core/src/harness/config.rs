//! Experiment configuration: TOML file format, validation and overrides.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::NoiseModel;
use crate::game::{brps_fig1_nash, brps_nash, make_brps, make_brps_fig1, make_mne, make_random};
use crate::game::{GameMatrix, StrategyProfile};
use crate::learners::{Algorithm, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameKind {
    Brps,
    BrpsFig1,
    Mne,
    /// `game_size × game_size` with i.i.d. standard normal payoffs, redrawn
    /// per seed.
    Random,
}

impl GameKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "brps" => Ok(GameKind::Brps),
            "brps_fig1" => Ok(GameKind::BrpsFig1),
            "mne" => Ok(GameKind::Mne),
            "random" => Ok(GameKind::Random),
            _ => Err(Error::Config(format!(
                "unknown game {s:?} (expected brps, brps_fig1, mne or random)"
            ))),
        }
    }

    /// Fixed games only; random games need a size and a seed.
    pub fn fixed(self) -> Option<GameMatrix> {
        match self {
            GameKind::Brps => Some(make_brps()),
            GameKind::BrpsFig1 => Some(make_brps_fig1()),
            GameKind::Mne => Some(make_mne()),
            GameKind::Random => None,
        }
    }

    pub fn build(self, size: Option<usize>, seed: u64) -> Result<GameMatrix> {
        match self.fixed() {
            Some(g) => Ok(g),
            None => make_random(size.unwrap_or(0), seed),
        }
    }

    /// The equilibrium when it is unique.
    pub fn nash(self) -> Option<StrategyProfile> {
        match self {
            GameKind::Brps => Some(brps_nash()),
            GameKind::BrpsFig1 => Some(brps_fig1_nash()),
            GameKind::Mne | GameKind::Random => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Uniform,
    /// Uniformly distributed over the interior of each simplex.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackKind {
    Full,
    Noisy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgoKind {
    Mwu,
    Omwu,
    M2wu,
}

/// One learning algorithm of the sweep; both players run it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerConfig {
    /// Output file prefix. Defaults to the algorithm name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub algo: AlgoKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Reference refresh period; 0 or absent keeps the reference fixed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_freq: Option<u64>,
    /// Per-learner overrides of the experiment schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl LearnerConfig {
    pub fn mwu() -> Self {
        Self::plain(AlgoKind::Mwu)
    }

    pub fn omwu() -> Self {
        Self::plain(AlgoKind::Omwu)
    }

    pub fn m2wu(mu: f64, update_freq: u64) -> Self {
        Self {
            mu: Some(mu),
            update_freq: Some(update_freq),
            ..Self::plain(AlgoKind::M2wu)
        }
    }

    fn plain(algo: AlgoKind) -> Self {
        Self {
            label: None,
            algo,
            mu: None,
            update_freq: None,
            eta0: None,
            lambda: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_eta0(mut self, eta0: f64) -> Self {
        self.eta0 = Some(eta0);
        self
    }

    pub fn algorithm(&self) -> Result<Algorithm> {
        let a = match self.algo {
            AlgoKind::Mwu => Algorithm::Mwu,
            AlgoKind::Omwu => Algorithm::Omwu,
            AlgoKind::M2wu => {
                let mu = self
                    .mu
                    .ok_or_else(|| Error::Config("m2wu learner needs mu".into()))?;
                match self.update_freq {
                    None | Some(0) => Algorithm::m2wu_fixed(mu),
                    Some(n) => Algorithm::m2wu_adaptive(mu, n),
                }
            }
        };
        a.validate()?;
        Ok(a)
    }

    pub fn label(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => self
                .algorithm()
                .map_or_else(|_| format!("{:?}", self.algo).to_lowercase(), |a| a.name().to_string()),
        }
    }

    pub fn schedule(&self, base: Schedule) -> Schedule {
        match (base, self.eta0, self.lambda) {
            (_, None, None) => base,
            (Schedule::Constant { eta0 }, e, None) => Schedule::Constant {
                eta0: e.unwrap_or(eta0),
            },
            (Schedule::Constant { eta0 }, e, Some(lambda)) => Schedule::Power {
                eta0: e.unwrap_or(eta0),
                lambda,
            },
            (Schedule::Power { eta0, lambda }, e, l) => Schedule::Power {
                eta0: e.unwrap_or(eta0),
                lambda: l.unwrap_or(lambda),
            },
        }
    }
}

fn default_true() -> bool {
    true
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A complete sweep: one game family, several learners, several seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub game: GameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_size: Option<usize>,
    pub iterations: u64,
    /// Snapshot cadence; `iterations / 500` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    pub seeds: Vec<u64>,
    pub init: InitKind,
    pub feedback: FeedbackKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    /// Write strategy columns into the per-seed traces.
    #[serde(default, skip_serializing_if = "is_false")]
    pub keep_strategies: bool,
    /// Add a `kl_to_stationary` column for fixed-reference M2WU learners.
    #[serde(default, skip_serializing_if = "is_false")]
    pub track_stationary: bool,
    /// Write one CSV per seed in addition to the aggregate.
    #[serde(default = "default_true")]
    pub per_seed_csv: bool,
    pub output_path: PathBuf,
    pub schedule: Schedule,
    pub learners: Vec<LearnerConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn record_every(&self) -> u64 {
        self.record_every.unwrap_or((self.iterations / 500).max(1))
    }

    pub fn noise_model(&self) -> NoiseModel {
        match self.feedback {
            FeedbackKind::Full => NoiseModel::FULL,
            FeedbackKind::Noisy => self.noise.unwrap_or(NoiseModel::gaussian(0.1)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.record_every == Some(0) {
            return bad("record_every must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        match (self.game, self.game_size) {
            (GameKind::Random, None | Some(0)) => return bad("random games need game_size ≥ 1".into()),
            (GameKind::Random, _) | (_, None) => {}
            (g, Some(_)) => return bad(format!("game_size only applies to random games, not {g:?}")),
        }
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        self.schedule.validate()?;
        if self.learners.is_empty() {
            return bad("at least one learner is required".into());
        }
        let mut labels = BTreeSet::new();
        for l in &self.learners {
            l.algorithm()?;
            l.schedule(self.schedule).validate()?;
            let label = l.label();
            if label.is_empty()
                || !label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            {
                return bad(format!("label {label:?} must be non-empty [A-Za-z0-9._-]"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate learner label {label:?}"));
            }
        }
        Ok(())
    }
}

/// Overrides read from `ZS_*` environment variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub iterations: Option<u64>,
    pub record_every: Option<u64>,
    pub output_path: Option<PathBuf>,
}

impl Overrides {
    /// Recognized keys: `ZS_SEEDS` (`1,2,5` or `0..10`), `ZS_ITERATIONS`,
    /// `ZS_RECORD_EVERY`, `ZS_OUT`. Other keys are ignored.
    pub fn from_vars<I, K, V>(vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut o = Self::default();
        for (k, v) in vars {
            let v = v.as_ref().trim();
            let num = |name: &str| -> Result<u64> {
                v.parse()
                    .map_err(|_| Error::Config(format!("{name}={v:?} is not a non-negative integer")))
            };
            match k.as_ref() {
                "ZS_SEEDS" => o.seeds = Some(parse_seeds(v)?),
                "ZS_ITERATIONS" => o.iterations = Some(num("ZS_ITERATIONS")?),
                "ZS_RECORD_EVERY" => o.record_every = Some(num("ZS_RECORD_EVERY")?),
                "ZS_OUT" => o.output_path = Some(PathBuf::from(v)),
                _ => {}
            }
        }
        Ok(o)
    }

    pub fn from_env() -> Result<Self> {
        Self::from_vars(std::env::vars())
    }

    /// Later layers win: `self` is applied on top of `cfg`.
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = &self.seeds {
            cfg.seeds = s.clone();
        }
        if let Some(t) = self.iterations {
            cfg.iterations = t;
        }
        if let Some(r) = self.record_every {
            cfg.record_every = Some(r);
        }
        if let Some(p) = &self.output_path {
            cfg.output_path = p.clone();
        }
    }
}

/// `"3"`, `"1,2,5"` or the half-open range `"0..10"`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let err = || Error::Config(format!("cannot parse seed list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| err())?;
        let b: u64 = b.trim().parse().map_err(|_| err())?;
        if a >= b {
            return Err(err());
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| err()))
        .collect()
}

/// Overlays the keys of `top` onto `base`, recursing into tables. Arrays
/// (including `[[learners]]`) are replaced whole.
pub fn merge_tables(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge_tables(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parses `file_text` as a partial config layered over `base`.
pub fn layer_file(base: &ExperimentConfig, file_text: &str) -> Result<ExperimentConfig> {
    let mut table: toml::Table = toml::from_str(&base.to_toml()).expect("round trip");
    let top: toml::Table = toml::from_str(file_text).map_err(|e| Error::Config(e.to_string()))?;
    merge_tables(&mut table, top);
    let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "sample"
game = "random"
game_size = 4
iterations = 1000
record_every = 10
seeds = [1, 2, 3]
init = "uniform"
feedback = "noisy"
output_path = "out/sample"

[noise]
kind = "gaussian"
sigma = 0.1

[schedule]
kind = "power"
eta0 = 1.0
lambda = 0.75

[[learners]]
algo = "mwu"

[[learners]]
label = "adaptive"
algo = "m2wu"
mu = 0.5
update_freq = 200

[[learners]]
algo = "m2wu"
mu = 0.1
update_freq = 0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.game, GameKind::Random);
        assert_eq!(cfg.noise_model(), NoiseModel::gaussian(0.1));
        assert_eq!(cfg.learners[1].algorithm().unwrap(), Algorithm::m2wu_adaptive(0.5, 200));
        assert_eq!(cfg.learners[2].algorithm().unwrap(), Algorithm::m2wu_fixed(0.1));
        assert_eq!(cfg.learners[2].label(), "m2wu-f");
        assert!(cfg.per_seed_csv);
        let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_invalid_configs() {
        let with = |from: &str, to: &str| ExperimentConfig::from_toml(&SAMPLE.replace(from, to));
        assert!(with("iterations = 1000", "iterations = 0").is_err());
        assert!(with("seeds = [1, 2, 3]", "seeds = []").is_err());
        assert!(with("seeds = [1, 2, 3]", "seeds = [1, 1]").is_err());
        assert!(with("game_size = 4", "").is_err());
        assert!(with("game = \"random\"", "game = \"brps\"").is_err());
        assert!(with("mu = 0.5", "mu = 1.5").is_err());
        assert!(with("label = \"adaptive\"", "label = \"mwu\"").is_err());
        assert!(with("label = \"adaptive\"", "label = \"a/b\"").is_err());
        assert!(with("sigma = 0.1", "sigma = -0.1").is_err());
        assert!(with("lambda = 0.75", "lambda = 1.5").is_err());
        assert!(with("algo = \"mwu\"", "algo = \"fp\"").is_err());
        assert!(with("init = \"uniform\"", "init = \"uniform\"\nbogus = 1").is_err());
    }

    #[test]
    fn learner_schedule_overrides() {
        let base = Schedule::constant(0.1);
        assert_eq!(LearnerConfig::mwu().schedule(base), base);
        assert_eq!(LearnerConfig::mwu().with_eta0(0.01).schedule(base), Schedule::constant(0.01));
        let mut l = LearnerConfig::mwu();
        l.lambda = Some(0.75);
        assert_eq!(
            l.schedule(base),
            Schedule::Power {
                eta0: 0.1,
                lambda: 0.75
            }
        );
    }

    #[test]
    fn env_overrides() {
        let o = Overrides::from_vars([
            ("ZS_SEEDS", "0..4"),
            ("ZS_ITERATIONS", "50"),
            ("ZS_OUT", "/tmp/x"),
            ("HOME", "/root"),
        ])
        .unwrap();
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        o.apply(&mut cfg);
        assert_eq!(cfg.seeds, vec![0, 1, 2, 3]);
        assert_eq!(cfg.iterations, 50);
        assert_eq!(cfg.output_path, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.record_every, Some(10));
        assert!(Overrides::from_vars([("ZS_ITERATIONS", "-1")]).is_err());
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1, 2,5").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_seeds("3..6").unwrap(), vec![3, 4, 5]);
        assert!(parse_seeds("6..3").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn file_layers_over_base() {
        let base = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let cfg = layer_file(&base, "iterations = 77\n[schedule]\neta0 = 0.5\n").unwrap();
        assert_eq!(cfg.iterations, 77);
        assert_eq!(
            cfg.schedule,
            Schedule::Power {
                eta0: 0.5,
                lambda: 0.75
            }
        );
        assert_eq!(cfg.learners, base.learners);
        assert!(layer_file(&base, "iterations = \"x\"").is_err());
    }
}
