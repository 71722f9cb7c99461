//! Seed sweeps: one run per (learner, seed), aggregated per learner.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::solve_stationary;
use crate::error::{Error, Result};
use crate::feedback::{derive_seeds, FeedbackChannel};
use crate::game::{GameMatrix, StrategyProfile};
use crate::learners::{run, Algorithm, RunSpec};
use crate::trace::{fmt_f64, RunTrace};

use super::config::{ExperimentConfig, InitKind};

/// Mean and standard error of exploitability across seeds at one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub t: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct SeedResult {
    pub seed: u64,
    /// A failed run keeps its error message; the sweep carries on.
    pub outcome: std::result::Result<RunTrace, String>,
}

#[derive(Clone, Debug)]
pub struct LearnerResult {
    pub label: String,
    pub algorithm: Algorithm,
    pub seeds: Vec<SeedResult>,
    pub aggregate: Vec<AggregateRow>,
}

impl LearnerResult {
    pub fn traces(&self) -> impl Iterator<Item = &RunTrace> {
        self.seeds.iter().filter_map(|s| s.outcome.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.seeds.iter().filter(|s| s.outcome.is_err()).count()
    }

    /// `(mean, stderr)` of final exploitability over successful seeds.
    pub fn final_exploitability(&self) -> (f64, f64) {
        let xs: Vec<f64> = self.traces().map(|t| t.summary.final_exploitability).collect();
        mean_stderr(&xs)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub learners: Vec<LearnerResult>,
}

impl ExperimentReport {
    pub fn learner(&self, label: &str) -> Option<&LearnerResult> {
        self.learners.iter().find(|l| l.label == label)
    }
}

/// Sample mean and `sd / √n` (0 for a single value, NaN for none).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-snapshot mean and standard error across traces sharing one grid.
pub fn aggregate<'a>(traces: impl IntoIterator<Item = &'a RunTrace>) -> Result<Vec<AggregateRow>> {
    let traces: Vec<&RunTrace> = traces.into_iter().collect();
    let Some(first) = traces.first() else {
        return Ok(Vec::new());
    };
    for tr in &traces[1..] {
        if tr.records.len() != first.records.len()
            || tr.records.iter().zip(&first.records).any(|(a, b)| a.t != b.t)
        {
            return Err(Error::invalid("traces do not share a recording grid"));
        }
    }
    Ok((0..first.records.len())
        .map(|i| {
            let xs: Vec<f64> = traces.iter().map(|tr| tr.records[i].exploitability).collect();
            let (mean, stderr) = mean_stderr(&xs);
            AggregateRow {
                t: first.records[i].t,
                mean,
                stderr,
            }
        })
        .collect())
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("t,mean,stderr\n");
    for r in rows {
        writeln!(out, "{},{},{}", r.t, fmt_f64(r.mean), fmt_f64(r.stderr)).unwrap();
    }
    out
}

/// Game and initial profile of one seed, shared by every learner so that
/// algorithms are compared on common random numbers.
struct SeedSetup {
    seed: u64,
    game: GameMatrix,
    init: StrategyProfile,
}

fn setup(cfg: &ExperimentConfig, seed: u64) -> Result<SeedSetup> {
    let (_, _, aux) = derive_seeds(seed);
    let (game_seed, init_seed, _) = derive_seeds(aux);
    let game = cfg.game.build(cfg.game_size, game_seed)?;
    let init = match cfg.init {
        InitKind::Uniform => StrategyProfile::uniform(&game),
        InitKind::Random => StrategyProfile::random_interior(&game, &mut ChaCha8Rng::seed_from_u64(init_seed)),
    };
    Ok(SeedSetup { seed, game, init })
}

fn run_one(cfg: &ExperimentConfig, learner: usize, s: &SeedSetup) -> std::result::Result<RunTrace, String> {
    let l = &cfg.learners[learner];
    let algorithm = l.algorithm().map_err(|e| e.to_string())?;
    let mut spec = RunSpec::new(algorithm, l.schedule(cfg.schedule), cfg.iterations, s.init.clone());
    spec.record_every = cfg.record_every();
    spec.nash = cfg.game.nash();
    spec.keep_strategies = cfg.keep_strategies;
    if let (true, Algorithm::M2wu(m)) = (cfg.track_stationary, algorithm) {
        if m.update_freq.is_none() && m.mu > 0.0 {
            let reference = StrategyProfile::uniform(&s.game);
            let sp = solve_stationary(&s.game, m.mu, &reference, 1e-10, 5_000_000).map_err(|e| e.to_string())?;
            spec.stationary = Some(sp.profile);
        }
    }
    let channel = FeedbackChannel::new(cfg.noise_model(), s.seed).map_err(|e| e.to_string())?;
    run(&s.game, &spec, channel).map_err(|e| e.to_string())
}

#[cfg(feature = "parallel")]
fn map_jobs<T: Send>(jobs: &[(usize, usize)], f: impl Fn(usize, usize) -> T + Sync) -> Vec<T> {
    use rayon::prelude::*;
    jobs.par_iter().map(|&(l, s)| f(l, s)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T>(jobs: &[(usize, usize)], f: impl Fn(usize, usize) -> T) -> Vec<T> {
    jobs.iter().map(|&(l, s)| f(l, s)).collect()
}

/// Runs the sweep in memory. Results are ordered by learner then seed and do
/// not depend on thread scheduling.
pub fn simulate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let setups = cfg
        .seeds
        .iter()
        .map(|&s| setup(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.learners.len())
        .flat_map(|l| (0..setups.len()).map(move |s| (l, s)))
        .collect();
    let mut outcomes = map_jobs(&jobs, |l, s| run_one(cfg, l, &setups[s])).into_iter();

    let mut learners = Vec::with_capacity(cfg.learners.len());
    for l in &cfg.learners {
        let seeds: Vec<SeedResult> = setups
            .iter()
            .map(|s| SeedResult {
                seed: s.seed,
                outcome: outcomes.next().expect("one outcome per job"),
            })
            .collect();
        let aggregate = aggregate(seeds.iter().filter_map(|s| s.outcome.as_ref().ok()))?;
        learners.push(LearnerResult {
            label: l.label(),
            algorithm: l.algorithm()?,
            seeds,
            aggregate,
        });
    }
    Ok(ExperimentReport {
        config: cfg.clone(),
        learners,
    })
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn write_file(path: &Path, contents: &str) -> Result<PathBuf> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Writes `config.toml`, per-seed traces, `<label>_aggregate.csv`,
/// `summary.csv` and, when any seed failed, `failures.csv`. Returns the
/// written paths in order.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![write_file(&dir.join("config.toml"), &report.config.to_toml())?];
    let mut summary =
        String::from("label,algorithm,seeds_ok,seeds_failed,final_mean,final_stderr,min_coordinate,epochs\n");
    let mut failures = String::from("label,seed,error\n");
    let mut any_failed = false;
    for l in &report.learners {
        if report.config.per_seed_csv {
            for s in &l.seeds {
                if let Ok(tr) = &s.outcome {
                    let path = dir.join(format!("{}_seed{}.csv", l.label, s.seed));
                    written.push(write_file(&path, &tr.to_csv())?);
                }
            }
        }
        let path = dir.join(format!("{}_aggregate.csv", l.label));
        written.push(write_file(&path, &aggregate_csv(&l.aggregate))?);

        let (mean, se) = l.final_exploitability();
        let min_coord = l
            .traces()
            .map(|t| t.summary.min_coordinate)
            .fold(f64::INFINITY, f64::min);
        let epochs = l.traces().map(|t| t.summary.epochs[0]).max().unwrap_or(0);
        let ok = l.seeds.len() - l.failures();
        writeln!(
            summary,
            "{},{},{ok},{},{},{},{},{epochs}",
            l.label,
            l.algorithm.name(),
            l.failures(),
            fmt_f64(mean),
            fmt_f64(se),
            fmt_f64(min_coord)
        )
        .unwrap();
        for s in &l.seeds {
            if let Err(e) = &s.outcome {
                any_failed = true;
                writeln!(failures, "{},{},{}", l.label, s.seed, csv_quote(e)).unwrap();
            }
        }
    }
    written.push(write_file(&dir.join("summary.csv"), &summary)?);
    if any_failed {
        written.push(write_file(&dir.join("failures.csv"), &failures)?);
    }
    Ok(written)
}

/// [`simulate`] followed by [`write_outputs`] into `cfg.output_path`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = simulate(cfg)?;
    write_outputs(&report, &cfg.output_path)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{FeedbackKind, GameKind, LearnerConfig};
    use crate::learners::Schedule;

    fn small(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            game: GameKind::Random,
            game_size: Some(4),
            iterations: 300,
            record_every: Some(50),
            seeds: vec![7, 8, 9],
            init: InitKind::Random,
            feedback: FeedbackKind::Noisy,
            noise: None,
            keep_strategies: false,
            track_stationary: true,
            per_seed_csv: true,
            output_path: dir.to_path_buf(),
            schedule: Schedule::constant(0.05),
            learners: vec![LearnerConfig::mwu(), LearnerConfig::m2wu(0.1, 0), LearnerConfig::m2wu(0.1, 50)],
        }
    }

    #[test]
    fn mean_and_stderr() {
        assert_eq!(mean_stderr(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_stderr(&[]).0.is_nan());
    }

    #[test]
    fn sweep_shapes_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.learners.len(), 3);
        for l in &report.learners {
            assert_eq!(l.failures(), 0);
            let ts: Vec<u64> = l.aggregate.iter().map(|r| r.t).collect();
            assert_eq!(ts, [0, 50, 100, 150, 200, 250, 300]);
        }
        // common random numbers: every learner starts from the same profile
        let first = |l: &LearnerResult| l.traces().next().unwrap().records[0].exploitability;
        assert_eq!(first(&report.learners[0]), first(&report.learners[1]));
        let f = report.learner("m2wu-f").unwrap().traces().next().unwrap();
        assert!(f.records.last().unwrap().kl_to_stationary.is_some());
        assert!(report.learner("mwu").unwrap().traces().next().unwrap().records[0]
            .kl_to_stationary
            .is_none());

        for name in ["config.toml", "summary.csv", "mwu_seed7.csv", "m2wu-a_aggregate.csv"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        assert!(!dir.path().join("failures.csv").exists());
        let echo = ExperimentConfig::load(&dir.path().join("config.toml")).unwrap();
        assert_eq!(echo, cfg);
    }

    #[test]
    fn random_games_differ_per_seed() {
        let cfg = small(Path::new("unused"));
        let a = setup(&cfg, 7).unwrap();
        let b = setup(&cfg, 8).unwrap();
        assert_ne!(a.game, b.game);
        assert_ne!(a.init, b.init);
        assert_eq!(setup(&cfg, 7).unwrap().game, a.game);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let mut cfg = small(Path::new("unused"));
        cfg.seeds = vec![1];
        let a = simulate(&cfg).unwrap();
        cfg.record_every = Some(70);
        let b = simulate(&cfg).unwrap();
        let ta = a.learners[0].traces().next().unwrap();
        let tb = b.learners[0].traces().next().unwrap();
        assert!(aggregate([ta, tb]).is_err());
    }

    #[test]
    fn failed_seeds_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        // the first step overflows the log weights
        cfg.schedule = Schedule::constant(f64::MAX);
        cfg.learners = vec![LearnerConfig::mwu()];
        cfg.track_stationary = false;
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.learners[0].failures(), 3);
        assert!(report.learners[0].aggregate.is_empty());
        let f = std::fs::read_to_string(dir.path().join("failures.csv")).unwrap();
        assert_eq!(f.lines().count(), 4);
    }
}
