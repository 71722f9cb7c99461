//! Self-check suite: every invariant of the library as a measured check.
//!
//! `fast` runs in a few seconds. `full` adds the long-horizon convergence
//! checks and the preset-scale orderings.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{integrate, lemma1_identity_check, lyapunov_decay_check, rmd_residual, solve_stationary};
use crate::dynamics::{OdeConfig, StationaryPoint};
use crate::error::Result;
use crate::feedback::{FeedbackChannel, NoiseModel};
use crate::game::{brps_nash, kl, kl_profile, make_brps, make_mne, make_random};
use crate::game::{GameMatrix, Player, Strategy, StrategyProfile};
use crate::learners::{run, softmax_step, Algorithm, LearnerState, RunSpec, Schedule, Simulation};

use super::experiment::simulate;
use super::presets::{preset, Scale};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(Level::Fast),
            "full" => Some(Level::Full),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub threshold: String,
    pub elapsed: Duration,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<24} measured {} | required {} | {:.2} s",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.elapsed.as_secs_f64()
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

type Outcome = (bool, String, String);

fn timed(name: &'static str, f: impl FnOnce() -> Result<Outcome>) -> Check {
    let start = Instant::now();
    let (passed, measured, threshold) = match f() {
        Ok(o) => o,
        Err(e) => (false, format!("error: {e}"), "no error".into()),
    };
    Check {
        name,
        passed,
        measured,
        threshold,
        elapsed: start.elapsed(),
    }
}

/// Runs the suite. Never fails: problems become failed entries.
pub fn verify_suite(level: Level) -> VerifyReport {
    verify_suite_with(level, |_| {})
}

type NamedCheck = (&'static str, fn() -> Result<Outcome>);

/// As [`verify_suite`], calling `on_check` as each check finishes.
pub fn verify_suite_with(level: Level, mut on_check: impl FnMut(&Check)) -> VerifyReport {
    let mut checks: Vec<NamedCheck> = vec![
        ("zero_sum", zero_sum),
        ("exploitability", exploitability_bounds),
        ("kl_divergence", kl_properties),
        ("simplex_preservation", simplex_preservation),
        ("shift_invariance", shift_invariance),
        ("noise_moments", noise_moments),
        ("zero_mutation_is_mwu", zero_mutation_is_mwu),
        ("determinism", determinism),
        ("m2wu_f_cap", m2wu_f_cap),
        ("stationary_certificate", stationary_certificate),
        ("kl_identity", kl_identity),
        ("rmd_lyapunov", rmd_lyapunov),
        ("rd_conserves_kl", rd_conserves_kl),
    ];
    if level == Level::Full {
        checks.extend([
            ("kl_contraction", kl_contraction as fn() -> Result<Outcome>),
            ("reference_monotone", reference_monotone),
            ("noisy_ordering", noisy_ordering),
            ("full_feedback_ordering", full_feedback_ordering),
            ("scale_100x100", scale_100x100),
        ]);
    }
    let mut report = VerifyReport::default();
    for (name, f) in checks {
        let c = timed(name, f);
        on_check(&c);
        report.checks.push(c);
    }
    report
}

fn random_profile(game: &GameMatrix, rng: &mut ChaCha8Rng) -> StrategyProfile {
    StrategyProfile::random_interior(game, rng)
}

fn zero_sum() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut exact = true;
    for k in 0..300u64 {
        let g = make_random(1 + (k % 8) as usize, k)?;
        let p = random_profile(&g, &mut rng);
        let v1 = g.expected_value(&p, Player::One)?;
        let v2 = g.expected_value(&p, Player::Two)?;
        exact &= v2 == -v1;
        let q = g.gradient(&p.p2, Player::One)?;
        let inner: f64 = q.iter().zip(p.p1.probs()).map(|(a, b)| a * b).sum();
        worst = worst.max((inner - v1).abs());
    }
    Ok((
        exact && worst <= 1e-12,
        format!("v2 == -v1 bitwise: {exact}, max |v1 - <pi, q>| = {worst:.2e}"),
        "bitwise, <= 1e-12".into(),
    ))
}

fn exploitability_bounds() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut min = f64::INFINITY;
    for k in 0..300u64 {
        let g = make_random(1 + (k % 8) as usize, 1000 + k)?;
        min = min.min(g.exploitability(&random_profile(&g, &mut rng))?);
    }
    let at_nash = make_brps().exploitability(&brps_nash())?;
    Ok((
        min >= -1e-10 && at_nash.abs() <= 1e-15,
        format!("min {min:.3e}, BRPS at Nash {at_nash:.1e}"),
        ">= -1e-10, |at Nash| <= 1e-15".into(),
    ))
}

fn kl_properties() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut self_kl = 0.0f64;
    let mut pinsker_slack = f64::INFINITY;
    for k in 0..1000usize {
        let n = 1 + k % 9;
        let p = Strategy::random_interior(n, &mut rng);
        let q = Strategy::random_interior(n, &mut rng);
        self_kl = self_kl.max(kl(&p, &p)?.abs());
        let l1 = p.l1_distance(&q);
        pinsker_slack = pinsker_slack.min(kl(&p, &q)? - 0.5 * l1 * l1);
    }
    let zero_support = kl(&Strategy::new(vec![1.0, 0.0])?, &Strategy::new(vec![0.5, 0.5])?)?;
    let ok = self_kl == 0.0 && pinsker_slack >= -1e-12 && (zero_support - 2f64.ln()).abs() < 1e-15;
    Ok((
        ok,
        format!("max KL(p,p) {self_kl:.1e}, min Pinsker slack {pinsker_slack:.2e}"),
        "KL(p,p) = 0, slack >= -1e-12".into(),
    ))
}

fn step_case(rng: &mut ChaCha8Rng) -> (Strategy, Vec<f64>, f64) {
    let n = rng.random_range(1..=9);
    let s = Strategy::random_interior(n, rng);
    let d = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    (s, d, rng.random_range(1e-3..1.0))
}

fn simplex_preservation() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut interior = true;
    for _ in 0..1000 {
        let (s, d, eta) = step_case(&mut rng);
        let out = softmax_step(&s, &d, eta)?;
        worst = worst.max((out.probs().iter().sum::<f64>() - 1.0).abs());
        interior &= out.is_interior();
    }
    Ok((
        worst <= 1e-12 && interior,
        format!("1000 cases, max |sum - 1| = {worst:.1e}, interior: {interior}"),
        "<= 1e-12".into(),
    ))
}

fn shift_invariance() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (s, d, eta) = step_case(&mut rng);
        let c = rng.random_range(-5.0..5.0);
        let shifted: Vec<f64> = d.iter().map(|x| x + c).collect();
        let a = softmax_step(&s, &d, eta)?;
        let b = softmax_step(&s, &shifted, eta)?;
        for (x, y) in a.probs().iter().zip(b.probs()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok((worst <= 1e-14, format!("1000 cases, max diff {worst:.1e}"), "<= 1e-14".into()))
}

fn noise_moments() -> Result<Outcome> {
    let sigma = 0.1;
    let n = 100_000;
    let mut ch = FeedbackChannel::new(NoiseModel::gaussian(sigma), 11)?;
    let (mut s, mut ss) = (0.0, 0.0);
    for _ in 0..n {
        let x = ch.observe(&[0.0], Player::One)[0];
        s += x;
        ss += x * x;
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = ss / nf - mean * mean;
    let se = sigma / nf.sqrt();
    Ok((
        mean.abs() < 4.0 * se && (var / (sigma * sigma) - 1.0).abs() < 0.05,
        format!("mean {mean:.2e}, var/sigma^2 {:.4}", var / (sigma * sigma)),
        format!("|mean| < {:.1e}, within 5%", 4.0 * se),
    ))
}

fn noisy_spec(algorithm: Algorithm, iterations: u64, game: &GameMatrix) -> RunSpec {
    let mut spec = RunSpec::new(algorithm, Schedule::constant(0.05), iterations, StrategyProfile::uniform(game));
    spec.record_every = 1;
    spec.keep_strategies = true;
    spec
}

fn zero_mutation_is_mwu() -> Result<Outcome> {
    // long enough for MWU to push some probabilities below the f64 range
    let g = make_random(6, 7)?;
    let model = NoiseModel::gaussian(0.1);
    let a = run(&g, &noisy_spec(Algorithm::Mwu, 20_000, &g), FeedbackChannel::new(model, 21)?)?;
    let b = run(&g, &noisy_spec(Algorithm::m2wu_fixed(0.0), 20_000, &g), FeedbackChannel::new(model, 21)?)?;
    let same = a.records == b.records;
    Ok((
        same,
        format!("20000 noisy steps, every snapshot identical: {same}"),
        "bitwise equal".into(),
    ))
}

fn determinism() -> Result<Outcome> {
    let mut cfg = preset("fig4c", Scale::Desk)?;
    cfg.seeds = vec![7];
    cfg.iterations = 2000;
    cfg.record_every = Some(100);
    let a = simulate(&cfg)?;
    let b = simulate(&cfg)?;
    let csv = |r: &super::experiment::ExperimentReport| -> Vec<String> {
        r.learners
            .iter()
            .flat_map(|l| l.traces().map(|t| t.to_csv()).collect::<Vec<_>>())
            .collect()
    };
    let same = csv(&a) == csv(&b) && !csv(&a).is_empty();
    Ok((same, format!("repeated sweep traces identical: {same}"), "byte-identical".into()))
}

fn m2wu_f_cap() -> Result<Outcome> {
    let g = make_brps();
    let spec = RunSpec::new(Algorithm::m2wu_fixed(0.1), Schedule::constant(0.1), 10_000, StrategyProfile::uniform(&g));
    let e = run(&g, &spec, FeedbackChannel::full())?.summary.final_exploitability;
    Ok((e <= 0.2, format!("final exploitability {e:.4}"), "<= 0.2".into()))
}

fn brps_stationary(mu: f64) -> Result<StationaryPoint> {
    let g = make_brps();
    solve_stationary(&g, mu, &StrategyProfile::uniform(&g), 1e-12, 5_000_000)
}

fn stationary_certificate() -> Result<Outcome> {
    let g = make_brps();
    let sp = brps_stationary(0.1)?;
    let res = rmd_residual(&g, &sp.profile, 0.1, &sp.reference)?;
    let e = g.exploitability(&sp.profile)?;
    Ok((
        res <= 1e-10 && e <= 0.2,
        format!("residual {res:.1e}, exploitability {e:.4}"),
        "residual <= 1e-10, exploitability <= 0.2".into(),
    ))
}

fn kl_identity() -> Result<Outcome> {
    let mu = 0.1;
    let games = [make_brps(), make_mne(), make_random(25, 2024)?];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for g in &games {
        let r = StrategyProfile::uniform(g);
        let sp = solve_stationary(g, mu, &r, 1e-12, 5_000_000)?;
        for _ in 0..100 {
            let p = random_profile(g, &mut rng);
            worst = worst.max(lemma1_identity_check(g, &p, mu, &r, &sp)?);
        }
    }
    Ok((worst <= 1e-8, format!("300 profiles, max |lhs - rhs| {worst:.2e}"), "<= 1e-8".into()))
}

fn rmd_lyapunov() -> Result<Outcome> {
    let g = make_brps();
    let r = StrategyProfile::uniform(&g);
    let init = StrategyProfile::new(Strategy::new(vec![0.8, 0.1, 0.1])?, Strategy::new(vec![0.1, 0.1, 0.8])?);
    let rep = lyapunov_decay_check(&g, &init, 0.1, &r, &OdeConfig::new(1e-3, 50.0)?)?;
    Ok((
        rep.holds(),
        format!("max step increase {:.1e}, rate {:.4}", rep.max_increase, rep.measured_rate),
        format!("<= 1e-9, rate <= {:.4}", rep.rate_bound),
    ))
}

fn rd_conserves_kl() -> Result<Outcome> {
    let g = make_brps();
    let r = StrategyProfile::uniform(&g);
    let init = StrategyProfile::new(Strategy::new(vec![0.5, 0.3, 0.2])?, Strategy::new(vec![0.3, 0.3, 0.4])?);
    let traj = integrate(&g, &init, 0.0, &r, &OdeConfig::new(1e-3, 20.0)?)?;
    let nash = brps_nash();
    let k0 = kl_profile(&nash, &init)?;
    let mut drift = 0.0f64;
    for (_, p) in &traj {
        drift = drift.max((kl_profile(&nash, p)? - k0).abs());
    }
    Ok((drift <= 1e-6, format!("max |KL - KL0| {drift:.1e}"), "<= 1e-6".into()))
}

/// Per-step KL to the stationary point of full-feedback M2WU-F.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionProfile {
    pub kl: Vec<f64>,
    pub max_increase: f64,
    /// `max |KL|` over the last tenth of the run.
    pub floor: f64,
    /// `KL(t+1)/KL(t)` over the last decade of decay above the floor.
    pub ratios: Vec<f64>,
    /// `(KL_end / KL_start)^(1/n)` over the same window.
    pub fitted_ratio: f64,
    /// `max |ratio / fitted − 1|`.
    pub ratio_spread: f64,
    /// `max |(1 − ratio) / (1 − fitted) − 1|`.
    pub decrement_spread: f64,
}

pub fn contraction_profile(game: &GameMatrix, mu: f64, eta: f64, iterations: u64) -> Result<ContractionProfile> {
    let r = StrategyProfile::uniform(game);
    let sp = solve_stationary(game, mu, &r, 1e-12, 5_000_000)?;
    let learners = [
        LearnerState::new(Algorithm::m2wu_fixed(mu), r.p1.clone(), None)?,
        LearnerState::new(Algorithm::m2wu_fixed(mu), r.p2.clone(), None)?,
    ];
    let mut sim = Simulation::new(game, learners, FeedbackChannel::full(), Schedule::constant(eta))?;
    let mut kls = Vec::with_capacity(iterations as usize + 1);
    kls.push(kl_profile(&sp.profile, &sim.profile())?);
    for _ in 0..iterations {
        sim.step()?;
        kls.push(kl_profile(&sp.profile, &sim.profile())?);
    }
    let max_increase = kls.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let tail = kls.len() - kls.len() / 10;
    let floor = kls[tail..].iter().fold(0.0f64, |m, k| m.max(k.abs()));
    // the window's low end sits four decades above the rounding floor
    let lo = (1e4 * floor).max(f64::MIN_POSITIVE);
    let hi = 10.0 * lo;
    let idx: Vec<usize> = (0..kls.len() - 1)
        .filter(|&t| kls[t] > lo && kls[t] <= hi && kls[t + 1] > lo)
        .collect();
    let ratios: Vec<f64> = idx.iter().map(|&t| kls[t + 1] / kls[t]).collect();
    let (fitted_ratio, ratio_spread, decrement_spread) = match (idx.first(), idx.last()) {
        (Some(&a), Some(&b)) => {
            let n = (b + 1 - a) as f64;
            let fit = (kls[b + 1] / kls[a]).powf(1.0 / n);
            let rs = ratios.iter().map(|x| (x / fit - 1.0).abs()).fold(0.0, f64::max);
            let ds = ratios
                .iter()
                .map(|x| ((1.0 - x) / (1.0 - fit) - 1.0).abs())
                .fold(0.0, f64::max);
            (fit, rs, ds)
        }
        _ => (f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(ContractionProfile {
        kl: kls,
        max_increase,
        floor,
        ratios,
        fitted_ratio,
        ratio_spread,
        decrement_spread,
    })
}

fn kl_contraction() -> Result<Outcome> {
    let p = contraction_profile(&make_brps(), 0.1, 0.01, 100_000)?;
    let ok = p.max_increase <= 1e-12
        && p.fitted_ratio > 0.0
        && p.fitted_ratio < 1.0
        && p.ratio_spread <= 0.05
        && p.ratios.len() >= 10;
    Ok((
        ok,
        format!(
            "max increase {:.1e}, fitted ratio {:.6} over {} steps, ratio spread {:.2e} (decrement spread {:.2})",
            p.max_increase,
            p.fitted_ratio,
            p.ratios.len(),
            p.ratio_spread,
            p.decrement_spread
        ),
        "increase <= 1e-12, ratio in (0,1), spread <= 5%".into(),
    ))
}

/// `KL(π*, r^k)` for each reference of a full-feedback M2WU-A run, plus the
/// final exploitability.
pub fn reference_kl_sequence(
    game: &GameMatrix,
    nash: &StrategyProfile,
    mu: f64,
    eta: f64,
    update_freq: u64,
    iterations: u64,
) -> Result<(Vec<f64>, f64)> {
    let alg = Algorithm::m2wu_adaptive(mu, update_freq);
    let init = StrategyProfile::uniform(game);
    let learners = [
        LearnerState::new(alg, init.p1.clone(), None)?,
        LearnerState::new(alg, init.p2.clone(), None)?,
    ];
    let mut sim = Simulation::new(game, learners, FeedbackChannel::full(), Schedule::constant(eta))?;
    let reference = |sim: &Simulation<'_>| {
        StrategyProfile::new(
            sim.learner(Player::One).reference().expect("m2wu").clone(),
            sim.learner(Player::Two).reference().expect("m2wu").clone(),
        )
    };
    let mut seq = vec![kl_profile(nash, &reference(&sim))?];
    let mut epoch = 0;
    for _ in 0..iterations {
        sim.step()?;
        if sim.learner(Player::One).epoch() != epoch {
            epoch = sim.learner(Player::One).epoch();
            seq.push(kl_profile(nash, &reference(&sim))?);
        }
    }
    Ok((seq, sim.exploitability()))
}

/// Number of `k` with `KL_k ≥ floor` and `KL_{k+1} ≥ KL_k`.
pub fn monotone_violations(seq: &[f64], floor: f64) -> usize {
    seq.windows(2).filter(|w| w[0] >= floor && w[1] >= w[0]).count()
}

fn reference_monotone() -> Result<Outcome> {
    let (seq, e) = reference_kl_sequence(&make_brps(), &brps_nash(), 0.1, 0.1, 100, 100_000)?;
    let bad = monotone_violations(&seq, 1e-6);
    let reached = seq.iter().any(|&k| k < 1e-6);
    Ok((
        bad == 0 && reached && e <= 1e-2,
        format!(
            "{} epochs, {bad} non-decreasing steps, last KL {:.1e}, exploitability {e:.1e}",
            seq.len() - 1,
            seq.last().copied().unwrap_or(f64::NAN)
        ),
        "strictly decreasing to < 1e-6, exploitability <= 1e-2".into(),
    ))
}

fn final_means(name: &str) -> Result<Vec<(String, f64)>> {
    let report = simulate(&preset(name, Scale::Desk)?)?;
    Ok(report
        .learners
        .iter()
        .map(|l| (l.label.clone(), l.final_exploitability().0))
        .collect())
}

fn get(means: &[(String, f64)], label: &str) -> f64 {
    means.iter().find(|(l, _)| l == label).map_or(f64::NAN, |m| m.1)
}

fn fmt_means(means: &[(String, f64)]) -> String {
    means.iter().map(|(l, m)| format!("{l} {m:.3e}")).collect::<Vec<_>>().join(", ")
}

fn noisy_ordering() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["fig4a", "fig4b"] {
        let m = final_means(name)?;
        let worst_m2wu = get(&m, "m2wu-f").max(get(&m, "m2wu-a"));
        let best_base = get(&m, "mwu").min(get(&m, "omwu"));
        ok &= worst_m2wu < best_base;
        parts.push(format!("{name}: {}", fmt_means(&m)));
    }
    Ok((ok, parts.join("; "), "m2wu-f, m2wu-a < mwu, omwu".into()))
}

fn full_feedback_ordering() -> Result<Outcome> {
    let m = final_means("fig2a")?;
    let (a, f) = (get(&m, "m2wu-a"), get(&m, "m2wu-f"));
    Ok((a < f && f < 0.2, format!("fig2a: {}", fmt_means(&m)), "m2wu-a < m2wu-f < 0.2".into()))
}

fn scale_100x100() -> Result<Outcome> {
    let g = make_random(100, 100)?;
    let final_of = |alg| -> Result<(f64, f64)> {
        let start = Instant::now();
        let spec = RunSpec::new(alg, Schedule::constant(0.1), 100_000, StrategyProfile::uniform(&g));
        let e = run(&g, &spec, FeedbackChannel::full())?.summary.final_exploitability;
        Ok((e, start.elapsed().as_secs_f64()))
    };
    let (ea, secs) = final_of(Algorithm::m2wu_adaptive(0.1, 100))?;
    let (em, _) = final_of(Algorithm::Mwu)?;
    Ok((
        secs < 30.0 && ea < em,
        format!("m2wu-a {ea:.3e} in {secs:.1} s, mwu {em:.3e}"),
        "< 30 s and below mwu".into(),
    ))
}
