//! Discrete-time update rules: MWU, optimistic MWU and mutant MWU (fixed or
//! adaptive reference), plus the simultaneous-move run loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::FeedbackChannel;
use crate::game::{kl_profile, GameMatrix, Player, Strategy, StrategyProfile};
use crate::trace::{RunTrace, Snapshot, Summary};

/// Learning-rate sequence indexed from `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Schedule {
    Constant { eta0: f64 },
    /// `eta0 · (t + 1)^(-lambda)`
    Power { eta0: f64, lambda: f64 },
}

impl Schedule {
    pub fn constant(eta0: f64) -> Self {
        Schedule::Constant { eta0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant { eta0 } if eta0 > 0.0 && eta0.is_finite() => Ok(()),
            Schedule::Power { eta0, lambda }
                if eta0 > 0.0 && eta0.is_finite() && lambda > 0.0 && lambda <= 1.0 =>
            {
                Ok(())
            }
            s => Err(Error::invalid(format!("bad learning-rate schedule {s:?}"))),
        }
    }

    pub fn eta(&self, t: u64) -> f64 {
        match *self {
            Schedule::Constant { eta0 } => eta0,
            Schedule::Power { eta0, lambda } => eta0 * ((t + 1) as f64).powf(-lambda),
        }
    }
}

/// Mutation parameters of M2WU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub mu: f64,
    /// Reference refresh period `N`; `None` keeps the reference fixed.
    pub update_freq: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    Mwu,
    Omwu,
    M2wu(Mutation),
}

impl Algorithm {
    pub fn m2wu_fixed(mu: f64) -> Self {
        Algorithm::M2wu(Mutation {
            mu,
            update_freq: None,
        })
    }

    pub fn m2wu_adaptive(mu: f64, update_freq: u64) -> Self {
        Algorithm::M2wu(Mutation {
            mu,
            update_freq: Some(update_freq),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Algorithm::M2wu(m) = self {
            // mu = 0 is accepted: it degenerates to MWU and is used as a check.
            if !(0.0..=1.0).contains(&m.mu) {
                return Err(Error::invalid(format!("mutation rate {} outside [0, 1]", m.mu)));
            }
            if m.update_freq == Some(0) {
                return Err(Error::invalid("update_freq must be positive (None for a fixed reference)"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Mwu => "mwu",
            Algorithm::Omwu => "omwu",
            Algorithm::M2wu(Mutation {
                update_freq: None, ..
            }) => "m2wu-f",
            Algorithm::M2wu(_) => "m2wu-a",
        }
    }
}

/// `q^μ(a) = obs(a) + (μ / π(a)) (r(a) − π(a))`, evaluated as
/// `obs(a) + μ (r(a)/π(a) − 1)`.
pub fn mutation_gradient(
    obs: &[f64],
    strategy: &Strategy,
    reference: &Strategy,
    mu: f64,
) -> Result<Vec<f64>> {
    let pi = strategy.probs();
    let r = reference.probs();
    if obs.len() != pi.len() || r.len() != pi.len() {
        return Err(Error::invalid("mutation gradient length mismatch"));
    }
    if let Some(action) = pi.iter().position(|&p| p <= 0.0) {
        return Err(Error::InteriorityViolation {
            action,
            value: pi[action],
        });
    }
    if mu == 0.0 {
        return Ok(obs.to_vec());
    }
    Ok(obs
        .iter()
        .zip(pi)
        .zip(r)
        .map(|((&q, &p), &ra)| q + mu * (ra / p - 1.0))
        .collect())
}

/// `π'(a) ∝ π(a) exp(η d(a))`, evaluated in the log domain with the maximum
/// subtracted before exponentiation.
pub fn softmax_step(strategy: &Strategy, direction: &[f64], eta: f64) -> Result<Strategy> {
    let pi = strategy.probs();
    if let Some(action) = pi.iter().position(|&p| p <= 0.0) {
        return Err(Error::InteriorityViolation {
            action,
            value: pi[action],
        });
    }
    let logp: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    let out = to_probs(&log_softmax_step(&logp, direction, eta)?);
    if let Some(action) = out.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::InteriorityViolation {
            action,
            value: out[action],
        });
    }
    Ok(Strategy::from_normalized(out))
}

/// `log π' = log π + η d − logsumexp(log π + η d)`.
fn log_softmax_step(logp: &[f64], direction: &[f64], eta: f64) -> Result<Vec<f64>> {
    if direction.len() != logp.len() {
        return Err(Error::invalid("direction length mismatch"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("learning rate {eta} must be positive")));
    }
    if let Some(i) = direction.iter().position(|d| !d.is_finite()) {
        return Err(Error::invalid(format!("direction entry {i} is not finite")));
    }
    let mut w: Vec<f64> = logp.iter().zip(direction).map(|(l, d)| l + eta * d).collect();
    let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + w.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
    for x in w.iter_mut() {
        *x -= lse;
    }
    Ok(w)
}

/// Log-probabilities below this map to an exact zero probability instead of
/// a subnormal.
const LOG_MIN_POSITIVE: f64 = -708.0;

/// Probabilities from normalized log-probabilities, renormalized by division.
fn to_probs(logp: &[f64]) -> Vec<f64> {
    let mut p: Vec<f64> = logp
        .iter()
        .map(|&l| if l < LOG_MIN_POSITIVE { 0.0 } else { l.exp() })
        .collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sum);
    p
}

/// One player's learner.
///
/// The strategy is carried as log-probabilities, so it stays interior for
/// the whole run even when some probabilities drop below the `f64` range;
/// [`LearnerState::strategy`] is the rounded probability view of it.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    algorithm: Algorithm,
    log_strategy: Vec<f64>,
    strategy: Strategy,
    log_reference: Option<Vec<f64>>,
    reference: Option<Strategy>,
    prev_obs: Option<Vec<f64>>,
    epoch: u64,
    within_epoch: u64,
    t: u64,
}

fn log_of(s: &Strategy) -> Vec<f64> {
    s.probs().iter().map(|p| p.ln()).collect()
}

impl LearnerState {
    /// `reference` is used only by M2WU and defaults to uniform.
    pub fn new(algorithm: Algorithm, init: Strategy, reference: Option<Strategy>) -> Result<Self> {
        algorithm.validate()?;
        if !init.is_interior() {
            return Err(Error::invalid("initial strategy must be interior"));
        }
        let reference = match algorithm {
            Algorithm::M2wu(_) => {
                let r = reference.unwrap_or_else(|| Strategy::uniform(init.len()));
                if r.len() != init.len() || !r.is_interior() {
                    return Err(Error::invalid("reference strategy must be interior and match the action count"));
                }
                Some(r)
            }
            _ => None,
        };
        Ok(Self {
            algorithm,
            log_strategy: log_of(&init),
            strategy: init,
            log_reference: reference.as_ref().map(log_of),
            reference,
            prev_obs: None,
            epoch: 0,
            within_epoch: 0,
            t: 0,
        })
    }

    pub fn algorithm(&self) -> &Algorithm {
        &self.algorithm
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// `ln π(a)` per action; always finite.
    pub fn log_strategy(&self) -> &[f64] {
        &self.log_strategy
    }

    pub fn reference(&self) -> Option<&Strategy> {
        self.reference.as_ref()
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn within_epoch(&self) -> u64 {
        self.within_epoch
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, obs: &[f64], eta: f64) -> Result<()> {
        match self.algorithm {
            Algorithm::Mwu => self.step_mwu(obs, eta),
            Algorithm::Omwu => self.step_omwu(obs, eta),
            Algorithm::M2wu(_) => self.step_m2wu(obs, eta),
        }
    }

    fn advance(&mut self, direction: &[f64], eta: f64) -> Result<()> {
        self.log_strategy = log_softmax_step(&self.log_strategy, direction, eta)?;
        if let Some(action) = self.log_strategy.iter().position(|l| !l.is_finite()) {
            return Err(Error::InteriorityViolation {
                action,
                value: self.log_strategy[action].exp(),
            });
        }
        self.strategy = Strategy::from_normalized(to_probs(&self.log_strategy));
        self.t += 1;
        Ok(())
    }

    pub fn step_mwu(&mut self, obs: &[f64], eta: f64) -> Result<()> {
        if self.algorithm != Algorithm::Mwu {
            return Err(Error::invalid("step_mwu on a non-MWU learner"));
        }
        self.advance(obs, eta)
    }

    /// Optimistic step with the previous observation as prediction:
    /// direction `2 q̂ᵗ − q̂ᵗ⁻¹`, zero prediction at `t = 0`.
    pub fn step_omwu(&mut self, obs: &[f64], eta: f64) -> Result<()> {
        if self.algorithm != Algorithm::Omwu {
            return Err(Error::invalid("step_omwu on a non-OMWU learner"));
        }
        let direction: Vec<f64> = match &self.prev_obs {
            Some(prev) => obs.iter().zip(prev).map(|(q, p)| 2.0 * q - p).collect(),
            None => obs.iter().map(|q| 2.0 * q).collect(),
        };
        self.advance(&direction, eta)?;
        self.prev_obs = Some(obs.to_vec());
        Ok(())
    }

    pub fn step_m2wu(&mut self, obs: &[f64], eta: f64) -> Result<()> {
        let Algorithm::M2wu(mutation) = self.algorithm else {
            return Err(Error::invalid("step_m2wu on a non-M2WU learner"));
        };
        if obs.len() != self.log_strategy.len() {
            return Err(Error::invalid("observation length mismatch"));
        }
        let log_r = self.log_reference.as_ref().expect("M2WU learner has a reference");
        // r/π = exp(ln r − ln π) stays finite where π itself would underflow;
        // μ = 0 skips it so that 0 · ∞ cannot arise
        let direction: Vec<f64> = if mutation.mu == 0.0 {
            obs.to_vec()
        } else {
            obs.iter()
                .zip(&self.log_strategy)
                .zip(log_r)
                .map(|((&q, &lp), &lr)| q + mutation.mu * ((lr - lp).exp() - 1.0))
                .collect()
        };
        if let Some(action) = direction.iter().position(|d| !d.is_finite()) {
            return Err(Error::InteriorityViolation {
                action,
                value: self.log_strategy[action].exp(),
            });
        }
        self.advance(&direction, eta)?;
        if let Some(n) = mutation.update_freq {
            self.within_epoch += 1;
            if self.within_epoch == n {
                self.epoch += 1;
                self.within_epoch = 0;
                self.log_reference = Some(self.log_strategy.clone());
                self.reference = Some(self.strategy.clone());
            }
        }
        Ok(())
    }
}

/// Both learners, their feedback channel and the shared clock.
pub struct Simulation<'g> {
    game: &'g GameMatrix,
    learners: [LearnerState; 2],
    channel: FeedbackChannel,
    schedule: Schedule,
    t: u64,
    q: [Vec<f64>; 2],
}

impl<'g> Simulation<'g> {
    pub fn new(
        game: &'g GameMatrix,
        learners: [LearnerState; 2],
        channel: FeedbackChannel,
        schedule: Schedule,
    ) -> Result<Self> {
        schedule.validate()?;
        if learners[0].strategy().len() != game.rows() || learners[1].strategy().len() != game.cols() {
            return Err(Error::invalid("learner dimensions do not match the game"));
        }
        Ok(Self {
            q: [vec![0.0; game.rows()], vec![0.0; game.cols()]],
            game,
            learners,
            channel,
            schedule,
            t: 0,
        })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn learner(&self, player: Player) -> &LearnerState {
        &self.learners[player.index()]
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::new(
            self.learners[0].strategy().clone(),
            self.learners[1].strategy().clone(),
        )
    }

    pub fn exploitability(&self) -> f64 {
        self.game.exploitability_unchecked(
            self.learners[0].strategy().probs(),
            self.learners[1].strategy().probs(),
        )
    }

    /// Simultaneous update: both feedback vectors are taken at the time-`t`
    /// profile before either player moves.
    pub fn step(&mut self) -> Result<()> {
        let [l1, l2] = &mut self.learners;
        let [q1, q2] = &mut self.q;
        self.game.gradient_into(l2.strategy().probs(), Player::One, q1);
        self.game.gradient_into(l1.strategy().probs(), Player::Two, q2);
        self.channel.observe_in_place(q1, Player::One);
        self.channel.observe_in_place(q2, Player::Two);
        let eta = self.schedule.eta(self.t);
        let t = self.t;
        let wrap = |e: Error| Error::Diverged {
            t,
            detail: e.to_string(),
        };
        l1.step(q1, eta).map_err(wrap)?;
        l2.step(q2, eta).map_err(wrap)?;
        self.t += 1;
        Ok(())
    }
}

/// Everything [`run`] needs besides the game and the channel.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub algorithms: [Algorithm; 2],
    pub schedule: Schedule,
    pub iterations: u64,
    pub record_every: u64,
    pub init: StrategyProfile,
    /// Initial M2WU reference; uniform when absent.
    pub reference: Option<StrategyProfile>,
    pub nash: Option<StrategyProfile>,
    pub stationary: Option<StrategyProfile>,
    pub keep_strategies: bool,
}

impl RunSpec {
    pub fn new(algorithm: Algorithm, schedule: Schedule, iterations: u64, init: StrategyProfile) -> Self {
        Self {
            algorithms: [algorithm; 2],
            schedule,
            iterations,
            record_every: (iterations / 500).max(1),
            init,
            reference: None,
            nash: None,
            stationary: None,
            keep_strategies: false,
        }
    }
}

/// Runs `spec.iterations` simultaneous steps, snapshotting at `t = 0`, every
/// `record_every` steps and at the final step.
pub fn run(game: &GameMatrix, spec: &RunSpec, channel: FeedbackChannel) -> Result<RunTrace> {
    if spec.iterations == 0 {
        return Err(Error::invalid("iterations must be at least 1"));
    }
    if spec.record_every == 0 {
        return Err(Error::invalid("record_every must be at least 1"));
    }
    let refs = spec.reference.as_ref();
    let learners = [
        LearnerState::new(spec.algorithms[0], spec.init.p1.clone(), refs.map(|r| r.p1.clone()))?,
        LearnerState::new(spec.algorithms[1], spec.init.p2.clone(), refs.map(|r| r.p2.clone()))?,
    ];
    let mut sim = Simulation::new(game, learners, channel, spec.schedule)?;
    let mut records = Vec::with_capacity((spec.iterations / spec.record_every + 2) as usize);
    let mut min_coordinate = spec.init.min();
    records.push(snapshot(&sim, spec)?);
    while sim.t() < spec.iterations {
        sim.step()?;
        let m = sim.learners[0].strategy().min().min(sim.learners[1].strategy().min());
        min_coordinate = min_coordinate.min(m);
        if sim.t() % spec.record_every == 0 || sim.t() == spec.iterations {
            records.push(snapshot(&sim, spec)?);
        }
    }
    let final_exploitability = sim.exploitability();
    Ok(RunTrace {
        records,
        summary: Summary {
            final_exploitability,
            epochs: [sim.learners[0].epoch(), sim.learners[1].epoch()],
            min_coordinate,
            iterations: spec.iterations,
        },
    })
}

fn snapshot(sim: &Simulation<'_>, spec: &RunSpec) -> Result<Snapshot> {
    let profile = sim.profile();
    let kl_to = |target: &Option<StrategyProfile>| -> Result<Option<f64>> {
        target.as_ref().map(|p| kl_profile(p, &profile)).transpose()
    };
    Ok(Snapshot {
        t: sim.t(),
        exploitability: sim.exploitability(),
        kl_to_nash: kl_to(&spec.nash)?,
        kl_to_stationary: kl_to(&spec.stationary)?,
        min_coordinate: profile.min(),
        strategies: spec.keep_strategies.then_some(profile),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::NoiseModel;
    use crate::game::{brps_nash, make_brps, GameMatrix};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn matching_pennies() -> GameMatrix {
        GameMatrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).unwrap()
    }

    fn s(v: &[f64]) -> Strategy {
        Strategy::new(v.to_vec()).unwrap()
    }

    #[test]
    fn schedules() {
        assert_eq!(Schedule::constant(0.1).eta(1000), 0.1);
        let p = Schedule::Power {
            eta0: 1.0,
            lambda: 0.75,
        };
        assert_eq!(p.eta(0), 1.0);
        assert!((p.eta(15) - 16f64.powf(-0.75)).abs() < 1e-15);
        assert!(Schedule::constant(0.0).validate().is_err());
        assert!(Schedule::Power {
            eta0: 1.0,
            lambda: 1.5
        }
        .validate()
        .is_err());
    }

    #[test]
    fn mutation_gradient_examples() {
        let half = Strategy::uniform(2);
        let obs = [0.3, -1.2];
        assert_eq!(mutation_gradient(&obs, &half, &half, 0.1).unwrap(), obs);
        let pi = s(&[0.25, 0.75]);
        assert_eq!(mutation_gradient(&obs, &pi, &half, 0.0).unwrap(), obs);
        let q = mutation_gradient(&[0.0, 0.0], &pi, &half, 0.1).unwrap();
        assert!((q[0] - 0.1).abs() < 1e-15);
        assert!((q[1] + 1.0 / 30.0).abs() < 1e-15);
        let boundary = s(&[1.0, 0.0]);
        assert!(matches!(
            mutation_gradient(&obs, &boundary, &half, 0.1),
            Err(Error::InteriorityViolation { action: 1, .. })
        ));
    }

    #[test]
    fn softmax_examples() {
        let pi = s(&[0.2, 0.3, 0.5]);
        let same = softmax_step(&pi, &[0.0; 3], 0.1).unwrap();
        assert!(pi.l1_distance(&same) < 1e-15);
        let out = softmax_step(&Strategy::uniform(2), &[1.0, 0.0], 0.1).unwrap();
        let e = 0.1f64.exp();
        assert!((out.probs()[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((out.probs()[0] - 0.524979).abs() < 1e-6);
        assert!((out.probs()[1] - 0.475021).abs() < 1e-6);
        assert!(softmax_step(&pi, &[f64::NAN, 0.0, 0.0], 0.1).is_err());
        // exponents spanning 700 neither overflow nor underflow
        let big = softmax_step(&pi, &[3500.0, 0.0, -3500.0], 0.1).unwrap();
        assert!(big.probs().iter().all(|p| p.is_finite() && *p > 0.0));
        // an entry that underflows is reported, not clipped
        assert!(matches!(
            softmax_step(&pi, &[7000.0, 0.0, -7000.0], 0.1),
            Err(Error::InteriorityViolation { action: 2, .. })
        ));
    }

    #[test]
    fn mwu_at_symmetric_point_is_stationary() {
        let mut l = LearnerState::new(Algorithm::Mwu, Strategy::uniform(2), None).unwrap();
        l.step(&[0.0, 0.0], 0.1).unwrap();
        assert!(l.strategy().l1_distance(&Strategy::uniform(2)) < 1e-15);
        let mut single = LearnerState::new(Algorithm::Mwu, Strategy::uniform(1), None).unwrap();
        single.step(&[5.0], 0.1).unwrap();
        assert_eq!(single.strategy().probs(), &[1.0]);
        assert_eq!(single.t(), 1);
    }

    #[test]
    fn wrong_algorithm_step_is_rejected() {
        let mut l = LearnerState::new(Algorithm::Mwu, Strategy::uniform(2), None).unwrap();
        assert!(l.step_omwu(&[0.0, 0.0], 0.1).is_err());
        assert!(l.step_m2wu(&[0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn omwu_first_step_uses_zero_prediction() {
        let init = s(&[0.2, 0.3, 0.5]);
        let q = [0.4, -0.1, 0.7];
        let mut o = LearnerState::new(Algorithm::Omwu, init.clone(), None).unwrap();
        o.step(&q, 0.1).unwrap();
        // hand computation: π(a) e^{0.2 q(a)} normalized
        let w: Vec<f64> = init.probs().iter().zip(q).map(|(p, q)| p * (0.2 * q).exp()).collect();
        let z: f64 = w.iter().sum();
        for (a, wa) in w.iter().enumerate() {
            assert!((o.strategy().probs()[a] - wa / z).abs() < 1e-15);
        }
        // with prediction equal to realization it is an MWU step on q
        let mut m = LearnerState::new(Algorithm::Mwu, o.strategy().clone(), None).unwrap();
        o.step(&q, 0.1).unwrap();
        m.step(&q, 0.1).unwrap();
        assert!(o.strategy().l1_distance(m.strategy()) < 1e-15);
    }

    #[test]
    fn m2wu_epochs_and_reference_refresh() {
        let mut l = LearnerState::new(Algorithm::m2wu_adaptive(0.1, 3), s(&[0.7, 0.3]), None).unwrap();
        for i in 1..=7u64 {
            l.step(&[1.0, 0.0], 0.1).unwrap();
            assert_eq!(l.epoch(), i / 3);
            assert_eq!(l.within_epoch(), i % 3);
            if i % 3 == 0 {
                assert_eq!(l.reference().unwrap(), l.strategy());
            }
        }
        let mut f = LearnerState::new(Algorithm::m2wu_fixed(0.1), s(&[0.7, 0.3]), None).unwrap();
        for _ in 0..1000 {
            f.step(&[1.0, 0.0], 0.1).unwrap();
        }
        assert_eq!(f.reference().unwrap(), &Strategy::uniform(2));
        assert_eq!(f.epoch(), 0);
    }

    #[test]
    fn m2wu_uniform_fixed_point_in_matching_pennies() {
        let g = matching_pennies();
        let u = Strategy::uniform(2);
        let q = g.gradient(&u, Player::One).unwrap();
        let mut l = LearnerState::new(Algorithm::m2wu_fixed(0.1), u.clone(), None).unwrap();
        l.step(&q, 0.1).unwrap();
        assert!(l.strategy().l1_distance(&u) <= 1e-15);
    }

    #[test]
    fn rejects_bad_learners() {
        assert!(LearnerState::new(Algorithm::Mwu, s(&[1.0, 0.0]), None).is_err());
        assert!(LearnerState::new(Algorithm::m2wu_adaptive(0.1, 0), Strategy::uniform(2), None).is_err());
        assert!(LearnerState::new(Algorithm::m2wu_fixed(1.5), Strategy::uniform(2), None).is_err());
        assert!(
            LearnerState::new(Algorithm::m2wu_fixed(0.1), Strategy::uniform(2), Some(s(&[1.0, 0.0])))
                .is_err()
        );
    }

    #[test]
    fn log_weights_survive_underflow() {
        let mut l = LearnerState::new(Algorithm::Mwu, Strategy::uniform(3), None).unwrap();
        for _ in 0..100 {
            l.step(&[1.0, 0.0, -1.0], 10.0).unwrap();
        }
        assert_eq!(l.strategy().probs(), &[1.0, 0.0, 0.0]);
        assert!(l.log_strategy().iter().all(|x| x.is_finite()));
        assert!((l.log_strategy()[2] + 2000.0).abs() < 1e-9);
    }

    #[test]
    fn mutation_overflow_is_an_interiority_violation() {
        // ημ r/π ≈ 400 overshoots; the next step's r/π overflows
        let init = s(&[1e-6, 0.5 - 5e-7, 0.5 - 5e-7]);
        let mut l = LearnerState::new(Algorithm::m2wu_fixed(0.1), init, None).unwrap();
        let err = (0..10).find_map(|_| l.step(&[0.0; 3], 0.1).err()).unwrap();
        assert!(matches!(err, Error::InteriorityViolation { .. }), "{err}");
    }

    #[test]
    fn run_bookkeeping() {
        let g = make_brps();
        let mut spec = RunSpec::new(Algorithm::Mwu, Schedule::constant(0.1), 1, StrategyProfile::uniform(&g));
        spec.record_every = 1;
        let tr = run(&g, &spec, FeedbackChannel::full()).unwrap();
        assert_eq!(tr.records.len(), 2);
        assert_eq!(tr.records[0].t, 0);
        assert_eq!(tr.records[1].t, 1);
        spec.iterations = 10;
        spec.record_every = 4;
        let tr = run(&g, &spec, FeedbackChannel::full()).unwrap();
        let ts: Vec<u64> = tr.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 4, 8, 10]);
        spec.iterations = 0;
        assert!(run(&g, &spec, FeedbackChannel::full()).is_err());
    }

    #[test]
    fn run_is_deterministic_under_noise() {
        let g = make_brps();
        let mut spec = RunSpec::new(
            Algorithm::m2wu_adaptive(0.5, 50),
            Schedule::constant(0.01),
            2000,
            StrategyProfile::uniform(&g),
        );
        spec.nash = Some(brps_nash());
        let go = || run(&g, &spec, FeedbackChannel::new(NoiseModel::gaussian(0.1), 7).unwrap()).unwrap();
        assert_eq!(go(), go());
    }

    #[test]
    fn mwu_does_not_converge_in_last_iterate() {
        let g = make_brps();
        let mut spec = RunSpec::new(Algorithm::Mwu, Schedule::constant(0.1), 10_000, StrategyProfile::uniform(&g));
        spec.record_every = 1;
        spec.nash = Some(brps_nash());
        let tr = run(&g, &spec, FeedbackChannel::full()).unwrap();
        let kl: Vec<f64> = tr.records.iter().map(|r| r.kl_to_nash.unwrap()).collect();
        // the running mean of KL(Nash, π^t) never drops
        let mut acc = 0.0;
        let mut prev_mean = 0.0;
        for (i, k) in kl.iter().enumerate() {
            acc += k;
            let mean = acc / (i + 1) as f64;
            if i > 0 {
                assert!(mean >= prev_mean - 1e-12, "t={i}");
            }
            prev_mean = mean;
        }
        assert!(kl.last().unwrap() >= &kl[0]);
    }

    #[test]
    fn omwu_trends_down() {
        let g = make_brps();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let init = StrategyProfile::random_interior(&g, &mut rng);
        let mut spec = RunSpec::new(Algorithm::Omwu, Schedule::constant(0.1), 10_000, init);
        spec.record_every = 100;
        let tr = run(&g, &spec, FeedbackChannel::full()).unwrap();
        let at = |t: u64| tr.records.iter().find(|r| r.t == t).unwrap().exploitability;
        assert!(at(10_000) < at(100));
    }

    #[test]
    fn m2wu_f_meets_the_two_mu_cap() {
        let g = make_brps();
        let spec = RunSpec::new(Algorithm::m2wu_fixed(0.1), Schedule::constant(0.1), 10_000, StrategyProfile::uniform(&g));
        let tr = run(&g, &spec, FeedbackChannel::full()).unwrap();
        assert!(tr.summary.final_exploitability <= 0.2);
    }

    fn random_step_case(seed: u64) -> (Strategy, Vec<f64>, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1 + (seed % 9) as usize;
        let s = Strategy::random_interior(n, &mut rng);
        let d = (0..n).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect();
        let eta = rand::Rng::random_range(&mut rng, 1e-3..1.0);
        (s, d, eta)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn softmax_preserves_simplex(seed in any::<u64>()) {
            let (s, d, eta) = random_step_case(seed);
            let out = softmax_step(&s, &d, eta).unwrap();
            prop_assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(out.is_interior());
        }

        #[test]
        fn softmax_is_shift_invariant(seed in any::<u64>(), c in -5.0f64..5.0) {
            let (s, d, eta) = random_step_case(seed);
            let shifted: Vec<f64> = d.iter().map(|x| x + c).collect();
            let a = softmax_step(&s, &d, eta).unwrap();
            let b = softmax_step(&s, &shifted, eta).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-14);
            }
        }
    }
}
