//! Two-player zero-sum normal-form games.
//!
//! Only player 1's payoff table is stored. Everything player 2 sees is derived
//! by negation, so `v₂ = -v₁` holds bitwise for every profile.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ p(a) = 1` accepted by [`Strategy::new`].
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::One, Player::Two];

    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
        }
    }

    pub fn opponent(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// Player 1's payoff table `u₁(a, b)`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct GameMatrix {
    rows: usize,
    cols: usize,
    payoff: Vec<f64>,
    u_max: f64,
}

impl GameMatrix {
    pub fn new(rows: usize, cols: usize, payoff: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("game needs at least one action per player"));
        }
        if payoff.len() != rows * cols {
            return Err(Error::invalid(format!(
                "payoff has {} entries, expected {rows}x{cols}",
                payoff.len()
            )));
        }
        if let Some(i) = payoff.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("payoff entry {i} is not finite")));
        }
        let u_max = payoff.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(Self {
            rows,
            cols,
            payoff,
            u_max,
        })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("ragged payoff rows"));
        }
        Self::new(n, m, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of actions available to `player`.
    pub fn actions(&self, player: Player) -> usize {
        match player {
            Player::One => self.rows,
            Player::Two => self.cols,
        }
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// `u₁(a, b)`.
    pub fn payoff(&self, a: usize, b: usize) -> f64 {
        self.payoff[a * self.cols + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.payoff[a * self.cols..(a + 1) * self.cols]
    }

    /// `u_i(a_1, a_2)` for either player.
    pub fn utility(&self, player: Player, a: usize, b: usize) -> f64 {
        match player {
            Player::One => self.payoff(a, b),
            Player::Two => -self.payoff(a, b),
        }
    }

    fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.p1.len() != self.rows || profile.p2.len() != self.cols {
            return Err(Error::invalid(format!(
                "profile is {}x{}, game is {}x{}",
                profile.p1.len(),
                profile.p2.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(())
    }

    /// `v_i^π = Σ π₁(a) π₂(b) u_i(a, b)`. Player 2's value is the exact
    /// negation of player 1's.
    pub fn expected_value(&self, profile: &StrategyProfile, player: Player) -> Result<f64> {
        self.check_profile(profile)?;
        let v1 = self.value_unchecked(profile.p1.probs(), profile.p2.probs());
        Ok(match player {
            Player::One => v1,
            Player::Two => -v1,
        })
    }

    pub(crate) fn value_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(a, &xa)| xa * dot(self.row(a), y))
            .sum()
    }

    /// Conditional expected utility vector `q_i^π(a) = E_{b∼opponent} u_i(a, b)`,
    /// which is also the gradient of `v_i` with respect to `π_i`.
    pub fn gradient(&self, opponent: &Strategy, player: Player) -> Result<Vec<f64>> {
        let expected = self.actions(player.opponent());
        if opponent.len() != expected {
            return Err(Error::invalid(format!(
                "opponent strategy has {} actions, expected {expected}",
                opponent.len()
            )));
        }
        let mut out = vec![0.0; self.actions(player)];
        self.gradient_into(opponent.probs(), player, &mut out);
        Ok(out)
    }

    /// Unchecked gradient into a caller-owned buffer; used on hot paths.
    pub(crate) fn gradient_into(&self, opponent: &[f64], player: Player, out: &mut [f64]) {
        match player {
            Player::One => {
                for (a, q) in out.iter_mut().enumerate() {
                    *q = dot(self.row(a), opponent);
                }
            }
            Player::Two => {
                out.fill(0.0);
                for (a, &xa) in opponent.iter().enumerate() {
                    for (q, &u) in out.iter_mut().zip(self.row(a)) {
                        *q += xa * u;
                    }
                }
                for q in out.iter_mut() {
                    *q = -*q;
                }
            }
        }
    }

    /// Both gradient vectors at `profile`.
    pub fn gradients(&self, profile: &StrategyProfile) -> Result<[Vec<f64>; 2]> {
        self.check_profile(profile)?;
        Ok([
            self.gradient(&profile.p2, Player::One)?,
            self.gradient(&profile.p1, Player::Two)?,
        ])
    }

    /// `max_a q₁^π(a) + max_b q₂^π(b)`. Zero exactly at Nash equilibria.
    pub fn exploitability(&self, profile: &StrategyProfile) -> Result<f64> {
        self.check_profile(profile)?;
        Ok(self.exploitability_unchecked(profile.p1.probs(), profile.p2.probs()))
    }

    pub(crate) fn exploitability_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut q1 = vec![0.0; self.rows];
        let mut q2 = vec![0.0; self.cols];
        self.gradient_into(y, Player::One, &mut q1);
        self.gradient_into(x, Player::Two, &mut q2);
        max_of(&q1) + max_of(&q2)
    }

    /// Pure best response of `player` against `profile`; ties go to the lowest index.
    pub fn best_response(&self, profile: &StrategyProfile, player: Player) -> Result<usize> {
        self.check_profile(profile)?;
        let q = match player {
            Player::One => self.gradient(&profile.p2, player)?,
            Player::Two => self.gradient(&profile.p1, player)?,
        };
        Ok(argmax(&q))
    }
}

/// A mixed strategy for one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::invalid("empty strategy"));
        }
        if let Some(i) = probs.iter().position(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::invalid(format!(
                "strategy entry {i} = {} is not a probability",
                probs[i]
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!("strategy sums to {sum}, not 1")));
        }
        Ok(Self(probs))
    }

    /// Normalizes nonnegative weights onto the simplex.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("weights must be nonnegative with a positive finite sum"));
        }
        Self::new(weights.iter().map(|w| w / sum).collect())
    }

    /// Caller guarantees the simplex invariant.
    pub(crate) fn from_normalized(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        Self(probs)
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform strategy over zero actions");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn pure(n: usize, action: usize) -> Self {
        let mut p = vec![0.0; n];
        p[action] = 1.0;
        Self(p)
    }

    /// Draws from the symmetric Dirichlet(1) distribution, i.e. uniformly on
    /// the simplex. The result is interior with probability one.
    pub fn random_interior<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
            if w.iter().all(|&x| x > 0.0) {
                let sum: f64 = w.iter().sum();
                return Self(w.into_iter().map(|x| x / sum).collect());
            }
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_interior(&self) -> bool {
        self.min() > 0.0
    }

    pub fn l1_distance(&self, other: &Strategy) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for Strategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Strategy::new(v)
    }
}

impl From<Strategy> for Vec<f64> {
    fn from(s: Strategy) -> Vec<f64> {
        s.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub p1: Strategy,
    pub p2: Strategy,
}

impl StrategyProfile {
    pub fn new(p1: Strategy, p2: Strategy) -> Self {
        Self { p1, p2 }
    }

    pub fn uniform(game: &GameMatrix) -> Self {
        Self::new(Strategy::uniform(game.rows()), Strategy::uniform(game.cols()))
    }

    pub fn random_interior<R: rand::Rng + ?Sized>(game: &GameMatrix, rng: &mut R) -> Self {
        let p1 = Strategy::random_interior(game.rows(), rng);
        let p2 = Strategy::random_interior(game.cols(), rng);
        Self::new(p1, p2)
    }

    pub fn get(&self, player: Player) -> &Strategy {
        match player {
            Player::One => &self.p1,
            Player::Two => &self.p2,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.p1.is_interior() && self.p2.is_interior()
    }

    pub fn min(&self) -> f64 {
        self.p1.min().min(self.p2.min())
    }

    pub fn l1_distance(&self, other: &StrategyProfile) -> f64 {
        self.p1.l1_distance(&other.p1) + self.p2.l1_distance(&other.p2)
    }
}

/// `Σ p(a) ln(p(a)/q(a))` with `0 ln 0 = 0`.
pub fn kl(p: &Strategy, q: &Strategy) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "kl over strategies of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (index, (&pa, &qa)) in p.probs().iter().zip(q.probs()).enumerate() {
        if pa > 0.0 {
            if qa <= 0.0 {
                return Err(Error::InfiniteDivergence { index, p: pa });
            }
            total += pa * (pa / qa).ln();
        }
    }
    Ok(total)
}

/// Sum of the two per-player divergences.
pub fn kl_profile(p: &StrategyProfile, q: &StrategyProfile) -> Result<f64> {
    Ok(kl(&p.p1, &q.p1)? + kl(&p.p2, &q.p2)?)
}

/// Biased rock-paper-scissors; rows and columns are (R, P, S).
pub fn make_brps() -> GameMatrix {
    GameMatrix::from_rows(&[&[0.0, -1.0, 3.0], &[1.0, 0.0, -1.0], &[-3.0, 1.0, 0.0]])
        .expect("static matrix")
}

/// The biased RPS variant drawn in the RD/RMD trajectory figure. Used only for
/// trajectory reproduction.
pub fn make_brps_fig1() -> GameMatrix {
    GameMatrix::from_rows(&[&[0.0, -3.0, 1.0], &[3.0, 0.0, -1.0], &[-1.0, 1.0, 0.0]])
        .expect("static matrix")
}

/// The unique equilibrium strategy of [`make_brps`] (same for both players).
pub fn brps_nash() -> StrategyProfile {
    let s = Strategy::new(vec![0.2, 0.6, 0.2]).expect("static strategy");
    StrategyProfile::new(s.clone(), s)
}

/// The unique equilibrium strategy of [`make_brps_fig1`] (same for both players).
pub fn brps_fig1_nash() -> StrategyProfile {
    let s = Strategy::new(vec![0.2, 0.2, 0.6]).expect("static strategy");
    StrategyProfile::new(s.clone(), s)
}

/// 5×5 game with a unique equilibrium for player 1 and a continuum for player 2.
pub fn make_mne() -> GameMatrix {
    GameMatrix::from_rows(&[
        &[0.0, 1.0, -1.0, 0.0, 0.0],
        &[-1.0, 0.0, 1.0, 0.0, 0.0],
        &[1.0, -1.0, 0.0, 0.0, 0.0],
        &[1.0, -1.0, 0.0, -2.0, 1.0],
        &[1.0, -1.0, 0.0, 1.0, -2.0],
    ])
    .expect("static matrix")
}

/// Player 1's unique equilibrium strategy in [`make_mne`].
pub fn mne_nash_p1() -> Strategy {
    let t = 1.0 / 3.0;
    Strategy::new(vec![t, t, t, 0.0, 0.0]).expect("static strategy")
}

/// `n×n` game with i.i.d. standard normal payoffs, deterministic per seed.
/// The generator is ChaCha8 seeded via `seed_from_u64`.
pub fn make_random(n: usize, seed: u64) -> Result<GameMatrix> {
    if n == 0 {
        return Err(Error::invalid("random game size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoff = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    GameMatrix::new(n, n, payoff)
}

/// L1 violation of the M-Ne player-2 equilibrium set
/// `{y : y₁ = y₂ = y₃, y₅/2 ≤ y₄ ≤ 2y₅}`; zero on the set (within 1e-9).
pub fn nash_distance_mne(p2: &Strategy) -> Result<f64> {
    let y = p2.probs();
    if y.len() != 5 {
        return Err(Error::invalid(format!("M-Ne strategy has length {}, expected 5", y.len())));
    }
    let equal = (y[0] - y[1]).abs() + (y[1] - y[2]).abs();
    let (lo, hi) = (y[4] / 2.0, 2.0 * y[4]);
    let interval = if y[3] < lo {
        lo - y[3]
    } else if y[3] > hi {
        y[3] - hi
    } else {
        0.0
    };
    let d = equal + interval;
    Ok(if d <= 1e-9 { 0.0 } else { d })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn uniform_brps() -> StrategyProfile {
        StrategyProfile::uniform(&make_brps())
    }

    fn matching_pennies() -> GameMatrix {
        GameMatrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]).unwrap()
    }

    /// Direct double sum, kept independent of the row-dot implementation.
    fn brute_value(g: &GameMatrix, x: &[f64], y: &[f64]) -> f64 {
        let mut v = 0.0;
        for a in 0..g.rows() {
            for b in 0..g.cols() {
                v += x[a] * y[b] * g.payoff(a, b);
            }
        }
        v
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(GameMatrix::new(0, 1, vec![]).is_err());
        assert!(GameMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(GameMatrix::new(1, 1, vec![f64::NAN]).is_err());
        let g = GameMatrix::new(1, 2, vec![-4.0, 2.0]).unwrap();
        assert_eq!(g.u_max(), 4.0);
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(vec![0.5, 0.5]).is_ok());
        assert!(Strategy::new(vec![0.5, 0.6]).is_err());
        assert!(Strategy::new(vec![1.5, -0.5]).is_err());
        assert!(Strategy::new(vec![]).is_err());
        assert!(!Strategy::new(vec![1.0, 0.0]).unwrap().is_interior());
        assert!(Strategy::uniform(4).is_interior());
    }

    #[test]
    fn brps_value_at_nash_and_uniform() {
        let g = make_brps();
        let v = g.expected_value(&brps_nash(), Player::One).unwrap();
        assert!(v.abs() <= 1e-12);
        let u = uniform_brps();
        let v = g.expected_value(&u, Player::One).unwrap();
        let brute = brute_value(&g, u.p1.probs(), u.p2.probs());
        assert!((brute - 0.0).abs() < 1e-15);
        assert!((v - brute).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = make_brps();
        let bad = StrategyProfile::new(Strategy::uniform(2), Strategy::uniform(3));
        assert!(g.expected_value(&bad, Player::One).is_err());
        assert!(g.exploitability(&bad).is_err());
        assert!(g.gradient(&Strategy::uniform(5), Player::One).is_err());
    }

    #[test]
    fn brps_gradients() {
        let g = make_brps();
        let q = g.gradient(&Strategy::uniform(3), Player::One).unwrap();
        let expected = [2.0 / 3.0, 0.0, -2.0 / 3.0];
        for (a, b) in q.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let q = g.gradient(&brps_nash().p2, Player::One).unwrap();
        assert!(q.iter().all(|x| x.abs() < 1e-15), "{q:?}");
        let q = g.gradient(&brps_nash().p1, Player::Two).unwrap();
        assert!(q.iter().all(|x| x.abs() < 1e-15), "{q:?}");
    }

    #[test]
    fn single_action_gradient() {
        let g = GameMatrix::new(1, 1, vec![2.5]).unwrap();
        let q = g.gradient(&Strategy::uniform(1), Player::One).unwrap();
        assert_eq!(q, vec![2.5]);
    }

    #[test]
    fn exploitability_examples() {
        let g = make_brps();
        assert!(g.exploitability(&brps_nash()).unwrap().abs() <= 1e-12);
        // Brute force: best pure response to uniform for each side.
        let u = uniform_brps();
        let mut best1 = f64::NEG_INFINITY;
        let mut best2 = f64::NEG_INFINITY;
        for a in 0..3 {
            best1 = best1.max(brute_value(&g, Strategy::pure(3, a).probs(), u.p2.probs()));
            best2 = best2.max(-brute_value(&g, u.p1.probs(), Strategy::pure(3, a).probs()));
        }
        assert!((best1 + best2 - 4.0 / 3.0).abs() < 1e-15);
        assert!((g.exploitability(&u).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let mp = matching_pennies();
        assert_eq!(mp.exploitability(&StrategyProfile::uniform(&mp)).unwrap(), 0.0);
    }

    #[test]
    fn best_response_ties_lowest_index() {
        let mp = matching_pennies();
        let u = StrategyProfile::uniform(&mp);
        assert_eq!(mp.best_response(&u, Player::One).unwrap(), 0);
        assert_eq!(mp.best_response(&u, Player::Two).unwrap(), 0);
    }

    #[test]
    fn kl_examples() {
        let p = Strategy::new(vec![0.3, 0.7]).unwrap();
        assert_eq!(kl(&p, &p).unwrap(), 0.0);
        let pure = Strategy::pure(2, 0);
        let half = Strategy::uniform(2);
        assert!((kl(&pure, &half).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            kl(&half, &pure),
            Err(Error::InfiniteDivergence { index: 1, .. })
        ));
        assert!(kl(&half, &Strategy::uniform(3)).is_err());
    }

    #[test]
    fn kl_profile_examples() {
        let a = StrategyProfile::new(Strategy::pure(2, 0), Strategy::pure(2, 0));
        let b = StrategyProfile::new(Strategy::uniform(2), Strategy::uniform(2));
        assert_eq!(kl_profile(&b, &b).unwrap(), 0.0);
        assert!((kl_profile(&a, &b).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn preset_matrices() {
        let b = make_brps();
        assert_eq!(b.payoff(0, 2), 3.0);
        assert_eq!(b.u_max(), 3.0);
        let m = make_mne();
        assert_eq!(m.payoff(3, 3), -2.0);
        assert_eq!(m.payoff(4, 3), 1.0);
        let f = make_brps_fig1();
        assert_eq!(f.row(0), &[0.0, -3.0, 1.0]);
        assert_eq!(f.u_max(), 3.0);
        assert!(f.exploitability(&brps_fig1_nash()).unwrap().abs() < 1e-15);
        assert!(b.exploitability(&brps_nash()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn random_games_are_deterministic() {
        assert_eq!(make_random(2, 11).unwrap(), make_random(2, 11).unwrap());
        assert_ne!(make_random(2, 11).unwrap(), make_random(2, 12).unwrap());
        assert!(make_random(0, 1).is_err());
    }

    #[test]
    fn mne_membership() {
        let t = 1.0 / 3.0;
        let d = |v: Vec<f64>| nash_distance_mne(&Strategy::new(v).unwrap()).unwrap();
        assert_eq!(d(vec![t, t, t, 0.0, 0.0]), 0.0);
        assert_eq!(d(vec![0.2; 5]), 0.0);
        assert!((d(vec![0.4, 0.2, 0.2, 0.1, 0.1]) - 0.2).abs() < 1e-12);
        assert!(nash_distance_mne(&Strategy::uniform(3)).is_err());
        // mne_nash_p1 equalizes player 2 against every y in the set
        let m = make_mne();
        let q = m.gradient(&mne_nash_p1(), Player::Two).unwrap();
        assert!(q[..3].iter().all(|x| x.abs() < 1e-15));
    }

    fn arb_case() -> impl proptest::strategy::Strategy<Value = (usize, usize, u64)> {
        (1usize..8, 1usize..8, any::<u64>())
    }

    fn random_case(n: usize, m: usize, seed: u64) -> (GameMatrix, StrategyProfile) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let payoff = (0..n * m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = GameMatrix::new(n, m, payoff).unwrap();
        let p = StrategyProfile::random_interior(&g, &mut rng);
        (g, p)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn zero_sum_is_exact((n, m, seed) in arb_case()) {
            let (g, p) = random_case(n, m, seed);
            let v1 = g.expected_value(&p, Player::One).unwrap();
            let v2 = g.expected_value(&p, Player::Two).unwrap();
            prop_assert_eq!(v1 + v2, 0.0);
        }

        #[test]
        fn value_is_inner_product_with_gradient((n, m, seed) in arb_case()) {
            let (g, p) = random_case(n, m, seed);
            let [q1, q2] = g.gradients(&p).unwrap();
            let v1 = g.expected_value(&p, Player::One).unwrap();
            prop_assert!((v1 - dot(p.p1.probs(), &q1)).abs() <= 1e-12);
            prop_assert!((-v1 - dot(p.p2.probs(), &q2)).abs() <= 1e-12);
            prop_assert!((v1 - brute_value(&g, p.p1.probs(), p.p2.probs())).abs() <= 1e-12);
            let u = g.u_max();
            prop_assert!(q1.iter().chain(&q2).all(|x| x.abs() <= u + 1e-12));
        }

        #[test]
        fn exploitability_bounds_duality_gap((n, m, seed) in arb_case()) {
            let (g, p) = random_case(n, m, seed);
            let e = g.exploitability(&p).unwrap();
            prop_assert!(e >= -1e-10);
            let br1 = g.best_response(&p, Player::One).unwrap();
            let br2 = g.best_response(&p, Player::Two).unwrap();
            let hi = g.expected_value(
                &StrategyProfile::new(Strategy::pure(n, br1), p.p2.clone()), Player::One).unwrap();
            let lo = g.expected_value(
                &StrategyProfile::new(p.p1.clone(), Strategy::pure(m, br2)), Player::One).unwrap();
            prop_assert!(e >= hi - lo - 1e-10);
        }

        #[test]
        fn pinsker_and_identity((n, seed) in (1usize..10, any::<u64>())) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = Strategy::random_interior(n, &mut rng);
            let q = Strategy::random_interior(n, &mut rng);
            let d = kl(&p, &q).unwrap();
            let l1 = p.l1_distance(&q);
            prop_assert!(d >= 0.0);
            prop_assert!(l1 * l1 <= 2.0 * d + 1e-12);
            prop_assert!(kl(&p, &p).unwrap().abs() <= 1e-12);
            // a 1e-10 perturbation is invisible to KL at the 1e-12 level
            if n >= 2 {
                let mut v = p.probs().to_vec();
                let eps = 5e-11_f64.min(v[0].min(v[1]) / 2.0);
                v[0] += eps;
                v[1] -= eps;
                let close = Strategy::new(v).unwrap();
                prop_assert!(p.l1_distance(&close) <= 1e-9);
                prop_assert!(kl(&p, &close).unwrap().abs() <= 1e-12);
            }
        }
    }
}
