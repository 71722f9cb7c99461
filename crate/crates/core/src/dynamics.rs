//! Replicator(-mutator) dynamics in continuous time.
//!
//! The vector field is
//! `dπ_i(a)/dt = π_i(a) (q_i(a) − v_i) + μ (r_i(a) − π_i(a))`,
//! which reduces to the replicator dynamics at `μ = 0`. Its stationary point
//! `π^{μ,r}` is also the fixed point of the discrete mutant MWU update, which
//! is what [`solve_stationary`] exploits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::game::{dot, kl_profile, GameMatrix, Player, Strategy, StrategyProfile};
use crate::learners::{mutation_gradient, softmax_step};
use crate::trace::fmt_f64;

/// Fixed-step classical RK4 settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeConfig {
    pub step: f64,
    pub t_end: f64,
}

impl OdeConfig {
    pub const MAX_STEP: f64 = 0.1;

    pub fn new(step: f64, t_end: f64) -> Result<Self> {
        let cfg = Self { step, t_end };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= Self::MAX_STEP) {
            return Err(Error::invalid(format!(
                "ODE step {} outside (0, {}]",
                self.step,
                Self::MAX_STEP
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end must be finite and nonnegative"));
        }
        Ok(())
    }

    fn steps(&self) -> u64 {
        (self.t_end / self.step).round() as u64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPoint {
    pub profile: StrategyProfile,
    /// Max-abs of the RMD vector field at `profile`.
    pub residual: f64,
    pub mu: f64,
    pub reference: StrategyProfile,
    pub iterations: u64,
}

pub type Trajectory = Vec<(f64, StrategyProfile)>;

fn check_interior(profile: &StrategyProfile, what: &str) -> Result<()> {
    if !profile.is_interior() {
        return Err(Error::invalid(format!("{what} must be interior")));
    }
    Ok(())
}

fn check_dims(game: &GameMatrix, profile: &StrategyProfile, what: &str) -> Result<()> {
    if profile.p1.len() != game.rows() || profile.p2.len() != game.cols() {
        return Err(Error::invalid(format!("{what} does not match the game dimensions")));
    }
    Ok(())
}

/// Field for one player given its gradient.
fn player_field(pi: &[f64], q: &[f64], r: &[f64], mu: f64, out: &mut [f64]) {
    let v = dot(pi, q);
    for (((o, &p), &qa), &ra) in out.iter_mut().zip(pi).zip(q).zip(r) {
        *o = p * (qa - v) + mu * (ra - p);
    }
}

struct Field<'a> {
    game: &'a GameMatrix,
    mu: f64,
    r1: &'a [f64],
    r2: &'a [f64],
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl<'a> Field<'a> {
    fn new(game: &'a GameMatrix, mu: f64, reference: &'a StrategyProfile) -> Self {
        Self {
            game,
            mu,
            r1: reference.p1.probs(),
            r2: reference.p2.probs(),
            q1: vec![0.0; game.rows()],
            q2: vec![0.0; game.cols()],
        }
    }

    fn eval(&mut self, x: &[f64], y: &[f64], dx: &mut [f64], dy: &mut [f64]) {
        self.game.gradient_into(y, Player::One, &mut self.q1);
        self.game.gradient_into(x, Player::Two, &mut self.q2);
        player_field(x, &self.q1, self.r1, self.mu, dx);
        player_field(y, &self.q2, self.r2, self.mu, dy);
    }

    fn residual(&mut self, x: &[f64], y: &[f64]) -> f64 {
        let mut dx = vec![0.0; x.len()];
        let mut dy = vec![0.0; y.len()];
        self.eval(x, y, &mut dx, &mut dy);
        dx.iter().chain(&dy).fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `dπ/dt` for both players.
pub fn rmd_vector_field(
    game: &GameMatrix,
    profile: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
) -> Result<[Vec<f64>; 2]> {
    check_dims(game, profile, "profile")?;
    check_dims(game, reference, "reference")?;
    check_interior(profile, "profile")?;
    check_interior(reference, "reference")?;
    if !(mu >= 0.0) {
        return Err(Error::invalid("mutation rate must be nonnegative"));
    }
    let mut f = Field::new(game, mu, reference);
    let mut dx = vec![0.0; game.rows()];
    let mut dy = vec![0.0; game.cols()];
    f.eval(profile.p1.probs(), profile.p2.probs(), &mut dx, &mut dy);
    Ok([dx, dy])
}

/// Max-abs of [`rmd_vector_field`].
pub fn rmd_residual(
    game: &GameMatrix,
    profile: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
) -> Result<f64> {
    let [dx, dy] = rmd_vector_field(game, profile, mu, reference)?;
    Ok(dx.iter().chain(&dy).fold(0.0_f64, |m, v| m.max(v.abs())))
}

/// RK4 integration with renormalization onto the simplex after every step.
pub fn integrate(
    game: &GameMatrix,
    init: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
    cfg: &OdeConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_dims(game, init, "initial profile")?;
    check_dims(game, reference, "reference")?;
    check_interior(init, "initial profile")?;
    check_interior(reference, "reference")?;
    if !(mu >= 0.0) {
        return Err(Error::invalid("mutation rate must be nonnegative"));
    }
    let (n, m) = (game.rows(), game.cols());
    let h = cfg.step;
    let mut f = Field::new(game, mu, reference);
    let mut z: Vec<f64> = init.p1.probs().iter().chain(init.p2.probs()).copied().collect();
    let mut k = [vec![0.0; n + m], vec![0.0; n + m], vec![0.0; n + m], vec![0.0; n + m]];
    let mut tmp = vec![0.0; n + m];
    let steps = cfg.steps();
    let mut out = Vec::with_capacity(steps as usize + 1);
    out.push((0.0, init.clone()));

    for s in 1..=steps {
        let time = s as f64 * h;
        for stage in 0..4 {
            let scale = match stage {
                0 => 0.0,
                3 => h,
                _ => h / 2.0,
            };
            if stage == 0 {
                tmp.copy_from_slice(&z);
            } else {
                for ((t, zi), ki) in tmp.iter_mut().zip(&z).zip(&k[stage - 1]) {
                    *t = zi + scale * ki;
                }
            }
            let (tx, ty) = tmp.split_at(n);
            let (kx, ky) = k[stage].split_at_mut(n);
            f.eval(tx, ty, kx, ky);
        }
        for (i, zi) in z.iter_mut().enumerate() {
            *zi += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        let (zx, zy) = z.split_at_mut(n);
        for part in [zx, zy] {
            let sum: f64 = part.iter().sum();
            if (sum - 1.0).abs() >= 1e-9 * h || part.iter().any(|&p| !(p > 0.0)) {
                return Err(Error::TrajectoryEscaped { time });
            }
            part.iter_mut().for_each(|p| *p /= sum);
        }
        out.push((
            time,
            StrategyProfile::new(
                Strategy::from_normalized(z[..n].to_vec()),
                Strategy::from_normalized(z[n..].to_vec()),
            ),
        ));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iters: u64,
    /// Learning rate of the M2WU phase; `0.01 / u_max` when `None`.
    pub eta: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 5_000_000,
            eta: None,
        }
    }
}

/// Residual at which the M2WU phase hands over to the fixed-point polish.
const POLISH_START: f64 = 1e-6;

/// Finds `π^{μ,r}`: full-feedback M2WU from `r` until the residual is small,
/// then a damped fixed-point polish on `π(a) = μ r(a) / (μ + v − q(a))`.
pub fn solve_stationary(
    game: &GameMatrix,
    mu: f64,
    reference: &StrategyProfile,
    tol: f64,
    max_iters: u64,
) -> Result<StationaryPoint> {
    solve_stationary_with(
        game,
        mu,
        reference,
        &SolveOptions {
            tol,
            max_iters,
            eta: None,
        },
    )
}

pub fn solve_stationary_with(
    game: &GameMatrix,
    mu: f64,
    reference: &StrategyProfile,
    opts: &SolveOptions,
) -> Result<StationaryPoint> {
    if !(mu > 0.0) {
        return Err(Error::invalid("solve_stationary needs mu > 0"));
    }
    if !(opts.tol >= 1e-12) {
        return Err(Error::invalid("tolerance must be at least 1e-12"));
    }
    check_dims(game, reference, "reference")?;
    check_interior(reference, "reference")?;
    let eta = opts.eta.unwrap_or(0.01 / game.u_max().max(1e-12));
    let mut field = Field::new(game, mu, reference);
    let (r1, r2) = (&reference.p1, &reference.p2);

    let mut x = r1.clone();
    let mut y = r2.clone();
    let mut residual = field.residual(x.probs(), y.probs());
    let mut iters = 0u64;
    let mut q1 = vec![0.0; game.rows()];
    let mut q2 = vec![0.0; game.cols()];

    let mut target = opts.tol.max(POLISH_START);
    loop {
        // M2WU phase; after a stalled polish it must gain a decade first
        while residual > opts.tol && iters < opts.max_iters && residual > target {
            game.gradient_into(y.probs(), Player::One, &mut q1);
            game.gradient_into(x.probs(), Player::Two, &mut q2);
            let d1 = mutation_gradient(&q1, &x, r1, mu)?;
            let d2 = mutation_gradient(&q2, &y, r2, mu)?;
            x = softmax_step(&x, &d1, eta)?;
            y = softmax_step(&y, &d2, eta)?;
            iters += 1;
            residual = field.residual(x.probs(), y.probs());
        }
        if residual <= opts.tol || iters >= opts.max_iters {
            break;
        }

        // polish phase
        let mut damping = 0.5;
        while residual > opts.tol && iters < opts.max_iters && damping > 1e-8 {
            iters += 1;
            match fixed_point_sweep(game, &x, &y, r1, r2, mu, damping) {
                Some((cx, cy)) => {
                    let cr = field.residual(cx.probs(), cy.probs());
                    if cr < residual {
                        x = cx;
                        y = cy;
                        residual = cr;
                        damping = (damping * 2.0).min(0.5);
                    } else {
                        damping /= 2.0;
                    }
                }
                None => damping /= 2.0,
            }
        }
        if residual <= opts.tol || iters >= opts.max_iters {
            break;
        }
        target = (residual / 10.0).max(opts.tol);
    }

    let profile = StrategyProfile::new(x, y);
    if residual > opts.tol {
        return Err(Error::NonConvergence {
            residual,
            tol: opts.tol,
            iters,
            best: Box::new(profile),
        });
    }
    Ok(StationaryPoint {
        profile,
        residual,
        mu,
        reference: reference.clone(),
        iterations: iters,
    })
}

/// One damped sweep of `π ← (1−d) π + d · normalize(μ r / (μ + v − q))`.
/// `None` when a denominator is nonpositive or the result leaves the interior.
fn fixed_point_sweep(
    game: &GameMatrix,
    x: &Strategy,
    y: &Strategy,
    r1: &Strategy,
    r2: &Strategy,
    mu: f64,
    damping: f64,
) -> Option<(Strategy, Strategy)> {
    let update = |pi: &Strategy, r: &Strategy, q: &[f64]| -> Option<Strategy> {
        let v = dot(pi.probs(), q);
        let mut target = Vec::with_capacity(q.len());
        for (&ra, &qa) in r.probs().iter().zip(q) {
            let denom = mu + v - qa;
            if !(denom > 0.0) {
                return None;
            }
            target.push(mu * ra / denom);
        }
        let sum: f64 = target.iter().sum();
        let mixed: Vec<f64> = pi
            .probs()
            .iter()
            .zip(&target)
            .map(|(&p, &t)| (1.0 - damping) * p + damping * t / sum)
            .collect();
        let s: f64 = mixed.iter().sum();
        let out: Vec<f64> = mixed.into_iter().map(|p| p / s).collect();
        out.iter().all(|&p| p > 0.0).then(|| Strategy::from_normalized(out))
    };
    let mut q1 = vec![0.0; game.rows()];
    let mut q2 = vec![0.0; game.cols()];
    game.gradient_into(y.probs(), Player::One, &mut q1);
    game.gradient_into(x.probs(), Player::Two, &mut q2);
    Some((update(x, r1, &q1)?, update(y, r2, &q2)?))
}

/// Outcome of [`lyapunov_decay_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovReport {
    pub stationary: StationaryPoint,
    /// `min_{i,a} r_i(a) / π_i^{μ,r}(a)`.
    pub xi: f64,
    pub kl_initial: f64,
    pub kl_final: f64,
    pub max_increase: f64,
    pub monotone: bool,
    /// Average `d ln KL / dt` over the window where KL > 1e-12; NaN if empty.
    pub measured_rate: f64,
    /// `−0.9 μ ξ`.
    pub rate_bound: f64,
    pub rate_ok: bool,
}

impl LyapunovReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.rate_ok
    }
}

pub const LYAPUNOV_STEP_TOL: f64 = 1e-9;
const KL_WINDOW_FLOOR: f64 = 1e-12;

/// Integrates RMD and checks `KL(π^{μ,r}, π^t)` for monotone decay at a rate
/// of at least `0.9 μ ξ`.
pub fn lyapunov_decay_check(
    game: &GameMatrix,
    init: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
    cfg: &OdeConfig,
) -> Result<LyapunovReport> {
    let stationary = solve_stationary(game, mu, reference, 1e-12, SolveOptions::default().max_iters)?;
    let xi = min_ratio(reference, &stationary.profile);
    let traj = integrate(game, init, mu, reference, cfg)?;
    let kls = traj
        .iter()
        .map(|(_, p)| kl_profile(&stationary.profile, p))
        .collect::<Result<Vec<_>>>()?;
    let max_increase = kls
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = kls.len() < 2 || max_increase <= LYAPUNOV_STEP_TOL;

    let last_above = kls.iter().rposition(|&k| k > KL_WINDOW_FLOOR);
    let measured_rate = match last_above {
        Some(j) if j > 0 && kls[0] > KL_WINDOW_FLOOR => {
            (kls[j].ln() - kls[0].ln()) / (traj[j].0 - traj[0].0)
        }
        _ => f64::NAN,
    };
    let rate_bound = -0.9 * mu * xi;
    let rate_ok = measured_rate.is_nan() || measured_rate <= rate_bound;
    Ok(LyapunovReport {
        xi,
        kl_initial: kls[0],
        kl_final: *kls.last().unwrap(),
        max_increase: if kls.len() < 2 { 0.0 } else { max_increase },
        monotone,
        measured_rate,
        rate_bound,
        rate_ok,
        stationary,
    })
}

fn min_ratio(r: &StrategyProfile, pi: &StrategyProfile) -> f64 {
    ratios(r, pi).fold(f64::INFINITY, f64::min)
}

fn max_ratio(r: &StrategyProfile, pi: &StrategyProfile) -> f64 {
    ratios(r, pi).fold(f64::NEG_INFINITY, f64::max)
}

fn ratios<'a>(r: &'a StrategyProfile, pi: &'a StrategyProfile) -> impl Iterator<Item = f64> + 'a {
    let p1 = r.p1.probs().iter().zip(pi.p1.probs());
    let p2 = r.p2.probs().iter().zip(pi.p2.probs());
    p1.chain(p2).map(|(a, b)| a / b)
}

/// Both sides of the single-step KL decomposition identity at `profile`:
///
/// left:  `Σ_i ( v_i(π_i, π*_{-i}) + μ − μ Σ_a r_i(a) π*_i(a) / π_i(a) )`
/// right: `−μ Σ_i Σ_a r_i(a) ( √(π_i(a)/π*_i(a)) − √(π*_i(a)/π_i(a)) )²`
pub fn lemma1_sides(
    game: &GameMatrix,
    profile: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
    stationary: &StationaryPoint,
) -> Result<(f64, f64)> {
    check_dims(game, profile, "profile")?;
    check_interior(profile, "profile")?;
    let star = &stationary.profile;
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for player in Player::BOTH {
        let pi = profile.get(player).probs();
        let ps = star.get(player).probs();
        let r = reference.get(player).probs();
        let against_star = match player {
            Player::One => StrategyProfile::new(profile.p1.clone(), star.p2.clone()),
            Player::Two => StrategyProfile::new(star.p1.clone(), profile.p2.clone()),
        };
        let v = game.expected_value(&against_star, player)?;
        let cross: f64 = r.iter().zip(ps).zip(pi).map(|((ra, s), p)| ra * s / p).sum();
        lhs += v + mu - mu * cross;
        for ((&ra, &s), &p) in r.iter().zip(ps).zip(pi) {
            let d = (p / s).sqrt() - (s / p).sqrt();
            rhs -= mu * ra * d * d;
        }
    }
    Ok((lhs, rhs))
}

pub fn lemma1_identity_check(
    game: &GameMatrix,
    profile: &StrategyProfile,
    mu: f64,
    reference: &StrategyProfile,
    stationary: &StationaryPoint,
) -> Result<f64> {
    let (lhs, rhs) = lemma1_sides(game, profile, mu, reference, stationary)?;
    Ok((lhs - rhs).abs())
}

/// Constants of the geometric KL contraction bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ContractionConstants {
    /// Per-step contraction `η (μ α − η (μ² β + γ))` of the bound
    /// `KL_t ≤ KL_0 (1 − rate)^t`.
    pub fn rate(&self, eta: f64, mu: f64) -> f64 {
        eta * (mu * self.alpha - eta * (mu * mu * self.beta + self.gamma))
    }
}

/// `α = min r/π*`, `β = 16/ρ² (max r/π*)²`, `γ = 16 u_max²` with the
/// caller's estimate of the level-set floor `ρ`.
pub fn contraction_constants(
    game: &GameMatrix,
    stationary: &StationaryPoint,
    rho_estimate: f64,
) -> Result<ContractionConstants> {
    if !(rho_estimate > 0.0 && rho_estimate < 1.0) {
        return Err(Error::invalid(format!("rho estimate {rho_estimate} outside (0, 1)")));
    }
    let r = &stationary.reference;
    let pi = &stationary.profile;
    let m = max_ratio(r, pi);
    Ok(ContractionConstants {
        alpha: min_ratio(r, pi),
        beta: 16.0 / (rho_estimate * rho_estimate) * m * m,
        gamma: 16.0 * game.u_max() * game.u_max(),
    })
}

/// CSV rows `t, p1_*, p2_*, kl_to_stationary, exploitability`.
pub fn trajectory_csv(
    game: &GameMatrix,
    trajectory: &[(f64, StrategyProfile)],
    stationary: Option<&StationaryPoint>,
) -> Result<String> {
    let mut out = String::from("t");
    for a in 0..game.rows() {
        write!(out, ",p1_{a}").unwrap();
    }
    for b in 0..game.cols() {
        write!(out, ",p2_{b}").unwrap();
    }
    out.push_str(",kl_to_stationary,exploitability\n");
    for (t, p) in trajectory {
        write!(out, "{}", fmt_f64(*t)).unwrap();
        for x in p.p1.probs().iter().chain(p.p2.probs()) {
            write!(out, ",{}", fmt_f64(*x)).unwrap();
        }
        let kl = stationary
            .map(|s| kl_profile(&s.profile, p))
            .transpose()?
            .map_or(String::new(), fmt_f64);
        writeln!(out, ",{kl},{}", fmt_f64(game.exploitability(p)?)).unwrap();
    }
    Ok(out)
}
