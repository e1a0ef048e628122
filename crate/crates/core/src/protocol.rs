//! The two-party gambling game.
//!
//! Alice prepares qubits A and B; Bob owns B and an ancilla C that starts in
//! `|0⟩`. Bob rotates B,C by `U(θ)`, measures B and wins `win_stake` on a 1.
//! On a 0 the A,C pair is projected onto the verification state for the same
//! θ: Bob pays `loss_stake` if it passes and collects `r_prize` if it fails.
//!
//! Wire layout is A=0, B=1, C=2 (see [`crate::qstate`]).

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::qstate::{QubitState, UnitaryMatrix};
use crate::scalar::{cone, cr, czero, Real, C};

pub const WIRE_A: usize = 0;
pub const WIRE_B: usize = 1;
pub const WIRE_C: usize = 2;

/// Rounds simulated per independent random substream.
pub const SHARD_ROUNDS: u64 = 1 << 16;

/// Alice's preparation `|00⟩ → α|00⟩ + β|01⟩ + γ|10⟩ + δ|11⟩` on wires A,B.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AliceStrategy<T: Real> {
    pub alpha: C<T>,
    pub beta: C<T>,
    pub gamma: C<T>,
    pub delta: C<T>,
}

impl<T: Real> AliceStrategy<T> {
    pub fn new(alpha: C<T>, beta: C<T>, gamma: C<T>, delta: C<T>) -> Result<Self> {
        let s = Self { alpha, beta, gamma, delta };
        s.validate()?;
        Ok(s)
    }

    /// Real amplitudes, validated.
    pub fn real(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        Self::new(cr(alpha), cr(beta), cr(gamma), cr(delta))
    }

    /// `(|01⟩ + |10⟩)/√2`.
    pub fn honest() -> Self {
        let r = cr(T::FRAC_1_SQRT_2());
        Self { alpha: czero(), beta: r, gamma: r, delta: czero() }
    }

    /// `√η|01⟩ + √(1−η)|10⟩`; honest play is η = 1/2.
    pub fn from_eta(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return invalid_arg(format!("eta {eta} outside [0, 1]"));
        }
        Ok(Self {
            alpha: czero(),
            beta: cr(eta.sqrt()),
            gamma: cr((T::one() - eta).sqrt()),
            delta: czero(),
        })
    }

    pub fn amplitudes(&self) -> [C<T>; 4] {
        [self.alpha, self.beta, self.gamma, self.delta]
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let dev = (self.norm_sqr() - T::one()).abs();
        if !(dev <= T::validation_tol()) {
            return Err(Error::InvalidStrategy(format!(
                "preparation amplitudes have norm² {} (deviation {dev})",
                self.norm_sqr()
            )));
        }
        Ok(())
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: T) -> Self {
        let p = Complex::from_polar(T::one(), phi);
        Self {
            alpha: self.alpha * p,
            beta: self.beta * p,
            gamma: self.gamma * p,
            delta: self.delta * p,
        }
    }
}

/// Bob's rotation angle θ ∈ [0, π/2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BobStrategy<T: Real> {
    theta: T,
}

impl<T: Real> BobStrategy<T> {
    pub fn new(theta: T) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self { theta })
    }

    /// Strategy with `sin²θ = s`.
    pub fn from_s(s: T) -> Result<Self> {
        if !(s >= T::zero() && s <= T::one()) {
            return invalid_arg(format!("s = sin²θ must lie in [0, 1], got {s}"));
        }
        Self::new(s.sqrt().asin())
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    /// `sin²θ`.
    pub fn s(&self) -> T {
        let sin = self.theta.sin();
        sin * sin
    }
}

/// Stake structure, from Bob's point of view.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameRules<T: Real> {
    pub r_prize: T,
    pub win_stake: T,
    pub loss_stake: T,
}

impl<T: Real> GameRules<T> {
    /// Unit stakes (+1 on a win, −1 on a passed verification).
    pub fn new(r_prize: T) -> Result<Self> {
        Self::with_stakes(r_prize, T::one(), -T::one())
    }

    pub fn with_stakes(r_prize: T, win_stake: T, loss_stake: T) -> Result<Self> {
        if !(r_prize > T::zero()) || !r_prize.is_finite() {
            return invalid_arg(format!("prize R must be positive and finite, got {r_prize}"));
        }
        if !win_stake.is_finite() || !loss_stake.is_finite() {
            return invalid_arg("stakes must be finite");
        }
        Ok(Self { r_prize, win_stake, loss_stake })
    }
}

/// Branch probabilities and Bob's expected gain for one strategy pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PayoffBreakdown<T: Real> {
    /// Bob's qubit reads 1.
    pub p_b1: T,
    /// B reads 0 and verification passes.
    pub p_pass: T,
    /// B reads 0 and verification fails.
    pub p_fail: T,
    pub expected_gain: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verification {
    Passed,
    Failed,
    NotRun,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundOutcome<T: Real> {
    pub b_bit: u8,
    pub verification: Verification,
    pub payoff: T,
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
        return invalid_arg(format!("theta {theta} outside [0, π/2]"));
    }
    Ok(())
}

/// `α|000⟩ + β|010⟩ + γ|100⟩ + δ|110⟩`: Alice's A,B state with C in `|0⟩`.
pub fn initial_state<T: Real>(alice: &AliceStrategy<T>) -> Result<QubitState<T>> {
    alice.validate()?;
    let mut amps = vec![czero(); 8];
    for (ab, amp) in alice.amplitudes().into_iter().enumerate() {
        amps[ab << 1] = amp;
    }
    QubitState::from_amplitudes(3, amps)
}

/// Bob's rotation on wires (B, C), acting on `span{|01⟩, |10⟩}`:
/// `|01⟩ → cosθ|01⟩ − sinθ|10⟩`, `|10⟩ → sinθ|01⟩ + cosθ|10⟩`.
///
/// This is the printed matrix evaluated at −θ; with this sign the honest
/// A,C state after B reads 0 is exactly [`verification_state`]`(θ)`.
pub fn bob_rotation<T: Real>(theta: T) -> Result<UnitaryMatrix<T>> {
    check_theta(theta)?;
    let (s, c) = theta.sin_cos();
    let (o, l) = (czero::<T>(), cone::<T>());
    Ok(UnitaryMatrix::new_unchecked(
        4,
        vec![
            l, o, o, o, //
            o, cr(c), cr(s), o, //
            o, cr(-s), cr(c), o, //
            o, o, o, l,
        ],
    ))
}

/// `√(s/(1+s))|01⟩ + √(1/(1+s))|10⟩` on wires (A, C), with `s = sin²θ`.
pub fn verification_state<T: Real>(theta: T) -> Result<QubitState<T>> {
    check_theta(theta)?;
    let sin = theta.sin();
    let s = sin * sin;
    let denom = T::one() + s;
    QubitState::from_amplitudes(
        2,
        vec![czero(), cr((s / denom).sqrt()), cr((T::one() / denom).sqrt()), czero()],
    )
}

/// Everything about a strategy pair that does not depend on the random draws.
#[derive(Clone, Debug)]
pub struct PreparedGame<T: Real> {
    rules: GameRules<T>,
    rotated: QubitState<T>,
    /// Probability that verification passes given B reads 0 (`None` if B=0 is unreachable).
    pass_given_b0: Option<T>,
}

impl<T: Real> PreparedGame<T> {
    pub fn new(alice: &AliceStrategy<T>, bob: &BobStrategy<T>, rules: &GameRules<T>) -> Result<Self> {
        let rotated = initial_state(alice)?.apply_unitary(&bob_rotation(bob.theta())?, &[WIRE_B, WIRE_C])?;
        let p0 = rotated.probability(WIRE_B, 0)?;
        let pass_given_b0 = if p0 >= T::collapse_floor() {
            let collapsed = rotated.measure_qubit(WIRE_B, T::zero())?.collapsed;
            let ver = verification_state(bob.theta())?;
            Some(collapsed.project(&[WIRE_A, WIRE_C], &ver)?.pass_prob)
        } else {
            None
        };
        Ok(Self { rules: *rules, rotated, pass_given_b0 })
    }

    /// State of A,B,C after Bob's rotation, before any measurement.
    pub fn rotated_state(&self) -> &QubitState<T> {
        &self.rotated
    }

    pub fn breakdown(&self) -> PayoffBreakdown<T> {
        let p_b1 = self.rotated.probability(WIRE_B, 1).expect("wire B exists");
        let p_b0 = self.rotated.probability(WIRE_B, 0).expect("wire B exists");
        let (p_pass, p_fail) = match self.pass_given_b0 {
            Some(q) => (p_b0 * q, p_b0 * (T::one() - q)),
            None => (T::zero(), T::zero()),
        };
        let r = &self.rules;
        PayoffBreakdown {
            p_b1,
            p_pass,
            p_fail,
            expected_gain: r.win_stake * p_b1 + r.loss_stake * p_pass + r.r_prize * p_fail,
        }
    }

    /// Plays one round. The first draw decides B; the second is consumed
    /// only when B reads 0 and decides the verification (pass iff draw < P(pass)).
    pub fn round(&self, mut next_draw: impl FnMut() -> T) -> Result<RoundOutcome<T>> {
        let m = self.rotated.measure_qubit(WIRE_B, next_draw())?;
        if m.bit == 1 {
            return Ok(RoundOutcome {
                b_bit: 1,
                verification: Verification::NotRun,
                payoff: self.rules.win_stake,
            });
        }
        let pass = self.pass_given_b0.unwrap_or(T::one());
        let draw = next_draw();
        if !(draw >= T::zero() && draw < T::one()) {
            return invalid_arg(format!("random draw {draw} outside [0, 1)"));
        }
        let verification = if draw < pass { Verification::Passed } else { Verification::Failed };
        let payoff = match verification {
            Verification::Passed => self.rules.loss_stake,
            _ => self.rules.r_prize,
        };
        Ok(RoundOutcome { b_bit: 0, verification, payoff })
    }

    /// Plays a round from a fixed list of draws (panics if it runs short).
    pub fn round_with_draws(&self, draws: &[T]) -> Result<RoundOutcome<T>> {
        let mut it = draws.iter().copied();
        self.round(|| it.next().expect("not enough draws supplied"))
    }
}

/// Exact Born-rule payoff of a strategy pair.
pub fn expected_payoff<T: Real>(
    alice: &AliceStrategy<T>,
    bob: &BobStrategy<T>,
    rules: &GameRules<T>,
) -> Result<PayoffBreakdown<T>> {
    Ok(PreparedGame::new(alice, bob, rules)?.breakdown())
}

/// Uniform draw in `[0, 1)` converted to `T` without rounding up to 1.
pub fn uniform_draw<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x = T::lit(rng.gen::<f64>());
    if x >= T::one() {
        T::one() - T::epsilon()
    } else {
        x
    }
}

pub fn play_round<T: Real, R: Rng + ?Sized>(
    alice: &AliceStrategy<T>,
    bob: &BobStrategy<T>,
    rules: &GameRules<T>,
    rng: &mut R,
) -> Result<RoundOutcome<T>> {
    PreparedGame::new(alice, bob, rules)?.round(|| uniform_draw(rng))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BranchCounts {
    pub b1: u64,
    pub pass: u64,
    pub fail: u64,
}

impl BranchCounts {
    pub fn total(&self) -> u64 {
        self.b1 + self.pass + self.fail
    }

    fn add(self, o: BranchCounts) -> BranchCounts {
        BranchCounts { b1: self.b1 + o.b1, pass: self.pass + o.pass, fail: self.fail + o.fail }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary<T: Real> {
    pub seed: u64,
    pub n_rounds: u64,
    pub counts: BranchCounts,
    pub mean_payoff: T,
    /// Sample standard deviation over √n.
    pub std_error: T,
}

/// Random substream for one shard: ChaCha8 keyed by `seed`, stream id `shard`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Monte Carlo estimate of Bob's gain over `n_rounds` rounds.
///
/// Rounds are split into shards of [`SHARD_ROUNDS`], each drawing from
/// [`shard_rng`]`(seed, shard)`. Shards run on the current rayon pool and
/// the aggregates are combined from integer counts, so the result does not
/// depend on the number of worker threads.
pub fn simulate<T: Real>(
    alice: &AliceStrategy<T>,
    bob: &BobStrategy<T>,
    rules: &GameRules<T>,
    n_rounds: u64,
    seed: u64,
) -> Result<SimulationSummary<T>> {
    if n_rounds == 0 {
        return invalid_arg("n_rounds must be at least 1");
    }
    let game = PreparedGame::new(alice, bob, rules)?;
    let n_shards = n_rounds.div_ceil(SHARD_ROUNDS);
    let per_shard: Vec<BranchCounts> = (0..n_shards)
        .into_par_iter()
        .map(|shard| {
            let rounds = SHARD_ROUNDS.min(n_rounds - shard * SHARD_ROUNDS);
            let mut rng = shard_rng(seed, shard);
            let mut counts = BranchCounts::default();
            for _ in 0..rounds {
                let out = game.round(|| uniform_draw(&mut rng))?;
                match out.verification {
                    Verification::NotRun => counts.b1 += 1,
                    Verification::Passed => counts.pass += 1,
                    Verification::Failed => counts.fail += 1,
                }
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let counts = per_shard.into_iter().fold(BranchCounts::default(), BranchCounts::add);
    let (mean_payoff, std_error) = summarize(&counts, rules);
    Ok(SimulationSummary { seed, n_rounds, counts, mean_payoff, std_error })
}

fn summarize<T: Real>(counts: &BranchCounts, rules: &GameRules<T>) -> (T, T) {
    let n = counts.total();
    let nf = T::lit(n as f64);
    let branches = [
        (counts.b1, rules.win_stake),
        (counts.pass, rules.loss_stake),
        (counts.fail, rules.r_prize),
    ];
    let mean = branches
        .iter()
        .map(|&(k, v)| T::lit(k as f64) * v)
        .sum::<T>()
        / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let ss = branches
        .iter()
        .map(|&(k, v)| T::lit(k as f64) * (v - mean) * (v - mean))
        .sum::<T>();
    let var = ss / T::lit((n - 1) as f64);
    (mean, (var / nf).sqrt())
}

/// JSON strategy document:
/// `{"alice":{"alpha":[re,im],...}, "bob":{"theta":...}, "rules":{"R":...,"win":1,"loss":-1}}`.
pub mod document {
    use super::*;

    #[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    pub struct AliceDoc {
        #[serde(default)]
        pub alpha: [f64; 2],
        #[serde(default)]
        pub beta: [f64; 2],
        #[serde(default)]
        pub gamma: [f64; 2],
        #[serde(default)]
        pub delta: [f64; 2],
    }

    #[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    pub struct BobDoc {
        pub theta: f64,
    }

    fn one() -> f64 {
        1.0
    }
    fn minus_one() -> f64 {
        -1.0
    }

    #[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    pub struct RulesDoc {
        #[serde(rename = "R")]
        pub r: f64,
        #[serde(default = "one")]
        pub win: f64,
        #[serde(default = "minus_one")]
        pub loss: f64,
    }

    /// Every section is optional so a file may supply only part of a game;
    /// the CLI fills the rest from flags.
    #[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    pub struct StrategyDocument {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub alice: Option<AliceDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub bob: Option<BobDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub rules: Option<RulesDoc>,
    }

    impl StrategyDocument {
        pub fn from_json(text: &str) -> Result<Self> {
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
        }
    }

    impl AliceDoc {
        pub fn to_strategy<T: Real>(&self) -> Result<AliceStrategy<T>> {
            let c = |p: [f64; 2]| Complex::new(T::lit(p[0]), T::lit(p[1]));
            AliceStrategy::new(c(self.alpha), c(self.beta), c(self.gamma), c(self.delta))
        }

        pub fn from_strategy<T: Real>(s: &AliceStrategy<T>) -> Self {
            let p = |a: C<T>| [a.re.to_f64_lossy(), a.im.to_f64_lossy()];
            Self { alpha: p(s.alpha), beta: p(s.beta), gamma: p(s.gamma), delta: p(s.delta) }
        }
    }

    impl BobDoc {
        pub fn to_strategy<T: Real>(&self) -> Result<BobStrategy<T>> {
            BobStrategy::new(T::lit(self.theta))
        }
    }

    impl RulesDoc {
        pub fn to_rules<T: Real>(&self) -> Result<GameRules<T>> {
            GameRules::with_stakes(T::lit(self.r), T::lit(self.win), T::lit(self.loss))
        }
    }
}
