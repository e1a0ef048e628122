//! Bob's max-min guarantee.
//!
//! For a fixed rotation angle Alice picks the preparation that minimizes
//! Bob's expected gain; Bob then picks the angle that maximizes that
//! minimum. The inner problem is solved over Alice's whole pure-state space
//! with multi-start Nelder-Mead; the outer one by a log-spaced scan over
//! `s = sin²θ` followed by golden-section refinement.
//!
//! The restricted family `√η|01⟩ + √(1−η)|10⟩` has a closed-form payoff,
//! [`restricted_payoff`], used for cross-checks and for the η-grid oracle.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{invalid_arg, Error, Result};
use crate::optimize::{golden_max, golden_min, halton, NelderMead};
use crate::protocol::{expected_payoff, AliceStrategy, BobStrategy, GameRules};
use crate::scalar::{cr, Real};

/// `√η|01⟩ + √(1−η)|10⟩`, real nonnegative amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestrictedStrategy<T: Real> {
    pub eta: T,
}

impl<T: Real> RestrictedStrategy<T> {
    pub fn new(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return invalid_arg(format!("eta {eta} outside [0, 1]"));
        }
        Ok(Self { eta })
    }

    pub fn honest() -> Self {
        Self { eta: T::lit(0.5) }
    }

    pub fn to_alice(&self) -> AliceStrategy<T> {
        AliceStrategy::from_eta(self.eta).expect("eta validated on construction")
    }

    /// Weight on `|01⟩` relative to the `|01⟩,|10⟩` subspace.
    pub fn nearest(alice: &AliceStrategy<T>) -> Self {
        let b = alice.beta.norm_sqr();
        let g = alice.gamma.norm_sqr();
        let eta = if b + g > T::zero() { b / (b + g) } else { T::lit(0.5) };
        Self { eta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions<T: Real> {
    /// Nelder-Mead starts for Alice's best response (one of them is honest play).
    pub starts: usize,
    /// Value tolerance of each local search.
    pub tolerance: T,
    /// Evaluation budget per local search.
    pub max_evals: usize,
    /// Log-spaced scan points over `s` before golden-section refinement.
    pub s_scan: usize,
    /// Smallest `s` in the scan.
    pub s_min: T,
    /// Width at which golden-section refinement over `s` stops, relative to `s`.
    pub s_rel_tol: T,
}

impl<T: Real> Default for SearchOptions<T> {
    fn default() -> Self {
        Self {
            starts: 16,
            tolerance: T::lit(1e-9).max(T::epsilon()),
            max_evals: 20_000,
            s_scan: 25,
            s_min: T::lit(1e-6),
            s_rel_tol: T::lit(1e-6).max(T::epsilon().sqrt()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse<T: Real> {
    pub alice: AliceStrategy<T>,
    pub value: T,
    pub evaluations: usize,
    pub converged: bool,
    /// Value spread of the final simplex of the winning start.
    pub tolerance_achieved: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumResult<T: Real> {
    pub r_prize: T,
    pub theta_star: T,
    pub s_star: T,
    /// Bob's guaranteed expected gain.
    pub guarantee: T,
    pub alice_worst: RestrictedStrategy<T>,
    pub alice_worst_full: AliceStrategy<T>,
    pub evaluations: usize,
    pub tolerance_achieved: T,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T: Real> {
    pub r_prize: T,
    pub theta_star: T,
    pub s_star: T,
    pub guarantee: T,
    /// `−√(2/R)`.
    pub paper_g: T,
    /// `guarantee / paper_g`.
    pub ratio: T,
    pub eta_star: T,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sweep<T: Real> {
    pub rows: Vec<SweepRow<T>>,
    /// Least-squares fit of `ln|guarantee|` against `ln R`; absent below two rows.
    pub slope: Option<T>,
    pub intercept: Option<T>,
}

fn check_eta_theta<T: Real>(eta: T, theta: T) -> Result<()> {
    if !(eta >= T::zero() && eta <= T::one()) {
        return invalid_arg(format!("eta {eta} outside [0, 1]"));
    }
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2()) {
        return invalid_arg(format!("theta {theta} outside [0, π/2]"));
    }
    Ok(())
}

/// Closed-form expected gain of `√η|01⟩ + √(1−η)|10⟩` against rotation θ.
///
/// With `s = sin²θ`: `P(B=1) = η(1−s)`,
/// `P(pass) = [(1−η) + 2s√(η(1−η)) + s²η]/(1+s)`,
/// `P(fail) = s(√(1−η) − √η)²/(1+s)`.
pub fn restricted_payoff<T: Real>(eta: T, theta: T, rules: &GameRules<T>) -> Result<T> {
    check_eta_theta(eta, theta)?;
    let sin = theta.sin();
    let s = sin * sin;
    let one = T::one();
    let two = T::lit(2.0);
    let p_b1 = eta * (one - s);
    let p_pass = ((one - eta) + two * s * (eta * (one - eta)).sqrt() + s * s * eta) / (one + s);
    let gap = (one - eta).sqrt() - eta.sqrt();
    let p_fail = s * gap * gap / (one + s);
    Ok(rules.win_stake * p_b1 + rules.loss_stake * p_pass + rules.r_prize * p_fail)
}

/// Minimum of [`restricted_payoff`] over η: a uniform grid of `grid` cells
/// followed by golden-section refinement in the cells around the best node.
pub fn restricted_minimum<T: Real>(theta: T, rules: &GameRules<T>, grid: usize) -> Result<(T, T)> {
    check_eta_theta(T::zero(), theta)?;
    let grid = grid.max(2);
    let g = |eta: T| restricted_payoff(eta, theta, rules).expect("eta within [0, 1]");
    let step = T::one() / T::lit(grid as f64);
    let (k_best, _) = (0..=grid)
        .map(|k| (k, g(T::lit(k as f64) * step)))
        .fold((0, T::infinity()), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let lo = T::lit(k_best.saturating_sub(1) as f64) * step;
    let hi = (T::lit((k_best + 1) as f64) * step).min(T::one());
    let (eta, value, _) = golden_min(g, lo, hi, T::epsilon().sqrt() * T::lit(1e-3));
    // keep the grid node if refinement did not beat it
    let node = T::lit(k_best as f64) * step;
    Ok(if g(node) < value { (node, g(node)) } else { (eta, value) })
}

const N_PARAMS: usize = 6;

/// Maps six unconstrained reals onto a normalized preparation.
///
/// `p[0..3]` are hyperspherical angles for the magnitudes
/// `|α| = cos p0`, `|β| = sin p0 cos p1`, `|γ| = sin p0 sin p1 cos p2`,
/// `|δ| = sin p0 sin p1 sin p2`; `p[3..6]` are the phases of α, β, δ
/// relative to γ (global phase fixed by keeping γ real). Every real vector
/// maps to a valid state, so the local search needs no bounds.
pub fn alice_from_params<T: Real>(p: &[T]) -> AliceStrategy<T> {
    let (s0, c0) = p[0].sin_cos();
    let (s1, c1) = p[1].sin_cos();
    let (s2, c2) = p[2].sin_cos();
    let polar = |r: T, phi: T| Complex::from_polar(r, phi);
    AliceStrategy {
        alpha: polar(c0, p[3]),
        beta: polar(s0 * c1, p[4]),
        gamma: cr(s0 * s1 * c2),
        delta: polar(s0 * s1 * s2, p[5]),
    }
}

fn honest_params<T: Real>() -> Vec<T> {
    let z = T::zero();
    vec![T::FRAC_PI_2(), T::FRAC_PI_4(), z, z, z, z]
}

fn start_points<T: Real>(count: usize) -> Vec<Vec<T>> {
    let mut pts = vec![honest_params()];
    let pi = std::f64::consts::PI;
    for k in 1..count.max(1) as u64 {
        let h = halton(k, N_PARAMS);
        pts.push(
            h.iter()
                .enumerate()
                .map(|(i, u)| T::lit(if i < 3 { u * pi / 2.0 } else { (2.0 * u - 1.0) * pi }))
                .collect(),
        );
    }
    pts
}

/// Alice's best response to rotation θ over her full pure-state space.
///
/// Starts run on the current rayon pool and are reduced in index order.
/// Among starts within `opts.tolerance` of the best value the one closest to
/// honest play (smallest `|η − 1/2|`) is reported.
pub fn alice_best_response<T: Real>(
    theta: T,
    rules: &GameRules<T>,
    opts: &SearchOptions<T>,
) -> Result<BestResponse<T>> {
    let bob = BobStrategy::new(theta)?;
    let objective = |p: &[T]| -> T {
        expected_payoff(&alice_from_params(p), &bob, rules)
            .map(|b| b.expected_gain)
            .unwrap_or_else(|_| T::infinity())
    };
    let nm = NelderMead {
        f_tol: opts.tolerance,
        max_evals: opts.max_evals,
        ..NelderMead::default()
    };
    let runs: Vec<_> = start_points::<T>(opts.starts)
        .into_par_iter()
        .map(|x0| nm.minimize(objective, &x0))
        .collect();
    let evaluations = runs.iter().map(|r| r.evals).sum();
    let best_value = runs.iter().map(|r| r.value).fold(T::infinity(), T::min);
    if !best_value.is_finite() {
        return Err(Error::InvalidArgument("payoff objective is not finite".into()));
    }
    let half = T::lit(0.5);
    let chosen = runs
        .iter()
        .filter(|r| r.value <= best_value + opts.tolerance)
        .min_by(|a, b| {
            let da = (RestrictedStrategy::nearest(&alice_from_params(&a.x)).eta - half).abs();
            let db = (RestrictedStrategy::nearest(&alice_from_params(&b.x)).eta - half).abs();
            da.partial_cmp(&db)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("at least one start");
    Ok(BestResponse {
        alice: alice_from_params(&chosen.x),
        value: chosen.value,
        evaluations,
        converged: chosen.converged,
        tolerance_achieved: chosen.spread,
    })
}

/// Bob's guaranteed gain: max over θ of Alice's best-response value.
pub fn bob_guarantee<T: Real>(rules: &GameRules<T>, opts: &SearchOptions<T>) -> Result<EquilibriumResult<T>> {
    if !(rules.r_prize > T::one()) {
        return invalid_arg(format!("equilibrium search needs R > 1, got {}", rules.r_prize));
    }
    let mut evaluations = 0usize;
    let mut value_at = |s: T| -> Result<BestResponse<T>> {
        let theta = s.sqrt().asin().min(T::FRAC_PI_2());
        let br = alice_best_response(theta, rules, opts)?;
        evaluations += br.evaluations;
        Ok(br)
    };

    let n = opts.s_scan.max(3);
    let log_lo = opts.s_min.ln();
    let scan: Vec<T> = (0..n)
        .map(|k| (log_lo * (T::one() - T::lit(k as f64) / T::lit((n - 1) as f64))).exp())
        .collect();
    let mut values = Vec::with_capacity(n);
    for &s in &scan {
        values.push(value_at(s)?.value);
    }
    let k_best = (0..n).fold(0, |b, k| if values[k] > values[b] { k } else { b });
    let lo = scan[k_best.saturating_sub(1)];
    let hi = scan[(k_best + 1).min(n - 1)];

    let mut failure = None;
    let (s_star, _, _) = golden_max(
        |s| match value_at(s) {
            Ok(br) => br.value,
            Err(e) => {
                failure.get_or_insert(e);
                T::neg_infinity()
            }
        },
        lo,
        hi,
        opts.s_rel_tol * scan[k_best],
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (s_star, br) = {
        let at_star = value_at(s_star)?;
        let at_node = value_at(scan[k_best])?;
        if at_node.value > at_star.value {
            (scan[k_best], at_node)
        } else {
            (s_star, at_star)
        }
    };
    Ok(EquilibriumResult {
        r_prize: rules.r_prize,
        theta_star: s_star.sqrt().asin(),
        s_star,
        guarantee: br.value,
        alice_worst: RestrictedStrategy::nearest(&br.alice),
        alice_worst_full: br.alice,
        evaluations,
        tolerance_achieved: br.tolerance_achieved,
        converged: br.converged,
    })
}

/// Equilibria for ascending prizes, with a log-log slope fit of `|G|` vs R.
pub fn sweep_r<T: Real>(
    r_values: &[T],
    base: &GameRules<T>,
    opts: &SearchOptions<T>,
) -> Result<Sweep<T>> {
    if r_values.iter().any(|r| !(*r > T::one())) {
        return invalid_arg("all prizes in a sweep must exceed 1");
    }
    if r_values.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid_arg("prizes must be strictly ascending");
    }
    let mut rows = Vec::with_capacity(r_values.len());
    for &r in r_values {
        let rules = GameRules::with_stakes(r, base.win_stake, base.loss_stake)?;
        let eq = bob_guarantee(&rules, opts)?;
        let paper_g = -(T::lit(2.0) / r).sqrt();
        rows.push(SweepRow {
            r_prize: r,
            theta_star: eq.theta_star,
            s_star: eq.s_star,
            guarantee: eq.guarantee,
            paper_g,
            ratio: eq.guarantee / paper_g,
            eta_star: eq.alice_worst.eta,
            converged: eq.converged,
        });
    }
    let (slope, intercept) = match loglog_fit(&rows) {
        Some((a, b)) => (Some(a), Some(b)),
        None => (None, None),
    };
    Ok(Sweep { rows, slope, intercept })
}

fn loglog_fit<T: Real>(rows: &[SweepRow<T>]) -> Option<(T, T)> {
    if rows.len() < 2 {
        return None;
    }
    let pts: Vec<(T, T)> = rows
        .iter()
        .map(|r| (r.r_prize.ln(), r.guarantee.abs().ln()))
        .collect();
    let n = T::lit(pts.len() as f64);
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
