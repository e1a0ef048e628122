//! Derivative-free minimizers used by the equilibrium search.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMead<T: Real> {
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: T,
    /// ...and the simplex diameter falls below this.
    pub x_tol: T,
    pub initial_step: T,
    pub max_evals: usize,
    /// Fresh simplices rebuilt around the incumbent after convergence.
    pub restarts: usize,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self {
            f_tol: T::lit(1e-9).max(T::epsilon()),
            x_tol: T::lit(1e-7).max(T::epsilon().sqrt()),
            initial_step: T::lit(0.25),
            max_evals: 20_000,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum<T: Real> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
    /// Value spread of the final simplex.
    pub spread: T,
}

impl<T: Real> NelderMead<T> {
    pub fn minimize(&self, mut f: impl FnMut(&[T]) -> T, x0: &[T]) -> Minimum<T> {
        let mut evals = 0usize;
        let mut eval = |x: &[T]| {
            evals += 1;
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        let mut best = self.run(&mut eval, x0.to_vec(), self.max_evals);
        for _ in 0..self.restarts {
            let used = best.evals_used;
            if used >= self.max_evals {
                break;
            }
            let again = self.run(&mut eval, best.x.clone(), self.max_evals - used);
            let improved = best.value - again.value;
            let total = used + again.evals_used;
            let done = !(improved > self.f_tol);
            if again.value <= best.value {
                best = Run { evals_used: total, ..again };
            } else {
                best.evals_used = total;
            }
            if done {
                break;
            }
        }
        Minimum {
            x: best.x,
            value: best.value,
            evals,
            converged: best.converged,
            spread: best.spread,
        }
    }

    fn run(&self, f: &mut impl FnMut(&[T]) -> T, x0: Vec<T>, budget: usize) -> Run<T> {
        let n = x0.len();
        let two = T::lit(2.0);
        let half = T::lit(0.5);
        let mut used = 0usize;
        let mut call = |x: &[T], used: &mut usize| {
            *used += 1;
            f(x)
        };
        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
        let v0 = call(&x0, &mut used);
        simplex.push((x0.clone(), v0));
        for i in 0..n {
            let mut x = x0.clone();
            x[i] = x[i] + self.initial_step;
            let v = call(&x, &mut used);
            simplex.push((x, v));
        }
        let mut converged = false;
        loop {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            let spread = simplex[n].1 - simplex[0].1;
            let diameter = simplex[1..]
                .iter()
                .map(|(x, _)| {
                    x.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (*a - *b).abs())
                        .fold(T::zero(), T::max)
                })
                .fold(T::zero(), T::max);
            if spread <= self.f_tol && diameter <= self.x_tol {
                converged = true;
                break;
            }
            if used + 2 > budget {
                break;
            }
            let centroid: Vec<T> = (0..n)
                .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<T>() / T::lit(n as f64))
                .collect();
            let along = |t: T| -> Vec<T> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| *c + t * (*w - *c))
                    .collect()
            };
            let xr = along(-T::one());
            let fr = call(&xr, &mut used);
            if fr < simplex[0].1 {
                let xe = along(-two);
                let fe = call(&xe, &mut used);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(-half);
                let fc = call(&xc, &mut used);
                (xc, fc)
            } else {
                let xc = along(half);
                let fc = call(&xc, &mut used);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            // shrink toward the best vertex
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x: Vec<T> = best
                    .iter()
                    .zip(&vertex.0)
                    .map(|(b, v)| *b + half * (*v - *b))
                    .collect();
                let v = call(&x, &mut used);
                *vertex = (x, v);
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let spread = simplex[n].1 - simplex[0].1;
        let (x, value) = simplex.swap_remove(0);
        Run { x, value, evals_used: used, converged, spread }
    }
}

struct Run<T> {
    x: Vec<T>,
    value: T,
    evals_used: usize,
    converged: bool,
    spread: T,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max, evaluations)`.
pub fn golden_max<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, x_tol: T) -> (T, T, usize) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evals = 2;
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    if fc >= fd {
        (c, fc, evals)
    } else {
        (d, fd, evals)
    }
}

/// Golden-section search for the minimum; see [`golden_max`].
pub fn golden_min<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, x_tol: T) -> (T, T, usize) {
    let (x, v, n) = golden_max(|x| -f(x), lo, hi, x_tol);
    (x, -v, n)
}

/// Radical inverse of `index` in `base` (one coordinate of a Halton point).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// `index`-th point of the Halton sequence in `dim ≤ 8` dimensions, in `[0,1)^dim`.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton sequence supports up to 8 dimensions");
    PRIMES[..dim].iter().map(|&p| radical_inverse(index, p)).collect()
}
