//! Dense state vectors for up to three qubits.
//!
//! Wires are numbered from the most significant bit: on an `n`-qubit
//! register wire `w` is bit `n - 1 - w` of the basis index, so for the
//! three-wire register A=0, B=1, C=2 the index of `|abc⟩` is `4a + 2b + c`
//! and kets read left to right. Unitaries acting on a wire list use the same
//! rule locally: the first listed wire is the most significant bit of the
//! matrix index.

use std::fmt;

use num_complex::Complex;

use crate::error::{invalid_arg, Error, Result};
use crate::scalar::{cone, cr, czero, Real, C};

pub const MAX_QUBITS: usize = 3;

/// Pure state of `n_qubits` qubits stored as `2^n` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitState<T: Real> {
    n_qubits: usize,
    amps: Vec<C<T>>,
}

/// Square unitary matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix<T: Real> {
    dim: usize,
    entries: Vec<C<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T: Real> {
    pub bit: u8,
    /// Born probability of `bit`.
    pub prob: T,
    pub collapsed: QubitState<T>,
}

/// Outcome of a binary projective measurement onto a target substate.
///
/// A branch whose probability falls below [`Real::collapse_floor`] is
/// reported as `None` rather than renormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult<T: Real> {
    pub pass_prob: T,
    pub passed_state: Option<QubitState<T>>,
    pub failed_state: Option<QubitState<T>>,
}

impl<T: Real> ProjectionResult<T> {
    pub fn fail_prob(&self) -> T {
        T::one() - self.pass_prob
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return invalid_arg(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
    }
    Ok(())
}

/// Local (sub-register) index of global basis index `global` restricted to `wires`.
#[inline]
fn local_index(global: usize, wires: &[usize], n_qubits: usize) -> usize {
    wires
        .iter()
        .fold(0, |acc, &w| (acc << 1) | ((global >> (n_qubits - 1 - w)) & 1))
}

/// Overwrite the bits of `global` on `wires` with the bits of `local`.
#[inline]
fn with_local(global: usize, local: usize, wires: &[usize], n_qubits: usize) -> usize {
    let k = wires.len();
    wires.iter().enumerate().fold(global, |acc, (pos, &w)| {
        let shift = n_qubits - 1 - w;
        let bit = (local >> (k - 1 - pos)) & 1;
        (acc & !(1 << shift)) | (bit << shift)
    })
}

fn check_wires(wires: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &w) in wires.iter().enumerate() {
        if w >= n_qubits {
            return invalid_arg(format!("wire {w} out of range for {n_qubits} qubits"));
        }
        if wires[..i].contains(&w) {
            return invalid_arg(format!("duplicate wire {w}"));
        }
    }
    Ok(())
}

impl<T: Real> QubitState<T> {
    /// Computational basis state `|basis_index⟩`.
    pub fn new_basis_state(n_qubits: usize, basis_index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1 << n_qubits;
        if basis_index >= dim {
            return invalid_arg(format!("basis index {basis_index} out of range for {n_qubits} qubits"));
        }
        let mut amps = vec![czero(); dim];
        amps[basis_index] = cone();
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C<T>>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return invalid_arg(format!(
                "{} amplitudes supplied for {n_qubits} qubits",
                amps.len()
            ));
        }
        let state = Self { n_qubits, amps };
        state.check_normalized()?;
        Ok(state)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(n_qubits: usize, amps: Vec<C<T>>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return invalid_arg(format!(
                "{} amplitudes supplied for {n_qubits} qubits",
                amps.len()
            ));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C<T> {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let dev = (self.norm_sqr() - T::one()).abs();
        if !(dev <= T::validation_tol()) {
            return Err(Error::InvalidState(format!(
                "norm deviates from 1 by {}",
                dev
            )));
        }
        Ok(())
    }

    /// Applies `u` to `wires`, identity on all other wires.
    pub fn apply_unitary(&self, u: &UnitaryMatrix<T>, wires: &[usize]) -> Result<Self> {
        check_wires(wires, self.n_qubits)?;
        if u.dim != 1 << wires.len() {
            return invalid_arg(format!(
                "{0}x{0} matrix cannot act on {1} wire(s)",
                u.dim,
                wires.len()
            ));
        }
        let n = self.n_qubits;
        let amps = (0..self.amps.len())
            .map(|i| {
                let row = local_index(i, wires, n);
                (0..u.dim)
                    .map(|col| u.get(row, col) * self.amps[with_local(i, col, wires, n)])
                    .fold(czero(), |acc, x| acc + x)
            })
            .collect();
        Ok(Self { n_qubits: n, amps })
    }

    /// Probability that `wire` reads `bit`.
    pub fn probability(&self, wire: usize, bit: u8) -> Result<T> {
        check_wires(&[wire], self.n_qubits)?;
        let shift = self.n_qubits - 1 - wire;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i >> shift) & 1) as u8 == bit)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Measures `wire` in the computational basis. Bit 0 is returned iff
    /// `rand01 < P(0)`; a branch below the collapse floor is never returned.
    pub fn measure_qubit(&self, wire: usize, rand01: T) -> Result<Measurement<T>> {
        if !(rand01 >= T::zero() && rand01 < T::one()) {
            return invalid_arg(format!("random draw {rand01} outside [0, 1)"));
        }
        check_wires(&[wire], self.n_qubits)?;
        self.check_normalized()?;
        let p0 = self.probability(wire, 0)?;
        let p1 = self.probability(wire, 1)?;
        let floor = T::collapse_floor();
        let bit = if p0 < floor {
            1
        } else if p1 < floor || rand01 < p0 {
            0
        } else {
            1
        };
        let prob = if bit == 0 { p0 } else { p1 };
        let shift = self.n_qubits - 1 - wire;
        let scale = prob.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if ((i >> shift) & 1) as u8 == bit {
                    a / scale
                } else {
                    czero()
                }
            })
            .collect();
        Ok(Measurement {
            bit,
            prob,
            collapsed: Self { n_qubits: self.n_qubits, amps },
        })
    }

    /// Projects the sub-register `wires` onto `target` (identity on the rest).
    pub fn project(&self, wires: &[usize], target: &QubitState<T>) -> Result<ProjectionResult<T>> {
        check_wires(wires, self.n_qubits)?;
        if target.n_qubits != wires.len() {
            return invalid_arg(format!(
                "{}-qubit target cannot be projected on {} wire(s)",
                target.n_qubits,
                wires.len()
            ));
        }
        let n = self.n_qubits;
        // passed component: (|t⟩⟨t| ⊗ I) |ψ⟩
        let mut passed = vec![czero(); self.amps.len()];
        for (i, slot) in passed.iter_mut().enumerate() {
            let overlap = (0..target.amps.len())
                .map(|j| target.amps[j].conj() * self.amps[with_local(i, j, wires, n)])
                .fold(czero(), |acc, x| acc + x);
            *slot = target.amps[local_index(i, wires, n)] * overlap;
        }
        let failed: Vec<C<T>> = self.amps.iter().zip(&passed).map(|(a, p)| a - p).collect();
        let pass_raw: T = passed.iter().map(|a| a.norm_sqr()).sum();
        let fail_raw: T = failed.iter().map(|a| a.norm_sqr()).sum();
        let total = pass_raw + fail_raw;
        let pass_prob = (pass_raw / total).min(T::one());
        let floor = T::collapse_floor();
        let renorm = |v: Vec<C<T>>, p: T| {
            let s = p.sqrt();
            Self {
                n_qubits: n,
                amps: v.into_iter().map(|a| a / s).collect(),
            }
        };
        Ok(ProjectionResult {
            pass_prob,
            passed_state: (pass_prob >= floor).then(|| renorm(passed, pass_raw)),
            failed_state: (T::one() - pass_prob >= floor).then(|| renorm(failed, fail_raw)),
        })
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner_product(&self, other: &QubitState<T>) -> Result<C<T>> {
        if self.n_qubits != other.n_qubits {
            return invalid_arg(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            ));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(czero(), |acc, x| acc + x))
    }

    /// Keeps only the amplitudes of `wires`, assuming every other wire sits
    /// in a definite basis state. Used to read off e.g. the A,C state after B
    /// has been measured.
    pub fn restrict(&self, wires: &[usize]) -> Result<QubitState<T>> {
        check_wires(wires, self.n_qubits)?;
        let k = wires.len();
        let n = self.n_qubits;
        let mut out = vec![czero(); 1 << k];
        let mut rest_seen: Option<usize> = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() <= T::zero() {
                continue;
            }
            let rest = with_local(i, 0, wires, n);
            match rest_seen {
                None => rest_seen = Some(rest),
                Some(r) if r != rest => {
                    return Err(Error::InvalidState(
                        "remaining wires are not in a single basis state".into(),
                    ))
                }
                _ => {}
            }
            out[local_index(i, wires, n)] = *a;
        }
        QubitState::normalized(k, out)
    }
}

impl<T: Real> fmt::Display for QubitState<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() <= T::collapse_floor() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|{:0width$b}⟩", a.re, a.im, i, width = self.n_qubits)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl<T: Real> UnitaryMatrix<T> {
    /// Row-major entries; rejects non-unitary input.
    pub fn new(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        if !dim.is_power_of_two() || !(2..=1 << MAX_QUBITS).contains(&dim) {
            return invalid_arg(format!("unsupported matrix dimension {dim}"));
        }
        if entries.len() != dim * dim {
            return invalid_arg(format!("{} entries for a {dim}x{dim} matrix", entries.len()));
        }
        let m = Self { dim, entries };
        let dev = m.unitarity_defect();
        if !(dev <= T::validation_tol()) {
            return invalid_arg(format!("matrix is not unitary (defect {dev})"));
        }
        Ok(m)
    }

    pub(crate) fn new_unchecked(dim: usize, entries: Vec<C<T>>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![czero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = cone();
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C<T> {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let entries = (0..d * d).map(|k| self.get(k % d, k / d).conj()).collect();
        Self { dim: d, entries }
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &UnitaryMatrix<T>) -> Result<Self> {
        if self.dim != rhs.dim {
            return invalid_arg(format!("cannot multiply {}x{0} by {}x{1}", self.dim, rhs.dim));
        }
        let d = self.dim;
        let entries = (0..d * d)
            .map(|k| {
                let (r, c) = (k / d, k % d);
                (0..d)
                    .map(|j| self.get(r, j) * rhs.get(j, c))
                    .fold(czero(), |acc, x| acc + x)
            })
            .collect();
        Ok(Self { dim: d, entries })
    }

    /// Largest elementwise modulus of `U†U − I`.
    pub fn unitarity_defect(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for r in 0..d {
            for c in 0..d {
                let mut acc = czero::<T>();
                for j in 0..d {
                    acc = acc + self.get(j, r).conj() * self.get(j, c);
                }
                if r == c {
                    acc = acc - cone();
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_entry_distance(&self, other: &UnitaryMatrix<T>) -> Result<T> {
        if self.dim != other.dim {
            return invalid_arg("dimension mismatch");
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// Column `col`, i.e. the image of basis state `|col⟩`.
    pub fn column(&self, col: usize) -> Vec<C<T>> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: C<T>) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }
}

/// Elementary gate matrices.
pub mod gates {
    use super::*;

    fn m2<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> UnitaryMatrix<T> {
        UnitaryMatrix::new_unchecked(2, vec![a, b, c, d])
    }

    /// Qubit flip.
    pub fn x<T: Real>() -> UnitaryMatrix<T> {
        m2(czero(), cone(), cone(), czero())
    }

    /// Phase flip.
    pub fn z<T: Real>() -> UnitaryMatrix<T> {
        m2(cone(), czero(), czero(), -cone::<T>())
    }

    pub fn h<T: Real>() -> UnitaryMatrix<T> {
        let s = cr(T::FRAC_1_SQRT_2());
        m2(s, s, s, -s)
    }

    /// `exp(-i·angle·Y/2)`.
    pub fn ry<T: Real>(angle: T) -> UnitaryMatrix<T> {
        let half = angle / T::lit(2.0);
        let (s, c) = half.sin_cos();
        m2(cr(c), cr(-s), cr(s), cr(c))
    }

    /// `exp(-i·angle·Z/2)`.
    pub fn rz<T: Real>(angle: T) -> UnitaryMatrix<T> {
        let half = angle / T::lit(2.0);
        m2(
            Complex::from_polar(T::one(), -half),
            czero(),
            czero(),
            Complex::from_polar(T::one(), half),
        )
    }

    /// CNOT with the first wire as control.
    pub fn cnot<T: Real>() -> UnitaryMatrix<T> {
        let (o, l) = (czero::<T>(), cone::<T>());
        UnitaryMatrix::new_unchecked(
            4,
            vec![l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = QubitState<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        Complex::new(re, im)
    }

    fn close(a: &[C<f64>], b: &[C<f64>], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn basis_states() {
        let s = S::new_basis_state(3, 0).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == c(0.0, 0.0)));
        let s = S::new_basis_state(2, 2).unwrap();
        assert_eq!(s.amplitude(2), c(1.0, 0.0));
        assert!(matches!(S::new_basis_state(3, 8), Err(Error::InvalidArgument(_))));
        assert!(S::new_basis_state(0, 0).is_err());
        assert!(S::new_basis_state(4, 0).is_err());
    }

    #[test]
    fn hadamard_and_cnot() {
        let s = S::new_basis_state(1, 0).unwrap();
        let out = s.apply_unitary(&gates::h(), &[0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(out.amplitudes(), &[c(r, 0.0), c(r, 0.0)], 1e-15));

        let s = S::new_basis_state(2, 0b10).unwrap();
        let out = s.apply_unitary(&gates::cnot(), &[0, 1]).unwrap();
        assert_eq!(out, S::new_basis_state(2, 0b11).unwrap());
        // reversed wire order makes wire 1 the control
        let out = s.apply_unitary(&gates::cnot(), &[1, 0]).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn apply_rejects_bad_wires() {
        let s = S::new_basis_state(3, 0).unwrap();
        assert!(s.apply_unitary(&gates::cnot(), &[1, 1]).is_err());
        assert!(s.apply_unitary(&gates::cnot(), &[0]).is_err());
        assert!(s.apply_unitary(&gates::h(), &[3]).is_err());
    }

    #[test]
    fn measurement_threshold() {
        let plus = S::normalized(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let m = plus.measure_qubit(0, 0.3).unwrap();
        assert_eq!(m.bit, 0);
        assert!((m.prob - 0.5).abs() < 1e-15);
        assert_eq!(m.collapsed, S::new_basis_state(1, 0).unwrap());

        let one = S::new_basis_state(1, 1).unwrap();
        let m = one.measure_qubit(0, 0.99).unwrap();
        assert_eq!((m.bit, m.prob), (1, 1.0));
        // zero-probability branch is unreachable even for a draw of 0
        let m = one.measure_qubit(0, 0.0).unwrap();
        assert_eq!(m.bit, 1);
    }

    #[test]
    fn measure_b_of_three_qubit_state() {
        // (|100⟩ + |010⟩)/√2 measured on B with draw 0.7
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0b100] = c(1.0, 0.0);
        amps[0b010] = c(1.0, 0.0);
        let s = S::normalized(3, amps).unwrap();
        let m = s.measure_qubit(1, 0.7).unwrap();
        assert_eq!(m.bit, 1);
        assert!((m.prob - 0.5).abs() < 1e-15);
        assert!(close(
            m.collapsed.amplitudes(),
            S::new_basis_state(3, 0b010).unwrap().amplitudes(),
            1e-15
        ));
    }

    #[test]
    fn measure_rejects_bad_input() {
        let s = S::new_basis_state(2, 0).unwrap();
        assert!(s.measure_qubit(0, 1.0).is_err());
        assert!(s.measure_qubit(0, -0.1).is_err());
        assert!(s.measure_qubit(2, 0.5).is_err());
        let broken = QubitState {
            n_qubits: 1,
            amps: vec![c(1.0, 0.0), c(1.0, 0.0)],
        };
        assert!(matches!(broken.measure_qubit(0, 0.5), Err(Error::InvalidState(_))));
    }

    #[test]
    fn projection_cases() {
        let s10 = S::new_basis_state(2, 0b10).unwrap();
        let r = s10.project(&[0, 1], &s10).unwrap();
        assert!((r.pass_prob - 1.0).abs() < 1e-15);
        assert!(r.failed_state.is_none());

        let s00 = S::new_basis_state(2, 0).unwrap();
        let bell = S::normalized(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = s00.project(&[0, 1], &bell).unwrap();
        assert_eq!(r.pass_prob, 0.0);
        assert!(r.passed_state.is_none());
        assert_eq!(r.failed_state.unwrap(), s00);

        assert!(s00.project(&[0], &bell).is_err());
    }

    #[test]
    fn projection_on_subset_of_three_wires() {
        // |1⟩_A |0⟩_B |0⟩_C projected on (A, C) onto |10⟩
        let s = S::new_basis_state(3, 0b100).unwrap();
        let t = S::new_basis_state(2, 0b10).unwrap();
        let r = s.project(&[0, 2], &t).unwrap();
        assert!((r.pass_prob - 1.0).abs() < 1e-15);
        assert_eq!(r.passed_state.unwrap(), s);
    }

    #[test]
    fn inner_products() {
        let a = S::new_basis_state(2, 1).unwrap();
        let b = S::new_basis_state(2, 2).unwrap();
        assert_eq!(a.inner_product(&a).unwrap(), c(1.0, 0.0));
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        let plus = S::normalized(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let zero = S::new_basis_state(1, 0).unwrap();
        let ip = plus.inner_product(&zero).unwrap();
        assert!((ip - c(std::f64::consts::FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(plus.inner_product(&a).is_err());
        // conjugation on the left argument
        let i_state = S::from_amplitudes(1, vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(i_state.inner_product(&zero).unwrap(), c(0.0, -1.0));
    }

    #[test]
    fn restrict_reads_off_remaining_wires() {
        let mut amps = vec![c(0.0, 0.0); 8];
        amps[0b001] = c(0.6, 0.0);
        amps[0b100] = c(0.8, 0.0);
        let s = S::from_amplitudes(3, amps).unwrap();
        let ac = s.restrict(&[0, 2]).unwrap();
        assert!(close(ac.amplitudes(), &[c(0.0, 0.0), c(0.6, 0.0), c(0.8, 0.0), c(0.0, 0.0)], 1e-15));
        let ghz = S::normalized(3, {
            let mut v = vec![c(0.0, 0.0); 8];
            v[0] = c(1.0, 0.0);
            v[7] = c(1.0, 0.0);
            v
        })
        .unwrap();
        assert!(ghz.restrict(&[0, 2]).is_err());
    }

    #[test]
    fn unitary_validation() {
        assert!(UnitaryMatrix::<f64>::new(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(UnitaryMatrix::<f64>::new(3, vec![c(1.0, 0.0); 9]).is_err());
        for g in [gates::x(), gates::z(), gates::h(), gates::ry(0.7), gates::rz(-1.3)] {
            assert!(g.unitarity_defect() < 1e-15);
        }
        assert!(gates::cnot::<f64>().unitarity_defect() == 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let s = QubitState::<f32>::new_basis_state(1, 0).unwrap();
        let out = s.apply_unitary(&gates::h(), &[0]).unwrap();
        let m = out.measure_qubit(0, 0.75).unwrap();
        assert_eq!(m.bit, 1);
        assert!((m.prob - 0.5).abs() < 1e-6);
    }
}
