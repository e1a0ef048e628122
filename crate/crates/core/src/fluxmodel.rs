//! Mesoscopic-ring Hamiltonians and their two-level flux-qubit reduction.
//!
//! A ring is described by level energies `E_n` and couplings `ω_mn`. Its
//! Hamiltonian has `E_n` on the diagonal and `−½ℏω_mn` off it. When the two
//! lowest levels are well separated from the rest, the leading 2×2 block is
//! rewritten as `−½(εσ_z + Δσ_x) + c·I`.
//!
//! All numbers in examples and tests are illustrative; no device parameters
//! are implied.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::qstate::UnitaryMatrix;
use crate::scalar::{cr, Real, C};

/// Default required ratio between the upper-level gap and the couplings.
pub const DEFAULT_GAP_RATIO: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RingSpec<T: Real> {
    energies: Vec<T>,
    /// Row-major `N×N`, Hermitian with zero diagonal.
    couplings: Vec<C<T>>,
    hbar: T,
}

impl<T: Real> RingSpec<T> {
    pub fn new(energies: Vec<T>, couplings: Vec<C<T>>, hbar: T) -> Result<Self> {
        let n = energies.len();
        if n < 2 {
            return Err(Error::InvalidSpec(format!("ring needs at least 2 levels, got {n}")));
        }
        if couplings.len() != n * n {
            return Err(Error::InvalidSpec(format!(
                "{} couplings supplied for {n} levels",
                couplings.len()
            )));
        }
        if !(hbar > T::zero()) || !hbar.is_finite() {
            return Err(Error::InvalidSpec(format!("hbar must be positive, got {hbar}")));
        }
        if energies.iter().any(|e| !e.is_finite()) || couplings.iter().any(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::InvalidSpec("non-finite energy or coupling".into()));
        }
        let scale = couplings.iter().map(|w| w.norm()).fold(T::one(), T::max);
        let tol = T::validation_tol() * scale;
        for m in 0..n {
            if couplings[m * n + m].norm() > tol {
                return Err(Error::InvalidSpec(format!("coupling ω_{m}{m} must be zero")));
            }
            for k in m + 1..n {
                if (couplings[m * n + k] - couplings[k * n + m].conj()).norm() > tol {
                    return Err(Error::InvalidSpec(format!("couplings ω_{m}{k} and ω_{k}{m} are not conjugate")));
                }
            }
        }
        Ok(Self { energies, couplings, hbar })
    }

    /// Real symmetric couplings given as nested rows.
    pub fn from_real(energies: Vec<T>, omega: &[Vec<T>], hbar: T) -> Result<Self> {
        let couplings = omega.iter().flat_map(|row| row.iter().map(|&w| cr(w))).collect();
        Self::new(energies, couplings, hbar)
    }

    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn coupling(&self, m: usize, n: usize) -> C<T> {
        self.couplings[m * self.levels() + n]
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }
}

/// Dense Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix<T: Real> {
    dim: usize,
    entries: Vec<C<T>>,
}

impl<T: Real> HermitianMatrix<T> {
    pub fn new(dim: usize, entries: Vec<C<T>>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return invalid_arg(format!("{} entries for a {dim}x{dim} matrix", entries.len()));
        }
        let m = Self { dim, entries };
        let scale = m.entries.iter().map(|e| e.norm()).fold(T::one(), T::max);
        if m.hermiticity_defect() > T::validation_tol() * scale {
            return invalid_arg("matrix is not Hermitian");
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C<T> {
        self.entries[r * self.dim + c]
    }

    /// Largest modulus of `H − H†`.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.dim;
        (0..d * d)
            .map(|k| (self.get(k / d, k % d) - self.get(k % d, k / d).conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Ascending eigenvalues, by cyclic Jacobi on the real symmetric
    /// embedding `[[Re H, −Im H], [Im H, Re H]]` (each eigenvalue appears twice there).
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let m = 2 * n;
        let mut a = vec![T::zero(); m * m];
        for r in 0..n {
            for c in 0..n {
                let h = self.get(r, c);
                a[r * m + c] = h.re;
                a[(r + n) * m + c + n] = h.re;
                a[r * m + c + n] = -h.im;
                a[(r + n) * m + c] = h.im;
            }
        }
        let mut vals = jacobi_eigenvalues(a, m);
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        vals.into_iter().step_by(2).collect()
    }
}

fn jacobi_eigenvalues<T: Real>(mut a: Vec<T>, n: usize) -> Vec<T> {
    let off = |a: &[T]| {
        (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum::<T>()
    };
    let total: T = a.iter().map(|x| *x * *x).sum();
    let target = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..100 {
        if off(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// `−½(εσ_z + Δσ_x) + trace_shift·I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoLevelParams<T: Real> {
    pub epsilon: T,
    pub delta: T,
    pub trace_shift: T,
}

impl<T: Real> TwoLevelParams<T> {
    pub fn matrix(&self) -> HermitianMatrix<T> {
        let half = T::lit(0.5);
        HermitianMatrix {
            dim: 2,
            entries: vec![
                cr(self.trace_shift - half * self.epsilon),
                cr(-half * self.delta),
                cr(-half * self.delta),
                cr(self.trace_shift + half * self.epsilon),
            ],
        }
    }

    /// `trace_shift ∓ ½√(ε² + Δ²)`, ascending.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half_split = T::lit(0.5) * self.epsilon.hypot(self.delta);
        [self.trace_shift - half_split, self.trace_shift + half_split]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduction<T: Real> {
    pub params: TwoLevelParams<T>,
    /// σ_z rotation angle that made `h_01` real and nonpositive.
    pub gauge_phase: T,
    /// Upper-level gap over the largest coupling (infinite for two levels).
    pub gap_ratio: T,
}

/// `H_nn = E_n`, `H_mn = −½ℏω_mn` for `m ≠ n`.
pub fn build_hamiltonian<T: Real>(spec: &RingSpec<T>) -> HermitianMatrix<T> {
    let n = spec.levels();
    let half_hbar = T::lit(0.5) * spec.hbar;
    let entries = (0..n * n)
        .map(|k| {
            let (r, c) = (k / n, k % n);
            if r == c {
                cr(spec.energies[r])
            } else {
                spec.coupling(r, c) * (-half_hbar)
            }
        })
        .collect();
    HermitianMatrix { dim: n, entries }
}

/// Reads `ε`, `Δ` and the trace shift off the leading 2×2 block of `h`.
///
/// For more than two levels the reduction is accepted only when every upper
/// diagonal entry clears `max(h_00, h_11)` by at least `gap_ratio_min` times
/// the largest coupling involved (`Δ` and every `|h_0k|`, `|h_1k|`).
pub fn reduce_two_level<T: Real>(h: &HermitianMatrix<T>, gap_ratio_min: T) -> Result<Reduction<T>> {
    let n = h.dim();
    if n < 2 {
        return invalid_arg("reduction needs at least two levels");
    }
    let (h00, h11, h01) = (h.get(0, 0).re, h.get(1, 1).re, h.get(0, 1));
    let trace_shift = (h00 + h11) * T::lit(0.5);
    let epsilon = h11 - h00;
    let delta = T::lit(2.0) * h01.norm();
    let gauge_phase = if h01.norm() > T::zero() {
        let mut p = T::PI() - h01.arg();
        if p > T::PI() {
            p = p - T::TAU();
        }
        p
    } else {
        T::zero()
    };

    let top = h00.max(h11);
    let gap = (2..n).map(|k| h.get(k, k).re - top).fold(T::infinity(), T::min);
    let coupling = (2..n)
        .flat_map(|k| [h.get(0, k).norm(), h.get(1, k).norm()])
        .fold(delta, T::max);
    let gap_ratio = if n == 2 {
        T::infinity()
    } else if coupling > T::zero() {
        gap / coupling
    } else if gap > T::zero() {
        T::infinity()
    } else {
        T::neg_infinity()
    };
    if !(gap_ratio >= gap_ratio_min) {
        return Err(Error::ReductionInvalid {
            measured: gap_ratio.to_f64_lossy(),
            required: gap_ratio_min.to_f64_lossy(),
        });
    }
    Ok(Reduction {
        params: TwoLevelParams { epsilon, delta, trace_shift },
        gauge_phase,
        gap_ratio,
    })
}

/// `exp(−i t H/ℏ)` for `H = −½(εσ_z + Δσ_x)`; the trace shift is a global
/// phase and is dropped.
pub fn evolve<T: Real>(params: &TwoLevelParams<T>, t: T, hbar: T) -> Result<UnitaryMatrix<T>> {
    if !t.is_finite() {
        return invalid_arg("evolution time must be finite");
    }
    if !(hbar > T::zero()) {
        return invalid_arg("hbar must be positive");
    }
    let omega = params.epsilon.hypot(params.delta);
    if omega == T::zero() {
        return Ok(UnitaryMatrix::identity(2));
    }
    let phi = omega * t / (T::lit(2.0) * hbar);
    let (s, c) = phi.sin_cos();
    let i = Complex::new(T::zero(), T::one());
    let ez = params.epsilon / omega;
    let dx = params.delta / omega;
    UnitaryMatrix::new(
        2,
        vec![
            cr(c) + i * (s * ez),
            i * (s * dx),
            i * (s * dx),
            cr(c) - i * (s * ez),
        ],
    )
}

/// Coupling entry in a ring document: a real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingDoc {
    Real(f64),
    Complex([f64; 2]),
}

/// `{"E": [...], "omega": [[...]], "hbar": 1.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDoc {
    #[serde(rename = "E")]
    pub energies: Vec<f64>,
    pub omega: Vec<Vec<CouplingDoc>>,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    1.0
}

impl RingDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn to_spec<T: Real>(&self) -> Result<RingSpec<T>> {
        let n = self.energies.len();
        if self.omega.len() != n || self.omega.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec(format!("omega must be {n}x{n}")));
        }
        let couplings = self
            .omega
            .iter()
            .flatten()
            .map(|w| match *w {
                CouplingDoc::Real(x) => cr(T::lit(x)),
                CouplingDoc::Complex([re, im]) => Complex::new(T::lit(re), T::lit(im)),
            })
            .collect();
        RingSpec::new(self.energies.iter().map(|&e| T::lit(e)).collect(), couplings, T::lit(self.hbar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_level(e: f64, w: f64, hbar: f64) -> RingSpec<f64> {
        RingSpec::from_real(vec![0.0, e], &[vec![0.0, w], vec![w, 0.0]], hbar).unwrap()
    }

    #[test]
    fn hamiltonian_substitution() {
        let h = build_hamiltonian(&two_level(2.0, 0.6, 1.0));
        assert_eq!(h.get(0, 0), cr(0.0));
        assert_eq!(h.get(1, 1), cr(2.0));
        assert_eq!(h.get(0, 1), cr(-0.3));
        assert_eq!(h.get(1, 0), cr(-0.3));

        let h = build_hamiltonian(&two_level(2.0, 0.0, 1.0));
        assert_eq!(h.get(0, 1), cr(0.0));

        let spec = RingSpec::<f64>::from_real(
            vec![0.0, 1.0, 10.0],
            &[vec![0.0, 0.2, 0.0], vec![0.2, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
            1.0,
        )
        .unwrap();
        let h = build_hamiltonian(&spec);
        assert!((h.get(0, 1) - cr(-0.1)).norm() < 1e-15);
        assert_eq!(h.get(2, 2), cr(10.0));
        assert_eq!(h.get(0, 2), cr(0.0));
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(RingSpec::from_real(vec![0.0], &[vec![0.0]], 1.0).is_err());
        assert!(RingSpec::from_real(vec![0.0, 1.0], &[vec![0.0, 0.1], vec![0.2, 0.0]], 1.0).is_err());
        assert!(RingSpec::from_real(vec![0.0, 1.0], &[vec![0.3, 0.1], vec![0.1, 0.0]], 1.0).is_err());
        assert!(RingSpec::from_real(vec![0.0, 1.0], &[vec![0.0, 0.1], vec![0.1, 0.0]], 0.0).is_err());
        let w = Complex::new(0.1, 0.2);
        assert!(RingSpec::new(vec![0.0, 1.0], vec![cr(0.0), w, w.conj(), cr(0.0)], 1.0).is_ok());
        assert!(RingSpec::new(vec![0.0, 1.0], vec![cr(0.0), w, w, cr(0.0)], 1.0).is_err());
    }

    #[test]
    fn two_level_reduction() {
        let (e, w) = (1.7, 0.4);
        let r = reduce_two_level(&build_hamiltonian(&two_level(e, w, 1.0)), 10.0).unwrap();
        assert!((r.params.epsilon - e).abs() < 1e-15);
        assert!((r.params.delta - w).abs() < 1e-15);
        assert!((r.params.trace_shift - e / 2.0).abs() < 1e-15);
        assert_eq!(r.gauge_phase, 0.0);
        assert!(r.gap_ratio.is_infinite());

        let r = reduce_two_level(&build_hamiltonian(&two_level(e, 0.0, 1.0)), 10.0).unwrap();
        assert_eq!((r.params.epsilon, r.params.delta), (e, 0.0));
    }

    #[test]
    fn complex_coupling_is_gauged_real() {
        let w = Complex::from_polar(0.5, 0.7);
        let spec = RingSpec::<f64>::new(vec![0.0, 1.0], vec![cr(0.0), w, w.conj(), cr(0.0)], 1.0).unwrap();
        let h = build_hamiltonian(&spec);
        let r = reduce_two_level(&h, 10.0).unwrap();
        assert!((r.params.delta - 0.5).abs() < 1e-15);
        let rotated = h.get(0, 1) * Complex::from_polar(1.0, r.gauge_phase);
        assert!(rotated.im.abs() < 1e-15 && rotated.re < 0.0);
        let full = h.eigenvalues();
        let red = r.params.eigenvalues();
        assert!((full[0] - red[0]).abs() < 1e-14 && (full[1] - red[1]).abs() < 1e-14);
    }

    #[test]
    fn three_level_gap_check() {
        let spec = RingSpec::<f64>::from_real(
            vec![0.0, 1.0, 10.0],
            &[vec![0.0, 0.2, 0.0], vec![0.2, 0.0, 0.0], vec![0.0, 0.0, 0.0]],
            1.0,
        )
        .unwrap();
        let h = build_hamiltonian(&spec);
        let r = reduce_two_level(&h, 10.0).unwrap();
        assert!((r.gap_ratio - 45.0).abs() < 1e-12);
        let full = h.eigenvalues();
        let red = r.params.eigenvalues();
        for k in 0..2 {
            assert!((full[k] - red[k]).abs() <= (0.1f64 / 10.0).powi(2) * full[k].abs().max(1.0));
        }

        let close = RingSpec::from_real(
            vec![0.0, 1.0, 1.5],
            &[vec![0.0, 0.2, 0.4], vec![0.2, 0.0, 0.0], vec![0.4, 0.0, 0.0]],
            1.0,
        )
        .unwrap();
        match reduce_two_level(&build_hamiltonian(&close), 10.0) {
            Err(Error::ReductionInvalid { measured, required }) => {
                assert!((measured - 2.5).abs() < 1e-12);
                assert_eq!(required, 10.0);
            }
            other => panic!("expected reduction-invalid, got {other:?}"),
        }
    }

    #[test]
    fn jacobi_matches_closed_form_two_by_two() {
        let p = TwoLevelParams::<f64> { epsilon: 0.3, delta: 1.1, trace_shift: -2.0 };
        let ev = p.matrix().eigenvalues();
        let want = p.eigenvalues();
        assert!((ev[0] - want[0]).abs() < 1e-14 && (ev[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn evolution() {
        let p = TwoLevelParams { epsilon: 0.0, delta: 0.8, trace_shift: 0.0 };
        assert_eq!(evolve(&p, 0.0, 1.0).unwrap(), UnitaryMatrix::identity(2));
        let u = evolve(&p, PI / 0.8, 1.0).unwrap();
        assert!((u.get(1, 0).norm_sqr() - 1.0).abs() < 1e-15);
        let hb = 2.5;
        let u = evolve(&p, PI * hb / 0.8, hb).unwrap();
        assert!((u.get(1, 0).norm_sqr() - 1.0).abs() < 1e-15);

        let p = TwoLevelParams::<f64> { epsilon: 1.3, delta: 0.0, trace_shift: 0.0 };
        let u = evolve(&p, 2.7, 1.0).unwrap();
        assert!((u.get(0, 0).norm() - 1.0).abs() < 1e-15);
        assert_eq!(u.get(1, 0), cr(0.0));
        assert!(evolve(&p, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn ring_document() {
        let doc = RingDoc::from_json(r#"{"E":[0,2],"omega":[[0,0.5],[0.5,0]],"hbar":1.0}"#).unwrap();
        let spec: RingSpec<f64> = doc.to_spec().unwrap();
        let r = reduce_two_level(&build_hamiltonian(&spec), 10.0).unwrap();
        assert!((r.params.delta - 0.5).abs() < 1e-15);
        let doc = RingDoc::from_json(r#"{"E":[0,2],"omega":[[0,[0,0.5]],[[0,-0.5],0]]}"#).unwrap();
        assert_eq!(doc.hbar, 1.0);
        assert!(doc.to_spec::<f64>().is_ok());
        let doc = RingDoc::from_json(r#"{"E":[0,2],"omega":[[0,0.5]]}"#).unwrap();
        assert!(matches!(doc.to_spec::<f64>(), Err(Error::InvalidSpec(_))));
        assert!(RingDoc::from_json(r#"{"E":[0,2]}"#).is_err());
    }
}
