//! Exact compilation of Bob's rotation and Alice's preparation into
//! qubit flips, phase flips, Hadamards, CNOTs and Y/Z rotations.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::protocol::{AliceStrategy, BobStrategy};
use crate::qstate::{gates, QubitState, UnitaryMatrix, MAX_QUBITS};
use crate::scalar::{czero, Real, C};

/// Distance below which a synthesized circuit counts as exact.
pub const VERIFY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Z,
    H,
    #[serde(rename = "RY")]
    Ry,
    #[serde(rename = "RZ")]
    Rz,
    #[serde(rename = "CNOT")]
    Cnot,
}

impl GateKind {
    pub fn arity(self) -> usize {
        if self == GateKind::Cnot {
            2
        } else {
            1
        }
    }

    pub fn is_parametrized(self) -> bool {
        matches!(self, GateKind::Ry | GateKind::Rz)
    }

    fn label(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
        }
    }
}

/// One gate; for CNOT `wires = [control, target]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp<T: Real> {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    pub angle: Option<T>,
}

impl<T: Real> GateOp<T> {
    pub fn x(w: usize) -> Self {
        Self { kind: GateKind::X, wires: vec![w], angle: None }
    }
    pub fn z(w: usize) -> Self {
        Self { kind: GateKind::Z, wires: vec![w], angle: None }
    }
    pub fn h(w: usize) -> Self {
        Self { kind: GateKind::H, wires: vec![w], angle: None }
    }
    pub fn ry(w: usize, angle: T) -> Self {
        Self { kind: GateKind::Ry, wires: vec![w], angle: Some(angle) }
    }
    pub fn rz(w: usize, angle: T) -> Self {
        Self { kind: GateKind::Rz, wires: vec![w], angle: Some(angle) }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, wires: vec![control, target], angle: None }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.wires.len() != self.kind.arity() {
            return invalid_arg(format!("{} takes {} wire(s)", self.kind.label(), self.kind.arity()));
        }
        if self.wires.iter().any(|&w| w >= n_qubits) {
            return invalid_arg(format!("{} wire out of range for {n_qubits} qubits", self.kind.label()));
        }
        if self.kind == GateKind::Cnot && self.wires[0] == self.wires[1] {
            return invalid_arg("CNOT control and target coincide");
        }
        if self.kind.is_parametrized() != self.angle.is_some() {
            return invalid_arg(format!("{} angle presence mismatch", self.kind.label()));
        }
        Ok(())
    }

    pub fn matrix(&self) -> UnitaryMatrix<T> {
        match self.kind {
            GateKind::X => gates::x(),
            GateKind::Z => gates::z(),
            GateKind::H => gates::h(),
            GateKind::Ry => gates::ry(self.angle.unwrap_or_else(T::zero)),
            GateKind::Rz => gates::rz(self.angle.unwrap_or_else(T::zero)),
            GateKind::Cnot => gates::cnot(),
        }
    }
}

/// JSON form of a gate: `{"kind": "RY", "wires": [0], "angle": 0.5}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDoc {
    pub kind: GateKind,
    pub wires: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit<T: Real> {
    n_qubits: usize,
    ops: Vec<GateOp<T>>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize, ops: Vec<GateOp<T>>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return invalid_arg(format!("circuit width {n_qubits} outside 1..={MAX_QUBITS}"));
        }
        for op in &ops {
            op.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, ops })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp<T>] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Runs the circuit on `state`.
    pub fn apply(&self, state: &QubitState<T>) -> Result<QubitState<T>> {
        if state.n_qubits() != self.n_qubits {
            return invalid_arg("state width differs from circuit width");
        }
        self.ops
            .iter()
            .try_fold(state.clone(), |s, op| s.apply_unitary(&op.matrix(), &op.wires))
    }

    pub fn to_docs(&self) -> Vec<GateDoc> {
        self.ops
            .iter()
            .map(|op| GateDoc {
                kind: op.kind,
                wires: op.wires.clone(),
                angle: op.angle.map(|a| a.to_f64_lossy()),
            })
            .collect()
    }

    pub fn from_docs(n_qubits: usize, docs: &[GateDoc]) -> Result<Self> {
        let ops = docs
            .iter()
            .map(|d| GateOp { kind: d.kind, wires: d.wires.clone(), angle: d.angle.map(T::lit) })
            .collect();
        Self::new(n_qubits, ops)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_docs()).expect("gate docs serialize")
    }

    pub fn from_json(n_qubits: usize, text: &str) -> Result<Self> {
        let docs: Vec<GateDoc> = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        Self::from_docs(n_qubits, &docs)
    }

    /// Text drawing with one line per wire, labelled by `labels` when given.
    pub fn diagram(&self, labels: &[&str]) -> String {
        let names: Vec<String> = (0..self.n_qubits)
            .map(|w| labels.get(w).map_or_else(|| format!("q{w}"), |s| s.to_string()))
            .collect();
        let pad = names.iter().map(|n| n.chars().count()).max().unwrap_or(0);
        let mut lines: Vec<String> = names.iter().map(|n| format!("{n:>pad$}: ─")).collect();
        for op in &self.ops {
            let cells: Vec<String> = (0..self.n_qubits)
                .map(|w| match op.kind {
                    GateKind::Cnot if op.wires[0] == w => "●".to_string(),
                    GateKind::Cnot if op.wires[1] == w => "⊕".to_string(),
                    GateKind::Cnot => {
                        let (lo, hi) = (op.wires[0].min(op.wires[1]), op.wires[0].max(op.wires[1]));
                        if w > lo && w < hi { "│" } else { "─" }.to_string()
                    }
                    k if op.wires[0] == w => match op.angle {
                        Some(a) => format!("{}({:.4})", k.label(), a),
                        None => k.label().to_string(),
                    },
                    _ => "─".to_string(),
                })
                .collect();
            let width = cells.iter().map(|c| c.chars().count()).max().unwrap_or(1);
            for (line, cell) in lines.iter_mut().zip(&cells) {
                let fill = width - cell.chars().count();
                line.push_str(cell);
                line.push_str(&"─".repeat(fill + 1));
            }
        }
        lines.join("\n")
    }
}

impl<T: Real> fmt::Display for Circuit<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.diagram(&[]))
    }
}

/// Ordered product of the gate matrices, extended to the full register.
pub fn circuit_unitary<T: Real>(c: &Circuit<T>) -> Result<UnitaryMatrix<T>> {
    let dim = 1 << c.n_qubits;
    let mut entries = vec![czero(); dim * dim];
    for col in 0..dim {
        let out = c.apply(&QubitState::new_basis_state(c.n_qubits, col)?)?;
        for (row, a) in out.amplitudes().iter().enumerate() {
            entries[row * dim + col] = *a;
        }
    }
    Ok(UnitaryMatrix::new_unchecked(dim, entries))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyReport<T: Real> {
    pub distance: T,
    pub ok: bool,
}

fn aligned_distance<T: Real>(got: &[C<T>], want: &[C<T>], phase_free: bool) -> T {
    // Global phase taken from the overlap ⟨want|got⟩, the least-squares optimum.
    let phase = if phase_free {
        let overlap = want
            .iter()
            .zip(got)
            .map(|(w, g)| w.conj() * g)
            .fold(czero::<T>(), |a, b| a + b);
        if overlap.norm() > T::zero() {
            overlap / overlap.norm()
        } else {
            Complex::new(T::one(), T::zero())
        }
    } else {
        Complex::new(T::one(), T::zero())
    };
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w * phase).norm())
        .fold(T::zero(), T::max)
}

/// Max-entry distance between the circuit's unitary and `target`, with the
/// global phase aligned first when `phase_free` is set.
pub fn verify_circuit<T: Real>(c: &Circuit<T>, target: &UnitaryMatrix<T>, phase_free: bool) -> Result<VerifyReport<T>> {
    if target.dim() != 1 << c.n_qubits {
        return invalid_arg(format!(
            "{}x{0} target for a {}-qubit circuit",
            target.dim(),
            c.n_qubits
        ));
    }
    let u = circuit_unitary(c)?;
    let distance = aligned_distance(u.entries(), target.entries(), phase_free);
    Ok(VerifyReport { distance, ok: distance <= T::lit(VERIFY_TOL) })
}

/// Phase-free max-entry distance between `circuit·|0…0⟩` and `target`.
pub fn verify_state<T: Real>(c: &Circuit<T>, target: &QubitState<T>) -> Result<VerifyReport<T>> {
    if target.n_qubits() != c.n_qubits {
        return invalid_arg("target width differs from circuit width");
    }
    let out = c.apply(&QubitState::new_basis_state(c.n_qubits, 0)?)?;
    let distance = aligned_distance(out.amplitudes(), target.amplitudes(), true);
    Ok(VerifyReport { distance, ok: distance <= T::lit(VERIFY_TOL) })
}

/// Bob's rotation on (B, C) = wires (0, 1) of a two-qubit circuit.
///
/// `CNOT(B→C)` moves `span{|01⟩,|10⟩}` onto `C = 1`, where the rotation is a
/// Y rotation of B by `−2θ` controlled on C; a second `CNOT(B→C)` undoes the
/// relabelling. The controlled rotation expands to
/// `RY(−θ)·CNOT(C→B)·RY(θ)·CNOT(C→B)` on B.
pub fn synth_u<T: Real>(theta: T) -> Result<Circuit<T>> {
    BobStrategy::new(theta)?;
    let (b, c) = (0, 1);
    Circuit::new(
        2,
        vec![
            GateOp::cnot(b, c),
            GateOp::ry(b, -theta),
            GateOp::cnot(c, b),
            GateOp::ry(b, theta),
            GateOp::cnot(c, b),
            GateOp::cnot(b, c),
        ],
    )
}

/// Euler angles `(β, γ, δ)` with `u ∝ RZ(β)·RY(γ)·RZ(δ)` up to global phase.
pub fn zyz_angles<T: Real>(u: &UnitaryMatrix<T>) -> Result<(T, T, T)> {
    if u.dim() != 2 {
        return invalid_arg("ZYZ decomposition needs a 2x2 unitary");
    }
    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    let root = det.sqrt();
    let x = u.get(0, 0) / root;
    let y = u.get(1, 0) / root;
    let two = T::lit(2.0);
    let gamma = two * y.norm().atan2(x.norm());
    let tiny = T::epsilon();
    let sum = if x.norm() > tiny { -two * x.arg() } else { T::zero() };
    let diff = if y.norm() > tiny { two * y.arg() } else { T::zero() };
    Ok(((sum + diff) / two, gamma, (sum - diff) / two))
}

fn push_local<T: Real>(ops: &mut Vec<GateOp<T>>, wire: usize, u: &UnitaryMatrix<T>) -> Result<()> {
    let (beta, gamma, delta) = zyz_angles(u)?;
    for op in [GateOp::rz(wire, delta), GateOp::ry(wire, gamma), GateOp::rz(wire, beta)] {
        if op.angle.is_none_or(|a| a.abs() > T::epsilon()) {
            ops.push(op);
        }
    }
    Ok(())
}

fn orthogonal<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    [-v[1].conj(), v[0].conj()]
}

fn unit<T: Real>(v: [C<T>; 2]) -> [C<T>; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Alice's preparation on (A, B) = wires (0, 1) of a two-qubit circuit.
///
/// Schmidt form `σ₀|u₀⟩|v₀⟩ + σ₁|u₁⟩|v₁⟩`: load the weights with `RY` on A,
/// correlate with `CNOT(A→B)`, then rotate each qubit's basis with a
/// Z-Y-Z Euler sequence. Zero-angle gates are omitted, and the CNOT too
/// when the state is a product state.
pub fn synth_prep<T: Real>(alice: &AliceStrategy<T>) -> Result<Circuit<T>> {
    alice.validate()?;
    let m = [[alice.alpha, alice.beta], [alice.gamma, alice.delta]];
    // M†M = [[a, b], [b*, d]]
    let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let d = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let half = T::lit(0.5);
    let mid = (a + d) * half;
    let rad = (((a - d) * half).powi(2) + b.norm_sqr()).sqrt();
    let lam = mid + rad;
    // eigenvector of the larger eigenvalue; pick the better-conditioned form
    let e1 = [b, Complex::new(lam - a, T::zero())];
    let e2 = [Complex::new(lam - d, T::zero()), b.conj()];
    let n1 = e1[0].norm_sqr() + e1[1].norm_sqr();
    let n2 = e2[0].norm_sqr() + e2[1].norm_sqr();
    let v0 = if n1.max(n2) <= T::epsilon() * T::epsilon() {
        [Complex::new(T::one(), T::zero()), czero()]
    } else if n1 >= n2 {
        unit(e1)
    } else {
        unit(e2)
    };
    let v1 = orthogonal(v0);
    let mv = |v: [C<T>; 2]| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
    let w0 = mv(v0);
    let sigma0 = (w0[0].norm_sqr() + w0[1].norm_sqr()).sqrt();
    let u0 = [w0[0] / sigma0, w0[1] / sigma0];
    let mut u1 = orthogonal(u0);
    let w1 = mv(v1);
    let proj = u1[0].conj() * w1[0] + u1[1].conj() * w1[1];
    let sigma1 = proj.norm();
    if sigma1 > T::zero() {
        let phase = proj / sigma1;
        u1 = [u1[0] * phase, u1[1] * phase];
    }
    // ψ_ab = Σ_k σ_k u_k[a] conj(v_k[b])
    let ua = UnitaryMatrix::new_unchecked(2, vec![u0[0], u1[0], u0[1], u1[1]]);
    let ub = UnitaryMatrix::new_unchecked(2, vec![v0[0].conj(), v1[0].conj(), v0[1].conj(), v1[1].conj()]);

    let (wa, wb) = (0, 1);
    let mut ops = Vec::new();
    let load = T::lit(2.0) * sigma1.atan2(sigma0);
    if load.abs() > T::epsilon() {
        ops.push(GateOp::ry(wa, load));
        ops.push(GateOp::cnot(wa, wb));
    }
    push_local(&mut ops, wa, &ua)?;
    push_local(&mut ops, wb, &ub)?;
    Circuit::new(2, ops)
}

/// Target state `α|00⟩ + β|01⟩ + γ|10⟩ + δ|11⟩` of a preparation.
pub fn prep_target<T: Real>(alice: &AliceStrategy<T>) -> Result<QubitState<T>> {
    QubitState::from_amplitudes(2, alice.amplitudes().to_vec())
}
