//! Exact branch enumeration of the controlled teleportation protocol.
//!
//! Register: channel qubits 1, 2, 3, message qubit 4 and Bob's ancilla `b`.
//! The controller measures qubit 1, Alice rotates qubit 2 into its Schmidt
//! basis and Bell-measures qubits 2 and 4, Bob applies the conditional
//! unitary to qubit 3 and the ancilla in his Schmidt frame, measures the
//! ancilla and, on outcome 0, corrects qubit 3.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{charlie_collapse, Branch, MeasurementBasis, BRANCH_TOL};
use crate::state::CanonicalState;
use crate::two_qubit::{adjoint, mat_mul, mat_vec, schmidt_decompose, Mat2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major 4x4 complex matrix on `|q_a q_b>`.
pub type Mat4 = [[Complex64; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MessageQubit {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl MessageQubit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > 1e-12 {
            return Err(Error::MessageNotNormalized(n));
        }
        Ok(Self { alpha, beta })
    }

    /// `|0>`, `|1>`, `|+>`, `|+i>` and `cos(0.3)|0> + e^{1.1 i} sin(0.3)|1>`.
    pub fn canonical_set() -> [MessageQubit; 5] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        [
            MessageQubit { alpha: ONE, beta: ZERO },
            MessageQubit { alpha: ZERO, beta: ONE },
            MessageQubit { alpha: h, beta: h },
            MessageQubit { alpha: h, beta: Complex64::new(0.0, FRAC_1_SQRT_2) },
            MessageQubit { alpha: Complex64::new(0.3f64.cos(), 0.0), beta: Complex64::from_polar(0.3f64.sin(), 1.1) },
        ]
    }

    pub fn vector(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellOutcome {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] =
        [BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus];

    /// Amplitudes over `|00>, |01>, |10>, |11>`.
    pub fn vector(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellOutcome::PhiPlus => [h, ZERO, ZERO, h],
            BellOutcome::PhiMinus => [h, ZERO, ZERO, -h],
            BellOutcome::PsiPlus => [ZERO, h, h, ZERO],
            BellOutcome::PsiMinus => [ZERO, h, -h, ZERO],
        }
    }

    /// Pauli correction: I, Z, X and ZX (X first).
    pub fn correction(self) -> Mat2 {
        let x = [[ZERO, ONE], [ONE, ZERO]];
        let z = [[ONE, ZERO], [ZERO, -ONE]];
        match self {
            BellOutcome::PhiPlus => [[ONE, ZERO], [ZERO, ONE]],
            BellOutcome::PhiMinus => z,
            BellOutcome::PsiPlus => x,
            BellOutcome::PsiMinus => mat_mul(&z, &x),
        }
    }
}

/// Pure state of a few labelled qubits; the first label is the most
/// significant bit of the amplitude index.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    labels: Vec<char>,
    amps: Vec<Complex64>,
}

impl Register {
    pub fn new(labels: &[char], amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << labels.len(), "amplitude count");
        Self { labels: labels.to_vec(), amps }
    }

    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn kron(&self, other: &Register) -> Register {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Register { labels, amps }
    }

    fn bit(&self, label: char) -> usize {
        let pos = self.labels.iter().position(|&l| l == label).expect("unknown qubit label");
        self.labels.len() - 1 - pos
    }

    pub fn apply1(&mut self, q: char, m: &Mat2) {
        let mask = 1 << self.bit(q);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let v = mat_vec(m, &[self.amps[i], self.amps[i | mask]]);
                self.amps[i] = v[0];
                self.amps[i | mask] = v[1];
            }
        }
    }

    pub fn apply2(&mut self, qa: char, qb: char, m: &Mat4) {
        let (ma, mb) = (1 << self.bit(qa), 1 << self.bit(qb));
        for i in 0..self.amps.len() {
            if i & (ma | mb) == 0 {
                let idx = [i, i | mb, i | ma, i | ma | mb];
                let v: [Complex64; 4] = idx.map(|k| self.amps[k]);
                for (r, &k) in idx.iter().enumerate() {
                    self.amps[k] = (0..4).map(|c| m[r][c] * v[c]).sum();
                }
            }
        }
    }

    /// `<v|_q psi`: removes qubit `q`.
    pub fn contract1(&self, q: char, v: &[Complex64; 2]) -> Register {
        let bit = self.bit(q);
        let mask = 1 << bit;
        let low = mask - 1;
        let amps = (0..self.amps.len() / 2)
            .map(|k| {
                let i = ((k & !low) << 1) | (k & low);
                v[0].conj() * self.amps[i] + v[1].conj() * self.amps[i | mask]
            })
            .collect();
        let labels = self.labels.iter().copied().filter(|&l| l != q).collect();
        Register { labels, amps }
    }

    /// `<v|_{qa qb} psi` with `v` over `|q_a q_b>`: removes both qubits.
    pub fn contract2(&self, qa: char, qb: char, v: &[Complex64; 4]) -> Register {
        let zero = self.contract1(qa, &[ONE, ZERO]);
        let one = self.contract1(qa, &[ZERO, ONE]);
        let a = zero.contract1(qb, &[v[0], v[1]]);
        let b = one.contract1(qb, &[v[2], v[3]]);
        Register { labels: a.labels, amps: a.amps.iter().zip(&b.amps).map(|(x, y)| x + y).collect() }
    }
}

/// Projects qubits `qa`, `qb` onto a Bell state.
///
/// Returns the outcome probability (relative to the input norm) and the
/// projected state, renormalized when the probability exceeds the branch
/// tolerance.
pub fn bell_project(reg: &Register, qa: char, qb: char, outcome: BellOutcome) -> (f64, Register) {
    let v = outcome.vector();
    let rest = reg.contract2(qa, qb, &v);
    let total = reg.norm_sqr();
    let p = if total > 0.0 { rest.norm_sqr() / total } else { 0.0 };
    let pair = Register::new(&[qa, qb], v.to_vec());
    let mut projected = pair.kron(&rest);
    if p > BRANCH_TOL {
        let n = projected.norm_sqr().sqrt();
        projected.amps.iter_mut().for_each(|a| *a /= n);
    }
    // restore the input qubit order
    let order: Vec<char> = reg.labels.clone();
    (p, reorder(&projected, &order))
}

fn reorder(reg: &Register, order: &[char]) -> Register {
    let n = order.len();
    let mut amps = vec![ZERO; reg.amps.len()];
    let src_bits: Vec<usize> = order.iter().map(|&l| reg.bit(l)).collect();
    for (k, out) in amps.iter_mut().enumerate() {
        let mut src = 0;
        for (pos, &sb) in src_bits.iter().enumerate() {
            if k >> (n - 1 - pos) & 1 == 1 {
                src |= 1 << sb;
            }
        }
        *out = reg.amps[src];
    }
    Register { labels: order.to_vec(), amps }
}

/// Bob's conditional unitary on `|q3 b>` for Schmidt coefficients
/// `lambda0 <= lambda1`.
pub fn u3b_matrix(lambda0: f64, lambda1: f64) -> Result<Mat4> {
    if !(lambda0.is_finite() && lambda1.is_finite()) || lambda0 < 0.0 || lambda1 <= 0.0 {
        return Err(Error::DomainError { what: "lambda", value: lambda0 });
    }
    if lambda0 > lambda1 {
        return Err(Error::DomainError { what: "lambda0 <= lambda1", value: lambda0 });
    }
    if (lambda0 + lambda1 - 1.0).abs() > 1e-12 {
        return Err(Error::DomainError { what: "lambda0 + lambda1", value: lambda0 + lambda1 });
    }
    let r = (lambda0 / lambda1).min(1.0);
    let c = Complex64::new(r.sqrt(), 0.0);
    let s = Complex64::new((1.0 - r).sqrt(), 0.0);
    Ok([[ONE, ZERO, ZERO, ZERO], [ZERO, ONE, ZERO, ZERO], [ZERO, ZERO, c, s], [ZERO, ZERO, -s, c]])
}

/// `(W (x) I) U (W^dagger (x) I)` for a single-qubit `W` on the first factor.
fn conjugate_first(w: &Mat2, u: &Mat4) -> Mat4 {
    let lift = |m: &Mat2| -> Mat4 {
        std::array::from_fn(|r| std::array::from_fn(|c| if r % 2 == c % 2 { m[r / 2][c / 2] } else { ZERO }))
    };
    let mul = |a: &Mat4, b: &Mat4| -> Mat4 {
        std::array::from_fn(|i| std::array::from_fn(|j| (0..4).map(|k| a[i][k] * b[k][j]).sum()))
    };
    mul(&mul(&lift(w), u), &lift(&adjoint(w)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub charlie_outcome: Branch,
    pub bell_outcome: BellOutcome,
    pub ancilla_outcome: u8,
    pub probability: f64,
    /// Bob's normalized qubit after correction; absent for branches below
    /// the branch tolerance.
    pub bob_state: Option<[Complex64; 2]>,
    pub fidelity: Option<f64>,
    pub success: bool,
}

/// Per-controller-outcome summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharlieRecord {
    pub outcome: Branch,
    pub probability: f64,
    /// Smaller Schmidt coefficient of the branch state.
    pub lambda0: Option<f64>,
    /// Success probability conditioned on this outcome.
    pub conditional_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub branches: Vec<BranchRecord>,
    pub charlie: Vec<CharlieRecord>,
    pub total_success_probability: f64,
}

impl ProtocolTrace {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// Runs all 16 measurement branches of the protocol.
pub fn run_protocol(s: &CanonicalState, b: &MeasurementBasis, m: &MessageQubit) -> Result<ProtocolTrace> {
    let channel = Register::new(&['1', '2', '3'], s.to_state_vector().to_vec());
    let message = Register::new(&['4'], m.vector().to_vec());
    let ancilla = Register::new(&['b'], vec![ONE, ZERO]);
    let reg = channel.kron(&message).kron(&ancilla);
    let decomposition = charlie_collapse(s, b);
    let (x, x_perp) = b.vectors();
    let psi = m.vector();

    let mut branches = Vec::with_capacity(16);
    let mut charlie = Vec::with_capacity(2);
    for (outcome, v) in [(Branch::X, x), (Branch::XPerp, x_perp)] {
        let after_charlie = reg.contract1('1', &v);
        let p_c = after_charlie.norm_sqr();
        let state = decomposition.state(outcome).filter(|_| p_c >= BRANCH_TOL);
        let Some(state) = state else {
            for bell in BellOutcome::ALL {
                for anc in 0..2u8 {
                    branches.push(BranchRecord {
                        charlie_outcome: outcome,
                        bell_outcome: bell,
                        ancilla_outcome: anc,
                        probability: 0.0,
                        bob_state: None,
                        fidelity: None,
                        success: false,
                    });
                }
            }
            charlie.push(CharlieRecord { outcome, probability: 0.0, lambda0: None, conditional_success: 0.0 });
            continue;
        };

        let schmidt = schmidt_decompose(&state);
        let w = schmidt.basis_b;
        let mut rotated = after_charlie;
        rotated.apply1('2', &adjoint(&schmidt.basis_a));
        let bob_unitary = conjugate_first(&w, &u3b_matrix(schmidt.lambda0, schmidt.lambda1)?);
        let undo = adjoint(&w);

        let mut success_weight = 0.0;
        for bell in BellOutcome::ALL {
            let mut after_bell = rotated.contract2('2', '4', &bell.vector());
            after_bell.apply2('3', 'b', &bob_unitary);
            let fix = mat_mul(&bell.correction(), &undo);
            for anc in 0..2u8 {
                let e = if anc == 0 { [ONE, ZERO] } else { [ZERO, ONE] };
                let bob = after_bell.contract1('b', &e);
                let p = bob.norm_sqr();
                let success = anc == 0;
                let (bob_state, fidelity, probability) = if p < BRANCH_TOL {
                    (None, None, 0.0)
                } else {
                    let v = mat_vec(&fix, &[bob.amps[0], bob.amps[1]]);
                    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
                    let v = [v[0] / n, v[1] / n];
                    let overlap = psi[0].conj() * v[0] + psi[1].conj() * v[1];
                    (Some(v), Some(overlap.norm_sqr().min(1.0)), p)
                };
                if success {
                    success_weight += probability;
                }
                branches.push(BranchRecord {
                    charlie_outcome: outcome,
                    bell_outcome: bell,
                    ancilla_outcome: anc,
                    probability,
                    bob_state,
                    fidelity,
                    success,
                });
            }
        }
        charlie.push(CharlieRecord {
            outcome,
            probability: p_c,
            lambda0: Some(schmidt.lambda0),
            conditional_success: success_weight / p_c,
        });
    }
    let total_success_probability = branches.iter().filter(|b| b.success).map(|b| b.probability).sum();
    Ok(ProtocolTrace { branches, charlie, total_success_probability })
}
