//! Two-qubit pure states: concurrence and Schmidt decomposition.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Pure state of two qubits, `c00|00> + c01|01> + c10|10> + c11|11>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitPure {
    pub c00: Complex64,
    pub c01: Complex64,
    pub c10: Complex64,
    pub c11: Complex64,
}

impl TwoQubitPure {
    pub fn new(c00: Complex64, c01: Complex64, c10: Complex64, c11: Complex64) -> Self {
        Self { c00, c01, c10, c11 }
    }

    pub fn from_real(c: [f64; 4]) -> Self {
        Self::from_array(c.map(|x| Complex64::new(x, 0.0)))
    }

    /// Amplitudes in `|00>, |01>, |10>, |11>` order.
    pub fn from_array(c: [Complex64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(&self) -> [Complex64; 4] {
        [self.c00, self.c01, self.c10, self.c11]
    }

    /// Coefficient matrix with the first qubit indexing rows.
    pub fn matrix(&self) -> Mat2 {
        [[self.c00, self.c01], [self.c10, self.c11]]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.to_array().iter().map(|c| c.norm_sqr()).sum()
    }

    /// Returns the state scaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| Self::from_array(self.to_array().map(|c| c / n)))
    }

    pub fn det(&self) -> Complex64 {
        self.c00 * self.c11 - self.c01 * self.c10
    }
}

/// `2 |c00 c11 - c01 c10|` for a normalized state.
pub fn concurrence(t: &TwoQubitPure) -> f64 {
    (2.0 * t.det().norm()).min(1.0)
}

/// Schmidt coefficients and local bases of a two-qubit pure state.
///
/// Columns of `basis_a` and `basis_b` are the Schmidt vectors `|k'>`, so
/// `sum_k sqrt(lambda_k) basis_a[:, k] (x) basis_b[:, k]` is the input state
/// up to a global phase, with `k = 0` carrying the smaller coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtForm {
    pub lambda0: f64,
    pub lambda1: f64,
    pub basis_a: Mat2,
    pub basis_b: Mat2,
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> TwoQubitPure {
        let s = [self.lambda0.sqrt(), self.lambda1.sqrt()];
        let mut c = [ZERO; 4];
        for (i, row) in c.chunks_mut(2).enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = (0..2).map(|k| self.basis_a[i][k] * self.basis_b[j][k] * s[k]).sum();
            }
        }
        TwoQubitPure::from_array(c)
    }
}

/// Closed-form SVD of the 2x2 coefficient matrix.
///
/// The singular-value gap comes from the eigenvalue split of `M^dagger M`,
/// which stays accurate near maximally entangled states; the small value from
/// `|det|`. Right singular vectors span the null space of
/// `M^dagger M - s1^2`. All phases are absorbed into the local bases.
pub fn schmidt_decompose(t: &TwoQubitPure) -> SchmidtForm {
    let m = t.matrix();
    let d = t.det().norm();

    // H = M^dagger M
    let h00 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let h11 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let h01 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let frob = h00 + h11;
    // s1^2 - s0^2
    let gap = (h00 - h11).hypot(2.0 * h01.norm());
    let s1sq = (frob + gap) / 2.0;
    let big = s1sq.sqrt();
    let small = if big > 0.0 { (d / big).min(big) } else { 0.0 };
    let cand_a = [h01, Complex64::new((h11 - h00 + gap) / 2.0, 0.0)];
    let cand_b = [Complex64::new((h00 - h11 + gap) / 2.0, 0.0), h01.conj()];
    let na = norm2(&cand_a);
    let nb = norm2(&cand_b);
    let v1 = if na.max(nb) <= 1e-14 * frob.max(f64::MIN_POSITIVE) {
        [ONE, ZERO]
    } else if na >= nb {
        [cand_a[0] / na, cand_a[1] / na]
    } else {
        [cand_b[0] / nb, cand_b[1] / nb]
    };
    let v0 = orthogonal_complement(&v1);

    let u1 = if big > 0.0 {
        let w = mat_vec(&m, &v1);
        let n = norm2(&w);
        [w[0] / n, w[1] / n]
    } else {
        [ONE, ZERO]
    };
    let mut u0 = orthogonal_complement(&u1);
    // Rotate u0 so that u0^dagger M v0 is real and nonnegative.
    let overlap = dot(&u0, &mat_vec(&m, &v0));
    if overlap.norm() > 0.0 {
        let phase = overlap / overlap.norm();
        u0 = [u0[0] * phase, u0[1] * phase];
    }

    // lambda0 <= 1/2 <= lambda1 exactly, even at a Bell state
    let lambda0 = (small * small / (small * small + s1sq)).min(0.5);
    SchmidtForm {
        lambda0,
        lambda1: 1.0 - lambda0,
        basis_a: [[u0[0], u1[0]], [u0[1], u1[1]]],
        basis_b: [[v0[0].conj(), v1[0].conj()], [v0[1].conj(), v1[1].conj()]],
    }
}

/// Schmidt coefficients `(lambda0, lambda1)` of a state with concurrence `c`.
pub fn schmidt_coefficients_from_concurrence(c: f64) -> Result<(f64, f64)> {
    if !(-1e-12..=1.0 + 1e-12).contains(&c) || !c.is_finite() {
        return Err(Error::DomainError { what: "concurrence", value: c });
    }
    let c = c.clamp(0.0, 1.0);
    let root = (1.0 - c * c).sqrt();
    // lambda0 = (1 - root)/2 written without cancellation.
    let lambda0 = c * c / (2.0 * (1.0 + root));
    Ok((lambda0, 1.0 - lambda0))
}

pub(crate) fn mat_vec(m: &Mat2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

pub(crate) fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub(crate) fn adjoint(m: &Mat2) -> Mat2 {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

fn dot(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn norm2(v: &[Complex64; 2]) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()
}

fn orthogonal_complement(v: &[Complex64; 2]) -> [Complex64; 2] {
    [-v[1].conj(), v[0].conj()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn max_err(a: &TwoQubitPure, b: &TwoQubitPure) -> f64 {
        // Compare up to a global phase.
        let a = a.to_array();
        let b = b.to_array();
        let ov: Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { ONE };
        a.iter().zip(&b).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&TwoQubitPure::from_real([S, 0.0, 0.0, S])) - 1.0).abs() < 1e-15);
        assert_eq!(concurrence(&TwoQubitPure::from_real([1.0, 0.0, 0.0, 0.0])), 0.0);
        let (l0, l1) = (0.2f64, 0.8f64);
        let t = TwoQubitPure::from_real([l0.sqrt(), 0.0, 0.0, l1.sqrt()]);
        assert!((concurrence(&t) - 2.0 * (l0 * l1).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn schmidt_examples() {
        let bell = schmidt_decompose(&TwoQubitPure::from_real([S, 0.0, 0.0, S]));
        assert!((bell.lambda0 - 0.5).abs() < 1e-15 && (bell.lambda1 - 0.5).abs() < 1e-15);
        let prod = schmidt_decompose(&TwoQubitPure::from_real([1.0, 0.0, 0.0, 0.0]));
        assert_eq!(prod.lambda0, 0.0);
        assert_eq!(prod.lambda1, 1.0);
    }

    #[test]
    fn coefficients_from_concurrence() {
        assert_eq!(schmidt_coefficients_from_concurrence(1.0).unwrap(), (0.5, 0.5));
        assert_eq!(schmidt_coefficients_from_concurrence(0.0).unwrap(), (0.0, 1.0));
        let (l0, l1) = schmidt_coefficients_from_concurrence(0.6).unwrap();
        assert!((l0 - 0.1).abs() < 1e-15 && (l1 - 0.9).abs() < 1e-15);
        assert!(schmidt_coefficients_from_concurrence(1.1).is_err());
        assert!(schmidt_coefficients_from_concurrence(-0.5).is_err());
    }

    #[test]
    fn concurrence_0_6_matches_constructed_state() {
        // sqrt(0.1)|u0 v0> + sqrt(0.9)|u1 v1> in rotated local bases has C = 2 sqrt(0.09) = 0.6.
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let e = Complex64::from_polar(1.0, 0.7);
        let ua = [[Complex64::new(c, 0.0), -e.conj() * s], [e * s, Complex64::new(c, 0.0)]];
        let ub = [[Complex64::new(s, 0.0), Complex64::new(c, 0.0)], [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)]];
        let form = SchmidtForm { lambda0: 0.1, lambda1: 0.9, basis_a: ua, basis_b: ub };
        let t = form.reconstruct();
        assert!((concurrence(&t) - 0.6).abs() < 1e-14);
        let dec = schmidt_decompose(&t);
        assert!((dec.lambda0 - 0.1).abs() < 1e-14);
    }

    fn arb_state() -> impl Strategy<Value = TwoQubitPure> {
        prop::array::uniform8(-1.0f64..1.0)
            .prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-6)
            .prop_map(|x| {
                let t = TwoQubitPure::new(
                    Complex64::new(x[0], x[1]),
                    Complex64::new(x[2], x[3]),
                    Complex64::new(x[4], x[5]),
                    Complex64::new(x[6], x[7]),
                );
                t.normalized().unwrap()
            })
    }

    fn is_unitary(m: &Mat2) -> bool {
        let p = mat_mul(&adjoint(m), m);
        (0..2).all(|i| (0..2).all(|j| (p[i][j] - IDENTITY2[i][j]).norm() < 1e-12))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn schmidt_reconstructs_input(t in arb_state()) {
            let f = schmidt_decompose(&t);
            prop_assert!(f.lambda0 <= 0.5 + 1e-15 && f.lambda1 >= 0.5 - 1e-15);
            prop_assert!((f.lambda0 + f.lambda1 - 1.0).abs() < 1e-15);
            prop_assert!(is_unitary(&f.basis_a) && is_unitary(&f.basis_b));
            prop_assert!(max_err(&f.reconstruct(), &t) <= 1e-12);
        }

        #[test]
        fn concurrence_matches_schmidt(t in arb_state()) {
            let f = schmidt_decompose(&t);
            let c = concurrence(&t);
            prop_assert!((c - 2.0 * (f.lambda0 * f.lambda1).sqrt()).abs() <= 1e-12);
            let (l0, l1) = schmidt_coefficients_from_concurrence(c).unwrap();
            prop_assert!((l0 - f.lambda0).abs() <= 1e-10 && (l1 - f.lambda1).abs() <= 1e-10);
        }

        #[test]
        fn near_product_states_stay_accurate(eps in 0.0f64..1e-7, ph in 0.0f64..std::f64::consts::TAU) {
            let t = TwoQubitPure::new(
                Complex64::new((1.0 - eps * eps).sqrt(), 0.0),
                ZERO,
                ZERO,
                Complex64::from_polar(eps, ph),
            );
            let f = schmidt_decompose(&t);
            prop_assert!((f.lambda0 - eps * eps).abs() <= 1e-20);
            prop_assert!(max_err(&f.reconstruct(), &t) <= 1e-12);
        }
    }
}
