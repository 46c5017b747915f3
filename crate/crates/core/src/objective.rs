//! Branch probabilities, branch states and the controller objective.
//!
//! The controller measures qubit 1 in the basis
//!
//! ```text
//! |x>      = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>
//! |x_perp> = sin(theta/2)|0> - e^{i phi} cos(theta/2)|1>
//! ```
//!
//! leaving qubits 2 and 3 in one of two pure states. The success probability
//! of the teleportation that follows is `1 - (sqrt(P) + sqrt(Q))`, where
//! `P = p1^2 (1 - C1^2)` and `Q = p2^2 (1 - C2^2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::CanonicalState;
use crate::two_qubit::{concurrence, TwoQubitPure};

/// Branches with probability below this carry no state.
pub const BRANCH_TOL: f64 = 1e-14;
/// Largest negative roundoff tolerated before clamping to zero.
pub const ROUNDOFF_TOL: f64 = 1e-14;

/// The controller's single-qubit projective basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    /// Checks `theta` in `[0, pi]` and `phi` in `[0, 2 pi]`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::DomainError { what: "theta", value: theta });
        }
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::DomainError { what: "phi", value: phi });
        }
        Ok(Self { theta, phi })
    }

    /// Folds `phi` into `[0, 2 pi)` and clamps `theta` into `[0, pi]`.
    pub fn folded(theta: f64, phi: f64) -> Self {
        Self { theta: theta.clamp(0.0, PI), phi: fold_phi(phi) }
    }

    /// `(|x>, |x_perp>)` as column vectors over `|0>, |1>`.
    pub fn vectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        ([Complex64::new(c, 0.0), e * s], [Complex64::new(s, 0.0), -e * c])
    }
}

pub fn fold_phi(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// Which outcome of the controller's measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Outcome `|x>`.
    #[serde(rename = "x")]
    X,
    /// Outcome `|x_perp>`.
    #[serde(rename = "x_perp")]
    XPerp,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::X, Branch::XPerp];
}

/// The channel after the controller's measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchDecomposition {
    pub p1: f64,
    pub p2: f64,
    /// Normalized state of qubits 2 and 3 for outcome `|x>`; `None` when
    /// `p1 < BRANCH_TOL`.
    pub phi1: Option<TwoQubitPure>,
    pub phi2: Option<TwoQubitPure>,
}

impl BranchDecomposition {
    pub fn probability(&self, b: Branch) -> f64 {
        match b {
            Branch::X => self.p1,
            Branch::XPerp => self.p2,
        }
    }

    pub fn state(&self, b: Branch) -> Option<TwoQubitPure> {
        match b {
            Branch::X => self.phi1,
            Branch::XPerp => self.phi2,
        }
    }
}

/// Trigonometric quantities shared by every per-basis formula.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Angles {
    sin_t: f64,
    cos_t: f64,
    s_half: f64,
    c_half: f64,
    /// e^{-i phi}
    e1: Complex64,
    /// e^{i (mu - phi)}
    e_mu: Complex64,
}

impl Angles {
    fn new(s: &CanonicalState, b: &MeasurementBasis) -> Self {
        let (sin_t, cos_t) = b.theta.sin_cos();
        let (s_half, c_half) = (b.theta / 2.0).sin_cos();
        Self {
            sin_t,
            cos_t,
            s_half,
            c_half,
            e1: Complex64::from_polar(1.0, -b.phi),
            e_mu: Complex64::from_polar(1.0, s.mu() - b.phi),
        }
    }

    /// Combines per-`theta` and per-`phi` parts computed once for a grid.
    pub(crate) fn from_parts(theta: &ThetaTrig, phi: &PhiTrig) -> Self {
        Self {
            sin_t: theta.sin_t,
            cos_t: theta.cos_t,
            s_half: theta.s_half,
            c_half: theta.c_half,
            e1: phi.e1,
            e_mu: phi.e_mu,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ThetaTrig {
    sin_t: f64,
    cos_t: f64,
    s_half: f64,
    c_half: f64,
}

impl ThetaTrig {
    pub(crate) fn new(theta: f64) -> Self {
        let (sin_t, cos_t) = theta.sin_cos();
        let (s_half, c_half) = (theta / 2.0).sin_cos();
        Self { sin_t, cos_t, s_half, c_half }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PhiTrig {
    e1: Complex64,
    e_mu: Complex64,
}

impl PhiTrig {
    pub(crate) fn new(mu: f64, phi: f64) -> Self {
        Self { e1: Complex64::from_polar(1.0, -phi), e_mu: Complex64::from_polar(1.0, mu - phi) }
    }
}

/// Unnormalized branch vectors `sqrt(p_i) |Phi_i>` written out amplitude by
/// amplitude.
fn branch_vectors(s: &CanonicalState, g: &Angles) -> ([Complex64; 4], [Complex64; 4]) {
    let [a0, a1, a2, a3, a4] = s.amplitudes();
    let (sh, ch) = (g.s_half, g.c_half);
    let u1 = [Complex64::new(a0 * ch, 0.0) + g.e_mu * (a1 * sh), g.e1 * (a2 * sh), g.e1 * (a3 * sh), g.e1 * (a4 * sh)];
    let u2 =
        [Complex64::new(a0 * sh, 0.0) - g.e_mu * (a1 * ch), -g.e1 * (a2 * ch), -g.e1 * (a3 * ch), -g.e1 * (a4 * ch)];
    (u1, u2)
}

fn branch_probabilities(s: &CanonicalState, g: &Angles) -> (f64, f64) {
    let a0 = s.a(0);
    let cross = a0 * s.a(1) * g.e_mu.re * g.sin_t;
    let p1 = g.s_half * g.s_half + a0 * a0 * g.cos_t + cross;
    let p2 = g.c_half * g.c_half - a0 * a0 * g.cos_t - cross;
    (clamp_probability(p1), clamp_probability(p2))
}

fn clamp_probability(p: f64) -> f64 {
    if p < 0.0 {
        debug_assert!(p >= -ROUNDOFF_TOL, "branch probability {p} below roundoff");
        0.0
    } else {
        p.min(1.0)
    }
}

/// Projects the controller's qubit out of the full state vector.
///
/// Returns the unnormalized vectors `<x|_1 Psi` and `<x_perp|_1 Psi`; this is
/// the direct route that the closed-form branch expressions are checked
/// against.
pub fn project_controller(s: &CanonicalState, b: &MeasurementBasis) -> ([Complex64; 4], [Complex64; 4]) {
    let psi = s.to_state_vector();
    let (x, xp) = b.vectors();
    let project = |v: &[Complex64; 2]| -> [Complex64; 4] {
        std::array::from_fn(|k| v[0].conj() * psi[k] + v[1].conj() * psi[4 + k])
    };
    (project(&x), project(&xp))
}

/// The channel's decomposition into the two controller outcomes.
pub fn charlie_collapse(s: &CanonicalState, b: &MeasurementBasis) -> BranchDecomposition {
    let g = Angles::new(s, b);
    let (p1, p2) = branch_probabilities(s, &g);
    let (u1, u2) = branch_vectors(s, &g);
    debug_assert!({
        let (d1, d2) = project_controller(s, b);
        u1.iter().zip(&d1).chain(u2.iter().zip(&d2)).all(|(x, y)| (x - y).norm() < 1e-12)
    });
    let normalize = |u: [Complex64; 4], p: f64| {
        if p < BRANCH_TOL {
            return None;
        }
        TwoQubitPure::from_array(u).normalized()
    };
    BranchDecomposition { p1, p2, phi1: normalize(u1, p1), phi2: normalize(u2, p2) }
}

/// `p_i` times the concurrence of branch `i`, as a complex amplitude whose
/// modulus is that product. Defined for every basis, including ones where
/// the branch has zero probability.
pub fn branch_amplitude(s: &CanonicalState, b: &MeasurementBasis, branch: Branch) -> Complex64 {
    let [a0, a1, a2, a3, a4] = s.amplitudes();
    let e1 = Complex64::from_polar(1.0, -b.phi);
    let e2 = Complex64::from_polar(1.0, -2.0 * b.phi);
    let k = (Complex64::from_polar(a1 * a4, s.mu()) - a2 * a3) * e2;
    let lead = e1 * (a0 * a4 * b.theta.sin());
    let half = b.theta / 2.0;
    match branch {
        Branch::X => lead + k * (2.0 * half.sin().powi(2)),
        Branch::XPerp => lead - k * (2.0 * half.cos().powi(2)),
    }
}

/// `p^2 - |N|^2` for an unnormalized branch vector, evaluated as
/// `(rho00 - rho11)^2 + 4 |rho01|^2` of the reduced state of qubit 2. The two
/// are equal identically; this form has no cancellation when the branch is
/// close to a Bell pair.
fn deficiency(u: &[Complex64; 4]) -> f64 {
    let r00 = u[0].norm_sqr() + u[1].norm_sqr();
    let r11 = u[2].norm_sqr() + u[3].norm_sqr();
    let r01 = u[0] * u[2].conj() + u[1] * u[3].conj();
    let d = r00 - r11;
    d * d + 4.0 * r01.norm_sqr()
}

/// Everything the objective needs at one basis point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveTerms {
    pub p1: f64,
    pub p2: f64,
    /// `p1^2 (1 - C1^2)`.
    pub p: f64,
    /// `p2^2 (1 - C2^2)`.
    pub q: f64,
    /// `|N1|^2 = p1^2 C1^2`.
    pub n1_sq: f64,
    pub n2_sq: f64,
}

impl ObjectiveTerms {
    pub fn objective(&self) -> f64 {
        (self.p.sqrt() + self.q.sqrt()).min(1.0)
    }

    /// `sum_i (p_i - sqrt(P_i))`, evaluated as `|N_i|^2 / (p_i + sqrt(P_i))`.
    pub fn success(&self) -> f64 {
        let term = |p: f64, def: f64, n_sq: f64| {
            let denom = p + def.sqrt();
            if denom > 0.0 {
                n_sq / denom
            } else {
                0.0
            }
        };
        (term(self.p1, self.p, self.n1_sq) + term(self.p2, self.q, self.n2_sq)).clamp(0.0, 1.0)
    }
}

pub fn objective_terms(s: &CanonicalState, b: &MeasurementBasis) -> ObjectiveTerms {
    terms_at(s, &Angles::new(s, b))
}

pub(crate) fn terms_at(s: &CanonicalState, g: &Angles) -> ObjectiveTerms {
    let (p1, p2) = branch_probabilities(s, g);
    let (u1, u2) = branch_vectors(s, g);
    let det = |u: &[Complex64; 4]| 4.0 * (u[0] * u[3] - u[1] * u[2]).norm_sqr();
    ObjectiveTerms {
        p1,
        p2,
        p: deficiency(&u1).min(p1 * p1),
        q: deficiency(&u2).min(p2 * p2),
        n1_sq: det(&u1),
        n2_sq: det(&u2),
    }
}

/// `P(theta, phi) = p1^2 (1 - C1^2)`, division-free.
pub fn p_def(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    objective_terms(s, b).p
}

/// `Q(theta, phi) = p2^2 (1 - C2^2)`, division-free.
pub fn q_def(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    objective_terms(s, b).q
}

/// `p_i^2 - |N_i|^2` in its literal form. Fails when the difference is
/// negative beyond roundoff.
pub fn pq_from_amplitudes(s: &CanonicalState, b: &MeasurementBasis) -> Result<(f64, f64)> {
    let g = Angles::new(s, b);
    let (p1, p2) = branch_probabilities(s, &g);
    let n1 = branch_amplitude(s, b, Branch::X).norm_sqr();
    let n2 = branch_amplitude(s, b, Branch::XPerp).norm_sqr();
    let check = |p: f64, n: f64| {
        let v = p * p - n;
        if v < -ROUNDOFF_TOL {
            Err(Error::Internal(format!("negative deficiency {v} at {b:?}")))
        } else {
            Ok(v.clamp(0.0, p * p))
        }
    };
    Ok((check(p1, n1)?, check(p2, n2)?))
}

/// Term-by-term evaluation of the expanded trigonometric polynomial for `P`.
pub fn p_expanded(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    expanded(s, b, 0.0).0
}

/// Term-by-term evaluation of the expanded trigonometric polynomial for `Q`.
pub fn q_expanded(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    expanded(s, b, 0.0).1
}

/// [`p_expanded`] with `delta` added to the coefficient 3 of
/// `a1 a2 a3 a4 cos(mu)`. Only for exercising the verification suites.
#[doc(hidden)]
pub fn p_expanded_tampered(s: &CanonicalState, b: &MeasurementBasis, delta: f64) -> f64 {
    expanded(s, b, delta).0
}

fn expanded(s: &CanonicalState, b: &MeasurementBasis, delta: f64) -> (f64, f64) {
    let [a0, a1, a2, a3, a4] = s.amplitudes();
    let (mu, theta, phi) = (s.mu(), b.theta, b.phi);
    let (a0s, a1s, a2s, a3s, a4s) = (a0 * a0, a1 * a1, a2 * a2, a3 * a3, a4 * a4);
    let c2 = (2.0 * (phi - mu)).cos();
    let k = a1 * a2 * a3 * a4 * mu.cos();
    let cpm = (phi - mu).cos();

    let shared = 0.25 * a0s * a1s * c2
        + (3.0 + delta) * k
        + (3.0 - 4.0 * a0s + 4.0 * a0s * a0s + 2.0 * a0s * a1s - 12.0 * a2s * a3s - 4.0 * a0s * a4s - 12.0 * a1s * a4s)
            / 8.0
        + (2.0 * theta).cos() / 8.0
            * (1.0 - 4.0 * a0s + 4.0 * a0s * a0s - 2.0 * a0s * a1s - 2.0 * a0s * a1s * c2 - 4.0 * a2s * a3s
                + 8.0 * k
                + 4.0 * a0s * a4s
                - 4.0 * a1s * a4s)
        - 0.5 * a0 * (2.0 * theta).sin() * (2.0 * a2 * a3 * a4 * phi.cos() + a1 * (1.0 - 2.0 * a0s - 2.0 * a4s) * cpm);
    let cos_term = theta.cos() * (0.5 - a0s - 2.0 * a2s * a3s + 4.0 * k - 2.0 * a1s * a4s);
    let sin_term = a0 * theta.sin() * (2.0 * a2 * a3 * a4 * phi.cos() + a1 * (1.0 - 2.0 * a4s) * cpm);

    let p = shared - cos_term + sin_term;
    let q = shared + cos_term - sin_term;
    (p, q)
}

/// `sqrt(P) + sqrt(Q)`.
pub fn objective_f(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    objective_terms(s, b).objective()
}

/// Probability that the controlled teleportation succeeds in basis `b`.
pub fn success_probability(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    objective_terms(s, b).success()
}

/// `2 p1 lambda10 + 2 p2 lambda20` from the branch concurrences.
pub fn success_from_schmidt(s: &CanonicalState, b: &MeasurementBasis) -> f64 {
    let d = charlie_collapse(s, b);
    Branch::BOTH
        .iter()
        .map(|&br| match d.state(br) {
            Some(t) => {
                let c = concurrence(&t);
                let lambda0 = c * c / (2.0 * (1.0 + (1.0 - c * c).sqrt()));
                2.0 * d.probability(br) * lambda0
            }
            None => 0.0,
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{random_state, CaseLabel};
    use crate::two_qubit::concurrence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn ghz() -> CanonicalState {
        CanonicalState::new([S, 0.0, 0.0, 0.0, S], 0.0).unwrap()
    }

    fn samples(n: usize, seed: u64) -> Vec<(CanonicalState, MeasurementBasis)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let s = crate::state::random_state_with(&mut rng, None);
                let b = MeasurementBasis::new(rng.random_range(0.0..=PI), rng.random_range(0.0..=2.0 * PI)).unwrap();
                (s, b)
            })
            .collect()
    }

    #[test]
    fn basis_is_orthonormal() {
        for (_, b) in samples(100, 7) {
            let (x, xp) = b.vectors();
            let ip = x[0].conj() * xp[0] + x[1].conj() * xp[1];
            assert!(ip.norm() < 1e-15);
            assert!((x[0].norm_sqr() + x[1].norm_sqr() - 1.0).abs() < 1e-15);
        }
        assert!(MeasurementBasis::new(-0.1, 0.0).is_err());
        assert!(MeasurementBasis::new(0.0, 7.0).is_err());
    }

    #[test]
    fn ghz_equator_splits_evenly() {
        let b = MeasurementBasis::new(PI / 2.0, 0.0).unwrap();
        let d = charlie_collapse(&ghz(), &b);
        assert!((d.p1 - 0.5).abs() < 1e-15 && (d.p2 - 0.5).abs() < 1e-15);
        let phi1 = d.phi1.unwrap();
        assert!((phi1.c00.re - S).abs() < 1e-15 && (phi1.c11.re - S).abs() < 1e-15);
        assert!(phi1.c01.norm() < 1e-16 && phi1.c10.norm() < 1e-16);
        // direct projection route
        let (u1, _) = project_controller(&ghz(), &b);
        assert!((u1[0].re - 0.5).abs() < 1e-15 && (u1[3].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn theta_zero_keeps_a0_branch() {
        for (s, b) in samples(50, 3) {
            let b0 = MeasurementBasis::new(0.0, b.phi).unwrap();
            let d = charlie_collapse(&s, &b0);
            assert!((d.p1 - s.a(0).powi(2)).abs() < 1e-15);
            let phi1 = d.phi1.unwrap();
            assert!((phi1.c00.norm() - 1.0).abs() < 1e-15);
            assert_eq!(branch_amplitude(&s, &b0, Branch::X), Complex64::new(0.0, 0.0));
            assert!((p_def(&s, &b0) - s.a(0).powi(4)).abs() < 1e-15);
            assert!((p_expanded(&s, &b0) - s.a(0).powi(4)).abs() < 1e-14);
        }
    }

    #[test]
    fn decomposition_reproduces_channel() {
        for (s, b) in samples(300, 11) {
            let d = charlie_collapse(&s, &b);
            assert!((d.p1 + d.p2 - 1.0).abs() < 1e-12);
            let (x, xp) = b.vectors();
            let psi = s.to_state_vector();
            let mut rebuilt = [Complex64::new(0.0, 0.0); 8];
            for (v, p, st) in [(x, d.p1, d.phi1), (xp, d.p2, d.phi2)] {
                if let Some(t) = st {
                    for (k, c) in t.to_array().iter().enumerate() {
                        rebuilt[k] += v[0] * c * p.sqrt();
                        rebuilt[4 + k] += v[1] * c * p.sqrt();
                    }
                }
            }
            for (r, e) in rebuilt.iter().zip(&psi) {
                assert!((r - e).norm() < 1e-12);
            }
            let (d1, d2) = project_controller(&s, &b);
            let n1: f64 = d1.iter().map(|c| c.norm_sqr()).sum();
            let n2: f64 = d2.iter().map(|c| c.norm_sqr()).sum();
            assert!((n1 - d.p1).abs() < 1e-14 && (n2 - d.p2).abs() < 1e-14);
        }
    }

    #[test]
    fn amplitude_is_probability_times_concurrence() {
        let b = MeasurementBasis::new(PI / 2.0, 0.0).unwrap();
        assert!((branch_amplitude(&ghz(), &b, Branch::X).norm() - 0.5).abs() < 1e-15);
        for (s, b) in samples(500, 5) {
            let d = charlie_collapse(&s, &b);
            for br in Branch::BOTH {
                if d.probability(br) > 1e-6 {
                    let c = concurrence(&d.state(br).unwrap());
                    let n = branch_amplitude(&s, &b, br).norm();
                    assert!((n - d.probability(br) * c).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ghz_equator_has_zero_deficiency() {
        let b = MeasurementBasis::new(PI / 2.0, 1.3).unwrap();
        assert!(p_def(&ghz(), &b) < 1e-30);
        assert!(q_def(&ghz(), &b) < 1e-30);
        assert!(p_expanded(&ghz(), &b).abs() < 1e-15);
        assert!((success_probability(&ghz(), &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn case_a_deficiency_closed_form() {
        for seed in 0..50 {
            let s = random_state(seed, Some(CaseLabel::GhzClass));
            let a0s = s.a(0).powi(2);
            for k in 0..=10 {
                let t = PI * k as f64 / 10.0;
                let b = MeasurementBasis::new(t, 0.37 * k as f64).unwrap();
                let expect = 0.25 * (t.cos() - (1.0 - 2.0 * a0s)).powi(2);
                assert!((p_def(&s, &b) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn definitional_and_literal_forms_agree() {
        for (s, b) in samples(1000, 17) {
            let t = objective_terms(&s, &b);
            let (p, q) = pq_from_amplitudes(&s, &b).unwrap();
            assert!((t.p - p).abs() < 1e-14 && (t.q - q).abs() < 1e-14);
            assert!((t.p - p_expanded(&s, &b)).abs() <= 1e-12);
            assert!((t.q - q_expanded(&s, &b)).abs() <= 1e-12);
            assert!(t.p <= t.p1 * t.p1 && t.q <= t.p2 * t.p2);
        }
    }

    #[test]
    fn success_identities() {
        for (s, b) in samples(1000, 23) {
            let f = objective_f(&s, &b);
            let p = success_probability(&s, &b);
            assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&p));
            assert!((p - (1.0 - f)).abs() < 1e-12);
            assert!((p - success_from_schmidt(&s, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn tampering_changes_expanded_value() {
        let s = random_state(9, Some(CaseLabel::GeneralFull));
        let b = MeasurementBasis::new(1.0, 2.0).unwrap();
        assert!((p_expanded_tampered(&s, &b, 1e-3) - p_expanded(&s, &b)).abs() > 1e-8);
    }

    #[test]
    fn case_a_objective_is_phi_free() {
        for seed in 0..20 {
            let s = random_state(100 + seed, Some(CaseLabel::GhzClass));
            for k in 0..10 {
                let t = PI * k as f64 / 9.0;
                let f0 = objective_f(&s, &MeasurementBasis::new(t, 0.0).unwrap());
                let f1 = objective_f(&s, &MeasurementBasis::new(t, 4.1).unwrap());
                assert!((f0 - f1).abs() < 1e-12);
            }
        }
    }
}
