//! Case-by-case maximal success probability from finite candidate sets.
//!
//! Each structural case has a finite set of basis points (boundaries,
//! stationary roots, hyperplane points, collapse points) containing a
//! minimizer of `sqrt(P) + sqrt(Q)`. Every candidate is evaluated through the
//! objective and the best one wins, so the closed forms serve as
//! assertions rather than as the computation itself.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{charlie_collapse, success_probability, Branch, MeasurementBasis};
use crate::state::{CanonicalState, CaseLabel, DEFAULT_ZERO_TOL};
use crate::two_qubit::concurrence;

/// Tolerance between a closed-form `p_max` and the candidate maximum.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
/// Candidates within this of the maximum are reported as best points.
pub const BEST_POINT_TOL: f64 = 1e-12;
/// Concurrence and probability tolerance for collapse points.
pub const COLLAPSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateOrigin {
    /// `theta = 0` or `theta = pi`.
    Boundary,
    /// `theta = pi/2` probe at a fixed `phi`.
    Equator,
    /// Stationary root `theta_k` of the case analysis.
    Root(u8),
    /// Point on the stationary hyperplane in `(theta, phi)`.
    Hyperplane,
    /// Basis at which one branch is a Bell pair.
    Collapse,
    /// Interior representative of an optimal region.
    RegionRepresentative,
    /// Produced by the numeric optimizer.
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidatePoint {
    pub theta: f64,
    pub phi: f64,
    pub origin: CandidateOrigin,
}

impl CandidatePoint {
    pub fn new(theta: f64, phi: f64, origin: CandidateOrigin) -> Self {
        let b = MeasurementBasis::folded(theta, phi);
        Self { theta: b.theta, phi: b.phi, origin }
    }

    pub fn basis(&self) -> MeasurementBasis {
        MeasurementBasis { theta: self.theta, phi: self.phi }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Numeric,
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub pmax: f64,
    /// Sorted by `theta`, then `phi`.
    pub best_points: Vec<CandidatePoint>,
    pub case: CaseLabel,
    pub method: Method,
    pub closed_form_pmax: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

/// `theta` in `(0, pi)` with `cot(theta) = y`.
fn acot(y: f64) -> f64 {
    1f64.atan2(y)
}

/// `theta` with `cot(theta / 2) = t`, `t >= 0`.
fn acot_half(t: f64) -> f64 {
    2.0 * 1f64.atan2(t)
}

fn near(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol
}

/// Collects candidate points, dropping non-finite roots.
struct Candidates {
    points: Vec<CandidatePoint>,
    tol: f64,
}

impl Candidates {
    fn new(tol: f64) -> Self {
        let mut c = Self { points: Vec::new(), tol };
        c.push(0.0, 0.0, CandidateOrigin::Boundary);
        c.push(PI, 0.0, CandidateOrigin::Boundary);
        c.push(FRAC_PI_2, 0.0, CandidateOrigin::Equator);
        c.push(FRAC_PI_2, FRAC_PI_2, CandidateOrigin::Equator);
        c.push(FRAC_PI_2, 3.0 * FRAC_PI_2, CandidateOrigin::Equator);
        c
    }

    fn push(&mut self, theta: f64, phi: f64, origin: CandidateOrigin) {
        if theta.is_finite() && phi.is_finite() {
            self.points.push(CandidatePoint::new(theta, phi, origin));
        }
    }

    /// Root with `cot(theta) = num / den`; omitted when `den` vanishes.
    fn root(&mut self, k: u8, num: f64, den: f64, phi: f64) {
        if den.abs() > self.tol {
            self.push(acot(num / den), phi, CandidateOrigin::Root(k));
        }
    }

    /// The pair `(theta0, phi_x)`, `(pi - theta0, phi_x + pi)` with
    /// `cot(theta0 / 2) = t`.
    fn collapse_pair(&mut self, t: f64, phi_x: f64) {
        let t0 = acot_half(t);
        self.push(t0, phi_x, CandidateOrigin::Collapse);
        self.push(PI - t0, phi_x + PI, CandidateOrigin::Collapse);
    }
}

/// Candidate basis points for `case`, which must match the state's case.
pub fn candidates_for(s: &CanonicalState, case: CaseLabel) -> Result<Vec<CandidatePoint>> {
    candidates_with_tol(s, case, DEFAULT_ZERO_TOL).map(|(c, _)| c)
}

fn candidates_with_tol(s: &CanonicalState, case: CaseLabel, tol: f64) -> Result<(Vec<CandidatePoint>, Vec<String>)> {
    let actual = s.case(tol);
    if actual != case {
        return Err(Error::CaseMismatch { requested: case, actual });
    }
    let [a0, a1, a2, a3, a4] = s.amplitudes();
    let mu = s.mu();
    let mut c = Candidates::new(tol);
    let mut diagnostics = Vec::new();
    use CandidateOrigin::*;
    use CaseLabel::*;
    match case {
        GeneralFull => return Err(Error::UnsupportedGeneralCase),
        DegenerateProduct | BiseparableD24 | BiseparableD34 | TriBell | C12 | C13 => {}
        GhzClass => {
            let k = 1.0 - 2.0 * a0 * a0;
            c.push(k.acos(), 0.0, Root(1));
            c.push((-k).acos(), 0.0, Root(2));
        }
        ExtendedGhz => {
            c.push(FRAC_PI_2, mu + FRAC_PI_2, RegionRepresentative);
            c.push(FRAC_PI_2, mu + 3.0 * FRAC_PI_2, RegionRepresentative);
        }
        FA1Zero => {
            c.root(1, -a4, 2.0 * a0 * a2 * a3, 0.0);
            c.root(2, a3 * (1.0 - 2.0 * a3 * a3 - 2.0 * a4 * a4), 2.0 * a0 * a2 * a4, 0.0);
            c.root(3, a2 * (1.0 - 2.0 * a2 * a2 - 2.0 * a4 * a4), 2.0 * a0 * a3 * a4, 0.0);
            c.collapse_pair(a4 / a0, PI);
        }
        GA4Zero => {
            let d = (a2 * a2 - a3 * a3).abs();
            c.root(1, -a1, a0, mu);
            c.root(2, a0 * a0 - a1 * a1 - d, 2.0 * a0 * a1, mu);
            c.root(3, a0 * a0 - a1 * a1 + d, 2.0 * a0 * a1, mu);
            c.push(FRAC_PI_2, mu + FRAC_PI_2, Hyperplane);
            c.push(FRAC_PI_2, mu + 3.0 * FRAC_PI_2, Hyperplane);
            c.collapse_pair(a1 / a0, mu + PI);
        }
        HA2Zero | HA3Zero => {
            c.root(1, -a1, a0, mu);
            c.root(2, 1.0 - 2.0 * a1 * a1, 2.0 * a0 * a1, mu);
            c.root(3, -1.0 + 2.0 * a0 * a0, 2.0 * a0 * a1, mu);
            c.push(FRAC_PI_2, mu + FRAC_PI_2, Hyperplane);
            c.push(FRAC_PI_2, mu + 3.0 * FRAC_PI_2, Hyperplane);
        }
        IMuZero => {
            let (a0s, a1s, a2s, a3s, a4s) = (a0 * a0, a1 * a1, a2 * a2, a3 * a3, a4 * a4);
            let det = a1 * a4 - a2 * a3;
            let side = near(a2, a3, tol) && near(det, 0.5, tol);
            if !side {
                c.root(1, 2.0 * a1 * a2 * a3 + a4 - 2.0 * a1s * a4, 2.0 * a0 * det, 0.0);
            }
            c.root(
                2,
                -2.0 * a1 * a2 * a4 + a3 * (1.0 - 2.0 * a1s - 2.0 * a3s - 2.0 * a4s),
                2.0 * a0 * (a1 * a3 + a2 * a4),
                0.0,
            );
            c.root(
                3,
                -2.0 * a1 * a3 * a4 + a2 * (1.0 - 2.0 * a1s - 2.0 * a2s - 2.0 * a4s),
                2.0 * a0 * (a1 * a2 + a3 * a4),
                0.0,
            );
            let d = (a2s - a3s).abs();
            let den = 4.0 * a0 * (1.0 - a0s) * a1;
            c.root(4, (1.0 - 2.0 * a0s) * (-1.0 + a0s - a1s + a4s + d), den, 0.0);
            c.root(5, (1.0 - 2.0 * a0s) * (-1.0 + a0s - a1s + a4s - d), den, 0.0);
            c.push(FRAC_PI_2, FRAC_PI_2, Hyperplane);
            c.collapse_pair((a1 + a4) / a0, PI);
        }
        JMuPi => {
            let (a1s, a2s, a3s, a4s) = (a1 * a1, a2 * a2, a3 * a3, a4 * a4);
            c.root(1, 2.0 * a1 * a2 * a3 - a4 + 2.0 * a1s * a4, 2.0 * a0 * (a2 * a3 + a1 * a4), 0.0);
            let d12 = a1 * a2 - a3 * a4;
            c.root(2, -a2 + 2.0 * a1s * a2 + 2.0 * a2 * a2s - 2.0 * a1 * a3 * a4 + 2.0 * a2 * a4s, 2.0 * a0 * d12, 0.0);
            c.root(
                3,
                -a3 + 2.0 * a1s * a3 + 2.0 * a3 * a3s - 2.0 * a1 * a2 * a4 + 2.0 * a3 * a4s,
                2.0 * a0 * (a1 * a3 - a2 * a4),
                0.0,
            );
            let n3 = -a1 + 2.0 * a1 * a1s + 2.0 * a1 * a3s;
            let n2 = -a1 + 2.0 * a1 * a1s + 2.0 * a1 * a2s;
            c.root(4, n3, 2.0 * a0 * (a1s + a3s), 0.0);
            c.root(5, n3, 2.0 * a0 * (a1s - a4s), 0.0);
            c.root(6, n2, 2.0 * a0 * (a1s + a2s), 0.0);
            c.root(7, n2, 2.0 * a0 * (a1s - a4s), 0.0);
            c.root(8, -a0 * a1, 2.0 * (a1s + a2s), 0.0);
            c.push(FRAC_PI_2, FRAC_PI_2, Hyperplane);
            let t = (a1 - a4).abs() / a0;
            c.collapse_pair(t, 0.0);
            c.collapse_pair(t, PI);
            if near(d12, 0.0, tol) && !near(a1, a4, tol) && near(a2, a3, tol) {
                diagnostics
                    .push(format!("a1 a2 = a3 a4 with a1 != a4 should force a2 != a3, but a2 = {a2}, a3 = {a3}"));
            }
        }
    }
    Ok((c.points, diagnostics))
}

/// Closed form for `p_max`, where one exists.
pub fn closed_form_pmax(s: &CanonicalState, case: CaseLabel) -> Option<f64> {
    let [a0, _, a2, a3, a4] = s.amplitudes();
    let (a0s, a2s, a3s, a4s) = (a0 * a0, a2 * a2, a3 * a3, a4 * a4);
    use CaseLabel::*;
    match case {
        GhzClass => Some(1.0 - (1.0 - 2.0 * a0s).abs()),
        TriBell => Some(1.0 - (a0s + (a2s - a3s).abs()).min((1.0 - 4.0 * a2s * a3s).max(0.0).sqrt())),
        C12 | C13 => Some(1.0 - (1.0 - 4.0 * a0s * a4s).max(0.0).sqrt()),
        BiseparableD24 | BiseparableD34 | DegenerateProduct => Some(0.0),
        ExtendedGhz => Some(1.0 - (1.0 - 2.0 * a4s).abs()),
        _ => None,
    }
}

/// Best value over a list of candidates, with the points attaining it.
pub(crate) fn best_of(s: &CanonicalState, points: &[CandidatePoint]) -> (f64, Vec<CandidatePoint>) {
    let values: Vec<f64> = points.iter().map(|p| success_probability(s, &p.basis())).collect();
    let pmax = values.iter().copied().fold(0.0, f64::max);
    let mut best: Vec<CandidatePoint> =
        points.iter().zip(&values).filter(|(_, &v)| v >= pmax - BEST_POINT_TOL).map(|(p, _)| *p).collect();
    best.sort_by(|x, y| x.theta.total_cmp(&y.theta).then(x.phi.total_cmp(&y.phi)));
    best.dedup_by(|x, y| near(x.theta, y.theta, BEST_POINT_TOL) && near(x.phi, y.phi, BEST_POINT_TOL));
    (pmax, best)
}

/// Maximal success probability from the case's candidate set.
pub fn pmax_analytic(s: &CanonicalState) -> Result<OptimumReport> {
    pmax_analytic_with_tol(s, DEFAULT_ZERO_TOL)
}

pub fn pmax_analytic_with_tol(s: &CanonicalState, zero_tol: f64) -> Result<OptimumReport> {
    let case = s.case(zero_tol);
    let (points, diagnostics) = candidates_with_tol(s, case, zero_tol)?;
    let closed = closed_form_pmax(s, case);
    let (mut pmax, best_points) = best_of(s, &points);
    if matches!(case, CaseLabel::BiseparableD24 | CaseLabel::BiseparableD34 | CaseLabel::DegenerateProduct) {
        pmax = 0.0;
    }
    if let Some(cf) = closed {
        if (cf - pmax).abs() > CLOSED_FORM_TOL {
            return Err(Error::Internal(format!(
                "closed form {cf} disagrees with candidate maximum {pmax} for {case}"
            )));
        }
    }
    Ok(OptimumReport { pmax, best_points, case, method: Method::Analytic, closed_form_pmax: closed, diagnostics })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    pub theta: f64,
    pub phi: f64,
    /// Branch that is a Bell pair at this basis.
    pub branch: Branch,
    /// Branch probability recomputed from the decomposition.
    pub probability: f64,
    /// Branch probability from the closed-form expression.
    pub expected_probability: f64,
    pub concurrence: f64,
    /// Concurrence and probability both within tolerance.
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub case: CaseLabel,
    pub points: Vec<CollapsePoint>,
    /// Probability of obtaining a Bell pair when measuring in a reported
    /// basis; `None` when no collapse is possible.
    pub collapse_probability: Option<f64>,
    pub condition: String,
}

fn collapse_point(s: &CanonicalState, theta: f64, phi: f64, branch: Branch, expected: f64) -> CollapsePoint {
    let b = MeasurementBasis::folded(theta, phi);
    let d = charlie_collapse(s, &b);
    let probability = d.probability(branch);
    let conc = d.state(branch).map_or(0.0, |t| concurrence(&t));
    CollapsePoint {
        theta: b.theta,
        phi: b.phi,
        branch,
        probability,
        expected_probability: expected,
        concurrence: conc,
        verified: (conc - 1.0).abs() <= COLLAPSE_TOL && (probability - expected).abs() <= COLLAPSE_TOL,
    }
}

/// Bases at which a branch becomes a Bell pair, with the conditions under
/// which they exist.
pub fn epr_collapse(s: &CanonicalState) -> CollapseReport {
    epr_collapse_with_tol(s, DEFAULT_ZERO_TOL)
}

pub fn epr_collapse_with_tol(s: &CanonicalState, tol: f64) -> CollapseReport {
    let case = s.case(tol);
    let [a0, a1, a2, a3, a4] = s.amplitudes();
    let mu = s.mu();
    let (a0s, a1s, a2s, a4s) = (a0 * a0, a1 * a1, a2 * a2, a4 * a4);
    let eq23 = near(a2, a3, tol);
    let mut points = Vec::new();
    let mut total = None;
    let pair = |points: &mut Vec<CollapsePoint>, t0: f64, phi_x: f64, p: f64| {
        points.push(collapse_point(s, t0, phi_x, Branch::X, p));
        points.push(collapse_point(s, PI - t0, phi_x + PI, Branch::XPerp, p));
    };
    use CaseLabel::*;
    let condition = match case {
        GhzClass if near(a0s, 0.5, tol) => {
            points.push(collapse_point(s, FRAC_PI_2, 0.0, Branch::X, 0.5));
            points.push(collapse_point(s, FRAC_PI_2, 0.0, Branch::XPerp, 0.5));
            total = Some(1.0);
            "a0^2 = 1/2: both branches at theta = pi/2, any phi".to_string()
        }
        GhzClass => {
            let k = 1.0 - 2.0 * a0s;
            let p = 2.0 * a0s * (1.0 - a0s);
            points.push(collapse_point(s, k.acos(), 0.0, Branch::X, p));
            points.push(collapse_point(s, (-k).acos(), 0.0, Branch::XPerp, p));
            total = Some(p);
            "always: cos(theta) = +-(1 - 2 a0^2)".to_string()
        }
        TriBell if eq23 => {
            let p = 1.0 - a0s;
            points.push(collapse_point(s, PI, 0.0, Branch::X, p));
            points.push(collapse_point(s, 0.0, 0.0, Branch::XPerp, p));
            total = Some(p);
            "a2 = a3".to_string()
        }
        FA1Zero if eq23 => {
            let p = a0s * (1.0 - a0s + a4s) / (a0s + a4s);
            pair(&mut points, acot_half(a4 / a0), PI, p);
            total = Some(p);
            "a2 = a3".to_string()
        }
        GA4Zero if eq23 => {
            let p = a0s * (1.0 - a0s - a1s) / (a0s + a1s);
            pair(&mut points, acot_half(a1 / a0), mu + PI, p);
            total = Some(p);
            "a2 = a3".to_string()
        }
        IMuZero if eq23 => {
            let p = a0s * (1.0 - a0s - a1s + a4s) / (a0s + (a1 + a4).powi(2));
            pair(&mut points, acot_half((a1 + a4) / a0), PI, p);
            total = Some(p);
            "a2 = a3".to_string()
        }
        JMuPi if eq23 && near(a1, a4, tol) => {
            let p = 2.0 * a1s + 2.0 * a2s;
            points.push(collapse_point(s, PI, 0.0, Branch::X, p));
            points.push(collapse_point(s, 0.0, 0.0, Branch::XPerp, p));
            total = Some(p);
            "a1 = a4 and a2 = a3".to_string()
        }
        JMuPi if eq23 => {
            let p = a0s * (1.0 - a0s - a1s + a4s) / (a0s + (a1 - a4).powi(2));
            let phi_x = if a1 > a4 { 0.0 } else { PI };
            pair(&mut points, acot_half((a1 - a4).abs() / a0), phi_x, p);
            total = Some(p);
            "a2 = a3".to_string()
        }
        ExtendedGhz if near(a4s, 0.5, tol) => {
            points.push(collapse_point(s, FRAC_PI_2, mu + FRAC_PI_2, Branch::X, 0.5));
            points.push(collapse_point(s, FRAC_PI_2, mu + FRAC_PI_2, Branch::XPerp, 0.5));
            total = Some(1.0);
            "a4^2 = 1/2: both branches wherever a1 cos(phi - mu) sin(theta) + a0 cos(theta) = 0".to_string()
        }
        C12 | C13 | HA2Zero | HA3Zero => "never".to_string(),
        TriBell | FA1Zero | GA4Zero | IMuZero | JMuPi => "requires a2 = a3".to_string(),
        ExtendedGhz => "requires a4^2 = 1/2".to_string(),
        BiseparableD24 | BiseparableD34 | DegenerateProduct => "never".to_string(),
        GeneralFull => "not covered by the case analysis".to_string(),
    };
    CollapseReport { case, points, collapse_probability: total, condition }
}

/// Region inequality describing the optimal set in the extended-GHZ case.
pub fn extended_ghz_region(s: &CanonicalState) -> String {
    let [a0, a1, _, _, a4] = s.amplitudes();
    format!(
        "|{:.6} cos(phi - {:.6}) sin(theta) - {:.6} cos(theta)| <= {:.6}",
        2.0 * a0 * a1,
        s.mu(),
        1.0 - 2.0 * a0 * a0 - 2.0 * a4 * a4,
        (1.0 - 2.0 * a4 * a4).abs()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::random_state;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn w() -> CanonicalState {
        let t = (1.0f64 / 3.0).sqrt();
        CanonicalState::new([t, 0.0, t, t, 0.0], 0.0).unwrap()
    }

    #[test]
    fn ghz_is_perfect() {
        let s = CanonicalState::new([S, 0.0, 0.0, 0.0, S], 0.0).unwrap();
        let c = candidates_for(&s, CaseLabel::GhzClass).unwrap();
        assert!(c.iter().any(|p| near(p.theta, FRAC_PI_2, 1e-15) && p.phi == 0.0));
        let r = pmax_analytic(&s).unwrap();
        assert!((r.pmax - 1.0).abs() < 1e-12);
        assert!((r.closed_form_pmax.unwrap() - 1.0).abs() < 1e-15);
        let col = epr_collapse(&s);
        assert_eq!(col.collapse_probability, Some(1.0));
        assert!(col.points.iter().all(|p| p.verified));
    }

    #[test]
    fn w_state_two_thirds() {
        let s = w();
        let c = candidates_for(&s, CaseLabel::TriBell).unwrap();
        assert!(c.iter().any(|p| p.theta == 0.0));
        assert!(c.iter().any(|p| p.theta == FRAC_PI_2 && p.phi == 0.0));
        let r = pmax_analytic(&s).unwrap();
        assert!((r.pmax - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn case_mismatch_and_general() {
        assert!(matches!(candidates_for(&w(), CaseLabel::GhzClass), Err(Error::CaseMismatch { .. })));
        let g = random_state(1, Some(CaseLabel::GeneralFull));
        assert_eq!(pmax_analytic(&g), Err(Error::UnsupportedGeneralCase));
    }

    #[test]
    fn f_collapse_point_present() {
        let s = CanonicalState::new([0.5, 0.0, 0.5, 0.5, 0.5], 1.0).unwrap();
        let c = candidates_for(&s, CaseLabel::FA1Zero).unwrap();
        let t0 = acot_half(1.0);
        assert!(c.iter().any(|p| near(p.theta, t0, 1e-15) && near(p.phi, PI, 1e-15)));
        let col = epr_collapse(&s);
        assert_eq!(col.points.len(), 2);
        assert!(col.points.iter().all(|p| p.verified), "{col:?}");
    }

    #[test]
    fn no_collapse_for_c_and_h() {
        for case in [CaseLabel::C12, CaseLabel::C13, CaseLabel::HA2Zero, CaseLabel::HA3Zero] {
            let s = random_state(4, Some(case));
            let col = epr_collapse(&s);
            assert!(col.points.is_empty());
            assert_eq!(col.collapse_probability, None);
        }
    }

    #[test]
    fn closed_forms_hold_on_random_states() {
        for case in [
            CaseLabel::GhzClass,
            CaseLabel::TriBell,
            CaseLabel::C12,
            CaseLabel::C13,
            CaseLabel::ExtendedGhz,
            CaseLabel::BiseparableD24,
            CaseLabel::BiseparableD34,
            CaseLabel::DegenerateProduct,
        ] {
            for seed in 0..200 {
                let s = random_state(seed, Some(case));
                let r = pmax_analytic(&s).unwrap();
                assert!((r.pmax - r.closed_form_pmax.unwrap()).abs() <= CLOSED_FORM_TOL);
            }
        }
    }

    #[test]
    fn swap_symmetric_cases() {
        for seed in 0..50 {
            let s = random_state(seed, Some(CaseLabel::TriBell));
            let [a0, a1, a2, a3, a4] = s.amplitudes();
            let t = CanonicalState::new([a0, a1, a3, a2, a4], s.mu()).unwrap();
            let d = pmax_analytic(&s).unwrap().pmax - pmax_analytic(&t).unwrap().pmax;
            assert!(d.abs() < 1e-12);
            for case in [CaseLabel::C12, CaseLabel::HA2Zero] {
                let s = random_state(seed, Some(case));
                let [a0, a1, a2, a3, a4] = s.amplitudes();
                let t = CanonicalState::new([a0, a1, a3, a2, a4], s.mu()).unwrap();
                let d = pmax_analytic(&s).unwrap().pmax - pmax_analytic(&t).unwrap().pmax;
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn best_points_sorted_and_in_domain() {
        for case in [CaseLabel::FA1Zero, CaseLabel::GA4Zero, CaseLabel::IMuZero, CaseLabel::JMuPi] {
            for seed in 0..30 {
                let s = random_state(seed, Some(case));
                let r = pmax_analytic(&s).unwrap();
                assert!(!r.best_points.is_empty());
                for w in r.best_points.windows(2) {
                    assert!(w[0].theta <= w[1].theta);
                }
                for p in &r.best_points {
                    assert!((0.0..=PI).contains(&p.theta) && (0.0..=2.0 * PI).contains(&p.phi));
                    assert!((success_probability(&s, &p.basis()) - r.pmax).abs() <= 1e-10);
                }
            }
        }
    }
}
