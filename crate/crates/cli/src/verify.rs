//! The invariant battery behind `ctq verify`.
//!
//! Every suite draws from one seeded generator in a fixed order and runs
//! sequentially, so a given seed always yields the same summary.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use ctq_core::analytic::{epr_collapse, pmax_analytic};
use ctq_core::numeric::{pmax_numeric, OptimizerConfig};
use ctq_core::objective::{
    branch_amplitude, charlie_collapse, objective_f, objective_terms, p_def, p_expanded, p_expanded_tampered, q_def,
    q_expanded, success_from_schmidt, success_probability, Branch, MeasurementBasis,
};
use ctq_core::protocol::{run_protocol, MessageQubit};
use ctq_core::state::{random_state_with, validate, CanonicalState, CaseLabel, StateRecord, Tolerances};
use ctq_core::two_qubit::concurrence;

use crate::args::Fault;

/// Coefficient perturbation used by the fault hook.
const FAULT_DELTA: f64 = 1e-3;

/// Cases with a closed-form candidate set, in report order.
pub const ANALYTIC_CASES: [CaseLabel; 12] = [
    CaseLabel::GhzClass,
    CaseLabel::TriBell,
    CaseLabel::C12,
    CaseLabel::C13,
    CaseLabel::ExtendedGhz,
    CaseLabel::FA1Zero,
    CaseLabel::GA4Zero,
    CaseLabel::HA2Zero,
    CaseLabel::HA3Zero,
    CaseLabel::IMuZero,
    CaseLabel::JMuPi,
    CaseLabel::BiseparableD24,
];

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub samples: usize,
    pub states_per_case: usize,
    pub optimizer: OptimizerConfig,
    pub cross_tol: f64,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub state: StateRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<MeasurementBasis>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub max_error: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<Failure>,
}

impl SuiteResult {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, checks: 0, failures: 0, max_error: 0.0, tolerance, first_failure: None }
    }

    /// Records one error measurement; fails when it exceeds the tolerance.
    fn error(&mut self, err: f64, s: &CanonicalState, b: Option<MeasurementBasis>, what: &str) {
        self.checks += 1;
        let err = if err.is_nan() { f64::INFINITY } else { err };
        if err > self.max_error {
            self.max_error = err;
        }
        if err > self.tolerance {
            self.fail(s, b, format!("{what}: error {err:e} above {:e}", self.tolerance));
        }
    }

    /// Records one boolean check.
    fn check(&mut self, ok: bool, s: &CanonicalState, b: Option<MeasurementBasis>, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(s, b, what());
        }
    }

    fn fail(&mut self, s: &CanonicalState, b: Option<MeasurementBasis>, detail: String) {
        self.failures += 1;
        if self.first_failure.is_none() {
            self.first_failure = Some(Failure { state: s.to_record(), basis: b, detail });
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

fn random_basis(rng: &mut ChaCha8Rng) -> MeasurementBasis {
    MeasurementBasis { theta: rng.random_range(0.0..=PI), phi: rng.random_range(0.0..=2.0 * PI) }
}

/// A random state of `case` with `a3 = a2`, and additionally `a4 = a1` when
/// `tie_a1_a4` is set.
pub fn random_tied_state(rng: &mut ChaCha8Rng, case: CaseLabel, tie_a1_a4: bool) -> CanonicalState {
    let s = random_state_with(rng, Some(case));
    let mut a = s.amplitudes();
    a[3] = a[2];
    if tie_a1_a4 {
        a[4] = a[1];
    }
    validate(a, s.mu(), true, &Tolerances::default()).expect("tied state stays valid")
}

fn swap_p(s: &CanonicalState, b: &MeasurementBasis, fault: Option<Fault>) -> f64 {
    match fault {
        Some(Fault::PExpanded) => p_expanded_tampered(s, b, FAULT_DELTA),
        None => p_expanded(s, b),
    }
}

fn form_suites(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> [SuiteResult; 2] {
    let mut p = SuiteResult::new("p_expanded", 1e-12);
    let mut q = SuiteResult::new("q_expanded", 1e-12);
    for _ in 0..cfg.samples {
        let s = random_state_with(rng, None);
        let b = random_basis(rng);
        p.error((swap_p(&s, &b, cfg.fault) - p_def(&s, &b)).abs(), &s, Some(b), "P expanded vs definition");
        q.error((q_expanded(&s, &b) - q_def(&s, &b)).abs(), &s, Some(b), "Q expanded vs definition");
    }
    [p, q]
}

fn symmetry_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("symmetry", 1e-12);
    for _ in 0..cfg.samples {
        let s = random_state_with(rng, None);
        let b = random_basis(rng);
        let shifted = if b.phi <= PI { b.phi + PI } else { b.phi - PI };
        let mirror = MeasurementBasis { theta: PI - b.theta, phi: shifted };
        r.error((q_def(&s, &b) - p_def(&s, &mirror)).abs(), &s, Some(b), "Q(theta, phi) vs P(pi - theta, phi +- pi)");
        let f0 = objective_f(&s, &MeasurementBasis { theta: 0.0, phi: b.phi });
        let fpi = objective_f(&s, &MeasurementBasis { theta: PI, phi: b.phi });
        r.error((f0 - fpi).abs(), &s, Some(b), "f(0, phi) vs f(pi, phi)");
        let g0 = objective_f(&s, &MeasurementBasis { theta: b.theta, phi: 0.0 });
        let g2 = objective_f(&s, &MeasurementBasis { theta: b.theta, phi: 2.0 * PI });
        r.error((g0 - g2).abs(), &s, Some(b), "f(theta, 0) vs f(theta, 2 pi)");
    }
    r
}

fn range_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("ranges_and_identities", 1e-12);
    for _ in 0..cfg.samples {
        let s = random_state_with(rng, None);
        let b = random_basis(rng);
        let t = objective_terms(&s, &b);
        let f = t.objective();
        let p = success_probability(&s, &b);
        r.check((0.0..=t.p1 * t.p1).contains(&t.p) && (0.0..=t.p2 * t.p2).contains(&t.q), &s, Some(b), || {
            format!("deficiency out of range: P = {}, Q = {}", t.p, t.q)
        });
        r.check((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&p), &s, Some(b), || {
            format!("objective {f} or success {p} outside [0, 1]")
        });
        r.error((t.p1 + t.p2 - 1.0).abs(), &s, Some(b), "p1 + p2 = 1");
        r.error((p - (1.0 - f)).abs(), &s, Some(b), "success = 1 - f");
        r.error((p - success_from_schmidt(&s, &b)).abs(), &s, Some(b), "success from Schmidt coefficients");
        let d = charlie_collapse(&s, &b);
        for br in Branch::BOTH {
            if d.probability(br) > 1e-6 {
                let c = concurrence(&d.state(br).expect("branch above tolerance"));
                let n = branch_amplitude(&s, &b, br).norm();
                r.error((n - d.probability(br) * c).abs(), &s, Some(b), "|N| = p C");
            }
        }
    }
    r
}

fn closed_form_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("closed_forms", 1e-10);
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
        for _ in 0..cfg.states_per_case.max(1) * 4 {
            let s = random_state_with(rng, Some(case));
            match pmax_analytic(&s) {
                Ok(rep) => {
                    let cf = rep.closed_form_pmax.unwrap_or(f64::NAN);
                    r.error((rep.pmax - cf).abs(), &s, None, "candidate maximum vs closed form");
                    if rep.closed_form_pmax == Some(0.0) {
                        r.check(rep.pmax == 0.0, &s, None, || format!("pmax {} is not exactly 0", rep.pmax));
                    }
                }
                Err(e) => r.check(false, &s, None, || e.to_string()),
            }
        }
    }
    r
}

fn agreement_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("analytic_numeric", cfg.cross_tol);
    for case in ANALYTIC_CASES {
        for _ in 0..cfg.states_per_case {
            let s = random_state_with(rng, Some(case));
            match (pmax_analytic(&s), pmax_numeric(&s, &cfg.optimizer)) {
                (Ok(a), Ok(n)) => r.error((a.pmax - n.pmax).abs(), &s, None, "analytic vs numeric pmax"),
                (Err(e), _) | (_, Err(e)) => r.check(false, &s, None, || e.to_string()),
            }
        }
    }
    r
}

fn protocol_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("protocol", 1e-10);
    for _ in 0..cfg.samples.min(200) {
        let s = random_state_with(rng, None);
        let b = random_basis(rng);
        let expect = 1.0 - objective_f(&s, &b);
        let mut totals = Vec::with_capacity(5);
        for m in MessageQubit::canonical_set() {
            match run_protocol(&s, &b, &m) {
                Ok(t) => {
                    r.error((t.total_probability() - 1.0).abs(), &s, Some(b), "branch probabilities sum to 1");
                    r.error((t.total_success_probability - expect).abs(), &s, Some(b), "protocol success vs 1 - f");
                    for br in t.branches.iter().filter(|br| br.success && br.probability > 0.0) {
                        let fid = br.fidelity.unwrap_or(0.0);
                        r.error(1.0 - fid, &s, Some(b), "fidelity of a successful branch");
                    }
                    for c in t.charlie.iter().filter(|c| c.probability > 1e-8) {
                        let l0 = c.lambda0.unwrap_or(f64::NAN);
                        r.error(
                            (c.conditional_success - 2.0 * l0).abs(),
                            &s,
                            Some(b),
                            "conditional success vs 2 lambda0",
                        );
                    }
                    totals.push(t.total_success_probability);
                }
                Err(e) => r.check(false, &s, Some(b), || e.to_string()),
            }
        }
        let spread = totals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - totals.iter().copied().fold(f64::INFINITY, f64::min);
        r.error(spread, &s, Some(b), "spread across message states");
    }
    r
}

fn collapse_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("collapse", 1e-10);
    let n = cfg.states_per_case.max(1) * 4;
    let mut states = Vec::new();
    for _ in 0..n {
        states.push(random_state_with(rng, Some(CaseLabel::GhzClass)));
        for case in [CaseLabel::TriBell, CaseLabel::FA1Zero, CaseLabel::GA4Zero, CaseLabel::IMuZero, CaseLabel::JMuPi] {
            states.push(random_tied_state(rng, case, false));
        }
        states.push(random_tied_state(rng, CaseLabel::JMuPi, true));
    }
    for s in states {
        let rep = epr_collapse(&s);
        r.check(!rep.points.is_empty(), &s, None, || format!("no collapse points for {}", rep.case));
        for p in &rep.points {
            let b = Some(MeasurementBasis { theta: p.theta, phi: p.phi });
            r.error((p.concurrence - 1.0).abs(), &s, b, "branch concurrence at a collapse point");
            r.error((p.probability - p.expected_probability).abs(), &s, b, "branch probability at a collapse point");
        }
    }
    r
}

fn no_collapse_suite(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> SuiteResult {
    let mut r = SuiteResult::new("no_collapse", 0.0);
    for case in [CaseLabel::C12, CaseLabel::C13, CaseLabel::HA2Zero, CaseLabel::HA3Zero] {
        for _ in 0..cfg.states_per_case.max(1) {
            let s = random_state_with(rng, Some(case));
            let m = min_deficiency(&s, 181, 361);
            r.check(m > 0.0, &s, None, || format!("min(P, Q) = {m:e} on the scan grid"));
            r.check(epr_collapse(&s).points.is_empty(), &s, None, || "collapse points reported".to_string());
        }
    }
    r
}

/// Smallest `min(P, Q)` over a `n_theta x n_phi` grid.
pub fn min_deficiency(s: &CanonicalState, n_theta: usize, n_phi: usize) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..n_theta {
        for j in 0..n_phi {
            let b = MeasurementBasis {
                theta: PI * i as f64 / (n_theta - 1) as f64,
                phi: 2.0 * PI * j as f64 / (n_phi - 1) as f64,
            };
            let t = objective_terms(s, &b);
            m = m.min(t.p.min(t.q));
        }
    }
    m
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut suites = Vec::new();
    suites.extend(form_suites(&mut rng, cfg));
    suites.push(symmetry_suite(&mut rng, cfg));
    suites.push(range_suite(&mut rng, cfg));
    suites.push(closed_form_suite(&mut rng, cfg));
    suites.push(agreement_suite(&mut rng, cfg));
    suites.push(protocol_suite(&mut rng, cfg));
    suites.push(collapse_suite(&mut rng, cfg));
    suites.push(no_collapse_suite(&mut rng, cfg));
    VerifySummary { seed: cfg.seed, passed: suites.iter().all(SuiteResult::passed), suites }
}
