//! Grid search plus downhill-simplex refinement of the success probability.
//!
//! Results are independent of the number of worker threads: rows are
//! evaluated in parallel but collected in index order, and every reduction
//! breaks ties by the lower index.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{CandidateOrigin, CandidatePoint, Method, OptimumReport};
use crate::error::{Error, Result};
use crate::objective::{terms_at, Angles, MeasurementBasis, PhiTrig, ThetaTrig};
use crate::state::{CanonicalState, DEFAULT_ZERO_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub refine_iters: usize,
    pub refine_tol: f64,
    pub top_k_cells: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { grid_theta: 721, grid_phi: 1441, refine_iters: 200, refine_tol: 1e-10, top_k_cells: 8 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what, value: f64| Err(Error::DomainError { what, value });
        if self.grid_theta < 2 {
            return bad("grid_theta", self.grid_theta as f64);
        }
        if self.grid_phi < 2 {
            return bad("grid_phi", self.grid_phi as f64);
        }
        if self.refine_iters == 0 {
            return bad("refine_iters", 0.0);
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return bad("refine_tol", self.refine_tol);
        }
        if self.top_k_cells == 0 {
            return bad("top_k_cells", 0.0);
        }
        Ok(())
    }

    fn theta(&self, i: usize) -> f64 {
        PI * i as f64 / (self.grid_theta - 1) as f64
    }

    fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / (self.grid_phi - 1) as f64
    }
}

/// Success probability on the full grid, row-major over `theta`.
fn success_grid(s: &CanonicalState, cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
    let phis: Vec<PhiTrig> = (0..cfg.grid_phi).map(|j| PhiTrig::new(s.mu(), cfg.phi(j))).collect();
    (0..cfg.grid_theta)
        .into_par_iter()
        .map(|i| {
            let t = ThetaTrig::new(cfg.theta(i));
            phis.iter().map(|p| terms_at(s, &Angles::from_parts(&t, p)).success()).collect()
        })
        .collect()
}

/// Grid cells at least as good as all eight neighbours, with `phi`
/// wrapping. Rows at `theta = 0` and `theta = pi` are one physical point
/// each, adjacent to the whole neighbouring row.
fn local_maxima(grid: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let nt = grid.len();
    let np = grid[0].len();
    // columns 0 and np - 1 are the same physical point
    let cols = (np - 1).max(1);
    let row_max = |i: usize| grid[i][..cols].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    for i in 0..nt {
        if i == 0 || i == nt - 1 {
            let inner = if i == 0 { 1.min(nt - 1) } else { nt - 2 };
            if grid[i][0] >= row_max(inner) {
                out.push((i, 0));
            }
            continue;
        }
        for j in 0..cols {
            let v = grid[i][j];
            let mut is_max = true;
            'scan: for di in [-1i64, 0, 1] {
                let ii = (i as i64 + di) as usize;
                for dj in [-1i64, 0, 1] {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(cols as i64) as usize;
                    let w = if ii == 0 || ii == nt - 1 { grid[ii][0] } else { grid[ii][jj] };
                    if w > v {
                        is_max = false;
                        break 'scan;
                    }
                }
            }
            if is_max {
                out.push((i, j));
            }
        }
    }
    out
}

/// Index of the largest grid value, first in row-major order on ties.
fn argmax(grid: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 0);
    for (i, row) in grid.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > grid[best.0][best.1] {
                best = (i, j);
            }
        }
    }
    best
}

/// Maps an unconstrained simplex vertex into the domain: `theta` reflects at
/// 0 and pi, `phi` wraps with period 2 pi.
fn into_domain(x: [f64; 2]) -> MeasurementBasis {
    let mut t = x[0].rem_euclid(2.0 * PI);
    if t > PI {
        t = 2.0 * PI - t;
    }
    // phi is meaningless at the poles
    let phi = if t == 0.0 || t == PI { 0.0 } else { x[1] };
    MeasurementBasis::folded(t, phi)
}

/// Downhill simplex maximizing `f` from `start` with initial steps `step`.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    iters: usize,
    tol: f64,
) -> ([f64; 2], f64) {
    // minimize the negation
    let g = |x: [f64; 2]| -f(x);
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = simplex.map(g);
    let add = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..iters {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]).then(x.cmp(&y)));
        simplex = order.map(|k| simplex[k]);
        vals = order.map(|k| vals[k]);
        let diameter = simplex[1..]
            .iter()
            .map(|v| (v[0] - simplex[0][0]).abs().max((v[1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if vals[2] - vals[0] <= tol && diameter <= 1e-9 {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let reflected = add(centroid, simplex[2], -1.0);
        let fr = g(reflected);
        if fr < vals[0] {
            let expanded = add(centroid, simplex[2], -2.0);
            let fe = g(expanded);
            if fe < fr {
                simplex[2] = expanded;
                vals[2] = fe;
            } else {
                simplex[2] = reflected;
                vals[2] = fr;
            }
        } else if fr < vals[1] {
            simplex[2] = reflected;
            vals[2] = fr;
        } else {
            let (contracted, fc) = if fr < vals[2] {
                let c = add(centroid, simplex[2], -0.5);
                (c, g(c))
            } else {
                let c = add(centroid, simplex[2], 0.5);
                (c, g(c))
            };
            if fc < vals[2].min(fr) {
                simplex[2] = contracted;
                vals[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = add(simplex[0], simplex[k], 0.5);
                    vals[k] = g(simplex[k]);
                }
            }
        }
    }
    let mut best = 0;
    for k in 1..3 {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    (simplex[best], -vals[best])
}

/// Global maximum of the success probability by grid search and refinement.
pub fn pmax_numeric(s: &CanonicalState, cfg: &OptimizerConfig) -> Result<OptimumReport> {
    cfg.validate()?;
    let grid = success_grid(s, cfg);

    let mut starts = local_maxima(&grid);
    starts.sort_by(|a, b| grid[b.0][b.1].total_cmp(&grid[a.0][a.1]).then(a.cmp(b)));
    starts.truncate(cfg.top_k_cells);
    let (gi, gj) = argmax(&grid);
    if !starts.contains(&(gi, gj)) {
        starts.insert(0, (gi, gj));
    }
    let mut best = CandidatePoint { theta: cfg.theta(gi), phi: cfg.phi(gj), origin: CandidateOrigin::Search };
    let mut pmax = grid[gi][gj];

    let step = [PI / (cfg.grid_theta - 1) as f64, 2.0 * PI / (cfg.grid_phi - 1) as f64];
    let objective = |x: [f64; 2]| {
        let b = into_domain(x);
        crate::objective::success_probability(s, &b)
    };
    let refined: Vec<([f64; 2], f64)> = starts
        .par_iter()
        .map(|&(i, j)| nelder_mead(objective, [cfg.theta(i), cfg.phi(j)], step, cfg.refine_iters, cfg.refine_tol))
        .collect();
    for (x, v) in refined {
        if v > pmax {
            let b = into_domain(x);
            pmax = v;
            best = CandidatePoint { theta: b.theta, phi: b.phi, origin: CandidateOrigin::Search };
        }
    }

    Ok(OptimumReport {
        pmax,
        best_points: vec![best],
        case: s.case(DEFAULT_ZERO_TOL),
        method: Method::Numeric,
        closed_form_pmax: None,
        diagnostics: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub grid_theta: usize,
    pub grid_phi: usize,
    /// `(theta, phi, f)` triples, row-major over `theta`.
    pub samples: Vec<(f64, f64, f64)>,
}

impl Landscape {
    pub fn at(&self, i: usize, j: usize) -> (f64, f64, f64) {
        self.samples[i * self.grid_phi + j]
    }
}

/// The objective `sqrt(P) + sqrt(Q)` sampled on the configured grid.
pub fn objective_landscape(s: &CanonicalState, cfg: &OptimizerConfig) -> Result<Landscape> {
    cfg.validate()?;
    let phis: Vec<(f64, PhiTrig)> = (0..cfg.grid_phi).map(|j| (cfg.phi(j), PhiTrig::new(s.mu(), cfg.phi(j)))).collect();
    let rows: Vec<Vec<(f64, f64, f64)>> = (0..cfg.grid_theta)
        .into_par_iter()
        .map(|i| {
            let theta = cfg.theta(i);
            let t = ThetaTrig::new(theta);
            phis.iter().map(|(phi, p)| (theta, *phi, terms_at(s, &Angles::from_parts(&t, p)).objective())).collect()
        })
        .collect();
    Ok(Landscape { grid_theta: cfg.grid_theta, grid_phi: cfg.grid_phi, samples: rows.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::success_probability;
    use crate::state::{random_state, CaseLabel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn small() -> OptimizerConfig {
        OptimizerConfig { grid_theta: 91, grid_phi: 181, ..Default::default() }
    }

    #[test]
    fn ghz_reaches_one() {
        let s = CanonicalState::new([S, 0.0, 0.0, 0.0, S], 0.0).unwrap();
        let r = pmax_numeric(&s, &small()).unwrap();
        assert!((r.pmax - 1.0).abs() < 1e-9);
        assert_eq!(r.method, Method::Numeric);
    }

    #[test]
    fn c_state_closed_form() {
        let s = CanonicalState::new([0.3f64.sqrt(), 0.0, 0.0, 0.4f64.sqrt(), 0.3f64.sqrt()], 0.0).unwrap();
        let r = pmax_numeric(&s, &small()).unwrap();
        assert!((r.pmax - 0.2).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.grid_theta = 1;
        assert!(c.validate().is_err());
        c = OptimizerConfig { refine_tol: 0.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn ghz_landscape() {
        let s = CanonicalState::new([S, 0.0, 0.0, 0.0, S], 0.0).unwrap();
        let cfg = OptimizerConfig { grid_theta: 3, grid_phi: 3, ..Default::default() };
        let l = objective_landscape(&s, &cfg).unwrap();
        assert_eq!(l.samples.len(), 9);
        // a computational-basis measurement leaves a product state
        assert!((l.at(0, 0).2 - 1.0).abs() < 1e-15);
        assert!((l.at(2, 0).2 - 1.0).abs() < 1e-15);
        assert!(l.at(1, 0).2.abs() < 1e-15);
    }

    #[test]
    fn landscape_range_and_periodicity() {
        let cfg = OptimizerConfig { grid_theta: 31, grid_phi: 61, ..Default::default() };
        for seed in 0..10 {
            let s = random_state(seed, None);
            let l = objective_landscape(&s, &cfg).unwrap();
            for i in 0..cfg.grid_theta {
                assert!((l.at(i, 0).2 - l.at(i, cfg.grid_phi - 1).2).abs() <= 1e-12);
            }
            assert!(l.samples.iter().all(|x| (0.0..=1.0).contains(&x.2)));
        }
    }

    #[test]
    fn dominates_random_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..5 {
            let s = random_state(seed, Some(CaseLabel::GeneralFull));
            let r = pmax_numeric(&s, &small()).unwrap();
            for _ in 0..1000 {
                let b = MeasurementBasis::new(rng.random_range(0.0..=PI), rng.random_range(0.0..=2.0 * PI)).unwrap();
                assert!(r.pmax >= success_probability(&s, &b) - 1e-9);
            }
        }
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let s = random_state(5, Some(CaseLabel::GeneralFull));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| pmax_numeric(&s, &small()).unwrap());
        let b = four.install(|| pmax_numeric(&s, &small()).unwrap());
        assert_eq!(a, b);
    }
}
