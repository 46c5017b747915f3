//! Parameter families for `sweep`.
//!
//! Grammar: `CASE:param=value[,param=lo..hi/n]...` where `param` is one of
//! `a0sq`..`a4sq` (squared amplitudes) or `mu`. At most two parameters may
//! take more than one value. Nonzero amplitudes that are not given share the
//! remaining weight `1 - sum(given)` equally; for `PRODUCT` only `a0` does.

use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use ctq_core::state::{validate, CanonicalState, CaseLabel, Tolerances};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamName {
    /// Squared amplitude `a_i^2`.
    Square(usize),
    Mu,
}

impl ParamName {
    fn label(self) -> String {
        match self {
            ParamName::Square(i) => format!("a{i}sq"),
            ParamName::Mu => "mu".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: ParamName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub case: CaseLabel,
    pub params: Vec<Param>,
}

/// One member of a family together with its `params` column text.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub state: CanonicalState,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(format!("bad family spec: {}", msg.into()))
}

fn number(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| bad(format!("`{s}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(format!("`{s}` is not finite")))
    }
}

fn values(spec: &str) -> Result<Vec<f64>, CliError> {
    let Some((range, n)) = spec.split_once('/') else {
        if spec.contains("..") {
            return Err(bad(format!("range `{spec}` needs a point count, e.g. `{spec}/5`")));
        }
        return Ok(vec![number(spec)?]);
    };
    let (lo, hi) = range.split_once("..").ok_or_else(|| bad(format!("expected `lo..hi/n`, got `{spec}`")))?;
    let (lo, hi) = (number(lo)?, number(hi)?);
    let n: usize = n.trim().parse().map_err(|_| bad(format!("`{n}` is not a point count")))?;
    match n {
        0 => Err(bad("point count must be positive")),
        1 => Ok(vec![lo]),
        _ => {
            let m = (n - 1) as f64;
            // 13 significant digits keep labels like 0.3 free of lerp noise
            let tidy = |v: f64| format!("{v:.12e}").parse::<f64>().unwrap_or(v);
            Ok((0..n).map(|k| tidy(lo + (hi - lo) * k as f64 / m)).collect())
        }
    }
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (case, rest) = s.split_once(':').ok_or_else(|| bad("expected `CASE:param=...`"))?;
        let case = match case.trim().to_ascii_uppercase().as_str() {
            "C" => CaseLabel::C12,
            "D" => CaseLabel::BiseparableD24,
            "H" => CaseLabel::HA2Zero,
            other => other.parse().map_err(|e: String| bad(e))?,
        };
        let mut params: Vec<Param> = Vec::new();
        for item in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (name, spec) =
                item.split_once('=').ok_or_else(|| bad(format!("expected `param=...`, got `{item}`")))?;
            let name = match name.trim() {
                "mu" => ParamName::Mu,
                n => {
                    let idx = n
                        .strip_prefix('a')
                        .and_then(|t| t.strip_suffix("sq"))
                        .and_then(|t| t.parse::<usize>().ok())
                        .filter(|&i| i <= 4)
                        .ok_or_else(|| bad(format!("unknown parameter `{n}`")))?;
                    ParamName::Square(idx)
                }
            };
            if params.iter().any(|p| p.name == name) {
                return Err(bad(format!("parameter `{}` given twice", name.label())));
            }
            params.push(Param { name, values: values(spec)? });
        }
        if params.is_empty() {
            return Err(bad("no parameters"));
        }
        if params.iter().filter(|p| p.values.len() > 1).count() > 2 {
            return Err(bad("at most two parameters may vary"));
        }
        for p in &params {
            match p.name {
                ParamName::Square(i) => {
                    if case.forced_zeros().contains(&i) && p.values.iter().any(|&v| v != 0.0) {
                        return Err(bad(format!("a{i} vanishes in case {case}")));
                    }
                    if p.values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                        return Err(bad(format!("a{i}sq outside [0, 1]")));
                    }
                }
                ParamName::Mu => {
                    if matches!(case, CaseLabel::IMuZero | CaseLabel::JMuPi) {
                        return Err(bad(format!("mu is fixed in case {case}")));
                    }
                    if p.values.iter().any(|&v| !(0.0..=PI).contains(&v)) {
                        return Err(bad("mu outside [0, pi]"));
                    }
                }
            }
        }
        Ok(Family { case, params })
    }
}

fn default_mu(case: CaseLabel) -> f64 {
    match case {
        CaseLabel::JMuPi => PI,
        CaseLabel::GeneralFull => FRAC_PI_2,
        _ => 0.0,
    }
}

impl Family {
    /// Family members in row-major order over the parameters as written.
    pub fn members(&self, tol: &Tolerances) -> Result<Vec<Member>, CliError> {
        let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
        for p in &self.params {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    p.values.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        combos.iter().map(|c| self.member(c, tol)).collect()
    }

    fn member(&self, values: &[f64], tol: &Tolerances) -> Result<Member, CliError> {
        let mut sq = [f64::NAN; 5];
        let mut mu = default_mu(self.case);
        for (p, &v) in self.params.iter().zip(values) {
            match p.name {
                ParamName::Square(i) => sq[i] = v,
                ParamName::Mu => mu = v,
            }
        }
        for &z in self.case.forced_zeros() {
            if sq[z].is_nan() {
                sq[z] = 0.0;
            }
        }
        let free: Vec<usize> = if self.case == CaseLabel::DegenerateProduct {
            if sq[0].is_nan() {
                vec![0]
            } else {
                Vec::new()
            }
        } else {
            (0..5).filter(|&i| sq[i].is_nan()).collect()
        };
        let given: f64 = sq.iter().filter(|v| !v.is_nan()).sum();
        let rest = 1.0 - given;
        let label = self
            .params
            .iter()
            .zip(values)
            .map(|(p, v)| format!("{}={}", p.name.label(), crate::commands::fmt_number(*v)))
            .collect::<Vec<_>>()
            .join(";");
        if rest < -tol.norm_tol {
            return Err(bad(format!("squared amplitudes exceed 1 at {label}")));
        }
        if free.is_empty() && rest.abs() > tol.norm_tol {
            return Err(bad(format!("squared amplitudes sum to {given} at {label}")));
        }
        for &i in &free {
            sq[i] = rest.max(0.0) / free.len() as f64;
        }
        for v in sq.iter_mut().filter(|v| v.is_nan()) {
            *v = 0.0;
        }
        let state = validate(sq.map(f64::sqrt), mu, true, tol).map_err(|e| bad(format!("{e} at {label}")))?;
        Ok(Member { label, state })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn parses_one_parameter_slice() {
        let f: Family = "A:a0sq=0.1..0.9/9".parse().unwrap();
        assert_eq!(f.case, CaseLabel::GhzClass);
        let m = f.members(&tol()).unwrap();
        assert_eq!(m.len(), 9);
        assert!((m[0].state.a(4).powi(2) - 0.9).abs() < 1e-12);
        assert_eq!(m[0].label, "a0sq=0.1");
    }

    #[test]
    fn two_parameter_grid() {
        let f: Family = "C:a0sq=0.1..0.3/3,a4sq=0.2..0.4/2".parse().unwrap();
        let m = f.members(&tol()).unwrap();
        assert_eq!(m.len(), 6);
        assert_eq!(m[1].label, "a0sq=0.1;a4sq=0.4");
        assert!(m.iter().all(|x| x.state.case(1e-12) == CaseLabel::C12));
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            "A",
            "Z:a0sq=0.5",
            "A:a1sq=0.2",
            "A:a0sq=0.1..0.9",
            "A:a0sq=x",
            "I:mu=0.3",
            "GENERAL:a0sq=0.1..0.2/2,a1sq=0.1..0.2/2,a2sq=0.1..0.2/2",
            "A:a0sq=0.5,a0sq=0.4",
        ] {
            assert!(spec.parse::<Family>().is_err(), "{spec}");
        }
        let f: Family = "B:a0sq=0.7,a2sq=0.5".parse().unwrap();
        assert!(f.members(&tol()).is_err());
    }

    #[test]
    fn mu_defaults_follow_case() {
        let m = "J:a0sq=0.2".parse::<Family>().unwrap().members(&tol()).unwrap();
        assert_eq!(m[0].state.case(1e-12), CaseLabel::JMuPi);
        let m = "GENERAL:a0sq=0.2".parse::<Family>().unwrap().members(&tol()).unwrap();
        assert_eq!(m[0].state.case(1e-12), CaseLabel::GeneralFull);
        let m = "PRODUCT:a1sq=0.3".parse::<Family>().unwrap().members(&tol()).unwrap();
        assert_eq!(m[0].state.case(1e-12), CaseLabel::DegenerateProduct);
    }
}
