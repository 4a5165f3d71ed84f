//! Membership in the classical (local) polytope, the convex hull of the
//! deterministic boxes, decided by exact LP.

use num_traits::{One, Signed, Zero};

use crate::boxes::{deterministic_count, deterministic_strategies, validate, BellBox, Strategy};
use crate::error::{Error, Result};
use crate::polytope::simplex::{solve, Constraint, LinearProgram, LpOutcome, Sense};
use crate::rational::{format_rational, Rational};

pub const DEFAULT_DETERMINISTIC_CAP: u64 = 1_000_000;

#[derive(Clone, Copy, Debug)]
pub struct ClassicalOptions {
    /// Upper bound on the number of deterministic boxes enumerated.
    pub det_cap: u64,
}

impl Default for ClassicalOptions {
    fn default() -> Self {
        Self { det_cap: DEFAULT_DETERMINISTIC_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalityCertificate {
    /// Convex weights over deterministic strategies (ids index
    /// [`deterministic_strategies`]); only positive weights are listed.
    Decomposition { weights: Vec<(usize, Rational)> },
    /// Bell functional `beta` with `beta . P > max_D beta . D`. The LP keeps
    /// every coefficient in `[0, 1]`, so the gap is the best achievable
    /// violation among such functionals.
    Farkas {
        functional: Vec<Rational>,
        local_bound: Rational,
        box_value: Rational,
    },
}

impl LocalityCertificate {
    pub fn is_local(&self) -> bool {
        matches!(self, LocalityCertificate::Decomposition { .. })
    }

    /// `box_value - local_bound` for a Farkas certificate.
    pub fn gap(&self) -> Option<Rational> {
        match self {
            LocalityCertificate::Farkas { local_bound, box_value, .. } => Some(box_value - local_bound),
            LocalityCertificate::Decomposition { .. } => None,
        }
    }

    /// Exact re-check against the box and the full strategy list.
    pub fn verify(&self, b: &BellBox, strategies: &[Strategy]) -> bool {
        let s = b.scenario();
        match self {
            LocalityCertificate::Decomposition { weights } => {
                if weights.iter().any(|(id, w)| *id >= strategies.len() || w.is_negative()) {
                    return false;
                }
                if !weights.iter().map(|(_, w)| w).sum::<Rational>().is_one() {
                    return false;
                }
                let mut acc = vec![Rational::zero(); b.len()];
                for (id, w) in weights {
                    for idx in strategies[*id].support(s) {
                        acc[idx] += w;
                    }
                }
                acc == b.entries()
            }
            LocalityCertificate::Farkas { functional, local_bound, box_value } => {
                if functional.len() != b.len() {
                    return false;
                }
                let value: Rational = functional.iter().zip(b.entries()).map(|(f, p)| f * p).sum();
                let bound = strategies
                    .iter()
                    .map(|st| st.support(s).iter().map(|&i| functional[i].clone()).sum::<Rational>())
                    .max()
                    .unwrap_or_else(Rational::zero);
                value == *box_value && bound == *local_bound && value > bound
            }
        }
    }

    pub fn to_json(&self, strategies: &[Strategy]) -> serde_json::Value {
        match self {
            LocalityCertificate::Decomposition { weights } => serde_json::json!({
                "kind": "decomposition",
                "weights": weights.iter().map(|(id, w)| serde_json::json!({
                    "id": id,
                    "strategy": strategies[*id].outputs,
                    "weight": format_rational(w),
                })).collect::<Vec<_>>(),
            }),
            LocalityCertificate::Farkas { functional, local_bound, box_value } => serde_json::json!({
                "kind": "farkas",
                "functional": functional.iter().map(format_rational).collect::<Vec<_>>(),
                "local_bound": format_rational(local_bound),
                "box_value": format_rational(box_value),
                "gap": format_rational(&(box_value - local_bound)),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalReport {
    pub certificate: LocalityCertificate,
    pub strategies: Vec<Strategy>,
}

/// Decides whether `b` is a convex combination of deterministic boxes.
///
/// First a phase-I feasibility LP over the strategy weights; if infeasible, a
/// second LP maximizes `beta . P - t` subject to `beta . D <= t` for every
/// deterministic `D` and `0 <= beta <= 1`, which yields the separating
/// functional. Both certificates are re-verified exactly before returning.
pub fn classical_membership(b: &BellBox, options: &ClassicalOptions) -> Result<ClassicalReport> {
    validate(b).into_result()?;
    let s = b.scenario();
    let count = deterministic_count(s);
    if count.is_none_or(|c| c > u128::from(options.det_cap)) {
        return Err(Error::Capacity {
            what: "deterministic box",
            count: count.map_or_else(|| "overflow".to_string(), |c| c.to_string()),
            cap: options.det_cap,
        });
    }
    let strategies = deterministic_strategies(s);
    let supports: Vec<Vec<usize>> = strategies.iter().map(|st| st.support(s)).collect();
    let d = b.len();

    let mut constraints: Vec<Constraint> = (0..d)
        .map(|e| Constraint {
            coefficients: vec![Rational::zero(); strategies.len()],
            sense: Sense::Equal,
            rhs: b.entries()[e].clone(),
        })
        .collect();
    for (id, sup) in supports.iter().enumerate() {
        for &e in sup {
            constraints[e].coefficients[id] = Rational::one();
        }
    }
    constraints.push(Constraint {
        coefficients: vec![Rational::one(); strategies.len()],
        sense: Sense::Equal,
        rhs: Rational::one(),
    });
    let feasibility = LinearProgram { objective: vec![Rational::zero(); strategies.len()], constraints };

    let certificate = match solve(&feasibility) {
        LpOutcome::Optimal { x, .. } => LocalityCertificate::Decomposition {
            weights: x.into_iter().enumerate().filter(|(_, w)| !w.is_zero()).collect(),
        },
        LpOutcome::Infeasible => separating_functional(b, &supports)?,
        LpOutcome::Unbounded => {
            return Err(Error::Consistency("feasibility LP reported unbounded".into()));
        }
    };
    if !certificate.verify(b, &strategies) {
        return Err(Error::Consistency("locality certificate failed exact re-check".into()));
    }
    Ok(ClassicalReport { certificate, strategies })
}

fn separating_functional(b: &BellBox, supports: &[Vec<usize>]) -> Result<LocalityCertificate> {
    let d = b.len();
    // Variables: beta_0..beta_{d-1}, t.
    let mut objective: Vec<Rational> = b.entries().to_vec();
    objective.push(-Rational::one());
    let mut constraints = Vec::with_capacity(supports.len() + d);
    for sup in supports {
        let mut c = vec![Rational::zero(); d + 1];
        for &e in sup {
            c[e] = Rational::one();
        }
        c[d] = -Rational::one();
        constraints.push(Constraint { coefficients: c, sense: Sense::LessEq, rhs: Rational::zero() });
    }
    for e in 0..d {
        let mut c = vec![Rational::zero(); d + 1];
        c[e] = Rational::one();
        constraints.push(Constraint { coefficients: c, sense: Sense::LessEq, rhs: Rational::one() });
    }
    match solve(&LinearProgram { objective, constraints }) {
        LpOutcome::Optimal { mut x, value } if value.is_positive() => {
            x.truncate(d);
            let box_value: Rational = x.iter().zip(b.entries()).map(|(f, p)| f * p).sum();
            let local_bound = supports
                .iter()
                .map(|sup| sup.iter().map(|&e| x[e].clone()).sum::<Rational>())
                .max()
                .unwrap_or_else(Rational::zero);
            Ok(LocalityCertificate::Farkas { functional: x, local_bound, box_value })
        }
        other => Err(Error::Consistency(format!(
            "feasibility LP was infeasible but the separation LP returned {other:?}"
        ))),
    }
}
