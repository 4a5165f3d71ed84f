//! Almost-quantum feasibility: does a box admit a Gram-type certificate `Pi`
//! with `Pi_ii = P_i`, `Pi_uv = 0` on edges of the orthogonality graph, and
//! `[[1, P^T], [P, Pi]]` positive semidefinite, with every normalization and
//! no-signaling clique saturated?
//!
//! The search works on the bordered matrix `X`. Every feasible `X` satisfies
//! `X w = 0` for `w = e_0 - sum_{i in c} e_{i+1}` (one per clique) and for
//! `w = e_{i+1}` when `P_i = 0`, so `X = B Y B^T` with `B` an orthonormal
//! basis of the common kernel. Dykstra's alternating projections then run on
//! `Y` between the affine constraint set and the PSD cone. Reports are
//! numerical: `Infeasible` means the residual stayed above tolerance, not a
//! proof.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::boxes::{deterministic_box, deterministic_strategies, mix, validate, BellBox};
use crate::eigen::{min_eigenvalue, symmetric_eigen, SymMatrix};
use crate::error::{Error, Result};
use crate::orthograph::{build_orthogonality_graph, clique_saturation, OrthoGraph};
use crate::rational::{to_f64, Rational};
use crate::scenario::BellScenario;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITERS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AqParams {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for AqParams {
    fn default() -> Self {
        Self { max_iters: DEFAULT_MAX_ITERS, tol: DEFAULT_TOL }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct GramResiduals {
    /// `max |Pi_uv|` over edges.
    pub edge_violation: f64,
    /// `max |Pi_ii - P_i|`.
    pub diagonal_violation: f64,
    /// `max(0, -lambda_min([[1, P^T], [P, Pi]]))`.
    pub psd_violation: f64,
    /// `max |sum_{i in c} P_i - 1|` over the clique family.
    pub clique_violation: f64,
}

impl GramResiduals {
    pub fn max(&self) -> f64 {
        self.edge_violation.max(self.diagonal_violation).max(self.psd_violation).max(self.clique_violation)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramCandidate {
    pub pi: SymMatrix,
    pub residuals: GramResiduals,
}

impl GramCandidate {
    /// Dense lower triangle, 17 significant digits.
    pub fn pi_lower_triangle(&self) -> Vec<Vec<String>> {
        (0..self.pi.size()).map(|i| (0..=i).map(|j| format!("{:.16e}", self.pi.get(i, j))).collect()).collect()
    }
}

pub fn verify_gram_certificate(p: &[f64], g: &OrthoGraph, pi: &SymMatrix) -> Result<GramResiduals> {
    let n = g.vertex_count();
    if p.len() != n {
        return Err(Error::Dimension { expected: n, found: p.len() });
    }
    if pi.size() != n {
        return Err(Error::Dimension { expected: n, found: pi.size() });
    }
    let edge_violation = g.edges().iter().map(|&(u, v)| pi.get(u, v).abs().max(pi.get(v, u).abs())).fold(0.0, f64::max);
    let diagonal_violation = (0..n).map(|i| (pi.get(i, i) - p[i]).abs()).fold(0.0, f64::max);
    let bordered = SymMatrix::from_fn(n + 1, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (0, j) => p[j - 1],
        (i, 0) => p[i - 1],
        (i, j) => 0.5 * (pi.get(i - 1, j - 1) + pi.get(j - 1, i - 1)),
    });
    let psd_violation = (-min_eigenvalue(&bordered)?).max(0.0);
    let clique_violation = g
        .cliques()
        .map(|c| (c.vertices.iter().map(|&i| p[i]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(GramResiduals { edge_violation, diagonal_violation, psd_violation, clique_violation })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dykstra,
    /// Plain alternating projections, used once Dykstra's residual rises.
    Alternating,
}

#[derive(Clone, Debug)]
pub enum AqOutcome {
    Feasible(GramCandidate),
    Infeasible { residual_floor: f64 },
}

#[derive(Clone, Debug)]
pub struct AqReport {
    pub outcome: AqOutcome,
    pub iterations: usize,
    /// Best combined residual `||z - y|| + least-squares floor`.
    pub residual: f64,
    /// Distance from the constraint values to the reachable affine set
    /// within the face; positive means the affine set is empty there.
    pub ls_residual: f64,
    pub face_dimension: usize,
    pub method: Method,
    pub fallback_at: Option<usize>,
    /// Unsaturated clique found before iterating, if any.
    pub precheck_failure: Option<String>,
    pub params: AqParams,
    pub threads: usize,
}

impl AqReport {
    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, AqOutcome::Feasible(_))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "status": if self.is_feasible() { "feasible" } else { "infeasible" },
            "iterations": self.iterations,
            "residual": format!("{:.16e}", self.residual),
            "ls_residual": format!("{:.16e}", self.ls_residual),
            "face_dimension": self.face_dimension,
            "method": self.method,
            "fallback_at": self.fallback_at,
            "precheck_failure": self.precheck_failure,
            "tol": self.params.tol,
            "max_iters": self.params.max_iters,
            "threads": self.threads,
        });
        if let AqOutcome::Feasible(c) = &self.outcome {
            v["residuals"] = serde_json::to_value(c.residuals).expect("plain struct");
            v["pi_lower"] = serde_json::to_value(c.pi_lower_triangle()).expect("strings");
        }
        v
    }
}

/// Symmetric `d x d` matrices as vectors of length `d(d+1)/2`; off-diagonal
/// coordinates carry a factor `sqrt 2` so the Euclidean norm is Frobenius.
struct HalfVec {
    d: usize,
    index: Vec<(usize, usize)>,
}

impl HalfVec {
    fn new(d: usize) -> Self {
        let index = (0..d).flat_map(|p| (p..d).map(move |q| (p, q))).collect();
        Self { d, index }
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    fn to_vec(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.index.iter().map(|&(p, q)| if p == q { m[(p, p)] } else { m[(p, q)] * std::f64::consts::SQRT_2 }),
        )
    }

    fn to_mat(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.d, self.d);
        for (k, &(p, q)) in self.index.iter().enumerate() {
            if p == q {
                m[(p, p)] = y[k];
            } else {
                let v = y[k] / std::f64::consts::SQRT_2;
                m[(p, q)] = v;
                m[(q, p)] = v;
            }
        }
        m
    }

    fn project_psd(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.to_mat(y);
        let sym = SymMatrix::from_fn(self.d, |i, j| m[(i, j)]);
        let eig = symmetric_eigen(&sym)?;
        let clipped = eig.reconstruct(|l| l.max(0.0));
        Ok(self.to_vec(&DMatrix::from_fn(self.d, self.d, |i, j| clipped.get(i, j))))
    }
}

struct Problem {
    basis: DMatrix<f64>,
    half: HalfVec,
    a: DMatrix<f64>,
    b: DVector<f64>,
    a_pinv: DMatrix<f64>,
}

const KERNEL_TOL: f64 = 1e-9;
const PINV_TOL: f64 = 1e-10;

fn setup(p: &[f64], g: &OrthoGraph) -> Result<Problem> {
    let n = p.len();
    let mut w: Vec<DVector<f64>> = Vec::new();
    for c in g.cliques() {
        let mut v = DVector::zeros(n + 1);
        v[0] = 1.0;
        for &i in &c.vertices {
            v[i + 1] = -1.0;
        }
        w.push(v);
    }
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            let mut v = DVector::zeros(n + 1);
            v[i + 1] = 1.0;
            w.push(v);
        }
    }
    let mut wwt = SymMatrix::zeros(n + 1);
    for v in &w {
        for i in 0..=n {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..=n {
                if v[j] != 0.0 {
                    wwt.set(i, j, wwt.get(i, j) + v[i] * v[j]);
                }
            }
        }
    }
    let eig = symmetric_eigen(&wwt)?;
    let scale = eig.values.last().copied().unwrap_or(0.0).max(1.0);
    let kernel: Vec<usize> = (0..=n).filter(|&k| eig.values[k] <= KERNEL_TOL * scale).collect();
    let basis = DMatrix::from_fn(n + 1, kernel.len(), |i, c| eig.vectors.get(i, kernel[c]));
    let d = kernel.len();
    let half = HalfVec::new(d);

    let mut constraints: Vec<(usize, usize, f64)> = vec![(0, 0, 1.0)];
    constraints.extend((0..n).map(|i| (0, i + 1, p[i])));
    constraints.extend((0..n).map(|i| (i + 1, i + 1, p[i])));
    constraints.extend(g.edges().into_iter().map(|(u, v)| (u + 1, v + 1, 0.0)));
    let mut a = DMatrix::zeros(constraints.len(), half.len());
    for (r, &(i, j, _)) in constraints.iter().enumerate() {
        for (k, &(pp, q)) in half.index.iter().enumerate() {
            a[(r, k)] = if pp == q {
                basis[(i, pp)] * basis[(j, pp)]
            } else {
                (basis[(i, pp)] * basis[(j, q)] + basis[(i, q)] * basis[(j, pp)]) / std::f64::consts::SQRT_2
            };
        }
    }
    let b = DVector::from_iterator(constraints.len(), constraints.iter().map(|c| c.2));
    let a_pinv = a.clone().pseudo_inverse(PINV_TOL).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(Problem { basis, half, a, b, a_pinv })
}

impl Problem {
    fn project_affine(&self, z: &DVector<f64>) -> DVector<f64> {
        z - &self.a_pinv * (&self.a * z - &self.b)
    }

    fn pi_from(&self, y: &DVector<f64>) -> SymMatrix {
        let x = &self.basis * self.half.to_mat(y) * self.basis.transpose();
        let n = x.nrows() - 1;
        SymMatrix::from_fn(n, |i, j| 0.5 * (x[(i + 1, j + 1)] + x[(j + 1, i + 1)]))
    }
}

const MONOTONE_SLACK: f64 = 1e-12;

pub fn dykstra_membership(b: &BellBox, g: &OrthoGraph, params: &AqParams) -> Result<AqReport> {
    if b.scenario() != g.scenario() {
        return Err(Error::ScenarioMismatch("box and graph scenarios differ".into()));
    }
    if params.tol.is_nan() || params.tol <= 0.0 || params.max_iters == 0 {
        return Err(Error::InvalidArgument("tol and max_iters must be positive".into()));
    }
    let mut report = AqReport {
        outcome: AqOutcome::Infeasible { residual_floor: f64::INFINITY },
        iterations: 0,
        residual: f64::INFINITY,
        ls_residual: 0.0,
        face_dimension: 0,
        method: Method::Dykstra,
        fallback_at: None,
        precheck_failure: None,
        params: *params,
        threads: 1,
    };
    let saturation = clique_saturation(b, g)?;
    if let Some(c) = saturation.cliques.iter().find(|c| !c.saturated) {
        report.precheck_failure = Some(serde_json::to_string(&c.tag)?);
        let floor = to_f64(&saturation.max_deviation());
        report.residual = floor;
        report.outcome = AqOutcome::Infeasible { residual_floor: floor };
        return Ok(report);
    }
    validate(b).into_result()?;

    let p = b.to_f64_vec();
    let prob = setup(&p, g)?;
    report.face_dimension = prob.half.d;
    if prob.half.d == 0 {
        report.ls_residual = 1.0;
        report.residual = 1.0;
        report.outcome = AqOutcome::Infeasible { residual_floor: 1.0 };
        return Ok(report);
    }
    let mut y = &prob.a_pinv * &prob.b;
    let ls = (&prob.a * &y - &prob.b).norm();
    report.ls_residual = ls;
    if ls > params.tol {
        report.residual = ls;
        report.outcome = AqOutcome::Infeasible { residual_floor: ls };
        return Ok(report);
    }

    let mut q = DVector::zeros(y.len());
    let mut previous = f64::INFINITY;
    for it in 1..=params.max_iters {
        let z = match report.method {
            Method::Dykstra => {
                let z = prob.half.project_psd(&(&y + &q))?;
                q = &y + &q - &z;
                z
            }
            Method::Alternating => prob.half.project_psd(&y)?,
        };
        y = prob.project_affine(&z);
        let r = (&z - &y).norm() + ls;
        if !r.is_finite() {
            return Err(Error::Numerical(format!("residual became {r} at iteration {it}")));
        }
        report.iterations = it;
        if r > previous * (1.0 + MONOTONE_SLACK) + f64::EPSILON && report.method == Method::Dykstra {
            log::debug!("dykstra residual rose at iteration {it}: {previous:e} -> {r:e}; switching");
            report.method = Method::Alternating;
            report.fallback_at = Some(it);
        }
        previous = r;
        report.residual = report.residual.min(r);
        if r <= params.tol {
            let pi = prob.pi_from(&z);
            let residuals = verify_gram_certificate(&p, g, &pi)?;
            if residuals.passes(params.tol) {
                report.outcome = AqOutcome::Feasible(GramCandidate { pi, residuals });
                return Ok(report);
            }
        }
    }
    report.outcome = AqOutcome::Infeasible { residual_floor: report.residual };
    Ok(report)
}

/// Box given exactly when its entries are rational, always in floating point.
#[derive(Clone, Debug)]
pub struct FixtureBox {
    pub scenario: BellScenario,
    pub exact: Option<BellBox>,
    pub approx: Vec<f64>,
}

impl FixtureBox {
    pub fn is_approximate(&self) -> bool {
        self.exact.is_none()
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.exact {
            Some(b) => serde_json::json!({
                "approximate": false,
                "box": serde_json::from_str::<serde_json::Value>(&b.to_json()).expect("box JSON"),
            }),
            None => serde_json::json!({
                "approximate": true,
                "scenario": {
                    "parties": self.scenario.parties(),
                    "inputs": self.scenario.inputs(),
                    "outputs": self.scenario.outputs(),
                },
                "entries": self.approx.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fixture {
    Deterministic { scenario: BellScenario, id: usize },
    /// Maximally entangled two-qubit state with optimal CHSH measurements.
    TsirelsonChsh,
    /// Convex combination of deterministic boxes (strategy id, weight).
    ClassicalMixture { scenario: BellScenario, weights: Vec<(usize, Rational)> },
}

impl Fixture {
    /// `deterministic:<id>`, `tsirelson_chsh` or `classical_mixture:uniform`,
    /// the first and last over the (2,2,2) scenario.
    pub fn by_name(name: &str) -> Result<Self> {
        let s222 = || BellScenario::uniform(2, 2, 2);
        if name == "tsirelson_chsh" {
            return Ok(Fixture::TsirelsonChsh);
        }
        if name == "classical_mixture:uniform" {
            let s = s222()?;
            let count = deterministic_strategies(&s).len();
            let w = Rational::new(1.into(), (count as i64).into());
            return Ok(Fixture::ClassicalMixture { scenario: s, weights: (0..count).map(|i| (i, w.clone())).collect() });
        }
        if let Some(id) = name.strip_prefix("deterministic:") {
            let id = id.parse().map_err(|_| Error::InvalidArgument(format!("bad strategy id in {name:?}")))?;
            return Ok(Fixture::Deterministic { scenario: s222()?, id });
        }
        Err(Error::InvalidArgument(format!("unknown fixture {name:?}")))
    }
}

fn rank_one(p: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(p.len(), |i, j| p[i] * p[j])
}

pub fn quantum_gram_fixture(fixture: &Fixture) -> Result<(FixtureBox, GramCandidate)> {
    let (scenario, exact, approx, pi) = match fixture {
        Fixture::Deterministic { scenario, id } => {
            let strategies = deterministic_strategies(scenario);
            let st = strategies
                .get(*id)
                .ok_or_else(|| Error::InvalidArgument(format!("strategy id {id} out of range")))?;
            let d = deterministic_box(scenario, st)?;
            let p = d.to_f64_vec();
            let pi = rank_one(&p);
            (scenario.clone(), Some(d), p, pi)
        }
        Fixture::ClassicalMixture { scenario, weights } => {
            let strategies = deterministic_strategies(scenario);
            let mut boxes = Vec::with_capacity(weights.len());
            for (id, _) in weights {
                let st = strategies
                    .get(*id)
                    .ok_or_else(|| Error::InvalidArgument(format!("strategy id {id} out of range")))?;
                boxes.push(deterministic_box(scenario, st)?);
            }
            let refs: Vec<&BellBox> = boxes.iter().collect();
            let ws: Vec<Rational> = weights.iter().map(|(_, w)| w.clone()).collect();
            let m = mix(&refs, &ws)?;
            let n = scenario.event_count();
            let mut pi = SymMatrix::zeros(n);
            for (bx, w) in boxes.iter().zip(&ws) {
                let p = bx.to_f64_vec();
                let w = to_f64(w);
                for i in (0..n).filter(|&i| p[i] != 0.0) {
                    for j in (0..n).filter(|&j| p[j] != 0.0) {
                        pi.set(i, j, pi.get(i, j) + w * p[i] * p[j]);
                    }
                }
            }
            let p = m.to_f64_vec();
            (scenario.clone(), Some(m), p, pi)
        }
        Fixture::TsirelsonChsh => {
            let s = BellScenario::uniform(2, 2, 2)?;
            let vectors = tsirelson_vectors(&s);
            let n = s.event_count();
            let dot = |u: &[f64; 4], v: &[f64; 4]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let pi = SymMatrix::from_fn(n, |i, j| dot(&vectors[i], &vectors[j]));
            let p = (0..n).map(|i| dot(&vectors[i], &vectors[i])).collect();
            (s, None, p, pi)
        }
    };
    let g = build_orthogonality_graph(&scenario);
    let residuals = verify_gram_certificate(&approx, &g, &pi)?;
    let fb = FixtureBox { scenario, exact, approx };
    Ok((fb, GramCandidate { pi, residuals }))
}

/// `u_{ab|xy} = (E_a^x (x) F_b^y) psi` with `psi = (|00> + |11>)/sqrt 2`,
/// Alice measuring at angles 0 and pi/4, Bob at pi/8 and -pi/8.
fn tsirelson_vectors(s: &BellScenario) -> Vec<[f64; 4]> {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8};
    let alice = [0.0, FRAC_PI_4];
    let bob = [FRAC_PI_8, -FRAC_PI_8];
    let basis = |theta: f64, outcome: usize| -> [f64; 2] {
        if outcome == 0 {
            [theta.cos(), theta.sin()]
        } else {
            [-theta.sin(), theta.cos()]
        }
    };
    let psi = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    (0..s.event_count())
        .map(|idx| {
            let e = s.event_at(idx).expect("index in range");
            let (a, x) = (&e.outputs, &e.inputs);
            let ea = basis(alice[x[0]], a[0]);
            let fb = basis(bob[x[1]], a[1]);
            // <ea (x) fb | psi> (ea (x) fb)
            let amp = ea[0] * fb[0] * psi[0] + ea[0] * fb[1] * psi[1] + ea[1] * fb[0] * psi[2] + ea[1] * fb[1] * psi[3];
            [amp * ea[0] * fb[0], amp * ea[0] * fb[1], amp * ea[1] * fb[0], amp * ea[1] * fb[1]]
        })
        .collect()
}

/// `Pi` of a convex combination, for convexity checks.
pub fn combine(pis: &[&SymMatrix], weights: &[f64]) -> Result<SymMatrix> {
    let n = pis.first().map_or(0, |m| m.size());
    if pis.len() != weights.len() || pis.iter().any(|m| m.size() != n) {
        return Err(Error::InvalidArgument("mismatched certificate list".into()));
    }
    Ok(SymMatrix::from_fn(n, |i, j| pis.iter().zip(weights).map(|(m, w)| w * m.get(i, j)).sum()))
}
