//! Separation of non-local no-signaling vertices from the theta body.
//!
//! A box `P` lies in `TH(G)` iff `<P|M|P> - sum_i M_ii P_i <= 0` for every
//! PSD matrix `M` supported on the diagonal and the edges of `G`. At a vertex,
//! `M~ = A~^T A~` (tight positivity indicators plus clique outer products)
//! attains 0; lowering one diagonal entry at a fractional coordinate `j` by
//! `eps <= lambda_min(M~)` keeps the matrix PSD and yields the strictly
//! positive value `eps P_j (1 - P_j)`.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::boxes::BellBox;
use crate::eigen::{min_eigenvalue as sym_min_eigenvalue, SymMatrix};
use crate::error::{Error, Result};
use crate::exact::{psd_check, PsdCheck, RationalMatrix};
use crate::orthograph::{build_orthogonality_graph, OrthoGraph};
use crate::polytope::vertex::certify_vertex;
use crate::rational::{floor_decimal, format_rational, int, one, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Positivity indicators on `positivity` plus one outer product per clique.
    Mtilde { positivity: Vec<usize>, cliques: usize },
    /// `base - epsilon I_(j,j)`.
    Perturbed { j: usize, epsilon: String },
    Supplied,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Exact(RationalMatrix),
    Float(SymMatrix),
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessMatrix {
    pub entries: Entries,
    pub provenance: Provenance,
}

impl WitnessMatrix {
    pub fn exact(rows: RationalMatrix) -> Self {
        Self { entries: Entries::Exact(rows), provenance: Provenance::Supplied }
    }

    pub fn float(m: SymMatrix) -> Self {
        Self { entries: Entries::Float(m), provenance: Provenance::Supplied }
    }

    pub fn size(&self) -> usize {
        match &self.entries {
            Entries::Exact(m) => m.len(),
            Entries::Float(m) => m.size(),
        }
    }

    pub fn as_exact(&self) -> Option<&RationalMatrix> {
        match &self.entries {
            Entries::Exact(m) => Some(m),
            Entries::Float(_) => None,
        }
    }

    pub fn to_float(&self) -> SymMatrix {
        match &self.entries {
            Entries::Exact(m) => SymMatrix::from_fn(m.len(), |i, j| to_f64(&m[i][j])),
            Entries::Float(m) => m.clone(),
        }
    }

    /// Upper-triangle non-zero triplets `(u, v, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, String)> {
        let n = self.size();
        let mut out = Vec::new();
        for u in 0..n {
            for v in u..n {
                match &self.entries {
                    Entries::Exact(m) if !m[u][v].is_zero() => out.push((u, v, format_rational(&m[u][v]))),
                    Entries::Float(m) if m.get(u, v) != 0.0 => out.push((u, v, format!("{:e}", m.get(u, v)))),
                    _ => {}
                }
            }
        }
        out
    }
}

/// `<P|M|P> - sum_i M_ii P_i`, exactly.
pub fn fujie_tamura_value(m: &WitnessMatrix, b: &BellBox) -> Result<Rational> {
    let p = b.entries();
    if m.size() != p.len() {
        return Err(Error::Dimension { expected: p.len(), found: m.size() });
    }
    let rows = m.as_exact().ok_or_else(|| {
        Error::InvalidArgument("exact Fujie-Tamura value needs a rational matrix".into())
    })?;
    let mut total = Rational::zero();
    for (i, row) in rows.iter().enumerate() {
        if p[i].is_zero() {
            continue;
        }
        let mut acc = Rational::zero();
        for (mij, pj) in row.iter().zip(p) {
            if !mij.is_zero() && !pj.is_zero() {
                acc += mij * pj;
            }
        }
        total += &p[i] * (acc - &row[i]);
    }
    Ok(total)
}

/// Floating evaluation, usable for either representation.
pub fn fujie_tamura_value_f64(m: &WitnessMatrix, p: &[f64]) -> Result<f64> {
    if m.size() != p.len() {
        return Err(Error::Dimension { expected: p.len(), found: m.size() });
    }
    let f = m.to_float();
    let n = p.len();
    Ok((0..n)
        .map(|i| p[i] * ((0..n).map(|j| f.get(i, j) * p[j]).sum::<f64>() - f.get(i, i)))
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub symmetric: bool,
    /// First `(u, v)` with `u != v`, not an edge, and `M_uv != 0`.
    pub off_pattern: Option<(usize, usize)>,
    pub psd: bool,
    /// `"exact"` or `"float"`.
    pub psd_method: &'static str,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.symmetric && self.off_pattern.is_none() && self.psd
    }
}

pub fn check_m_membership(m: &WitnessMatrix, g: &OrthoGraph, tol: f64) -> Result<MembershipReport> {
    let n = g.vertex_count();
    if m.size() != n {
        return Err(Error::Dimension { expected: n, found: m.size() });
    }
    let report = match &m.entries {
        Entries::Exact(rows) => {
            let nonzero = |u: usize, v: usize| !rows[u][v].is_zero();
            MembershipReport {
                symmetric: crate::exact::is_symmetric(rows),
                off_pattern: first_off_pattern(n, g, nonzero),
                psd: psd_check(rows).is_psd(),
                psd_method: "exact",
            }
        }
        Entries::Float(f) => MembershipReport {
            symmetric: f.is_symmetric(tol),
            off_pattern: first_off_pattern(n, g, |u, v| f.get(u, v) != 0.0),
            psd: sym_min_eigenvalue(f)? >= -tol,
            psd_method: "float",
        },
    };
    Ok(report)
}

fn first_off_pattern(n: usize, g: &OrthoGraph, nonzero: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
    (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .find(|&(u, v)| u != v && !g.is_edge(u, v) && nonzero(u, v))
}

/// `M~ = sum_{P_i = 0} e_i e_i^T + sum_c j_c j_c^T` over all normalization
/// and no-signaling cliques of `g`.
pub fn build_mtilde(b: &BellBox, g: &OrthoGraph) -> Result<WitnessMatrix> {
    if b.scenario() != g.scenario() {
        return Err(Error::ScenarioMismatch("box and graph scenarios differ".into()));
    }
    let cert = certify_vertex(b)?;
    if !cert.is_vertex {
        return Err(Error::NotAVertex { rank: cert.rank, required: cert.required_rank });
    }
    let n = b.len();
    let mut m = vec![vec![Rational::zero(); n]; n];
    let positivity: Vec<usize> = (0..n).filter(|&i| b.entries()[i].is_zero()).collect();
    for &i in &positivity {
        m[i][i] += one();
    }
    let mut cliques = 0;
    for c in g.cliques() {
        cliques += 1;
        for &u in &c.vertices {
            for &v in &c.vertices {
                m[u][v] += one();
            }
        }
    }
    Ok(WitnessMatrix { entries: Entries::Exact(m), provenance: Provenance::Mtilde { positivity, cliques } })
}

pub fn min_eigenvalue(m: &WitnessMatrix) -> Result<f64> {
    let f = m.to_float();
    if !f.is_symmetric(0.0) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    sym_min_eigenvalue(&f)
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub matrix: WitnessMatrix,
    pub j: usize,
    pub epsilon: Rational,
    pub violation: Rational,
    /// Floating smallest eigenvalue of `M~`; `epsilon` never exceeds it.
    pub lambda_min: f64,
}

impl Witness {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "j": self.j,
            "epsilon": format_rational(&self.epsilon),
            "violation": format_rational(&self.violation),
            "lambda_min": self.lambda_min,
            "size": self.matrix.size(),
            "provenance": self.matrix.provenance,
            "matrix": self.matrix.triplets(),
        })
    }
}

const EPSILON_DIGITS: u32 = 12;
const EPSILON_MARGIN: f64 = 1e-9;

/// Witness `M' = M~ - eps I_(j,j)` for a non-local vertex `b`.
pub fn build_witness(b: &BellBox) -> Result<Witness> {
    let g = build_orthogonality_graph(b.scenario());
    let mtilde = build_mtilde(b, &g)?;
    let j = b.first_fractional().ok_or(Error::NoSeparation)?;
    let base = mtilde.as_exact().expect("M~ is exact").clone();
    let lambda_min = min_eigenvalue(&mtilde)?;
    let mut epsilon = floor_decimal(lambda_min - EPSILON_MARGIN, EPSILON_DIGITS)?;
    if !epsilon.is_positive() {
        return Err(Error::Numerical(format!("M~ is not numerically positive definite (lambda_min = {lambda_min:e})")));
    }
    let mut perturbed;
    let mut attempts = 0;
    loop {
        perturbed = base.clone();
        perturbed[j][j] -= &epsilon;
        if psd_check(&perturbed).is_psd() {
            break;
        }
        attempts += 1;
        if attempts > 64 {
            return Err(Error::Numerical("could not certify a positive epsilon".into()));
        }
        epsilon /= int(2);
    }
    let p_j = &b.entries()[j];
    let violation = &epsilon * p_j * (one() - p_j);
    let matrix = WitnessMatrix {
        entries: Entries::Exact(perturbed),
        provenance: Provenance::Perturbed { j, epsilon: format_rational(&epsilon) },
    };
    if fujie_tamura_value(&matrix, b)? != violation {
        return Err(Error::Consistency("witness value differs from eps P_j (1 - P_j)".into()));
    }
    if !check_m_membership(&matrix, &g, 0.0)?.is_member() {
        return Err(Error::Consistency("perturbed matrix left the cone".into()));
    }
    Ok(Witness { matrix, j, epsilon, violation, lambda_min })
}

/// Whether `M~ - t I` is exactly PSD, i.e. `t <= lambda_min(M~)`.
pub fn shifted_is_psd(m: &RationalMatrix, t: &Rational) -> PsdCheck {
    let mut shifted = m.clone();
    for (i, row) in shifted.iter_mut().enumerate() {
        row[i] -= t;
    }
    psd_check(&shifted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{deterministic_box, deterministic_strategies, noisy_box, pr_box, r};
    use crate::exact::gram;
    use crate::polytope::constraints::clique_form_rows;
    use crate::scenario::BellScenario;

    #[test]
    fn mtilde_equals_gram_of_clique_rows() {
        for (n, k) in [(2, 2), (2, 3), (3, 2)] {
            let pr = pr_box(n, k).unwrap();
            let g = build_orthogonality_graph(pr.scenario());
            let m = build_mtilde(&pr, &g).unwrap();
            let s = pr.scenario();
            let d = s.event_count();
            let mut rows: Vec<Vec<Rational>> = (0..d)
                .filter(|&i| pr.entries()[i].is_zero())
                .map(|i| (0..d).map(|c| if c == i { int(-1) } else { int(0) }).collect())
                .collect();
            rows.extend(clique_form_rows(s).into_iter().map(|r| r.coefficients));
            assert_eq!(m.as_exact().unwrap(), &gram(&rows, d), "pr_box({n},{k})");
        }
    }

    #[test]
    fn mtilde_entries_count_cliques() {
        let pr = pr_box(2, 2).unwrap();
        let g = build_orthogonality_graph(pr.scenario());
        let m = build_mtilde(&pr, &g).unwrap();
        let rows = m.as_exact().unwrap();
        let shared = |u: usize, v: usize| g.cliques().filter(|c| c.vertices.contains(&u) && c.vertices.contains(&v)).count();
        for u in 0..16 {
            let pos = usize::from(pr.entries()[u].is_zero());
            assert_eq!(rows[u][u], int((pos + shared(u, u)) as i64));
            for v in 0..16 {
                if u != v {
                    assert_eq!(rows[u][v], int(shared(u, v) as i64));
                    if !rows[u][v].is_zero() {
                        assert!(g.is_edge(u, v));
                    }
                }
            }
        }
        // (00|00): one normalization clique, and per party one NS clique
        // where it sits on the free-output side of input 0.
        assert_eq!(rows[0][0], int(3));
        assert!(check_m_membership(&m, &g, 0.0).unwrap().is_member());
        assert_eq!(fujie_tamura_value(&m, &pr).unwrap(), int(0));
    }

    #[test]
    fn lambda_min_bracketed_exactly() {
        for (n, k) in [(2, 2), (2, 3), (3, 2)] {
            let pr = pr_box(n, k).unwrap();
            let g = build_orthogonality_graph(pr.scenario());
            let m = build_mtilde(&pr, &g).unwrap();
            let lambda = min_eigenvalue(&m).unwrap();
            let exact = m.as_exact().unwrap();
            let below = floor_decimal(lambda - 1e-10, 12).unwrap();
            let above = &below + r(2, 10_000_000_000);
            assert!(shifted_is_psd(exact, &below).is_pd(), "pr_box({n},{k})");
            assert!(!shifted_is_psd(exact, &above).is_psd(), "pr_box({n},{k})");
        }
    }

    #[test]
    fn pr_witness_violations() {
        let w = build_witness(&pr_box(2, 2).unwrap()).unwrap();
        assert_eq!(w.j, 0);
        assert_eq!(w.violation, &w.epsilon * r(1, 4));
        assert!(w.epsilon.is_positive());
        assert!(to_f64(&w.epsilon) <= w.lambda_min);

        let w3 = build_witness(&pr_box(2, 3).unwrap()).unwrap();
        assert_eq!(w3.violation, &w3.epsilon * r(2, 9));
    }

    #[test]
    fn witness_is_sound_on_deterministic_boxes() {
        for (n, k) in [(2, 2), (2, 3), (3, 2)] {
            let pr = pr_box(n, k).unwrap();
            let w = build_witness(&pr).unwrap();
            let s = pr.scenario();
            for st in deterministic_strategies(s) {
                let d = deterministic_box(s, &st).unwrap();
                assert!(!fujie_tamura_value(&w.matrix, &d).unwrap().is_positive());
            }
        }
    }

    #[test]
    fn errors() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let st = &deterministic_strategies(&s)[5];
        let d = deterministic_box(&s, st).unwrap();
        assert!(matches!(build_witness(&d), Err(Error::NoSeparation)));
        assert!(matches!(build_witness(&noisy_box(2, 2).unwrap()), Err(Error::NotAVertex { .. })));
    }

    #[test]
    fn deterministic_mtilde_is_positive_definite() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let g = build_orthogonality_graph(&s);
        let d = deterministic_box(&s, &deterministic_strategies(&s)[9]).unwrap();
        let m = build_mtilde(&d, &g).unwrap();
        assert!(psd_check(m.as_exact().unwrap()).is_pd());
    }

    #[test]
    fn membership_rejects_off_pattern_and_indefinite() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let g = build_orthogonality_graph(&s);
        let mut m = vec![vec![int(0); 16]; 16];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = int(1);
        }
        let u = s.index_of(&[0, 0], &[0, 0]);
        let v = s.index_of(&[0, 0], &[1, 1]);
        m[u][v] = r(1, 2);
        m[v][u] = r(1, 2);
        let report = check_m_membership(&WitnessMatrix::exact(m.clone()), &g, 0.0).unwrap();
        assert_eq!(report.off_pattern, Some((u.min(v), u.max(v))));
        assert!(report.psd);

        m[u][v] = int(0);
        m[v][u] = int(0);
        m[3][3] = int(-1);
        assert!(!check_m_membership(&WitnessMatrix::exact(m), &g, 0.0).unwrap().psd);
        let id = WitnessMatrix::float(SymMatrix::identity(16));
        assert!(check_m_membership(&id, &g, 1e-12).unwrap().is_member());
    }

    #[test]
    fn min_eigenvalue_small() {
        let id = WitnessMatrix::float(SymMatrix::identity(3));
        assert!((min_eigenvalue(&id).unwrap() - 1.0).abs() < 1e-12);
        let diag = WitnessMatrix::exact(vec![vec![int(2), int(0)], vec![int(0), int(3)]]);
        assert!((min_eigenvalue(&diag).unwrap() - 2.0).abs() < 1e-12);
    }
}
