//! Orthogonality graph of a Bell scenario: events are vertices, and two
//! events are adjacent when some party has the same input in both but
//! different outputs. The normalization and no-signaling equations appear as
//! saturated cliques of this graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::boxes::BellBox;
use crate::error::{Error, Result};
use crate::polytope::constraints::{clique_form_rows, RowTag};
use crate::rational::{format_rational, Rational};
use crate::scenario::BellScenario;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CliqueTag {
    /// All events with joint input `inputs`.
    Normalization { inputs: Vec<usize> },
    /// Events `(a_party free, others | inputs)` together with the events at
    /// `inputs[party] -> alt_input` whose other outputs differ from `others`.
    NoSignaling {
        party: usize,
        inputs: Vec<usize>,
        alt_input: usize,
        others: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clique {
    pub tag: CliqueTag,
    pub vertices: Vec<usize>,
}

impl Clique {
    /// Indicator vector of the clique over all events.
    pub fn indicator(&self, size: usize) -> Vec<bool> {
        let mut v = vec![false; size];
        for &i in &self.vertices {
            v[i] = true;
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct OrthoGraph {
    scenario: BellScenario,
    adjacency: Vec<Vec<bool>>,
    pub cliques_n: Vec<Clique>,
    pub cliques_ns: Vec<Clique>,
}

/// `exists i: x_i^u = x_i^v and a_i^u != a_i^v`.
pub fn locally_orthogonal(s: &BellScenario, u: usize, v: usize) -> bool {
    let k = s.output_count();
    let (xu, xv) = (s.input_at(u / k), s.input_at(v / k));
    let (au, av) = (s.output_at(u % k), s.output_at(v % k));
    (0..s.parties()).any(|i| xu[i] == xv[i] && au[i] != av[i])
}

pub fn build_orthogonality_graph(s: &BellScenario) -> OrthoGraph {
    let d = s.event_count();
    let mut adjacency = vec![vec![false; d]; d];
    for u in 0..d {
        for v in (u + 1)..d {
            if locally_orthogonal(s, u, v) {
                adjacency[u][v] = true;
                adjacency[v][u] = true;
            }
        }
    }
    let mut cliques_n = Vec::new();
    let mut cliques_ns = Vec::new();
    for row in clique_form_rows(s) {
        let vertices: Vec<usize> = row
            .coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_one())
            .map(|(i, _)| i)
            .collect();
        debug_assert!(row.coefficients.iter().all(|c| c.is_zero() || c.is_one()));
        match row.tag {
            RowTag::Normalization { inputs } => {
                cliques_n.push(Clique { tag: CliqueTag::Normalization { inputs }, vertices })
            }
            RowTag::NoSignalingClique { party, inputs, alt_input, others } => cliques_ns.push(Clique {
                tag: CliqueTag::NoSignaling { party, inputs, alt_input, others },
                vertices,
            }),
            _ => unreachable!("clique_form_rows yields only clique rows"),
        }
    }
    OrthoGraph { scenario: s.clone(), adjacency, cliques_n, cliques_ns }
}

impl OrthoGraph {
    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().enumerate().filter(|(_, &e)| e).map(|(v, _)| v)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.neighbors(u).count()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let d = self.vertex_count();
        (0..d)
            .flat_map(|u| ((u + 1)..d).filter(move |&v| self.adjacency[u][v]).map(move |v| (u, v)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Normalization cliques followed by no-signaling cliques.
    pub fn cliques(&self) -> impl Iterator<Item = &Clique> {
        self.cliques_n.iter().chain(&self.cliques_ns)
    }

    pub fn verify_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            u < self.vertex_count()
                && vertices[i + 1..].iter().all(|&v| v < self.vertex_count() && self.adjacency[u][v])
        })
    }

    /// Header `p <vertices> <edges>`, then one `e u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let edges = self.edges();
        let mut out = format!("p {} {}\n", self.vertex_count(), edges.len());
        for (u, v) in edges {
            let _ = writeln!(out, "e {u} {v}");
        }
        out
    }

    pub fn clique_manifest(&self) -> serde_json::Value {
        serde_json::json!({
            "scenario": {
                "parties": self.scenario.parties(),
                "inputs": self.scenario.inputs(),
                "outputs": self.scenario.outputs(),
            },
            "vertex_count": self.vertex_count(),
            "edge_count": self.edge_count(),
            "normalization": self.cliques_n,
            "no_signaling": self.cliques_ns,
        })
    }
}

/// Parses the edge-list format back into `(vertex_count, edges)`.
pub fn parse_edge_list(text: &str) -> Result<(usize, BTreeSet<(usize, usize)>)> {
    let mut header = None;
    let mut edges = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::Parse(format!("edge list line {}: {line:?}", lineno + 1));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match fields.as_slice() {
            [] => {}
            ["p", v, e] if header.is_none() => header = Some((num(v)?, num(e)?)),
            ["e", u, v] if header.is_some() => {
                let (u, v) = (num(u)?, num(v)?);
                edges.insert((u.min(v), u.max(v)));
            }
            _ => return Err(bad()),
        }
    }
    let (n, m) = header.ok_or_else(|| Error::Parse("edge list has no header".into()))?;
    if edges.len() != m || edges.iter().any(|&(u, v)| u == v || v >= n) {
        return Err(Error::Parse("edge list does not match its header".into()));
    }
    Ok((n, edges))
}

#[derive(Clone, Debug, Serialize)]
pub struct CliqueSum {
    pub tag: CliqueTag,
    #[serde(serialize_with = "ser_rational")]
    pub sum: Rational,
    pub saturated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SaturationReport {
    pub cliques: Vec<CliqueSum>,
}

impl SaturationReport {
    pub fn all_saturated(&self) -> bool {
        self.cliques.iter().all(|c| c.saturated)
    }

    pub fn max_deviation(&self) -> Rational {
        self.cliques
            .iter()
            .map(|c| {
                let d = &c.sum - Rational::one();
                if d < Rational::zero() { -d } else { d }
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

pub fn clique_saturation(b: &BellBox, g: &OrthoGraph) -> Result<SaturationReport> {
    if b.scenario() != g.scenario() {
        return Err(Error::ScenarioMismatch("box and graph scenarios differ".into()));
    }
    let cliques = g
        .cliques()
        .map(|c| {
            let sum: Rational = c.vertices.iter().map(|&i| &b.entries()[i]).sum();
            let saturated = sum.is_one();
            CliqueSum { tag: c.tag.clone(), sum, saturated }
        })
        .collect();
    Ok(SaturationReport { cliques })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{noisy_box, pr_box, r, validate};

    fn s222() -> BellScenario {
        BellScenario::uniform(2, 2, 2).unwrap()
    }

    #[test]
    fn sizes_222() {
        let g = build_orthogonality_graph(&s222());
        assert_eq!(g.vertex_count(), 16);
        assert_eq!(g.cliques_n.len(), 4);
        assert!(g.cliques_n.iter().all(|c| c.vertices.len() == 4));
        // party x (input pair) x other output: 2 * 1 * 2 * 2
        assert_eq!(g.cliques_ns.len(), 8);
        assert!(g.cliques_ns.iter().all(|c| c.vertices.len() == 4));
    }

    #[test]
    fn degree_by_direct_count() {
        // (2,2,2): an event is orthogonal to events sharing x_i with a
        // different a_i. Per party: 2 (other input free) * 2 (other output
        // free) = 4 events; both parties: 2 events counted twice.
        let g = build_orthogonality_graph(&s222());
        assert!((0..16).all(|u| g.degree(u) == 4 + 4 - 1));
        assert_eq!(g.edge_count(), 16 * 7 / 2);
    }

    #[test]
    fn listed_cliques_are_cliques() {
        for s in [s222(), BellScenario::uniform(2, 2, 3).unwrap(), BellScenario::uniform(3, 2, 2).unwrap()] {
            let g = build_orthogonality_graph(&s);
            assert!(g.cliques().all(|c| g.verify_clique(&c.vertices)));
            let mut covered = vec![0; g.vertex_count()];
            for c in &g.cliques_n {
                for &v in &c.vertices {
                    covered[v] += 1;
                }
            }
            assert!(covered.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn non_clique_rejected() {
        let s = s222();
        let g = build_orthogonality_graph(&s);
        let u = s.index_of(&[0, 0], &[0, 0]);
        let v = s.index_of(&[0, 0], &[1, 1]);
        assert!(!g.verify_clique(&[u, v]));
        assert!(g.verify_clique(&[u]));
    }

    #[test]
    fn saturation() {
        let s = s222();
        let g = build_orthogonality_graph(&s);
        assert!(clique_saturation(&pr_box(2, 2).unwrap(), &g).unwrap().all_saturated());
        let g3 = build_orthogonality_graph(&BellScenario::uniform(3, 2, 2).unwrap());
        assert!(clique_saturation(&noisy_box(3, 2).unwrap(), &g3).unwrap().all_saturated());

        // Normalized but signaling: Alice's marginal depends on Bob's input.
        let broken = BellBox::from_fn(s.clone(), |a, x| if x[1] == 0 && a == [0, 0] || x[1] == 1 && a == [1, 0] { r(1, 1) } else { r(0, 1) });
        assert!(!validate(&broken).is_valid());
        let report = clique_saturation(&broken, &g).unwrap();
        assert!(!report.all_saturated());
        assert!(report.cliques[..4].iter().all(|c| c.saturated));
        assert_eq!(report.max_deviation(), r(1, 1));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = build_orthogonality_graph(&s222());
        let text = g.to_edge_list();
        assert!(text.starts_with("p 16 56\n"));
        let (n, edges) = parse_edge_list(&text).unwrap();
        assert_eq!(n, 16);
        assert_eq!(edges.into_iter().collect::<Vec<_>>(), g.edges());
        assert!(parse_edge_list("p 2 1\ne 0 0\n").is_err());
    }
}
