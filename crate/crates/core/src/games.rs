//! Unique games, their no-signaling graph, and the boxes that win them.
//!
//! A total unique game fixes, for every joint input and every party `j`, a
//! bijection from the other parties' outputs to `j`'s winning output. Winning
//! events form the vertices of `G_NS`; two are adjacent when they agree on
//! input and output for `n - 1` parties. The game has a unique winning
//! no-signaling box iff `G_NS` is connected, and each connected component
//! carries a winning box with weight `1/k_c` on its events.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::boxes::{BellBox, ScenarioFile};
use crate::error::{Error, Result};
use crate::polytope::vertex::{certify_vertex, VertexCertificate};
use crate::rational::Rational;
use crate::scenario::BellScenario;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniqueGame {
    scenario: BellScenario,
    winning: Vec<bool>,
}

impl UniqueGame {
    /// Builds and validates a game from a winning predicate `(a, x) -> bool`.
    pub fn from_predicate(s: &BellScenario, mut wins: impl FnMut(&[usize], &[usize]) -> bool) -> Result<Self> {
        let k = s.output_count();
        let winning = (0..s.event_count()).map(|i| wins(&s.output_at(i % k), &s.input_at(i / k))).collect();
        Self::from_winning(s.clone(), winning)
    }

    pub fn from_winning(scenario: BellScenario, winning: Vec<bool>) -> Result<Self> {
        if winning.len() != scenario.event_count() {
            return Err(Error::Dimension { expected: scenario.event_count(), found: winning.len() });
        }
        let g = Self { scenario, winning };
        g.check_unique()?;
        Ok(g)
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn is_winning(&self, event: usize) -> bool {
        self.winning[event]
    }

    pub fn winning_events(&self) -> Vec<usize> {
        (0..self.winning.len()).filter(|&i| self.winning[i]).collect()
    }

    /// For every `x`, party `j` and outputs of the others, exactly one
    /// output of `j` wins. This makes each `sigma_x^(j)` a well-defined map,
    /// injective and total.
    fn check_unique(&self) -> Result<()> {
        let s = &self.scenario;
        for x in s.joint_inputs() {
            for j in 0..s.parties() {
                for a in s.joint_outputs().filter(|a| a[j] == 0) {
                    let mut b = a.clone();
                    let count = (0..s.outputs()[j])
                        .filter(|&aj| {
                            b[j] = aj;
                            self.winning[s.index_of(&b, &x)]
                        })
                        .count();
                    if count != 1 {
                        let others: Vec<usize> = a.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
                        return Err(Error::Game(format!(
                            "input {x:?}, party {j}, other outputs {others:?}: {count} winning outputs (need exactly 1)"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `sigma_x^(j)`: the output party `j` must give when the others output
    /// `others` (in party order, `j` omitted).
    pub fn sigma(&self, x: &[usize], j: usize, others: &[usize]) -> Result<usize> {
        let s = &self.scenario;
        if x.len() != s.parties() || j >= s.parties() || others.len() + 1 != s.parties() {
            return Err(Error::InvalidArgument("sigma arguments do not match the scenario".into()));
        }
        let mut a: Vec<usize> = others.to_vec();
        a.insert(j, 0);
        for aj in 0..s.outputs()[j] {
            a[j] = aj;
            s.check_event(&crate::scenario::Event::new(a.clone(), x.to_vec()))?;
            if self.winning[s.index_of(&a, x)] {
                return Ok(aj);
            }
        }
        Err(Error::Consistency("validated game lost its forced output".into()))
    }

    pub fn to_json(&self) -> String {
        let k = self.scenario.output_count();
        let file = GameFile {
            scenario: ScenarioFile::from(&self.scenario),
            winning: self.winning_events().into_iter().map(|i| [i / k, i % k]).collect(),
        };
        serde_json::to_string_pretty(&file).expect("game serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GameFile = serde_json::from_str(text)?;
        let s = BellScenario::try_from(file.scenario)?;
        let (k, inputs) = (s.output_count(), s.input_count());
        let mut winning = vec![false; s.event_count()];
        for [xi, ai] in file.winning {
            if xi >= inputs || ai >= k {
                return Err(Error::Parse(format!("winning pair [{xi}, {ai}] out of range")));
            }
            winning[xi * k + ai] = true;
        }
        Self::from_winning(s, winning)
    }
}

/// Winning events as `[input index, output index]` pairs.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    scenario: ScenarioFile,
    winning: Vec<[usize; 2]>,
}

/// `sum_i a_i mod k == prod_i x_i` on `(n, 2, k)`.
pub fn xor_game(parties: usize, outputs: usize) -> Result<UniqueGame> {
    if parties < 2 || outputs < 2 {
        return Err(Error::InvalidArgument("xor game needs n >= 2 and k >= 2".into()));
    }
    let s = BellScenario::uniform(parties, 2, outputs)?;
    UniqueGame::from_predicate(&s, |a, x| a.iter().sum::<usize>() % outputs == x.iter().product::<usize>())
}

/// `sum_i a_i mod k == 0` for every input: won by constant strategies.
pub fn constant_game(parties: usize, outputs: usize) -> Result<UniqueGame> {
    let s = BellScenario::uniform(parties, 2, outputs)?;
    UniqueGame::from_predicate(&s, |a, _| a.iter().sum::<usize>() % outputs == 0)
}

#[derive(Clone, Debug)]
pub struct NsGameGraph {
    /// Event index of each vertex, ascending.
    pub vertices: Vec<usize>,
    pub adjacency: Vec<Vec<usize>>,
    /// Component id per vertex, numbered in order of first vertex.
    pub component: Vec<usize>,
    pub component_count: usize,
}

impl NsGameGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        self.component_count <= 1
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Same format as the orthogonality graph export, over vertex positions.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("p {} {}\n", self.vertices.len(), self.edge_count());
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs.iter().filter(|&&v| v > u) {
                let _ = writeln!(out, "e {u} {v}");
            }
        }
        out
    }
}

pub fn build_ns_graph(g: &UniqueGame) -> NsGameGraph {
    let s = &g.scenario;
    let k = s.output_count();
    let n = s.parties();
    let vertices = g.winning_events();
    let labels: Vec<(Vec<usize>, Vec<usize>)> =
        vertices.iter().map(|&i| (s.output_at(i % k), s.input_at(i / k))).collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for u in 0..vertices.len() {
        for v in (u + 1)..vertices.len() {
            let (au, xu) = &labels[u];
            let (av, xv) = &labels[v];
            let agree = (0..n).filter(|&i| au[i] == av[i] && xu[i] == xv[i]).count();
            if agree + 1 >= n {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    let mut component = vec![usize::MAX; vertices.len()];
    let mut count = 0;
    for start in 0..vertices.len() {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if component[v] == usize::MAX {
                    component[v] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    NsGameGraph { vertices, adjacency, component, component_count: count }
}

/// One box per component of `G_NS`, uniform over the component's events at
/// each input.
pub fn winning_boxes(g: &UniqueGame) -> Result<Vec<BellBox>> {
    winning_boxes_of(g, &build_ns_graph(g))
}

fn winning_boxes_of(g: &UniqueGame, graph: &NsGameGraph) -> Result<Vec<BellBox>> {
    let s = &g.scenario;
    let k = s.output_count();
    let mut boxes = Vec::with_capacity(graph.component_count);
    for c in 0..graph.component_count {
        let mut per_input = vec![0usize; s.input_count()];
        for (pos, &e) in graph.vertices.iter().enumerate() {
            if graph.component[pos] == c {
                per_input[e / k] += 1;
            }
        }
        let k_c = per_input[0];
        if k_c == 0 || per_input.iter().any(|&v| v != k_c) {
            return Err(Error::Consistency(format!(
                "component {c} has unequal vertex counts per input: {per_input:?}"
            )));
        }
        let w = Rational::new(1.into(), (k_c as i64).into());
        let mut entries = vec![Rational::zero(); s.event_count()];
        for (pos, &e) in graph.vertices.iter().enumerate() {
            if graph.component[pos] == c {
                entries[e] = w.clone();
            }
        }
        boxes.push(BellBox::new(s.clone(), entries)?);
    }
    Ok(boxes)
}

/// Average winning probability over uniformly chosen inputs.
pub fn game_value(g: &UniqueGame, b: &BellBox) -> Result<Rational> {
    let sum = sum_value(g, b)?;
    Ok(sum / Rational::from_integer((g.scenario.input_count() as i64).into()))
}

/// `sum_x sum_{a winning} P(a|x)`, i.e. the number of inputs times the value.
pub fn sum_value(g: &UniqueGame, b: &BellBox) -> Result<Rational> {
    if b.scenario() != &g.scenario {
        return Err(Error::ScenarioMismatch("game and box scenarios differ".into()));
    }
    Ok(b.entries().iter().zip(&g.winning).filter(|(_, &w)| w).map(|(p, _)| p).sum())
}

#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub connected: bool,
    pub graph: NsGameGraph,
    pub boxes: Vec<BellBox>,
    /// Vertex certificate of the single winning box when connected.
    pub vertex: Option<VertexCertificate>,
}

impl UniquenessReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.graph.vertices.len(),
            "edges": self.graph.edge_count(),
            "components": self.graph.component_count,
            "connected": self.connected,
            "winning_boxes": self.boxes.len(),
            "vertex_certified": self.vertex.as_ref().map(|c| c.is_vertex),
            "quantum_value_below_one": self.connected && self.boxes.iter().any(|b| !b.is_integral()),
            "boxes": self.boxes.iter()
                .map(|b| serde_json::from_str::<serde_json::Value>(&b.to_json()).expect("box JSON"))
                .collect::<Vec<_>>(),
        })
    }
}

/// Connectivity of `G_NS` decides whether the winning box is unique. When it
/// is, that box must be a vertex of the no-signaling polytope; a non-integral
/// unique winner also means no quantum strategy wins with certainty.
pub fn is_uniquely_won(g: &UniqueGame) -> Result<UniquenessReport> {
    let graph = build_ns_graph(g);
    let boxes = winning_boxes_of(g, &graph)?;
    for b in &boxes {
        if game_value(g, b)? != Rational::from_integer(1.into()) {
            return Err(Error::Consistency("component box does not win the game".into()));
        }
    }
    let connected = graph.is_connected();
    let vertex = if connected {
        let cert = certify_vertex(&boxes[0])?;
        if !cert.is_vertex {
            return Err(Error::Consistency("unique winning box failed vertex certification".into()));
        }
        Some(cert)
    } else {
        None
    };
    Ok(UniquenessReport { connected, graph, boxes, vertex })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{correlated_box, noisy_box, pr_box, r, validate};
    use crate::polytope::classical::{classical_membership, ClassicalOptions};

    #[test]
    fn xor_game_counts() {
        for (n, k) in [(2usize, 2usize), (2, 3), (3, 2), (3, 3)] {
            let g = xor_game(n, k).unwrap();
            let graph = build_ns_graph(&g);
            let v = 2usize.pow(n as u32) * k.pow(n as u32 - 1);
            assert_eq!(graph.vertices.len(), v);
            assert!(graph.degrees().iter().all(|&d| d == n));
            assert_eq!(graph.edge_count(), n * v / 2);
            assert!(graph.is_connected());
            assert_eq!(winning_boxes(&g).unwrap(), vec![pr_box(n, k).unwrap()]);
        }
    }

    #[test]
    fn constant_game_splits() {
        let g = constant_game(2, 2).unwrap();
        let report = is_uniquely_won(&g).unwrap();
        assert!(!report.connected);
        assert_eq!(report.graph.vertices.len(), 8);
        assert_eq!(report.boxes.len(), 2);
        for b in &report.boxes {
            assert!(validate(b).is_valid());
            assert!(classical_membership(b, &ClassicalOptions::default()).unwrap().certificate.is_local());
        }
    }

    #[test]
    fn values() {
        let g = xor_game(2, 2).unwrap();
        assert_eq!(game_value(&g, &pr_box(2, 2).unwrap()).unwrap(), r(1, 1));
        assert_eq!(game_value(&g, &correlated_box(2, 2).unwrap()).unwrap(), r(3, 4));
        assert_eq!(game_value(&g, &noisy_box(2, 2).unwrap()).unwrap(), r(1, 2));
        assert_eq!(sum_value(&g, &correlated_box(2, 2).unwrap()).unwrap(), r(3, 1));
    }

    #[test]
    fn uniquely_won() {
        for (n, k) in [(2, 2), (2, 3)] {
            let report = is_uniquely_won(&xor_game(n, k).unwrap()).unwrap();
            assert!(report.connected);
            assert_eq!(report.boxes, vec![pr_box(n, k).unwrap()]);
            assert!(report.vertex.unwrap().is_vertex);
        }
    }

    #[test]
    fn non_unique_game_rejected() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let err = UniqueGame::from_predicate(&s, |a, _| a[0] == 0).unwrap_err();
        assert!(matches!(err, Error::Game(_)));
    }

    #[test]
    fn sigma_and_json_round_trip() {
        let g = xor_game(3, 3).unwrap();
        assert_eq!(g.sigma(&[1, 1, 1], 2, &[2, 2]).unwrap(), 0);
        assert_eq!(g.sigma(&[0, 1, 1], 0, &[1, 0]).unwrap(), 2);
        let back = UniqueGame::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(UniqueGame::from_json(r#"{"scenario":{"parties":1,"inputs":[1],"outputs":[2]},"winning":[[0,5]]}"#).is_err());
    }
}
