use serde::Serialize;

use crate::boxes::{validate, BellBox};
use crate::error::Result;
use crate::exact::rank_exact;
use crate::polytope::constraints::{build_constraints, tight_rows};

/// Rank test on the tight constraint rows: a valid box is a vertex exactly
/// when its tight rows have full column rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexCertificate {
    pub is_vertex: bool,
    pub tight_row_indices: Vec<usize>,
    pub rank: usize,
    pub required_rank: usize,
}

pub fn certify_vertex(b: &BellBox) -> Result<VertexCertificate> {
    validate(b).into_result()?;
    let rows = build_constraints(b.scenario());
    let tight = tight_rows(&rows, b)?;
    let sub: Vec<_> = tight.iter().map(|&i| rows[i].coefficients.clone()).collect();
    let rank = rank_exact(&sub);
    let required_rank = b.scenario().event_count();
    Ok(VertexCertificate {
        is_vertex: rank == required_rank,
        tight_row_indices: tight,
        rank,
        required_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{correlated_box, deterministic_box, deterministic_strategies, mix, noisy_box, pr_box, r};
    use crate::scenario::BellScenario;

    #[test]
    fn pr_boxes_are_vertices() {
        for (n, k, d) in [(2, 2, 16), (2, 3, 36), (3, 2, 64)] {
            let cert = certify_vertex(&pr_box(n, k).unwrap()).unwrap();
            assert!(cert.is_vertex, "pr_box({n},{k})");
            assert_eq!(cert.rank, d);
            assert_eq!(cert.required_rank, d);
        }
    }

    #[test]
    fn mixtures_are_not_vertices() {
        let pr = pr_box(2, 2).unwrap();
        let half = mix(&[&pr, &correlated_box(2, 2).unwrap()], &[r(1, 2), r(1, 2)]).unwrap();
        assert!(!certify_vertex(&half).unwrap().is_vertex);
        assert!(!certify_vertex(&noisy_box(2, 2).unwrap()).unwrap().is_vertex);
    }

    #[test]
    fn all_deterministic_boxes_are_vertices() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        for st in deterministic_strategies(&s) {
            let cert = certify_vertex(&deterministic_box(&s, &st).unwrap()).unwrap();
            assert!(cert.is_vertex);
        }
    }

    #[test]
    fn invalid_box_is_rejected() {
        let s = BellScenario::uniform(1, 1, 2).unwrap();
        let b = BellBox::new(s, vec![r(1, 2), r(1, 4)]).unwrap();
        assert!(certify_vertex(&b).is_err());
    }
}
