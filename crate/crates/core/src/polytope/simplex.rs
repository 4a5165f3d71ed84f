//! Dense two-phase simplex over exact rationals.
//!
//! Pivoting follows Bland's rule: the entering column is the lowest-index
//! column with positive reduced cost, and ratio-test ties go to the row whose
//! basic variable has the lowest index. This guarantees termination.

use num_traits::{Signed, Zero};

use crate::polytope::constraints::Relation;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    LessEq,
    Equal,
    GreaterEq,
}

impl From<Relation> for Sense {
    fn from(r: Relation) -> Self {
        match r {
            Relation::LessEq => Sense::LessEq,
            Relation::Equal => Sense::Equal,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

/// `maximize objective . x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        self.rhs[row] /= &p;
        let pivot_row = self.rows[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        let support: Vec<usize> = (0..self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let f = self.rows[r][col].clone();
            for &j in &support {
                let delta = &f * &pivot_row[j];
                self.rows[r][j] -= delta;
            }
            self.rhs[r] -= &f * &pivot_rhs;
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut r = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, rj) in r.iter_mut().enumerate() {
                if !self.rows[i][j].is_zero() {
                    *rj -= &cost[b] * &self.rows[i][j];
                }
            }
        }
        r
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.rhs).map(|(&b, v)| &cost[b] * v).sum()
    }

    /// Runs primal simplex from the current feasible basis. Returns false on
    /// unboundedness.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let reduced = self.reduced_costs(cost);
            let entering = (0..self.cols).find(|&j| allowed[j] && reduced[j].is_positive());
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.objective.len();
    let m = lp.constraints.len();

    // Normalize to non-negative right-hand sides.
    let mut normalized: Vec<(Vec<Rational>, Sense, Rational)> = lp
        .constraints
        .iter()
        .map(|c| {
            assert_eq!(c.coefficients.len(), n, "constraint width must match objective");
            if c.rhs.is_negative() {
                let flipped = match c.sense {
                    Sense::LessEq => Sense::GreaterEq,
                    Sense::GreaterEq => Sense::LessEq,
                    Sense::Equal => Sense::Equal,
                };
                (c.coefficients.iter().map(|v| -v).collect(), flipped, -c.rhs.clone())
            } else {
                (c.coefficients.clone(), c.sense, c.rhs.clone())
            }
        })
        .collect();

    let slack_count = normalized.iter().filter(|c| c.1 != Sense::Equal).count();
    let art_count = normalized.iter().filter(|c| c.1 != Sense::LessEq).count();
    let cols = n + slack_count + art_count;
    let art_start = n + slack_count;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, art_start);
    for (coeffs, sense, b) in normalized.drain(..) {
        let mut row = coeffs;
        row.resize(cols, Rational::zero());
        match sense {
            Sense::LessEq => {
                row[next_slack] = Rational::from_integer(1.into());
                basis.push(next_slack);
                next_slack += 1;
            }
            Sense::GreaterEq => {
                row[next_slack] = Rational::from_integer((-1).into());
                next_slack += 1;
                row[next_art] = Rational::from_integer(1.into());
                basis.push(next_art);
                next_art += 1;
            }
            Sense::Equal => {
                row[next_art] = Rational::from_integer(1.into());
                basis.push(next_art);
                next_art += 1;
            }
        }
        rows.push(row);
        rhs.push(b);
    }
    let mut t = Tableau { rows, rhs, basis, cols };

    if art_count > 0 {
        let mut phase1 = vec![Rational::zero(); cols];
        for c in phase1.iter_mut().skip(art_start) {
            *c = Rational::from_integer((-1).into());
        }
        let all = vec![true; cols];
        t.optimize(&phase1, &all);
        if t.value(&phase1).is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        t.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut cost = lp.objective.clone();
    cost.resize(cols, Rational::zero());
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    if !t.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[i].clone();
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal { x, value }
}
