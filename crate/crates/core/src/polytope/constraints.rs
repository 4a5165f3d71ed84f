use std::fmt::Write as _;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::boxes::BellBox;
use crate::error::{Error, Result};
use crate::rational::{format_rational, int, to_f64, Rational};
use crate::scenario::BellScenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "=")]
    Equal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    Positivity {
        event: usize,
    },
    Normalization {
        inputs: Vec<usize>,
    },
    /// Difference form: `sum_{a_p} P(a|x) - sum_{a_p} P(a|x') = 0` where `x'`
    /// is `inputs` with `inputs[party]` replaced by `alt_input`. The entry
    /// `outputs[party]` is a placeholder (summed over).
    NoSignaling {
        party: usize,
        inputs: Vec<usize>,
        alt_input: usize,
        outputs: Vec<usize>,
    },
    /// Saturated-clique form of the same constraint (0/1 row, bound 1).
    NoSignalingClique {
        party: usize,
        inputs: Vec<usize>,
        alt_input: usize,
        others: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintRow {
    pub coefficients: Vec<Rational>,
    pub bound: Rational,
    pub tag: RowTag,
    pub relation: Relation,
}

impl ConstraintRow {
    pub fn lhs(&self, point: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(point)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, p)| c * p)
            .sum()
    }

    /// `A_i . P == b_i`.
    pub fn is_tight(&self, point: &[Rational]) -> bool {
        self.lhs(point) == self.bound
    }

    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        let lhs = self.lhs(point);
        match self.relation {
            Relation::LessEq => lhs <= self.bound,
            Relation::Equal => lhs == self.bound,
        }
    }
}

/// The full description `A.P <= b` of the no-signaling polytope.
///
/// Rows come in three blocks: one positivity row per event, one
/// normalization equality per joint input, and one no-signaling equality for
/// every party, unordered input pair on that party, assignment of the other
/// inputs and full output tuple. The last block repeats each constraint
/// `k_party` times (the summed output is a placeholder); duplicates are kept
/// since rank is unaffected.
pub fn build_constraints(s: &BellScenario) -> Vec<ConstraintRow> {
    let d = s.event_count();
    let mut rows = Vec::new();
    for e in 0..d {
        let mut c = vec![Rational::zero(); d];
        c[e] = int(-1);
        rows.push(ConstraintRow {
            coefficients: c,
            bound: Rational::zero(),
            tag: RowTag::Positivity { event: e },
            relation: Relation::LessEq,
        });
    }
    rows.extend(normalization_rows(s));
    for party in 0..s.parties() {
        let k = s.outputs()[party];
        for x in s.joint_inputs() {
            for alt in (x[party] + 1)..s.inputs()[party] {
                let mut x_alt = x.clone();
                x_alt[party] = alt;
                for a in s.joint_outputs() {
                    let mut c = vec![Rational::zero(); d];
                    let mut a_var = a.clone();
                    for ai in 0..k {
                        a_var[party] = ai;
                        c[s.index_of(&a_var, &x)] += int(1);
                        c[s.index_of(&a_var, &x_alt)] -= int(1);
                    }
                    rows.push(ConstraintRow {
                        coefficients: c,
                        bound: Rational::zero(),
                        tag: RowTag::NoSignaling {
                            party,
                            inputs: x.clone(),
                            alt_input: alt,
                            outputs: a,
                        },
                        relation: Relation::Equal,
                    });
                }
            }
        }
    }
    rows
}

fn normalization_rows(s: &BellScenario) -> Vec<ConstraintRow> {
    let d = s.event_count();
    let k = s.output_count();
    (0..s.input_count())
        .map(|xi| {
            let mut c = vec![Rational::zero(); d];
            for slot in &mut c[xi * k..(xi + 1) * k] {
                *slot = Rational::one();
            }
            ConstraintRow {
                coefficients: c,
                bound: Rational::one(),
                tag: RowTag::Normalization { inputs: s.input_at(xi) },
                relation: Relation::Equal,
            }
        })
        .collect()
}

/// Equality rows in saturated-clique form: the normalization rows plus, for
/// each party `p`, unordered input pair `x_p < x_p'`, other inputs and other
/// outputs `a_{-p}`, the 0/1 row obtained by adding the normalization row of
/// `x'` to the difference-form no-signaling row. Its support is
/// `{(a_{-p}, *) | x} ∪ {(ã, *) | x' : ã_{-p} != a_{-p}}` with bound 1.
pub fn clique_form_rows(s: &BellScenario) -> Vec<ConstraintRow> {
    let d = s.event_count();
    let k_all = s.output_count();
    let mut rows = normalization_rows(s);
    for party in 0..s.parties() {
        let k = s.outputs()[party];
        for x in s.joint_inputs() {
            for alt in (x[party] + 1)..s.inputs()[party] {
                let mut x_alt = x.clone();
                x_alt[party] = alt;
                for a in s.joint_outputs().filter(|a| a[party] == 0) {
                    let mut c = vec![Rational::zero(); d];
                    let base = s.input_index(&x_alt) * k_all;
                    for slot in &mut c[base..base + k_all] {
                        *slot = Rational::one();
                    }
                    let mut a_var = a.clone();
                    for ai in 0..k {
                        a_var[party] = ai;
                        c[s.index_of(&a_var, &x)] += int(1);
                        c[s.index_of(&a_var, &x_alt)] -= int(1);
                    }
                    let others = a
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != party)
                        .map(|(_, &v)| v)
                        .collect();
                    rows.push(ConstraintRow {
                        coefficients: c,
                        bound: Rational::one(),
                        tag: RowTag::NoSignalingClique { party, inputs: x.clone(), alt_input: alt, others },
                        relation: Relation::Equal,
                    });
                }
            }
        }
    }
    rows
}

/// `prod_i [m_i (k_i - 1) + 1] - 1`.
pub fn dimension(s: &BellScenario) -> usize {
    s.inputs()
        .iter()
        .zip(s.outputs())
        .map(|(&m, &k)| m * (k - 1) + 1)
        .product::<usize>()
        - 1
}

/// Indices of the rows satisfied with equality at `b`: every equality row,
/// plus positivity rows whose entry is zero.
pub fn tight_rows(rows: &[ConstraintRow], b: &BellBox) -> Result<Vec<usize>> {
    if let Some(row) = rows.first() {
        if row.coefficients.len() != b.len() {
            return Err(Error::Dimension { expected: row.coefficients.len(), found: b.len() });
        }
    }
    Ok(rows
        .iter()
        .enumerate()
        .filter(|(_, row)| row.relation == Relation::Equal || row.is_tight(b.entries()))
        .map(|(i, _)| i)
        .collect())
}

/// Rows that are exact duplicates of an earlier row are dropped.
pub fn dedup_rows(rows: &[ConstraintRow]) -> Vec<ConstraintRow> {
    let mut seen = std::collections::HashSet::new();
    rows.iter()
        .filter(|row| seen.insert((row.coefficients.clone(), row.bound.clone(), row.relation == Relation::Equal)))
        .cloned()
        .collect()
}

#[derive(Serialize)]
struct RowJson<'a> {
    tag: &'a RowTag,
    relation: Relation,
    bound: String,
    /// Sparse `[event, "p/q"]` pairs.
    coefficients: Vec<(usize, String)>,
}

#[derive(Serialize)]
struct SystemJson<'a> {
    scenario: crate::boxes::ScenarioFile,
    variables: usize,
    rows: Vec<RowJson<'a>>,
}

pub fn constraints_to_json(s: &BellScenario, rows: &[ConstraintRow]) -> String {
    let doc = SystemJson {
        scenario: s.into(),
        variables: s.event_count(),
        rows: rows
            .iter()
            .map(|row| RowJson {
                tag: &row.tag,
                relation: row.relation,
                bound: format_rational(&row.bound),
                coefficients: row
                    .coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(i, c)| (i, format_rational(c)))
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("constraint serialization is infallible")
}

fn lp_number(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{:.17e}", to_f64(r))
    }
}

/// CPLEX LP text for cross-checking with external solvers. Variables are
/// `p<index>` in canonical order; the objective is zero (feasibility).
pub fn constraints_to_lp(s: &BellScenario, rows: &[ConstraintRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ no-signaling polytope, inputs {:?}, outputs {:?}", s.inputs(), s.outputs());
    let _ = writeln!(out, "Minimize\n obj: 0 p0\nSubject To");
    for (i, row) in rows.iter().enumerate() {
        let prefix = match row.tag {
            RowTag::Positivity { .. } => "pos",
            RowTag::Normalization { .. } => "norm",
            RowTag::NoSignaling { .. } => "ns",
            RowTag::NoSignalingClique { .. } => "nsc",
        };
        let mut terms = String::new();
        for (j, c) in row.coefficients.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if *c < Rational::zero() { "-" } else { "+" };
            let mag = lp_number(&(if *c < Rational::zero() { -c } else { c.clone() }));
            let _ = write!(terms, " {sign} {mag} p{j}");
        }
        let rel = match row.relation {
            Relation::LessEq => "<=",
            Relation::Equal => "=",
        };
        let _ = writeln!(out, " {prefix}_{i}:{terms} {rel} {}", lp_number(&row.bound));
    }
    let _ = writeln!(out, "Bounds");
    for j in 0..s.event_count() {
        let _ = writeln!(out, " p{j} free");
    }
    out.push_str("End\n");
    out
}
