//! Exact-rational no-signaling boxes.
//!
//! A [`BellBox`] is the full table `P(a|x)` of a scenario, stored as a flat
//! vector in canonical event order. Construction never enforces validity so
//! that hand-built (possibly signaling) tables can be diagnosed with
//! [`validate`].

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, rat, to_f64, Rational};
use crate::scenario::{for_each_tuple, BellScenario, Event};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellBox {
    scenario: BellScenario,
    entries: Vec<Rational>,
}

impl BellBox {
    pub fn new(scenario: BellScenario, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != scenario.event_count() {
            return Err(Error::Dimension {
                expected: scenario.event_count(),
                found: entries.len(),
            });
        }
        Ok(Self { scenario, entries })
    }

    /// Builds a box by evaluating `f(a, x)` on every event.
    pub fn from_fn(scenario: BellScenario, mut f: impl FnMut(&[usize], &[usize]) -> Rational) -> Self {
        let entries = scenario.events().map(|e| f(&e.outputs, &e.inputs)).collect();
        Self { scenario, entries }
    }

    pub fn scenario(&self) -> &BellScenario {
        &self.scenario
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Rational> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `P(a|x)`; digits are assumed in range.
    pub fn prob(&self, a: &[usize], x: &[usize]) -> &Rational {
        &self.entries[self.scenario.index_of(a, x)]
    }

    pub fn get(&self, event: &Event) -> Result<&Rational> {
        Ok(&self.entries[self.scenario.event_index(event)?])
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.entries.iter().map(to_f64).collect()
    }

    /// True when every entry is 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|p| p.is_zero() || p.is_one())
    }

    /// Lowest event index whose entry is not 0 or 1.
    pub fn first_fractional(&self) -> Option<usize> {
        self.entries.iter().position(|p| !(p.is_zero() || p.is_one()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&BoxFile::from(self)).expect("box serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: BoxFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

impl fmt::Display for BellBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.scenario.output_count();
        for (x_idx, row) in self.entries.chunks(k).enumerate() {
            let x = self.scenario.input_at(x_idx);
            let cells: Vec<String> = row.iter().map(|r| r.to_string()).collect();
            writeln!(f, "x={x:?}: {}", cells.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub(crate) struct ScenarioFile {
    pub parties: usize,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl From<&BellScenario> for ScenarioFile {
    fn from(s: &BellScenario) -> Self {
        Self {
            parties: s.parties(),
            inputs: s.inputs().to_vec(),
            outputs: s.outputs().to_vec(),
        }
    }
}

impl TryFrom<ScenarioFile> for BellScenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Self> {
        if f.inputs.len() != f.parties || f.outputs.len() != f.parties {
            return Err(Error::Scenario(format!(
                "declared {} parties but lists have lengths {} and {}",
                f.parties,
                f.inputs.len(),
                f.outputs.len()
            )));
        }
        BellScenario::new(f.inputs, f.outputs)
    }
}

/// On-disk box format: scenario plus `"p/q"` strings in canonical order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BoxFile {
    pub scenario: ScenarioFile,
    pub entries: Vec<String>,
}

impl From<&BellBox> for BoxFile {
    fn from(b: &BellBox) -> Self {
        Self {
            scenario: ScenarioFile::from(&b.scenario),
            entries: b.entries.iter().map(format_rational).collect(),
        }
    }
}

impl TryFrom<BoxFile> for BellBox {
    type Error = Error;

    fn try_from(f: BoxFile) -> Result<Self> {
        let scenario = BellScenario::try_from(f.scenario)?;
        let entries = f
            .entries
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        BellBox::new(scenario, entries)
    }
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

fn check_family(parties: usize, outputs: usize, min_parties: usize) -> Result<()> {
    if parties < min_parties {
        return Err(Error::InvalidArgument(format!(
            "family needs at least {min_parties} parties, got {parties}"
        )));
    }
    if outputs < 2 {
        return Err(Error::InvalidArgument(format!("family needs k >= 2, got {outputs}")));
    }
    Ok(())
}

fn uniform_weight(outputs: usize, exponent: usize) -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(outputs).pow(exponent as u32))
}

/// Box on scenario `(n, 2, k)` with weight `1/k^(n-1)` on every event whose
/// outputs satisfy `sum(a) mod k == target(x)`.
fn modular_box(parties: usize, outputs: usize, target: impl Fn(&[usize]) -> usize) -> Result<BellBox> {
    let scenario = BellScenario::uniform(parties, 2, outputs)?;
    let w = uniform_weight(outputs, parties - 1);
    Ok(BellBox::from_fn(scenario, |a, x| {
        if a.iter().sum::<usize>() % outputs == target(x) {
            w.clone()
        } else {
            Rational::zero()
        }
    }))
}

/// Generalized PR box: `sum(a) mod k == prod(x)`.
pub fn pr_box(parties: usize, outputs: usize) -> Result<BellBox> {
    check_family(parties, outputs, 2)?;
    modular_box(parties, outputs, |x| x.iter().product())
}

/// Correlated box: `sum(a) mod k == 0` for every input.
pub fn correlated_box(parties: usize, outputs: usize) -> Result<BellBox> {
    check_family(parties, outputs, 1)?;
    modular_box(parties, outputs, |_| 0)
}

/// Completely noisy box on `(n, 2, k)`: every entry `1/k^n`.
pub fn noisy_box(parties: usize, outputs: usize) -> Result<BellBox> {
    check_family(parties, outputs, 1)?;
    let scenario = BellScenario::uniform(parties, 2, outputs)?;
    let w = uniform_weight(outputs, parties);
    Ok(BellBox::from_fn(scenario, |_, _| w.clone()))
}

/// Modified PR box on `parties` parties:
/// `sum(a) mod k == x_1 * (x_2 xor 1) * ... * (x_{N-1} xor 1) * x_N`.
pub fn modified_pr_box(parties: usize, outputs: usize) -> Result<BellBox> {
    check_family(parties, outputs, 2)?;
    modular_box(parties, outputs, |x| {
        let last = x.len() - 1;
        let middle: usize = x[1..last].iter().map(|&xi| xi ^ 1).product();
        x[0] * middle * x[last]
    })
}

/// Single-party deterministic box with two inputs that always outputs 0.
pub fn point_box(outputs: usize) -> Result<BellBox> {
    if outputs == 0 {
        return Err(Error::InvalidArgument("point box needs k >= 1".into()));
    }
    let scenario = BellScenario::uniform(1, 2, outputs)?;
    Ok(BellBox::from_fn(scenario, |a, _| {
        if a[0] == 0 {
            Rational::one()
        } else {
            Rational::zero()
        }
    }))
}

/// `eps * PR + (1 - eps) * noisy`.
pub fn isotropic_box(parties: usize, outputs: usize, eps: &Rational) -> Result<BellBox> {
    check_unit_interval(eps)?;
    mix(
        &[&pr_box(parties, outputs)?, &noisy_box(parties, outputs)?],
        &[eps.clone(), Rational::one() - eps],
    )
}

/// `eps * PR + (1 - eps) * correlated`, the family acted on by the two-copy wiring.
pub fn p_eps_box(parties: usize, outputs: usize, eps: &Rational) -> Result<BellBox> {
    check_unit_interval(eps)?;
    mix(
        &[&pr_box(parties, outputs)?, &correlated_box(parties, outputs)?],
        &[eps.clone(), Rational::one() - eps],
    )
}

pub(crate) fn check_unit_interval(eps: &Rational) -> Result<()> {
    if eps.is_negative() || *eps > Rational::one() {
        return Err(Error::InvalidArgument(format!("parameter {eps} outside [0, 1]")));
    }
    Ok(())
}

/// Local deterministic strategy: `outputs[i][x_i]` is party `i`'s answer.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub outputs: Vec<Vec<usize>>,
}

impl Strategy {
    pub fn check(&self, scenario: &BellScenario) -> Result<()> {
        if self.outputs.len() != scenario.parties() {
            return Err(Error::InvalidArgument(format!(
                "strategy covers {} parties, scenario has {}",
                self.outputs.len(),
                scenario.parties()
            )));
        }
        for (i, f) in self.outputs.iter().enumerate() {
            if f.len() != scenario.inputs()[i] {
                return Err(Error::InvalidArgument(format!(
                    "strategy of party {i} is defined on {} inputs, party has {}",
                    f.len(),
                    scenario.inputs()[i]
                )));
            }
            if let Some(&bad) = f.iter().find(|&&a| a >= scenario.outputs()[i]) {
                return Err(Error::InvalidArgument(format!(
                    "strategy of party {i} outputs {bad}, party has {} outputs",
                    scenario.outputs()[i]
                )));
            }
        }
        Ok(())
    }

    /// Event indices (one per joint input) where the deterministic box is 1.
    pub fn support(&self, scenario: &BellScenario) -> Vec<usize> {
        scenario
            .joint_inputs()
            .map(|x| {
                let a: Vec<usize> = x.iter().enumerate().map(|(i, &xi)| self.outputs[i][xi]).collect();
                scenario.index_of(&a, &x)
            })
            .collect()
    }
}

pub fn deterministic_box(scenario: &BellScenario, strategy: &Strategy) -> Result<BellBox> {
    strategy.check(scenario)?;
    let mut entries = vec![Rational::zero(); scenario.event_count()];
    for idx in strategy.support(scenario) {
        entries[idx] = Rational::one();
    }
    BellBox::new(scenario.clone(), entries)
}

/// Number of deterministic strategies, `prod k_i^(m_i)`, if it fits in `u128`.
pub fn deterministic_count(scenario: &BellScenario) -> Option<u128> {
    scenario
        .inputs()
        .iter()
        .zip(scenario.outputs())
        .try_fold(1u128, |acc, (&m, &k)| acc.checked_mul((k as u128).checked_pow(m as u32)?))
}

/// Every deterministic strategy, enumerated with party 0 and input 0 as the
/// most significant digits. The position in this list is the strategy id.
pub fn deterministic_strategies(scenario: &BellScenario) -> Vec<Strategy> {
    let radices: Vec<usize> = scenario
        .inputs()
        .iter()
        .zip(scenario.outputs())
        .flat_map(|(&m, &k)| std::iter::repeat_n(k, m))
        .collect();
    let mut out = Vec::new();
    for_each_tuple(&radices, |digits| {
        let mut rest = digits;
        let outputs = scenario
            .inputs()
            .iter()
            .map(|&m| {
                let (head, tail) = rest.split_at(m);
                rest = tail;
                head.to_vec()
            })
            .collect();
        out.push(Strategy { outputs });
    });
    out
}

// ---------------------------------------------------------------------------
// Algebra
// ---------------------------------------------------------------------------

/// Entrywise convex combination. Weights must be non-negative and sum to 1.
pub fn mix(boxes: &[&BellBox], weights: &[Rational]) -> Result<BellBox> {
    let first = boxes
        .first()
        .ok_or_else(|| Error::InvalidArgument("mix needs at least one box".into()))?;
    if boxes.len() != weights.len() {
        return Err(Error::InvalidArgument(format!(
            "{} boxes but {} weights",
            boxes.len(),
            weights.len()
        )));
    }
    if let Some(b) = boxes.iter().find(|b| b.scenario != first.scenario) {
        return Err(Error::ScenarioMismatch(format!(
            "cannot mix {:?} with {:?}",
            first.scenario, b.scenario
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(Error::InvalidArgument(format!("negative mixing weight {w}")));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidArgument(format!("mixing weights sum to {total}, not 1")));
    }
    let mut entries = vec![Rational::zero(); first.len()];
    for (b, w) in boxes.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (acc, p) in entries.iter_mut().zip(&b.entries) {
            *acc += p * w;
        }
    }
    BellBox::new(first.scenario.clone(), entries)
}

/// Product box; the parties of `a` come first.
pub fn tensor(a: &BellBox, b: &BellBox) -> BellBox {
    let scenario = a.scenario.concat(&b.scenario);
    let na = a.scenario.parties();
    BellBox::from_fn(scenario, |out, inp| {
        a.prob(&out[..na], &inp[..na]) * b.prob(&out[na..], &inp[na..])
    })
}

fn check_party_set(scenario: &BellScenario, parties: &[usize]) -> Result<()> {
    let n = scenario.parties();
    if parties.is_empty() {
        return Err(Error::InvalidArgument("party set is empty".into()));
    }
    if let Some(&p) = parties.iter().find(|&&p| p >= n) {
        return Err(Error::InvalidArgument(format!("party {p} out of range for {n} parties")));
    }
    if parties.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "party set {parties:?} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Marginal with the discarded parties' inputs pinned to `fixed` (full-length
/// input tuple; only discarded coordinates are read). No validity check.
pub fn marginal_at(b: &BellBox, keep: &[usize], fixed: &[usize]) -> Result<BellBox> {
    check_party_set(&b.scenario, keep)?;
    let s = &b.scenario;
    let kept = s.restrict(keep)?;
    let dropped: Vec<usize> = (0..s.parties()).filter(|p| !keep.contains(p)).collect();
    let dropped_k: Vec<usize> = dropped.iter().map(|&p| s.outputs()[p]).collect();
    let mut x = fixed.to_vec();
    let mut a = vec![0; s.parties()];
    Ok(BellBox::from_fn(kept, |ak, xk| {
        for (slot, &p) in keep.iter().enumerate() {
            x[p] = xk[slot];
            a[p] = ak[slot];
        }
        let mut sum = Rational::zero();
        for_each_tuple(&dropped_k, |ad| {
            for (slot, &p) in dropped.iter().enumerate() {
                a[p] = ad[slot];
            }
            sum += b.prob(&a, &x);
        });
        sum
    }))
}

/// Marginal over the kept parties (0-based, strictly increasing). Fails with
/// the violated constraint when the box is signaling.
pub fn marginalize(b: &BellBox, keep: &[usize]) -> Result<BellBox> {
    check_party_set(&b.scenario, keep)?;
    let report = validate(b);
    if let Some(v) = &report.no_signaling {
        return Err(Error::InvalidBox(format!("marginal is not well defined: {v}")));
    }
    marginal_at(b, keep, &vec![0; b.scenario.parties()])
}

/// Product-form test across the cut `side | complement`.
///
/// Returns the two cut marginals when the box equals their tensor product
/// (after reordering parties back), `None` otherwise.
pub fn check_product_form(b: &BellBox, side: &[usize]) -> Result<Option<(BellBox, BellBox)>> {
    check_party_set(&b.scenario, side)?;
    let n = b.scenario.parties();
    let other: Vec<usize> = (0..n).filter(|p| !side.contains(p)).collect();
    if other.is_empty() {
        return Err(Error::InvalidArgument("cut must leave parties on both sides".into()));
    }
    let left = marginalize(b, side)?;
    let right = marginalize(b, &other)?;
    let s = &b.scenario;
    let mut al = vec![0; side.len()];
    let mut xl = vec![0; side.len()];
    let mut ar = vec![0; other.len()];
    let mut xr = vec![0; other.len()];
    for e in s.events() {
        for (slot, &p) in side.iter().enumerate() {
            al[slot] = e.outputs[p];
            xl[slot] = e.inputs[p];
        }
        for (slot, &p) in other.iter().enumerate() {
            ar[slot] = e.outputs[p];
            xr[slot] = e.inputs[p];
        }
        if *b.prob(&e.outputs, &e.inputs) != left.prob(&al, &xl) * right.prob(&ar, &xr) {
            return Ok(None);
        }
    }
    Ok(Some((left, right)))
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Negative {
        outputs: Vec<usize>,
        inputs: Vec<usize>,
        value: String,
    },
    Normalization {
        inputs: Vec<usize>,
        total: String,
    },
    /// Varying `party`'s input from `inputs[party]` to `alt_input` changes the
    /// marginal of the others at `outputs` (entry `party` is summed over).
    NoSignaling {
        party: usize,
        inputs: Vec<usize>,
        alt_input: usize,
        outputs: Vec<usize>,
        lhs: String,
        rhs: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { outputs, inputs, value } => {
                write!(f, "P({outputs:?}|{inputs:?}) = {value} is negative")
            }
            Violation::Normalization { inputs, total } => {
                write!(f, "outputs for inputs {inputs:?} sum to {total}, not 1")
            }
            Violation::NoSignaling { party, inputs, alt_input, outputs, lhs, rhs } => write!(
                f,
                "party {party} signals: marginal at outputs {outputs:?} is {lhs} for inputs {inputs:?} \
                 but {rhs} with its input changed to {alt_input}"
            ),
        }
    }
}

/// Outcome of checking all three constraint classes. `None` means the class
/// passed; otherwise the first violation in canonical order is reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub nonnegativity: Option<Violation>,
    pub normalization: Option<Violation>,
    pub no_signaling: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.nonnegativity.is_none() && self.normalization.is_none() && self.no_signaling.is_none()
    }

    pub fn into_result(self) -> Result<()> {
        match [self.nonnegativity, self.normalization, self.no_signaling].into_iter().flatten().next() {
            Some(v) => Err(Error::InvalidBox(v.to_string())),
            None => Ok(()),
        }
    }
}

pub fn validate(b: &BellBox) -> ValidationReport {
    let s = &b.scenario;
    let nonnegativity = s
        .events()
        .zip(&b.entries)
        .find(|(_, p)| p.is_negative())
        .map(|(e, p)| Violation::Negative {
            outputs: e.outputs,
            inputs: e.inputs,
            value: format_rational(p),
        });

    let k = s.output_count();
    let normalization = b.entries.chunks(k).enumerate().find_map(|(xi, row)| {
        let total: Rational = row.iter().sum();
        (!total.is_one()).then(|| Violation::Normalization {
            inputs: s.input_at(xi),
            total: format_rational(&total),
        })
    });

    let no_signaling = first_signaling_violation(b);
    ValidationReport { nonnegativity, normalization, no_signaling }
}

fn first_signaling_violation(b: &BellBox) -> Option<Violation> {
    let s = &b.scenario;
    for party in 0..s.parties() {
        let m = s.inputs()[party];
        let k = s.outputs()[party];
        for x in s.joint_inputs() {
            for alt in (x[party] + 1)..m {
                let mut x_alt = x.clone();
                x_alt[party] = alt;
                for a in s.joint_outputs() {
                    if a[party] != 0 {
                        continue;
                    }
                    let mut a_var = a.clone();
                    let mut lhs = Rational::zero();
                    let mut rhs = Rational::zero();
                    for ai in 0..k {
                        a_var[party] = ai;
                        lhs += b.prob(&a_var, &x);
                        rhs += b.prob(&a_var, &x_alt);
                    }
                    if lhs != rhs {
                        return Some(Violation::NoSignaling {
                            party,
                            inputs: x,
                            alt_input: alt,
                            outputs: a,
                            lhs: format_rational(&lhs),
                            rhs: format_rational(&rhs),
                        });
                    }
                }
            }
        }
    }
    None
}

/// Convenience for tests and examples: `p/q` as a rational.
pub fn r(numer: i64, denom: i64) -> Rational {
    rat(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(a: &[usize], x: &[usize]) -> Event {
        Event::new(a.to_vec(), x.to_vec())
    }

    #[test]
    fn pr_box_entries() {
        let pr = pr_box(2, 2).unwrap();
        assert_eq!(*pr.get(&ev(&[0, 0], &[0, 0])).unwrap(), r(1, 2));
        assert_eq!(*pr.get(&ev(&[0, 1], &[0, 0])).unwrap(), r(0, 1));
        assert_eq!(*pr.get(&ev(&[0, 1], &[1, 1])).unwrap(), r(1, 2));
        assert_eq!(*pr.get(&ev(&[0, 0], &[1, 1])).unwrap(), r(0, 1));

        let pr23 = pr_box(2, 3).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if (a + b) % 3 == 1 { r(1, 3) } else { r(0, 1) };
                assert_eq!(*pr23.prob(&[a, b], &[1, 1]), expected);
            }
        }

        let pr32 = pr_box(3, 2).unwrap();
        for e in pr32.scenario().events() {
            let win = e.outputs.iter().sum::<usize>() % 2 == e.inputs.iter().product::<usize>();
            let expected = if win { r(1, 4) } else { r(0, 1) };
            assert_eq!(*pr32.prob(&e.outputs, &e.inputs), expected);
        }
    }

    #[test]
    fn other_families() {
        let c = correlated_box(2, 2).unwrap();
        for x in c.scenario().joint_inputs() {
            assert_eq!(*c.prob(&[0, 0], &x), r(1, 2));
            assert_eq!(*c.prob(&[1, 1], &x), r(1, 2));
            assert_eq!(*c.prob(&[0, 1], &x), r(0, 1));
        }
        assert!(noisy_box(2, 2).unwrap().entries().iter().all(|p| *p == r(1, 4)));

        let m = modified_pr_box(3, 2).unwrap();
        for e in m.scenario().events() {
            let (a, x) = (&e.outputs, &e.inputs);
            let win = (a[0] ^ a[1] ^ a[2]) == x[0] * (x[1] ^ 1) * x[2];
            assert_eq!(m.prob(a, x).is_zero(), !win);
        }
        for b in [c, m, noisy_box(3, 3).unwrap(), pr_box(3, 3).unwrap(), point_box(3).unwrap()] {
            assert!(validate(&b).is_valid());
        }
    }

    #[test]
    fn family_parameter_checks() {
        assert!(pr_box(1, 2).is_err());
        assert!(pr_box(2, 1).is_err());
        assert!(isotropic_box(2, 2, &r(3, 2)).is_err());
        assert!(p_eps_box(2, 2, &r(-1, 2)).is_err());
    }

    #[test]
    fn deterministic_boxes() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let zero = deterministic_box(&s, &Strategy { outputs: vec![vec![0, 0], vec![0, 0]] }).unwrap();
        for x in s.joint_inputs() {
            assert!(zero.prob(&[0, 0], &x).is_one());
        }
        let copy = deterministic_box(&s, &Strategy { outputs: vec![vec![0, 1], vec![0, 0]] }).unwrap();
        assert_eq!(copy.entries().iter().filter(|p| p.is_one()).count(), 4);
        for x in s.joint_inputs() {
            assert!(copy.prob(&[x[0], 0], &x).is_one());
        }
        let all = deterministic_strategies(&s);
        assert_eq!(all.len(), 16);
        assert_eq!(deterministic_count(&s), Some(16));
        let distinct: std::collections::HashSet<_> =
            all.iter().map(|st| deterministic_box(&s, st).unwrap().entries().to_vec()).collect();
        assert_eq!(distinct.len(), 16);

        assert!(deterministic_box(&s, &Strategy { outputs: vec![vec![0], vec![0, 0]] }).is_err());
        assert!(deterministic_box(&s, &Strategy { outputs: vec![vec![0, 2], vec![0, 0]] }).is_err());
    }

    #[test]
    fn mixing() {
        let pr = pr_box(2, 2).unwrap();
        let corr = correlated_box(2, 2).unwrap();
        let noisy = noisy_box(2, 2).unwrap();
        let half = mix(&[&pr, &corr], &[r(1, 2), r(1, 2)]).unwrap();
        assert_eq!(*half.prob(&[0, 0], &[1, 1]), r(1, 4));
        assert_eq!(mix(&[&pr], &[r(1, 1)]).unwrap(), pr);
        let m = mix(&[&pr, &noisy], &[r(3, 4), r(1, 4)]).unwrap();
        assert_eq!(*m.prob(&[0, 0], &[0, 0]), r(7, 16));

        assert!(mix(&[&pr, &corr], &[r(1, 2), r(1, 3)]).is_err());
        assert!(mix(&[&pr, &corr], &[r(3, 2), r(-1, 2)]).is_err());
        assert!(mix(&[&pr, &pr_box(2, 3).unwrap()], &[r(1, 2), r(1, 2)]).is_err());
        assert!(mix(&[], &[]).is_err());
    }

    #[test]
    fn tensor_and_marginals() {
        let pr = pr_box(2, 2).unwrap();
        let t = tensor(&pr, &point_box(2).unwrap());
        assert_eq!(t.scenario().parties(), 3);
        for e in pr.scenario().events() {
            for z in 0..2 {
                let a = [e.outputs[0], e.outputs[1], 0];
                let x = [e.inputs[0], e.inputs[1], z];
                assert_eq!(t.prob(&a, &x), pr.prob(&e.outputs, &e.inputs));
            }
        }
        let halved = tensor(&pr, &noisy_box(1, 2).unwrap());
        for e in halved.scenario().events() {
            let base = pr.prob(&e.outputs[..2], &e.inputs[..2]);
            assert_eq!(*halved.prob(&e.outputs, &e.inputs), base * r(1, 2));
        }
        assert_eq!(marginalize(&t, &[0, 1]).unwrap(), pr);

        let alice = marginalize(&pr, &[0]).unwrap();
        assert!(alice.entries().iter().all(|p| *p == r(1, 2)));
    }

    #[test]
    fn product_form() {
        let pr = pr_box(2, 2).unwrap();
        let t = tensor(&pr, &point_box(2).unwrap());
        let (left, right) = check_product_form(&t, &[0, 1]).unwrap().unwrap();
        assert_eq!(left, pr);
        assert_eq!(right, point_box(2).unwrap());
        assert!(check_product_form(&pr, &[0]).unwrap().is_none());
        assert!(check_product_form(&pr, &[0, 1]).is_err());
    }

    #[test]
    fn validation_reports_each_class() {
        assert!(validate(&pr_box(2, 2).unwrap()).is_valid());

        // Alice answers 0 except at x = (0, 1) where she answers 1: Bob's input
        // changes her marginal.
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let signaling = BellBox::from_fn(s.clone(), |a, x| {
            let alice = usize::from(x == [0, 1]);
            if a == [alice, 0] {
                r(1, 1)
            } else {
                r(0, 1)
            }
        });
        assert!(signaling.prob(&[0, 0], &[0, 0]).is_one());
        assert!(signaling.prob(&[0, 0], &[0, 1]).is_zero());
        let report = validate(&signaling);
        assert!(report.nonnegativity.is_none());
        assert!(report.normalization.is_none());
        match report.no_signaling {
            Some(Violation::NoSignaling { party, .. }) => assert_eq!(party, 1),
            other => panic!("expected a signaling violation, got {other:?}"),
        }
        assert!(marginalize(&signaling, &[0]).is_err());

        let doubled = BellBox::new(s.clone(), pr_box(2, 2).unwrap().entries().iter().map(|p| p * r(2, 1)).collect()).unwrap();
        let report = validate(&doubled);
        assert!(matches!(report.normalization, Some(Violation::Normalization { .. })));
        assert!(report.nonnegativity.is_none());
        assert!(report.no_signaling.is_none());

        let mut neg = noisy_box(2, 2).unwrap().into_entries();
        neg[0] = r(-1, 4);
        neg[1] = r(3, 4);
        let report = validate(&BellBox::new(s, neg).unwrap());
        assert!(report.nonnegativity.is_some());
        assert!(!report.is_valid());
    }

    #[test]
    fn json_round_trip_and_strictness() {
        let pr = pr_box(2, 3).unwrap();
        let text = pr.to_json();
        assert_eq!(BellBox::from_json(&text).unwrap(), pr);
        assert!(text.contains("\"0/1\""));

        let bad = text.replacen("\"1/3\"", "\"2/6\"", 1);
        assert!(BellBox::from_json(&bad).is_err());
        let bad = text.replacen("\"1/3\"", "\"-1/-3\"", 1);
        assert!(BellBox::from_json(&bad).is_err());
        let short = r#"{"scenario":{"parties":1,"inputs":[1],"outputs":[2]},"entries":["1/1"]}"#;
        assert!(BellBox::from_json(short).is_err());
        let mismatched = r#"{"scenario":{"parties":2,"inputs":[1],"outputs":[2]},"entries":["1/1","0/1"]}"#;
        assert!(BellBox::from_json(mismatched).is_err());
    }
}
