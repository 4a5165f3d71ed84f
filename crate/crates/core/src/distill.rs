//! Two-copy distillation wiring for the family `P_eps = eps PR + (1 - eps) C`
//! and the non-local extension of the isotropic box.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::boxes::{
    check_unit_interval, isotropic_box, marginalize, mix, modified_pr_box, p_eps_box, point_box, pr_box, tensor,
    validate, BellBox,
};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};
use crate::scenario::BellScenario;

#[derive(Clone, Debug)]
pub struct WiringOutcome {
    pub input_box: BellBox,
    pub output_box: BellBox,
    /// Family parameter of the output, when it lies in the `P_eps` family.
    pub family_parameter: Option<Rational>,
}

/// Exact composition of two copies of `b`: each party feeds `x_i` to the
/// first box, then `x_i` to the second box if its first output was 0 and
/// input 0 otherwise, and answers the sum of both outputs mod `k_i`.
pub fn wire_d2(b: &BellBox) -> Result<WiringOutcome> {
    let s = b.scenario();
    if s.inputs().iter().any(|&m| m != 2) {
        return Err(Error::InvalidArgument("the two-copy wiring needs binary inputs".into()));
    }
    validate(b).into_result()?;
    let n = s.parties();
    let ks = s.outputs();
    let kk = s.output_count();
    let mut out = vec![Rational::zero(); s.event_count()];
    for x in s.joint_inputs() {
        let xi = s.input_index(&x);
        for a1_idx in 0..kk {
            let p1 = &b.entries()[xi * kk + a1_idx];
            if p1.is_zero() {
                continue;
            }
            let a1 = s.output_at(a1_idx);
            let x2: Vec<usize> = (0..n).map(|i| if a1[i] == 0 { x[i] } else { 0 }).collect();
            let x2i = s.input_index(&x2);
            for a2_idx in 0..kk {
                let p2 = &b.entries()[x2i * kk + a2_idx];
                if p2.is_zero() {
                    continue;
                }
                let a2 = s.output_at(a2_idx);
                let a: Vec<usize> = (0..n).map(|i| (a1[i] + a2[i]) % ks[i]).collect();
                out[xi * kk + s.output_index(&a)] += p1 * p2;
            }
        }
    }
    let output_box = BellBox::new(s.clone(), out)?;
    let family_parameter = match s.uniform_counts() {
        Some((_, k)) => extract_family_parameter(&output_box, n, k),
        None => None,
    };
    Ok(WiringOutcome { input_box: b.clone(), output_box, family_parameter })
}

/// `eps` such that `b == eps PR + (1 - eps) C` exactly, if any.
pub fn extract_family_parameter(b: &BellBox, parties: usize, outputs: usize) -> Option<Rational> {
    let s = BellScenario::uniform(parties, 2, outputs).ok()?;
    if b.scenario() != &s || parties == 0 || outputs < 2 {
        return None;
    }
    // At x = (1, ..., 1) the PR box puts 1/k^(n-1) on sum(a) = 1 and the
    // correlated box puts nothing there.
    let x = vec![1; parties];
    let mut a = vec![0; parties];
    a[0] = 1;
    let weight = Rational::new(BigInt::one(), BigInt::from(outputs).pow(parties as u32 - 1));
    let eps = b.prob(&a, &x) / weight;
    if eps > Rational::one() {
        return None;
    }
    match p_eps_box(parties, outputs, &eps) {
        Ok(candidate) if candidate.entries() == b.entries() => Some(eps),
        _ => None,
    }
}

/// `eps' = eps (K + 1 - eps) / K` with `K = k^(n-1)`, in lowest terms.
pub fn recurrence_step(eps: &Rational, parties: usize, outputs: usize) -> Rational {
    let k = BigInt::from(outputs).pow(parties as u32 - 1);
    let (p, q) = (eps.numer(), eps.denom());
    let numer = p * (&k * q + q - p);
    let denom = &k * q * q;
    // gcd(p, q) = 1 makes the numerator coprime to q^2, so any common factor
    // divides K.
    let g = (&numer % &k).gcd(&k);
    Rational::new_raw(numer / &g, denom / &g)
}

#[derive(Clone, Debug)]
pub struct DistillTrace {
    pub parties: usize,
    pub outputs: usize,
    pub epsilons: Vec<Rational>,
    /// Rounds whose value was reproduced by running the wiring on the box.
    pub cross_checked_rounds: usize,
}

impl DistillTrace {
    pub fn last(&self) -> &Rational {
        self.epsilons.last().expect("trace includes the starting value")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "parties": self.parties,
            "outputs": self.outputs,
            "epsilons": self.epsilons.iter().map(format_rational).collect::<Vec<_>>(),
            "cross_checked_rounds": self.cross_checked_rounds,
        })
    }
}

/// Denominator size (bits) up to which each round is also run through
/// [`wire_d2`] on the explicit box.
pub const CROSS_CHECK_BITS: u64 = 4096;
/// Denominator size beyond which the schedule stops with a capacity error.
pub const MAX_DENOMINATOR_BITS: u64 = 1 << 26;

/// `rounds` iterations of the recurrence from `eps0`.
pub fn distill_schedule(eps0: &Rational, parties: usize, outputs: usize, rounds: usize) -> Result<DistillTrace> {
    check_unit_interval(eps0)?;
    if parties < 2 || outputs < 2 {
        return Err(Error::InvalidArgument("distillation needs n >= 2 and k >= 2".into()));
    }
    let mut epsilons = vec![eps0.clone()];
    let mut cross_checked_rounds = 0;
    let mut checking = true;
    for _ in 0..rounds {
        let eps = epsilons.last().expect("non-empty");
        if eps.denom().bits() > MAX_DENOMINATOR_BITS / 2 {
            return Err(Error::Capacity {
                what: "distillation denominator bits",
                count: (2 * eps.denom().bits()).to_string(),
                cap: MAX_DENOMINATOR_BITS,
            });
        }
        let next = recurrence_step(eps, parties, outputs);
        checking &= eps.denom().bits() <= CROSS_CHECK_BITS;
        if checking {
            let wired = wire_d2(&p_eps_box(parties, outputs, eps)?)?;
            if wired.family_parameter.as_ref() != Some(&next) {
                return Err(Error::Consistency(format!(
                    "wiring gave {:?}, recurrence gave {}",
                    wired.family_parameter.map(|e| format_rational(&e)),
                    format_rational(&next)
                )));
            }
            cross_checked_rounds += 1;
        }
        epsilons.push(next);
    }
    Ok(DistillTrace { parties, outputs, epsilons, cross_checked_rounds })
}

#[derive(Clone, Debug)]
pub struct ExtensionBox {
    pub parties: usize,
    pub outputs: usize,
    pub epsilon: Rational,
    /// `(n + 1)`-party box.
    pub extension: BellBox,
    /// Its marginal on the first `n` parties.
    pub marginal: BellBox,
    pub cut_value: Rational,
}

/// `eps PR_n (x) point + (1 - eps) modified PR_(n+1)`, whose marginal on the
/// first `n` parties is the isotropic box with parameter `eps`.
pub fn build_extension(parties: usize, outputs: usize, eps: &Rational) -> Result<ExtensionBox> {
    if parties < 2 || outputs < 2 {
        return Err(Error::InvalidArgument("extension needs n >= 2 and k >= 2".into()));
    }
    if eps.is_negative() || *eps >= Rational::one() {
        return Err(Error::InvalidArgument(format!("epsilon {eps} outside [0, 1)")));
    }
    let product = tensor(&pr_box(parties, outputs)?, &point_box(outputs)?);
    let modified = modified_pr_box(parties + 1, outputs)?;
    let extension = mix(&[&product, &modified], &[eps.clone(), Rational::one() - eps])?;
    validate(&extension).into_result()?;
    let keep: Vec<usize> = (0..parties).collect();
    let marginal = marginalize(&extension, &keep)?;
    if marginal != isotropic_box(parties, outputs, eps)? {
        return Err(Error::Consistency("extension marginal is not the isotropic box".into()));
    }
    let mut e = ExtensionBox {
        parties,
        outputs,
        epsilon: eps.clone(),
        extension,
        marginal,
        cut_value: Rational::zero(),
    };
    e.cut_value = bipartite_cut_value(&e);
    Ok(e)
}

/// Bipartite box across the cut: `A` uses input `(x, 0, ..., 0)` and
/// answers `sum_i a_i mod k`; `E` is the added party.
pub fn cut_box(e: &ExtensionBox) -> BellBox {
    let k = e.outputs;
    let s = BellScenario::uniform(2, 2, k).expect("valid scenario");
    let big = e.extension.scenario();
    let n = e.parties;
    let mut entries = vec![Rational::zero(); s.event_count()];
    for idx in 0..big.event_count() {
        let ev = big.event_at(idx).expect("index in range");
        if ev.inputs[1..n].iter().any(|&xi| xi != 0) {
            continue;
        }
        let a = ev.outputs[..n].iter().sum::<usize>() % k;
        let target = s.index_of(&[a, ev.outputs[n]], &[ev.inputs[0], ev.inputs[n]]);
        entries[target] += &e.extension.entries()[idx];
    }
    BellBox::new(s, entries).expect("length matches")
}

/// `sum_{x, z} Pr[a + e = x z mod k]` with inputs `(x, 0, ..., 0, z)`.
pub fn bipartite_cut_value(e: &ExtensionBox) -> Rational {
    let q = cut_box(e);
    let s = q.scenario();
    let k = e.outputs;
    (0..s.event_count())
        .filter(|&i| {
            let ev = s.event_at(i).expect("index in range");
            (ev.outputs[0] + ev.outputs[1]) % k == (ev.inputs[0] * ev.inputs[1]) % k
        })
        .map(|i| &q.entries()[i])
        .sum()
}
