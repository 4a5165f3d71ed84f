//! Bell scenarios and the canonical event order.
//!
//! Events are indexed inputs-major: `index = X * prod(k) + A`, where
//! `X = sum_i x_i * prod_{j>i} m_j` and `A = sum_i a_i * prod_{j>i} k_j`.
//! Party 0 is the most significant digit in both blocks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BellScenario {
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

/// A joint outcome `(a | x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub outputs: Vec<usize>,
    pub inputs: Vec<usize>,
}

impl Event {
    pub fn new(outputs: Vec<usize>, inputs: Vec<usize>) -> Self {
        Self { outputs, inputs }
    }
}

/// Builds a scenario from per-party counts. A one-element list is broadcast
/// to all `n` parties.
pub fn make_scenario(parties: usize, inputs: &[usize], outputs: &[usize]) -> Result<BellScenario> {
    if parties == 0 {
        return Err(Error::Scenario("a Bell scenario needs at least one party".into()));
    }
    let broadcast = |what: &str, list: &[usize]| -> Result<Vec<usize>> {
        match list.len() {
            1 => Ok(vec![list[0]; parties]),
            len if len == parties => Ok(list.to_vec()),
            len => Err(Error::Scenario(format!(
                "{what} list has length {len}, expected 1 or {parties}"
            ))),
        }
    };
    BellScenario::new(broadcast("inputs", inputs)?, broadcast("outputs", outputs)?)
}

impl BellScenario {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Scenario("a Bell scenario needs at least one party".into()));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::Scenario(format!(
                "{} input counts but {} output counts",
                inputs.len(),
                outputs.len()
            )));
        }
        if let Some(i) = inputs.iter().position(|&m| m == 0) {
            return Err(Error::Scenario(format!("party {i} has zero inputs")));
        }
        if let Some(i) = outputs.iter().position(|&k| k == 0) {
            return Err(Error::Scenario(format!("party {i} has zero outputs")));
        }
        let scenario = Self { inputs, outputs };
        scenario
            .inputs
            .iter()
            .chain(&scenario.outputs)
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .ok_or_else(|| Error::Scenario("event count overflows usize".into()))?;
        Ok(scenario)
    }

    pub fn uniform(parties: usize, inputs: usize, outputs: usize) -> Result<Self> {
        make_scenario(parties, &[inputs], &[outputs])
    }

    pub fn parties(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    /// Number of joint inputs, `prod m_i`.
    pub fn input_count(&self) -> usize {
        self.inputs.iter().product()
    }

    /// Number of joint outputs, `prod k_i`.
    pub fn output_count(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn event_count(&self) -> usize {
        self.input_count() * self.output_count()
    }

    /// `(m, k)` when every party has the same counts.
    pub fn uniform_counts(&self) -> Option<(usize, usize)> {
        let m = self.inputs[0];
        let k = self.outputs[0];
        (self.inputs.iter().all(|&x| x == m) && self.outputs.iter().all(|&x| x == k))
            .then_some((m, k))
    }

    pub fn input_index(&self, x: &[usize]) -> usize {
        mixed_radix_index(x, &self.inputs)
    }

    pub fn output_index(&self, a: &[usize]) -> usize {
        mixed_radix_index(a, &self.outputs)
    }

    pub fn input_at(&self, index: usize) -> Vec<usize> {
        mixed_radix_digits(index, &self.inputs)
    }

    pub fn output_at(&self, index: usize) -> Vec<usize> {
        mixed_radix_digits(index, &self.outputs)
    }

    /// Index from raw digit slices; callers guarantee the digits are in range.
    pub fn index_of(&self, a: &[usize], x: &[usize]) -> usize {
        self.input_index(x) * self.output_count() + self.output_index(a)
    }

    pub fn event_index(&self, event: &Event) -> Result<usize> {
        self.check_event(event)?;
        Ok(self.index_of(&event.outputs, &event.inputs))
    }

    pub fn event_at(&self, index: usize) -> Result<Event> {
        if index >= self.event_count() {
            return Err(Error::Event(format!(
                "index {index} out of range for {} events",
                self.event_count()
            )));
        }
        let k = self.output_count();
        Ok(Event::new(self.output_at(index % k), self.input_at(index / k)))
    }

    pub fn check_event(&self, event: &Event) -> Result<()> {
        let n = self.parties();
        if event.outputs.len() != n || event.inputs.len() != n {
            return Err(Error::Event(format!(
                "event has {} outputs and {} inputs, scenario has {n} parties",
                event.outputs.len(),
                event.inputs.len()
            )));
        }
        for i in 0..n {
            if event.inputs[i] >= self.inputs[i] {
                return Err(Error::Event(format!(
                    "input {} of party {i} out of range (m = {})",
                    event.inputs[i], self.inputs[i]
                )));
            }
            if event.outputs[i] >= self.outputs[i] {
                return Err(Error::Event(format!(
                    "output {} of party {i} out of range (k = {})",
                    event.outputs[i], self.outputs[i]
                )));
            }
        }
        Ok(())
    }

    /// All joint inputs in canonical order.
    pub fn joint_inputs(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.input_count()).map(|i| self.input_at(i))
    }

    /// All joint outputs in canonical order.
    pub fn joint_outputs(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.output_count()).map(|i| self.output_at(i))
    }

    /// All events in canonical order.
    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        let k = self.output_count();
        (0..self.event_count()).map(move |i| Event::new(self.output_at(i % k), self.input_at(i / k)))
    }

    /// Scenario restricted to the given parties (in the given order).
    pub fn restrict(&self, parties: &[usize]) -> Result<Self> {
        Self::new(
            parties.iter().map(|&p| self.inputs[p]).collect(),
            parties.iter().map(|&p| self.outputs[p]).collect(),
        )
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut inputs = self.inputs.clone();
        inputs.extend_from_slice(&other.inputs);
        let mut outputs = self.outputs.clone();
        outputs.extend_from_slice(&other.outputs);
        Self { inputs, outputs }
    }
}

pub(crate) fn mixed_radix_index(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

pub(crate) fn mixed_radix_digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

/// Odometer over all tuples of the given radices, last digit fastest.
pub(crate) fn for_each_tuple(radices: &[usize], mut f: impl FnMut(&[usize])) {
    let total: usize = radices.iter().product();
    let mut digits = vec![0; radices.len()];
    for _ in 0..total {
        f(&digits);
        for pos in (0..radices.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < radices[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_counts() {
        assert_eq!(make_scenario(2, &[2, 2], &[2, 2]).unwrap().event_count(), 16);
        assert_eq!(make_scenario(3, &[2], &[2]).unwrap().event_count(), 64);
        assert_eq!(make_scenario(2, &[2, 2], &[2, 3]).unwrap().event_count(), 24);
    }

    #[test]
    fn rejects_bad_scenarios() {
        assert!(make_scenario(0, &[2], &[2]).is_err());
        assert!(make_scenario(2, &[2, 0], &[2]).is_err());
        assert!(make_scenario(2, &[2], &[0]).is_err());
        assert!(make_scenario(3, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn canonical_indices() {
        let s = BellScenario::uniform(2, 2, 2).unwrap();
        let idx = |a: [usize; 2], x: [usize; 2]| s.event_index(&Event::new(a.to_vec(), x.to_vec())).unwrap();
        assert_eq!(idx([0, 0], [0, 0]), 0);
        assert_eq!(idx([1, 1], [1, 1]), 15);
        assert_eq!(idx([0, 1], [1, 0]), 9);
    }

    #[test]
    fn out_of_range_events_rejected() {
        let s = BellScenario::uniform(2, 2, 3).unwrap();
        assert!(s.event_index(&Event::new(vec![3, 0], vec![0, 0])).is_err());
        assert!(s.event_index(&Event::new(vec![0, 0], vec![2, 0])).is_err());
        assert!(s.event_index(&Event::new(vec![0], vec![0])).is_err());
        assert!(s.event_at(36).is_err());
    }

    #[test]
    fn index_round_trip_non_uniform() {
        let s = BellScenario::new(vec![2, 3, 1], vec![3, 2, 2]).unwrap();
        for i in 0..s.event_count() {
            let e = s.event_at(i).unwrap();
            assert_eq!(s.event_index(&e).unwrap(), i);
        }
        assert_eq!(s.events().count(), s.event_count());
    }

    #[test]
    fn odometer_matches_digits() {
        let radices = [2, 3, 2];
        let mut seen = Vec::new();
        for_each_tuple(&radices, |d| seen.push(d.to_vec()));
        let expected: Vec<_> = (0..12).map(|i| mixed_radix_digits(i, &radices)).collect();
        assert_eq!(seen, expected);
    }
}
