//! Polynomial witnesses: signed sums of products of probability atoms drawn
//! from named behaviors. A witness certifies nonclassicality when it is
//! provably nonnegative on all classically compatible table collections but
//! evaluates negative on the observed ones.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped when a witness is built.
pub const COEF_FLOOR: f64 = 1e-12;

/// A single outcome or a set of outcomes to be summed over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventValue {
    Val(usize),
    Set(Vec<usize>),
}

impl EventValue {
    fn values(&self) -> Vec<usize> {
        match self {
            EventValue::Val(v) => vec![*v],
            EventValue::Set(vs) => vs.clone(),
        }
    }
}

/// One probability reference: a named table and a (possibly marginal,
/// possibly set-valued) event on its parties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessAtom {
    pub table: String,
    pub event: BTreeMap<String, EventValue>,
}

impl WitnessAtom {
    pub fn new(table: &str, event: &[(&str, EventValue)]) -> Self {
        WitnessAtom {
            table: table.into(),
            event: event
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
        }
    }

    /// Marginal probability of the event, summing set entries and all
    /// unmentioned parties.
    pub fn evaluate(&self, knowns: &BTreeMap<String, &Behavior>) -> Result<f64> {
        let behavior = knowns
            .get(&self.table)
            .ok_or_else(|| Error::UnknownAtomReference(self.table.clone()))?;
        if !behavior.given().is_empty() {
            return Err(Error::UnknownAtomReference(format!(
                "table `{}` is input-conditioned; witness atoms need unconditioned tables",
                self.table
            )));
        }
        for name in self.event.keys() {
            if behavior.party_index(name).is_none() {
                return Err(Error::UnknownAtomReference(format!(
                    "party `{name}` not in table `{}`",
                    self.table
                )));
            }
        }
        let parties: Vec<&String> = self.event.keys().collect();
        let value_lists: Vec<Vec<usize>> = self.event.values().map(EventValue::values).collect();
        let mut total = 0.0;
        let mut index = vec![0usize; parties.len()];
        loop {
            let assignment: Vec<(&str, usize)> = parties
                .iter()
                .zip(&index)
                .map(|(p, &i)| (p.as_str(), value_lists[parties.iter().position(|q| q == p).unwrap()][i]))
                .collect();
            total += behavior.event_prob(&assignment, &[])?;
            // Advance the mixed-radix counter over the set sizes.
            let mut done = true;
            for k in (0..index.len()).rev() {
                index[k] += 1;
                if index[k] < value_lists[k].len() {
                    done = false;
                    break;
                }
                index[k] = 0;
            }
            if done {
                break;
            }
        }
        Ok(total)
    }
}

/// `coefficient × Π atoms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTerm {
    pub coef: f64,
    pub atoms: Vec<WitnessAtom>,
}

/// A signed sum of products of probability atoms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WitnessPolynomial {
    pub terms: Vec<WitnessTerm>,
}

impl WitnessPolynomial {
    /// Drops terms with negligible coefficients.
    pub fn new(terms: Vec<WitnessTerm>) -> Self {
        WitnessPolynomial {
            terms: terms
                .into_iter()
                .filter(|t| t.coef.abs() >= COEF_FLOOR)
                .collect(),
        }
    }

    pub fn evaluate(&self, knowns: &BTreeMap<String, &Behavior>) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.terms {
            let mut prod = term.coef;
            for atom in &term.atoms {
                prod *= atom.evaluate(knowns)?;
            }
            total += prod;
        }
        Ok(total)
    }

    /// Rescale so the largest absolute coefficient is `target`.
    pub fn normalized(&self, target: f64) -> Self {
        let max = self
            .terms
            .iter()
            .map(|t| t.coef.abs())
            .fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        WitnessPolynomial {
            terms: self
                .terms
                .iter()
                .map(|t| WitnessTerm {
                    coef: t.coef * target / max,
                    atoms: t.atoms.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("witness serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The closed-form witness for the four-outcome family at u = 0.85, written
/// against the `obs` table over (A,B,C) and the `int` table of the γ->A
/// split. Nonnegative for every pair of tables a single classical triangle
/// model can produce; negative on the quantum pair.
pub fn rgb4_analytic_witness() -> WitnessPolynomial {
    use EventValue::{Set, Val};
    let obs = |event: &[(&str, EventValue)]| WitnessAtom::new("obs", event);
    let int = |event: &[(&str, EventValue)]| WitnessAtom::new("int", event);
    let term = |coef: f64, atoms: Vec<WitnessAtom>| WitnessTerm { coef, atoms };

    WitnessPolynomial::new(vec![
        // P_obs(a=3, c∈{1,2})
        term(1.0, vec![obs(&[("A", Val(3)), ("C", Set(vec![1, 2]))])]),
        // -P_int(3, 2, {0,1})
        term(-1.0, vec![int(&[("A", Val(3)), ("B", Val(2)), ("C", Set(vec![0, 1]))])]),
        // -P_int(3, 0, {1,2})
        term(-1.0, vec![int(&[("A", Val(3)), ("B", Val(0)), ("C", Set(vec![1, 2]))])]),
        // +P_obs(b=2) P_obs(a=3)^2
        term(
            1.0,
            vec![
                obs(&[("B", Val(2))]),
                obs(&[("A", Val(3))]),
                obs(&[("A", Val(3))]),
            ],
        ),
        // +P_obs(a=3) P_obs({0,2}, 0, {1,3})
        term(
            1.0,
            vec![
                obs(&[("A", Val(3))]),
                obs(&[("A", Set(vec![0, 2])), ("B", Val(0)), ("C", Set(vec![1, 3]))]),
            ],
        ),
        // -2 P_int(3,2,2)
        term(-2.0, vec![int(&[("A", Val(3)), ("B", Val(2)), ("C", Val(2))])]),
        // -P_obs(a={0,2}) P_obs(a=3, c={1,2})
        term(
            -1.0,
            vec![
                obs(&[("A", Set(vec![0, 2]))]),
                obs(&[("A", Val(3)), ("C", Set(vec![1, 2]))]),
            ],
        ),
        // +(1 - P_obs(a=3)) [ P_int(3,2,{0,1}) + 2 P_int(3,2,2) ], expanded:
        term(1.0, vec![int(&[("A", Val(3)), ("B", Val(2)), ("C", Set(vec![0, 1]))])]),
        term(2.0, vec![int(&[("A", Val(3)), ("B", Val(2)), ("C", Val(2))])]),
        term(
            -1.0,
            vec![
                obs(&[("A", Val(3))]),
                int(&[("A", Val(3)), ("B", Val(2)), ("C", Set(vec![0, 1]))]),
            ],
        ),
        term(
            -2.0,
            vec![
                obs(&[("A", Val(3))]),
                int(&[("A", Val(3)), ("B", Val(2)), ("C", Val(2))]),
            ],
        ),
        // +P_obs(a=3) P_obs({0,2},{0,2},{0,2})
        term(
            1.0,
            vec![
                obs(&[("A", Val(3))]),
                obs(&[
                    ("A", Set(vec![0, 2])),
                    ("B", Set(vec![0, 2])),
                    ("C", Set(vec![0, 2])),
                ]),
            ],
        ),
    ])
}
