//! Exact joint probability tables over named outcome variables, optionally
//! conditioned on named inputs.

use crate::error::{Error, Result};
use crate::tensor::increment;

pub const NORMALIZATION_TOL: f64 = 1e-10;

/// A probability table `P(outcomes | conditions)`.
///
/// Storage is condition-major: for each condition tuple (row-major over the
/// `given` cardinalities) there is one normalized block over the outcome
/// tuples (row-major over the party cardinalities).
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    parties: Vec<(String, usize)>,
    given: Vec<(String, usize)>,
    table: Vec<f64>,
}

impl Behavior {
    pub fn new(
        parties: Vec<(String, usize)>,
        given: Vec<(String, usize)>,
        table: Vec<f64>,
    ) -> Result<Self> {
        let block: usize = parties.iter().map(|&(_, c)| c).product();
        let conds: usize = given.iter().map(|&(_, c)| c).product();
        if table.len() != block * conds {
            return Err(Error::Shape(format!(
                "behavior table has {} entries, expected {}",
                table.len(),
                block * conds
            )));
        }
        let b = Behavior {
            parties,
            given,
            table,
        };
        b.check_normalized()?;
        Ok(b)
    }

    fn check_normalized(&self) -> Result<()> {
        let block = self.block_size();
        for (ci, chunk) in self.table.chunks(block).enumerate() {
            let mut sum = 0.0;
            for &p in chunk {
                if p < -1e-12 {
                    return Err(Error::InvalidOperator(format!(
                        "negative probability {p:.3e} in condition block {ci}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidOperator(format!(
                    "condition block {ci} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    pub fn parties(&self) -> &[(String, usize)] {
        &self.parties
    }

    pub fn given(&self) -> &[(String, usize)] {
        &self.given
    }

    pub fn block_size(&self) -> usize {
        self.parties.iter().map(|&(_, c)| c).product()
    }

    pub fn condition_count(&self) -> usize {
        self.given.iter().map(|&(_, c)| c).product()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn party_index(&self, name: &str) -> Option<usize> {
        self.parties.iter().position(|(n, _)| n == name)
    }

    fn pack(dims: &[(String, usize)], values: &[usize]) -> usize {
        debug_assert_eq!(dims.len(), values.len());
        let mut idx = 0;
        for (&(_, card), &v) in dims.iter().zip(values) {
            debug_assert!(v < card);
            idx = idx * card + v;
        }
        idx
    }

    pub fn prob(&self, outcomes: &[usize], conditions: &[usize]) -> f64 {
        let block = self.block_size();
        let ci = Self::pack(&self.given, conditions);
        let oi = Self::pack(&self.parties, outcomes);
        self.table[ci * block + oi]
    }

    /// Iterate `(outcome tuple, condition tuple, probability)`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, f64)> + '_ {
        let ocards: Vec<usize> = self.parties.iter().map(|&(_, c)| c).collect();
        let ccards: Vec<usize> = self.given.iter().map(|&(_, c)| c).collect();
        let block = self.block_size();
        self.table.iter().enumerate().map(move |(i, &p)| {
            let (ci, oi) = (i / block, i % block);
            (unpack(oi, &ocards), unpack(ci, &ccards), p)
        })
    }

    /// Marginal over a subset of parties (by name, in the order given),
    /// keeping all conditioning variables.
    pub fn marginal(&self, keep: &[&str]) -> Result<Behavior> {
        let keep_idx: Vec<usize> = keep
            .iter()
            .map(|name| {
                self.party_index(name)
                    .ok_or_else(|| Error::UnknownParty((*name).into()))
            })
            .collect::<Result<_>>()?;
        let new_parties: Vec<(String, usize)> =
            keep_idx.iter().map(|&i| self.parties[i].clone()).collect();
        let new_block: usize = new_parties.iter().map(|&(_, c)| c).product();
        let mut out = vec![0.0; new_block * self.condition_count()];
        let block = self.block_size();
        let ocards: Vec<usize> = self.parties.iter().map(|&(_, c)| c).collect();
        for (i, &p) in self.table.iter().enumerate() {
            let (ci, oi) = (i / block, i % block);
            let full = unpack(oi, &ocards);
            let mut packed = 0;
            for &ki in &keep_idx {
                packed = packed * ocards[ki] + full[ki];
            }
            out[ci * new_block + packed] += p;
        }
        Behavior::new(new_parties, self.given.clone(), out)
    }

    /// Probability of a partial assignment `(party name, value)`, summing all
    /// unmentioned parties, at a fixed condition tuple.
    pub fn event_prob(&self, assignment: &[(&str, usize)], conditions: &[usize]) -> Result<f64> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.parties.len()];
        for (name, v) in assignment {
            let i = self
                .party_index(name)
                .ok_or_else(|| Error::UnknownParty((*name).into()))?;
            if *v >= self.parties[i].1 {
                return Err(Error::ParamOutOfRange(format!(
                    "outcome {v} out of range for `{name}`"
                )));
            }
            fixed[i] = Some(*v);
        }
        let block = self.block_size();
        let ci = Self::pack(&self.given, conditions);
        let ocards: Vec<usize> = self.parties.iter().map(|&(_, c)| c).collect();
        let mut sum = 0.0;
        for oi in 0..block {
            let full = unpack(oi, &ocards);
            if fixed
                .iter()
                .zip(&full)
                .all(|(f, &v)| f.map_or(true, |fv| fv == v))
            {
                sum += self.table[ci * block + oi];
            }
        }
        Ok(sum)
    }

    /// Largest absolute entry difference; tables must have identical shape.
    pub fn max_abs_diff(&self, other: &Behavior) -> f64 {
        assert_eq!(self.table.len(), other.table.len(), "shape mismatch");
        self.table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Serialize as CSV: one header row with the conditioning and party names
    /// plus `p`, then one row per entry with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (name, _) in &self.given {
            out.push_str(&name.to_lowercase());
            out.push(',');
        }
        let names: Vec<String> = self
            .parties
            .iter()
            .map(|(n, _)| n.to_lowercase())
            .collect();
        out.push_str(&names.join(","));
        out.push_str(",p\n");
        for (outs, conds, p) in self.iter() {
            for v in conds {
                out.push_str(&format!("{v},"));
            }
            let vals: Vec<String> = outs.iter().map(|v| v.to_string()).collect();
            out.push_str(&vals.join(","));
            out.push_str(&format!(",{:.16e}\n", p));
        }
        out
    }

    /// Deterministic point mass (no conditioning).
    pub fn point_mass(parties: Vec<(String, usize)>, outcome: &[usize]) -> Result<Behavior> {
        let block: usize = parties.iter().map(|&(_, c)| c).product();
        let mut table = vec![0.0; block];
        table[Self::pack(&parties, outcome)] = 1.0;
        Behavior::new(parties, vec![], table)
    }
}

pub(crate) fn unpack(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; cards.len()];
    for i in (0..cards.len()).rev() {
        out[i] = idx % cards[i];
        idx /= cards[i];
    }
    out
}

/// Enumerate all mixed-radix tuples over the given cardinalities.
pub(crate) fn tuples(cards: &[usize]) -> Vec<Vec<usize>> {
    let count: usize = cards.iter().product();
    let mut out = Vec::with_capacity(count);
    let mut cur = vec![0usize; cards.len()];
    if cards.iter().any(|&c| c == 0) {
        return out;
    }
    loop {
        out.push(cur.clone());
        if !increment(&mut cur, cards) {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Behavior {
        // P(a,b) = uniform on {00, 11}, conditioned on x in {0,1}: x=1 flips b.
        Behavior::new(
            vec![("A".into(), 2), ("B".into(), 2)],
            vec![("X".into(), 2)],
            vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(Behavior::new(vec![("A".into(), 2)], vec![], vec![0.6, 0.6]).is_err());
        assert!(Behavior::new(vec![("A".into(), 2)], vec![], vec![1.3, -0.3]).is_err());
    }

    #[test]
    fn prob_and_event() {
        let b = abc();
        assert_eq!(b.prob(&[1, 1], &[0]), 0.5);
        assert_eq!(b.prob(&[1, 1], &[1]), 0.0);
        assert_eq!(b.event_prob(&[("A", 1)], &[0]).unwrap(), 0.5);
        assert_eq!(b.event_prob(&[], &[0]).unwrap(), 1.0);
    }

    #[test]
    fn marginal_reorders() {
        let b = abc();
        let m = b.marginal(&["B", "A"]).unwrap();
        assert_eq!(m.parties()[0].0, "B");
        assert_eq!(m.prob(&[0, 1], &[1]), 0.5); // P(b=0, a=1 | x=1)
    }

    #[test]
    fn unknown_party_is_an_error() {
        let b = abc();
        assert!(b.marginal(&["Z"]).is_err());
        assert!(b.event_prob(&[("Z", 0)], &[0]).is_err());
    }

    #[test]
    fn csv_shape() {
        let b = abc();
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,a,b,p");
        assert_eq!(csv.lines().count(), 9);
    }
}
