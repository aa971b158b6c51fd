//! Latent splitting: sever one source->party edge, discard that party's share
//! of the source and re-prepare it as a fresh independent input. Sequential
//! splits, interventional behaviors, and the recovery of Pearl
//! do-conditionals from splitting data.

use crate::behavior::{tuples, Behavior};
use crate::error::{Error, Result};
use crate::network::{quantum_behavior, CausalNetwork, NodeRef, QuantumStrategy};
use crate::tensor::{partial_trace, DensityOperator};

/// What to re-prepare on the severed slot.
#[derive(Debug, Clone)]
pub enum Replacement {
    /// The party's observational reduced state of the split source (default).
    ObservedMarginal,
    /// Any state of the party's own choosing, on the severed slot dimension.
    Custom(DensityOperator),
}

/// A single latent splitting, defined relative to a `source -> party` edge.
#[derive(Debug, Clone)]
pub struct SplitSpec {
    pub source: String,
    pub party: String,
    pub replacement: Replacement,
}

impl SplitSpec {
    pub fn new(source: &str, party: &str) -> Self {
        SplitSpec {
            source: source.into(),
            party: party.into(),
            replacement: Replacement::ObservedMarginal,
        }
    }
}

/// An ordered list of splittings with no repeated edge.
#[derive(Debug, Clone, Default)]
pub struct SplitSequence {
    specs: Vec<SplitSpec>,
}

impl SplitSequence {
    pub fn new(specs: Vec<SplitSpec>) -> Result<Self> {
        for i in 0..specs.len() {
            for j in (i + 1)..specs.len() {
                if specs[i].source == specs[j].source && specs[i].party == specs[j].party {
                    return Err(Error::Config(format!(
                        "duplicate split on edge `{}` -> `{}`",
                        specs[i].source, specs[i].party
                    )));
                }
            }
        }
        Ok(SplitSequence { specs })
    }

    /// From `[["γ","A"], ["α","B"]]`-style pairs, all with the default
    /// replacement.
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self> {
        SplitSequence::new(pairs.iter().map(|&(s, p)| SplitSpec::new(s, p)).collect())
    }

    pub fn specs(&self) -> &[SplitSpec] {
        &self.specs
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

/// The name given to the fresh latent node created by a split.
pub fn split_latent_name(source: &str, party: &str) -> String {
    format!("ĥ{source}->{party}")
}

/// Apply one latent splitting to a strategy.
///
/// The split source keeps its state with the severed slot traced out; a fresh
/// latent re-prepares the severed slot (by default with the party's
/// observational marginal of that source). Measurements are untouched, and
/// the fresh edge takes the severed edge's position so every party keeps its
/// local slot order.
pub fn split_state(strategy: &QuantumStrategy, spec: &SplitSpec) -> Result<QuantumStrategy> {
    let net = &strategy.network;
    let party_idx = net
        .observed_index(&spec.party)
        .ok_or_else(|| Error::UnknownParty(spec.party.clone()))?;
    let not_an_edge = || Error::NotAnEdge {
        source_node: spec.source.clone(),
        party: spec.party.clone(),
    };
    let source_idx = net.latent_index(&spec.source).ok_or_else(not_an_edge)?;
    if !net.has_edge(source_idx, party_idx) {
        return Err(not_an_edge());
    }

    let source_state = &strategy.source_states[source_idx];
    let kept_labels: Vec<&str> = source_state
        .layout()
        .labels()
        .into_iter()
        .filter(|l| *l != spec.party)
        .collect();

    // Marginal the party held, and what the other children keep.
    let severed_marginal = partial_trace(source_state, &kept_labels)?;
    let remainder = if kept_labels.is_empty() {
        None
    } else {
        Some(partial_trace(source_state, &[spec.party.as_str()])?)
    };

    let replacement = match &spec.replacement {
        Replacement::ObservedMarginal => severed_marginal,
        Replacement::Custom(op) => {
            if op.layout().total_dim() != severed_marginal.layout().total_dim() {
                return Err(Error::LayoutMismatch(format!(
                    "custom replacement has dimension {}, severed slot has {}",
                    op.layout().total_dim(),
                    severed_marginal.layout().total_dim()
                )));
            }
            op.relabeled(vec![spec.party.clone()])?
        }
    };

    let fresh_name = split_latent_name(&spec.source, &spec.party);
    if net.latent_index(&fresh_name).is_some() {
        return Err(Error::Config(format!(
            "latent `{fresh_name}` already exists"
        )));
    }

    // Rebuild: drop the source entirely if the severed edge was its last one.
    let drop_source = remainder.is_none();
    let mut latent: Vec<String> = Vec::new();
    let mut states: Vec<DensityOperator> = Vec::new();
    let mut index_map: Vec<Option<usize>> = vec![None; net.latent().len()];
    for (i, name) in net.latent().iter().enumerate() {
        if i == source_idx {
            if drop_source {
                continue;
            }
            index_map[i] = Some(latent.len());
            latent.push(name.clone());
            states.push(remainder.clone().unwrap());
        } else {
            index_map[i] = Some(latent.len());
            latent.push(name.clone());
            states.push(strategy.source_states[i].clone());
        }
    }
    let fresh_idx = latent.len();
    latent.push(fresh_name);
    states.push(replacement);

    let edges: Vec<(NodeRef, usize)> = net
        .edges()
        .iter()
        .map(|&(from, to)| match from {
            NodeRef::Latent(i) if i == source_idx && to == party_idx => {
                (NodeRef::Latent(fresh_idx), to)
            }
            NodeRef::Latent(i) => (
                NodeRef::Latent(index_map[i].expect("kept latent")),
                to,
            ),
            NodeRef::Observed(i) => (NodeRef::Observed(i), to),
        })
        .collect();

    let network = CausalNetwork::new(
        net.observed()
            .iter()
            .map(|o| (o.name.clone(), o.card))
            .collect(),
        latent,
        edges,
    )?;
    let split = QuantumStrategy {
        network,
        source_states: states,
        povms: strategy.povms.clone(),
    };
    split.validate()?;
    Ok(split)
}

/// Apply a sequence of splittings in order.
pub fn apply_splits(strategy: &QuantumStrategy, seq: &SplitSequence) -> Result<QuantumStrategy> {
    let mut current = strategy.clone();
    for spec in seq.specs() {
        current = split_state(&current, spec)?;
    }
    Ok(current)
}

/// Statistics of the split experiment: the behavior of the sequentially split
/// strategy, measurements kept fixed.
pub fn interventional_behavior(
    strategy: &QuantumStrategy,
    seq: &SplitSequence,
) -> Result<Behavior> {
    quantum_behavior(&apply_splits(strategy, seq)?)
}

const DIVISOR_FLOOR: f64 = 1e-9;

/// Recover the Pearl do-conditional on `target` from latent-splitting data
/// and the observational distribution alone.
///
/// Splits every incoming latent edge of the target (re-preparing its own
/// observational marginals), then divides out the target's own outcome
/// weight: `P_obs(target)` for root parties, the previously recovered
/// do-conditional of the parent otherwise. The output matches
/// [`pearl_do_quantum`]: a behavior over everyone else, conditioned on the
/// inputs and the forced target value.
pub fn recover_do(strategy: &QuantumStrategy, target: &str) -> Result<Behavior> {
    strategy.validate()?;
    let net = &strategy.network;
    let target_idx = net
        .observed_index(target)
        .ok_or_else(|| Error::UnknownParty(target.into()))?;
    if net.inputs().contains(&target_idx) {
        return Err(Error::UnknownParty(format!(
            "`{target}` is a free input, not a measured party"
        )));
    }

    let obs = quantum_behavior(strategy)?;

    // Full split of the target: every incoming latent edge, default marginal.
    let seq = SplitSequence::new(
        net.latent_parents(target_idx)
            .into_iter()
            .map(|l| SplitSpec::new(&net.latent()[l], target))
            .collect(),
    )?;
    let int = interventional_behavior(strategy, &seq)?;

    let inputs = net.inputs();

    // Observed parents that are measured parties (inputs act as conditions).
    let pa_parties: Vec<usize> = net
        .observed_parents(target_idx)
        .into_iter()
        .filter(|p| !inputs.contains(p))
        .collect();

    // Do-conditionals of parents, recovered first (the DAG guarantees this
    // recursion bottoms out at root parties).
    let parent_do: Vec<Behavior> = pa_parties
        .iter()
        .map(|&p| recover_do(strategy, &net.observed()[p].name))
        .collect::<Result<_>>()?;

    let rest: Vec<usize> = net
        .outcome_parties()
        .into_iter()
        .filter(|&p| p != target_idx)
        .collect();
    let rest_names: Vec<(String, usize)> = rest
        .iter()
        .map(|&p| (net.observed()[p].name.clone(), net.observed()[p].card))
        .collect();
    let target_card = net.observed()[target_idx].card;

    let mut given: Vec<(String, usize)> = inputs
        .iter()
        .map(|&i| (net.observed()[i].name.clone(), net.observed()[i].card))
        .collect();
    given.push((target.to_string(), target_card));

    let icards: Vec<usize> = inputs.iter().map(|&i| net.observed()[i].card).collect();
    let rcards: Vec<usize> = rest.iter().map(|&p| net.observed()[p].card).collect();
    let block: usize = rcards.iter().product::<usize>().max(1);

    // The int table is over all outcome parties in network order.
    let int_order: Vec<usize> = net.outcome_parties();
    let target_pos_int = int_order.iter().position(|&p| p == target_idx).unwrap();
    let rest_pos_int: Vec<usize> = rest
        .iter()
        .map(|&p| int_order.iter().position(|&q| q == p).unwrap())
        .collect();

    let mut table = Vec::with_capacity(icards.iter().product::<usize>().max(1) * target_card * block);
    for input_vals in tuples(&icards) {
        for t in 0..target_card {
            for rest_vals in tuples(&rcards) {
                let mut full = vec![0usize; int_order.len()];
                full[target_pos_int] = t;
                for (&pos, &v) in rest_pos_int.iter().zip(&rest_vals) {
                    full[pos] = v;
                }
                let numer = int.prob(&full, &input_vals);
                let divisor = match pa_parties.len() {
                    // Root party: its own observational marginal.
                    0 => obs.event_prob(&[(target, t)], &input_vals)?,
                    // One measured parent: marginal of its recovered
                    // do-conditional at the realized parent value.
                    1 => {
                        let parent = pa_parties[0];
                        let pv = rest_vals[rest.iter().position(|&p| p == parent).unwrap()];
                        let mut conds = input_vals.clone();
                        conds.push(pv);
                        parent_do[0].event_prob(&[(target, t)], &conds)?
                    }
                    // Several measured parents: in the fully split experiment
                    // the target reads only its re-prepared state, so its
                    // conditional on the realized parent values is exactly
                    // the joint do-weight.
                    _ => {
                        let pa_assign: Vec<(&str, usize)> = pa_parties
                            .iter()
                            .map(|&p| {
                                let pos = rest.iter().position(|&q| q == p).unwrap();
                                (net.observed()[p].name.as_str(), rest_vals[pos])
                            })
                            .collect();
                        let denom = int.event_prob(&pa_assign, &input_vals)?;
                        if denom < DIVISOR_FLOOR {
                            return Err(Error::ZeroDivisor {
                                event: format!("P(parents = {pa_assign:?}) in the split experiment"),
                                value: denom,
                            });
                        }
                        let mut with_target = pa_assign.clone();
                        with_target.push((target, t));
                        int.event_prob(&with_target, &input_vals)? / denom
                    }
                };
                if divisor < DIVISOR_FLOOR {
                    return Err(Error::ZeroDivisor {
                        event: format!(
                            "P({target}={t} | do(parents)) at inputs {input_vals:?}, parents from {rest_vals:?}"
                        ),
                        value: divisor,
                    });
                }
                table.push(numer / divisor);
            }
        }
    }
    Behavior::new(rest_names, given, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{cr, ComplexMatrix};
    use crate::network::pearl_do_quantum;
    use crate::scenarios::{
        fritz_strategy, instrumental_default, rgb4_strategy, uc_default, FritzParams, Rgb4Params,
    };
    use crate::tensor::SubsystemLayout;

    #[test]
    fn splitting_a_product_source_is_a_noop_on_statistics() {
        // Make γ a product state; splitting γ->A must leave the table alone.
        let mut strategy = rgb4_strategy(&Rgb4Params::new(0.4)).unwrap();
        let product = DensityOperator::new(
            SubsystemLayout::new(vec![("A".into(), 2), ("B".into(), 2)]).unwrap(),
            ComplexMatrix::diagonal(&[0.7, 0.0, 0.3, 0.0]).scale(cr(1.0)),
        )
        .unwrap();
        strategy.source_states[2] = product;
        let before = quantum_behavior(&strategy).unwrap();
        let after =
            interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("γ", "A")]).unwrap())
                .unwrap();
        assert!(before.max_abs_diff(&after) < 1e-12);
    }

    #[test]
    fn rgb4_split_state_structure() {
        // Splitting γ->A leaves every other source alone, replaces γ by its
        // B-share and hands A a fresh copy of its own γ-marginal.
        let strategy = rgb4_strategy(&Rgb4Params::new(0.85)).unwrap();
        let split = split_state(&strategy, &SplitSpec::new("γ", "A")).unwrap();

        assert_eq!(
            split.network.latent(),
            &["α", "β", "γ", "ĥγ->A"]
        );
        let gamma = &strategy.source_states[2];
        let expect_gamma_rest = partial_trace(gamma, &["A"]).unwrap();
        let expect_fresh = partial_trace(gamma, &["B"]).unwrap();
        assert!(split.source_states[2]
            .matrix()
            .max_abs_diff(expect_gamma_rest.matrix())
            < 1e-14);
        assert!(split.source_states[3]
            .matrix()
            .max_abs_diff(expect_fresh.matrix())
            < 1e-14);
        assert!(split.source_states[0]
            .matrix()
            .max_abs_diff(strategy.source_states[0].matrix())
            < 1e-15);

        // Same edge again: the original edge is gone.
        let again = split_state(&split, &SplitSpec::new("γ", "A"));
        assert!(matches!(again, Err(Error::NotAnEdge { .. })));
    }

    #[test]
    fn empty_sequence_is_observational() {
        let strategy = fritz_strategy(&FritzParams::new(0.3)).unwrap();
        let obs = quantum_behavior(&strategy).unwrap();
        let int = interventional_behavior(&strategy, &SplitSequence::default()).unwrap();
        assert!(obs.max_abs_diff(&int) < 1e-15);
    }

    #[test]
    fn split_order_independence() {
        let strategy = fritz_strategy(&FritzParams::new(0.3).with_visibility(0.93)).unwrap();
        let ab = interventional_behavior(
            &strategy,
            &SplitSequence::from_pairs(&[("β", "A"), ("α", "B")]).unwrap(),
        )
        .unwrap();
        let ba = interventional_behavior(
            &strategy,
            &SplitSequence::from_pairs(&[("α", "B"), ("β", "A")]).unwrap(),
        )
        .unwrap();
        assert!(ab.max_abs_diff(&ba) < 1e-12);
    }

    #[test]
    fn duplicate_split_rejected_in_sequence() {
        assert!(SplitSequence::from_pairs(&[("γ", "A"), ("γ", "A")]).is_err());
    }

    #[test]
    fn full_splitting_factorizes_across_parties() {
        // Splitting every edge of every source makes all parties independent
        // (the triangle has no observed-to-observed edges).
        let strategy = rgb4_strategy(&Rgb4Params::new(0.62)).unwrap();
        let net = strategy.network.clone();
        let mut specs = Vec::new();
        for (l, name) in net.latent().iter().enumerate() {
            for p in net.latent_children(l) {
                specs.push(SplitSpec::new(name, &net.observed()[p].name));
            }
        }
        let b = interventional_behavior(&strategy, &SplitSequence::new(specs).unwrap()).unwrap();
        let ma = b.marginal(&["A"]).unwrap();
        let mb = b.marginal(&["B"]).unwrap();
        let mc = b.marginal(&["C"]).unwrap();
        for (outs, _, p) in b.iter() {
            let prod = ma.prob(&[outs[0]], &[]) * mb.prob(&[outs[1]], &[]) * mc.prob(&[outs[2]], &[]);
            assert!((p - prod).abs() < 1e-10);
        }
    }

    #[test]
    fn observed_marginal_replacement_preserves_single_party_marginal() {
        let strategy = rgb4_strategy(&Rgb4Params::new(0.85)).unwrap();
        let obs = quantum_behavior(&strategy).unwrap();
        let int =
            interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("γ", "A")]).unwrap())
                .unwrap();
        let before = obs.marginal(&["A"]).unwrap();
        let after = int.marginal(&["A"]).unwrap();
        assert!(before.max_abs_diff(&after) < 1e-12);
    }

    #[test]
    fn custom_replacement_dimension_checked() {
        let strategy = rgb4_strategy(&Rgb4Params::new(0.5)).unwrap();
        let wrong = DensityOperator::new(
            SubsystemLayout::new(vec![("x".into(), 3)]).unwrap(),
            ComplexMatrix::diagonal(&[0.5, 0.25, 0.25]),
        )
        .unwrap();
        let spec = SplitSpec {
            source: "γ".into(),
            party: "A".into(),
            replacement: Replacement::Custom(wrong),
        };
        assert!(matches!(
            split_state(&strategy, &spec),
            Err(Error::LayoutMismatch(_))
        ));
    }

    #[test]
    fn instrumental_identity() {
        // P_int(a,b|x) = P_obs(a|x) * P(b|do(a)).
        let strategy = instrumental_default();
        let obs = quantum_behavior(&strategy).unwrap();
        let int =
            interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("ρ", "A")]).unwrap())
                .unwrap();
        // P(b|do(a)) from the definition: identity on A's slot.
        let pdo = pearl_do_quantum(&strategy, "A").unwrap();
        let pa = obs.marginal(&["A"]).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let lhs = int.prob(&[a, b], &[x]);
                    let rhs = pa.prob(&[a], &[x]) * pdo.prob(&[b], &[x, a]);
                    assert!((lhs - rhs).abs() < 1e-12, "x={x} a={a} b={b}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn instrumental_recovery_matches_pearl() {
        let strategy = instrumental_default();
        let recovered = recover_do(&strategy, "A").unwrap();
        let direct = pearl_do_quantum(&strategy, "A").unwrap();
        assert!(recovered.max_abs_diff(&direct) < 1e-10);

        let recovered_b = recover_do(&strategy, "B").unwrap();
        let direct_b = pearl_do_quantum(&strategy, "B").unwrap();
        assert!(recovered_b.max_abs_diff(&direct_b) < 1e-10);
    }

    #[test]
    fn uc_identity_and_recovery() {
        // P^γ_int(a,b,c) = P(a|do(b)) * P_obs(b,c).
        let strategy = uc_default();
        let obs = quantum_behavior(&strategy).unwrap();
        let int =
            interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("γ", "A")]).unwrap())
                .unwrap();
        let do_b = pearl_do_quantum(&strategy, "B").unwrap();
        let pbc = obs.marginal(&["B", "C"]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let lhs = int.prob(&[a, b, c], &[]);
                    // P(a|do(b)): marginal of the do-behavior over (A, C).
                    let pado_b = do_b.marginal(&["A"]).unwrap().prob(&[a], &[b]);
                    let rhs = pado_b * pbc.prob(&[b, c], &[]);
                    assert!((lhs - rhs).abs() < 1e-12, "a={a} b={b} c={c}: {lhs} vs {rhs}");
                }
            }
        }

        let recovered = recover_do(&strategy, "A").unwrap();
        let direct = pearl_do_quantum(&strategy, "A").unwrap();
        assert!(recovered.max_abs_diff(&direct) < 1e-10);
        let recovered_b = recover_do(&strategy, "B").unwrap();
        assert!(recovered_b.max_abs_diff(&do_b) < 1e-10);
    }

    #[test]
    fn triangle_do_recovery_is_the_marginal() {
        let strategy = rgb4_strategy(&Rgb4Params::new(0.85)).unwrap();
        let obs = quantum_behavior(&strategy).unwrap();
        let marg = obs.marginal(&["B", "C"]).unwrap();
        let recovered = recover_do(&strategy, "A").unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let diff = (recovered.prob(&[b, c], &[a]) - marg.prob(&[b, c], &[])).abs();
                    assert!(diff < 1e-10);
                }
            }
        }
    }
}
