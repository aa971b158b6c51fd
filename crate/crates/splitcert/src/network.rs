//! Two-layer causal networks (latent sources feeding observed parties, plus
//! observed-to-observed edges), classical causal models and quantum
//! strategies, and their exact behaviors.

use crate::behavior::{tuples, Behavior};
use crate::complex::ComplexMatrix;
use crate::error::{Error, Result};
use crate::tensor::{
    increment, party_locator, trace_product, DensityOperator, Povm, SubsystemLayout,
};

/// A node reference inside a [`CausalNetwork`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Latent(usize),
    Observed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedNode {
    pub name: String,
    pub card: usize,
}

/// Two-layer DAG: latent sources (no parents) and observed parties; edges run
/// latent -> observed or observed -> observed. Observed nodes with no parents
/// at all act as free inputs and behaviors are conditioned on them.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalNetwork {
    observed: Vec<ObservedNode>,
    latent: Vec<String>,
    edges: Vec<(NodeRef, usize)>,
}

impl CausalNetwork {
    pub fn new(
        observed: Vec<(String, usize)>,
        latent: Vec<String>,
        edges: Vec<(NodeRef, usize)>,
    ) -> Result<Self> {
        let net = CausalNetwork {
            observed: observed
                .into_iter()
                .map(|(name, card)| ObservedNode { name, card })
                .collect(),
            latent,
            edges,
        };
        net.validate()?;
        Ok(net)
    }

    /// Build from names; edges are `(from, to)` pairs naming any node.
    pub fn from_names(
        observed: Vec<(&str, usize)>,
        latent: Vec<&str>,
        edges: Vec<(&str, &str)>,
    ) -> Result<Self> {
        let obs: Vec<(String, usize)> = observed
            .into_iter()
            .map(|(n, c)| (n.to_string(), c))
            .collect();
        let lat: Vec<String> = latent.into_iter().map(str::to_string).collect();
        let mut resolved = Vec::with_capacity(edges.len());
        for (from, to) in edges {
            let to_idx = obs
                .iter()
                .position(|(n, _)| n == to)
                .ok_or_else(|| Error::UnknownParty(to.into()))?;
            let from_ref = if let Some(i) = lat.iter().position(|n| n == from) {
                NodeRef::Latent(i)
            } else if let Some(i) = obs.iter().position(|(n, _)| n == from) {
                NodeRef::Observed(i)
            } else {
                return Err(Error::UnknownParty(from.into()));
            };
            resolved.push((from_ref, to_idx));
        }
        CausalNetwork::new(obs, lat, resolved)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.observed.len() {
            for j in (i + 1)..self.observed.len() {
                if self.observed[i].name == self.observed[j].name {
                    return Err(Error::Config(format!(
                        "duplicate observed node `{}`",
                        self.observed[i].name
                    )));
                }
            }
        }
        for i in 0..self.latent.len() {
            for j in (i + 1)..self.latent.len() {
                if self.latent[i] == self.latent[j] {
                    return Err(Error::Config(format!(
                        "duplicate latent node `{}`",
                        self.latent[i]
                    )));
                }
            }
        }
        for &(from, to) in &self.edges {
            if to >= self.observed.len() {
                return Err(Error::Config("edge target out of range".into()));
            }
            match from {
                NodeRef::Latent(i) if i >= self.latent.len() => {
                    return Err(Error::Config("edge source out of range".into()))
                }
                _ => {}
            }
        }
        // Latent nodes must have at least one child.
        for (i, name) in self.latent.iter().enumerate() {
            if !self
                .edges
                .iter()
                .any(|&(f, _)| f == NodeRef::Latent(i))
            {
                return Err(Error::Config(format!("latent node `{name}` has no children")));
            }
        }
        // No duplicate edges.
        for i in 0..self.edges.len() {
            for j in (i + 1)..self.edges.len() {
                if self.edges[i] == self.edges[j] {
                    return Err(Error::Config("duplicate edge".into()));
                }
            }
        }
        // Acyclicity of the observed-observed part (latents have no parents,
        // so any cycle lives among observed nodes).
        let n = self.observed.len();
        let mut indeg = vec![0usize; n];
        for &(from, to) in &self.edges {
            if matches!(from, NodeRef::Observed(_)) {
                indeg[to] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &(from, to) in &self.edges {
                if from == NodeRef::Observed(u) {
                    indeg[to] -= 1;
                    if indeg[to] == 0 {
                        queue.push(to);
                    }
                }
            }
        }
        if seen != n {
            return Err(Error::Config("graph has a directed cycle".into()));
        }
        Ok(())
    }

    pub fn observed(&self) -> &[ObservedNode] {
        &self.observed
    }

    pub fn latent(&self) -> &[String] {
        &self.latent
    }

    pub fn edges(&self) -> &[(NodeRef, usize)] {
        &self.edges
    }

    pub fn observed_index(&self, name: &str) -> Option<usize> {
        self.observed.iter().position(|o| o.name == name)
    }

    pub fn latent_index(&self, name: &str) -> Option<usize> {
        self.latent.iter().position(|l| l == name)
    }

    /// Latent parents of a party, in edge declaration order.
    pub fn latent_parents(&self, party: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(f, t)| match f {
                NodeRef::Latent(i) if t == party => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Observed parents of a party, in edge declaration order.
    pub fn observed_parents(&self, party: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(f, t)| match f {
                NodeRef::Observed(i) if t == party => Some(i),
                _ => None,
            })
            .collect()
    }

    /// Children of a latent node, in edge declaration order.
    pub fn latent_children(&self, latent: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(f, t)| (f == NodeRef::Latent(latent)).then_some(t))
            .collect()
    }

    pub fn observed_children(&self, party: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(f, t)| (f == NodeRef::Observed(party)).then_some(t))
            .collect()
    }

    /// Parties with no parents at all; treated as free inputs.
    pub fn inputs(&self) -> Vec<usize> {
        (0..self.observed.len())
            .filter(|&p| self.latent_parents(p).is_empty() && self.observed_parents(p).is_empty())
            .collect()
    }

    /// Non-input parties, in declaration order.
    pub fn outcome_parties(&self) -> Vec<usize> {
        let inputs = self.inputs();
        (0..self.observed.len())
            .filter(|p| !inputs.contains(p))
            .collect()
    }

    pub fn has_edge(&self, latent: usize, party: usize) -> bool {
        self.edges
            .iter()
            .any(|&(f, t)| f == NodeRef::Latent(latent) && t == party)
    }
}

/// Conditional response table `p(outcome | parents)` for one observed node.
/// Parent order is latent parents then observed parents, each in edge order;
/// probabilities are stored parent-combination-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTable {
    pub parent_cards: Vec<usize>,
    pub outcome_card: usize,
    pub probs: Vec<f64>,
}

impl ResponseTable {
    pub fn new(parent_cards: Vec<usize>, outcome_card: usize, probs: Vec<f64>) -> Result<Self> {
        let combos: usize = parent_cards.iter().product();
        if probs.len() != combos * outcome_card {
            return Err(Error::ModelMismatch(format!(
                "response table has {} entries, expected {}",
                probs.len(),
                combos * outcome_card
            )));
        }
        for chunk in probs.chunks(outcome_card) {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > 1e-12 || chunk.iter().any(|&p| p < 0.0) {
                return Err(Error::ModelMismatch(
                    "response distribution is not normalized".into(),
                ));
            }
        }
        Ok(ResponseTable {
            parent_cards,
            outcome_card,
            probs,
        })
    }

    #[inline]
    pub fn prob(&self, parents: &[usize], outcome: usize) -> f64 {
        let mut idx = 0;
        for (&card, &v) in self.parent_cards.iter().zip(parents) {
            idx = idx * card + v;
        }
        self.probs[idx * self.outcome_card + outcome]
    }

    /// Deterministic response computed by a function of the parent tuple.
    pub fn deterministic(
        parent_cards: Vec<usize>,
        outcome_card: usize,
        f: impl Fn(&[usize]) -> usize,
    ) -> Self {
        let mut probs = Vec::new();
        for combo in tuples(&parent_cards) {
            let o = f(&combo);
            for v in 0..outcome_card {
                probs.push(if v == o { 1.0 } else { 0.0 });
            }
        }
        if parent_cards.is_empty() {
            // tuples() yields the single empty combo already.
        }
        ResponseTable {
            parent_cards,
            outcome_card,
            probs,
        }
    }
}

/// Classical causal parameters for a network: one distribution per latent
/// source and one response table per non-input observed node.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModel {
    /// Indexed like `CausalNetwork::latent`.
    pub source_dists: Vec<Vec<f64>>,
    /// Indexed like `CausalNetwork::observed`; inputs hold `None`.
    pub responses: Vec<Option<ResponseTable>>,
}

impl ClassicalModel {
    pub fn validate(&self, net: &CausalNetwork) -> Result<()> {
        if self.source_dists.len() != net.latent().len()
            || self.responses.len() != net.observed().len()
        {
            return Err(Error::ModelMismatch("model size does not match network".into()));
        }
        for (i, dist) in self.source_dists.iter().enumerate() {
            let sum: f64 = dist.iter().sum();
            if dist.is_empty() || (sum - 1.0).abs() > 1e-12 || dist.iter().any(|&p| p < 0.0) {
                return Err(Error::ModelMismatch(format!(
                    "source `{}` distribution is not normalized",
                    net.latent()[i]
                )));
            }
        }
        let inputs = net.inputs();
        for (p, response) in self.responses.iter().enumerate() {
            if inputs.contains(&p) {
                if response.is_some() {
                    return Err(Error::ModelMismatch(format!(
                        "input `{}` must not carry a response table",
                        net.observed()[p].name
                    )));
                }
                continue;
            }
            let table = response.as_ref().ok_or_else(|| {
                Error::ModelMismatch(format!(
                    "party `{}` is missing a response table",
                    net.observed()[p].name
                ))
            })?;
            let mut expected: Vec<usize> = net
                .latent_parents(p)
                .iter()
                .map(|&l| self.source_dists[l].len())
                .collect();
            expected.extend(
                net.observed_parents(p)
                    .iter()
                    .map(|&o| net.observed()[o].card),
            );
            if table.parent_cards != expected || table.outcome_card != net.observed()[p].card {
                return Err(Error::ModelMismatch(format!(
                    "response table of `{}` does not match its parents",
                    net.observed()[p].name
                )));
            }
        }
        Ok(())
    }
}

/// Exact classical behavior: the sum over all latent alphabet combinations of
/// the product of causal parameters.
pub fn classical_behavior(net: &CausalNetwork, model: &ClassicalModel) -> Result<Behavior> {
    model.validate(net)?;
    let inputs = net.inputs();
    let parties = net.outcome_parties();
    let latent_cards: Vec<usize> = model.source_dists.iter().map(Vec::len).collect();

    let party_names: Vec<(String, usize)> = parties
        .iter()
        .map(|&p| (net.observed()[p].name.clone(), net.observed()[p].card))
        .collect();
    let given: Vec<(String, usize)> = inputs
        .iter()
        .map(|&p| (net.observed()[p].name.clone(), net.observed()[p].card))
        .collect();

    let ocards: Vec<usize> = parties.iter().map(|&p| net.observed()[p].card).collect();
    let icards: Vec<usize> = inputs.iter().map(|&p| net.observed()[p].card).collect();
    let block: usize = ocards.iter().product();
    let conds: usize = icards.iter().product::<usize>().max(1);

    // Resolve each party's parent list to positions in (outcome, input) tuples.
    enum Src {
        Latent(usize),
        Outcome(usize),
        Input(usize),
    }
    let mut parent_plan: Vec<(usize, Vec<Src>, &ResponseTable)> = Vec::new();
    for &p in &parties {
        let mut srcs: Vec<Src> = net.latent_parents(p).into_iter().map(Src::Latent).collect();
        for op in net.observed_parents(p) {
            if let Some(k) = parties.iter().position(|&q| q == op) {
                srcs.push(Src::Outcome(k));
            } else {
                let k = inputs.iter().position(|&q| q == op).expect("parent exists");
                srcs.push(Src::Input(k));
            }
        }
        let pos = parties.iter().position(|&q| q == p).unwrap();
        parent_plan.push((pos, srcs, model.responses[p].as_ref().unwrap()));
    }

    let mut table = vec![0.0; block * conds];
    let mut parent_vals: Vec<usize> = Vec::with_capacity(4);
    for (ci, input_vals) in tuples(&icards).iter().enumerate() {
        for (oi, outcome_vals) in tuples(&ocards).iter().enumerate() {
            let mut acc = 0.0;
            let mut lam = vec![0usize; latent_cards.len()];
            loop {
                let mut w: f64 = lam
                    .iter()
                    .zip(&model.source_dists)
                    .map(|(&v, d)| d[v])
                    .product();
                if w > 0.0 {
                    for &(pos, ref srcs, table) in &parent_plan {
                        parent_vals.clear();
                        for s in srcs {
                            parent_vals.push(match *s {
                                Src::Latent(l) => lam[l],
                                Src::Outcome(k) => outcome_vals[k],
                                Src::Input(k) => input_vals[k],
                            });
                        }
                        w *= table.prob(&parent_vals, outcome_vals[pos]);
                        if w == 0.0 {
                            break;
                        }
                    }
                    acc += w;
                }
                if latent_cards.is_empty() || !increment(&mut lam, &latent_cards) {
                    break;
                }
            }
            table[ci * block + oi] = acc;
        }
    }
    Behavior::new(party_names, given, table)
}

/// A quantum realization of a network: one labeled state per source (slots
/// named by child parties) and one POVM per non-input party over its incoming
/// slots, indexed by the packed values of its observed parents.
#[derive(Debug, Clone)]
pub struct QuantumStrategy {
    pub network: CausalNetwork,
    /// Indexed like `network.latent`.
    pub source_states: Vec<DensityOperator>,
    /// Indexed like `network.observed`; inputs hold `None`.
    pub povms: Vec<Option<Povm>>,
}

impl QuantumStrategy {
    pub fn validate(&self) -> Result<()> {
        let net = &self.network;
        if self.source_states.len() != net.latent().len() || self.povms.len() != net.observed().len()
        {
            return Err(Error::LayoutMismatch("strategy size does not match network".into()));
        }
        for (l, state) in self.source_states.iter().enumerate() {
            let children: Vec<String> = net
                .latent_children(l)
                .into_iter()
                .map(|p| net.observed()[p].name.clone())
                .collect();
            let labels: Vec<String> =
                state.layout().labels().iter().map(|s| s.to_string()).collect();
            if labels != children {
                return Err(Error::LayoutMismatch(format!(
                    "state of `{}` has slots {labels:?}, expected children {children:?}",
                    net.latent()[l]
                )));
            }
        }
        let inputs = net.inputs();
        for (p, povm) in self.povms.iter().enumerate() {
            let node = &net.observed()[p];
            if inputs.contains(&p) {
                if povm.is_some() {
                    return Err(Error::LayoutMismatch(format!(
                        "input `{}` must not carry a POVM",
                        node.name
                    )));
                }
                continue;
            }
            let povm = povm.as_ref().ok_or_else(|| {
                Error::LayoutMismatch(format!("party `{}` is missing a POVM", node.name))
            })?;
            if povm.outcome_count() != node.card {
                return Err(Error::LayoutMismatch(format!(
                    "party `{}` has {} outcomes, POVM has {}",
                    node.name,
                    node.card,
                    povm.outcome_count()
                )));
            }
            let expected_inputs: usize = net
                .observed_parents(p)
                .iter()
                .map(|&o| net.observed()[o].card)
                .product();
            if povm.input_count() != expected_inputs {
                return Err(Error::LayoutMismatch(format!(
                    "party `{}` needs {} POVM input sets, found {}",
                    node.name,
                    expected_inputs,
                    povm.input_count()
                )));
            }
            let dim: usize = self.incoming_dims(p).iter().product();
            if povm.layout().total_dim() != dim {
                return Err(Error::LayoutMismatch(format!(
                    "party `{}` POVM dimension {} does not match incoming slots (dim {})",
                    node.name,
                    povm.layout().total_dim(),
                    dim
                )));
            }
        }
        Ok(())
    }

    /// Dimensions of a party's incoming slots, in edge declaration order.
    fn incoming_dims(&self, party: usize) -> Vec<usize> {
        let net = &self.network;
        let mut dims = Vec::new();
        for &(from, to) in net.edges() {
            if to != party {
                continue;
            }
            if let NodeRef::Latent(l) = from {
                let label = &net.observed()[party].name;
                let pos = self.source_states[l]
                    .layout()
                    .position(label)
                    .expect("validated slot");
                dims.push(self.source_states[l].layout().dims()[pos]);
            }
        }
        dims
    }

    /// Global product state over all sources, slots uniquely labeled
    /// `"<source>-><party>"`.
    pub fn global_state(&self) -> Result<DensityOperator> {
        let net = &self.network;
        let mut global: Option<DensityOperator> = None;
        for (l, state) in self.source_states.iter().enumerate() {
            let source = &net.latent()[l];
            let labels: Vec<String> = state
                .layout()
                .labels()
                .iter()
                .map(|party| format!("{source}->{party}"))
                .collect();
            let relabeled = state.relabeled(labels)?;
            global = Some(match global {
                None => relabeled,
                Some(g) => g.product(&relabeled)?,
            });
        }
        global.ok_or_else(|| Error::Config("network has no sources".into()))
    }

    /// Slot labels a party measures, in edge declaration order.
    pub fn party_slots(&self, party: usize) -> Vec<String> {
        let net = &self.network;
        let mut labels = Vec::new();
        for &(from, to) in net.edges() {
            if to != party {
                continue;
            }
            if let NodeRef::Latent(l) = from {
                labels.push(format!("{}->{}", net.latent()[l], net.observed()[party].name));
            }
        }
        labels
    }
}

/// Exact behavior of a quantum strategy over all non-input parties,
/// conditioned on the free inputs.
pub fn quantum_behavior(strategy: &QuantumStrategy) -> Result<Behavior> {
    behavior_with_do(strategy, None)
}

/// Pearl do-conditional: drop the target's measurement (identity instead) and
/// report the behavior of everyone else, conditioned on the forced value of
/// the target wherever it feeds observed children.
pub fn pearl_do_quantum(strategy: &QuantumStrategy, target: &str) -> Result<Behavior> {
    let p = strategy
        .network
        .observed_index(target)
        .ok_or_else(|| Error::UnknownParty(target.into()))?;
    if strategy.network.inputs().contains(&p) {
        return Err(Error::UnknownParty(format!(
            "`{target}` is a free input, not a measured party"
        )));
    }
    behavior_with_do(strategy, Some(p))
}

/// Shared Born-rule evaluation. With `do_target` set, that party's POVM is
/// replaced by the identity on its slots and its value becomes an extra
/// conditioning variable (after the inputs).
fn behavior_with_do(strategy: &QuantumStrategy, do_target: Option<usize>) -> Result<Behavior> {
    strategy.validate()?;
    let net = &strategy.network;
    let state = strategy.global_state()?;

    let inputs = net.inputs();
    let parties: Vec<usize> = net
        .outcome_parties()
        .into_iter()
        .filter(|&p| Some(p) != do_target)
        .collect();

    // Identity POVM on the do-target's slots, so its slots stay covered.
    let ident_povm: Option<Povm> = match do_target {
        Some(t) => {
            let slots = strategy.party_slots(t);
            let dims: Vec<(String, usize)> = slots
                .iter()
                .map(|l| {
                    let pos = state.layout().position(l).expect("slot exists");
                    (l.clone(), state.layout().dims()[pos])
                })
                .collect();
            let layout = SubsystemLayout::new(dims)?;
            let dim = layout.total_dim();
            Some(Povm::new(layout, vec![vec![ComplexMatrix::identity(dim)]])?)
        }
        None => None,
    };

    // Locators for every measured party (and the identity block, if any).
    let mut locators: Vec<Vec<usize>> = Vec::new();
    let mut povms: Vec<&Povm> = Vec::new();
    for &p in &parties {
        let povm = strategy.povms[p].as_ref().unwrap();
        locators.push(party_locator(&state, &strategy.party_slots(p), povm)?);
        povms.push(povm);
    }
    if let (Some(t), Some(ip)) = (do_target, ident_povm.as_ref()) {
        locators.push(party_locator(&state, &strategy.party_slots(t), ip)?);
        povms.push(ip);
    }

    let ocards: Vec<usize> = parties.iter().map(|&p| net.observed()[p].card).collect();
    let mut given_ids: Vec<usize> = inputs.clone();
    if let Some(t) = do_target {
        given_ids.push(t);
    }
    let gcards: Vec<usize> = given_ids.iter().map(|&p| net.observed()[p].card).collect();

    let party_names: Vec<(String, usize)> = parties
        .iter()
        .map(|&p| (net.observed()[p].name.clone(), net.observed()[p].card))
        .collect();
    let given_names: Vec<(String, usize)> = given_ids
        .iter()
        .map(|&p| (net.observed()[p].name.clone(), net.observed()[p].card))
        .collect();

    // For POVM set selection we need, per party, its observed parents and
    // where their values live (outcome tuple, input tuple or forced value).
    enum Loc {
        Outcome(usize),
        Given(usize),
    }
    let mut parent_locs: Vec<Vec<(Loc, usize)>> = Vec::new();
    for &p in &parties {
        let mut locs = Vec::new();
        for op in net.observed_parents(p) {
            let card = net.observed()[op].card;
            if let Some(k) = parties.iter().position(|&q| q == op) {
                locs.push((Loc::Outcome(k), card));
            } else if let Some(k) = given_ids.iter().position(|&q| q == op) {
                locs.push((Loc::Given(k), card));
            } else {
                unreachable!("parent is either measured or conditioning");
            }
        }
        parent_locs.push(locs);
    }

    let block: usize = ocards.iter().product::<usize>().max(1);
    let conds: usize = gcards.iter().product::<usize>().max(1);
    let mut table = vec![0.0; block * conds];

    for (ci, given_vals) in tuples(&gcards).iter().enumerate() {
        for (oi, outcome_vals) in tuples(&ocards).iter().enumerate() {
            let mut elements: Vec<&ComplexMatrix> = Vec::with_capacity(povms.len());
            for (k, _) in parties.iter().enumerate() {
                let mut set = 0usize;
                for &(ref loc, card) in &parent_locs[k] {
                    let v = match *loc {
                        Loc::Outcome(i) => outcome_vals[i],
                        Loc::Given(i) => given_vals[i],
                    };
                    set = set * card + v;
                }
                elements.push(povms[k].element(set, outcome_vals[k]));
            }
            if do_target.is_some() {
                elements.push(povms[povms.len() - 1].element(0, 0));
            }
            table[ci * block + oi] = trace_product(&state, &elements, &locators);
        }
    }
    Behavior::new(party_names, given_names, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{c, cr};
    use crate::scenarios;

    fn triangle_net() -> CausalNetwork {
        CausalNetwork::from_names(
            vec![("A", 2), ("B", 2), ("C", 2)],
            vec!["β", "γ", "α"],
            vec![
                ("β", "A"),
                ("γ", "A"),
                ("γ", "B"),
                ("α", "B"),
                ("α", "C"),
                ("β", "C"),
            ],
        )
        .unwrap()
    }

    fn uniform_bit() -> Vec<f64> {
        vec![0.5, 0.5]
    }

    #[test]
    fn network_invariants() {
        // Latent without children is rejected.
        assert!(CausalNetwork::from_names(vec![("A", 2)], vec!["λ"], vec![]).is_err());
        // Observed cycle is rejected.
        assert!(CausalNetwork::from_names(
            vec![("A", 2), ("B", 2)],
            vec![],
            vec![("A", "B"), ("B", "A")],
        )
        .is_err());
    }

    #[test]
    fn classical_deterministic_point_mass() {
        let net = triangle_net();
        let model = ClassicalModel {
            source_dists: vec![vec![1.0], vec![1.0], vec![1.0]],
            responses: vec![
                Some(ResponseTable::deterministic(vec![1, 1], 2, |_| 1)),
                Some(ResponseTable::deterministic(vec![1, 1], 2, |_| 0)),
                Some(ResponseTable::deterministic(vec![1, 1], 2, |_| 1)),
            ],
        };
        let b = classical_behavior(&net, &model).unwrap();
        assert_eq!(b.prob(&[1, 0, 1], &[]), 1.0);
    }

    #[test]
    fn classical_xor_triangle_matches_enumeration() {
        // Uniform binary sources, a = β⊕γ, b = γ⊕α, c = α⊕β.
        let net = triangle_net();
        let model = ClassicalModel {
            source_dists: vec![uniform_bit(), uniform_bit(), uniform_bit()],
            responses: vec![
                Some(ResponseTable::deterministic(vec![2, 2], 2, |p| p[0] ^ p[1])),
                Some(ResponseTable::deterministic(vec![2, 2], 2, |p| p[0] ^ p[1])),
                Some(ResponseTable::deterministic(vec![2, 2], 2, |p| p[0] ^ p[1])),
            ],
        };
        let b = classical_behavior(&net, &model).unwrap();

        // Brute-force oracle over the 8 latent triples.
        let mut oracle = vec![0.0; 8];
        for beta in 0..2usize {
            for gamma in 0..2usize {
                for alpha in 0..2usize {
                    let (a, bb, c) = (beta ^ gamma, gamma ^ alpha, alpha ^ beta);
                    oracle[(a << 2) | (bb << 1) | c] += 0.125;
                }
            }
        }
        for (outs, _, p) in b.iter() {
            let idx = (outs[0] << 2) | (outs[1] << 1) | outs[2];
            assert!((p - oracle[idx]).abs() < 1e-15);
            // Parity support: a ⊕ b ⊕ c = 0 uniformly.
            let parity = outs[0] ^ outs[1] ^ outs[2];
            if parity == 0 {
                assert!((p - 0.25).abs() < 1e-15);
            } else {
                assert_eq!(p, 0.0);
            }
        }
    }

    #[test]
    fn classical_bell_shared_bit() {
        let net = CausalNetwork::from_names(
            vec![("A", 2), ("B", 2)],
            vec!["λ"],
            vec![("λ", "A"), ("λ", "B")],
        )
        .unwrap();
        let model = ClassicalModel {
            source_dists: vec![uniform_bit()],
            responses: vec![
                Some(ResponseTable::deterministic(vec![2], 2, |p| p[0])),
                Some(ResponseTable::deterministic(vec![2], 2, |p| p[0])),
            ],
        };
        let b = classical_behavior(&net, &model).unwrap();
        assert!((b.prob(&[0, 0], &[]) - 0.5).abs() < 1e-15);
        assert!((b.prob(&[1, 1], &[]) - 0.5).abs() < 1e-15);
        assert_eq!(b.prob(&[0, 1], &[]), 0.0);
    }

    #[test]
    fn quantum_uniform_when_maximally_mixed() {
        let strategy = scenarios::test_support::mixed_triangle_strategy();
        let b = quantum_behavior(&strategy).unwrap();
        for (_, _, p) in b.iter() {
            assert!((p - 1.0 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn do_on_triangle_is_the_marginal() {
        let strategy = scenarios::rgb4_strategy(&scenarios::Rgb4Params::new(0.7)).unwrap();
        let obs = quantum_behavior(&strategy).unwrap();
        let marg = obs.marginal(&["B", "C"]).unwrap();
        let done = pearl_do_quantum(&strategy, "A").unwrap();
        assert_eq!(done.given().len(), 1);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let diff = (done.prob(&[b, c], &[a]) - marg.prob(&[b, c], &[])).abs();
                    assert!(diff < 1e-12);
                }
            }
        }
    }

    #[test]
    fn do_on_single_party_single_source_net() {
        // One source, one party: do on the only party leaves a scalar table.
        let net = CausalNetwork::from_names(vec![("A", 2)], vec!["λ"], vec![("λ", "A")]).unwrap();
        let layout = SubsystemLayout::new(vec![("A".into(), 2)]).unwrap();
        let state = DensityOperator::new(layout.clone(), ComplexMatrix::diagonal(&[0.3, 0.7]))
            .unwrap();
        let povm = Povm::new(
            layout,
            vec![vec![
                ComplexMatrix::diagonal(&[1.0, 0.0]),
                ComplexMatrix::diagonal(&[0.0, 1.0]),
            ]],
        )
        .unwrap();
        let strategy = QuantumStrategy {
            network: net,
            source_states: vec![state],
            povms: vec![Some(povm)],
        };
        let b = pearl_do_quantum(&strategy, "A").unwrap();
        assert!(b.parties().is_empty());
        assert_eq!(b.given(), &[("A".to_string(), 2)]);
        assert!((b.prob(&[], &[0]) - 1.0).abs() < 1e-12);
        assert!((b.prob(&[], &[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instrumental_do_formula() {
        // P(b | do(a)) = Tr(rho (1 ⊗ E_{b|a})).
        let strategy = scenarios::instrumental_default();
        let done = pearl_do_quantum(&strategy, "A").unwrap();
        let rho = &strategy.source_states[0];
        let povm_b = strategy.povms[2].as_ref().unwrap();
        for a in 0..2usize {
            for b in 0..2usize {
                let full = ComplexMatrix::identity(2).kron(povm_b.element(a, b));
                let expect = rho.matrix().mul(&full).trace().re;
                // Conditioning order is [x, a]; the result is x-independent.
                for x in 0..2usize {
                    assert!((done.prob(&[b], &[x, a]) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn classical_embedding_matches_quantum_diagonal() {
        // Diagonal strategies are classical models in disguise; check the two
        // evaluation paths agree on randomized triangles.
        use rand::rngs::StdRng;
        use rand::SeedableRng;
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..100 {
            let (strategy, net, model) =
                scenarios::test_support::random_diagonal_triangle(&mut rng);
            let qb = quantum_behavior(&strategy).unwrap();
            let cb = classical_behavior(&net, &model).unwrap();
            assert!(qb.max_abs_diff(&cb) < 1e-10);
        }
        let _ = (c(0.0, 0.0), cr(0.0)); // keep helper imports alive
    }
}
