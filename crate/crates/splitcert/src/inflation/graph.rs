//! Joint observational+interventional DAGs and their inflations: graphs with
//! copy-indexed sources and parties whose compatibility constraints any
//! classical model must satisfy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{CausalNetwork, NodeRef};
use crate::splitting::{split_latent_name, SplitSequence};

/// Post-intervention copy name of a party: the party name with a combining
/// circumflex.
pub fn hat_name(party: &str) -> String {
    format!("{party}\u{0302}")
}

/// The joint DAG of the observational experiment and the split experiments:
/// the original network plus, per split `source -> party`, a post-
/// intervention copy of the party fed by all of the party's other parents and
/// a fresh latent with the same distribution as the split source.
pub fn build_joint_dag(net: &CausalNetwork, splits: &SplitSequence) -> Result<CausalNetwork> {
    let mut observed: Vec<(String, usize)> = net
        .observed()
        .iter()
        .map(|o| (o.name.clone(), o.card))
        .collect();
    let mut latent: Vec<String> = net.latent().to_vec();
    // Edges in name form so index shifts cannot bite.
    let mut edges: Vec<(String, String)> = net
        .edges()
        .iter()
        .map(|&(from, to)| {
            let from_name = match from {
                NodeRef::Latent(i) => net.latent()[i].clone(),
                NodeRef::Observed(i) => net.observed()[i].name.clone(),
            };
            (from_name, net.observed()[to].name.clone())
        })
        .collect();

    for spec in splits.specs() {
        let party_idx = net
            .observed_index(&spec.party)
            .ok_or_else(|| Error::UnknownParty(spec.party.clone()))?;
        let source_idx = net.latent_index(&spec.source).ok_or_else(|| Error::NotAnEdge {
            source_node: spec.source.clone(),
            party: spec.party.clone(),
        })?;
        if !net.has_edge(source_idx, party_idx) {
            return Err(Error::NotAnEdge {
                source_node: spec.source.clone(),
                party: spec.party.clone(),
            });
        }

        let mut copy = hat_name(&spec.party);
        if observed.iter().any(|(n, _)| *n == copy) {
            copy = format!("{copy}({})", spec.source);
        }
        let fresh = split_latent_name(&spec.source, &spec.party);
        observed.push((copy.clone(), net.observed()[party_idx].card));
        latent.push(fresh.clone());

        // The copy keeps every original parent except the split source.
        for l in net.latent_parents(party_idx) {
            if l != source_idx {
                edges.push((net.latent()[l].clone(), copy.clone()));
            }
        }
        for o in net.observed_parents(party_idx) {
            edges.push((net.observed()[o].name.clone(), copy.clone()));
        }
        edges.push((fresh, copy));
    }

    CausalNetwork::from_names(
        observed.iter().map(|(n, c)| (n.as_str(), *c)).collect(),
        latent.iter().map(String::as_str).collect(),
        edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect(),
    )
}

/// Declarative wiring of an inflation: copies of latent and observed nodes
/// with each observed copy naming the latent copies it reads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InflationWiring {
    /// `(copy name, original latent name)`.
    pub latents: Vec<(String, String)>,
    /// `(copy name, original observed name, latent copy parents)`.
    pub observed: Vec<(String, String, Vec<String>)>,
}

/// An inflation of a two-layer joint DAG: copy-indexed nodes with a copy map
/// back to the original graph, edge structure preserved copy-wise.
#[derive(Debug, Clone)]
pub struct InflationGraph {
    base: CausalNetwork,
    /// `(copy name, original observed index, cardinality)`.
    observed: Vec<(String, usize, usize)>,
    /// `(copy name, original latent index)`.
    latent: Vec<(String, usize)>,
    /// latent copy index -> observed copy index.
    edges: Vec<(usize, usize)>,
}

impl InflationGraph {
    pub fn from_wiring(base: &CausalNetwork, wiring: &InflationWiring) -> Result<Self> {
        if base
            .edges()
            .iter()
            .any(|&(from, _)| matches!(from, NodeRef::Observed(_)))
        {
            return Err(Error::WiringInconsistent(
                "inflation requires a two-layer base graph without observed-to-observed edges"
                    .into(),
            ));
        }
        let mut latent = Vec::new();
        for (copy, orig) in &wiring.latents {
            let orig_idx = base
                .latent_index(orig)
                .ok_or_else(|| Error::WiringInconsistent(format!("unknown latent `{orig}`")))?;
            if wiring.latents.iter().filter(|(c, _)| c == copy).count() > 1 {
                return Err(Error::WiringInconsistent(format!(
                    "duplicate latent copy `{copy}`"
                )));
            }
            latent.push((copy.clone(), orig_idx));
        }
        let mut observed = Vec::new();
        let mut edges = Vec::new();
        for (copy, orig, parents) in &wiring.observed {
            let orig_idx = base
                .observed_index(orig)
                .ok_or_else(|| Error::WiringInconsistent(format!("unknown party `{orig}`")))?;
            if wiring.observed.iter().filter(|(c, _, _)| c == copy).count() > 1 {
                return Err(Error::WiringInconsistent(format!(
                    "duplicate observed copy `{copy}`"
                )));
            }
            let node_idx = observed.len();
            observed.push((copy.clone(), orig_idx, base.observed()[orig_idx].card));

            // The copy's parents must map one-to-one onto the original's.
            let mut base_parents = base.latent_parents(orig_idx);
            for parent_copy in parents {
                let parent_idx = latent
                    .iter()
                    .position(|(c, _)| c == parent_copy)
                    .ok_or_else(|| {
                        Error::WiringInconsistent(format!("unknown latent copy `{parent_copy}`"))
                    })?;
                let parent_orig = latent[parent_idx].1;
                let slot = base_parents
                    .iter()
                    .position(|&l| l == parent_orig)
                    .ok_or_else(|| {
                        Error::WiringInconsistent(format!(
                            "edge `{parent_copy}` -> `{copy}` does not project to a base edge"
                        ))
                    })?;
                base_parents.swap_remove(slot);
                edges.push((parent_idx, node_idx));
            }
            if !base_parents.is_empty() {
                return Err(Error::WiringInconsistent(format!(
                    "copy `{copy}` is missing parents for {} base edge(s)",
                    base_parents.len()
                )));
            }
        }
        Ok(InflationGraph {
            base: base.clone(),
            observed,
            latent,
            edges,
        })
    }

    pub fn base(&self) -> &CausalNetwork {
        &self.base
    }

    pub fn observed(&self) -> &[(String, usize, usize)] {
        &self.observed
    }

    pub fn latent(&self) -> &[(String, usize)] {
        &self.latent
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.observed.len()
    }

    /// Joint outcome space size over all observed copies.
    pub fn outcome_space(&self) -> usize {
        self.observed.iter().map(|&(_, _, c)| c).product()
    }

    pub fn observed_index(&self, name: &str) -> Option<usize> {
        self.observed.iter().position(|(n, _, _)| n == name)
    }

    /// Latent parents of an observed copy, in edge order.
    pub fn latent_parents(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(l, o)| (o == node).then_some(l))
            .collect()
    }

    /// First inflated copy of each base observed node, if present.
    pub fn canonical_copy(&self, base_node: usize) -> Option<usize> {
        self.observed.iter().position(|&(_, o, _)| o == base_node)
    }

    /// All exchange symmetries: permutations of observed copies induced by
    /// permuting latent copies within their copy classes. Returned as
    /// observed-index permutations, identity excluded.
    pub fn copy_symmetries(&self) -> Result<Vec<Vec<usize>>> {
        // Copy classes of latents, per original latent node.
        let mut classes: Vec<Vec<usize>> = vec![Vec::new(); self.base.latent().len()];
        for (i, &(_, orig)) in self.latent.iter().enumerate() {
            classes[orig].push(i);
        }
        let perm_count: usize = classes
            .iter()
            .map(|c| (1..=c.len()).product::<usize>())
            .product();
        if perm_count > 10_000 {
            return Err(Error::WiringInconsistent(format!(
                "copy-symmetry enumeration too large ({perm_count} candidates)"
            )));
        }

        // Enumerate all per-class permutation combinations.
        let mut latent_perms: Vec<Vec<usize>> = vec![(0..self.latent.len()).collect()];
        for class in classes.iter().filter(|c| c.len() > 1) {
            let class_perms = permutations(class.len());
            let mut next = Vec::new();
            for base_perm in &latent_perms {
                for p in &class_perms {
                    let mut perm = base_perm.clone();
                    for (slot, &img) in p.iter().enumerate() {
                        perm[class[slot]] = class[img];
                    }
                    next.push(perm);
                }
            }
            latent_perms = next;
        }

        let mut result = Vec::new();
        'candidates: for lperm in &latent_perms {
            if lperm.iter().enumerate().all(|(i, &j)| i == j) {
                continue;
            }
            // Each observed copy must map to the unique copy of the same
            // original whose parent multiset is the permuted one.
            let mut operm = vec![usize::MAX; self.observed.len()];
            for node in 0..self.observed.len() {
                let mut image_parents: Vec<usize> = self
                    .latent_parents(node)
                    .into_iter()
                    .map(|l| lperm[l])
                    .collect();
                image_parents.sort_unstable();
                let mut target = None;
                for cand in 0..self.observed.len() {
                    if self.observed[cand].1 != self.observed[node].1 {
                        continue;
                    }
                    let mut cand_parents = self.latent_parents(cand);
                    cand_parents.sort_unstable();
                    if cand_parents == image_parents {
                        target = Some(cand);
                        break;
                    }
                }
                match target {
                    Some(t) => operm[node] = t,
                    None => continue 'candidates,
                }
            }
            // Must be a bijection.
            let mut seen = vec![false; self.observed.len()];
            if operm.iter().any(|&t| std::mem::replace(&mut seen[t], true)) {
                continue;
            }
            if !result.contains(&operm) {
                result.push(operm);
            }
        }
        Ok(result)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let smaller = permutations(n - 1);
    for p in smaller {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// Shipped inflation wirings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InflationPreset {
    /// One copy of every node: the joint DAG itself.
    Trivial,
    /// The single-extra-source-copy inflation of the triangle joint DAG for
    /// the γ->A split. `shared_repreparation` reuses one re-preparation copy
    /// for both post-intervention parties instead of drawing independent
    /// ones.
    FourOutcomeSplit { shared_repreparation: bool },
}

impl InflationPreset {
    pub fn wiring(&self, base: &CausalNetwork) -> Result<InflationWiring> {
        match self {
            InflationPreset::Trivial => {
                let latents = base
                    .latent()
                    .iter()
                    .map(|l| (l.clone(), l.clone()))
                    .collect();
                let observed = base
                    .observed()
                    .iter()
                    .enumerate()
                    .map(|(i, o)| {
                        let parents = base
                            .latent_parents(i)
                            .into_iter()
                            .map(|l| base.latent()[l].clone())
                            .collect();
                        (o.name.clone(), o.name.clone(), parents)
                    })
                    .collect();
                Ok(InflationWiring { latents, observed })
            }
            InflationPreset::FourOutcomeSplit {
                shared_repreparation,
            } => {
                let hat_a = hat_name("A");
                let hat_gamma = split_latent_name("γ", "A");
                for name in ["A", "B", "C"] {
                    if base.observed_index(name).is_none() {
                        return Err(Error::WiringInconsistent(format!(
                            "preset expects party `{name}` in the joint DAG"
                        )));
                    }
                }
                for name in ["α", "β", "γ", hat_gamma.as_str()] {
                    if base.latent_index(name).is_none() {
                        return Err(Error::WiringInconsistent(format!(
                            "preset expects latent `{name}` in the joint DAG"
                        )));
                    }
                }
                let second_hat = if *shared_repreparation {
                    "γ̂⁰".to_string()
                } else {
                    "γ̂¹".to_string()
                };
                let mut latents = vec![
                    ("α⁰".to_string(), "α".to_string()),
                    ("β⁰".to_string(), "β".to_string()),
                    ("β¹".to_string(), "β".to_string()),
                    ("γ⁰".to_string(), "γ".to_string()),
                    ("γ̂⁰".to_string(), hat_gamma.clone()),
                ];
                if !shared_repreparation {
                    latents.push(("γ̂¹".to_string(), hat_gamma.clone()));
                }
                let observed = vec![
                    ("A⁰".into(), "A".into(), vec!["γ⁰".into(), "β⁰".into()]),
                    (
                        "Â⁰⁰".into(),
                        hat_a.clone(),
                        vec!["β⁰".into(), "γ̂⁰".into()],
                    ),
                    ("B⁰".into(), "B".into(), vec!["α⁰".into(), "γ⁰".into()]),
                    ("C⁰".into(), "C".into(), vec!["β⁰".into(), "α⁰".into()]),
                    ("A⁰¹".into(), "A".into(), vec!["γ⁰".into(), "β¹".into()]),
                    (
                        "Â⁰¹".into(),
                        hat_a,
                        vec!["β¹".into(), second_hat],
                    ),
                    ("C¹⁰".into(), "C".into(), vec!["β¹".into(), "α⁰".into()]),
                ];
                Ok(InflationWiring { latents, observed })
            }
        }
    }
}

/// Build an inflation of `base` from a preset.
pub fn build_inflation(base: &CausalNetwork, preset: InflationPreset) -> Result<InflationGraph> {
    InflationGraph::from_wiring(base, &preset.wiring(base)?)
}
