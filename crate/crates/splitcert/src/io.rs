//! JSON schemas for networks, quantum strategies and split sequences, and
//! the CSV table writer. Matrices are row-major arrays of `[re, im]` pairs;
//! slot order everywhere follows the edge declaration order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complex::ComplexMatrix;
use crate::error::{Error, Result};
use crate::network::{CausalNetwork, NodeRef, QuantumStrategy};
use crate::splitting::{SplitSequence, SplitSpec};
use crate::tensor::{DensityOperator, Povm, SubsystemLayout};

pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservedDoc {
    pub name: String,
    pub card: usize,
}

/// On-disk form of a network, optionally carrying a quantum strategy.
///
/// `states` maps each latent to a density matrix over its children's slots
/// (edge order); `povms` maps each measured party to one element list per
/// observed-parent value combination (row-major over the parents in edge
/// order; a single list when there are none). `dims` optionally gives a
/// latent's per-child slot dimensions; qubits are assumed otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub observed: Vec<ObservedDoc>,
    pub latent: Vec<String>,
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub dims: BTreeMap<String, Vec<usize>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, MatrixLiteral>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub povms: BTreeMap<String, Vec<Vec<MatrixLiteral>>>,
}

fn matrix_to_literal(m: &ComplexMatrix) -> MatrixLiteral {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl NetworkDoc {
    pub fn network(&self) -> Result<CausalNetwork> {
        CausalNetwork::from_names(
            self.observed
                .iter()
                .map(|o| (o.name.as_str(), o.card))
                .collect(),
            self.latent.iter().map(String::as_str).collect(),
            self.edges
                .iter()
                .map(|(a, b)| (a.as_str(), b.as_str()))
                .collect(),
        )
    }

    /// Build the full strategy; requires `states` for every latent and
    /// `povms` for every measured party.
    pub fn strategy(&self) -> Result<QuantumStrategy> {
        let network = self.network()?;
        let mut source_states = Vec::new();
        for (l, name) in network.latent().iter().enumerate() {
            let literal = self
                .states
                .get(name)
                .ok_or_else(|| Error::Config(format!("missing state for latent `{name}`")))?;
            let matrix = ComplexMatrix::from_rows_re_im(literal)?;
            let children = network.latent_children(l);
            let dims = match self.dims.get(name) {
                Some(d) => {
                    if d.len() != children.len() {
                        return Err(Error::Config(format!(
                            "dims for `{name}` lists {} slots, children are {}",
                            d.len(),
                            children.len()
                        )));
                    }
                    d.clone()
                }
                None => {
                    let per: usize = 1 << children.len();
                    if matrix.rows() != per {
                        return Err(Error::Config(format!(
                            "state of `{name}` is {}-dimensional; give explicit dims for non-qubit slots",
                            matrix.rows()
                        )));
                    }
                    vec![2; children.len()]
                }
            };
            let slots: Vec<(String, usize)> = children
                .iter()
                .zip(&dims)
                .map(|(&p, &d)| (network.observed()[p].name.clone(), d))
                .collect();
            source_states.push(DensityOperator::new(SubsystemLayout::new(slots)?, matrix)?);
        }

        let inputs = network.inputs();
        let mut povms = Vec::new();
        for (p, node) in network.observed().iter().enumerate() {
            if inputs.contains(&p) {
                povms.push(None);
                continue;
            }
            let sets_literal = self
                .povms
                .get(&node.name)
                .ok_or_else(|| Error::Config(format!("missing POVM for party `{}`", node.name)))?;
            // Slot layout: this party's share of each parent source.
            let mut slots = Vec::new();
            for &(from, to) in network.edges() {
                if to != p {
                    continue;
                }
                if let NodeRef::Latent(l) = from {
                    let source = &network.latent()[l];
                    let pos = network
                        .latent_children(l)
                        .iter()
                        .position(|&q| q == p)
                        .expect("edge implies childhood");
                    let dim = self
                        .dims
                        .get(source)
                        .map(|d| d[pos])
                        .unwrap_or(2);
                    slots.push((format!("{source}->{}", node.name), dim));
                }
            }
            let sets: Vec<Vec<ComplexMatrix>> = sets_literal
                .iter()
                .map(|set| {
                    set.iter()
                        .map(|m| ComplexMatrix::from_rows_re_im(m))
                        .collect::<Result<_>>()
                })
                .collect::<Result<_>>()?;
            povms.push(Some(Povm::new(SubsystemLayout::new(slots)?, sets)?));
        }

        let strategy = QuantumStrategy {
            network,
            source_states,
            povms,
        };
        strategy.validate()?;
        Ok(strategy)
    }

    /// Serialize a strategy (network, states and POVMs) to the document form.
    pub fn from_strategy(strategy: &QuantumStrategy) -> Self {
        let net = &strategy.network;
        let observed = net
            .observed()
            .iter()
            .map(|o| ObservedDoc {
                name: o.name.clone(),
                card: o.card,
            })
            .collect();
        let edges = net
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
        let mut dims = BTreeMap::new();
        let mut states = BTreeMap::new();
        for (l, name) in net.latent().iter().enumerate() {
            let state = &strategy.source_states[l];
            states.insert(name.clone(), matrix_to_literal(state.matrix()));
            let slot_dims = state.layout().dims();
            if slot_dims.iter().any(|&d| d != 2) {
                dims.insert(name.clone(), slot_dims);
            }
        }
        let mut povms = BTreeMap::new();
        for (p, node) in net.observed().iter().enumerate() {
            if let Some(povm) = &strategy.povms[p] {
                let sets = povm
                    .sets()
                    .iter()
                    .map(|set| set.iter().map(matrix_to_literal).collect())
                    .collect();
                povms.insert(node.name.clone(), sets);
            }
        }
        NetworkDoc {
            observed,
            latent: net.latent().to_vec(),
            edges,
            dims,
            states,
            povms,
        }
    }
}

/// Parse a split sequence from its `[ ["γ","A"], ... ]` JSON form.
pub fn split_sequence_from_json(text: &str) -> Result<SplitSequence> {
    let pairs: Vec<(String, String)> = serde_json::from_str(text)?;
    SplitSequence::new(
        pairs
            .iter()
            .map(|(s, p)| SplitSpec::new(s, p))
            .collect(),
    )
}

pub fn split_sequence_to_json(seq: &SplitSequence) -> String {
    let pairs: Vec<(&str, &str)> = seq
        .specs()
        .iter()
        .map(|s| (s.source.as_str(), s.party.as_str()))
        .collect();
    serde_json::to_string(&pairs).expect("pairs serialize")
}

pub fn strategy_from_json(text: &str) -> Result<QuantumStrategy> {
    let doc: NetworkDoc = serde_json::from_str(text)?;
    doc.strategy()
}

pub fn network_from_json(text: &str) -> Result<CausalNetwork> {
    let doc: NetworkDoc = serde_json::from_str(text)?;
    doc.network()
}
