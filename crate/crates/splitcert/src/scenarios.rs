//! Benchmark constructions on the triangle network: the four-outcome
//! excitation-counting family with depolarizing noise, the binary
//! interventional CHSH-style strategy, and the default instrumental and
//! unrelated-confounders strategies used by the do-recovery demos.

use num_complex::Complex64;

use crate::behavior::Behavior;
use crate::complex::{cr, ComplexMatrix, C_ZERO};
use crate::error::{Error, Result};
use crate::network::{CausalNetwork, QuantumStrategy};
use crate::splitting::{interventional_behavior, SplitSequence};
use crate::tensor::{DensityOperator, Povm, SubsystemLayout};

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::ParamOutOfRange(format!("{name} = {x} not in [0, 1]")));
    }
    Ok(())
}

/// Parameters of the four-outcome triangle family.
#[derive(Debug, Clone)]
pub struct Rgb4Params {
    /// Superposition weight of the single-excitation measurement basis.
    pub u: f64,
    /// Source amplitude on the right-going excitation; defaults to sqrt(2/3).
    pub lambda0: f64,
    /// Per-source visibilities (alpha, beta, gamma), each defaulting to 1.
    pub visibilities: (f64, f64, f64),
}

impl Rgb4Params {
    pub fn new(u: f64) -> Self {
        Rgb4Params {
            u,
            lambda0: (2.0f64 / 3.0).sqrt(),
            visibilities: (1.0, 1.0, 1.0),
        }
    }

    pub fn with_visibilities(mut self, v_alpha: f64, v_beta: f64, v_gamma: f64) -> Self {
        self.visibilities = (v_alpha, v_beta, v_gamma);
        self
    }

    fn validate(&self) -> Result<()> {
        check_unit("u", self.u)?;
        if !(self.lambda0 > 0.0 && self.lambda0 < 1.0) {
            return Err(Error::ParamOutOfRange(format!(
                "lambda0 = {} not in (0, 1)",
                self.lambda0
            )));
        }
        check_unit("v_alpha", self.visibilities.0)?;
        check_unit("v_beta", self.visibilities.1)?;
        check_unit("v_gamma", self.visibilities.2)?;
        Ok(())
    }
}

/// Triangle wiring shared by both families. Edge order fixes every local slot
/// order: each source lists its earlier-cycle party first, and each party
/// holds (qubit from the source toward its successor, qubit from the source
/// toward its predecessor).
fn triangle_network(card: usize) -> CausalNetwork {
    CausalNetwork::from_names(
        vec![("A", card), ("B", card), ("C", card)],
        vec!["α", "β", "γ"],
        vec![
            ("γ", "A"),
            ("β", "C"),
            ("α", "B"),
            ("β", "A"),
            ("γ", "B"),
            ("α", "C"),
        ],
    )
    .expect("canonical triangle is valid")
}

/// One-excitation pair state `λ0|10> + λ1|01>` depolarized to visibility
/// `v`, on two qubit slots named after the children. The λ0 amplitude puts
/// the excitation on the first slot, the earlier-cycle party.
fn pair_source(children: (&str, &str), lambda0: f64, v: f64) -> Result<DensityOperator> {
    let lambda1 = (1.0 - lambda0 * lambda0).sqrt();
    let psi = [C_ZERO, cr(lambda1), cr(lambda0), C_ZERO];
    let pure = ComplexMatrix::projector(&psi);
    let mixed = ComplexMatrix::identity(4).scale(cr(0.25));
    let rho = pure.scale(cr(v)).add(&mixed.scale(cr(1.0 - v)));
    DensityOperator::new(
        SubsystemLayout::new(vec![(children.0.into(), 2), (children.1.into(), 2)])?,
        rho,
    )
}

/// The four-outcome excitation-counting measurement on a party's ordered
/// qubit pair (toward-successor slot first): projectors onto the zero- and
/// two-excitation states plus the single-excitation superpositions, with the
/// `u` weight on the excitation sitting in the first slot.
fn excitation_povm(slots: (&str, &str), u: f64) -> Result<Povm> {
    let v = (1.0 - u * u).sqrt();
    let layout = SubsystemLayout::new(vec![(slots.0.into(), 2), (slots.1.into(), 2)])?;
    let basis: Vec<Vec<Complex64>> = vec![
        vec![cr(1.0), C_ZERO, C_ZERO, C_ZERO],
        vec![C_ZERO, cr(v), cr(u), C_ZERO],
        vec![C_ZERO, cr(-u), cr(v), C_ZERO],
        vec![C_ZERO, C_ZERO, C_ZERO, cr(1.0)],
    ];
    Povm::projective(layout, &basis)
}

/// The four-outcome triangle strategy: every source distributes the same
/// depolarized pair state and every party counts excitations, measuring the
/// single-excitation sector in the `u`-superposition basis. Outcomes are
/// labeled 0..3 for zero excitations, the two single-excitation projectors,
/// and two excitations.
pub fn rgb4_strategy(params: &Rgb4Params) -> Result<QuantumStrategy> {
    params.validate()?;
    let (v_alpha, v_beta, v_gamma) = params.visibilities;
    let network = triangle_network(4);
    // Latent order is (α, β, γ); children orders follow the edge list.
    let source_states = vec![
        pair_source(("B", "C"), params.lambda0, v_alpha)?,
        pair_source(("C", "A"), params.lambda0, v_beta)?,
        pair_source(("A", "B"), params.lambda0, v_gamma)?,
    ];
    // Party slot order from the edge list: A: (γ,β), B: (α,γ), C: (β,α).
    let povms = vec![
        Some(excitation_povm(("γ->A", "β->A"), params.u)?),
        Some(excitation_povm(("α->B", "γ->B"), params.u)?),
        Some(excitation_povm(("β->C", "α->C"), params.u)?),
    ];
    let strategy = QuantumStrategy {
        network,
        source_states,
        povms,
    };
    strategy.validate()?;
    Ok(strategy)
}

/// Observational and split (edge γ->A) tables of the four-outcome family.
pub fn rgb4_tables(params: &Rgb4Params) -> Result<(Behavior, Behavior)> {
    let strategy = rgb4_strategy(params)?;
    let obs = crate::network::quantum_behavior(&strategy)?;
    let int = interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("γ", "A")])?)?;
    Ok((obs, int))
}

/// Parameters of the binary interventional strategy.
#[derive(Debug, Clone)]
pub struct FritzParams {
    /// Bias of the classical input sources, `p(α=1) = p(β=1) = ε`.
    pub epsilon: f64,
    /// Visibility of the entangled pair shared by Alice and Bob.
    pub visibility: f64,
}

impl FritzParams {
    pub fn new(epsilon: f64) -> Self {
        FritzParams {
            epsilon,
            visibility: 1.0,
        }
    }

    pub fn with_visibility(mut self, v: f64) -> Self {
        self.visibility = v;
        self
    }

    fn validate(&self) -> Result<()> {
        check_unit("epsilon", self.epsilon)?;
        check_unit("visibility", self.visibility)
    }
}

fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diagonal(&[1.0, -1.0])
}

fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, 2, vec![C_ZERO, cr(1.0), cr(1.0), C_ZERO]).unwrap()
}

/// Two-outcome projectors of a +-1-valued qubit observable: outcome `a` maps
/// to the `(-1)^a` eigenspace, so `E_a = (I + (-1)^a O)/2`.
fn dichotomic_elements(observable: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(2);
    vec![
        id.add(observable).scale(cr(0.5)),
        id.sub(observable).scale(cr(0.5)),
    ]
}

/// A perfectly correlated classical bit pair `sum_x p(x) |xx><xx|` on two
/// slots named after the children.
fn shared_bit(children: (&str, &str), p1: f64) -> Result<DensityOperator> {
    DensityOperator::new(
        SubsystemLayout::new(vec![(children.0.into(), 2), (children.1.into(), 2)])?,
        ComplexMatrix::diagonal(&[1.0 - p1, 0.0, 0.0, p1]),
    )
}

/// The binary triangle strategy: γ shares an entangled pair between Alice and
/// Bob, α and β distribute ε-biased classical bits, Alice and Bob run the
/// optimal CHSH measurements keyed by their bits and Charlie outputs the AND
/// of his two bits. Sign conventions are tuned so that at full visibility
/// `<A_0 B_0> = -1/√2` and the other three settings give `+1/√2`.
pub fn fritz_strategy(params: &FritzParams) -> Result<QuantumStrategy> {
    params.validate()?;
    let network = CausalNetwork::from_names(
        vec![("A", 2), ("B", 2), ("C", 2)],
        vec!["γ", "β", "α"],
        vec![
            ("γ", "A"),
            ("γ", "B"),
            ("β", "A"),
            ("β", "C"),
            ("α", "B"),
            ("α", "C"),
        ],
    )?;

    // |ψ+> = (|00> + |11>)/√2 depolarized to the requested visibility.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi_plus = [cr(s), C_ZERO, C_ZERO, cr(s)];
    let pure = ComplexMatrix::projector(&psi_plus);
    let mixed = ComplexMatrix::identity(4).scale(cr(0.25));
    let rho_gamma = DensityOperator::new(
        SubsystemLayout::new(vec![("A".into(), 2), ("B".into(), 2)])?,
        pure.scale(cr(params.visibility))
            .add(&mixed.scale(cr(1.0 - params.visibility))),
    )?;

    let eps = params.epsilon;
    let rho_beta = shared_bit(("A", "C"), eps)?;
    let rho_alpha = shared_bit(("B", "C"), eps)?;

    // Alice measures -σz or σx on her qubit keyed by the β bit, Bob measures
    // (σz+σx)/√2 or (σx-σz)/√2 keyed by the α bit. Both hold (qubit, bit).
    let z = pauli_z();
    let x = pauli_x();
    let alice_obs = [z.scale(cr(-1.0)), x.clone()];
    let bob_obs = [
        z.add(&x).scale(cr(s)),
        x.sub(&z).scale(cr(s)),
    ];

    let keyed_povm = |slots: (&str, &str), obs: &[ComplexMatrix; 2]| -> Result<Povm> {
        let layout = SubsystemLayout::new(vec![(slots.0.into(), 2), (slots.1.into(), 2)])?;
        let bit0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let bit1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        let mut elements = vec![ComplexMatrix::zeros(4, 4), ComplexMatrix::zeros(4, 4)];
        for (bit, proj_bit) in [(0usize, &bit0), (1usize, &bit1)] {
            for (a, m) in dichotomic_elements(&obs[bit]).into_iter().enumerate() {
                elements[a] = elements[a].add(&m.kron(proj_bit));
            }
        }
        Povm::new(layout, vec![elements])
    };

    // Charlie reads his two bits and outputs their AND.
    let charlie = {
        let layout = SubsystemLayout::new(vec![("β->C".into(), 2), ("α->C".into(), 2)])?;
        let mut e0 = ComplexMatrix::zeros(4, 4);
        let mut e1 = ComplexMatrix::zeros(4, 4);
        for bx in 0..2usize {
            for by in 0..2usize {
                let idx = bx * 2 + by;
                let mut proj = ComplexMatrix::zeros(4, 4);
                proj[(idx, idx)] = cr(1.0);
                if bx & by == 1 {
                    e1 = e1.add(&proj);
                } else {
                    e0 = e0.add(&proj);
                }
            }
        }
        Povm::new(layout, vec![vec![e0, e1]])?
    };

    let povms = vec![
        Some(keyed_povm(("γ->A", "β->A"), &alice_obs)?),
        Some(keyed_povm(("γ->B", "α->B"), &bob_obs)?),
        Some(charlie),
    ];

    let strategy = QuantumStrategy {
        network,
        source_states: vec![rho_gamma, rho_beta, rho_alpha],
        povms,
    };
    strategy.validate()?;
    Ok(strategy)
}

/// The four data tables of the binary interventional experiment:
/// observational, split on α->B, split on β->A, and both splits.
pub fn fritz_tables(params: &FritzParams) -> Result<(Behavior, Behavior, Behavior, Behavior)> {
    let strategy = fritz_strategy(params)?;
    let obs = crate::network::quantum_behavior(&strategy)?;
    let int_alpha = interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("α", "B")])?)?;
    let int_beta = interventional_behavior(&strategy, &SplitSequence::from_pairs(&[("β", "A")])?)?;
    let int_alphabeta = interventional_behavior(
        &strategy,
        &SplitSequence::from_pairs(&[("β", "A"), ("α", "B")])?,
    )?;
    Ok((obs, int_alpha, int_beta, int_alphabeta))
}

/// Instrumental scenario with the CHSH-optimal realization: a shared
/// entangled pair, Alice keyed by the free input X, Bob keyed by Alice's
/// outcome.
pub fn instrumental_default() -> QuantumStrategy {
    let network = CausalNetwork::from_names(
        vec![("X", 2), ("A", 2), ("B", 2)],
        vec!["ρ"],
        vec![("ρ", "A"), ("ρ", "B"), ("X", "A"), ("A", "B")],
    )
    .expect("instrumental network is valid");

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = [cr(s), C_ZERO, C_ZERO, cr(s)];
    let rho = DensityOperator::new(
        SubsystemLayout::new(vec![("A".into(), 2), ("B".into(), 2)]).unwrap(),
        ComplexMatrix::projector(&phi_plus),
    )
    .unwrap();

    let z = pauli_z();
    let x = pauli_x();
    let layout_a = SubsystemLayout::new(vec![("ρ->A".into(), 2)]).unwrap();
    let alice = Povm::new(
        layout_a,
        vec![dichotomic_elements(&z), dichotomic_elements(&x)],
    )
    .unwrap();
    let layout_b = SubsystemLayout::new(vec![("ρ->B".into(), 2)]).unwrap();
    let bob = Povm::new(
        layout_b,
        vec![
            dichotomic_elements(&z.add(&x).scale(cr(s))),
            dichotomic_elements(&z.sub(&x).scale(cr(s))),
        ],
    )
    .unwrap();

    QuantumStrategy {
        network,
        source_states: vec![rho],
        povms: vec![None, Some(alice), Some(bob)],
    }
}

/// Unrelated-confounders scenario: middle party B shares one pair with Alice
/// and one with Charlie, outputs the parity of its two halves, and keys both
/// neighbors' measurements.
pub fn uc_default() -> QuantumStrategy {
    let network = CausalNetwork::from_names(
        vec![("A", 2), ("B", 2), ("C", 2)],
        vec!["γ", "α"],
        vec![
            ("γ", "A"),
            ("γ", "B"),
            ("α", "B"),
            ("α", "C"),
            ("B", "A"),
            ("B", "C"),
        ],
    )
    .expect("UC network is valid");

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = [cr(s), C_ZERO, C_ZERO, cr(s)];
    let pair = |first: &str, second: &str| {
        DensityOperator::new(
            SubsystemLayout::new(vec![(first.into(), 2), (second.into(), 2)]).unwrap(),
            ComplexMatrix::projector(&phi_plus),
        )
        .unwrap()
    };

    let z = pauli_z();
    let x = pauli_x();

    // B measures the parity of its two halves.
    let bob = {
        let layout =
            SubsystemLayout::new(vec![("γ->B".into(), 2), ("α->B".into(), 2)]).unwrap();
        let mut even = ComplexMatrix::zeros(4, 4);
        let mut odd = ComplexMatrix::zeros(4, 4);
        for i in 0..4usize {
            let mut proj = ComplexMatrix::zeros(4, 4);
            proj[(i, i)] = cr(1.0);
            if (i / 2) ^ (i % 2) == 0 {
                even = even.add(&proj);
            } else {
                odd = odd.add(&proj);
            }
        }
        Povm::new(layout, vec![vec![even, odd]]).unwrap()
    };

    let alice = Povm::new(
        SubsystemLayout::new(vec![("γ->A".into(), 2)]).unwrap(),
        vec![dichotomic_elements(&z), dichotomic_elements(&x)],
    )
    .unwrap();
    let charlie = Povm::new(
        SubsystemLayout::new(vec![("α->C".into(), 2)]).unwrap(),
        vec![
            dichotomic_elements(&z.add(&x).scale(cr(s))),
            dichotomic_elements(&z.sub(&x).scale(cr(s))),
        ],
    )
    .unwrap();

    QuantumStrategy {
        network,
        source_states: vec![pair("A", "B"), pair("B", "C")],
        povms: vec![Some(alice), Some(bob), Some(charlie)],
    }
}

/// Strategy and network generators used by the randomized checks.
#[doc(hidden)]
pub mod test_support {
    use super::*;
    use crate::network::{ClassicalModel, NodeRef, ResponseTable};
    use rand::Rng;

    /// All sources maximally mixed, all parties in the computational basis.
    pub fn mixed_triangle_strategy() -> QuantumStrategy {
        let network = triangle_network(4);
        let mixed = |a: &str, b: &str| {
            DensityOperator::new(
                SubsystemLayout::new(vec![(a.into(), 2), (b.into(), 2)]).unwrap(),
                ComplexMatrix::identity(4).scale(cr(0.25)),
            )
            .unwrap()
        };
        let comp = |a: &str, b: &str| {
            let layout = SubsystemLayout::new(vec![(a.into(), 2), (b.into(), 2)]).unwrap();
            let mut elements = Vec::new();
            for i in 0..4usize {
                let mut proj = ComplexMatrix::zeros(4, 4);
                proj[(i, i)] = cr(1.0);
                elements.push(proj);
            }
            Povm::new(layout, vec![elements]).unwrap()
        };
        QuantumStrategy {
            network,
            source_states: vec![mixed("B", "C"), mixed("C", "A"), mixed("A", "B")],
            povms: vec![
                Some(comp("γ->A", "β->A")),
                Some(comp("α->B", "γ->B")),
                Some(comp("β->C", "α->C")),
            ],
        }
    }

    fn random_dist(rng: &mut impl Rng, n: usize) -> Vec<f64> {
        let mut d: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum: f64 = d.iter().sum();
        for x in &mut d {
            *x /= sum;
        }
        d
    }

    /// A diagonal triangle strategy together with the classical model it
    /// embeds, for cross-checking the two evaluation paths.
    pub fn random_diagonal_triangle(
        rng: &mut impl Rng,
    ) -> (QuantumStrategy, CausalNetwork, ClassicalModel) {
        let cards: Vec<usize> = (0..3).map(|_| rng.random_range(2..=3)).collect();
        let network = CausalNetwork::from_names(
            vec![("A", cards[0]), ("B", cards[1]), ("C", cards[2])],
            vec!["α", "β", "γ"],
            vec![
                ("γ", "A"),
                ("β", "C"),
                ("α", "B"),
                ("β", "A"),
                ("γ", "B"),
                ("α", "C"),
            ],
        )
        .unwrap();

        // Diagonal sources: a joint distribution over the two bits sent out.
        let dists: Vec<Vec<f64>> = (0..3).map(|_| random_dist(rng, 4)).collect();
        let mk_state = |d: &[f64], a: &str, b: &str| {
            DensityOperator::new(
                SubsystemLayout::new(vec![(a.into(), 2), (b.into(), 2)]).unwrap(),
                ComplexMatrix::diagonal(d),
            )
            .unwrap()
        };
        let source_states = vec![
            mk_state(&dists[0], "B", "C"),
            mk_state(&dists[1], "C", "A"),
            mk_state(&dists[2], "A", "B"),
        ];

        // Diagonal POVMs: a stochastic response matrix over the 4 local
        // basis states.
        let mut response_mats: Vec<Vec<Vec<f64>>> = Vec::new();
        for &card in &cards {
            let mat: Vec<Vec<f64>> = (0..4).map(|_| random_dist(rng, card)).collect();
            response_mats.push(mat);
        }
        let mk_povm = |mat: &[Vec<f64>], card: usize, a: &str, b: &str| {
            let layout = SubsystemLayout::new(vec![(a.into(), 2), (b.into(), 2)]).unwrap();
            let elements: Vec<ComplexMatrix> = (0..card)
                .map(|o| {
                    ComplexMatrix::diagonal(&[
                        mat[0][o], mat[1][o], mat[2][o], mat[3][o],
                    ])
                })
                .collect();
            Povm::new(layout, vec![elements]).unwrap()
        };
        let povms = vec![
            Some(mk_povm(&response_mats[0], cards[0], "γ->A", "β->A")),
            Some(mk_povm(&response_mats[1], cards[1], "α->B", "γ->B")),
            Some(mk_povm(&response_mats[2], cards[2], "β->C", "α->C")),
        ];
        let strategy = QuantumStrategy {
            network: network.clone(),
            source_states,
            povms,
        };

        // Equivalent classical model: latent alphabets are the 4 diagonal
        // indices; each party reads the bit addressed to it. (Source slot
        // orders: α=(B,C), β=(C,A), γ=(A,B); the first slot is the high bit.)
        let r = |mat: &[Vec<f64>], idx: usize, o: usize| mat[idx][o];
        let responses = vec![
            // A's latent parents in edge order: (γ, β); local index is
            // (bit from γ)*2 + (bit from β).
            Some(ResponseTable::new(
                vec![4, 4],
                cards[0],
                crate::behavior::tuples(&[4, 4])
                    .iter()
                    .flat_map(|p| {
                        let idx = (p[0] >> 1) * 2 + (p[1] & 1);
                        (0..cards[0]).map(move |o| (idx, o))
                    })
                    .map(|(idx, o)| r(&response_mats[0], idx, o))
                    .collect(),
            ).unwrap()),
            // B: parents (α, γ); index (bit from α)*2 + (bit from γ).
            Some(ResponseTable::new(
                vec![4, 4],
                cards[1],
                crate::behavior::tuples(&[4, 4])
                    .iter()
                    .flat_map(|p| {
                        let idx = (p[0] >> 1) * 2 + (p[1] & 1);
                        (0..cards[1]).map(move |o| (idx, o))
                    })
                    .map(|(idx, o)| r(&response_mats[1], idx, o))
                    .collect(),
            ).unwrap()),
            // C: parents (β, α); index (bit from β)*2 + (bit from α).
            Some(ResponseTable::new(
                vec![4, 4],
                cards[2],
                crate::behavior::tuples(&[4, 4])
                    .iter()
                    .flat_map(|p| {
                        let idx = (p[0] >> 1) * 2 + (p[1] & 1);
                        (0..cards[2]).map(move |o| (idx, o))
                    })
                    .map(|(idx, o)| r(&response_mats[2], idx, o))
                    .collect(),
            ).unwrap()),
        ];
        let model = ClassicalModel {
            // Latent order (α, β, γ).
            source_dists: dists,
            responses,
        };
        (strategy, network, model)
    }

    /// Random density matrix of the given dimension (Ginibre construction).
    pub fn random_density(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                g[(i, j)] = Complex64::new(gaussian(rng), gaussian(rng));
            }
        }
        let h = g.mul(&g.dagger());
        let tr = h.trace().re;
        h.scale(cr(1.0 / tr))
    }

    fn gaussian(rng: &mut impl Rng) -> f64 {
        // Box-Muller
        let u1: f64 = rng.random::<f64>().max(1e-12);
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Random POVM with `outcomes` effects on a `dim`-dimensional space.
    pub fn random_povm_elements(
        rng: &mut impl Rng,
        dim: usize,
        outcomes: usize,
    ) -> Vec<ComplexMatrix> {
        let raw: Vec<ComplexMatrix> = (0..outcomes)
            .map(|_| {
                let mut g = ComplexMatrix::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        g[(i, j)] = Complex64::new(gaussian(rng), gaussian(rng));
                    }
                }
                let mut h = g.mul(&g.dagger());
                for i in 0..dim {
                    h[(i, i)] += cr(1e-6);
                }
                h
            })
            .collect();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for h in &raw {
            sum = sum.add(h);
        }
        let s_inv_sqrt = sum.hermitian_fn(|x| 1.0 / x.sqrt());
        raw.iter()
            .map(|h| s_inv_sqrt.mul(h).mul(&s_inv_sqrt))
            .collect()
    }

    fn random_keyed_qubit_povm<R: Rng>(rng: &mut R, label: &str) -> Povm {
        Povm::new(
            SubsystemLayout::new(vec![(label.into(), 2)]).unwrap(),
            vec![
                random_povm_elements(rng, 2, 2),
                random_povm_elements(rng, 2, 2),
            ],
        )
        .unwrap()
    }

    fn random_pair_state<R: Rng>(rng: &mut R, a: &str, b: &str) -> DensityOperator {
        DensityOperator::new(
            SubsystemLayout::new(vec![(a.into(), 2), (b.into(), 2)]).unwrap(),
            random_density(rng, 4),
        )
        .unwrap()
    }

    /// Instrumental wiring with a random shared state and random keyed
    /// measurements.
    pub fn random_instrumental(rng: &mut impl Rng) -> QuantumStrategy {
        let mut strategy = instrumental_default();
        strategy.source_states[0] = random_pair_state(rng, "A", "B");
        strategy.povms[1] = Some(random_keyed_qubit_povm(rng, "ρ->A"));
        strategy.povms[2] = Some(random_keyed_qubit_povm(rng, "ρ->B"));
        strategy.validate().unwrap();
        strategy
    }

    /// Unrelated-confounders wiring with random states and measurements.
    pub fn random_uc(rng: &mut impl Rng) -> QuantumStrategy {
        let mut strategy = uc_default();
        strategy.source_states[0] = random_pair_state(rng, "A", "B");
        strategy.source_states[1] = random_pair_state(rng, "B", "C");
        strategy.povms[0] = Some(random_keyed_qubit_povm(rng, "γ->A"));
        strategy.povms[1] = Some(Povm::new(
            SubsystemLayout::new(vec![("γ->B".into(), 2), ("α->B".into(), 2)]).unwrap(),
            vec![random_povm_elements(rng, 4, 2)],
        )
        .unwrap());
        strategy.povms[2] = Some(random_keyed_qubit_povm(rng, "α->C"));
        strategy.validate().unwrap();
        strategy
    }

    /// Random two-layer network with qubit slots and a random quantum
    /// strategy on it: up to 3 parties and 3 sources, occasionally with
    /// observed-to-observed edges (each party keeps at most `max_obs_parents`
    /// observed parents).
    pub fn random_strategy(
        rng: &mut impl Rng,
        max_parties: usize,
        max_sources: usize,
        max_obs_parents: usize,
    ) -> QuantumStrategy {
        loop {
            let n_parties = rng.random_range(1..=max_parties);
            let n_sources = rng.random_range(1..=max_sources);
            let party_names: Vec<String> =
                (0..n_parties).map(|i| format!("P{i}")).collect();
            let source_names: Vec<String> =
                (0..n_sources).map(|i| format!("λ{i}")).collect();

            let mut edges: Vec<(String, String)> = Vec::new();
            for s in &source_names {
                // Non-empty random child set.
                let mut children: Vec<&String> = party_names
                    .iter()
                    .filter(|_| rng.random_bool(0.5))
                    .collect();
                if children.is_empty() {
                    children.push(&party_names[rng.random_range(0..n_parties)]);
                }
                for ch in children {
                    edges.push((s.clone(), ch.clone()));
                }
            }
            // Observed edges only from earlier to later parties (acyclic).
            for j in 1..n_parties {
                let mut parents = 0;
                for i in 0..j {
                    if parents < max_obs_parents && rng.random_bool(0.3) {
                        edges.push((party_names[i].clone(), party_names[j].clone()));
                        parents += 1;
                    }
                }
            }

            let cards: Vec<usize> = (0..n_parties).map(|_| rng.random_range(2..=3)).collect();
            let net = CausalNetwork::from_names(
                party_names
                    .iter()
                    .map(|n| (n.as_str(), cards[party_names.iter().position(|m| m == n).unwrap()]))
                    .collect(),
                source_names.iter().map(String::as_str).collect(),
                edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect(),
            );
            let net = match net {
                Ok(n) => n,
                Err(_) => continue,
            };
            // Reject nets with free inputs: every party should be measured.
            if !net.inputs().is_empty() {
                continue;
            }

            let mut source_states = Vec::new();
            for (l, _) in source_names.iter().enumerate() {
                let children = net.latent_children(l);
                let dim = 1usize << children.len();
                let labels: Vec<(String, usize)> = children
                    .iter()
                    .map(|&p| (net.observed()[p].name.clone(), 2))
                    .collect();
                source_states.push(
                    DensityOperator::new(
                        SubsystemLayout::new(labels).unwrap(),
                        random_density(rng, dim),
                    )
                    .unwrap(),
                );
            }

            let mut povms = Vec::new();
            let mut ok = true;
            for p in 0..n_parties {
                let latent_parents = net.latent_parents(p);
                let dim = 1usize << latent_parents.len();
                let inputs: usize = net
                    .observed_parents(p)
                    .iter()
                    .map(|&o| net.observed()[o].card)
                    .product();
                let slots: Vec<(String, usize)> = net
                    .edges()
                    .iter()
                    .filter_map(|&(from, to)| match from {
                        NodeRef::Latent(l) if to == p => Some((
                            format!("{}->{}", net.latent()[l], net.observed()[p].name),
                            2,
                        )),
                        _ => None,
                    })
                    .collect();
                let layout = match SubsystemLayout::new(slots) {
                    Ok(l) => l,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                };
                let sets: Vec<Vec<ComplexMatrix>> = (0..inputs)
                    .map(|_| random_povm_elements(rng, dim, cards[p]))
                    .collect();
                match Povm::new(layout, sets) {
                    Ok(povm) => povms.push(Some(povm)),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }

            let strategy = QuantumStrategy {
                network: net,
                source_states,
                povms,
            };
            if strategy.validate().is_ok() {
                return strategy;
            }
        }
    }
}
