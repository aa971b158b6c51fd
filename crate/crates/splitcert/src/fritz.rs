//! The binary interventional inequality on the triangle: correlators of the
//! four data tables, the inequality value S, its closed form for the quantum
//! strategy, and a randomized classical-model sanity check of the
//! classicality bound S >= 0.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::network::{classical_behavior, CausalNetwork, ClassicalModel, ResponseTable};
use crate::scenarios::{fritz_tables, FritzParams};

/// Agreement-minus-disagreement correlators of the four tables, restricted
/// to Charlie's outcome where indicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FritzCorrelators {
    /// `E^c_obs = P_obs(a=b, c) - P_obs(a≠b, c)` for c = 0, 1.
    pub e_obs: [f64; 2],
    /// Same under the β->A split, `(â, b)`.
    pub e_beta: [f64; 2],
    /// Same under the α->B split, `(a, b̂)`.
    pub e_alpha: [f64; 2],
    /// Unrestricted `(â, b̂)` correlator under both splits.
    pub e_alphabeta: f64,
    /// `P_obs(c = 1)`.
    pub p_obs_c1: f64,
}

fn restricted_correlator(table: &Behavior, c: usize) -> Result<f64> {
    for (name, card) in table.parties() {
        if *card != 2 {
            return Err(Error::CardinalityMismatch(name.clone()));
        }
    }
    let mut e = 0.0;
    for a in 0..2usize {
        for b in 0..2usize {
            let p = table.prob(&[a, b, c], &[]);
            e += if a == b { p } else { -p };
        }
    }
    Ok(e)
}

/// Correlators from the four tables `(obs, int_alpha, int_beta,
/// int_alphabeta)`, each over binary `(a, b, c)`.
pub fn correlators(
    obs: &Behavior,
    int_alpha: &Behavior,
    int_beta: &Behavior,
    int_alphabeta: &Behavior,
) -> Result<FritzCorrelators> {
    let e_obs = [restricted_correlator(obs, 0)?, restricted_correlator(obs, 1)?];
    let e_alpha = [
        restricted_correlator(int_alpha, 0)?,
        restricted_correlator(int_alpha, 1)?,
    ];
    let e_beta = [
        restricted_correlator(int_beta, 0)?,
        restricted_correlator(int_beta, 1)?,
    ];
    let e_alphabeta =
        restricted_correlator(int_alphabeta, 0)? + restricted_correlator(int_alphabeta, 1)?;
    let p_obs_c1 = obs.event_prob(&[("C", 1)], &[])?;
    Ok(FritzCorrelators {
        e_obs,
        e_beta,
        e_alpha,
        e_alphabeta,
        p_obs_c1,
    })
}

/// The inequality value
/// `S = E_αβ·P(c=1) + 2·P(c=1) - E¹_obs - E¹_α - E¹_β`;
/// `S >= 0` for every classical model with the source biases held fixed.
pub fn evaluate_s(corr: &FritzCorrelators) -> f64 {
    corr.e_alphabeta * corr.p_obs_c1 + 2.0 * corr.p_obs_c1
        - corr.e_obs[1]
        - corr.e_alpha[1]
        - corr.e_beta[1]
}

/// Closed form of S for the quantum strategy at bias ε and visibility v:
/// every 1/√2 correlator scales by v, so
/// `S_Q = v·(-2ε² + 4ε - 4)·ε²/√2 + 2ε²`, which at v = 1 equals
/// `(4/√2)(ε-1)ε² - (2/√2)ε⁴ + 2ε²`.
pub fn closed_form_s(epsilon: f64, visibility: f64) -> Result<f64> {
    for (name, x) in [("epsilon", epsilon), ("visibility", visibility)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::ParamOutOfRange(format!("{name} = {x} not in [0, 1]")));
        }
    }
    let e = epsilon;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(visibility * (-2.0 * e * e + 4.0 * e - 4.0) * e * e * s + 2.0 * e * e)
}

/// Largest bias still violating the inequality at full visibility:
/// `1 - sqrt(sqrt(2) - 1)`.
pub fn critical_epsilon() -> f64 {
    1.0 - (std::f64::consts::SQRT_2 - 1.0).sqrt()
}

/// Minimum visibility for a violation at fixed bias:
/// `v_min(ε) = sqrt(2) / (1 + (1-ε)²)`.
pub fn minimum_visibility(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::ParamOutOfRange(format!(
            "epsilon = {epsilon} not in [0, 1]"
        )));
    }
    Ok(std::f64::consts::SQRT_2 / (1.0 + (1.0 - epsilon) * (1.0 - epsilon)))
}

/// Pipeline value of S at `(ε, v)`: tables, correlators, inequality.
pub fn pipeline_s(params: &FritzParams) -> Result<f64> {
    let (obs, int_alpha, int_beta, int_alphabeta) = fritz_tables(params)?;
    Ok(evaluate_s(&correlators(
        &obs,
        &int_alpha,
        &int_beta,
        &int_alphabeta,
    )?))
}

/// Report of a randomized classical falsification attempt on S >= 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SanityReport {
    pub epsilon: f64,
    pub samples: u64,
    pub seed: u64,
    pub min_s: f64,
    /// Reproduction recipe for the minimizing model: the generator name,
    /// seed and sample index that regenerate it exactly.
    pub argmin_model_digest: String,
    /// Number of samples with S below -1e-9 (expected zero).
    pub counterexamples: u64,
}

/// The triangle wiring the classical sampler uses, with free latent
/// cardinality `gamma_card` for the Alice-Bob source and the two bit sources
/// pinned to the bias ε.
fn sanity_network() -> CausalNetwork {
    CausalNetwork::from_names(
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
    )
    .expect("sanity triangle is valid")
}

fn random_response(rng: &mut impl Rng, parents: Vec<usize>, card: usize) -> ResponseTable {
    let combos: usize = parents.iter().product();
    let mut probs = Vec::with_capacity(combos * card);
    for _ in 0..combos {
        // Dirichlet-uniform rows.
        let mut row: Vec<f64> = (0..card).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        probs.extend(row);
    }
    ResponseTable::new(parents, card, probs).expect("normalized rows")
}

/// One classical model with fixed ε-biased bit sources, a free γ source of
/// cardinality up to 4, and Dirichlet-uniform response tables.
fn random_classical_model(rng: &mut impl Rng, epsilon: f64) -> (ClassicalModel, usize) {
    let gamma_card = rng.random_range(2..=4usize);
    let bit = vec![1.0 - epsilon, epsilon];
    let model = ClassicalModel {
        source_dists: vec![
            {
                let mut d: Vec<f64> = (0..gamma_card).map(|_| rng.random::<f64>() + 1e-6).collect();
                let s: f64 = d.iter().sum();
                d.iter_mut().for_each(|p| *p /= s);
                d
            },
            bit.clone(),
            bit,
        ],
        responses: vec![
            Some(random_response(rng, vec![gamma_card, 2], 2)),
            Some(random_response(rng, vec![gamma_card, 2], 2)),
            Some(random_response(rng, vec![2, 2], 2)),
        ],
    };
    (model, gamma_card)
}

/// S for one classical model: the four tables are computed from the same
/// causal parameters, with a split edge rerouting the reader to a fresh
/// equally distributed copy of its source.
fn classical_s(net: &CausalNetwork, model: &ClassicalModel, epsilon: f64) -> f64 {
    let obs = classical_behavior(net, model).expect("valid model");

    // Split networks: duplicate the bit source feeding the split party.
    let bit = vec![1.0 - epsilon, epsilon];
    let split_net = |edges: Vec<(&str, &str)>, extra: Vec<&str>| {
        CausalNetwork::from_names(
            vec![("A", 2), ("B", 2), ("C", 2)],
            [vec!["γ", "β", "α"], extra].concat(),
            edges,
        )
        .expect("split triangle is valid")
    };
    // β->A split: A reads β̂ instead of β.
    let net_beta = split_net(
        vec![
            ("γ", "A"),
            ("γ", "B"),
            ("β̂", "A"),
            ("β", "C"),
            ("α", "B"),
            ("α", "C"),
        ],
        vec!["β̂"],
    );
    let model_beta = ClassicalModel {
        source_dists: vec![
            model.source_dists[0].clone(),
            model.source_dists[1].clone(),
            model.source_dists[2].clone(),
            bit.clone(),
        ],
        responses: model.responses.clone(),
    };
    let int_beta = classical_behavior(&net_beta, &model_beta).expect("valid model");

    let net_alpha = split_net(
        vec![
            ("γ", "A"),
            ("γ", "B"),
            ("β", "A"),
            ("β", "C"),
            ("α̂", "B"),
            ("α", "C"),
        ],
        vec!["α̂"],
    );
    let model_alpha = ClassicalModel {
        source_dists: vec![
            model.source_dists[0].clone(),
            model.source_dists[1].clone(),
            model.source_dists[2].clone(),
            bit.clone(),
        ],
        responses: model.responses.clone(),
    };
    let int_alpha = classical_behavior(&net_alpha, &model_alpha).expect("valid model");

    let net_both = split_net(
        vec![
            ("γ", "A"),
            ("γ", "B"),
            ("β̂", "A"),
            ("β", "C"),
            ("α̂", "B"),
            ("α", "C"),
        ],
        vec!["β̂", "α̂"],
    );
    let model_both = ClassicalModel {
        source_dists: vec![
            model.source_dists[0].clone(),
            model.source_dists[1].clone(),
            model.source_dists[2].clone(),
            bit.clone(),
            bit,
        ],
        responses: model.responses.clone(),
    };
    let int_both = classical_behavior(&net_both, &model_both).expect("valid model");

    let corr = correlators(&obs, &int_alpha, &int_beta, &int_both).expect("binary tables");
    evaluate_s(&corr)
}

/// Sample classical models with the source biases held fixed and report the
/// minimum S found. The latent alphabet for the quantum-replacing source
/// runs up to cardinality 4; responses are Dirichlet-uniform. Sampling is a
/// falsification attempt on the classicality bound, not a proof; any sample
/// below -1e-9 is counted as a counterexample.
pub fn classical_sanity(epsilon: f64, samples: u64, seed: u64) -> Result<SanityReport> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::ParamOutOfRange(format!(
            "epsilon = {epsilon} not in [0, 1]"
        )));
    }
    let net = sanity_network();
    let (min_s, argmin_sample, counterexamples) = (0..samples)
        .into_par_iter()
        .map(|i| {
            // Per-sample stream keyed by (seed, index): reproducible across
            // any thread count.
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i.wrapping_mul(0x9e3779b97f4a7c15)));
            let (model, _) = random_classical_model(&mut rng, epsilon);
            let s = classical_s(&net, &model, epsilon);
            (s, i, u64::from(s < -1e-9))
        })
        .reduce(
            || (f64::INFINITY, 0, 0),
            |a, b| {
                let min = if b.0 < a.0 { (b.0, b.1) } else { (a.0, a.1) };
                (min.0, min.1, a.2 + b.2)
            },
        );
    Ok(SanityReport {
        epsilon,
        samples,
        seed,
        min_s: if samples == 0 { f64::NAN } else { min_s },
        argmin_model_digest: format!("chacha8:{seed}:{argmin_sample}"),
        counterexamples: if samples == 0 { 0 } else { counterexamples },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlator_values_match_closed_forms() {
        // At v = 1: E¹ = ε²/√2 three ways and E_αβ = (-2ε² + 4ε - 1)/√2.
        let eps = 0.3;
        let (obs, ia, ib, iab) = fritz_tables(&FritzParams::new(eps)).unwrap();
        let corr = correlators(&obs, &ia, &ib, &iab).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect_e1 = eps * eps * s;
        assert!((corr.e_obs[1] - expect_e1).abs() < 1e-12);
        assert!((corr.e_alpha[1] - expect_e1).abs() < 1e-12);
        assert!((corr.e_beta[1] - expect_e1).abs() < 1e-12);
        let expect_ab = (-2.0 * eps * eps + 4.0 * eps - 1.0) * s;
        assert!((corr.e_alphabeta - expect_ab).abs() < 1e-12);
        // E_αβ at ε = 0.3 equals 0.02/√2.
        assert!((corr.e_alphabeta - 0.02 * s).abs() < 1e-12);
        assert!((corr.p_obs_c1 - 0.09).abs() < 1e-12);
    }

    #[test]
    fn independent_coins_have_zero_correlators() {
        let uniform = Behavior::new(
            vec![("A".into(), 2), ("B".into(), 2), ("C".into(), 2)],
            vec![],
            vec![0.125; 8],
        )
        .unwrap();
        let corr = correlators(&uniform, &uniform, &uniform, &uniform).unwrap();
        assert!(corr.e_obs[0].abs() < 1e-15);
        assert!(corr.e_obs[1].abs() < 1e-15);
        assert!(corr.e_alphabeta.abs() < 1e-15);
    }

    #[test]
    fn non_binary_table_rejected() {
        let t = Behavior::new(
            vec![("A".into(), 3), ("B".into(), 2), ("C".into(), 2)],
            vec![],
            vec![1.0 / 12.0; 12],
        )
        .unwrap();
        assert!(matches!(
            correlators(&t, &t, &t, &t),
            Err(Error::CardinalityMismatch(_))
        ));
    }

    #[test]
    fn closed_form_reference_points() {
        assert_eq!(closed_form_s(0.0, 1.0).unwrap(), 0.0);
        // ε = 0.2, v = 1: (4/√2)(ε-1)ε² - (2/√2)ε⁴ + 2ε².
        let e: f64 = 0.2;
        let expect = 4.0 / 2f64.sqrt() * (e - 1.0) * e * e - 2.0 / 2f64.sqrt() * e.powi(4)
            + 2.0 * e * e;
        assert!((closed_form_s(e, 1.0).unwrap() - expect).abs() < 1e-15);
        assert!((expect - -0.012772).abs() < 1e-6);
        // Above the threshold the quantum value is positive.
        assert!(closed_form_s(0.5, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn pipeline_matches_closed_form() {
        for &eps in &[0.05, 0.2, 0.3564, 0.5] {
            for &v in &[0.8, 0.92, 1.0] {
                let s_pipe = pipeline_s(&FritzParams::new(eps).with_visibility(v)).unwrap();
                let s_form = closed_form_s(eps, v).unwrap();
                assert!(
                    (s_pipe - s_form).abs() < 1e-10,
                    "eps={eps} v={v}: {s_pipe} vs {s_form}"
                );
            }
        }
    }

    #[test]
    fn critical_epsilon_is_the_sign_change() {
        let e_star = critical_epsilon();
        assert!((e_star - 0.3564).abs() < 1e-4);
        assert!(closed_form_s(e_star - 1e-6, 1.0).unwrap() < 0.0);
        assert!(closed_form_s(e_star + 1e-6, 1.0).unwrap() > 0.0);

        // Bisection against the closed form reproduces it.
        let (mut lo, mut hi) = (0.05f64, 0.9f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if closed_form_s(mid, 1.0).unwrap() < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - e_star).abs() < 1e-10);
    }

    #[test]
    fn minimum_visibility_is_the_zero_in_v() {
        for &eps in &[0.1, 0.2, 0.3] {
            let v_min = minimum_visibility(eps).unwrap();
            assert!(closed_form_s(eps, v_min).unwrap().abs() < 1e-12);
        }
        assert!((minimum_visibility(0.2).unwrap() - 2f64.sqrt() / 1.64).abs() < 1e-12);
    }

    #[test]
    fn deterministic_classical_model_hand_value() {
        // All-constant responses: a = b = 0, c = 0; only P(c=1) and the
        // correlators at c=0/1 survive.
        let net = sanity_network();
        let model = ClassicalModel {
            source_dists: vec![vec![1.0], vec![0.7, 0.3], vec![0.7, 0.3]],
            responses: vec![
                Some(ResponseTable::deterministic(vec![1, 2], 2, |_| 0)),
                Some(ResponseTable::deterministic(vec![1, 2], 2, |_| 0)),
                Some(ResponseTable::deterministic(vec![2, 2], 2, |p| p[0] & p[1])),
            ],
        };
        let s = classical_s(&net, &model, 0.3);
        // a = b always, so E^1 = P(c=1) = 0.09 three times, E_αβ = 1:
        // S = 1*0.09 + 2*0.09 - 3*0.09 = 0.
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn sanity_no_counterexamples_small_run() {
        let report = classical_sanity(0.2, 2000, 7).unwrap();
        assert_eq!(report.counterexamples, 0);
        assert!(report.min_s >= -1e-9);
    }

    #[test]
    fn sanity_empty_run() {
        let report = classical_sanity(0.2, 0, 7).unwrap();
        assert!(report.min_s.is_nan());
        assert_eq!(report.counterexamples, 0);
    }

    #[test]
    fn sanity_deterministic_across_thread_counts() {
        let a = classical_sanity(0.1, 500, 42).unwrap();
        let b = classical_sanity(0.1, 500, 42).unwrap();
        assert_eq!(a.min_s.to_bits(), b.min_s.to_bits());
        assert_eq!(a.argmin_model_digest, b.argmin_model_digest);
    }
}
