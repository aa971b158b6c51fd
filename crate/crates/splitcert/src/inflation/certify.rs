//! End-to-end certification pipelines: assemble the joint DAG, inflation and
//! LP for the shipped scenarios, decide feasibility, extract witnesses, and
//! bisect critical visibilities.

use std::collections::BTreeMap;

use crate::behavior::Behavior;
use crate::error::{Error, Result};
use crate::inflation::graph::{
    build_inflation, build_joint_dag, hat_name, InflationGraph, InflationPreset,
};
use crate::inflation::lp::{build_lp, BuildOptions, KnownTable, LinearProgram, RhsExpr};
use crate::inflation::simplex::{
    solve_feasibility_with, FarkasCertificate, FeasibilityVerdict, SolverOptions,
};
use crate::inflation::witness::{WitnessPolynomial, WitnessTerm, COEF_FLOOR};
use crate::scenarios::{fritz_tables, rgb4_tables, FritzParams, Rgb4Params};
use crate::splitting::SplitSequence;

/// Convert a verified infeasibility certificate into a polynomial witness:
/// the negated row combination, with each row's right-hand side kept in
/// probability-atom form. The result is nonnegative on any table collection
/// a single classical model of the joint DAG can produce, and negative on
/// the certifying instance.
pub fn extract_witness(
    lp: &LinearProgram,
    verdict: &FeasibilityVerdict,
) -> Result<WitnessPolynomial> {
    let cert = verdict.certificate().ok_or_else(|| {
        Error::Config("witness extraction needs an Infeasible verdict".into())
    })?;
    let mut terms = Vec::new();
    for (row, &y) in lp.rows.iter().zip(&cert.row_coeffs) {
        if y.abs() < COEF_FLOOR {
            continue;
        }
        match &row.rhs_expr {
            RhsExpr::Constant(c) => {
                if *c != 0.0 {
                    terms.push(WitnessTerm {
                        coef: -y * c,
                        atoms: vec![],
                    });
                }
            }
            RhsExpr::Product(atoms) => terms.push(WitnessTerm {
                coef: -y,
                atoms: atoms.clone(),
            }),
        }
    }
    Ok(WitnessPolynomial::new(terms))
}

/// Evaluate a witness against named tables.
pub fn evaluate_witness(
    witness: &WitnessPolynomial,
    knowns: &BTreeMap<String, &Behavior>,
) -> Result<f64> {
    witness.evaluate(knowns)
}

/// The four-outcome certification instance: inflation plus LP for given
/// parameters, optionally with only the observational table pinned.
pub struct Rgb4Instance {
    pub inflation: InflationGraph,
    pub lp: LinearProgram,
    pub obs: Behavior,
    pub int: Behavior,
}

#[derive(Debug, Clone)]
pub struct Rgb4Options {
    pub obs_only: bool,
    pub symmetry: bool,
    pub shared_repreparation: bool,
    pub solver: SolverOptions,
}

impl Default for Rgb4Options {
    fn default() -> Self {
        Rgb4Options {
            obs_only: false,
            symmetry: true,
            shared_repreparation: false,
            solver: SolverOptions::default(),
        }
    }
}

pub fn rgb4_instance(params: &Rgb4Params, options: &Rgb4Options) -> Result<Rgb4Instance> {
    let strategy = crate::scenarios::rgb4_strategy(params)?;
    let (obs, int) = rgb4_tables(params)?;
    let joint = build_joint_dag(&strategy.network, &SplitSequence::from_pairs(&[("γ", "A")])?)?;
    let inflation = build_inflation(
        &joint,
        InflationPreset::FourOutcomeSplit {
            shared_repreparation: options.shared_repreparation,
        },
    )?;
    let hat = hat_name("A");
    let mut knowns = vec![KnownTable::new("obs", &["A", "B", "C"], obs.clone())?];
    if !options.obs_only {
        knowns.push(KnownTable::new("int", &[hat.as_str(), "B", "C"], int.clone())?);
    }
    let lp = build_lp(
        &inflation,
        &knowns,
        &BuildOptions {
            symmetry: options.symmetry,
            max_set_size: 4,
        },
    )?;
    Ok(Rgb4Instance {
        inflation,
        lp,
        obs,
        int,
    })
}

/// Solve the four-outcome instance.
pub fn rgb4_feasibility(
    params: &Rgb4Params,
    options: &Rgb4Options,
) -> Result<(Rgb4Instance, FeasibilityVerdict)> {
    let instance = rgb4_instance(params, options)?;
    let verdict = solve_feasibility_with(&instance.lp, &options.solver)?;
    Ok((instance, verdict))
}

/// Which visibilities a threshold search moves together; the rest stay at
/// the template's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityCase {
    Symmetric,
    FreeAlpha,
    FreeBeta,
    FreeGamma,
}

impl VisibilityCase {
    pub fn label(&self) -> &'static str {
        match self {
            VisibilityCase::Symmetric => "symmetric",
            VisibilityCase::FreeAlpha => "alpha",
            VisibilityCase::FreeBeta => "beta",
            VisibilityCase::FreeGamma => "gamma",
        }
    }

    fn apply(&self, template: &Rgb4Params, v: f64) -> Rgb4Params {
        let mut p = template.clone();
        match self {
            VisibilityCase::Symmetric => p.visibilities = (v, v, v),
            VisibilityCase::FreeAlpha => p.visibilities.0 = v,
            VisibilityCase::FreeBeta => p.visibilities.1 = v,
            VisibilityCase::FreeGamma => p.visibilities.2 = v,
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdResult {
    /// Smallest probed visibility that still certifies nonclassicality.
    pub critical: f64,
    /// `(visibility, infeasible?)` in probe order.
    pub probes: Vec<(f64, bool)>,
}

/// Bisect the critical visibility of the four-outcome family on `[lo, hi]`:
/// the value below which the LP turns Feasible. Requires an Infeasible
/// verdict at `hi` and a Feasible one at `lo`, and asserts that the probe
/// sequence is monotone.
pub fn visibility_threshold(
    template: &Rgb4Params,
    case: VisibilityCase,
    options: &Rgb4Options,
    lo: f64,
    hi: f64,
    step_tol: f64,
) -> Result<ThresholdResult> {
    if step_tol <= 0.0 {
        return Err(Error::Config("step tolerance must be positive".into()));
    }
    let mut probes = Vec::new();
    let probe = |v: f64, probes: &mut Vec<(f64, bool)>| -> Result<bool> {
        let params = case.apply(template, v);
        let (_, verdict) = rgb4_feasibility(&params, options)?;
        let infeasible = !verdict.is_feasible();
        probes.push((v, infeasible));
        Ok(infeasible)
    };

    if !probe(hi, &mut probes)? {
        return Err(Error::NoTransition(format!(
            "feasible at the upper end v = {hi}"
        )));
    }
    if probe(lo, &mut probes)? {
        return Err(Error::NoTransition(format!(
            "infeasible at the lower end v = {lo}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > step_tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut probes)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Monotonicity across everything probed: no infeasible point below a
    // feasible one.
    let mut sorted = probes.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].1 && !w[1].1 {
            return Err(Error::NoTransition(format!(
                "non-monotone feasibility between v = {} and v = {}",
                w[0].0, w[1].0
            )));
        }
    }
    Ok(ThresholdResult {
        critical: hi,
        probes,
    })
}

/// The binary (carrot) instance: trivial inflation of the two-split joint
/// DAG with all four tables pinned.
pub struct CarrotInstance {
    pub inflation: InflationGraph,
    pub lp: LinearProgram,
}

pub fn carrot_instance(params: &FritzParams) -> Result<CarrotInstance> {
    let strategy = crate::scenarios::fritz_strategy(params)?;
    let (obs, int_alpha, int_beta, int_alphabeta) = fritz_tables(params)?;
    let joint = build_joint_dag(
        &strategy.network,
        &SplitSequence::from_pairs(&[("β", "A"), ("α", "B")])?,
    )?;
    let inflation = build_inflation(&joint, InflationPreset::Trivial)?;
    let (hat_a, hat_b) = (hat_name("A"), hat_name("B"));
    let knowns = vec![
        KnownTable::new("obs", &["A", "B", "C"], obs)?,
        KnownTable::new("int_alpha", &["A", hat_b.as_str(), "C"], int_alpha)?,
        KnownTable::new("int_beta", &[hat_a.as_str(), "B", "C"], int_beta)?,
        KnownTable::new(
            "int_alphabeta",
            &[hat_a.as_str(), hat_b.as_str(), "C"],
            int_alphabeta,
        )?,
    ];
    let lp = build_lp(&inflation, &knowns, &BuildOptions::default())?;
    Ok(CarrotInstance { inflation, lp })
}

/// Re-check a certificate independently of the solver, at the default
/// tolerance.
pub fn certificate_is_valid(lp: &LinearProgram, cert: &FarkasCertificate) -> bool {
    crate::inflation::simplex::verify_certificate(lp, cert, SolverOptions::default().cert_tol)
}
