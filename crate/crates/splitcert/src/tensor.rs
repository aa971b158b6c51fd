//! Multipartite operators with labeled subsystems: tensor products, labeled
//! partial traces and Born-rule evaluation of joint outcome tables.

use num_complex::Complex64;

use crate::behavior::Behavior;
use crate::complex::{cr, ComplexMatrix, C_ZERO};
use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = -1e-10;
pub const POVM_COMPLETENESS_TOL: f64 = 1e-10;
/// Born-rule outputs below this magnitude are clamped to exactly zero.
pub const PROB_CLAMP: f64 = 1e-14;

/// Ordered list of labeled subsystem slots with their dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    slots: Vec<(String, usize)>,
}

impl SubsystemLayout {
    pub fn new(slots: Vec<(String, usize)>) -> Result<Self> {
        for (label, dim) in &slots {
            if *dim == 0 {
                return Err(Error::LayoutMismatch(format!("slot `{label}` has dim 0")));
            }
        }
        for i in 0..slots.len() {
            for j in (i + 1)..slots.len() {
                if slots[i].0 == slots[j].0 {
                    return Err(Error::LayoutMismatch(format!(
                        "duplicate slot label `{}`",
                        slots[i].0
                    )));
                }
            }
        }
        Ok(SubsystemLayout { slots })
    }

    pub fn slots(&self) -> &[(String, usize)] {
        &self.slots
    }

    pub fn total_dim(&self) -> usize {
        self.slots.iter().map(|&(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.slots.iter().position(|(l, _)| l == label)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.slots.iter().map(|&(_, d)| d).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.slots.iter().map(|(l, _)| l.as_str()).collect()
    }
}

/// A labeled multipartite density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: SubsystemLayout,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Checks Hermiticity and unit trace; positivity is opt-in via
    /// [`DensityOperator::validate_positive`] because noise-swept states sit
    /// near the boundary.
    pub fn new(layout: SubsystemLayout, matrix: ComplexMatrix) -> Result<Self> {
        let dim = layout.total_dim();
        if !matrix.is_square() || matrix.rows() != dim {
            return Err(Error::LayoutMismatch(format!(
                "matrix is {}x{} but layout dimension is {}",
                matrix.rows(),
                matrix.cols(),
                dim
            )));
        }
        if !matrix.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::InvalidOperator("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidOperator(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(DensityOperator { layout, matrix })
    }

    pub fn validate_positive(&self) -> Result<()> {
        let min = self.matrix.min_eigenvalue();
        if min < POSITIVITY_TOL {
            return Err(Error::InvalidOperator(format!(
                "density matrix has eigenvalue {min:.3e} below {POSITIVITY_TOL:.0e}"
            )));
        }
        Ok(())
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.layout.slots.len() {
            return Err(Error::LayoutMismatch("relabel length mismatch".into()));
        }
        let slots = labels
            .into_iter()
            .zip(self.layout.slots.iter())
            .map(|(l, &(_, d))| (l, d))
            .collect();
        Ok(DensityOperator {
            layout: SubsystemLayout::new(slots)?,
            matrix: self.matrix.clone(),
        })
    }

    /// Tensor product; slot labels must stay globally unique.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut slots = self.layout.slots.clone();
        slots.extend(other.layout.slots.iter().cloned());
        Ok(DensityOperator {
            layout: SubsystemLayout::new(slots)?,
            matrix: self.matrix.kron(&other.matrix),
        })
    }
}

/// Kronecker product of plain matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Trace out the slots named in `over`, keeping the remaining slots in their
/// original relative order.
pub fn partial_trace(op: &DensityOperator, over: &[&str]) -> Result<DensityOperator> {
    for label in over {
        if op.layout.position(label).is_none() {
            return Err(Error::UnknownLabel(label.to_string()));
        }
    }
    let slots = op.layout.slots();
    let dims = op.layout.dims();
    let n = slots.len();
    let traced: Vec<bool> = slots
        .iter()
        .map(|(l, _)| over.contains(&l.as_str()))
        .collect();

    let kept_slots: Vec<(String, usize)> = slots
        .iter()
        .zip(&traced)
        .filter(|(_, &t)| !t)
        .map(|(s, _)| s.clone())
        .collect();
    let kept_idx: Vec<usize> = (0..n).filter(|&i| !traced[i]).collect();
    let traced_idx: Vec<usize> = (0..n).filter(|&i| traced[i]).collect();

    // Row-major strides for the full index space.
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }

    let kept_dim: usize = kept_idx.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced_idx.iter().map(|&i| dims[i]).product();

    // Offset of each kept (resp. traced) multi-index into the full index.
    let offsets = |idx_list: &[usize], count: usize| -> Vec<usize> {
        let mut out = vec![0usize; count];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut off = 0;
            for &i in idx_list.iter().rev() {
                off += (rem % dims[i]) * stride[i];
                rem /= dims[i];
            }
            *slot = off;
        }
        out
    };
    let kept_off = offsets(&kept_idx, kept_dim);
    let traced_off = offsets(&traced_idx, traced_dim);

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (ri, &roff) in kept_off.iter().enumerate() {
        for (ci, &coff) in kept_off.iter().enumerate() {
            let mut acc = C_ZERO;
            for &toff in &traced_off {
                acc += op.matrix[(roff + toff, coff + toff)];
            }
            out[(ri, ci)] = acc;
        }
    }
    DensityOperator::new(SubsystemLayout::new(kept_slots)?, out)
}

/// A positive operator-valued measure over a labeled slot layout, optionally
/// conditioned on an input index (one element list per input value).
#[derive(Debug, Clone)]
pub struct Povm {
    layout: SubsystemLayout,
    /// `sets[input][outcome]`; unconditioned measurements have one set.
    sets: Vec<Vec<ComplexMatrix>>,
}

impl Povm {
    pub fn new(layout: SubsystemLayout, sets: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if sets.is_empty() || sets[0].is_empty() {
            return Err(Error::InvalidOperator("POVM needs at least one element".into()));
        }
        let outcomes = sets[0].len();
        let dim = layout.total_dim();
        for set in &sets {
            if set.len() != outcomes {
                return Err(Error::InvalidOperator(
                    "every input value must have the same outcome count".into(),
                ));
            }
            let mut sum = ComplexMatrix::zeros(dim, dim);
            for e in set {
                if !e.is_square() || e.rows() != dim {
                    return Err(Error::LayoutMismatch(format!(
                        "POVM element is {}x{}, layout dimension is {}",
                        e.rows(),
                        e.cols(),
                        dim
                    )));
                }
                if !e.is_hermitian(HERMITICITY_TOL) {
                    return Err(Error::InvalidOperator("POVM element is not Hermitian".into()));
                }
                sum = sum.add(e);
            }
            if sum.max_abs_diff(&ComplexMatrix::identity(dim)) > POVM_COMPLETENESS_TOL {
                return Err(Error::InvalidOperator(
                    "POVM elements do not sum to the identity".into(),
                ));
            }
        }
        Ok(Povm { layout, sets })
    }

    /// Validates positivity of every element (opt-in, like states).
    pub fn validate_positive(&self) -> Result<()> {
        for set in &self.sets {
            for e in set {
                let min = e.min_eigenvalue();
                if min < POSITIVITY_TOL {
                    return Err(Error::InvalidOperator(format!(
                        "POVM element has eigenvalue {min:.3e} below {POSITIVITY_TOL:.0e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Projective measurement onto an orthonormal basis given as rows.
    pub fn projective(layout: SubsystemLayout, basis: &[Vec<Complex64>]) -> Result<Self> {
        let elements = basis.iter().map(|v| ComplexMatrix::projector(v)).collect();
        Povm::new(layout, vec![elements])
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn input_count(&self) -> usize {
        self.sets.len()
    }

    pub fn outcome_count(&self) -> usize {
        self.sets[0].len()
    }

    pub fn element(&self, input: usize, outcome: usize) -> &ComplexMatrix {
        &self.sets[input][outcome]
    }

    pub fn sets(&self) -> &[Vec<ComplexMatrix>] {
        &self.sets
    }
}

/// One measuring party inside a Born-rule evaluation: which global slots it
/// holds (in its own local order) and the POVM it applies.
pub struct PartyMeasurement<'a> {
    pub name: String,
    pub slot_labels: Vec<String>,
    pub povm: &'a Povm,
}

/// Joint outcome table for independent parties measuring a shared state.
///
/// Slot labels mediate the wiring: each party names the state slots it holds,
/// in its own local order, and any permutation between the state layout and
/// the party layouts is resolved internally.
pub fn born_rule(state: &DensityOperator, parties: &[PartyMeasurement<'_>]) -> Result<Behavior> {
    let mut claimed: Vec<&str> = Vec::new();
    for p in parties {
        for l in &p.slot_labels {
            claimed.push(l);
        }
    }
    claimed.sort_unstable();
    let mut state_labels = state.layout().labels();
    state_labels.sort_unstable();
    if claimed != state_labels {
        return Err(Error::LayoutMismatch(format!(
            "party slots {claimed:?} do not cover the state slots {state_labels:?}"
        )));
    }

    let locators: Vec<Vec<usize>> = parties
        .iter()
        .map(|p| party_locator(state, &p.slot_labels, p.povm))
        .collect::<Result<_>>()?;

    let cards: Vec<usize> = parties.iter().map(|p| p.povm.outcome_count()).collect();
    let names: Vec<(String, usize)> = parties
        .iter()
        .zip(&cards)
        .map(|(p, &c)| (p.name.clone(), c))
        .collect();

    let mut table = Vec::with_capacity(cards.iter().product());
    let mut outcome = vec![0usize; parties.len()];
    loop {
        let elements: Vec<&ComplexMatrix> = parties
            .iter()
            .zip(&outcome)
            .map(|(p, &o)| p.povm.element(0, o))
            .collect();
        table.push(trace_product(state, &elements, &locators));
        if !increment(&mut outcome, &cards) {
            break;
        }
    }
    Behavior::new(names, vec![], table)
}

/// Map every global basis index to the packed local index of the party that
/// holds `slot_labels` (in that order).
pub(crate) fn party_locator(
    state: &DensityOperator,
    slot_labels: &[String],
    povm: &Povm,
) -> Result<Vec<usize>> {
    let dims = state.layout().dims();
    let n = dims.len();
    let mut stride = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        stride[i] = stride[i + 1] * dims[i + 1];
    }
    let mut positions = Vec::with_capacity(slot_labels.len());
    for l in slot_labels {
        let pos = state
            .layout()
            .position(l)
            .ok_or_else(|| Error::UnknownLabel(l.clone()))?;
        positions.push(pos);
    }
    let local_dim: usize = positions.iter().map(|&p| dims[p]).product();
    if local_dim != povm.layout().total_dim() {
        return Err(Error::LayoutMismatch(format!(
            "POVM dimension {} does not match assigned slots (dim {})",
            povm.layout().total_dim(),
            local_dim
        )));
    }
    let total = state.layout().total_dim();
    let mut loc = vec![0usize; total];
    for (g, slot) in loc.iter_mut().enumerate() {
        let mut packed = 0usize;
        for &p in &positions {
            packed = packed * dims[p] + (g / stride[p]) % dims[p];
        }
        *slot = packed;
    }
    Ok(loc)
}

/// Tr(rho * (E_1 ⊗ ... ⊗ E_k)) with each factor living on scattered slots.
pub(crate) fn trace_product(
    state: &DensityOperator,
    elements: &[&ComplexMatrix],
    locators: &[Vec<usize>],
) -> f64 {
    let d = state.layout().total_dim();
    let m = state.matrix();
    let mut acc = C_ZERO;
    for i in 0..d {
        for j in 0..d {
            let rho = m[(i, j)];
            if rho == C_ZERO {
                continue;
            }
            // Tr(rho X) = sum_ij rho[i,j] X[j,i]
            let mut x = cr(1.0);
            for (e, loc) in elements.iter().zip(locators) {
                x *= e[(loc[j], loc[i])];
                if x == C_ZERO {
                    break;
                }
            }
            acc += rho * x;
        }
    }
    let p = acc.re;
    if p.abs() < PROB_CLAMP {
        0.0
    } else {
        p
    }
}

/// Advance a mixed-radix counter; returns false after wrapping to zero.
pub(crate) fn increment(digits: &mut [usize], cards: &[usize]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < cards[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}
