//! Feasibility decisions for the inflation LPs: a phase-1 revised simplex
//! over f64 with an exact-rational fallback. Infeasible outcomes carry a
//! Farkas certificate that is re-verified against the full stated program,
//! independently of the solver's internal state.
//!
//! Certificate orientation: `y` satisfies `yᵀA <= tol` componentwise and
//! `yᵀb >= tol`. Any `q >= 0` with `Aq = b` would give
//! `yᵀb = yᵀAq <= tol`, so such a `y` rules out classical feasibility; its
//! negation evaluates as a polynomial witness that is nonnegative on
//! classically compatible data.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::inflation::lp::{LinearProgram, RowKind};

/// Row combination certifying infeasibility, indexed like `lp.rows`.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    pub row_coeffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum FeasibilityVerdict {
    Feasible(Vec<f64>),
    Infeasible(FarkasCertificate),
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible(_))
    }

    pub fn certificate(&self) -> Option<&FarkasCertificate> {
        match self {
            FeasibilityVerdict::Infeasible(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// A point satisfying every row within this residual is Feasible.
    pub feas_tol: f64,
    /// Certificates must reach `yᵀb >= cert_tol` with `yᵀA <= cert_tol`.
    pub cert_tol: f64,
    pub max_iters: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub stall_limit: usize,
    /// Rebuild the basis inverse from scratch this often.
    pub refactor_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-9,
            cert_tol: 1e-8,
            max_iters: 200_000,
            stall_limit: 400,
            refactor_every: 4000,
        }
    }
}

pub fn verify_point(lp: &LinearProgram, x: &[f64], tol: f64) -> bool {
    let (resid, min_entry) = lp.point_residual(x);
    resid <= tol && min_entry >= -tol
}

pub fn verify_certificate(lp: &LinearProgram, cert: &FarkasCertificate, tol: f64) -> bool {
    let (max_col, ytb) = lp.certificate_quality(&cert.row_coeffs);
    max_col <= tol && ytb >= tol
}

/// Decide feasibility with default tolerances.
pub fn solve_feasibility(lp: &LinearProgram) -> Result<FeasibilityVerdict> {
    solve_feasibility_with(lp, &SolverOptions::default())
}

/// Presolve bookkeeping: orbit merging from symmetry rows plus fixing of
/// variables forced to zero by exactly-zero marginal rows.
struct Presolve {
    /// var -> merged class id.
    class_of: Vec<u32>,
    /// class id -> member vars.
    members: Vec<Vec<u32>>,
    /// kept (non-symmetry, non-dropped) original row indices.
    kept_rows: Vec<u32>,
    /// reduced column -> class id.
    red_cols: Vec<u32>,
    /// reduced columns (CSC): per column, (reduced row, coeff).
    cols: Vec<Vec<(u32, f64)>>,
    /// reduced rhs, after sign normalization.
    b: Vec<f64>,
    /// sign applied to each kept row to make b >= 0.
    row_sign: Vec<f64>,
    /// original symmetry rows as (row index, positive var, negative var).
    sym_rows: Vec<(u32, u32, u32)>,
    /// original rows dropped because their exact-zero rhs fixed variables.
    zero_rows: Vec<u32>,
    /// early verdict when presolve alone decides.
    early_infeasible_row: Option<u32>,
}

fn presolve(lp: &LinearProgram) -> Result<Presolve> {
    let n = lp.num_vars();

    // Union-find from symmetry rows.
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], i: u32) -> u32 {
        let mut root = i;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = i;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    let mut sym_rows = Vec::new();
    for (r, row) in lp.rows.iter().enumerate() {
        if row.kind != RowKind::Symmetry {
            continue;
        }
        if row.cols.len() != 2
            || (row.cols[0].1 - 1.0).abs() > 1e-14
            || (row.cols[1].1 + 1.0).abs() > 1e-14
            || row.rhs != 0.0
        {
            return Err(Error::Config(format!(
                "symmetry row `{}` is not of the form q_i - q_j = 0",
                row.name
            )));
        }
        let (pos, neg) = (row.cols[0].0, row.cols[1].0);
        sym_rows.push((r as u32, pos, neg));
        let (rp, rn) = (find(&mut parent, pos), find(&mut parent, neg));
        if rp != rn {
            parent[rp as usize] = rn;
        }
    }

    // Dense class ids.
    let mut class_of = vec![u32::MAX; n];
    let mut members: Vec<Vec<u32>> = Vec::new();
    for v in 0..n as u32 {
        let root = find(&mut parent, v);
        if class_of[root as usize] == u32::MAX {
            class_of[root as usize] = members.len() as u32;
            members.push(Vec::new());
        }
        let class = class_of[root as usize];
        class_of[v as usize] = class;
        members[class as usize].push(v);
    }
    let n_classes = members.len();

    // Merge non-symmetry rows onto classes.
    struct MergedRow {
        orig: u32,
        cols: Vec<(u32, f64)>,
        rhs: f64,
        nonneg: bool,
    }
    let mut merged: Vec<MergedRow> = Vec::new();
    let mut scratch: Vec<f64> = vec![0.0; n_classes];
    for (r, row) in lp.rows.iter().enumerate() {
        if row.kind == RowKind::Symmetry {
            continue;
        }
        let mut touched: Vec<u32> = Vec::with_capacity(row.cols.len());
        for &(j, c) in &row.cols {
            let class = class_of[j as usize];
            if scratch[class as usize] == 0.0 {
                touched.push(class);
            }
            scratch[class as usize] += c;
        }
        touched.sort_unstable();
        let cols: Vec<(u32, f64)> = touched
            .iter()
            .map(|&cl| (cl, scratch[cl as usize]))
            .collect();
        for &cl in &touched {
            scratch[cl as usize] = 0.0;
        }
        let nonneg = cols.iter().all(|&(_, c)| c >= 0.0);
        merged.push(MergedRow {
            orig: r as u32,
            cols,
            rhs: row.rhs,
            nonneg,
        });
    }

    // Zero-fixing fixpoint: rows with rhs exactly 0 and nonnegative
    // coefficients force all their variables to zero.
    let mut fixed = vec![false; n_classes];
    let mut fix_row: Vec<Option<u32>> = vec![None; n_classes];
    let mut dropped = vec![false; merged.len()];
    let mut zero_rows: Vec<u32> = Vec::new();
    let mut early_infeasible_row = None;
    loop {
        let mut changed = false;
        for (mi, row) in merged.iter().enumerate() {
            if dropped[mi] {
                continue;
            }
            let active: Vec<&(u32, f64)> = row
                .cols
                .iter()
                .filter(|&&(cl, c)| !fixed[cl as usize] && c != 0.0)
                .collect();
            if row.rhs == 0.0 && row.nonneg && !active.is_empty() {
                for &&(cl, _) in &active {
                    fixed[cl as usize] = true;
                    if fix_row[cl as usize].is_none() {
                        fix_row[cl as usize] = Some(row.orig);
                    }
                }
                zero_rows.push(row.orig);
                dropped[mi] = true;
                changed = true;
            } else if active.is_empty() {
                if row.rhs.abs() > 1e-9 && early_infeasible_row.is_none() {
                    early_infeasible_row = Some(row.orig);
                }
                if row.rhs == 0.0 && row.nonneg {
                    zero_rows.push(row.orig);
                }
                dropped[mi] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Assemble the reduced system. Orbit merging typically turns symmetric
    // row families into exact duplicates; keep one per family.
    let red_cols: Vec<u32> = (0..n_classes as u32)
        .filter(|&cl| !fixed[cl as usize])
        .collect();
    let mut col_slot = vec![u32::MAX; n_classes];
    for (slot, &cl) in red_cols.iter().enumerate() {
        col_slot[cl as usize] = slot as u32;
    }
    let mut kept_rows = Vec::new();
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); red_cols.len()];
    let mut b = Vec::new();
    let mut row_sign = Vec::new();
    let mut seen_rows: std::collections::HashMap<Vec<(u32, i64)>, f64> =
        std::collections::HashMap::new();
    for (mi, row) in merged.iter().enumerate() {
        if dropped[mi] {
            continue;
        }
        let active: Vec<(u32, f64)> = row
            .cols
            .iter()
            .filter(|&&(cl, c)| !fixed[cl as usize] && c != 0.0)
            .map(|&(cl, c)| (col_slot[cl as usize], c))
            .collect();
        // Integer-quantized key: merged coefficients are small integers.
        let key: Vec<(u32, i64)> = active
            .iter()
            .map(|&(slot, c)| (slot, (c * 16.0).round() as i64))
            .collect();
        match seen_rows.get(&key) {
            Some(&prev_rhs) if (prev_rhs - row.rhs).abs() <= 1e-12 => continue,
            _ => {
                seen_rows.insert(key, row.rhs);
            }
        }
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        let red_row = kept_rows.len() as u32;
        kept_rows.push(row.orig);
        b.push(row.rhs * sign);
        row_sign.push(sign);
        for (slot, c) in active {
            cols[slot as usize].push((red_row, c * sign));
        }
    }

    let _ = fix_row;
    Ok(Presolve {
        class_of,
        members,
        kept_rows,
        red_cols,
        cols,
        b,
        row_sign,
        sym_rows,
        zero_rows,
        early_infeasible_row,
    })
}

/// Decide feasibility of the program.
///
/// Returns `Feasible` with an explicit point satisfying every row within
/// `feas_tol`, or `Infeasible` with a certificate verified against the full
/// program at `cert_tol`. Deterministic for a fixed pivot rule.
pub fn solve_feasibility_with(
    lp: &LinearProgram,
    options: &SolverOptions,
) -> Result<FeasibilityVerdict> {
    let pre = presolve(lp)?;

    if let Some(row) = pre.early_infeasible_row {
        let mut y = vec![0.0; lp.rows.len()];
        y[row as usize] = 1.0 * if lp.rows[row as usize].rhs < 0.0 { -1.0 } else { 1.0 };
        let cert = lift_certificate(lp, &pre, y)?;
        if verify_certificate(lp, &cert, options.cert_tol) {
            return Ok(FeasibilityVerdict::Infeasible(cert));
        }
        return Err(Error::NumericallyAmbiguous);
    }

    let m = pre.kept_rows.len();
    let n = pre.red_cols.len();
    if m == 0 {
        // Everything presolved away; the all-zeros-on-free point works.
        let x = expand_point(lp, &pre, &[]);
        if verify_point(lp, &x, options.feas_tol) {
            return Ok(FeasibilityVerdict::Feasible(x));
        }
        return Err(Error::NumericallyAmbiguous);
    }

    let debug = std::env::var("SPLITCERT_DEBUG").is_ok();
    if debug {
        eprintln!("[simplex] reduced m={m} n={n}");
    }
    let (basis, ok) = phase1(&pre.cols, &pre.b, m, n, options);
    if !ok {
        if debug {
            eprintln!("[simplex] phase1 not ok");
        }
        return Err(Error::NumericallyAmbiguous);
    }

    // Recompute the final numbers from scratch on the final basis.
    let lu = match LuFactors::factor(basis_matrix(&pre.cols, &basis, m)) {
        Some(lu) => lu,
        None => return Err(Error::NumericallyAmbiguous),
    };
    let xb = lu.solve(&pre.b);
    let z: f64 = basis
        .iter()
        .zip(&xb)
        .filter(|&(&bv, _)| bv >= n)
        .map(|(_, &x)| x)
        .sum();

    if debug {
        eprintln!("[simplex] z* = {z:.6e}");
    }
    if z <= options.feas_tol {
        let mut x_red = vec![0.0; n];
        for (&bv, &x) in basis.iter().zip(&xb) {
            if bv < n {
                x_red[bv] = x.max(0.0);
            }
        }
        let x = expand_point(lp, &pre, &x_red);
        if verify_point(lp, &x, options.feas_tol) {
            return Ok(FeasibilityVerdict::Feasible(x));
        }
        if debug {
            let (resid, minx) = lp.point_residual(&x);
            eprintln!("[simplex] point verify failed: resid {resid:.3e} min {minx:.3e}");
        }
        return Err(Error::NumericallyAmbiguous);
    }

    // Infeasible: y = c_B B^{-T}, lifted back over the full row set.
    let mut c_b = vec![0.0; m];
    for (i, &bv) in basis.iter().enumerate() {
        if bv >= n {
            c_b[i] = 1.0;
        }
    }
    let y_red = lu.solve_transposed(&c_b);
    let mut y = vec![0.0; lp.rows.len()];
    for (red, &orig) in pre.kept_rows.iter().enumerate() {
        y[orig as usize] = y_red[red] * pre.row_sign[red];
    }
    let cert = lift_certificate(lp, &pre, y)?;
    if verify_certificate(lp, &cert, options.cert_tol) {
        return Ok(FeasibilityVerdict::Infeasible(cert));
    }
    if debug {
        let (maxcol, ytb) = lp.certificate_quality(&cert.row_coeffs);
        eprintln!("[simplex] cert verify failed: maxcol {maxcol:.3e} ytb {ytb:.3e}");
    }
    Err(Error::NumericallyAmbiguous)
}

/// Expand a reduced point back over the original variables (orbit members
/// share their class value; fixed classes are zero).
fn expand_point(lp: &LinearProgram, pre: &Presolve, x_red: &[f64]) -> Vec<f64> {
    let mut class_value = vec![0.0; pre.members.len()];
    for (slot, &cl) in pre.red_cols.iter().enumerate() {
        class_value[cl as usize] = x_red.get(slot).copied().unwrap_or(0.0);
    }
    (0..lp.num_vars())
        .map(|v| class_value[pre.class_of[v] as usize])
        .collect()
}

/// Extend `y` (supported on kept rows) to a certificate over every row: push
/// slack onto the zero rows that fixed variables, then equalize per-member
/// column values across each orbit using its own symmetry rows.
fn lift_certificate(lp: &LinearProgram, pre: &Presolve, mut y: Vec<f64>) -> Result<FarkasCertificate> {
    let n = lp.num_vars();

    // Column values v_x = (yᵀA)_x over the marginal/normalization rows.
    let mut v = vec![0.0f64; n];
    for (r, row) in lp.rows.iter().enumerate() {
        if row.kind == RowKind::Symmetry || y[r] == 0.0 {
            continue;
        }
        for &(j, c) in &row.cols {
            v[j as usize] += y[r] * c;
        }
    }

    // Zero-row slack: for each fixed class pick the recorded zero row and
    // drive its members' values nonpositive. Subtracting a multiple of a
    // zero row only lowers columns that the row fixed, and leaves yᵀb alone.
    for &orig_row in &pre.zero_rows {
        let row = &lp.rows[orig_row as usize];
        let mut m_needed = 0.0f64;
        for &(j, c) in &row.cols {
            if c > 0.0 {
                m_needed = m_needed.max(v[j as usize] / c);
            }
        }
        if m_needed > 0.0 {
            y[orig_row as usize] -= m_needed;
            for &(j, c) in &row.cols {
                v[j as usize] -= m_needed * c;
            }
        }
    }

    // Orbit equalization: route value along each orbit's symmetry rows so
    // every member carries the class average.
    let mut rows_of_class: Vec<Vec<usize>> = vec![Vec::new(); pre.members.len()];
    for (si, &(_, pos, _)) in pre.sym_rows.iter().enumerate() {
        rows_of_class[pre.class_of[pos as usize] as usize].push(si);
    }
    for (class, members) in pre.members.iter().enumerate() {
        if members.len() < 2 {
            continue;
        }
        let total: f64 = members.iter().map(|&x| v[x as usize]).sum();
        let target = total / members.len() as f64;

        // Spanning tree over the orbit from its symmetry rows. Each
        // adjacency entry carries the row's coefficient at the list owner.
        let mut adj: Vec<Vec<(u32, usize, f64)>> = vec![Vec::new(); members.len()];
        let slot = |x: u32| members.binary_search(&x).expect("member");
        for &si in &rows_of_class[class] {
            let (row, pos, neg) = pre.sym_rows[si];
            let (a, b) = (slot(pos), slot(neg));
            adj[a].push((row, b, 1.0));
            adj[b].push((row, a, -1.0));
        }
        // BFS tree; record each child's parent edge with the coefficient the
        // row carries at the CHILD side.
        let mut parent_edge: Vec<Option<(u32, usize, f64)>> = vec![None; members.len()];
        let mut order = vec![0usize];
        let mut seen = vec![false; members.len()];
        seen[0] = true;
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(row, w, sign_at_u) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = Some((row, u, -sign_at_u));
                    order.push(w);
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::Config(
                "symmetry rows do not connect an orbit".into(),
            ));
        }
        // Leaves upward: push exactly the flow that lands each subtree on
        // `target` per member. Setting y_row adds coeff_at_child * y inside
        // the subtree and the opposite outside, so yᵀb is untouched
        // (symmetry rows have zero right-hand side).
        let mut subtree_sum: Vec<f64> = members.iter().map(|&x| v[x as usize]).collect();
        let mut subtree_size: Vec<f64> = vec![1.0; members.len()];
        for &u in order.iter().rev() {
            if let Some((row, p, coeff_at_child)) = parent_edge[u] {
                let flow = subtree_size[u] * target - subtree_sum[u];
                y[row as usize] += flow / coeff_at_child;
                subtree_sum[p] += subtree_sum[u];
                subtree_size[p] += subtree_size[u];
            }
        }
    }

    Ok(FarkasCertificate { row_coeffs: y })
}

fn basis_matrix(cols: &[Vec<(u32, f64)>], basis: &[usize], m: usize) -> Vec<f64> {
    let n = cols.len();
    let mut mat = vec![0.0; m * m];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            for &(r, c) in &cols[bv] {
                mat[r as usize * m + i] = c;
            }
        } else {
            mat[(bv - n) * m + i] = 1.0;
        }
    }
    mat
}

/// Dense LU with partial pivoting.
struct LuFactors {
    m: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn factor(mut a: Vec<f64>) -> Option<LuFactors> {
        let m = (a.len() as f64).sqrt() as usize;
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let mut piv = k;
            let mut best = a[perm[k] * m + k].abs();
            for r in (k + 1)..m {
                let val = a[perm[r] * m + k].abs();
                if val > best {
                    best = val;
                    piv = r;
                }
            }
            if best < 1e-13 {
                return None;
            }
            perm.swap(k, piv);
            let pk = perm[k];
            let diag = a[pk * m + k];
            for r in (k + 1)..m {
                let pr = perm[r];
                let f = a[pr * m + k] / diag;
                if f == 0.0 {
                    continue;
                }
                a[pr * m + k] = f;
                for c in (k + 1)..m {
                    a[pr * m + c] -= f * a[pk * m + c];
                }
            }
        }
        Some(LuFactors { m, lu: a, perm })
    }

    /// Solve `B x = rhs`.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for k in 0..m {
            for r in (k + 1)..m {
                let f = self.lu[self.perm[r] * m + k];
                if f != 0.0 {
                    x[r] -= f * x[k];
                }
            }
        }
        for k in (0..m).rev() {
            x[k] /= self.lu[self.perm[k] * m + k];
            for r in 0..k {
                let f = self.lu[self.perm[r] * m + k];
                if f != 0.0 {
                    x[r] -= f * x[k];
                }
            }
        }
        x
    }

    /// Solve `Bᵀ y = rhs`.
    fn solve_transposed(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        // Uᵀ z = rhs (forward), Lᵀ w = z (backward), y = Pᵀ w.
        let mut z = rhs.to_vec();
        for k in 0..m {
            for r in 0..k {
                let f = self.lu[self.perm[r] * m + k];
                if f != 0.0 {
                    z[k] -= f * z[r];
                }
            }
            z[k] /= self.lu[self.perm[k] * m + k];
        }
        for k in (0..m).rev() {
            for r in (k + 1)..m {
                let f = self.lu[self.perm[r] * m + k];
                if f != 0.0 {
                    z[k] -= f * z[r];
                }
            }
        }
        let mut y = vec![0.0; m];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = z[k];
        }
        y
    }
}

/// Phase-1 primal simplex with a dense running basis inverse. Dantzig pricing
/// with lowest-index ties, switching to Bland's rule during degenerate
/// streaks so cycling cannot occur. Returns the final basis.
fn phase1(
    cols: &[Vec<(u32, f64)>],
    b: &[f64],
    m: usize,
    n: usize,
    options: &SolverOptions,
) -> (Vec<usize>, bool) {
    const PRICE_TOL: f64 = 1e-10;
    const PIVOT_TOL: f64 = 1e-9;

    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut in_basis = vec![false; n];
    let mut binv: Vec<f64> = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut xb = b.to_vec();
    let mut artificial_left = m;
    let mut degenerate_streak = 0usize;
    let mut bland = false;
    let mut y = vec![0.0f64; m];
    let mut w = vec![0.0f64; m];
    // Devex reference weights (approximate steepest-edge norms).
    let mut gamma = vec![1.0f64; n];

    for iter in 0..options.max_iters {
        if artificial_left == 0 {
            debug_exit("artificials out", iter);
            return (basis, true);
        }
        if iter > 0 && iter % options.refactor_every == 0 {
            if !refactor(
                cols,
                &mut basis,
                m,
                n,
                &mut binv,
                &mut in_basis,
                &mut artificial_left,
            ) {
                debug_exit("singular refactor", iter);
                return (basis, false);
            }
            // Recompute xb from the fresh inverse.
            for i in 0..m {
                let row = &binv[i * m..(i + 1) * m];
                xb[i] = row.iter().zip(b).map(|(a, c)| a * c).sum();
            }
        }

        // y = c_B B^{-1}: sum the inverse rows of artificial basics.
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &bv) in basis.iter().enumerate() {
            if bv >= n {
                let row = &binv[i * m..(i + 1) * m];
                for (yv, rv) in y.iter_mut().zip(row) {
                    *yv += rv;
                }
            }
        }

        // Price: reduced cost of column j is -yᵀA_j; Devex picks the best
        // cost-per-weight ratio, Bland the first eligible column.
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..n {
            if in_basis[j] {
                continue;
            }
            let mut dot = 0.0;
            for &(r, c) in &cols[j] {
                dot += y[r as usize] * c;
            }
            let rc = -dot;
            if rc < -PRICE_TOL {
                if bland {
                    entering = Some((j, rc));
                    break;
                }
                let score = rc * rc / gamma[j];
                match entering {
                    Some((_, best)) if score <= best => {}
                    _ => entering = Some((j, score)),
                }
            }
        }
        let Some((j, _)) = entering else {
            debug_exit("optimal", iter);
            return (basis, true); // optimal
        };

        // w = B^{-1} A_j.
        w.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c) in &cols[j] {
            let col = r as usize;
            for i in 0..m {
                w[i] += binv[i * m + col] * c;
            }
        }

        // Two-pass ratio test: find the minimum ratio, then pick the
        // numerically largest pivot among the near-ties (artificials first
        // under Bland mode for anti-cycling).
        let mut theta_min = f64::INFINITY;
        for i in 0..m {
            if w[i] > PIVOT_TOL {
                theta_min = theta_min.min(xb[i] / w[i]);
            }
        }
        if !theta_min.is_finite() {
            debug_exit("ratio-test stuck", iter);
            return (basis, false); // numerically stuck
        }
        let slack = 1e-9 * (1.0 + theta_min.abs());
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if w[i] > PIVOT_TOL && xb[i] / w[i] <= theta_min + slack {
                let better = match leave {
                    None => true,
                    Some(li) => {
                        if bland {
                            tie_break(basis[i], basis[li], n)
                        } else {
                            w[i] > w[li] * (1.0 + 1e-12)
                                || (w[i] >= w[li] * (1.0 - 1e-12)
                                    && tie_break(basis[i], basis[li], n))
                        }
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
        }
        let p = leave.expect("a minimum-ratio row exists");
        let theta = (xb[p] / w[p]).max(0.0);

        if theta < 1e-12 {
            degenerate_streak += 1;
            if degenerate_streak > options.stall_limit {
                bland = true;
            }
        } else {
            degenerate_streak = 0;
            bland = false;
        }

        // Devex weight update against the pivot row.
        let alpha_q = w[p];
        if !bland && alpha_q.abs() > PIVOT_TOL {
            let rho = &binv[p * m..(p + 1) * m];
            let gamma_q = gamma[j].max(1.0);
            let ratio_base = gamma_q / (alpha_q * alpha_q);
            let mut gamma_max = 1.0f64;
            for jj in 0..n {
                if in_basis[jj] || jj == j {
                    continue;
                }
                let mut alpha = 0.0;
                for &(r, c) in &cols[jj] {
                    alpha += rho[r as usize] * c;
                }
                if alpha != 0.0 {
                    let cand = alpha * alpha * ratio_base;
                    if cand > gamma[jj] {
                        gamma[jj] = cand;
                    }
                }
                gamma_max = gamma_max.max(gamma[jj]);
            }
            if basis[p] < n {
                gamma[basis[p]] = ratio_base.max(1.0);
            }
            if gamma_max > 1e8 {
                gamma.iter_mut().for_each(|g| *g = 1.0);
            }
        }

        // Pivot: update xb and the inverse.
        let wp = w[p];
        for i in 0..m {
            if i != p && w[i] != 0.0 {
                xb[i] -= theta * w[i];
                if xb[i] < 0.0 {
                    xb[i] = 0.0;
                }
            }
        }
        xb[p] = theta;
        {
            let (head, tail) = binv.split_at_mut(p * m);
            let (prow, rest) = tail.split_at_mut(m);
            for v in prow.iter_mut() {
                *v /= wp;
            }
            for (i, chunk) in head.chunks_mut(m).enumerate() {
                let f = w[i];
                if f != 0.0 {
                    for (a, &pv) in chunk.iter_mut().zip(prow.iter()) {
                        *a -= f * pv;
                    }
                }
            }
            for (k, chunk) in rest.chunks_mut(m).enumerate() {
                let f = w[p + 1 + k];
                if f != 0.0 {
                    for (a, &pv) in chunk.iter_mut().zip(prow.iter()) {
                        *a -= f * pv;
                    }
                }
            }
        }
        if basis[p] >= n {
            artificial_left -= 1;
        } else {
            in_basis[basis[p]] = false;
        }
        in_basis[j] = true;
        basis[p] = j;
    }
    debug_exit("max iters", options.max_iters);
    (basis, false)
}

fn debug_exit(reason: &str, iters: usize) {
    if std::env::var("SPLITCERT_DEBUG").is_ok() {
        eprintln!("[simplex] phase1 exit: {reason} after {iters} iters");
    }
}

/// Prefer `a` leaving over `b`: artificials first, then lowest index.
fn tie_break(a: usize, b: usize, n: usize) -> bool {
    match (a >= n, b >= n) {
        (true, false) => true,
        (false, true) => false,
        _ => a < b,
    }
}

/// Rebuild the basis inverse from scratch. Numerically dependent basis
/// columns are repaired by swapping the artificials of unpivoted rows back
/// in, which always restores invertibility.
fn refactor(
    cols: &[Vec<(u32, f64)>],
    basis: &mut [usize],
    m: usize,
    n: usize,
    binv: &mut [f64],
    in_basis: &mut [bool],
    artificial_left: &mut usize,
) -> bool {
    for _attempt in 0..=m {
        let mat = basis_matrix(cols, basis, m);
        match invert_or_rank_defect(mat, m) {
            Ok(inv) => {
                binv.copy_from_slice(&inv);
                return true;
            }
            Err((dep_cols, free_rows)) => {
                if dep_cols.is_empty() || dep_cols.len() != free_rows.len() {
                    return false;
                }
                for (&k, &r) in dep_cols.iter().zip(&free_rows) {
                    let old = basis[k];
                    if old < n {
                        in_basis[old] = false;
                        *artificial_left += 1;
                    }
                    basis[k] = n + r;
                }
            }
        }
    }
    false
}

/// Gauss-Jordan inversion; on rank defect, reports the dependent columns and
/// the rows that never hosted a pivot.
fn invert_or_rank_defect(a: Vec<f64>, m: usize) -> std::result::Result<Vec<f64>, (Vec<usize>, Vec<usize>)> {
    let width = 2 * m;
    let mut aug = vec![0.0f64; m * width];
    for r in 0..m {
        aug[r * width..r * width + m].copy_from_slice(&a[r * m..(r + 1) * m]);
        aug[r * width + m + r] = 1.0;
    }
    let mut row_used = vec![false; m];
    let mut pivot_row_of_col = vec![usize::MAX; m];
    let mut dependent = Vec::new();
    for k in 0..m {
        let mut best = 1e-10;
        let mut pick = None;
        for r in 0..m {
            if !row_used[r] {
                let v = aug[r * width + k].abs();
                if v > best {
                    best = v;
                    pick = Some(r);
                }
            }
        }
        let Some(pr) = pick else {
            dependent.push(k);
            continue;
        };
        row_used[pr] = true;
        pivot_row_of_col[k] = pr;
        let piv = aug[pr * width + k];
        for c in 0..width {
            aug[pr * width + c] /= piv;
        }
        for r in 0..m {
            if r != pr {
                let f = aug[r * width + k];
                if f != 0.0 {
                    for c in 0..width {
                        aug[r * width + c] -= f * aug[pr * width + c];
                    }
                }
            }
        }
    }
    if dependent.is_empty() {
        let mut inv = vec![0.0f64; m * m];
        for k in 0..m {
            let pr = pivot_row_of_col[k];
            for j in 0..m {
                inv[k * m + j] = aug[pr * width + m + j];
            }
        }
        Ok(inv)
    } else {
        let free_rows: Vec<usize> = (0..m).filter(|&r| !row_used[r]).collect();
        Err((dependent, free_rows))
    }
}

// ---------------------------------------------------------------------------
// Exact rational mode
// ---------------------------------------------------------------------------

fn to_rational(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite float")
}

/// Phase-1 tableau simplex over exact rationals with Bland's rule. Intended
/// for small programs (a few hundred variables); the status it returns is
/// exact for the rationalized input data.
///
/// Because the input coefficients are rationalized floats, redundant rows
/// assembled from independently rounded tables can be inconsistent at the
/// 1e-15 scale: this mode will then report Infeasible with a certificate
/// whose violation `yᵀb` is that small. Compare the violation magnitude
/// against the float solver's tolerances when using the two modes together.
pub fn solve_feasibility_exact(lp: &LinearProgram) -> Result<FeasibilityVerdict> {
    let n = lp.num_vars();
    let m = lp.rows.len();
    if n * m > 2_000_000 {
        return Err(Error::Config(format!(
            "exact mode limited to small programs ({n} vars x {m} rows requested)"
        )));
    }
    let zero = BigRational::zero();
    let one = BigRational::from_integer(BigInt::from(1));

    // Tableau: m rows x (n + m + 1) columns (vars, artificials, rhs).
    let width = n + m + 1;
    let mut t = vec![zero.clone(); m * width];
    for (r, row) in lp.rows.iter().enumerate() {
        let sign = if row.rhs < 0.0 { -1.0 } else { 1.0 };
        for &(j, c) in &row.cols {
            t[r * width + j as usize] = to_rational(c * sign);
        }
        t[r * width + n + r] = one.clone();
        t[r * width + n + m] = to_rational(row.rhs * sign);
    }
    // Objective row: reduced costs of min sum(artificials) at the artificial
    // basis are -sum of rows for real columns, 0 for artificials.
    let mut obj = vec![zero.clone(); width];
    for r in 0..m {
        for j in 0..n {
            let v = t[r * width + j].clone();
            obj[j] -= v;
        }
        let rhs = t[r * width + n + m].clone();
        obj[n + m] -= rhs;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        // Bland: first column with negative reduced cost.
        let entering = (0..n).find(|&j| obj[j] < zero);
        let Some(j) = entering else { break };
        // Ratio test with Bland tie-break on basis index.
        let mut leave: Option<(usize, BigRational)> = None;
        for r in 0..m {
            let a = &t[r * width + j];
            if a > &zero {
                let ratio = &t[r * width + n + m] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, lv)) => ratio < *lv || (ratio == *lv && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((p, _)) = leave else {
            return Err(Error::NumericallyAmbiguous);
        };
        // Pivot on (p, j).
        let piv = t[p * width + j].clone();
        for c in 0..width {
            t[p * width + c] /= piv.clone();
        }
        for r in 0..m {
            if r != p && !t[r * width + j].is_zero() {
                let f = t[r * width + j].clone();
                for c in 0..width {
                    let sub = &f * &t[p * width + c];
                    t[r * width + c] -= sub;
                }
            }
        }
        if !obj[j].is_zero() {
            let f = obj[j].clone();
            for c in 0..width {
                let sub = &f * &t[p * width + c];
                obj[c] -= sub;
            }
        }
        basis[p] = j;
    }

    // Optimal value of sum(artificials) is -obj[rhs].
    let z = -obj[n + m].clone();
    if z.is_zero() {
        let mut x = vec![0.0; n];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[r * width + n + m].to_f64().unwrap_or(0.0);
            }
        }
        return Ok(FeasibilityVerdict::Feasible(x));
    }
    if z.is_negative() {
        return Err(Error::NumericallyAmbiguous);
    }
    // y_r = 1 - reduced cost of artificial r; flip back row signs.
    let mut y = vec![0.0; m];
    for r in 0..m {
        let yr = &one - &obj[n + r];
        let sign = if lp.rows[r].rhs < 0.0 { -1.0 } else { 1.0 };
        y[r] = yr.to_f64().unwrap_or(0.0) * sign;
    }
    Ok(FeasibilityVerdict::Infeasible(FarkasCertificate {
        row_coeffs: y,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::lp::{LpRow, RhsExpr, RowKind};

    fn lp_from_rows(num_vars: usize, rows: Vec<(Vec<(u32, f64)>, f64)>) -> LinearProgram {
        LinearProgram {
            var_nodes: vec![("q".into(), num_vars)],
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (cols, rhs))| LpRow {
                    name: format!("r{i}"),
                    kind: if i == 0 {
                        RowKind::Normalization
                    } else {
                        RowKind::Marginal
                    },
                    cols,
                    rhs,
                    rhs_expr: RhsExpr::Constant(rhs),
                })
                .collect(),
        }
    }

    #[test]
    fn tiny_feasible() {
        // q0 + q1 = 1, q0 = 0.3.
        let lp = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.3),
            ],
        );
        match solve_feasibility(&lp).unwrap() {
            FeasibilityVerdict::Feasible(x) => {
                assert!((x[0] - 0.3).abs() < 1e-9);
                assert!((x[1] - 0.7).abs() < 1e-9);
            }
            _ => panic!("should be feasible"),
        }
    }

    #[test]
    fn tiny_infeasible_with_valid_certificate() {
        // q0 + q1 = 1, q0 = 0.8, q1 = 0.8: inconsistent.
        let lp = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.8),
                (vec![(1, 1.0)], 0.8),
            ],
        );
        match solve_feasibility(&lp).unwrap() {
            FeasibilityVerdict::Infeasible(cert) => {
                assert!(verify_certificate(&lp, &cert, 1e-8));
            }
            _ => panic!("should be infeasible"),
        }
    }

    #[test]
    fn zero_rhs_rows_fix_variables() {
        // q1 forced to zero, rest split 50/50; still feasible.
        let lp = lp_from_rows(
            3,
            vec![
                (vec![(0, 1.0), (1, 1.0), (2, 1.0)], 1.0),
                (vec![(1, 1.0)], 0.0),
                (vec![(0, 1.0)], 0.5),
            ],
        );
        match solve_feasibility(&lp).unwrap() {
            FeasibilityVerdict::Feasible(x) => {
                assert_eq!(x[1], 0.0);
                assert!((x[2] - 0.5).abs() < 1e-9);
            }
            _ => panic!("should be feasible"),
        }
    }

    #[test]
    fn zero_rhs_conflict_certified() {
        // q0 = 0 but also q0 = 0.4 => infeasible via presolve alone.
        let lp = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.0),
                (vec![(0, 1.0)], 0.4),
            ],
        );
        match solve_feasibility(&lp).unwrap() {
            FeasibilityVerdict::Infeasible(cert) => {
                assert!(verify_certificate(&lp, &cert, 1e-8));
            }
            _ => panic!("should be infeasible"),
        }
    }

    #[test]
    fn symmetry_rows_merge_and_lift() {
        // q0 = q1 (symmetry), q0 + q1 = 1, q0 = 0.2: infeasible because
        // symmetry forces q0 = 0.5.
        let mut lp = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.2),
            ],
        );
        lp.rows.push(LpRow {
            name: "sym".into(),
            kind: RowKind::Symmetry,
            cols: vec![(0, 1.0), (1, -1.0)],
            rhs: 0.0,
            rhs_expr: RhsExpr::Constant(0.0),
        });
        match solve_feasibility(&lp).unwrap() {
            FeasibilityVerdict::Infeasible(cert) => {
                assert!(verify_certificate(&lp, &cert, 1e-8));
            }
            _ => panic!("should be infeasible"),
        }

        // And the satisfiable variant stays feasible with the point split
        // evenly across the orbit.
        let mut lp2 = lp_from_rows(2, vec![(vec![(0, 1.0), (1, 1.0)], 1.0)]);
        lp2.rows.push(LpRow {
            name: "sym".into(),
            kind: RowKind::Symmetry,
            cols: vec![(0, 1.0), (1, -1.0)],
            rhs: 0.0,
            rhs_expr: RhsExpr::Constant(0.0),
        });
        match solve_feasibility(&lp2).unwrap() {
            FeasibilityVerdict::Feasible(x) => {
                assert!((x[0] - 0.5).abs() < 1e-9);
                assert!((x[1] - 0.5).abs() < 1e-9);
            }
            _ => panic!("should be feasible"),
        }
    }

    #[test]
    fn exact_mode_agrees_on_small_lps() {
        let feasible = lp_from_rows(
            2,
            vec![(vec![(0, 1.0), (1, 1.0)], 1.0), (vec![(0, 1.0)], 0.3)],
        );
        assert!(solve_feasibility_exact(&feasible).unwrap().is_feasible());

        let infeasible = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.8),
                (vec![(1, 1.0)], 0.8),
            ],
        );
        match solve_feasibility_exact(&infeasible).unwrap() {
            FeasibilityVerdict::Infeasible(cert) => {
                assert!(verify_certificate(&infeasible, &cert, 1e-8));
            }
            _ => panic!("exact mode should certify infeasibility"),
        }
    }

    #[test]
    fn certificates_scale_positively() {
        let lp = lp_from_rows(
            2,
            vec![
                (vec![(0, 1.0), (1, 1.0)], 1.0),
                (vec![(0, 1.0)], 0.8),
                (vec![(1, 1.0)], 0.8),
            ],
        );
        if let FeasibilityVerdict::Infeasible(cert) = solve_feasibility(&lp).unwrap() {
            let doubled = FarkasCertificate {
                row_coeffs: cert.row_coeffs.iter().map(|&y| 2.0 * y).collect(),
            };
            assert!(verify_certificate(&lp, &doubled, 1e-8));
        } else {
            panic!("should be infeasible");
        }
    }
}
