//! The level-set membership criterion. For a level `h`, the question
//! "does some point of Y escape the level set Y_h?" reduces to the
//! existence of a basic feasible solution of one structured equality
//! system whose basis contains the final slack-like variable. This module
//! builds that system, runs the polynomial decision procedure, and
//! assembles substitution-verified certificates.

use serde::Serialize;

use crate::exact::{Matrix, Rational};
use crate::instance::DbpInstance;
use crate::lp::{
    find_bfs, pivot, reduced_tableau, solve_lp, BasicSolution, LpError, LpOutcome, LpProblem,
    Tableau,
};

/// Role of each column of the structured system, in column order: the
/// original x variables, the X-side slacks, the multipliers v, and the
/// single trailing level variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarRole {
    XOrig(usize),
    XSlack(usize),
    V(usize),
    VLast,
}

/// The equality system `W alpha = w0, alpha >= 0` with block layout
/// `[A I 0 0; C^T 0 D^T 0; g 0 -d^T 1]` and right side `(a, -e, h)`.
/// It has `q + m + 1` rows and `n + q + p + 1` columns; the level variable
/// owns the last column.
#[derive(Debug, Clone)]
pub struct WSystem {
    pub w: Matrix,
    pub w0: Vec<Rational>,
    pub var_roles: Vec<VarRole>,
    pub h: Rational,
}

impl WSystem {
    pub fn rows(&self) -> usize {
        self.w.rows()
    }

    pub fn cols(&self) -> usize {
        self.w.cols()
    }

    /// Column index of the level variable (always the last column).
    pub fn last_col(&self) -> usize {
        self.w.cols() - 1
    }
}

/// Exact block assembly of the structured system at level `h`.
pub fn build_w_system(inst: &DbpInstance, h: &Rational) -> WSystem {
    let (n, m, q, p) = (inst.n, inst.m, inst.q, inst.p);
    let rows = q + m + 1;
    let cols = n + q + p + 1;
    let mut w = Matrix::zeros(rows, cols);
    let mut w0 = vec![Rational::zero(); rows];

    for i in 0..q {
        for j in 0..n {
            w[(i, j)] = inst.a[(i, j)].clone();
        }
        w[(i, n + i)] = Rational::one();
        w0[i] = inst.a_rhs[i].clone();
    }
    for j in 0..m {
        let r = q + j;
        for i in 0..n {
            w[(r, i)] = inst.c[(i, j)].clone();
        }
        for k in 0..p {
            w[(r, n + q + k)] = inst.d[(k, j)].clone();
        }
        w0[r] = -&inst.e[j];
    }
    let r = q + m;
    for i in 0..n {
        w[(r, i)] = inst.g[i].clone();
    }
    for k in 0..p {
        w[(r, n + q + k)] = -&inst.d_rhs[k];
    }
    w[(r, cols - 1)] = Rational::one();
    w0[r] = h.clone();

    let mut var_roles = vec![];
    for i in 0..n {
        var_roles.push(VarRole::XOrig(i));
    }
    for i in 0..q {
        var_roles.push(VarRole::XSlack(i));
    }
    for k in 0..p {
        var_roles.push(VarRole::V(k));
    }
    var_roles.push(VarRole::VLast);

    WSystem {
        w,
        w0,
        var_roles,
        h: h.clone(),
    }
}

/// The degenerate special case: when `{A x <= a, C^T x = -e, x >= 0}` is
/// consistent, its `g.x`-minimizer is optimal for the whole bilinear
/// program and pairs with any point of Y. Returns that minimizer, or
/// `None` when the system is inconsistent (the generic case).
pub fn affine_case(inst: &DbpInstance) -> Option<Vec<Rational>> {
    let neg_e: Vec<Rational> = inst.e.iter().map(|v| -v).collect();
    let lp = LpProblem::minimize(inst.g.clone())
        .with_eq(inst.c.transpose(), neg_e)
        .with_le(inst.a.clone(), inst.a_rhs.clone());
    match solve_lp(&lp).expect("affine-case LP") {
        LpOutcome::Optimal { solution, .. } => Some(solution.values[..inst.n].to_vec()),
        LpOutcome::Infeasible { .. } => None,
        LpOutcome::Unbounded { .. } => {
            panic!("affine-case LP unbounded; X was not validated as bounded")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum Verdict {
    NotSubset,
    Subset,
}

/// Per-row outcome of the step-4 maximizations: the finite optimum, or
/// `None` when the row objective is unbounded above.
#[derive(Debug, Clone, Serialize)]
pub struct RowEvidence {
    pub row: usize,
    pub t_star: Option<Rational>,
}

/// The criterion's answer at one level. A `NotSubset` verdict always
/// carries a certificate (a basic feasible solution of the structured
/// system with the level column in its basis, re-verified by
/// substitution); a `Subset` verdict carries the per-row evidence.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub verdict: Verdict,
    pub certificate: Option<BasicSolution>,
    pub evidence: Vec<RowEvidence>,
}

/// The sign-partitioned tableau: rows with a zero entry in the level
/// column come first (`0..k`), rows with a negative entry and positive
/// right side follow (`k..rows`). Columns keep their original identity;
/// only rows are permuted, and `row_perm[new] = old` records it.
#[derive(Debug, Clone)]
pub struct PartitionedTableau {
    pub tableau: Tableau,
    pub k: usize,
    pub row_perm: Vec<usize>,
    pub last_col: usize,
}

impl PartitionedTableau {
    /// Nonbasic columns other than the level column, ascending.
    pub fn nonbasic_cols(&self) -> Vec<usize> {
        let cols = self.tableau.a.cols();
        (0..cols)
            .filter(|c| *c != self.last_col && !self.tableau.basis.contains(c))
            .collect()
    }

    pub fn rows(&self) -> usize {
        self.tableau.a.rows()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CriterionError {
    #[error("the affine special case applies; the criterion presumes it was handled first")]
    PreconditionViolated,
    #[error("tableau does not meet the partition sign pattern: {0}")]
    PatternViolation(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("certificate construction failed verification: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Exact verification that `cert` is a basic feasible solution of the
/// structured system with the level column in an independent basis.
pub fn verify_w_certificate(ws: &WSystem, cert: &BasicSolution) -> Result<(), String> {
    if cert.values.len() != ws.cols() {
        return Err("certificate length mismatch".into());
    }
    if cert.values.iter().any(|v| v.is_negative()) {
        return Err("negative component".into());
    }
    if ws.w.mul_vec(&cert.values) != ws.w0 {
        return Err("does not satisfy the equality system".into());
    }
    if !cert.basis.contains(&ws.last_col()) {
        return Err("level column not in the basis".into());
    }
    if cert.basis.len() != ws.rows() {
        return Err(format!(
            "basis has {} columns, expected {}",
            cert.basis.len(),
            ws.rows()
        ));
    }
    for (j, v) in cert.values.iter().enumerate() {
        if !v.is_zero() && !cert.basis.contains(&j) {
            return Err(format!("nonbasic column {j} has nonzero value"));
        }
    }
    let sub = Matrix::from_rows(
        (0..ws.rows())
            .map(|i| cert.basis.iter().map(|&j| ws.w[(i, j)].clone()).collect())
            .collect(),
    );
    if sub.rank() != ws.rows() {
        return Err("basis columns are linearly dependent".into());
    }
    Ok(())
}

/// Sorts the rows of a reduced tableau into the partition sign pattern.
/// Requires the level column to be nonpositive with negative entries only
/// in positive-rhs rows; the pivot paths of the decision procedure must
/// have been taken first otherwise.
pub fn to_blinn21(t: &Tableau) -> Result<PartitionedTableau, CriterionError> {
    let last_col = t.a.cols() - 1;
    let rows = t.a.rows();
    let mut zero_rows = vec![];
    let mut neg_rows = vec![];
    for i in 0..rows {
        let v = &t.a[(i, last_col)];
        if v.is_zero() {
            zero_rows.push(i);
        } else if v.is_negative() {
            if !t.rhs[i].is_positive() {
                return Err(CriterionError::PatternViolation(format!(
                    "row {i} has a negative level entry but right side {}",
                    t.rhs[i]
                )));
            }
            neg_rows.push(i);
        } else {
            return Err(CriterionError::PatternViolation(format!(
                "row {i} has a positive level entry {v}"
            )));
        }
    }
    let k = zero_rows.len();
    let row_perm: Vec<usize> = zero_rows.into_iter().chain(neg_rows).collect();
    let a = Matrix::from_rows(row_perm.iter().map(|&i| t.a.row(i).to_vec()).collect());
    let rhs = row_perm.iter().map(|&i| t.rhs[i].clone()).collect();
    let basis = row_perm.iter().map(|&i| t.basis[i]).collect();
    Ok(PartitionedTableau {
        tableau: Tableau { a, rhs, basis },
        k,
        row_perm,
        last_col,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundedness {
    Bounded,
    Unbounded,
}

/// Whether the row objective `sum_j w[i0][j] alpha_j - rhs[i0]` (over the
/// nonbasic columns) is bounded above on the partitioned system. Decided
/// by feasibility of the homogeneous direction system: a nonnegative
/// direction that keeps every row nonpositive while moving the objective
/// row by one exists iff the objective is unbounded.
pub fn boundedness_check(
    pt: &PartitionedTableau,
    i0: usize,
) -> Result<Boundedness, CriterionError> {
    let nb = pt.nonbasic_cols();
    let rows = pt.rows();
    let nv = nb.len() + 1; // trailing slot is the level column
    let mut le_rows = vec![];
    for i in 0..rows {
        let mut row: Vec<Rational> = nb.iter().map(|&j| pt.tableau.a[(i, j)].clone()).collect();
        row.push(if i >= pt.k {
            pt.tableau.a[(i, pt.last_col)].clone()
        } else {
            Rational::zero()
        });
        le_rows.push(row);
    }
    let mut eq_row: Vec<Rational> = nb.iter().map(|&j| pt.tableau.a[(i0, j)].clone()).collect();
    eq_row.push(Rational::zero());
    let lp = LpProblem::minimize(vec![Rational::zero(); nv])
        .with_eq(Matrix::from_rows(vec![eq_row]), vec![Rational::one()])
        .with_le(
            Matrix::from_rows(le_rows),
            vec![Rational::zero(); rows],
        );
    Ok(match solve_lp(&lp)? {
        LpOutcome::Optimal { .. } => Boundedness::Unbounded,
        LpOutcome::Infeasible { .. } => Boundedness::Bounded,
        LpOutcome::Unbounded { .. } => {
            unreachable!("feasibility probe with zero objective cannot be unbounded")
        }
    })
}

/// The step-4 row LP: maximize `sum_j w[i0][j] alpha_j - rhs[i0]` over the
/// whole partitioned system, expressed over the nonbasic columns plus the
/// level column.
fn row_lp(pt: &PartitionedTableau, i0: usize) -> LpProblem {
    let nb = pt.nonbasic_cols();
    let rows = pt.rows();
    let mut le_rows = vec![];
    for i in 0..rows {
        let mut row: Vec<Rational> = nb.iter().map(|&j| pt.tableau.a[(i, j)].clone()).collect();
        row.push(pt.tableau.a[(i, pt.last_col)].clone());
        le_rows.push(row);
    }
    let mut obj: Vec<Rational> = nb.iter().map(|&j| pt.tableau.a[(i0, j)].clone()).collect();
    obj.push(Rational::zero());
    LpProblem::maximize(obj).with_le(Matrix::from_rows(le_rows), pt.tableau.rhs.clone())
}

/// The same row objective restricted to the zero-block rows `0..k`, over
/// the nonbasic columns only (the level column does not appear there).
fn zero_block_lp(pt: &PartitionedTableau, i0: usize) -> LpProblem {
    let nb = pt.nonbasic_cols();
    let mut le_rows = vec![];
    let mut le_rhs = vec![];
    for i in 0..pt.k {
        le_rows.push(
            nb.iter()
                .map(|&j| pt.tableau.a[(i, j)].clone())
                .collect::<Vec<_>>(),
        );
        le_rhs.push(pt.tableau.rhs[i].clone());
    }
    let obj: Vec<Rational> = nb.iter().map(|&j| pt.tableau.a[(i0, j)].clone()).collect();
    let le = if le_rows.is_empty() {
        Matrix::zeros(0, nb.len())
    } else {
        Matrix::from_rows(le_rows)
    };
    LpProblem::maximize(obj).with_le(le, le_rhs)
}

/// Assembles the basic feasible solution with the level column basic from
/// an optimal basic solution of the zero-block LP, per the displayed
/// reconstruction formulas: the level value is `-t* / w[i0][last]`, the
/// negative-block basics follow by substitution, and the zero-block part
/// is carried over. The result is verified against the tableau, for
/// nonnegativity and for basis independence before it is returned; a
/// failure dumps the raw data instead of silently accepting the formula.
pub fn construct_certificate(
    pt: &PartitionedTableau,
    i0: usize,
    t_star: &Rational,
    zero_block_solution: &BasicSolution,
) -> Result<BasicSolution, CriterionError> {
    let nb = pt.nonbasic_cols();
    let rows = pt.rows();
    let cols = pt.tableau.a.cols();
    let w_i0_last = pt.tableau.a[(i0, pt.last_col)].clone();
    if !w_i0_last.is_negative() {
        return Err(CriterionError::PatternViolation(format!(
            "level entry of row {i0} is {w_i0_last}, expected negative"
        )));
    }
    if t_star.is_negative() {
        return Err(CriterionError::VerificationFailed(format!(
            "t* = {t_star} is negative"
        )));
    }
    if zero_block_solution.values.len() != nb.len() + pt.k {
        return Err(CriterionError::VerificationFailed(format!(
            "zero-block solution has {} entries, expected {} vars + {} slacks",
            zero_block_solution.values.len(),
            nb.len(),
            pt.k
        )));
    }

    let mut alpha = vec![Rational::zero(); cols];
    for (idx, &j) in nb.iter().enumerate() {
        alpha[j] = zero_block_solution.values[idx].clone();
    }
    alpha[pt.last_col] = -&(t_star / &w_i0_last);
    for i in 0..rows {
        let mut v = pt.tableau.rhs[i].clone();
        for &j in &nb {
            v -= &(&pt.tableau.a[(i, j)] * &alpha[j]);
        }
        v -= &(&pt.tableau.a[(i, pt.last_col)] * &alpha[pt.last_col]);
        if i == i0 {
            if !v.is_zero() {
                return Err(CriterionError::VerificationFailed(format!(
                    "row {i0} basic value {v} not zero; t* = {t_star}, \
                     zero-block solution {zero_block_solution:?}, tableau {pt:?}"
                )));
            }
            continue;
        }
        if v.is_negative() {
            return Err(CriterionError::VerificationFailed(format!(
                "row {i} basic value {v} negative; t* = {t_star}, \
                 zero-block solution {zero_block_solution:?}, tableau {pt:?}"
            )));
        }
        alpha[pt.tableau.basis[i]] = v;
    }

    // basis: the zero-block LP basis (vars map to nonbasic columns, slack
    // i to the zero-row basic column), the untouched negative-block
    // basics, and the level column in place of row i0's basic column
    let mut basis: Vec<usize> = zero_block_solution
        .basis
        .iter()
        .map(|&b| {
            if b < nb.len() {
                nb[b]
            } else {
                pt.tableau.basis[b - nb.len()]
            }
        })
        .collect();
    for i in pt.k..rows {
        if i != i0 {
            basis.push(pt.tableau.basis[i]);
        }
    }
    basis.push(pt.last_col);
    basis.sort_unstable();

    let sub = Matrix::from_rows(
        (0..rows)
            .map(|i| basis.iter().map(|&j| pt.tableau.a[(i, j)].clone()).collect())
            .collect(),
    );
    if basis.len() != rows || sub.rank() != rows {
        return Err(CriterionError::VerificationFailed(format!(
            "assembled basis {basis:?} is not a basis; tableau {pt:?}"
        )));
    }
    for (j, v) in alpha.iter().enumerate() {
        if !v.is_zero() && !basis.contains(&j) {
            return Err(CriterionError::VerificationFailed(format!(
                "nonbasic column {j} carries value {v}; basis {basis:?}"
            )));
        }
    }
    Ok(BasicSolution {
        values: alpha,
        basis,
    })
}

/// The full decision procedure at level `h`. The affine special case must
/// have been ruled out by the caller; this entry enforces it with one LP.
pub fn algorithm1(inst: &DbpInstance, h: &Rational) -> Result<CheckOutcome, CriterionError> {
    if affine_case(inst).is_some() {
        return Err(CriterionError::PreconditionViolated);
    }
    algorithm1_unchecked(inst, h)
}

/// [`algorithm1`] without the affine-case guard, for callers that have
/// already established it (the bisection loop checks once, not per probe).
pub fn algorithm1_unchecked(
    inst: &DbpInstance,
    h: &Rational,
) -> Result<CheckOutcome, CriterionError> {
    let ws = build_w_system(inst, h);
    let last = ws.last_col();

    // a basic feasible solution of the structured system always exists
    // for a valid non-affine instance
    let lp = LpProblem::minimize(vec![Rational::zero(); ws.cols()])
        .with_eq(ws.w.clone(), ws.w0.clone());
    let Some(bfs) = find_bfs(&lp)? else {
        return Err(CriterionError::InternalInconsistency(format!(
            "structured system infeasible at h = {h}; invalid instance?"
        )));
    };
    if bfs.basis.contains(&last) {
        verify_w_certificate(&ws, &bfs).map_err(CriterionError::VerificationFailed)?;
        return Ok(CheckOutcome {
            verdict: Verdict::NotSubset,
            certificate: Some(bfs),
            evidence: vec![],
        });
    }

    let t = reduced_tableau(&ws.w, &ws.w0, &bfs.basis)?;
    let level_col = t.a.col(last);

    // single-pivot exits: a positive entry admits a ratio-test pivot, and
    // a nonzero entry on a zero right side admits a degenerate pivot
    let mut ratio_pick: Option<(usize, Rational)> = None;
    for (i, v) in level_col.iter().enumerate() {
        if v.is_positive() {
            let ratio = &t.rhs[i] / v;
            ratio_pick = match ratio_pick {
                None => Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br {
                        Some((i, ratio))
                    } else {
                        Some((bi, br))
                    }
                }
            };
        }
    }
    let pivot_row = ratio_pick.map(|(i, _)| i).or_else(|| {
        level_col
            .iter()
            .enumerate()
            .find(|(i, v)| !v.is_zero() && t.rhs[*i].is_zero())
            .map(|(i, _)| i)
    });
    if let Some(row) = pivot_row {
        let t2 = pivot(&t, row, last)?;
        let cert = BasicSolution {
            values: t2.basic_values(),
            basis: {
                let mut b = t2.basis.clone();
                b.sort_unstable();
                b
            },
        };
        verify_w_certificate(&ws, &cert).map_err(CriterionError::VerificationFailed)?;
        return Ok(CheckOutcome {
            verdict: Verdict::NotSubset,
            certificate: Some(cert),
            evidence: vec![],
        });
    }

    // partitioned form and the per-row maximizations
    let pt = to_blinn21(&t)?;
    let rows = pt.rows();
    let mut evidence = vec![];
    let mut any_unbounded = false;
    let mut candidate: Option<(usize, Rational)> = None;
    for i0 in pt.k..rows {
        let bound = boundedness_check(&pt, i0)?;
        let outcome = solve_lp(&row_lp(&pt, i0))?;
        match (&bound, &outcome) {
            (Boundedness::Unbounded, LpOutcome::Unbounded { .. }) => {
                any_unbounded = true;
                evidence.push(RowEvidence {
                    row: i0,
                    t_star: None,
                });
            }
            (Boundedness::Bounded, LpOutcome::Optimal { value, .. }) => {
                let t_star = value - &pt.tableau.rhs[i0];
                if candidate.is_none() && !t_star.is_negative() {
                    candidate = Some((i0, t_star.clone()));
                }
                evidence.push(RowEvidence {
                    row: i0,
                    t_star: Some(t_star),
                });
            }
            _ => {
                return Err(CriterionError::InternalInconsistency(format!(
                    "direction system and row LP disagree at row {i0}: \
                     {bound:?} vs {outcome:?}"
                )))
            }
        }
    }
    if any_unbounded {
        return Ok(CheckOutcome {
            verdict: Verdict::Subset,
            certificate: None,
            evidence,
        });
    }
    if let Some((i0, t_star)) = candidate {
        let zb = match solve_lp(&zero_block_lp(&pt, i0))? {
            LpOutcome::Optimal { value, solution } => {
                let zb_t = &value - &pt.tableau.rhs[i0];
                if zb_t != t_star {
                    return Err(CriterionError::VerificationFailed(format!(
                        "zero-block optimum {zb_t} differs from full optimum {t_star} \
                         at row {i0}"
                    )));
                }
                solution
            }
            other => {
                return Err(CriterionError::VerificationFailed(format!(
                    "zero-block LP not optimal at row {i0}: {other:?}"
                )))
            }
        };
        let cert = construct_certificate(&pt, i0, &t_star, &zb)?;
        verify_w_certificate(&ws, &cert).map_err(CriterionError::VerificationFailed)?;
        return Ok(CheckOutcome {
            verdict: Verdict::NotSubset,
            certificate: Some(cert),
            evidence,
        });
    }
    Ok(CheckOutcome {
        verdict: Verdict::Subset,
        certificate: None,
        evidence,
    })
}
