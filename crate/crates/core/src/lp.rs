//! Exact rational simplex: phase-I feasibility, phase-II optimization,
//! explicit tableaus and single pivots, plus strict-inequality feasibility.
//!
//! Pivot selection is Bland's rule throughout: the entering column is the
//! lowest-index one with a negative reduced cost, and ratio-test ties are
//! broken by the smallest basic-variable index. Every certificate the solver
//! hands back is re-verified by exact substitution before it is returned.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::exact::{dot, Matrix, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Min,
    Max,
}

/// A linear program over variables that are nonnegative unless masked free:
/// optimize `objective . x` subject to `eq x = eq_rhs`, `le x <= le_rhs`.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub eq: Matrix,
    pub eq_rhs: Vec<Rational>,
    pub le: Matrix,
    pub le_rhs: Vec<Rational>,
    pub nonneg: Vec<bool>,
}

impl LpProblem {
    pub fn minimize(objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem {
            sense: Sense::Min,
            objective,
            eq: Matrix::zeros(0, n),
            eq_rhs: vec![],
            le: Matrix::zeros(0, n),
            le_rhs: vec![],
            nonneg: vec![true; n],
        }
    }

    pub fn maximize(objective: Vec<Rational>) -> Self {
        LpProblem {
            sense: Sense::Max,
            ..Self::minimize(objective)
        }
    }

    pub fn with_eq(mut self, m: Matrix, rhs: Vec<Rational>) -> Self {
        self.eq = m;
        self.eq_rhs = rhs;
        self
    }

    pub fn with_le(mut self, m: Matrix, rhs: Vec<Rational>) -> Self {
        self.le = m;
        self.le_rhs = rhs;
        self
    }

    /// Marks variable `j` as free (sign-unrestricted).
    pub fn free_var(mut self, j: usize) -> Self {
        self.nonneg[j] = false;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let ok = self.eq.cols() == n
            && self.le.cols() == n
            && self.eq.rows() == self.eq_rhs.len()
            && self.le.rows() == self.le_rhs.len()
            && self.nonneg.len() == n;
        if !ok {
            return Err(LpError::BadShape(format!(
                "vars={} eq={}x{}/{} le={}x{}/{} mask={}",
                n,
                self.eq.rows(),
                self.eq.cols(),
                self.eq_rhs.len(),
                self.le.rows(),
                self.le.cols(),
                self.le_rhs.len(),
                self.nonneg.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum LpError {
    #[error("malformed problem dimensions ({0})")]
    BadShape(String),
    #[error("singular basis")]
    SingularBasis,
    #[error("zero pivot at row {0}, column {1}")]
    ZeroPivot(usize, usize),
    #[error("pivot budget exhausted after {0} pivots")]
    PivotBudget(u64),
    #[error("certificate failed exact verification: {0}")]
    CertificateCheck(String),
}

/// A basic solution of the slack-augmented system: `values` covers the
/// original variables followed by one slack per `<=` row, `basis` lists the
/// columns (in that same indexing) that carry the basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasicSolution {
    pub values: Vec<Rational>,
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        solution: BasicSolution,
    },
    /// `farkas` holds one multiplier per row, equality rows first. Summed
    /// against the rows it yields a constraint that is nonnegative on every
    /// feasible point yet has a negative right-hand side.
    Infeasible { farkas: Vec<Rational> },
    /// `point` is feasible and `point + t * ray` stays feasible for every
    /// `t >= 0` while strictly improving the objective.
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, LpOutcome::Unbounded { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }
}

/// Which standard-form column corresponds to what.
#[derive(Debug, Clone, Copy)]
enum StdCol {
    Plus(usize),
    Minus(usize),
    Slack(usize),
}

/// Standard form `min c.z : W z = b, z >= 0, b >= 0` of an [`LpProblem`].
struct StdForm {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    cost: Vec<Rational>,
    col_map: Vec<StdCol>,
    row_sign: Vec<bool>, // true when the row was negated to make b >= 0
}

fn to_standard(p: &LpProblem) -> StdForm {
    let n = p.num_vars();
    let mut col_map = vec![];
    for j in 0..n {
        col_map.push(StdCol::Plus(j));
        if !p.nonneg[j] {
            col_map.push(StdCol::Minus(j));
        }
    }
    for i in 0..p.le.rows() {
        col_map.push(StdCol::Slack(i));
    }
    let cols = col_map.len();
    let minimize = p.sense == Sense::Min;

    let mut cost = vec![Rational::zero(); cols];
    for (k, c) in col_map.iter().enumerate() {
        cost[k] = match *c {
            StdCol::Plus(j) => {
                if minimize {
                    p.objective[j].clone()
                } else {
                    -&p.objective[j]
                }
            }
            StdCol::Minus(j) => {
                if minimize {
                    -&p.objective[j]
                } else {
                    p.objective[j].clone()
                }
            }
            StdCol::Slack(_) => Rational::zero(),
        };
    }

    let rows = p.eq.rows() + p.le.rows();
    let mut a = vec![vec![Rational::zero(); cols]; rows];
    let mut b = vec![Rational::zero(); rows];
    for i in 0..p.eq.rows() {
        let row = p.eq.row(i);
        for (k, c) in col_map.iter().enumerate() {
            a[i][k] = match *c {
                StdCol::Plus(j) => row[j].clone(),
                StdCol::Minus(j) => -&row[j],
                StdCol::Slack(_) => Rational::zero(),
            };
        }
        b[i] = p.eq_rhs[i].clone();
    }
    for i in 0..p.le.rows() {
        let r = p.eq.rows() + i;
        let row = p.le.row(i);
        for (k, c) in col_map.iter().enumerate() {
            a[r][k] = match *c {
                StdCol::Plus(j) => row[j].clone(),
                StdCol::Minus(j) => -&row[j],
                StdCol::Slack(s) => {
                    if s == i {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }
            };
        }
        b[r] = p.le_rhs[i].clone();
    }
    let mut row_sign = vec![false; rows];
    for i in 0..rows {
        if b[i].is_negative() {
            row_sign[i] = true;
            for v in a[i].iter_mut() {
                *v = -&*v;
            }
            b[i] = -&b[i];
        }
    }
    StdForm {
        a,
        b,
        cost,
        col_map,
        row_sign,
    }
}

/// Working simplex tableau; columns past `real_cols` (phase-I artificials)
/// may leave the basis but never re-enter.
struct Work {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    zrow: Vec<Rational>,
    zval: Rational, // tracks -cost(basic solution)
    real_cols: usize,
    pivots: u64,
    budget: BigUint,
}

enum RunOutcome {
    Optimal,
    Unbounded { entering: usize },
}

impl Work {
    fn pivot_at(&mut self, row: usize, col: usize) {
        let inv = self.a[row][col].recip();
        for v in self.a[row].iter_mut() {
            *v *= &inv;
        }
        self.b[row] *= &inv;
        for i in 0..self.a.len() {
            if i == row || self.a[i][col].is_zero() {
                continue;
            }
            let f = self.a[i][col].clone();
            for j in 0..self.a[i].len() {
                let v = &self.a[i][j] - &(&f * &self.a[row][j]);
                self.a[i][j] = v;
            }
            let v = &self.b[i] - &(&f * &self.b[row]);
            self.b[i] = v;
        }
        if !self.zrow.is_empty() && !self.zrow[col].is_zero() {
            let f = self.zrow[col].clone();
            for j in 0..self.zrow.len() {
                let v = &self.zrow[j] - &(&f * &self.a[row][j]);
                self.zrow[j] = v;
            }
            let v = &self.zval - &(&f * &self.b[row]);
            self.zval = v;
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Bland's rule to optimality or unboundedness.
    fn run(&mut self) -> Result<RunOutcome, LpError> {
        loop {
            let entering = (0..self.real_cols).find(|&j| self.zrow[j].is_negative());
            let Some(col) = entering else {
                return Ok(RunOutcome::Optimal);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][col];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Ok(RunOutcome::Unbounded { entering: col });
            };
            self.pivot_at(row, col);
            if BigUint::from(self.pivots) > self.budget {
                return Err(LpError::PivotBudget(self.pivots));
            }
        }
    }

    fn basic_std_values(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.real_cols];
        for (i, &bj) in self.basis.iter().enumerate() {
            if bj < self.real_cols {
                out[bj] = self.b[i].clone();
            }
        }
        out
    }
}

/// `C(rows + cols, rows)`: the number of column subsets, a hard cap on
/// distinct bases and hence on Bland-rule pivots.
pub fn pivot_budget(rows: usize, cols: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..rows.min(cols) {
        acc = acc * BigUint::from(rows + cols - i) / BigUint::from(i + 1);
    }
    acc
}

struct Phase1 {
    work: Work,
    std_cols: usize,
}

/// Phase I: artificial variables on every row, minimize their sum.
fn phase1(std: &StdForm) -> Result<Phase1, LpError> {
    let rows = std.a.len();
    let cols = std.col_map.len();
    let total = cols + rows;
    let mut a = vec![vec![Rational::zero(); total]; rows];
    for i in 0..rows {
        a[i][..cols].clone_from_slice(&std.a[i]);
        a[i][cols + i] = Rational::one();
    }
    // reduced costs against the all-artificial, unit-cost basis
    let mut zrow = vec![Rational::zero(); total];
    for (j, z) in zrow.iter_mut().enumerate().take(cols) {
        let mut s = Rational::zero();
        for row in a.iter() {
            s += &row[j];
        }
        *z = -s;
    }
    let mut zval = Rational::zero();
    for v in &std.b {
        zval -= v;
    }
    let mut work = Work {
        a,
        b: std.b.clone(),
        basis: (cols..total).collect(),
        zrow,
        zval,
        real_cols: cols,
        pivots: 0,
        budget: pivot_budget(rows, total),
    };
    match work.run()? {
        RunOutcome::Optimal => Ok(Phase1 {
            work,
            std_cols: cols,
        }),
        RunOutcome::Unbounded { .. } => unreachable!("phase-I objective is bounded below by 0"),
    }
}

/// Reads the phase-I dual multipliers off the artificial columns: the
/// reduced cost of artificial `i` is `1 - y_i`.
fn phase1_duals(p1: &Phase1) -> Vec<Rational> {
    (0..p1.work.a.len())
        .map(|i| &Rational::one() - &p1.work.zrow[p1.std_cols + i])
        .collect()
}

/// Pivots leftover artificials out of the basis; rows that cannot be cleared
/// are redundant and get dropped. Returns the tableau trimmed to the real
/// columns, with no objective installed.
fn strip_artificials(mut p1: Phase1) -> Work {
    let cols = p1.std_cols;
    let rows = p1.work.a.len();
    p1.work.zrow = vec![];
    let mut drop_rows = vec![];
    for i in 0..rows {
        if p1.work.basis[i] < cols {
            continue;
        }
        match (0..cols).find(|&j| !p1.work.a[i][j].is_zero()) {
            Some(j) => p1.work.pivot_at(i, j),
            None => drop_rows.push(i),
        }
    }
    let keep = |i: &usize| !drop_rows.contains(i);
    let a: Vec<Vec<Rational>> = (0..rows)
        .filter(keep)
        .map(|i| p1.work.a[i][..cols].to_vec())
        .collect();
    let b: Vec<Rational> = (0..rows).filter(keep).map(|i| p1.work.b[i].clone()).collect();
    let basis: Vec<usize> = (0..rows).filter(keep).map(|i| p1.work.basis[i]).collect();
    let budget = pivot_budget(a.len(), cols);
    Work {
        a,
        b,
        basis,
        zrow: vec![],
        zval: Rational::zero(),
        real_cols: cols,
        pivots: p1.work.pivots,
        budget,
    }
}

/// Installs a fresh objective on a basic tableau by pricing out the basis.
fn install_cost(work: &mut Work, cost: &[Rational]) {
    let cols = work.real_cols;
    let mut zrow = cost.to_vec();
    let mut zval = Rational::zero();
    for (i, &bj) in work.basis.iter().enumerate() {
        if cost[bj].is_zero() {
            continue;
        }
        let cb = cost[bj].clone();
        for j in 0..cols {
            let v = &zrow[j] - &(&cb * &work.a[i][j]);
            zrow[j] = v;
        }
        zval -= &(&cb * &work.b[i]);
    }
    work.zrow = zrow;
    work.zval = zval;
}

/// Maps a standard-form point back onto original variables plus slacks.
fn map_values(p: &LpProblem, col_map: &[StdCol], std_vals: &[Rational]) -> Vec<Rational> {
    let n = p.num_vars();
    let mut out = vec![Rational::zero(); n + p.le.rows()];
    for (k, c) in col_map.iter().enumerate() {
        match *c {
            StdCol::Plus(j) => out[j] += &std_vals[k],
            StdCol::Minus(j) => out[j] -= &std_vals[k],
            StdCol::Slack(i) => out[n + i] = std_vals[k].clone(),
        }
    }
    out
}

fn map_basis(p: &LpProblem, col_map: &[StdCol], basis: &[usize]) -> Vec<usize> {
    let n = p.num_vars();
    let mut out: Vec<usize> = basis
        .iter()
        .map(|&k| match col_map[k] {
            StdCol::Plus(j) | StdCol::Minus(j) => j,
            StdCol::Slack(i) => n + i,
        })
        .collect();
    out.sort_unstable();
    out
}

/// Exact check that `values` (vars + slacks) satisfies the problem.
fn verify_feasible(p: &LpProblem, values: &[Rational]) -> Result<(), String> {
    let n = p.num_vars();
    let x = &values[..n];
    for (j, nn) in p.nonneg.iter().enumerate() {
        if *nn && x[j].is_negative() {
            return Err(format!("variable {j} negative: {}", x[j]));
        }
    }
    let ex = p.eq.mul_vec(x);
    for i in 0..p.eq.rows() {
        if ex[i] != p.eq_rhs[i] {
            return Err(format!("equality row {i} violated"));
        }
    }
    let lx = p.le.mul_vec(x);
    for i in 0..p.le.rows() {
        if lx[i] > p.le_rhs[i] {
            return Err(format!("inequality row {i} violated"));
        }
        if values[n + i].is_negative() || &lx[i] + &values[n + i] != p.le_rhs[i] {
            return Err(format!("slack {i} inconsistent"));
        }
    }
    Ok(())
}

/// Exact verification of a Farkas infeasibility certificate (one multiplier
/// per row, equality rows first; inequality multipliers must be >= 0).
pub fn verify_farkas(p: &LpProblem, farkas: &[Rational]) -> Result<(), String> {
    let ne = p.eq.rows();
    if farkas.len() != ne + p.le.rows() {
        return Err("certificate length mismatch".into());
    }
    let (u, w) = farkas.split_at(ne);
    if w.iter().any(|v| v.is_negative()) {
        return Err("negative multiplier on inequality row".into());
    }
    let mut combo = p.eq.mul_transpose_vec(u);
    let wl = p.le.mul_transpose_vec(w);
    for j in 0..p.num_vars() {
        combo[j] += &wl[j];
        if p.nonneg[j] {
            if combo[j].is_negative() {
                return Err(format!("combined coefficient {j} negative"));
            }
        } else if !combo[j].is_zero() {
            return Err(format!("combined coefficient {j} nonzero on free var"));
        }
    }
    let rhs = &dot(u, &p.eq_rhs) + &dot(w, &p.le_rhs);
    if !rhs.is_negative() {
        return Err(format!("combined right-hand side {rhs} not negative"));
    }
    Ok(())
}

/// Exact verification of an improving ray at a feasible point.
fn verify_ray(p: &LpProblem, point: &[Rational], ray: &[Rational]) -> Result<(), String> {
    for (j, nn) in p.nonneg.iter().enumerate() {
        if *nn && ray[j].is_negative() {
            return Err(format!("ray component {j} negative"));
        }
        if *nn && point[j].is_negative() {
            return Err(format!("point component {j} negative"));
        }
    }
    if p.eq.mul_vec(ray).iter().any(|v| !v.is_zero()) {
        return Err("ray leaves equality rows".into());
    }
    if p.le.mul_vec(ray).iter().any(|v| v.is_positive()) {
        return Err("ray increases an inequality row".into());
    }
    if p.eq.mul_vec(point) != p.eq_rhs {
        return Err("point violates equality rows".into());
    }
    let lx = p.le.mul_vec(point);
    for i in 0..p.le.rows() {
        if lx[i] > p.le_rhs[i] {
            return Err(format!("point violates inequality row {i}"));
        }
    }
    let d = dot(&p.objective, ray);
    let improves = match p.sense {
        Sense::Min => d.is_negative(),
        Sense::Max => d.is_positive(),
    };
    if !improves {
        return Err("ray does not improve the objective".into());
    }
    Ok(())
}

/// Solves the LP exactly. All three outcome kinds carry certificates that
/// have been re-verified by substitution before return.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome, LpError> {
    solve_lp_with_stats(p).map(|(o, _)| o)
}

/// Like [`solve_lp`] but also reports the total pivot count.
pub fn solve_lp_with_stats(p: &LpProblem) -> Result<(LpOutcome, u64), LpError> {
    p.check()?;
    let std = to_standard(p);
    let p1 = phase1(&std)?;
    if p1.work.zval.is_negative() {
        // zval tracks -cost(basis), so the phase-I optimum is -zval > 0
        let y = phase1_duals(&p1);
        let farkas: Vec<Rational> = y
            .iter()
            .zip(&std.row_sign)
            .map(|(yi, &flipped)| if flipped { yi.clone() } else { -yi })
            .collect();
        verify_farkas(p, &farkas).map_err(LpError::CertificateCheck)?;
        let pivots = p1.work.pivots;
        return Ok((LpOutcome::Infeasible { farkas }, pivots));
    }
    let mut work = strip_artificials(p1);
    install_cost(&mut work, &std.cost);
    let outcome = work.run()?;
    let pivots = work.pivots;
    match outcome {
        RunOutcome::Optimal => {
            let values = map_values(p, &std.col_map, &work.basic_std_values());
            verify_feasible(p, &values).map_err(LpError::CertificateCheck)?;
            let value = dot(&p.objective, &values[..p.num_vars()]);
            let solution = BasicSolution {
                values,
                basis: map_basis(p, &std.col_map, &work.basis),
            };
            Ok((LpOutcome::Optimal { value, solution }, pivots))
        }
        RunOutcome::Unbounded { entering } => {
            let mut ray_std = vec![Rational::zero(); work.real_cols];
            ray_std[entering] = Rational::one();
            for (i, &bj) in work.basis.iter().enumerate() {
                ray_std[bj] = -&work.a[i][entering];
            }
            let point_full = map_values(p, &std.col_map, &work.basic_std_values());
            let ray_full = map_values(p, &std.col_map, &ray_std);
            let n = p.num_vars();
            let point = point_full[..n].to_vec();
            let ray = ray_full[..n].to_vec();
            verify_ray(p, &point, &ray).map_err(LpError::CertificateCheck)?;
            Ok((LpOutcome::Unbounded { point, ray }, pivots))
        }
    }
}

/// Phase-I only: a basic feasible solution of the system, or `None` when it
/// is infeasible.
pub fn find_bfs(p: &LpProblem) -> Result<Option<BasicSolution>, LpError> {
    p.check()?;
    let std = to_standard(p);
    let p1 = phase1(&std)?;
    if p1.work.zval.is_negative() {
        return Ok(None);
    }
    let work = strip_artificials(p1);
    let values = map_values(p, &std.col_map, &work.basic_std_values());
    verify_feasible(p, &values).map_err(LpError::CertificateCheck)?;
    Ok(Some(BasicSolution {
        values,
        basis: map_basis(p, &std.col_map, &work.basis),
    }))
}

/// An equality-system tableau with an explicit basis: column `basis[i]` is
/// the unit column of row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    pub a: Matrix,
    pub rhs: Vec<Rational>,
    pub basis: Vec<usize>,
}

impl Tableau {
    /// True when the basis is feasible (all basic values nonnegative).
    pub fn is_feasible(&self) -> bool {
        self.rhs.iter().all(|v| !v.is_negative())
    }

    /// The basic solution as a full-length vector (nonbasic entries zero).
    pub fn basic_values(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.a.cols()];
        for (i, &b) in self.basis.iter().enumerate() {
            out[b] = self.rhs[i].clone();
        }
        out
    }
}

/// Reduces `a x = b` so the chosen basis columns become the identity
/// (column `basis[i]` pairs with row `i`).
pub fn reduced_tableau(a: &Matrix, b: &[Rational], basis: &[usize]) -> Result<Tableau, LpError> {
    let rows = a.rows();
    if basis.len() != rows || b.len() != rows {
        return Err(LpError::BadShape(format!(
            "tableau of {rows} rows with {} basis columns, {} rhs entries",
            basis.len(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for i in 0..rows {
        let col = basis[i];
        let Some(p) = (i..rows).find(|&r| !m[(r, col)].is_zero()) else {
            return Err(LpError::SingularBasis);
        };
        if p != i {
            for j in 0..m.cols() {
                let tmp = m[(i, j)].clone();
                m[(i, j)] = m[(p, j)].clone();
                m[(p, j)] = tmp;
            }
            rhs.swap(i, p);
        }
        let inv = m[(i, col)].recip();
        for j in 0..m.cols() {
            let v = &m[(i, j)] * &inv;
            m[(i, j)] = v;
        }
        let v = &rhs[i] * &inv;
        rhs[i] = v;
        for r in 0..rows {
            if r != i && !m[(r, col)].is_zero() {
                let f = m[(r, col)].clone();
                for j in 0..m.cols() {
                    let v = &m[(r, j)] - &(&f * &m[(i, j)]);
                    m[(r, j)] = v;
                }
                let v = &rhs[r] - &(&f * &rhs[i]);
                rhs[r] = v;
            }
        }
    }
    Ok(Tableau {
        a: m,
        rhs,
        basis: basis.to_vec(),
    })
}

/// One exact pivot: column `col` enters the basis at `row`.
pub fn pivot(t: &Tableau, row: usize, col: usize) -> Result<Tableau, LpError> {
    if t.a[(row, col)].is_zero() {
        return Err(LpError::ZeroPivot(row, col));
    }
    let mut out = t.clone();
    let inv = out.a[(row, col)].recip();
    for j in 0..out.a.cols() {
        let v = &out.a[(row, j)] * &inv;
        out.a[(row, j)] = v;
    }
    let v = &out.rhs[row] * &inv;
    out.rhs[row] = v;
    for i in 0..out.a.rows() {
        if i != row && !out.a[(i, col)].is_zero() {
            let f = out.a[(i, col)].clone();
            for j in 0..out.a.cols() {
                let v = &out.a[(i, j)] - &(&f * &out.a[(row, j)]);
                out.a[(i, j)] = v;
            }
            let v = &out.rhs[i] - &(&f * &out.rhs[row]);
            out.rhs[i] = v;
        }
    }
    out.basis[row] = col;
    Ok(out)
}

/// Decides whether the system stays solvable when row `strict_row` of the
/// `<=` block is made strict. Implemented by maximizing a slack on that row:
/// strictly feasible iff the maximum is positive or unbounded.
pub fn strict_feasibility(sys: &LpProblem, strict_row: usize) -> Result<bool, LpError> {
    let n = sys.num_vars();
    assert!(strict_row < sys.le.rows(), "strict row out of range");
    let mut objective = vec![Rational::zero(); n + 1];
    objective[n] = Rational::one();
    let mut le_rows = sys.le.to_rows();
    for (i, row) in le_rows.iter_mut().enumerate() {
        row.push(if i == strict_row {
            Rational::one()
        } else {
            Rational::zero()
        });
    }
    let mut eq_rows = sys.eq.to_rows();
    for row in eq_rows.iter_mut() {
        row.push(Rational::zero());
    }
    let mut nonneg = sys.nonneg.clone();
    nonneg.push(true);
    let eq = if eq_rows.is_empty() {
        Matrix::zeros(0, n + 1)
    } else {
        Matrix::from_rows(eq_rows)
    };
    let le = if le_rows.is_empty() {
        Matrix::zeros(0, n + 1)
    } else {
        Matrix::from_rows(le_rows)
    };
    let p = LpProblem {
        sense: Sense::Max,
        objective,
        eq,
        eq_rhs: sys.eq_rhs.clone(),
        le,
        le_rhs: sys.le_rhs.clone(),
        nonneg,
    };
    Ok(match solve_lp(&p)? {
        LpOutcome::Optimal { value, .. } => value.is_positive(),
        LpOutcome::Unbounded { .. } => true,
        LpOutcome::Infeasible { .. } => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::vec_from_i64;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn optimal_simple() {
        // min x1 s.t. x1 + x2 = 1, x >= 0 -> 0 at (0, 1)
        let p = LpProblem::minimize(vec_from_i64(&[1, 0]))
            .with_eq(Matrix::from_i64(&[&[1, 1]]), vec_from_i64(&[1]));
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(0, 1));
                assert_eq!(solution.values, vec_from_i64(&[0, 1]));
            }
            o => panic!("expected optimal, got {o:?}"),
        }
    }

    #[test]
    fn infeasible_with_certificate() {
        // x1 = -1, x1 >= 0
        let p = LpProblem::minimize(vec_from_i64(&[0]))
            .with_eq(Matrix::from_i64(&[&[1]]), vec_from_i64(&[-1]));
        match solve_lp(&p).unwrap() {
            LpOutcome::Infeasible { farkas } => verify_farkas(&p, &farkas).unwrap(),
            o => panic!("expected infeasible, got {o:?}"),
        }
    }

    #[test]
    fn unbounded_with_ray() {
        // max x1 s.t. x1 >= 0
        let p = LpProblem::maximize(vec_from_i64(&[1]));
        match solve_lp(&p).unwrap() {
            LpOutcome::Unbounded { point: _, ray } => {
                assert_eq!(ray, vec_from_i64(&[1]));
            }
            o => panic!("expected unbounded, got {o:?}"),
        }
    }

    #[test]
    fn free_variable_handling() {
        // min y s.t. -y <= 3, y free -> -3
        let p = LpProblem::minimize(vec_from_i64(&[1]))
            .with_le(Matrix::from_i64(&[&[-1]]), vec_from_i64(&[3]))
            .free_var(0);
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(-3, 1)),
            o => panic!("expected optimal, got {o:?}"),
        }
    }

    #[test]
    fn degenerate_lp_terminates() {
        let p = LpProblem::maximize(vec_from_i64(&[3, 2])).with_le(
            Matrix::from_i64(&[&[1, 1], &[2, 2], &[3, 3], &[1, 0], &[0, 1]]),
            vec_from_i64(&[4, 8, 12, 2, 3]),
        );
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(10, 1)),
            o => panic!("expected optimal, got {o:?}"),
        }
    }

    #[test]
    fn redundant_equality_rows() {
        let p = LpProblem::minimize(vec_from_i64(&[1, 1]))
            .with_eq(Matrix::from_i64(&[&[1, 1], &[2, 2]]), vec_from_i64(&[2, 4]));
        match solve_lp(&p).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(2, 1)),
            o => panic!("expected optimal, got {o:?}"),
        }
    }

    #[test]
    fn find_bfs_examples() {
        // {x1 + x2 = 1, x >= 0}: Bland picks x1
        let p = LpProblem::minimize(vec_from_i64(&[0, 0]))
            .with_eq(Matrix::from_i64(&[&[1, 1]]), vec_from_i64(&[1]));
        let bfs = find_bfs(&p).unwrap().unwrap();
        assert_eq!(bfs.values, vec_from_i64(&[1, 0]));
        assert_eq!(bfs.basis, vec![0]);

        let p = LpProblem::minimize(vec_from_i64(&[0, 0]))
            .with_eq(Matrix::from_i64(&[&[1, 0], &[0, 1]]), vec_from_i64(&[2, 3]));
        let bfs = find_bfs(&p).unwrap().unwrap();
        assert_eq!(bfs.values, vec_from_i64(&[2, 3]));

        let p = LpProblem::minimize(vec_from_i64(&[0, 0]))
            .with_eq(Matrix::from_i64(&[&[1, 1]]), vec_from_i64(&[-1]));
        assert!(find_bfs(&p).unwrap().is_none());
    }

    #[test]
    fn reduced_tableau_hand_case() {
        // {2 x1 + x2 = 4}, basis {x1} -> row (1, 1/2 | 2)
        let t = reduced_tableau(&Matrix::from_i64(&[&[2, 1]]), &vec_from_i64(&[4]), &[0]).unwrap();
        assert_eq!(t.a.row(0), &[r(1, 1), r(1, 2)]);
        assert_eq!(t.rhs, vec![r(2, 1)]);
        assert!(t.is_feasible());
    }

    #[test]
    fn reduced_tableau_identity_basis() {
        let a = Matrix::from_i64(&[&[1, 0, 5], &[0, 1, 7]]);
        let b = vec_from_i64(&[2, 3]);
        let t = reduced_tableau(&a, &b, &[0, 1]).unwrap();
        assert_eq!(t.a, a);
        assert_eq!(t.rhs, b);
    }

    #[test]
    fn reduced_tableau_singular_basis() {
        let a = Matrix::from_i64(&[&[1, 1], &[1, 1]]);
        let b = vec_from_i64(&[1, 1]);
        assert!(matches!(
            reduced_tableau(&a, &b, &[0, 1]),
            Err(LpError::SingularBasis)
        ));
    }

    #[test]
    fn reduced_tableau_infeasible_basis_flagged() {
        let a = Matrix::from_i64(&[&[1, 1]]);
        let b = vec_from_i64(&[-2]);
        let t = reduced_tableau(&a, &b, &[0]).unwrap();
        assert!(!t.is_feasible());
    }

    #[test]
    fn pivot_hand_case() {
        // (1, 2 | 4), pivot col 1 -> (1/2, 1 | 2)
        let t = Tableau {
            a: Matrix::from_i64(&[&[1, 2]]),
            rhs: vec_from_i64(&[4]),
            basis: vec![0],
        };
        let t2 = pivot(&t, 0, 1).unwrap();
        assert_eq!(t2.a.row(0), &[r(1, 2), r(1, 1)]);
        assert_eq!(t2.rhs, vec![r(2, 1)]);
        assert_eq!(t2.basis, vec![1]);
    }

    #[test]
    fn pivot_identity_column_is_noop() {
        let t = reduced_tableau(
            &Matrix::from_i64(&[&[1, 3], &[0, 1]]),
            &vec_from_i64(&[5, 2]),
            &[0, 1],
        )
        .unwrap();
        let t2 = pivot(&t, 0, 0).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn pivot_involution() {
        let t = reduced_tableau(
            &Matrix::from_i64(&[&[1, 2, -1], &[0, 3, 1]]),
            &vec_from_i64(&[4, 6]),
            &[0, 2],
        )
        .unwrap();
        let t2 = pivot(&t, 1, 1).unwrap();
        let t3 = pivot(&t2, 1, 2).unwrap();
        assert_eq!(t, t3);
    }

    #[test]
    fn pivot_zero_rejected() {
        let t = Tableau {
            a: Matrix::from_i64(&[&[1, 0]]),
            rhs: vec_from_i64(&[1]),
            basis: vec![0],
        };
        assert!(matches!(pivot(&t, 0, 1), Err(LpError::ZeroPivot(0, 1))));
    }

    #[test]
    fn strict_feasibility_cases() {
        // {u >= 0, u < 1}: strictly feasible
        let p = LpProblem::minimize(vec_from_i64(&[0]))
            .with_le(Matrix::from_i64(&[&[1]]), vec_from_i64(&[1]));
        assert!(strict_feasibility(&p, 0).unwrap());

        // {u >= 0, u < 0}: not
        let p = LpProblem::minimize(vec_from_i64(&[0]))
            .with_le(Matrix::from_i64(&[&[1]]), vec_from_i64(&[0]));
        assert!(!strict_feasibility(&p, 0).unwrap());

        // {u >= 0, -u < -5}: strictly feasible (u = 6)
        let p = LpProblem::minimize(vec_from_i64(&[0]))
            .with_le(Matrix::from_i64(&[&[-1]]), vec_from_i64(&[-5]));
        assert!(strict_feasibility(&p, 0).unwrap());
    }

    #[test]
    fn max_sense_value_sign() {
        // max -x1 s.t. -x1 <= -2 -> -2
        let p = LpProblem::maximize(vec_from_i64(&[-1]))
            .with_le(Matrix::from_i64(&[&[-1]]), vec_from_i64(&[-2]));
        assert_eq!(solve_lp(&p).unwrap().value(), Some(&r(-2, 1)));
    }
}
