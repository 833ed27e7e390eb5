//! The bilinear-program instance type and its structural toolkit:
//! perfect-polytope validation, Farkas redundancy classification, vertex
//! enumeration and encoding-length bounds.

use num_bigint::BigUint;
use num_traits::Zero as _;
use serde::{Deserialize, Serialize};

use crate::exact::{ceil_log2_plus1, Matrix, Rational};
use crate::lp::{solve_lp, LpOutcome, LpProblem, Sense};

/// A disjoint bilinear program: minimize `x^T C y + g.x + e.y + z_offset`
/// over `X = {x >= 0 : A x <= a}` and `Y = {y : D y <= d}`.
///
/// The JSON file form uses keys `n, m, q, p, C, A, a, g, e, D, d` and an
/// optional `z_offset`; every numeric literal is an integer or a string
/// `"p/q"`. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DbpInstance {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub p: usize,
    #[serde(rename = "C")]
    pub c: Matrix,
    #[serde(rename = "A")]
    pub a: Matrix,
    #[serde(rename = "a")]
    pub a_rhs: Vec<Rational>,
    pub g: Vec<Rational>,
    pub e: Vec<Rational>,
    #[serde(rename = "D")]
    pub d: Matrix,
    #[serde(rename = "d")]
    pub d_rhs: Vec<Rational>,
    #[serde(default)]
    pub z_offset: Rational,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum ValidationError {
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("m = {m} must be strictly less than p = {p}")]
    MNotLessThanP { m: usize, p: usize },
    #[error("rank(D) = {rank}, expected full column rank {m}")]
    RankDeficient { rank: usize, m: usize },
    #[error("X is empty")]
    XEmpty,
    #[error("X is unbounded in coordinate {var}")]
    XUnbounded { var: usize },
}

impl DbpInstance {
    /// Structural and polyhedral validation: dimensions agree, `m < p`,
    /// `rank(D) = m`, and `X` is nonempty and bounded.
    pub fn validate(&self) -> Result<(), ValidationError> {
        self.check_dims()?;
        if self.m >= self.p {
            return Err(ValidationError::MNotLessThanP {
                m: self.m,
                p: self.p,
            });
        }
        let rank = self.d.rank();
        if rank != self.m {
            return Err(ValidationError::RankDeficient { rank, m: self.m });
        }
        for j in 0..self.n {
            let mut obj = vec![Rational::zero(); self.n];
            obj[j] = Rational::one();
            let lp = LpProblem::maximize(obj).with_le(self.a.clone(), self.a_rhs.clone());
            match solve_lp(&lp).expect("coordinate LP") {
                LpOutcome::Optimal { .. } => {}
                LpOutcome::Infeasible { .. } => return Err(ValidationError::XEmpty),
                LpOutcome::Unbounded { .. } => return Err(ValidationError::XUnbounded { var: j }),
            }
        }
        Ok(())
    }

    fn check_dims(&self) -> Result<(), ValidationError> {
        let bad = |what: &str| Err(ValidationError::Dim(what.to_string()));
        if self.n == 0 || self.m == 0 || self.q == 0 || self.p == 0 {
            return bad("n, m, q, p must be positive");
        }
        if self.c.rows() != self.n || self.c.cols() != self.m {
            return bad("C must be n x m");
        }
        if self.a.rows() != self.q || self.a.cols() != self.n {
            return bad("A must be q x n");
        }
        if self.a_rhs.len() != self.q {
            return bad("a must have q entries");
        }
        if self.g.len() != self.n {
            return bad("g must have n entries");
        }
        if self.e.len() != self.m {
            return bad("e must have m entries");
        }
        if self.d.rows() != self.p || self.d.cols() != self.m {
            return bad("D must be p x m");
        }
        if self.d_rhs.len() != self.p {
            return bad("d must have p entries");
        }
        Ok(())
    }

    /// The raw bilinear objective without the reporting offset.
    pub fn objective_raw(&self, x: &[Rational], y: &[Rational]) -> Rational {
        let cy = self.c.mul_vec(y);
        &crate::exact::dot(x, &cy)
            + &(&crate::exact::dot(&self.g, x) + &crate::exact::dot(&self.e, y))
    }

    /// The full objective including `z_offset`.
    pub fn objective(&self, x: &[Rational], y: &[Rational]) -> Rational {
        &self.objective_raw(x, y) + &self.z_offset
    }

    /// H-representation of `X` with the nonnegativity rows made explicit:
    /// `[A; -I] x <= (a, 0)`.
    pub fn x_system(&self) -> (Matrix, Vec<Rational>) {
        let mut neg_i = Matrix::zeros(self.n, self.n);
        for j in 0..self.n {
            neg_i[(j, j)] = -&Rational::one();
        }
        let mut rhs = self.a_rhs.clone();
        rhs.extend(vec![Rational::zero(); self.n]);
        (self.a.vstack(&neg_i), rhs)
    }

    pub fn from_json_str(s: &str) -> Result<DbpInstance, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization")
    }

    /// Stable content hash (FNV-1a over the canonical JSON), used to key
    /// vertex caches and name harness artifacts across machines.
    pub fn content_hash(&self) -> u64 {
        fnv1a(
            serde_json::to_string(self)
                .expect("instance serialization")
                .as_bytes(),
        )
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Visits all `k`-element index subsets of `0..n` in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    if k == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k - 1;
        while idx[i] == i + n - k {
            if i == 0 {
                return;
            }
            i -= 1;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum VertexError {
    #[error("solution set is unbounded")]
    UnboundedSet,
    #[error("lp engine failure: {0}")]
    Engine(#[from] crate::lp::LpError),
}

/// All vertices of `{y : D y <= d}` by exhaustive scan over the m-row
/// subsystems, deduplicated and sorted lexicographically. Exponential in
/// `C(p, m)`; strictly a desk-scale tool.
pub fn enumerate_vertices(
    d: &Matrix,
    d_rhs: &[Rational],
) -> Result<Vec<Vec<Rational>>, VertexError> {
    let m = d.cols();
    let p = d.rows();
    // boundedness first, one LP per signed coordinate
    for j in 0..m {
        for sign in [1i64, -1] {
            let mut obj = vec![Rational::zero(); m];
            obj[j] = Rational::from_int(sign);
            let mut lp = LpProblem::maximize(obj).with_le(d.clone(), d_rhs.to_vec());
            for v in 0..m {
                lp = lp.free_var(v);
            }
            match solve_lp(&lp)? {
                LpOutcome::Optimal { .. } => {}
                LpOutcome::Infeasible { .. } => return Ok(vec![]),
                LpOutcome::Unbounded { .. } => return Err(VertexError::UnboundedSet),
            }
        }
    }
    let mut found: Vec<Vec<Rational>> = vec![];
    for_each_subset(p, m, |rows| {
        let sub = Matrix::from_rows(rows.iter().map(|&i| d.row(i).to_vec()).collect());
        let rhs: Vec<Rational> = rows.iter().map(|&i| d_rhs[i].clone()).collect();
        if let Ok(y) = crate::exact::solve_square_system(&sub, &rhs) {
            let inside = d.mul_vec(&y).iter().zip(d_rhs).all(|(lhs, rhs)| lhs <= rhs);
            if inside && !found.contains(&y) {
                found.push(y);
            }
        }
    });
    found.sort();
    Ok(found)
}

/// How an inequality `s.y <= s0` relates to a consistent system `D y <= d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RedundancyClass {
    NotRedundant,
    Weakly,
    Strongly,
    Degenerate,
}

/// Classifies `s.y <= s0` against the consistent system `D y <= d` through
/// the multiplier program: minimize `d.v` subject to `D^T v = s`, `v >= 0`.
/// The optimum equals `max {s.y : D y <= d}`, so the inequality is strongly
/// redundant when the optimum sits below `s0`, weakly redundant at `s0`,
/// and not redundant above it.
pub fn classify_redundancy(
    s: &[Rational],
    s0: &Rational,
    d: &Matrix,
    d_rhs: &[Rational],
) -> RedundancyClass {
    if s.iter().all(|v| v.is_zero()) && !s0.is_negative() {
        return RedundancyClass::Degenerate;
    }
    let lp = LpProblem::minimize(d_rhs.to_vec()).with_eq(d.transpose(), s.to_vec());
    match solve_lp(&lp).expect("redundancy LP") {
        LpOutcome::Infeasible { .. } => RedundancyClass::NotRedundant,
        // an unbounded multiplier program means D y <= d was inconsistent,
        // which the caller promised not to pass
        LpOutcome::Unbounded { .. } => RedundancyClass::NotRedundant,
        LpOutcome::Optimal { value, .. } => {
            if &value > s0 {
                RedundancyClass::NotRedundant
            } else if &value < s0 {
                RedundancyClass::Strongly
            } else {
                RedundancyClass::Weakly
            }
        }
    }
}

/// A violation of the perfect-polytope conditions, with a witness.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// Condition a): a facet row implied by the rest of the system.
    #[serde(rename = "a")]
    RedundantRow { row: usize, class: RedundancyClass },
    /// Condition a): the solution set is unbounded or has empty interior.
    #[serde(rename = "a-set")]
    BadSet { detail: String },
    /// Condition b): a nonsingular m-row subsystem whose equality point
    /// falls outside the solution set.
    #[serde(rename = "b")]
    ConeOriginOutside {
        rows: Vec<usize>,
        point: Vec<Rational>,
    },
    /// Condition c): a vertex with more than m tight facet rows.
    #[serde(rename = "c")]
    VertexNotSimple {
        vertex: Vec<Rational>,
        tight_rows: Vec<usize>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct PerfectReport {
    pub is_perfect: bool,
    pub redundant_rows: Vec<usize>,
    pub vertices: Vec<Vec<Rational>>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("rank(D) = {rank}, expected {m}")]
pub struct RankDeficient {
    pub rank: usize,
    pub m: usize,
}

/// Checks the three perfect-polytope conditions for `D y <= d`:
///
/// a) no row is redundant in the others and the set is bounded with
///    nonempty interior (interior via a uniform-slack LP);
/// b) the equality point of every nonsingular m-row subsystem lies in the
///    solution set;
/// c) every vertex has exactly m tight rows.
///
/// Exponential in `C(p, m)`: a validation tool, not an inner loop.
pub fn check_perfect(d: &Matrix, d_rhs: &[Rational]) -> Result<PerfectReport, RankDeficient> {
    let m = d.cols();
    let p = d.rows();
    let rank = d.rank();
    if rank != m {
        return Err(RankDeficient { rank, m });
    }
    let mut violations = vec![];
    let mut redundant_rows = vec![];

    let vertices = match enumerate_vertices(d, d_rhs) {
        Ok(v) => v,
        Err(VertexError::UnboundedSet) => {
            violations.push(Violation::BadSet {
                detail: "solution set is unbounded".into(),
            });
            return Ok(PerfectReport {
                is_perfect: false,
                redundant_rows,
                vertices: vec![],
                violations,
            });
        }
        Err(VertexError::Engine(e)) => panic!("lp engine failure: {e}"),
    };

    // nonempty interior: maximize a uniform slack on every row
    {
        let mut obj = vec![Rational::zero(); m + 1];
        obj[m] = Rational::one();
        let mut rows = d.to_rows();
        for r in rows.iter_mut() {
            r.push(Rational::one());
        }
        let mut lp = LpProblem::maximize(obj).with_le(Matrix::from_rows(rows), d_rhs.to_vec());
        for v in 0..m {
            lp = lp.free_var(v);
        }
        let interior_ok = match solve_lp(&lp).expect("interior LP") {
            LpOutcome::Optimal { value, .. } => value.is_positive(),
            LpOutcome::Unbounded { .. } => true,
            LpOutcome::Infeasible { .. } => false,
        };
        if !interior_ok {
            violations.push(Violation::BadSet {
                detail: "solution set is empty or has empty interior".into(),
            });
            return Ok(PerfectReport {
                is_perfect: false,
                redundant_rows,
                vertices,
                violations,
            });
        }
    }

    // a) row-by-row redundancy within the remaining system
    for i in 0..p {
        let others: Vec<usize> = (0..p).filter(|&r| r != i).collect();
        let sub = Matrix::from_rows(others.iter().map(|&r| d.row(r).to_vec()).collect());
        let sub_rhs: Vec<Rational> = others.iter().map(|&r| d_rhs[r].clone()).collect();
        let class = classify_redundancy(d.row(i), &d_rhs[i], &sub, &sub_rhs);
        if class != RedundancyClass::NotRedundant {
            redundant_rows.push(i);
            violations.push(Violation::RedundantRow { row: i, class });
        }
    }

    // b) every nonsingular m-row subsystem pins a point of the set
    for_each_subset(p, m, |rows| {
        let sub = Matrix::from_rows(rows.iter().map(|&i| d.row(i).to_vec()).collect());
        let rhs: Vec<Rational> = rows.iter().map(|&i| d_rhs[i].clone()).collect();
        if let Ok(y) = crate::exact::solve_square_system(&sub, &rhs) {
            let inside = d.mul_vec(&y).iter().zip(d_rhs).all(|(lhs, rhs)| lhs <= rhs);
            if !inside {
                violations.push(Violation::ConeOriginOutside {
                    rows: rows.to_vec(),
                    point: y,
                });
            }
        }
    });

    // c) vertices are simple
    for v in &vertices {
        let lhs = d.mul_vec(v);
        let tight: Vec<usize> = (0..p).filter(|&i| lhs[i] == d_rhs[i]).collect();
        if tight.len() != m {
            violations.push(Violation::VertexNotSimple {
                vertex: v.clone(),
                tight_rows: tight,
            });
        }
    }

    Ok(PerfectReport {
        is_perfect: violations.is_empty(),
        redundant_rows,
        vertices,
        violations,
    })
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("instance has non-integer data in {0}; the encoding-length bound needs integers")]
pub struct NonIntegerInstance(pub &'static str);

fn sum_bits(
    values: impl Iterator<Item = Rational>,
    what: &'static str,
) -> Result<u64, NonIntegerInstance> {
    let mut total = 0u64;
    for v in values {
        if !v.is_integer() {
            return Err(NonIntegerInstance(what));
        }
        total += ceil_log2_plus1(v.numer().magnitude());
    }
    Ok(total)
}

/// The integer encoding-length bound `L = L1 + L2 + (qm+q+m)(1 + log(H+1))`
/// over the two constraint blocks, every `log` read as `ceil_log2_plus1`,
/// and `H = max(|c_ij|, |g_i|, |e_j|)`.
///
/// `L1` sums the bit lengths of all entries of `[A | a]` plus
/// `log(n(q+1))`; `L2` does the same for `[D | d]` with `log(p(m+1))`. The
/// optimal raw objective value is then a fraction whose numerator and
/// denominator are bounded by `2^L` in magnitude. `z_offset` is a
/// reporting constant and exempt from the integrality requirement.
pub fn compute_l(inst: &DbpInstance) -> Result<u64, NonIntegerInstance> {
    let entries =
        |m: &Matrix| -> Vec<Rational> { (0..m.rows()).flat_map(|i| m.row(i).to_vec()).collect() };
    let l1 = sum_bits(
        entries(&inst.a)
            .into_iter()
            .chain(inst.a_rhs.iter().cloned()),
        "A or a",
    )? + ceil_log2_plus1(&BigUint::from(inst.n * (inst.q + 1)));
    let l2 = sum_bits(
        entries(&inst.d)
            .into_iter()
            .chain(inst.d_rhs.iter().cloned()),
        "D or d",
    )? + ceil_log2_plus1(&BigUint::from(inst.p * (inst.m + 1)));
    let mut h = BigUint::zero();
    for v in entries(&inst.c)
        .into_iter()
        .chain(inst.g.iter().cloned())
        .chain(inst.e.iter().cloned())
    {
        if !v.is_integer() {
            return Err(NonIntegerInstance("C, g or e"));
        }
        h = h.max(v.numer().magnitude().clone());
    }
    let factor = (inst.q * inst.m + inst.q + inst.m) as u64;
    Ok(l1 + l2 + factor * (1 + ceil_log2_plus1(&h)))
}

/// The two polynomial-time upper bounds on the optimal raw value:
/// `M1 = min_x max_y` and `M2 = max_x min_y` of the bilinear objective,
/// each computed as a single LP by dualizing the inner optimization over
/// its polytope. Both dominate the true minimum, so either may tighten the
/// upper end of the bisection interval; neither dominates the other.
pub fn minimax_bounds(inst: &DbpInstance) -> (Rational, Rational) {
    let n = inst.n;
    let p = inst.p;
    let m = inst.m;

    let le_rows: Vec<Vec<Rational>> = (0..inst.q)
        .map(|i| {
            let mut row = inst.a.row(i).to_vec();
            row.extend(vec![Rational::zero(); p]);
            row
        })
        .collect();

    // M1 over (x, w): min g.x + d.w with D^T w - C^T x = e
    let mut eq_rows = vec![];
    for j in 0..m {
        let mut row = vec![Rational::zero(); n + p];
        for i in 0..n {
            row[i] = -&inst.c[(i, j)];
        }
        for k in 0..p {
            row[n + k] = inst.d[(k, j)].clone();
        }
        eq_rows.push(row);
    }
    let mut obj = inst.g.clone();
    obj.extend(inst.d_rhs.iter().cloned());
    let lp = LpProblem {
        sense: Sense::Min,
        objective: obj,
        eq: Matrix::from_rows(eq_rows),
        eq_rhs: inst.e.clone(),
        le: Matrix::from_rows(le_rows.clone()),
        le_rhs: inst.a_rhs.clone(),
        nonneg: vec![true; n + p],
    };
    let m1 = match solve_lp(&lp).expect("M1 LP") {
        LpOutcome::Optimal { value, .. } => value,
        o => panic!("M1 LP not optimal on a validated instance: {o:?}"),
    };

    // M2 over (x, v): max g.x - d.v with C^T x + D^T v = -e
    let mut eq_rows = vec![];
    for j in 0..m {
        let mut row = vec![Rational::zero(); n + p];
        for i in 0..n {
            row[i] = inst.c[(i, j)].clone();
        }
        for k in 0..p {
            row[n + k] = inst.d[(k, j)].clone();
        }
        eq_rows.push(row);
    }
    let mut obj = inst.g.clone();
    obj.extend(inst.d_rhs.iter().map(|v| -v));
    let lp = LpProblem {
        sense: Sense::Max,
        objective: obj,
        eq: Matrix::from_rows(eq_rows),
        eq_rhs: inst.e.iter().map(|v| -v).collect(),
        le: Matrix::from_rows(le_rows),
        le_rhs: inst.a_rhs.clone(),
        nonneg: vec![true; n + p],
    };
    let m2 = match solve_lp(&lp).expect("M2 LP") {
        LpOutcome::Optimal { value, .. } => value,
        o => panic!("M2 LP not optimal on a validated instance: {o:?}"),
    };
    (m1, m2)
}

/// `D = [I; -I]`, `d = (1..1, 0..0)`: the unit cube, the canonical perfect
/// polytope of the boolean reductions.
pub fn unit_cube(m: usize) -> (Matrix, Vec<Rational>) {
    let mut rows = vec![];
    let mut rhs = vec![];
    for j in 0..m {
        let mut r = vec![Rational::zero(); m];
        r[j] = Rational::one();
        rows.push(r);
        rhs.push(Rational::one());
    }
    for j in 0..m {
        let mut r = vec![Rational::zero(); m];
        r[j] = -&Rational::one();
        rows.push(r);
        rhs.push(Rational::zero());
    }
    (Matrix::from_rows(rows), rhs)
}
