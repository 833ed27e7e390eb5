//! Rewrites of other problem classes as bilinear instances over a perfect
//! polytope: boolean feasibility, boolean optimization (directly with a
//! big-M objective, or as a bisection family of feasibility probes), and
//! piecewise-linear concave minimization.

use num_bigint::{BigInt, BigUint};
use num_traits::{Euclid, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{ceil_log2_plus1, Matrix, Rational};
use crate::instance::{unit_cube, DbpInstance};

#[derive(Debug, Clone, thiserror::Error)]
pub enum ReductionError {
    #[error("boolean data must be integer ({0})")]
    NonInteger(&'static str),
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("piece group {group} has {count} pieces; at least 2 required")]
    GroupTooSmall { group: usize, count: usize },
}

/// An integer inequality system `A x <= a` asked for a 0/1 solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BooleanSystem {
    pub n: usize,
    pub a: Matrix,
    pub rhs: Vec<Rational>,
}

impl BooleanSystem {
    pub fn new(n: usize, a: Matrix, rhs: Vec<Rational>) -> Result<Self, ReductionError> {
        if a.cols() != n || a.rows() != rhs.len() {
            return Err(ReductionError::Dim(format!(
                "A is {}x{}, a has {} entries, n = {n}",
                a.rows(),
                a.cols(),
                rhs.len()
            )));
        }
        let all_int = (0..a.rows()).all(|i| a.row(i).iter().all(|v| v.is_integer()))
            && rhs.iter().all(|v| v.is_integer());
        if !all_int {
            return Err(ReductionError::NonInteger("A or a"));
        }
        Ok(BooleanSystem { n, a, rhs })
    }

    pub fn q(&self) -> usize {
        self.a.rows()
    }

    /// Appends one inequality row, used for budget rows in the bisection
    /// family.
    fn with_row(&self, row: Vec<Rational>, rhs: Rational) -> BooleanSystem {
        let mut rows = self.a.to_rows();
        rows.insert(0, row);
        let mut new_rhs = vec![rhs];
        new_rhs.extend(self.rhs.iter().cloned());
        BooleanSystem {
            n: self.n,
            a: Matrix::from_rows(rows),
            rhs: new_rhs,
        }
    }
}

/// X-side constraint block shared by the boolean reductions: the system's
/// own rows followed by `x_j <= 1` rows (nonnegativity is implicit in the
/// instance form).
fn boolean_x_side(bs: &BooleanSystem) -> (Matrix, Vec<Rational>) {
    let a = bs.a.vstack(&Matrix::identity(bs.n));
    let mut rhs = bs.rhs.clone();
    rhs.extend(vec![Rational::one(); bs.n]);
    (a, rhs)
}

/// Boolean feasibility as a bilinear instance: the objective
/// `sum_j (x_j y_j + (1 - x_j)(1 - y_j))` expands to `C = 2I`, `g = e = -1`
/// and offset `n` over the unit cube for `y`. Its optimum is 0 exactly when
/// the system has a boolean solution, attained with `y_j = 1 - x_j`.
pub fn reduce_boolean_feasibility(bs: &BooleanSystem) -> DbpInstance {
    let n = bs.n;
    let (a, a_rhs) = boolean_x_side(bs);
    let (d, d_rhs) = unit_cube(n);
    let mut c = Matrix::zeros(n, n);
    for j in 0..n {
        c[(j, j)] = Rational::from_int(2);
    }
    DbpInstance {
        n,
        m: n,
        q: bs.q() + n,
        p: 2 * n,
        c,
        a,
        a_rhs,
        g: vec![-&Rational::one(); n],
        e: vec![-&Rational::one(); n],
        d,
        d_rhs,
        z_offset: Rational::from_int(n as i64),
    }
}

/// The binary encoding length of the boolean problem data `(A, a, c)`,
/// mirroring the instance-side length formula: bit lengths of all
/// coefficients plus `log(n(q+1))`.
fn boolean_encoding_length(c: &[Rational], bs: &BooleanSystem) -> u64 {
    let mut total = 0u64;
    for i in 0..bs.q() {
        for v in bs.a.row(i) {
            total += ceil_log2_plus1(v.numer().magnitude());
        }
    }
    for v in bs.rhs.iter().chain(c.iter()) {
        total += ceil_log2_plus1(v.numer().magnitude());
    }
    total + ceil_log2_plus1(&BigUint::from(bs.n * (bs.q() + 1)))
}

/// Boolean linear optimization folded into a single instance with a big-M
/// penalty on the booleanness gadget: `C = 2M I`, `g_i = c_i - M`,
/// `e_j = -M`, offset `n M`. `M` is the smallest power of two at or above
/// `n * 2^(3L+1)` for the boolean encoding length `L`; any value above that
/// bound preserves the equivalence besides keeping encodings short.
pub fn reduce_boolean_lp_bigm(
    c: &[Rational],
    bs: &BooleanSystem,
) -> Result<DbpInstance, ReductionError> {
    if c.len() != bs.n {
        return Err(ReductionError::Dim(format!(
            "c has {} entries, n = {}",
            c.len(),
            bs.n
        )));
    }
    if c.iter().any(|v| !v.is_integer()) {
        return Err(ReductionError::NonInteger("c"));
    }
    let n = bs.n;
    let l = boolean_encoding_length(c, bs);
    // smallest power of two >= n * 2^(3L+1)
    let ceil_log2_n = ceil_log2_plus1(&(BigUint::from(n) - BigUint::one()));
    let m_big = Rational::pow2((3 * l + 1 + ceil_log2_n) as i64);
    let (a, a_rhs) = boolean_x_side(bs);
    let (d, d_rhs) = unit_cube(n);
    let mut cm = Matrix::zeros(n, n);
    let two_m = &Rational::from_int(2) * &m_big;
    for j in 0..n {
        cm[(j, j)] = two_m.clone();
    }
    Ok(DbpInstance {
        n,
        m: n,
        q: bs.q() + n,
        p: 2 * n,
        c: cm,
        a,
        a_rhs,
        g: c.iter().map(|ci| ci - &m_big).collect(),
        e: vec![-&m_big; n],
        d,
        d_rhs,
        z_offset: &Rational::from_int(n as i64) * &m_big,
    })
}

/// The bisection route for boolean optimization: a family of feasibility
/// instances over integer budgets `t` in `[-nH, nH]`, `H = max |c_i|`,
/// each obtained by prefixing the budget row `c.x <= t` to the system.
#[derive(Debug, Clone)]
pub struct BisectionPlan {
    pub c: Vec<Rational>,
    pub base: BooleanSystem,
    pub t_lo: BigInt,
    pub t_hi: BigInt,
}

pub fn plan_boolean_bisection(
    c: &[Rational],
    bs: &BooleanSystem,
) -> Result<BisectionPlan, ReductionError> {
    if c.len() != bs.n {
        return Err(ReductionError::Dim(format!(
            "c has {} entries, n = {}",
            c.len(),
            bs.n
        )));
    }
    if c.iter().any(|v| !v.is_integer()) {
        return Err(ReductionError::NonInteger("c"));
    }
    let h = c
        .iter()
        .map(|v| v.numer().abs())
        .max()
        .unwrap_or_else(BigInt::zero);
    let nh = BigInt::from(bs.n as i64) * h;
    Ok(BisectionPlan {
        c: c.to_vec(),
        base: bs.clone(),
        t_lo: -&nh,
        t_hi: nh,
    })
}

impl BisectionPlan {
    /// The feasibility instance probing budget `t`.
    pub fn instance_for(&self, t: &BigInt) -> DbpInstance {
        let extended = self
            .base
            .with_row(self.c.clone(), Rational::from_bigint(t.clone()));
        reduce_boolean_feasibility(&extended)
    }

    /// The integer roundoff rule of the schedule: `floor((lo + hi) / 2)`.
    pub fn midpoint(lo: &BigInt, hi: &BigInt) -> BigInt {
        (lo + hi).div_euclid(&BigInt::from(2))
    }

    /// Upper bound on the number of probes the schedule can take.
    pub fn max_probes(&self) -> u64 {
        let width = (&self.t_hi - &self.t_lo).magnitude().clone();
        ceil_log2_plus1(&width) + 1
    }

    /// Runs the schedule against a feasibility decision for the probe
    /// instances, returning the minimal feasible budget (the boolean
    /// optimum) or `None` when even the loosest budget is infeasible.
    /// `feasible` must be monotone in `t`, which the budget row guarantees.
    pub fn run(&self, mut feasible: impl FnMut(&DbpInstance) -> bool) -> Option<BigInt> {
        if !feasible(&self.instance_for(&self.t_hi)) {
            return None;
        }
        let mut lo = self.t_lo.clone();
        let mut hi = self.t_hi.clone();
        while lo < hi {
            let mid = Self::midpoint(&lo, &hi);
            if feasible(&self.instance_for(&mid)) {
                hi = mid;
            } else {
                lo = mid + BigInt::one();
            }
        }
        Some(lo)
    }
}

/// One affine piece `c.x + c0` of a concave group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Piece {
    pub c: Vec<Rational>,
    pub c0: Rational,
}

/// Minimize `sum_j min_k (c^{jk}.x + c0^{jk})` over `X`; every group needs
/// at least two pieces (a one-piece group is affine and belongs in `g`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlcpProblem {
    pub n: usize,
    pub a: Matrix,
    pub a_rhs: Vec<Rational>,
    pub pieces: Vec<Vec<Piece>>,
}

impl PlcpProblem {
    pub fn check(&self) -> Result<(), ReductionError> {
        if self.a.cols() != self.n || self.a.rows() != self.a_rhs.len() {
            return Err(ReductionError::Dim(format!(
                "A is {}x{}, a has {} entries, n = {}",
                self.a.rows(),
                self.a.cols(),
                self.a_rhs.len(),
                self.n
            )));
        }
        for (j, group) in self.pieces.iter().enumerate() {
            if group.len() < 2 {
                return Err(ReductionError::GroupTooSmall {
                    group: j,
                    count: group.len(),
                });
            }
            for piece in group {
                if piece.c.len() != self.n {
                    return Err(ReductionError::Dim(format!(
                        "piece in group {j} has {} coefficients, n = {}",
                        piece.c.len(),
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// The piecewise objective evaluated directly, for cross-checks.
    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        let mut total = Rational::zero();
        for group in &self.pieces {
            let vals = group
                .iter()
                .map(|p| &crate::exact::dot(&p.c, x) + &p.c0);
            total += &vals.min().expect("nonempty group");
        }
        total
    }
}

/// Piecewise-linear concave minimization as a bilinear instance: the last
/// piece of each group is eliminated, leaving `m = sum(m_j) - l` selector
/// variables over a step-diagonal polytope with `p = l + m` rows.
pub fn reduce_plcp(pp: &PlcpProblem) -> Result<DbpInstance, ReductionError> {
    pp.check()?;
    let n = pp.n;
    let l = pp.pieces.len();
    let m: usize = pp.pieces.iter().map(|g| g.len() - 1).sum();
    let p = l + m;

    let mut c = Matrix::zeros(n, m);
    let mut e = vec![];
    let mut g = vec![Rational::zero(); n];
    let mut z_offset = Rational::zero();
    let mut col = 0;
    let mut group_cols: Vec<Vec<usize>> = vec![];
    for group in &pp.pieces {
        let last = group.last().expect("nonempty group");
        for i in 0..n {
            g[i] += &last.c[i];
        }
        z_offset += &last.c0;
        let mut cols = vec![];
        for piece in &group[..group.len() - 1] {
            for i in 0..n {
                c[(i, col)] = &piece.c[i] - &last.c[i];
            }
            e.push(&piece.c0 - &last.c0);
            cols.push(col);
            col += 1;
        }
        group_cols.push(cols);
    }

    // step-diagonal rows: sum of each group's selectors <= 1, then y >= 0
    let mut d = Matrix::zeros(p, m);
    let mut d_rhs = vec![];
    for (j, cols) in group_cols.iter().enumerate() {
        for &k in cols {
            d[(j, k)] = Rational::one();
        }
        d_rhs.push(Rational::one());
    }
    for k in 0..m {
        d[(l + k, k)] = -&Rational::one();
        d_rhs.push(Rational::zero());
    }

    Ok(DbpInstance {
        n,
        m,
        q: pp.a.rows(),
        p,
        c,
        a: pp.a.clone(),
        a_rhs: pp.a_rhs.clone(),
        g,
        e,
        d,
        d_rhs,
        z_offset,
    })
}

/// A parsed reduction input file. The text format mirrors the instance
/// format and adds a top-level `kind` tag: `"boolean"` carries `n, A, a`;
/// `"boolean-lp"` adds the objective `c`; `"plcp"` carries `n, A, a` and
/// the nested `pieces` array.
#[derive(Debug, Clone)]
pub enum ReductionInput {
    Boolean(BooleanSystem),
    BooleanLp {
        c: Vec<Rational>,
        system: BooleanSystem,
    },
    Plcp(PlcpProblem),
}

impl ReductionInput {
    pub fn kind(&self) -> &'static str {
        match self {
            ReductionInput::Boolean(_) => "boolean",
            ReductionInput::BooleanLp { .. } => "boolean-lp",
            ReductionInput::Plcp(_) => "plcp",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("missing or unknown \"kind\"; expected boolean, boolean-lp or plcp")]
    BadKind,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BooleanFile {
    #[allow(dead_code)]
    kind: String,
    n: usize,
    #[serde(rename = "A", default)]
    a: Vec<Vec<Rational>>,
    #[serde(rename = "a", default)]
    a_rhs: Vec<Rational>,
}

impl BooleanFile {
    fn into_system(self) -> Result<BooleanSystem, ReductionError> {
        let a = if self.a.is_empty() {
            Matrix::zeros(0, self.n)
        } else {
            Matrix::from_rows(self.a)
        };
        BooleanSystem::new(self.n, a, self.a_rhs)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BooleanLpFile {
    #[allow(dead_code)]
    kind: String,
    n: usize,
    c: Vec<Rational>,
    #[serde(rename = "A", default)]
    a: Vec<Vec<Rational>>,
    #[serde(rename = "a", default)]
    a_rhs: Vec<Rational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlcpFile {
    #[allow(dead_code)]
    kind: String,
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Rational>>,
    #[serde(rename = "a")]
    a_rhs: Vec<Rational>,
    pieces: Vec<Vec<Piece>>,
}

/// Parses a kind-tagged reduction input. Syntax errors carry the usual
/// line/column positions; unknown keys are rejected.
pub fn parse_reduction_input(s: &str) -> Result<ReductionInput, InputError> {
    let value: serde_json::Value = serde_json::from_str(s)?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or(InputError::BadKind)?
        .to_string();
    match kind.as_str() {
        "boolean" => {
            let f: BooleanFile = serde_json::from_value(value)?;
            Ok(ReductionInput::Boolean(f.into_system()?))
        }
        "boolean-lp" => {
            let f: BooleanLpFile = serde_json::from_value(value)?;
            let system = BooleanFile {
                kind,
                n: f.n,
                a: f.a,
                a_rhs: f.a_rhs,
            }
            .into_system()?;
            Ok(ReductionInput::BooleanLp { c: f.c, system })
        }
        "plcp" => {
            let f: PlcpFile = serde_json::from_value(value)?;
            let pp = PlcpProblem {
                n: f.n,
                a: Matrix::from_rows(f.a),
                a_rhs: f.a_rhs,
                pieces: f.pieces,
            };
            pp.check()?;
            Ok(ReductionInput::Plcp(pp))
        }
        _ => Err(InputError::BadKind),
    }
}

/// The bit vector when every coordinate is exactly 0 or 1, `None`
/// otherwise. Comparison is exact; nothing is rounded.
pub fn extract_boolean(x: &[Rational]) -> Option<Vec<bool>> {
    let one = Rational::one();
    x.iter()
        .map(|v| {
            if v.is_zero() {
                Some(false)
            } else if v == &one {
                Some(true)
            } else {
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::vec_from_i64;
    use crate::instance::check_perfect;
    use crate::oracle::oracle_value;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn bs(n: usize, rows: &[&[i64]], rhs: &[i64]) -> BooleanSystem {
        let a = if rows.is_empty() {
            Matrix::zeros(0, n)
        } else {
            Matrix::from_i64(rows)
        };
        BooleanSystem::new(n, a, vec_from_i64(rhs)).unwrap()
    }

    #[test]
    fn boolean_feasible_system_reduces_to_value_zero() {
        // {2x <= 1} has the boolean solution x = 0
        let inst = reduce_boolean_feasibility(&bs(1, &[&[2]], &[1]));
        inst.validate().unwrap();
        assert!(check_perfect(&inst.d, &inst.d_rhs).unwrap().is_perfect);
        assert_eq!(oracle_value(&inst).unwrap().z_star, r(0, 1));
    }

    #[test]
    fn boolean_infeasible_system_reduces_to_positive_value() {
        // 1/4 <= x <= 3/4 contains no boolean point
        let inst = reduce_boolean_feasibility(&bs(1, &[&[-4], &[4]], &[-1, 3]));
        inst.validate().unwrap();
        assert!(oracle_value(&inst).unwrap().z_star.is_positive());
    }

    #[test]
    fn boolean_empty_system_value_zero() {
        let inst = reduce_boolean_feasibility(&bs(2, &[], &[]));
        inst.validate().unwrap();
        let res = oracle_value(&inst).unwrap();
        assert_eq!(res.z_star, r(0, 1));
    }

    #[test]
    fn boolean_objective_vanishes_on_complementary_bits() {
        let inst = reduce_boolean_feasibility(&bs(3, &[&[1, -2, 1]], &[1]));
        for bits in 0..8u32 {
            let x: Vec<Rational> = (0..3)
                .map(|j| Rational::from_int(((bits >> j) & 1) as i64))
                .collect();
            let y: Vec<Rational> = x.iter().map(|v| &Rational::one() - v).collect();
            assert_eq!(inst.objective(&x, &y), r(0, 1));
        }
    }

    #[test]
    fn bigm_reduction_recovers_boolean_optimum() {
        // min x s.t. 2x <= 1, x in {0,1}: optimum 0 at x = 0
        let inst = reduce_boolean_lp_bigm(&vec_from_i64(&[1]), &bs(1, &[&[2]], &[1])).unwrap();
        inst.validate().unwrap();
        assert_eq!(oracle_value(&inst).unwrap().z_star, r(0, 1));

        // min -x, unconstrained: optimum -1 at x = 1
        let inst = reduce_boolean_lp_bigm(&vec_from_i64(&[-1]), &bs(1, &[], &[])).unwrap();
        assert_eq!(oracle_value(&inst).unwrap().z_star, r(-1, 1));
    }

    #[test]
    fn bigm_reduction_flags_boolean_infeasibility() {
        // no boolean point; the gadget penalty dwarfs n*H = 1
        let inst =
            reduce_boolean_lp_bigm(&vec_from_i64(&[1]), &bs(1, &[&[-4], &[4]], &[-1, 3])).unwrap();
        let z = oracle_value(&inst).unwrap().z_star;
        assert!(z > r(1, 1));
    }

    #[test]
    fn bisection_plan_ranges() {
        let plan = plan_boolean_bisection(&vec_from_i64(&[1]), &bs(1, &[], &[])).unwrap();
        assert_eq!(plan.t_lo, BigInt::from(-1));
        assert_eq!(plan.t_hi, BigInt::from(1));

        let plan = plan_boolean_bisection(&vec_from_i64(&[0]), &bs(1, &[], &[])).unwrap();
        assert_eq!(plan.t_lo, BigInt::from(0));
        assert_eq!(plan.t_hi, BigInt::from(0));

        let plan = plan_boolean_bisection(&vec_from_i64(&[3, -2]), &bs(2, &[], &[])).unwrap();
        assert_eq!(plan.t_lo, BigInt::from(-6));
        assert_eq!(plan.t_hi, BigInt::from(6));
    }

    #[test]
    fn bisection_plan_finds_boolean_minimum() {
        // min 3 x1 - 2 x2 s.t. x1 + x2 >= 1 over {0,1}^2: optimum -2 at (0,1)
        let system = bs(2, &[&[-1, -1]], &[-1]);
        let plan = plan_boolean_bisection(&vec_from_i64(&[3, -2]), &system).unwrap();
        let probes_cap = plan.max_probes();
        let mut probes = 0;
        // a tight budget can empty X entirely; that probe is infeasible
        let probe = |inst: &DbpInstance| {
            inst.validate().is_ok() && oracle_value(inst).unwrap().z_star.is_zero()
        };
        let best = plan.run(|inst| {
            probes += 1;
            probe(inst)
        });
        assert_eq!(best, Some(BigInt::from(-2)));
        assert!(probes <= probes_cap);

        // infeasible base system: no budget works
        let system = bs(1, &[&[-4], &[4]], &[-1, 3]);
        let plan = plan_boolean_bisection(&vec_from_i64(&[1]), &system).unwrap();
        assert_eq!(plan.run(probe), None);
    }

    fn two_piece_plcp() -> PlcpProblem {
        // min min(x, 1 - x) over [0, 1]
        PlcpProblem {
            n: 1,
            a: Matrix::from_i64(&[&[1]]),
            a_rhs: vec_from_i64(&[1]),
            pieces: vec![vec![
                Piece {
                    c: vec_from_i64(&[1]),
                    c0: r(0, 1),
                },
                Piece {
                    c: vec_from_i64(&[-1]),
                    c0: r(1, 1),
                },
            ]],
        }
    }

    #[test]
    fn plcp_hand_reduction() {
        let inst = reduce_plcp(&two_piece_plcp()).unwrap();
        // objective becomes 2xy - x - y + 1
        assert_eq!(inst.m, 1);
        assert_eq!(inst.p, 2);
        assert_eq!(inst.c[(0, 0)], r(2, 1));
        assert_eq!(inst.g, vec![r(-1, 1)]);
        assert_eq!(inst.e, vec![r(-1, 1)]);
        assert_eq!(inst.z_offset, r(1, 1));
        inst.validate().unwrap();
        assert_eq!(oracle_value(&inst).unwrap().z_star, r(0, 1));
    }

    #[test]
    fn plcp_identical_pieces_collapse_to_affine() {
        // both pieces equal: C = 0, value = min of the affine part over X
        let mut pp = two_piece_plcp();
        pp.pieces[0][0] = pp.pieces[0][1].clone();
        let inst = reduce_plcp(&pp).unwrap();
        assert!(inst.c[(0, 0)].is_zero());
        // min over [0,1] of 1 - x = 0
        assert_eq!(oracle_value(&inst).unwrap().z_star, r(0, 1));
    }

    #[test]
    fn plcp_two_groups_step_diagonal_is_perfect() {
        let pp = PlcpProblem {
            n: 2,
            a: Matrix::from_i64(&[&[1, 0], &[0, 1]]),
            a_rhs: vec_from_i64(&[2, 2]),
            pieces: vec![
                vec![
                    Piece {
                        c: vec_from_i64(&[1, 0]),
                        c0: r(0, 1),
                    },
                    Piece {
                        c: vec_from_i64(&[0, 1]),
                        c0: r(1, 1),
                    },
                ],
                vec![
                    Piece {
                        c: vec_from_i64(&[-1, 2]),
                        c0: r(2, 1),
                    },
                    Piece {
                        c: vec_from_i64(&[1, 1]),
                        c0: r(0, 1),
                    },
                ],
            ],
        };
        let inst = reduce_plcp(&pp).unwrap();
        assert_eq!(inst.m, 2);
        assert_eq!(inst.p, 4);
        assert_eq!(inst.d.to_rows(), Matrix::from_i64(&[&[1, 0], &[0, 1], &[-1, 0], &[0, -1]]).to_rows());
        assert!(check_perfect(&inst.d, &inst.d_rhs).unwrap().is_perfect);
        inst.validate().unwrap();
    }

    #[test]
    fn plcp_minimum_matches_direct_evaluation_at_x_vertices() {
        let pp = two_piece_plcp();
        let inst = reduce_plcp(&pp).unwrap();
        let (xs, xr) = inst.x_system();
        let verts = crate::instance::enumerate_vertices(&xs, &xr).unwrap();
        let direct = verts
            .iter()
            .map(|v| pp.objective_at(v))
            .min()
            .unwrap();
        assert_eq!(oracle_value(&inst).unwrap().z_star, direct);
    }

    #[test]
    fn plcp_rejects_singleton_group() {
        let mut pp = two_piece_plcp();
        pp.pieces[0].truncate(1);
        assert!(matches!(
            reduce_plcp(&pp),
            Err(ReductionError::GroupTooSmall { group: 0, count: 1 })
        ));
    }

    #[test]
    fn extract_boolean_cases() {
        assert_eq!(
            extract_boolean(&vec_from_i64(&[0, 1, 0])),
            Some(vec![false, true, false])
        );
        assert_eq!(extract_boolean(&[r(1, 2)]), None);
        assert_eq!(extract_boolean(&[]), Some(vec![]));
    }
}
