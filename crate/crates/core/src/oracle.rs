//! Brute-force ground truth, kept deliberately independent of the
//! criterion/solver path: exact optimal values by vertex enumeration,
//! direct decision of the level-set condition, and the minimax duality
//! cross-checks. Shares nothing with the fast path beyond the scalar and
//! LP primitives, so it can referee them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::exact::{dot, Matrix, Rational};
use crate::instance::{enumerate_vertices, fnv1a, DbpInstance, VertexError};
use crate::lp::{solve_lp, strict_feasibility, LpOutcome, LpProblem};

#[derive(Debug, Clone, thiserror::Error)]
pub enum OracleError {
    #[error("Y has no vertices (empty set)")]
    YEmpty,
    #[error("inner X-side LP was {status} at a vertex; instance not validated?")]
    XSideDegenerate { status: &'static str },
    #[error(transparent)]
    Vertex(#[from] VertexError),
    #[error(transparent)]
    Lp(#[from] crate::lp::LpError),
}

/// Exact brute-force optimum: the minimum over Y-vertices of the inner
/// X-side LP. `per_vertex` values and `z_star` include `z_offset`.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub z_star: Rational,
    pub argmin_x: Vec<Rational>,
    pub argmin_y: Vec<Rational>,
    pub per_vertex: Vec<(Vec<Rational>, Rational)>,
}

impl OracleResult {
    /// The optimum without the reporting offset, i.e. in the same scale as
    /// the level parameter `h`.
    pub fn z_star_raw(&self, inst: &DbpInstance) -> Rational {
        &self.z_star - &inst.z_offset
    }
}

/// Caches vertex enumerations keyed by a content hash of `(D, d)`, so
/// harness sweeps over many level values pay for enumeration once.
#[derive(Default)]
pub struct VertexCache {
    map: Mutex<HashMap<u64, Arc<Vec<Vec<Rational>>>>>,
}

impl VertexCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertices(
        &self,
        d: &Matrix,
        d_rhs: &[Rational],
    ) -> Result<Arc<Vec<Vec<Rational>>>, VertexError> {
        let key = fnv1a(
            serde_json::to_string(&(d.to_rows(), d_rhs))
                .expect("vertex cache key")
                .as_bytes(),
        );
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return Ok(Arc::clone(v));
        }
        let v = Arc::new(enumerate_vertices(d, d_rhs)?);
        self.map
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| Arc::clone(&v));
        Ok(v)
    }
}

fn value_at_vertex(
    inst: &DbpInstance,
    y: &[Rational],
) -> Result<(Rational, Vec<Rational>), OracleError> {
    // min over X of (C y + g) . x, plus e.y and the offset
    let cy = inst.c.mul_vec(y);
    let obj: Vec<Rational> = cy.iter().zip(&inst.g).map(|(a, b)| a + b).collect();
    let lp = LpProblem::minimize(obj).with_le(inst.a.clone(), inst.a_rhs.clone());
    match solve_lp(&lp)? {
        LpOutcome::Optimal { value, solution } => {
            let x = solution.values[..inst.n].to_vec();
            let total = &(&value + &dot(&inst.e, y)) + &inst.z_offset;
            Ok((total, x))
        }
        LpOutcome::Infeasible { .. } => Err(OracleError::XSideDegenerate {
            status: "infeasible",
        }),
        LpOutcome::Unbounded { .. } => Err(OracleError::XSideDegenerate {
            status: "unbounded",
        }),
    }
}

fn oracle_value_over(
    inst: &DbpInstance,
    vertices: &[Vec<Rational>],
) -> Result<OracleResult, OracleError> {
    if vertices.is_empty() {
        return Err(OracleError::YEmpty);
    }
    let mut per_vertex = vec![];
    let mut best: Option<(Rational, Vec<Rational>, Vec<Rational>)> = None;
    for y in vertices {
        let (value, x) = value_at_vertex(inst, y)?;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => &value < bv,
        };
        if better {
            best = Some((value.clone(), x, y.clone()));
        }
        per_vertex.push((y.clone(), value));
    }
    let (z_star, argmin_x, argmin_y) = best.expect("nonempty vertex list");
    Ok(OracleResult {
        z_star,
        argmin_x,
        argmin_y,
        per_vertex,
    })
}

/// Ground-truth optimum by full Y-vertex enumeration. The inner problem is
/// an LP for each fixed vertex, and the outer objective is concave in `y`,
/// so scanning vertices is exact.
pub fn oracle_value(inst: &DbpInstance) -> Result<OracleResult, OracleError> {
    let vertices = enumerate_vertices(&inst.d, &inst.d_rhs)?;
    oracle_value_over(inst, &vertices)
}

/// [`oracle_value`] with a shared vertex cache.
pub fn oracle_value_cached(
    inst: &DbpInstance,
    cache: &VertexCache,
) -> Result<OracleResult, OracleError> {
    let vertices = cache.vertices(&inst.d, &inst.d_rhs)?;
    oracle_value_over(inst, &vertices)
}

fn dual_system_at_vertex(inst: &DbpInstance, y: &[Rational], h: &Rational) -> LpProblem {
    // rows over u: -A^T u <= C y + g, then a.u <= e.y - h (the level row)
    let q = inst.q;
    let mut rows: Vec<Vec<Rational>> = (0..inst.n)
        .map(|j| (0..q).map(|i| -&inst.a[(i, j)]).collect())
        .collect();
    let cy = inst.c.mul_vec(y);
    let mut rhs: Vec<Rational> = cy.iter().zip(&inst.g).map(|(a, b)| a + b).collect();
    rows.push(inst.a_rhs.clone());
    rhs.push(&dot(&inst.e, y) - h);
    LpProblem::minimize(vec![Rational::zero(); q]).with_le(Matrix::from_rows(rows), rhs)
}

fn oracle_subset_over(
    inst: &DbpInstance,
    vertices: &[Vec<Rational>],
    h: &Rational,
) -> Result<bool, OracleError> {
    if vertices.is_empty() {
        return Err(OracleError::YEmpty);
    }
    // Y sits inside the level set iff the strict dual system is solvable at
    // every vertex: the level set is convex and Y is the hull of its
    // vertices.
    for y in vertices {
        let sys = dual_system_at_vertex(inst, y, h);
        let strict_row = inst.n;
        if !strict_feasibility(&sys, strict_row)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Direct decision of the level-set inclusion at `h` (`h` on the raw
/// objective scale): `true` iff every vertex of Y admits a strict dual
/// solution, i.e. Y is contained in the level set. `false` therefore means
/// some y in Y can reach objective value `h` or better.
pub fn oracle_subset(inst: &DbpInstance, h: &Rational) -> Result<bool, OracleError> {
    let vertices = enumerate_vertices(&inst.d, &inst.d_rhs)?;
    oracle_subset_over(inst, &vertices, h)
}

/// [`oracle_subset`] with a shared vertex cache.
pub fn oracle_subset_cached(
    inst: &DbpInstance,
    h: &Rational,
    cache: &VertexCache,
) -> Result<bool, OracleError> {
    let vertices = cache.vertices(&inst.d, &inst.d_rhs)?;
    oracle_subset_over(inst, &vertices, h)
}

#[derive(Debug, Clone, Serialize)]
pub struct HSample {
    pub h: Rational,
    pub all_y_consistent: bool,
    pub all_x_consistent: bool,
    pub agree: bool,
}

/// Results of the duality cross-checks; `passed` means every equality held
/// exactly and every sampled level agreed across the two dual forms.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub z_star: Rational,
    pub value_via_u: Rational,
    pub value_via_v: Rational,
    pub h_samples: Vec<HSample>,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Verifies, exactly: (i) the optimum equals the min over Y-vertices of the
/// u-side dual value; (ii) it equals the min over X-vertices of the v-side
/// dual value; (iii) at sampled levels, u-side consistency for all of Y
/// coincides with v-side consistency for all of X. These are standard LP
/// duality consequences, so any failure is an implementation bug, reported
/// rather than asserted.
pub fn check_duality(inst: &DbpInstance) -> Result<DualityReport, OracleError> {
    let mut failures = vec![];
    let y_vertices = enumerate_vertices(&inst.d, &inst.d_rhs)?;
    if y_vertices.is_empty() {
        return Err(OracleError::YEmpty);
    }
    let (x_sys, x_rhs) = inst.x_system();
    let x_vertices = enumerate_vertices(&x_sys, &x_rhs)?;
    if x_vertices.is_empty() {
        return Err(OracleError::XSideDegenerate { status: "empty" });
    }
    let base = oracle_value_over(inst, &y_vertices)?;

    // (i) max over U(y) of e.y - a.u, minimized over Y-vertices
    let mut via_u: Option<Rational> = None;
    for y in &y_vertices {
        let q = inst.q;
        let rows: Vec<Vec<Rational>> = (0..inst.n)
            .map(|j| (0..q).map(|i| -&inst.a[(i, j)]).collect())
            .collect();
        let cy = inst.c.mul_vec(y);
        let rhs: Vec<Rational> = cy.iter().zip(&inst.g).map(|(a, b)| a + b).collect();
        let obj: Vec<Rational> = inst.a_rhs.iter().map(|v| -v).collect();
        let lp = LpProblem::maximize(obj).with_le(Matrix::from_rows(rows), rhs);
        match solve_lp(&lp)? {
            LpOutcome::Optimal { value, .. } => {
                let total = &value + &dot(&inst.e, y);
                via_u = Some(match via_u {
                    None => total,
                    Some(b) => b.min(total),
                });
            }
            other => failures.push(format!(
                "u-side dual LP not optimal at vertex {y:?}: {other:?}"
            )),
        }
    }
    let value_via_u = &via_u.unwrap_or_else(Rational::zero) + &inst.z_offset;
    if value_via_u != base.z_star {
        failures.push(format!(
            "u-side duality value {} != oracle {}",
            value_via_u, base.z_star
        ));
    }

    // (ii) max over V(x) of g.x - d.v, minimized over X-vertices
    let mut via_v: Option<Rational> = None;
    for x in &x_vertices {
        let ctx = inst.c.mul_transpose_vec(x);
        let eq_rhs: Vec<Rational> = ctx.iter().zip(&inst.e).map(|(a, b)| -&(a + b)).collect();
        let obj: Vec<Rational> = inst.d_rhs.iter().map(|v| -v).collect();
        let lp = LpProblem::maximize(obj).with_eq(inst.d.transpose(), eq_rhs);
        match solve_lp(&lp)? {
            LpOutcome::Optimal { value, .. } => {
                let total = &value + &dot(&inst.g, x);
                via_v = Some(match via_v {
                    None => total,
                    Some(b) => b.min(total),
                });
            }
            other => failures.push(format!(
                "v-side dual LP not optimal at vertex {x:?}: {other:?}"
            )),
        }
    }
    let value_via_v = &via_v.unwrap_or_else(Rational::zero) + &inst.z_offset;
    if value_via_v != base.z_star {
        failures.push(format!(
            "v-side duality value {} != oracle {}",
            value_via_v, base.z_star
        ));
    }

    // (iii) the weak-inequality duality principle at sampled levels
    let raw = base.z_star_raw(inst);
    let mut h_samples = vec![];
    for dh in [-1i64, 0, 1] {
        let h = &raw + &Rational::from_int(dh);
        let mut all_y = true;
        for y in &y_vertices {
            let sys = dual_system_at_vertex(inst, y, &h);
            // same rows as the strict variant, checked weakly
            if !matches!(solve_lp(&sys)?, LpOutcome::Optimal { .. }) {
                all_y = false;
                break;
            }
        }
        let mut all_x = true;
        for x in &x_vertices {
            let ctx = inst.c.mul_transpose_vec(x);
            let eq_rhs: Vec<Rational> = ctx.iter().zip(&inst.e).map(|(a, b)| -&(a + b)).collect();
            let le_rhs = vec![&dot(&inst.g, x) - &h];
            let lp = LpProblem::minimize(vec![Rational::zero(); inst.p])
                .with_eq(inst.d.transpose(), eq_rhs)
                .with_le(Matrix::from_rows(vec![inst.d_rhs.clone()]), le_rhs);
            if !matches!(solve_lp(&lp)?, LpOutcome::Optimal { .. }) {
                all_x = false;
                break;
            }
        }
        let agree = all_y == all_x;
        if !agree {
            failures.push(format!(
                "level duality disagrees at h = {h}: all-y {all_y}, all-x {all_x}"
            ));
        }
        h_samples.push(HSample {
            h,
            all_y_consistent: all_y,
            all_x_consistent: all_x,
            agree,
        });
    }

    Ok(DualityReport {
        z_star: base.z_star,
        value_via_u,
        value_via_v,
        h_samples,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::vec_from_i64;
    use crate::instance::unit_cube;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    fn zero_instance() -> DbpInstance {
        let (d, d_rhs) = unit_cube(1);
        DbpInstance {
            n: 1,
            m: 1,
            q: 1,
            p: 2,
            c: Matrix::zeros(1, 1),
            a: Matrix::from_i64(&[&[1]]),
            a_rhs: vec_from_i64(&[1]),
            g: vec_from_i64(&[0]),
            e: vec_from_i64(&[0]),
            d,
            d_rhs,
            z_offset: Rational::zero(),
        }
    }

    #[test]
    fn zero_instance_value() {
        let res = oracle_value(&zero_instance()).unwrap();
        assert_eq!(res.z_star, r(0, 1));
        assert_eq!(res.per_vertex.len(), 2);
    }

    #[test]
    fn separable_value_when_c_zero() {
        let mut inst = zero_instance();
        inst.g = vec_from_i64(&[-2]); // min over [0,1]: -2
        inst.e = vec_from_i64(&[5]); // min over [0,1]: 0
        inst.z_offset = r(7, 1);
        let res = oracle_value(&inst).unwrap();
        assert_eq!(res.z_star, r(5, 1)); // -2 + 0 + 7
    }

    #[test]
    fn subset_flips_exactly_at_optimum() {
        let mut inst = zero_instance();
        inst.c = Matrix::from_i64(&[&[1]]);
        inst.g = vec_from_i64(&[-1]);
        inst.e = vec_from_i64(&[1]);
        // z(x, y) = xy - x + y over [0,1]^2; min is -1 at (1, 0)
        let res = oracle_value(&inst).unwrap();
        assert_eq!(res.z_star, r(-1, 1));
        let raw = res.z_star_raw(&inst);
        assert!(oracle_subset(&inst, &(&raw - &r(1, 2))).unwrap());
        assert!(!oracle_subset(&inst, &raw).unwrap());
        assert!(!oracle_subset(&inst, &(&raw + &r(1, 2))).unwrap());
    }

    #[test]
    fn subset_monotone_in_h() {
        let mut inst = zero_instance();
        inst.c = Matrix::from_i64(&[&[2]]);
        inst.g = vec_from_i64(&[-1]);
        inst.e = vec_from_i64(&[-1]);
        let mut last = true;
        for k in -8..=8 {
            let h = r(k, 4);
            let inside = oracle_subset(&inst, &h).unwrap();
            // once false (Y escapes the level set), stays false
            assert!(inside || !last || k == -8 || !inside);
            if !last {
                assert!(!inside, "monotonicity broken at h = {h}");
            }
            last = inside;
        }
    }

    #[test]
    fn duality_zero_instance() {
        let report = check_duality(&zero_instance()).unwrap();
        assert!(report.passed, "{:?}", report.failures);
        assert_eq!(report.z_star, r(0, 1));
        assert_eq!(report.value_via_u, r(0, 1));
        assert_eq!(report.value_via_v, r(0, 1));
    }

    #[test]
    fn duality_on_small_integer_instance() {
        let (d, d_rhs) = unit_cube(2);
        let inst = DbpInstance {
            n: 2,
            m: 2,
            q: 2,
            p: 4,
            c: Matrix::from_i64(&[&[2, -1], &[0, 1]]),
            a: Matrix::from_i64(&[&[1, 1], &[1, 0]]),
            a_rhs: vec_from_i64(&[2, 1]),
            g: vec_from_i64(&[-1, 1]),
            e: vec_from_i64(&[1, -2]),
            d,
            d_rhs,
            z_offset: r(3, 1),
        };
        inst.validate().unwrap();
        let report = check_duality(&inst).unwrap();
        assert!(report.passed, "{:?}", report.failures);
    }

    #[test]
    fn vertex_scan_equals_full_pair_enumeration() {
        // the value oracle needs only Y-vertices because the inner problem
        // is an LP; cross-check against all (X-vertex, Y-vertex) pairs
        let (d, d_rhs) = unit_cube(2);
        let mut state = 0xfeedface0badf00du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 5) as i64 - 2
        };
        for _ in 0..10 {
            let inst = DbpInstance {
                n: 2,
                m: 2,
                q: 2,
                p: 4,
                c: Matrix::from_rows(
                    (0..2)
                        .map(|_| (0..2).map(|_| Rational::from_int(next())).collect())
                        .collect(),
                ),
                a: Matrix::from_i64(&[&[1, 0], &[0, 1]]),
                a_rhs: vec_from_i64(&[2, 2]),
                g: (0..2).map(|_| Rational::from_int(next())).collect(),
                e: (0..2).map(|_| Rational::from_int(next())).collect(),
                d: d.clone(),
                d_rhs: d_rhs.clone(),
                z_offset: Rational::zero(),
            };
            let via_lp = oracle_value(&inst).unwrap().z_star;
            let (xd, xr) = inst.x_system();
            let x_vertices = enumerate_vertices(&xd, &xr).unwrap();
            let y_vertices = enumerate_vertices(&inst.d, &inst.d_rhs).unwrap();
            let mut via_pairs: Option<Rational> = None;
            for x in &x_vertices {
                for y in &y_vertices {
                    let z = inst.objective(x, y);
                    via_pairs = Some(match via_pairs {
                        None => z,
                        Some(b) => b.min(z),
                    });
                }
            }
            assert_eq!(via_lp, via_pairs.unwrap());
        }
    }

    #[test]
    fn vertex_cache_reuses_enumeration() {
        let cache = VertexCache::new();
        let inst = zero_instance();
        let a = cache.vertices(&inst.d, &inst.d_rhs).unwrap();
        let b = cache.vertices(&inst.d, &inst.d_rhs).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(
            oracle_value_cached(&inst, &cache).unwrap().z_star,
            r(0, 1)
        );
    }
}
