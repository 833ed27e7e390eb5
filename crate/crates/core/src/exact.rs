//! Exact rational scalars, dense rational linear algebra and
//! continued-fraction rational recovery.
//!
//! Every number in this crate is a [`Rational`]: an always-reduced fraction
//! of arbitrary-precision integers with a positive denominator. There is no
//! floating point anywhere on a computation path.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An exact rational number. Numerator and denominator are coprime and the
/// denominator is always positive; the sign lives on the numerator.
///
/// Values that fit a machine-word fraction are stored inline and promoted
/// to arbitrary precision only on overflow; demotion back to the inline
/// form is canonical, so structural equality and hashing agree with
/// numeric equality. Serializes as the text `"p/q"`, or `"p"` when the
/// denominator is 1; deserialization also accepts plain JSON integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Rational {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Canonical constructor from a reduced i128 fraction with positive
/// denominator.
fn from_reduced_i128(num: i128, den: i128) -> Rational {
    debug_assert!(den > 0);
    let lo = -(i64::MAX as i128);
    let hi = i64::MAX as i128;
    if num >= lo && num <= hi && den <= hi {
        Rational::Small(num as i64, den as i64)
    } else {
        Rational::Big(Box::new(BigRational::new(
            BigInt::from(num),
            BigInt::from(den),
        )))
    }
}

fn reduce_i128(mut num: i128, mut den: i128) -> Rational {
    debug_assert!(den != 0);
    if den < 0 {
        num = -num;
        den = -den;
    }
    if num == 0 {
        return Rational::Small(0, 1);
    }
    let g = gcd_i128(num, den);
    from_reduced_i128(num / g, den / g)
}

/// Canonicalizes a big rational, demoting to the inline form if it fits.
fn normalize_big(r: BigRational) -> Rational {
    if let (Some(num), Some(den)) = (r.numer().to_i64(), r.denom().to_i64()) {
        if num != i64::MIN {
            return Rational::Small(num, den);
        }
    }
    Rational::Big(Box::new(r))
}

impl Rational {
    pub fn zero() -> Self {
        Rational::Small(0, 1)
    }

    pub fn one() -> Self {
        Rational::Small(1, 1)
    }

    /// Builds `num/den`, reducing and normalizing the sign.
    ///
    /// Panics if `den` is zero.
    pub fn new(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational with zero denominator");
        normalize_big(BigRational::new(num, den))
    }

    pub fn from_int(v: i64) -> Self {
        if v == i64::MIN {
            Rational::Big(Box::new(BigRational::from_integer(BigInt::from(v))))
        } else {
            Rational::Small(v, 1)
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        normalize_big(BigRational::from_integer(v))
    }

    /// `num/den` from machine integers.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        reduce_i128(num as i128, den as i128)
    }

    /// `2^exp`, with `exp` possibly negative.
    pub fn pow2(exp: i64) -> Self {
        if (-62..=62).contains(&exp) {
            if exp >= 0 {
                Rational::Small(1i64 << exp, 1)
            } else {
                Rational::Small(1, 1i64 << (-exp))
            }
        } else {
            let one = BigInt::one();
            let big = if exp >= 0 {
                BigRational::new(one << (exp as usize), BigInt::one())
            } else {
                BigRational::new(one.clone(), one << ((-exp) as usize))
            };
            Rational::Big(Box::new(big))
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rational::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rational::Big(r) => (**r).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rational::Small(n, _) => BigInt::from(*n),
            Rational::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rational::Small(_, d) => BigInt::from(*d),
            Rational::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rational::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Rational::Small(n, _) => *n > 0,
            Rational::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rational::Small(n, _) => *n < 0,
            Rational::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rational::Small(_, d) => *d == 1,
            Rational::Big(r) => r.is_integer(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Rational::Small(n, d) => Rational::Small(n.abs(), *d),
            Rational::Big(r) => normalize_big(r.abs()),
        }
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        match self {
            Rational::Small(n, d) => BigInt::from(n.div_euclid(*d)),
            Rational::Big(r) => r.floor().to_integer(),
        }
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        match self {
            Rational::Small(n, d) => BigInt::from(-(-n).div_euclid(*d)),
            Rational::Big(r) => r.ceil().to_integer(),
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        match self {
            Rational::Small(n, d) => {
                if *n > 0 {
                    Rational::Small(*d, *n)
                } else {
                    from_reduced_i128(-(*d as i128), -(*n as i128))
                }
            }
            Rational::Big(r) => normalize_big(r.recip()),
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Rational::Small(a, b), Rational::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            (Rational::Small(a, b), Rational::Big(r)) => {
                (BigInt::from(*a) * r.denom()).cmp(&(r.numer() * BigInt::from(*b)))
            }
            (Rational::Big(r), Rational::Small(c, d)) => {
                (r.numer() * BigInt::from(*d)).cmp(&(BigInt::from(*c) * r.denom()))
            }
            (Rational::Big(a), Rational::Big(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::Small(n, 1) => write!(f, "{n}"),
            Rational::Small(n, d) => write!(f, "{n}/{d}"),
            Rational::Big(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Error from parsing the `"p/q"` text form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRationalError(s.to_string());
        let parse_int = |t: &str| BigInt::from_str(t.trim()).map_err(|_| bad());
        match s.split_once('/') {
            None => Ok(Rational::from_bigint(parse_int(s)?)),
            Some((num, den)) => {
                let den = parse_int(den)?;
                if den.sign() != Sign::Plus {
                    return Err(bad());
                }
                Ok(Rational::new(parse_int(num)?, den))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;

        impl Visitor<'_> for RationalVisitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a string \"p/q\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from_bigint(BigInt::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
                Err(E::custom(format!(
                    "float literal {v} not allowed; use an integer or \"p/q\""
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(|e| E::custom(format!("{e}")))
            }
        }

        deserializer.deserialize_any(RationalVisitor)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

fn add_values(a: &Rational, b: &Rational) -> Rational {
    match (a, b) {
        (Rational::Small(an, ad), Rational::Small(bn, bd)) => {
            // i128 cannot overflow on products of i64 inputs
            let num = *an as i128 * *bd as i128 + *bn as i128 * *ad as i128;
            reduce_i128(num, *ad as i128 * *bd as i128)
        }
        _ => normalize_big(a.to_big() + b.to_big()),
    }
}

fn sub_values(a: &Rational, b: &Rational) -> Rational {
    match (a, b) {
        (Rational::Small(an, ad), Rational::Small(bn, bd)) => {
            let num = *an as i128 * *bd as i128 - *bn as i128 * *ad as i128;
            reduce_i128(num, *ad as i128 * *bd as i128)
        }
        _ => normalize_big(a.to_big() - b.to_big()),
    }
}

fn mul_values(a: &Rational, b: &Rational) -> Rational {
    match (a, b) {
        (Rational::Small(an, ad), Rational::Small(bn, bd)) => {
            reduce_i128(*an as i128 * *bn as i128, *ad as i128 * *bd as i128)
        }
        _ => normalize_big(a.to_big() * b.to_big()),
    }
}

fn div_values(a: &Rational, b: &Rational) -> Rational {
    assert!(!b.is_zero(), "division by zero");
    match (a, b) {
        (Rational::Small(an, ad), Rational::Small(bn, bd)) => {
            reduce_i128(*an as i128 * *bd as i128, *ad as i128 * *bn as i128)
        }
        _ => normalize_big(a.to_big() / b.to_big()),
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $func:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $func(&self, &rhs)
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $func(self, rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $func(&self, rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $func(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_values);
binop!(Sub, sub, sub_values);
binop!(Mul, mul, mul_values);
binop!(Div, div, div_values);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self {
            Rational::Small(n, d) => Rational::Small(-n, *d),
            Rational::Big(r) => normalize_big(-(**r).clone()),
        }
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_values(self, rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_values(self, rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_values(self, rhs);
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        let mut acc = Rational::zero();
        for v in iter {
            acc += &v;
        }
        acc
    }
}

/// Dense row-major rational matrix. Dimensions are fixed at construction;
/// zero-row matrices are allowed so empty constraint blocks stay uniform.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Rational>>", into = "Vec<Vec<Rational>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            assert_eq!(r.len(), ncols, "ragged matrix rows");
        }
        Matrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Convenience constructor from machine integers, mostly for tests.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Stacks `self` on top of `other`; column counts must agree.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// `self * v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `self^T * v`, i.e. `v` combined over the rows.
    pub fn mul_transpose_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.rows, v.len(), "matrix-vector dimension mismatch");
        let mut out = vec![Rational::zero(); self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += &(&row[j] * &v[i]);
            }
        }
        out
    }

    /// Row rank, by fraction-exact Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, p);
            let inv = m[(rank, col)].recip();
            for j in col..m.cols {
                let v = &m[(rank, j)] * &inv;
                m[(rank, j)] = v;
            }
            for i in 0..m.rows {
                if i != rank && !m[(i, col)].is_zero() {
                    let f = m[(i, col)].clone();
                    for j in col..m.cols {
                        let v = &m[(i, j)] - &(&f * &m[(rank, j)]);
                        m[(i, j)] = v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl TryFrom<Vec<Vec<Rational>>> for Matrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<Rational>>) -> Result<Self, String> {
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".to_string());
        }
        Ok(Matrix::from_rows(rows))
    }
}

impl From<Matrix> for Vec<Vec<Rational>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Exact dot product.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    assert_eq!(a.len(), b.len(), "dot product dimension mismatch");
    let mut acc = Rational::zero();
    for (x, y) in a.iter().zip(b) {
        acc += &(x * y);
    }
    acc
}

pub fn vec_zeros(n: usize) -> Vec<Rational> {
    vec![Rational::zero(); n]
}

pub fn vec_from_i64(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from_int(x)).collect()
}

/// Flags a rank-deficient system passed to [`solve_square_system`]. What
/// singularity *means* is up to the caller.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("singular square system")]
pub struct Singular;

/// Solves `M x = b` exactly for square `M` by Gauss-Jordan elimination.
pub fn solve_square_system(m: &Matrix, b: &[Rational]) -> Result<Vec<Rational>, Singular> {
    let n = m.rows();
    assert_eq!(m.cols(), n, "solve_square_system needs a square matrix");
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let mut a = m.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !a[(i, col)].is_zero()) else {
            return Err(Singular);
        };
        a.swap_rows(col, p);
        rhs.swap(col, p);
        perm.swap(col, p);
        let inv = a[(col, col)].recip();
        for j in col..n {
            let v = &a[(col, j)] * &inv;
            a[(col, j)] = v;
        }
        let v = &rhs[col] * &inv;
        rhs[col] = v;
        for i in 0..n {
            if i != col && !a[(i, col)].is_zero() {
                let f = a[(i, col)].clone();
                for j in col..n {
                    let v = &a[(i, j)] - &(&f * &a[(col, j)]);
                    a[(i, j)] = v;
                }
                let v = &rhs[i] - &(&f * &rhs[col]);
                rhs[i] = v;
            }
        }
    }
    Ok(rhs)
}

/// Smallest `t >= 0` with `2^t >= v + 1`, i.e. `ceil(log2(v + 1))`.
///
/// This is the integer reading of every `log` in the encoding-length
/// formulas: a ceiling only over-estimates the length, which is safe.
pub fn ceil_log2_plus1(v: &BigUint) -> u64 {
    // For v >= 1, 2^t >= v+1 iff 2^t > v iff t > log2(v), so t = bits(v).
    if v.is_zero() {
        0
    } else {
        v.bits()
    }
}

/// Upper end of an interval in the Stern-Brocot descent; the infinite case
/// arises when a half-open lower endpoint sits exactly on an integer.
enum Upper<'a> {
    Finite(&'a Rational, bool), // (bound, strict)
    Infinite,
}

/// Smallest-denominator rational in the interval described by the endpoint
/// flags; among integers the tie goes to the smallest absolute value. The
/// descent walks the continued-fraction expansion of the endpoints, so the
/// interval may be astronomically tight.
fn simplest_in(lo: &Rational, lo_strict: bool, hi: Upper) -> Option<Rational> {
    // Integer window first.
    let n_min = if lo.is_integer() {
        if lo_strict {
            lo.floor() + BigInt::one()
        } else {
            lo.floor()
        }
    } else {
        lo.ceil()
    };
    let n_max = match hi {
        Upper::Infinite => None,
        Upper::Finite(h, strict) => {
            if h < lo || (h == lo && (lo_strict || strict)) {
                return None; // empty interval
            }
            Some(if h.is_integer() && strict {
                h.floor() - BigInt::one()
            } else {
                h.floor()
            })
        }
    };
    let has_integer = match &n_max {
        None => true,
        Some(n_max) => &n_min <= n_max,
    };
    if has_integer {
        let zero = BigInt::zero();
        let best = if n_min > zero {
            n_min
        } else {
            match &n_max {
                None => zero,
                Some(n_max) => {
                    if *n_max < zero {
                        n_max.clone()
                    } else {
                        zero
                    }
                }
            }
        };
        return Some(Rational::from_bigint(best));
    }
    // No integer inside, so the whole interval lies in (f, f+1) with
    // f = floor(lo), and x is in it iff x = f + 1/t with t in the
    // reciprocal interval (endpoint strictness swaps sides because the map
    // is decreasing). The simplest x corresponds to the simplest t.
    let Upper::Finite(h, h_strict) = hi else {
        unreachable!("unbounded-above interval always contains an integer")
    };
    let f = Rational::from_bigint(lo.floor());
    let new_lo = (h - &f).recip();
    if lo == &f {
        // lo is an excluded integer endpoint: t ranges up to infinity.
        let t = simplest_in(&new_lo, h_strict, Upper::Infinite)?;
        return Some(&f + &t.recip());
    }
    let new_hi = (lo - &f).recip();
    let t = simplest_in(&new_lo, h_strict, Upper::Finite(&new_hi, lo_strict))?;
    Some(&f + &t.recip())
}

/// The rational with the smallest denominator in `[lo, hi]` whose
/// denominator does not exceed `den_bound`; ties among integers go to the
/// smallest absolute value. Returns `None` when no such rational exists.
///
/// Runs by Stern-Brocot / continued-fraction descent, never by scanning, so
/// callers may pass astronomically tight intervals.
pub fn best_rational_in_interval(
    lo: &Rational,
    hi: &Rational,
    den_bound: &BigUint,
) -> Option<Rational> {
    assert!(lo <= hi, "best_rational_in_interval needs lo <= hi");
    assert!(!den_bound.is_zero(), "denominator bound must be positive");
    let r = simplest_in(lo, false, Upper::Finite(hi, false))?;
    (r.denom().magnitude() <= den_bound).then_some(r)
}

/// Like [`best_rational_in_interval`] but over the half-open `(lo, hi]`.
pub fn best_rational_in_halfopen(
    lo: &Rational,
    hi: &Rational,
    den_bound: &BigUint,
) -> Option<Rational> {
    assert!(lo <= hi, "best_rational_in_halfopen needs lo <= hi");
    assert!(!den_bound.is_zero(), "denominator bound must be positive");
    let r = simplest_in(lo, true, Upper::Finite(hi, false))?;
    (r.denom().magnitude() <= den_bound).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::ratio(n, d)
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(r(3, 4).to_string(), "3/4");
        assert_eq!(r(-3, 4).to_string(), "-3/4");
        assert_eq!(r(8, 2).to_string(), "4");
        assert_eq!("7/2".parse::<Rational>().unwrap(), r(7, 2));
        assert_eq!("-5".parse::<Rational>().unwrap(), r(-5, 1));
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("a/b".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_json_forms() {
        let v: Rational = serde_json::from_str("\"3/2\"").unwrap();
        assert_eq!(v, r(3, 2));
        let v: Rational = serde_json::from_str("-7").unwrap();
        assert_eq!(v, r(-7, 1));
        assert!(serde_json::from_str::<Rational>("1.5").is_err());
        assert_eq!(serde_json::to_string(&r(1, 3)).unwrap(), "\"1/3\"");
        assert_eq!(serde_json::to_string(&r(4, 2)).unwrap(), "\"2\"");
    }

    #[test]
    fn solve_identity() {
        let m = Matrix::identity(2);
        let b = vec_from_i64(&[3, 4]);
        assert_eq!(solve_square_system(&m, &b).unwrap(), b);
    }

    #[test]
    fn solve_rank_deficient_is_singular() {
        let m = Matrix::from_i64(&[&[1, 1], &[1, 1]]);
        let b = vec_from_i64(&[1, 1]);
        assert_eq!(solve_square_system(&m, &b), Err(Singular));
    }

    #[test]
    fn solve_diagonal() {
        let m = Matrix::from_i64(&[&[2, 0], &[0, 4]]);
        let b = vec_from_i64(&[1, 1]);
        assert_eq!(solve_square_system(&m, &b).unwrap(), vec![r(1, 2), r(1, 4)]);
    }

    #[test]
    fn solve_round_trip_on_random_nonsingular() {
        // multiplication after solve is the identity
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let mut tried = 0;
        while tried < 50 {
            let n = 1 + (next() % 4) as usize;
            let m = Matrix::from_rows(
                (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| Rational::from_int((next() % 7) as i64 - 3))
                            .collect()
                    })
                    .collect(),
            );
            let b: Vec<Rational> = (0..n)
                .map(|_| Rational::from_int((next() % 11) as i64 - 5))
                .collect();
            if let Ok(x) = solve_square_system(&m, &b) {
                assert_eq!(m.mul_vec(&x), b);
                tried += 1;
            }
        }
    }

    #[test]
    fn ceil_log2_small_values() {
        let cases = [(0u32, 0u64), (1, 1), (2, 2), (3, 2), (4, 3), (7, 3), (8, 4)];
        for (v, want) in cases {
            assert_eq!(ceil_log2_plus1(&BigUint::from(v)), want, "v={v}");
        }
    }

    #[test]
    fn rank_basic() {
        assert_eq!(Matrix::identity(3).rank(), 3);
        assert_eq!(Matrix::from_i64(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert_eq!(Matrix::zeros(2, 3).rank(), 0);
    }

    /// Brute-force reference: smallest-denominator rational in the interval,
    /// ties by |p|, scanning all denominators up to the bound.
    fn scan_best(lo: &Rational, hi: &Rational, den_bound: u64) -> Option<Rational> {
        for q in 1..=den_bound {
            let qr = Rational::from_int(q as i64);
            let p_lo = (lo * &qr).ceil();
            let p_hi = (hi * &qr).floor();
            if p_lo > p_hi {
                continue;
            }
            let zero = BigInt::from(0);
            let best_p = if p_lo > zero {
                p_lo
            } else if p_hi < zero {
                p_hi
            } else {
                zero
            };
            return Some(Rational::new(best_p, BigInt::from(q)));
        }
        None
    }

    #[test]
    fn best_rational_matches_exhaustive_scan() {
        // interval around 341/1024 that isolates 1/3
        let mid = r(341, 1024);
        let eps = Rational::pow2(-11);
        let got =
            best_rational_in_interval(&(&mid - &eps), &(&mid + &eps), &BigUint::from(10u32));
        assert_eq!(got, Some(r(1, 3)));
        assert_eq!(got, scan_best(&(&mid - &eps), &(&mid + &eps), 10));

        // point interval
        assert_eq!(
            best_rational_in_interval(&r(5, 1), &r(5, 1), &BigUint::from(100u32)),
            Some(r(5, 1))
        );

        // negative target
        let mid = r(-1, 2);
        let eps = Rational::pow2(-12);
        let got =
            best_rational_in_interval(&(&mid - &eps), &(&mid + &eps), &BigUint::from(16u32));
        assert_eq!(got, Some(r(-1, 2)));

        // no rational with small denominator in a tight irrationally-placed gap
        let lo = r(10, 7);
        let hi = &lo + &Rational::pow2(-20);
        assert_eq!(best_rational_in_interval(&lo, &hi, &BigUint::from(3u32)), None);
    }

    #[test]
    fn best_rational_random_cross_check() {
        let mut state = 0xdeadbeefcafef00du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let a = (next() % 400) as i64 - 200;
            let b = (next() % 63) as i64 + 1;
            let w = (next() % 50) as i64 + 1;
            let lo = r(a, b);
            let hi = &lo + &r(1, w * b);
            let bound = next() % 20 + 1;
            assert_eq!(
                best_rational_in_interval(&lo, &hi, &BigUint::from(bound)),
                scan_best(&lo, &hi, bound),
                "lo={lo} hi={hi} bound={bound}"
            );
        }
    }

    #[test]
    fn halfopen_excludes_lower_endpoint() {
        // [1/2, 3/4] has simplest 1/2; (1/2, 3/4] must find something else.
        let got = best_rational_in_halfopen(&r(1, 2), &r(3, 4), &BigUint::from(64u32));
        let v = got.unwrap();
        assert!(v > r(1, 2) && v <= r(3, 4));
        assert_eq!(v, r(2, 3));

        // degenerate: (a, a] is empty
        assert_eq!(
            best_rational_in_halfopen(&r(1, 3), &r(1, 3), &BigUint::from(64u32)),
            None
        );
    }

    #[test]
    fn halfopen_random_cross_check() {
        let scan_halfopen = |lo: &Rational, hi: &Rational, den_bound: u64| -> Option<Rational> {
            for q in 1..=den_bound {
                let qr = Rational::from_int(q as i64);
                let mut p = (lo * &qr).floor() + BigInt::one();
                let p_hi = (hi * &qr).floor();
                let mut cands = vec![];
                while p <= p_hi {
                    cands.push(Rational::new(p.clone(), BigInt::from(q)));
                    p += BigInt::one();
                }
                cands.retain(|c| c > lo && c <= hi);
                if !cands.is_empty() {
                    cands.sort_by(|a, b| a.numer().magnitude().cmp(b.numer().magnitude()));
                    return Some(cands[0].clone());
                }
            }
            None
        };
        let mut state = 0x1234567890abcdefu64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..500 {
            let a = (next() % 200) as i64 - 100;
            let b = (next() % 40) as i64 + 1;
            let w = (next() % 60) as i64 + 1;
            let lo = r(a, b);
            let hi = &lo + &r(1, w);
            let bound = next() % 16 + 1;
            let got = best_rational_in_halfopen(&lo, &hi, &BigUint::from(bound));
            let want = scan_halfopen(&lo, &hi, bound);
            match (&got, &want) {
                (None, None) => {}
                (Some(g), Some(w)) => {
                    assert!(g > &lo && g <= &hi, "lo={lo} hi={hi} got={g}");
                    assert_eq!(
                        g.denom(),
                        w.denom(),
                        "denominator mismatch lo={lo} hi={hi} got={g} want={w}"
                    );
                }
                _ => panic!("presence mismatch lo={lo} hi={hi} got={got:?} want={want:?}"),
            }
        }
    }
}
