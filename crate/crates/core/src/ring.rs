//! Exact arithmetic in the Laurent ring `Z[t, t^-1]` and the cyclic group
//! ring `Z[Z/q]`, together with the involution `t -> t^-1` and the
//! reduction morphism between them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::matrix::Mat;

/// Tolerance on `| |z| - 1 |` accepted by [`LaurentPoly::eval`].
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RingError {
    #[error("evaluation point has modulus {modulus}, expected 1 within {UNIT_MODULUS_TOL:e}")]
    NonUnitModulus { modulus: f64 },
    #[error("cyclic modulus must be positive")]
    InvalidModulus,
    #[error("ring mismatch: {0}")]
    Mismatch(String),
}

/// Commutative ring with involution, as used by the matrix code.
///
/// Elements of `Z[Z/q]` need to know their modulus, so constants are built
/// from an existing element (`zero_like`, `one_like`, `from_int_like`).
pub trait RingElem: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_int_like(&self, n: BigInt) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// The involution (`t -> t^-1`, `g -> g^-1`; identity on integers).
    fn conj(&self) -> Self;
    /// Image under the augmentation map to `Z` (sum of coefficients).
    fn augmentation(&self) -> BigInt;

    fn is_one_elem(&self) -> bool {
        *self == self.one_like()
    }
}

impl RingElem for BigInt {
    fn zero_like(&self) -> Self {
        BigInt::zero()
    }
    fn one_like(&self) -> Self {
        BigInt::one()
    }
    fn from_int_like(&self, n: BigInt) -> Self {
        n
    }
    fn is_zero_elem(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn augmentation(&self) -> BigInt {
        self.clone()
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials
// ---------------------------------------------------------------------------

/// Integer Laurent polynomial in one variable `t`.
///
/// Stored sparsely; no zero coefficient is ever kept, so the zero
/// polynomial is the empty map.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::monomial(c, 0)
    }

    /// `c * t^k`
    pub fn monomial(c: impl Into<BigInt>, k: i64) -> Self {
        let c = c.into();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        Self { coeffs }
    }

    /// `t^k`
    pub fn t_pow(k: i64) -> Self {
        Self::monomial(1, k)
    }

    /// Sum of the given terms; repeated exponents are added together.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigInt>,
    {
        let mut coeffs: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_default() += c.into();
        }
        coeffs.retain(|_, c| !c.is_zero());
        Self { coeffs }
    }

    /// Dense constructor: `coeffs[i]` is the coefficient of `t^(lo + i)`.
    pub fn from_coeffs(lo: i64, coeffs: &[i64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(i, &c)| (lo + i as i64, c)))
    }

    fn from_dense(lo: i64, dense: Vec<BigInt>) -> Self {
        let coeffs = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (lo + i as i64, c))
            .collect();
        Self { coeffs }
    }

    /// Dense coefficient vector starting at the lowest exponent.
    pub fn to_dense(&self) -> (i64, Vec<BigInt>) {
        match (self.low_degree(), self.high_degree()) {
            (Some(lo), Some(hi)) => {
                let mut v = vec![BigInt::zero(); (hi - lo + 1) as usize];
                for (k, c) in &self.coeffs {
                    v[(k - lo) as usize] = c.clone();
                }
                (lo, v)
            }
            _ => (0, Vec::new()),
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, &BigInt)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: i64) -> BigInt {
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn low_degree(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn high_degree(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Width `deg_hi - deg_lo`; the degree of the unit-normalized
    /// polynomial. Zero for the zero polynomial.
    pub fn degree(&self) -> u64 {
        match (self.low_degree(), self.high_degree()) {
            (Some(lo), Some(hi)) => (hi - lo) as u64,
            _ => 0,
        }
    }

    /// Coefficient at the top exponent (zero for the zero polynomial).
    pub fn leading_coeff(&self) -> BigInt {
        self.coeffs.values().next_back().cloned().unwrap_or_default()
    }

    /// Coefficient at the lowest exponent.
    pub fn trailing_coeff(&self) -> BigInt {
        self.coeffs.values().next().cloned().unwrap_or_default()
    }

    /// Largest absolute value of a coefficient (the height).
    pub fn height(&self) -> BigInt {
        self.coeffs.values().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// Multiply by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    /// `t^{-deg_lo} * p` together with the shift applied.
    ///
    /// The result is an honest polynomial with nonzero constant term; the
    /// sign is left alone. The zero polynomial maps to `(0, 0)`.
    pub fn normalize_unit(&self) -> (Self, i64) {
        match self.low_degree() {
            Some(lo) => (self.shift(-lo), -lo),
            None => (Self::zero(), 0),
        }
    }

    /// The involution `t -> t^-1`.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Value at `t = 1`.
    pub fn augmentation(&self) -> BigInt {
        self.coeffs.values().sum()
    }

    /// `p(t^k)` for `k >= 1`.
    pub fn compose_power(&self, k: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(e, c)| (e * k, c.clone())).collect(),
        }
    }

    /// Formal derivative, as a Laurent polynomial.
    pub fn derivative(&self) -> Self {
        Self::from_terms(
            self.coeffs
                .iter()
                .filter(|(e, _)| **e != 0)
                .map(|(e, c)| (e - 1, c * BigInt::from(*e))),
        )
    }

    /// Greatest common divisor of the coefficients (zero for zero).
    pub fn content(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divide every coefficient by `d`; `None` unless all are divisible.
    pub fn div_scalar_exact(&self, d: &BigInt) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let mut coeffs = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            coeffs.insert(*k, q);
        }
        Some(Self { coeffs })
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    /// Exact division in `Z[t, t^-1]`.
    ///
    /// Returns `Some(q)` with `self = q * divisor` when such a Laurent
    /// polynomial exists, `None` otherwise.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (nlo, num) = self.to_dense();
        let (dlo, den) = divisor.to_dense();
        let quot = poly_div_exact(num, &den)?;
        Some(Self::from_dense(nlo - dlo, quot))
    }

    /// Evaluate at a point of the unit circle.
    ///
    /// Terms are summed with Neumaier compensation; `z^k` is formed from
    /// the polar form so negative exponents need no division.
    pub fn eval(&self, z: Complex64) -> Result<Complex64, RingError> {
        let r = z.norm();
        if (r - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(RingError::NonUnitModulus { modulus: r });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without the unit-modulus check.
    pub fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        let (r, theta) = z.to_polar();
        let mut re = NeumaierSum::default();
        let mut im = NeumaierSum::default();
        for (k, c) in &self.coeffs {
            let c = c.to_f64().unwrap_or(f64::INFINITY);
            let zk = Complex64::from_polar(r.powi(*k as i32), theta * (*k as f64));
            re.add(c * zk.re);
            im.add(c * zk.im);
        }
        Complex64::new(re.value(), im.value())
    }

    /// Image in `Z[Z/q]`: exponent `k` goes to `k mod q`.
    pub fn reduce_mod_q(&self, q: usize) -> Result<CycElem, RingError> {
        if q == 0 {
            return Err(RingError::InvalidModulus);
        }
        let mut coeffs = vec![BigInt::zero(); q];
        for (k, c) in &self.coeffs {
            let idx = k.rem_euclid(q as i64) as usize;
            coeffs[idx] += c;
        }
        Ok(CycElem { q, coeffs })
    }
}

/// Free function form of [`LaurentPoly::reduce_mod_q`].
pub fn reduce_mod_q(p: &LaurentPoly, q: usize) -> Result<CycElem, RingError> {
    p.reduce_mod_q(q)
}

/// Free function form of [`LaurentPoly::normalize_unit`].
pub fn normalize_unit(p: &LaurentPoly) -> (LaurentPoly, i64) {
    p.normalize_unit()
}

/// Exact long division of dense polynomials (index = exponent).
/// `None` if some step is not integral or the remainder is nonzero.
pub(crate) fn poly_div_exact(mut num: Vec<BigInt>, den: &[BigInt]) -> Option<Vec<BigInt>> {
    while num.last().is_some_and(|c| c.is_zero()) {
        num.pop();
    }
    let dn = den.len();
    let lead = den.last()?;
    if lead.is_zero() {
        return None;
    }
    if num.is_empty() {
        return Some(Vec::new());
    }
    if num.len() < dn {
        return None;
    }
    let qlen = num.len() - dn + 1;
    let mut quot = vec![BigInt::zero(); qlen];
    let unit_lead = lead.is_one() || (-lead).is_one();
    for i in (0..qlen).rev() {
        let top = &num[i + dn - 1];
        if top.is_zero() {
            continue;
        }
        let qc = if unit_lead {
            if lead.is_one() {
                top.clone()
            } else {
                -top
            }
        } else {
            let (qc, r) = top.div_rem(lead);
            if !r.is_zero() {
                return None;
            }
            qc
        };
        for (j, d) in den.iter().enumerate() {
            if !d.is_zero() {
                num[i + j] -= &qc * d;
            }
        }
        quot[i] = qc;
    }
    if num.iter().take(dn - 1).any(|c| !c.is_zero()) {
        return None;
    }
    Some(quot)
}

#[derive(Default)]
struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn mul_laurent(a: &LaurentPoly, b: &LaurentPoly) -> LaurentPoly {
    if a.is_zero() || b.is_zero() {
        return LaurentPoly::zero();
    }
    let (alo, ahi) = (a.low_degree().unwrap(), a.high_degree().unwrap());
    let (blo, bhi) = (b.low_degree().unwrap(), b.high_degree().unwrap());
    let width = (ahi - alo + bhi - blo + 1) as usize;
    let pairs = a.num_terms() * b.num_terms();
    if width <= 4 * pairs + 16 {
        let mut acc = vec![BigInt::zero(); width];
        for (ka, ca) in &a.coeffs {
            for (kb, cb) in &b.coeffs {
                acc[(ka + kb - alo - blo) as usize] += ca * cb;
            }
        }
        LaurentPoly::from_dense(alo + blo, acc)
    } else {
        let mut coeffs: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (ka, ca) in &a.coeffs {
            for (kb, cb) in &b.coeffs {
                *coeffs.entry(ka + kb).or_default() += ca * cb;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        LaurentPoly { coeffs }
    }
}

fn add_laurent(a: &LaurentPoly, b: &LaurentPoly, sign: i8) -> LaurentPoly {
    let mut coeffs = a.coeffs.clone();
    for (k, c) in &b.coeffs {
        let entry = coeffs.entry(*k).or_default();
        if sign > 0 {
            *entry += c;
        } else {
            *entry -= c;
        }
        if entry.is_zero() {
            coeffs.remove(k);
        }
    }
    LaurentPoly { coeffs }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_laurent(self, rhs, 1)
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        add_laurent(self, rhs, -1)
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        mul_laurent(self, rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }
}

macro_rules! forward_owned_ops {
    ($ty:ty) => {
        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }
        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }
        impl Mul for $ty {
            type Output = $ty;
            fn mul(self, rhs: $ty) -> $ty {
                &self * &rhs
            }
        }
        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                -&self
            }
        }
    };
}

forward_owned_ops!(LaurentPoly);

impl RingElem for LaurentPoly {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn from_int_like(&self, n: BigInt) -> Self {
        Self::constant(n)
    }
    fn is_zero_elem(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        LaurentPoly::conj(self)
    }
    fn augmentation(&self) -> BigInt {
        LaurentPoly::augmentation(self)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || *k == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match *k {
                0 => {}
                1 => write!(f, "t")?,
                _ => write!(f, "t^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

/// JSON form: `[[exponent, "coefficient"], ...]` sorted by exponent.
impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coeffs.len()))?;
        for (k, c) in &self.coeffs {
            seq.serialize_element(&(k, c.to_string()))?;
        }
        seq.end()
    }
}

/// Coefficient as it may appear in input JSON: decimal string or integer.
#[derive(Deserialize)]
#[serde(untagged)]
pub(crate) enum IntLiteral {
    Str(String),
    Int(i64),
}

impl IntLiteral {
    pub(crate) fn parse<E: de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntLiteral::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map_err(|e| E::custom(format!("bad integer {s:?}: {e}"))),
            IntLiteral::Int(i) => Ok(BigInt::from(i)),
        }
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: Vec<(i64, IntLiteral)> = Vec::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.len());
        for (k, c) in raw {
            terms.push((k, c.parse::<D::Error>()?));
        }
        Ok(LaurentPoly::from_terms(terms))
    }
}

// ---------------------------------------------------------------------------
// Cyclic group ring
// ---------------------------------------------------------------------------

/// Element of `Z[Z/q]`, dense in the exponent basis `0..q`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycElem {
    q: usize,
    coeffs: Vec<BigInt>,
}

impl CycElem {
    pub fn zero(q: usize) -> Self {
        assert!(q > 0, "cyclic modulus must be positive");
        Self {
            q,
            coeffs: vec![BigInt::zero(); q],
        }
    }

    pub fn one(q: usize) -> Self {
        Self::monomial(q, 1, 0)
    }

    /// `c * t^k` with `k` taken mod `q`.
    pub fn monomial(q: usize, c: impl Into<BigInt>, k: i64) -> Self {
        let mut e = Self::zero(q);
        e.coeffs[k.rem_euclid(q as i64) as usize] = c.into();
        e
    }

    pub fn from_coeffs(q: usize, coeffs: Vec<BigInt>) -> Result<Self, RingError> {
        if q == 0 {
            return Err(RingError::InvalidModulus);
        }
        if coeffs.len() != q {
            return Err(RingError::Mismatch(format!(
                "expected {q} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { q, coeffs })
    }

    pub fn modulus(&self) -> usize {
        self.q
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// The involution: exponent `k` goes to `q - k mod q`.
    pub fn conj(&self) -> Self {
        let q = self.q;
        let mut coeffs = vec![BigInt::zero(); q];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(q - k) % q] = c.clone();
        }
        Self { q, coeffs }
    }

    pub fn augmentation(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Canonical lift to a polynomial of degree `< q`.
    pub fn lift(&self) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (k as i64, c.clone())),
        )
    }

    /// Matrix of multiplication by `self` on `Z[Z/q]` in the exponent basis:
    /// column `k` holds the coefficients of `self * t^k`.
    pub fn circulant_expand(&self) -> Mat<BigInt> {
        let q = self.q;
        let mut m = Mat::filled(q, q, BigInt::zero());
        for col in 0..q {
            for (j, c) in self.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    m[((j + col) % q, col)] = c.clone();
                }
            }
        }
        m
    }

    /// `iota`: evaluation at `exp(2 pi i j / q)`.
    pub fn iota(&self, root_index: i64) -> Complex64 {
        let zeta = root_of_unity(self.q, root_index);
        self.lift().eval_unchecked(zeta)
    }

    fn check_same(&self, rhs: &Self) {
        assert_eq!(self.q, rhs.q, "mixing Z[Z/q] elements with different q");
    }
}

/// `exp(2 pi i j / q)`
pub fn root_of_unity(q: usize, j: i64) -> Complex64 {
    let j = j.rem_euclid(q as i64) as f64;
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j / q as f64)
}

/// Free function form of [`CycElem::circulant_expand`].
pub fn circulant_expand(c: &CycElem) -> Mat<BigInt> {
    c.circulant_expand()
}

impl Add<&CycElem> for &CycElem {
    type Output = CycElem;
    fn add(self, rhs: &CycElem) -> CycElem {
        self.check_same(rhs);
        CycElem {
            q: self.q,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&CycElem> for &CycElem {
    type Output = CycElem;
    fn sub(self, rhs: &CycElem) -> CycElem {
        self.check_same(rhs);
        CycElem {
            q: self.q,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&CycElem> for &CycElem {
    type Output = CycElem;
    fn mul(self, rhs: &CycElem) -> CycElem {
        self.check_same(rhs);
        let q = self.q;
        let mut coeffs = vec![BigInt::zero(); q];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[(i + j) % q] += a * b;
                }
            }
        }
        CycElem { q, coeffs }
    }
}

impl Neg for &CycElem {
    type Output = CycElem;
    fn neg(self) -> CycElem {
        CycElem {
            q: self.q,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

forward_owned_ops!(CycElem);

impl RingElem for CycElem {
    fn zero_like(&self) -> Self {
        Self::zero(self.q)
    }
    fn one_like(&self) -> Self {
        Self::one(self.q)
    }
    fn from_int_like(&self, n: BigInt) -> Self {
        Self::monomial(self.q, n, 0)
    }
    fn is_zero_elem(&self) -> bool {
        CycElem::is_zero(self)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn conj(&self) -> Self {
        CycElem::conj(self)
    }
    fn augmentation(&self) -> BigInt {
        CycElem::augmentation(self)
    }
}

impl fmt::Debug for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycElem(q={}, {})", self.q, self.lift())
    }
}

impl fmt::Display for CycElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod t^{} - 1", self.lift(), self.q)
    }
}

#[derive(Serialize, Deserialize)]
struct CycElemJson {
    q: usize,
    coeffs: Vec<String>,
}

/// JSON form: `{"q": q, "coeffs": ["c0", ..., "c_{q-1}"]}`.
impl Serialize for CycElem {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CycElemJson {
            q: self.q,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = CycElemJson::deserialize(d)?;
        let coeffs = raw
            .coeffs
            .iter()
            .map(|s| s.trim().parse::<BigInt>().map_err(de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        CycElem::from_coeffs(raw.q, coeffs).map_err(de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials and the totient
// ---------------------------------------------------------------------------

/// Euler's totient by trial-division factorization.
pub fn totient(n: u64) -> u64 {
    assert!(n >= 1, "totient is defined for n >= 1");
    let mut result = n;
    for (p, _) in factorize(n) {
        result = result / p * (p - 1);
    }
    result
}

/// Prime factorization by trial division, as `(prime, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Memo table for cyclotomic polynomials up to a configurable index.
///
/// Read-mostly: lookups take a shared lock, inserts an exclusive one.
pub struct CyclotomicTable {
    n_max: u64,
    cache: RwLock<HashMap<u64, Arc<LaurentPoly>>>,
}

impl CyclotomicTable {
    pub const DEFAULT_N_MAX: u64 = 2000;

    pub fn new(n_max: u64) -> Self {
        Self {
            n_max,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    /// The shared process-wide table (`n_max` = 2000).
    pub fn global() -> &'static CyclotomicTable {
        static TABLE: OnceLock<CyclotomicTable> = OnceLock::new();
        TABLE.get_or_init(|| CyclotomicTable::new(Self::DEFAULT_N_MAX))
    }

    /// `Phi_n`, computed by exact division.
    ///
    /// With `r = rad(n)` we use `Phi_n(t) = Phi_r(t^{n/r})`, and for
    /// squarefree `r` with largest prime `p`,
    /// `Phi_r(t) = Phi_{r/p}(t^p) / Phi_{r/p}(t)`.
    pub fn get(&self, n: u64) -> Arc<LaurentPoly> {
        assert!(n >= 1, "cyclotomic index must be positive");
        if let Some(p) = self.cache.read().unwrap().get(&n) {
            return p.clone();
        }
        let value = Arc::new(self.compute(n));
        if n <= self.n_max {
            self.cache.write().unwrap().insert(n, value.clone());
        }
        value
    }

    fn compute(&self, n: u64) -> LaurentPoly {
        if n == 1 {
            return LaurentPoly::from_coeffs(0, &[-1, 1]);
        }
        let factors = factorize(n);
        let rad: u64 = factors.iter().map(|(p, _)| p).product();
        if rad != n {
            return self.get(rad).compose_power((n / rad) as i64);
        }
        let p = factors.last().unwrap().0;
        let base = self.get(n / p);
        base.compose_power(p as i64)
            .div_exact(&base)
            .expect("cyclotomic recursion divides exactly")
    }
}

/// `Phi_n` from the global memo table.
pub fn cyclotomic(n: u64) -> LaurentPoly {
    (*CyclotomicTable::global().get(n)).clone()
}
