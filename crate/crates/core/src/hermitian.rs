//! Matrices preserving the skew-Hermitian pairing on the lifted homology of
//! the surface, over `Z[t, t^-1]` and `Z[Z/q]`, and their complex images.
//!
//! Convention: `Φ(x, y) = x^T J ȳ` with `J = [[0, I], [-I, 0]]` in the
//! basis `ã_1..ã_{g-1}, b̃_1..b̃_{g-1}`. A matrix `M` preserves the form
//! iff `M^T J M̄ = J`.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::matrix::{binomial, cdet, k_subsets, CMat, Mat};
use crate::ring::{root_of_unity, CycElem, LaurentPoly, RingElem, RingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HermitianError {
    #[error("vector is not isotropic: Φ(v, v) = {0}")]
    NotIsotropic(String),
    #[error("scalar is not fixed by the involution: {0}")]
    NotSymmetric(String),
    #[error("transvection is not Torelli-like: T - I has an entry with nonzero augmentation")]
    NotTorelliLike,
    #[error("root index {j} is not coprime to q = {q}")]
    NonPrimitiveRoot { j: i64, q: usize },
    #[error("empty generator set")]
    EmptyGeneratorSet,
    #[error("matrix does not preserve the form")]
    NotFormPreserving,
    #[error("genus must be at least 3, got {0}")]
    GenusTooSmall(usize),
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Genus-`g` surface with the rank `2g - 2` lifted homology basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceModel {
    g: usize,
}

impl SurfaceModel {
    pub fn new(g: usize) -> Result<Self, HermitianError> {
        if g < 3 {
            return Err(HermitianError::GenusTooSmall(g));
        }
        Ok(Self { g })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    /// `g - 1`, the size of each block.
    pub fn half(&self) -> usize {
        self.g - 1
    }

    pub fn dim(&self) -> usize {
        2 * (self.g - 1)
    }

    /// Basis labels: `a1..a_{g-1}` then `b1..b_{g-1}`.
    pub fn labels(&self) -> Vec<String> {
        let h = self.half();
        (1..=h)
            .map(|i| format!("a{i}"))
            .chain((1..=h).map(|i| format!("b{i}")))
            .collect()
    }

    /// Basis vector `ã_i` (1-based) over the ring of `one`.
    pub fn a<R: RingElem>(&self, i: usize, one: &R) -> Vec<R> {
        self.basis(i - 1, one)
    }

    /// Basis vector `b̃_i` (1-based).
    pub fn b<R: RingElem>(&self, i: usize, one: &R) -> Vec<R> {
        self.basis(self.half() + i - 1, one)
    }

    fn basis<R: RingElem>(&self, k: usize, one: &R) -> Vec<R> {
        let mut v = vec![one.zero_like(); self.dim()];
        v[k] = one.clone();
        v
    }
}

/// Gram matrix `J = [[0, I], [-I, 0]]` of the pairing.
pub fn reidemeister_form<R: RingElem>(model: &SurfaceModel, one: &R) -> Mat<R> {
    let h = model.half();
    let mut j = Mat::filled(2 * h, 2 * h, one.zero_like());
    for i in 0..h {
        j[(i, h + i)] = one.clone();
        j[(h + i, i)] = one.neg_ref();
    }
    j
}

/// `Φ(x, y) = Σ_i x_i ȳ_{i+h} - x_{i+h} ȳ_i`.
pub fn form_value<R: RingElem>(x: &[R], y: &[R]) -> R {
    assert_eq!(x.len(), y.len());
    assert!(x.len().is_multiple_of(2) && !x.is_empty());
    let h = x.len() / 2;
    let mut acc = x[0].zero_like();
    for i in 0..h {
        acc = acc.add_ref(&x[i].mul_ref(&y[h + i].conj()));
        acc = acc.sub_ref(&x[h + i].mul_ref(&y[i].conj()));
    }
    acc
}

/// A `(2g-2) x (2g-2)` matrix over `Z[t, t^-1]` or `Z[Z/q]`.
#[derive(Clone, PartialEq)]
pub struct FormMatrix<R> {
    model: SurfaceModel,
    m: Mat<R>,
}

impl<R: RingElem> FormMatrix<R> {
    /// Admit a matrix after checking shape and form preservation.
    pub fn new(model: SurfaceModel, m: Mat<R>) -> Result<Self, HermitianError> {
        let fm = Self::new_unchecked(model, m)?;
        if !fm.check_form_preserved() {
            return Err(HermitianError::NotFormPreserving);
        }
        Ok(fm)
    }

    /// Admit a matrix with only a shape check.
    pub fn new_unchecked(model: SurfaceModel, m: Mat<R>) -> Result<Self, HermitianError> {
        let n = model.dim();
        if m.shape() != (n, n) {
            return Err(HermitianError::Shape(format!(
                "expected {n}x{n} for genus {}, got {}x{}",
                model.genus(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(Self { model, m })
    }

    pub fn identity(model: SurfaceModel, one: &R) -> Self {
        Self {
            model,
            m: Mat::identity(model.dim(), one),
        }
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    pub fn genus(&self) -> usize {
        self.model.genus()
    }

    pub fn matrix(&self) -> &Mat<R> {
        &self.m
    }

    pub fn into_matrix(self) -> Mat<R> {
        self.m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.model, rhs.model, "genus mismatch in product");
        Self {
            model: self.model,
            m: self.m.mul(&rhs.m),
        }
    }

    pub fn scale(&self, s: &R) -> Self {
        Self {
            model: self.model,
            m: self.m.scale(s),
        }
    }

    /// Exact check of `M^T J M̄ = J`.
    pub fn check_form_preserved(&self) -> bool {
        let one = self.m[(0, 0)].one_like();
        let j = reidemeister_form(&self.model, &one);
        self.m.transpose().mul(&j).mul(&self.m.conj()) == j
    }

    /// The block with rows indexed by `b̃_i` and columns by `ã_j`.
    pub fn bottom_left_block(&self) -> Mat<R> {
        let h = self.model.half();
        self.m.submatrix(h, 0, h, h)
    }

    /// Every entry of `M - I` lies in the augmentation ideal.
    pub fn is_torelli_like(&self) -> bool {
        let n = self.m.rows();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let aug = self.m[(i, j)].augmentation();
                if i == j {
                    aug.is_one()
                } else {
                    aug.is_zero()
                }
            })
        })
    }

    /// Image of the matrix under the augmentation `t -> 1`.
    pub fn augmentation(&self) -> Mat<BigInt> {
        self.m.map(|x| x.augmentation())
    }
}

/// Bottom-left block of `M`.
pub fn bottom_left_block<R: RingElem>(m: &FormMatrix<R>) -> Mat<R> {
    m.bottom_left_block()
}

/// Free function form of [`FormMatrix::check_form_preserved`].
pub fn check_form_preserved<R: RingElem>(m: &FormMatrix<R>) -> bool {
    m.check_form_preserved()
}

/// `T(x) = x + Φ(x, v) r v`, i.e. `T = I + r v (J v̄)^T`.
///
/// Requires `Φ(v, v) = 0` and `r̄ = r`. With `torelli_like` set, also
/// requires `T ≡ I` after augmentation.
pub fn transvection<R: RingElem>(
    model: SurfaceModel,
    v: &[R],
    r: &R,
    torelli_like: bool,
) -> Result<FormMatrix<R>, HermitianError> {
    let n = model.dim();
    if v.len() != n {
        return Err(HermitianError::Shape(format!("vector of length {} for dimension {n}", v.len())));
    }
    let phi_vv = form_value(v, v);
    if !phi_vv.is_zero_elem() {
        return Err(HermitianError::NotIsotropic(format!("{phi_vv:?}")));
    }
    if r.conj() != *r {
        return Err(HermitianError::NotSymmetric(format!("{r:?}")));
    }
    let h = model.half();
    // w = J v̄, so Φ(x, v) = x . w
    let w: Vec<R> = (0..n)
        .map(|i| {
            if i < h {
                v[h + i].conj()
            } else {
                v[i - h].conj().neg_ref()
            }
        })
        .collect();
    let one = r.one_like();
    let mut m = Mat::identity(n, &one);
    for i in 0..n {
        if v[i].is_zero_elem() {
            continue;
        }
        let rv = r.mul_ref(&v[i]);
        for j in 0..n {
            if !w[j].is_zero_elem() {
                m[(i, j)] = m[(i, j)].add_ref(&rv.mul_ref(&w[j]));
            }
        }
    }
    let t = FormMatrix::new(model, m)?;
    if torelli_like && !t.is_torelli_like() {
        return Err(HermitianError::NotTorelliLike);
    }
    Ok(t)
}

impl FormMatrix<LaurentPoly> {
    /// Entrywise reduction into `Z[Z/q]`.
    pub fn reduce_mod_q(&self, q: usize) -> Result<FormMatrix<CycElem>, RingError> {
        Ok(FormMatrix {
            model: self.model,
            m: self.m.try_map(|p| p.reduce_mod_q(q))?,
        })
    }

    /// Lowest exponent over all entries (`0` for the zero matrix).
    pub fn low_degree(&self) -> i64 {
        self.m.iter().filter_map(|p| p.low_degree()).min().unwrap_or(0)
    }

    /// `t^{-k} M` with `k` the lowest exponent, so that every entry is an
    /// honest polynomial with some entry having nonzero constant term.
    /// Returns the lifted matrix and the shift applied.
    pub fn canonical_lift(&self) -> (Self, i64) {
        let k = self.low_degree();
        (self.unit_twist(-k), -k)
    }

    /// `t^k M`; still form-preserving since `t t̄ = 1`.
    pub fn unit_twist(&self, k: i64) -> Self {
        Self {
            model: self.model,
            m: self.m.map(|p| p.shift(k)),
        }
    }

    /// Largest exponent after unit normalization.
    pub fn normalized_degree(&self) -> u64 {
        let (lift, _) = self.canonical_lift();
        lift.m
            .iter()
            .filter_map(|p| p.high_degree())
            .max()
            .unwrap_or(0)
            .max(0) as u64
    }
}

impl FormMatrix<CycElem> {
    pub fn modulus(&self) -> usize {
        self.m[(0, 0)].modulus()
    }
}

/// `d_μ`: largest entry degree over unit-normalized generators.
pub fn degree_bound(generators: &[FormMatrix<LaurentPoly>]) -> Result<u64, HermitianError> {
    generators
        .iter()
        .map(|m| m.normalized_degree())
        .max()
        .ok_or(HermitianError::EmptyGeneratorSet)
}

fn check_root(q: usize, j: i64) -> Result<(), HermitianError> {
    if q == 0 || (j.rem_euclid(q as i64)).gcd(&(q as i64)) != 1 {
        return Err(HermitianError::NonPrimitiveRoot { j, q });
    }
    Ok(())
}

/// `ι(c)`: evaluation at `exp(2 pi i j / q)`.
pub fn iota_elem(c: &CycElem, root_index: i64) -> Result<Complex64, HermitianError> {
    check_root(c.modulus(), root_index)?;
    Ok(c.iota(root_index))
}

/// Entrywise `ι` of a matrix over `Z[Z/q]`.
pub fn iota_matrix(m: &Mat<CycElem>, root_index: i64) -> Result<CMat, HermitianError> {
    let q = m.iter().next().map(|c| c.modulus()).unwrap_or(1);
    check_root(q, root_index)?;
    let pows: Vec<Complex64> = (0..q as i64).map(|k| root_of_unity(q, root_index * k)).collect();
    Ok(CMat::from_fn(m.rows(), m.cols(), |i, j| {
        let c = &m[(i, j)];
        let mut acc = Complex64::zero();
        for (k, coeff) in c.coeffs().iter().enumerate() {
            if !coeff.is_zero() {
                acc += pows[k] * num_traits::ToPrimitive::to_f64(coeff).unwrap_or(f64::NAN);
            }
        }
        acc
    }))
}

/// `ι(M)` for a form-preserving matrix over `Z[Z/q]`.
pub fn iota_embed(m: &FormMatrix<CycElem>, root_index: i64) -> Result<CMat, HermitianError> {
    iota_matrix(m.matrix(), root_index)
}

/// Largest entry of `|A^T J Ā - J|`; zero for `A` in `U(g-1, g-1)`.
pub fn complex_form_residual(a: &CMat) -> f64 {
    let h = a.nrows() / 2;
    let j = crate::matrix::complex_skew_form(h);
    let lhs = a.transpose() * &j * a.conjugate();
    (lhs - j).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `e = ã_1 ∧ … ∧ ã_{g-1}` and `f = b̃_1 ∧ … ∧ b̃_{g-1}` in the
/// lexicographic basis of `∧^{g-1} C^{2g-2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExteriorMarking {
    model: SurfaceModel,
    subsets: Vec<Vec<usize>>,
    e_index: usize,
    f_index: usize,
}

impl ExteriorMarking {
    pub fn new(model: SurfaceModel) -> Self {
        let h = model.half();
        let subsets = k_subsets(model.dim(), h);
        let e: Vec<usize> = (0..h).collect();
        let f: Vec<usize> = (h..2 * h).collect();
        let e_index = subsets.iter().position(|s| *s == e).unwrap();
        let f_index = subsets.iter().position(|s| *s == f).unwrap();
        Self {
            model,
            subsets,
            e_index,
            f_index,
        }
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    /// `binomial(2g-2, g-1)`
    pub fn dim(&self) -> usize {
        self.subsets.len()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn e_index(&self) -> usize {
        self.e_index
    }

    pub fn f_index(&self) -> usize {
        self.f_index
    }

    pub fn e(&self) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[self.e_index] = Complex64::one();
        v
    }

    pub fn f(&self) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[self.f_index] = Complex64::one();
        v
    }
}

/// Matrix of `∧^k A` in the lexicographic basis of `k`-subsets: entry
/// `(I, J)` is the minor of `A` on rows `I`, columns `J`.
pub fn exterior_power_matrix(a: &CMat, subsets: &[Vec<usize>]) -> CMat {
    let k = subsets.first().map(|s| s.len()).unwrap_or(0);
    let n = subsets.len();
    CMat::from_fn(n, n, |r, c| {
        let rows = &subsets[r];
        let cols = &subsets[c];
        let minor = CMat::from_fn(k, k, |i, j| a[(rows[i], cols[j])]);
        cdet(&minor)
    })
}

/// `(∧^{g-1} A · e, f)`, the determinant of the bottom-left block of `A`.
pub fn exterior_coefficient(a: &CMat, marking: &ExteriorMarking) -> Complex64 {
    let h = marking.model.half();
    assert_eq!(a.nrows(), 2 * h);
    cdet(&a.view((h, 0), (h, h)).into_owned())
}

/// Same quantity through the full exterior-power matrix.
pub fn exterior_coefficient_slow(a: &CMat, marking: &ExteriorMarking) -> Complex64 {
    let w = exterior_power_matrix(a, &marking.subsets);
    w[(marking.f_index, marking.e_index)]
}

/// Bound on the size of exterior powers built in full.
pub const MAX_EXTERIOR_DIM: usize = 70;

/// Whether `∧^{g-1}` is small enough to build explicitly.
pub fn exterior_is_small(model: &SurfaceModel) -> bool {
    binomial(model.dim(), model.half()) <= MAX_EXTERIOR_DIM
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Ring tag in the matrix file format: `"laurent"` or `{"cyclic": q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingKind {
    Laurent,
    Cyclic(usize),
}

impl Serialize for RingKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RingKind::Laurent => s.serialize_str("laurent"),
            RingKind::Cyclic(q) => {
                use serde::ser::SerializeMap;
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("cyclic", q)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for RingKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Cyclic { cyclic: usize },
        }
        match Raw::deserialize(d)? {
            Raw::Name(s) if s == "laurent" => Ok(RingKind::Laurent),
            Raw::Name(s) => Err(serde::de::Error::custom(format!("unknown ring {s:?}"))),
            Raw::Cyclic { cyclic: 0 } => Err(serde::de::Error::custom("cyclic modulus must be positive")),
            Raw::Cyclic { cyclic } => Ok(RingKind::Cyclic(cyclic)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FormMatrixFile {
    g: usize,
    ring: RingKind,
    rows: Vec<Vec<LaurentPoly>>,
}

/// A form matrix over either ring, as read from or written to JSON.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormMatrixFile", into = "FormMatrixFile")]
pub enum AnyFormMatrix {
    Laurent(FormMatrix<LaurentPoly>),
    Cyclic(FormMatrix<CycElem>),
}

impl AnyFormMatrix {
    pub fn genus(&self) -> usize {
        match self {
            AnyFormMatrix::Laurent(m) => m.genus(),
            AnyFormMatrix::Cyclic(m) => m.genus(),
        }
    }

    pub fn ring(&self) -> RingKind {
        match self {
            AnyFormMatrix::Laurent(_) => RingKind::Laurent,
            AnyFormMatrix::Cyclic(m) => RingKind::Cyclic(m.modulus()),
        }
    }

    pub fn check_form_preserved(&self) -> bool {
        match self {
            AnyFormMatrix::Laurent(m) => m.check_form_preserved(),
            AnyFormMatrix::Cyclic(m) => m.check_form_preserved(),
        }
    }

    /// Bottom-left block as rows of Laurent polynomials (cyclic entries
    /// lifted to exponents `0..q`).
    pub fn bottom_left_rows(&self) -> Vec<Vec<LaurentPoly>> {
        match self {
            AnyFormMatrix::Laurent(m) => m.bottom_left_block().row_vecs(),
            AnyFormMatrix::Cyclic(m) => m.bottom_left_block().map(|c| c.lift()).row_vecs(),
        }
    }
}

impl TryFrom<FormMatrixFile> for AnyFormMatrix {
    type Error = String;

    fn try_from(f: FormMatrixFile) -> Result<Self, String> {
        let model = SurfaceModel::new(f.g).map_err(|e| e.to_string())?;
        let n = model.dim();
        if f.rows.len() != n || f.rows.iter().any(|r| r.len() != n) {
            return Err(format!("genus {} needs a {n}x{n} matrix", f.g));
        }
        match f.ring {
            RingKind::Laurent => {
                let m = Mat::from_rows(f.rows);
                Ok(AnyFormMatrix::Laurent(FormMatrix::new_unchecked(model, m).map_err(|e| e.to_string())?))
            }
            RingKind::Cyclic(q) => {
                let rows = f
                    .rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|p| p.reduce_mod_q(q)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?;
                let m = Mat::from_rows(rows);
                Ok(AnyFormMatrix::Cyclic(FormMatrix::new_unchecked(model, m).map_err(|e| e.to_string())?))
            }
        }
    }
}

impl From<AnyFormMatrix> for FormMatrixFile {
    fn from(m: AnyFormMatrix) -> Self {
        let ring = m.ring();
        let g = m.genus();
        let rows = match m {
            AnyFormMatrix::Laurent(m) => m.into_matrix().row_vecs(),
            AnyFormMatrix::Cyclic(m) => m.into_matrix().map(|c| c.lift()).row_vecs(),
        };
        FormMatrixFile { g, ring, rows }
    }
}

impl<R: RingElem + fmt::Display> fmt::Debug for FormMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FormMatrix(g = {})", self.model.genus())?;
        for i in 0..self.m.rows() {
            let row: Vec<String> = self.m.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for AnyFormMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyFormMatrix::Laurent(m) => m.fmt(f),
            AnyFormMatrix::Cyclic(m) => m.fmt(f),
        }
    }
}

// ---------------------------------------------------------------------------
// Bundled generators
// ---------------------------------------------------------------------------

/// `t + t^-1 - 2`: symmetric, with augmentation `0`.
pub fn torelli_scalar() -> LaurentPoly {
    LaurentPoly::from_coeffs(-1, &[1, -2, 1])
}

/// Isotropic vectors used by the bundled generator set.
fn bundled_vectors(model: &SurfaceModel) -> Vec<Vec<LaurentPoly>> {
    let one = LaurentPoly::one();
    let h = model.half();
    let t = LaurentPoly::t_pow(1);
    let mut out = Vec::new();
    for i in 1..=h {
        out.push(model.a(i, &one));
        out.push(model.b(i, &one));
    }
    for i in 1..h {
        let mut v = model.a(i, &one);
        v[i] = t.clone();
        out.push(v);
        let mut w = model.b(i, &one);
        w[h + i] = t.clone();
        out.push(w);
    }
    // a_1 + (1 + t) b_2, isotropic since Φ(a_1, b_2) = 0
    let mut mixed = model.a(1, &one);
    mixed[h + 1] = LaurentPoly::from_coeffs(0, &[1, 1]);
    out.push(mixed);
    out
}

/// Torelli-like transvections `T(v, ±(t + t^-1 - 2))` over a fixed family
/// of isotropic vectors, closed under inverses.
pub fn bundled_generators(g: usize) -> Result<Vec<FormMatrix<LaurentPoly>>, HermitianError> {
    let model = SurfaceModel::new(g)?;
    let r = torelli_scalar();
    let neg = -&r;
    let mut gens = Vec::new();
    for v in bundled_vectors(&model) {
        gens.push(transvection(model, &v, &r, true)?);
        gens.push(transvection(model, &v, &neg, true)?);
    }
    Ok(gens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model3() -> SurfaceModel {
        SurfaceModel::new(3).unwrap()
    }

    #[test]
    fn gram_matrix_g3() {
        let j = reidemeister_form(&model3(), &BigInt::one());
        let want: Vec<Vec<BigInt>> = [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]]
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        assert_eq!(j.row_vecs(), want);
        // J̄^T = -J
        let jl = reidemeister_form(&model3(), &LaurentPoly::one());
        assert_eq!(jl.conj().transpose(), jl.scale(&LaurentPoly::constant(-1)));
        let one = LaurentPoly::one();
        assert_eq!(form_value(&model3().a(1, &one), &model3().b(1, &one)), one);
        assert!(form_value(&model3().a(1, &one), &model3().b(2, &one)).is_zero());
    }

    #[test]
    fn form_preservation_examples() {
        let one = LaurentPoly::one();
        assert!(FormMatrix::identity(model3(), &one).check_form_preserved());
        let tid = FormMatrix::identity(model3(), &one).scale(&LaurentPoly::t_pow(1));
        assert!(tid.check_form_preserved());
        // swap a1 and a2 columns with a sign error in the dual block
        let mut m = Mat::identity(4, &one);
        m[(0, 0)] = LaurentPoly::zero();
        m[(1, 1)] = LaurentPoly::zero();
        m[(0, 1)] = one.clone();
        m[(1, 0)] = one.clone();
        m[(2, 3)] = one.clone();
        m[(3, 2)] = -&one;
        m[(2, 2)] = LaurentPoly::zero();
        m[(3, 3)] = LaurentPoly::zero();
        let bad = FormMatrix::new_unchecked(model3(), m.clone()).unwrap();
        assert!(!bad.check_form_preserved());
        m[(3, 2)] = one.clone();
        assert!(FormMatrix::new_unchecked(model3(), m).unwrap().check_form_preserved());
    }

    #[test]
    fn transvection_examples() {
        let one = LaurentPoly::one();
        let model = model3();
        let a1 = model.a(1, &one);
        let t0 = transvection(model, &a1, &LaurentPoly::zero(), false).unwrap();
        assert_eq!(t0, FormMatrix::identity(model, &one));

        let t1 = transvection(model, &a1, &one, false).unwrap();
        // b1 -> b1 + Φ(b1, a1) a1 = b1 - a1
        assert_eq!(t1.matrix()[(0, 2)], -&one);
        assert!(!t1.is_torelli_like());
        assert!(matches!(transvection(model, &a1, &one, true), Err(HermitianError::NotTorelliLike)));

        let t2 = transvection(model, &a1, &torelli_scalar(), true).unwrap();
        assert!(t2.check_form_preserved());
        assert!(t2.is_torelli_like());

        let not_iso: Vec<LaurentPoly> = vec![one.clone(), LaurentPoly::zero(), LaurentPoly::t_pow(1), LaurentPoly::zero()];
        assert!(matches!(transvection(model, &not_iso, &one, false), Err(HermitianError::NotIsotropic(_))));
        assert!(matches!(
            transvection(model, &a1, &LaurentPoly::t_pow(1), false),
            Err(HermitianError::NotSymmetric(_))
        ));
    }

    #[test]
    fn bottom_left_examples() {
        let one = LaurentPoly::one();
        let model = model3();
        let r = torelli_scalar();
        assert!(FormMatrix::identity(model, &one).bottom_left_block().is_zero());
        assert!(transvection(model, &model.a(1, &one), &r, true).unwrap().bottom_left_block().is_zero());
        let b = transvection(model, &model.b(1, &one), &r, true).unwrap().bottom_left_block();
        assert_eq!(b[(0, 0)], r);
        assert!(b[(0, 1)].is_zero() && b[(1, 0)].is_zero() && b[(1, 1)].is_zero());
    }

    #[test]
    fn iota_examples() {
        let c = CycElem::from_coeffs(3, vec![1.into(), 1.into(), 1.into()]).unwrap();
        assert!(iota_elem(&c, 1).unwrap().norm() < 1e-14);
        assert!(iota_elem(&c, 2).unwrap().norm() < 1e-14);
        let t = CycElem::monomial(4, 1, 1);
        let z = iota_elem(&t, 1).unwrap();
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(matches!(iota_elem(&t, 2), Err(HermitianError::NonPrimitiveRoot { j: 2, q: 4 })));
    }

    #[test]
    fn exterior_examples() {
        let marking = ExteriorMarking::new(model3());
        assert_eq!(marking.dim(), 6);
        let id = CMat::identity(4, 4);
        assert_eq!(exterior_coefficient(&id, &marking), Complex64::zero());
        let j = crate::matrix::complex_skew_form(2);
        let fast = exterior_coefficient(&j, &marking);
        let slow = exterior_coefficient_slow(&j, &marking);
        assert!((fast - Complex64::one()).norm() < 1e-14);
        assert!((slow - fast).norm() < 1e-14);
    }

    #[test]
    fn degree_bound_examples() {
        let model = model3();
        let one = LaurentPoly::one();
        assert_eq!(degree_bound(&[FormMatrix::identity(model, &one)]).unwrap(), 0);
        let t = transvection(model, &model.a(1, &one), &torelli_scalar(), true).unwrap();
        assert_eq!(degree_bound(std::slice::from_ref(&t)).unwrap(), 2);
        assert_eq!(degree_bound(&[FormMatrix::identity(model, &one), t]).unwrap(), 2);
        assert_eq!(degree_bound(&[]), Err(HermitianError::EmptyGeneratorSet));
    }

    #[test]
    fn bundled_sets_are_torelli_like() {
        for g in [3, 4] {
            let gens = bundled_generators(g).unwrap();
            assert!(gens.iter().all(|m| m.check_form_preserved() && m.is_torelli_like()));
        }
    }

    #[test]
    fn json_round_trip() {
        let gens = bundled_generators(3).unwrap();
        let any = AnyFormMatrix::Laurent(gens[1].clone());
        let s = serde_json::to_string(&any).unwrap();
        let back: AnyFormMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, any);

        let cyc = AnyFormMatrix::Cyclic(gens[1].reduce_mod_q(5).unwrap());
        let s = serde_json::to_string(&cyc).unwrap();
        assert!(s.contains("\"cyclic\":5"));
        let back: AnyFormMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cyc);
    }
}
