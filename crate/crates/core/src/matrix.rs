//! Dense matrices over the exact rings, plus the few complex-matrix helpers
//! the numerical side needs.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::ring::RingElem;

/// Complex matrix type used after applying `iota`.
pub type CMat = DMatrix<Complex64>;

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R> Mat<R> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<R>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Self { rows, cols, data }
    }

    /// Build from rows; panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            assert_eq!(r.len(), ncols, "ragged matrix rows");
            data.extend(r);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn iter(&self) -> impl Iterator<Item = &R> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<R>>
    where
        R: Clone,
    {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<S>(&self, f: impl FnMut(&R) -> S) -> Mat<S> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<S, E>(&self, f: impl FnMut(&R) -> Result<S, E>) -> Result<Mat<S>, E> {
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    pub fn into_data(self) -> Vec<R> {
        self.data
    }
}

impl<R: Clone> Mat<R> {
    pub fn filled(rows: usize, cols: usize, value: R) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Rows `r0..r0+nr`, columns `c0..c0+nc`.
    pub fn submatrix(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        let mut data = Vec::with_capacity(nr * nc);
        for i in r0..r0 + nr {
            data.extend_from_slice(&self.row(i)[c0..c0 + nc]);
        }
        Self {
            rows: nr,
            cols: nc,
            data,
        }
    }
}

impl<R: RingElem> Mat<R> {
    pub fn identity(n: usize, one: &R) -> Self {
        let zero = one.zero_like();
        let mut m = Self::filled(n, n, zero);
        for i in 0..n {
            m[(i, i)] = one.clone();
        }
        m
    }

    pub fn zeros_like(rows: usize, cols: usize, sample: &R) -> Self {
        Self::filled(rows, cols, sample.zero_like())
    }

    /// Matrix product; zero entries on the left are skipped.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let sample = self
            .data
            .first()
            .or(rhs.data.first())
            .expect("product of empty matrices");
        let mut out = Self::zeros_like(self.rows, rhs.cols, sample);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero_elem() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if b.is_zero_elem() {
                        continue;
                    }
                    let prod = a.mul_ref(b);
                    let slot = &mut out.data[i * rhs.cols + j];
                    *slot = slot.add_ref(&prod);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[R]) -> Vec<R> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero_elem() && !b.is_zero_elem() {
                        acc = acc.add_ref(&a.mul_ref(b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.shape(), rhs.shape());
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn scale(&self, s: &R) -> Self {
        self.map(|a| a.mul_ref(s))
    }

    /// Entrywise involution.
    pub fn conj(&self) -> Self {
        self.map(RingElem::conj)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(RingElem::is_zero_elem)
    }

    /// Determinant by the division-free Berkowitz algorithm, valid over any
    /// commutative ring (including `Z[Z/q]`, which has zero divisors).
    pub fn det(&self) -> R {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            panic!("determinant of an empty matrix has no ring context");
        }
        let one = self.data[0].one_like();
        let zero = one.zero_like();
        // char poly coefficients of the leading r x r block, highest first
        let mut poly = vec![one.clone()];
        for r in 1..=n {
            let k = r - 1; // index of the new row/column
            let a_rr = &self[(k, k)];
            // first column of the Toeplitz matrix: 1, -a_rr, -R c, -R A c, ...
            let mut col = Vec::with_capacity(r + 1);
            col.push(one.clone());
            col.push(a_rr.neg_ref());
            if k > 0 {
                let c: Vec<R> = (0..k).map(|i| self[(i, k)].clone()).collect();
                let row_r: Vec<R> = (0..k).map(|j| self[(k, j)].clone()).collect();
                let mut v = c;
                for _ in 0..k {
                    let mut dot = zero.clone();
                    for (a, b) in row_r.iter().zip(&v) {
                        if !a.is_zero_elem() && !b.is_zero_elem() {
                            dot = dot.add_ref(&a.mul_ref(b));
                        }
                    }
                    col.push(dot.neg_ref());
                    // v <- A_k v
                    v = (0..k)
                        .map(|i| {
                            let mut acc = zero.clone();
                            for (j, vj) in v.iter().enumerate() {
                                let a = &self[(i, j)];
                                if !a.is_zero_elem() && !vj.is_zero_elem() {
                                    acc = acc.add_ref(&a.mul_ref(vj));
                                }
                            }
                            acc
                        })
                        .collect();
                }
            }
            debug_assert_eq!(col.len(), r + 1);
            // new poly = T * poly, T lower-triangular Toeplitz (r+1) x r
            let mut next = vec![zero.clone(); r + 1];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, pj) in poly.iter().enumerate() {
                    if i < j {
                        break;
                    }
                    let t = &col[i - j];
                    if !t.is_zero_elem() && !pj.is_zero_elem() {
                        *slot = slot.add_ref(&t.mul_ref(pj));
                    }
                }
            }
            poly = next;
        }
        let d = poly.pop().unwrap();
        if n % 2 == 1 {
            d.neg_ref()
        } else {
            d
        }
    }
}

impl<R> Index<(usize, usize)> for Mat<R> {
    type Output = R;
    fn index(&self, (i, j): (usize, usize)) -> &R {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for Mat<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut R {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `n choose k` as usize (small arguments only).
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Complex determinant (LU with partial pivoting via nalgebra).
pub fn cdet(m: &CMat) -> Complex64 {
    if m.nrows() == 0 {
        return Complex64::new(1.0, 0.0);
    }
    m.clone().determinant()
}

/// Skew form `[[0, I], [-I, 0]]` of size `2h` over the complex numbers.
pub fn complex_skew_form(h: usize) -> CMat {
    let mut j = CMat::zeros(2 * h, 2 * h);
    for i in 0..h {
        j[(i, h + i)] = Complex64::new(1.0, 0.0);
        j[(h + i, i)] = Complex64::new(-1.0, 0.0);
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn m(rows: &[&[i64]]) -> Mat<BigInt> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    #[test]
    fn berkowitz_small() {
        assert_eq!(m(&[&[5]]).det(), BigInt::from(5));
        assert_eq!(m(&[&[1, 2], &[3, 4]]).det(), BigInt::from(-2));
        assert_eq!(m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 1]]).det(), BigInt::from(0));
        assert_eq!(m(&[&[2, 0, 1], &[1, 3, 2], &[1, 1, 2]]).det(), BigInt::from(6));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
    }

    #[test]
    fn berkowitz_matches_leibniz_4x4() {
        let a = m(&[&[3, -1, 4, 1], &[5, 9, -2, 6], &[5, 3, 5, -8], &[9, 7, 9, 3]]);
        // Leibniz expansion
        let perms = {
            fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
                if cur.len() == used.len() {
                    out.push(cur.clone());
                    return;
                }
                for i in 0..used.len() {
                    if !used[i] {
                        used[i] = true;
                        cur.push(i);
                        rec(cur, used, out);
                        cur.pop();
                        used[i] = false;
                    }
                }
            }
            let mut out = Vec::new();
            rec(&mut Vec::new(), &mut [false; 4], &mut out);
            out
        };
        let mut total = BigInt::from(0);
        for p in perms {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let mut term = BigInt::from(if inv % 2 == 0 { 1 } else { -1 });
            for (i, &pi) in p.iter().enumerate() {
                term *= &a[(i, pi)];
            }
            total += term;
        }
        assert_eq!(a.det(), total);
    }

    #[test]
    fn subsets_enumerate() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(4, 2)[0], vec![0, 1]);
        assert_eq!(k_subsets(4, 2)[5], vec![2, 3]);
        assert_eq!(binomial(8, 4), 70);
    }
}
