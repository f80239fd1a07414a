#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use torsionlab_core::hermitian::{bundled_generators, transvection, FormMatrix, SurfaceModel};
use torsionlab_core::{LaurentPoly, Mat};

pub fn random_poly<R: Rng>(rng: &mut R, max_terms: usize, span: i64, height: i64) -> LaurentPoly {
    let n = rng.random_range(0..=max_terms);
    LaurentPoly::from_terms((0..n).map(|_| (rng.random_range(-span..=span), BigInt::from(rng.random_range(-height..=height)))))
}

/// Symmetric element `c0 + c1 (t + t^-1)`.
pub fn random_symmetric<R: Rng>(rng: &mut R) -> LaurentPoly {
    let c0 = rng.random_range(-2i64..=2);
    let c1 = rng.random_range(-1i64..=1);
    LaurentPoly::from_terms([(0, BigInt::from(c0)), (1, BigInt::from(c1)), (-1, BigInt::from(c1))])
}

/// Letters for random form-preserving words: the bundled Torelli-like set
/// plus transvections along the basis vectors with random symmetric scalars.
pub fn letter_pool<R: Rng>(rng: &mut R, g: usize) -> Vec<FormMatrix<LaurentPoly>> {
    let model = SurfaceModel::new(g).unwrap();
    let one = LaurentPoly::one();
    let mut pool = bundled_generators(g).unwrap();
    for i in 1..=model.half() {
        for v in [model.a(i, &one), model.b(i, &one)] {
            let r = random_symmetric(rng);
            pool.push(transvection(model, &v, &r, false).unwrap());
        }
    }
    pool
}

pub fn random_word<R: Rng>(rng: &mut R, g: usize, len: usize) -> FormMatrix<LaurentPoly> {
    let pool = letter_pool(rng, g);
    let model = SurfaceModel::new(g).unwrap();
    let mut m = FormMatrix::identity(model, &LaurentPoly::one());
    for _ in 0..len {
        let k = rng.random_range(-2i64..=2);
        m = pool[rng.random_range(0..pool.len())].unit_twist(k).mul(&m);
    }
    m
}

pub fn int_matrix(rows: &[&[i64]]) -> Mat<BigInt> {
    Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
}

pub fn poly_matrix(rows: Vec<Vec<LaurentPoly>>) -> Mat<LaurentPoly> {
    Mat::from_rows(rows)
}
