//! Integer homology of Heegaard manifolds and of the cyclic covers
//! presented by `B_q`, with torsion growth scans.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::mahler::{self, log_abs, MahlerError, MahlerResult};
use crate::matrix::{CMat, Mat};
use crate::ring::{cyclotomic, CycElem, LaurentPoly, RingError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomologyError {
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("root index {j} is not coprime to q = {q}")]
    NonPrimitiveRoot { j: i64, q: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("empty range of cover degrees")]
    EmptyRange,
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Mahler(#[from] MahlerError),
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | …`, all `d_i >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmithDecomposition {
    pub u: Mat<BigInt>,
    pub v: Mat<BigInt>,
    pub d: Mat<BigInt>,
}

impl SmithDecomposition {
    /// Diagonal entries `d_1, …, d_{min(m, n)}`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.invariant_factors().iter().filter(|d| !d.is_zero()).count()
    }

    /// Rank of the cokernel.
    pub fn corank(&self) -> usize {
        self.d.rows() - self.rank()
    }

    /// Order of the torsion subgroup of the cokernel.
    pub fn torsion(&self) -> BigInt {
        self.invariant_factors()
            .into_iter()
            .filter(|d| !d.is_zero())
            .fold(BigInt::one(), |acc, d| acc * d)
    }
}

/// `(q, r)` with `a = q b + r` and `|r| <= |b| / 2`.
fn nearest_div(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    let (mut q, mut r) = a.div_mod_floor(b);
    let twice: BigInt = &r * 2;
    if twice.abs() > b.abs() {
        r -= b;
        q += 1;
    }
    (q, r)
}

/// Dense Smith normal form with transforms; pivots of minimal absolute
/// value.
pub fn smith_normal_form(a: &Mat<BigInt>) -> SmithDecomposition {
    let (m, n) = a.shape();
    let one = BigInt::one();
    let mut d: Vec<Vec<BigInt>> = a.row_vecs();
    let mut u: Vec<Vec<BigInt>> = Mat::identity(m, &one).row_vecs();
    let mut v: Vec<Vec<BigInt>> = Mat::identity(n, &one).row_vecs();

    let swap_cols = |x: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in x.iter_mut() {
            row.swap(i, j);
        }
    };
    // row_i -= q row_p
    let row_axpy = |x: &mut Vec<Vec<BigInt>>, i: usize, p: usize, q: &BigInt| {
        let (src, dst) = if i < p {
            let (lo, hi) = x.split_at_mut(p);
            (&hi[0], &mut lo[i])
        } else {
            let (lo, hi) = x.split_at_mut(i);
            (&lo[p], &mut hi[0])
        };
        for (dv, sv) in dst.iter_mut().zip(src.iter()) {
            if !sv.is_zero() {
                *dv -= q * sv;
            }
        }
    };
    // col_j -= q col_p
    let col_axpy = |x: &mut Vec<Vec<BigInt>>, j: usize, p: usize, q: &BigInt| {
        for row in x.iter_mut() {
            if !row[p].is_zero() {
                let s = q * &row[p];
                row[j] -= s;
            }
        }
    };

    for t in 0..m.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap(t, bi);
        u.swap(t, bi);
        swap_cols(&mut d, t, bj);
        swap_cols(&mut v, t, bj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if !d[i][t].is_zero() {
                    let (q, _) = nearest_div(&d[i][t], &d[t][t]);
                    row_axpy(&mut d, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                    clean &= d[i][t].is_zero();
                }
            }
            for j in t + 1..n {
                if !d[t][j].is_zero() {
                    let (q, _) = nearest_div(&d[t][j], &d[t][t]);
                    col_axpy(&mut d, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                    clean &= d[t][j].is_zero();
                }
            }
            if !clean {
                // bring the smallest remainder in row or column t to the pivot
                let mut pos = (t, t);
                for i in t + 1..m {
                    if !d[i][t].is_zero() && d[i][t].abs() < d[pos.0][pos.1].abs() {
                        pos = (i, t);
                    }
                }
                for j in t + 1..n {
                    if !d[t][j].is_zero() && d[t][j].abs() < d[pos.0][pos.1].abs() {
                        pos = (t, j);
                    }
                }
                if pos.0 != t {
                    d.swap(t, pos.0);
                    u.swap(t, pos.0);
                } else if pos.1 != t {
                    swap_cols(&mut d, t, pos.1);
                    swap_cols(&mut v, t, pos.1);
                }
                continue;
            }
            let p = d[t][t].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut d, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }
    SmithDecomposition {
        u: Mat::from_rows(u),
        v: Mat::from_rows(v),
        d: Mat::from_rows(d),
    }
}

/// Sparse elimination to a diagonal form without transforms.
///
/// Returns the nonzero diagonal entries (absolute values, not yet a
/// divisibility chain). Their product is the torsion order of the cokernel
/// and their count is the rank.
pub fn diagonal_entries(a: &Mat<BigInt>) -> Vec<BigInt> {
    let (m, n) = a.shape();
    let mut rows: Vec<HashMap<usize, BigInt>> = vec![HashMap::new(); m];
    let mut cols: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for i in 0..m {
        for j in 0..n {
            let x = &a[(i, j)];
            if !x.is_zero() {
                rows[i].insert(j, x.clone());
                cols[j].insert(i);
            }
        }
    }
    let mut diag = Vec::new();
    loop {
        // sparsest nonempty column
        let Some(mut c) = (0..n)
            .filter(|&j| !cols[j].is_empty())
            .min_by_key(|&j| (cols[j].len(), j))
        else {
            break;
        };
        loop {
            let r = *cols[c]
                .iter()
                .min_by(|&&x, &&y| {
                    let ax = rows[x][&c].abs();
                    let ay = rows[y][&c].abs();
                    ax.cmp(&ay).then(rows[x].len().cmp(&rows[y].len())).then(x.cmp(&y))
                })
                .unwrap();
            let p = rows[r][&c].clone();
            let mut others: Vec<usize> = cols[c].iter().copied().filter(|&i| i != r).collect();
            others.sort_unstable();
            let mut remainder = false;
            if !others.is_empty() {
                let pivot_row: Vec<(usize, BigInt)> = rows[r].iter().map(|(k, v)| (*k, v.clone())).collect();
                for i in others {
                    let (q, rem) = nearest_div(&rows[i][&c], &p);
                    for (k, v) in &pivot_row {
                        let entry = rows[i].entry(*k).or_insert_with(BigInt::zero);
                        *entry -= &q * v;
                        if entry.is_zero() {
                            rows[i].remove(k);
                            cols[*k].remove(&i);
                        } else {
                            cols[*k].insert(i);
                        }
                    }
                    remainder |= !rem.is_zero();
                }
            }
            if remainder {
                continue;
            }
            // column c holds only row r; clear the rest of row r with
            // column operations, which only touch row r
            let mut row_cols: Vec<usize> = rows[r].keys().copied().filter(|&k| k != c).collect();
            row_cols.sort_unstable();
            let mut smaller = None;
            for j in row_cols {
                let (_, rem) = nearest_div(&rows[r][&j], &p);
                if rem.is_zero() {
                    rows[r].remove(&j);
                    cols[j].remove(&r);
                } else {
                    rows[r].insert(j, rem);
                    if smaller.is_none() {
                        smaller = Some(j);
                    }
                }
            }
            if let Some(j) = smaller {
                c = j;
                continue;
            }
            diag.push(p.abs());
            rows[r].clear();
            cols[c].clear();
            break;
        }
    }
    diag
}

/// Rearrange nonzero diagonal entries into a divisibility chain.
pub fn normalize_chain(mut d: Vec<BigInt>) -> Vec<BigInt> {
    d.retain(|x| !x.is_one());
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            if d[j].is_multiple_of(&d[i]) {
                continue;
            }
            let g = d[i].gcd(&d[j]);
            let l = &d[i] / &g * &d[j];
            d[i] = g;
            d[j] = l;
        }
    }
    d.sort();
    d
}

/// Torsion order, cokernel rank and invariant factors of an integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokernelSummary {
    pub rank: usize,
    pub betti: usize,
    pub torsion: BigInt,
    /// Nontrivial invariant factors (`> 1`), ascending.
    pub torsion_factors: Vec<BigInt>,
}

pub fn cokernel(a: &Mat<BigInt>) -> CokernelSummary {
    let diag = diagonal_entries(a);
    let torsion = diag.iter().fold(BigInt::one(), |acc, d| acc * d);
    CokernelSummary {
        rank: diag.len(),
        betti: a.rows() - diag.len(),
        torsion,
        torsion_factors: normalize_chain(diag),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub q: usize,
    #[serde(with = "crate::mahler::bigint_string")]
    pub torsion_order: BigInt,
    pub betti: usize,
    pub log_torsion_over_q: f64,
    /// Free rank contributed by the two summands of the surface homology
    /// outside the presented part.
    pub free_offset: usize,
}

/// Integer matrix of `Bq` acting on `Z[Z/q]^{g-1}`: each entry replaced by
/// its `q x q` circulant.
pub fn block_circulant(bq: &Mat<CycElem>) -> Mat<BigInt> {
    let (h, w) = bq.shape();
    let q = bq.iter().next().map(|c| c.modulus()).unwrap_or(1);
    let mut out = Mat::filled(h * q, w * q, BigInt::zero());
    for bi in 0..h {
        for bj in 0..w {
            let block = bq[(bi, bj)].circulant_expand();
            for i in 0..q {
                for j in 0..q {
                    let x = &block[(i, j)];
                    if !x.is_zero() {
                        out[(bi * q + i, bj * q + j)] = x.clone();
                    }
                }
            }
        }
    }
    out
}

/// Homology of the `q`-fold cover presented by `Bq`.
pub fn cover_homology(bq: &Mat<CycElem>) -> TorsionReport {
    let q = bq.iter().next().map(|c| c.modulus()).unwrap_or(1);
    let summary = cokernel(&block_circulant(bq));
    TorsionReport {
        q,
        log_torsion_over_q: log_abs(&summary.torsion) / q as f64,
        torsion_order: summary.torsion,
        betti: summary.betti,
        free_offset: 2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// `m(det B) > 0`: torsion grows exponentially at that rate.
    Positive,
    /// `det B` is a nonzero product of cyclotomics and monomials.
    ZeroMeasure,
    /// `det B = 0`; the growth rate is undefined.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthScan {
    pub verdict: GrowthVerdict,
    pub determinant: LaurentPoly,
    pub mahler: Option<MahlerResult>,
    pub reports: Vec<TorsionReport>,
    /// `log_torsion_over_q - m(det B)` per report (empty when degenerate).
    pub deviations: Vec<f64>,
    pub window: usize,
    /// Mean of `|deviation|` over the last `window` reports.
    pub last_window_mad: Option<f64>,
}

impl GrowthScan {
    /// `|deviation|` is non-increasing over the last `window` reports, up
    /// to float noise of `1e-12`.
    pub fn tail_decreasing(&self) -> bool {
        let k = self.window.min(self.deviations.len());
        let tail = &self.deviations[self.deviations.len() - k..];
        tail.windows(2).all(|w| w[1].abs() <= w[0].abs() + 1e-12)
    }
}

/// Window used for tail diagnostics in [`growth_scan`].
pub const GROWTH_WINDOW: usize = 5;

/// Torsion of the covers for each `q` in `qs`, compared with the Mahler
/// measure of `det B_inf`.
pub fn growth_scan(b_inf: &Mat<LaurentPoly>, qs: &[usize]) -> Result<GrowthScan, HomologyError> {
    if qs.is_empty() {
        return Err(HomologyError::EmptyRange);
    }
    if !b_inf.is_square() || b_inf.rows() == 0 {
        return Err(HomologyError::Shape("B must be square and nonempty".into()));
    }
    if qs.contains(&0) {
        return Err(RingError::InvalidModulus.into());
    }
    let determinant = b_inf.det();
    let reports: Vec<TorsionReport> = qs
        .par_iter()
        .map(|&q| b_inf.try_map(|p| p.reduce_mod_q(q)).map(|bq| cover_homology(&bq)))
        .collect::<Result<_, _>>()?;
    let (verdict, mahler) = if determinant.is_zero() {
        (GrowthVerdict::Degenerate, None)
    } else {
        let m = mahler::mahler_measure(&determinant, mahler::DEFAULT_TOL)?;
        let v = if m.method == mahler::MahlerMethod::KroneckerExactZero {
            GrowthVerdict::ZeroMeasure
        } else {
            GrowthVerdict::Positive
        };
        (v, Some(m))
    };
    let deviations: Vec<f64> = match &mahler {
        Some(m) => reports.iter().map(|r| r.log_torsion_over_q - m.log_measure).collect(),
        None => Vec::new(),
    };
    let window = GROWTH_WINDOW;
    let last_window_mad = if deviations.is_empty() {
        None
    } else {
        let k = window.min(deviations.len());
        let tail = &deviations[deviations.len() - k..];
        Some(tail.iter().map(|d| d.abs()).sum::<f64>() / k as f64)
    };
    Ok(GrowthScan {
        verdict,
        determinant,
        mahler,
        reports,
        deviations,
        window,
        last_window_mad,
    })
}

// ---------------------------------------------------------------------------
// Heegaard splittings
// ---------------------------------------------------------------------------

/// Standard symplectic form of size `2g` over the integers.
pub fn symplectic_form(g: usize) -> Mat<BigInt> {
    let one = BigInt::one();
    let mut j = Mat::filled(2 * g, 2 * g, BigInt::zero());
    for i in 0..g {
        j[(i, g + i)] = one.clone();
        j[(g + i, i)] = -&one;
    }
    j
}

pub fn is_symplectic(phi: &Mat<BigInt>) -> bool {
    if !phi.is_square() || !phi.rows().is_multiple_of(2) || phi.rows() == 0 {
        return false;
    }
    let j = symplectic_form(phi.rows() / 2);
    phi.transpose().mul(&j).mul(phi) == j
}

/// Integer symplectic transvection `x -> x + r ⟨x, v⟩ v`.
pub fn symplectic_transvection(v: &[BigInt], r: &BigInt) -> Mat<BigInt> {
    let n = v.len();
    assert!(n.is_multiple_of(2) && n > 0);
    let g = n / 2;
    let w: Vec<BigInt> = (0..n).map(|i| if i < g { v[g + i].clone() } else { -&v[i - g] }).collect();
    let mut m = Mat::identity(n, &BigInt::one());
    for i in 0..n {
        for j in 0..n {
            let x = r * &v[i] * &w[j];
            if !x.is_zero() {
                m[(i, j)] += x;
            }
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeegaardReport {
    pub betti: usize,
    #[serde(with = "crate::mahler::bigint_string")]
    pub torsion: BigInt,
    /// Invariant factors of the presentation, ascending, zeros last.
    #[serde(with = "bigint_vec_string")]
    pub factors: Vec<BigInt>,
    /// `|det B|` for the bottom-left `g x g` block.
    #[serde(with = "crate::mahler::bigint_string")]
    pub det_b_abs: BigInt,
    /// Whether the torsion order equals `|det B|`; only meaningful when
    /// `det B != 0`.
    pub det_agrees: Option<bool>,
}

/// Homology of the closed 3-manifold glued from two handlebodies along a
/// mapping class acting on `H_1(S)` by `phi_star`.
pub fn heegaard_homology(phi_star: &Mat<BigInt>) -> Result<HeegaardReport, HomologyError> {
    if !is_symplectic(phi_star) {
        return Err(HomologyError::NotSymplectic);
    }
    let n = phi_star.rows();
    let g = n / 2;
    let mut pres = Mat::filled(n, n, BigInt::zero());
    for i in 0..g {
        pres[(i, i)] = BigInt::one();
    }
    for i in 0..n {
        for j in 0..g {
            pres[(i, g + j)] = phi_star[(i, j)].clone();
        }
    }
    let snf = smith_normal_form(&pres);
    let mut factors = snf.invariant_factors();
    factors.sort_by(|a, b| match (a.is_zero(), b.is_zero()) {
        (true, false) => std::cmp::Ordering::Greater,
        (false, true) => std::cmp::Ordering::Less,
        _ => a.cmp(b),
    });
    let torsion = snf.torsion();
    let det_b_abs = phi_star.submatrix(g, 0, g, g).det().abs();
    let det_agrees = if det_b_abs.is_zero() {
        None
    } else {
        Some(det_b_abs == torsion)
    };
    Ok(HeegaardReport {
        betti: snf.corank(),
        torsion,
        factors,
        det_b_abs,
        det_agrees,
    })
}

// ---------------------------------------------------------------------------
// Betti increase criterion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettiIncrease {
    /// `ι(det Bq) = 0`, decided exactly.
    pub increases: bool,
    /// `det Bq` lifted to exponents `0..q`.
    pub determinant: LaurentPoly,
    /// Numerical cross-check: `ι(Bq)` is singular (smallest singular value
    /// below `1e-9` times the largest).
    pub numeric_singular: bool,
    pub smallest_singular_value: f64,
}

/// Exact test of `ι(det Bq) = 0` at `exp(2 pi i j / q)` via divisibility
/// of the lifted determinant by `Φ_q`.
pub fn betti_increase_check(bq: &Mat<CycElem>, root_index: i64) -> Result<BettiIncrease, HomologyError> {
    if !bq.is_square() || bq.rows() == 0 {
        return Err(HomologyError::Shape("B must be square and nonempty".into()));
    }
    let q = bq[(0, 0)].modulus();
    if (root_index.rem_euclid(q as i64)).gcd(&(q as i64)) != 1 {
        return Err(HomologyError::NonPrimitiveRoot { j: root_index, q });
    }
    let det = bq.det().lift();
    let increases = det.is_zero() || det.div_exact(&cyclotomic(q as u64)).is_some();
    let img: CMat = crate::hermitian::iota_matrix(bq, root_index).map_err(|e| match e {
        crate::hermitian::HermitianError::NonPrimitiveRoot { j, q } => HomologyError::NonPrimitiveRoot { j, q },
        other => HomologyError::Shape(other.to_string()),
    })?;
    let sv = img.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    Ok(BettiIncrease {
        increases,
        determinant: det,
        numeric_singular: smin <= 1e-9 * smax.max(1.0),
        smallest_singular_value: smin,
    })
}

mod bigint_vec_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Mat<BigInt> {
        Mat::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn snf_examples() {
        let s = smith_normal_form(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.invariant_factors(), big(&[1, 6]));
        let a = m(&[&[2, 0], &[0, 3]]);
        assert_eq!(s.u.mul(&a).mul(&s.v), s.d);

        let s = smith_normal_form(&m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
        assert_eq!(s.invariant_factors(), big(&[1, 1, 1]));

        let s = smith_normal_form(&m(&[&[0, 0, 0], &[0, 0, 0]]));
        assert_eq!(s.invariant_factors(), big(&[0, 0]));
        assert_eq!(s.corank(), 2);
    }

    #[test]
    fn sparse_diagonal_matches_dense() {
        let a = m(&[&[4, 6, 2], &[6, 9, 3], &[2, 3, 7]]);
        let s = smith_normal_form(&a);
        let c = cokernel(&a);
        assert_eq!(c.torsion, s.torsion());
        assert_eq!(c.betti, s.corank());
        let nontrivial: Vec<BigInt> = s.invariant_factors().into_iter().filter(|d| *d > BigInt::one()).collect();
        assert_eq!(c.torsion_factors, nontrivial);
    }

    #[test]
    fn cover_homology_examples() {
        let id = Mat::identity(2, &CycElem::one(5));
        let r = cover_homology(&id);
        assert_eq!((r.torsion_order.clone(), r.betti), (BigInt::one(), 0));

        let b = Mat::from_rows(vec![vec![LaurentPoly::from_coeffs(0, &[-2, 1]).reduce_mod_q(4).unwrap()]]);
        let r = cover_homology(&b);
        assert_eq!((r.torsion_order.clone(), r.betti), (BigInt::from(15), 0));

        let b = Mat::from_rows(vec![vec![LaurentPoly::from_coeffs(0, &[-1, 1]).reduce_mod_q(3).unwrap()]]);
        let r = cover_homology(&b);
        assert_eq!((r.torsion_order.clone(), r.betti), (BigInt::one(), 1));
        assert_eq!(r.free_offset, 2);
    }

    #[test]
    fn growth_examples() {
        let b = Mat::from_rows(vec![vec![LaurentPoly::from_coeffs(0, &[-2, 1])]]);
        let qs: Vec<usize> = (1..=100).collect();
        let scan = growth_scan(&b, &qs).unwrap();
        assert_eq!(scan.verdict, GrowthVerdict::Positive);
        assert!(scan.deviations.last().unwrap().abs() < 0.01);
        // closed form 2^q - 1
        for r in &scan.reports {
            assert_eq!(r.torsion_order, (BigInt::one() << r.q) - 1);
        }

        let c = Mat::from_rows(vec![vec![cyclotomic(5)]]);
        let scan = growth_scan(&c, &[7, 11, 13]).unwrap();
        assert_eq!(scan.verdict, GrowthVerdict::ZeroMeasure);

        let z = Mat::filled(2, 2, LaurentPoly::zero());
        let scan = growth_scan(&z, &[3, 4]).unwrap();
        assert_eq!(scan.verdict, GrowthVerdict::Degenerate);
        assert!(scan.deviations.is_empty());
        assert_eq!(scan.reports[0].betti, 6);
    }

    #[test]
    fn heegaard_examples() {
        let id = Mat::identity(6, &BigInt::one());
        let r = heegaard_homology(&id).unwrap();
        assert_eq!((r.betti, r.torsion.clone()), (3, BigInt::one()));
        assert_eq!(r.det_agrees, None);

        let r = heegaard_homology(&m(&[&[1, 0], &[2, 1]])).unwrap();
        assert_eq!((r.betti, r.torsion.clone()), (0, BigInt::from(2)));
        assert_eq!(r.det_agrees, Some(true));

        // block upper triangular: [[A, B], [0, C]] preserves L
        let phi = m(&[&[1, 0, 1, 2], &[0, 1, 2, 5], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        assert!(is_symplectic(&phi));
        assert_eq!(heegaard_homology(&phi).unwrap().betti, 2);

        assert_eq!(heegaard_homology(&m(&[&[2, 0], &[0, 1]])), Err(HomologyError::NotSymplectic));
    }

    #[test]
    fn betti_increase_examples() {
        let id = Mat::identity(2, &CycElem::one(3));
        assert!(!betti_increase_check(&id, 1).unwrap().increases);

        let tm1 = LaurentPoly::from_coeffs(0, &[-1, 1]).reduce_mod_q(3).unwrap();
        let b = Mat::from_rows(vec![vec![tm1.clone(), CycElem::zero(3)], vec![CycElem::zero(3), tm1]]);
        let r = betti_increase_check(&b, 1).unwrap();
        assert!(!r.increases);
        assert!(!r.numeric_singular);

        let b = Mat::from_rows(vec![vec![CycElem::zero(3), CycElem::one(3)], vec![CycElem::zero(3), CycElem::one(3)]]);
        assert!(betti_increase_check(&b, 1).unwrap().increases);

        // 1 + t + t^2 vanishes at primitive cube roots
        let c = Mat::from_rows(vec![vec![LaurentPoly::from_coeffs(0, &[1, 1, 1]).reduce_mod_q(3).unwrap()]]);
        let r = betti_increase_check(&c, 2).unwrap();
        assert!(r.increases && r.numeric_singular);

        assert!(matches!(betti_increase_check(&id, 3), Err(HomologyError::NonPrimitiveRoot { .. })));
    }
}
