//! Small dense helpers on top of nalgebra. Everything is real arithmetic:
//! Hermitian matrices `R + iS` are handled through their real embedding.

use alloc::vec::Vec;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

pub type Mat = DMatrix<f64>;

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_eigenvalue(m: &Mat) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Real representation `[[R, -S], [S, R]]` of the Hermitian matrix `R + iS`.
///
/// Its spectrum is that of `R + iS` with every multiplicity doubled.
pub fn real_embed(r: &Mat, s: &Mat) -> Result<Mat> {
    if !r.is_square() || r.shape() != s.shape() {
        return Err(invalid!(
            "real_embed: shapes {:?} and {:?} do not match",
            r.shape(),
            s.shape()
        ));
    }
    let d = r.nrows();
    let mut out = Mat::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(r);
    out.view_mut((d, d), (d, d)).copy_from(r);
    out.view_mut((d, 0), (d, d)).copy_from(s);
    out.view_mut((0, d), (d, d)).copy_from(&(-s));
    Ok(out)
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b))
}

pub fn asymmetry(m: &Mat) -> f64 {
    max_abs_diff(m, &m.transpose())
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[&Mat]) -> Mat {
    let d: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(d, d);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

/// Principal submatrix on the given index list, in that order.
pub fn submatrix(m: &Mat, idx: &[usize]) -> Mat {
    Mat::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Cluster sorted values into (value, multiplicity) groups.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((_, count, sum)) if (v - *sum / *count as f64).abs() <= tol => {
                *count += 1;
                *sum += v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter()
        .map(|(_, c, s)| (s / c as f64, c))
        .collect()
}
