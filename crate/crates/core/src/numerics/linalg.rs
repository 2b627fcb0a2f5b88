use super::mat::{dot, Mat};
use super::Tolerances;
use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `M V = U diag(s)`, with `V` square and
/// orthogonal and singular values sorted descending.
///
/// Columns of `u` belonging to zero singular values are left at zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(m: &Mat) -> Svd {
    let (rows, cols) = (m.rows(), m.cols());
    // Work column-major: w[j] is column j of M V.
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut u = Mat::zeros(rows, cols);
    let mut vm = Mat::zeros(cols, cols);
    let mut s = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > 0.0 {
            for i in 0..rows {
                u[(i, k)] = w[j][i] / norms[j];
            }
        }
        for i in 0..cols {
            vm[(i, k)] = v[j][i];
        }
    }
    Svd { u, s, v: vm }
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).s
}

/// Cutoff below which a singular value is treated as zero: relative to the
/// largest singular value, with an absolute floor of `rank_tol`.
pub fn rank_threshold(s: &[f64], tol: &Tolerances) -> f64 {
    let largest = s.first().copied().unwrap_or(0.0);
    tol.rank_tol * largest.max(1.0)
}

pub fn numeric_rank(m: &Mat, tol: &Tolerances) -> usize {
    let s = singular_values(m);
    let cut = rank_threshold(&s, tol);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis for the column span of `m`.
pub fn orthonormal_basis(m: &Mat, tol: &Tolerances) -> Result<Mat> {
    let dec = svd(m);
    let cut = rank_threshold(&dec.s, tol);
    let rank = dec.s.iter().filter(|&&x| x > cut).count();
    if rank == 0 {
        return Err(Error::input("cannot build a basis from a zero matrix"));
    }
    let mut cols: Vec<Vec<f64>> = (0..rank).map(|j| dec.u.col(j)).collect();
    reorthonormalize(&mut cols);
    Mat::from_cols(&cols)
}

/// Orthonormal basis of `{x : M x = 0}`; may have zero columns.
pub fn nullspace(m: &Mat, tol: &Tolerances) -> Mat {
    let dec = svd(m);
    let cut = rank_threshold(&dec.s, tol);
    let rank = dec.s.iter().filter(|&&x| x > cut).count();
    let n = m.cols();
    let mut cols: Vec<Vec<f64>> = (rank..n).map(|j| dec.v.col(j)).collect();
    reorthonormalize(&mut cols);
    let mut out = Mat::zeros(n.max(1), cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            out[(i, j)] = x;
        }
    }
    out
}

/// One pass of modified Gram-Schmidt over vectors that are already close to
/// orthonormal.
fn reorthonormalize(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj = dot(&done[k], &rest[0]);
            for (x, y) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * y;
            }
        }
        let n = dot(&cols[j], &cols[j]).sqrt();
        if n > 0.0 {
            cols[j].iter_mut().for_each(|x| *x /= n);
        }
    }
}

/// Spectrum and eigenvectors of a symmetric matrix, eigenvalues ascending.
/// Column `k` of `vectors` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Cyclic Jacobi eigenvalue iteration.
pub fn symmetric_eigen(m: &Mat, tol: &Tolerances) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let asym = m.symmetry_residual();
    if asym > tol.residual_tol * m.max_abs().max(1.0) {
        return Err(Error::input(format!(
            "matrix is not symmetric (residual {asym:e})"
        )));
    }
    let n = m.rows();
    let mut a = m.symmetric_part()?;
    let mut v = Mat::identity(n);
    let scale = a.max_abs();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= f64::EPSILON * scale * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].total_cmp(&a[(y, y)]));
    let values = order.iter().map(|&k| a[(k, k)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

pub fn symmetric_eigenvalues(m: &Mat, tol: &Tolerances) -> Result<Vec<f64>> {
    symmetric_eigen(m, tol).map(|e| e.values)
}

/// Solves the square system `a x = b` by Gaussian elimination with partial
/// pivoting.
pub fn lu_solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    if !a.is_square() || b.len() != n {
        return Err(Error::dim(format!(
            "cannot solve {}x{} system with rhs of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[(i, k)].abs().total_cmp(&m[(j, k)].abs()))
            .unwrap_or(k);
        if m[(piv, k)].abs() <= 1e-14 * scale {
            return Err(Error::Singular(format!("pivot {k} vanishes")));
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = tmp;
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[(k, j)] * x[j]).sum();
        x[k] = (x[k] - s) / m[(k, k)];
    }
    Ok(x)
}
