//! Low-rank unit-diagonal certificates.
//!
//! Given a subspace `A ⊂ R^n` of dimension `n − d` whose alignments are all
//! finite, row `i` of the certificate is a vector `v` orthogonal to `A` with
//! `v_i = 1` and `|v_j| ≤ t` for `j ≠ i`, where `t` is as small as possible.
//! Finding that row is a Chebyshev-norm linear program; its optimum equals
//! `Al_i(A)`. Stacking the rows gives a matrix of rank at most `d` with unit
//! diagonal that annihilates `A`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::Subspace;
use crate::error::{Error, Result};
use crate::numerics::{
    rank_threshold, singular_values, symmetric_eigen, LinExpr, LpBuilder, LpSolution, Mat, Sense,
    Tolerances,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Dualized,
    Searched,
    #[default]
    Constructed,
}

/// Residuals recorded at construction time. Verification never trusts them;
/// it recomputes everything from `G`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// max |G_ii − 1|
    pub diag: f64,
    /// max_{i≠j} |G_ij| − eps
    pub offdiag: f64,
    /// The (d+1)-th singular value of G.
    pub rank: f64,
    /// max ‖G b‖_∞ over basis vectors b of the annihilated subspace, when
    /// one is known.
    pub annihilation: Option<f64>,
}

/// A matrix witnessing `off(n, d) ≤ eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffCertificate {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    #[serde(rename = "G")]
    pub g: Mat,
    #[serde(default)]
    pub source: Source,
    #[serde(default)]
    pub residuals: Residuals,
}

impl OffCertificate {
    /// Wraps an arbitrary square matrix, taking `eps` as its largest
    /// off-diagonal magnitude.
    pub fn from_matrix(g: Mat, d: usize, source: Source) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::dim(format!("certificate matrix is {}x{}", g.rows(), g.cols())));
        }
        let n = g.rows();
        let eps = max_offdiag(&g);
        let residuals = Residuals {
            diag: diag_residual(&g),
            offdiag: 0.0,
            rank: singular_value_after(&g, d),
            annihilation: None,
        };
        Ok(Self {
            n,
            d,
            eps,
            g,
            source,
            residuals,
        })
    }
}

pub(crate) fn max_offdiag(g: &Mat) -> f64 {
    let n = g.rows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..g.cols() {
            if i != j {
                m = m.max(g[(i, j)].abs());
            }
        }
    }
    m
}

fn diag_residual(g: &Mat) -> f64 {
    (0..g.rows().min(g.cols()))
        .map(|i| (g[(i, i)] - 1.0).abs())
        .fold(0.0, f64::max)
}

/// The (d+1)-th largest singular value, or zero when `d ≥ n`.
fn singular_value_after(g: &Mat, d: usize) -> f64 {
    singular_values(g).get(d).copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    pub v: Vec<f64>,
    pub t: f64,
}

/// Minimize `t` subject to `v_i = 1`, `|v_j| ≤ t` (`j ≠ i`) and `Bᵀ v = 0`.
pub fn dual_row(a: &Subspace, i: usize, tol: &Tolerances) -> Result<DualRow> {
    let n = a.ambient();
    if i >= n {
        return Err(Error::input(format!("index {i} out of range for R^{n}")));
    }
    let b = a.basis();
    let mut lp = LpBuilder::new();
    let t = lp.nonneg(1.0);
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let v: Vec<_> = others.iter().map(|_| lp.free(0.0)).collect();
    for &vj in &v {
        lp.abs_le(&vj.into(), &t.into());
    }
    for col in 0..a.dim() {
        let row = LinExpr(
            others
                .iter()
                .zip(&v)
                .map(|(&j, &vj)| (vj, b[(j, col)]))
                .collect(),
        );
        lp.constrain(row, Sense::Eq, -b[(i, col)]);
    }
    match lp.solve(tol)? {
        LpSolution::Optimal { values, .. } => {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            for (&j, vj) in others.iter().zip(&v) {
                row[j] = values[vj.0];
            }
            // Report the realized bound rather than the solver's t.
            let t = others.iter().map(|&j| row[j].abs()).fold(0.0, f64::max);
            Ok(DualRow { v: row, t })
        }
        LpSolution::Infeasible { .. } => Err(Error::InfiniteAlignment { index: i }),
        LpSolution::Unbounded { .. } => Err(Error::Internal(
            "dual row program unbounded although t >= 0".into(),
        )),
    }
}

/// Assembles the certificate from the `n` dual rows and re-checks it.
pub fn dualize(a: &Subspace, tol: &Tolerances) -> Result<OffCertificate> {
    let n = a.ambient();
    let rows = (0..n)
        .into_par_iter()
        .map(|i| dual_row(a, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let g = Mat::from_rows(&rows.iter().map(|r| r.v.clone()).collect::<Vec<_>>())?;
    let d = n - a.dim();

    let annihilation = if a.dim() == 0 {
        0.0
    } else {
        g.matmul(a.basis())?.max_abs()
    };
    if annihilation > tol.residual_tol * g.max_abs().max(1.0) {
        return Err(Error::Internal(format!(
            "dual rows fail to annihilate the subspace (residual {annihilation:e})"
        )));
    }
    let s = singular_values(&g);
    let rank_res = s.get(d).copied().unwrap_or(0.0);
    if rank_res > rank_threshold(&s, tol) {
        return Err(Error::Internal(format!(
            "dualized matrix has rank above {d} (σ_{} = {rank_res:e})",
            d + 1
        )));
    }
    let eps = rows.iter().map(|r| r.t).fold(0.0, f64::max);
    Ok(OffCertificate {
        n,
        d,
        eps,
        residuals: Residuals {
            diag: diag_residual(&g),
            offdiag: max_offdiag(&g) - eps,
            rank: rank_res,
            annihilation: Some(annihilation),
        },
        g,
        source: Source::Dualized,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            passed: measured <= threshold,
        }
    }

    fn at_least(name: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            measured,
            threshold,
            passed: measured >= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn off_checks(c: &OffCertificate, tol: &Tolerances) -> Vec<Check> {
    let g = &c.g;
    let shape_ok = g.is_square() && g.rows() == c.n;
    let mut checks = vec![Check {
        name: "shape".into(),
        measured: g.rows() as f64,
        threshold: c.n as f64,
        passed: shape_ok,
    }];
    checks.push(Check::at_most("unit diagonal", diag_residual(g), tol.residual_tol));
    checks.push(Check::at_most(
        "off-diagonal bound",
        max_offdiag(g),
        c.eps + tol.residual_tol,
    ));
    let s = singular_values(g);
    checks.push(Check::at_most(
        "rank",
        s.get(c.d).copied().unwrap_or(0.0),
        rank_threshold(&s, tol),
    ));
    checks
}

/// Re-checks unit diagonal, the off-diagonal bound and `rank ≤ d` from the
/// raw matrix.
pub fn verify_off_certificate(c: &OffCertificate, tol: &Tolerances) -> VerificationReport {
    VerificationReport::from_checks(off_checks(c, tol))
}

/// A Gram matrix of `n` unit vectors in `R^d`, witnessing `θ(n, d) ≤ eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCertificate {
    #[serde(flatten)]
    pub off: OffCertificate,
    pub smallest_eigenvalue: f64,
    /// `d × n`, with `G = Uᵀ U`.
    #[serde(rename = "U")]
    pub u: Mat,
}

impl ThetaCertificate {
    /// Factors the symmetric part of the certificate matrix through its `d`
    /// largest eigenpairs (negative eigenvalues are clipped to zero).
    pub fn from_off(off: OffCertificate, tol: &Tolerances) -> Result<Self> {
        let sym = off.g.symmetric_part()?;
        let eig = symmetric_eigen(&sym, tol)?;
        let n = off.n;
        let d = off.d.min(n);
        let mut u = Mat::zeros(d.max(1), n);
        for r in 0..d {
            let k = n - 1 - r;
            let scale = eig.values[k].max(0.0).sqrt();
            for j in 0..n {
                u[(r, j)] = scale * eig.vectors[(j, k)];
            }
        }
        Ok(Self {
            smallest_eigenvalue: eig.values[0],
            off,
            u,
        })
    }
}

/// Off-certificate checks plus symmetry, positive semidefiniteness, the Gram
/// factorization and unit-length vectors.
pub fn verify_theta_certificate(c: &ThetaCertificate, tol: &Tolerances) -> VerificationReport {
    let mut checks = off_checks(&c.off, tol);
    let g = &c.off.g;
    checks.push(Check::at_most("symmetry", g.symmetry_residual(), tol.residual_tol));
    let trace = g.trace().abs().max(1.0);
    let smallest = g
        .symmetric_part()
        .ok()
        .and_then(|s| symmetric_eigen(&s, tol).ok())
        .map_or(f64::NEG_INFINITY, |e| e.values[0]);
    checks.push(Check::at_least("psd", smallest, -tol.psd_tol * trace));
    let fact = c
        .u
        .transpose()
        .matmul(&c.u)
        .and_then(|utu| utu.sub(g))
        .map_or(f64::INFINITY, |r| r.max_abs());
    checks.push(Check::at_most("gram factorization", fact, tol.residual_tol));
    let col_defect = (0..c.u.cols())
        .map(|j| {
            let len: f64 = c.u.col(j).iter().map(|x| x * x).sum::<f64>().sqrt();
            (len - 1.0).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::at_most("unit vectors", col_defect, tol.residual_tol));
    VerificationReport::from_checks(checks)
}
