//! The rank-two construction: from a strictly convex planar configuration to
//! a positive semidefinite rank-2 Gram matrix.
//!
//! The chain of objects is
//!
//! * `P` — column `i` is the linear dependency among `w_{i−1}, w_i, w_{i+1}`
//!   (cyclically, with the antipodal sign flip at the wrap), scaled so
//!   `P_ii = 1`;
//! * `Q` — the dual matrix whose column `i` is orthogonal to every
//!   dependency, with `Q_ii = 1` and off-diagonal entries bounded by `ε_i`;
//! * `Λ` — a positive diagonal making `PΛ` symmetric;
//! * `Q′ = (Q + Qᵀ)/2`, which at the optimum is PSD of rank two.
//!
//! Indices are 0-based; the neighbour below `w_0` is `−w_{n−1}` and the
//! neighbour above `w_{n−1}` is `−w_0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::duality::{dualize, max_offdiag};
use crate::error::{Error, Result, StageExt};
use crate::geometry::{cross, is_strictly_convex_antipodal, nullspace_of_config, PointConfig};
use crate::numerics::{numeric_rank, symmetric_eigen, LinExpr, LpBuilder, LpSolution, Mat, Sense, Tolerances};

/// Entries of `P` off the cyclic tridiagonal pattern must be below this.
pub const SUPPORT_TOL: f64 = 1e-8;

/// The regular configuration `w_k = (cos kπ/n, sin kπ/n)`, `k = 0..n`.
pub fn optimal_config(n: usize) -> Result<PointConfig> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 lines, got {n}")));
    }
    let angles: Vec<f64> = (0..n).map(|k| k as f64 * PI / n as f64).collect();
    PointConfig::from_angles(&angles)
}

/// `P` together with its off-diagonal bands.
///
/// `a[i] = P[i][i+1]` and `b[i] = P[i+1][i]` for `i < n−1`; the corners are
/// `a[n−1] = P[n−1][0]` and `b[n−1] = P[0][n−1]`. For a valid structure the
/// interior bands are negative and the corners positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PStruct {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: Mat,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// `Al_i` of column `i`, i.e. `1 / Σ_{j≠i} |P_ji|`.
    pub eps_per_index: Vec<f64>,
}

fn in_pattern(n: usize, i: usize, j: usize) -> bool {
    i == j || (i + 1) % n == j || (j + 1) % n == i
}

impl PStruct {
    /// Extracts the bands from `p` and validates the unit diagonal, cyclic
    /// tridiagonal support and sign pattern.
    pub fn from_matrix(p: Mat, tol: &Tolerances) -> Result<Self> {
        if !p.is_square() {
            return Err(Error::dim(format!("P is {}x{}", p.rows(), p.cols())));
        }
        let n = p.rows();
        if n < 3 {
            return Err(Error::input(format!("P needs n >= 3, got {n}")));
        }
        for i in 0..n {
            if (p[(i, i)] - 1.0).abs() > tol.residual_tol {
                return Err(Error::Structure(format!("P[{i}][{i}] = {} is not 1", p[(i, i)])));
            }
        }
        let support = support_residual(&p);
        if support >= SUPPORT_TOL {
            return Err(Error::Structure(format!(
                "P has an entry {support:e} outside the cyclic tridiagonal pattern"
            )));
        }
        let a: Vec<f64> = (0..n).map(|i| p[(i, (i + 1) % n)]).collect();
        let b: Vec<f64> = (0..n).map(|i| p[((i + 1) % n, i)]).collect();
        for i in 0..n {
            let corner = i == n - 1;
            let ok = |x: f64| if corner { x > 0.0 } else { x < 0.0 };
            if !ok(a[i]) || !ok(b[i]) {
                return Err(Error::Structure(format!(
                    "sign pattern violated at band {i}: a = {}, b = {} (expected {})",
                    a[i],
                    b[i],
                    if corner { "both positive" } else { "both negative" }
                )));
            }
        }
        let eps_per_index = (0..n)
            .map(|i| {
                let s: f64 = (0..n).filter(|&j| j != i).map(|j| p[(j, i)].abs()).sum();
                1.0 / s
            })
            .collect();
        Ok(Self {
            n,
            p,
            a,
            b,
            eps_per_index,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps_per_index.iter().copied().fold(0.0, f64::max)
    }
}

fn support_residual(p: &Mat) -> f64 {
    let n = p.rows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !in_pattern(n, i, j) {
                r = r.max(p[(i, j)].abs());
            }
        }
    }
    r
}

/// Cyclic neighbours of `i` as `(index, sign)`: the point below and above
/// `w_i` on the antipodal ring.
fn neighbours(n: usize, i: usize) -> ((usize, f64), (usize, f64)) {
    let prev = if i == 0 { (n - 1, -1.0) } else { (i - 1, 1.0) };
    let next = if i == n - 1 { (0, -1.0) } else { (i + 1, 1.0) };
    (prev, next)
}

/// Builds `P` by writing each `w_i` as a combination of its two ring
/// neighbours.
pub fn p_matrix(s: &PointConfig, tol: &Tolerances) -> Result<PStruct> {
    let w = s
        .planar_points()
        .ok_or_else(|| Error::input("P needs a planar configuration"))?;
    let n = w.len();
    if n < 3 {
        return Err(Error::input(format!("P needs n >= 3, got {n}")));
    }
    if !s.is_normalized() {
        return Err(Error::input("configuration must be antipodally normalized"));
    }
    if !is_strictly_convex_antipodal(s, tol) {
        return Err(Error::Structure("configuration is not strictly convex".into()));
    }
    let scaled = |(k, sign): (usize, f64)| [w[k][0] * sign, w[k][1] * sign];
    let mut p = Mat::identity(n);
    for i in 0..n {
        let (pv, nx) = neighbours(n, i);
        let (prev, next) = (scaled(pv), scaled(nx));
        let det = cross(prev, next);
        let scale = (prev[0].hypot(prev[1]) * next[0].hypot(next[1])).max(f64::MIN_POSITIVE);
        if det.abs() <= 1e-14 * scale {
            return Err(Error::Singular(format!("neighbours of point {i} are parallel")));
        }
        let mu_prev = cross(w[i], next) / det;
        let mu_next = cross(prev, w[i]) / det;
        p[(pv.0, i)] = -mu_prev * pv.1;
        p[(nx.0, i)] = -mu_next * nx.1;
    }
    PStruct::from_matrix(p, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaRoute {
    /// `λ_{i+1} = λ_i b_i / a_i` around the cycle.
    Propagation,
    /// Positive kernel weights from a feasibility LP.
    Farkas,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    /// Positive weights normalized so the smallest is 1.
    pub lambda: Vec<f64>,
    /// Relative mismatch when the propagation returns to its start.
    pub cycle_residual: f64,
    pub route: LambdaRoute,
}

/// Finds a positive diagonal `Λ` with `PΛ` symmetric on the band pattern.
///
/// Propagation is tried first; when the cycle does not close, the LP over
/// `{q_i p_iᵀ}` is used, which needs `Q`.
pub fn lambda_matrix(p: &PStruct, q: Option<&Mat>, tol: &Tolerances) -> Result<LambdaResult> {
    let n = p.n;
    let mut lambda = vec![1.0; n];
    for i in 0..n - 1 {
        lambda[i + 1] = lambda[i] * p.b[i] / p.a[i];
    }
    let closing = lambda[n - 1] * p.b[n - 1] / p.a[n - 1];
    let cycle_residual = (closing - 1.0).abs();
    if cycle_residual <= tol.residual_tol && lambda.iter().all(|&l| l > 0.0 && l.is_finite()) {
        return Ok(LambdaResult {
            lambda: normalize_min_one(lambda),
            cycle_residual,
            route: LambdaRoute::Propagation,
        });
    }
    let q = q.ok_or_else(|| {
        Error::Structure(format!(
            "no positive Λ (input not optimal): cycle residual {cycle_residual:e} and no Q for the fallback"
        ))
    })?;
    if q.rows() != n || q.cols() != n {
        return Err(Error::dim(format!("Q is {}x{}, P is {n}x{n}", q.rows(), q.cols())));
    }
    let ms: Vec<Mat> = (0..n)
        .map(|i| {
            let mut m = Mat::zeros(n, n);
            for r in 0..n {
                for c in 0..n {
                    m[(r, c)] = q[(r, i)] * p.p[(c, i)];
                }
            }
            m
        })
        .collect();
    let lambda = positive_kernel_weights(&ms, tol).map_err(|e| match e {
        Error::Infeasible(msg) => Error::Structure(format!("no positive Λ (input not optimal): {msg}")),
        e => e,
    })?;
    Ok(LambdaResult {
        lambda,
        cycle_residual,
        route: LambdaRoute::Farkas,
    })
}

fn normalize_min_one(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::INFINITY, f64::min);
    v.iter_mut().for_each(|x| *x /= m);
    v
}

/// Positive `λ` (normalized to `min λ = 1`) with `Σ λ_i m_i = 0`.
///
/// Solved as: minimize `Σ λ_i` subject to `λ ≥ 1` and the entrywise
/// equalities. Scaling makes `λ ≥ 1` equivalent to `λ > 0`.
pub fn positive_kernel_weights(ms: &[Mat], tol: &Tolerances) -> Result<Vec<f64>> {
    let first = ms.first().ok_or_else(|| Error::input("no matrices given"))?;
    let (r, c) = (first.rows(), first.cols());
    if ms.iter().any(|m| m.rows() != r || m.cols() != c) {
        return Err(Error::dim("matrices differ in shape"));
    }
    let scale = ms.iter().map(Mat::max_abs).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut lp = LpBuilder::new();
    let lam: Vec<_> = ms.iter().map(|_| lp.var(1.0, f64::INFINITY, 1.0)).collect();
    for row in 0..r {
        for col in 0..c {
            let terms: Vec<_> = lam
                .iter()
                .zip(ms)
                .filter(|(_, m)| m[(row, col)] != 0.0)
                .map(|(&v, m)| (v, m[(row, col)] / scale))
                .collect();
            if !terms.is_empty() {
                lp.constrain(LinExpr(terms), Sense::Eq, 0.0);
            }
        }
    }
    match lp.solve(tol)? {
        LpSolution::Optimal { values, .. } => {
            Ok(normalize_min_one(lam.iter().map(|v| values[v.0]).collect()))
        }
        LpSolution::Infeasible { infeasibility } => Err(Error::Infeasible(format!(
            "no positive combination vanishes (phase-one residual {infeasibility:e})"
        ))),
        LpSolution::Unbounded { .. } => {
            Err(Error::Internal("positive weight program unbounded below".into()))
        }
    }
}

/// The dual matrix `Q`, whose column `i` is the optimal dual row for index
/// `i`. Checks that on the support of `P`, `Q_ij = −sign(P_ij) ε_j`.
pub fn q_from_config(s: &PointConfig, tol: &Tolerances) -> Result<Mat> {
    let p = p_matrix(s, tol)?;
    let cert = dualize(&nullspace_of_config(s, tol)?, tol)?;
    let q = cert.g.transpose();
    let n = p.n;
    for j in 0..n {
        for i in 0..n {
            let pij = p.p[(i, j)];
            if i == j || pij == 0.0 {
                continue;
            }
            let want = -pij.signum() * p.eps_per_index[j];
            if (q[(i, j)] - want).abs() > tol.residual_tol {
                return Err(Error::Structure(format!(
                    "Q[{i}][{j}] = {} but the support of P forces {want}",
                    q[(i, j)]
                )));
            }
        }
    }
    Ok(q)
}

/// Everything derived from `Q`, `P` and `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symmetrization {
    /// `‖PΛ − (PΛ)ᵀ‖_∞`
    pub pl_symmetry: f64,
    /// `‖Qᵀ PΛ‖_∞`
    pub annihilation_left: f64,
    /// `‖PΛ Qᵀ‖_∞`
    pub annihilation_right: f64,
    pub pl_rank: usize,
    pub eigenvalues: Vec<f64>,
    pub psd: bool,
    pub q_prime_rank: usize,
    pub trace: f64,
    pub q_prime_offdiag: f64,
    #[serde(rename = "PL")]
    pub pl: Mat,
    #[serde(rename = "Q_prime")]
    pub q_prime: Mat,
}

pub fn symmetrize(q: &Mat, p: &PStruct, lambda: &[f64], tol: &Tolerances) -> Result<Symmetrization> {
    let n = p.n;
    if q.rows() != n || q.cols() != n || lambda.len() != n {
        return Err(Error::dim(format!(
            "Q is {}x{}, Λ has {} entries, P is {n}x{n}",
            q.rows(),
            q.cols(),
            lambda.len()
        )));
    }
    let pl = p.p.matmul(&Mat::diag(lambda))?;
    let qt = q.transpose();
    let q_prime = q.symmetric_part()?;
    let eig = symmetric_eigen(&q_prime, tol)?;
    let trace = q_prime.trace();
    let psd = eig.values[0] >= -tol.psd_tol * trace.abs().max(1.0);
    Ok(Symmetrization {
        pl_symmetry: pl.symmetry_residual(),
        annihilation_left: qt.matmul(&pl)?.max_abs(),
        annihilation_right: pl.matmul(&qt)?.max_abs(),
        pl_rank: numeric_rank(&pl, tol),
        eigenvalues: eig.values,
        psd,
        q_prime_rank: numeric_rank(&q_prime, tol),
        trace,
        q_prime_offdiag: max_offdiag(&q_prime),
        pl,
        q_prime,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Residuals {
    pub p_support: f64,
    pub lambda_cycle: f64,
    pub pl_symmetry: f64,
    /// The larger of `‖QᵀPΛ‖_∞` and `‖PΛQᵀ‖_∞`.
    pub annihilation: f64,
    /// `|tr Q′ − n|`
    pub trace: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rank2Report {
    pub n: usize,
    pub eps: f64,
    pub residuals: Rank2Residuals,
    pub pl_rank: usize,
    pub eigenvalues: Vec<f64>,
    pub psd: bool,
    pub q_prime_rank: usize,
    pub q_prime_offdiag: f64,
    pub lambda_route: LambdaRoute,
    /// Names of residuals above `residual_tol`.
    pub breaches: Vec<String>,
    /// Set by [`rank2_pipeline`]: `eps = cos(π/n)` within 1e-9 and `Q′` PSD.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verified: Option<bool>,
    #[serde(rename = "S")]
    pub config: PointConfig,
    #[serde(rename = "P")]
    pub p: PStruct,
    #[serde(rename = "Lambda")]
    pub lambda: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Mat,
    #[serde(rename = "Q_prime")]
    pub q_prime: Mat,
}

/// Runs the whole construction on a given configuration.
pub fn rank2_report(s: &PointConfig, tol: &Tolerances) -> Result<Rank2Report> {
    let p = p_matrix(s, tol).stage("p_matrix")?;
    let q = q_from_config(s, tol).stage("q_from_config")?;
    let lam = lambda_matrix(&p, Some(&q), tol).stage("lambda_matrix")?;
    let sym = symmetrize(&q, &p, &lam.lambda, tol).stage("symmetrize")?;
    Ok(assemble(s.clone(), p, q, lam, sym, tol))
}

fn assemble(
    config: PointConfig,
    p: PStruct,
    q: Mat,
    lam: LambdaResult,
    sym: Symmetrization,
    tol: &Tolerances,
) -> Rank2Report {
    let n = p.n;
    let pl_scale = sym.pl.max_abs().max(1.0);
    let residuals = Rank2Residuals {
        p_support: support_residual(&p.p),
        lambda_cycle: if lam.route == LambdaRoute::Propagation {
            lam.cycle_residual
        } else {
            0.0
        },
        pl_symmetry: sym.pl_symmetry,
        annihilation: sym.annihilation_left.max(sym.annihilation_right),
        trace: (sym.trace - n as f64).abs(),
    };
    let mut breaches = Vec::new();
    let checks = [
        ("p_support", residuals.p_support, SUPPORT_TOL),
        ("pl_symmetry", residuals.pl_symmetry, tol.residual_tol * pl_scale),
        ("annihilation", residuals.annihilation, tol.residual_tol * pl_scale),
        ("trace", residuals.trace, tol.residual_tol * n as f64),
    ];
    for (name, value, limit) in checks {
        if value > limit {
            breaches.push(name.to_string());
        }
    }
    if sym.pl_rank + 2 < n {
        breaches.push("pl_rank".to_string());
    }
    if sym.q_prime_rank > 2 {
        breaches.push("q_prime_rank".to_string());
    }
    Rank2Report {
        n,
        eps: p.eps(),
        residuals,
        pl_rank: sym.pl_rank,
        eigenvalues: sym.eigenvalues,
        psd: sym.psd,
        q_prime_rank: sym.q_prime_rank,
        q_prime_offdiag: sym.q_prime_offdiag,
        lambda_route: lam.route,
        breaches,
        verified: None,
        config,
        p,
        lambda: lam.lambda,
        q,
        q_prime: sym.q_prime,
    }
}

/// The construction on the regular configuration of `n` lines.
pub fn rank2_pipeline(n: usize, tol: &Tolerances) -> Result<Rank2Report> {
    if n < 3 {
        return Err(Error::input(format!("the rank-2 pipeline needs n >= 3, got {n}")));
    }
    let s = optimal_config(n).stage("optimal_config")?;
    let mut report = rank2_report(&s, tol)?;
    let target = (PI / n as f64).cos();
    report.verified = Some((report.eps - target).abs() <= 1e-9 && report.psd);
    Ok(report)
}
