//! Alignment of vectors and subspaces.
//!
//! For `a ≠ 0`, `Al_i(a) = |a_i| / Σ_{j≠i} |a_j|` (infinite when the
//! denominator vanishes). For a subspace, `Al_i(A)` is the maximum over its
//! nonzero vectors and `Al(A) = max_i Al_i(A)`. The maximum is computed as a
//! linear program over the coordinates of a basis: maximize `(Bc)_i` subject
//! to `Σ_{j≠i} |(Bc)_j| ≤ 1`. Since `A = −A`, the mirrored sign needs no
//! separate program.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::numerics::{
    max_abs, numeric_rank, orthonormal_basis, LinExpr, LpBuilder, LpSolution, Mat, Tolerances,
};

/// Non-negative real or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    /// IEEE view, mapping `Infinite` to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

/// Finite values are JSON numbers, `+∞` is the string `"inf"`.
impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) if x.is_finite() && x >= 0.0 => Ok(ExtReal::Finite(x)),
            Raw::Text(t) if t == "inf" => Ok(ExtReal::Infinite),
            _ => Err(serde::de::Error::custom(
                "expected a non-negative number or \"inf\"",
            )),
        }
    }
}

/// A subspace of `R^n` held through an orthonormal basis (`n × k`, `k` may
/// be zero for the trivial subspace).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    n: usize,
    basis: Mat,
}

#[derive(Serialize, Deserialize)]
struct SubspaceFile {
    n: usize,
    /// Spanning vectors, one per inner array.
    basis: Vec<Vec<f64>>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceFile {
            n: self.n,
            basis: (0..self.dim()).map(|j| self.basis.col(j)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SubspaceFile::deserialize(d)?;
        Subspace::from_spanning(f.n, &f.basis, &Tolerances::default())
            .map_err(serde::de::Error::custom)
    }
}

impl Subspace {
    /// Canonicalizes any spanning set into an orthonormal basis.
    pub fn from_spanning<V: AsRef<[f64]>>(n: usize, vectors: &[V], tol: &Tolerances) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("ambient dimension must be positive"));
        }
        if vectors.is_empty() {
            return Err(Error::input("subspace needs at least one spanning vector"));
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.as_ref().len() != n {
                return Err(Error::dim(format!(
                    "spanning vector {j} has length {}, expected {n}",
                    v.as_ref().len()
                )));
            }
        }
        let m = Mat::from_cols(vectors)?;
        Ok(Self {
            n,
            basis: orthonormal_basis(&m, tol)?,
        })
    }

    /// Wraps a basis that is already orthonormal (checked at `residual_tol`).
    pub fn from_orthonormal(n: usize, basis: Mat, tol: &Tolerances) -> Result<Self> {
        if basis.rows() != n && basis.cols() > 0 {
            return Err(Error::dim(format!("basis has {} rows, expected {n}", basis.rows())));
        }
        if basis.cols() > n {
            return Err(Error::dim(format!("{} basis vectors in R^{n}", basis.cols())));
        }
        if basis.cols() > 0 {
            let defect = basis
                .transpose()
                .matmul(&basis)?
                .sub(&Mat::identity(basis.cols()))?
                .max_abs();
            if defect > tol.residual_tol {
                return Err(Error::input(format!("basis is not orthonormal (defect {defect:e})")));
            }
        }
        let basis = if basis.cols() == 0 { Mat::zeros(n, 0) } else { basis };
        Ok(Self { n, basis })
    }

    /// Column span of `m` (an `n × k` matrix).
    pub fn column_span(m: &Mat, tol: &Tolerances) -> Result<Self> {
        Ok(Self {
            n: m.rows(),
            basis: orthonormal_basis(m, tol)?,
        })
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Distance from `v` to the subspace, in the max norm.
    pub fn residual_of(&self, v: &[f64]) -> f64 {
        let coeffs: Vec<f64> = (0..self.dim())
            .map(|j| (0..self.n).map(|i| self.basis[(i, j)] * v[i]).sum())
            .collect();
        (0..self.n)
            .map(|i| {
                let proj: f64 = (0..self.dim()).map(|j| self.basis[(i, j)] * coeffs[j]).sum();
                (v[i] - proj).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `Al_i(a)`.
pub fn align_index_vector(a: &[f64], i: usize) -> Result<ExtReal> {
    if i >= a.len() {
        return Err(Error::input(format!("index {i} out of range for length {}", a.len())));
    }
    if a.iter().all(|&x| x == 0.0) {
        return Err(Error::input("alignment of the zero vector is undefined"));
    }
    let rest: f64 = a
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, x)| x.abs())
        .sum();
    Ok(if rest == 0.0 {
        ExtReal::Infinite
    } else {
        ExtReal::Finite(a[i].abs() / rest)
    })
}

/// `Al_i(A)` with a maximizing vector of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentCertificate {
    /// Zero-based coordinate index.
    pub index: usize,
    pub value: ExtReal,
    /// Nonzero vector of the subspace attaining `value`, scaled to unit
    /// max-norm.
    pub witness: Vec<f64>,
}

pub fn align_index_subspace(
    a: &Subspace,
    i: usize,
    tol: &Tolerances,
) -> Result<AlignmentCertificate> {
    let n = a.ambient();
    let k = a.dim();
    if i >= n {
        return Err(Error::input(format!("index {i} out of range for R^{n}")));
    }
    if k == 0 {
        return Err(Error::input("the trivial subspace has no nonzero vectors"));
    }
    let b = a.basis();
    let mut lp = LpBuilder::new();
    let c: Vec<_> = (0..k).map(|j| lp.free(-b[(i, j)])).collect();
    let coords: Vec<LinExpr> = (0..n)
        .filter(|&r| r != i)
        .map(|r| LinExpr((0..k).map(|j| (c[j], b[(r, j)])).collect()))
        .collect();
    lp.l1_le(&coords, 1.0);

    let combine = |coef: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|r| (0..k).map(|j| b[(r, j)] * coef[j]).sum())
            .collect()
    };

    let (value, raw) = match lp.solve(tol)? {
        LpSolution::Optimal { objective, values } => {
            (ExtReal::Finite((-objective).max(0.0)), combine(&values[..k]))
        }
        LpSolution::Unbounded { ray } => (ExtReal::Infinite, combine(&ray[..k])),
        LpSolution::Infeasible { .. } => {
            return Err(Error::Internal(
                "alignment program infeasible although c = 0 is feasible".into(),
            ))
        }
    };

    // When the optimum is zero the program may return c = 0; every vector
    // of A then has a zero i-th coordinate and any basis vector witnesses it.
    let raw = if max_abs(&raw) < 1e-12 { b.col(0) } else { raw };
    let scale = max_abs(&raw);
    let witness = raw.iter().map(|x| x / scale).collect();
    Ok(AlignmentCertificate {
        index: i,
        value,
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTable {
    pub value: ExtReal,
    pub certificates: Vec<AlignmentCertificate>,
}

/// `Al(A)` with one certificate per index, computed in parallel and
/// collected in index order.
pub fn align_subspace(a: &Subspace, tol: &Tolerances) -> Result<AlignmentTable> {
    let certificates = (0..a.ambient())
        .into_par_iter()
        .map(|i| align_index_subspace(a, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let value = certificates
        .iter()
        .map(|c| c.value)
        .fold(ExtReal::Finite(0.0), ExtReal::max);
    Ok(AlignmentTable {
        value,
        certificates,
    })
}

/// `(1 + 1/align) / n`; infinite alignment gives `1/n`.
pub fn sl_from_align(n: usize, align: ExtReal) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    match align {
        ExtReal::Infinite => Ok(1.0 / n as f64),
        ExtReal::Finite(x) if x > 0.0 => Ok((1.0 + 1.0 / x) / n as f64),
        ExtReal::Finite(x) => Err(Error::input(format!(
            "alignment must be positive, got {x}"
        ))),
    }
}

/// `1 / (n·sl − 1)`.
pub fn off_from_sl(n: usize, sl: f64) -> Result<f64> {
    let denom = n as f64 * sl - 1.0;
    if !(denom > 0.0) {
        return Err(Error::input(format!("need n·sl > 1, got n = {n}, sl = {sl}")));
    }
    Ok(1.0 / denom)
}

/// `L(μ)` for the uniform distribution over the points of `x` (vectors in
/// `R^k`), computed through the alignment of the image of
/// `v ↦ (⟨v, x_1⟩, …, ⟨v, x_n⟩)`.
pub fn script_l_uniform(x: &PointConfig, tol: &Tolerances) -> Result<f64> {
    let n = x.len();
    let k = x.dim();
    let rows = Mat::from_rows(x.points())?;
    if numeric_rank(&rows, tol) < k {
        return Err(Error::input(format!("the {n} vectors do not span R^{k}")));
    }
    let image = Subspace::column_span(&rows, tol)?;
    sl_from_align(n, align_subspace(&image, tol)?.value)
}
