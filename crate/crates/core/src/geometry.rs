//! Point configurations `S = {s_1, …, s_n} ⊂ R^d \ {0}`, the symmetric hull
//! `H(S) = {Σ λ_j s_j : Σ |λ_j| ≤ 1}` and the values
//! `α_i(S) = max { r : r s_i ∈ H(S \ {s_i}) }`.
//!
//! For `d = 2` the crate works with configurations normalized so that all
//! direction angles lie in `[0, π)` in increasing order, and uses the cyclic
//! convention that the neighbour of `w_1` below is `-w_n` and the neighbour
//! of `w_n` above is `-w_1`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::Subspace;
use crate::error::{Error, Result};
use crate::numerics::{nullspace, LinExpr, LpBuilder, LpSolution, Mat, Sense, Tolerances};

/// Minimum angular separation between two directions, and between the last
/// direction and the antipode of the first, for strict convexity.
pub const ANGLE_TOL: f64 = 1e-12;

/// Coefficients whose magnitude falls below this are reported as exact zeros.
const STRUCTURAL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    d: usize,
    points: Vec<Vec<f64>>,
    /// Direction angles in `[0, 2π)` when `d = 2`.
    angles: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ConfigFile {
    d: usize,
    points: Vec<Vec<f64>>,
}

impl Serialize for PointConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConfigFile {
            d: self.d,
            points: self.points.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = ConfigFile::deserialize(d)?;
        PointConfig::new(f.d, f.points).map_err(serde::de::Error::custom)
    }
}

impl PointConfig {
    pub fn new(d: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension d must be at least 1"));
        }
        if points.is_empty() {
            return Err(Error::input("configuration has no points"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(Error::dim(format!(
                    "point {i} has {} coordinates, expected {d}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("point {i} has a non-finite coordinate")));
            }
            if p.iter().all(|&x| x == 0.0) {
                return Err(Error::input(format!("point {i} is the zero vector")));
            }
        }
        let angles = (d == 2).then(|| points.iter().map(|p| direction_angle(p[0], p[1])).collect());
        Ok(Self { d, points, angles })
    }

    /// Planar configuration from `(x, y)` pairs.
    pub fn planar(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(2, points.iter().map(|p| p.to_vec()).collect())
    }

    /// Unit vectors at the given angles.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(2, angles.iter().map(|t| vec![t.cos(), t.sin()]).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn angles(&self) -> Option<&[f64]> {
        self.angles.as_deref()
    }

    /// The `d × n` matrix with the points as columns.
    pub fn matrix(&self) -> Mat {
        Mat::from_cols(&self.points).expect("points are validated on construction")
    }

    pub(crate) fn planar_points(&self) -> Option<Vec<[f64; 2]>> {
        (self.d == 2).then(|| self.points.iter().map(|p| [p[0], p[1]]).collect())
    }

    /// True for a planar configuration whose angles lie in `[0, π)` in
    /// non-decreasing order.
    pub fn is_normalized(&self) -> bool {
        match &self.angles {
            Some(a) => a.iter().all(|&t| t < PI) && a.windows(2).all(|w| w[0] <= w[1]),
            None => false,
        }
    }

    /// Copy with point `i` multiplied by `factor`.
    pub fn with_scaled_point(&self, i: usize, factor: f64) -> Result<Self> {
        let mut pts = self.points.clone();
        pts[i].iter_mut().for_each(|x| *x *= factor);
        Self::new(self.d, pts)
    }
}

/// Angle of `(x, y)` in `[0, 2π)`.
fn direction_angle(x: f64, y: f64) -> f64 {
    let t = y.atan2(x);
    // `+ 0.0` turns -0.0 into 0.0.
    if t < 0.0 {
        t + 2.0 * PI
    } else {
        t + 0.0
    }
}

pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// `α_i` with the linear combination that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub index: usize,
    pub value: f64,
    /// Dense over all `n` points; entry `index` is zero.
    pub witness: Vec<f64>,
}

impl AlphaCertificate {
    /// `‖r s_i − Σ λ_j s_j‖_∞` and `Σ |λ_j|`.
    pub fn residuals(&self, s: &PointConfig) -> (f64, f64) {
        let mut diff: Vec<f64> = s.point(self.index).iter().map(|x| x * self.value).collect();
        for (j, &l) in self.witness.iter().enumerate() {
            for (k, x) in s.point(j).iter().enumerate() {
                diff[k] -= l * x;
            }
        }
        let res = diff.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let l1 = self.witness.iter().map(|x| x.abs()).sum();
        (res, l1)
    }
}

/// `α_i(S)` by linear programming: maximize `r` subject to
/// `r s_i = Σ_{j≠i} λ_j s_j` and `Σ |λ_j| ≤ 1`.
pub fn alpha_index(s: &PointConfig, i: usize, tol: &Tolerances) -> Result<AlphaCertificate> {
    let n = s.len();
    if n < 2 {
        return Err(Error::input("alpha needs at least two points"));
    }
    if i >= n {
        return Err(Error::input(format!("index {i} out of range for {n} points")));
    }
    let mut lp = LpBuilder::new();
    let r = lp.free(-1.0);
    let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    let lambda: Vec<_> = others.iter().map(|_| lp.free(0.0)).collect();
    for k in 0..s.dim() {
        let mut row = LinExpr::new().term(r, s.point(i)[k]);
        for (&j, &l) in others.iter().zip(&lambda) {
            row.push(l, -s.point(j)[k]);
        }
        lp.constrain(row, Sense::Eq, 0.0);
    }
    let parts: Vec<LinExpr> = lambda.iter().map(|&l| l.into()).collect();
    lp.l1_le(&parts, 1.0);

    match lp.solve(tol)? {
        LpSolution::Optimal { values, .. } => {
            let mut witness = vec![0.0; n];
            for (&j, l) in others.iter().zip(&lambda) {
                let v = values[l.0];
                witness[j] = if v.abs() < STRUCTURAL_ZERO { 0.0 } else { v };
            }
            Ok(AlphaCertificate {
                index: i,
                value: values[r.0].max(0.0),
                witness,
            })
        }
        LpSolution::Unbounded { .. } => Err(Error::Internal(
            "alpha program reported unbounded over a bounded region".into(),
        )),
        LpSolution::Infeasible { .. } => Err(Error::Internal(
            "alpha program reported infeasible although r = 0 is feasible".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub values: Vec<f64>,
    pub max: f64,
    pub certificates: Vec<AlphaCertificate>,
}

/// All `α_i(S)` and their maximum. The per-index programs run in parallel
/// and are collected in index order.
pub fn alpha_all(s: &PointConfig, tol: &Tolerances) -> Result<AlphaTable> {
    let certificates = (0..s.len())
        .into_par_iter()
        .map(|i| alpha_index(s, i, tol))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = certificates.iter().map(|c| c.value).collect();
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok(AlphaTable {
        values,
        max,
        certificates,
    })
}

/// All `α_i` of a planar configuration without linear programming.
///
/// `1 / α_i` is the least `Σ |λ_j|` with `Σ λ_j s_j = s_i`; a minimizer can
/// always be taken with at most two nonzero coefficients, so it suffices to
/// try every single parallel vector and every independent pair.
pub fn alpha_planar(s: &PointConfig) -> Result<Vec<f64>> {
    let pts = s
        .planar_points()
        .ok_or_else(|| Error::input("planar alpha needs d = 2"))?;
    Ok(alpha_planar_points(&pts))
}

pub(crate) fn alpha_planar_points(pts: &[[f64; 2]]) -> Vec<f64> {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let target = pts[i];
            let mut best = f64::INFINITY;
            for j in (0..n).filter(|&j| j != i) {
                let pj = pts[j];
                let nj = pj[0] * pj[0] + pj[1] * pj[1];
                if cross(pj, target).abs() <= 1e-14 * nj.sqrt() * norm2(target) {
                    let c = (pj[0] * target[0] + pj[1] * target[1]) / nj;
                    best = best.min(c.abs());
                }
                for k in (j + 1..n).filter(|&k| k != i) {
                    let pk = pts[k];
                    let det = cross(pj, pk);
                    if det.abs() <= 1e-14 * nj.sqrt() * norm2(pk) {
                        continue;
                    }
                    let a = cross(target, pk) / det;
                    let b = cross(pj, target) / det;
                    best = best.min(a.abs() + b.abs());
                }
            }
            if best.is_finite() && best > 0.0 {
                1.0 / best
            } else {
                0.0
            }
        })
        .collect()
}

fn norm2(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

/// Replaces every planar vector with angle in `[π, 2π)` by its negative and
/// sorts by angle. `perm[k]` is the original index of the `k`-th output point.
pub fn normalize_antipodal_with_perm(s: &PointConfig) -> Result<(PointConfig, Vec<usize>)> {
    let angles = s
        .angles()
        .ok_or_else(|| Error::input("antipodal normalization needs d = 2"))?;
    let mut items: Vec<(f64, usize, Vec<f64>)> = s
        .points()
        .iter()
        .zip(angles)
        .enumerate()
        .map(|(i, (p, &t))| {
            if t >= PI {
                let q: Vec<f64> = p.iter().map(|x| -x + 0.0).collect();
                (direction_angle(q[0], q[1]), i, q)
            } else {
                (t, i, p.clone())
            }
        })
        .collect();
    // A flipped vector at angle exactly π lands on 0 and may round to just
    // below 2π; fold that back.
    for it in &mut items {
        if it.0 >= PI {
            it.0 -= PI;
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let perm = items.iter().map(|it| it.1).collect();
    let pts = items.into_iter().map(|it| it.2).collect();
    Ok((PointConfig::new(2, pts)?, perm))
}

pub fn normalize_antipodal(s: &PointConfig) -> Result<PointConfig> {
    normalize_antipodal_with_perm(s).map(|(c, _)| c)
}

/// Whether `w_1, …, w_n, −w_1, …, −w_n` are, in this cyclic order, the
/// vertices of a strictly convex polygon with no two directions parallel.
pub fn is_strictly_convex_antipodal(s: &PointConfig, _tol: &Tolerances) -> bool {
    if !s.is_normalized() || s.len() < 2 {
        return false;
    }
    let a = s.angles().expect("normalized implies planar");
    if a.windows(2).any(|w| w[1] - w[0] <= ANGLE_TOL) {
        return false;
    }
    if a[0] + PI - a[a.len() - 1] <= ANGLE_TOL {
        return false;
    }
    let pts = s.planar_points().expect("planar");
    let ring: Vec<[f64; 2]> = pts
        .iter()
        .copied()
        .chain(pts.iter().map(|p| [-p[0], -p[1]]))
        .collect();
    let m = ring.len();
    (0..m).all(|k| {
        let (p, q, r) = (ring[k], ring[(k + 1) % m], ring[(k + 2) % m]);
        cross([q[0] - p[0], q[1] - p[1]], [r[0] - q[0], r[1] - q[1]]) > 0.0
    })
}

/// Subspace of linear dependencies `{a : Σ a_i s_i = 0}`.
pub fn nullspace_of_config(s: &PointConfig, tol: &Tolerances) -> Result<Subspace> {
    let basis = nullspace(&s.matrix(), tol);
    Subspace::from_orthonormal(s.len(), basis, tol)
}

/// Vertices of the polygon `H(S \ {s_i})` in counter-clockwise order, for
/// external plotting.
pub fn hull_polygon(s: &PointConfig, i: usize) -> Result<Vec<[f64; 2]>> {
    let pts = s
        .planar_points()
        .ok_or_else(|| Error::input("hull polygon needs d = 2"))?;
    if i >= pts.len() {
        return Err(Error::input(format!("index {i} out of range")));
    }
    let mut cloud: Vec<[f64; 2]> = pts
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .flat_map(|(_, p)| [*p, [-p[0], -p[1]]])
        .collect();
    cloud.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    cloud.dedup();
    if cloud.len() < 3 {
        return Ok(cloud);
    }
    // Andrew's monotone chain.
    let turn = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| cross([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(cloud.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(cloud.iter())
        } else {
            Box::new(cloud.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    Ok(hull)
}

/// A random normalized strictly convex antipodal configuration of `n ≥ 2`
/// vectors: points on a random centred ellipse with a little radial jitter,
/// redrawn until strictly convex.
pub fn random_strictly_convex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PointConfig> {
    if n < 2 {
        return Err(Error::input("need at least two vectors"));
    }
    let tol = Tolerances::default();
    loop {
        let (ax, ay) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let rot: f64 = rng.gen_range(0.0..PI);
        let jitter = rng.gen_range(0.0..0.05);
        let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..PI)).collect();
        t.sort_by(f64::total_cmp);
        let pts: Vec<[f64; 2]> = t
            .iter()
            .map(|&t| {
                let r = 1.0 + jitter * rng.gen_range(-1.0..1.0);
                let (x, y) = (r * ax * t.cos(), r * ay * t.sin());
                [x * rot.cos() - y * rot.sin(), x * rot.sin() + y * rot.cos()]
            })
            .collect();
        let s = normalize_antipodal(&PointConfig::planar(&pts)?)?;
        let gaps_ok = s.angles().expect("planar").windows(2).all(|w| w[1] - w[0] > 1e-3);
        if gaps_ok && is_strictly_convex_antipodal(&s, &tol) {
            return Ok(s);
        }
    }
}
