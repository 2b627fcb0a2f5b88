//! Slow, independent re-computations used to cross-check the LP-based
//! routines on small inputs.
//!
//! Nothing here calls the simplex solver, the hull code in `geometry`, or the
//! alignment routines; agreement with them is therefore evidence rather than
//! a tautology.

use serde::{Deserialize, Serialize};

use crate::alignment::Subspace;
use crate::error::{Error, Result};
use crate::geometry::PointConfig;
use crate::numerics::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Initial samples per angular coordinate.
    pub samples: usize,
    /// Zoom refinement stops once the local step is below this (radians).
    pub resolution: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            samples: 360,
            resolution: 1e-10,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.samples < 3 {
            return Err(Error::Input(format!("grid needs at least 3 samples, got {}", self.samples)));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Input("grid resolution must be positive".into()));
        }
        Ok(())
    }
}

fn det2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Convex hull by Graham scan around the lowest-then-leftmost point.
/// Collinear boundary points are dropped.
fn graham(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let pivot_idx = (0..pts.len())
        .min_by(|&a, &b| {
            pts[a][1]
                .partial_cmp(&pts[b][1])
                .unwrap()
                .then(pts[a][0].partial_cmp(&pts[b][0]).unwrap())
        })
        .unwrap();
    let pivot = pts.swap_remove(pivot_idx);
    pts.retain(|p| *p != pivot);
    pts.sort_by(|a, b| {
        let (da, db) = (sub2(*a, pivot), sub2(*b, pivot));
        let c = det2(da, db);
        if c > 0.0 {
            std::cmp::Ordering::Less
        } else if c < 0.0 {
            std::cmp::Ordering::Greater
        } else {
            let la = da[0] * da[0] + da[1] * da[1];
            let lb = db[0] * db[0] + db[1] * db[1];
            la.partial_cmp(&lb).unwrap()
        }
    });
    let mut stack = vec![pivot];
    for p in pts {
        while stack.len() >= 2 {
            let (a, b) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            if det2(sub2(b, a), sub2(p, a)) <= 0.0 {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(p);
    }
    stack
}

/// `α_i` of a planar configuration as the distance, in units of `|s_i|`, at
/// which the ray through `s_i` leaves the symmetric hull of the others.
pub fn alpha_brute_d2(s: &PointConfig, i: usize) -> Result<f64> {
    if s.dim() != 2 {
        return Err(Error::Input("the planar oracle needs d = 2".into()));
    }
    let n = s.len();
    if n < 2 || i >= n {
        return Err(Error::Input(format!("index {i} invalid for {n} points")));
    }
    let dir = [s.point(i)[0], s.point(i)[1]];
    let cloud: Vec<[f64; 2]> = (0..n)
        .filter(|&j| j != i)
        .flat_map(|j| {
            let p = s.point(j);
            [[p[0], p[1]], [-p[0], -p[1]]]
        })
        .collect();
    let hull = graham(cloud.clone());
    let scale = cloud.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);

    let mut best: f64 = 0.0;
    if hull.len() < 3 {
        // Every point lies on one line through the origin: the hull is a
        // segment, reached only along that line.
        for p in &cloud {
            if det2(*p, dir).abs() <= 1e-13 * scale * dir[0].hypot(dir[1]) {
                let r = (p[0] * dir[0] + p[1] * dir[1]) / (dir[0] * dir[0] + dir[1] * dir[1]);
                best = best.max(r);
            }
        }
        return Ok(best);
    }
    for k in 0..hull.len() {
        let p = hull[k];
        let e = sub2(hull[(k + 1) % hull.len()], p);
        // r dir = p + t e
        let den = det2(dir, e);
        if den == 0.0 {
            continue;
        }
        let r = det2(p, e) / den;
        let t = det2(p, dir) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && r >= 0.0 {
            best = best.max(r);
        }
    }
    Ok(best)
}

fn ratio(v: &[f64], i: usize) -> f64 {
    let rest: f64 = v.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, x)| x.abs()).sum();
    if rest == 0.0 {
        if v[i] == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        v[i].abs() / rest
    }
}

fn combine(b: &Mat, c: &[f64]) -> Vec<f64> {
    (0..b.rows())
        .map(|r| (0..b.cols()).map(|k| b[(r, k)] * c[k]).sum())
        .collect()
}

fn sphere_point(angles: &[f64]) -> Vec<f64> {
    match *angles {
        [] => vec![1.0],
        [t] => vec![t.cos(), t.sin()],
        [t, p] => vec![p.sin() * t.cos(), p.sin() * t.sin(), p.cos()],
        _ => unreachable!("at most three coordinates"),
    }
}

/// Grid search followed by repeated local zooming; maximizes `f` over the
/// angles parametrizing a sphere of dimension `dims`.
fn grid_maximize(dims: usize, grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> f64 {
    if dims == 0 {
        return f(&[]);
    }
    // Antipodal symmetry lets every angle range over [0, π).
    let pi = std::f64::consts::PI;
    let m = grid.samples;
    let mut step = pi / m as f64;
    let mut best = (f64::NEG_INFINITY, vec![0.0; dims]);
    let mut idx = vec![0usize; dims];
    loop {
        let a: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        let v = f(&a);
        if v > best.0 {
            best = (v, a);
        }
        let mut d = 0;
        while d < dims {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == dims {
            break;
        }
    }
    while step > grid.resolution {
        let centre = best.1.clone();
        let span = step;
        step = span / 4.0;
        let offsets: Vec<f64> = (-8..=8).map(|k| k as f64 * step / 2.0).collect();
        let mut idx = vec![0usize; dims];
        loop {
            let a: Vec<f64> = centre.iter().zip(&idx).map(|(c, &k)| c + offsets[k]).collect();
            let v = f(&a);
            if v > best.0 {
                best = (v, a);
            }
            let mut d = 0;
            while d < dims {
                idx[d] += 1;
                if idx[d] < offsets.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dims {
                break;
            }
        }
    }
    best.0
}

/// `Al_i(A)` by sampling the unit sphere of `A` (dimension at most 3).
/// Sampling approaches the supremum from below.
pub fn align_brute(a: &Subspace, i: usize, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    let k = a.dim();
    if k == 0 || k > 3 {
        return Err(Error::Input(format!("the sampling oracle supports dimensions 1..=3, got {k}")));
    }
    if i >= a.ambient() {
        return Err(Error::Input(format!("index {i} out of range")));
    }
    let b = a.basis();
    Ok(grid_maximize(k - 1, grid, |t| ratio(&combine(b, &sphere_point(t)), i)))
}

/// `L(μ)` for the uniform measure on the given points, by sampling the
/// direction `v` (points in `R^1` or `R^2`).
pub fn script_l_brute(x: &PointConfig, grid: &GridSpec) -> Result<f64> {
    grid.validate()?;
    let k = x.dim();
    if k > 2 {
        return Err(Error::Input("the sampling oracle supports R^1 and R^2".into()));
    }
    let n = x.len() as f64;
    let value = |v: &[f64]| -> f64 {
        let proj: Vec<f64> = x.points().iter().map(|p| p.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        let mean = proj.iter().map(|p| p.abs()).sum::<f64>() / n;
        let top = proj.iter().map(|p| p.abs()).fold(0.0, f64::max);
        if top == 0.0 {
            f64::INFINITY
        } else {
            mean / top
        }
    };
    // inf over v is the sup of the negated value.
    Ok(-grid_maximize(k - 1, grid, |t| -value(&sphere_point(t))))
}

fn det_cofactor(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m[0][c] * det_cofactor(&minor)
            })
            .sum(),
    }
}

/// Positive semidefiniteness by checking every principal minor is at least
/// `−1e-9`.
pub fn psd_brute(m: &Mat) -> Result<bool> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Input("matrix is not square".into()));
    }
    if n > 8 {
        return Err(Error::Input(format!("the minor oracle supports n <= 8, got {n}")));
    }
    for i in 0..n {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 {
                return Err(Error::Input("matrix is not symmetric".into()));
            }
        }
    }
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let sub: Vec<Vec<f64>> = idx.iter().map(|&r| idx.iter().map(|&c| m[(r, c)]).collect()).collect();
        if det_cofactor(&sub) < -1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}
