//! Searching for configurations with small maximal alignment.
//!
//! Everything here produces upper bounds: each result carries an
//! [`OffCertificate`] built by dualizing the best configuration found.
//! Only the planar case has a known optimum to compare against.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::{align_index_vector, align_subspace, ExtReal, Subspace};
use crate::duality::{dualize, OffCertificate, Source};
use crate::error::{Error, Result};
use crate::geometry::{
    alpha_planar_points, is_strictly_convex_antipodal, normalize_antipodal, nullspace_of_config,
    PointConfig,
};
use crate::numerics::{orthonormal_basis, LpBuilder, LpSolution, Mat, Sense, LinExpr, Tolerances};
use crate::rank2::optimal_config;

/// `√((n − d) / (d (n − 1)))`, a lower bound on `off(n, d)`.
pub fn welch_bound(n: usize, d: usize) -> Result<f64> {
    if d == 0 || n <= d {
        return Err(Error::input(format!("welch bound needs n > d >= 1, got n={n}, d={d}")));
    }
    let (n, d) = (n as f64, d as f64);
    Ok(((n - d) / (d * (n - 1.0))).sqrt())
}

/// The optimal value `cos(π/n)` for `d = 2` and the lines attaining it.
pub fn theta_d2_exact(n: usize) -> Result<(f64, PointConfig)> {
    Ok(((PI / n as f64).cos(), optimal_config(n)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Initial step: the trust radius for planar search, the relative length
    /// change for equalization, the perturbation size for subspace search.
    pub step: f64,
    pub shrink: f64,
    pub seed: u64,
    /// Initial annealing temperature, relative to the starting value.
    pub temperature: f64,
    pub tol: Tolerances,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iters: 3000,
            step: 0.1,
            shrink: 0.5,
            seed: 0,
            temperature: 1e-3,
            tol: Tolerances::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::input("restarts must be at least 1"));
        }
        if !(self.step > 0.0 && self.step < 1.0) {
            return Err(Error::input(format!("step must lie in (0, 1), got {}", self.step)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::input(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::input("temperature must be finite and non-negative"));
        }
        self.tol.validate()
    }

    fn rng(&self, restart: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ restart as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoundConfig {
    Planar(PointConfig),
    Subspace(Subspace),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub certificate: OffCertificate,
    pub config: FoundConfig,
    /// Best objective value seen after each iteration of the winning restart.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// The local method stopped on its own criterion rather than the
    /// iteration cap. Says nothing about global optimality.
    pub converged: bool,
    pub restart: usize,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn spread(v: &[f64]) -> f64 {
    max_of(v) - v.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub config: PointConfig,
    pub converged: bool,
}

/// Rebalances lengths so the `α_i` move together.
///
/// Each step finds the index with the largest `α`, and shrinks whichever of
/// its two ring neighbours has the smaller `α` by `1 − δ`; that raises the
/// neighbour's own `α` and lowers the maximum. `δ` halves whenever a step
/// fails to lower the maximum.
pub fn equalize_lengths(s: &PointConfig, cfg: &SearchConfig) -> Result<Equalized> {
    let mut pts = s
        .planar_points()
        .ok_or_else(|| Error::input("length equalization needs d = 2"))?;
    let n = pts.len();
    if n >= 3 && !is_strictly_convex_antipodal(s, &cfg.tol) {
        return Err(Error::input("length equalization needs a normalized strictly convex configuration"));
    }
    let mut alpha = alpha_planar_points(&pts);
    let mut delta = cfg.step;
    let mut converged = true;
    let mut iters = 0;
    while n >= 3 && spread(&alpha) > cfg.tol.residual_tol * 1e-2 && delta > 1e-16 {
        if iters == cfg.max_iters {
            converged = false;
            break;
        }
        iters += 1;
        let k = argmax(&alpha);
        let (lo, hi) = ((k + n - 1) % n, (k + 1) % n);
        let j = if alpha[lo] <= alpha[hi] { lo } else { hi };
        let mut trial = pts.clone();
        trial[j] = [trial[j][0] * (1.0 - delta), trial[j][1] * (1.0 - delta)];
        let cand = PointConfig::planar(&trial)?;
        if !is_strictly_convex_antipodal(&cand, &cfg.tol) {
            converged = false;
            break;
        }
        let a = alpha_planar_points(&trial);
        if max_of(&a) < max_of(&alpha) {
            pts = trial;
            alpha = a;
        } else {
            delta *= 0.5;
        }
    }
    Ok(Equalized {
        config: PointConfig::planar(&pts)?,
        converged,
    })
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// Linear change of coordinates making `Σ w wᵀ = (n/2) I`, followed by the
/// rotation taking `w_0` to the positive x-axis. `α` is invariant under it.
fn whiten(pts: &mut [[f64; 2]]) {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for p in pts.iter() {
        a += p[0] * p[0];
        b += p[0] * p[1];
        c += p[1] * p[1];
    }
    let half = pts.len() as f64 / 2.0;
    let (a, b, c) = (a / half, b / half, c / half);
    let det = a * c - b * b;
    if !(det > 1e-300) {
        return;
    }
    // M^{1/2} = (M + √det I) / √(tr M + 2√det), inverted in closed form.
    let sd = det.sqrt();
    let k = (a + c + 2.0 * sd).sqrt();
    let (r00, r01, r11) = ((a + sd) / k, b / k, (c + sd) / k);
    let rdet = r00 * r11 - r01 * r01;
    let (i00, i01, i11) = (r11 / rdet, -r01 / rdet, r00 / rdet);
    for p in pts.iter_mut() {
        *p = [i00 * p[0] + i01 * p[1], i01 * p[0] + i11 * p[1]];
    }
    let t = pts[0][1].atan2(pts[0][0]);
    let (s, co) = (-t).sin_cos();
    for p in pts.iter_mut() {
        *p = [co * p[0] - s * p[1], s * p[0] + co * p[1]];
    }
}

struct Run<C> {
    value: f64,
    config: C,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// One trust-region sequential-LP descent on `max_i α_i` from `pts`.
///
/// Each step linearizes every `α_i` (central differences) and solves
/// `min t  s.t.  α_i + ∇α_i·Δ ≤ t,  |Δ_k| ≤ ρ`; the step is accepted when
/// the realized decrease is a fair fraction of the predicted one.
fn slp_descent(mut pts: Vec<[f64; 2]>, cfg: &SearchConfig) -> Result<Run<Vec<[f64; 2]>>> {
    let n = pts.len();
    let m = 2 * n;
    whiten(&mut pts);
    let mut alpha = alpha_planar_points(&pts);
    let mut f = max_of(&alpha);
    let mut rho = cfg.step;
    let mut history = Vec::new();
    let mut converged = false;
    let mut it = 0;
    while it < cfg.max_iters {
        it += 1;
        if f == 0.0 {
            converged = true;
            history.push(f);
            break;
        }
        let h = 1e-7;
        let mut jac = vec![vec![0.0; m]; n];
        for k in 0..m {
            let (p, c) = (k / 2, k % 2);
            let mut plus = pts.clone();
            plus[p][c] += h;
            let mut minus = pts.clone();
            minus[p][c] -= h;
            let (ap, am) = (alpha_planar_points(&plus), alpha_planar_points(&minus));
            for i in 0..n {
                jac[i][k] = (ap[i] - am[i]) / (2.0 * h);
            }
        }
        let mut lp = LpBuilder::new();
        let t = lp.free(1.0);
        let dx: Vec<_> = (0..m).map(|_| lp.var(-rho, rho, 0.0)).collect();
        for i in 0..n {
            let mut row = LinExpr::new().term(t, -1.0);
            for k in 0..m {
                if jac[i][k] != 0.0 {
                    row.push(dx[k], jac[i][k]);
                }
            }
            lp.constrain(row, Sense::Le, -alpha[i]);
        }
        let (pred_t, step) = match lp.solve(&cfg.tol)? {
            LpSolution::Optimal { values, .. } => {
                (values[t.0], dx.iter().map(|v| values[v.0]).collect::<Vec<_>>())
            }
            _ => return Err(Error::Internal("trust-region program is not solvable".into())),
        };
        let predicted = f - pred_t;
        if predicted <= 1e-15 * f.max(1.0) {
            converged = true;
            history.push(f);
            break;
        }
        let mut trial = pts.clone();
        for k in 0..m {
            trial[k / 2][k % 2] += step[k];
        }
        let ta = alpha_planar_points(&trial);
        let tf = max_of(&ta);
        let ratio = (f - tf) / predicted;
        if ratio > 0.1 && tf.is_finite() {
            pts = trial;
            whiten(&mut pts);
            alpha = alpha_planar_points(&pts);
            f = max_of(&alpha);
            if ratio > 0.75 {
                rho = (rho * 2.0).min(0.5);
            }
        } else {
            rho *= cfg.shrink;
        }
        history.push(f);
        if rho < 1e-13 {
            converged = true;
            break;
        }
    }
    Ok(Run {
        value: f,
        config: pts,
        history,
        iterations: it,
        converged,
    })
}

fn random_planar(n: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| {
            let t: f64 = rng.gen_range(0.0..PI);
            let r: f64 = rng.gen_range(0.5..1.5);
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

/// Picks the lowest value, ties going to the lower restart index.
fn best_run<C>(runs: Vec<Run<C>>) -> (usize, Run<C>) {
    let mut best: Option<(usize, Run<C>)> = None;
    for (i, r) in runs.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| r.value < b.value) {
            best = Some((i, r));
        }
    }
    best.expect("at least one restart")
}

/// Random-restart local search for `n` planar vectors minimizing
/// `max_i α_i`, polished by length equalization.
pub fn optimize_d2(n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::input(format!("need at least 2 vectors, got {n}")));
    }
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = cfg.rng(r);
            let mut run = slp_descent(random_planar(n, &mut rng), cfg)?;
            let s = normalize_antipodal(&PointConfig::planar(&run.config)?)?;
            run.config = s.planar_points().expect("planar");
            if n >= 3 && is_strictly_convex_antipodal(&s, &cfg.tol) {
                let eq = equalize_lengths(&s, cfg)?;
                let pts = eq.config.planar_points().expect("planar");
                let v = max_of(&alpha_planar_points(&pts));
                if v < run.value {
                    run.value = v;
                    run.config = pts;
                    run.history.push(v);
                }
            }
            Ok(run)
        })
        .collect::<Result<Vec<_>>>()?;
    let (restart, run) = best_run(runs);
    let config = PointConfig::planar(&run.config)?;
    let mut certificate = dualize(&nullspace_of_config(&config, &cfg.tol)?, &cfg.tol)?;
    certificate.source = Source::Searched;
    Ok(SearchResult {
        certificate,
        config: FoundConfig::Planar(config),
        history: best_so_far(run.history),
        iterations: run.iterations,
        converged: run.converged,
        restart,
    })
}

fn best_so_far(h: Vec<f64>) -> Vec<f64> {
    let mut best = f64::INFINITY;
    h.into_iter()
        .map(|x| {
            best = best.min(x);
            best
        })
        .collect()
}

fn subspace_alignment(b: &Mat, tol: &Tolerances) -> Result<f64> {
    if b.cols() == 1 {
        let v = b.col(0);
        let mut m = ExtReal::Finite(0.0);
        for i in 0..v.len() {
            m = m.max(align_index_vector(&v, i)?);
        }
        return Ok(m.to_f64());
    }
    let a = Subspace::from_orthonormal(b.rows(), b.clone(), tol)?;
    Ok(align_subspace(&a, tol)?.value.to_f64())
}

fn random_basis(n: usize, k: usize, rng: &mut ChaCha8Rng, tol: &Tolerances) -> Result<Mat> {
    loop {
        let data: Vec<f64> = (0..n * k).map(|_| rng.sample(StandardNormal)).collect();
        let g = Mat::new(n, k, data)?;
        if let Ok(b) = orthonormal_basis(&g, tol) {
            if b.cols() == k {
                return Ok(b);
            }
        }
    }
}

/// Annealed random search over `(n − d)`-dimensional subspaces of `R^n`
/// minimizing the alignment. Heuristic: the result is an upper bound only.
pub fn optimize_general(n: usize, d: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    if d == 0 || d >= n {
        return Err(Error::input(format!("need 1 <= d < n, got n={n}, d={d}")));
    }
    let k = n - d;
    let tol = cfg.tol;
    let runs = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| -> Result<Run<Mat>> {
            let mut rng = cfg.rng(r);
            let mut cur = random_basis(n, k, &mut rng, &tol)?;
            let mut f = subspace_alignment(&cur, &tol)?;
            let (mut best, mut best_f) = (cur.clone(), f);
            let mut sigma = cfg.step;
            let t0 = cfg.temperature * f.min(1.0);
            let mut history = Vec::with_capacity(cfg.max_iters);
            let mut converged = false;
            let mut it = 0;
            while it < cfg.max_iters {
                it += 1;
                let temp = t0 * (1.0 - it as f64 / cfg.max_iters as f64).powi(2);
                let noise: Vec<f64> = (0..n * k).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
                let moved = cur.add(&Mat::new(n, k, noise)?)?;
                let cand = match orthonormal_basis(&moved, &tol) {
                    Ok(b) if b.cols() == k => b,
                    _ => {
                        sigma *= 0.9;
                        history.push(best_f);
                        continue;
                    }
                };
                let cf = subspace_alignment(&cand, &tol)?;
                let u: f64 = rng.gen();
                if cf < f {
                    cur = cand;
                    f = cf;
                    sigma = (sigma * 1.5).min(1.0);
                } else {
                    if temp > 0.0 && cf.is_finite() && u < (-(cf - f) / temp).exp() {
                        cur = cand;
                        f = cf;
                    }
                    sigma *= 0.9;
                }
                if f < best_f {
                    best = cur.clone();
                    best_f = f;
                }
                history.push(best_f);
                if sigma < 1e-10 {
                    // Restart the walk from the best point with a fresh step.
                    if (best_f - f).abs() <= 1e-15 {
                        converged = true;
                        break;
                    }
                    cur = best.clone();
                    f = best_f;
                    sigma = cfg.step;
                }
            }
            Ok(Run {
                value: best_f,
                config: best,
                history,
                iterations: it,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (restart, run) = best_run(runs);
    let a = Subspace::from_orthonormal(n, run.config, &tol)?;
    let mut certificate = dualize(&a, &tol)?;
    certificate.source = Source::Searched;
    Ok(SearchResult {
        certificate,
        config: FoundConfig::Subspace(a),
        history: run.history,
        iterations: run.iterations,
        converged: run.converged,
        restart,
    })
}

/// `optimize_d2` for `d = 2`, the subspace search otherwise.
pub fn optimize(n: usize, d: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    if d == 2 {
        optimize_d2(n, cfg)
    } else {
        optimize_general(n, d, cfg)
    }
}
