//! Dense two-phase primal simplex with Bland's rule.
//!
//! Problems are stated as `minimize c·x` subject to row constraints with a
//! sense each and per-variable bounds (infinite bounds allowed).
//! [`LpBuilder`] additionally compiles absolute-value constraints into this
//! form by splitting variables into positive and negative parts.

use serde::{Deserialize, Serialize};

use super::linalg::lu_solve;
use super::mat::Mat;
use super::Tolerances;
use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Mat,
    pub rhs: Vec<f64>,
    pub senses: Vec<Sense>,
    /// `(lower, upper)` per variable; either side may be infinite.
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// Problem over non-negative variables.
    pub fn new(objective: Vec<f64>, constraints: Mat, rhs: Vec<f64>, senses: Vec<Sense>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints,
            rhs,
            senses,
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let m = self.num_rows();
        if n == 0 {
            return Err(Error::input("linear program has no variables"));
        }
        if self.senses.len() != m {
            return Err(Error::dim(format!("{} senses for {m} rows", self.senses.len())));
        }
        if m > 0 && (self.constraints.rows() != m || self.constraints.cols() != n) {
            return Err(Error::dim(format!(
                "constraint matrix is {}x{}, expected {m}x{n}",
                self.constraints.rows(),
                self.constraints.cols()
            )));
        }
        if self.bounds.len() != n {
            return Err(Error::dim(format!("{} bounds for {n} variables", self.bounds.len())));
        }
        if self.objective.iter().chain(&self.rhs).any(|x| !x.is_finite()) {
            return Err(Error::input("objective and rhs must be finite"));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::input(format!("variable {j} has bounds ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    /// Largest constraint or bound violation of `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.num_rows() {
            let lhs: f64 = self.constraints.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
            let d = lhs - self.rhs[i];
            worst = worst.max(match self.senses[i] {
                Sense::Le => d,
                Sense::Ge => -d,
                Sense::Eq => d.abs(),
            });
        }
        for (&v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { objective: f64, values: Vec<f64> },
    /// The objective decreases without bound along `ray` from a feasible point.
    Unbounded { ray: Vec<f64> },
    /// Phase one stopped with a positive sum of infeasibilities.
    Infeasible { infeasibility: f64 },
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpSolution::Optimal { .. })
    }

    pub fn objective(&self) -> Option<f64> {
        match self {
            LpSolution::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }

    pub fn values(&self) -> Option<&[f64]> {
        match self {
            LpSolution::Optimal { values, .. } => Some(values),
            _ => None,
        }
    }
}

/// How an original variable is expressed through standard-form columns:
/// `x = offset + Σ coef * y_col`.
#[derive(Debug, Clone)]
struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
}

struct StandardForm {
    /// Equality rows over non-negative columns, rhs non-negative.
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    cost: Vec<f64>,
    map: Vec<VarMap>,
    /// Column usable as the initial basic variable for each row, if any.
    unit_col: Vec<Option<usize>>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> std::result::Result<Self, LpSolution> {
        let mut ncols = 0;
        let mut map = Vec::with_capacity(p.num_vars());
        let mut bound_rows: Vec<(usize, f64)> = Vec::new();
        for &(lo, hi) in &p.bounds {
            if lo.is_finite() {
                if hi.is_finite() && hi < lo {
                    return Err(LpSolution::Infeasible {
                        infeasibility: lo - hi,
                    });
                }
                if hi.is_finite() {
                    bound_rows.push((ncols, hi - lo));
                }
                map.push(VarMap {
                    offset: lo,
                    cols: vec![(ncols, 1.0)],
                });
                ncols += 1;
            } else if hi.is_finite() {
                map.push(VarMap {
                    offset: hi,
                    cols: vec![(ncols, -1.0)],
                });
                ncols += 1;
            } else {
                map.push(VarMap {
                    offset: 0.0,
                    cols: vec![(ncols, 1.0), (ncols + 1, -1.0)],
                });
                ncols += 2;
            }
        }

        let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
        for i in 0..p.num_rows() {
            let mut row = vec![0.0; ncols];
            let mut rhs = p.rhs[i];
            for (j, vm) in map.iter().enumerate() {
                let a = p.constraints[(i, j)];
                if a == 0.0 {
                    continue;
                }
                rhs -= a * vm.offset;
                for &(c, s) in &vm.cols {
                    row[c] += a * s;
                }
            }
            rows.push((row, p.senses[i], rhs));
        }
        for (col, ub) in bound_rows {
            let mut row = vec![0.0; ncols];
            row[col] = 1.0;
            rows.push((row, Sense::Le, ub));
        }

        let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
        let width = ncols + n_slack;
        let mut a = Vec::with_capacity(rows.len());
        let mut b = Vec::with_capacity(rows.len());
        let mut unit_col = Vec::with_capacity(rows.len());
        let mut slack = ncols;
        for (mut row, sense, mut rhs) in rows {
            row.resize(width, 0.0);
            let mut slack_col = None;
            match sense {
                Sense::Le => {
                    row[slack] = 1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                Sense::Ge => {
                    row[slack] = -1.0;
                    slack_col = Some(slack);
                    slack += 1;
                }
                Sense::Eq => {}
            }
            if rhs < 0.0 {
                row.iter_mut().for_each(|x| *x = -*x);
                rhs = -rhs;
            }
            unit_col.push(slack_col.filter(|&c| row[c] == 1.0));
            a.push(row);
            b.push(rhs);
        }

        let mut cost = vec![0.0; width];
        for (j, vm) in map.iter().enumerate() {
            for &(c, s) in &vm.cols {
                cost[c] += p.objective[j] * s;
            }
        }
        Ok(Self {
            a,
            b,
            cost,
            map,
            unit_col,
        })
    }

    fn width(&self) -> usize {
        self.cost.len()
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|vm| vm.offset + vm.cols.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
            .collect()
    }

    fn recover_direction(&self, y: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .map(|vm| vm.cols.iter().map(|&(c, s)| s * y[c]).sum::<f64>())
            .collect()
    }
}

/// Simplex tableau. Row `m` holds reduced costs; the last column holds the
/// basic values (and minus the objective in row `m`).
struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

enum Phase {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.width + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let stride = self.width + 1;
        let p = self.at(r, c);
        for x in &mut self.t[r * stride..(r + 1) * stride] {
            *x /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * stride..(r + 1) * stride].to_vec();
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.at(i, c);
            if f == 0.0 {
                continue;
            }
            for (x, &pr) in self.t[i * stride..(i + 1) * stride].iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.t[i * stride + c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let stride = self.width + 1;
        let obj = self.m * stride;
        self.t[obj..obj + self.width].copy_from_slice(&cost[..self.width]);
        self.t[obj + self.width] = 0.0;
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..=self.width {
                self.t[obj + j] -= cb * self.t[r * stride + j];
            }
        }
    }

    /// Bland's rule: lowest-index improving column enters; among rows tied
    /// in the ratio test the lowest basic index leaves.
    fn run(&mut self, allowed: &[bool], tol: &Tolerances, pivots: &mut usize) -> Result<Phase> {
        let opt_tol = tol.lp_pivot_tol * 1e-3;
        loop {
            let entering = (0..self.width).find(|&j| allowed[j] && self.at(self.m, j) < -opt_tol);
            let Some(c) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.at(r, c);
                if a <= tol.lp_pivot_tol {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                        if (tie && self.basis[r] < self.basis[br]) || (!tie && ratio < bratio) {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded(c));
            };
            self.pivot(r, c);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::Internal(format!(
                    "simplex exceeded {MAX_PIVOTS} pivots"
                )));
            }
        }
    }
}

pub fn lp_solve(p: &LpProblem, tol: &Tolerances) -> Result<LpSolution> {
    p.validate()?;
    let sf = match StandardForm::build(p) {
        Ok(sf) => sf,
        Err(early) => return Ok(early),
    };
    let m = sf.a.len();
    let n = sf.width();

    // Artificial columns only for rows without a usable slack.
    let art_rows: Vec<usize> = (0..m).filter(|&r| sf.unit_col[r].is_none()).collect();
    let width = n + art_rows.len();
    let stride = width + 1;
    let mut t = vec![0.0; (m + 1) * stride];
    let mut basis = vec![0; m];
    for r in 0..m {
        t[r * stride..r * stride + n].copy_from_slice(&sf.a[r]);
        t[r * stride + width] = sf.b[r];
        if let Some(c) = sf.unit_col[r] {
            basis[r] = c;
        }
    }
    for (k, &r) in art_rows.iter().enumerate() {
        t[r * stride + n + k] = 1.0;
        basis[r] = n + k;
    }
    let mut tab = Tableau {
        m,
        width,
        t,
        basis,
    };
    let mut pivots = 0;

    if !art_rows.is_empty() {
        let mut phase1_cost = vec![0.0; width];
        phase1_cost[n..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_costs(&phase1_cost);
        let all = vec![true; width];
        tab.run(&all, tol, &mut pivots)?;
        let infeasibility: f64 = (0..m).filter(|&r| tab.basis[r] >= n).map(|r| tab.rhs(r)).sum();
        let scale = sf.b.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        if infeasibility > tol.lp_pivot_tol * scale {
            return Ok(LpSolution::Infeasible { infeasibility });
        }
        // Drive remaining (zero-valued) artificials out of the basis. A row
        // with no structural entry is redundant and keeps its artificial.
        for r in 0..m {
            if tab.basis[r] < n {
                continue;
            }
            let col = (0..n)
                .filter(|&j| tab.at(r, j).abs() > tol.lp_pivot_tol)
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
            if let Some(c) = col {
                tab.pivot(r, c);
            }
        }
    }

    let mut cost = sf.cost.clone();
    cost.resize(width, 0.0);
    tab.set_costs(&cost);
    let allowed: Vec<bool> = (0..width).map(|j| j < n).collect();
    match tab.run(&allowed, tol, &mut pivots)? {
        Phase::Unbounded(c) => {
            let mut dir = vec![0.0; width];
            dir[c] = 1.0;
            for r in 0..m {
                dir[tab.basis[r]] -= tab.at(r, c);
            }
            Ok(LpSolution::Unbounded {
                ray: sf.recover_direction(&dir[..n]),
            })
        }
        Phase::Optimal => {
            let y = basic_solution(&sf, &tab, n);
            let values = sf.recover(&y);
            let objective = p.objective.iter().zip(&values).map(|(c, x)| c * x).sum();
            Ok(LpSolution::Optimal { objective, values })
        }
    }
}

/// Basic variable values, recomputed from the original rows for the final
/// basis so that accumulated pivoting error does not leak into the answer.
fn basic_solution(sf: &StandardForm, tab: &Tableau, n: usize) -> Vec<f64> {
    let m = tab.m;
    let mut y = vec![0.0; tab.width];
    for r in 0..m {
        y[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    if m == 0 {
        return y[..n].to_vec();
    }
    let art_rows: Vec<usize> = (0..m).filter(|&r| sf.unit_col[r].is_none()).collect();
    let mut bmat = Mat::zeros(m, m);
    for (k, &col) in tab.basis.iter().enumerate() {
        for r in 0..m {
            bmat[(r, k)] = if col < n {
                sf.a[r][col]
            } else {
                f64::from(u8::from(art_rows[col - n] == r))
            };
        }
    }
    if let Ok(xb) = lu_solve(&bmat, &sf.b) {
        let drift = xb
            .iter()
            .zip(&tab.basis)
            .map(|(v, &c)| (v - y[c]).abs())
            .fold(0.0, f64::max);
        // Keep the refined values only when they agree with the tableau.
        if drift < 1e-6 {
            for (v, &c) in xb.iter().zip(&tab.basis) {
                y[c] = v.max(0.0);
            }
        }
    }
    y.truncate(n);
    y
}

/// Index of a variable created by [`LpBuilder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(pub usize);

/// Sparse linear combination of variables.
#[derive(Debug, Clone, Default)]
pub struct LinExpr(pub Vec<(Var, f64)>);

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, v: Var, c: f64) -> Self {
        self.0.push((v, c));
        self
    }

    pub fn push(&mut self, v: Var, c: f64) {
        self.0.push((v, c));
    }

    fn negated(&self) -> LinExpr {
        LinExpr(self.0.iter().map(|&(v, c)| (v, -c)).collect())
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr(vec![(v, 1.0)])
    }
}

/// Incremental construction of an [`LpProblem`], including `|·|` forms.
#[derive(Debug, Clone, Default)]
pub struct LpBuilder {
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    rows: Vec<(LinExpr, Sense, f64)>,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, lower: f64, upper: f64, cost: f64) -> Var {
        self.objective.push(cost);
        self.bounds.push((lower, upper));
        Var(self.objective.len() - 1)
    }

    pub fn free(&mut self, cost: f64) -> Var {
        self.var(f64::NEG_INFINITY, f64::INFINITY, cost)
    }

    pub fn nonneg(&mut self, cost: f64) -> Var {
        self.var(0.0, f64::INFINITY, cost)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, expr: impl Into<LinExpr>, sense: Sense, rhs: f64) {
        self.rows.push((expr.into(), sense, rhs));
    }

    /// `|expr| <= bound`, with `bound` itself a linear expression.
    pub fn abs_le(&mut self, expr: &LinExpr, bound: &LinExpr) {
        let mut up = expr.clone();
        up.0.extend(bound.negated().0);
        self.constrain(up, Sense::Le, 0.0);
        let mut down = expr.negated();
        down.0.extend(bound.negated().0);
        self.constrain(down, Sense::Le, 0.0);
    }

    /// `Σ |exprs[j]| <= rhs`, compiled by splitting each expression as
    /// `e = p - q` with `p, q >= 0` and bounding `Σ (p + q)`.
    pub fn l1_le(&mut self, exprs: &[LinExpr], rhs: f64) {
        let mut total = LinExpr::new();
        for e in exprs {
            let p = self.nonneg(0.0);
            let q = self.nonneg(0.0);
            let mut split = e.clone();
            split.push(p, -1.0);
            split.push(q, 1.0);
            self.constrain(split, Sense::Eq, 0.0);
            total.push(p, 1.0);
            total.push(q, 1.0);
        }
        self.constrain(total, Sense::Le, rhs);
    }

    pub fn build(&self) -> LpProblem {
        let n = self.num_vars();
        let m = self.rows.len();
        let mut a = Mat::zeros(m.max(1), n);
        for (i, (expr, _, _)) in self.rows.iter().enumerate() {
            for &(Var(j), c) in &expr.0 {
                a[(i, j)] += c;
            }
        }
        LpProblem {
            objective: self.objective.clone(),
            constraints: if m == 0 { Mat::zeros(1, n) } else { a },
            rhs: self.rows.iter().map(|r| r.2).collect(),
            senses: self.rows.iter().map(|r| r.1).collect(),
            bounds: self.bounds.clone(),
        }
    }

    pub fn solve(&self, tol: &Tolerances) -> Result<LpSolution> {
        lp_solve(&self.build(), tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn solve(c: &[f64], rows: &[&[f64]], senses: &[Sense], rhs: &[f64]) -> LpSolution {
        let a = Mat::from_rows(rows).unwrap();
        lp_solve(&LpProblem::new(c.to_vec(), a, rhs.to_vec(), senses.to_vec()), &tol()).unwrap()
    }

    #[test]
    fn one_variable_vertex() {
        let s = solve(&[-1.0], &[&[1.0]], &[Sense::Le], &[3.0]);
        assert_eq!(s.objective(), Some(-3.0));
        assert_eq!(s.values(), Some(&[3.0][..]));
    }

    #[test]
    fn simplex_facet() {
        let s = solve(&[-1.0, -1.0], &[&[1.0, 1.0]], &[Sense::Le], &[1.0]);
        assert!((s.objective().unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_ray_is_unbounded() {
        let p = LpProblem::new(vec![-1.0], Mat::zeros(1, 1), vec![], vec![]);
        match lp_solve(&p, &tol()).unwrap() {
            LpSolution::Unbounded { ray } => assert!(ray[0] > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_pair() {
        let s = solve(&[1.0], &[&[1.0], &[1.0]], &[Sense::Ge, Sense::Le], &[2.0, 1.0]);
        assert!(matches!(s, LpSolution::Infeasible { .. }));
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let p = LpProblem::new(
            vec![1.0, 1.0],
            Mat::zeros(1, 3),
            vec![1.0],
            vec![Sense::Le],
        );
        assert!(matches!(lp_solve(&p, &tol()), Err(Error::Dimension(_))));
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // min x + y, x free with x >= -2 via row, y <= 5 only from above.
        let mut b = LpBuilder::new();
        let x = b.free(1.0);
        b.var(f64::NEG_INFINITY, 5.0, -1.0);
        b.constrain(x, Sense::Ge, -2.0);
        let s = b.solve(&tol()).unwrap();
        assert_eq!(s.values().unwrap(), &[-2.0, 5.0]);
        assert_eq!(s.objective(), Some(-7.0));
    }

    #[test]
    fn l1_ball_maximum() {
        // max 3x - y over |x| + |y| <= 2 -> 6.
        let mut b = LpBuilder::new();
        let x = b.free(-3.0);
        let y = b.free(1.0);
        b.l1_le(&[x.into(), y.into()], 2.0);
        let s = b.solve(&tol()).unwrap();
        assert!((s.objective().unwrap() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_abs_bound() {
        // min t s.t. |x| <= t, x >= 1.
        let mut b = LpBuilder::new();
        let x = b.free(0.0);
        let t = b.nonneg(1.0);
        b.abs_le(&x.into(), &t.into());
        b.constrain(x, Sense::Ge, 1.0);
        let s = b.solve(&tol()).unwrap();
        assert!((s.objective().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let s = solve(
            &[1.0, 2.0],
            &[&[1.0, 1.0], &[2.0, 2.0]],
            &[Sense::Eq, Sense::Eq],
            &[1.0, 2.0],
        );
        assert_eq!(s.objective(), Some(1.0));
    }
}
