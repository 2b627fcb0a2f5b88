//! Hand-built linear programs with known outcomes, in `min cᵀx` form.

use gramlax::numerics::Sense::{self, Eq, Ge, Le};

const INF: f64 = f64::INFINITY;

pub enum Expect {
    Optimal(f64),
    Infeasible,
    Unbounded,
}
use Expect::*;

pub struct Case {
    pub name: &'static str,
    pub c: &'static [f64],
    pub rows: &'static [(&'static [f64], Sense, f64)],
    pub bounds: &'static [(f64, f64)],
    pub expect: Expect,
}

pub const CASES: &[Case] = &[
    Case {
        name: "textbook max 3x+5y",
        c: &[-3.0, -5.0],
        rows: &[(&[1.0, 0.0], Le, 4.0), (&[0.0, 2.0], Le, 12.0), (&[3.0, 2.0], Le, 18.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-36.0),
    },
    Case {
        name: "klee-minty 3d",
        c: &[-4.0, -2.0, -1.0],
        rows: &[(&[1.0, 0.0, 0.0], Le, 5.0), (&[4.0, 1.0, 0.0], Le, 25.0), (&[8.0, 4.0, 1.0], Le, 125.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(-125.0),
    },
    Case {
        name: "beale cycling",
        c: &[-0.75, 150.0, -0.02, 6.0],
        rows: &[(&[0.25, -60.0, -0.04, 9.0], Le, 0.0), (&[0.5, -90.0, -0.02, 3.0], Le, 0.0), (&[0.0, 0.0, 1.0, 0.0], Le, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(-0.05),
    },
    Case {
        name: "diet min",
        c: &[0.6, 1.0],
        rows: &[(&[10.0, 4.0], Ge, 20.0), (&[5.0, 5.0], Ge, 20.0), (&[2.0, 6.0], Ge, 12.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(2.8),
    },
    Case {
        name: "equality simplex",
        c: &[1.0, 2.0, 3.0],
        rows: &[(&[1.0, 1.0, 1.0], Eq, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(1.0),
    },
    Case {
        name: "equality with negative cost",
        c: &[-1.0, -2.0, -3.0],
        rows: &[(&[1.0, 1.0, 1.0], Eq, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(-3.0),
    },
    Case {
        name: "two equalities",
        c: &[1.0, 1.0, 1.0],
        rows: &[(&[1.0, 2.0, 0.0], Eq, 4.0), (&[0.0, 1.0, 1.0], Eq, 3.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(3.0),
    },
    Case {
        name: "free variable bounded below by rows",
        c: &[1.0],
        rows: &[(&[1.0], Ge, -3.0)],
        bounds: &[(-INF, INF)],
        expect: Optimal(-3.0),
    },
    Case {
        name: "free pair chebyshev",
        c: &[0.0, 0.0, 1.0],
        rows: &[(&[1.0, 0.0, -1.0], Le, 0.0), (&[-1.0, 0.0, -1.0], Le, 0.0), (&[0.0, 1.0, -1.0], Le, 0.0), (&[0.0, -1.0, -1.0], Le, 0.0), (&[1.0, 1.0, 0.0], Eq, 2.0)],
        bounds: &[(-INF, INF), (-INF, INF), (0.0, INF)],
        expect: Optimal(1.0),
    },
    Case {
        name: "negative lower bounds",
        c: &[1.0, 1.0],
        rows: &[(&[1.0, -1.0], Le, 1.0)],
        bounds: &[(-2.0, 3.0), (-1.0, 4.0)],
        expect: Optimal(-3.0),
    },
    Case {
        name: "upper bounds only",
        c: &[-1.0, -1.0],
        rows: &[],
        bounds: &[(0.0, 2.0), (0.0, 5.0)],
        expect: Optimal(-7.0),
    },
    Case {
        name: "box with cut",
        c: &[-1.0, -2.0],
        rows: &[(&[1.0, 1.0], Le, 3.0)],
        bounds: &[(0.0, 2.0), (0.0, 2.0)],
        expect: Optimal(-5.0),
    },
    Case {
        name: "ge rows min",
        c: &[2.0, 3.0],
        rows: &[(&[1.0, 1.0], Ge, 4.0), (&[1.0, 3.0], Ge, 6.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(9.0),
    },
    Case {
        name: "zero objective feasible",
        c: &[0.0, 0.0],
        rows: &[(&[1.0, 1.0], Le, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(0.0),
    },
    Case {
        name: "mixed senses",
        c: &[1.0, -1.0],
        rows: &[(&[1.0, 1.0], Ge, 1.0), (&[1.0, -1.0], Le, 2.0), (&[0.0, 1.0], Le, 3.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-3.0),
    },
    Case {
        name: "transport 2x2",
        c: &[4.0, 6.0, 5.0, 3.0],
        rows: &[(&[1.0, 1.0, 0.0, 0.0], Eq, 30.0), (&[0.0, 0.0, 1.0, 1.0], Eq, 20.0), (&[1.0, 0.0, 1.0, 0.0], Eq, 25.0), (&[0.0, 1.0, 0.0, 1.0], Eq, 25.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(190.0),
    },
    Case {
        name: "assignment 3x3 relaxation",
        c: &[9.0, 2.0, 7.0, 6.0, 4.0, 3.0, 5.0, 8.0, 1.0],
        rows: &[(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], Eq, 1.0), (&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0], Eq, 1.0), (&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0], Eq, 1.0), (&[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0], Eq, 1.0), (&[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0], Eq, 1.0), (&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0], Eq, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(9.0),
    },
    Case {
        name: "production planning",
        c: &[-20.0, -30.0],
        rows: &[(&[1.0, 2.0], Le, 40.0), (&[3.0, 2.0], Le, 60.0), (&[0.0, 1.0], Le, 15.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-650.0),
    },
    Case {
        name: "fractional optimum",
        c: &[-1.0, -1.0],
        rows: &[(&[2.0, 1.0], Le, 3.0), (&[1.0, 2.0], Le, 3.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-2.0),
    },
    Case {
        name: "single variable upper",
        c: &[-5.0],
        rows: &[(&[3.0], Le, 7.0)],
        bounds: &[(0.0, INF)],
        expect: Optimal(-11.666666666666668),
    },
    Case {
        name: "l1 fit",
        c: &[0.0, 1.0, 1.0, 1.0],
        rows: &[(&[1.0, -1.0, 0.0, 0.0], Le, 1.0), (&[-1.0, -1.0, 0.0, 0.0], Le, -1.0), (&[1.0, 0.0, -1.0, 0.0], Le, 2.0), (&[-1.0, 0.0, -1.0, 0.0], Le, -2.0), (&[1.0, 0.0, 0.0, -1.0], Le, 4.0), (&[-1.0, 0.0, 0.0, -1.0], Le, -4.0)],
        bounds: &[(-INF, INF), (0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(3.0),
    },
    Case {
        name: "minimax of three lines",
        c: &[0.0, 1.0],
        rows: &[(&[1.0, -1.0], Le, 0.0), (&[-1.0, -1.0], Le, -2.0), (&[0.5, -1.0], Le, 0.5)],
        bounds: &[(-INF, INF), (-INF, INF)],
        expect: Optimal(1.0),
    },
    Case {
        name: "scaled rows",
        c: &[-1.0, -1.0],
        rows: &[(&[1000.0, 1000.0], Le, 1000.0), (&[0.001, 0.0], Le, 0.0005)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-1.0),
    },
    Case {
        name: "equality with free vars",
        c: &[1.0, 1.0],
        rows: &[(&[1.0, -1.0], Eq, 3.0)],
        bounds: &[(-INF, INF), (0.0, INF)],
        expect: Optimal(3.0),
    },
    Case {
        name: "degenerate vertex three rows",
        c: &[-1.0, -1.0],
        rows: &[(&[1.0, 0.0], Le, 1.0), (&[0.0, 1.0], Le, 1.0), (&[1.0, 1.0], Le, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-2.0),
    },
    Case {
        name: "degenerate origin",
        c: &[-1.0, -1.0],
        rows: &[(&[1.0, -1.0], Le, 0.0), (&[-1.0, 1.0], Le, 0.0), (&[1.0, 1.0], Le, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-2.0),
    },
    Case {
        name: "redundant equality rows",
        c: &[1.0, 2.0],
        rows: &[(&[1.0, 1.0], Eq, 2.0), (&[2.0, 2.0], Eq, 4.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(2.0),
    },
    Case {
        name: "zero row",
        c: &[1.0, 1.0],
        rows: &[(&[0.0, 0.0], Eq, 0.0), (&[1.0, 1.0], Ge, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(1.0),
    },
    Case {
        name: "zero rhs degenerate",
        c: &[-1.0, 0.0],
        rows: &[(&[1.0, -1.0], Le, 0.0), (&[1.0, 1.0], Le, 0.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(0.0),
    },
    Case {
        name: "tied ratio test",
        c: &[-2.0, -1.0],
        rows: &[(&[1.0, 1.0], Le, 2.0), (&[1.0, 0.0], Le, 2.0), (&[2.0, 1.0], Le, 4.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-4.0),
    },
    Case {
        name: "degenerate duplicated constraint",
        c: &[-1.0, -2.0],
        rows: &[(&[1.0, 1.0], Le, 4.0), (&[1.0, 1.0], Le, 4.0), (&[0.0, 1.0], Le, 3.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-7.0),
    },
    Case {
        name: "kuhn cycling example",
        c: &[-2.0, -3.0, 1.0, 12.0],
        rows: &[(&[-2.0, -9.0, 1.0, 9.0], Le, 0.0), (&[0.3333333333333333, 1.0, -0.3333333333333333, -2.0], Le, 0.0), (&[2.0, 3.0, -1.0, -12.0], Le, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(-2.0000000000000004),
    },
    Case {
        name: "fixed variable by bounds",
        c: &[1.0, -1.0],
        rows: &[(&[1.0, 1.0], Le, 5.0)],
        bounds: &[(2.0, 2.0), (0.0, INF)],
        expect: Optimal(-1.0),
    },
    Case {
        name: "multiple optima",
        c: &[-1.0, -1.0],
        rows: &[(&[1.0, 1.0], Le, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(-1.0),
    },
    Case {
        name: "equality degenerate at zero",
        c: &[1.0, 1.0, 1.0],
        rows: &[(&[1.0, -1.0, 0.0], Eq, 0.0), (&[0.0, 1.0, -1.0], Eq, 0.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Optimal(0.0),
    },
    Case {
        name: "contradictory bounds rows",
        c: &[1.0],
        rows: &[(&[1.0], Ge, 2.0), (&[1.0], Le, 1.0)],
        bounds: &[(0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "parallel equalities",
        c: &[1.0, 1.0],
        rows: &[(&[1.0, 1.0], Eq, 1.0), (&[1.0, 1.0], Eq, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "negative rhs with nonneg",
        c: &[1.0, 1.0],
        rows: &[(&[1.0, 1.0], Le, -1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "box excludes row",
        c: &[1.0, 1.0],
        rows: &[(&[1.0, 1.0], Ge, 5.0)],
        bounds: &[(0.0, 2.0), (0.0, 2.0)],
        expect: Infeasible,
    },
    Case {
        name: "infeasible triangle",
        c: &[0.0, 0.0],
        rows: &[(&[1.0, 0.0], Ge, 1.0), (&[0.0, 1.0], Ge, 1.0), (&[1.0, 1.0], Le, 1.5)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "equality vs inequality",
        c: &[1.0, 0.0, 0.0],
        rows: &[(&[1.0, 1.0, 1.0], Eq, 1.0), (&[1.0, 1.0, 1.0], Ge, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "infeasible free",
        c: &[0.0, 0.0],
        rows: &[(&[1.0, -1.0], Ge, 1.0), (&[-1.0, 1.0], Ge, 1.0)],
        bounds: &[(-INF, INF), (-INF, INF)],
        expect: Infeasible,
    },
    Case {
        name: "infeasible system 3 rows",
        c: &[1.0, 1.0, 1.0],
        rows: &[(&[1.0, 1.0, 0.0], Eq, 1.0), (&[0.0, 1.0, 1.0], Eq, 1.0), (&[1.0, 0.0, 1.0], Eq, 1.0), (&[1.0, 1.0, 1.0], Eq, 2.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Infeasible,
    },
    Case {
        name: "unbounded ray",
        c: &[-1.0, 0.0],
        rows: &[(&[1.0, -1.0], Le, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Unbounded,
    },
    Case {
        name: "unbounded free variable",
        c: &[1.0],
        rows: &[],
        bounds: &[(-INF, INF)],
        expect: Unbounded,
    },
    Case {
        name: "unbounded with equality",
        c: &[-1.0, -1.0],
        rows: &[(&[1.0, -1.0], Eq, 0.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Unbounded,
    },
    Case {
        name: "unbounded below lower bound only",
        c: &[-1.0, 1.0],
        rows: &[(&[1.0, -2.0], Le, 4.0)],
        bounds: &[(-5.0, INF), (0.0, INF)],
        expect: Unbounded,
    },
    Case {
        name: "unbounded degenerate start",
        c: &[-1.0, -1.0],
        rows: &[(&[1.0, -1.0], Le, 0.0), (&[-1.0, 1.0], Le, 0.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Unbounded,
    },
    Case {
        name: "unbounded 3d",
        c: &[0.0, -1.0, 0.0],
        rows: &[(&[1.0, 1.0, 1.0], Ge, 1.0), (&[1.0, -1.0, 0.0], Ge, 0.0)],
        bounds: &[(0.0, INF), (0.0, INF), (0.0, INF)],
        expect: Unbounded,
    },
    Case {
        name: "fractional equality",
        c: &[1.0, 1.0],
        rows: &[(&[3.0, 0.0], Eq, 7.0), (&[1.0, -1.0], Le, 1.0)],
        bounds: &[(0.0, INF), (0.0, INF)],
        expect: Optimal(3.6666666666666665),
    },
];
