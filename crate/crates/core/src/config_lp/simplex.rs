//! Exact phase-1 revised simplex with Bland's rule.
//!
//! Solves `find x ≥ 0 with A x = b` for `b ≥ 0`. Columns are sparse. Rows
//! that already carry an identity column (a slack) use it as the starting
//! basic variable; every other row receives an artificial variable and the
//! sum of artificials is minimized. The basis inverse is kept explicitly, which
//! is cheap because the row count stays small at the sizes this crate targets.

use crate::instance::Rational;

pub type SparseColumn = Vec<(usize, Rational)>;

pub struct Phase1Problem {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub rhs: Vec<Rational>,
    /// `basis_hint[r] = Some(c)` if column `c` is the unit vector `e_r`.
    pub basis_hint: Vec<Option<usize>>,
}

#[derive(Debug)]
pub struct Phase1Outcome {
    pub feasible: bool,
    /// Values of the structural columns (length = `columns.len()`).
    pub x: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Var {
    Column(usize),
    Artificial(usize),
}

pub fn solve_phase1(problem: &Phase1Problem) -> Phase1Outcome {
    let m = problem.rows;
    let n = problem.columns.len();
    assert_eq!(problem.rhs.len(), m);
    assert!(problem.rhs.iter().all(|b| !b.is_negative()), "rhs must be non-negative");

    let mut basis: Vec<Var> = (0..m)
        .map(|r| match problem.basis_hint.get(r).copied().flatten() {
            Some(c) => Var::Column(c),
            None => Var::Artificial(r),
        })
        .collect();
    let mut in_basis = vec![false; n];
    for v in &basis {
        if let Var::Column(c) = v {
            in_basis[*c] = true;
        }
    }

    // B^{-1}, starts as identity since every initial basic column is a unit vector.
    let mut binv: Vec<Vec<Rational>> = (0..m)
        .map(|r| {
            (0..m)
                .map(|k| if k == r { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    let mut xb: Vec<Rational> = problem.rhs.clone();
    let mut pivots = 0usize;

    loop {
        // π = c_B B^{-1}; only artificials carry cost 1.
        let mut pi = vec![Rational::zero(); m];
        for (r, v) in basis.iter().enumerate() {
            if matches!(v, Var::Artificial(_)) {
                for (k, val) in binv[r].iter().enumerate() {
                    if !val.is_zero() {
                        pi[k] += val;
                    }
                }
            }
        }

        // Bland: lowest-index column with negative reduced cost. Artificials
        // never re-enter.
        let entering = (0..n).find(|&c| {
            if in_basis[c] {
                return false;
            }
            let dot: Rational = problem.columns[c].iter().map(|(r, a)| &pi[*r] * a).sum();
            // reduced cost = 0 - π·A_c
            dot.is_positive()
        });
        let Some(q) = entering else { break };

        let mut u = vec![Rational::zero(); m];
        for (r, ur) in u.iter_mut().enumerate() {
            for (k, a) in &problem.columns[q] {
                let b = &binv[r][*k];
                if !b.is_zero() {
                    *ur += b * a;
                }
            }
        }

        let mut leave: Option<(usize, Rational)> = None;
        for r in 0..m {
            if !u[r].is_positive() {
                continue;
            }
            let ratio = &xb[r] / &u[r];
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let (r, _) = leave.expect("phase-1 objective is bounded below");

        let piv = u[r].clone();
        for val in binv[r].iter_mut() {
            *val = &*val / &piv;
        }
        xb[r] = &xb[r] / &piv;
        let pivot_row = binv[r].clone();
        let pivot_x = xb[r].clone();
        for k in 0..m {
            if k == r || u[k].is_zero() {
                continue;
            }
            let f = u[k].clone();
            for (dst, src) in binv[k].iter_mut().zip(&pivot_row) {
                if !src.is_zero() {
                    *dst -= &f * src;
                }
            }
            xb[k] -= &f * &pivot_x;
        }

        if let Var::Column(c) = basis[r] {
            in_basis[c] = false;
        }
        basis[r] = Var::Column(q);
        in_basis[q] = true;
        pivots += 1;
    }

    let infeasibility: Rational = basis
        .iter()
        .zip(&xb)
        .filter(|(v, _)| matches!(v, Var::Artificial(_)))
        .map(|(_, x)| x)
        .sum();
    let mut x = vec![Rational::zero(); n];
    for (v, val) in basis.iter().zip(xb) {
        if let Var::Column(c) = v {
            x[*c] = val;
        }
    }
    Phase1Outcome {
        feasible: infeasibility.is_zero(),
        x,
        pivots,
    }
}
