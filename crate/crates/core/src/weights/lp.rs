//! Dense two-phase primal simplex for small linear programs
//!
//! ```text
//! minimize cᵀx  subject to  A_ub x ≤ b_ub,  A_eq x = b_eq,  x ≥ 0
//! ```
//!
//! Bland's rule is used for pivoting, so the method terminates on degenerate
//! problems. Intended for the tiny epigraph programs of the weight design.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f.abs() > 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `obj · x` over the columns allowed by `allowed`.
    fn optimize(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool, budget: &mut usize) -> Result<()> {
        loop {
            // reduced costs
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = obj[j];
                for (i, &b) in self.basis.iter().enumerate() {
                    rc -= obj[b] * self.t[i][j];
                }
                if rc < -TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(());
            };
            let rhs = self.cols;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > TOL {
                    let ratio = self.t[i][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - TOL || ((ratio - lr).abs() <= TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Solver {
                    reason: "unbounded objective".into(),
                    iterate: self.current(),
                });
            };
            if *budget == 0 {
                return Err(Error::Solver {
                    reason: "pivot budget exhausted".into(),
                    iterate: self.current(),
                });
            }
            *budget -= 1;
            self.pivot(r, c);
        }
    }

    fn current(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.cols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.t[i][self.cols];
        }
        x
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution> {
        let nv = self.cost.len();
        let n_ub = self.a_ub.len();
        let n_eq = self.a_eq.len();
        let m = n_ub + n_eq;
        // columns: originals | slacks (one per ub row) | artificials (one per row)
        let n_slack = n_ub;
        let cols = nv + n_slack + m;
        let mut t = Vec::with_capacity(m);
        for (k, (row, &b)) in self
            .a_ub
            .iter()
            .zip(&self.b_ub)
            .map(|(r, b)| (r, b))
            .chain(self.a_eq.iter().zip(&self.b_eq))
            .enumerate()
        {
            let mut line = vec![0.0; cols + 1];
            let sign = if b < 0.0 { -1.0 } else { 1.0 };
            for (j, &a) in row.iter().enumerate() {
                line[j] = sign * a;
            }
            if k < n_ub {
                line[nv + k] = sign;
            }
            line[nv + n_slack + k] = 1.0;
            line[cols] = sign * b;
            t.push(line);
        }
        let mut tab = Tableau {
            t,
            basis: (0..m).map(|k| nv + n_slack + k).collect(),
            cols,
        };
        let mut budget = 50 * (cols + m) + 1000;

        // Phase 1: drive artificials out.
        let mut phase1 = vec![0.0; cols];
        for v in phase1.iter_mut().skip(nv + n_slack) {
            *v = 1.0;
        }
        tab.optimize(&phase1, &|_| true, &mut budget)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= nv + n_slack)
            .map(|(i, _)| tab.t[i][cols])
            .sum();
        if infeas > 1e-7 {
            return Err(Error::Solver {
                reason: format!("infeasible (phase-1 residual {infeas:.3e})"),
                iterate: tab.current(),
            });
        }
        // Pivot remaining zero-level artificials out where possible.
        for i in 0..m {
            if tab.basis[i] >= nv + n_slack {
                if let Some(j) = (0..nv + n_slack).find(|&j| tab.t[i][j].abs() > TOL) {
                    tab.pivot(i, j);
                }
            }
        }

        // Phase 2 on the original cost.
        let mut phase2 = vec![0.0; cols];
        phase2[..nv].copy_from_slice(&self.cost);
        let limit = nv + n_slack;
        tab.optimize(&phase2, &|j| j < limit, &mut budget)?;
        let full = tab.current();
        let x = full[..nv].iter().map(|&v| v.max(0.0)).collect::<Vec<_>>();
        let objective = x.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            pivots: 50 * (cols + m) + 1000 - budget,
        })
    }
}
