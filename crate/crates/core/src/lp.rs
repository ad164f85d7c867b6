//! Small dense linear programs and concave-quadratic maximization on polytopes.
//!
//! The worst-case variance problems have at most a few dozen variables and
//! constraints, so a two-phase tableau simplex with Bland's rule is enough.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

/// `maximize c·x` subject to `A_ub x <= b_ub`, `A_eq x = b_eq`, `lo <= x <= hi`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let piv = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f.abs() > 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Maximizes `obj · z` over the columns allowed by `allowed`.
    fn optimize(&mut self, obj: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<()> {
        let rhs = self.width;
        for _ in 0..10_000 {
            // reduced costs r_j = obj_j − Σ_i obj_{basis i} row_i[j]
            let mut entering = None;
            for j in 0..self.width {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut red = obj[j];
                for (i, row) in self.rows.iter().enumerate() {
                    red -= obj[self.basis[i]] * row[j];
                }
                if red > EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > EPS {
                    let ratio = row[rhs] / row[col];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Infeasible("objective is unbounded".into()));
            };
            self.pivot(r, col);
        }
        Err(Error::Infeasible("simplex iteration limit reached".into()))
    }
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        Self {
            c: vec![0.0; n],
            a_ub: Vec::new(),
            b_ub: Vec::new(),
            a_eq: Vec::new(),
            b_eq: Vec::new(),
            lo: vec![0.0; n],
            hi: vec![f64::INFINITY; n],
        }
    }

    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.c.len();
        // shift to y = x − lo >= 0; finite upper bounds become rows
        let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new(); // (coeffs, rhs, is_equality)
        let shift = |a: &[f64], b: f64| b - a.iter().zip(&self.lo).map(|(x, l)| x * l).sum::<f64>();
        for (a, &b) in self.a_ub.iter().zip(&self.b_ub) {
            rows.push((a.clone(), shift(a, b), false));
        }
        for j in 0..n {
            if self.hi[j].is_finite() {
                let mut a = vec![0.0; n];
                a[j] = 1.0;
                rows.push((a, self.hi[j] - self.lo[j], false));
            }
        }
        for (a, &b) in self.a_eq.iter().zip(&self.b_eq) {
            rows.push((a.clone(), shift(a, b), true));
        }
        if self.lo.iter().any(|l| !l.is_finite()) {
            return Err(Error::Infeasible("variables need finite lower bounds".into()));
        }

        let m = rows.len();
        let n_slack = rows.iter().filter(|r| !r.2).count();
        let n_art = m;
        let width = n + n_slack + n_art;
        let mut tab = Tableau { rows: Vec::with_capacity(m), basis: vec![0; m], width };
        let mut slack = n;
        for (i, (a, b, eq)) in rows.iter().enumerate() {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(a);
            if !eq {
                row[slack] = 1.0;
            }
            row[width] = *b;
            let flip = *b < 0.0;
            if flip {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            if !eq && !flip {
                tab.basis[i] = slack;
            } else {
                row[n + n_slack + i] = 1.0;
                tab.basis[i] = n + n_slack + i;
            }
            if !eq {
                slack += 1;
            }
            tab.rows.push(row);
        }

        // phase 1: drive artificials to zero
        let art_start = n + n_slack;
        let mut phase1 = vec![0.0; width];
        phase1[art_start..].iter_mut().for_each(|v| *v = -1.0);
        tab.optimize(&phase1, &|_| true)?;
        let infeasibility: f64 =
            tab.basis.iter().enumerate().filter(|(_, &b)| b >= art_start).map(|(i, _)| tab.rows[i][width]).sum();
        if infeasibility > 1e-9 {
            return Err(Error::Infeasible(format!("constraints cannot be met (residual {infeasibility:e})")));
        }
        // move degenerate artificials out of the basis where possible
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| tab.rows[i][j].abs() > 1e-9) {
                    tab.pivot(i, col);
                }
            }
        }

        // phase 2
        let mut obj = vec![0.0; width];
        obj[..n].copy_from_slice(&self.c);
        tab.optimize(&obj, &|j| j < art_start)?;

        let mut y = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                y[b] = tab.rows[i][width];
            }
        }
        let x: Vec<f64> = y.iter().zip(&self.lo).map(|(v, l)| v + l).collect();
        let value = self.c.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, value })
    }
}

/// Result of maximizing `a·x − (b·x)²` over a polytope.
#[derive(Debug, Clone)]
pub(crate) struct QuadraticMax {
    pub value: f64,
    pub x: Vec<f64>,
}

/// Maximizes the concave `a·x − (b·x)²` over the feasible set of `base`.
///
/// For fixed `t = b·x` the problem is an LP whose optimum `L(t)` is concave and
/// piecewise linear in `t`, so `L(t) − t²` is concave and golden-section search
/// over the attainable range of `t` finds the maximum.
pub(crate) fn maximize_concave_quadratic(base: &LinearProgram, a: &[f64], b: &[f64]) -> Result<QuadraticMax> {
    // rescale so the simplex tolerances see O(1) coefficients
    let scale = a
        .iter()
        .map(|v| v.abs().sqrt())
        .chain(b.iter().map(|v| v.abs()))
        .fold(0.0f64, f64::max);
    if scale > 0.0 && !(1e-3..=1e3).contains(&scale) {
        let a: Vec<f64> = a.iter().map(|v| v / (scale * scale)).collect();
        let b: Vec<f64> = b.iter().map(|v| v / scale).collect();
        let best = maximize_concave_quadratic(base, &a, &b)?;
        return Ok(QuadraticMax { value: best.value * scale * scale, x: best.x });
    }
    let with_objective = |c: &[f64], fix: Option<f64>| -> Result<LpSolution> {
        let mut lp = base.clone();
        lp.c = c.to_vec();
        if let Some(t) = fix {
            lp.a_eq.push(b.to_vec());
            lp.b_eq.push(t);
        }
        lp.solve()
    };
    let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
    let t_max = with_objective(b, None)?.value;
    let t_min = -with_objective(&neg_b, None)?.value;

    let eval = |t: f64| -> Result<(f64, Vec<f64>)> {
        let sol = with_objective(a, Some(t))?;
        Ok((sol.value - t * t, sol.x))
    };

    let mut best = eval(t_min)?;
    let upper = eval(t_max)?;
    if upper.0 > best.0 {
        best = upper;
    }
    if t_max - t_min > 1e-13 {
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (t_min, t_max);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let mut f1 = eval(x1)?;
        let mut f2 = eval(x2)?;
        while hi - lo > 1e-11 * (1.0 + t_max.abs()) {
            if f1.0 >= f2.0 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = eval(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = eval(x2)?;
            }
        }
        for cand in [f1, f2] {
            if cand.0 > best.0 {
                best = cand;
            }
        }
    }
    Ok(QuadraticMax { value: best.0, x: best.1 })
}
