//! Dense bounded-variable revised simplex.
//!
//! Small-to-medium LPs only: the basis inverse is kept as a dense `m x m`
//! matrix and updated with product-form pivots, refactored periodically.
//! Variables need a finite lower bound (upper bounds may be infinite).
//! Pricing is Dantzig's rule; after a run of degenerate pivots it falls back
//! to Bland's rule until the objective moves again, which rules out cycling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub kind: RowKind,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// A column of the equality form: a structural variable or the slack of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Var(usize),
    Slack(usize),
}

/// Simplex basis usable as a warm start. Nonbasic columns not listed in
/// `at_upper` sit at their lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Basis {
    pub basic: Vec<Column>,
    pub at_upper: Vec<Column>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    /// Sensitivity of the optimal objective to each row's right-hand side,
    /// in the problem's own sense.
    pub row_duals: Vec<f64>,
    pub basis: Option<Basis>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cost.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, kind: RowKind, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, kind, rhs });
        self.rows.len() - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.cost[var] = cost;
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with_basis(None)
    }

    /// Solves starting from `basis` when it is valid and primal feasible,
    /// otherwise from scratch.
    pub fn solve_with_basis(&self, basis: Option<&Basis>) -> Result<LpSolution> {
        self.validate()?;
        let mut tab = Tableau::new(self);
        let warm = basis.is_some_and(|b| tab.load_basis(b));
        if !warm {
            tab.cold_start();
            if tab.has_artificials() {
                tab.set_phase_one_costs();
                tab.run(false)?;
                if tab.artificial_sum() > 1e-7 {
                    return Ok(tab.finish(LpStatus::Infeasible));
                }
                tab.retire_artificials();
            }
        }
        tab.set_phase_two_costs();
        let status = tab.run(true)?;
        Ok(tab.finish(status))
    }

    fn validate(&self) -> Result<()> {
        for j in 0..self.num_vars() {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !l.is_finite() || u.is_nan() || l > u || !self.cost[j].is_finite() {
                return Err(Error::Lp(format!(
                    "variable {j} needs a finite lower bound not above its upper bound (got [{l}, {u}])"
                )));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite()
                || r.coeffs
                    .iter()
                    .any(|&(j, a)| j >= self.num_vars() || !a.is_finite())
            {
                return Err(Error::Lp(format!("row {i} is malformed")));
            }
        }
        Ok(())
    }
}

struct Tableau<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// sparse columns, structural then slack then artificial
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<usize>,
    at_upper: Vec<bool>,
    binv: Vec<f64>,
    rhs: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

const NOT_BASIC: usize = usize::MAX;

impl<'a> Tableau<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let total = n + 2 * m;
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); total];
        let mut lb = Vec::with_capacity(total);
        let mut ub = Vec::with_capacity(total);
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    cols[j].push((i, a));
                }
            }
        }
        // merge duplicate entries of the same row in a column
        for col in cols.iter_mut().take(n) {
            col.sort_by_key(|e| e.0);
            col.dedup_by(|b, a| {
                if a.0 == b.0 {
                    a.1 += b.1;
                    true
                } else {
                    false
                }
            });
        }
        lb.extend_from_slice(&lp.lower);
        ub.extend_from_slice(&lp.upper);
        for (i, row) in lp.rows.iter().enumerate() {
            let (coef, hi) = match row.kind {
                RowKind::Le => (1.0, f64::INFINITY),
                RowKind::Ge => (-1.0, f64::INFINITY),
                RowKind::Eq => (1.0, 0.0),
            };
            cols[n + i].push((i, coef));
            lb.push(0.0);
            ub.push(hi);
        }
        for i in 0..m {
            cols[n + m + i].push((i, 1.0));
            lb.push(0.0);
            ub.push(0.0);
        }
        Tableau {
            lp,
            m,
            n,
            cols,
            lb,
            ub,
            cost: vec![0.0; total],
            x: vec![0.0; total],
            basis: Vec::new(),
            position: vec![NOT_BASIC; total],
            at_upper: vec![false; total],
            binv: vec![0.0; m * m],
            rhs: lp.rows.iter().map(|r| r.rhs).collect(),
            iterations: 0,
            since_refactor: 0,
        }
    }

    fn column_index(&self, c: Column) -> Option<usize> {
        match c {
            Column::Var(j) if j < self.n => Some(j),
            Column::Slack(i) if i < self.m => Some(self.n + i),
            _ => None,
        }
    }

    fn column_ref(&self, j: usize) -> Option<Column> {
        if j < self.n {
            Some(Column::Var(j))
        } else if j < self.n + self.m {
            Some(Column::Slack(j - self.n))
        } else {
            None
        }
    }

    fn has_artificials(&self) -> bool {
        self.basis.iter().any(|&j| j >= self.n + self.m)
    }

    fn artificial_sum(&self) -> f64 {
        (self.n + self.m..self.n + 2 * self.m).map(|j| self.x[j]).sum()
    }

    fn cold_start(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in 0..n + m {
            self.at_upper[j] = false;
            self.x[j] = self.lb[j];
            self.position[j] = NOT_BASIC;
        }
        let mut residual = self.rhs.clone();
        for j in 0..n {
            if self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    residual[i] -= a * self.x[j];
                }
            }
        }
        self.basis = Vec::with_capacity(m);
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (i, &r) in residual.iter().enumerate() {
            let slack = n + i;
            let coef = self.cols[slack][0].1;
            let value = r / coef;
            let art = n + m + i;
            if value >= self.lb[slack] - PRIMAL_TOL && value <= self.ub[slack] + PRIMAL_TOL {
                self.basis.push(slack);
                self.position[slack] = i;
                self.x[slack] = value;
                self.binv[i * m + i] = 1.0 / coef;
            } else {
                let sign = if r >= 0.0 { 1.0 } else { -1.0 };
                self.cols[art][0].1 = sign;
                self.ub[art] = f64::INFINITY;
                self.basis.push(art);
                self.position[art] = i;
                self.x[art] = r.abs();
                self.binv[i * m + i] = sign;
            }
        }
        self.since_refactor = 0;
    }

    fn load_basis(&mut self, basis: &Basis) -> bool {
        if basis.basic.len() != self.m {
            return false;
        }
        let mut cols = Vec::with_capacity(self.m);
        for &c in &basis.basic {
            match self.column_index(c) {
                Some(j) if self.position[j] == NOT_BASIC => {
                    self.position[j] = cols.len();
                    cols.push(j);
                }
                _ => return false,
            }
        }
        self.basis = cols;
        for &c in &basis.at_upper {
            if let Some(j) = self.column_index(c) {
                if self.position[j] == NOT_BASIC && self.ub[j].is_finite() {
                    self.at_upper[j] = true;
                }
            }
        }
        for j in 0..self.n + self.m {
            if self.position[j] == NOT_BASIC {
                self.x[j] = if self.at_upper[j] { self.ub[j] } else { self.lb[j] };
            }
        }
        if !self.refactor() {
            self.reset_basis_state();
            return false;
        }
        let feasible = self
            .basis
            .iter()
            .all(|&j| self.x[j] >= self.lb[j] - PRIMAL_TOL && self.x[j] <= self.ub[j] + PRIMAL_TOL);
        if !feasible {
            self.reset_basis_state();
        }
        feasible
    }

    fn reset_basis_state(&mut self) {
        for p in self.position.iter_mut() {
            *p = NOT_BASIC;
        }
        for u in self.at_upper.iter_mut() {
            *u = false;
        }
        self.basis.clear();
    }

    /// Rebuilds the basis inverse and the basic values. Returns false when the
    /// basis matrix is singular.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[j] {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let (mut best, mut best_abs) = (c, a[c * m + c].abs());
            for r in c + 1..m {
                let v = a[r * m + c].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs < 1e-11 {
                return false;
            }
            if best != c {
                for k in 0..m {
                    a.swap(c * m + k, best * m + k);
                    inv.swap(c * m + k, best * m + k);
                }
            }
            let p = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= p;
                inv[c * m + k] /= p;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[r * m + k] -= f * a[c * m + k];
                            inv[r * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.recompute_basic_values();
        self.since_refactor = 0;
        true
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut r = self.rhs.clone();
        for j in 0..self.cols.len() {
            if self.position[j] == NOT_BASIC && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    r[i] -= a * self.x[j];
                }
            }
        }
        for (p, &j) in self.basis.iter().enumerate() {
            let row = &self.binv[p * m..(p + 1) * m];
            self.x[j] = row.iter().zip(&r).map(|(b, v)| b * v).sum();
        }
    }

    fn set_phase_one_costs(&mut self) {
        let (n, m) = (self.n, self.m);
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        for j in n + m..n + 2 * m {
            self.cost[j] = 1.0;
        }
    }

    fn set_phase_two_costs(&mut self) {
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        let flip = if self.lp.sense == Sense::Maximize {
            -1.0
        } else {
            1.0
        };
        for j in 0..self.n {
            self.cost[j] = flip * self.lp.cost[j];
        }
    }

    /// Pins artificials to zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        let (n, m) = (self.n, self.m);
        for j in n + m..n + 2 * m {
            self.ub[j] = 0.0;
            if self.position[j] == NOT_BASIC {
                self.x[j] = 0.0;
                self.at_upper[j] = false;
            }
        }
        for r in 0..m {
            let j = self.basis[r];
            if j < n + m {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            let candidate = (0..n + m).find(|&k| {
                self.position[k] == NOT_BASIC
                    && self.lb[k] < self.ub[k]
                    && self.cols[k].iter().map(|&(i, a)| row[i] * a).sum::<f64>().abs() > 1e-7
            });
            if let Some(k) = candidate {
                let w = self.ftran(k);
                self.pivot(r, k, &w);
                self.x[j] = 0.0;
            }
        }
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + i] * a;
            }
        }
        w
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = self.cost[j];
            if c != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, entering: usize, w: &[f64]) {
        let m = self.m;
        let leaving = self.basis[r];
        let p = w[r];
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, &wi) in w.iter().enumerate() {
            if i != r && wi != 0.0 {
                let row = &mut self.binv[i * m..(i + 1) * m];
                for (b, pr) in row.iter_mut().zip(&pivot_row) {
                    *b -= wi * pr;
                }
            }
        }
        self.basis[r] = entering;
        self.position[entering] = r;
        self.position[leaving] = NOT_BASIC;
        self.at_upper[entering] = false;
        self.since_refactor += 1;
    }

    fn run(&mut self, phase_two: bool) -> Result<LpStatus> {
        let total = self.cols.len();
        let limit = 50_000 + 200 * (self.m + self.n);
        let refactor_every = self.m.clamp(50, 400);
        let mut degenerate = 0usize;
        loop {
            if self.iterations > limit {
                return Err(Error::Lp(format!("iteration limit {limit} reached")));
            }
            if self.since_refactor >= refactor_every && !self.refactor() {
                return Err(Error::Lp("basis became singular".into()));
            }
            let y = self.duals();
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..total {
                if self.position[j] != NOT_BASIC || self.lb[j] >= self.ub[j] {
                    continue;
                }
                let d = self.cost[j] - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>();
                let dir = if !self.at_upper[j] && d < -DUAL_TOL {
                    1.0
                } else if self.at_upper[j] && d > DUAL_TOL {
                    -1.0
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = Some((j, dir));
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(LpStatus::Optimal);
            };
            let w = self.ftran(j);

            // ratio test: x_B moves by -dir * t * w
            let mut step = self.ub[j] - self.lb[j];
            let mut leave: Option<usize> = None;
            let mut leave_pivot = 0.0;
            for (r, &wr) in w.iter().enumerate() {
                if wr.abs() <= PIVOT_TOL {
                    continue;
                }
                let bj = self.basis[r];
                let rate = -dir * wr;
                let room = if rate < 0.0 {
                    (self.x[bj] - self.lb[bj]).max(0.0) / -rate
                } else if self.ub[bj].is_finite() {
                    (self.ub[bj] - self.x[bj]).max(0.0) / rate
                } else {
                    continue;
                };
                let better = if room < step - 1e-12 {
                    true
                } else if room <= step + 1e-12 {
                    match leave {
                        None => true,
                        Some(cur) if bland => bj < self.basis[cur],
                        Some(_) => wr.abs() > leave_pivot,
                    }
                } else {
                    false
                };
                if better {
                    step = room.min(step);
                    leave = Some(r);
                    leave_pivot = wr.abs();
                }
            }
            if !step.is_finite() {
                return if phase_two {
                    Ok(LpStatus::Unbounded)
                } else {
                    Err(Error::Lp("phase one unbounded".into()))
                };
            }
            self.iterations += 1;
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for (r, &wr) in w.iter().enumerate() {
                if wr != 0.0 {
                    let bj = self.basis[r];
                    self.x[bj] -= dir * step * wr;
                }
            }
            self.x[j] += dir * step;
            match leave {
                None => {
                    // bound flip
                    self.at_upper[j] = dir > 0.0;
                    self.x[j] = if self.at_upper[j] { self.ub[j] } else { self.lb[j] };
                }
                Some(r) => {
                    let bj = self.basis[r];
                    let rate = -dir * w[r];
                    let to_upper = rate > 0.0;
                    self.pivot(r, j, &w);
                    self.at_upper[bj] = to_upper && self.ub[bj].is_finite();
                    self.x[bj] = if self.at_upper[bj] {
                        self.ub[bj]
                    } else {
                        self.lb[bj]
                    };
                }
            }
        }
    }

    fn finish(mut self, status: LpStatus) -> LpSolution {
        if status == LpStatus::Optimal {
            // fresh inverse for accurate reported values; on failure keep the updated one
            let _ = self.refactor();
        }
        let flip = if self.lp.sense == Sense::Maximize {
            -1.0
        } else {
            1.0
        };
        let mut x: Vec<f64> = self.x[..self.n].to_vec();
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lb[j], self.ub[j]);
        }
        let objective = x.iter().zip(&self.lp.cost).map(|(v, c)| v * c).sum();
        let (row_duals, basis) = if status == LpStatus::Optimal {
            let y = self.duals().into_iter().map(|v| flip * v).collect();
            let basic: Option<Vec<Column>> = self.basis.iter().map(|&j| self.column_ref(j)).collect();
            let at_upper = (0..self.n + self.m)
                .filter(|&j| self.position[j] == NOT_BASIC && self.at_upper[j])
                .filter_map(|j| self.column_ref(j))
                .collect();
            (y, basic.map(|basic| Basis { basic, at_upper }))
        } else {
            (vec![0.0; self.m], None)
        };
        LpSolution {
            status,
            objective,
            x,
            row_duals,
            basis,
            iterations: self.iterations,
        }
    }
}
