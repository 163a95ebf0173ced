//! The compact arc-based model, built explicitly for small instances.
//!
//! Variables `x_k` (block label `k`) and `y_v^w` (node `v` infected in
//! scenario `w`); every live arc `(i, j)` with label `k` gives
//! `y_j - y_i + x_k >= 0`, seeds are pinned to one, and the objective is the
//! average of `sum_v y_v^w`. Its LP relaxation is the reference value for the
//! converged fractional root bound of the Benders master.

use crate::graph::{Instance, NodeId};
use crate::lp::{LinearProgram, RowKind, Sense};

pub struct AbfModel {
    pub lp: LinearProgram,
    /// Column of `x_k`.
    pub x: Vec<usize>,
    /// First `y` column of each scenario; node `v` sits at offset `v`.
    pub y_start: Vec<usize>,
}

pub fn abf_relaxation(instance: &Instance) -> AbfModel {
    let k = instance.label_count();
    let n = instance.node_count();
    let count = instance.scenario_count();
    let weight = 1.0 / count as f64;
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x: Vec<usize> = (0..k as u32)
        .map(|l| {
            let hi = if instance.is_unblockable(l) { 0.0 } else { 1.0 };
            lp.add_var(0.0, 0.0, hi)
        })
        .collect();
    let budget_row: Vec<(usize, f64)> = (0..k)
        .filter(|&l| !instance.is_unblockable(l as u32))
        .map(|l| (x[l], instance.costs()[l]))
        .collect();
    lp.add_row(budget_row, RowKind::Le, instance.budget());
    let mut y_start = Vec::with_capacity(count);
    for w in 0..count {
        let start = lp.num_vars();
        y_start.push(start);
        for _ in 0..n {
            lp.add_var(weight, 0.0, 1.0);
        }
        for &s in instance.seeds() {
            lp.set_bounds(start + s as usize, 1.0, 1.0);
        }
        let g = instance.scenario_graph(w);
        for u in 0..n as NodeId {
            for slot in g.out_range(u) {
                let v = g.head(slot) as usize;
                let label = g.label(slot) as usize;
                lp.add_row(
                    vec![(start + v, 1.0), (start + u as usize, -1.0), (x[label], 1.0)],
                    RowKind::Ge,
                    0.0,
                );
            }
        }
    }
    AbfModel { lp, x, y_start }
}
