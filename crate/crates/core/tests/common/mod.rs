#![allow(dead_code)]

use labelcut_core::generate::{generate_instance, GenConfig, GraphModel, LabelClass};
use labelcut_core::lp::{LinearProgram, LpStatus, RowKind, Sense};
use labelcut_core::{Arc, Instance, LabelSet, LabeledDigraph, ScenarioSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn set(labels: &[u32]) -> LabelSet {
    labels.iter().copied().collect()
}

/// Six nodes (0-based here, 1-based in the drawing), four labels.
pub fn example_arcs() -> Vec<Arc> {
    [
        (1, 2, 1),
        (1, 3, 0),
        (2, 1, 3),
        (2, 5, 0),
        (3, 2, 2),
        (3, 4, 0),
        (3, 6, 2),
        (4, 5, 1),
        (4, 6, 3),
    ]
    .iter()
    .map(|&(t, h, k)| Arc::new(t - 1, h - 1, k))
    .collect()
}

pub fn three_scenario_example() -> Instance {
    let graph = LabeledDigraph::new(6, 4, example_arcs()).unwrap();
    let live = vec![
        vec![1, 3, 4, 6, 7, 8],
        vec![1, 2, 3, 4, 5, 8],
        vec![0, 1, 3, 4, 6, 7],
    ];
    let scenarios = ScenarioSet::new(9, live).unwrap();
    Instance::new(graph, vec![1.0; 4], 1.0, vec![0, 3], scenarios).unwrap()
}

pub fn deterministic_example(budget: f64) -> Instance {
    let graph = LabeledDigraph::new(6, 4, example_arcs()).unwrap();
    let scenarios = ScenarioSet::new(9, vec![(0..9).collect()]).unwrap();
    Instance::new(graph, vec![1.0; 4], budget, vec![0, 3], scenarios).unwrap()
}

/// a -> b -> c with one label of cost 2, budget 1, seed a.
pub fn chain_instance() -> Instance {
    let graph = LabeledDigraph::new(3, 1, vec![Arc::new(0, 1, 0), Arc::new(1, 2, 0)]).unwrap();
    let scenarios = ScenarioSet::new(2, vec![vec![0, 1]]).unwrap();
    Instance::new(graph, vec![2.0], 1.0, vec![0], scenarios).unwrap()
}

/// Small generated instance; `|K| <= 10`, `|W| <= 10`, `B <= 3`.
pub fn small_instance(seed: u64, max_nodes: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let nodes = rng.gen_range(20..=max_nodes);
    let cfg = GenConfig {
        model: if seed.is_multiple_of(2) {
            GraphModel::Ba
        } else {
            GraphModel::Er
        },
        nodes,
        edges: nodes * rng.gen_range(2..=3),
        blockable_labels: rng.gen_range(4..=9),
        label_class: if seed.is_multiple_of(3) {
            LabelClass::Two
        } else {
            LabelClass::One
        },
        p_live: rng.gen_range(0.15..0.35),
        scenario_count: rng.gen_range(2..=10),
        seed_count: rng.gen_range(1..=6),
        rr_samples: 200,
        budget: rng.gen_range(1..=3) as f64,
        parallel_arcs: seed % 4 == 1,
        rng_seed: seed,
    };
    generate_instance(&cfg).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k)
        .map(|_| match rng.gen_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.gen::<f64>(),
        })
        .collect()
}

/// All budget-feasible blockings.
pub fn feasible_blockings(inst: &Instance) -> Vec<LabelSet> {
    let k = inst.label_count();
    assert!(k <= 16);
    (0u32..1 << k)
        .map(|mask| (0..k as u32).filter(|l| mask >> l & 1 == 1).collect::<LabelSet>())
        .filter(|s| inst.is_feasible(s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Textbook two-phase dense-tableau simplex with Bland's rule. Slow but
/// simple; used only to cross-check the revised simplex.
pub fn reference_solve(lp: &LinearProgram) -> (RefStatus, f64, Vec<f64>) {
    let n = lp.num_vars();
    let flip = if lp.sense() == Sense::Maximize { -1.0 } else { 1.0 };
    let lower: Vec<f64> = (0..n).map(|j| lp.bounds(j).0).collect();
    // rows over shifted variables x' = x - l >= 0
    let mut rows: Vec<(Vec<f64>, RowKind, f64)> = Vec::new();
    for r in lp.rows() {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] += v;
        }
        let shift: f64 = (0..n).map(|j| a[j] * lower[j]).sum();
        rows.push((a, r.kind, r.rhs - shift));
    }
    for j in 0..n {
        let (l, u) = lp.bounds(j);
        if u.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, RowKind::Le, u - l));
        }
    }
    for row in rows.iter_mut() {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                RowKind::Le => RowKind::Ge,
                RowKind::Ge => RowKind::Le,
                RowKind::Eq => RowKind::Eq,
            };
        }
    }
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != RowKind::Eq).count();
    let arts = rows.iter().filter(|r| r.1 != RowKind::Le).count();
    let width = n + slacks + arts;
    let mut t = vec![vec![0.0; width + 1]; m];
    let mut basis = vec![0usize; m];
    let (mut s, mut a) = (n, n + slacks);
    for (i, (coef, kind, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coef);
        t[i][width] = *rhs;
        match kind {
            RowKind::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            RowKind::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
            RowKind::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                a += 1;
            }
        }
    }
    let first_art = n + slacks;
    let phase1: Vec<f64> = (0..width)
        .map(|j| if j >= first_art { 1.0 } else { 0.0 })
        .collect();
    if simplex(&mut t, &mut basis, &phase1, width, width) == RefStatus::Unbounded {
        unreachable!("phase one is bounded");
    }
    let infeas: f64 = (0..m)
        .filter(|&i| basis[i] >= first_art)
        .map(|i| t[i][width])
        .sum();
    if infeas > 1e-7 {
        return (RefStatus::Infeasible, 0.0, Vec::new());
    }
    // drive remaining artificials out where possible
    for i in 0..m {
        if basis[i] >= first_art {
            if let Some(j) = (0..first_art).find(|&j| t[i][j].abs() > 1e-9) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }
    let mut phase2 = vec![0.0; width];
    for (p, c) in phase2.iter_mut().zip(lp.cost()) {
        *p = flip * c;
    }
    if simplex(&mut t, &mut basis, &phase2, first_art, width) == RefStatus::Unbounded {
        return (RefStatus::Unbounded, 0.0, Vec::new());
    }
    let mut x = lower.clone();
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] += t[i][width];
        }
    }
    let obj = (0..n).map(|j| lp.cost()[j] * x[j]).sum();
    (RefStatus::Optimal, obj, x)
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    t[r].iter_mut().for_each(|v| *v /= p);
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pr).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    basis[r] = c;
}

/// Minimizes `cost` over columns `< allowed`; Bland's rule throughout.
fn simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize, width: usize) -> RefStatus {
    loop {
        let reduced = |j: usize, t: &[Vec<f64>]| -> f64 {
            cost[j]
                - t.iter()
                    .zip(basis.iter())
                    .map(|(row, &b)| cost[b] * row[j])
                    .sum::<f64>()
        };
        let entering = (0..allowed).find(|&j| !basis.contains(&j) && reduced(j, t) < -1e-10);
        let Some(c) = entering else {
            return RefStatus::Optimal;
        };
        let mut best: Option<(f64, usize)> = None;
        for (i, row) in t.iter().enumerate() {
            if row[c] > 1e-10 {
                let ratio = row[width] / row[c];
                let better = match best {
                    None => true,
                    Some((r, bi)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && basis[i] < basis[bi]),
                };
                if better {
                    best = Some((ratio, i));
                }
            }
        }
        let Some((_, r)) = best else {
            return RefStatus::Unbounded;
        };
        pivot(t, basis, r, c);
    }
}

pub fn status_matches(ours: LpStatus, theirs: RefStatus) -> bool {
    matches!(
        (ours, theirs),
        (LpStatus::Optimal, RefStatus::Optimal)
            | (LpStatus::Infeasible, RefStatus::Infeasible)
            | (LpStatus::Unbounded, RefStatus::Unbounded)
    )
}
