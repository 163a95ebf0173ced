//! Benders optimality cuts.
//!
//! A cut for scenario `w` reads `theta_w >= C - sum_k c_k x_k`, where `theta_w`
//! counts infected nodes outside the scenario's seed set `I^w`. The
//! combinatorial separator grows a shortest-path forest from `I^w` with arc
//! lengths `max(x_k, eps)`; every node at distance below one is reachable and
//! contributes to `C` and to the coefficients of the labels on its path.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{ExtendedSeedSets, Instance, LabelId, LabelSet, NodeId, ScenarioGraph};
use crate::lp::{LinearProgram, LpStatus, RowKind, Sense};

/// Absolute tolerance for declaring a cut violated.
pub const VIOLATION_TOL: f64 = 1e-6;

/// How label occurrences on activation paths become cut coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiftMode {
    /// Count every occurrence.
    N,
    /// Count each label at most once per path.
    P,
    /// As `P`, over graphs with pure-label shortcuts, and repeated labels on a
    /// path cost nothing.
    H,
}

impl fmt::Display for LiftMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiftMode::N => "N",
            LiftMode::P => "P",
            LiftMode::H => "H",
        })
    }
}

impl FromStr for LiftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "N" => Ok(LiftMode::N),
            "P" => Ok(LiftMode::P),
            "H" => Ok(LiftMode::H),
            _ => Err(Error::InvalidConfig(format!("unknown lift mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BendersCut {
    pub scenario: usize,
    pub constant: u64,
    /// Nonzero coefficients, sorted by label.
    pub coefficients: Vec<(LabelId, u64)>,
    pub lift: LiftMode,
    pub extended_seeds: bool,
}

impl BendersCut {
    /// Right-hand side `C - sum_k c_k x_k`.
    pub fn rhs(&self, x: &[f64]) -> f64 {
        self.constant as f64
            - self
                .coefficients
                .iter()
                .map(|&(k, c)| c as f64 * x[k as usize])
                .sum::<f64>()
    }

    pub fn rhs_binary(&self, blocked: &LabelSet) -> i64 {
        self.constant as i64
            - self
                .coefficients
                .iter()
                .filter(|(k, _)| blocked.contains(*k))
                .map(|&(_, c)| c as i64)
                .sum::<i64>()
    }

    pub fn is_violated(&self, x: &[f64], theta: f64) -> bool {
        self.rhs(x) > theta + VIOLATION_TOL
    }

    pub fn coefficient(&self, label: LabelId) -> u64 {
        self.coefficients
            .binary_search_by_key(&label, |e| e.0)
            .map_or(0, |i| self.coefficients[i].1)
    }

    /// `w C k:c ... lift=L violated=0|1`
    pub fn trace_line(&self, violated: bool) -> String {
        let mut s = format!("{} {}", self.scenario, self.constant);
        for (k, c) in &self.coefficients {
            s.push_str(&format!(" {k}:{c}"));
        }
        s.push_str(&format!(" lift={} violated={}", self.lift, violated as u8));
        s
    }
}

/// `min(1e-6, 1 / (2 (n + 1)))`: small enough that a path of `n` zero-cost
/// arcs stays below length one.
pub fn epsilon_for(node_count: usize) -> f64 {
    (1e-6f64).min(1.0 / (2.0 * (node_count as f64 + 1.0)))
}

const NONE: u32 = u32::MAX;

/// Shortest-path forest grown from the scenario's seed set.
#[derive(Debug, Clone)]
pub struct ActivationForest {
    /// Distance under the perturbed lengths; `f64::INFINITY` (or 1 with early
    /// exit) when never labelled.
    pub dist: Vec<f64>,
    /// Tail of the forest arc into each node, `None` for roots and unreached nodes.
    pub parent: Vec<Option<NodeId>>,
    /// Adjacency slot of the forest arc into each node.
    pub pred_slot: Vec<Option<usize>>,
    /// Reachable nodes (distance below one) in the order they were settled;
    /// roots come first.
    pub order: Vec<NodeId>,
    pub is_root: Vec<bool>,
    path_labels: Vec<u64>,
    words: usize,
}

impl ActivationForest {
    pub fn is_reachable(&self, v: NodeId) -> bool {
        self.dist[v as usize] < 1.0
    }

    /// Distinct labels on the activation path of `v` (tracked for lifts P and H only).
    pub fn path_labels(&self, v: NodeId) -> Vec<LabelId> {
        let w = &self.path_labels[v as usize * self.words..(v as usize + 1) * self.words];
        bits(w).collect()
    }

    /// Number of reachable nodes in the subtree of each node, itself included.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let mut size = vec![0u64; self.dist.len()];
        for &v in self.order.iter().rev() {
            size[v as usize] += 1;
            if let Some(p) = self.parent[v as usize] {
                size[p as usize] += size[v as usize];
            }
        }
        size
    }
}

fn bits(words: &[u64]) -> impl Iterator<Item = LabelId> + '_ {
    words.iter().enumerate().flat_map(|(wi, &word)| {
        let mut w = word;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros();
            w &= w - 1;
            Some(wi as u32 * 64 + b)
        })
    })
}

#[derive(Clone, Copy)]
struct QueueEntry {
    dist: f64,
    node: NodeId,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    // max-heap: smaller distance, then smaller node, is greater
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Grows the activation forest of `roots` in `graph` under fractional blocking `x`.
pub fn activation_forest(
    graph: &ScenarioGraph,
    roots: &[NodeId],
    x: &[f64],
    label_count: usize,
    lift: LiftMode,
    epsilon: f64,
    early_exit: bool,
) -> ActivationForest {
    let n = graph.node_count();
    let track = lift != LiftMode::N;
    let words = if track { label_count.div_ceil(64).max(1) } else { 0 };
    let mut dist = vec![if early_exit { 1.0 } else { f64::INFINITY }; n];
    let mut parent = vec![NONE; n];
    let mut pred_slot = vec![usize::MAX; n];
    let mut settled = vec![false; n];
    let mut is_root = vec![false; n];
    let mut path_labels = vec![0u64; n * words];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    for &r in roots {
        if !is_root[r as usize] {
            is_root[r as usize] = true;
            dist[r as usize] = 0.0;
            heap.push(QueueEntry { dist: 0.0, node: r });
        }
    }
    while let Some(QueueEntry { dist: du, node: u }) = heap.pop() {
        let ui = u as usize;
        if settled[ui] || du > dist[ui] {
            continue;
        }
        settled[ui] = true;
        if du < 1.0 {
            order.push(u);
        }
        for slot in graph.out_range(u) {
            let v = graph.head(slot) as usize;
            if settled[v] {
                continue;
            }
            let k = graph.label(slot);
            let kw = k as usize / 64;
            let kb = 1u64 << (k % 64);
            let repeated = lift == LiftMode::H && path_labels[ui * words + kw] & kb != 0;
            let len = if repeated { 0.0 } else { x[k as usize].max(epsilon) };
            let dv = du + len;
            if dv < dist[v] {
                dist[v] = dv;
                parent[v] = u;
                pred_slot[v] = slot;
                if track {
                    let (src, dst) = (ui * words, v * words);
                    for w in 0..words {
                        path_labels[dst + w] = path_labels[src + w];
                    }
                    path_labels[dst + kw] |= kb;
                }
                heap.push(QueueEntry {
                    dist: dv,
                    node: v as NodeId,
                });
            }
        }
    }
    ActivationForest {
        dist,
        parent: parent.into_iter().map(|p| (p != NONE).then_some(p)).collect(),
        pred_slot: pred_slot
            .into_iter()
            .map(|s| (s != usize::MAX).then_some(s))
            .collect(),
        order,
        is_root,
        path_labels,
        words,
    }
}

/// Separation routine used for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationMethod {
    Combinatorial(LiftMode),
    /// Solve the dual of the arc-based subproblem as an LP.
    Lp,
}

/// Per-instance separation state: seed sets, lift graphs, tolerances.
pub struct Separator<'a> {
    instance: &'a Instance,
    method: SeparationMethod,
    seed_sets: ExtendedSeedSets,
    extended: bool,
    closure: Option<Vec<ScenarioGraph>>,
    blockable: Vec<bool>,
    epsilon: f64,
    early_exit: bool,
}

impl<'a> Separator<'a> {
    pub fn new(instance: &'a Instance, method: SeparationMethod, extended_seeds: bool) -> Self {
        let seed_sets = if extended_seeds {
            instance.extended_seed_sets()
        } else {
            instance.plain_seed_sets()
        };
        let closure = (method == SeparationMethod::Combinatorial(LiftMode::H))
            .then(|| instance.pure_label_path_closure());
        Separator {
            instance,
            method,
            seed_sets,
            extended: extended_seeds,
            closure,
            blockable: (0..instance.label_count() as u32)
                .map(|k| !instance.is_unblockable(k))
                .collect(),
            epsilon: epsilon_for(instance.node_count()),
            early_exit: true,
        }
    }

    pub fn with_early_exit(mut self, early_exit: bool) -> Self {
        self.early_exit = early_exit;
        self
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn method(&self) -> SeparationMethod {
        self.method
    }

    pub fn seed_sets(&self) -> &ExtendedSeedSets {
        &self.seed_sets
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Graph searched for `scenario` (with shortcuts under lift H).
    pub fn graph(&self, scenario: usize) -> &ScenarioGraph {
        match &self.closure {
            Some(g) => &g[scenario],
            None => self.instance.scenario_graph(scenario),
        }
    }

    fn lift(&self) -> LiftMode {
        match self.method {
            SeparationMethod::Combinatorial(l) => l,
            SeparationMethod::Lp => LiftMode::N,
        }
    }

    pub fn forest(&self, scenario: usize, x: &[f64]) -> ActivationForest {
        activation_forest(
            self.graph(scenario),
            self.seed_sets.get(scenario),
            x,
            self.instance.label_count(),
            self.lift(),
            self.epsilon,
            self.early_exit,
        )
    }

    fn finish(&self, scenario: usize, constant: u64, coef: Vec<u64>) -> BendersCut {
        BendersCut {
            scenario,
            constant,
            coefficients: coef
                .into_iter()
                .enumerate()
                .filter(|&(k, c)| c > 0 && self.blockable[k])
                .map(|(k, c)| (k as LabelId, c))
                .collect(),
            lift: self.lift(),
            extended_seeds: self.extended,
        }
    }

    /// Cut for `scenario` at `x` from the activation forest.
    pub fn combinatorial_cut(&self, scenario: usize, x: &[f64]) -> BendersCut {
        let forest = self.forest(scenario, x);
        let graph = self.graph(scenario);
        let mut coef = vec![0u64; self.instance.label_count()];
        let mut constant = 0u64;
        match self.lift() {
            LiftMode::N => {
                let size = forest.subtree_sizes();
                for &v in &forest.order {
                    if let Some(slot) = forest.pred_slot[v as usize] {
                        constant += 1;
                        coef[graph.label(slot) as usize] += size[v as usize];
                    }
                }
            }
            LiftMode::P | LiftMode::H => {
                let w = forest.words;
                for &v in &forest.order {
                    if !forest.is_root[v as usize] {
                        constant += 1;
                        let labels = &forest.path_labels[v as usize * w..(v as usize + 1) * w];
                        for k in bits(labels) {
                            coef[k as usize] += 1;
                        }
                    }
                }
            }
        }
        self.finish(scenario, constant, coef)
    }

    /// Cut for `scenario` at `x`, using the configured method.
    pub fn cut(&self, scenario: usize, x: &[f64]) -> Result<BendersCut> {
        match self.method {
            SeparationMethod::Combinatorial(_) => Ok(self.combinatorial_cut(scenario, x)),
            SeparationMethod::Lp => {
                let (alpha, label_beta, _) = solve_dsabf(self.instance, scenario, x)?;
                let seeds = self.seed_sets.get(scenario).len() as u64;
                let constant = alpha.round().max(0.0) as u64;
                let coef = label_beta.iter().map(|b| b.round().max(0.0) as u64).collect();
                Ok(self.finish(scenario, constant.saturating_sub(seeds), coef))
            }
        }
    }

    /// Cut at `x` and whether it cuts off `theta`.
    pub fn separate(&self, scenario: usize, x: &[f64], theta: f64) -> Result<(BendersCut, bool)> {
        let cut = self.cut(scenario, x)?;
        let violated = cut.is_violated(x, theta);
        Ok((cut, violated))
    }

    /// Exact cut at a binary point.
    pub fn cut_at(&self, scenario: usize, blocked: &LabelSet) -> Result<BendersCut> {
        let x = indicator(blocked, self.instance.label_count());
        self.cut(scenario, &x)
    }

    /// Violated cuts for about a `tau` fraction of the scenarios, scanning
    /// scenarios by increasing `theta` (ties by index).
    pub fn cut_sampling(&self, theta: &[f64], x: &[f64], tau: f64) -> Result<Vec<BendersCut>> {
        let count = self.instance.scenario_count();
        let target = ((tau * count as f64 - 1e-9).ceil() as usize).clamp(1, count);
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]).then(a.cmp(&b)));
        if target == count {
            // every scenario gets examined; separate them concurrently
            let cuts = order
                .par_iter()
                .map(|&w| self.separate(w, x, theta[w]))
                .collect::<Result<Vec<_>>>()?;
            return Ok(cuts.into_iter().filter(|c| c.1).map(|c| c.0).collect());
        }
        let mut found = Vec::new();
        for w in order {
            let (cut, violated) = self.separate(w, x, theta[w])?;
            if violated {
                found.push(cut);
                if found.len() == target {
                    break;
                }
            }
        }
        Ok(found)
    }
}

pub fn indicator(blocked: &LabelSet, label_count: usize) -> Vec<f64> {
    (0..label_count as u32)
        .map(|k| if blocked.contains(k) { 1.0 } else { 0.0 })
        .collect()
}

/// Dual values of the arc-based subproblem for one scenario, indexed by the
/// adjacency slots of the scenario graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DualArcSolution {
    pub scenario: usize,
    /// `(seed, alpha)` in the instance's seed order.
    pub alpha: Vec<(NodeId, f64)>,
    pub beta: Vec<f64>,
}

impl DualArcSolution {
    pub fn objective(&self, instance: &Instance, x: &[f64]) -> f64 {
        let g = instance.scenario_graph(self.scenario);
        let a: f64 = self.alpha.iter().map(|p| p.1).sum();
        let b: f64 = (0..g.arc_count())
            .map(|s| self.beta[s] * x[g.label(s) as usize])
            .sum();
        a - b
    }

    /// Largest violation of the node constraints
    /// `[v seed] alpha_v + sum_in beta - sum_out beta <= 1` and of nonnegativity.
    pub fn max_violation(&self, instance: &Instance) -> f64 {
        let g = instance.scenario_graph(self.scenario);
        let mut balance = vec![0.0; g.node_count()];
        let mut worst: f64 = 0.0;
        for &(i, a) in &self.alpha {
            balance[i as usize] += a;
            worst = worst.max(-a);
        }
        for u in 0..g.node_count() as NodeId {
            for s in g.out_range(u) {
                balance[u as usize] -= self.beta[s];
                balance[g.head(s) as usize] += self.beta[s];
                worst = worst.max(-self.beta[s]);
            }
        }
        balance.iter().fold(worst, |m, &b| m.max(b - 1.0))
    }
}

/// Dual solution read off the activation forest of the plain seed set:
/// `alpha_i` is the size of seed `i`'s subtree and `beta_a` the number of
/// reachable nodes whose activation path uses arc `a`.
pub fn construct_dual_abf(instance: &Instance, scenario: usize, x: &[f64]) -> DualArcSolution {
    let graph = instance.scenario_graph(scenario);
    let forest = activation_forest(
        graph,
        instance.seeds(),
        x,
        instance.label_count(),
        LiftMode::N,
        epsilon_for(instance.node_count()),
        true,
    );
    let size = forest.subtree_sizes();
    let mut beta = vec![0.0; graph.arc_count()];
    for &v in &forest.order {
        if let Some(s) = forest.pred_slot[v as usize] {
            beta[s] = size[v as usize] as f64;
        }
    }
    DualArcSolution {
        scenario,
        alpha: instance
            .seeds()
            .iter()
            .map(|&i| (i, size[i as usize] as f64))
            .collect(),
        beta,
    }
}

/// `sum over reachable v of (1 - d_v)` with true lengths `x_k` along the
/// activation forest.
pub fn forest_value(instance: &Instance, scenario: usize, x: &[f64]) -> f64 {
    let graph = instance.scenario_graph(scenario);
    let forest = activation_forest(
        graph,
        instance.seeds(),
        x,
        instance.label_count(),
        LiftMode::N,
        epsilon_for(instance.node_count()),
        true,
    );
    let mut d = vec![0.0; graph.node_count()];
    let mut total = 0.0;
    for &v in &forest.order {
        if let (Some(p), Some(s)) = (forest.parent[v as usize], forest.pred_slot[v as usize]) {
            d[v as usize] = d[p as usize] + x[graph.label(s) as usize];
        }
        total += 1.0 - d[v as usize];
    }
    total
}

/// The dual LP of the arc-based subproblem for `scenario` at `x`:
/// maximize `sum alpha - sum beta_a x_k(a)` subject to one `<= 1` row per
/// node. Columns are the seeds in instance order, then the adjacency slots.
pub fn dsabf_lp(instance: &Instance, scenario: usize, x: &[f64]) -> LinearProgram {
    let graph = instance.scenario_graph(scenario);
    let n = graph.node_count();
    let mut lp = LinearProgram::new(Sense::Maximize);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &i in instance.seeds() {
        let j = lp.add_var(1.0, 0.0, f64::INFINITY);
        rows[i as usize].push((j, 1.0));
    }
    for u in 0..n as NodeId {
        for s in graph.out_range(u) {
            let j = lp.add_var(-x[graph.label(s) as usize], 0.0, f64::INFINITY);
            rows[u as usize].push((j, -1.0));
            rows[graph.head(s) as usize].push((j, 1.0));
        }
    }
    for r in rows {
        lp.add_row(r, RowKind::Le, 1.0);
    }
    lp
}

/// Solves the dual LP; returns `(sum alpha, per-label sum of beta, optimum)`.
fn solve_dsabf(instance: &Instance, scenario: usize, x: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let lp = dsabf_lp(instance, scenario, x);
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!(
            "dual subproblem of scenario {scenario} ended {:?}",
            sol.status
        )));
    }
    let seeds = instance.seeds().len();
    let graph = instance.scenario_graph(scenario);
    let alpha = sol.x[..seeds].iter().sum();
    let mut per_label = vec![0.0; instance.label_count()];
    for s in 0..graph.arc_count() {
        per_label[graph.label(s) as usize] += sol.x[seeds + s];
    }
    Ok((alpha, per_label, sol.objective))
}

/// Cut from the LP dual over the plain seed set, with its LP optimum.
pub fn separate_lp_abf(
    instance: &Instance,
    scenario: usize,
    x: &[f64],
    theta: f64,
) -> Result<(BendersCut, bool, f64)> {
    let sep = Separator::new(instance, SeparationMethod::Lp, false);
    let (_, _, optimum) = solve_dsabf(instance, scenario, x)?;
    let (cut, violated) = sep.separate(scenario, x, theta)?;
    Ok((cut, violated, optimum))
}
