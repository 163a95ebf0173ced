//! Synthetic instances: random skeleton, heavy-tailed labels, optional
//! parallel arcs, live-arc scenarios and reverse-reachable seed selection.
//!
//! All randomness comes from [`crate::rng::stream`], one stream per purpose
//! and index, so outputs depend only on the configuration and the seed.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Arc, Instance, LabelId, LabeledDigraph, NodeId, ScenarioSet};
use crate::rng::{geometric, stream, unit_open_closed, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphModel {
    /// Barabasi-Albert preferential attachment.
    Ba,
    /// Erdos-Renyi `G(n, m)`.
    Er,
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ba" => Ok(GraphModel::Ba),
            "er" => Ok(GraphModel::Er),
            _ => Err(Error::InvalidConfig(format!("unknown graph model `{s}`"))),
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphModel::Ba => "ba",
            GraphModel::Er => "er",
        })
    }
}

/// Label frequency profile; class 2 spreads arcs over more labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelClass {
    One,
    Two,
}

impl LabelClass {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(LabelClass::One),
            2 => Ok(LabelClass::Two),
            _ => Err(Error::InvalidConfig(format!(
                "label class must be 1 or 2, got {n}"
            ))),
        }
    }

    /// Mean of the raw label variate. Tabulated for 20 and 30 labels; other
    /// label counts scale the 20-label mean proportionally.
    pub fn mean(self, blockable_labels: u32) -> f64 {
        match (self, blockable_labels) {
            (LabelClass::One, 20) => 5.0,
            (LabelClass::One, 30) => 8.0,
            (LabelClass::Two, 20) => 8.0,
            (LabelClass::Two, 30) => 12.0,
            (LabelClass::One, n) => n as f64 * 0.25,
            (LabelClass::Two, n) => n as f64 * 0.4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub model: GraphModel,
    pub nodes: usize,
    /// Target number of undirected edges.
    pub edges: usize,
    /// Blockable labels `1..=n_L`; label 0 collects the tail and is unblockable.
    pub blockable_labels: u32,
    pub label_class: LabelClass,
    pub p_live: f64,
    pub scenario_count: usize,
    pub seed_count: usize,
    pub rr_samples: usize,
    pub budget: f64,
    pub parallel_arcs: bool,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            model: GraphModel::Ba,
            nodes: 1000,
            edges: 5000,
            blockable_labels: 20,
            label_class: LabelClass::One,
            p_live: 0.1,
            scenario_count: 50,
            seed_count: 50,
            rr_samples: 1000,
            budget: 4.0,
            parallel_arcs: false,
            rng_seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.nodes == 0 {
            return bad("at least one node is required".into());
        }
        if self.blockable_labels == 0 {
            return bad("at least one blockable label is required".into());
        }
        if !(0.0..=1.0).contains(&self.p_live) {
            return bad(format!("p_live {} outside [0, 1]", self.p_live));
        }
        if self.scenario_count == 0 {
            return bad("at least one scenario is required".into());
        }
        if self.seed_count == 0 || self.seed_count > self.nodes {
            return bad(format!(
                "seed count {} must lie in 1..={}",
                self.seed_count, self.nodes
            ));
        }
        if self.rr_samples == 0 {
            return bad("at least one RR set is required".into());
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return bad(format!("invalid budget {}", self.budget));
        }
        Ok(())
    }
}

/// Undirected skeleton as `(u, v)` pairs with `u != v`.
pub fn gen_graph(
    model: GraphModel,
    nodes: usize,
    edges: usize,
    rng_seed: u64,
) -> Result<Vec<(NodeId, NodeId)>> {
    match model {
        GraphModel::Ba => Ok(barabasi_albert(nodes, edges, rng_seed)),
        GraphModel::Er => erdos_renyi(nodes, edges, rng_seed),
    }
}

fn barabasi_albert(n: usize, m: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    let mut rng = stream(seed, Purpose::Graph, 0);
    let k = m.div_ceil(n.max(1)).max(1);
    let core = k.min(n);
    let mut edges = Vec::new();
    // each edge contributes both endpoints, so a uniform pick is degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u as NodeId, v as NodeId));
            endpoints.extend([u as NodeId, v as NodeId]);
        }
    }
    for v in core..n {
        let mut targets: Vec<NodeId> = Vec::with_capacity(k);
        for _ in 0..k.min(v) {
            let mut picked = None;
            for _ in 0..v {
                let t = if endpoints.is_empty() {
                    rng.gen_range(0..v) as NodeId
                } else {
                    endpoints[rng.gen_range(0..endpoints.len())]
                };
                if !targets.contains(&t) {
                    picked = Some(t);
                    break;
                }
            }
            if let Some(t) = picked {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((v as NodeId, t));
            endpoints.extend([v as NodeId, t]);
        }
    }
    edges
}

fn erdos_renyi(n: usize, m: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    let max = n * (n - 1) / 2;
    if m > max {
        return Err(Error::InvalidConfig(format!(
            "{m} edges do not fit a simple graph on {n} nodes (at most {max})"
        )));
    }
    let mut rng = stream(seed, Purpose::Graph, 0);
    if m > max / 2 {
        let mut all: Vec<(NodeId, NodeId)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u as NodeId, v as NodeId)))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(m);
        return Ok(all);
    }
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.gen_range(0..n) as NodeId;
        let v = rng.gen_range(0..n) as NodeId;
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    Ok(edges)
}

/// Raw variate `v` (geometric with the class mean) becomes label `v + 1`, or
/// label 0 when that exceeds `n_L`.
pub fn assign_labels_negbin(
    edges: &[(NodeId, NodeId)],
    blockable_labels: u32,
    class: LabelClass,
    rng_seed: u64,
) -> Vec<(NodeId, NodeId, LabelId)> {
    let mut rng = stream(rng_seed, Purpose::Labels, 0);
    let mean = class.mean(blockable_labels);
    edges
        .iter()
        .map(|&(u, v)| (u, v, label_from_raw(geometric(&mut rng, mean), blockable_labels)))
        .collect()
}

pub fn label_from_raw(raw: u64, blockable_labels: u32) -> LabelId {
    if raw + 1 > u64::from(blockable_labels) {
        0
    } else {
        raw as LabelId + 1
    }
}

/// Each arc gains one copy with probability 0.10 and two copies with
/// probability 0.05, labelled uniformly among labels not yet on its endpoint pair.
pub fn add_parallel_arcs(graph: &LabeledDigraph, rng_seed: u64) -> Result<LabeledDigraph> {
    add_parallel_arcs_with(graph, 0.10, 0.05, rng_seed)
}

pub fn add_parallel_arcs_with(
    graph: &LabeledDigraph,
    p_one: f64,
    p_two: f64,
    rng_seed: u64,
) -> Result<LabeledDigraph> {
    let mut rng = stream(rng_seed, Purpose::ParallelArcs, 0);
    let k = graph.label_count() as LabelId;
    let mut present: HashMap<(NodeId, NodeId), Vec<LabelId>> = HashMap::new();
    for a in graph.arcs() {
        present.entry((a.tail, a.head)).or_default().push(a.label);
    }
    let mut arcs = graph.arcs().to_vec();
    for a in graph.arcs() {
        let u = unit_open_closed(&mut rng);
        let copies = if u <= p_one {
            1
        } else if u <= p_one + p_two {
            2
        } else {
            0
        };
        for _ in 0..copies {
            let used = present.get_mut(&(a.tail, a.head)).expect("pair recorded above");
            let free: Vec<LabelId> = (0..k).filter(|l| !used.contains(l)).collect();
            if free.is_empty() {
                return Err(Error::LabelsExhausted {
                    tail: a.tail,
                    head: a.head,
                });
            }
            let label = free[rng.gen_range(0..free.len())];
            used.push(label);
            arcs.push(Arc::new(a.tail, a.head, label));
        }
    }
    LabeledDigraph::new(graph.node_count(), graph.label_count(), arcs)
}

/// Independent coin per (arc, scenario); scenario `w` uses its own stream.
pub fn sample_scenarios(
    graph: &LabeledDigraph,
    p_live: f64,
    count: usize,
    rng_seed: u64,
) -> Result<ScenarioSet> {
    if !(0.0..=1.0).contains(&p_live) {
        return Err(Error::InvalidConfig(format!("p_live {p_live} outside [0, 1]")));
    }
    let m = graph.arc_count();
    let live = (0..count)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream(rng_seed, Purpose::Scenarios, w as u32);
            (0..m as u32).filter(|_| rng.gen_bool(p_live)).collect()
        })
        .collect();
    ScenarioSet::new(m, live)
}

/// Greedy maximum coverage over `rr_samples` reverse-reachable sets, each
/// grown from a uniform root in a lazily sampled live-arc realization.
pub fn select_seeds_imm(
    graph: &LabeledDigraph,
    p_live: f64,
    seed_count: usize,
    rr_samples: usize,
    rng_seed: u64,
) -> Result<Vec<NodeId>> {
    let n = graph.node_count();
    if seed_count > n {
        return Err(Error::InvalidConfig(format!(
            "cannot pick {seed_count} seeds from {n} nodes"
        )));
    }
    if !(0.0..=1.0).contains(&p_live) {
        return Err(Error::InvalidConfig(format!("p_live {p_live} outside [0, 1]")));
    }
    let mut offsets = vec![0usize; n + 1];
    for a in graph.arcs() {
        offsets[a.head as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut tails = vec![0 as NodeId; graph.arc_count()];
    for a in graph.arcs() {
        tails[fill[a.head as usize]] = a.tail;
        fill[a.head as usize] += 1;
    }
    let rr_sets: Vec<Vec<NodeId>> = (0..rr_samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(rng_seed, Purpose::RrSets, r as u32);
            let root = rng.gen_range(0..n) as NodeId;
            let mut seen = HashSet::from([root]);
            let mut queue = vec![root];
            let mut head = 0;
            while head < queue.len() {
                let v = queue[head] as usize;
                head += 1;
                for &u in &tails[offsets[v]..offsets[v + 1]] {
                    if rng.gen_bool(p_live) && seen.insert(u) {
                        queue.push(u);
                    }
                }
            }
            queue
        })
        .collect();

    let mut member_of: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (r, set) in rr_sets.iter().enumerate() {
        for &v in set {
            member_of[v as usize].push(r as u32);
        }
    }
    let mut gain: Vec<usize> = member_of.iter().map(Vec::len).collect();
    let mut covered = vec![false; rr_samples];
    let mut chosen = vec![false; n];
    let mut seeds = Vec::with_capacity(seed_count);
    for _ in 0..seed_count {
        let best = (0..n)
            .filter(|&v| !chosen[v])
            .max_by(|&a, &b| gain[a].cmp(&gain[b]).then(b.cmp(&a)))
            .expect("seed_count <= n");
        chosen[best] = true;
        seeds.push(best as NodeId);
        for &r in &member_of[best] {
            if !covered[r as usize] {
                covered[r as usize] = true;
                for &v in &rr_sets[r as usize] {
                    gain[v as usize] -= 1;
                }
            }
        }
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeParams {
    pub sigma2_max: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub alpha: f64,
    /// Number of feasible decisions; may be large, hence a float.
    pub feasible_count: f64,
}

/// `ceil(3 sigma^2 / (eps - rho)^2 * ln(|X| / alpha))`, floored at zero.
// negated comparisons also reject NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn saa_sample_size(p: &SampleSizeParams) -> Result<u64> {
    if !(p.epsilon > p.rho) || p.rho < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need epsilon > rho >= 0, got epsilon {} and rho {}",
            p.epsilon, p.rho
        )));
    }
    if !(p.alpha > 0.0 && p.alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha {} outside (0, 1)", p.alpha)));
    }
    if !(p.sigma2_max >= 0.0) || !(p.feasible_count > 0.0) {
        return Err(Error::InvalidConfig(
            "sigma2_max and feasible_count must be nonnegative and positive".into(),
        ));
    }
    let gap = p.epsilon - p.rho;
    let bound = 3.0 * p.sigma2_max / (gap * gap) * (p.feasible_count / p.alpha).ln();
    Ok(bound.ceil().max(0.0) as u64)
}

/// The whole pipeline. Label 0 is unblockable, labels `1..=n_L` cost one.
pub fn generate_instance(config: &GenConfig) -> Result<Instance> {
    config.validate()?;
    let skeleton = gen_graph(config.model, config.nodes, config.edges, config.rng_seed)?;
    instance_from_edges(config.nodes, &skeleton, true, config)
}

/// Labels, parallel copies, scenarios and seeds for a given edge list. Only
/// the label, sampling, seed and budget fields of `config` are read.
/// Undirected edges become two arcs sharing one label.
pub fn instance_from_edges(
    node_count: usize,
    edges: &[(NodeId, NodeId)],
    undirected: bool,
    config: &GenConfig,
) -> Result<Instance> {
    let labelled = assign_labels_negbin(
        edges,
        config.blockable_labels,
        config.label_class,
        config.rng_seed,
    );
    let label_count = config.blockable_labels as usize + 1;
    let mut graph = if undirected {
        LabeledDigraph::from_undirected(node_count, label_count, &labelled)?
    } else {
        let arcs = labelled.iter().map(|&(u, v, k)| Arc::new(u, v, k)).collect();
        LabeledDigraph::new(node_count, label_count, arcs)?
    };
    if config.parallel_arcs {
        graph = add_parallel_arcs(&graph, config.rng_seed)?;
    }
    let scenarios = sample_scenarios(&graph, config.p_live, config.scenario_count, config.rng_seed)?;
    let seeds = select_seeds_imm(
        &graph,
        config.p_live,
        config.seed_count,
        config.rr_samples,
        config.rng_seed,
    )?;
    let mut costs = vec![1.0; label_count];
    costs[0] = f64::INFINITY;
    Instance::new(graph, costs, config.budget, seeds, scenarios)
}
