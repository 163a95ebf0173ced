//! Labeled multigraphs, live-arc scenarios, instances and spread evaluation.

use std::collections::{HashSet, VecDeque};

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type LabelId = u32;

/// Average spread over the scenario batch, kept as an exact fraction.
pub type Spread = Ratio<u64>;

/// Marker for scenario arcs that do not correspond to a base arc
/// (shortcuts added by [`ScenarioGraph::with_pure_label_shortcuts`]).
pub const SHORTCUT_ARC: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub label: LabelId,
}

impl Arc {
    pub fn new(tail: NodeId, head: NodeId, label: LabelId) -> Self {
        Arc { tail, head, label }
    }
}

/// Directed multigraph whose arcs each carry one label.
///
/// Parallel arcs between the same ordered pair are allowed as long as their
/// labels differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDigraph {
    node_count: usize,
    label_count: usize,
    arcs: Vec<Arc>,
}

impl LabeledDigraph {
    pub fn new(node_count: usize, label_count: usize, arcs: Vec<Arc>) -> Result<Self> {
        if node_count > u32::MAX as usize || arcs.len() >= u32::MAX as usize {
            return Err(Error::InvalidGraph("graph too large for 32-bit indices".into()));
        }
        let mut seen = HashSet::with_capacity(arcs.len());
        for (i, a) in arcs.iter().enumerate() {
            if a.tail as usize >= node_count || a.head as usize >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "arc {i} ({}, {}) references a node outside 0..{node_count}",
                    a.tail, a.head
                )));
            }
            if a.label as usize >= label_count {
                return Err(Error::InvalidGraph(format!(
                    "arc {i} has label {} outside 0..{label_count}",
                    a.label
                )));
            }
            if !seen.insert(*a) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate arc ({}, {}) with label {}",
                    a.tail, a.head, a.label
                )));
            }
        }
        Ok(LabeledDigraph {
            node_count,
            label_count,
            arcs,
        })
    }

    /// Replaces each undirected edge `{u, v}` by the arcs `(u, v)` and `(v, u)`
    /// with the edge's label. A self-loop yields a single arc.
    pub fn from_undirected(
        node_count: usize,
        label_count: usize,
        edges: &[(NodeId, NodeId, LabelId)],
    ) -> Result<Self> {
        let mut arcs = Vec::with_capacity(edges.len() * 2);
        for &(u, v, k) in edges {
            arcs.push(Arc::new(u, v, k));
            if u != v {
                arcs.push(Arc::new(v, u, k));
            }
        }
        Self::new(node_count, label_count, arcs)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, index: usize) -> Arc {
        self.arcs[index]
    }

    /// Arc indices grouped by label (the partition `A_k`).
    pub fn arcs_by_label(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.label_count];
        for (i, a) in self.arcs.iter().enumerate() {
            groups[a.label as usize].push(i);
        }
        groups
    }
}

/// A set of labels stored as a bitmask.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LabelSet {
    words: Vec<u64>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(label_count: usize) -> Self {
        LabelSet {
            words: vec![0; label_count.div_ceil(64)],
        }
    }

    pub fn insert(&mut self, label: LabelId) -> bool {
        let (w, b) = (label as usize / 64, label % 64);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let had = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !had
    }

    pub fn remove(&mut self, label: LabelId) -> bool {
        let (w, b) = (label as usize / 64, label % 64);
        match self.words.get_mut(w) {
            Some(word) if *word >> b & 1 == 1 => {
                *word &= !(1 << b);
                true
            }
            _ => false,
        }
    }

    #[inline]
    pub fn contains(&self, label: LabelId) -> bool {
        self.words
            .get(label as usize / 64)
            .is_some_and(|w| w >> (label % 64) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &LabelSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Labels in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
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

    pub fn to_vec(&self) -> Vec<LabelId> {
        self.iter().collect()
    }
}

impl FromIterator<LabelId> for LabelSet {
    fn from_iter<T: IntoIterator<Item = LabelId>>(iter: T) -> Self {
        let mut set = LabelSet::new();
        for k in iter {
            set.insert(k);
        }
        set
    }
}

/// Live arcs of every sampled scenario, as sorted indices into the base arc list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioSet {
    live: Vec<Vec<u32>>,
}

impl ScenarioSet {
    pub fn new(arc_count: usize, mut live: Vec<Vec<u32>>) -> Result<Self> {
        for (w, arcs) in live.iter_mut().enumerate() {
            arcs.sort_unstable();
            if let Some(&last) = arcs.last() {
                if last as usize >= arc_count {
                    return Err(Error::InvalidInstance(format!(
                        "scenario {w} references arc {last} but the graph has {arc_count} arcs"
                    )));
                }
            }
            if arcs.windows(2).any(|p| p[0] == p[1]) {
                return Err(Error::InvalidInstance(format!("scenario {w} lists an arc twice")));
            }
        }
        Ok(ScenarioSet { live })
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn live_arcs(&self, scenario: usize) -> &[u32] {
        &self.live[scenario]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.live.iter().map(Vec::as_slice)
    }
}

/// Outgoing-arc adjacency of one live-arc graph (compressed rows).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioGraph {
    offsets: Vec<u32>,
    heads: Vec<NodeId>,
    labels: Vec<LabelId>,
    arc_ids: Vec<u32>,
}

impl ScenarioGraph {
    pub fn from_live_arcs(graph: &LabeledDigraph, live: &[u32]) -> Self {
        let n = graph.node_count();
        let mut degree = vec![0u32; n + 1];
        for &a in live {
            degree[graph.arc(a as usize).tail as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let m = live.len();
        let mut heads = vec![0; m];
        let mut labels = vec![0; m];
        let mut arc_ids = vec![0; m];
        for &a in live {
            let arc = graph.arc(a as usize);
            let slot = fill[arc.tail as usize] as usize;
            fill[arc.tail as usize] += 1;
            heads[slot] = arc.head;
            labels[slot] = arc.label;
            arc_ids[slot] = a;
        }
        ScenarioGraph {
            offsets,
            heads,
            labels,
            arc_ids,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn arc_count(&self) -> usize {
        self.heads.len()
    }

    /// Slot range of the outgoing arcs of `u`.
    #[inline]
    pub fn out_range(&self, u: NodeId) -> std::ops::Range<usize> {
        self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize
    }

    #[inline]
    pub fn head(&self, slot: usize) -> NodeId {
        self.heads[slot]
    }

    #[inline]
    pub fn label(&self, slot: usize) -> LabelId {
        self.labels[slot]
    }

    /// Base arc index of a slot, or [`SHORTCUT_ARC`].
    pub fn arc_id(&self, slot: usize) -> u32 {
        self.arc_ids[slot]
    }

    /// Tail node of every slot, in slot order.
    pub fn tails(&self) -> Vec<NodeId> {
        let mut tails = Vec::with_capacity(self.arc_count());
        for u in 0..self.node_count() as u32 {
            tails.extend(self.out_range(u).map(|_| u));
        }
        tails
    }

    /// `(tail, head, label)` for every slot.
    pub fn triples(&self) -> Vec<(NodeId, NodeId, LabelId)> {
        let mut out = Vec::with_capacity(self.arc_count());
        for u in 0..self.node_count() as u32 {
            for s in self.out_range(u) {
                out.push((u, self.heads[s], self.labels[s]));
            }
        }
        out
    }

    /// Nodes reachable from `sources` over arcs whose label passes `usable`,
    /// sources included. Sorted.
    pub fn reach_filtered(&self, sources: &[NodeId], usable: impl Fn(LabelId) -> bool) -> Vec<NodeId> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for slot in self.out_range(u) {
                let v = self.heads[slot];
                if !seen[v as usize] && usable(self.labels[slot]) {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        (0..n as u32).filter(|&v| seen[v as usize]).collect()
    }

    pub fn reach(&self, sources: &[NodeId], blocked: &LabelSet) -> Vec<NodeId> {
        self.reach_filtered(sources, |k| !blocked.contains(k))
    }

    pub fn reach_count(&self, sources: &[NodeId], blocked: &LabelSet) -> usize {
        self.reach(sources, blocked).len()
    }

    /// Adds, for every seed `i`, label `k` and non-seed node `j` joined to `i`
    /// by a directed path using only label-`k` arcs, a direct arc `(i, j)` with
    /// label `k` unless one is already present.
    ///
    /// Reachability under any set of blocked labels is unchanged.
    pub fn with_pure_label_shortcuts(&self, seeds: &[NodeId]) -> ScenarioGraph {
        let n = self.node_count();
        let mut is_seed = vec![false; n];
        for &s in seeds {
            is_seed[s as usize] = true;
        }
        let mut seed_list: Vec<NodeId> = seeds.to_vec();
        seed_list.sort_unstable();
        seed_list.dedup();

        let mut extra: Vec<Vec<(NodeId, LabelId)>> = vec![Vec::new(); n];
        let mut mark = vec![u32::MAX; n];
        let mut stamp = 0u32;
        let mut stack = Vec::new();
        for &i in &seed_list {
            let mut present: HashSet<(NodeId, LabelId)> = HashSet::new();
            let mut seed_labels: Vec<LabelId> = Vec::new();
            for slot in self.out_range(i) {
                present.insert((self.heads[slot], self.labels[slot]));
                seed_labels.push(self.labels[slot]);
            }
            seed_labels.sort_unstable();
            seed_labels.dedup();
            for &k in &seed_labels {
                stamp += 1;
                mark[i as usize] = stamp;
                stack.clear();
                stack.push(i);
                let mut found = Vec::new();
                while let Some(u) = stack.pop() {
                    for slot in self.out_range(u) {
                        let v = self.heads[slot];
                        if self.labels[slot] == k && mark[v as usize] != stamp {
                            mark[v as usize] = stamp;
                            stack.push(v);
                            found.push(v);
                        }
                    }
                }
                found.sort_unstable();
                for j in found {
                    if j != i && !is_seed[j as usize] && !present.contains(&(j, k)) {
                        extra[i as usize].push((j, k));
                    }
                }
            }
        }
        if extra.iter().all(Vec::is_empty) {
            return self.clone();
        }

        let added: usize = extra.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut heads = Vec::with_capacity(self.arc_count() + added);
        let mut labels = Vec::with_capacity(self.arc_count() + added);
        let mut arc_ids = Vec::with_capacity(self.arc_count() + added);
        offsets.push(0u32);
        for (u, shortcuts) in extra.iter().enumerate() {
            for slot in self.out_range(u as u32) {
                heads.push(self.heads[slot]);
                labels.push(self.labels[slot]);
                arc_ids.push(self.arc_ids[slot]);
            }
            for &(j, k) in shortcuts {
                heads.push(j);
                labels.push(k);
                arc_ids.push(SHORTCUT_ARC);
            }
            offsets.push(heads.len() as u32);
        }
        ScenarioGraph {
            offsets,
            heads,
            labels,
            arc_ids,
        }
    }
}

/// A complete problem instance: graph, label costs, budget, seeds and scenarios.
#[derive(Debug, Clone)]
pub struct Instance {
    graph: LabeledDigraph,
    costs: Vec<f64>,
    budget: f64,
    seeds: Vec<NodeId>,
    scenarios: ScenarioSet,
    scenario_graphs: Vec<ScenarioGraph>,
}

impl Instance {
    /// `costs[k] == f64::INFINITY` marks label `k` as unblockable.
    pub fn new(
        graph: LabeledDigraph,
        costs: Vec<f64>,
        budget: f64,
        seeds: Vec<NodeId>,
        scenarios: ScenarioSet,
    ) -> Result<Self> {
        if costs.len() != graph.label_count() {
            return Err(Error::InvalidInstance(format!(
                "{} costs given for {} labels",
                costs.len(),
                graph.label_count()
            )));
        }
        if let Some((k, c)) = costs
            .iter()
            .enumerate()
            .find(|(_, c)| c.is_nan() || **c < 0.0 || **c == f64::NEG_INFINITY)
        {
            return Err(Error::InvalidInstance(format!("label {k} has invalid cost {c}")));
        }
        if !budget.is_finite() || budget < 0.0 {
            return Err(Error::InvalidInstance(format!("invalid budget {budget}")));
        }
        if seeds.is_empty() {
            return Err(Error::InvalidInstance("seed set is empty".into()));
        }
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::InvalidInstance("seed listed twice".into()));
        }
        if let Some(&s) = sorted.iter().find(|&&s| s as usize >= graph.node_count()) {
            return Err(Error::InvalidInstance(format!("seed {s} is not a node")));
        }
        if scenarios.is_empty() {
            return Err(Error::InvalidInstance("no scenarios".into()));
        }
        for w in 0..scenarios.len() {
            if let Some(&a) = scenarios.live_arcs(w).last() {
                if a as usize >= graph.arc_count() {
                    return Err(Error::InvalidInstance(format!(
                        "scenario {w} references missing arc {a}"
                    )));
                }
            }
        }
        let scenario_graphs = scenarios
            .iter()
            .map(|live| ScenarioGraph::from_live_arcs(&graph, live))
            .collect();
        Ok(Instance {
            graph,
            costs,
            budget,
            seeds,
            scenarios,
            scenario_graphs,
        })
    }

    pub fn graph(&self) -> &LabeledDigraph {
        &self.graph
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Seeds in the order they were given.
    pub fn seeds(&self) -> &[NodeId] {
        &self.seeds
    }

    pub fn scenarios(&self) -> &ScenarioSet {
        &self.scenarios
    }

    pub fn scenario_count(&self) -> usize {
        self.scenarios.len()
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn label_count(&self) -> usize {
        self.graph.label_count()
    }

    pub fn scenario_graph(&self, scenario: usize) -> &ScenarioGraph {
        &self.scenario_graphs[scenario]
    }

    pub fn scenario_graphs(&self) -> &[ScenarioGraph] {
        &self.scenario_graphs
    }

    pub fn with_budget(&self, budget: f64) -> Result<Instance> {
        Instance::new(
            self.graph.clone(),
            self.costs.clone(),
            budget,
            self.seeds.clone(),
            self.scenarios.clone(),
        )
    }

    pub fn with_scenarios(&self, scenarios: ScenarioSet) -> Result<Instance> {
        Instance::new(
            self.graph.clone(),
            self.costs.clone(),
            self.budget,
            self.seeds.clone(),
            scenarios,
        )
    }

    pub fn is_unblockable(&self, label: LabelId) -> bool {
        self.costs[label as usize].is_infinite()
    }

    pub fn unblockable_labels(&self) -> LabelSet {
        (0..self.label_count() as u32)
            .filter(|&k| self.is_unblockable(k))
            .collect()
    }

    pub fn blocking_cost(&self, blocked: &LabelSet) -> f64 {
        blocked.iter().map(|k| self.costs[k as usize]).sum()
    }

    /// Within budget (with a small absolute slack for float costs) and free of
    /// unblockable labels.
    pub fn is_feasible(&self, blocked: &LabelSet) -> bool {
        blocked
            .iter()
            .all(|k| (k as usize) < self.label_count() && !self.is_unblockable(k))
            && self.blocking_cost(blocked) <= self.budget + 1e-9
    }

    fn check_scenario(&self, scenario: usize) -> Result<()> {
        if scenario >= self.scenario_count() {
            return Err(Error::InvalidScenario {
                index: scenario,
                count: self.scenario_count(),
            });
        }
        Ok(())
    }

    /// Nodes reached from the seeds in `scenario` once every arc carrying a
    /// label of `blocked` is removed. Sorted; seeds are always included.
    pub fn reach_set(&self, scenario: usize, blocked: &LabelSet) -> Result<Vec<NodeId>> {
        self.check_scenario(scenario)?;
        Ok(self.scenario_graphs[scenario].reach(&self.seeds, blocked))
    }

    pub fn eval_spread(&self, scenario: usize, blocked: &LabelSet) -> Result<usize> {
        self.reach_set(scenario, blocked).map(|r| r.len())
    }

    /// Sum of the per-scenario spreads.
    pub fn total_spread(&self, blocked: &LabelSet) -> u64 {
        self.scenario_graphs
            .iter()
            .map(|g| g.reach_count(&self.seeds, blocked) as u64)
            .sum()
    }

    /// Average spread over the scenarios, exact. No budget check.
    pub fn eval_objective(&self, blocked: &LabelSet) -> Spread {
        Ratio::new(self.total_spread(blocked), self.scenario_count() as u64)
    }

    /// Like [`Instance::eval_objective`] but rejects infeasible blockings.
    pub fn eval_objective_checked(&self, blocked: &LabelSet) -> Result<Spread> {
        if let Some(k) = blocked.iter().find(|&k| self.is_unblockable(k)) {
            return Err(Error::UnblockableLabel(k));
        }
        let cost = self.blocking_cost(blocked);
        if cost > self.budget + 1e-9 {
            return Err(Error::BudgetExceeded {
                cost,
                budget: self.budget,
            });
        }
        Ok(self.eval_objective(blocked))
    }

    /// Per scenario, the seeds plus every node they reach over live arcs with
    /// unblockable labels. Such nodes are infected under every feasible blocking.
    pub fn extended_seed_sets(&self) -> ExtendedSeedSets {
        let unblockable = self.unblockable_labels();
        ExtendedSeedSets {
            sets: self
                .scenario_graphs
                .iter()
                .map(|g| g.reach_filtered(&self.seeds, |k| unblockable.contains(k)))
                .collect(),
        }
    }

    /// The seed set itself in every scenario (extension disabled).
    pub fn plain_seed_sets(&self) -> ExtendedSeedSets {
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        ExtendedSeedSets {
            sets: vec![seeds; self.scenario_count()],
        }
    }

    /// Scenario graphs augmented with pure-label shortcuts from the seeds.
    pub fn pure_label_path_closure(&self) -> Vec<ScenarioGraph> {
        self.scenario_graphs
            .iter()
            .map(|g| g.with_pure_label_shortcuts(&self.seeds))
            .collect()
    }
}

/// Per-scenario seed sets `I^w`, each sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedSeedSets {
    sets: Vec<Vec<NodeId>>,
}

impl ExtendedSeedSets {
    pub fn get(&self, scenario: usize) -> &[NodeId] {
        &self.sets[scenario]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn total_size(&self) -> u64 {
        self.sets.iter().map(|s| s.len() as u64).sum()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Base arcs of the six-node, four-label example network (nodes renumbered 1..6 -> 0..5).
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

    /// The three-scenario example with seeds {1, 4}, unit costs, budget 1.
    pub fn three_scenario_example() -> Instance {
        let graph = LabeledDigraph::new(6, 4, example_arcs()).unwrap();
        // arc indices into example_arcs()
        let live = vec![
            vec![1, 3, 4, 6, 7, 8],
            vec![1, 2, 3, 4, 5, 8],
            vec![0, 1, 3, 4, 6, 7],
        ];
        let scenarios = ScenarioSet::new(graph.arc_count(), live).unwrap();
        Instance::new(graph, vec![1.0; 4], 1.0, vec![0, 3], scenarios).unwrap()
    }

    /// The same network with every arc live in a single scenario.
    pub fn deterministic_example(budget: f64) -> Instance {
        let graph = LabeledDigraph::new(6, 4, example_arcs()).unwrap();
        let scenarios = ScenarioSet::new(9, vec![(0..9).collect()]).unwrap();
        Instance::new(graph, vec![1.0; 4], budget, vec![0, 3], scenarios).unwrap()
    }
}
