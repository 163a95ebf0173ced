//! Benders master problem and the branch-and-cut driver.
//!
//! The master minimizes `(1/|W|) sum_w (|I^w| + theta_w)` over `x in [0,1]^K`
//! with the budget row and the pooled cuts. Its LP relaxation is solved
//! through its dual, whose columns are the cuts: adding a cut appends a
//! column and changing variable bounds only changes dual costs, so the
//! previous optimal basis stays primal feasible and warm starts always apply.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::graph::{Instance, LabelId, LabelSet, Spread};
use crate::lp::{Basis, LinearProgram, LpStatus, RowKind, Sense};
use crate::separation::{BendersCut, LiftMode, SeparationMethod, Separator};

/// Algorithm configurations, from the plain LP-separated baseline to the
/// fully enhanced variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    Lp,
    I,
    IPlus,
    IPlusS,
    IPlusSF,
    IPlusSFP,
    IPlusSFH,
    Greedy,
}

impl Setting {
    /// Every setting that proves optimality.
    pub const EXACT: [Setting; 7] = [
        Setting::Lp,
        Setting::I,
        Setting::IPlus,
        Setting::IPlusS,
        Setting::IPlusSF,
        Setting::IPlusSFP,
        Setting::IPlusSFH,
    ];

    pub fn is_exact(self) -> bool {
        self != Setting::Greedy
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Lp => "LP",
            Setting::I => "I",
            Setting::IPlus => "I+",
            Setting::IPlusS => "I+S",
            Setting::IPlusSF => "I+SF",
            Setting::IPlusSFP => "I+SFP",
            Setting::IPlusSFH => "I+SFH",
            Setting::Greedy => "G",
        })
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "LP" => Setting::Lp,
            "I" => Setting::I,
            "I+" => Setting::IPlus,
            "I+S" => Setting::IPlusS,
            "I+SF" => Setting::IPlusSF,
            "I+SFP" => Setting::IPlusSFP,
            "I+SFH" => Setting::IPlusSFH,
            "G" => Setting::Greedy,
            _ => return Err(Error::InvalidConfig(format!("unknown setting `{s}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub setting: Setting,
    /// Fraction of scenarios for which violated cuts are sought per round.
    pub tau: f64,
    pub method: SeparationMethod,
    pub fractional_separation: bool,
    pub max_fractional_rounds: usize,
    /// Use extended seed sets, start from the greedy incumbent and seed the
    /// pool with one cut per scenario at it.
    pub extended_seeds: bool,
    pub greedy_start: bool,
    pub initial_cuts: bool,
    /// Fix labels costing more than the budget to zero.
    pub presolve: bool,
    pub time_limit: Option<Duration>,
    pub integrality_tol: f64,
    pub relative_gap: f64,
    /// Record one trace line per separated cut.
    pub trace: bool,
}

impl SolverSettings {
    pub fn for_setting(setting: Setting) -> Self {
        use Setting::*;
        let enhanced = !matches!(setting, Lp | I);
        SolverSettings {
            setting,
            tau: if matches!(setting, IPlusS | IPlusSF | IPlusSFP | IPlusSFH) {
                0.2
            } else {
                1.0
            },
            method: match setting {
                Lp => SeparationMethod::Lp,
                IPlusSFP => SeparationMethod::Combinatorial(LiftMode::P),
                IPlusSFH => SeparationMethod::Combinatorial(LiftMode::H),
                _ => SeparationMethod::Combinatorial(LiftMode::N),
            },
            fractional_separation: matches!(setting, IPlusSF | IPlusSFP | IPlusSFH),
            max_fractional_rounds: 20,
            extended_seeds: enhanced,
            greedy_start: enhanced,
            initial_cuts: enhanced,
            presolve: true,
            time_limit: None,
            integrality_tol: 1e-6,
            relative_gap: 1e-6,
            trace: false,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tau must lie in (0, 1], got {}",
                self.tau
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub setting: Setting,
    pub blocked: LabelSet,
    /// Exact objective of `blocked`; `None` when no incumbent was found.
    pub objective: Option<Spread>,
    pub upper_bound: f64,
    /// `None` for the heuristic setting.
    pub lower_bound: Option<f64>,
    pub root_bound: Option<f64>,
    pub nodes: u64,
    pub int_cuts: u64,
    pub frac_cuts: u64,
    pub elapsed: Duration,
    pub optimal: bool,
    /// Final cut pool.
    pub cuts: Vec<BendersCut>,
    pub trace: Vec<String>,
}

impl SolveReport {
    /// `100 (UB - LB) / UB`.
    pub fn gap_percent(&self) -> Option<f64> {
        let lb = self.lower_bound?;
        if !self.upper_bound.is_finite() {
            return Some(f64::INFINITY);
        }
        Some((100.0 * (self.upper_bound - lb) / self.upper_bound).max(0.0))
    }
}

pub struct MasterSolution {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub objective: f64,
}

type CutKey = (usize, u64, Vec<(LabelId, u64)>);

/// LP relaxation of the master over a growing, duplicate-free cut pool.
pub struct MasterModel {
    costs: Vec<f64>,
    budget: f64,
    scenario_count: usize,
    constant: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cuts: Vec<BendersCut>,
    seen: HashSet<CutKey>,
    basis: Option<Basis>,
}

impl MasterModel {
    /// `constant` is the objective offset `(1/|W|) sum_w |I^w|`. Infinite costs
    /// (unblockable labels) pin the variable to zero.
    pub fn new(costs: &[f64], budget: f64, scenario_count: usize, constant: f64) -> Self {
        let k = costs.len();
        let mut upper = vec![1.0; k];
        let mut c = costs.to_vec();
        for (l, cost) in c.iter_mut().enumerate() {
            if !cost.is_finite() {
                *cost = 0.0;
                upper[l] = 0.0;
            }
        }
        MasterModel {
            costs: c,
            budget,
            scenario_count,
            constant,
            lower: vec![0.0; k],
            upper,
            cuts: Vec::new(),
            seen: HashSet::new(),
            basis: None,
        }
    }

    pub fn label_count(&self) -> usize {
        self.costs.len()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lower, &self.upper)
    }

    pub fn set_bounds(&mut self, lower: Vec<f64>, upper: Vec<f64>) {
        self.lower = lower;
        self.upper = upper;
    }

    pub fn cuts(&self) -> &[BendersCut] {
        &self.cuts
    }

    /// Adds `cut` unless an identical one is pooled. Returns whether it was new.
    pub fn add_cut(&mut self, cut: BendersCut) -> bool {
        let key = (cut.scenario, cut.constant, cut.coefficients.clone());
        if !self.seen.insert(key) {
            return false;
        }
        self.cuts.push(cut);
        true
    }

    /// The master relaxation stated directly: columns `theta_0..`, then `x_0..`.
    pub fn primal_lp(&self) -> LinearProgram {
        let w = 1.0 / self.scenario_count as f64;
        let mut lp = LinearProgram::new(Sense::Minimize);
        for _ in 0..self.scenario_count {
            lp.add_var(w, 0.0, f64::INFINITY);
        }
        let x0 = self.scenario_count;
        for k in 0..self.label_count() {
            lp.add_var(0.0, self.lower[k], self.upper[k]);
        }
        lp.add_row(
            (0..self.label_count()).map(|k| (x0 + k, self.costs[k])).collect(),
            RowKind::Le,
            self.budget,
        );
        for cut in &self.cuts {
            let mut row = vec![(cut.scenario, 1.0)];
            row.extend(cut.coefficients.iter().map(|&(k, c)| (x0 + k as usize, c as f64)));
            lp.add_row(row, RowKind::Ge, cut.constant as f64);
        }
        lp
    }

    /// Dual of [`MasterModel::primal_lp`] without the constant. Columns: budget
    /// multiplier, lower-bound multipliers, upper-bound multipliers, one per
    /// cut. Rows: one per scenario, then one per label.
    pub fn dual_lp(&self) -> LinearProgram {
        let k = self.label_count();
        let s = self.scenario_count;
        let w = 1.0 / s as f64;
        let mut lp = LinearProgram::new(Sense::Maximize);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); s + k];
        let mu = lp.add_var(-self.budget, 0.0, f64::INFINITY);
        for l in 0..k {
            if self.costs[l] != 0.0 {
                rows[s + l].push((mu, -self.costs[l]));
            }
        }
        for l in 0..k {
            let rho = lp.add_var(self.lower[l], 0.0, f64::INFINITY);
            rows[s + l].push((rho, 1.0));
        }
        for l in 0..k {
            let sigma = lp.add_var(-self.upper[l], 0.0, f64::INFINITY);
            rows[s + l].push((sigma, -1.0));
        }
        for cut in &self.cuts {
            let pi = lp.add_var(cut.constant as f64, 0.0, f64::INFINITY);
            rows[cut.scenario].push((pi, 1.0));
            for &(l, c) in &cut.coefficients {
                rows[s + l as usize].push((pi, c as f64));
            }
        }
        for (i, r) in rows.into_iter().enumerate() {
            if i < s {
                lp.add_row(r, RowKind::Le, w);
            } else {
                lp.add_row(r, RowKind::Eq, 0.0);
            }
        }
        lp
    }

    /// Optimal relaxation, or `None` when the bounds leave no budget-feasible point.
    pub fn solve(&mut self) -> Result<Option<MasterSolution>> {
        let min_cost: f64 = self.costs.iter().zip(&self.lower).map(|(c, l)| c * l).sum();
        if min_cost > self.budget + 1e-9 || self.lower.iter().zip(&self.upper).any(|(l, u)| l > u) {
            return Ok(None);
        }
        let lp = self.dual_lp();
        let sol = lp.solve_with_basis(self.basis.as_ref())?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => return Ok(None),
            LpStatus::Infeasible => {
                return Err(Error::Lp("master dual lost feasibility".into()));
            }
        }
        self.basis = sol.basis.clone();
        let s = self.scenario_count;
        let theta = sol.row_duals[..s].iter().map(|v| v.max(0.0)).collect();
        let x = sol.row_duals[s..]
            .iter()
            .enumerate()
            .map(|(l, v)| v.clamp(self.lower[l], self.upper[l]))
            .collect();
        Ok(Some(MasterSolution {
            x,
            theta,
            objective: self.constant + sol.objective,
        }))
    }
}

/// Repeatedly blocks the affordable label that leaves the smallest total
/// spread (ties: smallest label) until nothing else fits the budget.
pub fn greedy_heuristic(instance: &Instance) -> (LabelSet, Spread) {
    let mut chosen = LabelSet::with_capacity(instance.label_count());
    let mut left = instance.budget();
    loop {
        let mut best: Option<(u64, LabelId)> = None;
        for k in 0..instance.label_count() as LabelId {
            let c = instance.costs()[k as usize];
            if chosen.contains(k) || instance.is_unblockable(k) || c > left + 1e-9 {
                continue;
            }
            let mut trial = chosen.clone();
            trial.insert(k);
            let total = instance.total_spread(&trial);
            if best.is_none_or(|(b, _)| total < b) {
                best = Some((total, k));
            }
        }
        match best {
            Some((_, k)) => {
                chosen.insert(k);
                left -= instance.costs()[k as usize];
            }
            None => break,
        }
    }
    let value = instance.eval_objective(&chosen);
    (chosen, value)
}

/// One cut per scenario at the binary point `blocked`.
pub fn initial_cuts(separator: &Separator<'_>, blocked: &LabelSet) -> Result<Vec<BendersCut>> {
    (0..separator.instance().scenario_count())
        .map(|w| separator.cut_at(w, blocked))
        .collect()
}

pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

pub fn brute_force_oracle(instance: &Instance) -> Result<(LabelSet, Spread)> {
    brute_force_oracle_with_cap(instance, DEFAULT_ORACLE_CAP)
}

/// Enumerates every budget-feasible blocking and returns the
/// lexicographically smallest optimal one.
pub fn brute_force_oracle_with_cap(instance: &Instance, cap: u64) -> Result<(LabelSet, Spread)> {
    let labels: Vec<LabelId> = (0..instance.label_count() as LabelId)
        .filter(|&k| !instance.is_unblockable(k) && instance.costs()[k as usize] <= instance.budget() + 1e-9)
        .collect();
    struct Search<'a> {
        instance: &'a Instance,
        labels: &'a [LabelId],
        cap: u64,
        visited: u64,
        current: LabelSet,
        best: Option<(u64, LabelSet)>,
    }
    impl Search<'_> {
        fn visit(&mut self, from: usize, left: f64) -> Result<()> {
            self.visited += 1;
            if self.visited > self.cap {
                return Err(Error::CapExceeded { cap: self.cap });
            }
            let total = self.instance.total_spread(&self.current);
            if self.best.as_ref().is_none_or(|(b, _)| total < *b) {
                self.best = Some((total, self.current.clone()));
            }
            for i in from..self.labels.len() {
                let k = self.labels[i];
                let c = self.instance.costs()[k as usize];
                if c <= left + 1e-9 {
                    self.current.insert(k);
                    self.visit(i + 1, left - c)?;
                    self.current.remove(k);
                }
            }
            Ok(())
        }
    }
    let mut search = Search {
        instance,
        labels: &labels,
        cap,
        visited: 0,
        current: LabelSet::with_capacity(instance.label_count()),
        best: None,
    };
    search.visit(0, instance.budget())?;
    let (total, set) = search.best.expect("the empty blocking is always feasible");
    Ok((set, Ratio::new(total, instance.scenario_count() as u64)))
}

/// Bounds every variable may take before branching.
fn base_bounds(instance: &Instance, presolve: bool) -> (Vec<f64>, Vec<f64>) {
    let k = instance.label_count();
    let upper = (0..k)
        .map(|l| {
            let c = instance.costs()[l];
            if instance.is_unblockable(l as LabelId) || (presolve && c > instance.budget() + 1e-9) {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    (vec![0.0; k], upper)
}

fn master_for(instance: &Instance, separator: &Separator<'_>, presolve: bool) -> MasterModel {
    let constant = separator.seed_sets().total_size() as f64 / instance.scenario_count() as f64;
    let mut model = MasterModel::new(
        instance.costs(),
        instance.budget(),
        instance.scenario_count(),
        constant,
    );
    let (lo, hi) = base_bounds(instance, presolve);
    model.set_bounds(lo, hi);
    model
}

/// Fractional root bound with cuts separated at every scenario until none is
/// violated by more than `1e-9`. Plain seed sets, no presolve.
pub fn converged_root_bound(instance: &Instance, method: SeparationMethod) -> Result<f64> {
    let separator = Separator::new(instance, method, false);
    let mut model = master_for(instance, &separator, false);
    for _ in 0..100_000 {
        let sol = model
            .solve()?
            .ok_or_else(|| Error::InvalidInstance("budget admits no blocking".into()))?;
        let mut added = false;
        for w in 0..instance.scenario_count() {
            let cut = separator.cut(w, &sol.x)?;
            if cut.rhs(&sol.x) > sol.theta[w] + 1e-9 {
                added |= model.add_cut(cut);
            }
        }
        if !added {
            return Ok(sol.objective);
        }
    }
    Err(Error::Lp("root cut loop did not converge".into()))
}

struct Node {
    bound: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

enum Outcome {
    Pruned,
    Solved,
    Branch {
        k: usize,
        bound: f64,
        up_first: bool,
    },
    /// Time ran out with cuts still being added.
    Interrupted {
        bound: f64,
    },
}

struct Driver<'a> {
    instance: &'a Instance,
    settings: &'a SolverSettings,
    separator: Separator<'a>,
    /// Exact binary-point cuts when the configured lift may fall short there.
    exact: Option<Separator<'a>>,
    model: MasterModel,
    incumbent: Option<(LabelSet, Spread)>,
    upper: f64,
    step: f64,
    int_cuts: u64,
    frac_cuts: u64,
    trace: Vec<String>,
    deadline: Option<Instant>,
}

impl<'a> Driver<'a> {
    fn timed_out(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn prunable(&self, bound: f64) -> bool {
        bound > self.upper - self.step + 1e-7
    }

    fn add_cuts(&mut self, cuts: Vec<BendersCut>) -> u64 {
        let mut added = 0;
        for cut in cuts {
            if self.settings.trace {
                self.trace.push(cut.trace_line(true));
            }
            if self.model.add_cut(cut) {
                added += 1;
            }
        }
        added
    }

    fn offer(&mut self, blocked: LabelSet) {
        let value = self.instance.eval_objective(&blocked);
        let v = *value.numer() as f64 / *value.denom() as f64;
        if v < self.upper {
            self.upper = v;
            self.incumbent = Some((blocked, value));
        }
    }

    /// Cuts separating the binary point `x`; falls back to exact cuts for
    /// scenarios whose `theta` is still below the true spread.
    fn integral_cuts(&mut self, x: &[f64], theta: &[f64]) -> Result<u64> {
        let cuts = self.separator.cut_sampling(theta, x, self.settings.tau)?;
        let added = self.add_cuts(cuts);
        if added > 0 {
            return Ok(added);
        }
        let blocked: LabelSet = (0..x.len() as LabelId).filter(|&k| x[k as usize] > 0.5).collect();
        let sep = self.exact.as_ref().unwrap_or(&self.separator);
        let mut extra = Vec::new();
        for (w, &t) in theta.iter().enumerate() {
            let cut = sep.cut_at(w, &blocked)?;
            if cut.is_violated(x, t) {
                extra.push(cut);
            }
        }
        Ok(self.add_cuts(extra))
    }

    fn process(&mut self, lower: &[f64], upper: &[f64], root: &mut Option<f64>) -> Result<Outcome> {
        self.model.set_bounds(lower.to_vec(), upper.to_vec());
        let mut rounds = 0;
        loop {
            let Some(sol) = self.model.solve()? else {
                return Ok(Outcome::Pruned);
            };
            let bound = sol.objective;
            if self.prunable(bound) {
                root.get_or_insert(bound);
                return Ok(Outcome::Pruned);
            }
            let tol = self.settings.integrality_tol;
            let frac = |v: f64| (v - v.round()).abs();
            let most = (0..sol.x.len())
                .filter(|&k| frac(sol.x[k]) > tol)
                .max_by(|&a, &b| frac(sol.x[a]).total_cmp(&frac(sol.x[b])).then(b.cmp(&a)));
            match most {
                None => {
                    let x: Vec<f64> = sol.x.iter().map(|v| v.round()).collect();
                    let added = self.integral_cuts(&x, &sol.theta)?;
                    self.int_cuts += added;
                    if added > 0 {
                        if self.timed_out() {
                            root.get_or_insert(bound);
                            return Ok(Outcome::Interrupted { bound });
                        }
                        continue;
                    }
                    root.get_or_insert(bound);
                    let blocked = (0..x.len() as LabelId).filter(|&k| x[k as usize] > 0.5).collect();
                    self.offer(blocked);
                    return Ok(Outcome::Solved);
                }
                Some(k) => {
                    if self.settings.fractional_separation
                        && rounds < self.settings.max_fractional_rounds
                        && !self.timed_out()
                    {
                        rounds += 1;
                        let cuts = self
                            .separator
                            .cut_sampling(&sol.theta, &sol.x, self.settings.tau)?;
                        let added = self.add_cuts(cuts);
                        self.frac_cuts += added;
                        if added > 0 {
                            continue;
                        }
                    }
                    root.get_or_insert(bound);
                    return Ok(Outcome::Branch {
                        k,
                        bound,
                        up_first: sol.x[k] >= 0.5,
                    });
                }
            }
        }
    }
}

/// Exact (or, for the greedy setting, heuristic) solve of `instance`.
pub fn branch_and_benders_cut(instance: &Instance, settings: &SolverSettings) -> Result<SolveReport> {
    settings.validate()?;
    let start = Instant::now();
    if settings.setting == Setting::Greedy {
        let (blocked, value) = greedy_heuristic(instance);
        return Ok(SolveReport {
            setting: Setting::Greedy,
            blocked,
            upper_bound: ratio_f64(value),
            objective: Some(value),
            lower_bound: None,
            root_bound: None,
            nodes: 0,
            int_cuts: 0,
            frac_cuts: 0,
            elapsed: start.elapsed(),
            optimal: false,
            cuts: Vec::new(),
            trace: Vec::new(),
        });
    }

    let separator = Separator::new(instance, settings.method, settings.extended_seeds);
    let exact = (settings.method == SeparationMethod::Combinatorial(LiftMode::H)).then(|| {
        Separator::new(
            instance,
            SeparationMethod::Combinatorial(LiftMode::P),
            settings.extended_seeds,
        )
    });
    let model = master_for(instance, &separator, settings.presolve);
    let (base_lo, base_hi) = model.bounds();
    let (base_lo, base_hi) = (base_lo.to_vec(), base_hi.to_vec());
    let mut d = Driver {
        instance,
        settings,
        separator,
        exact,
        model,
        incumbent: None,
        upper: f64::INFINITY,
        step: 1.0 / instance.scenario_count() as f64,
        int_cuts: 0,
        frac_cuts: 0,
        trace: Vec::new(),
        deadline: settings.time_limit.map(|t| start + t),
    };
    if settings.greedy_start {
        let (blocked, _) = greedy_heuristic(instance);
        if settings.initial_cuts {
            let cuts = initial_cuts(&d.separator, &blocked)?;
            d.add_cuts(cuts);
        }
        d.offer(blocked);
    }

    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let mut plunge: Option<Node> = Some(Node {
        bound: f64::NEG_INFINITY,
        lower: base_lo,
        upper: base_hi,
        seq,
    });
    let mut lower_bound = f64::NEG_INFINITY;
    let mut root = None;
    let mut nodes = 0u64;
    let mut timed_out = false;
    loop {
        let open_min = open.peek().map_or(f64::INFINITY, |n: &Node| n.bound);
        let current = plunge.as_ref().map_or(f64::INFINITY, |n| n.bound);
        let global = open_min.min(current).min(d.upper);
        lower_bound = lower_bound.max(global);
        if d.upper.is_finite() && d.upper - lower_bound <= settings.relative_gap * d.upper {
            break;
        }
        let node = match plunge.take() {
            Some(n) => n,
            None => match open.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if d.prunable(node.bound) {
            continue;
        }
        if d.timed_out() {
            open.push(node);
            timed_out = true;
            break;
        }
        nodes += 1;
        match d.process(&node.lower, &node.upper, &mut root)? {
            Outcome::Pruned | Outcome::Solved => {}
            Outcome::Interrupted { bound } => {
                open.push(Node { bound, ..node });
                timed_out = true;
                break;
            }
            Outcome::Branch { k, bound, up_first } => {
                let mut down = Node {
                    bound,
                    lower: node.lower.clone(),
                    upper: node.upper.clone(),
                    seq: 0,
                };
                down.upper[k] = 0.0;
                let mut up = Node {
                    bound,
                    lower: node.lower,
                    upper: node.upper,
                    seq: 0,
                };
                up.lower[k] = 1.0;
                seq += 1;
                down.seq = seq;
                seq += 1;
                up.seq = seq;
                let (first, second) = if up_first { (up, down) } else { (down, up) };
                open.push(second);
                plunge = Some(first);
            }
        }
    }
    if !timed_out && open.is_empty() && plunge.is_none() {
        lower_bound = lower_bound.max(d.upper);
    }
    if d.upper.is_finite() {
        lower_bound = lower_bound.min(d.upper);
    }
    let optimal = d.upper.is_finite() && d.upper - lower_bound <= settings.relative_gap * d.upper;
    let (blocked, objective) = match d.incumbent.take() {
        Some((b, v)) => (b, Some(v)),
        None => (LabelSet::new(), None),
    };
    Ok(SolveReport {
        setting: settings.setting,
        blocked,
        objective,
        upper_bound: d.upper,
        lower_bound: Some(lower_bound),
        root_bound: root,
        nodes,
        int_cuts: d.int_cuts,
        frac_cuts: d.frac_cuts,
        elapsed: start.elapsed(),
        optimal,
        cuts: d.model.cuts().to_vec(),
        trace: d.trace,
    })
}

pub fn ratio_f64(r: Spread) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
