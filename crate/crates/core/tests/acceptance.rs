//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! `ACCEPTANCE_ONLY=3,4` restricts the run to the listed criteria.

mod common;

use std::any::Any;
use std::panic;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{
    chain_instance, deterministic_example, feasible_blockings, random_point, set, small_instance,
    three_scenario_example,
};
use labelcut_core::formulation::abf_relaxation;
use labelcut_core::generate::{
    add_parallel_arcs, generate_instance, sample_scenarios, GenConfig, GraphModel, LabelClass,
};
use labelcut_core::lp::LpStatus;
use labelcut_core::master::converged_root_bound;
use labelcut_core::rng::{geometric, stream, Purpose};
use labelcut_core::separation::{construct_dual_abf, separate_lp_abf, SeparationMethod, Separator};
use labelcut_core::{
    branch_and_benders_cut, brute_force_oracle, Arc, BendersCut, Instance, LabeledDigraph, LiftMode, Setting,
    SolverSettings, Spread,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let criteria: [Criterion; 10] = [
        (1, "worked example values and solves", worked_example),
        (2, "non-submodularity fixture", non_submodularity),
        (3, "oracle equivalence of exact settings", oracle_equivalence),
        (4, "cut validity by enumeration", cut_validity),
        (5, "combinatorial dual matches LP dual", dual_cross_check),
        (
            6,
            "converged lift-N root equals ABF relaxation",
            lp_relaxation_equality,
        ),
        (7, "lifted chain root bounds", chain_bounds),
        (8, "early exit leaves cuts unchanged", early_exit_determinism),
        (9, "scale check", scale_check),
        (10, "generator statistics", generator_statistics),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, name, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(check).unwrap_or_else(|e| Err(panic_text(e)));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2}: PASS  {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {id:>2}: FAIL  {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn panic_text(payload: Box<dyn Any + Send>) -> String {
    let msg = payload
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into());
    format!("panicked: {msg}")
}

fn err(e: labelcut_core::Error) -> String {
    e.to_string()
}

fn worked_example() -> Outcome {
    let inst = three_scenario_example();
    let f2 = inst.eval_objective(&set(&[2]));
    let f0 = inst.eval_objective(&set(&[0]));
    ensure!(f2 == Ratio::new(14, 3), "f({{2}}) = {f2}");
    ensure!(f0 == Ratio::new(11, 3), "f({{0}}) = {f0}");
    let mut slowest = Duration::ZERO;
    for setting in Setting::EXACT {
        let report = branch_and_benders_cut(&inst, &SolverSettings::for_setting(setting)).map_err(err)?;
        ensure!(report.optimal, "{setting}: not proven optimal");
        ensure!(
            report.blocked == set(&[0]),
            "{setting}: blocked {:?}",
            report.blocked.to_vec()
        );
        ensure!(
            report.objective == Some(Ratio::new(11, 3)),
            "{setting}: objective {:?}",
            report.objective
        );
        ensure!(
            report.elapsed < Duration::from_secs(1),
            "{setting}: {:?}",
            report.elapsed
        );
        slowest = slowest.max(report.elapsed);
    }
    Ok(format!(
        "f({{2}})=14/3, f({{0}})=11/3, 7 settings give {{0}}/11/3, slowest {slowest:.2?}"
    ))
}

fn non_submodularity() -> Outcome {
    let inst = deterministic_example(3.0);
    let f = |labels: &[u32]| inst.eval_objective(&set(labels));
    let int = |v: u64| Spread::from_integer(v);
    for (labels, expect) in [(&[3][..], 6), (&[2, 3], 5), (&[1, 3], 6), (&[1, 2, 3], 3)] {
        ensure!(
            f(labels) == int(expect),
            "f({labels:?}) = {} instead of {expect}",
            f(labels)
        );
    }
    // X = {3} within Y = {2,3}; marginal gains as signed integers
    let gain = |base: &[u32], with: &[u32]| *f(with).numer() as i64 - *f(base).numer() as i64;
    let (x1, y1) = (gain(&[3], &[1, 3]), gain(&[2, 3], &[1, 2, 3]));
    ensure!(x1 > y1, "supermodularity not violated with label 1: {x1} vs {y1}");
    let (x0, y0) = (gain(&[3], &[0, 3]), gain(&[2, 3], &[0, 2, 3]));
    ensure!(x0 < y0, "submodularity not violated with label 0: {x0} vs {y0}");
    Ok(format!(
        "6/5/6/3 exact; label 1 gains {x1} on X vs {y1} on Y, label 0 gains {x0} on X vs {y0} on Y"
    ))
}

struct Sweep {
    instances: Vec<Instance>,
    /// (instance index, setting, cut) for every pooled cut.
    cuts: Vec<(usize, Setting, BendersCut)>,
    mismatches: Vec<String>,
    solves: usize,
    elapsed: Duration,
}

const SWEEP_INSTANCES: u64 = 60;

fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let instances: Vec<Instance> = (0..SWEEP_INSTANCES).map(|s| small_instance(s, 200)).collect();
        let mut cuts = Vec::new();
        let mut mismatches = Vec::new();
        let mut solves = 0;
        for (i, inst) in instances.iter().enumerate() {
            let (_, best) = brute_force_oracle(inst).expect("small label universe");
            for setting in Setting::EXACT {
                solves += 1;
                match branch_and_benders_cut(inst, &SolverSettings::for_setting(setting)) {
                    Ok(report) => {
                        if report.objective != Some(best) || !report.optimal {
                            mismatches.push(format!(
                                "instance {i} {setting}: {:?} vs oracle {best}",
                                report.objective
                            ));
                        }
                        cuts.extend(report.cuts.into_iter().map(|c| (i, setting, c)));
                    }
                    Err(e) => mismatches.push(format!("instance {i} {setting}: {e}")),
                }
            }
        }
        Sweep {
            instances,
            cuts,
            mismatches,
            solves,
            elapsed: start.elapsed(),
        }
    })
}

fn oracle_equivalence() -> Outcome {
    let s = sweep();
    for inst in &s.instances {
        ensure!(
            inst.node_count() <= 200 && inst.label_count() <= 10,
            "instance out of range"
        );
        ensure!(
            inst.scenario_count() <= 10 && inst.budget() <= 3.0,
            "instance out of range"
        );
    }
    ensure!(
        s.mismatches.is_empty(),
        "{} mismatches, first: {}",
        s.mismatches.len(),
        s.mismatches[0]
    );
    ensure!(
        s.elapsed < Duration::from_secs(600),
        "sweep took {:.1?}",
        s.elapsed
    );
    Ok(format!(
        "{} instances, {} solves all match brute force in {:.1?}",
        s.instances.len(),
        s.solves,
        s.elapsed
    ))
}

fn cut_validity() -> Outcome {
    let s = sweep();
    let mut checks = 0u64;
    let mut violations = Vec::new();
    let plain: Vec<_> = s.instances.iter().map(|i| i.plain_seed_sets()).collect();
    let extended: Vec<_> = s.instances.iter().map(|i| i.extended_seed_sets()).collect();
    let feasible: Vec<_> = s.instances.iter().map(feasible_blockings).collect();
    for (i, setting, cut) in &s.cuts {
        let inst = &s.instances[*i];
        let seeds = if cut.extended_seeds {
            &extended[*i]
        } else {
            &plain[*i]
        };
        let base = seeds.get(cut.scenario).len() as i64;
        for blocked in &feasible[*i] {
            checks += 1;
            let spread = inst.eval_spread(cut.scenario, blocked).map_err(err)? as i64 - base;
            if cut.rhs_binary(blocked) > spread {
                violations.push(format!("instance {i} {setting} scenario {}", cut.scenario));
            }
        }
    }
    ensure!(!s.cuts.is_empty(), "no cuts were pooled");
    ensure!(
        violations.is_empty(),
        "{} violations, first: {}",
        violations.len(),
        violations[0]
    );
    Ok(format!(
        "{} cuts x feasible blockings = {checks} checks, zero violations",
        s.cuts.len()
    ))
}

fn dual_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst_gap: f64 = 0.0;
    let mut worst_violation: f64 = 0.0;
    let triples = 120;
    for t in 0..triples {
        let inst = small_instance(1000 + t, 200);
        let w = rng.gen_range(0..inst.scenario_count());
        let mut x = random_point(&mut rng, inst.label_count());
        for (l, v) in x.iter_mut().enumerate() {
            if inst.is_unblockable(l as u32) {
                *v = 0.0;
            }
        }
        let dual = construct_dual_abf(&inst, w, &x);
        let (_, _, optimum) = separate_lp_abf(&inst, w, &x, 0.0).map_err(err)?;
        let value = dual.objective(&inst, &x);
        let gap = (value - optimum).abs();
        let violation = dual.max_violation(&inst);
        ensure!(gap <= 1e-6, "triple {t}: constructed {value} vs LP {optimum}");
        ensure!(
            violation <= 1e-9,
            "triple {t}: dual constraint violated by {violation}"
        );
        worst_gap = worst_gap.max(gap);
        worst_violation = worst_violation.max(violation);
    }
    Ok(format!(
        "{triples} triples, max |gap| {worst_gap:.2e}, max dual violation {worst_violation:.2e}"
    ))
}

fn lp_relaxation_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    let count = 12;
    for i in 0..count {
        let inst = small_instance(2000 + i, 60);
        let root = converged_root_bound(&inst, SeparationMethod::Combinatorial(LiftMode::N)).map_err(err)?;
        let abf = abf_relaxation(&inst).lp.solve().map_err(err)?;
        ensure!(
            abf.status == LpStatus::Optimal,
            "instance {i}: ABF LP {:?}",
            abf.status
        );
        let gap = (root - abf.objective).abs();
        ensure!(gap <= 1e-6, "instance {i}: root {root} vs ABF {}", abf.objective);
        worst = worst.max(gap);
    }
    Ok(format!("{count} instances, max |gap| {worst:.2e}"))
}

fn chain_bounds() -> Outcome {
    let inst = chain_instance();
    let mut found = Vec::new();
    for (lift, expect) in [(LiftMode::N, 1.5), (LiftMode::P, 2.0), (LiftMode::H, 2.0)] {
        let bound = converged_root_bound(&inst, SeparationMethod::Combinatorial(lift)).map_err(err)?;
        ensure!(
            (bound - expect).abs() <= 1e-9,
            "lift {lift}: {bound} instead of {expect}"
        );
        found.push(format!("{lift}={bound}"));
    }
    Ok(found.join(", "))
}

fn early_exit_determinism() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let pool: Vec<Instance> = (0..40).map(|s| small_instance(3000 + s, 200)).collect();
    let calls = 1000;
    for call in 0..calls {
        let inst = &pool[rng.gen_range(0..pool.len())];
        let lift = [LiftMode::N, LiftMode::P, LiftMode::H][rng.gen_range(0..3)];
        let ext = rng.gen_bool(0.5);
        let w = rng.gen_range(0..inst.scenario_count());
        let x = random_point(&mut rng, inst.label_count());
        let method = SeparationMethod::Combinatorial(lift);
        let fast = Separator::new(inst, method, ext)
            .with_early_exit(true)
            .cut(w, &x)
            .map_err(err)?;
        let full = Separator::new(inst, method, ext)
            .with_early_exit(false)
            .cut(w, &x)
            .map_err(err)?;
        ensure!(fast == full, "call {call}: lift {lift}, scenario {w} differs");
    }
    Ok(format!("{calls} calls over N/P/H, identical cuts"))
}

fn scale_config(nodes: usize, rng_seed: u64) -> GenConfig {
    GenConfig {
        model: GraphModel::Ba,
        nodes,
        edges: 5 * nodes,
        blockable_labels: 20,
        label_class: LabelClass::One,
        p_live: 0.1,
        scenario_count: 50,
        seed_count: 50,
        rr_samples: 1000,
        budget: 4.0,
        parallel_arcs: false,
        rng_seed,
    }
}

/// Soft ordering batch: instance count and size.
const BATCH_SIZE: u64 = 10;
const BATCH_NODES: usize = 5000;

fn scale_check() -> Outcome {
    let inst = generate_instance(&scale_config(5000, 1)).map_err(err)?;
    ensure!(
        inst.label_count() == 21 && inst.scenario_count() == 50,
        "unexpected instance shape"
    );
    let limit = Duration::from_secs(15 * 60);
    let report = branch_and_benders_cut(
        &inst,
        &SolverSettings::for_setting(Setting::IPlusSFP).with_time_limit(limit),
    )
    .map_err(err)?;
    ensure!(
        report.optimal,
        "I+SFP not optimal after {:.1?} (gap {:?}%)",
        report.elapsed,
        report.gap_percent()
    );
    ensure!(report.elapsed < limit, "took {:.1?}", report.elapsed);
    let headline = format!(
        "n=5000 |A|={} I+SFP optimal {} in {:.1?} with {} nodes",
        inst.graph().arc_count(),
        report.objective.map(|o| o.to_string()).unwrap_or_default(),
        report.elapsed,
        report.nodes
    );

    // soft signal: mean runtime ordering on a batch, never fails the criterion
    let settings = [Setting::IPlusSFP, Setting::IPlusS, Setting::I];
    let mut secs = [0.0f64; 3];
    let mut nodes = [0u64; 3];
    let mut cuts = [0u64; 3];
    let mut unsolved = 0;
    for seed in 0..BATCH_SIZE {
        let inst = generate_instance(&scale_config(BATCH_NODES, 100 + seed)).map_err(err)?;
        for (slot, setting) in settings.iter().enumerate() {
            let cfg = SolverSettings::for_setting(*setting).with_time_limit(Duration::from_secs(300));
            let r = branch_and_benders_cut(&inst, &cfg).map_err(err)?;
            secs[slot] += r.elapsed.as_secs_f64();
            nodes[slot] += r.nodes;
            cuts[slot] += r.int_cuts + r.frac_cuts;
            unsolved += usize::from(!r.optimal);
        }
    }
    let n = BATCH_SIZE as f64;
    let ordered = secs[0] <= secs[1] && secs[1] <= secs[2];
    for (slot, setting) in settings.iter().enumerate() {
        println!(
            "  soft: {setting:<5} mean {:.4}s, {:.1} nodes, {:.1} cuts",
            secs[slot] / n,
            nodes[slot] as f64 / n,
            cuts[slot] as f64 / n
        );
    }
    println!(
        "  soft: batch of {BATCH_SIZE} BA n={BATCH_NODES}, {unsolved} runs unsolved, ordering I+SFP <= I+S <= I {}",
        if ordered { "holds" } else { "does not hold" }
    );
    Ok(headline)
}

fn generator_statistics() -> Outcome {
    let mean = LabelClass::One.mean(20);
    let mut rng = stream(10, Purpose::Labels, 0);
    let draws = 1_000_000;
    let total: u64 = (0..draws).map(|_| geometric(&mut rng, mean)).sum();
    let empirical = total as f64 / draws as f64;
    let rel_mean = (empirical - mean).abs() / mean;
    ensure!(rel_mean <= 0.01, "negative binomial mean {empirical} vs {mean}");

    let arcs = 1_000_000u32;
    let mut label_rng = stream(11, Purpose::Labels, 0);
    let base: Vec<Arc> = (0..arcs)
        .map(|i| Arc::new(i, i + 1, label_rng.gen_range(0..21)))
        .collect();
    let graph = LabeledDigraph::new(arcs as usize + 1, 21, base).map_err(err)?;
    let grown = add_parallel_arcs(&graph, 12).map_err(err)?;
    let growth = grown.arc_count() as f64 / arcs as f64;
    let rel_growth = (growth - 1.2).abs() / 1.2;
    ensure!(rel_growth <= 0.005, "parallel growth {growth}");

    let p = 0.1;
    let small = LabeledDigraph::new(
        100_001,
        1,
        (0..100_000u32).map(|i| Arc::new(i, i + 1, 0)).collect(),
    )
    .map_err(err)?;
    let scenarios = sample_scenarios(&small, p, 50, 13).map_err(err)?;
    let live: usize = scenarios.iter().map(|a| a.len()).sum();
    let fraction = live as f64 / (50.0 * 100_000.0);
    let rel_live = (fraction - p).abs() / p;
    ensure!(rel_live <= 0.005, "live fraction {fraction}");
    Ok(format!(
        "mean {empirical:.4} vs {mean} ({:.2}%), growth {growth:.4} ({:.2}%), live {fraction:.5} ({:.2}%)",
        100.0 * rel_mean,
        100.0 * rel_growth,
        100.0 * rel_live
    ))
}
