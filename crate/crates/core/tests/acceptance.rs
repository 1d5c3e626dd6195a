//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Reference values are recomputed here from their definitions rather than
//! through the library's own oracle module.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use queue_regret::audit::{
    estimator_unbiasedness_test, max_interval_regret, theorem1_bound, theorem2_bound, Accounting,
    ScheduleTrace,
};
use queue_regret::env::{ArrivalModel, ArrivalRate, ChannelModel, Purpose, RngStream, ServiceMatrix, StreamId};
use queue_regret::harness::{run_many, run_many_with, run_single, write_csv, AuditFlags, ExperimentConfig, SCHEMA_VERSION};
use queue_regret::network::{
    benchmark_traces, enumerate_joint_assignments, network_regret, simulate_network, NetworkTopology,
};
use queue_regret::ogd::{recommended_step_size, OgdState};
use queue_regret::policy::{Policy, PolicySpec};
use queue_regret::queue::{queue_closed_form, queue_length_regret, queue_trajectory, NetIncrementSequence};
use queue_regret::sim::{fixed_arm_queues, run_expert_ogd, run_policy};
use queue_regret::simplex::{project_to_simplex, ProbabilityVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn within(limit: Duration, started: Instant, v: Verdict) -> Verdict {
    let took = started.elapsed();
    let ok = took <= limit;
    Verdict::new(
        v.passed && ok,
        format!("{}; {:.2}s of {}s budget", v.detail, took.as_secs_f64(), limit.as_secs()),
    )
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(g: &mut ChaCha8Rng, t: usize, n: usize) -> ServiceMatrix {
    ServiceMatrix::from_rows((0..t).map(|_| (0..n).map(|_| g.random::<f64>()).collect()).collect()).unwrap()
}

/// Exhaustive interval regret: every start, every arm, every end.
fn brute_interval(services: &ServiceMatrix, gains: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for s in 0..services.horizon() {
        for i in 0..services.n_arms() {
            let mut acc = 0.0;
            for e in s..services.horizon() {
                acc += services.get(e, i) - gains[e];
                best = best.max(acc);
            }
        }
    }
    best
}

fn expected_gains(services: &ServiceMatrix, laws: &[ProbabilityVector]) -> Vec<f64> {
    laws.iter()
        .enumerate()
        .map(|(t, p)| p.as_slice().iter().zip(services.row(t)).map(|(a, b)| a * b).sum())
        .collect()
}

fn random_law(g: &mut ChaCha8Rng, n: usize) -> ProbabilityVector {
    let raw: Vec<f64> = (0..n).map(|_| g.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.iter().map(|x| x / total).collect()).unwrap()
}

fn lindley_equivalence() -> Verdict {
    let started = Instant::now();
    let mut g = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t = g.random_range(1..=200);
        let b: Vec<f64> = (0..t).map(|_| g.random_range(-3.0..3.0)).collect();
        let arrivals: Vec<f64> = b.iter().map(|x| x.max(0.0)).collect();
        let served: Vec<f64> = b.iter().map(|x| (-x).max(0.0)).collect();
        let fold = queue_trajectory(&arrivals, &served).unwrap();
        let closed = queue_closed_form(&NetIncrementSequence::new(b.clone()).unwrap());
        for end in 0..t {
            let mut direct: f64 = 0.0;
            for start in 0..=end {
                direct = direct.max(b[start..=end].iter().sum());
            }
            worst = worst.max((fold.lengths[end + 1] - direct).abs());
            worst = worst.max((closed[end] - direct).abs());
        }
    }
    within(
        Duration::from_secs(5),
        started,
        Verdict::new(worst <= 1e-9, format!("1000 sequences, max deviation {worst:.2e} (tol 1e-9)")),
    )
}

fn grid_projection(v: &[f64]) -> Vec<f64> {
    let k = 1000;
    let mut best = (f64::INFINITY, vec![]);
    let mut try_point = |w: Vec<f64>| {
        let d: f64 = w.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
        if d < best.0 {
            best = (d, w);
        }
    };
    match v.len() {
        1 => try_point(vec![1.0]),
        2 => (0..=k).for_each(|i| try_point(vec![i as f64 / k as f64, 1.0 - i as f64 / k as f64])),
        _ => {
            for i in 0..=k {
                for j in 0..=k - i {
                    let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
                    try_point(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    best.1
}

fn projection_correctness() -> Verdict {
    let started = Instant::now();
    let mut g = rng(2);
    let mut failures = Vec::new();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    for _ in 0..300 {
        let n = g.random_range(1..=3);
        let v: Vec<f64> = (0..n).map(|_| g.random_range(-2.0..2.0)).collect();
        let w = project_to_simplex(&v).unwrap();
        let grid = grid_projection(&v);
        let err = w.as_slice().iter().zip(&grid).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > 2e-3 {
            failures.push(format!("grid {err:.1e}"));
        }
    }
    for _ in 0..10_000 {
        let n = g.random_range(1..=8);
        let u: Vec<f64> = (0..n).map(|_| g.random_range(-3.0..3.0)).collect();
        let v: Vec<f64> = (0..n).map(|_| g.random_range(-3.0..3.0)).collect();
        let pu = project_to_simplex(&u).unwrap();
        let pv = project_to_simplex(&v).unwrap();
        let w = pu.as_slice();
        // KKT: positive coordinates share one threshold, zeros sit at or below it.
        let sum: f64 = w.iter().sum();
        let theta = w.iter().zip(&u).find(|(x, _)| **x > 0.0).map(|(x, ui)| ui - x).unwrap();
        let kkt = (sum - 1.0).abs() <= 1e-9
            && w.iter().zip(&u).all(|(x, ui)| {
                if *x > 0.0 {
                    (ui - x - theta).abs() <= 1e-9
                } else {
                    *ui <= theta + 1e-9
                }
            });
        if !kkt {
            failures.push("kkt".into());
        }
        let again = project_to_simplex(w).unwrap();
        if dist(again.as_slice(), w) > 1e-9 {
            failures.push("idempotence".into());
        }
        let c = g.random_range(-5.0..5.0);
        let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
        if dist(project_to_simplex(&shifted).unwrap().as_slice(), w) > 1e-9 {
            failures.push("translation".into());
        }
        if dist(w, pv.as_slice()) > dist(&u, &v) + 1e-12 {
            failures.push("non-expansiveness".into());
        }
    }
    within(
        Duration::from_secs(10),
        started,
        Verdict::new(
            failures.is_empty(),
            format!("300 grid comparisons (tol 2e-3) and 10^4 random pairs, {} failures {:?}", failures.len(), failures.first()),
        ),
    )
}

/// Gains for the full-information check: `kind` 0 is block switching, 1 is
/// uniform noise, 2 alternates the paying arm every slot.
fn adversarial_gains(kind: usize, t: usize, n: usize, g: &mut ChaCha8Rng) -> ServiceMatrix {
    let blocks = 4;
    let rows = (0..t)
        .map(|s| match kind {
            0 => {
                let winner = (s * blocks / t) % n;
                (0..n).map(|i| if i == winner { 1.0 } else { 0.0 }).collect()
            }
            1 => (0..n).map(|_| g.random::<f64>()).collect(),
            _ => (0..n).map(|i| if i == s % n { 1.0 } else { 0.0 }).collect(),
        })
        .collect();
    ServiceMatrix::from_rows(rows).unwrap()
}

fn full_information_bound() -> Verdict {
    let started = Instant::now();
    let mut g = rng(3);
    let mut checked = 0;
    let mut violations = 0;
    let mut scan_mismatch = 0;
    let mut worst_ratio: f64 = 0.0;
    for &t in &[64usize, 256, 1024] {
        for &n in &[2usize, 5] {
            let gb = (n as f64).sqrt();
            let bound = theorem1_bound(gb, t as u64);
            let eta = recommended_step_size(gb, t as u64).unwrap();
            let mut cases: Vec<(ServiceMatrix, Vec<ProbabilityVector>)> = Vec::new();
            for kind in 0..3 {
                let s = adversarial_gains(kind, t, n, &mut g);
                let trace = run_expert_ogd(OgdState::new(n, eta, gb, None).unwrap(), &s, &mut g).unwrap();
                cases.push((s, trace.play_distributions.unwrap()));
            }
            // Adaptive adversary: pay only the arm the learner currently likes least.
            let mut ogd = OgdState::new(n, eta, gb, None).unwrap();
            let mut rows = Vec::new();
            let mut laws = Vec::new();
            for _ in 0..t {
                let p = ogd.distribution().clone();
                let low = (0..n).min_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
                let row: Vec<f64> = (0..n).map(|i| if i == low { 1.0 } else { 0.0 }).collect();
                ogd.update(&row).unwrap();
                laws.push(p);
                rows.push(row);
            }
            cases.push((ServiceMatrix::from_rows(rows).unwrap(), laws));
            for (s, laws) in cases {
                let gains = expected_gains(&s, &laws);
                let brute = brute_interval(&s, &gains);
                let trace = ScheduleTrace {
                    arms: (0..t).map(|k| k % n).collect(),
                    play_distributions: Some(laws),
                    observed_gains: (0..t).map(|k| s.get(k, k % n)).collect(),
                };
                let scan = max_interval_regret(&s, &trace, Accounting::ExpectedPlay).unwrap();
                scan_mismatch += usize::from((scan.max_regret - brute).abs() > 1e-9);
                violations += usize::from(brute > bound);
                worst_ratio = worst_ratio.max(brute / bound);
                checked += 1;
            }
        }
    }
    within(
        Duration::from_secs(30),
        started,
        Verdict::new(
            violations == 0 && scan_mismatch == 0,
            format!(
                "{checked} sequences, {violations} violations, {scan_mismatch} scan/brute mismatches, largest regret/bound {worst_ratio:.3}"
            ),
        ),
    )
}

fn estimator_unbiased() -> Verdict {
    let mut g = rng(4);
    let mut worst_err: f64 = 0.0;
    let mut norm_ok = true;
    let mut cases = 0;
    for &n in &[2usize, 5] {
        for &gamma in &[0.1, 0.5, 1.0] {
            let p = random_law(&mut g, n);
            let truth: Vec<f64> = (0..n).map(|_| g.random::<f64>()).collect();
            let stream = RngStream::new(4, StreamId::new(Purpose::Audit, cases));
            let r = estimator_unbiasedness_test(&p, gamma, &truth, 100_000, &stream).unwrap();
            worst_err = worst_err.max(r.max_error);
            norm_ok &= r.max_norm <= n as f64 / gamma + 1e-12;
            cases += 1;
        }
    }
    Verdict::new(
        worst_err <= 0.02 && norm_ok,
        format!("{cases} (N, gamma) cases x 1e5 samples, worst component error {worst_err:.4} (tol 0.02), norm bound held: {norm_ok}"),
    )
}

fn base_config(n: usize, t: usize, channel: ChannelModel, arrivals: ArrivalModel, policies: Vec<PolicySpec>, runs: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        n_arms: n,
        horizon: t,
        channel,
        arrivals,
        policies,
        num_runs: runs,
        master_seed: seed,
        audit: AuditFlags::default(),
        topology: None,
    }
}

fn block(m: usize) -> ChannelModel {
    ChannelModel::BlockMarkov {
        num_blocks: m,
        initial_rate: None,
    }
}

fn auto(eps: f64) -> ArrivalModel {
    ArrivalModel::UniformRate {
        lambda: ArrivalRate::AUTO,
        epsilon: eps,
    }
}

fn pathwise_domination() -> Verdict {
    let all = vec![PolicySpec::WaMab, PolicySpec::Exp3, PolicySpec::Uniform, PolicySpec::RoundRobin];
    let configs = [
        base_config(2, 300, block(1), auto(0.05), all.clone(), 130, 11),
        base_config(3, 300, block(4), auto(0.0), all.clone(), 130, 12),
        base_config(5, 400, block(7), auto(0.05), all.clone(), 130, 13),
        base_config(3, 200, ChannelModel::IidUniform, ArrivalModel::Constant { value: 0.6 }, all.clone(), 60, 14),
        base_config(4, 200, block(2), ArrivalModel::UniformRate { lambda: ArrivalRate::Fixed(0.9), epsilon: 0.0 }, all, 60, 15),
    ];
    let mut runs = 0;
    let mut checks = 0;
    let mut violations = 0;
    for mut cfg in configs {
        cfg.audit = AuditFlags {
            domination: true,
            ..AuditFlags::default()
        };
        run_many_with(&cfg, None, |r| {
            runs += 1;
            for o in &r.policies {
                checks += 1;
                violations += usize::from(o.dominated != Some(true));
            }
        })
        .unwrap();
    }
    Verdict::new(
        runs >= 500 && violations == 0,
        format!("{runs} runs, {checks} policy traces, {violations} violations of queue regret <= max interval regret + 1e-9"),
    )
}

fn linear_regime() -> Verdict {
    let mut g = rng(6);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = g.random_range(1..=300);
        let n = g.random_range(1..=5);
        let s = random_matrix(&mut g, t, n);
        let arrivals = vec![1.0; t];
        let spec = [PolicySpec::WaMab, PolicySpec::Exp3, PolicySpec::Uniform][k % 3];
        let mut policy = spec.build(n, t as u64).unwrap();
        let run = run_policy(policy.as_mut(), &s, &arrivals, &mut g).unwrap();
        let fixed = fixed_arm_queues(&s, &arrivals).unwrap();
        // With the queue never empty, every queue gap is a cumulative gain gap.
        let mut prefix = vec![0.0; n];
        let mut best_prefix = f64::NEG_INFINITY;
        for slot in 0..t {
            for i in 0..n {
                prefix[i] += s.get(slot, i) - run.schedule.observed_gains[slot];
                let gap = run.queue.lengths[slot + 1] - fixed[i].lengths[slot + 1];
                worst = worst.max((gap - prefix[i]).abs());
                best_prefix = best_prefix.max(prefix[i]);
            }
        }
        let full_horizon = prefix.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let terminal_gap = fixed
            .iter()
            .map(|q| run.queue.lengths[t] - q.lengths[t])
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((terminal_gap - full_horizon).abs());
        let rq = queue_length_regret(&run.queue, &fixed).unwrap().value;
        worst = worst.max((rq - best_prefix).abs());
    }
    Verdict::new(
        worst <= 1e-9,
        format!("100 instances with A(t)=1, max deviation {worst:.2e} between queue gaps and cumulative gain gaps (tol 1e-9)"),
    )
}

fn bandit_bound_at_desk_scale() -> Verdict {
    let started = Instant::now();
    let mean_interval = |t: usize| {
        let mut cfg = base_config(3, t, block(4), auto(0.05), vec![PolicySpec::WaMab], 200, 77);
        cfg.audit = AuditFlags {
            interval_regret: true,
            theorem_bounds: true,
            ..AuditFlags::default()
        };
        let mut values = Vec::new();
        let mut held = 0;
        run_many_with(&cfg, None, |r| {
            let o = &r.policies[0];
            values.push(o.interval.as_ref().unwrap().max_regret);
            held += usize::from(o.within_bound == Some(true));
        })
        .unwrap();
        (values.iter().sum::<f64>() / values.len() as f64, held)
    };
    let bound = theorem2_bound(3, 4096, 0.1).unwrap();
    let (mean_long, held) = mean_interval(4096);
    let (mean_short, _) = mean_interval(1024);
    let growth = 4f64.powf(0.75);
    let ratio = mean_long / mean_short;
    let ok = held * 10 >= 200 * 9 && mean_long < 2.0 * growth * mean_short;
    within(
        Duration::from_secs(120),
        started,
        Verdict::new(
            ok,
            format!(
                "bound {bound:.1} held in {held}/200 runs; mean max interval regret {mean_short:.2} at T=1024, {mean_long:.2} at T=4096, ratio {ratio:.2} (limit 2 x {growth:.2}; linear growth would be 4)"
            ),
        ),
    )
}

fn desk_scale_comparison(out: &Path) -> Verdict {
    let started = Instant::now();
    let cfg = base_config(
        5,
        2000,
        block(4),
        auto(0.05),
        vec![PolicySpec::WaMab, PolicySpec::Exp3, PolicySpec::Uniform],
        100,
        2025,
    );
    let agg = run_many(&cfg).unwrap();
    let mut f = std::fs::File::create(out).unwrap();
    write_csv(&agg, &mut f).unwrap();
    let m: Vec<f64> = agg.policies.iter().map(|p| p.mean_final()).collect();
    let ok = m[0] < m[1] && m[0] < m[2];
    within(
        Duration::from_secs(120),
        started,
        Verdict::new(
            ok,
            format!(
                "mean final queue regret wamab {:.3}, exp3 {:.3}, uniform {:.3}; wamab<exp3: {}, wamab<uniform: {}; curves in {}",
                m[0],
                m[1],
                m[2],
                m[0] < m[1],
                m[0] < m[2],
                out.display()
            ),
        ),
    )
}

fn full_scale_note() -> String {
    let cfg = base_config(
        5,
        10_000,
        block(7),
        auto(0.05),
        vec![PolicySpec::WaMab, PolicySpec::Exp3, PolicySpec::Uniform],
        100,
        2025,
    );
    let agg = run_many(&cfg).unwrap();
    let m: Vec<f64> = agg.policies.iter().map(|p| p.mean_final()).collect();
    format!(
        "info: same comparison at T=10000, m=7, 100 runs: wamab {:.3}, exp3 {:.3}, uniform {:.3}",
        m[0], m[1], m[2]
    )
}

fn scan_equivalence() -> Verdict {
    let mut g = rng(9);
    let mut mismatches = 0;
    for k in 0..200 {
        let t = g.random_range(1..=64);
        let n = g.random_range(1..=4);
        let s = random_matrix(&mut g, t, n);
        let arms: Vec<usize> = (0..t).map(|_| g.random_range(0..n)).collect();
        let mut trace = ScheduleTrace::from_arms(&s, arms).unwrap();
        let (accounting, gains) = if k % 2 == 0 {
            (Accounting::Realized, trace.observed_gains.clone())
        } else {
            let laws: Vec<ProbabilityVector> = (0..t).map(|_| random_law(&mut g, n)).collect();
            let gains = expected_gains(&s, &laws);
            trace.play_distributions = Some(laws);
            (Accounting::ExpectedPlay, gains)
        };
        let scan = max_interval_regret(&s, &trace, accounting).unwrap();
        mismatches += usize::from(scan.max_regret != brute_interval(&s, &gains));
    }
    Verdict::new(
        mismatches == 0,
        format!("200 instances (T <= 64, N <= 4, both accountings), {mismatches} inexact matches"),
    )
}

/// Slot-synchronous line network folded by hand: node k feeds node k+1 one slot later.
fn line_queues(rates: &[Vec<f64>], exo: &[f64]) -> Vec<Vec<f64>> {
    let (nodes, t) = (rates.len(), exo.len());
    let mut q = vec![vec![0.0; t + 1]; nodes];
    let mut out = vec![vec![0.0; t]; nodes];
    for s in 0..t {
        for v in 0..nodes {
            let inflow = if v == 0 { exo[s] } else if s > 0 { out[v - 1][s - 1] } else { 0.0 };
            let content = q[v][s] + inflow;
            out[v][s] = content.min(rates[v][s]);
            q[v][s + 1] = (content - rates[v][s]).max(0.0);
        }
    }
    q
}

fn network_brute_force() -> Verdict {
    let mut g = rng(10);
    let topo = NetworkTopology::line(3, 2).unwrap();
    let assignments = enumerate_joint_assignments(&topo).unwrap();
    let mut worst: f64 = 0.0;
    let instances = 20;
    for run in 0..instances {
        let t = g.random_range(20..=200);
        let services: Vec<ServiceMatrix> = (0..3).map(|_| random_matrix(&mut g, t, 2)).collect();
        let lambda = g.random_range(0.2..0.6);
        let exo: Vec<f64> = (0..t).map(|_| 2.0 * lambda * g.random::<f64>()).collect();
        let exogenous = vec![exo.clone(), vec![0.0; t], vec![0.0; t]];
        let mut policies: Vec<Box<dyn Policy>> = (0..3).map(|_| PolicySpec::WaMab.build(2, t as u64).unwrap()).collect();
        let stream = RngStream::new(10, StreamId::new(Purpose::Policy, run));
        let trace = simulate_network(&topo, &services, &exogenous, &mut policies, &stream).unwrap();
        let benchmarks = benchmark_traces(&topo, &services, &exogenous, &assignments).unwrap();
        let lib = network_regret(&trace, &benchmarks).unwrap();

        // Reference: policy queues refolded from its recorded choices, all 8 assignments by hand.
        let policy_rates: Vec<Vec<f64>> = trace.schedules.iter().map(|s| s.observed_gains.clone()).collect();
        let policy_q = line_queues(&policy_rates, &exo);
        let mut reference = f64::NEG_INFINITY;
        for code in 0..8usize {
            let arms = [(code >> 2) & 1, (code >> 1) & 1, code & 1];
            let rates: Vec<Vec<f64>> = (0..3).map(|v| services[v].column(arms[v]).collect()).collect();
            let q = line_queues(&rates, &exo);
            for v in 0..3 {
                for s in 1..=t {
                    reference = reference.max(policy_q[v][s] - q[v][s]);
                }
            }
        }
        worst = worst.max((lib.value - reference).abs());
        for v in 0..3 {
            worst = worst.max(trace.queues[v].lengths.iter().zip(&policy_q[v]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
    }

    // Identical channels everywhere: every schedule is equivalent.
    let t = 150;
    let base = random_matrix(&mut g, t, 1);
    let same = ServiceMatrix::from_rows(base.rows().map(|r| vec![r[0], r[0]]).collect()).unwrap();
    let services = vec![same.clone(), same.clone(), same];
    let exogenous = vec![vec![0.5; t], vec![0.0; t], vec![0.0; t]];
    let mut policies: Vec<Box<dyn Policy>> = (0..3).map(|_| PolicySpec::Uniform.build(2, t as u64).unwrap()).collect();
    let stream = RngStream::new(3, StreamId::new(Purpose::Policy, 0));
    let trace = simulate_network(&topo, &services, &exogenous, &mut policies, &stream).unwrap();
    let benchmarks = benchmark_traces(&topo, &services, &exogenous, &assignments).unwrap();
    let identical = network_regret(&trace, &benchmarks).unwrap().value;

    // One node, sink routing: same queue as the single-queue pipeline, bit for bit.
    let single = NetworkTopology::line(1, 3).unwrap();
    let s = random_matrix(&mut g, 300, 3);
    let a: Vec<f64> = (0..300).map(|_| g.random::<f64>()).collect();
    let stream = RngStream::new(21, StreamId::new(Purpose::Policy, 5));
    let mut net_policy: Vec<Box<dyn Policy>> = vec![PolicySpec::WaMab.build(3, 300).unwrap()];
    let net = simulate_network(&single, std::slice::from_ref(&s), std::slice::from_ref(&a), &mut net_policy, &stream).unwrap();
    let mut solo = PolicySpec::WaMab.build(3, 300).unwrap();
    let solo_run = run_policy(solo.as_mut(), &s, &a, &mut stream.with_id(stream.id.node(0)).rng()).unwrap();
    let bitwise = net.queues[0] == solo_run.queue;

    Verdict::new(
        worst <= 1e-9 && identical == 0.0 && bitwise,
        format!(
            "{instances} three-node line instances, max deviation from exhaustive enumeration {worst:.2e}; identical channels R_G = {identical}; single node bit-identical: {bitwise}"
        ),
    )
}

fn golden_files(workspace: &Path) -> Verdict {
    let cfg = ExperimentConfig::load(workspace.join("presets/micro.json")).unwrap();
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_micro.csv")).unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 2, 4, 1, 8] {
        let agg = run_many_with(&cfg, Some(threads), |_| {}).unwrap();
        let mut buf = Vec::new();
        write_csv(&agg, &mut buf).unwrap();
        outputs.push(buf);
    }
    let dir = tempfile::tempdir().unwrap();
    for k in 0..2 {
        let out = dir.path().join(format!("cli{k}"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_queue-regret"))
            .args(["simulate", "--config"])
            .arg(workspace.join("presets/micro.json"))
            .arg("--out")
            .arg(&out)
            .env_remove("QREGRET_SEED")
            .output()
            .unwrap();
        assert!(status.status.success());
        outputs.push(std::fs::read(out.join("queue_regret.csv")).unwrap());
    }
    let same = outputs.iter().all(|o| *o == golden);
    let single_run = run_single(&cfg, 3).unwrap() == run_single(&cfg, 3).unwrap();
    Verdict::new(
        same && single_run,
        format!(
            "{} CSV renderings (1, 2, 4, 1, 8 threads and two CLI invocations) byte-identical to the recorded golden file: {same}; repeated run identical: {single_run}",
            outputs.len()
        ),
    )
}

fn main() -> ExitCode {
    let workspace: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let fig_csv = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("desk_scale_queue_regret.csv");
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("lindley recursion, closed form and suffix maxima agree", Box::new(lindley_equivalence)),
        ("simplex projection", Box::new(projection_correctness)),
        ("full-information interval regret bound", Box::new(full_information_bound)),
        ("importance-weighted estimator", Box::new(estimator_unbiased)),
        ("queue regret dominated by interval regret", Box::new(pathwise_domination)),
        ("linear regime identity", Box::new(linear_regime)),
        ("bandit bound and sublinear growth", Box::new(bandit_bound_at_desk_scale)),
        ("desk-scale policy comparison", Box::new(move || desk_scale_comparison(&fig_csv))),
        ("interval scan equals enumeration", Box::new(scan_equivalence)),
        ("network regret against exhaustive enumeration", Box::new(network_brute_force)),
        ("determinism and golden file", Box::new(move || golden_files(&workspace))),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!verdict.passed);
        let mark = if verdict.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {mark}: {name} ({})", k + 1, verdict.detail);
        if k == 7 {
            println!("             {}", full_scale_note());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
