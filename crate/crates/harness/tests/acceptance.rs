//! Acceptance suite. Runs every criterion, prints one
//! `criterion N: PASS|FAIL` line each and exits non-zero if any failed.
//! `ACCEPTANCE_ONLY=3,5` restricts the run to the listed criteria.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use cmcts_core::ccmcp::{plan_ccmcp, CcmcpConfig, CcmcpPlanner, LagrangeState};
use cmcts_core::cmcts::expand_with_pruning;
use cmcts_core::cmdp::{discounted_return, run_episode, CmdpSpec, EpisodeSeeds, Environment};
use cmcts_core::critic::{
    exact_cost_q, train, CriticEnsemble, QNetwork, TabularCmdp, TrainConfig, TransitionDataset, TransitionSample,
};
use cmcts_core::env::rocksample::{belief_update, sensor_accuracy};
use cmcts_core::env::{Bandit, Rocksample, RocksampleAction, RocksampleConfig};
use cmcts_core::mcts::{PlannerConfig, SearchTree, ROOT};
use cmcts_core::rng::{mix, PlannerRng, RngStream, StreamLabel};
use cmcts_harness::{run_sweep, sweep_results, train_critic_observed, ExperimentConfig, FlatConfig, SweepOutput};
use rand::Rng;

const GAMMA: f64 = 0.95;

/// Outcome of one criterion: pass flag plus the measured values.
type Verdict = (bool, String);

fn rng(seed: u64) -> cmcts_core::rng::SimRng {
    RngStream::new(seed, StreamLabel::Environment).rng()
}

fn experiment(text: &str, overrides: &[&str]) -> ExperimentConfig {
    let mut flat = FlatConfig::parse(text).expect("config parses");
    for o in overrides {
        flat.set(o).expect("override applies");
    }
    ExperimentConfig::from_flat(&flat, Path::new("target/acceptance-out")).expect("valid config")
}

// ---------------------------------------------------------------- 1 and 2

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// For every non-terminal state and first action, the episode that takes it
/// and then follows `policy`.
fn policy_dataset(cmdp: &TabularCmdp, next: &[Vec<usize>], policy: &[usize], repeats: usize) -> TransitionDataset {
    let n = cmdp.num_states();
    let mut d = TransitionDataset::new();
    for _ in 0..repeats {
        for s0 in (0..n).filter(|&s| !cmdp.terminal[s]) {
            for a0 in 0..cmdp.num_actions() {
                let (mut s, mut a) = (s0, a0);
                for _ in 0..50 {
                    let s2 = next[s][a];
                    let terminal = cmdp.terminal[s2];
                    d.push(TransitionSample {
                        features: one_hot(n, s),
                        action: a,
                        cost: cmdp.costs[s][a],
                        next_features: one_hot(n, s2),
                        next_action: (!terminal).then(|| policy[s2]),
                        terminal,
                    });
                    if terminal {
                        break;
                    }
                    s = s2;
                    a = policy[s];
                }
            }
        }
    }
    d
}

fn fit_max_error(cmdp: &TabularCmdp, data: &TransitionDataset, q: &[Vec<f64>], seed: u64) -> f64 {
    let cfg = TrainConfig { epochs: 300, batch_size: 16, learning_rate: 3e-3, hidden_dims: vec![32, 32], seed, ..Default::default() };
    let dims = cfg.layer_dims(cmdp.num_states(), cmdp.num_actions());
    let mut e = CriticEnsemble::new(cfg.k, &dims, 0.5, "tabular", seed).unwrap();
    train(&mut e, data, &cfg, GAMMA).unwrap();
    let n = cmdp.num_states();
    let mut worst: f64 = 0.0;
    for s in (0..n).filter(|&s| !cmdp.terminal[s]) {
        let p = e.predict(&one_hot(n, s));
        for a in 0..cmdp.num_actions() {
            worst = worst.max((p[a].mu - q[s][a]).abs());
        }
    }
    worst
}

/// 0 → 1 → 2 → 3 → 4 (terminal); the last move costs 1.
fn chain() -> (TabularCmdp, Vec<Vec<usize>>) {
    let next: Vec<Vec<usize>> = (0..5).map(|s| vec![(s + 1).min(4)]).collect();
    let mut costs = vec![vec![0.0]; 5];
    costs[3][0] = 1.0;
    let mut terminal = vec![false; 5];
    terminal[4] = true;
    (TabularCmdp::deterministic(&next, costs, terminal).unwrap(), next)
}

/// 3×3 grid, actions N/E/S/W with walls, goal (2,2), entering the centre costs 1.
fn grid3() -> (TabularCmdp, Vec<Vec<usize>>, Vec<usize>) {
    let idx = |x: i32, y: i32| (y * 3 + x) as usize;
    let moves = [(0, 1), (1, 0), (0, -1), (-1, 0)];
    let mut next = vec![vec![0; 4]; 9];
    let mut costs = vec![vec![0.0; 4]; 9];
    for y in 0..3 {
        for x in 0..3 {
            for (a, (dx, dy)) in moves.iter().enumerate() {
                let (nx, ny) = (x + dx, y + dy);
                let t = if (0..3).contains(&nx) && (0..3).contains(&ny) { idx(nx, ny) } else { idx(x, y) };
                next[idx(x, y)][a] = t;
                costs[idx(x, y)][a] = if t == idx(1, 1) { 1.0 } else { 0.0 };
            }
        }
    }
    let mut terminal = vec![false; 9];
    terminal[idx(2, 2)] = true;
    // east, except north in the right column; the middle row crosses the centre
    let policy: Vec<usize> = (0..9).map(|s| if s % 3 == 2 { 0 } else { 1 }).collect();
    (TabularCmdp::deterministic(&next, costs, terminal).unwrap(), next, policy)
}

fn criterion_1() -> Verdict {
    let (cmdp, next) = chain();
    let q = exact_cost_q(&cmdp, &[0; 5], GAMMA).unwrap();
    let chain_err = fit_max_error(&cmdp, &policy_dataset(&cmdp, &next, &[0; 5], 4), &q, 3);
    let (grid, next, policy) = grid3();
    let q = exact_cost_q(&grid, &policy, GAMMA).unwrap();
    let grid_err = fit_max_error(&grid, &policy_dataset(&grid, &next, &policy, 2), &q, 5);
    (chain_err < 0.05 && grid_err < 0.05, format!("max |mu - Q| chain {chain_err:.4}, grid {grid_err:.4} (< 0.05)"))
}

fn criterion_2() -> Verdict {
    let mut r = RngStream::new(42, StreamLabel::NetworkInit).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let net = QNetwork::new(&[4, 6, 5, 3], &mut r);
        let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..4).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let batch: Vec<(&[f64], usize, f64)> =
            xs.iter().map(|x| (x.as_slice(), r.gen_range(0..3), r.gen_range(0.0..2.0))).collect();
        let (_, grad) = net.loss_and_grad(&batch);
        for _ in 0..5 {
            let i = r.gen_range(0..net.params().len());
            let h = 1e-6;
            let mut plus = net.clone();
            plus.params_mut()[i] += h;
            let mut minus = net.clone();
            minus.params_mut()[i] -= h;
            let numeric = (plus.loss_and_grad(&batch).0 - minus.loss_and_grad(&batch).0) / (2.0 * h);
            let rel = (numeric - grad[i]).abs() / numeric.abs().max(grad[i].abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    (worst < 1e-4, format!("worst relative gradient error {worst:.2e} (< 1e-4)"))
}

// ---------------------------------------------------------------- 3

/// Mean and population standard deviation of the members' outputs, computed
/// directly from each member's forward pass.
fn member_stats(e: &CriticEnsemble, x: &[f64], a: usize) -> (f64, f64) {
    let outs: Vec<f64> = e.members().iter().map(|m| m.forward(x)[a]).collect();
    let mean = outs.iter().sum::<f64>() / outs.len() as f64;
    let var = outs.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / outs.len() as f64;
    (mean, var.sqrt())
}

fn criterion_3() -> Verdict {
    let mut r = rng(3);
    let mut mismatches = 0;
    let mut pruned_total = 0;
    for case in 0..1000u64 {
        let actions = r.gen_range(2..7);
        let feat = r.gen_range(1..5);
        let sigma_max = r.gen_range(0.0..0.6);
        let e = CriticEnsemble::new(r.gen_range(2..6), &[feat, 8, actions], sigma_max, "x", mix(case)).unwrap();
        // random tree: a spine of random depth with random one-step costs, plus siblings
        let mut tree: SearchTree<()> = SearchTree::new((), GAMMA);
        let depth = r.gen_range(0..6);
        let mut node = ROOT;
        let mut path_costs = Vec::new();
        for _ in 0..depth {
            let width = r.gen_range(1..=actions);
            let acts: Vec<usize> = (0..width).collect();
            tree.expand(node, &acts, &[]);
            for &(_, child) in &tree.node(node).children.clone() {
                tree.node_mut(child).edge_cost = if r.gen_bool(0.5) { 0.0 } else { r.gen_range(0.0..1.0) };
            }
            let a = r.gen_range(0..width);
            node = tree.child(node, a).unwrap();
            path_costs.push(tree.node(node).edge_cost);
        }
        let x: Vec<f64> = (0..feat).map(|_| r.gen_range(-1.0..1.0)).collect();
        let c_hat = r.gen_range(0.0..2.0);
        expand_with_pruning(&mut tree, node, &x, &path_costs, &e, c_hat, 0.0);

        // oracle: V_C from the stored edge costs along the root-to-leaf path
        let mut spine = Vec::new();
        let mut n = node;
        while n != ROOT {
            spine.push(tree.node(n).edge_cost);
            n = tree.nodes().iter().position(|p| p.children.iter().any(|&(_, c)| c == n)).unwrap();
        }
        spine.reverse();
        let d = spine.len();
        let stats: Vec<(f64, f64)> = (0..actions).map(|a| member_stats(&e, &x, a)).collect();
        let v_c: Vec<f64> = stats
            .iter()
            .map(|(mu, _)| spine.iter().enumerate().map(|(k, c)| GAMMA.powi(k as i32) * c).sum::<f64>() + GAMMA.powi(d as i32) * mu)
            .collect();
        let mut expected: Vec<usize> =
            (0..actions).filter(|&a| stats[a].1 <= sigma_max + 1e-12 && v_c[a] > c_hat).collect();
        if expected.len() == actions {
            let keep = (0..actions).min_by(|&a, &b| v_c[a].total_cmp(&v_c[b])).unwrap();
            expected.retain(|&a| a != keep);
        }
        let mut got = tree.node(node).pruned.clone();
        got.sort_unstable();
        pruned_total += got.len();
        if got != expected {
            mismatches += 1;
        }
    }
    (mismatches == 0 && pruned_total > 0, format!("{mismatches}/1000 mismatches, {pruned_total} actions pruned"))
}

// ---------------------------------------------------------------- 4

/// `P(good | observations)` by summing the joint over quality and every
/// observation sequence of the same length, keeping the observed one.
fn brute_force_posterior(prior: f64, obs: &[(bool, f64)]) -> f64 {
    let l = obs.len();
    let (mut joint_good, mut evidence) = (0.0, 0.0);
    for quality in [true, false] {
        for seq in 0..(1u32 << l) {
            let mut p = if quality { prior } else { 1.0 - prior };
            for (i, &(_, acc)) in obs.iter().enumerate() {
                let says_good = seq >> i & 1 == 1;
                p *= if says_good == quality { acc } else { 1.0 - acc };
            }
            let matches = obs.iter().enumerate().all(|(i, &(g, _))| (seq >> i & 1 == 1) == g);
            if matches {
                evidence += p;
                if quality {
                    joint_good += p;
                }
            }
        }
    }
    joint_good / evidence
}

fn criterion_4() -> Verdict {
    let mut r = rng(4);
    let mut worst_bayes: f64 = 0.0;
    for _ in 0..2000 {
        let prior = r.gen_range(0.01..0.99);
        let len = r.gen_range(1..=4);
        let obs: Vec<(bool, f64)> = (0..len).map(|_| (r.gen_bool(0.5), sensor_accuracy(r.gen_range(0.0..8.0), r.gen_range(0.5..30.0)))).collect();
        let sequential = obs.iter().fold(prior, |p, &(g, acc)| belief_update(p, g, acc));
        worst_bayes = worst_bayes.max((sequential - brute_force_posterior(prior, &obs)).abs());
    }
    // the environment's Sense action applies the same update
    let env = Rocksample::new(RocksampleConfig::new(5, 3, 20.0, 1).unwrap()).unwrap();
    let mut env_rng = rng(40);
    let mut s = env.initial_state(&mut env_rng);
    let mut obs = Vec::new();
    for _ in 0..4 {
        let before = s.rocks[0].belief;
        let out = env.step(&s, RocksampleAction::Sense(0).index(), &mut env_rng);
        let after = out.next_state.rocks[0].belief;
        let acc = sensor_accuracy(env.distance(s.agent, 0), 20.0);
        let good = (belief_update(before, true, acc) - after).abs() < 1e-15;
        obs.push((good, acc));
        s = out.next_state;
    }
    let env_err = (s.rocks[0].belief - brute_force_posterior(0.5, &obs)).abs();

    let mut worst_return: f64 = 0.0;
    for _ in 0..500 {
        let values: Vec<f64> = (0..r.gen_range(0..60)).map(|_| r.gen_range(-100.0..100.0)).collect();
        let direct: f64 = values.iter().enumerate().map(|(t, v)| GAMMA.powi(t as i32) * v).sum();
        worst_return = worst_return.max((discounted_return(&values, GAMMA) - direct).abs() / direct.abs().max(1.0));
    }
    (
        worst_bayes < 1e-12 && env_err < 1e-12 && worst_return < 1e-12,
        format!("belief error {worst_bayes:.1e}, environment {env_err:.1e}, return {worst_return:.1e} (< 1e-12)"),
    )
}

// ---------------------------------------------------------------- 5

fn criterion_5() -> Verdict {
    let env = Bandit::new(vec![(1.0, 2.0), (0.0, 0.0)]);
    let spec = CmdpSpec::new(GAMMA, vec![1.0], 2, 1).unwrap();
    let config = PlannerConfig::new(GAMMA).with_iterations(1024);
    let mut picks_b = 0;
    let mut min_lambda = f64::INFINITY;
    for seed in 0..100 {
        let mut planner = CcmcpPlanner::new(env.clone(), config.clone(), CcmcpConfig::default(), 1.0).unwrap();
        let record = run_episode(&env, &mut planner, &spec, &EpisodeSeeds::new(5, seed)).unwrap();
        if record.transitions[0].action == 1 {
            picks_b += 1;
        }
        let mut ls = LagrangeState::new(0.0, 1.0, 100.0);
        let mut trace = Vec::new();
        plan_ccmcp(&false, &env, &config, &CcmcpConfig::default(), 1.0, &mut ls, &mut PlannerRng::new(seed), Some(&mut trace));
        min_lambda = trace.iter().copied().fold(min_lambda, f64::min);
    }
    (picks_b >= 95 && min_lambda >= 0.0, format!("B chosen {picks_b}/100 (>= 95), min λ {min_lambda}"))
}

// ---------------------------------------------------------------- 6, 7, 9, 10

const ROCKSAMPLE: &str = r#"
environment = "rocksample"
iteration_sweep = [1024]
episodes = 50
master_seed = 2024
c_hat = 1.0
max_episode_steps = 200
parallel = true

[rocksample]
n = 5
m = 7

[search]
uct_c = 0.1

[train]
alpha0 = 8.0
epsilon = 0.1
sigma_max = 0.5
train_iterations = 1024
episodes_per_mdp = 10
max_outer_loops = 40
"#;

struct RocksampleRuns {
    /// Whether the training loop certified the critic as safe.
    certified: bool,
    cmcts: SweepOutput,
    cmcts_tight: SweepOutput,
    mcts: SweepOutput,
    ccmcp: SweepOutput,
}

fn rocksample_runs() -> &'static Result<RocksampleRuns, String> {
    static RUNS: OnceLock<Result<RocksampleRuns, String>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let t = Instant::now();
        let base = experiment(ROCKSAMPLE, &[]);
        let (critic, certified) = trained_or_last(train_critic_observed(&base, log_loop))?;
        eprintln!("  rocksample critic trained in {:.0?}, certified safe: {certified}", t.elapsed());
        let critic = Arc::new(critic);
        let run = |planner: &str, extra: &[&str]| {
            let mut o = vec![format!("planner={planner}")];
            o.extend(extra.iter().map(|s| s.to_string()));
            let o: Vec<&str> = o.iter().map(String::as_str).collect();
            let t = Instant::now();
            let out = sweep_results(&experiment(ROCKSAMPLE, &o), Some(&critic)).map_err(|e| e.to_string());
            eprintln!("  {planner} {extra:?} evaluated in {:.0?}", t.elapsed());
            out
        };
        Ok(RocksampleRuns {
            certified,
            cmcts: run("cmcts", &[])?,
            cmcts_tight: run("cmcts", &["cmcts.sigma_max=0.1"])?,
            mcts: run("mcts", &["mcts.lambda=0.7"])?,
            ccmcp: run("ccmcp", &[])?,
        })
    })
}

fn log_loop(r: &cmcts_core::cmcts::LoopRecord) {
    eprintln!(
        "    loop {} λ={:.3} cost={:.3} eval={:?} data={}",
        r.n, r.lambda, r.collect_mean_cost, r.eval_mean_cost, r.dataset_size
    );
}

/// The certified critic, or the last one the training loop fitted before it
/// gave up, so the deployment criteria still measure something.
fn trained_or_last(
    result: Result<cmcts_core::cmcts::TrainOutcome, cmcts_harness::HarnessError>,
) -> Result<(CriticEnsemble, bool), String> {
    use cmcts_core::cmcts::TrainLoopError;
    match result {
        Ok(o) => Ok((o.ensemble, true)),
        Err(cmcts_harness::HarnessError::Training(TrainLoopError::Unsafe { last: Some(last), .. })) => Ok((*last, false)),
        Err(e) => Err(e.to_string()),
    }
}

fn with_runs(f: impl FnOnce(&RocksampleRuns) -> Verdict) -> Verdict {
    match rocksample_runs() {
        Ok(runs) => f(runs),
        Err(e) => (false, format!("rocksample experiment failed: {e}")),
    }
}

fn criterion_6() -> Verdict {
    with_runs(|r| {
        let (c, m, cc) = (&r.cmcts.rows[0], &r.mcts.rows[0], &r.ccmcp.rows[0]);
        let pass = c.mean_discounted_cost <= 1.05
            && c.violation_pct <= m.violation_pct
            && c.mean_discounted_reward >= cc.mean_discounted_reward;
        (
            pass,
            format!(
                "C-MCTS cost {:.3} (<= 1.05), violations {}% vs MCTS(λ=0.7) {}%, reward {:.3} vs CC-MCP {:.3}; critic certified by training: {}",
                c.mean_discounted_cost,
                c.violation_pct,
                m.violation_pct,
                c.mean_discounted_reward,
                cc.mean_discounted_reward,
                r.certified
            ),
        )
    })
}

fn criterion_7() -> Verdict {
    with_runs(|r| {
        let (c, cc) = (r.cmcts.rows[0].cost_variance, r.ccmcp.rows[0].cost_variance);
        (cc >= 10.0 * c && cc > 0.0, format!("cost variance CC-MCP {cc:.4e}, C-MCTS {c:.4e}, ratio {:.1} (>= 10)", cc / c))
    })
}

fn criterion_9() -> Verdict {
    with_runs(|r| {
        let (c, m) = (r.cmcts.rows[0].mean_peak_tree_depth, r.mcts.rows[0].mean_peak_tree_depth);
        (c >= m, format!("mean peak depth C-MCTS {c:.2} vs MCTS {m:.2}"))
    })
}

fn criterion_10() -> Verdict {
    with_runs(|r| {
        let (tight, loose) = (r.cmcts_tight.rows[0].mean_discounted_cost, r.cmcts.rows[0].mean_discounted_cost);
        (tight >= loose, format!("mean cost σ_max=0.1 {tight:.3} vs σ_max=0.5 {loose:.3}"))
    })
}

// ---------------------------------------------------------------- 8

const GRIDWORLD: &str = r#"
environment = "gridworld"
iteration_sweep = [512]
episodes = 100
master_seed = 8
c_hat = 0.0
max_episode_steps = 100
parallel = true

[gridworld]
wind_p = 0.3
model_wind_p = 0.0
sim_wind_p = 0.25

[search]
iterations = 512
uct_c = 0.1

[cmcts]
prune_slack = 0.05

[train]
alpha0 = 10.0
epsilon = 0.05
sigma_max = 0.2
train_iterations = 512
episodes_per_mdp = 20
lambda_max = 100.0
"#;

fn criterion_8() -> Verdict {
    let t = Instant::now();
    let base = experiment(GRIDWORLD, &[]);
    let (critic, certified) = match trained_or_last(train_critic_observed(&base, log_loop)) {
        Ok(c) => c,
        Err(e) => return (false, format!("training failed: {e}")),
    };
    eprintln!("  gridworld critic trained in {:.0?}, certified safe: {certified}", t.elapsed());
    let critic = Arc::new(critic);
    let cmcts_config = experiment(GRIDWORLD, &["planner=cmcts"]);
    let map = cmcts_harness::state_visitation_map(&cmcts_config, Some(&critic)).expect("visitation run");
    let cmcts = sweep_results(&cmcts_config, Some(&critic)).expect("cmcts sweep");
    let layout = cmcts_core::env::Layout::default_layout();
    let top_route: u64 = layout.risky_windy_cells().iter().map(|&c| map.count(c)).sum();
    let ccmcp =
        sweep_results(&experiment(GRIDWORLD, &["planner=ccmcp", "iteration_sweep=[16384]", "episodes=20"]), None)
            .expect("ccmcp sweep");
    let (c, cc) = (&cmcts.rows[0], &ccmcp.rows[0]);
    (
        c.violation_pct <= 2.0 && top_route == 0 && cc.violation_pct > 0.0,
        format!(
            "C-MCTS@512 violations {}% (<= 2), top-route visits {top_route} (0), reward {:.1}, mean length {:.1}; CC-MCP@16384 violations {}% (> 0); critic certified: {certified}",
            c.violation_pct,
            c.mean_discounted_reward,
            map.total() as f64 / (cmcts_config.episodes - map.failed_episodes).max(1) as f64,
            cc.violation_pct
        ),
    )
}

// ---------------------------------------------------------------- 11

fn criterion_11() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let random_critic = Arc::new(CriticEnsemble::new(3, &[23, 16, 12], 0.5, "rocksample-v1:n=5:m=7:seed=0", 11).unwrap());
    let mut identical = true;
    let mut files = 0;
    for (env, planner) in [("rocksample", "mcts"), ("rocksample", "cmcts"), ("gridworld", "ccmcp")] {
        let mut bytes: Vec<Vec<Vec<u8>>> = Vec::new();
        for (i, parallel) in [false, true, false].into_iter().enumerate() {
            let out = dir.path().join(format!("{env}-{planner}-{i}"));
            let text = format!(
                "environment = \"{env}\"\nplanner = \"{planner}\"\niteration_sweep = [16, 32]\nepisodes = 4\nmaster_seed = 11\nmax_episode_steps = 30\nparallel = {parallel}\noutput_dir = \"{}\"\n",
                out.display()
            );
            let config = experiment(&text, &[]);
            run_sweep(&config, Some(&random_critic)).expect("sweep runs");
            let read = |name: &str| std::fs::read(out.join(format!("{planner}_{name}.csv"))).unwrap();
            bytes.push(vec![read("sweep"), read("episodes")]);
            files += 2;
        }
        identical &= bytes.windows(2).all(|w| w[0] == w[1]);
    }
    (identical, format!("{files} CSV files from sequential and parallel reruns byte-identical: {identical}"))
}

type Criterion = (u32, fn() -> Verdict);

fn main() {
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [Criterion; 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failed = Vec::new();
    for (n, check) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("criterion {n}: {} {detail} [{:.1?}]", if pass { "PASS" } else { "FAIL" }, t.elapsed());
        if !pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
