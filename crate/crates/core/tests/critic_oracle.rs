//! Trained critic against exact policy evaluation, and the loss gradient
//! against central finite differences.

use cmcts_core::critic::{
    exact_cost_q, train, CriticEnsemble, QNetwork, TabularCmdp, TrainConfig, TransitionDataset, TransitionSample,
};
use cmcts_core::rng::{RngStream, StreamLabel};
use rand::Rng;

const GAMMA: f64 = 0.95;

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Logs, for every non-terminal state and every first action, the episode
/// that takes that action and then follows `policy`.
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

fn max_error(e: &CriticEnsemble, cmdp: &TabularCmdp, q: &[Vec<f64>]) -> f64 {
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

fn fit(cmdp: &TabularCmdp, data: &TransitionDataset, seed: u64) -> CriticEnsemble {
    let cfg = TrainConfig { epochs: 300, batch_size: 16, learning_rate: 3e-3, hidden_dims: vec![32, 32], seed, ..Default::default() };
    let dims = cfg.layer_dims(cmdp.num_states(), cmdp.num_actions());
    let mut e = CriticEnsemble::new(cfg.k, &dims, 0.5, "tabular", seed).unwrap();
    train(&mut e, data, &cfg, GAMMA).unwrap();
    e
}

pub fn chain() -> (TabularCmdp, Vec<Vec<usize>>) {
    let next: Vec<Vec<usize>> = (0..5).map(|s| vec![(s + 1).min(4)]).collect();
    let mut costs = vec![vec![0.0]; 5];
    costs[3][0] = 1.0;
    let mut terminal = vec![false; 5];
    terminal[4] = true;
    (TabularCmdp::deterministic(&next, costs, terminal).unwrap(), next)
}

/// 3×3 grid, actions N/E/S/W (walls block), goal (2,2) terminal, entering the
/// centre costs 1.
pub fn grid3() -> (TabularCmdp, Vec<Vec<usize>>, Vec<usize>) {
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
    // go east along the bottom row unless at the right edge, then north; middle row goes east through the centre
    let policy: Vec<usize> = (0..9).map(|s| if s % 3 == 2 { 0 } else { 1 }).collect();
    (TabularCmdp::deterministic(&next, costs, terminal).unwrap(), next, policy)
}

#[test]
fn chain_matches_dynamic_programming() {
    let (cmdp, next) = chain();
    let q = exact_cost_q(&cmdp, &[0; 5], GAMMA).unwrap();
    for s in 0..4 {
        assert!((q[s][0] - GAMMA.powi(3 - s as i32)).abs() < 1e-10);
    }
    let e = fit(&cmdp, &policy_dataset(&cmdp, &next, &[0; 5], 4), 3);
    let err = max_error(&e, &cmdp, &q);
    assert!(err < 0.05, "max error {err}");
}

#[test]
fn grid_matches_dynamic_programming() {
    let (cmdp, next, policy) = grid3();
    let q = exact_cost_q(&cmdp, &policy, GAMMA).unwrap();
    let e = fit(&cmdp, &policy_dataset(&cmdp, &next, &policy, 2), 5);
    let err = max_error(&e, &cmdp, &q);
    assert!(err < 0.05, "max error {err}");
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = RngStream::new(42, StreamLabel::NetworkInit).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let net = QNetwork::new(&[4, 6, 5, 3], &mut rng);
        let xs: Vec<Vec<f64>> = (0..8).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let batch: Vec<(&[f64], usize, f64)> =
            xs.iter().map(|x| (x.as_slice(), rng.gen_range(0..3), rng.gen_range(0.0..2.0))).collect();
        let (_, grad) = net.loss_and_grad(&batch);
        for _ in 0..5 {
            let i = rng.gen_range(0..net.params().len());
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
    assert!(worst < 1e-4, "worst relative error {worst}");
}
