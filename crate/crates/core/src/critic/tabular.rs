//! Exact policy cost evaluation on small explicit CMDPs, used to check the
//! trained critic.

use super::CriticError;

/// Explicit finite CMDP. Transitions into a terminal state stop accumulating cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularCmdp {
    /// `transitions[s][a][s']`.
    pub transitions: Vec<Vec<Vec<f64>>>,
    /// `costs[s][a]`.
    pub costs: Vec<Vec<f64>>,
    pub terminal: Vec<bool>,
}

impl TabularCmdp {
    pub fn new(transitions: Vec<Vec<Vec<f64>>>, costs: Vec<Vec<f64>>, terminal: Vec<bool>) -> Result<Self, CriticError> {
        let n = transitions.len();
        if n == 0 || costs.len() != n || terminal.len() != n {
            return Err(CriticError::Config("table sizes disagree".into()));
        }
        let actions = transitions[0].len();
        for (s, rows) in transitions.iter().enumerate() {
            if rows.len() != actions || costs[s].len() != actions {
                return Err(CriticError::Config(format!("state {s} has the wrong number of actions")));
            }
            for (a, row) in rows.iter().enumerate() {
                let sum: f64 = row.iter().sum();
                if row.len() != n || row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(CriticError::Config(format!("row ({s}, {a}) is not a distribution")));
                }
            }
        }
        Ok(Self { transitions, costs, terminal })
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_actions(&self) -> usize {
        self.transitions[0].len()
    }

    /// Deterministic CMDP from a successor table `next[s][a]`.
    pub fn deterministic(next: &[Vec<usize>], costs: Vec<Vec<f64>>, terminal: Vec<bool>) -> Result<Self, CriticError> {
        let n = next.len();
        let transitions = next
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&t| {
                        let mut p = vec![0.0; n];
                        if t < n {
                            p[t] = 1.0;
                        }
                        p
                    })
                    .collect()
            })
            .collect();
        Self::new(transitions, costs, terminal)
    }
}

/// Solves `Q(s,a) = c(s,a) + γ·Σ P(s'|s,a)·Q(s', π(s'))` (zero beyond terminal
/// states) by fixed-point iteration until the max residual is below 1e-10.
pub fn exact_cost_q(cmdp: &TabularCmdp, policy: &[usize], gamma: f64) -> Result<Vec<Vec<f64>>, CriticError> {
    let (n, m) = (cmdp.num_states(), cmdp.num_actions());
    if policy.len() != n || policy.iter().any(|&a| a >= m) {
        return Err(CriticError::Config("policy must pick a valid action in every state".into()));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(CriticError::Config(format!("gamma {gamma} outside [0, 1)")));
    }
    let mut q = vec![vec![0.0; m]; n];
    loop {
        let v: Vec<f64> = (0..n).map(|s| if cmdp.terminal[s] { 0.0 } else { q[s][policy[s]] }).collect();
        let mut residual: f64 = 0.0;
        let next: Vec<Vec<f64>> = (0..n)
            .map(|s| {
                (0..m)
                    .map(|a| {
                        let cont: f64 = cmdp.transitions[s][a].iter().zip(&v).map(|(p, v)| p * v).sum();
                        let value = cmdp.costs[s][a] + gamma * cont;
                        residual = residual.max((value - q[s][a]).abs());
                        value
                    })
                    .collect()
            })
            .collect();
        q = next;
        if residual < 1e-10 {
            return Ok(q);
        }
    }
}
