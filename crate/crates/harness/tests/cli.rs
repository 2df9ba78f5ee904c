use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cmdp-plan");

const SMALL: &str = r#"
environment = "gridworld"
planner = "mcts"
iteration_sweep = [16, 32]
episodes = 3
master_seed = 5
c_hat = 0.0
max_episode_steps = 20

[search]
iterations = 16
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("c.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_writes_tables_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["mcts_sweep.csv", "mcts_episodes.csv", "mcts.dat"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let dat = std::fs::read_to_string(out.join("mcts.dat")).unwrap();
    assert_eq!(dat.lines().count(), 3);
    assert!(dat.starts_with("Number_of_Planning_Iterations "));
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&["sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--set", "parallel=false"]).status.success());
    for f in ["mcts_sweep.csv", "mcts_episodes.csv", "mcts.dat"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&["evaluate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "search.no_such_key=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));
    let o = run(&["evaluate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "planner=cmcts"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["evaluate", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unsafe_training_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SMALL}\n[train]\ntrain_iterations = 8\nepisodes_per_mdp = 1\nmax_outer_loops = 1\nepochs = 1\nhidden = [4]\n"
    );
    // one loop at λ = 0 on a windy top route cannot finish safely with ĉ = 0
    let cfg = write_config(dir.path(), &text.replace("[search]", "[gridworld]\nwind_p = 0.9\nsim_wind_p = 0.9\n\n[search]"));
    let out = dir.path().join("out");
    let o = run(&["train-critic", "--config", &cfg, "--out", out.to_str().unwrap()]);
    match o.status.code() {
        Some(0) => assert!(out.join("critic.bin").exists()),
        Some(3) => assert!(out.join("train_trace.csv").exists()),
        c => panic!("unexpected exit {c:?}: {}", String::from_utf8_lossy(&o.stderr)),
    }
}

#[test]
fn trained_critic_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{SMALL}\n[train]\ntrain_iterations = 16\nepisodes_per_mdp = 2\nmax_outer_loops = 30\nepochs = 2\nhidden = [8]\nlambda_max = 1000.0\nalpha0 = 200.0\n"
    );
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = run(&["train-critic", "--config", &cfg, "--out", out.to_str().unwrap()]);
    if o.status.code() == Some(3) {
        return;
    }
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ckpt = out.join("critic.bin");
    let o = run(&["inspect-checkpoint", "--checkpoint", ckpt.to_str().unwrap()]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("encoder: gridworld-v1:8x8"), "{text}");
    let o = run(&[
        "evaluate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--set",
        "planner=cmcts",
        "--set",
        &format!("cmcts.critic_checkpoint_path=\"{}\"", ckpt.display()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("cmcts_evaluate.csv").exists());
}
