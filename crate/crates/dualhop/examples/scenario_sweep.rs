//! Parse a shipped scenario and write its sweep as CSV to stdout.
//!
//! `cargo run --release --example scenario_sweep -- scenarios/figures/fig7-af-strong.toml`

use dualhop::cli::{parse_config, run_sweep, scenarios_dir, write_csv};

fn main() -> dualhop::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| scenarios_dir().join("figures").join("fig7-af-strong.toml"));
    let cfg = parse_config(&path)?;
    for line in cfg.describe() {
        eprintln!("# {line}");
    }
    let out = run_sweep(&cfg, &cfg.sweep)?;
    for f in &out.failures {
        eprintln!("failed at {} dB ({}): {}", f.snr_db, f.metric, f.error);
    }
    write_csv(std::io::stdout().lock(), &out.rows)
}
