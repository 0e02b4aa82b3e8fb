//! The batch interface used by the `fene-fps` binary, driven in memory.
//!
//!     cargo run --release --example batch_run -- configs/compare.json

use fene_fps::run::{execute_with_threads, thread_cap, RunConfig};

fn main() -> fene_fps::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => {
            let cfg = RunConfig::load(path.as_ref())?;
            cfg.validate()?;
            cfg
        }
        None => RunConfig::from_json(
            r#"{"mode": "spectrum",
                "drift": {"type": "linear", "matrix": [0, 1, 0, 0], "wi": 1},
                "discretization": {"degree": 12}}"#,
        )?,
    };
    let out = execute_with_threads(&cfg, thread_cap()?)?;
    println!("{}", out.report);
    if let Some(csv) = out.sweep_csv {
        println!("{csv}");
    }
    Ok(())
}
