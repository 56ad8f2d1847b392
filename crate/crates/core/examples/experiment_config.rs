//! A config-driven run: records streamed to JSONL, a summary, and the summary
//! recomputed from the records.

use fk_cftp::experiment::{report, run_experiment, ExperimentConfig};

fn main() -> fk_cftp::Result<()> {
    let config = ExperimentConfig::from_json(
        r#"{"model":"fk","graph":{"kind":"torus","d":2,"L":8},"p":"critical","q":2,
            "mode":"coupling-time","n_samples":300,"seed":1,"stats":{"bootstrap_reps":200}}"#,
    )?;
    let dir = std::env::temp_dir().join("fkcftp-example-run");
    let run = run_experiment(&config, &dir, None)?;
    println!("{}", serde_json::to_string_pretty(&run.summary)?);
    assert_eq!(report(&dir, None)?, run.summary);
    println!("records in {}", run.samples_path.expect("sampling mode").display());
    Ok(())
}
