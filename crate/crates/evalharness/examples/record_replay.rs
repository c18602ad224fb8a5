//! Write a replay store from a dataset and a completion script.
//!
//! usage: record_replay DATASET SCRIPT OUT [HUMAN_SUMMARIES]

use std::collections::HashMap;
use std::path::Path;

use tidyup_evalharness::{load_human_summaries, scripted_records, store_text, CompletionScript};
use tidyup_llmbackend::DecodingParams;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if !(3..=4).contains(&args.len()) {
        eprintln!("usage: record_replay DATASET SCRIPT OUT [HUMAN_SUMMARIES]");
        std::process::exit(2);
    }
    let ds = tidyup_core::load_dataset(&args[0])?;
    let script: CompletionScript = serde_json::from_str(&std::fs::read_to_string(&args[1])?)?;
    let human = match args.get(3) {
        Some(p) => load_human_summaries(Path::new(p))?,
        None => HashMap::new(),
    };
    let records = scripted_records(&ds, &script, &human, &DecodingParams::default())?;
    std::fs::write(&args[2], store_text(&records))?;
    println!("{} records -> {}", records.len(), args[2]);
    Ok(())
}
