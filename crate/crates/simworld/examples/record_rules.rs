//! Record the rule-derivation calls for a world into a replay store,
//! answering them in order from completion files.
//!
//! usage: record_rules WORLD OUT RECEPTACLE_SUMMARY CATEGORIES PRIMITIVE_SUMMARY RECEPTACLE_SELECTION PRIMITIVE_SELECTION

use tidyup_llmbackend::{store_lines, DecodingParams, SequenceBackend};
use tidyup_simworld::{derive_rules, resolve_rules, WorldFile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() != 7 {
        eprintln!("usage: record_rules WORLD OUT RECEPTACLE_SUMMARY CATEGORIES PRIMITIVE_SUMMARY RECEPTACLE_SELECTION PRIMITIVE_SELECTION");
        std::process::exit(2);
    }
    let world = WorldFile::load(&args[0])?;
    let answers = args[2..]
        .iter()
        .map(std::fs::read_to_string)
        .collect::<Result<Vec<_>, _>>()?;
    let backend = SequenceBackend::new(answers);
    let params = DecodingParams::default();
    let receptacles = world.receptacle_names();
    let rules = derive_rules(&world.examples, &receptacles, &backend, &params)?;
    let table = resolve_rules(&rules, &receptacles, &backend, &params)?;
    std::fs::write(&args[1], store_lines(&backend.into_records()))?;
    for e in table.entries() {
        println!("{} -> {} ({})", e.category, e.receptacle, e.primitive);
    }
    Ok(())
}
