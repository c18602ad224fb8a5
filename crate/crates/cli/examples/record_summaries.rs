//! Build a replay store for `tidyup summarize` from printed completions.
//!
//! usage: record_summaries OUT MODE EXAMPLES COMPLETION... [+ MODE EXAMPLES COMPLETION...]

use tidyup_cli::{summarize_examples, SummaryMode};
use tidyup_llmbackend::{store_lines, DecodingParams, SequenceBackend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some((out, rest)) = args.split_first() else {
        eprintln!("usage: record_summaries OUT MODE EXAMPLES COMPLETION... [+ MODE EXAMPLES COMPLETION...]");
        std::process::exit(2);
    };
    let params = DecodingParams::default();
    let mut records = Vec::new();
    for group in rest.split(|a| a == "+") {
        let [mode, examples, completions @ ..] = group else {
            return Err("each group needs MODE EXAMPLES COMPLETION...".into());
        };
        let mode = match mode.as_str() {
            "receptacle" => SummaryMode::Receptacle,
            "primitive" => SummaryMode::Primitive,
            other => return Err(format!("unknown mode {other}").into()),
        };
        let answers = completions
            .iter()
            .map(std::fs::read_to_string)
            .collect::<Result<Vec<_>, _>>()?;
        let backend = SequenceBackend::new(answers);
        let s = summarize_examples(&std::fs::read_to_string(examples)?, mode, &backend, &params)
            .map_err(|e| e.message)?;
        println!("{}", s.summary);
        records.extend(backend.into_records());
    }
    std::fs::write(out, store_lines(&records))?;
    Ok(())
}
