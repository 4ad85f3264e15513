//! `ocrforge prompt`.

use ocrforge_core::metrics::build_cot_prompt;

use crate::cli::PromptArgs;
use crate::error::CliError;

pub fn run(args: &PromptArgs) -> Result<(), CliError> {
    let prompt = build_cot_prompt(&args.query).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{prompt}");
    Ok(())
}
