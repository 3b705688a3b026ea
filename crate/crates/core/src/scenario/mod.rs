//! Config-driven scenario runner behind the `twinbeam` binary.

pub mod config;
pub mod run;
pub mod summary;

pub use config::{parse_config, parse_config_str, ParsedConfig, ScenarioConfig, ScenarioKind};
pub use run::run_scenario;
pub use summary::{emit_summary, ResultSummary, SUMMARY_FILE};

use crate::error::{Error, Result};
use crate::imaging::{glyphs, Mask, PixelGrid};

/// Masks available as `builtin:<name>` in configs.
pub const BUILTIN_MASKS: &[&str] = &["uniform", "nt", "nt-n", "nt-t", "t", "cat"];

pub fn builtin_mask(name: &str, grid: PixelGrid) -> Result<Mask> {
    match name {
        "uniform" => Ok(glyphs::uniform(grid)),
        "nt" => Ok(glyphs::letters_nt(grid)),
        "nt-n" => Ok(glyphs::letter_n_of_nt(grid)),
        "nt-t" => Ok(glyphs::letter_t_of_nt(grid)),
        "t" => glyphs::letter_t(grid),
        "cat" => Ok(glyphs::cat_face(grid)),
        other => Err(Error::validation(format!("unknown built-in mask `{other}`"))),
    }
}
