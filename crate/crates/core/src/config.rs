use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    /// Exact solve, plus `f64` shadows of the iterate norms in the debug log.
    FloatShadow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strictness {
    Abort,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub mode: Mode,
    /// Largest numerator/denominator bit length tolerated in solver state.
    pub max_bits: u64,
    pub seed: u64,
    /// What a failed potential-drop check does.
    pub strictness: Strictness,
    pub format: OutputFormat,
    pub emit_audit: bool,
    /// Round the bubble coefficients to a grid after every step.
    pub rounding: bool,
    /// Re-derive every bubble step through the general affine projector and
    /// re-check all state invariants.
    pub cross_check: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: Mode::Exact,
            max_bits: 1 << 16,
            seed: 0,
            strictness: if cfg!(debug_assertions) { Strictness::Abort } else { Strictness::Warn },
            format: OutputFormat::Json,
            emit_audit: true,
            rounding: true,
            cross_check: cfg!(debug_assertions),
        }
    }
}
