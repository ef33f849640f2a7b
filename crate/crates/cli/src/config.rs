//! Per-command parameters: defaults, then the command's section of the config
//! file, then command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Declares a parameter struct with defaults and a matching struct of
/// optional command-line flags.
macro_rules! params {
    ($params:ident, $flags:ident { $($(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $params {
            $(pub $field: $ty),*
        }

        impl Default for $params {
            fn default() -> Self {
                Self { $($field: $default.into()),* }
            }
        }

        #[derive(Clone, Debug, Default, clap::Args, Serialize)]
        pub struct $flags {
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params!(SimulateParams, SimulateFlags {
    s: f64 = 1.0,
    m: f64 = 1.0,
    n_modes: usize = 256usize,
    half_period: f64 = 1.0,
    /// Time step; 0 selects 0.01 / omega_max
    dt: f64 = 0.0,
    t_final: f64 = 400.0,
    /// Time between recorded samples
    record_every: f64 = 0.1,
    /// random, modal or gaussian
    data: String = "random",
    seed: u64 = 1u64,
    max_mode: i64 = 16i64,
    mode: i64 = 1i64,
    data_amplitude: f64 = 1.0,
    width: f64 = 0.1,
    /// sobolev or energy
    weight: String = "sobolev",
    /// Samples before this time are excluded from the rate fit
    fit_start: f64 = 10.0,
    tail_fraction: f64 = 0.5,
    damping: String = "smoothed",
    amplitude: f64 = 1.0,
    center: f64 = 0.0,
    half_width: f64 = 0.5,
    /// Ramp width of the smoothed indicator; 0 selects four grid cells
    ramp: f64 = 0.0,
});

params!(ResolventParams, ResolventFlags {
    s: f64 = 1.0,
    m: f64 = 1.0,
    k_min: f64 = 1.0,
    k_max: f64 = 256.0,
    per_decade: usize = 16usize,
    /// L2->L2, L2->Hs2, Hneg->L2 or energy
    pair: String = "L2->L2",
    /// 0 selects the smallest mode count resolving k_max
    n_modes: usize = 0usize,
    /// Upper limit for the automatic mode count
    max_modes: usize = 2048usize,
    half_period: f64 = 1.0,
    damping: String = "smoothed",
    amplitude: f64 = 1.0,
    center: f64 = 0.0,
    half_width: f64 = 0.5,
    /// Ramp width of the smoothed indicator; 0 selects four grid cells
    ramp: f64 = 0.0,
});

params!(ObservabilityParams, ObservabilityFlags {
    s: f64 = 1.0,
    delta: f64 = 0.3,
    lambda_min: f64 = 1.0,
    lambda_max: f64 = 1e4,
    points: usize = 40usize,
    /// Add the undamped eigenvalues (pi k)^s inside the range
    include_eigenvalues: bool = true,
    /// 0 selects the mode count required at lambda_max
    n_modes: usize = 0usize,
    /// Also sweep the periodization of a Gaussian over alpha
    periodization: bool = false,
    gaussian_width: f64 = 1.0,
    n_alpha: usize = 64usize,
});

params!(RateFitParams, RateFitFlags {
    /// CSV file produced by simulate or resolvent-scan
    input: String = "",
    x_column: String = "t",
    y_column: String = "energy_norm",
    /// power, exponential or envelope
    model: String = "power",
    tail_fraction: f64 = 0.5,
    /// Samples with x below this value are ignored
    x_min: f64 = 0.0,
    /// Run the bound-direction check against bound_exponent
    check: bool = false,
    bound_exponent: f64 = 0.0,
    /// growth or decay
    kind: String = "decay",
});

params!(VerifyParams, VerifyFlags {
    /// invariants or acceptance
    suite: String = "invariants",
    /// Comma-separated criterion numbers; empty runs all
    criteria: String = "",
});

/// Parsed config file: a `[command]` table per command.
#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        for (key, value) in &table {
            if !value.is_table() {
                return Err(format!("top-level key `{key}` must be inside a [command] section"));
            }
        }
        Ok(Self { table })
    }

    /// Resolves parameters for `section`; flags override file values.
    pub fn resolve<P: DeserializeOwned, F: Serialize>(&self, section: &str, flags: &F) -> Result<P, CliError> {
        let mut merged = match self.table.get(section) {
            Some(toml::Value::Table(t)) => t.clone(),
            _ => toml::Table::new(),
        };
        let overrides = toml::Table::try_from(flags).map_err(|e| CliError::Config(e.to_string()))?;
        merged.extend(overrides);
        P::deserialize(toml::Value::Table(merged))
            .map_err(|e| CliError::Config(format!("[{section}] {}", e.message())))
    }
}

/// `key = value` lines of the resolved parameters, sorted by key.
pub fn echo<P: Serialize>(params: &P) -> Vec<String> {
    let table = toml::Table::try_from(params).expect("parameters serialize to a table");
    table.iter().map(|(k, v)| format!("{k} = {v}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults_fill_the_rest() {
        let file = ConfigFile::parse("[resolvent-scan]\ns = 2\nk_max = 64.0\n").unwrap();
        let flags = ResolventFlags { k_max: Some(32.0), ..Default::default() };
        let p: ResolventParams = file.resolve("resolvent-scan", &flags).unwrap();
        assert_eq!(p.s, 2.0);
        assert_eq!(p.k_max, 32.0);
        assert_eq!(p.per_decade, 16);
        assert_eq!(p.pair, "L2->L2");
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_field_name() {
        let file = ConfigFile::parse("[simulate]\nbogus = 1\n").unwrap();
        let err = file.resolve::<SimulateParams, _>("simulate", &SimulateFlags::default()).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let file = ConfigFile::parse("[simulate]\ns = \"one\"\n").unwrap();
        assert!(file.resolve::<SimulateParams, _>("simulate", &SimulateFlags::default()).is_err());
        assert!(ConfigFile::parse("s = 1\n").is_err());
    }

    #[test]
    fn echo_is_sorted() {
        let lines = echo(&VerifyParams::default());
        assert_eq!(lines, vec!["criteria = \"\"", "suite = \"invariants\""]);
    }
}
