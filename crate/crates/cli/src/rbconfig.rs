use serde::Deserialize;
use tdesign::channels::Channel;
use tdesign::rb::{GateSource, NoiseModel, RBConfig};

use crate::CliError;

/// The `rb-sim` configuration file.
///
/// ```toml
/// n = 1
/// lengths = [2, 4, 8, 16]
/// num_sequences = 100
/// seed = 7
///
/// [noise]
/// kind = "depolarizing"   # none | depolarizing | amplitude_damping
/// param = 0.99            # depolarizing parameter p, or damping γ
///
/// [spam]
/// bias = 0.05
/// ```
///
/// Registers of three or more qubits use gates from the local random walk;
/// `walk_steps` sets the walk length per gate (default `10 n`).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbSimConfig {
    pub n: usize,
    pub lengths: Vec<usize>,
    pub num_sequences: usize,
    pub seed: Option<u64>,
    pub walk_steps: Option<usize>,
    pub noise: NoiseSection,
    pub spam: Option<SpamSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: String,
    #[serde(default)]
    pub param: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpamSection {
    pub bias: f64,
}

impl RbSimConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("bad rb-sim config: {}", e.message())))
    }

    pub fn noise_channel(&self) -> Result<Channel, CliError> {
        if self.n == 0 || self.n > 10 {
            return Err(CliError::Usage(format!("n = {} outside 1..=10", self.n)));
        }
        let dim = 1usize << self.n;
        let p = self.noise.param;
        let ch = match self.noise.kind.as_str() {
            "none" => Channel::identity(dim),
            "depolarizing" => Channel::depolarizing(dim, 1.0 - p)?,
            "amplitude_damping" if self.n == 1 => Channel::amplitude_damping(p)?,
            "amplitude_damping" => {
                return Err(CliError::Usage(
                    "amplitude_damping noise is single-qubit only".into(),
                ));
            }
            other => return Err(CliError::Usage(format!("unknown noise kind '{other}'"))),
        };
        Ok(ch)
    }

    pub fn uses_walk(&self) -> bool {
        self.n >= 3
    }

    pub fn steps(&self) -> usize {
        self.walk_steps.unwrap_or(10 * self.n)
    }

    /// Builds the simulator config, taking `default_seed` when the file has none.
    pub fn to_rb_config(&self, default_seed: u64) -> Result<RBConfig, CliError> {
        let noise = NoiseModel::Independent(self.noise_channel()?);
        let seed = self.seed.unwrap_or(default_seed);
        let mut cfg = RBConfig::new(
            self.n,
            self.lengths.clone(),
            self.num_sequences,
            noise,
            seed,
        );
        if let Some(spam) = &self.spam {
            if !(0.0..=0.5).contains(&spam.bias) {
                return Err(CliError::Usage(format!(
                    "spam bias {} outside [0, 0.5]",
                    spam.bias
                )));
            }
            cfg = cfg.with_spam_bias(spam.bias);
        }
        if self.uses_walk() {
            cfg.source = GateSource::Walk {
                steps: self.steps(),
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_sections() {
        let cfg = RbSimConfig::parse(
            "n = 1\nlengths = [1, 2]\nnum_sequences = 3\n[noise]\nkind = \"depolarizing\"\nparam = 0.9\n[spam]\nbias = 0.1\n",
        )
        .unwrap();
        let rb = cfg.to_rb_config(5).unwrap();
        assert_eq!(rb.seed, 5);
        assert_eq!(rb.sequences, 3);
        assert!((rb.e_op[(0, 0)].re - 0.9).abs() < 1e-15);
    }

    #[test]
    fn dotted_keys_work_too() {
        let cfg =
            RbSimConfig::parse("n = 2\nlengths = [1]\nnum_sequences = 1\nnoise.kind = \"none\"\n")
                .unwrap();
        assert!(cfg.to_rb_config(0).is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_kinds() {
        assert!(RbSimConfig::parse(
            "n = 1\nlengths = [1]\nnum_sequences = 1\nfoo = 2\nnoise.kind = \"none\"\n"
        )
        .is_err());
        let cfg =
            RbSimConfig::parse("n = 1\nlengths = [1]\nnum_sequences = 1\nnoise.kind = \"pink\"\n")
                .unwrap();
        assert!(matches!(cfg.to_rb_config(0), Err(CliError::Usage(_))));
    }

    #[test]
    fn walk_source_from_three_qubits() {
        let cfg =
            RbSimConfig::parse("n = 3\nlengths = [1]\nnum_sequences = 1\nnoise.kind = \"none\"\n")
                .unwrap();
        let rb = cfg.to_rb_config(0).unwrap();
        assert_eq!(rb.source, GateSource::Walk { steps: 30 });
    }
}
