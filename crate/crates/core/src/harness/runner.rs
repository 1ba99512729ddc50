//! Direct Monte Carlo over independent shots.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorcode::build_hex_color_code;
use crate::decoders::DecoderKind;
use crate::error::{Error, Result};
use crate::extraction::{GeometricSampler, NoiseModel};
use crate::harness::shot::ShotRunner;
use crate::harness::stats::{ExperimentStats, Tally};
use crate::recovery::{build_table, SyndromeTable};
use crate::stabilizer::StabilizerCode;

/// Shots are processed in fixed-size waves so that early stopping does not
/// depend on scheduling.
pub const WAVE: u64 = 4096;

pub const SUPPORTED_DISTANCES: [usize; 4] = [3, 5, 7, 9];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Noise mechanism switches; all on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mechanisms {
    pub cat_prep: bool,
    pub two_qubit: bool,
    pub one_qubit: bool,
    pub measurement: bool,
}

impl Default for Mechanisms {
    fn default() -> Self {
        Self {
            cat_prep: true,
            two_qubit: true,
            one_qubit: true,
            measurement: true,
        }
    }
}

fn default_decoder() -> DecoderKind {
    DecoderKind::Strong
}

fn default_shots() -> u64 {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    #[serde(default)]
    pub css_two_stage: bool,
    pub p_values: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    /// Stop a point early once this many logical errors were seen.
    #[serde(default)]
    pub stop_after_errors: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Lookup-table weight cutoff; defaults to `t + 1`.
    #[serde(default)]
    pub table_weight: Option<usize>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub noise: Mechanisms,
}

impl ExperimentConfig {
    pub fn new(d: usize, decoder: DecoderKind, p_values: Vec<f64>, shots: u64, seed: u64) -> Self {
        Self {
            d,
            decoder,
            css_two_stage: false,
            p_values,
            shots,
            stop_after_errors: None,
            seed,
            output: None,
            format: OutputFormat::Csv,
            table_weight: None,
            cache_dir: None,
            noise: Mechanisms::default(),
        }
    }

    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_DISTANCES.contains(&self.d) {
            return Err(Error::InvalidConfig(format!("distance {} not in {SUPPORTED_DISTANCES:?}", self.d)));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if let Some(p) = self.p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidConfig(format!("error rate {p} outside [0, 1]")));
        }
        if self.css_two_stage && self.decoder == DecoderKind::Shor {
            return Err(Error::InvalidConfig("the two-stage refinement needs the strong or weak decoder".into()));
        }
        Ok(())
    }

    pub fn noise(&self, p: f64) -> NoiseModel {
        NoiseModel {
            p,
            cat_prep: self.noise.cat_prep,
            two_qubit: self.noise.two_qubit,
            one_qubit: self.noise.one_qubit,
            measurement: self.noise.measurement,
        }
    }

    /// Decoder label used in outputs.
    pub fn decoder_label(&self) -> String {
        if self.css_two_stage {
            format!("{}-two-stage", self.decoder)
        } else {
            self.decoder.to_string()
        }
    }
}

/// A validated configuration with its code and lookup table.
pub struct Experiment {
    config: ExperimentConfig,
    code: StabilizerCode,
    table: SyndromeTable,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let code = build_hex_color_code(config.d)?;
        let weight = config.table_weight.unwrap_or(config.t() + 1);
        let table = match &config.cache_dir {
            Some(dir) => SyndromeTable::load_or_build(&code, weight, dir)?,
            None => build_table(&code, weight)?,
        };
        Ok(Self { config, code, table })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn table(&self) -> &SyndromeTable {
        &self.table
    }

    pub fn runner(&self) -> Result<ShotRunner<'_>> {
        ShotRunner::new(
            &self.code,
            &self.table,
            self.config.decoder,
            self.config.t(),
            self.config.css_two_stage,
        )
    }

    /// Runs `shots` (or until the error quota) at rate `p`.
    pub fn run_point(&self, p: f64) -> Result<ExperimentStats> {
        let noise = self.config.noise(p);
        noise.validate()?;
        let runner = self.runner()?;
        let seed = self.config.seed;
        let mut tally = Tally::default();
        let mut next = 0u64;
        while next < self.config.shots {
            let end = (next + WAVE).min(self.config.shots);
            let wave = (next..end)
                .into_par_iter()
                .map(|shot| {
                    let mut rng = shot_rng(seed, shot);
                    let mut source = GeometricSampler::new(noise, &mut rng);
                    runner.run(&mut source, None)
                })
                .try_fold(Tally::default, |mut acc, r| {
                    acc.record(&r?);
                    Ok::<_, Error>(acc)
                })
                .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
            tally = tally.merge(wave);
            next = end;
            if self.config.stop_after_errors.is_some_and(|n| tally.logical_errors >= n) {
                break;
            }
        }
        Ok(ExperimentStats::from_tally(self.config.d, &self.config.decoder_label(), p, &tally))
    }

    pub fn run_all(&self) -> Result<Vec<ExperimentStats>> {
        self.config.p_values.iter().map(|&p| self.run_point(p)).collect()
    }
}

/// RNG of one shot: the global seed picks the key, the shot index the stream.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// One-off convenience wrapper building the experiment for a single point.
pub fn run_point(config: &ExperimentConfig, p: f64) -> Result<ExperimentStats> {
    Experiment::new(config.clone())?.run_point(p)
}
