//! Run configuration: JSON schema, `--set` overrides and the config hash.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use driven_oscillator::oracle::Grid;
use driven_oscillator::{OscillatorParams, Pulse, Truncation};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Units {
    /// ħ = m = ω = 1.
    Natural,
    Explicit {
        mass: f64,
        omega: f64,
        hbar: f64,
    },
}

/// A [`Pulse`] as written in a config file; sampled pulses may also come
/// from a two-column CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseSpec {
    Zero,
    Rectangular {
        amplitude: f64,
        t_on: f64,
        t_off: f64,
    },
    GaussianBurst {
        amplitude: f64,
        center: f64,
        width: f64,
        #[serde(default)]
        carrier_frequency: f64,
        #[serde(default)]
        carrier_phase: f64,
    },
    SinusoidalBurst {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
        t_on: f64,
        t_off: f64,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
    /// Relative paths resolve against the config file's directory.
    SampledCsv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative accuracy of the F, G, H integration.
    pub integrals: f64,
    /// Absolute accuracy requested from the overlap cubature.
    pub quadrature: f64,
    pub ode_residual: f64,
    pub tdse_residual: f64,
    pub unitarity: f64,
    pub oracle_equivalence: f64,
    pub ehrenfest: f64,
    pub moments: f64,
    pub width: f64,
    pub poisson: f64,
    pub norm_drift: f64,
    pub convergence_ratio: [f64; 2],
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrals: 1e-12,
            quadrature: 1e-10,
            ode_residual: 1e-6,
            tdse_residual: 1e-4,
            unitarity: 1e-8,
            oracle_equivalence: 1e-6,
            ehrenfest: 1e-5,
            moments: 1e-6,
            width: 1e-6,
            poisson: 1e-5,
            norm_drift: 1e-10,
            convergence_ratio: [3.5, 4.5],
        }
    }
}

/// Unset fields fall back to `[−12/α, 12/α]`, 2048 points and 2000 steps
/// per period.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputOptions {
    pub dir: PathBuf,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegralsOptions {
    /// Rows over `[0, end of pulse + one period]`.
    pub samples: usize,
}

impl Default for IntegralsOptions {
    fn default() -> Self {
        Self { samples: 1001 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionsOptions {
    /// Highest level in the table.
    pub order: usize,
    /// Evaluation time; defaults to the end of the pulse.
    pub time: Option<f64>,
}

impl Default for TransitionsOptions {
    fn default() -> Self {
        Self {
            order: 60,
            time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Off,
    /// One Crank–Nicolson run on the configured grid.
    Raw,
    /// Richardson combination of the configured and the refined grid.
    Extrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveOptions {
    pub samples: usize,
    pub oracle: OracleMode,
    /// Packet snapshot times; defaults to the end of the run.
    pub snapshots: Option<Vec<f64>>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            samples: 201,
            oracle: OracleMode::Extrapolated,
            snapshots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateOptions {
    /// Observation times for the trajectory checks.
    pub samples: usize,
    /// Largest level in the oracle-equivalence check (at most 8).
    pub quadrature_order: usize,
    pub unitarity_order: usize,
    pub unitarity_columns: usize,
    pub poisson_order: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            quadrature_order: 5,
            unitarity_order: 60,
            unitarity_columns: 10,
            poisson_order: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub units: Units,
    pub pulse: PulseSpec,
    /// Basis truncation `N_max`.
    pub truncation: usize,
    pub tolerances: Tolerances,
    pub grid: GridOverrides,
    pub output: OutputOptions,
    pub integrals: IntegralsOptions,
    pub transitions: TransitionsOptions,
    pub evolve: EvolveOptions,
    pub validate: ValidateOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            units: Units::Natural,
            pulse: PulseSpec::GaussianBurst {
                amplitude: 0.8,
                center: 5.0,
                width: 0.6,
                carrier_frequency: 1.3,
                carrier_phase: 0.4,
            },
            truncation: driven_oscillator::oscillator::DEFAULT_N_MAX,
            tolerances: Tolerances::default(),
            grid: GridOverrides::default(),
            output: OutputOptions::default(),
            integrals: IntegralsOptions::default(),
            transitions: TransitionsOptions::default(),
            evolve: EvolveOptions::default(),
            validate: ValidateOptions::default(),
        }
    }
}

/// A validated config with its physics objects built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub params: OscillatorParams,
    pub pulse: Pulse,
    pub truncation: Truncation,
    pub grid: Grid,
    /// SHA-256 of the canonical config (output directory excluded) and of
    /// any pulse file it reads.
    pub hash: String,
}

impl RunConfig {
    /// Reads `path` (or starts from the defaults), applies `key=value`
    /// overrides and rejects unknown keys.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<(Self, PathBuf)> {
        let (mut value, base) = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("cannot read config {}", p.display()))?;
                let v: Value = serde_json::from_str(&text)
                    .with_context(|| format!("{} is not valid JSON", p.display()))?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (v, base)
            }
            None => (serde_json::to_value(RunConfig::default())?, PathBuf::new()),
        };
        for item in overrides {
            apply_override(&mut value, item)?;
        }
        let config: RunConfig = serde_json::from_value(value).context("invalid config")?;
        Ok((config, base))
    }

    pub fn params(&self) -> Result<OscillatorParams> {
        Ok(match self.units {
            Units::Natural => OscillatorParams::natural(),
            Units::Explicit { mass, omega, hbar } => {
                OscillatorParams::new(mass, omega, hbar).context("units")?
            }
        })
    }

    /// Builds and validates everything; `base` anchors relative pulse paths.
    pub fn resolve(self, base: &Path) -> Result<Resolved> {
        let params = self.params()?;
        let (pulse, pulse_bytes) = self.pulse.build(base)?;
        let truncation = Truncation::new(self.truncation);
        let defaults = Grid::default_for(&params);
        let g = &self.grid;
        let grid = Grid::new(
            g.x_min.unwrap_or(defaults.x_min()),
            g.x_max.unwrap_or(defaults.x_max()),
            g.n_points.unwrap_or(defaults.n_points()),
            g.dt.unwrap_or(defaults.dt()),
        )
        .context("grid")?;
        if self.transitions.order > truncation.n_max {
            bail!(
                "transitions.order {} exceeds truncation {}",
                self.transitions.order,
                truncation.n_max
            );
        }
        let t = &self.tolerances;
        if !(t.convergence_ratio[0] < t.convergence_ratio[1]) {
            bail!("tolerances.convergence_ratio must be an increasing pair");
        }
        let hash = self.hash(pulse_bytes.as_deref())?;
        Ok(Resolved {
            config: self,
            params,
            pulse,
            truncation,
            grid,
            hash,
        })
    }

    /// The config without its output directory, as hashed and written to
    /// `config.json`.
    pub fn canonical(&self) -> Result<Value> {
        let mut value = serde_json::to_value(self)?;
        if let Value::Object(map) = &mut value {
            map.remove("output");
        }
        Ok(value)
    }

    fn hash(&self, pulse_bytes: Option<&[u8]>) -> Result<String> {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.canonical()?)?);
        if let Some(bytes) = pulse_bytes {
            h.update(bytes);
        }
        Ok(format!("{:x}", h.finalize()))
    }
}

impl PulseSpec {
    /// The pulse, plus the raw file contents when it was read from disk.
    pub fn build(&self, base: &Path) -> Result<(Pulse, Option<Vec<u8>>)> {
        let pulse = match self {
            PulseSpec::Zero => Pulse::Zero,
            &PulseSpec::Rectangular {
                amplitude,
                t_on,
                t_off,
            } => Pulse::rectangular(amplitude, t_on, t_off)?,
            &PulseSpec::GaussianBurst {
                amplitude,
                center,
                width,
                carrier_frequency,
                carrier_phase,
            } => Pulse::gaussian_burst(amplitude, center, width, carrier_frequency, carrier_phase)?,
            &PulseSpec::SinusoidalBurst {
                amplitude,
                frequency,
                phase,
                t_on,
                t_off,
            } => Pulse::sinusoidal_burst(amplitude, frequency, phase, t_on, t_off)?,
            PulseSpec::Sampled { times, values } => Pulse::sampled(times.clone(), values.clone())?,
            PulseSpec::SampledCsv { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let bytes = fs::read(&full)
                    .with_context(|| format!("cannot read pulse file {}", full.display()))?;
                let (times, values) = parse_samples(&bytes)
                    .with_context(|| format!("pulse file {}", full.display()))?;
                return Ok((Pulse::sampled(times, values)?, Some(bytes)));
            }
        };
        Ok((pulse, None))
    }
}

/// Two-column `time,force` CSV; a non-numeric first row is a header.
pub fn parse_samples(bytes: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            bail!(
                "line {}: expected 2 columns (time, force), found {}",
                i + 1,
                record.len()
            );
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(t), Ok(v)) => {
                times.push(t);
                values.push(v);
            }
            _ if i == 0 => continue,
            _ => bail!(
                "line {}: cannot parse {:?}",
                i + 1,
                record.iter().collect::<Vec<_>>()
            ),
        }
    }
    Ok((times, values))
}

/// `a.b.c=value`; the value is parsed as JSON and kept as a string
/// otherwise.
pub fn apply_override(root: &mut Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| anyhow!("override {item:?} is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("override {item:?} has an empty key");
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = match node {
            Value::Object(map) => map,
            _ => bail!(
                "override {key:?}: {:?} is not an object",
                parts[..i].join(".")
            ),
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(serde_json::from_value::<RunConfig>(v).unwrap(), c);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        apply_override(&mut v, "grid.n_points=256").unwrap();
        apply_override(
            &mut v,
            "units={\"kind\":\"explicit\",\"mass\":2,\"omega\":1,\"hbar\":1}",
        )
        .unwrap();
        let c: RunConfig = serde_json::from_value(v).unwrap();
        assert_eq!(c.grid.n_points, Some(256));
        assert_eq!(c.params().unwrap().mass(), 2.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        apply_override(&mut v, "grid.spacing=0.1").unwrap();
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        assert!(apply_override(&mut v, "no_equals_sign").is_err());
    }

    #[test]
    fn sample_files_with_and_without_header() {
        let (t, v) = parse_samples(b"time,force\n0,0\n1,2.5\n2,0\n").unwrap();
        assert_eq!(t, vec![0.0, 1.0, 2.0]);
        assert_eq!(v, vec![0.0, 2.5, 0.0]);
        let (t, _) = parse_samples(b"0, 0\n1, 1\n").unwrap();
        assert_eq!(t.len(), 2);
        assert!(parse_samples(b"0,0\nx,1\n").is_err());
        assert!(parse_samples(b"0,0,0\n").is_err());
    }

    #[test]
    fn hash_ignores_the_output_directory() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(None).unwrap(), b.hash(None).unwrap());
        b.truncation = 100;
        assert_ne!(a.hash(None).unwrap(), b.hash(None).unwrap());
    }
}
