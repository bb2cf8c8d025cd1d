use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dispwave2d::operator::PotentialSpec;
use dispwave2d::{make_grid, Grid2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Regularity,
    Propagate,
    Decay,
    Strichartz,
    KernelIntegral,
    Semilinear,
    Selfcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Regularity,
        Experiment::Propagate,
        Experiment::Decay,
        Experiment::Strichartz,
        Experiment::KernelIntegral,
        Experiment::Semilinear,
        Experiment::Selfcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Regularity => "regularity",
            Experiment::Propagate => "propagate",
            Experiment::Decay => "decay",
            Experiment::Strichartz => "strichartz",
            Experiment::KernelIntegral => "kernel-integral",
            Experiment::Semilinear => "semilinear",
            Experiment::Selfcheck => "selfcheck",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Gaussian,
    Well,
    Ring,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub center: [f64; 2],
    /// Ring thickness; defaults to a quarter of the radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_sweep: Option<Vec<f64>>,
    /// CSV of `x,y,value` rows for `kind = "file"`, relative to the config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn default_radius() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(default = "default_nodes")]
    pub n_nodes: i64,
    #[serde(default = "default_refinement")]
    pub refinement: i64,
}

fn default_nodes() -> i64 {
    dispwave2d::evolution::DEFAULT_NODES as i64
}

fn default_refinement() -> i64 {
    dispwave2d::evolution::DEFAULT_REFINEMENT as i64
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { lambda_max: None, n_nodes: default_nodes(), refinement: default_refinement() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdtdSection {
    #[serde(default = "default_dt_factor")]
    pub dt_factor: f64,
    #[serde(rename = "T_final", default = "default_t_final")]
    pub t_final: f64,
}

fn default_dt_factor() -> f64 {
    0.5
}

fn default_t_final() -> f64 {
    2.0
}

impl Default for FdtdSection {
    fn default() -> Self {
        Self { dt_factor: default_dt_factor(), t_final: default_t_final() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub fdtd: FdtdSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// A rejected configuration, with the offending field and, when it can be
/// found, the line it sits on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}, field `{k}`: {}", self.message),
            (None, Some(k)) => write!(f, "field `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// 1-based line of `key` inside `[section]` (or at top level when `section`
/// is empty).
fn locate(raw: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') && t.ends_with(']') {
            current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn invalid(raw: &str, field: &str, message: impl Into<String>) -> ConfigError {
    let (section, key) = field.rsplit_once('.').unwrap_or(("", field));
    ConfigError { field: Some(field.to_string()), line: locate(raw, section, key), message: message.into() }
}

impl ExperimentConfig {
    pub fn parse(raw: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(raw).map_err(|e| {
            let line = e.span().map(|s| raw[..s.start.min(raw.len())].matches('\n').count() + 1);
            ConfigError { field: None, line, message: e.message().to_string() }
        })?;
        cfg.validate(raw)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|e| ConfigError {
            field: None,
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&raw)?, base))
    }

    fn validate(&self, raw: &str) -> Result<(), ConfigError> {
        let positive = |v: f64, field: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(raw, field, format!("must be positive and finite, got {v}")))
            }
        };
        positive(self.grid.half_width, "grid.half_width")?;
        if self.grid.n < 9 || self.grid.n % 2 == 0 {
            return Err(invalid(raw, "grid.n", format!("must be an odd integer of at least 9, got {}", self.grid.n)));
        }
        if self.grid.n > 201 {
            return Err(invalid(raw, "grid.n", format!("at most 201 nodes per side are supported, got {}", self.grid.n)));
        }
        if !self.potential.amplitude.is_finite() {
            return Err(invalid(raw, "potential.amplitude", "must be finite"));
        }
        positive(self.potential.radius, "potential.radius")?;
        if self.potential.center.iter().any(|c| !c.is_finite()) {
            return Err(invalid(raw, "potential.center", "must be finite"));
        }
        if let Some(w) = self.potential.width {
            positive(w, "potential.width")?;
        }
        if let Some(sweep) = &self.potential.coupling_sweep {
            if sweep.is_empty() || sweep.iter().any(|c| !c.is_finite()) {
                return Err(invalid(raw, "potential.coupling_sweep", "must be a non-empty list of finite numbers"));
            }
        }
        if self.potential.kind == PotentialKind::File && self.potential.path.is_none() {
            return Err(invalid(raw, "potential.kind", "kind = \"file\" needs potential.path"));
        }
        if let Some(l) = self.spectral.lambda_max {
            positive(l, "spectral.lambda_max")?;
        }
        if self.spectral.n_nodes < 64 {
            return Err(invalid(raw, "spectral.n_nodes", format!("must be at least 64, got {}", self.spectral.n_nodes)));
        }
        if !(0..=40).contains(&self.spectral.refinement) {
            return Err(invalid(
                raw,
                "spectral.refinement",
                format!("must lie in 0..=40, got {}", self.spectral.refinement),
            ));
        }
        positive(self.fdtd.dt_factor, "fdtd.dt_factor")?;
        if self.fdtd.dt_factor > 1.0 {
            return Err(invalid(raw, "fdtd.dt_factor", format!("must not exceed 1 (CFL), got {}", self.fdtd.dt_factor)));
        }
        positive(self.fdtd.t_final, "fdtd.T_final")?;
        Ok(())
    }

    pub fn grid(&self) -> Grid2D {
        make_grid(self.grid.half_width, self.grid.n as usize).expect("validated grid")
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.grid.half_width / self.grid.n as f64
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectral.lambda_max.unwrap_or(dispwave2d::evolution::LAMBDA_MAX_PER_INVERSE_CELL / self.cell_width())
    }

    /// Samples the configured potential, dropping nodes below `10⁻³·max|V|`.
    pub fn potential(&self, base: &Path) -> Result<PotentialSpec, ConfigError> {
        let grid = self.grid();
        let p = &self.potential;
        let values: Vec<f64> = match p.kind {
            PotentialKind::Gaussian => grid.sample(|x| {
                let d2 = (x[0] - p.center[0]).powi(2) + (x[1] - p.center[1]).powi(2);
                p.amplitude * (-d2 / (2.0 * p.radius * p.radius)).exp()
            }),
            PotentialKind::Well => grid.sample(|x| {
                let d = (x[0] - p.center[0]).hypot(x[1] - p.center[1]);
                if d <= p.radius {
                    p.amplitude
                } else {
                    0.0
                }
            }),
            PotentialKind::Ring => {
                let w = p.width.unwrap_or(0.25 * p.radius);
                grid.sample(|x| {
                    let d = (x[0] - p.center[0]).hypot(x[1] - p.center[1]);
                    p.amplitude * (-(d - p.radius).powi(2) / (2.0 * w * w)).exp()
                })
            }
            PotentialKind::File => read_potential_file(&base.join(p.path.as_ref().unwrap()), &grid)?,
        };
        let vmax = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep: Vec<usize> = (0..values.len()).filter(|&k| vmax > 0.0 && values[k].abs() >= 1e-3 * vmax).collect();
        let (g, v) = if keep.is_empty() {
            (grid.clone(), vec![0.0; grid.len()])
        } else {
            (grid.select(&keep), keep.iter().map(|&k| values[k]).collect())
        };
        PotentialSpec::new(g, v).map_err(|e| ConfigError {
            field: Some("potential".into()),
            line: None,
            message: e.to_string(),
        })
    }
}

/// Reads `x,y,value` rows (an optional header line is skipped) whose points
/// must be nodes of `grid`; absent nodes are zero.
fn read_potential_file(path: &Path, grid: &Grid2D) -> Result<Vec<f64>, ConfigError> {
    let err = |line: Option<usize>, message: String| ConfigError {
        field: Some("potential.path".into()),
        line,
        message: format!("{}: {message}", path.display()),
    };
    let raw = std::fs::read_to_string(path).map_err(|e| err(None, format!("cannot read: {e}")))?;
    let mut values = vec![0.0; grid.len()];
    let h = grid.cell_width();
    for (i, line) in raw.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = t.split(',').map(str::trim).collect();
        let nums: Option<Vec<f64>> = cols.iter().map(|c| c.parse::<f64>().ok()).collect();
        let nums = match nums {
            Some(n) if n.len() == 3 => n,
            _ if i == 0 => continue,
            _ => return Err(err(Some(i + 1), format!("expected three numbers, got `{t}`"))),
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(err(Some(i + 1), "non-finite entry".into()));
        }
        let k = grid.nearest([nums[0], nums[1]]);
        let node = grid.nodes()[k];
        if (node[0] - nums[0]).hypot(node[1] - nums[1]) > 1e-6 * h {
            return Err(err(Some(i + 1), format!("({}, {}) is not a grid node", nums[0], nums[1])));
        }
        values[k] = nums[2];
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
seed = 3

[potential]
kind = "gaussian"
amplitude = 5.0
radius = 0.3

[grid]
half_width = 2.1
n = 21
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.spectral, SpectralConfig::default());
        assert_eq!(cfg.fdtd, FdtdSection::default());
        assert!((cfg.cell_width() - 0.2).abs() < 1e-15);
        assert!((cfg.lambda_max() - 12.5).abs() < 1e-12);
    }

    #[test]
    fn negative_n_names_line_and_field() {
        let raw = GOOD.replace("n = 21", "n = -5");
        let e = ExperimentConfig::parse(&raw).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("grid.n"));
        assert_eq!(e.line, Some(11));
    }

    #[test]
    fn type_errors_carry_a_line() {
        let raw = GOOD.replace("radius = 0.3", "radius = \"wide\"");
        let e = ExperimentConfig::parse(&raw).unwrap_err();
        assert_eq!(e.line, Some(7));
        let raw = GOOD.replace("seed = 3", "seed = 3\ncolour = 1");
        assert!(ExperimentConfig::parse(&raw).unwrap_err().message.contains("colour"));
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::parse(e.name()), Some(e));
        }
        assert_eq!(Experiment::parse("nope"), None);
    }

    #[test]
    fn potential_kinds_sample() {
        let mut cfg = ExperimentConfig::parse(GOOD).unwrap();
        let base = Path::new(".");
        let g = cfg.potential(base).unwrap();
        assert!(g.values().iter().all(|&v| v > 0.0));
        cfg.potential.kind = PotentialKind::Well;
        cfg.potential.amplitude = -2.0;
        assert!(cfg.potential(base).unwrap().values().iter().all(|&v| v == -2.0));
        cfg.potential.kind = PotentialKind::Ring;
        cfg.potential.radius = 1.0;
        assert!(!cfg.potential(base).unwrap().grid().is_empty());
    }
}
