//! `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored.
//! Unknown keys, repeated keys and parameters that do not belong to the
//! selected field kind are errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::{FieldSource, MmsReference, SolverConfig};
use crate::weights::WeightSpec;

const SCALAR_KEYS: &[&str] = &[
    "lx",
    "m",
    "nx",
    "ny",
    "alpha",
    "nu",
    "dt",
    "t_end",
    "scheme",
    "gamma",
    "epsilon",
    "rho",
    "output.dir",
    "output.every",
    "seed",
    "dealias",
    "nonlinear",
];
const FIELD_PARAMS: &[&str] = &["kind", "amplitude", "k1", "k2", "reference", "path"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub gamma: f64,
    pub epsilon: f64,
    /// `f64::INFINITY` selects the limit weight.
    pub rho: f64,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            gamma: 2.0 / 3.0,
            epsilon: 0.1,
            rho: 10.0,
            output_dir: None,
            seed: 0,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

fn parse_num<T: std::str::FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value
        .parse()
        .map_err(|_| Error::Config(format!("line {}: cannot parse {key} = '{}'", e.line, e.value)))
}

fn parse_bool(key: &str, e: &Entry) -> Result<bool> {
    match e.value.as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("line {}: {key} must be true or false", e.line))),
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse_with_base(&text, &base)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_base(text, Path::new(""))
    }

    /// Relative file paths in the config are resolved against `base`.
    pub fn parse_with_base(text: &str, base: &Path) -> Result<Self> {
        let mut map: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected 'key = value', got '{content}'")))?;
            let key = k.trim().to_string();
            let known = SCALAR_KEYS.contains(&key.as_str())
                || ["forcing.", "ic."].iter().any(|p| {
                    key.strip_prefix(p).is_some_and(|rest| FIELD_PARAMS.contains(&rest))
                });
            if !known {
                return Err(Error::Config(format!("line {line}: unknown key '{key}'")));
            }
            let entry = Entry {
                value: v.trim().to_string(),
                line,
            };
            if let Some(prev) = map.insert(key.clone(), entry) {
                return Err(Error::Config(format!(
                    "line {line}: key '{key}' repeats the one on line {}",
                    prev.line
                )));
            }
        }

        let mut cfg = RunConfig::default();
        let s = &mut cfg.solver;
        for (key, e) in &map {
            match key.as_str() {
                "lx" => s.lx = parse_num(key, e)?,
                "m" => s.m = parse_num(key, e)?,
                "nx" => s.nx = parse_num(key, e)?,
                "ny" => s.ny = parse_num(key, e)?,
                "alpha" => s.alpha = parse_num(key, e)?,
                "nu" => s.nu = parse_num(key, e)?,
                "dt" => s.dt = parse_num(key, e)?,
                "t_end" => s.t_end = parse_num(key, e)?,
                "scheme" => s.scheme = e.value.parse()?,
                "output.every" => s.output_every = parse_num(key, e)?,
                "dealias" => s.dealias = parse_bool(key, e)?,
                "nonlinear" => s.nonlinear = parse_bool(key, e)?,
                "gamma" => cfg.gamma = parse_num(key, e)?,
                "epsilon" => cfg.epsilon = parse_num(key, e)?,
                "rho" => cfg.rho = parse_num(key, e)?,
                "seed" => cfg.seed = parse_num(key, e)?,
                "output.dir" => cfg.output_dir = Some(base.join(&e.value)),
                _ => {}
            }
        }
        let m = cfg.solver.m;
        cfg.solver.forcing = field_source(&map, "forcing", base, m)?.unwrap_or(FieldSource::Zero);
        if let Some(ic) = field_source(&map, "ic", base, m)? {
            cfg.solver.ic = ic;
        }
        cfg.solver.validate()?;
        if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", cfg.epsilon)));
        }
        if cfg.rho.is_nan() || cfg.rho < 1.0 {
            return Err(Error::Config(format!("rho must be >= 1 or inf, got {}", cfg.rho)));
        }
        if !(cfg.gamma.is_finite() && cfg.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma must be >= 0, got {}", cfg.gamma)));
        }
        Ok(cfg)
    }

    /// Weight parameters; `γ > 2/3` needs `allow_large_gamma`.
    pub fn weight_spec(&self, allow_large_gamma: bool) -> Result<WeightSpec> {
        WeightSpec::new(self.epsilon, self.rho, self.gamma, allow_large_gamma)
            .map_err(|e| Error::Config(e.to_string()))
    }
}

fn field_source(map: &BTreeMap<String, Entry>, prefix: &str, base: &Path, m: f64) -> Result<Option<FieldSource>> {
    let get = |p: &str| map.get(&format!("{prefix}.{p}"));
    let Some(kind) = get("kind") else {
        if let Some(p) = FIELD_PARAMS.iter().find(|p| get(p).is_some()) {
            return Err(Error::Config(format!("{prefix}.{p} given without {prefix}.kind")));
        }
        return Ok(None);
    };
    let allowed: &[&str] = match kind.value.as_str() {
        "zero" => &[],
        "trig_clamped" => &["amplitude", "k1", "k2"],
        "mms" => &["reference"],
        "file" => &["path"],
        other => {
            return Err(Error::Config(format!(
                "line {}: unknown {prefix}.kind '{other}' (expected zero, trig_clamped, mms or file)",
                kind.line
            )))
        }
    };
    for p in FIELD_PARAMS.iter().filter(|p| **p != "kind") {
        if let Some(e) = get(p) {
            if !allowed.contains(p) {
                return Err(Error::Config(format!(
                    "line {}: {prefix}.{p} does not apply to kind {}",
                    e.line, kind.value
                )));
            }
        }
    }
    let num = |p: &str, default: f64| -> Result<f64> {
        get(p).map_or(Ok(default), |e| parse_num(&format!("{prefix}.{p}"), e))
    };
    let int = |p: &str, default: u32| -> Result<u32> {
        get(p).map_or(Ok(default), |e| parse_num(&format!("{prefix}.{p}"), e))
    };
    Ok(Some(match kind.value.as_str() {
        "zero" => FieldSource::Zero,
        "trig_clamped" => FieldSource::trig_clamped(num("amplitude", 1.0)?, int("k1", 1)?, int("k2", 1)?),
        "mms" => {
            let id = get("reference").map_or("steady", |e| e.value.as_str());
            FieldSource::Mms(MmsReference::by_id(id, m)?)
        }
        _ => {
            let e = get("path").ok_or_else(|| Error::Config(format!("{prefix}.kind = file needs {prefix}.path")))?;
            FieldSource::File(base.join(&e.value))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Scheme;

    const SAMPLE: &str = "\
# decaying run
lx = 6.283185307179586
m = 1
nx = 32
ny = 33
alpha = 0.5   # filter width
nu = 0.01
dt = 1e-3
t_end = 0.5
scheme = imex_cnab2
gamma = 0.5
epsilon = 0.1
rho = inf
ic.kind = trig_clamped
ic.amplitude = 2
ic.k1 = 1
ic.k2 = 2
output.every = 10
output.dir = out
seed = 42
";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.solver.nx, 32);
        assert_eq!(c.solver.scheme, Scheme::ImexCnab2);
        assert_eq!(c.solver.ic, FieldSource::trig_clamped(2.0, 1, 2));
        assert_eq!(c.solver.forcing, FieldSource::Zero);
        assert!(c.rho.is_infinite());
        assert_eq!(c.seed, 42);
        assert_eq!(c.output_dir, Some(PathBuf::from("out")));
        assert!(c.weight_spec(false).unwrap().is_limit());
    }

    #[test]
    fn rejects_unknown_and_misplaced_keys() {
        let e = RunConfig::parse("nx = 32\nnuu = 0.1\n").unwrap_err().to_string();
        assert!(e.contains("unknown key 'nuu'") && e.contains("line 2"), "{e}");
        assert!(RunConfig::parse("ic.kind = zero\nic.k1 = 2\n").is_err());
        assert!(RunConfig::parse("ic.k1 = 2\n").is_err());
        assert!(RunConfig::parse("nx = 32\nnx = 64\n").is_err());
        assert!(RunConfig::parse("scheme = rk4\n").is_err());
        assert!(RunConfig::parse("forcing.kind = file\n").is_err());
        assert!(RunConfig::parse("just words\n").is_err());
    }

    #[test]
    fn positivity_is_enforced() {
        let e = RunConfig::parse("nu = 0\n").unwrap_err().to_string();
        assert!(e.contains("nu must be positive"), "{e}");
        assert!(RunConfig::parse("dt = -1\n").is_err());
        assert!(RunConfig::parse("epsilon = 0\n").is_err());
        assert!(RunConfig::parse("rho = 0.5\n").is_err());
    }

    #[test]
    fn large_gamma_needs_override() {
        let c = RunConfig::parse("gamma = 1.0\n").unwrap();
        assert!(c.weight_spec(false).is_err());
        assert!(c.weight_spec(true).is_ok());
    }

    #[test]
    fn mms_and_file_sources() {
        let c = RunConfig::parse_with_base(
            "forcing.kind = mms\nforcing.reference = unsteady\nic.kind = file\nic.path = v0.bin\n",
            Path::new("/data"),
        )
        .unwrap();
        assert!(matches!(c.solver.forcing, FieldSource::Mms(ref r) if r.id() == "unsteady"));
        assert_eq!(c.solver.ic, FieldSource::File(PathBuf::from("/data/v0.bin")));
    }
}
