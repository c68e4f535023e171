use std::path::{Path, PathBuf};

use accelsched::milp::{CommandBackend, HighsBackend, SolverBackend, DEFAULT_TIMEOUT_S};
use accelsched::model::{builtin_instance, parse_factor, scale_wcets, Factor, BUILTIN_NAMES};
use accelsched::random::{random_instance, RandomSpec};
use accelsched::{AccelPolicy, ObjectiveKind, ProblemInstance};
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Md,
}

/// Keys accepted in the TOML config file. Command-line flags win.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub policy: Option<AccelPolicy>,
    pub objective: Option<ObjectiveKind>,
    pub scale: Option<ScaleValue>,
    pub timeout: Option<f64>,
    pub backend: Option<String>,
    pub emit_lp: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<u32>,
}

/// `scale = 0.8` and `scale = "4/5"` are both accepted.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScaleValue {
    Text(String),
    Number(f64),
}

impl ScaleValue {
    fn text(&self) -> String {
        match self {
            ScaleValue::Text(s) => s.clone(),
            ScaleValue::Number(v) => v.to_string(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonOpts {
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Accelerator policy: rr, npfp or nocontention.
    #[arg(long, global = true)]
    pub policy: Option<AccelPolicy>,
    /// minmax-lat, minsum-lat, minmax-rt or minsum-rt.
    #[arg(long, global = true)]
    pub objective: Option<ObjectiveKind>,
    /// WCET scaling factor, e.g. 0.8 or 4/5.
    #[arg(long, global = true)]
    pub scale: Option<String>,
    /// Solver time limit in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
    /// Solver backend: highs or command.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Write the optimization model in LP format to this path.
    #[arg(long, global = true)]
    pub emit_lp: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Solver threads (HiGHS backend).
    #[arg(long, global = true)]
    pub threads: Option<u32>,
    /// Also write every table and the JSON report into this directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Everything one command run needs, after merging flags over the config
/// file over the defaults.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub instance: String,
    pub policy: AccelPolicy,
    /// Whether the policy was chosen explicitly.
    pub policy_given: bool,
    pub objective: ObjectiveKind,
    pub objective_given: bool,
    pub scale: Factor,
    pub scale_text: String,
    pub timeout: f64,
    pub backend: String,
    pub emit_lp: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub threads: Option<u32>,
    pub out: Option<PathBuf>,
}

impl RunManifest {
    pub fn resolve(instance: &str, opts: &CommonOpts) -> Result<Self> {
        let cfg = match &opts.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let policy = opts.policy.or(cfg.policy);
        let objective = opts.objective.or(cfg.objective);
        let scale_text = opts
            .scale
            .clone()
            .or_else(|| cfg.scale.as_ref().map(ScaleValue::text))
            .unwrap_or_else(|| "1".into());
        let scale = parse_factor(&scale_text)?;
        let timeout = opts.timeout.or(cfg.timeout).unwrap_or(DEFAULT_TIMEOUT_S);
        if !(timeout > 0.0 && timeout.is_finite()) {
            bail!("timeout must be positive, got {timeout}");
        }
        Ok(RunManifest {
            instance: instance.to_string(),
            policy: policy.unwrap_or(AccelPolicy::NonPreemptiveFp),
            policy_given: policy.is_some(),
            objective: objective.unwrap_or(ObjectiveKind::MinMaxLat),
            objective_given: objective.is_some(),
            scale,
            scale_text,
            timeout,
            backend: opts.backend.clone().or(cfg.backend).unwrap_or_else(|| "highs".into()),
            emit_lp: opts.emit_lp.clone().or(cfg.emit_lp),
            format: opts.format.or(cfg.format).unwrap_or(Format::Md),
            seed: opts.seed.or(cfg.seed).unwrap_or(0),
            threads: opts.threads.or(cfg.threads),
            out: opts.out.clone(),
        })
    }

    /// Loads (without validating) and scales the instance.
    pub fn load_unchecked(&self) -> Result<ProblemInstance> {
        let inst = load_instance_text(&self.instance)?;
        if self.scale == Factor::from_integer(1) {
            return Ok(inst);
        }
        Ok(scale_wcets(&inst, self.scale)?)
    }

    /// Loads, scales and validates the instance.
    pub fn load(&self) -> Result<ProblemInstance> {
        let inst = self.load_unchecked()?;
        inst.check()?;
        Ok(inst)
    }

    pub fn backend(&self) -> Result<Box<dyn SolverBackend>> {
        Ok(match self.backend.as_str() {
            "highs" => Box::new(HighsBackend { threads: self.threads }),
            "command" => Box::new(CommandBackend::from_env()?),
            other => bail!("unknown backend {other:?} (expected highs or command)"),
        })
    }
}

/// `builtin:<name>`, `random:<seed>` or a path to an instance document.
fn load_instance_text(spec: &str) -> Result<ProblemInstance> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin_instance(name).with_context(|| {
            format!("unknown builtin instance {name:?} (available: {})", BUILTIN_NAMES.join(", "))
        });
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed.parse().with_context(|| format!("bad random seed {seed:?}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(random_instance(&mut rng, &RandomSpec::default()));
    }
    let text = std::fs::read_to_string(spec).with_context(|| format!("reading instance {spec}"))?;
    Ok(ProblemInstance::from_json(&text)?)
}
