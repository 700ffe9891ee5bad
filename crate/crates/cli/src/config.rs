//! Run and sweep configuration files.
//!
//! A config is a TOML table. Without a `[sweep]` table it describes one
//! run; with one it describes a grid of runs. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `scheme` | `full-replication`, `uncoded-sharding`, `polyshard`, `iterative-polyshard` | required for runs |
//! | `K` | shards | required for runs |
//! | `N` | nodes | `ratio * K` |
//! | `ratio` | `N / K` when `N` is absent | 3 |
//! | `mu` | corrupted fraction, decimal or `"a/b"`, parsed exactly | 0 |
//! | `field` | `{ kind = "prime", p = ... }` | `p = 2^61 - 1` |
//! | `M` | accounts per shard | 200 |
//! | `t` | epochs | 200 |
//! | `seed` | workload seed | 0 |
//! | `invalid_rate` | probability a proposal overspends | 0 |
//! | `initial_balance` | minted per account | 1000 |
//! | `circuit` | circuit file, relative to the config | balance check |
//! | `accept` | `non-negative`, `all-zero`, `always` | `non-negative` |
//! | `[adversary]` | `strategy`, `shard`, `seed` | `random-values`, 0, `seed + 1` |
//! | `[sweep]` | `schemes`, `K`, `mu`, `seeds` | three baseline schemes, -, `[0]`, 1 |

use std::path::{Path, PathBuf};

use num_rational::Ratio;
use polyshard::adversary::{AdversarySpec, Strategy};
use polyshard::circuit::{ArithmeticCircuit, CircuitError};
use polyshard::field::FieldSpec;
use polyshard::ledger::{AcceptRule, VerificationFn};
use polyshard::schemes::{capacity, Mu, SchemeKind};
use polyshard::sim::RunConfig;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read circuit file {path}: {source}")]
    CircuitFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid circuit file {path}: {source}")]
    Circuit {
        path: PathBuf,
        #[source]
        source: CircuitError,
    },
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("`{key}`: {constraint}")]
    Constraint {
        key: &'static str,
        constraint: String,
    },
}

fn constraint(key: &'static str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        key,
        constraint: constraint.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scheme: Option<String>,
    #[serde(rename = "K")]
    shards: Option<usize>,
    #[serde(rename = "N")]
    nodes: Option<usize>,
    ratio: Option<usize>,
    mu: Option<toml::Value>,
    field: Option<FieldSpec>,
    #[serde(rename = "M")]
    accounts: Option<usize>,
    #[serde(rename = "t")]
    epochs: Option<usize>,
    seed: Option<u64>,
    invalid_rate: Option<f64>,
    initial_balance: Option<u64>,
    circuit: Option<PathBuf>,
    accept: Option<AcceptRule>,
    adversary: Option<RawAdversary>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdversary {
    strategy: Option<String>,
    shard: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    schemes: Option<Vec<String>>,
    #[serde(rename = "K")]
    shards: Option<Vec<usize>>,
    mu: Option<Vec<toml::Value>>,
    seeds: Option<usize>,
}

/// A parameter grid. Each cell is one `(scheme, K, mu, seed)` combination
/// at `N = ratio * K`; the remaining settings come from `template`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub schemes: Vec<SchemeKind>,
    pub shards: Vec<usize>,
    pub ratio: usize,
    pub mus: Vec<Mu>,
    pub seeds: usize,
    pub template: RunConfig,
    /// Strategy and seed offset applied to every cell's adversary.
    pub strategy: Strategy,
    pub adversary_seed: Option<u64>,
}

/// One generated run, or the reason it was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub run_id: String,
    pub config: Result<RunConfig, String>,
}

pub fn run_id(scheme: SchemeKind, nodes: usize, shards: usize, mu: Mu, seed: u64) -> String {
    format!(
        "{}-N{}-K{}-mu{}_{}-s{}",
        scheme.name(),
        nodes,
        shards,
        mu.numer(),
        mu.denom(),
        seed
    )
}

impl SweepSpec {
    /// Cells in scheme, K, mu, seed order.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &scheme in &self.schemes {
            for &shards in &self.shards {
                for &mu in &self.mus {
                    for s in 0..self.seeds as u64 {
                        let seed = self.template.seed + s;
                        let nodes = self.ratio * shards;
                        let mut c = self.template.clone();
                        c.scheme = scheme;
                        c.nodes = nodes;
                        c.shards = shards;
                        c.seed = seed;
                        let adv_seed = self.adversary_seed.map_or(seed.wrapping_add(1), |a| a + s);
                        let config = AdversarySpec::new(mu, self.strategy, adv_seed)
                            .map_err(|e| e.to_string())
                            .and_then(|adv| {
                                c.adversary = adv;
                                check_capacity(&c).map_err(|e| e.to_string())?;
                                Ok(c)
                            });
                        out.push(SweepCell {
                            run_id: run_id(scheme, nodes, shards, mu, seed),
                            config,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// K = 5, 10, ..., 50 at N = 3K with 2000 accounts and 1000 epochs.
    Paper,
    /// K = 5, 10, 20 at N = 3K with 200 accounts and 200 epochs.
    Desk,
}

impl Preset {
    pub fn spec(self) -> SweepSpec {
        let (shards, accounts, epochs) = match self {
            Preset::Paper => ((1..=10).map(|i| 5 * i).collect(), 2000, 1000),
            Preset::Desk => (vec![5, 10, 20], 200, 200),
        };
        let mut template = RunConfig::new(SchemeKind::PolyShard, 0, 0);
        template.accounts = accounts;
        template.epochs = epochs;
        SweepSpec {
            schemes: baseline_schemes(),
            shards,
            ratio: 3,
            mus: vec![Mu::from_integer(0)],
            seeds: 1,
            template,
            strategy: Strategy::RandomValues,
            adversary_seed: None,
        }
    }
}

fn baseline_schemes() -> Vec<SchemeKind> {
    vec![
        SchemeKind::FullReplication,
        SchemeKind::UncodedSharding,
        SchemeKind::PolyShard,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Run(RunConfig),
    Sweep(SweepSpec),
}

/// Reads and validates `path`. `seed` overrides the file's `seed`.
pub fn parse_config(path: &Path, seed: Option<u64>) -> Result<Parsed, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")), seed)
}

/// Parses config text; circuit paths resolve against `base`.
pub fn parse_config_str(text: &str, base: &Path, seed: Option<u64>) -> Result<Parsed, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    build(raw, base, seed)
}

/// Exact rational from a decimal such as `0.25`, or `a/b`.
pub fn parse_mu(text: &str) -> Result<Mu, String> {
    let s = text.trim();
    let bad = || format!("`{text}` is not a decimal or a fraction a/b");
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty()
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let denom = 10i64.pow(frac.len() as u32);
    let whole: i64 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let part: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let numer = whole
        .checked_mul(denom)
        .and_then(|w| w.checked_add(part))
        .ok_or_else(bad)?;
    Ok(Ratio::new(if neg { -numer } else { numer }, denom))
}

fn mu_value(key: &'static str, v: &toml::Value) -> Result<Mu, ConfigError> {
    let mu = match v {
        toml::Value::Integer(i) => Ratio::from_integer(*i),
        // f64 Display is the shortest round-tripping decimal, which is what
        // the user wrote.
        toml::Value::Float(f) => parse_mu(&f.to_string()).map_err(|e| constraint(key, e))?,
        toml::Value::String(s) => parse_mu(s).map_err(|e| constraint(key, e))?,
        other => {
            return Err(constraint(
                key,
                format!("expected a number or \"a/b\", got {other}"),
            ))
        }
    };
    if mu < Ratio::from_integer(0) || mu * 2 >= Ratio::from_integer(1) {
        return Err(constraint(
            key,
            format!("mu must satisfy 0 <= mu < 1/2, got {mu}"),
        ));
    }
    Ok(mu)
}

fn scheme_value(key: &'static str, s: &str) -> Result<SchemeKind, ConfigError> {
    s.parse().map_err(|e: String| constraint(key, e))
}

fn strategy(raw: Option<&RawAdversary>) -> Result<Strategy, ConfigError> {
    let Some(adv) = raw else {
        return Ok(Strategy::RandomValues);
    };
    match adv.strategy.as_deref().unwrap_or("random-values") {
        "random-values" | "random" => Ok(Strategy::RandomValues),
        "targeted-shard" | "targeted" => Ok(Strategy::TargetedShard { shard: adv.shard.unwrap_or(0) }),
        "worst-case-search" | "worst-case" => Ok(Strategy::WorstCaseSearch),
        other => Err(constraint(
            "adversary.strategy",
            format!("unknown strategy `{other}`, expected random-values, targeted-shard or worst-case-search"),
        )),
    }
}

fn load_circuit(base: &Path, rel: &Path) -> Result<ArithmeticCircuit, ConfigError> {
    let path = base.join(rel);
    let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::CircuitFile {
        path: path.clone(),
        source,
    })?;
    ArithmeticCircuit::parse(&text).map_err(|source| ConfigError::Circuit { path, source })
}

/// Capacity and shape checks a run must pass before it starts.
pub fn check_capacity(c: &RunConfig) -> Result<(), ConfigError> {
    let report = capacity(c.scheme, c.nodes, c.shards, c.mu(), c.verification.degree())
        .map_err(|e| constraint("K", e.to_string()))?;
    if let Some(k_max) = report.k_max {
        if c.shards > k_max {
            return Err(constraint(
                "K",
                format!(
                    "{} supports at most K = {k_max} for N = {}, mu = {}, d = {}; got K = {}",
                    c.scheme,
                    c.nodes,
                    c.mu(),
                    c.verification.degree(),
                    c.shards
                ),
            ));
        }
    }
    if c.scheme == SchemeKind::IterativePolyShard && c.verification.as_circuit().is_none() {
        return Err(constraint(
            "circuit",
            "iterative-polyshard needs a circuit file",
        ));
    }
    if let Strategy::TargetedShard { shard } = c.adversary.strategy {
        if shard >= c.shards {
            return Err(constraint(
                "adversary.shard",
                format!("must be below K = {}, got {shard}", c.shards),
            ));
        }
    }
    Ok(())
}

fn build(raw: RawConfig, base: &Path, seed_override: Option<u64>) -> Result<Parsed, ConfigError> {
    let mut template = RunConfig::new(SchemeKind::PolyShard, 0, 0);
    if let Some(field) = raw.field {
        field
            .validate()
            .map_err(|e| constraint("field", e.to_string()))?;
        if !matches!(field, FieldSpec::Prime { .. }) {
            return Err(constraint(
                "field",
                "runs need a prime field for signed balances",
            ));
        }
        template.field = field;
    }
    if let Some(m) = raw.accounts {
        if m == 0 {
            return Err(constraint("M", "need at least one account"));
        }
        template.accounts = m;
    }
    if let Some(t) = raw.epochs {
        template.epochs = t;
    }
    template.seed = seed_override.or(raw.seed).unwrap_or(0);
    if let Some(rate) = raw.invalid_rate {
        if !(0.0..=1.0).contains(&rate) {
            return Err(constraint(
                "invalid_rate",
                format!("must lie in [0, 1], got {rate}"),
            ));
        }
        template.invalid_rate = rate;
    }
    if let Some(b) = raw.initial_balance {
        template.initial_balance = b;
    }
    let accept = raw.accept.unwrap_or_default();
    if let Some(rel) = &raw.circuit {
        template.verification = VerificationFn::circuit(load_circuit(base, rel)?, accept);
    } else if raw.accept.is_some() && accept != AcceptRule::NonNegative {
        return Err(constraint(
            "accept",
            "the balance check always uses non-negative; set `circuit` to use another rule",
        ));
    }
    let ratio = raw.ratio.unwrap_or(3);
    if ratio == 0 {
        return Err(constraint("ratio", "must be at least 1"));
    }
    let strategy = strategy(raw.adversary.as_ref())?;
    let adversary_seed = raw.adversary.as_ref().and_then(|a| a.seed);

    if let Some(sweep) = raw.sweep {
        if raw.nodes.is_some() {
            return Err(constraint("N", "sweeps derive N from `ratio`; remove `N`"));
        }
        let schemes = match (&sweep.schemes, &raw.scheme) {
            (Some(list), _) => list
                .iter()
                .map(|s| scheme_value("sweep.schemes", s))
                .collect::<Result<_, _>>()?,
            (None, Some(s)) => vec![scheme_value("scheme", s)?],
            (None, None) => baseline_schemes(),
        };
        let shards = match (sweep.shards, raw.shards) {
            (Some(list), _) => list,
            (None, Some(k)) => vec![k],
            (None, None) => {
                return Err(constraint(
                    "sweep.K",
                    "a sweep needs a list of shard counts",
                ))
            }
        };
        if shards.contains(&0) {
            return Err(constraint("sweep.K", "shard counts must be at least 1"));
        }
        let mus = match (sweep.mu, &raw.mu) {
            (Some(list), _) => list
                .iter()
                .map(|v| mu_value("sweep.mu", v))
                .collect::<Result<_, _>>()?,
            (None, Some(v)) => vec![mu_value("mu", v)?],
            (None, None) => vec![Mu::from_integer(0)],
        };
        let seeds = sweep.seeds.unwrap_or(1);
        if seeds == 0 {
            return Err(constraint("sweep.seeds", "must be at least 1"));
        }
        return Ok(Parsed::Sweep(SweepSpec {
            schemes,
            shards,
            ratio,
            mus,
            seeds,
            template,
            strategy,
            adversary_seed,
        }));
    }

    let scheme = scheme_value(
        "scheme",
        raw.scheme
            .as_deref()
            .ok_or_else(|| constraint("scheme", "required for a single run"))?,
    )?;
    let shards = raw
        .shards
        .ok_or_else(|| constraint("K", "required for a single run"))?;
    if shards == 0 {
        return Err(constraint("K", "must be at least 1"));
    }
    let nodes = raw.nodes.unwrap_or(ratio * shards);
    if nodes < shards {
        return Err(constraint(
            "N",
            format!("must be at least K = {shards}, got {nodes}"),
        ));
    }
    let mu = match &raw.mu {
        Some(v) => mu_value("mu", v)?,
        None => Mu::from_integer(0),
    };
    let mut c = template;
    c.scheme = scheme;
    c.nodes = nodes;
    c.shards = shards;
    c.adversary = AdversarySpec::new(
        mu,
        strategy,
        adversary_seed.unwrap_or(c.seed.wrapping_add(1)),
    )
    .map_err(|e| constraint("mu", e.to_string()))?;
    check_capacity(&c)?;
    Ok(Parsed::Run(c))
}
