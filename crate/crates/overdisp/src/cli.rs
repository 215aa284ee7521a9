//! Command-line front end: flat key-value configs in, CSV or JSON out.
//!
//! Config format: one `section.key = value` pair per line, `#` comments,
//! optional double quotes around values. Example:
//!
//! ```text
//! model.subordinator.kind = gamma
//! model.subordinator.shape = 1.0
//! model.subordinator.rate = 1.0
//! model.service.kind = det
//! model.service.d = 0.5
//! model.u = 1.0
//! scaling.f = 5/3          # exact rational, or a decimal
//! scaling.n = 30
//! mc.samples = 100000      # mc section only needed by `simulate`
//! mc.grid_cells = 1024
//! mc.seed = 1
//! mc.method = is           # is | plain
//! mc.workers = 4
//! output.format = csv      # csv | json
//! output.path = -          # "-" or absent = stdout
//! ```
//!
//! Unknown keys are rejected. All numeric CSV output is formatted with
//! round-half-even at the requested precision so that golden-file comparison
//! is deterministic; JSON carries full-precision numbers plus a `config`
//! echo that can be fed back in as a config file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::asymptotics::{approximate_xi, AsymptoticResult, Regime};
use crate::error::{Error, Result};
use crate::mc::{estimate_is, estimate_plain, McConfig, McEstimate, Method};
use crate::model::{GrowthExponent, Model, ModelSpec, Scaling, Service, Subordinator};
use crate::twist::{all_constants, BalancedConstants, FastConstants, SlowConstants};

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?} (want csv or json)"))),
        }
    }
}

/// Fully parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub mc: Option<McConfig>,
    pub format: Format,
    pub path: Option<String>,
    /// Normalized key/value echo used for JSON round-trips.
    pub raw: BTreeMap<String, String>,
}

const KNOWN_KEYS: [&str; 14] = [
    "model.subordinator.kind",
    "model.subordinator.shape",
    "model.subordinator.rate",
    "model.service.kind",
    "model.service.d",
    "model.service.nu",
    "model.service.kappa",
    "model.u",
    "scaling.f",
    "scaling.n",
    "mc.samples",
    "mc.grid_cells",
    "mc.seed",
    "mc.method",
];
const KNOWN_OUTPUT_KEYS: [&str; 3] = ["mc.workers", "output.format", "output.path"];

fn is_known_key(key: &str) -> bool {
    KNOWN_KEYS.contains(&key) || KNOWN_OUTPUT_KEYS.contains(&key)
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected `key = value`, got {raw_line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        if !is_known_key(&key) {
            return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
        }
        if map.insert(key.clone(), value.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {key:?}", lineno + 1)));
        }
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    let raw = map.get(key).ok_or_else(|| Error::Config(format!("missing key {key:?}")))?;
    raw.parse::<f64>().map_err(|_| Error::Config(format!("{key}: not a number: {raw:?}")))
}

fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<u64> {
    let raw = map.get(key).ok_or_else(|| Error::Config(format!("missing key {key:?}")))?;
    raw.parse::<u64>().map_err(|_| Error::Config(format!("{key}: not an integer: {raw:?}")))
}

/// Parse a config file's contents into a validated run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let map = parse_kv(text)?;

    let sub_kind = map
        .get("model.subordinator.kind")
        .map(String::as_str)
        .unwrap_or("gamma")
        .to_ascii_lowercase();
    let subordinator = match sub_kind.as_str() {
        "gamma" => Subordinator::Gamma {
            shape: get_f64(&map, "model.subordinator.shape")?,
            rate: get_f64(&map, "model.subordinator.rate")?,
        },
        other => {
            return Err(Error::Config(format!(
                "model.subordinator.kind {other:?} is not constructible from a config file"
            )))
        }
    };

    let svc_kind = map
        .get("model.service.kind")
        .ok_or_else(|| Error::Config("missing key \"model.service.kind\"".into()))?
        .to_ascii_lowercase();
    let canonical = match svc_kind.as_str() {
        "det" | "deterministic" => "det",
        "exp" | "exponential" => "exp",
        "powerlaw" | "power-law" | "pl" => "powerlaw",
        other => return Err(Error::Config(format!("unknown service kind {other:?}"))),
    };
    let service = match canonical {
        "det" => Service::Deterministic { d: get_f64(&map, "model.service.d")? },
        "exp" => Service::Exponential { nu: get_f64(&map, "model.service.nu")? },
        _ => Service::PowerLaw { kappa: get_f64(&map, "model.service.kappa")? },
    };
    // Reject parameters that belong to a different service kind.
    for (key, owner) in
        [("model.service.d", "det"), ("model.service.nu", "exp"), ("model.service.kappa", "powerlaw")]
    {
        if map.contains_key(key) && canonical != owner {
            return Err(Error::Config(format!(
                "{key} does not apply to service kind {svc_kind:?}"
            )));
        }
    }

    let u = get_f64(&map, "model.u")?;
    let f: GrowthExponent = map
        .get("scaling.f")
        .ok_or_else(|| Error::Config("missing key \"scaling.f\"".into()))?
        .parse()?;
    let n = get_u64(&map, "scaling.n")?;

    let model = ModelSpec { subordinator, service, u, scaling: Scaling::new(n, f) }.validate()?;

    let mc = if ["mc.samples", "mc.grid_cells", "mc.seed", "mc.method", "mc.workers"]
        .iter()
        .any(|k| map.contains_key(*k))
    {
        let mut cfg = McConfig::default();
        if map.contains_key("mc.samples") {
            cfg.samples = get_u64(&map, "mc.samples")?;
        }
        if map.contains_key("mc.grid_cells") {
            cfg.grid_cells = get_u64(&map, "mc.grid_cells")? as u32;
        }
        if map.contains_key("mc.seed") {
            cfg.seed = get_u64(&map, "mc.seed")?;
        }
        if let Some(method) = map.get("mc.method") {
            cfg.method = match method.to_ascii_lowercase().as_str() {
                "plain" => Method::Plain,
                "is" | "importance" | "importance_sampled" => Method::ImportanceSampled,
                other => {
                    return Err(Error::Config(format!(
                        "unknown mc.method {other:?} (want plain or is)"
                    )))
                }
            };
        }
        if map.contains_key("mc.workers") {
            cfg.workers = get_u64(&map, "mc.workers")? as u32;
        }
        cfg.validate()?;
        Some(cfg)
    } else {
        None
    };

    let format = match map.get("output.format") {
        Some(raw) => raw.parse()?,
        None => Format::Csv,
    };
    let path = map.get("output.path").filter(|p| p.as_str() != "-").cloned();

    Ok(RunConfig { model, mc, format, path, raw: map })
}

/// Number of threads override honored by the `simulate` command.
pub const THREADS_ENV: &str = "OVERDISP_THREADS";

/// Fixed-point formatting with the platform's round-half-even semantics.
pub fn fixed(v: f64, precision: usize) -> String {
    format!("{v:.precision$}")
}

/// Scientific formatting (mantissa rounded half-even at `precision`).
pub fn sci(v: f64, precision: usize) -> String {
    format!("{v:.precision$e}")
}

const CONSTANT_COLUMNS: [&str; 11] = [
    "theta_star",
    "chi_plus",
    "vbar2",
    "sigma_plus_sq",
    "theta_circ",
    "chi_circ",
    "sigma_circ_sq",
    "tau_star",
    "chi_minus",
    "wbar1",
    "sigma_minus_sq",
];

fn constant_values(
    fast: &FastConstants,
    bal: &BalancedConstants,
    slow: &SlowConstants,
) -> [f64; 11] {
    [
        fast.theta_star,
        fast.chi_plus,
        fast.vbar2,
        fast.sigma_plus_sq,
        bal.theta_circ,
        bal.chi_circ,
        bal.sigma_circ_sq,
        slow.tau_star,
        slow.chi_minus,
        slow.wbar1,
        slow.sigma_minus_sq,
    ]
}

/// Rendered command output.
#[derive(Debug)]
pub struct Report {
    pub text: String,
    pub path: Option<String>,
}

#[derive(Serialize)]
struct ConstantsJson<'a> {
    config: &'a BTreeMap<String, String>,
    fast: FastConstants,
    balanced: BalancedConstants,
    slow: SlowConstants,
}

/// All regime constants of the configured model.
pub fn cmd_constants(cfg: &RunConfig, format: Format, precision: usize) -> Result<Report> {
    let (fast, balanced, slow) = all_constants(&cfg.model)?;
    let text = match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&CONSTANT_COLUMNS.join(","));
            out.push('\n');
            let row: Vec<String> = constant_values(&fast, &balanced, &slow)
                .iter()
                .map(|v| fixed(*v, precision))
                .collect();
            out.push_str(&row.join(","));
            out.push('\n');
            out
        }
        Format::Json => {
            let doc = ConstantsJson { config: &cfg.raw, fast, balanced, slow };
            to_json(&doc)?
        }
    };
    Ok(Report { text, path: cfg.path.clone() })
}

#[derive(Serialize)]
struct ApproximateJson<'a> {
    config: &'a BTreeMap<String, String>,
    f: String,
    n: u64,
    result: &'a AsymptoticResult,
}

fn regime_label(regime: Regime) -> (&'static str, u32) {
    match regime {
        Regime::Fast { m_plus } => ("fast", m_plus),
        Regime::Balanced => ("balanced", 0),
        Regime::Slow { m_minus } => ("slow", m_minus),
    }
}

/// Tail-probability approximation for the configured model.
pub fn cmd_approximate(cfg: &RunConfig, format: Format, precision: usize) -> Result<Report> {
    let result = approximate_xi(&cfg.model)?;
    let scaling = cfg.model.scaling();
    let text = match format {
        Format::Csv => {
            let (regime, m) = regime_label(result.regime);
            let exponent: f64 = result.exponent_terms.iter().map(|t| t.value).sum();
            let mut out = String::from("f,n,regime,m,prefactor,exponent,xi\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                scaling.f,
                scaling.n,
                regime,
                m,
                sci(result.prefactor, precision),
                fixed(exponent, precision),
                sci(result.xi, precision),
            );
            out
        }
        Format::Json => to_json(&ApproximateJson {
            config: &cfg.raw,
            f: scaling.f.to_string(),
            n: scaling.n,
            result: &result,
        })?,
    };
    Ok(Report { text, path: cfg.path.clone() })
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    config: &'a BTreeMap<String, String>,
    mc: McEstimate,
    xi: f64,
    ratio: f64,
}

/// Options resolved by the binary before dispatch.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulateOverrides {
    pub seed: Option<u64>,
    pub workers: Option<u32>,
}

/// Monte Carlo estimate next to the analytic approximation.
pub fn cmd_simulate(
    cfg: &RunConfig,
    format: Format,
    precision: usize,
    overrides: SimulateOverrides,
) -> Result<Report> {
    let mut mc_cfg = cfg
        .mc
        .ok_or_else(|| Error::Config("simulate needs an mc section in the config".into()))?;
    if let Some(seed) = overrides.seed {
        mc_cfg.seed = seed;
    }
    if let Some(workers) = overrides.workers {
        mc_cfg.workers = workers.max(1);
    }
    let estimate = match mc_cfg.method {
        Method::Plain => estimate_plain(&cfg.model, &mc_cfg)?,
        Method::ImportanceSampled => estimate_is(&cfg.model, &mc_cfg)?,
    };
    let xi = approximate_xi(&cfg.model)?.xi;
    let ratio = estimate.estimate / xi;
    let text = match format {
        Format::Csv => {
            let method = match estimate.method {
                Method::Plain => "plain",
                Method::ImportanceSampled => "is",
            };
            let mut out = String::from(
                "method,samples,grid_cells,seed,estimate,std_error,ci_low,ci_high,xi,ratio\n",
            );
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                method,
                estimate.samples_used,
                mc_cfg.grid_cells,
                mc_cfg.seed,
                sci(estimate.estimate, precision),
                sci(estimate.std_error, precision),
                sci(estimate.ci95.0, precision),
                sci(estimate.ci95.1, precision),
                sci(xi, precision),
                fixed(ratio, precision),
            );
            out
        }
        Format::Json => to_json(&SimulateJson { config: &cfg.raw, mc: estimate, xi, ratio })?,
    };
    Ok(Report { text, path: cfg.path.clone() })
}

/// The (service, parameter) triples behind the two published parameter sets:
/// id 1 pairs with the ξ table 2, id 3 with table 4.
fn table_services(set: u8) -> Vec<(&'static str, Service)> {
    if set == 1 {
        vec![
            ("det", Service::Deterministic { d: 0.5 }),
            ("exp", Service::Exponential { nu: 2.0 }),
            ("powerlaw", Service::PowerLaw { kappa: 2.0 }),
        ]
    } else {
        vec![
            ("det", Service::Deterministic { d: 0.5 }),
            ("exp", Service::Exponential { nu: 1.594 }),
            ("powerlaw", Service::PowerLaw { kappa: 1.0 }),
        ]
    }
}

const TABLE_F: [(u32, u32); 5] = [(2, 5), (3, 5), (1, 1), (5, 3), (5, 2)];
const TABLE2_N: [u64; 5] = [3000, 200, 50, 30, 30];
const TABLE4_N: [u64; 5] = [8000, 400, 75, 45, 45];

fn reference_model(service: Service, f: GrowthExponent, n: u64) -> Result<Model> {
    ModelSpec {
        subordinator: Subordinator::Gamma { shape: 1.0, rate: 1.0 },
        service,
        u: 1.0,
        scaling: Scaling::new(n, f),
    }
    .validate()
}

#[derive(Serialize)]
struct TableJson {
    table: u8,
    columns: Vec<String>,
    rows: Vec<BTreeMap<String, serde_json::Value>>,
}

/// Regenerate one of the four reference tables (1/3: constants, 2/4: ξ).
pub fn cmd_table(table: u8, format: Format, precision: usize) -> Result<Report> {
    let text = match table {
        1 | 3 => {
            let set = if table == 1 { 1 } else { 3 };
            let mut columns = vec!["service".to_string()];
            columns.extend(CONSTANT_COLUMNS.iter().map(|s| s.to_string()));
            let mut csv = columns.join(",");
            csv.push('\n');
            let mut rows = Vec::new();
            for (label, service) in table_services(set) {
                let model =
                    reference_model(service, GrowthExponent::Rational { num: 1, den: 1 }, 50)?;
                let (fast, balanced, slow) = all_constants(&model)?;
                let values = constant_values(&fast, &balanced, &slow);
                let mut row = BTreeMap::new();
                row.insert("service".into(), serde_json::Value::from(label));
                let mut line = label.to_string();
                for (name, v) in CONSTANT_COLUMNS.iter().zip(values) {
                    let _ = write!(line, ",{}", fixed(v, precision));
                    row.insert((*name).into(), serde_json::Value::from(v));
                }
                csv.push_str(&line);
                csv.push('\n');
                rows.push(row);
            }
            match format {
                Format::Csv => csv,
                Format::Json => to_json(&TableJson { table, columns, rows })?,
            }
        }
        2 | 4 => {
            let (set, ns) = if table == 2 { (1, TABLE2_N) } else { (3, TABLE4_N) };
            let columns = vec!["service".into(), "f".into(), "n".into(), "xi".into()];
            let mut csv = String::from("service,f,n,xi\n");
            let mut rows = Vec::new();
            for (label, service) in table_services(set) {
                for ((num, den), n) in TABLE_F.iter().zip(ns) {
                    let f = GrowthExponent::Rational { num: *num, den: *den };
                    let model = reference_model(service.clone(), f, n)?;
                    let xi = approximate_xi(&model)?.xi;
                    let _ = writeln!(csv, "{label},{f},{n},{}", sci(xi, precision));
                    let mut row = BTreeMap::new();
                    row.insert("service".into(), serde_json::Value::from(label));
                    row.insert("f".into(), serde_json::Value::from(f.to_string()));
                    row.insert("n".into(), serde_json::Value::from(n));
                    row.insert("xi".into(), serde_json::Value::from(xi));
                    rows.push(row);
                }
            }
            match format {
                Format::Csv => csv,
                Format::Json => to_json(&TableJson { table, columns, rows })?,
            }
        }
        other => return Err(Error::Config(format!("unknown table id {other} (want 1..4)"))),
    };
    Ok(Report { text, path: None })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))?;
    text.push('\n');
    Ok(text)
}
