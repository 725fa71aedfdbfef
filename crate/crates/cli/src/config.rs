//! Scenario files: flat `key = value` lines with dotted section prefixes.
//!
//! ```text
//! # comments start with '#'
//! seed = 7
//! node_count = 50
//! t_end = 172800
//! mobility = rwp
//! mobility.width = 1000
//! forwarding = rrs
//! app = bruit
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use oppsim_core::application::{
    AppConfig, AppKind, DestinationMode, GenerationMode, TrafficKind, TrafficModel,
    DEFAULT_ITEM_SIZE, DEFAULT_LIKED_PROBABILITY,
};
use oppsim_core::forwarding::{ProtocolConfig, DEFAULT_THRESHOLD, DEFAULT_TOP_K};
use oppsim_core::link::LinkConfig;
use oppsim_core::mobility::{Dims, RwpConfig, SwimConfig};

pub const DEFAULT_AREA: f64 = 1000.0;
pub const DEFAULT_CACHE_CAPACITY: u64 = 1_000_000;
pub const DEFAULT_MEAN_INTERVAL: f64 = 7200.0;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("missing required key `{key}` (checked at line {line}, end of file)")]
    MissingRequiredKey { key: String, line: usize },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        line: usize,
        reason: String,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MobilitySpec {
    Rwp(RwpConfig<f64>),
    Swim(SwimConfig),
    Trace {
        path: PathBuf,
        dims: Dims,
    },
    /// Nodes placed uniformly at random and never moving.
    Static {
        width: f64,
        height: f64,
    },
}

impl MobilitySpec {
    pub fn name(&self) -> &'static str {
        match self {
            MobilitySpec::Rwp(_) => "rwp",
            MobilitySpec::Swim(_) => "swim",
            MobilitySpec::Trace { .. } => "trace",
            MobilitySpec::Static { .. } => "static",
        }
    }
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub node_count: usize,
    pub t_end: f64,
    pub link: LinkConfig,
    pub mobility: MobilitySpec,
    pub forwarding: ProtocolConfig,
    pub cache_capacity: u64,
    pub app: AppConfig,
    pub output_dir: PathBuf,
}

/// A parsed scenario plus the `(key, value)` defaults that were filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub scenario: Scenario,
    pub defaults: Vec<(String, String)>,
}

const KEYS: &[&str] = &[
    "seed",
    "node_count",
    "t_end",
    "output_dir",
    "link.range",
    "link.bandwidth",
    "link.fixed_delay",
    "link.beacon_interval",
    "link.queue_capacity",
    "mobility",
    "mobility.width",
    "mobility.height",
    "mobility.v_min",
    "mobility.v_max",
    "mobility.pause",
    "mobility.home_radius",
    "mobility.alpha",
    "mobility.cell_size",
    "mobility.spot_size",
    "mobility.speed",
    "mobility.pause_mean",
    "mobility.trace_path",
    "mobility.dims",
    "forwarding",
    "forwarding.cache_capacity",
    "forwarding.rrs_interval",
    "forwarding.odd_threshold",
    "forwarding.odd_top_k",
    "app",
    "app.traffic",
    "app.mean_interval",
    "app.uniform_lo",
    "app.uniform_hi",
    "app.destination_mode",
    "app.generation",
    "app.herald_catalog_size",
    "app.liked_probability",
    "app.item_size",
];

/// Keys whose value can be swept over.
pub const SWEEP_KEYS: &[&str] = &[
    "app.traffic",
    "forwarding.cache_capacity",
    "mobility",
    "seed",
];

/// Raw `key -> (value, line)` pairs of a config text, in key order.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut pairs = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey {
                key: k.to_string(),
                line,
            });
        }
        if let Some((_, first)) = pairs.get(k) {
            return Err(ConfigError::InvalidValue {
                key: k.to_string(),
                line,
                reason: format!("already set on line {first}"),
            });
        }
        pairs.insert(k.to_string(), (v.to_string(), line));
    }
    Ok(pairs)
}

struct Reader {
    pairs: BTreeMap<String, (String, usize)>,
    end_line: usize,
    defaults: Vec<(String, String)>,
}

impl Reader {
    fn line_of(&self, key: &str) -> usize {
        self.pairs.get(key).map_or(self.end_line, |p| p.1)
    }

    fn invalid(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            key: key.to_string(),
            line: self.line_of(key),
            reason: reason.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.pairs.get(key).map(|p| p.0.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str, text: &str) -> Result<T, ConfigError> {
        text.parse()
            .map_err(|_| self.invalid(key, format!("cannot parse {text:?}")))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        match self.raw(key) {
            Some(v) => self.parse(key, v),
            None => Err(ConfigError::MissingRequiredKey {
                key: key.to_string(),
                line: self.end_line,
            }),
        }
    }

    fn or<T: FromStr + ToString>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.raw(key) {
            Some(v) => self.parse(key, v),
            None => {
                self.defaults.push((key.to_string(), default.to_string()));
                Ok(default)
            }
        }
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.raw(key).map(|v| self.parse(key, v)).transpose()
    }

    fn positive(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid(key, "must be positive"))
        }
    }
}

fn choice<'a>(r: &Reader, key: &str, v: &'a str, allowed: &[&str]) -> Result<&'a str, ConfigError> {
    if allowed.contains(&v) {
        Ok(v)
    } else {
        Err(r.invalid(key, format!("expected one of {}", allowed.join(", "))))
    }
}

/// Parses and validates a scenario. Relative trace paths resolve against
/// `base_dir` (the working directory when `None`).
pub fn parse_scenario(text: &str, base_dir: Option<&Path>) -> Result<Parsed, ConfigError> {
    let mut r = Reader {
        pairs: parse_pairs(text)?,
        end_line: text.lines().count() + 1,
        defaults: Vec::new(),
    };

    let seed: u64 = r.required("seed")?;
    let node_count: usize = r.required("node_count")?;
    if node_count == 0 {
        return Err(r.invalid("node_count", "must be at least 1"));
    }
    let t_end: f64 = r.required("t_end")?;
    r.positive("t_end", t_end)?;
    let output_dir = PathBuf::from(r.or("output_dir", DEFAULT_OUTPUT_DIR.to_string())?);

    let d = LinkConfig::default();
    let link = LinkConfig {
        range: r.or("link.range", d.range)?,
        bandwidth: r.or("link.bandwidth", d.bandwidth)?,
        fixed_delay: r.or("link.fixed_delay", d.fixed_delay)?,
        beacon_interval: r.or("link.beacon_interval", d.beacon_interval)?,
        queue_capacity: r.or("link.queue_capacity", d.queue_capacity)?,
    };
    if let Err(e) = link.validate() {
        let key = match e {
            oppsim_core::link::LinkError::InvalidConfig(field) => format!("link.{field}"),
            _ => "link".to_string(),
        };
        return Err(r.invalid(&key, e.to_string()));
    }

    let mobility = parse_mobility(&mut r, node_count, base_dir)?;
    let (forwarding, cache_capacity) = parse_forwarding(&mut r, &link)?;
    let app = parse_app(&mut r)?;

    if forwarding == ProtocolConfig::Epidemic
        && app.destination_mode == DestinationMode::DestinationLess
    {
        let key = if r.raw("app.destination_mode").is_some() {
            "app.destination_mode"
        } else {
            "forwarding"
        };
        return Err(r.invalid(
            key,
            "epidemic routing is unicast and needs destination-oriented data",
        ));
    }

    Ok(Parsed {
        scenario: Scenario {
            seed,
            node_count,
            t_end,
            link,
            mobility,
            forwarding,
            cache_capacity,
            app,
            output_dir,
        },
        defaults: r.defaults,
    })
}

fn parse_mobility(
    r: &mut Reader,
    node_count: usize,
    base_dir: Option<&Path>,
) -> Result<MobilitySpec, ConfigError> {
    let kind: String = r.required("mobility")?;
    let kind = choice(r, "mobility", &kind, &["rwp", "swim", "trace", "static"])?.to_string();
    match kind.as_str() {
        "rwp" => {
            let w = RwpConfig::walking(DEFAULT_AREA, DEFAULT_AREA);
            let cfg = RwpConfig {
                width: r.or("mobility.width", w.width)?,
                height: r.or("mobility.height", w.height)?,
                v_min: r.or("mobility.v_min", w.v_min)?,
                v_max: r.or("mobility.v_max", w.v_max)?,
                pause: r.or("mobility.pause", w.pause)?,
            };
            cfg.validate()
                .map_err(|e| r.invalid("mobility", e.to_string()))?;
            Ok(MobilitySpec::Rwp(cfg))
        }
        "swim" => {
            let width = r.or("mobility.width", DEFAULT_AREA)?;
            let height = r.or("mobility.height", DEFAULT_AREA)?;
            let d = SwimConfig::clustered(width, height);
            let cfg = SwimConfig {
                home_radius: r.or("mobility.home_radius", d.home_radius)?,
                alpha: r.or("mobility.alpha", d.alpha)?,
                cell_size: r.or("mobility.cell_size", d.cell_size)?,
                spot_size: r.or("mobility.spot_size", d.spot_size)?,
                speed: r.or("mobility.speed", d.speed)?,
                pause_mean: r.or("mobility.pause_mean", d.pause_mean)?,
                ..d
            };
            cfg.validate()
                .map_err(|e| r.invalid("mobility", e.to_string()))?;
            Ok(MobilitySpec::Swim(cfg))
        }
        "trace" => {
            let path: String = r.required("mobility.trace_path")?;
            let dims: u8 = r.or("mobility.dims", 2)?;
            let dims = Dims::from_count(dims)
                .ok_or_else(|| r.invalid("mobility.dims", "must be 2 or 3"))?;
            let resolved = match base_dir {
                Some(b) if Path::new(&path).is_relative() => b.join(&path),
                _ => PathBuf::from(&path),
            };
            let text = std::fs::read_to_string(&resolved).map_err(|e| {
                r.invalid(
                    "mobility.trace_path",
                    format!("{}: {e}", resolved.display()),
                )
            })?;
            let lines = text.lines().filter(|l| !l.trim().is_empty()).count();
            if lines < node_count {
                return Err(r.invalid(
                    "mobility.trace_path",
                    format!("trace has {lines} node lines, node_count is {node_count}"),
                ));
            }
            Ok(MobilitySpec::Trace {
                path: resolved,
                dims,
            })
        }
        _ => {
            let width = r.or("mobility.width", DEFAULT_AREA)?;
            let height = r.or("mobility.height", DEFAULT_AREA)?;
            r.positive("mobility.width", width)?;
            r.positive("mobility.height", height)?;
            Ok(MobilitySpec::Static { width, height })
        }
    }
}

fn parse_forwarding(
    r: &mut Reader,
    link: &LinkConfig,
) -> Result<(ProtocolConfig, u64), ConfigError> {
    let kind: String = r.required("forwarding")?;
    let kind = choice(r, "forwarding", &kind, &["epidemic", "rrs", "odd"])?.to_string();
    let cache: u64 = r.or("forwarding.cache_capacity", DEFAULT_CACHE_CAPACITY)?;
    if cache == 0 {
        return Err(r.invalid("forwarding.cache_capacity", "must be positive"));
    }
    let protocol = match kind.as_str() {
        "epidemic" => ProtocolConfig::Epidemic,
        "rrs" => {
            let interval = r.or("forwarding.rrs_interval", link.beacon_interval)?;
            r.positive("forwarding.rrs_interval", interval)?;
            ProtocolConfig::Rrs { interval }
        }
        _ => {
            let threshold: f64 = r.or("forwarding.odd_threshold", DEFAULT_THRESHOLD)?;
            if !(0.0..=1.0).contains(&threshold) {
                return Err(r.invalid("forwarding.odd_threshold", "must lie in [0, 1]"));
            }
            let top_k: usize = r.or("forwarding.odd_top_k", DEFAULT_TOP_K)?;
            if top_k == 0 {
                return Err(r.invalid("forwarding.odd_top_k", "must be positive"));
            }
            ProtocolConfig::Odd { threshold, top_k }
        }
    };
    Ok((protocol, cache))
}

fn parse_app(r: &mut Reader) -> Result<AppConfig, ConfigError> {
    let kind: String = r.required("app")?;
    let app = match choice(r, "app", &kind, &["promote", "herald", "bruit"])? {
        "promote" => AppKind::Promote,
        "herald" => AppKind::Herald,
        _ => AppKind::Bruit,
    };
    let default_traffic = if app == AppKind::Bruit {
        "uniform"
    } else {
        "exponential"
    };
    let traffic: String = r.or("app.traffic", default_traffic.to_string())?;
    let traffic = match choice(
        r,
        "app.traffic",
        &traffic,
        &["constant", "uniform", "exponential"],
    )? {
        "constant" => TrafficKind::Constant,
        "uniform" => TrafficKind::Uniform,
        _ => TrafficKind::Exponential,
    };
    let mean: f64 = r.or("app.mean_interval", DEFAULT_MEAN_INTERVAL)?;
    r.positive("app.mean_interval", mean)?;
    let model = if traffic == TrafficKind::Uniform {
        let lo = r.or("app.uniform_lo", 0.5 * mean)?;
        let hi = r.or("app.uniform_hi", 1.5 * mean)?;
        TrafficModel {
            kind: traffic,
            mean_interval: mean,
            lo,
            hi,
        }
    } else {
        TrafficModel::of_kind(traffic, mean)
    };
    let destination_mode: String = r.or("app.destination_mode", "oriented".to_string())?;
    let destination_mode = match choice(
        r,
        "app.destination_mode",
        &destination_mode,
        &["oriented", "destination_less"],
    )? {
        "oriented" => DestinationMode::Oriented,
        _ => DestinationMode::DestinationLess,
    };
    let generation: String = r.or("app.generation", "per_node".to_string())?;
    let generation_mode = match choice(r, "app.generation", &generation, &["per_node", "network"])?
    {
        "per_node" => GenerationMode::PerNode,
        _ => GenerationMode::Network,
    };
    let herald_catalog_size: Option<usize> = r.optional("app.herald_catalog_size")?;
    if app == AppKind::Herald && herald_catalog_size.is_none() {
        return Err(ConfigError::MissingRequiredKey {
            key: "app.herald_catalog_size".into(),
            line: r.end_line,
        });
    }
    let cfg = AppConfig {
        app,
        traffic: model,
        destination_mode,
        generation_mode,
        herald_catalog_size,
        liked_probability: r.or("app.liked_probability", DEFAULT_LIKED_PROBABILITY)?,
        item_size: r.or("app.item_size", DEFAULT_ITEM_SIZE)?,
    };
    cfg.validate().map_err(|e| {
        let key = match e.to_string() {
            s if s.contains("catalog") => "app.herald_catalog_size",
            s if s.contains("bruit") || s.contains("traffic") || s.contains("uniform") => {
                "app.traffic"
            }
            s if s.contains("liked") => "app.liked_probability",
            s if s.contains("item_size") => "app.item_size",
            _ => "app",
        };
        r.invalid(key, e.to_string())
    })?;
    Ok(cfg)
}

/// Writes every setting explicitly, so parsing the result gives back `s`
/// with no defaults applied.
pub fn serialize_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("seed", &s.seed);
    kv("node_count", &s.node_count);
    kv("t_end", &s.t_end);
    kv("output_dir", &s.output_dir.display());
    kv("link.range", &s.link.range);
    kv("link.bandwidth", &s.link.bandwidth);
    kv("link.fixed_delay", &s.link.fixed_delay);
    kv("link.beacon_interval", &s.link.beacon_interval);
    kv("link.queue_capacity", &s.link.queue_capacity);
    kv("mobility", &s.mobility.name());
    match &s.mobility {
        MobilitySpec::Rwp(c) => {
            kv("mobility.width", &c.width);
            kv("mobility.height", &c.height);
            kv("mobility.v_min", &c.v_min);
            kv("mobility.v_max", &c.v_max);
            kv("mobility.pause", &c.pause);
        }
        MobilitySpec::Swim(c) => {
            kv("mobility.width", &c.width);
            kv("mobility.height", &c.height);
            kv("mobility.home_radius", &c.home_radius);
            kv("mobility.alpha", &c.alpha);
            kv("mobility.cell_size", &c.cell_size);
            kv("mobility.spot_size", &c.spot_size);
            kv("mobility.speed", &c.speed);
            kv("mobility.pause_mean", &c.pause_mean);
        }
        MobilitySpec::Trace { path, dims } => {
            kv("mobility.trace_path", &path.display());
            kv("mobility.dims", &dims.count());
        }
        MobilitySpec::Static { width, height } => {
            kv("mobility.width", width);
            kv("mobility.height", height);
        }
    }
    kv("forwarding", &s.forwarding.name());
    kv("forwarding.cache_capacity", &s.cache_capacity);
    match s.forwarding {
        ProtocolConfig::Epidemic => {}
        ProtocolConfig::Rrs { interval } => kv("forwarding.rrs_interval", &interval),
        ProtocolConfig::Odd { threshold, top_k } => {
            kv("forwarding.odd_threshold", &threshold);
            kv("forwarding.odd_top_k", &top_k);
        }
    }
    kv("app", &s.app.app.as_str());
    kv("app.traffic", &s.app.traffic.kind.as_str());
    kv("app.mean_interval", &s.app.traffic.mean_interval);
    if s.app.traffic.kind == TrafficKind::Uniform {
        kv("app.uniform_lo", &s.app.traffic.lo);
        kv("app.uniform_hi", &s.app.traffic.hi);
    }
    let mode = match s.app.destination_mode {
        DestinationMode::Oriented => "oriented",
        DestinationMode::DestinationLess => "destination_less",
    };
    kv("app.destination_mode", &mode);
    let generation = match s.app.generation_mode {
        GenerationMode::PerNode => "per_node",
        GenerationMode::Network => "network",
    };
    kv("app.generation", &generation);
    if let Some(n) = s.app.herald_catalog_size {
        kv("app.herald_catalog_size", &n);
    }
    kv("app.liked_probability", &s.app.liked_probability);
    kv("app.item_size", &s.app.item_size);
    out
}

/// `text` with `key` set to `value`, replacing any existing assignment.
pub fn with_override(text: &str, key: &str, value: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let content = line.split('#').next().unwrap_or("");
        let is_key = content
            .split_once('=')
            .is_some_and(|(k, _)| k.trim() == key);
        if !is_key {
            out.push_str(line);
            out.push('\n');
        }
    }
    let _ = writeln!(out, "{key} = {value}");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str =
        "seed = 1\nnode_count = 5\nt_end = 100\nmobility = rwp\nforwarding = rrs\napp = bruit\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let p = parse_scenario(MINIMAL, None).unwrap();
        assert_eq!(p.scenario.link, LinkConfig::default());
        assert_eq!(p.scenario.forwarding, ProtocolConfig::Rrs { interval: 1.0 });
        assert_eq!(p.scenario.app.traffic.kind, TrafficKind::Uniform);
        assert!(p.defaults.iter().any(|(k, _)| k == "link.range"));
    }

    #[test]
    fn unknown_key_names_line() {
        let err = parse_scenario("seed = 1\nbogus = 2\n", None).unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                key: "bogus".into(),
                line: 2
            }
        );
    }

    #[test]
    fn missing_key() {
        let err = parse_scenario("seed = 1\n", None).unwrap_err();
        assert!(matches!(err, ConfigError::MissingRequiredKey { key, .. } if key == "node_count"));
    }

    #[test]
    fn epidemic_rejects_destination_less() {
        let text = MINIMAL.replace("forwarding = rrs", "forwarding = epidemic")
            + "app.destination_mode = destination_less\n";
        let err = parse_scenario(&text, None).unwrap_err();
        assert!(
            matches!(err, ConfigError::InvalidValue { key, line: 7, .. } if key == "app.destination_mode")
        );
    }

    #[test]
    fn bruit_rejects_exponential() {
        let err = parse_scenario(&(MINIMAL.to_string() + "app.traffic = exponential\n"), None)
            .unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { key, .. } if key == "app.traffic"));
    }

    #[test]
    fn round_trip() {
        let p = parse_scenario(MINIMAL, None).unwrap();
        let again = parse_scenario(&serialize_scenario(&p.scenario), None).unwrap();
        assert_eq!(again.scenario, p.scenario);
        assert!(again.defaults.is_empty());
    }

    #[test]
    fn override_replaces() {
        let t = with_override(MINIMAL, "seed", "9");
        assert_eq!(parse_scenario(&t, None).unwrap().scenario.seed, 9);
    }
}
