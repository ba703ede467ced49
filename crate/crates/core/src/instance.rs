//! Problem instances: providers, edge devices, demand scenarios.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance on the scenario-probability sum.
pub const PROBABILITY_TOL: f64 = 1e-9;

const MEMBERSHIP_RATIO: f64 = 10.0;
const ON_DEMAND_RATIO: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDevice {
    pub id: usize,
    pub memb_cost: f64,
    pub resv_trans_cost: f64,
    pub ondem_trans_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: usize,
    pub probability: f64,
    /// Bundle demand per provider.
    pub demand: Vec<u64>,
    /// `similarity[msp][edge]`, the fraction of a reserved bundle that counts
    /// toward demand in this scenario.
    pub similarity: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub msps: usize,
    pub edges: Vec<EdgeDevice>,
    pub scenarios: Vec<Scenario>,
    /// Per-subscription cap on reserved bundles.
    pub max_reserved: u64,
    pub seed: u64,
    #[serde(default)]
    pub preset: Option<String>,
}

impl ProblemInstance {
    /// Builds an instance and checks every structural invariant.
    pub fn new(
        msps: usize,
        edges: Vec<EdgeDevice>,
        scenarios: Vec<Scenario>,
        max_reserved: u64,
        seed: u64,
    ) -> Result<Self> {
        let instance = ProblemInstance {
            msps,
            edges,
            scenarios,
            max_reserved,
            seed,
            preset: None,
        };
        instance.validate()?;
        Ok(instance)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    /// Largest single demand over all (provider, scenario) pairs. One edge
    /// buying this many on-demand bundles always closes any shortfall, so it
    /// is the natural per-variable cap for on-demand purchases.
    pub fn on_demand_cap(&self) -> u64 {
        self.scenarios
            .iter()
            .flat_map(|s| s.demand.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let inv = |msg: String| Err(Error::Invariant(msg));
        if self.msps == 0 {
            return inv("at least one provider is required".into());
        }
        if self.edges.is_empty() {
            return inv("at least one edge device is required".into());
        }
        if self.scenarios.is_empty() {
            return inv("at least one scenario is required".into());
        }
        if self.max_reserved == 0 {
            return inv("max_reserved must be at least 1".into());
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i {
                return inv(format!("edge at position {i} has id {}", e.id));
            }
            for (name, c) in [
                ("memb_cost", e.memb_cost),
                ("resv_trans_cost", e.resv_trans_cost),
                ("ondem_trans_cost", e.ondem_trans_cost),
            ] {
                if !c.is_finite() || c < 0.0 {
                    return inv(format!("edge {i}: {name} = {c} must be finite and >= 0"));
                }
            }
            if e.ondem_trans_cost < e.resv_trans_cost {
                return inv(format!(
                    "edge {i}: on-demand price {} is below reserved price {}",
                    e.ondem_trans_cost, e.resv_trans_cost
                ));
            }
        }
        let mut total = 0.0;
        for (s, sc) in self.scenarios.iter().enumerate() {
            if sc.id != s {
                return inv(format!("scenario at position {s} has id {}", sc.id));
            }
            if !(0.0..=1.0).contains(&sc.probability) {
                return inv(format!("scenario {s}: probability {} outside [0, 1]", sc.probability));
            }
            total += sc.probability;
            if sc.demand.len() != self.msps {
                return inv(format!(
                    "scenario {s}: {} demands for {} providers",
                    sc.demand.len(),
                    self.msps
                ));
            }
            if sc.similarity.len() != self.msps {
                return inv(format!("scenario {s}: similarity has {} rows", sc.similarity.len()));
            }
            for (w, row) in sc.similarity.iter().enumerate() {
                if row.len() != self.edges.len() {
                    return inv(format!(
                        "scenario {s}: similarity row {w} has {} entries for {} edges",
                        row.len(),
                        self.edges.len()
                    ));
                }
                if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return inv(format!("scenario {s}: similarity {v} outside [0, 1]"));
                }
            }
        }
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return inv(format!("scenario probabilities sum to {total}, expected 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    S,
    M,
    L,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::S, Preset::M, Preset::L];
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::S => "S",
            Preset::M => "M",
            Preset::L => "L",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S" | "s" => Ok(Preset::S),
            "M" | "m" => Ok(Preset::M),
            "L" | "l" => Ok(Preset::L),
            other => Err(Error::InvalidPreset(other.to_string())),
        }
    }
}

/// Knobs for [`generate_instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub preset: Option<Preset>,
    pub msps: usize,
    pub edges: usize,
    pub scenarios: usize,
    /// Expected total bundle demand over all providers and scenarios.
    pub demand_mean: f64,
    pub max_reserved: u64,
    /// Reserved transmission price; membership and on-demand prices follow
    /// the 10 : 1 : 5 ratio.
    pub base_price: f64,
    pub similarity_low: f64,
    pub similarity_high: f64,
    /// Snap similarity draws to multiples of this step (within the bounds).
    pub similarity_step: Option<f64>,
    /// Multiply each edge's prices by a factor drawn from [0.9, 1.1].
    pub cost_jitter: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::preset(Preset::S)
    }
}

impl GeneratorConfig {
    pub fn preset(preset: Preset) -> Self {
        let (msps, edges, scenarios, demand_mean) = match preset {
            Preset::S => (1, 5, 2, 2_000.0),
            Preset::M => (2, 10, 3, 6_000.0),
            Preset::L => (5, 25, 5, 15_000.0),
        };
        GeneratorConfig {
            preset: Some(preset),
            msps,
            edges,
            scenarios,
            demand_mean,
            max_reserved: 31,
            base_price: 1.0,
            similarity_low: 0.5,
            similarity_high: 1.0,
            similarity_step: None,
            cost_jitter: false,
        }
    }

    /// A custom configuration; remaining fields take the preset defaults.
    pub fn custom(msps: usize, edges: usize, scenarios: usize, demand_mean: f64) -> Self {
        GeneratorConfig {
            preset: None,
            msps,
            edges,
            scenarios,
            demand_mean,
            ..GeneratorConfig::preset(Preset::S)
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.msps == 0 || self.edges == 0 || self.scenarios == 0 {
            return bad("provider, edge and scenario counts must all be >= 1");
        }
        if self.max_reserved == 0 {
            return bad("max_reserved must be >= 1");
        }
        if !(self.base_price > 0.0) || !self.base_price.is_finite() {
            return bad("base_price must be positive");
        }
        if !(self.demand_mean >= 0.0) || !self.demand_mean.is_finite() {
            return bad("demand_mean must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.similarity_low)
            || !(0.0..=1.0).contains(&self.similarity_high)
            || self.similarity_low > self.similarity_high
        {
            return bad("similarity bounds must satisfy 0 <= low <= high <= 1");
        }
        if let Some(step) = self.similarity_step {
            if !(step > 0.0) {
                return bad("similarity_step must be positive");
            }
        }
        Ok(())
    }
}

/// Draws an instance. A pure function of `(config, seed)`.
///
/// Demand for every (provider, scenario) pair is Poisson with mean
/// `demand_mean / (msps * scenarios)`, so the expected grand total matches the
/// configured mean.
pub fn generate_instance(config: &GeneratorConfig, seed: u64) -> Result<ProblemInstance> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let edges = (0..config.edges)
        .map(|id| {
            let jitter = if config.cost_jitter {
                rng.random_range(0.9..=1.1)
            } else {
                1.0
            };
            let base = config.base_price * jitter;
            EdgeDevice {
                id,
                memb_cost: MEMBERSHIP_RATIO * base,
                resv_trans_cost: base,
                ondem_trans_cost: ON_DEMAND_RATIO * base,
            }
        })
        .collect::<Vec<_>>();

    let pair_mean = config.demand_mean / (config.msps * config.scenarios) as f64;
    let poisson = if pair_mean > 0.0 {
        Some(Poisson::new(pair_mean).map_err(|e| Error::InvalidConfig(e.to_string()))?)
    } else {
        None
    };

    let (lo, hi) = (config.similarity_low, config.similarity_high);
    let draw_similarity = |rng: &mut ChaCha8Rng| {
        let v = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        match config.similarity_step {
            Some(step) => {
                let snapped = (v / step).round() * step;
                let lo_grid = (lo / step).ceil() * step;
                let hi_grid = (hi / step).floor() * step;
                snapped.clamp(lo_grid.min(hi), hi_grid.max(lo)).clamp(0.0, 1.0)
            }
            None => v,
        }
    };

    let mut raw_probs = Vec::with_capacity(config.scenarios);
    let mut scenarios = Vec::with_capacity(config.scenarios);
    for id in 0..config.scenarios {
        // Open interval so normalisation never divides by zero.
        let p: f64 = loop {
            let p = rng.random::<f64>();
            if p > 0.0 {
                break p;
            }
        };
        raw_probs.push(p);
        let demand = (0..config.msps)
            .map(|_| poisson.as_ref().map_or(0, |d| d.sample(&mut rng) as u64))
            .collect();
        let similarity = (0..config.msps)
            .map(|_| (0..config.edges).map(|_| draw_similarity(&mut rng)).collect())
            .collect();
        scenarios.push(Scenario {
            id,
            probability: 0.0,
            demand,
            similarity,
        });
    }
    let total: f64 = raw_probs.iter().sum();
    for (sc, p) in scenarios.iter_mut().zip(&raw_probs) {
        sc.probability = p / total;
    }

    let mut instance = ProblemInstance::new(config.msps, edges, scenarios, config.max_reserved, seed)?;
    instance.preset = config.preset.map(|p| p.to_string());
    Ok(instance)
}

#[derive(Serialize)]
struct InstanceFileRef<'a> {
    schema_version: u32,
    #[serde(flatten)]
    instance: &'a ProblemInstance,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: Option<u32>,
}

pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let doc = InstanceFileRef {
        schema_version: SCHEMA_VERSION,
        instance,
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_instance(&text, path)
}

pub(crate) fn json_error(path: &Path, e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    let (line, column, message) = (e.line(), e.column(), e.to_string());
    let path = path.to_path_buf();
    match e.classify() {
        Category::Data => Error::Schema {
            path,
            line,
            column,
            message,
        },
        _ => Error::Parse {
            path,
            line,
            column,
            message,
        },
    }
}

fn parse_instance(text: &str, path: &Path) -> Result<ProblemInstance> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    match probe.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(found) => {
            return Err(Error::SchemaVersion {
                found,
                expected: SCHEMA_VERSION,
            })
        }
        None => {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                line: 1,
                column: 1,
                message: "missing field `schema_version`".into(),
            })
        }
    }
    let file: InstanceFileBody = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    let instance = file.into_instance();
    instance.validate()?;
    Ok(instance)
}

#[derive(Deserialize)]
struct InstanceFileBody {
    msps: usize,
    edges: Vec<EdgeDevice>,
    scenarios: Vec<Scenario>,
    max_reserved: u64,
    seed: u64,
    #[serde(default)]
    preset: Option<String>,
}

impl InstanceFileBody {
    fn into_instance(self) -> ProblemInstance {
        ProblemInstance {
            msps: self.msps,
            edges: self.edges,
            scenarios: self.scenarios,
            max_reserved: self.max_reserved,
            seed: self.seed,
            preset: self.preset,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_counts() {
        let s = generate_instance(&GeneratorConfig::preset(Preset::S), 1).unwrap();
        assert_eq!((s.msps, s.num_edges(), s.num_scenarios()), (1, 5, 2));
        assert_eq!(s.preset.as_deref(), Some("S"));
        let m = generate_instance(&GeneratorConfig::preset(Preset::M), 1).unwrap();
        assert_eq!((m.msps, m.num_edges(), m.num_scenarios()), (2, 10, 3));
        let l = generate_instance(&GeneratorConfig::preset(Preset::L), 1).unwrap();
        assert_eq!((l.msps, l.num_edges(), l.num_scenarios()), (5, 25, 5));
        assert_eq!(GeneratorConfig::preset(Preset::M).demand_mean, 6000.0);
        assert_eq!(GeneratorConfig::preset(Preset::L).demand_mean, 15000.0);
    }

    #[test]
    fn same_seed_same_instance() {
        let cfg = GeneratorConfig {
            cost_jitter: true,
            ..GeneratorConfig::preset(Preset::M)
        };
        let a = generate_instance(&cfg, 42).unwrap();
        let b = generate_instance(&cfg, 42).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = generate_instance(&cfg, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn price_ratios_hold_with_jitter() {
        let cfg = GeneratorConfig {
            cost_jitter: true,
            base_price: 2.5,
            ..GeneratorConfig::preset(Preset::L)
        };
        let inst = generate_instance(&cfg, 7).unwrap();
        for e in &inst.edges {
            assert!((e.memb_cost / e.resv_trans_cost - 10.0).abs() < 1e-9);
            assert!((e.ondem_trans_cost / e.resv_trans_cost - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn similarity_and_probabilities_in_range() {
        for seed in 0..20 {
            let inst = generate_instance(&GeneratorConfig::preset(Preset::M), seed).unwrap();
            let sum: f64 = inst.scenarios.iter().map(|s| s.probability).sum();
            assert!((sum - 1.0).abs() < 1e-9);
            for s in &inst.scenarios {
                for v in s.similarity.iter().flatten() {
                    assert!((0.5..=1.0).contains(v));
                }
            }
        }
    }

    #[test]
    fn similarity_step_snaps_to_grid() {
        let cfg = GeneratorConfig {
            similarity_step: Some(0.5),
            ..GeneratorConfig::custom(1, 3, 2, 4.0)
        };
        let inst = generate_instance(&cfg, 3).unwrap();
        for v in inst.scenarios.iter().flat_map(|s| s.similarity.iter().flatten()) {
            assert!(*v == 0.5 || *v == 1.0, "{v}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!("XL".parse::<Preset>(), Err(Error::InvalidPreset(_))));
        let zero = GeneratorConfig::custom(0, 1, 1, 1.0);
        assert!(matches!(generate_instance(&zero, 1), Err(Error::InvalidConfig(_))));
        let price = GeneratorConfig {
            base_price: 0.0,
            ..GeneratorConfig::default()
        };
        assert!(matches!(generate_instance(&price, 1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn tiny_zero_cost_instance_is_valid() {
        let inst = ProblemInstance::new(
            1,
            vec![EdgeDevice {
                id: 0,
                memb_cost: 0.0,
                resv_trans_cost: 0.0,
                ondem_trans_cost: 0.0,
            }],
            vec![Scenario {
                id: 0,
                probability: 1.0,
                demand: vec![0],
                similarity: vec![vec![1.0]],
            }],
            1,
            0,
        )
        .unwrap();
        assert_eq!(inst.on_demand_cap(), 0);
    }

    #[test]
    fn roundtrip_and_validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let inst = generate_instance(&GeneratorConfig::preset(Preset::S), 1).unwrap();
        save_instance(&inst, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), inst);

        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("scenarios");
        fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
        let err = load_instance(&path).unwrap_err();
        assert!(matches!(err, Error::Schema { .. }), "{err}");
        assert!(err.to_string().contains("scenarios"));

        let mut v = serde_json::to_value(InstanceFileRef {
            schema_version: SCHEMA_VERSION,
            instance: &inst,
        })
        .unwrap();
        v["scenarios"][0]["probability"] = serde_json::json!(0.3);
        v["scenarios"][1]["probability"] = serde_json::json!(0.5);
        fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(load_instance(&path), Err(Error::Invariant(_))));

        v["schema_version"] = serde_json::json!(9);
        fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(
            load_instance(&path),
            Err(Error::SchemaVersion { found: 9, expected: 1 })
        ));

        fs::write(&path, "{\n  \"schema_version\": 1,\n  \"msps\": [}").unwrap();
        match load_instance(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }
}
