//! Declarative experiment configs and the deterministic runner behind the
//! `run` verb.

use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::arithfun::{discrepancy, leveque_bound, Poly, TorusSample};
use crate::certificate::Certificate;
use crate::density::{banach_density_lower_bound, lower_density_profile, parse_pool, FolnerWindow};
use crate::error::{Error, Result};
use crate::finitefield::{empirical_threshold, FieldFamily, DEFAULT_THRESHOLD_BUDGET};
use crate::groundset::{GroundStructure, SetHandle};
use crate::largeness::{check_syndetic, ip_r_certificate, SyndeticOutcome};
use crate::patterns::{longest_ap, longest_gp};
use crate::registry::{load_set, parse_int};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    /// Cap on elements scanned by budgeted searches.
    #[serde(default)]
    pub max_elements: Option<u64>,
    /// Informational only.
    #[serde(default)]
    pub wall_clock_hint_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verb", deny_unknown_fields)]
pub enum Analysis {
    #[serde(rename = "density.lower_density_profile")]
    LowerDensityProfile { n_max: String },
    #[serde(rename = "density.banach")]
    Banach { window: String, pool: String },
    #[serde(rename = "patterns.longest_ap")]
    LongestAp { lo: String, hi: String },
    #[serde(rename = "patterns.longest_gp")]
    LongestGp { lo: String, hi: String },
    #[serde(rename = "largeness.ip_r")]
    IpR { r: usize, ground: String, bound: String },
    #[serde(rename = "largeness.syndetic")]
    Syndetic { f: Vec<String>, horizon: u64, ground: String },
    #[serde(rename = "ff.threshold")]
    FfThreshold {
        n: usize,
        k: u64,
        #[serde(default = "default_qmin")]
        qmin: u64,
        qmax: u64,
        #[serde(default = "default_family")]
        family: String,
    },
    #[serde(rename = "equidist.discrepancy")]
    Discrepancy { poly: String, count: u64, h: u64 },
}

fn default_qmin() -> u64 {
    2
}

fn default_family() -> String {
    "prime".into()
}

impl Analysis {
    pub fn verb(&self) -> &'static str {
        match self {
            Analysis::LowerDensityProfile { .. } => "density.lower_density_profile",
            Analysis::Banach { .. } => "density.banach",
            Analysis::LongestAp { .. } => "patterns.longest_ap",
            Analysis::LongestGp { .. } => "patterns.longest_gp",
            Analysis::IpR { .. } => "largeness.ip_r",
            Analysis::Syndetic { .. } => "largeness.syndetic",
            Analysis::FfThreshold { .. } => "ff.threshold",
            Analysis::Discrepancy { .. } => "equidist.discrepancy",
        }
    }

    fn needs_set(&self) -> bool {
        !matches!(self, Analysis::FfThreshold { .. } | Analysis::Discrepancy { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Descriptor or JSON set literal.
    #[serde(default)]
    pub set: Option<String>,
    pub analysis: Analysis,
    #[serde(default)]
    pub outputs: Option<Outputs>,
    #[serde(default)]
    pub budget: Option<Budget>,
}

const TOP_FIELDS: &[&str] = &["name", "set", "analysis", "outputs", "budget"];

impl ExperimentConfig {
    /// Parses and validates, reporting every offending field at once.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let mut problems = Vec::new();
        let obj = v.as_object().ok_or_else(|| Error::Parse("config must be a JSON object".into()))?;
        for k in obj.keys() {
            if !TOP_FIELDS.contains(&k.as_str()) {
                problems.push(format!("{k}: unknown field"));
            }
        }
        match obj.get("name") {
            Some(Value::String(s)) if !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || "-_.".contains(c)) => {}
            Some(_) => problems.push("name: must be a non-empty string of [A-Za-z0-9-_.]".into()),
            None => problems.push("name: missing".into()),
        }
        if let Some(s) = obj.get("set") {
            if !s.is_string() && !s.is_null() {
                problems.push("set: must be a string".into());
            }
        }
        for (key, sub) in [("outputs", vec!["dir"]), ("budget", vec!["max_elements", "wall_clock_hint_s"])] {
            if let Some(Value::Object(o)) = obj.get(key) {
                for k in o.keys() {
                    if !sub.contains(&k.as_str()) {
                        problems.push(format!("{key}.{k}: unknown field"));
                    }
                }
            } else if obj.get(key).is_some_and(|x| !x.is_null()) {
                problems.push(format!("{key}: must be an object"));
            }
        }
        match obj.get("analysis") {
            None => problems.push("analysis: missing".into()),
            Some(a) => {
                if let Err(e) = serde_json::from_value::<Analysis>(a.clone()) {
                    problems.push(format!("analysis: {e}"));
                }
            }
        }
        if problems.is_empty() {
            let cfg: ExperimentConfig = serde_json::from_value(v).map_err(|e| Error::Parse(format!("config: {e}")))?;
            if cfg.analysis.needs_set() && cfg.set.is_none() {
                problems.push(format!("set: required by {}", cfg.analysis.verb()));
            } else {
                return Ok(cfg);
            }
        }
        Err(Error::InvalidArgument(format!("invalid config:\n  {}", problems.join("\n  "))))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub verb: String,
    pub outcome: String,
    pub detail: String,
    pub horizon: String,
    pub artifacts: Vec<String>,
    pub module_version: String,
    pub elapsed_ms: u128,
}

struct Produced {
    artifact: (String, Vec<u8>),
    certificate: Option<Certificate>,
    horizon: String,
    detail: String,
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn budget_check(cfg: &ExperimentConfig, scanned: u64) -> Result<()> {
    if let Some(max) = cfg.budget.as_ref().and_then(|b| b.max_elements) {
        if scanned > max {
            return Err(Error::BudgetExceeded(format!("{scanned} elements requested, budget {max}")));
        }
    }
    Ok(())
}

fn span(lo: &BigInt, hi: &BigInt) -> u64 {
    use num_traits::ToPrimitive;
    (hi - lo).to_u64().unwrap_or(u64::MAX)
}

fn analyse(cfg: &ExperimentConfig, set: Option<&SetHandle>) -> Result<Produced> {
    let name = &cfg.name;
    let need = || set.ok_or_else(|| Error::InvalidArgument("set required".into()));
    Ok(match &cfg.analysis {
        Analysis::LowerDensityProfile { n_max } => {
            let n: u64 = parse_int(n_max)?.try_into().map_err(|_| Error::InvalidArgument("n_max".into()))?;
            budget_check(cfg, n)?;
            let p = lower_density_profile(need()?.as_ref(), n)?;
            let last = p.last().map(|x| x.ratio).unwrap_or(0.0);
            let rows = p
                .iter()
                .map(|x| vec![x.n.to_string(), x.count.to_string(), format!("{:.12}", x.ratio), format!("{:.12}", x.running_inf)])
                .collect();
            Produced {
                artifact: (format!("{name}.csv"), csv_bytes(&["n", "count", "ratio", "running_inf"], rows)?),
                certificate: None,
                horizon: n.to_string(),
                detail: format!("final ratio {last:.6}"),
            }
        }
        Analysis::Banach { window, pool } => {
            let w: FolnerWindow = window.parse()?;
            let pool = parse_pool(pool)?;
            budget_check(cfg, w.size()?.saturating_mul(pool.len() as u64))?;
            let e = banach_density_lower_bound(need()?.as_ref(), &w.multiset()?, &pool, &w.ground())?;
            let rows = vec![vec![w.to_string(), e.best_shift.to_string(), e.count.to_string(), e.size.to_string()]];
            Produced {
                artifact: (format!("{name}.csv"), csv_bytes(&["window_descriptor", "best_shift", "numerator", "denominator"], rows)?),
                certificate: None,
                horizon: format!("pool {}", e.shift_pool),
                detail: format!("delta >= {}/{} (lower bound over the pool)", e.count, e.size),
            }
        }
        Analysis::LongestAp { lo, hi } | Analysis::LongestGp { lo, hi } => {
            let (lo, hi) = (parse_int(lo)?, parse_int(hi)?);
            budget_check(cfg, span(&lo, &hi))?;
            let is_ap = matches!(cfg.analysis, Analysis::LongestAp { .. });
            let cert = if is_ap {
                longest_ap(need()?.as_ref(), &lo, &hi, 1)?.map(|c| c.certificate())
            } else {
                longest_gp(need()?.as_ref(), &lo, &hi)?.map(|c| c.certificate())
            };
            let detail = match &cert {
                Some(Certificate::Ap { start, step, length }) => format!("({start}, {step}, {length})"),
                Some(Certificate::Gp { start, ratio, length }) => format!("({start}, {ratio}, {length})"),
                _ => "absent".into(),
            };
            Produced {
                artifact: (format!("{name}.json"), json_bytes(&cert)),
                certificate: cert,
                horizon: format!("[{lo}, {hi})"),
                detail,
            }
        }
        Analysis::IpR { r, ground, bound } => {
            let g = GroundStructure::parse(ground)?;
            let bound = parse_int(bound)?;
            budget_check(cfg, span(&BigInt::from(0), &bound))?;
            let c = ip_r_certificate(need()?.as_ref(), *r, &g, &bound)?;
            let cert = c.as_ref().map(|c| c.certificate());
            Produced {
                detail: match &c {
                    Some(c) => format!("generators {:?}", c.generators().iter().map(|x| x.to_string()).collect::<Vec<_>>()),
                    None => "absent".into(),
                },
                artifact: (format!("{name}.json"), json_bytes(&cert)),
                certificate: cert,
                horizon: format!("generators <= {bound}"),
            }
        }
        Analysis::Syndetic { f, horizon, ground } => {
            let g = GroundStructure::parse(ground)?;
            let f = f.iter().map(|x| parse_int(x)).collect::<Result<Vec<_>>>()?;
            budget_check(cfg, horizon.saturating_mul(f.len() as u64))?;
            let out = check_syndetic(need()?.as_ref(), &f, *horizon, &g)?;
            let detail = match &out {
                SyndeticOutcome::Certified(_) => "certified".to_string(),
                SyndeticOutcome::Fails { n } => format!("fails at {n}"),
            };
            let cert = out.certificate();
            Produced { artifact: (format!("{name}.json"), json_bytes(&cert)), certificate: cert, horizon: horizon.to_string(), detail }
        }
        Analysis::FfThreshold { n, k, qmin, qmax, family } => {
            let fam: FieldFamily = family.parse()?;
            let budget = cfg.budget.as_ref().and_then(|b| b.max_elements).unwrap_or(DEFAULT_THRESHOLD_BUDGET);
            let r = empirical_threshold(*n, *k, *qmin, *qmax, fam, budget)?;
            Produced {
                detail: match r.threshold {
                    Some(t) => format!("threshold {t}"),
                    None => "no threshold within range".into(),
                },
                artifact: (format!("{name}.json"), json_bytes(&r)),
                certificate: None,
                horizon: format!("q in [{qmin}, {qmax}]"),
            }
        }
        Analysis::Discrepancy { poly, count, h } => {
            budget_check(cfg, *count)?;
            let p = Poly::parse(poly)?;
            let s = TorusSample::from_poly(&p, *count);
            let d = discrepancy(&s)?;
            let l = leveque_bound(&s, *h)?;
            let rows = vec![vec![count.to_string(), format!("{d:.12}"), format!("{:.12}", l.bound)]];
            Produced {
                artifact: (format!("{name}.csv"), csv_bytes(&["N", "D_N", "bound"], rows)?),
                certificate: None,
                horizon: count.to_string(),
                detail: format!("D_N = {d:.6}, LeVeque bound {:.6}", l.bound),
            }
        }
    })
}

/// Runs `cfg`, writing artifacts into `out_dir` (or the config's own
/// directory). Primary artifacts depend only on the config; timing lives in
/// the summary.
pub fn run(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunSummary> {
    let start = Instant::now();
    let dir: PathBuf = match (out_dir, &cfg.outputs) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(o)) => PathBuf::from(&o.dir),
        (None, None) => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let set = match &cfg.set {
        Some(s) => Some(load_set(s)?),
        None => None,
    };
    let mut artifacts = Vec::new();
    let (outcome, detail, horizon) = match analyse(cfg, set.as_ref()) {
        Ok(p) => {
            std::fs::write(dir.join(&p.artifact.0), &p.artifact.1)?;
            artifacts.push(p.artifact.0.clone());
            if let Some(c) = &p.certificate {
                let name = format!("{}.cert.json", cfg.name);
                std::fs::write(dir.join(&name), c.to_json() + "\n")?;
                artifacts.push(name);
            }
            ("conclusive".to_string(), p.detail, p.horizon)
        }
        Err(Error::BudgetExceeded(m)) => ("inconclusive".to_string(), format!("budget exhausted: {m}"), "partial".to_string()),
        Err(e) => return Err(e),
    };
    let summary = RunSummary {
        name: cfg.name.clone(),
        verb: cfg.analysis.verb().into(),
        outcome,
        detail,
        horizon,
        artifacts,
        module_version: format!("richset {}", env!("CARGO_PKG_VERSION")),
        elapsed_ms: start.elapsed().as_millis(),
    };
    std::fs::write(dir.join(format!("{}.summary.json", cfg.name)), json_bytes(&summary))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("richset-exp-{name}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn round_trip() {
        let text = r#"{"name":"ap","set":"window(evens, [0,10^4))","analysis":{"verb":"patterns.longest_ap","lo":"0","hi":"10^4"}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn validation_lists_every_field() {
        let text = r#"{"name":"","colour":1,"analysis":{"verb":"nope"},"budget":{"x":1}}"#;
        let err = ExperimentConfig::from_json(text).unwrap_err().to_string();
        for needle in ["colour", "name:", "analysis:", "budget.x"] {
            assert!(err.contains(needle), "{needle} missing from {err}");
        }
    }

    #[test]
    fn evens_ap_and_determinism() {
        let text = r#"{"name":"ap","set":"window(evens, [0,10^4))","analysis":{"verb":"patterns.longest_ap","lo":"0","hi":"10^4"}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let (d1, d2) = (tmp("a"), tmp("b"));
        let s = run(&cfg, Some(&d1)).unwrap();
        assert_eq!(s.detail, "(0, 2, 5000)");
        run(&cfg, Some(&d2)).unwrap();
        for f in ["ap.json", "ap.cert.json"] {
            assert_eq!(std::fs::read(d1.join(f)).unwrap(), std::fs::read(d2.join(f)).unwrap());
        }
        let cert = Certificate::from_json(&std::fs::read_to_string(d1.join("ap.cert.json")).unwrap()).unwrap();
        let set = load_set("window(evens, [0,10^4))").unwrap();
        assert!(crate::verify::verify(&cert, Some(set.as_ref())).unwrap().ok);
    }

    #[test]
    fn budget_marks_inconclusive() {
        let text = r#"{"name":"b","set":"evens","analysis":{"verb":"density.lower_density_profile","n_max":"10^6"},"budget":{"max_elements":1000}}"#;
        let s = run(&ExperimentConfig::from_json(text).unwrap(), Some(&tmp("c"))).unwrap();
        assert_eq!(s.outcome, "inconclusive");
    }
}
