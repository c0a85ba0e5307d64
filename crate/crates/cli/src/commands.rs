use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use macstate::fme::{
    chain_rule_identities, eliminate_all, expansion_identities, region_bound_system, remove_redundant,
    scheme_constraint_system, simplify_with_identities, InequalitySystem, RateVar,
};
use macstate::oracle::{direct_info_terms, exhaustive_region, GridSpec};
use macstate::region::RegionKind;
use macstate::sim::{exact_error_micro, run_monte_carlo, SchemeRates, SimConfig, SimResult};
use macstate::{
    compute_region, compute_region_constrained, pair_bounds, region_distance, Channel, Factors, RatePair, RegionFrontier,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{read_json, Command, ExperimentConfig};
use crate::output::{is_json, json_sibling, write_atomic, write_json, Metadata};

/// Where the artifact goes: `--out` wins over the config's `out`.
pub struct Target(pub Option<PathBuf>);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionDoc {
    pub metadata: Metadata,
    pub frontier: RegionFrontier,
}

pub fn region(cfg: &ExperimentConfig, kind: RegionKind, out: &Target) -> Result<i32> {
    let ch = cfg.channel()?;
    let search = cfg.search();
    let frontier = match kind {
        RegionKind::Constrained => compute_region_constrained(&ch, &search)?,
        _ => compute_region(&ch, &search)?,
    };
    let command = if kind == RegionKind::Constrained { Command::RegionConstrained } else { Command::Region };
    let doc = RegionDoc { metadata: Metadata::new(command.name(), Some(search.seed)), frontier };
    match &out.0 {
        Some(p) if is_json(p) => write_json(p, &doc)?,
        Some(p) => {
            write_atomic(p, doc.frontier.to_csv().as_bytes())?;
            write_json(&json_sibling(p), &doc)?;
        }
        None => print!("{}", doc.frontier.to_csv()),
    }
    eprintln!(
        "{}: {} vertices, max R_c {:.6}, max R_1 {:.6}, max sum {:.6}",
        doc.frontier.channel_id,
        doc.frontier.points.len(),
        doc.frontier.max_rc(),
        doc.frontier.max_r1(),
        doc.frontier.max_sum_rate()
    );
    Ok(0)
}

#[derive(Serialize)]
struct FmeDoc {
    metadata: Metadata,
    eliminated: Vec<String>,
    input: String,
    projected: String,
    output: String,
    matches_region_bounds: bool,
}

pub fn fme(cfg: &ExperimentConfig, out: &Target) -> Result<i32> {
    let section = cfg.fme.clone().unwrap_or_default();
    let pre: InequalitySystem = match &section.system {
        Some(p) => {
            let p = cfg.resolve(p);
            fs::read_to_string(&p).with_context(|| format!("cannot read {}", p.display()))?.parse()?
        }
        None => scheme_constraint_system(),
    };
    let vars = section.eliminate.iter().map(|s| s.parse::<RateVar>()).collect::<macstate::Result<Vec<_>>>()?;
    let projected = eliminate_all(&pre, &vars);
    let post = if section.simplify {
        remove_redundant(&simplify_with_identities(&projected, &chain_rule_identities())?, &expansion_identities())?
    } else {
        projected.clone()
    };
    let matches = post.equivalent(&region_bound_system());
    println!("# input\n{pre}");
    println!("# after eliminating {}\n{post}", section.eliminate.join(", "));
    println!("# matches the two-bound region: {}", if matches { "yes" } else { "no" });
    if let Some(p) = &out.0 {
        if is_json(p) {
            let doc = FmeDoc {
                metadata: Metadata::new(Command::Fme.name(), None),
                eliminated: section.eliminate.clone(),
                input: pre.to_string(),
                projected: projected.to_string(),
                output: post.to_string(),
                matches_region_bounds: matches,
            };
            write_json(p, &doc)?;
        } else {
            write_atomic(p, post.to_string().as_bytes())?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimRecord {
    #[serde(flatten)]
    result: SimResult,
    exact_error: Option<f64>,
}

#[derive(Serialize)]
struct SimDoc {
    metadata: Metadata,
    runs: Vec<SimRecord>,
}

/// Turns the `sim` section into one config per sweep point.
fn sim_configs(cfg: &ExperimentConfig) -> Result<(Vec<SimConfig>, bool)> {
    let section = cfg.section(&cfg.sim, "sim")?;
    let Value::Object(mut map) = section.clone() else {
        bail!("`sim` must be an object");
    };
    let sweep: Option<Vec<SchemeRates>> = match map.remove("sweep") {
        Some(v) => Some(serde_json::from_value(v).map_err(|e| anyhow!("sim.sweep: {e}"))?),
        None => None,
    };
    let exact = match map.remove("exact") {
        Some(Value::Bool(b)) => b,
        Some(_) => bail!("sim.exact must be true or false"),
        None => false,
    };
    if let Some(Value::String(p)) = map.get("factors") {
        let f: Factors = read_json(&cfg.resolve(Path::new(p)))?;
        map.insert("factors".into(), serde_json::to_value(f)?);
    }
    map.insert("channel".into(), serde_json::to_value(cfg.channel()?)?);
    if let Some(seed) = cfg.seed {
        map.insert("seed".into(), seed.into());
    }
    let base: SimConfig = serde_json::from_value(Value::Object(map)).map_err(|e| anyhow!("sim section: {e}"))?;
    let mut runs = match sweep {
        Some(list) => list.into_iter().map(|rates| SimConfig { rates, ..base.clone() }).collect(),
        None => vec![base],
    };
    runs.sort_by(|a, b| a.rates.r_c.total_cmp(&b.rates.r_c).then(a.rates.r_1.total_cmp(&b.rates.r_1)));
    Ok((runs, exact))
}

pub fn sim(cfg: &ExperimentConfig, out: &Target) -> Result<i32> {
    let (runs, exact) = sim_configs(cfg)?;
    let mut records = Vec::with_capacity(runs.len());
    for run in &runs {
        let result = run_monte_carlo(run)?;
        let exact_error = if exact { Some(exact_error_micro(run)?) } else { None };
        eprintln!(
            "{:?} n={} R=({}, {}): error {:.4} [{:.4}, {:.4}]",
            result.scheme, result.n, result.rates.r_c, result.rates.r_1, result.error_rate, result.ci_low, result.ci_high
        );
        records.push(SimRecord { result, exact_error });
    }
    let mut csv = String::from(SimResult::csv_header());
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.result.csv_row());
        csv.push('\n');
    }
    let seed = runs.first().map(|r| r.seed);
    let doc = SimDoc { metadata: Metadata::new(Command::Sim.name(), seed), runs: records };
    match &out.0 {
        Some(p) if is_json(p) => write_json(p, &doc)?,
        Some(p) => {
            write_atomic(p, csv.as_bytes())?;
            write_json(&json_sibling(p), &doc)?;
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

/// A region artifact: either a full document or a bare frontier.
fn load_frontier(path: &Path) -> Result<RegionFrontier> {
    let v: Value = read_json(path)?;
    let v = match v {
        Value::Object(mut m) if m.contains_key("frontier") => m.remove("frontier").unwrap_or_default(),
        other => other,
    };
    serde_json::from_value(v).map_err(|e| anyhow!("{}: not a region frontier: {e}", path.display()))
}

#[derive(Serialize)]
struct CompareDoc {
    metadata: Metadata,
    a: String,
    b: String,
    channel_id: String,
    distance: f64,
    tol: f64,
    pass: bool,
}

/// Exit 0 when the two frontiers are within `tol`, 1 otherwise.
pub fn compare(cfg: &ExperimentConfig, out: &Target) -> Result<i32> {
    let c = cfg.section(&cfg.compare, "compare")?;
    let (pa, pb) = (cfg.resolve(&c.a), cfg.resolve(&c.b));
    let (a, b) = (load_frontier(&pa)?, load_frontier(&pb)?);
    let distance = region_distance(&a, &b)?;
    let pass = distance <= c.tol;
    println!("distance {distance:.6} tol {} {}", c.tol, if pass { "PASS" } else { "FAIL" });
    if let Some(p) = &out.0 {
        let doc = CompareDoc {
            metadata: Metadata::new(Command::Compare.name(), None),
            a: pa.display().to_string(),
            b: pb.display().to_string(),
            channel_id: a.channel_id.clone(),
            distance,
            tol: c.tol,
            pass,
        };
        write_json(p, &doc)?;
    }
    Ok(if pass { 0 } else { 1 })
}

/// One oracle-backed example.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "oracle", rename_all = "snake_case", deny_unknown_fields)]
enum Case {
    InfoTerms { channel: Channel, factors: Factors },
    ExhaustiveRegion { channel: Channel, grid: GridSpec },
    ExactError { sim: SimConfig },
}

#[derive(Serialize)]
struct Derived {
    case: String,
    oracle: &'static str,
    seed: Option<u64>,
    generated_at: String,
    values: Value,
}

fn derive_case(name: &str, case: Case) -> Result<Derived> {
    let (oracle, seed, values) = match case {
        Case::InfoTerms { channel, factors } => {
            let joint = factors.joint(&channel)?;
            let terms = direct_info_terms(&joint);
            let (r1, sum) = pair_bounds(&joint)?;
            let values = serde_json::json!({ "terms": terms, "r1_bound": r1, "sum_bound": sum });
            ("info_terms", None, values)
        }
        Case::ExhaustiveRegion { channel, grid } => {
            let f = exhaustive_region(&channel, &grid)?;
            let rates: Vec<RatePair> = f.rates();
            ("exhaustive_region", None, serde_json::json!({ "channel_id": f.channel_id, "frontier": rates }))
        }
        Case::ExactError { sim } => {
            let e = exact_error_micro(&sim)?;
            ("exact_error", Some(sim.seed), serde_json::json!({ "error": e }))
        }
    };
    Ok(Derived { case: name.into(), oracle, seed, generated_at: crate::output::timestamp(), values })
}

pub fn derive_examples(cfg: &ExperimentConfig, out: &Target) -> Result<i32> {
    let d = cfg.section(&cfg.derive, "derive")?;
    let corpus = cfg.resolve(&d.corpus);
    let out_dir = match (&out.0, &d.out) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => cfg.resolve(p),
        (None, None) => corpus.join("derived"),
    };
    let mut files: Vec<PathBuf> = fs::read_dir(&corpus)
        .with_context(|| format!("cannot read corpus {}", corpus.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_json(p))
        .collect();
    files.sort();
    let mut written = 0;
    for f in &files {
        let name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let case: Case = read_json(f)?;
        let derived = derive_case(&name, case)?;
        write_json(&out_dir.join(format!("{name}.json")), &derived)?;
        written += 1;
    }
    eprintln!("derived {} case(s) into {}", written, out_dir.display());
    Ok(0)
}
