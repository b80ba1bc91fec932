use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use clubforge::constructions::{self, ConstructionName, ConstructionSpec, SChoice};
use clubforge::field::make_tower;
use clubforge::linset::{self, AnalyzeOptions, SubspaceU, DEFAULT_BUDGET};
use clubforge::rmcode::{self, RankMetricCode, WeightDistribution, WeightMethod};
use clubforge::search::{self, Anchor, SearchSpec, Target};
use clubforge::Error;

use crate::error::CliError;
use crate::io::{self, Output};
use crate::{AnalyzeArgs, BoundsArgs, CodeCommand, Command, ConstructArgs, MacwilliamsArgs, SMode, SearchArgs};

pub enum Body {
    Object(Map<String, Value>),
    Lines(Vec<Value>),
}

pub struct Emit {
    pub body: Body,
    /// Printed after the body; used by `verify` to report a failed battery.
    pub failure: Option<CliError>,
}

impl From<Output> for Emit {
    fn from(o: Output) -> Self {
        Emit { body: Body::Object(o.0), failure: None }
    }
}

const SAMPLE_STEPS: u64 = 1_000_000;

/// Iteration cap, overridable through CLUBFORGE_BUDGET.
pub fn budget() -> Result<u64, CliError> {
    match std::env::var("CLUBFORGE_BUDGET") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Parse(format!("CLUBFORGE_BUDGET: not an integer: {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

pub fn run(cmd: &Command) -> Result<Emit, CliError> {
    match cmd {
        Command::Construct(a) => construct(a).map(Into::into),
        Command::Analyze(a) => analyze(a).map(Into::into),
        Command::Dual { file } => {
            let u = load_subspace(file)?;
            Ok(Output::default().with("subspace", &linset::dual_perp(&u)).into())
        }
        Command::Code(c) => code(c).map(Into::into),
        Command::Macwilliams(a) => macwilliams(a).map(Into::into),
        Command::Bounds(a) => bounds(a).map(Into::into),
        Command::Search(a) => run_search(a),
        Command::Verify(a) => verify(a),
    }
}

fn load_subspace(path: &Path) -> Result<SubspaceU, CliError> {
    let json: linset::SubspaceJson = io::load(path, "subspace")?;
    Ok(SubspaceU::from_json(&json, None)?)
}

fn parse_name(name: &str) -> Result<ConstructionName, CliError> {
    io::parse(Value::String(name.into()), "construction name")
}

fn construction_spec(a: &ConstructArgs) -> Result<ConstructionSpec, CliError> {
    let mut spec = match (&a.spec, &a.name) {
        (Some(path), _) => io::load::<ConstructionSpec>(path, "spec")?,
        (None, Some(name)) => {
            let p = a.p.ok_or_else(|| CliError::Parse("--p is required".into()))?;
            let m = a.m.ok_or_else(|| CliError::Parse("--m is required".into()))?;
            ConstructionSpec::new(parse_name(name)?, p, a.e.unwrap_or(1), m)
        }
        (None, None) => return Err(CliError::Parse("give a construction name or --spec".into())),
    };
    if let (Some(_), Some(name)) = (&a.spec, &a.name) {
        spec.name = parse_name(name)?;
    }
    macro_rules! set {
        ($($f:ident),*) => { $( if a.$f.is_some() { spec.$f = a.$f.clone(); } )* };
    }
    if let Some(p) = a.p {
        spec.p = p;
    }
    if let Some(e) = a.e {
        spec.e = e;
    }
    if let Some(m) = a.m {
        spec.m = m;
    }
    set!(k, i, s, n0, delta, xi, mu);
    if let Some(mode) = a.s_mode {
        spec.s_choice = Some(match mode {
            SMode::TraceKernel => SChoice::TraceKernelExtension,
            SMode::Random => SChoice::SeededRandom { seed: a.seed.unwrap_or(0) },
            SMode::Explicit => SChoice::ExplicitBasis {
                basis: a.s_basis.clone().ok_or_else(|| CliError::Parse("--s-mode explicit needs --s-basis".into()))?,
            },
        });
    }
    if let Some(path) = &a.part {
        spec.scattered_part = Some(io::load(path, "subspace")?);
    }
    if let Some(seed) = a.sample_part {
        let k = spec.k.ok_or_else(|| CliError::Parse("--sample-part needs --k".into()))?;
        let part_k = match spec.name {
            ConstructionName::Cone => k.checked_sub(1),
            ConstructionName::LiftEven => k.checked_sub(3),
            other => return Err(CliError::Validation(format!("{other} takes no scattered part"))),
        }
        .filter(|&d| d > 0)
        .ok_or_else(|| CliError::Validation(format!("k = {k} is too small")))?;
        let tower = Arc::new(make_tower(spec.p, spec.e, spec.m)?);
        let rank = part_k * spec.m as usize / 2;
        let part = search::sample_scattered(&tower, part_k, rank, seed, SAMPLE_STEPS)?;
        spec.scattered_part = Some(part.to_json());
    }
    Ok(spec)
}

fn summary(report: &linset::LinearSetReport) -> String {
    format!("{}, rank {}, size {}", report.classification, report.rank, report.size)
}

fn construct(a: &ConstructArgs) -> Result<Output, CliError> {
    let spec = construction_spec(a)?;
    let c = constructions::build(&spec)?;
    if let Some(path) = &a.out {
        io::write_file(path, &c.subspace)?;
    }
    Ok(Output::default()
        .with("spec", &spec)
        .with("summary", &summary(&c.report.analysis))
        .with("subspace", &c.subspace)
        .with("report", &c.report))
}

fn analyze(a: &AnalyzeArgs) -> Result<Output, CliError> {
    let u = load_subspace(&a.file)?;
    if u.rank() == 0 {
        return Err(CliError::Validation("subspace has rank 0; its linear set is empty".into()));
    }
    let opts = AnalyzeOptions {
        strategy: a.strategy.into(),
        with_hyperplanes: a.hyperplanes,
        spectrum_method: a.spectrum_method.into(),
        budget: budget()?,
        parallel: true,
    };
    let report = linset::analyze(&u, &opts)?;
    let identities = linset::verify_weight_identities(&report, u.tower().q(), u.rank());
    let mut out = Output::default().with("summary", &summary(&report)).with("report", &report).with("identities", &identities);
    if let Some(other) = &a.compare {
        let v = load_subspace(other)?;
        out = out.with("comparison", &search::spectrum_compare(&u, &v, opts.budget)?);
    }
    Ok(out)
}

/// A code given directly, or the code of a given subspace.
fn load_code(path: &Path) -> Result<RankMetricCode, CliError> {
    let value = io::unwrap_key(io::read_value(path)?, "code");
    if value.get("G").is_some() {
        let json: rmcode::CodeJson = io::parse(value, "code")?;
        return Ok(RankMetricCode::from_json(&json)?);
    }
    let json: linset::SubspaceJson = io::parse(io::unwrap_key(value, "subspace"), "subspace")?;
    Ok(RankMetricCode::from_system(&SubspaceU::from_json(&json, None)?)?)
}

fn code(c: &CodeCommand) -> Result<Output, CliError> {
    match c {
        CodeCommand::Build { file } => {
            let u = load_subspace(file)?;
            Ok(Output::default().with("code", &RankMetricCode::from_system(&u)?))
        }
        CodeCommand::Weights { file, method } => {
            let code = load_code(file)?;
            let b = budget()?;
            let dist = rmcode::weight_distribution(&code, (*method).into(), b, true)?;
            let tag = rmcode::three_weight_classify(&code, &dist, b)?;
            Ok(Output::default().with("distribution", &dist).with("min_distance", &dist.min_distance()).with("tag", &tag))
        }
        CodeCommand::Dual { file } => {
            let code = load_code(file)?;
            Ok(Output::default().with("code", &rmcode::dual_code(&code)))
        }
    }
}

fn macwilliams(a: &MacwilliamsArgs) -> Result<Output, CliError> {
    let dist = match (&a.a, &a.dist) {
        (Some(list), _) => {
            let counts = list
                .iter()
                .map(|s| s.trim().parse::<BigUint>().map_err(|_| CliError::Parse(format!("--a: not a count: {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            WeightDistribution::from_counts(counts)
        }
        (None, Some(path)) => io::load(path, "distribution")?,
        (None, None) => return Err(CliError::Parse("give --a or --dist".into())),
    };
    if dist.m() != a.m {
        return Err(CliError::Validation(format!("distribution has {} entries, expected m + 1 = {}", dist.counts().len(), a.m + 1)));
    }
    let dual = rmcode::macwilliams_transform(&dist, a.n, a.k, a.m, a.q)?;
    Ok(Output::default().with("distribution", &dual))
}

fn bounds(a: &BoundsArgs) -> Result<Output, CliError> {
    let rb = rmcode::club_rank_bound(a.q, a.m, a.k, a.i)?;
    let mut out = Output::default().with("bound", &rb.bound).with("case", &rb.case);
    if let Some(n) = a.n {
        out = out
            .with("b2_admissible", &rmcode::b2_admissibility(a.q, a.m, a.k, a.i, n)?)
            .with("b2", &rmcode::b2_value(a.q, a.m, a.k, a.i, n)?.to_string());
    }
    Ok(out)
}

fn parse_target(s: &str) -> Result<Target, CliError> {
    match s {
        "any-club" => Ok(Target::AnyClub),
        "scattered" => Ok(Target::Scattered),
        "census" => Ok(Target::Census),
        _ => s
            .strip_prefix("club:")
            .and_then(|i| i.parse().ok())
            .map(|index| Target::Club { index })
            .ok_or_else(|| CliError::Parse(format!("unknown target {s:?}; use club:<i>, any-club, scattered or census"))),
    }
}

fn search_spec(a: &SearchArgs) -> Result<SearchSpec, CliError> {
    let mut spec = match &a.spec {
        Some(path) => io::load::<SearchSpec>(path, "spec")?,
        None => {
            let need = |v: Option<usize>, f: &str| v.ok_or_else(|| CliError::Parse(format!("--{f} is required")));
            let p = a.p.ok_or_else(|| CliError::Parse("--p is required".into()))?;
            let m = a.m.ok_or_else(|| CliError::Parse("--m is required".into()))?;
            let target = parse_target(a.target.as_deref().unwrap_or("census"))?;
            let mut s = SearchSpec::new(p, a.e.unwrap_or(1), m, need(a.k, "k")?, need(a.n, "n")?, target);
            s.budget = budget()?;
            s
        }
    };
    if a.spec.is_some() {
        if let Some(p) = a.p {
            spec.p = p;
        }
        if let Some(e) = a.e {
            spec.e = e;
        }
        if let Some(m) = a.m {
            spec.m = m;
        }
        if let Some(k) = a.k {
            spec.k = k;
        }
        if let Some(n) = a.n {
            spec.n = n;
        }
        if let Some(t) = &a.target {
            spec.target = parse_target(t)?;
        }
    }
    if let Some(i) = a.anchor_i {
        spec.anchor = Some(Anchor { i, s_choice: SChoice::default() });
    }
    if let Some(s) = a.strategy {
        spec.strategy = s.into();
    }
    if let Some(b) = a.budget {
        spec.budget = b;
    }
    if a.big {
        spec.budget = u64::MAX;
    }
    if let Some(c) = a.hit_cap {
        spec.hit_cap = c;
    }
    Ok(spec)
}

fn run_search(a: &SearchArgs) -> Result<Emit, CliError> {
    let spec = search_spec(a)?;
    let result = search::run_search(&spec)?;
    let mut lines: Vec<Value> = result.found.iter().map(|h| json!({ "hit": h })).collect();
    lines.push(json!({
        "scanned": result.scanned,
        "census": result.census,
        "hits": result.found.len(),
        "hits_truncated": result.hits_truncated,
    }));
    Ok(Emit { body: Body::Lines(lines), failure: None })
}

struct Battery(Vec<Value>);

impl Battery {
    fn record(&mut self, name: &str, holds: bool, detail: Value) {
        self.0.push(json!({ "name": name, "holds": holds, "detail": detail }));
    }

    fn skip(&mut self, name: &str, why: String) {
        self.0.push(json!({ "name": name, "skipped": why }));
    }

    fn failures(&self) -> Vec<String> {
        self.0.iter().filter(|c| c["holds"] == Value::Bool(false)).map(|c| c["name"].as_str().unwrap_or_default().to_string()).collect()
    }
}

fn verify(a: &ConstructArgs) -> Result<Emit, CliError> {
    let spec = construction_spec(a)?;
    let b = budget()?;
    let c = constructions::build(&spec)?;
    let u = &c.subspace;
    let mut battery = Battery(Vec::new());

    let failed: Vec<&str> = c.report.checks.iter().filter(|ch| !ch.holds).map(|ch| ch.name.as_str()).collect();
    battery.record("self_checks", c.report.holds, json!({ "failed": failed }));

    let reloaded = SubspaceU::from_json(&u.to_json(), None)?;
    let opts = AnalyzeOptions { with_hyperplanes: c.report.analysis.hyperplane_spectrum.is_some(), budget: b, ..Default::default() };
    let again = linset::analyze(&reloaded, &opts)?;
    battery.record("json_round_trip", reloaded == *u && again == c.report.analysis, Value::Null);

    let code = match RankMetricCode::from_system(u) {
        Ok(code) => code,
        Err(e) => {
            battery.record("code_from_system", false, json!(e.to_string()));
            return finish(spec.name, battery);
        }
    };
    let back = code.system()?;
    battery.record("code_round_trip", back == *u, Value::Null);

    let geometric = rmcode::weight_distribution(&code, WeightMethod::Geometric, b, true)?;
    match rmcode::weight_distribution(&code, WeightMethod::Enumerate, b, true) {
        Ok(enumerated) => battery.record("weights_agree", enumerated == geometric, json!({ "distribution": geometric })),
        Err(e @ (Error::BudgetExceeded { .. } | Error::SizeBudgetExceeded { .. })) => battery.skip("weights_agree", e.to_string()),
        Err(e) => return Err(e.into()),
    }
    if let Some(expected) = &c.report.code_distribution {
        battery.record("reported_distribution", *expected == geometric, Value::Null);
    }

    let t = code.tower();
    let dual = rmcode::dual_code(&code);
    let transformed = rmcode::macwilliams_transform(&geometric, code.n(), code.k(), t.m() as usize, t.q())?;
    match rmcode::weight_distribution(&dual, WeightMethod::Enumerate, b, true) {
        Ok(direct) => battery.record("macwilliams", direct == transformed, json!({ "dual_distribution": direct })),
        Err(e @ (Error::BudgetExceeded { .. } | Error::SizeBudgetExceeded { .. })) => battery.skip("macwilliams", e.to_string()),
        Err(e) => return Err(e.into()),
    }
    let biduality = rmcode::macwilliams_transform(&transformed, code.n(), code.n() - code.k(), t.m() as usize, t.q())?;
    battery.record("macwilliams_biduality", biduality == geometric, Value::Null);

    finish(spec.name, battery)
}

fn finish(name: ConstructionName, battery: Battery) -> Result<Emit, CliError> {
    let failures = battery.failures();
    let holds = failures.is_empty();
    let out = Output::default().with("construction", &name).with("checks", &battery.0).with("holds", &holds);
    let failure = (!holds).then(|| CliError::VerifyFailed(format!("failed checks: {}", failures.join(", "))));
    Ok(Emit { body: Body::Object(out.0), failure })
}
