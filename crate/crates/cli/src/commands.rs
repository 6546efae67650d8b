use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use ghz_core::additive::{count_quadruples, quadruple_bound_check, BoundCheck, QuadrupleMethod};
use ghz_core::extract::{full_pipeline, shift_fraction_report, PipelineConfig, PipelineInput};
use ghz_core::game::{
    best_response, constant_one_base, evaluate_value_exact, evaluate_value_mc, exact_game_value, make_strategy,
    naive_game_value, StrategyFamily, StrategyTriple, ValueReport, MAX_ENUM_DIM,
};
use ghz_core::io::{read_json, to_json, write_json, CrossFnFile, StrategyFile};
use ghz_core::seeds::derive_seed;
use ghz_core::z4::{count_mismatches, planted_cross, to_cross, to_cross_triple, CrossFn, CrossTriple, PlantedSpec, Role};
use ghz_core::{Error, Exact};

use crate::{Cli, Command, DecayMode, Failure, Family, Format, QuadMethod, Source, ValueMode};

/// Largest n for which the CLI materializes strategy tables.
pub const MAX_TABLE_DIM: usize = 20;
/// Decay curves switch from exact to sampled evaluation above this n.
const DECAY_EXACT_MAX: usize = 10;

type Res<T> = Result<T, Failure>;

fn core<T>(r: ghz_core::Result<T>) -> Res<T> {
    r.map_err(|e| match e.root() {
        Error::RetryCapExhausted { .. } => Failure::assertion(e.to_string()),
        _ => Failure::from(e),
    })
}

enum Loaded {
    Strategies(StrategyTriple),
    Planted(CrossTriple),
}

fn check_n(n: usize) -> Res<()> {
    if n == 0 {
        return Err(Failure::validation("--n must be at least 1"));
    }
    if n > MAX_TABLE_DIM {
        return Err(Failure::refusal(format!("n = {n} exceeds the table limit {MAX_TABLE_DIM}")));
    }
    Ok(())
}

fn family_strategy(family: Family, n: usize, seed: u64) -> Res<Loaded> {
    check_n(n)?;
    let fam = match family {
        Family::Constant0 => StrategyFamily::Constant(false),
        Family::Constant1 => StrategyFamily::Constant(true),
        Family::ProductConstant1 => StrategyFamily::Product(constant_one_base()),
        Family::Random => StrategyFamily::Random(seed),
        Family::Planted => unreachable!("handled by caller"),
    };
    Ok(Loaded::Strategies(core(make_strategy(&fam, n))?))
}

fn load(source: &Source, seed: u64) -> Res<Loaded> {
    if let Some(path) = &source.strategy {
        let st = core(core(read_json::<StrategyFile>(path))?.to_triple())?;
        if let Some(n) = source.n {
            if n != st.dim() {
                return Err(Failure::validation(format!("--n {n} disagrees with file dimension {}", st.dim())));
            }
        }
        return Ok(Loaded::Strategies(st));
    }
    let family = source.family.ok_or_else(|| Failure::validation("give --strategy or --family"))?;
    let n = source.n.ok_or_else(|| Failure::validation("--family needs --n"))?;
    if family == Family::Planted {
        check_n(n)?;
        let spec = core(PlantedSpec::random(n, source.corruption, seed))?;
        return Ok(Loaded::Planted(core(planted_cross(&spec))?.triple));
    }
    family_strategy(family, n, seed)
}

fn strategies_only(loaded: Loaded) -> Res<StrategyTriple> {
    match loaded {
        Loaded::Strategies(st) => Ok(st),
        Loaded::Planted(_) => Err(Failure::validation("the planted family has no strategy tables")),
    }
}

fn emit(cli: &Cli, text: &str) -> Res<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Res<String> {
    core(to_json(v))
}

fn ratio_cols(v: &Exact) -> String {
    format!("{},{}", v.numer(), v.denom())
}

pub fn run(cli: &Cli) -> Res<()> {
    match &cli.command {
        Command::Value { source, mode, samples } => cmd_value(cli, source, *mode, *samples),
        Command::Transform { source, out_dir, verify_f, verify_g, verify_h, samples } => cmd_transform(
            cli,
            source,
            out_dir.as_deref(),
            [verify_f.as_deref(), verify_g.as_deref(), verify_h.as_deref()],
            *samples,
        ),
        Command::Quadruples { source, function, method } => cmd_quadruples(cli, source, function.as_deref(), *method),
        Command::Extract { source, trials, w_retry_cap } => cmd_extract(cli, source, *trials, *w_retry_cap),
        Command::ShiftStructure { from_strategy, function, family, n, corruption } => {
            let source = Source { strategy: from_strategy.clone(), family: *family, n: *n, corruption: *corruption };
            cmd_shift_structure(cli, &source, function.as_deref())
        }
        Command::Decay { family, n_min, n_max, mode, samples } => {
            cmd_decay(cli, *family, *n_min, *n_max, *mode, *samples)
        }
    }
}

fn value_csv(r: &ValueReport) -> String {
    let mut s = String::from("n,method,value_num,value_den,estimate,ci_halfwidth\n");
    let method = serde_json::to_value(r.method).expect("unit enum").as_str().unwrap_or("").to_string();
    let exact = r.exact_value().map(ratio_cols).unwrap_or_else(|| ",".into());
    let ci = r.ci_halfwidth().map(|c| c.to_string()).unwrap_or_default();
    let _ = writeln!(s, "{},{method},{exact},{},{ci}", r.n, r.as_f64());
    s
}

fn cmd_value(cli: &Cli, source: &Source, mode: ValueMode, samples: u64) -> Res<()> {
    let report = match mode {
        ValueMode::Gamevalue | ValueMode::Naive => {
            if source.strategy.is_some() || source.family.is_some() {
                return Err(Failure::validation("game value modes take only --n"));
            }
            let n = source.n.ok_or_else(|| Failure::validation("--n is required"))?;
            if mode == ValueMode::Gamevalue {
                core(exact_game_value(n))?
            } else {
                core(naive_game_value(n))?
            }
        }
        _ => {
            let n = source.n;
            if mode != ValueMode::Mc {
                if let Some(n) = n.filter(|&n| n > MAX_ENUM_DIM) {
                    return Err(Failure::refusal(format!("exact evaluation is limited to n <= {MAX_ENUM_DIM}, got {n}")));
                }
            }
            let st = strategies_only(load(source, cli.seed)?)?;
            match mode {
                ValueMode::Exact => core(evaluate_value_exact(&st))?,
                ValueMode::Bestresponse => core(best_response(&st.f, &st.g))?.1,
                _ => core(evaluate_value_mc(&st, samples, cli.seed))?,
            }
        }
    };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&report)?,
        Format::Csv => value_csv(&report),
    };
    emit(cli, &text)
}

#[derive(Serialize)]
struct TransformSummary {
    n: usize,
    checked: u64,
    mismatches: u64,
    exhaustive: bool,
    replaced: Vec<&'static str>,
    written: Vec<&'static str>,
}

fn cmd_transform(
    cli: &Cli,
    source: &Source,
    out_dir: Option<&Path>,
    verify: [Option<&Path>; 3],
    samples: u64,
) -> Res<()> {
    let st = strategies_only(load(source, cli.seed)?)?;
    let mut ct = to_cross_triple(&st);
    let names = ["F.json", "G.json", "H.json"];
    let mut written = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::validation(format!("cannot create {}: {e}", dir.display())))?;
        for (name, f) in names.iter().zip([&ct.f, &ct.g, &ct.h]) {
            core(write_json(&dir.join(name), &CrossFnFile::from_fn(f)))?;
            written.push(*name);
        }
    }
    let mut replaced = Vec::new();
    for (i, path) in verify.iter().enumerate() {
        let Some(path) = path else { continue };
        let f = core(core(read_json::<CrossFnFile>(path))?.to_fn())?;
        if f.dim() != ct.dim() {
            return Err(Failure::validation(format!("{} has n = {}, expected {}", path.display(), f.dim(), ct.dim())));
        }
        match i {
            0 => ct.f = f,
            1 => ct.g = f,
            _ => ct.h = f,
        }
        replaced.push(["F", "G", "H"][i]);
    }
    let m = core(count_mismatches(&st, &ct, samples, cli.seed))?;
    let summary =
        TransformSummary { n: st.dim(), checked: m.checked, mismatches: m.mismatches, exhaustive: m.exhaustive, replaced, written };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&summary)?,
        Format::Csv => format!("n,checked,mismatches,exhaustive\n{},{},{},{}\n", summary.n, m.checked, m.mismatches, m.exhaustive),
    };
    emit(cli, &text)?;
    if m.mismatches > 0 {
        return Err(Failure::assertion(format!("mismatches: {}", m.mismatches)));
    }
    Ok(())
}

#[derive(Serialize)]
struct QuadrupleSummary {
    n: usize,
    #[serde(rename = "N")]
    domain: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    histogram: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    naive: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
    /// Only when a full triple is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<BoundCheck>,
}

fn cmd_quadruples(cli: &Cli, source: &Source, function: Option<&Path>, method: QuadMethod) -> Res<()> {
    let (f, triple): (CrossFn, Option<CrossTriple>) = match function {
        Some(path) => (core(core(read_json::<CrossFnFile>(path))?.to_fn())?, None),
        None => {
            let ct = match load(source, cli.seed)? {
                Loaded::Strategies(st) => to_cross_triple(&st),
                Loaded::Planted(ct) => ct,
            };
            (ct.f.clone(), Some(ct))
        }
    };
    let run = |m| core(count_quadruples(&f, m)).map(|r| r.count);
    let histogram = matches!(method, QuadMethod::Histogram | QuadMethod::Both).then(|| run(QuadrupleMethod::Histogram)).transpose()?;
    let naive = matches!(method, QuadMethod::Naive | QuadMethod::Both).then(|| run(QuadrupleMethod::Naive)).transpose()?;
    let agree = histogram.zip(naive).map(|(a, b)| a == b);
    let bound = match &triple {
        Some(ct) if ct.dim() <= MAX_ENUM_DIM => Some(core(quadruple_bound_check(ct))?),
        _ => None,
    };
    let summary = QuadrupleSummary { n: f.dim(), domain: 1 << f.dim(), histogram, naive, agree, bound };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&summary)?,
        Format::Csv => {
            let mut s = String::from("n,method,count\n");
            for (name, c) in [("histogram", histogram), ("naive", naive)] {
                if let Some(c) = c {
                    let _ = writeln!(s, "{},{name},{c}", summary.n);
                }
            }
            s
        }
    };
    emit(cli, &text)?;
    if agree == Some(false) {
        return Err(Failure::assertion("histogram and naive counts differ"));
    }
    if summary.bound.as_ref().is_some_and(|b| !b.holds) {
        return Err(Failure::assertion("quadruple count below η⁴N³"));
    }
    Ok(())
}

fn cmd_extract(cli: &Cli, source: &Source, trials: u64, w_retry_cap: usize) -> Res<()> {
    let input = match load(source, cli.seed)? {
        Loaded::Strategies(st) => PipelineInput::Strategies(st),
        Loaded::Planted(triple) => PipelineInput::Cross { triple, transform_derived: false },
    };
    let config = PipelineConfig { seed: cli.seed, freiman_trials: trials, w_retry_cap, ..PipelineConfig::default() };
    let r = core(full_pipeline(&input, &config))?;
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&r)?,
        Format::Csv => format!(
            "n,eta_num,eta_den,xi_num,xi_den,gamma_prime_size,doubling_C,t,Y_size,A_size,freiman_ok,shift_ok,shift_fraction_num,shift_fraction_den\n{},{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            ratio_cols(&r.eta),
            ratio_cols(&r.xi),
            r.gamma_prime_size,
            r.doubling_c,
            r.t,
            r.y_size,
            r.domain.len(),
            r.freiman_ok,
            r.shift_ok,
            ratio_cols(&r.shift_fraction.fraction),
        ),
    };
    emit(cli, &text)?;
    if !r.assertions_hold() {
        return Err(Failure::assertion(format!("failed assertions: {}", r.failed_assertions().join(", "))));
    }
    Ok(())
}

#[derive(Serialize)]
struct ShiftSummary {
    n: usize,
    transform_derived: bool,
    s_best: String,
    count: u64,
    fraction: Exact,
}

fn cmd_shift_structure(cli: &Cli, source: &Source, function: Option<&Path>) -> Res<()> {
    let (f, derived) = match function {
        Some(path) => (core(core(read_json::<CrossFnFile>(path))?.to_fn())?, false),
        None => match load(source, cli.seed)? {
            Loaded::Strategies(st) => (to_cross(&st.f, Role::Alice), true),
            Loaded::Planted(ct) => (ct.f, false),
        },
    };
    let r = shift_fraction_report(&f);
    let summary = ShiftSummary { n: f.dim(), transform_derived: derived, s_best: r.s_best.0, count: r.count, fraction: r.fraction };
    let text = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&summary)?,
        Format::Csv => format!(
            "n,s_best,count,fraction_num,fraction_den\n{},{},{},{}\n",
            summary.n,
            summary.s_best,
            summary.count,
            ratio_cols(&summary.fraction)
        ),
    };
    emit(cli, &text)?;
    if derived && summary.fraction != Exact::new(1, 1u64 << summary.n) {
        return Err(Failure::assertion("transform-derived F has more than one point in a residue class"));
    }
    Ok(())
}

#[derive(Serialize)]
struct DecayRow {
    n: usize,
    estimate: f64,
    ci: f64,
    reference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<Exact>,
}

pub const DECAY_HEADER: &str = "n,estimate,ci,reference";

fn cmd_decay(cli: &Cli, family: Family, n_min: usize, n_max: usize, mode: DecayMode, samples: u64) -> Res<()> {
    if family == Family::Planted {
        return Err(Failure::validation("the planted family has no strategy tables"));
    }
    if n_min == 0 || n_min > n_max {
        return Err(Failure::validation(format!("bad range {n_min}..={n_max}")));
    }
    check_n(n_max)?;
    if mode == DecayMode::Exact && n_max > MAX_ENUM_DIM {
        return Err(Failure::refusal(format!("exact evaluation is limited to n <= {MAX_ENUM_DIM}")));
    }
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        let st = strategies_only(family_strategy(family, n, cli.seed)?)?;
        let exact = match mode {
            DecayMode::Exact => true,
            DecayMode::Mc => false,
            DecayMode::Auto => n <= DECAY_EXACT_MAX,
        };
        let report = if exact {
            core(evaluate_value_exact(&st))?
        } else {
            core(evaluate_value_mc(&st, samples, derive_seed(cli.seed, n as u64)))?
        };
        rows.push(DecayRow {
            n,
            estimate: report.as_f64(),
            ci: report.ci_halfwidth().unwrap_or(0.0),
            reference: 0.75f64.powi(n as i32),
            exact: report.exact_value().cloned(),
        });
    }
    let text = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => json(&rows)?,
        Format::Csv => {
            let mut s = format!("{DECAY_HEADER}\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{},{}", r.n, r.estimate, r.ci, r.reference);
            }
            s
        }
    };
    emit(cli, &text)
}
