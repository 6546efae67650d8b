//! The full chain from a strategy triple (or any cross triple) to the
//! shift-structure report.

use serde::{Deserialize, Serialize};

use crate::additive::{count_quadruples, freiman_check, quadruple_bound, FreimanMode, FreimanOutcome, QuadrupleMethod, MAX_DENSE_DIM};
use crate::error::{check_dim, Error, Result};
use crate::exact::Exact;
use crate::extract::bsg::{bsg_extract, graph_of, graph_points, BsgConfig};
use crate::extract::gowers::{
    choose_a, choose_w, constraint_count, measured_c, y_from_ladder, yx_law_holds, ParityConstraintSystem,
    SumsetLadder,
};
use crate::extract::shift::{grow_freiman_domain, shift_extract, shift_fraction_report, ShiftFraction};
use crate::game::StrategyTriple;
use crate::io::{hex_encode, GroupSetFile};
use crate::seeds::derive_seed;
use crate::additive::PartialMap;
use crate::z4::{cross_success, to_cross_triple, CrossTriple};

pub const SCHEMA_VERSION: u32 = 1;
pub const FREIMAN_ORDER: usize = 8;
/// Exponent of η in the shift-mass lower bound, and the one quoted for the
/// overall result.
pub const EXPONENT_SHIFT_BOUND: u32 = 1028;
pub const EXPONENT_HEADLINE: u32 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub freiman_trials: u64,
    pub w_retry_cap: usize,
    pub bsg: BsgConfig,
    /// The Yₓ law is checked up to this dimension and reported as null above.
    pub yx_law_max_dim: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { seed: 0, freiman_trials: 100_000, w_retry_cap: 64, bsg: BsgConfig::default(), yx_law_max_dim: 6 }
    }
}

#[derive(Clone, Debug)]
pub enum PipelineInput {
    Strategies(StrategyTriple),
    /// A cross triple given directly; it is transform-derived when it came
    /// from a strategy triple.
    Cross { triple: CrossTriple, transform_derived: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub bsg: u64,
    pub w: u64,
    pub coset_check: u64,
    pub grow: u64,
    pub freiman: u64,
}

impl Seeds {
    pub fn derive(master: u64) -> Self {
        Seeds {
            master,
            bsg: derive_seed(master, 1),
            w: derive_seed(master, 2),
            coset_check: derive_seed(master, 3),
            grow: derive_seed(master, 4),
            freiman: derive_seed(master, 5),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exponents {
    pub shift_bound: u32,
    pub headline: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsetSizes {
    pub d4: usize,
    pub d8: usize,
    pub d16: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub schema_version: u32,
    pub n: usize,
    pub transform_derived: bool,
    pub config: PipelineConfig,
    pub seeds: Seeds,
    pub exponents: Exponents,
    pub eta: Exact,
    pub quadruple_count: u64,
    pub quadruple_bound: Exact,
    pub xi: Exact,
    pub gamma_prime: GroupSetFile,
    pub gamma_prime_size: usize,
    pub gamma_prime_diff_size: usize,
    pub gamma_prime_ratio: Exact,
    pub bsg_candidates: usize,
    pub sumset_sizes: SumsetSizes,
    #[serde(rename = "doubling_C")]
    pub doubling_c: u64,
    pub t: usize,
    #[serde(rename = "Y_size")]
    pub y_size: usize,
    pub w: ParityConstraintSystem,
    pub w_attempts: usize,
    pub chosen_a: String,
    pub gamma_a_size: usize,
    pub coset_count: usize,
    pub coset_domain: Vec<String>,
    pub coset_freiman: FreimanOutcome,
    #[serde(rename = "A")]
    pub domain: Vec<String>,
    pub freiman_ok: bool,
    pub freiman: FreimanOutcome,
    pub freiman_exact_order8: bool,
    pub freiman_exact_order4: bool,
    pub shift_s: String,
    pub shift_ok: bool,
    pub shift_fraction: ShiftFraction,
    pub yx_law: Option<bool>,
    pub assertions: Vec<Assertion>,
}

impl ExtractionReport {
    pub fn assertions_hold(&self) -> bool {
        self.assertions.iter().all(|a| a.holds)
    }

    pub fn failed_assertions(&self) -> Vec<&str> {
        self.assertions.iter().filter(|a| !a.holds).map(|a| a.name.as_str()).collect()
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

pub fn full_pipeline(input: &PipelineInput, config: &PipelineConfig) -> Result<ExtractionReport> {
    let (ct, transform_derived) = match input {
        PipelineInput::Strategies(st) => (to_cross_triple(st), true),
        PipelineInput::Cross { triple, transform_derived } => (triple.clone(), *transform_derived),
    };
    let n = ct.dim();
    stage("dimension", check_dim("extraction pipeline", n, MAX_DENSE_DIM))?;
    let seeds = Seeds::derive(config.seed);
    let size = 1u64 << n;

    let eta = stage("success probability", cross_success(&ct))?
        .exact_value()
        .cloned()
        .ok_or_else(|| Error::invalid("exact success probability unavailable"))?;
    let count = stage("quadruples", count_quadruples(&ct.f, QuadrupleMethod::Histogram))?.count;
    let bound = quadruple_bound(&eta, n);
    let xi = Exact::new(count, size * size * size);

    let gamma = graph_of(&ct.f);
    let bsg = stage("bsg", bsg_extract(&gamma, &xi, seeds.bsg, &config.bsg))?;
    let gp = &bsg.gamma_prime;

    let ladder = stage("sumset ladder", SumsetLadder::new(gp))?;
    let c = measured_c(&ladder, gp.len());
    let t = constraint_count(c);
    let y = y_from_ladder(&ladder);
    let wc = stage("choose W", choose_w(&y, n, t, seeds.w, config.w_retry_cap))?;
    let y_meets_w_trivially = y.iter().all(|&v| v.is_zero() || !wc.w.contains(v)) && y.iter().any(|v| v.is_zero());
    let coset = stage("choose a", choose_a(gp, &wc.w))?;

    let coset_points = graph_points(&coset.gamma_a);
    let coset_map = stage("coset map", PartialMap::new(n, coset_points.iter().copied()))?;
    let coset_freiman = stage(
        "coset Freiman check",
        freiman_check(
            &coset_map,
            FREIMAN_ORDER,
            FreimanMode::Randomized { seed: seeds.coset_check, trials: config.freiman_trials },
        ),
    )?;

    // coset domain first, then the rest of Γ′, then everything else
    let candidates = coset_points
        .iter()
        .map(|p| p.0)
        .chain(graph_points(gp).into_iter().map(|p| p.0))
        .chain(0..size as u32);
    let phi = grow_freiman_domain(&ct.f, candidates, FREIMAN_ORDER, seeds.grow);
    let freiman = stage(
        "Freiman check",
        freiman_check(&phi, FREIMAN_ORDER, FreimanMode::Randomized { seed: seeds.freiman, trials: config.freiman_trials }),
    )?;
    let exact8 = stage("exact Freiman check", freiman_check(&phi, FREIMAN_ORDER, FreimanMode::Exact))?.ok;
    let exact4 = stage("exact Freiman check", freiman_check(&phi, 4, FreimanMode::Exact))?.ok;
    let shift = stage("shift", shift_extract(&phi))?;
    let fraction = shift_fraction_report(&ct.f);
    let yx_law = (n <= config.yx_law_max_dim).then(|| yx_law_holds(&ladder, &y));

    let mut assertions = vec![
        Assertion { name: "quadruple_bound".into(), holds: Exact::from_int(count) >= bound },
        Assertion { name: "y_meets_w_only_in_zero".into(), holds: y_meets_w_trivially },
        Assertion { name: "coset_pigeonhole".into(), holds: coset.pigeonhole_holds },
        Assertion { name: "freiman_implies_shift".into(), holds: !freiman.ok || shift.ok },
        Assertion { name: "order4_implies_shift".into(), holds: !exact4 || shift.ok },
    ];
    if transform_derived {
        assertions.push(Assertion {
            name: "unique_residue_class".into(),
            holds: fraction.fraction == Exact::new(1, size),
        });
    }

    Ok(ExtractionReport {
        schema_version: SCHEMA_VERSION,
        n,
        transform_derived,
        config: config.clone(),
        seeds,
        exponents: Exponents { shift_bound: EXPONENT_SHIFT_BOUND, headline: EXPONENT_HEADLINE },
        eta,
        quadruple_count: count,
        quadruple_bound: bound,
        xi,
        gamma_prime: GroupSetFile::from_set(gp),
        gamma_prime_size: gp.len(),
        gamma_prime_diff_size: bsg.diff_size,
        gamma_prime_ratio: bsg.ratio,
        bsg_candidates: bsg.candidates,
        sumset_sizes: SumsetSizes { d4: ladder.d4.len(), d8: ladder.d8.len(), d16: ladder.d16.len() },
        doubling_c: c,
        t,
        y_size: y.len(),
        w: wc.w,
        w_attempts: wc.attempts,
        chosen_a: coset.a.to_base4(),
        gamma_a_size: coset.gamma_a.len(),
        coset_count: coset.coset_count,
        coset_domain: coset_points.iter().map(|p| hex_encode(n, p.0)).collect(),
        coset_freiman,
        domain: phi.domain().into_iter().map(|x| hex_encode(n, x)).collect(),
        freiman_ok: freiman.ok,
        freiman,
        freiman_exact_order8: exact8,
        freiman_exact_order4: exact4,
        shift_s: shift.s.to_base4(),
        shift_ok: shift.ok,
        shift_fraction: fraction,
        yx_law,
        assertions,
    })
}
