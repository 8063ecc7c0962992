use ftq_core::bounds::{self, formulas, BoundParams, ConstraintVariant, EpsilonAllocation};
use ftq_core::channels::{load_channel, NoiseFamily, QuantumChannel};
use ftq_core::coherent::{maximize_coherent_information, maximize_renyi_coherent_information, OptimizerOptions};
use ftq_core::linalg::DensityMatrix;
use ftq_core::threshold::{find_renyi_threshold, find_threshold, sweep_family_with};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{capacity_csv, sweep_csv, Document};
use crate::{BoundArgs, BoundKind, ChannelArgs, CliError, Command, Constraint, Format, OptimizerArgs};

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize, Default)]
struct Provenance {
    seed: Option<u64>,
    restarts: Option<usize>,
    max_iters: Option<usize>,
    converged: Option<Vec<bool>>,
    formula: Option<&'static str>,
    heuristic: bool,
}

impl Provenance {
    fn optimizer(opt: &OptimizerArgs) -> Self {
        Self {
            seed: Some(opt.seed),
            restarts: Some(opt.restarts),
            max_iters: Some(opt.max_iters),
            ..Self::default()
        }
    }
}

#[derive(Serialize)]
struct Envelope {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    inputs: Value,
    result: Value,
    provenance: Provenance,
    /// Wall-clock time of the run; the only field that varies between identical runs.
    timestamp: String,
}

fn envelope(command: &'static str, inputs: Value, result: Value, provenance: Provenance) -> CliResult<Document> {
    let env = Envelope {
        tool: "ftq",
        version: env!("CARGO_PKG_VERSION"),
        command,
        inputs,
        result,
        provenance,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    Ok(Document::Json(to_value(&env)?))
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    serde_json::to_value(v).map_err(|e| CliError::numerical(format!("cannot serialize result: {e}")))
}

fn core<T>(flag: Option<&str>, r: ftq_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::from_core(flag, e))
}

fn require<T: Copy>(value: Option<T>, flag: &str, kind: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::validation(format!("{flag}: required by `{kind}`")))
}

pub fn execute(command: &Command, format: Format) -> CliResult<Document> {
    let csv_ok = matches!(command, Command::Sweep { .. } | Command::CompareCapacity { .. });
    if format == Format::Csv && !csv_ok {
        return Err(CliError::validation(
            "--format: csv output is available for `sweep` and `compare-capacity` only",
        ));
    }
    match command {
        Command::CoherentInfo { channel, opt } => coherent_info(channel, opt, None),
        Command::RenyiInfo { channel, alpha, opt } => coherent_info(channel, opt, Some(*alpha)),
        Command::Bound { kind, bound, channel, opt } => bound_command(*kind, bound, channel, opt),
        Command::Threshold {
            channel,
            tol_zero,
            tol_param,
            alpha,
            range,
            opt,
        } => threshold(channel, *tol_zero, *tol_param, *alpha, range.as_deref(), opt),
        Command::Sweep {
            channel,
            grid,
            d,
            tol_zero,
            opt,
        } => sweep(channel, grid, *d, *tol_zero, opt, format),
        Command::CompareCapacity { channel, k_max, opt } => compare_capacity(channel, *k_max, opt, format),
    }
}

fn optimizer_options(opt: &OptimizerArgs) -> CliResult<OptimizerOptions> {
    let mut o = OptimizerOptions::default()
        .with_seed(opt.seed)
        .with_restarts(opt.restarts)
        .with_max_iters(opt.max_iters);
    o.ranks = opt.ranks.clone();
    o.finite_difference = opt.finite_difference;
    o.inner.seed = opt.seed;
    core(None, o.validate())?;
    Ok(o)
}

fn has_channel(c: &ChannelArgs) -> bool {
    c.family.is_some() || c.channel_file.is_some()
}

fn check_g(c: &ChannelArgs) -> CliResult<()> {
    if c.g == 0 {
        return Err(CliError::validation("--g: gate size must be >= 1"));
    }
    Ok(())
}

fn family_by_name(name: &str) -> CliResult<NoiseFamily> {
    NoiseFamily::from_name(name).ok_or_else(|| {
        CliError::validation(format!(
            "--family: unknown family `{name}` (expected depolarizing, dephasing or amplitude_damping)"
        ))
    })
}

/// The noise family, or a fixed channel wrapped as one, named by the channel flags.
fn family_source(c: &ChannelArgs) -> CliResult<NoiseFamily> {
    match (&c.family, &c.channel_file) {
        (Some(_), Some(_)) => Err(CliError::validation(
            "--family and --channel-file are mutually exclusive",
        )),
        (None, None) => Err(CliError::validation("one of --family or --channel-file is required")),
        (Some(name), None) => family_by_name(name),
        (None, Some(path)) => Ok(NoiseFamily::custom(core(Some("--channel-file"), load_channel(path))?)),
    }
}

/// The single-use channel `N`.
fn single_channel(c: &ChannelArgs) -> CliResult<QuantumChannel> {
    let family = family_source(c)?;
    match (&c.family, c.param) {
        (Some(_), None) => Err(CliError::validation("--param: required with --family")),
        (Some(_), Some(p)) => core(Some("--param"), family.instantiate(p)),
        (None, Some(_)) => Err(CliError::validation("--param: only valid with --family")),
        (None, None) => core(None, family.instantiate(0.0)),
    }
}

fn gate_channel(c: &ChannelArgs) -> CliResult<QuantumChannel> {
    check_g(c)?;
    core(Some("--g"), single_channel(c)?.tensor_power(c.g))
}

fn matrix_json(rho: &DensityMatrix) -> Vec<Vec<[f64; 2]>> {
    let m = rho.matrix();
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

const COHERENT_FORMULA: &str = "max_rho S(N(rho)) - S(N^c(rho))";
const RENYI_FORMULA: &str = "max_rho min_sigma D_alpha(omega_RB || I_R (x) sigma_B), omega_RB = (id (x) N)(phi_rho)";

fn coherent_info(c: &ChannelArgs, opt: &OptimizerArgs, alpha: Option<f64>) -> CliResult<Document> {
    let options = optimizer_options(opt)?;
    if let Some(a) = alpha {
        if !(a > 1.0 && a.is_finite()) {
            return Err(CliError::validation(format!("--alpha: {a} outside (1, inf)")));
        }
    }
    let channel = gate_channel(c)?;
    let report = match alpha {
        None => core(None, maximize_coherent_information(&channel, &options))?,
        Some(a) => core(None, maximize_renyi_coherent_information(&channel, a, &options))?,
    };
    let result = json!({
        "value": report.value,
        "channel": channel.label(),
        "in_dim": channel.in_dim(),
        "argmax": matrix_json(&report.argmax),
        "restart_values": report.restart_values,
        "restart_kinds": report.restart_kinds,
        "iterations": report.iterations,
    });
    let mut prov = Provenance::optimizer(opt);
    prov.converged = Some(report.converged.clone());
    prov.heuristic = report.heuristic;
    prov.formula = Some(if alpha.is_some() { RENYI_FORMULA } else { COHERENT_FORMULA });
    let (name, inputs) = match alpha {
        None => ("coherent-info", json!({ "channel": c, "optimizer": opt })),
        Some(a) => ("renyi-info", json!({ "channel": c, "alpha": a, "optimizer": opt })),
    };
    envelope(name, inputs, result, prov)
}

struct IcValue {
    value: f64,
    source: &'static str,
    converged: Option<Vec<bool>>,
    heuristic: bool,
}

/// `--ic` when given, otherwise the optimized value for the channel flags.
fn ic_value(
    b: &BoundArgs,
    c: &ChannelArgs,
    opt: &OptimizerArgs,
    kind: &str,
    renyi_alpha: Option<f64>,
) -> CliResult<IcValue> {
    if let Some(v) = b.ic {
        return Ok(IcValue {
            value: v,
            source: "input",
            converged: None,
            heuristic: false,
        });
    }
    if !has_channel(c) {
        return Err(CliError::validation(format!(
            "--ic: required by `{kind}` unless a channel is given (--family/--param or --channel-file)"
        )));
    }
    let options = optimizer_options(opt)?;
    let channel = gate_channel(c)?;
    let report = match renyi_alpha {
        None => core(None, maximize_coherent_information(&channel, &options))?,
        Some(a) => core(Some("--alpha"), maximize_renyi_coherent_information(&channel, a, &options))?,
    };
    // the true maximum is >= 0; clip rounding below zero so bounds accept it
    Ok(IcValue {
        value: report.value.max(0.0),
        source: "optimizer",
        converged: Some(report.converged),
        heuristic: report.heuristic,
    })
}

fn bound_command(kind: BoundKind, b: &BoundArgs, c: &ChannelArgs, opt: &OptimizerArgs) -> CliResult<Document> {
    let name = kind_name(kind);
    check_g(c)?;
    let g = c.g as u64;
    let variant = match b.constraint {
        Constraint::Halved => ConstraintVariant::Halved,
        Constraint::Plain => ConstraintVariant::Plain,
    };
    let mut ic: Option<IcValue> = None;
    let mut vacuous = None;
    let (value, formula) = match kind {
        BoundKind::Oneshot => {
            let eps_i = require(b.eps_i, "--eps-i", name)?;
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            (core(None, bounds::oneshot_converse(eps_i, icv.value))?, formulas::ONESHOT)
        }
        BoundKind::Lemma1 => {
            if b.alloc.is_empty() {
                return Err(CliError::validation(format!("--alloc: required by `{name}`")));
            }
            let eps = require(b.eps, "--eps", name)?;
            let alloc = core(Some("--alloc"), EpsilonAllocation::new(b.alloc.clone()))?;
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            (
                core(None, bounds::lemma1_rhs(&alloc, eps, b.lip, icv.value, variant))?,
                formulas::LEMMA1,
            )
        }
        BoundKind::P1 => {
            let gates = require(b.gates, "--gates", name)?;
            let eps = require(b.eps, "--eps", name)?;
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            (core(None, bounds::p1_optimum(gates, eps, b.lip, icv.value))?, formulas::P1)
        }
        BoundKind::P3 => {
            let gates = require(b.gates, "--gates", name)?;
            let eps = require(b.eps, "--eps", name)?;
            (core(None, bounds::p3_optimum(gates, eps, b.lip))?, formulas::P3)
        }
        BoundKind::Thm1 => {
            let d = require(b.d, "--d", name)?;
            let gates = require(b.gates, "--gates", name)?;
            let eps = require(b.eps, "--eps", name)?;
            let params = core(None, BoundParams::new(d, g, eps, b.lip).and_then(|p| p.with_gates(gates)))?;
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            let v = core(None, bounds::thm1_bound(&params, icv.value))?;
            vacuous = Some(v.vacuous);
            (v.value, formulas::THM1)
        }
        BoundKind::Prop1 => {
            let d = require(b.d, "--d", name)?;
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            let v = core(None, bounds::prop1_bound(d, g, icv.value))?;
            vacuous = Some(v.vacuous);
            (v.value, formulas::PROP1)
        }
        BoundKind::Corollary1 => {
            let icv = ic.insert(ic_value(b, c, opt, name, None)?);
            (core(None, bounds::corollary1_overhead(g, icv.value))?, formulas::COROLLARY1)
        }
        BoundKind::Prop2 => {
            let d = require(b.d, "--d", name)?;
            let v = core(None, bounds::prop2_bound(d, g))?;
            vacuous = Some(v.vacuous);
            (v.value, formulas::PROP2)
        }
        BoundKind::AppendixD => {
            let gates = require(b.gates, "--gates", name)?;
            let eps = require(b.eps, "--eps", name)?;
            let alpha = require(b.alpha, "--alpha", name)?;
            let icv = ic.insert(ic_value(b, c, opt, name, Some(alpha))?);
            (
                core(None, bounds::appendix_d_bound(gates, eps, b.lip, alpha, icv.value))?,
                formulas::RENYI_BOUND,
            )
        }
        BoundKind::AppendixDDmax => {
            let alpha = require(b.alpha, "--alpha", name)?;
            (core(None, bounds::appendix_d_dmax(alpha))?, formulas::RENYI_DMAX)
        }
    };

    let mut prov = Provenance {
        formula: Some(formula),
        ..Provenance::default()
    };
    if let Some(icv) = &ic {
        if icv.source == "optimizer" {
            prov = Provenance {
                formula: Some(formula),
                converged: icv.converged.clone(),
                heuristic: icv.heuristic,
                ..Provenance::optimizer(opt)
            };
        }
    }
    let result = json!({
        "kind": name,
        "value": value,
        "vacuous": vacuous,
        "ic": ic.as_ref().map(|i| i.value),
        "ic_source": ic.as_ref().map(|i| i.source),
    });
    let inputs = json!({ "kind": name, "bound": b, "channel": c, "optimizer": opt });
    envelope("bound", inputs, result, prov)
}

fn kind_name(kind: BoundKind) -> &'static str {
    match kind {
        BoundKind::Oneshot => "oneshot",
        BoundKind::Lemma1 => "lemma1",
        BoundKind::P1 => "p1",
        BoundKind::P3 => "p3",
        BoundKind::Thm1 => "thm1",
        BoundKind::Prop1 => "prop1",
        BoundKind::Corollary1 => "corollary1",
        BoundKind::Prop2 => "prop2",
        BoundKind::AppendixD => "appendix-d",
        BoundKind::AppendixDDmax => "appendix-d-dmax",
    }
}

fn parse_floats(text: &str, parts: usize, flag: &str, shape: &str) -> CliResult<Vec<f64>> {
    let fields: Vec<&str> = text.split(':').collect();
    if fields.len() != parts {
        return Err(CliError::validation(format!("{flag}: expected `{shape}`, got `{text}`")));
    }
    fields
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| CliError::validation(format!("{flag}: `{f}` is not a number")))
        })
        .collect()
}

/// `lo:hi:steps` into `steps` evenly spaced points.
fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let v = parse_floats(text, 3, "--grid", "lo:hi:steps")?;
    let (lo, hi, steps) = (v[0], v[1], v[2]);
    if !(steps >= 1.0 && steps.fract() == 0.0 && steps <= 10_000.0) {
        return Err(CliError::validation(format!("--grid: steps must be an integer in 1..=10000, got {steps}")));
    }
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(CliError::validation(format!("--grid: lo {lo} exceeds hi {hi}")));
    }
    let n = steps as usize;
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn threshold(
    c: &ChannelArgs,
    tol_zero: f64,
    tol_param: f64,
    alpha: Option<f64>,
    range: Option<&str>,
    opt: &OptimizerArgs,
) -> CliResult<Document> {
    if c.param.is_some() {
        return Err(CliError::validation("--param: not used by `threshold`; use --range"));
    }
    check_g(c)?;
    let options = optimizer_options(opt)?;
    let mut family = family_source(c)?;
    if let Some(r) = range {
        let v = parse_floats(r, 2, "--range", "lo:hi")?;
        family = core(Some("--range"), family.with_range(v[0], v[1]))?;
    }
    let result = match alpha {
        None => core(None, find_threshold(&family, c.g, tol_zero, tol_param, &options))?,
        Some(a) => core(None, find_renyi_threshold(&family, c.g, a, tol_zero, tol_param, &options))?,
    };
    let mut prov = Provenance::optimizer(opt);
    prov.converged = Some(vec![result.all_converged]);
    prov.heuristic = result.heuristic;
    prov.formula = Some(if alpha.is_some() { RENYI_FORMULA } else { COHERENT_FORMULA });
    let inputs = json!({
        "channel": c,
        "family": family.name(),
        "range": [family.range.0, family.range.1],
        "tol_zero": tol_zero,
        "tol_param": tol_param,
        "alpha": alpha,
        "optimizer": opt,
    });
    envelope("threshold", inputs, to_value(&result)?, prov)
}

fn sweep(
    c: &ChannelArgs,
    grid: &str,
    d: u64,
    tol_zero: f64,
    opt: &OptimizerArgs,
    format: Format,
) -> CliResult<Document> {
    if c.param.is_some() {
        return Err(CliError::validation("--param: not used by `sweep`; use --grid"));
    }
    check_g(c)?;
    let options = optimizer_options(opt)?;
    let family = family_source(c)?;
    let points = parse_grid(grid)?;
    let result = core(None, sweep_family_with(&family, c.g, &points, d, tol_zero, &options))?;
    if format == Format::Csv {
        return Ok(Document::Csv(sweep_csv(&result)?));
    }
    let mut prov = Provenance::optimizer(opt);
    prov.converged = Some(result.points.iter().map(|p| p.converged).collect());
    prov.formula = Some(formulas::PROP1);
    let inputs = json!({ "channel": c, "grid": grid, "d": d, "tol_zero": tol_zero, "optimizer": opt });
    envelope("sweep", inputs, to_value(&result)?, prov)
}

fn compare_capacity(c: &ChannelArgs, k_max: usize, opt: &OptimizerArgs, format: Format) -> CliResult<Document> {
    if c.g != 1 {
        return Err(CliError::validation("--g: `compare-capacity` takes the tensor powers itself; leave --g at 1"));
    }
    if k_max == 0 {
        return Err(CliError::validation("--k-max: must be >= 1"));
    }
    let options = optimizer_options(opt)?;
    let channel = single_channel(c)?;
    let result = core(Some("--k-max"), bounds::capacity_comparison(&channel, k_max, &options))?;
    if format == Format::Csv {
        return Ok(Document::Csv(capacity_csv(&result)?));
    }
    let mut prov = Provenance::optimizer(opt);
    prov.converged = Some(result.rows.iter().map(|r| r.converged).collect());
    prov.formula = Some(formulas::CAPACITY_RATIO);
    let inputs = json!({ "channel": c, "k_max": k_max, "optimizer": opt });
    envelope("compare-capacity", inputs, to_value(&result)?, prov)
}
