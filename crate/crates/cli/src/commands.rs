use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;
use serde_json::{json, Value};
use wehrl_core::channels::amplifier_output_dim;
use wehrl_core::fock::format::{load_spectrum, save_density};
use wehrl_core::fock::{g, schatten_norm, thermal_state, von_neumann_entropy};
use wehrl_core::optimizer::{
    maximize_norm_ratio, minimize_wehrl_restarts, thermal_norm_ratio, OptimizationTrace,
    SearchOptions,
};
use wehrl_core::phase_space::{
    convex_functional, husimi_q_norm_with, wehrl_entropy_with, HusimiField,
};
use wehrl_core::report::{render_table, CheckKind};
use wehrl_core::theorem_lab::{entropy_charge, ha_value, run_suite, Suite, SuiteConfig};
use wehrl_core::{
    ChannelKind, ChannelSpec, ConvexFn, DensityOperator, FockCutoff, QuadratureScheme, Spectrum,
};

use crate::output::{sig, Sink};
use crate::{
    BudgetOverflow, ChannelArg, Problem, Quantity, StateArgs, SweepQuantity, Usage, EXIT_VIOLATION,
};

/// Optimizer gaps below this are reported as violations.
const GAP_TOLERANCE: f64 = 1e-6;

fn exponent(flag: Option<f64>, config: Option<f64>, name: &str) -> anyhow::Result<f64> {
    flag.or(config).ok_or_else(|| {
        Usage(format!(
            "--{name} is required (or set `{name}` in the config)"
        ))
        .into()
    })
}

/// `(value, quadrature error, truncation charge)`; the printed error is the
/// sum of the last two.
fn quantity(
    sink: &Sink,
    what: Quantity,
    rho: &DensityOperator,
    p: Option<f64>,
    q: Option<f64>,
) -> anyhow::Result<(f64, f64, f64)> {
    let cfg = sink.cfg;
    let delta = rho.tail_bound();
    // mass moved by truncation-and-renormalisation, in trace norm
    let moved = 2.0 * delta;
    Ok(match what {
        Quantity::Wehrl => {
            let i = wehrl_entropy_with(rho, &cfg.integration())?;
            (
                i.value,
                i.error,
                entropy_charge(delta, rho.cutoff().total_dim()),
            )
        }
        Quantity::VnEntropy => (
            von_neumann_entropy(rho)?,
            0.0,
            entropy_charge(delta, rho.cutoff().total_dim()),
        ),
        Quantity::HusimiNorm => {
            let q = exponent(q, cfg.q, "q")?;
            let i = husimi_q_norm_with(rho, q, &cfg.integration())?;
            // ‖ΔQ‖_q ≤ ‖ΔQ‖_1^{1/q} ‖ΔQ‖_∞^{1−1/q} with both norms ≤ the moved mass
            (
                i.value,
                i.error,
                if moved > 0.0 {
                    moved.powf(1.0 / q)
                } else {
                    0.0
                },
            )
        }
        Quantity::Schatten => {
            let p = exponent(p, cfg.p, "p")?;
            (schatten_norm(rho, p)?, 0.0, moved)
        }
    })
}

fn quantity_name(what: Quantity) -> &'static str {
    match what {
        Quantity::Wehrl => "wehrl",
        Quantity::VnEntropy => "vn_entropy",
        Quantity::HusimiNorm => "husimi_norm",
        Quantity::Schatten => "schatten_norm",
    }
}

pub fn compute(
    sink: &Sink,
    what: Quantity,
    state: &StateArgs,
    p: Option<f64>,
    q: Option<f64>,
) -> anyhow::Result<u8> {
    let spec = state.required()?;
    let rho = spec.build(state.dim, sink.cfg.tail)?;
    let (value, quad, trunc) = quantity(sink, what, &rho, p, q)?;
    let name = quantity_name(what);
    println!(
        "{name} = {} ± {} (tol {})",
        sig(value),
        sig(quad + trunc),
        sig(sink.cfg.tol)
    );
    let record = sink.record(
        "compute",
        json!({
            "quantity": name,
            "state": spec,
            "dim": rho.cutoff().dim(),
            "modes": rho.modes(),
            "tail_bound": rho.tail_bound(),
            "p": p.or(sink.cfg.p),
            "q": q.or(sink.cfg.q),
            "value": value,
            "error": quad + trunc,
            "quadrature_error": quad,
            "truncation_charge": trunc,
        }),
    );
    let path = sink.write_json(&format!("compute-{name}"), &record)?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

pub struct VerifyArgs {
    pub suite: String,
    pub trials: Option<usize>,
    pub state: StateArgs,
    pub fs: Vec<String>,
    pub kappas: Vec<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub max_dim: Option<usize>,
}

pub fn verify(sink: &Sink, a: VerifyArgs) -> anyhow::Result<u8> {
    let cfg = sink.cfg;
    let suite: Suite = a.suite.parse()?;
    let fs =
        a.fs.iter()
            .map(|s| s.parse::<ConvexFn>())
            .collect::<Result<Vec<_>, _>>()?;
    let state = match a.state.spec()? {
        Some(s) => Some(s.build(a.state.dim, cfg.tail)?),
        None => None,
    };
    let mut sc = SuiteConfig {
        seed: cfg.seed,
        trials: a.trials.or(cfg.trials),
        max_dim: a.max_dim.unwrap_or(cfg.max_dim),
        kappas: if a.kappas.is_empty() {
            cfg.kappas.clone()
        } else {
            a.kappas
        },
        fs,
        state,
        opts: cfg.integration(),
        ..SuiteConfig::default()
    };
    if sc.max_dim < 2 {
        return Err(Usage("--max-dim must be at least 2".into()).into());
    }
    match (a.p.or(cfg.p), a.q.or(cfg.q)) {
        (Some(p), Some(q)) => sc.pq_pairs = vec![(p, q)],
        (None, None) => {}
        _ => return Err(Usage("give both --p and --q, or neither".into()).into()),
    }

    let reports = run_suite(suite, &sc)?;
    print!("{}", render_table(&reports));
    for r in reports.iter().filter(|r| !r.notes.is_empty()) {
        for n in &r.notes {
            println!("note [{}]: {n}", r.name);
        }
    }
    for r in reports.iter().filter(|r| !r.series.is_empty()) {
        let pts: Vec<String> = r
            .series
            .iter()
            .map(|s| format!("{}→{}", sig(s.parameter), sig(s.value)))
            .collect();
        let flags: Vec<String> = r.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!(
            "series [{}]: {}  {}",
            r.name,
            pts.join(", "),
            flags.join(" ")
        );
    }
    let hard: Vec<_> = reports
        .iter()
        .filter(|r| r.kind == CheckKind::Hard)
        .collect();
    let passed = hard.iter().filter(|r| r.pass).count();
    let evidence = reports.len() - hard.len();
    let failures: Vec<&str> = hard
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    let mut over_cap: Vec<&str> = reports
        .iter()
        .filter(|r| !(r.tolerance_budget <= cfg.budget_cap))
        .map(|r| r.name.as_str())
        .collect();
    over_cap.dedup();
    println!(
        "{suite}: {passed}/{} hard checks pass, {evidence} conjecture-evidence checks",
        hard.len()
    );

    let record = sink.record(
        "verify",
        json!({
            "suite": suite.name(),
            "summary": {
                "hard": hard.len(),
                "passed": passed,
                "conjecture_evidence": evidence,
                "failures": failures,
                "over_budget_cap": over_cap,
            },
            "reports": serde_json::to_value(&reports)?,
        }),
    );
    let path = sink.write_json(&format!("verify-{}", suite.name()), &record)?;
    eprintln!("wrote {}", path.display());

    if !failures.is_empty() {
        eprintln!("theorem violation in: {}", failures.join(", "));
        return Ok(EXIT_VIOLATION);
    }
    if !over_cap.is_empty() {
        return Err(BudgetOverflow(format!(
            "tolerance budget above {} in: {}",
            sig(cfg.budget_cap),
            over_cap.join(", ")
        ))
        .into());
    }
    Ok(0)
}

/// `a,b,c` or `start:stop:count` (inclusive ends).
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let bad = || {
        Usage(format!(
            "bad grid `{s}`: expected `a,b,c` or `start:stop:count`"
        ))
    };
    let grid: Vec<f64> = if let Some((start, rest)) = s.split_once(':') {
        let (stop, count) = rest.split_once(':').ok_or_else(bad)?;
        let start: f64 = start.trim().parse().map_err(|_| bad())?;
        let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() {
        return Err(Usage(format!("grid `{s}` is empty")).into());
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(bad().into());
    }
    Ok(grid)
}

fn thermal(z: f64, tail: f64) -> anyhow::Result<DensityOperator> {
    Ok(thermal_state(z, FockCutoff::for_thermal(z, tail)?)?)
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    sink: &Sink,
    what: SweepQuantity,
    grid: Option<&str>,
    p: Option<f64>,
    q: Option<f64>,
    state: &StateArgs,
    f: &str,
) -> anyhow::Result<u8> {
    let cfg = sink.cfg;
    let grid = match (grid, what) {
        (Some(s), _) => parse_grid(s)?,
        (None, SweepQuantity::Ha) => cfg.kappas.clone(),
        (None, _) => cfg.zs.clone(),
    };
    let opts = cfg.integration();
    // (value, error, reference) per grid point
    let rows: Vec<(f64, f64, f64)> = match what {
        SweepQuantity::Wehrl => grid
            .par_iter()
            .map(|&z| {
                let rho = thermal(z, cfg.tail)?;
                let i = wehrl_entropy_with(&rho, &opts)?;
                let err = i.error + entropy_charge(rho.tail_bound(), rho.cutoff().dim());
                Ok((i.value, err, 1.0 - (-z).ln_1p()))
            })
            .collect::<anyhow::Result<_>>()?,
        SweepQuantity::VnEntropy => grid
            .par_iter()
            .map(|&z| {
                let rho = thermal(z, cfg.tail)?;
                let err = entropy_charge(rho.tail_bound(), rho.cutoff().dim());
                Ok((von_neumann_entropy(&rho)?, err, g(z / (1.0 - z))?))
            })
            .collect::<anyhow::Result<_>>()?,
        SweepQuantity::NormRatio => {
            let p = exponent(p, cfg.p, "p")?;
            let q = exponent(q, cfg.q, "q")?;
            grid.par_iter()
                .map(|&z| {
                    let rho = thermal(z, cfg.tail)?;
                    let qn = husimi_q_norm_with(&rho, q, &opts)?;
                    let pn = schatten_norm(&rho, p)?;
                    let moved = 2.0 * rho.tail_bound();
                    let trunc = if moved > 0.0 {
                        moved.powf(1.0 / q) + moved
                    } else {
                        0.0
                    };
                    Ok((
                        qn.value / pn,
                        (qn.error + trunc) / pn,
                        thermal_norm_ratio(z, p, q),
                    ))
                })
                .collect::<anyhow::Result<_>>()?
        }
        SweepQuantity::Ha => {
            let f: ConvexFn = f.parse()?;
            let spec = state.spec()?.unwrap_or(crate::state::StateSpec::Vacuum);
            let rho = spec.build(state.dim, cfg.tail)?;
            let limit = convex_functional(&rho, f, &opts)?.value;
            grid.par_iter()
                .map(|&kappa| {
                    let (value, lost) = ha_value(&rho, f, kappa)?;
                    let err =
                        wehrl_core::theorem_lab::truncation_charge(f, lost + rho.tail_bound());
                    Ok((value, err, limit))
                })
                .collect::<anyhow::Result<_>>()?
        }
    };

    let name = match what {
        SweepQuantity::Wehrl => "wehrl",
        SweepQuantity::VnEntropy => "vn_entropy",
        SweepQuantity::NormRatio => "norm_ratio",
        SweepQuantity::Ha => "ha",
    };
    let mut csv = String::from("parameter,value,error,reference\n");
    for (x, (v, e, r)) in grid.iter().zip(&rows) {
        let _ = writeln!(csv, "{},{},{},{}", sig(*x), sig(*v), sig(*e), sig(*r));
    }
    print!("{csv}");
    let path = sink.write(&format!("sweep-{name}"), "csv", &csv)?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

pub fn husimi(sink: &Sink, state: &StateArgs, radius: f64, points: usize) -> anyhow::Result<u8> {
    let rho = state.required()?.build(state.dim, sink.cfg.tail)?;
    let scheme = QuadratureScheme::cartesian(rho.modes(), radius, points)?;
    let field = HusimiField::sample(rho, scheme)?;
    let (lo, hi) = field.range();
    eprintln!(
        "normalisation {} (tol {}), Q in [{}, {}]",
        sig(field.normalization()),
        sig(field.normalization_tolerance()),
        sig(lo),
        sig(hi)
    );
    let path = sink.write("husimi", "csv", &field.to_csv())?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

pub fn channel(
    sink: &Sink,
    kind: ChannelArg,
    param: f64,
    state: &StateArgs,
    out_dim: Option<usize>,
    save: Option<&Path>,
) -> anyhow::Result<u8> {
    let cfg = sink.cfg;
    let rho = state.required()?.build(state.dim, cfg.tail)?;
    let in_dim = rho.cutoff().dim();
    let kind = match kind {
        ChannelArg::Amplifier => ChannelKind::Amplifier,
        ChannelArg::Attenuator => ChannelKind::Attenuator,
        ChannelArg::RandomDisplacement => ChannelKind::RandomDisplacement,
        ChannelArg::MeasureReprepare => ChannelKind::MeasureReprepare,
    };
    let default_out = match kind {
        ChannelKind::Attenuator => in_dim,
        _ if param >= 1.0 && param.is_finite() => amplifier_output_dim(param, in_dim),
        _ => in_dim,
    };
    let spec = ChannelSpec {
        kind,
        parameter: param,
        modes: rho.modes(),
        in_dim,
        out_dim: out_dim.unwrap_or(default_out),
    };
    let ch = spec.build()?;
    let out = ch.apply(&rho)?;
    let w = wehrl_entropy_with(&out, &cfg.integration())?;
    let s = von_neumann_entropy(&out)?;
    let charge = entropy_charge(out.tail_bound(), out.cutoff().total_dim());
    println!(
        "output dim {}, tail bound {}",
        out.cutoff().dim(),
        sig(out.tail_bound())
    );
    println!("vn_entropy = {} ± {}", sig(s), sig(charge));
    println!(
        "wehrl = {} ± {} (tol {})",
        sig(w.value),
        sig(w.error + charge + ch.quadrature_error()),
        sig(cfg.tol)
    );
    if let Some(p) = save {
        save_density(&out, p).with_context(|| format!("saving {}", p.display()))?;
    }
    let record = sink.record(
        "channel",
        json!({
            "channel": spec,
            "channel_quadrature_error": ch.quadrature_error(),
            "input_tail_bound": rho.tail_bound(),
            "output_tail_bound": out.tail_bound(),
            "output_trace": out.trace(),
            "vn_entropy": s,
            "wehrl": w.value,
            "wehrl_error": w.error + charge + ch.quadrature_error(),
        }),
    );
    let path = sink.write_json(
        &format!(
            "channel-{}",
            serde_json::to_value(kind)?.as_str().unwrap_or("channel")
        ),
        &record,
    )?;
    eprintln!("wrote {}", path.display());
    Ok(0)
}

/// `thermal:Z:LEN`, `p1,p2,…` or a spectrum file.
fn parse_spectrum(s: &str) -> anyhow::Result<Spectrum> {
    let bad = || {
        Usage(format!(
            "bad spectrum `{s}`: expected thermal:Z:LEN, p1,p2,… or a file"
        ))
    };
    if let Some(rest) = s.strip_prefix("thermal:") {
        let (z, len) = rest.split_once(':').ok_or_else(bad)?;
        let z: f64 = z.parse().map_err(|_| bad())?;
        let len: usize = len.parse().map_err(|_| bad())?;
        return Ok(Spectrum::thermal(z, len, true)?);
    }
    if Path::new(s).is_file() {
        return Ok(load_spectrum(s)?);
    }
    let probs: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    Ok(Spectrum::new(probs)?)
}

fn run_json(t: &OptimizationTrace) -> anyhow::Result<Value> {
    let mut v: Value = serde_json::from_str(&t.summary_json())?;
    v["objective_history"] = json!(t.objective_history);
    v["best_state"] = json!(t.best_state_text());
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
pub fn optimize(
    sink: &Sink,
    problem: Problem,
    spectrum: Option<&str>,
    dim: Option<usize>,
    budget: usize,
    restarts: u64,
    p: Option<f64>,
    q: Option<f64>,
) -> anyhow::Result<u8> {
    let cfg = sink.cfg;
    if restarts == 0 || budget == 0 {
        return Err(Usage("--restarts and --budget must be positive".into()).into());
    }
    let seeds: Vec<u64> = (0..restarts).map(|i| cfg.seed.wrapping_add(i)).collect();
    let opts = SearchOptions::with_budget(budget);
    let (name, traces, extra) = match problem {
        Problem::Wehrl => {
            if p.is_some() || q.is_some() {
                return Err(Usage("--p/--q apply to norm-ratio only".into()).into());
            }
            let spec = parse_spectrum(spectrum.unwrap_or("thermal:0.5:16"))?;
            let cutoff = FockCutoff::single(dim.unwrap_or(spec.len()).max(2))?;
            let traces = minimize_wehrl_restarts(&spec, cutoff, &seeds, &opts)?;
            let extra = json!({ "spectrum": spec.probs(), "vn_entropy": spec.entropy(), "dim": cutoff.dim() });
            ("wehrl", traces, extra)
        }
        Problem::NormRatio => {
            if spectrum.is_some() {
                return Err(Usage("--spectrum applies to wehrl only".into()).into());
            }
            let p = exponent(p, cfg.p, "p")?;
            let q = exponent(q, cfg.q, "q")?;
            let cutoff = FockCutoff::single(dim.unwrap_or(16))?;
            let traces = seeds
                .par_iter()
                .map(|&s| maximize_norm_ratio(p, q, cutoff, s, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            (
                "norm_ratio",
                traces,
                json!({ "p": p, "q": q, "dim": cutoff.dim() }),
            )
        }
    };

    println!(
        "{:>20}  {:>16}  {:>16}  {:>16}  {:>8}  status",
        "seed", "best", "target", "gap", "evals"
    );
    for t in &traces {
        let status = if t.divergent {
            "divergent"
        } else if t.stagnated {
            "stagnated"
        } else {
            "partial"
        };
        println!(
            "{:>20}  {:>16}  {:>16}  {:>16}  {:>8}  {status}",
            t.seed,
            sig(t.best_value),
            sig(t.target),
            sig(t.gap),
            t.evaluations
        );
    }
    let violations: Vec<u64> = traces
        .iter()
        .filter(|t| !t.divergent && t.gap < -GAP_TOLERANCE - t.best_value_error)
        .map(|t| t.seed)
        .collect();
    let runs = traces
        .iter()
        .map(run_json)
        .collect::<anyhow::Result<Vec<_>>>()?;
    let record = sink.record(
        "optimize",
        json!({
            "problem": name,
            "budget": budget,
            "gap_tolerance": GAP_TOLERANCE,
            "problem_inputs": extra,
            "runs": runs,
        }),
    );
    let path = sink.write_json(&format!("optimize-{name}"), &record)?;
    eprintln!("wrote {}", path.display());
    if !violations.is_empty() {
        eprintln!("bound violated (gap < −{GAP_TOLERANCE}) for seeds {violations:?}");
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.1, 0.2").unwrap(), vec![0.1, 0.2]);
        for bad in ["", ",", "0:1:0", "0:1", "a,b", "0:1:x"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn spectra() {
        assert_eq!(parse_spectrum("thermal:0.5:4").unwrap().len(), 4);
        assert_eq!(parse_spectrum("0.25,0.75").unwrap().probs(), &[0.75, 0.25]);
        assert!(parse_spectrum("thermal:2:4").is_err());
        assert!(parse_spectrum("x").is_err());
    }
}
