use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use phasebound::format::{fmt_num, json_num};
use phasebound::oracle::{build_state, default_dim, state_moments};
use phasebound::probe::moments;
use phasebound::sweep::{optimum, run_sweep, to_csv, Range, SweepRow, CSV_HEADER};
use phasebound::verify::{
    dominance_gap, run_verify, CheckKind, DominanceTarget, VerifyOptions, VerifyReport,
};
use phasebound::{derive_params, BoundResult, ChannelParams, ProbeMoments, ProbeSpec, SweepSpec};
use serde_json::{json, Value};

use crate::args::{
    BoundArgs, ChannelArgs, Cli, Format, GoldenArgs, OracleArgs, SweepArgs, VerifyArgs,
};
use crate::exit::CliError;

pub const PRESET_GOLDEN: &str = "ecs_preset.csv";

/// Fixed oracle cases kept as golden files, with the flags that produce them.
pub const ORACLE_CASES: [(&str, &[&str]); 3] = [
    (
        "oracle_lossless_coherent.json",
        &[
            "--eta", "1", "--nbar-b", "0.7", "--probe", "coherent", "--alpha", "1",
        ],
    ),
    (
        "oracle_vacuum.json",
        &[
            "--eta",
            "0.5",
            "--nbar-b",
            "1",
            "--probe",
            "fock",
            "--photons",
            "0",
        ],
    ),
    (
        "oracle_coherent_thermal.json",
        &[
            "--eta", "0.5", "--nbar-b", "1", "--probe", "coherent", "--alpha", "1",
        ],
    ),
];

fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

/// Writes `body` to `--output` or stdout.
pub fn emit(cli: &Cli, body: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn write_golden(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn golden_dir(g: &GoldenArgs) -> Result<PathBuf, CliError> {
    if !g.i_know {
        return Err(CliError::Usage(
            "refusing to overwrite golden files without --i-know".into(),
        ));
    }
    Ok(g.golden_dir.clone().unwrap_or_else(default_golden_dir))
}

fn channel(c: &ChannelArgs) -> Result<ChannelParams, CliError> {
    let eta = c
        .eta
        .ok_or_else(|| CliError::Usage("missing --eta".into()))?;
    let nbar_b = c
        .nbar_b
        .ok_or_else(|| CliError::Usage("missing --nbar-b".into()))?;
    Ok(derive_params(eta, nbar_b)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialise");
    s.push('\n');
    s
}

fn bound_json(p: &ChannelParams, spec: &ProbeSpec, m: &ProbeMoments, r: &BoundResult) -> Value {
    json!({
        "eta": json_num(p.eta),
        "nbar_b": json_num(p.nbar_b),
        "probe": spec.name(),
        "n": m.n_modes,
        "mean": json_num(m.mean_total),
        "var": json_num(m.var_total),
        "cq_star": json_num(r.cq_star),
        "x0": json_num(r.x0),
        "y0": json_num(r.y0),
        "hessian_ok": r.hessian_ok,
        "mse_lower": json_num(r.mse_lower),
        "degeneracy": r.degeneracy,
    })
}

pub fn bound(cli: &Cli, args: &BoundArgs) -> Result<(), CliError> {
    let p = channel(&args.channel)?;
    let spec = args
        .probe
        .spec()?
        .ok_or_else(|| CliError::Usage("bound needs --probe".into()))?;
    let m = moments(&spec, args.probe.moment_mode())?;
    let r = optimum(&p, &m)?;
    let body = match cli.format {
        Some(Format::Csv) => {
            let row = SweepRow::evaluate(p.eta, p.nbar_b, &m)?;
            format!("{CSV_HEADER}\n{}\n", row.csv_line())
        }
        _ => pretty(&bound_json(&p, &spec, &m, &r)),
    };
    emit(cli, &body)
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let mut spec = SweepSpec::ecs_preset();
    if let Some(etas) = &args.etas {
        spec.etas = etas.clone();
    }
    let r = spec.nbar_b;
    spec.nbar_b = Range {
        start: args.nbar_b_start.unwrap_or(r.start),
        stop: args.nbar_b_stop.unwrap_or(r.stop),
        count: args.nbar_b_count.unwrap_or(r.count),
    };
    if let Some(probe) = args.probe.spec()? {
        spec.probe = probe;
    }
    spec.moment_mode = args.probe.moment_mode();
    for &eta in &spec.etas {
        derive_params(eta, 0.0)?;
    }
    spec.validate()?;
    Ok(spec)
}

pub fn sweep(cli: &Cli, args: &SweepArgs) -> Result<(), CliError> {
    let spec = sweep_spec(args)?;
    if args.golden.regen_golden {
        let dir = golden_dir(&args.golden)?;
        if spec != SweepSpec::ecs_preset() {
            return Err(CliError::Usage(
                "--regen-golden only regenerates the default preset; drop the grid and probe flags"
                    .into(),
            ));
        }
        return write_golden(&dir, PRESET_GOLDEN, &to_csv(&run_sweep(&spec)?));
    }
    let rows = run_sweep(&spec)?;
    let body = match cli.format {
        Some(Format::Json) => {
            let v: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "eta": json_num(r.eta),
                        "nbar_b": json_num(r.nbar_b),
                        "n_modes": r.n_modes,
                        "mean_ns": json_num(r.mean_ns),
                        "var_ns": json_num(r.var_ns),
                        "x0": json_num(r.x0),
                        "y0": json_num(r.y0),
                        "cq_star": json_num(r.cq_star),
                        "mse_lower": json_num(r.mse_lower),
                    })
                })
                .collect();
            pretty(&Value::Array(v))
        }
        _ => to_csv(&rows),
    };
    emit(cli, &body)
}

fn verify_options(cli: &Cli, args: &VerifyArgs) -> Result<VerifyOptions, CliError> {
    let mut opts = VerifyOptions {
        seed: cli.seed,
        draws: args.draws,
        only: args.only,
        ..VerifyOptions::default()
    };
    if let Some(d) = cli.dim {
        opts.dim = d;
    }
    let target = args.probe.spec()?;
    let has_channel = args.channel.eta.is_some() || args.channel.nbar_b.is_some();
    match target {
        Some(probe) => {
            if args.only != Some(CheckKind::Dominance) {
                return Err(CliError::Usage(
                    "--probe with verify needs --only dominance".into(),
                ));
            }
            let p = channel(&args.channel)?;
            opts.dominance_target = Some(DominanceTarget {
                probe,
                eta: p.eta,
                nbar_b: p.nbar_b,
            });
        }
        None if has_channel => {
            return Err(CliError::Usage(
                "--eta/--nbar-b with verify need --probe".into(),
            ))
        }
        None => {}
    }
    Ok(opts)
}

pub fn render_report(report: &VerifyReport, format: Option<Format>) -> String {
    match format {
        Some(Format::Json) => pretty(&json!({
            "seed": report.seed,
            "dim": report.dim,
            "draws": report.draws,
            "all_passed": report.all_passed(),
            "checks": report.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "informational": c.informational,
                "residual": json_num(c.residual),
                "tolerance": json_num(c.tolerance),
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })),
        Some(Format::Csv) => {
            let mut s = String::from("name,passed,informational,residual,tolerance,detail\n");
            for c in &report.checks {
                let _ = writeln!(
                    s,
                    "\"{}\",{},{},{},{},\"{}\"",
                    c.name.replace('"', "\"\""),
                    c.passed,
                    c.informational,
                    fmt_num(c.residual),
                    fmt_num(c.tolerance),
                    c.detail.replace('"', "\"\"")
                );
            }
            s
        }
        None => {
            let mut s = format!(
                "verify: seed={} d={} draws={}\n",
                report.seed, report.dim, report.draws
            );
            for c in &report.checks {
                let _ = writeln!(s, "{c}");
            }
            let failed = report
                .checks
                .iter()
                .filter(|c| !c.passed && !c.informational)
                .count();
            let _ = writeln!(s, "{} checks, {failed} failed", report.checks.len());
            s
        }
    }
}

pub fn verify(cli: &Cli, args: &VerifyArgs) -> Result<(), CliError> {
    let opts = verify_options(cli, args)?;
    let report = run_verify(&opts)?;
    emit(cli, &render_report(&report, cli.format))?;
    let failed = report
        .checks
        .iter()
        .filter(|c| !c.passed && !c.informational)
        .count();
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}

/// Exact QFI, closed-form bound from the truncated probe's own moments, and
/// their gap.
pub fn oracle_json(
    p: &ChannelParams,
    spec: &ProbeSpec,
    dim: Option<usize>,
    theta: f64,
) -> Result<Value, CliError> {
    let d = match dim {
        Some(d) => d,
        None => default_dim(spec)?,
    };
    let state = build_state(spec, d)?;
    let m = state_moments(&state);
    let (f_q, cq_star, deficit) = dominance_gap(&state, p, theta)?;
    Ok(json!({
        "eta": json_num(p.eta),
        "nbar_b": json_num(p.nbar_b),
        "probe": spec.name(),
        "n": m.n_modes,
        "dim": d,
        "theta": json_num(theta),
        "mean": json_num(m.mean_total),
        "var": json_num(m.var_total),
        "f_q": json_num(f_q),
        "cq_star": json_num(cq_star),
        "gap": json_num(cq_star - f_q),
        "trace_deficit": json_num(deficit),
    }))
}

pub fn oracle(cli: &Cli, args: &OracleArgs) -> Result<(), CliError> {
    if args.golden.regen_golden {
        let dir = golden_dir(&args.golden)?;
        if args.probe.probe.is_some() || args.channel.eta.is_some() || args.channel.nbar_b.is_some()
        {
            return Err(CliError::Usage("--regen-golden regenerates the fixed oracle cases; drop the channel and probe flags".into()));
        }
        for (name, flags) in ORACLE_CASES {
            let case = crate::parse_case(flags)?;
            let spec = case.probe.spec()?.expect("golden cases name a probe");
            let v = oracle_json(&channel(&case.channel)?, &spec, None, case.theta)?;
            write_golden(&dir, name, &pretty(&v))?;
        }
        return Ok(());
    }
    let p = channel(&args.channel)?;
    let spec = args
        .probe
        .spec()?
        .ok_or_else(|| CliError::Usage("oracle needs --probe".into()))?;
    let v = oracle_json(&p, &spec, cli.dim, args.theta)?;
    let body = match cli.format {
        Some(Format::Csv) => {
            let keys = [
                "eta",
                "nbar_b",
                "probe",
                "n",
                "dim",
                "theta",
                "mean",
                "var",
                "f_q",
                "cq_star",
                "gap",
                "trace_deficit",
            ];
            let vals: Vec<String> = keys
                .iter()
                .map(|k| match &v[*k] {
                    Value::String(s) => s.clone(),
                    Value::Number(n) => n.as_f64().map(fmt_num).unwrap_or_else(|| n.to_string()),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
        _ => pretty(&v),
    };
    emit(cli, &body)
}
