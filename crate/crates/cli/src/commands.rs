use anyhow::{Context, Result};
use log::{info, warn};
use poissonbc_core::capacity::{
    bc_region, dms_region, pp_capacity, superposition_rates, wiretap_capacity, RegionBoundary, RegionResolution,
    SuperpositionRates,
};
use poissonbc_core::codingsim::{
    non_increasing_up_to_ci, run_experiment, CodingRates, ErrorCounts, ExperimentConfig, Setting, SweepRow,
};
use poissonbc_core::inference::verify::{verify_csiszar_identity, verify_lln, verify_mc_inequality, LlnRow};
use poissonbc_core::{classify_ordering, Receiver};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{load_overlay, CapacityArgs, CodesimArgs, OutputFormat, RunConfig, VerifyArgs, VerifyKind};
use crate::output::{read_text, unit_name, unit_scale, OutDir};
use crate::{CapacityCommand, Cli, Command, ConfigError, VerificationFailed};

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(ConfigError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("starting thread pool")?;
    }
    let overlay = cli.config.as_deref().map(load_overlay).transpose()?;
    let ctx = Ctx {
        out: cli.out,
        bits: cli.bits,
        format: cli.format,
        overlay,
    };
    match cli.command {
        Command::Classify(a) => {
            let rc = ctx.resolve("classify", a)?;
            let verdict = classify_ordering(&rc.args.params()?)?;
            ctx.finish_json(&rc, "verdict.json", &verdict)
        }
        Command::Capacity(CapacityCommand::Pp(a)) => {
            let rc = ctx.resolve("capacity pp", a)?;
            let params = rc.args.params()?;
            let s = unit_scale(rc.bits);
            let mut summary = json!({ "units": unit_name(rc.bits) });
            for r in [Receiver::Y, Receiver::Z] {
                let c = pp_capacity(&params, r)?;
                summary[r.to_string()] = json!({ "capacity": c.capacity * s, "kappa": c.kappa });
            }
            ctx.finish_json(&rc, "summary.json", &summary)
        }
        Command::Capacity(CapacityCommand::Wiretap(a)) => {
            let rc = ctx.resolve("capacity wiretap", a)?;
            let w = wiretap_capacity(&rc.args.params()?)?;
            if let Some(msg) = &w.warning {
                warn!("{msg}");
            }
            let summary = json!({
                "units": unit_name(rc.bits),
                "capacity": w.capacity * unit_scale(rc.bits),
                "alpha": w.alpha,
                "warning": w.warning,
            });
            ctx.finish_json(&rc, "summary.json", &summary)
        }
        Command::Capacity(CapacityCommand::Bc(a)) => region(&ctx, "capacity bc", a),
        Command::Capacity(CapacityCommand::Dms(a)) => region(&ctx, "capacity dms", a),
        Command::Verify { kind, args } => verify(&ctx, kind, args),
        Command::Codesim(a) => codesim(&ctx, a),
    }
}

struct Ctx {
    out: std::path::PathBuf,
    bits: bool,
    format: OutputFormat,
    overlay: Option<Value>,
}

impl Ctx {
    fn resolve<T: Serialize + DeserializeOwned>(&self, command: &str, args: T) -> Result<RunConfig<T>> {
        RunConfig {
            command: command.to_string(),
            bits: self.bits,
            format: self.format,
            args,
        }
        .resolve(self.overlay.as_ref())
    }

    /// Single JSON result: written, echoed to stdout, manifest last.
    fn finish_json<T: Serialize, V: Serialize>(&self, rc: &RunConfig<T>, name: &str, value: &V) -> Result<()> {
        let mut out = OutDir::create(&self.out)?;
        out.write_json(name, value)?;
        out.finish(rc)?;
        println!("{}", serde_json::to_string_pretty(value)?);
        Ok(())
    }
}

/// Prints `json` or the CSV file, depending on the requested format.
fn print(format: OutputFormat, json: &Value, csv_path: &std::path::Path) -> Result<()> {
    match format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(json)?),
        OutputFormat::Csv => print!("{}", read_text(csv_path)?),
    }
    Ok(())
}

fn region(ctx: &Ctx, command: &str, a: CapacityArgs) -> Result<()> {
    let rc = ctx.resolve(command, a)?;
    let params = rc.args.channel.params()?;
    let dms = command.ends_with("dms");
    let default = if dms {
        RegionResolution::DMS_DEFAULT
    } else {
        RegionResolution::BC_DEFAULT
    };
    let r = &rc.args.resolution;
    let res = RegionResolution {
        grid_cells: r.grid_cells.unwrap_or(default.grid_cells),
        angles: r.angles,
        starts: r.starts,
    };
    if res.grid_cells < 2 || res.angles < 2 || res.starts == 0 {
        return Err(ConfigError("grid_cells and angles must be at least 2, starts at least 1".into()).into());
    }
    info!("{command}: grid {} cells, {} angles", res.grid_cells, res.angles);
    let boundary = if dms {
        dms_region(&params, &res)?
    } else {
        bc_region(&params, &res)?
    };
    if let Some(msg) = &boundary.warning {
        warn!("{msg}");
    }
    let s = unit_scale(rc.bits);
    let mut out = OutDir::create(&ctx.out)?;
    let csv_path = out.path("boundary.csv");
    write_boundary(&csv_path, &boundary, dms, s)?;
    let summary = json!({
        "units": unit_name(rc.bits),
        "resolution": res,
        "r_y_intercept": boundary.r_y_intercept() * s,
        "r_other_intercept": boundary.r_other_intercept() * s,
        "pp_capacity_y": pp_capacity(&params, Receiver::Y)?.capacity * s,
        "pp_capacity_z": pp_capacity(&params, Receiver::Z)?.capacity * s,
        "points": boundary.points.len(),
        "warning": boundary.warning,
        "support": boundary
            .support_values
            .iter()
            .map(|v| json!({ "angle": v.angle, "value": v.value * s }))
            .collect::<Vec<_>>(),
    });
    out.write_json("summary.json", &summary)?;
    out.finish(&rc)?;
    print(rc.format, &summary, &csv_path)
}

fn write_boundary(path: &std::path::Path, b: &RegionBoundary, dms: bool, scale: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let names: &[&str] = if dms {
        &["alpha1", "alpha2", "alpha3", "p1", "p2", "p3"]
    } else {
        &["alpha", "p", "q"]
    };
    let mut header = vec!["r_y", "r_z_or_r0"];
    header.extend_from_slice(names);
    header.push("support_angle");
    w.write_record(&header)?;
    for p in &b.points {
        let mut rec = vec![(p.r_y * scale).to_string(), (p.r_other * scale).to_string()];
        rec.extend(p.parameters.iter().map(f64::to_string));
        rec.push(p.angle.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn verify(ctx: &Ctx, kind: VerifyKind, a: VerifyArgs) -> Result<()> {
    let command = match kind {
        VerifyKind::Identity => "verify identity",
        VerifyKind::McInequality => "verify mc-inequality",
        VerifyKind::Lln => "verify lln",
    };
    let rc = ctx.resolve(command, a)?;
    let a = &rc.args;
    let params = a.channel.params()?;
    if a.trials < 2 {
        return Err(ConfigError("at least two trials are needed for a standard error".into()).into());
    }
    let mut out = OutDir::create(&ctx.out)?;
    let pass = match kind {
        VerifyKind::Identity | VerifyKind::McInequality => {
            let model = a.model.model(a.n)?;
            let report = if kind == VerifyKind::Identity {
                verify_csiszar_identity(&model, &params, a.trials, a.seed)?
            } else {
                verify_mc_inequality(&model, &params, a.trials, a.seed)?
            };
            out.write_json("report.json", &report)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            report.pass
        }
        VerifyKind::Lln => {
            if a.ns.is_empty() || a.ns.contains(&0) {
                return Err(ConfigError("ns must be a non-empty list of positive block counts".into()).into());
            }
            let base = a.model.model(a.ns[0])?;
            let mut report = verify_lln(&base, &params, &a.ns, a.trials, a.seed)?;
            let s = unit_scale(rc.bits);
            for row in &mut report.rows {
                scale_lln_row(row, s);
            }
            let csv_path = out.path("lln.csv");
            let mut w = csv::Writer::from_path(&csv_path)?;
            for row in &report.rows {
                w.serialize(row)?;
            }
            w.flush()?;
            out.write_json("report.json", &report)?;
            print(rc.format, &serde_json::to_value(&report)?, &csv_path)?;
            report.pass
        }
    };
    out.finish(&rc)?;
    if pass {
        Ok(())
    } else {
        Err(VerificationFailed(command.to_string()).into())
    }
}

fn scale_lln_row(row: &mut LlnRow, s: f64) {
    row.mean *= s;
    row.std_error *= s;
    row.target *= s;
    row.tolerance *= s;
}

/// Cloud-rate target: what `z` can decode, and for a common message also
/// what `y` can decode of the cloud.
fn cloud_target(setting: Setting, t: &SuperpositionRates) -> f64 {
    match setting {
        Setting::Independent => t.c_z,
        Setting::DegradedMessageSets => t.c_z.min(t.c_tilde_y),
    }
}

fn codesim(ctx: &Ctx, a: CodesimArgs) -> Result<()> {
    let rc = ctx.resolve("codesim", a)?;
    let a = &rc.args;
    let params = a.channel.params()?;
    if a.ns.is_empty() || a.ns.contains(&0) {
        return Err(ConfigError("ns must be a non-empty list of positive block counts".into()).into());
    }
    if a.trials == 0 {
        return Err(ConfigError("trials must be positive".into()).into());
    }
    let probe = a.model.model(a.ns[0])?;
    let targets = superposition_rates(&params, &probe.aux_probs, &probe.cond_bernoulli);
    let rates = CodingRates {
        r_y: a.ry.unwrap_or(a.rate_fraction * targets.c_hat_y),
        r_cloud: a.rz.unwrap_or(a.rate_fraction * cloud_target(a.setting, &targets)),
    };
    if !(rates.r_y >= 0.0 && rates.r_cloud >= 0.0 && rates.r_y.is_finite() && rates.r_cloud.is_finite()) {
        return Err(ConfigError(format!("rates must be finite and nonnegative, got {rates:?}")).into());
    }

    let s = unit_scale(rc.bits);
    let mut out = OutDir::create(&ctx.out)?;
    let csv_path = out.path("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    let mut results = Vec::new();
    let mut details = Vec::new();
    for &n in &a.ns {
        let model = a.model.model(n)?;
        let mut cfg = ExperimentConfig::new(a.setting, params, model, rates, a.trials, a.seed);
        if let Some(g) = a.gamma_y {
            cfg.thresholds.gamma_y = g;
        }
        if let Some(g) = a.gamma_z {
            cfg.thresholds.gamma_z = g;
        }
        cfg.codebook_per_trial = !a.fixed_codebook;
        cfg.symbol_cap = a.symbol_cap;
        info!("codesim n={n}");
        let r = run_experiment(&cfg)?;
        let mut row = SweepRow::new(&cfg, &r);
        row.r_y *= s;
        row.r_cloud *= s;
        row.gamma_y *= s;
        row.gamma_z *= s;
        w.serialize(&row)?;
        // rows already finished survive an interrupted sweep
        w.flush()?;
        details.push(json!({
            "n": n,
            "cloud_size": r.cloud_size,
            "satellite_size": r.satellite_size,
            "errors_y": counts(&r.errors_y),
            "errors_z": counts(&r.errors_z),
            "pe_total": r.pe_total,
            "ci": [r.ci_lo, r.ci_hi],
        }));
        results.push(r);
    }
    drop(w);
    let summary = json!({
        "units": unit_name(rc.bits),
        "setting": a.setting,
        "rates": { "r_y": rates.r_y * s, "r_cloud": rates.r_cloud * s },
        "targets": {
            "c_z": targets.c_z * s,
            "c_hat_y": targets.c_hat_y * s,
            "c_tilde_y": targets.c_tilde_y * s,
        },
        "runs": details,
        "non_increasing": non_increasing_up_to_ci(&results),
    });
    out.write_json("results.json", &summary)?;
    out.finish(&rc)?;
    print(rc.format, &summary, &csv_path)
}

fn counts(c: &ErrorCounts) -> Value {
    json!({
        "no_candidate": c.no_candidate,
        "wrong_candidate": c.wrong_candidate,
        "ambiguous": c.ambiguous,
    })
}
