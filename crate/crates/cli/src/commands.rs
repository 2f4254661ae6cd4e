use std::io::Write;

use serde::Serialize;
use serde_json::json;

use pldp_core::sim::oracle::width_cases;
use pldp_core::sim::{round_half_up, run_trials_detailed};
use pldp_core::{
    ldp_for, ldp_solution_hidden, minimize_zeta_numeric, psi_net_for, pt_curve, zeta, zeta_grad_analytic,
    hidden_to_partial, LdpSolution, Model, Regime, SimConfig, ZetaPoint,
};

use crate::args::{
    Format, LdpArgs, PtArgs, SimArgs, VerifyCommand, VerifyGridArgs, VerifyWidthArgs,
};
use crate::output::{emit_csv, emit_json, num, record, RunManifest};
use crate::CliError;

pub fn pt(args: &PtArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let grid = match (&args.alpha, &args.alpha_grid) {
        (Some(a), _) => vec![*a],
        (None, Some(g)) => g.points(),
        (None, None) => unreachable!("clap requires one of --alpha / --alpha-grid"),
    };
    let model = args.model.model();
    let points = pt_curve(args.eta, model, &grid).map_err(CliError::from_core)?;
    let mut rows = Vec::new();
    let mut failed = 0;
    for (alpha, p) in grid.iter().zip(points) {
        match p {
            Ok(p) => rows.push(vec![num(p.alpha), num(p.beta_w), num(p.residual)]),
            Err(e) => {
                failed += 1;
                writeln!(err, "alpha = {alpha}: {e}")?;
            }
        }
    }
    let mut manifest = RunManifest::new("pt").param("model", args.model.name()).param("eta", args.eta);
    manifest = match (&args.alpha, &args.alpha_grid) {
        (Some(a), _) => manifest.param("alpha", a),
        (_, Some(g)) => manifest.param("alpha_grid", &g.text),
        _ => manifest,
    };
    emit_csv(args.out.as_deref(), out, &manifest, &["alpha", "beta_w", "residual"], &rows)?;
    if failed > 0 {
        return Err(CliError::Failure(format!("{failed} of {} points failed", grid.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct LdpRow {
    alpha: f64,
    #[serde(flatten)]
    solution: LdpSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta1_hp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta0_hp: Option<f64>,
}

pub fn ldp(args: &LdpArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let grid = match &args.alpha_grid {
        Some(g) => g.points(),
        None => args.alphas.clone(),
    };
    let hidden = args.model.model() == Model::HiddenPartial;
    let mut rows = Vec::new();
    let mut failed = 0;
    for &alpha in &grid {
        let res = if hidden {
            ldp_solution_hidden(alpha, args.beta, args.eta).map(|h| LdpRow {
                alpha,
                solution: h.base,
                beta1_hp: Some(h.beta1_hp),
                beta0_hp: Some(h.beta0_hp),
            })
        } else {
            ldp_for(Model::Partial, alpha, args.beta, args.eta).map(|s| LdpRow {
                alpha,
                solution: s,
                beta1_hp: None,
                beta0_hp: None,
            })
        };
        match res {
            Ok(r) => rows.push(r),
            Err(e @ pldp_core::Error::Domain(_)) => return Err(CliError::Usage(format!("alpha = {alpha}: {e}"))),
            Err(e) => {
                failed += 1;
                writeln!(err, "alpha = {alpha}: {e}")?;
            }
        }
    }
    let mut manifest = RunManifest::new("ldp")
        .param("model", args.model.name())
        .param("eta", args.eta)
        .param("beta", args.beta);
    manifest = match &args.alpha_grid {
        Some(g) => manifest.param("alpha_grid", &g.text),
        None => manifest.param("alphas", grid.iter().map(|a| num(*a)).collect::<Vec<_>>().join(",")),
    };
    match args.format {
        Format::Csv => {
            let mut header = vec!["alpha", "beta1", "beta0", "nu", "a0", "c3", "gamma", "rate"];
            if hidden {
                header.extend(["beta1_hp", "beta0_hp"]);
            }
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let s = &r.solution;
                    let mut v = vec![
                        num(r.alpha),
                        num(s.beta1),
                        num(s.beta0),
                        num(s.nu),
                        num(s.a0),
                        num(s.c3),
                        num(s.gamma),
                        num(s.rate),
                    ];
                    if let (Some(b1), Some(b0)) = (r.beta1_hp, r.beta0_hp) {
                        v.extend([num(b1), num(b0)]);
                    }
                    v
                })
                .collect();
            emit_csv(args.out.as_deref(), out, &manifest, &header, &table)?;
        }
        Format::Json => {
            let doc = record(&manifest, json!({ "rows": rows }));
            emit_json(args.out.as_deref(), out, &doc)?;
        }
    }
    if failed > 0 {
        return Err(CliError::Failure(format!("{failed} of {} points failed", grid.len())));
    }
    Ok(())
}

/// One checked quantity per point; `ok` is the per-point verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub label: String,
    pub deviation: f64,
    pub detail: String,
    pub ok: bool,
}

/// Result of a verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    pub tolerance: f64,
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().fold(0.0_f64, |acc, r| if r.deviation.is_nan() { f64::NAN } else { acc.max(r.deviation) })
    }

    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.ok)
    }

    fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let verdict = if self.passed() { "ok" } else { "FAILED" };
        writeln!(
            out,
            "{}: max deviation {:e} over {} points (tolerance {:e}): {verdict}",
            self.title,
            self.max_deviation(),
            self.rows.len(),
            self.tolerance
        )?;
        if !self.passed() {
            let mut bad: Vec<&CheckRow> = self.rows.iter().filter(|r| !r.ok).collect();
            bad.sort_by(|a, b| b.deviation.total_cmp(&a.deviation));
            for r in bad.iter().take(10) {
                writeln!(out, "  {}: deviation {:e} {}", r.label, r.deviation, r.detail)?;
            }
        }
        Ok(())
    }
}

fn partial_params(model: Model, beta: f64, eta: f64) -> (f64, f64) {
    match model {
        Model::Partial => (beta, eta),
        Model::HiddenPartial => hidden_to_partial(beta, eta),
    }
}

/// `|psi_net - rate|` at each grid point.
pub fn geometry_report(model: Model, beta: f64, eta: f64, grid: &[f64], tolerance: f64) -> Report {
    let rows = grid
        .iter()
        .map(|&alpha| {
            let label = format!("alpha = {alpha}");
            match (ldp_for(model, alpha, beta, eta), psi_net_for(model, alpha, beta, eta)) {
                (Ok(s), Ok(g)) => {
                    let d = (g.psi_net - s.rate).abs();
                    CheckRow {
                        label,
                        deviation: d,
                        detail: format!("(psi_net {}, rate {})", g.psi_net, s.rate),
                        ok: d <= tolerance,
                    }
                }
                (a, b) => CheckRow {
                    label,
                    deviation: f64::NAN,
                    detail: format!("{:?} / {:?}", a.err(), b.err()),
                    ok: false,
                },
            }
        })
        .collect();
    Report { title: "geometry".into(), tolerance, rows }
}

/// Gradient max-norm at the closed-form point, and the gap between an
/// independent numeric optimization of zeta and the closed-form rate.
/// A point passes when the gradient is within `tolerance`, the numeric
/// value is within 1e-6 of the rate and not below it by more than 1e-7.
pub fn stationarity_report(model: Model, beta: f64, eta: f64, grid: &[f64], tolerance: f64) -> Report {
    let (bp, ep) = partial_params(model, beta, eta);
    let rows = grid
        .iter()
        .map(|&alpha| {
            let label = format!("alpha = {alpha}");
            let s = match ldp_for(model, alpha, beta, eta) {
                Ok(s) => s,
                Err(e) => return CheckRow { label, deviation: f64::NAN, detail: e.to_string(), ok: false },
            };
            let p = ZetaPoint::new(s.c3, s.nu, s.a0);
            // At a0 = 1 (on the curve) the gradient's coupling terms are 0/0;
            // the value check still applies.
            let grad = if s.a0 == 1.0 || s.regime == Regime::OnCurve {
                Ok(0.0)
            } else {
                zeta_grad_analytic(alpha, bp, ep, p).map(|(a, b, c)| a.abs().max(b.abs()).max(c.abs()))
            };
            let at_point = zeta(alpha, bp, ep, p);
            let numeric = minimize_zeta_numeric(alpha, bp, ep, s.regime);
            match (grad, at_point, numeric) {
                (Ok(g), Ok(z), Ok((q, v))) => {
                    let gap = (v - s.rate).abs();
                    let ok = g <= tolerance && gap <= 1e-6 && v >= s.rate - 1e-7;
                    CheckRow {
                        label,
                        deviation: g,
                        detail: format!(
                            "(zeta at closed form {z}, rate {}, numeric {v} at {q}, gap {gap:e})",
                            s.rate
                        ),
                        ok,
                    }
                }
                (g, z, n) => CheckRow {
                    label,
                    deviation: f64::NAN,
                    detail: format!("{:?} / {:?} / {:?}", g.err(), z.err(), n.err()),
                    ok: false,
                },
            }
        })
        .collect();
    Report { title: "stationarity".into(), tolerance, rows }
}

pub fn width_report(model: Model, n: usize, cases: usize, seed: u64, tolerance: f64) -> Report {
    let rows = width_cases(model, n, cases, seed)
        .into_iter()
        .enumerate()
        .map(|(i, c)| CheckRow {
            label: format!("case {i} (k = {}, known = {})", c.k, c.known),
            deviation: c.gap(),
            detail: format!("(closed form {}, oracle {})", c.closed_form, c.oracle),
            ok: c.gap() <= tolerance,
        })
        .collect();
    Report { title: "width".into(), tolerance, rows }
}

pub fn verify(cmd: &VerifyCommand, out: &mut dyn Write) -> Result<(), CliError> {
    let report = match cmd {
        VerifyCommand::Geometry(a) => grid_report(a, 1e-9, geometry_report),
        VerifyCommand::Stationarity(a) => grid_report(a, 1e-7, stationarity_report),
        VerifyCommand::Width(a) => verify_width(a),
    };
    report.write(out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("{} check failed", report.title)))
    }
}

fn grid_report(a: &VerifyGridArgs, default_tol: f64, f: fn(Model, f64, f64, &[f64], f64) -> Report) -> Report {
    f(a.model.model(), a.beta, a.eta, &a.alpha_grid.points(), a.tolerance.unwrap_or(default_tol))
}

fn verify_width(a: &VerifyWidthArgs) -> Report {
    width_report(a.model.model(), a.n as usize, a.cases as usize, a.seed, a.tolerance)
}

/// Dimensions from explicit counts where given, ratios otherwise.
pub fn sim_config(args: &SimArgs) -> Result<SimConfig, CliError> {
    let n = args.n as usize;
    let m = match (args.m, args.alpha) {
        (Some(m), _) => m as usize,
        (None, Some(a)) => round_half_up(a * n as f64),
        _ => return Err(CliError::Usage("one of --m / --alpha is required".into())),
    };
    let k = match (args.k, args.beta) {
        (Some(k), _) => k as usize,
        (None, Some(b)) => round_half_up(b * n as f64),
        _ => return Err(CliError::Usage("one of --k / --beta is required".into())),
    };
    let known = match (args.known, args.eta) {
        (Some(c), _) => c as usize,
        (None, Some(e)) => round_half_up(e * k as f64),
        _ => return Err(CliError::Usage("one of --known / --eta is required".into())),
    };
    SimConfig::new(args.model.model(), n, m, k, known, args.trials as usize, args.seed).map_err(CliError::from_core)
}

fn sim_manifest(args: &SimArgs, cfg: &SimConfig) -> RunManifest {
    // Thread count and output paths do not affect results and are left out,
    // so reruns that differ only in those produce identical records.
    let mut m = RunManifest::new("sim")
        .param("model", args.model.name())
        .param("n", cfg.n)
        .param("m", cfg.m)
        .param("k", cfg.k)
        .param("known", cfg.known_count)
        .param("trials", cfg.trials)
        .seed(cfg.master_seed);
    for (key, v) in [("alpha", args.alpha), ("beta", args.beta), ("eta", args.eta)] {
        if let Some(v) = v {
            m = m.param(key, v);
        }
    }
    m
}

pub fn sim(args: &SimArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = sim_config(args)?;
    let manifest = sim_manifest(args, &cfg);
    let run = || run_trials_detailed(&cfg);
    let result = match args.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build()
            .map_err(|e| CliError::Failure(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let (estimate, records) = result.map_err(|e| CliError::Failure(e.to_string()))?;

    if let Some(path) = &args.trials_csv {
        let rows: Vec<Vec<String>> = records
            .iter()
            .map(|r| {
                let flag = match r.failure {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "invalid",
                };
                vec![r.trial_index.to_string(), flag.to_string(), r.iterations.to_string(), num(r.residual)]
            })
            .collect();
        emit_csv(Some(path), out, &manifest, &["trial_index", "failure", "iterations", "residual"], &rows)?;
    }

    let doc = record(
        &manifest,
        json!({
            "config": cfg,
            "ratios": {
                "alpha": cfg.m as f64 / cfg.n as f64,
                "beta": cfg.k as f64 / cfg.n as f64,
                "eta": cfg.known_count as f64 / cfg.k as f64,
            },
            "estimate": estimate,
        }),
    );
    emit_json(args.out.as_deref(), out, &doc)
}
