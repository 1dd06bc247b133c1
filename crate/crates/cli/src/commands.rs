use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Cli, Command, CompareArgs, SingleArgs, SolverArgs, SweepArgs, VerifyArgs};
use crate::output::{output_dir, write_json, write_solution};
use crate::Failure;
use subsonic_core::analysis::{
    check_comparison, check_field_bounds, estimate_intrinsic_radii, fit_exponent_on_nodes, lower_bound_amplitude,
    stability_norms, verify_solution, Check, CheckStatus, ComparisonReport, Endpoint, FieldBoundsReport,
    IntrinsicRadii, PowerFit, StabilityReport, VerificationSummary, VerifyTolerances, LEFT_WINDOW, RIGHT_WINDOW,
};
use subsonic_core::profiles::{profile_order_with_samples, random_ordered_pair, ProfileOrder};
use subsonic_core::solver::StageReport;
use subsonic_core::{continuation_solve, solve_pair, DopingProfile, PhysicalParams, SolutionPair, SolveOptions};

/// Resolved configuration echoed into every JSON report.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: &'static str,
    profiles: Vec<String>,
    alpha: Vec<f64>,
    solver: SolveOptions,
    out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    tolerances: Option<VerifyTolerances>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    random_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strict_order: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison_tol: Option<f64>,
}

impl RunConfig {
    fn new(command: &'static str, profiles: Vec<String>, alpha: Vec<f64>, solver: SolveOptions, out: PathBuf) -> Self {
        Self {
            command,
            profiles,
            alpha,
            solver,
            out,
            tolerances: None,
            seed: None,
            eps: None,
            random_pairs: None,
            strict_order: None,
            comparison_tol: None,
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Solve(args) => solve(args),
        Command::Verify(args) => verify(args),
        Command::Compare(args) => compare(args),
        Command::Sweep(args) => sweep(args),
    }
}

fn parse_profile(spec: &str) -> Result<DopingProfile, Failure> {
    spec.parse::<DopingProfile>().map_err(|e| Failure::input(format!("profile `{spec}`: {e}")))
}

/// Validates inputs before any output directory is created.
fn prepare(solver: &SolverArgs, alphas: &[f64]) -> Result<SolveOptions, Failure> {
    for &alpha in alphas {
        PhysicalParams::new(alpha)?;
    }
    let opts = solver.options();
    opts.validate()?;
    opts.grid()?;
    Ok(opts)
}

#[derive(Debug, Serialize)]
struct BoundsSummary {
    inf_b: f64,
    sup_b: f64,
    n_min_interior: f64,
    n_max: f64,
    interior_subsonic: bool,
    upper_bound_ok: bool,
    field: FieldBoundsReport,
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    config: &'a RunConfig,
    profile: &'a DopingProfile,
    profile_id: &'a str,
    residual_norm: f64,
    j_final: f64,
    stages: &'a [StageReport],
    bounds: BoundsSummary,
    lower_bound_amplitude: f64,
}

fn solve_report<'a>(config: &'a RunConfig, b: &'a DopingProfile, sol: &'a SolutionPair) -> SolveReport<'a> {
    let last = sol.n.len() - 1;
    let interior = &sol.n[1..last];
    let n_min_interior = interior.iter().copied().fold(f64::INFINITY, f64::min);
    let n_max = sol.n.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    SolveReport {
        config,
        profile: b,
        profile_id: &sol.profile_id,
        residual_norm: sol.residual_norm,
        j_final: sol.j_final,
        stages: &sol.stages,
        bounds: BoundsSummary {
            inf_b: b.inf_b(),
            sup_b: b.sup_b(),
            n_min_interior,
            n_max,
            interior_subsonic: n_min_interior > 1.0,
            upper_bound_ok: n_max <= b.sup_b() + 10.0 * sol.newton_tol,
            field: check_field_bounds(sol, b),
        },
        lower_bound_amplitude: lower_bound_amplitude(sol.x(), &sol.n),
    }
}

fn solve_single(args: &SingleArgs, command: &'static str) -> Result<(RunConfig, DopingProfile, SolveOptions), Failure> {
    let b = parse_profile(&args.profile)?;
    let opts = prepare(&args.solver, &[args.alpha])?;
    let out = output_dir(args.solver.out.as_deref(), command)?;
    let config = RunConfig::new(command, vec![args.profile.clone()], vec![args.alpha], opts.clone(), out);
    Ok((config, b, opts))
}

fn solve(args: &SingleArgs) -> Result<(), Failure> {
    let (config, b, opts) = solve_single(args, "solve")?;
    let sol = continuation_solve(&b, args.alpha, &opts)?;
    write_solution(&config.out.join("solution.csv"), &sol)?;
    write_json(&config.out.join("solve_report.json"), &solve_report(&config, &b, &sol))?;
    println!("solution written to {}", config.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct AsymptoticsFile<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

#[derive(Debug, Serialize)]
struct SyntheticReport {
    synthetic: bool,
    right_fit: PowerFit,
    left_fit: PowerFit,
    summary: VerificationSummary,
}

fn failed_checks(summary: &VerificationSummary) -> Failure {
    let names: Vec<String> = summary
        .failed()
        .map(|c| format!("{} (value {:.6e}, limit {:.6e}: {})", c.name, c.value, c.limit, c.detail))
        .collect();
    Failure::verification(format!("failed checks: {}", names.join("; ")))
}

fn exponent_check(name: &'static str, fit: &PowerFit, target: f64, tol: &VerifyTolerances) -> Check {
    let ok = (fit.exponent - target).abs() <= tol.exponent_tol && fit.r2 >= tol.min_r2;
    Check {
        name,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        value: fit.exponent,
        limit: tol.exponent_tol,
        detail: format!("target {target} with r2 {:.12}", fit.r2),
    }
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let (mut config, b, opts) = solve_single(&args.single, "verify")?;
    let tol = args.tolerances.tolerances();
    config.tolerances = Some(tol.clone());
    let path = config.out.join("asymptotics_report.json");

    if args.synthetic {
        let grid = opts.grid()?;
        let x = grid.nodes();
        let right: Vec<f64> = x.iter().map(|&t| 1.0 + 3.0 * (1.0 - t).sqrt()).collect();
        let left: Vec<f64> = x.iter().map(|&t| 1.0 + 0.3 * t).collect();
        let right_fit = fit_exponent_on_nodes(x, &right, Endpoint::Right, RIGHT_WINDOW)?;
        let left_fit = fit_exponent_on_nodes(x, &left, Endpoint::Left, LEFT_WINDOW)?;
        let summary = VerificationSummary::new(vec![
            exponent_check("right_exponent", &right_fit, 0.5, &tol),
            exponent_check("left_exponent", &left_fit, 1.0, &tol),
        ]);
        let passed = summary.passed;
        let report = SyntheticReport { synthetic: true, right_fit, left_fit, summary };
        write_json(&path, &AsymptoticsFile { config: &config, body: &report })?;
        return if passed { Ok(()) } else { Err(failed_checks(&report.summary)) };
    }

    let sol = continuation_solve(&b, args.single.alpha, &opts)?;
    write_solution(&config.out.join("solution.csv"), &sol)?;
    write_json(&config.out.join("solve_report.json"), &solve_report(&config, &b, &sol))?;
    let verification = verify_solution(&sol, &b, &tol)?;
    write_json(&path, &AsymptoticsFile { config: &config, body: &verification })?;
    for c in &verification.summary.checks {
        println!("{:<22} {:?}  {}", c.name, c.status, c.detail);
    }
    if verification.summary.passed {
        Ok(())
    } else {
        Err(failed_checks(&verification.summary))
    }
}

#[derive(Debug, Serialize)]
struct CompareReport<'a> {
    config: &'a RunConfig,
    b1: &'a DopingProfile,
    b2: &'a DopingProfile,
    /// The profiles were swapped so that `b1` dominates.
    reordered: bool,
    stability: &'a StabilityReport,
    comparison: &'a ComparisonReport,
    radii: &'a IntrinsicRadii,
    field_bounds: [FieldBoundsReport; 2],
}

fn compare(args: &CompareArgs) -> Result<(), Failure> {
    let first = parse_profile(&args.profiles[0])?;
    let second = parse_profile(&args.profiles[1])?;
    let opts = prepare(&args.solver, &[args.alpha])?;
    let samples = 10 * opts.cells;
    let (b1, b2, reordered) = match profile_order_with_samples(&first, &second, 0.0, samples) {
        ProfileOrder::Dominates => (first, second, false),
        ProfileOrder::Dominated if !args.strict_order => (second, first, true),
        ProfileOrder::Dominated => {
            return Err(Failure::input(
                "first profile does not dominate the second; the comparison principle needs b1 >= b2 on [0, 1] \
                 (drop --strict-order to reorder automatically)",
            ))
        }
        ProfileOrder::Incomparable => {
            return Err(Failure::input(
                "profiles are incomparable; the comparison principle needs b1 >= b2 on [0, 1]",
            ))
        }
    };
    let out = output_dir(args.solver.out.as_deref(), "compare")?;
    let mut config = RunConfig::new("compare", vec![b1.id(), b2.id()], vec![args.alpha], opts.clone(), out);
    config.strict_order = Some(args.strict_order);
    config.comparison_tol = Some(args.comparison_tol);

    let (s1, s2) = solve_pair(&b1, &b2, args.alpha, &opts)?;
    let stability = stability_norms(&s1, &s2, &b1, &b2, args.comparison_tol)?;
    let comparison = check_comparison(&s1, &s2, ProfileOrder::Dominates, args.comparison_tol)?;
    let radii = estimate_intrinsic_radii(&s1, &s2, &b1, &b2)?;
    write_solution(&config.out.join("solution_1.csv"), &s1)?;
    write_solution(&config.out.join("solution_2.csv"), &s2)?;
    let report = CompareReport {
        config: &config,
        b1: &b1,
        b2: &b2,
        reordered,
        stability: &stability,
        comparison: &comparison,
        radii: &radii,
        field_bounds: [check_field_bounds(&s1, &b1), check_field_bounds(&s2, &b2)],
    };
    write_json(&config.out.join("stability_report.json"), &report)?;
    println!(
        "comparison_ok={} sup_n_diff={:.3e} ratio={}",
        stability.comparison_ok,
        stability.sup_n_diff,
        stability.ratio.map_or("undefined".to_string(), |r| format!("{r:.6}"))
    );
    if stability.comparison_ok {
        Ok(())
    } else {
        Err(Failure::verification(format!(
            "comparison failed: min(n1 - n2) = {:e} at node {}",
            comparison.worst_value, comparison.worst_node
        )))
    }
}

/// One `(b1, b2, alpha)` cell of a sweep.
struct Cell {
    alpha: f64,
    eps: f64,
    b1: DopingProfile,
    b2: Option<DopingProfile>,
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub eps: f64,
    pub sup_n_diff: Option<f64>,
    pub weighted_deriv_diff: Option<f64>,
    #[serde(rename = "E_c1_diff")]
    pub e_c1_diff: Option<f64>,
    pub ratio: Option<f64>,
    pub status: String,
    pub b1: String,
    pub b2: String,
}

fn run_cell(cell: &Cell, opts: &SolveOptions, tol: f64) -> SweepRow {
    let mut row = SweepRow {
        alpha: cell.alpha,
        eps: cell.eps,
        sup_n_diff: None,
        weighted_deriv_diff: None,
        e_c1_diff: None,
        ratio: None,
        status: "degenerate_eps".into(),
        b1: cell.b1.id(),
        b2: cell.b2.as_ref().map_or_else(|| cell.b1.id(), DopingProfile::id),
    };
    let Some(b2) = &cell.b2 else {
        return row;
    };
    let result = solve_pair(&cell.b1, b2, cell.alpha, opts).and_then(|(s1, s2)| {
        let report = stability_norms(&s1, &s2, &cell.b1, b2, tol)?;
        let bounds = check_field_bounds(&s1, &cell.b1).bound_ok && check_field_bounds(&s2, b2).bound_ok;
        Ok((report, bounds))
    });
    match result {
        Ok((report, bounds)) => {
            let e1_ok = report.ratio.is_some_and(|r| report.e1_minus_e2_at_1 <= r * report.b_dist);
            row.status = if !report.comparison_ok {
                "comparison_failed"
            } else if !(bounds && e1_ok) {
                "field_bound_failed"
            } else {
                "ok"
            }
            .into();
            row.sup_n_diff = Some(report.sup_n_diff);
            row.weighted_deriv_diff = Some(report.weighted_deriv_diff);
            row.e_c1_diff = Some(report.e_c1_diff);
            row.ratio = report.ratio;
        }
        Err(e) => row.status = format!("solver_failed: {e}"),
    }
    row
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    config: &'a RunConfig,
    rows: &'a [SweepRow],
    ratio_min: Option<f64>,
    ratio_max: Option<f64>,
    failed_rows: usize,
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let base = parse_profile(&args.profile)?;
    let opts = prepare(&args.solver, &args.alpha)?;
    if let Some(eps) = args.eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Failure::input(format!("eps must be finite and >= 0, got {eps}")));
    }
    let mut cells = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for &alpha in &args.alpha {
        for &eps in &args.eps {
            let b2 = if eps == 0.0 {
                None
            } else {
                Some(base.shifted(-eps).map_err(|e| Failure::input(format!("b - {eps}: {e}")))?)
            };
            cells.push(Cell { alpha, eps, b1: base.clone(), b2 });
        }
        for _ in 0..args.random_pairs {
            let (b1, b2) = random_ordered_pair(&mut rng);
            let eps = subsonic_core::profiles::profile_sup_distance_with_samples(&b1, &b2, 10 * opts.cells);
            let b2 = (eps > 0.0).then_some(b2);
            cells.push(Cell { alpha, eps, b1, b2 });
        }
    }
    let out = output_dir(args.solver.out.as_deref(), "sweep")?;
    let mut config = RunConfig::new("sweep", vec![args.profile.clone()], args.alpha.clone(), opts.clone(), out);
    config.seed = Some(args.seed);
    config.eps = Some(args.eps.clone());
    config.random_pairs = Some(args.random_pairs);
    config.comparison_tol = Some(args.comparison_tol);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::input(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| cells.par_iter().map(|c| run_cell(c, &opts, args.comparison_tol)).collect());

    let mut writer = csv::Writer::from_path(config.out.join("sweep.csv")).map_err(subsonic_core::Error::from)?;
    for row in &rows {
        writer.serialize(row).map_err(subsonic_core::Error::from)?;
    }
    writer.flush()?;

    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.status != "ok" && r.status != "degenerate_eps").collect();
    let ratios = rows.iter().filter_map(|r| r.ratio);
    let report = SweepReport {
        config: &config,
        rows: &rows,
        ratio_min: ratios.clone().reduce(f64::min),
        ratio_max: ratios.reduce(f64::max),
        failed_rows: failed.len(),
    };
    write_json(&config.out.join("sweep_report.json"), &report)?;
    println!("{} rows written to {}", rows.len(), config.out.display());
    if failed.is_empty() {
        Ok(())
    } else {
        let listed: Vec<String> = failed.iter().map(|r| format!("alpha={} eps={}: {}", r.alpha, r.eps, r.status)).collect();
        Err(Failure::verification(format!("{} sweep rows failed: {}", failed.len(), listed.join("; "))))
    }
}
