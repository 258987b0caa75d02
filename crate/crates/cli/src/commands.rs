use std::path::{Path, PathBuf};
use std::time::Instant;

use ermstab::perturbations::{
    grid_gap, local_boundedness_probe, mosco_liminf_probe, mosco_recovery_probe, solution_set_of,
    BoundednessVerdict, PerturbationSequence, ProbeConfig, GRID_POINTS,
};
use ermstab::problems::{flat_half, make_blowup_family};
use ermstab::sampling::derive_seed;
use ermstab::solution_sets::growth_constant;
use ermstab::solvers::DecayRule;
use ermstab::stability::{
    minimal_value_continuity, pk_usc_test, pk_usc_test_with, qg_bound_verify, regularization_stabilize,
    PkConfig, StabilityReport, Verdict,
};
use ermstab::suites::perturbed_family;
use ermstab::{
    solve_exact, ConstraintSet, ConvexProblem, Error, Matrix, QuadraticLoss, SelectionRule, SolutionShape,
    Vector,
};

use crate::config::ExperimentConfig;
use crate::error::{exit, CliError};
use crate::report::ReportDocument;

pub const EXAMPLES: [&str; 5] = ["prop-3-1", "prop-3-2", "thm-5-1-demo", "prop-6-2", "cor-4-2"];

fn timed<R>(report: &mut ReportDocument, stage: &str, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let out = f();
    report
        .timings_ms
        .insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

fn quad(a: &[Vec<f64>], b: &[f64], c: f64) -> ermstab::Result<ConvexProblem<f64>> {
    Ok(ConvexProblem::quadratic(QuadraticLoss::new(
        Matrix::from_rows(a)?,
        Vector(b.to_vec()),
        c,
    )?))
}

fn shifted(x: f64) -> ermstab::Result<ConvexProblem<f64>> {
    quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[x, 0.0], 0.5 * x * x)
}

fn singleton(set: &ermstab::Solutions) -> Option<&[f64]> {
    match &set.shape {
        SolutionShape::Singleton { point } => Some(point),
        _ => None,
    }
}

fn claims_exit(report: &ReportDocument) -> i32 {
    if report.all_pass() {
        exit::OK
    } else {
        exit::INCONSISTENT
    }
}

/// Runs one canned reproduction; the exit code is 0 iff every claim passes.
pub fn reproduce(id: &str) -> Result<ReportDocument, CliError> {
    let mut report = ReportDocument::new("reproduce");
    report.config = Some(serde_json::json!({ "example": id }));
    let start = Instant::now();
    let result = match id {
        "prop-3-1" => prop_3_1(&mut report),
        "prop-3-2" => prop_3_2(&mut report),
        "thm-5-1-demo" => thm_5_1(&mut report),
        "prop-6-2" => prop_6_2(&mut report),
        "cor-4-2" => cor_4_2(&mut report),
        other => return Err(CliError::UnknownExample(other.to_string())),
    };
    result?;
    report
        .timings_ms
        .insert("total".into(), start.elapsed().as_secs_f64() * 1e3);
    report.exit_code = claims_exit(&report);
    Ok(report)
}

fn prop_3_1(report: &mut ReportDocument) -> Result<(), CliError> {
    let eps = [1.0, 0.1, 0.01, 0.001];
    let mut points = Vec::new();
    for (k, &e) in eps.iter().enumerate() {
        let s = solve_exact(&make_blowup_family(e)?)?;
        let x = singleton(&s).map(|p| p[0]);
        let ok = x.is_some_and(|x| (x * e - 1.0).abs() <= 1e-9) && s.minimal_value.abs() <= 1e-12;
        report.claim(
            format!("minimizer at eps={e}"),
            ok,
            format!(
                "argmin {:?} (expected {{{}}}), minimal value {:e}",
                x,
                1.0 / e,
                s.minimal_value
            ),
        );
        points.push((k + 1, x.unwrap_or(f64::NAN)));
    }
    let seq =
        PerturbationSequence::blowup(DecayRule::Explicit { values: eps.to_vec() }, ConstraintSet::None)?;
    let b = timed(report, "local_boundedness", || {
        local_boundedness_probe(&seq, eps.len())
    })?;
    let escaping = matches!(b.verdict, BoundednessVerdict::Escaping { .. });
    report.claim(
        "local boundedness",
        escaping,
        format!(
            "verdict {}, r_n = {:?}",
            if escaping { "escaping" } else { "bounded" },
            b.radii
        ),
    );
    report.series("r_n", b.indices.clone(), b.radii.clone());
    report.series(
        "minimizer",
        points.iter().map(|p| p.0).collect(),
        points.iter().map(|p| p.1).collect(),
    );
    report.result("boundedness", &b);
    Ok(())
}

fn prop_3_2(report: &mut ReportDocument) -> Result<(), CliError> {
    let eps = [0.5, 0.1, 0.01];
    let interval = ConstraintSet::interval(-1.0, 1.0);
    for &e in &eps {
        let s = solve_exact(&make_blowup_family(e)?.with_constraint(interval.clone())?)?;
        let x = singleton(&s).map(|p| p[0]);
        report.claim(
            format!("constrained argmin at eps={e}"),
            x.is_some_and(|x| (x - 1.0).abs() <= 1e-9),
            format!("argmin {x:?}, minimal value {}", s.minimal_value),
        );
    }
    let limit = solve_exact(&flat_half::<f64>(1).with_constraint(interval.clone())?)?;
    let full = matches!(&limit.shape, SolutionShape::Boxed { lower, upper } if lower.0 == [-1.0] && upper.0 == [1.0]);
    report.claim("limit solution set", full, format!("{:?}", limit.shape));

    let seq = PerturbationSequence::blowup(DecayRule::Explicit { values: eps.to_vec() }, interval)?;
    let r = timed(report, "pk_usc", || {
        pk_usc_test(&seq, &[SelectionRule::MinNorm], eps.len(), 2.0, 1e-9)
    })?;
    report.claim(
        "outer limit inside [-1, 1]",
        r.verdict.is_consistent(),
        format!(
            "verdict {}, outer limit {:?}",
            r.verdict.label(),
            r.selections[0].limit_estimate
        ),
    );
    let c = minimal_value_continuity(&seq, eps.len(), 0.1)?;
    let decreasing = c.gaps.values.windows(2).all(|w| w[1] < w[0]);
    report.claim(
        "minimal values approach 1/2",
        decreasing,
        format!("m_n = {:?}, gaps {:?}", c.member_values.values, c.gaps.values),
    );
    let m1 = mosco_liminf_probe(&seq, &ProbeConfig::new(0, 3, 1e-7).with_targets(vec![vec![0.0]]))?;
    let m2 = mosco_recovery_probe(&seq, &ProbeConfig::new(0, 3, 1e-7).with_targets(vec![vec![1.0]]))?;
    report.claim(
        "recovery at x=1",
        m2.passed(),
        format!("L_eps(1) = (eps-1)^2/2 -> 1/2, margin {:e}", m2.worst_margin),
    );
    report.series(
        "m_n",
        c.member_values.indices.clone(),
        c.member_values.values.clone(),
    );
    report.series("continuity_gap", c.gaps.indices.clone(), c.gaps.values.clone());
    report.result("liminf_probe", &m1);
    report.result("recovery_probe", &m2);
    report.result("stability", &r);
    report.result("continuity", &c);
    Ok(())
}

fn thm_5_1(report: &mut ReportDocument) -> Result<(), CliError> {
    let seq = PerturbationSequence::constant(shifted(1.1)?).with_claimed_limit(shifted(1.0)?)?;
    let radius = 2.0;
    let cert = growth_constant(seq.limit(), radius)?;
    let limit_set = solve_exact(seq.limit())?;
    let rules = [
        SelectionRule::MinNorm,
        SelectionRule::AdversarialFarFrom {
            target: limit_set,
            seed: 7,
        },
    ];
    let r = timed(report, "qg_bound", || {
        qg_bound_verify(&seq, &cert, radius, 1, &rules)
    })?;
    let b = r.bound_series.clone().expect("bound series");
    let grid = timed(report, "grid_oracle", || {
        grid_gap(&seq.member(1)?, seq.limit(), radius, GRID_POINTS)
    })?;
    let (dist, eps, bound) = (b.distance.values[0], b.epsilon.values[0], b.bound.values[0]);
    report.claim(
        "dist(f_n, C_D)",
        (dist - 0.1).abs() <= 1e-9,
        format!("{dist:.10} (expected 0.1)"),
    );
    report.claim(
        "uniform gap eps_n(2)",
        (eps - 0.305).abs() <= 1e-6 && (grid - eps).abs() <= 0.05 * eps,
        format!("trust region {eps:.10}, grid oracle {grid:.6} (expected 0.305)"),
    );
    report.claim(
        "deviation bound",
        b.violations == 0 && dist <= bound + 1e-8,
        format!(
            "{dist:.6} <= sqrt(4 * {eps:.6} / {}) = {bound:.6}, ratio {:.4}",
            cert.mu, b.ratio.values[0]
        ),
    );
    bound_series(report, &r);
    report.result("quadratic_growth", &r);
    Ok(())
}

fn bound_series(report: &mut ReportDocument, r: &StabilityReport<f64>) {
    if let Some(b) = &r.bound_series {
        report.series("dist", b.distance.indices.clone(), b.distance.values.clone());
        report.series("bound", b.bound.indices.clone(), b.bound.values.clone());
        report.series("epsilon", b.epsilon.indices.clone(), b.epsilon.values.clone());
        report.series("ratio", b.ratio.indices.clone(), b.ratio.values.clone());
    }
}

/// `(name, problem, λ, α, expected minimizer)`
type RegularizationCase = (&'static str, ConvexProblem<f64>, f64, f64, Vec<f64>);

fn prop_6_2(report: &mut ReportDocument) -> Result<(), CliError> {
    let x = Matrix::from_rows(&[vec![1.0, 0.0]])?;
    let cases: Vec<RegularizationCase> = vec![
        (
            "least squares diag(1,0)",
            ConvexProblem::quadratic(QuadraticLoss::least_squares(&x, &[1.0])?),
            0.1,
            1.0,
            vec![1.0 / 1.1, 0.0],
        ),
        (
            "flat loss",
            quad(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[0.0, 0.0], 0.0)?,
            1.0,
            2.0,
            vec![0.0, 0.0],
        ),
        (
            "blow-up loss eps=0.1",
            make_blowup_family(0.1)?,
            1.0,
            1.0,
            vec![0.1 / 1.01],
        ),
    ];
    for (k, (name, p, lambda, alpha, expected)) in cases.into_iter().enumerate() {
        let s = regularization_stabilize(&p, lambda, alpha, derive_seed(62, k as u64))?;
        let point = singleton(&s.solution).map(|p| p.to_vec());
        let ok = point
            .as_ref()
            .is_some_and(|p| p.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= 1e-9))
            && s.certificate.mu == lambda * alpha
            && s.check.violations == 0;
        report.claim(
            name,
            ok,
            format!(
                "lambda={lambda}, alpha={alpha}: minimizer {point:?} (expected {expected:?}), mu={}, growth check {}/{} ok",
                s.certificate.mu,
                s.check.samples - s.check.violations,
                s.check.samples
            ),
        );
    }
    Ok(())
}

fn cor_4_2(report: &mut ReportDocument) -> Result<(), CliError> {
    let n_max = 1_000_000;
    let radius = 5.0;
    let tol = 1e-4;
    for seed in 0..4u64 {
        let inst = perturbed_family::<f64>(seed, 4, radius)?;
        let exact = pk_usc_test(&inst.seq, &[SelectionRule::MinNorm], n_max, radius, tol)?;
        let cfg = PkConfig::new(vec![], n_max, radius, tol).certified(DecayRule::InverseSq);
        let cert = timed(report, &format!("certified_{seed}"), || {
            pk_usc_test_with(&inst.seq, &cfg)
        })?;
        let trace = &cert.selections[0];
        let d = trace.limit_distance.unwrap_or(f64::INFINITY);
        report.claim(
            format!("family {seed}"),
            cert.verdict.label() == exact.verdict.label() && d <= tol,
            format!(
                "exact {}, certified {}, limit within {d:.3e} of C_D",
                exact.verdict.label(),
                cert.verdict.label()
            ),
        );
        if seed == 0 {
            if let Some(g) = &trace.gaps {
                report.series("certified_gap", g.indices.clone(), g.values.clone());
            }
            report.series(
                "dist",
                trace.distances.indices.clone(),
                trace.distances.values.clone(),
            );
        }
    }
    Ok(())
}

fn verdict_exit(v: &Verdict<f64>) -> i32 {
    match v {
        Verdict::Consistent => exit::OK,
        Verdict::Inconsistent { .. } => exit::INCONSISTENT,
        Verdict::NoConvergentSelection { .. } => exit::NO_CONVERGENT_SELECTION,
    }
}

/// Reads and validates a config, applying the seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// local boundedness, Mosco probes, PK test, minimal-value continuity and
/// optionally the quadratic-growth bound.
pub fn analyze(cfg: &ExperimentConfig) -> Result<ReportDocument, CliError> {
    let seq = cfg.sequence()?;
    let mut report = ReportDocument::new("analyze");
    report.config = Some(serde_json::to_value(cfg).expect("config serializes"));

    let b = timed(&mut report, "local_boundedness", || {
        local_boundedness_probe(&seq, cfg.n_max)
    })?;
    report.claim(
        "local boundedness",
        b.is_bounded(),
        match &b.verdict {
            BoundednessVerdict::Bounded { r_hat } => format!("bounded, R_hat = {r_hat}"),
            BoundednessVerdict::Escaping { cause } => format!(
                "escaping{}",
                cause.as_ref().map_or(String::new(), |c| format!(": {c}"))
            ),
        },
    );
    report.series("boundedness_r", b.indices.clone(), b.radii.clone());
    report.result("boundedness", &b);

    let probe = cfg.probe_config();
    let m1 = timed(&mut report, "mosco_liminf", || mosco_liminf_probe(&seq, &probe))?;
    let m2 = timed(&mut report, "mosco_recovery", || {
        mosco_recovery_probe(&seq, &probe)
    })?;
    report.claim(
        "mosco liminf probe",
        m1.passed(),
        format!("worst margin {:e}", m1.worst_margin),
    );
    report.claim(
        "mosco recovery probe",
        m2.passed(),
        format!("worst margin {:e}", m2.worst_margin),
    );
    report.result("liminf_probe", &m1);
    report.result("recovery_probe", &m2);

    let limit_set = solution_set_of(seq.limit())?;
    let rules: Vec<SelectionRule<f64>> = cfg
        .rules
        .iter()
        .map(|r| r.resolve(cfg.seed, &limit_set))
        .collect();
    let pk = timed(&mut report, "pk_usc", || {
        pk_usc_test(&seq, &rules, cfg.n_max, cfg.radius, cfg.tol)
    })?;
    report.claim(
        "pk upper semicontinuity",
        pk.verdict.is_consistent(),
        pk.verdict.label(),
    );
    for s in &pk.selections {
        report.series(
            &format!("dist_{}", s.rule),
            s.distances.indices.clone(),
            s.distances.values.clone(),
        );
    }
    report.series(
        "m_n",
        pk.minimal_values.indices.clone(),
        pk.minimal_values.values.clone(),
    );
    let mut code = verdict_exit(&pk.verdict);
    report.result("stability", &pk);

    let c = timed(&mut report, "continuity", || {
        minimal_value_continuity(&seq, cfg.n_max, cfg.continuity_tol)
    })?;
    report.claim(
        "minimal-value continuity",
        c.converged,
        format!(
            "last-quarter gap {:e}, fitted rate {:?}",
            c.last_quarter_max, c.fitted_rate
        ),
    );
    report.series("continuity_gap", c.gaps.indices.clone(), c.gaps.values.clone());
    report.result("continuity", &c);

    if cfg.quadratic_growth {
        let outcome = growth_constant(seq.limit(), cfg.radius)
            .and_then(|cert| qg_bound_verify(&seq, &cert, cfg.radius, cfg.n_max, &rules));
        match timed(&mut report, "qg_bound", || outcome) {
            Ok(r) => {
                let violations = r.bound_series.as_ref().map_or(0, |b| b.violations);
                report.claim(
                    "deviation bound",
                    violations == 0,
                    format!("{violations} violations"),
                );
                if violations > 0 {
                    code = exit::INCONSISTENT;
                }
                bound_series(&mut report, &r);
                report.result("quadratic_growth", &r);
            }
            Err(e @ (Error::HypothesisViolated(_) | Error::UnsupportedStructure(_))) => {
                report.result(
                    "quadratic_growth",
                    &serde_json::json!({ "asserted": false, "reason": e.to_string() }),
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    report.exit_code = code;
    Ok(report)
}

/// The configured family's bound plus `trials` seeded random instances.
pub fn verify_qg(cfg: &ExperimentConfig, trials: usize) -> Result<ReportDocument, CliError> {
    let seq = cfg.sequence()?;
    let mut report = ReportDocument::new("verify-qg");
    report.config = Some(serde_json::json!({ "config": cfg, "trials": trials }));
    let limit_set = solution_set_of(seq.limit())?;
    let rules: Vec<SelectionRule<f64>> = cfg
        .rules
        .iter()
        .map(|r| r.resolve(cfg.seed, &limit_set))
        .collect();
    match growth_constant(seq.limit(), cfg.radius)
        .and_then(|cert| qg_bound_verify(&seq, &cert, cfg.radius, cfg.n_max, &rules))
    {
        Ok(r) => {
            let v = r.bound_series.as_ref().map_or(0, |b| b.violations);
            report.claim("configured family", v == 0, format!("{v} violations"));
            bound_series(&mut report, &r);
            report.result("configured", &r);
        }
        Err(e @ (Error::HypothesisViolated(_) | Error::UnsupportedStructure(_))) => {
            report.result(
                "configured",
                &serde_json::json!({ "asserted": false, "reason": e.to_string() }),
            );
        }
        Err(e) => return Err(e.into()),
    }

    let suite = &cfg.suite;
    let outcomes = timed(&mut report, "suite", || {
        use rayon::prelude::*;
        (0..trials)
            .into_par_iter()
            .map(|k| -> Result<(usize, f64), CliError> {
                let inst = perturbed_family::<f64>(
                    derive_seed(cfg.seed, 1000 + k as u64),
                    suite.max_dimension,
                    suite.radius,
                )?;
                let cert = growth_constant(inst.seq.limit(), suite.radius)?;
                let target = solve_exact(inst.seq.limit())?;
                let rules = [
                    SelectionRule::MinNorm,
                    SelectionRule::AdversarialFarFrom {
                        target,
                        seed: derive_seed(cfg.seed, k as u64),
                    },
                ];
                let r = qg_bound_verify(&inst.seq, &cert, suite.radius, cfg.n_max, &rules)?;
                let b = r.bound_series.expect("bound series");
                Ok((b.violations, b.ratio.max()))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    let total: usize = outcomes.iter().map(|o| o.0).sum();
    report.claim(
        "randomized suite",
        total == 0,
        format!("{trials} instances, {total} violations"),
    );
    report.series(
        "worst_ratio",
        (1..=outcomes.len()).collect(),
        outcomes.iter().map(|o| o.1).collect(),
    );
    report.exit_code = claims_exit(&report);
    Ok(report)
}

/// Where a report goes: explicit `--out`, then the config's `output`.
pub fn output_path(out: Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> Option<PathBuf> {
    out.or_else(|| cfg.and_then(|c| c.output.clone()))
}
