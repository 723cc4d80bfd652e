use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use lattika::acceptance;
use lattika::analysis::mellin::{verify_mellin_identity, TestFunction};
use lattika::arakelov::{h0_ar_divisor, h0_theta_divisor, ArakelovDivisor, EffectivityFn};
use lattika::bounded::BoundedReal;
use lattika::delta::{delta_test_function, find_x0, l_delta, tau_coefficients, verify_l_delta_identity};
use lattika::enumeration::{count_ball, enumerate_ball_with, h0_ar_with, minimum_and_short_vectors_with, Budget};
use lattika::genus::{classify_family, same_genus_partial};
use lattika::lattice::{parse_gram_json, RationalJson};
use lattika::measures::{poisson_identity_with, uncertainty_report};
use lattika::theta::{riemann_roch, theta_series_with};
use lattika::{GramMatrix, Lattice, Rational};

use crate::error::{CliError, CliResult};
use crate::report::{num, Report};
use crate::{ArakelovCommand, Cli, Command, DeltaCommand, MellinCommand, RunConfig, TestFn};

const BUDGET_ENV: &str = "LATTIKA_BUDGET";

fn budget(config: &RunConfig) -> CliResult<Budget> {
    if let Some(b) = config.budget {
        return Ok(Budget(b));
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(b) if b > 0 => Ok(Budget(b)),
            _ => Err(CliError::Usage(format!("{BUDGET_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(Budget::default()),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_lattice(path: &Path) -> CliResult<Lattice> {
    Ok(Lattice::from_json_str(&read(path)?)?)
}

/// A Gram entry in a forms file: `{"num": .., "den": ..}` or a bare integer.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Rational(RationalJson),
    Integer(i64),
}

fn load_forms(path: &Path) -> CliResult<Vec<GramMatrix>> {
    let raw: Vec<Vec<Vec<Entry>>> = serde_json::from_str(&read(path)?)?;
    raw.into_iter()
        .map(|g| {
            let rows: Vec<Vec<RationalJson>> = g
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|e| match e {
                            Entry::Rational(q) => q,
                            Entry::Integer(n) => RationalJson { num: n.to_string(), den: "1".into() },
                        })
                        .collect()
                })
                .collect();
            Ok(parse_gram_json(&rows)?)
        })
        .collect()
}

fn parse_rational(s: &str) -> CliResult<Rational> {
    s.trim().parse::<Rational>().map_err(|_| CliError::Usage(format!("expected an integer or a fraction a/b, got {s:?}")))
}

fn bounded_cells(b: &BoundedReal) -> [String; 2] {
    [num(b.estimate), num(b.bound)]
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Invariants { lattice } => invariants(&load_lattice(lattice)?, budget(cfg)?),
        Command::Enumerate { lattice, radius_sq, list } => {
            enumerate(&load_lattice(lattice)?, &parse_rational(radius_sq)?, *list, budget(cfg)?)
        }
        Command::Theta { lattice, t, eps } => {
            let v = theta_series_with(&load_lattice(lattice)?, *t, cfg.tol.unwrap_or(*eps), budget(cfg)?)?;
            Report::json(&json!({ "theta": v, "bounded": v.bounded() }), true)
        }
        Command::RrCheck { lattice } => rr_check(&load_lattice(lattice)?, cfg.tol.unwrap_or(1e-11), budget(cfg)?),
        Command::Poisson { lattice, t, r } => {
            let p = poisson_identity_with(&load_lattice(lattice)?, *t, *r, cfg.tol.unwrap_or(1e-10), budget(cfg)?)?;
            Report::json(&json!({ "check": p, "consistent": p.consistent() }), p.consistent())
        }
        Command::Uncertainty { lattice, r, t_grid } => uncertainty(&load_lattice(lattice)?, *r, t_grid, cfg.tol.unwrap_or(1e-10)),
        Command::Arakelov(ArakelovCommand::H0 { divisor, theta, ar }) => {
            let d = ArakelovDivisor::from_json_str(&read(divisor)?)?;
            let want_ar = *ar || !*theta;
            let want_theta = *theta || !*ar;
            let ar_v = if want_ar { Some(h0_ar_divisor(&d)?) } else { None };
            let th_v = if want_theta { Some(h0_theta_divisor(&d, cfg.tol.unwrap_or(1e-12))?) } else { None };
            Report::json(&json!({ "divisor": d.to_string(), "degree": d.degree(), "h0_ar": ar_v, "h0_theta": th_v }), true)
        }
        Command::Mellin(MellinCommand::Verify { f, s }) => mellin_verify(*f, s, cfg.tol.unwrap_or(1e-8)),
        Command::Delta(DeltaCommand::Tau { n }) => {
            let table = tau_coefficients(*n)?;
            let rows: Vec<Vec<String>> =
                table.tau.iter().enumerate().map(|(i, t)| vec![(i + 1).to_string(), t.to_string()]).collect();
            // τ(n) is an exact integer; it is written as a string to avoid float rounding in JSON readers
            let entries: Vec<_> = table.tau.iter().enumerate().map(|(i, t)| json!({ "n": i + 1, "tau": t.to_string() })).collect();
            Ok(Report::json(&json!({ "n_max": n, "exact": true, "tau": entries }), true)?.with_table(vec!["n", "tau"], rows))
        }
        Command::Delta(DeltaCommand::Lfunction { s }) => {
            let tol = cfg.tol.unwrap_or(1e-12);
            let vals = s.iter().map(|&x| Ok((x, l_delta(x, tol)?))).collect::<CliResult<Vec<_>>>()?;
            let rows = vals.iter().map(|(x, q)| vec![num(*x), num(q.value), num(q.error)]).collect();
            let js: Vec<_> = vals.iter().map(|(x, q)| json!({ "s": x, "value": q.value, "bound": q.error })).collect();
            Ok(Report::json(&js, true)?.with_table(vec!["s", "value", "bound"], rows))
        }
        Command::Delta(DeltaCommand::Verify { s }) => {
            let out = verify_l_delta_identity(s, cfg.tol.unwrap_or(1e-8))?;
            let ok = out.iter().all(|r| r.passed);
            let rows = out
                .iter()
                .map(|r| {
                    vec![
                        num(r.s),
                        num(r.series.value),
                        num(r.series.error),
                        num(r.divisor_route.value),
                        num(r.divisor_route.error),
                        num(r.relative_difference),
                        r.passed.to_string(),
                    ]
                })
                .collect();
            Ok(Report::json(&out, ok)?.with_table(
                vec!["s", "series", "series_bound", "divisor_route", "divisor_route_bound", "relative_difference", "passed"],
                rows,
            ))
        }
        Command::Classify { forms, node_cap } => {
            let forms = load_forms(forms)?;
            let p = classify_family(&forms, budget(cfg)?, *node_cap)?;
            Report::json(&p, true)
        }
        Command::Genus { forms, pairs } => genus(&load_forms(forms)?, pairs),
        Command::Selftest => selftest(),
    }
}

#[derive(Serialize)]
struct Invariants {
    rank: usize,
    determinant: String,
    covolume: BoundedReal,
    degree: BoundedReal,
    integral: bool,
    h0_ar: BoundedReal,
    unit_ball_count: u64,
    minimum: String,
    minimal_vectors: usize,
}

fn invariants(l: &Lattice, budget: Budget) -> CliResult<Report> {
    let h = h0_ar_with(l, budget)?;
    let (m, vs) = minimum_and_short_vectors_with(l, budget)?;
    Report::json(
        &Invariants {
            rank: l.rank(),
            determinant: l.determinant().to_string(),
            covolume: l.covolume(),
            degree: l.arithmetic_degree(),
            integral: l.is_integral(),
            h0_ar: h.value,
            unit_ball_count: h.count,
            minimum: m.to_string(),
            minimal_vectors: vs.len(),
        },
        true,
    )
}

fn enumerate(l: &Lattice, r2: &Rational, list: bool, budget: Budget) -> CliResult<Report> {
    let (count, vectors) = if list {
        let e = enumerate_ball_with(l, r2, budget)?;
        (e.exact_count, Some(e.vectors))
    } else {
        (count_ball(l, r2, budget)?, None)
    };
    let lc = (count as f64).ln();
    let log_count = BoundedReal::new(lc, f64::EPSILON * lc);
    let mut v = json!({ "radius_sq": r2.to_string(), "count": count, "log_count": log_count });
    if let Some(vs) = vectors {
        v["vectors"] = serde_json::to_value(vs)?;
    }
    Report::json(&v, true)
}

fn rr_check(l: &Lattice, eps: f64, budget: Budget) -> CliResult<Report> {
    let rr = riemann_roch(l, eps, budget)?;
    let ok = rr.defect.estimate.abs() <= rr.defect.bound;
    Report::json(
        &json!({
            "h0_theta": rr.h0_theta,
            "h0_theta_dual": rr.h0_theta_dual,
            "degree": rr.degree,
            "defect": rr.defect.estimate,
            "bound": rr.defect.bound,
            "within_bound": ok,
        }),
        ok,
    )
}

fn uncertainty(l: &Lattice, r: f64, grid: &[f64], eps: f64) -> CliResult<Report> {
    let checks = uncertainty_report(l, r, grid, eps)?;
    let ok = checks.iter().all(|c| c.consistent());
    let rows = checks
        .iter()
        .map(|c| {
            let [lhs, lhs_b] = bounded_cells(&c.lhs);
            let [rhs, rhs_b] = bounded_cells(&c.rhs);
            vec![num(c.t), lhs, lhs_b, rhs, rhs_b, c.count_primal.to_string(), num(c.count_dual.estimate)]
        })
        .collect();
    Ok(Report::json(&checks, ok)?
        .with_table(vec!["t", "lhs", "lhs_bound", "rhs", "rhs_bound", "count_primal", "count_dual"], rows)
        .prefer_csv())
}

fn mellin_verify(f: TestFn, s: &[f64], tol: f64) -> CliResult<Report> {
    let eff = match f {
        TestFn::Gs => EffectivityFn::Gs,
        TestFn::Symexp => EffectivityFn::general(TestFunction::symmetric_exp())?,
        TestFn::Delta => EffectivityFn::general(delta_test_function(find_x0(1e-10)?.value))?,
    };
    let rows = verify_mellin_identity(&eff, s, tol)?;
    let ok = rows.iter().all(|r| r.passed);
    let table = rows
        .iter()
        .map(|r| {
            vec![
                num(r.s),
                num(r.mellin.value),
                num(r.mellin.error),
                num(r.divisor_route.value),
                num(r.divisor_route.error),
                num(r.difference),
                r.passed.to_string(),
            ]
        })
        .collect();
    Ok(Report::json(&json!({ "function": eff.test_function().name, "sup": eff.sup(), "tol": tol, "rows": rows }), ok)?
        .with_table(vec!["s", "mellin", "mellin_bound", "divisor_route", "divisor_route_bound", "difference", "passed"], table))
}

fn parse_pairs(arg: &str, n: usize) -> CliResult<Vec<(usize, usize)>> {
    if arg.trim() == "all" {
        return Ok((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect());
    }
    arg.split(',')
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| CliError::Usage(format!("bad pair {p:?}; expected i:j")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i < n)
                    .ok_or_else(|| CliError::Usage(format!("pair index {x:?} out of range 0..{n}")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn genus(forms: &[GramMatrix], pairs: &str) -> CliResult<Report> {
    let pairs = parse_pairs(pairs, forms.len())?;
    let mut out = Vec::new();
    let mut rows = Vec::new();
    for (i, j) in pairs {
        let v = same_genus_partial(&forms[i], &forms[j])?;
        rows.push(vec![i.to_string(), j.to_string(), v.to_string()]);
        out.push(json!({ "i": i, "j": j, "result": v }));
    }
    Ok(Report::json(&out, true)?.with_table(vec!["i", "j", "verdict"], rows))
}

fn selftest() -> CliResult<Report> {
    let reports = acceptance::run_all();
    let ok = reports.iter().all(|r| r.passed);
    let mut text: String = reports.iter().map(|r| format!("{r}\n")).collect();
    let passed = reports.iter().filter(|r| r.passed).count();
    text.push_str(&format!("{passed}/{} criteria passed\n", reports.len()));
    // timings are left out of the structured output so it stays reproducible
    let js: Vec<_> = reports
        .iter()
        .map(|r| json!({ "id": r.id, "name": r.name, "value": r.value, "bound": r.bound, "passed": r.passed, "detail": r.detail }))
        .collect();
    let rows = reports
        .iter()
        .map(|r| vec![r.id.to_string(), r.name.to_string(), num(r.value), num(r.bound), r.passed.to_string()])
        .collect();
    Ok(Report::json(&js, ok)?.with_table(vec!["id", "name", "value", "bound", "passed"], rows).with_text(text))
}
