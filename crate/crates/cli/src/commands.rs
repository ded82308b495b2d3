use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use extremal_core::analysis::{boundary_exponent, hopf_constant};
use extremal_core::eigen::{eigen_bounds, estimate_mu, principal_eigenfunction};
use extremal_core::field::FnField;
use extremal_core::operators::eval_field;
use extremal_core::oracles::{
    barrier_constant, make_barrier, make_counterexample, make_entire_eigenfunction, verify_suite,
    Counterexample, VerifyOptions,
};
use extremal_core::solver::{comparison_probe, outer_zero_order, solve_dirichlet, DirectionSet};
use extremal_core::{DomainSpec, FractionalOrder, GridField, ScalarField, Sign, SolverConfig};

use crate::config::{Config, DataSection, EvalSection, SolveSection};
use crate::output::{fmt_point, RunDir, Stamp};
use crate::CliError;

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::Config(format!("config has no [{name}] section")))
}

fn eval_target(cfg: &Config, e: &EvalSection) -> Result<(ScalarField<f64>, String), CliError> {
    let n = cfg.dim;
    if e.field == "grid" {
        let path = e
            .grid_file
            .as_ref()
            .ok_or_else(|| CliError::Config("eval.field = \"grid\" needs eval.grid_file".into()))?;
        let file = std::fs::File::open(path)
            .map_err(|err| CliError::Config(format!("{}: {err}", path.display())))?;
        let g = GridField::read_from(std::io::BufReader::new(file))?;
        if g.dim() != n {
            return Err(CliError::Config(format!("grid file has dim {}, config dim {n}", g.dim())));
        }
        return Ok((g.to_field(), g.domain().hash()));
    }
    let field = match e.field.as_str() {
        "barrier" => make_barrier(e.radius, vec![0.0; n], 1.0, cfg.s),
        "constant" => ScalarField::constant(e.value),
        "entire_gaussian" => make_entire_eigenfunction(e.mu, e.k, n, cfg.s)?.0,
        name => match Counterexample::parse(name) {
            Some(c) => make_counterexample(c, n)?,
            None => return Err(CliError::Config(format!("eval.field: unknown field {name:?}"))),
        },
    };
    Ok((field, "none".into()))
}

pub fn eval(cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    let e = section(&cfg.eval, "eval")?;
    let (field, domain_hash) = eval_target(cfg, e)?;
    let mut points = e.points.clone();
    if let Some(p) = &e.path {
        for m in &p.n {
            let mut x = vec![0.0; cfg.dim];
            x[p.axis] = 1.0 / m;
            points.push(x);
        }
    }
    if let Some(r) = &e.random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.expect("validated"));
        while points.len() < e.points.len() + e.path.as_ref().map_or(0, |p| p.n.len()) + r.count {
            let x: Vec<f64> = (0..cfg.dim).map(|_| rng.gen_range(-r.radius..r.radius)).collect();
            if x.iter().map(|v| v * v).sum::<f64>() < r.radius * r.radius {
                points.push(x);
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::Config("eval: no points".into()));
    }
    let order = FractionalOrder::new(cfg.s)?;
    let q = e.quadrature.spec()?;
    let opts = e.extremize.options(cfg.seed.unwrap_or(0));
    let sign: Sign = e.sign.into();
    let stamp = Stamp {
        s: cfg.s,
        k: e.k,
        sign: sign.as_str().into(),
        domain_hash,
    };
    let results = eval_field(&field, &points, e.k, sign, &order, &q, &opts);
    let mut rows = Vec::new();
    let mut failed = 0;
    for (x, r) in points.iter().zip(&results) {
        let (v, err, status) = match r {
            Ok(est) => (est.value.to_string(), est.error.to_string(), "ok".to_string()),
            Err(er) => {
                failed += 1;
                (String::new(), String::new(), format!("\"{er}\""))
            }
        };
        rows.push(format!("{},{},{},{},{}", stamp.cells(), fmt_point(x), v, err, status));
    }
    out.write_csv(
        "values.csv",
        &format!("{},point,value,error,status", Stamp::columns()),
        &rows,
    )?;
    let summary = json!({ "field": e.field, "points": points.len(), "failed": failed, "stamp": stamp });
    if failed > 0 {
        return Err(CliError::Partial(summary, format!("{failed} of {} points failed", points.len())));
    }
    Ok(summary)
}

fn data_field(d: &DataSection, k: usize, s: f64) -> Result<ScalarField<f64>, CliError> {
    Ok(match d {
        DataSection::Constant { value } => ScalarField::constant(*value),
        DataSection::Barrier => ScalarField::constant(-(k as f64) * barrier_constant(s)?),
        DataSection::Cosine {
            value,
            amplitude,
            frequency,
        } => {
            let (v, a, w) = (*value, *amplitude, frequency.clone());
            FnField::new("cosine", v.abs() + a.abs(), move |x: &[f64]| {
                v + a * x.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>().cos()
            })
            .build()
        }
    })
}

fn solver_config(sc: &SolverConfig, seed: Option<u64>) -> SolverConfig {
    let mut c = sc.clone();
    if c.direction_set == DirectionSet::Uniform && c.rotation_seed.is_none() {
        c.rotation_seed = seed;
    }
    c
}

/// Values along the ray from the anchor in direction `e_1`.
type Reference<'a> = Option<&'a dyn Fn(&[f64]) -> f64>;

fn radial_profile(u: &GridField, points: usize, reference: Reference<'_>) -> Vec<String> {
    let dom = u.domain();
    let a = dom.anchor().to_vec();
    let mut e1 = vec![0.0; a.len()];
    e1[0] = 1.0;
    let (_, t_plus) = dom.exit_times(&a, &e1);
    (0..points)
        .map(|i| {
            let t = t_plus * i as f64 / (points.max(2) - 1) as f64;
            let x: Vec<f64> = a.iter().zip(&e1).map(|(p, q)| p + t * q).collect();
            let v = u.value_at(&x);
            match reference {
                Some(r) => {
                    let rv = r(&x);
                    format!("{t},{},{v},{rv},{}", fmt_point(&x), v - rv)
                }
                None => format!("{t},{},{v},,", fmt_point(&x)),
            }
        })
        .collect()
}

pub fn solve(cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    let sv: &SolveSection = section(&cfg.solve, "solve")?;
    let dom = sv.domain.build()?;
    if dom.dim() != cfg.dim {
        return Err(CliError::Config(format!("domain has dim {}, config dim {}", dom.dim(), cfg.dim)));
    }
    let sign: Sign = sv.sign.into();
    let f = data_field(&sv.f, sv.k, cfg.s)?;
    let c = ScalarField::constant(sv.c);
    let solver = solver_config(&sv.solver, cfg.seed);
    let stamp = Stamp {
        s: cfg.s,
        k: sv.k,
        sign: sign.as_str().into(),
        domain_hash: dom.hash(),
    };
    let mut summary = json!({ "stamp": stamp, "nodes_h": solver.h });

    let u = if let Some(mu) = sv.mu {
        let (u, steps) = outer_zero_order(&f, mu, &dom, sv.k, sign, cfg.s, &solver)?;
        let rows: Vec<String> = steps
            .iter()
            .map(|st| format!("{},{},{},{},{}", stamp.cells(), st.iteration, st.sup_norm, st.increment, st.residual))
            .collect();
        out.write_csv(
            "outer.csv",
            &format!("{},iteration,sup_norm,increment,residual", Stamp::columns()),
            &rows,
        )?;
        summary["outer_steps"] = json!(steps.len());
        u
    } else {
        let (u, report) = solve_dirichlet(&f, &c, &dom, sv.k, sign, cfg.s, &solver)?;
        out.write_json("report.json", &json!({ "stamp": stamp, "report": report }))?;
        summary["residual"] = json!(report.residual);
        summary["iterations"] = json!(report.iterations);
        u
    };
    out.write_grid("solution.grid", &u)?;
    summary["sup_norm"] = json!(u.sup_norm());

    let barrier = if sv.barrier_reference {
        let r = dom.outer_radius();
        let a = dom.anchor().to_vec();
        let s = cfg.s;
        Some(move |x: &[f64]| {
            let d2: f64 = x.iter().zip(&a).map(|(p, q)| (p - q) * (p - q)).sum();
            (r * r - d2).max(0.0).powf(s)
        })
    } else {
        None
    };
    if let Some(b) = &barrier {
        let err = u
            .interior()
            .iter()
            .map(|&i| (u.values()[i] - b(&u.node_coords(i))).abs())
            .fold(0.0, f64::max);
        summary["sup_error"] = json!(err);
    }
    let reference = barrier.as_ref().map(|b| b as &dyn Fn(&[f64]) -> f64);
    let rows: Vec<String> = radial_profile(&u, sv.profile_points, reference)
        .into_iter()
        .map(|r| format!("{},{r}", stamp.cells()))
        .collect();
    out.write_csv(
        "profile.csv",
        &format!("{},r,point,u,reference,error", Stamp::columns()),
        &rows,
    )?;

    if let Some(eps) = sv.comparison_eps {
        let shifted = |delta: f64| {
            let f = f.clone();
            FnField::new("shifted", f.bound() + delta.abs(), move |x: &[f64]| f.eval(x) + delta).build()
        };
        let (sub, _) = solve_dirichlet(&shifted(eps), &c, &dom, sv.k, sign, cfg.s, &solver)?;
        let (sup, _) = solve_dirichlet(&shifted(-eps), &c, &dom, sv.k, sign, cfg.s, &solver)?;
        let rep = comparison_probe(&sub, &sup, &f, &c, &dom, sv.k, sign, cfg.s, &solver, 2.0 * solver.tol_residual)?;
        out.write_json("comparison.json", &json!({ "stamp": stamp, "eps": eps, "report": rep }))?;
        summary["ordered"] = json!(rep.ordered);
        if !rep.ordered {
            return Err(CliError::Partial(summary, "comparison pair is not ordered".into()));
        }
    }
    Ok(summary)
}

pub fn eigen(cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    let es = section(&cfg.eigen, "eigen")?;
    let dom = es.domain.build()?;
    if dom.dim() != cfg.dim {
        return Err(CliError::Config(format!("domain has dim {}, config dim {}", dom.dim(), cfg.dim)));
    }
    let sign: Sign = es.sign.into();
    let mut ec = es.settings.config();
    ec.solver = solver_config(&ec.solver, cfg.seed);
    let stamp = Stamp {
        s: cfg.s,
        k: es.k,
        sign: sign.as_str().into(),
        domain_hash: dom.hash(),
    };
    let bounds = eigen_bounds(&dom, cfg.s)?;
    let est = estimate_mu(&dom, es.k, sign, cfg.s, &ec)?;
    let rows: Vec<String> = est
        .trace
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let outcome = serde_json::to_value(st.outcome).expect("serializable");
            format!(
                "{},{i},{},{},{},{}",
                stamp.cells(),
                st.mu,
                outcome.as_str().unwrap_or_default(),
                st.outer_steps,
                st.ratio
            )
        })
        .collect();
    out.write_csv(
        "bracket.csv",
        &format!("{},step,mu,outcome,outer_steps,ratio", Stamp::columns()),
        &rows,
    )?;
    let mut summary = json!({
        "stamp": stamp,
        "mu_lo": est.mu_lo,
        "mu_hi": est.mu_hi,
        "infinite": est.infinite,
        "lower_bound": bounds.lower,
    });
    let mut record = json!({ "stamp": stamp, "bounds": bounds, "estimate": est });
    if es.eigenfunction && !est.infinite {
        if es.k == 1 && sign == Sign::Sup {
            let psi = principal_eigenfunction(&dom, cfg.s, est.midpoint(), &ec)?;
            out.write_grid("eigenfunction.grid", &psi.field)?;
            let fit = boundary_exponent(&psi.field).ok();
            let hopf = hopf_constant(&psi.field, cfg.s).ok();
            record["eigenfunction"] = json!({
                "mu": psi.mu,
                "residual": psi.residual,
                "iterations": psi.iterations,
                "min_interior": psi.min_interior,
                "exponent": fit,
                "hopf": hopf,
            });
            summary["eigenfunction_mu"] = json!(psi.mu);
        } else {
            record["eigenfunction"] = json!("only computed for k = 1, sign = sup");
        }
    }
    out.write_json("eigen.json", &record)?;
    Ok(summary)
}

pub fn verify(cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    let vs = cfg.verify.clone().unwrap_or_default();
    let mut rows = Vec::new();
    let mut failed = 0;
    let mut total = 0;
    println!("{:<4} {:<18} {:<4} {:<4} {:>14} {:>14}  result", "dim", "check", "k", "sign", "target", "computed");
    for &dim in &vs.dims {
        let recs = verify_suite(&VerifyOptions {
            s: cfg.s,
            dim,
            cs_override: vs.cs_override,
            tol_scale: vs.tol_scale,
            ..VerifyOptions::default()
        })?;
        for r in recs {
            total += 1;
            if !r.pass {
                failed += 1;
            }
            let computed = r.computed.map(|v| v.to_string()).unwrap_or_default();
            println!(
                "{dim:<4} {:<18} {:<4} {:<4} {:>14.8} {:>14}  {}",
                r.check,
                r.k,
                r.sign,
                r.target,
                r.computed.map(|v| format!("{v:.8}")).unwrap_or_else(|| "-".into()),
                if r.pass { "pass" } else { "FAIL" }
            );
            let stamp = Stamp {
                s: cfg.s,
                k: r.k,
                sign: r.sign.clone(),
                domain_hash: "none".into(),
            };
            rows.push(format!(
                "{},{dim},{},{},{},{},{},{},\"{}\",\"{}\"",
                stamp.cells(),
                r.check,
                fmt_point(&r.point),
                r.relation,
                r.target,
                computed,
                r.pass,
                r.error.unwrap_or_default(),
                r.rule
            ));
        }
    }
    out.write_csv(
        "verify.csv",
        &format!("{},dim,check,point,relation,target,computed,pass,error,rule", Stamp::columns()),
        &rows,
    )?;
    let summary = json!({ "checks": total, "failed": failed });
    println!("{} of {total} checks passed", total - failed);
    if failed > 0 {
        return Err(CliError::Partial(summary, format!("{failed} of {total} checks failed")));
    }
    Ok(summary)
}

/// Wall-clock timings; the only output that is not reproducible.
pub fn profile(cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    let ps = cfg.profile.clone().unwrap_or_default();
    let s = cfg.s;
    let n = cfg.dim;
    let mut rows = Vec::new();
    let stamp = |k: usize, hash: String| Stamp {
        s,
        k,
        sign: "sup".into(),
        domain_hash: hash,
    };

    let order = FractionalOrder::new(s)?;
    let u = make_barrier(1.0, vec![0.0; n], 1.0, s);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
    let points: Vec<Vec<f64>> = (0..ps.points)
        .map(|_| (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    for k in 1..=n {
        let t = Instant::now();
        let r = eval_field(
            &u,
            &points,
            k,
            Sign::Sup,
            &order,
            &Default::default(),
            &extremal_core::ExtremizeOptions::default(),
        );
        let secs = t.elapsed().as_secs_f64();
        let bad = r.iter().filter(|x| x.is_err()).count();
        rows.push(format!("{},pointwise,{},{},{secs},{bad}", stamp(k, "none".into()).cells(), points.len(), 0.0));
    }

    let dom = DomainSpec::ball(vec![0.0; n], 1.0)?;
    let f = ScalarField::constant(-barrier_constant(s)?);
    let c = ScalarField::constant(0.0);
    for &h in &ps.grid_steps {
        let sc = SolverConfig {
            h,
            ..SolverConfig::default()
        };
        let t = Instant::now();
        let (g, _) = solve_dirichlet(&f, &c, &dom, 1, Sign::Sup, s, &sc)?;
        let secs = t.elapsed().as_secs_f64();
        rows.push(format!("{},solve,{},{h},{secs},0", stamp(1, dom.hash()).cells(), g.interior().len()));
    }
    out.write_csv(
        "profile.csv",
        &format!("{},stage,size,h,seconds,failures", Stamp::columns()),
        &rows,
    )?;
    Ok(json!({ "stages": rows.len(), "workers": rayon::current_num_threads() }))
}

pub fn run(command: &str, cfg: &Config, out: &mut RunDir) -> Result<Value, CliError> {
    match command {
        "eval" => eval(cfg, out),
        "solve" => solve(cfg, out),
        "eigen" => eigen(cfg, out),
        "verify" => verify(cfg, out),
        "profile" => profile(cfg, out),
        _ => unreachable!("clap restricts the command"),
    }
}
