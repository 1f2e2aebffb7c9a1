//! Subcommand implementations.

use std::str::FromStr;

use maclab::channels::ChannelSpec;
use maclab::checks::{run_all, CheckConfig};
use maclab::feedback::{simulate, FeedbackConfig};
use maclab::optimize::{
    trace_boundary_detailed, verify_example1, CostMode, RegionKind, SearchConfig,
};
use maclab::regions::{
    closed_form_binary, closed_form_gaussian_both_state, closed_form_gaussian_feedback,
    closed_form_gaussian_snf, direction_grid, envelope_build, envelope_includes, RatePolytope,
    RegionEnvelope,
};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output::{boundary_rows, bounds_rows, g12, Emitter};
use crate::spec_file::load_channel;
use crate::{
    CheckArgs, Example1Args, FeedbackArgs, Fig2Args, Fig4Args, RegionArgs,
};

const INCLUSION_TOL: f64 = 1e-9;

fn require_directions(directions: usize) -> Result<()> {
    if directions < 3 {
        return Err(CliError::Input(format!(
            "--directions must be >= 3, got {directions}"
        )));
    }
    Ok(())
}

fn single_envelope(p: &RatePolytope) -> Result<RegionEnvelope> {
    envelope_build(std::slice::from_ref(p), p.costs()).map_err(CliError::from)
}

pub fn cmd_region(args: &RegionArgs) -> Result<()> {
    let ch: ChannelSpec = load_channel(&args.spec)?;
    let kind = RegionKind::from_str(&args.kind).map_err(CliError::Input)?;
    let cfg = SearchConfig {
        aux_cards: args.aux_card.clone(),
        restarts: args.restarts,
        max_sweeps: args.max_sweeps,
        seed: args.seed,
        directions: args.directions,
        cost_mode: if args.strict_cost {
            CostMode::Strict
        } else {
            CostMode::Closure
        },
        trace: args.trace,
        ..SearchConfig::default()
    };
    let trace = trace_boundary_detailed(&ch, kind, &cfg)?;

    let manifest = RunManifest::new("region")
        .seed(args.seed)
        .config("kind", kind.as_str())
        .config("directions", args.directions as u64)
        .config("restarts", args.restarts as u64)
        .config("max_sweeps", args.max_sweeps as u64)
        .config(
            "aux_cards",
            serde_json::to_value(&args.aux_card).expect("serializable"),
        )
        .config("strict_cost", args.strict_cost)
        .input_file(&args.spec)?;
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;

    let mut bound_lines = Vec::new();
    for (idx, opt) in trace.optima.iter().enumerate() {
        for mask in 1..(1usize << ch.users()) {
            bound_lines.push(format!("{idx},{mask},{}", g12(opt.polytope.bound(mask))));
        }
    }
    emitter.table(
        "bounds.csv",
        "direction_index,subset_mask,bound_bits",
        &bound_lines,
    )?;

    if ch.users() == 2 {
        let rows = boundary_rows(kind.as_str(), &trace.envelope, args.directions);
        emitter.table("boundary.csv", "region,angle_deg,r1,r2", &rows)?;
    } else {
        let dirs = direction_grid(ch.users(), args.directions);
        let rows: Vec<String> = dirs
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let ws = w.iter().map(|&v| g12(v)).collect::<Vec<_>>().join(",");
                format!("{i},{ws},{}", g12(trace.envelope.support(w)))
            })
            .collect();
        let wcols = (1..=ch.users())
            .map(|k| format!("w_{k}"))
            .collect::<Vec<_>>()
            .join(",");
        emitter.table(
            "directions.csv",
            &format!("direction_index,{wcols},support_bits"),
            &rows,
        )?;
    }

    if args.trace {
        let mut rows = Vec::new();
        for (idx, opt) in trace.optima.iter().enumerate() {
            for t in &opt.trace {
                rows.push(format!(
                    "{idx},{},{},{}",
                    t.restart,
                    t.sweep,
                    g12(t.objective)
                ));
            }
        }
        emitter.table("trace.csv", "direction_index,restart,sweep,objective", &rows)?;
    }

    let equal = vec![1.0; ch.users()];
    println!(
        "region kind={} users={} directions={} sum-rate support={}",
        kind.as_str(),
        ch.users(),
        args.directions,
        g12(trace.envelope.support(&equal))
    );
    emitter.finish()
}

pub fn cmd_fig2(args: &Fig2Args) -> Result<()> {
    require_directions(args.directions)?;
    let (p1, p2, ps) = (1.0 / 3.0, 1.0 / 3.0, 0.25);
    let with_state = closed_form_binary(p1, p2, ps, true)?;
    let no_state = closed_form_binary(p1, p2, ps, false)?;

    let manifest = RunManifest::new("fig2")
        .config("p1", p1)
        .config("p2", p2)
        .config("ps", ps)
        .config("directions", args.directions as u64);
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;

    let mut corners = Vec::new();
    for (label, poly) in [("with_state", &with_state), ("no_state", &no_state)] {
        corners.push(format!("{label},r1_max,{}", g12(poly.bound(0b01))));
        corners.push(format!("{label},r2_max,{}", g12(poly.bound(0b10))));
        corners.push(format!("{label},sum_max,{}", g12(poly.bound(0b11))));
    }
    emitter.table("fig2_corners.csv", "region,quantity,value_bits", &corners)?;

    let mut bounds = bounds_rows("with_state", &with_state);
    bounds.extend(bounds_rows("no_state", &no_state));
    emitter.table("fig2_bounds.csv", "region,subset_mask,bound_bits", &bounds)?;

    let with_env = single_envelope(&with_state)?;
    let no_env = single_envelope(&no_state)?;
    let mut boundary = boundary_rows("with_state", &with_env, args.directions);
    boundary.extend(boundary_rows("no_state", &no_env, args.directions));
    emitter.table("fig2_boundary.csv", "region,angle_deg,r1,r2", &boundary)?;

    let report = envelope_includes(&no_env, &with_env, args.directions, INCLUSION_TOL)?;
    let strict = direction_grid(2, args.directions)
        .iter()
        .any(|w| with_env.support(w) > no_env.support(w) + 1e-9);
    println!(
        "inclusion no_state within with_state: {} (min margin {})",
        if report.certified {
            "certified"
        } else {
            "VIOLATED"
        },
        g12(report.min_margin)
    );
    println!("strict containment in some direction: {strict}");
    for line in &corners {
        println!("corner {line}");
    }
    emitter.finish()?;
    if !report.certified || !strict {
        return Err(CliError::Failure(
            "no-state region is not strictly contained in the with-state region".into(),
        ));
    }
    Ok(())
}

pub fn cmd_fig4(args: &Fig4Args) -> Result<()> {
    require_directions(args.directions)?;
    let (p1, p2, s2) = (2.0, 2.0, 1.0);
    let snf = closed_form_gaussian_snf(p1, p2, s2)?;
    let ss = closed_form_gaussian_both_state(p1, p2, s2)?;
    let rho_count = args.rho_grid.max(2);
    let feedback_family: Vec<RatePolytope> = (0..rho_count)
        .map(|i| {
            let rho = i as f64 / (rho_count - 1) as f64;
            closed_form_gaussian_feedback(p1, p2, s2, rho)
        })
        .collect::<std::result::Result<_, _>>()?;

    let manifest = RunManifest::new("fig4")
        .config("p1", p1)
        .config("p2", p2)
        .config("sigma_s2", s2)
        .config("rho_grid", rho_count as u64)
        .config("directions", args.directions as u64);
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;

    let mut bounds = bounds_rows("snf", &snf);
    bounds.extend(bounds_rows("ss", &ss));
    emitter.table("fig4_bounds.csv", "region,subset_mask,bound_bits", &bounds)?;

    let mut family_rows = Vec::new();
    for (i, poly) in feedback_family.iter().enumerate() {
        let rho = i as f64 / (rho_count - 1) as f64;
        for mask in 1..4usize {
            family_rows.push(format!("{},{mask},{}", g12(rho), g12(poly.bound(mask))));
        }
    }
    emitter.table(
        "fig4_feedback_polytopes.csv",
        "rho,subset_mask,bound_bits",
        &family_rows,
    )?;

    let budgets = [p1, p2];
    let snf_env = envelope_build(std::slice::from_ref(&snf), &budgets)?;
    let sf_env = envelope_build(&feedback_family, &budgets)?;
    let ss_env = envelope_build(std::slice::from_ref(&ss), &budgets)?;
    let mut boundary = boundary_rows("snf", &snf_env, args.directions);
    boundary.extend(boundary_rows("sf", &sf_env, args.directions));
    boundary.extend(boundary_rows("ss", &ss_env, args.directions));
    emitter.table("fig4_boundary.csv", "region,angle_deg,r1,r2", &boundary)?;

    println!(
        "snf: r1 bound {} sum bound {}",
        g12(snf.bound(0b01)),
        g12(snf.bound(0b11))
    );
    println!("ss: sum bound {}", g12(ss.bound(0b11)));

    let mut ok = true;
    for (inner_name, outer_name, inner, outer) in [
        ("snf", "sf", &snf_env, &sf_env),
        ("sf", "ss", &sf_env, &ss_env),
    ] {
        let report = envelope_includes(inner, outer, args.directions, INCLUSION_TOL)?;
        let strict_margin = direction_grid(2, args.directions)
            .iter()
            .map(|w| outer.support(w) - inner.support(w))
            .fold(f64::NEG_INFINITY, f64::max);
        println!(
            "nesting {inner_name} within {outer_name}: {} (min margin {}, max margin {})",
            if report.certified {
                "certified"
            } else {
                "VIOLATED"
            },
            g12(report.min_margin),
            g12(strict_margin)
        );
        ok &= report.certified && strict_margin > 1e-9;
    }
    emitter.finish()?;
    if !ok {
        return Err(CliError::Failure(
            "capacity-region nesting snf within sf within ss failed".into(),
        ));
    }
    Ok(())
}

pub fn cmd_example1(args: &Example1Args) -> Result<()> {
    let cfg = SearchConfig {
        seed: args.seed,
        restarts: args.restarts,
        ..SearchConfig::default()
    };
    let rep = verify_example1(&cfg).map_err(CliError::from)?;

    let manifest = RunManifest::new("example1")
        .seed(args.seed)
        .config("restarts", args.restarts as u64);
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;
    let rows = vec![
        format!("membership_1_half,{}", u8::from(rep.contains)),
        format!("message_term_bits,{}", g12(rep.message_term)),
        format!("compression_term_bits,{}", g12(rep.compression_term)),
        format!("sum_bound_bits,{}", g12(rep.sum_bound)),
        format!("b1_bits,{}", g12(rep.bounds[0])),
        format!("b2_bits,{}", g12(rep.bounds[1])),
        format!("b12_bits,{}", g12(rep.bounds[2])),
        format!(
            "state_only_r2_at_r1_one,{}",
            g12(rep.state_only_r2_at_r1_one)
        ),
        format!(
            "state_only_reached_r1_one,{}",
            u8::from(rep.state_only_reached_r1_one)
        ),
    ];
    emitter.table("example1.csv", "quantity,value", &rows)?;

    println!(
        "rate pair (1, 1/2) in the joint-compression region: {}",
        if rep.contains { "CERTIFIED" } else { "FAILED" }
    );
    println!("  I(X1,V1;Y|X2,V2) = {}", g12(rep.message_term));
    println!("  I(V2;S2|X2)      = {}", g12(rep.compression_term));
    println!("  sum bound        = {}", g12(rep.sum_bound));
    println!(
        "state-only region at R1 = 1: best R2 found by search = {} (face reached: {})",
        g12(rep.state_only_r2_at_r1_one),
        rep.state_only_reached_r1_one
    );
    emitter.finish()?;
    if !rep.contains {
        return Err(CliError::Failure(
            "rate pair (1, 1/2) not certified in the joint-compression region".into(),
        ));
    }
    Ok(())
}

pub fn cmd_feedback(args: &FeedbackArgs) -> Result<()> {
    let cfg = FeedbackConfig {
        p1: args.p1,
        p2: args.p2,
        sigma_s2: args.sigma2,
        alpha: args.alpha,
        n: args.uses,
        rate2: args.rate2,
        trials: args.trials,
        seed: args.seed,
    };
    let sim = simulate(&cfg)?;

    let manifest = RunManifest::new("feedback")
        .seed(args.seed)
        .config("p1", args.p1)
        .config("p2", args.p2)
        .config("sigma2", args.sigma2)
        .config("alpha", args.alpha)
        .config("uses", args.uses as u64)
        .config("rate2", args.rate2)
        .config("trials", args.trials as u64);
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;

    let mse_rows: Vec<String> = (0..sim.predicted_mse.len())
        .map(|i| {
            format!(
                "{i},{},{},{}",
                g12(sim.predicted_mse[i]),
                g12(sim.empirical_mse[i]),
                g12(sim.mse_stderr[i])
            )
        })
        .collect();
    emitter.table(
        "feedback_mse.csv",
        "use_index,predicted_mse,empirical_mse,stderr",
        &mse_rows,
    )?;

    let gain_rows: Vec<String> = sim
        .gains
        .iter()
        .enumerate()
        .map(|(i, (g1, g2))| format!("{},{},{}", i + 1, g12(*g1), g12(*g2)))
        .collect();
    emitter.table("feedback_gains.csv", "use_index,gamma1,gamma2", &gain_rows)?;

    let power_rows: Vec<String> = (0..sim.power1.len())
        .map(|i| format!("{},{},{}", i + 1, g12(sim.power1[i]), g12(sim.power2[i])))
        .collect();
    emitter.table(
        "feedback_power.csv",
        "use_index,mean_power1,mean_power2",
        &power_rows,
    )?;

    let summary = vec![format!(
        "{},{},{},{}",
        g12(sim.error_rate),
        g12(sim.rate_pair.0),
        g12(sim.rate_pair.1),
        g12(args.alpha)
    )];
    emitter.table("feedback_summary.csv", "p_e2,r1_max,r2_max,alpha", &summary)?;

    println!(
        "feedback sim: P(E2) = {} over {} trials (n = {}, rate2 = {}, feasible = {})",
        g12(sim.error_rate),
        args.trials,
        args.uses,
        g12(args.rate2),
        sim.rate_feasible
    );
    println!(
        "closed-form pair at alpha = {}: R1 <= {}, R2 <= {}",
        g12(args.alpha),
        g12(sim.rate_pair.0),
        g12(sim.rate_pair.1)
    );
    emitter.finish()
}

pub fn cmd_check(args: &CheckArgs) -> Result<()> {
    let cfg = CheckConfig {
        instances: args.instances,
        seed: args.seed,
        sum_tol: args.sum_tol,
        ..CheckConfig::default()
    };
    let reports = run_all(&cfg).map_err(CliError::from)?;

    let manifest = RunManifest::new("check")
        .seed(args.seed)
        .config("instances", args.instances as u64)
        .config("sum_tol", args.sum_tol);
    let mut emitter = Emitter::new(args.out.clone(), manifest)?;
    let rows: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.name.replace(',', ";"),
                r.cases,
                r.failures,
                g12(r.worst),
                if r.passed() { "pass" } else { "fail" }
            )
        })
        .collect();
    emitter.table(
        "check_report.csv",
        "suite,cases,failures,worst,verdict",
        &rows,
    )?;

    println!("{:<55} {:>6} {:>9} {:>14} verdict", "suite", "cases", "failures", "worst");
    for r in &reports {
        println!(
            "{:<55} {:>6} {:>9} {:>14} {}",
            r.name,
            r.cases,
            r.failures,
            g12(r.worst),
            if r.passed() { "PASS" } else { "FAIL" }
        );
    }
    println!("suites run: {}", reports.len());
    emitter.finish()?;

    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.name)
        .collect();
    if !failing.is_empty() {
        return Err(CliError::Failure(format!(
            "suites failed: {}",
            failing.join(", ")
        )));
    }
    Ok(())
}
