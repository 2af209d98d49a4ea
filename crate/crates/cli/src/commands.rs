//! Subcommand dispatch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use kepler_billiards::birkhoff::{default_seeds, iterate_portrait};
use kepler_billiards::export::{birkhoff_svg, birkhoff_csv, kepler_csv, kepler_svg, orbit_csv, svg_scatter, table_csv, SvgStyle};
use kepler_billiards::focal::{classify_kind, critical_points_psi, is_focal_with, FocalVerdict};
use kepler_billiards::kepler_arc::{solve_arc, ArcDomain};
use kepler_billiards::kepler_billiard::{portrait, well_defined_check};
use kepler_billiards::shadowing::{select_intervals, solve_word, verify_orbit, SolveOptions, SymbolWord, WordDomain};
use kepler_billiards::{BoundaryTable, KbResult, Scene};

use crate::config::{CliError, CliResult, Command, RunConfig};

fn create(key: &str, path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e} (key: {key})", path.display())))
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Numerical(format!("output failed: {e}"))
}

fn write_svg(path: &Path, svg: &str) -> CliResult<()> {
    let mut f = create("svg", path)?;
    f.write_all(svg.as_bytes()).and_then(|_| f.flush()).map_err(io_err)
}

fn table(cfg: &RunConfig) -> CliResult<BoundaryTable> {
    cfg.table.build().map_err(|e| CliError::keyed("table", e))
}

fn table_around_center(cfg: &RunConfig) -> CliResult<BoundaryTable> {
    let t = table(cfg)?;
    if !t.contains(cfg.center) {
        return Err(CliError::Usage(format!(
            "center ({}, {}) is not strictly inside the table (key: center)",
            cfg.center.re, cfg.center.im
        )));
    }
    Ok(t)
}

fn scene(cfg: &RunConfig) -> CliResult<Scene> {
    let t = table(cfg)?;
    Scene::new(t, cfg.center, cfg.mu, cfg.h).map_err(|e| CliError::keyed("center", e))
}

/// Runs the configured command, writing the report to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    match cfg.command {
        Command::Table => cmd_table(cfg, out),
        Command::Arc => cmd_arc(cfg, out),
        Command::Portrait => cmd_portrait(cfg, out),
        Command::Focal => cmd_focal(cfg, out),
        Command::Psi => cmd_psi(cfg, out),
        Command::Shadow => cmd_shadow(cfg, out),
    }
}

fn cmd_table(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let t = table(cfg)?;
    match &cfg.csv {
        Some(p) => table_csv(&t, cfg.samples, create("csv", p)?).map_err(|e| CliError::keyed("csv", e))?,
        None => table_csv(&t, cfg.samples, &mut *out).map_err(|e| CliError::keyed("csv", e))?,
    }
    if let Some(p) = &cfg.svg {
        let pts: Vec<_> = t.samples(cfg.samples).into_iter().map(|(_, q, _)| (0, q.re, q.im)).collect();
        let style = SvgStyle { title: t.describe(), ..SvgStyle::default() };
        write_svg(p, &svg_scatter(&pts, &style))?;
    }
    if cfg.csv.is_some() {
        writeln!(
            out,
            "{}: {} samples, perimeter {:.12}, curvature in [{:.6}, {:.6}]",
            t.describe(),
            cfg.samples,
            t.perimeter(),
            t.min_curvature(),
            t.max_curvature()
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn cmd_arc(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let (p0, p1) = (cfg.p0.expect("checked in parse"), cfg.p1.expect("checked in parse"));
    let a = solve_arc(p0, p1, cfg.class, cfg.h, cfg.mu).map_err(|e| CliError::keyed("p0", e))?;
    let fields = [
        ("class", a.class.to_string()),
        ("h", a.h.to_string()),
        ("mu", a.mu.to_string()),
        ("length", format!("{:.15}", a.length)),
        ("r_min", format!("{:.15}", a.r_min)),
        ("t_reg", format!("{:.15}", a.t_reg)),
        ("v0", format!("{:.15},{:.15}", a.v0.re, a.v0.im)),
        ("v1", format!("{:.15},{:.15}", a.v1.re, a.v1.im)),
        ("endpoint_residual", format!("{:.3e}", a.endpoint_residual())),
        ("energy_residual", format!("{:.3e}", a.energy_residual_regularized(256))),
        ("winding", format!("{:.15}", a.winding(512))),
        ("clamped", a.clamped.to_string()),
    ];
    for (k, v) in &fields {
        writeln!(out, "{k}: {v}").map_err(io_err)?;
    }
    if let Some(p) = &cfg.csv {
        let mut w = csv::Writer::from_writer(create("csv", p)?);
        let res = w
            .write_record(fields.iter().map(|f| f.0))
            .and_then(|_| w.write_record(fields.iter().map(|f| f.1.as_str())))
            .and_then(|_| w.flush().map_err(csv::Error::from));
        res.map_err(|e| CliError::Numerical(format!("output failed: {e} (key: csv)")))?;
    }
    Ok(())
}

fn cmd_portrait(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let seeds = default_seeds(cfg.seeds);
    let style = SvgStyle::default();
    if cfg.mu == 0.0 {
        let t = table(cfg)?;
        let p = iterate_portrait(&t, &seeds, cfg.bounces);
        if let Some(path) = &cfg.csv {
            birkhoff_csv(&p, create("csv", path)?).map_err(|e| CliError::keyed("csv", e))?;
        }
        if let Some(path) = &cfg.svg {
            write_svg(path, &birkhoff_svg(&p, &SvgStyle { title: t.describe(), ..style }))?;
        }
        writeln!(out, "classical portrait: {} rows, {} truncated orbits", p.rows.len(), p.failures.len()).map_err(io_err)?;
        return report_failures(&p.failures, out);
    }
    let sc = scene(cfg)?;
    let wd = well_defined_check(&sc);
    let p = portrait(&sc, &seeds, cfg.bounces);
    if let Some(path) = &cfg.csv {
        kepler_csv(&p, create("csv", path)?).map_err(|e| CliError::keyed("csv", e))?;
    }
    if let Some(path) = &cfg.svg {
        let title = format!("{} mu={} h={}", sc.table.describe(), sc.mu, sc.h);
        write_svg(path, &kepler_svg(&p, &SvgStyle { title, ..style }))?;
    }
    let energy = p.max_energy_residual();
    writeln!(out, "kepler portrait: {} rows, {} truncated orbits", p.rows.len(), p.failures.len()).map_err(io_err)?;
    writeln!(out, "max energy residual: {energy:.3e} (tolerance {:.1e})", cfg.tol.energy).map_err(io_err)?;
    writeln!(
        out,
        "well-definedness margin: {:.4} at guard radius {:.4} ({})",
        wd.margin,
        wd.guard_radius,
        if wd.ok { "sufficient condition holds" } else { "sufficient condition fails, orbits are checked individually" }
    )
    .map_err(io_err)?;
    report_failures(&p.failures, out)?;
    if !(energy < cfg.tol.energy) {
        return Err(CliError::Numerical(format!("energy residual {energy:.3e} exceeds {:.1e} (key: tol-energy)", cfg.tol.energy)));
    }
    Ok(())
}

fn report_failures(failures: &[(usize, usize, String)], out: &mut dyn Write) -> CliResult<()> {
    for (id, step, why) in failures {
        writeln!(out, "seed {id} stopped at bounce {step}: {why}").map_err(io_err)?;
    }
    if let Some((id, step, why)) = failures.first() {
        return Err(CliError::Numerical(format!("{} orbits truncated, first: seed {id} at bounce {step}: {why}", failures.len())));
    }
    Ok(())
}

fn cmd_focal(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let t = table_around_center(cfg)?;
    let f = is_focal_with(&t, cfg.center, cfg.samples, cfg.tol.focal).map_err(|e| CliError::keyed("center", e))?;
    let verdict = match f.verdict {
        FocalVerdict::Focal => "yes",
        FocalVerdict::Inconclusive => "inconclusive",
        FocalVerdict::NotFocal => "no",
    };
    writeln!(
        out,
        "focal: {verdict}, variation {:.3e} relative to the mean (tolerance {:.1e}; absolute {:.3e}), value ≈ {:.12}",
        f.variation / f.mean,
        cfg.tol.focal,
        f.variation,
        f.mean
    )
    .map_err(io_err)?;
    writeln!(out, "phi range: [{:.15}, {:.15}] over {} samples", f.min, f.max, cfg.samples).map_err(io_err)?;
    let k = classify_kind(&t, cfg.center).map_err(|e| CliError::keyed("center", e))?;
    match k.kind {
        None => writeln!(out, "kind: undefined (circle centred at the center)"),
        Some(kind) => writeln!(
            out,
            "kind: {kind:?} ({} distance critical points, {} extremum pairs, {} antipodal{})",
            k.critical.len(),
            k.pairs.len(),
            k.pairs.iter().filter(|p| p.antipodal).count(),
            if k.readings_disagree { "; min/max-only reading differs" } else { "" }
        ),
    }
    .map_err(io_err)
}

fn cmd_psi(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let t = table_around_center(cfg)?;
    let set = critical_points_psi(&t, cfg.center).map_err(|e| CliError::keyed("center", e))?;
    let header = ["xi", "eta", "index", "zero_area", "level", "grad_norm"];
    let rows: Vec<[String; 6]> = set
        .points
        .iter()
        .map(|p| {
            [
                format!("{:.12}", p.xi),
                format!("{:.12}", p.eta),
                p.index.to_string(),
                p.zero_area.to_string(),
                format!("{:.12}", p.level),
                format!("{:.3e}", p.grad_norm),
            ]
        })
        .collect();
    writeln!(out, "{}", header.join("\t")).map_err(io_err)?;
    for r in &rows {
        writeln!(out, "{}", r.join("\t")).map_err(io_err)?;
    }
    writeln!(out, "critical points: {}, index sum {}", set.points.len(), set.index_sum()).map_err(io_err)?;
    if let Some(r) = &set.ridge {
        writeln!(out, "focal ridge at level {:.12} ({} samples)", r.level, r.samples.len()).map_err(io_err)?;
    }
    if !set.unresolved.is_empty() {
        writeln!(out, "unresolved seeds: {}", set.unresolved.len()).map_err(io_err)?;
    }
    if let Some(p) = &cfg.csv {
        let mut w = csv::Writer::from_writer(create("csv", p)?);
        let mut res = w.write_record(header);
        for r in &rows {
            res = res.and_then(|_| w.write_record(r));
        }
        res.and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| CliError::Numerical(format!("output failed: {e} (key: csv)")))?;
    }
    Ok(())
}

fn domain_for(word: &SymbolWord, tri: &Option<WordDomain>, deg: &Option<WordDomain>) -> Option<WordDomain> {
    let d = if word.alphabet() == kepler_billiards::shadowing::Alphabet::Triangle { tri } else { deg };
    d.clone()
}

fn cmd_shadow(cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let sc = scene(cfg)?;
    let sel = select_intervals(&sc.table, sc.c, &ArcDomain::default()).map_err(|e| CliError::keyed("center", e))?;
    for n in &sel.notes {
        writeln!(out, "note: {n}").map_err(io_err)?;
    }
    let opts = SolveOptions::default();
    let results: Vec<(SymbolWord, KbResult<_>)> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .words
            .iter()
            .map(|w| {
                let dom = domain_for(w, &sel.triangle, &sel.degenerate);
                let sc = &sc;
                let opts = &opts;
                s.spawn(move || {
                    let res = match dom {
                        None => Err(kepler_billiards::KbError::NotApplicable(format!(
                            "no interval template for the alphabet of {w}"
                        ))),
                        Some(d) => solve_word(w, sc, &d, opts).and_then(|o| Ok((verify_orbit(&o, sc)?, o))),
                    };
                    (w.clone(), res)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
    });
    let mut failed = Vec::new();
    for (w, res) in results {
        let (r, o) = match res {
            Ok(x) => x,
            Err(e) => {
                writeln!(out, "word {w}: {e}").map_err(io_err)?;
                failed.push(format!("{w}: {e}"));
                continue;
            }
        };
        let pass = r.passed_with(cfg.tol.reflection, cfg.tol.replay);
        writeln!(out, "word {w}: period {}{}", r.period, o.collapsed_to.map(|p| format!(" (collapses to word period {p})")).unwrap_or_default())
            .map_err(io_err)?;
        for (k, u) in o.u.iter().enumerate() {
            writeln!(out, "  bounce {k}: u = {u:.15} ({} arc, r_min {:.3e})", o.classes[k], o.arcs[k].r_min).map_err(io_err)?;
        }
        let lines = [
            format!("reflection residual: {:.3e} (< {:.1e})", r.max_reflection_residual, cfg.tol.reflection),
            format!("endpoint residual: {:.3e}", r.max_endpoint_residual),
            format!("energy residual: {:.3e}", r.max_energy_residual),
            format!("inside intervals: {}", r.inside_intervals),
            format!("max excursion: {:.3e}", r.max_excursion),
            format!("replay deviation (extended precision): {:.3e} (< {:.1e})", r.precise_replay_deviation, cfg.tol.replay),
            format!("replay deviation (double precision): {:.3e}", r.replay_deviation),
            format!("stepwise deviation: {:.3e}", r.stepwise_deviation),
            format!("monodromy norm: {:.3e}", r.monodromy_norm),
            format!("extended-precision polish: gradient {:.1e}, shift {:.1e}", r.precise_gradient, r.precise_shift),
        ];
        for l in &lines {
            writeln!(out, "  {l}").map_err(io_err)?;
        }
        writeln!(out, "verification: {}", if pass { "PASS" } else { "FAIL" }).map_err(io_err)?;
        if !pass {
            failed.push(format!("{w}: verification failed"));
        }
        if let Some(p) = &cfg.csv {
            orbit_csv(&o, &sc.table, create("csv", p)?).map_err(|e| CliError::keyed("csv", e))?;
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{} (key: word)", failed.join("; "))))
    }
}
