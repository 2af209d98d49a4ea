//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2, TAU};
use std::time::Instant;

use kepler_billiards::birkhoff::{
    bmap, bmap_n, default_seeds, delta_minus, dt2_two_periodic, dt_two_periodic, iterate_portrait, jacobian_s_alpha,
    orthogonal_chords_through, real_eigenvalues, PhaseState, TwoPeriodicData,
};
use kepler_billiards::birkhoff::RadialKind;
use kepler_billiards::export::{kepler_csv, kepler_svg, SvgStyle};
use kepler_billiards::focal::{
    chord_rigidity, classify_kind, critical_points_psi, focal_polynomial, hess_det_chord, index_additivity, is_focal,
    is_focal_with, winding_index, Kind,
};
use kepler_billiards::kepler_arc::{
    generating_partials, generating_s, jacobi_length, length_gradient, solve_arc, ArcClass, ArcDomain,
};
use kepler_billiards::kepler_billiard::{angular_momentum, kmap, portrait, symplectic_jacobian, BilliardState};
use kepler_billiards::planar::{circ_diff, pt, Pt};
use kepler_billiards::shadowing::{select_intervals, solve_word, verify_orbit, SolveOptions, SymbolWord, FOCAL_GUARD};
use kepler_billiards::tables::{make_ellipse, make_string_table, StringSpec, WidthFourierSpec};
use kepler_billiards::{BoundaryTable, KbError, Scene};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn string_table() -> BoundaryTable {
    make_string_table(&StringSpec { width: WidthFourierSpec::single_mode(1.0, 3, 1.0 / 3.0), c: pt(3.0, 0.0), ell: 6.0 })
        .expect("string table")
}

fn polar(r: f64, th: f64) -> Pt {
    Pt::from_polar(r, th)
}

fn c1_arc_solver() -> Outcome {
    let start = Instant::now();
    let dom = ArcDomain { delta: 0.2, epsilon: 1e-3 };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_end, mut worst_energy, mut failures, mut count) = (0.0f64, 0.0f64, 0usize, 0usize);
    for i in 0..500 {
        let near_antipodal = i % 2 == 1;
        let r0 = rng.gen_range(dom.delta..1.0 / dom.delta);
        let r1 = rng.gen_range(dom.delta..1.0 / dom.delta);
        let th0 = rng.gen_range(0.0..TAU);
        let gap = if near_antipodal {
            rng.gen_range(PI * (1.0 - dom.delta)..PI)
        } else {
            rng.gen_range(1e-2..PI * (1.0 - dom.delta))
        };
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let p0 = polar(r0, th0);
        let p1 = polar(r1, th0 + sign * gap);
        let h = if rng.gen_bool(0.5) { 10.0 } else { 1e3 };
        let mu = if rng.gen_bool(0.5) { 1.0 } else { 5.0 };
        let classes = if near_antipodal { [ArcClass::Ccw, ArcClass::Cw] } else { [ArcClass::Direct, ArcClass::Indirect] };
        for class in classes {
            assert!(dom.admits(class, p0, p1));
            count += 1;
            match solve_arc(p0, p1, class, h, mu) {
                Ok(a) => {
                    worst_end = worst_end.max(a.endpoint_residual());
                    worst_energy = worst_energy.max(a.energy_residual(256) / h);
                }
                Err(_) => failures += 1,
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures == 0 && worst_end < 1e-8 && worst_energy < 1e-8 && secs < 30.0,
        format!(
            "{count} arcs over 500 pairs, {failures} failures, endpoint {worst_end:.1e} (< 1e-8), energy/h {worst_energy:.1e} (< 1e-8), {secs:.1} s (< 30)"
        ),
    )
}

fn c2_asymptotics() -> Outcome {
    let (p0, p1) = (pt(1.0, 0.0), pt(0.0, 1.0));
    let direct = |h: f64| {
        let l = solve_arc(p0, p1, ArcClass::Direct, h, 1.0).unwrap().length;
        h.sqrt() * (l - h.sqrt() * SQRT_2)
    };
    let (q4, q6) = (direct(1e4), direct(1e6));
    let spread = (q4 - q6).abs() / q6.abs();
    let h = 1e6;
    let li = solve_arc(p0, p1, ArcClass::Indirect, h, 1.0).unwrap().length;
    let ratio = (li - 2.0 * h.sqrt()) / ((1.0 / h.sqrt()) * (2.0 * h).ln());
    outcome(
        spread < 0.05 && (0.8..=1.2).contains(&ratio),
        format!("direct correction {q4:.6} vs {q6:.6} (spread {:.2}% < 5%), indirect ratio {ratio:.4} in [0.8, 1.2]", 100.0 * spread),
    )
}

fn c3_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let scenes = [10.0, 1e3].map(|h| Scene::new(make_ellipse(2.0, 1.0).unwrap(), pt(0.5, 0.3), 1.0, h).unwrap());
    let dom = ArcDomain::default();
    let (mut worst_len, mut worst_gen, mut tested) = (0.0f64, 0.0f64, 0usize);
    while tested < 200 {
        let class = if rng.gen_bool(0.5) { ArcClass::Direct } else { ArcClass::Indirect };
        let which = rng.gen_range(0..2);
        let h = scenes[which].h;
        let r0 = rng.gen_range(0.3..3.0);
        let r1 = rng.gen_range(0.3..3.0);
        let th0 = rng.gen_range(0.0..TAU);
        let p0 = polar(r0, th0);
        let p1 = polar(r1, th0 + rng.gen_range(0.2..2.8));
        let arc = match solve_arc(p0, p1, class, h, 1.0) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let (g0, g1) = length_gradient(&arc);
        let len = |a: Pt, b: Pt| jacobi_length(&solve_arc(a, b, class, h, 1.0).unwrap()).unwrap();
        let e = 1e-5;
        let mut fd = [0.0; 4];
        for (k, d) in [pt(e, 0.0), pt(0.0, e)].into_iter().enumerate() {
            fd[k] = (len(p0 + d, p1) - len(p0 - d, p1)) / (2.0 * e);
            fd[k + 2] = (len(p0, p1 + d) - len(p0, p1 - d)) / (2.0 * e);
        }
        let an = [g0.re, g0.im, g1.re, g1.im];
        let scale = an.iter().map(|x| x * x).sum::<f64>().sqrt();
        for k in 0..4 {
            worst_len = worst_len.max((an[k] - fd[k]).abs() / scale);
        }

        let sc_h = &scenes[which];
        let xi = rng.gen_range(0.0..TAU);
        let eta = xi + rng.gen_range(0.5..2.5);
        let Ok(g) = generating_partials(sc_h, xi, eta, class, &dom) else { continue };
        let s = |a: f64, b: f64| generating_s(sc_h, a, b, class, &dom).unwrap().s;
        let e = 1e-6;
        let fd1 = (s(xi + e, eta) - s(xi - e, eta)) / (2.0 * e);
        let fd2 = (s(xi, eta + e) - s(xi, eta - e)) / (2.0 * e);
        let scale = g.d1.hypot(g.d2);
        worst_gen = worst_gen.max((g.d1 - fd1).abs() / scale).max((g.d2 - fd2).abs() / scale);
        tested += 1;
    }
    outcome(
        worst_len < 1e-5 && worst_gen < 1e-5,
        format!("{tested} configurations, length gradient {worst_len:.1e}, generating partials {worst_gen:.1e} (< 1e-5 relative)"),
    )
}

fn c4_ellipse_focus() -> Outcome {
    let e = make_ellipse(2.0, 1.0).unwrap();
    let f = is_focal_with(&e, pt(3f64.sqrt(), 0.0), 1024, 1e-6).unwrap();
    let dev = (f.max - 8.0).abs().max((f.min - 8.0).abs());
    let g = is_focal(&e, pt(1.0, 0.0)).unwrap();
    outcome(
        dev < 1e-8 && g.variation > 1e-2,
        format!("focus max |phi - 8| = {dev:.1e} (< 1e-8), c = (1, 0) variation {:.3} (> 1e-2)", g.variation),
    )
}

fn c5_string_focality() -> Outcome {
    let t = string_table();
    let c = pt(3.0, 0.0);
    let f = is_focal(&t, c).unwrap();
    let k = classify_kind(&t, c).unwrap();
    let extrema: Vec<_> = k.critical.iter().filter(|p| p.kind != RadialKind::Inflection).collect();
    let antipodal = k.pairs.len() == 1 && k.pairs[0].antipodal;
    let value_dev = (f.max - 14.0).abs().max((f.min - 14.0).abs());
    outcome(
        f.variation < 1e-6 && value_dev < 1e-6 && k.kind == Some(Kind::Second) && extrema.len() == 2 && antipodal,
        format!(
            "variation {:.1e} (< 1e-6), |phi - 14| {value_dev:.1e} (< 1e-6), kind {:?}, {} strict extrema, antipodal {antipodal}",
            f.variation,
            k.kind,
            extrema.len()
        ),
    )
}

fn c6_rigidity() -> Outcome {
    let e = make_ellipse(2.0, 1.0).unwrap();
    let s3 = 3f64.sqrt();
    let chords = chord_rigidity(&e, pt(s3, 0.0));
    let det_a = chords.iter().map(|c| c.hess_det.abs()).fold(0.0, f64::max);
    let (_, det_exact) = hess_det_chord(2.0 - s3, 2.0 + s3, 2.0, 2.0);
    let ok_a = !chords.is_empty() && det_a < 1e-12 && det_exact.abs() < 1e-12;

    let p = focal_polynomial(4.0, 2.0, 2.0).unwrap();
    let coeff_dev = (p.coeffs[0] - 1.0).abs().max((p.coeffs[1] + 4.0).abs()).max((p.coeffs[2] - 1.0).abs());
    let root_dev = if p.roots.len() == 2 {
        (p.roots[0] - (2.0 - s3)).abs().max((p.roots[1] - (2.0 + s3)).abs())
    } else {
        f64::INFINITY
    };
    let ok_b = coeff_dev < 1e-12 && root_dev < 1e-10;

    let t = string_table();
    let sc = orthogonal_chords_through(&t, pt(3.0, 0.0));
    let mut ok_c = !sc.chords.is_empty();
    let (mut disc_min, mut eig_dev) = (f64::INFINITY, 0.0f64);
    for ch in &sc.chords {
        let dt2 = dt2_two_periodic(ch);
        disc_min = disc_min.min(dt2.discriminant);
        let s = PhaseState::new(ch.u1, FRAC_PI_2).unwrap();
        let fd = jacobian_s_alpha(&t, |x| bmap_n(&t, x, 2), s, 1e-6).unwrap();
        match (real_eigenvalues(dt2.matrix), real_eigenvalues(fd)) {
            (Some(a), Some(b)) => {
                eig_dev = eig_dev.max((a.0 - b.0).abs() / a.0.abs()).max((a.1 - b.1).abs() / a.1.abs());
            }
            _ => ok_c = false,
        }
    }
    ok_c &= disc_min > 0.0 && eig_dev < 1e-5;

    let circle = TwoPeriodicData::from_raw(2.0, 1.0, 1.0);
    let dt = dt_two_periodic(&circle);
    let dt_dev = (dt[0][0] - 1.0).abs().max((dt[0][1] - 2.0).abs()).max(dt[1][0].abs()).max((dt[1][1] - 1.0).abs());
    let circ_disc = dt2_two_periodic(&circle).discriminant;
    let ok_d = dt_dev < 1e-15 && circ_disc == 0.0;
    outcome(
        ok_a && ok_b && ok_c && ok_d,
        format!(
            "(a) det {det_a:.1e}/{:.1e} (b) coeffs {coeff_dev:.1e} roots {root_dev:.1e} (c) {} chords, min discriminant {disc_min:.3e}, eigenvalues {eig_dev:.1e} (d) DT {dt_dev:.1e}, discriminant {circ_disc}",
            det_exact.abs(),
            sc.chords.len()
        ),
    )
}

fn c7_invariant_graph() -> Outcome {
    let t = string_table();
    let c = pt(3.0, 0.0);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for j in 0..200 {
        let u = TAU * (j as f64 + 0.5) / 200.0;
        match bmap(&t, delta_minus(&t, c, u)).and_then(|s| bmap(&t, s)) {
            Ok(img) => worst = worst.max((img.alpha - delta_minus(&t, c, img.u).alpha).abs()),
            Err(_) => failures += 1,
        }
    }
    outcome(failures == 0 && worst < 1e-6, format!("200 samples, {failures} failures, max angle offset {worst:.1e} (< 1e-6)"))
}

fn c8_index() -> Outcome {
    let r = winding_index(|x, y| [x, y], (0.0, 0.0), 0.5).unwrap().index;
    let s = winding_index(|x, y| [x, -y], (0.0, 0.0), 0.5).unwrap().index;
    let z2 = winding_index(|x, y| [x * x - y * y, 2.0 * x * y], (0.0, 0.0), 0.5).unwrap().index;
    let e = make_ellipse(2.0, 1.0).unwrap();
    let set = critical_points_psi(&e, pt(0.5, 0.3)).unwrap();
    let plus = set.points.iter().filter(|p| p.index == 1).count();
    let add = index_additivity(&e, pt(0.0, 0.0), 0.0, PI, 0.2).unwrap();
    outcome(
        (r, s, z2) == (1, -1, 2) && set.index_sum() == 0 && plus >= 1 && add.holds(),
        format!(
            "canonical fields {r}/{s}/{z2}, {} critical points with index sum {} and {plus} of index +1, additivity {:?}",
            set.points.len(),
            set.index_sum(),
            (add.psi, add.star, add.a, add.c)
        ),
    )
}

fn c9_kepler_map() -> Outcome {
    let fig = Scene::new(string_table(), pt(3.0, 0.0), 5.0, 10.0).unwrap();
    let p = portrait(&fig, &default_seeds(200), 500);
    let bounces = p.rows.len() - 200;
    let energy = p.max_energy_residual();
    let ok_energy = p.failures.is_empty() && bounces >= 100_000 && energy < 1e-8;

    let e = make_ellipse(2.0, 1.0).unwrap();
    let weak = Scene::new(e.clone(), pt(0.5, 0.3), 1e-12, 1.0).unwrap();
    let seeds = default_seeds(20);
    let kp = portrait(&weak, &seeds, 10);
    let bp = iterate_portrait(&e, &seeds, 10);
    let mut free_dev = 0.0f64;
    for (a, b) in kp.rows.iter().zip(&bp.rows) {
        free_dev = free_dev.max(circ_diff(a.u, b.u).abs()).max((a.alpha - b.alpha).abs());
    }
    let ok_free = kp.failures.is_empty() && bp.failures.is_empty() && kp.rows.len() == bp.rows.len() && free_dev < 1e-5;

    let circle = Scene::new(make_ellipse(1.0, 1.0).unwrap(), pt(0.0, 0.0), 1.0, 10.0).unwrap();
    let mut s = BilliardState::from_angle(&circle, 0.3, 1.1).unwrap();
    let l0 = angular_momentum(&circle, &s);
    let mut l_dev = 0.0f64;
    for _ in 0..1000 {
        s = kmap(&circle, &s).unwrap();
        l_dev = l_dev.max((angular_momentum(&circle, &s) - l0).abs());
    }
    let ok_l = l_dev < 1e-9;

    let sc = Scene::new(e, pt(0.5, 0.3), 1.0, 10.0).unwrap();
    let mut det_dev = 0.0f64;
    for (k, p) in default_seeds(100).into_iter().enumerate() {
        let alpha = 0.2 + (PI - 0.4) * (k as f64 + 0.5) / 100.0;
        let st = BilliardState::from_angle(&sc, p.u, alpha).unwrap();
        let j = symplectic_jacobian(&sc, &st, 1e-7).unwrap();
        det_dev = det_dev.max((j[0][0] * j[1][1] - j[0][1] * j[1][0] - 1.0).abs());
    }
    let ok_det = det_dev < 1e-5;
    outcome(
        ok_energy && ok_free && ok_l && ok_det,
        format!(
            "{bounces} bounces energy {energy:.1e} (< 1e-8), weak-center deviation {free_dev:.1e} (< 1e-5), angular momentum {l_dev:.1e} (< 1e-9), symplectic det {det_dev:.1e} (< 1e-5)"
        ),
    )
}

fn c10_shadowing() -> Outcome {
    let e = make_ellipse(2.0, 1.0).unwrap();
    let c = pt(0.5, 0.3);
    let dom = select_intervals(&e, c, &ArcDomain::default()).unwrap().triangle;
    let Some(dom) = dom else { return outcome(false, "no triangle template on the ellipse".into()) };
    let sc = Scene::new(e, c, 1.0, 1e3).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    let mut itineraries = Vec::new();
    for w in ["TT'", "TTT'"] {
        let start = Instant::now();
        let word = SymbolWord::parse(w).unwrap();
        let res = solve_word(&word, &sc, &dom, &SolveOptions::default()).and_then(|o| Ok((verify_orbit(&o, &sc)?, o)));
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok((r, o)) => {
                let pass = r.passed() && r.max_reflection_residual < 1e-8 && r.precise_replay_deviation < 1e-6 && secs < 60.0;
                ok &= pass;
                detail.push(format!(
                    "{w}: residual {:.1e}, replay {:.1e} (double {:.1e}), {secs:.1} s",
                    r.max_reflection_residual, r.precise_replay_deviation, r.replay_deviation
                ));
                itineraries.push(o.u.clone());
            }
            Err(err) => {
                ok = false;
                detail.push(format!("{w}: {err}"));
            }
        }
    }
    let distinct = itineraries.len() == 2 && itineraries[0].len() != itineraries[1].len();
    let guard = matches!(
        select_intervals(&string_table(), pt(3.0, 0.0), &ArcDomain::default()),
        Err(KbError::NotApplicable(ref m)) if m == FOCAL_GUARD
    );
    outcome(
        ok && distinct && guard,
        format!("{}; distinct itineraries {distinct}; string-table guard {guard}", detail.join("; ")),
    )
}

fn c11_figure_smoke() -> Outcome {
    let fig = Scene::new(string_table(), pt(3.0, 0.0), 5.0, 10.0).unwrap();
    let p = portrait(&fig, &default_seeds(200), 500);
    let mut buf = Vec::new();
    kepler_csv(&p, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "energy_residual").unwrap();
    let (mut rows, mut bad) = (0usize, 0usize);
    for rec in reader.records() {
        let rec = rec.unwrap();
        rows += 1;
        let v: f64 = rec[col].parse().unwrap_or(f64::NAN);
        if !(v.abs() < 1e-8) {
            bad += 1;
        }
    }
    let style = SvgStyle::default();
    let a = kepler_svg(&p, &style);
    let b = kepler_svg(&p, &style);
    let complete = p.failures.is_empty() && rows == 200 * 501;
    outcome(
        complete && bad == 0 && a == b && a.starts_with("<svg"),
        format!("{rows} CSV rows, {bad} failing residuals, {} truncated orbits, SVG {} bytes deterministic {}", p.failures.len(), a.len(), a == b),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("arc solver exactness", c1_arc_solver),
        ("high-energy asymptotics", c2_asymptotics),
        ("gradient oracles", c3_gradients),
        ("ellipse focus focality", c4_ellipse_focus),
        ("string-table focality", c5_string_focality),
        ("rigidity formulas", c6_rigidity),
        ("invariant graphs", c7_invariant_graph),
        ("index machinery", c8_index),
        ("Kepler billiard map", c9_kepler_map),
        ("shadowing end-to-end", c10_shadowing),
        ("portrait smoke run", c11_figure_smoke),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} [{:2}] {name}: {} ({:.1} s)", k + 1, o.detail, start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
