use kepler_billiards::kepler_arc::ArcDomain;
use kepler_billiards::planar::{circ_diff, pt};
use kepler_billiards::shadowing::{select_intervals, solve_word, verify_orbit, SolveOptions, SymbolWord, Template, WordDomain};
use kepler_billiards::tables::make_ellipse;
use kepler_billiards::Scene;

fn domain() -> WordDomain {
    let e = make_ellipse(2.0, 1.0).unwrap();
    select_intervals(&e, pt(0.5, 0.3), &ArcDomain::default()).unwrap().triangle.unwrap()
}

fn scene(h: f64) -> Scene {
    Scene::new(make_ellipse(2.0, 1.0).unwrap(), pt(0.5, 0.3), 1.0, h).unwrap()
}

#[test]
fn tt_prime_converges_to_the_critical_pair() {
    let dom = domain();
    let Template::Triangle { vertex, .. } = dom.template else { panic!() };
    let w = SymbolWord::parse("TT'").unwrap();
    let mut dist = Vec::new();
    for h in [1e4, 1e6] {
        let o = solve_word(&w, &scene(h), &dom, &SolveOptions::default()).unwrap();
        let d = o
            .u
            .iter()
            .map(|&u| circ_diff(u, vertex.xi).abs().min(circ_diff(u, vertex.eta).abs()))
            .fold(0.0, f64::max);
        dist.push(d);
    }
    assert!(dist[1] < dist[0], "{dist:?}");
}

#[test]
fn longer_words_verify_in_extended_precision() {
    let dom = domain();
    for (h, word) in [(1e3, "T'"), (1e3, "TT'TT'T'"), (1e4, "TTT'")] {
        let sc = scene(h);
        let o = solve_word(&SymbolWord::parse(word).unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
        let r = verify_orbit(&o, &sc).unwrap();
        assert!(r.passed(), "{word} at h={h}: {r:?}");
        assert!(r.precise_shift < 1e-12, "{word}: {}", r.precise_shift);
    }
}

#[test]
fn lengths_settle_under_quadrature_refinement() {
    let dom = domain();
    let sc = scene(1e3);
    let o = solve_word(&SymbolWord::parse("TTT'").unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
    let r = verify_orbit(&o, &sc).unwrap();
    let finest = r.length_sweep.last().unwrap().1;
    let errs: Vec<f64> = r.length_sweep.iter().map(|&(_, l)| (l - finest).abs() / finest).collect();
    assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{errs:?}");
    assert!(errs[0] < 1e-8);
}

#[test]
fn distinct_words_give_distinct_orbits() {
    let dom = domain();
    let sc = scene(1e3);
    let a = solve_word(&SymbolWord::parse("TTT'").unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
    let b = solve_word(&SymbolWord::parse("TT'T'").unwrap(), &sc, &dom, &SolveOptions::default()).unwrap();
    assert_eq!(a.u.len(), b.u.len());
    let gap = a.u.iter().zip(&b.u).map(|(x, y)| circ_diff(*x, *y).abs()).fold(0.0, f64::max);
    assert!(gap > 1e-3);
}
