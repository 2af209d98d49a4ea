use kepler_billiards::birkhoff::{bmap, det2, jacobian_s_alpha, to_s_minus_cos, PhaseState};
use kepler_billiards::focal::{psi, winding_index};
use kepler_billiards::kepler_arc::{solve_arc, ArcClass, ArcDomain};
use kepler_billiards::kepler_billiard::{kmap, reversibility_residual, BilliardState};
use kepler_billiards::planar::{pt, Pt};
use kepler_billiards::precise::R;
use kepler_billiards::shadowing::SymbolWord;
use kepler_billiards::tables::make_ellipse;
use kepler_billiards::Scene;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn admissible_pair() -> impl Strategy<Value = (Pt, Pt)> {
    (0.2f64..4.0, 0.2f64..4.0, 0.0f64..TAU, 0.05f64..(0.9 * PI), prop::bool::ANY).prop_map(|(r0, r1, th, gap, ccw)| {
        let s = if ccw { 1.0 } else { -1.0 };
        (Pt::from_polar(r0, th), Pt::from_polar(r1, th + s * gap))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arcs_hit_their_endpoints((p0, p1) in admissible_pair(), h in 1.0f64..1e4, mu in 0.1f64..5.0, indirect in prop::bool::ANY) {
        let class = if indirect { ArcClass::Indirect } else { ArcClass::Direct };
        prop_assume!(ArcDomain { delta: 0.1, epsilon: 1e-3 }.admits(class, p0, p1));
        let a = solve_arc(p0, p1, class, h, mu).unwrap();
        prop_assert!(a.endpoint_residual() < 1e-10 * (1.0 + p0.norm().max(p1.norm())));
        prop_assert!(a.energy_residual_regularized(128) < 1e-10);
        prop_assert!((a.length - a.length_closed_form()).abs() < 1e-10 * a.length);
        let b = solve_arc(p1, p0, class, h, mu).unwrap();
        prop_assert!((a.length - b.length).abs() < 1e-10 * a.length);
    }

    #[test]
    fn birkhoff_map_preserves_area(u in 0.0f64..TAU, alpha in 0.2f64..(PI - 0.2)) {
        let e = make_ellipse(2.0, 1.0).unwrap();
        let s = PhaseState::new(u, alpha).unwrap();
        let img = bmap(&e, s).unwrap();
        let j = jacobian_s_alpha(&e, |x| bmap(&e, x), s, 1e-6).unwrap();
        prop_assert!((det2(to_s_minus_cos(j, alpha, img.alpha)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kepler_map_is_reversible_and_keeps_energy(u in 0.0f64..TAU, alpha in 0.2f64..(PI - 0.2), h in 2.0f64..100.0) {
        let sc = Scene::new(make_ellipse(2.0, 1.0).unwrap(), pt(0.5, 0.3), 1.0, h).unwrap();
        let s = BilliardState::from_angle(&sc, u, alpha).unwrap();
        let next = kmap(&sc, &s).unwrap();
        prop_assert!(next.energy_residual(&sc).abs() < 1e-10);
        prop_assert!(reversibility_residual(&sc, &s).unwrap() < 1e-8);
    }

    #[test]
    fn psi_is_symmetric(xi in 0.0f64..TAU, eta in 0.0f64..TAU) {
        prop_assume!((xi - eta).abs() > 1e-3);
        let e = make_ellipse(2.0, 1.0).unwrap();
        let c = pt(0.5, 0.3);
        let a = psi(&e, c, xi, eta).unwrap();
        let b = psi(&e, c, eta, xi).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn linear_field_index_is_sign_of_determinant(m in prop::array::uniform4(-2.0f64..2.0), x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
        let det = m[0] * m[3] - m[1] * m[2];
        prop_assume!(det.abs() > 0.05);
        let field = |x: f64, y: f64| [m[0] * (x - x0) + m[1] * (y - y0), m[2] * (x - x0) + m[3] * (y - y0)];
        let w = winding_index(field, (x0, y0), 0.3).unwrap();
        prop_assert_eq!(w.index, det.signum() as i32);
    }

    #[test]
    fn word_display_round_trips(letters in prop::collection::vec(prop::bool::ANY, 1..64)) {
        let text: String = letters.iter().map(|&p| if p { "T'" } else { "T" }).collect();
        let w = SymbolWord::parse(&text).unwrap();
        prop_assert_eq!(w.len(), letters.len());
        prop_assert_eq!(SymbolWord::parse(&w.to_string()).unwrap(), w);
    }

    #[test]
    fn extended_reals_round_trip(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(R::from_f64(x).to_f64(), x);
    }
}
