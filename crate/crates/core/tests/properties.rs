use proptest::prelude::*;
use semiflow::abel::LinearizationModel;
use semiflow::catalog;
use semiflow::conjugation::{parabolic_group_apply, MobiusGroup};
use semiflow::flow::{FlowMap, OdeFlow};
use semiflow::geometry::{cayley, horocycle_distance, horocycle_distance_pt, inverse_cayley};
use semiflow::{Point, C64};
use std::sync::OnceLock;

fn disk_point(max_r: f64) -> impl Strategy<Value = C64> {
    (0.0..max_r, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn models() -> &'static Vec<(String, LinearizationModel)> {
    static M: OnceLock<Vec<(String, LinearizationModel)>> = OnceLock::new();
    M.get_or_init(|| {
        ["parabolic-auto(1)", "quadrant", "bfid-par", "bfid-hyp", "perturbed-parabolic"]
            .iter()
            .map(|id| (id.to_string(), LinearizationModel::new(&catalog::get(id).unwrap().f()).unwrap()))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cayley_round_trip(z in disk_point(0.999)) {
        let back = inverse_cayley(cayley(z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn horocycle_on_the_diameter(r in -0.999f64..0.999) {
        let d = horocycle_distance(C64::new(r, 0.0)).unwrap();
        // 1 + r cancels as r -> -1; both sides carry a relative error of about eps/(1+r)
        let tol = 4.0 * f64::EPSILON * d / (1.0 + r);
        prop_assert!((d - (1.0 - r) / (1.0 + r)).abs() <= tol, "{d} at r = {r}");
    }

    #[test]
    fn parabolic_group_preserves_horocycles(z in disk_point(0.95), t in 0.0f64..100.0, b in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let g = MobiusGroup::new(0.0, 1.0 / b).unwrap();
        let p = g.apply(t, &Point::new(z));
        let d0 = horocycle_distance(z).unwrap();
        prop_assert!((horocycle_distance_pt(&p).unwrap() - d0).abs() < 1e-10 * d0.max(1.0));
        prop_assert!((parabolic_group_apply(b, t, z).unwrap() - p.z).norm() < 1e-12);
    }

    #[test]
    fn parabolic_group_law(z in disk_point(0.95), t in 0.0f64..20.0, s in 0.0f64..20.0, b in 0.2f64..3.0) {
        let lhs = parabolic_group_apply(b, t + s, z).unwrap();
        let rhs = parabolic_group_apply(b, t, parabolic_group_apply(b, s, z).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hyperbolic_group_linearizer(z in disk_point(0.95), t in 0.0f64..5.0, a in 0.1f64..3.0, b in -3.0f64..3.0) {
        let g = MobiusGroup::new(a, b).unwrap();
        let p = Point::new(z);
        prop_assert!((g.k0(&g.apply(t, &p)) - g.k0(&p) - t).norm() < 1e-9 * (1.0 + t));
        prop_assert!(g.g(&Point::new(g.eta)).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_matches_finite_difference(z in disk_point(0.95), k in 0usize..12) {
        let e = &catalog::all_entries()[k];
        let f = e.f();
        let df = f.derivative();
        let h = 1e-6 * (1.0 - z.norm());
        let fd = (f.eval_z(z + h).unwrap() - f.eval_z(z - h).unwrap()) / (2.0 * h);
        let exact = df.eval_z(z).unwrap();
        prop_assert!((fd - exact).norm() <= 1e-6 * exact.norm().max(1.0), "{}: {} vs {}", e.id, fd, exact);
    }

    #[test]
    fn forward_orbits_stay_in_disk(z in disk_point(0.99), k in 0usize..12, t in 0.1f64..50.0) {
        let f = catalog::all_entries()[k].f();
        let opts = semiflow::ode::OdeOptions { record: true, ..Default::default() };
        let tr = semiflow::flow::integrate(&f, z, t, &opts).unwrap();
        for (_, p) in &tr.samples {
            prop_assert!(p.boundary_gap() > 0.0);
        }
    }

    #[test]
    fn ode_and_abel_flows_agree(z in disk_point(0.9), k in 0usize..5, t in 0.0f64..100.0) {
        let (id, m) = &models()[k];
        let p = Point::new(z);
        let a = m.abel_flow(&p, t).unwrap();
        let o = OdeFlow::new(&m.f).flow(&p, t).unwrap();
        prop_assert!((a.z - o.z).norm() < 1e-7, "{id}: {} vs {}", a.z, o.z);
    }

    #[test]
    fn inversion_round_trip(z in disk_point(0.95), k in 0usize..5) {
        let (id, m) = &models()[k];
        let p = Point::new(z);
        let back = m.invert_auto(m.h(&p).unwrap()).unwrap();
        prop_assert!((back.z - z).norm() < 1e-10, "{id}: {z} -> {}", back.z);
    }
}

/// `h(z)` lies under the lower slit of `h(Δ)`, while the anchors nearest to it in the
/// w-plane sit just above the slit.
#[test]
fn inversion_under_a_slit() {
    let m = &models()[2].1;
    let z = C64::new(0.5639286428975498, -0.7325202462768071);
    let back = m.invert_auto(m.h(&Point::new(z)).unwrap()).unwrap();
    assert!((back.z - z).norm() < 1e-10);
}
