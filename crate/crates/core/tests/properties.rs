use phskew::cli::RunConfig;
use phskew::fiber::{flow_theta, CirclePoint};
use phskew::system::{derive_params, BaseConfig, Point3, SkewSystem};
use phskew::torus::{HyperbolicMatrix, TorusPoint2};
use proptest::prelude::*;

fn system() -> SkewSystem {
    SkewSystem::new(derive_params(BaseConfig::default()).params).unwrap()
}

proptest! {
    #[test]
    fn cat_map_is_exactly_invertible(u in any::<u64>(), v in any::<u64>(), n in -50i64..50) {
        let a = HyperbolicMatrix::cat();
        let q = TorusPoint2::from_raw(u, v);
        prop_assert_eq!(a.apply_inverse(a.apply(q)), q);
        prop_assert_eq!(a.apply_n(a.apply_n(q, n), -n), q);
    }

    #[test]
    fn skew_map_inverse_round_trips(u in 0.0..1.0f64, v in 0.0..1.0f64, t in -1.0..1.0f64) {
        let sys = system();
        let p = Point3::new(TorusPoint2::new(u, v), t);
        let back = sys.inverse(sys.apply(p));
        prop_assert_eq!(back.base, p.base);
        prop_assert!(back.t.distance(&p.t) < 1e-12, "{} vs {}", back.t.t(), p.t.t());
    }

    #[test]
    fn theta_flow_is_a_group_action(t in -1.0..1.0f64, s1 in -2.0..2.0f64, s2 in -2.0..2.0f64) {
        let a = flow_theta(flow_theta(t, s1).value, s2).value;
        let b = flow_theta(t, s1 + s2).value;
        prop_assert!(CirclePoint::new(a).distance(&CirclePoint::new(b)) < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn config_text_round_trips(rho in 1e-6..1e-2f64, seed in any::<u64>(), n_c in 1usize..10_000,
                               loops in prop::collection::vec((0.01..0.5f64, 0.01..0.5f64), 0..6)) {
        let mut c = RunConfig::default();
        c.rho = rho;
        c.seed = seed;
        c.n_c = n_c;
        c.loops = loops;
        prop_assert_eq!(RunConfig::from_config_str(&c.to_config_string()).unwrap(), c);
    }
}
