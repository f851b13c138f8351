//! Property tests for the geometry and solver invariants that hold for every
//! valid input, not just the pinned examples.

use proptest::prelude::*;

use steklov_core::geometry::{
    boundary_harmonics, lp_norm, weighted_volume_integral, BaseDomain, FiberSpectrum,
    WarpingFunction,
};
use steklov_core::quad::Mesh;
use steklov_core::spectrum::steklov_spectrum;
use steklov_core::sturm;

/// Strictly increasing grid on [0, 1] with interior jitter.
fn grid_strategy(m: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.1f64..0.9, m).prop_map(move |jitter| {
        let mut g = vec![0.0];
        for (j, &x) in jitter.iter().enumerate() {
            g.push((j as f64 + x) / m as f64);
        }
        g.push(1.0);
        g
    })
}

fn warping_strategy() -> impl Strategy<Value = WarpingFunction> {
    (2usize..7).prop_flat_map(|m| {
        (
            grid_strategy(m),
            proptest::collection::vec(0.3f64..4.0, m + 2),
        )
            .prop_map(|(grid, values)| WarpingFunction::from_samples(grid, values).unwrap())
    })
}

fn unit_trace_strategy() -> impl Strategy<Value = WarpingFunction> {
    warping_strategy().prop_map(|h| {
        let grid = h.breakpoints().to_vec();
        let mut values: Vec<f64> = grid.iter().map(|&t| h.eval(t)).collect();
        values[0] = 1.0;
        let last = values.len() - 1;
        values[last] = 1.0;
        WarpingFunction::from_samples(grid, values).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_weighted_integral_is_exact(c in 0.2f64..8.0, s in -3i32..6) {
        let base = BaseDomain::interval(1.0).unwrap();
        let h = WarpingFunction::constant(c).unwrap();
        let got = weighted_volume_integral(&base, &h, s).unwrap();
        let want = c.powi(s);
        prop_assert!((got - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn lp_norm_monotone_in_h(h in warping_strategy(), p in 1.0f64..5.0, shift in 0.05f64..2.0) {
        // h1 <= h2 pointwise implies |h1|_p <= |h2|_p
        let base = BaseDomain::interval(1.0).unwrap();
        let grid = h.breakpoints().to_vec();
        let bumped: Vec<f64> = grid.iter().map(|&t| h.eval(t) + shift).collect();
        let h2 = WarpingFunction::from_samples(grid, bumped).unwrap();
        let n1 = lp_norm(&base, &h, p).unwrap();
        let n2 = lp_norm(&base, &h2, p).unwrap();
        prop_assert!(n1 <= n2 + 1e-12);
    }

    #[test]
    fn fiber_eigenvalues_sorted_from_zero(j in 2usize..12) {
        for fiber in [
            FiberSpectrum::circle(0.7).unwrap(),
            FiberSpectrum::sphere(2).unwrap(),
            FiberSpectrum::sphere(4).unwrap(),
        ] {
            let eigs = fiber.eigenvalues(j).unwrap();
            prop_assert_eq!(eigs[0], (0.0, 1));
            prop_assert!(eigs.windows(2).all(|w| w[1].0 > w[0].0));
        }
    }

    #[test]
    fn boundary_harmonic_count_grows(d in 2usize..5, m in 2usize..8) {
        let base = BaseDomain::ball(d, 1.0).unwrap();
        let hs = boundary_harmonics(&base, m);
        prop_assert_eq!(hs.len(), m);
        prop_assert!(hs.windows(2).all(|w| w[1].0 > w[0].0));
        prop_assert!(hs.iter().all(|&(mu, mult)| mu >= 0.0 && mult >= 1));
    }

    #[test]
    fn aux_eigenvalues_nonnegative_and_sorted(
        h in warping_strategy(),
        lambda in 0.0f64..10.0,
    ) {
        let base = BaseDomain::interval(1.0).unwrap();
        let mesh = sturm::default_mesh(&base, &h, 64);
        let sig = sturm::solve_mode(&base, &h, 2, lambda, 0.0, &mesh).unwrap();
        prop_assert!(sig[0] >= 0.0);
        prop_assert!(sig[0] <= sig[1]);
    }

    #[test]
    fn spectrum_starts_at_zero_and_sorted(h in unit_trace_strategy()) {
        let base = BaseDomain::interval(1.0).unwrap();
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &h, &fiber, 4, 64).unwrap();
        let ex = spec.expanded();
        prop_assert_eq!(ex[0], 0.0);
        prop_assert!(ex[1] > 0.0, "sigma_1 positive by connectedness");
        prop_assert!(ex.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn fiber_multiplicity_bookkeeping(h in unit_trace_strategy()) {
        let base = BaseDomain::interval(1.0).unwrap();
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &h, &fiber, 5, 64).unwrap();
        let eigs = fiber.eigenvalues(32).unwrap();
        // per fiber index, the entry count is (#modes popped) and every
        // entry carries that fiber's multiplicity
        for e in spec.entries() {
            prop_assert_eq!(e.multiplicity, eigs[e.fiber_index].1);
            prop_assert_eq!(e.lambda, eigs[e.fiber_index].0);
        }
    }

    #[test]
    fn kcompk0_on_random_instances(h in unit_trace_strategy(), k in 1usize..6) {
        let base = BaseDomain::interval(1.0).unwrap();
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &h, &fiber, k, 128).unwrap();
        let rep = steklov_core::spectrum::check_kcompk0(&spec, &base, &h, &fiber, k).unwrap();
        prop_assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn rayleigh_quotient_above_sigma0(
        h in warping_strategy(),
        profile in proptest::collection::vec(0.1f64..2.0, 9),
        lambda in 0.0f64..6.0,
    ) {
        let base = BaseDomain::interval(1.0).unwrap();
        let mesh = sturm::default_mesh(&base, &h, 128);
        let sigma0 = sturm::aux_sigma0(&base, &h, 2, lambda, &mesh).unwrap();
        let knots: Vec<f64> = (0..9).map(|j| j as f64 / 8.0).collect();
        let trial = WarpingFunction::from_samples(knots, profile).unwrap();
        let a: Vec<f64> = mesh.nodes().iter().map(|&t| trial.eval(t)).collect();
        let r = sturm::rayleigh_quotient(&base, &h, 2, lambda, &mesh, &a).unwrap();
        prop_assert!(r >= sigma0 - 1e-10, "R = {r} < sigma_0 = {sigma0}");
    }

    #[test]
    fn warping_table_roundtrip(h in warping_strategy()) {
        let mut text = String::new();
        for &t in h.breakpoints() {
            text.push_str(&format!("{:.17e} {:.17e}\n", t, h.eval(t)));
        }
        let back = WarpingFunction::from_table_str(&text).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            prop_assert!((h.eval(t) - back.eval(t)).abs() <= 1e-12 * h.eval(t));
        }
    }

    #[test]
    fn mesh_refinement_nests(n in 2usize..40) {
        let mesh = Mesh::uniform(0.0, 1.0, n);
        let fine = mesh.refined();
        prop_assert_eq!(fine.n_elements(), 2 * n);
        for &x in mesh.nodes() {
            prop_assert!(fine.nodes().contains(&x));
        }
    }
}
