use proptest::prelude::*;
use sqg_core::corpus;
use sqg_core::dynamics::{nonlinear_term, solve_on_period, Problem, StepperConfig};
use sqg_core::multiplier::{self, product, riesz_perp, semigroup, Multiplier};
use sqg_core::periodic::{
    geometric_series, linear_trajectory, periodic_initial_datum, resolvent_forward, resolvent_inverse, series_terms,
    PeriodicForcing, Temporal,
};
use sqg_core::probes::{probe_bilinear, probe_positivity, reference_corpus};
use sqg_core::trajectory::uniform_times;
use sqg_core::{BesovSpec, DyadicDecomposition, Field, Grid};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(16)
}

fn grid_size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(16usize), Just(32), Just(64)]
}

fn sample(n: usize, gamma: f64, seed: u64) -> (Grid, Field) {
    let g = Grid::new(n, 2.0 * core::f64::consts::PI).unwrap();
    let f = corpus::smooth_field(&g, gamma, seed);
    (g, f)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn round_trip(n in grid_size(), gamma in 0.0f64..3.0, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let (_, f) = sample(n, gamma, seed);
        let f = f.scaled(scale);
        let back = f.forward().unwrap().inverse();
        prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn parseval(n in grid_size(), gamma in 0.0f64..3.0, seed in any::<u64>()) {
        let (g, f) = sample(n, gamma, seed);
        let mean_square = f.values().iter().map(|v| v * v).sum::<f64>() / g.len() as f64;
        let spectral: f64 = f.forward().unwrap().coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((mean_square - spectral).abs() <= 1e-10 * mean_square);
    }

    #[test]
    fn semigroup_additive_and_contracting(seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0, alpha in 0.1f64..2.0) {
        let (_, f) = sample(32, 1.0, seed);
        let once = semigroup(&f, s + t, alpha).unwrap();
        let twice = semigroup(&semigroup(&f, s, alpha).unwrap(), t, alpha).unwrap();
        prop_assert!(once.max_abs_diff(&twice).unwrap() <= 1e-12 * f.max_abs());
        prop_assert!(semigroup(&f, s, alpha).unwrap().l2_norm() >= once.l2_norm() * (1.0 - 1e-14));
        prop_assert!(f.l2_norm() >= semigroup(&f, s, alpha).unwrap().l2_norm() * (1.0 - 1e-14));
    }

    #[test]
    fn riesz_identities(n in grid_size(), seed in any::<u64>()) {
        let (g, f) = sample(n, 1.0, seed);
        let (u1, u2) = riesz_perp(&f).unwrap();
        prop_assert!(multiplier::divergence(&u1, &u2).unwrap().max_abs() <= 1e-12 * f.max_abs());
        let r1 = Multiplier::riesz(&g, 0);
        let r2 = Multiplier::riesz(&g, 1);
        let sum = r1.apply_field(&r1.apply_field(&f).unwrap()).unwrap()
            .add(&r2.apply_field(&r2.apply_field(&f).unwrap()).unwrap()).unwrap();
        // −Id away from the Nyquist lines, where odd symbols vanish
        let s = f.forward().unwrap();
        let mut kept = s.coeffs().to_vec();
        for (idx, c) in kept.iter_mut().enumerate() {
            let (m1, m2) = (idx % n, idx / n);
            if g.is_nyquist(m1) || g.is_nyquist(m2) {
                *c = num_complex::Complex::new(0.0, 0.0);
            }
        }
        let target = sqg_core::SpectralField::from_coeffs(&g, kept).unwrap().inverse().scaled(-1.0);
        prop_assert!(sum.max_abs_diff(&target).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn multipliers_commute(seed in any::<u64>(), alpha in 0.1f64..2.0, t in 0.0f64..1.0) {
        let (g, f) = sample(32, 1.0, seed);
        let ops = [
            Multiplier::fractional_laplacian(&g, alpha).unwrap(),
            Multiplier::semigroup(&g, t, alpha).unwrap(),
            Multiplier::riesz(&g, 0),
            Multiplier::derivative(&g, 1),
        ];
        let s = f.forward().unwrap();
        for a in &ops {
            for b in &ops {
                let ab = a.apply(&b.apply(&s).unwrap()).unwrap();
                let ba = b.apply(&a.apply(&s).unwrap()).unwrap();
                let scale = ab.coeffs().iter().fold(1e-300f64, |m, c| m.max(c.norm()));
                for (x, y) in ab.coeffs().iter().zip(ba.coeffs()) {
                    prop_assert!((x - y).norm() <= 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn partition_and_reconstruction(n in grid_size(), seed in any::<u64>(), gamma in 0.0f64..3.0) {
        let (g, f) = sample(n, gamma, seed);
        let d = DyadicDecomposition::new(&g);
        for idx in 1..g.len() {
            let total: f64 = d.j_range().map(|j| d.weights(j)[idx]).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
        let mut sum = Field::zeros(&g);
        for j in d.j_range() {
            sum = sum.add(&d.lp_block(&f, j).unwrap()).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&f).unwrap() <= 1e-11 * f.max_abs().max(1.0));
        for j in d.j_range() {
            for k in d.j_range().filter(|k| (k - j).abs() >= 2) {
                prop_assert!(d.weights(j).iter().zip(d.weights(k)).all(|(a, b)| a * b == 0.0));
            }
        }
    }

    #[test]
    fn bony_identity(seed in any::<u64>(), gamma in 1.0f64..3.0) {
        let (g, f) = sample(32, gamma, seed);
        let h = corpus::smooth_field(&g, gamma, seed.wrapping_add(1));
        let d = DyadicDecomposition::new(&g);
        let whole = product(&f, &h).unwrap();
        let parts = d.paraproduct(&f, &h).unwrap()
            .add(&d.paraproduct(&h, &f).unwrap()).unwrap()
            .add(&d.remainder(&f, &h).unwrap()).unwrap();
        prop_assert!(whole.max_abs_diff(&parts).unwrap() <= 1e-10 * whole.max_abs().max(1e-300));
    }

    #[test]
    fn l2_equivalence(n in grid_size(), seed in any::<u64>(), gamma in 0.0f64..3.0) {
        let (g, f) = sample(n, gamma, seed);
        let d = DyadicDecomposition::new(&g);
        let b = d.besov_norm(&f, &BesovSpec::new(0.0, 2.0, 2.0).unwrap()).unwrap();
        let l2 = f.l2_norm();
        prop_assert!(b >= l2 / 3f64.sqrt() && b <= l2 * 3f64.sqrt());
    }

    #[test]
    fn resolvent_round_trip(seed in any::<u64>(), period in 0.1f64..5.0, alpha in 0.5f64..1.5) {
        let (_, f) = sample(32, 1.0, seed);
        let u = resolvent_inverse(&f, period, alpha).unwrap();
        let back = resolvent_forward(&u, period, alpha).unwrap();
        prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn geometric_series_matches(seed in any::<u64>(), period in 0.5f64..5.0, alpha in 0.5f64..1.5) {
        let (g, f) = sample(16, 1.0, seed);
        let k = series_terms(&g, period, alpha).unwrap();
        let series = geometric_series(&f, period, alpha, k).unwrap();
        let closed = resolvent_inverse(&f, period, alpha).unwrap();
        prop_assert!(series.max_abs_diff(&closed).unwrap() <= 1e-11 * closed.max_abs());
    }

    #[test]
    fn linear_solution_is_periodic(seed in any::<u64>(), phase in 0.0f64..6.0, alpha in 0.7f64..1.0) {
        let (g, f) = sample(16, 2.0, seed);
        let forcing = PeriodicForcing::new(1.0, f, Temporal::Cosine { phase }, 1.0).unwrap();
        let u0 = periodic_initial_datum(&forcing, alpha, 64).unwrap();
        let traj = linear_trajectory(&forcing, &u0, alpha, uniform_times(1.0, 8), 8).unwrap();
        prop_assert!(traj.last().max_abs_diff(traj.first()).unwrap() <= 1e-10 * u0.max_abs());
        let _ = g;
    }

    #[test]
    fn linear_solutions_drift_together(seed in any::<u64>(), periods in 1usize..4) {
        let (g, f) = sample(16, 2.0, seed);
        let alpha = 0.8;
        let forcing = PeriodicForcing::new(1.0, f, Temporal::Cosine { phase: 0.0 }, 1.0).unwrap();
        let a = corpus::smooth_field(&g, 1.0, seed.wrapping_add(3));
        let b = corpus::smooth_field(&g, 1.0, seed.wrapping_add(4));
        let end = periods as f64;
        let ua = linear_trajectory(&forcing, &a, alpha, vec![0.0, end], 16 * periods).unwrap();
        let ub = linear_trajectory(&forcing, &b, alpha, vec![0.0, end], 16 * periods).unwrap();
        let gap = ua.last().sub(ub.last()).unwrap().l2_norm();
        let bound = (-end * g.k_min().powf(alpha)).exp() * a.sub(&b).unwrap().l2_norm();
        prop_assert!(gap <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn integrating_factor_exact(seed in any::<u64>(), dt in 0.01f64..0.5, alpha in 0.5f64..1.5) {
        let (_, f) = sample(16, 1.0, seed);
        let cfg = StepperConfig::new(dt, 1).unwrap();
        let traj = solve_on_period(&f, 1.0, Problem::new(alpha), &cfg).unwrap();
        let exact = semigroup(&f, 1.0, alpha).unwrap();
        prop_assert!(traj.last().max_abs_diff(&exact).unwrap() <= 1e-12 * f.max_abs());
    }

    #[test]
    fn transport_is_skew(seed in any::<u64>(), gamma in 1.0f64..3.0) {
        // band-limited to the 2/3 box so the quadratic product is alias-free
        let (g, theta) = sample(32, gamma, seed);
        let theta = multiplier::dealias(&theta.forward().unwrap()).inverse();
        let stream = multiplier::dealias(&corpus::smooth_field(&g, gamma, seed.wrapping_add(9)).forward().unwrap()).inverse();
        let (u1, u2) = riesz_perp(&stream).unwrap();
        let t = nonlinear_term(&theta, (&u1, &u2)).unwrap();
        let scale = t.l2_norm() * theta.l2_norm();
        prop_assert!(t.inner(&theta).unwrap().abs() <= 1e-10 * scale.max(1e-300));
    }

    #[test]
    fn positivity_never_negative(seed in any::<u64>(), p in prop_oneof![Just(2.0f64), Just(4.0), Just(6.0)]) {
        let g = Grid::standard(64).unwrap();
        let d = DyadicDecomposition::new(&g);
        let samples: Vec<Field> = (0..4).map(|j| corpus::block_field(&d, j, seed.wrapping_add(j as u64))).collect();
        let r = probe_positivity(&samples, 0.8, p, &d).unwrap();
        prop_assert_eq!(r.hard_failures, 0);
    }

    #[test]
    fn probes_homogeneous_and_deterministic(seed in any::<u64>(), c in 0.01f64..100.0) {
        let g = Grid::standard(16).unwrap();
        let d = DyadicDecomposition::new(&g);
        let samples = reference_corpus(&d, seed);
        let pairs: Vec<(Field, Field)> = samples.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        let scaled: Vec<(Field, Field)> = pairs.iter().map(|(a, b)| (a.scaled(c), b.clone())).collect();
        let a = probe_bilinear(&pairs, 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        let b = probe_bilinear(&scaled, 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        for (x, y) in a.ratios.iter().zip(&b.ratios) {
            prop_assert!((x - y).abs() <= 1e-12 * x);
        }
        let again = probe_bilinear(&pairs, 0.25, 0.25, 4.0, 2.0, &d, 10.0).unwrap();
        prop_assert_eq!(a, again);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn fixed_point_relation_holds(seed in any::<u64>(), amplitude in 1e-3f64..1e-1) {
        use sqg_core::fixpoint::{iterate_once, IterationConfig, IterationState};
        let g = Grid::standard(16).unwrap();
        let d = DyadicDecomposition::new(&g);
        let spatial = corpus::smooth_field(&g, 2.0, seed);
        let forcing = PeriodicForcing::new(1.0, spatial, Temporal::Cosine { phase: 0.0 }, amplitude).unwrap();
        let mut cfg = IterationConfig::new(0.8, 4.0, 2.0, 4.0, 1.0).unwrap();
        cfg.stepper = StepperConfig::new(0.05, 1).unwrap();
        let mut state = IterationState::zero(&g, &cfg).unwrap();
        for _ in 0..3 {
            let (next, record) = iterate_once(&state, &forcing, &d, &cfg).unwrap();
            prop_assert!(record.fixed_point_residual <= 1e-11 * state.psi_t.max_abs().max(1e-300));
            state = next;
        }
    }

    #[test]
    fn cutoff_is_identity_past_the_range(n in grid_size(), seed in any::<u64>(), extra in 1i32..6) {
        let (g, f) = sample(n, 1.0, seed);
        let d = DyadicDecomposition::new(&g);
        let level = d.j_max() + 3 + extra;
        prop_assert!(d.low_pass_symbol(level).iter().skip(1).all(|w| *w == 1.0));
        prop_assert!(d.low_pass(&f, level).unwrap().max_abs_diff(&f).unwrap() <= 1e-13 * f.max_abs());
    }
}
