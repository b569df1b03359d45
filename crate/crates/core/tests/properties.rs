//! Property and oracle tests across modules.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stp_core::distributions::sphere_mu;
use stp_core::problems::{spectral_quadratic, suite_load};
use stp_core::profiles::{default_tau_grid, performance_ratios, profile_curve, Ratio, RunRecord};
use stp_core::solvers::{dds_step, rgf_step, step, stp_step};
use stp_core::{
    chain_quadratic, DirectionLaw, DirectionSampler, EvalCounter, IterationState, Problem,
    SampleContext, SolverConfig, StepContext, StepsizeSchedule,
};

fn uniform_point(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(-half_width..half_width))
        .collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|_| rng.sample(rand_distr::StandardNormal))
        .collect();
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / r).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in suite_load("all").unwrap() {
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let x = uniform_point(&mut rng, p.dim(), 2.0);
            let g = p.grad(&x).unwrap();
            let mut c = EvalCounter::new();
            let fd = p.finite_diff_grad(&x, 1e-6, &mut c).unwrap();
            let diff = g
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
            worst = worst.max(diff / scale);
        }
        assert!(worst <= 1e-4, "{}: relative error {worst:e}", p.name());
    }
}

#[test]
fn declared_lipschitz_constants_bound_gradient_variation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in suite_load("all").unwrap() {
        let Some(l) = p.lipschitz() else { continue };
        for _ in 0..1000 {
            let x = uniform_point(&mut rng, p.dim(), 2.0);
            let y = uniform_point(&mut rng, p.dim(), 2.0);
            let gx = p.grad(&x).unwrap();
            let gy = p.grad(&y).unwrap();
            let lhs = norm(&gx.iter().zip(&gy).map(|(a, b)| a - b).collect::<Vec<_>>());
            let rhs = (l + 1e-6) * norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(lhs <= rhs, "{}: {lhs} > {rhs}", p.name());
        }
    }
}

#[test]
fn chain_quadratic_matches_closed_form_minimizer() {
    for n in [1, 2, 3, 10, 25, 100] {
        let p = chain_quadratic(n).unwrap();
        // A x = e₁ for tridiag(−1, 2, −1) has xᵢ = (n + 1 − i)/(n + 1).
        let closed: Vec<f64> = (1..=n)
            .map(|i| (n + 1 - i) as f64 / (n + 1) as f64)
            .collect();
        for (a, b) in p.x_star().unwrap().iter().zip(&closed) {
            assert!((a - b).abs() < 1e-13);
        }
        let mut c = EvalCounter::new();
        let f = p.eval(p.x_star().unwrap(), &mut c).unwrap();
        assert!((f - p.f_star().unwrap()).abs() < 1e-10);
        let g = p.grad(p.x_star().unwrap()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn chain_quadratic_finite_differences_n10() {
    let p = chain_quadratic(10).unwrap();
    let g = p.grad(p.x0()).unwrap();
    let mut c = EvalCounter::new();
    let fd = p.finite_diff_grad(p.x0(), 1e-6, &mut c).unwrap();
    let err = norm(&g.iter().zip(&fd).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(&g);
    assert!(err <= 1e-4);
    assert_eq!(c.count(), 20);
}

#[test]
fn evaluations_respect_known_optimal_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in suite_load("all").unwrap() {
        let Some(fs) = p.f_star() else { continue };
        let mut c = EvalCounter::new();
        for _ in 0..200 {
            let x = uniform_point(&mut rng, p.dim(), 2.0);
            let f = p.eval(&x, &mut c).unwrap();
            assert!(f >= fs - 1e-9 * fs.abs().max(1.0), "{} below f*", p.name());
        }
        assert!(p.eval(p.x0(), &mut c).unwrap().is_finite());
    }
}

/// `E|s₁|` on the sphere by quadrature: with `s₁ = sin θ` the marginal density
/// is proportional to `cos^{n−2} θ` on `[−π/2, π/2]`.
fn sphere_abs_coordinate_quadrature(n: usize) -> f64 {
    let steps = 200_000;
    let h = std::f64::consts::FRAC_PI_2 / steps as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=steps {
        let th = i as f64 * h;
        let w = if i == 0 || i == steps {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let base = th.cos().powi(n as i32 - 2);
        num += w * th.sin() * base;
        den += w * base;
    }
    num / den
}

#[test]
fn sphere_constant_matches_quadrature() {
    for n in 2..=60 {
        let q = sphere_abs_coordinate_quadrature(n);
        assert!(
            (sphere_mu(n) / q - 1.0).abs() < 1e-9,
            "n={n}: {} vs {q}",
            sphere_mu(n)
        );
    }
}

#[test]
fn sphere_constant_in_two_dimensions_by_monte_carlo() {
    let s = DirectionSampler::sphere(2).unwrap();
    let mut ctx = SampleContext::from_seed(20);
    let e = s
        .mc_expected_abs_inner(&[1.0, 0.0], 10_000_000, &mut ctx)
        .unwrap();
    assert!(e.brackets(2.0 / std::f64::consts::PI, 4.0), "{e:?}");
}

#[test]
fn direction_law_monte_carlo_examples() {
    let mut ctx = SampleContext::from_seed(21);
    let e = DirectionSampler::coord_uniform(2)
        .unwrap()
        .mc_expected_abs_inner(&[1.0, 1.0], 1_000_000, &mut ctx)
        .unwrap();
    assert!(e.brackets(1.0, 4.0), "{e:?}");
    let e = DirectionSampler::gaussian(4)
        .unwrap()
        .mc_expected_abs_inner(&[1.0, 0.0, 0.0, 0.0], 1_000_000, &mut ctx)
        .unwrap();
    assert!(
        e.brackets((2.0 / (4.0 * std::f64::consts::PI)).sqrt(), 4.0),
        "{e:?}"
    );
    let e = DirectionSampler::sphere(3)
        .unwrap()
        .mc_expected_abs_inner(&[1.0, 0.0, 0.0], 1_000_000, &mut ctx)
        .unwrap();
    assert!(e.brackets(0.5, 4.0), "{e:?}");
    let e = DirectionSampler::gaussian(5)
        .unwrap()
        .gamma_check(1_000_000, &mut ctx)
        .unwrap();
    assert!(e.brackets(1.0, 4.0), "{e:?}");
}

fn random_probabilities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|v| v / total).collect();
    let drift: f64 = 1.0 - p.iter().sum::<f64>();
    p[0] += drift;
    p
}

fn random_orthonormal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    m.qr().q()
}

fn all_random_laws(rng: &mut ChaCha8Rng, n: usize) -> Vec<DirectionSampler> {
    vec![
        DirectionSampler::sphere(n).unwrap(),
        DirectionSampler::gaussian(n).unwrap(),
        DirectionSampler::coord_uniform(n).unwrap(),
        DirectionSampler::coord_weighted(random_probabilities(rng, n)).unwrap(),
        DirectionSampler::ortho_basis(random_orthonormal(rng, n), random_probabilities(rng, n))
            .unwrap(),
    ]
}

#[test]
fn expected_inner_product_meets_the_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut ctx = SampleContext::from_seed(23);
    for n in [2, 10, 50] {
        for law in all_random_laws(&mut rng, n) {
            let mu = law.theoretical_mu().unwrap();
            for _ in 0..20 {
                let g = unit_vector(&mut rng, n);
                let bound = mu * law.d_norm(&g).unwrap();
                let e = law.mc_expected_abs_inner(&g, 20_000, &mut ctx).unwrap();
                assert!(e.mean + 4.0 * e.stderr >= bound, "{} n={n}", law.name());
                // Every built-in law attains the bound with equality.
                assert!(
                    e.brackets(bound, 4.0),
                    "{} n={n}: {e:?} vs {bound}",
                    law.name()
                );
            }
            let gamma = law.gamma_check(2_000, &mut ctx).unwrap();
            assert!(
                gamma.brackets(1.0, 4.0) || (gamma.mean - 1.0).abs() < 1e-12,
                "{}",
                law.name()
            );
        }
    }
}

#[test]
fn rotation_invariance_of_isotropic_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for law in [
        DirectionSampler::sphere(6).unwrap(),
        DirectionSampler::gaussian(6).unwrap(),
    ] {
        for _ in 0..5 {
            let g: Vec<f64> = uniform_point(&mut rng, 6, 2.0);
            let q = random_orthonormal(&mut rng, 6);
            let rotated: Vec<f64> = (&q * nalgebra::DVector::from_column_slice(&g))
                .as_slice()
                .to_vec();
            let a = law
                .mc_expected_abs_inner(&g, 200_000, &mut SampleContext::from_seed(rng.random()))
                .unwrap();
            let b = law
                .mc_expected_abs_inner(
                    &rotated,
                    200_000,
                    &mut SampleContext::from_seed(rng.random()),
                )
                .unwrap();
            let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            assert!((a.mean - b.mean).abs() <= 4.0 * combined, "{}", law.name());
        }
    }
}

#[test]
fn averaging_tau_sphere_directions_divides_second_moment() {
    let s = DirectionSampler::sphere(20).unwrap();
    for tau in [4, 16] {
        let e = s
            .averaged_second_moment(tau, 100_000, &mut SampleContext::from_seed(tau as u64))
            .unwrap();
        assert!(e.brackets(1.0 / tau as f64, 4.0), "tau={tau}: {e:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mc_estimate_is_absolutely_homogeneous(seed in any::<u64>(), exp in -4i32..4, negate in any::<bool>(), law_idx in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let law = all_random_laws(&mut rng, 5).swap_remove(law_idx);
        let g = uniform_point(&mut rng, 5, 2.0);
        let c = if negate { -(exp as f64).exp2() } else { (exp as f64).exp2() };
        let scaled: Vec<f64> = g.iter().map(|v| c * v).collect();
        let a = law.mc_expected_abs_inner(&g, 500, &mut SampleContext::from_seed(seed)).unwrap();
        let b = law.mc_expected_abs_inner(&scaled, 500, &mut SampleContext::from_seed(seed)).unwrap();
        prop_assert_eq!(b.mean, c.abs() * a.mean);
        prop_assert_eq!(b.stderr, c.abs() * a.stderr);
    }

    #[test]
    fn induced_norms_are_norms(seed in any::<u64>(), c in -5.0f64..5.0, law_idx in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let law = all_random_laws(&mut rng, 4).swap_remove(law_idx);
        let g = uniform_point(&mut rng, 4, 3.0);
        let h = uniform_point(&mut rng, 4, 3.0);
        let ng = law.d_norm(&g).unwrap();
        prop_assert!(ng > 0.0);
        prop_assert_eq!(law.d_norm(&[0.0; 4]).unwrap(), 0.0);
        let scaled: Vec<f64> = g.iter().map(|v| c * v).collect();
        prop_assert!((law.d_norm(&scaled).unwrap() - c.abs() * ng).abs() <= 1e-12 * ng.max(1.0));
        let sum: Vec<f64> = g.iter().zip(&h).map(|(a, b)| a + b).collect();
        prop_assert!(law.d_norm(&sum).unwrap() <= ng + law.d_norm(&h).unwrap() + 1e-12);
    }

    #[test]
    fn eval_charges_one_and_grad_charges_nothing(seed in any::<u64>(), idx in 0usize..17) {
        let problems = suite_load("all").unwrap();
        let p = &problems[idx % problems.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = uniform_point(&mut rng, p.dim(), 2.0);
        let mut c = EvalCounter::new();
        let before = c.count();
        p.eval(&x, &mut c).unwrap();
        prop_assert_eq!(c.count(), before + 1);
        p.grad(&x).unwrap();
        prop_assert_eq!(c.count(), before + 1);
    }

    #[test]
    fn stepsizes_are_nonnegative_and_finite(k in 0u64..1_000_000, gap in 0.0f64..1e6, alpha0 in 1e-6f64..1e3) {
        let schedules = [
            StepsizeSchedule::Fixed { alpha: alpha0 },
            StepsizeSchedule::InvSqrt { alpha0 },
            StepsizeSchedule::GapLinear { alpha0, f_star: -1.0 },
            StepsizeSchedule::GapSqrt { theta: 1.0, mu: 0.1, lipschitz: 4.0, lambda: 0.01, f_star: -1.0 },
        ];
        for s in &schedules {
            let mut probe = |_: &[f64]| -> stp_core::Result<f64> { unreachable!() };
            let mut ctx = StepContext { k, f_x: gap - 1.0, x: &[0.0], s: &[1.0], probe: &mut probe };
            let a = s.alpha(&mut ctx).unwrap();
            prop_assert!(a >= 0.0 && a.is_finite());
        }
    }

    #[test]
    fn monotone_methods_never_increase_f(seed in any::<u64>(), pidx in 0usize..3, midx in 0usize..4) {
        let problems = suite_load("smoke").unwrap();
        let p = &problems[pidx];
        let n = p.dim();
        let cfg = match midx {
            0 => SolverConfig::stp(DirectionSampler::sphere(n).unwrap(), StepsizeSchedule::InvSqrt { alpha0: 1.0 }),
            1 => SolverConfig::pstp(4, DirectionSampler::gaussian(n).unwrap(), StepsizeSchedule::Fixed { alpha: 0.3 }),
            2 => SolverConfig::stp(DirectionSampler::coord_uniform(n).unwrap(), StepsizeSchedule::InvSqrt { alpha0: 2.0 }),
            _ => SolverConfig::dds(1.0),
        };
        let mut ctx = SampleContext::from_seed(seed);
        let mut c = EvalCounter::new();
        let mut st = IterationState::initial(p, &cfg, &mut c).unwrap();
        for _ in 0..200 {
            let next = step(p, &st, &cfg, &mut ctx, &mut c).unwrap();
            prop_assert!(next.f_x <= st.f_x);
            st = next;
        }
    }

    #[test]
    fn rescaling_costs_leaves_ratios_unchanged(
        costs in proptest::collection::vec(proptest::option::weighted(0.8, 1.0f64..1e5), 12),
        exp in -10i32..10,
    ) {
        let solvers = ["a", "b", "c"];
        let make = |scale: f64| -> Vec<RunRecord> {
            costs.iter().enumerate().map(|(i, t)| RunRecord {
                problem: format!("p{}", i / 3),
                solver: solvers[i % 3].to_string(),
                mean_evals_to_target: t.map(|v| v * scale),
                n_replicates: 1,
            }).collect()
        };
        let base = performance_ratios(&make(1.0)).unwrap();
        let scaled = performance_ratios(&make((exp as f64).exp2())).unwrap();
        prop_assert_eq!(&base, &scaled);

        for (p, row) in base.cells.iter().enumerate() {
            if row.iter().any(|r| matches!(r, Ratio::Finite(_))) {
                prop_assert!(row.contains(&Ratio::Finite(1.0)), "problem {p} has no winner");
            }
        }
        let grid = default_tau_grid();
        for s in solvers {
            let curve = profile_curve(&base, s, &grid).unwrap();
            prop_assert!(curve.points.windows(2).all(|w| w[1].1 >= w[0].1));
            prop_assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.1)));
        }
    }
}

#[test]
fn evaluation_accounting_per_iteration() {
    let p = chain_quadratic(7).unwrap();
    let n = p.dim();
    let l = p.lipschitz().unwrap();
    let cases = [
        (
            SolverConfig::stp(
                DirectionSampler::sphere(n).unwrap(),
                StepsizeSchedule::InvSqrt { alpha0: 1.0 },
            ),
            2,
        ),
        (
            SolverConfig::stp(
                DirectionSampler::sphere(n).unwrap(),
                StepsizeSchedule::SolutionFree {
                    lipschitz: l,
                    t: 1e-4,
                },
            ),
            3,
        ),
        (
            SolverConfig::pstp(
                3,
                DirectionSampler::sphere(n).unwrap(),
                StepsizeSchedule::Fixed { alpha: 0.1 },
            ),
            2,
        ),
        (
            SolverConfig::rgf(1e-4, 0.05, DirectionSampler::sphere(n).unwrap()),
            2,
        ),
    ];
    for (cfg, per_iter) in cases {
        let mut ctx = SampleContext::from_seed(5);
        let mut c = EvalCounter::new();
        let mut st = IterationState::initial(&p, &cfg, &mut c).unwrap();
        for _ in 0..100 {
            let before = c.count();
            st = match cfg.method {
                stp_core::Method::Rgf { .. } => rgf_step(&p, &st, &cfg, &mut ctx, &mut c).unwrap(),
                _ => step(&p, &st, &cfg, &mut ctx, &mut c).unwrap(),
            };
            assert_eq!(c.count() - before, per_iter);
        }
    }
    let cfg = SolverConfig::dds(1.0);
    let mut c = EvalCounter::new();
    let mut st = IterationState::initial(&p, &cfg, &mut c).unwrap();
    for _ in 0..100 {
        let before = c.count();
        st = dds_step(&p, &st, &cfg, &mut c).unwrap();
        let used = c.count() - before;
        assert!((1..=2 * n as u64).contains(&used));
    }
}

#[test]
fn stp_improves_chain_quadratic() {
    let p = chain_quadratic(10).unwrap();
    let cfg = SolverConfig::stp(
        DirectionSampler::sphere(10).unwrap(),
        StepsizeSchedule::InvSqrt { alpha0: 1.0 },
    );
    for seed in 0..5 {
        let mut ctx = SampleContext::from_seed(seed);
        let mut c = EvalCounter::new();
        let mut st = IterationState::initial(&p, &cfg, &mut c).unwrap();
        let f0 = st.f_x;
        for _ in 0..10_000 {
            st = stp_step(&p, &st, &cfg, &mut ctx, &mut c).unwrap();
        }
        assert!(st.f_x < f0);
    }
}

/// With `s = ∇f/‖∇f‖` and `0 < α < 2⟨∇f, s⟩/(L‖s‖²)`, `x − αs` always beats
/// `x + αs`, so STP takes the normalized gradient step whenever it moves.
#[test]
fn ngd_oracle_never_moves_uphill() {
    let p = spectral_quadratic(8, 0.5, 3.0, 9).unwrap();
    let l = p.lipschitz().unwrap();
    let sampler = DirectionSampler::new(DirectionLaw::OracleNgd, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let x = uniform_point(&mut rng, 8, 5.0);
        let g = p.grad(&x).unwrap();
        let s = sampler
            .sample(&mut SampleContext::from_seed(0), Some(&g))
            .unwrap();
        let slope = dot(&g, &s);
        assert!(slope > 0.0);
        let alpha = rng.random_range(0.0..1.0) * 2.0 * slope / (l * dot(&s, &s));
        let mut c = EvalCounter::new();
        let f_x = p.eval(&x, &mut c).unwrap();
        let st = IterationState {
            x: x.clone(),
            f_x,
            k: 0,
            dds_alpha: 0.0,
            alpha: 0.0,
        };
        let next = stp_core::three_point_step(&p, &st, &s, alpha, &mut c).unwrap();
        let plus: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + alpha * b).collect();
        assert_ne!(next.x, plus);
    }
}

#[test]
fn runs_are_reproducible() {
    let p = chain_quadratic(25).unwrap();
    let cfg = SolverConfig::pstp(
        4,
        DirectionSampler::sphere(25).unwrap(),
        StepsizeSchedule::InvSqrt { alpha0: 1.0 },
    );
    let stop = stp_core::StoppingRule::new(1e-3, p.f_star()).with_max_evals(20_000);
    let a = stp_core::run(&p, &cfg, &stop, 99).unwrap();
    let b = stp_core::run(&p, &cfg, &stop, 99).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    let c = stp_core::run(&p, &cfg, &stop, 100).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn custom_problems_share_the_contract() {
    let p = Problem::from_fn("shifted", vec![0.0, 0.0], |x| {
        (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2)
    })
    .unwrap()
    .with_f_star(0.0);
    let cfg = SolverConfig::dds(0.5);
    let t = stp_core::run(&p, &cfg, &stp_core::StoppingRule::new(1e-5, p.f_star()), 0).unwrap();
    assert_eq!(t.status, stp_core::Status::TargetReached);
    assert!(t.records.windows(2).all(|w| w[1].evals > w[0].evals));
}
