use nehari_sp::coulomb::coulomb_energy;
use nehari_sp::field::{h1_norm_sq, inner_product, lp_integral};
use nehari_sp::functional::{coercivity_gap, energy, nehari_project, nehari_scalar, residual};
use nehari_sp::radial::RadialProblem;
use nehari_sp::{
    EnergyBreakdown, Error, Field3, Frozen, Functional, Grid3, PotentialSet, RadialField, RadialGrid, SolverConfig,
    Solver,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r2(p: [f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

fn competing() -> PotentialSet {
    PotentialSet::constants(1.0, &[(-0.5, 4.2), (2.0, 4.6)], 2, 0.1).unwrap()
}

fn smooth_random(grid: Grid3, rng: &mut ChaCha8Rng, n_bumps: usize) -> Field3 {
    let bumps: Vec<(f64, f64, [f64; 3])> = (0..n_bumps)
        .map(|_| {
            let c = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
            (rng.random_range(0.2..1.0), rng.random_range(0.6..1.4), c)
        })
        .collect();
    Field3::from_fn(grid, |p| {
        bumps
            .iter()
            .map(|&(a, w, c)| a * (-r2([p[0] - c[0], p[1] - c[1], p[2] - c[2]]) / (w * w)).exp())
            .sum()
    })
    .unwrap()
}

#[test]
fn zero_field_has_zero_energy_and_residual() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let z = Field3::zeros(grid);
    let e = energy(&z, &competing(), 1.0).unwrap();
    assert_eq!(e.total, 0.0);
    assert_eq!(e.quadratic, 0.0);
    assert!(residual(&z, &competing(), 1.0).unwrap().values().iter().all(|&v| v == 0.0));
    assert!(matches!(nehari_scalar(&z, &competing(), 1.0, 1.0), Err(Error::ZeroField)));
    assert!(matches!(nehari_project(&z, &competing(), 1.0), Err(Error::ZeroField)));
}

#[test]
fn breakdown_total_is_sum_of_parts() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let u = Field3::from_fn(grid, |p| (-r2(p) / 2.0).exp()).unwrap();
    let e = energy(&u, &competing(), 1.0).unwrap();
    let sum = e.quadratic + e.poisson + e.subcritical.iter().sum::<f64>() + e.critical;
    assert!((e.total - sum).abs() <= 1e-12 * e.total.abs().max(1.0));
}

#[test]
fn grid_energy_matches_radial_evaluation() {
    let p = PotentialSet::constants(1.0, &[(3.0, 4.2)], 1, 0.1).unwrap();
    let grid = Grid3::new(64, 8.0).unwrap();
    let u = Field3::from_fn(grid, |p| 0.8 * (-r2(p) / 2.0).exp()).unwrap();
    let e3 = energy(&u, &p, 1.0).unwrap();
    let rgrid = RadialGrid::new(6000, 60.0).unwrap();
    let problem = RadialProblem::new(&Frozen::new(1.0, vec![3.0], vec![4.2], 0, 0.1, 1.0), rgrid).unwrap();
    let ur = RadialField::from_fn(rgrid, |r| 0.8 * (-r * r / 2.0).exp()).unwrap();
    let er = EnergyBreakdown::from_coefficients(&problem.coefficients_of(&ur));
    assert!((e3.total - er.total).abs() < 1e-3 * er.total.abs(), "{} vs {}", e3.total, er.total);
}

#[test]
fn terms_scale_with_their_degree() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let p = competing();
    let u = Field3::from_fn(grid, |p| (-r2(p) / 2.0).exp()).unwrap();
    let e = energy(&u, &p, 1.0).unwrap();
    for t in [0.5, 1.7] {
        let et = energy(&u.scaled(t), &p, 1.0).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-300);
        assert!(close(et.quadratic, t.powi(2) * e.quadratic));
        assert!(close(et.poisson, t.powi(4) * e.poisson));
        assert!(close(et.subcritical[0], t.powf(4.2) * e.subcritical[0]));
        assert!(close(et.subcritical[1], t.powf(4.6) * e.subcritical[1]));
        assert!(close(et.critical, t.powi(6) * e.critical));
    }
}

#[test]
fn residual_matches_energy_differences() {
    let grid = Grid3::new(32, 5.0).unwrap();
    let f = Functional::for_problem(&competing(), &grid, 1.0, [0.0; 3]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u = smooth_random(grid, &mut rng, 3);
    let r = f.residual(&u).unwrap();
    let tau = 1e-4;
    for _ in 0..20 {
        let w = smooth_random(grid, &mut rng, 2);
        let shift = |s: f64| {
            Field3::new(grid, u.values().iter().zip(w.values()).map(|(a, b)| a + s * b).collect()).unwrap()
        };
        let fd = (f.energy(&shift(tau)).unwrap().total - f.energy(&shift(-tau)).unwrap().total) / (2.0 * tau);
        let pairing = inner_product(&r, &w).unwrap();
        assert!((pairing - fd).abs() <= 1e-6 * pairing.abs().max(fd.abs()), "{pairing} vs {fd}");
    }
}

#[test]
fn nehari_scalar_signs_and_monotonicity() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let p = competing();
    let u = Field3::from_fn(grid, |p| (-r2(p) / 2.0).exp()).unwrap();
    let a = h1_norm_sq(&u, &Field3::constant(grid, 1.0)).unwrap();
    assert!((nehari_scalar(&u, &p, 1.0, 0.0).unwrap() + a).abs() < 1e-12 * a);
    assert!(nehari_scalar(&u, &p, 1.0, 1e3).unwrap() > 0.0);
    // Monotone wherever f(t) = scalar + A is positive.
    let mut prev: Option<f64> = None;
    for i in 1..=400 {
        let t = 0.02 * i as f64;
        let s = nehari_scalar(&u, &p, 1.0, t).unwrap();
        if s + a > 0.0 {
            if let Some(q) = prev {
                assert!(s > q, "t={t}");
            }
            prev = Some(s);
        } else {
            prev = None;
        }
    }
}

#[test]
fn projection_is_a_fixed_point_and_ray_invariant() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let p = competing();
    let u = Field3::from_fn(grid, |p| 0.3 * (-r2([p[0] - 0.2, p[1], p[2]]) / 2.0).exp()).unwrap();
    let np = nehari_project(&u, &p, 1.0).unwrap();
    assert!(np.nehari_residual <= 1e-10);
    let on = u.scaled(np.t);
    assert!((nehari_project(&on, &p, 1.0).unwrap().t - 1.0).abs() < 1e-8);
    for lambda in [0.5, 2.0] {
        let tl = nehari_project(&u.scaled(lambda), &p, 1.0).unwrap().t;
        assert!((lambda * tl - np.t).abs() < 1e-10 * np.t);
    }
}

/// Root of `-t²B + t^{q-2}C + t⁴D - A` by bisection, from independently
/// computed integrals.
fn scalar_root(a: f64, b: f64, c: f64, d: f64, q: f64) -> f64 {
    let g = |t: f64| -t * t * b + t.powf(q - 2.0) * c + t.powi(4) * d - a;
    let (mut lo, mut hi) = (1e-6, 1.0);
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn single_term_projection_matches_scalar_oracle() {
    let q = 4.4;
    let p = PotentialSet::constants(1.0, &[(1.0, q)], 1, 1.0).unwrap();
    let grid = Grid3::new(32, 6.0).unwrap();
    let u = Field3::from_fn(grid, |p| 0.5 * (-r2(p) / 3.0).exp() * (1.0 + 0.2 * p[0])).unwrap();
    let a = h1_norm_sq(&u, &Field3::constant(grid, 1.0)).unwrap();
    let b = coulomb_energy(&u, None).unwrap();
    let c = lp_integral(&u, q).unwrap();
    let d = lp_integral(&u, 6.0).unwrap();
    let oracle = scalar_root(a, b, c, d, q);
    let t = nehari_project(&u, &p, 1.0).unwrap().t;
    assert!((t - oracle).abs() < 1e-10 * oracle, "{t} vs {oracle}");
}

#[test]
fn coercivity_gap_is_nonnegative_near_ground_state() {
    // Resolvable at this grid; the weaker competing set above is too wide.
    let p = PotentialSet::constants(1.0, &[(-1.0, 4.1), (30.0, 4.2)], 2, 0.1).unwrap();
    let grid = Grid3::new(64, 6.0).unwrap();
    let solver = Solver::new(&p, grid, 1.0).unwrap();
    let gs = solver.minimize(&solver.seed([0.0; 3], 1.0), &SolverConfig::default()).unwrap();
    assert!(gs.converged, "{} {}", gs.el_residual, gs.iterations);
    let norm = gs.breakdown.quadratic * 2.0;
    assert!(coercivity_gap(&gs.u, &p, 1.0).unwrap() >= -1e-8 * norm);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let w = smooth_random(grid, &mut rng, 2);
        let perturbed =
            Field3::new(grid, gs.u.values().iter().zip(w.values()).map(|(a, b)| a + 0.1 * b).collect()).unwrap();
        let t = nehari_project(&perturbed, &p, 1.0).unwrap().t;
        let on = perturbed.scaled(t);
        let norm = h1_norm_sq(&on, &Field3::constant(grid, 1.0)).unwrap();
        assert!(coercivity_gap(&on, &p, 1.0).unwrap() >= -1e-8 * norm);
    }
}

#[test]
fn single_term_gap_is_a_sum_of_nonnegative_terms() {
    let q = 4.4;
    let p = PotentialSet::constants(1.0, &[(1.0, q)], 1, 1.0).unwrap();
    let grid = Grid3::new(16, 4.0).unwrap();
    let u = Field3::from_fn(grid, |p| 0.4 * (-r2(p) / 2.0).exp()).unwrap();
    let on = u.scaled(nehari_project(&u, &p, 1.0).unwrap().t);
    let e = energy(&on, &p, 1.0).unwrap();
    // On the manifold: gap = B(1/4 - 1/q) + D(1/q - 1/6), with B, D the Poisson
    // and critical integrals.
    let b = 4.0 * e.poisson;
    let d = -6.0 * e.critical;
    let poisson_part = b * (0.25 - 1.0 / q);
    let critical_part = d * (1.0 / q - 1.0 / 6.0);
    assert!(poisson_part >= 0.0 && critical_part >= 0.0);
    let gap = coercivity_gap(&on, &p, 1.0).unwrap();
    assert!((gap - poisson_part - critical_part).abs() < 1e-8 * (2.0 * e.quadratic));
}

#[test]
fn off_manifold_field_is_rejected_by_gap() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let u = Field3::from_fn(grid, |p| 0.1 * (-r2(p) / 2.0).exp()).unwrap();
    assert!(coercivity_gap(&u, &competing(), 1.0).is_err());
}

fn field16() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16 * 16 * 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn newton_and_bisection_agree(v in field16(), scale in 0.05f64..5.0) {
        let grid = Grid3::new(16, 2.0).unwrap();
        let u = Field3::new(grid, v.iter().map(|x| scale * x).collect()).unwrap();
        let f = Functional::for_problem(&competing(), &grid, 1.0, [0.0; 3]).unwrap();
        let c = f.evaluate(&u).unwrap().coefficients;
        let newton = c.project().unwrap();
        let bisect = c.project_bisection().unwrap();
        prop_assert!((newton.t - bisect.t).abs() <= 1e-10 * bisect.t);
        prop_assert!(newton.nehari_residual <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ray_energy_peaks_at_projection(v in field16(), scale in 0.05f64..5.0) {
        let grid = Grid3::new(16, 2.0).unwrap();
        let u = Field3::new(grid, v.iter().map(|x| scale * x).collect()).unwrap();
        let f = Functional::for_problem(&competing(), &grid, 1.0, [0.0; 3]).unwrap();
        let t = f.project(&u).unwrap().t;
        // Dense grid on [0, 3t]; the best sample lies within one cell of t.
        let samples = 300;
        let dt = 3.0 * t / samples as f64;
        let best = (1..=samples)
            .map(|i| i as f64 * dt)
            .max_by(|a, b| {
                let ea = f.energy(&u.scaled(*a)).unwrap().total;
                let eb = f.energy(&u.scaled(*b)).unwrap().total;
                ea.total_cmp(&eb)
            })
            .unwrap();
        prop_assert!((best - t).abs() <= dt, "{} vs {}", best, t);
    }
}
