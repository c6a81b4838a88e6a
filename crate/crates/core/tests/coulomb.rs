use nehari_sp::coulomb::{coulomb_bound_check, coulomb_energy, coulomb_potential, radial_coulomb, CoulombKernel};
use nehari_sp::field::lp_norm;
use nehari_sp::semiclassics::sobolev_constant;
use nehari_sp::{Error, Field3, Grid3, RadialField, RadialGrid};
use proptest::prelude::*;
use std::f64::consts::PI;

fn r2(p: [f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

/// Newtonian potential of `e^{-|x|²}`.
fn gaussian_potential(r: f64) -> f64 {
    if r == 0.0 {
        2.0 * PI
    } else {
        PI.powf(1.5) * libm::erf(r) / r
    }
}

/// Composite Simpson on `[0, b]`.
fn simpson(f: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut s = f(0.0) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

fn half_gaussian(grid: Grid3) -> Field3 {
    Field3::from_fn(grid, |p| (-r2(p) / 2.0).exp()).unwrap()
}

/// Sum of a few Gaussians with seeded centers, widths and amplitudes.
fn bumps(grid: Grid3, params: &[(f64, f64, f64, f64, f64)]) -> Field3 {
    Field3::from_fn(grid, |p| {
        params
            .iter()
            .map(|&(a, w, cx, cy, cz)| a * (-r2([p[0] - cx, p[1] - cy, p[2] - cz]) / (w * w)).exp())
            .sum()
    })
    .unwrap()
}

#[test]
fn gaussian_potential_oracle() {
    let grid = Grid3::new(64, 12.0).unwrap();
    let phi = coulomb_potential(&half_gaussian(grid), None).unwrap();
    let mut worst: f64 = 0.0;
    for (p, v) in grid.points().zip(phi.values()) {
        let r = r2(p).sqrt();
        if r < 6.0 {
            let exact = gaussian_potential(r);
            worst = worst.max((v - exact).abs() / exact);
        }
    }
    assert!(worst < 1e-3, "{worst:e}");
}

#[test]
fn gaussian_energy_matches_radial_quadrature() {
    let oracle = simpson(|r| gaussian_potential(r) * (-r * r).exp() * 4.0 * PI * r * r, 12.0, 4000);
    let grid = Grid3::new(64, 12.0).unwrap();
    let e = coulomb_energy(&half_gaussian(grid), None).unwrap();
    assert!((e - oracle).abs() < 1e-3 * oracle, "{e} vs {oracle}");
}

#[test]
fn zero_field_has_zero_potential() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let z = Field3::zeros(grid);
    assert!(coulomb_potential(&z, None).unwrap().values().iter().all(|&v| v == 0.0));
    assert_eq!(coulomb_energy(&z, None).unwrap(), 0.0);
    assert!(matches!(coulomb_bound_check(&z), Err(Error::ZeroField)));
}

#[test]
fn potential_and_energy_scale() {
    let grid = Grid3::new(32, 6.0).unwrap();
    let u = bumps(grid, &[(1.0, 1.0, 0.5, 0.0, 0.0), (0.6, 0.7, -1.0, 0.4, 0.2)]);
    let k = CoulombKernel::new(grid);
    let phi = k.potential(&u, None).unwrap();
    let e = k.energy(&u, None).unwrap();
    for t in [0.5, 2.0, 3.0] {
        let phi_t = k.potential(&u.scaled(t), None).unwrap();
        for (a, b) in phi_t.values().iter().zip(phi.values()) {
            assert!((a - t * t * b).abs() <= 1e-12 * (1.0 + t * t * b.abs()));
        }
        let e_t = k.energy(&u.scaled(t), None).unwrap();
        assert!((e_t - t.powi(4) * e).abs() <= 1e-12 * t.powi(4) * e);
    }
}

#[test]
fn potential_decays_toward_corners() {
    let grid = Grid3::new(32, 6.0).unwrap();
    let phi = coulomb_potential(&half_gaussian(grid), None).unwrap();
    let center = phi.values()[grid.nearest([0.0; 3])];
    let corner = phi.values()[grid.index(0, 0, 0)];
    assert!(corner < 0.15 * center, "{corner} {center}");
}

#[test]
fn bound_holds_for_gaussian_and_bumps() {
    let grid = Grid3::new(32, 6.0).unwrap();
    let (l, r) = coulomb_bound_check(&half_gaussian(grid)).unwrap();
    assert!(l < r, "{l} {r}");
    let u = bumps(grid, &[(1.0, 0.8, 1.0, 0.0, 0.0), (-0.7, 1.2, -1.0, 1.0, 0.0), (0.4, 0.5, 0.0, -1.5, 1.0)]);
    let (l, r) = coulomb_bound_check(&u).unwrap();
    assert!(l < r, "{l} {r}");
    for t in [0.5, 2.0] {
        let (lt, rt) = coulomb_bound_check(&u.scaled(t)).unwrap();
        assert!((lt - t * t * l).abs() < 1e-12 * lt);
        assert!((rt - t * t * r).abs() < 1e-12 * rt);
        assert!((lt / rt - l / r).abs() < 1e-12);
    }
}

#[test]
fn radial_far_field_follows_total_mass() {
    let grid = RadialGrid::new(8000, 60.0).unwrap();
    // Smooth indicator of the ball of radius 2.
    let bump = |r: f64| 0.5 * (1.0 - ((r - 2.0) / 0.3).tanh());
    let u = RadialField::from_fn(grid, |r| bump(r).sqrt()).unwrap();
    let phi = radial_coulomb(&u);
    let mass = simpson(|r| 4.0 * PI * r * r * bump(r), 20.0, 20000);
    let j = grid.n_r() - 1;
    let far = grid.r(j) * phi.values()[j];
    assert!((far - mass).abs() < 1e-4 * mass, "{far} vs {mass}");
    let tail = &phi.values()[grid.n_r() / 4..];
    assert!(tail.windows(2).all(|w| w[1] < w[0]));
    let zero = radial_coulomb(&RadialField::from_fn(grid, |_| 0.0).unwrap());
    assert!(zero.values().iter().all(|&v| v == 0.0));
}

#[test]
fn radial_and_grid_potentials_agree_on_a_ray() {
    let rgrid = RadialGrid::new(4000, 60.0).unwrap();
    let radial = radial_coulomb(&RadialField::from_fn(rgrid, |r| (-r * r / 2.0).exp()).unwrap());
    let grid = Grid3::new(64, 12.0).unwrap();
    let phi = coulomb_potential(&half_gaussian(grid), None).unwrap();
    let mid = grid.n() / 2;
    for ix in mid..mid + 24 {
        let x = grid.coord(ix);
        let v = phi.values()[grid.index(ix, mid, mid)];
        let w = radial.eval(x.abs());
        assert!((v - w).abs() < 1e-3 * w, "x={x}: {v} vs {w}");
    }
}

#[test]
fn unit_weight_matches_unweighted_path_exactly() {
    let grid = Grid3::new(16, 4.0).unwrap();
    let u = bumps(grid, &[(1.0, 1.0, 0.3, 0.0, -0.2)]);
    let one = Field3::constant(grid, 1.0);
    let k = CoulombKernel::new(grid);
    assert_eq!(k.potential(&u, Some(&one)).unwrap(), k.potential(&u, None).unwrap());
    assert_eq!(k.energy(&u, Some(&one)).unwrap().to_bits(), k.energy(&u, None).unwrap().to_bits());
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = Field3::zeros(Grid3::new(16, 4.0).unwrap());
    let b = Field3::zeros(Grid3::new(16, 5.0).unwrap());
    assert!(matches!(coulomb_potential(&a, Some(&b)), Err(Error::GridMismatch)));
}

fn field16() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 16 * 16 * 16)
}

fn bump_params() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, 0.5f64..1.5, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn potential_is_nonnegative(v in field16()) {
        let grid = Grid3::new(16, 4.0).unwrap();
        let phi = coulomb_potential(&Field3::new(grid, v).unwrap(), None).unwrap();
        prop_assert!(phi.min() >= 0.0);
    }

    #[test]
    fn bilinear_form_is_symmetric(a in field16(), b in field16()) {
        let grid = Grid3::new(16, 4.0).unwrap();
        let f = Field3::new(grid, a.iter().map(|x| x * x).collect()).unwrap();
        let g = Field3::new(grid, b.iter().map(|x| x * x).collect()).unwrap();
        let k = CoulombKernel::new(grid);
        let (fg, gf) = (k.bilinear(&f, &g).unwrap(), k.bilinear(&g, &f).unwrap());
        prop_assert!((fg - gf).abs() <= 1e-10 * fg.abs().max(gf.abs()));
    }

    // ‖φ_u - φ_v‖_{D^{1,2}} <= S^{-1/2} |u² - v²|_{6/5}
    //                        <= S^{-1/2} (|u|_{12/5} + |v|_{12/5}) |u - v|_{12/5}.
    #[test]
    fn quadratic_map_is_locally_lipschitz(pu in bump_params(), pd in bump_params(), delta in 1e-3f64..0.3) {
        let grid = Grid3::new(32, 6.0).unwrap();
        let u = bumps(grid, &pu);
        let d = bumps(grid, &pd);
        prop_assume!(!u.is_zero() && !d.is_zero());
        let v = Field3::new(grid, u.values().iter().zip(d.values()).map(|(a, b)| a + delta * b).collect()).unwrap();
        let diff = Field3::new(grid, u.values().iter().zip(v.values()).map(|(a, b)| a * a - b * b).collect()).unwrap();
        let lhs = (CoulombKernel::new(grid).bilinear(&diff, &diff).unwrap() / (4.0 * PI)).sqrt();
        let p = 12.0 / 5.0;
        let uv = Field3::new(grid, u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect()).unwrap();
        let rhs = sobolev_constant().powf(-0.5)
            * (lp_norm(&u, p).unwrap() + lp_norm(&v, p).unwrap())
            * lp_norm(&uv, p).unwrap();
        prop_assert!(lhs <= rhs, "{} > {}", lhs, rhs);
    }
}
