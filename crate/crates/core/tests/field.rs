use nehari_sp::field::{h1_norm_sq, inner_product, lp_norm};
use nehari_sp::io::{read_field_from, write_field_to, StoredField};
use nehari_sp::spectral::Spectral;
use nehari_sp::{Error, Field3, Grid3};
use proptest::prelude::*;
use std::f64::consts::PI;

fn r2(p: [f64; 3]) -> f64 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

fn gaussian(grid: Grid3, alpha: f64) -> Field3 {
    Field3::from_fn(grid, |p| (-alpha * r2(p)).exp()).unwrap()
}

#[test]
fn inner_product_of_zero_and_constants() {
    let g = Grid3::new(16, 3.0).unwrap();
    let zero = Field3::zeros(g);
    let b = gaussian(g, 1.0);
    assert_eq!(inner_product(&zero, &b).unwrap(), 0.0);
    let one = Field3::constant(g, 1.0);
    assert!((inner_product(&one, &one).unwrap() - g.volume()).abs() < 1e-12 * g.volume());
}

#[test]
fn gaussian_integral_and_refinement_order() {
    // ∫ e^{-|x|²} = π^{3/2}; each factor is e^{-|x|²/2}.
    let exact = PI.powf(1.5);
    let integral = |n: usize| {
        let g = Grid3::new(n, 8.0).unwrap();
        let a = gaussian(g, 0.5);
        inner_product(&a, &a).unwrap()
    };
    let (i16, i32, i64) = (integral(16), integral(32), integral(64));
    assert!((i64 - exact).abs() < 1e-6 * exact);
    let (e16, e32) = ((i16 - exact).abs(), (i32 - exact).abs());
    assert!((i32 - i16).abs() <= 1.01 * e16, "{e16:e}");
    // Order at least two, unless the fine grid is already at round-off.
    assert!(e32 <= e16 / 4.0 || e32 < 1e-12 * exact, "{e16:e} {e32:e}");
}

#[test]
fn h1_norm_of_single_mode() {
    let g = Grid3::new(32, 4.0).unwrap();
    let l = g.half_width();
    // sin(πx/L) is a Fourier mode of the 2L-periodic box.
    let u = Field3::from_fn(g, |p| (PI * p[0] / l).sin()).unwrap();
    let v = Field3::constant(g, 1.0);
    let l2 = inner_product(&u, &u).unwrap();
    let expected = (PI / l).powi(2) * l2 + l2;
    assert!((h1_norm_sq(&u, &v).unwrap() - expected).abs() < 1e-10 * expected);
    assert_eq!(h1_norm_sq(&Field3::zeros(g), &v).unwrap(), 0.0);
}

#[test]
fn l6_norm_of_gaussian() {
    let g = Grid3::new(64, 8.0).unwrap();
    let u = gaussian(g, 1.0);
    let exact = (PI / 6.0).powf(0.25);
    assert!((lp_norm(&u, 6.0).unwrap() - exact).abs() < 1e-5 * exact);
    assert_eq!(lp_norm(&Field3::zeros(g), 3.0).unwrap(), 0.0);
}

#[test]
fn parseval_for_the_gradient() {
    let g = Grid3::new(32, 5.0).unwrap();
    let s = Spectral::new(g);
    let u = Field3::from_fn(g, |p| (-r2([p[0] - 0.4, p[1], p[2] + 0.3])).exp() * (1.0 + 0.3 * p[1])).unwrap();
    let multiplier = s.gradient_energy(u.values());
    let physical = s.gradient_energy_physical(u.values());
    assert!((multiplier - physical).abs() < 1e-10 * multiplier);
}

#[test]
fn empty_field_file_is_malformed() {
    assert!(matches!(read_field_from(&b""[..]), Err(Error::MalformedHeader(_))));
}

fn small_field() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 16 * 16 * 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn norms_are_homogeneous_and_subadditive(a in small_field(), b in small_field(), t in -3.0f64..3.0, p in 1.0f64..8.0) {
        let g = Grid3::new(16, 2.0).unwrap();
        let u = Field3::new(g, a).unwrap();
        let v = Field3::new(g, b).unwrap();
        let nu = lp_norm(&u, p).unwrap();
        prop_assert!((lp_norm(&u.scaled(t), p).unwrap() - t.abs() * nu).abs() <= 1e-12 * (1.0 + nu));
        let sum = Field3::new(g, u.values().iter().zip(v.values()).map(|(x, y)| x + y).collect()).unwrap();
        prop_assert!(lp_norm(&sum, p).unwrap() <= nu + lp_norm(&v, p).unwrap() + 1e-12);
        let one = Field3::constant(g, 1.0);
        let h = h1_norm_sq(&u, &one).unwrap();
        prop_assert!((h1_norm_sq(&u.scaled(t), &one).unwrap() - t * t * h).abs() <= 1e-10 * (1.0 + h * t * t));
    }

    #[test]
    fn field_files_round_trip(a in small_field(), name in "[a-z]{1,8}") {
        let g = Grid3::new(16, 2.0).unwrap();
        let f = StoredField::Grid(Field3::new(g, a).unwrap());
        let mut buf = Vec::new();
        write_field_to(&mut buf, &f, &name, Some("abc")).unwrap();
        let (back, read_name) = read_field_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back, f);
        prop_assert_eq!(read_name, name);
    }
}
