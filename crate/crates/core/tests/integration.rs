use ncsphere::actions::{apply_ru, is_ru_fixed};
use ncsphere::homs::{kill_zn, rescale_permute};
use ncsphere::rep::{eval_matrix, grid_min_singular};
use ncsphere::suites::{self, SUITE_NAMES};
use ncsphere::winding::circle_winding;
use ncsphere::*;

fn rho3() -> ParameterMatrix {
    let a = |p, q| Angle::exact(p, q).unwrap();
    ParameterMatrix::from_upper(3, |j, k| match (j, k) {
        (0, 1) => a(1, 3),
        (0, 2) => a(1, 5),
        _ => a(1, 7),
    })
}

#[test]
fn normal_form_of_a_swapped_pair() {
    let ctx = Context::odd(rho3());
    let p = parse("z2 z1", &ctx).unwrap();
    assert_eq!(print(&p), "w(1/3) z1 z2");
    let q = parse("z3 z2' z1'", &ctx).unwrap();
    assert_eq!(parse(&print(&q), &ctx).unwrap(), q);
    assert_eq!(q.adjoint().adjoint(), q);
}

#[test]
fn zgen_factors_and_fixed_product() {
    let ctx = Context::new(rho3(), false, 3);
    let z = zgen(&ctx, 3).unwrap();
    let r = RotationAction::new(3, vec![Angle::exact(1, 3).unwrap(), Angle::exact(2, 3).unwrap(), Angle::exact(1, 3).unwrap()]).unwrap();
    let f = factor_rotation(&z, &r).unwrap();
    assert!(f.a.has_order_dividing(3) && f.b.has_order_dividing(3));
    let az_b = f.a.block_matrix(&ctx, 1).unwrap().mul(&z).unwrap().mul(&f.b.block_matrix(&ctx, 1).unwrap()).unwrap();
    assert_eq!(r.apply_matrix(&z).unwrap(), az_b);

    // Z* Φ(Z) for a class-preserving rescaling is fixed by the B*-conjugated action
    let betas = vec![Angle::exact(1, 3).unwrap(), Angle::zero(), Angle::exact(2, 3).unwrap()];
    let phi = rescale_permute(&ctx, &[0, 1, 2], &betas).unwrap();
    let image = phi.apply_matrix(&z).unwrap();
    let fi = factor_rotation(&image, &r).unwrap();
    assert_eq!(fi.a_exponents, f.a_exponents);
    let product = z.adjoint().mul(&image).unwrap();
    assert!(is_ru_fixed(&f.b.adjoint(), &r, &product).unwrap());
    assert_eq!(apply_ru(&f.b.adjoint(), &r, &product).unwrap(), product);
}

#[test]
fn kill_zn_splits_zgen() {
    let a = |p, q| Angle::exact(p, q).unwrap();
    let rho = ParameterMatrix::from_upper(3, |j, k| if k == 2 { Angle::zero() } else { a(j as i64 + 1, 4) });
    let ctx = Context::odd(rho);
    let h = kill_zn(&ctx).unwrap();
    let image = h.apply_matrix(&zgen(&ctx, 3).unwrap()).unwrap();
    let z2 = zgen(h.codomain(), 2).unwrap();
    assert_eq!(image, z2.direct_sum(&z2.adjoint()).unwrap());
}

#[test]
fn zgen_is_invertible_on_the_sphere() {
    let a = |p, q| Angle::exact(p, q).unwrap();
    let ctx = Context::odd(ParameterMatrix::from_upper(3, |j, _| if j == 0 { a(1, 3) } else { a(1, 2) }));
    let rep = RationalRep::build(ctx.rho()).unwrap();
    let z = zgen(&ctx, 3).unwrap();
    let ext = grid_min_singular(&z, &rep, &GridSpec::new(4, 4)).unwrap();
    // Z is sphere unitary, so every singular value is 1
    assert!((ext.value - 1.0).abs() < 1e-9, "{}", ext.value);
    let e = eval_matrix(&z, &ext.point, &rep).unwrap();
    assert_eq!(e.nrows(), 4 * rep.q());
}

#[test]
fn circle_winding_of_a_coordinate() {
    let ctx = Context::odd(ParameterMatrix::commutative(2));
    let m = PolyMatrix::new(&ctx, 1, 1, vec![parse("z1^3", &ctx).unwrap()]).unwrap();
    assert_eq!(circle_winding(&m, 0, 64, &Tolerances::default()).unwrap().winding, 3);
    let m = PolyMatrix::new(&ctx, 1, 1, vec![parse("z2'", &ctx).unwrap()]).unwrap();
    assert_eq!(circle_winding(&m, 1, 64, &Tolerances::default()).unwrap().winding, -1);
}

#[test]
fn json_round_trips() {
    let ctx = Context::new(rho3(), true, 4);
    let back = Context::from_json_value(&ctx.to_json_value()).unwrap();
    assert_eq!(back.to_json_value(), ctx.to_json_value());

    let rho = ParameterMatrix::from_json_value(&rho3().to_json_value()).unwrap();
    assert_eq!(rho, rho3());

    let z = zgen(&Context::odd(rho3()), 3).unwrap();
    assert_eq!(PolyMatrix::from_json_value(&z.to_json_value(), None).unwrap(), z);

    let r = RotationAction::uniform(3, 4).unwrap();
    assert_eq!(RotationAction::from_json_value(&r.to_json_value()).unwrap(), r);

    let rep = RationalRep::build(&rho3()).unwrap();
    assert_eq!(RationalRep::from_json_value(&rep.to_json_value()).unwrap().q(), rep.q());

    let h = kill_zn(&Context::odd(ParameterMatrix::commutative(3))).unwrap();
    let h2 = GeneratorMap::from_json_value(&h.to_json_value()).unwrap();
    assert_eq!(h2.to_json_value(), h.to_json_value());

    let lp = MatrixLoop::scalar(16, |t| num_complex::Complex64::from_polar(2.0, t)).unwrap();
    let lp2 = MatrixLoop::from_json_value(&lp.to_json_value()).unwrap();
    assert_eq!(winding(&lp2).unwrap(), 1);
}

#[test]
fn every_suite_passes_and_repeats() {
    let cfg = SuiteConfig {
        seed: 11,
        trials: 3,
        nmax: 3,
        grid: GridSpec::new(8, 8),
        ..SuiteConfig::default()
    };
    for name in SUITE_NAMES {
        let a = suites::run(name, &cfg).unwrap();
        assert!(a.pass, "{name}: {:?}", a.witnesses);
        let b = suites::run(name, &cfg).unwrap();
        assert_eq!(a.to_json_value().to_string(), b.to_json_value().to_string());
    }
}
