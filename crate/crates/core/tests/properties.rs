use std::f64::consts::TAU;
use std::sync::Arc;

use ncsphere::actions::RotationAction;
use ncsphere::algebra::{Context, Monomial, StarPolynomial};
use ncsphere::homs::{kill_zn, to_even, x_to_zero, GeneratorMap};
use ncsphere::rep::{eval_poly, CMatrix, RationalRep, SpherePoint};
use ncsphere::winding::{adaptive_winding, MatrixLoop, Parity, TrigMatrix, TrigPoly};
use ncsphere::{parse, print, winding, zgen, Angle, ParameterMatrix, Tolerances};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DENS: [i64; 4] = [2, 3, 4, 6];

fn arb_rho(n: usize) -> impl Strategy<Value = ParameterMatrix> {
    prop::collection::vec((0usize..DENS.len(), 0i64..12), n * (n - 1) / 2).prop_map(move |picks| {
        let mut it = picks.into_iter();
        ParameterMatrix::from_upper(n, |_, _| {
            let (d, p) = it.next().unwrap();
            Angle::exact(p % DENS[d], DENS[d]).unwrap()
        })
    })
}

/// Odd (or even with `has_x`) context over Q(ζ₁₂) so that rotations of
/// order 2, 3, 4, 6 act.
fn arb_ctx(n: usize, has_x: bool) -> impl Strategy<Value = Arc<Context>> {
    arb_rho(n).prop_map(move |rho| Context::new(rho, has_x, 12))
}

fn arb_poly(ctx: Arc<Context>, max_terms: usize) -> impl Strategy<Value = StarPolynomial> {
    let n = ctx.n();
    let has_x = ctx.has_x();
    let term = (
        prop::collection::vec(0u32..3, n),
        prop::collection::vec(0u32..3, n),
        0u32..if has_x { 3 } else { 1 },
        -3i64..=3,
        0i64..12,
    );
    prop::collection::vec(term, 0..=max_terms).prop_map(move |terms| {
        let s = ctx.scalars();
        let terms = terms.into_iter().map(|(a, b, c, m, e)| {
            let coeff = s.int(m).mul(&s.zeta_pow(e).unwrap());
            (Monomial::new(a, b, c), coeff)
        });
        StarPolynomial::from_terms(&ctx, terms).unwrap()
    })
}

fn ctx_and_polys(n: usize, has_x: bool, count: usize) -> impl Strategy<Value = (Arc<Context>, Vec<StarPolynomial>)> {
    arb_ctx(n, has_x).prop_flat_map(move |ctx| {
        let polys = prop::collection::vec(arb_poly(ctx.clone(), 3), count);
        (Just(ctx), polys)
    })
}

fn arb_action(n: usize) -> impl Strategy<Value = RotationAction> {
    prop::sample::select(vec![2u64, 3, 4, 6]).prop_flat_map(move |k| {
        let units: Vec<i64> = (1..k as i64).filter(|&p| num_integer::gcd(p, k as i64) == 1).collect();
        prop::collection::vec(prop::sample::select(units), n).prop_map(move |e| {
            RotationAction::new(k, e.iter().map(|&p| Angle::exact(p, k as i64).unwrap()).collect()).unwrap()
        })
    })
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative((_, ps) in ctx_and_polys(3, true, 3)) {
        let (a, b, c) = (&ps[0], &ps[1], &ps[2]);
        prop_assert_eq!(&(a * b) * c, a * &(b * c));
    }

    #[test]
    fn adjoint_reverses_products((_, ps) in ctx_and_polys(3, true, 2)) {
        let (a, b) = (&ps[0], &ps[1]);
        prop_assert_eq!((a * b).adjoint(), &b.adjoint() * &a.adjoint());
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
    }

    #[test]
    fn distributivity((_, ps) in ctx_and_polys(2, false, 3)) {
        let (a, b, c) = (&ps[0], &ps[1], &ps[2]);
        prop_assert_eq!(a * &(b + c), &(a * b) + &(a * c));
    }

    #[test]
    fn parse_inverts_print((ctx, ps) in ctx_and_polys(3, true, 1)) {
        let text = print(&ps[0]);
        prop_assert_eq!(parse(&text, &ctx).unwrap(), ps[0].clone(), "text: {}", text);
    }

    #[test]
    fn rotation_is_a_star_map_of_order_k(
        (ctx, ps) in ctx_and_polys(3, false, 2),
        r in arb_action(3),
    ) {
        let (a, b) = (&ps[0], &ps[1]);
        prop_assert_eq!(r.apply(&(a * b)).unwrap(), &r.apply(a).unwrap() * &r.apply(b).unwrap());
        prop_assert_eq!(r.apply(&a.adjoint()).unwrap(), r.apply(a).unwrap().adjoint());
        prop_assert_eq!(r.apply_power(a, r.k() as i64).unwrap(), a.clone());
        prop_assert_eq!(r.apply(&ctx.one()).unwrap(), ctx.one());
    }

    #[test]
    fn graded_projections_split(( _, ps) in ctx_and_polys(3, false, 1), r in arb_action(3)) {
        let p = &ps[0];
        let k = r.k();
        let mut total = p.ctx().zero();
        for j in 0..k {
            let pj = r.graded_project(p, j).unwrap();
            prop_assert_eq!(r.graded_project(&pj, j).unwrap(), pj.clone());
            for i in (0..k).filter(|&i| i != j) {
                prop_assert!(r.graded_project(&pj, i).unwrap().is_zero());
            }
            if !pj.is_zero() {
                prop_assert_eq!(r.homogeneity_class(&pj).unwrap(), Some(j));
            }
            total = &total + &pj;
        }
        prop_assert_eq!(total, p.clone());
    }

    #[test]
    fn evaluation_is_a_star_homomorphism((ctx, ps) in ctx_and_polys(2, false, 2), seed in any::<u64>()) {
        let rep = RationalRep::build(ctx.rho()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = SpherePoint::random(2, false, &mut rng);
        let (a, b) = (&ps[0], &ps[1]);
        let ea = eval_poly(a, &pt, &rep).unwrap();
        let eb = eval_poly(b, &pt, &rep).unwrap();
        let eab = eval_poly(&(a * b), &pt, &rep).unwrap();
        prop_assert!(max_abs(&(eab - &ea * &eb)) < 1e-9);
        let eadj = eval_poly(&a.adjoint(), &pt, &rep).unwrap();
        prop_assert!(max_abs(&(eadj - ea.adjoint())) < 1e-9);
    }

    /// Rotating the algebra is rotating the torus coordinates: E(R(p))(t, w) = E(p)(t, α·w).
    #[test]
    fn evaluation_is_rotation_equivariant(
        (ctx, ps) in ctx_and_polys(2, false, 1),
        r in arb_action(2),
        seed in any::<u64>(),
    ) {
        let rep = RationalRep::build(ctx.rho()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pt = SpherePoint::random(2, false, &mut rng);
        let rotated = SpherePoint::new(
            pt.t.clone(),
            pt.w.iter().zip(r.alphas()).map(|(w, a)| w * a.phase()).collect(),
            None,
        ).unwrap();
        let lhs = eval_poly(&r.apply(&ps[0]).unwrap(), &pt, &rep).unwrap();
        let rhs = eval_poly(&ps[0], &rotated, &rep).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-9);
    }

    #[test]
    fn zgen_depends_only_on_the_leading_block(rho in arb_rho(4), other in arb_rho(5), k in 1usize..=4) {
        let omega = ParameterMatrix::from_upper(5, |a, b| if b < k { rho.angle(a, b) } else { other.angle(a, b) });
        let zr = zgen(&Context::odd(rho), k).unwrap();
        let zo = zgen(&Context::odd(omega), k).unwrap();
        prop_assert!(zr.formally_equal(&zo));
    }

    #[test]
    fn homomorphisms_respect_products((ctx, ps) in ctx_and_polys(3, false, 2)) {
        let rho = ParameterMatrix::from_upper(3, |a, b| if b == 2 { Angle::zero() } else { ctx.rho().angle(a, b) });
        let ctx = Context::with_scalars(rho, false, ctx.scalars().clone()).unwrap();
        let a = ps[0].moved_to(&ctx).unwrap();
        let b = ps[1].moved_to(&ctx).unwrap();
        for h in [kill_zn(&ctx).unwrap(), to_even(&ctx).unwrap()] {
            prop_assert_eq!(h.apply(&(&a * &b)).unwrap(), &h.apply(&a).unwrap() * &h.apply(&b).unwrap());
            prop_assert_eq!(h.apply(&a.adjoint()).unwrap(), h.apply(&a).unwrap().adjoint());
            prop_assert_eq!(h.apply(&ctx.one()).unwrap(), h.codomain().one());
        }
        // composition validates and distributes
        let pi = to_even(&ctx).unwrap();
        let both = pi.then(&x_to_zero(pi.codomain()).unwrap()).unwrap();
        let mut fresh = GeneratorMap::new(both.domain(), both.codomain(), both.images().to_vec(), None).unwrap();
        prop_assert!(fresh.validate(ncsphere::ValidationMode::Symbolic).unwrap().valid);
        let step = x_to_zero(pi.codomain()).unwrap().apply(&pi.apply(&a).unwrap()).unwrap();
        prop_assert_eq!(both.apply(&a).unwrap(), step);
    }
}

fn nonvanishing(seed: u64, deg: i64, parity: Parity) -> TrigPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TrigMatrix::random_parity(1, deg, parity, &mut rng).unwrap().entries[0].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn winding_survives_refinement(seed in any::<u64>()) {
        let g = nonvanishing(seed, 4, Parity::Any);
        let tol = Tolerances::default();
        let coarse = adaptive_winding(|t| CMatrix::from_element(1, 1, g.eval(t)), 64, &tol).unwrap();
        let fine = winding(&MatrixLoop::scalar(coarse.samples * 2, |t| g.eval(t)).unwrap()).unwrap();
        prop_assert_eq!(coarse.winding, fine);
    }

    #[test]
    fn winding_is_additive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (f, g) = (nonvanishing(s1, 3, Parity::Any), nonvanishing(s2, 3, Parity::Any));
        let tol = Tolerances::default();
        let w = |h: &(dyn Fn(f64) -> Complex64 + Sync)| adaptive_winding(|t| CMatrix::from_element(1, 1, h(t)), 64, &tol).unwrap().winding;
        prop_assert_eq!(w(&|t| f.eval(t) * g.eval(t)), w(&|t| f.eval(t)) + w(&|t| g.eval(t)));
    }

    #[test]
    fn parity_law(seed in any::<u64>(), d in prop::sample::select(vec![1usize, 3])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tol = Tolerances::default();
        let odd = TrigMatrix::random_parity(d, 3, Parity::Odd, &mut rng).unwrap();
        prop_assert_eq!(adaptive_winding(odd.sampler(), 64, &tol).unwrap().winding.rem_euclid(2), 1);
        let even = TrigMatrix::random_parity(d, 3, Parity::Even, &mut rng).unwrap();
        prop_assert_eq!(adaptive_winding(even.sampler(), 64, &tol).unwrap().winding.rem_euclid(2), 0);
    }

    #[test]
    fn substitution_multiplies_winding(seed in any::<u64>(), k in 2i64..=4) {
        let g = nonvanishing(seed, 2, Parity::Any);
        let gk = g.compose_power(k);
        let tol = Tolerances::default();
        let w = adaptive_winding(|t| CMatrix::from_element(1, 1, g.eval(t)), 64, &tol).unwrap().winding;
        let wk = adaptive_winding(|t| CMatrix::from_element(1, 1, gk.eval(t)), 64, &tol).unwrap().winding;
        prop_assert_eq!(wk, k * w);
        prop_assert!((g.eval(TAU) - g.eval(0.0)).norm() < 1e-9);
    }
}
