use octo_core::exterior::{lambda2, wedge};
use octo_core::{FieldPrime, FpMatrix, FpVector, Octonion, PGroupContext, PGroupElement, Subspace};
use proptest::prelude::*;

const PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

fn prime() -> impl Strategy<Value = FieldPrime> {
    prop::sample::select(PRIMES.to_vec()).prop_map(|p| FieldPrime::new(p).unwrap())
}

fn matrix(p: FieldPrime, rows: usize, cols: usize) -> impl Strategy<Value = FpMatrix> {
    prop::collection::vec(0..p.get(), rows * cols)
        .prop_map(move |e| FpMatrix::new(p, rows, cols, e).unwrap())
}

fn vector(p: FieldPrime, n: usize) -> impl Strategy<Value = FpVector> {
    prop::collection::vec(0..p.get(), n).prop_map(move |e| FpVector::new(p, e).unwrap())
}

fn octonion(p: FieldPrime) -> impl Strategy<Value = Octonion> {
    prop::array::uniform8(0..p.get()).prop_map(move |c| Octonion::new(p, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_canonical_and_rank_nullity(
        (m, t) in prime().prop_flat_map(|p| (1usize..8, 1usize..10).prop_flat_map(move |(r, c)| (matrix(p, r, c), matrix(p, r, r))))
    ) {
        let r = m.rref();
        prop_assert_eq!(&r.matrix.rref(), &r);
        prop_assert_eq!(r.rank + m.kernel().dim(), m.rows);
        if t.det().unwrap() != 0 {
            prop_assert_eq!(t.mul(&m).unwrap().rref().matrix, r.matrix);
        }
        prop_assert_eq!(Subspace::row_space(&m).dim(), r.rank);
    }

    #[test]
    fn matmul_associative_and_distributive(
        (d, a, b, c) in prime().prop_flat_map(|p| (matrix(p, 4, 4), matrix(p, 4, 5), matrix(p, 5, 3), matrix(p, 5, 3)))
    ) {
        prop_assert_eq!(d.mul(&a).unwrap().mul(&b).unwrap(), d.mul(&a.mul(&b).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn octonion_laws((x, y) in prime().prop_flat_map(|p| (octonion(p), octonion(p)))) {
        let p = x.p;
        let xx = x.mul(&x);
        prop_assert_eq!(xx.mul(&y), x.mul(&x.mul(&y)));
        prop_assert_eq!(y.mul(&xx), y.mul(&x).mul(&x));
        prop_assert_eq!(x.mul(&y).conjugate(), y.conjugate().mul(&x.conjugate()));
        prop_assert_eq!(x.mul(&y).norm(), p.mul(x.norm(), y.norm()));
        prop_assert_eq!(x.norm(), x.beta(&x));
        prop_assert_eq!(x.beta(&y), y.beta(&x));
        prop_assert_eq!(x.mul(&x.conjugate()), Octonion::scalar(p, x.norm()));
    }

    #[test]
    fn wedge_alternating_and_natural(
        (u, v, g) in prime().prop_flat_map(|p| (vector(p, 7), vector(p, 7), matrix(p, 7, 7)))
    ) {
        prop_assert!(wedge(&u, &u).is_zero());
        prop_assert_eq!(wedge(&u, &v), wedge(&v, &u).neg());
        let lhs = wedge(&u, &v).mul_mat(&lambda2(&g)).unwrap();
        prop_assert_eq!(lhs, wedge(&u.mul_mat(&g).unwrap(), &v.mul_mat(&g).unwrap()));
    }

    #[test]
    fn p_group_law(
        (a, b, c) in prime().prop_flat_map(|p| {
            let elem = move || (vector(p, 7), vector(p, 7)).prop_map(|(v, w)| PGroupElement::new(v, w).unwrap());
            (elem(), elem(), elem())
        })
    ) {
        let ctx = PGroupContext::for_prime(a.v.p);
        prop_assert_eq!(ctx.multiply(&ctx.multiply(&a, &b), &c), ctx.multiply(&a, &ctx.multiply(&b, &c)));
        let comm = ctx.commutator(&a, &b);
        prop_assert!(comm.v.is_zero());
        // commutators are central
        prop_assert_eq!(ctx.multiply(&comm, &c), ctx.multiply(&c, &comm));
        prop_assert!(ctx.power(&a, a.v.p.get() as i64).is_identity());
    }
}
