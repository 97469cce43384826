//! Property tests for the ring, operator and symbol layers.

use proptest::prelude::*;
use spoquant::expr::{parse_superfunction, parse_symbol};
use spoquant::finesymbols::basis_symbols;
use spoquant::rational::q;
use spoquant::superring::Mono;
use spoquant::{Bigrade, DiffOp, FSym, HalfInt, OddSet, Rational, SuperPoly, SymFlavor};

fn rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(a, b)| q(a, b))
}

fn poly(n: usize) -> impl Strategy<Value = SuperPoly> {
    prop::collection::vec((0u32..=2, 0u64..(1 << n), rational()), 0..5).prop_map(move |terms| {
        SuperPoly::from_terms(
            n,
            terms
                .into_iter()
                .map(|(x, bits, c)| (Mono::new(x, OddSet::from_bits(bits)), c)),
        )
    })
}

fn with_n() -> impl Strategy<Value = (usize, SuperPoly, SuperPoly, SuperPoly)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), poly(n), poly(n), poly(n)))
}

/// `(−1)^{p q}` for parities given as booleans.
fn sign(p: bool, q: bool) -> Rational {
    if p && q {
        -Rational::one()
    } else {
        Rational::one()
    }
}

fn op(n: usize) -> impl Strategy<Value = DiffOp> {
    prop::collection::vec((0u32..=1, 0u64..(1 << n), poly(n)), 0..3).prop_map(move |terms| {
        let zero = Rational::zero();
        terms.into_iter().fold(
            DiffOp::zero(n, zero.clone(), zero.clone()),
            |acc, (c, bits, a)| {
                let t = DiffOp::term(n, zero.clone(), zero.clone(), c, OddSet::from_bits(bits), a);
                acc.try_add(&t).unwrap()
            },
        )
    })
}

proptest! {
    #[test]
    fn product_is_associative_and_distributive((_n, f, g, h) in with_n()) {
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
    }

    #[test]
    fn product_is_supercommutative((_n, f, g, _h) in with_n()) {
        let (f0, f1) = f.split_parity();
        let (g0, g1) = g.split_parity();
        for (a, pa) in [(&f0, false), (&f1, true)] {
            for (b, pb) in [(&g0, false), (&g1, true)] {
                prop_assert_eq!(a * b, (b * a).scale(&sign(pa, pb)));
            }
        }
    }

    #[test]
    fn odd_derivations_obey_graded_leibniz((n, f, g, _h) in with_n()) {
        let (f0, f1) = f.split_parity();
        for i in 1..=n {
            for (a, odd) in [(&f0, false), (&f1, true)] {
                let s = sign(odd, true);
                let lhs = (a * &g).dbar(i).unwrap();
                let rhs = &(&a.dbar(i).unwrap() * &g) + &(a * &g.dbar(i).unwrap()).scale(&s);
                prop_assert_eq!(lhs, rhs);
                let lhs = (a * &g).d_theta(i).unwrap();
                let rhs = &(&a.d_theta(i).unwrap() * &g) + &(a * &g.d_theta(i).unwrap()).scale(&s);
                prop_assert_eq!(lhs, rhs);
            }
        }
        prop_assert_eq!((&f * &g).d_x(), &(&f.d_x() * &g) + &(&f * &g.d_x()));
    }

    #[test]
    fn dbar_anticommutator((n, f, _g, _h) in with_n()) {
        for i in 1..=n {
            for j in 1..=n {
                let lhs = &f.dbar(j).unwrap().dbar(i).unwrap() + &f.dbar(i).unwrap().dbar(j).unwrap();
                let rhs = if i == j { f.d_x().scale(&q(-2, 1)) } else { SuperPoly::zero(n) };
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn printing_parses_back((n, f, _g, _h) in with_n()) {
        prop_assert_eq!(parse_superfunction(&f.to_string(), n).unwrap(), f);
    }

    #[test]
    fn composition_matches_application(
        (a, b, c, f) in (1usize..=3).prop_flat_map(|n| (op(n), op(n), op(n), poly(n)))
    ) {
        let ab = a.compose(&b).unwrap();
        prop_assert_eq!(ab.apply(&f).unwrap(), a.apply(&b.apply(&f).unwrap()).unwrap());
        prop_assert_eq!(ab.compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
    }

    #[test]
    fn rational_display_roundtrip(r in rational()) {
        prop_assert_eq!(r.to_string().parse::<Rational>().unwrap(), r);
    }
}

fn symbols(n: usize, d_max: u32) -> Vec<FSym> {
    Bigrade::all_up_to(HalfInt::from_halves(d_max))
        .into_iter()
        .flat_map(|b| basis_symbols(n, &q(13, 7), b, 1))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_substitution_is_invertible(n in 1usize..=3, pick in any::<prop::sample::Index>()) {
        let syms = symbols(n, 4);
        let s = pick.get(&syms);
        prop_assert_eq!(&s.to_canonical().unwrap().to_contact().unwrap(), s);
    }

    #[test]
    fn lift_has_its_symbol(n in 1usize..=3, pick in any::<prop::sample::Index>(), lam in rational()) {
        let syms = symbols(n, 4);
        let s = pick.get(&syms);
        let d = s.bigrade().unwrap().d;
        prop_assert_eq!(&DiffOp::lift(s, &lam).unwrap().h_symbol(d).unwrap(), s);
    }

    #[test]
    fn symbols_print_and_parse(n in 1usize..=3, pick in any::<prop::sample::Index>()) {
        let syms = symbols(n, 4);
        let s = pick.get(&syms);
        let back = parse_symbol(&s.to_string(), n, SymFlavor::Contact, q(13, 7)).unwrap();
        prop_assert_eq!(&back, s);
    }
}
