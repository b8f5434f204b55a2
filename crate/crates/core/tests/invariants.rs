use std::f64::consts::PI;

use eclen::{
    bernstein_basis, brute_force_ec, build_family, critical_length, ec_test, find_roots, CharPoly,
    CritLenConfig, ECTestConfig, FamilyBasis, PiecewiseSpace, Root, RootSet, Verdict,
};
use proptest::prelude::*;

fn family(roots: Vec<Root>) -> FamilyBasis {
    build_family(&RootSet::new(roots).unwrap())
}

/// `x^{n-1}(x² + b²)`.
fn trig(n: usize, b: f64) -> FamilyBasis {
    let mut r = vec![Root::new(0.0, b, 1)];
    if n > 1 {
        r.push(Root::new(0.0, 0.0, n - 1));
    }
    family(r)
}

fn verdict(sp: &PiecewiseSpace) -> Verdict {
    ec_test(sp, &ECTestConfig::default()).verdict
}

fn kernel(kind: u8, n: usize, b: f64, shift: f64) -> FamilyBasis {
    match kind {
        0 => trig(n, b),
        1 => {
            let mut r = vec![Root::new(shift, b, 1)];
            if n > 1 {
                r.push(Root::new(0.0, 0.0, n - 1));
            }
            family(r)
        }
        _ => {
            let mut r = vec![Root::new(0.0, b, 1)];
            if n > 1 {
                r.push(Root::new(shift, 0.0, n - 1));
            }
            family(r)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn translation_invariance(n in 1usize..4, h in 0.5f64..9.0, a in -5.0f64..5.0, parts in 1usize..4) {
        let f = trig(n, 1.0);
        let here = verdict(&PiecewiseSpace::uniform_equal(&f, 0.0, h, parts).unwrap());
        let there = verdict(&PiecewiseSpace::uniform_equal(&f, a, a + h, parts).unwrap());
        prop_assume!(here != Verdict::Inconclusive && there != Verdict::Inconclusive);
        prop_assert_eq!(here, there);
    }

    #[test]
    fn ec_is_inherited_by_subintervals(n in 1usize..4, h in 0.5f64..9.0, t in 0.1f64..0.95) {
        let f = trig(n, 1.0);
        let long = verdict(&PiecewiseSpace::uniform_equal(&f, 0.0, h, 2).unwrap());
        prop_assume!(long == Verdict::EC);
        let short = verdict(&PiecewiseSpace::uniform_equal(&f, 0.0, t * h, 2).unwrap());
        prop_assert_ne!(short, Verdict::NotEC);
    }

    #[test]
    fn agrees_with_brute_force(
        kind in 0u8..3,
        n in 1usize..4,
        b in 0.5f64..2.0,
        shift in -0.8f64..0.8,
        lens in proptest::collection::vec(0.2f64..0.95, 1..5),
    ) {
        // every section shorter than π/b, so EC on its own
        let f = kernel(kind, n, b, shift);
        let mut ends = vec![0.0];
        for l in &lens {
            ends.push(ends.last().unwrap() + l * PI / b);
        }
        let h = *ends.last().unwrap();
        let sp = PiecewiseSpace::uniform(&f, 0.0, &ends[1..ends.len() - 1], h).unwrap();
        let v = verdict(&sp);
        prop_assume!(v != Verdict::Inconclusive);
        prop_assert_eq!(v, brute_force_ec(&sp, 160).unwrap());
    }

    #[test]
    fn partition_of_unity(h in 0.3f64..3.0) {
        let nb = bernstein_basis(&trig(2, 1.0), 0.0, h).unwrap();
        for s in 0..=20 {
            let x = h * s as f64 / 20.0;
            let v = nb.values(x).unwrap();
            prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            prop_assert!(v.iter().all(|b| *b >= -1e-14));
        }
    }
}

#[test]
fn spliced_kernels_agree_with_brute_force() {
    let t = trig(1, 1.0);
    let hyp = family(vec![Root::new(1.0, 0.0, 1), Root::new(-1.0, 0.0, 1)]);
    for (tl, hl) in [(1.0, 2.0), (2.5, 0.5), (2.5, 1.5), (2.9, 0.2), (2.9, 0.6)] {
        let sp = PiecewiseSpace::spliced(0.0, &[(t.clone(), tl), (hyp.clone(), hl)]).unwrap();
        let v = verdict(&sp);
        let want = if 1.0 / f64::tan(tl) + 1.0 / f64::tanh(hl) > 0.0 {
            Verdict::EC
        } else {
            Verdict::NotEC
        };
        assert_eq!(v, want, "T = {tl}, H = {hl}");
        assert_eq!(
            brute_force_ec(&sp, 200).unwrap(),
            want,
            "T = {tl}, H = {hl}"
        );
    }
}

#[test]
fn low_cycloidal_lengths() {
    let cfg = CritLenConfig::default();
    for (n, want) in [(1, PI), (2, 2.0 * PI), (3, 2.0 * PI)] {
        let mut c = vec![0.0; n + 1];
        c[n - 1] = 1.0;
        let v = critical_length(&CharPoly::new(c).unwrap(), &cfg)
            .unwrap()
            .value
            .unwrap();
        assert!((v - want).abs() < 1e-6, "n = {n}: {v}");
    }
}

#[test]
fn roots_survive_polynomial_round_trip() {
    let r = RootSet::new(vec![Root::new(0.0, 1.0, 2), Root::new(-0.5, 0.0, 1)]).unwrap();
    let back = find_roots(&CharPoly::from_roots(&r), 1e-8).unwrap();
    assert_eq!(back.degree(), 5);
    assert_eq!(back.entries().len(), 2);
}
