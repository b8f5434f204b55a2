//! The level recursion acts on coefficients only. Here the level-1
//! coefficients are checked against the functions they claim to expand:
//! the global level-1 basis `D(Σ_{l>i} V_l / w_0)` and, on each section,
//! the local one built the same way from the local basis and the global
//! weight.

use eclen::bernlike::engine_locals;
use eclen::ectest::gamma_step;
use eclen::jet::Jet;
use eclen::{
    build_family, ec_test, weight_system, ECTestConfig, FamilyBasis, PiecewiseSpace, Root, RootSet,
    Verdict,
};

fn family(roots: Vec<Root>) -> FamilyBasis {
    build_family(&RootSet::new(roots).unwrap())
}

fn check(sp: &PiecewiseSpace) {
    let n = sp.n();
    let rep = ec_test(
        sp,
        &ECTestConfig {
            keep_levels: true,
            ..ECTestConfig::default()
        },
    );
    assert_eq!(rep.verdict, Verdict::EC);
    let levels = rep.levels.as_ref().unwrap();
    let basis = rep.basis.as_ref().unwrap();
    let ws = weight_system(&rep).unwrap();
    let locals = engine_locals(sp).unwrap();
    let g0 = &levels[0];
    let g1 = &gamma_step(g0).unwrap();
    if let Some(kept) = levels.get(1) {
        assert_eq!(kept, g1);
    }
    let mut worst: f64 = 0.0;
    for (k, sec) in sp.sections().iter().enumerate() {
        let loc = &locals[k];
        for s in 1..10 {
            let x = sec.start + sec.len() * s as f64 / 10.0;
            let global: Vec<Jet> = (0..=n)
                .map(|i| Jet::from_derivatives(&basis.derivatives(i, x, n).unwrap()))
                .collect();
            let mut w0 = Jet::zero(n);
            for j in &global {
                w0.add_assign(j);
            }
            let local: Vec<Jet> = (0..=n)
                .map(|r| Jet::from_derivatives(&loc.derivatives(r, x, n).unwrap()))
                .collect();
            // level 0: V_i = Σ_r γ⁰ Ṽ_r
            for (i, gi) in global.iter().enumerate() {
                let sum: f64 = (0..=n).map(|r| g0.get(i, k, r) * local[r].value()).sum();
                worst = worst.max((sum - gi.value()).abs());
            }
            let b: Vec<Jet> = (0..=n)
                .map(|r| {
                    let s_r: f64 = (0..=n).map(|l| g0.get(l, k, r)).sum();
                    local[r].scaled(s_r).div(&w0)
                })
                .collect();
            let mut tail = Jet::zero(n);
            let mut v1 = vec![0.0; n];
            for r in (1..=n).rev() {
                tail.add_assign(&b[r]);
                v1[r - 1] = tail.derivative().value();
            }
            let tower = ws.tower(x).unwrap();
            for i in 0..n {
                let sum: f64 = (0..n).map(|r| g1.get(i, k, r) * v1[r]).sum();
                let want = tower.v[1][i];
                worst = worst.max((sum - want).abs() / want.abs().max(1.0));
            }
        }
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn trig_pair_level_one() {
    let f = family(vec![Root::new(0.0, 1.0, 1)]);
    check(&PiecewiseSpace::uniform(&f, 0.0, &[1.2], 2.5).unwrap());
}

#[test]
fn trig_with_constants_level_one() {
    let f = family(vec![Root::new(0.0, 1.0, 1), Root::new(0.0, 0.0, 1)]);
    check(&PiecewiseSpace::uniform(&f, 0.0, &[1.0, 2.0], 3.0).unwrap());
    check(&PiecewiseSpace::uniform(&f, 0.0, &[1.5], 3.0).unwrap());
}

#[test]
fn damped_with_constants_level_one() {
    let f = family(vec![Root::new(0.3, 1.5, 1), Root::new(0.0, 0.0, 1)]);
    check(&PiecewiseSpace::uniform(&f, -1.0, &[0.0, 0.8], 1.6).unwrap());
}

#[test]
fn spliced_level_one() {
    let t = family(vec![Root::new(0.0, 1.0, 1)]);
    let h = family(vec![Root::new(1.0, 0.0, 1), Root::new(-1.0, 0.0, 1)]);
    check(&PiecewiseSpace::spliced(0.0, &[(t, 2.0), (h, 1.0)]).unwrap());
}
