//! Acceptance gate: one line per criterion, PASS or FAIL with the numbers
//! behind it. Criteria listed in `UNATTAINABLE` are still computed and
//! reported; only they are allowed to fail. Runs without the test
//! harness so the lines are always printed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eclen::{
    bernstein_basis, bessel_first_zero, build_family, critical_length, critical_length_roots,
    ec_test, eval_curve, irr_check, solve_closed_form, weight_system, wronskian_min, CharPoly,
    ClosedForm, CritLenConfig, ECTestConfig, PiecewiseSpace, Root, RootSet, Verdict,
};
use eclen_cli::instances::{compare, random_instance};
use eclen_cli::region::{boundary_at, BoundaryKind, Splice};

/// Criterion 6 asks for a boundary at T = 2.2, where cot T > −1 and the
/// splice is EC for every H: there is no boundary to find.
const UNATTAINABLE: &[usize] = &[6];

type Outcome = (bool, String);

fn roots(r: Vec<Root>) -> RootSet {
    RootSet::new(r).unwrap()
}

/// `x^{n−1}(x² + 1)`.
fn cycloidal(n: usize) -> CharPoly {
    let mut c = vec![0.0; n + 1];
    c[n - 1] = 1.0;
    CharPoly::new(c).unwrap()
}

/// `(x² − 1)(x² + b²)`.
fn hyp_trig(b: f64) -> CharPoly {
    CharPoly::new(vec![-b * b, 0.0, b * b - 1.0, 0.0]).unwrap()
}

fn length(p: &CharPoly) -> f64 {
    critical_length(p, &CritLenConfig::default())
        .unwrap()
        .value
        .unwrap()
}

fn length_roots(r: &RootSet) -> f64 {
    critical_length_roots(r, &CritLenConfig::default())
        .unwrap()
        .value
        .unwrap()
}

fn cycloidal_table() -> Outcome {
    let want = [
        PI,
        2.0 * PI,
        2.0 * PI,
        8.9868,
        8.9868,
        11.5269,
        11.5269,
        13.9758,
        13.9758,
    ];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (i, w) in want.iter().enumerate() {
        let n = i + 1;
        let err = (length(&cycloidal(n)) - w).abs();
        ok &= err <= if n <= 3 { 1e-6 } else { 1e-3 };
        worst = worst.max(err);
    }
    (ok, format!("n = 1..9, worst error {worst:.2e}"))
}

fn bessel_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        let j = bessel_first_zero(k as f64 - 0.5).unwrap().value;
        worst = worst.max((length(&cycloidal(2 * k)) - 2.0 * j).abs());
    }
    (worst <= 1e-6, format!("k = 1..4, worst error {worst:.2e}"))
}

fn hyp_trig_quartic() -> Outcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for b in [0.5, 1.0, 2.0] {
        let v = length(&hyp_trig(b));
        let o = solve_closed_form(ClosedForm::Zh3, 1.0, b).unwrap().value;
        worst = worst.max((v - o).abs());
        ok &= (v - o).abs() <= 1e-6 && v > PI / b && v < 2.0 * PI / b;
    }
    (ok, format!("b = 0.5, 1, 2, worst error {worst:.2e}"))
}

fn double_trig() -> Outcome {
    let low = length(&CharPoly::new(vec![4.0, 0.0, 5.0, 0.0]).unwrap());
    let high = length(&CharPoly::new(vec![16.0, 0.0, 17.0, 0.0]).unwrap());
    let o = solve_closed_form(ClosedForm::DtrigHigh, 1.0, 4.0)
        .unwrap()
        .value;
    let (e1, e2) = ((low - PI).abs(), (high - o).abs());
    (
        e1 <= 1e-6 && e2 <= 1e-6,
        format!("b = 2 error {e1:.2e}, b = 4 error {e2:.2e}"),
    )
}

fn damped_quartic() -> Outcome {
    let (a, b) = (1.0f64, 1.0f64);
    let s = a * a + b * b;
    let v = length(&CharPoly::new(vec![s * s, 0.0, 2.0 * (b * b - a * a), 0.0]).unwrap());
    let o = solve_closed_form(ClosedForm::Zs9, a, b).unwrap().value;
    let e = (v - o).abs();
    (e <= 1e-6, format!("{v:.10} vs {o:.10}, error {e:.2e}"))
}

fn splice_boundary() -> Outcome {
    let sp = Splice::parse(&["trig:T".into(), "hyp:H".into()], 1).unwrap();
    let cfg = ECTestConfig {
        tol_zero: 1e-16,
        tol_det: 1e-16,
        keep_levels: false,
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [2.2f64, 2.5, 2.8] {
        let b = boundary_at(&sp, t, 0.0, 6.0, 60, 1e-12, &cfg);
        if b.kind == BoundaryKind::Crossing {
            let r = (1.0 / t.tan() + 1.0 / b.y.tanh()).abs();
            ok &= r <= 1e-5;
            parts.push(format!("T = {t}: H* = {:.8}, residual {r:.1e}", b.y));
        } else {
            ok = false;
            parts.push(format!("T = {t}: no boundary ({:?})", b.kind));
        }
    }
    (ok, parts.join("; "))
}

fn trig_pair() -> Outcome {
    let r = roots(vec![
        Root::new(0.0, 1.0, 1),
        Root::new(0.0, 2.0, 1),
        Root::new(0.0, 3.0, 1),
    ]);
    let v = length_roots(&r);
    let e = (v - PI).abs();
    (e <= 1e-5, format!("{v:.10}, error {e:.2e}"))
}

fn scaling_law() -> Outcome {
    let families: [fn(f64) -> RootSet; 2] = [
        |b| roots(vec![Root::new(0.0, b, 1), Root::new(0.0, 0.0, 2)]),
        |b| {
            roots(vec![
                Root::new(-b, 0.0, 1),
                Root::new(b, 0.0, 1),
                Root::new(0.0, 2.0 * b, 1),
            ])
        },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bs: Vec<f64> = (0..5).map(|_| rng.random_range(0.3..3.0)).collect();
    let mut worst: f64 = 0.0;
    for f in families {
        let unit = length_roots(&f(1.0));
        for &b in &bs {
            let rel = (length_roots(&f(b)) * b - unit).abs() / unit;
            worst = worst.max(rel);
        }
    }
    (
        worst <= 1e-6,
        format!("10 cases, worst relative error {worst:.2e}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = ECTestConfig::default();
    let (mut agree, mut disagree, mut dead) = (0, 0, 0);
    for _ in 0..50 {
        match compare(&random_instance(&mut rng), &cfg, 200)
            .unwrap()
            .agree
        {
            Some(true) => agree += 1,
            Some(false) => disagree += 1,
            None => dead += 1,
        }
    }
    let ok = disagree == 0 && (dead as f64) < 0.05 * 50.0;
    (
        ok,
        format!("{agree} agree, {disagree} disagree, {dead} inconclusive"),
    )
}

fn wronskian_cross_check() -> Outcome {
    let mut cases: Vec<CharPoly> = (1..=4).map(cycloidal).collect();
    cases.extend([0.5, 1.0, 2.0].map(hyp_trig));
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for p in &cases {
        let d = length(p);
        let kmax = p.degree() - 2;
        match wronskian_min(p, kmax, 3.0 * d, d / 4096.0).unwrap() {
            Some(w) => worst = worst.max((w.value - d).abs()),
            None => ok = false,
        }
    }
    (
        ok && worst <= 1e-6,
        format!("{} kernels, worst error {worst:.2e}", cases.len()),
    )
}

// 3.14 is the interval from the criterion, not an approximation of π
#[allow(clippy::approx_constant)]
fn design_properties() -> Outcome {
    let (a, b) = (0.0, 3.14);
    let fam = build_family(&roots(vec![Root::new(0.0, 1.0, 1), Root::new(0.0, 0.0, 3)]));
    let nb = bernstein_basis(&fam, a, b).unwrap();
    let n = nb.dim() - 1;
    let mut unity: f64 = 0.0;
    for s in 0..=100 {
        let v = nb.values(a + (b - a) * s as f64 / 100.0).unwrap();
        unity = unity.max((v.iter().sum::<f64>() - 1.0).abs());
    }
    let mut lowest = f64::INFINITY;
    for s in 1..=128 {
        let v = nb.values(a + (b - a) * s as f64 / 129.0).unwrap();
        lowest = lowest.min(v.into_iter().fold(f64::INFINITY, f64::min));
    }
    let tau = 1e-9;
    let mut mult_ok = true;
    for i in 0..=n {
        let da = nb.derivatives(i, a, n).unwrap();
        let db = nb.derivatives(i, b, n).unwrap();
        let scale = da.iter().chain(&db).fold(0.0f64, |m, x| m.max(x.abs()));
        mult_ok &= da[..i].iter().all(|x| x.abs() <= tau * scale) && da[i].abs() > tau * scale;
        mult_ok &=
            db[..n - i].iter().all(|x| x.abs() <= tau * scale) && db[n - i].abs() > tau * scale;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let control: Vec<Vec<f64>> = (0..=n)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let curve = eval_curve(&nb, &control, 50).unwrap();
    let dist = |p: &[f64], q: &[f64]| {
        p.iter()
            .zip(q)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    let ends = dist(&curve[0], &control[0]).max(dist(&curve[49], &control[n]));
    let ok = unity <= 1e-10 && lowest >= 0.0 && mult_ok && ends <= 1e-9;
    (
        ok,
        format!("unity {unity:.1e}, min value {lowest:.1e}, multiplicities {mult_ok}, endpoints {ends:.1e}"),
    )
}

fn irr_consistency() -> Outcome {
    let cfg = ECTestConfig {
        keep_levels: true,
        ..ECTestConfig::default()
    };
    let poly = build_family(&roots(vec![Root::new(0.0, 0.0, 3)]));
    let trig = build_family(&roots(vec![Root::new(0.0, 1.0, 1), Root::new(0.0, 0.0, 1)]));
    let spaces = [
        PiecewiseSpace::uniform(&poly, 0.0, &[0.4], 1.0).unwrap(),
        PiecewiseSpace::uniform_equal(&trig, 0.0, 3.0, 2).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for sp in &spaces {
        let rep = ec_test(sp, &cfg);
        assert_eq!(rep.verdict, Verdict::EC);
        let ws = weight_system(&rep).unwrap();
        worst = worst.max(irr_check(&ws, &rep, 21).unwrap());
    }
    (worst <= 1e-6, format!("worst residual {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("cycloidal table", cycloidal_table),
        ("Bessel identity", bessel_identity),
        ("hyperbolic-trig quartic", hyp_trig_quartic),
        ("double trig", double_trig),
        ("damped quartic", damped_quartic),
        ("splice boundary", splice_boundary),
        ("trig pair", trig_pair),
        ("scaling law", scaling_law),
        ("oracle equivalence", oracle_equivalence),
        ("Wronskian cross-check", wronskian_cross_check),
        ("design properties", design_properties),
        ("IRR consistency", irr_consistency),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        let (ok, detail) = f();
        let mark = if ok {
            "PASS"
        } else if UNATTAINABLE.contains(&id) {
            "FAIL (known)"
        } else {
            unexpected.push(id);
            "FAIL"
        };
        println!("criterion {id:2} {name}: {mark}  {detail}");
    }
    if !unexpected.is_empty() {
        eprintln!("failed criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
