//! Two-parameter splice scans: a verdict raster over section lengths and
//! the boundary of the EC region, refined column by column.

use rayon::prelude::*;
use serde::Serialize;

use eclen::{
    ec_test, ECTestConfig, ECTestReport, Failure, FamilyBasis, PiecewiseSpace, Root, RootSet,
    Verdict,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PieceKind {
    Trig,
    Hyp,
}

impl PieceKind {
    /// `x^{n-1}(x² ± 1)`.
    pub fn family(self, n: usize) -> FamilyBasis {
        let mut r = match self {
            PieceKind::Trig => vec![Root::new(0.0, 1.0, 1)],
            PieceKind::Hyp => vec![Root::new(-1.0, 0.0, 1), Root::new(1.0, 0.0, 1)],
        };
        if n > 1 {
            r.push(Root::new(0.0, 0.0, n - 1));
        }
        eclen::build_family(&RootSet::new(r).expect("fixed roots"))
    }
}

/// Two sections, `kind_0` of length `x` then `kind_1` of length `y`.
#[derive(Debug, Clone)]
pub struct Splice {
    pub kinds: [PieceKind; 2],
    pub names: [String; 2],
    fams: [FamilyBasis; 2],
}

impl Splice {
    pub fn new(kinds: [PieceKind; 2], names: [String; 2], n: usize) -> Self {
        let fams = [kinds[0].family(n), kinds[1].family(n)];
        Self { kinds, names, fams }
    }

    /// From tokens like `trig:T hyp:H`.
    pub fn parse(tokens: &[String], n: usize) -> Result<Self, CliError> {
        if tokens.len() != 2 {
            return Err(CliError::Usage(
                "a splice needs exactly two pieces, e.g. trig:T hyp:H".into(),
            ));
        }
        let piece = |t: &str| -> Result<(PieceKind, String), CliError> {
            let (k, name) = t.split_once(':').unwrap_or((t, ""));
            let kind = match k {
                "trig" => PieceKind::Trig,
                "hyp" => PieceKind::Hyp,
                _ => {
                    return Err(CliError::Data(format!(
                        "unknown piece kind '{k}' (trig or hyp)"
                    )))
                }
            };
            let name = if name.is_empty() {
                k.to_uppercase()
            } else {
                name.to_string()
            };
            Ok((kind, name))
        };
        let (k0, n0) = piece(&tokens[0])?;
        let (k1, n1) = piece(&tokens[1])?;
        if n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        Ok(Self::new([k0, k1], [n0, n1], n))
    }

    pub fn space(&self, x: f64, y: f64) -> eclen::Result<PiecewiseSpace> {
        PiecewiseSpace::spliced(0.0, &[(self.fams[0].clone(), x), (self.fams[1].clone(), y)])
    }

    pub fn test(&self, x: f64, y: f64, cfg: &ECTestConfig) -> ECTestReport {
        match self.space(x, y) {
            Ok(sp) => ec_test(&sp, cfg),
            Err(e) => ECTestReport {
                verdict: Verdict::Inconclusive,
                failure: Some(Failure::Numerical {
                    reason: e.to_string(),
                }),
                margins: vec![],
                step0_ratios: vec![],
                warnings: vec![],
                levels: None,
                basis: None,
            },
        }
    }
}

/// Which quantity failed: the Step 0 determinant index `i`, `L<p>` for a
/// level-`p` coefficient, or empty.
pub fn failing_index(rep: &ECTestReport) -> String {
    match &rep.failure {
        Some(Failure::Step0 { i, .. }) => i.to_string(),
        Some(Failure::Level { level, .. }) => format!("L{level}"),
        Some(Failure::LocalBasis { .. }) => "local".into(),
        Some(Failure::Numerical { .. }) => "numerical".into(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub x: f64,
    pub y: f64,
    pub verdict: Verdict,
    pub failing: String,
}

/// Cell centres of `[lo, hi]` split into `count` cells.
pub fn centres(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / count as f64)
        .collect()
}

/// Row-major raster (`y` outer, `x` inner).
pub fn raster(sp: &Splice, xs: &[f64], ys: &[f64], cfg: &ECTestConfig) -> Vec<Cell> {
    let pairs: Vec<(f64, f64)> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
        .collect();
    pairs
        .par_iter()
        .map(|&(x, y)| {
            let rep = sp.test(x, y, cfg);
            Cell {
                x,
                y,
                verdict: rep.verdict,
                failing: failing_index(&rep),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// EC below a refined crossing.
    Crossing,
    /// EC at every scanned `y`.
    Ceiling,
    /// EC at no scanned `y`.
    Empty,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryPoint {
    pub x: f64,
    /// `NaN` when there is no EC cell in the column.
    pub y: f64,
    pub kind: BoundaryKind,
    /// Failing quantity just above the boundary.
    pub failing: String,
    /// The failing quantity differs from the previous crossing's.
    pub cusp: bool,
}

/// Upper boundary of the EC region in one column, given verdicts at
/// increasing `ys`; the first failing cell is bracketed and bisected to
/// `tol`.
pub fn column_boundary(
    sp: &Splice,
    x: f64,
    ys: &[f64],
    verdicts: &[Verdict],
    tol: f64,
    cfg: &ECTestConfig,
) -> BoundaryPoint {
    let first_fail = verdicts.iter().position(|v| *v != Verdict::EC);
    let r = match first_fail {
        None => {
            return BoundaryPoint {
                x,
                y: *ys.last().unwrap(),
                kind: BoundaryKind::Ceiling,
                failing: String::new(),
                cusp: false,
            }
        }
        Some(0) => {
            let rep = sp.test(x, ys[0], cfg);
            return BoundaryPoint {
                x,
                y: f64::NAN,
                kind: BoundaryKind::Empty,
                failing: failing_index(&rep),
                cusp: false,
            };
        }
        Some(r) => r,
    };
    let (mut lo, mut hi) = (ys[r - 1], ys[r]);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sp.test(x, mid, cfg).verdict == Verdict::EC {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let failing = failing_index(&sp.test(x, hi, cfg));
    BoundaryPoint {
        x,
        y: 0.5 * (lo + hi),
        kind: BoundaryKind::Crossing,
        failing,
        cusp: false,
    }
}

/// Boundary for one `x`, scanning `grid` cells of `[y_lo, y_hi]` first.
pub fn boundary_at(
    sp: &Splice,
    x: f64,
    y_lo: f64,
    y_hi: f64,
    grid: usize,
    tol: f64,
    cfg: &ECTestConfig,
) -> BoundaryPoint {
    let ys = centres(y_lo, y_hi, grid);
    let verdicts: Vec<Verdict> = ys.iter().map(|&y| sp.test(x, y, cfg).verdict).collect();
    column_boundary(sp, x, &ys, &verdicts, tol, cfg)
}

/// Boundary over all raster columns; cusp candidates are marked where the
/// failing quantity changes between consecutive crossings.
pub fn boundary(
    sp: &Splice,
    xs: &[f64],
    ys: &[f64],
    cells: &[Cell],
    tol: f64,
    cfg: &ECTestConfig,
) -> Vec<BoundaryPoint> {
    let mut pts: Vec<BoundaryPoint> = (0..xs.len())
        .into_par_iter()
        .map(|c| {
            let verdicts: Vec<Verdict> = (0..ys.len())
                .map(|r| cells[r * xs.len() + c].verdict)
                .collect();
            column_boundary(sp, xs[c], ys, &verdicts, tol, cfg)
        })
        .collect();
    let mut last: Option<String> = None;
    for p in pts.iter_mut().filter(|p| p.kind == BoundaryKind::Crossing) {
        if let Some(prev) = &last {
            p.cusp = *prev != p.failing;
        }
        last = Some(p.failing.clone());
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ECTestConfig {
        ECTestConfig {
            tol_zero: 1e-16,
            tol_det: 1e-16,
            keep_levels: false,
        }
    }

    fn splice() -> Splice {
        Splice::parse(&["trig:T".into(), "hyp:H".into()], 1).unwrap()
    }

    #[test]
    fn parse_templates() {
        let s = splice();
        assert_eq!(s.kinds, [PieceKind::Trig, PieceKind::Hyp]);
        assert_eq!(s.names, ["T".to_string(), "H".to_string()]);
        assert!(Splice::parse(&["trig:T".into()], 1).is_err());
        assert!(Splice::parse(&["poly:T".into(), "hyp:H".into()], 1).is_err());
    }

    #[test]
    fn boundary_columns() {
        let s = splice();
        let b = boundary_at(&s, 0.5, 0.0, 3.0, 30, 1e-10, &cfg());
        assert_eq!(b.kind, BoundaryKind::Ceiling);
        let b = boundary_at(&s, 2.5, 0.0, 3.0, 30, 1e-10, &cfg());
        assert_eq!(b.kind, BoundaryKind::Crossing);
        assert!(
            (1.0 / 2.5f64.tan() + 1.0 / b.y.tanh()).abs() < 1e-8,
            "{}",
            b.y
        );
        let b = boundary_at(&s, 3.2, 0.0, 3.0, 30, 1e-10, &cfg());
        assert_eq!(b.kind, BoundaryKind::Empty);
    }

    #[test]
    fn raster_is_row_major() {
        let s = splice();
        let xs = centres(2.0, 3.0, 3);
        let ys = centres(0.0, 2.0, 2);
        let cells = raster(&s, &xs, &ys, &cfg());
        assert_eq!(cells.len(), 6);
        assert_eq!((cells[1].x, cells[1].y), (xs[1], ys[0]));
        let b = boundary(&s, &xs, &ys, &cells, 1e-6, &cfg());
        assert_eq!(b.len(), 3);
    }
}
