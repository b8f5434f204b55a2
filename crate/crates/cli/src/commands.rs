use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use eclen::critlen::{SEARCH_TOL_DET, SEARCH_TOL_ZERO};
use eclen::oracles::{brute_force_ec, wronskian_min, wronskian_scan, ClosedForm};
use eclen::{
    bernstein_basis, bessel_first_zero, critical_length_roots, ec_test, eval_curve,
    solve_closed_form, CritLenConfig, ECTestConfig, LengthStatus, Operator, PiecewiseSpace,
    Verdict, DEFAULT_CLUSTER_TOL,
};

use crate::instances::{compare, random_instance};
use crate::operator::{parse_operator, OperatorArgs};
use crate::output::{csv_row, json, num, svg};
use crate::region::{boundary, centres, raster, Splice};
use crate::sweep::{deflate, params, sweep, Family};
use crate::CliError;

const ROOT_HELP: &str = "Operators: --coeffs a0,a1,... gives the monic polynomial x^d + a_{d-1}x^{d-1} + ... + a0; \
--roots takes re[,im]:mult[xK] tokens (conjugates implied, xK repeats), e.g. --roots 0:1x3 0,1:1 for \
{1, x, x^2, cos, sin}; --operator takes trigN = x^{N-1}(x^2+1), hypN = x^{N-1}(x^2-1) or JSON.";

#[derive(Debug, Parser)]
#[command(name = "eclen", version, about = "Critical lengths of kernels of constant-coefficient differential operators", after_help = ROOT_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Settings shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Zero/positivity threshold of the EC test [default: 1e-9 for ectest,
    /// 1e-16 inside length searches]
    #[arg(long, global = true)]
    pub tol_test: Option<f64>,
    /// Bracket width at which the length bisection stops
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_dicho: f64,
    /// ℓ0 = factor · π / (largest imaginary part of a root); in (0, 1)
    #[arg(long, global = true, default_value_t = 0.95)]
    pub ell0_factor: f64,
    /// Largest rough-estimate step before giving up
    #[arg(long, global = true, default_value_t = 64)]
    pub k_max: usize,
    /// Output format (each command has its own default)
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Seed for randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 picks one per core
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

impl RunConfig {
    fn check(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol_test {
            if !(t > 0.0) {
                return Err(CliError::Usage("--tol-test must be positive".into()));
            }
        }
        if !(self.tol_dicho > 0.0) {
            return Err(CliError::Usage("--tol-dicho must be positive".into()));
        }
        if !(self.ell0_factor > 0.0 && self.ell0_factor < 1.0) {
            return Err(CliError::Usage("--ell0-factor must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Test thresholds for length searches.
    pub fn search_test(&self) -> ECTestConfig {
        match self.tol_test {
            Some(t) => ECTestConfig {
                tol_zero: t,
                tol_det: t,
                keep_levels: false,
            },
            None => ECTestConfig {
                tol_zero: SEARCH_TOL_ZERO,
                tol_det: SEARCH_TOL_DET,
                keep_levels: false,
            },
        }
    }

    pub fn critlen(&self) -> CritLenConfig {
        CritLenConfig {
            ell0_factor: self.ell0_factor,
            tol_dicho: self.tol_dicho,
            k_max: self.k_max,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            test: self.search_test(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical length (or critical length for design) of an operator
    Critlen {
        #[command(flatten)]
        op: OperatorArgs,
        /// Critical length for design: use p(x)/x
        #[arg(long)]
        design: bool,
        /// Include every test run in the output
        #[arg(long)]
        trace: bool,
    },
    /// EC test on a piecewise space; exit 0 EC, 1 NotEC, 2 Inconclusive
    Ectest {
        #[command(flatten)]
        op: OperatorArgs,
        /// Sections as JSON: [{"operator": "trig1", "length": 2.5}, ...]
        #[arg(long, conflicts_with_all = ["operator", "coeffs", "roots"])]
        space: Option<String>,
        /// Start of the first section for --space
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true)]
        interval: Option<Vec<f64>>,
        /// Interior knots
        #[arg(long, num_args = 1.., allow_negative_numbers = true, conflicts_with = "sections")]
        knots: Vec<f64>,
        /// Split the interval into this many equal sections
        #[arg(long)]
        sections: Option<usize>,
        /// Step 0 determinant threshold
        #[arg(long, default_value_t = 1e-12)]
        tol_det: f64,
        /// Keep every level's coefficients in the report
        #[arg(long)]
        keep_levels: bool,
    },
    /// Critical lengths over a one-parameter family; CSV param,value,mu,ell0
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long)]
        design: bool,
    },
    /// Verdict raster over the two lengths of a splice, with its boundary;
    /// CSV x,y,verdict,failing_det_index
    Region {
        /// Two pieces kind:NAME with kind trig or hyp, e.g. trig:T hyp:H
        #[arg(long, num_args = 2, required = true)]
        splice: Vec<String>,
        /// Pieces are x^{n-1}(x^2 ± 1)
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.0, 3.3])]
        x_range: Vec<f64>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.0, 3.0])]
        y_range: Vec<f64>,
        /// Cells per axis
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 1e-10)]
        refine_tol: f64,
        /// Boundary CSV x,y,kind,failing_det_index,cusp
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Raster CSV (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bézier-like curve in the Bernstein basis of an operator's kernel
    Curve {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true, allow_hyphen_values = true)]
        interval: Vec<f64>,
        /// Control points, one per line, coordinates separated by commas
        #[arg(long)]
        control: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Reference values
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CaseArg {
    Zh3,
    DtrigLow,
    DtrigHigh,
    Zs9,
    Ht1,
}

impl From<CaseArg> for ClosedForm {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Zh3 => ClosedForm::Zh3,
            CaseArg::DtrigLow => ClosedForm::DtrigLow,
            CaseArg::DtrigHigh => ClosedForm::DtrigHigh,
            CaseArg::Zs9 => ClosedForm::Zs9,
            CaseArg::Ht1 => ClosedForm::Ht1,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// First positive zero of the Bessel function J_order
    Bessel {
        #[arg(long)]
        order: f64,
    },
    /// Root of a closed-form critical-length equation; ht1 takes T as --a
    ClosedForm {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        b: f64,
    },
    /// First zero of W(S, ..., S^(k)); minimum over k <= n-1 without --k
    Wronskian {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        h_max: f64,
        /// Scan step [default: h_max/4096]
        #[arg(long)]
        step: Option<f64>,
    },
    /// Two-point determinant scan on a grid
    Brute {
        #[command(flatten)]
        op: OperatorArgs,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true, allow_hyphen_values = true)]
        interval: Vec<f64>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        knots: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
    /// EC test against the determinant scan on seeded random spaces
    Agree {
        #[arg(long, default_value_t = 50)]
        cases: usize,
        #[arg(long, default_value_t = 200)]
        grid: usize,
    },
}

#[derive(Debug, Deserialize)]
struct SectionJson {
    operator: serde_json::Value,
    length: f64,
}

fn space_from_json(s: &str, start: f64) -> Result<PiecewiseSpace, CliError> {
    let secs: Vec<SectionJson> =
        serde_json::from_str(s).map_err(|e| CliError::Data(format!("bad --space JSON: {e}")))?;
    let pieces = secs
        .iter()
        .map(|sec| {
            let op = match &sec.operator {
                serde_json::Value::String(name) => parse_operator(name)?,
                v => parse_operator(&v.to_string())?,
            };
            Ok((op, sec.length))
        })
        .collect::<Result<Vec<(Operator, f64)>, CliError>>()?;
    Ok(PiecewiseSpace::make_spliced(start, &pieces)?)
}

fn interval(v: &Option<Vec<f64>>) -> Result<(f64, f64), CliError> {
    match v.as_deref() {
        Some([a, b]) if a < b => Ok((*a, *b)),
        Some(_) => Err(CliError::Data("interval needs a < b".into())),
        None => Err(CliError::Usage("--interval is required".into())),
    }
}

fn read_control(path: &PathBuf) -> Result<Vec<Vec<f64>>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split([',', ' ', '\t'])
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect();
        match row {
            Ok(r) => pts.push(r),
            // a header line
            Err(_) if pts.is_empty() => continue,
            Err(_) => return Err(CliError::Data(format!("bad control point line '{line}'"))),
        }
    }
    if pts.is_empty() {
        return Err(CliError::Data("no control points".into()));
    }
    Ok(pts)
}

#[derive(Serialize)]
struct CritlenOut<'a> {
    status: LengthStatus,
    value: Option<f64>,
    bracket: Option<[f64; 2]>,
    mu: usize,
    ell0: f64,
    max_imag: f64,
    design: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [eclen::Probe]>,
}

fn exit_for(v: Verdict) -> i32 {
    match v {
        Verdict::EC => 0,
        Verdict::NotEC => 1,
        Verdict::Inconclusive => 2,
    }
}

pub(crate) fn execute(cli: &Cli) -> Result<(String, i32), CliError> {
    let cfg = &cli.config;
    cfg.check()?;
    match &cli.command {
        Command::Critlen { op, design, trace } => {
            let mut roots = op.roots()?;
            if *design {
                roots = deflate(&roots)?;
            }
            let mut r = critical_length_roots(&roots, &cfg.critlen())?;
            r.design = *design;
            let out = CritlenOut {
                status: r.status,
                value: r.value,
                bracket: r.bracket,
                mu: r.mu,
                ell0: r.ell0,
                max_imag: r.max_imag,
                design: r.design,
                trace: trace.then_some(&r.trace[..]),
            };
            Ok((json(&out), 0))
        }
        Command::Ectest {
            op,
            space,
            start,
            interval: iv,
            knots,
            sections,
            tol_det,
            keep_levels,
        } => {
            let sp = match space {
                Some(s) => space_from_json(s, *start)?,
                None => {
                    let fam = op.family()?;
                    let (a, b) = interval(iv)?;
                    match sections {
                        Some(q) => PiecewiseSpace::uniform_equal(&fam, a, b, *q)?,
                        None => PiecewiseSpace::uniform(&fam, a, knots, b)?,
                    }
                }
            };
            let test = ECTestConfig {
                tol_zero: cfg.tol_test.unwrap_or(ECTestConfig::default().tol_zero),
                tol_det: *tol_det,
                keep_levels: *keep_levels,
            };
            let rep = ec_test(&sp, &test);
            Ok((json(&rep), exit_for(rep.verdict)))
        }
        Command::Sweep {
            family,
            from,
            to,
            steps,
            design,
        } => {
            let rows = sweep(
                *family,
                &params(*from, *to, *steps),
                &cfg.critlen(),
                *design,
            )?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Json => Ok((json(&rows), 0)),
                Format::Csv => {
                    let mut s =
                        csv_row(&["param".into(), "value".into(), "mu".into(), "ell0".into()]);
                    for r in rows {
                        s += &csv_row(&[num(r.param), num(r.value), r.mu.to_string(), num(r.ell0)]);
                    }
                    Ok((s, 0))
                }
                Format::Svg => Err(CliError::Usage("sweep writes CSV or JSON".into())),
            }
        }
        Command::Region {
            splice,
            n,
            x_range,
            y_range,
            grid,
            refine_tol,
            boundary: bpath,
            out,
        } => {
            let sp = Splice::parse(splice, *n)?;
            if *grid == 0 || !(x_range[0] < x_range[1]) || !(y_range[0] < y_range[1]) {
                return Err(CliError::Usage(
                    "need a positive grid and increasing ranges".into(),
                ));
            }
            let test = cfg.search_test();
            let xs = centres(x_range[0], x_range[1], *grid);
            let ys = centres(y_range[0], y_range[1], *grid);
            let cells = raster(&sp, &xs, &ys, &test);
            let mut s = csv_row(&[
                sp.names[0].clone(),
                sp.names[1].clone(),
                "verdict".into(),
                "failing_det_index".into(),
            ]);
            for c in &cells {
                s += &csv_row(&[
                    num(c.x),
                    num(c.y),
                    format!("{:?}", c.verdict),
                    c.failing.clone(),
                ]);
            }
            if let Some(path) = bpath {
                let pts = boundary(&sp, &xs, &ys, &cells, *refine_tol, &test);
                let mut b = csv_row(&[
                    sp.names[0].clone(),
                    sp.names[1].clone(),
                    "kind".into(),
                    "failing_det_index".into(),
                    "cusp".into(),
                ]);
                for p in pts {
                    let kind = serde_json::to_value(p.kind)
                        .unwrap()
                        .as_str()
                        .unwrap()
                        .to_string();
                    b += &csv_row(&[
                        num(p.x),
                        num(p.y),
                        kind,
                        p.failing,
                        u8::from(p.cusp).to_string(),
                    ]);
                }
                std::fs::write(path, b)?;
            }
            match out {
                Some(path) => {
                    std::fs::write(path, s)?;
                    Ok((String::new(), 0))
                }
                None => Ok((s, 0)),
            }
        }
        Command::Curve {
            op,
            interval: iv,
            control,
            samples,
        } => {
            let (a, b) = interval(&Some(iv.clone()))?;
            let nb = bernstein_basis(&op.family()?, a, b)?;
            let ctrl = read_control(control)?;
            let curve = eval_curve(&nb, &ctrl, *samples)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Svg => {
                    if ctrl[0].len() != 2 {
                        return Err(CliError::Data(
                            "SVG output needs planar control points".into(),
                        ));
                    }
                    Ok((svg(&curve, &ctrl), 0))
                }
                Format::Json => Ok((json(&curve), 0)),
                Format::Csv => {
                    let d = ctrl[0].len();
                    let mut head = vec!["t".to_string()];
                    head.extend((0..d).map(|i| {
                        if d <= 3 {
                            ["x", "y", "z"][i].to_string()
                        } else {
                            format!("p{i}")
                        }
                    }));
                    let mut s = csv_row(&head);
                    for (j, pt) in curve.iter().enumerate() {
                        let t = if j + 1 == curve.len() {
                            b
                        } else {
                            a + (b - a) * j as f64 / (curve.len() - 1) as f64
                        };
                        let mut row = vec![num(t)];
                        row.extend(pt.iter().map(|v| num(*v)));
                        s += &csv_row(&row);
                    }
                    Ok((s, 0))
                }
            }
        }
        Command::Oracle { which } => oracle(cfg, which),
    }
}

fn oracle(cfg: &RunConfig, which: &OracleCommand) -> Result<(String, i32), CliError> {
    match which {
        OracleCommand::Bessel { order } => Ok((json(&bessel_first_zero(*order)?), 0)),
        OracleCommand::ClosedForm { case, a, b } => {
            Ok((json(&solve_closed_form((*case).into(), *a, *b)?), 0))
        }
        OracleCommand::Wronskian { op, k, h_max, step } => {
            let p = match op.resolve()? {
                Operator::Coeffs(p) => p,
                Operator::Roots(r) => eclen::CharPoly::from_roots(&r),
            };
            let step = step.unwrap_or(h_max / 4096.0);
            let v = match k {
                Some(k) => wronskian_scan(&p, *k, *h_max, step)?,
                None => wronskian_min(&p, p.degree() - 2, *h_max, step)?,
            };
            Ok((json(&v), 0))
        }
        OracleCommand::Brute {
            op,
            interval: iv,
            knots,
            grid,
        } => {
            let (a, b) = interval(&Some(iv.clone()))?;
            let sp = PiecewiseSpace::uniform(&op.family()?, a, knots, b)?;
            let v = brute_force_ec(&sp, *grid)?;
            Ok((json(&serde_json::json!({ "verdict": v })), exit_for(v)))
        }
        OracleCommand::Agree { cases, grid } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            let test = ECTestConfig {
                tol_zero: cfg.tol_test.unwrap_or(1e-9),
                ..ECTestConfig::default()
            };
            let insts: Vec<_> = (0..*cases).map(|_| random_instance(&mut rng)).collect();
            let rows = insts
                .iter()
                .map(|i| compare(i, &test, *grid))
                .collect::<Result<Vec<_>, _>>()?;
            let agree = rows.iter().filter(|r| r.agree == Some(true)).count();
            let disagree = rows.iter().filter(|r| r.agree == Some(false)).count();
            let out = serde_json::json!({
                "cases": cases,
                "agree": agree,
                "disagree": disagree,
                "inconclusive": cases - agree - disagree,
                "rows": rows,
            });
            Ok((json(&out), i32::from(disagree > 0)))
        }
    }
}
