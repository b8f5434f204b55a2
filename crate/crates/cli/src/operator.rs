//! Operator specifications: coefficient lists, root shorthand, names, JSON.
//!
//! Root shorthand is `re[,im]:mult[xK]`: the root `re + i·im` (its conjugate
//! is implied) with multiplicity `mult`, repeated `K` times. Repeated roots
//! are merged, so `0:1x3` is the same as `0:3`.

use serde::Deserialize;

use eclen::{CharPoly, FamilyBasis, Operator, Root, RootSet, DEFAULT_CLUSTER_TOL};

use crate::CliError;

pub fn parse_root_token(tok: &str) -> Result<(f64, f64, usize), CliError> {
    let bad = || CliError::Data(format!("bad root '{tok}', expected re[,im]:mult[xK]"));
    let (z, m) = tok.split_once(':').ok_or_else(bad)?;
    let (re, im) = match z.split_once(',') {
        Some((r, i)) => (
            r.trim().parse().map_err(|_| bad())?,
            i.trim().parse::<f64>().map_err(|_| bad())?,
        ),
        None => (z.trim().parse().map_err(|_| bad())?, 0.0),
    };
    let (mult, rep) = match m.split_once('x') {
        Some((a, k)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            k.trim().parse::<usize>().map_err(|_| bad())?,
        ),
        None => (m.trim().parse::<usize>().map_err(|_| bad())?, 1),
    };
    if mult == 0 || rep == 0 {
        return Err(bad());
    }
    Ok((re, im.abs(), mult * rep))
}

pub fn parse_roots<S: AsRef<str>>(tokens: &[S]) -> Result<RootSet, CliError> {
    let mut roots: Vec<Root> = Vec::new();
    for t in tokens {
        for piece in t.as_ref().split_whitespace() {
            let (re, im, m) = parse_root_token(piece)?;
            match roots.iter_mut().find(|r| r.re == re && r.im == im) {
                Some(r) => r.mult += m,
                None => roots.push(Root::new(re, im, m)),
            }
        }
    }
    Ok(RootSet::new(roots)?)
}

pub fn parse_coeffs(s: &str) -> Result<CharPoly, CliError> {
    let c: Vec<f64> = s
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Data(format!("bad coefficient '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    Ok(CharPoly::new(c)?)
}

/// `trigN`: `x^{N-1}(x² + 1)`; `hypN`: `x^{N-1}(x² - 1)`.
pub fn named(name: &str) -> Result<RootSet, CliError> {
    let bad = || CliError::Data(format!("unknown operator '{name}' (try trigN or hypN)"));
    let (head, n) = if let Some(n) = name.strip_prefix("trig") {
        ((0.0, 1.0), n)
    } else if let Some(n) = name.strip_prefix("hyp") {
        ((1.0, 0.0), n)
    } else {
        return Err(bad());
    };
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 {
        return Err(bad());
    }
    let mut roots = vec![Root::new(head.0, head.1, 1)];
    if head.1 == 0.0 {
        roots.push(Root::new(-head.0, 0.0, 1));
    }
    if n > 1 {
        roots.push(Root::new(0.0, 0.0, n - 1));
    }
    Ok(RootSet::new(roots)?)
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OpJson {
    Coeffs { coeffs: Vec<f64> },
    Roots { roots: Vec<String> },
    Named { name: String },
}

/// A name like `trig4`, or JSON `{"coeffs": [...]}`, `{"roots": ["0,1:1"]}`,
/// `{"name": "hyp2"}`.
pub fn parse_operator(s: &str) -> Result<Operator, CliError> {
    let s = s.trim();
    if !s.starts_with('{') {
        return Ok(Operator::Roots(named(s)?));
    }
    let j: OpJson =
        serde_json::from_str(s).map_err(|e| CliError::Data(format!("bad operator JSON: {e}")))?;
    Ok(match j {
        OpJson::Coeffs { coeffs } => Operator::Coeffs(CharPoly::new(coeffs)?),
        OpJson::Roots { roots } => Operator::Roots(parse_roots(&roots)?),
        OpJson::Named { name } => Operator::Roots(named(&name)?),
    })
}

#[derive(Debug, Clone, clap::Args)]
pub struct OperatorArgs {
    /// Named operator (trigN, hypN) or JSON ({"coeffs":[..]}, {"roots":[..]}, {"name":..})
    #[arg(long, group = "op")]
    pub operator: Option<String>,
    /// Non-leading coefficients a_0..a_{d-1} of the monic polynomial, comma separated
    #[arg(long, group = "op", allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Roots as re[,im]:mult[xK]; conjugates implied. Write negative ones as --roots=-1:1
    #[arg(long, group = "op", num_args = 1.., action = clap::ArgAction::Append)]
    pub roots: Option<Vec<String>>,
}

impl OperatorArgs {
    pub fn resolve(&self) -> Result<Operator, CliError> {
        match (&self.operator, &self.coeffs, &self.roots) {
            (Some(o), None, None) => parse_operator(o),
            (None, Some(c), None) => Ok(Operator::Coeffs(parse_coeffs(c)?)),
            (None, None, Some(r)) => Ok(Operator::Roots(parse_roots(r)?)),
            _ => Err(CliError::Usage(
                "give exactly one of --operator, --coeffs, --roots".into(),
            )),
        }
    }

    pub fn roots(&self) -> Result<RootSet, CliError> {
        Ok(self.resolve()?.roots(DEFAULT_CLUSTER_TOL)?)
    }

    pub fn family(&self) -> Result<FamilyBasis, CliError> {
        Ok(eclen::build_family(&self.roots()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand() {
        assert_eq!(parse_root_token("0:1x3").unwrap(), (0.0, 0.0, 3));
        assert_eq!(parse_root_token("0,1:1").unwrap(), (0.0, 1.0, 1));
        assert_eq!(parse_root_token("-1.5,-2:2").unwrap(), (-1.5, 2.0, 2));
        assert!(parse_root_token("0,1").is_err());
        assert!(parse_root_token("a:1").is_err());
        assert!(parse_root_token("0:0").is_err());
        let r = parse_roots(&["0:1x3", "0,1:1"]).unwrap();
        assert_eq!(r.degree(), 5);
        assert_eq!(r.entries().len(), 2);
    }

    #[test]
    fn names_and_json() {
        assert_eq!(named("trig4").unwrap().degree(), 5);
        assert_eq!(named("hyp1").unwrap().degree(), 2);
        assert!(named("trig0").is_err() && named("poly3").is_err());
        let Operator::Coeffs(p) = parse_operator(r#"{"coeffs": [1, 0]}"#).unwrap() else {
            panic!()
        };
        assert_eq!(p.degree(), 2);
        let op = parse_operator(r#"{"roots": ["0,2:1", "1:1"]}"#).unwrap();
        assert_eq!(op.degree(), 3);
        assert!(parse_operator("{nope").is_err());
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_coeffs("-1,0,0,0").unwrap().degree(), 4);
        assert!(parse_coeffs("1,x").is_err());
    }
}
