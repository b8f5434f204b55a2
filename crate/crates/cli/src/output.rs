//! Number formatting (12 significant digits everywhere), CSV and SVG.

use serde::Serialize;
use serde_json::Value;

pub const SIG_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{}", sig(x))
    } else {
        format!("{:e}", sig(x))
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(r) = n
                    .as_f64()
                    .and_then(|x| serde_json::Number::from_f64(sig(x)))
                {
                    *n = r;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded.
pub fn json<T: Serialize>(x: &T) -> String {
    let mut v = serde_json::to_value(x).expect("serialisable output");
    round_value(&mut v);
    serde_json::to_string_pretty(&v).expect("serialisable output") + "\n"
}

pub fn csv_row(fields: &[String]) -> String {
    fields.join(",") + "\n"
}

/// Curve polyline over its control polygon, both in the plane.
pub fn svg(curve: &[Vec<f64>], control: &[Vec<f64>]) -> String {
    let all = curve.iter().chain(control);
    let (mut x0, mut y0, mut x1, mut y1) = (
        f64::INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    for p in all {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let pad = 0.05 * span;
    let size = 600.0;
    let scale = size / (span + 2.0 * pad);
    let map = |p: &Vec<f64>| {
        format!(
            "{},{}",
            num((p[0] - x0 + pad) * scale),
            num((y1 - p[1] + pad) * scale)
        )
    };
    let poly = |pts: &[Vec<f64>]| pts.iter().map(map).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    s += &format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">\n",
        size
    );
    s += &format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n",
        poly(control)
    );
    for p in control {
        let c = map(p);
        let (cx, cy) = c.split_once(',').unwrap();
        s += &format!("<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"#888\"/>\n");
    }
    s += &format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#c00\" stroke-width=\"2\"/>\n",
        poly(curve)
    );
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5e-20), "-2.5e-20");
        assert_eq!(num(f64::INFINITY), "inf");
        let j = json(&serde_json::json!({"v": [std::f64::consts::E]}));
        assert!(j.contains("2.71828182846"));
    }
}
