//! Machine-readable output: CSV comparison tables and JSON zero lists.
//!
//! Every number is written with 17 significant digits, which round-trips
//! any `f64`.

use std::fmt::Write as _;

use crate::dimensions::ComplexDimension;
use crate::tube::{ComparisonRow, TubeEvaluation};

/// First line of every CSV file.
pub const CSV_VERSION: &str = "# tubeforge-csv v1";

/// Column header of the comparison CSV.
pub const CSV_COLUMNS: &str = "epsilon,direct,residues,abs_err,rel_err,pairs_used,im_leakage";

/// `x` with 17 significant digits: positional for exponents in `-5..17`,
/// scientific otherwise. Trailing zeros of the fraction are dropped.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exponent) = sci.split_once('e').expect("scientific notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let trim = |frac: &str| -> String {
        let t = frac.trim_end_matches('0');
        if t.is_empty() { "0".into() } else { t.into() }
    };
    if (-5..17).contains(&exponent) {
        if exponent >= 0 {
            let split = exponent as usize + 1;
            format!("{sign}{}.{}", &digits[..split], trim(&digits[split..]))
        } else {
            let zeros = "0".repeat((-exponent - 1) as usize);
            format!("{sign}0.{zeros}{}", digits.trim_end_matches('0'))
        }
    } else {
        format!("{sign}{}.{}e{exponent}", &digits[..1], trim(&digits[1..]))
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// One CSV line for an evaluation; missing values are empty cells.
pub fn csv_row(eval: &TubeEvaluation) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        format_f64(eval.epsilon),
        cell(eval.direct),
        format_f64(eval.residues()),
        cell(eval.abs_error()),
        cell(eval.rel_error()),
        eval.pairs_used,
        format_f64(eval.im_leakage),
    )
}

/// The comparison table, with errored cells left empty.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = format!("{CSV_VERSION}\n{CSV_COLUMNS}\n");
    for row in rows {
        match &row.residues {
            Ok(eval) => out.push_str(&csv_row(eval)),
            Err(_) => {
                let direct = cell(row.direct.as_ref().ok().copied());
                let _ = write!(out, "{},{direct},,,,,", format_f64(row.epsilon));
            }
        }
        out.push('\n');
    }
    out
}

fn json_number(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format_f64(v),
        _ => "null".into(),
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialises")
}

/// The comparison table as a JSON array; errors appear as strings.
pub fn comparison_json(rows: &[ComparisonRow]) -> String {
    let mut out = String::from("[\n");
    for (k, row) in rows.iter().enumerate() {
        let direct = match &row.direct {
            Ok(v) => format_f64(*v),
            Err(e) => format!("{{\"error\": {}}}", json_string(&e.to_string())),
        };
        let _ = write!(out, "  {{\"epsilon\": {}, \"direct\": {direct}, ", format_f64(row.epsilon));
        match &row.residues {
            Ok(e) => {
                let _ = write!(
                    out,
                    "\"residues\": {}, \"abs_err\": {}, \"rel_err\": {}, \"pairs_used\": {}, \"im_leakage\": {}}}",
                    format_f64(e.residues()),
                    json_number(e.abs_error()),
                    json_number(e.rel_error()),
                    e.pairs_used,
                    format_f64(e.im_leakage)
                );
            }
            Err(err) => {
                let _ = write!(out, "\"residues\": {{\"error\": {}}}}}", json_string(&err.to_string()));
            }
        }
        out.push_str(if k + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

/// `[{"re", "im", "multiplicity", "residual"}, ...]` in the given order.
pub fn zeros_json(zeros: &[ComplexDimension]) -> String {
    let mut out = String::from("[\n");
    for (k, z) in zeros.iter().enumerate() {
        let _ = write!(
            out,
            "  {{\"re\": {}, \"im\": {}, \"multiplicity\": {}, \"residual\": {}}}",
            format_f64(z.re()),
            format_f64(z.im()),
            z.multiplicity,
            format_f64(z.residual)
        );
        out.push_str(if k + 1 < zeros.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::TubeError;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn formatting_examples() {
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(1.0), "1.0");
        assert_eq!(format_f64(-2.5), "-2.5");
        assert_eq!(format_f64(2f64.ln() / 3f64.ln()), "0.63092975357145742");
        assert_eq!(format_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(format_f64(0.5f64.powi(30)), "9.3132257461547852e-10");
        assert_eq!(format_f64(0.5f64.powi(15)), "0.000030517578125");
        assert_eq!(format_f64(123456.0), "123456.0");
        assert_eq!(format_f64(1e20), "1.0e20");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format_f64(x);
            prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            ComparisonRow {
                epsilon: 0.1,
                direct: Ok(0.5),
                residues: Ok(TubeEvaluation {
                    epsilon: 0.1,
                    direct: Some(0.5),
                    partial_sums: vec![0.25, 0.5],
                    im_leakage: 0.0,
                    window: 10.0,
                    pairs_used: 1,
                }),
            },
            ComparisonRow {
                epsilon: 1.0,
                direct: Ok(1.0),
                residues: Err(TubeError::Domain("outside".into())),
            },
        ];
        let csv = comparison_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_VERSION);
        assert_eq!(lines[1], CSV_COLUMNS);
        assert_eq!(lines[2], "0.10000000000000001,0.5,0.5,0.0,0.0,1,0.0");
        assert_eq!(lines[3], "1.0,1.0,,,,,");
        let json: serde_json::Value = serde_json::from_str(&comparison_json(&rows)).unwrap();
        assert_eq!(json[0]["pairs_used"], 1);
        assert!(json[1]["residues"]["error"].as_str().unwrap().contains("outside"));
    }

    #[test]
    fn zeros_json_parses() {
        let zeros = vec![ComplexDimension { point: Complex64::new(0.5, -3.0), multiplicity: 1, residual: 1e-15 }];
        let v: serde_json::Value = serde_json::from_str(&zeros_json(&zeros)).unwrap();
        assert_eq!(v[0]["im"], -3.0);
        assert_eq!(v[0]["multiplicity"], 1);
        assert_eq!(zeros_json(&[]), "[\n]\n");
    }
}
