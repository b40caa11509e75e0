//! Fixed-format CSV output. Floats use 17 significant digits in scientific
//! notation, so every value round-trips and no locale is involved.

use std::fmt::Write as _;

pub const ESTIMATES_HEADER: &str = "step,time,estimator,value,std_error,n";

/// `{:.16e}`, with `NaN`, `inf` and `-inf` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub step: u64,
    pub time: f64,
    pub estimator: String,
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl EstimateRow {
    /// An exact value: zero standard error and no samples.
    pub fn exact(step: u64, time: f64, estimator: impl Into<String>, value: f64) -> Self {
        EstimateRow {
            step,
            time,
            estimator: estimator.into(),
            value,
            std_error: 0.0,
            n: 0,
        }
    }
}

pub fn estimates_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(ESTIMATES_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.time),
            r.estimator,
            fmt_f64(r.value),
            fmt_f64(r.std_error),
            r.n
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.8), "8.0000000000000004e-1");
        assert_eq!(fmt_f64(-1.0), "-1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
