//! CSV rows and their number formatting.

use serde::Serialize;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Mitigated,
    CsBaseline,
    Exact,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Mitigated => "mitigated",
            EstimatorKind::CsBaseline => "cs-baseline",
            EstimatorKind::Exact => "exact",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub task: &'static str,
    pub quantity: String,
    pub point: usize,
    pub noise_label: &'static str,
    pub noise_strength: f64,
    pub estimator: EstimatorKind,
    /// `None` when the estimate could not be formed (see `flag`).
    pub value: Option<f64>,
    pub std_error: Option<f64>,
    pub rounds: usize,
    pub repetition: usize,
    pub seed: u64,
    pub config_hash: String,
    pub flag: String,
}

pub const HEADER: [&str; 13] = [
    "task",
    "quantity",
    "point",
    "noise_label",
    "noise_strength",
    "estimator",
    "value",
    "std_error",
    "rounds",
    "repetition",
    "seed",
    "config_hash",
    "flag",
];

impl ResultRecord {
    fn fields(&self) -> [String; 13] {
        let opt = |v: Option<f64>| v.map(format_sig12).unwrap_or_default();
        [
            self.task.to_string(),
            self.quantity.clone(),
            self.point.to_string(),
            self.noise_label.to_string(),
            format_sig12(self.noise_strength),
            self.estimator.label().to_string(),
            opt(self.value),
            opt(self.std_error),
            self.rounds.to_string(),
            self.repetition.to_string(),
            self.seed.to_string(),
            self.config_hash.clone(),
            self.flag.clone(),
        ]
    }
}

/// Writes a header and every record, RFC 4180 quoting, `\n` line ends.
pub fn write_csv<W: Write>(out: W, records: &[ResultRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Decimal notation rounded to 12 significant digits, trailing zeros
/// dropped. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_sig12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", v.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = exp + 1;
    let mut s = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if v < 0.0 {
        s.insert(0, '-');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig12(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_sig12(1.0 / 70.0), "0.0142857142857");
        assert_eq!(format_sig12(123456789012345.0), "123456789012000");
        assert_eq!(format_sig12(0.25), "0.25");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(3e-19), "0.0000000000000000003");
        assert_eq!(format_sig12(9.9999999999999e-1), "1");
    }

    #[test]
    fn round_trips_to_12_digits() {
        for &v in &[std::f64::consts::PI, -1e-7 / 3.0, 6.02214076e23, 0.1 + 0.2] {
            let back: f64 = format_sig12(v).parse().unwrap();
            assert!(((back - v) / v).abs() < 1e-11);
            assert!(!format_sig12(v).contains('e'));
        }
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let r = ResultRecord {
            task: "majorana",
            quantity: "gamma_S".into(),
            point: 1,
            noise_label: "depolarizing",
            noise_strength: 0.2,
            estimator: EstimatorKind::CsBaseline,
            value: None,
            std_error: Some(0.5),
            rounds: 10,
            repetition: 0,
            seed: 7,
            config_hash: "abc".into(),
            flag: "mitigation-failure k=1,2".into(),
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], HEADER.join(","));
        assert_eq!(
            lines[1],
            "majorana,gamma_S,1,depolarizing,0.2,cs-baseline,,0.5,10,0,7,abc,\"mitigation-failure k=1,2\""
        );
    }
}
