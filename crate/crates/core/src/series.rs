//! Multichannel time series container and the CSV interchange format.
//!
//! CSV layout: first row holds the channel names, every following row holds one
//! sample per channel. Comma separator, decimal point, no missing values.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An n-channel real-valued series; row `i` of `data` is channel `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    data: Vec<Vec<f64>>,
    labels: Vec<String>,
    /// RNG seed recorded for provenance when the series was synthesized.
    pub seed: Option<u64>,
}

impl MultiSeries {
    pub fn new(data: Vec<Vec<f64>>, labels: Vec<String>, seed: Option<u64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::domain("series must have at least one channel"));
        }
        let len = data[0].len();
        if len < 2 {
            return Err(Error::domain("series length must be at least 2"));
        }
        if data.iter().any(|ch| ch.len() != len) {
            return Err(Error::Dimension("channels have unequal lengths".into()));
        }
        if data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::numerical("series contains non-finite values"));
        }
        if labels.len() != data.len() {
            return Err(Error::Dimension("label count != channel count".into()));
        }
        Ok(MultiSeries { data, labels, seed })
    }

    /// Single unnamed channel.
    pub fn single(values: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        MultiSeries::new(vec![values], vec!["x1".into()], seed)
    }

    pub fn from_rows(data: Vec<Vec<f64>>, seed: Option<u64>) -> Result<Self> {
        let labels = (1..=data.len()).map(|i| format!("x{i}")).collect();
        MultiSeries::new(data, labels, seed)
    }

    pub fn channels(&self) -> usize {
        self.data.len()
    }

    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.data[i]
    }

    pub fn channel_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.data[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.data
    }

    /// Write in the repo CSV format with round-trip-exact floats.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        writeln!(w, "{}", self.labels.join(","))?;
        for k in 0..self.len() {
            let mut line = String::new();
            for (i, ch) in self.data.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                // `{}` for f64 is shortest round-trip, so read_csv recovers bits exactly.
                line.push_str(&format!("{}", ch[k]));
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(file)
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse { line: 1, msg: "empty input".into() })?;
        let header = header?;
        let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::Parse { line: 1, msg: "empty channel name in header".into() });
        }
        let n = labels.len();
        let mut data: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                return Err(Error::Parse { line: lineno, msg: "blank line".into() });
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {n} fields, found {}", fields.len()),
                });
            }
            for (i, f) in fields.iter().enumerate() {
                let t = f.trim();
                if t.is_empty() {
                    return Err(Error::Parse { line: lineno, msg: "missing value".into() });
                }
                let v: f64 = t
                    .parse()
                    .map_err(|_| Error::Parse { line: lineno, msg: format!("bad number {t:?}") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line: lineno, msg: "non-finite value".into() });
                }
                data[i].push(v);
            }
        }
        MultiSeries::new(data, labels, None)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        MultiSeries::read_csv(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let s = MultiSeries::new(
            vec![vec![1.0, -0.25, 3.5e-17, std::f64::consts::PI], vec![0.0, 2.0, -4.0, 8.0]],
            vec!["a".into(), "b".into()],
            Some(7),
        )
        .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = MultiSeries::read_csv(&buf[..]).unwrap();
        assert_eq!(back.rows(), s.rows());
        assert_eq!(back.labels(), s.labels());
    }

    #[test]
    fn csv_rejects_missing_values() {
        let text = "a,b\n1.0,2.0\n3.0,\n";
        let err = MultiSeries::read_csv(text.as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        let text = "a,b\n1.0,2.0,9.0\n";
        assert!(matches!(MultiSeries::read_csv(text.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
