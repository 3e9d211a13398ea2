//! Plain-text sample files.
//!
//! ```text
//! n=4
//! omega=1 2 4
//! [y_obs]
//! 1,0
//! 0.5,-0.25
//! 0,1
//! ```
//!
//! Header lines are `key=value`; a `[name]` line opens a section whose rows
//! each hold one or more whitespace-separated `re,im` pairs (one per snapshot).
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::array_model::Omega;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleFile {
    pub header: Vec<(String, String)>,
    pub sections: Vec<(String, Vec<Vec<Complex64>>)>,
}

impl SampleFile {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.header.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.header.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses a header value, naming the key on failure.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("missing header key '{key}'")))?;
        raw.parse()
            .map_err(|_| Error::InvalidArgument(format!("header key '{key}': cannot parse '{raw}'")))
    }

    pub fn set_omega(&mut self, omega: &Omega) {
        let list: Vec<String> = omega.one_based().iter().map(usize::to_string).collect();
        self.set("omega", list.join(" "));
    }

    /// The 1-based `omega` header over an array of `n` elements.
    pub fn omega(&self, n: usize) -> Result<Omega> {
        let raw = self
            .get("omega")
            .ok_or_else(|| Error::InvalidArgument("missing header key 'omega'".into()))?;
        let idx = raw
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidArgument(format!("header key 'omega': bad index '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Omega::from_one_based(&idx, n)
    }

    /// Adds a section with one column per snapshot.
    pub fn push_columns(&mut self, name: &str, columns: &[&[Complex64]]) {
        let rows = columns.first().map_or(0, |c| c.len());
        let data = (0..rows).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
        self.sections.push((name.to_string(), data));
    }

    pub fn section(&self, name: &str) -> Option<&[Vec<Complex64>]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, rows)| rows.as_slice())
    }

    /// Column `t` of a section.
    pub fn column(&self, name: &str, t: usize) -> Result<Vec<Complex64>> {
        let rows = self
            .section(name)
            .ok_or_else(|| Error::InvalidArgument(format!("missing section [{name}]")))?;
        rows.iter()
            .map(|r| {
                r.get(t)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("section [{name}] has no column {t}")))
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "{k}={v}");
        }
        for (name, rows) in &self.sections {
            let _ = writeln!(out, "[{name}]");
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| format!("{:.17e},{:.17e}", c.re, c.im)).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut file = SampleFile::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: no + 1, message };
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                file.sections.push((name.trim().to_string(), Vec::new()));
                continue;
            }
            match file.sections.last_mut() {
                None => {
                    let (k, v) = line
                        .split_once('=')
                        .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
                    file.header.push((k.trim().to_string(), v.trim().to_string()));
                }
                Some((_, rows)) => {
                    let row = line
                        .split_whitespace()
                        .map(|cell| parse_complex(cell).ok_or_else(|| err(format!("bad complex value '{cell}'"))))
                        .collect::<Result<Vec<_>>>()?;
                    rows.push(row);
                }
            }
        }
        Ok(file)
    }
}

fn parse_complex(cell: &str) -> Option<Complex64> {
    let (re, im) = cell.split_once(',')?;
    Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut f = SampleFile::default();
        f.set("n", 4);
        f.set("noise_eta", 0);
        let omega = Omega::new(vec![0, 1, 3], 4).unwrap();
        f.set_omega(&omega);
        let a = vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, -1e-300), Complex64::new(-3.5, 2.0)];
        let b = vec![Complex64::new(0.0, 1.0); 3];
        f.push_columns("y_obs", &[&a, &b]);
        let text = f.to_text();
        assert!(text.contains("omega=1 2 4"));
        assert!(text.contains("noise_eta=0"));
        let back = SampleFile::parse(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.omega(4).unwrap(), omega);
        assert_eq!(back.column("y_obs", 0).unwrap(), a);
        assert_eq!(back.column("y_obs", 1).unwrap(), b);
        assert_eq!(back.parsed::<usize>("n").unwrap(), 4);
    }

    #[test]
    fn bad_lines_report_position() {
        let err = SampleFile::parse("n=3\n[y]\n1,2\nfoo\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 4,
                message: "bad complex value 'foo'".into()
            }
        );
        assert!(SampleFile::parse("novalue\n").is_err());
    }

    #[test]
    fn empty_section() {
        let f = SampleFile::parse("n=0\n[y_hat]\n").unwrap();
        assert!(f.column("y_hat", 0).unwrap().is_empty());
    }
}
