//! Dataset CSV: header `x1,...,xd,y[,group]`, one sample per line, LF endings.
//! Features are written with 17 significant digits so the text round-trips exactly.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Dataset, Sample};
use crate::error::{RaiError, Result};
use crate::scalar::Scalar;

pub fn write_csv<S: Scalar, W: Write>(dataset: &Dataset<S>, mut out: W) -> Result<()> {
    let mut header: Vec<String> = (1..=dataset.dim()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    if dataset.is_grouped() {
        header.push("group".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for s in dataset.samples() {
        let mut fields: Vec<String> = s.features.iter().map(|x| format!("{x:.16e}")).collect();
        fields.push(s.label.to_string());
        if let Some(g) = s.group {
            fields.push(g.to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn save_csv<S: Scalar>(dataset: &Dataset<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn read_csv<S: Scalar, R: Read>(input: R) -> Result<Dataset<S>> {
    let mut lines = BufReader::new(input).lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(RaiError::InvalidDataset("empty file".into())),
    };
    let cols: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    let grouped = cols.last() == Some(&"group");
    let dim = cols.len() - 1 - usize::from(grouped);
    let expected: Vec<String> = (1..=dim)
        .map(|j| format!("x{j}"))
        .chain(std::iter::once("y".to_string()))
        .chain(grouped.then(|| "group".to_string()))
        .collect();
    if dim == 0 || cols != expected {
        return Err(RaiError::Parse {
            line: 1,
            msg: format!("header must be x1,...,xd,y[,group], got '{header}'"),
        });
    }

    let width = cols.len();
    let mut samples = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| RaiError::Parse { line: line_no, msg };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(parse_err(format!("expected {width} fields, found {}", fields.len())));
        }
        let features = fields[..dim]
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<S>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(format!("invalid feature value '{f}'")))
            })
            .collect::<Result<Vec<S>>>()?;
        let label = fields[dim]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(format!("invalid label '{}'", fields[dim])))?;
        let group = if grouped {
            Some(
                fields[dim + 1]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| parse_err(format!("invalid group '{}'", fields[dim + 1])))?,
            )
        } else {
            None
        };
        samples.push(Sample { features, label, group });
    }
    if samples.is_empty() {
        return Err(RaiError::InvalidDataset("file contains no samples".into()));
    }
    Dataset::from_samples(samples, 0)
}

pub fn load_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<S>> {
    read_csv(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three() -> Dataset<f64> {
        let samples = vec![
            Sample { features: vec![0.1, -2.5e-7], label: 0, group: Some(1) },
            Sample { features: vec![1.0 / 3.0, 1e300], label: 1, group: Some(0) },
            Sample { features: vec![-0.0, 42.0], label: 1, group: Some(1) },
        ];
        Dataset::from_samples(samples, 0).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let d = three();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,y,group\n"));
        let back: Dataset<f64> = read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples(), d.samples());
        for (a, b) in back.samples().iter().zip(d.samples()) {
            for (x, y) in a.features.iter().zip(&b.features) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn extra_field_reports_line() {
        let text = "x1,y\n0.5,1\n0.1,0,3\n";
        match read_csv::<f64, _>(text.as_bytes()) {
            Err(RaiError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_invalid() {
        assert!(matches!(read_csv::<f64, _>(&b""[..]), Err(RaiError::InvalidDataset(_))));
        assert!(matches!(read_csv::<f64, _>(&b"x1,y\n"[..]), Err(RaiError::InvalidDataset(_))));
    }

    #[test]
    fn bad_label_names_line() {
        let text = "x1,y\n0.5,1\n0.1,-1\n";
        assert!(matches!(read_csv::<f64, _>(text.as_bytes()), Err(RaiError::Parse { line: 3, .. })));
    }
}
