//! Text syntaxes for flags and the CSV/PGM file formats.

use std::io::Write;
use std::path::Path;

use cheq_core::eqregion::GrayImage;
use cheq_core::linalg::{ComplexVector, C64};
use cheq_core::projective::{project_with, ProjectivePoint};

use crate::error::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `re`, `re+imi`, `re-imi`, `imi`, `i` or `-i`.
pub fn parse_complex(text: &str) -> Result<C64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || usage(format!("bad complex number {text:?}"));
    let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => num(t)?,
    };
    Ok(C64::new(re, im))
}

/// Comma-separated complex coordinates.
pub fn parse_vector(text: &str) -> Result<ComplexVector, CliError> {
    let v = text
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexVector::new(v))
}

/// `c;u;v`, each a comma-separated complex vector; parentheses optional.
pub fn parse_chart(text: &str) -> Result<[ComplexVector; 3], CliError> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != 3 {
        return Err(usage(format!(
            "chart {text:?} must have the form center;dir_u;dir_v"
        )));
    }
    let vec = |t: &str| parse_vector(t.trim().trim_start_matches('(').trim_end_matches(')'));
    Ok([vec(parts[0])?, vec(parts[1])?, vec(parts[2])?])
}

pub fn parse_window(text: &str) -> Result<(f64, f64, f64, f64), CliError> {
    let v = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| usage(format!("bad window {text:?}")))?;
    match v[..] {
        [x0, x1, y0, y1] => Ok((x0, x1, y0, y1)),
        _ => Err(usage(format!("window {text:?} must be x0,x1,y0,y1"))),
    }
}

pub fn parse_resolution(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || usage(format!("resolution {text:?} must be WxH"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: usize = w.trim().parse().map_err(|_| bad())?;
    let h: usize = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

pub fn csv_header(dim: usize) -> Vec<String> {
    (0..dim)
        .flat_map(|k| [format!("re{k}"), format!("im{k}")])
        .collect()
}

/// One canonical representative per row, `{:.16e}` per value.
pub fn write_cloud_csv<W: Write>(
    out: W,
    dim: usize,
    points: &[ProjectivePoint],
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| usage(format!("csv: {e}"));
    w.write_record(csv_header(dim)).map_err(map)?;
    for p in points {
        let row: Vec<String> = p
            .rep()
            .iter()
            .flat_map(|z| [format!("{:.16e}", z.re), format!("{:.16e}", z.im)])
            .collect();
        w.write_record(&row).map_err(map)?;
    }
    w.flush().map_err(|e| usage(format!("csv: {e}")))?;
    Ok(())
}

pub fn save_cloud_csv(path: &Path, dim: usize, points: &[ProjectivePoint]) -> Result<(), CliError> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_cloud_csv(std::io::BufWriter::new(f), dim, points)
}

/// Reads a cloud file back as projective points.
pub fn read_cloud_csv(path: &Path, tau_null: f64) -> Result<Vec<ProjectivePoint>, CliError> {
    let parse_err = |message: String| CliError::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_err(e.to_string()))?;
    let header = r.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if header.len() % 2 != 0 || header.iter().ne(csv_header(header.len() / 2).iter()) {
        return Err(parse_err("header must be re0,im0,re1,im1,...".into()));
    }
    let mut points = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        let vals = rec
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("row {}: {e}", line + 1)))?;
        let v = ComplexVector::new(vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
        points.push(project_with(&v, tau_null)?);
    }
    Ok(points)
}

pub fn write_pgm<W: Write>(mut out: W, img: &GrayImage) -> std::io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.pixels)?;
    out.flush()
}

pub fn save_pgm(path: &Path, img: &GrayImage) -> Result<(), CliError> {
    let f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_pgm(std::io::BufWriter::new(f), img).map_err(|e| CliError::io(path, e))
}

/// Parses a binary P5 file with maxval 255.
pub fn read_pgm(bytes: &[u8]) -> Option<GrayImage> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes.get(pos)?.is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes.get(pos)?.is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let width: usize = fields[1].parse().ok()?;
    let height: usize = fields[2].parse().ok()?;
    let pixels = bytes.get(pos..pos + width * height)?.to_vec();
    Some(GrayImage {
        width,
        height,
        pixels,
    })
}
