//! CSV layout for curves.
//!
//! ```text
//! #domain,closed          <- SRV curves only
//! #scale,2.5
//! #duration,1
//! #basepoint,0.1,-0.3
//! t,dim0,dim1
//! 0,0.5,0.25
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Domain, SampledCurve, SrvCurve};
use crate::error::{Error, Result};

fn write_rows(out: &mut String, dim: usize, data: &[f64], duration: f64) {
    out.push('t');
    for k in 0..dim {
        let _ = write!(out, ",dim{k}");
    }
    out.push('\n');
    let m = data.len() / dim;
    for (i, row) in data.chunks_exact(dim).enumerate() {
        let _ = write!(out, "{}", duration * i as f64 / (m - 1) as f64);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
}

pub fn write_curve_csv(curve: &SampledCurve) -> String {
    let mut out = String::new();
    write_rows(&mut out, curve.dim(), curve.data(), curve.duration());
    out
}

pub fn write_srv_csv(srv: &SrvCurve) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#domain,{}", srv.domain());
    let _ = writeln!(out, "#scale,{}", srv.scale());
    let _ = writeln!(out, "#duration,{}", srv.duration());
    out.push_str("#basepoint");
    for v in srv.basepoint() {
        let _ = write!(out, ",{v}");
    }
    out.push('\n');
    write_rows(&mut out, srv.dim(), srv.q(), srv.duration());
    out
}

struct Parsed {
    meta: Vec<(String, Vec<String>)>,
    dim: usize,
    times: Vec<f64>,
    data: Vec<f64>,
}

fn number(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: invalid number `{s}`")))
}

fn parse(text: &str) -> Result<Parsed> {
    let mut meta = Vec::new();
    let mut dim = None;
    let mut times = Vec::new();
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if let Some(key) = fields[0].strip_prefix('#') {
            meta.push((key.to_string(), fields[1..].iter().map(|s| s.to_string()).collect()));
            continue;
        }
        match dim {
            None => {
                if fields[0] != "t" || fields.len() < 2 {
                    return Err(Error::Format(format!("line {line_no}: expected header `t,dim0,...`")));
                }
                dim = Some(fields.len() - 1);
            }
            Some(n) => {
                if fields.len() != n + 1 {
                    return Err(Error::Format(format!(
                        "line {line_no}: expected {} columns, found {}",
                        n + 1,
                        fields.len()
                    )));
                }
                times.push(number(fields[0], line_no)?);
                for f in &fields[1..] {
                    data.push(number(f, line_no)?);
                }
            }
        }
    }
    let dim = dim.ok_or_else(|| Error::Format("missing header".into()))?;
    if times.len() < 2 {
        return Err(Error::Format("need at least 2 samples".into()));
    }
    Ok(Parsed { meta, dim, times, data })
}

pub fn read_curve_csv(text: &str) -> Result<SampledCurve> {
    let p = parse(text)?;
    SampledCurve::new(p.dim, p.data, *p.times.last().unwrap())
}

pub fn read_srv_csv(text: &str) -> Result<SrvCurve> {
    let p = parse(text)?;
    let get = |key: &str| -> Result<&Vec<String>> {
        p.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Format(format!("missing `#{key}` row")))
    };
    let single = |key: &str| -> Result<f64> {
        let v = get(key)?;
        v.first()
            .ok_or_else(|| Error::Format(format!("empty `#{key}` row")))
            .and_then(|s| number(s, 0))
    };
    let domain: Domain = get("domain")?
        .first()
        .ok_or_else(|| Error::Format("empty `#domain` row".into()))?
        .parse()?;
    let basepoint = get("basepoint")?
        .iter()
        .map(|s| number(s, 0))
        .collect::<Result<Vec<f64>>>()?;
    SrvCurve::from_parts(p.dim, p.data, domain, basepoint, single("scale")?, single("duration")?)
}

impl SampledCurve {
    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, write_curve_csv(self))?;
        Ok(())
    }
}

impl SrvCurve {
    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, write_srv_csv(self))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::srv_transform;

    #[test]
    fn srv_csv_roundtrip_is_exact() {
        let c = SampledCurve::from_fn(2, 17, 1.5, |t| vec![t.sin(), t.cos() + t]).unwrap();
        let q = srv_transform(&c, Domain::Open).unwrap();
        let text = write_srv_csv(&q);
        assert!(text.starts_with("#domain,open\n"));
        assert!(text.contains("\nt,dim0,dim1\n"));
        assert_eq!(read_srv_csv(&text).unwrap(), q);
        assert_eq!(read_curve_csv(&write_curve_csv(&c)).unwrap(), c);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(read_curve_csv("t,dim0\n0,1\n1,2,3\n").is_err());
        assert!(read_curve_csv("0,1\n1,2\n").is_err());
    }
}
