//! The FFLD1 container: one header line `FFLD1 {json}\n` followed by raw
//! little-endian `f64` samples, components in ascending-mask order, each
//! row-major with axis 1 slowest.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::field::{FormField, Grid};
use crate::error::{Error, Result};

const MAGIC: &str = "FFLD1 ";
const ORDER: &str = "ascending-mask";
const LAYOUT: &str = "component-major,row-major";
const DTYPE: &str = "f64le";
const MAX_HEADER: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfldHeader {
    pub n: usize,
    pub dims: Vec<usize>,
    #[serde(rename = "L")]
    pub length: f64,
    pub grades: Vec<usize>,
    pub order: String,
    pub layout: String,
    pub dtype: String,
}

impl FfldHeader {
    pub fn of(f: &FormField) -> Self {
        Self {
            n: f.dim(),
            dims: f.grid().dims().to_vec(),
            length: f.grid().length(),
            grades: f.grades().to_vec(),
            order: ORDER.into(),
            layout: LAYOUT.into(),
            dtype: DTYPE.into(),
        }
    }
}

pub fn write_ffld<W: Write>(f: &FormField, mut w: W) -> Result<()> {
    let header =
        serde_json::to_string(&FfldHeader::of(f)).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC.as_bytes())?;
    w.write_all(header.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(f.grid().len() * 8);
    for comp in f.components() {
        buf.clear();
        comp.iter()
            .for_each(|v| buf.extend_from_slice(&v.to_le_bytes()));
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_ffld<R: Read>(mut r: R) -> Result<FormField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .take(MAX_HEADER)
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let line = std::str::from_utf8(&bytes[..newline])
        .map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let json = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::Format("bad magic".into()))?;
    let h: FfldHeader = serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    if h.order != ORDER || h.layout != LAYOUT || h.dtype != DTYPE {
        return Err(Error::Format("unsupported order, layout or dtype".into()));
    }
    if h.n != h.dims.len() {
        return Err(Error::Format(format!(
            "n = {} but {} dims given",
            h.n,
            h.dims.len()
        )));
    }
    let grid = Grid::new(h.dims.clone(), h.length).map_err(|e| Error::Format(e.to_string()))?;
    let template =
        FormField::zeros(grid.clone(), &h.grades).map_err(|e| Error::Format(e.to_string()))?;
    let comps = template.components().len();
    let payload = &bytes[newline + 1..];
    let expected = comps * grid.len() * 8;
    if payload.len() != expected {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {expected}",
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let components = values.chunks(grid.len()).map(<[f64]>::to_vec).collect();
    let f = FormField::from_components(grid, &h.grades, components)?;
    f.check_finite()?;
    Ok(f)
}

pub fn save_ffld(f: &FormField, path: &std::path::Path) -> Result<()> {
    write_ffld(f, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn load_ffld(path: &std::path::Path) -> Result<FormField> {
    read_ffld(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FormField {
        let grid = Grid::new(vec![4, 8], 2.5).unwrap();
        FormField::from_fn(grid, &[1, 2], |s, x| x[0] * s.mask() as f64 - x[1]).unwrap()
    }

    #[test]
    fn round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_ffld(&f, &mut buf).unwrap();
        let text = String::from_utf8_lossy(&buf[..buf.iter().position(|&b| b == b'\n').unwrap()])
            .to_string();
        assert!(text.starts_with("FFLD1 {\"n\":2,\"dims\":[4,8],\"L\":2.5,\"grades\":[1,2]"));
        assert_eq!(buf.len(), text.len() + 1 + 3 * 32 * 8);
        assert_eq!(read_ffld(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn rejects_bad_payload() {
        let mut buf = Vec::new();
        write_ffld(&sample(), &mut buf).unwrap();
        let short = &buf[..buf.len() - 8];
        assert!(matches!(read_ffld(short), Err(Error::Format(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_ffld(long.as_slice()), Err(Error::Format(_))));
        assert!(matches!(
            read_ffld(&b"FFLD2 {}\n"[..]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_ffld(&b"no newline"[..]),
            Err(Error::Format(_))
        ));
        let bad = String::from_utf8(buf[..buf.iter().position(|&b| b == b'\n').unwrap()].to_vec())
            .unwrap()
            .replace("f64le", "f32le");
        assert!(matches!(
            read_ffld(format!("{bad}\n").as_bytes()),
            Err(Error::Format(_))
        ));
    }
}
