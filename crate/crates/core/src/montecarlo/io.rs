//! Sample files: CSV `method,stream,index,re,im,tau` or fixed-width binary.
//!
//! Binary layout, little-endian: an 8-byte magic, `u32` version and `u32`
//! record size, then one 28-byte record per sample (`f64 re`, `f64 im`,
//! `f64 tau` with NaN for "absent", `u32 method`). Stream and index are not
//! stored; they follow from the record position and the batch size.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExitSample, Method, BATCH_SIZE};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 8] = *b"SKEXIT\0\0";
pub const BINARY_VERSION: u32 = 1;
pub const RECORD_SIZE: u32 = 28;
const CSV_HEADER: &str = "method,stream,index,re,im,tau";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleFormat {
    Csv,
    Binary,
}

impl SampleFormat {
    pub fn extension(self) -> &'static str {
        match self {
            SampleFormat::Csv => "csv",
            SampleFormat::Binary => "bin",
        }
    }
}

/// Streaming writer; the header goes out on construction.
pub struct SampleWriter<W: Write> {
    out: W,
    format: SampleFormat,
}

impl<W: Write> SampleWriter<W> {
    pub fn new(mut out: W, format: SampleFormat) -> Result<Self> {
        match format {
            SampleFormat::Csv => writeln!(out, "{CSV_HEADER}")?,
            SampleFormat::Binary => {
                out.write_all(&BINARY_MAGIC)?;
                out.write_all(&BINARY_VERSION.to_le_bytes())?;
                out.write_all(&RECORD_SIZE.to_le_bytes())?;
            }
        }
        Ok(Self { out, format })
    }

    pub fn write(&mut self, samples: &[ExitSample]) -> Result<()> {
        for s in samples {
            match self.format {
                SampleFormat::Csv => {
                    write!(
                        self.out,
                        "{},{},{},{},{},",
                        s.method.as_str(),
                        s.stream,
                        s.index,
                        s.position.re,
                        s.position.im
                    )?;
                    match s.tau {
                        Some(t) => writeln!(self.out, "{t}")?,
                        None => writeln!(self.out)?,
                    }
                }
                SampleFormat::Binary => {
                    self.out.write_all(&s.position.re.to_le_bytes())?;
                    self.out.write_all(&s.position.im.to_le_bytes())?;
                    self.out.write_all(&s.tau.unwrap_or(f64::NAN).to_le_bytes())?;
                    self.out.write_all(&s.method.code().to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn write_csv<W: Write>(out: W, samples: &[ExitSample]) -> Result<()> {
    let mut w = SampleWriter::new(out, SampleFormat::Csv)?;
    w.write(samples)?;
    w.finish().map(|_| ())
}

pub fn write_binary<W: Write>(out: W, samples: &[ExitSample]) -> Result<()> {
    let mut w = SampleWriter::new(out, SampleFormat::Binary)?;
    w.write(samples)?;
    w.finish().map(|_| ())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<Vec<ExitSample>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == CSV_HEADER => {}
        Some(Err(e)) => return Err(e.into()),
        _ => return Err(Error::Parse(format!("sample file must start with `{CSV_HEADER}`"))),
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad("expected 6 fields"));
        }
        let method = Method::parse(f[0]).ok_or_else(|| bad("unknown method"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("bad number"));
        let int = |s: &str| s.parse::<u64>().map_err(|_| bad("bad integer"));
        let tau = if f[5].is_empty() { None } else { Some(num(f[5])?) };
        out.push(ExitSample {
            position: Complex64::new(num(f[3])?, num(f[4])?),
            tau,
            method,
            stream: int(f[1])?,
            index: int(f[2])?,
        });
    }
    Ok(out)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<ExitSample>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if header[..8] != BINARY_MAGIC {
        return Err(Error::Parse("not a sample file: bad magic".into()));
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let size = u32::from_le_bytes(header[12..16].try_into().unwrap());
    if version != BINARY_VERSION || size != RECORD_SIZE {
        return Err(Error::Parse(format!("unsupported sample file version {version}, record size {size}")));
    }
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() % RECORD_SIZE as usize != 0 {
        return Err(Error::Parse("truncated sample record".into()));
    }
    body.chunks_exact(RECORD_SIZE as usize)
        .enumerate()
        .map(|(k, r)| {
            let f = |i: usize| f64::from_le_bytes(r[i..i + 8].try_into().unwrap());
            let code = u32::from_le_bytes(r[24..28].try_into().unwrap());
            let method = Method::from_code(code).ok_or_else(|| Error::Parse(format!("record {k}: method code {code}")))?;
            let tau = f(16);
            Ok(ExitSample {
                position: Complex64::new(f(0), f(8)),
                tau: (!tau.is_nan()).then_some(tau),
                method,
                stream: (k / BATCH_SIZE) as u64,
                index: (k % BATCH_SIZE) as u64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples() -> Vec<ExitSample> {
        vec![
            ExitSample::new(Complex64::new(0.1, -2.5e-17), None, Method::Exact),
            ExitSample { index: 1, ..ExitSample::new(Complex64::new(-1.0 / 3.0, 7.0), Some(0.123456789), Method::Euler) },
            ExitSample { index: 2, ..ExitSample::new(Complex64::new(1e300, -0.0), None, Method::WosHybrid) },
        ]
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &samples()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("method,stream,index,re,im,tau\nEXACT,0,0,0.1,"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), samples());
    }

    #[test]
    fn binary_round_trip() {
        let mut buf = Vec::new();
        write_binary(&mut buf, &samples()).unwrap();
        assert_eq!(buf.len(), 16 + 3 * 28);
        assert_eq!(&buf[..8], &BINARY_MAGIC);
        assert_eq!(read_binary(buf.as_slice()).unwrap(), samples());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(read_csv("x,y\n".as_bytes()).is_err());
        assert!(read_csv("method,stream,index,re,im,tau\nFOO,0,0,1,2,\n".as_bytes()).is_err());
        assert!(read_binary(&b"NOTMAGIC\x01\0\0\0\x1c\0\0\0"[..]).is_err());
        let mut buf = Vec::new();
        write_binary(&mut buf, &samples()).unwrap();
        buf.pop();
        assert!(read_binary(buf.as_slice()).is_err());
    }
}
