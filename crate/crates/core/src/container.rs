//! On-disk CGIM container: a directory holding a binary PPM payload and a
//! JSON sidecar with the header and the payload's CRC32.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::codec::{CgimArray, CgimHeader};
use crate::error::CodecError;

pub const PAYLOAD_FILE: &str = "image.ppm";
pub const SIDECAR_FILE: &str = "header.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct Sidecar {
    #[serde(flatten)]
    header: CgimHeader,
    payload_checksum: String,
}

/// Binary PPM: `P6`, maxval 255 for 8 bits or 65535 (big-endian samples) for 16.
pub fn ppm_bytes(a: &CgimArray) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n{}\n", a.r2(), a.r1(), a.max_value()).into_bytes();
    if a.bits() == 8 {
        out.extend(a.data().iter().map(|&v| v as u8));
    } else {
        out.extend(a.data().iter().flat_map(|v| v.to_be_bytes()));
    }
    out
}

pub fn parse_ppm(bytes: &[u8]) -> Result<CgimArray, CodecError> {
    let bad = |m: &str| CodecError::Malformed(format!("PPM: {m}"));
    let mut pos = 0usize;
    let mut fields: Vec<String> = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P6" {
        return Err(bad("magic is not P6"));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad("non-numeric header field"));
    let (r2, r1, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    let b = match maxval {
        255 => 8,
        65535 => 16,
        _ => return Err(bad("maxval must be 255 or 65535")),
    };
    // exactly one whitespace byte separates maxval from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(bad("missing raster"));
    }
    let raster = &bytes[pos + 1..];
    let n = r1 * r2 * 3;
    let width = if b == 8 { 1 } else { 2 };
    if raster.len() != n * width {
        return Err(bad(&format!(
            "raster holds {} bytes, expected {}",
            raster.len(),
            n * width
        )));
    }
    let data = if b == 8 {
        raster.iter().map(|&v| u16::from(v)).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    CgimArray::new(r1, r2, b, data)
}

pub fn checksum_hex(bytes: &[u8]) -> String {
    format!("{:08x}", crc32fast::hash(bytes))
}

pub fn sidecar_json(a: &CgimArray, h: &CgimHeader) -> String {
    let side = Sidecar {
        header: h.clone(),
        payload_checksum: checksum_hex(&ppm_bytes(a)),
    };
    serde_json::to_string_pretty(&side).expect("sidecar serializes") + "\n"
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CodecError + '_ {
    move |source| CodecError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the container directory and returns its total size in bytes.
pub fn write_cgim(dir: impl AsRef<Path>, a: &CgimArray, h: &CgimHeader) -> Result<u64, CodecError> {
    h.matches(a)?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let payload = ppm_bytes(a);
    let side = sidecar_json(a, h);
    let (pp, sp) = (dir.join(PAYLOAD_FILE), dir.join(SIDECAR_FILE));
    fs::write(&pp, &payload).map_err(io_err(&pp))?;
    fs::write(&sp, side.as_bytes()).map_err(io_err(&sp))?;
    Ok((payload.len() + side.len()) as u64)
}

pub fn read_cgim(dir: impl AsRef<Path>) -> Result<(CgimArray, CgimHeader), CodecError> {
    let dir = dir.as_ref();
    let (pp, sp): (PathBuf, PathBuf) = (dir.join(PAYLOAD_FILE), dir.join(SIDECAR_FILE));
    let payload = fs::read(&pp).map_err(io_err(&pp))?;
    let side = fs::read_to_string(&sp).map_err(io_err(&sp))?;
    let side: Sidecar =
        serde_json::from_str(&side).map_err(|e| CodecError::Malformed(format!("{SIDECAR_FILE}: {e}")))?;
    let actual = checksum_hex(&payload);
    if !actual.eq_ignore_ascii_case(&side.payload_checksum) {
        return Err(CodecError::Checksum {
            expected: side.payload_checksum,
            actual,
        });
    }
    let a = parse_ppm(&payload)?;
    side.header.matches(&a)?;
    Ok((a, side.header))
}

fn gzip_len(bytes: &[u8]) -> u64 {
    let mut enc = GzEncoder::new(Vec::new(), Compression::best());
    enc.write_all(bytes).expect("in-memory write");
    enc.finish().expect("in-memory write").len() as u64
}

/// Size proxy for rate-distortion sweeps: gzip of the payload plus gzip of the sidecar.
pub fn compressed_size(a: &CgimArray, h: &CgimHeader) -> u64 {
    gzip_len(&ppm_bytes(a)) + gzip_len(sidecar_json(a, h).as_bytes())
}
