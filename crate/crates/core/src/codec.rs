//! Quantized pixel arrays, their run-count header and the built-in lossy codecs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{reconstruct_lossy, Decoded};
use crate::error::CodecError;
use crate::isomatrix::VMatrix;
use crate::mesh::Mesh;

/// `r1 × r2 × 3` channel values in `[0, 2^b − 1]`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CgimArray {
    r1: usize,
    r2: usize,
    b: u8,
    data: Vec<u16>,
}

impl CgimArray {
    pub fn new(r1: usize, r2: usize, b: u8, data: Vec<u16>) -> Result<CgimArray, CodecError> {
        check_bits(b)?;
        if data.len() != r1 * r2 * 3 {
            return Err(CodecError::Malformed(format!(
                "{} channel values for a {r1}x{r2} array",
                data.len()
            )));
        }
        let max = max_value(b);
        if let Some(v) = data.iter().find(|&&v| v > max) {
            return Err(CodecError::Malformed(format!("channel value {v} exceeds {max}")));
        }
        Ok(CgimArray { r1, r2, b, data })
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn r2(&self) -> usize {
        self.r2
    }

    pub fn bits(&self) -> u8 {
        self.b
    }

    pub fn max_value(&self) -> u16 {
        max_value(self.b)
    }

    pub fn pixel(&self, i: usize, j: usize) -> [u16; 3] {
        let k = (i * self.r2 + j) * 3;
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    fn map_channels(&self, f: impl Fn(usize, usize, usize) -> u16) -> CgimArray {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.r1 {
            for j in 0..self.r2 {
                for c in 0..3 {
                    data.push(f(i, j, c));
                }
            }
        }
        CgimArray { data, ..*self }
    }
}

/// Side information needed to turn pixels back into a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CgimHeader {
    pub b: u8,
    pub coord_min: f64,
    pub coord_max: f64,
    pub r1: usize,
    pub r2: usize,
    /// `row_runs[i] + 1` runs of equal vertices in row `i`.
    pub row_runs: Vec<usize>,
    /// `col_runs[j] + 1` runs of equal vertices in column `j`.
    pub col_runs: Vec<usize>,
    /// Run boundaries `(i, j) | (i, j + 1)` between distinct vertices whose
    /// pixels coincide; they cannot be located from pixel distances.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub collision_row_cuts: Vec<(usize, usize)>,
    /// Same for boundaries `(i, j) / (i + 1, j)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub collision_col_cuts: Vec<(usize, usize)>,
}

impl CgimHeader {
    pub fn validate(&self) -> Result<(), CodecError> {
        check_bits(self.b)?;
        if !(self.coord_min < self.coord_max) || !self.coord_min.is_finite() || !self.coord_max.is_finite() {
            return Err(CodecError::DegenerateRange(self.coord_min));
        }
        let bad = |msg: String| CodecError::RunCounts {
            r1: self.r1,
            r2: self.r2,
            msg,
        };
        if self.r1 == 0 || self.r2 == 0 {
            return Err(bad("empty array".into()));
        }
        if self.row_runs.len() != self.r1 || self.col_runs.len() != self.r2 {
            return Err(bad(format!(
                "{} row counts and {} column counts",
                self.row_runs.len(),
                self.col_runs.len()
            )));
        }
        if let Some(i) = self.row_runs.iter().position(|&x| x >= self.r2) {
            return Err(bad(format!("row {i} has {} cuts", self.row_runs[i])));
        }
        if let Some(j) = self.col_runs.iter().position(|&y| y >= self.r1) {
            return Err(bad(format!("column {j} has {} cuts", self.col_runs[j])));
        }
        let mut per_row = vec![0usize; self.r1];
        for &(i, j) in &self.collision_row_cuts {
            if i >= self.r1 || j + 1 >= self.r2 {
                return Err(bad(format!("collision cut ({i}, {j}) outside the rows")));
            }
            per_row[i] += 1;
        }
        let mut per_col = vec![0usize; self.r2];
        for &(i, j) in &self.collision_col_cuts {
            if i + 1 >= self.r1 || j >= self.r2 {
                return Err(bad(format!("collision cut ({i}, {j}) outside the columns")));
            }
            per_col[j] += 1;
        }
        if let Some(i) = (0..self.r1).find(|&i| per_row[i] > self.row_runs[i]) {
            return Err(bad(format!("row {i} lists more collision cuts than cuts")));
        }
        if let Some(j) = (0..self.r2).find(|&j| per_col[j] > self.col_runs[j]) {
            return Err(bad(format!("column {j} lists more collision cuts than cuts")));
        }
        Ok(())
    }

    /// Checks that the header describes `a`.
    pub fn matches(&self, a: &CgimArray) -> Result<(), CodecError> {
        self.validate()?;
        if (a.r1, a.r2, a.b) != (self.r1, self.r2, self.b) {
            return Err(CodecError::RunCounts {
                r1: a.r1,
                r2: a.r2,
                msg: format!("header describes a {}x{} array at {} bits", self.r1, self.r2, self.b),
            });
        }
        Ok(())
    }
}

fn check_bits(b: u8) -> Result<(), CodecError> {
    if b == 8 || b == 16 {
        Ok(())
    } else {
        Err(CodecError::BitDepth(b))
    }
}

fn max_value(b: u8) -> u16 {
    ((1u32 << b) - 1) as u16
}

/// Maps a coordinate into `[0, 2^b − 1]`, rounding halves away from zero.
pub fn quantize(c: f64, min: f64, max: f64, b: u8) -> u16 {
    let top = f64::from(max_value(b));
    ((c - min) * top / (max - min)).round().clamp(0.0, top) as u16
}

/// Quantizes every cell of `v` with the mesh's global coordinate range.
pub fn encode_cgim(v: &VMatrix, mesh: &Mesh, b: u8) -> Result<(CgimArray, CgimHeader), CodecError> {
    check_bits(b)?;
    let (min, max) = mesh.coordinate_range();
    if !(min < max) {
        return Err(CodecError::DegenerateRange(min));
    }
    let mut data = Vec::with_capacity(v.r1() * v.r2() * 3);
    for row in v.rows() {
        for &id in row {
            let p = mesh
                .positions()
                .get(id.index())
                .ok_or_else(|| CodecError::Malformed(format!("cell holds unknown vertex {id}")))?;
            data.extend(p.iter().map(|&c| quantize(c, min, max, b)));
        }
    }
    let (row_runs, col_runs) = v.run_counts();
    let (r1, r2) = (v.r1(), v.r2());
    let px = |i: usize, j: usize| &data[(i * r2 + j) * 3..(i * r2 + j) * 3 + 3];
    let mut collision_row_cuts = Vec::new();
    let mut collision_col_cuts = Vec::new();
    for i in 0..r1 {
        for j in 0..r2 {
            if j + 1 < r2 && v.get(i, j) != v.get(i, j + 1) && px(i, j) == px(i, j + 1) {
                collision_row_cuts.push((i, j));
            }
            if i + 1 < r1 && v.get(i, j) != v.get(i + 1, j) && px(i, j) == px(i + 1, j) {
                collision_col_cuts.push((i, j));
            }
        }
    }
    let header = CgimHeader {
        b,
        coord_min: min,
        coord_max: max,
        r1: v.r1(),
        r2: v.r2(),
        row_runs,
        col_runs,
        collision_row_cuts,
        collision_col_cuts,
    };
    Ok((CgimArray { r1, r2, b, data }, header))
}

/// Inverse of the channel map, without rounding.
pub fn decode_vertex(pixel: [u16; 3], header: &CgimHeader) -> [f64; 3] {
    decode_mean(pixel.map(f64::from), header)
}

pub(crate) fn decode_mean(pixel: [f64; 3], header: &CgimHeader) -> [f64; 3] {
    let step = (header.coord_max - header.coord_min) / f64::from(max_value(header.b));
    pixel.map(|p| header.coord_min + p * step)
}

/// Exact inverse of [`encode_cgim`] up to rounding: the cluster phase on an
/// unmodified array, with the header's run counts delimiting the runs.
pub fn reconstruct_lossless(a: &CgimArray, h: &CgimHeader) -> Result<Decoded, CodecError> {
    h.matches(a)?;
    reconstruct_lossy(a, h)
}

/// Pixel-domain degradation applied between encoding and reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum LossyCodec {
    Identity,
    /// Zeroes the `k` low bits of every channel.
    Quantize(u8),
    /// `w × w` mean filter per channel, borders clamped.
    BoxBlur(u8),
}

impl LossyCodec {
    pub fn name(&self) -> &'static str {
        match self {
            LossyCodec::Identity => "identity",
            LossyCodec::Quantize(_) => "quantize",
            LossyCodec::BoxBlur(_) => "boxblur",
        }
    }

    pub fn rate_param(&self) -> u8 {
        match *self {
            LossyCodec::Identity => 0,
            LossyCodec::Quantize(k) | LossyCodec::BoxBlur(k) => k,
        }
    }
}

impl fmt::Display for LossyCodec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossyCodec::Identity => write!(f, "identity"),
            c => write!(f, "{}:{}", c.name(), c.rate_param()),
        }
    }
}

impl FromStr for LossyCodec {
    type Err = CodecError;

    /// `identity`, `quantize:K` or `boxblur:W`.
    fn from_str(s: &str) -> Result<Self, CodecError> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let num = |p: Option<&str>| -> Result<u8, CodecError> {
            let p = p.ok_or_else(|| CodecError::BadCodecParam(format!("{name} needs a parameter")))?;
            p.trim()
                .parse()
                .map_err(|_| CodecError::BadCodecParam(format!("{p:?} is not a small integer")))
        };
        match name.trim() {
            "identity" if param.is_none_or(|p| p.trim().is_empty() || p.trim() == "0") => Ok(LossyCodec::Identity),
            "identity" => Err(CodecError::BadCodecParam("identity takes no parameter".into())),
            "quantize" => Ok(LossyCodec::Quantize(num(param)?)),
            "boxblur" => {
                let w = num(param)?;
                if w == 0 {
                    return Err(CodecError::BadCodecParam("blur width must be at least 1".into()));
                }
                Ok(LossyCodec::BoxBlur(w))
            }
            other => Err(CodecError::UnknownCodec(other.to_string())),
        }
    }
}

impl TryFrom<String> for LossyCodec {
    type Error = CodecError;
    fn try_from(s: String) -> Result<Self, CodecError> {
        s.parse()
    }
}

impl From<LossyCodec> for String {
    fn from(c: LossyCodec) -> String {
        c.to_string()
    }
}

/// Applies `codec`; the result has the shape and bit depth of `a`.
pub fn apply_codec(a: &CgimArray, codec: LossyCodec) -> Result<CgimArray, CodecError> {
    match codec {
        LossyCodec::Identity => Ok(a.clone()),
        LossyCodec::Quantize(k) => {
            if k >= a.b {
                return Err(CodecError::BadCodecParam(format!(
                    "quantize:{k} would clear every bit of a {}-bit channel",
                    a.b
                )));
            }
            let mask = !((1u32 << k) - 1) as u16;
            Ok(a.map_channels(|i, j, c| a.pixel(i, j)[c] & mask))
        }
        LossyCodec::BoxBlur(w) => {
            if w == 0 {
                return Err(CodecError::BadCodecParam("blur width must be at least 1".into()));
            }
            let w = usize::from(w);
            let (before, after) = ((w - 1) / 2, w / 2);
            let clamp = |x: isize, n: usize| x.clamp(0, n as isize - 1) as usize;
            Ok(a.map_channels(|i, j, c| {
                let mut sum = 0u64;
                for di in -(before as isize)..=after as isize {
                    for dj in -(before as isize)..=after as isize {
                        let (y, x) = (clamp(i as isize + di, a.r1), clamp(j as isize + dj, a.r2));
                        sum += u64::from(a.pixel(y, x)[c]);
                    }
                }
                (sum as f64 / (w * w) as f64).round() as u16
            }))
        }
    }
}
