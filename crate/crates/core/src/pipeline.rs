//! Encode, decode and rate-distortion evaluation as used by the command-line driver.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cluster::{reconstruct_lossy, Decoded};
use crate::codec::{apply_codec, encode_cgim, reconstruct_lossless, CgimArray, CgimHeader, LossyCodec};
use crate::container::compressed_size;
use crate::corpus::CorpusKind;
use crate::error::PipelineError;
use crate::isomatrix::{isomatrix, VMatrix, Variant, DEFAULT_ALPHA};
use crate::level::VertexId;
use crate::mesh::{validate_topology, Mesh};
use crate::metrics::{error_report, DEFAULT_SAMPLES_PER_FACE};
use crate::parametrize::tutte_parametrize;

/// Every knob of a pipeline run. Deserializes from JSON with missing fields
/// taking their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub bits: u8,
    pub variant: Variant,
    pub alpha: usize,
    /// Degradations to apply; `evaluate` emits one row per entry.
    pub codec: Vec<LossyCodec>,
    pub lossy: bool,
    pub samples_per_face: usize,
    pub seed: u64,
    pub kind: Option<CorpusKind>,
    pub size: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            output: None,
            bits: 8,
            variant: Variant::Modified,
            alpha: DEFAULT_ALPHA,
            codec: vec![LossyCodec::Identity],
            lossy: false,
            samples_per_face: DEFAULT_SAMPLES_PER_FACE,
            seed: 0,
            kind: None,
            size: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.bits != 8 && self.bits != 16 {
            return bad(format!("bits must be 8 or 16, got {}", self.bits));
        }
        if self.variant == Variant::Modified && self.alpha < 2 {
            return bad(format!("alpha must be at least 2, got {}", self.alpha));
        }
        if self.samples_per_face == 0 {
            return bad("samplesPerFace must be positive".into());
        }
        if self.codec.is_empty() {
            return bad("codec list is empty".into());
        }
        for c in &self.codec {
            match *c {
                LossyCodec::Quantize(k) if k >= self.bits => {
                    return bad(format!("{c} clears every bit of a {}-bit channel", self.bits))
                }
                LossyCodec::BoxBlur(0) => return bad("boxblur width must be positive".into()),
                _ => {}
            }
        }
        if let Some(size) = self.size {
            if size < 3 {
                return bad(format!("corpus size must be at least 3, got {size}"));
            }
        }
        Ok(())
    }

    /// The single degradation for encode and decode runs.
    pub fn single_codec(&self) -> Result<LossyCodec, PipelineError> {
        match self.codec.as_slice() {
            [c] => Ok(*c),
            _ => Err(PipelineError::Config(format!(
                "expected one codec, got {}",
                self.codec.len()
            ))),
        }
    }
}

/// Rejects meshes that are not open genus-zero manifolds.
pub fn check_topology(mesh: &Mesh) -> Result<(), PipelineError> {
    let report = validate_topology(mesh);
    if report.passes() {
        Ok(())
    } else {
        Err(PipelineError::Topology(report.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub vmatrix: VMatrix,
    pub array: CgimArray,
    pub header: CgimHeader,
}

/// Validation, parametrization, V-matrix and quantization.
pub fn encode_mesh(mesh: &Mesh, cfg: &PipelineConfig) -> Result<Encoded, PipelineError> {
    cfg.validate()?;
    check_topology(mesh)?;
    let param = tutte_parametrize(mesh)?;
    let vmatrix = isomatrix(mesh, &param, cfg.variant, cfg.alpha)?;
    let (array, header) = encode_cgim(&vmatrix, mesh, cfg.bits)?;
    Ok(Encoded { vmatrix, array, header })
}

/// Applies `codec` and reconstructs, by clustering when `lossy` is set.
pub fn decode_array(a: &CgimArray, h: &CgimHeader, codec: LossyCodec, lossy: bool) -> Result<Decoded, PipelineError> {
    if !lossy && codec != LossyCodec::Identity {
        return Err(PipelineError::Config(format!(
            "{codec} alters the pixels; lossless decoding needs the identity codec"
        )));
    }
    let degraded = apply_codec(a, codec)?;
    Ok(if lossy {
        reconstruct_lossy(&degraded, h)?
    } else {
        reconstruct_lossless(&degraded, h)?
    })
}

/// One point of a rate-distortion sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalRow {
    pub codec_name: String,
    pub rate_param: u8,
    pub file_bytes: u64,
    pub psnr_db: f64,
    pub haus_max: f64,
    pub haus_rms: f64,
    pub missing_edges: usize,
    pub extra_edges: usize,
}

/// Encodes once, then degrades, reconstructs and measures for each codec in
/// `cfg.codec`, in order.
pub fn evaluate(mesh: &Mesh, cfg: &PipelineConfig) -> Result<Vec<EvalRow>, PipelineError> {
    let enc = encode_mesh(mesh, cfg)?;
    let mut rows = Vec::with_capacity(cfg.codec.len());
    for &codec in &cfg.codec {
        let degraded = apply_codec(&enc.array, codec)?;
        let file_bytes = compressed_size(&degraded, &enc.header);
        let decoded = reconstruct_lossy(&degraded, &enc.header)?;
        let map = majority_map(&enc.vmatrix, &decoded);
        let r = error_report(
            mesh,
            &decoded.mesh,
            &decoded.edges,
            &map,
            u32::from(cfg.bits),
            cfg.samples_per_face,
        )?;
        rows.push(EvalRow {
            codec_name: codec.name().to_string(),
            rate_param: codec.rate_param(),
            file_bytes,
            psnr_db: r.psnr,
            haus_max: r.hausdorff_max,
            haus_rms: r.hausdorff_rms,
            missing_edges: r.edge_set_diff.missing,
            extra_edges: r.edge_set_diff.extra,
        });
    }
    Ok(rows)
}

/// For each decoded vertex, the original vertex filling most of its cells
/// (ties to the smaller id). Exact whenever clustering recovers the runs.
pub fn majority_map(v: &VMatrix, decoded: &Decoded) -> Vec<VertexId> {
    let cats = &decoded.categories;
    let mut votes: Vec<BTreeMap<VertexId, usize>> = vec![BTreeMap::new(); cats.count()];
    for i in 0..v.r1() {
        for j in 0..v.r2() {
            *votes[cats.id(i, j) as usize].entry(v.get(i, j)).or_default() += 1;
        }
    }
    votes
        .iter()
        .map(|vs| {
            let mut best = (0usize, VertexId(0));
            for (&id, &n) in vs {
                if n > best.0 {
                    best = (n, id);
                }
            }
            best.1
        })
        .collect()
}

/// CSV with a header line and one line per row.
pub fn rows_to_csv(rows: &[EvalRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize to CSV");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is UTF-8")
}
