//! File formats: device CSV datasets, JSON documents, helper-data bundles.
//! All writes go through a temporary file in the target directory followed
//! by a rename.

use std::fs;
use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use qpuf_core::galois::FieldElement;
use qpuf_core::keygen::{HelperDataBundle, FORMAT_VERSION};
use qpuf_core::polarcode::WiretapCode;
use qpuf_core::pufsim::{PufResponse, NODES};
use qpuf_core::quantize::{AnalogHelperData, Quantizer, SymbolVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, Error> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    write_atomic(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e))
}

fn device_header() -> Vec<String> {
    std::iter::once("device".to_string())
        .chain((0..NODES).map(|i| format!("node_{i}")))
        .collect()
}

/// One row per device: its index and 128 raw values in points.
pub fn devices_to_csv(devices: &[PufResponse]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(device_header()).expect("in-memory write");
    for (i, d) in devices.iter().enumerate() {
        let row = std::iter::once(i.to_string()).chain(d.values().iter().map(|v| v.to_string()));
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

pub fn write_devices(path: &Path, devices: &[PufResponse]) -> Result<(), Error> {
    write_atomic(path, &devices_to_csv(devices))
}

pub fn read_devices(path: &Path) -> Result<Vec<PufResponse>, Error> {
    let bytes = read_file(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    let header = r.headers().map_err(|e| Error::format(path, e))?;
    if header.iter().ne(device_header().iter().map(String::as_str)) {
        return Err(Error::format(path, "unexpected device CSV header"));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::format(path, e))?;
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<i32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::format(path, e))?;
        out.push(PufResponse::from_slice(&values, false).map_err(|e| Error::format(path, e))?);
    }
    Ok(out)
}

/// On-disk helper data: binary fields are base64 encoded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFile {
    pub format_version: String,
    /// One byte per symbol of W.
    pub w: String,
    /// Little-endian f64 offsets, if enrolled with them.
    pub w_prime: Option<String>,
    pub quantizer: Quantizer,
    pub code: WiretapCode,
    pub secret_hash: String,
}

impl From<&HelperDataBundle> for BundleFile {
    fn from(b: &HelperDataBundle) -> Self {
        let w: Vec<u8> = b.w.0.iter().map(|s| s.0).collect();
        let w_prime = b.w_prime.as_ref().map(|wp| {
            let bytes: Vec<u8> = wp.offsets.iter().flat_map(|o| o.to_le_bytes()).collect();
            B64.encode(bytes)
        });
        BundleFile {
            format_version: b.format_version.clone(),
            w: B64.encode(w),
            w_prime,
            quantizer: b.quantizer.clone(),
            code: b.code.clone(),
            secret_hash: B64.encode(b.secret_hash),
        }
    }
}

impl BundleFile {
    pub fn into_bundle(self) -> Result<HelperDataBundle, String> {
        if self.format_version != FORMAT_VERSION {
            return Err(format!(
                "unsupported helper data format {:?}",
                self.format_version
            ));
        }
        let w = B64.decode(&self.w).map_err(|e| format!("w: {e}"))?;
        let w_prime = match self.w_prime {
            Some(s) => {
                let bytes = B64.decode(s).map_err(|e| format!("w_prime: {e}"))?;
                if bytes.len() % 8 != 0 {
                    return Err("w_prime is not a sequence of f64".into());
                }
                let offsets = bytes
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect();
                Some(AnalogHelperData { offsets })
            }
            None => None,
        };
        let hash = B64
            .decode(&self.secret_hash)
            .map_err(|e| format!("secret_hash: {e}"))?;
        let secret_hash: [u8; 32] = hash
            .try_into()
            .map_err(|_| "secret_hash must be 32 bytes".to_string())?;
        let bundle = HelperDataBundle {
            format_version: self.format_version,
            w: SymbolVector(w.into_iter().map(FieldElement).collect()),
            w_prime,
            quantizer: self.quantizer,
            code: self.code,
            secret_hash,
        };
        bundle.validate().map_err(|e| e.to_string())?;
        Ok(bundle)
    }
}

pub fn write_bundle(path: &Path, bundle: &HelperDataBundle) -> Result<(), Error> {
    write_json(path, &BundleFile::from(bundle))
}

pub fn read_bundle(path: &Path) -> Result<HelperDataBundle, Error> {
    let file: BundleFile = read_json(path)?;
    file.into_bundle().map_err(|e| Error::format(path, e))
}
