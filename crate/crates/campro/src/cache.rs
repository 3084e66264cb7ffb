//! Bit-exact NPY v1.0 array persistence with fingerprinted cache keys.
//!
//! Arrays are stored one per file, little-endian, C-order, with the
//! header laid out exactly as the published v1.0 format (and as current
//! NumPy writes it: the dictionary padded with spaces to a 64-byte
//! multiple, newline-terminated, which also satisfies the 16-byte rule).
//! Files written here are readable by external NPY tooling and vice
//! versa.
//!
//! A cache entry is addressed by dataset, stage, image stem, and a
//! fingerprint of every parameter that influenced the value:
//! `root/<dataset>/<stage>/<stem>.<fingerprint>.npy`. Changing any
//! parameter changes the fingerprint, so stale entries are never
//! returned; they simply stop being addressed.
//!
//! Writers stream to a temp file and atomically rename, so concurrent
//! readers never observe partial files. The optional npz-style bundler
//! packs records into an uncompressed zip container for interchange.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

const MAGIC: &[u8; 6] = b"\x93NUMPY";
/// Header alignment used on write (NumPy's modern choice; any multiple of
/// 16 is valid v1.0).
const ALIGN: usize = 64;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: not an NPY file (bad magic)")]
    BadMagic { path: String },
    #[error("{path}: unsupported NPY version {major}.{minor} (only 1.0)")]
    UnsupportedVersion { path: String, major: u8, minor: u8 },
    #[error("{path}: unsupported dtype descriptor {descr:?} (|u1, <f4, <f8)")]
    UnsupportedDtype { path: String, descr: String },
    #[error("{path}: fortran_order=true is not supported")]
    FortranOrder { path: String },
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: String, reason: String },
    #[error("{path}: truncated data: expected {expected} bytes, got {actual}")]
    TruncatedData {
        path: String,
        expected: usize,
        actual: usize,
    },
    #[error("array {name:?}: buffer length {len} does not match {expected} bytes")]
    BadBuffer {
        name: String,
        len: usize,
        expected: usize,
    },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

fn io_err(path: &Path, source: io::Error) -> CacheError {
    CacheError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Supported element types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    F32,
    F64,
}

impl Dtype {
    pub fn descr(&self) -> &'static str {
        match self {
            Dtype::U8 => "|u1",
            Dtype::F32 => "<f4",
            Dtype::F64 => "<f8",
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }

    fn from_descr(descr: &str) -> Option<Self> {
        match descr {
            "|u1" => Some(Dtype::U8),
            "<f4" => Some(Dtype::F32),
            "<f8" => Some(Dtype::F64),
            _ => None,
        }
    }
}

/// One named array: dtype, shape, and raw little-endian bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayRecord {
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub data: Vec<u8>,
    pub name: String,
}

impl ArrayRecord {
    pub fn new(
        name: impl Into<String>,
        dtype: Dtype,
        shape: Vec<usize>,
        data: Vec<u8>,
    ) -> Result<Self, CacheError> {
        let name = name.into();
        let expected = dtype.size() * shape.iter().product::<usize>();
        if data.len() != expected {
            return Err(CacheError::BadBuffer {
                name,
                len: data.len(),
                expected,
            });
        }
        Ok(Self {
            dtype,
            shape,
            data,
            name,
        })
    }

    pub fn from_f32(
        name: impl Into<String>,
        shape: Vec<usize>,
        values: &[f32],
    ) -> Result<Self, CacheError> {
        let mut data = Vec::with_capacity(values.len() * 4);
        for v in values {
            data.extend_from_slice(&v.to_le_bytes());
        }
        Self::new(name, Dtype::F32, shape, data)
    }

    pub fn from_f64(
        name: impl Into<String>,
        shape: Vec<usize>,
        values: &[f64],
    ) -> Result<Self, CacheError> {
        let mut data = Vec::with_capacity(values.len() * 8);
        for v in values {
            data.extend_from_slice(&v.to_le_bytes());
        }
        Self::new(name, Dtype::F64, shape, data)
    }

    pub fn from_u8(
        name: impl Into<String>,
        shape: Vec<usize>,
        values: &[u8],
    ) -> Result<Self, CacheError> {
        Self::new(name, Dtype::U8, shape, values.to_vec())
    }

    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn to_f32(&self) -> Option<Vec<f32>> {
        (self.dtype == Dtype::F32).then(|| {
            self.data
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect()
        })
    }

    pub fn to_f64(&self) -> Option<Vec<f64>> {
        (self.dtype == Dtype::F64).then(|| {
            self.data
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes([c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7]]))
                .collect()
        })
    }

    /// The exact file bytes [`write_array`] would produce.
    pub fn to_npy_bytes(&self) -> Vec<u8> {
        let shape_repr = match self.shape.len() {
            0 => "()".to_string(),
            1 => format!("({},)", self.shape[0]),
            _ => {
                let dims: Vec<String> = self.shape.iter().map(|d| d.to_string()).collect();
                format!("({})", dims.join(", "))
            }
        };
        let dict = format!(
            "{{'descr': '{}', 'fortran_order': False, 'shape': {}, }}",
            self.dtype.descr(),
            shape_repr
        );
        // Pad with spaces so magic+version+len+header is ALIGN-aligned,
        // final byte a newline.
        let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
        let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
        let header_len = dict.len() + padding + 1;

        let mut out = Vec::with_capacity(MAGIC.len() + 4 + header_len + self.data.len());
        out.extend_from_slice(MAGIC);
        out.push(1);
        out.push(0);
        out.extend_from_slice(&(header_len as u16).to_le_bytes());
        out.extend_from_slice(dict.as_bytes());
        out.extend(std::iter::repeat_n(b' ', padding));
        out.push(b'\n');
        out.extend_from_slice(&self.data);
        out
    }
}

/// Write one array as an NPY v1.0 file, atomically.
pub fn write_array(rec: &ArrayRecord, path: &Path) -> Result<(), CacheError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    let bytes = rec.to_npy_bytes();
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(&bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Read an NPY v1.0 file written by this module or external tooling.
pub fn read_array(path: &Path) -> Result<ArrayRecord, CacheError> {
    let display = path.display().to_string();
    let mut f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| io_err(path, e))?;
    parse_npy_bytes(&bytes, &display, stem_name(path))
}

fn stem_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn parse_npy_bytes(bytes: &[u8], display: &str, name: String) -> Result<ArrayRecord, CacheError> {
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(CacheError::BadMagic {
            path: display.to_string(),
        });
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(CacheError::UnsupportedVersion {
            path: display.to_string(),
            major,
            minor,
        });
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    if bytes.len() < 10 + header_len {
        return Err(CacheError::TruncatedData {
            path: display.to_string(),
            expected: 10 + header_len,
            actual: bytes.len(),
        });
    }
    let header = std::str::from_utf8(&bytes[10..10 + header_len]).map_err(|_| {
        CacheError::MalformedHeader {
            path: display.to_string(),
            reason: "header is not UTF-8".into(),
        }
    })?;

    let descr = extract_quoted(header, "'descr':").ok_or_else(|| CacheError::MalformedHeader {
        path: display.to_string(),
        reason: "missing 'descr'".into(),
    })?;
    let dtype = Dtype::from_descr(&descr).ok_or_else(|| CacheError::UnsupportedDtype {
        path: display.to_string(),
        descr: descr.clone(),
    })?;

    let fortran =
        extract_token(header, "'fortran_order':").ok_or_else(|| CacheError::MalformedHeader {
            path: display.to_string(),
            reason: "missing 'fortran_order'".into(),
        })?;
    match fortran.as_str() {
        "False" => {}
        "True" => {
            return Err(CacheError::FortranOrder {
                path: display.to_string(),
            })
        }
        other => {
            return Err(CacheError::MalformedHeader {
                path: display.to_string(),
                reason: format!("fortran_order is {other:?}"),
            })
        }
    }

    let shape = extract_shape(header).ok_or_else(|| CacheError::MalformedHeader {
        path: display.to_string(),
        reason: "missing or malformed 'shape'".into(),
    })?;

    let expected = dtype.size() * shape.iter().product::<usize>();
    let data = &bytes[10 + header_len..];
    if data.len() != expected {
        return Err(CacheError::TruncatedData {
            path: display.to_string(),
            expected,
            actual: data.len(),
        });
    }
    ArrayRecord::new(name, dtype, shape, data.to_vec())
}

/// Value of a `'key': '<value>'` header entry.
fn extract_quoted(header: &str, key: &str) -> Option<String> {
    let rest = &header[header.find(key)? + key.len()..];
    let start = rest.find('\'')? + 1;
    let end = start + rest[start..].find('\'')?;
    Some(rest[start..end].to_string())
}

/// Value of an unquoted `'key': <token>` entry, up to `,` or `}`.
fn extract_token(header: &str, key: &str) -> Option<String> {
    let rest = &header[header.find(key)? + key.len()..];
    let token: String = rest
        .trim_start()
        .chars()
        .take_while(|&c| c != ',' && c != '}')
        .collect();
    Some(token.trim().to_string())
}

fn extract_shape(header: &str) -> Option<Vec<usize>> {
    let key = "'shape':";
    let rest = &header[header.find(key)? + key.len()..];
    let open = rest.find('(')?;
    let close = open + rest[open..].find(')')?;
    let inner = &rest[open + 1..close];
    let mut shape = Vec::new();
    for part in inner.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue; // trailing comma of 1-tuples, or the 0-d "()"
        }
        shape.push(part.parse().ok()?);
    }
    Some(shape)
}

/// Stable 16-hex-character fingerprint of a parameter record.
///
/// The record serializes to canonical JSON (struct field order), so any
/// parameter change reaches the digest.
pub fn fingerprint_params<T: Serialize>(params: &T) -> String {
    let canonical = serde_json::to_string(params).expect("parameters serialize");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(16);
    for b in &digest[..8] {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Address of one cached array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheKey {
    pub dataset: String,
    pub stage: String,
    pub stem: String,
    pub fingerprint: String,
}

impl CacheKey {
    pub fn new(
        dataset: impl Into<String>,
        stage: impl Into<String>,
        stem: impl Into<String>,
        fingerprint: impl Into<String>,
    ) -> Self {
        Self {
            dataset: dataset.into(),
            stage: stage.into(),
            stem: stem.into(),
            fingerprint: fingerprint.into(),
        }
    }

    pub fn path(&self, root: &Path) -> PathBuf {
        root.join(&self.dataset)
            .join(&self.stage)
            .join(format!("{}.{}.npy", self.stem, self.fingerprint))
    }
}

/// Store a record under its key.
pub fn store(key: &CacheKey, rec: &ArrayRecord, root: &Path) -> Result<(), CacheError> {
    write_array(rec, &key.path(root))
}

/// Fetch the record for a key, or `None` when absent.
///
/// A fingerprint mismatch is an address miss by construction. A corrupt
/// entry reads as absent so the caller recomputes; the failure reason
/// lands on stderr since silent recomputation would mask disk problems.
pub fn lookup(key: &CacheKey, root: &Path) -> Option<ArrayRecord> {
    let path = key.path(root);
    if !path.exists() {
        return None;
    }
    match read_array(&path) {
        Ok(rec) => Some(rec),
        Err(e) => {
            eprintln!("cache: discarding corrupt entry {}: {e}", path.display());
            None
        }
    }
}

/// Bundle records into an uncompressed zip container (`.npz` layout):
/// each member is `<name>.npy`. Timestamps are fixed so output bytes are
/// reproducible.
pub fn bundle_npz(records: &[ArrayRecord], path: &Path) -> Result<(), CacheError> {
    let mut payload = Vec::new();
    let mut central = Vec::new();
    let mut count = 0u16;
    for rec in records {
        let name = format!("{}.npy", rec.name);
        let bytes = rec.to_npy_bytes();
        let crc = crc32(&bytes);
        let offset = payload.len() as u32;

        // Local file header.
        payload.extend_from_slice(&[0x50, 0x4b, 0x03, 0x04]);
        payload.extend_from_slice(&20u16.to_le_bytes()); // version needed
        payload.extend_from_slice(&0u16.to_le_bytes()); // flags
        payload.extend_from_slice(&0u16.to_le_bytes()); // method: stored
        payload.extend_from_slice(&0u16.to_le_bytes()); // mod time
        payload.extend_from_slice(&0x21u16.to_le_bytes()); // mod date (1980-01-01)
        payload.extend_from_slice(&crc.to_le_bytes());
        payload.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        payload.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        payload.extend_from_slice(&(name.len() as u16).to_le_bytes());
        payload.extend_from_slice(&0u16.to_le_bytes()); // extra len
        payload.extend_from_slice(name.as_bytes());
        payload.extend_from_slice(&bytes);

        // Central directory entry.
        central.extend_from_slice(&[0x50, 0x4b, 0x01, 0x02]);
        central.extend_from_slice(&20u16.to_le_bytes()); // version made by
        central.extend_from_slice(&20u16.to_le_bytes()); // version needed
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes());
        central.extend_from_slice(&0x21u16.to_le_bytes());
        central.extend_from_slice(&crc.to_le_bytes());
        central.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        central.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
        central.extend_from_slice(&(name.len() as u16).to_le_bytes());
        central.extend_from_slice(&0u16.to_le_bytes()); // extra
        central.extend_from_slice(&0u16.to_le_bytes()); // comment
        central.extend_from_slice(&0u16.to_le_bytes()); // disk number
        central.extend_from_slice(&0u16.to_le_bytes()); // internal attrs
        central.extend_from_slice(&0u32.to_le_bytes()); // external attrs
        central.extend_from_slice(&offset.to_le_bytes());
        central.extend_from_slice(name.as_bytes());
        count += 1;
    }

    let central_offset = payload.len() as u32;
    let central_size = central.len() as u32;
    let mut out = payload;
    out.extend_from_slice(&central);
    // End of central directory.
    out.extend_from_slice(&[0x50, 0x4b, 0x05, 0x06]);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&central_size.to_le_bytes());
    out.extend_from_slice(&central_offset.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    fs::write(&tmp, &out).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// IEEE CRC-32 (the zip polynomial).
fn crc32(data: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (i, slot) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 {
                0xedb8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
        }
        *slot = c;
    }
    let mut crc = 0xffff_ffffu32;
    for &b in data {
        crc = table[((crc ^ u32::from(b)) & 0xff) as usize] ^ (crc >> 8);
    }
    crc ^ 0xffff_ffff
}
