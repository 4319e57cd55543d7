//! Versioned binary containers for caches and trained models.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, then a bincode
//! payload. Readers reject a wrong magic or an unknown version instead of
//! guessing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 8], found: [u8; 8] },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { expected: u32, found: u32 },
    #[error("payload encoding: {0}")]
    Encoding(#[from] bincode::Error),
}

/// Identifies one kind of persisted artifact.
#[derive(Debug, Clone, Copy)]
pub struct Format {
    pub magic: [u8; 8],
    pub version: u32,
}

pub const SNAPSHOT_FORMAT: Format = Format { magic: *b"CCSNAPSH", version: 1 };
pub const TOPIC_MODEL_FORMAT: Format = Format { magic: *b"CCTOPICS", version: 1 };
pub const GCN_MODEL_FORMAT: Format = Format { magic: *b"CCGCNMOD", version: 1 };
pub const BASELINE_MODEL_FORMAT: Format = Format { magic: *b"CCBASELN", version: 1 };

pub fn encode<T: Serialize>(format: Format, value: &T, mut out: impl Write) -> Result<(), PersistError> {
    out.write_all(&format.magic)?;
    out.write_all(&format.version.to_le_bytes())?;
    bincode::serialize_into(&mut out, value)?;
    out.flush()?;
    Ok(())
}

pub fn decode<T: DeserializeOwned>(format: Format, mut input: impl Read) -> Result<T, PersistError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != format.magic {
        return Err(PersistError::BadMagic { expected: format.magic, found: magic });
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != format.version {
        return Err(PersistError::Version { expected: format.version, found: version });
    }
    Ok(bincode::deserialize_from(input)?)
}

pub fn save<T: Serialize>(format: Format, value: &T, path: impl AsRef<Path>) -> Result<(), PersistError> {
    encode(format, value, BufWriter::new(File::create(path)?))
}

pub fn load<T: DeserializeOwned>(format: Format, path: impl AsRef<Path>) -> Result<T, PersistError> {
    decode(format, BufReader::new(File::open(path)?))
}
