//! Checkpoint files for long verification runs: a binary little-endian dump
//! of one coefficient array, digest-protected and bit-exact across
//! platforms.
//!
//! Layout: magic "RPUC", format version (u32), k (u32), m (u32), N (u64);
//! then N+1 coefficient records, each a u32 byte length followed by the
//! little-endian magnitude (zero encodes as length 0); then the SHA-256 of
//! header plus body.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::params::PolyParams;
use crate::poly::DensePolynomial;

pub const MAGIC: [u8; 4] = *b"RPUC";
pub const FORMAT_VERSION: u32 = 1;

/// Conventional file name for the rolling checkpoint of one (k, m0) run.
pub fn checkpoint_file(dir: &Path, k: u32, m0: u32) -> PathBuf {
    dir.join(format!("regulo-k{k}-m0{m0}.ckpt"))
}

/// Writes the polynomial to `path` atomically (temp file, then rename).
pub fn save(poly: &DensePolynomial, path: &Path) -> Result<()> {
    let tmp = path.with_extension("ckpt.tmp");
    {
        let file = File::create(&tmp)?;
        let mut w = HashingWriter {
            inner: BufWriter::new(file),
            hasher: Sha256::new(),
        };
        let p = poly.params();
        w.write_all(&MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&p.k.to_le_bytes())?;
        w.write_all(&p.m.to_le_bytes())?;
        w.write_all(&p.degree.to_le_bytes())?;
        for c in poly.coeffs() {
            let bytes = if c.is_zero() {
                Vec::new()
            } else {
                c.to_bytes_le()
            };
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(&bytes)?;
        }
        let digest = w.hasher.clone().finalize();
        w.inner.write_all(&digest)?;
        w.inner.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a checkpoint back, verifying structure and digest as it streams.
pub fn load(path: &Path) -> Result<DensePolynomial> {
    let corrupt = |reason: &str| Error::CorruptCheckpoint {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let file_len = fs::metadata(path)?.len();
    let file = File::open(path)?;
    let mut r = HashingReader {
        inner: BufReader::new(file),
        hasher: Sha256::new(),
    };

    let mut magic = [0u8; 4];
    read_fully(&mut r, &mut magic).map_err(|_| corrupt("truncated header"))?;
    if magic != MAGIC {
        return Err(corrupt("bad magic bytes"));
    }
    let version = read_u32(&mut r).map_err(|_| corrupt("truncated header"))?;
    if version != FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            path: path.to_path_buf(),
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let k = read_u32(&mut r).map_err(|_| corrupt("truncated header"))?;
    let m = read_u32(&mut r).map_err(|_| corrupt("truncated header"))?;
    let mut degree_bytes = [0u8; 8];
    read_fully(&mut r, &mut degree_bytes).map_err(|_| corrupt("truncated header"))?;
    let degree = u64::from_le_bytes(degree_bytes);

    let params = PolyParams::new(k as i64, m as i64)
        .map_err(|_| corrupt("header parameters are invalid"))?;
    if params.degree != degree {
        return Err(corrupt("stored degree disagrees with k and m"));
    }
    // Each record is at least 4 bytes; a short file cannot hold the claimed
    // coefficient count, so reject before allocating.
    if file_len < 24 + (degree + 1) * 4 + 32 {
        return Err(corrupt("file too short for the claimed coefficient count"));
    }

    let max_bytes = params.max_coeff_bytes();
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut buf = Vec::new();
    for _ in 0..=degree {
        let len = read_u32(&mut r).map_err(|_| corrupt("truncated coefficient record"))? as u64;
        if len > max_bytes {
            return Err(corrupt("coefficient record longer than any possible value"));
        }
        buf.resize(len as usize, 0);
        read_fully(&mut r, &mut buf).map_err(|_| corrupt("truncated coefficient record"))?;
        if buf.last() == Some(&0) {
            return Err(corrupt("non-canonical coefficient encoding"));
        }
        coeffs.push(BigUint::from_bytes_le(&buf));
    }

    let computed = r.hasher.clone().finalize();
    let mut stored = [0u8; 32];
    r.inner
        .read_exact(&mut stored)
        .map_err(|_| corrupt("truncated digest"))?;
    if stored != computed[..] {
        return Err(corrupt("digest mismatch"));
    }
    let mut extra = [0u8; 1];
    if r.inner.read(&mut extra)? != 0 {
        return Err(corrupt("trailing bytes after digest"));
    }

    DensePolynomial::from_parts(params, coeffs)
}

struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> HashingWriter<W> {
    fn write_all(&mut self, data: &[u8]) -> std::io::Result<()> {
        self.hasher.update(data);
        self.inner.write_all(data)
    }
}

struct HashingReader<R: Read> {
    inner: R,
    hasher: Sha256,
}

fn read_fully<R: Read>(r: &mut HashingReader<R>, buf: &mut [u8]) -> std::io::Result<()> {
    r.inner.read_exact(buf)?;
    r.hasher.update(buf);
    Ok(())
}

fn read_u32<R: Read>(r: &mut HashingReader<R>) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    read_fully(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}
