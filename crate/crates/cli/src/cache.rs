//! On-disk memoization of spectra keyed by `(N, Λ, δ, window)`.
//!
//! Files are named by the SHA-256 of the key and written once: the data
//! goes to a private temporary file that is atomically renamed into place,
//! so concurrent writers of the same key cannot corrupt each other. Every
//! load is re-verified against the Hamiltonian before use.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use bellfringe::model::{full_spectrum, low_spectrum};
use bellfringe::{ModelParams64, Spectrum64};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const MAGIC: &[u8; 8] = b"BFSPEC01";
static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self, CliError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key(params: &ModelParams64, window: f64) -> String {
        let text = format!(
            "bellfringe-spectrum;N={};lambda={:016x};delta={:016x};window={:016x}",
            params.n,
            params.lambda.to_bits(),
            params.delta.to_bits(),
            window.to_bits()
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn path_for(&self, params: &ModelParams64, window: f64) -> PathBuf {
        self.dir.join(format!("{}.spec", Self::key(params, window)))
    }

    /// The spectrum with every level up to `E₀ + window` (all levels when infinite).
    pub fn get_or_compute(&self, params: &ModelParams64, window: f64) -> Result<Spectrum64, CliError> {
        let path = self.path_for(params, window);
        if let Ok(spectrum) = load(&path, params) {
            return Ok(spectrum);
        }
        let spectrum = compute(params, window)?;
        store(&path, &spectrum)?;
        Ok(spectrum)
    }
}

pub fn compute(params: &ModelParams64, window: f64) -> Result<Spectrum64, CliError> {
    Ok(if window.is_finite() { low_spectrum(params, window)? } else { full_spectrum(params)? })
}

fn store(path: &Path, spectrum: &Spectrum64) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    let dim = spectrum.states()[0].coeffs().len();
    bytes.extend_from_slice(&(spectrum.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&(dim as u64).to_le_bytes());
    bytes.extend_from_slice(&spectrum.reach().to_le_bytes());
    for e in spectrum.energies() {
        bytes.extend_from_slice(&e.to_le_bytes());
    }
    for s in spectrum.states() {
        for c in s.coeffs() {
            bytes.extend_from_slice(&c.to_le_bytes());
        }
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load(path: &Path, params: &ModelParams64) -> Result<Spectrum64, CliError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let corrupt = || CliError::Io(io::Error::new(io::ErrorKind::InvalidData, "corrupt spectrum cache file"));
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return Err(corrupt());
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes") };
    let count = u64::from_le_bytes(word(0)) as usize;
    let dim = u64::from_le_bytes(word(1)) as usize;
    let reach = f64::from_le_bytes(word(2));
    if dim != params.n + 1 || count == 0 || count > dim || bytes.len() != 32 + 8 * count * (dim + 1) {
        return Err(corrupt());
    }
    let mut floats = bytes[32..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let energies: Vec<f64> = floats.by_ref().take(count).collect();
    let vectors: Vec<Vec<f64>> = (0..count).map(|_| floats.by_ref().take(dim).collect()).collect();
    Ok(Spectrum64::from_parts(params, energies, vectors, reach)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stores_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path()).unwrap();
        let params = ModelParams64::new(40, -1.1, 0.02).unwrap();
        let first = cache.get_or_compute(&params, 4.0).unwrap();
        let path = cache.path_for(&params, 4.0);
        assert!(path.exists());
        assert_eq!(path.file_name().unwrap().len(), 64 + 5);
        let second = cache.get_or_compute(&params, 4.0).unwrap();
        assert_eq!(first, second);
        // a different key misses
        assert_ne!(path, cache.path_for(&params.with_delta(0.0), 4.0));
        let full = cache.get_or_compute(&params, f64::INFINITY).unwrap();
        assert!(full.is_complete());
        assert_eq!(cache.get_or_compute(&params, f64::INFINITY).unwrap(), full);
    }

    #[test]
    fn corrupt_files_are_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SpectrumCache::new(dir.path()).unwrap();
        let params = ModelParams64::new(20, 2.0, 0.0).unwrap();
        let good = cache.get_or_compute(&params, 2.0).unwrap();
        let path = cache.path_for(&params, 2.0);
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        fs::write(&path, &bytes).unwrap();
        assert!(load(&path, &params).is_err());
        assert_eq!(cache.get_or_compute(&params, 2.0).unwrap(), good);
    }
}
