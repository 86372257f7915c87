//! Hierarchical, counter-addressed randomness.
//!
//! A [`SeedKey`] names a random stream by its root seed and a derivation
//! path. Child keys are produced with a keyed BLAKE3 hash of the parent
//! digest, the length-prefixed label and the index, so derivation needs no
//! coordination and never depends on evaluation order. Each key owns an
//! infinite stream of uniforms; element `i` of the stream is
//! [`uniform01`]`(key, i)`, computed by seeking a ChaCha8 generator.

use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Longest accepted derivation label, in bytes.
pub const MAX_LABEL_LEN: usize = 32;

/// Seed used when a configuration omits `root_seed`.
pub const DEFAULT_ROOT_SEED: &str =
    "5265706c696361626c65206c61622064656661756c7420726f6f742073656564";

const ROOT_CONTEXT: &str = "replicalab 2026 seed root v1";
const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug)]
struct PathNode {
    parent: Option<Arc<PathNode>>,
    label: Box<str>,
    index: u64,
}

/// A node in the seed derivation tree.
#[derive(Clone)]
pub struct SeedKey {
    root: [u8; 32],
    digest: [u8; 32],
    path: Option<Arc<PathNode>>,
}

impl SeedKey {
    pub fn from_root(root: [u8; 32]) -> Self {
        let digest = blake3::derive_key(ROOT_CONTEXT, &root);
        Self { root, digest, path: None }
    }

    /// Parses a 64-character hex string.
    pub fn from_hex(hex: &str) -> Result<Self> {
        let hex = hex.trim();
        if hex.len() != 64 {
            return Err(Error::Config(format!(
                "root_seed must be 64 hex characters, got {}",
                hex.len()
            )));
        }
        let mut root = [0u8; 32];
        for (i, byte) in root.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Config(format!("root_seed is not valid hex: {hex:?}")))?;
        }
        Ok(Self::from_root(root))
    }

    /// Convenience constructor for tests and examples.
    pub fn from_u64(seed: u64) -> Self {
        let mut root = [0u8; 32];
        root[..8].copy_from_slice(&seed.to_le_bytes());
        Self::from_root(root)
    }

    pub fn root_hex(&self) -> String {
        self.root.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn root(&self) -> &[u8; 32] {
        &self.root
    }

    /// Derives a child key.
    pub fn derive(&self, label: &str, index: u64) -> Result<SeedKey> {
        if label.is_empty() || label.len() > MAX_LABEL_LEN {
            return Err(Error::Config(format!(
                "seed label {label:?} must be 1..={MAX_LABEL_LEN} bytes"
            )));
        }
        let mut msg = Vec::with_capacity(1 + label.len() + 8);
        msg.push(label.len() as u8);
        msg.extend_from_slice(label.as_bytes());
        msg.extend_from_slice(&index.to_le_bytes());
        let digest = *blake3::keyed_hash(&self.digest, &msg).as_bytes();
        Ok(SeedKey {
            root: self.root,
            digest,
            path: Some(Arc::new(PathNode {
                parent: self.path.clone(),
                label: label.into(),
                index,
            })),
        })
    }

    /// Derivation with a compile-time label; panics only if the label is
    /// empty or longer than [`MAX_LABEL_LEN`].
    pub fn child(&self, label: &'static str, index: u64) -> SeedKey {
        self.derive(label, index).expect("static seed label is valid")
    }

    /// The derivation path from the root, outermost step first.
    pub fn path(&self) -> Vec<(String, u64)> {
        let mut out = Vec::new();
        let mut node = self.path.as_deref();
        while let Some(n) = node {
            out.push((n.label.to_string(), n.index));
            node = n.parent.as_deref();
        }
        out.reverse();
        out
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    /// The key's uniform stream, positioned at counter 0.
    pub fn stream(&self) -> UniformStream {
        UniformStream { rng: ChaCha8Rng::from_seed(self.digest) }
    }

    /// The key's uniform stream, positioned at `counter`.
    pub fn stream_at(&self, counter: u64) -> UniformStream {
        let mut rng = ChaCha8Rng::from_seed(self.digest);
        rng.set_word_pos(2 * counter as u128);
        UniformStream { rng }
    }
}

impl PartialEq for SeedKey {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.digest == other.digest
    }
}

impl Eq for SeedKey {}

impl fmt::Debug for SeedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path().iter().map(|(l, i)| format!("{l}/{i}")).collect();
        write!(f, "SeedKey({}…:/{})", &self.root_hex()[..8], path.join("/"))
    }
}

/// Sequential view of a key's stream.
///
/// The `i`-th call to [`UniformStream::next_f64`] from a fresh stream
/// returns `uniform01(key, i)`. Implements [`RngCore`] so distributions from
/// `rand_distr` can draw from it; every `next_u64` advances the counter by
/// one.
#[derive(Clone, Debug)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    /// Next uniform in `[0, 1)` with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    /// Next uniform in the open interval `(0, 1)`.
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    /// Uniform index in `0..n`; `n` must be positive.
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

impl RngCore for UniformStream {
    fn next_u32(&mut self) -> u32 {
        (self.rng.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(8) {
            let bytes = self.rng.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

/// Deterministic uniform in `[0, 1)` at position `counter` of the key's stream.
pub fn uniform01(key: &SeedKey, counter: u64) -> f64 {
    key.stream_at(counter).next_f64()
}

/// Functional form of [`SeedKey::derive`].
pub fn derive(parent: &SeedKey, label: &str, index: u64) -> Result<SeedKey> {
    parent.derive(label, index)
}

/// Uniformly random permutation of `0..n` by Fisher–Yates over the key's stream.
pub fn random_permutation(key: &SeedKey, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::EmptyDomain("permutation of an empty set".into()));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut stream = key.stream();
    for i in (1..n).rev() {
        let j = stream.next_index(i + 1);
        perm.swap(i, j);
    }
    Ok(perm)
}
