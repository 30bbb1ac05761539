//! Binary layout (little-endian):
//!
//! ```text
//! "PBFM" | u32 version | u8 alphabet size | u32 occ_rate | u32 sa_rate | u64 n
//! bwt: n + 1 bytes ('$' and alphabet characters)
//! c table: (a + 2) x u64
//! occ checkpoints: ((n + 1) / occ_rate + 1) x (a + 1) x u32
//! sampled-row bits: ceil((n + 1) / 64) x u64 | u64 sample count | samples x u32
//! u64 CRC-64/XZ of every preceding byte
//! ```

use crc::{Crc, CRC_64_XZ};
use thiserror::Error;

use super::{tally, FmIndex, RankBits};
use crate::encoder::{Alphabet, MAX_ALPHABET_SIZE};

pub const MAGIC: &[u8; 4] = b"PBFM";
pub const VERSION: u32 = 1;

pub(crate) const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("truncated input: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("bad magic bytes {found:?}, expected {expected:?}")]
    BadMagic { found: Vec<u8>, expected: Vec<u8> },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },
    #[error("inconsistent file contents: {0}")]
    Corrupt(String),
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    pub fn take(&mut self, len: usize) -> Result<&'a [u8], LoadError> {
        if self.remaining() < len {
            return Err(LoadError::Truncated {
                offset: self.pos,
                needed: len,
                available: self.remaining(),
            });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, LoadError> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32, LoadError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, LoadError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn usize(&mut self) -> Result<usize, LoadError> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| LoadError::Corrupt(format!("value {v} exceeds usize")))
    }

    /// Reads the trailing checksum and verifies it against everything from
    /// `start` up to the current position.
    pub fn verify_crc(&mut self, start: usize) -> Result<(), LoadError> {
        let computed = CRC64.checksum(&self.bytes[start..self.pos]);
        let stored = self.u64()?;
        if stored != computed {
            return Err(LoadError::ChecksumMismatch { stored, computed });
        }
        Ok(())
    }

    pub fn check_magic(&mut self, magic: &[u8; 4]) -> Result<(), LoadError> {
        let found = self.take(4)?;
        if found != magic {
            return Err(LoadError::BadMagic {
                found: found.to_vec(),
                expected: magic.to_vec(),
            });
        }
        Ok(())
    }
}

fn corrupt(msg: impl Into<String>) -> LoadError {
    LoadError::Corrupt(msg.into())
}

impl FmIndex {
    pub fn serialize(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.serialized_len_hint());
        self.write_into(&mut out);
        out
    }

    fn serialized_len_hint(&self) -> usize {
        32 + self.bwt.len()
            + self.c_table.len() * 8
            + self.occ.len() * 4
            + self.sampled_rows.words().len() * 8
            + self.samples.len() * 4
    }

    pub fn write_into(&self, out: &mut Vec<u8>) {
        let start = out.len();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.alphabet.size() as u8);
        out.extend_from_slice(&(self.occ_rate as u32).to_le_bytes());
        out.extend_from_slice(&(self.sa_rate as u32).to_le_bytes());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend(self.bwt.iter().map(|&c| self.code_char(c)));
        for &c in &self.c_table {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for &o in &self.occ {
            out.extend_from_slice(&o.to_le_bytes());
        }
        for &w in self.sampled_rows.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        for &s in &self.samples {
            out.extend_from_slice(&s.to_le_bytes());
        }
        let crc = CRC64.checksum(&out[start..]);
        out.extend_from_slice(&crc.to_le_bytes());
    }

    /// Loads an index that occupies all of `bytes`.
    pub fn deserialize(bytes: &[u8]) -> Result<Self, LoadError> {
        let mut r = Reader::new(bytes);
        let idx = Self::read_from(&mut r)?;
        if r.remaining() != 0 {
            return Err(corrupt(format!("{} trailing bytes after index", r.remaining())));
        }
        Ok(idx)
    }

    pub(crate) fn read_from(r: &mut Reader<'_>) -> Result<Self, LoadError> {
        let start = r.position();
        r.check_magic(MAGIC)?;
        let version = r.u32()?;
        if version != VERSION {
            return Err(LoadError::UnsupportedVersion(version));
        }
        let a = r.u8()? as usize;
        if a == 0 || a > MAX_ALPHABET_SIZE {
            return Err(corrupt(format!("alphabet size {a}")));
        }
        let alphabet = Alphabet::new(a).expect("size checked");
        let occ_rate = r.u32()? as usize;
        let sa_rate = r.u32()? as usize;
        if occ_rate == 0 || sa_rate == 0 {
            return Err(corrupt("zero sampling rate"));
        }
        let n = r.usize()?;
        if n >= u32::MAX as usize - 1 {
            return Err(corrupt(format!("text length {n}")));
        }
        let len = n + 1;
        let sigma = a + 1;

        let raw_bwt = r.take(len)?;
        let mut bwt = Vec::with_capacity(len);
        for (i, &c) in raw_bwt.iter().enumerate() {
            let code = if c == b'$' {
                0
            } else {
                alphabet
                    .code_of(c)
                    .ok_or_else(|| corrupt(format!("bwt byte {c:#04x} at {i}")))?
            };
            bwt.push(code);
        }

        let mut c_table = Vec::with_capacity(sigma + 1);
        for _ in 0..=sigma {
            c_table.push(r.u64()?);
        }
        let blocks = len / occ_rate + 1;
        let occ_bytes = r.take(blocks * sigma * 4)?;
        let occ: Vec<u32> = occ_bytes
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect();

        let word_count = len.div_ceil(64);
        let word_bytes = r.take(word_count * 8)?;
        let words: Vec<u64> = word_bytes
            .chunks_exact(8)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let sampled_rows = RankBits::from_words(words, len);
        let sample_count = r.usize()?;
        if sample_count != sampled_rows.count_ones() {
            return Err(corrupt("sample count does not match sampled-row bits"));
        }
        let sample_bytes = r.take(sample_count * 4)?;
        let samples: Vec<u32> = sample_bytes
            .chunks_exact(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        r.verify_crc(start)?;

        if bwt.iter().filter(|&&c| c == 0).count() != 1 {
            return Err(corrupt("bwt must contain exactly one '$'"));
        }
        let (expect_c, expect_occ) = tally(&bwt, sigma, occ_rate);
        if expect_c != c_table {
            return Err(corrupt("c table does not match bwt"));
        }
        if expect_occ != occ {
            return Err(corrupt("occurrence checkpoints do not match bwt"));
        }
        if samples.iter().any(|&s| s as usize > n || !(s as usize).is_multiple_of(sa_rate)) {
            return Err(corrupt("suffix-array sample out of range"));
        }

        Ok(Self {
            alphabet,
            n,
            bwt,
            c_table,
            occ_rate,
            occ,
            sa_rate,
            sampled_rows,
            samples,
        })
    }
}
