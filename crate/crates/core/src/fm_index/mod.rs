//! FM-index over an encoded sequence.
//!
//! The text is terminated by a single `$` that sorts before every alphabet
//! character. Characters are stored as dense codes (`$` = 0, alphabet
//! characters 1..=a in alphabet order). Rank queries use occurrence
//! checkpoints every `occ_rate` BWT rows plus a scan from the nearest
//! checkpoint. Locating uses suffix-array values sampled at text positions
//! that are multiples of `sa_rate`, so resolving a row takes fewer than
//! `sa_rate` LF steps.

mod bits;
pub(crate) mod io;
pub(crate) mod sais;

pub use io::LoadError;

use thiserror::Error;

use crate::encoder::Alphabet;
use bits::RankBits;

pub const DEFAULT_OCC_RATE: usize = 128;
pub const DEFAULT_SA_RATE: usize = 32;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("illegal character {found:?} at text position {position}")]
    IllegalCharacter { position: usize, found: char },
    #[error("text of {0} characters exceeds the 32-bit index limit")]
    TooLarge(usize),
    #[error("sampling rates must be positive (occ_rate={occ_rate}, sa_rate={sa_rate})")]
    BadRate { occ_rate: usize, sa_rate: usize },
}

/// Half-open range of suffix-array rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaRange {
    pub lo: usize,
    pub hi: usize,
}

impl SaRange {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplingRates {
    pub occ_rate: usize,
    pub sa_rate: usize,
}

impl Default for SamplingRates {
    fn default() -> Self {
        Self {
            occ_rate: DEFAULT_OCC_RATE,
            sa_rate: DEFAULT_SA_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmIndex {
    alphabet: Alphabet,
    n: usize,
    bwt: Vec<u8>,
    c_table: Vec<u64>,
    occ_rate: usize,
    occ: Vec<u32>,
    sa_rate: usize,
    sampled_rows: RankBits,
    samples: Vec<u32>,
}

impl FmIndex {
    pub fn build(text: &[u8], alphabet: &Alphabet) -> Result<Self, IndexError> {
        Self::build_with_rates(text, alphabet, SamplingRates::default())
    }

    pub fn build_with_rates(
        text: &[u8],
        alphabet: &Alphabet,
        rates: SamplingRates,
    ) -> Result<Self, IndexError> {
        if rates.occ_rate == 0 || rates.sa_rate == 0 {
            return Err(IndexError::BadRate {
                occ_rate: rates.occ_rate,
                sa_rate: rates.sa_rate,
            });
        }
        if text.len() >= u32::MAX as usize - 1 {
            return Err(IndexError::TooLarge(text.len()));
        }
        let mut codes = Vec::with_capacity(text.len() + 1);
        for (position, &c) in text.iter().enumerate() {
            match alphabet.code_of(c) {
                Some(code) => codes.push(code as u32),
                None => {
                    return Err(IndexError::IllegalCharacter {
                        position,
                        found: c as char,
                    })
                }
            }
        }
        codes.push(0);
        let sigma = alphabet.size() + 1;
        let sa = sais::suffix_array(&codes, sigma);

        let bwt: Vec<u8> = sa
            .iter()
            .map(|&p| if p == 0 { 0 } else { codes[p as usize - 1] as u8 })
            .collect();
        let sampled_rows = RankBits::from_fn(sa.len(), |row| (sa[row] as usize).is_multiple_of(rates.sa_rate));
        let samples: Vec<u32> = sa
            .iter()
            .copied()
            .filter(|&p| (p as usize).is_multiple_of(rates.sa_rate))
            .collect();
        drop(sa);

        let (c_table, occ) = tally(&bwt, sigma, rates.occ_rate);
        Ok(Self {
            alphabet: alphabet.clone(),
            n: text.len(),
            bwt,
            c_table,
            occ_rate: rates.occ_rate,
            occ,
            sa_rate: rates.sa_rate,
            sampled_rows,
            samples,
        })
    }

    /// Length of the indexed text, excluding the sentinel.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rates(&self) -> SamplingRates {
        SamplingRates {
            occ_rate: self.occ_rate,
            sa_rate: self.sa_rate,
        }
    }

    fn sigma(&self) -> usize {
        self.alphabet.size() + 1
    }

    /// BWT rendered with `$` and alphabet characters.
    pub fn bwt_string(&self) -> String {
        self.bwt.iter().map(|&c| self.code_char(c) as char).collect()
    }

    fn code_char(&self, code: u8) -> u8 {
        if code == 0 {
            b'$'
        } else {
            self.alphabet.char_at(code as usize - 1)
        }
    }

    /// First row of each character's block in the sorted suffix list, for
    /// `$` followed by the alphabet in order.
    pub fn c_table(&self) -> &[u64] {
        &self.c_table[..self.sigma()]
    }

    /// Occurrences of code `code` in `bwt[..i]`.
    #[inline]
    pub(crate) fn rank(&self, code: u8, i: usize) -> usize {
        let sigma = self.sigma();
        let rate = self.occ_rate;
        let block = if rate.is_power_of_two() { i >> rate.trailing_zeros() } else { i / rate };
        let base = block * rate;
        let next = base + rate;
        if i - base <= rate / 2 || next > self.bwt.len() {
            self.occ[block * sigma + code as usize] as usize
                + count_code(&self.bwt[base..i], code)
        } else {
            self.occ[(block + 1) * sigma + code as usize] as usize
                - count_code(&self.bwt[i..next], code)
        }
    }

    /// Hints the cache lines `rank(_, i)` will read.
    #[inline]
    fn prefetch_rank(&self, i: usize) {
        let block = (i / self.occ_rate).min(self.occ.len() / self.sigma() - 1);
        prefetch(self.occ.as_ptr().wrapping_add(block * self.sigma()));
        prefetch(self.bwt.as_ptr().wrapping_add(i.min(self.bwt.len().saturating_sub(1))));
    }

    /// BWT symbol code at `row` (0 for the sentinel).
    #[inline]
    pub(crate) fn bwt_code(&self, row: usize) -> u8 {
        self.bwt[row]
    }

    /// Row of the suffix that starts one position earlier than row `row`'s.
    #[inline]
    pub(crate) fn lf(&self, row: usize) -> usize {
        let c = self.bwt[row];
        self.c_table[c as usize] as usize + self.rank(c, row)
    }

    /// Rows whose suffixes start with `pattern`. Characters outside the
    /// alphabet yield an empty range.
    pub fn backward_search(&self, pattern: &[u8]) -> SaRange {
        let mut lo = 0;
        let mut hi = self.bwt.len();
        for &c in pattern.iter().rev() {
            let Some(code) = self.alphabet.code_of(c) else {
                return SaRange { lo: 0, hi: 0 };
            };
            let start = self.c_table[code as usize] as usize;
            lo = start + self.rank(code, lo);
            hi = start + self.rank(code, hi);
            if lo >= hi {
                return SaRange { lo, hi: lo };
            }
        }
        SaRange { lo, hi }
    }

    /// [`backward_search`](Self::backward_search) over several patterns at
    /// once. Steps all of them in lockstep so their memory accesses overlap.
    pub fn backward_search_many(&self, patterns: &[&[u8]]) -> Vec<SaRange> {
        let mut ranges = vec![SaRange { lo: 0, hi: self.bwt.len() }; patterns.len()];
        let mut live: Vec<usize> = (0..patterns.len()).collect();
        let mut step = 0;
        while !live.is_empty() {
            for &i in &live {
                self.prefetch_rank(ranges[i].lo);
                self.prefetch_rank(ranges[i].hi);
            }
            live.retain(|&i| {
                let p = patterns[i];
                if step >= p.len() {
                    return false;
                }
                let r = &mut ranges[i];
                let Some(code) = self.alphabet.code_of(p[p.len() - 1 - step]) else {
                    *r = SaRange { lo: 0, hi: 0 };
                    return false;
                };
                let start = self.c_table[code as usize] as usize;
                r.lo = start + self.rank(code, r.lo);
                r.hi = start + self.rank(code, r.hi);
                if r.lo >= r.hi {
                    r.hi = r.lo;
                    return false;
                }
                true
            });
            step += 1;
        }
        ranges
    }

    pub fn count(&self, pattern: &[u8]) -> usize {
        self.backward_search(pattern).len()
    }

    /// Text position of the suffix at `row`.
    pub fn locate_row(&self, mut row: usize) -> usize {
        let mut steps = 0;
        while !self.sampled_rows.get(row) {
            row = self.lf(row);
            steps += 1;
        }
        self.samples[self.sampled_rows.rank1(row)] as usize + steps
    }

    /// Text positions of `rows`, in the same order. The LF walks run
    /// interleaved rather than one after another.
    pub fn locate_rows(&self, rows: &[usize]) -> Vec<usize> {
        let mut cur = rows.to_vec();
        let mut out = vec![0; rows.len()];
        let mut live: Vec<usize> = (0..rows.len()).collect();
        let mut steps = 0;
        while !live.is_empty() {
            for &i in &live {
                self.prefetch_rank(cur[i]);
                self.sampled_rows.prefetch(cur[i]);
            }
            live.retain(|&i| {
                let row = cur[i];
                if self.sampled_rows.get(row) {
                    out[i] = self.samples[self.sampled_rows.rank1(row)] as usize + steps;
                    false
                } else {
                    cur[i] = self.lf(row);
                    true
                }
            });
            steps += 1;
        }
        out
    }

    /// Start positions of every row in `range`, ascending.
    pub fn locate(&self, range: SaRange) -> Vec<usize> {
        let mut out: Vec<usize> = (range.lo..range.hi).map(|r| self.locate_row(r)).collect();
        out.sort_unstable();
        out
    }

    /// Recovers the indexed text by walking LF from the `$` row.
    pub fn reconstruct_text(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n];
        let mut row = 0;
        for slot in out.iter_mut().rev() {
            *slot = self.code_char(self.bwt[row]);
            row = self.lf(row);
        }
        out
    }
}

#[inline(always)]
fn prefetch<T>(ptr: *const T) {
    #[cfg(target_arch = "x86_64")]
    // SAFETY: prefetching is a hint and never faults, even on bad addresses.
    unsafe {
        std::arch::x86_64::_mm_prefetch::<{ std::arch::x86_64::_MM_HINT_T0 }>(ptr as *const i8);
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = ptr;
}

#[inline]
fn count_code(slice: &[u8], code: u8) -> usize {
    // Fixed-width chunks let the compiler vectorize the comparison.
    let mut chunks = slice.chunks_exact(16);
    let mut n = 0usize;
    for chunk in &mut chunks {
        let mut c = 0u8;
        for &b in chunk {
            c += (b == code) as u8;
        }
        n += c as usize;
    }
    n + chunks.remainder().iter().filter(|&&b| b == code).count()
}

/// C table (with a trailing total) and occurrence checkpoints for `bwt`.
fn tally(bwt: &[u8], sigma: usize, occ_rate: usize) -> (Vec<u64>, Vec<u32>) {
    let blocks = bwt.len() / occ_rate + 1;
    let mut occ = Vec::with_capacity(blocks * sigma);
    let mut counts = vec![0u32; sigma];
    for (i, &c) in bwt.iter().enumerate() {
        if i % occ_rate == 0 {
            occ.extend_from_slice(&counts);
        }
        counts[c as usize] += 1;
    }
    if bwt.len().is_multiple_of(occ_rate) {
        occ.extend_from_slice(&counts);
    }
    debug_assert_eq!(occ.len(), blocks * sigma);
    let mut c_table = Vec::with_capacity(sigma + 1);
    let mut acc = 0u64;
    for &k in &counts {
        c_table.push(acc);
        acc += k as u64;
    }
    c_table.push(acc);
    (c_table, occ)
}
