/// Plain bit vector with a rank directory of one `u32` per 512 bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RankBits {
    words: Vec<u64>,
    len: usize,
    super_ranks: Vec<u32>,
}

const WORDS_PER_SUPER: usize = 8;

impl RankBits {
    pub fn from_words(words: Vec<u64>, len: usize) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        let mut super_ranks = Vec::with_capacity(words.len() / WORDS_PER_SUPER + 1);
        let mut acc = 0u32;
        for chunk in words.chunks(WORDS_PER_SUPER) {
            super_ranks.push(acc);
            acc += chunk.iter().map(|w| w.count_ones()).sum::<u32>();
        }
        super_ranks.push(acc);
        Self {
            words,
            len,
            super_ranks,
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; len.div_ceil(64)];
        for i in 0..len {
            if f(i) {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self::from_words(words, len)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn prefetch(&self, i: usize) {
        super::prefetch(self.words.as_ptr().wrapping_add(i / 64));
    }

    /// Number of set bits in `0..i`.
    #[inline]
    pub fn rank1(&self, i: usize) -> usize {
        let word = i / 64;
        let sup = word / WORDS_PER_SUPER;
        let mut r = self.super_ranks[sup] as usize;
        for w in &self.words[sup * WORDS_PER_SUPER..word] {
            r += w.count_ones() as usize;
        }
        let bit = i % 64;
        if bit > 0 {
            r += (self.words[word] & ((1u64 << bit) - 1)).count_ones() as usize;
        }
        r
    }

    pub fn count_ones(&self) -> usize {
        *self.super_ranks.last().unwrap() as usize
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn rank_matches_prefix_count(bits in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let rb = RankBits::from_fn(bits.len(), |i| bits[i]);
            let mut acc = 0;
            for (i, &b) in bits.iter().enumerate() {
                prop_assert_eq!(rb.rank1(i), acc);
                prop_assert_eq!(rb.get(i), b);
                acc += b as usize;
            }
            prop_assert_eq!(rb.rank1(bits.len()), acc);
            prop_assert_eq!(rb.count_ones(), acc);
        }
    }
}
