//! Linear-time suffix array construction by induced sorting (SA-IS).

const EMPTY: u32 = u32::MAX;

/// Suffix array of `s`, which must end with a unique smallest symbol `0` and
/// use symbols in `0..sigma`. `s.len()` must be below `u32::MAX`.
pub fn suffix_array(s: &[u32], sigma: usize) -> Vec<u32> {
    debug_assert!(!s.is_empty());
    debug_assert_eq!(*s.last().unwrap(), 0);
    debug_assert!(s[..s.len() - 1].iter().all(|&c| c > 0 && (c as usize) < sigma));
    let mut sa = vec![EMPTY; s.len()];
    sais(s, sigma, &mut sa);
    sa
}

#[inline]
fn is_lms(t: &[bool], i: usize) -> bool {
    i > 0 && t[i] && !t[i - 1]
}

fn bucket_bounds(s: &[u32], sigma: usize) -> Vec<u32> {
    // bounds[c]..bounds[c + 1] is the bucket of symbol c
    let mut bounds = vec![0u32; sigma + 1];
    for &c in s {
        bounds[c as usize + 1] += 1;
    }
    for c in 0..sigma {
        bounds[c + 1] += bounds[c];
    }
    bounds
}

fn induce(s: &[u32], t: &[bool], bounds: &[u32], sa: &mut [u32]) {
    let n = s.len();
    let sigma = bounds.len() - 1;
    let mut heads = bounds[..sigma].to_vec();
    for i in 0..n {
        let j = sa[i];
        if j != EMPTY && j > 0 && !t[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            sa[heads[c] as usize] = j - 1;
            heads[c] += 1;
        }
    }
    let mut tails = bounds[1..].to_vec();
    for i in (0..n).rev() {
        let j = sa[i];
        if j != EMPTY && j > 0 && t[j as usize - 1] {
            let c = s[j as usize - 1] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = j - 1;
        }
    }
}

fn lms_substrings_equal(s: &[u32], t: &[bool], a: usize, b: usize) -> bool {
    let n = s.len();
    let mut d = 0;
    loop {
        if a + d >= n || b + d >= n {
            return false;
        }
        if s[a + d] != s[b + d] || t[a + d] != t[b + d] {
            return false;
        }
        if d > 0 {
            let la = is_lms(t, a + d);
            let lb = is_lms(t, b + d);
            if la || lb {
                return la && lb;
            }
        }
        d += 1;
    }
}

fn sais(s: &[u32], sigma: usize, sa: &mut [u32]) {
    let n = s.len();
    if n == 1 {
        sa[0] = 0;
        return;
    }

    // true = S-type
    let mut t = vec![false; n];
    t[n - 1] = true;
    for i in (0..n - 1).rev() {
        t[i] = s[i] < s[i + 1] || (s[i] == s[i + 1] && t[i + 1]);
    }
    let bounds = bucket_bounds(s, sigma);

    // Stage 1: sort LMS substrings.
    sa.fill(EMPTY);
    let mut tails = bounds[1..].to_vec();
    for i in (1..n).rev() {
        if is_lms(&t, i) {
            let c = s[i] as usize;
            tails[c] -= 1;
            sa[tails[c] as usize] = i as u32;
        }
    }
    induce(s, &t, &bounds, sa);

    let mut m = 0;
    for i in 0..n {
        let p = sa[i];
        if is_lms(&t, p as usize) {
            sa[m] = p;
            m += 1;
        }
    }

    // Name LMS substrings; names land at sa[m + pos / 2].
    sa[m..].fill(EMPTY);
    let mut name = 0u32;
    let mut prev: Option<usize> = None;
    for i in 0..m {
        let pos = sa[i] as usize;
        let same = prev.is_some_and(|p| lms_substrings_equal(s, &t, p, pos));
        if !same {
            name += 1;
            prev = Some(pos);
        }
        sa[m + pos / 2] = name - 1;
    }
    let mut j = n;
    for i in (m..n).rev() {
        if sa[i] != EMPTY {
            j -= 1;
            sa[j] = sa[i];
        }
    }

    // Stage 2: sort the reduced problem.
    let reduced: Vec<u32> = sa[n - m..].to_vec();
    let mut reduced_sa = vec![EMPTY; m];
    if (name as usize) < m {
        sais(&reduced, name as usize, &mut reduced_sa);
    } else {
        for (i, &c) in reduced.iter().enumerate() {
            reduced_sa[c as usize] = i as u32;
        }
    }

    // Stage 3: induce the full order from the sorted LMS suffixes.
    let lms_positions: Vec<u32> = (1..n).filter(|&i| is_lms(&t, i)).map(|i| i as u32).collect();
    sa.fill(EMPTY);
    let mut tails = bounds[1..].to_vec();
    for i in (0..m).rev() {
        let p = lms_positions[reduced_sa[i] as usize];
        let c = s[p as usize] as usize;
        tails[c] -= 1;
        sa[tails[c] as usize] = p;
    }
    induce(s, &t, &bounds, sa);
}
