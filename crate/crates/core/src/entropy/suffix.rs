//! Suffix array, LCP array and longest-previous-factor array over integer
//! alphabets.

/// Suffix array by prefix doubling with two-pass counting sort, O(n log n).
///
/// Symbols must be dense-ish: memory is proportional to `max(symbol) + n`.
pub fn suffix_array(text: &[u32]) -> Vec<usize> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(n < u32::MAX as usize, "text too long for 32-bit suffix indices");
    let alphabet = text.iter().copied().max().unwrap() as usize + 1;

    // rank 0 is reserved for "past the end"
    let mut rank: Vec<u32> = text.iter().map(|&c| c + 1).collect();
    let mut sa: Vec<u32> = (0..n as u32).collect();
    let mut tmp = vec![0u32; n];
    let mut count = vec![0u32; alphabet.max(n) + 2];

    counting_sort(&mut sa, &mut tmp, &mut count[..alphabet + 2], &rank);
    let mut classes = alphabet;
    let mut k = 1;
    loop {
        // order by second key: suffixes without a partner come first
        let mut w = 0;
        for p in n.saturating_sub(k)..n {
            tmp[w] = p as u32;
            w += 1;
        }
        for &p in &sa {
            if p as usize >= k {
                tmp[w] = p - k as u32;
                w += 1;
            }
        }
        std::mem::swap(&mut sa, &mut tmp);
        counting_sort(&mut sa, &mut tmp, &mut count[..classes + 2], &rank);

        let key = |i: u32| {
            let i = i as usize;
            (rank[i], if i + k < n { rank[i + k] } else { 0 })
        };
        tmp[sa[0] as usize] = 1;
        let mut prev = key(sa[0]);
        for w in 1..n {
            let cur = key(sa[w]);
            tmp[sa[w] as usize] = tmp[sa[w - 1] as usize] + u32::from(cur != prev);
            prev = cur;
        }
        std::mem::swap(&mut rank, &mut tmp);
        classes = rank[sa[n - 1] as usize] as usize;
        if classes == n {
            break;
        }
        k *= 2;
    }
    sa.into_iter().map(|p| p as usize).collect()
}

fn counting_sort(sa: &mut Vec<u32>, tmp: &mut Vec<u32>, count: &mut [u32], rank: &[u32]) {
    count.fill(0);
    for &p in sa.iter() {
        count[rank[p as usize] as usize] += 1;
    }
    let mut sum = 0;
    for c in count.iter_mut() {
        let v = *c;
        *c = sum;
        sum += v;
    }
    for &p in sa.iter() {
        let b = &mut count[rank[p as usize] as usize];
        tmp[*b as usize] = p;
        *b += 1;
    }
    std::mem::swap(sa, tmp);
}

/// Kasai's algorithm: `lcp[r]` is the longest common prefix of the suffixes at
/// ranks `r - 1` and `r`; `lcp[0] = 0`.
pub fn lcp_array(text: &[u32], sa: &[usize]) -> Vec<usize> {
    let n = text.len();
    let mut rank = vec![0usize; n];
    for (r, &p) in sa.iter().enumerate() {
        rank[p] = r;
    }
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for i in 0..n {
        if rank[i] == 0 {
            h = 0;
            continue;
        }
        let j = sa[rank[i] - 1];
        while i + h < n && j + h < n && text[i + h] == text[j + h] {
            h += 1;
        }
        lcp[rank[i]] = h;
        h = h.saturating_sub(1);
    }
    lcp
}

/// Longest previous factor: `lpf[i]` is the length of the longest prefix of the
/// suffix at `i` that also starts at some `j < i`. Matches may overlap `i`.
///
/// Stack-based sweep over the suffix array (Crochemore–Ilie), linear after the
/// suffix array is built.
pub fn longest_previous_factor(text: &[u32]) -> Vec<usize> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let sa = suffix_array(text);
    let mut lcp = lcp_array(text, &sa);
    lcp.push(0);
    let mut lpf = vec![0usize; n];
    let mut stack: Vec<usize> = vec![0];
    for r in 1..=n {
        while let Some(&top) = stack.last() {
            // position n acts as a sentinel smaller than every text position
            if r < n && sa[r] > sa[top] {
                break;
            }
            lpf[sa[top]] = lcp[top].max(lcp[r]);
            lcp[r] = lcp[top].min(lcp[r]);
            stack.pop();
        }
        if r < n {
            stack.push(r);
        }
    }
    lpf
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_sa(text: &[u32]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..text.len()).collect();
        sa.sort_by(|&a, &b| text[a..].cmp(&text[b..]));
        sa
    }

    fn naive_lpf(text: &[u32]) -> Vec<usize> {
        (0..text.len())
            .map(|i| (0..i).map(|j| text[i..].iter().zip(&text[j..]).take_while(|(a, b)| a == b).count()).max().unwrap_or(0))
            .collect()
    }

    #[test]
    fn small_cases() {
        assert!(suffix_array(&[]).is_empty());
        assert_eq!(suffix_array(&[5]), vec![0]);
        // banana with a=0, b=1, n=2
        let banana = [1, 0, 2, 0, 2, 0];
        assert_eq!(suffix_array(&banana), vec![5, 3, 1, 0, 4, 2]);
        assert_eq!(lcp_array(&banana, &suffix_array(&banana)), vec![0, 1, 3, 0, 0, 2]);
        assert_eq!(longest_previous_factor(&[0, 1, 0, 1, 0]), vec![0, 0, 3, 2, 1]);
        assert_eq!(longest_previous_factor(&[7, 7, 7, 7]), vec![0, 3, 2, 1]);
    }

    proptest! {
        #[test]
        fn matches_sorting(text in proptest::collection::vec(0u32..4, 0..120)) {
            let sa = suffix_array(&text);
            prop_assert_eq!(&sa, &naive_sa(&text));
            prop_assert_eq!(longest_previous_factor(&text), naive_lpf(&text));
        }
    }
}
