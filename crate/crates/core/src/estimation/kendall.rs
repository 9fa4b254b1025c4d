use super::PseudoSample;

/// Sample Kendall's tau (tau-b under ties) by Knight's O(n log n) merge count.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "kendall_tau needs equal-length inputs");
    let n = a.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i].total_cmp(&a[j]).then(b[i].total_cmp(&b[j])));
    let pairs = |m: u64| m * (m.saturating_sub(1)) / 2;
    // pairs tied in a, and tied in both
    let (mut tie_a, mut tie_ab) = (0u64, 0u64);
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && a[idx[j]] == a[idx[i]] {
            j += 1;
        }
        tie_a += pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut l = k + 1;
            while l < j && b[idx[l]] == b[idx[k]] {
                l += 1;
            }
            tie_ab += pairs((l - k) as u64);
            k = l;
        }
        i = j;
    }
    let mut seq: Vec<f64> = idx.iter().map(|&i| b[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut seq, &mut buf);
    let mut tie_b = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && seq[j] == seq[i] {
            j += 1;
        }
        tie_b += pairs((j - i) as u64);
        i = j;
    }
    let n0 = pairs(n as u64);
    let s = n0 as f64 - tie_a as f64 - tie_b as f64 + tie_ab as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - tie_a) as f64 * (n0 - tie_b) as f64).sqrt();
    if denom == 0.0 {
        f64::NAN
    } else {
        s / denom
    }
}

/// Sorts `x` ascending and returns the number of strictly inverted pairs.
fn merge_count(x: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = x.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut s = merge_count(&mut x[..mid], &mut buf[..mid]) + merge_count(&mut x[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if x[j] < x[i] {
            buf[k] = x[j];
            s += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = x[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&x[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&x[j..n]);
    x.copy_from_slice(&buf[..n]);
    s
}

/// Mean of the sample Kendall's tau over all d(d-1)/2 column pairs.
pub fn pairwise_tau_hat(u: &PseudoSample) -> f64 {
    let d = u.d();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| u.matrix().column(j)).collect();
    let mut s = 0.0;
    let mut k = 0usize;
    for i in 0..d {
        for j in i + 1..d {
            s += kendall_tau(&cols[i], &cols[j]);
            k += 1;
        }
    }
    s / k as f64
}
