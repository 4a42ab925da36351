//! The fixed family of pairwise disjoint infinite subsets of `ω` that every
//! θ-run steers clear of.
//!
//! Column `n` is `x_n = { ⟨n, k⟩ : k ∈ ω }` under Cantor pairing. Disjoint
//! columns are in particular almost disjoint, and membership is decided by
//! inverting the pairing in constant time.

/// Cantor pairing `⟨n, k⟩ = (n + k)(n + k + 1)/2 + k`.
pub fn pair(n: u64, k: u64) -> u64 {
    let s = n + k;
    s * (s + 1) / 2 + k
}

/// Inverse of [`pair`].
pub fn unpair(m: u64) -> (u64, u64) {
    let w = ((8 * m as u128 + 1).isqrt() as u64 - 1) / 2;
    let k = m - w * (w + 1) / 2;
    (w - k, k)
}

/// Whether `m ∈ x_n`.
pub fn ad_member(n: u64, m: u64) -> bool {
    unpair(m).0 == n
}

/// Index of the unique column containing `m`.
pub fn column_of(m: u64) -> u64 {
    unpair(m).0
}

/// First `count` elements of `x_n`, increasing.
pub fn ad_enumerate(n: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|k| pair(n, k)).collect()
}

/// Elements of `x_n` that are `<= bound`, increasing.
pub fn ad_elements_upto(n: u64, bound: u64) -> impl Iterator<Item = u64> {
    (0u64..).map(move |k| pair(n, k)).take_while(move |&m| m <= bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_values() {
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 0), 1);
        assert_eq!(pair(0, 1), 2);
        assert_eq!(pair(2, 0), 3);
    }

    #[test]
    fn membership() {
        assert!(ad_member(0, 0));
        assert!(!ad_member(0, 1));
        assert!(ad_member(1, 1));
        assert!(ad_member(2, 3));
    }

    #[test]
    fn enumeration() {
        assert_eq!(ad_enumerate(0, 4), vec![0, 2, 5, 9]);
        assert_eq!(ad_enumerate(1, 3), vec![1, 4, 8]);
        assert!(ad_enumerate(7, 0).is_empty());
        assert_eq!(ad_elements_upto(2, 12).collect::<Vec<_>>(), vec![3, 7, 12]);
    }

    #[test]
    fn bijective_below_ten_thousand() {
        // brute force: count preimages among all (n, k) that could reach m
        let limit = 10_000u64;
        let mut hits = vec![0u32; limit as usize];
        for n in 0..200 {
            for k in 0..200 {
                let m = pair(n, k);
                if m < limit {
                    hits[m as usize] += 1;
                }
            }
        }
        assert!(hits.iter().all(|&h| h == 1));
        for m in 0..limit {
            let (n, k) = unpair(m);
            assert_eq!(pair(n, k), m);
        }
    }

    #[test]
    fn columns_are_disjoint() {
        for m in 0..10_000u64 {
            let owners = (0..150).filter(|&n| ad_member(n, m)).count();
            assert_eq!(owners, 1, "m={m}");
        }
    }

    #[test]
    fn columns_are_infinite() {
        for n in 0..100 {
            let xs = ad_enumerate(n, 100);
            assert_eq!(xs.len(), 100);
            assert!(xs.windows(2).all(|w| w[0] < w[1]));
            assert!(xs.iter().all(|&m| ad_member(n, m)));
        }
    }
}
