//! Deterministic derivation of independent RNG stream seeds.

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `base`, giving a well-mixed seed per distinct tuple.
pub(crate) fn derive(base: u64, parts: &[u64]) -> u64 {
    parts.iter().enumerate().fold(splitmix(base), |acc, (i, &p)| {
        splitmix(acc ^ splitmix(p ^ (i as u64 + 1).wrapping_mul(0xD6E8_FEB8_6659_FD93)))
    })
}
