//! Frequency-region calculus on pairs of dyadic indices.
//!
//! A bilinear interaction between Littlewood-Paley pieces `P_j f` and
//! `P_k g` is classified by the pair `(j, k)`. Two decompositions of the
//! index plane are used: `XL | LL | RL | LH` for products of wave and
//! Schroedinger pieces, and `XL | LX | HH | RR` for Schroedinger pairs.
//! Both are exact partitions for every threshold `beta >= 5`.
//!
//! `LH` is stored as the set complement of the other three regions
//! (`k > j - 5` together with `max(j, k) > -beta`); the naive reading
//! `k > min(j - 5, -beta)` overlaps `XL` and `RL` and is only a necessary
//! condition for membership.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionKind {
    /// First index far above the second and above `beta`.
    XL,
    /// First index in the resonant window `|j| < beta`, still `j >= k + 5`.
    RL,
    /// Both indices at or below `-beta`.
    LL,
    /// Complement of the previous three: comparable or second-dominated.
    LH,
    /// Comparable indices with `max >= beta`.
    HH,
    /// Both indices below `beta`.
    RR,
    /// Mirror of `XL`: second index dominates.
    LX,
}

/// A region with its threshold parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyRegion {
    pub kind: RegionKind,
    pub beta: f64,
}

impl FrequencyRegion {
    pub fn new(kind: RegionKind, beta: f64) -> crate::Result<FrequencyRegion> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(crate::invalid("beta", format!("need beta > 0, got {beta}")));
        }
        Ok(FrequencyRegion { kind, beta })
    }

    pub fn contains(&self, j: i32, k: i32) -> bool {
        region_contains(self.kind, self.beta, j, k)
    }
}

/// Smallest admissible threshold for a given sound speed,
/// `5 + |log2 alpha|`.
pub fn beta_lower_bound(alpha: f64) -> f64 {
    5.0 + alpha.log2().abs()
}

/// Default threshold: `max(10, ceil(5 + |log2 alpha|))`.
pub fn default_beta(alpha: f64) -> f64 {
    10.0f64.max(beta_lower_bound(alpha).ceil())
}

pub fn region_contains(kind: RegionKind, beta: f64, j: i32, k: i32) -> bool {
    let jf = j as f64;
    let kf = k as f64;
    let maxjk = jf.max(kf);
    match kind {
        RegionKind::XL => jf >= (kf + 5.0).max(beta),
        RegionKind::RL => jf.abs() < beta && j >= k + 5,
        RegionKind::LL => maxjk <= -beta,
        RegionKind::LH => k > j - 5 && maxjk > -beta,
        RegionKind::HH => (j - k).abs() < 5 && maxjk >= beta,
        RegionKind::RR => maxjk < beta,
        RegionKind::LX => kf >= (jf + 5.0).max(beta),
    }
}

/// The two partitions of the index plane.
pub const WAVE_SCHROEDINGER_PARTITION: [RegionKind; 4] = [
    RegionKind::XL,
    RegionKind::LL,
    RegionKind::RL,
    RegionKind::LH,
];

pub const SCHROEDINGER_PAIR_PARTITION: [RegionKind; 4] = [
    RegionKind::XL,
    RegionKind::LX,
    RegionKind::HH,
    RegionKind::RR,
];

/// Exhaustively verify that both four-region decompositions tile the index
/// square `[-extent, extent]^2` exactly once.
pub fn verify_partitions(beta: f64, extent: i32) -> bool {
    for j in -extent..=extent {
        for k in -extent..=extent {
            let c1 = WAVE_SCHROEDINGER_PARTITION
                .iter()
                .filter(|&&r| region_contains(r, beta, j, k))
                .count();
            let c2 = SCHROEDINGER_PAIR_PARTITION
                .iter()
                .filter(|&&r| region_contains(r, beta, j, k))
                .count();
            if c1 != 1 || c2 != 1 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_membership_examples() {
        assert!(region_contains(RegionKind::XL, 10.0, 12, 3));
        assert!(region_contains(RegionKind::LH, 10.0, 0, 0));
        assert!(region_contains(RegionKind::RR, 10.0, 0, 0));
        assert!(!region_contains(RegionKind::XL, 10.0, 9, 3));
        // mirror relation between XL and LX
        for (j, k) in [(12, 3), (15, -2), (7, 1)] {
            assert_eq!(
                region_contains(RegionKind::XL, 10.0, j, k),
                region_contains(RegionKind::LX, 10.0, k, j)
            );
        }
    }

    #[test]
    fn partitions_are_exact() {
        for beta in [8.0, 10.0, 15.0] {
            assert!(verify_partitions(beta, 20), "beta = {beta}");
        }
    }

    #[test]
    fn beta_defaults() {
        assert_eq!(default_beta(1.0), 10.0);
        assert_eq!(default_beta(0.5), 10.0);
        assert!((beta_lower_bound(2.0) - 6.0).abs() < 1e-12);
        assert_eq!(default_beta(1.0 / 100.0), 12.0);
    }
}
