use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AugmentTier {
    /// Frame left as captured.
    None,
    /// Background and chair replaced.
    BackgroundChair,
    /// Background, chair and both clothing regions replaced.
    Full,
}

impl AugmentTier {
    pub const ALL: [AugmentTier; 3] = [AugmentTier::None, AugmentTier::BackgroundChair, AugmentTier::Full];

    pub fn as_str(self) -> &'static str {
        match self {
            AugmentTier::None => "none",
            AugmentTier::BackgroundChair => "bg_chair",
            AugmentTier::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl core::fmt::Display for AugmentTier {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fractions of frames per tier, in `AugmentTier::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierProportions([f64; 3]);

impl TierProportions {
    pub fn new(none: f64, background_chair: f64, full: f64) -> Result<Self> {
        let p = [none, background_chair, full];
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) || ((p[0] + p[1] + p[2]) - 1.0).abs() > 1e-9 {
            return Err(Error::BadProportions);
        }
        Ok(Self(p))
    }

    pub fn get(&self, tier: AugmentTier) -> f64 {
        self.0[tier as usize]
    }

    /// Largest-remainder split of `n` frames; ties go to the earlier tier.
    pub fn counts(&self, n: usize) -> [usize; 3] {
        let exact = self.0.map(|p| p * n as f64);
        let mut counts = exact.map(|e| (e as usize).min(n));
        let assigned: usize = counts.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = exact[a] - counts[a] as f64;
            let rb = exact[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(n.saturating_sub(assigned)) {
            counts[i] += 1;
        }
        counts
    }
}

impl Default for TierProportions {
    fn default() -> Self {
        Self([0.25, 0.40, 0.35])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentPlan {
    pub seed: u64,
    pub proportions: TierProportions,
    /// `(frame id, tier)` in input order.
    pub assignments: Vec<(u64, AugmentTier)>,
}

impl AugmentPlan {
    pub fn tier_of(&self, frame: u64) -> Option<AugmentTier> {
        self.assignments.iter().find(|(f, _)| *f == frame).map(|(_, t)| *t)
    }

    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for (_, t) in &self.assignments {
            c[*t as usize] += 1;
        }
        c
    }
}

/// Assigns each frame a tier. Counts follow the proportions exactly up to
/// rounding; which frames get which tier depends only on `seed`.
pub fn plan_augmentation(frame_ids: &[u64], proportions: TierProportions, seed: u64) -> AugmentPlan {
    let n = frame_ids.len();
    let counts = proportions.counts(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tiers = alloc::vec![AugmentTier::None; n];
    let mut start = 0;
    for (tier, count) in AugmentTier::ALL.into_iter().zip(counts) {
        for &i in &order[start..start + count] {
            tiers[i] = tier;
        }
        start += count;
    }
    AugmentPlan {
        seed,
        proportions,
        assignments: frame_ids.iter().copied().zip(tiers).collect(),
    }
}
