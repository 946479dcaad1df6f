use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chart::CONV_OUTPUT_SIDE;
use super::{make_atlas, sample_chart, AtlasSpec, ChartKind, PriorError};

/// Pixels excluded at each border of the conv output.
pub const STATIONARITY_MARGIN: usize = 4;

/// Empirical covariances of conv-chart outputs at initialization, between
/// `anchor` and `anchor + offset`, pooled over output coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub anchors: Vec<(usize, usize)>,
    pub offsets: Vec<(usize, usize)>,
    /// `covariance[o][a]` for offset `o` at anchor `a`.
    pub covariance: Vec<Vec<f64>>,
    pub inits: usize,
}

impl StationarityReport {
    /// Largest `|c_a - c_b| / max(|c_a|, |c_b|)` over anchor pairs, per offset.
    pub fn max_pairwise_relative(&self) -> Vec<f64> {
        self.covariance
            .iter()
            .map(|cs| {
                let (lo, hi) = cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                    (lo.min(c), hi.max(c))
                });
                (hi - lo) / lo.abs().max(hi.abs())
            })
            .collect()
    }
}

/// A 4×4 lattice of anchors spanning the positions at least `margin` pixels
/// from the border, and offsets up to 2 pixels.
pub fn stationarity_layout(margin: usize) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let last = CONV_OUTPUT_SIDE.saturating_sub(margin + 3).max(margin);
    let ticks: Vec<usize> = (0..4).map(|i| margin + (last - margin) * i / 3).collect();
    let anchors = ticks.iter().flat_map(|&r| ticks.iter().map(move |&c| (r, c))).collect();
    let offsets = vec![(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0)];
    (anchors, offsets)
}

/// Draws `inits` independently initialized conv charts (weights and input
/// noise) and estimates output covariances at the given anchor/offset pairs.
pub fn conv_stationarity(
    inits: usize,
    anchors: &[(usize, usize)],
    offsets: &[(usize, usize)],
    seed: u64,
) -> Result<StationarityReport, PriorError> {
    if inits < 2 || anchors.is_empty() || offsets.is_empty() {
        return Err(PriorError::InvalidConfig(format!(
            "{inits} inits, {} anchors, {} offsets",
            anchors.len(),
            offsets.len()
        )));
    }
    let hi = CONV_OUTPUT_SIDE - STATIONARITY_MARGIN;
    for &(r, c) in anchors {
        for &(dr, dc) in offsets {
            let inside = |v: usize| (STATIONARITY_MARGIN..hi).contains(&v);
            if !(inside(r) && inside(c) && inside(r + dr) && inside(c + dc)) {
                return Err(PriorError::InvalidConfig(format!(
                    "anchor ({r}, {c}) with offset ({dr}, {dc}) leaves the interior"
                )));
            }
        }
    }
    let spec = AtlasSpec::new(1, 2, 3, ChartKind::Conv);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let cells = anchors.len() * offsets.len();
    // Per (offset, anchor): Σx, Σy, Σxy over inits and coordinates.
    let mut sums = vec![[0.0f64; 3]; cells];
    for _ in 0..inits {
        let atlas = make_atlas(&spec, seeds.next_u64())?;
        let out = sample_chart(&atlas.charts[0])?;
        for (o, &(dr, dc)) in offsets.iter().enumerate() {
            for (a, &(r, c)) in anchors.iter().enumerate() {
                let p = out.point(r * CONV_OUTPUT_SIDE + c);
                let q = out.point((r + dr) * CONV_OUTPUT_SIDE + c + dc);
                let s = &mut sums[o * anchors.len() + a];
                for k in 0..3 {
                    s[0] += p[k];
                    s[1] += q[k];
                    s[2] += p[k] * q[k];
                }
            }
        }
    }
    let n = (inits * 3) as f64;
    let covariance = (0..offsets.len())
        .map(|o| {
            (0..anchors.len())
                .map(|a| {
                    let s = sums[o * anchors.len() + a];
                    (s[2] - s[0] * s[1] / n) / (n - 1.0)
                })
                .collect()
        })
        .collect();
    Ok(StationarityReport {
        anchors: anchors.to_vec(),
        offsets: offsets.to_vec(),
        covariance,
        inits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_interior() {
        let (a, o) = stationarity_layout(STATIONARITY_MARGIN);
        assert_eq!(a.len(), 16);
        assert_eq!((a[0], a[15]), ((4, 4), (25, 25)));
        assert_eq!(stationarity_layout(8).0[15], (21, 21));
        assert!(conv_stationarity(1, &a, &o, 0).is_err());
        assert!(conv_stationarity(3, &[(2, 2)], &o, 0).is_err());
        assert!(conv_stationarity(3, &[(27, 10)], &[(1, 0)], 0).is_err());
    }

    #[test]
    fn variances_are_positive() {
        let r = conv_stationarity(3, &[(8, 8), (20, 20)], &[(0, 0)], 1).unwrap();
        assert!(r.covariance[0].iter().all(|&c| c > 0.0));
        assert_eq!(r.max_pairwise_relative().len(), 1);
    }
}
