//! Clipped (censored) normal noise matched to a target mean and STD.
//!
//! Readings are `max(0, Y)` with `Y ~ N(loc, scale²)`. With `c = loc/scale`
//! the first two moments are
//!
//! ```text
//! E[X]  = scale   · (c Φ(c) + φ(c))
//! E[X²] = scale²  · ((c² + 1) Φ(c) + c φ(c))
//! ```
//!
//! so the coefficient of variation depends on `c` alone and decreases
//! monotonically in it. Matching the target CV by bisection fixes `c`, and
//! the target mean then fixes `scale`. The upper clip at 3300 mV is many
//! standard deviations away for every shipped profile and is ignored here.

use statrs::function::erf::erfc;

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn first_moment(c: f64) -> f64 {
    c * cdf(c) + pdf(c)
}

fn second_moment(c: f64) -> f64 {
    (c * c + 1.0) * cdf(c) + c * pdf(c)
}

fn cv(c: f64) -> f64 {
    let m1 = first_moment(c);
    (second_moment(c) / (m1 * m1) - 1.0).max(0.0).sqrt()
}

const C_LO: f64 = -6.0;
const C_HI: f64 = 40.0;

/// Location/scale of the underlying normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippedNormal {
    pub loc: f64,
    pub scale: f64,
}

impl ClippedNormal {
    /// Parameters whose clipped-at-zero distribution has the given mean and
    /// standard deviation. `None` if the target is infeasible (negative
    /// mean, or a CV beyond what the search interval covers).
    pub fn matching(mean: f64, std: f64) -> Option<Self> {
        if !(mean >= 0.0 && std >= 0.0) || !mean.is_finite() || !std.is_finite() {
            return None;
        }
        if std == 0.0 || mean == 0.0 {
            // degenerate: constant reading (mean 0 forces std 0)
            return (mean > 0.0 || std == 0.0).then_some(ClippedNormal {
                loc: mean,
                scale: 0.0,
            });
        }
        let target = std / mean;
        if target >= cv(C_LO) {
            return None;
        }
        if target <= cv(C_HI) {
            return Some(ClippedNormal { loc: mean, scale: std });
        }
        let (mut lo, mut hi) = (C_LO, C_HI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cv(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let c = 0.5 * (lo + hi);
        let scale = mean / first_moment(c);
        Some(ClippedNormal { loc: c * scale, scale })
    }

    pub fn clipped_mean(&self) -> f64 {
        if self.scale == 0.0 {
            return self.loc.max(0.0);
        }
        self.scale * first_moment(self.loc / self.scale)
    }

    pub fn clipped_std(&self) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        let c = self.loc / self.scale;
        let m1 = first_moment(c);
        self.scale * (second_moment(c) - m1 * m1).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_normal_when_far_from_zero() {
        let p = ClippedNormal::matching(800.0, 20.0).unwrap();
        assert!((p.loc - 800.0).abs() < 1e-6);
        assert!((p.scale - 20.0).abs() < 1e-6);
    }

    #[test]
    fn matches_targets_near_zero() {
        for &(m, s) in &[(78.0, 94.8), (78.0, 49.0), (3.0, 2.0), (241.0, 97.0), (78.0, 142.0)] {
            let p = ClippedNormal::matching(m, s).unwrap();
            assert!((p.clipped_mean() - m).abs() < 1e-6 * m, "{m} {s} {p:?}");
            assert!((p.clipped_std() - s).abs() < 1e-6 * s, "{m} {s} {p:?}");
        }
    }

    #[test]
    fn moments_against_quadrature() {
        // midpoint rule over the normal part plus the point mass at 0
        let (loc, scale) = (-20.0, 60.0);
        let n = 200_000;
        let (a, b) = (0.0, loc + 12.0 * scale);
        let h = (b - a) / n as f64;
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            let w = pdf((x - loc) / scale) / scale * h;
            m1 += x * w;
            m2 += x * x * w;
        }
        let p = ClippedNormal { loc, scale };
        assert!((p.clipped_mean() - m1).abs() < 1e-6);
        assert!((p.clipped_std() - (m2 - m1 * m1).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn degenerate_and_infeasible() {
        assert_eq!(ClippedNormal::matching(5.0, 0.0).unwrap().scale, 0.0);
        assert_eq!(ClippedNormal::matching(0.0, 0.0).unwrap().loc, 0.0);
        assert!(ClippedNormal::matching(0.0, 1.0).is_none());
        assert!(ClippedNormal::matching(-1.0, 1.0).is_none());
    }
}
