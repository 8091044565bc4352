use super::dist::t_two_tailed_p;
use super::{mean, StatsError};

#[derive(Debug, Clone, PartialEq)]
pub struct TwoGroupResult {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn sum_sq_dev(x: &[f64], m: f64) -> f64 {
    x.iter().map(|v| (v - m) * (v - m)).sum()
}

fn check_finite(x: &[f64]) -> Result<(), StatsError> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Pooled-variance two-sample t test.
pub fn two_group_t(a: &[f64], b: &[f64]) -> Result<TwoGroupResult, StatsError> {
    for g in [a, b] {
        if g.len() < 2 {
            return Err(StatsError::TooFewObservations { need: 2, got: g.len() });
        }
        check_finite(g)?;
    }
    let (n_a, n_b) = (a.len(), b.len());
    let (mean_a, mean_b) = (mean(a), mean(b));
    let df = (n_a + n_b - 2) as f64;
    let pooled_var = (sum_sq_dev(a, mean_a) + sum_sq_dev(b, mean_b)) / df;
    let diff = mean_a - mean_b;
    let (t, p) = if pooled_var == 0.0 {
        if diff != 0.0 {
            return Err(StatsError::DegenerateVariance);
        }
        (0.0, 1.0)
    } else {
        let t = diff / (pooled_var * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
        (t, t_two_tailed_p(t, df)?)
    };
    Ok(TwoGroupResult {
        t,
        df,
        p,
        mean_a,
        mean_b,
        n_a,
        n_b,
    })
}

/// Paired t test on matched observations (df = n - 1).
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TwoGroupResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewObservations { need: 2, got: a.len() });
    }
    check_finite(a)?;
    check_finite(b)?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len();
    let md = mean(&d);
    let df = (n - 1) as f64;
    let var = sum_sq_dev(&d, md) / df;
    let (t, p) = if var == 0.0 {
        if md != 0.0 {
            return Err(StatsError::DegenerateVariance);
        }
        (0.0, 1.0)
    } else {
        let t = md / (var / n as f64).sqrt();
        (t, t_two_tailed_p(t, df)?)
    };
    Ok(TwoGroupResult {
        t,
        df,
        p,
        mean_a: mean(a),
        mean_b: mean(b),
        n_a: n,
        n_b: n,
    })
}
