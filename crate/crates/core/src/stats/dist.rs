//! Student t and Fisher F distribution functions.

use super::special::beta_inc;
use super::StatsError;

fn check_df(df: f64) -> Result<(), StatsError> {
    if df.is_finite() && df >= 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidDf(df))
    }
}

/// P(T <= t) for Student's t with `df` degrees of freedom.
pub fn t_cdf(t: f64, df: f64) -> Result<f64, StatsError> {
    check_df(df)?;
    if t.is_nan() {
        return Err(StatsError::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { 1.0 } else { 0.0 });
    }
    let tail = 0.5 * beta_inc(df / 2.0, 0.5, df / (df + t * t))?;
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Two-tailed p-value P(|T| >= |t|), computed without cancellation.
pub fn t_two_tailed_p(t: f64, df: f64) -> Result<f64, StatsError> {
    check_df(df)?;
    if t.is_nan() {
        return Err(StatsError::Domain("t is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    beta_inc(df / 2.0, 0.5, df / (df + t * t))
}

/// P(F <= f) for the F distribution with (`df1`, `df2`) degrees of freedom.
pub fn f_cdf(f: f64, df1: f64, df2: f64) -> Result<f64, StatsError> {
    check_df(df1)?;
    check_df(df2)?;
    if f.is_nan() {
        return Err(StatsError::Domain("F is NaN".into()));
    }
    if f <= 0.0 {
        return Ok(0.0);
    }
    if f.is_infinite() {
        return Ok(1.0);
    }
    beta_inc(df1 / 2.0, df2 / 2.0, df1 * f / (df1 * f + df2))
}

/// Upper tail P(F >= f).
pub fn f_sf(f: f64, df1: f64, df2: f64) -> Result<f64, StatsError> {
    check_df(df1)?;
    check_df(df2)?;
    if f.is_nan() {
        return Err(StatsError::Domain("F is NaN".into()));
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    beta_inc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

    #[test]
    fn reference_points() {
        for df in [1.0, 2.0, 7.0, 18.0, 2880.0] {
            assert_eq!(t_cdf(0.0, df).unwrap(), 0.5);
        }
        assert!((f_cdf(1.0, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(t_cdf(1e12, 5.0).unwrap() > 1.0 - 1e-15);
        assert_eq!(t_cdf(f64::INFINITY, 5.0).unwrap(), 1.0);
        // t(1) is Cauchy: F(t) = 1/2 + atan(t)/pi
        for t in [-3.0, -0.4, 0.7, 12.0] {
            let want = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((t_cdf(t, 1.0).unwrap() - want).abs() < 1e-14);
        }
        // F(1,1): 2/pi atan(sqrt f)
        for f in [0.2, 3.0, 40.0] {
            let want = 2.0 / std::f64::consts::PI * f64::atan(f64::sqrt(f));
            assert!((f_cdf(f, 1.0, 1.0).unwrap() - want).abs() < 1e-14);
        }
        assert!(matches!(t_cdf(0.0, 0.5), Err(StatsError::InvalidDf(_))));
        assert!(f_cdf(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn matches_statrs_within_1e8() {
        for &df in &[1.0, 3.0, 9.0, 18.0, 120.0, 2880.0] {
            let d = StudentsT::new(0.0, 1.0, df).unwrap();
            for &t in &[-25.0, -4.2, -1.0, -0.1, 0.3, 2.1, 3.674, 9.0, 22.34] {
                let got = t_cdf(t, df).unwrap();
                assert!((got - d.cdf(t)).abs() <= 1e-8, "t={t} df={df}");
            }
        }
        for &(d1, d2) in &[(1.0, 1.0), (1.0, 4.0), (1.0, 2880.0), (3.0, 17.0), (12.0, 40.0)] {
            let d = FisherSnedecor::new(d1, d2).unwrap();
            for &f in &[0.01, 0.5, 1.0, 2.7, 28.65, 188.53] {
                let got = f_cdf(f, d1, d2).unwrap();
                assert!((got - d.cdf(f)).abs() <= 1e-8, "f={f} df=({d1},{d2})");
                assert!((f_sf(f, d1, d2).unwrap() - (1.0 - d.cdf(f))).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn two_tailed_consistent_with_cdf() {
        for &t in &[0.0, 0.5, 2.0, 5.0] {
            let p = t_two_tailed_p(t, 18.0).unwrap();
            let via_cdf = 2.0 * (1.0 - t_cdf(t, 18.0).unwrap());
            assert!((p - via_cdf).abs() < 1e-12);
        }
        assert_eq!(t_two_tailed_p(0.0, 4.0).unwrap(), 1.0);
    }
}
