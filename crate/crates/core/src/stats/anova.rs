//! Balanced two-factor (2×2) ANOVA with interaction.

use super::dist::f_sf;
use super::{mean, StatsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Effect {
    pub ss: f64,
    pub df: f64,
    pub ms: f64,
    pub f: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anova2x2Result {
    pub n_per_cell: usize,
    /// `cell_means[a][b]`.
    pub cell_means: [[f64; 2]; 2],
    /// Row factor (expertise).
    pub factor_a: Effect,
    /// Column factor (session).
    pub factor_b: Effect,
    pub interaction: Effect,
    pub ss_error: f64,
    pub df_error: f64,
    pub ms_error: f64,
    pub ss_total: f64,
}

/// Two-way ANOVA on `cells[a][b]`, all cells of equal size n >= 2.
///
/// Sums of squares follow the definitional formulas of the balanced design:
/// `SS_A = 2n Σ(Ā_a − Ḡ)²`, `SS_B = 2n Σ(B̄_b − Ḡ)²`,
/// `SS_AB = n Σ(M_ab − Ā_a − B̄_b + Ḡ)²`, `SS_E = Σ(x − M_ab)²`.
pub fn anova_2x2(cells: [[&[f64]; 2]; 2]) -> Result<Anova2x2Result, StatsError> {
    let n = cells[0][0].len();
    for row in &cells {
        for c in row {
            if c.len() != n {
                return Err(StatsError::Unbalanced);
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite);
            }
        }
    }
    if n < 2 {
        return Err(StatsError::TooFewObservations { need: 2, got: n });
    }
    let nf = n as f64;
    let m: [[f64; 2]; 2] = std::array::from_fn(|a| std::array::from_fn(|b| mean(cells[a][b])));
    let grand = (m[0][0] + m[0][1] + m[1][0] + m[1][1]) / 4.0;
    let a_mean = [(m[0][0] + m[0][1]) / 2.0, (m[1][0] + m[1][1]) / 2.0];
    let b_mean = [(m[0][0] + m[1][0]) / 2.0, (m[0][1] + m[1][1]) / 2.0];

    let ss_a = 2.0 * nf * a_mean.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let ss_b = 2.0 * nf * b_mean.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let mut ss_ab = 0.0;
    let mut ss_e = 0.0;
    let mut ss_t = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            ss_ab += nf * (m[a][b] - a_mean[a] - b_mean[b] + grand).powi(2);
            for x in cells[a][b] {
                ss_e += (x - m[a][b]).powi(2);
                ss_t += (x - grand).powi(2);
            }
        }
    }
    let df_e = 4.0 * (nf - 1.0);
    let ms_e = ss_e / df_e;
    if ms_e == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let effect = |ss: f64| -> Result<Effect, StatsError> {
        let f = ss / ms_e;
        Ok(Effect {
            ss,
            df: 1.0,
            ms: ss,
            f,
            p: f_sf(f, 1.0, df_e)?,
        })
    };
    Ok(Anova2x2Result {
        n_per_cell: n,
        cell_means: m,
        factor_a: effect(ss_a)?,
        factor_b: effect(ss_b)?,
        interaction: effect(ss_ab)?,
        ss_error: ss_e,
        df_error: df_e,
        ms_error: ms_e,
        ss_total: ss_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_dataset() {
        // cells {1,2},{3,4} / {5,6},{7,8}; cell means 1.5 3.5 5.5 7.5, grand 4.5
        // SS_A = 4*(2²+2²)=32, SS_B = 4*(1+1)=8, SS_AB = 0, SS_E = 4*0.5=2, SS_T = 42
        let r = anova_2x2([[&[1.0, 2.0], &[3.0, 4.0]], [&[5.0, 6.0], &[7.0, 8.0]]]).unwrap();
        assert_eq!(r.factor_a.ss, 32.0);
        assert_eq!(r.factor_b.ss, 8.0);
        assert_eq!(r.interaction.ss, 0.0);
        assert_eq!(r.ss_error, 2.0);
        assert_eq!(r.ss_total, 42.0);
        assert_eq!(r.df_error, 4.0);
        assert_eq!(r.factor_a.f, 64.0);
        assert_eq!(r.interaction.df, 1.0);
    }

    #[test]
    fn additive_means_give_zero_interaction() {
        let d = 0.25;
        let cell = |m: f64| vec![m - d, m + d];
        let (c00, c01, c10, c11) = (cell(1.0), cell(2.0), cell(3.0), cell(4.0));
        let r = anova_2x2([[&c00, &c01], [&c10, &c11]]).unwrap();
        assert_eq!(r.interaction.f, 0.0);
        assert_eq!(r.interaction.p, 1.0);
    }

    #[test]
    fn error_df_for_721_per_cell() {
        let c: Vec<f64> = (0..721).map(|i| (i % 7) as f64).collect();
        let r = anova_2x2([[&c, &c], [&c, &c]]).unwrap();
        assert_eq!(r.df_error, 2880.0);
    }

    #[test]
    fn rejects_bad_designs() {
        assert!(matches!(
            anova_2x2([[&[1.0, 2.0], &[3.0]], [&[5.0, 6.0], &[7.0, 8.0]]]),
            Err(StatsError::Unbalanced)
        ));
        assert!(matches!(
            anova_2x2([[&[1.0, 1.0], &[3.0, 3.0]], [&[5.0, 5.0], &[7.0, 7.0]]]),
            Err(StatsError::DegenerateVariance)
        ));
        assert!(matches!(
            anova_2x2([[&[1.0], &[3.0]], [&[5.0], &[7.0]]]),
            Err(StatsError::TooFewObservations { .. })
        ));
    }
}
