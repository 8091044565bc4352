//! Plain-text and CSV rendering of test results.

use super::{Anova2x2Result, TwoGroupResult};

/// `p<.001` below one in a thousand, otherwise three decimals.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "p<.001".to_string()
    } else {
        format!("p={p:.3}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub effect: String,
    /// `t` or `F`.
    pub stat: &'static str,
    pub value: f64,
    pub df1: f64,
    pub df2: Option<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn push_t(&mut self, effect: impl Into<String>, r: &TwoGroupResult) {
        self.rows.push(ReportRow {
            effect: effect.into(),
            stat: "t",
            value: r.t,
            df1: r.df,
            df2: None,
            p: r.p,
        });
    }

    /// Adds the three effect rows of a 2×2 ANOVA, prefixed by `label`.
    pub fn push_anova(&mut self, label: &str, a: &Anova2x2Result, names: [&str; 2]) {
        let effects = [
            (names[0].to_string(), a.factor_a),
            (names[1].to_string(), a.factor_b),
            (format!("{} x {}", names[0], names[1]), a.interaction),
        ];
        for (name, e) in effects {
            self.rows.push(ReportRow {
                effect: format!("{label} {name}"),
                stat: "F",
                value: e.f,
                df1: e.df,
                df2: Some(a.df_error),
                p: e.p,
            });
        }
    }

    pub fn to_text(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.effect.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut out = format!("{:<width$}  stat  {:>12}  {:>12}  {:<10}  {}\n", "effect", "value", "df", "p", "exact p");
        for r in &self.rows {
            let df = match r.df2 {
                Some(d2) => format!("({},{})", r.df1, d2),
                None => format!("{}", r.df1),
            };
            out.push_str(&format!(
                "{:<width$}  {:<4}  {:>12.4}  {:>12}  {:<10}  {:.6e}\n",
                r.effect,
                r.stat,
                r.value,
                df,
                format_p(r.p),
                r.p
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("effect,stat,value,df1,df2,p\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.effect,
                r.stat,
                r.value,
                r.df1,
                r.df2.map(|d| d.to_string()).unwrap_or_default(),
                r.p
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{anova_2x2, two_group_t};

    #[test]
    fn p_format() {
        assert_eq!(format_p(0.0004), "p<.001");
        assert_eq!(format_p(0.0213), "p=0.021");
        assert_eq!(format_p(1.0), "p=1.000");
    }

    #[test]
    fn render() {
        let mut rep = Report::default();
        rep.push_t("std dominant", &two_group_t(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap());
        let a = anova_2x2([[&[1.0, 2.0], &[3.0, 4.0]], [&[5.0, 6.0], &[7.0, 8.0]]]).unwrap();
        rep.push_anova("S5", &a, ["expertise", "session"]);
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.contains("\nS5 expertise x session,F,0,1,4,1\n"));
        let text = rep.to_text();
        assert!(text.contains("std dominant"));
        assert!(text.contains("(1,4)"));
    }
}
