//! FSR sensor layout, voltage-divider physics and force/voltage calibration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Number of FSR sensors on one glove.
pub const SENSORS_PER_GLOVE: usize = 12;

/// Maximum force (gram) applied during the task; calibration must cover it.
pub const MAX_TASK_FORCE_G: f64 = 1100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("sensor index {0} outside 1..=12")]
    BadIndex(i64),
    #[error("cannot parse sensor id {0:?}")]
    BadName(String),
    #[error("FSR resistance must be positive and finite, got {0}")]
    NonPositiveResistance(f64),
    #[error("divider parameters must be positive (r_pulldown={r_pulldown}, v_supply={v_supply})")]
    BadDivider { r_pulldown: f64, v_supply: f64 },
    #[error("voltage {0} mV is negative or not finite")]
    NegativeVoltage(f64),
    #[error("voltage {v} mV above calibrated maximum {max} mV")]
    OutOfRange { v: f64, max: f64 },
    #[error("calibration curve invalid: {0}")]
    InvalidCurve(String),
    #[error("calibration file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for SensorError {
    fn from(e: std::io::Error) -> Self {
        SensorError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Locus {
    Fingertip,
    MiddlePhalanx,
    Palm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FingerRole {
    /// Middle finger: gross grip force deployment.
    GrossGrip,
    /// Ring finger: non-specific grip force support.
    Support,
    /// Pinky: precision grip control.
    Precision,
    Other,
}

/// Glove sensor identifier, S1..S12.
///
/// Fingertips carry S1-S4, middle phalanxes S5-S8 (5 mm) and the palm
/// S9-S12. S1 and S4 produced too little output and are excluded from
/// analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SensorId(u8);

impl SensorId {
    pub const S1: SensorId = SensorId(1);
    pub const S4: SensorId = SensorId(4);
    pub const S5: SensorId = SensorId(5);
    pub const S6: SensorId = SensorId(6);
    pub const S7: SensorId = SensorId(7);

    pub fn new(index: u8) -> Result<Self, SensorError> {
        if (1..=SENSORS_PER_GLOVE as u8).contains(&index) {
            Ok(SensorId(index))
        } else {
            Err(SensorError::BadIndex(index as i64))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    /// Zero-based slot in a 12-wide frame.
    pub fn slot(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = SensorId> {
        (1..=SENSORS_PER_GLOVE as u8).map(SensorId)
    }

    /// The ten analysis-eligible sensors, in SOM input order.
    pub fn eligible() -> impl Iterator<Item = SensorId> {
        Self::all().filter(|s| !s.is_excluded())
    }

    pub fn is_excluded(self) -> bool {
        self.0 == 1 || self.0 == 4
    }

    pub fn locus(self) -> Locus {
        match self.0 {
            1..=4 => Locus::Fingertip,
            5..=8 => Locus::MiddlePhalanx,
            _ => Locus::Palm,
        }
    }

    pub fn diameter_mm(self) -> u8 {
        match self.locus() {
            Locus::MiddlePhalanx => 5,
            _ => 10,
        }
    }

    pub fn finger_role(self) -> FingerRole {
        match self.0 {
            5 => FingerRole::GrossGrip,
            6 => FingerRole::Support,
            7 => FingerRole::Precision,
            _ => FingerRole::Other,
        }
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

impl FromStr for SensorId {
    type Err = SensorError;

    /// Accepts `S5`, `s5` or `5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let digits = t.strip_prefix(['S', 's']).unwrap_or(t);
        let n: i64 = digits
            .parse()
            .map_err(|_| SensorError::BadName(s.to_string()))?;
        if !(1..=SENSORS_PER_GLOVE as i64).contains(&n) {
            return Err(SensorError::BadIndex(n));
        }
        Ok(SensorId(n as u8))
    }
}

/// Pull-down resistor and supply voltage of the FSR read-out circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividerParams {
    pub r_pulldown_ohm: f64,
    pub v_supply_mv: f64,
}

impl Default for DividerParams {
    fn default() -> Self {
        DividerParams {
            r_pulldown_ohm: 10_000.0,
            v_supply_mv: 3300.0,
        }
    }
}

impl DividerParams {
    pub fn new(r_pulldown_ohm: f64, v_supply_mv: f64) -> Result<Self, SensorError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(r_pulldown_ohm) || !ok(v_supply_mv) {
            return Err(SensorError::BadDivider {
                r_pulldown: r_pulldown_ohm,
                v_supply: v_supply_mv,
            });
        }
        Ok(DividerParams {
            r_pulldown_ohm,
            v_supply_mv,
        })
    }
}

/// Divider output `R_pd * V / (R_pd + R_fsr)` in millivolt.
pub fn fsr_to_voltage(r_fsr_ohm: f64, params: &DividerParams) -> Result<f64, SensorError> {
    if !(r_fsr_ohm.is_finite() && r_fsr_ohm > 0.0) {
        return Err(SensorError::NonPositiveResistance(r_fsr_ohm));
    }
    let DividerParams {
        r_pulldown_ohm: rpd,
        v_supply_mv: vs,
    } = *params;
    Ok(rpd * vs / (rpd + r_fsr_ohm))
}

/// Monotone force/voltage calibration for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationCurve {
    /// `(force_gram, tension_mv)` pairs, ordered by force.
    pub knots: Vec<(f64, f64)>,
    /// Range within which the force/voltage relation is linear.
    pub linear_range_mv: (f64, f64),
}

impl CalibrationCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Self {
        CalibrationCurve {
            knots,
            linear_range_mv: (0.0, 1500.0),
        }
    }

    /// Synthetic default: linear up to 1100 g / 1500 mV, then flattening
    /// up to 20 N (2040 g).
    pub fn synthetic_default() -> Self {
        Self::new(vec![
            (0.0, 0.0),
            (550.0, 750.0),
            (1100.0, 1500.0),
            (1500.0, 1950.0),
            (2040.0, 2450.0),
        ])
    }

    pub fn max_mv(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.1)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<(SensorId, Self), SensorError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parses the `# calibration v1 sensor=<id>` text format and validates it.
    pub fn parse(text: &str) -> Result<(SensorId, Self), SensorError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(SensorError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let sensor = header
            .trim()
            .strip_prefix("# calibration v1 sensor=")
            .ok_or_else(|| SensorError::Parse {
                line: 1,
                msg: format!("bad header {header:?}"),
            })?
            .parse::<SensorId>()
            .map_err(|e| SensorError::Parse {
                line: 1,
                msg: e.to_string(),
            })?;
        let mut knots = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| SensorError::Parse { line: i + 1, msg };
            let (f, v) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("expected force,mv in {line:?}")))?;
            let f: f64 = f.trim().parse().map_err(|_| bad(format!("bad force {f:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| bad(format!("bad mv {v:?}")))?;
            knots.push((f, v));
        }
        let curve = CalibrationCurve::new(knots);
        let report = validate_calibration(&curve);
        if !report.passed() {
            return Err(SensorError::InvalidCurve(report.to_string()));
        }
        Ok((sensor, curve))
    }

    pub fn to_text(&self, sensor: SensorId) -> String {
        let mut out = format!("# calibration v1 sensor={sensor}\n");
        for (f, v) in &self.knots {
            out.push_str(&format!("{f},{v}\n"));
        }
        out
    }
}

/// Piecewise-linear force (gram) for a tension in millivolt. No extrapolation.
pub fn voltage_to_force(v_mv: f64, curve: &CalibrationCurve) -> Result<f64, SensorError> {
    if !(v_mv.is_finite() && v_mv >= 0.0) {
        return Err(SensorError::NegativeVoltage(v_mv));
    }
    if !is_strictly_monotone(&curve.knots) || curve.knots.first() != Some(&(0.0, 0.0)) {
        return Err(SensorError::InvalidCurve(
            validate_calibration(curve).to_string(),
        ));
    }
    let max = curve.max_mv();
    if v_mv > max {
        return Err(SensorError::OutOfRange { v: v_mv, max });
    }
    // first knot with mV >= v
    let hi = curve.knots.partition_point(|k| k.1 < v_mv);
    if hi == 0 {
        return Ok(curve.knots[0].0);
    }
    let (f1, v1) = curve.knots[hi];
    if v1 == v_mv {
        return Ok(f1);
    }
    let (f0, v0) = curve.knots[hi - 1];
    Ok(f0 + (f1 - f0) * (v_mv - v0) / (v1 - v0))
}

fn is_strictly_monotone(knots: &[(f64, f64)]) -> bool {
    knots.len() >= 2
        && knots
            .windows(2)
            .all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationFinding {
    TooFewKnots(usize),
    NonFinite { knot: usize },
    ForceNotIncreasing { knot: usize },
    VoltageNotIncreasing { knot: usize },
    MissingZeroKnot,
    InsufficientCoverage { max_force_g: f64 },
}

impl fmt::Display for CalibrationFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TooFewKnots(n) => write!(f, "only {n} knot(s), need at least 2"),
            Self::NonFinite { knot } => write!(f, "knot {knot} is not finite"),
            Self::ForceNotIncreasing { knot } => {
                write!(f, "force does not increase at knot {knot}")
            }
            Self::VoltageNotIncreasing { knot } => {
                write!(f, "tension does not increase at knot {knot}")
            }
            Self::MissingZeroKnot => write!(f, "first knot is not (0 g, 0 mV)"),
            Self::InsufficientCoverage { max_force_g } => write!(
                f,
                "maximum force knot {max_force_g} g below {MAX_TASK_FORCE_G} g"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub findings: Vec<CalibrationFinding>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.findings.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_calibration(curve: &CalibrationCurve) -> ValidationReport {
    let mut findings = Vec::new();
    let knots = &curve.knots;
    if knots.len() < 2 {
        findings.push(CalibrationFinding::TooFewKnots(knots.len()));
    }
    for (i, (f, v)) in knots.iter().enumerate() {
        if !f.is_finite() || !v.is_finite() {
            findings.push(CalibrationFinding::NonFinite { knot: i });
        }
    }
    for (i, w) in knots.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            findings.push(CalibrationFinding::ForceNotIncreasing { knot: i + 1 });
        }
        if !(w[1].1 > w[0].1) {
            findings.push(CalibrationFinding::VoltageNotIncreasing { knot: i + 1 });
        }
    }
    if knots.first() != Some(&(0.0, 0.0)) {
        findings.push(CalibrationFinding::MissingZeroKnot);
    }
    let max_force = knots.iter().map(|k| k.0).fold(f64::NEG_INFINITY, f64::max);
    if !(max_force >= MAX_TASK_FORCE_G) {
        findings.push(CalibrationFinding::InsufficientCoverage {
            max_force_g: if knots.is_empty() { 0.0 } else { max_force },
        });
    }
    ValidationReport { findings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn divider_reference_values() {
        let p = DividerParams::default();
        assert!((fsr_to_voltage(250.0, &p).unwrap() - 3219.512).abs() < 0.01);
        assert_eq!(fsr_to_voltage(10_000.0, &p).unwrap(), 1650.0);
        // 10k * 3300 / 10_010_000
        let v = fsr_to_voltage(10_000_000.0, &p).unwrap();
        assert!((v - 3.2967).abs() < 1e-3, "{v}");
    }

    #[test]
    fn divider_rejects_non_positive() {
        let p = DividerParams::default();
        assert!(matches!(
            fsr_to_voltage(0.0, &p),
            Err(SensorError::NonPositiveResistance(_))
        ));
        assert!(fsr_to_voltage(-5.0, &p).is_err());
        assert!(fsr_to_voltage(f64::NAN, &p).is_err());
        assert!(DividerParams::new(0.0, 3300.0).is_err());
    }

    #[test]
    fn interpolation() {
        let c = CalibrationCurve::new(vec![(0.0, 0.0), (1100.0, 1500.0)]);
        assert_eq!(voltage_to_force(0.0, &c).unwrap(), 0.0);
        assert_eq!(voltage_to_force(750.0, &c).unwrap(), 550.0);
        assert_eq!(voltage_to_force(1500.0, &c).unwrap(), 1100.0);
        assert!(matches!(
            voltage_to_force(1500.5, &c),
            Err(SensorError::OutOfRange { .. })
        ));
        assert!(matches!(
            voltage_to_force(-1.0, &c),
            Err(SensorError::NegativeVoltage(_))
        ));
    }

    #[test]
    fn exact_at_default_knots() {
        let c = CalibrationCurve::synthetic_default();
        for &(f, v) in &c.knots {
            assert_eq!(voltage_to_force(v, &c).unwrap(), f);
        }
    }

    #[test]
    fn validation_findings() {
        let good = CalibrationCurve::new(vec![(0.0, 0.0), (1100.0, 1500.0)]);
        assert!(validate_calibration(&good).passed());

        let decreasing = CalibrationCurve::new(vec![(0.0, 0.0), (600.0, 900.0), (1200.0, 800.0)]);
        let r = validate_calibration(&decreasing);
        assert!(!r.passed());
        assert!(r
            .findings
            .contains(&CalibrationFinding::VoltageNotIncreasing { knot: 2 }));

        let short = CalibrationCurve::new(vec![(0.0, 0.0), (900.0, 1300.0)]);
        let r = validate_calibration(&short);
        assert_eq!(
            r.findings,
            vec![CalibrationFinding::InsufficientCoverage { max_force_g: 900.0 }]
        );

        let no_zero = CalibrationCurve::new(vec![(10.0, 5.0), (1100.0, 1500.0)]);
        assert!(validate_calibration(&no_zero)
            .findings
            .contains(&CalibrationFinding::MissingZeroKnot));
        assert!(voltage_to_force(100.0, &no_zero).is_err());
    }

    #[test]
    fn layout() {
        assert_eq!(SensorId::eligible().count(), 10);
        assert!(SensorId::S1.is_excluded() && SensorId::S4.is_excluded());
        assert_eq!(SensorId::S5.finger_role(), FingerRole::GrossGrip);
        assert_eq!(SensorId::S6.finger_role(), FingerRole::Support);
        assert_eq!(SensorId::S7.finger_role(), FingerRole::Precision);
        let small = SensorId::all().filter(|s| s.diameter_mm() == 5).count();
        assert_eq!(small, 4);
        assert_eq!("S12".parse::<SensorId>().unwrap().index(), 12);
        assert_eq!("7".parse::<SensorId>().unwrap(), SensorId::S7);
        assert!("S13".parse::<SensorId>().is_err());
        assert!(SensorId::new(0).is_err());
    }

    #[test]
    fn calibration_file_round_trip() {
        let c = CalibrationCurve::synthetic_default();
        let text = c.to_text(SensorId::S5);
        assert!(text.starts_with("# calibration v1 sensor=S5\n"));
        let (s, back) = CalibrationCurve::parse(&text).unwrap();
        assert_eq!(s, SensorId::S5);
        assert_eq!(back, c);

        let err = CalibrationCurve::parse("# calibration v1 sensor=S2\n0,0\n100;3\n").unwrap_err();
        assert_eq!(
            err,
            SensorError::Parse {
                line: 3,
                msg: "expected force,mv in \"100;3\"".into()
            }
        );
        assert!(matches!(
            CalibrationCurve::parse("# calibration v1 sensor=S2\n0,0\n900,1200\n"),
            Err(SensorError::InvalidCurve(_))
        ));
    }

    proptest! {
        #[test]
        fn divider_strictly_decreasing(a in 1e-3f64..1e8, b in 1e-3f64..1e8) {
            prop_assume!(a < b);
            let p = DividerParams::default();
            let (va, vb) = (fsr_to_voltage(a, &p).unwrap(), fsr_to_voltage(b, &p).unwrap());
            prop_assert!(va > vb);
            prop_assert!(va > 0.0 && va < p.v_supply_mv);
            prop_assert!(vb > 0.0 && vb < p.v_supply_mv);
        }

        #[test]
        fn force_monotone(v1 in 0.0f64..2450.0, v2 in 0.0f64..2450.0) {
            let c = CalibrationCurve::synthetic_default();
            let (lo, hi) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            prop_assert!(voltage_to_force(lo, &c).unwrap() <= voltage_to_force(hi, &c).unwrap());
        }
    }
}
