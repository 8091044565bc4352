//! Python bindings: sensor model, frame codec, sessions, profiling, the
//! simulator, the SOM and the statistics.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use gripforge_core::acquisition::{self, Frame, Glove, Hand};
use gripforge_core::profiling::{self, SensorSeries};
use gripforge_core::sensor::{self, DividerParams, SensorId};
use gripforge_core::simulator::{self, GeneratorConfig, SkillProfile};
use gripforge_core::som::{self, QeConfig, TrainingSchedule};
use gripforge_core::stats;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(err)
}

/// Divider output in mV for an FSR resistance in ohms.
#[pyfunction]
#[pyo3(signature = (r_fsr_ohm, r_pulldown_ohm = 10_000.0, v_supply_mv = 3300.0))]
fn fsr_to_voltage(r_fsr_ohm: f64, r_pulldown_ohm: f64, v_supply_mv: f64) -> PyResult<f64> {
    let p = DividerParams::new(r_pulldown_ohm, v_supply_mv).map_err(err)?;
    sensor::fsr_to_voltage(r_fsr_ohm, &p).map_err(err)
}

#[pyfunction]
fn encode_frame<'py>(py: Python<'py>, glove: &str, seq: u16, t_ms: u32, voltages: [u16; 12]) -> PyResult<Bound<'py, PyBytes>> {
    let f = Frame {
        glove: parse::<Glove>(glove)?,
        seq,
        t_ms,
        voltages,
    };
    let b = acquisition::encode_frame(&f).map_err(err)?;
    Ok(PyBytes::new(py, &b))
}

/// Returns a dict with glove ("L"/"R"), seq, t_ms and voltages.
#[pyfunction]
fn decode_frame<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Bound<'py, PyDict>> {
    let f = acquisition::decode_frame(data).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("glove", f.glove.code().to_string())?;
    d.set_item("seq", f.seq)?;
    d.set_item("t_ms", f.t_ms)?;
    d.set_item("voltages", f.voltages.to_vec())?;
    Ok(d)
}

#[pyclass(name = "Session", module = "gripforge", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySession {
    inner: acquisition::Session,
}

#[pymethods]
impl PySession {
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        acquisition::Session::from_csv(text)
            .map(|inner| PySession { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        acquisition::Session::read(path).map(|inner| PySession { inner }).map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        self.inner.write(path).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    #[getter]
    fn user(&self) -> String {
        self.inner.user().to_string()
    }

    #[getter]
    fn hand(&self) -> String {
        self.inner.hand().code().to_string()
    }

    #[getter]
    fn index(&self) -> u32 {
        self.inner.index()
    }

    #[getter]
    fn key(&self) -> String {
        self.inner.key()
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.inner.duration_s()
    }

    /// mV readings of one sensor ("S5", ...) in time order.
    fn values(&self, sensor: &str) -> PyResult<Vec<f64>> {
        let id = parse::<SensorId>(sensor)?;
        Ok(self.inner.samples_for(id).map(|s| s.v_mv as f64).collect())
    }

    /// AmV of the disjoint windows of one sensor.
    #[pyo3(signature = (sensor, window_ms = 2000))]
    fn amv(&self, sensor: &str, window_ms: u32) -> PyResult<Vec<f64>> {
        let id = parse::<SensorId>(sensor)?;
        let p = profiling::window_amv(&SensorSeries::from_session(&self.inner, id), window_ms).map_err(err)?;
        Ok(p.windows.iter().map(|w| w.amv).collect())
    }

    /// Pooled within-sensor STD over the ten analysis sensors.
    fn pooled_std(&self) -> PyResult<f64> {
        let s = gripforge_core::analysis::pooled_std_series(std::slice::from_ref(&self.inner)).map_err(err)?;
        Ok(s[0])
    }

    fn incidents(&self) -> usize {
        profiling::task_metrics(&self.inner).incident_count
    }

    /// One 10-dim vector (S2, S3, S5..S12) per complete timestamp.
    fn som_inputs(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(som::build_inputs(&self.inner).map_err(err)?.vectors)
    }

    fn __repr__(&self) -> String {
        format!(
            "Session({}, {} samples, {:.2} s)",
            self.inner.key(),
            self.inner.samples().len(),
            self.inner.duration_s()
        )
    }
}

/// Decodes a byte stream of frames from one glove into a session.
#[pyfunction]
fn ingest(data: &[u8], user: &str, hand: &str, index: u32) -> PyResult<PySession> {
    let frames = acquisition::decode_stream(data);
    let meta = acquisition::SessionMeta {
        user: user.to_string(),
        hand: parse::<Hand>(hand)?,
        index,
    };
    acquisition::stream_to_session(&frames, meta)
        .map(|inner| PySession { inner })
        .map_err(err)
}

/// Simulated sessions for expert and novice, both hands.
#[pyfunction]
#[pyo3(signature = (seed = 1, sessions = 10))]
fn simulate_cohort(seed: u64, sessions: u32) -> PyResult<Vec<PySession>> {
    let cfg = GeneratorConfig {
        sessions,
        ..GeneratorConfig::with_seed(seed)
    };
    let c = simulator::simulate_cohort(&SkillProfile::expert(), &SkillProfile::novice(), &cfg).map_err(err)?;
    Ok(c.sessions.into_iter().map(|inner| PySession { inner }).collect())
}

#[pyfunction]
fn session_std(values: Vec<f64>) -> PyResult<f64> {
    profiling::session_std(&values).map_err(err)
}

#[pyclass(name = "Som", module = "gripforge", frozen)]
struct PySom {
    grid: som::SomGrid,
}

#[pymethods]
impl PySom {
    /// Trains a 7x7 map on `inputs` with the linear-decay schedule.
    #[staticmethod]
    #[pyo3(signature = (inputs, epochs = 100, alpha0 = 0.5, sigma0 = 3.5, seed = 1))]
    fn fit(inputs: Vec<Vec<f64>>, epochs: usize, alpha0: f64, sigma0: f64, seed: u64) -> PyResult<Self> {
        let d = TrainingSchedule::default();
        let s = TrainingSchedule {
            epochs,
            alpha0,
            alpha_end: d.alpha_end.min(alpha0),
            sigma0,
            sigma_end: d.sigma_end.min(sigma0),
            seed,
        };
        let grid = som::fit(som::GRID_WIDTH, som::GRID_HEIGHT, &inputs, &s).map_err(err)?;
        Ok(PySom { grid })
    }

    /// A map with the given model vectors (row-major, width * height rows).
    #[staticmethod]
    #[pyo3(signature = (models, width = 7, height = 7))]
    fn from_models(models: Vec<Vec<f64>>, width: usize, height: usize) -> PyResult<Self> {
        let grid = som::SomGrid::from_vectors(width, height, &models).map_err(err)?;
        Ok(PySom { grid })
    }

    fn bmu(&self, x: Vec<f64>) -> PyResult<usize> {
        som::bmu(&self.grid, &x).map_err(err)
    }

    fn quantization_error(&self, inputs: Vec<Vec<f64>>) -> PyResult<f64> {
        som::quantization_error(&self.grid, &inputs).map_err(err)
    }

    fn models(&self) -> Vec<Vec<f64>> {
        self.grid.models().map(<[f64]>::to_vec).collect()
    }
}

/// Reference-grid QE per session: returns (group, session index, qe) rows.
#[pyfunction]
#[pyo3(signature = (groups, seed = 1, epochs = 100))]
fn som_qe_curve(groups: Vec<(String, Vec<PyRef<'_, PySession>>)>, seed: u64, epochs: usize) -> PyResult<Vec<(String, u32, f64)>> {
    let groups: Vec<(String, Vec<acquisition::Session>)> = groups
        .into_iter()
        .map(|(name, ss)| (name, ss.iter().map(|s| s.inner.clone()).collect()))
        .collect();
    let cfg = QeConfig {
        schedule: TrainingSchedule {
            epochs,
            ..TrainingSchedule::with_seed(seed)
        },
        ..QeConfig::default()
    };
    let c = som::som_qe_curve(&groups, &cfg).map_err(err)?;
    Ok(c.points.into_iter().map(|p| (p.group, p.session_index, p.qe)).collect())
}

/// Pooled-variance two-sample t: dict with t, df, p, mean_a, mean_b.
#[pyfunction]
fn two_group_t<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::two_group_t(&a, &b).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("df", r.df)?;
    d.set_item("p", r.p)?;
    d.set_item("mean_a", r.mean_a)?;
    d.set_item("mean_b", r.mean_b)?;
    Ok(d)
}

/// Balanced 2x2 ANOVA on `cells[a][b]`: dict of effect -> (F, df, p) plus df_error.
#[pyfunction]
fn anova_2x2<'py>(py: Python<'py>, cells: [[Vec<f64>; 2]; 2]) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::anova_2x2([[&cells[0][0], &cells[0][1]], [&cells[1][0], &cells[1][1]]]).map_err(err)?;
    let d = PyDict::new(py);
    for (name, e) in [("a", r.factor_a), ("b", r.factor_b), ("ab", r.interaction)] {
        d.set_item(name, (e.f, e.df, e.p))?;
    }
    d.set_item("df_error", r.df_error)?;
    Ok(d)
}

#[pymodule]
pub fn gripforge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySession>()?;
    m.add_class::<PySom>()?;
    m.add_function(wrap_pyfunction!(fsr_to_voltage, m)?)?;
    m.add_function(wrap_pyfunction!(encode_frame, m)?)?;
    m.add_function(wrap_pyfunction!(decode_frame, m)?)?;
    m.add_function(wrap_pyfunction!(ingest, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cohort, m)?)?;
    m.add_function(wrap_pyfunction!(session_std, m)?)?;
    m.add_function(wrap_pyfunction!(som_qe_curve, m)?)?;
    m.add_function(wrap_pyfunction!(two_group_t, m)?)?;
    m.add_function(wrap_pyfunction!(anova_2x2, m)?)?;
    Ok(())
}
