//! Python bindings: sessions, preprocessing, features, the SVR and forest
//! regressors, metrics and the LOSO runner.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use biteweight::config::{ForestParams, PipelineConfig, SvrParams};
use biteweight::evaluation::{self, SynthProfile};
use biteweight::experiment::{self, DataSource, RunConfig};
use biteweight::pipeline::{bite_features, Pipeline};
use biteweight::{preprocess, regression, statistical, stats};

create_exception!(biteweight_py, BiteweightError, PyException);

fn err(e: biteweight::Error) -> PyErr {
    BiteweightError::new_err(e.to_string())
}

fn pipeline(name: &str) -> PyResult<Pipeline> {
    name.parse().map_err(BiteweightError::new_err)
}

/// One recorded (or generated) meal.
#[pyclass(name = "Session", frozen, from_py_object)]
#[derive(Clone)]
struct PySession {
    inner: biteweight::Session,
}

#[pymethods]
impl PySession {
    #[getter]
    fn subject_id(&self) -> String {
        self.inner.subject_id.clone()
    }

    #[getter]
    fn session_id(&self) -> String {
        self.inner.session_id.clone()
    }

    #[getter]
    fn fs(&self) -> f64 {
        self.inner.imu.fs()
    }

    #[getter]
    fn wrist(&self) -> String {
        format!("{:?}", self.inner.imu.wrist()).to_lowercase()
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.imu.len()
    }

    #[getter]
    fn bite_ids(&self) -> Vec<String> {
        self.inner.bites.iter().map(|b| b.bite_id.clone()).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.bites.iter().map(|b| b.weight_g).collect()
    }

    /// IMU channel by name (`ax` .. `gz`).
    fn channel(&self, name: &str) -> PyResult<Vec<f64>> {
        let ch = biteweight::Channel::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| BiteweightError::new_err(format!("unknown channel {name:?}")))?;
        Ok(self.inner.imu.channel(ch))
    }

    /// Resample, high-pass, median filter and mirror with default constants.
    fn preprocess(&self) -> PyResult<PySession> {
        let cfg = PipelineConfig::default();
        Ok(PySession {
            inner: preprocess::preprocess_session(&self.inner, &cfg.preprocess).map_err(err)?,
        })
    }

    /// Feature vector of one bite for `proposed` (6 values) or `mirtchouk`
    /// (56 values); expects a preprocessed session.
    #[pyo3(signature = (bite_id, pipeline_name = "proposed"))]
    fn features(&self, bite_id: &str, pipeline_name: &str) -> PyResult<Vec<f64>> {
        bite_features(pipeline(pipeline_name)?, &self.inner, bite_id, &PipelineConfig::default()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Session(subject={:?}, session={:?}, bites={}, samples={})",
            self.inner.subject_id,
            self.inner.session_id,
            self.inner.bites.len(),
            self.inner.imu.len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (subjects, seed, coupling = 1.0))]
fn generate_synthetic(subjects: usize, seed: u64, coupling: f64) -> PyResult<Vec<PySession>> {
    let profile = SynthProfile {
        coupling,
        ..SynthProfile::default()
    };
    Ok(evaluation::generate_synthetic(subjects, seed, &profile)
        .map_err(err)?
        .into_iter()
        .map(|inner| PySession { inner })
        .collect())
}

#[pyfunction]
fn load_dataset(manifest: PathBuf) -> PyResult<Vec<PySession>> {
    Ok(biteweight::io::load_dataset(&manifest)
        .map_err(err)?
        .into_iter()
        .map(|inner| PySession { inner })
        .collect())
}

/// Linear epsilon-SVR on z-scored features.
#[pyclass(name = "SvrModel", frozen)]
struct PySvrModel {
    inner: regression::SvrModel,
}

#[pymethods]
impl PySvrModel {
    #[staticmethod]
    #[pyo3(signature = (x, y, c = 1.01, eps = 0.016))]
    fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, c: f64, eps: f64) -> PyResult<Self> {
        let params = SvrParams {
            c,
            eps,
            ..SvrParams::default()
        };
        Ok(Self {
            inner: regression::SvrModel::fit(&x, &y, &params).map_err(err)?,
        })
    }

    fn predict(&self, x: Vec<f64>) -> f64 {
        self.inner.predict(&x)
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w.clone()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn duality_gap(&self) -> f64 {
        self.inner.duality_gap
    }
}

#[pyclass(name = "ForestModel", frozen)]
struct PyForestModel {
    inner: regression::ForestModel,
}

#[pymethods]
impl PyForestModel {
    #[staticmethod]
    #[pyo3(signature = (x, y, n_trees = 40, seed = 0))]
    fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, n_trees: usize, seed: u64) -> PyResult<Self> {
        let params = ForestParams {
            n_trees,
            seed,
            ..ForestParams::default()
        };
        Ok(Self {
            inner: regression::ForestModel::fit(&x, &y, &params).map_err(err)?,
        })
    }

    fn predict(&self, x: Vec<f64>) -> f64 {
        self.inner.predict(&x)
    }
}

/// Raw SVR solve without standardization; returns `(w, b, objective)`.
#[pyfunction]
#[pyo3(signature = (x, y, c = 1.01, eps = 0.016))]
fn fit_linear_svr(x: Vec<Vec<f64>>, y: Vec<f64>, c: f64, eps: f64) -> PyResult<(Vec<f64>, f64, f64)> {
    let params = SvrParams {
        c,
        eps,
        ..SvrParams::default()
    };
    let fit = regression::fit_linear_svr(&x, &y, &params).map_err(err)?;
    Ok((fit.w, fit.b, fit.objective))
}

#[pyfunction]
fn improvement_pct(mae_baseline: f64, mae_model: f64) -> Option<f64> {
    evaluation::improvement_pct(mae_baseline, mae_model)
}

#[pyfunction]
fn skewness(xs: Vec<f64>) -> f64 {
    stats::skewness(&xs)
}

#[pyfunction]
#[pyo3(signature = (xs, bins = 16))]
fn histogram_entropy(xs: Vec<f64>, bins: usize) -> f64 {
    statistical::histogram_entropy(&xs, bins)
}

/// Zero-phase high-pass of one uniformly sampled signal.
#[pyfunction]
#[pyo3(signature = (x, fs = 100.0, cutoff_hz = 1.0, taps = 501))]
fn highpass_filtfilt(x: Vec<f64>, fs: f64, cutoff_hz: f64, taps: usize) -> PyResult<Vec<f64>> {
    let h = preprocess::design_highpass(cutoff_hz, taps, fs).map_err(err)?;
    preprocess::filtfilt_signal(&h, &x).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (x, order = 5))]
fn median_filter(x: Vec<f64>, order: usize) -> PyResult<Vec<f64>> {
    preprocess::median_signal(&x, order).map_err(err)
}

/// LOSO evaluation of `pipeline_name` on preprocessed sessions; returns the
/// metrics report as a JSON string.
#[pyfunction]
#[pyo3(signature = (sessions, pipeline_name = "proposed"))]
fn evaluate(py: Python<'_>, sessions: Vec<PySession>, pipeline_name: &str) -> PyResult<String> {
    let p = pipeline(pipeline_name)?;
    let sessions: Vec<biteweight::Session> = sessions.into_iter().map(|s| s.inner).collect();
    let report = py
        .detach(|| experiment::evaluate_sessions(&sessions, p, &PipelineConfig::default()))
        .map_err(err)?
        .report;
    serde_json::to_string(&report).map_err(|e| BiteweightError::new_err(e.to_string()))
}

/// Same as `biteweight evaluate --synth`; writes all artifacts to `out_dir`
/// and returns the metrics JSON.
#[pyfunction]
#[pyo3(signature = (out_dir, subjects = 10, seed = 7, pipeline_name = "proposed", coupling = 1.0))]
fn run_synthetic_evaluation(
    py: Python<'_>,
    out_dir: PathBuf,
    subjects: usize,
    seed: u64,
    pipeline_name: &str,
    coupling: f64,
) -> PyResult<String> {
    let data = DataSource::Synth {
        subjects,
        profile: SynthProfile {
            coupling,
            ..SynthProfile::default()
        },
    };
    let run = RunConfig::new(experiment::Command::Evaluate, data, out_dir, pipeline(pipeline_name)?, seed);
    let eval = py.detach(|| experiment::run_evaluate(&run)).map_err(err)?;
    serde_json::to_string(&eval.report).map_err(|e| BiteweightError::new_err(e.to_string()))
}

#[pymodule]
fn biteweight_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BiteweightError", m.py().get_type::<BiteweightError>())?;
    m.add_class::<PySession>()?;
    m.add_class::<PySvrModel>()?;
    m.add_class::<PyForestModel>()?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(fit_linear_svr, m)?)?;
    m.add_function(wrap_pyfunction!(improvement_pct, m)?)?;
    m.add_function(wrap_pyfunction!(skewness, m)?)?;
    m.add_function(wrap_pyfunction!(histogram_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(highpass_filtfilt, m)?)?;
    m.add_function(wrap_pyfunction!(median_filter, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run_synthetic_evaluation, m)?)?;
    Ok(())
}
