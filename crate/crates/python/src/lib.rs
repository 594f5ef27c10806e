use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use molsynth_core::eval::{self, ConstraintSpec, MetricReport};
use molsynth_core::instruct::{self, SynthConfig, Task, Triplet};
use molsynth_core::props::{fingerprint, tanimoto, FingerprintKind, FingerprintParams};
use molsynth_core::{parse_smiles, write_smiles, DescriptorId, Molecule, Registry};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mol(smiles: &str) -> PyResult<Molecule> {
    parse_smiles(smiles).map_err(|e| value_error(format!("{smiles}: {e}")))
}

fn registry(names: Option<Vec<String>>) -> PyResult<Registry> {
    match names {
        None => Ok(Registry::default()),
        Some(n) => {
            let ids = n.iter().map(|s| s.parse::<DescriptorId>()).collect::<Result<Vec<_>, _>>().map_err(value_error)?;
            Registry::new(ids).map_err(value_error)
        }
    }
}

fn report_dict<'py>(py: Python<'py>, report: &MetricReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for m in &report.metrics {
        d.set_item(&m.name, m.value)?;
    }
    Ok(d)
}

/// Canonical SMILES; raises ValueError on invalid input.
#[pyfunction]
fn canonical_smiles(smiles: &str) -> PyResult<String> {
    Ok(write_smiles(&mol(smiles)?))
}

#[pyfunction]
fn is_valid_smiles(smiles: &str) -> bool {
    molsynth_core::is_valid_smiles(smiles)
}

/// Descriptor values keyed by registry id, in registry order.
#[pyfunction]
#[pyo3(signature = (smiles, names=None))]
fn descriptors<'py>(py: Python<'py>, smiles: &str, names: Option<Vec<String>>) -> PyResult<Bound<'py, PyDict>> {
    let reg = registry(names)?;
    let v = molsynth_core::descriptor_vector(&mol(smiles)?, &reg).map_err(value_error)?;
    let d = PyDict::new(py);
    for (name, value) in v.names.iter().zip(&v.values) {
        d.set_item(name, value)?;
    }
    Ok(d)
}

/// Tanimoto similarity of two molecules' fingerprints (morgan, path or
/// maccs_lite).
#[pyfunction]
#[pyo3(signature = (a, b, kind="morgan"))]
fn similarity(a: &str, b: &str, kind: &str) -> PyResult<f64> {
    let kind: FingerprintKind = kind.parse().map_err(value_error)?;
    let params = FingerprintParams::default();
    let fa = fingerprint(&mol(a)?, kind, params).map_err(value_error)?;
    let fb = fingerprint(&mol(b)?, kind, params).map_err(value_error)?;
    tanimoto(&fa, &fb).map_err(value_error)
}

#[pyfunction]
fn caption_metrics<'py>(py: Python<'py>, pred: Vec<String>, refs: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &eval::caption_metrics(&pred, &refs).map_err(value_error)?)
}

#[pyfunction]
fn molgen_metrics<'py>(py: Python<'py>, pred: Vec<String>, refs: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &eval::molgen_metrics(&pred, &refs).map_err(value_error)?)
}

/// Scores generated SMILES against (BalabanJ, ExactMolWt, MolLogP, TPSA,
/// QED) target rows.
#[pyfunction]
fn multiconstraint_metrics<'py>(py: Python<'py>, targets: Vec<[f64; 5]>, generated: Vec<String>) -> PyResult<Bound<'py, PyDict>> {
    let specs = targets.into_iter().map(ConstraintSpec::new).collect::<Result<Vec<_>, _>>().map_err(value_error)?;
    report_dict(py, &eval::eval_multiconstraint(&specs, &generated).map_err(value_error)?)
}

/// Instruction records from (smiles, caption) pairs, as dicts with task,
/// instruction, response and source_smiles.
#[pyfunction]
#[pyo3(signature = (pairs, count, tasks=None, seed=0, mpp_properties=None, allow_replacement=false))]
fn synthesize<'py>(
    py: Python<'py>,
    pairs: Vec<(String, String)>,
    count: usize,
    tasks: Option<Vec<String>>,
    seed: u64,
    mpp_properties: Option<Vec<String>>,
    allow_replacement: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reg = Registry::default();
    let triplets = pairs
        .iter()
        .map(|(s, c)| Triplet::from_smiles(s, c, &reg).map_err(|e| value_error(format!("{s}: {e}"))))
        .collect::<PyResult<Vec<_>>>()?;
    let mut cfg = SynthConfig { per_task: count, seed, allow_replacement, ..SynthConfig::default() };
    if let Some(t) = tasks {
        cfg.tasks = t.iter().map(|s| s.parse::<Task>()).collect::<Result<_, _>>().map_err(value_error)?;
    }
    if let Some(p) = mpp_properties {
        cfg.mpp_properties = p.iter().map(|s| s.parse::<DescriptorId>()).collect::<Result<_, _>>().map_err(value_error)?;
    }
    let records = instruct::synthesize_dataset(&triplets, &cfg).map_err(value_error)?;
    records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("task", r.task.tag())?;
            d.set_item("instruction", &r.instruction)?;
            d.set_item("response", &r.response)?;
            d.set_item("source_smiles", &r.source_smiles)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn molsynth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(canonical_smiles, m)?)?;
    m.add_function(wrap_pyfunction!(is_valid_smiles, m)?)?;
    m.add_function(wrap_pyfunction!(descriptors, m)?)?;
    m.add_function(wrap_pyfunction!(similarity, m)?)?;
    m.add_function(wrap_pyfunction!(caption_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(molgen_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(multiconstraint_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    Ok(())
}
