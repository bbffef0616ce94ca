use pyo3::prelude::*;

#[pymodule]
fn ipmsig_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
