use std::fs;
use std::path::Path;
use std::sync::Arc;

use flagcalc::algebra::{AlgebraElement, FlagAlgebra};
use flagcalc::flags::{Flag, TypeSigma};
use flagcalc::io;
use flagcalc::kernel::{RootedKernel, StepKernel};
use flagcalc::model::{Model, Theory};
use flagcalc::{presets, Error, Result};
use serde_json::Value;

pub fn builtin(name: &str) -> Option<Arc<Theory>> {
    match name {
        "graphs" => Some(presets::graphs()),
        "digraphs" => Some(presets::digraphs()),
        "triangle-free" => Some(presets::triangle_free()),
        "3-graphs" => Some(presets::hypergraphs3()),
        _ => None,
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: invalid JSON: {e}", path.display())))
}

/// A theory from a built-in name or a file.
pub fn theory(arg: &str) -> Result<Arc<Theory>> {
    if let Some(t) = builtin(arg) {
        return Ok(t);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::Input(format!("{arg:?} is neither a built-in theory nor a file")));
    }
    Ok(Arc::new(io::theory_from_json(&read_json(path)?)?))
}

/// The theory for a command: `--theory` if given, else the name recorded
/// in an input file, else graphs.
pub fn resolve(arg: Option<&str>, recorded: Option<&str>) -> Result<Arc<Theory>> {
    match (arg, recorded) {
        (Some(a), _) => theory(a),
        (None, Some(name)) => builtin(name).ok_or_else(|| {
            Error::Input(format!("theory {name:?} is not built in; pass it with --theory"))
        }),
        (None, None) => Ok(presets::graphs()),
    }
}

pub fn recorded_theory(v: &Value) -> Option<String> {
    v.get("theory").and_then(Value::as_str).map(str::to_string)
}

pub fn model(theory: &Theory, path: &Path) -> Result<Model> {
    let m = io::model_from_json(theory.signature(), &read_json(path)?)?;
    Ok(m)
}

pub fn sigma(theory: &Theory, path: Option<&Path>) -> Result<TypeSigma> {
    match path {
        Some(p) => TypeSigma::new(theory, model(theory, p)?),
        None => Ok(TypeSigma::empty(theory)),
    }
}

pub fn flag(theory: &Theory, path: &Path) -> Result<Flag> {
    io::flag_from_json(theory, &read_json(path)?)
}

pub fn element(alg: &FlagAlgebra, path: &Path) -> Result<AlgebraElement> {
    io::element_from_json(alg, &read_json(path)?)
}

/// Kernel and its theory; the theory comes from `--theory` or the name in
/// the kernel file.
pub fn kernel(theory_arg: Option<&str>, path: &Path) -> Result<(Arc<Theory>, Arc<StepKernel>)> {
    let v = read_json(path)?;
    let theory = resolve(theory_arg, recorded_theory(&v).as_deref())?;
    let kernel = io::kernel_from_json(&theory, &v)?;
    Ok((theory, Arc::new(kernel)))
}

/// Root a kernel at `sigma` with the named root types (unrooted for the
/// empty type).
pub fn rooted(kernel: &Arc<StepKernel>, sigma: &TypeSigma, names: &[String]) -> Result<RootedKernel> {
    if sigma.size() == 0 {
        if !names.is_empty() {
            return Err(Error::Input("root types given for an unrooted evaluation".into()));
        }
        return Ok(RootedKernel::unrooted(kernel.clone()));
    }
    let types = names
        .iter()
        .map(|n| {
            kernel
                .type_names()
                .iter()
                .position(|t| t == n)
                .ok_or_else(|| Error::Input(format!("unknown type {n:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    RootedKernel::new(kernel.clone(), types, sigma.clone())
}
