use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::flags::{Estimate, Flag};
use crate::io;
use crate::kernel::{RootedKernel, StepKernel};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    Exact(Rational),
    Statistical(Estimate),
    Count(u64),
}

impl Residual {
    fn to_json(&self) -> Value {
        match self {
            Residual::Exact(r) => Value::String(rational::format(r)),
            Residual::Statistical(e) => json!({"mean": e.mean, "stderr": e.stderr, "trials": e.trials}),
            Residual::Count(c) => json!(c),
        }
    }
}

/// Concrete witness attached to every failing report.
#[derive(Debug, Clone)]
pub enum Counterexample {
    /// A kernel (possibly conditioned on root types) with the offending
    /// value.
    Kernel { index: Option<usize>, kernel: RootedKernel, value: Rational },
    /// A flag whose coefficient breaks the check.
    Coefficient { flag: Flag, coefficient: Rational },
    /// A sample size whose estimate breaks the bound.
    Sample { n: usize, estimate: Estimate, bound: f64 },
}

fn rooted_kernel_json(k: &RootedKernel) -> Value {
    json!({
        "kernel": io::kernel_to_json(k.base()),
        "root_types": k.root_type_names(),
        "sigma": io::model_to_json(k.sigma().model()),
    })
}

impl Counterexample {
    pub fn kernel(index: Option<usize>, kernel: &Arc<StepKernel>, value: Rational) -> Self {
        Counterexample::Kernel { index, kernel: RootedKernel::unrooted(kernel.clone()), value }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Counterexample::Kernel { index, kernel, value } => json!({
                "kind": "kernel",
                "panel_index": index,
                "kernel": rooted_kernel_json(kernel),
                "value": rational::format(value),
            }),
            Counterexample::Coefficient { flag, coefficient } => json!({
                "kind": "coefficient",
                "flag": io::flag_to_json(flag),
                "description": io::describe_flag(flag),
                "coefficient": rational::format(coefficient),
            }),
            Counterexample::Sample { n, estimate, bound } => json!({
                "kind": "sample",
                "n": n,
                "estimate": {"mean": estimate.mean, "stderr": estimate.stderr, "trials": estimate.trials},
                "bound": bound,
            }),
        }
    }
}

/// Outcome of one check. Residuals are keyed by label so the rendered
/// report is deterministic.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub residuals: BTreeMap<String, Residual>,
    pub seed: Option<u64>,
    pub inputs: Value,
    pub counterexample: Option<Counterexample>,
}

impl CheckReport {
    pub(crate) fn new(check: &str, seed: Option<u64>, inputs: Value) -> Self {
        CheckReport {
            check: check.to_string(),
            verdict: Verdict::Pass,
            residuals: BTreeMap::new(),
            seed,
            inputs,
            counterexample: None,
        }
    }

    pub(crate) fn residual(&mut self, label: impl Into<String>, value: Residual) {
        self.residuals.insert(label.into(), value);
    }

    /// Mark as failed with a witness; the first witness is kept.
    pub(crate) fn fail(&mut self, witness: Counterexample) {
        self.verdict = Verdict::Fail;
        if self.counterexample.is_none() {
            self.counterexample = Some(witness);
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.check,
            "verdict": self.verdict.to_string(),
            "residuals": self.residuals.iter().map(|(k, v)| (k.clone(), v.to_json())).collect::<serde_json::Map<_, _>>(),
            "seed": self.seed,
            "inputs": self.inputs,
            "counterexample": self.counterexample.as_ref().map(Counterexample::to_json),
        })
    }
}
