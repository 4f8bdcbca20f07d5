//! JSON interchange for theories, models, flags, elements, kernels and
//! certificates.
//!
//! Vertices are 1-based in files and 0-based in memory. Rationals are
//! `"p/q"` strings in lowest terms. Output goes through `serde_json::Value`,
//! so object keys come out sorted. Unknown fields are rejected on input.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{AlgebraElement, FlagAlgebra};
use crate::error::{ensure_input, Error, Result};
use crate::flags::{Flag, TypeSigma};
use crate::kernel::StepKernel;
use crate::model::{supports, Model, PredicateSpec, Signature, Theory};
use crate::rational::{self, Rational};
use crate::verify::{CertTerm, Certificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Bits {
    One(bool),
    Many(Vec<bool>),
}

type BitsRecord = BTreeMap<String, Bits>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportRecord {
    support: Vec<usize>,
    bits: BitsRecord,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    n: usize,
    #[serde(default)]
    colors: BTreeMap<String, Vec<SupportRecord>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagRecord {
    n: usize,
    #[serde(default)]
    colors: BTreeMap<String, Vec<SupportRecord>>,
    root_size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TheoryRecord {
    name: String,
    arity_bound: usize,
    predicates: Vec<PredicateSpec>,
    #[serde(default)]
    forbidden: Vec<ModelRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    flag: FlagRecord,
    coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRecord {
    theory: String,
    sigma: ModelRecord,
    level: usize,
    terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TypeRecord {
    name: String,
    weight: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MassRecord {
    color: BitsRecord,
    prob: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRecord {
    theory: String,
    types: Vec<TypeRecord>,
    distributions: BTreeMap<String, BTreeMap<String, Vec<MassRecord>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertTermRecord {
    f: ElementRecord,
    c: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateRecord {
    theory: String,
    target: ElementRecord,
    #[serde(default)]
    terms: Vec<CertTermRecord>,
    #[serde(default)]
    slack: Vec<TermRecord>,
}

fn from_value<T: DeserializeOwned>(what: &str, v: &Value) -> Result<T> {
    T::deserialize(v).map_err(|e| Error::Input(format!("malformed {what}: {e}")))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("records serialize")
}

/// Parse a JSON document from text.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_arity(key: &str, sig: &Signature) -> Result<usize> {
    let arity: usize = key.parse().map_err(|_| Error::input(format!("arity key {key:?} is not a number")))?;
    ensure_input!(
        arity >= 1 && arity <= sig.arity_bound() && sig.color_bits(arity) > 0,
        "no predicates of arity {arity}"
    );
    Ok(arity)
}

fn color_from_bits(sig: &Signature, arity: usize, bits: &BitsRecord) -> Result<u64> {
    let mut color = 0u64;
    for (name, value) in bits {
        let pred = sig.predicate_index(name).ok_or_else(|| Error::input(format!("unknown predicate {name}")))?;
        let spec = &sig.predicates()[pred];
        ensure_input!(spec.arity == arity, "predicate {name} has arity {}, not {arity}", spec.arity);
        let (offset, width) = sig.predicate_slot(pred);
        let values = match (value, spec.symmetric) {
            (Bits::One(b), true) => vec![*b],
            (Bits::Many(v), false) if v.len() == width as usize => v.clone(),
            (_, true) => return Err(Error::input(format!("symmetric predicate {name} takes one boolean"))),
            (_, false) => {
                return Err(Error::input(format!("predicate {name} takes a list of {width} booleans")));
            }
        };
        for (j, b) in values.into_iter().enumerate() {
            if b {
                color |= 1 << (offset + j as u32);
            }
        }
    }
    Ok(color)
}

fn bits_of_color(sig: &Signature, arity: usize, color: u64) -> BitsRecord {
    let mut out = BTreeMap::new();
    for (pred, spec) in sig.predicates().iter().enumerate() {
        if spec.arity != arity {
            continue;
        }
        let (offset, width) = sig.predicate_slot(pred);
        let values: Vec<bool> = (0..width).map(|j| color >> (offset + j) & 1 == 1).collect();
        let bits = if spec.symmetric { Bits::One(values[0]) } else { Bits::Many(values) };
        out.insert(spec.name.clone(), bits);
    }
    out
}

fn model_record(model: &Model) -> ModelRecord {
    let sig = model.signature();
    let mut colors = BTreeMap::new();
    for arity in sig.active_arities() {
        let list: Vec<SupportRecord> = supports(model.n(), arity)
            .filter_map(|s| {
                let c = model.color(&s);
                (c != 0).then(|| SupportRecord {
                    support: s.iter().map(|v| v + 1).collect(),
                    bits: bits_of_color(sig, arity, c),
                })
            })
            .collect();
        if !list.is_empty() {
            colors.insert(arity.to_string(), list);
        }
    }
    ModelRecord { n: model.n(), colors }
}

fn model_from_record(sig: &Arc<Signature>, n: usize, colors: &BTreeMap<String, Vec<SupportRecord>>) -> Result<Model> {
    let mut model = Model::empty(sig.clone(), n);
    for (key, list) in colors {
        let arity = parse_arity(key, sig)?;
        for rec in list {
            ensure_input!(rec.support.len() == arity, "support {:?} does not have arity {arity}", rec.support);
            ensure_input!(
                rec.support.iter().all(|&v| v >= 1 && v <= n),
                "support {:?} names a vertex outside 1..={n}",
                rec.support
            );
            let zero_based: Vec<usize> = rec.support.iter().map(|v| v - 1).collect();
            ensure_input!(
                zero_based.windows(2).all(|w| w[0] < w[1]),
                "support {:?} must be strictly increasing",
                rec.support
            );
            model.set_color(&zero_based, color_from_bits(sig, arity, &rec.bits)?)?;
        }
    }
    Ok(model)
}

pub fn model_to_json(model: &Model) -> Value {
    to_value(&model_record(model))
}

pub fn model_from_json(sig: &Arc<Signature>, v: &Value) -> Result<Model> {
    let rec: ModelRecord = from_value("model", v)?;
    model_from_record(sig, rec.n, &rec.colors)
}

fn flag_record(flag: &Flag) -> FlagRecord {
    let m = model_record(flag.model());
    FlagRecord { n: m.n, colors: m.colors, root_size: flag.root_size() }
}

fn flag_from_record(theory: &Theory, rec: &FlagRecord) -> Result<Flag> {
    let model = model_from_record(theory.signature(), rec.n, &rec.colors)?;
    Flag::new(theory, model, rec.root_size)
}

pub fn flag_to_json(flag: &Flag) -> Value {
    to_value(&flag_record(flag))
}

pub fn flag_from_json(theory: &Theory, v: &Value) -> Result<Flag> {
    flag_from_record(theory, &from_value("flag", v)?)
}

pub fn theory_to_json(theory: &Theory) -> Value {
    let sig = theory.signature();
    to_value(&TheoryRecord {
        name: theory.name().to_string(),
        arity_bound: sig.arity_bound(),
        predicates: sig.predicates().to_vec(),
        forbidden: theory.forbidden().iter().map(model_record).collect(),
    })
}

pub fn theory_from_json(v: &Value) -> Result<Theory> {
    let rec: TheoryRecord = from_value("theory", v)?;
    let sig = Arc::new(Signature::new(rec.arity_bound, rec.predicates)?);
    let forbidden =
        rec.forbidden.iter().map(|m| model_from_record(&sig, m.n, &m.colors)).collect::<Result<Vec<_>>>()?;
    Theory::new(&rec.name, sig, forbidden)
}

fn check_theory_name(theory: &Theory, name: &str) -> Result<()> {
    ensure_input!(name == theory.name(), "file is for theory {name:?}, expected {:?}", theory.name());
    Ok(())
}

fn element_record(theory: &Theory, a: &AlgebraElement) -> ElementRecord {
    ElementRecord {
        theory: theory.name().to_string(),
        sigma: model_record(a.sigma().model()),
        level: a.level(),
        terms: a.terms().map(|(f, c)| TermRecord { flag: flag_record(f), coeff: rational::format(c) }).collect(),
    }
}

fn element_from_record(alg: &FlagAlgebra, rec: &ElementRecord) -> Result<AlgebraElement> {
    let theory = alg.theory();
    check_theory_name(theory, &rec.theory)?;
    let sigma = TypeSigma::new(theory, model_from_record(theory.signature(), rec.sigma.n, &rec.sigma.colors)?)?;
    let mut terms = Vec::with_capacity(rec.terms.len());
    for t in &rec.terms {
        let flag = flag_from_record(theory, &t.flag)?;
        ensure_input!(flag.size() == rec.level, "term on {} vertices in a level-{} element", flag.size(), rec.level);
        ensure_input!(flag.sigma() == sigma, "term flag is not over the element's type");
        terms.push((rational::parse(&t.coeff)?, flag));
    }
    alg.from_terms(&sigma, rec.level, terms.iter().map(|(c, f)| (c.clone(), f)))
}

pub fn element_to_json(theory: &Theory, a: &AlgebraElement) -> Value {
    to_value(&element_record(theory, a))
}

pub fn element_from_json(alg: &FlagAlgebra, v: &Value) -> Result<AlgebraElement> {
    element_from_record(alg, &from_value("element", v)?)
}

fn tuple_key(kernel: &StepKernel, tuple: &[usize]) -> String {
    let names: Vec<&str> = tuple.iter().map(|&t| kernel.type_names()[t].as_str()).collect();
    format!("({})", names.join(","))
}

pub fn kernel_to_json(kernel: &StepKernel) -> Value {
    let theory = kernel.theory();
    let sig = theory.signature();
    let q = kernel.type_count();
    let mut distributions = BTreeMap::new();
    for arity in sig.active_arities() {
        let mut per = BTreeMap::new();
        for idx in 0..q.pow(arity as u32) {
            let tuple = crate::kernel::tuple_of(idx, arity, q);
            let masses = kernel
                .distribution(&tuple)
                .iter()
                .map(|(c, m)| MassRecord { color: bits_of_color(sig, arity, *c), prob: rational::format(m) })
                .collect();
            per.insert(tuple_key(kernel, &tuple), masses);
        }
        distributions.insert(arity.to_string(), per);
    }
    to_value(&KernelRecord {
        theory: theory.name().to_string(),
        types: kernel
            .type_names()
            .iter()
            .zip(kernel.weights())
            .map(|(name, w)| TypeRecord { name: name.clone(), weight: rational::format(w) })
            .collect(),
        distributions,
    })
}

/// Theory name a kernel file refers to.
pub fn kernel_theory_name(v: &Value) -> Result<String> {
    let rec: KernelRecord = from_value("kernel", v)?;
    Ok(rec.theory)
}

pub fn kernel_from_json(theory: &Arc<Theory>, v: &Value) -> Result<StepKernel> {
    let rec: KernelRecord = from_value("kernel", v)?;
    check_theory_name(theory, &rec.theory)?;
    let sig = theory.signature();
    let names: Vec<String> = rec.types.iter().map(|t| t.name.clone()).collect();
    let weights = rec.types.iter().map(|t| rational::parse(&t.weight)).collect::<Result<Vec<_>>>()?;
    let mut dists = BTreeMap::new();
    for (key, per) in &rec.distributions {
        let arity = parse_arity(key, sig)?;
        let mut table = BTreeMap::new();
        for (tuple_text, masses) in per {
            let inner = tuple_text
                .trim()
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::input(format!("type tuple {tuple_text:?} must look like (a,b)")))?;
            let tuple = inner
                .split(',')
                .map(|name| {
                    names
                        .iter()
                        .position(|n| n == name.trim())
                        .ok_or_else(|| Error::input(format!("unknown type {:?} in {tuple_text:?}", name.trim())))
                })
                .collect::<Result<Vec<_>>>()?;
            let dist = masses
                .iter()
                .map(|m| Ok((color_from_bits(sig, arity, &m.color)?, rational::parse(&m.prob)?)))
                .collect::<Result<Vec<(u64, Rational)>>>()?;
            ensure_input!(table.insert(tuple, dist).is_none(), "type tuple {tuple_text:?} listed twice");
        }
        dists.insert(arity, table);
    }
    StepKernel::new(theory.clone(), names, weights, dists)
}

pub fn certificate_to_json(theory: &Theory, cert: &Certificate) -> Value {
    to_value(&CertificateRecord {
        theory: theory.name().to_string(),
        target: element_record(theory, &cert.target),
        terms: cert
            .terms
            .iter()
            .map(|t| CertTermRecord { f: element_record(theory, &t.f), c: rational::format(&t.c) })
            .collect(),
        slack: cert
            .slack
            .iter()
            .map(|(f, c)| TermRecord { flag: flag_record(f), coeff: rational::format(c) })
            .collect(),
    })
}

pub fn certificate_from_json(alg: &FlagAlgebra, v: &Value) -> Result<Certificate> {
    let rec: CertificateRecord = from_value("certificate", v)?;
    check_theory_name(alg.theory(), &rec.theory)?;
    let target = element_from_record(alg, &rec.target)?;
    let terms = rec
        .terms
        .iter()
        .map(|t| Ok(CertTerm { f: element_from_record(alg, &t.f)?, c: rational::parse(&t.c)? }))
        .collect::<Result<Vec<_>>>()?;
    let slack = rec
        .slack
        .iter()
        .map(|t| Ok((flag_from_record(alg.theory(), &t.flag)?, rational::parse(&t.coeff)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate { target, terms, slack })
}

/// Short human-readable form of a flag, e.g. `3v root=1 E{1-2,1-3}`.
pub fn describe_flag(flag: &Flag) -> String {
    let model = flag.model();
    let sig = model.signature();
    let mut parts = vec![format!("{}v", model.n())];
    if flag.root_size() > 0 {
        parts.push(format!("root={}", flag.root_size()));
    }
    for arity in sig.active_arities() {
        let colored: Vec<String> = supports(model.n(), arity)
            .filter_map(|s| {
                let c = model.color(&s);
                (c != 0).then(|| {
                    let vs: Vec<String> = s.iter().map(|v| (v + 1).to_string()).collect();
                    if sig.color_bits(arity) == 1 {
                        vs.join("-")
                    } else {
                        format!("{}:{c:b}", vs.join("-"))
                    }
                })
            })
            .collect();
        if !colored.is_empty() {
            parts.push(format!("a{arity}{{{}}}", colored.join(",")));
        }
    }
    parts.join(" ")
}
