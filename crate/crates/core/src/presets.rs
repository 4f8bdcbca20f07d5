//! Ready-made theories, types, flags and kernels.

use std::sync::Arc;

use crate::flags::{Flag, TypeSigma};
use crate::kernel::StepKernel;
use crate::model::{Model, PredicateSpec, Signature, Theory};
use crate::rational::{int, ratio};

fn graph_signature() -> Arc<Signature> {
    Arc::new(Signature::new(2, vec![PredicateSpec::symmetric("E", 2)]).expect("valid signature"))
}

/// Simple graphs.
pub fn graphs() -> Arc<Theory> {
    Arc::new(Theory::new("graphs", graph_signature(), Vec::new()).expect("valid theory"))
}

/// Graphs without triangles.
pub fn triangle_free() -> Arc<Theory> {
    let sig = graph_signature();
    let k3 = Model::graph(&sig, 3, &[(0, 1), (0, 2), (1, 2)]).expect("valid model");
    Arc::new(Theory::new("triangle-free", sig, vec![k3]).expect("valid theory"))
}

/// Loopless directed graphs; both orientations of a pair may be present.
pub fn digraphs() -> Arc<Theory> {
    let sig = Signature::new(2, vec![PredicateSpec::directed("A", 2)]).expect("valid signature");
    Arc::new(Theory::new("digraphs", Arc::new(sig), Vec::new()).expect("valid theory"))
}

/// 3-uniform hypergraphs.
pub fn hypergraphs3() -> Arc<Theory> {
    let sig = Signature::new(3, vec![PredicateSpec::symmetric("E", 3)]).expect("valid signature");
    Arc::new(Theory::new("3-graphs", Arc::new(sig), Vec::new()).expect("valid theory"))
}

fn graph(theory: &Theory, n: usize, edges: &[(usize, usize)]) -> Model {
    Model::graph(theory.signature(), n, edges).expect("graph signature")
}

fn flag(theory: &Theory, n: usize, edges: &[(usize, usize)], root: usize) -> Flag {
    Flag::new(theory, graph(theory, n, edges), root).expect("valid flag")
}

/// The one-vertex type.
pub fn vertex_type(theory: &Theory) -> TypeSigma {
    TypeSigma::new(theory, theory.empty_model(1)).expect("valid type")
}

/// Two adjacent labeled vertices.
pub fn edge_type(theory: &Theory) -> TypeSigma {
    TypeSigma::new(theory, graph(theory, 2, &[(0, 1)])).expect("valid type")
}

pub fn edge(theory: &Theory) -> Flag {
    flag(theory, 2, &[(0, 1)], 0)
}

pub fn non_edge(theory: &Theory) -> Flag {
    flag(theory, 2, &[], 0)
}

pub fn empty3(theory: &Theory) -> Flag {
    flag(theory, 3, &[], 0)
}

pub fn one_edge3(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1)], 0)
}

/// Path on three vertices.
pub fn p3(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (1, 2)], 0)
}

pub fn k3(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (0, 2), (1, 2)], 0)
}

pub fn k4(theory: &Theory) -> Flag {
    flag(theory, 4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 0)
}

pub fn c4(theory: &Theory) -> Flag {
    flag(theory, 4, &[(0, 1), (1, 2), (2, 3), (3, 0)], 0)
}

/// Edge with one end labeled.
pub fn rooted_edge(theory: &Theory) -> Flag {
    flag(theory, 2, &[(0, 1)], 1)
}

/// Non-edge with one vertex labeled.
pub fn rooted_non_edge(theory: &Theory) -> Flag {
    flag(theory, 2, &[], 1)
}

/// Path on three vertices labeled at its middle vertex.
pub fn cherry_at_center(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (0, 2)], 1)
}

/// Path on three vertices labeled at an end.
pub fn cherry_at_end(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (1, 2)], 1)
}

pub fn rooted_k3(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (0, 2), (1, 2)], 1)
}

/// Over the edge type: a third vertex adjacent to the first root only.
pub fn edge_type_flag_with_pendant(theory: &Theory) -> Flag {
    flag(theory, 3, &[(0, 1), (0, 2)], 2)
}

/// Edge probability 1/2.
pub fn kernel_half(theory: &Arc<Theory>) -> StepKernel {
    StepKernel::graphon(theory.clone(), vec![int(1)], vec![vec![ratio(1, 2)]]).expect("graph theory")
}

/// Edge probability 3/4.
pub fn kernel_three_quarters(theory: &Arc<Theory>) -> StepKernel {
    StepKernel::graphon(theory.clone(), vec![int(1)], vec![vec![ratio(3, 4)]]).expect("graph theory")
}

/// Two equally likely types, edges exactly across types.
pub fn kernel_two_type(theory: &Arc<Theory>) -> StepKernel {
    bipartite(theory, ratio(1, 2), ratio(1, 2))
}

/// Like [`kernel_two_type`] with type weights 1/3 and 2/3.
pub fn kernel_two_type_skewed(theory: &Arc<Theory>) -> StepKernel {
    bipartite(theory, ratio(1, 3), ratio(2, 3))
}

fn bipartite(theory: &Arc<Theory>, a: crate::rational::Rational, b: crate::rational::Rational) -> StepKernel {
    StepKernel::graphon(theory.clone(), vec![a, b], vec![vec![int(0), int(1)], vec![int(1), int(0)]])
        .expect("graph theory")
}
