use serde::{Deserialize, Serialize};

use crate::basis::Truncation;
use crate::field::{Rational, StateVector};
use crate::operators::{b1_polar_unchecked, frak_b2_unchecked, polar_b_unchecked, q1_unchecked, transport_unchecked};
use num_traits::Zero;

/// How a direction was obtained from earlier ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Generator of the seed space (index into its generator list).
    Seed { index: usize },
    /// `(0, 𝔟₂(π₂a, π₂b))`.
    FrakB2 { a: usize, b: usize },
    /// `(Q₁(0, π₂θ), 0)`.
    Q1Image { theta: usize },
    /// `(b₁(π₁ζ, π₁ψ), 0)` with `B₁(π₁ψ) = 0`.
    CrossB1 { zeta: usize, psi: usize },
    /// `(B₁(π₁ζ), 0)`, admitted because `±B₁` lie on opposite rays modulo the span.
    ConeB1 { zeta: usize, partner: usize },
    /// `b(ξ₁, ξ₂)` of the linearized recursion.
    PolarB { xi1: usize, xi2: usize },
    /// `Σ cᵢ nodeᵢ`, coefficients as rational strings.
    LinearCombo { coeffs: Vec<String>, nodes: Vec<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivationNode {
    pub id: usize,
    pub kind: NodeKind,
    /// Step at which the node was created (seeds: 0).
    pub level: usize,
    pub value: StateVector<Rational>,
    /// Mode cap applied to the evaluated value, if any.
    pub cap: Option<Truncation>,
}

/// Acyclic record of constructions; children always precede parents.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DerivationTree {
    pub nodes: Vec<DerivationNode>,
}

impl DerivationTree {
    pub fn new() -> Self {
        DerivationTree { nodes: Vec::new() }
    }

    pub fn push(&mut self, kind: NodeKind, level: usize, value: StateVector<Rational>) -> usize {
        self.push_capped(kind, level, value, None)
    }

    pub fn push_capped(
        &mut self,
        kind: NodeKind,
        level: usize,
        value: StateVector<Rational>,
        cap: Option<Truncation>,
    ) -> usize {
        let id = self.nodes.len();
        self.nodes.push(DerivationNode { id, kind, level, value, cap });
        id
    }

    pub fn value(&self, id: usize) -> &StateVector<Rational> {
        &self.nodes[id].value
    }

    /// Applies the node's operator to its children's stored values (seeds
    /// evaluate to zero); no cap is applied.
    pub fn evaluate(&self, kind: &NodeKind) -> StateVector<Rational> {
        let val = |i: usize| &self.nodes[i].value;
        match kind {
            NodeKind::Seed { .. } => StateVector::zero(),
            NodeKind::FrakB2 { a, b } => StateVector::from_theta(frak_b2_unchecked(&val(*a).theta, &val(*b).theta)),
            NodeKind::Q1Image { theta } => {
                StateVector::from_v(q1_unchecked(&StateVector::from_theta(val(*theta).theta.clone()), &Rational::zero()))
            }
            NodeKind::CrossB1 { zeta, psi } => StateVector::from_v(b1_polar_unchecked(&val(*zeta).v, &val(*psi).v)),
            NodeKind::ConeB1 { zeta, .. } => {
                let z = StateVector::from_v(val(*zeta).v.clone());
                StateVector::from_v(transport_unchecked(&z, &z).v)
            }
            NodeKind::PolarB { xi1, xi2 } => polar_b_unchecked(val(*xi1), val(*xi2)),
            NodeKind::LinearCombo { coeffs, nodes } => {
                let mut acc = StateVector::zero();
                for (c, n) in coeffs.iter().zip(nodes) {
                    let c: Rational = crate::field::Coeff::parse_repr(c).expect("stored coefficient");
                    acc.axpy(&c, val(*n));
                }
                acc
            }
        }
    }

    /// Checks acyclicity and recomputes every node from its children.
    /// Returns the id of the first inconsistent node.
    pub fn verify(&self) -> std::result::Result<(), usize> {
        for node in &self.nodes {
            let children: Vec<usize> = match &node.kind {
                NodeKind::Seed { .. } => vec![],
                NodeKind::FrakB2 { a, b } => vec![*a, *b],
                NodeKind::Q1Image { theta } => vec![*theta],
                NodeKind::CrossB1 { zeta, psi } => vec![*zeta, *psi],
                NodeKind::ConeB1 { zeta, partner } => vec![*zeta, *partner],
                NodeKind::PolarB { xi1, xi2 } => vec![*xi1, *xi2],
                NodeKind::LinearCombo { nodes, .. } => nodes.clone(),
            };
            if children.iter().any(|&c| c >= node.id) {
                return Err(node.id);
            }
            if matches!(node.kind, NodeKind::Seed { .. }) {
                continue;
            }
            let mut v = self.evaluate(&node.kind);
            if let Some(t) = node.cap {
                v = v.truncate(t.m, t.p);
            }
            if v != node.value {
                return Err(node.id);
            }
        }
        Ok(())
    }

    /// Ids of the seeds reachable from `id`.
    pub fn leaves(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        let mut seen = std::collections::BTreeSet::new();
        while let Some(n) = stack.pop() {
            if !seen.insert(n) {
                continue;
            }
            match &self.nodes[n].kind {
                NodeKind::Seed { .. } => out.push(n),
                NodeKind::FrakB2 { a, b } => stack.extend([*a, *b]),
                NodeKind::Q1Image { theta } => stack.push(*theta),
                NodeKind::CrossB1 { zeta, psi } => stack.extend([*zeta, *psi]),
                NodeKind::ConeB1 { zeta, partner } => stack.extend([*zeta, *partner]),
                NodeKind::PolarB { xi1, xi2 } => stack.extend([*xi1, *xi2]),
                NodeKind::LinearCombo { nodes, .. } => stack.extend(nodes.iter().copied()),
            }
        }
        out.sort();
        out
    }
}
