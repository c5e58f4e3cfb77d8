//! Saturation chains of control directions.
//!
//! `chain` iterates `ℋ(j) = 𝓕₁(ℋ(j−1)) × 𝓕₂(ℋ₂(j−1))` and `lin_chain` the
//! linearized recursion `𝒢(j)`. Spans are kept exactly (rational sparse
//! row echelon) in the full mode space; ranks are reported for the
//! projection onto a truncated basis.

mod derivation;
mod echelon;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use derivation::{DerivationNode, DerivationTree, NodeKind};
pub use echelon::{float_rank, Echelon, SparseVec};

use crate::basis::{coords, Coord, Truncation};
use crate::error::{PeError, Result};
use crate::field::{Coeff, Rational, StateVector};
use crate::operators::{b1, frak_b2_unchecked};
use crate::seeds::ControlSpace;

/// Moves used to extend the velocity part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Only constructions that provably stay in `𝓕₁`: `Q₁(0,θ)` images,
    /// `b₁(ζ, ψ)` with `B₁(ψ) = 0`, and `B₁(ζ)` lines lying in the cone.
    Provable,
    /// Adds every `B₁(ζ)` and `b₁(ζ, ζ′)`; an over-approximation.
    Span,
}

/// Which pairs enter the brackets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    /// Brackets of new directions against the seed directions (and the
    /// transport-free images of seeds); a sub-span of the full recursion.
    Seeded,
    /// Brackets of new directions against every current generator.
    AllPairs,
}

/// Mode cap applied to intermediate fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapPolicy {
    None,
    Fixed(Truncation),
    /// `trunc + 2·(h − j)` at step `j ≤ h`: modes dropped at step `j`
    /// cannot reach the truncation through seed brackets by step `h`.
    /// Ranks reported after step `h` are not certified.
    Horizon(usize),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChainOptions {
    pub mode: Mode,
    pub scope: Scope,
    pub cap: CapPolicy,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { mode: Mode::Provable, scope: Scope::Seeded, cap: CapPolicy::Horizon(6) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepDims {
    pub j: usize,
    pub dim_theta: usize,
    pub dim_v: usize,
    pub dim_total: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub steps: Vec<StepDims>,
    pub reached_full: bool,
    pub stop_j: usize,
    pub witness_count: usize,
    pub trunc: Truncation,
    pub full_dim: usize,
    #[serde(skip)]
    pub space: Option<Subspace>,
}

impl ChainReport {
    pub fn last(&self) -> StepDims {
        *self.steps.last().expect("at least the initial step is recorded")
    }
}

/// Finite-dimensional span with its generators' derivations.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: Vec<StateVector<Rational>>,
    /// Derivation node of each basis vector.
    pub nodes: Vec<usize>,
    pub trunc: Truncation,
    pub tree: DerivationTree,
    echelon: Echelon,
}

pub(crate) fn sparse(u: &StateVector<Rational>) -> SparseVec {
    coords(u).into_iter().collect()
}

fn project(sv: &SparseVec, trunc: &Truncation, keep: impl Fn(&Coord) -> bool) -> SparseVec {
    sv.iter().filter(|(c, _)| trunc.contains(c) && keep(c)).map(|(c, x)| (*c, x.clone())).collect()
}

impl Subspace {
    pub fn empty(trunc: Truncation) -> Self {
        Subspace { basis: vec![], nodes: vec![], trunc, tree: DerivationTree::new(), echelon: Echelon::new() }
    }

    /// Span of a control space; every generator becomes a seed node.
    pub fn from_control(h: &ControlSpace, trunc: Truncation) -> Self {
        let mut s = Subspace::empty(trunc);
        for (i, g) in h.generators.iter().enumerate() {
            let id = s.tree.push(NodeKind::Seed { index: i }, 0, g.clone());
            s.try_insert(id);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Exact membership in the span.
    pub fn contains(&self, u: &StateVector<Rational>) -> bool {
        self.echelon.contains(sparse(u))
    }

    fn try_insert(&mut self, id: usize) -> bool {
        let value = self.tree.value(id).clone();
        if value.is_zero() {
            return false;
        }
        if self.echelon.insert(sparse(&value)) {
            self.basis.push(value);
            self.nodes.push(id);
            true
        } else {
            false
        }
    }

    /// Rank of the projection onto the truncated basis, exactly.
    pub fn projected_rank(&self) -> usize {
        let mut e = Echelon::new();
        for b in &self.basis {
            e.insert(project(&sparse(b), &self.trunc, |_| true));
        }
        e.rank()
    }

    /// Rank of the projection onto the truncated basis by floating-point
    /// elimination in orthonormal coordinates.
    pub fn projected_rank_float(&self, tol: f64) -> usize {
        let basis = self.trunc.basis();
        let index: HashMap<Coord, usize> = basis.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let rows: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| {
                let mut row = vec![0.0; basis.len()];
                for (c, x) in coords(b) {
                    if let Some(&i) = index.get(&c) {
                        row[i] = x.to_f64() * c.norm();
                    }
                }
                row
            })
            .collect();
        float_rank(&rows, tol)
    }

    /// θ-parts of the basis vectors.
    pub fn theta_part(&self) -> Subspace {
        let mut s = Subspace { tree: self.tree.clone(), ..Subspace::empty(self.trunc) };
        for (b, id) in self.basis.iter().zip(&self.nodes) {
            if !b.theta.is_zero() && s.echelon.insert(sparse(&StateVector::from_theta(b.theta.clone()))) {
                s.basis.push(StateVector::from_theta(b.theta.clone()));
                s.nodes.push(*id);
            }
        }
        s
    }
}

struct Engine {
    trunc: Truncation,
    cap: CapPolicy,
    tree: DerivationTree,
    gens: Vec<usize>,
    full: Echelon,
    tr_all: Echelon,
    tr_v: Echelon,
    tr_theta: Echelon,
}

impl Engine {
    fn new(trunc: Truncation, cap: CapPolicy) -> Self {
        Engine {
            trunc,
            cap,
            tree: DerivationTree::new(),
            gens: vec![],
            full: Echelon::new(),
            tr_all: Echelon::new(),
            tr_v: Echelon::new(),
            tr_theta: Echelon::new(),
        }
    }

    fn cap_at(&self, level: usize) -> Option<Truncation> {
        match self.cap {
            CapPolicy::None => None,
            CapPolicy::Fixed(t) => Some(t),
            CapPolicy::Horizon(h) => {
                let extra = 2 * (h.saturating_sub(level)) as u32;
                Some(Truncation::new(self.trunc.m + extra, self.trunc.p + extra))
            }
        }
    }


    fn add_seed(&mut self, index: usize, value: &StateVector<Rational>) -> usize {
        let id = self.tree.push(NodeKind::Seed { index }, 0, value.clone());
        self.accept(id);
        id
    }

    /// Adds the node value as a generator if it is independent.
    fn accept(&mut self, id: usize) -> bool {
        let value = self.tree.value(id);
        if value.is_zero() {
            return false;
        }
        let sv = sparse(value);
        let r = self.full.reduce(sv.clone());
        if r.is_empty() {
            return false;
        }
        self.full.insert_reduced(r);
        self.gens.push(id);
        self.tr_all.insert(project(&sv, &self.trunc, |_| true));
        self.tr_v.insert(project(&sv, &self.trunc, |c| !c.is_theta()));
        self.tr_theta.insert(project(&sv, &self.trunc, |c| c.is_theta()));
        true
    }

    /// Evaluates a construction and keeps it if independent.
    fn offer(&mut self, kind: NodeKind, level: usize) -> Option<usize> {
        let cap = self.cap_at(level);
        let mut value = self.tree.evaluate(&kind);
        if let Some(t) = cap {
            value = value.truncate(t.m, t.p);
        }
        if value.is_zero() || self.full.contains(sparse(&value)) {
            return None;
        }
        let id = self.tree.push_capped(kind, level, value, cap);
        self.accept(id);
        Some(id)
    }

    fn dims(&self, j: usize) -> StepDims {
        StepDims { j, dim_theta: self.tr_theta.rank(), dim_v: self.tr_v.rank(), dim_total: self.tr_all.rank() }
    }

    fn is_full(&self) -> bool {
        self.tr_all.rank() == self.trunc.dim()
    }

    fn into_report(self, steps: Vec<StepDims>, stop_j: usize) -> ChainReport {
        let reached_full = self.is_full();
        let full_dim = self.trunc.dim();
        let basis: Vec<StateVector<Rational>> = self.gens.iter().map(|&g| self.tree.value(g).clone()).collect();
        let witness_count = self.gens.len();
        let tree = self.tree;
        let space = Subspace { basis, nodes: self.gens, trunc: self.trunc, tree, echelon: self.full };
        ChainReport { steps, reached_full, stop_j, witness_count, trunc: self.trunc, full_dim, space: Some(space) }
    }
}

fn b1_vanishes(v: &StateVector<Rational>) -> bool {
    !v.v.is_zero() && b1(&v.v).map(|b| b.is_zero()).unwrap_or(false)
}

/// Iterates the nonlinear saturation recursion from the seed space.
pub fn chain(h: &ControlSpace, max_j: usize, trunc: Truncation, opts: ChainOptions) -> ChainReport {
    let mut e = Engine::new(trunc, opts.cap);
    let mut seed_theta = vec![];
    let mut seed_ids = vec![];
    let mut theta_gens = vec![];
    let mut v_gens = vec![];
    for (i, g) in h.generators.iter().enumerate() {
        let id = e.add_seed(i, g);
        seed_ids.push(id);
        if !g.theta.is_zero() {
            seed_theta.push(id);
            theta_gens.push(id);
        }
        if !g.v.is_zero() {
            v_gens.push(id);
        }
    }
    let mut psi: Vec<usize> = v_gens.iter().copied().filter(|&id| b1_vanishes(e.tree.value(id))).collect();
    let mut fr_theta = theta_gens.clone();
    let mut fr_v = v_gens.clone();
    let mut cone: HashMap<Vec<(Coord, Rational)>, (bool, usize)> = HashMap::new();
    let use_cone = opts.mode == Mode::Provable && matches!(opts.cap, CapPolicy::None);
    let mut steps = vec![e.dims(0)];
    let mut stop_j = 0;
    if e.is_full() {
        return e.into_report(steps, 0);
    }
    for j in 1..=max_j {
        stop_j = j;
        let old_theta = theta_gens.clone();
        let old_v = v_gens.clone();
        let old_psi = psi.clone();
        let mut new_ids = vec![];

        for &a in &fr_theta {
            let partners: &[usize] = match opts.scope {
                Scope::Seeded => &seed_theta,
                Scope::AllPairs => &old_theta,
            };
            for &b in partners {
                if a == b || (opts.scope == Scope::AllPairs && fr_theta.contains(&b) && b < a) {
                    continue;
                }
                new_ids.extend(e.offer(NodeKind::FrakB2 { a, b }, j));
            }
        }
        for &t in &fr_theta {
            new_ids.extend(e.offer(NodeKind::Q1Image { theta: t }, j));
        }
        for &z in &fr_v {
            for &p in &old_psi {
                if z != p {
                    new_ids.extend(e.offer(NodeKind::CrossB1 { zeta: z, psi: p }, j));
                }
            }
        }
        for &p in old_psi.iter().filter(|p| fr_v.contains(p)) {
            for &z in old_v.iter().filter(|z| !fr_v.contains(z)) {
                new_ids.extend(e.offer(NodeKind::CrossB1 { zeta: z, psi: p }, j));
            }
        }
        match opts.mode {
            Mode::Span => {
                for &z in &fr_v {
                    new_ids.extend(e.offer(NodeKind::ConeB1 { zeta: z, partner: z }, j));
                    for &z2 in &old_v {
                        if z2 != z && !(fr_v.contains(&z2) && z2 < z) {
                            new_ids.extend(e.offer(NodeKind::CrossB1 { zeta: z, psi: z2 }, j));
                        }
                    }
                }
            }
            Mode::Provable if use_cone => {
                for &z in &fr_v {
                    let val = e.tree.evaluate(&NodeKind::ConeB1 { zeta: z, partner: z });
                    let r = e.full.reduce(sparse(&val));
                    let Some((dir, positive)) = echelon::direction(&r) else { continue };
                    match cone.get(&dir) {
                        Some(&(sign, partner)) if sign != positive => {
                            new_ids.extend(e.offer(NodeKind::ConeB1 { zeta: z, partner }, j));
                        }
                        Some(_) => {}
                        None => {
                            cone.insert(dir, (positive, z));
                        }
                    }
                }
            }
            Mode::Provable => {}
        }

        fr_theta.clear();
        fr_v.clear();
        for id in new_ids {
            let val = e.tree.value(id).clone();
            if !val.theta.is_zero() {
                theta_gens.push(id);
                fr_theta.push(id);
            }
            if !val.v.is_zero() {
                v_gens.push(id);
                fr_v.push(id);
                let eligible = match opts.scope {
                    Scope::AllPairs => true,
                    Scope::Seeded => matches!(e.tree.nodes[id].kind, NodeKind::Q1Image { theta } if seed_ids.contains(&theta)),
                };
                if eligible && b1_vanishes(&val) {
                    psi.push(id);
                }
            }
        }
        steps.push(e.dims(j));
        if e.is_full() || (fr_theta.is_empty() && fr_v.is_empty()) {
            break;
        }
    }
    e.into_report(steps, stop_j)
}

/// One application of `𝓕₂` over all basis pairs of `s2`.
pub fn f2_step(s2: &Subspace) -> Subspace {
    let mut out = Subspace { tree: s2.tree.clone(), ..Subspace::empty(s2.trunc) };
    for &id in &s2.nodes {
        out.try_insert(id);
    }
    let ids = s2.nodes.clone();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            let val = StateVector::from_theta(frak_b2_unchecked(&out.tree.value(a).theta, &out.tree.value(b).theta));
            if val.is_zero() || out.contains(&val) {
                continue;
            }
            let id = out.tree.push(NodeKind::FrakB2 { a, b }, 1, val);
            out.try_insert(id);
        }
    }
    out
}

/// One application of the velocity moves to the span `s`; returns the
/// velocity span.
pub fn f1_step(s: &Subspace, mode: Mode) -> Subspace {
    let mut out = Subspace { tree: s.tree.clone(), ..Subspace::empty(s.trunc) };
    let v_ids: Vec<usize> = s.nodes.iter().copied().filter(|&id| !s.tree.value(id).v.is_zero()).collect();
    let t_ids: Vec<usize> = s.nodes.iter().copied().filter(|&id| !s.tree.value(id).theta.is_zero()).collect();
    for &id in &v_ids {
        let v = StateVector::from_v(out.tree.value(id).v.clone());
        if v != *out.tree.value(id) {
            let nid = out.tree.push(NodeKind::LinearCombo { coeffs: vec!["1".into()], nodes: vec![id] }, 1, v);
            out.try_insert(nid);
        } else {
            out.try_insert(id);
        }
    }
    let push = |out: &mut Subspace, kind: NodeKind| {
        let val = out.tree.evaluate(&kind);
        if !val.is_zero() && !out.contains(&val) {
            let id = out.tree.push(kind, 1, val);
            out.try_insert(id);
        }
    };
    for &t in &t_ids {
        push(&mut out, NodeKind::Q1Image { theta: t });
    }
    let psi: Vec<usize> = v_ids.iter().copied().filter(|&id| b1_vanishes(s.tree.value(id))).collect();
    for &z in &v_ids {
        for &p in &psi {
            if z != p {
                push(&mut out, NodeKind::CrossB1 { zeta: z, psi: p });
            }
        }
    }
    match mode {
        Mode::Span => {
            for (i, &z) in v_ids.iter().enumerate() {
                push(&mut out, NodeKind::ConeB1 { zeta: z, partner: z });
                for &z2 in &v_ids[i + 1..] {
                    push(&mut out, NodeKind::CrossB1 { zeta: z, psi: z2 });
                }
            }
        }
        Mode::Provable => {
            let mut cone: HashMap<Vec<(Coord, Rational)>, (bool, usize)> = HashMap::new();
            for &z in &v_ids {
                let val = out.tree.evaluate(&NodeKind::ConeB1 { zeta: z, partner: z });
                let r = out.echelon.reduce(sparse(&val));
                let Some((dir, positive)) = echelon::direction(&r) else { continue };
                match cone.get(&dir) {
                    Some(&(sign, partner)) if sign != positive => push(&mut out, NodeKind::ConeB1 { zeta: z, partner }),
                    Some(_) => {}
                    None => {
                        cone.insert(dir, (positive, z));
                    }
                }
            }
        }
    }
    out
}

/// Iterates the linearized recursion `𝒢(j)` from a purely scalar seed space.
pub fn lin_chain(h: &ControlSpace, max_j: usize, trunc: Truncation, cap: CapPolicy) -> Result<ChainReport> {
    if !h.is_scalar_only() {
        return Err(PeError::ShapeViolation("linearized saturation needs a seed space {0}×ℋ₂".into()));
    }
    let mut e = Engine::new(trunc, cap);
    let mut gens = vec![];
    let mut xi1 = vec![];
    for (i, g) in h.generators.iter().enumerate() {
        let id = e.add_seed(i, g);
        gens.push(id);
        xi1.push(id);
    }
    for &s in gens.clone().iter() {
        let val = e.tree.evaluate(&NodeKind::Q1Image { theta: s });
        if !val.is_zero() {
            let id = e.tree.push(NodeKind::Q1Image { theta: s }, 0, val);
            xi1.push(id);
        }
    }
    let mut frontier = gens.clone();
    let mut steps = vec![e.dims(0)];
    let mut stop_j = 0;
    if e.is_full() {
        return Ok(e.into_report(steps, 0));
    }
    for j in 1..=max_j {
        stop_j = j;
        let mut new_ids = vec![];
        for &g in &frontier {
            if !e.tree.value(g).theta.is_zero() {
                new_ids.extend(e.offer(NodeKind::Q1Image { theta: g }, j));
            }
            for &x in &xi1 {
                new_ids.extend(e.offer(NodeKind::PolarB { xi1: x, xi2: g }, j));
            }
        }
        frontier = new_ids;
        steps.push(e.dims(j));
        if e.is_full() || frontier.is_empty() {
            break;
        }
    }
    Ok(e.into_report(steps, stop_j))
}

