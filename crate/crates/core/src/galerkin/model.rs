use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::basis::{coords, Coord, Truncation};
use crate::field::{Coeff, Rational, StateVector};
use crate::operators::{q1_unchecked, transport_unchecked, PhysicalParams};

/// Sparse trilinear form `T(a, b) = Σ a_i b_j T_ij^k ê_k` of the projected
/// transport in orthonormal coordinates, grouped by `(i, j)`.
#[derive(Debug)]
pub struct TransportTensor {
    pub pairs: Vec<(u32, u32)>,
    pub offsets: Vec<u32>,
    pub ks: Vec<u32>,
    pub vals: Vec<f64>,
}

impl TransportTensor {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }
}

/// Parameter-independent pieces of the truncated model.
#[derive(Debug)]
pub struct ModelCore {
    pub trunc: Truncation,
    pub basis: Vec<Coord>,
    pub index: HashMap<Coord, usize>,
    pub norms: Vec<f64>,
    pub n_v: usize,
    pub tensor: TransportTensor,
    /// `(k, j, value)` of the Coriolis part of `Q` per unit `f`.
    pub q_coriolis: Vec<(usize, usize, f64)>,
    /// `(k, j, value)` of the `−Π∫∇θ` part of `Q`.
    pub q_theta: Vec<(usize, usize, f64)>,
}

fn frac(c: &Coord) -> Rational {
    let (n, d) = c.norm2_fraction();
    Rational::ratio(n, d)
}

impl ModelCore {
    fn build(trunc: Truncation) -> ModelCore {
        let basis = trunc.basis();
        let index: HashMap<Coord, usize> = basis.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let norms: Vec<f64> = basis.iter().map(|c| c.norm()).collect();
        let n2: Vec<Rational> = basis.iter().map(frac).collect();
        let n2f: Vec<f64> = n2.iter().map(|x| x.to_f64()).collect();
        let n_v = basis.iter().filter(|c| !c.is_theta()).count();
        let elements: Vec<StateVector<Rational>> = basis.iter().map(|c| c.element()).collect();
        let vol_sqrt = crate::field::torus_volume().sqrt();

        let mut pairs = Vec::new();
        let mut offsets = vec![0u32];
        let mut ks = Vec::new();
        let mut vals = Vec::new();
        for i in 0..n_v {
            for j in 0..basis.len() {
                let out = transport_unchecked(&elements[i], &elements[j]);
                let mut any = false;
                for (c, a) in coords(&out) {
                    let Some(&k) = index.get(&c) else { continue };
                    // ⟨T(e_i, e_j), e_k⟩ / (2π)³, then orthonormal scaling
                    let r = (a * n2[k].clone()).to_f64();
                    let denom = (n2f[i] * n2f[j] * n2f[k]).sqrt() * vol_sqrt;
                    ks.push(k as u32);
                    vals.push(r / denom);
                    any = true;
                }
                if any {
                    pairs.push((i as u32, j as u32));
                    offsets.push(ks.len() as u32);
                }
            }
        }

        let mut q_coriolis = Vec::new();
        let mut q_theta = Vec::new();
        for (j, e) in elements.iter().enumerate() {
            let (target, part) = if basis[j].is_theta() {
                (&mut q_theta, q1_unchecked(e, &Rational::zero()))
            } else {
                (&mut q_coriolis, q1_unchecked(e, &Rational::one()))
            };
            for (c, a) in coords(&StateVector::from_v(part)) {
                if let Some(&k) = index.get(&c) {
                    let r = (a * n2[k].clone()).to_f64();
                    target.push((k, j, r / (n2f[j] * n2f[k]).sqrt()));
                }
            }
        }
        ModelCore {
            trunc,
            basis,
            index,
            norms,
            n_v,
            tensor: TransportTensor { pairs, offsets, ks, vals },
            q_coriolis,
            q_theta,
        }
    }

    /// Shared, lazily assembled core for a truncation.
    pub fn get(trunc: Truncation) -> Arc<ModelCore> {
        static CACHE: OnceLock<Mutex<HashMap<Truncation, Arc<ModelCore>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = cache.lock().unwrap().get(&trunc) {
            return c.clone();
        }
        let core = Arc::new(ModelCore::build(trunc));
        cache.lock().unwrap().entry(trunc).or_insert(core).clone()
    }
}

/// Galerkin model of the truncated system in orthonormal coordinates.
#[derive(Clone, Debug)]
pub struct GalerkinModel {
    pub core: Arc<ModelCore>,
    pub params: PhysicalParams<f64>,
    /// Diagonal of `L`.
    pub lambda: DVector<f64>,
    /// `Q` as a sparse list `(k, j, value)`.
    pub q: Vec<(usize, usize, f64)>,
    /// Projected source `h`.
    pub h: DVector<f64>,
}

impl GalerkinModel {
    pub fn new(trunc: Truncation, params: &PhysicalParams<f64>) -> Self {
        let core = ModelCore::get(trunc);
        let lambda = DVector::from_iterator(
            core.basis.len(),
            core.basis.iter().map(|c| {
                let k = c.key();
                let (m2, p2) = (k.m_norm2() as f64, (k.p as f64).powi(2));
                if c.is_theta() {
                    params.nu2 * m2 + params.mu2 * p2
                } else {
                    params.nu1 * m2 + params.mu1 * p2
                }
            }),
        );
        let mut q: Vec<(usize, usize, f64)> = core.q_theta.clone();
        if params.f != 0.0 {
            q.extend(core.q_coriolis.iter().map(|&(k, j, v)| (k, j, v * params.f)));
        }
        let mut model = GalerkinModel { h: DVector::zeros(core.basis.len()), core, params: params.clone(), lambda, q };
        model.h = model.to_coords(&params.h);
        model
    }

    pub fn dim(&self) -> usize {
        self.core.basis.len()
    }

    pub fn n_v(&self) -> usize {
        self.core.n_v
    }

    pub fn trunc(&self) -> Truncation {
        self.core.trunc
    }

    /// Orthonormal coordinates of the Galerkin projection of `u`.
    pub fn to_coords<T: Coeff>(&self, u: &StateVector<T>) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        for (c, a) in coords(u) {
            if let Some(&k) = self.core.index.get(&c) {
                x[k] = a.to_f64() * self.core.norms[k];
            }
        }
        x
    }

    pub fn from_coords(&self, x: &DVector<f64>) -> StateVector<f64> {
        let mut u = StateVector::zero();
        for (k, c) in self.core.basis.iter().enumerate() {
            if x[k] != 0.0 {
                u.axpy(&(x[k] / self.core.norms[k]), &c.element());
            }
        }
        u
    }

    pub fn apply_l(&self, u: &DVector<f64>) -> DVector<f64> {
        u.component_mul(&self.lambda)
    }

    pub fn apply_q(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for &(k, j, v) in &self.q {
            out[k] += v * u[j];
        }
        out
    }

    pub fn apply_q_transpose(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for &(k, j, v) in &self.q {
            out[j] += v * u[k];
        }
        out
    }

    /// `T(a, b)`: projected transport of `b` by the velocity of `a`.
    pub fn transport(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        let t = &self.core.tensor;
        let mut out = DVector::zeros(self.dim());
        for (p, &(i, j)) in t.pairs.iter().enumerate() {
            let w = a[i as usize] * b[j as usize];
            if w == 0.0 {
                continue;
            }
            for e in t.offsets[p] as usize..t.offsets[p + 1] as usize {
                out[t.ks[e] as usize] += w * t.vals[e];
            }
        }
        out
    }

    /// `P_N B(u)`.
    pub fn big_b(&self, u: &DVector<f64>) -> DVector<f64> {
        self.transport(u, u)
    }

    /// `P_N b(ũ, w)`.
    pub fn polar_b(&self, ut: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        self.transport(ut, w) + self.transport(w, ut)
    }

    /// Matrix of `w ↦ P_N b(ũ, w)`.
    pub fn b_jacobian(&self, ut: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let t = &self.core.tensor;
        let mut m = DMatrix::zeros(n, n);
        for (p, &(i, j)) in t.pairs.iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            let (ai, bj) = (ut[i], ut[j]);
            if ai == 0.0 && bj == 0.0 {
                continue;
            }
            for e in t.offsets[p] as usize..t.offsets[p + 1] as usize {
                let k = t.ks[e] as usize;
                let v = t.vals[e];
                // T(ũ, w): coefficient ũ_i on w_j ; T(w, ũ): coefficient ũ_j on w_i
                m[(k, j)] += ai * v;
                m[(k, i)] += bj * v;
            }
        }
        m
    }

    /// Matrix of `Q`.
    pub fn q_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(k, j, v) in &self.q {
            m[(k, j)] += v;
        }
        m
    }

    /// `⟨x, y⟩` in `L²`; coordinates are orthonormal.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(y)
    }

    /// `‖u‖_k` with Sobolev weights `(1 + |m|² + p²)^k`.
    pub fn sobolev_norm(&self, x: &DVector<f64>, k: u32) -> f64 {
        let mut s = 0.0;
        for (i, c) in self.core.basis.iter().enumerate() {
            s += x[i] * x[i] * crate::field::sobolev_weight(&c.key(), k) as f64;
        }
        s.sqrt()
    }

    pub fn coord_index(&self, c: &Coord) -> Option<usize> {
        self.core.index.get(c).copied()
    }

    /// Index of a scalar basis mode.
    pub fn theta_index(&self, theta: &crate::field::ScalarField<Rational>) -> Option<usize> {
        let (k, _) = theta.iter().next()?;
        self.coord_index(&Coord::Theta(*k))
    }
}
