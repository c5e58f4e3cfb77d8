use std::collections::{BTreeMap, HashMap};
use std::ops::Bound;

use num_traits::{Signed, Zero};

use crate::basis::Coord;
use crate::field::Rational;

pub type SparseVec = BTreeMap<Coord, Rational>;

/// Triangular set of sparse rational rows: every row has a distinct pivot
/// (its smallest coordinate) normalized to one.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: HashMap<Coord, Vec<(Coord, Rational)>>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Residual of `v` after elimination against every row.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        let mut lower: Option<Coord> = None;
        loop {
            let next = match lower {
                None => v.iter().next().map(|(c, _)| *c),
                Some(l) => v.range((Bound::Excluded(l), Bound::Unbounded)).next().map(|(c, _)| *c),
            };
            let Some(c) = next else { break };
            if let Some(row) = self.rows.get(&c) {
                let factor = v[&c].clone();
                for (rc, rx) in row {
                    let e = v.entry(*rc).or_insert_with(Rational::zero);
                    *e -= &factor * rx;
                    if e.is_zero() {
                        v.remove(rc);
                    }
                }
            }
            lower = Some(c);
        }
        v
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Inserts `v` if independent; returns whether the rank grew.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let r = self.reduce(v);
        self.insert_reduced(r)
    }

    pub fn insert_reduced(&mut self, r: SparseVec) -> bool {
        let Some((&pivot, lead)) = r.iter().next() else { return false };
        let inv = lead.recip();
        let row: Vec<(Coord, Rational)> = r.iter().map(|(c, x)| (*c, x * &inv)).collect();
        self.rows.insert(pivot, row);
        true
    }
}

/// Canonical direction of a nonzero sparse vector: scaled so the leading
/// entry is one, together with the sign of the original leading entry.
pub fn direction(v: &SparseVec) -> Option<(Vec<(Coord, Rational)>, bool)> {
    let (_, lead) = v.iter().next()?;
    let positive = lead.is_positive();
    let inv = lead.recip();
    Some((v.iter().map(|(c, x)| (*c, x * &inv)).collect(), positive))
}

/// Numerical rank by Gaussian elimination with partial pivoting; entries
/// below `tol` times the largest initial magnitude count as zero.
pub fn float_rank(rows: &[Vec<f64>], tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let ncols = a[0].len();
    let scale = a.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let thresh = tol * scale;
    let mut rank = 0;
    for col in 0..ncols {
        if rank == a.len() {
            break;
        }
        let (best, val) = (rank..a.len())
            .map(|i| (i, a[i][col].abs()))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= thresh {
            continue;
        }
        a.swap(rank, best);
        let piv = a[rank][col];
        let prow = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            let f = row[col] / piv;
            if f != 0.0 {
                for (x, p) in row.iter_mut().zip(&prow).skip(col) {
                    *x -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}
