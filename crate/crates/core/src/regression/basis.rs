use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::check_dim;
use crate::hypercube::BitVector;
use crate::par;
use crate::{Error, Result};

/// Largest basis the dense feature matrices are built for.
pub const MAX_BASIS: usize = 200_000;

/// All subsets `S ⊆ [n]` with `|S| <= d`, ordered by size, then lexicographically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BasisRepr", into = "BasisRepr")]
pub struct MonomialBasis {
    n: usize,
    d: usize,
    monomials: Vec<Vec<usize>>,
    // for |S| >= 1: index of S without its last element, and that element
    parent: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct BasisRepr {
    n: usize,
    d: usize,
    monomials: Vec<Vec<usize>>,
}

impl TryFrom<BasisRepr> for MonomialBasis {
    type Error = Error;
    fn try_from(r: BasisRepr) -> Result<Self> {
        let b = MonomialBasis::new(r.n, r.d)?;
        if b.monomials != r.monomials {
            return Err(Error::config("monomial list does not match the (size, lex) basis for (n, d)"));
        }
        Ok(b)
    }
}

impl From<MonomialBasis> for BasisRepr {
    fn from(b: MonomialBasis) -> Self {
        BasisRepr { n: b.n, d: b.d, monomials: b.monomials }
    }
}

/// `sum_{k <= d} C(n, k)`, saturating.
pub fn basis_size(n: usize, d: usize) -> usize {
    let mut total: usize = 0;
    let mut c: u128 = 1;
    for k in 0..=d.min(n) {
        if k > 0 {
            c = c * (n - k + 1) as u128 / k as u128;
        }
        total = total.saturating_add(usize::try_from(c).unwrap_or(usize::MAX));
    }
    total
}

impl MonomialBasis {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let size = basis_size(n, d);
        if size > MAX_BASIS {
            return Err(Error::config(format!(
                "basis for n = {n}, d = {d} has {size} monomials (cap {MAX_BASIS})"
            )));
        }
        let mut monomials: Vec<Vec<usize>> = vec![vec![]];
        for k in 1..=d.min(n) {
            let mut s: Vec<usize> = (0..k).collect();
            loop {
                monomials.push(s.clone());
                // next k-combination in lex order
                let mut i = k;
                while i > 0 && s[i - 1] == n - k + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                s[i - 1] += 1;
                for j in i..k {
                    s[j] = s[j - 1] + 1;
                }
            }
        }
        let index: HashMap<&[usize], usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
        let parent = monomials
            .iter()
            .map(|m| match m.split_last() {
                None => (0, 0),
                Some((&last, rest)) => (index[rest], last),
            })
            .collect();
        Ok(Self { n, d, monomials, parent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }

    /// Writes `chi_S(x)` for every monomial into `out`.
    #[inline]
    pub fn expand_into(&self, x: &[i8], out: &mut [f64]) {
        out[0] = 1.0;
        for i in 1..out.len() {
            let (p, v) = self.parent[i];
            out[i] = if x[v] > 0 { out[p] } else { -out[p] };
        }
    }

    pub fn expand(&self, x: &[i8]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.expand_into(x, &mut out);
        out
    }

    /// Feature rows for a batch of points.
    pub fn matrix(&self, xs: &[&[i8]]) -> FeatureMatrix {
        let m = self.len();
        let parts = par::map_chunks(xs.len(), 256, |_, r| {
            let mut block = vec![0.0; r.len() * m];
            for (k, i) in r.enumerate() {
                self.expand_into(xs[i], &mut block[k * m..(k + 1) * m]);
            }
            block
        });
        FeatureMatrix::new(xs.len(), m, parts.concat()).expect("block sizes add up")
    }
}

pub fn expand_features(x: &BitVector, basis: &MonomialBasis) -> Result<Vec<f64>> {
    check_dim(basis.n(), x.len())?;
    Ok(basis.expand(x.as_slice()))
}
