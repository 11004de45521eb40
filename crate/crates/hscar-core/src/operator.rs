//! Sparse Hamiltonian in compressed-row form.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::hilbert::BasisSector;
use crate::lattice::LatticeSpec;

/// Real symmetric operator on a [`BasisSector`].
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseHamiltonian {
    /// Builds from per-row `(column, value)` lists. Duplicate columns add.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let dim = rows.len();
        if dim > u32::MAX as usize {
            bail!(Capacity, "dimension {dim} exceeds the sparse index range");
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut last = usize::MAX;
            for (c, v) in row {
                if c >= dim {
                    bail!(Contract, "column {c} outside dimension {dim}");
                }
                if c == last {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c as u32);
                    vals.push(v);
                    last = c;
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(Self { dim, row_ptr, cols, vals })
    }

    /// Dense row-major input; zeros are dropped.
    pub fn from_dense(dim: usize, a: &[f64]) -> Result<Self> {
        if a.len() != dim * dim {
            bail!(Contract, "dense matrix has {} entries, expected {}", a.len(), dim * dim);
        }
        let rows = (0..dim)
            .map(|i| (0..dim).filter(|&j| a[i * dim + j] != 0.0).map(|j| (j, a[i * dim + j])).collect())
            .collect();
        Self::from_rows(rows)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `i` as `(column, value)`.
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (i, yi) in y.iter_mut().enumerate() {
            let (mut re, mut im) = (0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let xv = x[self.cols[k] as usize];
                re += self.vals[k] * xv.re;
                im += self.vals[k] * xv.im;
            }
            *yi = Complex64::new(re, im);
        }
    }

    /// `⟨ψ|H|ψ⟩` for a normalised complex vector.
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let mut hpsi = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec_complex(psi, &mut hpsi);
        psi.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.dim * self.dim];
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                a[i * self.dim + j] = v;
            }
        }
        a
    }

    /// Dense principal submatrix on the given indices, row-major.
    pub fn restrict_dense(&self, idx: &[usize]) -> Vec<f64> {
        let n = idx.len();
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut a = vec![0.0; n * n];
        for (k, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    a[k * n + pos[j]] = v;
                }
            }
        }
        a
    }
}

/// Assembles the hop Hamiltonian of `spec` on `sec`. Each bond contributes
/// its amplitude between `s` and the state with one particle moved across
/// it; the diagonal holds `Σ_i ω_i z_i`. Zero-amplitude bonds are skipped.
pub fn assemble_hamiltonian(spec: &LatticeSpec, sec: &BasisSector) -> Result<SparseHamiltonian> {
    if spec.sites() != sec.sites() {
        bail!(Contract, "lattice has {} sites but sector has {}", spec.sites(), sec.sites());
    }
    let bonds: Vec<(u64, f64)> = spec
        .edges()
        .iter()
        .filter(|e| e.amplitude != 0.0)
        .map(|e| ((1u64 << e.u) | (1u64 << e.v), e.amplitude))
        .collect();
    let onsite = spec.onsite();
    let has_onsite = onsite.iter().any(|&w| w != 0.0);
    let dim = sec.dim();
    if dim > u32::MAX as usize {
        bail!(Capacity, "dimension {dim} exceeds the sparse index range");
    }
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    let mut row: Vec<(u32, f64)> = Vec::with_capacity(bonds.len() + 1);
    for (i, &s) in sec.raw_states().iter().enumerate() {
        row.clear();
        if has_onsite {
            let d: f64 = (0..spec.sites()).filter(|&k| (s >> k) & 1 == 1).map(|k| onsite[k]).sum();
            if d != 0.0 {
                row.push((i as u32, d));
            }
        }
        for &(m, j) in &bonds {
            // exactly one endpoint occupied
            if (s & m).count_ones() == 1 {
                let t = s ^ m;
                let k = sec.rank_bits(t).expect("hop stays inside the sector");
                row.push((k as u32, j));
            }
        }
        row.sort_unstable_by_key(|&(c, _)| c);
        for &(c, v) in &row {
            if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
            }
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian { dim, row_ptr, cols, vals })
}
