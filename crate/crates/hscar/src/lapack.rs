//! Dense symmetric eigensolver backed by LAPACK `dsyevr`.

use std::os::raw::{c_char, c_int};

use hscar_core::Error;

/// Which eigenpairs to compute.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Selection {
    All,
    /// Zero-based inclusive index range into the ascending spectrum.
    Indices { lo: usize, hi: usize },
    /// Half-open energy interval `(lo, hi]`.
    Values { lo: f64, hi: f64 },
}

#[derive(Clone, Debug)]
pub struct Eigh {
    pub n: usize,
    pub values: Vec<f64>,
    /// Eigenvectors stored contiguously, `n` entries each; empty when not
    /// requested.
    pub vectors: Vec<f64>,
}

/// Eigenpairs of the symmetric `n×n` matrix `a` (either storage order; only
/// one triangle is read). `a` is consumed as workspace.
pub fn eigh(mut a: Vec<f64>, n: usize, sel: Selection, want_vectors: bool) -> Result<Eigh, Error> {
    if a.len() != n * n {
        return Err(Error::Contract(format!("matrix has {} entries, expected {n}²", a.len())));
    }
    if n == 0 {
        return Ok(Eigh { n, values: Vec::new(), vectors: Vec::new() });
    }
    let ni = c_int::try_from(n).map_err(|_| Error::Capacity(format!("dimension {n} exceeds LAPACK indexing")))?;
    let (range, il, iu, vl, vu, cols) = match sel {
        Selection::All => (b'A', 1, ni, 0.0, 0.0, n),
        Selection::Indices { lo, hi } => {
            if lo > hi || hi >= n {
                return Err(Error::Contract(format!("index range {lo}..={hi} outside 0..{n}")));
            }
            (b'I', lo as c_int + 1, hi as c_int + 1, 0.0, 0.0, hi - lo + 1)
        }
        Selection::Values { lo, hi } => {
            if !(lo < hi) {
                return Err(Error::Contract(format!("empty energy window ({lo}, {hi}]")));
            }
            (b'V', 1, ni, lo, hi, n)
        }
    };
    let jobz = if want_vectors { b'V' } else { b'N' } as c_char;
    let range = range as c_char;
    let uplo = b'L' as c_char;
    let mut m: c_int = 0;
    let mut w = vec![0.0; n];
    let mut z = if want_vectors { vec![0.0; n * cols] } else { vec![0.0; 1] };
    let mut isuppz = vec![0 as c_int; 2 * n];
    let mut info: c_int = 0;
    let mut work = vec![0.0; 1];
    let mut iwork = vec![0 as c_int; 1];
    let abstol = 0.0;
    let ldz = if want_vectors { ni } else { 1 };
    for query in [true, false] {
        let (lwork, liwork) = if query { (-1, -1) } else { (work.len() as c_int, iwork.len() as c_int) };
        // SAFETY: every buffer is sized per the dsyevr contract for the
        // selected range; the workspace sizes come from the query call.
        unsafe {
            lapack_sys::dsyevr_(
                &jobz,
                &range,
                &uplo,
                &ni,
                a.as_mut_ptr(),
                &ni,
                &vl,
                &vu,
                &il,
                &iu,
                &abstol,
                &mut m,
                w.as_mut_ptr(),
                z.as_mut_ptr(),
                &ldz,
                isuppz.as_mut_ptr(),
                work.as_mut_ptr(),
                &lwork,
                iwork.as_mut_ptr(),
                &liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(Error::Numerical(format!("dsyevr failed with info = {info}")));
        }
        if query {
            work = vec![0.0; work[0] as usize];
            iwork = vec![0; iwork[0] as usize];
        }
    }
    let m = m as usize;
    w.truncate(m);
    if want_vectors {
        z.truncate(n * m);
    } else {
        z.clear();
    }
    Ok(Eigh { n, values: w, vectors: z })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
            a[(i + 1) * n + i] = 1.0;
        }
        a
    }

    #[test]
    fn path_graph_spectrum() {
        let n = 12;
        let e = eigh(path(n), n, Selection::All, true).unwrap();
        for (k, &v) in e.values.iter().enumerate() {
            let want = 2.0 * (std::f64::consts::PI * (n - k) as f64 / (n + 1) as f64).cos();
            assert!((v - want).abs() < 1e-12);
        }
        let a = path(n);
        for k in 0..n {
            let v = &e.vectors[k * n..(k + 1) * n];
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                assert!((av - e.values[k] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subsets() {
        let n = 10;
        let all = eigh(path(n), n, Selection::All, false).unwrap();
        assert!(all.vectors.is_empty());
        let mid = eigh(path(n), n, Selection::Indices { lo: 3, hi: 5 }, true).unwrap();
        assert_eq!(mid.values.len(), 3);
        assert_eq!(mid.vectors.len(), 3 * n);
        for k in 0..3 {
            assert!((mid.values[k] - all.values[3 + k]).abs() < 1e-12);
        }
        let win = eigh(path(n), n, Selection::Values { lo: -0.5, hi: 0.5 }, false).unwrap();
        let want = all.values.iter().filter(|&&v| v > -0.5 && v <= 0.5).count();
        assert_eq!(win.values.len(), want);
        assert!(eigh(path(n), n, Selection::Indices { lo: 4, hi: 10 }, false).is_err());
    }
}
