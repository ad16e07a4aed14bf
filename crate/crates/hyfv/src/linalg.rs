//! Sparse matrices and linear solvers.
//!
//! Assembly produces triplets; duplicate entries are summed in insertion
//! order so assembled matrices are bit-identical across runs. The direct
//! path delegates to a sparse LU factorization; the iterative path is
//! BiCGStab preconditioned with ILU(0).

use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from triplets, summing duplicates deterministically
    /// (stable sort by position, accumulation in insertion order).
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> CsrMatrix {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&i| (triplets[i].0, triplets[i].1));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &i in &order {
            let (r, c, v) = triplets[i];
            debug_assert!(r < n_rows && c < n_cols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_nonzeros(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    pub fn multiply(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            out[r] = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
    }

    pub fn residual_norm(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n_rows];
        self.multiply(x, &mut ax);
        ax.iter()
            .zip(b)
            .map(|(a, bb)| (a - bb) * (a - bb))
            .sum::<f64>()
            .sqrt()
    }
}

/// Solver backend selection.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum SolverKind {
    /// Sparse LU. Default for the system sizes this library targets.
    #[default]
    Direct,
    /// BiCGStab with an ILU(0) preconditioner.
    Iterative { tol: f64, max_iter: usize },
}


/// Solves `A x = b`.
pub fn solve(a: &CsrMatrix, b: &[f64], kind: SolverKind) -> Result<Vec<f64>> {
    match kind {
        SolverKind::Direct => solve_direct(a, b),
        SolverKind::Iterative { tol, max_iter } => solve_bicgstab(a, b, tol, max_iter),
    }
}

fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    use faer::prelude::SpSolver;
    use faer::sparse::SparseColMat;

    let mut triplets = Vec::with_capacity(a.n_nonzeros());
    for r in 0..a.n_rows {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push((r, c, v));
        }
    }
    // The factorization panics on structurally singular input; map that
    // to an error instead of taking the process down.
    let solution =
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| -> Result<Vec<f64>> {
            let mat =
                SparseColMat::<usize, f64>::try_new_from_triplets(a.n_rows, a.n_cols, &triplets)
                    .map_err(|e| Error::Singular(format!("matrix construction failed: {e:?}")))?;
            let lu = mat
                .sp_lu()
                .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
            let rhs = faer::mat::Mat::from_fn(b.len(), 1, |i, _| b[i]);
            let x = lu.solve(&rhs);
            Ok((0..b.len()).map(|i| x[(i, 0)]).collect::<Vec<f64>>())
        }))
        .map_err(|_| Error::Singular("sparse LU factorization failed".to_string()))??;
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(
            "non-finite solution from direct solve".to_string(),
        ));
    }
    Ok(solution)
}

/// ILU(0): incomplete LU on the existing sparsity pattern.
struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &CsrMatrix) -> Result<Ilu0> {
        let n = a.n_rows;
        let mut lu = a.clone();
        let mut diag = vec![usize::MAX; n];
        for r in 0..n {
            for idx in lu.row_ptr[r]..lu.row_ptr[r + 1] {
                if lu.col_idx[idx] == r {
                    diag[r] = idx;
                }
            }
            if diag[r] == usize::MAX {
                return Err(Error::Singular(format!(
                    "ILU(0): missing diagonal in row {r}"
                )));
            }
        }
        let mut colmap = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for idx in start..end {
                colmap[lu.col_idx[idx]] = idx;
            }
            for idx in start..end {
                let k = lu.col_idx[idx];
                if k >= i {
                    break;
                }
                let pivot = lu.values[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Singular(format!("ILU(0): zero pivot in row {k}")));
                }
                let factor = lu.values[idx] / pivot;
                lu.values[idx] = factor;
                for kk in (diag[k] + 1)..lu.row_ptr[k + 1] {
                    let col = lu.col_idx[kk];
                    let pos = colmap[col];
                    if pos != usize::MAX && pos >= start && pos < end {
                        lu.values[pos] -= factor * lu.values[kk];
                    }
                }
            }
            for idx in start..end {
                colmap[lu.col_idx[idx]] = usize::MAX;
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let n = self.lu.n_rows;
        // forward solve L y = r (unit diagonal)
        for i in 0..n {
            let mut acc = r[i];
            for idx in self.lu.row_ptr[i]..self.diag[i] {
                acc -= self.lu.values[idx] * out[self.lu.col_idx[idx]];
            }
            out[i] = acc;
        }
        // backward solve U x = y
        for i in (0..n).rev() {
            let mut acc = out[i];
            for idx in (self.diag[i] + 1)..self.lu.row_ptr[i + 1] {
                acc -= self.lu.values[idx] * out[self.lu.col_idx[idx]];
            }
            out[i] = acc / self.lu.values[self.diag[i]];
        }
    }
}

fn solve_bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n_rows;
    let precond = Ilu0::new(a)?;
    let b_norm = b
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = r.clone();
    let mut rho = 1.0f64;
    let mut alpha = 1.0f64;
    let mut omega = 1.0f64;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    for it in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new.abs() < f64::MIN_POSITIVE {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(&p, &mut y);
        a.multiply(&y, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if dot(&s, &s).sqrt() / b_norm < tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(x);
        }
        precond.apply(&s, &mut z);
        a.multiply(&z, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::NonConvergence {
                residual: dot(&s, &s).sqrt() / b_norm,
                iterations: it,
            });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        if dot(&r, &r).sqrt() / b_norm < tol {
            return Ok(x);
        }
    }
    let res = a.residual_norm(&x, b) / b_norm;
    if res < tol {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            residual: res,
            iterations: max_iter,
        })
    }
}
