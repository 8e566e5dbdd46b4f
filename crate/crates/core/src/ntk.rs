//! Empirical neural tangent kernel and its spectrum.

use std::io::Write;
use std::path::Path;

use crate::autodiff::{Rev, Tape, Var};
use crate::error::{Error, Result};
use crate::layers::Network;

/// Gradient of output 0 with respect to all parameters, one row per input.
pub fn jacobian<N: Network>(net: &N, params: &[f64], inputs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut tape = Tape::new();
    let mut adj = Vec::new();
    inputs
        .iter()
        .map(|x| {
            tape.clear();
            let p = tape.vars(params);
            let mut ctx = Rev::new(&mut tape);
            let prep = net.prepare(&mut ctx, &p);
            let xs: Vec<Var> = x.iter().map(|&v| Var::constant(v)).collect();
            let y = net.forward(&mut ctx, &p, &prep, &xs)[0];
            tape.backward_into(y, &mut adj);
            adj[..params.len()].to_vec()
        })
        .collect()
}

/// `Theta[i][j] = <J_i, J_j>` as a row-major `N x N` matrix.
pub fn ntk_matrix<N: Network>(net: &N, params: &[f64], inputs: &[Vec<f64>]) -> Vec<f64> {
    gram(&jacobian(net, params, inputs))
}

pub fn gram(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Eigenvalues of a symmetric row-major matrix, sorted descending.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(Error::Shape(format!("expected {n}x{n} entries, got {}", a.len())));
    }
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..i {
            if (a[i * n + j] - a[j * n + i]).abs() > 1e-9 * scale {
                return Err(Error::Contract(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    a[i * n + j],
                    a[j * n + i]
                )));
            }
        }
    }
    Ok(crate::linalg::sym_eigenvalues(a, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NtkSnapshot {
    pub step: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

impl NtkSnapshot {
    pub fn compute<N: Network>(net: &N, params: &[f64], inputs: &[Vec<f64>], step: usize) -> Result<Self> {
        let k = ntk_matrix(net, params, inputs);
        Ok(NtkSnapshot {
            step,
            eigenvalues: sym_eigenvalues(&k, inputs.len())?,
        })
    }

    /// `lambda_k / lambda_1`.
    pub fn normalized(&self) -> Vec<f64> {
        let top = self.eigenvalues[0];
        self.eigenvalues.iter().map(|l| l / top).collect()
    }
}

/// Runs `train_step` for `0..max(checkpoints)` and takes a snapshot before
/// the step at each checkpoint (so checkpoint 0 is the initial model) and
/// after the final step when it is a checkpoint.
pub fn spectrum_track<N, F>(
    net: &N,
    params: &mut [f64],
    inputs: &[Vec<f64>],
    checkpoints: &[usize],
    mut train_step: F,
) -> Result<Vec<NtkSnapshot>>
where
    N: Network,
    F: FnMut(&mut [f64], usize) -> Result<()>,
{
    let last = checkpoints.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(checkpoints.len());
    for step in 0..=last {
        if checkpoints.contains(&step) {
            out.push(NtkSnapshot::compute(net, params, inputs, step)?);
        }
        if step < last {
            train_step(params, step)?;
        }
    }
    Ok(out)
}

/// CSV with columns `step,index,eigenvalue`.
pub fn write_spectrum_csv(path: &Path, snapshots: &[NtkSnapshot]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "step,index,eigenvalue")?;
    for s in snapshots {
        for (i, l) in s.eigenvalues.iter().enumerate() {
            writeln!(f, "{},{},{:e}", s.step, i, l)?;
        }
    }
    f.flush()?;
    Ok(())
}
