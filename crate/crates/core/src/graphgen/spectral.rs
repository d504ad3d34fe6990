use faer::Side;

use super::RegularGraph;
use crate::error::{Error, Result};
use crate::rng;

/// Largest `N` handled by the dense eigensolver.
pub const DENSE_EIGEN_CAP: usize = 4096;

const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 200_000;

/// Second-largest adjacency eigenvalue `λ₂(A)`.
pub fn second_adjacency_eigenvalue(g: &RegularGraph) -> Result<f64> {
    if g.n() < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    if g.n() <= DENSE_EIGEN_CAP {
        let vals = g
            .adjacency_matrix()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
        Ok(vals[vals.len() - 2])
    } else {
        power_second_eigenvalue(g)
    }
}

/// Spectral gap `κ = 1 - λ₂(A)/r` of `I - A/r`; zero for disconnected graphs.
pub fn spectral_gap(g: &RegularGraph) -> Result<f64> {
    if !g.is_connected() {
        return Ok(0.0);
    }
    let lambda2 = second_adjacency_eigenvalue(g)?;
    Ok(1.0 - lambda2 / g.degree() as f64)
}

/// Power iteration for the top eigenvalue of `(I + A/r)/2` on the
/// orthocomplement of the constants, mapped back to `λ₂(A)`.
fn power_second_eigenvalue(g: &RegularGraph) -> Result<f64> {
    use rand::Rng;
    let n = g.n();
    let mut rng = rng::stream(g.seed(), rng::DOMAIN_PROBE, 0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut w = vec![0.0; n];
    let deflate = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
    };
    deflate(&mut v);
    let mut mu = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        g.apply_walk(&v, &mut w);
        w.iter_mut()
            .zip(&v)
            .for_each(|(wi, vi)| *wi = 0.5 * (*wi + vi));
        let next_mu: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        std::mem::swap(&mut v, &mut w);
        deflate(&mut v);
        if (next_mu - mu).abs() < POWER_TOL * 1e-3 {
            mu = next_mu;
            return Ok(g.degree() as f64 * (2.0 * mu - 1.0));
        }
        mu = next_mu;
    }
    Err(Error::Numerical("power iteration did not converge".into()))
}
