use crate::error::{check_dim, check_unit};
use crate::hypercube::{decode_into, noisy_copy_law, BitVector, CubeFunction, ProductDistribution};
use crate::hypercube::noise::noisy_copy_into;
use crate::par;
use crate::rng::SeedStream;
use crate::stats::{EstimateWithCI, Moments, Mode, DEFAULT_LEVEL, ENUMERATION_CAP};
use crate::{Error, Result};

/// Values of `f` at every point, in enumeration order.
pub fn cube_table(f: &dyn CubeFunction) -> Result<Vec<f64>> {
    let n = f.dim();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap { n, cap: ENUMERATION_CAP });
    }
    let parts = par::map_chunks(1usize << n, par::CHUNK, |_, r| {
        let mut buf = vec![1i8; n];
        r.map(|idx| {
            decode_into(idx as u64, &mut buf);
            f.eval(&buf)
        })
        .collect::<Vec<_>>()
    });
    Ok(parts.concat())
}

fn table_dim(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::config(format!("table length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// `T_rho f` at every point, given the table of `f`.
pub fn noise_operator_table(values: &[f64], rho: f64, mu: &ProductDistribution) -> Result<Vec<f64>> {
    check_unit("rho", rho)?;
    let n = table_dim(values.len())?;
    check_dim(mu.dim(), n)?;
    let mut t = values.to_vec();
    for i in 0..n {
        let p = mu.minus_probs()[i];
        let k = [
            [rho + (1.0 - rho) * (1.0 - p), (1.0 - rho) * p],
            [(1.0 - rho) * (1.0 - p), rho + (1.0 - rho) * p],
        ];
        par::butterfly(&mut t, 1 << i, k);
    }
    Ok(t)
}

/// `x -> E_{z ~ N_sigma} f(x ⊙ z)` at every point.
pub fn flip_smooth_table(values: &[f64], sigma: f64) -> Result<Vec<f64>> {
    check_unit("sigma", sigma)?;
    let n = table_dim(values.len())?;
    let mut t = values.to_vec();
    let k = [[1.0 - sigma, sigma], [sigma, 1.0 - sigma]];
    for i in 0..n {
        par::butterfly(&mut t, 1 << i, k);
    }
    Ok(t)
}

/// `(T_rho f)(z) = E_{y ~ N_rho(z)} f(y)`.
pub fn t_rho(
    f: &dyn CubeFunction,
    rho: f64,
    mu: &ProductDistribution,
    z: &BitVector,
    mode: Mode,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_unit("rho", rho)?;
    let n = z.len();
    check_dim(n, f.dim())?;
    check_dim(n, mu.dim())?;
    match mode.resolve(n, ENUMERATION_CAP)? {
        None => {
            let law = noisy_copy_law(z, rho, mu)?;
            let v = par::sum_chunks(law.len(), par::CHUNK, |_, r| {
                let mut buf = vec![1i8; n];
                r.map(|idx| {
                    decode_into(idx as u64, &mut buf);
                    law[idx] * f.eval(&buf)
                })
                .sum()
            });
            Ok(EstimateWithCI::exact(v))
        }
        Some(samples) => {
            let seeds = SeedStream::new(seed);
            let m = par::map_chunks(samples, par::CHUNK, |ci, r| {
                let mut rng = seeds.rng(ci as u64);
                let mut buf = vec![1i8; n];
                let mut m = Moments::default();
                for _ in r {
                    noisy_copy_into(z.as_slice(), rho, mu.minus_probs(), &mut rng, &mut buf);
                    m.push(f.eval(&buf));
                }
                m
            })
            .into_iter()
            .fold(Moments::default(), Moments::merge);
            Ok(m.estimate(DEFAULT_LEVEL))
        }
    }
}
