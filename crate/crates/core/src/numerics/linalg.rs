use crate::error::check_dim;
use crate::{Error, Result};

/// Lower Cholesky factor `L` of a symmetric positive definite matrix `S`,
/// stored densely in row-major order (upper triangle is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct SpdFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl SpdFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `L[i][j]`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Row-major `dim * dim` storage of `L`.
    pub fn as_slice(&self) -> &[f64] {
        &self.lower
    }

    pub fn identity(dim: usize) -> Self {
        let mut lower = vec![0.0; dim * dim];
        for i in 0..dim {
            lower[i * dim + i] = 1.0;
        }
        SpdFactor { dim, lower }
    }

    /// `L Lᵀ`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.dim;
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = 0.0;
                for k in 0..=j {
                    acc += self.get(i, k) * self.get(j, k);
                }
                s[i * n + j] = acc;
                s[j * n + i] = acc;
            }
        }
        s
    }

    /// Forward substitution `L x = v`, overwriting `v` with `x`.
    pub fn solve_in_place(&self, v: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let mut acc = v[i];
            for (l, x) in row.iter().zip(&v[..i]) {
                acc -= l * x;
            }
            v[i] = acc / self.lower[i * n + i];
        }
    }

    /// `out = L v`.
    pub fn mul_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..=i * n + i];
            out[i] = row.iter().zip(&v[..=i]).map(|(l, x)| l * x).sum();
        }
    }
}

/// Cholesky factorisation of a row-major symmetric `dim * dim` matrix.
///
/// Fails with [`Error::NotPositiveDefinite`] at the first pivot that is not
/// positive relative to the scale of the diagonal.
pub fn cholesky_spd(s: &[f64], dim: usize) -> Result<SpdFactor> {
    check_dim(dim * dim, s.len())?;
    if dim == 0 {
        return Err(Error::domain("cannot factor an empty matrix"));
    }
    let scale = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for i in 0..dim {
        for j in 0..i {
            let (a, b) = (s[i * dim + j], s[j * dim + i]);
            if (a - b).abs() > 1e-10 * scale {
                return Err(Error::domain(format!(
                    "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                )));
            }
        }
    }
    let max_diag = (0..dim).fold(0.0f64, |m, i| m.max(s[i * dim + i]));
    let tiny = 1e-12 * max_diag;

    let mut l = vec![0.0; dim * dim];
    for j in 0..dim {
        let mut d = s[j * dim + j];
        for k in 0..j {
            d -= l[j * dim + k] * l[j * dim + k];
        }
        if !(d > tiny) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[j * dim + j] = djj;
        for i in j + 1..dim {
            let mut acc = s[i * dim + j];
            for k in 0..j {
                acc -= l[i * dim + k] * l[j * dim + k];
            }
            l[i * dim + j] = acc / djj;
        }
    }
    Ok(SpdFactor { dim, lower: l })
}

pub fn solve_lower(l: &SpdFactor, v: &[f64]) -> Result<Vec<f64>> {
    check_dim(l.dim, v.len())?;
    let mut x = v.to_vec();
    l.solve_in_place(&mut x);
    Ok(x)
}

/// Squared Euclidean distance. Four independent accumulators so the loop
/// vectorises.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        // B Bᵀ + n I with B uniform in [-1, 1]
        let b: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += b[i * n + k] * b[j * n + k];
                }
                s[i * n + j] = acc;
            }
            s[i * n + i] += n as f64 * 1e-3;
        }
        s
    }

    #[test]
    fn identity_factor() {
        let s = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let l = cholesky_spd(&s, 3).unwrap();
        assert_eq!(l, SpdFactor::identity(3));
    }

    #[test]
    fn two_by_two_by_hand() {
        let l = cholesky_spd(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(0, 1), 0.0);
        assert_eq!(l.get(1, 0), 1.0);
        assert!((l.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);

        let x = solve_lower(&l, &[2.0, 1.0 + 2f64.sqrt()]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_row_reports_pivot() {
        let s = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        match cholesky_spd(&s, 3) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(cholesky_spd(&[1.0, 0.5, 0.0, 1.0], 2).is_err());
        assert!(cholesky_spd(&[1.0, 0.0], 2).is_err());
    }

    #[test]
    fn reconstruction_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..100 {
            let n = 1 + case % 50;
            let s = random_spd(&mut rng, n);
            let l = cholesky_spd(&s, n).unwrap();
            let smax = s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let err = l
                .reconstruct()
                .iter()
                .zip(&s)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-10 * smax, "n={n} err={err}");
            for i in 0..n {
                assert!(l.get(i, i) > 0.0);
            }

            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x = solve_lower(&l, &v).unwrap();
            let mut back = vec![0.0; n];
            l.mul_into(&x, &mut back);
            let vnorm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let res = sq_dist(&back, &v).sqrt();
            assert!(res <= 1e-10 * vnorm, "n={n} residual={res}");
        }
    }

    #[test]
    fn solve_identity_is_noop() {
        let v = [3.0, -1.0, 0.25];
        assert_eq!(solve_lower(&SpdFactor::identity(3), &v).unwrap(), v.to_vec());
        assert!(solve_lower(&SpdFactor::identity(3), &[1.0]).is_err());
    }

    #[test]
    fn sq_dist_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..23 {
            let a: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let naive: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
            assert!((sq_dist(&a, &b) - naive).abs() < 1e-12);
        }
    }
}
