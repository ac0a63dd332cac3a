use super::matrix::{ProjectionKind, ProjectionMatrix, ProjectionMeta};
use crate::numerics::RngStream;
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 1000;

/// Random biregular 0-1 matrix: every column has `d` ones, every row has
/// `c = N d / M` ones, no repeated edges.
///
/// Columns are wired one at a time, each picking `d` distinct rows with
/// probability proportional to the rows' remaining capacity. An attempt
/// that runs out of admissible rows is discarded and restarted.
pub fn expander_projection(
    m: usize,
    n: usize,
    d: usize,
    rng: &mut RngStream,
) -> Result<ProjectionMatrix> {
    if m == 0 || m > n || d == 0 || d > m {
        return Err(Error::domain(format!(
            "expander needs 1 <= d <= M <= N, got M={m}, N={n}, d={d}"
        )));
    }
    if (n * d) % m != 0 {
        return Err(Error::domain(format!("N d = {} is not divisible by M = {m}", n * d)));
    }
    let c = n * d / m;
    let meta = ProjectionMeta {
        column_degree: Some(d),
        row_degree: Some(c),
        seed: Some(rng.root_seed()),
    };

    let mut cap = vec![0usize; m];
    let mut chosen = Vec::with_capacity(d);
    for _ in 0..MAX_ATTEMPTS {
        let mut e = vec![0.0; m * n];
        cap.iter_mut().for_each(|x| *x = c);
        let mut remaining = n * d;
        let mut ok = true;
        'cols: for j in 0..n {
            chosen.clear();
            for _ in 0..d {
                let pool: usize = remaining - chosen.iter().map(|&i| cap[i]).sum::<usize>();
                if pool == 0 {
                    ok = false;
                    break 'cols;
                }
                let mut ticket = rng.below(pool);
                let pick = (0..m)
                    .filter(|i| !chosen.contains(i))
                    .find(|&i| {
                        if ticket < cap[i] {
                            true
                        } else {
                            ticket -= cap[i];
                            false
                        }
                    })
                    .expect("ticket lies inside the pool");
                chosen.push(pick);
            }
            for &i in &chosen {
                cap[i] -= 1;
                remaining -= 1;
                e[i * n + j] = 1.0;
            }
        }
        if !ok {
            continue;
        }
        match ProjectionMatrix::new(m, n, e, ProjectionKind::Expander, meta) {
            Ok(a) => return Ok(a),
            Err(Error::NotPositiveDefinite { .. }) => continue,
            Err(other) => return Err(other),
        }
    }
    Err(Error::Construction {
        what: "expander projection",
        retries: MAX_ATTEMPTS,
    })
}
