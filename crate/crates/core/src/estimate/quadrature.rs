//! Brute-force simplex quadrature for small K.
//!
//! The (K−1)-simplex, in the coordinate patch `θ_1..θ_{K−1}` with
//! `θ_K = 1 − Σ`, is mapped by the unit-determinant linear map
//! `x_j = Σ_{i≥j} θ_i` onto the ordered simplex `1 ≥ x_1 ≥ … ≥ x_d ≥ 0`.
//! Scaled by `n`, that region is an exact union of `n^d` Freudenthal (Kuhn)
//! lattice simplices of equal volume `1/(d! n^d)`. The rule evaluates the
//! integrand once at each cell centroid.
//!
//! Centroid evaluation never touches the boundary, so integrands with
//! `θ_k^{a−1}`, `a < 1`, stay finite. For smooth integrands the error is
//! O(n⁻²); boundary singularities of order `a − 1 > −1` slow this to O(n^{−a}).
//! Cells are visited in a fixed lexicographic order so results are
//! reproducible bit for bit.

use crate::density::Potential;
use crate::error::{Error, Result};
use crate::prior::Hyperparams;
use crate::stats::SufficientStatistics;

/// Largest K handled by the quadrature routines.
pub const MAX_QUADRATURE_K: usize = 4;
/// Smallest accepted number of subdivisions per edge.
pub const MIN_GRID_N: usize = 50;

/// Centroid grid over the d-simplex (points have d+1 barycentric entries).
#[derive(Debug, Clone, Copy)]
pub struct SimplexGrid {
    dim: usize,
    n: usize,
}

impl SimplexGrid {
    pub fn new(dim: usize, n: usize) -> Self {
        assert!(n >= 1);
        SimplexGrid { dim, n }
    }

    /// Number of cells, `n^d`.
    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// `log(1 / (d! n^d))`: the coordinate-patch volume of one cell.
    pub fn log_cell_volume(&self) -> f64 {
        let d = self.dim as f64;
        -(ln_factorial(self.dim) + d * (self.n as f64).ln())
    }

    /// Calls `f` with each cell centroid as a full barycentric point.
    pub fn for_each(&self, mut f: impl FnMut(&[f64])) {
        let d = self.dim;
        if d == 0 {
            f(&[1.0]);
            return;
        }
        let perms = permutations(d);
        let inv_n = 1.0 / self.n as f64;
        let mut z = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut point = vec![0.0; d + 1];
        loop {
            for perm in &perms {
                // i before i+1 in perm whenever z_i == z_{i+1}
                let valid = (0..d - 1).all(|i| z[i] != z[i + 1] || perm.pos[i] < perm.pos[i + 1]);
                if !valid {
                    continue;
                }
                for (j, xj) in x.iter_mut().enumerate() {
                    let offset = (d - perm.pos[j]) as f64 / (d + 1) as f64;
                    *xj = (z[j] as f64 + offset) * inv_n;
                }
                for j in 0..d - 1 {
                    point[j] = x[j] - x[j + 1];
                }
                point[d - 1] = x[d - 1];
                point[d] = 1.0 - x[0];
                f(&point);
            }
            if !next_nonincreasing(&mut z, self.n - 1) {
                break;
            }
        }
    }
}

struct Perm {
    /// pos[i] = rank of axis i in the Kuhn ordering.
    pos: Vec<usize>,
}

fn permutations(d: usize) -> Vec<Perm> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Perm>) {
        let d = used.len();
        if prefix.len() == d {
            let mut pos = vec![0; d];
            for (rank, &axis) in prefix.iter().enumerate() {
                pos[axis] = rank;
            }
            out.push(Perm { pos });
            return;
        }
        for a in 0..d {
            if !used[a] {
                used[a] = true;
                prefix.push(a);
                rec(prefix, used, out);
                prefix.pop();
                used[a] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

/// Advances `z` to the next non-increasing sequence with entries ≤ max,
/// in lexicographic order. Returns false after the last one.
fn next_nonincreasing(z: &mut [usize], max: usize) -> bool {
    let d = z.len();
    // Find the rightmost position that can be incremented.
    for i in (0..d).rev() {
        let cap = if i == 0 { max } else { z[i - 1] };
        if z[i] < cap {
            z[i] += 1;
            for v in z.iter_mut().skip(i + 1) {
                *v = 0;
            }
            return true;
        }
    }
    false
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

pub(crate) fn check_quadrature(k: usize, grid_n: usize) -> Result<()> {
    if k > MAX_QUADRATURE_K {
        return Err(Error::Unsupported(format!(
            "quadrature supports K ≤ {MAX_QUADRATURE_K}, got K={k}"
        )));
    }
    if k < 2 {
        return Err(Error::Unsupported("quadrature needs K ≥ 2".into()));
    }
    if grid_n < MIN_GRID_N {
        return Err(Error::InvalidArgument(format!(
            "grid_n must be ≥ {MIN_GRID_N}, got {grid_n}"
        )));
    }
    Ok(())
}

/// `log ∫_Δ exp φ` for an arbitrary potential (no dimension guard).
pub(crate) fn log_integral(p: &Potential, grid_n: usize) -> f64 {
    let grid = SimplexGrid::new(p.k() - 1, grid_n);
    let mut vals = Vec::with_capacity(grid.cells());
    grid.for_each(|t| vals.push(p.eval(t)));
    log_sum_exp(&vals) + grid.log_cell_volume()
}

pub(crate) type ThetaFn<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Posterior expectations of each function in `fs`.
pub(crate) fn expectations(p: &Potential, grid_n: usize, fs: &[ThetaFn<'_>]) -> Vec<f64> {
    let grid = SimplexGrid::new(p.k() - 1, grid_n);
    let mut vals = Vec::with_capacity(grid.cells());
    grid.for_each(|t| vals.push(p.eval(t)));
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut acc = vec![0.0; fs.len()];
    let mut i = 0;
    grid.for_each(|t| {
        let w = (vals[i] - m).exp();
        i += 1;
        z += w;
        for (a, f) in acc.iter_mut().zip(fs) {
            *a += w * f(t);
        }
    });
    acc.into_iter().map(|a| a / z).collect()
}

fn log_sum_exp(vals: &[f64]) -> f64 {
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Log normalizer `log ∫_Δ exp φ(θ) dθ_1…dθ_{K−1}` by centroid quadrature.
pub fn exact_log_normalizer_small(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    grid_n: usize,
) -> Result<f64> {
    check_quadrature(hyper.k(), grid_n)?;
    let p = Potential::posterior(stats, hyper)?;
    Ok(log_integral(&p, grid_n))
}

/// Posterior mean of θ by quadrature.
pub fn quadrature_posterior_mean(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    grid_n: usize,
) -> Result<Vec<f64>> {
    check_quadrature(hyper.k(), grid_n)?;
    let p = Potential::posterior(stats, hyper)?;
    let fs: Vec<_> = (0..p.k()).map(|k| move |t: &[f64]| t[k]).collect();
    let refs: Vec<ThetaFn> = fs.iter().map(|f| f as ThetaFn).collect();
    Ok(expectations(&p, grid_n, &refs))
}

/// Posterior marginal density of `θ_coord` at `t ∈ (0, 1)`, integrating the
/// remaining coordinates over the slice `(1−t)·Δ`.
pub fn marginal_density(
    stats: &SufficientStatistics,
    hyper: &Hyperparams,
    coord: usize,
    t: f64,
    grid_n: usize,
) -> Result<f64> {
    let log_z = exact_log_normalizer_small(stats, hyper, grid_n)?;
    let k = hyper.k();
    if coord >= k {
        return Err(Error::InvalidArgument(format!("coordinate {coord} out of range")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must lie in (0, 1)")));
    }
    let p = Potential::posterior(stats, hyper)?;
    let grid = SimplexGrid::new(k - 2, grid_n);
    let mut theta = vec![0.0; k];
    let mut vals = Vec::with_capacity(grid.cells());
    grid.for_each(|u| {
        let mut it = u.iter();
        for (i, th) in theta.iter_mut().enumerate() {
            *th = if i == coord { t } else { (1.0 - t) * it.next().unwrap() };
        }
        vals.push(p.eval(&theta));
    });
    let log_slice = log_sum_exp(&vals) + grid.log_cell_volume() + (k as f64 - 2.0) * (1.0 - t).ln();
    Ok((log_slice - log_z).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{ChoiceRecord, Presentation};
    use statrs::function::gamma::ln_gamma;

    fn pair_stats() -> SufficientStatistics {
        let c = Presentation::new([0, 1], 3).unwrap();
        let mut s = SufficientStatistics::new(3);
        for i in 0..15 {
            s.record_choice(&ChoiceRecord::new(c.clone(), usize::from(i >= 10)).unwrap()).unwrap();
        }
        s
    }

    fn ln_beta(a: &[f64]) -> f64 {
        a.iter().map(|&x| ln_gamma(x)).sum::<f64>() - ln_gamma(a.iter().sum())
    }

    #[test]
    fn grid_tiles_the_simplex() {
        for (d, n) in [(1, 7), (2, 5), (3, 4), (3, 9)] {
            let g = SimplexGrid::new(d, n);
            let mut count = 0;
            g.for_each(|p| {
                count += 1;
                assert!(p.iter().all(|&x| x > 0.0));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            });
            assert_eq!(count, g.cells());
            let total = (g.log_cell_volume()).exp() * count as f64;
            let expected = (-ln_factorial(d)).exp();
            assert!((total - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_rule_integrates_linear_functions_exactly() {
        // ∫ θ_1 over the 2-simplex patch is 1/6.
        let g = SimplexGrid::new(2, 13);
        let mut acc = 0.0;
        g.for_each(|p| acc += p[0]);
        assert!((acc * g.log_cell_volume().exp() - 1.0 / 6.0).abs() < 1e-13);
    }

    #[test]
    fn flat_prior_area() {
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        let v = exact_log_normalizer_small(&SufficientStatistics::new(3), &h, 400).unwrap();
        assert!((v - 0.5f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn dirichlet_normalizer_is_beta_function() {
        let a = [2.0, 1.0, 1.0];
        let h = Hyperparams::dirichlet(a.to_vec()).unwrap();
        let v = exact_log_normalizer_small(&SufficientStatistics::new(3), &h, 400).unwrap();
        assert!((v - ln_beta(&a)).abs() < 1e-3);
        assert!((ln_beta(&a) - (1.0f64 / 6.0).ln()).abs() < 1e-12);

        let a = [2.0, 3.0, 2.0, 4.0];
        let h = Hyperparams::dirichlet(a.to_vec()).unwrap();
        let v = exact_log_normalizer_small(&SufficientStatistics::new(4), &h, 100).unwrap();
        assert!((v - ln_beta(&a)).abs() < 1e-3, "{v} vs {}", ln_beta(&a));
    }

    #[test]
    fn self_convergence_on_pair_stats() {
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        let a = exact_log_normalizer_small(&pair_stats(), &h, 200).unwrap();
        let b = exact_log_normalizer_small(&pair_stats(), &h, 400).unwrap();
        assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        // Closed form: ∫ r^10 (1−r)^5 s ds dr = B(11, 6) / 2.
        let exact = ln_beta(&[11.0, 6.0]) - 2f64.ln();
        assert!((b - exact).abs() < 1e-4);
    }

    #[test]
    fn dimension_and_grid_guards() {
        let h = Hyperparams::symmetric(5, 1.0).unwrap();
        assert!(matches!(
            exact_log_normalizer_small(&SufficientStatistics::new(5), &h, 100),
            Err(Error::Unsupported(_))
        ));
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        assert!(exact_log_normalizer_small(&SufficientStatistics::new(3), &h, 10).is_err());
    }

    #[test]
    fn unexplored_option_keeps_prior_marginal() {
        let h = Hyperparams::symmetric(3, 1.0).unwrap();
        for t in [0.05, 0.2, 0.5, 0.8] {
            let d = marginal_density(&pair_stats(), &h, 2, t, 400).unwrap();
            let beta12 = 2.0 * (1.0 - t);
            assert!((d - beta12).abs() < 1e-3, "t={t}: {d} vs {beta12}");
        }
    }
}
