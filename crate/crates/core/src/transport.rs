//! Transport distances and divergences: exact empirical Wasserstein-2 via an
//! assignment solver, and closed forms for Gaussian laws (W2, KL, grid L1).

use crate::error::{KinError, Result};
use crate::gaussian::{psd_sqrt, GaussianLaw};
use nalgebra::DMatrix;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Documented practical cap for the exact assignment solver.
pub const ASSIGNMENT_CAP: usize = 8192;

/// Equal-weight point cloud in R^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCloud {
    pub n: usize,
    pub dim: usize,
    /// Row-major `n x dim`.
    pub points: Vec<f64>,
}

impl EmpiricalCloud {
    pub fn new(n: usize, dim: usize, points: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(KinError::Dimension("empty cloud".into()));
        }
        if points.len() != n * dim {
            return Err(KinError::Dimension(format!(
                "expected {} coordinates, got {}",
                n * dim,
                points.len()
            )));
        }
        if !points.iter().all(|v| v.is_finite()) {
            return Err(KinError::Numerical("non-finite cloud entries".into()));
        }
        Ok(EmpiricalCloud { n, dim, points })
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

/// Optimal plan between equal-size clouds: squared-W2 cost and the optimal
/// permutation (row i of `a` matched to `assignment[i]` of `b`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlanResult {
    /// Mean squared distance along the assignment, i.e. W2².
    pub cost: f64,
    pub assignment: Vec<usize>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Exact W2² between equal-size equal-weight clouds. The optimal coupling is
/// a permutation, found by shortest augmenting paths with dual potentials.
pub fn w2_empirical(a: &EmpiricalCloud, b: &EmpiricalCloud) -> Result<TransportPlanResult> {
    if a.n != b.n {
        return Err(KinError::Dimension(format!(
            "cloud sizes differ: {} vs {}",
            a.n, b.n
        )));
    }
    if a.dim != b.dim {
        return Err(KinError::Dimension(format!(
            "cloud dimensions differ: {} vs {}",
            a.dim, b.dim
        )));
    }
    if a.n > ASSIGNMENT_CAP {
        return Err(KinError::Dimension(format!(
            "cloud size {} exceeds assignment cap {ASSIGNMENT_CAP}",
            a.n
        )));
    }
    let n = a.n;
    if a.dim == 1 {
        // in one dimension the optimal quadratic matching pairs order
        // statistics: sort both clouds and match in rank order
        let by_coord = |cloud: &EmpiricalCloud| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&i, &j| cloud.points[i].total_cmp(&cloud.points[j]));
            idx
        };
        let ia = by_coord(a);
        let ib = by_coord(b);
        let mut assignment = vec![0usize; n];
        let mut total = 0.0;
        for k in 0..n {
            assignment[ia[k]] = ib[k];
            let diff = a.points[ia[k]] - b.points[ib[k]];
            total += diff * diff;
        }
        return Ok(TransportPlanResult {
            cost: total / n as f64,
            assignment,
        });
    }
    let mut cost = vec![0.0f64; n * n];
    #[cfg(feature = "parallel")]
    cost.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let pi = a.point(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = sq_dist(pi, b.point(j));
        }
    });
    #[cfg(not(feature = "parallel"))]
    for (i, row) in cost.chunks_mut(n).enumerate() {
        let pi = a.point(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = sq_dist(pi, b.point(j));
        }
    }
    let assignment = solve_assignment(&cost, n);
    let total: f64 = (0..n).map(|i| cost[i * n + assignment[i]]).sum();
    Ok(TransportPlanResult {
        cost: total / n as f64,
        assignment,
    })
}

/// Dense shortest-augmenting-path assignment with Jonker-Volgenant
/// preprocessing (column reduction, reduction transfer, augmenting row
/// reduction), so only a small remainder of rows needs a full Dijkstra
/// search. Returns `perm` with row i assigned to column perm[i].
// index-based loops mirror the published algorithm, where `up` and the
// scanned prefix of `collist` move inside the loops they bound
#[allow(clippy::mut_range_bound, clippy::needless_range_loop)]
pub fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    const FREE: usize = usize::MAX;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![0];
    }
    let c = |i: usize, j: usize| cost[i * n + j];
    let mut x = vec![FREE; n]; // row -> col
    let mut y = vec![FREE; n]; // col -> row
    let mut v = vec![0.0f64; n];

    // column reduction: dual v[j] = column minimum; assign where unique
    let mut matches = vec![0usize; n];
    for j in (0..n).rev() {
        let mut imin = 0;
        let mut min = c(0, j);
        for i in 1..n {
            let h = c(i, j);
            if h < min {
                min = h;
                imin = i;
            }
        }
        v[j] = min;
        matches[imin] += 1;
        if matches[imin] == 1 {
            x[imin] = j;
            y[j] = imin;
        }
    }

    // reduction transfer: rows with a single assignment push slack onto v
    let mut free_rows: Vec<usize> = Vec::new();
    for i in 0..n {
        if matches[i] == 0 {
            free_rows.push(i);
        } else if matches[i] == 1 {
            let j1 = x[i];
            let mut min = f64::INFINITY;
            for j in 0..n {
                if j != j1 {
                    let r = c(i, j) - v[j];
                    if r < min {
                        min = r;
                    }
                }
            }
            v[j1] -= min;
        }
    }

    // augmenting row reduction, two passes: assign free rows to their best
    // column, displacing the previous owner when the second-best has slack
    for _ in 0..2 {
        let mut cur = std::mem::take(&mut free_rows);
        let nf = cur.len();
        let mut k = 0;
        // each iteration is O(n), so a generous budget is still cheap next
        // to the O(n^2) shortest-path augmentations it avoids; it is only a
        // backstop, the float-aware dual test below prevents true cycling
        let mut budget = 64 * nf + 16;
        while k < nf {
            if budget == 0 {
                free_rows.extend_from_slice(&cur[k..nf]);
                break;
            }
            budget -= 1;
            let i = cur[k];
            k += 1;
            let mut u1 = c(i, 0) - v[0];
            let mut j1 = 0usize;
            let mut u2 = f64::INFINITY;
            let mut j2 = 0usize;
            for j in 1..n {
                let h = c(i, j) - v[j];
                if h < u2 {
                    if h >= u1 {
                        u2 = h;
                        j2 = j;
                    } else {
                        u2 = u1;
                        j2 = j1;
                        u1 = h;
                        j1 = j;
                    }
                }
            }
            let mut jbest = j1;
            let mut i0 = y[j1];
            // require the dual decrease to move v[j1] as a float; comparing
            // u1 < u2 alone can loop forever once u2 - u1 underflows next to v
            let v1_new = v[j1] - (u2 - u1);
            let lowers = v1_new < v[j1];
            if lowers {
                v[j1] = v1_new;
            } else if i0 != FREE {
                jbest = j2;
                i0 = y[j2];
            }
            if i0 != FREE {
                if lowers {
                    // revisit the displaced row immediately
                    k -= 1;
                    cur[k] = i0;
                } else {
                    free_rows.push(i0);
                }
            }
            x[i] = jbest;
            y[jbest] = i;
        }
    }

    // augmentation: shortest augmenting path for each remaining free row
    let mut d = vec![0.0f64; n];
    let mut pred = vec![0usize; n];
    let mut collist: Vec<usize> = (0..n).collect();
    for f in free_rows {
        for j in 0..n {
            d[j] = c(f, j) - v[j];
            pred[j] = f;
            collist[j] = j;
        }
        let mut low = 0usize; // [0, low): scanned, [low, up): at current min
        let mut up = 0usize;
        let mut last = 0usize;
        let mut min = 0.0f64;
        let endofpath;
        'search: loop {
            if up == low {
                last = low;
                min = d[collist[up]];
                up += 1;
                for k in up..n {
                    let j = collist[k];
                    let h = d[j];
                    if h <= min {
                        if h < min {
                            up = low;
                            min = h;
                        }
                        collist[k] = collist[up];
                        collist[up] = j;
                        up += 1;
                    }
                }
                for k in low..up {
                    let j = collist[k];
                    if y[j] == FREE {
                        endofpath = j;
                        break 'search;
                    }
                }
            }
            let j1 = collist[low];
            low += 1;
            let i = y[j1];
            let h0 = c(i, j1) - v[j1] - min;
            for k in up..n {
                let j = collist[k];
                let h = c(i, j) - v[j] - h0;
                if h < d[j] {
                    pred[j] = i;
                    if h == min {
                        if y[j] == FREE {
                            d[j] = h;
                            endofpath = j;
                            break 'search;
                        }
                        collist[k] = collist[up];
                        collist[up] = j;
                        up += 1;
                    }
                    d[j] = h;
                }
            }
        }
        // dual update over scanned columns, then flip the alternating path
        for k in 0..last {
            let j = collist[k];
            v[j] += d[j] - min;
        }
        let mut j = endofpath;
        loop {
            let i = pred[j];
            y[j] = i;
            std::mem::swap(&mut x[i], &mut j);
            if i == f {
                break;
            }
        }
    }
    x
}

/// Cost of a given permutation (mean squared distance); used as an upper
/// bound oracle for the optimal plan.
pub fn permutation_cost(a: &EmpiricalCloud, b: &EmpiricalCloud, perm: &[usize]) -> f64 {
    let total: f64 = (0..a.n).map(|i| sq_dist(a.point(i), b.point(perm[i]))).sum();
    total / a.n as f64
}

/// Closed-form W2 between Gaussian laws:
/// `sqrt(|m1-m2|^2 + tr(S1 + S2 - 2 (S2^{1/2} S1 S2^{1/2})^{1/2}))`.
pub fn w2_gaussian(g1: &GaussianLaw, g2: &GaussianLaw) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(KinError::Dimension("gaussian dimensions differ".into()));
    }
    let mean_sq = (&g1.mean - &g2.mean).norm_squared();
    let r2 = g2.cov_sqrt();
    let inner = &r2 * &g1.cov * &r2;
    let cross = psd_sqrt(&inner);
    let bures = g1.cov.trace() + g2.cov.trace() - 2.0 * cross.trace();
    Ok((mean_sq + bures.max(0.0)).sqrt())
}

/// Relative entropy KL(g1 || g2) in nats:
/// `0.5 (tr(S2^{-1} S1) + (m2-m1)' S2^{-1} (m2-m1) - k + ln det S2 / det S1)`.
pub fn kl_gaussian(g1: &GaussianLaw, g2: &GaussianLaw) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(KinError::Dimension("gaussian dimensions differ".into()));
    }
    let k = g1.dim();
    let chol2 = g2
        .cov
        .clone()
        .cholesky()
        .ok_or_else(|| KinError::Numerical("singular covariance in KL target".into()))?;
    let logdet2: f64 = 2.0 * chol2.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let logdet1 = match g1.cov.clone().cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
        None => return Ok(f64::INFINITY),
    };
    let trace = chol2.solve(&g1.cov).trace();
    let diff = &g2.mean - &g1.mean;
    let quad = diff.dot(&chol2.solve(&diff));
    Ok(0.5 * (trace + quad - k as f64 + logdet2 - logdet1))
}

/// Grid specification for the L1 quadrature.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    /// Per-axis half width in standard deviations around each mean.
    pub half_width_stds: f64,
    /// Midpoint-rule resolution per axis.
    pub points_per_axis: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            half_width_stds: 8.0,
            points_per_axis: 2048,
        }
    }
}

/// L1 distance between the two densities, `∫ |ρ1 - ρ2|`, by the midpoint
/// rule on a tensor grid. Convention: L1 of densities, maximum value 2
/// (twice the total variation distance). Dimensions 1 and 2 only.
pub fn l1_gaussian_grid(g1: &GaussianLaw, g2: &GaussianLaw, grid: GridSpec) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(KinError::Dimension("gaussian dimensions differ".into()));
    }
    let k = g1.dim();
    if k == 0 || k > 2 {
        return Err(KinError::Dimension(format!(
            "L1 grid quadrature supports dimensions 1 and 2, got {k}"
        )));
    }
    let d1 = DensityEval::new(g1)?;
    let d2 = DensityEval::new(g2)?;
    let mut lo = vec![0.0; k];
    let mut hi = vec![0.0; k];
    for ax in 0..k {
        let s1 = g1.cov[(ax, ax)].sqrt();
        let s2 = g2.cov[(ax, ax)].sqrt();
        lo[ax] = (g1.mean[ax] - grid.half_width_stds * s1).min(g2.mean[ax] - grid.half_width_stds * s2);
        hi[ax] = (g1.mean[ax] + grid.half_width_stds * s1).max(g2.mean[ax] + grid.half_width_stds * s2);
    }
    let m = grid.points_per_axis;
    let mut total = 0.0;
    match k {
        1 => {
            let h = (hi[0] - lo[0]) / m as f64;
            for i in 0..m {
                let x = [lo[0] + (i as f64 + 0.5) * h];
                total += (d1.eval(&x) - d2.eval(&x)).abs() * h;
            }
        }
        _ => {
            let hx = (hi[0] - lo[0]) / m as f64;
            let hy = (hi[1] - lo[1]) / m as f64;
            let cell = hx * hy;
            let row_sum = |i: usize| -> f64 {
                let x0 = lo[0] + (i as f64 + 0.5) * hx;
                let mut s = 0.0;
                for j in 0..m {
                    let p = [x0, lo[1] + (j as f64 + 0.5) * hy];
                    s += (d1.eval(&p) - d2.eval(&p)).abs();
                }
                s * cell
            };
            #[cfg(feature = "parallel")]
            {
                let rows: Vec<f64> = (0..m).into_par_iter().map(row_sum).collect();
                total = rows.iter().sum();
            }
            #[cfg(not(feature = "parallel"))]
            {
                total = (0..m).map(row_sum).sum();
            }
        }
    }
    Ok(total)
}

/// Precomputed Gaussian density evaluator (dimensions 1-2).
struct DensityEval {
    mean: Vec<f64>,
    prec: DMatrix<f64>,
    norm: f64,
}

impl DensityEval {
    fn new(g: &GaussianLaw) -> Result<Self> {
        let k = g.dim();
        let chol = g
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| KinError::Numerical("singular covariance in L1 quadrature".into()))?;
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let prec = chol.inverse();
        let norm = (-0.5 * (k as f64) * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet).exp();
        Ok(DensityEval {
            mean: g.mean.as_slice().to_vec(),
            prec,
            norm,
        })
    }

    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        let k = self.mean.len();
        let mut quad = 0.0;
        for i in 0..k {
            for j in 0..k {
                quad += (x[i] - self.mean[i]) * self.prec[(i, j)] * (x[j] - self.mean[j]);
            }
        }
        self.norm * (-0.5 * quad).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseStream;
    use approx::assert_relative_eq;

    fn cloud_from(points: &[&[f64]]) -> EmpiricalCloud {
        let dim = points[0].len();
        let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
        EmpiricalCloud::new(points.len(), dim, flat).unwrap()
    }

    fn random_cloud(n: usize, dim: usize, seed: u64) -> EmpiricalCloud {
        let ns = NoiseStream::new(seed);
        let points: Vec<f64> = (0..n * dim)
            .map(|k| ns.standard_normal(0, 0, 0, k as u64))
            .collect();
        EmpiricalCloud::new(n, dim, points).unwrap()
    }

    /// Factorial enumeration oracle for tiny clouds.
    fn brute_force_w2(a: &EmpiricalCloud, b: &EmpiricalCloud) -> f64 {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for pos in 0..n {
                    let mut q = p.to_vec();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        permutations(a.n)
            .into_iter()
            .map(|p| permutation_cost(a, b, &p))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn single_point_cost() {
        let a = cloud_from(&[&[1.0, 2.0]]);
        let b = cloud_from(&[&[4.0, 6.0]]);
        let r = w2_empirical(&a, &b).unwrap();
        assert_relative_eq!(r.cost, 25.0, max_relative = 1e-14);
    }

    #[test]
    fn shuffled_identical_clouds_zero() {
        let a = cloud_from(&[&[0.0], &[1.0], &[2.0], &[3.0]]);
        let b = cloud_from(&[&[3.0], &[1.0], &[0.0], &[2.0]]);
        let r = w2_empirical(&a, &b).unwrap();
        assert!(r.cost.abs() < 1e-14, "cost {}", r.cost);
    }

    #[test]
    fn matches_brute_force_small() {
        for n in 2..=6 {
            for trial in 0..5u64 {
                let a = random_cloud(n, 2, 100 + trial * 10 + n as u64);
                let b = random_cloud(n, 2, 200 + trial * 10 + n as u64);
                let exact = brute_force_w2(&a, &b);
                let r = w2_empirical(&a, &b).unwrap();
                assert_relative_eq!(r.cost, exact, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn cost_consistent_with_assignment() {
        let a = random_cloud(12, 3, 1);
        let b = random_cloud(12, 3, 2);
        let r = w2_empirical(&a, &b).unwrap();
        assert_relative_eq!(r.cost, permutation_cost(&a, &b, &r.assignment), epsilon = 1e-12);
        // assignment is a permutation
        let mut seen = [false; 12];
        for &j in &r.assignment {
            assert!(!seen[j]);
            seen[j] = true;
        }
    }

    #[test]
    fn optimality_vs_identity() {
        for trial in 0..20u64 {
            let n = 3 + (trial as usize % 30);
            let a = random_cloud(n, 2, 300 + trial);
            let b = random_cloud(n, 2, 400 + trial);
            let r = w2_empirical(&a, &b).unwrap();
            let id: Vec<usize> = (0..n).collect();
            let id_cost = permutation_cost(&a, &b, &id);
            assert!(r.cost <= id_cost + 1e-12 * id_cost.max(1.0));
        }
    }

    #[test]
    fn size_mismatch_rejected() {
        let a = random_cloud(3, 1, 1);
        let b = random_cloud(4, 1, 2);
        assert!(w2_empirical(&a, &b).is_err());
    }

    #[test]
    fn w2_gaussian_trivia() {
        let g1 = GaussianLaw::diagonal(vec![0.0], vec![1.0]);
        let g2 = GaussianLaw::diagonal(vec![0.0], vec![4.0]);
        assert_relative_eq!(w2_gaussian(&g1, &g1).unwrap(), 0.0, epsilon = 1e-12);
        // 1D formula |s1 - s2|
        assert_relative_eq!(w2_gaussian(&g1, &g2).unwrap(), 1.0, epsilon = 1e-12);
        // mean shift only
        let g3 = GaussianLaw::diagonal(vec![3.0], vec![1.0]);
        assert_relative_eq!(w2_gaussian(&g1, &g3).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kl_gaussian_values() {
        let g1 = GaussianLaw::diagonal(vec![0.0], vec![1.0]);
        assert_relative_eq!(kl_gaussian(&g1, &g1).unwrap(), 0.0, epsilon = 1e-12);
        let g2 = GaussianLaw::diagonal(vec![0.0], vec![2.0]);
        let expect = 0.5 * (0.5 - 1.0 + 2.0f64.ln());
        assert_relative_eq!(kl_gaussian(&g1, &g2).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn kl_matches_quadrature() {
        // numeric quadrature of ρ1 ln(ρ1/ρ2) as independent oracle
        let g1 = GaussianLaw::diagonal(vec![0.3], vec![0.8]);
        let g2 = GaussianLaw::diagonal(vec![-0.2], vec![1.5]);
        let h = 2e-4;
        let mut kl = 0.0;
        let mut x = -20.0 + 0.5 * h;
        while x < 20.0 {
            let p = g1.density(&[x]).unwrap();
            let q = g2.density(&[x]).unwrap();
            if p > 0.0 && q > 0.0 {
                kl += p * (p / q).ln() * h;
            }
            x += h;
        }
        assert_relative_eq!(kl_gaussian(&g1, &g2).unwrap(), kl, epsilon = 1e-6);
    }

    #[test]
    fn kl_tensorizes() {
        let g1 = GaussianLaw::diagonal(vec![0.1, -0.4], vec![0.9, 1.1]);
        let g2 = GaussianLaw::diagonal(vec![0.0, 0.0], vec![1.0, 1.0]);
        let kl1 = kl_gaussian(&g1, &g2).unwrap();
        let n = 5;
        let kln = kl_gaussian(&g1.tensor_power(n), &g2.tensor_power(n)).unwrap();
        assert_relative_eq!(kln, n as f64 * kl1, epsilon = 1e-10);
    }

    #[test]
    fn kl_nonnegative() {
        let ns = NoiseStream::new(17);
        for trial in 0..50u64 {
            let m1 = ns.standard_normal(0, trial, 0, 0);
            let m2 = ns.standard_normal(0, trial, 0, 1);
            let s1 = 0.2 + ns.uniform(0, trial, 0, 2) * 3.0;
            let s2 = 0.2 + ns.uniform(0, trial, 0, 3) * 3.0;
            let g1 = GaussianLaw::diagonal(vec![m1], vec![s1]);
            let g2 = GaussianLaw::diagonal(vec![m2], vec![s2]);
            let kl = kl_gaussian(&g1, &g2).unwrap();
            assert!(kl >= -1e-10);
            if (m1 - m2).abs() < 1e-12 && (s1 - s2).abs() < 1e-12 {
                assert!(kl < 1e-10);
            }
        }
        let g = GaussianLaw::diagonal(vec![0.5], vec![0.7]);
        assert!(kl_gaussian(&g, &g).unwrap().abs() < 1e-10);
    }

    #[test]
    fn l1_self_distance_vanishes() {
        let g = GaussianLaw::diagonal(vec![0.3], vec![0.6]);
        let d = l1_gaussian_grid(&g, &g, GridSpec::default()).unwrap();
        assert!(d < 1e-8, "self distance {d}");
    }

    #[test]
    fn l1_disjoint_supports_saturates() {
        let g1 = GaussianLaw::diagonal(vec![0.0], vec![1.0]);
        let g2 = GaussianLaw::diagonal(vec![20.0], vec![1.0]);
        let d = l1_gaussian_grid(&g1, &g2, GridSpec::default()).unwrap();
        assert!((d - 2.0).abs() < 1e-6, "saturated distance {d}");
    }

    #[test]
    fn l1_2d_dimension_guard() {
        let g2 = GaussianLaw::diagonal(vec![0.0, 0.0], vec![1.0, 1.0]);
        let g3 = GaussianLaw::diagonal(vec![0.0; 3], vec![1.0; 3]);
        assert!(l1_gaussian_grid(&g2, &g2, GridSpec::default()).is_ok());
        assert!(l1_gaussian_grid(&g3, &g3, GridSpec::default()).is_err());
    }

    #[test]
    fn pinsker_inequality_on_random_pairs() {
        let ns = NoiseStream::new(23);
        let grid = GridSpec {
            half_width_stds: 10.0,
            points_per_axis: 4096,
        };
        for trial in 0..100u64 {
            let m = ns.standard_normal(1, trial, 0, 0);
            let s1 = 0.3 + 2.0 * ns.uniform(1, trial, 0, 1);
            let s2 = 0.3 + 2.0 * ns.uniform(1, trial, 0, 2);
            let g1 = GaussianLaw::diagonal(vec![m], vec![s1]);
            let g2 = GaussianLaw::diagonal(vec![0.0], vec![s2]);
            let l1 = l1_gaussian_grid(&g1, &g2, grid).unwrap();
            let kl = kl_gaussian(&g1, &g2).unwrap();
            assert!(
                l1 <= (2.0 * kl).sqrt() + 1e-9,
                "trial {trial}: l1 {l1} vs sqrt(2KL) {}",
                (2.0 * kl).sqrt()
            );
        }
    }
}
