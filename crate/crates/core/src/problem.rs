//! Loss problems and bound calculators: the structured quadratic benchmark,
//! its basis-rotated reduction that makes full-matrix AdaGrad affordable,
//! stochastic gradient noise, the cyclic worst-case gradient stream, and the
//! regret / convergence bound right-hand sides.

use crate::cone::{adaptive_norm_from_stat, domain_norm, stat_update, ConeSpec, GradStat};
use crate::error::{invalid, Result};
use crate::linalg::{Mat, PsdMatrix, SymMatrix};
use crate::rng::{stream, Role};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

/// Eigenvalue profile of the quadratic's curvature matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSpec {
    /// `σ_1..σ_10 = 1`, `σ_i = 1/(i-10)²` afterwards. Needs `d ≥ 11`.
    Paper,
    Explicit(Vec<f64>),
}

impl SpectrumSpec {
    pub fn values(&self, d: usize) -> Result<Vec<f64>> {
        match self {
            SpectrumSpec::Paper => {
                if d < 11 {
                    return Err(invalid(
                        "the built-in spectrum needs d >= 11; pass an explicit spectrum",
                    ));
                }
                Ok((1..=d)
                    .map(|i| {
                        if i <= 10 {
                            1.0
                        } else {
                            1.0 / ((i - 10) as f64).powi(2)
                        }
                    })
                    .collect())
            }
            SpectrumSpec::Explicit(v) => {
                if v.len() != d {
                    return Err(invalid("explicit spectrum length does not match d"));
                }
                if v.iter().any(|s| *s < 0.0 || !s.is_finite()) {
                    return Err(invalid("spectrum values must be finite and nonnegative"));
                }
                Ok(v.clone())
            }
        }
    }
}

/// `f(X) = ⟨H, (X - X*)(X - X*)ᵀ⟩` with `H = Uᵀ diag(σ) U` for a seeded
/// random orthogonal `U`. The eigensystem is cached on construction.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    d_left: usize,
    d_right: usize,
    hmat: PsdMatrix,
    xstar: Mat,
    /// Rows of `u` are the eigenvectors of `hmat`; `sigma[i]` the eigenvalue.
    u: Mat,
    sigma: Vec<f64>,
}

fn random_orthogonal(d: usize, seed: u64) -> Mat {
    let mut rng = stream(seed, Role::ProblemBasis);
    let gauss = DMatrix::from_fn(d, d, |_, _| {
        <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
    });
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Fix the gauge: make diag(R) positive so the factor is unique.
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            for i in 0..d {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Mat::from_fn(d, d, |i, j| q[(i, j)])
}

/// The benchmark problem: spectrum per `spectrum`, eigenbasis from a seeded
/// orthogonal matrix, and `X*` entries iid `N(0, 1/d_left)`.
pub fn build_problem(
    d_left: usize,
    d_right: usize,
    spectrum: &SpectrumSpec,
    seed: u64,
) -> Result<QuadraticProblem> {
    if d_left == 0 || d_right == 0 {
        return Err(invalid("problem dimensions must be at least 1"));
    }
    let sigma = spectrum.values(d_left)?;
    let u = random_orthogonal(d_left, seed);
    // H = Uᵀ diag(σ) U; eigenvector for σ_i is the i-th row of U.
    let vectors = u.transpose();
    let hmat = PsdMatrix::from_eigenpairs(sigma.clone(), vectors);
    let mut rng = stream(seed, Role::Solution);
    let normal = Normal::new(0.0, (1.0 / d_left as f64).sqrt()).expect("valid std");
    let xstar = Mat::from_fn(d_left, d_right, |_, _| normal.sample(&mut rng));
    // Keep (σ, U) in the order from_eigenpairs settled on.
    let sigma = hmat.eigenvalues().to_vec();
    let u = Mat::from_fn(d_left, d_left, |i, j| hmat.eig().vectors.get(j, i));
    Ok(QuadraticProblem { d_left, d_right, hmat, xstar, u, sigma })
}

/// The square `d × d` instance.
pub fn build_paper_problem(d: usize, seed: u64) -> Result<QuadraticProblem> {
    build_problem(d, d, &SpectrumSpec::Paper, seed)
}

impl QuadraticProblem {
    /// Assemble from explicit parts; the eigensystem comes from the cached
    /// decomposition of `hmat`.
    pub fn from_parts(hmat: PsdMatrix, xstar: Mat) -> Result<Self> {
        if hmat.dim() != xstar.rows() {
            return Err(invalid("curvature and solution shapes do not match"));
        }
        let sigma = hmat.eigenvalues().to_vec();
        let d = hmat.dim();
        let u = Mat::from_fn(d, d, |i, j| hmat.eig().vectors.get(j, i));
        Ok(QuadraticProblem {
            d_left: d,
            d_right: xstar.cols(),
            hmat,
            xstar,
            u,
            sigma,
        })
    }

    pub fn d_left(&self) -> usize {
        self.d_left
    }

    pub fn d_right(&self) -> usize {
        self.d_right
    }

    pub fn ambient_dim(&self) -> usize {
        self.d_left * self.d_right
    }

    pub fn hmat(&self) -> &PsdMatrix {
        &self.hmat
    }

    pub fn xstar(&self) -> &Mat {
        &self.xstar
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn loss(&self, x: &Mat) -> Result<f64> {
        Ok(self.loss_and_grad(x)?.0)
    }

    /// Loss value and gradient `∇f = 2 H (X - X*)`.
    pub fn loss_and_grad(&self, x: &Mat) -> Result<(f64, Mat)> {
        if x.rows() != self.d_left || x.cols() != self.d_right {
            return Err(invalid(format!(
                "point is {}x{}, problem is {}x{}",
                x.rows(),
                x.cols(),
                self.d_left,
                self.d_right
            )));
        }
        let diff = x.sub(&self.xstar);
        let hd = self.hmat.as_sym().to_mat().matmul(&diff);
        let loss: f64 = diff
            .as_slice()
            .iter()
            .zip(hd.as_slice())
            .map(|(a, b)| a * b)
            .sum();
        Ok((loss, hd.scale(2.0)))
    }
}

/// Gradient noise model (Assumption-style additive noise with a fixed
/// covariance).
#[derive(Debug, Clone)]
pub enum NoiseSpec {
    None,
    /// `Σ = v · I`.
    Isotropic { variance: f64 },
    /// Dense covariance with its square root precomputed.
    Dense { cov: PsdMatrix, sqrt: SymMatrix },
}

impl NoiseSpec {
    pub fn dense(cov: PsdMatrix) -> Self {
        let sqrt = cov.sqrt().as_sym().clone();
        NoiseSpec::Dense { cov, sqrt }
    }

    /// Dense covariance of ambient dimension `d`, when there is noise.
    pub fn covariance(&self, d: usize) -> Option<PsdMatrix> {
        match self {
            NoiseSpec::None => None,
            NoiseSpec::Isotropic { variance } => {
                Some(PsdMatrix::new(SymMatrix::identity(d).scale(*variance)).expect("PSD"))
            }
            NoiseSpec::Dense { cov, .. } => Some(cov.clone()),
        }
    }
}

/// `∇f(X) + Σ^{1/2} z` with standard normal `z`.
pub fn sample_stochastic_grad(
    p: &QuadraticProblem,
    x: &Mat,
    noise: &NoiseSpec,
    rng: &mut impl Rng,
) -> Result<Mat> {
    let (_, grad) = p.loss_and_grad(x)?;
    let d = p.ambient_dim();
    match noise {
        NoiseSpec::None => Ok(grad),
        NoiseSpec::Isotropic { variance } => {
            let s = variance.sqrt();
            let mut out = grad.into_vec();
            for v in out.iter_mut() {
                let z: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                *v += s * z;
            }
            Mat::from_vec(p.d_left, p.d_right, out)
        }
        NoiseSpec::Dense { sqrt, .. } => {
            if sqrt.dim() != d {
                return Err(invalid("noise covariance does not match ambient dimension"));
            }
            let z: Vec<f64> = (0..d)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
                .collect();
            let noise_vec = sqrt.apply(&z);
            let mut out = grad.into_vec();
            for (o, n) in out.iter_mut().zip(&noise_vec) {
                *o += n;
            }
            Mat::from_vec(p.d_left, p.d_right, out)
        }
    }
}

/// The `d_left`-variable problem equivalent to running full-matrix AdaGrad
/// on the original: after rotating into the curvature eigenbasis and aligning
/// each row with its first coordinate, only one coordinate per row ever
/// receives gradient. Loss traces agree exactly with the direct run.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    pub sigma: Vec<f64>,
    /// Row norms of `U (X* - X₀)`; coordinate targets of the live variables.
    pub v: Vec<f64>,
}

impl ReducedProblem {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn loss(&self, z: &[f64]) -> f64 {
        self.sigma
            .iter()
            .zip(&self.v)
            .zip(z)
            .map(|((s, v), zi)| s * (zi - v) * (zi - v))
            .sum()
    }

    pub fn loss_and_grad(&self, z: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; z.len()];
        let mut loss = 0.0;
        for i in 0..z.len() {
            let diff = z[i] - self.v[i];
            loss += self.sigma[i] * diff * diff;
            grad[i] = 2.0 * self.sigma[i] * diff;
        }
        (loss, grad)
    }
}

/// Build the reduction relative to a starting point. A zero row of
/// `U (X* - X₀)` yields `v_i = 0`; that coordinate receives zero gradient
/// forever, matching the direct run for any choice of distinguished
/// direction.
pub fn reduced_full_matrix_problem(p: &QuadraticProblem, x0: &Mat) -> Result<ReducedProblem> {
    if x0.rows() != p.d_left || x0.cols() != p.d_right {
        return Err(invalid("starting point shape mismatch"));
    }
    let diff = p.xstar.sub(x0);
    let rotated = p.u.matmul(&diff);
    let v = (0..p.d_left)
        .map(|i| {
            (0..p.d_right)
                .map(|j| rotated.get(i, j).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(ReducedProblem { sigma: p.sigma.clone(), v })
}

/// The cyclic rank-`min(d_L, d_R)` gradient stream: at step `t` (1-based),
/// `G_t[i,j] = 1` iff `(j - i) ≡ t (mod min(d_L, d_R))`. Length `d_L · d_R`.
pub fn make_cyclic_gradients(d_left: usize, d_right: usize) -> Vec<Mat> {
    let m = d_left.min(d_right) as i64;
    (1..=d_left * d_right)
        .map(|t| {
            Mat::from_fn(d_left, d_right, |i, j| {
                if (j as i64 - i as i64 - t as i64).rem_euclid(m) == 0 {
                    1.0
                } else {
                    0.0
                }
            })
        })
        .collect()
}

/// Convex per-round losses for the online verification instances.
#[derive(Debug, Clone)]
pub enum OnlineLoss {
    /// `L(x) = gᵀ x`.
    Linear(Vec<f64>),
    /// `L(x) = ½ xᵀ A x + bᵀ x` with `A ⪰ 0`.
    Quadratic { a: SymMatrix, b: Vec<f64> },
}

impl OnlineLoss {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            OnlineLoss::Linear(g) => g.iter().zip(x).map(|(a, b)| a * b).sum(),
            OnlineLoss::Quadratic { a, b } => {
                0.5 * x
                    .iter()
                    .zip(a.apply(x))
                    .map(|(xi, axi)| xi * axi)
                    .sum::<f64>()
                    + b.iter().zip(x).map(|(bi, xi)| bi * xi).sum::<f64>()
            }
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            OnlineLoss::Linear(g) => g.clone(),
            OnlineLoss::Quadratic { a, b } => a
                .apply(x)
                .iter()
                .zip(b)
                .map(|(ax, bi)| ax + bi)
                .collect(),
        }
    }
}

/// Minimizer of the summed losses, when the total curvature is invertible.
pub fn stream_minimizer(losses: &[OnlineLoss], dim: usize) -> Result<Vec<f64>> {
    let mut a_tot = SymMatrix::zeros(dim);
    let mut b_tot = vec![0.0; dim];
    for l in losses {
        match l {
            OnlineLoss::Linear(g) => {
                for (bt, gi) in b_tot.iter_mut().zip(g) {
                    *bt += gi;
                }
            }
            OnlineLoss::Quadratic { a, b } => {
                a_tot.add_scaled(a, 1.0);
                for (bt, bi) in b_tot.iter_mut().zip(b) {
                    *bt += bi;
                }
            }
        }
    }
    let psd = PsdMatrix::new(a_tot)?;
    let neg_b: Vec<f64> = b_tot.iter().map(|v| -v).collect();
    Ok(psd.pinv_apply(&neg_b))
}

/// Evaluation of the online regret bound on a realized trajectory.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `max_t ‖x_t - x*‖_H`.
    pub d_max: f64,
    /// Adaptive gradient norm of the realized stream (no ε term).
    pub g_norm: f64,
    pub rhs: f64,
    pub lhs: f64,
    /// `lhs ≤ rhs` up to a relative 1e-8 slack.
    pub holds: bool,
}

/// `(D²/2η + η)(G + d√ε)` against the realized regret
/// `Σ L_t(x_t) − Σ L_t(x*)`.
pub fn regret_bound_rhs(
    cone: &ConeSpec,
    iterates: &[Vec<f64>],
    xstar: &[f64],
    grads: &[Vec<f64>],
    losses: &[OnlineLoss],
    eta: f64,
    eps: f64,
) -> Result<BoundReport> {
    if iterates.len() != grads.len() || iterates.len() != losses.len() {
        return Err(invalid("trajectory, gradients and losses must have equal length"));
    }
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    let d = cone.ambient_dim();
    let mut d_max = 0.0f64;
    let mut stat = GradStat::new(cone, 0.0)?;
    let mut lhs = 0.0;
    for ((x, g), l) in iterates.iter().zip(grads).zip(losses) {
        let diff: Vec<f64> = x.iter().zip(xstar).map(|(a, b)| a - b).collect();
        d_max = d_max.max(domain_norm(cone, &diff)?);
        stat = stat_update(cone, &stat, g, 1.0)?;
        lhs += l.value(x) - l.value(xstar);
    }
    let g_norm = adaptive_norm_from_stat(cone, &stat)?;
    let rhs = (d_max * d_max / (2.0 * eta) + eta) * (g_norm + d as f64 * eps.sqrt());
    Ok(BoundReport { d_max, g_norm, rhs, lhs, holds: lhs <= rhs + 1e-8 * rhs.abs() })
}

/// The two-sided regret bound value
/// `(D_F²/2η + rη) · Tr(L_T^{1/4}) · Tr(R_T^{1/4})`.
pub fn two_sided_bound_rhs(
    lt: &PsdMatrix,
    rt: &PsdMatrix,
    d_f: f64,
    r: usize,
    eta: f64,
) -> Result<f64> {
    if r == 0 {
        return Err(invalid("rank bound must be at least 1"));
    }
    if !(eta > 0.0) {
        return Err(invalid("eta must be positive"));
    }
    let tl: f64 = lt.eigenvalues().iter().map(|l| l.max(0.0).powf(0.25)).sum();
    let tr: f64 = rt.eigenvalues().iter().map(|l| l.max(0.0).powf(0.25)).sum();
    Ok((d_f * d_f / (2.0 * eta) + r as f64 * eta) * tl * tr)
}

/// Right-hand side of the stochastic convergence rate at learning rate
/// `η = √2 ‖X‖_H`:
/// `16 ‖X‖²_H H(L,H) / T + 4√2 ‖X‖_H σ / √T + 4√2 d √ε ‖X‖_H / T`.
pub fn stochastic_bound_rhs(
    x_norm_h: f64,
    smoothness: f64,
    sigma: f64,
    ambient_dim: usize,
    eps: f64,
    t: usize,
) -> f64 {
    let tf = t as f64;
    16.0 * x_norm_h * x_norm_h * smoothness / tf
        + 4.0 * 2.0f64.sqrt() * x_norm_h * sigma / tf.sqrt()
        + 4.0 * 2.0f64.sqrt() * ambient_dim as f64 * eps.sqrt() * x_norm_h / tf
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_spectrum_boundaries() {
        let s = SpectrumSpec::Paper.values(11).unwrap();
        assert_eq!(s[10], 1.0);
        let s = SpectrumSpec::Paper.values(12).unwrap();
        assert_abs_diff_eq!(s[11], 0.25);
        assert!(SpectrumSpec::Paper.values(10).is_err());
    }

    #[test]
    fn problem_is_zero_at_solution_and_deterministic() {
        let p = build_paper_problem(12, 7).unwrap();
        let (loss, grad) = p.loss_and_grad(p.xstar()).unwrap();
        assert_abs_diff_eq!(loss, 0.0, epsilon = 1e-18);
        assert!(grad.max_abs() < 1e-12);

        let q = build_paper_problem(12, 7).unwrap();
        assert_eq!(p.xstar().as_slice(), q.xstar().as_slice());
        assert_eq!(p.hmat().as_sym().frob_norm(), q.hmat().as_sym().frob_norm());

        // U is orthogonal.
        let utu = p.u.transpose().matmul(&p.u);
        assert!(utu.sub(&Mat::identity(12)).max_abs() <= 1e-8);
    }

    #[test]
    fn loss_and_grad_identity_curvature() {
        let h = PsdMatrix::identity(2);
        let p = QuadraticProblem::from_parts(h, Mat::zeros(2, 2)).unwrap();
        let x = Mat::identity(2);
        let (loss, grad) = p.loss_and_grad(&x).unwrap();
        assert_abs_diff_eq!(loss, 2.0);
        assert_eq!(grad.as_slice(), x.scale(2.0).as_slice());
    }

    #[test]
    fn directional_derivative_matches_finite_difference() {
        let p = build_problem(4, 3, &SpectrumSpec::Explicit(vec![1.0, 0.5, 0.2, 0.1]), 3).unwrap();
        let mut rng = stream(5, Role::Test);
        for _ in 0..10 {
            let x = Mat::from_fn(4, 3, |_, _| rng.gen::<f64>() - 0.5);
            let delta = Mat::from_fn(4, 3, |_, _| rng.gen::<f64>() - 0.5);
            let (_, grad) = p.loss_and_grad(&x).unwrap();
            let analytic: f64 = grad
                .as_slice()
                .iter()
                .zip(delta.as_slice())
                .map(|(a, b)| a * b)
                .sum();
            let h = 1e-5;
            let fp = p.loss(&x.add(&delta.scale(h))).unwrap();
            let fm = p.loss(&x.add(&delta.scale(-h))).unwrap();
            let numeric = (fp - fm) / (2.0 * h);
            assert_abs_diff_eq!(analytic, numeric, epsilon = 1e-5 * analytic.abs().max(1.0));
        }
    }

    #[test]
    fn reduction_dimension_and_degenerate_start() {
        let p = build_paper_problem(12, 1).unwrap();
        let red = reduced_full_matrix_problem(&p, &Mat::zeros(12, 12)).unwrap();
        assert_eq!(red.dim(), 12);

        // Starting at the solution: reduced losses vanish at z = v = 0.
        let red = reduced_full_matrix_problem(&p, p.xstar()).unwrap();
        assert!(red.v.iter().all(|v| *v == 0.0));
        assert_abs_diff_eq!(red.loss(&vec![0.0; 12]), 0.0);
    }

    #[test]
    fn cyclic_stream_two_by_two() {
        let gs = make_cyclic_gradients(2, 2);
        assert_eq!(gs.len(), 4);
        assert_eq!(gs[0].as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(gs[1].as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let mut l = SymMatrix::zeros(2);
        for g in &gs {
            l.add_scaled(&g.gram_left(), 1.0);
            assert_abs_diff_eq!(g.gram_left().trace(), 2.0);
        }
        assert!(l.sub(&SymMatrix::identity(2).scale(4.0)).frob_norm() < 1e-12);
        let lp = PsdMatrix::new(l).unwrap();
        let half: f64 = lp.eigenvalues().iter().map(|v| v.sqrt()).sum();
        assert_abs_diff_eq!(half, 4.0, epsilon = 1e-10);
        let quarter: f64 = lp.eigenvalues().iter().map(|v| v.powf(0.25)).sum();
        assert_abs_diff_eq!(quarter * quarter, 8.0, epsilon = 1e-10);
    }

    #[test]
    fn cyclic_stream_rank_and_isotropy() {
        for (dl, dr) in [(2usize, 3usize), (3, 2), (3, 3)] {
            let gs = make_cyclic_gradients(dl, dr);
            assert_eq!(gs.len(), dl * dr);
            let m = dl.min(dr);
            let mut l = SymMatrix::zeros(dl);
            for g in &gs {
                let gram = PsdMatrix::new(g.gram_left()).unwrap();
                let rank = gram.eigenvalues().iter().filter(|v| **v > 1e-9).count();
                assert_eq!(rank, m);
                l.add_scaled(gram.as_sym(), 1.0);
            }
            // The accumulated statistic is isotropic when d_L ≤ d_R; for
            // d_L > d_R rows share residue classes and correlations remain.
            if dl <= dr {
                let c = l.get(0, 0);
                assert!(l.sub(&SymMatrix::identity(dl).scale(c)).frob_norm() < 1e-10);
            }
        }
    }

    #[test]
    fn regret_rhs_arithmetic() {
        // D = 1, η = 1, G = 5, ε = 0 → (0.5 + 1) · 5 = 7.5.
        let cone = ConeSpec::Full { dim: 2 };
        let report = regret_bound_rhs(
            &cone,
            &[vec![1.0, 0.0]],
            &[0.0, 0.0],
            &[vec![5.0, 0.0]],
            &[OnlineLoss::Linear(vec![5.0, 0.0])],
            1.0,
            0.0,
        )
        .unwrap();
        assert_abs_diff_eq!(report.d_max, 1.0);
        assert_abs_diff_eq!(report.g_norm, 5.0);
        assert_abs_diff_eq!(report.rhs, 7.5);
        assert!(report.holds);

        // Zero stream: G = 0, LHS = 0 ≤ RHS = (D²/2η + η) d √ε.
        let report = regret_bound_rhs(
            &cone,
            &[vec![1.0, 0.0]],
            &[0.0, 0.0],
            &[vec![0.0, 0.0]],
            &[OnlineLoss::Linear(vec![0.0, 0.0])],
            1.0,
            0.01,
        )
        .unwrap();
        assert_abs_diff_eq!(report.g_norm, 0.0);
        assert_abs_diff_eq!(report.rhs, 1.5 * 2.0 * 0.1);
        assert!(report.holds);
    }

    #[test]
    fn two_sided_rhs_arithmetic() {
        let l = PsdMatrix::identity(2);
        let r = PsdMatrix::identity(2);
        let v = two_sided_bound_rhs(&l, &r, 1.0, 1, 1.0).unwrap();
        assert_abs_diff_eq!(v, 6.0);
        assert!(two_sided_bound_rhs(&l, &r, 1.0, 0, 1.0).is_err());
    }

    #[test]
    fn noise_sampling() {
        let p = build_problem(3, 1, &SpectrumSpec::Explicit(vec![1.0, 1.0, 1.0]), 11).unwrap();
        let x = Mat::zeros(3, 1);
        let mut rng = stream(1, Role::Noise);
        let exact = sample_stochastic_grad(&p, &x, &NoiseSpec::None, &mut rng).unwrap();
        let (_, grad) = p.loss_and_grad(&x).unwrap();
        assert_eq!(exact.as_slice(), grad.as_slice());

        // Mean over many draws concentrates on the gradient; sample
        // covariance lands within 10% of identity in Frobenius norm.
        let noise = NoiseSpec::dense(PsdMatrix::identity(3));
        let n = 10_000;
        let mut mean = vec![0.0; 3];
        let mut cov = SymMatrix::zeros(3);
        for _ in 0..n {
            let s = sample_stochastic_grad(&p, &x, &noise, &mut rng).unwrap();
            let dev: Vec<f64> = s.as_slice().iter().zip(grad.as_slice()).map(|(a, b)| a - b).collect();
            for (m, d) in mean.iter_mut().zip(&dev) {
                *m += d / n as f64;
            }
            cov.add_outer(&dev, 1.0 / n as f64);
        }
        let tol = 4.0 * (1.0f64 / n as f64).sqrt();
        for (m, g) in mean.iter().zip(grad.as_slice()) {
            assert!((m - (g - g)).abs() <= tol, "mean deviation {m}");
        }
        let rel = cov.sub(&SymMatrix::identity(3)).frob_norm() / 3.0f64.sqrt();
        assert!(rel < 0.1, "covariance relative error {rel}");
    }

    #[test]
    fn stream_minimizer_solves_quadratic_total() {
        let a = SymMatrix::diagonal(&[2.0, 4.0]);
        let losses = vec![
            OnlineLoss::Quadratic { a, b: vec![-2.0, -4.0] },
            OnlineLoss::Linear(vec![0.0, 0.0]),
        ];
        let x = stream_minimizer(&losses, 2).unwrap();
        assert_abs_diff_eq!(x[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-10);
    }
}
