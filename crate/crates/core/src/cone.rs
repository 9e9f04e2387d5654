//! Well-structured preconditioner cones: each is the PSD part of a matrix
//! subalgebra containing the identity, which is exactly what makes the
//! trace-regularized preconditioner map monotone and gives every cone here a
//! closed-form solution.
//!
//! A [`GradStat`] never stores the dense ambient second-moment matrix, only
//! the cone's sufficient statistic: a scalar for the scalar cone, a vector
//! for the diagonal cone, the full matrix only when the cone is full, and the
//! `d_L × d_L` factor `(1/d_R) Σ G Gᵀ` for the left Kronecker cone. The
//! `ε I_d` initialization is folded into the statistic in the same
//! translation, so decay applies to it like to everything else.

use crate::error::{invalid, Error, Result};
use crate::linalg::{sym_eig, Mat, PsdMatrix, SymMatrix, PINV_CUTOFF_REL};

/// A well-structured preconditioner family.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeSpec {
    /// Nonnegative multiples of the identity (AdaGrad-Norm).
    Scalar { dim: usize },
    /// Nonnegative diagonal matrices (diagonal AdaGrad).
    Diagonal { dim: usize },
    /// All PSD matrices (full-matrix AdaGrad).
    Full { dim: usize },
    /// `S₊^{d_L} ⊗ I_{d_R}` (one-sided Shampoo). Ambient dim is `d_L · d_R`.
    KroneckerLeft { d_left: usize, d_right: usize },
    /// Block-diagonal composition of smaller cones (layerwise adaptivity).
    DirectSum(Vec<ConeSpec>),
}

impl ConeSpec {
    pub fn ambient_dim(&self) -> usize {
        match self {
            ConeSpec::Scalar { dim } | ConeSpec::Diagonal { dim } | ConeSpec::Full { dim } => *dim,
            ConeSpec::KroneckerLeft { d_left, d_right } => d_left * d_right,
            ConeSpec::DirectSum(blocks) => blocks.iter().map(|b| b.ambient_dim()).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConeSpec::Scalar { dim } | ConeSpec::Diagonal { dim } | ConeSpec::Full { dim } => {
                if *dim == 0 {
                    return Err(invalid("cone dimension must be at least 1"));
                }
            }
            ConeSpec::KroneckerLeft { d_left, d_right } => {
                if *d_left == 0 || *d_right == 0 {
                    return Err(invalid("Kronecker factor dimensions must be at least 1"));
                }
            }
            ConeSpec::DirectSum(blocks) => {
                if blocks.is_empty() {
                    return Err(invalid("direct sum needs at least one block"));
                }
                for b in blocks {
                    b.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ConeSpec::Scalar { .. } => "scalar",
            ConeSpec::Diagonal { .. } => "diagonal",
            ConeSpec::Full { .. } => "full",
            ConeSpec::KroneckerLeft { .. } => "kronecker-left",
            ConeSpec::DirectSum(_) => "direct-sum",
        }
    }

    fn check_ambient(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim() {
            return Err(invalid(format!(
                "vector length {len} does not match cone ambient dimension {}",
                self.ambient_dim()
            )));
        }
        Ok(())
    }
}

/// A structured member of a cone. The dense form is PSD and carries the
/// cone's pattern exactly by construction.
#[derive(Debug, Clone)]
pub enum ConeElement {
    Scalar { dim: usize, c: f64 },
    Diagonal(Vec<f64>),
    Full(PsdMatrix),
    KroneckerLeft { factor: PsdMatrix, d_right: usize },
    DirectSum(Vec<ConeElement>),
}

impl ConeElement {
    pub fn ambient_dim(&self) -> usize {
        match self {
            ConeElement::Scalar { dim, .. } => *dim,
            ConeElement::Diagonal(d) => d.len(),
            ConeElement::Full(p) => p.dim(),
            ConeElement::KroneckerLeft { factor, d_right } => factor.dim() * d_right,
            ConeElement::DirectSum(blocks) => blocks.iter().map(|b| b.ambient_dim()).sum(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            ConeElement::Scalar { dim, c } => c * *dim as f64,
            ConeElement::Diagonal(d) => d.iter().sum(),
            ConeElement::Full(p) => p.trace(),
            ConeElement::KroneckerLeft { factor, d_right } => factor.trace() * *d_right as f64,
            ConeElement::DirectSum(blocks) => blocks.iter().map(|b| b.trace()).sum(),
        }
    }

    pub fn scale(&self, s: f64) -> ConeElement {
        match self {
            ConeElement::Scalar { dim, c } => ConeElement::Scalar { dim: *dim, c: c * s },
            ConeElement::Diagonal(d) => ConeElement::Diagonal(d.iter().map(|v| v * s).collect()),
            ConeElement::Full(p) => {
                ConeElement::Full(PsdMatrix::new(p.as_sym().scale(s)).expect("scaled PSD"))
            }
            ConeElement::KroneckerLeft { factor, d_right } => ConeElement::KroneckerLeft {
                factor: PsdMatrix::new(factor.as_sym().scale(s)).expect("scaled PSD"),
                d_right: *d_right,
            },
            ConeElement::DirectSum(blocks) => {
                ConeElement::DirectSum(blocks.iter().map(|b| b.scale(s)).collect())
            }
        }
    }

    /// Dense ambient form.
    pub fn to_dense(&self) -> SymMatrix {
        match self {
            ConeElement::Scalar { dim, c } => SymMatrix::diagonal(&vec![*c; *dim]),
            ConeElement::Diagonal(d) => SymMatrix::diagonal(d),
            ConeElement::Full(p) => p.as_sym().clone(),
            ConeElement::KroneckerLeft { factor, d_right } => {
                let dl = factor.dim();
                let dr = *d_right;
                SymMatrix::from_fn(dl * dr, |r, c| {
                    let (a, i) = (r / dr, r % dr);
                    let (b, j) = (c / dr, c % dr);
                    if i == j {
                        factor.get(a, b)
                    } else {
                        0.0
                    }
                })
            }
            ConeElement::DirectSum(blocks) => {
                let dim = self.ambient_dim();
                let mut out = SymMatrix::zeros(dim);
                let mut off = 0;
                for b in blocks {
                    let dense = b.to_dense();
                    let bd = dense.dim();
                    for i in 0..bd {
                        for j in i..bd {
                            out.set_sym(off + i, off + j, dense.get(i, j));
                        }
                    }
                    off += bd;
                }
                out
            }
        }
    }

    /// `H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConeElement::Scalar { c, .. } => x.iter().map(|v| c * v).collect(),
            ConeElement::Diagonal(d) => d.iter().zip(x).map(|(h, v)| h * v).collect(),
            ConeElement::Full(p) => p.apply(x),
            ConeElement::KroneckerLeft { factor, d_right } => {
                let g = Mat::from_vec(factor.dim(), *d_right, x.to_vec()).expect("shape");
                factor.as_sym().to_mat().matmul(&g).into_vec()
            }
            ConeElement::DirectSum(blocks) => {
                let mut out = Vec::with_capacity(x.len());
                let mut off = 0;
                for b in blocks {
                    let d = b.ambient_dim();
                    out.extend(b.apply(&x[off..off + d]));
                    off += d;
                }
                out
            }
        }
    }

    /// `H† x` with the relative pseudo-inverse cutoff.
    pub fn pinv_apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConeElement::Scalar { c, .. } => {
                if *c > 0.0 {
                    x.iter().map(|v| v / c).collect()
                } else {
                    vec![0.0; x.len()]
                }
            }
            ConeElement::Diagonal(d) => {
                let max = d.iter().fold(0.0f64, |m, v| m.max(*v));
                let cutoff = PINV_CUTOFF_REL * max;
                d.iter()
                    .zip(x)
                    .map(|(h, v)| if *h > cutoff { v / h } else { 0.0 })
                    .collect()
            }
            ConeElement::Full(p) => p.pinv_apply(x),
            ConeElement::KroneckerLeft { factor, d_right } => {
                let g = Mat::from_vec(factor.dim(), *d_right, x.to_vec()).expect("shape");
                factor.pinv().as_sym().to_mat().matmul(&g).into_vec()
            }
            ConeElement::DirectSum(blocks) => {
                let mut out = Vec::with_capacity(x.len());
                let mut off = 0;
                for b in blocks {
                    let d = b.ambient_dim();
                    out.extend(b.pinv_apply(&x[off..off + d]));
                    off += d;
                }
                out
            }
        }
    }
}

/// Cone-sufficient statistic of the accumulated gradient second moment,
/// with any `ε` offset and decay already folded in.
#[derive(Debug, Clone)]
pub enum GradStat {
    /// Running `Tr(M_t) = ε d + Σ ‖g_s‖²` for the scalar cone.
    Scalar { dim: usize, sum: f64 },
    /// Per-coordinate `ε + Σ g_{s,i}²`.
    Diagonal(Vec<f64>),
    /// Dense `ε I + Σ g_s g_sᵀ`.
    Full(SymMatrix),
    /// `ε I_{d_L} + (1/d_R) Σ G_s G_sᵀ`.
    KroneckerLeft { mat: SymMatrix, d_right: usize },
    DirectSum(Vec<GradStat>),
}

impl GradStat {
    /// Statistic of `M_0 = ε I_d`, translated into the cone's form.
    pub fn new(cone: &ConeSpec, eps: f64) -> Result<GradStat> {
        cone.validate()?;
        if eps < 0.0 || !eps.is_finite() {
            return Err(invalid("eps must be finite and nonnegative"));
        }
        Ok(match cone {
            ConeSpec::Scalar { dim } => GradStat::Scalar { dim: *dim, sum: eps * *dim as f64 },
            ConeSpec::Diagonal { dim } => GradStat::Diagonal(vec![eps; *dim]),
            ConeSpec::Full { dim } => {
                GradStat::Full(SymMatrix::diagonal(&vec![eps; *dim]))
            }
            ConeSpec::KroneckerLeft { d_left, d_right } => GradStat::KroneckerLeft {
                mat: SymMatrix::diagonal(&vec![eps; *d_left]),
                d_right: *d_right,
            },
            ConeSpec::DirectSum(blocks) => GradStat::DirectSum(
                blocks
                    .iter()
                    .map(|b| GradStat::new(b, eps))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub fn matches(&self, cone: &ConeSpec) -> bool {
        match (self, cone) {
            (GradStat::Scalar { dim, .. }, ConeSpec::Scalar { dim: d }) => dim == d,
            (GradStat::Diagonal(v), ConeSpec::Diagonal { dim }) => v.len() == *dim,
            (GradStat::Full(m), ConeSpec::Full { dim }) => m.dim() == *dim,
            (
                GradStat::KroneckerLeft { mat, d_right },
                ConeSpec::KroneckerLeft { d_left, d_right: dr },
            ) => mat.dim() == *d_left && d_right == dr,
            (GradStat::DirectSum(stats), ConeSpec::DirectSum(blocks)) => {
                stats.len() == blocks.len()
                    && stats.iter().zip(blocks).all(|(s, b)| s.matches(b))
            }
            _ => false,
        }
    }

    pub fn scale(&self, s: f64) -> GradStat {
        match self {
            GradStat::Scalar { dim, sum } => GradStat::Scalar { dim: *dim, sum: sum * s },
            GradStat::Diagonal(v) => GradStat::Diagonal(v.iter().map(|x| x * s).collect()),
            GradStat::Full(m) => GradStat::Full(m.scale(s)),
            GradStat::KroneckerLeft { mat, d_right } => {
                GradStat::KroneckerLeft { mat: mat.scale(s), d_right: *d_right }
            }
            GradStat::DirectSum(v) => GradStat::DirectSum(v.iter().map(|b| b.scale(s)).collect()),
        }
    }
}

/// `decay · stat + (cone-structured statistic of g gᵀ)`. `decay = 1` is the
/// plain accumulation; `decay < 1` is the weighted recursion.
pub fn stat_update(cone: &ConeSpec, stat: &GradStat, g: &[f64], decay: f64) -> Result<GradStat> {
    cone.check_ambient(g.len())?;
    if !stat.matches(cone) {
        return Err(invalid("statistic does not match cone"));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(invalid("decay must lie in (0, 1]"));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(invalid("gradient has non-finite entries"));
    }
    Ok(match (cone, stat) {
        (ConeSpec::Scalar { dim }, GradStat::Scalar { sum, .. }) => GradStat::Scalar {
            dim: *dim,
            sum: decay * sum + g.iter().map(|v| v * v).sum::<f64>(),
        },
        (ConeSpec::Diagonal { .. }, GradStat::Diagonal(v)) => {
            GradStat::Diagonal(v.iter().zip(g).map(|(s, gi)| decay * s + gi * gi).collect())
        }
        (ConeSpec::Full { .. }, GradStat::Full(m)) => {
            let mut next = m.scale(decay);
            next.add_outer(g, 1.0);
            GradStat::Full(next)
        }
        (ConeSpec::KroneckerLeft { d_left, d_right }, GradStat::KroneckerLeft { mat, .. }) => {
            let gm = Mat::from_vec(*d_left, *d_right, g.to_vec()).expect("checked shape");
            let mut next = mat.scale(decay);
            next.add_scaled(&gm.gram_left(), 1.0 / *d_right as f64);
            GradStat::KroneckerLeft { mat: next, d_right: *d_right }
        }
        (ConeSpec::DirectSum(blocks), GradStat::DirectSum(stats)) => {
            let mut out = Vec::with_capacity(blocks.len());
            let mut off = 0;
            for (b, s) in blocks.iter().zip(stats) {
                let d = b.ambient_dim();
                out.push(stat_update(b, s, &g[off..off + d], decay)?);
                off += d;
            }
            GradStat::DirectSum(out)
        }
        _ => unreachable!("matches() checked"),
    })
}

/// Closed-form minimizer of `⟨M, H⁻¹⟩ + η² Tr(H)` over the cone, where `M` is
/// represented by its sufficient statistic plus an extra `ε I_d` shift.
/// Singular statistics follow the pseudo-inverse (continuous) extension.
pub fn solve_preconditioner(
    cone: &ConeSpec,
    stat: &GradStat,
    eps: f64,
    eta: f64,
) -> Result<ConeElement> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid("eta must be positive and finite"));
    }
    if eps < 0.0 || !eps.is_finite() {
        return Err(invalid("eps must be finite and nonnegative"));
    }
    if !stat.matches(cone) {
        return Err(invalid("statistic does not match cone"));
    }
    Ok(match (cone, stat) {
        (ConeSpec::Scalar { dim }, GradStat::Scalar { sum, .. }) => {
            let d = *dim as f64;
            ConeElement::Scalar { dim: *dim, c: ((sum / d + eps).max(0.0)).sqrt() / eta }
        }
        (ConeSpec::Diagonal { .. }, GradStat::Diagonal(v)) => ConeElement::Diagonal(
            v.iter().map(|s| ((s + eps).max(0.0)).sqrt() / eta).collect(),
        ),
        (ConeSpec::Full { .. }, GradStat::Full(m)) => {
            let mut shifted = m.clone();
            shifted.shift_diag(eps);
            let psd = PsdMatrix::new(shifted)?;
            ConeElement::Full(PsdMatrix::new(psd.sqrt().as_sym().scale(1.0 / eta))?)
        }
        (ConeSpec::KroneckerLeft { d_right, .. }, GradStat::KroneckerLeft { mat, .. }) => {
            let mut shifted = mat.clone();
            shifted.shift_diag(eps);
            let psd = PsdMatrix::new(shifted)?;
            ConeElement::KroneckerLeft {
                factor: PsdMatrix::new(psd.sqrt().as_sym().scale(1.0 / eta))?,
                d_right: *d_right,
            }
        }
        (ConeSpec::DirectSum(blocks), GradStat::DirectSum(stats)) => ConeElement::DirectSum(
            blocks
                .iter()
                .zip(stats)
                .map(|(b, s)| solve_preconditioner(b, s, eps, eta))
                .collect::<Result<_>>()?,
        ),
        _ => unreachable!("matches() checked"),
    })
}

/// The norm `sup { ‖x‖_H : H in the cone, Tr(H) ≤ 1 }` in closed form.
pub fn domain_norm(cone: &ConeSpec, x: &[f64]) -> Result<f64> {
    cone.check_ambient(x.len())?;
    Ok(match cone {
        ConeSpec::Scalar { dim } => {
            (x.iter().map(|v| v * v).sum::<f64>() / *dim as f64).sqrt()
        }
        ConeSpec::Diagonal { .. } => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        ConeSpec::Full { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        ConeSpec::KroneckerLeft { d_left, d_right } => {
            let xm = Mat::from_vec(*d_left, *d_right, x.to_vec()).expect("checked shape");
            xm.op_norm() / (*d_right as f64).sqrt()
        }
        ConeSpec::DirectSum(blocks) => {
            let mut best = 0.0f64;
            let mut off = 0;
            for b in blocks {
                let d = b.ambient_dim();
                best = best.max(domain_norm(b, &x[off..off + d])?);
                off += d;
            }
            best
        }
    })
}

/// Cone-sufficient statistic extracted from a dense ambient matrix, in the
/// same normalization [`GradStat`] uses. `⟨S, H⁻¹⟩` for structured `H`
/// depends on `S` only through this projection.
pub fn stat_from_dense(cone: &ConeSpec, s: &SymMatrix) -> GradStat {
    match cone {
        ConeSpec::Scalar { dim } => GradStat::Scalar { dim: *dim, sum: s.trace() },
        ConeSpec::Diagonal { dim } => {
            GradStat::Diagonal((0..*dim).map(|i| s.get(i, i)).collect())
        }
        ConeSpec::Full { .. } => GradStat::Full(s.clone()),
        ConeSpec::KroneckerLeft { d_left, d_right } => {
            let (dl, dr) = (*d_left, *d_right);
            let mut mat = SymMatrix::zeros(dl);
            for a in 0..dl {
                for b in a..dl {
                    let mut acc = 0.0;
                    for k in 0..dr {
                        acc += s.get(a * dr + k, b * dr + k);
                    }
                    mat.set_sym(a, b, acc / dr as f64);
                }
            }
            GradStat::KroneckerLeft { mat, d_right: dr }
        }
        ConeSpec::DirectSum(blocks) => {
            let mut stats = Vec::with_capacity(blocks.len());
            let mut off = 0;
            for b in blocks {
                let d = b.ambient_dim();
                let sub = SymMatrix::from_fn(d, |i, j| s.get(off + i, off + j));
                stats.push(project_stat(b, &sub));
                off += d;
            }
            GradStat::DirectSum(stats)
        }
    }
}

fn sqrt_trace(m: &SymMatrix) -> Result<f64> {
    Ok(sym_eig(m)?.values.iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// The adaptive gradient norm
/// `inf { √⟨S, H⁻¹⟩ : H in the cone, Tr(H) ≤ 1 }` of a dense ambient PSD
/// matrix `S`. With `S = Σ` this is the `σ` entering the stochastic rate.
pub fn adaptive_norm(cone: &ConeSpec, s: &PsdMatrix) -> Result<f64> {
    cone.check_ambient(s.dim())?;
    adaptive_norm_from_stat(cone, &stat_from_dense(cone, s.as_sym()))
}

/// Same variational quantity, evaluated from a cone statistic directly.
pub fn adaptive_norm_from_stat(cone: &ConeSpec, stat: &GradStat) -> Result<f64> {
    if !stat.matches(cone) {
        return Err(invalid("statistic does not match cone"));
    }
    Ok(match (cone, stat) {
        (ConeSpec::Scalar { dim }, GradStat::Scalar { sum, .. }) => {
            (*dim as f64).sqrt() * sum.max(0.0).sqrt()
        }
        (ConeSpec::Diagonal { .. }, GradStat::Diagonal(v)) => {
            v.iter().map(|s| s.max(0.0).sqrt()).sum()
        }
        (ConeSpec::Full { .. }, GradStat::Full(m)) => sqrt_trace(m)?,
        (ConeSpec::KroneckerLeft { d_right, .. }, GradStat::KroneckerLeft { mat, .. }) => {
            // Statistic carries (1/d_R) Σ G Gᵀ, the ambient partial trace is
            // d_R times it, so √d_R · Tr((d_R · stat)^{1/2}) = d_R · Tr(stat^{1/2}).
            *d_right as f64 * sqrt_trace(mat)?
        }
        (ConeSpec::DirectSum(blocks), GradStat::DirectSum(stats)) => {
            let mut acc = 0.0;
            for (b, s) in blocks.iter().zip(stats) {
                acc += adaptive_norm_from_stat(b, s)?;
            }
            acc
        }
        _ => unreachable!("matches() checked"),
    })
}

fn spectral_radius(a: &SymMatrix) -> Result<f64> {
    let eig = sym_eig(a)?;
    let hi = eig.values.first().copied().unwrap_or(0.0);
    let lo = eig.values.last().copied().unwrap_or(0.0);
    Ok(hi.abs().max(lo.abs()))
}

fn abs_trace(a: &SymMatrix) -> Result<f64> {
    Ok(sym_eig(a)?.values.iter().map(|l| l.abs()).sum())
}

/// Smallest trace of a cone member `H*` with `−H* ⪯ A ⪯ H*`.
///
/// `A` may be given in factored form: if its dimension `d_B` strictly divides
/// the cone's ambient dimension, the input is read as `A = B ⊗ I_{d/d_B}`.
/// For the Kronecker-left cone the input must be the left factor itself.
/// The diagonal cone only has analytic answers for diagonal `B` and for
/// all-ones-pattern `B` (rank one, constant entries); anything else returns
/// [`Error::Unsupported`].
pub fn h_smoothness(cone: &ConeSpec, a: &SymMatrix) -> Result<f64> {
    let lift = |ambient: usize| -> Result<usize> {
        if a.dim() == 0 || ambient % a.dim() != 0 {
            return Err(invalid(format!(
                "input dimension {} does not divide ambient dimension {ambient}",
                a.dim()
            )));
        }
        Ok(ambient / a.dim())
    };
    match cone {
        ConeSpec::Scalar { dim } => {
            lift(*dim)?;
            Ok(*dim as f64 * spectral_radius(a)?)
        }
        ConeSpec::Full { dim } => {
            let d_r = lift(*dim)?;
            Ok(d_r as f64 * abs_trace(a)?)
        }
        ConeSpec::KroneckerLeft { d_left, d_right } => {
            if a.dim() != *d_left {
                return Err(invalid(format!(
                    "Kronecker-left smoothness takes the left factor (dim {d_left}), got {}",
                    a.dim()
                )));
            }
            Ok(*d_right as f64 * abs_trace(a)?)
        }
        ConeSpec::Diagonal { dim } => {
            let d_r = lift(*dim)? as f64;
            let scale = a.frob_norm().max(1.0);
            let db = a.dim();
            let is_diag = (0..db)
                .all(|i| (0..db).all(|j| i == j || a.get(i, j).abs() <= 1e-14 * scale));
            if is_diag {
                return Ok(d_r * (0..db).map(|i| a.get(i, i).abs()).sum::<f64>());
            }
            let c = a.get(0, 0);
            let constant = (0..db)
                .all(|i| (0..db).all(|j| (a.get(i, j) - c).abs() <= 1e-14 * scale));
            if constant {
                // B = c · 1 1ᵀ: the all-ones test vector forces
                // Tr(D) ≥ |c| d_B², attained at D = |c| d_B I.
                return Ok(d_r * c.abs() * (db * db) as f64);
            }
            Err(Error::Unsupported(
                "diagonal-cone smoothness is only analytic for diagonal or constant inputs"
                    .into(),
            ))
        }
        ConeSpec::DirectSum(_) => Err(Error::Unsupported(
            "smoothness of a direct-sum cone is not provided".into(),
        )),
    }
}

/// Builds the dual-norm witness `w* = H̄† g / ‖H̄† g‖_H` from the
/// trace-normalized minimizer `H̄` and returns it with the duality gap
/// `|gᵀ w* − |||g|||_H|`, which is zero in exact arithmetic.
pub fn dual_witness_check(cone: &ConeSpec, g: &[f64]) -> Result<(Vec<f64>, f64)> {
    cone.check_ambient(g.len())?;
    if g.iter().all(|v| *v == 0.0) {
        return Err(invalid("dual witness needs a nonzero gradient"));
    }
    let stat = stat_update(cone, &GradStat::new(cone, 0.0)?, g, 1.0)?;
    let p = solve_preconditioner(cone, &stat, 0.0, 1.0)?;
    let tr = p.trace();
    if tr <= 0.0 {
        return Err(invalid("degenerate minimizer"));
    }
    let hbar = p.scale(1.0 / tr);
    let raw = hbar.pinv_apply(g);
    let nrm = domain_norm(cone, &raw)?;
    if nrm <= 0.0 {
        return Err(invalid("witness collapsed to zero"));
    }
    let w: Vec<f64> = raw.iter().map(|v| v / nrm).collect();
    let attained: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
    let target = adaptive_norm_from_stat(cone, &stat)?;
    Ok((w, (attained - target).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stat_update_examples() {
        let diag = ConeSpec::Diagonal { dim: 2 };
        let s = stat_update(&diag, &GradStat::new(&diag, 0.0).unwrap(), &[2.0, 3.0], 1.0).unwrap();
        match s {
            GradStat::Diagonal(v) => assert_eq!(v, vec![4.0, 9.0]),
            _ => panic!("kind"),
        }

        let scal = ConeSpec::Scalar { dim: 2 };
        let base = GradStat::Scalar { dim: 2, sum: 5.0 };
        match stat_update(&scal, &base, &[0.0, 0.0], 0.5).unwrap() {
            GradStat::Scalar { sum, .. } => assert_abs_diff_eq!(sum, 2.5),
            _ => panic!("kind"),
        }

        let kl = ConeSpec::KroneckerLeft { d_left: 2, d_right: 2 };
        let s = stat_update(
            &kl,
            &GradStat::new(&kl, 0.0).unwrap(),
            &[1.0, 0.0, 0.0, 2.0],
            1.0,
        )
        .unwrap();
        match s {
            GradStat::KroneckerLeft { mat, .. } => {
                assert_abs_diff_eq!(mat.get(0, 0), 0.5);
                assert_abs_diff_eq!(mat.get(1, 1), 2.0);
                assert_abs_diff_eq!(mat.get(0, 1), 0.0);
            }
            _ => panic!("kind"),
        }

        assert!(stat_update(&diag, &base, &[1.0, 1.0], 1.0).is_err());
        assert!(stat_update(&diag, &GradStat::new(&diag, 0.0).unwrap(), &[1.0], 1.0).is_err());
    }

    #[test]
    fn solve_preconditioner_closed_forms() {
        // Full cone: identity is a fixed point.
        let full = ConeSpec::Full { dim: 2 };
        let stat = GradStat::Full(SymMatrix::identity(2));
        let h = solve_preconditioner(&full, &stat, 0.0, 1.0).unwrap();
        assert!(h.to_dense().sub(&SymMatrix::identity(2)).frob_norm() < 1e-12);

        // Diagonal coordinate-wise square roots.
        let diag = ConeSpec::Diagonal { dim: 2 };
        let h = solve_preconditioner(&diag, &GradStat::Diagonal(vec![4.0, 9.0]), 0.0, 1.0).unwrap();
        match h {
            ConeElement::Diagonal(v) => {
                assert_abs_diff_eq!(v[0], 2.0);
                assert_abs_diff_eq!(v[1], 3.0);
            }
            _ => panic!("kind"),
        }

        // Scalar: trace-mean square root; M = diag(1, 5) has trace 6.
        let scal = ConeSpec::Scalar { dim: 2 };
        let h = solve_preconditioner(&scal, &GradStat::Scalar { dim: 2, sum: 6.0 }, 0.0, 1.0)
            .unwrap();
        match h {
            ConeElement::Scalar { c, .. } => assert_abs_diff_eq!(c, 3.0f64.sqrt(), epsilon = 1e-12),
            _ => panic!("kind"),
        }
    }

    #[test]
    fn balance_identity_diagonal() {
        // ⟨M, H⁻¹⟩ = η² Tr(H) at the closed form.
        let diag = ConeSpec::Diagonal { dim: 3 };
        let stat = GradStat::Diagonal(vec![1.0, 4.0, 0.25]);
        for eta in [0.1f64, 1.0, 10.0] {
            let h = solve_preconditioner(&diag, &stat, 0.0, eta).unwrap();
            let hv = match &h {
                ConeElement::Diagonal(v) => v.clone(),
                _ => panic!("kind"),
            };
            let inner: f64 = match &stat {
                GradStat::Diagonal(s) => s.iter().zip(&hv).map(|(m, h)| m / h).sum(),
                _ => unreachable!(),
            };
            assert_abs_diff_eq!(inner, eta * eta * h.trace(), epsilon = 1e-10);
        }
    }

    #[test]
    fn domain_norm_closed_forms() {
        let full = ConeSpec::Full { dim: 3 };
        assert_abs_diff_eq!(domain_norm(&full, &[3.0, 4.0, 0.0]).unwrap(), 5.0);

        let kl = ConeSpec::KroneckerLeft { d_left: 2, d_right: 2 };
        let v = domain_norm(&kl, &[3.0, 0.0, 0.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v, 4.0 / 2.0f64.sqrt(), epsilon = 1e-10);

        let ds = ConeSpec::DirectSum(vec![
            ConeSpec::Diagonal { dim: 2 },
            ConeSpec::Scalar { dim: 2 },
        ]);
        let v = domain_norm(&ds, &[1.0, -3.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v, 5.0 / 2.0f64.sqrt(), epsilon = 1e-10);

        assert!(domain_norm(&full, &[1.0]).is_err());
    }

    #[test]
    fn adaptive_norm_closed_forms() {
        let full = ConeSpec::Full { dim: 2 };
        let s = PsdMatrix::diagonal(&[4.0, 9.0]).unwrap();
        assert_abs_diff_eq!(adaptive_norm(&full, &s).unwrap(), 5.0, epsilon = 1e-10);

        let scal = ConeSpec::Scalar { dim: 2 };
        assert_abs_diff_eq!(
            adaptive_norm(&scal, &s).unwrap(),
            2.0f64.sqrt() * 13.0f64.sqrt(),
            epsilon = 1e-10
        );

        // Ambient matrix whose left partial trace is diag(1, 4).
        let kl = ConeSpec::KroneckerLeft { d_left: 2, d_right: 2 };
        let s = PsdMatrix::diagonal(&[1.0, 0.0, 0.0, 4.0]).unwrap();
        assert_abs_diff_eq!(
            adaptive_norm(&kl, &s).unwrap(),
            2.0f64.sqrt() * 3.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn h_smoothness_entries() {
        let a = SymMatrix::diagonal(&[1.0, 2.0]);
        assert_abs_diff_eq!(
            h_smoothness(&ConeSpec::Scalar { dim: 2 }, &a).unwrap(),
            4.0
        );
        assert_abs_diff_eq!(h_smoothness(&ConeSpec::Full { dim: 2 }, &a).unwrap(), 3.0);

        // Diagonal cone over the lifted all-ones pattern: B = 11ᵀ/3, d_R = 2.
        let ones = SymMatrix::from_fn(3, |_, _| 1.0 / 3.0);
        assert_abs_diff_eq!(
            h_smoothness(&ConeSpec::Diagonal { dim: 6 }, &ones).unwrap(),
            6.0,
            epsilon = 1e-12
        );

        let kl = ConeSpec::KroneckerLeft { d_left: 2, d_right: 3 };
        assert_abs_diff_eq!(h_smoothness(&kl, &a).unwrap(), 9.0);

        // Non-analytic diagonal input.
        let tilted = SymMatrix::from_rows(&[&[1.0, 0.5], &[0.5, 2.0]]);
        assert!(matches!(
            h_smoothness(&ConeSpec::Diagonal { dim: 2 }, &tilted),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dual_witness_examples() {
        let full = ConeSpec::Full { dim: 2 };
        let (w, gap) = dual_witness_check(&full, &[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(w[0], 0.6, epsilon = 1e-10);
        assert_abs_diff_eq!(w[1], 0.8, epsilon = 1e-10);
        assert!(gap <= 1e-10);

        let diag = ConeSpec::Diagonal { dim: 2 };
        let (w, gap) = dual_witness_check(&diag, &[1.0, 1.0]).unwrap();
        let attained: f64 = w.iter().sum();
        assert_abs_diff_eq!(attained, 2.0, epsilon = 1e-10);
        assert!(gap <= 1e-10);

        let scal = ConeSpec::Scalar { dim: 3 };
        let (_, gap) = dual_witness_check(&scal, &[1.0, 2.0, 2.0]).unwrap();
        assert!(gap <= 1e-9);
        let target = adaptive_norm_from_stat(
            &scal,
            &stat_update(
                &scal,
                &GradStat::new(&scal, 0.0).unwrap(),
                &[1.0, 2.0, 2.0],
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(target, 3.0 * 3.0f64.sqrt(), epsilon = 1e-10);

        assert!(dual_witness_check(&full, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn kron_stat_solve_matches_alg_form() {
        // One gradient step: H_L = (ε I + (1/d_R) G Gᵀ)^{1/2} / η.
        let kl = ConeSpec::KroneckerLeft { d_left: 2, d_right: 2 };
        let stat = stat_update(
            &kl,
            &GradStat::new(&kl, 0.0).unwrap(),
            &[1.0, 0.0, 0.0, 2.0],
            1.0,
        )
        .unwrap();
        let h = solve_preconditioner(&kl, &stat, 0.0, 1.0).unwrap();
        match h {
            ConeElement::KroneckerLeft { factor, .. } => {
                assert_abs_diff_eq!(factor.get(0, 0), 0.5f64.sqrt(), epsilon = 1e-12);
                assert_abs_diff_eq!(factor.get(1, 1), 2.0f64.sqrt(), epsilon = 1e-12);
            }
            _ => panic!("kind"),
        }
    }
}
