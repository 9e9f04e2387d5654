//! Step-by-step state machines for the adaptive-regularization family:
//! the generic trace-regularized update over any structured cone, its
//! weighted and EMA variants, and the one-/two-sided Shampoo updates in
//! matrix form. One optimizer owns one run; steps are sequential.

use crate::cone::{solve_preconditioner, stat_update, ConeElement, ConeSpec, GradStat};
use crate::error::{invalid, Error, Result};
use crate::linalg::{Mat, Power, PsdMatrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Plain accumulation `M_t = M_{t-1} + g gᵀ` (β₂ = 1).
    AdaReg,
    /// `M̃_t = β₂ M̃_{t-1} + g gᵀ`.
    WeightedAdaReg,
    /// EMA statistic. Runs the weighted recursion on `(η, ε)` unchanged,
    /// which coincides with the textbook EMA update
    /// `M_t = β₂ M_{t-1} + (1-β₂) g gᵀ`, `M_0 = ε (1-β₂) I`, at learning
    /// rate `η √(1-β₂)`.
    EmaAdaReg,
    /// `L_t = L_{t-1} + (1/d_R) G Gᵀ`, update `η L^{-1/2} G`. Matrix-form
    /// twin of `AdaReg` on the Kronecker-left cone.
    OneSidedShampoo,
    /// `L_t += G Gᵀ`, `R_t += Gᵀ G`, update `η L^{-1/4} G R^{-1/4}`.
    TwoSidedShampoo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::AdaReg => "adareg",
            Mode::WeightedAdaReg => "weighted-adareg",
            Mode::EmaAdaReg => "ema-adareg",
            Mode::OneSidedShampoo => "one-sided-shampoo",
            Mode::TwoSidedShampoo => "two-sided-shampoo",
        }
    }
}

/// Feasible set of the iterates.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Unconstrained,
    /// Coordinate-wise box. Only exact under scalar or diagonal metrics,
    /// where the metric projection is plain clipping.
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

/// Metric projection onto the domain. For a box this is only supported when
/// the metric is scalar or diagonal, where clipping is exact; a generic
/// metric turns the projection into an optimization problem this crate
/// deliberately does not solve.
pub fn project(domain: &DomainSpec, metric: &ConeElement, x: &[f64]) -> Result<Vec<f64>> {
    match domain {
        DomainSpec::Unconstrained => Ok(x.to_vec()),
        DomainSpec::Box { lower, upper } => {
            if lower.len() != x.len() || upper.len() != x.len() {
                return Err(invalid("box bounds do not match dimension"));
            }
            match metric {
                ConeElement::Scalar { .. } | ConeElement::Diagonal(_) => Ok(x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
                    .collect()),
                _ => Err(Error::Unsupported(
                    "box projection under a non-diagonal metric".into(),
                )),
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub cone: ConeSpec,
    pub eta: f64,
    pub eps: f64,
    pub beta2: f64,
    pub mode: Mode,
    pub domain: DomainSpec,
}

impl OptimizerConfig {
    pub fn unconstrained(cone: ConeSpec, mode: Mode, eta: f64, eps: f64, beta2: f64) -> Self {
        OptimizerConfig { cone, eta, eps, beta2, mode, domain: DomainSpec::Unconstrained }
    }
}

/// Loop state. Running averages cover the pre-update iterates `x_1..x_t`
/// (the initialization is `x_1`), in both the plain and the
/// `β₂^{(t-s)/2}`-weighted form.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub x: Vec<f64>,
    pub stat: GradStat,
    pub t: u64,
    avg_plain: Vec<f64>,
    wavg_num: Vec<f64>,
    wavg_den: f64,
    /// One-sided route: `ε I + (1/d_R) Σ G Gᵀ`.
    left: Option<SymMatrix>,
    /// Two-sided route: `(L_t, R_t)` per the literal recursions.
    two_sided: Option<(SymMatrix, SymMatrix)>,
}

/// Telemetry produced by one step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub t: u64,
    pub grad_norm: f64,
    pub trace_h: f64,
}

/// One telemetry row: the step outcome plus the loss values the driver
/// evaluated at the pre-update iterate and at both running averages.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub t: u64,
    pub loss_last: f64,
    pub loss_avg_plain: f64,
    pub loss_avg_weighted: f64,
    pub grad_norm: f64,
    pub trace_h: f64,
    pub elapsed_ns: u64,
}

impl StepRecord {
    pub fn new(
        outcome: StepOutcome,
        loss_last: f64,
        loss_avg_plain: f64,
        loss_avg_weighted: f64,
        elapsed_ns: u64,
    ) -> Result<Self> {
        let rec = StepRecord {
            t: outcome.t,
            loss_last,
            loss_avg_plain,
            loss_avg_weighted,
            grad_norm: outcome.grad_norm,
            trace_h: outcome.trace_h,
            elapsed_ns,
        };
        if !(rec.loss_last.is_finite()
            && rec.loss_avg_plain.is_finite()
            && rec.loss_avg_weighted.is_finite()
            && rec.grad_norm.is_finite()
            && rec.trace_h.is_finite())
        {
            return Err(invalid("step record has non-finite values"));
        }
        Ok(rec)
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    state: OptimizerState,
}

impl Optimizer {
    pub fn new(cfg: OptimizerConfig, x0: Vec<f64>) -> Result<Self> {
        cfg.cone.validate()?;
        let dim = cfg.cone.ambient_dim();
        if x0.len() != dim {
            return Err(invalid(format!(
                "initial point has length {} but the cone is {dim}-dimensional",
                x0.len()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(invalid("initial point has non-finite entries"));
        }
        if !(cfg.eta > 0.0) || !cfg.eta.is_finite() {
            return Err(invalid("eta must be positive and finite"));
        }
        if cfg.eps < 0.0 || !cfg.eps.is_finite() {
            return Err(invalid("eps must be nonnegative and finite"));
        }
        match cfg.mode {
            Mode::AdaReg | Mode::OneSidedShampoo | Mode::TwoSidedShampoo => {
                if cfg.beta2 != 1.0 {
                    return Err(invalid("this mode requires beta2 = 1"));
                }
            }
            Mode::WeightedAdaReg => {
                if !(cfg.beta2 > 0.0 && cfg.beta2 <= 1.0) {
                    return Err(invalid("weighted mode requires beta2 in (0, 1]"));
                }
            }
            Mode::EmaAdaReg => {
                if !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) {
                    return Err(invalid("EMA mode requires beta2 in (0, 1)"));
                }
            }
        }
        let (left, two_sided) = match cfg.mode {
            Mode::OneSidedShampoo | Mode::TwoSidedShampoo => {
                let (dl, dr) = match cfg.cone {
                    ConeSpec::KroneckerLeft { d_left, d_right } => (d_left, d_right),
                    _ => {
                        return Err(invalid(
                            "Shampoo modes require a Kronecker-left cone carrying (d_L, d_R)",
                        ))
                    }
                };
                if cfg.mode == Mode::OneSidedShampoo {
                    (Some(SymMatrix::diagonal(&vec![cfg.eps; dl])), None)
                } else {
                    (
                        None,
                        Some((
                            SymMatrix::diagonal(&vec![cfg.eps; dl]),
                            SymMatrix::diagonal(&vec![cfg.eps; dr]),
                        )),
                    )
                }
            }
            _ => (None, None),
        };
        if let DomainSpec::Box { lower, upper } = &cfg.domain {
            if lower.len() != dim || upper.len() != dim {
                return Err(invalid("box bounds do not match dimension"));
            }
            if lower.iter().zip(upper).any(|(l, u)| l > u) {
                return Err(invalid("box has lower > upper"));
            }
            match cfg.cone {
                ConeSpec::Scalar { .. } | ConeSpec::Diagonal { .. } => {}
                _ => {
                    return Err(Error::Unsupported(
                        "box domain needs a scalar or diagonal cone metric".into(),
                    ))
                }
            }
        }
        let stat = GradStat::new(&cfg.cone, cfg.eps)?;
        let state = OptimizerState {
            avg_plain: vec![0.0; dim],
            wavg_num: vec![0.0; dim],
            wavg_den: 0.0,
            x: x0,
            stat,
            t: 0,
            left,
            two_sided,
        };
        Ok(Optimizer { cfg, state })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    pub fn state(&self) -> &OptimizerState {
        &self.state
    }

    pub fn x(&self) -> &[f64] {
        &self.state.x
    }

    pub fn t(&self) -> u64 {
        self.state.t
    }

    /// Mean of the iterates seen so far (`x_1..x_t`, pre-update).
    pub fn avg_plain(&self) -> &[f64] {
        &self.state.avg_plain
    }

    /// `β₂^{(t-s)/2}`-weighted mean of `x_1..x_t`. Equals the plain mean at
    /// `β₂ = 1`.
    pub fn avg_weighted(&self) -> Vec<f64> {
        if self.state.wavg_den == 0.0 {
            return self.state.x.clone();
        }
        self.state
            .wavg_num
            .iter()
            .map(|v| v / self.state.wavg_den)
            .collect()
    }

    fn fold_averages(&mut self) {
        let t = self.state.t as f64;
        let w = self.cfg.beta2.sqrt();
        for i in 0..self.state.x.len() {
            let xi = self.state.x[i];
            self.state.avg_plain[i] = (self.state.avg_plain[i] * t + xi) / (t + 1.0);
            self.state.wavg_num[i] = self.state.wavg_num[i] * w + xi;
        }
        self.state.wavg_den = self.state.wavg_den * w + 1.0;
    }

    /// Apply one gradient. The gradient is a flat row-major slice; for the
    /// matrix-shaped modes it is `vec(G)` with `G` of shape `d_L × d_R`.
    pub fn step(&mut self, g: &[f64]) -> Result<StepOutcome> {
        let dim = self.cfg.cone.ambient_dim();
        if g.len() != dim {
            return Err(invalid(format!(
                "gradient length {} does not match dimension {dim}",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(invalid("gradient has non-finite entries"));
        }
        self.fold_averages();
        self.state.t += 1;
        let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();

        let trace_h = match self.cfg.mode {
            Mode::AdaReg | Mode::WeightedAdaReg | Mode::EmaAdaReg => {
                let decay = match self.cfg.mode {
                    Mode::AdaReg => 1.0,
                    _ => self.cfg.beta2,
                };
                self.state.stat = stat_update(&self.cfg.cone, &self.state.stat, g, decay)?;
                let h = solve_preconditioner(&self.cfg.cone, &self.state.stat, 0.0, self.cfg.eta)?;
                let step = h.pinv_apply(g);
                let moved: Vec<f64> =
                    self.state.x.iter().zip(&step).map(|(x, s)| x - s).collect();
                self.state.x = project(&self.cfg.domain, &h, &moved)?;
                h.trace()
            }
            Mode::OneSidedShampoo => {
                let (dl, dr) = self.kron_shape();
                let gm = Mat::from_vec(dl, dr, g.to_vec()).expect("checked length");
                let left = self.state.left.as_mut().expect("one-sided state");
                left.add_scaled(&gm.gram_left(), 1.0 / dr as f64);
                let l = PsdMatrix::new(left.clone())?;
                let step = l.inv_sqrt().as_sym().to_mat().matmul(&gm).scale(self.cfg.eta);
                for (x, s) in self.state.x.iter_mut().zip(step.as_slice()) {
                    *x -= s;
                }
                // H_t = (1/η) L^{1/2} ⊗ I.
                l.sqrt().trace() * dr as f64 / self.cfg.eta
            }
            Mode::TwoSidedShampoo => {
                let (dl, dr) = self.kron_shape();
                let gm = Mat::from_vec(dl, dr, g.to_vec()).expect("checked length");
                let (lstat, rstat) = self.state.two_sided.as_mut().expect("two-sided state");
                lstat.add_scaled(&gm.gram_left(), 1.0);
                rstat.add_scaled(&gm.gram_right(), 1.0);
                let l = PsdMatrix::new(lstat.clone())?;
                let r = PsdMatrix::new(rstat.clone())?;
                let lq = crate::linalg::psd_power(&l, Power::NegQuarter);
                let rq = crate::linalg::psd_power(&r, Power::NegQuarter);
                let step = lq
                    .as_sym()
                    .to_mat()
                    .matmul(&gm)
                    .matmul(&rq.as_sym().to_mat())
                    .scale(self.cfg.eta);
                for (x, s) in self.state.x.iter_mut().zip(step.as_slice()) {
                    *x -= s;
                }
                crate::linalg::psd_power(&l, Power::Quarter).trace()
                    * crate::linalg::psd_power(&r, Power::Quarter).trace()
                    / self.cfg.eta
            }
        };
        Ok(StepOutcome { t: self.state.t, grad_norm, trace_h })
    }

    fn kron_shape(&self) -> (usize, usize) {
        match self.cfg.cone {
            ConeSpec::KroneckerLeft { d_left, d_right } => (d_left, d_right),
            _ => unreachable!("validated at construction"),
        }
    }
}
