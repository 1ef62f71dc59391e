use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Closed interval `[lower, upper]` of a uniform hyperprior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub const fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Supports of the uniform hyperpriors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperBounds {
    pub alpha_bar: Interval,
    pub tau_mu: Interval,
    pub kappa_tau: Interval,
    pub beta_tau: Interval,
    pub kappa_0tau: Interval,
    pub beta_0tau: Interval,
    pub kappa_theta: Interval,
    pub beta_theta: Interval,
    pub phi_plus: Interval,
    pub phi_minus: Interval,
}

impl Default for HyperBounds {
    fn default() -> Self {
        Self {
            alpha_bar: Interval::new(0.001, 0.1),
            tau_mu: Interval::new(1.0, 10.0),
            kappa_tau: Interval::new(5.0, 10.0),
            beta_tau: Interval::new(2.0, 25.0),
            kappa_0tau: Interval::new(1.0, 5.0),
            beta_0tau: Interval::new(1.0, 10.0),
            kappa_theta: Interval::new(5.0, 10.0),
            beta_theta: Interval::new(2.0, 25.0),
            phi_plus: Interval::new(1.0, 600.0),
            phi_minus: Interval::new(1.0, 50.0),
        }
    }
}

impl HyperBounds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("alpha_bar", self.alpha_bar),
            ("tau_mu", self.tau_mu),
            ("kappa_tau", self.kappa_tau),
            ("beta_tau", self.beta_tau),
            ("kappa_0tau", self.kappa_0tau),
            ("beta_0tau", self.beta_0tau),
            ("kappa_theta", self.kappa_theta),
            ("beta_theta", self.beta_theta),
            ("phi_plus", self.phi_plus),
            ("phi_minus", self.phi_minus),
        ];
        for (name, b) in all {
            if !(b.lower.is_finite() && b.upper.is_finite() && b.lower > 0.0 && b.upper > b.lower) {
                return Err(domain(format!(
                    "bounds for {name} must satisfy 0 < lower < upper, got [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }
}

/// How the first latent period of each series is initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initialization {
    /// First period drawn from the long-run AR(1) distribution.
    #[default]
    Stationary,
    /// First period has its own precision `τ_0` with a gamma prior.
    Free,
}

/// Parameter groups held at their supplied values during fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FixedBlocks {
    /// All uniform-prior hyperparameters and `θ̄`.
    pub hyper: bool,
    pub global_mean: bool,
    /// Per-series `z`, `α`, `τ`, `τ_0`, `φ`, `τ_θ`.
    pub series: bool,
    pub series_mean: bool,
    pub theta: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub bounds: HyperBounds,
    /// Prior variance of the global level `μ_μ`.
    pub mu_mu_variance: f64,
    /// Prior variance of each component of `θ̄`.
    pub theta_bar_variance: f64,
    pub initialization: Initialization,
    /// Bound on `|η + xᵀθ|` inside the likelihood.
    pub eta_clamp: f64,
    /// Added to counts before taking logs at initialisation.
    pub continuity: f64,
    pub fixed: FixedBlocks,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            bounds: HyperBounds::default(),
            mu_mu_variance: 4.0,
            theta_bar_variance: 1.0,
            initialization: Initialization::Stationary,
            eta_clamp: 30.0,
            continuity: 0.5,
            fixed: FixedBlocks::default(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        for (name, v) in [
            ("mu_mu_variance", self.mu_mu_variance),
            ("theta_bar_variance", self.theta_bar_variance),
            ("eta_clamp", self.eta_clamp),
            ("continuity", self.continuity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    /// Rate of the exponential prior on each `α_ℓ`.
    pub alpha_bar: f64,
    pub mu_mu: f64,
    pub tau_mu: f64,
    pub kappa_tau: f64,
    pub beta_tau: f64,
    pub kappa_0tau: f64,
    pub beta_0tau: f64,
    pub kappa_theta: f64,
    pub beta_theta: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub theta_bar: Vec<f64>,
}

impl GlobalParams {
    /// Every bounded hyperparameter at the midpoint of its support.
    pub fn midpoints(bounds: &HyperBounds, n_covariates: usize) -> Self {
        Self {
            alpha_bar: bounds.alpha_bar.midpoint(),
            mu_mu: 0.0,
            tau_mu: bounds.tau_mu.midpoint(),
            kappa_tau: bounds.kappa_tau.midpoint(),
            beta_tau: bounds.beta_tau.midpoint(),
            kappa_0tau: bounds.kappa_0tau.midpoint(),
            beta_0tau: bounds.beta_0tau.midpoint(),
            kappa_theta: bounds.kappa_theta.midpoint(),
            beta_theta: bounds.beta_theta.midpoint(),
            phi_plus: bounds.phi_plus.midpoint(),
            phi_minus: bounds.phi_minus.midpoint(),
            theta_bar: vec![0.0; n_covariates],
        }
    }

    /// Parameters `(a, b)` of the beta prior on `φ_ℓ`.
    pub fn phi_prior(&self) -> (f64, f64) {
        (self.phi_plus + self.phi_minus, self.phi_minus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesParams {
    pub z: f64,
    pub alpha: f64,
    pub tau: f64,
    pub tau_0: f64,
    pub phi: f64,
    pub mu: f64,
    pub theta: Vec<f64>,
    pub tau_theta: f64,
}

/// All latent quantities of the model. `eta[ℓ]` covers every period,
/// forecast horizon included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterState {
    pub global: GlobalParams,
    pub series: Vec<SeriesParams>,
    pub eta: Vec<Vec<f64>>,
}

/// Identity of one scalar in the flat parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    AlphaBar,
    TauMu,
    KappaTau,
    BetaTau,
    Kappa0,
    Beta0,
    KappaTheta,
    BetaTheta,
    PhiPlus,
    PhiMinus,
    ThetaBar(usize),
    MuMu,
    Z(usize),
    Alpha(usize),
    Tau(usize),
    Tau0(usize),
    Phi(usize),
    TauTheta(usize),
    Mu(usize),
    Theta(usize, usize),
    Eta(usize, usize),
}

impl Slot {
    pub fn series(&self) -> Option<usize> {
        match *self {
            Slot::Z(l)
            | Slot::Alpha(l)
            | Slot::Tau(l)
            | Slot::Tau0(l)
            | Slot::Phi(l)
            | Slot::TauTheta(l)
            | Slot::Mu(l)
            | Slot::Theta(l, _)
            | Slot::Eta(l, _) => Some(l),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Slot::AlphaBar => "alpha_bar".into(),
            Slot::TauMu => "tau_mu".into(),
            Slot::KappaTau => "kappa_tau".into(),
            Slot::BetaTau => "beta_tau".into(),
            Slot::Kappa0 => "kappa_0tau".into(),
            Slot::Beta0 => "beta_0tau".into(),
            Slot::KappaTheta => "kappa_theta".into(),
            Slot::BetaTheta => "beta_theta".into(),
            Slot::PhiPlus => "phi_plus".into(),
            Slot::PhiMinus => "phi_minus".into(),
            Slot::ThetaBar(j) => format!("theta_bar_{}", j + 1),
            Slot::MuMu => "mu_mu".into(),
            Slot::Z(_) => "z".into(),
            Slot::Alpha(_) => "alpha".into(),
            Slot::Tau(_) => "tau".into(),
            Slot::Tau0(_) => "tau_0".into(),
            Slot::Phi(_) => "phi".into(),
            Slot::TauTheta(_) => "tau_theta".into(),
            Slot::Mu(_) => "mu".into(),
            Slot::Theta(_, j) => format!("theta_{}", j + 1),
            Slot::Eta(_, t) => format!("eta_{}", t + 1),
        }
    }
}

/// Map between a constrained scalar and its unconstrained coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Real,
    /// `x = e^u`.
    Positive,
    /// `x = σ(u)` on `(0, 1)`.
    Unit,
    /// `x = a + (b − a) σ(u)`.
    Bounded(Interval),
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Keeps a unit-interval value off the boundary.
fn nudge(p: f64) -> f64 {
    p.clamp(f64::EPSILON, 1.0 - f64::EPSILON)
}

impl Transform {
    pub fn to_constrained(&self, u: f64) -> f64 {
        match *self {
            Transform::Real => u,
            Transform::Positive => u.exp(),
            Transform::Unit => sigmoid(u),
            Transform::Bounded(b) => b.lower + b.width() * sigmoid(u),
        }
    }

    pub fn to_unconstrained(&self, x: f64) -> f64 {
        match *self {
            Transform::Real => x,
            Transform::Positive => x.max(f64::MIN_POSITIVE).ln(),
            Transform::Unit => logit(nudge(x)),
            Transform::Bounded(b) => logit(nudge((x - b.lower) / b.width())),
        }
    }

    /// `dx/du` at the constrained value `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Transform::Real => 1.0,
            Transform::Positive => x,
            Transform::Unit => x * (1.0 - x),
            Transform::Bounded(b) => {
                let s = (x - b.lower) / b.width();
                b.width() * s * (1.0 - s)
            }
        }
    }

    /// `ln |dx/du|` at the constrained value `x`.
    pub fn log_jacobian(&self, x: f64) -> f64 {
        match *self {
            Transform::Real => 0.0,
            Transform::Positive => x.ln(),
            Transform::Unit => x.ln() + (1.0 - x).ln(),
            Transform::Bounded(b) => {
                let s = (x - b.lower) / b.width();
                b.width().ln() + s.ln() + (1.0 - s).ln()
            }
        }
    }

    /// `d ln|dx/du| / du` at the constrained value `x`.
    pub fn log_jacobian_derivative(&self, x: f64) -> f64 {
        match *self {
            Transform::Real => 0.0,
            Transform::Positive => 1.0,
            Transform::Unit => 1.0 - 2.0 * x,
            Transform::Bounded(b) => 1.0 - 2.0 * (x - b.lower) / b.width(),
        }
    }
}

/// Flat layout of the parameter state: the global block, then one block of
/// scalars per series, then the latent paths series by series.
///
/// Global block: `ᾱ, τ_μ, κ_τ, β_τ, [κ_0τ, β_0τ], [κ_θ, β_θ], φ_+, φ_−,
/// θ̄_1..θ̄_N, μ_μ`. Series block: `z, α, τ, [τ_0], φ, [τ_θ], μ, θ_1..θ_N`.
/// Bracketed entries exist only with free initialisation / covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub n_series: usize,
    pub n_periods: usize,
    pub n_covariates: usize,
    pub initialization: Initialization,
    slots: Vec<Slot>,
    transforms: Vec<Transform>,
    free: Vec<bool>,
    global_len: usize,
    series_stride: usize,
}

impl Layout {
    pub fn new(
        n_series: usize,
        n_periods: usize,
        n_covariates: usize,
        config: &ModelConfig,
    ) -> Self {
        let b = &config.bounds;
        let with_tau0 = config.initialization == Initialization::Free;
        let with_theta = n_covariates > 0;
        let fixed = &config.fixed;
        let mut slots = Vec::new();
        let mut transforms = Vec::new();
        let mut free = Vec::new();
        macro_rules! push {
            ($slot:expr, $transform:expr, $free:expr) => {{
                slots.push($slot);
                transforms.push($transform);
                free.push($free);
            }};
        }
        let h = !fixed.hyper;
        push!(Slot::AlphaBar, Transform::Bounded(b.alpha_bar), h);
        push!(Slot::TauMu, Transform::Bounded(b.tau_mu), h);
        push!(Slot::KappaTau, Transform::Bounded(b.kappa_tau), h);
        push!(Slot::BetaTau, Transform::Bounded(b.beta_tau), h);
        if with_tau0 {
            push!(Slot::Kappa0, Transform::Bounded(b.kappa_0tau), h);
            push!(Slot::Beta0, Transform::Bounded(b.beta_0tau), h);
        }
        if with_theta {
            push!(Slot::KappaTheta, Transform::Bounded(b.kappa_theta), h);
            push!(Slot::BetaTheta, Transform::Bounded(b.beta_theta), h);
        }
        push!(Slot::PhiPlus, Transform::Bounded(b.phi_plus), h);
        push!(Slot::PhiMinus, Transform::Bounded(b.phi_minus), h);
        for j in 0..n_covariates {
            push!(Slot::ThetaBar(j), Transform::Real, h);
        }
        push!(Slot::MuMu, Transform::Real, !fixed.global_mean);
        let global_len = slots.len();

        let s = !fixed.series;
        for l in 0..n_series {
            push!(Slot::Z(l), Transform::Unit, s);
            push!(Slot::Alpha(l), Transform::Positive, s);
            push!(Slot::Tau(l), Transform::Positive, s);
            if with_tau0 {
                push!(Slot::Tau0(l), Transform::Positive, s);
            }
            push!(Slot::Phi(l), Transform::Unit, s);
            if with_theta {
                push!(Slot::TauTheta(l), Transform::Positive, s);
            }
            push!(Slot::Mu(l), Transform::Real, !fixed.series_mean);
            for j in 0..n_covariates {
                push!(Slot::Theta(l, j), Transform::Real, !fixed.theta);
            }
        }
        let series_stride = if n_series == 0 {
            0
        } else {
            (slots.len() - global_len) / n_series
        };
        for l in 0..n_series {
            for t in 0..n_periods {
                push!(Slot::Eta(l, t), Transform::Real, true);
            }
        }
        Self {
            n_series,
            n_periods,
            n_covariates,
            initialization: config.initialization,
            slots,
            transforms,
            free,
            global_len,
            series_stride,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn transform(&self, index: usize) -> Transform {
        self.transforms[index]
    }

    pub fn is_free(&self, index: usize) -> bool {
        self.free[index]
    }

    /// Indices of the free slots, in layout order.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.free[i]).collect()
    }

    pub fn n_free(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn global_len(&self) -> usize {
        self.global_len
    }

    pub fn series_stride(&self) -> usize {
        self.series_stride
    }

    pub fn has_tau0(&self) -> bool {
        self.initialization == Initialization::Free
    }

    pub fn has_theta(&self) -> bool {
        self.n_covariates > 0
    }

    /// Index of a slot in the full layout.
    pub fn index(&self, slot: Slot) -> Option<usize> {
        let tau0 = usize::from(self.has_tau0());
        let th = usize::from(self.has_theta());
        let n = self.n_covariates;
        let series_base = |l: usize| self.global_len + l * self.series_stride;
        let eta_base = self.global_len + self.n_series * self.series_stride;
        let idx = match slot {
            Slot::AlphaBar => 0,
            Slot::TauMu => 1,
            Slot::KappaTau => 2,
            Slot::BetaTau => 3,
            Slot::Kappa0 if tau0 == 1 => 4,
            Slot::Beta0 if tau0 == 1 => 5,
            Slot::KappaTheta if th == 1 => 4 + 2 * tau0,
            Slot::BetaTheta if th == 1 => 5 + 2 * tau0,
            Slot::PhiPlus => 4 + 2 * tau0 + 2 * th,
            Slot::PhiMinus => 5 + 2 * tau0 + 2 * th,
            Slot::ThetaBar(j) if j < n => 6 + 2 * tau0 + 2 * th + j,
            Slot::MuMu => self.global_len - 1,
            Slot::Z(l) if l < self.n_series => series_base(l),
            Slot::Alpha(l) if l < self.n_series => series_base(l) + 1,
            Slot::Tau(l) if l < self.n_series => series_base(l) + 2,
            Slot::Tau0(l) if l < self.n_series && tau0 == 1 => series_base(l) + 3,
            Slot::Phi(l) if l < self.n_series => series_base(l) + 3 + tau0,
            Slot::TauTheta(l) if l < self.n_series && th == 1 => series_base(l) + 4 + tau0,
            Slot::Mu(l) if l < self.n_series => series_base(l) + 4 + tau0 + th,
            Slot::Theta(l, j) if l < self.n_series && j < n => series_base(l) + 5 + tau0 + th + j,
            Slot::Eta(l, t) if l < self.n_series && t < self.n_periods => {
                eta_base + l * self.n_periods + t
            }
            _ => return None,
        };
        Some(idx)
    }

    pub fn eta_start(&self, series: usize) -> usize {
        self.global_len + self.n_series * self.series_stride + series * self.n_periods
    }

    /// Writes a state into a full constrained vector.
    pub fn flatten(&self, state: &ParameterState) -> Result<Vec<f64>> {
        self.check_shape(state)?;
        let mut x = vec![0.0; self.len()];
        for (i, slot) in self.slots.iter().enumerate() {
            x[i] = read_slot(state, *slot);
        }
        Ok(x)
    }

    /// Reads a state back from a full constrained vector.
    pub fn unflatten(&self, x: &[f64]) -> ParameterState {
        let mut state = ParameterState {
            global: GlobalParams {
                alpha_bar: 0.0,
                mu_mu: 0.0,
                tau_mu: 0.0,
                kappa_tau: 0.0,
                beta_tau: 0.0,
                kappa_0tau: 0.0,
                beta_0tau: 0.0,
                kappa_theta: 0.0,
                beta_theta: 0.0,
                phi_plus: 0.0,
                phi_minus: 0.0,
                theta_bar: vec![0.0; self.n_covariates],
            },
            series: vec![
                SeriesParams {
                    z: 0.0,
                    alpha: 0.0,
                    tau: 0.0,
                    tau_0: 0.0,
                    phi: 0.0,
                    mu: 0.0,
                    theta: vec![0.0; self.n_covariates],
                    tau_theta: 0.0,
                };
                self.n_series
            ],
            eta: vec![vec![0.0; self.n_periods]; self.n_series],
        };
        for (slot, &v) in self.slots.iter().zip(x) {
            write_slot(&mut state, *slot, v);
        }
        state
    }

    fn check_shape(&self, state: &ParameterState) -> Result<()> {
        let ok = state.series.len() == self.n_series
            && state.eta.len() == self.n_series
            && state.global.theta_bar.len() == self.n_covariates
            && state.eta.iter().all(|e| e.len() == self.n_periods)
            && state
                .series
                .iter()
                .all(|s| s.theta.len() == self.n_covariates);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "state does not match a layout of {} series, {} periods and {} covariates",
                self.n_series, self.n_periods, self.n_covariates
            )))
        }
    }

    /// Unconstrained vector of the free slots.
    pub fn pack(&self, state: &ParameterState) -> Result<Vec<f64>> {
        let x = self.flatten(state)?;
        Ok(self.pack_full(&x))
    }

    pub fn pack_full(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .filter(|&i| self.free[i])
            .map(|i| self.transforms[i].to_unconstrained(x[i]))
            .collect()
    }

    /// Fills the free slots of `template` (a full constrained vector) from an
    /// unconstrained vector.
    pub fn unpack_into(&self, v: &[f64], template: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n_free() || template.len() != self.len() {
            return Err(Error::Dimension(format!(
                "expected {} free and {} total values, got {} and {}",
                self.n_free(),
                self.len(),
                v.len(),
                template.len()
            )));
        }
        let mut x = template.to_vec();
        let mut k = 0;
        for i in 0..self.len() {
            if self.free[i] {
                x[i] = self.transforms[i].to_constrained(v[k]);
                k += 1;
            }
        }
        Ok(x)
    }

    /// State from an unconstrained vector, with fixed slots taken from `template`.
    pub fn unpack(&self, v: &[f64], template: &ParameterState) -> Result<ParameterState> {
        let base = self.flatten(template)?;
        Ok(self.unflatten(&self.unpack_into(v, &base)?))
    }
}

fn read_slot(s: &ParameterState, slot: Slot) -> f64 {
    let g = &s.global;
    match slot {
        Slot::AlphaBar => g.alpha_bar,
        Slot::TauMu => g.tau_mu,
        Slot::KappaTau => g.kappa_tau,
        Slot::BetaTau => g.beta_tau,
        Slot::Kappa0 => g.kappa_0tau,
        Slot::Beta0 => g.beta_0tau,
        Slot::KappaTheta => g.kappa_theta,
        Slot::BetaTheta => g.beta_theta,
        Slot::PhiPlus => g.phi_plus,
        Slot::PhiMinus => g.phi_minus,
        Slot::ThetaBar(j) => g.theta_bar[j],
        Slot::MuMu => g.mu_mu,
        Slot::Z(l) => s.series[l].z,
        Slot::Alpha(l) => s.series[l].alpha,
        Slot::Tau(l) => s.series[l].tau,
        Slot::Tau0(l) => s.series[l].tau_0,
        Slot::Phi(l) => s.series[l].phi,
        Slot::TauTheta(l) => s.series[l].tau_theta,
        Slot::Mu(l) => s.series[l].mu,
        Slot::Theta(l, j) => s.series[l].theta[j],
        Slot::Eta(l, t) => s.eta[l][t],
    }
}

fn write_slot(s: &mut ParameterState, slot: Slot, v: f64) {
    let g = &mut s.global;
    match slot {
        Slot::AlphaBar => g.alpha_bar = v,
        Slot::TauMu => g.tau_mu = v,
        Slot::KappaTau => g.kappa_tau = v,
        Slot::BetaTau => g.beta_tau = v,
        Slot::Kappa0 => g.kappa_0tau = v,
        Slot::Beta0 => g.beta_0tau = v,
        Slot::KappaTheta => g.kappa_theta = v,
        Slot::BetaTheta => g.beta_theta = v,
        Slot::PhiPlus => g.phi_plus = v,
        Slot::PhiMinus => g.phi_minus = v,
        Slot::ThetaBar(j) => g.theta_bar[j] = v,
        Slot::MuMu => g.mu_mu = v,
        Slot::Z(l) => s.series[l].z = v,
        Slot::Alpha(l) => s.series[l].alpha = v,
        Slot::Tau(l) => s.series[l].tau = v,
        Slot::Tau0(l) => s.series[l].tau_0 = v,
        Slot::Phi(l) => s.series[l].phi = v,
        Slot::TauTheta(l) => s.series[l].tau_theta = v,
        Slot::Mu(l) => s.series[l].mu = v,
        Slot::Theta(l, j) => s.series[l].theta[j] = v,
        Slot::Eta(l, t) => s.eta[l][t] = v,
    }
}
