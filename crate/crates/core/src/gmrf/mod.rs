//! Gaussian Markov random field prior over latent log-intensities and
//! mean-reversion levels.
//!
//! For one series with latent AR(1) path `η_1..η_T` reverting to `μ`, the
//! joint precision over `(η_1, …, η_T, μ)` is tridiagonal in the `η` block
//! with a dense last row/column for `μ`. With `φ̃ = φ − 1` and
//! `ψ_T = T − 2(T−1)φ + (T−2)φ²`:
//!
//! ```text
//!  τ      −τφ                        τφ̃
//! −τφ   τ(φ²+1)   ⋱                 −τφ̃²
//!          ⋱      ⋱      −τφ         ⋮
//!                τ(φ²+1)  −τφ       −τφ̃²
//!                  −τφ     τ         τφ̃
//!  τφ̃   −τφ̃²  ⋯  −τφ̃²     τφ̃    τ_μ + τψ_T
//! ```
//!
//! with determinant `τ^T τ_μ (1 − φ²)`. The group version stacks one such block
//! per series and appends the global level `μ_μ`, coupled to every `μ_ℓ` by
//! `−τ_{μ_ℓ}`.

mod cholesky;

use std::collections::BTreeMap;

pub use cholesky::CholeskyFactor;

use crate::error::{domain, Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Identity of a row/column of a precision or Hessian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Eta {
        series: usize,
        period: usize,
    },
    SeriesMean(usize),
    GlobalMean,
    /// Any other variable, identified by its index in an external layout.
    Other(usize),
}

/// Symmetric sparse matrix stored as its lower triangle in coordinate form,
/// sorted by `(row, col)` with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePrecision {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
    layout: Vec<VarId>,
}

impl SparsePrecision {
    /// Builds from arbitrary coordinates. Upper-triangle coordinates are
    /// mirrored into the lower triangle and duplicates are summed.
    pub fn from_entries(
        dim: usize,
        entries: Vec<(usize, usize, f64)>,
        layout: Vec<VarId>,
    ) -> Result<Self> {
        if layout.len() != dim {
            return Err(Error::Dimension(format!(
                "layout has {} entries for dimension {dim}",
                layout.len()
            )));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(Error::Dimension(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Numerical(format!("non-finite entry at ({r}, {c})")));
            }
            let key = if r >= c { (r, c) } else { (c, r) };
            *merged.entry(key).or_insert(0.0) += v;
        }
        Ok(Self {
            dim,
            entries: merged.into_iter().map(|((r, c), v)| (r, c, v)).collect(),
            layout,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn layout(&self) -> &[VarId] {
        &self.layout
    }

    /// Number of stored (lower-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let key = if row >= col { (row, col) } else { (col, row) };
        self.entries
            .binary_search_by(|&(r, c, _)| (r, c).cmp(&key))
            .map(|i| self.entries[i].2)
            .unwrap_or(0.0)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(r, c, v)| {
                if r == c {
                    v * x[r] * x[r]
                } else {
                    2.0 * v * x[r] * x[c]
                }
            })
            .sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.dim]; self.dim];
        for &(r, c, v) in &self.entries {
            a[r][c] = v;
            a[c][r] = v;
        }
        a
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                d[r] = v;
            }
        }
        d
    }

    /// Returns a copy with `ridge` added to every diagonal entry.
    pub fn with_ridge(&self, ridge: f64) -> Self {
        let mut entries = self.entries.clone();
        entries.extend((0..self.dim).map(|i| (i, i, ridge)));
        Self::from_entries(self.dim, entries, self.layout.clone()).expect("same shape")
    }
}

/// How the first latent period is initialised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialPrecision {
    /// `η_1` drawn from the long-run AR(1) distribution, precision `τ(1 − φ²)`.
    Stationary,
    /// `η_1 = μ + ε_1` with `ε_1 ~ N(0, 1/τ_0 + 1/τ)`.
    Free { tau0: f64 },
}

/// Prior parameters of one series block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBlock {
    pub tau: f64,
    pub phi: f64,
    pub tau_mu: f64,
    pub periods: usize,
    pub initial: InitialPrecision,
}

impl SeriesBlock {
    pub fn stationary(tau: f64, phi: f64, tau_mu: f64, periods: usize) -> Self {
        Self {
            tau,
            phi,
            tau_mu,
            periods,
            initial: InitialPrecision::Stationary,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(domain(format!(
                "innovation precision must be positive, got {}",
                self.tau
            )));
        }
        if !(self.phi.is_finite() && self.phi.abs() < 1.0) {
            return Err(domain(format!(
                "mean-reversion coefficient must satisfy |phi| < 1, got {}",
                self.phi
            )));
        }
        if !(self.tau_mu.is_finite() && self.tau_mu > 0.0) {
            return Err(domain(format!(
                "level precision must be positive, got {}",
                self.tau_mu
            )));
        }
        if self.periods < 2 {
            return Err(domain(format!(
                "a series block needs at least 2 periods, got {}",
                self.periods
            )));
        }
        if let InitialPrecision::Free { tau0 } = self.initial {
            if !(tau0.is_finite() && tau0 > 0.0) {
                return Err(domain(format!(
                    "initial precision must be positive, got {tau0}"
                )));
            }
        }
        Ok(())
    }

    /// Conditional precision of `η_1` given `μ`.
    pub fn first_precision(&self) -> f64 {
        match self.initial {
            InitialPrecision::Stationary => self.tau * (1.0 - self.phi * self.phi),
            InitialPrecision::Free { tau0 } => self.tau * tau0 / (self.tau + tau0),
        }
    }

    /// `ln det` of the `(η, μ)` block; `τ^T τ_μ (1 − φ²)` in the stationary case.
    pub fn log_det(&self) -> f64 {
        let t = self.periods as f64;
        match self.initial {
            InitialPrecision::Stationary => {
                t * self.tau.ln() + self.tau_mu.ln() + (1.0 - self.phi * self.phi).ln()
            }
            InitialPrecision::Free { .. } => {
                self.first_precision().ln() + (t - 1.0) * self.tau.ln() + self.tau_mu.ln()
            }
        }
    }

    /// Appends the block with `η_1` at `offset` and `μ` at `offset + T`.
    fn push_entries(&self, offset: usize, entries: &mut Vec<(usize, usize, f64)>) {
        let t = self.periods;
        let (tau, phi) = (self.tau, self.phi);
        let mu = offset + t;
        let off_diag = -tau * phi;
        match self.initial {
            InitialPrecision::Stationary => {
                let phi_t = phi - 1.0;
                let tf = t as f64;
                let psi = tf - 2.0 * (tf - 1.0) * phi + (tf - 2.0) * phi * phi;
                for i in 0..t {
                    let diag = if i == 0 || i == t - 1 {
                        tau
                    } else {
                        tau * (phi * phi + 1.0)
                    };
                    entries.push((offset + i, offset + i, diag));
                    if i > 0 {
                        entries.push((offset + i, offset + i - 1, off_diag));
                    }
                }
                for i in 0..t {
                    let v = if i == 0 || i == t - 1 {
                        tau * phi_t
                    } else {
                        -tau * phi_t * phi_t
                    };
                    entries.push((mu, offset + i, v));
                }
                entries.push((mu, mu, self.tau_mu + tau * psi));
            }
            InitialPrecision::Free { .. } => {
                let first = self.first_precision() + tau * phi * phi;
                let mut corner = self.tau_mu;
                for i in 0..t {
                    let diag = if i == 0 {
                        first
                    } else if i == t - 1 {
                        tau
                    } else {
                        tau * (phi * phi + 1.0)
                    };
                    entries.push((offset + i, offset + i, diag));
                    if i > 0 {
                        entries.push((offset + i, offset + i - 1, off_diag));
                    }
                    // μ couples through minus the row sums of the η block
                    let neighbours = if i == 0 || i == t - 1 { 1.0 } else { 2.0 };
                    let row_sum = diag + neighbours * off_diag;
                    entries.push((mu, offset + i, -row_sum));
                    corner += row_sum;
                }
                entries.push((mu, mu, corner));
            }
        }
    }
}

/// `(T+1)×(T+1)` precision over `(η_1, …, η_T, μ)` for one series.
pub fn build_single_series_precision(
    tau: f64,
    phi: f64,
    tau_mu: f64,
    periods: usize,
) -> Result<SparsePrecision> {
    build_series_precision(&SeriesBlock::stationary(tau, phi, tau_mu, periods))
}

pub fn build_series_precision(block: &SeriesBlock) -> Result<SparsePrecision> {
    block.validate()?;
    let mut entries = Vec::with_capacity(3 * block.periods + 1);
    block.push_entries(0, &mut entries);
    let mut layout: Vec<VarId> = (0..block.periods)
        .map(|period| VarId::Eta { series: 0, period })
        .collect();
    layout.push(VarId::SeriesMean(0));
    SparsePrecision::from_entries(block.periods + 1, entries, layout)
}

/// Group precision of dimension `L(T+1) + 1`, one block per series followed
/// by the global level `μ_μ` with prior precision `tau_mumu`.
pub fn build_hierarchical_precision(
    series: &[SeriesBlock],
    tau_mumu: f64,
) -> Result<SparsePrecision> {
    let periods = validate_group(series, tau_mumu)?;
    let stride = periods + 1;
    let dim = series.len() * stride + 1;
    let global = dim - 1;
    let mut entries = Vec::with_capacity(series.len() * (3 * periods + 2) + 1);
    let mut layout = Vec::with_capacity(dim);
    let mut corner = tau_mumu;
    for (l, block) in series.iter().enumerate() {
        let offset = l * stride;
        block.push_entries(offset, &mut entries);
        entries.push((global, offset + periods, -block.tau_mu));
        corner += block.tau_mu;
        layout.extend((0..periods).map(|period| VarId::Eta { series: l, period }));
        layout.push(VarId::SeriesMean(l));
    }
    entries.push((global, global, corner));
    layout.push(VarId::GlobalMean);
    SparsePrecision::from_entries(dim, entries, layout)
}

fn validate_group(series: &[SeriesBlock], tau_mumu: f64) -> Result<usize> {
    let first = series
        .first()
        .ok_or_else(|| domain("a group needs at least one series"))?;
    if !(tau_mumu.is_finite() && tau_mumu > 0.0) {
        return Err(domain(format!(
            "global level precision must be positive, got {tau_mumu}"
        )));
    }
    for block in series {
        block.validate()?;
        if block.periods != first.periods {
            return Err(domain(
                "all series in a group must share the number of periods",
            ));
        }
    }
    Ok(first.periods)
}

/// Closed-form `ln det` of the group precision:
/// `ln τ_{μμ} + Σ_ℓ ln |τ_{μ_ℓ} τ_ℓ^T (1 − φ_ℓ²)|`.
pub fn hierarchical_log_det(series: &[SeriesBlock], tau_mumu: f64) -> Result<f64> {
    validate_group(series, tau_mumu)?;
    Ok(tau_mumu.ln() + series.iter().map(SeriesBlock::log_det).sum::<f64>())
}

/// `ln N(x | mean, Q⁻¹)` with the log-determinant from a sparse Cholesky factor.
pub fn gmrf_log_density(x: &[f64], mean: &[f64], q: &SparsePrecision) -> Result<f64> {
    let factor = CholeskyFactor::new(q)?;
    gmrf_log_density_with_log_det(x, mean, q, factor.log_det())
}

/// Same as [`gmrf_log_density`] with a known `ln det Q` (closed-form fast path).
pub fn gmrf_log_density_with_log_det(
    x: &[f64],
    mean: &[f64],
    q: &SparsePrecision,
    log_det: f64,
) -> Result<f64> {
    if x.len() != q.dim() || mean.len() != q.dim() {
        return Err(Error::Dimension(format!(
            "point has length {}, mean {}, precision dimension {}",
            x.len(),
            mean.len(),
            q.dim()
        )));
    }
    let d: Vec<f64> = x.iter().zip(mean).map(|(a, b)| a - b).collect();
    Ok(-0.5 * q.dim() as f64 * LN_2PI + 0.5 * log_det - 0.5 * q.quad_form(&d))
}

/// Variance and full covariance column for a target variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMoments {
    pub variance: f64,
    pub column: Vec<f64>,
}

/// Columns of `Q⁻¹` for the requested targets: one factorization, then one
/// pair of triangular solves per target.
pub fn sparse_solve_columns(
    q: &SparsePrecision,
    targets: &[usize],
) -> Result<BTreeMap<usize, ColumnMoments>> {
    let factor = CholeskyFactor::new(q)?;
    solve_columns_with(&factor, targets)
}

pub fn solve_columns_with(
    factor: &CholeskyFactor,
    targets: &[usize],
) -> Result<BTreeMap<usize, ColumnMoments>> {
    let mut out = BTreeMap::new();
    for &t in targets {
        if out.contains_key(&t) {
            continue;
        }
        let column = factor.inverse_column(t)?;
        out.insert(
            t,
            ColumnMoments {
                variance: column[t],
                column,
            },
        );
    }
    Ok(out)
}
