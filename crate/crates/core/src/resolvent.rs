//! Damped Helmholtz resolvent `R(ik) = ((-d^2/dx^2)^{s/2} + m + ik gamma - k^2)^{-1}`
//! and the generator resolvent `(ik - A)^{-1}` on `H^{s/2} x L2`.
//!
//! Operators are assembled densely in the Fourier basis: the fractional part
//! is diagonal and multiplication by `gamma` is the cyclic convolution with
//! the discrete Fourier coefficients of its samples, which is exactly the
//! collocation product used elsewhere in the crate.

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::linalg::{self, LuSolver};
use crate::rates::{self, BoundKind, UpperBoundCheck};
use crate::spectral::{check_order, EnergyWeight, Grid, SpectralField};

/// Relative residual accepted from a direct solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-9;

/// Truncation rule: the grid must reach `|xi_max|^s >= 4 k^2`.
pub fn check_resolution(s: f64, k: f64, grid: &Grid) -> Result<()> {
    let reach = grid.max_abs_frequency().powf(s);
    if reach >= 4.0 * k * k {
        Ok(())
    } else {
        Err(Error::UnderResolved(format!(
            "|xi_max|^s = {reach:.4e} < 4 k^2 = {:.4e} (s = {s}, k = {k}, n = {})",
            4.0 * k * k,
            grid.n_modes()
        )))
    }
}

/// Largest `k` allowed on `grid` by [`check_resolution`].
pub fn max_resolved_k(s: f64, grid: &Grid) -> f64 {
    // slightly inside the boundary so the returned k passes the check
    grid.max_abs_frequency().powf(s / 2.0) / 2.0 * (1.0 - 1e-12)
}

/// Smallest even mode count (for half period `half_period`) that resolves
/// frequency `k`.
pub fn modes_required(s: f64, k: f64, half_period: f64) -> usize {
    let xi = (4.0 * k * k).powf(1.0 / s);
    let half = (xi * half_period / std::f64::consts::PI).ceil() as usize;
    2 * half.max(2)
}

fn check_mass(m: f64) -> Result<()> {
    if m.is_finite() && m > 0.0 {
        Ok(())
    } else {
        Err(Error::param("m", format!("mass must be positive, got {m}")))
    }
}

/// Discrete Fourier coefficients of the sampled damping.
fn damping_coefficients(gamma: &DampingProfile, grid: &Grid) -> Result<Vec<c64>> {
    let samples = gamma.samples(grid)?;
    Ok(grid.forward(&samples.iter().map(|&g| c64::new(g, 0.0)).collect::<Vec<_>>()))
}

/// Adds `scale * (gamma *)` as a convolution block at offset `(row, col)`.
fn add_convolution(
    target: &mut Mat<c64>,
    gamma_hat: &[c64],
    scale: c64,
    row: usize,
    col: usize,
) {
    let n = gamma_hat.len();
    for p in 0..n {
        for q in 0..n {
            target[(row + p, col + q)] += scale * gamma_hat[(p + n - q) % n];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpacePair {
    #[serde(rename = "L2->L2")]
    L2ToL2,
    #[serde(rename = "L2->Hs2")]
    L2ToHs2,
    #[serde(rename = "Hneg->L2")]
    HnegToL2,
    #[serde(rename = "energy")]
    Energy,
}

impl SpacePair {
    pub fn label(self) -> &'static str {
        match self {
            SpacePair::L2ToL2 => "L2->L2",
            SpacePair::L2ToHs2 => "L2->Hs2",
            SpacePair::HnegToL2 => "Hneg->L2",
            SpacePair::Energy => "energy",
        }
    }

    pub fn parse(label: &str) -> Option<Self> {
        [Self::L2ToL2, Self::L2ToHs2, Self::HnegToL2, Self::Energy]
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(label))
    }

    /// Predicted growth exponent of the norm for this pair.
    pub fn bound_exponent(self, s: f64) -> Result<f64> {
        let p = rates::predicted_decay(s)?;
        Ok(match self {
            SpacePair::L2ToL2 => p.resolvent_exponent_l2,
            _ => p.resolvent_exponent_energy,
        })
    }
}

/// The damped Helmholtz operator assembled in the Fourier basis.
#[derive(Clone, Debug)]
pub struct HelmholtzOperator {
    pub s: f64,
    pub m: f64,
    pub k: f64,
    pub gamma: DampingProfile,
    grid: Grid,
    matrix: Mat<c64>,
}

pub fn assemble_helmholtz(
    s: f64,
    m: f64,
    k: f64,
    gamma: &DampingProfile,
    grid: &Grid,
) -> Result<HelmholtzOperator> {
    check_order(s)?;
    check_mass(m)?;
    if !k.is_finite() {
        return Err(Error::param("k", "must be finite"));
    }
    check_resolution(s, k, grid)?;
    let n = grid.n_modes();
    let mut matrix = Mat::<c64>::zeros(n, n);
    for (p, &xi) in grid.frequencies().iter().enumerate() {
        matrix[(p, p)] = c64::new(xi.abs().powf(s) + m - k * k, 0.0);
    }
    if !gamma.is_zero() {
        let gamma_hat = damping_coefficients(gamma, grid)?;
        add_convolution(&mut matrix, &gamma_hat, c64::new(0.0, k), 0, 0);
    }
    Ok(HelmholtzOperator {
        s,
        m,
        k,
        gamma: gamma.clone(),
        grid: grid.clone(),
        matrix,
    })
}

impl HelmholtzOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    /// Action of the assembled matrix.
    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(u.grid())?;
        SpectralField::from_coeffs(&self.grid, linalg::matvec(&self.matrix, u.coeffs()))
    }

    pub fn factor(&self) -> Result<HelmholtzSolver<'_>> {
        let lu = LuSolver::new(&self.matrix)?;
        let condition = lu.ensure_well_conditioned()?;
        Ok(HelmholtzSolver {
            op: self,
            lu,
            condition,
        })
    }

    fn pair_weights(&self, pair: SpacePair, weight: EnergyWeight) -> Result<(Vec<f64>, Vec<f64>)> {
        let w: Vec<f64> = self
            .grid
            .frequencies()
            .iter()
            .map(|&xi| weight.squared(xi, self.s, self.m).sqrt())
            .collect();
        let ones = vec![1.0; w.len()];
        Ok(match pair {
            SpacePair::L2ToL2 => (ones.clone(), ones),
            SpacePair::L2ToHs2 => (ones, w),
            SpacePair::HnegToL2 => (w.iter().map(|x| 1.0 / x).collect(), ones),
            SpacePair::Energy => {
                return Err(Error::param(
                    "pair",
                    "the energy pair applies to the generator resolvent",
                ))
            }
        })
    }
}

/// A factored Helmholtz operator for repeated solves.
pub struct HelmholtzSolver<'a> {
    op: &'a HelmholtzOperator,
    lu: LuSolver,
    condition: f64,
}

impl HelmholtzSolver<'_> {
    pub fn condition_estimate(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, f: &SpectralField) -> Result<SpectralField> {
        let grid = &self.op.grid;
        grid.ensure_same(f.grid())?;
        let f_norm = linalg::vec_norm(f.coeffs());
        if f_norm == 0.0 {
            return Ok(SpectralField::zeros(grid));
        }
        let u = self.lu.solve(f.coeffs());
        let r: Vec<c64> = linalg::matvec(&self.op.matrix, &u)
            .iter()
            .zip(f.coeffs())
            .map(|(a, b)| a - b)
            .collect();
        let residual = linalg::vec_norm(&r) / f_norm;
        if !(residual <= SOLVE_RESIDUAL_TOL) {
            return Err(Error::LinearAlgebra(format!(
                "relative residual {residual:.3e} exceeds {SOLVE_RESIDUAL_TOL:.0e}"
            )));
        }
        SpectralField::from_coeffs(grid, u)
    }

    /// Solve with the adjoint operator.
    pub fn solve_adjoint(&self, f: &SpectralField) -> Result<SpectralField> {
        self.op.grid.ensure_same(f.grid())?;
        SpectralField::from_coeffs(&self.op.grid, self.lu.solve_adjoint(f.coeffs()))
    }
}

pub fn solve_resolvent(op: &HelmholtzOperator, f: &SpectralField) -> Result<SpectralField> {
    op.factor()?.solve(f)
}

/// Operator norm of `R(ik)` between the requested spaces, as the largest
/// singular value of `W_out R W_in^{-1}`.
pub fn resolvent_norm(op: &HelmholtzOperator, pair: SpacePair) -> Result<f64> {
    resolvent_norm_weighted(op, pair, EnergyWeight::Sobolev)
}

pub fn resolvent_norm_weighted(
    op: &HelmholtzOperator,
    pair: SpacePair,
    weight: EnergyWeight,
) -> Result<f64> {
    let (w_in, w_out) = op.pair_weights(pair, weight)?;
    // ||W_out H^{-1} W_in^{-1}|| = 1 / sigma_min(W_in H W_out^{-1})
    let n = op.grid.n_modes();
    let scaled = Mat::from_fn(n, n, |i, j| op.matrix[(i, j)] * (w_in[i] / w_out[j]));
    linalg::inverse_norm_from_svd(&scaled)
}

/// Power iteration on `R^* R` with the LU factors; a cross-check for
/// [`resolvent_norm`].
pub fn resolvent_norm_power(op: &HelmholtzOperator, pair: SpacePair, rel_tol: f64) -> Result<f64> {
    let (w_in, w_out) = op.pair_weights(pair, EnergyWeight::Sobolev)?;
    let lu = LuSolver::new(&op.matrix)?;
    lu.ensure_well_conditioned()?;
    let n = op.grid.n_modes();
    let apply = |x: &[c64]| {
        let y: Vec<c64> = x.iter().zip(&w_in).map(|(v, w)| v / w).collect();
        lu.solve(&y).iter().zip(&w_out).map(|(v, w)| v * w).collect::<Vec<_>>()
    };
    let apply_adj = |x: &[c64]| {
        let y: Vec<c64> = x.iter().zip(&w_out).map(|(v, w)| v * w).collect();
        lu.solve_adjoint(&y).iter().zip(&w_in).map(|(v, w)| v / w).collect::<Vec<_>>()
    };
    Ok(linalg::power_norm(n, apply, apply_adj, rel_tol, 20_000))
}

/// The generator `A = [[0, I], [-(-d^2/dx^2)^{s/2} - m, -gamma]]` acting on
/// coefficient pairs, with the diagonal energy-space weights.
#[derive(Clone, Debug)]
pub struct GeneratorBlock {
    pub s: f64,
    pub m: f64,
    pub gamma: DampingProfile,
    pub weight: EnergyWeight,
    grid: Grid,
    matrix: Mat<c64>,
    weights: Vec<f64>,
}

pub fn assemble_generator(
    s: f64,
    m: f64,
    gamma: &DampingProfile,
    grid: &Grid,
    weight: EnergyWeight,
) -> Result<GeneratorBlock> {
    check_order(s)?;
    check_mass(m)?;
    let n = grid.n_modes();
    let mut matrix = Mat::<c64>::zeros(2 * n, 2 * n);
    for (p, &xi) in grid.frequencies().iter().enumerate() {
        matrix[(p, n + p)] = c64::new(1.0, 0.0);
        matrix[(n + p, p)] = c64::new(-(xi.abs().powf(s) + m), 0.0);
    }
    if !gamma.is_zero() {
        let gamma_hat = damping_coefficients(gamma, grid)?;
        add_convolution(&mut matrix, &gamma_hat, c64::new(-1.0, 0.0), n, n);
    }
    let weights = grid
        .frequencies()
        .iter()
        .map(|&xi| weight.squared(xi, s, m).sqrt())
        .chain(std::iter::repeat(1.0).take(n))
        .collect();
    Ok(GeneratorBlock {
        s,
        m,
        gamma: gamma.clone(),
        weight,
        grid: grid.clone(),
        matrix,
        weights,
    })
}

impl GeneratorBlock {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    /// `A (u, v)`.
    pub fn apply(&self, u: &SpectralField, v: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let x = self.stack(u, v)?;
        self.unstack(linalg::matvec(&self.matrix, &x))
    }

    /// Norm on `H^{s/2} x L2` with this block's weights.
    pub fn energy_norm(&self, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        let x = self.stack(u, v)?;
        let sum: f64 = x.iter().zip(&self.weights).map(|(c, w)| (c * w).norm_sqr()).sum();
        Ok((self.grid.period() * sum).sqrt())
    }

    /// `ik - A`.
    pub fn shifted(&self, k: f64) -> Mat<c64> {
        let mut m = Mat::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| -self.matrix[(i, j)]);
        for i in 0..m.nrows() {
            m[(i, i)] += c64::new(0.0, k);
        }
        m
    }

    fn stack(&self, u: &SpectralField, v: &SpectralField) -> Result<Vec<c64>> {
        self.grid.ensure_same(u.grid())?;
        self.grid.ensure_same(v.grid())?;
        Ok(u.coeffs().iter().chain(v.coeffs()).cloned().collect())
    }

    fn unstack(&self, x: Vec<c64>) -> Result<(SpectralField, SpectralField)> {
        let n = self.grid.n_modes();
        let (a, b) = x.split_at(n);
        Ok((
            SpectralField::from_coeffs(&self.grid, a.to_vec())?,
            SpectralField::from_coeffs(&self.grid, b.to_vec())?,
        ))
    }
}

/// `(ik - A)^{-1} (f1, f2)` through the scalar Helmholtz reduction
/// `u1 = R(ik)((ik + gamma) f1 + f2)`, `u2 = ik u1 - f1`.
pub fn full_resolvent_apply(
    s: f64,
    m: f64,
    k: f64,
    gamma: &DampingProfile,
    grid: &Grid,
    f1: &SpectralField,
    f2: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    let op = assemble_helmholtz(s, m, k, gamma, grid)?;
    let ik = c64::new(0.0, k);
    let damped = crate::spectral::multiply_pointwise(f1, gamma)?;
    let rhs = f1.scale(ik).add(&damped)?.add(f2)?;
    let u1 = solve_resolvent(&op, &rhs)?;
    let u2 = u1.scale(ik).sub(f1)?;
    Ok((u1, u2))
}

/// Same map by a direct solve of the assembled `2N x 2N` system.
pub fn full_resolvent_apply_monolithic(
    generator: &GeneratorBlock,
    k: f64,
    f1: &SpectralField,
    f2: &SpectralField,
) -> Result<(SpectralField, SpectralField)> {
    let lu = LuSolver::new(&generator.shifted(k))?;
    lu.ensure_well_conditioned()?;
    let rhs = generator.stack(f1, f2)?;
    generator.unstack(lu.solve(&rhs))
}

/// `||(ik - A)^{-1}||` on `H^{s/2} x L2` (Sobolev weights).
pub fn full_resolvent_norm(
    s: f64,
    m: f64,
    k: f64,
    gamma: &DampingProfile,
    grid: &Grid,
) -> Result<f64> {
    full_resolvent_norm_weighted(s, m, k, gamma, grid, EnergyWeight::Sobolev)
}

pub fn full_resolvent_norm_weighted(
    s: f64,
    m: f64,
    k: f64,
    gamma: &DampingProfile,
    grid: &Grid,
    weight: EnergyWeight,
) -> Result<f64> {
    check_resolution(s, k, grid)?;
    let generator = assemble_generator(s, m, gamma, grid, weight)?;
    generator_resolvent_norm(&generator, k)
}

/// `||(ik - A)^{-1}||` for an already assembled generator.
pub fn generator_resolvent_norm(generator: &GeneratorBlock, k: f64) -> Result<f64> {
    let shifted = generator.shifted(k);
    let w = &generator.weights;
    let scaled = Mat::from_fn(shifted.nrows(), shifted.ncols(), |i, j| shifted[(i, j)] * (w[i] / w[j]));
    linalg::inverse_norm_from_svd(&scaled)
}

/// Geometric grid from `min` to `max` inclusive with `per_decade` points
/// per factor of ten.
pub fn geometric_grid(min: f64, max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && per_decade > 0) {
        return Err(Error::param("k_grid", format!("need 0 < min < max, got [{min}, {max}]")));
    }
    let decades = (max / min).log10();
    let intervals = (decades * per_decade as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=intervals)
        .map(|i| {
            if i == intervals {
                max
            } else {
                min * (max / min).powf(i as f64 / intervals as f64)
            }
        })
        .collect())
}

/// Moves any `k` sitting on an undamped resonance `|xi_j|^s + m = k^2` to the
/// midpoint between the neighbouring resonances. The result is sorted with
/// duplicates removed.
pub fn avoid_resonances(k_grid: &[f64], s: f64, m: f64, grid: &Grid) -> Vec<f64> {
    let mut levels: Vec<f64> = grid.frequencies().iter().map(|xi| xi.abs().powf(s) + m).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    let mut moved = k_grid
        .iter()
        .map(|&k| {
            let k2 = k * k;
            let pos = levels.partition_point(|&l| l < k2);
            let hit = |i: usize| levels.get(i).is_some_and(|&l| (l - k2).abs() <= 1e-9 * k2.max(1.0));
            let idx = if hit(pos) {
                pos
            } else if pos > 0 && hit(pos - 1) {
                pos - 1
            } else {
                return k;
            };
            let below = if idx > 0 { levels[idx - 1] } else { 0.0 };
            let above = levels.get(idx + 1).copied().unwrap_or(levels[idx] + (levels[idx] - below));
            // choose the closer neighbouring gap
            let mid = if levels[idx] - below <= above - levels[idx] {
                0.5 * (levels[idx] + above)
            } else {
                0.5 * (below + levels[idx])
            };
            mid.max(0.0).sqrt()
        })
        .collect::<Vec<f64>>();
    moved.sort_by(|a, b| a.partial_cmp(b).unwrap());
    moved.dedup();
    moved
}

#[derive(Clone, Debug, Serialize)]
pub struct ResolventScan {
    pub s: f64,
    pub m: f64,
    pub space_pair: SpacePair,
    pub k_grid: Vec<f64>,
    pub norms: Vec<f64>,
    /// Log-log slope of the norms on the upper half of the scan.
    pub fitted_slope: Option<f64>,
    pub fit_r_squared: Option<f64>,
    pub bound_exponent: f64,
    /// Bound check of `norm / <k>^bound_exponent`.
    pub bound: UpperBoundCheck,
}

impl ResolventScan {
    /// `norm / <k>^bound_exponent` per point.
    pub fn normalized_ratios(&self) -> Vec<f64> {
        self.k_grid
            .iter()
            .zip(&self.norms)
            .map(|(k, n)| n / (1.0 + k * k).sqrt().powf(self.bound_exponent))
            .collect()
    }
}

/// Norm of `R(ik)` (or of `(ik - A)^{-1}` for [`SpacePair::Energy`]) along
/// `k_grid`, with a log-log fit and the bound-direction check.
pub fn scan_resolvent(
    s: f64,
    m: f64,
    gamma: &DampingProfile,
    grid: &Grid,
    k_grid: &[f64],
    pair: SpacePair,
) -> Result<ResolventScan> {
    if k_grid.len() < 3 {
        return Err(Error::param("k_grid", "need at least three frequencies"));
    }
    if k_grid.windows(2).any(|w| !(w[1] > w[0])) || k_grid[0] < 0.0 {
        return Err(Error::param("k_grid", "must be non-negative and strictly increasing"));
    }
    for &k in k_grid {
        check_resolution(s, k, grid)?;
    }
    let generator = match pair {
        SpacePair::Energy => Some(assemble_generator(s, m, gamma, grid, EnergyWeight::Sobolev)?),
        _ => None,
    };
    let norms = k_grid
        .iter()
        .map(|&k| match &generator {
            Some(g) => generator_resolvent_norm(g, k),
            None => resolvent_norm(&assemble_helmholtz(s, m, k, gamma, grid)?, pair),
        })
        .collect::<Result<Vec<f64>>>()?;
    let fit = rates::fit_power_law(k_grid, &norms, rates::DEFAULT_TAIL_FRACTION).ok();
    let bound_exponent = pair.bound_exponent(s)?;
    let brackets: Vec<f64> = k_grid.iter().map(|k| (1.0 + k * k).sqrt()).collect();
    let bound = rates::check_upper_bound(&brackets, &norms, bound_exponent, BoundKind::Growth)?;
    Ok(ResolventScan {
        s,
        m,
        space_pair: pair,
        k_grid: k_grid.to_vec(),
        norms,
        fitted_slope: fit.as_ref().map(|f| f.slope),
        fit_r_squared: fit.as_ref().map(|f| f.r_squared),
        bound_exponent,
        bound,
    })
}
