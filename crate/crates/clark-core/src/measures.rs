//! Closed-form complex Borel measures on the torus and quadrature against
//! them.
//!
//! Fourier convention used throughout the crate:
//! `mu_hat(k) = integral of conj(zeta)^k d mu`, so a positive pluriharmonic
//! measure has `mu_hat` supported on multi-indices that are entirely
//! nonnegative or entirely nonpositive.
//!
//! Continuous parts integrate by uniform tensor trapezoid rules on
//! half-shifted angle grids (same exactness as the unshifted grid for
//! trigonometric polynomials, but the sample set avoids the handful of
//! boundary points where catalog maps lose regularity). All reductions run
//! through a fixed pairwise tree, so results do not depend on evaluation
//! chunking.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
use num_complex::Complex64;
use num_traits::Float;

use crate::kernels::{cauchy_slices, poisson_slices, DiscPoint, TorusPoint};
use crate::numerics::{pairwise_sum, shifted_circle_grid, shifted_fourier_coeffs, PairwiseSum};
use crate::{Error, Result};

/// Integrand on the torus, evaluated on raw coordinate slices.
pub type TorusFn<'a> = &'a (dyn Fn(&[Complex64]) -> Complex64 + 'a);

pub type CircleDensityFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;
pub type TorusDensityFn = Arc<dyn Fn(&[Complex64]) -> f64 + Send + Sync>;

/// Quadrature configuration: tensor-grid resolution plus the radial schedule
/// used by boundary-limit (weak-*) integration.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub nodes_per_dim: usize,
    pub radial_schedule: Vec<f64>,
    /// 0 keeps the finest radial value, 1 extrapolates the whole schedule.
    pub extrapolation_order: u8,
}

impl QuadratureSpec {
    pub fn new(nodes_per_dim: usize, radial_schedule: Vec<f64>, order: u8) -> Result<Self> {
        if nodes_per_dim < 8 {
            return Err(Error::Domain("nodes_per_dim must be at least 8"));
        }
        let mut prev = 0.0;
        for &r in &radial_schedule {
            if r <= prev || r >= 1.0 {
                return Err(Error::Domain(
                    "radial schedule must increase strictly inside (0, 1)",
                ));
            }
            prev = r;
        }
        if order > 1 {
            return Err(Error::Domain("extrapolation order is 0 or 1"));
        }
        Ok(Self {
            nodes_per_dim,
            radial_schedule,
            extrapolation_order: order,
        })
    }

    pub fn with_nodes(nodes_per_dim: usize) -> Self {
        Self {
            nodes_per_dim,
            ..Self::default()
        }
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        // r_j = 1 - 2^-j, j = 4..7
        let radial_schedule = (4..=7).map(|j| 1.0 - 0.5f64.powi(j)).collect();
        Self {
            nodes_per_dim: 256,
            radial_schedule,
            extrapolation_order: 1,
        }
    }
}

/// Measure on the unit circle.
#[derive(Clone)]
pub enum CircleMeasure {
    /// Normalized Lebesgue measure (mass 1).
    Lebesgue,
    Atom { position: Complex64, weight: f64 },
    AtomicSet(Vec<(Complex64, f64)>),
    /// Absolutely continuous with the given density against normalized
    /// Lebesgue measure.
    Density(CircleDensityFn),
}

impl fmt::Debug for CircleMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleMeasure::Lebesgue => write!(f, "Lebesgue"),
            CircleMeasure::Atom { position, weight } => {
                write!(f, "Atom({position}, {weight})")
            }
            CircleMeasure::AtomicSet(atoms) => write!(f, "AtomicSet({} atoms)", atoms.len()),
            CircleMeasure::Density(_) => write!(f, "Density(..)"),
        }
    }
}

impl CircleMeasure {
    /// Expansion into weighted nodes for tensor quadrature. Continuous parts
    /// use `nodes` half-shifted grid points.
    pub fn quadrature_nodes(&self, nodes: usize) -> Vec<(Complex64, f64)> {
        match self {
            CircleMeasure::Lebesgue => shifted_circle_grid(nodes)
                .into_iter()
                .map(|z| (z, 1.0 / nodes as f64))
                .collect(),
            CircleMeasure::Atom { position, weight } => vec![(*position, *weight)],
            CircleMeasure::AtomicSet(atoms) => atoms.clone(),
            CircleMeasure::Density(w) => shifted_circle_grid(nodes)
                .into_iter()
                .map(|z| (z, w(z) / nodes as f64))
                .collect(),
        }
    }

    pub fn mass(&self, nodes: usize) -> f64 {
        match self {
            CircleMeasure::Lebesgue => 1.0,
            CircleMeasure::Atom { weight, .. } => *weight,
            CircleMeasure::AtomicSet(atoms) => atoms.iter().map(|(_, w)| w).sum(),
            CircleMeasure::Density(_) => self
                .quadrature_nodes(nodes)
                .iter()
                .map(|(_, w)| *w)
                .sum(),
        }
    }

    fn check_positive(&self) -> Result<()> {
        match self {
            CircleMeasure::Atom { weight, .. } if *weight < 0.0 => {
                Err(Error::NonPositive("circle atom with negative weight"))
            }
            CircleMeasure::AtomicSet(atoms) if atoms.iter().any(|(_, w)| *w < 0.0) => {
                Err(Error::NonPositive("circle atom with negative weight"))
            }
            _ => Ok(()),
        }
    }
}

/// One sampled branch of a graph measure: values of `eta_k` and the weight
/// density at each parameter node.
#[derive(Clone, Debug)]
pub struct GraphBranch {
    pub eta: Vec<Complex64>,
    pub weights: Vec<f64>,
}

/// Measure on the two-torus carried by branches `{(xi, eta_k(xi))}` with a
/// weight density in the parameter, sampled on a uniform half-shifted grid.
///
/// `param_coord = 0` puts the parameter in the first coordinate; 1 swaps.
#[derive(Clone, Debug)]
pub struct GraphMeasure {
    pub param_coord: usize,
    pub xi: Vec<Complex64>,
    pub branches: Vec<GraphBranch>,
    /// Parameter nodes whose slice degenerated; they carry zero weight.
    pub excluded: Vec<usize>,
    /// Nodes where branch matching jumped by more than ten grid spacings.
    pub discontinuities: Vec<usize>,
    /// Nodes where two branches came within 1e-6 of each other.
    pub collisions: Vec<usize>,
}

impl GraphMeasure {
    pub fn nodes(&self) -> usize {
        self.xi.len()
    }

    pub fn mass(&self) -> f64 {
        let total = pairwise_sum(self.branches.iter().flat_map(|b| {
            b.weights
                .iter()
                .map(|&w| Complex64::new(w, 0.0))
        }));
        total.re / self.xi.len() as f64
    }

    pub fn integrate(&self, f: TorusFn) -> Complex64 {
        let mut acc = PairwiseSum::new();
        let mut point = [Complex64::new(0.0, 0.0); 2];
        for (j, &xi) in self.xi.iter().enumerate() {
            for branch in &self.branches {
                let w = branch.weights[j];
                if w == 0.0 {
                    continue;
                }
                if self.param_coord == 0 {
                    point[0] = xi;
                    point[1] = branch.eta[j];
                } else {
                    point[0] = branch.eta[j];
                    point[1] = xi;
                }
                acc.push(f(&point) * w);
            }
        }
        acc.total() / self.xi.len() as f64
    }
}

/// Absolutely continuous densities on the torus.
#[derive(Clone)]
pub enum AcDensity {
    /// Arbitrary continuous density, integrated by the generic tensor rule.
    Generic { dim: usize, density: TorusDensityFn },
    /// Density on the two-torus that is a one-dimensional Poisson kernel in
    /// the rotated angles `p = (s+t)/2`, `q = (s-t)/2`:
    /// `u = P_rho(q)(p - center)` with `rho(q) = cos q`. The Poisson factor
    /// concentrates as `q -> 0`, so integration pairs each `q`-fiber with the
    /// integrand's Fourier coefficients instead of sampling the peak.
    DiagonalPoisson { center_angle: f64 },
}

impl fmt::Debug for AcDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcDensity::Generic { dim, .. } => write!(f, "Generic(dim {dim})"),
            AcDensity::DiagonalPoisson { center_angle } => {
                write!(f, "DiagonalPoisson(center {center_angle})")
            }
        }
    }
}

impl AcDensity {
    pub fn dim(&self) -> usize {
        match self {
            AcDensity::Generic { dim, .. } => *dim,
            AcDensity::DiagonalPoisson { .. } => 2,
        }
    }

    /// Pointwise density value against normalized Lebesgue measure.
    pub fn eval(&self, coords: &[Complex64]) -> f64 {
        match self {
            AcDensity::Generic { density, .. } => density(coords),
            AcDensity::DiagonalPoisson { center_angle } => {
                let s = coords[0].arg();
                let t = coords[1].arg();
                let p = 0.5 * (s + t);
                let q = 0.5 * (s - t);
                let rho = q.cos();
                let x = p - center_angle;
                (1.0 - rho * rho) / (1.0 - 2.0 * rho * x.cos() + rho * rho)
            }
        }
    }
}

/// Tagged closed-form measure on the torus.
#[derive(Clone, Debug)]
pub enum TorusMeasure {
    Product(Vec<CircleMeasure>),
    Graph(GraphMeasure),
    AbsCont(AcDensity),
    Atomic(Vec<(TorusPoint, Complex64)>),
    Sum(Vec<(f64, TorusMeasure)>),
}

impl TorusMeasure {
    pub fn dim(&self) -> usize {
        match self {
            TorusMeasure::Product(components) => components.len(),
            TorusMeasure::Graph(_) => 2,
            TorusMeasure::AbsCont(d) => d.dim(),
            TorusMeasure::Atomic(atoms) => atoms.first().map(|(p, _)| p.dim()).unwrap_or(0),
            TorusMeasure::Sum(parts) => parts.first().map(|(_, m)| m.dim()).unwrap_or(0),
        }
    }

    pub fn check_positive(&self) -> Result<()> {
        match self {
            TorusMeasure::Product(components) => {
                components.iter().try_for_each(|c| c.check_positive())
            }
            TorusMeasure::Graph(g) => {
                if g.branches
                    .iter()
                    .any(|b| b.weights.iter().any(|&w| w < 0.0))
                {
                    Err(Error::NonPositive("graph branch with negative weight"))
                } else {
                    Ok(())
                }
            }
            TorusMeasure::AbsCont(_) => Ok(()),
            TorusMeasure::Atomic(atoms) => {
                for (_, w) in atoms {
                    if w.im.abs() > 1e-12 || w.re < -1e-12 {
                        return Err(Error::NonPositive("atomic weight not nonnegative real"));
                    }
                }
                Ok(())
            }
            TorusMeasure::Sum(parts) => {
                for (c, m) in parts {
                    if *c < 0.0 {
                        return Err(Error::NonPositive("sum coefficient negative"));
                    }
                    m.check_positive()?;
                }
                Ok(())
            }
        }
    }

    /// Smallest grid resolution among quadrature-backed parts, if any; used
    /// for the aliasing precondition of Fourier coefficients.
    fn quadrature_resolution(&self, q: &QuadratureSpec) -> Option<usize> {
        match self {
            TorusMeasure::Product(components) => {
                let mut res = None;
                for c in components {
                    if matches!(c, CircleMeasure::Lebesgue | CircleMeasure::Density(_)) {
                        res = Some(res.map_or(q.nodes_per_dim, |r: usize| r.min(q.nodes_per_dim)));
                    }
                }
                res
            }
            TorusMeasure::Graph(g) => Some(g.nodes()),
            TorusMeasure::AbsCont(_) => Some(q.nodes_per_dim),
            TorusMeasure::Atomic(_) => None,
            TorusMeasure::Sum(parts) => parts
                .iter()
                .filter_map(|(_, m)| m.quadrature_resolution(q))
                .min(),
        }
    }
}

/// `integral of f d mu`. Atomic parts are summed exactly; continuous parts go
/// through tensor trapezoid rules that are exact for trigonometric
/// polynomials of coordinate degree below the node count.
pub fn integrate(mu: &TorusMeasure, f: TorusFn, q: &QuadratureSpec) -> Result<Complex64> {
    match mu {
        TorusMeasure::Product(components) => {
            let lists: Vec<Vec<(Complex64, f64)>> = components
                .iter()
                .map(|c| c.quadrature_nodes(q.nodes_per_dim))
                .collect();
            Ok(tensor_integrate(&lists, f))
        }
        TorusMeasure::Graph(g) => Ok(g.integrate(f)),
        TorusMeasure::AbsCont(AcDensity::Generic { dim, density }) => {
            let grid = shifted_circle_grid(q.nodes_per_dim);
            let n = *dim;
            let total = q.nodes_per_dim.pow(n as u32);
            let mut acc = PairwiseSum::new();
            let mut point = vec![Complex64::new(0.0, 0.0); n];
            for flat in 0..total {
                let mut rest = flat;
                for v in (0..n).rev() {
                    point[v] = grid[rest % q.nodes_per_dim];
                    rest /= q.nodes_per_dim;
                }
                acc.push(f(&point) * density(&point));
            }
            Ok(acc.total() / total as f64)
        }
        TorusMeasure::AbsCont(AcDensity::DiagonalPoisson { center_angle }) => {
            Ok(diagonal_poisson_integrate(*center_angle, f, q.nodes_per_dim))
        }
        TorusMeasure::Atomic(atoms) => Ok(pairwise_sum(
            atoms.iter().map(|(p, w)| f(p.coords()) * w),
        )),
        TorusMeasure::Sum(parts) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cfc, m) in parts {
                acc += integrate(m, f, q)? * *cfc;
            }
            Ok(acc)
        }
    }
}

fn tensor_integrate(lists: &[Vec<(Complex64, f64)>], f: TorusFn) -> Complex64 {
    let n = lists.len();
    let total: usize = lists.iter().map(|l| l.len()).product();
    let mut acc = PairwiseSum::new();
    let mut point = vec![Complex64::new(0.0, 0.0); n];
    for flat in 0..total {
        let mut rest = flat;
        let mut weight = 1.0;
        for v in (0..n).rev() {
            let (z, w) = lists[v][rest % lists[v].len()];
            point[v] = z;
            weight *= w;
            rest /= lists[v].len();
        }
        if weight != 0.0 {
            acc.push(f(&point) * weight);
        }
    }
    acc.total()
}

/// Fiber pairing for the rotated-Poisson density: for each `q` the integral
/// against `P_rho(p - theta)` is `sum_K g_hat(K) rho^|K| e^{iK theta}`, which
/// only needs the integrand's Fourier tail to be small, never a resolved
/// peak. The outer trapezoid in `q` then converges spectrally.
fn diagonal_poisson_integrate(center: f64, f: TorusFn, nodes: usize) -> Complex64 {
    let n = crate::numerics::next_pow2(nodes.max(256));
    let mut outer = PairwiseSum::new();
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    let mut point = [Complex64::new(0.0, 0.0); 2];
    for l in 0..n {
        let qa = TAU * (l as f64 + 0.5) / n as f64;
        let rho = qa.cos();
        for (i, slot) in samples.iter_mut().enumerate() {
            let pa = TAU * (i as f64 + 0.5) / n as f64;
            point[0] = Complex64::from_polar(1.0, pa + qa);
            point[1] = Complex64::from_polar(1.0, pa - qa);
            *slot = f(&point);
        }
        let coeffs = shifted_fourier_coeffs(&samples);
        let mid = n / 2;
        let wp = Complex64::from_polar(1.0, center) * rho;
        let wm = Complex64::from_polar(1.0, -center) * rho;
        let mut fiber = coeffs[mid];
        let mut pp = Complex64::new(1.0, 0.0);
        let mut pm = Complex64::new(1.0, 0.0);
        for k in 1..mid {
            pp *= wp;
            pm *= wm;
            fiber += coeffs[mid + k] * pp + coeffs[mid - k] * pm;
        }
        outer.push(fiber);
    }
    outer.total() / n as f64
}

/// Total mass of a positive measure; equals `integrate(mu, 1)`.
pub fn total_mass(mu: &TorusMeasure, q: &QuadratureSpec) -> Result<f64> {
    mu.check_positive()?;
    Ok(mass_unchecked(mu, q))
}

fn mass_unchecked(mu: &TorusMeasure, q: &QuadratureSpec) -> f64 {
    match mu {
        TorusMeasure::Product(components) => components
            .iter()
            .map(|c| c.mass(q.nodes_per_dim))
            .product(),
        TorusMeasure::Graph(g) => g.mass(),
        TorusMeasure::AbsCont(AcDensity::DiagonalPoisson { .. }) => 1.0,
        TorusMeasure::AbsCont(AcDensity::Generic { .. }) => {
            let one = |_: &[Complex64]| Complex64::new(1.0, 0.0);
            integrate(mu, &one, q).map(|v| v.re).unwrap_or(f64::nan())
        }
        TorusMeasure::Atomic(atoms) => atoms.iter().map(|(_, w)| w.re).sum(),
        TorusMeasure::Sum(parts) => parts
            .iter()
            .map(|(c, m)| c * mass_unchecked(m, q))
            .sum(),
    }
}

/// Monomial integrand `zeta -> prod_j zeta_j^{k_j}`.
pub fn torus_monomial(k: &[i64]) -> impl Fn(&[Complex64]) -> Complex64 + '_ {
    move |coords: &[Complex64]| {
        let mut prod = Complex64::new(1.0, 0.0);
        for (z, &kj) in coords.iter().zip(k.iter()) {
            prod *= z.powi(kj as i32);
        }
        prod
    }
}

/// Fourier coefficient `mu_hat(k) = integral conj(zeta)^k d mu`.
pub fn fourier_coeff(mu: &TorusMeasure, k: &[i64], q: &QuadratureSpec) -> Result<Complex64> {
    if k.len() != mu.dim() {
        return Err(Error::Domain("frequency multi-index has wrong length"));
    }
    if let Some(nodes) = mu.quadrature_resolution(q) {
        let worst = k.iter().map(|kj| kj.unsigned_abs() as usize).max().unwrap_or(0);
        if worst > nodes / 2 - 1 {
            return Err(Error::Aliasing {
                freq: worst as i64,
                nodes,
            });
        }
    }
    let neg: Vec<i64> = k.iter().map(|kj| -kj).collect();
    let f = torus_monomial(&neg);
    integrate(mu, &f, q)
}

/// Checks that all mixed-sign Fourier coefficients up to `maxdeg` vanish
/// within `tol`; returns the offending indices otherwise.
pub fn pluriharmonic_support_check(
    mu: &TorusMeasure,
    maxdeg: i64,
    tol: f64,
    q: &QuadratureSpec,
) -> Result<(bool, Vec<Vec<i64>>)> {
    let n = mu.dim();
    let width = (2 * maxdeg + 1) as usize;
    let total = width.pow(n as u32);
    let mut offenders = Vec::new();
    let mut k = vec![0i64; n];
    for flat in 0..total {
        let mut rest = flat;
        for v in (0..n).rev() {
            k[v] = (rest % width) as i64 - maxdeg;
            rest /= width;
        }
        let has_pos = k.iter().any(|&kj| kj > 0);
        let has_neg = k.iter().any(|&kj| kj < 0);
        if !(has_pos && has_neg) {
            continue;
        }
        let coeff = fourier_coeff(mu, &k, q)?;
        if coeff.norm() > tol {
            offenders.push(k.clone());
        }
    }
    Ok((offenders.is_empty(), offenders))
}

/// `P[mu](z)`, the Poisson integral.
pub fn poisson_integral(mu: &TorusMeasure, z: &DiscPoint, q: &QuadratureSpec) -> Result<f64> {
    let zc = z.coords();
    let f = move |coords: &[Complex64]| Complex64::new(poisson_slices(zc, coords), 0.0);
    integrate(mu, &f, q).map(|v| v.re)
}

/// Cauchy transform `mu_plus(z)`.
pub fn cauchy_transform(mu: &TorusMeasure, z: &DiscPoint, q: &QuadratureSpec) -> Result<Complex64> {
    let zc = z.coords();
    let f = move |coords: &[Complex64]| cauchy_slices(zc, coords);
    integrate(mu, &f, q)
}

/// A circle measure pushed onto the diagonal circle through `direction`:
/// `integral f d(push) = integral f(tau * direction) d nu(tau)`.
#[derive(Clone, Debug)]
pub struct SliceMeasure {
    pub direction: Vec<Complex64>,
    pub circle: CircleMeasure,
}

impl SliceMeasure {
    pub fn integrate(&self, f: TorusFn, nodes: usize) -> Complex64 {
        let mut acc = PairwiseSum::new();
        let mut point = vec![Complex64::new(0.0, 0.0); self.direction.len()];
        for (tau, w) in self.circle.quadrature_nodes(nodes) {
            if w == 0.0 {
                continue;
            }
            for (slot, dirj) in point.iter_mut().zip(self.direction.iter()) {
                *slot = tau * dirj;
            }
            acc.push(f(&point) * w);
        }
        acc.total()
    }

    pub fn mass(&self, nodes: usize) -> f64 {
        self.circle.mass(nodes)
    }
}
