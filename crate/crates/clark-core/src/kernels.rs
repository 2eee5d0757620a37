//! Cauchy, Poisson, and reproducing kernels of the polydisc.
//!
//! Conventions: `C(z, zeta) = prod_j 1/(1 - z_j conj(zeta_j))` for `z` in the
//! open polydisc and `zeta` on the distinguished boundary (the torus), and
//! `P(z, zeta) = C(z, zeta) C(zeta, z) / C(z, z)`, which multiplies out to the
//! product of one-dimensional Poisson kernels. Coordinate products are always
//! taken in index order so evaluations are deterministic.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::rational::RationalMap;
use crate::{Error, Result};

/// A point of the open polydisc: every coordinate has modulus < 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscPoint {
    coords: Vec<Complex64>,
}

impl DiscPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("disc point needs at least one coordinate"));
        }
        for z in &coords {
            if z.norm() >= 1.0 {
                return Err(Error::Domain("disc point coordinate has modulus >= 1"));
            }
        }
        Ok(Self { coords })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: alloc::vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }
}

/// A point of the torus. Coordinates are renormalized onto the circle when
/// they are within `1e-8` of it and rejected otherwise; quadrature nodes
/// built from angles are exact while user input may carry rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    coords: Vec<Complex64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("torus point needs at least one coordinate"));
        }
        let mut normalized = Vec::with_capacity(coords.len());
        for z in coords {
            let r = z.norm();
            if (r - 1.0).abs() > 1e-8 {
                return Err(Error::Domain("torus point coordinate is off the circle"));
            }
            normalized.push(z / r);
        }
        Ok(Self {
            coords: normalized,
        })
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            coords: angles
                .iter()
                .map(|&t| Complex64::from_polar(1.0, t))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }
}

/// `C(z, zeta) = prod_j 1/(1 - z_j conj(zeta_j))`.
pub fn cauchy_kernel(z: &DiscPoint, zeta: &TorusPoint) -> Complex64 {
    assert_eq!(z.dim(), zeta.dim(), "dimension mismatch");
    cauchy_slices(z.coords(), zeta.coords())
}

/// Same product formula with both arguments inside the polydisc.
pub fn cauchy_disc(z: &DiscPoint, w: &DiscPoint) -> Complex64 {
    assert_eq!(z.dim(), w.dim(), "dimension mismatch");
    cauchy_slices(z.coords(), w.coords())
}

/// Raw coordinate-slice form of the Cauchy product, usable in quadrature
/// loops; the first argument plays the holomorphic role.
pub fn cauchy_slices(z: &[Complex64], zeta: &[Complex64]) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    for (zj, cj) in z.iter().zip(zeta.iter()) {
        prod /= Complex64::new(1.0, 0.0) - zj * cj.conj();
    }
    prod
}

/// `P(z, zeta) = prod_j (1 - |z_j|^2) / |1 - z_j conj(zeta_j)|^2`.
pub fn poisson_kernel(z: &DiscPoint, zeta: &TorusPoint) -> f64 {
    assert_eq!(z.dim(), zeta.dim(), "dimension mismatch");
    poisson_slices(z.coords(), zeta.coords())
}

pub fn poisson_slices(z: &[Complex64], zeta: &[Complex64]) -> f64 {
    let mut prod = 1.0;
    for (zj, cj) in z.iter().zip(zeta.iter()) {
        prod *= poisson_1d(*zj, *cj);
    }
    prod
}

/// One-dimensional Poisson kernel `(1 - |z|^2)/|zeta - z|^2` for `|zeta| = 1`.
pub fn poisson_1d(z: Complex64, zeta: Complex64) -> f64 {
    (1.0 - z.norm_sqr()) / (zeta - z).norm_sqr()
}

/// `C(z, z) = prod_j 1/(1 - |z_j|^2)`, the value entering the quotient form
/// of the Poisson kernel.
pub fn cauchy_diagonal(z: &DiscPoint) -> f64 {
    let mut prod = 1.0;
    for zj in z.coords() {
        prod /= 1.0 - zj.norm_sqr();
    }
    prod
}

/// Reproducing kernel of the model space attached to an inner map:
/// `K(z, w) = (1 - I(z) conj(I(w))) C(z, w)`.
pub fn reproducing_kernel(inner: &RationalMap, z: &DiscPoint, w: &DiscPoint) -> Result<Complex64> {
    let iz = inner.eval(z.coords())?;
    let iw = inner.eval(w.coords())?;
    Ok((Complex64::new(1.0, 0.0) - iz * iw.conj()) * cauchy_disc(z, w))
}
