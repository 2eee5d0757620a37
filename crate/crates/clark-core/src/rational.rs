//! Rational holomorphic self-maps of the polydisc.
//!
//! Maps are stored as quotients of dense multivariate polynomials indexed by
//! multi-degree. Slicing (diagonal and vertical) is done on coefficients, not
//! by sampling, so one-dimensional root finding downstream sees exact
//! univariate data.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{polynomial_roots, shifted_circle_grid};
use crate::{Error, Result};

pub const MAX_DEGREE_PER_VARIABLE: usize = 8;

/// Dense multivariate polynomial; `dims[j]` is one more than the degree in
/// variable `j` and coefficients are stored row-major with the last variable
/// fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    dims: Vec<usize>,
    coeffs: Vec<Complex64>,
}

impl MultiPoly {
    pub fn new(dims: Vec<usize>, coeffs: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Domain("polynomial dimensions must be positive"));
        }
        let expected: usize = dims.iter().product();
        if coeffs.len() != expected {
            return Err(Error::Domain("coefficient count does not match dimensions"));
        }
        Ok(Self { dims, coeffs })
    }

    pub fn constant(n: usize, value: Complex64) -> Self {
        let dims = vec![1usize; n];
        Self {
            dims,
            coeffs: vec![value],
        }
    }

    /// Bivariate constructor from rows indexed by the degree in the first
    /// variable.
    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let d2 = rows.iter().map(|r| r.len()).max().unwrap_or(1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); rows.len() * d2];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                coeffs[i * d2 + j] = v;
            }
        }
        Self {
            dims: vec![rows.len(), d2],
            coeffs,
        }
    }

    pub fn univariate(coeffs: Vec<Complex64>) -> Self {
        let mut c = coeffs;
        if c.is_empty() {
            c.push(Complex64::new(0.0, 0.0));
        }
        Self {
            dims: vec![c.len()],
            coeffs: c,
        }
    }

    pub fn vars(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        assert_eq!(point.len(), self.vars(), "dimension mismatch");
        self.eval_block(0, &self.coeffs, point)
    }

    fn eval_block(&self, var: usize, block: &[Complex64], point: &[Complex64]) -> Complex64 {
        if var == self.vars() - 1 {
            // Horner in the innermost variable
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in block.iter().rev() {
                acc = acc * point[var] + c;
            }
            return acc;
        }
        let stride: usize = self.dims[var + 1..].iter().product();
        let mut acc = Complex64::new(0.0, 0.0);
        for chunk in block.chunks(stride).rev() {
            acc = acc * point[var] + self.eval_block(var + 1, chunk, point);
        }
        acc
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        assert!(var < self.vars());
        if self.dims[var] == 1 {
            return Self::constant(self.vars(), Complex64::new(0.0, 0.0));
        }
        let mut dims = self.dims.clone();
        dims[var] -= 1;
        let total: usize = dims.iter().product();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); total];
        let mut idx = vec![0usize; self.vars()];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            self.decompose(flat, &mut idx);
            if idx[var] == 0 {
                continue;
            }
            let k = idx[var];
            idx[var] -= 1;
            let out = Self::flatten(&dims, &idx);
            coeffs[out] += c * k as f64;
            idx[var] += 1;
        }
        Self { dims, coeffs }
    }

    fn decompose(&self, mut flat: usize, idx: &mut [usize]) {
        for var in (0..self.vars()).rev() {
            idx[var] = flat % self.dims[var];
            flat /= self.dims[var];
        }
    }

    fn flatten(dims: &[usize], idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for (d, i) in dims.iter().zip(idx.iter()) {
            flat = flat * d + i;
        }
        flat
    }

    /// Coefficients of `lambda -> p(lambda * zeta)` as a univariate
    /// polynomial: the coefficient of `lambda^m` collects all multi-degrees
    /// of total degree `m`.
    pub fn diagonal_substitution(&self, zeta: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(zeta.len(), self.vars());
        let max_total: usize = self.dims.iter().map(|d| d - 1).sum();
        let mut out = vec![Complex64::new(0.0, 0.0); max_total + 1];
        let mut idx = vec![0usize; self.vars()];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            self.decompose(flat, &mut idx);
            let total: usize = idx.iter().sum();
            let mut monomial = c;
            for (z, &k) in zeta.iter().zip(idx.iter()) {
                monomial *= z.powi(k as i32);
            }
            out[total] += monomial;
        }
        out
    }

    /// Coefficients in the remaining variable after freezing variable `var`
    /// at `value` (bivariate only).
    pub fn freeze(&self, var: usize, value: Complex64) -> Vec<Complex64> {
        assert_eq!(self.vars(), 2, "freezing needs a bivariate polynomial");
        assert!(var < 2);
        let other = 1 - var;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dims[other]];
        let mut idx = [0usize; 2];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            self.decompose(flat, &mut idx);
            out[idx[other]] += c * value.powi(idx[var] as i32);
        }
        out
    }

    pub fn depends_on(&self, var: usize) -> bool {
        let mut idx = vec![0usize; self.vars()];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            self.decompose(flat, &mut idx);
            if idx[var] > 0 && c.norm() > 1e-14 * self.scale().max(1e-300) {
                return true;
            }
        }
        false
    }
}

fn trim_univariate(mut coeffs: Vec<Complex64>, scale: f64) -> Vec<Complex64> {
    while coeffs.len() > 1
        && coeffs.last().map(|c| c.norm()).unwrap_or(0.0) <= 1e-12 * scale.max(1e-300)
    {
        coeffs.pop();
    }
    coeffs
}

fn eval_univariate(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Synthetic division of `coeffs` by `(x - root)`; remainder is dropped.
fn deflate(coeffs: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); deg];
    let mut carry = coeffs[deg];
    for k in (1..=deg).rev() {
        out[k - 1] = carry;
        carry = coeffs[k - 1] + root * carry;
    }
    out
}

/// Certificate produced by sampling `|phi|` on a boundary grid and on the
/// interior radii 0.5, 0.9, 0.99.
#[derive(Clone, Debug)]
pub struct InnerCertificate {
    pub max_boundary_deviation: f64,
    pub max_interior_modulus: f64,
    pub grid_size: usize,
    pub pole_hits: usize,
}

impl InnerCertificate {
    pub fn is_inner(&self, tol: f64) -> bool {
        self.max_boundary_deviation < tol && self.max_interior_modulus < 1.0
    }
}

/// A rational map `num/den` intended as a holomorphic self-map of the
/// polydisc. Denominator regularity on the closed polydisc is certified
/// numerically for catalog members, never proved.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: MultiPoly,
    den: MultiPoly,
}

impl RationalMap {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self> {
        if num.vars() != den.vars() {
            return Err(Error::Domain("numerator/denominator dimension mismatch"));
        }
        if num
            .dims()
            .iter()
            .chain(den.dims().iter())
            .any(|&d| d > MAX_DEGREE_PER_VARIABLE + 1)
        {
            return Err(Error::Domain("degree exceeds the supported bound"));
        }
        if den.scale() == 0.0 {
            return Err(Error::Pole("denominator is identically zero"));
        }
        Ok(Self { num, den })
    }

    pub fn polynomial(num: MultiPoly) -> Self {
        let n = num.vars();
        Self {
            den: MultiPoly::constant(n, Complex64::new(1.0, 0.0)),
            num,
        }
    }

    pub fn n(&self) -> usize {
        self.num.vars()
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        let d = self.den.eval(point);
        if d.norm() < 1e-14 {
            return Err(Error::Pole("denominator vanished at evaluation point"));
        }
        Ok(self.num.eval(point) / d)
    }

    /// Quotient-rule partial derivative at a point of the closed polydisc.
    pub fn partial_derivative(&self, var: usize, point: &[Complex64]) -> Result<Complex64> {
        let d = self.den.eval(point);
        if d.norm() < 1e-14 {
            return Err(Error::Pole("denominator vanished at evaluation point"));
        }
        let n = self.num.eval(point);
        let dn = self.num.derivative(var).eval(point);
        let dd = self.den.derivative(var).eval(point);
        Ok((dn * d - n * dd) / (d * d))
    }

    /// Univariate slice `lambda -> phi(lambda * zeta)` along the diagonal
    /// circle through `zeta`; common factors of the substituted numerator and
    /// denominator are removed.
    pub fn diag_slice(&self, zeta: &[Complex64]) -> Result<RationalMap> {
        let num = self.num.diagonal_substitution(zeta);
        let den = self.den.diagonal_substitution(zeta);
        normalized_univariate(num, den)
    }

    /// Univariate slice with coordinate `var` frozen at the unimodular value
    /// `xi` (bivariate maps only).
    pub fn vertical_slice(&self, var: usize, xi: Complex64) -> Result<RationalMap> {
        if self.n() != 2 {
            return Err(Error::Unsupported("vertical slices need two variables"));
        }
        let num = self.num.freeze(var, xi);
        let den = self.den.freeze(var, xi);
        let den_scale = den.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if den_scale <= 1e-14 * self.den.scale().max(1.0) {
            return Err(Error::Pole("frozen denominator vanishes identically"));
        }
        normalized_univariate(num, den)
    }

    /// For a map that depends on a single coordinate, the univariate map in
    /// that coordinate.
    pub fn univariate_restriction(&self, var: usize) -> Result<RationalMap> {
        if self.n() == 1 {
            return Ok(self.clone());
        }
        if self.n() != 2 {
            return Err(Error::Unsupported("restriction implemented for n <= 2"));
        }
        let other = 1 - var;
        if self.num.depends_on(other) || self.den.depends_on(other) {
            return Err(Error::Domain("map depends on more than one coordinate"));
        }
        let num = self.num.freeze(other, Complex64::new(0.0, 0.0));
        let den = self.den.freeze(other, Complex64::new(0.0, 0.0));
        normalized_univariate(num, den)
    }

    /// True when the (univariate) map is constant after normalization.
    pub fn is_constant(&self) -> bool {
        self.num.dims().iter().all(|&d| d == 1) && self.den.dims().iter().all(|&d| d == 1)
    }

    /// Index of the unique coordinate the map depends on, if any.
    pub fn single_coordinate(&self) -> Option<usize> {
        let deps: Vec<usize> = (0..self.n())
            .filter(|&v| self.num.depends_on(v) || self.den.depends_on(v))
            .collect();
        if deps.len() == 1 {
            Some(deps[0])
        } else {
            None
        }
    }

    /// Samples `|phi|` on the boundary grid and on interior radii. Pole hits
    /// on the grid are counted in the report instead of aborting it.
    pub fn inner_certificate(&self, grid_size: usize, _tol: f64) -> Result<InnerCertificate> {
        if grid_size < 16 {
            return Err(Error::Domain("certificate grid must have at least 16 nodes"));
        }
        let n = self.n();
        let grid = shifted_circle_grid(grid_size);
        let mut max_boundary_deviation: f64 = 0.0;
        let mut max_interior_modulus: f64 = 0.0;
        let mut pole_hits = 0usize;
        let mut point = vec![Complex64::new(0.0, 0.0); n];
        let mut idx = vec![0usize; n];
        let total = grid_size.pow(n as u32);
        for flat in 0..total {
            let mut rest = flat;
            for v in (0..n).rev() {
                idx[v] = rest % grid_size;
                rest /= grid_size;
            }
            for v in 0..n {
                point[v] = grid[idx[v]];
            }
            match self.eval(&point) {
                Ok(v) => {
                    max_boundary_deviation = max_boundary_deviation.max((v.norm() - 1.0).abs())
                }
                Err(_) => pole_hits += 1,
            }
            for radius in [0.5, 0.9, 0.99] {
                for v in 0..n {
                    point[v] = grid[idx[v]] * radius;
                }
                match self.eval(&point) {
                    Ok(v) => max_interior_modulus = max_interior_modulus.max(v.norm()),
                    Err(_) => pole_hits += 1,
                }
            }
        }
        Ok(InnerCertificate {
            max_boundary_deviation,
            max_interior_modulus,
            grid_size,
            pole_hits,
        })
    }

    /// Quick inner test used by construction dispatch.
    pub fn is_inner(&self, tol: f64) -> bool {
        self.inner_certificate(32, tol)
            .map(|c| c.pole_hits == 0 && c.is_inner(tol))
            .unwrap_or(false)
    }
}

fn normalized_univariate(num: Vec<Complex64>, den: Vec<Complex64>) -> Result<RationalMap> {
    let num_scale = num.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let den_scale = den.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut num = trim_univariate(num, num_scale);
    let mut den = trim_univariate(den, den_scale);
    if den.len() > 1 {
        // remove shared roots; substituted slices of the catalog maps pick up
        // common factors exactly on the diagonal
        if let Ok(den_roots) = polynomial_roots(&den) {
            for root in den_roots {
                if num.len() < 2 {
                    break;
                }
                let v = eval_univariate(&num, root);
                let bound = num_scale.max(1e-300) * root.norm().max(1.0).powi(num.len() as i32);
                if v.norm() < 1e-9 * bound {
                    num = deflate(&num, root);
                    den = deflate(&den, root);
                }
            }
        }
        num = trim_univariate(num, num_scale);
        den = trim_univariate(den, den_scale);
    }
    RationalMap::new(MultiPoly::univariate(num), MultiPoly::univariate(den))
}

/// Named self-maps exercised throughout: the first coordinate, the product of
/// both coordinates, a rational inner map on the bidisc, and the non-inner
/// average of the coordinates.
pub fn catalog(name: &str) -> Result<RationalMap> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    match name {
        "coordinate" => {
            // z1
            let num = MultiPoly::from_rows(&[&[zero], &[one]]);
            Ok(RationalMap::polynomial(num))
        }
        "product" => {
            // z1 z2
            let num = MultiPoly::from_rows(&[&[zero, zero], &[zero, one]]);
            Ok(RationalMap::polynomial(num))
        }
        "rational_example" => {
            // (z1 + z2 + 2 z1 z2) / (z1 + z2 + 2)
            let num = MultiPoly::from_rows(&[&[zero, one], &[one, Complex64::new(2.0, 0.0)]]);
            let den = MultiPoly::from_rows(&[&[Complex64::new(2.0, 0.0), one], &[one]]);
            RationalMap::new(num, den)
        }
        "halfsum" => {
            // (z1 + z2) / 2
            let half = Complex64::new(0.5, 0.0);
            let num = MultiPoly::from_rows(&[&[zero, half], &[half]]);
            Ok(RationalMap::polynomial(num))
        }
        other => Err(Error::UnknownCatalog(String::from(other))),
    }
}

pub const CATALOG_NAMES: [&str; 4] = ["coordinate", "product", "rational_example", "halfsum"];

/// Structural test for the catalog halfsum map; its Clark family has a closed
/// construction that generic non-inner maps do not get.
pub fn is_halfsum(map: &RationalMap) -> bool {
    match catalog("halfsum") {
        Ok(reference) => maps_equal(map, &reference),
        Err(_) => false,
    }
}

pub fn is_rational_example(map: &RationalMap) -> bool {
    match catalog("rational_example") {
        Ok(reference) => maps_equal(map, &reference),
        Err(_) => false,
    }
}

fn maps_equal(a: &RationalMap, b: &RationalMap) -> bool {
    if a.n() != b.n() {
        return false;
    }
    // compare num_a * den_b - num_b * den_a by sampling
    let mut rng = crate::numerics::SplitMix64::new(0x5eed);
    for _ in 0..16 {
        let point: Vec<Complex64> = (0..a.n())
            .map(|_| Complex64::from_polar(0.7 * rng.next_f64(), TAU * rng.next_f64()))
            .collect();
        let va = a.num.eval(&point) * b.den.eval(&point);
        let vb = b.num.eval(&point) * a.den.eval(&point);
        if (va - vb).norm() > 1e-12 * (va.norm() + vb.norm() + 1.0) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SplitMix64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn catalog_reference_evaluations() {
        let rational = catalog("rational_example").unwrap();
        let v = rational.eval(&[c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((v - c(0.5, 0.0)).norm() < 1e-15);
        assert!(rational.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap().norm() < 1e-15);

        let product = catalog("product").unwrap();
        for r in [0.1, 0.37, 0.9] {
            let v = product.eval(&[c(r, 0.0), c(r, 0.0)]).unwrap();
            assert!((v - c(r * r, 0.0)).norm() < 1e-15);
        }

        let coordinate = catalog("coordinate").unwrap();
        let v = coordinate.eval(&[c(0.3, 0.4), c(0.9, 0.0)]).unwrap();
        assert!((v - c(0.3, 0.4)).norm() < 1e-15);

        let halfsum = catalog("halfsum").unwrap();
        // boundary values: 1 at (1,1), 0 at (1,-1)
        assert!((halfsum.eval(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(halfsum.eval(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap().norm() < 1e-15);

        assert!(matches!(
            catalog("unknown"),
            Err(Error::UnknownCatalog(_))
        ));
    }

    #[test]
    fn diag_slice_of_rational_example_at_ones_is_identity() {
        let phi = catalog("rational_example").unwrap();
        let slice = phi.diag_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        // (2l + 2l^2)/(2l + 2) deflates to l
        assert_eq!(slice.num().dims(), &[2]);
        assert_eq!(slice.den().dims(), &[1]);
        let ratio = slice.num().coeffs()[1] / slice.den().coeffs()[0];
        assert!((ratio - c(1.0, 0.0)).norm() < 1e-12);
        assert!(slice.num().coeffs()[0].norm() < 1e-12);
    }

    #[test]
    fn diag_slice_of_monomials() {
        let product = catalog("product").unwrap();
        let zeta = [c(0.6, 0.8), c(0.0, 1.0)];
        let slice = product.diag_slice(&zeta).unwrap();
        assert_eq!(slice.num().dims(), &[3]);
        assert!((slice.num().coeffs()[2] - zeta[0] * zeta[1]).norm() < 1e-15);

        let coordinate = catalog("coordinate").unwrap();
        let slice = coordinate.diag_slice(&zeta).unwrap();
        assert_eq!(slice.num().dims(), &[2]);
        assert!((slice.num().coeffs()[1] - zeta[0]).norm() < 1e-15);
    }

    #[test]
    fn diag_slice_composition_consistency() {
        let mut rng = SplitMix64::new(11);
        for name in CATALOG_NAMES {
            let phi = catalog(name).unwrap();
            for _ in 0..25 {
                let zeta = [
                    Complex64::from_polar(1.0, TAU * rng.next_f64()),
                    Complex64::from_polar(1.0, TAU * rng.next_f64()),
                ];
                let slice = phi.diag_slice(&zeta).unwrap();
                let lambda = rng.next_in_disc(0.95);
                let via_slice = slice.eval(&[lambda]).unwrap();
                let direct = phi.eval(&[lambda * zeta[0], lambda * zeta[1]]).unwrap();
                assert!(
                    (via_slice - direct).norm() < 1e-12,
                    "{name}: slice broke composition"
                );
            }
        }
    }

    #[test]
    fn vertical_slices_match_reference_forms() {
        let product = catalog("product").unwrap();
        let xi = Complex64::from_polar(1.0, 1.234);
        let slice = product.vertical_slice(0, xi).unwrap();
        // lambda -> xi * lambda
        assert!((slice.eval(&[c(0.5, 0.2)]).unwrap() - xi * c(0.5, 0.2)).norm() < 1e-14);

        let rational = catalog("rational_example").unwrap();
        let slice = rational.vertical_slice(0, c(-1.0, 0.0)).unwrap();
        assert!(slice.is_constant(), "slice at xi = -1 collapses");
        assert!((slice.eval(&[c(0.0, 0.0)]).unwrap() - c(-1.0, 0.0)).norm() < 1e-12);

        let coordinate = catalog("coordinate").unwrap();
        let slice = coordinate.vertical_slice(0, xi).unwrap();
        assert!(slice.is_constant());
        assert!((slice.eval(&[c(0.3, 0.0)]).unwrap() - xi).norm() < 1e-14);
    }

    #[test]
    fn partial_derivative_reference_forms() {
        let product = catalog("product").unwrap();
        let p = [Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -2.0)];
        let d2 = product.partial_derivative(1, &p).unwrap();
        assert!((d2 - p[0]).norm() < 1e-14);

        let coordinate = catalog("coordinate").unwrap();
        assert!(coordinate
            .partial_derivative(1, &[c(0.2, 0.1), c(0.5, -0.3)])
            .unwrap()
            .norm()
            < 1e-15);

        // d2 of the rational example is 2 (z1 + 1)^2 / (z1 + z2 + 2)^2
        let rational = catalog("rational_example").unwrap();
        let mut rng = SplitMix64::new(5);
        for _ in 0..40 {
            let z = [rng.next_in_disc(0.9), rng.next_in_disc(0.9)];
            let expected = {
                let a = z[0] + c(1.0, 0.0);
                let d = z[0] + z[1] + c(2.0, 0.0);
                2.0 * a * a / (d * d)
            };
            let got = rational.partial_derivative(1, &z).unwrap();
            assert!((got - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_derivative_matches_finite_differences() {
        let mut rng = SplitMix64::new(17);
        let step = 1e-6;
        for name in CATALOG_NAMES {
            let phi = catalog(name).unwrap();
            for _ in 0..100 {
                let z = [rng.next_in_disc(0.8), rng.next_in_disc(0.8)];
                for var in 0..2 {
                    let exact = phi.partial_derivative(var, &z).unwrap();
                    let mut zp = z;
                    let mut zm = z;
                    zp[var] += c(step, 0.0);
                    zm[var] -= c(step, 0.0);
                    let fd = (phi.eval(&zp).unwrap() - phi.eval(&zm).unwrap()) / (2.0 * step);
                    let denom = exact.norm().max(1e-6);
                    assert!(
                        (exact - fd).norm() / denom < 1e-6,
                        "{name} var {var}: {exact} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn inner_certificates_split_the_catalog() {
        let product = catalog("product").unwrap().inner_certificate(64, 1e-10).unwrap();
        assert!(product.max_boundary_deviation < 1e-12);
        assert!(product.max_interior_modulus < 1.0);

        let rational = catalog("rational_example")
            .unwrap()
            .inner_certificate(64, 1e-10)
            .unwrap();
        assert!(rational.max_boundary_deviation < 1e-10);
        assert!(rational.max_interior_modulus < 1.0);
        assert_eq!(rational.pole_hits, 0);

        let halfsum = catalog("halfsum").unwrap().inner_certificate(64, 1e-10).unwrap();
        assert!(halfsum.max_boundary_deviation >= 0.49);

        let coordinate = catalog("coordinate").unwrap().inner_certificate(64, 1e-10).unwrap();
        assert!(coordinate.max_boundary_deviation < 1e-12);
    }

    #[test]
    fn rational_example_times_conjugate_monomial_is_unimodular() {
        let phi = catalog("rational_example").unwrap();
        let grid = shifted_circle_grid(256);
        for (i, a) in grid.iter().enumerate() {
            let b = grid[(i * 7 + 3) % grid.len()];
            let v = phi.eval(&[*a, b]).unwrap();
            let witness = (v * a.conj() * b.conj()).norm();
            assert!((witness - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn self_map_modulus_stays_inside() {
        let mut rng = SplitMix64::new(23);
        for name in ["coordinate", "product", "rational_example", "halfsum"] {
            let phi = catalog(name).unwrap();
            for _ in 0..200 {
                let z = [rng.next_in_disc(1.0 - 1e-3), rng.next_in_disc(1.0 - 1e-3)];
                let v = phi.eval(&z).unwrap();
                assert!(v.norm() <= 1.0 - 1e-15, "{name} escaped at {z:?}");
            }
        }
    }

    #[test]
    fn single_coordinate_detection() {
        assert_eq!(catalog("coordinate").unwrap().single_coordinate(), Some(0));
        assert_eq!(catalog("product").unwrap().single_coordinate(), None);
        assert_eq!(catalog("halfsum").unwrap().single_coordinate(), None);
        let b = catalog("coordinate")
            .unwrap()
            .univariate_restriction(0)
            .unwrap();
        assert_eq!(b.num().dims(), &[2]);
        assert!((b.eval(&[c(0.3, 0.2)]).unwrap() - c(0.3, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn halfsum_recognition() {
        assert!(is_halfsum(&catalog("halfsum").unwrap()));
        assert!(!is_halfsum(&catalog("product").unwrap()));
        assert!(is_rational_example(&catalog("rational_example").unwrap()));
    }
}
