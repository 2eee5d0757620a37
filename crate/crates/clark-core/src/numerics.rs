//! Shared numerical machinery: deterministic summation, small-size FFT,
//! Richardson extrapolation, polynomial root finding via companion-matrix
//! eigenvalues, and Hermitian factorizations for the Gram solvers.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::{Error, Result};

/// Pairwise (cascade) accumulator with a fixed reduction tree.
///
/// Summation order depends only on the push order, never on chunking, so
/// results are bit-stable across runs. Rounding error grows like log(n)
/// instead of n, which the spectral-accuracy quadratures rely on.
#[derive(Clone, Debug, Default)]
pub struct PairwiseSum {
    levels: Vec<Option<Complex64>>,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self { levels: Vec::new() }
    }

    pub fn push(&mut self, value: Complex64) {
        let mut carry = value;
        for slot in self.levels.iter_mut() {
            match slot.take() {
                Some(existing) => carry += existing,
                None => {
                    *slot = Some(carry);
                    return;
                }
            }
        }
        self.levels.push(Some(carry));
    }

    pub fn total(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.levels.iter().flatten() {
            acc += v;
        }
        acc
    }
}

pub fn pairwise_sum<I: IntoIterator<Item = Complex64>>(items: I) -> Complex64 {
    let mut acc = PairwiseSum::new();
    for v in items {
        acc.push(v);
    }
    acc.total()
}

/// Uniform angle grid on the circle, shifted by half a cell so that the
/// sample set never contains 1 or -1 exactly. Exactness for trigonometric
/// polynomials is the same as for the unshifted grid.
pub fn shifted_circle_grid(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / n as f64))
        .collect()
}

pub fn next_pow2(n: usize) -> usize {
    let mut p = 1usize;
    while p < n {
        p <<= 1;
    }
    p
}

/// In-place radix-2 FFT, forward convention `X_k = sum_j x_j e^{-2pi i jk/N}`.
pub fn fft_forward(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    // bit reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2usize;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let wlen = Complex64::from_polar(1.0, ang);
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[i + k];
                let v = buf[i + k + len / 2] * w;
                buf[i + k] = u + v;
                buf[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// Fourier coefficients of samples taken on the half-shifted grid
/// `p_j = 2pi (j+1/2)/N`. Entry `k` of the result holds the coefficient of
/// frequency `k - N/2`, i.e. frequencies run over `[-N/2, N/2)`.
pub fn shifted_fourier_coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    fft_forward(&mut buf);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let half = (n / 2) as i64;
    for (idx, slot) in out.iter_mut().enumerate() {
        let freq = idx as i64 - half;
        let bin = freq.rem_euclid(n as i64) as usize;
        let phase = Complex64::from_polar(1.0, -PI * freq as f64 / n as f64);
        *slot = buf[bin] * phase / n as f64;
    }
    out
}

/// Polynomial extrapolation of `(h_j, y_j)` samples to `h = 0` (Neville's
/// scheme). With a dyadic radial schedule this is the iterated Richardson
/// table.
pub fn extrapolate_to_zero(points: &[(f64, Complex64)]) -> Complex64 {
    assert!(!points.is_empty());
    let mut table: Vec<Complex64> = points.iter().map(|&(_, y)| y).collect();
    let hs: Vec<f64> = points.iter().map(|&(h, _)| h).collect();
    let m = table.len();
    for level in 1..m {
        for i in 0..m - level {
            let h0 = hs[i];
            let h1 = hs[i + level];
            // value at h=0 of the interpolant through (h0, t[i]) and (h1, t[i+1])
            table[i] = (table[i + 1] * h0 - table[i] * h1) / (h0 - h1);
        }
    }
    table[0]
}

/// SplitMix64; used for the seeded evaluation panels so reports are
/// reproducible byte for byte.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the disc of the given radius.
    pub fn next_in_disc(&mut self, radius: f64) -> Complex64 {
        let r = radius * self.next_f64().sqrt();
        let theta = 2.0 * PI * self.next_f64();
        Complex64::from_polar(r, theta)
    }
}

// ---------------------------------------------------------------------------
// Polynomial roots via the companion matrix
// ---------------------------------------------------------------------------

/// Roots of `c[0] + c[1] x + ... + c[d] x^d`.
///
/// Degrees 1 and 2 are solved in closed form; higher degrees go through the
/// companion matrix and a shifted complex QR iteration. Leading coefficients
/// below `1e-12` of the coefficient scale are trimmed first.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::Degenerate("zero polynomial"));
    }
    let mut cs: Vec<Complex64> = coeffs.to_vec();
    while cs.len() > 1 && cs.last().map(|c| c.norm()).unwrap_or(0.0) < 1e-12 * scale {
        cs.pop();
    }
    let deg = cs.len() - 1;
    match deg {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-cs[0] / cs[1]]),
        2 => Ok(quadratic_roots(cs[2], cs[1], cs[0])),
        _ => {
            let lead = cs[deg];
            let n = deg;
            // companion matrix, row-major: subdiagonal ones, last column -c_k/c_d
            let mut h = vec![Complex64::new(0.0, 0.0); n * n];
            for i in 1..n {
                h[i * n + (i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                h[i * n + (n - 1)] = -cs[i] / lead;
            }
            hessenberg_eigenvalues(&mut h, n)
        }
    }
}

/// Stable quadratic formula for `a x^2 + b x + c`.
fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    let disc = b * b - 4.0 * a * c;
    let sq = disc.sqrt();
    // pick the sign that avoids cancellation in b +/- sqrt(disc)
    let t = if (b + sq).norm() >= (b - sq).norm() {
        -(b + sq) * 0.5
    } else {
        -(b - sq) * 0.5
    };
    if t.norm() == 0.0 {
        // b = c = 0
        return vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    }
    vec![t / a, c / t]
}

struct Givens {
    c: f64,
    s: Complex64,
}

fn make_givens(a: Complex64, b: Complex64) -> Givens {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return Givens {
            c: 1.0,
            s: Complex64::new(0.0, 0.0),
        };
    }
    if na == 0.0 {
        return Givens {
            c: 0.0,
            s: b.conj() / nb,
        };
    }
    let r = (na * na + nb * nb).sqrt();
    Givens {
        c: na / r,
        s: (a / na) * b.conj() / r,
    }
}

/// Eigenvalues of an upper Hessenberg complex matrix (row-major, n x n),
/// by explicit single-shift QR with Wilkinson shifts. Intended for the tiny
/// matrices coming out of companion forms.
fn hessenberg_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>> {
    let norm = h.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1e-300);
    let eps = 1e-15;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n; // active block is rows/cols [0, hi)
    let mut iter_count = 0usize;
    let max_iters = 60 * n.max(4);
    while hi > 0 {
        if hi == 1 {
            eigs.push(h[0]);
            break;
        }
        // deflate tiny subdiagonals
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[lo * n + lo - 1].norm();
            let diag = h[(lo - 1) * n + lo - 1].norm() + h[lo * n + lo].norm();
            if sub <= eps * diag.max(norm * 1e-30) {
                h[lo * n + lo - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigs.push(h[(hi - 1) * n + hi - 1]);
            hi -= 1;
            continue;
        }
        if lo == hi - 2 {
            let (l1, l2) = two_by_two_eigs(
                h[lo * n + lo],
                h[lo * n + lo + 1],
                h[(lo + 1) * n + lo],
                h[(lo + 1) * n + lo + 1],
            );
            eigs.push(l1);
            eigs.push(l2);
            hi -= 2;
            continue;
        }
        iter_count += 1;
        if iter_count > max_iters {
            return Err(Error::RootFinding("qr iteration did not converge"));
        }
        // Wilkinson shift from the trailing 2x2 of the active block
        let m = hi - 1;
        let (l1, l2) = two_by_two_eigs(
            h[(m - 1) * n + m - 1],
            h[(m - 1) * n + m],
            h[m * n + m - 1],
            h[m * n + m],
        );
        let target = h[m * n + m];
        let mut shift = if (l1 - target).norm() <= (l2 - target).norm() {
            l1
        } else {
            l2
        };
        if iter_count.is_multiple_of(12) {
            // exceptional shift to break rare cycles
            shift += Complex64::new(h[m * n + m - 1].norm(), 0.0);
        }
        // explicit shifted QR on the [lo, hi) block
        for i in lo..hi {
            h[i * n + i] -= shift;
        }
        let mut rotations: Vec<Givens> = Vec::with_capacity(hi - lo - 1);
        for k in lo..hi - 1 {
            let g = make_givens(h[k * n + k], h[(k + 1) * n + k]);
            // apply G to rows k, k+1
            for col in k..hi {
                let a = h[k * n + col];
                let b = h[(k + 1) * n + col];
                h[k * n + col] = g.c * a + g.s * b;
                h[(k + 1) * n + col] = -g.s.conj() * a + g.c * b;
            }
            rotations.push(g);
        }
        for (k, g) in rotations.iter().enumerate() {
            let k = lo + k;
            // apply G^* to columns k, k+1
            let row_end = (k + 2).min(hi - 1);
            for row in lo..=row_end {
                let a = h[row * n + k];
                let b = h[row * n + k + 1];
                h[row * n + k] = a * g.c + b * g.s.conj();
                h[row * n + k + 1] = -a * g.s + b * g.c;
            }
        }
        for i in lo..hi {
            h[i * n + i] += shift;
        }
    }
    Ok(eigs)
}

fn two_by_two_eigs(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
) -> (Complex64, Complex64) {
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    (tr_half + disc, tr_half - disc)
}

// ---------------------------------------------------------------------------
// Hermitian helpers
// ---------------------------------------------------------------------------

/// Eigenvalues of a Hermitian matrix (row-major, n x n) by cyclic Jacobi
/// sweeps with complex rotations. Returned in ascending order.
pub fn hermitian_eigenvalues(matrix: &[Complex64], n: usize) -> Vec<f64> {
    let mut a = matrix.to_vec();
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let scale = a.iter().map(|c| c.norm()).fold(0.0f64, f64::max).max(1e-300);
    for _sweep in 0..60 {
        if off_norm(&a) <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = phase * (t * c);
                // rows p, q
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp + s.conj() * akq;
                    a[q * n + k] = -s * akp + c * akq;
                }
                // columns p, q
                for k in 0..n {
                    let apk = a[k * n + p];
                    let aqk = a[k * n + q];
                    a[k * n + p] = c * apk + s * aqk;
                    a[k * n + q] = -s.conj() * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Cholesky factor of a Hermitian positive definite matrix `A + ridge I`.
pub struct CholeskyFactor {
    l: Vec<Complex64>,
    n: usize,
}

pub fn cholesky(matrix: &[Complex64], n: usize, ridge: f64) -> Result<CholeskyFactor> {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut diag = matrix[j * n + j].re + ridge;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag <= 0.0 {
            return Err(Error::GramAssembly("matrix not positive definite"));
        }
        let dj = diag.sqrt();
        l[j * n + j] = Complex64::new(dj, 0.0);
        for i in (j + 1)..n {
            let mut v = matrix[i * n + j];
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = v / dj;
        }
    }
    Ok(CholeskyFactor { l, n })
}

impl CholeskyFactor {
    /// Solves `L L^* x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[i * n + k];
                y[i] = y[i] - lik * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l[k * n + i].conj();
                y[i] = y[i] - lki * y[k];
            }
            y[i] /= self.l[i * n + i];
        }
        y
    }
}

/// Condition estimate of a Hermitian PSD matrix through its ridge Cholesky
/// factor: power iteration for the top eigenvalue, inverse iteration for the
/// bottom one. Deterministic start vector, fixed iteration count.
pub fn condition_estimate(matrix: &[Complex64], n: usize, chol: &CholeskyFactor) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let matvec = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| pairwise_sum((0..n).map(|j| matrix[i * n + j] * v[j])))
            .collect()
    };
    let normalize = |v: &mut Vec<Complex64>| -> f64 {
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        norm
    };
    let start: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0, 0.3 * (i as f64 + 1.0)))
        .collect();

    let mut v = start.clone();
    normalize(&mut v);
    let mut lam_max = 0.0;
    for _ in 0..40 {
        let mut w = matvec(&v);
        lam_max = normalize(&mut w);
        v = w;
    }

    let mut u = start;
    normalize(&mut u);
    let mut inv_norm = 0.0;
    for _ in 0..40 {
        let mut w = chol.solve(&u);
        inv_norm = normalize(&mut w);
        u = w;
    }
    let lam_min = if inv_norm > 0.0 { 1.0 / inv_norm } else { 0.0 };
    if lam_min <= 0.0 {
        f64::infinity()
    } else {
        lam_max / lam_min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pairwise_matches_naive_on_small_sets() {
        let xs: Vec<Complex64> = (0..101).map(|k| c(k as f64 * 0.25, -(k as f64))).collect();
        let naive: Complex64 = xs.iter().sum();
        assert!((pairwise_sum(xs.iter().copied()) - naive).norm() < 1e-10);
    }

    #[test]
    fn fft_of_pure_tone_is_single_bin() {
        let n = 64;
        let signal: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * 5.0 * j as f64 / n as f64))
            .collect();
        let mut buf = signal.clone();
        fft_forward(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            let expected = if k == 5 { n as f64 } else { 0.0 };
            assert!((v.norm() - expected).abs() < 1e-9, "bin {k}");
        }
    }

    #[test]
    fn shifted_coeffs_recover_monomials() {
        let n = 32;
        let grid = shifted_circle_grid(n);
        for freq in [-7i64, -1, 0, 1, 3, 10] {
            let samples: Vec<Complex64> = grid.iter().map(|z| z.powi(freq as i32)).collect();
            let coeffs = shifted_fourier_coeffs(&samples);
            for (idx, coeff) in coeffs.iter().enumerate() {
                let k = idx as i64 - (n / 2) as i64;
                let expected = if k == freq { 1.0 } else { 0.0 };
                assert!(
                    (coeff - c(expected, 0.0)).norm() < 1e-12,
                    "freq {freq} bin {k}"
                );
            }
        }
    }

    #[test]
    fn extrapolation_kills_polynomial_error_terms() {
        // y(h) = 3 - 2h + 5h^2 - h^3
        let pts: Vec<(f64, Complex64)> = [0.0625, 0.03125, 0.015625, 0.0078125]
            .iter()
            .map(|&h| (h, c(3.0 - 2.0 * h + 5.0 * h * h - h * h * h, 0.0)))
            .collect();
        let v = extrapolate_to_zero(&pts);
        assert!((v - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn quadratic_and_companion_roots_agree_with_construction() {
        // roots scattered on and off the unit circle
        let roots = [
            c(1.0, 0.0),
            c(-0.5, 0.8),
            c(0.3, -0.4),
            c(0.0, 1.0),
            c(-0.9, -0.1),
        ];
        // expand product (x - r_i)
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in roots.iter() {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            coeffs = next;
        }
        let mut found = polynomial_roots(&coeffs).unwrap();
        assert_eq!(found.len(), roots.len());
        for r in roots.iter() {
            let (idx, dist) = found
                .iter()
                .enumerate()
                .map(|(i, f)| (i, (f - r).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert!(dist < 1e-9, "root {r} missed by {dist}");
            found.swap_remove(idx);
        }
    }

    #[test]
    fn unimodular_roots_of_shifted_monomial() {
        // x^6 = alpha: all roots on the circle
        let alpha = Complex64::from_polar(1.0, 0.7);
        let mut coeffs = vec![c(0.0, 0.0); 7];
        coeffs[0] = -alpha;
        coeffs[6] = c(1.0, 0.0);
        let roots = polynomial_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 6);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-10);
            assert!((r.powi(6) - alpha).norm() < 1e-9);
        }
    }

    #[test]
    fn hermitian_eigenvalues_of_known_matrix() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let eigs = hermitian_eigenvalues(&m, 2);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_solves_hermitian_system() {
        let m = vec![
            c(4.0, 0.0),
            c(1.0, 0.5),
            c(0.0, 0.0),
            c(1.0, -0.5),
            c(3.0, 0.0),
            c(0.2, -0.1),
            c(0.0, 0.0),
            c(0.2, 0.1),
            c(2.0, 0.0),
        ];
        let chol = cholesky(&m, 3, 0.0).unwrap();
        let b = vec![c(1.0, 1.0), c(0.0, -2.0), c(3.0, 0.5)];
        let x = chol.solve(&b);
        for i in 0..3 {
            let mut r = -b[i];
            for j in 0..3 {
                r += m[i * 3 + j] * x[j];
            }
            assert!(r.norm() < 1e-12);
        }
        let cond = condition_estimate(&m, 3, &chol);
        assert!(cond > 1.0 && cond < 10.0);
    }
}
