//! Construction of the Clark family `sigma_alpha[phi]` on the torus and the
//! verifications of its structural identities.
//!
//! For a holomorphic self-map `phi` of the polydisc and unimodular `alpha`,
//! `sigma_alpha` is the positive measure whose Poisson integral equals
//! `(1 - |phi(z)|^2)/|alpha - phi(z)|^2`. Construction dispatches over the
//! structure of `phi` (single-coordinate, inner with graph-type support,
//! absolutely continuous) and always attaches a certificate that checks the
//! defining Poisson identity on a fixed panel together with the mass value at
//! the origin. A rejected construction is marked exceptional and falls back
//! to a registered closed form when one exists, and to radial (weak-*)
//! integration otherwise.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::kernels::{cauchy_slices, poisson_slices, DiscPoint, TorusPoint};
use crate::measures::{
    fourier_coeff, integrate, poisson_integral, total_mass, AcDensity, CircleMeasure,
    GraphBranch, GraphMeasure, QuadratureSpec, SliceMeasure, TorusFn, TorusMeasure,
};
use crate::numerics::{
    extrapolate_to_zero, next_pow2, polynomial_roots, shifted_circle_grid, PairwiseSum,
};
use crate::rational::{is_halfsum, is_rational_example, RationalMap};
use crate::{Error, Result};

/// Acceptance threshold on the Poisson-match residual.
pub const ACCEPTANCE_TOL: f64 = 1e-6;

/// Hard cap on the adaptive graph sampling resolution.
const GRAPH_NODE_CAP: usize = 1 << 17;

/// Construction record attached to every Clark measure.
#[derive(Clone, Debug)]
pub struct ClarkCertificate {
    /// Representation the construction settled on.
    pub representation: &'static str,
    /// Max over the fixed z-panel of the Poisson-identity mismatch.
    pub poisson_match_residual: f64,
    /// Mismatch of the total mass against the symbol value at the origin.
    pub mass_residual: f64,
    /// Set when the generic dispatch failed and a fallback was taken.
    pub exceptional: bool,
}

impl ClarkCertificate {
    pub fn accepted(&self) -> bool {
        self.poisson_match_residual < ACCEPTANCE_TOL
    }
}

/// Radial approximant: the smooth density `u_r` whose Lebesgue integrals
/// converge weak-* to the Clark measure as `r -> 1`.
#[derive(Clone, Debug)]
pub struct RadialApproximant {
    pub phi: RationalMap,
    pub alpha: Complex64,
    pub r: f64,
}

impl RadialApproximant {
    pub fn density(&self, coords: &[Complex64]) -> Result<f64> {
        let scaled: Vec<Complex64> = coords.iter().map(|z| z * self.r).collect();
        clark_symbol_at(&self.phi, self.alpha, &scaled)
    }
}

#[derive(Clone, Debug)]
enum ClarkRep {
    Closed(TorusMeasure),
    Radial,
}

/// A constructed Clark measure together with its certificate. Closed
/// representations integrate through the measure engine; the radial fallback
/// integrates through the weak-* engine.
#[derive(Clone, Debug)]
pub struct ClarkMeasure {
    phi: RationalMap,
    alpha: Complex64,
    rep: ClarkRep,
    pub certificate: ClarkCertificate,
}

impl ClarkMeasure {
    pub fn phi(&self) -> &RationalMap {
        &self.phi
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// The closed-form measure, when the construction produced one.
    pub fn measure(&self) -> Option<&TorusMeasure> {
        match &self.rep {
            ClarkRep::Closed(m) => Some(m),
            ClarkRep::Radial => None,
        }
    }

    pub fn is_radial_fallback(&self) -> bool {
        matches!(self.rep, ClarkRep::Radial)
    }

    pub fn integrate(&self, f: TorusFn, q: &QuadratureSpec) -> Result<Complex64> {
        match &self.rep {
            ClarkRep::Closed(m) => integrate(m, f, q),
            ClarkRep::Radial => weakstar_integrate(&self.phi, self.alpha, f, q),
        }
    }

    pub fn total_mass(&self, q: &QuadratureSpec) -> Result<f64> {
        match &self.rep {
            ClarkRep::Closed(m) => total_mass(m, q),
            ClarkRep::Radial => {
                let one = |_: &[Complex64]| Complex64::new(1.0, 0.0);
                weakstar_integrate(&self.phi, self.alpha, &one, q).map(|v| v.re)
            }
        }
    }

    pub fn poisson_integral(&self, z: &DiscPoint, q: &QuadratureSpec) -> Result<f64> {
        match &self.rep {
            ClarkRep::Closed(m) => poisson_integral(m, z, q),
            ClarkRep::Radial => {
                let zc = z.coords();
                let f =
                    move |coords: &[Complex64]| Complex64::new(poisson_slices(zc, coords), 0.0);
                weakstar_integrate(&self.phi, self.alpha, &f, q).map(|v| v.re)
            }
        }
    }

    pub fn cauchy_transform(&self, z: &DiscPoint, q: &QuadratureSpec) -> Result<Complex64> {
        let zc = z.coords();
        let f = move |coords: &[Complex64]| cauchy_slices(zc, coords);
        self.integrate(&f, q)
    }

    pub fn fourier_coeff(&self, k: &[i64], q: &QuadratureSpec) -> Result<Complex64> {
        match &self.rep {
            ClarkRep::Closed(m) => fourier_coeff(m, k, q),
            ClarkRep::Radial => {
                let neg: Vec<i64> = k.iter().map(|kj| -kj).collect();
                let f = crate::measures::torus_monomial(&neg);
                weakstar_integrate(&self.phi, self.alpha, &f, q)
            }
        }
    }

    /// Weighted support samples for singular representations (graph, atoms,
    /// products with atomic components); `None` for absolutely continuous or
    /// radial representations.
    pub fn support_nodes(&self) -> Option<Vec<(Vec<Complex64>, f64)>> {
        match &self.rep {
            ClarkRep::Closed(m) => measure_support_nodes(m, 1.0),
            ClarkRep::Radial => None,
        }
    }

    /// Max over sampled support of `|phi(zeta) - alpha|`; the support of a
    /// singular Clark measure lies where the map attains `alpha`.
    pub fn support_deviation(&self) -> Option<f64> {
        let nodes = self.support_nodes()?;
        let mut worst: f64 = 0.0;
        for (point, _) in nodes.iter().filter(|(_, w)| *w > 1e-300) {
            match self.phi.eval(point) {
                Ok(v) => worst = worst.max((v - self.alpha).norm()),
                Err(_) => worst = f64::infinity(),
            }
        }
        Some(worst)
    }
}

fn measure_support_nodes(m: &TorusMeasure, coeff: f64) -> Option<Vec<(Vec<Complex64>, f64)>> {
    match m {
        TorusMeasure::Graph(g) => {
            let mut out = Vec::new();
            for (j, &xi) in g.xi.iter().enumerate() {
                for branch in &g.branches {
                    let w = branch.weights[j];
                    if w == 0.0 {
                        continue;
                    }
                    let point = if g.param_coord == 0 {
                        vec![xi, branch.eta[j]]
                    } else {
                        vec![branch.eta[j], xi]
                    };
                    out.push((point, coeff * w / g.xi.len() as f64));
                }
            }
            Some(out)
        }
        TorusMeasure::Product(components) => {
            let lists: Vec<Vec<(Complex64, f64)>> = components
                .iter()
                .map(|c| c.quadrature_nodes(512))
                .collect();
            let total: usize = lists.iter().map(|l| l.len()).product();
            let mut out = Vec::with_capacity(total);
            for flat in 0..total {
                let mut rest = flat;
                let mut point = vec![Complex64::new(0.0, 0.0); lists.len()];
                let mut weight = coeff;
                for v in (0..lists.len()).rev() {
                    let (z, w) = lists[v][rest % lists[v].len()];
                    point[v] = z;
                    weight *= w;
                    rest /= lists[v].len();
                }
                out.push((point, weight));
            }
            Some(out)
        }
        TorusMeasure::Atomic(atoms) => Some(
            atoms
                .iter()
                .map(|(p, w)| (p.coords().to_vec(), coeff * w.re))
                .collect(),
        ),
        TorusMeasure::Sum(parts) => {
            let mut out = Vec::new();
            for (c, part) in parts {
                out.extend(measure_support_nodes(part, coeff * c)?);
            }
            Some(out)
        }
        TorusMeasure::AbsCont(_) => None,
    }
}

/// Renormalizes a nominally unimodular parameter, rejecting inputs more than
/// `1e-8` off the circle.
pub fn normalize_alpha(alpha: Complex64) -> Result<Complex64> {
    let r = alpha.norm();
    if (r - 1.0).abs() > 1e-8 {
        return Err(Error::Domain("alpha must be unimodular"));
    }
    Ok(alpha / r)
}

/// The positive pluriharmonic symbol
/// `(1 - |phi(z)|^2)/|alpha - phi(z)|^2 = Re((alpha + phi(z))/(alpha - phi(z)))`.
pub fn clark_symbol(phi: &RationalMap, alpha: Complex64, z: &DiscPoint) -> Result<f64> {
    clark_symbol_at(phi, alpha, z.coords())
}

pub(crate) fn clark_symbol_at(
    phi: &RationalMap,
    alpha: Complex64,
    coords: &[Complex64],
) -> Result<f64> {
    let w = phi.eval(coords)?;
    let denom = (alpha - w).norm_sqr();
    if denom < 1e-28 {
        return Err(Error::Pole("clark symbol singularity: phi(z) = alpha"));
    }
    let quotient = (1.0 - w.norm_sqr()) / denom;
    debug_assert!({
        let moebius = ((alpha + w) / (alpha - w)).re;
        (moebius - quotient).abs() <= 1e-12 * quotient.abs().max(1.0)
    });
    Ok(quotient)
}

/// Atoms of the Clark measure of a univariate finite Blaschke-type map:
/// unimodular roots of `num - alpha * den`, with the weight `1/|B'|` taken in
/// the on-circle form `|den(root)| / |(num - alpha den)'(root)|`.
pub fn clark_1d(b: &RationalMap, alpha: Complex64) -> Result<Vec<(Complex64, f64)>> {
    if b.n() != 1 {
        return Err(Error::Unsupported("clark_1d needs a univariate map"));
    }
    if b.is_constant() {
        return Err(Error::Degenerate("constant map has no Clark atoms"));
    }
    let alpha = normalize_alpha(alpha)?;
    let cert = b.inner_certificate(64, 1e-7)?;
    if !cert.is_inner(1e-7) || cert.pole_hits > 0 {
        return Err(Error::Domain("univariate map is not certified inner"));
    }
    let num = b.num().coeffs();
    let den = b.den().coeffs();
    let deg = num.len().max(den.len());
    let mut q = vec![Complex64::new(0.0, 0.0); deg];
    for (i, &c) in num.iter().enumerate() {
        q[i] += c;
    }
    for (i, &c) in den.iter().enumerate() {
        q[i] -= alpha * c;
    }
    let roots = polynomial_roots(&q)?;
    if roots.is_empty() {
        return Err(Error::Degenerate("no Clark atoms found"));
    }
    let dq: Vec<Complex64> = (1..q.len()).map(|k| q[k] * k as f64).collect();
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut atoms = Vec::with_capacity(roots.len());
    for root in roots {
        let deviation = (root.norm() - 1.0).abs();
        if deviation > 1e-6 {
            return Err(Error::RootOffCircle { deviation });
        }
        let lambda = root / root.norm();
        let dq_val = eval_poly(&dq, lambda);
        if dq_val.norm() < 1e-10 * scale {
            return Err(Error::RootFinding("coincident Clark atoms"));
        }
        let den_val = eval_poly(den, lambda);
        atoms.push((lambda, den_val.norm() / dq_val.norm()));
    }
    atoms.sort_by(|a, b| a.0.arg().partial_cmp(&b.0.arg()).unwrap());
    let mass: f64 = atoms.iter().map(|(_, w)| w).sum();
    let want = clark_symbol_at(b, alpha, &[Complex64::new(0.0, 0.0)])?;
    if (mass - want).abs() > 1e-8 {
        return Err(Error::MassMismatch { got: mass, want });
    }
    Ok(atoms)
}

fn eval_poly(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Branch points and weights of the graph measure over a single parameter
/// value: unimodular solutions `eta` of `phi(xi, eta) = alpha`, with weights
/// `1/|d_2 phi(xi, eta)|` in the on-branch form `|den|/|(num - alpha den)'|`.
pub fn clark_branches_at(
    phi: &RationalMap,
    alpha: Complex64,
    xi: Complex64,
) -> Result<Vec<(Complex64, f64)>> {
    let num = phi.num().freeze(0, xi);
    let den = phi.den().freeze(0, xi);
    let deg = num.len().max(den.len());
    let mut q = vec![Complex64::new(0.0, 0.0); deg];
    for (i, &c) in num.iter().enumerate() {
        q[i] += c;
    }
    for (i, &c) in den.iter().enumerate() {
        q[i] -= alpha * c;
    }
    let scale = q.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::DegenerateSlice);
    }
    let roots = polynomial_roots(&q).map_err(|_| Error::DegenerateSlice)?;
    if roots.is_empty() {
        return Err(Error::DegenerateSlice);
    }
    let dq: Vec<Complex64> = (1..q.len()).map(|k| q[k] * k as f64).collect();
    let mut out = Vec::with_capacity(roots.len());
    for root in roots {
        let deviation = (root.norm() - 1.0).abs();
        if deviation > 1e-6 {
            return Err(Error::RootOffCircle { deviation });
        }
        let eta = root / root.norm();
        let dq_val = eval_poly(&dq, eta);
        if dq_val.norm() < 1e-12 * scale.max(1.0) {
            return Err(Error::RootFinding("branch collision at parameter"));
        }
        let den_val = eval_poly(&den, eta);
        out.push((eta, den_val.norm() / dq_val.norm()));
    }
    out.sort_by(|a, b| a.0.arg().partial_cmp(&b.0.arg()).unwrap());
    Ok(out)
}

fn angular_distance(a: Complex64, b: Complex64) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Samples the graph measure of an inner bivariate map on `n` parameter
/// nodes. Branches are matched to the previous node by minimal total angular
/// motion; nodes whose slice degenerates are excluded and carry no mass.
pub fn clark_graph_2d(phi: &RationalMap, alpha: Complex64, n: usize) -> Result<GraphMeasure> {
    if phi.n() != 2 {
        return Err(Error::Unsupported("graph construction needs two variables"));
    }
    let alpha = normalize_alpha(alpha)?;
    let xi = shifted_circle_grid(n);
    let mut per_node: Vec<Option<Vec<(Complex64, f64)>>> = Vec::with_capacity(n);
    let mut branch_count = 0usize;
    for &x in &xi {
        match clark_branches_at(phi, alpha, x) {
            Ok(atoms) => {
                branch_count = branch_count.max(atoms.len());
                per_node.push(Some(atoms));
            }
            Err(Error::DegenerateSlice)
            | Err(Error::RootFinding(_))
            | Err(Error::RootOffCircle { .. }) => per_node.push(None),
            Err(e) => return Err(e),
        }
    }
    if branch_count == 0 {
        return Err(Error::DegenerateSlice);
    }
    if branch_count > 4 {
        return Err(Error::Unsupported("more than four graph branches"));
    }
    let excluded: Vec<usize> = per_node
        .iter()
        .enumerate()
        .filter(|(_, v)| v.as_ref().map(|a| a.len()) != Some(branch_count))
        .map(|(j, _)| j)
        .collect();
    if excluded.len() * 10 > n {
        return Err(Error::Degenerate("too many degenerate parameter nodes"));
    }

    let mut branches = vec![
        GraphBranch {
            eta: vec![Complex64::new(1.0, 0.0); n],
            weights: vec![0.0; n],
        };
        branch_count
    ];
    let mut discontinuities = Vec::new();
    let mut collisions = Vec::new();
    let step_flag = 10.0 * 2.0 * PI / n as f64;
    let mut previous: Option<Vec<Complex64>> = None;
    for (j, node) in per_node.iter().enumerate() {
        let Some(atoms) = node else {
            continue;
        };
        if atoms.len() != branch_count {
            continue;
        }
        for a in 0..atoms.len() {
            for b in (a + 1)..atoms.len() {
                if (atoms[a].0 - atoms[b].0).norm() < 1e-6 {
                    collisions.push(j);
                }
            }
        }
        let order: Vec<usize> = match &previous {
            None => (0..branch_count).collect(),
            Some(prev) => {
                let (perm, worst) = best_assignment(prev, atoms);
                if worst > step_flag {
                    discontinuities.push(j);
                }
                perm
            }
        };
        let mut tracked = vec![Complex64::new(0.0, 0.0); branch_count];
        for (slot, &src) in order.iter().enumerate() {
            branches[slot].eta[j] = atoms[src].0;
            branches[slot].weights[j] = atoms[src].1;
            tracked[slot] = atoms[src].0;
        }
        previous = Some(tracked);
    }
    Ok(GraphMeasure {
        param_coord: 0,
        xi,
        branches,
        excluded,
        discontinuities,
        collisions,
    })
}

/// Assignment of new atoms to previous branch positions minimizing the total
/// angular motion; brute force over permutations (at most four branches).
fn best_assignment(prev: &[Complex64], atoms: &[(Complex64, f64)]) -> (Vec<usize>, f64) {
    let k = prev.len();
    let mut best: Option<(Vec<usize>, f64, f64)> = None;
    let mut perm: Vec<usize> = (0..k).collect();
    permute(&mut perm, 0, &mut |p: &[usize]| {
        let mut total = 0.0;
        let mut worst: f64 = 0.0;
        for (slot, &src) in p.iter().enumerate() {
            let d = angular_distance(prev[slot], atoms[src].0);
            total += d;
            worst = worst.max(d);
        }
        match &best {
            Some((_, t, _)) if *t <= total => {}
            _ => best = Some((p.to_vec(), total, worst)),
        }
    });
    let (p, _, worst) = best.unwrap();
    (p, worst)
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// The fixed evaluation panel behind every certificate: radii 0.6 and 0.4,
/// angles in quarter turns of pi.
pub fn certificate_panel(n: usize) -> Vec<DiscPoint> {
    let mut panel = Vec::new();
    if n == 1 {
        for p in 0..5 {
            let z = Complex64::from_polar(0.6, PI * p as f64 / 4.0);
            panel.push(DiscPoint::new(vec![z]).unwrap());
        }
        return panel;
    }
    for p in 0..5 {
        for q in 0..5 {
            let z1 = Complex64::from_polar(0.6, PI * p as f64 / 4.0);
            let z2 = Complex64::from_polar(0.4, PI * q as f64 / 4.0);
            let mut coords = vec![z1, z2];
            coords.extend(core::iter::repeat_n(Complex64::new(0.0, 0.0), n - 2));
            panel.push(DiscPoint::new(coords).unwrap());
        }
    }
    panel
}

/// Certificate panel extended with a radius-0.9 ring, used while refining
/// graph resolutions so that downstream Cauchy-kernel quadrature near the
/// polydisc boundary stays accurate.
fn refinement_panel(n: usize) -> Vec<DiscPoint> {
    let mut panel = certificate_panel(n);
    if n == 2 {
        for p in 0..8 {
            let theta = PI * (2.0 * p as f64 + 1.0) / 8.0;
            let z1 = Complex64::from_polar(0.9, theta);
            let z2 = Complex64::from_polar(0.9, -1.3 * theta);
            panel.push(DiscPoint::new(vec![z1, z2]).unwrap());
        }
    }
    panel
}

fn residuals_for_measure(
    phi: &RationalMap,
    alpha: Complex64,
    measure: &TorusMeasure,
    panel: &[DiscPoint],
    q: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let mass = total_mass(measure, q)?;
    let want_mass = clark_symbol_at(phi, alpha, &vec![Complex64::new(0.0, 0.0); phi.n()])?;
    let mass_residual = (mass - want_mass).abs();
    let mut poisson_residual: f64 = 0.0;
    for z in panel {
        let got = poisson_integral(measure, z, q)?;
        let want = clark_symbol(phi, alpha, z)?;
        poisson_residual = poisson_residual.max((got - want).abs());
    }
    Ok((poisson_residual, mass_residual))
}

/// Builds `sigma_alpha[phi]`.
///
/// Dispatch order: single-coordinate maps get a product representation with
/// the one-dimensional Clark measure in the active coordinate; inner
/// bivariate maps get the graph construction, with the sampling resolution
/// doubled until the certificate residuals settle (or a cap is reached);
/// non-inner maps get an absolutely continuous representation. A rejected
/// construction is marked exceptional; registered closed forms are
/// substituted when available and the radial engine otherwise.
pub fn construct_clark(
    phi: &RationalMap,
    alpha: Complex64,
    q: &QuadratureSpec,
) -> Result<ClarkMeasure> {
    let alpha = normalize_alpha(alpha)?;
    let n = phi.n();
    let panel = certificate_panel(n);

    if let Some(var) = phi.single_coordinate() {
        let b = phi.univariate_restriction(var)?;
        let component = if b.is_inner(1e-8) {
            CircleMeasure::AtomicSet(clark_1d(&b, alpha)?)
        } else {
            let bb = b.clone();
            CircleMeasure::Density(Arc::new(move |tau: Complex64| {
                clark_symbol_at(&bb, alpha, &[tau]).unwrap_or(0.0)
            }))
        };
        let mut components = vec![CircleMeasure::Lebesgue; n];
        components[var] = component;
        let measure = TorusMeasure::Product(components);
        let (poisson, mass) = residuals_for_measure(phi, alpha, &measure, &panel, q)?;
        let certificate = ClarkCertificate {
            representation: "product",
            poisson_match_residual: poisson,
            mass_residual: mass,
            exceptional: false,
        };
        return finish_construction(phi, alpha, measure, certificate, q);
    }

    if n != 2 {
        return Err(Error::Unsupported(
            "construction beyond products needs two variables",
        ));
    }

    if phi.is_inner(1e-8) {
        let refine_panel = refinement_panel(n);
        let mut nodes = next_pow2(q.nodes_per_dim.max(512));
        let graph = loop {
            let graph = clark_graph_2d(phi, alpha, nodes)?;
            let measure = TorusMeasure::Graph(graph);
            let (poisson, mass) = residuals_for_measure(phi, alpha, &measure, &refine_panel, q)?;
            let graph = match measure {
                TorusMeasure::Graph(g) => g,
                _ => unreachable!(),
            };
            if (mass < 1e-9 && poisson < 1e-8) || nodes >= GRAPH_NODE_CAP {
                break graph;
            }
            nodes *= 2;
        };
        let measure = TorusMeasure::Graph(graph);
        let (poisson, mass) = residuals_for_measure(phi, alpha, &measure, &panel, q)?;
        let certificate = ClarkCertificate {
            representation: "graph",
            poisson_match_residual: poisson,
            mass_residual: mass,
            exceptional: false,
        };
        return finish_construction(phi, alpha, measure, certificate, q);
    }

    // non-inner branch: absolutely continuous with the boundary symbol
    let (measure, tag) = if is_halfsum(phi) {
        (
            TorusMeasure::AbsCont(AcDensity::DiagonalPoisson {
                center_angle: alpha.arg(),
            }),
            "abs-cont-diagonal",
        )
    } else {
        let pb = phi.clone();
        let density: crate::measures::TorusDensityFn = Arc::new(move |coords: &[Complex64]| {
            clark_symbol_at(&pb, alpha, coords).unwrap_or(0.0)
        });
        (
            TorusMeasure::AbsCont(AcDensity::Generic { dim: n, density }),
            "abs-cont",
        )
    };
    let (poisson, mass) = residuals_for_measure(phi, alpha, &measure, &panel, q)?;
    let certificate = ClarkCertificate {
        representation: tag,
        poisson_match_residual: poisson,
        mass_residual: mass,
        exceptional: false,
    };
    finish_construction(phi, alpha, measure, certificate, q)
}

/// Applies the accept/fallback policy shared by all dispatch branches.
fn finish_construction(
    phi: &RationalMap,
    alpha: Complex64,
    measure: TorusMeasure,
    certificate: ClarkCertificate,
    q: &QuadratureSpec,
) -> Result<ClarkMeasure> {
    if certificate.accepted() {
        return Ok(ClarkMeasure {
            phi: phi.clone(),
            alpha,
            rep: ClarkRep::Closed(measure),
            certificate,
        });
    }
    // generic construction rejected: try registered closed forms
    if is_rational_example(phi) && (alpha + Complex64::new(1.0, 0.0)).norm() < 1e-8 {
        let pinned = |coord: usize| -> TorusMeasure {
            let mut components = vec![CircleMeasure::Lebesgue; 2];
            components[coord] = CircleMeasure::Atom {
                position: Complex64::new(-1.0, 0.0),
                weight: 1.0,
            };
            TorusMeasure::Product(components)
        };
        // the mass identity at the origin forces the 1/2 on each line
        let special = TorusMeasure::Sum(vec![(0.5, pinned(0)), (0.5, pinned(1))]);
        let panel = certificate_panel(2);
        let (poisson, mass) = residuals_for_measure(phi, alpha, &special, &panel, q)?;
        let certificate = ClarkCertificate {
            representation: "atomic-sum",
            poisson_match_residual: poisson,
            mass_residual: mass,
            exceptional: true,
        };
        return Ok(ClarkMeasure {
            phi: phi.clone(),
            alpha,
            rep: ClarkRep::Closed(special),
            certificate,
        });
    }
    Ok(ClarkMeasure {
        phi: phi.clone(),
        alpha,
        rep: ClarkRep::Radial,
        certificate: ClarkCertificate {
            representation: "radial-fallback",
            exceptional: true,
            ..certificate
        },
    })
}

/// Weak-* integration: `integral of f u_r` on grids matched to the peak width
/// of `u_r`, extrapolated in `1 - r` to the boundary.
///
/// Each radius uses at least `16/(1-r)` nodes per dimension (the peak width
/// of `u_r` scales like `1 - r`), capped at 4096; a radius whose hard floor
/// of `8/(1-r)` exceeds the cap is a resolution error. With
/// `extrapolation_order = 1` the whole schedule enters a Richardson table;
/// order 0 returns the finest-radius value.
pub fn weakstar_integrate(
    phi: &RationalMap,
    alpha: Complex64,
    f: TorusFn,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    weakstar_integrate_many(phi, alpha, &[f], q).map(|v| v[0])
}

/// Same as [`weakstar_integrate`] for several integrands, sharing the
/// per-radius density evaluations.
pub fn weakstar_integrate_many(
    phi: &RationalMap,
    alpha: Complex64,
    fs: &[TorusFn],
    q: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    let alpha = normalize_alpha(alpha)?;
    if q.radial_schedule.is_empty() {
        return Err(Error::Domain("radial schedule is empty"));
    }
    if q.extrapolation_order == 1 && q.radial_schedule.len() < 2 {
        return Err(Error::Domain("extrapolation needs at least two radii"));
    }
    const NODE_CAP: usize = 4096;
    let n = phi.n();
    let mut per_radius: Vec<Vec<(f64, Complex64)>> = vec![Vec::new(); fs.len()];
    for &r in &q.radial_schedule {
        let h = 1.0 - r;
        let floor = (8.0 / h).ceil() as usize;
        if floor > NODE_CAP {
            return Err(Error::Resolution {
                needed: floor,
                got: NODE_CAP,
            });
        }
        let nodes = next_pow2(((16.0 / h).ceil() as usize).max(q.nodes_per_dim)).min(NODE_CAP);
        let grid = shifted_circle_grid(nodes);
        let total = nodes.pow(n as u32);
        let mut accs: Vec<PairwiseSum> = (0..fs.len()).map(|_| PairwiseSum::new()).collect();
        let mut point = vec![Complex64::new(0.0, 0.0); n];
        let mut scaled = vec![Complex64::new(0.0, 0.0); n];
        for flat in 0..total {
            let mut rest = flat;
            for v in (0..n).rev() {
                point[v] = grid[rest % nodes];
                scaled[v] = point[v] * r;
                rest /= nodes;
            }
            let u = clark_symbol_at(phi, alpha, &scaled)?;
            for (acc, f) in accs.iter_mut().zip(fs.iter()) {
                acc.push(f(&point) * u);
            }
        }
        for (k, acc) in accs.into_iter().enumerate() {
            per_radius[k].push((h, acc.total() / total as f64));
        }
    }
    Ok(per_radius
        .into_iter()
        .map(|samples| {
            if q.extrapolation_order == 0 {
                samples.last().unwrap().1
            } else {
                extrapolate_to_zero(&samples)
            }
        })
        .collect())
}

/// Slice of the Clark measure along the diagonal circle through `zeta`: the
/// one-dimensional Clark measure of the slice map, pushed onto that circle.
pub fn slice_measure(
    phi: &RationalMap,
    alpha: Complex64,
    zeta: &TorusPoint,
) -> Result<SliceMeasure> {
    let alpha = normalize_alpha(alpha)?;
    let b = phi.diag_slice(zeta.coords())?;
    if b.is_constant() {
        // the slice of the symbol is then constant in the disc variable, so
        // the slice measure is that constant times Lebesgue measure;
        // unimodular constants carry no representable slice
        let value = b.eval(&[Complex64::new(0.0, 0.0)])?;
        if value.norm() >= 1.0 - 1e-9 {
            return Err(Error::DegenerateSlice);
        }
        let level = (1.0 - value.norm_sqr()) / (alpha - value).norm_sqr();
        let circle = CircleMeasure::Density(Arc::new(move |_: Complex64| level));
        return Ok(SliceMeasure {
            direction: zeta.coords().to_vec(),
            circle,
        });
    }
    let circle = if b.is_inner(1e-7) {
        CircleMeasure::AtomicSet(clark_1d(&b, alpha)?)
    } else {
        let bb = b.clone();
        CircleMeasure::Density(Arc::new(move |tau: Complex64| {
            clark_symbol_at(&bb, alpha, &[tau]).unwrap_or(0.0)
        }))
    };
    Ok(SliceMeasure {
        direction: zeta.coords().to_vec(),
        circle,
    })
}

/// Node count that resolves the peak of a non-inner slice density when it is
/// integrated by direct sampling: the peak width is one minus the sup of
/// `|b|` over the circle.
pub fn slice_density_nodes(b: &RationalMap, base_nodes: usize) -> usize {
    let mut sup: f64 = 0.0;
    for tau in shifted_circle_grid(64) {
        if let Ok(v) = b.eval(&[tau]) {
            sup = sup.max(v.norm());
        }
    }
    if sup >= 1.0 - 1e-9 {
        return 1 << 20;
    }
    next_pow2(((20.0 / (1.0 - sup)).ceil() as usize).max(base_nodes)).min(1 << 20)
}

/// Fourier coefficients of the Clark density of a non-inner univariate map:
/// the density is `Re (alpha + B)/(alpha - B)` on the circle, so its
/// coefficient at frequency `K` is half the `|K|`-th Taylor coefficient of
/// that Herglotz quotient (the full real part at 0). The Taylor expansion of
/// the rational quotient comes from stable power-series division: all poles
/// of `alpha - B` lie outside the closed disc.
fn herglotz_density_coeffs(b: &RationalMap, alpha: Complex64, count: usize) -> Result<Vec<Complex64>> {
    let num = b.num().coeffs();
    let den = b.den().coeffs();
    let deg = num.len().max(den.len());
    // P = alpha*den + num, Q = alpha*den - num
    let mut p = vec![Complex64::new(0.0, 0.0); deg];
    let mut qq = vec![Complex64::new(0.0, 0.0); deg];
    for (i, &c) in den.iter().enumerate() {
        p[i] += alpha * c;
        qq[i] += alpha * c;
    }
    for (i, &c) in num.iter().enumerate() {
        p[i] += c;
        qq[i] -= c;
    }
    if qq[0].norm() < 1e-14 {
        return Err(Error::Pole("slice symbol singular at the origin"));
    }
    let mut taylor = vec![Complex64::new(0.0, 0.0); count];
    for m in 0..count {
        let mut acc = if m < p.len() {
            p[m]
        } else {
            Complex64::new(0.0, 0.0)
        };
        for j in 1..qq.len().min(m + 1) {
            acc -= qq[j] * taylor[m - j];
        }
        taylor[m] = acc / qq[0];
    }
    Ok(taylor)
}

/// `integral f(tau * zeta) u_B(tau) dm(tau)` for each integrand, pairing the
/// integrand's Fourier data against the exact Herglotz coefficients of the
/// slice density. `n_fft` bounds the retained bandwidth.
fn slice_density_pairing(
    b: &RationalMap,
    alpha: Complex64,
    zeta: &[Complex64],
    fs: &[TorusFn],
    n_fft: usize,
) -> Result<Vec<Complex64>> {
    let n = next_pow2(n_fft.max(256));
    let half = n / 2;
    let taylor = herglotz_density_coeffs(b, alpha, half)?;
    let grid = shifted_circle_grid(n);
    let mut point = vec![Complex64::new(0.0, 0.0); zeta.len()];
    let mut out = Vec::with_capacity(fs.len());
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    for f in fs {
        for (i, tau) in grid.iter().enumerate() {
            for (slot, dir) in point.iter_mut().zip(zeta.iter()) {
                *slot = tau * dir;
            }
            samples[i] = f(&point);
        }
        let ghat = crate::numerics::shifted_fourier_coeffs(&samples);
        // sum over K of u_hat(K) g_hat(-K); u_hat(K) = taylor[|K|]/2 off 0
        let mut acc = Complex64::new(taylor[0].re, 0.0) * ghat[half];
        for k in 1..half {
            let upos = taylor[k] * 0.5;
            acc += upos * ghat[half - k] + upos.conj() * ghat[half + k];
        }
        out.push(acc);
    }
    Ok(out)
}

/// Residual of the weak slice decomposition: the measure applied to `f`
/// against the average of its diagonal slice measures over the torus.
pub fn verify_slice_decomposition(
    phi: &RationalMap,
    alpha: Complex64,
    f: TorusFn,
    q: &QuadratureSpec,
) -> Result<f64> {
    verify_slice_decomposition_many(phi, alpha, &[f], q).map(|v| v[0])
}

pub fn verify_slice_decomposition_many(
    phi: &RationalMap,
    alpha: Complex64,
    fs: &[TorusFn],
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let alpha = normalize_alpha(alpha)?;
    if phi.n() != 2 {
        return Err(Error::Unsupported("slice decomposition check needs n = 2"));
    }
    let clark = construct_clark(phi, alpha, q)?;
    let lhs: Vec<Complex64> = fs
        .iter()
        .map(|f| clark.integrate(f, q))
        .collect::<Result<_>>()?;
    let grid = shifted_circle_grid(q.nodes_per_dim);
    let n_fft = q.nodes_per_dim.clamp(256, 2048);
    let mut accs: Vec<PairwiseSum> = (0..fs.len()).map(|_| PairwiseSum::new()).collect();
    let mut point = [Complex64::new(0.0, 0.0); 2];
    for a in &grid {
        for bb in &grid {
            let dir = [*a, *bb];
            let b = phi.diag_slice(&dir)?;
            if !b.is_constant() && b.is_inner(1e-7) {
                let atoms = clark_1d(&b, alpha)?;
                for (acc, f) in accs.iter_mut().zip(fs.iter()) {
                    let mut v = Complex64::new(0.0, 0.0);
                    for (tau, w) in &atoms {
                        point[0] = tau * dir[0];
                        point[1] = tau * dir[1];
                        v += f(&point) * *w;
                    }
                    acc.push(v);
                }
            } else {
                if b.is_constant()
                    && b.eval(&[Complex64::new(0.0, 0.0)])?.norm() >= 1.0 - 1e-9
                {
                    return Err(Error::DegenerateSlice);
                }
                let values = slice_density_pairing(&b, alpha, &dir, fs, n_fft)?;
                for (acc, v) in accs.iter_mut().zip(values) {
                    acc.push(v);
                }
            }
        }
    }
    let count = (grid.len() * grid.len()) as f64;
    Ok(lhs
        .iter()
        .zip(accs.iter())
        .map(|(l, acc)| (l - acc.total() / count).norm())
        .collect())
}

/// Residual of the disintegration identity: averaging the Clark family over
/// the unimodular parameter recovers Lebesgue measure.
pub fn verify_disintegration(
    phi: &RationalMap,
    f: TorusFn,
    q: &QuadratureSpec,
    alpha_grid: usize,
) -> Result<f64> {
    verify_disintegration_many(phi, &[f], q, alpha_grid).map(|v| v[0])
}

pub fn verify_disintegration_many(
    phi: &RationalMap,
    fs: &[TorusFn],
    q: &QuadratureSpec,
    alpha_grid: usize,
) -> Result<Vec<f64>> {
    if alpha_grid < 64 {
        return Err(Error::Domain("alpha grid needs at least 64 points"));
    }
    let mut accs: Vec<PairwiseSum> = (0..fs.len()).map(|_| PairwiseSum::new()).collect();
    for j in 0..alpha_grid {
        let alpha = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / alpha_grid as f64);
        let clark = construct_clark(phi, alpha, q)?;
        for (acc, f) in accs.iter_mut().zip(fs.iter()) {
            acc.push(clark.integrate(f, q)?);
        }
    }
    let n = phi.n();
    let lebesgue = TorusMeasure::Product(vec![CircleMeasure::Lebesgue; n]);
    let mut out = Vec::with_capacity(fs.len());
    for (acc, f) in accs.iter().zip(fs.iter()) {
        let lhs = acc.total() / alpha_grid as f64;
        let rhs = integrate(&lebesgue, *f, q)?;
        out.push((lhs - rhs).norm());
    }
    Ok(out)
}

/// Successive differences `|∫ f dσ(α_{k+1}) − ∫ f dσ(α_k)|` over a uniform
/// parameter grid (wrapping around), witnessing weak continuity in alpha.
pub fn alpha_continuity_scan(
    phi: &RationalMap,
    f: TorusFn,
    grid: usize,
    q: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if grid < 2 {
        return Err(Error::Domain("continuity scan needs at least two points"));
    }
    let mut values = Vec::with_capacity(grid);
    for j in 0..grid {
        let alpha = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / grid as f64);
        let clark = construct_clark(phi, alpha, q)?;
        values.push(clark.integrate(f, q)?);
    }
    Ok((0..grid)
        .map(|j| (values[(j + 1) % grid] - values[j]).norm())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::poisson_1d;
    use crate::numerics::SplitMix64;
    use crate::rational::catalog;
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(theta: f64) -> Complex64 {
        Complex64::from_polar(1.0, theta)
    }

    fn disc(zs: &[Complex64]) -> DiscPoint {
        DiscPoint::new(zs.to_vec()).unwrap()
    }

    #[test]
    fn clark_symbol_reference_values() {
        let product = catalog("product").unwrap();
        let z0 = DiscPoint::origin(2);
        for theta in [0.0, 1.0, 2.5, 4.0] {
            assert!((clark_symbol(&product, unit(theta), &z0).unwrap() - 1.0).abs() < 1e-15);
        }
        let z = disc(&[c(0.5, 0.0), c(0.5, 0.0)]);
        let got = clark_symbol(&product, c(1.0, 0.0), &z).unwrap();
        assert!((got - 5.0 / 3.0).abs() < 1e-14);

        let halfsum = catalog("halfsum").unwrap();
        let z = disc(&[c(0.5, 0.0), c(0.0, 0.0)]);
        let got = clark_symbol(&halfsum, c(1.0, 0.0), &z).unwrap();
        assert!((got - 5.0 / 3.0).abs() < 1e-14);

        // quotient and Moebius forms agree at random points
        let rational = catalog("rational_example").unwrap();
        let mut rng = SplitMix64::new(2);
        for _ in 0..50 {
            let z = disc(&[rng.next_in_disc(0.9), rng.next_in_disc(0.9)]);
            let alpha = unit(rng.next_f64() * 2.0 * PI);
            let w = rational.eval(z.coords()).unwrap();
            let quotient = clark_symbol(&rational, alpha, &z).unwrap();
            let moebius = ((alpha + w) / (alpha - w)).re;
            assert!((quotient - moebius).abs() < 1e-12 * quotient.max(1.0));
            assert!(quotient > 0.0);
        }

        // singularity guard: phi(z) = alpha has no symbol value
        let coordinate = catalog("coordinate").unwrap();
        let err =
            clark_symbol_at(&coordinate, c(1.0, 0.0), &[c(1.0 - 1e-16, 0.0), c(0.0, 0.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn clark_1d_identity_map_is_single_atom() {
        let b = catalog("coordinate")
            .unwrap()
            .univariate_restriction(0)
            .unwrap();
        for theta in [0.0, 0.9, -2.0] {
            let alpha = unit(theta);
            let atoms = clark_1d(&b, alpha).unwrap();
            assert_eq!(atoms.len(), 1);
            assert!((atoms[0].0 - alpha).norm() < 1e-12);
            assert!((atoms[0].1 - 1.0).abs() < 1e-12);
        }
    }

    /// Oracle for atomic one-dimensional Clark measures: the Poisson integral
    /// of the atoms must reproduce the symbol at interior test points.
    fn assert_poisson_matches_symbol_1d(
        b: &RationalMap,
        alpha: Complex64,
        atoms: &[(Complex64, f64)],
    ) {
        let mut rng = SplitMix64::new(9);
        for _ in 0..20 {
            let z = rng.next_in_disc(0.8);
            let via_atoms: f64 = atoms.iter().map(|(pos, w)| w * poisson_1d(z, *pos)).sum();
            let want = clark_symbol_at(b, alpha, &[z]).unwrap();
            assert!(
                (via_atoms - want).abs() < 1e-9 * want.max(1.0),
                "atoms {via_atoms} vs symbol {want}"
            );
        }
    }

    #[test]
    fn clark_1d_square_map_splits_evenly() {
        // B = lambda^2 at alpha = 1: atoms at 1 and -1 with weights 1/2
        let b = RationalMap::polynomial(crate::rational::MultiPoly::univariate(vec![
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
        ]));
        let atoms = clark_1d(&b, c(1.0, 0.0)).unwrap();
        assert_eq!(atoms.len(), 2);
        for (pos, w) in &atoms {
            assert!(pos.im.abs() < 1e-12);
            assert!((pos.re.abs() - 1.0).abs() < 1e-12);
            assert!((w - 0.5).abs() < 1e-12);
        }
        assert_poisson_matches_symbol_1d(&b, c(1.0, 0.0), &atoms);
    }

    #[test]
    fn clark_1d_on_diagonal_slice_of_product() {
        let product = catalog("product").unwrap();
        let zeta = [unit(0.4), unit(-1.3)];
        let b = product.diag_slice(&zeta).unwrap();
        let alpha = unit(0.8);
        let atoms = clark_1d(&b, alpha).unwrap();
        assert_eq!(atoms.len(), 2);
        let target = alpha * zeta[0].conj() * zeta[1].conj();
        for (pos, w) in &atoms {
            assert!((pos * pos - target).norm() < 1e-11);
            assert!((w - 0.5).abs() < 1e-11);
        }
        assert_poisson_matches_symbol_1d(&b, alpha, &atoms);
    }

    #[test]
    fn constant_slice_is_degenerate() {
        let rational = catalog("rational_example").unwrap();
        let b = rational.vertical_slice(0, c(-1.0, 0.0)).unwrap();
        assert!(matches!(
            clark_1d(&b, c(1.0, 0.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn graph_of_product_map_is_conjugate_line() {
        let product = catalog("product").unwrap();
        let alpha = unit(0.5 * PI); // alpha = i
        let graph = clark_graph_2d(&product, alpha, 512).unwrap();
        assert_eq!(graph.branches.len(), 1);
        assert!(graph.excluded.is_empty());
        assert!(graph.discontinuities.is_empty());
        for (j, &xi) in graph.xi.iter().enumerate() {
            let eta = graph.branches[0].eta[j];
            assert!((eta - alpha * xi.conj()).norm() < 1e-12);
            assert!((graph.branches[0].weights[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn graph_weights_of_rational_example_at_one() {
        let rational = catalog("rational_example").unwrap();
        let graph = clark_graph_2d(&rational, c(1.0, 0.0), 512).unwrap();
        assert_eq!(graph.branches.len(), 1);
        for (j, &xi) in graph.xi.iter().enumerate() {
            let eta = graph.branches[0].eta[j];
            assert!((eta - xi.conj()).norm() < 1e-10, "branch is conj(xi)");
            let want = (c(1.0, 0.0) + xi).norm_sqr() / 2.0;
            assert!(
                (graph.branches[0].weights[j] - want).abs() < 1e-10,
                "weight at node {j}"
            );
        }
        // the weight vanishes at xi = -1 (computed exactly at the point)
        let atoms = clark_branches_at(&rational, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(atoms.len(), 1);
        assert!((atoms[0].0 - c(-1.0, 0.0)).norm() < 1e-12);
        assert!(atoms[0].1 < 1e-12);
    }

    #[test]
    fn graph_branch_matches_moebius_formula() {
        let rational = catalog("rational_example").unwrap();
        for alpha in [unit(0.3), unit(2.0), unit(-1.2)] {
            let graph = clark_graph_2d(&rational, alpha, 512).unwrap();
            for (j, &xi) in graph.xi.iter().enumerate() {
                let b_alpha = (c(1.0, 0.0) + 2.0 * xi - alpha)
                    / ((alpha - c(1.0, 0.0)) * xi + 2.0 * alpha);
                let eta = graph.branches[0].eta[j];
                assert!(
                    (eta - b_alpha.conj()).norm() < 1e-10,
                    "alpha {alpha} node {j}"
                );
            }
        }
    }

    #[test]
    fn two_branch_graph_tracks_square_roots() {
        // phi = z1 z2^2 is inner; branches are the two square roots of
        // alpha conj(xi), each of weight 1/2
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let num =
            crate::rational::MultiPoly::from_rows(&[&[zero, zero, zero], &[zero, zero, one]]);
        let phi = RationalMap::polynomial(num);
        let alpha = unit(1.1);
        let graph = clark_graph_2d(&phi, alpha, 256).unwrap();
        assert_eq!(graph.branches.len(), 2);
        assert!(graph.discontinuities.is_empty(), "continuous tracking");
        for (j, &xi) in graph.xi.iter().enumerate() {
            for branch in &graph.branches {
                let eta = branch.eta[j];
                assert!((eta * eta - alpha * xi.conj()).norm() < 1e-10);
                assert!((branch.weights[j] - 0.5).abs() < 1e-10);
            }
        }
        assert!((graph.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn construct_coordinate_gives_product_form() {
        let phi = catalog("coordinate").unwrap();
        let q = QuadratureSpec::with_nodes(256);
        let alpha = unit(0.7);
        let clark = construct_clark(&phi, alpha, &q).unwrap();
        assert_eq!(clark.certificate.representation, "product");
        assert!(clark.certificate.accepted());
        assert!(!clark.certificate.exceptional);
        assert!(clark.certificate.poisson_match_residual < 1e-10);
        assert!(clark.certificate.mass_residual < 1e-12);
        match clark.measure().unwrap() {
            TorusMeasure::Product(components) => {
                match &components[0] {
                    CircleMeasure::AtomicSet(atoms) => {
                        assert_eq!(atoms.len(), 1);
                        assert!((atoms[0].0 - alpha).norm() < 1e-12);
                    }
                    other => panic!("expected atoms in coordinate 0, got {other:?}"),
                }
                assert!(matches!(components[1], CircleMeasure::Lebesgue));
            }
            other => panic!("expected product, got {other:?}"),
        }
    }

    #[test]
    fn construct_product_and_rational_graphs() {
        let q = QuadratureSpec::with_nodes(256);
        for (name, alpha) in [
            ("product", unit(0.5 * PI)),
            ("product", c(1.0, 0.0)),
            ("rational_example", c(1.0, 0.0)),
            ("rational_example", unit(2.3)),
        ] {
            let phi = catalog(name).unwrap();
            let clark = construct_clark(&phi, alpha, &q).unwrap();
            assert_eq!(clark.certificate.representation, "graph", "{name}");
            assert!(clark.certificate.accepted(), "{name} at {alpha}");
            assert!(clark.certificate.poisson_match_residual < 1e-8);
            assert!(clark.certificate.mass_residual < 1e-9);
            assert!(clark.support_deviation().unwrap() < 1e-8);
        }
    }

    #[test]
    fn construct_rational_example_at_minus_one_is_exceptional() {
        let phi = catalog("rational_example").unwrap();
        let q = QuadratureSpec::with_nodes(256);
        let clark = construct_clark(&phi, c(-1.0, 0.0), &q).unwrap();
        assert!(clark.certificate.exceptional);
        assert_eq!(clark.certificate.representation, "atomic-sum");
        assert!(clark.certificate.accepted(), "closed form passes the gate");
        assert!((clark.total_mass(&q).unwrap() - 1.0).abs() < 1e-10);
        // the graph construction alone only recovers half the mass
        let graph = clark_graph_2d(&phi, c(-1.0, 0.0), 512).unwrap();
        assert!((graph.mass() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn construct_near_exceptional_alpha_refines_and_passes() {
        let phi = catalog("rational_example").unwrap();
        let q = QuadratureSpec::with_nodes(256);
        // 22.5 degrees away from the exceptional point
        let alpha = unit(PI * 7.0 / 8.0);
        let clark = construct_clark(&phi, alpha, &q).unwrap();
        assert_eq!(clark.certificate.representation, "graph");
        assert!(clark.certificate.accepted());
        assert!(clark.certificate.mass_residual < 1e-9);
        match clark.measure().unwrap() {
            TorusMeasure::Graph(g) => assert!(g.nodes() > 512, "refinement kicked in"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn construct_halfsum_uses_rotated_density() {
        let phi = catalog("halfsum").unwrap();
        let q = QuadratureSpec::with_nodes(512);
        for alpha in [c(1.0, 0.0), unit(1.9)] {
            let clark = construct_clark(&phi, alpha, &q).unwrap();
            assert_eq!(clark.certificate.representation, "abs-cont-diagonal");
            assert!(!clark.certificate.exceptional);
            assert!(
                clark.certificate.poisson_match_residual < 1e-6,
                "residual {}",
                clark.certificate.poisson_match_residual
            );
            assert!(clark.certificate.mass_residual < 1e-12);
        }
    }

    #[test]
    fn radial_approximant_density_is_scaled_symbol() {
        let phi = catalog("rational_example").unwrap();
        let alpha = unit(2.1);
        let approx = RadialApproximant {
            phi: phi.clone(),
            alpha,
            r: 0.97,
        };
        let mut rng = SplitMix64::new(4);
        for _ in 0..20 {
            let theta = (rng.next_f64() * 2.0 - 1.0) * PI;
            let point = [unit(theta), unit(-1.7 * theta)];
            let got = approx.density(&point).unwrap();
            let scaled = disc(&[point[0] * 0.97, point[1] * 0.97]);
            let want = clark_symbol(&phi, alpha, &scaled).unwrap();
            assert!((got - want).abs() < 1e-14 * want.max(1.0));
            assert!(got > 0.0);
        }
    }

    #[test]
    fn weakstar_mass_is_exact_at_every_radius() {
        let phi = catalog("rational_example").unwrap();
        let alpha = unit(0.4);
        let one = |_: &[Complex64]| c(1.0, 0.0);
        // mean value property: the mass integral is exact at each radius
        for r in [0.9375, 0.96875] {
            let q = QuadratureSpec::new(64, vec![r], 0).unwrap();
            let got = weakstar_integrate(&phi, alpha, &one, &q).unwrap();
            let want = clark_symbol(&phi, alpha, &DiscPoint::origin(2)).unwrap();
            assert!((got.re - want).abs() < 1e-12);
            assert!(got.im.abs() < 1e-14);
        }
    }

    #[test]
    fn weakstar_matches_closed_forms() {
        let q = QuadratureSpec::default();
        // product map at alpha = 1 and f = zeta1 zeta2: closed value 1
        let product = catalog("product").unwrap();
        let f = |z: &[Complex64]| z[0] * z[1];
        let got = weakstar_integrate(&product, c(1.0, 0.0), &f, &q).unwrap();
        assert!((got - c(1.0, 0.0)).norm() < 1e-4, "{got}");

        // rational example at alpha = 1, f = zeta1: expanding the weight
        // |1 + xi|^2 / 2 = (2 + xi + conj(xi))/2 leaves 1/2
        let rational = catalog("rational_example").unwrap();
        let f1 = |z: &[Complex64]| z[0];
        let got = weakstar_integrate(&rational, c(1.0, 0.0), &f1, &q).unwrap();
        assert!((got - c(0.5, 0.0)).norm() < 1e-4, "{got}");
    }

    #[test]
    fn weakstar_resolution_guard() {
        let phi = catalog("product").unwrap();
        let f = |_: &[Complex64]| c(1.0, 0.0);
        let q = QuadratureSpec::new(64, vec![1.0 - 1e-4], 0).unwrap();
        assert!(matches!(
            weakstar_integrate(&phi, c(1.0, 0.0), &f, &q),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn slice_measures_reference_forms() {
        let alpha = unit(0.9);

        // coordinate map: rotation slice, single atom at alpha conj(zeta1)
        let coordinate = catalog("coordinate").unwrap();
        let zeta = TorusPoint::new(vec![unit(0.3), unit(-0.8)]).unwrap();
        let slice = slice_measure(&coordinate, alpha, &zeta).unwrap();
        match &slice.circle {
            CircleMeasure::AtomicSet(atoms) => {
                assert_eq!(atoms.len(), 1);
                assert!((atoms[0].0 - alpha * zeta.coords()[0].conj()).norm() < 1e-11);
                assert!((atoms[0].1 - 1.0).abs() < 1e-11);
            }
            other => panic!("expected atoms, got {other:?}"),
        }

        // product: two atoms of weight 1/2
        let product = catalog("product").unwrap();
        let slice = slice_measure(&product, alpha, &zeta).unwrap();
        assert!((slice.mass(128) - 1.0).abs() < 1e-11);
        match &slice.circle {
            CircleMeasure::AtomicSet(atoms) => assert_eq!(atoms.len(), 2),
            other => panic!("expected atoms, got {other:?}"),
        }

        // rational example along the main diagonal: identity slice
        let rational = catalog("rational_example").unwrap();
        let diag = TorusPoint::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let slice = slice_measure(&rational, alpha, &diag).unwrap();
        match &slice.circle {
            CircleMeasure::AtomicSet(atoms) => {
                assert_eq!(atoms.len(), 1);
                assert!((atoms[0].0 - alpha).norm() < 1e-11);
                assert!((atoms[0].1 - 1.0).abs() < 1e-11);
            }
            other => panic!("expected atoms, got {other:?}"),
        }
    }

    #[test]
    fn herglotz_pairing_matches_resolved_density_quadrature() {
        // non-inner diagonal slices of the halfsum map; the pairing against
        // exact Herglotz coefficients must agree with brute-force sampling of
        // the density at peak-resolving resolution
        let halfsum = catalog("halfsum").unwrap();
        let alpha = unit(0.7);
        let f0 = |z: &[Complex64]| z[0] * z[1] + z[1].conj() * 0.5;
        let f1 = |z: &[Complex64]| {
            let s = z[0].re - z[1].im;
            Complex64::new((1.1 * s).cos(), 0.3 * s)
        };
        for dir in [
            [unit(0.3), unit(2.0)],
            [unit(1.0), unit(1.0 + PI - 0.04)], // close to the degenerate anti-diagonal
        ] {
            let zeta = TorusPoint::new(dir.to_vec()).unwrap();
            let slice = slice_measure(&halfsum, alpha, &zeta).unwrap();
            let b = halfsum.diag_slice(&dir).unwrap();
            let nodes = slice_density_nodes(&b, 256);
            let fast = super::slice_density_pairing(&b, alpha, &dir, &[&f0, &f1], 512).unwrap();
            let slow = [slice.integrate(&f0, nodes), slice.integrate(&f1, nodes)];
            for (a, b) in fast.iter().zip(slow.iter()) {
                assert!((a - b).norm() < 1e-9, "pairing {a} vs quadrature {b}");
            }
        }
    }

    #[test]
    fn constant_interior_slices_carry_lebesgue_level() {
        // halfsum along the anti-diagonal: the slice map is identically zero
        // and the slice measure is plain Lebesgue measure on that circle
        let halfsum = catalog("halfsum").unwrap();
        let zeta = TorusPoint::new(vec![unit(0.4), unit(0.4 + PI)]).unwrap();
        let alpha = unit(1.3);
        let slice = slice_measure(&halfsum, alpha, &zeta).unwrap();
        assert!((slice.mass(128) - 1.0).abs() < 1e-13);
        let f = |z: &[Complex64]| z[0] * z[1].conj();
        let got = slice.integrate(&f, 128);
        // integrand on the pushed circle: tau^0 * zeta1 conj(zeta2) is constant
        let want = zeta.coords()[0] * zeta.coords()[1].conj();
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn slice_decomposition_residuals() {
        let q = QuadratureSpec::with_nodes(128);
        let one = |_: &[Complex64]| c(1.0, 0.0);
        let f12 = |z: &[Complex64]| z[0] * z[1];
        let f1 = |z: &[Complex64]| z[0];

        let product = catalog("product").unwrap();
        let res = verify_slice_decomposition_many(
            &product,
            unit(0.6),
            &[&one as TorusFn, &f12 as TorusFn],
            &q,
        )
        .unwrap();
        assert!(res[0] < 1e-8, "mass {res:?}");
        assert!(res[1] < 1e-8);

        let rational = catalog("rational_example").unwrap();
        let res = verify_slice_decomposition_many(
            &rational,
            c(1.0, 0.0),
            &[&one as TorusFn, &f1 as TorusFn],
            &q,
        )
        .unwrap();
        assert!(res[0] < 1e-6);
        assert!(res[1] < 1e-6);
    }

    #[test]
    fn disintegration_residuals() {
        let q = QuadratureSpec::with_nodes(128);
        let one = |_: &[Complex64]| c(1.0, 0.0);
        let f1 = |z: &[Complex64]| z[0];

        let product = catalog("product").unwrap();
        let res =
            verify_disintegration_many(&product, &[&one as TorusFn, &f1 as TorusFn], &q, 64)
                .unwrap();
        assert!(res[0] < 1e-8);
        assert!(res[1] < 1e-10);

        assert!(matches!(
            verify_disintegration(&product, &one, &q, 32),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn continuity_scan_tracks_parameter_motion() {
        let q = QuadratureSpec::with_nodes(128);
        // coordinate map, f = zeta1: the integral is alpha itself
        let coordinate = catalog("coordinate").unwrap();
        let f1 = |z: &[Complex64]| z[0];
        let diffs = alpha_continuity_scan(&coordinate, &f1, 16, &q).unwrap();
        let want = (unit(2.0 * PI / 16.0) - c(1.0, 0.0)).norm();
        for d in &diffs {
            assert!((d - want).abs() < 1e-10);
        }
        // rational example, f = 1: constant mass
        let rational = catalog("rational_example").unwrap();
        let one = |_: &[Complex64]| c(1.0, 0.0);
        let diffs = alpha_continuity_scan(&rational, &one, 8, &q).unwrap();
        for d in &diffs {
            assert!(*d < 1e-9);
        }
    }

    #[test]
    fn graphs_of_distinct_parameters_barely_intersect() {
        let product = catalog("product").unwrap();
        let g1 = clark_graph_2d(&product, unit(0.3), 256).unwrap();
        let g2 = clark_graph_2d(&product, unit(1.1), 256).unwrap();
        let hits = (0..256)
            .filter(|&j| (g1.branches[0].eta[j] - g2.branches[0].eta[j]).norm() < 1e-6)
            .count();
        assert_eq!(hits, 0, "conjugate lines of distinct parameters are disjoint");

        let rational = catalog("rational_example").unwrap();
        let g1 = clark_graph_2d(&rational, unit(0.3), 256).unwrap();
        let g2 = clark_graph_2d(&rational, unit(1.1), 256).unwrap();
        let hits = (0..256)
            .filter(|&j| (g1.branches[0].eta[j] - g2.branches[0].eta[j]).norm() < 1e-6)
            .count();
        assert!(hits <= 2, "Moebius branches cross at finitely many samples");
    }
}
