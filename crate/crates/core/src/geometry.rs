//! Bases, fibers and warping functions.
//!
//! A base is either an interval `[0, L]` (boundary = two points, counting
//! measure) or a Euclidean d-ball of radius R with radial warping, so that
//! every integral in the crate is one-dimensional. Fibers only enter through
//! their Laplace eigenvalues.

use std::path::Path;

use crate::error::{Error, Result};
use crate::quad::{build_partition, integrate_partition};

/// Base manifold of the warped product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDomain {
    /// `[0, L]` with the two-point boundary `{0, L}`.
    Interval { length: f64 },
    /// Euclidean ball of dimension `dim >= 2` and radius `radius`,
    /// with radial warping functions h = h(r).
    Ball { dim: usize, radius: f64 },
}

/// Volume of the Euclidean unit ball in dimension d.
pub fn unit_ball_volume(d: usize) -> f64 {
    // omega_0 = 1, omega_1 = 2, omega_d = omega_{d-2} * 2 pi / d
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Surface area of the unit sphere S^{d-1} in R^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    d as f64 * unit_ball_volume(d)
}

impl BaseDomain {
    pub fn interval(length: f64) -> Result<BaseDomain> {
        if !(length > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "interval length must be positive, got {length}"
            )));
        }
        Ok(BaseDomain::Interval { length })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<BaseDomain> {
        if dim < 2 {
            return Err(Error::InvalidGeometry(format!(
                "ball dimension must be >= 2, got {dim}"
            )));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(BaseDomain::Ball { dim, radius })
    }

    /// |Omega|.
    pub fn volume(&self) -> f64 {
        match *self {
            BaseDomain::Interval { length } => length,
            BaseDomain::Ball { dim, radius } => unit_ball_volume(dim) * radius.powi(dim as i32),
        }
    }

    /// |dOmega|: counting measure (2) for the interval, sphere area for balls.
    pub fn boundary_area(&self) -> f64 {
        match *self {
            BaseDomain::Interval { .. } => 2.0,
            BaseDomain::Ball { dim, radius } => {
                unit_sphere_area(dim) * radius.powi(dim as i32 - 1)
            }
        }
    }

    /// Range of the 1D coordinate: L for intervals, R for balls.
    pub fn extent(&self) -> f64 {
        match *self {
            BaseDomain::Interval { length } => length,
            BaseDomain::Ball { radius, .. } => radius,
        }
    }

    /// Distance from the "deep interior" point to the boundary.
    pub fn inradius(&self) -> f64 {
        match *self {
            BaseDomain::Interval { length } => 0.5 * length,
            BaseDomain::Ball { radius, .. } => radius,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            BaseDomain::Interval { .. } => 1,
            BaseDomain::Ball { dim, .. } => dim,
        }
    }

    /// Distance of coordinate `x` to the boundary.
    pub fn boundary_distance(&self, x: f64) -> f64 {
        match *self {
            BaseDomain::Interval { length } => x.min(length - x),
            BaseDomain::Ball { radius, .. } => radius - x,
        }
    }

    /// Jacobian of the volume measure in the 1D coordinate:
    /// dV = jacobian(x) dx.
    pub fn measure_jacobian(&self, x: f64) -> f64 {
        match *self {
            BaseDomain::Interval { .. } => 1.0,
            BaseDomain::Ball { dim, .. } => unit_sphere_area(dim) * x.powi(dim as i32 - 1),
        }
    }
}

/// Tag describing how a warping function was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Constant,
    Ramp,
    CollarBump,
    Custom,
}

#[derive(Debug, Clone)]
enum Shape {
    Constant(f64),
    /// Piecewise-linear samples on a strictly increasing grid.
    Samples { grid: Vec<f64>, values: Vec<f64> },
}

/// Positive warping function h on the base's 1D coordinate.
///
/// Stored as piecewise-linear samples (or an exact constant); evaluation is
/// exact for both, so file-loaded and preset functions share one code path.
#[derive(Debug, Clone)]
pub struct WarpingFunction {
    shape: Shape,
    preset: Preset,
}

impl WarpingFunction {
    /// h = c everywhere.
    pub fn constant(c: f64) -> Result<WarpingFunction> {
        if !(c > 0.0) {
            return Err(Error::NonPositiveWarping { coord: 0.0, value: c });
        }
        Ok(WarpingFunction {
            shape: Shape::Constant(c),
            preset: Preset::Constant,
        })
    }

    /// Piecewise-linear interpolant of `(grid, values)`.
    pub fn from_samples(grid: Vec<f64>, values: Vec<f64>) -> Result<WarpingFunction> {
        Self::from_samples_tagged(grid, values, Preset::Custom)
    }

    pub(crate) fn from_samples_tagged(
        grid: Vec<f64>,
        values: Vec<f64>,
        preset: Preset,
    ) -> Result<WarpingFunction> {
        if grid.len() != values.len() {
            return Err(Error::InvalidWarping(format!(
                "{} coordinates vs {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidWarping("need at least two samples".into()));
        }
        if !grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidWarping(
                "coordinates must be strictly increasing".into(),
            ));
        }
        for (&t, &v) in grid.iter().zip(values.iter()) {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveWarping { coord: t, value: v });
            }
        }
        Ok(WarpingFunction {
            shape: Shape::Samples { grid, values },
            preset,
        })
    }

    /// Linear ramp from `v0` at coordinate 0 to `v1` at `extent`.
    pub fn ramp(extent: f64, v0: f64, v1: f64) -> Result<WarpingFunction> {
        Self::from_samples_tagged(vec![0.0, extent], vec![v0, v1], Preset::Ramp)
    }

    /// Parse the two-column numeric text format (coordinate, value); `#`
    /// starts a comment line.
    pub fn from_table_str(text: &str) -> Result<WarpingFunction> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = (it.next(), it.next());
            if it.next().is_some() {
                return Err(Error::InvalidWarping(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            }
            match (a, b) {
                (Some(a), Some(b)) => {
                    let t: f64 = a.parse().map_err(|_| {
                        Error::InvalidWarping(format!("line {}: bad coordinate {a:?}", lineno + 1))
                    })?;
                    let v: f64 = b.parse().map_err(|_| {
                        Error::InvalidWarping(format!("line {}: bad value {b:?}", lineno + 1))
                    })?;
                    grid.push(t);
                    values.push(v);
                }
                _ => {
                    return Err(Error::InvalidWarping(format!(
                        "line {}: expected two columns",
                        lineno + 1
                    )))
                }
            }
        }
        Self::from_samples(grid, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<WarpingFunction> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(&text)
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    /// Evaluate h by piecewise-linear interpolation (exact for constants).
    pub fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Samples { grid, values } => {
                let n = grid.len();
                if t <= grid[0] {
                    return values[0];
                }
                if t >= grid[n - 1] {
                    return values[n - 1];
                }
                let idx = match grid.binary_search_by(|x| x.total_cmp(&t)) {
                    Ok(i) => return values[i],
                    Err(i) => i - 1,
                };
                let (t0, t1) = (grid[idx], grid[idx + 1]);
                let (v0, v1) = (values[idx], values[idx + 1]);
                v0 + (t - t0) * (v1 - v0) / (t1 - t0)
            }
        }
    }

    /// Kink locations of the piecewise-linear shape (empty for constants).
    pub fn breakpoints(&self) -> &[f64] {
        match &self.shape {
            Shape::Constant(_) => &[],
            Shape::Samples { grid, .. } => grid,
        }
    }

    pub fn min_value(&self) -> f64 {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Samples { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_value(&self) -> f64 {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Samples { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match &self.shape {
            Shape::Constant(_) => true,
            Shape::Samples { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    /// Check the sample grid spans the base's coordinate range.
    pub fn validate_for(&self, base: &BaseDomain) -> Result<()> {
        if let Shape::Samples { grid, .. } = &self.shape {
            let lo = grid[0];
            let hi = *grid.last().unwrap();
            let ext = base.extent();
            let tol = 1e-9 * ext;
            if lo > tol || hi < ext - tol {
                return Err(Error::InvalidWarping(format!(
                    "samples span [{lo}, {hi}] but the base coordinate is [0, {ext}]"
                )));
            }
        }
        Ok(())
    }

    /// Boundary trace(s): `(h(0), h(L))` for intervals, `(h(R), h(R))` for balls.
    pub fn boundary_trace(&self, base: &BaseDomain) -> (f64, f64) {
        match base {
            BaseDomain::Interval { length } => (self.eval(0.0), self.eval(*length)),
            BaseDomain::Ball { radius, .. } => {
                let v = self.eval(*radius);
                (v, v)
            }
        }
    }

    /// True if h = 1 on the boundary (within `tol`).
    pub fn has_unit_trace(&self, base: &BaseDomain, tol: f64) -> bool {
        let (a, b) = self.boundary_trace(base);
        (a - 1.0).abs() <= tol && (b - 1.0).abs() <= tol
    }
}

/// Integrate `f(x) dV` over the coordinate range `[a, b]` of the base,
/// including the sphere-area Jacobian for balls. `breakpoints` are kinks of
/// the integrand; `min_pieces` and `gauss_n` control the rule.
pub fn volume_integral_on(
    base: &BaseDomain,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    min_pieces: usize,
    gauss_n: usize,
    f: impl Fn(f64) -> f64,
) -> f64 {
    let partition = build_partition(a, b, breakpoints, min_pieces);
    integrate_partition(&partition, gauss_n, |x| f(x) * base.measure_jacobian(x))
}

fn gauss_nodes_for_power(base: &BaseDomain, s_abs: f64, exact: bool) -> usize {
    // Per-element rule exact for the polynomial orders that arise:
    // h^s is degree |s| per PL segment, the ball Jacobian adds d - 1.
    let extra = (base.dim() - 1) as f64;
    let n = (((s_abs + extra) + 3.0) / 2.0).ceil() as usize;
    if exact {
        n.max(4)
    } else {
        n.max(8)
    }
}

/// `\int_Omega h^s dV` for integer s.
pub fn weighted_volume_integral(base: &BaseDomain, h: &WarpingFunction, s: i32) -> Result<f64> {
    h.validate_for(base)?;
    if s < 0 {
        let min_h = h.min_value();
        if !(min_h > 0.0) || !min_h.powi(s).is_finite() {
            return Err(Error::UnderflowRisk { min_h, s });
        }
    }
    let polynomial = s >= 0;
    let gn = gauss_nodes_for_power(base, s.unsigned_abs() as f64, polynomial);
    let min_pieces = if polynomial { 16 } else { 64 };
    Ok(volume_integral_on(
        base,
        0.0,
        base.extent(),
        h.breakpoints(),
        min_pieces,
        gn,
        |x| h.eval(x).powi(s),
    ))
}

/// `\int_{dOmega} h^s dA`: endpoint sum for intervals, sphere value for balls.
pub fn weighted_boundary_integral(base: &BaseDomain, h: &WarpingFunction, s: i32) -> f64 {
    match base {
        BaseDomain::Interval { length } => h.eval(0.0).powi(s) + h.eval(*length).powi(s),
        BaseDomain::Ball { radius, .. } => {
            h.eval(*radius).powi(s) * base.boundary_area()
        }
    }
}

/// `\|h\|_{L^p(Omega)}` for real p >= 1.
pub fn lp_norm(base: &BaseDomain, h: &WarpingFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent { p });
    }
    h.validate_for(base)?;
    let is_int = p.fract() == 0.0 && p <= 64.0;
    let gn = gauss_nodes_for_power(base, p, is_int);
    let min_pieces = if is_int { 16 } else { 64 };
    let integral = volume_integral_on(
        base,
        0.0,
        base.extent(),
        h.breakpoints(),
        min_pieces,
        gn,
        |x| h.eval(x).powf(p),
    );
    Ok(integral.powf(1.0 / p))
}

/// Laplace eigenvalue source for the closed fiber.
#[derive(Debug, Clone, PartialEq)]
pub enum FiberKind {
    /// Circle of radius rho: lambda = (m / rho)^2, multiplicity 2 for m >= 1.
    Circle { radius: f64 },
    /// Unit round sphere S^n: lambda = l (l + n - 1) with the usual
    /// spherical-harmonic multiplicities.
    Sphere { dim: usize },
    /// Flat rectangular torus with side lengths `lengths`:
    /// lambda = sum_i (2 pi k_i / L_i)^2, k integer.
    Torus { lengths: Vec<f64> },
    /// Explicit `(lambda, multiplicity)` list; must start at (0, 1) and be
    /// strictly increasing in lambda.
    Explicit { dim: usize, eigenvalues: Vec<(f64, usize)> },
}

/// Closed fiber, known through its dimension and Laplace spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpectrum {
    kind: FiberKind,
}

/// Dimension of degree-l spherical harmonics on S^n.
pub fn sphere_harmonic_multiplicity(n: usize, l: usize) -> usize {
    fn binom(a: usize, b: usize) -> usize {
        if b > a {
            return 0;
        }
        let mut r = 1usize;
        for i in 0..b.min(a - b) {
            r = r * (a - i) / (i + 1);
        }
        r
    }
    match l {
        0 => 1,
        1 => n + 1,
        _ => binom(n + l, l) - binom(n + l - 2, l - 2),
    }
}

impl FiberSpectrum {
    pub fn new(kind: FiberKind) -> Result<FiberSpectrum> {
        match &kind {
            FiberKind::Circle { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::UnknownFiber(format!(
                        "circle radius must be positive, got {radius}"
                    )));
                }
            }
            FiberKind::Sphere { dim } => {
                if *dim < 1 {
                    return Err(Error::UnknownFiber("sphere dimension must be >= 1".into()));
                }
            }
            FiberKind::Torus { lengths } => {
                if lengths.is_empty() || lengths.iter().any(|l| !(*l > 0.0)) {
                    return Err(Error::UnknownFiber(
                        "torus lengths must be a nonempty positive list".into(),
                    ));
                }
            }
            FiberKind::Explicit { dim, eigenvalues } => {
                if *dim < 1 {
                    return Err(Error::UnknownFiber("fiber dimension must be >= 1".into()));
                }
                if eigenvalues.is_empty() || eigenvalues[0] != (0.0, 1) {
                    return Err(Error::UnknownFiber(
                        "explicit spectrum must start with (0, 1): the fiber is connected".into(),
                    ));
                }
                if !eigenvalues.windows(2).all(|w| w[1].0 > w[0].0) {
                    return Err(Error::UnknownFiber(
                        "explicit eigenvalues must be strictly increasing".into(),
                    ));
                }
                if eigenvalues.iter().any(|&(l, m)| l < 0.0 || m == 0) {
                    return Err(Error::UnknownFiber(
                        "explicit eigenvalues must be >= 0 with positive multiplicity".into(),
                    ));
                }
            }
        }
        Ok(FiberSpectrum { kind })
    }

    pub fn circle(radius: f64) -> Result<FiberSpectrum> {
        Self::new(FiberKind::Circle { radius })
    }

    pub fn sphere(dim: usize) -> Result<FiberSpectrum> {
        Self::new(FiberKind::Sphere { dim })
    }

    pub fn kind(&self) -> &FiberKind {
        &self.kind
    }

    /// Fiber dimension n.
    pub fn dim(&self) -> usize {
        match &self.kind {
            FiberKind::Circle { .. } => 1,
            FiberKind::Sphere { dim } => *dim,
            FiberKind::Torus { lengths } => lengths.len(),
            FiberKind::Explicit { dim, .. } => *dim,
        }
    }

    /// First `count` distinct eigenvalues as `(lambda, multiplicity)`,
    /// sorted ascending starting at (0, 1).
    pub fn eigenvalues(&self, count: usize) -> Result<Vec<(f64, usize)>> {
        let out = match &self.kind {
            FiberKind::Circle { radius } => (0..count)
                .map(|m| {
                    let lam = (m as f64 / radius).powi(2);
                    (lam, if m == 0 { 1 } else { 2 })
                })
                .collect(),
            FiberKind::Sphere { dim } => (0..count)
                .map(|l| {
                    let lam = (l * (l + dim - 1)) as f64;
                    (lam, sphere_harmonic_multiplicity(*dim, l))
                })
                .collect(),
            FiberKind::Torus { lengths } => torus_eigenvalues(lengths, count),
            FiberKind::Explicit { eigenvalues, .. } => {
                if count > eigenvalues.len() {
                    return Err(Error::UnknownFiber(format!(
                        "explicit spectrum has only {} eigenvalues, {} requested",
                        eigenvalues.len(),
                        count
                    )));
                }
                eigenvalues[..count].to_vec()
            }
        };
        Ok(out)
    }

    /// k-th eigenvalue counted with multiplicity (lambda_0 = 0).
    pub fn eigenvalue_counted(&self, k: usize) -> Result<f64> {
        let mut distinct = 1usize;
        loop {
            let eigs = self.eigenvalues(distinct)?;
            let total: usize = eigs.iter().map(|&(_, m)| m).sum();
            if total > k {
                let mut seen = 0usize;
                for (lam, m) in eigs {
                    seen += m;
                    if seen > k {
                        return Ok(lam);
                    }
                }
                unreachable!();
            }
            distinct += 1;
            if distinct > 4 * (k + 2) {
                return Err(Error::UnknownFiber(format!(
                    "could not reach eigenvalue index {k}"
                )));
            }
        }
    }
}

fn torus_eigenvalues(lengths: &[f64], count: usize) -> Vec<(f64, usize)> {
    use std::collections::BTreeMap;
    let n = lengths.len();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut bound = 1usize;
    loop {
        // All lattice values with |k_i| <= bound; complete below the cutoff.
        let cutoff = lengths
            .iter()
            .map(|l| (two_pi * (bound as f64 + 1.0) / l).powi(2))
            .fold(f64::INFINITY, f64::min);
        let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
        let mut k = vec![-(bound as i64); n];
        'outer: loop {
            let lam: f64 = k
                .iter()
                .zip(lengths)
                .map(|(&ki, li)| (two_pi * ki as f64 / li).powi(2))
                .sum();
            if lam < cutoff {
                // group values that agree to relative 1e-9
                let key = (lam / (1e-9 * (1.0 + lam))).round() as u64;
                let e = counts.entry(key).or_insert((lam, 0));
                e.1 += 1;
            }
            for i in 0..n {
                if k[i] < bound as i64 {
                    k[i] += 1;
                    continue 'outer;
                }
                k[i] = -(bound as i64);
            }
            break;
        }
        let mut eigs: Vec<(f64, usize)> = counts.values().copied().collect();
        eigs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if eigs.len() >= count {
            eigs.truncate(count);
            return eigs;
        }
        bound += 1;
    }
}

/// Laplace eigenvalues of the boundary of the base, as `(mu, multiplicity)`.
///
/// For balls these are the radial-mode parameters: mu_m = m (m + d - 2) / R^2
/// on S^{d-1}(R). The interval's boundary is two points: one trivial mode
/// whose multiplicity 2 counts the boundary degrees of freedom.
pub fn boundary_harmonics(base: &BaseDomain, count: usize) -> Vec<(f64, usize)> {
    match *base {
        BaseDomain::Interval { .. } => vec![(0.0, 2)],
        BaseDomain::Ball { dim, radius } => (0..count)
            .map(|m| {
                let mu = (m * (m + dim - 2)) as f64 / (radius * radius);
                (mu, sphere_harmonic_multiplicity(dim - 1, m))
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn volumes_match_closed_forms() {
        assert_eq!(BaseDomain::interval(1.0).unwrap().volume(), 1.0);
        let disk = BaseDomain::ball(2, 1.0).unwrap();
        assert!(rel_close(disk.volume(), PI, 1e-15));
        let ball3 = BaseDomain::ball(3, 2.0).unwrap();
        assert!(rel_close(ball3.volume(), 4.0 / 3.0 * PI * 8.0, 1e-15));
    }

    #[test]
    fn boundary_areas_match_closed_forms() {
        assert_eq!(BaseDomain::interval(5.0).unwrap().boundary_area(), 2.0);
        assert!(rel_close(
            BaseDomain::ball(2, 1.0).unwrap().boundary_area(),
            2.0 * PI,
            1e-15
        ));
        assert!(rel_close(
            BaseDomain::ball(3, 1.0).unwrap().boundary_area(),
            4.0 * PI,
            1e-15
        ));
    }

    #[test]
    fn weighted_integral_constant_is_exact() {
        let base = BaseDomain::interval(1.0).unwrap();
        let one = WarpingFunction::constant(1.0).unwrap();
        assert!((weighted_volume_integral(&base, &one, 3).unwrap() - 1.0).abs() < 1e-15);
        let c = WarpingFunction::constant(2.5).unwrap();
        for s in [-2i32, 0, 1, 4] {
            let got = weighted_volume_integral(&base, &c, s).unwrap();
            assert!(
                rel_close(got, 2.5f64.powi(s), 1e-12),
                "s={s}: {got}"
            );
        }
        let disk = BaseDomain::ball(2, 1.0).unwrap();
        let got = weighted_volume_integral(&disk, &c, 2).unwrap();
        assert!(rel_close(got, 2.5f64.powi(2) * PI, 1e-12));
    }

    #[test]
    fn weighted_integral_ramp_matches_antiderivative() {
        // h(t) = 1 + t on [0, 1]: integral of h is 3/2.
        let base = BaseDomain::interval(1.0).unwrap();
        let h = WarpingFunction::ramp(1.0, 1.0, 2.0).unwrap();
        let got = weighted_volume_integral(&base, &h, 1).unwrap();
        assert!((got - 1.5).abs() < 1e-14);
        // and h^2 integrates to ((1+t)^3/3) from 0 to 1 = 7/3
        let got2 = weighted_volume_integral(&base, &h, 2).unwrap();
        assert!((got2 - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn negative_power_underflow_rejected() {
        let base = BaseDomain::interval(1.0).unwrap();
        let h = WarpingFunction::from_samples(vec![0.0, 1.0], vec![1e-200, 1.0]).unwrap();
        assert!(matches!(
            weighted_volume_integral(&base, &h, -3),
            Err(Error::UnderflowRisk { .. })
        ));
    }

    #[test]
    fn lp_norm_closed_forms() {
        let base = BaseDomain::interval(2.0).unwrap();
        let c = WarpingFunction::constant(3.0).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let got = lp_norm(&base, &c, p).unwrap();
            assert!(rel_close(got, 3.0 * 2.0f64.powf(1.0 / p), 1e-12));
        }
        let one = WarpingFunction::constant(1.0).unwrap();
        let b1 = BaseDomain::interval(1.0).unwrap();
        assert!((lp_norm(&b1, &one, 2.0).unwrap() - 1.0).abs() < 1e-13);
        // ||2||_{L^2(disk)} = 2 sqrt(pi)
        let disk = BaseDomain::ball(2, 1.0).unwrap();
        let two = WarpingFunction::constant(2.0).unwrap();
        assert!(rel_close(lp_norm(&disk, &two, 2.0).unwrap(), 2.0 * PI.sqrt(), 1e-12));
        assert!(matches!(
            lp_norm(&b1, &one, 0.5),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn quadrature_halving_contracts_like_grid_squared() {
        // Sample a smooth profile ever more finely; successive integral
        // changes should shrink by about 4 per halving.
        let base = BaseDomain::interval(1.0).unwrap();
        let f = |t: f64| 1.0 + t * t * (1.0 - t) + 0.2 * (3.0 * t).sin();
        let sample = |m: usize| {
            let grid: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
            WarpingFunction::from_samples(grid, values).unwrap()
        };
        let ints: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&m| weighted_volume_integral(&base, &sample(m), 3).unwrap())
            .collect();
        let c1 = (ints[0] - ints[1]).abs();
        let c2 = (ints[1] - ints[2]).abs();
        let c3 = (ints[2] - ints[3]).abs();
        assert!(c1 <= 4.5 * c2, "c1={c1} c2={c2}");
        assert!(c2 <= 4.5 * c3, "c2={c2} c3={c3}");
    }

    #[test]
    fn circle_and_sphere_eigenvalues() {
        let s1 = FiberSpectrum::circle(1.0).unwrap();
        assert_eq!(
            s1.eigenvalues(3).unwrap(),
            vec![(0.0, 1), (1.0, 2), (4.0, 2)]
        );
        let s2 = FiberSpectrum::sphere(2).unwrap();
        assert_eq!(s2.eigenvalues(2).unwrap(), vec![(0.0, 1), (2.0, 3)]);
        let s3 = FiberSpectrum::sphere(3).unwrap();
        assert_eq!(
            s3.eigenvalues(3).unwrap(),
            vec![(0.0, 1), (3.0, 4), (8.0, 9)]
        );
        // lambda counted with multiplicity on S^2: 0, 2, 2, 2, 6, ...
        assert_eq!(s2.eigenvalue_counted(0).unwrap(), 0.0);
        assert_eq!(s2.eigenvalue_counted(1).unwrap(), 2.0);
        assert_eq!(s2.eigenvalue_counted(3).unwrap(), 2.0);
        assert_eq!(s2.eigenvalue_counted(4).unwrap(), 6.0);
    }

    #[test]
    fn explicit_fiber_passthrough_and_validation() {
        let f = FiberSpectrum::new(FiberKind::Explicit {
            dim: 3,
            eigenvalues: vec![(0.0, 1), (5.0, 4)],
        })
        .unwrap();
        assert_eq!(f.eigenvalues(2).unwrap(), vec![(0.0, 1), (5.0, 4)]);
        assert!(FiberSpectrum::new(FiberKind::Explicit {
            dim: 3,
            eigenvalues: vec![(1.0, 1)],
        })
        .is_err());
    }

    #[test]
    fn torus_square_eigenvalues() {
        // T^2 with L1 = L2 = 2 pi: lambda = j^2 + k^2 -> 0(x1), 1(x4), 2(x4), 4(x4), 5(x8)
        let t = FiberSpectrum::new(FiberKind::Torus {
            lengths: vec![2.0 * PI, 2.0 * PI],
        })
        .unwrap();
        let eigs = t.eigenvalues(5).unwrap();
        let expect = [(0.0, 1), (1.0, 4), (2.0, 4), (4.0, 4), (5.0, 8)];
        for ((lam, mult), (el, em)) in eigs.iter().zip(expect.iter()) {
            assert!(rel_close(*lam, *el, 1e-12));
            assert_eq!(mult, em);
        }
    }

    #[test]
    fn boundary_harmonics_match_spheres() {
        let disk = BaseDomain::ball(2, 1.0).unwrap();
        assert_eq!(
            boundary_harmonics(&disk, 3),
            vec![(0.0, 1), (1.0, 2), (4.0, 2)]
        );
        let b3 = BaseDomain::ball(3, 1.0).unwrap();
        assert_eq!(boundary_harmonics(&b3, 2), vec![(0.0, 1), (2.0, 3)]);
        let iv = BaseDomain::interval(2.0).unwrap();
        assert_eq!(boundary_harmonics(&iv, 5), vec![(0.0, 2)]);
    }

    #[test]
    fn warping_table_roundtrip() {
        let text = "# coordinate value\n0.0 1.0\n0.5 2.0\n1.0 1.0\n";
        let h = WarpingFunction::from_table_str(text).unwrap();
        assert_eq!(h.eval(0.25), 1.5);
        assert_eq!(h.eval(0.5), 2.0);
        assert!(WarpingFunction::from_table_str("0 1\n0 2\n").is_err());
        assert!(WarpingFunction::from_table_str("0 1\n1 -2\n").is_err());
    }

    #[test]
    fn constant_eval_is_bitwise_exact() {
        let h = WarpingFunction::from_samples(vec![0.0, 0.3, 1.0], vec![2.5, 2.5, 2.5]).unwrap();
        for t in [0.0, 0.1, 0.3, 0.77, 1.0] {
            assert_eq!(h.eval(t), 2.5);
        }
        assert!(h.is_constant());
    }
}
