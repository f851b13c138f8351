//! Extremal warping families: the plateau family saturating the constant
//! comparison, the collar family blowing up sigma_1 under an L^p budget, and
//! the 1D-fiber conformal-equivalence cross-check.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    lp_norm, unit_ball_volume, BaseDomain, FiberSpectrum, Preset, WarpingFunction,
};
use crate::quad::Mesh;
use crate::report::fmt_g12;
use crate::spectrum::{steklov_spectrum, steklov_spectrum_on};

/// Plateau family member: 1 on the boundary, C past a collar of width
/// delta^2, linear ramps between.
pub fn make_hdelta(base: &BaseDomain, c: f64, delta: f64) -> Result<WarpingFunction> {
    if !(c >= 1.0) {
        return Err(Error::HypothesisViolated(format!("require C >= 1, got {c}")));
    }
    let width = delta * delta;
    if !(width > 0.0) || width >= base.inradius() {
        return Err(Error::InfeasibleFamily(format!(
            "collar width delta^2 = {width} must lie in (0, {})",
            base.inradius()
        )));
    }
    match *base {
        BaseDomain::Interval { length } => WarpingFunction::from_samples_tagged(
            vec![0.0, width, length - width, length],
            vec![1.0, c, c, 1.0],
            Preset::CollarBump,
        ),
        BaseDomain::Ball { radius, .. } => WarpingFunction::from_samples_tagged(
            vec![0.0, radius - width, radius],
            vec![c, c, 1.0],
            Preset::CollarBump,
        ),
    }
}

/// Collar family member on a ball base: peak value
/// `(budget / (2 |band|))^{1/p}` on the band at boundary distance
/// `[eps, 2 eps]` (so the band carries exactly half the p-budget), trace 1,
/// at least `floor` within distance `2 eps`, decaying to 1 inland over one
/// further collar width.
pub fn make_heps(
    base: &BaseDomain,
    p: f64,
    budget: f64,
    eps: f64,
    floor: f64,
) -> Result<WarpingFunction> {
    let BaseDomain::Ball { dim, radius } = *base else {
        return Err(Error::HypothesisViolated(
            "the collar family needs a ball base (connected boundary)".into(),
        ));
    };
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent { p });
    }
    if !(floor > 0.0) || floor > 1.0 {
        return Err(Error::InfeasibleFamily(format!(
            "floor must lie in (0, 1] (the trace is 1), got {floor}"
        )));
    }
    if !(eps > 0.0) || 3.0 * eps >= radius {
        return Err(Error::InfeasibleFamily(format!(
            "collar parameter eps = {eps} too large for radius {radius}"
        )));
    }
    let band_volume = unit_ball_volume(dim)
        * ((radius - eps).powi(dim as i32) - (radius - 2.0 * eps).powi(dim as i32));
    let peak = (budget / (2.0 * band_volume)).powf(1.0 / p);
    if peak < 1.0 {
        return Err(Error::InfeasibleFamily(format!(
            "budget {budget} gives collar value {peak} < 1"
        )));
    }

    // Exponential rise/decay sampled as piecewise-linear, kept >= 1 so the
    // floor constraint holds on [0, 2 eps].
    const RAMP_SAMPLES: usize = 32;
    let ln_peak = peak.ln();
    let mut grid = vec![0.0];
    let mut values = vec![1.0];
    let push = |grid: &mut Vec<f64>, values: &mut Vec<f64>, r: f64, v: f64| {
        if r > *grid.last().unwrap() {
            grid.push(r);
            values.push(v);
        }
    };
    // inland rise over [R - 3 eps, R - 2 eps]
    for i in 0..=RAMP_SAMPLES {
        let s = i as f64 / RAMP_SAMPLES as f64;
        let r = radius - 3.0 * eps + s * eps;
        push(&mut grid, &mut values, r, (ln_peak * s).exp());
    }
    // plateau on [R - 2 eps, R - eps]
    push(&mut grid, &mut values, radius - eps, peak);
    // decay to the unit trace over [R - eps, R]
    for i in 1..=RAMP_SAMPLES {
        let s = i as f64 / RAMP_SAMPLES as f64;
        let r = radius - eps + s * eps;
        push(&mut grid, &mut values, r, (ln_peak * (1.0 - s)).exp());
    }
    let h = WarpingFunction::from_samples_tagged(grid, values, Preset::CollarBump)?;

    let total = lp_norm(base, &h, p)?.powf(p);
    if total > budget * (1.0 + 1e-9) {
        return Err(Error::InfeasibleFamily(format!(
            "total \\int h^p = {total} exceeds the budget {budget} \
             (the inland extension needs budget >= ~2 |Omega|)"
        )));
    }
    Ok(h)
}

/// Mesh graded to resolve the collars of a plateau member.
fn hdelta_mesh(base: &BaseDomain, delta: f64, mesh_n: usize) -> Result<Mesh> {
    let width = delta * delta;
    let collar = (mesh_n / 8).max(64);
    let bulk = (mesh_n / 2).max(256);
    match *base {
        BaseDomain::Interval { length } => Mesh::graded(&[
            (0.0, width, collar),
            (width, length - width, bulk),
            (length - width, length, collar),
        ]),
        BaseDomain::Ball { radius, .. } => Mesh::graded(&[
            (0.0, radius - width, bulk),
            (radius - width, radius, collar),
        ]),
    }
}

/// Mesh graded to put at least 64 elements inside each collar band of a
/// collar member.
fn heps_mesh(base: &BaseDomain, eps: f64, mesh_n: usize) -> Result<Mesh> {
    let BaseDomain::Ball { radius, .. } = *base else {
        return Err(Error::HypothesisViolated("collar meshes need a ball base".into()));
    };
    let band = (mesh_n / 8).max(64);
    let bulk = (mesh_n / 4).max(128);
    Mesh::graded(&[
        (0.0, radius - 3.0 * eps, bulk),
        (radius - 3.0 * eps, radius - 2.0 * eps, band),
        (radius - 2.0 * eps, radius - eps, band),
        (radius - eps, radius, band),
    ])
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SaturationRow {
    pub c: f64,
    pub delta: f64,
    pub sigma_k: f64,
    /// C^n sigma_k(M_C): the saturation target for this C.
    pub cn_sigma_mc: f64,
    /// lambda_k |Omega| / |dOmega|: the n = 2 ceiling.
    pub ceiling: f64,
}

#[derive(Debug, Clone)]
pub struct SaturationTable {
    pub k: usize,
    pub rows: Vec<SaturationRow>,
    pub mesh_tol: f64,
}

impl SaturationTable {
    /// Within each C, smaller delta must not lose: sigma is nondecreasing as
    /// the plateau grows (up to the solve tolerance).
    pub fn monotone_in_delta(&self, tol: f64) -> bool {
        let mut by_c: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for r in &self.rows {
            match by_c.iter_mut().find(|(c, _)| *c == r.c) {
                Some((_, v)) => v.push((r.delta, r.sigma_k)),
                None => by_c.push((r.c, vec![(r.delta, r.sigma_k)])),
            }
        }
        by_c.iter_mut().all(|(_, v)| {
            v.sort_by(|a, b| b.0.total_cmp(&a.0)); // descending delta
            v.windows(2).all(|w| w[1].1 >= w[0].1 - tol)
        })
    }

    pub fn all_below_ceiling(&self) -> bool {
        self.rows.iter().all(|r| r.sigma_k < r.ceiling)
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "c,delta,sigma_k,cn_sigma_mc,ceiling,ratio_to_ceiling")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_g12(r.c),
                fmt_g12(r.delta),
                fmt_g12(r.sigma_k),
                fmt_g12(r.cn_sigma_mc),
                fmt_g12(r.ceiling),
                fmt_g12(r.sigma_k / r.ceiling)
            )?;
        }
        Ok(())
    }
}

/// Sweep the plateau family over (C, delta); n = 2 fibers only.
pub fn saturation_sweep(
    base: &BaseDomain,
    fiber: &FiberSpectrum,
    k: usize,
    c_list: &[f64],
    delta_list: &[f64],
    mesh_n: usize,
) -> Result<SaturationTable> {
    if fiber.dim() != 2 {
        return Err(Error::HypothesisViolated(format!(
            "the saturation sweep is stated for n = 2, got n = {}",
            fiber.dim()
        )));
    }
    let lambda_k = fiber.eigenvalue_counted(k)?;
    let ceiling = lambda_k * base.volume() / base.boundary_area();

    let targets: Vec<f64> = c_list
        .par_iter()
        .map(|&c| {
            let hc = WarpingFunction::constant(c)?;
            let spec = steklov_spectrum(base, &hc, fiber, k, mesh_n)?;
            Ok(c * c * spec.sigma_k(k)?)
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(f64, f64, f64)> = c_list
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| {
            let target = targets[i];
            delta_list.iter().map(move |&d| (c, d, target))
        })
        .collect();
    let mut mesh_tol = 0.0f64;
    let rows: Vec<SaturationRow> = cells
        .par_iter()
        .map(|&(c, delta, cn_sigma_mc)| {
            let h = make_hdelta(base, c, delta)?;
            let mesh = hdelta_mesh(base, delta, mesh_n)?;
            let spec = steklov_spectrum_on(base, &h, fiber, k, &mesh)?;
            Ok((
                SaturationRow {
                    c,
                    delta,
                    sigma_k: spec.sigma_k(k)?,
                    cn_sigma_mc,
                    ceiling,
                },
                spec.mesh_tol(),
            ))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .map(|(row, tol)| {
            mesh_tol = mesh_tol.max(tol);
            row
        })
        .collect();
    Ok(SaturationTable { k, rows, mesh_tol })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupRow {
    pub eps: f64,
    pub peak: f64,
    /// Certified \int h^p dV of the member (must stay <= budget).
    pub p_mass: f64,
    pub sigma_1: f64,
    /// lambda_1 |Omega| / |dOmega|: what an n = 2 fiber could never exceed.
    pub ceiling_n2: f64,
}

#[derive(Debug, Clone)]
pub struct BlowupTable {
    pub p: f64,
    pub budget: f64,
    pub rows: Vec<BlowupRow>,
}

impl BlowupTable {
    /// sigma_1 ratios between consecutive rows (rows ordered as swept).
    pub fn growth_factors(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| w[1].sigma_1 / w[0].sigma_1)
            .collect()
    }

    pub fn within_budget(&self) -> bool {
        self.rows.iter().all(|r| r.p_mass <= self.budget * (1.0 + 1e-9))
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "eps,peak,p_mass,budget,sigma_1,ceiling_n2,ratio_to_ceiling")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_g12(r.eps),
                fmt_g12(r.peak),
                fmt_g12(r.p_mass),
                fmt_g12(self.budget),
                fmt_g12(r.sigma_1),
                fmt_g12(r.ceiling_n2),
                fmt_g12(r.sigma_1 / r.ceiling_n2)
            )?;
        }
        Ok(())
    }
}

/// Sweep the collar family along shrinking eps; requires p < n - 2 and a
/// ball base, the regime where sigma_1 has no finite supremum.
pub fn blowup_sweep(
    base: &BaseDomain,
    fiber: &FiberSpectrum,
    p: f64,
    budget: f64,
    eps_list: &[f64],
    floor: f64,
    mesh_n: usize,
) -> Result<BlowupTable> {
    let n = fiber.dim();
    if n < 3 {
        return Err(Error::HypothesisViolated(format!(
            "the blow-up regime needs n >= 3, got n = {n}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent { p });
    }
    if p >= (n - 2) as f64 {
        return Err(Error::HypothesisViolated(format!(
            "the blow-up regime needs p < n - 2 = {}, got p = {p}",
            n - 2
        )));
    }
    if !matches!(base, BaseDomain::Ball { .. }) {
        return Err(Error::HypothesisViolated(
            "the blow-up sweep needs a ball base (connected boundary)".into(),
        ));
    }
    let lambda_1 = fiber.eigenvalue_counted(1)?;
    let ceiling_n2 = lambda_1 * base.volume() / base.boundary_area();

    let rows: Vec<BlowupRow> = eps_list
        .par_iter()
        .map(|&eps| {
            let h = make_heps(base, p, budget, eps, floor)?;
            let p_mass = lp_norm(base, &h, p)?.powf(p);
            let mesh = heps_mesh(base, eps, mesh_n)?;
            let spec = steklov_spectrum_on(base, &h, fiber, 1, &mesh)?;
            Ok(BlowupRow {
                eps,
                peak: h.max_value(),
                p_mass,
                sigma_1: spec.sigma_k(1)?,
                ceiling_n2,
            })
        })
        .collect::<Result<_>>()?;
    Ok(BlowupTable { p, budget, rows })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConformalRow {
    pub k: usize,
    pub sigma_warped: f64,
    pub sigma_straight: f64,
    pub rel_diff: f64,
}

/// Cross-check for circle fibers over an interval: the warped cylinder and
/// the straight cylinder of conformal length have the same spectrum.
#[derive(Debug, Clone)]
pub struct ConformalReport {
    /// Conformal length t(L) = \int_0^L ds / h(s).
    pub t_length: f64,
    pub rows: Vec<ConformalRow>,
    pub max_rel_diff: f64,
}

impl ConformalReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "k,sigma_warped,sigma_straight,rel_diff")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.k,
                fmt_g12(r.sigma_warped),
                fmt_g12(r.sigma_straight),
                fmt_g12(r.rel_diff)
            )?;
        }
        Ok(())
    }
}

pub fn conformal_check(
    length: f64,
    h: &WarpingFunction,
    k_count: usize,
    mesh_n: usize,
) -> Result<ConformalReport> {
    let base = BaseDomain::interval(length)?;
    require_unit_endpoints(&base, h)?;
    let fiber = FiberSpectrum::circle(1.0)?;
    let t_length = crate::geometry::weighted_volume_integral(&base, h, -1)?;

    let warped = steklov_spectrum(&base, h, &fiber, k_count, mesh_n)?;
    let straight_base = BaseDomain::interval(t_length)?;
    let one = WarpingFunction::constant(1.0)?;
    let straight = steklov_spectrum(&straight_base, &one, &fiber, k_count, mesh_n)?;

    let mut rows = Vec::with_capacity(k_count + 1);
    let mut max_rel = 0.0f64;
    for k in 0..=k_count {
        let a = warped.sigma_k(k)?;
        let b = straight.sigma_k(k)?;
        let rel = (a - b).abs() / b.abs().max(1e-30);
        if k > 0 {
            max_rel = max_rel.max(rel);
        }
        rows.push(ConformalRow {
            k,
            sigma_warped: a,
            sigma_straight: b,
            rel_diff: if k == 0 { 0.0 } else { rel },
        });
    }
    Ok(ConformalReport {
        t_length,
        rows,
        max_rel_diff: max_rel,
    })
}

fn require_unit_endpoints(base: &BaseDomain, h: &WarpingFunction) -> Result<()> {
    if !h.has_unit_trace(base, 1e-9) {
        let (a, b) = h.boundary_trace(base);
        return Err(Error::HypothesisViolated(format!(
            "conformal equivalence needs h(0) = h(L) = 1, got ({a}, {b})"
        )));
    }
    Ok(())
}
