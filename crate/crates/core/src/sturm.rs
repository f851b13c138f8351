//! The auxiliary Steklov problem on the base, one (lambda, boundary mode) at
//! a time.
//!
//! On an interval the eigenvalue problem is genuinely 1D and has exactly two
//! eigenvalues per lambda. On a ball with radial warping, each boundary
//! spherical harmonic decouples into a radial problem with a single
//! eigenvalue. Both reduce, after P1 discretization, to a tiny boundary
//! pencil obtained by eliminating interior degrees of freedom with a
//! tridiagonal LDL^T Schur complement.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{boundary_harmonics, unit_sphere_area, BaseDomain, WarpingFunction};
use crate::linalg::{sym2x2_generalized, SymTridiag};
use crate::quad::{gauss_legendre, Mesh};

/// One auxiliary problem instance.
#[derive(Debug, Clone)]
pub struct AuxProblem<'a> {
    pub base: &'a BaseDomain,
    pub h: &'a WarpingFunction,
    /// Fiber dimension n (enters through the weights h^n and h^{n-2}).
    pub fiber_dim: usize,
    /// Fiber eigenvalue lambda >= 0.
    pub lambda: f64,
    /// Boundary-harmonic eigenvalue mu >= 0 (balls only; 0 on intervals).
    pub mu: f64,
    pub mesh: Mesh,
}

impl<'a> AuxProblem<'a> {
    pub fn new(
        base: &'a BaseDomain,
        h: &'a WarpingFunction,
        fiber_dim: usize,
        lambda: f64,
        mu: f64,
        mesh: Mesh,
    ) -> Result<Self> {
        if lambda < 0.0 || mu < 0.0 {
            return Err(Error::HypothesisViolated(format!(
                "lambda and mu must be nonnegative, got ({lambda}, {mu})"
            )));
        }
        if matches!(base, BaseDomain::Interval { .. }) && mu != 0.0 {
            return Err(Error::HypothesisViolated(
                "interval bases carry no boundary harmonics (mu must be 0)".into(),
            ));
        }
        if fiber_dim < 1 {
            return Err(Error::HypothesisViolated("fiber dimension must be >= 1".into()));
        }
        h.validate_for(base)?;
        Ok(AuxProblem {
            base,
            h,
            fiber_dim,
            lambda,
            mu,
            mesh,
        })
    }
}

/// Assembled P1 forms of one auxiliary problem.
///
/// `energy` is the tridiagonal form
/// `\int (a' b' h^n + [mu-term + lambda h^{n-2}] a b) dV` over the free
/// degrees of freedom; `boundary_weights` carries the h^n boundary density at
/// the boundary DOFs (diagonal boundary form).
#[derive(Debug, Clone)]
pub struct DiscreteForms {
    pub energy: SymTridiag,
    pub boundary_dofs: Vec<usize>,
    pub boundary_weights: Vec<f64>,
    /// Total mesh nodes (the energy matrix excludes a constrained origin).
    pub n_nodes: usize,
    /// Ball modes with mu > 0 pin the value at r = 0 to zero.
    pub constrained_origin: bool,
    pub lambda: f64,
    pub mu: f64,
    pub mesh_n: usize,
}

impl DiscreteForms {
    /// Diagnostic dump of the energy tridiagonal, one row per DOF:
    /// subdiagonal, diagonal, superdiagonal (zeros at the ends).
    pub fn dump_tridiagonal(&self, mut w: impl Write) -> std::io::Result<()> {
        let n = self.energy.len();
        for i in 0..n {
            let sub = if i > 0 { self.energy.off[i - 1] } else { 0.0 };
            let sup = if i + 1 < n { self.energy.off[i] } else { 0.0 };
            writeln!(w, "{:.12e} {:.12e} {:.12e}", sub, self.energy.diag[i], sup)?;
        }
        Ok(())
    }
}

/// Assemble the P1 forms for `problem`.
pub fn assemble(problem: &AuxProblem) -> Result<DiscreteForms> {
    let base = problem.base;
    let h = problem.h;
    let n = problem.fiber_dim as i32;
    let lambda = problem.lambda;
    let nodes = problem.mesh.nodes();
    let n_nodes = nodes.len();
    let d = base.dim();

    let constrained_origin = matches!(base, BaseDomain::Ball { .. }) && problem.mu > 0.0;
    let offset = usize::from(constrained_origin);
    let n_dofs = n_nodes - offset;
    if n_dofs < 2 {
        return Err(Error::InvalidMesh("too few degrees of freedom".into()));
    }

    // Unit-sphere angular eigenvalue: mu is given on S^{d-1}(R).
    let (sphere_const, kappa) = match *base {
        BaseDomain::Interval { .. } => (1.0, 0.0),
        BaseDomain::Ball { dim, radius } => {
            (unit_sphere_area(dim), problem.mu * radius * radius)
        }
    };

    let gauss_n = 4usize.max((problem.fiber_dim + d + 4).div_ceil(2));
    let (gx, gw) = gauss_legendre(gauss_n);

    let mut energy = SymTridiag::zeros(n_dofs);
    for e in 0..n_nodes - 1 {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let len = x1 - x0;
        let mid = 0.5 * (x0 + x1);
        let half = 0.5 * len;
        let grad = 1.0 / len;
        let mut loc = [[0.0f64; 2]; 2];
        for (xi, wq) in gx.iter().zip(gw.iter()) {
            let x = mid + half * xi;
            let w = half * wq;
            let hv = h.eval(x);
            if !(hv > 0.0) {
                return Err(Error::NonPositiveWarping { coord: x, value: hv });
            }
            let hn = hv.powi(n);
            let hn2 = hv.powi(n - 2);
            let jac = match *base {
                BaseDomain::Interval { .. } => 1.0,
                BaseDomain::Ball { dim, .. } => sphere_const * x.powi(dim as i32 - 1),
            };
            let phi = [(x1 - x) * grad, (x - x0) * grad];
            let dphi = [-grad, grad];
            let angular = if kappa > 0.0 { kappa / (x * x) * hn } else { 0.0 };
            for i in 0..2 {
                for j in i..2 {
                    let stiff = dphi[i] * dphi[j] * hn;
                    let mass = (lambda * hn2 + angular) * phi[i] * phi[j];
                    loc[i][j] += (stiff + mass) * jac * w;
                }
            }
        }
        // Scatter, skipping a constrained origin node.
        for i in 0..2 {
            let gi = e + i;
            if gi < offset {
                continue;
            }
            let di = gi - offset;
            for j in i..2 {
                let gj = e + j;
                if gj < offset {
                    continue;
                }
                let dj = gj - offset;
                if di == dj {
                    energy.diag[di] += loc[i][j];
                } else {
                    energy.off[di.min(dj)] += loc[i][j];
                }
            }
        }
    }

    let (boundary_dofs, boundary_weights) = match *base {
        BaseDomain::Interval { length } => {
            // Counting measure on the two endpoints, weight h^n each.
            let b0 = h.eval(0.0).powi(n);
            let b1 = h.eval(length).powi(n);
            (vec![0, n_dofs - 1], vec![b0, b1])
        }
        BaseDomain::Ball { dim, radius } => {
            let b = sphere_const * radius.powi(dim as i32 - 1) * h.eval(radius).powi(n);
            (vec![n_dofs - 1], vec![b])
        }
    };
    if boundary_weights.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::SingularBoundaryForm);
    }

    Ok(DiscreteForms {
        energy,
        boundary_dofs,
        boundary_weights,
        n_nodes,
        constrained_origin,
        lambda,
        mu: problem.mu,
        mesh_n: problem.mesh.n_elements(),
    })
}

/// Schur-complement reduction: eliminate interior DOFs and return the small
/// boundary pencil `(S, B_bb)`.
fn boundary_pencil(forms: &DiscreteForms) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let a = &forms.energy;
    let nd = a.len();
    let nb = forms.boundary_dofs.len();
    let (ilo, ihi) = if nb == 2 { (1, nd - 1) } else { (0, nd - 1) };

    if ihi == ilo {
        // No interior DOFs: the boundary pencil is the energy matrix itself.
        let mut s = vec![vec![0.0; nb]; nb];
        for (r, &bi) in forms.boundary_dofs.iter().enumerate() {
            s[r][r] = a.diag[bi];
        }
        if nb == 2 && nd == 2 {
            s[0][1] = a.off[0];
            s[1][0] = a.off[0];
        }
        return Ok((s, forms.boundary_weights.clone()));
    }

    let interior = a.slice(ilo, ihi);
    let fact = interior.ldlt().map_err(|p| Error::IndefiniteInterior {
        lambda: forms.lambda,
        mu: forms.mu,
        mesh_n: forms.mesh_n,
        pivot: p.pivot,
        index: p.index,
    })?;
    let m = interior.len();

    if nb == 1 {
        // Ball: boundary DOF is the last one, coupled through off[nd-2].
        let c = a.off[nd - 2];
        let mut rhs = vec![0.0; m];
        rhs[m - 1] = 1.0;
        let x = fact.solve(&rhs);
        let s = a.diag[nd - 1] - c * c * x[m - 1];
        Ok((vec![vec![s]], forms.boundary_weights.clone()))
    } else {
        // Interval: boundary DOFs 0 and nd-1, couplings off[0] and off[nd-2].
        let c0 = a.off[0];
        let c1 = a.off[nd - 2];
        let mut e_first = vec![0.0; m];
        e_first[0] = 1.0;
        let x = fact.solve(&e_first);
        let mut e_last = vec![0.0; m];
        e_last[m - 1] = 1.0;
        let y = fact.solve(&e_last);
        let s00 = a.diag[0] - c0 * c0 * x[0];
        let s11 = a.diag[nd - 1] - c1 * c1 * y[m - 1];
        let s01 = -c0 * c1 * x[m - 1];
        Ok((vec![vec![s00, s01], vec![s01, s11]], forms.boundary_weights.clone()))
    }
}

/// Eigenvalues of the boundary pencil, sorted ascending.
///
/// At lambda = mu = 0 the constant nullvector is deflated first and sigma = 0
/// is returned exactly.
pub fn dtn_eigenvalues(forms: &DiscreteForms) -> Result<Vec<f64>> {
    Ok(dtn_eigenpairs(forms)?.into_iter().map(|(s, _)| s).collect())
}

/// Eigenvalues with nodal eigenfunctions (values at all mesh nodes; a
/// constrained origin contributes the value 0).
pub fn dtn_eigenpairs(forms: &DiscreteForms) -> Result<Vec<(f64, Vec<f64>)>> {
    let (s, b) = boundary_pencil(forms)?;
    let flat = forms.lambda == 0.0 && forms.mu == 0.0;
    let nb = b.len();

    let pairs: Vec<(f64, [f64; 2])> = if nb == 1 {
        let sigma = if flat { 0.0 } else { s[0][0] / b[0] };
        vec![(sigma, [1.0, 0.0])]
    } else if flat {
        // Deflate the constant vector; the second eigenvector is its
        // B-orthogonal complement.
        let q = [b[1], -b[0]];
        let sq = q[0] * (s[0][0] * q[0] + s[0][1] * q[1])
            + q[1] * (s[0][1] * q[0] + s[1][1] * q[1]);
        let bq = b[0] * q[0] * q[0] + b[1] * q[1] * q[1];
        vec![(0.0, [1.0, 1.0]), (sq / bq, q)]
    } else {
        sym2x2_generalized([[s[0][0], s[0][1]], [s[0][1], s[1][1]]], b[0], b[1])
            .into_iter()
            .collect()
    };

    // Lift boundary vectors to nodal vectors by discrete harmonic extension.
    let a = &forms.energy;
    let nd = a.len();
    let (ilo, ihi) = if nb == 2 { (1, nd - 1) } else { (0, nd - 1) };
    let extend = |q: &[f64; 2]| -> Vec<f64> {
        let mut v = vec![0.0; nd];
        if nb == 1 {
            v[nd - 1] = q[0];
        } else {
            v[0] = q[0];
            v[nd - 1] = q[1];
        }
        if ihi > ilo {
            let interior = a.slice(ilo, ihi);
            if let Ok(fact) = interior.ldlt() {
                let m = ihi - ilo;
                let mut rhs = vec![0.0; m];
                if nb == 2 {
                    rhs[0] -= a.off[0] * v[0];
                }
                rhs[m - 1] -= a.off[nd - 2] * v[nd - 1];
                let x = fact.solve(&rhs);
                v[ilo..ihi].copy_from_slice(&x);
            }
        }
        // Constants extend to constants exactly.
        if nb == 2 && q[0] == q[1] && forms.lambda == 0.0 && forms.mu == 0.0 {
            v.fill(q[0]);
        }
        let mut nodal = Vec::with_capacity(forms.n_nodes);
        if forms.constrained_origin {
            nodal.push(0.0);
        }
        nodal.extend_from_slice(&v);
        nodal
    };

    Ok(pairs.into_iter().map(|(sig, q)| (sig, extend(&q))).collect())
}

/// One auxiliary eigenvalue with its mode label and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxEntry {
    pub sigma: f64,
    /// Interval: 0 or 1 by ascending eigenvalue. Ball: boundary harmonic
    /// index m.
    pub mode: usize,
    /// Number of copies this mode contributes (boundary harmonic dimension).
    pub multiplicity: usize,
}

/// Sorted auxiliary spectrum for one lambda.
#[derive(Debug, Clone)]
pub struct AuxSpectrum {
    pub lambda: f64,
    pub entries: Vec<AuxEntry>,
}

impl AuxSpectrum {
    /// Eigenvalues expanded with multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend(std::iter::repeat_n(e.sigma, e.multiplicity));
        }
        out
    }
}

/// Mesh used by the public mesh_n-based entry points: uniform with the
/// warping function's kinks inserted as extra nodes.
pub fn default_mesh(base: &BaseDomain, h: &WarpingFunction, mesh_n: usize) -> Mesh {
    Mesh::uniform_aligned(0.0, base.extent(), mesh_n, h.breakpoints())
}

/// Solve one (lambda, mu) cell on an explicit mesh.
pub fn solve_mode(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    mu: f64,
    mesh: &Mesh,
) -> Result<Vec<f64>> {
    let problem = AuxProblem::new(base, h, fiber_dim, lambda, mu, mesh.clone())?;
    dtn_eigenvalues(&assemble(&problem)?)
}

/// The smallest auxiliary eigenvalue sigma_{lambda,0} (mu = 0 mode).
pub fn aux_sigma0(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    mesh: &Mesh,
) -> Result<f64> {
    let sig = solve_mode(base, h, fiber_dim, lambda, 0.0, mesh)?;
    Ok(sig[0])
}

/// Auxiliary spectrum for one lambda, certified through the `l_max` smallest
/// values (counted with multiplicity).
pub fn aux_spectrum(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    l_max: usize,
    mesh_n: usize,
) -> Result<AuxSpectrum> {
    let mesh = default_mesh(base, h, mesh_n);
    aux_spectrum_on(base, h, fiber_dim, lambda, l_max, &mesh)
}

pub fn aux_spectrum_on(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    l_max: usize,
    mesh: &Mesh,
) -> Result<AuxSpectrum> {
    if l_max < 1 {
        return Err(Error::HypothesisViolated("l_max must be >= 1".into()));
    }
    let mut entries = Vec::new();
    match base {
        BaseDomain::Interval { .. } => {
            // Exactly two eigenvalues per lambda.
            let sig = solve_mode(base, h, fiber_dim, lambda, 0.0, mesh)?;
            entries.push(AuxEntry { sigma: sig[0], mode: 0, multiplicity: 1 });
            entries.push(AuxEntry { sigma: sig[1], mode: 1, multiplicity: 1 });
        }
        BaseDomain::Ball { .. } => {
            // sigma is strictly increasing in mu, so enumerating modes in
            // order certifies the smallest values.
            let mut total = 0usize;
            let mut m = 0usize;
            while total < l_max {
                let harmonics = boundary_harmonics(base, m + 1);
                let (mu, mult) = harmonics[m];
                let sig = solve_mode(base, h, fiber_dim, lambda, mu, mesh)?;
                entries.push(AuxEntry { sigma: sig[0], mode: m, multiplicity: mult });
                total += mult;
                m += 1;
                if m > crate::spectrum::MODE_BUDGET {
                    return Err(Error::BudgetExceeded {
                        requested: l_max,
                        j_max: crate::spectrum::FIBER_BUDGET,
                        l_max: crate::spectrum::MODE_BUDGET,
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| a.sigma.total_cmp(&b.sigma).then(a.mode.cmp(&b.mode)));
    Ok(AuxSpectrum { lambda, entries })
}

/// Rayleigh quotient of nodal values `a` on `mesh`, with the same quadrature
/// as `assemble`. For balls this evaluates radial trial functions.
pub fn rayleigh_quotient(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    mesh: &Mesh,
    a: &[f64],
) -> Result<f64> {
    if a.len() != mesh.nodes().len() {
        return Err(Error::InvalidMesh(format!(
            "trial function has {} samples for {} mesh nodes",
            a.len(),
            mesh.nodes().len()
        )));
    }
    let problem = AuxProblem::new(base, h, fiber_dim, lambda, 0.0, mesh.clone())?;
    let forms = assemble(&problem)?;
    let num = forms.energy.quadratic_form(a);
    let mut den = 0.0;
    for (&dof, &w) in forms.boundary_dofs.iter().zip(&forms.boundary_weights) {
        den += w * a[dof] * a[dof];
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if den <= 1e-28 * scale * scale {
        return Err(Error::ZeroBoundaryTrace);
    }
    Ok(num / den)
}

/// Richardson error estimate for sigma_{lambda,0}: solve on `mesh` and its
/// pairwise coarsening; the O(N^-2) model gives err ~ |diff| / 3.
pub fn sigma0_error_estimate(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber_dim: usize,
    lambda: f64,
    mesh: &Mesh,
) -> Result<f64> {
    let fine = aux_sigma0(base, h, fiber_dim, lambda, mesh)?;
    let coarse = aux_sigma0(base, h, fiber_dim, lambda, &mesh.coarsened())?;
    Ok((fine - coarse).abs() / 3.0)
}
