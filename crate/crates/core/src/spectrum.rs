//! Full Steklov spectrum of the warped product, assembled from auxiliary
//! spectra: the eigenvalue multiset is `{sigma_{lambda_j, l}(h) : j, l >= 0}`
//! with fiber multiplicities attached.
//!
//! sigma is nondecreasing in both the fiber index j (through lambda_j) and
//! the mode index l, so a Young-tableau frontier merge over the (j, l) grid
//! enumerates the spectrum in order. Truncation is certified: the merge only
//! stops once every unexplored cell provably lies above the requested range.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::geometry::{boundary_harmonics, BaseDomain, FiberSpectrum, WarpingFunction};
use crate::quad::Mesh;
use crate::report::fmt_g12;
use crate::sturm;

/// Hard ceiling on fiber eigenvalue indices explored by the merge.
pub const FIBER_BUDGET: usize = 64;
/// Hard ceiling on aux mode indices explored by the merge.
pub const MODE_BUDGET: usize = 64;

/// One merged eigenvalue cell.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumEntry {
    pub sigma: f64,
    /// Index j of the distinct fiber eigenvalue lambda_j.
    pub fiber_index: usize,
    /// Aux mode index l (interval: 0 or 1; ball: boundary harmonic index).
    pub mode_index: usize,
    pub lambda: f64,
    /// fiber multiplicity of lambda_j times the boundary-mode multiplicity.
    pub multiplicity: usize,
}

/// Sorted, labelled, certified truncation of the Steklov spectrum.
#[derive(Debug, Clone)]
pub struct SteklovSpectrum {
    entries: Vec<SpectrumEntry>,
    k_max: usize,
    certified: bool,
    mesh_tol: f64,
    mesh_n: usize,
}

impl SteklovSpectrum {
    /// sigma_k counted with multiplicity; rejects uncertified access.
    pub fn sigma_k(&self, k: usize) -> Result<f64> {
        if !self.certified || k > self.k_max {
            return Err(Error::Uncertified {
                k,
                certified_k: if self.certified { self.k_max } else { 0 },
            });
        }
        let mut seen = 0usize;
        for e in &self.entries {
            seen += e.multiplicity;
            if seen > k {
                return Ok(e.sigma);
            }
        }
        unreachable!("certified spectrum covers k_max")
    }

    /// The entry supplying sigma_k.
    pub fn entry_for(&self, k: usize) -> Result<&SpectrumEntry> {
        if !self.certified || k > self.k_max {
            return Err(Error::Uncertified {
                k,
                certified_k: if self.certified { self.k_max } else { 0 },
            });
        }
        let mut seen = 0usize;
        for e in &self.entries {
            seen += e.multiplicity;
            if seen > k {
                return Ok(e);
            }
        }
        unreachable!()
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Richardson estimate of the discretization error near sigma_{k_max}.
    pub fn mesh_tol(&self) -> f64 {
        self.mesh_tol
    }

    pub fn mesh_n(&self) -> usize {
        self.mesh_n
    }

    /// First k_max + 1 eigenvalues expanded with multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k_max + 1);
        'outer: for e in &self.entries {
            for _ in 0..e.multiplicity {
                out.push(e.sigma);
                if out.len() > self.k_max {
                    break 'outer;
                }
            }
        }
        out
    }

    /// CSV export: `k,sigma,j,l,lambda_j,multiplicity`, one row per k.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "k,sigma,j,l,lambda_j,multiplicity")?;
        let mut k = 0usize;
        'outer: for e in &self.entries {
            for _ in 0..e.multiplicity {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    k,
                    fmt_g12(e.sigma),
                    e.fiber_index,
                    e.mode_index,
                    fmt_g12(e.lambda),
                    e.multiplicity
                )?;
                k += 1;
                if k > self.k_max {
                    break 'outer;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    sigma: f64,
    j: usize,
    l: usize,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_key(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl Cell {
    fn cmp_key(&self, other: &Self) -> Ordering {
        self.sigma
            .total_cmp(&other.sigma)
            .then(self.j.cmp(&other.j))
            .then(self.l.cmp(&other.l))
    }
}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // reversed: BinaryHeap is a max-heap, we want the smallest sigma on top
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other).reverse()
    }
}

struct MergeSolver<'a> {
    base: &'a BaseDomain,
    h: &'a WarpingFunction,
    fiber: &'a FiberSpectrum,
    mesh: &'a Mesh,
    fiber_eigs: Vec<(f64, usize)>,
    interval_cache: HashMap<usize, [f64; 2]>,
    ball_cache: HashMap<(usize, usize), f64>,
}

impl<'a> MergeSolver<'a> {
    fn lambda(&mut self, j: usize) -> Result<(f64, usize)> {
        while self.fiber_eigs.len() <= j {
            let want = self.fiber_eigs.len() + 4;
            self.fiber_eigs = self.fiber.eigenvalues(want)?;
        }
        Ok(self.fiber_eigs[j])
    }

    fn mode_multiplicity(&self, l: usize) -> usize {
        match self.base {
            BaseDomain::Interval { .. } => 1,
            BaseDomain::Ball { .. } => boundary_harmonics(self.base, l + 1)[l].1,
        }
    }

    fn l_limit(&self) -> usize {
        match self.base {
            BaseDomain::Interval { .. } => 1,
            BaseDomain::Ball { .. } => MODE_BUDGET,
        }
    }

    fn sigma(&mut self, j: usize, l: usize, mesh: &Mesh) -> Result<f64> {
        let (lambda, _) = self.lambda(j)?;
        match self.base {
            BaseDomain::Interval { .. } => {
                let same_mesh = std::ptr::eq(mesh, self.mesh);
                if same_mesh {
                    if let Some(v) = self.interval_cache.get(&j) {
                        return Ok(v[l]);
                    }
                }
                let n = self.fiber.dim();
                let sig = sturm::solve_mode(self.base, self.h, n, lambda, 0.0, mesh)?;
                let pair = [sig[0], sig[1]];
                if same_mesh {
                    self.interval_cache.insert(j, pair);
                }
                Ok(pair[l])
            }
            BaseDomain::Ball { .. } => {
                let same_mesh = std::ptr::eq(mesh, self.mesh);
                if same_mesh {
                    if let Some(&v) = self.ball_cache.get(&(j, l)) {
                        return Ok(v);
                    }
                }
                let mu = boundary_harmonics(self.base, l + 1)[l].0;
                let n = self.fiber.dim();
                let sig = sturm::solve_mode(self.base, self.h, n, lambda, mu, mesh)?;
                if same_mesh {
                    self.ball_cache.insert((j, l), sig[0]);
                }
                Ok(sig[0])
            }
        }
    }
}

/// Compute the first `k_max + 1` Steklov eigenvalues of the warped product.
pub fn steklov_spectrum(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber: &FiberSpectrum,
    k_max: usize,
    mesh_n: usize,
) -> Result<SteklovSpectrum> {
    let mesh = sturm::default_mesh(base, h, mesh_n);
    steklov_spectrum_on(base, h, fiber, k_max, &mesh)
}

/// Same as [`steklov_spectrum`] on an explicit mesh.
pub fn steklov_spectrum_on(
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber: &FiberSpectrum,
    k_max: usize,
    mesh: &Mesh,
) -> Result<SteklovSpectrum> {
    let mut solver = MergeSolver {
        base,
        h,
        fiber,
        mesh,
        fiber_eigs: fiber.eigenvalues(2)?,
        interval_cache: HashMap::new(),
        ball_cache: HashMap::new(),
    };
    let coarse = mesh.coarsened();
    let l_limit = solver.l_limit();

    let mut heap = BinaryHeap::new();
    let s00 = solver.sigma(0, 0, mesh)?;
    heap.push(Cell { sigma: s00, j: 0, l: 0 });

    let mut entries: Vec<SpectrumEntry> = Vec::new();
    let mut total = 0usize;
    let mut sigma_k: Option<f64> = None;
    let mut mesh_tol: Option<f64> = None;

    loop {
        let cell = heap.pop().expect("frontier never empties under the budgets");
        let (lambda, fiber_mult) = solver.lambda(cell.j)?;
        let mult = fiber_mult * solver.mode_multiplicity(cell.l);
        entries.push(SpectrumEntry {
            sigma: cell.sigma,
            fiber_index: cell.j,
            mode_index: cell.l,
            lambda,
            multiplicity: mult,
        });
        let before = total;
        total += mult;
        if before <= k_max && total > k_max {
            sigma_k = Some(cell.sigma);
            // Certification margin: discretization error must not reorder
            // the merge, so re-solve the defining cell on the coarse pair.
            let coarse_sig = solver.sigma(cell.j, cell.l, &coarse)?;
            mesh_tol = Some((cell.sigma - coarse_sig).abs().max(1e-12));
        }

        // Expand neighbours (push right always, down only from column 0).
        if cell.l < l_limit {
            let s = solver.sigma(cell.j, cell.l + 1, mesh)?;
            heap.push(Cell { sigma: s, j: cell.j, l: cell.l + 1 });
        } else if matches!(base, BaseDomain::Ball { .. }) {
            return Err(Error::BudgetExceeded {
                requested: k_max + 1,
                j_max: FIBER_BUDGET,
                l_max: MODE_BUDGET,
            });
        }
        if cell.l == 0 {
            if cell.j + 1 > FIBER_BUDGET {
                return Err(Error::BudgetExceeded {
                    requested: k_max + 1,
                    j_max: FIBER_BUDGET,
                    l_max: MODE_BUDGET,
                });
            }
            let s = solver.sigma(cell.j + 1, 0, mesh)?;
            heap.push(Cell { sigma: s, j: cell.j + 1, l: 0 });
        }

        if let (Some(sk), Some(tol)) = (sigma_k, mesh_tol) {
            let frontier_min = heap.peek().expect("nonempty").sigma;
            if frontier_min > sk + tol {
                break;
            }
        }
    }

    Ok(SteklovSpectrum {
        entries,
        k_max,
        certified: true,
        mesh_tol: mesh_tol.unwrap_or(0.0) / 3.0,
        mesh_n: mesh.n_elements(),
    })
}

/// Check `sigma_k(M_h) <= sigma_{lambda_k, 0}(h)`: the labelled eigenvalue
/// never exceeds the bottom of its own lambda column.
pub fn check_kcompk0(
    spec: &SteklovSpectrum,
    base: &BaseDomain,
    h: &WarpingFunction,
    fiber: &FiberSpectrum,
    k: usize,
) -> Result<BoundReport> {
    let lhs = spec.sigma_k(k)?;
    let lambda_k = fiber.eigenvalue_counted(k)?;
    let mesh = sturm::default_mesh(base, h, spec.mesh_n());
    let rhs = sturm::aux_sigma0(base, h, fiber.dim(), lambda_k, &mesh)?;
    let tol = (5.0 * spec.mesh_tol()).max(1e-8);
    Ok(BoundReport::new("kcompk0", k, lhs, rhs, false, tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FiberKind, FiberSpectrum};

    fn interval(l: f64) -> BaseDomain {
        BaseDomain::interval(l).unwrap()
    }

    fn one() -> WarpingFunction {
        WarpingFunction::constant(1.0).unwrap()
    }

    fn cylinder_oracle(lambda: f64, l: f64) -> (f64, f64) {
        if lambda == 0.0 {
            (0.0, 2.0 / l)
        } else {
            let s = lambda.sqrt();
            (s * (s * l / 2.0).tanh(), s / (s * l / 2.0).tanh())
        }
    }

    #[test]
    fn sigma0_is_zero_with_trivial_labels() {
        let base = interval(1.0);
        let h = WarpingFunction::from_samples(vec![0.0, 0.5, 1.0], vec![1.0, 2.0, 1.0]).unwrap();
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &h, &fiber, 1, 128).unwrap();
        assert_eq!(spec.sigma_k(0).unwrap(), 0.0);
        let e = spec.entry_for(0).unwrap();
        assert_eq!((e.fiber_index, e.mode_index), (0, 0));
    }

    #[test]
    fn cylinder_s2_first_eigenvalue_and_multiplicity() {
        let base = interval(1.0);
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &one(), &fiber, 4, 2048).unwrap();
        let (lo, _) = cylinder_oracle(2.0, 1.0);
        // sigma_1 = sqrt(2) tanh(sqrt(2)/2) with multiplicity 3, then 2/L
        for k in 1..=3 {
            let s = spec.sigma_k(k).unwrap();
            assert!((s - lo).abs() / lo < 1e-5, "k={k}: {s} vs {lo}");
            let e = spec.entry_for(k).unwrap();
            assert_eq!((e.fiber_index, e.mode_index, e.multiplicity), (1, 0, 3));
        }
        let s4 = spec.sigma_k(4).unwrap();
        let expect4 = cylinder_oracle(6.0, 1.0).0.min(2.0);
        assert!((s4 - expect4).abs() / expect4 < 1e-5);
    }

    #[test]
    fn multiset_identity_against_brute_force() {
        // Enumerate all (j <= J, l in {0,1}) by direct solves, expand
        // multiplicities, sort; the frontier merge must agree exactly.
        let base = interval(1.0);
        let h = WarpingFunction::from_samples(vec![0.0, 0.25, 1.0], vec![1.0, 1.7, 1.0]).unwrap();
        let fiber = FiberSpectrum::circle(1.0).unwrap();
        let k_max = 7;
        let mesh_n = 256;
        let spec = steklov_spectrum(&base, &h, &fiber, k_max, mesh_n).unwrap();

        let mesh = sturm::default_mesh(&base, &h, mesh_n);
        let mut brute = Vec::new();
        for (lam, mult) in fiber.eigenvalues(10).unwrap() {
            let sig = sturm::solve_mode(&base, &h, 1, lam, 0.0, &mesh).unwrap();
            for s in sig {
                for _ in 0..mult {
                    brute.push(s);
                }
            }
        }
        brute.sort_by(|a, b| a.total_cmp(b));
        let merged = spec.expanded();
        for (k, (m, b)) in merged.iter().zip(brute.iter()).enumerate() {
            assert_eq!(m, b, "k = {k}");
        }
    }

    #[test]
    fn uncertified_access_rejected() {
        let base = interval(1.0);
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &one(), &fiber, 2, 128).unwrap();
        assert!(matches!(
            spec.sigma_k(11),
            Err(Error::Uncertified { k: 11, .. })
        ));
    }

    #[test]
    fn large_constant_warping_orders_by_fiber_index() {
        // For big C the first eigenvalues all come from the l = 0 column.
        let base = interval(1.0);
        let c = WarpingFunction::constant(64.0).unwrap();
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &c, &fiber, 4, 512).unwrap();
        for k in 1..=4 {
            assert_eq!(spec.entry_for(k).unwrap().mode_index, 0);
        }
        assert_eq!(spec.entry_for(4).unwrap().fiber_index, 2);
    }

    #[test]
    fn disk_spectrum_with_explicit_fiber() {
        // lambda_1 huge: the low spectrum is the lambda = 0 disk DtN column.
        let disk = BaseDomain::ball(2, 1.0).unwrap();
        let fiber = FiberSpectrum::new(FiberKind::Explicit {
            dim: 2,
            eigenvalues: vec![(0.0, 1), (4000.0, 1)],
        })
        .unwrap();
        let spec = steklov_spectrum(&disk, &one(), &fiber, 4, 1024).unwrap();
        let got = spec.expanded();
        let want = [0.0, 1.0, 1.0, 2.0, 2.0];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).abs() < 2e-4, "{got:?}");
        }
    }

    #[test]
    fn kcompk0_holds_with_equality_at_defining_cell() {
        let base = interval(1.0);
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &one(), &fiber, 3, 512).unwrap();
        for k in 0..=3 {
            let rep = check_kcompk0(&spec, &base, &one(), &fiber, k).unwrap();
            assert!(rep.pass, "k = {k}: {rep:?}");
        }
    }

    #[test]
    fn csv_has_one_row_per_k() {
        let base = interval(1.0);
        let fiber = FiberSpectrum::sphere(2).unwrap();
        let spec = steklov_spectrum(&base, &one(), &fiber, 5, 128).unwrap();
        let mut buf = Vec::new();
        spec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7, "{text}");
        assert!(text.starts_with("k,sigma,j,l,lambda_j,multiplicity\n"));
    }
}
