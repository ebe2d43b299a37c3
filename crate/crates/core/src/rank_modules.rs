//! Finite-rank module bundles over fibered systems `S_Θ(y, z) = (Sy, Θ(y) z)`.
//!
//! A bundle stores, for every base point `y`, a `|Z| × r` matrix whose columns
//! are the restrictions `φ_j|_y`. Fiber inner products are weighted by `ρ`.
//!
//! Transport convention: `Pull_y h = h ∘ Θ(y)` takes functions on the fiber
//! over `Sy` to the fiber over `y`, so the Koopman operator of `S_Θ` reads
//! `(ξ ∘ S_Θ)|_y = Pull_y (ξ|_{Sy})`. The relative eigenvalue `U(y)` is
//! defined by `φ_i(Sy, Θ(y) z) = Σ_j U_ij(y) φ_j(y, z)`, and invariance means
//! `span Pull_y B_{Sy} = span B_y`, i.e. `M_{Sy} = U_{Θ(y)} M_y` with
//! `U_{Θ(y)} h = h ∘ Θ(y)^{-1}`.

use serde::{Deserialize, Serialize};

use crate::base_systems::{FiniteSystem, RokhlinCoordinates};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::perm::Perm;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Orthonormality, unitarity and span comparisons.
    pub constraint: f64,
    /// Derived residuals (reconstructions, cross-Grams, norms).
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { constraint: 1e-9, residual: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberedSystem {
    base: FiniteSystem,
    fiber: Vec<Rational>,
    rho: Vec<f64>,
    theta: Vec<Perm>,
}

impl FiberedSystem {
    pub fn new(base: FiniteSystem, fiber: Vec<Rational>, theta: Vec<Perm>) -> Result<Self> {
        if fiber.is_empty() || !fiber.iter().all(rational::is_positive) {
            return Err(Error::InvalidSystem("fiber masses must be positive".into()));
        }
        if rational::sum(&fiber) != rational::int(1) {
            return Err(Error::InvalidSystem("fiber masses must sum to 1".into()));
        }
        if theta.len() != base.len() {
            return Err(Error::InvalidSystem(format!("{} fiber maps for {} base points", theta.len(), base.len())));
        }
        for (y, t) in theta.iter().enumerate() {
            if t.len() != fiber.len() {
                return Err(Error::InvalidSystem(format!("Θ({y}) acts on the wrong fiber size")));
            }
            if (0..fiber.len()).any(|z| fiber[t.apply(z)] != fiber[z]) {
                return Err(Error::InvalidSystem(format!("Θ({y}) does not preserve ρ")));
            }
        }
        let rho = fiber.iter().map(rational::to_f64).collect();
        Ok(Self { base, fiber, rho, theta })
    }

    pub fn from_rokhlin(coords: &RokhlinCoordinates) -> Result<Self> {
        Self::new(coords.base.clone(), coords.fiber.clone(), coords.theta.clone())
    }

    pub fn base(&self) -> &FiniteSystem {
        &self.base
    }

    pub fn fiber(&self) -> &[Rational] {
        &self.fiber
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn theta(&self, y: usize) -> &Perm {
        &self.theta[y]
    }

    pub fn base_len(&self) -> usize {
        self.base.len()
    }

    pub fn fiber_len(&self) -> usize {
        self.fiber.len()
    }

    pub fn state(&self, y: usize, z: usize) -> usize {
        y * self.fiber_len() + z
    }

    /// `S_Θ` on `Y × Z` with measure `ν ⊗ ρ`, index `y·|Z| + z`.
    pub fn total_system(&self) -> FiniteSystem {
        let m = self.fiber_len();
        let n = self.base_len() * m;
        let images = (0..n).map(|i| self.base.perm().apply(i / m) * m + self.theta[i / m].apply(i % m)).collect();
        let weights = (0..n).map(|i| self.base.weight(i / m) * &self.fiber[i % m]).collect();
        FiniteSystem::new(weights, Perm::new(images).expect("skew map is a bijection"))
            .expect("product weights are valid")
    }

    pub fn is_ergodic(&self) -> bool {
        self.total_system().is_ergodic()
    }

    /// `y_k = S^k(0)` for a base that is a single cycle.
    pub fn base_cycle(&self) -> Result<Vec<usize>> {
        if !self.base.is_ergodic() {
            return Err(Error::Precondition("base must be a single cycle".into()));
        }
        let mut out = vec![0];
        let mut y = self.base.perm().apply(0);
        while y != 0 {
            out.push(y);
            y = self.base.perm().apply(y);
        }
        Ok(out)
    }

    /// `W = Θ(y_{n-1}) ∘ ... ∘ Θ(y_0)`; pulling back by it is the fiber
    /// monodromy at the root `y_0 = 0`.
    pub fn monodromy_perm(&self) -> Result<Perm> {
        Ok(self.base_cycle()?.iter().fold(Perm::identity(self.fiber_len()), |acc, &y| self.theta[y].compose(&acc)))
    }

    /// `h ↦ h ∘ Θ(y)`, from the fiber over `Sy` to the fiber over `y`.
    pub fn pull(&self, y: usize, h: &CMat) -> CMat {
        linalg::gather_rows(h, |z| self.theta[y].apply(z))
    }

    /// Inverse of [`Self::pull`].
    pub fn push(&self, y: usize, h: &CMat) -> CMat {
        linalg::scatter_rows(h, |z| self.theta[y].apply(z))
    }

    pub fn inner(&self, a: &CMat, b: &CMat) -> CMat {
        linalg::weighted_gram(a, b, &self.rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleBundle {
    rank: usize,
    fibers: Vec<CMat>,
    orthonormal: bool,
}

impl ModuleBundle {
    /// Checks shapes and full column rank in every fiber.
    pub fn new(fs: &FiberedSystem, fibers: Vec<CMat>) -> Result<Self> {
        let rank = fibers.first().map_or(0, CMat::ncols);
        if fibers.len() != fs.base_len() {
            return Err(Error::ShapeMismatch(format!("{} fibers for {} base points", fibers.len(), fs.base_len())));
        }
        if rank == 0 || rank > fs.fiber_len() {
            return Err(Error::ShapeMismatch(format!("rank {rank} with fiber size {}", fs.fiber_len())));
        }
        for (y, b) in fibers.iter().enumerate() {
            if b.nrows() != fs.fiber_len() || b.ncols() != rank {
                return Err(Error::ShapeMismatch(format!("fiber {y} is {}x{}", b.nrows(), b.ncols())));
            }
            let s = linalg::singular_values(&linalg::sqrt_weighted(b, fs.rho()));
            if s[rank - 1] <= 1e-9 * s[0] {
                return Err(Error::RankCollapse { fiber: y });
            }
        }
        Ok(Self { rank, fibers, orthonormal: false })
    }

    /// The constant function 1 in every fiber.
    pub fn constants(fs: &FiberedSystem) -> Self {
        let one = CMat::from_element(fs.fiber_len(), 1, c(1.0, 0.0));
        Self { rank: 1, fibers: vec![one; fs.base_len()], orthonormal: true }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn fibers(&self) -> &[CMat] {
        &self.fibers
    }

    pub fn fiber(&self, y: usize) -> &CMat {
        &self.fibers[y]
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// `max_y ‖B_y^* D_ρ B_y − I‖`.
    pub fn orthonormality_residual(&self, fs: &FiberedSystem) -> f64 {
        self.fibers.iter().map(|b| (fs.inner(b, b) - CMat::identity(self.rank, self.rank)).norm()).fold(0.0, f64::max)
    }

    fn require_orthonormal(&self) -> Result<()> {
        if self.orthonormal {
            Ok(())
        } else {
            Err(Error::Precondition("bundle must be fiberwise orthonormal".into()))
        }
    }

    fn check_shape(&self, fs: &FiberedSystem) -> Result<()> {
        if self.fibers.len() != fs.base_len() || self.fibers.iter().any(|b| b.nrows() != fs.fiber_len()) {
            return Err(Error::ShapeMismatch("bundle does not live on this fibered system".into()));
        }
        Ok(())
    }
}

pub fn fiberwise_gram_schmidt(bundle: &ModuleBundle, fs: &FiberedSystem, tol: &Tolerances) -> Result<ModuleBundle> {
    bundle.check_shape(fs)?;
    let fibers = bundle
        .fibers
        .iter()
        .enumerate()
        .map(|(y, b)| linalg::gram_schmidt(b, fs.rho(), tol.constraint).map_err(|_| Error::RankCollapse { fiber: y }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModuleBundle { rank: bundle.rank, fibers, orthonormal: true })
}

/// Per-fiber distance between `span B_y` and `span Pull_y B_{Sy}`.
pub fn invariance_residuals(bundle: &ModuleBundle, fs: &FiberedSystem) -> Vec<f64> {
    (0..fs.base_len())
        .map(|y| {
            let sy = fs.base().perm().apply(y);
            linalg::span_distance(bundle.fiber(y), &fs.pull(y, bundle.fiber(sy)), fs.rho())
        })
        .collect()
}

pub fn is_invariant(bundle: &ModuleBundle, fs: &FiberedSystem, tol: &Tolerances) -> bool {
    bundle.check_shape(fs).is_ok() && invariance_residuals(bundle, fs).iter().all(|&r| r <= tol.constraint)
}

/// Transports the subspace spanned by the columns of `v` (at the root fiber
/// over `y_0 = 0`) around the base cycle.
pub fn invariant_bundle_from_monodromy(fs: &FiberedSystem, v: &CMat, tol: &Tolerances) -> Result<ModuleBundle> {
    let cycle = fs.base_cycle()?;
    if v.nrows() != fs.fiber_len() {
        return Err(Error::ShapeMismatch(format!("root subspace has {} rows", v.nrows())));
    }
    let w = fs.monodromy_perm()?;
    let pulled = linalg::gather_rows(v, |z| w.apply(z));
    let residual = linalg::span_distance(v, &pulled, fs.rho());
    if residual > tol.constraint {
        return Err(Error::NotClosed { residual });
    }
    let root = linalg::gram_schmidt(v, fs.rho(), tol.constraint).map_err(|_| Error::RankCollapse { fiber: 0 })?;
    let mut fibers = vec![CMat::zeros(0, 0); fs.base_len()];
    let mut b = root;
    for &y in &cycle {
        let next = fs.push(y, &b);
        fibers[y] = std::mem::replace(&mut b, next);
    }
    Ok(ModuleBundle { rank: v.ncols(), fibers, orthonormal: true })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeEigenvalueCocycle {
    pub matrices: Vec<CMat>,
    pub max_unitarity_residual: f64,
    pub max_reconstruction_residual: f64,
}

impl RelativeEigenvalueCocycle {
    /// `U(y_{n-1}) ··· U(y_0)` around the base cycle.
    pub fn monodromy(&self, fs: &FiberedSystem) -> Result<CMat> {
        let r = self.matrices[0].nrows();
        Ok(fs.base_cycle()?.iter().fold(CMat::identity(r, r), |acc, &y| &self.matrices[y] * acc))
    }
}

pub fn relative_eigenvalue(
    bundle: &ModuleBundle,
    fs: &FiberedSystem,
    tol: &Tolerances,
) -> Result<RelativeEigenvalueCocycle> {
    bundle.check_shape(fs)?;
    bundle.require_orthonormal()?;
    let mut matrices = Vec::with_capacity(fs.base_len());
    let (mut max_u, mut max_r) = (0.0f64, 0.0f64);
    for y in 0..fs.base_len() {
        let sy = fs.base().perm().apply(y);
        let pulled = fs.pull(y, bundle.fiber(sy));
        let ut = fs.inner(bundle.fiber(y), &pulled);
        let recon = linalg::sqrt_weighted(&(&pulled - bundle.fiber(y) * &ut), fs.rho()).norm();
        if recon > tol.residual {
            return Err(Error::NotInvariant { fiber: y, residual: recon });
        }
        let u = ut.transpose();
        max_u = max_u.max(linalg::unitarity_residual(&u));
        max_r = max_r.max(recon);
        matrices.push(u);
    }
    Ok(RelativeEigenvalueCocycle { matrices, max_unitarity_residual: max_u, max_reconstruction_residual: max_r })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantNormReport {
    pub holds: bool,
    /// Mean of `Σ_j |φ_j|²` over all points.
    pub constant: f64,
    pub max_deviation: f64,
    pub ergodic: bool,
    pub warning: Option<String>,
}

/// Checks `Σ_j |φ_j(y, z)|² = r` everywhere.
pub fn check_constant_norm(bundle: &ModuleBundle, fs: &FiberedSystem, tol: &Tolerances) -> Result<ConstantNormReport> {
    bundle.check_shape(fs)?;
    bundle.require_orthonormal()?;
    let r = bundle.rank as f64;
    let sums: Vec<f64> = bundle
        .fibers
        .iter()
        .flat_map(|b| b.row_iter().map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>()).collect::<Vec<_>>())
        .collect();
    let max_deviation = sums.iter().fold(0.0f64, |acc, s| acc.max((s - r).abs()));
    let constant = sums.iter().sum::<f64>() / sums.len() as f64;
    let ergodic = fs.is_ergodic();
    let warning = (!ergodic).then(|| "S_Θ is not ergodic; the norm is only constant along orbits".to_string());
    Ok(ConstantNormReport { holds: max_deviation <= tol.residual, constant, max_deviation, ergodic, warning })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrthogonalityVerdict {
    Orthogonal,
    EqualSpans,
    NonOrthogonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub cross_grams: Vec<CMat>,
    pub max_entry: f64,
    pub max_span_distance: f64,
    pub verdict: OrthogonalityVerdict,
}

pub fn fiberwise_orthogonality(
    m: &ModuleBundle,
    n: &ModuleBundle,
    fs: &FiberedSystem,
    tol: &Tolerances,
) -> Result<OrthogonalityReport> {
    m.check_shape(fs)?;
    n.check_shape(fs)?;
    let cross_grams: Vec<CMat> = (0..fs.base_len()).map(|y| fs.inner(m.fiber(y), n.fiber(y))).collect();
    let max_entry = cross_grams.iter().map(linalg::max_abs).fold(0.0, f64::max);
    let max_span_distance =
        (0..fs.base_len()).map(|y| linalg::span_distance(m.fiber(y), n.fiber(y), fs.rho())).fold(0.0, f64::max);
    let verdict = if max_entry <= tol.residual {
        OrthogonalityVerdict::Orthogonal
    } else if max_span_distance <= tol.residual {
        OrthogonalityVerdict::EqualSpans
    } else {
        OrthogonalityVerdict::NonOrthogonal
    };
    Ok(OrthogonalityReport { cross_grams, max_entry, max_span_distance, verdict })
}

/// `M ⊖ N` fiber by fiber, for `N ⊂ M`.
pub fn fiberwise_complement(
    m: &ModuleBundle,
    n: &ModuleBundle,
    fs: &FiberedSystem,
    tol: &Tolerances,
) -> Result<Option<ModuleBundle>> {
    m.require_orthonormal()?;
    n.require_orthonormal()?;
    if n.rank >= m.rank {
        return Ok(None);
    }
    let fibers = (0..fs.base_len())
        .map(|y| {
            let (bm, bn) = (m.fiber(y), n.fiber(y));
            // Project M's basis off N, then keep the best-conditioned directions.
            let rest = bm - bn * fs.inner(bn, bm);
            let q = linalg::sqrt_weighted(&rest, fs.rho());
            let svd = (q.adjoint() * &q).symmetric_eigen();
            let mut order: Vec<usize> = (0..svd.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| svd.eigenvalues[b].total_cmp(&svd.eigenvalues[a]).then(a.cmp(&b)));
            let keep: Vec<_> =
                order[..m.rank - n.rank].iter().map(|&k| svd.eigenvectors.column(k).into_owned()).collect();
            let coeffs = CMat::from_columns(&keep);
            linalg::gram_schmidt(&(rest * coeffs), fs.rho(), tol.constraint)
                .map_err(|_| Error::RankCollapse { fiber: y })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(ModuleBundle { rank: m.rank - n.rank, fibers, orthonormal: true }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub pieces: Vec<ModuleBundle>,
    /// Monodromy eigenvalue carried by each piece.
    pub eigenvalues: Vec<num_complex::Complex64>,
    /// Some eigenvalue is repeated, so the split is one canonical choice
    /// among many.
    pub non_unique: bool,
    pub reconstruction_residual: f64,
}

/// Eigenvalue gaps below this are one cluster.
const CLUSTER_MERGE: f64 = 1e-7;
/// Gaps in `[CLUSTER_MERGE, CLUSTER_SEPARATE)` are ambiguous.
const CLUSTER_SEPARATE: f64 = 1e-5;

/// Splits an invariant bundle over a cyclic base into rank-1 invariant
/// pieces along the eigenlines of the monodromy.
pub fn irreducible_decomposition(bundle: &ModuleBundle, fs: &FiberedSystem, tol: &Tolerances) -> Result<Decomposition> {
    let cocycle = relative_eigenvalue(bundle, fs, tol)?;
    let r = bundle.rank;
    // Pulling back by the fiber monodromy acts on root coefficients by Mon^T.
    let action = cocycle.monodromy(fs)?.transpose();
    let schur = action.clone().schur();
    let (q, t) = schur.unpack();
    let mut idx: Vec<usize> = (0..r).collect();
    let angle = |k: usize| t[(k, k)].arg().rem_euclid(std::f64::consts::TAU);
    idx.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));

    // Group by circular gaps.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &k in &idx {
        match clusters.last_mut() {
            Some(cl) if (t[(k, k)] - t[(*cl.last().unwrap(), *cl.last().unwrap())]).norm() < CLUSTER_MERGE => {
                cl.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }
    if clusters.len() > 1 {
        let (first, last) = (clusters[0][0], *clusters.last().unwrap().last().unwrap());
        if (t[(first, first)] - t[(last, last)]).norm() < CLUSTER_MERGE {
            let tail = clusters.pop().unwrap();
            clusters[0].extend(tail);
        }
    }
    for a in 0..r {
        for b in a + 1..r {
            let gap = (t[(a, a)] - t[(b, b)]).norm();
            if (CLUSTER_MERGE..CLUSTER_SEPARATE).contains(&gap) {
                return Err(Error::ClusterAmbiguity(format!(
                    "eigenvalues {} and {} are {gap:e} apart",
                    t[(a, a)],
                    t[(b, b)]
                )));
            }
        }
    }

    let root = bundle.fiber(0);
    let mut pieces = Vec::new();
    let mut eigenvalues = Vec::new();
    let mut non_unique = false;
    for cl in &clusters {
        non_unique |= cl.len() > 1;
        let qc = CMat::from_columns(&cl.iter().map(|&k| q.column(k).into_owned()).collect::<Vec<_>>());
        let proj = &qc * qc.adjoint();
        let lambda = cl.iter().map(|&k| t[(k, k)]).sum::<num_complex::Complex64>() / c(cl.len() as f64, 0.0);
        for a in canonical_basis(&proj, cl.len()) {
            let v = root * &a;
            pieces.push(invariant_bundle_from_monodromy(fs, &v, tol)?);
            eigenvalues.push(lambda);
        }
    }

    let reconstruction_residual = (0..fs.base_len())
        .map(|y| {
            let sum = pieces.iter().fold(CMat::zeros(fs.fiber_len(), fs.fiber_len()), |acc, p| {
                acc + linalg::span_projector(p.fiber(y), fs.rho())
            });
            (sum - linalg::span_projector(bundle.fiber(y), fs.rho())).norm()
        })
        .fold(0.0, f64::max);
    Ok(Decomposition { pieces, eigenvalues, non_unique, reconstruction_residual })
}

/// Orthonormal basis of the range of a projector, obtained by running
/// Gram–Schmidt over the projected standard basis vectors in order.
fn canonical_basis(proj: &CMat, dim: usize) -> Vec<CMat> {
    let n = proj.nrows();
    let mut out: Vec<CMat> = Vec::new();
    for k in 0..n {
        if out.len() == dim {
            break;
        }
        let mut v = proj.column(k).into_owned();
        for _ in 0..2 {
            for b in &out {
                let coef = (b.adjoint() * &v)[(0, 0)];
                v -= b * coef;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(CMat::from_column_slice(n, 1, (v / c(norm, 0.0)).as_slice()));
        }
    }
    out
}

/// Thresholds for the projection test: `projection` for vanishing and
/// scalar checks on `C_y`, `intertwining` for the transfer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohomologyTolerances {
    pub projection: f64,
    pub intertwining: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CohomologyVerdict {
    Orthogonal { max_entry: f64 },
    Cohomologous { alpha: Vec<f64>, transfer: Vec<CMat>, intertwining_residual: f64 },
}

/// The projection test on precomputed data: base map `S`, relative
/// eigenvalues of `M` and `N`, and the cross matrices `C_y = B^N_y^* D B^M_y`
/// representing the projection `M_y → N_y`.
pub fn cohomology_from_data(
    base: &Perm,
    u_m: &[CMat],
    u_n: &[CMat],
    cross: &[CMat],
    tols: &CohomologyTolerances,
) -> Result<CohomologyVerdict> {
    let tol = tols.projection;
    let max_entry = cross.iter().map(linalg::max_abs).fold(0.0, f64::max);
    if max_entry <= tol {
        return Ok(CohomologyVerdict::Orthogonal { max_entry });
    }
    let violation = |fiber: usize, detail: String| Error::IrreducibilityViolation { fiber, detail };
    let mut alpha = Vec::with_capacity(cross.len());
    for (y, cy) in cross.iter().enumerate() {
        if cy.nrows() != cy.ncols() {
            return Err(violation(y, format!("ranks differ ({} vs {})", cy.ncols(), cy.nrows())));
        }
        let r = cy.ncols();
        let g = cy.adjoint() * cy;
        let s = g.trace().re / r as f64;
        let dev = linalg::max_abs(&(g - CMat::identity(r, r) * c(s, 0.0)));
        if dev > tol {
            return Err(violation(y, format!("P^*P is not scalar (deviation {dev:e})")));
        }
        let a = s.max(0.0).sqrt();
        if a <= tol {
            return Err(violation(y, "projection vanishes on this fiber only".into()));
        }
        alpha.push(a);
    }
    for y in 0..cross.len() {
        let sy = base.apply(y);
        if (alpha[sy] - alpha[y]).abs() > tol {
            return Err(violation(y, format!("α changes along S: {} vs {}", alpha[y], alpha[sy])));
        }
    }
    let transfer: Vec<CMat> = cross.iter().zip(&alpha).map(|(cy, a)| cy / c(*a, 0.0)).collect();
    let mut intertwining_residual = 0.0f64;
    for y in 0..cross.len() {
        let sy = base.apply(y);
        let lhs = &transfer[sy] * u_m[y].map(|z| z.conj());
        let rhs = u_n[y].map(|z| z.conj()) * &transfer[y];
        intertwining_residual = intertwining_residual.max(linalg::max_abs(&(lhs - rhs)));
    }
    if intertwining_residual > tols.intertwining {
        return Err(violation(0, format!("transfer does not intertwine (residual {intertwining_residual:e})")));
    }
    Ok(CohomologyVerdict::Cohomologous { alpha, transfer, intertwining_residual })
}

pub fn cohomology_test(
    m: &ModuleBundle,
    n: &ModuleBundle,
    fs: &FiberedSystem,
    tol: &Tolerances,
) -> Result<CohomologyVerdict> {
    let um = relative_eigenvalue(m, fs, tol)?;
    let un = relative_eigenvalue(n, fs, tol)?;
    let cross: Vec<CMat> = (0..fs.base_len()).map(|y| fs.inner(n.fiber(y), m.fiber(y))).collect();
    let tols = CohomologyTolerances { projection: tol.residual, intertwining: tol.residual };
    cohomology_from_data(fs.base().perm(), &um.matrices, &un.matrices, &cross, &tols)
}

/// JSON form of a bundle; fiber matrices are row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleDocument {
    pub fiber_masses: Vec<String>,
    pub rank: usize,
    pub fibers: Vec<Vec<Vec<[f64; 2]>>>,
}

impl BundleDocument {
    pub fn from_bundle(bundle: &ModuleBundle, fs: &FiberedSystem) -> Self {
        let fibers = bundle
            .fibers
            .iter()
            .map(|b| b.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect())
            .collect();
        Self { fiber_masses: rational::vec_to_strings(fs.fiber()), rank: bundle.rank, fibers }
    }

    pub fn to_bundle(&self, fs: &FiberedSystem) -> Result<ModuleBundle> {
        let fibers = self
            .fibers
            .iter()
            .map(|rows| {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(Error::ShapeMismatch("ragged fiber matrix".into()));
                }
                let data: Vec<_> = rows.iter().flatten().map(|p| c(p[0], p[1])).collect();
                Ok(CMat::from_row_slice(rows.len(), ncols, &data))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut bundle = ModuleBundle::new(fs, fibers)?;
        if bundle.rank != self.rank {
            return Err(Error::ShapeMismatch(format!("declared rank {} but fibers have {}", self.rank, bundle.rank)));
        }
        bundle.orthonormal = bundle.orthonormality_residual(fs) <= Tolerances::default().constraint;
        Ok(bundle)
    }
}
