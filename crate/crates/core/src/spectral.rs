//! Linearization at an equilibrium, center/stable/unstable spectral splitting
//! and the restricted semigroups.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Block, RealSchur};
use crate::model::ProblemModel;

/// Equilibrium residual accepted by [`linearize`].
pub const EQUILIBRIUM_TOL: f64 = 1e-10;
/// Relative singular-value cutoff for the rank tests.
pub const RANK_TOL: f64 = 1e-8;

const CENTER: usize = 0;
const STABLE: usize = 1;
const UNSTABLE: usize = 2;

/// One of the three spectral clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Center,
    Stable,
    Unstable,
}

impl Component {
    fn index(self) -> usize {
        match self {
            Component::Center => CENTER,
            Component::Stable => STABLE,
            Component::Unstable => UNSTABLE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Center => "center",
            Component::Stable => "stable",
            Component::Unstable => "unstable",
        }
    }
}

/// `A₀ = -Df(u_star)`, so that `A₀w = A(u)w + [A'(u)w]u - F'(u)w`.
pub fn linearize(model: &ProblemModel, u_star: &DVector<f64>) -> Result<DMatrix<f64>> {
    let residual = model.eval_rhs(u_star)?.norm();
    if residual > EQUILIBRIUM_TOL {
        return Err(Error::NotEquilibrium {
            residual,
            tolerance: EQUILIBRIUM_TOL,
        });
    }
    Ok(-model.eval_rhs_jacobian(u_star)?)
}

/// `1e-6 · (1 + spectral radius)`.
pub fn default_eps_center(a0: &DMatrix<f64>) -> f64 {
    let radius = if a0.nrows() == 0 {
        0.0
    } else {
        a0.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    };
    1e-6 * (1.0 + radius)
}

/// Spectral decomposition of a linearization into center, stable
/// (`Re λ > 0`) and unstable (`Re λ < 0`) parts.
///
/// Internally `A₀ = V D W` with `D = diag(B_c, B_s, B_u)` block diagonal and
/// `W V = I`; the projections are `P_l = V_l W_l`.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub a0: DMatrix<f64>,
    pub p_c: DMatrix<f64>,
    pub p_s: DMatrix<f64>,
    pub p_u: DMatrix<f64>,
    pub a_s_full: DMatrix<f64>,
    pub a_u_full: DMatrix<f64>,
    pub sigma_c: Vec<Complex<f64>>,
    pub sigma_s: Vec<Complex<f64>>,
    pub sigma_u: Vec<Complex<f64>>,
    /// Nonzero eigenvalues found on the imaginary axis (kept in the center block).
    pub imaginary: Vec<Complex<f64>>,
    pub omega: f64,
    pub dims: (usize, usize, usize),
    pub eps_center: f64,
    v: [DMatrix<f64>; 3],
    w: [DMatrix<f64>; 3],
    b: [DMatrix<f64>; 3],
    basis: [DMatrix<f64>; 3],
    kappa_s: f64,
    kappa_u: f64,
}

/// Strict split: errors on imaginary-axis spectrum and on `m_c ≠ m`.
pub fn split_spectrum(a0: &DMatrix<f64>, m: usize, eps_center: f64) -> Result<SpectralSplit> {
    let split = SpectralSplit::decompose(a0, eps_center)?;
    if let Some(z) = split.imaginary.first() {
        return Err(Error::ImaginarySpectrum { re: z.re, im: z.im });
    }
    if split.dims.0 != m {
        return Err(Error::NotNormallyHyperbolic(format!(
            "center dimension {} differs from the manifold dimension {m}",
            split.dims.0
        )));
    }
    Ok(split)
}

impl SpectralSplit {
    /// Lenient split: nonzero imaginary-axis eigenvalues are recorded and
    /// assigned to the center block; no dimension check is made.
    pub fn decompose(a0: &DMatrix<f64>, eps_center: f64) -> Result<Self> {
        let n = a0.nrows();
        if a0.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "linearization columns",
                expected: n,
                found: a0.ncols(),
            });
        }
        if a0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "linearization has non-finite entries".into(),
            ));
        }
        if !(eps_center > 0.0) {
            return Err(Error::InvalidArgument("eps_center must be positive".into()));
        }
        let mut schur = RealSchur::new(a0)?;
        let mut imaginary = Vec::new();
        let mut keys = Vec::with_capacity(schur.blocks.len());
        for &blk in &schur.blocks {
            let ev = schur.block_eigenvalues(blk);
            let key = classify(&ev, eps_center, &mut imaginary)?;
            keys.push(key);
        }
        let keys = schur.reorder(&keys)?;

        let mut sizes = [0usize; 3];
        let mut groups: [Vec<Block>; 3] = Default::default();
        let mut sigma: [Vec<Complex<f64>>; 3] = Default::default();
        let offsets_pending: Vec<(usize, Block)> = keys
            .iter()
            .copied()
            .zip(schur.blocks.iter().copied())
            .collect();
        for (k, blk) in offsets_pending {
            sizes[k] += blk.size;
            sigma[k].extend(schur.block_eigenvalues(blk));
            groups[k].push(blk);
        }
        let (nc, ns, nu) = (sizes[0], sizes[1], sizes[2]);
        let start = [0, nc, nc + ns];
        let rel = |k: usize| -> Vec<Block> {
            groups[k]
                .iter()
                .map(|b| Block {
                    start: b.start - start[k],
                    size: b.size,
                })
                .collect()
        };

        let t = &schur.t;
        let tb = |i: usize, j: usize| {
            t.view((start[i], start[j]), (sizes[i], sizes[j]))
                .into_owned()
        };
        let (t11, t12, t13) = (tb(0, 0), tb(0, 1), tb(0, 2));
        let (t22, t23, t33) = (tb(1, 1), tb(1, 2), tb(2, 2));
        let y12 = linalg::solve_sylvester(&t11, &t22, &rel(1), &(-&t12))?;
        let y23 = linalg::solve_sylvester(&t22, &t33, &rel(2), &(-&t23))?;
        let y13 = linalg::solve_sylvester(&t11, &t33, &rel(2), &(-(&t12 * &y23 + &t13)))?;

        let mut y = DMatrix::<f64>::identity(n, n);
        let mut yinv = DMatrix::<f64>::identity(n, n);
        y.view_mut((0, nc), (nc, ns)).copy_from(&y12);
        y.view_mut((0, nc + ns), (nc, nu)).copy_from(&y13);
        y.view_mut((nc, nc + ns), (ns, nu)).copy_from(&y23);
        yinv.view_mut((0, nc), (nc, ns)).copy_from(&(-&y12));
        yinv.view_mut((0, nc + ns), (nc, nu))
            .copy_from(&(&y12 * &y23 - &y13));
        yinv.view_mut((nc, nc + ns), (ns, nu)).copy_from(&(-&y23));

        let vfull = &schur.q * y;
        let wfull = yinv * schur.q.transpose();
        let v: [DMatrix<f64>; 3] =
            std::array::from_fn(|k| vfull.columns(start[k], sizes[k]).into_owned());
        let w: [DMatrix<f64>; 3] =
            std::array::from_fn(|k| wfull.rows(start[k], sizes[k]).into_owned());
        let b = [t11, t22, t33];
        let p: [DMatrix<f64>; 3] = std::array::from_fn(|k| &v[k] * &w[k]);
        let basis: [DMatrix<f64>; 3] =
            std::array::from_fn(|k| linalg::orthonormal_range(&p[k], sizes[k]));

        let min_s = sigma[1].iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        let min_u = sigma[2].iter().map(|z| -z.re).fold(f64::INFINITY, f64::min);
        let gap = min_s.min(min_u);
        let omega = if gap.is_finite() { 0.9 * gap } else { 0.0 };

        let kappa_s = kappa(&v[1], &w[1], &(-&b[1]), omega);
        let kappa_u = kappa(&v[2], &w[2], &b[2], omega);
        let a_s_full = &v[1] * &b[1] * &w[1];
        let a_u_full = &v[2] * &b[2] * &w[2];
        let [sigma_c, sigma_s, sigma_u] = sigma;
        let [p_c, p_s, p_u] = p;

        Ok(Self {
            a0: a0.clone(),
            p_c,
            p_s,
            p_u,
            a_s_full,
            a_u_full,
            sigma_c,
            sigma_s,
            sigma_u,
            imaginary,
            omega,
            dims: (nc, ns, nu),
            eps_center,
            v,
            w,
            b,
            basis,
            kappa_s,
            kappa_u,
        })
    }

    pub fn n(&self) -> usize {
        self.a0.nrows()
    }

    pub fn dim(&self, c: Component) -> usize {
        match c {
            Component::Center => self.dims.0,
            Component::Stable => self.dims.1,
            Component::Unstable => self.dims.2,
        }
    }

    pub fn projection(&self, c: Component) -> &DMatrix<f64> {
        match c {
            Component::Center => &self.p_c,
            Component::Stable => &self.p_s,
            Component::Unstable => &self.p_u,
        }
    }

    /// `P_s + P_u`.
    pub fn hyperbolic_projection(&self) -> DMatrix<f64> {
        &self.p_s + &self.p_u
    }

    /// Measured bound `κ_s` with `|e^{-A_s t}P_s| ≤ κ_s e^{-ωt}` for `t ≥ 0`.
    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    /// Measured bound `κ_u` with `|e^{-A_u t}P_u| ≤ κ_u e^{ωt}` for `t ≤ 0`.
    pub fn kappa_u(&self) -> f64 {
        self.kappa_u
    }

    pub fn kappa(&self) -> f64 {
        self.kappa_s.max(self.kappa_u)
    }

    /// `e^{-A_s t} P_s v` for `t ≥ 0`.
    pub fn stable_semigroup(&self, t: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stable semigroup needs t >= 0, got {t}"
            )));
        }
        self.check_len(v)?;
        let e = linalg::expm(&(&self.b[STABLE] * -t));
        Ok(&self.v[STABLE] * (e * (&self.w[STABLE] * v)))
    }

    /// `e^{-A_u t} P_u v` for `t ≤ 0`.
    pub fn unstable_group(&self, t: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        if !(t <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "unstable group is only applied backward, got t = {t}"
            )));
        }
        self.check_len(v)?;
        let e = linalg::expm(&(&self.b[UNSTABLE] * -t));
        Ok(&self.v[UNSTABLE] * (e * (&self.w[UNSTABLE] * v)))
    }

    /// Orthonormal basis (n×k) of `range(P_l)`, used for user-facing coordinates.
    pub fn basis(&self, c: Component) -> &DMatrix<f64> {
        &self.basis[c.index()]
    }

    /// Coordinates of `v ∈ range(P_l)` in the orthonormal basis.
    pub fn to_coords(&self, c: Component, v: &DVector<f64>) -> DVector<f64> {
        self.basis[c.index()].transpose() * v
    }

    pub fn from_coords(&self, c: Component, coords: &DVector<f64>) -> Result<DVector<f64>> {
        let k = self.dim(c);
        if coords.len() != k {
            return Err(Error::DimensionMismatch {
                what: "subspace coordinates",
                expected: k,
                found: coords.len(),
            });
        }
        Ok(&self.basis[c.index()] * coords)
    }

    /// `|P_l v - v|`.
    pub fn subspace_deviation(&self, c: Component, v: &DVector<f64>) -> f64 {
        (self.projection(c) * v - v).norm()
    }

    /// Spectral basis `V_l` (n×k) with `W_l V_l = I`.
    pub(crate) fn v(&self, c: Component) -> &DMatrix<f64> {
        &self.v[c.index()]
    }

    /// Dual rows `W_l` (k×n), so that `P_l = V_l W_l`.
    pub(crate) fn w(&self, c: Component) -> &DMatrix<f64> {
        &self.w[c.index()]
    }

    /// Restricted generator `B_l` with `A₀ V_l = V_l B_l`.
    pub(crate) fn b(&self, c: Component) -> &DMatrix<f64> {
        &self.b[c.index()]
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch {
                what: "vector",
                expected: self.n(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

fn classify(ev: &[Complex<f64>], eps: f64, imaginary: &mut Vec<Complex<f64>>) -> Result<usize> {
    let z = ev[0];
    let (re, im) = (z.re, z.im.abs());
    if re.abs() < eps {
        if im < eps {
            return Ok(CENTER);
        }
        imaginary.extend_from_slice(ev);
        return Ok(CENTER);
    }
    if re.abs() < 2.0 * eps && im < eps {
        return Err(Error::AmbiguousClustering { re, im: z.im });
    }
    Ok(if re > 0.0 { STABLE } else { UNSTABLE })
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    linalg::singular_values(m).into_iter().fold(0.0, f64::max)
}

/// `|V||W| · sup_{s ≥ 0} e^{ωs} |e^{M s}|`, sampled on a grid and refined
/// around the largest sample.
fn kappa(v: &DMatrix<f64>, w: &DMatrix<f64>, m: &DMatrix<f64>, omega: f64) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let weighted = |s: f64| (omega * s).exp() * spectral_norm(&linalg::expm(&(m * s)));
    let scale = spectral_norm(m).max(omega).max(1e-12);
    let h = 0.05 / scale;
    let step = linalg::expm(&(m * h));
    let mut power = DMatrix::<f64>::identity(m.nrows(), m.nrows());
    let (mut best, mut best_s) = (1.0, 0.0);
    let mut s = 0.0;
    for _ in 0..200_000 {
        power = &power * &step;
        s += h;
        let val = (omega * s).exp() * spectral_norm(&power);
        if val > best {
            best = val;
            best_s = s;
        }
        if val < 1e-3 * best && s * omega > 5.0 {
            break;
        }
    }
    // golden-section refinement on the bracket around the best sample
    let (mut lo, mut hi) = ((best_s - h).max(0.0), best_s + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..40 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if weighted(a) > weighted(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best = best.max(weighted(0.5 * (lo + hi)));
    spectral_norm(v) * spectral_norm(w) * best
}

/// Outcome of the normal-hyperbolicity gate.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    NormallyHyperbolic,
    NormallyStable,
    Fails(String),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::NormallyHyperbolic => "NormallyHyperbolic",
            Classification::NormallyStable => "NormallyStable",
            Classification::Fails(_) => "Fails",
        }
    }

    pub fn passes(&self) -> bool {
        !matches!(self, Classification::Fails(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicityReport {
    pub n: usize,
    pub m: usize,
    pub rank_a0: usize,
    pub rank_a0_squared: usize,
    pub kernel_dim: usize,
    /// `dim N(A₀) = m`.
    pub kernel_matches: bool,
    /// `rank A₀² = rank A₀`.
    pub semisimple: bool,
    /// No nonzero spectrum on the imaginary axis.
    pub no_imaginary: bool,
    pub dims: (usize, usize, usize),
    pub omega: f64,
    pub classification: Classification,
}

pub fn check_normally_hyperbolic(split: &SpectralSplit, m: usize) -> HyperbolicityReport {
    let a0 = &split.a0;
    let n = a0.nrows();
    let rank_a0 = linalg::numerical_rank(a0, RANK_TOL);
    let rank_a0_squared = linalg::numerical_rank(&(a0 * a0), RANK_TOL);
    let kernel_dim = n - rank_a0;
    let kernel_matches = kernel_dim == m;
    let semisimple = rank_a0_squared == rank_a0;
    let no_imaginary = split.imaginary.is_empty();
    let classification = if !kernel_matches {
        Classification::Fails(format!("dim N(A0) = {kernel_dim} differs from m = {m}"))
    } else if !semisimple {
        Classification::Fails(format!(
            "0 not semi-simple (rank(A0^2) = {rank_a0_squared} != rank(A0) = {rank_a0})"
        ))
    } else if !no_imaginary {
        let z = split.imaginary[0];
        Classification::Fails(format!(
            "nonzero spectrum on the imaginary axis ({:.6e}{:+.6e}i)",
            z.re, z.im
        ))
    } else if split.dims.0 != m {
        Classification::Fails(format!(
            "center cluster has dimension {} but m = {m}",
            split.dims.0
        ))
    } else if split.dims.2 > 0 {
        Classification::NormallyHyperbolic
    } else {
        Classification::NormallyStable
    };
    HyperbolicityReport {
        n,
        m,
        rank_a0,
        rank_a0_squared,
        kernel_dim,
        kernel_matches,
        semisimple,
        no_imaginary,
        dims: split.dims,
        omega: split.omega,
        classification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::get_problem;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    /// `(1/2πi)∮(λ - A)⁻¹ dλ` on a circle, by the periodic trapezoid rule.
    fn residue_projection(a: &DMatrix<f64>, center: f64, radius: f64) -> DMatrix<f64> {
        let n = a.nrows();
        let ac = a.map(|x| Complex::new(x, 0.0));
        let mut acc = DMatrix::<Complex<f64>>::zeros(n, n);
        let k = 256;
        for j in 0..k {
            let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
            let e = Complex::new(th.cos(), th.sin());
            let lam = Complex::new(center, 0.0) + e * radius;
            let res = (DMatrix::<Complex<f64>>::identity(n, n) * lam - &ac)
                .try_inverse()
                .unwrap();
            // dλ = i r e^{iθ} dθ, and the 1/(2πi) cancels the i
            acc += res * (e * radius / k as f64);
        }
        acc.map(|z| z.re)
    }

    #[test]
    fn linearize_examples() {
        let ls = get_problem("line-stable").unwrap();
        assert_eq!(linearize(&ls.model, &ls.u_star).unwrap(), diag(&[0.0, 1.0]));
        let lh = get_problem("line-hyperbolic").unwrap();
        let u = dv(&[0.2, 0.0, 0.0]);
        let a0 = linearize(&lh.model, &u).unwrap();
        assert!((a0 - diag(&[0.0, 0.8, -0.8])).amax() < 1e-15);
        let pb = get_problem("parabola-stable").unwrap();
        assert_eq!(linearize(&pb.model, &pb.u_star).unwrap(), diag(&[0.0, 1.0]));
        let off = dv(&[0.0, 0.1]);
        assert!(matches!(
            linearize(&ls.model, &off),
            Err(Error::NotEquilibrium { .. })
        ));
    }

    #[test]
    fn diagonal_split() {
        let s = split_spectrum(&diag(&[0.0, 1.0, -1.0]), 1, 1e-8).unwrap();
        assert!((&s.p_c - diag(&[1.0, 0.0, 0.0])).amax() < 1e-14);
        assert!((&s.p_s - diag(&[0.0, 1.0, 0.0])).amax() < 1e-14);
        assert!((&s.p_u - diag(&[0.0, 0.0, 1.0])).amax() < 1e-14);
        assert!((s.omega - 0.9).abs() < 1e-14);
        assert_eq!(s.dims, (1, 1, 1));

        let s = split_spectrum(&diag(&[0.0, 1.0]), 1, 1e-8).unwrap();
        assert!(s.sigma_u.is_empty());
        assert_eq!(s.dims.2, 0);
        assert!((s.omega - 0.9).abs() < 1e-14);
    }

    #[test]
    fn non_normal_split_matches_residue_formula() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let s = split_spectrum(&a, 1, 1e-8).unwrap();
        let pc = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 0.0]);
        let ps = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        assert!((&s.p_c - &pc).amax() < 1e-12);
        assert!((&s.p_s - &ps).amax() < 1e-12);
        assert!((residue_projection(&a, 0.0, 0.5) - &s.p_c).amax() < 1e-10);
        assert!((residue_projection(&a, 1.0, 0.5) - &s.p_s).amax() < 1e-10);
    }

    #[test]
    fn semigroup_examples() {
        let s = split_spectrum(&diag(&[0.0, 1.0, -1.0]), 1, 1e-8).unwrap();
        let v = dv(&[1.0, 1.0, 1.0]);
        let r = s.stable_semigroup(1.0, &v).unwrap();
        assert!((r - dv(&[0.0, (-1.0f64).exp(), 0.0])).amax() < 1e-15);
        let r = s.unstable_group(-1.0, &v).unwrap();
        assert!((r - dv(&[0.0, 0.0, (-1.0f64).exp()])).amax() < 1e-15);
        assert!((s.stable_semigroup(0.0, &v).unwrap() - &s.p_s * &v).amax() < 1e-15);
        assert!((s.unstable_group(0.0, &v).unwrap() - &s.p_u * &v).amax() < 1e-15);
        assert!(s.stable_semigroup(-1.0, &v).is_err());
        assert!(s.unstable_group(1.0, &v).is_err());

        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let s = split_spectrum(&a, 1, 1e-8).unwrap();
        let r = s.stable_semigroup(2.0, &dv(&[1.0, 1.0])).unwrap();
        let dense = (&a * &s.p_s * -2.0).exp() * &s.p_s * dv(&[1.0, 1.0]);
        let e2 = (-2.0f64).exp();
        assert!((&r - dv(&[e2, e2])).amax() < 1e-14);
        assert!((&r - dense).amax() < 1e-14);

        let lh = get_problem("line-hyperbolic").unwrap();
        let a0 = linearize(&lh.model, &dv(&[0.2, 0.0, 0.0])).unwrap();
        let s = split_spectrum(&a0, 1, default_eps_center(&a0)).unwrap();
        let r = s.unstable_group(-2.0, &dv(&[0.0, 0.0, 1.0])).unwrap();
        assert!((r[2] - (-1.6f64).exp()).abs() < 1e-14);
        assert!((r[2] - 0.2019).abs() < 1e-4);
    }

    #[test]
    fn complex_pair_stays_real() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, -2.0, 1.0]);
        let s = split_spectrum(&a, 1, 1e-8).unwrap();
        assert_eq!(s.dims, (1, 2, 0));
        assert!((s.omega - 0.9).abs() < 1e-12);
        assert!((&s.p_s - diag(&[0.0, 1.0, 1.0])).amax() < 1e-12);
        assert!(s.sigma_s.iter().all(|z| (z.im.abs() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn clustering_errors() {
        let eps = 1e-6;
        let a = diag(&[0.0, 1.5e-6, 1.0]);
        assert!(matches!(
            split_spectrum(&a, 1, eps),
            Err(Error::AmbiguousClustering { .. })
        ));
        let rot = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0]);
        assert!(matches!(
            split_spectrum(&rot, 1, eps),
            Err(Error::ImaginarySpectrum { .. })
        ));
        assert!(matches!(
            split_spectrum(&diag(&[0.0, 0.0, 1.0]), 1, eps),
            Err(Error::NotNormallyHyperbolic(_))
        ));
    }

    #[test]
    fn classification_examples() {
        let lh = get_problem("line-hyperbolic").unwrap();
        let a0 = linearize(&lh.model, &lh.u_star).unwrap();
        let s = SpectralSplit::decompose(&a0, default_eps_center(&a0)).unwrap();
        let r = check_normally_hyperbolic(&s, 1);
        assert_eq!(r.classification, Classification::NormallyHyperbolic);
        assert_eq!(r.dims, (1, 1, 1));

        let ls = get_problem("line-stable").unwrap();
        let a0 = linearize(&ls.model, &ls.u_star).unwrap();
        let s = SpectralSplit::decompose(&a0, default_eps_center(&a0)).unwrap();
        let r = check_normally_hyperbolic(&s, 1);
        assert_eq!(r.classification, Classification::NormallyStable);
        assert_eq!(r.dims, (1, 1, 0));

        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let s = SpectralSplit::decompose(&nil, default_eps_center(&nil)).unwrap();
        let r = check_normally_hyperbolic(&s, 1);
        assert_eq!((r.rank_a0, r.rank_a0_squared), (1, 0));
        match r.classification {
            Classification::Fails(reason) => assert!(reason.contains("0 not semi-simple")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn kappa_of_normal_split_is_one() {
        let s = split_spectrum(&diag(&[0.0, 1.0, -2.0]), 1, 1e-8).unwrap();
        // sup e^{0.9 s} e^{-s} is attained at s = 0
        assert!((s.kappa_s() - 1.0).abs() < 1e-12);
        assert!((s.kappa_u() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coordinates_round_trip() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 1.0]);
        let s = split_spectrum(&a, 1, 1e-8).unwrap();
        let y = s.from_coords(Component::Stable, &dv(&[0.3])).unwrap();
        assert!(s.subspace_deviation(Component::Stable, &y) < 1e-14);
        assert!((s.to_coords(Component::Stable, &y)[0] - 0.3).abs() < 1e-14);
    }
}
