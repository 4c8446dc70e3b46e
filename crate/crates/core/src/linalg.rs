//! Dense linear-algebra helpers: ordered real Schur forms, quasi-triangular
//! Sylvester solves, exponential-integrator weights and subspace angles.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// A diagonal block (1×1 or 2×2) of a real quasi-triangular matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Block {
    pub start: usize,
    pub size: usize,
}

/// Real Schur form `a = q t qᵀ` with its diagonal block structure.
#[derive(Debug, Clone)]
pub(crate) struct RealSchur {
    pub q: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub blocks: Vec<Block>,
}

impl RealSchur {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 {
            return Ok(Self {
                q: DMatrix::zeros(0, 0),
                t: DMatrix::zeros(0, 0),
                blocks: Vec::new(),
            });
        }
        let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100 * n.max(10))
            .ok_or(Error::Singular(
                "real Schur decomposition (QR iteration stalled)",
            ))?;
        let (mut q, mut t) = schur.unpack();
        let scale = t.amax().max(f64::MIN_POSITIVE);
        let mut blocks = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            if i + 1 < n && t[(i + 1, i)].abs() > f64::EPSILON * scale {
                if split_real_pair(&mut q, &mut t, i) {
                    blocks.push(Block { start: i, size: 1 });
                    i += 1;
                } else {
                    blocks.push(Block { start: i, size: 2 });
                    i += 2;
                }
            } else {
                if i + 1 < n {
                    t[(i + 1, i)] = 0.0;
                }
                blocks.push(Block { start: i, size: 1 });
                i += 1;
            }
        }
        Ok(Self { q, t, blocks })
    }

    /// Eigenvalues of one diagonal block (one value for 1×1, a conjugate pair for 2×2).
    pub fn block_eigenvalues(&self, b: Block) -> Vec<Complex<f64>> {
        let s = b.start;
        if b.size == 1 {
            return vec![Complex::new(self.t[(s, s)], 0.0)];
        }
        let (a11, a12, a21, a22) = (
            self.t[(s, s)],
            self.t[(s, s + 1)],
            self.t[(s + 1, s)],
            self.t[(s + 1, s + 1)],
        );
        let half_tr = 0.5 * (a11 + a22);
        let half_diff = 0.5 * (a11 - a22);
        let disc = half_diff * half_diff + a12 * a21;
        if disc >= 0.0 {
            let r = disc.sqrt();
            vec![
                Complex::new(half_tr + r, 0.0),
                Complex::new(half_tr - r, 0.0),
            ]
        } else {
            let im = (-disc).sqrt();
            vec![Complex::new(half_tr, im), Complex::new(half_tr, -im)]
        }
    }

    /// Stable reordering so that blocks appear in nondecreasing `keys` order.
    /// `keys[i]` belongs to `self.blocks[i]`; the permuted keys are returned.
    pub fn reorder(&mut self, keys: &[usize]) -> Result<Vec<usize>> {
        let mut keys = keys.to_vec();
        let nb = self.blocks.len();
        loop {
            let mut swapped = false;
            for i in 0..nb.saturating_sub(1) {
                if keys[i] > keys[i + 1] {
                    let (b1, b2) = (self.blocks[i], self.blocks[i + 1]);
                    swap_adjacent(&mut self.q, &mut self.t, b1.start, b1.size, b2.size)?;
                    self.blocks[i] = Block {
                        start: b1.start,
                        size: b2.size,
                    };
                    self.blocks[i + 1] = Block {
                        start: b1.start + b2.size,
                        size: b1.size,
                    };
                    keys.swap(i, i + 1);
                    swapped = true;
                }
            }
            if !swapped {
                return Ok(keys);
            }
        }
    }
}

/// Triangularizes a 2×2 diagonal block with real eigenvalues in place.
/// Returns `false` when the block carries a complex pair.
fn split_real_pair(q: &mut DMatrix<f64>, t: &mut DMatrix<f64>, i: usize) -> bool {
    let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc < 0.0 {
        return false;
    }
    let lambda = 0.5 * (a + d) + half_diff.signum() * disc.sqrt();
    // eigenvector for `lambda`, whichever form is better conditioned
    let v1 = (b, lambda - a);
    let v2 = (lambda - d, c);
    let (vx, vy) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) {
        v1
    } else {
        v2
    };
    let norm = vx.hypot(vy);
    if norm == 0.0 {
        t[(i + 1, i)] = 0.0;
        return true;
    }
    let g = DMatrix::from_row_slice(2, 2, &[vx / norm, -vy / norm, vy / norm, vx / norm]);
    apply_similarity(q, t, i, &g);
    t[(i + 1, i)] = 0.0;
    true
}

/// `t ← gᵀ t g` and `q ← q g`, where `g` acts on rows/columns `k..k+g.nrows()`.
fn apply_similarity(q: &mut DMatrix<f64>, t: &mut DMatrix<f64>, k: usize, g: &DMatrix<f64>) {
    let w = g.nrows();
    let n = t.nrows();
    let rows = g.transpose() * t.view((k, 0), (w, n));
    t.view_mut((k, 0), (w, n)).copy_from(&rows);
    let cols = t.view((0, k), (n, w)) * g;
    t.view_mut((0, k), (n, w)).copy_from(&cols);
    let qc = q.view((0, k), (n, w)) * g;
    q.view_mut((0, k), (n, w)).copy_from(&qc);
}

/// Swaps the adjacent diagonal blocks of sizes `p` (at `k`) and `s` (at `k+p`).
fn swap_adjacent(
    q: &mut DMatrix<f64>,
    t: &mut DMatrix<f64>,
    k: usize,
    p: usize,
    s: usize,
) -> Result<()> {
    let w = p + s;
    let a = t.view((k, k), (p, p)).into_owned();
    let b = t.view((k, k + p), (p, s)).into_owned();
    let c = t.view((k + p, k + p), (s, s)).into_owned();
    // A X - X C = -B: [X; I] spans the invariant subspace belonging to C.
    let x = sylvester_dense(&a, &c, &(-b))?;
    let mut basis = DMatrix::zeros(w, w + s);
    basis.view_mut((0, 0), (p, s)).copy_from(&x);
    basis
        .view_mut((p, 0), (s, s))
        .copy_from(&DMatrix::identity(s, s));
    basis
        .view_mut((0, s), (w, w))
        .copy_from(&DMatrix::identity(w, w));
    let g = basis.qr().q();
    apply_similarity(q, t, k, &g);
    for i in 0..p {
        for j in 0..s {
            t[(k + s + i, k + j)] = 0.0;
        }
    }
    Ok(())
}

/// Solves `a x - x b = c` through the Kronecker form. Only for tiny blocks.
fn sylvester_dense(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (p, s) = (a.nrows(), b.nrows());
    let mut k = DMatrix::zeros(p * s, p * s);
    for j in 0..s {
        for i in 0..s {
            for r in 0..p {
                for col in 0..p {
                    let mut v = 0.0;
                    if i == j {
                        v += a[(r, col)];
                    }
                    if r == col {
                        v -= b[(i, j)];
                    }
                    k[(j * p + r, i * p + col)] = v;
                }
            }
        }
    }
    let rhs = DVector::from_column_slice(c.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("block swap (eigenvalues too close)"))?;
    Ok(DMatrix::from_column_slice(p, s, sol.as_slice()))
}

/// Solves `a x - x b = c` column-block by column-block, with `b` upper
/// quasi-triangular whose diagonal blocks are `b_blocks` (offsets relative to `b`).
pub(crate) fn solve_sylvester(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    b_blocks: &[Block],
    c: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let p = a.nrows();
    let s = b.nrows();
    let mut x = DMatrix::<f64>::zeros(p, s);
    if p == 0 || s == 0 {
        return Ok(x);
    }
    for blk in b_blocks {
        let j = blk.start;
        let mut rhs = c.columns(j, blk.size).into_owned();
        if j > 0 {
            rhs += x.columns(0, j) * b.view((0, j), (j, blk.size));
        }
        if blk.size == 1 {
            let m = a - DMatrix::identity(p, p) * b[(j, j)];
            let col = m
                .lu()
                .solve(&rhs.column(0).into_owned())
                .ok_or(Error::Singular("Sylvester equation (shared eigenvalue)"))?;
            x.set_column(j, &col);
        } else {
            let mut m = DMatrix::zeros(2 * p, 2 * p);
            let id = DMatrix::<f64>::identity(p, p);
            m.view_mut((0, 0), (p, p)).copy_from(&(a - &id * b[(j, j)]));
            m.view_mut((0, p), (p, p))
                .copy_from(&(-&id * b[(j + 1, j)]));
            m.view_mut((p, 0), (p, p))
                .copy_from(&(-&id * b[(j, j + 1)]));
            m.view_mut((p, p), (p, p))
                .copy_from(&(a - &id * b[(j + 1, j + 1)]));
            let mut r = DVector::zeros(2 * p);
            r.rows_mut(0, p).copy_from(&rhs.column(0));
            r.rows_mut(p, p).copy_from(&rhs.column(1));
            let sol = m
                .lu()
                .solve(&r)
                .ok_or(Error::Singular("Sylvester equation (shared eigenvalue)"))?;
            x.set_column(j, &sol.rows(0, p).into_owned());
            x.set_column(j + 1, &sol.rows(p, p).into_owned());
        }
    }
    Ok(x)
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub(crate) fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return m.clone();
    }
    m.exp()
}

/// Exponential-integrator weights on a step of length `h` for generator `y`:
/// returns `(e^{hY}, ∫₀ʰ e^{(h-s)Y} ds, (1/h)∫₀ʰ e^{(h-s)Y} s ds)`.
pub(crate) fn phi_weights(y: &DMatrix<f64>, h: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = y.nrows();
    if k == 0 {
        let z = DMatrix::zeros(0, 0);
        return (z.clone(), z.clone(), z);
    }
    let mut big = DMatrix::zeros(3 * k, 3 * k);
    big.view_mut((0, 0), (k, k)).copy_from(&(y * h));
    let hid = DMatrix::<f64>::identity(k, k) * h;
    big.view_mut((0, k), (k, k)).copy_from(&hid);
    big.view_mut((k, 2 * k), (k, k)).copy_from(&hid);
    let e = expm(&big);
    (
        e.view((0, 0), (k, k)).into_owned(),
        e.view((0, k), (k, k)).into_owned(),
        e.view((0, 2 * k), (k, k)).into_owned() / h,
    )
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// Number of singular values above `rel_tol · σ_max`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis for `range(p)` of prescribed dimension `k`, built by
/// column-pivoted Gram–Schmidt so that simple coordinate subspaces get
/// coordinate basis vectors.
pub(crate) fn orthonormal_range(p: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = p.nrows();
    let mut cols: Vec<DVector<f64>> = (0..p.ncols()).map(|j| p.column(j).into_owned()).collect();
    let mut basis = DMatrix::zeros(n, k);
    for b in 0..k {
        let (best, _) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut v = cols[best].normalize();
        if v[v.iamax()] < 0.0 {
            v.neg_mut();
        }
        for c in cols.iter_mut() {
            let d = v.dot(c);
            c.axpy(-d, &v, 1.0);
        }
        basis.set_column(b, &v);
    }
    basis
}

/// Orthonormal basis of the column space of `a` (numerical rank at 1e-10).
pub(crate) fn column_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    if a.ncols() == 0 {
        return DMatrix::zeros(a.nrows(), 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.max();
    let r = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(f64::MIN_POSITIVE))
        .count();
    u.columns(0, r).into_owned()
}

/// Largest principal angle (radians) between the column spaces of `a` and `b`.
/// Returns π/2 if the dimensions differ.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = column_space(a);
    let qb = column_space(b);
    if qa.ncols() != qb.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if qa.ncols() == 0 {
        return 0.0;
    }
    // sin θ_max = ‖(I - Qa Qaᵀ) Qb‖₂
    let resid = &qb - &qa * (qa.transpose() * &qb);
    let s = singular_values(&resid)
        .into_iter()
        .fold(0.0, f64::max)
        .min(1.0);
    s.asin()
}

pub(crate) fn solve(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    what: &'static str,
) -> Result<DVector<f64>> {
    m.clone().lu().solve(rhs).ok_or(Error::Singular(what))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(s: &RealSchur) -> DMatrix<f64> {
        &s.q * &s.t * s.q.transpose()
    }

    #[test]
    fn reorder_preserves_similarity_and_moves_clusters() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, 2.0, 0.3, 0.1, //
                -2.0, -1.0, 0.5, 0.2, //
                0.0, 0.0, 3.0, 1.0, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        let mut s = RealSchur::new(&a).unwrap();
        let keys: Vec<usize> = s
            .blocks
            .iter()
            .map(|&b| {
                let re = s.block_eigenvalues(b)[0].re;
                if re.abs() < 1e-8 {
                    0
                } else if re > 0.0 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let sorted = s.reorder(&keys).unwrap();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        assert!((reconstruct(&s) - &a).amax() < 1e-12);
        assert!((s.q.transpose() * &s.q - DMatrix::identity(4, 4)).amax() < 1e-13);
        let first = s.block_eigenvalues(s.blocks[0]);
        assert!(first[0].norm() < 1e-12);
        let last = s.block_eigenvalues(*s.blocks.last().unwrap());
        assert_eq!(last.len(), 2);
        assert!((last[0].re + 1.0).abs() < 1e-10 && (last[0].im.abs() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sylvester_matches_residual() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let b = DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.5, -2.0, -1.0, 0.2, 0.0, 0.0, -4.0]);
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 2.0, -1.0, 3.0, 1.0]);
        let blocks = [Block { start: 0, size: 2 }, Block { start: 2, size: 1 }];
        let x = solve_sylvester(&a, &b, &blocks, &c).unwrap();
        assert!((&a * &x - &x * &b - &c).amax() < 1e-12);
    }

    #[test]
    fn phi_weights_scalar_closed_form() {
        let y = DMatrix::from_element(1, 1, -0.7);
        let h = 0.3;
        let (e, pa, pb) = phi_weights(&y, h);
        let l = -0.7f64;
        assert!((e[(0, 0)] - (l * h).exp()).abs() < 1e-15);
        assert!((pa[(0, 0)] - ((l * h).exp() - 1.0) / l).abs() < 1e-14);
        // (1/h) ∫₀ʰ e^{l(h-s)} s ds = (e^{lh} - 1 - lh) / (l² h)
        let exact = ((l * h).exp() - 1.0 - l * h) / (l * l * h);
        assert!((pb[(0, 0)] - exact).abs() < 1e-14);
    }

    #[test]
    fn principal_angle_of_rotated_line() {
        let a = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let th = 0.01f64;
        let b = DMatrix::from_column_slice(2, 1, &[th.cos(), th.sin()]);
        assert!((max_principal_angle(&a, &b) - th).abs() < 1e-12);
    }
}
