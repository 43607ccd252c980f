//! Dense eigensolver for general complex matrices.
//!
//! Pipeline: diagonal balancing, Householder reduction to upper Hessenberg
//! form, implicitly shifted single-shift QR with deflation. Eigenvectors come
//! either from back-substitution on the Schur form ([`eig_dense`]) or, when
//! only a few are needed, from inverse iteration on the Hessenberg matrix
//! ([`HessenbergEigen::eigenvector`]).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// QR sweeps allowed per matrix dimension before giving up.
const SWEEPS_PER_DIM: usize = 30;

#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<Complex64>,
    /// Column `j` is the right eigenvector for `values[j]`, scaled so that
    /// its largest entry has unit magnitude.
    pub vectors: CMatrix,
}

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Returns the scale factors `d` with `B = D^-1 A D`.
fn balance(a: &mut CMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.rows();
    let mut scale = vec![1.0; n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += cabs1(a[(j, i)]);
                    r += cabs1(a[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                scale[i] *= f;
                for z in a.row_mut(i) {
                    *z /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// Elementary reflector `I - tau v v^H` with `v[0] = 1`.
#[derive(Debug, Clone)]
struct Reflector {
    v: Vec<Complex64>,
    tau: Complex64,
}

impl Reflector {
    /// Builds the reflector mapping `x` onto a multiple of `e_1`; returns it
    /// with the resulting leading value.
    fn annihilate(x: &[Complex64]) -> (Self, Complex64) {
        let alpha = x[0];
        let xnorm = x[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut v = vec![ZERO; x.len()];
        v[0] = ONE;
        if xnorm == 0.0 && alpha.im == 0.0 {
            return (Self { v, tau: ZERO }, alpha);
        }
        let beta = -alpha.re.signum() * alpha.norm().hypot(xnorm);
        let beta = if beta == 0.0 { -xnorm } else { beta };
        let tau = (beta - alpha) / beta;
        let inv = ONE / (alpha - beta);
        for (vi, &xi) in v[1..].iter_mut().zip(&x[1..]) {
            *vi = xi * inv;
        }
        (Self { v, tau }, Complex64::new(beta, 0.0))
    }

    /// `y <- (I - tau v v^H) y` on the trailing slice starting at `offset`.
    fn apply(&self, y: &mut [Complex64], offset: usize) {
        if self.tau == ZERO {
            return;
        }
        let tail = &mut y[offset..offset + self.v.len()];
        let dot: Complex64 = self.v.iter().zip(tail.iter()).map(|(v, y)| v.conj() * y).sum();
        let f = self.tau * dot;
        for (yi, vi) in tail.iter_mut().zip(&self.v) {
            *yi -= f * vi;
        }
    }
}

/// Reduces `a` in place to upper Hessenberg form `Q^H A Q`, returning the
/// reflectors whose product is `Q`.
fn hessenberg(a: &mut CMatrix) -> Vec<Reflector> {
    let n = a.rows();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut w = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let (refl, beta) = Reflector::annihilate(&x);
        a[(k + 1, k)] = beta;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
        if refl.tau != ZERO {
            let v = &refl.v;
            let tau = refl.tau;
            // Left: A <- (I - conj(tau) v v^H) A on rows k+1.., cols k+1..
            let w = &mut w[k + 1..n];
            w.iter_mut().for_each(|x| *x = ZERO);
            for (l, &vl) in v.iter().enumerate() {
                let cv = vl.conj();
                for (wj, &aij) in w.iter_mut().zip(&a.row(k + 1 + l)[k + 1..]) {
                    *wj += cv * aij;
                }
            }
            let ct = tau.conj();
            for (l, &vl) in v.iter().enumerate() {
                let f = ct * vl;
                for (aij, &wj) in a.row_mut(k + 1 + l)[k + 1..].iter_mut().zip(w.iter()) {
                    *aij -= f * wj;
                }
            }
            // Right: A <- A (I - tau v v^H) on all rows, cols k+1..
            for i in 0..n {
                let row = &mut a.row_mut(i)[k + 1..];
                let s: Complex64 = row.iter().zip(v).map(|(x, y)| x * y).sum();
                let f = s * tau;
                for (x, vl) in row.iter_mut().zip(v) {
                    *x -= f * vl.conj();
                }
            }
        }
        reflectors.push(refl);
    }
    reflectors
}

/// `(c, s, r)` with real `c` such that `[c s; -conj(s) c] [f; g] = [r; 0]`.
#[inline]
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64, Complex64) {
    if g == ZERO {
        return (1.0, ZERO, f);
    }
    if f == ZERO {
        let gn = g.norm();
        return (0.0, g.conj() / gn, Complex64::new(gn, 0.0));
    }
    let fn_ = f.norm();
    let norm = fn_.hypot(g.norm());
    let phase = f / fn_;
    (fn_ / norm, phase * g.conj() / norm, phase * norm)
}

/// Wilkinson-type shift from the trailing 2x2 block ending at `i`.
fn wilkinson_shift(h: &CMatrix, i: usize) -> Complex64 {
    let mut t = h[(i, i)];
    let u = h[(i - 1, i)].sqrt() * h[(i, i - 1)].sqrt();
    let s = cabs1(u);
    if s != 0.0 {
        let x = 0.5 * (h[(i - 1, i - 1)] - t);
        let sx = cabs1(x);
        let s = s.max(sx);
        let mut y = s * ((x / s).powi(2) + (u / s).powi(2)).sqrt();
        if sx > 0.0 {
            let xs = x / sx;
            if xs.re * y.re + xs.im * y.im < 0.0 {
                y = -y;
            }
        }
        t -= u * (u / (x + y));
    }
    t
}

/// Shifted QR on an upper Hessenberg matrix. With `want_t` the full Schur
/// form is produced in `h`; otherwise only the active window is updated.
/// Rotations are accumulated into `z` when given.
fn hessenberg_qr(h: &mut CMatrix, mut z: Option<&mut CMatrix>, want_t: bool) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let mut values = vec![ZERO; n];
    if n == 0 {
        return Ok(values);
    }
    let ulp = f64::EPSILON;
    let safmin = f64::MIN_POSITIVE;
    let smlnum = safmin * (n as f64 / ulp);
    let budget = SWEEPS_PER_DIM * n.max(1);
    let mut sweeps = 0usize;

    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        // Look for a negligible subdiagonal entry.
        let mut l = 0;
        let mut k = hi;
        while k > 0 {
            let sub = cabs1(h[(k, k - 1)]);
            if sub <= smlnum {
                l = k;
                break;
            }
            let mut tst = cabs1(h[(k - 1, k - 1)]) + cabs1(h[(k, k)]);
            if tst == 0.0 {
                if k >= 2 {
                    tst += h[(k - 1, k - 2)].re.abs();
                }
                if k < hi {
                    tst += h[(k + 1, k)].re.abs();
                }
            }
            if h[(k, k - 1)].re.abs() <= ulp * tst {
                let ab = sub.max(cabs1(h[(k - 1, k)]));
                let ba = sub.min(cabs1(h[(k - 1, k)]));
                let d = h[(k - 1, k - 1)] - h[(k, k)];
                let aa = cabs1(h[(k, k)]).max(cabs1(d));
                let bb = cabs1(h[(k, k)]).min(cabs1(d));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    l = k;
                    break;
                }
            }
            k -= 1;
        }
        if l > 0 {
            h[(l, l - 1)] = ZERO;
        }
        if l == hi {
            values[hi] = h[(hi, hi)];
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }

        sweeps += 1;
        if sweeps > budget {
            return Err(Error::NumericalFailure { n });
        }
        its += 1;
        let shift = if its == 10 {
            Complex64::new(0.75 * h[(l + 1, l)].re.abs(), 0.0) + h[(l, l)]
        } else if its == 20 {
            Complex64::new(0.75 * h[(hi, hi - 1)].re.abs(), 0.0) + h[(hi, hi)]
        } else {
            wilkinson_shift(h, hi)
        };

        let (row_end, col_start) = if want_t { (n, 0) } else { (hi + 1, l) };
        for k in l..hi {
            let (f, g) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s, r) = givens(f, g);
            if k > l {
                h[(k, k - 1)] = r;
                h[(k + 1, k - 1)] = ZERO;
            }
            let sc = s.conj();
            {
                let (rk, rk1) = h.two_rows_mut(k, k + 1);
                for (a, b) in rk[k..row_end].iter_mut().zip(rk1[k..row_end].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c + s * y;
                    *b = y * c - sc * x;
                }
            }
            let last = (k + 2).min(hi);
            for r in col_start..=last {
                let x = h[(r, k)];
                let y = h[(r, k + 1)];
                h[(r, k)] = x * c + y * sc;
                h[(r, k + 1)] = y * c - x * s;
            }
            if let Some(z) = z.as_deref_mut() {
                for r in 0..n {
                    let x = z[(r, k)];
                    let y = z[(r, k + 1)];
                    z[(r, k)] = x * c + y * sc;
                    z[(r, k + 1)] = y * c - x * s;
                }
            }
        }
    }
    Ok(values)
}

fn scale_to_unit_max(v: &mut [Complex64]) {
    let (idx, _) = v
        .iter()
        .enumerate()
        .fold((0, -1.0), |(bi, bm), (i, z)| {
            let m = z.norm();
            if m > bm {
                (i, m)
            } else {
                (bi, bm)
            }
        });
    let m = v[idx].norm();
    if m > 0.0 {
        v.iter_mut().for_each(|z| *z /= m);
    }
}

fn check_input(a: &CMatrix) -> Result<()> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "eigenproblem needs a non-empty square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// All eigenpairs of `a`. No ordering is guaranteed.
pub fn eig_dense(a: &CMatrix) -> Result<EigenResult> {
    check_input(a)?;
    let n = a.rows();
    let mut h = a.clone();
    let scale = balance(&mut h);
    let reflectors = hessenberg(&mut h);
    let mut z = CMatrix::identity(n);
    for (k, refl) in reflectors.iter().enumerate().rev() {
        for j in 0..n {
            let mut col = z.column(j);
            refl.apply(&mut col, k + 1);
            z.set_column(j, &col);
        }
    }
    let values = hessenberg_qr(&mut h, Some(&mut z), true)?;

    // Back-substitution on the triangular Schur factor.
    let tnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let smin = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut vectors = CMatrix::zeros(n, n);
    let mut x = vec![ZERO; n];
    for k in 0..n {
        let lambda = h[(k, k)];
        x[..=k].iter_mut().for_each(|v| *v = ZERO);
        x[k] = ONE;
        for i in (0..k).rev() {
            let s: Complex64 = h.row(i)[i + 1..=k].iter().zip(&x[i + 1..=k]).map(|(t, x)| t * x).sum();
            let mut d = h[(i, i)] - lambda;
            if d.norm() < smin {
                d = Complex64::new(smin, 0.0);
            }
            x[i] = -s / d;
            let big = x[i].norm();
            if big > 1e100 {
                x[i..=k].iter_mut().for_each(|v| *v /= big);
            }
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|r| z.row(r)[..=k].iter().zip(&x[..=k]).map(|(a, b)| a * b).sum::<Complex64>() * scale[r])
            .collect();
        scale_to_unit_max(&mut v);
        vectors.set_column(k, &v);
    }

    let result = EigenResult { values, vectors };
    debug_assert!(
        max_residual(a, &result) <= 1e-9 * a.norm_inf().max(f64::MIN_POSITIVE),
        "eigen residual {} exceeds bound for n = {n}",
        max_residual(a, &result)
    );
    Ok(result)
}

/// `max_j ||A v_j - lambda_j v_j||_inf`.
pub fn max_residual(a: &CMatrix, r: &EigenResult) -> f64 {
    (0..r.values.len())
        .map(|j| {
            let v = r.vectors.column(j);
            a.matvec(&v)
                .iter()
                .zip(&v)
                .map(|(av, v)| (av - r.values[j] * v).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Balanced Hessenberg form of a matrix, kept so that eigenvalues and a
/// chosen subset of eigenvectors can be extracted without forming the full
/// Schur basis.
#[derive(Debug, Clone)]
pub struct HessenbergEigen {
    hess: CMatrix,
    reflectors: Vec<Reflector>,
    scale: Vec<f64>,
    norm: f64,
}

impl HessenbergEigen {
    pub fn new(a: &CMatrix) -> Result<Self> {
        check_input(a)?;
        let mut hess = a.clone();
        let scale = balance(&mut hess);
        let reflectors = hessenberg(&mut hess);
        let norm = hess.norm_inf();
        Ok(Self {
            hess,
            reflectors,
            scale,
            norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.hess.rows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let mut h = self.hess.clone();
        hessenberg_qr(&mut h, None, false)
    }

    /// Right eigenvector of the original matrix for the (already computed)
    /// eigenvalue `lambda`, by inverse iteration; scaled to unit max entry.
    pub fn eigenvector(&self, lambda: Complex64) -> Vec<Complex64> {
        let n = self.dim();
        let eps = f64::EPSILON * self.norm.max(f64::MIN_POSITIVE);
        // LU of the Hessenberg matrix H - lambda I with adjacent-row pivoting.
        let mut m = self.hess.clone();
        for i in 0..n {
            m[(i, i)] -= lambda;
        }
        let mut swaps = vec![false; n];
        let mut mult = vec![ZERO; n];
        for k in 0..n.saturating_sub(1) {
            if m[(k + 1, k)].norm() > m[(k, k)].norm() {
                swaps[k] = true;
                let (rk, rk1) = m.two_rows_mut(k, k + 1);
                rk[k..].swap_with_slice(&mut rk1[k..]);
            }
            if m[(k, k)].norm() < eps {
                m[(k, k)] = Complex64::new(eps, 0.0);
            }
            let l = m[(k + 1, k)] / m[(k, k)];
            mult[k] = l;
            m[(k + 1, k)] = ZERO;
            if l != ZERO {
                let (rk, rk1) = m.two_rows_mut(k, k + 1);
                for (b, a) in rk1[k + 1..].iter_mut().zip(&rk[k + 1..]) {
                    *b -= l * a;
                }
            }
        }
        if m[(n - 1, n - 1)].norm() < eps {
            m[(n - 1, n - 1)] = Complex64::new(eps, 0.0);
        }
        let back_solve = |x: &mut [Complex64]| {
            for i in (0..n).rev() {
                let s: Complex64 = m.row(i)[i + 1..].iter().zip(&x[i + 1..]).map(|(u, x)| u * x).sum();
                x[i] = (x[i] - s) / m[(i, i)];
            }
        };

        let mut x = vec![ONE; n];
        back_solve(&mut x);
        scale_to_unit_max(&mut x);
        for _ in 0..2 {
            for k in 0..n.saturating_sub(1) {
                if swaps[k] {
                    x.swap(k, k + 1);
                }
                let t = x[k];
                x[k + 1] -= mult[k] * t;
            }
            back_solve(&mut x);
            scale_to_unit_max(&mut x);
        }

        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            refl.apply(&mut x, k + 1);
        }
        for (xi, s) in x.iter_mut().zip(&self.scale) {
            *xi *= s;
        }
        scale_to_unit_max(&mut x);
        x
    }
}
