//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::new(phi.cos(), phi.sin())
}

fn split(a: &CMat) -> (DMatrix<f64>, DMatrix<f64>) {
    (a.map(|z| z.re), a.map(|z| z.im))
}

/// Complex product through four real GEMMs; nalgebra's generic complex
/// kernel is an order of magnitude slower than its real one.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMat::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    matmul(a, b) - matmul(b, a)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn hermitian_deviation(a: &CMat) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// Leading `n x n` block.
pub fn block(a: &CMat, n: usize) -> CMat {
    a.view((0, 0), (n, n)).into_owned()
}

pub fn rel_frobenius(a: &CMat, reference: &CMat) -> f64 {
    (a - reference).norm() / reference.norm()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let e = hermitize(a).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn eigvalsh(a: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(a).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `exp(-i s H)` for Hermitian `H`.
pub fn expm_herm(h: &CMat, s: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let ph = cis(-s * v);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= ph;
        }
    }
    matmul(&scaled, &vecs.adjoint())
}

/// Eigenphases of a unitary matrix, returned as `(arg(eigenvalue), vector)`.
///
/// A Cayley transform maps the unitary to a Hermitian matrix whose
/// eigenvectors are shared; phases are then read back from Rayleigh
/// quotients, which are second-order accurate in the eigenvector error.
pub fn unitary_eigen(u: &CMat) -> (Vec<f64>, CMat) {
    let n = u.nrows();
    let id = CMat::identity(n, n);
    let mut best: Option<(f64, Vec<f64>, CMat)> = None;
    for &shift in &[0.6180339887, 2.399963, -1.1234, 0.3141] {
        let v = u * cis(shift);
        let denom = &id + &v;
        let Some(inv) = denom.clone().try_inverse() else {
            continue;
        };
        let cay = matmul(&(&id - &v), &inv) * I;
        let (_, vecs) = eigh(&cay);
        let uv = matmul(u, &vecs);
        let mut phases = Vec::with_capacity(n);
        let mut resid: f64 = 0.0;
        for j in 0..n {
            let col = vecs.column(j);
            let mu = col.dotc(&uv.column(j));
            phases.push(mu.arg());
            resid = resid.max((uv.column(j) - col * mu).norm());
        }
        let better = best.as_ref().is_none_or(|(r, _, _)| resid < *r);
        if better {
            best = Some((resid, phases, vecs));
        }
        if resid < 1e-10 {
            break;
        }
    }
    let (_, phases, vecs) = best.expect("unitary_eigen: all Cayley shifts singular");
    (phases, vecs)
}
