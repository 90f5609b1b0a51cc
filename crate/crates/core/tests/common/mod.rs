//! Independent Werner-state oracle: concurrence from the eigenvalues of the
//! full 4×4 density matrix.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

pub fn werner(v: f64) -> Matrix4<f64> {
    let phi = Vector4::new(1.0, 0.0, 0.0, 1.0) / 2f64.sqrt();
    Matrix4::identity() * ((1.0 - v) / 4.0) + phi * phi.transpose() * v
}

fn sqrt_psd(m: &Matrix4<f64>) -> Matrix4<f64> {
    let eig = SymmetricEigen::new(*m);
    let roots = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

pub fn oracle_concurrence(rho: &Matrix4<f64>) -> f64 {
    // σy⊗σy for a real state
    #[rustfmt::skip]
    let yy = Matrix4::new(
        0.0, 0.0, 0.0, -1.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 1.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0,
    );
    let flipped = yy * rho * yy;
    let s = sqrt_psd(rho);
    let r = s * flipped * s;
    let r = (r + r.transpose()) / 2.0;
    let mut lambda: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

pub fn oracle_ef(c: f64) -> f64 {
    let x = (1.0 + (1.0 - c * c).sqrt()) / 2.0;
    let h = |p: f64| {
        if p <= 0.0 || p >= 1.0 {
            0.0
        } else {
            -p * p.log2()
        }
    };
    h(x) + h(1.0 - x)
}
