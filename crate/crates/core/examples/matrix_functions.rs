//! Spectral calculus on symmetric matrices: eigendecomposition, the truncation
//! function applied to a matrix, and spectral soft-thresholding.

use heavytail::symmat::{
    eigendecompose, matrix_function, nuclear_norm, operator_norm, spectral_soft_threshold, sqrt_psd, SymmetricMatrix,
};
use heavytail::truncation::psi;
use ndarray::array;

fn main() -> heavytail::Result<()> {
    let a = SymmetricMatrix::new(array![[4.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 0.5]])?;
    let eig = eigendecompose(&a)?;
    println!("eigenvalues {:.4}", eig.values);
    println!("‖A‖ = {:.4}, ‖A‖₁ = {:.4}", operator_norm(&a)?, nuclear_norm(&a)?);

    // ψ flattens large eigenvalues and keeps small ones almost unchanged
    let t = matrix_function(&a, psi)?;
    println!("ψ(A) eigenvalues {:.4}", eigendecompose(&t)?.values);

    let st = spectral_soft_threshold(&a, 1.0)?;
    println!("soft threshold at 1/2: eigenvalues {:.4}", eigendecompose(&st)?.values);

    let psd = SymmetricMatrix::new(array![[2.0, 0.5], [0.5, 1.0]])?;
    let root = sqrt_psd(&psd)?;
    println!("sqrt(S)² =\n{:.6}", root.as_array().dot(root.as_array()));
    Ok(())
}
