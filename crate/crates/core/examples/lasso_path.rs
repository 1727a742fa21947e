//! Exact LASSO regularization path with its breakpoints.

use regtune::estimators::{lasso_path, solve_elastic_net};
use regtune::linalg::{Matrix, Vector};

fn main() -> regtune::Result<()> {
    #[rustfmt::skip]
    let x = Matrix::from_row_slice(3, 6, &[
        1.0, 0.5, -0.3, 0.8, 0.0, 1.2,
        0.2, -1.0, 0.7, 0.1, 0.9, -0.4,
        -0.6, 0.3, 0.4, -1.1, 0.5, 0.2,
    ]);
    let y = Vector::from_vec(vec![1.5, -0.2, 0.3, 1.1, 0.4, 0.9]);
    let lambda_max = 2.0 * (&x * &y).amax();
    let path = lasso_path(&x, &y, 0.0, 1e-3, lambda_max)?;
    println!("lambda_max = {lambda_max:.4}, {} segments", path.len());
    for s in &path {
        println!("[{:.4}, {:.4}]  active {:?}", s.lambda_lo, s.lambda_hi, s.active);
    }
    let mid = &path[path.len() / 2];
    let lam = 0.5 * (mid.lambda_lo + mid.lambda_hi);
    let direct = solve_elastic_net(&x, &y, lam, 0.0)?;
    let from_path = mid.weights_at(lam);
    let diff = (Vector::from_vec(direct.w_hat) - from_path).amax();
    println!("path vs direct solve at lambda = {lam:.4}: {diff:.2e}");
    Ok(())
}
