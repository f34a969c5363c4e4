use crate::error::{invalid, Error, Result};
use crate::numeric::Matrix;

const TARGET_TOL: f64 = 1e-9;

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|z| (z - m).exp()).sum::<f64>().ln()
}

/// Row-wise softmax with the max subtracted.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = Vec::with_capacity(logits.as_slice().len());
    for row in logits.iter_rows() {
        let lse = log_sum_exp(row);
        out.extend(row.iter().map(|z| (z - lse).exp()));
    }
    Matrix::from_parts(logits.rows(), logits.cols(), out)
}

/// `−ln softmax(row)[class]`, computed as `lse(row) − row[class]`.
pub fn xent_of_row(row: &[f64], class: usize) -> f64 {
    (log_sum_exp(row) - row[class]).max(0.0)
}

/// Mean soft-label cross-entropy over rows and its gradient w.r.t. the
/// logits, `(softmax(logits) − targets) / rows`.
pub fn softmax_xent(logits: &Matrix, soft_targets: &Matrix) -> Result<(f64, Matrix)> {
    if logits.shape() != soft_targets.shape() {
        return Err(Error::Shape {
            op: "softmax_xent",
            left: logits.shape(),
            right: soft_targets.shape(),
        });
    }
    for (i, t) in soft_targets.iter_rows().enumerate() {
        let sum: f64 = t.iter().sum();
        if (sum - 1.0).abs() > TARGET_TOL || t.iter().any(|&v| v < 0.0) {
            return Err(invalid(format!("target row {i} is not on the simplex (sum {sum})")));
        }
    }
    let n = logits.rows() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.as_slice().len());
    for (z, t) in logits.iter_rows().zip(soft_targets.iter_rows()) {
        let lse = log_sum_exp(z);
        for (&zc, &tc) in z.iter().zip(t) {
            if tc != 0.0 {
                loss += tc * (lse - zc);
            }
            grad.push(((zc - lse).exp() - tc) / n);
        }
    }
    let grad = Matrix::from_parts(logits.rows(), logits.cols(), grad).ensure_finite("softmax_xent")?;
    Ok((loss / n, grad))
}
