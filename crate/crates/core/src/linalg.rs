//! Small dense helpers over flat `f64` slices.

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `out += mat · v` for a row-major `rows × cols` matrix.
pub(crate) fn mat_vec_acc(mat: &[f64], rows: usize, cols: usize, v: &[f64], out: &mut [f64]) {
    for i in 0..rows {
        let row = &mat[i * cols..(i + 1) * cols];
        out[i] += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}
