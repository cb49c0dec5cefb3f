//! Dense kernels: GEMM, im2col and 2x2 max-pooling. All buffers are
//! row-major `f64`; feature maps are channel-major `c x h x w`.

/// `C = op(A) op(B) + beta * C` with `op(A)` m x k and `op(B)` k x n.
/// `ta` means `A` is stored k x m; `tb` means `B` is stored n x k.
#[allow(clippy::too_many_arguments)]
pub fn gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, beta: f64, c: &mut [f64]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every index the strides can reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Columns of every `k x k` patch: `(c*k*k) x (oh*ow)`.
pub fn im2col(x: &[f64], (c, h, w): (usize, usize, usize), k: usize, pad: usize) -> (Vec<f64>, usize, usize) {
    let oh = h + 2 * pad + 1 - k;
    let ow = w + 2 * pad + 1 - k;
    let cols = oh * ow;
    let mut out = vec![0.0; c * k * k * cols];
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = (ch * k + ky) * k + kx;
                let dst = &mut out[row * cols..(row + 1) * cols];
                for oy in 0..oh {
                    let iy = (oy + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src = &x[(ch * h + iy as usize) * w..][..w];
                    for ox in 0..ow {
                        let ix = (ox + kx) as isize - pad as isize;
                        if ix >= 0 && ix < w as isize {
                            dst[oy * ow + ox] = src[ix as usize];
                        }
                    }
                }
            }
        }
    }
    (out, oh, ow)
}

/// Adjoint of [`im2col`]: scatter-add columns back onto the input.
pub fn col2im(col: &[f64], (c, h, w): (usize, usize, usize), k: usize, pad: usize) -> Vec<f64> {
    let oh = h + 2 * pad + 1 - k;
    let ow = w + 2 * pad + 1 - k;
    let cols = oh * ow;
    let mut dx = vec![0.0; c * h * w];
    for ch in 0..c {
        for ky in 0..k {
            for kx in 0..k {
                let row = (ch * k + ky) * k + kx;
                let src = &col[row * cols..(row + 1) * cols];
                for oy in 0..oh {
                    let iy = (oy + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst = &mut dx[(ch * h + iy as usize) * w..][..w];
                    for ox in 0..ow {
                        let ix = (ox + kx) as isize - pad as isize;
                        if ix >= 0 && ix < w as isize {
                            dst[ix as usize] += src[oy * ow + ox];
                        }
                    }
                }
            }
        }
    }
    dx
}

/// 2x2 stride-2 max-pool (odd trailing row/column dropped). Returns the
/// pooled map and, per output, the flat index of the winning input.
/// Ties go to the first cell in row-major order.
pub fn max_pool(x: &[f64], (c, h, w): (usize, usize, usize)) -> (Vec<f64>, Vec<u32>) {
    let (ph, pw) = (h / 2, w / 2);
    let mut out = Vec::with_capacity(c * ph * pw);
    let mut arg = Vec::with_capacity(c * ph * pw);
    for ch in 0..c {
        for py in 0..ph {
            for px in 0..pw {
                let mut best = (ch * h + 2 * py) * w + 2 * px;
                for (dy, dx) in [(0, 1), (1, 0), (1, 1)] {
                    let i = (ch * h + 2 * py + dy) * w + 2 * px + dx;
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                out.push(x[best]);
                arg.push(best as u32);
            }
        }
    }
    (out, arg)
}

pub fn max_unpool(grad: &[f64], arg: &[u32], input_len: usize) -> Vec<f64> {
    let mut dx = vec![0.0; input_len];
    for (g, &i) in grad.iter().zip(arg) {
        dx[i as usize] += g;
    }
    dx
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `-log softmax(z)[target]`, computed without forming the probabilities.
pub fn cross_entropy(z: &[f64], target: usize) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    lse - z[target]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_matches_naive_with_transposes() {
        let (m, k, n) = (3, 4, 2);
        let a: Vec<f64> = (0..m * k).map(|i| i as f64 * 0.5 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64).sin()).collect();
        let mut naive = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                naive[i * n + j] = (0..k).map(|p| a[i * k + p] * b[p * n + j]).sum();
            }
        }
        let mut c = vec![0.0; m * n];
        gemm(m, k, n, &a, false, &b, false, 0.0, &mut c);
        assert!(c.iter().zip(&naive).all(|(x, y)| (x - y).abs() < 1e-12));

        let at: Vec<f64> = (0..k * m).map(|i| a[(i % m) * k + i / m]).collect();
        let bt: Vec<f64> = (0..n * k).map(|i| b[(i % k) * n + i / k]).collect();
        let mut c2 = vec![1.0; m * n];
        gemm(m, k, n, &at, true, &bt, true, 1.0, &mut c2);
        assert!(c2.iter().zip(&naive).all(|(x, y)| (x - 1.0 - y).abs() < 1e-12));
    }

    #[test]
    fn col2im_is_the_adjoint_of_im2col() {
        // <im2col(x), y> == <x, col2im(y)> for any x, y.
        let dims = (2, 5, 4);
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).cos()).collect();
        for pad in [0, 1] {
            let (col, _, _) = im2col(&x, dims, 3, pad);
            let y: Vec<f64> = (0..col.len()).map(|i| (i as f64 * 0.11).sin()).collect();
            let lhs: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(col2im(&y, dims, 3, pad)).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn pool_picks_maxima() {
        let x = vec![1.0, 5.0, 2.0, 0.0, 3.0, 4.0, 7.0, 1.0];
        let (p, a) = max_pool(&x, (1, 2, 4));
        assert_eq!(p, vec![5.0, 7.0]);
        assert_eq!(a, vec![1, 6]);
        assert_eq!(max_unpool(&[1.0, 2.0], &a, 8), vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn softmax_sums_to_one_and_handles_large_logits() {
        let p = softmax(&[1000.0, -1000.0]);
        assert_eq!(p, vec![1.0, 0.0]);
        let q = softmax(&[0.3, -1.2]);
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((cross_entropy(&[0.3, -1.2], 1) + q[1].ln()).abs() < 1e-12);
    }
}
