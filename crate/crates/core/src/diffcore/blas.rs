//! Thin wrapper over the system CBLAS dgemm. Row-major throughout.

use std::os::raw::c_int;

const CBLAS_ROW_MAJOR: c_int = 101;
const CBLAS_NO_TRANS: c_int = 111;
const CBLAS_TRANS: c_int = 112;

extern "C" {
    fn cblas_dgemm(
        order: c_int,
        trans_a: c_int,
        trans_b: c_int,
        m: c_int,
        n: c_int,
        k: c_int,
        alpha: f64,
        a: *const f64,
        lda: c_int,
        b: *const f64,
        ldb: c_int,
        beta: f64,
        c: *mut f64,
        ldc: c_int,
    );

    fn openblas_set_num_threads(n: c_int);
}

/// Pin the BLAS pool to one thread. Run-level parallelism happens across
/// seeds, and single-threaded kernels keep results reproducible.
pub fn set_single_threaded() {
    unsafe { openblas_set_num_threads(1) }
}

/// c = op(a) * op(b) where a is stored (ar x ac) row-major, b is (br x bc),
/// and op transposes when the corresponding flag is set.
#[allow(clippy::too_many_arguments)]
pub fn dgemm(
    a: &[f64],
    ar: usize,
    ac: usize,
    ta: bool,
    b: &[f64],
    br: usize,
    bc: usize,
    tb: bool,
    c: &mut [f64],
) {
    let (m, k) = if ta { (ac, ar) } else { (ar, ac) };
    let (kb, n) = if tb { (bc, br) } else { (br, bc) };
    assert_eq!(k, kb, "dgemm inner dimensions disagree: {k} vs {kb}");
    assert_eq!(c.len(), m * n, "dgemm output buffer has wrong length");
    assert_eq!(a.len(), ar * ac);
    assert_eq!(b.len(), br * bc);
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c.fill(0.0);
        return;
    }
    unsafe {
        cblas_dgemm(
            CBLAS_ROW_MAJOR,
            if ta { CBLAS_TRANS } else { CBLAS_NO_TRANS },
            if tb { CBLAS_TRANS } else { CBLAS_NO_TRANS },
            m as c_int,
            n as c_int,
            k as c_int,
            1.0,
            a.as_ptr(),
            ac as c_int,
            b.as_ptr(),
            bc as c_int,
            0.0,
            c.as_mut_ptr(),
            n as c_int,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &[f64], ar: usize, ac: usize, ta: bool, b: &[f64], br: usize, bc: usize, tb: bool) -> Vec<f64> {
        let (m, k) = if ta { (ac, ar) } else { (ar, ac) };
        let n = if tb { br } else { bc };
        let get_a = |i: usize, p: usize| if ta { a[p * ac + i] } else { a[i * ac + p] };
        let get_b = |p: usize, j: usize| if tb { b[j * bc + p] } else { b[p * bc + j] };
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for p in 0..k {
                    s += get_a(i, p) * get_b(p, j);
                }
                c[i * n + j] = s;
            }
        }
        c
    }

    #[test]
    fn matches_naive_all_transpose_combos() {
        let a: Vec<f64> = (0..12).map(|i| i as f64 * 0.37 - 2.0).collect(); // 3x4
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect(); // 4x5 or 5x4
        for (ta, tb, ar, ac, br, bc) in [
            (false, false, 3usize, 4usize, 4usize, 5usize),
            (true, false, 4, 3, 4, 5),
            (false, true, 3, 4, 5, 4),
            (true, true, 4, 3, 5, 4),
        ] {
            let expect = naive(&a, ar, ac, ta, &b, br, bc, tb);
            let mut c = vec![0.0; expect.len()];
            dgemm(&a, ar, ac, ta, &b, br, bc, tb, &mut c);
            for (x, y) in c.iter().zip(&expect) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn zero_inner_dim_zeroes_output() {
        let mut c = vec![7.0; 6];
        dgemm(&[], 2, 0, false, &[], 0, 3, false, &mut c);
        assert!(c.iter().all(|&v| v == 0.0));
    }
}
