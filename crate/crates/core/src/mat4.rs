//! Small dense 4x4 helpers for the pointwise linear maps cached per grid point.

pub type Mat4 = [[f64; 4]; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn matmul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..4 {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

pub fn matvec(a: &Mat4, v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

pub fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i];
        }
    }
    out
}

/// Gauss-Jordan inverse with partial pivoting; None when singular.
pub fn invert(a: &Mat4) -> Option<Mat4> {
    let mut m = *a;
    let mut inv = IDENTITY;
    for col in 0..4 {
        let mut pivot = col;
        for r in (col + 1)..4 {
            if m[r][col].abs() > m[pivot][col].abs() {
                pivot = r;
            }
        }
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let d = m[col][col];
        for j in 0..4 {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..4 {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

pub fn det(a: &Mat4) -> f64 {
    // cofactor expansion along the first row via 3x3 minors
    let m = a;
    let minor = |r: [usize; 3], c: [usize; 3]| -> f64 {
        m[r[0]][c[0]] * (m[r[1]][c[1]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[1]])
            - m[r[0]][c[1]] * (m[r[1]][c[0]] * m[r[2]][c[2]] - m[r[1]][c[2]] * m[r[2]][c[0]])
            + m[r[0]][c[2]] * (m[r[1]][c[0]] * m[r[2]][c[1]] - m[r[1]][c[1]] * m[r[2]][c[0]])
    };
    m[0][0] * minor([1, 2, 3], [1, 2, 3]) - m[0][1] * minor([1, 2, 3], [0, 2, 3])
        + m[0][2] * minor([1, 2, 3], [0, 1, 3])
        - m[0][3] * minor([1, 2, 3], [0, 1, 2])
}

/// Symmetric positive definite test via Sylvester's criterion.
pub fn is_spd(a: &Mat4, sym_tol: f64) -> bool {
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (a[i][j] - a[j][i]).abs() > sym_tol {
                return false;
            }
        }
    }
    if a[0][0] <= 0.0 {
        return false;
    }
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if m2 <= 0.0 {
        return false;
    }
    let m3 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if m3 <= 0.0 {
        return false;
    }
    det(a) > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invert_roundtrip() {
        let a: Mat4 = [
            [2.0, 1.0, 0.0, 0.5],
            [0.0, 1.5, -1.0, 0.0],
            [1.0, 0.0, 3.0, 0.2],
            [0.0, -0.5, 0.0, 1.0],
        ];
        let inv = invert(&a).unwrap();
        let p = matmul(&a, &inv);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn det_of_identity() {
        assert_eq!(det(&IDENTITY), 1.0);
        assert!(is_spd(&IDENTITY, 1e-12));
    }
}
