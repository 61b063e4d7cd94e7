//! Matrix exponential of a real 4×4 matrix by degree-13 Padé approximation
//! with scaling and squaring.

use nalgebra::Matrix4;

const B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &Matrix4<f64>) -> f64 {
    (0..4).map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^A`.
pub fn expm_pade13(a: &Matrix4<f64>) -> Matrix4<f64> {
    let n1 = norm1(a);
    if n1 == 0.0 {
        return Matrix4::identity();
    }
    let s = if n1 > THETA13 { (n1 / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a / 2f64.powi(s);
    let id = Matrix4::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner = a6 * (a6 * B[13] + a4 * B[11] + a2 * B[9]) + a6 * B[7] + a4 * B[5] + a2 * B[3] + id * B[1];
    let u = a * u_inner;
    let v = a6 * (a6 * B[12] + a4 * B[10] + a2 * B[8]) + a6 * B[6] + a4 * B[4] + a2 * B[2] + id * B[0];
    let p = v + u;
    let q = v - u;
    let mut r = q.lu().solve(&p).unwrap_or_else(|| q.try_inverse().unwrap_or(id) * p);
    for _ in 0..s {
        r = r * r;
    }
    r
}
