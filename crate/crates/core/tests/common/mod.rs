//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's arithmetic paths.
#![allow(dead_code)]

use num_complex::Complex64;

/// Display spellings, parsed here with floating point and `2 = √2`.
pub const LABELS: [&str; 33] = [
    "001", "010", "100", "011", "01m1", "101", "10m1", "110", "1m10", "012", "0m12", "021", "02m1", "102",
    "m102", "201", "20m1", "120", "m120", "210", "2m10", "112", "m112", "1m12", "m1m12", "121", "12m1", "m121",
    "m12m1", "211", "21m1", "2m11", "2m1m1",
];

pub fn float_ray(label: &str) -> [f64; 3] {
    let mut out = Vec::new();
    let mut neg = false;
    for ch in label.chars() {
        if ch == 'm' {
            neg = true;
            continue;
        }
        let d = ch.to_digit(10).unwrap() as f64;
        let v = if d == 2.0 { 2f64.sqrt() } else { d };
        out.push(if neg { -v } else { v });
        neg = false;
    }
    let n = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    [out[0] / n, out[1] / n, out[2] / n]
}

pub fn float_orthogonal(a: usize, b: usize) -> bool {
    let (x, y) = (float_ray(LABELS[a]), float_ray(LABELS[b]));
    (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).abs() < 1e-9
}

/// All orthogonal pairs by brute force over the 528 unordered pairs.
pub fn brute_pairs() -> Vec<[usize; 2]> {
    let mut v = Vec::new();
    for i in 0..33 {
        for j in i + 1..33 {
            if float_orthogonal(i, j) {
                v.push([i, j]);
            }
        }
    }
    v
}

pub fn brute_bases() -> Vec<[usize; 3]> {
    let mut v = Vec::new();
    for i in 0..33 {
        for j in i + 1..33 {
            for k in j + 1..33 {
                if float_orthogonal(i, j) && float_orthogonal(i, k) && float_orthogonal(j, k) {
                    v.push([i, j, k]);
                }
            }
        }
    }
    v
}

pub fn index(label: &str) -> usize {
    LABELS.iter().position(|l| *l == label).unwrap()
}

/// `|0,u⟩` in the spherical z-basis `(|+1⟩, |0⟩, |−1⟩)`, from the
/// Cartesian identity `|0,u⟩ ∝ u`.
pub fn zero_ket(u: [f64; 3]) -> [Complex64; 3] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        Complex64::new(-u[0] * s, u[1] * s),
        Complex64::new(u[2], 0.0),
        Complex64::new(u[0] * s, u[1] * s),
    ]
}

pub type M3 = [[Complex64; 3]; 3];

pub fn p0(u: [f64; 3]) -> M3 {
    let k = zero_ket(u);
    let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = k[i] * k[j].conj();
        }
    }
    m
}

pub fn p1(u: [f64; 3]) -> M3 {
    let mut m = p0(u);
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) } - m[i][j];
        }
    }
    m
}

pub fn matvec(m: &M3, v: &[Complex64; 3]) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

/// Sum of full path states over every completion of the free rays of a
/// truncated chain. `fixed[i]` is `Some(green)` for fixed chain rays.
pub fn brute_event_state(chain: &[usize], fixed: &[Option<bool>], psi: [Complex64; 3]) -> [Complex64; 3] {
    let free: Vec<usize> = (0..chain.len()).filter(|&p| fixed[p].is_none()).collect();
    let mut total = [Complex64::new(0.0, 0.0); 3];
    for m in 0u32..(1 << free.len()) {
        let mut colours: Vec<bool> = fixed.iter().map(|f| f.unwrap_or(false)).collect();
        for (k, &p) in free.iter().enumerate() {
            colours[p] = m >> k & 1 == 1;
        }
        let mut v = psi;
        for (p, &ray) in chain.iter().enumerate() {
            let u = float_ray(LABELS[ray]);
            let proj = if colours[p] { p0(u) } else { p1(u) };
            v = matvec(&proj, &v);
        }
        for i in 0..3 {
            total[i] += v[i];
        }
    }
    total
}
