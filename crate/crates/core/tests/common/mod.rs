//! Independent reference implementations used only by the tests.

#![allow(dead_code)]

use std::io::Write;
use std::sync::{Mutex, MutexGuard};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

static SERIAL: Mutex<()> = Mutex::new(());

/// Keeps heavy or timing-sensitive tests from overlapping.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

/// Writes straight to the process stdout so the line shows up even when the
/// harness captures test output.
pub fn report(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{tag}] criterion {criterion}: {detail}");
    let _ = out.flush();
}

pub fn gaussian<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Modified Gram-Schmidt on a Gaussian draw.
pub fn gram_schmidt_orthonormal<R: Rng>(m: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let mut q = gaussian(m, d, rng);
        let mut ok = true;
        for j in 0..d {
            for i in 0..j {
                let proj = q.column(i).dot(&q.column(j));
                let qi = q.column(i).into_owned();
                let mut cj = q.column_mut(j);
                cj.axpy(-proj, &qi, 1.0);
            }
            let norm = q.column(j).norm();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            q.column_mut(j).scale_mut(1.0 / norm);
        }
        if ok {
            return q;
        }
    }
}

/// Minimizer of `||u - v||^2` over `v >= 0`, `||v||_0 <= d0`, by enumerating
/// every support of size at most `d0`.
pub fn brute_force_nonneg_l0(u: &[f64], d0: usize) -> Vec<f64> {
    let d = u.len();
    let mut best_cost = f64::INFINITY;
    let mut best = vec![0.0; d];
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize > d0 {
            continue;
        }
        let v: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { u[i].max(0.0) } else { 0.0 }).collect();
        let cost: f64 = u.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum();
        if cost < best_cost {
            best_cost = cost;
            best = v;
        }
    }
    best
}

/// Calls `f` on every permutation of `0..k` (Heap's algorithm).
pub fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..k).collect();
    let mut c = vec![0; k];
    f(&p);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Best matched fraction over all relabelings `label -> perm[label]`.
/// Labels must lie in `0..k`.
pub fn exhaustive_accuracy(labels: &[usize], truth: &[usize], k: usize) -> f64 {
    let mut best = 0;
    for_each_permutation(k, |perm| {
        let hits = labels.iter().zip(truth).filter(|(&l, &t)| perm[l] == t).count();
        best = best.max(hits);
    });
    best as f64 / labels.len() as f64
}

/// Angle between two lines through the origin, in radians.
pub fn line_angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot.abs() / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Largest principal angle between the column spans of two orthonormal
/// matrices.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let sv = (a.transpose() * b).singular_values();
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.clamp(-1.0, 1.0).acos()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}
