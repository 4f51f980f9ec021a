//! Horodecki bound and the explicit CHSH functional for pseudo-spin
//! correlation matrices.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::UnitSphere;

use crate::error::{Error, Result};
use crate::fock::CorrelationMatrix;

pub type Vec3 = [f64; 3];

/// Sweep cap of the cyclic Jacobi solver.
const JACOBI_SWEEPS: usize = 50;

/// Tolerance on `|v| = 1` for measurement directions.
const UNIT_TOL: f64 = 1e-12;

/// Alice's `a, a'` and Bob's `b, b'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub a: Vec3,
    pub a_prime: Vec3,
    pub b: Vec3,
    pub b_prime: Vec3,
}

impl MeasurementSettings {
    pub fn new(a: Vec3, a_prime: Vec3, b: Vec3, b_prime: Vec3) -> Result<Self> {
        let s = Self { a, a_prime, b, b_prime };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("a'", self.a_prime), ("b", self.b), ("b'", self.b_prime)] {
            let n = norm(v);
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::Domain(format!("setting {name} has norm {n}, expected 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorodeckiResult {
    pub bmax: f64,
    /// Largest eigenvalue of `VᵀV`.
    pub u: f64,
    /// Second largest eigenvalue of `VᵀV`.
    pub u_prime: f64,
    /// All three eigenvalues, descending.
    pub spectrum: [f64; 3],
    pub settings: MeasurementSettings,
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn mat_vec(m: &[[f64; 3]; 3], x: Vec3) -> Vec3 {
    [dot(m[0], x), dot(m[1], x), dot(m[2], x)]
}

/// `aᵀ V b`
fn bilinear(v: &CorrelationMatrix, a: Vec3, b: Vec3) -> f64 {
    dot(a, mat_vec(&v.v, b))
}

/// Cyclic Jacobi for a symmetric 3×3 matrix. Returns eigenvalues in
/// descending order and the matching unit eigenvectors, each oriented so
/// its first non-negligible component is positive.
pub fn symmetric_eigen3(m: [[f64; 3]; 3]) -> ([f64; 3], [Vec3; 3]) {
    let mut a = m;
    let mut q = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..JACOBI_SWEEPS {
        let off = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        let scale = a[0][0].powi(2) + a[1][1].powi(2) + a[2][2].powi(2);
        if off == 0.0 || off <= f64::EPSILON.powi(2) * scale * 1e-4 {
            break;
        }
        for (p, r) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][r] == 0.0 {
                continue;
            }
            let theta = (a[r][r] - a[p][p]) / (2.0 * a[p][r]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // A <- Jᵀ A J on rows/cols p, r
            for k in 0..3 {
                let (akp, akr) = (a[k][p], a[k][r]);
                a[k][p] = c * akp - s * akr;
                a[k][r] = s * akp + c * akr;
            }
            for k in 0..3 {
                let (apk, ark) = (a[p][k], a[r][k]);
                a[p][k] = c * apk - s * ark;
                a[r][k] = s * apk + c * ark;
            }
            for row in q.iter_mut() {
                let (qp, qr) = (row[p], row[r]);
                row[p] = c * qp - s * qr;
                row[r] = s * qp + c * qr;
            }
        }
    }
    let mut order = [0, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (slot, &i) in order.iter().enumerate() {
        values[slot] = a[i][i];
        let mut v = [q[0][i], q[1][i], q[2][i]];
        if let Some(&lead) = v.iter().find(|x| x.abs() > 1e-12) {
            if lead < 0.0 {
                v = scale(v, -1.0);
            }
        }
        vectors[slot] = v;
    }
    (values, vectors)
}

/// Deterministic unit vector orthogonal to `x`.
fn orthogonal_unit(x: Vec3) -> Vec3 {
    let axis = (0..3).min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let proj = dot(e, x);
    let w = [e[0] - proj * x[0], e[1] - proj * x[1], e[2] - proj * x[2]];
    scale(w, 1.0 / norm(w))
}

/// `B_max = 2 sqrt(u + u')` with `u ≥ u'` the top eigenvalues of `U = VᵀV`,
/// together with settings attaining it.
///
/// Bob's pair is `cos θ c ± sin θ c⊥` with `c, c⊥` the top eigenvectors of
/// `U`; Alice's directions are the normalised images `Vc`, `Vc⊥`.
pub fn horodecki_bmax(v: &CorrelationMatrix) -> HorodeckiResult {
    let mut u = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            u[i][j] = (0..3).map(|k| v.v[k][i] * v.v[k][j]).sum();
        }
    }
    let (values, vectors) = symmetric_eigen3(u);
    let spectrum = values.map(|x| x.max(0.0));
    let (c, c_perp) = (vectors[0], vectors[1]);
    let (img, img_perp) = (mat_vec(&v.v, c), mat_vec(&v.v, c_perp));
    let (n1, n2) = (norm(img), norm(img_perp));
    let h = n1.hypot(n2);
    let (cos, sin) = if h > 0.0 { (n1 / h, n2 / h) } else { (1.0, 0.0) };
    let b = [cos * c[0] + sin * c_perp[0], cos * c[1] + sin * c_perp[1], cos * c[2] + sin * c_perp[2]];
    let b_prime = [cos * c[0] - sin * c_perp[0], cos * c[1] - sin * c_perp[1], cos * c[2] - sin * c_perp[2]];
    let a = if n1 > 0.0 { scale(img, 1.0 / n1) } else { [1.0, 0.0, 0.0] };
    let a_prime = if n2 > 0.0 { scale(img_perp, 1.0 / n2) } else { orthogonal_unit(a) };
    let settings = MeasurementSettings {
        a,
        a_prime,
        b: scale(b, 1.0 / norm(b)),
        b_prime: scale(b_prime, 1.0 / norm(b_prime)),
    };
    HorodeckiResult {
        bmax: 2.0 * (spectrum[0] + spectrum[1]).sqrt(),
        u: spectrum[0],
        u_prime: spectrum[1],
        spectrum,
        settings,
    }
}

/// `|aᵀVb + a'ᵀVb + aᵀVb' - a'ᵀVb'|`.
pub fn chsh_value(v: &CorrelationMatrix, settings: &MeasurementSettings) -> Result<f64> {
    settings.validate()?;
    let s = settings;
    Ok((bilinear(v, s.a, s.b) + bilinear(v, s.a_prime, s.b) + bilinear(v, s.a, s.b_prime)
        - bilinear(v, s.a_prime, s.b_prime))
    .abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityReport {
    pub bound: f64,
    pub max_found: f64,
    /// `bound - max_found`; negative means the bound was beaten.
    pub gap: f64,
    /// Samples exceeding the bound by more than 1e-9.
    pub violations: usize,
    pub trials: usize,
}

impl OptimalityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Random search over setting quadruples, checked against [`horodecki_bmax`].
pub fn verify_settings_optimal(v: &CorrelationMatrix, trials: usize, seed: u64) -> Result<OptimalityReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let bound = horodecki_bmax(v).bmax;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut draw = || -> Vec3 { rng.sample(UnitSphere) };
    let mut max_found = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..trials {
        let s = MeasurementSettings { a: draw(), a_prime: draw(), b: draw(), b_prime: draw() };
        let value = chsh_value(v, &s)?;
        if value > bound + 1e-9 {
            violations += 1;
        }
        max_found = max_found.max(value);
    }
    Ok(OptimalityReport { bound, max_found, gap: bound - max_found, violations, trials })
}
