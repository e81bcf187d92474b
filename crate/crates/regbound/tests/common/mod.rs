//! Shared test oracles: a finite-difference Gauss–Newton information
//! assembly that is independent of the analytic FIM construction, plus
//! seeded random scenario generators.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regbound::regmodel::{
    AffineTransform, ControlPointSet, CovarianceSpec, FeatureSpec, RegistrationScenario,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative Frobenius distance ‖a − b‖_F / ‖b‖_F.
pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Random SPD matrix B Bᵀ + 0.3·scale·I with entries of B in ±scale.
pub fn random_spd(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let b = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0) * scale);
    &b * b.transpose() + DMatrix::identity(d, d) * (0.3 * scale * scale)
}

/// Random well-conditioned transformation matrix.
pub fn random_transform(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    loop {
        let a: DMatrix<f64> = DMatrix::from_fn(d, d, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + rng.random_range(-0.4..0.4)
        });
        if a.determinant().abs() > 0.3 {
            return a;
        }
    }
}

/// Random general-heteroscedastic scenario (d = 2 or 3) with a feature.
pub fn random_general_scenario(d: usize, k: usize, rng: &mut ChaCha8Rng) -> RegistrationScenario<f64> {
    let a = random_transform(d, rng);
    let s = DVector::from_fn(d, |_, _| rng.random_range(-5.0..5.0));
    let points = DMatrix::from_fn(d, k, |_, _| rng.random_range(-10.0..10.0));
    let omega1 = (0..k)
        .map(|_| random_spd(d, rng.random_range(0.05..0.5), rng))
        .collect();
    let omega2 = (0..k)
        .map(|_| random_spd(d, rng.random_range(0.05..0.5), rng))
        .collect();
    let x1f = DVector::from_fn(d, |_, _| rng.random_range(-10.0..10.0));
    let omega1f = random_spd(d, rng.random_range(0.05..0.5), rng);
    RegistrationScenario::new(
        AffineTransform::new(a, s).unwrap(),
        ControlPointSet::new(points).unwrap(),
        CovarianceSpec::general(omega1, omega2).unwrap(),
        Some(FeatureSpec::new(x1f, omega1f).unwrap()),
    )
    .unwrap()
}

/// Random scenario satisfying the isotropic scaled-unitary assumption
/// (d = 2): Ω_{j,k} = η_k σ_{j,0}² I₂ and A = ςR.
pub fn random_assumption_i_scenario(k: usize, rng: &mut ChaCha8Rng) -> RegistrationScenario<f64> {
    let varsigma = rng.random_range(0.5..1.5);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let reflect = rng.random_range(0..2) == 1;
    let (sin, cos) = angle.sin_cos();
    let mut r = DMatrix::from_row_slice(2, 2, &[cos, -sin, sin, cos]);
    if reflect {
        // Flip the second column: still unitary, det −1.
        r[(0, 1)] = -r[(0, 1)];
        r[(1, 1)] = -r[(1, 1)];
    }
    let a = r * varsigma;
    let s = DVector::from_fn(2, |_, _| rng.random_range(-5000.0..5000.0));
    let points = DMatrix::from_fn(2, k, |_, _| rng.random_range(-10.0..10.0) * 1000.0);
    let eta: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    let sigma1_sq = rng.random_range(0.1..1.0);
    let sigma2_sq = rng.random_range(0.1..1.0);
    let x1f = DVector::from_fn(2, |_, _| rng.random_range(-8000.0..8000.0));
    let sigma1f_sq = rng.random_range(0.1..1.0);
    RegistrationScenario::new(
        AffineTransform::new(a, s).unwrap(),
        ControlPointSet::new(points).unwrap(),
        CovarianceSpec::isotropic_weighted(eta, sigma1_sq, sigma2_sq).unwrap(),
        Some(FeatureSpec::isotropic(x1f, sigma1f_sq).unwrap()),
    )
    .unwrap()
}

/// Parameter vector of a scenario in layout order ([θ_F;] θ_T; θ_C).
pub fn theta_of(s: &RegistrationScenario<f64>, with_feature: bool) -> DVector<f64> {
    let d = s.dim();
    let k = s.len();
    let nt = d * d + d;
    let n = if with_feature { d } else { 0 } + nt + d * k;
    let mut theta = DVector::zeros(n);
    let mut off = 0;
    if with_feature {
        let f = s.feature().expect("scenario needs a feature");
        let x2f = s.transform().map_point(f.location()).unwrap();
        for i in 0..d {
            theta[i] = x2f[i];
        }
        off = d;
    }
    let a = s.transform().matrix();
    for i in 0..d {
        for j in 0..d {
            theta[off + i * d + j] = a[(i, j)];
        }
    }
    for i in 0..d {
        theta[off + d * d + i] = s.transform().translation()[i];
    }
    for c in 0..k {
        for i in 0..d {
            theta[off + nt + c * d + i] = s.control_points().matrix()[(i, c)];
        }
    }
    theta
}

/// Stacked mean function μ(θ): per CP [x_{1,k}; A x_{1,k} + s], then
/// μ_{1,F} = A⁻¹(x_{2,F} − s) when the feature is included. Written from
/// the model definition, independent of the library's FIM assembly.
fn mean_of(theta: &DVector<f64>, d: usize, k: usize, with_feature: bool) -> DVector<f64> {
    let off = if with_feature { d } else { 0 };
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = theta[off + i * d + j];
        }
    }
    let s = DVector::from_fn(d, |i, _| theta[off + d * d + i]);
    let mut mu = DVector::zeros(2 * d * k + if with_feature { d } else { 0 });
    for c in 0..k {
        let x = DVector::from_fn(d, |i, _| theta[off + d * d + d + c * d + i]);
        let mapped = &a * &x + &s;
        for i in 0..d {
            mu[2 * d * c + i] = x[i];
            mu[2 * d * c + d + i] = mapped[i];
        }
    }
    if with_feature {
        let x2f = DVector::from_fn(d, |i, _| theta[i]);
        let mu_f = a.try_inverse().expect("A invertible") * (x2f - s);
        for i in 0..d {
            mu[2 * d * k + i] = mu_f[i];
        }
    }
    mu
}

/// Gauss–Newton information assembled from central finite differences of
/// the mean function (relative step 1e-4): J = ∂μᵀ Ω⁻¹ ∂μ.
pub fn fd_information(s: &RegistrationScenario<f64>, with_feature: bool) -> DMatrix<f64> {
    let d = s.dim();
    let k = s.len();
    let theta0 = theta_of(s, with_feature);
    let n = theta0.len();
    let m = 2 * d * k + if with_feature { d } else { 0 };

    let mut jac = DMatrix::zeros(m, n);
    for i in 0..n {
        let h = 1e-4 * theta0[i].abs().max(1.0);
        let mut plus = theta0.clone();
        plus[i] += h;
        let mut minus = theta0.clone();
        minus[i] -= h;
        let diff = (mean_of(&plus, d, k, with_feature) - mean_of(&minus, d, k, with_feature))
            / (2.0 * h);
        jac.set_column(i, &diff);
    }

    let mut weight = DMatrix::zeros(m, m);
    for c in 0..k {
        let o1 = s.covariance().omega1(c, d).try_inverse().unwrap();
        let o2 = s.covariance().omega2(c, d).try_inverse().unwrap();
        weight.view_mut((2 * d * c, 2 * d * c), (d, d)).copy_from(&o1);
        weight
            .view_mut((2 * d * c + d, 2 * d * c + d), (d, d))
            .copy_from(&o2);
    }
    if with_feature {
        let of = s
            .feature()
            .unwrap()
            .covariance()
            .clone()
            .try_inverse()
            .unwrap();
        weight.view_mut((2 * d * k, 2 * d * k), (d, d)).copy_from(&of);
    }
    jac.transpose() * weight * jac
}
