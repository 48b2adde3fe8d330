//! Analytic test functions with certified derivative bounds.
//!
//! Every family carries closed-form gradients together with global
//! bounds on its oscillation, gradient norm, and Hessian operator norm.
//! Quadrature error control in the Dirichlet-form estimators leans on
//! those bounds, so each family keeps them exact rather than estimated.

use crate::error::{Error, Result};

/// A smooth test function on `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// Constant value; every difference-based form vanishes on it.
    Constant { dim: usize, value: f64 },
    /// `<slope, x>`; unbounded, usable only where no tail bound is needed.
    Linear { slope: Vec<f64> },
    /// `exp(-||x - center||^2 / (2 width^2))`.
    GaussianBump { center: Vec<f64>, width: f64 },
    /// `tanh(gain * <direction, x>)` with a unit direction.
    TanhRidge { direction: Vec<f64>, gain: f64 },
    /// `x_1 * exp(-||x||^2 / 2)`, an odd polynomial-times-bump profile.
    PolyBump { dim: usize },
}

impl TestFunction {
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        require_dim(dim)?;
        if !value.is_finite() {
            return Err(Error::Domain("constant value must be finite".into()));
        }
        Ok(TestFunction::Constant { dim, value })
    }

    pub fn linear(slope: Vec<f64>) -> Result<Self> {
        require_dim(slope.len())?;
        if slope.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("slope must be finite".into()));
        }
        Ok(TestFunction::Linear { slope })
    }

    pub fn gaussian_bump(center: Vec<f64>, width: f64) -> Result<Self> {
        require_dim(center.len())?;
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("center must be finite".into()));
        }
        if !width.is_finite() || width <= 0.0 {
            return Err(Error::Domain(format!("width must be finite and positive, got {width}")));
        }
        Ok(TestFunction::GaussianBump { center, width })
    }

    /// The direction is normalized; a zero direction is rejected.
    pub fn tanh_ridge(direction: Vec<f64>, gain: f64) -> Result<Self> {
        require_dim(direction.len())?;
        if !gain.is_finite() || gain <= 0.0 {
            return Err(Error::Domain(format!("gain must be finite and positive, got {gain}")));
        }
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Domain("direction must be nonzero and finite".into()));
        }
        let direction = direction.iter().map(|c| c / norm).collect();
        Ok(TestFunction::TanhRidge { direction, gain })
    }

    pub fn poly_bump(dim: usize) -> Result<Self> {
        require_dim(dim)?;
        Ok(TestFunction::PolyBump { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            TestFunction::Constant { dim, .. } | TestFunction::PolyBump { dim } => *dim,
            TestFunction::Linear { slope } => slope.len(),
            TestFunction::GaussianBump { center, .. } => center.len(),
            TestFunction::TanhRidge { direction, .. } => direction.len(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant { value, .. } => *value,
            TestFunction::Linear { slope } => dot(slope, x),
            TestFunction::GaussianBump { center, width } => {
                let r2: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum();
                (-r2 / (2.0 * width * width)).exp()
            }
            TestFunction::TanhRidge { direction, gain } => (gain * dot(direction, x)).tanh(),
            TestFunction::PolyBump { .. } => {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                x[0] * (-r2 / 2.0).exp()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TestFunction::Constant { dim, .. } => vec![0.0; *dim],
            TestFunction::Linear { slope } => slope.clone(),
            TestFunction::GaussianBump { center, width } => {
                let f = self.value(x);
                let w2 = width * width;
                x.iter().zip(center).map(|(a, c)| f * (c - a) / w2).collect()
            }
            TestFunction::TanhRidge { direction, gain } => {
                let t = (gain * dot(direction, x)).tanh();
                let sech2 = 1.0 - t * t;
                direction.iter().map(|u| gain * sech2 * u).collect()
            }
            TestFunction::PolyBump { dim } => {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                let g = (-r2 / 2.0).exp();
                (0..*dim)
                    .map(|j| {
                        let kron = if j == 0 { 1.0 } else { 0.0 };
                        g * (kron - x[0] * x[j])
                    })
                    .collect()
            }
        }
    }

    /// Upper bound on `sup f - inf f`.
    pub fn osc_bound(&self) -> f64 {
        match self {
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Linear { .. } => f64::INFINITY,
            TestFunction::GaussianBump { .. } => 1.0,
            TestFunction::TanhRidge { .. } => 2.0,
            // Odd profile with extrema +-exp(-1/2) on the first axis.
            TestFunction::PolyBump { .. } => 2.0 * (-0.5f64).exp(),
        }
    }

    /// Upper bound on `sup ||grad f||`.
    pub fn grad_bound(&self) -> f64 {
        match self {
            TestFunction::Constant { .. } => 0.0,
            TestFunction::Linear { slope } => slope.iter().map(|c| c * c).sum::<f64>().sqrt(),
            // sup of (r / w^2) exp(-r^2 / (2 w^2)) is at r = w.
            TestFunction::GaussianBump { width, .. } => (-0.5f64).exp() / width,
            TestFunction::TanhRidge { gain, .. } => *gain,
            // ||grad|| <= exp(-r^2/2)(1 + r^2), maximal at r = 1.
            TestFunction::PolyBump { .. } => 2.0 * (-0.5f64).exp(),
        }
    }

    /// Upper bound on the Hessian operator norm.
    pub fn hessian_bound(&self) -> f64 {
        match self {
            TestFunction::Constant { .. } | TestFunction::Linear { .. } => 0.0,
            // Eigenvalues are exp(-t^2/2)(t^2 - 1)/w^2 radially and
            // -exp(-t^2/2)/w^2 tangentially; both peak at 1/w^2.
            TestFunction::GaussianBump { width, .. } => 1.0 / (width * width),
            // |d^2/dt^2 tanh t| = 2 sech^2 t |tanh t| peaks at 4/(3 sqrt 3).
            TestFunction::TanhRidge { gain, .. } => gain * gain * 4.0 / (3.0 * 3.0f64.sqrt()),
            // Operator norm <= exp(-r^2/2)(3r + r^3), maximal at r = 3^{1/4}.
            TestFunction::PolyBump { .. } => {
                let r = 3.0f64.powf(0.25);
                (-r * r / 2.0).exp() * (3.0 * r + r * r * r)
            }
        }
    }
}

fn require_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Domain("test functions need dimension at least 1".into()));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn families_3d() -> Vec<TestFunction> {
        vec![
            TestFunction::constant(3, 1.7).unwrap(),
            TestFunction::linear(vec![0.5, -1.0, 0.25]).unwrap(),
            TestFunction::gaussian_bump(vec![0.3, -0.2, 0.0], 0.8).unwrap(),
            TestFunction::tanh_ridge(vec![1.0, 2.0, -2.0], 1.5).unwrap(),
            TestFunction::poly_bump(3).unwrap(),
        ]
    }

    fn random_point<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.gen_range(-2.5..2.5)).collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = crate::stable_noise::RngSeed(31).rng();
        let h = 1e-6;
        for f in families_3d() {
            for _ in 0..20 {
                let x = random_point(&mut rng, 3);
                let grad = f.gradient(&x);
                for i in 0..3 {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    let numeric = (f.value(&xp) - f.value(&xm)) / (2.0 * h);
                    assert_relative_eq!(grad[i], numeric, max_relative = 1e-4, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn oscillation_bounds_dominate_sampled_differences() {
        let mut rng = crate::stable_noise::RngSeed(32).rng();
        for f in families_3d() {
            let osc = f.osc_bound();
            if !osc.is_finite() {
                continue;
            }
            for _ in 0..200 {
                let x = random_point(&mut rng, 3);
                let y = random_point(&mut rng, 3);
                assert!((f.value(&x) - f.value(&y)).abs() <= osc + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_bounds_dominate_sampled_gradients() {
        let mut rng = crate::stable_noise::RngSeed(33).rng();
        for f in families_3d() {
            let bound = f.grad_bound();
            for _ in 0..200 {
                let x = random_point(&mut rng, 3);
                let norm: f64 = f.gradient(&x).iter().map(|c| c * c).sum::<f64>().sqrt();
                assert!(norm <= bound + 1e-12, "gradient norm {norm} above bound {bound}");
            }
        }
    }

    #[test]
    fn hessian_bounds_dominate_directional_second_differences() {
        let mut rng = crate::stable_noise::RngSeed(34).rng();
        let h = 1e-4;
        for f in families_3d() {
            let bound = f.hessian_bound();
            for _ in 0..100 {
                let x = random_point(&mut rng, 3);
                let mut v = random_point(&mut rng, 3);
                let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                v.iter_mut().for_each(|c| *c /= norm);
                let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
                let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
                let second = (f.value(&xp) - 2.0 * f.value(&x) + f.value(&xm)) / (h * h);
                assert!(
                    second.abs() <= bound * (1.0 + 1e-3) + 1e-6,
                    "second difference {second} above bound {bound}"
                );
            }
        }
    }

    #[test]
    fn tanh_direction_is_normalized() {
        let f = TestFunction::tanh_ridge(vec![3.0, 4.0], 2.0).unwrap();
        if let TestFunction::TanhRidge { direction, .. } = &f {
            assert_relative_eq!(direction[0], 0.6, max_relative = 1e-15);
            assert_relative_eq!(direction[1], 0.8, max_relative = 1e-15);
        } else {
            unreachable!();
        }
    }

    #[test]
    fn invalid_constructions_are_rejected() {
        assert!(TestFunction::constant(0, 1.0).is_err());
        assert!(TestFunction::gaussian_bump(vec![0.0], 0.0).is_err());
        assert!(TestFunction::tanh_ridge(vec![0.0, 0.0], 1.0).is_err());
        assert!(TestFunction::tanh_ridge(vec![1.0], -1.0).is_err());
        assert!(TestFunction::linear(vec![f64::NAN]).is_err());
    }
}
