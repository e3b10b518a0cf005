//! Local expansion and contraction data by power iteration of the
//! variational equation along orbits.
//!
//! The unstable direction at `p` is obtained by pulling `p` back `L` steps
//! with the exact inverse and pushing the seed `(1, 1)/√2` forward through
//! the Jacobians of that backward orbit, normalizing after every step.
//! The stable direction mirrors this with a forward orbit and the inverse
//! Jacobians. Directions converge like `(λ_s/λ_u)^L`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{BlaschkeMap, TorusPoint};
use crate::real::{Real, Vec2};

/// Orbit length used throughout unless a caller asks for another.
pub const DEFAULT_ORBIT_LEN: usize = 200;

/// Rates, directions and invariance defects at one point.
#[derive(Clone, Debug)]
pub struct SplittingSample {
    pub point: TorusPoint,
    pub lambda_u: Real,
    pub lambda_s: Real,
    /// Unit vector with nonnegative components.
    pub e_u: Vec2,
    /// Unit vector with `x ≤ 0`, `y ≥ 0`.
    pub e_s: Vec2,
    pub orbit_len: usize,
    pub residual_u: Real,
    pub residual_s: Real,
}

impl SplittingSample {
    /// Computes both directions at `p` and the invariance residuals against
    /// independently computed directions at `T(p)`.
    pub fn compute(map: &BlaschkeMap, p: &TorusPoint, orbit_len: usize) -> Result<Self> {
        let (lambda_u, e_u) = unstable_data(map, p, orbit_len)?;
        let (lambda_s, e_s) = stable_data(map, p, orbit_len)?;
        let mut sample = SplittingSample {
            point: p.clone(),
            lambda_u,
            lambda_s,
            e_u,
            e_s,
            orbit_len,
            residual_u: Real::zero(p.prec()),
            residual_s: Real::zero(p.prec()),
        };
        let (ru, rs) = splitting_residual(map, &sample)?;
        sample.residual_u = ru;
        sample.residual_s = rs;
        Ok(sample)
    }

    /// `|sin ∠(e_u, e_s)|` at the sample point.
    pub fn sin_angle(&self) -> Real {
        self.e_u.cross(&self.e_s).abs()
    }
}

fn check_len(orbit_len: usize) -> Result<()> {
    if orbit_len == 0 {
        return Err(Error::Parameter("orbit length must be at least 1".into()));
    }
    Ok(())
}

fn unit_seed(p: &TorusPoint, x: i32) -> Vec2 {
    let prec = p.prec();
    let s = Real::from_i32(prec, 2).sqrt().recip();
    Vec2::new(&s * x, s)
}

// Normalization inside the loops: the iterates stay in a cone, never zero.
fn renormalize(v: Vec2) -> Vec2 {
    let n = v.norm();
    Vec2 { x: v.x / &n, y: v.y / &n }
}

/// `(λ_u(p), e_u(p))` from a backward orbit of length `orbit_len`.
pub fn unstable_data(map: &BlaschkeMap, p: &TorusPoint, orbit_len: usize) -> Result<(Real, Vec2)> {
    check_len(orbit_len)?;
    // slopes[k] = f′ at the first coordinate of p₋(k+1)
    let mut slopes = Vec::with_capacity(orbit_len);
    let mut q = p.clone();
    for _ in 0..orbit_len {
        let (pre, slope) = map.apply_inverse_with_slope(&q);
        slopes.push(slope);
        q = pre;
    }
    let mut v = unit_seed(p, 1);
    for slope in slopes.iter().rev() {
        v = renormalize(map.jacobian_from_slope(slope).apply(&v));
    }
    let image = map.jacobian(p).apply(&v);
    let lambda = image.norm();
    if v.x.is_sign_negative() {
        v = -&v;
    }
    Ok((lambda, v))
}

/// `(λ_s(p), e_s(p))` from a forward orbit of length `orbit_len`.
pub fn stable_data(map: &BlaschkeMap, p: &TorusPoint, orbit_len: usize) -> Result<(Real, Vec2)> {
    check_len(orbit_len)?;
    // slopes[k] = f′ at the first coordinate of p_k
    let mut slopes = Vec::with_capacity(orbit_len);
    let mut q = p.clone();
    for _ in 0..orbit_len {
        let (next, slope) = map.apply_with_slope(&q);
        slopes.push(slope);
        q = next;
    }
    let mut v = unit_seed(p, -1);
    for slope in slopes.iter().rev() {
        // DT is unimodular, so the adjugate is its exact inverse
        v = renormalize(map.jacobian_from_slope(slope).adjugate().apply(&v));
    }
    let image = map.jacobian_from_slope(&slopes[0]).apply(&v);
    let lambda = image.norm();
    if v.y.is_sign_negative() || (v.y.is_zero() && !v.x.is_sign_negative()) {
        v = -&v;
    }
    Ok((lambda, v))
}

/// `λ_u` alone; the quantity every grid and difference quotient samples.
pub fn expansion_rate(map: &BlaschkeMap, p: &TorusPoint, orbit_len: usize) -> Result<Real> {
    unstable_data(map, p, orbit_len).map(|(l, _)| l)
}

fn aligned_defect(image: &Vec2, target: &Vec2) -> Real {
    let plus = (image - target).norm();
    let minus = (image + target).norm();
    plus.min(minus)
}

/// Invariance defects `‖DT(p)e(p) − λ(p)e(T(p))‖` for both directions, with
/// `e(T(p))` recomputed from fresh orbits.
pub fn splitting_residual(map: &BlaschkeMap, s: &SplittingSample) -> Result<(Real, Real)> {
    let image_point = map.apply(&s.point);
    let (_, eu_next) = unstable_data(map, &image_point, s.orbit_len)?;
    let (_, es_next) = stable_data(map, &image_point, s.orbit_len)?;
    let dt = map.jacobian(&s.point);
    let ru = aligned_defect(&dt.apply(&s.e_u), &eu_next.scale(&s.lambda_u));
    let rs = aligned_defect(&dt.apply(&s.e_s), &es_next.scale(&s.lambda_s));
    Ok((ru, rs))
}

/// Ergodic average `(1/N) Σ_{k<N} ln λ_u(T^k(seed))`.
///
/// The orbit is generated sequentially and the rates are evaluated in
/// parallel; the sum is taken in orbit order so the result does not depend
/// on the thread count.
pub fn lyapunov_exponent_orbit(
    map: &BlaschkeMap,
    seed: &TorusPoint,
    n: usize,
    orbit_len: usize,
) -> Result<Real> {
    if n == 0 {
        return Err(Error::Parameter("orbit average needs N >= 1".into()));
    }
    check_len(orbit_len)?;
    let mut orbit = Vec::with_capacity(n);
    let mut q = seed.clone();
    for _ in 0..n {
        let next = map.apply(&q);
        orbit.push(q);
        q = next;
    }
    let logs: Vec<Real> = orbit
        .par_iter()
        .map(|p| expansion_rate(map, p, orbit_len).map(|l| l.ln()))
        .collect::<Result<_>>()?;
    let mut sum = Real::zero(seed.prec());
    for l in &logs {
        sum += l;
    }
    Ok(sum / n as i32)
}
