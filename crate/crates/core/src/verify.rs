//! The invariant suite behind `splitlab verify`.
//!
//! Every check reports the worst deviation it saw next to its tolerance, so
//! a failure names both the invariant and how far off it was.

use rayon::prelude::*;

use crate::error::Result;
use crate::manifold::eigen_directions_at_fixed_point;
use crate::map::{BlaschkeMap, MapParams, TorusPoint};
use crate::real::{Precision, Real};
use crate::splitting::{expansion_rate, stable_data, SplittingSample};

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation observed.
    pub deviation: Real,
    pub tolerance: Real,
}

impl CheckResult {
    fn below(name: &'static str, deviation: Real, tolerance: Real) -> Self {
        let passed = deviation.is_finite() && deviation < tolerance;
        CheckResult { name, passed, deviation, tolerance }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Sample sizes for [`verify`].
#[derive(Clone, Copy, Debug)]
pub struct VerifySettings {
    pub orbit_len: usize,
    /// Points used for the cheap pointwise identities.
    pub map_points: usize,
    /// Points used for the power-iteration checks.
    pub rate_points: usize,
    pub cone_grid: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { orbit_len: 200, map_points: 1000, rate_points: 8, cone_grid: 1000 }
    }
}

/// `n` points of the additive recurrence `k·(1/ρ, 1/ρ²) mod 1`, `ρ` the
/// plastic number. Deterministic and evenly spread.
pub fn sample_points(prec: Precision, n: usize) -> Vec<TorusPoint> {
    const G1: f64 = 0.754_877_666_246_692_7;
    const G2: f64 = 0.569_840_290_998_053_3;
    (1..=n)
        .map(|k| {
            let k = k as f64;
            TorusPoint::from_f64(prec, (0.5 + k * G1).fract(), (0.5 + k * G2).fract())
                .expect("fract lies in [0, 1)")
        })
        .collect()
}

fn max_of(prec: Precision, values: impl IntoIterator<Item = Real>) -> Real {
    values.into_iter().fold(Real::zero(prec), Real::max)
}

fn pow10(prec: Precision, k: i32) -> Real {
    Real::pow10(prec, k)
}

fn map_checks(map: &BlaschkeMap, s: &VerifySettings, out: &mut Vec<CheckResult>) {
    let prec = map.params().prec();
    let fp = map.fixed_point();
    out.push(CheckResult::below("fixed point", map.apply(&fp).dist(&fp), pow10(prec, -30)));

    let closed = map.fixed_point_trace();
    let numeric = map.jacobian(&fp).trace();
    out.push(CheckResult::below("trace at fixed point", ((&numeric - &closed) / &closed).abs(), pow10(prec, -30)));

    let points = sample_points(prec, s.map_points);
    let det = max_of(prec, points.iter().map(|p| (map.jacobian(p).det() - 1).abs()));
    out.push(CheckResult::below("det DT = 1", det, pow10(prec, -30)));
    let trip = max_of(prec, points.iter().map(|p| map.apply_inverse(&map.apply(p)).dist(p)));
    out.push(CheckResult::below("inverse round trip", trip, pow10(prec, -30)));
}

fn f_prime_check(map: &BlaschkeMap, s: &VerifySettings) -> CheckResult {
    let prec = map.params().prec();
    // the difference quotient needs ~40 extra digits to resolve h = 1e-20
    let wide = Precision::new(prec.bits() + 128).expect("wider precision");
    let params = map.params();
    let oracle = BlaschkeMap::new(
        MapParams::new(params.mu().with_prec(wide), params.alpha().with_prec(wide))
            .expect("same parameters"),
    );
    let h = pow10(wide, -20);
    let dev = max_of(
        prec,
        sample_points(prec, s.map_points.min(100)).iter().map(|p| {
            let t = p.theta1.with_prec(wide);
            let cd = (oracle.deformation_f(&(&t + &h)) - oracle.deformation_f(&(&t - &h))) / (&h * 2);
            (map.deformation_f_prime(&p.theta1) - cd.with_prec(prec)).abs()
        }),
    );
    CheckResult::below("f' against central difference", dev, pow10(prec, -25))
}

fn cone_checks(map: &BlaschkeMap, s: &VerifySettings, out: &mut Vec<CheckResult>) -> Result<()> {
    let prec = map.params().prec();
    let rep = map.verify_cone_condition(s.cone_grid)?;
    let scale = rep.closed_form_min.abs().max(Real::one(prec));
    let dev = (&rep.min_f_prime - &rep.closed_form_min).abs() / scale;
    out.push(CheckResult::below("cone minimum matches closed form", dev, pow10(prec, -10)));
    // margin > 0 is the same statement as min f' > -1
    let shortfall = if rep.holds { Real::zero(prec) } else { -rep.margin.clone() };
    out.push(CheckResult {
        name: "cone condition min f' > -1",
        passed: rep.holds,
        deviation: shortfall,
        tolerance: Real::zero(prec),
    });
    Ok(())
}

fn cat_oracle(prec: Precision, s: &VerifySettings) -> Result<CheckResult> {
    let cat = BlaschkeMap::new(MapParams::cat(prec));
    let sqrt5 = Real::from_i32(prec, 5).sqrt();
    let lu = (&sqrt5 + 3) / 2;
    let ls = (3 - &sqrt5) / 2;
    let devs = sample_points(prec, s.rate_points)
        .par_iter()
        .map(|p| {
            let u = expansion_rate(&cat, p, s.orbit_len)?;
            let (l, _) = stable_data(&cat, p, s.orbit_len)?;
            Ok((&u - &lu).abs().max((&l - &ls).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckResult::below("cat-map eigenvalue oracle", max_of(prec, devs), pow10(prec, -30)))
}

fn splitting_checks(map: &BlaschkeMap, s: &VerifySettings, out: &mut Vec<CheckResult>) -> Result<()> {
    let prec = map.params().prec();
    let fp = map.fixed_point();
    let eig = eigen_directions_at_fixed_point(map)?;
    let at_fp = SplittingSample::compute(map, &fp, s.orbit_len)?;
    let dev = (&at_fp.lambda_u - &eig.lambda_u).abs().max((&at_fp.lambda_s - &eig.lambda_s).abs());
    out.push(CheckResult::below("rates at fixed point", dev, pow10(prec, -30)));
    let recip = (&at_fp.lambda_u * &at_fp.lambda_s - 1).abs();
    out.push(CheckResult::below("reciprocity at fixed point", recip, pow10(prec, -30)));

    let half = (s.orbit_len / 2).max(1);
    let mut points = sample_points(prec, s.rate_points);
    points.push(fp);
    let rows = points
        .par_iter()
        .map(|p| {
            let sample = SplittingSample::compute(map, p, s.orbit_len)?;
            let short = expansion_rate(map, p, half)?;
            let plateau = (&short - &sample.lambda_u).abs();
            let residual = sample.residual_u.clone().max(sample.residual_s.clone());
            let cone = sample.e_u.x.is_sign_negative() || sample.e_u.y.is_sign_negative();
            Ok((plateau, residual, cone))
        })
        .collect::<Result<Vec<_>>>()?;
    let plateau = max_of(prec, rows.iter().map(|r| r.0.clone()));
    out.push(CheckResult::below("rate plateau L/2 against L", plateau, pow10(prec, -30)));
    let residual = max_of(prec, rows.iter().map(|r| r.1.clone()));
    out.push(CheckResult::below("splitting invariance residual", residual, pow10(prec, -25)));
    let outside = rows.iter().filter(|r| r.2).count();
    out.push(CheckResult {
        name: "e_u in positive quadrant",
        passed: outside == 0,
        deviation: Real::from_i32(prec, outside as i32),
        tolerance: Real::zero(prec),
    });
    Ok(())
}

/// Runs every invariant for `map`.
pub fn verify(map: &BlaschkeMap, settings: &VerifySettings) -> Result<VerifyReport> {
    let prec = map.params().prec();
    let mut checks = Vec::new();
    map_checks(map, settings, &mut checks);
    checks.push(f_prime_check(map, settings));
    cone_checks(map, settings, &mut checks)?;
    checks.push(cat_oracle(prec, settings)?);
    splitting_checks(map, settings, &mut checks)?;
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifySettings {
        VerifySettings { orbit_len: 200, map_points: 100, rate_points: 3, cone_grid: 200 }
    }

    #[test]
    fn preset_passes() {
        let map = BlaschkeMap::new(MapParams::preset(Precision::QUAD));
        let rep = verify(&map, &quick()).unwrap();
        let failed: Vec<_> = rep.failures().map(|c| c.name).collect();
        assert!(rep.all_passed(), "{failed:?}");
        assert_eq!(rep.checks.len(), 13);
    }

    #[test]
    fn cat_map_passes() {
        let map = BlaschkeMap::new(MapParams::cat(Precision::QUAD));
        assert!(verify(&map, &quick()).unwrap().all_passed());
    }

    #[test]
    fn short_orbits_fail_the_plateau() {
        let map = BlaschkeMap::new(MapParams::preset(Precision::QUAD));
        let s = VerifySettings { orbit_len: 10, ..quick() };
        let rep = verify(&map, &s).unwrap();
        let failed: Vec<_> = rep.failures().map(|c| c.name).collect();
        assert!(failed.contains(&"rate plateau L/2 against L"), "{failed:?}");
    }

    #[test]
    fn sample_points_are_deterministic_and_distinct() {
        let a = sample_points(Precision::QUAD, 50);
        let b = sample_points(Precision::QUAD, 50);
        assert_eq!(a, b);
        for i in 0..a.len() {
            for j in 0..i {
                assert!(a[i].dist(&a[j]) > 1e-3);
            }
        }
    }
}
