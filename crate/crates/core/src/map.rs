//! The Blaschke-deformed cat map on the two-torus,
//!
//! ```text
//! T(θ₁, θ₂) = (2θ₁ + θ₂ + f(θ₁), θ₁ + θ₂ + f(θ₁))  mod 1
//! f(θ) = (1/π) · arctan( μ sin(2πθ − α) / (1 − μ cos(2πθ − α)) )
//! ```
//!
//! with `0 ≤ μ < 1` and `α ∈ [−π, π)`. For `μ = 0` this is the Arnold cat
//! map. The skew structure makes the inverse explicit and `det DT ≡ 1`.

use crate::error::{Error, Result};
use crate::real::{circle_delta, wrap_unit, Mat2, Precision, Real};

/// Deformation amplitude `mu` and phase `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapParams {
    mu: Real,
    alpha: Real,
}

impl MapParams {
    pub fn new(mu: Real, alpha: Real) -> Result<Self> {
        if mu.prec() != alpha.prec() {
            return Err(Error::PrecisionMismatch { expected: mu.prec(), found: alpha.prec() });
        }
        if !mu.is_finite() || mu.is_sign_negative() || mu >= 1 {
            return Err(Error::Parameter(format!("mu must lie in [0, 1), got {mu:?}")));
        }
        let pi = Real::pi(alpha.prec());
        if !alpha.is_finite() || alpha < -&pi || alpha >= pi {
            return Err(Error::Parameter(format!("alpha must lie in [-pi, pi), got {alpha:?}")));
        }
        Ok(MapParams { mu, alpha })
    }

    /// Parses decimal literals at the requested precision, so `"0.7"` means
    /// 7/10 rounded once, not the nearest binary64.
    pub fn from_decimal(prec: Precision, mu: &str, alpha: &str) -> Result<Self> {
        MapParams::new(Real::parse(prec, mu)?, Real::parse(prec, alpha)?)
    }

    /// `mu = 0.7`, `alpha = 0.3`: the parameters of the reference study.
    pub fn preset(prec: Precision) -> Self {
        MapParams::from_decimal(prec, "0.7", "0.3").expect("preset parameters are valid")
    }

    /// The undeformed cat map.
    pub fn cat(prec: Precision) -> Self {
        MapParams { mu: Real::zero(prec), alpha: Real::zero(prec) }
    }

    pub fn mu(&self) -> &Real {
        &self.mu
    }

    pub fn alpha(&self) -> &Real {
        &self.alpha
    }

    pub fn prec(&self) -> Precision {
        self.mu.prec()
    }
}

/// A point of `[0, 1)²`.
#[derive(Clone, PartialEq)]
pub struct TorusPoint {
    pub theta1: Real,
    pub theta2: Real,
}

impl TorusPoint {
    /// Checked constructor: both coordinates must already lie in `[0, 1)`.
    pub fn new(theta1: Real, theta2: Real) -> Result<Self> {
        if theta1.prec() != theta2.prec() {
            return Err(Error::PrecisionMismatch { expected: theta1.prec(), found: theta2.prec() });
        }
        for t in [&theta1, &theta2] {
            if !t.is_finite() || t.is_sign_negative() || *t >= 1 {
                return Err(Error::Domain(format!("torus coordinate {t:?} is not in [0, 1)")));
            }
        }
        Ok(TorusPoint { theta1, theta2 })
    }

    /// Reduces arbitrary finite coordinates modulo 1.
    pub fn wrapped(theta1: &Real, theta2: &Real) -> Result<Self> {
        TorusPoint::new(crate::real::mod1(theta1)?, crate::real::mod1(theta2)?)
    }

    pub fn from_f64(prec: Precision, theta1: f64, theta2: f64) -> Result<Self> {
        TorusPoint::wrapped(&Real::from_f64(prec, theta1), &Real::from_f64(prec, theta2))
    }

    pub fn origin(prec: Precision) -> Self {
        TorusPoint { theta1: Real::zero(prec), theta2: Real::zero(prec) }
    }

    pub fn prec(&self) -> Precision {
        self.theta1.prec()
    }

    /// Componentwise shortest displacement from `other` to `self`.
    pub fn delta(&self, other: &TorusPoint) -> (Real, Real) {
        (circle_delta(&self.theta1, &other.theta1), circle_delta(&self.theta2, &other.theta2))
    }

    /// Euclidean distance in the flat torus metric.
    pub fn dist(&self, other: &TorusPoint) -> Real {
        let (d1, d2) = self.delta(other);
        d1.hypot(&d2)
    }

    /// `self` shifted by `(d1, d2)` and re-wrapped.
    pub fn offset(&self, d1: &Real, d2: &Real) -> TorusPoint {
        TorusPoint { theta1: wrap_unit(&(&self.theta1 + d1)), theta2: wrap_unit(&(&self.theta2 + d2)) }
    }
}

impl std::fmt::Debug for TorusPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}, {:?})", self.theta1, self.theta2)
    }
}

/// An invertible map of the torus with a known fixed point. Implemented by
/// [`BlaschkeMap`] and by its time reversal [`Inverted`].
pub trait TorusMap: Sync {
    fn prec(&self) -> Precision;
    fn forward(&self, p: &TorusPoint) -> TorusPoint;
    fn backward(&self, q: &TorusPoint) -> TorusPoint;
    fn jacobian(&self, p: &TorusPoint) -> Mat2;
    fn fixed_point(&self) -> TorusPoint;
}

/// The map for one parameter set, with phase constants precomputed.
#[derive(Clone, Debug)]
pub struct BlaschkeMap {
    params: MapParams,
    two_pi: Real,
    inv_pi: Real,
    mu_sq: Real,
    one_plus_mu_sq: Real,
    two_mu: Real,
}

/// `f(θ)` together with `cos(2πθ − α)`, which is all `f′(θ)` needs.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub value: Real,
    pub cos_phase: Real,
}

impl BlaschkeMap {
    pub fn new(params: MapParams) -> Self {
        let prec = params.prec();
        let pi = Real::pi(prec);
        let mu_sq = params.mu.square();
        BlaschkeMap {
            two_pi: &pi * 2,
            inv_pi: pi.recip(),
            one_plus_mu_sq: &mu_sq + 1,
            two_mu: &params.mu * 2,
            mu_sq,
            params,
        }
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    fn phase(&self, theta: &Real) -> Real {
        &self.two_pi * theta - &self.params.alpha
    }

    /// Evaluates `f(θ)` and keeps `cos φ` for reuse in the Jacobian.
    pub fn deformation(&self, theta: &Real) -> Deformation {
        let (s, c) = self.phase(theta).sin_cos();
        let num = &self.params.mu * &s;
        let den = 1 - (&self.params.mu * &c);
        // den ≥ 1 − μ > 0, so atan2 agrees with arctan of the quotient
        let value = num.atan2(&den) * &self.inv_pi;
        Deformation { value, cos_phase: c }
    }

    pub fn deformation_f(&self, theta: &Real) -> Real {
        self.deformation(theta).value
    }

    pub fn deformation_f_prime(&self, theta: &Real) -> Real {
        self.f_prime_from_cos(&self.phase(theta).cos())
    }

    /// `f′ = 2(μc − μ²) / (1 − 2μc + μ²)` with `c = cos(2πθ − α)`.
    pub fn f_prime_from_cos(&self, c: &Real) -> Real {
        let num = (&self.params.mu * c - &self.mu_sq) * 2;
        let den = &self.one_plus_mu_sq - &(&self.two_mu * c);
        num / den
    }

    /// `T(p)` and `f′(θ₁)` at the source point. The orbit loops use this to
    /// avoid a second trigonometric evaluation per step.
    pub fn apply_with_slope(&self, p: &TorusPoint) -> (TorusPoint, Real) {
        let d = self.deformation(&p.theta1);
        let s = &p.theta1 + &p.theta2 + &d.value;
        let q1 = wrap_unit(&(&s + &p.theta1));
        let q2 = wrap_unit(&s);
        (TorusPoint { theta1: q1, theta2: q2 }, self.f_prime_from_cos(&d.cos_phase))
    }

    pub fn apply(&self, p: &TorusPoint) -> TorusPoint {
        self.apply_with_slope(p).0
    }

    /// `T⁻¹(q)` and `f′` at the preimage's first coordinate.
    pub fn apply_inverse_with_slope(&self, q: &TorusPoint) -> (TorusPoint, Real) {
        let t1 = wrap_unit(&(&q.theta1 - &q.theta2));
        let d = self.deformation(&t1);
        let t2 = wrap_unit(&(&q.theta2 - &t1 - &d.value));
        let slope = self.f_prime_from_cos(&d.cos_phase);
        (TorusPoint { theta1: t1, theta2: t2 }, slope)
    }

    pub fn apply_inverse(&self, q: &TorusPoint) -> TorusPoint {
        self.apply_inverse_with_slope(q).0
    }

    /// `DT` given `f′(θ₁)`: `[[2 + f′, 1], [1 + f′, 1]]`.
    pub fn jacobian_from_slope(&self, slope: &Real) -> Mat2 {
        let prec = slope.prec();
        Mat2 {
            a11: slope + 2,
            a12: Real::one(prec),
            a21: slope + 1,
            a22: Real::one(prec),
        }
    }

    pub fn jacobian(&self, p: &TorusPoint) -> Mat2 {
        self.jacobian_from_slope(&self.deformation_f_prime(&p.theta1))
    }

    /// `θ* = ((1/π) arctan(μ sin α / (1 + μ cos α)), 0)`.
    pub fn fixed_point(&self) -> TorusPoint {
        let (s, c) = self.params.alpha.sin_cos();
        let num = &self.params.mu * &s;
        let den = (&self.params.mu * &c) + 1;
        let t1 = (num / den).atan() * &self.inv_pi;
        TorusPoint { theta1: wrap_unit(&t1), theta2: Real::zero(self.params.prec()) }
    }

    /// `tr DT(θ*) = 1 + 2(1 + μ cos α) / (1 − μ²)`.
    pub fn fixed_point_trace(&self) -> Real {
        let num = (&self.params.mu * &self.params.alpha.cos()) + 1;
        let den = 1 - self.mu_sq.clone();
        num / den * 2 + 1
    }

    /// Closed-form minimum of `f′`, attained where `cos(2πθ − α) = −1`:
    /// `2(−μ − μ²) / (1 + 2μ + μ²) = −2μ / (1 + μ)`.
    pub fn f_prime_min_closed_form(&self) -> Real {
        let minus_one = Real::from_i32(self.params.prec(), -1);
        self.f_prime_from_cos(&minus_one)
    }

    /// Samples `f′` on `grid_n` uniform values of `θ₁`, refines around the
    /// smallest sample by golden-section search, and reports whether the
    /// positive quadrant is a strictly invariant cone.
    pub fn verify_cone_condition(&self, grid_n: usize) -> Result<ConeReport> {
        if grid_n < 2 {
            return Err(Error::Parameter(format!("cone grid needs at least 2 points, got {grid_n}")));
        }
        let prec = self.params.prec();
        let n = grid_n as i64;
        let slope_at = |t: &Real| self.deformation_f_prime(&wrap_unit(t));
        let (mut best_i, mut best) = (0i64, slope_at(&Real::zero(prec)));
        for i in 1..n {
            let v = slope_at(&Real::ratio(prec, i, n));
            if v < best {
                best = v;
                best_i = i;
            }
        }
        // bracket [θ_{i-1}, θ_{i+1}] unwrapped; f′ is 1-periodic
        let mut lo = Real::ratio(prec, best_i - 1, n);
        let mut hi = Real::ratio(prec, best_i + 1, n);
        let inv_phi = (Real::from_i32(prec, 5).sqrt() - 1) / 2;
        let mut x1 = &hi - &(&(&hi - &lo) * &inv_phi);
        let mut x2 = &lo + &(&(&hi - &lo) * &inv_phi);
        let (mut f1, mut f2) = (slope_at(&x1), slope_at(&x2));
        let stop = Real::exp2(prec, -(prec.bits() as i32) / 2);
        let mut iterations = 0;
        while &hi - &lo > stop && iterations < 400 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = &hi - &(&(&hi - &lo) * &inv_phi);
                f1 = slope_at(&x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = &lo + &(&(&hi - &lo) * &inv_phi);
                f2 = slope_at(&x2);
            }
            iterations += 1;
        }
        let (argmin, refined) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
        let (argmin, min_f_prime) = if refined < best {
            (wrap_unit(&argmin), refined)
        } else {
            (Real::ratio(prec, best_i, n), best)
        };
        let margin = (&min_f_prime + 1).min(&min_f_prime + 2);
        Ok(ConeReport {
            holds: min_f_prime > -1,
            closed_form_min: self.f_prime_min_closed_form(),
            argmin,
            min_f_prime,
            margin,
            grid_n,
            refinement_steps: iterations,
        })
    }
}

/// Outcome of the invariant-cone check. A failed condition is reported, not
/// raised.
#[derive(Clone, Debug)]
pub struct ConeReport {
    pub grid_n: usize,
    pub refinement_steps: usize,
    pub argmin: Real,
    pub min_f_prime: Real,
    pub closed_form_min: Real,
    /// `min(2 + f′, 1 + f′)`: the smallest Jacobian entry.
    pub margin: Real,
    /// `min f′ > −1`, i.e. every entry of `DT` is strictly positive.
    pub holds: bool,
}

impl TorusMap for BlaschkeMap {
    fn prec(&self) -> Precision {
        self.params.prec()
    }
    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        self.apply(p)
    }
    fn backward(&self, q: &TorusPoint) -> TorusPoint {
        self.apply_inverse(q)
    }
    fn jacobian(&self, p: &TorusPoint) -> Mat2 {
        BlaschkeMap::jacobian(self, p)
    }
    fn fixed_point(&self) -> TorusPoint {
        BlaschkeMap::fixed_point(self)
    }
}

/// Time reversal of a torus map: `forward` is the inverse of the wrapped map.
#[derive(Clone, Debug)]
pub struct Inverted<M>(pub M);

impl<M: TorusMap> TorusMap for Inverted<M> {
    fn prec(&self) -> Precision {
        self.0.prec()
    }
    fn forward(&self, p: &TorusPoint) -> TorusPoint {
        self.0.backward(p)
    }
    fn backward(&self, q: &TorusPoint) -> TorusPoint {
        self.0.forward(q)
    }
    /// `D(T⁻¹)(p) = DT(T⁻¹ p)⁻¹`.
    fn jacobian(&self, p: &TorusPoint) -> Mat2 {
        let pre = self.0.backward(p);
        let j = self.0.jacobian(&pre);
        j.inverse().expect("torus diffeomorphism has invertible Jacobian")
    }
    fn fixed_point(&self) -> TorusPoint {
        self.0.fixed_point()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: Precision = Precision::QUAD;

    fn preset() -> BlaschkeMap {
        BlaschkeMap::new(MapParams::preset(P))
    }

    fn r(v: f64) -> Real {
        Real::from_f64(P, v)
    }

    fn dec(s: &str) -> Real {
        Real::parse(P, s).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(MapParams::from_decimal(P, "1", "0").is_err());
        assert!(MapParams::from_decimal(P, "1.2", "0").is_err());
        assert!(MapParams::from_decimal(P, "-0.1", "0").is_err());
        assert!(MapParams::from_decimal(P, "0.5", "3.1416").is_err());
        assert!(MapParams::new(Real::ratio(P, 1, 2), -Real::pi(P)).is_ok());
        let wide = Precision::new(128).unwrap();
        assert!(matches!(
            MapParams::new(Real::zero(P), Real::zero(wide)),
            Err(Error::PrecisionMismatch { .. })
        ));
    }

    #[test]
    fn deformation_vanishes_on_phase_zero_and_for_cat() {
        let map = preset();
        let theta = map.params().alpha() / &(Real::pi(P) * 2);
        assert!(map.deformation_f(&theta).abs() < P.ulp_scaled(2));
        let cat = BlaschkeMap::new(MapParams::cat(P));
        for t in [0.0, 0.13, 0.5, 0.99] {
            assert!(cat.deformation_f(&r(t)).is_zero());
            assert!(cat.deformation_f_prime(&r(t)).is_zero());
        }
    }

    #[test]
    fn deformation_matches_complex_argument() {
        // f(θ) = −(1/π) arg(1 − μ e^{iφ}), arg taken from the components
        let map = preset();
        let mu = map.params().mu().clone();
        for t in [0.0, 0.1, 0.37, 0.5, 0.81] {
            let phi = Real::pi(P) * 2 * r(t) - map.params().alpha();
            let (s, c) = phi.sin_cos();
            let re = 1 - (&mu * &c);
            let im = -(&mu * &s);
            let oracle = -(im.atan2(&re) / Real::pi(P));
            let got = map.deformation_f(&r(t));
            assert!((&got - &oracle).abs() < P.ulp_scaled(4), "θ={t}: {got:?} vs {oracle:?}");
            assert!(got.abs() < Real::ratio(P, 1, 2));
        }
        // μ = 0.7, α = 0.3, θ = 0
        let f0 = map.deformation_f(&Real::zero(P));
        assert!((f0 - dec("-0.177685945318908065325523469448382194906")).abs() < dec("1e-33"));
    }

    #[test]
    fn f_prime_extremes() {
        let map = preset();
        let lo = map.f_prime_from_cos(&r(-1.0));
        let hi = map.f_prime_from_cos(&r(1.0));
        assert!((lo - Real::ratio(P, -238, 289)).abs() < P.ulp_scaled(2));
        // 1 − 2μ + μ² cancels, so compare relatively
        assert!(((hi - Real::ratio(P, 42, 9)) / Real::ratio(P, 42, 9)).abs() < P.ulp_scaled(16));
    }

    #[test]
    fn f_prime_agrees_with_central_difference() {
        // the quotient is evaluated at 256 bits; at 113 bits its rounding
        // noise (≈ ulp/h) would swamp the 1e-25 tolerance
        let wide = Precision::new(256).unwrap();
        let oracle = BlaschkeMap::new(MapParams::preset(wide));
        let map = preset();
        let h = Real::pow10(wide, -20);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t: f64 = rng.gen();
            let tw = Real::from_f64(wide, t);
            let cd = (oracle.deformation_f(&(&tw + &h)) - oracle.deformation_f(&(&tw - &h))) / (&h * 2);
            let got = map.deformation_f_prime(&r(t)).with_prec(wide);
            assert!((got - cd).abs() < Real::pow10(wide, -25));
        }
    }

    #[test]
    fn cat_map_examples() {
        let cat = BlaschkeMap::new(MapParams::cat(P));
        let p = TorusPoint::new(dec("0.3"), dec("0.4")).unwrap();
        let q = cat.apply(&p);
        assert!(q.dist(&TorusPoint::new(Real::zero(P), dec("0.7")).unwrap()) < P.ulp_scaled(2));
        assert_eq!(cat.apply(&TorusPoint::origin(P)), TorusPoint::origin(P));
        let back = cat.apply_inverse(&TorusPoint::new(Real::zero(P), dec("0.7")).unwrap());
        assert!(back.dist(&p) < P.ulp_scaled(2));
        assert_eq!(cat.jacobian(&p), Mat2::from_f64(P, [[2.0, 1.0], [1.0, 1.0]]));
        assert_eq!(cat.fixed_point(), TorusPoint::origin(P));
        assert_eq!(cat.fixed_point_trace(), 3);
    }

    #[test]
    fn fixed_point_examples() {
        let map = preset();
        let fp = map.fixed_point();
        assert!((&fp.theta1 - dec("0.0392588772897843549830421329788572218")).abs() < dec("1e-33"));
        assert!(map.apply(&fp).dist(&fp) < dec("1e-30"));
        assert!(map.apply_inverse(&fp).dist(&fp) < dec("1e-30"));
        let trace = map.fixed_point_trace();
        assert!((&trace - dec("7.54406095054087926960634180116719580")).abs() < dec("1e-32"));
        let numeric = map.jacobian(&fp).trace();
        assert!(((numeric - &trace) / &trace).abs() < P.ulp_scaled(32));

        // α = 0: sin α vanishes, so the fixed point sits at the origin
        let zero_phase = BlaschkeMap::new(MapParams::from_decimal(P, "0.5", "0").unwrap());
        assert_eq!(zero_phase.fixed_point(), TorusPoint::origin(P));
        assert_eq!(zero_phase.apply(&TorusPoint::origin(P)), TorusPoint::origin(P));

        let neg = BlaschkeMap::new(MapParams::new(Real::ratio(P, 1, 2), -Real::pi(P)).unwrap());
        assert!((neg.fixed_point_trace() - Real::ratio(P, 7, 3)).abs() < P.ulp_scaled(4));
        // α < 0 fixed points wrap into [0, 1)
        let fp = neg.fixed_point();
        assert!(neg.apply(&fp).dist(&fp) < P.ulp_scaled(32));
    }

    #[test]
    fn cone_condition() {
        let cat = BlaschkeMap::new(MapParams::cat(P)).verify_cone_condition(16).unwrap();
        assert!(cat.holds);
        assert!(cat.min_f_prime.is_zero());
        assert_eq!(cat.margin, 1);

        let rep = preset().verify_cone_condition(64).unwrap();
        assert!(rep.holds);
        let tol = Real::pow10(P, -10) * rep.closed_form_min.abs();
        assert!((&rep.min_f_prime - &rep.closed_form_min).abs() < tol);
        assert!((&rep.closed_form_min - Real::ratio(P, -238, 289)).abs() < P.ulp_scaled(2));

        let steep = BlaschkeMap::new(MapParams::from_decimal(P, "0.99", "1.0").unwrap());
        let rep = steep.verify_cone_condition(64).unwrap();
        assert!(rep.holds);
        assert!((rep.min_f_prime + dec("0.994974874371859296")).abs() < dec("1e-10"));
        assert!(rep.margin > 0 && rep.margin < dec("0.01"));

        assert!(preset().verify_cone_condition(1).is_err());
    }

    #[test]
    fn inverse_round_trip_and_unit_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mu: f64 = rng.gen_range(0.0..0.99);
            let alpha: f64 = rng.gen_range(-3.14..3.14);
            let map = BlaschkeMap::new(MapParams::new(r(mu), r(alpha)).unwrap());
            let p = TorusPoint::from_f64(P, rng.gen(), rng.gen()).unwrap();
            let back = map.apply_inverse(&map.apply(&p));
            assert!(back.dist(&p) < P.ulp_scaled(32));
            assert!((map.jacobian(&p).det() - 1).abs() < P.ulp_scaled(16));
        }
    }

    #[test]
    fn inverted_map_reverses_time() {
        let map = preset();
        let inv = Inverted(map.clone());
        let p = TorusPoint::from_f64(P, 0.2, 0.6).unwrap();
        assert!(inv.forward(&map.apply(&p)).dist(&p) < P.ulp_scaled(32));
        let j = inv.jacobian(&map.apply(&p)).mul(&map.jacobian(&p));
        assert!((j.a11 - 1).abs() < P.ulp_scaled(16));
        assert!(j.a12.abs() < P.ulp_scaled(16));
    }

    #[test]
    fn periodicity_near_one() {
        let map = preset();
        let just_below = 1 - P.ulp_scaled(0);
        let a = map.deformation_f(&just_below);
        let b = map.deformation_f(&Real::zero(P));
        assert!((a - b).abs() < P.ulp_scaled(8));
    }
}
