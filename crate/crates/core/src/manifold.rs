//! Stable and unstable manifolds of the fixed point.
//!
//! A fundamental segment `θ* + ε λ^t e`, `t ∈ [0, 1]`, is laid along the
//! eigendirection and iterated. Each iterate of the segment covers the next
//! piece of the manifold; midpoints are inserted in `t` until consecutive
//! images are within the requested spacing.

use crate::error::{Error, Result};
use crate::map::{TorusMap, TorusPoint};
use crate::real::{circle_delta, normalize, Mat2, Real, Vec2};

/// Bisection levels allowed between two neighbouring parameters.
pub const MAX_BISECTION_DEPTH: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Stable,
    Unstable,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Stable => "stable",
            Branch::Unstable => "unstable",
        }
    }
}

/// Eigendata of `DT(θ*)`. Both eigenvectors are unit length with `y ≥ 0`.
#[derive(Clone, Debug)]
pub struct FixedPointEigen {
    pub point: TorusPoint,
    pub lambda_u: Real,
    pub lambda_s: Real,
    pub e_u: Vec2,
    pub e_s: Vec2,
}

fn eigvec(j: &Mat2, lambda: &Real) -> Result<Vec2> {
    // rows of (J − λ) are orthogonal to the eigenvector; take the better one
    let from_row1 = Vec2 { x: j.a12.clone(), y: lambda - &j.a11 };
    let from_row2 = Vec2 { x: lambda - &j.a22, y: j.a21.clone() };
    let v = if from_row1.norm() >= from_row2.norm() { from_row1 } else { from_row2 };
    let (mut u, _) = normalize(&v)?;
    if u.y.is_sign_negative() || (u.y.is_zero() && u.x.is_sign_negative()) {
        u = -&u;
    }
    Ok(u)
}

pub fn eigen_directions_at_fixed_point<M: TorusMap>(map: &M) -> Result<FixedPointEigen> {
    let point = map.fixed_point();
    let j = map.jacobian(&point);
    let tr = j.trace();
    let disc = tr.square() - (j.det() * 4);
    if disc <= 0 {
        return Err(Error::NonHyperbolic);
    }
    let root = disc.sqrt();
    let lambda_u = (&tr + &root) / 2;
    let lambda_s = (&tr - &root) / 2;
    let e_u = eigvec(&j, &lambda_u)?;
    let e_s = eigvec(&j, &lambda_s)?;
    Ok(FixedPointEigen { point, lambda_u, lambda_s, e_u, e_s })
}

/// `t ↦ θ* + ε λ^t e` on the torus.
#[derive(Clone, Debug)]
pub struct SeedSegment {
    pub origin: TorusPoint,
    pub direction: Vec2,
    pub eps: Real,
    /// `ln λ` of the multiplier along `direction` for the iterated map.
    pub ln_factor: Real,
    pub branch: Branch,
}

impl SeedSegment {
    pub fn point(&self, t: &Real) -> TorusPoint {
        let r = &self.eps * &(&self.ln_factor * t).exp();
        self.origin.offset(&(&self.direction.x * &r), &(&self.direction.y * &r))
    }

    fn step<M: TorusMap>(&self, map: &M, p: &TorusPoint) -> TorusPoint {
        match self.branch {
            Branch::Unstable => map.forward(p),
            Branch::Stable => map.backward(p),
        }
    }

    /// `F^depth(point(t))`, with `F = T` for unstable and `T⁻¹` for stable.
    pub fn image<M: TorusMap>(&self, map: &M, depth: usize, t: &Real) -> TorusPoint {
        let mut p = self.point(t);
        for _ in 0..depth {
            p = self.step(map, &p);
        }
        p
    }
}

#[derive(Clone, Debug)]
pub struct ManifoldPoint {
    /// `depth + t`; increases along the curve.
    pub param: Real,
    pub t: Real,
    pub depth: usize,
    pub point: TorusPoint,
    /// The wrapped curve jumps across a side of the unit square just before
    /// this point.
    pub break_before: bool,
}

#[derive(Clone, Debug)]
pub struct ManifoldCurve {
    pub which: Branch,
    pub seed_eps: Real,
    pub spacing: Real,
    pub segment: SeedSegment,
    pub points: Vec<ManifoldPoint>,
}

impl ManifoldCurve {
    /// Largest torus distance between consecutive points.
    pub fn max_gap(&self) -> Real {
        let prec = self.seed_eps.prec();
        self.points
            .windows(2)
            .map(|w| w[1].point.dist(&w[0].point))
            .fold(Real::zero(prec), Real::max)
    }
}

fn crosses_boundary(a: &TorusPoint, b: &TorusPoint) -> bool {
    let half = Real::ratio(a.prec(), 1, 2);
    (&b.theta1 - &a.theta1).abs() > half || (&b.theta2 - &a.theta2).abs() > half
}

/// Inserts midpoints between consecutive samples until every gap is at most
/// `spacing`.
fn refine<M: TorusMap>(
    map: &M,
    seg: &SeedSegment,
    depth: usize,
    coarse: Vec<(Real, TorusPoint)>,
    spacing: &Real,
) -> Result<Vec<(Real, TorusPoint)>> {
    let mut out = Vec::with_capacity(coarse.len() * 2);
    let mut iter = coarse.into_iter();
    let Some(first) = iter.next() else { return Ok(out) };
    out.push(first);
    for next in iter {
        // stack of pending right endpoints with their bisection level
        let mut pending = vec![(next, 0usize)];
        while let Some((right, level)) = pending.pop() {
            let left = out.last().expect("non-empty");
            if right.1.dist(&left.1) <= *spacing {
                out.push(right);
                continue;
            }
            if level >= MAX_BISECTION_DEPTH {
                return Err(Error::SpacingUnreachable {
                    depth,
                    lo: left.0.to_sci(20),
                    hi: right.0.to_sci(20),
                    spacing: spacing.to_sci(6),
                });
            }
            let mid_t = (&left.0 + &right.0) / 2;
            let mid = seg.image(map, depth, &mid_t);
            pending.push((right, level + 1));
            pending.push(((mid_t, mid), level + 1));
        }
    }
    Ok(out)
}

/// Traces the chosen manifold until `max_points` points have been produced.
pub fn trace_manifold<M: TorusMap>(
    map: &M,
    which: Branch,
    seed_eps: &Real,
    spacing: &Real,
    max_points: usize,
) -> Result<ManifoldCurve> {
    let prec = map.prec();
    if *seed_eps <= 0 || *seed_eps > Real::pow10(prec, -6) {
        return Err(Error::Parameter(format!("seed offset must lie in (0, 1e-6], got {seed_eps:?}")));
    }
    if !spacing.is_finite() || *spacing <= 0 {
        return Err(Error::Parameter(format!("spacing must be positive, got {spacing:?}")));
    }
    if max_points < 2 {
        return Err(Error::Parameter(format!("max_points must be at least 2, got {max_points}")));
    }
    let eig = eigen_directions_at_fixed_point(map)?;
    let (direction, ln_factor) = match which {
        Branch::Unstable => (eig.e_u.clone(), eig.lambda_u.ln()),
        Branch::Stable => (eig.e_s.clone(), -eig.lambda_s.ln()),
    };
    let seg = SeedSegment {
        origin: eig.point.clone(),
        direction,
        eps: seed_eps.clone(),
        ln_factor,
        branch: which,
    };

    let zero = Real::zero(prec);
    let one = Real::one(prec);
    let mut level = vec![(zero.clone(), seg.point(&zero)), (one.clone(), seg.point(&one))];
    let mut points: Vec<ManifoldPoint> = Vec::new();
    let mut depth = 0usize;
    'outer: loop {
        level = refine(map, &seg, depth, level, spacing)?;
        for (t, p) in &level {
            // t = 0 repeats the previous level's t = 1 image
            if depth > 0 && t.is_zero() {
                continue;
            }
            if points.len() == max_points {
                break 'outer;
            }
            let break_before = points.last().map_or(false, |prev| crosses_boundary(&prev.point, p));
            points.push(ManifoldPoint {
                param: t + depth as i32,
                t: t.clone(),
                depth,
                point: p.clone(),
                break_before,
            });
        }
        if points.len() >= max_points {
            break;
        }
        depth += 1;
        level = level.into_iter().map(|(t, p)| (t, seg.step(map, &p))).collect();
    }
    Ok(ManifoldCurve { which, seed_eps: seed_eps.clone(), spacing: spacing.clone(), segment: seg, points })
}

/// Offset of `p` from `origin` lifted to the plane, assuming the curve is
/// continuous and starts at `origin`: accumulates shortest steps.
pub fn unwrap_curve(origin: &TorusPoint, pts: &[ManifoldPoint]) -> Vec<(Real, Real)> {
    let prec = origin.prec();
    let mut acc = (Real::zero(prec), Real::zero(prec));
    let mut prev = origin.clone();
    let mut out = Vec::with_capacity(pts.len());
    for mp in pts {
        let d1 = circle_delta(&mp.point.theta1, &prev.theta1);
        let d2 = circle_delta(&mp.point.theta2, &prev.theta2);
        acc.0 += &d1;
        acc.1 += &d2;
        out.push((acc.0.clone(), acc.1.clone()));
        prev = mp.point.clone();
    }
    out
}
