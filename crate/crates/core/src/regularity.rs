//! Difference quotients of the expansion rate and their scaling in the
//! offset `h`.
//!
//! For a `C²` rate the symmetric first quotient would converge like `h²`
//! and the second quotient would converge at all. Here the first quotient
//! converges like `h` and the second grows like `|ln h|`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{BlaschkeMap, TorusPoint};
use crate::real::{Precision, Real};
use crate::splitting::expansion_rate;

/// Five generic points singled out in scans.
pub const HIGHLIGHT_POINTS: [(&str, &str); 5] =
    [("0.1", "0.1"), ("0.3", "0.7"), ("0.5", "0.5"), ("0.7", "0.3"), ("0.9", "0.9")];

pub fn highlight_points(prec: Precision) -> Vec<TorusPoint> {
    HIGHLIGHT_POINTS
        .iter()
        .map(|(a, b)| {
            let t1 = Real::parse(prec, a).expect("literal");
            let t2 = Real::parse(prec, b).expect("literal");
            TorusPoint::new(t1, t2).expect("preset lies in the unit square")
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OffsetMode {
    /// `(i/n1, j/n2)`
    #[default]
    CellCorner,
    /// `((i + ½)/n1, (j + ½)/n2)`
    CellCenter,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    pub offset_mode: OffsetMode,
}

impl GridSpec {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        GridSpec::with_mode(n1, n2, OffsetMode::CellCorner)
    }

    pub fn with_mode(n1: usize, n2: usize, offset_mode: OffsetMode) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Parameter(format!("grid dimensions must be positive, got {n1}x{n2}")));
        }
        Ok(GridSpec { n1, n2, offset_mode })
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The lattice of `grid`, row-major with `θ₁` as the slow index.
pub fn grid_points(grid: &GridSpec, prec: Precision) -> Vec<TorusPoint> {
    let coord = |i: usize, n: usize| match grid.offset_mode {
        OffsetMode::CellCorner => Real::ratio(prec, i as i64, n as i64),
        OffsetMode::CellCenter => Real::ratio(prec, 2 * i as i64 + 1, 2 * n as i64),
    };
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            out.push(TorusPoint { theta1: coord(i, grid.n1), theta2: coord(j, grid.n2) });
        }
    }
    out
}

/// `λ_u` at every grid point, in grid order.
pub fn expansion_grid(
    map: &BlaschkeMap,
    grid: &GridSpec,
    orbit_len: usize,
) -> Result<Vec<(TorusPoint, Real)>> {
    let points = grid_points(grid, map.params().prec());
    points
        .into_par_iter()
        .map(|p| {
            let l = expansion_rate(map, &p, orbit_len)?;
            Ok((p, l))
        })
        .collect()
}

/// Coordinate along which offsets are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Direction {
    Theta1,
    #[default]
    Theta2,
}

/// Smallest admissible `h` for the first quotient: `2^(40 − prec)`.
pub fn diff1_floor(prec: Precision) -> Real {
    prec.ulp_scaled(40)
}

/// Smallest admissible `h` for the second quotient: `h² ≥ 2^(40 − prec)`.
pub fn diff2_floor(prec: Precision) -> Real {
    prec.ulp_scaled(40).sqrt()
}

fn check_offset(map: &BlaschkeMap, h: &Real, order: u8) -> Result<()> {
    let prec = map.params().prec();
    if h.prec() != prec {
        return Err(Error::PrecisionMismatch { expected: prec, found: h.prec() });
    }
    if !h.is_finite() || *h <= 0 {
        return Err(Error::Parameter(format!("offset must be positive, got {h:?}")));
    }
    let floor = if order == 1 { diff1_floor(prec) } else { diff2_floor(prec) };
    if *h < floor {
        return Err(Error::PrecisionFloor {
            order,
            h: h.to_sci(6),
            min_h: floor.to_sci(3),
            prec,
        });
    }
    Ok(())
}

fn shifted(p: &TorusPoint, h: &Real, dir: Direction) -> (TorusPoint, TorusPoint) {
    let zero = Real::zero(h.prec());
    let minus = -h;
    match dir {
        Direction::Theta2 => (p.offset(&zero, h), p.offset(&zero, &minus)),
        Direction::Theta1 => (p.offset(h, &zero), p.offset(&minus, &zero)),
    }
}

fn rates_around(
    map: &BlaschkeMap,
    p: &TorusPoint,
    h: &Real,
    orbit_len: usize,
    dir: Direction,
) -> Result<(Real, Real)> {
    let (plus, minus) = shifted(p, h, dir);
    Ok((expansion_rate(map, &plus, orbit_len)?, expansion_rate(map, &minus, orbit_len)?))
}

fn first_quotient(plus: &Real, minus: &Real, h: &Real) -> Real {
    (plus - minus) / (h * 2)
}

fn second_quotient(plus: &Real, minus: &Real, center: &Real, h: &Real) -> Real {
    (plus + minus - &(center * 2)) / h.square()
}

/// `[λ_u(θ₁, θ₂ + h) − λ_u(θ₁, θ₂ − h)] / 2h`.
pub fn diff1(map: &BlaschkeMap, p: &TorusPoint, h: &Real, orbit_len: usize) -> Result<Real> {
    diff1_along(map, p, h, orbit_len, Direction::Theta2)
}

pub fn diff1_along(
    map: &BlaschkeMap,
    p: &TorusPoint,
    h: &Real,
    orbit_len: usize,
    dir: Direction,
) -> Result<Real> {
    check_offset(map, h, 1)?;
    let (plus, minus) = rates_around(map, p, h, orbit_len, dir)?;
    Ok(first_quotient(&plus, &minus, h))
}

/// `[λ_u(θ₁, θ₂ + h) + λ_u(θ₁, θ₂ − h) − 2λ_u(θ)] / h²`.
pub fn diff2(map: &BlaschkeMap, p: &TorusPoint, h: &Real, orbit_len: usize) -> Result<Real> {
    diff2_along(map, p, h, orbit_len, Direction::Theta2)
}

pub fn diff2_along(
    map: &BlaschkeMap,
    p: &TorusPoint,
    h: &Real,
    orbit_len: usize,
    dir: Direction,
) -> Result<Real> {
    check_offset(map, h, 2)?;
    let center = expansion_rate(map, p, orbit_len)?;
    let (plus, minus) = rates_around(map, p, h, orbit_len, dir)?;
    Ok(second_quotient(&plus, &minus, &center, h))
}

/// Both quotients at one offset, sharing the three rate evaluations.
#[derive(Clone, Debug)]
pub struct DiffRecord {
    pub point: TorusPoint,
    pub h: Real,
    pub d1: Real,
    pub d2: Real,
    /// `λ_u` at the centre point.
    pub lambda_u: Real,
}

impl DiffRecord {
    pub fn compute(
        map: &BlaschkeMap,
        p: &TorusPoint,
        h: &Real,
        orbit_len: usize,
        dir: Direction,
    ) -> Result<Self> {
        check_offset(map, h, 2)?;
        let center = expansion_rate(map, p, orbit_len)?;
        Self::with_center(map, p, h, orbit_len, dir, center)
    }

    fn with_center(
        map: &BlaschkeMap,
        p: &TorusPoint,
        h: &Real,
        orbit_len: usize,
        dir: Direction,
        center: Real,
    ) -> Result<Self> {
        let (plus, minus) = rates_around(map, p, h, orbit_len, dir)?;
        Ok(DiffRecord {
            point: p.clone(),
            h: h.clone(),
            d1: first_quotient(&plus, &minus, h),
            d2: second_quotient(&plus, &minus, &center, h),
            lambda_u: center,
        })
    }

    /// `d2 / |ln h|`, the quantity that stays bounded.
    pub fn d2_over_abs_ln_h(&self) -> Real {
        &self.d2 / &self.h.ln().abs()
    }
}

/// Least-squares slope of `ln|d1 − d1_ref|` against `ln h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    /// `None` when fewer than three offsets were usable.
    pub slope: Option<Real>,
    pub points_used: usize,
}

impl SlopeFit {
    pub fn is_degenerate(&self) -> bool {
        self.slope.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct PointScan {
    pub point: TorusPoint,
    pub d1_ref: Real,
    /// Sorted by descending `h`.
    pub records: Vec<DiffRecord>,
    pub fit: SlopeFit,
}

impl PointScan {
    pub fn d1_error(&self, record: &DiffRecord) -> Real {
        (&record.d1 - &self.d1_ref).abs()
    }
}

#[derive(Clone, Debug)]
pub struct ScanResult {
    pub points: Vec<PointScan>,
}

impl ScanResult {
    /// Fitted slopes of the non-degenerate points.
    pub fn slopes(&self) -> Vec<f64> {
        self.points.iter().filter_map(|p| p.fit.slope.as_ref().map(Real::to_f64)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ScanSettings {
    pub h_list: Vec<Real>,
    pub h_ref: Real,
    pub orbit_len: usize,
    pub direction: Direction,
}

impl ScanSettings {
    pub fn new(h_list: Vec<Real>, h_ref: Real, orbit_len: usize) -> Self {
        ScanSettings { h_list, h_ref, orbit_len, direction: Direction::Theta2 }
    }

    fn validate(&self, map: &BlaschkeMap) -> Result<Vec<Real>> {
        if self.h_list.is_empty() {
            return Err(Error::Parameter("offset list is empty".into()));
        }
        if self.orbit_len == 0 {
            return Err(Error::Parameter("orbit length must be at least 1".into()));
        }
        check_offset(map, &self.h_ref, 1)?;
        for h in &self.h_list {
            check_offset(map, h, 2)?;
            if *h <= self.h_ref {
                return Err(Error::Parameter(format!(
                    "reference offset {:?} must be below every scanned offset (found {h:?})",
                    self.h_ref
                )));
            }
        }
        let mut hs = self.h_list.clone();
        hs.sort_by(|a, b| b.partial_cmp(a).expect("offsets are finite"));
        hs.dedup();
        Ok(hs)
    }
}

/// `10^-from, 10^-(from+1), …, 10^-to`.
pub fn decade_offsets(prec: Precision, from: i32, to: i32) -> Vec<Real> {
    (from..=to).map(|k| Real::pow10(prec, -k)).collect()
}

/// Log-spaced offsets from `h_max` down to `h_min` inclusive, with
/// `per_decade` points per factor of ten, anchored at `h_max`.
pub fn log_spaced_offsets(h_max: &Real, h_min: &Real, per_decade: usize) -> Result<Vec<Real>> {
    if per_decade == 0 {
        return Err(Error::Parameter("points per decade must be positive".into()));
    }
    if *h_min <= 0 || h_min > h_max {
        return Err(Error::Parameter(format!("need 0 < h_min <= h_max, got [{h_min:?}, {h_max:?}]")));
    }
    let prec = h_max.prec();
    let ten = Real::from_i32(prec, 10);
    let step = ten.ln() / per_decade as i32;
    let span = (h_max / h_min).ln();
    // tolerate rounding in the endpoint so that 1e-2..1e-10 yields nine values
    let count = ((span / &step) + Real::pow10(prec, -20)).floor().to_f64() as i64;
    let log_max = h_max.ln();
    let mut out = Vec::with_capacity(count as usize + 1);
    for k in 0..=count {
        if k % per_decade as i64 == 0 {
            // exact decade multiples of h_max
            let decades = (k / per_decade as i64) as i32;
            out.push(h_max / &Real::pow10(prec, decades));
        } else {
            let e = &log_max - &(&step * k as i32);
            out.push(e.exp());
        }
    }
    Ok(out)
}

fn fit_slope(scan_points: &[(Real, Real)]) -> SlopeFit {
    let n = scan_points.len();
    if n < 3 {
        return SlopeFit { slope: None, points_used: n };
    }
    let prec = scan_points[0].0.prec();
    let sum = |f: &dyn Fn(&(Real, Real)) -> Real| {
        scan_points.iter().fold(Real::zero(prec), |acc, p| acc + f(p))
    };
    let mx = sum(&|p| p.0.clone()) / n as i32;
    let my = sum(&|p| p.1.clone()) / n as i32;
    let sxx = sum(&|p| (&p.0 - &mx).square());
    let sxy = sum(&|p| (&p.0 - &mx) * (&p.1 - &my));
    if sxx.is_zero() {
        return SlopeFit { slope: None, points_used: n };
    }
    SlopeFit { slope: Some(sxy / sxx), points_used: n }
}

/// Rounding noise of the first quotient at offset `h` for a rate of size
/// `lambda`: `2^(20 − prec) · max(1, |λ|) / h`.
pub fn d1_noise_floor(lambda: &Real, h: &Real) -> Real {
    let prec = h.prec();
    prec.ulp_scaled(20) * lambda.abs().max(Real::one(prec)) / h
}

fn scan_point(map: &BlaschkeMap, p: &TorusPoint, hs: &[Real], s: &ScanSettings) -> Result<PointScan> {
    let (rp, rm) = rates_around(map, p, &s.h_ref, s.orbit_len, s.direction)?;
    let d1_ref = first_quotient(&rp, &rm, &s.h_ref);
    let center = expansion_rate(map, p, s.orbit_len)?;
    let mut records = Vec::with_capacity(hs.len());
    for h in hs {
        records.push(DiffRecord::with_center(map, p, h, s.orbit_len, s.direction, center.clone())?);
    }
    let window_floor = &s.h_ref * 100;
    let usable: Vec<(Real, Real)> = records
        .iter()
        .filter(|r| r.h >= window_floor)
        .filter_map(|r| {
            let err = (&r.d1 - &d1_ref).abs();
            let noise = d1_noise_floor(&r.lambda_u, &r.h) * 10;
            (err > noise).then(|| (r.h.ln(), err.ln()))
        })
        .collect();
    Ok(PointScan { point: p.clone(), d1_ref, records, fit: fit_slope(&usable) })
}

/// Runs the offset sweep at arbitrary points, in the given order.
pub fn h_scan_points(
    map: &BlaschkeMap,
    points: &[TorusPoint],
    settings: &ScanSettings,
) -> Result<ScanResult> {
    let hs = settings.validate(map)?;
    let points = points
        .par_iter()
        .map(|p| scan_point(map, p, &hs, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult { points })
}

/// Offset sweep over a lattice.
pub fn h_scan(
    map: &BlaschkeMap,
    grid: &GridSpec,
    h_list: &[Real],
    h_ref: &Real,
    orbit_len: usize,
) -> Result<ScanResult> {
    let settings = ScanSettings::new(h_list.to_vec(), h_ref.clone(), orbit_len);
    h_scan_points(map, &grid_points(grid, map.params().prec()), &settings)
}
