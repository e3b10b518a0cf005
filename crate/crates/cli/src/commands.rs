//! One function per subcommand, each producing a [`Table`].

use clap::{Args, ValueEnum};
use splitlab::manifold::ManifoldCurve;
use splitlab::regularity::{diff1_along, diff2_along, log_spaced_offsets};
use splitlab::{
    expansion_grid, grid_points, h_scan_points, highlight_points, trace_manifold,
    verify, Branch, Direction, GridSpec, OffsetMode, Real, ScanSettings, SplittingSample, TorusPoint,
    VerifySettings,
};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Table;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum OffsetArg {
    #[default]
    Corner,
    Center,
}

impl OffsetArg {
    fn mode(self) -> OffsetMode {
        match self {
            OffsetArg::Corner => OffsetMode::CellCorner,
            OffsetArg::Center => OffsetMode::CellCenter,
        }
    }

    fn name(self) -> &'static str {
        match self {
            OffsetArg::Corner => "corner",
            OffsetArg::Center => "center",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Theta1,
    #[default]
    Theta2,
}

impl DirectionArg {
    fn direction(self) -> Direction {
        match self {
            DirectionArg::Theta1 => Direction::Theta1,
            DirectionArg::Theta2 => Direction::Theta2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            DirectionArg::Theta1 => "theta1",
            DirectionArg::Theta2 => "theta2",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    Stable,
    Unstable,
    #[default]
    Both,
}

fn kv(k: &str, v: impl ToString) -> (String, String) {
    (k.to_owned(), v.to_string())
}

fn grid_spec(n1: usize, n2: usize, offset: OffsetArg) -> CliResult<GridSpec> {
    if n1 == 0 || n2 == 0 {
        return Err(CliError::Validation(format!("grid dimensions must be positive, got {n1}x{n2}")));
    }
    Ok(GridSpec::with_mode(n1, n2, offset.mode())?)
}

#[derive(Args, Clone, Debug, Default)]
pub struct VerifyArgs {
    /// Points used for the power-iteration checks.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

pub fn verify_cmd(cfg: &RunConfig, a: &VerifyArgs) -> CliResult<(Table, Option<CliError>)> {
    let settings = VerifySettings { orbit_len: cfg.orbit_len, rate_points: a.points, ..Default::default() };
    let report = verify(&cfg.map, &settings)?;
    let mut prov = cfg.provenance();
    prov.push(kv("points", a.points));
    let mut t = Table::new("verify", prov, &["check", "passed", "deviation", "tolerance"]);
    for c in &report.checks {
        t.push(vec![c.name.into(), c.passed.into(), (&c.deviation).into(), (&c.tolerance).into()]);
    }
    let failed: Vec<&str> = report.failures().map(|c| c.name).collect();
    let err = (!failed.is_empty()).then(|| CliError::Invariant(format!("invariant failed: {}", failed.join(", "))));
    Ok((t, err))
}

#[derive(Args, Clone, Debug, Default)]
pub struct RateArgs {
    /// First coordinate; the fixed point when both are absent.
    #[arg(long)]
    pub theta1: Option<String>,
    #[arg(long)]
    pub theta2: Option<String>,
}

pub fn rate_cmd(cfg: &RunConfig, a: &RateArgs) -> CliResult<Table> {
    let p = match (&a.theta1, &a.theta2) {
        (None, None) => cfg.map.fixed_point(),
        (Some(t1), Some(t2)) => TorusPoint::new(cfg.real("theta1", t1)?, cfg.real("theta2", t2)?)?,
        _ => return Err(CliError::Validation("give both --theta1 and --theta2 or neither".into())),
    };
    let s = SplittingSample::compute(&cfg.map, &p, cfg.orbit_len)?;
    let mut t = Table::new(
        "rate",
        cfg.provenance(),
        &[
            "theta1", "theta2", "lambda_u", "lambda_s", "e_u_x", "e_u_y", "e_s_x", "e_s_y", "residual_u",
            "residual_s", "sin_angle",
        ],
    );
    t.push(vec![
        (&p.theta1).into(),
        (&p.theta2).into(),
        (&s.lambda_u).into(),
        (&s.lambda_s).into(),
        (&s.e_u.x).into(),
        (&s.e_u.y).into(),
        (&s.e_s.x).into(),
        (&s.e_s.y).into(),
        (&s.residual_u).into(),
        (&s.residual_s).into(),
        s.sin_angle().into(),
    ]);
    Ok(t)
}

#[derive(Args, Clone, Debug, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long, value_enum, default_value_t = OffsetArg::Corner)]
    pub offset_mode: OffsetArg,
}

pub fn grid_cmd(cfg: &RunConfig, a: &GridArgs) -> CliResult<Table> {
    let n = cfg.sizes().grid;
    let (n1, n2) = (a.n1.unwrap_or(n), a.n2.unwrap_or(n));
    let grid = grid_spec(n1, n2, a.offset_mode)?;
    let rows = expansion_grid(&cfg.map, &grid, cfg.orbit_len)?;
    let mut prov = cfg.provenance();
    prov.extend([kv("n1", n1), kv("n2", n2), kv("offset_mode", a.offset_mode.name())]);
    let mut t = Table::new("grid", prov, &["theta1", "theta2", "lambda_u"]);
    for (p, l) in rows {
        t.push(vec![p.theta1.into(), p.theta2.into(), l.into()]);
    }
    Ok(t)
}

#[derive(Args, Clone, Debug, Default)]
pub struct DiffArgs {
    /// 1 for the symmetric first quotient, 2 for the second quotient.
    #[arg(long)]
    pub order: u8,
    /// Offset; defaults to 1e-4.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    #[arg(long, value_enum, default_value_t = OffsetArg::Corner)]
    pub offset_mode: OffsetArg,
    #[arg(long, value_enum, default_value_t = DirectionArg::Theta2)]
    pub direction: DirectionArg,
}

pub fn diff_cmd(cfg: &RunConfig, a: &DiffArgs) -> CliResult<Table> {
    if a.order != 1 && a.order != 2 {
        return Err(CliError::Validation(format!("--order must be 1 or 2, got {}", a.order)));
    }
    let h_text = a.h.as_deref().unwrap_or("1e-4");
    let h = cfg.real("h", h_text)?;
    let n = cfg.sizes().diff;
    let (n1, n2) = (a.n1.unwrap_or(n), a.n2.unwrap_or(n));
    let grid = grid_spec(n1, n2, a.offset_mode)?;
    let points = grid_points(&grid, cfg.prec);
    let dir = a.direction.direction();
    let quotient = |p: &TorusPoint| match a.order {
        1 => diff1_along(&cfg.map, p, &h, cfg.orbit_len, dir),
        _ => diff2_along(&cfg.map, p, &h, cfg.orbit_len, dir),
    };
    let values = points.par_iter().map(quotient).collect::<splitlab::Result<Vec<_>>>()?;
    let mut prov = cfg.provenance();
    prov.extend([
        kv("order", a.order),
        kv("h", h.to_sci(36)),
        kv("n1", n1),
        kv("n2", n2),
        kv("offset_mode", a.offset_mode.name()),
        kv("direction", a.direction.name()),
    ]);
    let mut t = Table::new("diff", prov, &["theta1", "theta2", "value"]);
    for (p, v) in points.into_iter().zip(values) {
        t.push(vec![p.theta1.into(), p.theta2.into(), v.into()]);
    }
    Ok(t)
}

#[derive(Args, Clone, Debug, Default)]
pub struct HscanArgs {
    /// Grid side; the scan runs on an n×n lattice plus the highlight points.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub h_min: Option<String>,
    #[arg(long)]
    pub h_max: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub points_per_decade: usize,
    #[arg(long)]
    pub h_ref: Option<String>,
    #[arg(long, value_enum, default_value_t = OffsetArg::Corner)]
    pub offset_mode: OffsetArg,
    #[arg(long, value_enum, default_value_t = DirectionArg::Theta2)]
    pub direction: DirectionArg,
}

pub fn hscan_cmd(cfg: &RunConfig, a: &HscanArgs) -> CliResult<Table> {
    let n = a.n.unwrap_or(cfg.sizes().hscan);
    let grid = grid_spec(n, n, a.offset_mode)?;
    let h_min = cfg.real("h-min", a.h_min.as_deref().unwrap_or("1e-10"))?;
    let h_max = cfg.real("h-max", a.h_max.as_deref().unwrap_or("1e-2"))?;
    let h_ref = cfg.real("h-ref", a.h_ref.as_deref().unwrap_or("1e-16"))?;
    if h_ref >= h_min {
        return Err(CliError::Validation(format!(
            "--h-ref ({}) must be below --h-min ({})",
            h_ref.to_sci(6),
            h_min.to_sci(6)
        )));
    }
    let h_list = log_spaced_offsets(&h_max, &h_min, a.points_per_decade)?;
    let mut points = grid_points(&grid, cfg.prec);
    let n_grid = points.len();
    points.extend(highlight_points(cfg.prec));
    let mut settings = ScanSettings::new(h_list.clone(), h_ref.clone(), cfg.orbit_len);
    settings.direction = a.direction.direction();
    let scan = h_scan_points(&cfg.map, &points, &settings)?;

    let mut prov = cfg.provenance();
    prov.extend([
        kv("n", n),
        kv("offset_mode", a.offset_mode.name()),
        kv("direction", a.direction.name()),
        kv("h_min", h_min.to_sci(36)),
        kv("h_max", h_max.to_sci(36)),
        kv("points_per_decade", a.points_per_decade),
        kv("h_ref", h_ref.to_sci(36)),
        kv("h_count", h_list.len()),
    ]);
    let mut t = Table::new(
        "hscan",
        prov,
        &[
            "theta1",
            "theta2",
            "h",
            "d1",
            "d1_minus_ref_abs",
            "d2",
            "d2_over_abs_ln_h",
            "fitted_slope",
            "d1_ref",
            "fit_points",
            "highlight",
        ],
    );
    for (i, ps) in scan.points.iter().enumerate() {
        for r in &ps.records {
            t.push(vec![
                (&ps.point.theta1).into(),
                (&ps.point.theta2).into(),
                (&r.h).into(),
                (&r.d1).into(),
                ps.d1_error(r).into(),
                (&r.d2).into(),
                r.d2_over_abs_ln_h().into(),
                ps.fit.slope.as_ref().into(),
                (&ps.d1_ref).into(),
                ps.fit.points_used.into(),
                (i >= n_grid).into(),
            ]);
        }
    }
    Ok(t)
}

#[derive(Args, Clone, Debug, Default)]
pub struct ManifoldArgs {
    #[arg(long, value_enum, default_value_t = WhichArg::Both)]
    pub which: WhichArg,
    /// Offset of the seed segment from the fixed point, at most 1e-6.
    #[arg(long)]
    pub seed_eps: Option<String>,
    /// Largest allowed gap between consecutive points.
    #[arg(long)]
    pub spacing: Option<String>,
    /// Points per curve.
    #[arg(long)]
    pub max_points: Option<usize>,
}

pub fn manifold_cmd(cfg: &RunConfig, a: &ManifoldArgs) -> CliResult<Table> {
    let eps = cfg.real("seed-eps", a.seed_eps.as_deref().unwrap_or("1e-8"))?;
    let spacing = cfg.real("spacing", a.spacing.as_deref().unwrap_or("1e-3"))?;
    let max_points = a.max_points.unwrap_or(cfg.sizes().max_points);
    if max_points < 2 {
        return Err(CliError::Validation(format!("--max-points must be at least 2, got {max_points}")));
    }
    let trace = |b: Branch| trace_manifold(&cfg.map, b, &eps, &spacing, max_points);
    let curves: Vec<ManifoldCurve> = match a.which {
        WhichArg::Stable => vec![trace(Branch::Stable)?],
        WhichArg::Unstable => vec![trace(Branch::Unstable)?],
        WhichArg::Both => {
            let (s, u) = rayon::join(|| trace(Branch::Stable), || trace(Branch::Unstable));
            vec![s?, u?]
        }
    };
    let mut prov = cfg.provenance();
    prov.extend([
        kv("which", format!("{:?}", a.which).to_lowercase()),
        kv("seed_eps", eps.to_sci(36)),
        kv("spacing", spacing.to_sci(36)),
        kv("max_points", max_points),
    ]);
    let mut t = Table::new("manifold", prov, &["which", "param", "theta1", "theta2", "break_flag"]);
    let fp = cfg.map.fixed_point();
    t.push(vec!["fixed".into(), Real::zero(cfg.prec).into(), fp.theta1.into(), fp.theta2.into(), true.into()]);
    for c in &curves {
        for (k, p) in c.points.iter().enumerate() {
            // the first point of each curve starts a new polyline
            let brk = k == 0 || p.break_before;
            t.push(vec![
                c.which.name().into(),
                (&p.param).into(),
                (&p.point.theta1).into(),
                (&p.point.theta2).into(),
                brk.into(),
            ]);
        }
    }
    Ok(t)
}
