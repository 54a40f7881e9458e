use std::fs;
use std::io::Write;

use miso_dof::oracle::{random_membership_audit, slice_vertices, verify_vertices};
use miso_dof::{
    synthesize as synthesize_plan, CsitProfile, DofTuple, PlanComponent, Rational, RegionDescription, RsScheme,
    SubsetConstraint, TimeSharingPlan, Transmission, UserSet,
};
use miso_dof_sim::sweep::{SweepSummary, DEFAULT_GRID};
use miso_dof_sim::{run_plan_sweep, write_csv};
use serde::Serialize;

use crate::args::{Format, ProfileSource, RegionArgs, SimulateArgs, SynthesizeArgs, VerifyArgs};
use crate::error::CliError;
use crate::order::UserOrder;

/// Slice grids larger than this are refused.
const MAX_SLICE_POINTS: u64 = 1_000_000;

fn parse_values(text: &str, what: &str) -> Result<Vec<Rational>, CliError> {
    let items: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::Parse(format!("{what} is empty")));
    }
    items
        .iter()
        .map(|s| s.parse::<Rational>().map_err(|e| CliError::Parse(format!("{what}: {e}"))))
        .collect()
}

fn load_profile(src: &ProfileSource) -> Result<CsitProfile, CliError> {
    let alphas = match (&src.alpha, &src.alpha_file) {
        (Some(list), _) => parse_values(list, "--alpha")?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
            parse_values(&text, "alpha file")?
        }
        (None, None) => return Err(CliError::Parse("no CSIT profile given".into())),
    };
    Ok(CsitProfile::new(alphas)?)
}

fn push_json<T: Serialize>(out: &mut Vec<u8>, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.push(b'\n');
    Ok(())
}

fn tuple_text(d: &DofTuple) -> String {
    d.to_string()
}

fn set_sum_text(s: UserSet) -> String {
    s.to_one_based().iter().map(|u| format!("d{u}")).collect::<Vec<_>>().join(" + ")
}

/// Constraints in input order: subsets over input users, listed by size then
/// lexicographically.
fn input_constraints(region: &RegionDescription, order: &UserOrder) -> Vec<SubsetConstraint> {
    UserSet::all_nonempty(region.k())
        .into_iter()
        .map(|s| SubsetConstraint { subset: s, rhs: region.rhs(order.set_to_canonical(s)).clone() })
        .collect()
}

/// Why `d` (canonical order) is not in the region, in input labels.
fn exterior_message(region: &RegionDescription, order: &UserOrder, d_input: &DofTuple, d: &DofTuple) -> Result<Option<String>, CliError> {
    let m = region.contains(d)?;
    if m.inside {
        return Ok(None);
    }
    let mut parts = Vec::new();
    let mut negative: Vec<usize> = m.negative.iter().map(|&c| order.input_user(c) + 1).collect();
    negative.sort_unstable();
    for u in negative {
        parts.push(format!("d{u} < 0"));
    }
    let mut violated: Vec<UserSet> = m.violated.iter().map(|&s| order.set_to_input(s)).collect();
    violated.sort();
    for s in violated {
        parts.push(format!(
            "S={s}: {} = {:?} > {:?}",
            set_sum_text(s),
            d_input.sum_over(s),
            region.rhs(order.set_to_canonical(s))
        ));
    }
    Ok(Some(format!("target {} lies outside the DoF region; violated: {}", tuple_text(d_input), parts.join("; "))))
}

#[derive(Serialize)]
struct RegionOut {
    alphas: Vec<Rational>,
    constraints: Vec<SubsetConstraint>,
    nonnegative: Vec<usize>,
}

pub fn region(a: &RegionArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let profile = load_profile(&a.profile)?;
    let order = UserOrder::new(&profile);
    let region = RegionDescription::build(profile.clone())?;
    if let Some(assignments) = &a.plot_slice {
        return plot_slice(&region, &order, assignments, a.resolution, out);
    }
    if a.resolution.is_some() {
        return Err(CliError::Parse("--resolution only applies with --plot-slice".into()));
    }
    let constraints = input_constraints(&region, &order);
    match a.format {
        Format::Json => push_json(
            out,
            &RegionOut { alphas: profile.user_alphas(), constraints, nonnegative: (1..=profile.k()).collect() },
        )?,
        Format::Table => {
            let alphas = DofTuple(profile.user_alphas());
            writeln!(out, "alpha = {alphas}")?;
            for c in &constraints {
                writeln!(out, "{} <= {:?}", set_sum_text(c.subset), c.rhs)?;
            }
            writeln!(out, "d_i >= 0 for i = 1..{}", profile.k())?;
        }
        Format::Csv => {
            writeln!(out, "subset,rhs")?;
            for c in &constraints {
                let users: Vec<String> = c.subset.to_one_based().iter().map(usize::to_string).collect();
                writeln!(out, "{},{:?}", users.join(" "), c.rhs)?;
            }
        }
    }
    Ok(())
}

/// Parses `d3=0.2,d1=0` into (input user, value) pairs.
fn parse_assignments(text: &str, k: usize) -> Result<Vec<(usize, Rational)>, CliError> {
    let mut fixed: Vec<(usize, Rational)> = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || CliError::Parse(format!("--plot-slice: expected dN=value, got {item:?}"));
        let (name, value) = item.split_once('=').ok_or_else(bad)?;
        let user: usize = name.trim().strip_prefix('d').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if user == 0 || user > k {
            return Err(CliError::Parse(format!("--plot-slice: user {user} out of range 1..={k}")));
        }
        if fixed.iter().any(|(u, _)| *u == user - 1) {
            return Err(CliError::Parse(format!("--plot-slice: d{user} fixed twice")));
        }
        let v: Rational = value.parse().map_err(|e| CliError::Parse(format!("--plot-slice: {e}")))?;
        fixed.push((user - 1, v));
    }
    if fixed.is_empty() {
        return Err(CliError::Parse("--plot-slice needs at least one assignment".into()));
    }
    if fixed.len() >= k {
        return Err(CliError::Parse("--plot-slice must leave at least one coordinate free".into()));
    }
    Ok(fixed)
}

/// Orders the vertices of a convex polygon counter-clockwise around their
/// centroid. The angles are only used for sorting; coordinates stay exact.
fn polygon_order(mut pts: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    if pts.len() < 3 {
        return pts;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0].to_f64()).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1].to_f64()).sum::<f64>() / n;
    let angle = |p: &Vec<Rational>| (p[1].to_f64() - cy).atan2(p[0].to_f64() - cx);
    pts.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    pts
}

fn plot_slice(region: &RegionDescription, order: &UserOrder, assignments: &str, resolution: Option<u32>, out: &mut Vec<u8>) -> Result<(), CliError> {
    let k = region.k();
    let fixed = parse_assignments(assignments, k)?;
    let canonical_fixed: Vec<(usize, Rational)> =
        fixed.iter().map(|(u, v)| (order.canonical_user(*u), v.clone())).collect();
    let (free, vertices) = slice_vertices(region, &canonical_fixed)?;
    if vertices.is_empty() {
        return Err(CliError::Exterior(format!("slice {assignments} does not meet the DoF region")));
    }
    // columns sorted by input label
    let mut columns: Vec<(usize, usize)> = free.iter().enumerate().map(|(i, &c)| (order.input_user(c), i)).collect();
    columns.sort_unstable();
    let reorder = |x: &DofTuple| columns.iter().map(|&(_, i)| x[i].clone()).collect::<Vec<Rational>>();
    let header: Vec<String> = columns.iter().map(|(u, _)| format!("d{}", u + 1)).collect();

    let points: Vec<Vec<Rational>> = if columns.len() == 2 {
        let ring = polygon_order(vertices.iter().map(reorder).collect());
        let n = resolution.unwrap_or(1) as i64;
        let mut pts = Vec::new();
        if ring.len() < 3 {
            pts = ring;
        } else {
            for (i, a) in ring.iter().enumerate() {
                let b = &ring[(i + 1) % ring.len()];
                for t in 0..n {
                    let t = Rational::new(t, n);
                    pts.push(a.iter().zip(b).map(|(x, y)| x + &(&t * &(y - x))).collect());
                }
            }
            pts.push(ring[0].clone());
        }
        pts
    } else if let Some(n) = resolution {
        grid_points(region, order, &fixed, &columns, n)?
    } else {
        vertices.iter().map(reorder).collect()
    };

    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let row: Vec<String> = p.iter().map(|x| x.to_f64().to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Points of the slice on the grid with step `1/n`, free coordinates in
/// column order.
fn grid_points(region: &RegionDescription, order: &UserOrder, fixed: &[(usize, Rational)], columns: &[(usize, usize)], n: u32) -> Result<Vec<Vec<Rational>>, CliError> {
    let dim = columns.len() as u32;
    let count = (n as u64 + 1).checked_pow(dim).filter(|&c| c <= MAX_SLICE_POINTS);
    let Some(count) = count else {
        return Err(CliError::Config(format!("slice grid with resolution {n} in {dim} dimensions is too large")));
    };
    let k = region.k();
    let mut base = vec![Rational::zero(); k];
    for (u, v) in fixed {
        base[*u] = v.clone();
    }
    let mut pts = Vec::new();
    for idx in 0..count {
        let mut rest = idx;
        let mut d_input = base.clone();
        let mut row = Vec::with_capacity(columns.len());
        for &(u, _) in columns {
            let step = (rest % (n as u64 + 1)) as i64;
            rest /= n as u64 + 1;
            let v = Rational::new(step, n as i64);
            d_input[u] = v.clone();
            row.push(v);
        }
        let d = order.tuple_to_canonical(&DofTuple(d_input))?;
        if region.is_inside(&d) {
            pts.push(row);
        }
    }
    Ok(pts)
}

#[derive(Serialize)]
struct SynthesizeOut {
    alphas: Vec<Rational>,
    target: DofTuple,
    plan: TimeSharingPlan,
}

fn write_plan_table(out: &mut Vec<u8>, plan: &TimeSharingPlan) -> Result<(), CliError> {
    writeln!(out, "achieved {}", tuple_text(&plan.achieved))?;
    for (m, c) in plan.components.iter().enumerate() {
        match &c.scheme {
            Transmission::Silence => writeln!(out, "component {}: weight {:?}, silence", m + 1, c.weight)?,
            Transmission::Rs(s) => {
                writeln!(out, "component {}: weight {:?}, rate splitting", m + 1, c.weight)?;
                let active: Vec<&str> = s.active.iter().map(|&on| if on { "on" } else { "off" }).collect();
                writeln!(out, "  levels a     = {}", DofTuple(s.levels.clone()))?;
                writeln!(out, "  private      = ({})", active.join(", "))?;
                writeln!(out, "  common split = {}", DofTuple(s.common_split.clone()))?;
            }
        }
    }
    Ok(())
}

fn plan_csv(out: &mut Vec<u8>, plan: &TimeSharingPlan) -> Result<(), CliError> {
    writeln!(out, "component,weight,kind,user,level,active,common_split")?;
    for (m, c) in plan.components.iter().enumerate() {
        match &c.scheme {
            Transmission::Silence => writeln!(out, "{},{:?},silence,,,,", m + 1, c.weight)?,
            Transmission::Rs(s) => {
                for j in 0..s.k() {
                    writeln!(out, "{},{:?},rs,{},{:?},{},{:?}", m + 1, c.weight, j + 1, s.levels[j], s.active[j], s.common_split[j])?;
                }
            }
        }
    }
    Ok(())
}

/// Synthesizes a plan for a target given in input order. Returns the
/// canonical plan.
fn plan_for_target(profile: &CsitProfile, order: &UserOrder, target: &str) -> Result<(DofTuple, TimeSharingPlan), CliError> {
    let d_input = DofTuple(parse_values(target, "--target")?);
    let d = order.tuple_to_canonical(&d_input)?;
    let region = RegionDescription::build(profile.clone())?;
    if let Some(msg) = exterior_message(&region, order, &d_input, &d)? {
        return Err(CliError::Exterior(msg));
    }
    Ok((d_input, synthesize_plan(profile, &d)?))
}

pub fn synthesize(a: &SynthesizeArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let profile = load_profile(&a.profile)?;
    let order = UserOrder::new(&profile);
    let (target, plan) = plan_for_target(&profile, &order, &a.target)?;
    let plan = plan.to_user_order(&profile)?;
    match a.format {
        Format::Json => push_json(out, &SynthesizeOut { alphas: profile.user_alphas(), target, plan })?,
        Format::Table => write_plan_table(out, &plan)?,
        Format::Csv => plan_csv(out, &plan)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct VertexOut {
    point: DofTuple,
    synthesized: bool,
    plan: Option<TimeSharingPlan>,
}

#[derive(Serialize)]
struct ViolationOut {
    scheme: RsScheme,
    total: DofTuple,
    violated: Vec<UserSet>,
}

#[derive(Serialize)]
struct AuditOut {
    trials: u64,
    seed: u64,
    violations: Vec<ViolationOut>,
}

#[derive(Serialize)]
struct VerifyOut {
    alphas: Vec<Rational>,
    systems: u64,
    vertices: Vec<VertexOut>,
    audit: AuditOut,
    passed: bool,
}

pub fn verify(a: &VerifyArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let profile = load_profile(&a.profile)?;
    let order = UserOrder::new(&profile);
    let report = verify_vertices(&profile, a.max_k)?;
    let audit = random_membership_audit(&profile, a.trials, a.seed)?;

    let mut vertices = report
        .vertices
        .iter()
        .map(|v| {
            Ok(VertexOut {
                point: order.tuple_to_input(&v.point),
                synthesized: v.synthesized == Some(true),
                plan: v.plan.as_ref().map(|p| p.to_user_order(&profile)).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    vertices.sort_by(|x, y| x.point.cmp(&y.point));
    let violations = audit
        .violations
        .iter()
        .map(|v| {
            let mut violated: Vec<UserSet> = v.violated.iter().map(|&s| order.set_to_input(s)).collect();
            violated.sort();
            Ok(ViolationOut { scheme: v.scheme.to_user_order(&profile)?, total: order.tuple_to_input(&v.total), violated })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let failed = vertices.iter().filter(|v| !v.synthesized).count();
    let passed = failed == 0 && violations.is_empty();
    let result = VerifyOut {
        alphas: profile.user_alphas(),
        systems: u64::try_from(report.systems).unwrap_or(u64::MAX),
        vertices,
        audit: AuditOut { trials: audit.trials, seed: audit.seed, violations },
        passed,
    };

    match a.format {
        Format::Json => push_json(out, &result)?,
        Format::Csv => {
            let cols: Vec<String> = (1..=profile.k()).map(|u| format!("d{u}")).collect();
            writeln!(out, "{},synthesized", cols.join(","))?;
            for v in &result.vertices {
                let row: Vec<String> = v.point.iter().map(|x| format!("{x:?}")).collect();
                writeln!(out, "{},{}", row.join(","), v.synthesized)?;
            }
        }
        Format::Table => {
            writeln!(out, "alpha = {}", DofTuple(result.alphas.clone()))?;
            writeln!(out, "{} linear systems, {} vertices", result.systems, result.vertices.len())?;
            for v in &result.vertices {
                writeln!(out, "  {} {}", tuple_text(&v.point), if v.synthesized { "ok" } else { "NOT SYNTHESIZED" })?;
            }
            writeln!(out, "audit: {} random schemes (seed {}), {} violations", audit.trials, audit.seed, result.audit.violations.len())?;
            for v in &result.audit.violations {
                writeln!(out, "  {} violates {:?}", tuple_text(&v.total), v.violated.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
            }
            writeln!(out, "{}", if passed { "PASS" } else { "FAIL" })?;
        }
    }
    if passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!("{failed} vertices not synthesized, {} audit violations", result.audit.violations.len())))
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("--grid: cannot parse {s:?}"))))
        .collect()
}

/// Reads a user-order scheme file and returns the canonical single-component
/// plan.
fn plan_from_scheme_file(profile: &CsitProfile, path: &std::path::Path) -> Result<TimeSharingPlan, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let scheme: RsScheme =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let k = profile.k();
    if scheme.levels.len() != k || scheme.active.len() != k || scheme.common_split.len() != k {
        return Err(CliError::Config(format!("scheme must list {k} users in every field")));
    }
    let scheme = scheme.to_canonical(profile)?;
    if let Some(v) = scheme.validate(profile).first() {
        return Err(CliError::Config(format!("invalid scheme: {v}")));
    }
    let achieved = scheme.total_dof(profile)?.total;
    Ok(TimeSharingPlan { components: vec![PlanComponent { weight: Rational::one(), scheme: Transmission::Rs(scheme) }], achieved })
}

pub fn simulate(a: &SimulateArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let profile = load_profile(&a.profile)?;
    let order = UserOrder::new(&profile);
    let grid = match &a.grid {
        Some(text) => parse_grid(text)?,
        None => DEFAULT_GRID.to_vec(),
    };
    if a.trials == 0 {
        return Err(CliError::Config("--trials must be positive".into()));
    }
    let plan = match (&a.target, &a.scheme) {
        (Some(t), _) => plan_for_target(&profile, &order, t)?.1,
        (None, Some(path)) => plan_from_scheme_file(&profile, path)?,
        (None, None) => return Err(CliError::Parse("give --target or --scheme".into())),
    };
    let result = run_plan_sweep(&profile, &plan, a.antennas, &grid, a.trials, a.seed)?;
    let labels = order.labels();
    if let Some(path) = &a.csv {
        let file = fs::File::create(path)?;
        write_csv(&result, &labels, file)?;
    }
    let summary = SweepSummary::new(&grid, a.trials, a.seed, &result, &labels);
    match a.format {
        Format::Csv => write_csv(&result, &labels, &mut *out)?,
        Format::Json => push_json(out, &summary)?,
        Format::Table => {
            writeln!(out, "{} trials per point, seed {}, P = {:e} .. {:e}", a.trials, a.seed, grid[0], grid[grid.len() - 1])?;
            writeln!(out, "{:>5} {:>10} {:>10} {:>10}", "user", "predicted", "slope", "±95%")?;
            for e in &summary.users {
                writeln!(out, "{:>5} {:>10.4} {:>10.4} {:>10.4}", e.user, e.stats.predicted, e.stats.slope, e.stats.half_width)?;
            }
            let s = &summary.sum;
            writeln!(out, "{:>5} {:>10.4} {:>10.4} {:>10.4}", "sum", s.predicted, s.slope, s.half_width)?;
        }
    }
    Ok(())
}
