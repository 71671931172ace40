//! One function per subcommand. Each returns a [`RunReport`] and whether the
//! command's check passed; only `check-dirac` can fail a check.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use ghostspin_core::ghost_classifier::{classify_numeric, classify_structural};
use ghostspin_core::interference::{
    combined_intensity, expand_bruteforce, ghost_real_profile, locate_extrema, sample_profile,
    Formula, IntensityProfile, TwoSlit,
};
use ghostspin_core::spinor_field::{sample_grid, EnergyMomentumTensor, PointSample};

use crate::config::{Format, Mode, PhaseSource, ScenarioConfig};
use crate::output::{write_json, write_profile, write_table};

/// Largest residual accepted by `check-dirac`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Largest shadow count for which `interfere` runs the brute-force check.
pub const BRUTEFORCE_CHECK_MAX_N: usize = 12;
/// The brute-force check uses at most this many screen points.
const BRUTEFORCE_CHECK_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckDirac,
    Classify,
    Tensor,
    Current,
    Interfere,
    SweepShadows,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::CheckDirac => "check-dirac",
            Command::Classify => "classify",
            Command::Tensor => "tensor",
            Command::Current => "current",
            Command::Interfere => "interfere",
            Command::SweepShadows => "sweep-shadows",
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Overrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub config: ScenarioConfig,
    pub overrides: Overrides,
    pub summary: Value,
    /// Data files written, relative to the output location.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

pub struct RunOutcome {
    pub report: RunReport,
    pub passed: bool,
}

struct Ctx {
    cfg: ScenarioConfig,
    overrides: Overrides,
    files: Vec<String>,
    warnings: Vec<String>,
}

impl Ctx {
    fn kappa(&self) -> Result<f64> {
        let mut cfg = self.cfg.clone();
        if let Some(k) = self.overrides.kappa {
            cfg.kappa = Some(k);
        }
        cfg.kappa()
    }

    fn format(&self) -> Format {
        self.overrides
            .format
            .or(self.cfg.output.as_ref().and_then(|o| o.format))
            .unwrap_or(Format::Csv)
    }

    fn out_path(&self) -> Option<PathBuf> {
        self.overrides
            .out
            .clone()
            .or(self.cfg.output.as_ref().and_then(|o| o.path.clone()))
    }

    fn require_out(&self) -> Result<PathBuf> {
        self.out_path()
            .context("no output path: pass --out or set output.path")
    }
}

pub fn run(command: Command, config: &Path, overrides: Overrides) -> Result<RunOutcome> {
    let cfg = ScenarioConfig::load(config)?;
    run_config(command, cfg, overrides)
}

pub fn run_config(
    command: Command,
    cfg: ScenarioConfig,
    overrides: Overrides,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut ctx = Ctx {
        cfg,
        overrides,
        files: Vec::new(),
        warnings: Vec::new(),
    };
    let (summary, passed) = match command {
        Command::CheckDirac => check_dirac(&mut ctx)?,
        Command::Classify => classify(&mut ctx)?,
        Command::Tensor => dump_grid(&mut ctx, GridQuantity::Tensor)?,
        Command::Current => dump_grid(&mut ctx, GridQuantity::Current)?,
        Command::Interfere => interfere(&mut ctx)?,
        Command::SweepShadows => sweep_shadows(&mut ctx)?,
    };
    let mut report = RunReport {
        command,
        config: ctx.cfg.clone(),
        overrides: ctx.overrides.clone(),
        summary,
        files: ctx.files,
        warnings: ctx.warnings,
        wall_time_s: 0.0,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(dir) = report_dir(command, &ctx.overrides, &report.config) {
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(RunOutcome { report, passed })
}

fn report_dir(command: Command, overrides: &Overrides, cfg: &ScenarioConfig) -> Option<PathBuf> {
    match command {
        Command::Interfere | Command::SweepShadows => overrides
            .out
            .clone()
            .or(cfg.output.as_ref().and_then(|o| o.path.clone())),
        _ => None,
    }
}

fn samples_for(ctx: &Ctx) -> Result<Vec<PointSample>> {
    let kappa = ctx.kappa()?;
    let (field, bindings) = ctx.cfg.field()?.build(Some(kappa))?;
    let grid = ctx.cfg.grid()?;
    Ok(sample_grid(&field, kappa, &grid, &bindings)?)
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn check_dirac(ctx: &mut Ctx) -> Result<(Value, bool)> {
    let kappa = ctx.kappa()?;
    let samples = samples_for(ctx)?;
    let worst = samples
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .context("empty grid")?;
    let passed = worst.residual <= RESIDUAL_TOLERANCE;
    if let Some(path) = ctx.out_path() {
        write_json(
            &path,
            &json!({"max_residual": worst.residual, "passed": passed}),
        )?;
        ctx.files.push(display_name(&path));
    }
    Ok((
        json!({
            "kappa": kappa,
            "points": samples.len(),
            "max_residual": worst.residual,
            "worst_point": worst.point.0,
            "tolerance": RESIDUAL_TOLERANCE,
            "passed": passed,
        }),
        passed,
    ))
}

fn classify(ctx: &mut Ctx) -> Result<(Value, bool)> {
    let kappa = ctx.kappa()?;
    let (field, bindings) = ctx.cfg.field()?.build(Some(kappa))?;
    let grid = ctx.cfg.grid()?;
    let structural = classify_structural(&field, kappa, &grid, &bindings)?;
    let numeric = classify_numeric(&field, kappa, &grid, &bindings)?;
    let summary = json!({
        "kappa": kappa,
        "points": grid.len(),
        "structural": structural,
        "numeric": numeric,
    });
    if let Some(path) = ctx.out_path() {
        write_json(&path, &summary)?;
        ctx.files.push(display_name(&path));
    }
    Ok((summary, true))
}

#[derive(Clone, Copy)]
enum GridQuantity {
    Tensor,
    Current,
}

fn dump_grid(ctx: &mut Ctx, what: GridQuantity) -> Result<(Value, bool)> {
    let out = ctx.require_out()?;
    let format = ctx.format();
    let samples = samples_for(ctx)?;
    let mut columns = vec!["x0", "x1", "x2", "x3"];
    let names: Vec<String> = match what {
        GridQuantity::Tensor => EnergyMomentumTensor::INDEPENDENT
            .iter()
            .map(|(i, k)| format!("T{i}{k}"))
            .collect(),
        GridQuantity::Current => (0..4).map(|k| format!("j{k}")).collect(),
    };
    columns.extend(names.iter().map(String::as_str));
    let mut max_abs = 0.0_f64;
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| {
            let mut row = s.point.0.to_vec();
            match what {
                GridQuantity::Tensor => {
                    row.extend(s.tensor.independent());
                    max_abs = max_abs.max(s.tensor.max_abs());
                }
                GridQuantity::Current => {
                    row.extend(s.current.0);
                    max_abs = max_abs.max(s.current.max_abs());
                }
            }
            row
        })
        .collect();
    write_table(&out, format, &columns, &rows)?;
    ctx.files.push(display_name(&out));
    let key = match what {
        GridQuantity::Tensor => "max_abs_t",
        GridQuantity::Current => "max_abs_j",
    };
    Ok((
        json!({"points": rows.len(), "columns": columns, key: max_abs}),
        true,
    ))
}

fn extrema_summary(profile: &IntensityProfile) -> Result<Value> {
    let e = locate_extrema(profile)?;
    Ok(json!({
        "minima": e.minima_x(profile),
        "maxima": e.maxima_x(profile),
        "minima_count": e.minima.len(),
        "maxima_count": e.maxima.len(),
    }))
}

fn file_name(stem: &str, format: Format) -> String {
    format!("{stem}.{}", format.extension())
}

fn interfere(ctx: &mut Ctx) -> Result<(Value, bool)> {
    let dir = ctx.require_out()?;
    let format = ctx.format();
    let section = ctx.cfg.twoslit()?.clone();
    if section.mode == Mode::Ghostreal {
        let kappa = ctx.kappa()?;
        let x0 = section.x0.unwrap_or(0.0);
        let x2 = section.x2.unwrap_or(-(8f64).ln() / (2.0 * kappa));
        let profile = ghost_real_profile(
            kappa,
            x0,
            x2,
            (section.range[0], section.range[1]),
            section.samples,
        )?;
        let name = file_name("ghostreal", format);
        write_profile(
            &dir.join(&name),
            format,
            &profile,
            &json!({"kappa": kappa, "x0": x0, "x2": x2}),
        )?;
        ctx.files.push(name);
        let max = profile
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = profile.values.iter().copied().fold(f64::INFINITY, f64::min);
        return Ok((
            json!({
                "mode": "ghostreal",
                "kappa": kappa,
                "x0": x0,
                "x2": x2,
                "max_value": max,
                "min_value": min,
                "ghostreal": extrema_summary(&profile)?,
            }),
            true,
        ));
    }

    let n_override = match ctx.overrides.n.as_slice() {
        [] => None,
        [n] => Some(*n),
        _ => bail!("interfere takes a single --n value"),
    };
    let n = section.resolve_n(n_override)?;
    let (slits, source) = section.with_shadows(n)?;
    let model = TwoSlit::new(slits.clone())?;
    let range = (section.range[0], section.range[1]);
    let mut formulas = vec![Formula::Real];
    formulas.extend((1..=n).map(Formula::Shadow));
    formulas.extend([Formula::Combined, Formula::WhichWay]);

    let mut profiles = serde_json::Map::new();
    for formula in formulas {
        let profile = sample_profile(&model, formula, range, section.samples, section.normalize)?;
        let name = file_name(&profile.label, format);
        write_profile(&dir.join(&name), format, &profile, &slits)?;
        ctx.files.push(name);
        profiles.insert(profile.label.clone(), extrema_summary(&profile)?);
    }

    let check = if n <= BRUTEFORCE_CHECK_MAX_N {
        Some(bruteforce_residual(&model, range, section.samples)?)
    } else {
        ctx.warnings.push(format!(
            "brute-force cross-check skipped: n = {n} exceeds {BRUTEFORCE_CHECK_MAX_N}"
        ));
        None
    };
    Ok((
        json!({
            "mode": "twoslit",
            "n": n,
            "shadow_phases": slits.shadow_phases,
            "phases": source,
            "normalize": section.normalize,
            "profiles": profiles,
            "bruteforce_max_relative_residual": check,
        }),
        true,
    ))
}

/// `max |combined - bruteforce| / max(1, bruteforce)` over up to
/// [`BRUTEFORCE_CHECK_POINTS`] evenly spread screen points. Always computed on
/// the unnormalized intensities.
fn bruteforce_residual(model: &TwoSlit, range: (f64, f64), samples: usize) -> Result<f64> {
    let xs = ghostspin_core::interference::uniform_grid(range.0, range.1, samples)?;
    let stride = xs.len().div_ceil(BRUTEFORCE_CHECK_POINTS).max(1);
    let mut worst = 0.0_f64;
    for x in xs.iter().step_by(stride) {
        let b = expand_bruteforce(model, *x)?;
        let c = combined_intensity(model, *x)?;
        worst = worst.max((c - b).abs() / b.max(1.0));
    }
    Ok(worst)
}

fn sweep_shadows(ctx: &mut Ctx) -> Result<(Value, bool)> {
    let dir = ctx.require_out()?;
    let format = ctx.format();
    let section = ctx.cfg.twoslit()?.clone();
    let n_values = if ctx.overrides.n.is_empty() {
        section.n_values.clone()
    } else {
        ctx.overrides.n.clone()
    };
    if n_values.is_empty() {
        bail!("no shadow counts: set twoslit.n_values or pass --n");
    }
    let range = (section.range[0], section.range[1]);
    let mut rows = Vec::new();
    let mut per_n = Vec::new();
    let mut reference: Option<Vec<usize>> = None;
    let mut coincide = true;
    let mut phase_source: Option<PhaseSource> = None;
    for &n in &n_values {
        let (slits, source) = section.with_shadows(n)?;
        phase_source.get_or_insert(source);
        let model = TwoSlit::new(slits.clone())?;
        let mut profile = sample_profile(
            &model,
            Formula::Combined,
            range,
            section.samples,
            section.normalize,
        )?;
        profile.label = format!("combined_n{n}");
        let name = file_name(&profile.label, format);
        write_profile(&dir.join(&name), format, &profile, &slits)?;
        ctx.files.push(name);

        let e = locate_extrema(&profile)?;
        match &reference {
            None => reference = Some(e.maxima.clone()),
            Some(r) => coincide &= same_within_one(r, &e.maxima),
        }
        let values: Vec<f64> = e.maxima.iter().map(|&i| profile.values[i]).collect();
        for (k, pair) in e.maxima.windows(2).enumerate() {
            let (l, r) = (pair[0], pair[1]);
            rows.push(vec![
                n as f64,
                k as f64,
                profile.xs[l],
                profile.xs[r],
                profile.values[l],
                profile.values[r],
                profile.values[r] - profile.values[l],
            ]);
        }
        per_n.push(json!({
            "n": n,
            "shadow_phases": slits.shadow_phases,
            "maxima": e.maxima_x(&profile),
            "maxima_values": values,
            "minima": e.minima_x(&profile),
        }));
    }
    let summary_name = file_name("summary", format);
    write_table(
        &dir.join(&summary_name),
        format,
        &[
            "n",
            "k",
            "x_left",
            "x_right",
            "value_left",
            "value_right",
            "difference",
        ],
        &rows,
    )?;
    ctx.files.push(summary_name);
    Ok((
        json!({
            "n_values": n_values,
            "phases": phase_source,
            "normalize": section.normalize,
            "maxima_coincide_within_one_step": coincide,
            "per_n": per_n,
        }),
        true,
    ))
}

fn same_within_one(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.abs_diff(*y) <= 1)
}
