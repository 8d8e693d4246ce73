//! The four subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use subsphere_core::forward::make_sinogram;
use subsphere_core::harmonics::{sphere_quadrature, HarmonicIndex};
use subsphere_core::inversion::{reconstruct, report_grid, HarmonicSpectrum};
use subsphere_core::kernel::{kernel_h_mellin, KernelSpec};
use subsphere_core::mellin::ContourGrid;
use subsphere_core::phantom::{hypothesis_check, phantom_profile};
use subsphere_core::Warning;

use crate::config::{check_contour, Command, RunConfig};
use crate::descriptor::parse_phantom;
use crate::error::{CliError, CliResult};
use crate::formats::{
    read_phantom, read_profiles, read_sinogram, write_line, write_phantom, write_profiles, write_report,
    write_sinogram, ModeError, ProfileTable,
};
use crate::verify;

/// Runs `cfg.command`; returns the warnings raised, which the caller prints.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<Warning>> {
    if let Some(threads) = cfg.threads {
        // a second call in the same process (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cfg.command {
        Command::Phantom => phantom(cfg).map(|()| Vec::new()),
        Command::Forward => forward(cfg).map(|()| Vec::new()),
        Command::Invert => invert(cfg),
        Command::Verify => verify_suites(cfg).map(|()| Vec::new()),
    }
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| CliError::config(format!("{key}: required for this command")))
}

/// `out.ext` -> `out.profiles.ext`
fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn phantom(cfg: &RunConfig) -> CliResult<()> {
    let spec = parse_phantom(&cfg.phantom, cfg.n).map_err(CliError::config)?;
    let report = hypothesis_check(&spec);
    if !report.is_finite() {
        let bad: Vec<String> =
            report.modes.iter().filter(|(_, v)| !v.is_finite()).map(|(i, _)| format!("({}, {})", i.m, i.l)).collect();
        return Err(CliError::Hypothesis(format!(
            "phantom violates the integrability hypothesis: ∫ |g(x)| / |x|^{} dx diverges \
             (radial profile not integrable on (0, ∞) for mode(s) {})",
            cfg.n - 2,
            bad.join(", ")
        )));
    }
    let echo = cfg.echo();
    let out = required(&cfg.output, "out")?;
    write_phantom(out, &spec, &echo)?;

    let grid = report_grid(&cfg.c_grid()?, cfg.trim_decades)?;
    let profiles: BTreeMap<HarmonicIndex, Vec<f64>> = spec
        .modes()
        .iter()
        .map(|m| (m.index, grid.points().map(|r| phantom_profile(&spec, m.index, r)).collect()))
        .collect();
    let table = ProfileTable { n: cfg.n, m_max: spec.max_degree().unwrap_or(0), grid, profiles };
    let path = cfg.profiles_out.clone().unwrap_or_else(|| sibling(out, "profiles"));
    write_profiles(&path, &table, "exact", &echo)
}

fn forward(cfg: &RunConfig) -> CliResult<()> {
    let input = required(&cfg.input, "in")?;
    let spec = read_phantom(input)?;
    if spec.n() != cfg.n {
        return Err(CliError::config(format!("n: phantom file is for n = {}, run is configured for n = {}", spec.n(), cfg.n)));
    }
    let geometry = cfg.geometry()?;
    let psi = sphere_quadrature(cfg.n, cfg.psi_res)?;
    let quad = sphere_quadrature(cfg.n, cfg.quad_res)?;
    let sino = make_sinogram(&spec, &geometry, &psi, &cfg.c_grid()?, &quad)?;
    write_sinogram(required(&cfg.output, "out")?, &sino, &cfg.echo())
}

fn invert(cfg: &RunConfig) -> CliResult<Vec<Warning>> {
    let sino = read_sinogram(required(&cfg.input, "in")?)?;
    if sino.geometry().n() != cfg.n {
        return Err(CliError::config(format!(
            "n: sinogram is for n = {}, run is configured for n = {}",
            sino.geometry().n(),
            cfg.n
        )));
    }
    let mut problems = Vec::new();
    let order = sino.psi_grid().design_order();
    if cfg.m_max > order {
        problems.push(format!(
            "m-max: {} exceeds the design order {order} of the sinogram's ψ rule (resolution {})",
            cfg.m_max,
            sino.psi_grid().resolution()
        ));
    }
    check_contour(&mut problems, sino.c_grid(), cfg.contour_t, cfg.contour_db, cfg.trim_decades);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    let params = cfg.inversion_params()?;
    let result = reconstruct(&sino, cfg.m_max, &params)?;
    let spectrum = result.value;
    let echo = cfg.echo();

    let table = ProfileTable {
        n: spectrum.n(),
        m_max: spectrum.m_max(),
        grid: *spectrum.grid(),
        profiles: spectrum.iter().map(|(i, p)| (*i, p.values().to_vec())).collect(),
    };
    let out = required(&cfg.output, "out")?;
    write_profiles(out, &table, "reconstructed", &echo)?;

    if let Some(reference) = &cfg.reference {
        let exact = read_profiles(reference)?;
        let rows = compare(&spectrum, &exact, cfg.eval_min, cfg.eval_max)?;
        let path = cfg.report.clone().unwrap_or_else(|| sibling(out, "report"));
        write_report(&path, &rows, &echo)?;
    }
    if let Some(dir) = &cfg.dump_lines {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let contour = ContourGrid::new(cfg.contour_t, cfg.contour_db)?;
        for m in 0..=cfg.m_max {
            let spec = KernelSpec::new(*sino.geometry(), m);
            let line = kernel_h_mellin(&spec, 1.0 - cfg.rho, &contour)?;
            write_line(&dir.join(format!("kernel_m{m}.csv")), &line, &format!("M h_{m}(1 - rho + ib)"))?;
        }
    }

    let warnings = result.warnings;
    if cfg.strict && !warnings.is_empty() {
        return Err(CliError::Numerical(format!("{} warning(s) raised under --strict: {}", warnings.len(), join(&warnings))));
    }
    if warnings.iter().any(Warning::is_severe) {
        let severe: Vec<Warning> = warnings.iter().copied().filter(Warning::is_severe).collect();
        return Err(CliError::Numerical(format!("reconstruction is not trustworthy: {}", join(&severe))));
    }
    Ok(warnings)
}

fn join(w: &[Warning]) -> String {
    w.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Linear interpolation in `ln r` of a tabulated profile.
fn interpolate(grid: &subsphere_core::grid::LogGrid, values: &[f64], r: f64) -> Option<f64> {
    let u = (r.ln() - grid.log_min()) / grid.step();
    let last = grid.len() - 1;
    if !(u > -1e-9 && u < last as f64 + 1e-9) {
        return None;
    }
    let k = (u.floor().max(0.0) as usize).min(last - 1);
    let w = (u - k as f64).clamp(0.0, 1.0);
    Some(values[k] * (1.0 - w) + values[k + 1] * w)
}

/// Per-mode errors of `spectrum` against `exact` on the reconstruction grid
/// nodes inside `[lo, hi]`, in `L²(dr)`. Modes missing from `exact` are
/// zero there.
pub fn compare(spectrum: &HarmonicSpectrum, exact: &ProfileTable, lo: f64, hi: f64) -> CliResult<Vec<ModeError>> {
    let grid = spectrum.grid();
    let nodes: Vec<usize> = grid.index_range(lo, hi).collect();
    if nodes.len() < 2 {
        return Err(CliError::config(format!("eval window [{lo}, {hi}] holds fewer than two reconstruction radii")));
    }
    let reference = |idx: &HarmonicIndex, r: f64| -> CliResult<f64> {
        match exact.profiles.get(idx) {
            None => Ok(0.0),
            Some(v) => interpolate(&exact.grid, v, r).ok_or_else(|| {
                CliError::config(format!(
                    "reference: radius {r:e} outside the reference table [{:e}, {:e}]",
                    exact.grid.min(),
                    exact.grid.max()
                ))
            }),
        }
    };
    let mut peak: f64 = 0.0;
    for idx in exact.profiles.keys() {
        for &k in &nodes {
            peak = peak.max(reference(idx, grid.at(k))?.abs());
        }
    }
    let mut rows = Vec::new();
    for (idx, profile) in spectrum.iter() {
        let active = exact.profiles.contains_key(idx);
        let (mut num, mut den, mut max_abs) = (0.0, 0.0, 0.0f64);
        for (j, &k) in nodes.iter().enumerate() {
            let r = grid.at(k);
            let f = reference(idx, r)?;
            let d = profile.values()[k] - f;
            // trapezoid in u with dr = r du
            let w = if j == 0 || j + 1 == nodes.len() { 0.5 * r } else { r };
            num += w * d * d;
            den += w * f * f;
            max_abs = max_abs.max(d.abs());
        }
        rows.push(ModeError {
            index: *idx,
            active,
            rel_l2_error: if active { (num / den).sqrt() } else { f64::NAN },
            max_abs,
            peak_ratio: max_abs / peak,
        });
    }
    Ok(rows)
}

fn verify_suites(cfg: &RunConfig) -> CliResult<()> {
    let checks = verify::run(&cfg.suites);
    let mut failed = 0;
    for c in &checks {
        println!("{c}");
        if !c.passed() {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}
