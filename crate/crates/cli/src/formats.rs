//! Text file formats.
//!
//! Every file starts with `# key = value` header lines. Keys prefixed with
//! `config.` echo the resolved run configuration and are ignored on reading.
//! Floating-point data use `{:.16e}` (17 significant digits), which
//! round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use subsphere_core::forward::Sinogram;
use subsphere_core::geometry::SpheroidGeometry;
use subsphere_core::grid::LogGrid;
use subsphere_core::harmonics::{sphere_quadrature, HarmonicIndex};
use subsphere_core::mellin::MellinLine;
use subsphere_core::phantom::PhantomSpec;

use crate::descriptor::{format_mode, parse_mode};
use crate::error::{CliError, CliResult};

pub type Echo = [(&'static str, String)];

const SINOGRAM_FORMAT: &str = "subsphere-sinogram 1";
const PROFILES_FORMAT: &str = "subsphere-profiles 1";
const PHANTOM_FORMAT: &str = "subsphere-phantom 1";

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

/// Writes through `body`, attributing any IO failure to `path`.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

fn write_echo(w: &mut impl Write, echo: &Echo) -> std::io::Result<()> {
    for (k, v) in echo {
        writeln!(w, "# config.{k} = {v}")?;
    }
    Ok(())
}

fn fmt_tanh(t: f64) -> String {
    if t == 1.0 {
        "inf".into()
    } else {
        format!("{t:.16e}")
    }
}

/// Line-oriented reader that tracks positions for error messages.
struct Lines {
    path: PathBuf,
    inner: std::io::Lines<BufReader<File>>,
    line: usize,
    header: BTreeMap<String, String>,
    pending: Option<String>,
}

impl Lines {
    fn open(path: &Path) -> CliResult<Self> {
        let mut me =
            Lines { path: path.to_path_buf(), inner: open(path)?.lines(), line: 0, header: BTreeMap::new(), pending: None };
        // header: leading `# key = value` lines
        while let Some(l) = me.next_raw()? {
            match l.strip_prefix('#') {
                Some(rest) => {
                    if let Some((k, v)) = rest.split_once('=') {
                        let k = k.trim();
                        if !k.starts_with("config.") {
                            me.header.insert(k.to_string(), v.trim().to_string());
                        }
                    }
                }
                None => {
                    me.pending = Some(l);
                    break;
                }
            }
        }
        Ok(me)
    }

    fn next_raw(&mut self) -> CliResult<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some(Ok(l)) => {
                self.line += 1;
                Ok(Some(l))
            }
            Some(Err(e)) => Err(CliError::io(&self.path, e)),
        }
    }

    /// Next line that is neither empty nor a comment.
    fn next_data(&mut self) -> CliResult<Option<String>> {
        if let Some(l) = self.pending.take() {
            if !l.trim().is_empty() {
                return Ok(Some(l));
            }
        }
        while let Some(l) = self.next_raw()? {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some(l));
        }
        Ok(None)
    }

    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::Format { path: self.path.clone(), line: self.line, msg: msg.into() }
    }

    fn require(&self, key: &str) -> CliResult<&str> {
        self.header.get(key).map(String::as_str).ok_or_else(|| self.err(format!("missing header `{key}`")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.require(key)?;
        v.parse().map_err(|_| self.err(format!("header `{key}`: cannot parse `{v}`")))
    }

    fn expect_format(&self, want: &str) -> CliResult<()> {
        let got = self.require("format")?;
        if got == want {
            Ok(())
        } else {
            Err(self.err(format!("expected format `{want}`, found `{got}`")))
        }
    }

    fn fields<'a>(&self, line: &'a str, count: usize) -> CliResult<Vec<&'a str>> {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() == count {
            Ok(f)
        } else {
            Err(self.err(format!("expected {count} comma-separated fields, found {}", f.len())))
        }
    }

    fn number<T: std::str::FromStr>(&self, field: &str) -> CliResult<T> {
        field.parse().map_err(|_| self.err(format!("cannot parse `{field}`")))
    }
}

fn parse_tanh(lines: &Lines) -> CliResult<f64> {
    match lines.require("tanh_lambda")? {
        "inf" => Ok(1.0),
        _ => lines.parse("tanh_lambda"),
    }
}

pub fn write_sinogram(path: &Path, sino: &Sinogram, echo: &Echo) -> CliResult<()> {
    write_file(path, |w| {
        let g = sino.geometry();
        let psi = sino.psi_grid();
        let c = sino.c_grid();
        writeln!(w, "# format = {SINOGRAM_FORMAT}")?;
        write_echo(w, echo)?;
        writeln!(w, "# n = {}", g.n())?;
        writeln!(w, "# tanh_lambda = {}", fmt_tanh(g.tanh()))?;
        let rule = if g.n() == 3 { "trapezoid" } else { "gauss-legendre x trapezoid" };
        writeln!(w, "# psi_rule = {rule}")?;
        writeln!(w, "# psi_res = {}", psi.resolution())?;
        writeln!(w, "# psi_count = {}", psi.len())?;
        writeln!(w, "# c_min = {:.16e}", c.min())?;
        writeln!(w, "# c_max = {:.16e}", c.max())?;
        writeln!(w, "# c_count = {}", c.len())?;
        writeln!(w, "# c_spacing = log-uniform")?;
        writeln!(w, "# c_log_min = {:.16e}", c.log_min())?;
        writeln!(w, "# c_log_step = {:.16e}", c.step())?;
        writeln!(w, "# columns = psi_index, c_index, value")?;
        for i in 0..psi.len() {
            for (j, v) in sino.row(i).iter().enumerate() {
                writeln!(w, "{i}, {j}, {v:.16e}")?;
            }
        }
        Ok(())
    })
}

pub fn read_sinogram(path: &Path) -> CliResult<Sinogram> {
    let mut lines = Lines::open(path)?;
    lines.expect_format(SINOGRAM_FORMAT)?;
    let n: usize = lines.parse("n")?;
    let tanh = parse_tanh(&lines)?;
    let psi_res: usize = lines.parse("psi_res")?;
    let count: usize = lines.parse("c_count")?;
    let log_min: f64 = lines.parse("c_log_min")?;
    let step: f64 = lines.parse("c_log_step")?;
    let geometry = SpheroidGeometry::from_tanh(n, tanh).map_err(|e| lines.err(e.to_string()))?;
    let psi = sphere_quadrature(n, psi_res).map_err(|e| lines.err(e.to_string()))?;
    let grid = LogGrid::from_log(log_min, step, count).map_err(|e| lines.err(e.to_string()))?;

    let total = psi.len() * count;
    let mut values = Vec::with_capacity(total);
    while let Some(l) = lines.next_data()? {
        let f = lines.fields(&l, 3)?;
        let (i, j): (usize, usize) = (lines.number(f[0])?, lines.number(f[1])?);
        let k = values.len();
        if k >= total || i != k / count || j != k % count {
            return Err(lines.err(format!("row ({i}, {j}) out of order or beyond the grid")));
        }
        values.push(lines.number::<f64>(f[2])?);
    }
    if values.len() != total {
        return Err(lines.err(format!("expected {total} rows, found {}", values.len())));
    }
    Sinogram::new(geometry, psi, grid, values).map_err(|e| lines.err(e.to_string()))
}

pub fn write_phantom(path: &Path, spec: &PhantomSpec, echo: &Echo) -> CliResult<()> {
    write_file(path, |w| {
        writeln!(w, "# format = {PHANTOM_FORMAT}")?;
        write_echo(w, echo)?;
        writeln!(w, "# columns = mode = m,l:shape:parameters")?;
        writeln!(w, "n = {}", spec.n())?;
        for mode in spec.modes() {
            writeln!(w, "mode = {}", format_mode(mode))?;
        }
        Ok(())
    })
}

pub fn read_phantom(path: &Path) -> CliResult<PhantomSpec> {
    let mut lines = Lines::open(path)?;
    lines.expect_format(PHANTOM_FORMAT)?;
    let mut n = None;
    let mut modes = Vec::new();
    while let Some(l) = lines.next_data()? {
        let (k, v) = l.split_once('=').ok_or_else(|| lines.err("expected `key = value`"))?;
        match k.trim() {
            "n" => n = Some(lines.number::<usize>(v.trim())?),
            "mode" => modes.push(parse_mode(v).map_err(|e| lines.err(e))?),
            other => return Err(lines.err(format!("unknown key `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| lines.err("missing `n`"))?;
    PhantomSpec::new(n, modes).map_err(|e| lines.err(e.to_string()))
}

/// Per-mode profiles on one log grid: reconstructed spectra and exact
/// reference tables share this format.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub n: usize,
    pub m_max: usize,
    pub grid: LogGrid,
    pub profiles: BTreeMap<HarmonicIndex, Vec<f64>>,
}

pub fn write_profiles(path: &Path, table: &ProfileTable, kind: &str, echo: &Echo) -> CliResult<()> {
    write_file(path, |w| {
        let g = &table.grid;
        writeln!(w, "# format = {PROFILES_FORMAT}")?;
        writeln!(w, "# content = {kind}")?;
        write_echo(w, echo)?;
        writeln!(w, "# n = {}", table.n)?;
        writeln!(w, "# m_max = {}", table.m_max)?;
        writeln!(w, "# r_count = {}", g.len())?;
        writeln!(w, "# r_log_min = {:.16e}", g.log_min())?;
        writeln!(w, "# r_log_step = {:.16e}", g.step())?;
        writeln!(w, "# columns = m, l, r, value")?;
        for (idx, values) in &table.profiles {
            writeln!(w, "# m, l, r_count = {}, {}, {}", idx.m, idx.l, values.len())?;
            for (r, v) in g.points().zip(values) {
                writeln!(w, "{}, {}, {r:.16e}, {v:.16e}", idx.m, idx.l)?;
            }
        }
        Ok(())
    })
}

pub fn read_profiles(path: &Path) -> CliResult<ProfileTable> {
    let mut lines = Lines::open(path)?;
    lines.expect_format(PROFILES_FORMAT)?;
    let n: usize = lines.parse("n")?;
    let m_max: usize = lines.parse("m_max")?;
    let count: usize = lines.parse("r_count")?;
    let grid = LogGrid::from_log(lines.parse("r_log_min")?, lines.parse("r_log_step")?, count)
        .map_err(|e| lines.err(e.to_string()))?;
    let mut profiles: BTreeMap<HarmonicIndex, Vec<f64>> = BTreeMap::new();
    while let Some(l) = lines.next_data()? {
        let f = lines.fields(&l, 4)?;
        let idx = HarmonicIndex::new(lines.number(f[0])?, lines.number(f[1])?);
        let r: f64 = lines.number(f[2])?;
        let v: f64 = lines.number(f[3])?;
        let values = profiles.entry(idx).or_default();
        let k = values.len();
        if k >= count || (r - grid.at(k)).abs() > 1e-12 * r {
            return Err(lines.err(format!("radius {r} does not match grid node {k} of mode ({}, {})", idx.m, idx.l)));
        }
        values.push(v);
    }
    if let Some((idx, v)) = profiles.iter().find(|(_, v)| v.len() != count) {
        return Err(lines.err(format!("mode ({}, {}) has {} of {count} rows", idx.m, idx.l, v.len())));
    }
    Ok(ProfileTable { n, m_max, grid, profiles })
}

/// One row of the reconstruction report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeError {
    pub index: HarmonicIndex,
    pub active: bool,
    /// `‖f̃ - f‖ / ‖f‖` in `L²(dr)` over the report window; `NaN` for absent modes.
    pub rel_l2_error: f64,
    /// `max |f̃ - f|` over the window.
    pub max_abs: f64,
    /// `max_abs` over the peak of all exact profiles on the window.
    pub peak_ratio: f64,
}

pub fn write_report(path: &Path, rows: &[ModeError], echo: &Echo) -> CliResult<()> {
    write_file(path, |w| {
        write_echo(w, echo)?;
        writeln!(w, "m,l,active,rel_l2_error,max_abs,peak_ratio")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{:.6e},{:.6e},{:.6e}",
                r.index.m, r.index.l, r.active, r.rel_l2_error, r.max_abs, r.peak_ratio
            )?;
        }
        Ok(())
    })
}

/// Parses a report written by [`write_report`].
pub fn read_report(text: &str) -> Result<Vec<ModeError>, String> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if !seen_header {
            if line != "m,l,active,rel_l2_error,max_abs,peak_ratio" {
                return Err(format!("unexpected report header `{line}`"));
            }
            seen_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || format!("malformed report row `{line}`");
        if f.len() != 6 {
            return Err(bad());
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        rows.push(ModeError {
            index: HarmonicIndex::new(f[0].parse().map_err(|_| bad())?, f[1].parse().map_err(|_| bad())?),
            active: f[2].parse().map_err(|_| bad())?,
            rel_l2_error: num(f[3])?,
            max_abs: num(f[4])?,
            peak_ratio: num(f[5])?,
        });
    }
    Ok(rows)
}

/// `b, re, im` rows of a Mellin line.
pub fn write_line(path: &Path, line: &MellinLine, label: &str) -> CliResult<()> {
    write_file(path, |w| {
        writeln!(w, "# content = {label}")?;
        writeln!(w, "# rho = {:.16e}", line.rho())?;
        writeln!(w, "# columns = b, re, im")?;
        for (b, v) in line.grid().points().zip(line.values()) {
            writeln!(w, "{b:.16e}, {:.16e}, {:.16e}", v.re, v.im)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use subsphere_core::phantom::four_mode;

    #[test]
    fn sinogram_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let geometry = SpheroidGeometry::new(3, 0.7).unwrap();
        let psi = sphere_quadrature(3, 6).unwrap();
        let grid = LogGrid::new(1e-3, 1e3, 9).unwrap();
        let values: Vec<f64> = (0..54).map(|k| (k as f64 * 0.37).sin() * 10f64.powi(k % 7 - 3)).collect();
        let sino = Sinogram::new(geometry, psi, grid, values).unwrap();
        let path = dir.path().join("s.txt");
        let echo = [("n", "3".to_string())];
        write_sinogram(&path, &sino, &echo).unwrap();
        let back = read_sinogram(&path).unwrap();
        assert_eq!(back, sino);
        for (a, b) in back.values().iter().zip(sino.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let again = dir.path().join("t.txt");
        write_sinogram(&again, &back, &echo).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn slice_sinogram_header() {
        let dir = tempfile::tempdir().unwrap();
        let sino = Sinogram::new(
            SpheroidGeometry::slice(4).unwrap(),
            sphere_quadrature(4, 4).unwrap(),
            LogGrid::new(0.1, 10.0, 2).unwrap(),
            vec![0.5; 64],
        )
        .unwrap();
        let path = dir.path().join("s.txt");
        write_sinogram(&path, &sino, &[]).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().contains("# tanh_lambda = inf"));
        assert_eq!(read_sinogram(&path).unwrap(), sino);
    }

    #[test]
    fn truncated_sinogram_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        let sino = Sinogram::new(
            SpheroidGeometry::new(3, 1.0).unwrap(),
            sphere_quadrature(3, 4).unwrap(),
            LogGrid::new(0.1, 10.0, 3).unwrap(),
            vec![1.0; 12],
        )
        .unwrap();
        write_sinogram(&path, &sino, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(text.lines().count() - 1).map(|l| format!("{l}\n")).collect();
        std::fs::write(&path, cut).unwrap();
        assert!(matches!(read_sinogram(&path), Err(CliError::Format { .. })));
    }

    #[test]
    fn phantom_and_profiles_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = four_mode().unwrap();
        let path = dir.path().join("p.txt");
        write_phantom(&path, &spec, &[("phantom", "four".into())]).unwrap();
        assert_eq!(read_phantom(&path).unwrap(), spec);

        let grid = LogGrid::new(0.01, 100.0, 5).unwrap();
        let mut profiles = BTreeMap::new();
        profiles.insert(HarmonicIndex::new(0, 1), vec![1.0, 2.0, 3.0, 4.0, -5e-300]);
        profiles.insert(HarmonicIndex::new(2, 2), vec![0.1; 5]);
        let table = ProfileTable { n: 3, m_max: 2, grid, profiles };
        let path = dir.path().join("f.txt");
        write_profiles(&path, &table, "exact", &[]).unwrap();
        assert_eq!(read_profiles(&path).unwrap(), table);
    }

    #[test]
    fn report_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rows = vec![
            ModeError { index: HarmonicIndex::new(0, 1), active: true, rel_l2_error: 1e-5, max_abs: 2e-6, peak_ratio: 1e-6 },
            ModeError { index: HarmonicIndex::new(1, 2), active: false, rel_l2_error: f64::NAN, max_abs: 0.0, peak_ratio: 0.0 },
        ];
        let path = dir.path().join("r.csv");
        write_report(&path, &rows, &[("n", "3".into())]).unwrap();
        let back = read_report(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], rows[0]);
        assert!(back[1].rel_l2_error.is_nan() && !back[1].active);
    }
}
