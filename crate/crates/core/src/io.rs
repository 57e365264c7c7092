//! CSV writers and readers for the file interfaces.
//!
//! All numeric columns carry 17 significant digits with `.` as the decimal
//! separator and `,` as the delimiter, so a fixed pipeline reproduces its
//! outputs byte for byte. Every file starts with `# key = value` comment
//! lines echoing the resolved configuration it came from.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::DispersionTable;
use crate::error::{Error, Result};
use crate::grid::{Profile, RadialGrid};
use crate::report::TrajectorySeries;

/// 17 significant digits, locale-independent.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn header_block(header: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

/// Two-column profile CSV with the dimension and extent in the header.
pub fn write_profile_csv(path: &Path, profile: &Profile, header: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "# N = {}", profile.grid.dim());
    let _ = writeln!(out, "# r_max = {}", fmt_g17(profile.grid.r_max()));
    out.push_str(&header_block(header));
    out.push_str("r,u\n");
    for (r, u) in profile.grid.nodes().iter().zip(profile.values()) {
        let _ = writeln!(out, "{},{}", fmt_g17(*r), fmt_g17(*u));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a profile CSV produced by [`write_profile_csv`].
pub fn read_profile_csv(path: &Path) -> Result<Profile> {
    let text = fs::read_to_string(path)?;
    let mut dim: Option<u32> = None;
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                if k.trim() == "N" {
                    dim = v.trim().parse().ok();
                }
            }
            continue;
        }
        if line.starts_with("r,") {
            continue;
        }
        let (r, u) = line
            .split_once(',')
            .ok_or_else(|| Error::Argument(format!("bad profile row '{line}'")))?;
        nodes.push(
            r.trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("bad radius '{r}'")))?,
        );
        values.push(
            u.trim()
                .parse::<f64>()
                .map_err(|_| Error::Argument(format!("bad value '{u}'")))?,
        );
    }
    let dim = dim.ok_or_else(|| Error::Argument("profile csv missing the # N header".into()))?;
    let grid = RadialGrid::from_nodes(dim, nodes)?;
    Profile::new(grid, values)
}

/// Dispersion table CSV: omega, charge, energy, d, lambda (+ gap comments).
pub fn write_dispersion_csv(
    path: &Path,
    table: &DispersionTable,
    header: &[(String, String)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header_block(header));
    let _ = writeln!(out, "# potential = {}", table.potential);
    let _ = writeln!(out, "# N = {}", table.dimension);
    let _ = writeln!(out, "# grid = {}", table.grid);
    for (omega, why) in &table.gaps {
        let _ = writeln!(out, "# gap at omega = {}: {}", fmt_g17(*omega), why);
    }
    out.push_str("omega,charge,energy,d,lambda\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g17(row.omega),
            fmt_g17(row.charge),
            fmt_g17(row.energy),
            fmt_g17(row.d),
            fmt_g17(row.lambda)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Trajectory CSV: t, E, C, P, Qdot, orbital_distance, V, max|psi|.
/// Angular momentum is identically zero for the supported geometries and is
/// noted in the header instead of carried as a column.
pub fn write_trajectory_csv(
    path: &Path,
    series: &TrajectorySeries,
    header: &[(String, String)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header_block(header));
    out.push_str("# angular_momentum = 0 (identically; radial/1d geometry)\n");
    if let Some(t) = series.blow_up_time {
        let _ = writeln!(out, "# blow_up_time = {}", fmt_g17(t));
    }
    out.push_str("t,E,C,P,Qdot,orbital_distance,V,max_psi\n");
    for p in &series.points {
        let od = p.orbital_distance.map_or(String::new(), fmt_g17);
        let v = p.lyapunov.map_or(String::new(), fmt_g17);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_g17(p.t),
            fmt_g17(p.energy),
            fmt_g17(p.charge),
            fmt_g17(p.momentum),
            fmt_g17(p.ergocenter_velocity),
            od,
            v,
            fmt_g17(p.max_abs_psi)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Field snapshot CSV: x, Re psi, Im psi, Re psi_t, Im psi_t.
pub fn write_snapshot_csv(
    path: &Path,
    xs: &[f64],
    psi: &[num_complex::Complex64],
    psit: &[num_complex::Complex64],
    header: &[(String, String)],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header_block(header));
    out.push_str("x,re_psi,im_psi,re_psit,im_psit\n");
    for j in 0..xs.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_g17(xs[j]),
            fmt_g17(psi[j].re),
            fmt_g17(psi[j].im),
            fmt_g17(psit[j].re),
            fmt_g17(psit[j].im)
        );
    }
    fs::write(path, out)?;
    Ok(())
}
