//! CSV tables and `.meta` sidecars.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use qdcavity_core::spectra::{DressedBranch, DressedLevel, FaradayPoint, Method, SpectrumRow};
use qdcavity_core::C64;

pub const SPECTRUM_HEADER: [&str; 18] = [
    "omega_detuning",
    "power_norm",
    "method",
    "cavity",
    "re_r",
    "im_r",
    "abs_r",
    "phase_r",
    "re_t",
    "im_t",
    "abs_t",
    "phase_t",
    "sigma_z",
    "n_cavity",
    "branch_id",
    "cutoff",
    "residual",
    "error",
];

pub const GFR_HEADER: [&str; 7] = [
    "omega_detuning",
    "power_norm",
    "method",
    "phase_difference",
    "rotation",
    "reflectance_contrast",
    "transmittance_contrast",
];

pub const DRESSED_HEADER: [&str; 10] = [
    "order",
    "branch",
    "re_closed_form",
    "im_closed_form",
    "re_diagonalized",
    "im_diagonalized",
    "abs_difference",
    "probe_resonance",
    "probe_detuning",
    "weak_coupling",
];

pub const WINDOW_HEADER: [&str; 7] = ["power_norm", "method", "threshold", "lower", "upper", "width", "error"];

/// 17 significant digits in scientific notation.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: C64) -> [String; 4] {
    [float(z.re), float(z.im), float(z.norm()), float(z.arg())]
}

pub fn spectrum_record(row: &SpectrumRow) -> Vec<String> {
    let mut rec = vec![
        float(row.omega_detuning),
        float(row.power_norm),
        row.method.as_str().to_string(),
        row.cavity.as_str().to_string(),
    ];
    match &row.result {
        Ok(v) => {
            rec.extend(complex(v.r));
            match v.t {
                Some(t) => rec.extend(complex(t)),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
            rec.push(float(v.sigma_z));
            rec.push(float(v.n_cavity));
            rec.push(v.branch_id.map(|b| b.to_string()).unwrap_or_default());
            rec.push(v.cutoff.map(|c| c.to_string()).unwrap_or_default());
            rec.push(float(v.residual));
            rec.push(String::new());
        }
        Err(e) => {
            rec.extend(std::iter::repeat_n(String::new(), 13));
            rec.push(e.to_string());
        }
    }
    rec
}

pub fn gfr_record(p: &FaradayPoint) -> Vec<String> {
    vec![
        float(p.omega_detuning),
        float(p.power_norm),
        p.method.as_str().to_string(),
        float(p.phase_difference),
        float(p.rotation),
        float(p.reflectance_contrast),
        p.transmittance_contrast.map(float).unwrap_or_default(),
    ]
}

pub fn dressed_record(level: &DressedLevel) -> Vec<String> {
    vec![
        level.order.to_string(),
        match level.branch {
            DressedBranch::Upper => "upper",
            DressedBranch::Lower => "lower",
        }
        .to_string(),
        float(level.eigenvalue.re),
        float(level.eigenvalue.im),
        float(level.diagonalized.re),
        float(level.diagonalized.im),
        float((level.eigenvalue - level.diagonalized).norm()),
        float(level.probe_resonance),
        float(level.probe_detuning),
        level.weak_coupling.to_string(),
    ]
}

/// Non-saturation window of one inversion curve.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRow {
    pub power_norm: f64,
    pub method: Method,
    pub threshold: f64,
    pub window: Result<Option<(f64, f64)>, String>,
}

pub fn window_record(w: &WindowRow) -> Vec<String> {
    let mut rec = vec![float(w.power_norm), w.method.as_str().to_string(), float(w.threshold)];
    match &w.window {
        Ok(Some((lo, hi))) => rec.extend([float(*lo), float(*hi), float(hi - lo), String::new()]),
        Ok(None) => rec.extend([String::new(), String::new(), float(0.0), String::new()]),
        Err(e) => rec.extend([String::new(), String::new(), String::new(), e.clone()]),
    }
    rec
}

pub fn write_csv(path: &Path, header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> io::Result<usize> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    let mut n = 0;
    for rec in records {
        w.write_record(&rec)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// `key=value` lines; line breaks inside values are replaced by spaces.
pub fn write_meta(path: &Path, entries: &[(String, String)]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k}={}", v.replace(['\n', '\r'], " "))?;
    }
    w.flush()
}

/// `<prefix>_<name>.<ext>`
pub fn output_path(prefix: &str, name: &str, ext: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}_{name}.{ext}"))
}

/// Per-point solver diagnostics for the sidecar.
pub fn point_diagnostics(rows: &[SpectrumRow]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let key = |field: &str| format!("point.{k}.{field}");
        match &row.result {
            Ok(v) => {
                if let Some(c) = v.cutoff {
                    out.push((key("cutoff"), c.to_string()));
                }
                if let Some(b) = v.branch_count {
                    out.push((key("branch_count"), b.to_string()));
                }
                out.push((key("residual"), float(v.residual)));
            }
            Err(e) => out.push((key("error"), e.to_string())),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdcavity_core::spectra::{solve_point, Cavity, SweepOptions};
    use qdcavity_core::{Error, SystemParams};

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(-0.1), "-1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, -2.389430e-7, 6.02e23] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_columns() {
        let hot = SystemParams::single_sided_defaults();
        let row = solve_point(
            &hot,
            Cavity::Hot,
            Method::Semiclassical,
            0.5,
            0.1,
            &SweepOptions::default(),
            None,
        );
        let rec = spectrum_record(&row);
        assert_eq!(rec.len(), SPECTRUM_HEADER.len());
        assert_eq!(rec[2], "semiclassical");
        assert!(rec[8..12].iter().all(String::is_empty));
        assert!(rec[15].is_empty());
        assert!(!rec[14].is_empty());
        assert!(rec[17].is_empty());

        let failed = SpectrumRow {
            result: Err(Error::NoRoot),
            ..row
        };
        let rec = spectrum_record(&failed);
        assert_eq!(rec.len(), SPECTRUM_HEADER.len());
        assert!(rec[4..17].iter().all(String::is_empty));
        assert_eq!(rec[17], Error::NoRoot.to_string());
    }

    #[test]
    fn double_sided_record_has_transmission() {
        let hot = SystemParams::double_sided_defaults();
        let row = solve_point(
            &hot,
            Cavity::Cold,
            Method::MasterEquation,
            0.0,
            1e-3,
            &SweepOptions::default(),
            None,
        );
        let rec = spectrum_record(&row);
        assert!(rec[8..12].iter().all(|s| !s.is_empty()));
        assert!(rec[14].is_empty());
        assert!(!rec[15].is_empty());
        let t: f64 = rec[8].parse().unwrap();
        assert!((t + 0.8).abs() < 1e-10);
    }
}
