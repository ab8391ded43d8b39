//! Command pipelines behind the `dhkit` binary.
//!
//! Every command returns an [`Outcome`]: an exit status, an optional JSON
//! report and an optional message for stderr. Reports are reproducible for
//! fixed inputs and seeds except for `timing_ms`.

use crate::lattice::Direction;
use crate::orbifold::{build_dh, closure_check, OrbifoldError, S1FixedPointData};
use crate::polytope::{
    delzant_to_s1data, mc_pushforward, slice_density, sup_distance, vertex_orders, Histogram, Polytope,
};
use crate::pwlinear::{LogConcavityVerdict, PLDensity, SlopeJump};
use crate::rational::{format_rational, parse_point, parse_rational, to_f64, Rational};
use crate::xray::{regularity_check, select_line, split_subtorus, XRay, XRayError};
use num::Zero;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;
pub const EXIT_SELECTION: i32 = 4;

pub const DEFAULT_EPSILON: &str = "1/100";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub density: Option<PLDensity>,
    pub jumps: Vec<SlopeJump>,
    pub verdict: Option<LogConcavityVerdict>,
    pub residuals: Vec<NamedValue>,
    /// Command-specific extras (histogram, cross-validation, line selection).
    pub details: serde_json::Value,
    pub timing_ms: u128,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Vec::new(),
            density: None,
            jumps: Vec::new(),
            verdict: None,
            residuals: Vec::new(),
            details: serde_json::Value::Null,
            timing_ms: 0,
        }
    }

    fn set_density(&mut self, f: &PLDensity) {
        let f = f.canonical();
        self.jumps = f.slope_jumps();
        self.verdict = Some(f.is_log_concave());
        self.density = Some(f);
    }

    fn residual(&mut self, name: &str, value: String) {
        self.residuals.push(NamedValue {
            name: name.to_string(),
            value,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: i32,
    pub report: Option<RunReport>,
    pub message: Option<String>,
}

impl Outcome {
    fn input_error(message: impl Into<String>) -> Self {
        Outcome {
            status: EXIT_INPUT,
            report: None,
            message: Some(message.into()),
        }
    }

    fn finish(status: i32, mut report: RunReport, started: Instant, message: Option<String>) -> Self {
        report.timing_ms = started.elapsed().as_millis();
        Outcome {
            status,
            report: Some(report),
            message,
        }
    }
}

/// Reads a JSON input and records its digest.
fn load<T: DeserializeOwned>(path: &Path, report: &mut RunReport) -> Result<T, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    report.inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    });
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(format!("{}: empty input", path.display()));
    }
    serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, contents: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, contents).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => Ok(()),
    }
}

fn density_json(f: &PLDensity) -> String {
    serde_json::to_string_pretty(&f.canonical()).expect("density serializes")
}

/// Builds the DH density of fixed-point data after checking closure.
pub fn cmd_s1_build(input: &Path, output: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("s1-build");
    let data: S1FixedPointData = match load(input, &mut report) {
        Ok(d) => d,
        Err(e) => return Outcome::input_error(e),
    };
    match closure_check(&data) {
        Ok(residual) => {
            report.residual("closure", format_rational(&residual));
            if !residual.is_zero() {
                let msg = format!("localization closure violated: residual {}", format_rational(&residual));
                return Outcome::finish(EXIT_INCONSISTENT, report, started, Some(msg));
            }
        }
        Err(OrbifoldError::SlopeMismatch { residual, .. }) => {
            let msg = closure_check(&data).unwrap_err().to_string();
            report.residual("closure", residual);
            return Outcome::finish(EXIT_INCONSISTENT, report, started, Some(msg));
        }
        Err(e) => return Outcome::finish(EXIT_INCONSISTENT, report, started, Some(e.to_string())),
    }
    let f = match build_dh(&data) {
        Ok(f) => f,
        Err(e) => return Outcome::finish(EXIT_INCONSISTENT, report, started, Some(e.to_string())),
    };
    report.set_density(&f);
    if let Err(e) = write_output(output, &density_json(&f)) {
        return Outcome::finish(EXIT_INPUT, report, started, Some(e));
    }
    let status = if f.is_log_concave().is_log_concave { EXIT_OK } else { EXIT_INCONSISTENT };
    Outcome::finish(status, report, started, None)
}

/// Monte-Carlo settings for `slice`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub samples: usize,
    pub bins: usize,
    pub seed: u64,
}

fn histogram_details(h: &Histogram, distance: f64) -> serde_json::Value {
    serde_json::json!({
        "histogram": h,
        "density_estimates": h.density_estimates(),
        "sup_distance": distance,
    })
}

/// Exact slice density of a polygon, optionally checked against sampling.
pub fn cmd_slice(
    polytope: &Path,
    direction: &str,
    output: Option<&Path>,
    mc: Option<McOptions>,
    histogram_csv: Option<&Path>,
) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("slice");
    let p: Polytope = match load(polytope, &mut report) {
        Ok(p) => p,
        Err(e) => return Outcome::input_error(e),
    };
    let x = match Direction::parse(direction) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    let f = match slice_density(&p, &x) {
        Ok(f) => f,
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    report.set_density(&f);
    report.residual("integral_minus_area", format_rational(&(f.integral() - p.area().expect("polygon"))));
    if let Some(opts) = mc {
        let h = match mc_pushforward(&p, &x, opts.samples, opts.bins, opts.seed) {
            Ok(h) => h,
            Err(e) => return Outcome::input_error(e.to_string()),
        };
        let d = sup_distance(&h, &f);
        report.residual("mc_sup_distance", format!("{d:.6}"));
        report.details = histogram_details(&h, d);
        if let Err(e) = write_output(histogram_csv, &h.to_csv()) {
            return Outcome::finish(EXIT_INPUT, report, started, Some(e));
        }
    }
    if let Err(e) = write_output(output, &density_json(&f)) {
        return Outcome::finish(EXIT_INPUT, report, started, Some(e));
    }
    let status = if f.is_log_concave().is_log_concave { EXIT_OK } else { EXIT_INCONSISTENT };
    Outcome::finish(status, report, started, None)
}

/// Compares the toric slice with the density built from the polygon's
/// fixed-point data. Equality is required only when every vertex has
/// order 1; otherwise the comparison is reported.
pub fn cmd_crossval(polytope: &Path, direction: &str) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("crossval");
    let p: Polytope = match load(polytope, &mut report) {
        Ok(p) => p,
        Err(e) => return Outcome::input_error(e),
    };
    let x = match Direction::parse(direction) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    let (toric, data, orders) = match (slice_density(&p, &x), delzant_to_s1data(&p, &x), vertex_orders(&p)) {
        (Ok(f), Ok(d), Ok(o)) => (f, d, o),
        (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => return Outcome::input_error(e.to_string()),
    };
    let delzant = orders.iter().all(|&d| d == 1);
    report.set_density(&toric);
    let fixed = build_dh(&data);
    let closure = closure_check(&data);
    let equal = fixed.as_ref().is_ok_and(|g| *g == toric);
    report.residual(
        "closure",
        match &closure {
            Ok(r) => format_rational(r),
            Err(OrbifoldError::SlopeMismatch { residual, .. }) => residual.clone(),
            Err(e) => e.to_string(),
        },
    );
    report.details = serde_json::json!({
        "equal": equal,
        "delzant": delzant,
        "vertex_orders": orders,
        "fixed_point_data": data,
        "fixed_point_density": fixed.as_ref().ok().map(PLDensity::canonical),
        "fixed_point_error": fixed.as_ref().err().map(ToString::to_string),
    });
    if delzant && !equal {
        let msg = "toric and fixed-point densities differ on a Delzant polygon".to_string();
        return Outcome::finish(EXIT_INCONSISTENT, report, started, Some(msg));
    }
    Outcome::finish(EXIT_OK, report, started, None)
}

/// Options for `xray-line`; `epsilon` is a "p/q" string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOptions {
    pub epsilon: String,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for LineOptions {
    fn default() -> Self {
        LineOptions {
            epsilon: DEFAULT_EPSILON.to_string(),
            seed: DEFAULT_SEED,
            max_attempts: DEFAULT_ATTEMPTS,
        }
    }
}

/// Selects a transversal rational line between perturbed endpoints.
pub fn cmd_xray_line(xray: &Path, x0: &str, x1: &str, opts: &LineOptions, output: Option<&Path>) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("xray-line");
    let xr: XRay = match load(xray, &mut report) {
        Ok(x) => x,
        Err(e) => return Outcome::input_error(e),
    };
    let parsed = (parse_point(x0), parse_point(x1), parse_rational(&opts.epsilon));
    let (a, b, eps): (Vec<Rational>, Vec<Rational>, Rational) = match parsed {
        (Ok(a), Ok(b), Ok(e)) => (a, b, e),
        (Err(e), ..) | (_, Err(e), _) | (.., Err(e)) => return Outcome::input_error(e.to_string()),
    };
    let selection = match select_line(&xr, &a, &b, &eps, opts.max_attempts, opts.seed) {
        Ok(s) => s,
        Err(e @ XRayError::SelectionFailed { .. }) => {
            return Outcome::finish(EXIT_SELECTION, report, started, Some(e.to_string()))
        }
        Err(e) => return Outcome::input_error(e.to_string()),
    };
    let regular = regularity_check(&selection, &xr);
    let split = split_subtorus(&selection.direction).expect("ambient dimension is at least 2");
    report.details = serde_json::json!({
        "selection": selection,
        "regular": regular,
        "split": split,
    });
    let text = serde_json::to_string_pretty(&selection).expect("selection serializes");
    if let Err(e) = write_output(output, &text) {
        return Outcome::finish(EXIT_INPUT, report, started, Some(e));
    }
    let status = if regular { EXIT_OK } else { EXIT_SELECTION };
    Outcome::finish(status, report, started, None)
}

/// Static SVG of a density: a polyline over the breakpoints with ticks.
pub fn render_svg(f: &PLDensity) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 48.0;
    let (lo, hi) = f.support();
    let (lo, hi) = (to_f64(lo), to_f64(hi));
    let top = f.values().iter().map(to_f64).fold(0.0, f64::max);
    let top = if top > 0.0 { top } else { 1.0 };
    let sx = |t: f64| M + (t - lo) / (hi - lo) * (W - 2.0 * M);
    let sy = |v: f64| H - M - v / top * (H - 2.0 * M);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{M}" y1="{y}" x2="{x2}" y2="{y}" stroke="black"/>"#,
        y = H - M,
        x2 = W - M
    );
    let points: Vec<String> = f
        .breakpoints()
        .iter()
        .zip(f.values())
        .map(|(t, v)| format!("{:.3},{:.3}", sx(to_f64(t)), sy(to_f64(v))))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        points.join(" ")
    );
    for t in f.breakpoints() {
        let x = sx(to_f64(t));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.3}" y1="{y0}" x2="{x:.3}" y2="{y1}" stroke="black"/><text x="{x:.3}" y="{ty}" font-size="12" text-anchor="middle">{label}</text>"#,
            y0 = H - M,
            y1 = H - M + 6.0,
            ty = H - M + 20.0,
            label = format_rational(t)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn cmd_plot(density: &Path, svg: &Path) -> Outcome {
    let started = Instant::now();
    let mut report = RunReport::new("plot");
    let f: PLDensity = match load(density, &mut report) {
        Ok(f) => f,
        Err(e) => return Outcome::input_error(e),
    };
    if let Err(e) = write_output(Some(svg), &render_svg(&f)) {
        return Outcome::input_error(e);
    }
    report.set_density(&f);
    Outcome::finish(EXIT_OK, report, started, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    const HIRZEBRUCH: &str = r#"{
        "min": {"kind": "fixed_surface", "level": "0", "area": "1", "euler_integral": "0"},
        "max": {"kind": "isolated_point", "level": "2", "weight1": -1, "weight2": -1, "order": 1},
        "interior": [{"level": "1", "weight1": -1, "weight2": 1, "order": 1}]
    }"#;

    #[test]
    fn s1_build_statuses() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("density.json");
        let ok = cmd_s1_build(&file(&dir, "h.json", HIRZEBRUCH), Some(&out));
        assert_eq!(ok.status, EXIT_OK);
        let f: PLDensity = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(f, PLDensity::from_ints(&[0, 1, 2], &[1, 1, 0]).unwrap());
        let bad = HIRZEBRUCH.replace(r#""weight1": -1, "weight2": 1, "order": 1"#, r#""weight1": -1, "weight2": 1, "order": 2"#);
        let bad = cmd_s1_build(&file(&dir, "bad.json", &bad), None);
        assert_eq!(bad.status, EXIT_INCONSISTENT);
        assert_eq!(bad.report.unwrap().residuals[0].value, "1/2");
        assert_eq!(cmd_s1_build(&file(&dir, "empty.json", ""), None).status, EXIT_INPUT);
        assert_eq!(cmd_s1_build(&dir.path().join("missing.json"), None).status, EXIT_INPUT);
    }

    #[test]
    fn reports_replay_except_timing() {
        let dir = tempfile::tempdir().unwrap();
        let path = file(&dir, "h.json", HIRZEBRUCH);
        let mut a = cmd_s1_build(&path, None).report.unwrap();
        let mut b = cmd_s1_build(&path, None).report.unwrap();
        a.timing_ms = 0;
        b.timing_ms = 0;
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.inputs[0].sha256.len(), 64);
    }

    #[test]
    fn svg_polyline_follows_breakpoints() {
        let svg = render_svg(&PLDensity::from_ints(&[0, 1, 2], &[0, 1, 0]).unwrap());
        assert!(svg.contains(r#"points="48.000,352.000 320.000,48.000 592.000,352.000""#));
        let flat = render_svg(&PLDensity::from_ints(&[0, 1], &[1, 1]).unwrap());
        assert!(flat.contains(r#"points="48.000,48.000 592.000,48.000""#));
    }
}
