//! Plain-text field files.
//!
//! One header line `# r psi phi A1 A2 A3`, then one whitespace-separated row
//! per product-grid node in radius-major order. Angles are radians in the
//! configured convention; `A1..A3` are the real Cartesian components. Files
//! must be sampled on the same grid and quadrature as the run configuration.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use super::report::{fmt_f64, write_atomic};
use crate::error::{Error, Result};
use crate::fieldops::SampledVectorField;
use crate::radial::RadialGrid;
use crate::sphere::{AngularPoint, AngularQuadrature, PolarConvention};

pub const HEADER: &str = "# r psi phi A1 A2 A3";

/// Largest imaginary part, relative to the largest real part, that is still
/// written out as a real field.
const IMAGINARY_LIMIT: f64 = 1e-10;

const NODE_MATCH: f64 = 1e-12;

pub fn render_field(field: &SampledVectorField, conv: PolarConvention) -> Result<String> {
    let scale = field.values().iter().flatten().fold(0.0f64, |m, v| m.max(v.re.abs()));
    let worst_im = field.values().iter().flatten().fold(0.0f64, |m, v| m.max(v.im.abs()));
    if worst_im > IMAGINARY_LIMIT * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!(
            "field has imaginary parts up to {worst_im:.3e}; field files hold real fields"
        )));
    }
    let mut out = String::with_capacity(field.values().len() * 150);
    out.push_str(HEADER);
    out.push('\n');
    let quad = field.quadrature();
    for (i, &r) in field.grid().nodes().iter().enumerate() {
        for (j, p) in quad.nodes().iter().enumerate() {
            let (psi, phi) = p.to_convention(conv)?;
            let a = field.at(i, j);
            let cols = [r, psi, phi, a[0].re, a[1].re, a[2].re];
            let line: Vec<String> = cols.iter().map(|&x| fmt_f64(x)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_field(path: &Path, field: &SampledVectorField, conv: PolarConvention) -> Result<()> {
    write_atomic(path, render_field(field, conv)?.as_bytes())
}

pub fn read_field(
    path: &Path,
    grid: &Arc<RadialGrid>,
    quad: &Arc<AngularQuadrature>,
    conv: PolarConvention,
) -> Result<SampledVectorField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text, grid, quad, conv).map_err(|message| Error::Parse {
        path: path.to_path_buf(),
        message,
    })
}

fn parse_field(
    text: &str,
    grid: &Arc<RadialGrid>,
    quad: &Arc<AngularQuadrature>,
    conv: PolarConvention,
) -> std::result::Result<SampledVectorField, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.split_whitespace().eq(HEADER.split_whitespace()) => {}
        _ => return Err(format!("first line must be `{HEADER}`")),
    }
    let na = quad.len();
    let expected = grid.len() * na;
    let mut values = Vec::with_capacity(expected);
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if cols.len() != 6 {
            return Err(format!("line {}: expected 6 columns, found {}", lineno + 1, cols.len()));
        }
        let k = values.len();
        if k >= expected {
            return Err(format!("line {}: more rows than the {expected} grid nodes", lineno + 1));
        }
        let (i, j) = (k / na, k % na);
        let r = grid.nodes()[i];
        if (cols[0] - r).abs() > NODE_MATCH * r {
            return Err(format!("line {}: radius {} does not match grid node {r}", lineno + 1, cols[0]));
        }
        let got = AngularPoint::from_convention(conv, cols[1], cols[2]).unit_vector();
        let want = quad.nodes()[j].unit_vector();
        let dist = (0..3).map(|c| (got[c] - want[c]).powi(2)).sum::<f64>().sqrt();
        if dist > NODE_MATCH * 10.0 {
            return Err(format!("line {}: direction does not match quadrature node {j}", lineno + 1));
        }
        values.push([0, 1, 2].map(|c| Complex64::new(cols[3 + c], 0.0)));
    }
    if values.len() != expected {
        return Err(format!("found {} rows, the configured grid has {expected}", values.len()));
    }
    SampledVectorField::from_values(grid.clone(), quad.clone(), values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Execution;
    use crate::fieldops::{reconstruct, TransverseField};
    use crate::radial::{Decay, GridParams, RadialFunction};

    #[test]
    fn round_trip_and_rejections() {
        let g = Arc::new(RadialGrid::mapped(&GridParams { nodes: 128, r_max: 20.0, ..Default::default() }).unwrap());
        let q = Arc::new(AngularQuadrature::for_l_max(1));
        let u = RadialFunction::from_fn(&g, Decay::Exponential, |r| r * r * (-r).exp());
        let tf = TransverseField::singular_l1([0.1, 0.2, 0.3], &u).unwrap();
        let f = reconstruct(&tf, &q, Execution::Serial);
        let text = render_field(&f, PolarConvention::Colatitude).unwrap();
        let back = parse_field(&text, &g, &q, PolarConvention::Colatitude).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            for c in 0..3 {
                assert_eq!(a[c].re, b[c].re);
            }
        }
        assert!(parse_field("# wrong\n", &g, &q, PolarConvention::Colatitude).is_err());
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(parse_field(&truncated, &g, &q, PolarConvention::Colatitude).is_err());
        let other = Arc::new(AngularQuadrature::for_l_max(2));
        assert!(parse_field(&text, &g, &other, PolarConvention::Colatitude).is_err());
        // The chart convention cannot express nodes below the equator.
        assert!(render_field(&f, PolarConvention::Chart).is_err());
    }
}
