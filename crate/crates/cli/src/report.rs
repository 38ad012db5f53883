use std::io::Write;
use std::path::Path;

use crate::config::Format;
use crate::run::Report;

/// Serialize `report` as one JSON document or as `x,y,residual` rows.
pub fn render(report: &Report, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| e.to_string())?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "y", "residual"]).map_err(|e| e.to_string())?;
            for (x, y, r) in report.grid_rows() {
                w.serialize((x, y, r)).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

/// Write the rendered report to `path`, or stdout when absent.
pub fn emit_report(report: &Report, format: Format, path: Option<&Path>) -> Result<(), String> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use matkowski::fncore::{GridKind, GridSpec};
    use matkowski::ResidualReport;

    fn sample() -> Report {
        let spec = GridSpec { kind: GridKind::Uniform, n: 2, lo: 0.0, hi: 1.0 };
        let pts = vec![(0.25, 0.25, 0.0), (0.25, 0.75, -1e-3), (0.75, 0.25, 2e-3), (0.75, 0.75, 0.5)];
        Report::Residual(ResidualReport::from_points(pts, spec))
    }

    #[test]
    fn json_keys() {
        let text = String::from_utf8(render(&sample(), Format::Json).unwrap()).unwrap();
        let keys = ["\"max_abs\"", "\"rms\"", "\"n_points\"", "\"argmax_point\"", "\"grid_spec\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 5);
        assert_eq!(v["argmax_point"], serde_json::json!([0.75, 0.75]));
    }

    #[test]
    fn csv_rows() {
        let text = String::from_utf8(render(&sample(), Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,residual");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "0.25,0.75,-0.001");
    }
}
