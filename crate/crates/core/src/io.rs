//! CSV and JSON artifacts. Floats are written with 17 significant digits so
//! every value round-trips exactly.

use std::io::{Read, Write};

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::asymptotics::AngularDiagnostics;
use crate::continuation::{ContinuationConfig, ContinuationRun, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::loops::{SymmetricLoop, MIN_HALF_NODES};
use crate::orbit::Trajectory;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with `{:.16e}` floats; non-finite values become `null`.
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// Top-level diagnostics document of a continuation run.
#[derive(Clone, Debug, SerializeDerive, Deserialize)]
pub struct DiagnosticsDocument {
    pub potential: String,
    pub energy: f64,
    pub direction: Vec<f64>,
    pub m_inner: f64,
    pub m_outer: f64,
    pub comparison_l: f64,
    pub recenter_radius: f64,
    pub m6: f64,
    pub cloc_monotone: Option<bool>,
    pub warnings: Vec<String>,
    /// Seconds since the Unix epoch; omitted in canonical output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsDocument {
    pub fn from_run(cfg: &ContinuationConfig, run: &ContinuationRun) -> Self {
        Self {
            potential: cfg.potential.id(),
            energy: cfg.energy,
            direction: cfg.direction.clone(),
            m_inner: run.thresholds.m_inner,
            m_outer: run.thresholds.m_outer,
            comparison_l: run.comparison_l,
            recenter_radius: run.recenter_radius,
            m6: run.m6,
            cloc_monotone: run.cloc_monotone,
            warnings: run.warnings.clone(),
            generated_unix: None,
            records: run.records.clone(),
        }
    }
}

pub fn parse_diagnostics(text: &str) -> Result<DiagnosticsDocument> {
    let doc: DiagnosticsDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if doc.records.iter().any(|r| !(r.period > 0.0) || !(r.min_radius > 0.0 && r.min_radius <= r.max_radius)) {
        return Err(Error::Parse("record violates T_R > 0 or 0 < min radius <= max radius".into()));
    }
    Ok(doc)
}

fn header(prefixes: &[(&str, usize)], lead: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = lead.iter().map(|s| s.to_string()).collect();
    for (p, n) in prefixes {
        h.extend((1..=*n).map(|i| format!("{p}{i}")));
    }
    h
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn write_rows<W: Write>(w: W, head: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(head).map_err(csv_err)?;
    for row in rows {
        out.write_record(row.iter().map(|x| fmt_f64(*x))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a numeric CSV whose header must equal `expected` exactly.
fn read_rows<R: Read>(r: R, expected: impl Fn(usize) -> Option<Vec<String>>) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let head: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let dim = (1..=64)
        .find(|&d| expected(d).as_deref() == Some(head.as_slice()))
        .ok_or_else(|| Error::Parse(format!("unexpected header {head:?}")))?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad number {f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != head.len() {
            return Err(Error::Parse("row length differs from header".into()));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse("non-finite value".into()));
        }
        rows.push(row);
    }
    Ok((dim, rows))
}

/// Header `t,x1..xN,v1..vN`, one row per sample.
pub fn write_orbit_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    let d = traj.dim;
    let head = header(&[("x", d), ("v", d)], &["t"]);
    write_rows(
        w,
        &head,
        (0..traj.len()).map(|i| {
            let mut row = vec![traj.times[i]];
            row.extend_from_slice(traj.position(i));
            row.extend_from_slice(traj.velocity(i));
            row
        }),
    )
}

pub fn read_orbit_csv<R: Read>(r: R) -> Result<Trajectory> {
    let (dim, rows) = read_rows(r, |d| Some(header(&[("x", d), ("v", d)], &["t"])))?;
    if dim < 2 {
        return Err(Error::Parse("orbit dimension must be >= 2".into()));
    }
    let mut traj = Trajectory { dim, times: Vec::new(), positions: Vec::new(), velocities: Vec::new() };
    for row in rows {
        traj.times.push(row[0]);
        traj.positions.extend_from_slice(&row[1..=dim]);
        traj.velocities.extend_from_slice(&row[dim + 1..]);
    }
    if traj.times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parse("times must be strictly increasing".into()));
    }
    Ok(traj)
}

/// Header `t,x1..xN` over the full period `[0, 1)`.
pub fn write_loop_csv<W: Write>(w: W, lp: &SymmetricLoop) -> Result<()> {
    let d = lp.dim();
    let head = header(&[("x", d)], &["t"]);
    let h = lp.spacing();
    write_rows(
        w,
        &head,
        (0..2 * lp.half_nodes()).map(|k| {
            let mut row = vec![k as f64 * h];
            row.extend(lp.full_node(k));
            row
        }),
    )
}

/// Rebuilds a loop from its full-period samples. The first half determines
/// the loop; the second half must match `-q` to within `1e-9 R`.
pub fn read_loop_csv<R: Read>(r: R) -> Result<SymmetricLoop> {
    let (dim, rows) = read_rows(r, |d| Some(header(&[("x", d)], &["t"])))?;
    if dim < 2 {
        return Err(Error::Parse("loop dimension must be >= 2".into()));
    }
    let n = rows.len();
    if n % 2 != 0 || n / 2 < MIN_HALF_NODES {
        return Err(Error::Parse(format!("need an even number >= {} of rows, got {n}", 2 * MIN_HALF_NODES)));
    }
    let m = n / 2;
    for (k, row) in rows.iter().enumerate() {
        if (row[0] - k as f64 / n as f64).abs() > 1e-9 {
            return Err(Error::Parse(format!("row {k}: time {} is off the uniform grid", row[0])));
        }
    }
    let q0 = &rows[0][1..];
    let radius = norm(q0);
    if !(radius > 0.0) {
        return Err(Error::Parse("first sample sits at the origin".into()));
    }
    for k in 0..m {
        let (a, b) = (&rows[k][1..], &rows[k + m][1..]);
        if a.iter().zip(b).any(|(x, y)| (x + y).abs() > 1e-9 * radius) {
            return Err(Error::Parse(format!("row {} is not the antipode of row {k}", k + m)));
        }
    }
    let direction: Vec<f64> = q0.iter().map(|x| x / radius).collect();
    let interior: Vec<f64> = rows[1..m].iter().flat_map(|row| row[1..].iter().copied()).collect();
    SymmetricLoop::from_interior(radius, &direction, m, &interior)
}

/// Header `t,A,omega,dirx1..dirxN`.
pub fn write_angular_csv<W: Write>(w: W, diag: &AngularDiagnostics) -> Result<()> {
    let head = header(&[("dirx", diag.dim)], &["t", "A", "omega"]);
    write_rows(
        w,
        &head,
        (0..diag.len()).map(|i| {
            let mut row = vec![diag.times[i], diag.area[i], diag.omega[i]];
            row.extend_from_slice(diag.direction(i));
            row
        }),
    )
}

/// Plain CSV with a caller-supplied header, for plot bundles.
pub fn write_table<W: Write>(w: W, head: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let head: Vec<String> = head.iter().map(|s| s.to_string()).collect();
    write_rows(w, &head, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn json_uses_exact_floats_and_null() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.5]})).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let s = to_json(&vec![f64::NAN]).unwrap();
        assert!(s.contains("null"));
    }

    #[test]
    fn loop_round_trip() {
        let l = SymmetricLoop::build_circular(2.0, &[0.6, 0.8], &[-0.8, 0.6], 16).unwrap().perturbed(0.1, 3).unwrap();
        let mut buf = Vec::new();
        write_loop_csv(&mut buf, &l).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x1,x2\n"));
        let back = read_loop_csv(buf.as_slice()).unwrap();
        assert_eq!(back.nodes(), l.nodes());
    }

    #[test]
    fn orbit_round_trip() {
        let traj = Trajectory {
            dim: 2,
            times: vec![0.0, 0.5],
            positions: vec![1.0, 0.0, 1.0, 0.5],
            velocities: vec![0.0, 1.0, 0.1, 1.0],
        };
        let mut buf = Vec::new();
        write_orbit_csv(&mut buf, &traj).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("t,x1,x2,v1,v2\n"));
        assert_eq!(read_orbit_csv(buf.as_slice()).unwrap(), traj);
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(read_orbit_csv("t,x1,v1\n0,1,2\n".as_bytes()).is_err());
        assert!(read_orbit_csv("t,x1,x2,v1,v2\n0,1,2,3\n".as_bytes()).is_err());
        assert!(read_orbit_csv("t,x1,x2,v1,v2\n0,1,2,3,nan\n".as_bytes()).is_err());
        assert!(read_loop_csv("t,x1,x2\n0,1,0\n".as_bytes()).is_err());
        assert!(parse_diagnostics("{}").is_err());
        assert!(parse_diagnostics("not json").is_err());
    }
}
