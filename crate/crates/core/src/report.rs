//! Deterministic JSON and CSV serialization.
//!
//! Floats are written as `{:.16e}` (17 significant digits), non-finite values
//! as `null`; field order follows the struct definitions.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::classify::ConditionGrid;
use crate::curvature::{CurvatureReport, Tensor};
use crate::phi::PhiPartials;

/// Pretty-printing formatter with fixed-precision floats.
pub struct FixedFormatter<'a>(PrettyFormatter<'a>);

impl Default for FixedFormatter<'_> {
    fn default() -> Self {
        FixedFormatter(PrettyFormatter::with_indent(b"  "))
    }
}

/// Formats a float the way every report does.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    fs::write(path, to_json(value)?)
}

fn finish(w: csv::Writer<Vec<u8>>) -> io::Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv fields are UTF-8"))
}

/// One row per grid cell; failed cells keep their coordinates and the error.
pub fn residual_grid_csv(grid: &ConditionGrid) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "b2",
        "s",
        "e22",
        "h222",
        "combined",
        "e_defect",
        "h_defect",
        "convex_first",
        "convex_second",
        "aux1",
        "aux2",
        "aux3",
        "regrouping",
        "error",
    ])?;
    for cell in &grid.cells {
        let mut row = vec![fmt_f64(cell.b2), fmt_f64(cell.s)];
        match &cell.residual {
            Some(r) => {
                row.extend(
                    [
                        r.e22,
                        r.h222,
                        r.combined,
                        r.e_defect,
                        r.h_defect,
                        r.convex_first,
                        r.convex_second,
                    ]
                    .into_iter()
                    .chain(r.aux_factors)
                    .chain([r.regrouping])
                    .map(fmt_f64),
                );
                row.push(String::new());
            }
            None => {
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(cell.error.clone().unwrap_or_default());
            }
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// `φ` and its partials, plus the two Berwald defects where available, per grid node.
pub fn phi_table_csv(rows: &[(PhiPartials, Option<(f64, f64)>)]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "b2", "s", "phi", "phi1", "phi2", "phi12", "phi22", "phi222", "e_defect", "h_defect",
    ])?;
    for (p, defects) in rows {
        let mut rec: Vec<String> = [
            p.b2,
            p.s,
            p.phi(),
            p.phi1(),
            p.phi2(),
            p.phi12(),
            p.phi22(),
            p.phi222(),
        ]
        .map(fmt_f64)
        .into();
        match defects {
            Some((e, h)) => rec.extend([fmt_f64(*e), fmt_f64(*h)]),
            None => rec.extend([String::new(), String::new()]),
        }
        w.write_record(&rec)?;
    }
    finish(w)
}

fn tensor_rows(
    out: &mut Vec<(&'static str, &'static str, Vec<usize>, f64)>,
    quantity: &'static str,
    route: &'static str,
    t: Option<&Tensor>,
) {
    if let Some(t) = t {
        out.extend(t.entries().map(|(idx, v)| (quantity, route, idx, v)));
    }
}

/// Flattened curvature dump: `point, x_*, y_*, quantity, route, index, value`.
/// Indices are zero-based and joined with `:`.
pub fn curvature_dump_csv(reports: &[CurvatureReport]) -> io::Result<String> {
    let n = reports.first().map_or(0, |r| r.x.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["point".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("y{i}")));
    header.extend(["quantity", "route", "index", "value"].map(String::from));
    w.write_record(&header)?;
    for (point, r) in reports.iter().enumerate() {
        let mut rows = vec![
            ("f", "direct", vec![], r.f),
            ("det", "closed_form", vec![], r.det_closed),
            ("det", "matrix", vec![], r.det_matrix),
        ];
        tensor_rows(&mut rows, "g", "closed_form", Some(&r.g_closed));
        tensor_rows(&mut rows, "g", "oracle", Some(&r.g_oracle));
        tensor_rows(&mut rows, "g_inv", "closed_form", Some(&r.g_inv_closed));
        tensor_rows(&mut rows, "g_inv", "matrix_inverse", Some(&r.g_inv_matrix));
        tensor_rows(&mut rows, "spray", "oracle", Some(&r.spray_oracle));
        tensor_rows(&mut rows, "spray", "general", Some(&r.spray_general));
        tensor_rows(
            &mut rows,
            "spray",
            "closed_conformal",
            r.spray_closed_conformal.as_ref(),
        );
        tensor_rows(
            &mut rows,
            "berwald",
            "closed_form",
            r.berwald_closed.as_ref(),
        );
        tensor_rows(&mut rows, "berwald", "oracle", r.berwald_oracle.as_ref());
        tensor_rows(
            &mut rows,
            "landsberg",
            "closed_form",
            r.landsberg_closed.as_ref(),
        );
        tensor_rows(
            &mut rows,
            "landsberg",
            "contraction",
            r.landsberg_contraction.as_ref(),
        );
        tensor_rows(
            &mut rows,
            "mean_landsberg",
            "closed_form",
            r.mean_landsberg_closed.as_ref(),
        );
        tensor_rows(
            &mut rows,
            "mean_landsberg",
            "contraction",
            r.mean_landsberg_contraction.as_ref(),
        );
        for (name, v) in r.discrepancies.entries() {
            rows.push(("discrepancy", name, vec![], v));
        }
        for (quantity, route, idx, v) in rows {
            let mut rec = vec![point.to_string()];
            rec.extend(r.x.iter().chain(&r.y).map(|v| fmt_f64(*v)));
            rec.push(quantity.into());
            rec.push(route.into());
            rec.push(
                idx.iter()
                    .map(|i| i.to_string())
                    .collect::<Vec<_>>()
                    .join(":"),
            );
            rec.push(fmt_f64(v));
            w.write_record(&rec)?;
        }
    }
    finish(w)
}
