//! CSV and JSON output. Floats are printed with 17 significant digits;
//! infinity is the CSV token `inf` and the JSON string `"inf"`.

use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use super::{IoError, OutputFormat, Unit, ViewSelection};
use crate::bernoulli::BernoulliReport;
use crate::estimator::MeasureTable;
use crate::eval::DetectionReport;
use crate::measures::View;
use crate::Nats;

/// `1.2345678901234567e-1` style, or `inf`.
pub fn format_number(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

enum Cell {
    Text(String),
    Int(usize),
    Real(f64),
    Nats(Nats),
}

impl Cell {
    fn value(&self, unit: Unit) -> Option<f64> {
        match (self, unit) {
            (Cell::Real(x), _) => Some(*x),
            (Cell::Nats(n), Unit::Nats) => Some(n.value()),
            (Cell::Nats(n), Unit::Bits) => Some(n.to_bits()),
            _ => None,
        }
    }

    fn text(&self, unit: Unit) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            _ => format_number(self.value(unit).unwrap()),
        }
    }
}

struct Num(f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            RawValue::from_string(format_number(self.0))
                .map_err(serde::ser::Error::custom)?
                .serialize(s)
        } else {
            s.serialize_str(&format_number(self.0))
        }
    }
}

struct JsonCell<'a>(&'a Cell, Unit);

impl Serialize for JsonCell<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Cell::Text(t) => s.serialize_str(t),
            Cell::Int(i) => s.serialize_u64(*i as u64),
            c => Num(c.value(self.1).unwrap()).serialize(s),
        }
    }
}

struct JsonRow<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
    unit: Unit,
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (c, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(c, &JsonCell(v, self.unit))?;
        }
        map.end()
    }
}

/// Rows of named cells, written either as CSV or as
/// `{"unit": …, "rows": [{column: value, …}, …]}`.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    fn write<W: Write>(&self, format: OutputFormat, unit: Unit, out: W) -> Result<(), IoError> {
        match format {
            OutputFormat::Csv => self.write_csv(unit, out),
            OutputFormat::Json => {
                #[derive(Serialize)]
                struct Doc<'a> {
                    unit: &'static str,
                    rows: Vec<JsonRow<'a>>,
                }
                let doc = Doc {
                    unit: unit.name(),
                    rows: self
                        .rows
                        .iter()
                        .map(|cells| JsonRow {
                            columns: &self.columns,
                            cells,
                            unit,
                        })
                        .collect(),
                };
                write_json(&doc, out)
            }
        }
    }

    fn write_csv<W: Write>(&self, unit: Unit, out: W) -> Result<(), IoError> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(io) => IoError::Io(io),
            other => IoError::Io(std::io::Error::other(format!("{other:?}"))),
        };
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.text(unit))).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| IoError::Io(e.into()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes one row per input. [`ViewSelection::All`] gives
/// `id, prediction, mi_total, aleatoric, mi_epistemic, epkl_total,
/// epkl_epistemic, rmi`; a single view gives `id, prediction, total,
/// aleatoric, epistemic` (for the RMI view the middle column is
/// `bma_entropy` and the last `rmi`).
pub fn write_measure_table<W: Write>(
    table: &MeasureTable,
    view: ViewSelection,
    format: OutputFormat,
    unit: Unit,
    out: W,
) -> Result<(), IoError> {
    let mut t = match view {
        ViewSelection::All => Table::new([
            "id",
            "prediction",
            "mi_total",
            "aleatoric",
            "mi_epistemic",
            "epkl_total",
            "epkl_epistemic",
            "rmi",
        ]),
        ViewSelection::Only(View::RmiView) => {
            Table::new(["id", "prediction", "total", "bma_entropy", "rmi"])
        }
        ViewSelection::Only(_) => Table::new(["id", "prediction", "total", "aleatoric", "epistemic"]),
    };
    for r in &table.rows {
        let mut cells = vec![Cell::Text(r.id.clone()), Cell::Int(r.prediction)];
        match view {
            ViewSelection::All => cells.extend([
                Cell::Nats(r.mi.total()),
                Cell::Nats(r.mi.aleatoric()),
                Cell::Nats(r.mi.epistemic()),
                Cell::Nats(r.epkl.total()),
                Cell::Nats(r.epkl.epistemic()),
                Cell::Nats(r.rmi),
            ]),
            ViewSelection::Only(v) => {
                let triple = match v {
                    View::MiBased => r.mi,
                    View::EpklBased => r.epkl,
                    View::RmiView => crate::measures::UncertaintyTriple::new(
                        r.mi.total(),
                        r.rmi,
                        crate::measures::Source::Ensemble(View::RmiView),
                    ),
                };
                cells.extend([
                    Cell::Nats(triple.total()),
                    Cell::Nats(triple.aleatoric()),
                    Cell::Nats(triple.epistemic()),
                ]);
            }
        }
        t.rows.push(cells);
    }
    t.write(format, unit, out)
}

const LAB_COLUMNS: [&str; 9] = [
    "posterior",
    "family",
    "expected_theta",
    "mi_total",
    "aleatoric",
    "mi_epistemic",
    "epkl_total",
    "epkl_epistemic",
    "rmi",
];

fn lab_row(r: &BernoulliReport) -> Vec<Cell> {
    vec![
        Cell::Text(r.posterior.label()),
        Cell::Text(r.posterior.family().to_string()),
        Cell::Real(r.expected_theta),
        Cell::Nats(r.mi.total()),
        Cell::Nats(r.mi.aleatoric()),
        Cell::Nats(r.mi.epistemic()),
        Cell::Nats(r.epkl.total()),
        Cell::Nats(r.epkl.epistemic()),
        Cell::Nats(r.rmi),
    ]
}

/// One row per posterior: label, family, `E[θ]`, both decompositions and RMI.
pub fn write_lab_table<W: Write>(
    reports: &[BernoulliReport],
    format: OutputFormat,
    unit: Unit,
    out: W,
) -> Result<(), IoError> {
    let mut t = Table::new(LAB_COLUMNS);
    t.rows.extend(reports.iter().map(lab_row));
    t.write(format, unit, out)
}

/// CSV columns `task, method, component, split_0, …, mean, std`; JSON mirrors
/// the same fields with `split_values` as an array. AUROC and AUC values are
/// unitless.
pub fn write_detection_report<W: Write>(
    report: &DetectionReport,
    format: OutputFormat,
    out: W,
) -> Result<(), IoError> {
    match format {
        OutputFormat::Csv => {
            let splits = report.components.first().map_or(0, |c| c.split_values.len());
            let mut t = Table::new(
                ["task".to_string(), "method".into(), "component".into()]
                    .into_iter()
                    .chain((0..splits).map(|i| format!("split_{i}")))
                    .chain(["mean".into(), "std".into()]),
            );
            for c in &report.components {
                let mut cells = vec![
                    Cell::Text(report.task.name().into()),
                    Cell::Text(report.method.clone()),
                    Cell::Text(c.component.name().into()),
                ];
                cells.extend(c.split_values.iter().map(|&v| Cell::Real(v)));
                cells.extend([Cell::Real(c.mean), Cell::Real(c.std)]);
                t.rows.push(cells);
            }
            t.write_csv(Unit::Nats, out)
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Component {
                component: &'static str,
                split_values: Vec<Num>,
                mean: Num,
                std: Num,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                task: &'static str,
                method: &'a str,
                components: Vec<Component>,
            }
            let doc = Doc {
                task: report.task.name(),
                method: &report.method,
                components: report
                    .components
                    .iter()
                    .map(|c| Component {
                        component: c.component.name(),
                        split_values: c.split_values.iter().map(|&v| Num(v)).collect(),
                        mean: Num(c.mean),
                        std: Num(c.std),
                    })
                    .collect(),
            };
            write_json(&doc, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
        assert_eq!(format_number(f64::INFINITY), "inf");
        let x = 0.1f64 + 0.2;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_infinity_is_a_string() {
        let v = serde_json::to_string(&[Num(f64::INFINITY), Num(1.0)]).unwrap();
        assert_eq!(v, r#"["inf",1.0000000000000000e0]"#);
        let parsed: serde_json::Value = serde_json::from_str(&v).unwrap();
        assert_eq!(parsed[1].as_f64(), Some(1.0));
    }
}
