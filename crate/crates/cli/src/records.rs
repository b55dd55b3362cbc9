//! Tabular output: CSV with a header row, or one flat JSON object per line.
//! Floats are always written with 12 significant digits in scientific
//! notation so identical runs produce identical bytes.

use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    #[value(alias = "json-lines")]
    Jsonl,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<u32> for Field {
    fn from(v: u32) -> Self {
        Field::Int(v.into())
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_owned())
    }
}

impl From<String> for Field {
    fn from(v: String) -> Self {
        Field::Text(v)
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Empty, Into::into)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

impl Field {
    fn csv_text(&self) -> String {
        match self {
            Field::Float(v) => format_float(*v),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Empty => String::new(),
        }
    }

    fn json_text(&self) -> String {
        match self {
            // JSON has no NaN or infinity
            Field::Float(v) if !v.is_finite() => "null".into(),
            Field::Float(v) => format_float(*v),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => serde_json::Value::from(s.as_str()).to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Empty => "null".into(),
        }
    }
}

enum Sink<'a> {
    Csv(csv::Writer<Box<dyn Write + 'a>>),
    Jsonl(Box<dyn Write + 'a>),
}

pub struct Emitter<'a> {
    columns: &'static [&'static str],
    sink: Sink<'a>,
}

impl<'a> Emitter<'a> {
    pub fn new(
        format: Format,
        columns: &'static [&'static str],
        out: Box<dyn Write + 'a>,
    ) -> io::Result<Self> {
        let sink = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().from_writer(out);
                w.write_record(columns)?;
                Sink::Csv(w)
            }
            Format::Jsonl => Sink::Jsonl(out),
        };
        Ok(Emitter { columns, sink })
    }

    pub fn emit(&mut self, record: Vec<Field>) -> io::Result<()> {
        assert_eq!(record.len(), self.columns.len(), "record does not match columns");
        match &mut self.sink {
            Sink::Csv(w) => w.write_record(record.iter().map(Field::csv_text))?,
            Sink::Jsonl(w) => {
                let body: Vec<String> = self
                    .columns
                    .iter()
                    .zip(&record)
                    .map(|(k, v)| format!("\"{k}\":{}", v.json_text()))
                    .collect();
                writeln!(w, "{{{}}}", body.join(","))?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> io::Result<()> {
        match self.sink {
            Sink::Csv(mut w) => w.flush(),
            Sink::Jsonl(mut w) => w.flush(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format, rows: Vec<Vec<Field>>) -> String {
        let mut buf = Vec::new();
        {
            let mut e = Emitter::new(format, &["a", "b", "c"], Box::new(&mut buf)).unwrap();
            for r in rows {
                e.emit(r).unwrap();
            }
            e.finish().unwrap();
        }
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_float(1.0), "1.00000000000e0");
        assert_eq!(format_float(-2.5e-7), "-2.50000000000e-7");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_header_and_quotes() {
        let out = render(
            Format::Csv,
            vec![vec![0.5.into(), "x,y".into(), Field::Empty]],
        );
        assert_eq!(out, "a,b,c\n5.00000000000e-1,\"x,y\",\n");
    }

    #[test]
    fn jsonl_keeps_key_order() {
        let out = render(
            Format::Jsonl,
            vec![vec![3u32.into(), "q\"".into(), f64::INFINITY.into()]],
        );
        assert_eq!(out, "{\"a\":3,\"b\":\"q\\\"\",\"c\":null}\n");
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["a"], 3);
    }

    #[test]
    fn empty_csv_still_has_header() {
        assert_eq!(render(Format::Csv, vec![]), "a,b,c\n");
        assert_eq!(render(Format::Jsonl, vec![]), "");
    }
}
