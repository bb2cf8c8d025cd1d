use std::fmt::Write as _;
use std::io;
use std::path::Path;

use dispwave2d::norms::Exponent;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<Exponent> for Cell {
    fn from(e: Exponent) -> Self {
        match e {
            Exponent::Infinity => Cell::Text("inf".into()),
            Exponent::Finite(p) => Cell::Num(p),
        }
    }
}

/// 17 significant digits in scientific notation; `nan`, `inf`, `-inf`
/// otherwise.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(k) => k.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&'static str]) -> Self {
        Self { name: name.to_string(), header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::write(dir.join(self.file_name()), self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_carry_17_significant_digits() {
        assert_eq!(format_num(0.1), "1.0000000000000001e-1");
        assert_eq!(format_num(-2.5), "-2.5000000000000000e0");
        assert_eq!(format_num(f64::NAN), "nan");
        assert_eq!(format_num(f64::NEG_INFINITY), "-inf");
        for x in [1.0 / 3.0, std::f64::consts::PI, 6.02e23, -1e-300] {
            assert_eq!(format_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b", "c"]);
        t.push(vec![1.5.into(), 3usize.into(), "x,y".into()]);
        t.push(vec![Exponent::Infinity.into(), true.into(), "plain".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1.5000000000000000e0,3,\"x,y\"\ninf,true,plain\n");
        assert!(!t.to_csv().contains('\r'));
    }
}
