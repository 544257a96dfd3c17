use std::fmt::{self, Display};

use fracthermo_core::fmt_g17;

/// `key = value` lines; floats are written with 17 significant digits.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.lines.push(format!("{key} = {}", fmt_g17(value)));
    }

    pub fn blank(&mut self) {
        self.lines.push(String::new());
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
