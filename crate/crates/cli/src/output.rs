//! CSV assembly with fixed number formatting.

use std::fmt::Write;

/// Nine significant digits in scientific notation; infinities print as `inf`.
pub fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.8e}")
    }
}

/// `20 log10(alpha)`.
pub fn db(alpha: f64) -> String {
    num(20.0 * alpha.log10())
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts a document with the provenance header shared by every command.
    pub fn new(command: &str, scenario_hash: &str, canonical_scenario: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# repstab {command}");
        let _ = writeln!(text, "# scenario_sha256 = {scenario_hash}");
        for line in canonical_scenario.lines().filter(|l| !l.trim().is_empty()) {
            let _ = writeln!(text, "#   {line}");
        }
        Self { text }
    }

    pub fn comment(&mut self, key: &str, value: impl AsRef<str>) {
        let _ = writeln!(self.text, "# {key} = {}", value.as_ref());
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        let _ = writeln!(self.text, "{}", line.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}
