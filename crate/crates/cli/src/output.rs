use std::fmt::Write as _;
use std::path::Path;

use accelsched::Time;
use anyhow::{Context, Result};
use serde::Serialize;

use crate::manifest::Format;

/// Microseconds as milliseconds with three decimals.
pub fn ms(us: Time) -> String {
    format!("{}.{:03}", us / 1000, us % 1000)
}

pub fn ms_opt(us: Option<Time>) -> String {
    us.map_or_else(|| "-".into(), ms)
}

/// Signed difference `b - a` in milliseconds, `-` if either side is missing.
pub fn delta_ms(a: Option<Time>, b: Option<Time>) -> String {
    match (a, b) {
        (Some(a), Some(b)) if b >= a => format!("+{}", ms(b - a)),
        (Some(a), Some(b)) => format!("-{}", ms(a - b)),
        _ => "-".into(),
    }
}

pub fn yes_no(b: bool) -> String {
    if b { "YES" } else { "NO" }.into()
}

#[derive(Debug, Clone)]
pub struct Table {
    /// File stem when written to a directory.
    pub name: String,
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: &str, title: &str, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            title: title.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.headers.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn to_md(&self) -> String {
        let mut out = format!("### {}\n\n", self.title);
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        out.push_str(&line(&self.headers));
        out.push_str(&format!("|{}\n", "---|".repeat(self.headers.len())));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        for n in &self.notes {
            let _ = write!(out, "\n{n}\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory csv write cannot fail");
        for r in &self.rows {
            w.write_record(r).expect("in-memory csv write cannot fail");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush cannot fail")).expect("csv is utf-8")
    }
}

/// A command's result: the machine-readable document and its tables.
pub struct Rendered<'a, T: Serialize> {
    pub stem: &'a str,
    pub json: &'a T,
    pub tables: Vec<Table>,
    /// Free-form lines printed after the tables in md format.
    pub messages: Vec<String>,
}

impl<T: Serialize> Rendered<'_, T> {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self.json).expect("report serialization cannot fail");
                s.push('\n');
                s
            }
            Format::Md => {
                let mut parts: Vec<String> = self.tables.iter().map(Table::to_md).collect();
                if !self.messages.is_empty() {
                    parts.push(self.messages.join("\n") + "\n");
                }
                parts.join("\n")
            }
            Format::Csv => self
                .tables
                .iter()
                .map(|t| format!("# {}\n{}", t.title, t.to_csv()))
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }

    /// Prints in the requested format and, with `out`, writes
    /// `<stem>.json`, `<stem>.md` and one CSV per table.
    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        print!("{}", self.render(format));
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let write = |name: String, text: String| {
                let p = dir.join(name);
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
            };
            write(format!("{}.json", self.stem), self.render(Format::Json))?;
            write(format!("{}.md", self.stem), self.render(Format::Md))?;
            for t in &self.tables {
                write(format!("{}.csv", t.name), t.to_csv())?;
            }
        }
        Ok(())
    }
}
