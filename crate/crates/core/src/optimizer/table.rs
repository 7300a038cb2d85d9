//! Plain-text form of an instance and its solution.
//!
//! ```text
//! # capacity 2
//! class,item,profit,weight,chosen
//! 0,0,0.45,1,1
//! ```
//!
//! One row per item; `chosen` is 1 for the selected item of each class when a
//! solution is attached, 0 otherwise. Numbers are written in shortest
//! round-trip form.

use std::fmt::Write;

use super::{Item, MckpInstance};
use crate::error::{Error, Result};

const HEADER: &str = "class,item,profit,weight,chosen";

pub fn write_table(instance: &MckpInstance, choice: Option<&[usize]>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# capacity {:?}", instance.capacity);
    out.push_str(HEADER);
    out.push('\n');
    for (f, class) in instance.classes.iter().enumerate() {
        for (i, it) in class.iter().enumerate() {
            let chosen = choice.is_some_and(|c| c.get(f) == Some(&i));
            let _ = writeln!(out, "{f},{i},{:?},{:?},{}", it.profit, it.weight, chosen as u8);
        }
    }
    out
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Reads a table back; the choice is `None` when no row is marked.
pub fn parse_table(text: &str) -> Result<(MckpInstance, Option<Vec<usize>>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (n, first) = lines.next().ok_or_else(|| parse_err(1, "empty table"))?;
    let capacity: f64 = first
        .strip_prefix("# capacity ")
        .ok_or_else(|| parse_err(n, "expected `# capacity <C>`"))?
        .parse()
        .map_err(|e| parse_err(n, format!("capacity: {e}")))?;
    let (n, header) = lines.next().ok_or_else(|| parse_err(2, "missing header"))?;
    if header != HEADER {
        return Err(parse_err(n, format!("expected header `{HEADER}`")));
    }
    let mut classes: Vec<Vec<Item>> = Vec::new();
    let mut chosen: Vec<Option<usize>> = Vec::new();
    let mut any = false;
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(parse_err(n, format!("expected 5 columns, got {}", cols.len())));
        }
        let int = |s: &str, what| s.parse::<usize>().map_err(|e| parse_err(n, format!("{what}: {e}")));
        let num = |s: &str, what| s.parse::<f64>().map_err(|e| parse_err(n, format!("{what}: {e}")));
        let (f, i) = (int(cols[0], "class")?, int(cols[1], "item")?);
        let item = Item {
            profit: num(cols[2], "profit")?,
            weight: num(cols[3], "weight")?,
        };
        let mark = match cols[4] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(n, format!("chosen must be 0 or 1, got `{other}`"))),
        };
        if f == classes.len() {
            classes.push(Vec::new());
            chosen.push(None);
        }
        if f + 1 != classes.len() || i != classes[f].len() {
            return Err(parse_err(n, "rows must list classes and items in order"));
        }
        classes[f].push(item);
        if mark {
            if chosen[f].is_some() {
                return Err(parse_err(n, format!("class {f} has two chosen items")));
            }
            chosen[f] = Some(i);
            any = true;
        }
    }
    let choice = if any {
        Some(
            chosen
                .iter()
                .enumerate()
                .map(|(f, c)| c.ok_or_else(|| parse_err(0, format!("class {f} has no chosen item"))))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok((MckpInstance { classes, capacity }, choice))
}
