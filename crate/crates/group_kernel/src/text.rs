//! Plain-text exchange format: the order on the first line, then the `order²`
//! table entries row by row, then `A: ids` and `B: ids`.

use std::fmt::Write;

use crate::marked::MarkedGamma;
use crate::table::{Elem, FiniteGroup};
use crate::{GroupError, Result};

pub fn to_text(g: &MarkedGamma) -> String {
    let group = g.gamma();
    let n = group.order();
    let mut out = format!("{n}\n");
    for row in group.table().chunks(n) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    let list = |ids: &[Elem]| {
        ids.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "A: {}", list(g.a_images())).unwrap();
    writeln!(out, "B: {}", list(g.b_images())).unwrap();
    out
}

pub fn from_text(text: &str) -> Result<MarkedGamma> {
    let mut order = None;
    let mut entries: Vec<Elem> = Vec::new();
    let mut a = None;
    let mut b = None;
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        if let Some(rest) = line.strip_prefix("A:") {
            a = Some(parse_ids(rest)?);
        } else if let Some(rest) = line.strip_prefix("B:") {
            b = Some(parse_ids(rest)?);
        } else if order.is_none() {
            order = Some(
                line.parse::<usize>()
                    .map_err(|_| GroupError::Parse(format!("bad order line {line:?}")))?,
            );
        } else {
            entries.extend(parse_ids(line)?);
        }
    }
    let order = order.ok_or_else(|| GroupError::Parse("missing order line".into()))?;
    let group = FiniteGroup::from_table(order, entries)?;
    let a = a.ok_or_else(|| GroupError::Parse("missing A line".into()))?;
    let b = b.ok_or_else(|| GroupError::Parse("missing B line".into()))?;
    MarkedGamma::new(group, a, b)
}

fn parse_ids(s: &str) -> Result<Vec<Elem>> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<Elem>()
                .map_err(|_| GroupError::Parse(format!("bad id {t:?}")))
        })
        .collect()
}
