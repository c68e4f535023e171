use std::fmt::Write;

use super::{MilpModel, RowSense, VarId, VarKind};

const LINE_WIDTH: usize = 100;

fn number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Writes `name: t1 + t2 ...` wrapped at [`LINE_WIDTH`]. An empty term
/// list is written as `0 <first variable>` so the row stays parseable.
fn linear(out: &mut String, model: &MilpModel, head: &str, terms: &[(VarId, f64)], tail: &str) {
    let mut sorted: Vec<(&str, f64)> = terms
        .iter()
        .map(|&(v, c)| (model.variables[v].name.as_str(), c))
        .collect();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    if sorted.is_empty() {
        sorted.push((model.variables[0].name.as_str(), 0.0));
    }
    let mut line = format!(" {head}:");
    for (k, (name, c)) in sorted.into_iter().enumerate() {
        let sign = if c < 0.0 { "-" } else if k == 0 { "" } else { "+" };
        let mag = c.abs();
        let piece = if mag == 1.0 {
            format!(" {sign} {name}")
        } else {
            format!(" {sign} {} {name}", number(mag))
        };
        let piece = piece.replacen("  ", " ", 1);
        if line.len() + piece.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from("  ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
    out.push_str(tail);
    out.push('\n');
}

/// Renders the model in CPLEX-LP syntax. Rows are sorted by name and terms
/// by variable name, so equal models give byte-identical files.
pub fn emit_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ accelsched model\n");
    if let (Some(p), Some(o)) = (model.policy, model.objective_kind) {
        let _ = writeln!(out, "\\ policy {p}, objective {o}");
    }
    out.push_str("Minimize\n");
    if model.variables.is_empty() {
        out.push_str(" obj:\nEnd\n");
        return out;
    }
    linear(&mut out, model, "obj", &model.objective, "");

    let mut rows: Vec<_> = model.rows.iter().collect();
    rows.sort_by(|a, b| a.name.cmp(&b.name));
    if !rows.is_empty() {
        out.push_str("Subject To\n");
        for row in rows {
            let op = match row.sense {
                RowSense::Le => "<=",
                RowSense::Ge => ">=",
                RowSense::Eq => "=",
            };
            linear(&mut out, model, &row.name, &row.terms, &format!(" {op} {}", number(row.rhs)));
        }
    }

    let mut vars: Vec<_> = model.variables.iter().collect();
    vars.sort_by(|a, b| a.name.cmp(&b.name));
    out.push_str("Bounds\n");
    for v in vars.iter().filter(|v| v.kind != VarKind::Binary) {
        match v.upper {
            Some(u) => {
                let _ = writeln!(out, " {} <= {} <= {}", number(v.lower), v.name, number(u));
            }
            None => {
                let _ = writeln!(out, " {} >= {}", v.name, number(v.lower));
            }
        }
    }
    for (section, kind) in [("General", VarKind::Integer), ("Binary", VarKind::Binary)] {
        let names: Vec<&str> = vars.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{section}");
        for chunk in names.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AccelPolicy;
    use crate::milp::{build_model, BigM, ObjectiveKind};
    use crate::model::builtin_waters;

    #[test]
    fn small_model_text() {
        let mut m = MilpModel::new(BigM::default());
        let x = m.binary("x");
        let y = m.continuous("y");
        let p = m.integer("p", 1.0, 3.0);
        m.add_row("r2", vec![(y, 1.0), (x, -2.5)], RowSense::Ge, 0.0);
        m.add_row("r1", vec![(x, 1.0), (p, 1.0)], RowSense::Le, 3.0);
        m.objective = vec![(y, 1.0)];
        let text = emit_lp(&m);
        assert_eq!(
            text,
            "\\ accelsched model\nMinimize\n obj: y\nSubject To\n r1: p + x <= 3\n r2: - 2.5 x + y >= 0\n\
             Bounds\n 1 <= p <= 3\n y >= 0\nGeneral\n p\nBinary\n x\nEnd\n"
        );
    }

    #[test]
    fn deterministic() {
        let w = builtin_waters();
        let a = emit_lp(&build_model(&w, AccelPolicy::RoundRobin, ObjectiveKind::MinMaxLat).unwrap());
        let b = emit_lp(&build_model(&w, AccelPolicy::RoundRobin, ObjectiveKind::MinMaxLat).unwrap());
        assert_eq!(a, b);
        assert!(a.lines().all(|l| l.len() <= LINE_WIDTH + 40));
    }

    #[test]
    fn highs_reads_it_back() {
        let w = builtin_waters();
        for p in AccelPolicy::ALL {
            let m = build_model(&w, p, ObjectiveKind::MinSumRt).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.lp");
            std::fs::write(&path, emit_lp(&m)).unwrap();
            let c = std::ffi::CString::new(path.to_str().unwrap()).unwrap();
            unsafe {
                let h = highs_sys::Highs_create();
                let quiet = std::ffi::CString::new("output_flag").unwrap();
                highs_sys::Highs_setBoolOptionValue(h, quiet.as_ptr(), 0);
                assert_eq!(highs_sys::Highs_readModel(h, c.as_ptr()), highs_sys::STATUS_OK);
                assert_eq!(highs_sys::Highs_getNumCol(h) as usize, m.num_vars());
                assert_eq!(highs_sys::Highs_getNumRow(h) as usize, m.num_rows());
                highs_sys::Highs_destroy(h);
            }
        }
    }
}
