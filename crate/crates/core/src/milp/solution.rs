use quick_xml::events::Event;
use quick_xml::Reader;

use super::{MilpError, MilpModel, SolveStatus, SolverSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionFormat {
    /// CPLEX-style XML with `<header>` and `<variable name= value=>` elements.
    Xml,
    /// One `name value` pair per line. `#` starts a comment; a line reading
    /// `infeasible` marks an infeasible model.
    Plain,
}

impl SolutionFormat {
    pub fn sniff(text: &str) -> Self {
        if text.trim_start().starts_with('<') {
            SolutionFormat::Xml
        } else {
            SolutionFormat::Plain
        }
    }
}

fn attr(e: &quick_xml::events::BytesStart<'_>, key: &[u8]) -> Result<Option<String>, MilpError> {
    for a in e.attributes() {
        let a = a.map_err(|err| MilpError::BadSolution(err.to_string()))?;
        if a.key.as_ref() == key {
            let v = a.unescape_value().map_err(|err| MilpError::BadSolution(err.to_string()))?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn parse_f64(s: &str) -> Result<f64, MilpError> {
    s.trim()
        .parse()
        .map_err(|_| MilpError::BadSolution(format!("not a number: {s:?}")))
}

/// Reads a solver's solution file into values indexed like
/// `model.variables`. Variables the file does not mention are zero.
pub fn parse_solution_text(model: &MilpModel, text: &str) -> Result<SolverSolution, MilpError> {
    let mut values = vec![0.0; model.num_vars()];
    let mut objective = None;
    let mut status = SolveStatus::Optimal;
    let mut gap = None;
    let mut set = |name: &str, v: f64| -> Result<(), MilpError> {
        let id = model
            .var(name)
            .ok_or_else(|| MilpError::BadSolution(format!("unknown variable {name:?}")))?;
        values[id] = v;
        Ok(())
    };
    match SolutionFormat::sniff(text) {
        SolutionFormat::Xml => {
            let mut reader = Reader::from_str(text);
            loop {
                match reader.read_event() {
                    Ok(Event::Start(e)) | Ok(Event::Empty(e)) => match e.name().as_ref() {
                        b"header" => {
                            if let Some(v) = attr(&e, b"objectiveValue")? {
                                objective = Some(parse_f64(&v)?);
                            }
                            if let Some(s) = attr(&e, b"solutionStatusString")? {
                                let s = s.to_ascii_lowercase();
                                if s.contains("infeasible") {
                                    status = SolveStatus::Infeasible;
                                } else if s.contains("time limit") && !s.contains("feasible") {
                                    status = SolveStatus::Timeout;
                                }
                            }
                            if let Some(g) = attr(&e, b"MIPRelativeGap")? {
                                gap = Some(parse_f64(&g)?);
                            }
                        }
                        b"variable" => {
                            let name = attr(&e, b"name")?
                                .ok_or_else(|| MilpError::BadSolution("variable without name".into()))?;
                            let value = attr(&e, b"value")?
                                .ok_or_else(|| MilpError::BadSolution(format!("{name} has no value")))?;
                            set(&name, parse_f64(&value)?)?;
                        }
                        _ => {}
                    },
                    Ok(Event::Eof) => break,
                    Ok(_) => {}
                    Err(err) => return Err(MilpError::BadSolution(err.to_string())),
                }
            }
        }
        SolutionFormat::Plain => {
            for line in text.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                if line.eq_ignore_ascii_case("infeasible") {
                    status = SolveStatus::Infeasible;
                    continue;
                }
                let mut parts = line.split_whitespace();
                let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(MilpError::BadSolution(format!("malformed line {line:?}")));
                };
                if name.eq_ignore_ascii_case("objective") {
                    objective = Some(parse_f64(value)?);
                } else if name.eq_ignore_ascii_case("gap") {
                    gap = Some(parse_f64(value)?);
                } else {
                    set(name, parse_f64(value)?)?;
                }
            }
        }
    }
    if status == SolveStatus::Optimal {
        if let Some(g) = gap.filter(|&g| g > 1e-9) {
            status = SolveStatus::FeasibleWithGap { gap: g };
        }
    }
    if !status.has_solution() {
        return Ok(SolverSolution { status, values: Vec::new(), objective_value: None, wall_time_s: 0.0 });
    }
    let objective_value = objective.or_else(|| Some(model.objective_at(&values)));
    Ok(SolverSolution { status, values, objective_value, wall_time_s: 0.0 })
}
