//! Plain-text drawing records.
//!
//! ```text
//! D n=<n_real> x=<x>
//! V <id>: <dart>,<dart>,...
//! H <id> twin=<id> edge=<a>-<b> seg=<k>
//! .
//! ```

use std::fmt::Write as _;
use std::io::BufRead;

use crate::drawing::{Dart, Drawing, Edge, NO_DART};
use crate::error::ParseError;

pub fn write_drawing(d: &Drawing) -> String {
    let mut s = String::new();
    write_drawing_into(&mut s, d);
    s
}

pub fn write_drawing_into(s: &mut String, d: &Drawing) {
    let _ = writeln!(s, "D n={} x={}", d.n_real(), d.crossings());
    for v in 1..=d.num_vertices() {
        let _ = write!(s, "V {v}:");
        for (i, dart) in d.rotation(v).enumerate() {
            let _ = write!(s, "{}{dart}", if i == 0 { " " } else { "," });
        }
        s.push('\n');
    }
    for (i, dart) in d.darts().iter().enumerate() {
        let _ = writeln!(
            s,
            "H {i} twin={} edge={}-{} seg={}",
            dart.twin,
            dart.edge.a(),
            dart.edge.b(),
            dart.seg
        );
    }
    s.push_str(".\n");
}

pub fn write_drawings<'a>(ds: impl IntoIterator<Item = &'a Drawing>) -> String {
    let mut s = String::new();
    for d in ds {
        write_drawing_into(&mut s, d);
    }
    s
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn field<'a>(tok: Option<&'a str>, key: &str, line: usize) -> Result<&'a str, ParseError> {
    tok.and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| syntax(line, format!("expected {key}=...")))
}

fn num(s: &str, line: usize) -> Result<usize, ParseError> {
    s.trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad number {s:?}")))
}

struct RecordParser {
    start_line: usize,
    n: usize,
    x: usize,
    rotations: Vec<(usize, Vec<usize>)>,
    halves: Vec<(usize, usize, Edge, usize)>,
}

impl RecordParser {
    fn header(line: &str, lineno: usize) -> Result<RecordParser, ParseError> {
        let mut toks = line.split_whitespace();
        if toks.next() != Some("D") {
            return Err(syntax(lineno, "expected record header `D n=.. x=..`"));
        }
        let n = num(field(toks.next(), "n", lineno)?, lineno)?;
        let x = num(field(toks.next(), "x", lineno)?, lineno)?;
        Ok(RecordParser {
            start_line: lineno,
            n,
            x,
            rotations: Vec::new(),
            halves: Vec::new(),
        })
    }

    fn line(&mut self, line: &str, lineno: usize) -> Result<(), ParseError> {
        if let Some(rest) = line.strip_prefix("V ") {
            let (id, darts) = rest
                .split_once(':')
                .ok_or_else(|| syntax(lineno, "expected `V <id>: ...`"))?;
            let id = num(id, lineno)?;
            let darts = darts
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| num(t, lineno))
                .collect::<Result<Vec<_>, _>>()?;
            self.rotations.push((id, darts));
            Ok(())
        } else if let Some(rest) = line.strip_prefix("H ") {
            let mut toks = rest.split_whitespace();
            let id = num(toks.next().unwrap_or(""), lineno)?;
            let twin = num(field(toks.next(), "twin", lineno)?, lineno)?;
            let edge = field(toks.next(), "edge", lineno)?;
            let (a, b) = edge
                .split_once('-')
                .ok_or_else(|| syntax(lineno, "edge must be `a-b`"))?;
            let (a, b) = (num(a, lineno)?, num(b, lineno)?);
            if a == b || a == 0 || b == 0 || a > u16::MAX as usize || b > u16::MAX as usize {
                return Err(syntax(lineno, format!("invalid edge {edge}")));
            }
            let seg = num(field(toks.next(), "seg", lineno)?, lineno)?;
            self.halves.push((id, twin, Edge::new(a, b), seg));
            Ok(())
        } else {
            Err(syntax(lineno, format!("unexpected line {line:?}")))
        }
    }

    fn finish(mut self) -> Result<Drawing, ParseError> {
        let line = self.start_line;
        self.halves.sort_by_key(|h| h.0);
        for (i, h) in self.halves.iter().enumerate() {
            if h.0 != i {
                return Err(syntax(line, format!("dart ids are not contiguous near {}", h.0)));
            }
        }
        let mut darts: Vec<Dart> = self
            .halves
            .iter()
            .map(|&(_, twin, edge, seg)| Dart {
                twin,
                next: NO_DART,
                origin: 0,
                edge,
                seg,
            })
            .collect();
        let nd = darts.len();
        for (v, rot) in &self.rotations {
            for (i, &d) in rot.iter().enumerate() {
                if d >= nd {
                    return Err(syntax(line, format!("vertex {v} lists unknown dart {d}")));
                }
                darts[d].origin = *v;
                darts[d].next = rot[(i + 1) % rot.len()];
            }
        }
        Ok(Drawing::from_parts(self.n, self.x, darts))
    }
}

/// Parses every record; a bad record yields an error and parsing resumes
/// after its terminator.
pub fn read_drawings<R: BufRead>(reader: R) -> Vec<Result<Drawing, ParseError>> {
    let mut out = Vec::new();
    let mut current: Option<Result<RecordParser, ParseError>> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                out.push(Err(ParseError::Io(e)));
                return out;
            }
        };
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match current.take() {
            None => current = Some(RecordParser::header(line, lineno)),
            Some(state) => {
                if line == "." {
                    out.push(state.and_then(RecordParser::finish));
                } else {
                    current = Some(state.and_then(|mut p| p.line(line, lineno).map(|_| p)));
                }
            }
        }
    }
    if current.is_some() {
        out.push(Err(ParseError::Truncated));
    }
    out
}

pub fn parse_drawings(text: &str) -> Vec<Result<Drawing, ParseError>> {
    read_drawings(text.as_bytes())
}
