//! PD (planar diagram) text format: comma-separated `V[a,b,c]` and
//! `X[a,b,c,d]` entries, whitespace-insensitive. Slot order is the
//! counterclockwise rotation; an `X` entry starts at an under-strand arc.

use crate::diagram::{ArcId, Diagram, DiagramError, Node};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PdError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("diagram with free loops cannot be written as PD text")]
    Unencodable,
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, ch: u8) -> Result<(), PdError> {
        match self.peek() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(PdError::Syntax {
                pos: self.pos,
                msg: format!("expected '{}'", ch as char),
            }),
        }
    }

    fn number(&mut self) -> Result<ArcId, PdError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(PdError::Syntax {
                pos: self.pos,
                msg: "expected arc label".into(),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| PdError::Syntax {
                pos: start,
                msg: "arc label out of range".into(),
            })
    }

    fn labels(&mut self, expected: usize) -> Result<Vec<ArcId>, PdError> {
        self.expect(b'[')?;
        let mut out = Vec::with_capacity(expected);
        loop {
            out.push(self.number()?);
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                }
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => {
                    return Err(PdError::Syntax {
                        pos: self.pos,
                        msg: "expected ',' or ']'".into(),
                    })
                }
            }
        }
        if out.len() != expected {
            return Err(PdError::Syntax {
                pos: self.pos,
                msg: format!("expected {expected} labels, found {}", out.len()),
            });
        }
        Ok(out)
    }
}

/// Parses PD text into a diagram. Arc labels may be arbitrary nonnegative
/// integers; they are relabeled densely.
pub fn parse_pd(text: &str) -> Result<Diagram, PdError> {
    let mut scanner = Scanner::new(text);
    let mut nodes = Vec::new();
    loop {
        match scanner.peek() {
            Some(b'V') | Some(b'v') => {
                scanner.pos += 1;
                let l = scanner.labels(3)?;
                nodes.push(Node::Vertex([l[0], l[1], l[2]]));
            }
            Some(b'X') | Some(b'x') => {
                scanner.pos += 1;
                let l = scanner.labels(4)?;
                nodes.push(Node::Crossing([l[0], l[1], l[2], l[3]]));
            }
            Some(c) => {
                return Err(PdError::Syntax {
                    pos: scanner.pos,
                    msg: format!("expected 'V' or 'X', found '{}'", c as char),
                })
            }
            None => {
                return Err(PdError::Syntax {
                    pos: scanner.pos,
                    msg: "empty PD code".into(),
                })
            }
        }
        match scanner.peek() {
            Some(b',') => {
                scanner.pos += 1;
            }
            None => break,
            _ => {
                return Err(PdError::Syntax {
                    pos: scanner.pos,
                    msg: "expected ',' between entries".into(),
                })
            }
        }
    }
    Ok(Diagram::new(nodes, 0)?)
}

/// Writes a diagram back to PD text. Free loops cannot be encoded.
pub fn write_pd(d: &Diagram) -> Result<String, PdError> {
    if d.free_loops() > 0 {
        return Err(PdError::Unencodable);
    }
    let mut out = String::new();
    for (i, node) in d.nodes().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let (tag, slots) = match node {
            Node::Vertex(a) => ('V', &a[..]),
            Node::Crossing(a) => ('X', &a[..]),
        };
        out.push(tag);
        out.push('[');
        for (j, arc) in slots.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&arc.to_string());
        }
        out.push(']');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::canonical_code;
    use crate::diagram::DiagramError;

    #[test]
    fn parse_theta() {
        let d = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        assert_eq!(d.nodes().len(), 2);
        assert_eq!(d.arc_count(), 3);
        assert_eq!(d.crossing_count(), 0);
    }

    #[test]
    fn parse_b31() {
        let d = parse_pd("V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]").unwrap();
        assert_eq!(d.vertex_count(), 2);
        assert_eq!(d.crossing_count(), 3);
    }

    #[test]
    fn malformed_arc_rejected() {
        let err = parse_pd("V[0,1,2],V[0,1,3]").unwrap_err();
        assert!(matches!(
            err,
            PdError::Diagram(DiagramError::MalformedArc { .. })
        ));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse_pd("V[0,1,2],V[0,2,1]").unwrap();
        let b = parse_pd(" V [ 0 , 1 , 2 ] ,\n V[0,2,1] ").unwrap();
        assert_eq!(canonical_code(&a), canonical_code(&b));
    }

    #[test]
    fn syntax_error_position() {
        match parse_pd("V[0,1,2],W[0,2,1]") {
            Err(PdError::Syntax { pos, .. }) => assert_eq!(pos, 9),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn round_trip_preserves_canonical_code() {
        let text = "V[0,1,2],V[0,3,4],X[1,5,6,7],X[7,8,3,2],X[8,6,5,4]";
        let d = parse_pd(text).unwrap();
        let d2 = parse_pd(&write_pd(&d).unwrap()).unwrap();
        assert_eq!(canonical_code(&d), canonical_code(&d2));
    }

    #[test]
    fn free_loops_unencodable() {
        let d = crate::diagram::Diagram::unknots(1);
        assert_eq!(write_pd(&d).unwrap_err(), PdError::Unencodable);
    }

    #[test]
    fn nonconsecutive_labels_accepted() {
        let d = parse_pd("V[10,51,32],V[10,32,51]").unwrap();
        assert_eq!(d.arc_count(), 3);
    }
}
