//! Line-oriented circuit text: `GATE(angle) q0 q1`, one gate per line.
//! Controlled gates carry a `CONTROLLED ` prefix with the control listed first.
//! A `# qubits N` comment fixes the register size; otherwise it is inferred.

use num_complex::Complex64;

use super::{Circuit, GateKind};
use crate::error::{Error, Result};

pub(super) fn write_circuit(circuit: &Circuit) -> String {
    let mut out = format!("# qubits {}\n", circuit.qubit_count());
    for g in circuit.gates() {
        out.push_str(&gate_head(&g.kind));
        for t in &g.targets {
            out.push_str(&format!(" {t}"));
        }
        out.push('\n');
    }
    out
}

fn gate_head(kind: &GateKind) -> String {
    match kind {
        GateKind::Controlled(inner) => format!("CONTROLLED {}", gate_head(inner)),
        GateKind::GeneralizedHadamard { u, v } => {
            format!("GH({:?},{:?},{:?},{:?})", u.re, u.im, v.re, v.im)
        }
        GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) | GateKind::ZzPhase(t) | GateKind::Xy(t) | GateKind::XyFused(t) => {
            format!("{}({t:?})", kind.name())
        }
        other => other.name(),
    }
}

/// Parses circuit text. Byte offsets in errors are relative to the whole input.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut declared = None;
    let mut parsed: Vec<(GateKind, Vec<usize>)> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let content = line.trim_end_matches(['\n', '\r']);
        let lead = content.len() - content.trim_start().len();
        let body = content.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(comment) = body.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if let ["qubits", n] = words.as_slice() {
                declared = Some(n.parse::<usize>().map_err(|_| Error::parse(start + lead, "invalid qubit count"))?);
            }
            continue;
        }
        parsed.push(parse_line(body, start + lead)?);
    }
    let used = parsed.iter().flat_map(|(_, t)| t.iter().map(|&q| q + 1)).max().unwrap_or(0);
    let qubits = declared.unwrap_or(used);
    let mut circuit = Circuit::new(qubits);
    for (kind, targets) in parsed {
        circuit.push(kind, &targets)?;
    }
    Ok(circuit)
}

fn parse_line(line: &str, base: usize) -> Result<(GateKind, Vec<usize>)> {
    let mut rest = line;
    let mut controls = 0;
    while let Some(after) = rest.strip_prefix("CONTROLLED ") {
        controls += 1;
        rest = after.trim_start();
    }
    let consumed = line.len() - rest.len();
    let (head, args_end) = split_head(rest).map_err(|(off, msg)| Error::parse(base + consumed + off, msg))?;
    let (name, params) = head;
    let kind = build_kind(&name, &params).map_err(|msg| Error::parse(base + consumed, msg))?;
    let kind = (0..controls).fold(kind, |k, _| GateKind::Controlled(Box::new(k)));
    let mut targets = Vec::new();
    let mut pos = consumed + args_end;
    for word in line[pos..].split_whitespace() {
        let at = line[pos..].find(word).unwrap() + pos;
        targets.push(word.parse::<usize>().map_err(|_| Error::parse(base + at, format!("invalid qubit '{word}'")))?);
        pos = at + word.len();
    }
    Ok((kind, targets))
}

type Head = (String, Vec<f64>);

/// Splits `NAME(args)` off the start of `s`, returning the end offset of the head.
fn split_head(s: &str) -> std::result::Result<(Head, usize), (usize, String)> {
    let name_end = s.find(|ch: char| !ch.is_ascii_alphanumeric()).unwrap_or(s.len());
    let name = s[..name_end].to_ascii_uppercase();
    if name.is_empty() {
        return Err((0, "missing gate name".into()));
    }
    if !s[name_end..].starts_with('(') {
        return Ok(((name, vec![]), name_end));
    }
    let mut depth = 0;
    let mut close = None;
    for (i, ch) in s[name_end..].char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(name_end + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or((name_end, "unbalanced parentheses".to_string()))?;
    let inner = &s[name_end + 1..close];
    let mut params = Vec::new();
    let mut arg_start = name_end + 1;
    for piece in split_top_level(inner) {
        params.push(eval_angle(piece).map_err(|msg| (arg_start, msg))?);
        arg_start += piece.len() + 1;
    }
    Ok(((name, params), close + 1))
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

fn build_kind(name: &str, params: &[f64]) -> std::result::Result<GateKind, String> {
    let one = |f: fn(f64) -> GateKind| match params {
        [t] => Ok(f(*t)),
        _ => Err(format!("{name} takes one angle, got {}", params.len())),
    };
    let none = |k: GateKind| {
        if params.is_empty() {
            Ok(k)
        } else {
            Err(format!("{name} takes no parameters"))
        }
    };
    match name {
        "X" => none(GateKind::X),
        "CNOT" => none(GateKind::Cnot),
        "SWAP" => none(GateKind::Swap),
        "RY" => one(GateKind::Ry),
        "RZ" => one(GateKind::Rz),
        "PHASE" => one(GateKind::Phase),
        "ZZ" => one(GateKind::ZzPhase),
        "XY" => one(GateKind::Xy),
        "XYSWAP" => one(GateKind::XyFused),
        "GH" => match params {
            [ur, ui, vr, vi] => Ok(GateKind::GeneralizedHadamard {
                u: Complex64::new(*ur, *ui),
                v: Complex64::new(*vr, *vi),
            }),
            _ => Err("GH takes four parameters (u.re, u.im, v.re, v.im)".into()),
        },
        other => Err(format!("unknown gate '{other}'")),
    }
}

/// Evaluates an angle expression: numbers, `pi`, `+ - * / ^`, parentheses and
/// the functions sqrt, sin, cos, tan, asin, acos, atan, exp, ln.
pub fn eval_angle(expr: &str) -> std::result::Result<f64, String> {
    let tokens = tokenize(expr)?;
    let mut parser = ExprParser { tokens, pos: 0 };
    let value = parser.sum()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("unexpected trailing input in '{}'", expr.trim()));
    }
    if !value.is_finite() {
        return Err(format!("'{}' is not finite", expr.trim()));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token::Num(text.parse().map_err(|_| format!("invalid number '{text}'"))?));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect::<String>().to_ascii_lowercase()));
        } else if "+-*/^()".contains(ch) {
            out.push(Token::Op(ch));
            i += 1;
        } else {
            return Err(format!("unexpected character '{ch}'"));
        }
    }
    Ok(out)
}

struct ExprParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl ExprParser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> std::result::Result<f64, String> {
        let mut acc = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn product(&mut self) -> std::result::Result<f64, String> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == '*' { acc * rhs } else { acc / rhs };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> std::result::Result<f64, String> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> std::result::Result<f64, String> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<f64, String> {
        let token = self.tokens.get(self.pos).cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match token {
            Token::Num(v) => Ok(v),
            Token::Op('(') => {
                let v = self.sum()?;
                if self.peek_op() != Some(')') {
                    return Err("missing ')'".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Token::Ident(name) if name == "pi" => Ok(std::f64::consts::PI),
            Token::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sqrt" => f64::sqrt,
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "asin" => f64::asin,
                    "acos" => f64::acos,
                    "atan" => f64::atan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    other => return Err(format!("unknown function '{other}'")),
                };
                if self.peek_op() != Some('(') {
                    return Err(format!("'{name}' must be followed by '('"));
                }
                Ok(f(self.atom()?))
            }
            Token::Op(op) => Err(format!("unexpected '{op}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_expressions() {
        assert_eq!(eval_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(eval_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(eval_angle("acos(-1/3)").unwrap(), (-1.0f64 / 3.0).acos());
        assert_eq!(eval_angle("2*asin(1/sqrt(3))").unwrap(), 2.0 * (1.0 / 3f64.sqrt()).asin());
        assert_eq!(eval_angle("1e-3 + 2^3").unwrap(), 8.001);
        assert_eq!(eval_angle("-0.5").unwrap(), -0.5);
        assert!(eval_angle("foo(1)").is_err());
        assert!(eval_angle("1 +").is_err());
        assert!(eval_angle("(1").is_err());
        assert!(eval_angle("1/0").is_err());
    }

    #[test]
    fn parse_errors_report_offsets() {
        let err = parse_circuit("X 0\nFOO 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 4, .. }), "{err:?}");
        let err = parse_circuit("CNOT 0 x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 7, .. }), "{err:?}");
    }

    #[test]
    fn controlled_and_gh_round_trip() {
        let text = "# qubits 3\nCONTROLLED RY(0.5) 2 0\nGH(0.6,0.0,0.8,0.0) 1\nCONTROLLED CONTROLLED X 0 1 2\n";
        let circ = parse_circuit(text).unwrap();
        assert_eq!(circ.qubit_count(), 3);
        assert_eq!(circ.gates()[0].kind, GateKind::Controlled(Box::new(GateKind::Ry(0.5))));
        assert_eq!(parse_circuit(&circ.to_text()).unwrap(), circ);
    }
}
