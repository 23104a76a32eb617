//! ISCAS89 `.bench` reader and writer.
//!
//! Supported statements, one per line:
//!
//! ```text
//! INPUT(a)
//! OUTPUT(z)
//! q = DFF(d)
//! z = AND(a, q)      # any GateKind; `#` starts a comment
//! ```

use std::fmt::Write as _;

use super::{GateKind, Netlist, NetlistBuilder, NetlistError};

struct Line<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Line<'a> {
    fn err(&self, col: usize, message: impl Into<String>) -> NetlistError {
        NetlistError::Syntax { line: self.line, column: col + 1, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn ident(&mut self, what: &str) -> Result<(&'a str, usize), NetlistError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len()
            && !matches!(bytes[self.pos], b'(' | b')' | b',' | b'=')
            && !bytes[self.pos].is_ascii_whitespace()
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(start, format!("expected {what}")));
        }
        Ok((&self.text[start..self.pos], start))
    }

    fn expect(&mut self, c: u8) -> Result<(), NetlistError> {
        self.skip_ws();
        if self.text.as_bytes().get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.text[self.pos..].chars().next().map_or("end of line".to_string(), |c| format!("`{c}`"));
            Err(self.err(self.pos, format!("expected `{}`, found {found}", c as char)))
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.as_bytes().get(self.pos).copied()
    }

    /// `( name, name, ... )`, possibly empty.
    fn args(&mut self) -> Result<Vec<&'a str>, NetlistError> {
        self.expect(b'(')?;
        let mut out = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.ident("net name")?.0);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err(self.pos, "expected `,` or `)`")),
            }
        }
    }
}

/// Parses `.bench` text into a validated netlist.
pub fn parse_bench(text: &str) -> Result<Netlist, NetlistError> {
    let mut b = NetlistBuilder::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut line = Line { text: body, pos: 0, line: idx + 1 };
        if line.at_end() {
            continue;
        }
        b.set_line(Some(idx + 1));
        let (head, head_col) = line.ident("statement")?;
        if line.peek() == Some(b'(') {
            let args = line.args()?;
            let kw = head.to_ascii_uppercase();
            let [name] = args.as_slice() else {
                return Err(line.err(head_col, format!("{kw} takes exactly one net")));
            };
            match kw.as_str() {
                "INPUT" => {
                    b.add_input(name)?;
                }
                "OUTPUT" => {
                    b.add_output(name);
                }
                _ => return Err(line.err(head_col, format!("unknown declaration `{head}`"))),
            }
        } else {
            line.expect(b'=')?;
            let (kind_text, kind_col) = line.ident("gate type")?;
            let args = line.args()?;
            if kind_text.eq_ignore_ascii_case("DFF") {
                let [d] = args.as_slice() else {
                    return Err(line.err(kind_col, format!("DFF takes exactly one net, got {}", args.len())));
                };
                b.add_register(head, d)?;
            } else {
                let kind: GateKind =
                    kind_text.parse().map_err(|_| line.err(kind_col, format!("unknown gate type `{kind_text}`")))?;
                b.add_gate(kind, head, &args)?;
            }
        }
        if !line.at_end() {
            return Err(line.err(line.pos, "trailing characters"));
        }
    }
    b.set_line(None);
    b.finish()
}

/// Serializes a netlist as `.bench` text. Gates are written in topological
/// order, so the output is stable for a given netlist.
pub fn write_bench(netlist: &Netlist) -> String {
    let mut out = String::new();
    for &i in netlist.inputs() {
        let _ = writeln!(out, "INPUT({})", netlist.net_name(i));
    }
    for &o in netlist.outputs() {
        let _ = writeln!(out, "OUTPUT({})", netlist.net_name(o));
    }
    out.push('\n');
    for r in netlist.registers() {
        let _ = writeln!(out, "{} = DFF({})", netlist.net_name(r.q), netlist.net_name(r.d));
    }
    for &g in netlist.topo_order() {
        let gate = &netlist.gates()[g];
        let args: Vec<&str> = gate.inputs.iter().map(|&n| netlist.net_name(n)).collect();
        let _ = writeln!(out, "{} = {}({})", netlist.net_name(gate.output), gate.kind, args.join(", "));
    }
    out
}
