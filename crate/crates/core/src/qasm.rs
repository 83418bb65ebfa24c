//! OpenQASM 2.0 frontend for the supported subset.
//!
//! Registers are flattened into one contiguous qubit/clbit index space in
//! declaration order. `include "qelib1.inc"` is a no-op: the qelib1 gates are
//! builtins. The native rotation names `rx`, `ry`, `r` and `rxx` parse
//! directly to native gate kinds (with the +i exponent convention); the other
//! builtin gates keep their standard qelib1 meaning until lowering.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, GateKind, GateOp, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Syntax,
    UnknownGate,
    UndeclaredRegister,
    IndexOutOfRange,
    Unsupported,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{span_line}:{span_col}: {category:?}: {message}", span_line = span.line, span_col = span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub category: ErrorCategory,
    pub message: String,
}

impl ParseError {
    fn new(span: SourceSpan, category: ErrorCategory, message: impl Into<String>) -> ParseError {
        ParseError { span, category, message: message.into() }
    }
}

/// (name, parameter count, qubit count) of every builtin gate application.
const BUILTIN_GATES: &[(&str, usize, usize)] = &[
    ("u1", 1, 1),
    ("u2", 2, 1),
    ("u3", 3, 1),
    ("rx", 1, 1),
    ("ry", 1, 1),
    ("rz", 1, 1),
    ("r", 2, 1),
    ("rxx", 1, 2),
    ("x", 0, 1),
    ("y", 0, 1),
    ("z", 0, 1),
    ("h", 0, 1),
    ("s", 0, 1),
    ("sdg", 0, 1),
    ("t", 0, 1),
    ("tdg", 0, 1),
    ("cx", 0, 2),
    ("cz", 0, 2),
    ("swap", 0, 2),
    ("ccx", 0, 3),
];

fn builtin(name: &str) -> Option<(usize, usize)> {
    BUILTIN_GATES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, p, q)| (p, q))
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Symbol(char),
    Arrow,
}

struct Lexer {
    tokens: Vec<(Token, SourceSpan)>,
    pos: usize,
    end: SourceSpan,
}

fn lex(src: &str) -> Result<Lexer, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line = 1usize;
    let mut col = 1usize;
    macro_rules! bump {
        () => {{
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                col = 1;
            } else if ch.is_some() {
                col += 1;
            }
            ch
        }};
    }
    while let Some(&ch) = chars.peek() {
        let span = SourceSpan { line, column: col };
        match ch {
            c if c.is_whitespace() => {
                bump!();
            }
            '/' => {
                bump!();
                match chars.peek() {
                    Some('/') => {
                        while let Some(&c) = chars.peek() {
                            if c == '\n' {
                                break;
                            }
                            bump!();
                        }
                    }
                    Some('*') => {
                        bump!();
                        loop {
                            match bump!() {
                                Some('*') if chars.peek() == Some(&'/') => {
                                    bump!();
                                    break;
                                }
                                Some(_) => {}
                                None => {
                                    return Err(ParseError::new(
                                        span,
                                        ErrorCategory::Syntax,
                                        "unterminated block comment",
                                    ))
                                }
                            }
                        }
                    }
                    _ => tokens.push((Token::Symbol('/'), span)),
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    tokens.push((Token::Arrow, span));
                } else {
                    tokens.push((Token::Symbol('-'), span));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                tokens.push((Token::Ident(s), span));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' {
                        s.push(c);
                        bump!();
                        if (s.ends_with('e') || s.ends_with('E'))
                            && matches!(chars.peek(), Some('+') | Some('-'))
                        {
                            s.push(*chars.peek().unwrap());
                            bump!();
                        }
                    } else {
                        break;
                    }
                }
                let value: f64 = s.parse().map_err(|_| {
                    ParseError::new(span, ErrorCategory::Syntax, format!("bad number {s:?}"))
                })?;
                tokens.push((Token::Number(value), span));
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some(c) => s.push(c),
                        None => {
                            return Err(ParseError::new(
                                span,
                                ErrorCategory::Syntax,
                                "unterminated string",
                            ))
                        }
                    }
                }
                // strings only appear in include statements; stash as ident
                tokens.push((Token::Ident(format!("\"{s}\"")), span));
            }
            '(' | ')' | '[' | ']' | ',' | ';' | '+' | '*' | '{' | '}' | '=' => {
                bump!();
                tokens.push((Token::Symbol(ch), span));
            }
            other => {
                return Err(ParseError::new(
                    span,
                    ErrorCategory::Syntax,
                    format!("unexpected character {other:?}"),
                ))
            }
        }
    }
    Ok(Lexer { tokens, pos: 0, end: SourceSpan { line, column: col } })
}

impl Lexer {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> SourceSpan {
        self.tokens.get(self.pos).map(|(_, s)| *s).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_symbol(&mut self, c: char) -> Result<(), ParseError> {
        let span = self.span();
        match self.next() {
            Some(Token::Symbol(s)) if s == c => Ok(()),
            other => Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("expected {c:?}, found {other:?}"),
            )),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, SourceSpan), ParseError> {
        let span = self.span();
        match self.next() {
            Some(Token::Ident(s)) => Ok((s, span)),
            other => Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("expected identifier, found {other:?}"),
            )),
        }
    }

    fn expect_usize(&mut self) -> Result<usize, ParseError> {
        let span = self.span();
        match self.next() {
            Some(Token::Number(n)) if n >= 0.0 && n.fract() == 0.0 => Ok(n as usize),
            other => Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("expected integer, found {other:?}"),
            )),
        }
    }
}

#[derive(Clone, Copy)]
struct Register {
    offset: usize,
    size: usize,
}

struct Parser {
    lx: Lexer,
    qregs: BTreeMap<String, Register>,
    cregs: BTreeMap<String, Register>,
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<GateOp>,
}

/// Either one concrete index into the flat space, or a whole register.
enum Operand {
    Single(usize),
    Whole { offset: usize, size: usize },
}

impl Parser {
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            match self.lx.peek() {
                Some(Token::Symbol('+')) => {
                    self.lx.next();
                    v += self.term()?;
                }
                Some(Token::Symbol('-')) => {
                    self.lx.next();
                    v -= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.factor()?;
        loop {
            match self.lx.peek() {
                Some(Token::Symbol('*')) => {
                    self.lx.next();
                    v *= self.factor()?;
                }
                Some(Token::Symbol('/')) => {
                    self.lx.next();
                    let span = self.lx.span();
                    let d = self.factor()?;
                    if d == 0.0 {
                        return Err(ParseError::new(
                            span,
                            ErrorCategory::Syntax,
                            "division by zero in angle expression",
                        ));
                    }
                    v /= d;
                }
                _ => return Ok(v),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let span = self.lx.span();
        match self.lx.next() {
            Some(Token::Symbol('-')) => Ok(-self.factor()?),
            Some(Token::Symbol('(')) => {
                let v = self.expr()?;
                self.lx.expect_symbol(')')?;
                Ok(v)
            }
            Some(Token::Number(n)) => Ok(n),
            Some(Token::Ident(s)) if s == "pi" => Ok(PI),
            other => Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("expected angle expression, found {other:?}"),
            )),
        }
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, ParseError> {
        let (name, span) = self.lx.expect_ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let reg = *regs.get(&name).ok_or_else(|| {
            ParseError::new(
                span,
                ErrorCategory::UndeclaredRegister,
                format!("register {name:?} is not declared"),
            )
        })?;
        if self.lx.peek() == Some(&Token::Symbol('[')) {
            self.lx.next();
            let idx_span = self.lx.span();
            let idx = self.lx.expect_usize()?;
            self.lx.expect_symbol(']')?;
            if idx >= reg.size {
                return Err(ParseError::new(
                    idx_span,
                    ErrorCategory::IndexOutOfRange,
                    format!("index {idx} out of range for {name}[{}]", reg.size),
                ));
            }
            Ok(Operand::Single(reg.offset + idx))
        } else {
            Ok(Operand::Whole { offset: reg.offset, size: reg.size })
        }
    }

    fn gate_statement(&mut self, name: String, span: SourceSpan) -> Result<(), ParseError> {
        let (n_params, n_qubits) = builtin(&name).ok_or_else(|| {
            ParseError::new(
                span,
                ErrorCategory::UnknownGate,
                format!("unknown gate {name:?}"),
            )
        })?;
        let mut params = Vec::new();
        if self.lx.peek() == Some(&Token::Symbol('(')) {
            self.lx.next();
            if self.lx.peek() != Some(&Token::Symbol(')')) {
                loop {
                    params.push(self.expr()?);
                    if self.lx.peek() == Some(&Token::Symbol(',')) {
                        self.lx.next();
                    } else {
                        break;
                    }
                }
            }
            self.lx.expect_symbol(')')?;
        }
        if params.len() != n_params {
            return Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("{name} takes {n_params} parameter(s), got {}", params.len()),
            ));
        }
        let mut operands = Vec::new();
        loop {
            operands.push(self.operand(true)?);
            if self.lx.peek() == Some(&Token::Symbol(',')) {
                self.lx.next();
            } else {
                break;
            }
        }
        self.lx.expect_symbol(';')?;
        if operands.len() != n_qubits {
            return Err(ParseError::new(
                span,
                ErrorCategory::Syntax,
                format!("{name} takes {n_qubits} qubit(s), got {}", operands.len()),
            ));
        }
        // broadcast a single whole-register operand of a 1-qubit gate
        let expansions: Vec<Vec<usize>> = match (&operands[..], n_qubits) {
            ([Operand::Whole { offset, size }], 1) => {
                (0..*size).map(|i| vec![offset + i]).collect()
            }
            _ => {
                let mut flat = Vec::with_capacity(operands.len());
                for op in &operands {
                    match op {
                        Operand::Single(i) => flat.push(*i),
                        Operand::Whole { .. } => {
                            return Err(ParseError::new(
                                span,
                                ErrorCategory::Unsupported,
                                "whole-register operands are only supported for single-qubit gates",
                            ))
                        }
                    }
                }
                vec![flat]
            }
        };
        for qubits in expansions {
            let op = self.make_gate(&name, &params, &qubits);
            op.validate(self.num_qubits, self.num_clbits)
                .map_err(|e| ParseError::new(span, ErrorCategory::Syntax, e.to_string()))?;
            self.gates.push(op);
        }
        Ok(())
    }

    fn make_gate(&self, name: &str, params: &[f64], qubits: &[usize]) -> GateOp {
        match name {
            "rx" => GateOp::rx(params[0], qubits[0]),
            "ry" => GateOp::ry(params[0], qubits[0]),
            "r" => GateOp::r(params[0], params[1], qubits[0]),
            "rxx" => GateOp::rxx(params[0], qubits[0], qubits[1]),
            _ => GateOp::named(name, params, qubits),
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (word, span) = self.lx.expect_ident()?;
        match word.as_str() {
            "OPENQASM" => {
                let vspan = self.lx.span();
                match self.lx.next() {
                    Some(Token::Number(v)) if v == 2.0 => {}
                    other => {
                        return Err(ParseError::new(
                            vspan,
                            ErrorCategory::Unsupported,
                            format!("only OPENQASM 2.0 is supported, found {other:?}"),
                        ))
                    }
                }
                self.lx.expect_symbol(';')
            }
            "include" => {
                let (file, fspan) = self.lx.expect_ident()?;
                if file != "\"qelib1.inc\"" {
                    return Err(ParseError::new(
                        fspan,
                        ErrorCategory::Unsupported,
                        format!("only qelib1.inc can be included, found {file}"),
                    ));
                }
                self.lx.expect_symbol(';')
            }
            "qreg" | "creg" => {
                let (name, nspan) = self.lx.expect_ident()?;
                self.lx.expect_symbol('[')?;
                let size = self.lx.expect_usize()?;
                self.lx.expect_symbol(']')?;
                self.lx.expect_symbol(';')?;
                if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
                    return Err(ParseError::new(
                        nspan,
                        ErrorCategory::Syntax,
                        format!("register {name:?} already declared"),
                    ));
                }
                if word == "qreg" {
                    self.qregs.insert(name, Register { offset: self.num_qubits, size });
                    self.num_qubits += size;
                } else {
                    self.cregs.insert(name, Register { offset: self.num_clbits, size });
                    self.num_clbits += size;
                }
                Ok(())
            }
            "measure" => {
                let q = self.operand(true)?;
                let aspan = self.lx.span();
                match self.lx.next() {
                    Some(Token::Arrow) => {}
                    other => {
                        return Err(ParseError::new(
                            aspan,
                            ErrorCategory::Syntax,
                            format!("expected '->', found {other:?}"),
                        ))
                    }
                }
                let c = self.operand(false)?;
                self.lx.expect_symbol(';')?;
                let pairs: Vec<(usize, usize)> = match (q, c) {
                    (Operand::Single(qi), Operand::Single(ci)) => vec![(qi, ci)],
                    (
                        Operand::Whole { offset: qo, size: qs },
                        Operand::Whole { offset: co, size: cs },
                    ) if qs == cs => (0..qs).map(|i| (qo + i, co + i)).collect(),
                    _ => {
                        return Err(ParseError::new(
                            span,
                            ErrorCategory::Syntax,
                            "measure operands must both be indexed or equal-sized registers",
                        ))
                    }
                };
                for (qi, ci) in pairs {
                    let op = GateOp::measure(qi, ci);
                    op.validate(self.num_qubits, self.num_clbits)
                        .map_err(|e| ParseError::new(span, ErrorCategory::Syntax, e.to_string()))?;
                    self.gates.push(op);
                }
                Ok(())
            }
            "barrier" => {
                let mut qubits = Vec::new();
                if self.lx.peek() != Some(&Token::Symbol(';')) {
                    loop {
                        match self.operand(true)? {
                            Operand::Single(i) => qubits.push(i),
                            Operand::Whole { offset, size } => qubits.extend(offset..offset + size),
                        }
                        if self.lx.peek() == Some(&Token::Symbol(',')) {
                            self.lx.next();
                        } else {
                            break;
                        }
                    }
                } else {
                    qubits.extend(0..self.num_qubits);
                }
                self.lx.expect_symbol(';')?;
                let op = GateOp::barrier(&qubits);
                op.validate(self.num_qubits, self.num_clbits)
                    .map_err(|e| ParseError::new(span, ErrorCategory::Syntax, e.to_string()))?;
                self.gates.push(op);
                Ok(())
            }
            "gate" | "opaque" | "if" | "reset" => Err(ParseError::new(
                span,
                ErrorCategory::Unsupported,
                format!("{word} statements are not supported"),
            )),
            _ => self.gate_statement(word, span),
        }
    }
}

/// Parses OpenQASM 2.0 source into a [`Circuit`].
pub fn parse_qasm(source: &str) -> Result<Circuit, ParseError> {
    let lx = lex(source)?;
    let mut p = Parser {
        lx,
        qregs: BTreeMap::new(),
        cregs: BTreeMap::new(),
        num_qubits: 0,
        num_clbits: 0,
        gates: Vec::new(),
    };
    if p.lx.peek().is_none() {
        return Err(ParseError::new(
            SourceSpan { line: 1, column: 1 },
            ErrorCategory::Syntax,
            "empty source",
        ));
    }
    while p.lx.peek().is_some() {
        p.statement()?;
    }
    Ok(Circuit { num_qubits: p.num_qubits, num_clbits: p.num_clbits, gates: p.gates })
}

/// Pretty-prints a circuit back to OpenQASM 2.0 over single flattened
/// registers `q` and `c`. Re-parsing the output yields a structurally
/// identical circuit.
pub fn to_qasm(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if c.num_qubits > 0 {
        let _ = writeln!(out, "qreg q[{}];", c.num_qubits);
    }
    if c.num_clbits > 0 {
        let _ = writeln!(out, "creg c[{}];", c.num_clbits);
    }
    for g in &c.gates {
        let operands =
            |qs: &[QubitId]| qs.iter().map(|q| format!("q[{}]", q.0)).collect::<Vec<_>>().join(",");
        match &g.kind {
            GateKind::Rx(t) => {
                let _ = writeln!(out, "rx({t}) {};", operands(&g.qubits));
            }
            GateKind::Ry(t) => {
                let _ = writeln!(out, "ry({t}) {};", operands(&g.qubits));
            }
            GateKind::R { phi, theta } => {
                let _ = writeln!(out, "r({phi},{theta}) {};", operands(&g.qubits));
            }
            GateKind::Rxx(t) => {
                let _ = writeln!(out, "rxx({t}) {};", operands(&g.qubits));
            }
            GateKind::Named { name, params } => {
                if params.is_empty() {
                    let _ = writeln!(out, "{name} {};", operands(&g.qubits));
                } else {
                    let ps = params.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
                    let _ = writeln!(out, "{name}({ps}) {};", operands(&g.qubits));
                }
            }
            GateKind::Measure { cbit } => {
                let _ = writeln!(out, "measure q[{}] -> c[{}];", g.qubits[0].0, cbit);
            }
            GateKind::Barrier => {
                let _ = writeln!(out, "barrier {};", operands(&g.qubits));
            }
        }
    }
    out
}
