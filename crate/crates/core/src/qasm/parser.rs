use crate::angle::Angle;
use crate::circuit::{Circuit, Clbit, Condition, Control, GateKind, Operation, Polarity, Qubit, UnitaryOp};

use super::expr::{describe, ExprParser};
use super::lexer::{tokenize, Comment, Tok, Token};
use super::{ErrorKind, ParseError, SourceSpan};

type PResult<T> = Result<T, ParseError>;

const UNSUPPORTED_KEYWORDS: [&str; 30] = [
    "gate", "def", "opaque", "for", "while", "let", "const", "int", "uint", "float", "angle", "bool",
    "complex", "input", "output", "return", "box", "switch", "extern", "delay", "duration", "stretch",
    "array", "break", "continue", "end", "pragma", "defcal", "cal", "else",
];

struct Register {
    name: String,
    offset: usize,
    size: usize,
    quantum: bool,
}

struct Arg {
    indices: Vec<usize>,
    span: SourceSpan,
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    registers: Vec<Register>,
    num_qubits: usize,
    num_clbits: usize,
    ops: Vec<Operation>,
    op_spans: Vec<SourceSpan>,
    errors: Vec<ParseError>,
}

fn merge(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan { line: a.line, column: a.column, start: a.start, end: b.end.max(a.end) }
}

/// Parses QASM text into a validated circuit. Registers are flattened to
/// global indices in declaration order.
pub fn parse(text: &str) -> Result<Circuit, Vec<ParseError>> {
    let (tokens, comments) = tokenize(text).map_err(|e| vec![e])?;
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        registers: Vec::new(),
        num_qubits: 0,
        num_clbits: 0,
        ops: Vec::new(),
        op_spans: Vec::new(),
        errors: Vec::new(),
    };
    p.program();
    let (name, output_order, meta_span) = match metadata(&comments) {
        Ok(meta) => meta,
        Err(e) => {
            p.errors.push(e);
            (None, None, None)
        }
    };
    if !p.errors.is_empty() {
        return Err(p.errors);
    }

    let circuit = Circuit {
        name: name.unwrap_or_else(|| p.layout()),
        num_qubits: p.num_qubits,
        num_clbits: p.num_clbits,
        ops: p.ops,
        output_order,
    };
    let fallback = meta_span.unwrap_or(SourceSpan { line: 1, column: 1, start: 0, end: 0 });
    let errors: Vec<ParseError> = circuit
        .validate()
        .into_iter()
        .map(|e| {
            let span = e.op.map_or(fallback, |i| p.op_spans[i]);
            ParseError::new(ErrorKind::Semantic, span, e.kind.to_string())
        })
        .collect();
    if errors.is_empty() {
        Ok(circuit)
    } else {
        Err(errors)
    }
}

type Metadata = (Option<String>, Option<Vec<Clbit>>, Option<SourceSpan>);

fn metadata(comments: &[Comment]) -> PResult<Metadata> {
    let mut name = None;
    let mut order = None;
    let mut span = None;
    for c in comments {
        let text = c.text.trim();
        if let Some(rest) = text.strip_prefix("name:") {
            name.get_or_insert_with(|| rest.trim().to_string());
        } else if let Some(rest) = text.strip_prefix("output_order:") {
            let parsed: Result<Vec<Clbit>, _> = rest.split_whitespace().map(|t| t.parse().map(Clbit)).collect();
            match parsed {
                Ok(v) => {
                    order = Some(v);
                    span = Some(c.span);
                }
                Err(_) => {
                    return Err(ParseError::new(
                        ErrorKind::Syntax,
                        c.span,
                        "output_order expects whitespace-separated clbit indices",
                    ))
                }
            }
        }
    }
    Ok((name, order, span))
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &'a Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &'a Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.tokens[self.pos];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, sym: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(s) if s == sym)
    }

    fn eat(&mut self, sym: &str) -> bool {
        if self.is_sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> PResult<SourceSpan> {
        if self.is_sym(sym) {
            Ok(self.bump().span)
        } else {
            let t = self.peek();
            Err(ParseError::new(ErrorKind::Syntax, t.span, format!("expected `{sym}`, found {}", describe(&t.tok))))
        }
    }

    fn ident(&mut self) -> PResult<(&'a str, SourceSpan)> {
        let t = self.peek();
        match &t.tok {
            Tok::Ident(s) => {
                self.bump();
                Ok((s.as_str(), t.span))
            }
            other => Err(ParseError::new(ErrorKind::Syntax, t.span, format!("expected identifier, found {}", describe(other)))),
        }
    }

    fn int(&mut self) -> PResult<(u64, SourceSpan)> {
        let t = self.peek();
        match t.tok {
            Tok::Int(v) => {
                self.bump();
                Ok((v, t.span))
            }
            ref other => Err(ParseError::new(ErrorKind::Syntax, t.span, format!("expected integer, found {}", describe(other)))),
        }
    }

    fn expression(&mut self) -> PResult<Angle> {
        let mut e = ExprParser { tokens: self.tokens, pos: self.pos };
        let result = e.expression();
        self.pos = e.pos;
        result.map(|v| v.to_angle())
    }

    /// Skips to the end of the current statement.
    fn recover(&mut self, in_block: bool) {
        let mut depth = 0usize;
        loop {
            match self.peek().tok {
                Tok::Eof => return,
                Tok::Sym(";") if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::Sym("{") => depth += 1,
                Tok::Sym("}") if depth == 0 && in_block => return,
                Tok::Sym("}") => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        self.bump();
                        return;
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn program(&mut self) {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            let header = (|| -> PResult<()> {
                self.bump();
                match self.peek().tok {
                    Tok::Int(_) | Tok::Float(_) => {
                        self.bump();
                    }
                    ref other => {
                        return Err(ParseError::new(
                            ErrorKind::Syntax,
                            self.peek().span,
                            format!("expected version number, found {}", describe(other)),
                        ))
                    }
                }
                self.expect(";")?;
                Ok(())
            })();
            if let Err(e) = header {
                self.errors.push(e);
                self.recover(false);
            }
        }
        while self.peek().tok != Tok::Eof {
            if let Err(e) = self.statement() {
                self.errors.push(e);
                self.recover(false);
            }
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let t = self.peek();
        let word = match &t.tok {
            Tok::Ident(s) => s.as_str(),
            Tok::Sym(";") => {
                self.bump();
                return Ok(());
            }
            other => {
                return Err(ParseError::new(ErrorKind::Syntax, t.span, format!("expected statement, found {}", describe(other))))
            }
        };
        match word {
            "OPENQASM" => Err(ParseError::new(ErrorKind::Syntax, t.span, "version header must come first")),
            "include" => {
                self.bump();
                match self.peek().tok {
                    Tok::Str(_) => {
                        self.bump();
                    }
                    ref other => {
                        return Err(ParseError::new(
                            ErrorKind::Syntax,
                            self.peek().span,
                            format!("expected file name, found {}", describe(other)),
                        ))
                    }
                }
                self.expect(";")?;
                Ok(())
            }
            "qreg" | "creg" => {
                self.bump();
                let (name, span) = self.ident()?;
                self.expect("[")?;
                let (size, size_span) = self.int()?;
                self.expect("]")?;
                self.expect(";")?;
                self.declare(name, size, word == "qreg", merge(span, size_span))
            }
            "qubit" | "bit" => {
                self.bump();
                let (size, size_span) = if self.eat("[") {
                    let s = self.int()?;
                    self.expect("]")?;
                    s
                } else {
                    (1, t.span)
                };
                let (name, span) = self.ident()?;
                if self.is_sym("=") {
                    return Err(ParseError::new(ErrorKind::Unsupported, self.peek().span, "declaration initializers"));
                }
                self.expect(";")?;
                self.declare(name, size, word == "qubit", merge(size_span, span))
            }
            "barrier" => {
                self.bump();
                if !self.is_sym(";") {
                    self.args(true)?;
                }
                self.expect(";")?;
                Ok(())
            }
            "measure" => {
                self.bump();
                let q = self.arg(true)?;
                if !self.is_sym("->") {
                    return Err(ParseError::new(
                        ErrorKind::Unsupported,
                        self.peek().span,
                        "measurement without a classical target",
                    ));
                }
                self.bump();
                let c = self.arg(false)?;
                let end = self.expect(";")?;
                self.push_measures(q, c, merge(t.span, end))
            }
            "reset" => {
                self.bump();
                let args = self.args(true)?;
                let end = self.expect(";")?;
                let span = merge(t.span, end);
                for a in args {
                    for q in a.indices {
                        self.push_op(Operation::Reset { qubit: Qubit(q) }, span);
                    }
                }
                Ok(())
            }
            "if" => self.conditional(),
            w if UNSUPPORTED_KEYWORDS.contains(&w) => {
                Err(ParseError::new(ErrorKind::Unsupported, t.span, format!("`{w}` statements are not supported")))
            }
            w if self.find_register(w).is_some_and(|r| !r.quantum) => {
                let c = self.arg(false)?;
                self.expect("=")?;
                match &self.peek().tok {
                    Tok::Ident(m) if m == "measure" => {
                        self.bump();
                    }
                    _ => {
                        return Err(ParseError::new(
                            ErrorKind::Unsupported,
                            self.peek().span,
                            "classical assignments other than `= measure`",
                        ))
                    }
                }
                let q = self.arg(true)?;
                let end = self.expect(";")?;
                self.push_measures(q, c, merge(t.span, end))
            }
            _ => {
                let (ops, span) = self.gate_application()?;
                for op in ops {
                    self.push_op(Operation::Unitary(op), span);
                }
                Ok(())
            }
        }
    }

    fn declare(&mut self, name: &str, size: u64, quantum: bool, span: SourceSpan) -> PResult<()> {
        if self.find_register(name).is_some() {
            return Err(ParseError::new(ErrorKind::Semantic, span, format!("register `{name}` declared twice")));
        }
        if size == 0 {
            return Err(ParseError::new(ErrorKind::Semantic, span, format!("register `{name}` has size 0")));
        }
        let size = size as usize;
        let counter = if quantum { &mut self.num_qubits } else { &mut self.num_clbits };
        self.registers.push(Register { name: name.to_string(), offset: *counter, size, quantum });
        *counter += size;
        Ok(())
    }

    fn find_register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    fn layout(&self) -> String {
        let describe = |quantum: bool| {
            self.registers
                .iter()
                .filter(|r| r.quantum == quantum)
                .map(|r| format!("{}[{}]@{}", r.name, r.size, r.offset))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!("{}; {}", describe(true), describe(false)).trim_matches([' ', ';']).to_string()
    }

    fn push_op(&mut self, op: Operation, span: SourceSpan) {
        self.ops.push(op);
        self.op_spans.push(span);
    }

    fn push_measures(&mut self, q: Arg, c: Arg, span: SourceSpan) -> PResult<()> {
        if q.indices.len() != c.indices.len() {
            return Err(ParseError::new(
                ErrorKind::Semantic,
                span,
                format!("measuring {} qubit(s) into {} bit(s)", q.indices.len(), c.indices.len()),
            ));
        }
        for (&qubit, &clbit) in q.indices.iter().zip(&c.indices) {
            self.push_op(Operation::Measure { qubit: Qubit(qubit), clbit: Clbit(clbit) }, span);
        }
        Ok(())
    }

    /// `name` or `name[index]`, resolved to global indices.
    fn arg(&mut self, quantum: bool) -> PResult<Arg> {
        let (name, span) = self.ident()?;
        let (offset, size) = match self.find_register(name) {
            Some(r) if r.quantum == quantum => (r.offset, r.size),
            Some(_) => {
                let what = if quantum { "a classical register" } else { "a quantum register" };
                return Err(ParseError::new(ErrorKind::Semantic, span, format!("`{name}` is {what}")));
            }
            None => return Err(ParseError::new(ErrorKind::Semantic, span, format!("undeclared register `{name}`"))),
        };
        if self.eat("[") {
            let (index, index_span) = self.int()?;
            let end = self.expect("]")?;
            if index as usize >= size {
                return Err(ParseError::new(
                    ErrorKind::Semantic,
                    index_span,
                    format!("index {index} out of range for `{name}` of size {size}"),
                ));
            }
            Ok(Arg { indices: vec![offset + index as usize], span: merge(span, end) })
        } else {
            Ok(Arg { indices: (offset..offset + size).collect(), span })
        }
    }

    fn args(&mut self, quantum: bool) -> PResult<Vec<Arg>> {
        let mut out = vec![self.arg(quantum)?];
        while self.eat(",") {
            out.push(self.arg(quantum)?);
        }
        Ok(out)
    }

    fn gate_application(&mut self) -> PResult<(Vec<UnitaryOp>, SourceSpan)> {
        let start = self.peek().span;
        let mut modifier_controls: Vec<Polarity> = Vec::new();
        let mut invert = false;
        loop {
            let t = self.peek();
            let Tok::Ident(word) = &t.tok else { break };
            let next_is_modifier = matches!(self.peek_at(1).tok, Tok::Sym("@") | Tok::Sym("("));
            match word.as_str() {
                "ctrl" | "negctrl" if next_is_modifier => {
                    self.bump();
                    let count = if self.eat("(") {
                        let (n, n_span) = self.int()?;
                        self.expect(")")?;
                        if n == 0 {
                            return Err(ParseError::new(ErrorKind::Semantic, n_span, "control count must be positive"));
                        }
                        n as usize
                    } else {
                        1
                    };
                    self.expect("@")?;
                    let polarity = if word == "ctrl" { Polarity::Positive } else { Polarity::Negative };
                    modifier_controls.extend(std::iter::repeat_n(polarity, count));
                }
                "inv" if matches!(self.peek_at(1).tok, Tok::Sym("@")) => {
                    self.bump();
                    self.bump();
                    invert = !invert;
                }
                "pow" if next_is_modifier => {
                    return Err(ParseError::new(ErrorKind::Unsupported, t.span, "`pow` modifier"));
                }
                _ => break,
            }
        }

        let (name, name_span) = self.ident()?;
        let Some(spec) = gate_spec(name) else {
            return Err(ParseError::new(ErrorKind::Semantic, name_span, format!("unknown gate `{name}`")));
        };
        let mut params = Vec::new();
        if self.eat("(") {
            if !self.is_sym(")") {
                params.push(self.expression()?);
                while self.eat(",") {
                    params.push(self.expression()?);
                }
            }
            self.expect(")")?;
        }
        let args = self.args(true)?;
        let end = self.expect(";")?;
        let span = merge(start, end);

        if !spec.params.contains(&params.len()) {
            let expected = if spec.params.start() == spec.params.end() {
                spec.params.start().to_string()
            } else {
                format!("{} to {}", spec.params.start(), spec.params.end())
            };
            return Err(ParseError::new(
                ErrorKind::Semantic,
                name_span,
                format!("gate `{name}` expects {expected} parameter(s), got {}", params.len()),
            ));
        }
        let expected_args = modifier_controls.len() + spec.controls + spec.targets;
        if args.len() != expected_args {
            return Err(ParseError::new(
                ErrorKind::Semantic,
                span,
                format!("gate `{name}` expects {expected_args} qubit argument(s), got {}", args.len()),
            ));
        }

        let rows = broadcast(&args, span)?;
        let mut ops = Vec::new();
        for row in rows {
            let (mods, rest) = row.split_at(modifier_controls.len());
            let controls: Vec<Control> = mods
                .iter()
                .zip(&modifier_controls)
                .map(|(&q, &polarity)| Control { qubit: Qubit(q), polarity })
                .collect();
            let mut expanded = expand(name, &params, controls, rest);
            if invert {
                expanded = expanded.iter().rev().flat_map(UnitaryOp::inverse).collect();
            }
            ops.extend(expanded);
        }
        Ok((ops, span))
    }

    fn conditional(&mut self) -> PResult<()> {
        let if_span = self.bump().span;
        self.expect("(")?;
        let condition = self.condition()?;
        self.expect(")")?;
        let mut gates: Vec<(Vec<UnitaryOp>, SourceSpan)> = Vec::new();
        if self.eat("{") {
            while !self.is_sym("}") {
                if self.peek().tok == Tok::Eof {
                    return Err(ParseError::new(ErrorKind::Syntax, self.peek().span, "unclosed `{`"));
                }
                match self.conditioned_gate() {
                    Ok(g) => gates.push(g),
                    Err(e) => {
                        self.errors.push(e);
                        self.recover(true);
                    }
                }
            }
            self.bump();
        } else {
            gates.push(self.conditioned_gate()?);
        }
        for (ops, span) in gates {
            for op in ops {
                self.push_op(Operation::ClassicControlled { op, condition }, merge(if_span, span));
            }
        }
        Ok(())
    }

    fn conditioned_gate(&mut self) -> PResult<(Vec<UnitaryOp>, SourceSpan)> {
        let t = self.peek();
        if let Tok::Ident(w) = &t.tok {
            let is_register = self.find_register(w).is_some();
            if matches!(w.as_str(), "measure" | "reset" | "if" | "barrier") || is_register {
                return Err(ParseError::new(
                    ErrorKind::Unsupported,
                    t.span,
                    "only gate applications may be classically conditioned",
                ));
            }
        }
        self.gate_application()
    }

    fn condition(&mut self) -> PResult<Condition> {
        let negated = self.eat("!");
        let (name, span) = self.ident()?;
        let register = match self.find_register(name) {
            Some(r) if !r.quantum => r,
            Some(_) => return Err(ParseError::new(ErrorKind::Semantic, span, format!("`{name}` is a quantum register"))),
            None => return Err(ParseError::new(ErrorKind::Semantic, span, format!("undeclared register `{name}`"))),
        };
        let (offset, size) = (register.offset, register.size);
        let clbit = if self.eat("[") {
            let (index, index_span) = self.int()?;
            self.expect("]")?;
            if index as usize >= size {
                return Err(ParseError::new(
                    ErrorKind::Semantic,
                    index_span,
                    format!("index {index} out of range for `{name}` of size {size}"),
                ));
            }
            offset + index as usize
        } else if size == 1 {
            offset
        } else {
            return Err(ParseError::new(
                ErrorKind::Unsupported,
                span,
                format!("multi-bit condition on `{name}` (width {size}); only single-bit conditions are supported"),
            ));
        };

        let value = if self.is_sym(")") {
            true
        } else if negated {
            return Err(ParseError::new(ErrorKind::Unsupported, self.peek().span, "compound conditions"));
        } else {
            let equal = if self.eat("==") {
                true
            } else if self.eat("!=") {
                false
            } else {
                return Err(ParseError::new(
                    ErrorKind::Unsupported,
                    self.peek().span,
                    format!("condition operator {}", describe(&self.peek().tok)),
                ));
            };
            let t = self.bump();
            let v = match &t.tok {
                Tok::Int(0) => false,
                Tok::Int(1) => true,
                Tok::Ident(b) if b == "false" => false,
                Tok::Ident(b) if b == "true" => true,
                Tok::Int(_) => {
                    return Err(ParseError::new(ErrorKind::Semantic, t.span, "a single bit can only equal 0 or 1"))
                }
                other => {
                    return Err(ParseError::new(
                        ErrorKind::Unsupported,
                        t.span,
                        format!("condition value {}", describe(other)),
                    ))
                }
            };
            v == equal
        };
        if !self.is_sym(")") {
            return Err(ParseError::new(ErrorKind::Unsupported, self.peek().span, "compound conditions"));
        }
        Ok(Condition { clbit: Clbit(clbit), value: value != negated })
    }
}

fn broadcast(args: &[Arg], span: SourceSpan) -> PResult<Vec<Vec<usize>>> {
    let mut width = 1;
    for a in args {
        if a.indices.len() != 1 {
            if width != 1 && width != a.indices.len() {
                return Err(ParseError::new(ErrorKind::Semantic, a.span, "register arguments differ in size"));
            }
            width = a.indices.len();
        }
    }
    let _ = span;
    Ok((0..width)
        .map(|k| args.iter().map(|a| if a.indices.len() == 1 { a.indices[0] } else { a.indices[k] }).collect())
        .collect())
}

struct GateSpec {
    params: std::ops::RangeInclusive<usize>,
    controls: usize,
    targets: usize,
}

fn gate_spec(name: &str) -> Option<GateSpec> {
    let spec = |params: std::ops::RangeInclusive<usize>, controls, targets| GateSpec { params, controls, targets };
    Some(match name {
        "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "sx" | "sxdg" => spec(0..=0, 0, 1),
        "p" | "phase" | "u1" | "rx" | "ry" | "rz" => spec(1..=1, 0, 1),
        "u2" => spec(2..=2, 0, 1),
        "u" | "u3" | "U" => spec(3..=3, 0, 1),
        "swap" => spec(0..=0, 0, 2),
        "cx" | "CX" | "cnot" | "cy" | "cz" | "ch" => spec(0..=0, 1, 1),
        "cp" | "cphase" | "cu1" | "crx" | "cry" | "crz" => spec(1..=1, 1, 1),
        "cu" => spec(3..=4, 1, 1),
        "cu3" => spec(3..=3, 1, 1),
        "cswap" => spec(0..=0, 1, 2),
        "ccx" | "toffoli" => spec(0..=0, 2, 1),
        _ => return None,
    })
}

/// Builds the operations for one broadcast row. `rest` holds the implicit
/// controls followed by the targets.
fn expand(name: &str, params: &[Angle], mut controls: Vec<Control>, rest: &[usize]) -> Vec<UnitaryOp> {
    let spec = gate_spec(name).expect("known gate");
    let (implicit, targets) = rest.split_at(spec.controls);
    let modifier_controls = controls.clone();
    controls.extend(implicit.iter().map(|&q| Control::pos(q)));
    let op = |gate: GateKind| UnitaryOp { gate, targets: targets.iter().map(|&q| Qubit(q)).collect(), controls: controls.clone() };
    let a = |k: usize| params[k];
    match name {
        "id" => Vec::new(),
        "x" | "cx" | "CX" | "cnot" | "ccx" | "toffoli" => vec![op(GateKind::X)],
        "y" | "cy" => vec![op(GateKind::Y)],
        "z" | "cz" => vec![op(GateKind::Z)],
        "h" | "ch" => vec![op(GateKind::H)],
        "s" => vec![op(GateKind::S)],
        "sdg" => vec![op(GateKind::Sdg)],
        "t" => vec![op(GateKind::T)],
        "tdg" => vec![op(GateKind::Tdg)],
        "sx" => vec![op(GateKind::SX)],
        "sxdg" => vec![op(GateKind::H), op(GateKind::Sdg), op(GateKind::H)],
        "p" | "phase" | "u1" | "cp" | "cphase" | "cu1" => vec![op(GateKind::P(a(0)))],
        "rx" | "crx" => vec![op(GateKind::RX(a(0)))],
        "ry" | "cry" => vec![op(GateKind::RY(a(0)))],
        "rz" | "crz" => vec![op(GateKind::RZ(a(0)))],
        "u2" => vec![op(GateKind::U(Angle::pi_frac(1, 2), a(0), a(1)))],
        "u" | "u3" | "U" | "cu3" => vec![op(GateKind::U(a(0), a(1), a(2)))],
        "cu" => {
            let mut ops = vec![op(GateKind::U(a(0), a(1), a(2)))];
            if let Some(&gamma) = params.get(3) {
                if gamma != Angle::ZERO {
                    ops.push(UnitaryOp {
                        gate: GateKind::P(gamma),
                        targets: vec![Qubit(implicit[0])],
                        controls: modifier_controls,
                    });
                }
            }
            ops
        }
        "swap" | "cswap" => vec![op(GateKind::Swap)],
        _ => unreachable!("gate_spec and expand disagree on `{name}`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errs(text: &str) -> Vec<ParseError> {
        parse(text).unwrap_err()
    }

    #[test]
    fn openqasm2_program() {
        let g = parse(
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\ncreg c[2];\nh q[0];\ncx q[0],q[1];\nbarrier q;\nmeasure q -> c;\n",
        )
        .unwrap();
        assert_eq!((g.num_qubits, g.num_clbits), (2, 2));
        assert_eq!(g.ops.len(), 4);
        assert_eq!(g.ops[3], Operation::Measure { qubit: Qubit(1), clbit: Clbit(1) });
        assert!(!g.is_dynamic());
    }

    #[test]
    fn registers_flatten_in_declaration_order() {
        let g = parse("qreg a[2]; qreg b[3]; creg c[1]; creg d[2]; x b[1]; measure b[2] -> d[1];").unwrap();
        assert_eq!(g.ops[0], Operation::Unitary(UnitaryOp::new(GateKind::X, &[3])));
        assert_eq!(g.ops[1], Operation::Measure { qubit: Qubit(4), clbit: Clbit(2) });
        assert_eq!(g.name, "a[2]@0 b[3]@2; c[1]@0 d[2]@1");
    }

    #[test]
    fn broadcast_over_registers() {
        let g = parse("qubit[3] q; qubit r; h q; cx q, r;").unwrap();
        assert_eq!(g.ops.len(), 6);
        assert_eq!(g.ops[5], Operation::Unitary(UnitaryOp::controlled(GateKind::X, &[Control::pos(2)], &[3])));
        assert_eq!(errs("qubit[3] q; qubit[2] r; cx q, r;")[0].kind, ErrorKind::Semantic);
    }

    #[test]
    fn conditions() {
        let g = parse(
            "qubit[2] q; bit[2] c; creg f[1]; c[0] = measure q[0]; f[0] = measure q[1];\n\
             if (c[0] == 1) x q[1];\nif (c[1] != 1) z q[0];\nif (!c[0]) h q[0];\nif (c[1]) { x q[0]; y q[1]; }\nif(f==0) x q[0];",
        )
        .unwrap();
        let conds: Vec<(usize, bool)> = g
            .ops
            .iter()
            .filter_map(|op| match op {
                Operation::ClassicControlled { condition, .. } => Some((condition.clbit.0, condition.value)),
                _ => None,
            })
            .collect();
        assert_eq!(conds, vec![(0, true), (1, false), (0, false), (1, true), (1, true), (2, false)]);
    }

    #[test]
    fn modifiers() {
        let g = parse("qubit[4] q; ctrl(2) @ negctrl @ x q[0], q[1], q[2], q[3]; inv @ s q[0]; inv @ ctrl @ sx q[0], q[1];")
            .unwrap();
        assert_eq!(
            g.ops[0],
            Operation::Unitary(UnitaryOp::controlled(
                GateKind::X,
                &[Control::pos(0), Control::pos(1), Control::neg(2)],
                &[3]
            ))
        );
        assert_eq!(g.ops[1], Operation::Unitary(UnitaryOp::new(GateKind::Sdg, &[0])));
        assert_eq!(g.ops.len(), 5);
    }

    #[test]
    fn named_gates_and_parameters() {
        let g = parse("qreg q[3]; u2(0, pi) q[0]; cu1(pi/4) q[0], q[1]; ccx q[0], q[1], q[2]; cu(pi, 0, pi, pi/2) q[0], q[1];")
            .unwrap();
        assert_eq!(
            g.ops[0],
            Operation::Unitary(UnitaryOp::new(GateKind::U(Angle::pi_frac(1, 2), Angle::ZERO, Angle::pi_frac(1, 1)), &[0]))
        );
        assert_eq!(
            g.ops[1],
            Operation::Unitary(UnitaryOp::controlled(GateKind::P(Angle::pi_frac(1, 4)), &[Control::pos(0)], &[1]))
        );
        assert_eq!(g.ops.len(), 5);
        assert_eq!(g.ops[4], Operation::Unitary(UnitaryOp::new(GateKind::P(Angle::pi_frac(1, 2)), &[0])));
    }

    #[test]
    fn metadata_comments() {
        let g = parse("// name: demo\n// output_order: 1 0\nqubit q; bit[2] c; c[0] = measure q; c[1] = measure q;").unwrap();
        assert_eq!(g.name, "demo");
        assert_eq!(g.output_order, Some(vec![Clbit(1), Clbit(0)]));
        assert_eq!(errs("// output_order: 0 x\nqubit q;")[0].kind, ErrorKind::Syntax);
        let e = errs("// output_order: 0\nqubit q; bit c;");
        assert_eq!((e[0].kind, e[0].span.line), (ErrorKind::Semantic, 1));
    }

    #[test]
    fn error_kinds() {
        assert_eq!(errs("qreg q[1]; x q[1];")[0].kind, ErrorKind::Semantic);
        assert_eq!(errs("qreg q[1]; rx q[0];")[0].kind, ErrorKind::Semantic);
        assert_eq!(errs("qreg q[2]; cx q[0], q[0];")[0].kind, ErrorKind::Semantic);
        assert_eq!(errs("qreg q[1]; x c[0];")[0].kind, ErrorKind::Semantic);
        assert_eq!(errs("qreg q[1]; x q[0]")[0].kind, ErrorKind::Syntax);
        assert_eq!(errs("qreg q[1]; gate g a { x a; } g q[0];")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qreg q[1]; for i in [0:2] { x q[0]; }")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qubit q; bit c; measure q;")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qubit q; bit[2] c; if (c[0] == 1 && c[1] == 1) x q;")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qubit q; bit c; if (c == 1) reset q;")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qubit q; bit c; c = c + 1;")[0].kind, ErrorKind::Unsupported);
        assert_eq!(errs("qubit q; rx(theta) q;")[0].kind, ErrorKind::Unsupported);
    }

    #[test]
    fn recovery_reports_several_errors() {
        let e = errs("qreg q[1];\nx q[3];\nh q[0];\nfoo q[0];\nif (q == 1) x q[0];\n");
        assert_eq!(e.len(), 3);
        assert_eq!(e.iter().map(|e| e.span.line).collect::<Vec<_>>(), vec![2, 4, 5]);
    }

    #[test]
    fn spans_locate_the_offender() {
        let text = "qreg q[2];\nh q[0];\n  cx q[0], q[7];\n";
        let e = &errs(text)[0];
        assert_eq!((e.span.line, e.span.column), (3, 14));
        assert_eq!(&text[e.span.start..e.span.end], "7");
    }
}
