use super::{ErrorKind, ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    /// Decimal literal, kept as text so it can be read exactly.
    Float(String),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// A `//` line comment, text without the slashes.
#[derive(Debug, Clone)]
pub(crate) struct Comment {
    pub text: String,
    pub span: SourceSpan,
}

const SYMBOLS: [&str; 27] = [
    "->", "==", "!=", "<=", ">=", "**", "&&", "||", ";", ",", "[", "]", "(", ")", "{", "}", "=", "+", "-",
    "*", "/", "^", "@", "!", "<", ">", ":",
];

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.text[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.pos, self.line, self.column)
    }

    fn span_from(&self, mark: (usize, usize, usize)) -> SourceSpan {
        SourceSpan { line: mark.1, column: mark.2, start: mark.0, end: self.pos }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(text: &str) -> Result<(Vec<Token>, Vec<Comment>), ParseError> {
    let mut cur = Cursor { text, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    let mut comments = Vec::new();

    while let Some(c) = cur.peek() {
        let mark = cur.mark();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            cur.bump();
            cur.bump();
            let body_start = cur.pos;
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            comments.push(Comment { text: text[body_start..cur.pos].to_string(), span: cur.span_from(mark) });
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('*') {
            cur.bump();
            cur.bump();
            loop {
                match cur.bump() {
                    None => {
                        return Err(ParseError::new(ErrorKind::Lex, cur.span_from(mark), "unterminated block comment"))
                    }
                    Some('*') if cur.peek() == Some('/') => {
                        cur.bump();
                        break;
                    }
                    Some(_) => {}
                }
            }
            continue;
        }
        if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            tokens.push(Token { tok: Tok::Ident(text[mark.0..cur.pos].to_string()), span: cur.span_from(mark) });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            let mut is_float = false;
            while cur.peek().is_some_and(|c| c.is_ascii_digit() || c == '_') {
                cur.bump();
            }
            if cur.peek() == Some('.') {
                is_float = true;
                cur.bump();
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
            }
            if matches!(cur.peek(), Some('e' | 'E')) {
                let sign = matches!(cur.peek_at(1), Some('+' | '-'));
                let digit_at = if sign { 2 } else { 1 };
                if cur.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                    is_float = true;
                    for _ in 0..digit_at {
                        cur.bump();
                    }
                    while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                        cur.bump();
                    }
                }
            }
            let span = cur.span_from(mark);
            let literal = text[mark.0..cur.pos].replace('_', "");
            let tok = if is_float {
                Tok::Float(literal)
            } else {
                match literal.parse::<u64>() {
                    Ok(v) => Tok::Int(v),
                    Err(_) => Tok::Float(literal),
                }
            };
            tokens.push(Token { tok, span });
            continue;
        }
        if c == '"' || c == '\'' {
            cur.bump();
            let body_start = cur.pos;
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(ParseError::new(ErrorKind::Lex, cur.span_from(mark), "unterminated string literal"))
                    }
                    Some(q) if q == c => break,
                    Some(_) => {}
                }
            }
            let body = text[body_start..cur.pos - 1].to_string();
            tokens.push(Token { tok: Tok::Str(body), span: cur.span_from(mark) });
            continue;
        }
        let rest = &text[cur.pos..];
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    cur.bump();
                }
                tokens.push(Token { tok: Tok::Sym(sym), span: cur.span_from(mark) });
            }
            None => {
                cur.bump();
                return Err(ParseError::new(
                    ErrorKind::Lex,
                    cur.span_from(mark),
                    format!("unexpected character `{c}`"),
                ));
            }
        }
    }
    let end = cur.mark();
    tokens.push(Token { tok: Tok::Eof, span: cur.span_from(end) });
    Ok((tokens, comments))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<Tok> {
        tokenize(text).unwrap().0.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn basic_statement() {
        assert_eq!(
            kinds("c[0] = measure q[1];"),
            vec![
                Tok::Ident("c".into()),
                Tok::Sym("["),
                Tok::Int(0),
                Tok::Sym("]"),
                Tok::Sym("="),
                Tok::Ident("measure".into()),
                Tok::Ident("q".into()),
                Tok::Sym("["),
                Tok::Int(1),
                Tok::Sym("]"),
                Tok::Sym(";"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn numbers_and_arrows() {
        assert_eq!(
            kinds("1.5e-3 .25 7 -> =="),
            vec![
                Tok::Float("1.5e-3".into()),
                Tok::Float(".25".into()),
                Tok::Int(7),
                Tok::Sym("->"),
                Tok::Sym("=="),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_are_collected() {
        let (tokens, comments) = tokenize("// name: demo\nx q; /* skip\n me */ h q;").unwrap();
        assert_eq!(comments.len(), 1);
        assert_eq!(comments[0].text, " name: demo");
        assert_eq!(tokens.len(), 7);
        assert_eq!(tokens[3].span.line, 3);
    }

    #[test]
    fn spans_track_lines_and_columns() {
        let (tokens, _) = tokenize("h q;\n  x q;").unwrap();
        let x = &tokens[3];
        assert_eq!((x.span.line, x.span.column, x.span.start, x.span.end), (2, 3, 7, 8));
    }

    #[test]
    fn lex_errors() {
        let e = tokenize("x q; #").unwrap_err();
        assert_eq!(e.kind, ErrorKind::Lex);
        assert_eq!((e.span.line, e.span.column), (1, 6));
        assert_eq!(tokenize("/* open").unwrap_err().kind, ErrorKind::Lex);
        assert_eq!(tokenize("include \"abc").unwrap_err().kind, ErrorKind::Lex);
    }
}
