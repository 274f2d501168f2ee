use crate::diag::{Diagnostic, ErrorCode};
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub enum TokenKind {
    KwInt,
    KwFloat,
    KwDouble,
    KwVoid,
    KwFor,
    KwIf,
    KwElse,
    Ident(String),
    IntLit(i32),
    FloatLit(f64),
    /// Full `#pragma` line, with the `#pragma` prefix stripped.
    Pragma(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    PlusAssign,
    MinusAssign,
    StarAssign,
    SlashAssign,
    PlusPlus,
    MinusMinus,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    /// Constructs we recognize only to reject with a precise message.
    Unsupported(char),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Lexer<'a> {
    src: &'a [u8],
    file: String,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Lexer<'a> {
    fn span(&self) -> SourceSpan {
        SourceSpan::new(self.file.clone(), self.line, self.column)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.peek2() == Some(b'*') => {
                    let start = self.span();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => {
                                return Err(Diagnostic::new(
                                    start,
                                    ErrorCode::Lex,
                                    "unterminated block comment",
                                ));
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn ident_or_keyword(&mut self) -> Token {
        let span = self.span();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let kind = match text {
            "int" => TokenKind::KwInt,
            "float" => TokenKind::KwFloat,
            "double" => TokenKind::KwDouble,
            "void" => TokenKind::KwVoid,
            "for" => TokenKind::KwFor,
            "if" => TokenKind::KwIf,
            "else" => TokenKind::KwElse,
            _ => TokenKind::Ident(text.to_string()),
        };
        Token { kind, span }
    }

    fn number(&mut self) -> Result<Token, Diagnostic> {
        let span = self.span();
        let start = self.pos;
        let mut is_float = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                self.bump();
            } else if c == b'.' && !is_float {
                is_float = true;
                self.bump();
            } else if (c == b'e' || c == b'E')
                && self
                    .peek2()
                    .is_some_and(|n| n.is_ascii_digit() || n == b'+' || n == b'-')
            {
                is_float = true;
                self.bump();
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.bump();
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if is_float {
            let value: f64 = text
                .parse()
                .map_err(|_| Diagnostic::new(span.clone(), ErrorCode::Lex, "malformed number"))?;
            Ok(Token {
                kind: TokenKind::FloatLit(value),
                span,
            })
        } else {
            let value: i32 = text.parse().map_err(|_| {
                Diagnostic::new(
                    span.clone(),
                    ErrorCode::Lex,
                    format!("integer literal `{text}` out of range"),
                )
            })?;
            Ok(Token {
                kind: TokenKind::IntLit(value),
                span,
            })
        }
    }

    fn pragma_line(&mut self) -> Result<Token, Diagnostic> {
        let span = self.span();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == b'\n' {
                break;
            }
            self.bump();
        }
        let line = std::str::from_utf8(&self.src[start..self.pos]).unwrap().trim();
        let rest = line
            .strip_prefix('#')
            .map(str::trim_start)
            .unwrap_or(line);
        match rest.strip_prefix("pragma") {
            Some(body) => Ok(Token {
                kind: TokenKind::Pragma(body.trim().to_string()),
                span,
            }),
            None => Err(Diagnostic::new(
                span,
                ErrorCode::Unsupported,
                "preprocessor directives other than #pragma are not supported",
            )),
        }
    }

    fn next_token(&mut self) -> Result<Token, Diagnostic> {
        self.skip_trivia()?;
        let span = self.span();
        let c = match self.peek() {
            Some(c) => c,
            None => {
                return Ok(Token {
                    kind: TokenKind::Eof,
                    span,
                })
            }
        };
        if c == b'#' {
            return self.pragma_line();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            return Ok(self.ident_or_keyword());
        }
        if c.is_ascii_digit() {
            return self.number();
        }
        macro_rules! two {
            ($second:expr, $kind:expr, $fallback:expr) => {{
                self.bump();
                if self.peek() == Some($second) {
                    self.bump();
                    $kind
                } else {
                    $fallback
                }
            }};
        }
        let kind = match c {
            b'(' => {
                self.bump();
                TokenKind::LParen
            }
            b')' => {
                self.bump();
                TokenKind::RParen
            }
            b'{' => {
                self.bump();
                TokenKind::LBrace
            }
            b'}' => {
                self.bump();
                TokenKind::RBrace
            }
            b'[' => {
                self.bump();
                TokenKind::LBracket
            }
            b']' => {
                self.bump();
                TokenKind::RBracket
            }
            b';' => {
                self.bump();
                TokenKind::Semi
            }
            b',' => {
                self.bump();
                TokenKind::Comma
            }
            b'%' => {
                self.bump();
                TokenKind::Percent
            }
            b'+' => {
                self.bump();
                match self.peek() {
                    Some(b'+') => {
                        self.bump();
                        TokenKind::PlusPlus
                    }
                    Some(b'=') => {
                        self.bump();
                        TokenKind::PlusAssign
                    }
                    _ => TokenKind::Plus,
                }
            }
            b'-' => {
                self.bump();
                match self.peek() {
                    Some(b'-') => {
                        self.bump();
                        TokenKind::MinusMinus
                    }
                    Some(b'=') => {
                        self.bump();
                        TokenKind::MinusAssign
                    }
                    _ => TokenKind::Minus,
                }
            }
            b'*' => two!(b'=', TokenKind::StarAssign, TokenKind::Star),
            b'/' => two!(b'=', TokenKind::SlashAssign, TokenKind::Slash),
            b'<' => two!(b'=', TokenKind::Le, TokenKind::Lt),
            b'>' => two!(b'=', TokenKind::Ge, TokenKind::Gt),
            b'=' => two!(b'=', TokenKind::EqEq, TokenKind::Assign),
            b'!' => two!(b'=', TokenKind::Ne, TokenKind::Unsupported('!')),
            other => {
                let ch = other as char;
                if matches!(ch, '&' | '|' | '^' | '~' | '?' | ':' | '.') {
                    self.bump();
                    TokenKind::Unsupported(ch)
                } else {
                    return Err(Diagnostic::new(
                        span,
                        ErrorCode::Lex,
                        format!("illegal character `{ch}`"),
                    ));
                }
            }
        };
        Ok(Token { kind, span })
    }
}

/// Tokenize a whole source file. Pragma lines are preserved as single tokens.
pub fn tokenize(source: &str, file: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lexer = Lexer {
        src: source.as_bytes(),
        file: file.to_string(),
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        let tok = lexer.next_token()?;
        let done = tok.kind == TokenKind::Eof;
        tokens.push(tok);
        if done {
            return Ok(tokens);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_declaration() {
        let toks = tokenize("int a;", "t.c").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| &t.kind).collect();
        assert!(matches!(kinds[0], TokenKind::KwInt));
        assert!(matches!(kinds[1], TokenKind::Ident(n) if n == "a"));
        assert!(matches!(kinds[2], TokenKind::Semi));
        assert!(matches!(kinds[3], TokenKind::Eof));
    }

    #[test]
    fn pragma_line_is_one_token() {
        let toks = tokenize("#pragma omp parallel for\nfor", "t.c").unwrap();
        assert!(matches!(&toks[0].kind, TokenKind::Pragma(p) if p == "omp parallel for"));
        assert!(matches!(toks[1].kind, TokenKind::KwFor));
    }

    #[test]
    fn illegal_character_position() {
        let err = tokenize("x @= 3", "t.c").unwrap_err();
        assert_eq!(err.code, ErrorCode::Lex);
        assert_eq!((err.span.line, err.span.column), (1, 3));
    }

    #[test]
    fn comments_are_skipped() {
        let toks = tokenize("int a; // tail\n/* block\n */ int b;", "t.c").unwrap();
        let idents: Vec<_> = toks
            .iter()
            .filter_map(|t| match &t.kind {
                TokenKind::Ident(n) => Some(n.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(idents, vec!["a", "b"]);
    }

    #[test]
    fn compound_operators() {
        let toks = tokenize("a += 1; b++; c /= 2;", "t.c").unwrap();
        assert!(toks.iter().any(|t| t.kind == TokenKind::PlusAssign));
        assert!(toks.iter().any(|t| t.kind == TokenKind::PlusPlus));
        assert!(toks.iter().any(|t| t.kind == TokenKind::SlashAssign));
    }
}
