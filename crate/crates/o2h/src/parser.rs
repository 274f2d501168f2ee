//! Recursive-descent parser producing a [`TranslationUnit`].
//!
//! Loops are canonicalized on the way in: every `for` body and `if` branch is
//! stored as a braced block, so statement paths have a uniform shape. The
//! parser is deliberately permissive about things the subset validator
//! rejects later (extra functions, call statements, dynamic extents); it
//! fails fast only on syntax it cannot represent at all.

use crate::ast::*;
use crate::diag::{Diagnostic, ErrorCode};
use crate::lexer::{tokenize, Token, TokenKind};
use crate::pragma::{parse_pragma, ParsedPragma};
use crate::span::SourceSpan;

/// C keywords we recognize only to produce a precise rejection.
const REJECTED_KEYWORDS: &[&str] = &[
    "while", "do", "switch", "case", "goto", "return", "break", "continue", "struct", "union",
    "enum", "typedef", "char", "long", "short", "unsigned", "signed", "const", "static", "sizeof",
];

pub fn parse_source(source: &str, file: &str) -> Result<TranslationUnit, Diagnostic> {
    let tokens = tokenize(source, file)?;
    parse(&tokens, file)
}

pub fn parse(tokens: &[Token], file: &str) -> Result<TranslationUnit, Diagnostic> {
    let mut parser = Parser { tokens, pos: 0 };
    parser.unit(file)
}

/// Parse a standalone expression, used for array fill expressions in input
/// binding files.
pub fn parse_expr_text(text: &str, what: &str) -> Result<Expr, Diagnostic> {
    let tokens = tokenize(text, what)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
    };
    let expr = parser.expr()?;
    if parser.peek_kind() != &TokenKind::Eof {
        return Err(parser.error_here(ErrorCode::Parse, "trailing tokens after expression"));
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> &TokenKind {
        &self.peek().kind
    }

    fn peek_kind_at(&self, offset: usize) -> &TokenKind {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].kind
    }

    fn bump(&mut self) -> &Token {
        let tok = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn span_here(&self) -> SourceSpan {
        self.peek().span.clone()
    }

    fn error_here(&self, code: ErrorCode, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.span_here(), code, msg)
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<SourceSpan, Diagnostic> {
        if self.peek_kind() == &kind {
            Ok(self.bump().span.clone())
        } else {
            Err(self.error_here(ErrorCode::Parse, format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match self.peek_kind().clone() {
            TokenKind::Ident(name) => {
                let span = self.bump().span.clone();
                Ok((name, span))
            }
            _ => Err(self.error_here(ErrorCode::Parse, format!("expected {what}"))),
        }
    }

    fn base_type(&mut self) -> Option<BaseType> {
        let base = match self.peek_kind() {
            TokenKind::KwInt => BaseType::Int,
            TokenKind::KwFloat => BaseType::Float,
            TokenKind::KwDouble => BaseType::Double,
            _ => return None,
        };
        self.bump();
        Some(base)
    }

    // -- translation unit ---------------------------------------------------

    fn unit(&mut self, file: &str) -> Result<TranslationUnit, Diagnostic> {
        let mut unit = TranslationUnit {
            file: file.to_string(),
            groups: Vec::new(),
            global_decls: Vec::new(),
            functions: Vec::new(),
        };
        let mut pending_codelet: Option<CodeletPragma> = None;
        loop {
            match self.peek_kind().clone() {
                TokenKind::Eof => break,
                TokenKind::Pragma(body) => {
                    let span = self.bump().span.clone();
                    match parse_pragma(&body, &span)? {
                        ParsedPragma::HmppGroup(group) => unit.groups.push(group),
                        ParsedPragma::HmppCodelet(codelet) => {
                            if pending_codelet.is_some() {
                                return Err(Diagnostic::new(
                                    span,
                                    ErrorCode::BadPragma,
                                    "codelet pragma not followed by a function definition",
                                ));
                            }
                            pending_codelet = Some(codelet);
                        }
                        _ => {
                            return Err(Diagnostic::new(
                                span,
                                ErrorCode::BadPragma,
                                "this pragma is not allowed at file scope",
                            ));
                        }
                    }
                }
                TokenKind::KwVoid => {
                    let span = self.bump().span.clone();
                    let (name, _) = self.ident("function name")?;
                    let func = self.function(name, false, pending_codelet.take(), span)?;
                    unit.functions.push(func);
                }
                TokenKind::KwInt | TokenKind::KwFloat | TokenKind::KwDouble => {
                    let span = self.span_here();
                    let base = self.base_type().unwrap();
                    if self.peek_kind() == &TokenKind::Star {
                        return Err(
                            self.error_here(ErrorCode::Unsupported, "pointers are not supported")
                        );
                    }
                    let (name, name_span) = self.ident("identifier")?;
                    if self.peek_kind() == &TokenKind::LParen {
                        if base != BaseType::Int {
                            return Err(Diagnostic::new(
                                name_span,
                                ErrorCode::Unsupported,
                                "function return types other than int and void are not supported",
                            ));
                        }
                        let func = self.function(name, true, pending_codelet.take(), span)?;
                        unit.functions.push(func);
                    } else {
                        let decl = self.decl_tail(base, name, span)?;
                        unit.global_decls.push(decl);
                    }
                }
                TokenKind::Ident(name) if REJECTED_KEYWORDS.contains(&name.as_str()) => {
                    return Err(self.error_here(
                        ErrorCode::Unsupported,
                        format!("`{name}` is not supported"),
                    ));
                }
                _ => {
                    return Err(
                        self.error_here(ErrorCode::Parse, "expected declaration or function")
                    );
                }
            }
        }
        if pending_codelet.is_some() {
            return Err(self.error_here(
                ErrorCode::BadPragma,
                "codelet pragma not followed by a function definition",
            ));
        }
        Ok(unit)
    }

    fn function(
        &mut self,
        name: String,
        returns_int: bool,
        codelet: Option<CodeletPragma>,
        span: SourceSpan,
    ) -> Result<FunctionDef, Diagnostic> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut params = Vec::new();
        if self.peek_kind() != &TokenKind::RParen {
            loop {
                let pspan = self.span_here();
                let base = self.base_type().ok_or_else(|| {
                    self.error_here(ErrorCode::Parse, "expected parameter type")
                })?;
                if self.peek_kind() == &TokenKind::Star {
                    return Err(
                        self.error_here(ErrorCode::Unsupported, "pointers are not supported")
                    );
                }
                let (pname, _) = self.ident("parameter name")?;
                let dims = self.extents()?;
                params.push(Decl {
                    name: pname,
                    base,
                    dims,
                    init: None,
                    span: pspan,
                });
                if self.peek_kind() == &TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        let body = self.block()?;
        Ok(FunctionDef {
            name,
            returns_int,
            params,
            body,
            codelet,
            span,
        })
    }

    // -- declarations -------------------------------------------------------

    fn extents(&mut self) -> Result<Vec<Extent>, Diagnostic> {
        let mut dims = Vec::new();
        while self.peek_kind() == &TokenKind::LBracket {
            self.bump();
            match self.peek_kind().clone() {
                TokenKind::IntLit(n) => {
                    self.bump();
                    dims.push(Extent::Const(n as i64));
                }
                _ => {
                    let span = self.span_here();
                    // Parse and discard; subset validation reports E_DYN_EXTENT.
                    self.expr()?;
                    dims.push(Extent::Dynamic(span));
                }
            }
            self.expect(TokenKind::RBracket, "`]`")?;
        }
        Ok(dims)
    }

    fn decl_tail(
        &mut self,
        base: BaseType,
        name: String,
        span: SourceSpan,
    ) -> Result<Decl, Diagnostic> {
        let dims = self.extents()?;
        let init = if self.peek_kind() == &TokenKind::Assign {
            self.bump();
            Some(self.expr()?)
        } else {
            None
        };
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(Decl {
            name,
            base,
            dims,
            init,
            span,
        })
    }

    // -- statements ---------------------------------------------------------

    fn block(&mut self) -> Result<Block, Diagnostic> {
        let span = self.expect(TokenKind::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while self.peek_kind() != &TokenKind::RBrace {
            if self.peek_kind() == &TokenKind::Eof {
                return Err(self.error_here(ErrorCode::Parse, "unexpected end of file in block"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Block { stmts, span })
    }

    /// A single statement normalized to a block, for loop bodies and branches.
    fn stmt_as_block(&mut self) -> Result<Block, Diagnostic> {
        if self.peek_kind() == &TokenKind::LBrace {
            self.block()
        } else {
            let stmt = self.stmt()?;
            let span = stmt.span().clone();
            Ok(Block {
                stmts: vec![stmt],
                span,
            })
        }
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        match self.peek_kind().clone() {
            TokenKind::Pragma(body) => {
                let span = self.bump().span.clone();
                self.pragma_stmt(&body, span)
            }
            TokenKind::LBrace => Ok(Stmt::Compound(self.block()?)),
            TokenKind::KwFor => self.for_stmt().map(Stmt::For),
            TokenKind::KwIf => self.if_stmt(),
            TokenKind::KwInt | TokenKind::KwFloat | TokenKind::KwDouble => {
                let span = self.span_here();
                let base = self.base_type().unwrap();
                if self.peek_kind() == &TokenKind::Star {
                    return Err(
                        self.error_here(ErrorCode::Unsupported, "pointers are not supported")
                    );
                }
                let (name, _) = self.ident("identifier")?;
                Ok(Stmt::Decl(self.decl_tail(base, name, span)?))
            }
            TokenKind::KwVoid => Err(self.error_here(
                ErrorCode::Unsupported,
                "nested function definitions are not supported",
            )),
            TokenKind::Ident(name) => {
                if REJECTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(self.error_here(
                        ErrorCode::Unsupported,
                        format!("`{name}` is not supported"),
                    ));
                }
                if name == "print" && self.peek_kind_at(1) == &TokenKind::LParen {
                    let span = self.bump().span.clone();
                    self.bump(); // (
                    let (var, _) = self.ident("variable name")?;
                    self.expect(TokenKind::RParen, "`)`")?;
                    self.expect(TokenKind::Semi, "`;`")?;
                    return Ok(Stmt::Print { var, span });
                }
                if self.peek_kind_at(1) == &TokenKind::LParen {
                    return self.call_stmt(None);
                }
                self.assign_stmt()
            }
            TokenKind::PlusPlus | TokenKind::MinusMinus => Err(self.error_here(
                ErrorCode::Unsupported,
                "increment statements are only supported in for headers",
            )),
            TokenKind::Semi => Err(self.error_here(ErrorCode::Parse, "empty statement")),
            _ => Err(self.error_here(ErrorCode::Parse, "expected statement")),
        }
    }

    fn pragma_stmt(&mut self, body: &str, span: SourceSpan) -> Result<Stmt, Diagnostic> {
        match parse_pragma(body, &span)? {
            ParsedPragma::Omp(first) => {
                let mut pragmas = vec![first];
                while let TokenKind::Pragma(next_body) = self.peek_kind().clone() {
                    let next_span = self.peek().span.clone();
                    match parse_pragma(&next_body, &next_span)? {
                        ParsedPragma::Omp(info) => {
                            self.bump();
                            pragmas.push(info);
                        }
                        _ => break,
                    }
                }
                if self.peek_kind() != &TokenKind::KwFor {
                    return Err(self.error_here(
                        ErrorCode::BadPragma,
                        "OpenMP pragma must be followed by a for loop",
                    ));
                }
                let body = self.for_stmt().map(Stmt::For)?;
                Ok(Stmt::PragmaMarked {
                    pragmas,
                    body: Box::new(body),
                    span,
                })
            }
            ParsedPragma::HmppDirective(d) => Ok(Stmt::Directive(d)),
            ParsedPragma::HmppCallsite(c) => {
                if !matches!(self.peek_kind(), TokenKind::Ident(_))
                    || self.peek_kind_at(1) != &TokenKind::LParen
                {
                    return Err(Diagnostic::new(
                        span,
                        ErrorCode::BadPragma,
                        "callsite pragma must be followed by a call statement",
                    ));
                }
                self.call_stmt(Some(c))
            }
            ParsedPragma::HmppGroup(_) | ParsedPragma::HmppCodelet(_) => Err(Diagnostic::new(
                span,
                ErrorCode::BadPragma,
                "this pragma is only allowed at file scope",
            )),
        }
    }

    fn call_stmt(&mut self, pragma: Option<CallsitePragma>) -> Result<Stmt, Diagnostic> {
        let (callee, span) = self.ident("function name")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek_kind() != &TokenKind::RParen {
            loop {
                args.push(self.expr()?);
                if self.peek_kind() == &TokenKind::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen, "`)`")?;
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(Stmt::Call(CallStmt {
            callee,
            args,
            pragma,
            span,
        }))
    }

    fn assign_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let (name, span) = self.ident("identifier")?;
        let mut indices = Vec::new();
        while self.peek_kind() == &TokenKind::LBracket {
            self.bump();
            indices.push(self.expr()?);
            self.expect(TokenKind::RBracket, "`]`")?;
        }
        let lhs = LValue {
            name,
            indices,
            span: span.clone(),
        };
        let op = match self.peek_kind() {
            TokenKind::Assign => AssignOp::Assign,
            TokenKind::PlusAssign => AssignOp::AddAssign,
            TokenKind::MinusAssign => AssignOp::SubAssign,
            TokenKind::StarAssign => AssignOp::MulAssign,
            TokenKind::SlashAssign => AssignOp::DivAssign,
            TokenKind::PlusPlus | TokenKind::MinusMinus => {
                return Err(self.error_here(
                    ErrorCode::Unsupported,
                    "increment statements are only supported in for headers",
                ));
            }
            _ => return Err(self.error_here(ErrorCode::Parse, "expected assignment operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        self.expect(TokenKind::Semi, "`;`")?;
        Ok(Stmt::Assign(AssignStmt {
            lhs,
            op,
            rhs,
            span,
        }))
    }

    /// Canonical loops only: `for (i = LOWER; i < UPPER; i++)`.
    fn for_stmt(&mut self) -> Result<ForStmt, Diagnostic> {
        let span = self.expect_for()?;
        self.expect(TokenKind::LParen, "`(`")?;
        if self.base_type().is_some() {
            return Err(Diagnostic::new(
                span,
                ErrorCode::NonCanonLoop,
                "non-canonical loop: index must be declared before the loop",
            ));
        }
        let (index, index_span) = self.ident("loop index")?;
        if self.peek_kind() != &TokenKind::Assign {
            return Err(Diagnostic::new(
                index_span,
                ErrorCode::NonCanonLoop,
                "non-canonical loop: expected `index = lower`",
            ));
        }
        self.bump();
        let lower = self.expr()?;
        self.expect(TokenKind::Semi, "`;`")?;
        let (cond_var, cond_span) = self.ident("loop index in condition")?;
        if cond_var != index {
            return Err(Diagnostic::new(
                cond_span,
                ErrorCode::NonCanonLoop,
                "non-canonical loop: condition must test the loop index",
            ));
        }
        if self.peek_kind() != &TokenKind::Lt {
            return Err(Diagnostic::new(
                self.span_here(),
                ErrorCode::NonCanonLoop,
                "non-canonical loop: only strict `<` upper bounds are supported",
            ));
        }
        self.bump();
        let upper = self.expr()?;
        self.expect(TokenKind::Semi, "`;`")?;
        let incr_ok = match (self.peek_kind().clone(), self.peek_kind_at(1).clone()) {
            (TokenKind::Ident(v), TokenKind::PlusPlus) if v == index => {
                self.bump();
                self.bump();
                true
            }
            (TokenKind::PlusPlus, TokenKind::Ident(v)) if v == index => {
                self.bump();
                self.bump();
                true
            }
            _ => false,
        };
        if !incr_ok {
            return Err(Diagnostic::new(
                self.span_here(),
                ErrorCode::NonCanonLoop,
                "non-canonical loop: only unit `++` increments are supported",
            ));
        }
        self.expect(TokenKind::RParen, "`)`")?;
        let body = self.stmt_as_block()?;
        Ok(ForStmt {
            index,
            lower,
            upper,
            body,
            span,
        })
    }

    fn expect_for(&mut self) -> Result<SourceSpan, Diagnostic> {
        self.expect(TokenKind::KwFor, "`for`")
    }

    fn if_stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let span = self.expect(TokenKind::KwIf, "`if`")?;
        self.expect(TokenKind::LParen, "`(`")?;
        let cond = self.expr()?;
        self.expect(TokenKind::RParen, "`)`")?;
        let then_block = self.stmt_as_block()?;
        let else_block = if self.peek_kind() == &TokenKind::KwElse {
            self.bump();
            Some(self.stmt_as_block()?)
        } else {
            None
        };
        Ok(Stmt::If(IfStmt {
            cond,
            then_block,
            else_block,
            span,
        }))
    }

    // -- expressions ----------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        self.binary(0)
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, Diagnostic> {
        let mut lhs = self.primary()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                TokenKind::Percent => BinOp::Rem,
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                TokenKind::Lt => BinOp::Lt,
                TokenKind::Le => BinOp::Le,
                TokenKind::Gt => BinOp::Gt,
                TokenKind::Ge => BinOp::Ge,
                TokenKind::EqEq => BinOp::Eq,
                TokenKind::Ne => BinOp::Ne,
                _ => break,
            };
            if op.precedence() < min_prec {
                break;
            }
            let span = self.bump().span.clone();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, Diagnostic> {
        match self.peek_kind().clone() {
            TokenKind::IntLit(v) => {
                let span = self.bump().span.clone();
                Ok(Expr::IntLit(v, span))
            }
            TokenKind::FloatLit(v) => {
                let span = self.bump().span.clone();
                Ok(Expr::FloatLit(v, span))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if REJECTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(self.error_here(
                        ErrorCode::Unsupported,
                        format!("`{name}` is not supported"),
                    ));
                }
                let span = self.bump().span.clone();
                if self.peek_kind() == &TokenKind::LParen {
                    return Err(Diagnostic::new(
                        span,
                        ErrorCode::Unsupported,
                        "function calls are not supported inside expressions",
                    ));
                }
                let mut indices = Vec::new();
                while self.peek_kind() == &TokenKind::LBracket {
                    self.bump();
                    indices.push(self.expr()?);
                    self.expect(TokenKind::RBracket, "`]`")?;
                }
                if indices.is_empty() {
                    Ok(Expr::Var(name, span))
                } else {
                    Ok(Expr::ArrayRef {
                        name,
                        indices,
                        span,
                    })
                }
            }
            TokenKind::Minus => Err(self.error_here(
                ErrorCode::Unsupported,
                "unary minus is not supported; write `0 - x`",
            )),
            TokenKind::Unsupported(c) => Err(self.error_here(
                ErrorCode::Unsupported,
                format!("operator `{c}` is not supported"),
            )),
            _ => Err(self.error_here(ErrorCode::Parse, "expected expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> TranslationUnit {
        parse_source(src, "t.c").unwrap_or_else(|e| panic!("parse failed: {e}\n{src}"))
    }

    #[test]
    fn canonical_for_loop() {
        let unit = parse_ok("int main() { int i; int n; for (i = 0; i < n; i++) { n = 1; } }");
        let main = unit.main().unwrap();
        match &main.body.stmts[2] {
            Stmt::For(f) => {
                assert_eq!(f.index, "i");
                assert!(matches!(f.lower, Expr::IntLit(0, _)));
                assert!(matches!(&f.upper, Expr::Var(n, _) if n == "n"));
            }
            other => panic!("expected for, got {other:?}"),
        }
    }

    #[test]
    fn non_canonical_loop_rejected() {
        let err = parse_source(
            "int main() { int i; int n; for (i = n; i > 0; i--) { n = 1; } }",
            "t.c",
        )
        .unwrap_err();
        assert_eq!(err.code, ErrorCode::NonCanonLoop);
        assert!(err.message.contains("non-canonical loop"));
    }

    #[test]
    fn pragma_attaches_to_following_loop() {
        let src = "int main() {\n  int i;\n  int n;\n  double C[4];\n\
                   #pragma omp target device (hmpp)\n#pragma omp parallel for\n\
                   for (i = 0; i < n; i++) { C[i] = 1.0; }\n}";
        let unit = parse_ok(src);
        let main = unit.main().unwrap();
        match &main.body.stmts[3] {
            Stmt::PragmaMarked { pragmas, body, .. } => {
                assert_eq!(pragmas.len(), 2);
                assert!(matches!(body.as_ref(), Stmt::For(_)));
            }
            other => panic!("expected pragma-marked loop, got {other:?}"),
        }
    }

    #[test]
    fn while_is_rejected() {
        let err = parse_source("int main() { while (1) { } }", "t.c").unwrap_err();
        assert_eq!(err.code, ErrorCode::Unsupported);
    }

    #[test]
    fn call_in_expression_rejected() {
        let err = parse_source("int main() { int a; a = f(1); }", "t.c").unwrap_err();
        assert_eq!(err.code, ErrorCode::Unsupported);
    }

    #[test]
    fn transformed_shapes_parse() {
        let src = "#pragma hmpp <g0> group, target=CUDA\n\
                   #pragma hmpp <g0> o2h_main_b0 codelet, args[n].io=in, args[C].io=out\n\
                   void o2h_main_b0(int n, double C[4]) {\n  int i;\n\
                   for (i = 0; i < n; i++) { C[i] = 2.0; }\n}\n\
                   int main() {\n  int n;\n  double C[4];\n  n = 4;\n\
                   #pragma hmpp <g0> o2h_main_b0 callsite\no2h_main_b0(n, C);\n\
                   #pragma hmpp <g0> o2h_main_b0 delegatestore, args[C]\n\
                   print(C);\n#pragma hmpp <g0> release\n}";
        let unit = parse_ok(src);
        assert_eq!(unit.groups.len(), 1);
        assert_eq!(unit.functions.len(), 2);
        assert!(unit.functions[0].codelet.is_some());
        let main = unit.main().unwrap();
        assert!(matches!(&main.body.stmts[3], Stmt::Call(c) if c.pragma.is_some()));
        assert!(matches!(&main.body.stmts[4], Stmt::Directive(_)));
    }

    #[test]
    fn precedence_and_parens() {
        let unit = parse_ok("int main() { int a; a = 1 + 2 * 3; a = (1 + 2) * 3; }");
        let main = unit.main().unwrap();
        match &main.body.stmts[1] {
            Stmt::Assign(a) => match &a.rhs {
                Expr::Binary { op: BinOp::Add, rhs, .. } => {
                    assert!(matches!(rhs.as_ref(), Expr::Binary { op: BinOp::Mul, .. }));
                }
                other => panic!("unexpected rhs {other:?}"),
            },
            other => panic!("expected assign, got {other:?}"),
        }
        match &main.body.stmts[2] {
            Stmt::Assign(a) => {
                assert!(matches!(&a.rhs, Expr::Binary { op: BinOp::Mul, .. }));
            }
            other => panic!("expected assign, got {other:?}"),
        }
    }
}
