//! Parser for the bodies of `#pragma omp ...` and `#pragma hmpp ...` lines.
//!
//! The accepted grammar is documented in the README. Input programs mark GPU
//! blocks with either
//!
//! ```c
//! #pragma omp target device (hmpp)
//! #pragma omp parallel for
//! ```
//!
//! or the one-line form `#pragma omp parallel for device(hmpp)`. Transformed
//! programs carry `#pragma hmpp` lines of the shape
//! `#pragma hmpp <GROUP> [LABEL] KIND[, clauses]`.

use crate::ast::{
    CallsitePragma, CodeletPragma, DirectiveKind, DirectiveStmt, GroupPragma, Intent, PragmaInfo,
};
use crate::diag::{Diagnostic, ErrorCode};
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub enum ParsedPragma {
    Omp(PragmaInfo),
    HmppGroup(GroupPragma),
    HmppCodelet(CodeletPragma),
    HmppCallsite(CallsitePragma),
    HmppDirective(DirectiveStmt),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Lt,
    Gt,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Dot,
    Comma,
    Eq,
    Semi,
}

fn scan(body: &str, span: &SourceSpan) -> Result<Vec<Tok>, Diagnostic> {
    let mut toks = Vec::new();
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' => i += 1,
            b'<' => {
                toks.push(Tok::Lt);
                i += 1;
            }
            b'>' => {
                toks.push(Tok::Gt);
                i += 1;
            }
            b'[' => {
                toks.push(Tok::LBracket);
                i += 1;
            }
            b']' => {
                toks.push(Tok::RBracket);
                i += 1;
            }
            b'(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            b')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            b'.' => {
                toks.push(Tok::Dot);
                i += 1;
            }
            b',' => {
                toks.push(Tok::Comma);
                i += 1;
            }
            b'=' => {
                toks.push(Tok::Eq);
                i += 1;
            }
            b';' => {
                toks.push(Tok::Semi);
                i += 1;
            }
            _ if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                toks.push(Tok::Word(body[start..i].to_string()));
            }
            _ => {
                return Err(Diagnostic::new(
                    span.clone(),
                    ErrorCode::BadPragma,
                    format!("unexpected character `{}` in pragma", c as char),
                ));
            }
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    span: &'a SourceSpan,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.span.clone(), ErrorCode::BadPragma, msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), Diagnostic> {
        match self.next() {
            Some(t) if *t == tok => Ok(()),
            _ => Err(self.err(format!("expected {what} in pragma"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<String, Diagnostic> {
        match self.next() {
            Some(Tok::Word(w)) => Ok(w.clone()),
            _ => Err(self.err(format!("expected {what} in pragma"))),
        }
    }
}

pub fn parse_pragma(body: &str, span: &SourceSpan) -> Result<ParsedPragma, Diagnostic> {
    let toks = scan(body, span)?;
    let mut cur = Cursor {
        toks: &toks,
        pos: 0,
        span,
    };
    match cur.word("pragma family")?.as_str() {
        "omp" => parse_omp(&mut cur),
        "hmpp" => parse_hmpp(&mut cur),
        other => Err(cur.err(format!("unknown pragma family `{other}`"))),
    }
}

fn parse_omp(cur: &mut Cursor) -> Result<ParsedPragma, Diagnostic> {
    match cur.word("omp directive")?.as_str() {
        "parallel" => {
            let next = cur.word("`for` after `omp parallel`")?;
            if next != "for" {
                return Err(cur.err("only `omp parallel for` is supported"));
            }
            let mut device = None;
            while let Some(tok) = cur.next() {
                match tok {
                    Tok::Word(w) if w == "device" => {
                        cur.expect(Tok::LParen, "`(`")?;
                        device = Some(cur.word("device name")?);
                        cur.expect(Tok::RParen, "`)`")?;
                    }
                    Tok::Comma => {}
                    _ => return Err(cur.err("unsupported clause on `omp parallel for`")),
                }
            }
            Ok(ParsedPragma::Omp(PragmaInfo::ParallelFor {
                device,
                span: cur.span.clone(),
            }))
        }
        "target" => {
            let next = cur.word("`device` after `omp target`")?;
            if next != "device" {
                return Err(cur.err("only `omp target device (NAME)` is supported"));
            }
            cur.expect(Tok::LParen, "`(`")?;
            let device = cur.word("device name")?;
            cur.expect(Tok::RParen, "`)`")?;
            if cur.peek().is_some() {
                return Err(cur.err("trailing tokens after `omp target device (...)`"));
            }
            Ok(ParsedPragma::Omp(PragmaInfo::TargetDevice {
                device,
                span: cur.span.clone(),
            }))
        }
        other => Err(cur.err(format!("unsupported OpenMP directive `{other}`"))),
    }
}

/// `args [ VAR ] . FIELD = VALUE` or bare `args [ VAR ]`.
struct ArgsClause {
    var: String,
    field: Option<(String, String)>,
}

fn parse_args_clause(cur: &mut Cursor) -> Result<ArgsClause, Diagnostic> {
    cur.expect(Tok::LBracket, "`[`")?;
    let var = cur.word("variable name")?;
    cur.expect(Tok::RBracket, "`]`")?;
    if cur.peek() == Some(&Tok::Dot) {
        cur.next();
        let field = cur.word("clause field")?;
        cur.expect(Tok::Eq, "`=`")?;
        let value = cur.word("clause value")?;
        Ok(ArgsClause {
            var,
            field: Some((field, value)),
        })
    } else {
        Ok(ArgsClause { var, field: None })
    }
}

fn parse_hmpp(cur: &mut Cursor) -> Result<ParsedPragma, Diagnostic> {
    cur.expect(Tok::Lt, "`<`")?;
    let group = cur.word("group name")?;
    cur.expect(Tok::Gt, "`>`")?;
    let head = cur.word("label or directive kind")?;
    let span = cur.span.clone();

    // `release` and `group` bind to the group as a whole and carry no label.
    if head == "release" {
        if cur.peek().is_some() {
            return Err(cur.err("trailing tokens after `release`"));
        }
        return Ok(ParsedPragma::HmppDirective(DirectiveStmt {
            group,
            label: None,
            kind: DirectiveKind::Release,
            var: None,
            span,
        }));
    }
    if head == "group" {
        let mut target = None;
        let mut mapbyname = Vec::new();
        while cur.peek() == Some(&Tok::Comma) {
            cur.next();
            let key = cur.word("group clause")?;
            cur.expect(Tok::Eq, "`=`")?;
            match key.as_str() {
                "target" => target = Some(cur.word("target name")?),
                "mapbyname" => {
                    mapbyname.push(cur.word("variable name")?);
                    while cur.peek() == Some(&Tok::Semi) {
                        cur.next();
                        mapbyname.push(cur.word("variable name")?);
                    }
                }
                other => return Err(cur.err(format!("unknown group clause `{other}`"))),
            }
        }
        let target = target.ok_or_else(|| cur.err("group declaration requires `target=`"))?;
        return Ok(ParsedPragma::HmppGroup(GroupPragma {
            name: group,
            target,
            mapbyname,
            span,
        }));
    }

    let label = head;
    let kind = cur.word("directive kind")?;
    match kind.as_str() {
        "codelet" => {
            let mut ios = Vec::new();
            while cur.peek() == Some(&Tok::Comma) {
                cur.next();
                let key = cur.word("codelet clause")?;
                if key != "args" {
                    return Err(cur.err(format!("unknown codelet clause `{key}`")));
                }
                let clause = parse_args_clause(cur)?;
                match clause.field {
                    Some((field, value)) if field == "io" => {
                        let intent = match value.as_str() {
                            "in" => Intent::In,
                            "out" => Intent::Out,
                            "inout" => Intent::InOut,
                            other => {
                                return Err(cur.err(format!("unknown io direction `{other}`")))
                            }
                        };
                        ios.push((clause.var, intent));
                    }
                    _ => return Err(cur.err("codelet args clause must set `.io=`")),
                }
            }
            Ok(ParsedPragma::HmppCodelet(CodeletPragma {
                group,
                label,
                ios,
                span,
            }))
        }
        "callsite" => {
            let mut asynchronous = false;
            let mut noupdate = Vec::new();
            while cur.peek() == Some(&Tok::Comma) {
                cur.next();
                let key = cur.word("callsite clause")?;
                match key.as_str() {
                    "asynchronous" => asynchronous = true,
                    "args" => {
                        let clause = parse_args_clause(cur)?;
                        match clause.field {
                            Some((field, value)) if field == "noupdate" && value == "true" => {
                                noupdate.push(clause.var);
                            }
                            _ => {
                                return Err(
                                    cur.err("callsite args clause must set `.noupdate=true`")
                                )
                            }
                        }
                    }
                    other => return Err(cur.err(format!("unknown callsite clause `{other}`"))),
                }
            }
            Ok(ParsedPragma::HmppCallsite(CallsitePragma {
                group,
                label,
                asynchronous,
                noupdate,
                span,
            }))
        }
        "advancedload" | "delegatestore" => {
            cur.expect(Tok::Comma, "`,`")?;
            let key = cur.word("`args`")?;
            if key != "args" {
                return Err(cur.err("transfer directive requires an `args[...]` clause"));
            }
            let clause = parse_args_clause(cur)?;
            if clause.field.is_some() {
                return Err(cur.err("transfer directive takes a bare `args[VAR]` clause"));
            }
            let dk = if kind == "advancedload" {
                DirectiveKind::AdvancedLoad
            } else {
                DirectiveKind::DelegateStore
            };
            Ok(ParsedPragma::HmppDirective(DirectiveStmt {
                group,
                label: Some(label),
                kind: dk,
                var: Some(clause.var),
                span,
            }))
        }
        "synchronize" => {
            if cur.peek().is_some() {
                return Err(cur.err("trailing tokens after `synchronize`"));
            }
            Ok(ParsedPragma::HmppDirective(DirectiveStmt {
                group,
                label: Some(label),
                kind: DirectiveKind::Synchronize,
                var: None,
                span,
            }))
        }
        other => Err(cur.err(format!("unknown hmpp directive `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span() -> SourceSpan {
        SourceSpan::new("t.c", 1, 1)
    }

    #[test]
    fn omp_spellings() {
        let p = parse_pragma("omp parallel for", &span()).unwrap();
        assert!(matches!(
            p,
            ParsedPragma::Omp(PragmaInfo::ParallelFor { device: None, .. })
        ));
        let p = parse_pragma("omp parallel for device(hmpp)", &span()).unwrap();
        assert!(
            matches!(p, ParsedPragma::Omp(PragmaInfo::ParallelFor { device: Some(d), .. }) if d == "hmpp")
        );
        let p = parse_pragma("omp target device (hmpp)", &span()).unwrap();
        assert!(
            matches!(p, ParsedPragma::Omp(PragmaInfo::TargetDevice { device, .. }) if device == "hmpp")
        );
    }

    #[test]
    fn hmpp_group_with_mapbyname() {
        let p = parse_pragma("hmpp <g0> group, target=CUDA, mapbyname=E;F", &span()).unwrap();
        match p {
            ParsedPragma::HmppGroup(g) => {
                assert_eq!(g.name, "g0");
                assert_eq!(g.target, "CUDA");
                assert_eq!(g.mapbyname, vec!["E", "F"]);
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn hmpp_codelet_and_callsite() {
        let p = parse_pragma(
            "hmpp <g0> o2h_main_b0 codelet, args[n].io=in, args[C].io=out",
            &span(),
        )
        .unwrap();
        match p {
            ParsedPragma::HmppCodelet(c) => {
                assert_eq!(c.label, "o2h_main_b0");
                assert_eq!(c.ios[0], ("n".to_string(), Intent::In));
                assert_eq!(c.ios[1], ("C".to_string(), Intent::Out));
            }
            other => panic!("unexpected parse: {other:?}"),
        }
        let p = parse_pragma(
            "hmpp <g0> o2h_main_b2 callsite, asynchronous, args[E].noupdate=true",
            &span(),
        )
        .unwrap();
        match p {
            ParsedPragma::HmppCallsite(c) => {
                assert!(c.asynchronous);
                assert_eq!(c.noupdate, vec!["E"]);
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn hmpp_transfers_and_release() {
        let p = parse_pragma("hmpp <g0> o2h_main_b0 advancedload, args[A]", &span()).unwrap();
        assert!(matches!(
            p,
            ParsedPragma::HmppDirective(DirectiveStmt {
                kind: DirectiveKind::AdvancedLoad,
                ..
            })
        ));
        let p = parse_pragma("hmpp <g0> release", &span()).unwrap();
        assert!(matches!(
            p,
            ParsedPragma::HmppDirective(DirectiveStmt {
                kind: DirectiveKind::Release,
                label: None,
                ..
            })
        ));
    }

    #[test]
    fn unknown_pragma_rejected() {
        let err = parse_pragma("once", &span()).unwrap_err();
        assert_eq!(err.code, ErrorCode::BadPragma);
    }
}
