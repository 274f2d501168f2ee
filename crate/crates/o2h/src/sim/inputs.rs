//! Input binding files: a JSON map from variable name to either a number
//! (scalar value) or a fill-expression string evaluated per element with `i`
//! bound to the flattened index, e.g. `{"n": 8, "A": "i * 1.0"}`.

use super::{eval_expr, Access, ExecError, ExecErrorKind, Scalar, VarStorage};
use crate::ast::Expr;
use crate::diag::{Diagnostic, ErrorCode};
use crate::parser::parse_expr_text;
use crate::span::SourceSpan;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
enum Binding {
    Number(f64),
    Fill(Expr),
}

#[derive(Clone, Debug, Default)]
pub struct Bindings {
    entries: BTreeMap<String, Binding>,
}

impl Bindings {
    pub fn parse(text: &str, what: &str) -> Result<Bindings, Diagnostic> {
        let span = SourceSpan::new(what, 1, 1);
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
            Diagnostic::new(span.clone(), ErrorCode::Parse, format!("invalid inputs JSON: {e}"))
        })?;
        let map = value.as_object().ok_or_else(|| {
            Diagnostic::new(
                span.clone(),
                ErrorCode::Parse,
                "inputs file must be a JSON object",
            )
        })?;
        let mut entries = BTreeMap::new();
        for (name, v) in map {
            let binding = match v {
                serde_json::Value::Number(n) => Binding::Number(n.as_f64().unwrap_or(0.0)),
                serde_json::Value::String(s) => Binding::Fill(parse_expr_text(s, what)?),
                _ => {
                    return Err(Diagnostic::new(
                        span,
                        ErrorCode::Parse,
                        format!("binding for `{name}` must be a number or a fill expression"),
                    ))
                }
            };
            entries.insert(name.clone(), binding);
        }
        Ok(Bindings { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Apply the binding for `name`, if any, to freshly created storage.
    pub(crate) fn apply(&self, name: &str, storage: &mut VarStorage) -> Result<(), ExecError> {
        let Some(binding) = self.entries.get(name) else {
            return Ok(());
        };
        match binding {
            Binding::Number(v) => {
                let value = Scalar::Double(*v).convert(storage.base);
                for cell in &mut storage.cells {
                    *cell = Some(value);
                }
            }
            Binding::Fill(expr) => {
                for flat in 0..storage.cells.len() {
                    let mut acc = FillAccess { index: flat as i32 };
                    let value = eval_expr(expr, &mut acc)?.convert(storage.base);
                    storage.cells[flat] = Some(value);
                }
            }
        }
        Ok(())
    }
}

/// Environment for fill expressions: only `i`, the flattened element index.
struct FillAccess {
    index: i32,
}

impl Access for FillAccess {
    fn read_scalar(&mut self, name: &str, span: &SourceSpan) -> Result<Scalar, ExecError> {
        if name == "i" {
            Ok(Scalar::Int(self.index))
        } else {
            Err(ExecError::new(
                span.clone(),
                ExecErrorKind::BadValue(format!(
                    "fill expressions may only reference `i`, found `{name}`"
                )),
            ))
        }
    }

    fn read_element(
        &mut self,
        _name: &str,
        _indices: &[i64],
        span: &SourceSpan,
    ) -> Result<Scalar, ExecError> {
        Err(ExecError::new(
            span.clone(),
            ExecErrorKind::BadValue("fill expressions may not index arrays".to_string()),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::BaseType;

    #[test]
    fn scalar_and_fill_bindings() {
        let b = Bindings::parse(r#"{"n": 8, "A": "i * 1.0 + 2.0"}"#, "in.json").unwrap();
        let mut n = VarStorage::new(BaseType::Int, vec![], false);
        b.apply("n", &mut n).unwrap();
        assert_eq!(n.cells[0], Some(Scalar::Int(8)));

        let mut a = VarStorage::new(BaseType::Double, vec![3], false);
        b.apply("A", &mut a).unwrap();
        assert_eq!(a.cells[2], Some(Scalar::Double(4.0)));

        let mut unbound = VarStorage::new(BaseType::Double, vec![2], false);
        b.apply("x", &mut unbound).unwrap();
        assert_eq!(unbound.cells[0], None);
    }

    #[test]
    fn malformed_inputs_rejected() {
        assert!(Bindings::parse("[1,2]", "in.json").is_err());
        assert!(Bindings::parse(r#"{"x": true}"#, "in.json").is_err());
    }
}
