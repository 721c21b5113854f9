//! Canonical query text. Printing then parsing yields an equal AST.

use std::fmt::Write;

use super::ast::*;
use super::parser::is_reserved;

pub fn print_query(q: &QueryAst) -> String {
    q.branches
        .iter()
        .map(print_single)
        .collect::<Vec<_>>()
        .join("\nUNION ALL\n")
}

fn print_single(q: &SingleQuery) -> String {
    let mut lines = Vec::new();
    for clause in &q.clauses {
        match clause {
            Clause::Match(m) => {
                let kw = if m.optional { "OPTIONAL MATCH" } else { "MATCH" };
                lines.push(format!("{kw} {}", print_pattern(&m.pattern)));
                if let Some(p) = &m.predicate {
                    lines.push(format!("WHERE {}", print_expr(p)));
                }
            }
            Clause::With(w) => {
                let d = if w.distinct { "DISTINCT " } else { "" };
                lines.push(format!("WITH {d}{}", print_items(&w.items)));
                if let Some(p) = &w.predicate {
                    lines.push(format!("WHERE {}", print_expr(p)));
                }
            }
            Clause::Return(r) => {
                let d = if r.distinct { "DISTINCT " } else { "" };
                lines.push(format!("RETURN {d}{}", print_items(&r.items)));
                if !r.order_by.is_empty() {
                    let keys: Vec<String> = r
                        .order_by
                        .iter()
                        .map(|s| format!("{}{}", print_expr(&s.expr), if s.descending { " DESC" } else { "" }))
                        .collect();
                    lines.push(format!("ORDER BY {}", keys.join(", ")));
                }
                if let Some(n) = r.limit {
                    lines.push(format!("LIMIT {n}"));
                }
            }
        }
    }
    lines.join("\n")
}

fn print_items(items: &[ProjectionItem]) -> String {
    items
        .iter()
        .map(|i| match &i.alias {
            Some(a) => format!("{} AS {}", print_expr(&i.expr), ident(a)),
            None => print_expr(&i.expr),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn print_pattern(p: &Pattern) -> String {
    let mut s = print_node(&p.start);
    for (rel, node) in &p.steps {
        s.push_str(&print_rel(rel));
        s.push_str(&print_node(node));
    }
    s
}

fn print_node(n: &NodePattern) -> String {
    let mut s = String::from("(");
    if let Some(v) = &n.var {
        s.push_str(&ident(v));
    }
    if let Some(l) = &n.label {
        s.push(':');
        s.push_str(&ident(l));
    }
    s.push(')');
    s
}

fn print_rel(r: &RelPattern) -> String {
    let mut inner = String::new();
    if let Some(v) = &r.var {
        inner.push_str(&ident(v));
    }
    if !r.types.is_empty() {
        inner.push(':');
        inner.push_str(&r.types.iter().map(|t| ident(t)).collect::<Vec<_>>().join("|"));
    }
    match r.direction {
        Direction::Right => format!("-[{inner}]->"),
        Direction::Left => format!("<-[{inner}]-"),
        Direction::Either => format!("-[{inner}]-"),
    }
}

/// Column name for an unaliased projection is this text.
pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, false);
    s
}

fn write_expr(out: &mut String, e: &Expr, nested: bool) {
    let compound = matches!(e, Expr::Compare { .. } | Expr::And(..) | Expr::Or(..) | Expr::Not(_));
    if nested && compound {
        out.push('(');
    }
    match e {
        Expr::Literal(l) => out.push_str(&print_literal(l)),
        Expr::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item, false);
            }
            out.push(']');
        }
        Expr::Var { name, .. } => out.push_str(&ident(name)),
        Expr::Property { base, key } => {
            write_expr(out, base, true);
            out.push('.');
            out.push_str(&ident(key));
        }
        Expr::Compare { op, lhs, rhs } => {
            write_expr(out, lhs, true);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, true);
        }
        Expr::And(a, b) | Expr::Or(a, b) => {
            write_expr(out, a, true);
            out.push_str(if matches!(e, Expr::And(..)) { " AND " } else { " OR " });
            write_expr(out, b, true);
        }
        Expr::Not(inner) => {
            out.push_str("NOT ");
            write_expr(out, inner, true);
        }
        Expr::Aggregate { func, distinct, arg, .. } => {
            out.push_str(match func {
                AggFunc::Collect => "COLLECT(",
                AggFunc::Count => "COUNT(",
            });
            if *distinct {
                out.push_str("DISTINCT ");
            }
            match arg {
                Some(a) => write_expr(out, a, false),
                None => out.push('*'),
            }
            out.push(')');
        }
        Expr::Any { var, list, predicate, .. } => {
            let _ = write!(out, "any({} IN ", ident(var));
            write_expr(out, list, true);
            out.push_str(" WHERE ");
            write_expr(out, predicate, false);
            out.push(')');
        }
    }
    if nested && compound {
        out.push(')');
    }
}

fn print_literal(l: &Literal) -> String {
    match l {
        Literal::Null => "null".into(),
        Literal::Bool(b) => b.to_string(),
        Literal::Int(i) => i.to_string(),
        Literal::Float(f) => {
            let s = format!("{f:?}");
            if s.contains(['.', 'e']) {
                s
            } else {
                format!("{s}.0")
            }
        }
        Literal::Str(s) => quote(s),
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

pub fn ident(name: &str) -> String {
    let mut chars = name.chars();
    let simple = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple && !is_reserved(name) {
        name.to_string()
    } else {
        format!("`{}`", name.replace('`', "``"))
    }
}
