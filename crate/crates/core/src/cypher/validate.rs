use std::collections::HashMap;

use super::ast::*;
use super::diag::{closest, DiagKind, Diagnostics};
use super::printer::print_expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Node,
    Rel,
    Value,
}

struct Checker<'a> {
    src: &'a str,
}

type Scope = HashMap<String, VarKind>;

/// Bind and type checks over a parsed query. Never touches a graph.
pub fn check(q: &QueryAst) -> Result<(), Diagnostics> {
    let c = Checker { src: &q.source.0 };
    let mut first_columns: Option<Vec<String>> = None;
    for branch in &q.branches {
        let columns = c.branch(branch)?;
        match &first_columns {
            None => first_columns = Some(columns),
            Some(expected) if *expected != columns => {
                return Err(c.err(
                    DiagKind::Bind,
                    branch.span,
                    format!(
                        "UNION ALL branches must return the same columns: [{}] vs [{}]",
                        expected.join(", "),
                        columns.join(", ")
                    ),
                ));
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Output column name for a projection item.
pub fn column_name(item: &ProjectionItem) -> String {
    item.alias.clone().unwrap_or_else(|| print_expr(&item.expr))
}

impl Checker<'_> {
    fn err(&self, kind: DiagKind, span: Span, msg: String) -> Diagnostics {
        Diagnostics::new(kind, self.src, span.start, msg)
    }

    fn branch(&self, q: &SingleQuery) -> Result<Vec<String>, Diagnostics> {
        let mut scope = Scope::new();
        for clause in &q.clauses {
            match clause {
                Clause::Match(m) => {
                    self.pattern(&m.pattern, &mut scope)?;
                    if let Some(p) = &m.predicate {
                        self.predicate(p, &scope)?;
                    }
                }
                Clause::With(w) => {
                    let next = self.projection(&w.items, &scope, true)?;
                    scope = next;
                    if let Some(p) = &w.predicate {
                        self.predicate(p, &scope)?;
                    }
                }
                Clause::Return(r) => {
                    let out = self.projection(&r.items, &scope, false)?;
                    let aggregating = r.distinct || r.items.iter().any(|i| i.expr.contains_aggregate());
                    let mut sort_scope = out.clone();
                    if !aggregating {
                        for (k, v) in &scope {
                            sort_scope.entry(k.clone()).or_insert(*v);
                        }
                    }
                    for s in &r.order_by {
                        if let Some(span) = first_aggregate(&s.expr) {
                            return Err(self.err(
                                DiagKind::Type,
                                span,
                                "aggregates are not allowed in ORDER BY; alias them in RETURN".into(),
                            ));
                        }
                        let matches_item = r.items.iter().any(|i| i.expr == s.expr);
                        if !matches_item {
                            self.expr(&s.expr, &sort_scope)?;
                        }
                    }
                    return Ok(r.items.iter().map(column_name).collect());
                }
            }
        }
        Err(self.err(DiagKind::Parse, q.span, "query must end with RETURN".into()))
    }

    fn pattern(&self, p: &Pattern, scope: &mut Scope) -> Result<(), Diagnostics> {
        let mut bind = |name: &Option<String>, kind: VarKind, span: Span| -> Result<(), Diagnostics> {
            let Some(name) = name else { return Ok(()) };
            match scope.get(name) {
                Some(existing) if *existing != kind => Err(self.err(
                    DiagKind::Bind,
                    span,
                    format!("variable '{name}' is already bound to a different kind of value"),
                )),
                _ => {
                    scope.insert(name.clone(), kind);
                    Ok(())
                }
            }
        };
        for n in p.nodes() {
            bind(&n.var, VarKind::Node, n.span)?;
        }
        for r in p.rels() {
            bind(&r.var, VarKind::Rel, r.span)?;
        }
        Ok(())
    }

    fn projection(&self, items: &[ProjectionItem], scope: &Scope, is_with: bool) -> Result<Scope, Diagnostics> {
        let mut out = Scope::new();
        let mut seen: Vec<String> = Vec::new();
        for item in items {
            self.expr(&item.expr, scope)?;
            self.aggregate_shape(&item.expr)?;
            if is_with && item.alias.is_none() && !matches!(item.expr, Expr::Var { .. }) {
                return Err(self.err(
                    DiagKind::Bind,
                    item.span,
                    format!("expression '{}' in WITH must be aliased with AS", print_expr(&item.expr)),
                ));
            }
            let name = column_name(item);
            if seen.contains(&name) {
                return Err(self.err(DiagKind::Bind, item.span, format!("duplicate column name '{name}'")));
            }
            let kind = match &item.expr {
                Expr::Var { name, .. } => scope.get(name).copied().unwrap_or(VarKind::Value),
                _ => VarKind::Value,
            };
            out.insert(name.clone(), kind);
            seen.push(name);
        }
        Ok(out)
    }

    fn predicate(&self, e: &Expr, scope: &Scope) -> Result<(), Diagnostics> {
        if let Some(span) = first_aggregate(e) {
            return Err(self.err(DiagKind::Type, span, "aggregates are not allowed in WHERE".into()));
        }
        self.expr(e, scope)
    }

    fn expr(&self, e: &Expr, scope: &Scope) -> Result<(), Diagnostics> {
        match e {
            Expr::Literal(_) => Ok(()),
            Expr::List(items) => items.iter().try_for_each(|i| self.expr(i, scope)),
            Expr::Var { name, span } => {
                if scope.contains_key(name) {
                    Ok(())
                } else {
                    let suggestion = closest(name, scope.keys().map(String::as_str)).map(|c| format!("did you mean {c}?"));
                    Err(self
                        .err(DiagKind::Bind, *span, format!("variable '{name}' is not defined"))
                        .with_suggestion(suggestion))
                }
            }
            Expr::Property { base, .. } => self.expr(base, scope),
            Expr::Compare { lhs, rhs, .. } | Expr::And(lhs, rhs) | Expr::Or(lhs, rhs) => {
                self.expr(lhs, scope)?;
                self.expr(rhs, scope)
            }
            Expr::Not(inner) => self.expr(inner, scope),
            Expr::Aggregate { arg, .. } => {
                if let Some(a) = arg {
                    if let Some(inner) = first_aggregate(a) {
                        return Err(self.err(DiagKind::Type, inner, "aggregates cannot be nested".into()));
                    }
                    self.expr(a, scope)?;
                }
                Ok(())
            }
            Expr::Any { var, list, predicate, .. } => {
                self.expr(list, scope)?;
                let mut inner = scope.clone();
                inner.insert(var.clone(), VarKind::Value);
                self.expr(predicate, &inner)
            }
        }
    }

    /// An expression holding an aggregate may not also read variables
    /// outside of it, since those would be neither grouped nor aggregated.
    fn aggregate_shape(&self, e: &Expr) -> Result<(), Diagnostics> {
        if !e.contains_aggregate() || matches!(e, Expr::Aggregate { .. }) {
            return Ok(());
        }
        if let Some((name, span)) = bare_var_outside_aggregate(e, &mut Vec::new()) {
            return Err(self.err(
                DiagKind::Type,
                span,
                format!("'{name}' is mixed with an aggregate in one expression; project it as its own column"),
            ));
        }
        Ok(())
    }
}

fn first_aggregate(e: &Expr) -> Option<Span> {
    let mut found = None;
    e.walk(&mut |x| {
        if let (None, Expr::Aggregate { span, .. }) = (&found, x) {
            found = Some(*span);
        }
    });
    found
}

fn bare_var_outside_aggregate(e: &Expr, locals: &mut Vec<String>) -> Option<(String, Span)> {
    match e {
        Expr::Aggregate { .. } | Expr::Literal(_) => None,
        Expr::Var { name, span } => (!locals.contains(name)).then(|| (name.clone(), *span)),
        Expr::List(items) => items.iter().find_map(|i| bare_var_outside_aggregate(i, locals)),
        Expr::Property { base, .. } => bare_var_outside_aggregate(base, locals),
        Expr::Compare { lhs, rhs, .. } | Expr::And(lhs, rhs) | Expr::Or(lhs, rhs) => {
            bare_var_outside_aggregate(lhs, locals).or_else(|| bare_var_outside_aggregate(rhs, locals))
        }
        Expr::Not(inner) => bare_var_outside_aggregate(inner, locals),
        Expr::Any { var, list, predicate, .. } => bare_var_outside_aggregate(list, locals).or_else(|| {
            locals.push(var.clone());
            let r = bare_var_outside_aggregate(predicate, locals);
            locals.pop();
            r
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cypher::parse;

    fn validate(src: &str) -> Result<(), Diagnostics> {
        check(&parse(src)?)
    }

    #[test]
    fn unbound_variable_is_named() {
        let d = validate("MATCH (n) RETURN m").unwrap_err();
        assert_eq!(d.kind, DiagKind::Bind);
        assert!(d.message.contains("'m'"));
        assert_eq!(d.offset, 17);
    }

    #[test]
    fn return_literal_is_ok() {
        validate("RETURN 1").unwrap();
    }

    #[test]
    fn with_rescopes() {
        validate("MATCH (a)-[r]-(b) WITH DISTINCT a RETURN a.name").unwrap();
        let d = validate("MATCH (a)-[r]-(b) WITH a RETURN b").unwrap_err();
        assert_eq!(d.kind, DiagKind::Bind);
        assert!(validate("MATCH (a) WITH a.name RETURN 1").is_err());
    }

    #[test]
    fn aggregate_rules() {
        validate("MATCH (d)-[r]-() RETURN d.name AS n, COUNT(r) AS c ORDER BY c DESC").unwrap();
        let e = validate("MATCH (d)-[r]-() WHERE COUNT(r) > 1 RETURN d").unwrap_err();
        assert_eq!(e.kind, DiagKind::Type);
        let e = validate("MATCH (d)-[r]-() RETURN COUNT(COLLECT(r)) AS x").unwrap_err();
        assert_eq!(e.kind, DiagKind::Type);
        let e = validate("MATCH (d)-[r]-() RETURN d.name = COUNT(r) AS x").unwrap_err();
        assert_eq!(e.kind, DiagKind::Type);
        validate("MATCH (d)-[r]-() RETURN COUNT(r) = 3 AS x").unwrap();
        validate("MATCH (d) RETURN any(x IN COLLECT(d.name) WHERE x CONTAINS 'a') AS x").unwrap();
    }

    #[test]
    fn union_columns_must_match() {
        validate("MATCH (a) RETURN a.name AS x UNION ALL MATCH (b) RETURN b.name AS x").unwrap();
        let e = validate("MATCH (a) RETURN a.name AS x UNION ALL MATCH (b) RETURN b.name AS y").unwrap_err();
        assert_eq!(e.kind, DiagKind::Bind);
    }

    #[test]
    fn any_binds_its_variable_locally() {
        validate("MATCH (d) WHERE any(k IN ['a'] WHERE d.name CONTAINS k) RETURN d").unwrap();
        assert!(validate("MATCH (d) WHERE any(k IN ['a'] WHERE d.name CONTAINS k) RETURN k").is_err());
    }

    #[test]
    fn node_and_relationship_names_cannot_clash() {
        assert!(validate("MATCH (a)-[a]-(b) RETURN a").is_err());
    }

    #[test]
    fn suggestion_for_typo() {
        let e = validate("MATCH (drug) RETURN durg.name").unwrap_err();
        assert_eq!(e.suggestion.as_deref(), Some("did you mean drug?"));
    }
}
