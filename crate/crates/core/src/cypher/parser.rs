use std::sync::Arc;

use super::ast::*;
use super::diag::{closest, DiagKind, Diagnostics};
use super::lexer::{tokenize, Tok, Token};

pub(crate) const RESERVED: &[&str] = &[
    "MATCH", "OPTIONAL", "WHERE", "WITH", "RETURN", "DISTINCT", "ORDER", "BY", "ASC", "ASCENDING", "DESC",
    "DESCENDING", "LIMIT", "UNION", "ALL", "AS", "AND", "OR", "NOT", "IN", "CONTAINS", "TRUE", "FALSE", "NULL",
];

const CLAUSE_WORDS: &[&str] = &["MATCH", "OPTIONAL MATCH", "WITH", "RETURN"];

pub fn parse(src: &str) -> Result<QueryAst, Diagnostics> {
    let tokens = tokenize(src)?;
    let mut p = Parser { src, tokens, pos: 0 };
    p.query()
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostics>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> Diagnostics {
        Diagnostics::new(DiagKind::Parse, self.src, self.span().start, message)
    }

    fn expected(&self, what: &str) -> Diagnostics {
        self.error(format!("expected {what}, found {}", self.peek().describe()))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn is_kw_at(&self, n: usize, kw: &str) -> bool {
        matches!(self.peek_at(n), Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.expected(kw))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.expected(&tok.describe()))
        }
    }

    /// Variable or alias: a non-reserved word or a backtick name.
    fn name(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => Ok((s, self.bump().span)),
            Tok::Quoted(s) => Ok((s, self.bump().span)),
            _ => Err(self.expected(what)),
        }
    }

    /// Label, relation type or property key: any word.
    fn symbolic(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.expected(what)),
        }
    }

    fn query(&mut self) -> PResult<QueryAst> {
        if *self.peek() == Tok::Eof {
            return Err(self.error("empty query"));
        }
        let mut branches = vec![self.single()?];
        while self.is_kw("UNION") {
            self.bump();
            if !self.eat_kw("ALL") {
                return Err(self.expected("ALL (only UNION ALL is supported)"));
            }
            branches.push(self.single()?);
        }
        self.eat(&Tok::Semicolon);
        if *self.peek() != Tok::Eof {
            return Err(self.expected("end of query"));
        }
        Ok(QueryAst {
            branches,
            source: Source(Arc::from(self.src)),
        })
    }

    fn single(&mut self) -> PResult<SingleQuery> {
        let start = self.span();
        let mut clauses = Vec::new();
        loop {
            if self.is_kw("MATCH") || (self.is_kw("OPTIONAL") && self.is_kw_at(1, "MATCH")) {
                clauses.push(Clause::Match(self.match_clause()?));
            } else if self.is_kw("WITH") {
                clauses.push(Clause::With(self.with_clause()?));
            } else if self.is_kw("RETURN") {
                clauses.push(Clause::Return(self.return_clause()?));
                break;
            } else if clauses.is_empty() || !matches!(self.peek(), Tok::Eof | Tok::Semicolon) {
                return Err(self.clause_error());
            } else {
                return Err(self.error("query must end with RETURN"));
            }
        }
        Ok(SingleQuery { clauses, span: start.to(self.prev_span()) })
    }

    fn clause_error(&self) -> Diagnostics {
        let found = match self.peek() {
            Tok::Ident(s) => Some(s.to_uppercase()),
            _ => None,
        };
        let mut d = self.expected("MATCH, OPTIONAL MATCH, WITH or RETURN");
        if let Some(word) = found {
            let unsupported = ["CREATE", "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "UNWIND", "CALL", "FOREACH", "LOAD"];
            if unsupported.contains(&word.as_str()) {
                d.message = format!("{word} is not supported; queries are read-only");
            } else {
                d = d.with_suggestion(closest(&word, CLAUSE_WORDS.iter().copied()).map(|c| format!("did you mean {c}?")));
            }
        }
        d
    }

    fn match_clause(&mut self) -> PResult<Match> {
        let start = self.span();
        let optional = self.eat_kw("OPTIONAL");
        self.expect_kw("MATCH")?;
        let pattern = self.pattern()?;
        if *self.peek() == Tok::Comma {
            return Err(self.error("comma-separated patterns are not supported; use a second MATCH"));
        }
        let predicate = if self.eat_kw("WHERE") { Some(self.expr()?) } else { None };
        Ok(Match { optional, pattern, predicate, span: start.to(self.prev_span()) })
    }

    fn with_clause(&mut self) -> PResult<With> {
        let start = self.span();
        self.expect_kw("WITH")?;
        let distinct = self.eat_kw("DISTINCT");
        let items = self.items()?;
        let predicate = if self.eat_kw("WHERE") { Some(self.expr()?) } else { None };
        Ok(With { distinct, items, predicate, span: start.to(self.prev_span()) })
    }

    fn return_clause(&mut self) -> PResult<Return> {
        let start = self.span();
        self.expect_kw("RETURN")?;
        let distinct = self.eat_kw("DISTINCT");
        let items = self.items()?;
        let mut order_by = Vec::new();
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let expr = self.expr()?;
                let descending = if self.eat_kw("DESC") || self.eat_kw("DESCENDING") {
                    true
                } else {
                    let _ = self.eat_kw("ASC") || self.eat_kw("ASCENDING");
                    false
                };
                order_by.push(SortItem { expr, descending });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let limit = if self.eat_kw("LIMIT") {
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    Some(n)
                }
                _ => return Err(self.expected("a non-negative integer after LIMIT")),
            }
        } else {
            None
        };
        Ok(Return { distinct, items, order_by, limit, span: start.to(self.prev_span()) })
    }

    fn items(&mut self) -> PResult<Vec<ProjectionItem>> {
        let mut items = Vec::new();
        loop {
            let start = self.span();
            if *self.peek() == Tok::Star {
                return Err(self.error("'*' projections are not supported; list the columns"));
            }
            let expr = self.expr()?;
            let alias = if self.eat_kw("AS") { Some(self.name("alias")?.0) } else { None };
            items.push(ProjectionItem { expr, alias, span: start.to(self.prev_span()) });
            if !self.eat(&Tok::Comma) {
                return Ok(items);
            }
        }
    }

    fn pattern(&mut self) -> PResult<Pattern> {
        let start = self.node_pattern()?;
        let mut steps = Vec::new();
        while matches!(self.peek(), Tok::Minus | Tok::Lt) {
            let rel = self.rel_pattern()?;
            let node = self.node_pattern()?;
            steps.push((rel, node));
        }
        Ok(Pattern { start, steps })
    }

    fn node_pattern(&mut self) -> PResult<NodePattern> {
        let start = self.expect(&Tok::LParen)?;
        let var = match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => Some(self.name("variable")?.0),
            Tok::Quoted(_) => Some(self.name("variable")?.0),
            _ => None,
        };
        let label = if self.eat(&Tok::Colon) {
            let l = self.symbolic("label")?;
            if *self.peek() == Tok::Colon {
                return Err(self.error("multiple labels are not supported"));
            }
            Some(l)
        } else {
            None
        };
        if *self.peek() == Tok::LBrace {
            return Err(self.error("property maps are not supported; use WHERE"));
        }
        let end = self.expect(&Tok::RParen)?;
        Ok(NodePattern { var, label, span: start.to(end) })
    }

    fn rel_pattern(&mut self) -> PResult<RelPattern> {
        let start = self.span();
        let left = self.eat(&Tok::Lt);
        self.expect(&Tok::Minus)?;
        let mut var = None;
        let mut types = Vec::new();
        if self.eat(&Tok::LBracket) {
            var = match self.peek() {
                Tok::Ident(s) if !is_reserved(s) => Some(self.name("variable")?.0),
                Tok::Quoted(_) => Some(self.name("variable")?.0),
                _ => None,
            };
            if self.eat(&Tok::Colon) {
                types.push(self.symbolic("relationship type")?);
                while self.eat(&Tok::Pipe) {
                    self.eat(&Tok::Colon);
                    types.push(self.symbolic("relationship type")?);
                }
            }
            if *self.peek() == Tok::Star {
                return Err(self.error("variable-length relationships are not supported"));
            }
            if *self.peek() == Tok::LBrace {
                return Err(self.error("property maps are not supported; use WHERE"));
            }
            self.expect(&Tok::RBracket)?;
        }
        self.expect(&Tok::Minus)?;
        let right = self.eat(&Tok::Gt);
        let direction = match (left, right) {
            (false, true) => Direction::Right,
            (true, false) => Direction::Left,
            (false, false) => Direction::Either,
            (true, true) => {
                return Err(Diagnostics::new(
                    DiagKind::Parse,
                    self.src,
                    start.start,
                    "a relationship cannot point both ways",
                ))
            }
        };
        Ok(RelPattern { var, types, direction, span: start.to(self.prev_span()) })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat_kw("OR") {
            let rhs = self.and_expr()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.eat_kw("AND") {
            let rhs = self.not_expr()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.postfix()?;
        let op = match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Neq => CmpOp::Neq,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Ident(s) if s.eq_ignore_ascii_case("IN") => CmpOp::In,
            Tok::Ident(s) if s.eq_ignore_ascii_case("CONTAINS") => CmpOp::Contains,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.postfix()?;
        Ok(Expr::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) })
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while self.eat(&Tok::Dot) {
            let key = self.symbolic("property name")?;
            e = Expr::Property { base: Box::new(e), key };
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Literal(Literal::Str(s)))
            }
            Tok::Int(n) => {
                self.bump();
                i64::try_from(n)
                    .map(|v| Expr::Literal(Literal::Int(v)))
                    .map_err(|_| Diagnostics::new(DiagKind::Parse, self.src, start.start, "integer out of range"))
            }
            Tok::Float(f) => {
                self.bump();
                Ok(Expr::Literal(Literal::Float(f)))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Int(n) if n <= i64::MAX as u64 + 1 => {
                        self.bump();
                        Ok(Expr::Literal(Literal::Int((n as i64).wrapping_neg())))
                    }
                    Tok::Float(f) => {
                        self.bump();
                        Ok(Expr::Literal(Literal::Float(-f)))
                    }
                    _ => Err(self.error("arithmetic is not supported; '-' may only prefix a number")),
                }
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Tok::RBracket) {
                            break;
                        }
                        if !self.eat(&Tok::Comma) {
                            return Err(self.expected("',' or ']'"));
                        }
                    }
                }
                Ok(Expr::List(items))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => Err(self.error("map literals are not supported")),
            Tok::Ident(word) if *self.peek_at(1) == Tok::LParen => self.function(&word),
            Tok::Ident(word) if word.eq_ignore_ascii_case("TRUE") => {
                self.bump();
                Ok(Expr::Literal(Literal::Bool(true)))
            }
            Tok::Ident(word) if word.eq_ignore_ascii_case("FALSE") => {
                self.bump();
                Ok(Expr::Literal(Literal::Bool(false)))
            }
            Tok::Ident(word) if word.eq_ignore_ascii_case("NULL") => {
                self.bump();
                Ok(Expr::Literal(Literal::Null))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let (name, span) = self.name("expression")?;
                Ok(Expr::Var { name, span })
            }
            _ => Err(self.expected("expression")),
        }
    }

    fn function(&mut self, word: &str) -> PResult<Expr> {
        let start = self.span();
        let upper = word.to_uppercase();
        let func = match upper.as_str() {
            "COLLECT" => Some(AggFunc::Collect),
            "COUNT" => Some(AggFunc::Count),
            "ANY" => None,
            _ => {
                let known = ["collect", "count", "any"];
                return Err(self
                    .error(format!("unknown function '{word}'"))
                    .with_suggestion(closest(word, known).map(|c| format!("did you mean {c}?"))));
            }
        };
        self.bump();
        self.expect(&Tok::LParen)?;
        let Some(func) = func else {
            let (var, _) = self.name("variable")?;
            self.expect_kw("IN")?;
            let list = self.postfix()?;
            self.expect_kw("WHERE")?;
            let predicate = self.expr()?;
            let end = self.expect(&Tok::RParen)?;
            return Ok(Expr::Any {
                var,
                list: Box::new(list),
                predicate: Box::new(predicate),
                span: start.to(end),
            });
        };
        let distinct = self.eat_kw("DISTINCT");
        let arg = if func == AggFunc::Count && !distinct && *self.peek() == Tok::Star {
            self.bump();
            None
        } else {
            Some(Box::new(self.expr()?))
        };
        let end = self.expect(&Tok::RParen)?;
        Ok(Expr::Aggregate { func, distinct, arg, span: start.to(end) })
    }
}

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}
