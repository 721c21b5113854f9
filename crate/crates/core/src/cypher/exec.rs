use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use indexmap::{IndexMap, IndexSet};
use serde::Serialize;

use super::ast::*;
use super::diag::Diagnostics;
use super::validate::{check, column_name};
use super::value::{equals, total_cmp, Mismatch, ResultTable, Val};
use crate::graph::{EdgeKey, KnowledgeGraph, NodeId};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExecStats {
    /// Comparisons whose operands had incompatible kinds. Each one
    /// excluded the row it was evaluated for.
    pub type_warnings: usize,
    /// Pattern matches found across all MATCH clauses.
    pub pattern_matches: usize,
}

pub fn execute(ast: &QueryAst, graph: &KnowledgeGraph) -> Result<ResultTable, Diagnostics> {
    execute_with_stats(ast, graph).map(|(t, _)| t)
}

pub fn execute_with_stats(ast: &QueryAst, graph: &KnowledgeGraph) -> Result<(ResultTable, ExecStats), Diagnostics> {
    check(ast)?;
    let ex = Executor {
        graph,
        warnings: Cell::new(0),
        flagged: Cell::new(false),
        matches: Cell::new(0),
    };
    let mut table: Option<ResultTable> = None;
    for branch in &ast.branches {
        let t = ex.branch(branch);
        match &mut table {
            None => table = Some(t),
            Some(acc) => acc.rows.extend(t.rows),
        }
    }
    let stats = ExecStats {
        type_warnings: ex.warnings.get(),
        pattern_matches: ex.matches.get(),
    };
    if stats.type_warnings > 0 {
        log::warn!("cypher: {} comparisons had mismatched operand types", stats.type_warnings);
    }
    Ok((table.expect("parser guarantees one branch"), stats))
}

#[derive(Debug, Clone, Default)]
struct Frame {
    names: Vec<String>,
    index: HashMap<String, usize>,
    rows: Vec<Vec<Val>>,
}

impl Frame {
    fn unit() -> Self {
        Frame { rows: vec![Vec::new()], ..Default::default() }
    }

    fn with_names(names: Vec<String>) -> Self {
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        Frame { names, index, rows: Vec::new() }
    }
}

#[derive(Clone, Copy)]
enum Scope<'a> {
    Empty,
    Row { index: &'a HashMap<String, usize>, row: &'a [Val], parent: Option<&'a Scope<'a>> },
    Local { name: &'a str, value: &'a Val, parent: &'a Scope<'a> },
}

impl<'a> Scope<'a> {
    fn row(frame: &'a Frame, row: &'a [Val]) -> Self {
        Scope::Row { index: &frame.index, row, parent: None }
    }

    fn lookup(&self, name: &str) -> Option<&'a Val> {
        match *self {
            Scope::Empty => None,
            Scope::Row { index, row, parent } => match index.get(name) {
                Some(&i) => Some(&row[i]),
                None => parent.and_then(|p| p.lookup(name)),
            },
            Scope::Local { name: n, value, parent } => {
                if n == name {
                    Some(value)
                } else {
                    parent.lookup(name)
                }
            }
        }
    }
}

/// Rows of the input frame that form one aggregation group.
struct Group<'a> {
    frame: &'a Frame,
    rows: &'a [usize],
}

struct Executor<'g> {
    graph: &'g KnowledgeGraph,
    warnings: Cell<usize>,
    flagged: Cell<bool>,
    matches: Cell<usize>,
}

impl Executor<'_> {
    fn mismatch(&self) {
        self.warnings.set(self.warnings.get() + 1);
        self.flagged.set(true);
    }

    fn branch(&self, q: &SingleQuery) -> ResultTable {
        let mut frame = Frame::unit();
        for clause in &q.clauses {
            match clause {
                Clause::Match(m) => frame = self.match_clause(frame, m),
                Clause::With(w) => {
                    frame = self.project(&frame, &w.items, w.distinct).0;
                    if let Some(p) = &w.predicate {
                        let keep: Vec<bool> = frame.rows.iter().map(|r| self.passes(p, &Scope::row(&frame, r))).collect();
                        let mut it = keep.into_iter();
                        frame.rows.retain(|_| it.next().unwrap());
                    }
                }
                Clause::Return(r) => return self.return_clause(frame, r),
            }
        }
        unreachable!("validated branches end in RETURN")
    }

    fn passes(&self, pred: &Expr, scope: &Scope) -> bool {
        self.flagged.set(false);
        let v = self.eval(pred, scope, None);
        let ok = self.truthy(&v);
        ok && !self.flagged.get()
    }

    fn truthy(&self, v: &Val) -> bool {
        match v {
            Val::Bool(b) => *b,
            Val::Null => false,
            _ => {
                self.mismatch();
                false
            }
        }
    }

    // ---- MATCH ----

    fn match_clause(&self, input: Frame, m: &Match) -> Frame {
        let mut new_vars: Vec<String> = Vec::new();
        let mut push = |v: &Option<String>| {
            if let Some(v) = v {
                if !input.index.contains_key(v) && !new_vars.contains(v) {
                    new_vars.push(v.clone());
                }
            }
        };
        push(&m.pattern.start.var);
        for (r, n) in &m.pattern.steps {
            push(&r.var);
            push(&n.var);
        }
        let mut names = input.names.clone();
        names.extend(new_vars.iter().cloned());
        let mut out = Frame::with_names(names);
        let plan = PatternPlan::new(&m.pattern);
        for row in &input.rows {
            let scope = Scope::row(&input, row);
            let hints = m.predicate.as_ref().map(|p| self.hints(p, &m.pattern, &scope)).unwrap_or_default();
            let found = self.find(&plan, &scope, &hints);
            self.matches.set(self.matches.get() + found.len());
            let mut produced = false;
            for (nodes, rels) in found {
                let mut new_row = row.clone();
                for v in &new_vars {
                    new_row.push(plan.value_of(v, &nodes, &rels));
                }
                if let Some(p) = &m.predicate {
                    if !self.passes(p, &Scope::row(&out, &new_row)) {
                        continue;
                    }
                }
                produced = true;
                out.rows.push(new_row);
            }
            if m.optional && !produced {
                let mut new_row = row.clone();
                new_row.extend(new_vars.iter().map(|_| Val::Null));
                out.rows.push(new_row);
            }
        }
        out
    }

    /// Candidate restrictions derived from `v.name IN [...]` and
    /// `v.name = '...'` conjuncts. They only narrow the search; the full
    /// predicate is still applied to every match.
    fn hints(&self, pred: &Expr, pattern: &Pattern, scope: &Scope) -> HashMap<String, BTreeSet<NodeId>> {
        let mut conjuncts = Vec::new();
        flatten_and(pred, &mut conjuncts);
        let pattern_nodes: Vec<&str> = pattern.nodes().filter_map(|n| n.var.as_deref()).collect();
        let mut out: HashMap<String, BTreeSet<NodeId>> = HashMap::new();
        for c in conjuncts {
            let Expr::Compare { op, lhs, rhs } = c else { continue };
            let Expr::Property { base, key } = lhs.as_ref() else { continue };
            let Expr::Var { name, .. } = base.as_ref() else { continue };
            if key != "name" || !pattern_nodes.contains(&name.as_str()) || scope.lookup(name).is_some() {
                continue;
            }
            let strings: Option<Vec<String>> = match (op, rhs.as_ref()) {
                (CmpOp::Eq, Expr::Literal(Literal::Str(s))) => Some(vec![s.clone()]),
                (CmpOp::In, Expr::List(items)) => items
                    .iter()
                    .map(|i| match i {
                        Expr::Literal(Literal::Str(s)) => Some(s.clone()),
                        _ => None,
                    })
                    .collect(),
                (CmpOp::In, Expr::Var { name: list_var, .. }) if !pattern_nodes.contains(&list_var.as_str()) => {
                    match scope.lookup(list_var) {
                        Some(Val::List(items)) => items
                            .iter()
                            .map(|v| match v {
                                Val::Str(s) => Some(s.to_string()),
                                _ => None,
                            })
                            .collect(),
                        _ => None,
                    }
                }
                _ => None,
            };
            let Some(strings) = strings else { continue };
            let ids: BTreeSet<NodeId> = strings.iter().filter_map(|s| NodeId::parse(s).ok()).collect();
            out.entry(name.clone())
                .and_modify(|existing| existing.retain(|i| ids.contains(i)))
                .or_insert(ids);
        }
        out
    }

    fn find(&self, plan: &PatternPlan, scope: &Scope, hints: &HashMap<String, BTreeSet<NodeId>>) -> Vec<(Vec<NodeId>, Vec<EdgeKey>)> {
        let n = plan.nodes.len();
        let mut fixed_nodes: Vec<Option<NodeId>> = vec![None; n];
        for (i, node) in plan.nodes.iter().enumerate() {
            if let Some(v) = &node.var {
                match scope.lookup(v) {
                    None => {}
                    Some(Val::Node(id)) => fixed_nodes[i] = Some(id.clone()),
                    Some(Val::Null) => return Vec::new(),
                    Some(_) => {
                        self.warnings.set(self.warnings.get() + 1);
                        return Vec::new();
                    }
                }
            }
        }
        let mut fixed_rels: Vec<Option<EdgeKey>> = vec![None; plan.rels.len()];
        for (i, rel) in plan.rels.iter().enumerate() {
            if let Some(v) = &rel.var {
                match scope.lookup(v) {
                    None => {}
                    Some(Val::Rel(k)) => fixed_rels[i] = Some(k.clone()),
                    Some(Val::Null) => return Vec::new(),
                    Some(_) => {
                        self.warnings.set(self.warnings.get() + 1);
                        return Vec::new();
                    }
                }
            }
        }
        let node_hints: Vec<Option<&BTreeSet<NodeId>>> = plan
            .nodes
            .iter()
            .map(|node| node.var.as_ref().and_then(|v| hints.get(v)))
            .collect();

        let anchor = (0..n)
            .find(|&i| fixed_nodes[i].is_some())
            .or_else(|| (0..n).filter(|&i| node_hints[i].is_some()).min_by_key(|&i| node_hints[i].unwrap().len()))
            .or_else(|| {
                (0..n)
                    .filter_map(|i| plan.nodes[i].label.as_ref().map(|l| (i, self.graph.nodes_in_namespace(l).count())))
                    .min_by_key(|&(_, c)| c)
                    .map(|(i, _)| i)
            })
            .unwrap_or(0);
        let candidates: Vec<NodeId> = if let Some(id) = &fixed_nodes[anchor] {
            vec![id.clone()]
        } else if let Some(h) = node_hints[anchor] {
            h.iter().filter(|id| self.graph.contains_node(id)).cloned().collect()
        } else if let Some(l) = &plan.nodes[anchor].label {
            self.graph.nodes_in_namespace(l).cloned().collect()
        } else {
            self.graph.nodes().cloned().collect()
        };

        let mut steps = Vec::new();
        for p in anchor..n - 1 {
            steps.push((p, p + 1));
        }
        for p in (1..=anchor).rev() {
            steps.push((p, p - 1));
        }
        let search = Search {
            graph: self.graph,
            plan,
            fixed_nodes: &fixed_nodes,
            fixed_rels: &fixed_rels,
            hints: &node_hints,
            steps: &steps,
        };
        let mut out = Vec::new();
        let mut nodes: Vec<Option<NodeId>> = vec![None; n];
        let mut rels: Vec<Option<EdgeKey>> = vec![None; plan.rels.len()];
        for c in candidates {
            if search.node_ok(anchor, &c, &nodes) {
                nodes[anchor] = Some(c);
                search.extend(0, &mut nodes, &mut rels, &mut out);
                nodes[anchor] = None;
            }
        }
        out.sort();
        out
    }

    // ---- projection ----

    /// Returns the projected frame and, for non-aggregating projections,
    /// nothing else; aggregation collapses rows so no input mapping exists.
    fn project(&self, input: &Frame, items: &[ProjectionItem], distinct: bool) -> (Frame, bool) {
        let names: Vec<String> = items.iter().map(column_name).collect();
        let mut out = Frame::with_names(names);
        let aggregating = items.iter().any(|i| i.expr.contains_aggregate());
        if aggregating {
            let key_items: Vec<usize> = (0..items.len()).filter(|&i| !items[i].expr.contains_aggregate()).collect();
            let mut groups: IndexMap<Vec<Val>, Vec<usize>> = IndexMap::new();
            for (ri, row) in input.rows.iter().enumerate() {
                let scope = Scope::row(input, row);
                self.flagged.set(false);
                let key: Vec<Val> = key_items.iter().map(|&i| self.eval(&items[i].expr, &scope, None)).collect();
                groups.entry(key).or_default().push(ri);
            }
            if input.rows.is_empty() && key_items.is_empty() {
                groups.insert(Vec::new(), Vec::new());
            }
            for (key, rows) in &groups {
                let group = Group { frame: input, rows };
                let mut key_iter = key.iter();
                let row: Vec<Val> = items
                    .iter()
                    .map(|item| {
                        if item.expr.contains_aggregate() {
                            self.eval(&item.expr, &Scope::Empty, Some(&group))
                        } else {
                            key_iter.next().expect("one key per grouping item").clone()
                        }
                    })
                    .collect();
                out.rows.push(row);
            }
        } else {
            for row in &input.rows {
                let scope = Scope::row(input, row);
                self.flagged.set(false);
                out.rows.push(items.iter().map(|i| self.eval(&i.expr, &scope, None)).collect());
            }
        }
        let mapped = !aggregating && !distinct;
        if distinct {
            let unique: IndexSet<Vec<Val>> = out.rows.drain(..).collect();
            out.rows = unique.into_iter().collect();
        }
        (out, mapped)
    }

    fn return_clause(&self, input: Frame, r: &Return) -> ResultTable {
        let (mut out, mapped) = self.project(&input, &r.items, r.distinct);
        if !r.order_by.is_empty() {
            let keys: Vec<Vec<Val>> = out
                .rows
                .iter()
                .enumerate()
                .map(|(ri, row)| {
                    let base = Scope::row(&input, if mapped { &input.rows[ri] } else { &[] });
                    let scope = Scope::Row {
                        index: &out.index,
                        row,
                        parent: if mapped { Some(&base) } else { None },
                    };
                    r.order_by
                        .iter()
                        .map(|s| match r.items.iter().position(|i| i.expr == s.expr) {
                            Some(col) => row[col].clone(),
                            None => self.eval(&s.expr, &scope, None),
                        })
                        .collect()
                })
                .collect();
            let mut order: Vec<usize> = (0..out.rows.len()).collect();
            order.sort_by(|&a, &b| {
                for (k, s) in r.order_by.iter().enumerate() {
                    let o = total_cmp(&keys[a][k], &keys[b][k]);
                    let o = if s.descending { o.reverse() } else { o };
                    if o != Ordering::Equal {
                        return o;
                    }
                }
                cmp_rows(&out.rows[a], &out.rows[b]).then(a.cmp(&b))
            });
            let mut rows: Vec<Option<Vec<Val>>> = out.rows.into_iter().map(Some).collect();
            out.rows = order.into_iter().map(|i| rows[i].take().unwrap()).collect();
        }
        if let Some(limit) = r.limit {
            out.rows.truncate(usize::try_from(limit).unwrap_or(usize::MAX));
        }
        ResultTable {
            columns: out.names,
            rows: out.rows.iter().map(|row| row.iter().map(Val::to_value).collect()).collect(),
        }
    }

    // ---- expressions ----

    fn eval(&self, e: &Expr, scope: &Scope, group: Option<&Group>) -> Val {
        match e {
            Expr::Literal(l) => match l {
                Literal::Null => Val::Null,
                Literal::Bool(b) => Val::Bool(*b),
                Literal::Int(i) => Val::Int(*i),
                Literal::Float(f) => Val::Float(*f),
                Literal::Str(s) => Val::str(s),
            },
            Expr::List(items) => Val::List(items.iter().map(|i| self.eval(i, scope, group)).collect()),
            Expr::Var { name, .. } => scope.lookup(name).cloned().unwrap_or(Val::Null),
            Expr::Property { base, key } => {
                let b = self.eval(base, scope, group);
                self.property(&b, key)
            }
            Expr::Compare { op, lhs, rhs } => {
                let l = self.eval(lhs, scope, group);
                let r = self.eval(rhs, scope, group);
                match compare(*op, &l, &r) {
                    Ok(b) => Val::Bool(b),
                    Err(Mismatch) => {
                        self.mismatch();
                        Val::Null
                    }
                }
            }
            Expr::And(a, b) => {
                let x = self.eval(a, scope, group);
                let y = self.eval(b, scope, group);
                Val::Bool(self.truthy(&x) & self.truthy(&y))
            }
            Expr::Or(a, b) => {
                let x = self.eval(a, scope, group);
                let y = self.eval(b, scope, group);
                Val::Bool(self.truthy(&x) | self.truthy(&y))
            }
            Expr::Not(a) => {
                let x = self.eval(a, scope, group);
                Val::Bool(!self.truthy(&x))
            }
            Expr::Aggregate { func, distinct, arg, .. } => match group {
                Some(g) => self.aggregate(*func, *distinct, arg.as_deref(), g),
                None => Val::Null,
            },
            Expr::Any { var, list, predicate, .. } => match self.eval(list, scope, group) {
                Val::Null => Val::Bool(false),
                Val::List(items) => Val::Bool(items.iter().any(|item| {
                    let local = Scope::Local { name: var, value: item, parent: scope };
                    let v = self.eval(predicate, &local, None);
                    self.truthy(&v)
                })),
                _ => {
                    self.mismatch();
                    Val::Null
                }
            },
        }
    }

    fn aggregate(&self, func: AggFunc, distinct: bool, arg: Option<&Expr>, g: &Group) -> Val {
        let Some(arg) = arg else {
            return Val::Int(g.rows.len() as i64);
        };
        let mut values: Vec<Val> = g
            .rows
            .iter()
            .map(|&ri| self.eval(arg, &Scope::row(g.frame, &g.frame.rows[ri]), None))
            .filter(|v| !matches!(v, Val::Null))
            .collect();
        if distinct {
            let unique: IndexSet<Val> = values.into_iter().collect();
            values = unique.into_iter().collect();
            values.sort_by(total_cmp);
        }
        match func {
            AggFunc::Count => Val::Int(values.len() as i64),
            AggFunc::Collect => Val::List(values),
        }
    }

    fn property(&self, base: &Val, key: &str) -> Val {
        match base {
            Val::Null => Val::Null,
            Val::Node(id) => match key {
                "name" => Val::str(id.as_str()),
                "id" => Val::str(id.local_id()),
                "namespace" => Val::str(id.namespace()),
                "description" => self.graph.node_text(id).map_or(Val::Null, Val::str),
                _ => Val::Null,
            },
            Val::Rel(k) => match key {
                "relation" | "type" => Val::str(&k.relation),
                "weight" => self.graph.edge_weight(k).map_or(Val::Null, Val::Float),
                "provenance" => Val::str(k.provenance.as_str()),
                _ => Val::Null,
            },
            _ => {
                self.mismatch();
                Val::Null
            }
        }
    }
}

fn cmp_rows(a: &[Val], b: &[Val]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = total_cmp(x, y);
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn flatten_and<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
    match e {
        Expr::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

fn compare(op: CmpOp, l: &Val, r: &Val) -> Result<bool, Mismatch> {
    let null = matches!(l, Val::Null) || matches!(r, Val::Null);
    match op {
        CmpOp::Eq => equals(l, r),
        CmpOp::Neq => {
            if null {
                Ok(false)
            } else {
                equals(l, r).map(|b| !b)
            }
        }
        CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
            if null {
                return Ok(false);
            }
            let ord = match (l, r) {
                (Val::Str(a), Val::Str(b)) => a.as_bytes().cmp(b.as_bytes()),
                (Val::Int(_) | Val::Float(_), Val::Int(_) | Val::Float(_)) => total_cmp(l, r),
                _ => return Err(Mismatch),
            };
            Ok(match op {
                CmpOp::Lt => ord == Ordering::Less,
                CmpOp::Le => ord != Ordering::Greater,
                CmpOp::Gt => ord == Ordering::Greater,
                _ => ord != Ordering::Less,
            })
        }
        CmpOp::In => match r {
            Val::Null => Ok(false),
            Val::List(items) => {
                if matches!(l, Val::Null) {
                    return Ok(false);
                }
                let mut comparable = items.is_empty();
                for item in items {
                    match equals(l, item) {
                        Ok(true) => return Ok(true),
                        Ok(false) => comparable = true,
                        Err(Mismatch) => {}
                    }
                }
                if comparable {
                    Ok(false)
                } else {
                    Err(Mismatch)
                }
            }
            _ => Err(Mismatch),
        },
        CmpOp::Contains => match (l, r) {
            (Val::Str(a), Val::Str(b)) => Ok(a.contains(b.as_ref())),
            _ if null => Ok(false),
            _ => Err(Mismatch),
        },
    }
}

/// Pattern atoms flattened into position-indexed vectors.
struct PatternPlan<'p> {
    nodes: Vec<&'p NodePattern>,
    rels: Vec<&'p RelPattern>,
}

impl<'p> PatternPlan<'p> {
    fn new(p: &'p Pattern) -> Self {
        PatternPlan {
            nodes: p.nodes().collect(),
            rels: p.rels().collect(),
        }
    }

    fn value_of(&self, var: &str, nodes: &[NodeId], rels: &[EdgeKey]) -> Val {
        if let Some(i) = self.nodes.iter().position(|n| n.var.as_deref() == Some(var)) {
            return Val::Node(nodes[i].clone());
        }
        if let Some(i) = self.rels.iter().position(|r| r.var.as_deref() == Some(var)) {
            return Val::Rel(rels[i].clone());
        }
        Val::Null
    }
}

struct Search<'a> {
    graph: &'a KnowledgeGraph,
    plan: &'a PatternPlan<'a>,
    fixed_nodes: &'a [Option<NodeId>],
    fixed_rels: &'a [Option<EdgeKey>],
    hints: &'a [Option<&'a BTreeSet<NodeId>>],
    steps: &'a [(usize, usize)],
}

impl Search<'_> {
    fn node_ok(&self, pos: usize, id: &NodeId, assigned: &[Option<NodeId>]) -> bool {
        let atom = self.plan.nodes[pos];
        if atom.label.as_deref().is_some_and(|l| id.namespace() != l) {
            return false;
        }
        if self.fixed_nodes[pos].as_ref().is_some_and(|f| f != id) {
            return false;
        }
        if self.hints[pos].is_some_and(|h| !h.contains(id)) {
            return false;
        }
        if let Some(v) = &atom.var {
            for (j, other) in self.plan.nodes.iter().enumerate() {
                if j != pos && other.var.as_ref() == Some(v) {
                    if let Some(a) = &assigned[j] {
                        if a != id {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn extend(
        &self,
        step: usize,
        nodes: &mut Vec<Option<NodeId>>,
        rels: &mut Vec<Option<EdgeKey>>,
        out: &mut Vec<(Vec<NodeId>, Vec<EdgeKey>)>,
    ) {
        let Some(&(p, q)) = self.steps.get(step) else {
            out.push((
                nodes.iter().map(|n| n.clone().expect("all positions assigned")).collect(),
                rels.iter().map(|r| r.clone().expect("all positions assigned")).collect(),
            ));
            return;
        };
        let ri = p.min(q);
        let atom = self.plan.rels[ri];
        let u = nodes[p].clone().expect("source assigned");
        for key in self.graph.incident_edges(&u) {
            let v = key.other(&u).expect("incident edge touches u");
            let left = if q > p { &u } else { v };
            let direction_ok = match atom.direction {
                Direction::Right => &key.head == left,
                Direction::Left => &key.tail == left,
                Direction::Either => true,
            };
            if !direction_ok {
                continue;
            }
            if !atom.types.is_empty() && !atom.types.iter().any(|t| t.as_str() == key.relation.as_ref()) {
                continue;
            }
            if self.fixed_rels[ri].as_ref().is_some_and(|f| f != key) {
                continue;
            }
            if rels.iter().flatten().any(|used| used == key) {
                continue;
            }
            if let Some(rv) = &atom.var {
                let clash = self.plan.rels.iter().enumerate().any(|(j, r)| {
                    j != ri && r.var.as_ref() == Some(rv) && rels[j].as_ref().is_some_and(|k| k != key)
                });
                if clash {
                    continue;
                }
            }
            if !self.node_ok(q, v, nodes) {
                continue;
            }
            let prev = nodes[q].replace(v.clone());
            rels[ri] = Some(key.clone());
            self.extend(step + 1, nodes, rels, out);
            rels[ri] = None;
            nodes[q] = prev;
        }
    }
}
