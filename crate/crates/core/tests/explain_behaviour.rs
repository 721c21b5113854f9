use std::collections::BTreeMap;

use hypograph_core::explain::{explain_edge, export_explanation, ExplainConfig, Explanation, MaskedModel};
use hypograph_core::linkpred::{train, LinkModel, Predictor, TrainConfig};
use hypograph_core::synth::{planted_driver, PlantedDriver};

fn fitted(seed: u64) -> (PlantedDriver, LinkModel) {
    let d = planted_driver(seed);
    let (m, _) = train(&d.graph, &TrainConfig { seed, ..Default::default() }).unwrap();
    (d, m)
}

#[test]
fn planted_path_is_recovered() {
    for seed in 0..4 {
        let (d, m) = fitted(seed);
        let p = Predictor::new(&m, &d.graph).unwrap();
        let e = explain_edge(&p, &d.target, 10, &ExplainConfig::default()).unwrap();
        for edge in &d.path {
            assert!(e.top_k.iter().any(|(x, _)| x == edge), "seed {seed}: {edge:?} not in top 10");
        }
    }
}

#[test]
fn scores_stay_inside_the_receptive_field() {
    let (d, m) = fitted(11);
    let p = Predictor::new(&m, &d.graph).unwrap();
    let e = explain_edge(&p, &d.target, 10, &ExplainConfig::default()).unwrap();
    for (a, b) in e.edge_scores.keys() {
        assert!(e.computation_subgraph.connected(a, b));
    }
    assert!(e.edge_scores.values().all(|s| *s > 0.0 && *s < 1.0));
    for k in 0..e.edge_scores.len() {
        let a = e.top(k);
        let b = e.top(k + 1);
        assert_eq!(a[..], b[..k]);
    }
}

#[test]
fn sparsity_pressure_shrinks_the_mask() {
    let (d, m) = fitted(3);
    let p = Predictor::new(&m, &d.graph).unwrap();
    let mean = |e: &Explanation| e.edge_scores.values().sum::<f64>() / e.edge_scores.len() as f64;
    let none = explain_edge(&p, &d.target, 10, &ExplainConfig { lambda_size: 0.0, ..Default::default() }).unwrap();
    let heavy = explain_edge(&p, &d.target, 10, &ExplainConfig { lambda_size: 1.0, ..Default::default() }).unwrap();
    assert!(mean(&heavy) < mean(&none));
}

#[test]
fn top_edge_matters_more_than_bottom_edge() {
    for seed in 0..4 {
        let (d, m) = fitted(seed);
        let p = Predictor::new(&m, &d.graph).unwrap();
        let e = explain_edge(&p, &d.target, 10, &ExplainConfig::default()).unwrap();
        let mm = MaskedModel::new(&p, &d.target, 2).unwrap();
        let ones = vec![1.0; mm.edges().len()];
        let base = mm.probability(&ones).unwrap();
        let removed = |edge| {
            let mut mask = ones.clone();
            mask[mm.edges().iter().position(|x| x == edge).unwrap()] = 0.0;
            (mm.probability(&mask).unwrap() - base).abs()
        };
        let ranked = e.ranked_edges();
        let top = removed(&ranked[0].0);
        let bottom = removed(&ranked.last().unwrap().0);
        assert!(top >= bottom, "seed {seed}: top {top} bottom {bottom}");
    }
}

#[test]
fn explanation_is_reproducible_from_a_checkpoint() {
    let (d, m) = fitted(5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.rglm");
    m.save(&path).unwrap();
    let loaded = LinkModel::load(&path).unwrap();
    let cfg = ExplainConfig::default();
    let a = explain_edge(&Predictor::new(&m, &d.graph).unwrap(), &d.target, 10, &cfg).unwrap();
    let b = explain_edge(&Predictor::new(&loaded, &d.graph).unwrap(), &d.target, 10, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

/// Recursive-descent checker for the DOT language grammar (graph, node,
/// edge, attribute and assignment statements; subgraphs and ports are not
/// produced by the exporter and are rejected).
mod dot {
    #[derive(Debug, Clone, PartialEq)]
    pub enum Tok {
        Id(String),
        Sym(&'static str),
    }

    pub fn lex(s: &str) -> Result<Vec<Tok>, String> {
        let c: Vec<char> = s.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < c.len() {
            let ch = c[i];
            if ch.is_whitespace() {
                i += 1;
            } else if ch == '"' {
                let mut v = String::new();
                i += 1;
                loop {
                    match c.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') if c.get(i + 1) == Some(&'"') => {
                            v.push('"');
                            i += 2;
                        }
                        Some(x) => {
                            v.push(*x);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Id(v));
            } else if ch == '-' && matches!(c.get(i + 1), Some('-') | Some('>')) {
                out.push(Tok::Sym(if c[i + 1] == '-' { "--" } else { "->" }));
                i += 2;
            } else if let Some(sym) = ["{", "}", "[", "]", ";", ",", "=", ":"].iter().find(|x| x.starts_with(ch)) {
                out.push(Tok::Sym(sym));
                i += 1;
            } else if ch.is_ascii_alphabetic() || ch == '_' {
                let st = i;
                while i < c.len() && (c[i].is_ascii_alphanumeric() || c[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Id(c[st..i].iter().collect()));
            } else if ch.is_ascii_digit() || ch == '.' || ch == '-' {
                let st = i;
                i += 1;
                while i < c.len() && (c[i].is_ascii_digit() || c[i] == '.') {
                    i += 1;
                }
                let num: String = c[st..i].iter().collect();
                if num.parse::<f64>().is_err() {
                    return Err(format!("bad numeral {num}"));
                }
                out.push(Tok::Id(num));
            } else {
                return Err(format!("unexpected {ch:?}"));
            }
        }
        Ok(out)
    }

    pub type Attrs = Vec<(String, String)>;

    #[derive(Debug, Default)]
    pub struct Graph {
        pub nodes: Vec<String>,
        pub edges: Vec<(String, String, Attrs)>,
    }

    struct P {
        t: Vec<Tok>,
        i: usize,
    }

    impl P {
        fn peek(&self) -> Option<&Tok> {
            self.t.get(self.i)
        }
        fn sym(&mut self, s: &str) -> bool {
            if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
                self.i += 1;
                true
            } else {
                false
            }
        }
        fn id(&mut self) -> Result<String, String> {
            match self.peek().cloned() {
                Some(Tok::Id(v)) => {
                    self.i += 1;
                    Ok(v)
                }
                other => Err(format!("expected ID, found {other:?}")),
            }
        }
        fn keyword(&self, k: &str) -> bool {
            matches!(self.peek(), Some(Tok::Id(v)) if v.eq_ignore_ascii_case(k))
        }
        fn attr_list(&mut self) -> Result<Attrs, String> {
            let mut out = Vec::new();
            while self.sym("[") {
                while !self.sym("]") {
                    let k = self.id()?;
                    if !self.sym("=") {
                        return Err("expected = in attribute".into());
                    }
                    out.push((k, self.id()?));
                    let _ = self.sym(",") || self.sym(";");
                }
            }
            Ok(out)
        }
    }

    pub fn parse(src: &str) -> Result<Graph, String> {
        let mut p = P { t: lex(src)?, i: 0 };
        if p.keyword("strict") {
            p.i += 1;
        }
        let directed = if p.keyword("graph") {
            false
        } else if p.keyword("digraph") {
            true
        } else {
            return Err("expected graph or digraph".into());
        };
        p.i += 1;
        if let Some(Tok::Id(_)) = p.peek() {
            p.i += 1;
        }
        if !p.sym("{") {
            return Err("expected {".into());
        }
        let mut g = Graph::default();
        while !p.sym("}") {
            if p.peek().is_none() {
                return Err("unexpected end".into());
            }
            if p.keyword("graph") || p.keyword("node") || p.keyword("edge") {
                p.i += 1;
                if !matches!(p.peek(), Some(Tok::Sym("["))) {
                    return Err("attribute statement without list".into());
                }
                p.attr_list()?;
            } else {
                let a = p.id()?;
                if p.sym("=") {
                    p.id()?;
                } else if matches!(p.peek(), Some(Tok::Sym("--")) | Some(Tok::Sym("->"))) {
                    let mut chain = vec![a];
                    loop {
                        let op = if p.sym("--") {
                            "--"
                        } else if p.sym("->") {
                            "->"
                        } else {
                            break;
                        };
                        if (op == "->") != directed {
                            return Err(format!("edge operator {op} in wrong graph kind"));
                        }
                        chain.push(p.id()?);
                    }
                    let attrs = p.attr_list()?;
                    for w in chain.windows(2) {
                        g.edges.push((w[0].clone(), w[1].clone(), attrs.clone()));
                    }
                } else {
                    p.attr_list()?;
                    g.nodes.push(a);
                }
            }
            let _ = p.sym(";");
        }
        if p.peek().is_some() {
            return Err("trailing tokens".into());
        }
        Ok(g)
    }
}

#[test]
fn dot_checker_rejects_malformed_input() {
    assert!(dot::parse("graph { a -- b }").is_ok());
    assert!(dot::parse("graph { a -> b }").is_err());
    assert!(dot::parse("graph { a -- }").is_err());
    assert!(dot::parse("graph { \"a -- b }").is_err());
    assert!(dot::parse("graph { a [penwidth] }").is_err());
}

#[test]
fn exported_dot_parses_and_matches_table() {
    let (d, m) = fitted(2);
    let p = Predictor::new(&m, &d.graph).unwrap();
    let e = explain_edge(&p, &d.target, 10, &ExplainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_explanation(&e, dir.path()).unwrap();

    let tsv = std::fs::read_to_string(&files.tsv).unwrap();
    let rows: Vec<Vec<&str>> = tsv.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), e.edge_scores.len() + 1);
    assert_eq!(rows.last().unwrap(), &vec!["T:head", "T:tail", "1.0"]);

    let g = dot::parse(&std::fs::read_to_string(&files.dot).unwrap()).unwrap();
    assert_eq!(g.edges.len(), rows.len());
    let widths: BTreeMap<(String, String), f64> = g
        .edges
        .iter()
        .map(|(a, b, attrs)| {
            let w = attrs.iter().find(|(k, _)| k == "penwidth").unwrap().1.parse().unwrap();
            ((a.clone(), b.clone()), w)
        })
        .collect();
    for ((a, b), score) in &e.edge_scores {
        let w = widths[&(a.to_string(), b.to_string())];
        assert!((w - 5.0 * score).abs() < 1e-4);
    }
    let (_, _, target_attrs) = g.edges.last().unwrap();
    assert!(target_attrs.contains(&("style".into(), "dashed".into())));
    let label = &target_attrs.iter().find(|(k, _)| k == "label").unwrap().1;
    assert_eq!(label, &format!("p={:.4}", e.predicted_probability));
}
