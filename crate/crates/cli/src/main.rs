use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use hypograph_core::corpus::load_corpus;
use hypograph_core::cypher;
use hypograph_core::embed::{EmbeddingIndex, IndexSources};
use hypograph_core::explain::{explain_edge, export_explanation, ExplainConfig};
use hypograph_core::graph::{
    graph_summary, k_hop_filter, load_edge_list, load_node_text, merge_graphs, write_edge_list, KnowledgeGraph, NodeId,
    Provenance, DEFAULT_HOPS,
};
use hypograph_core::linkpred::{
    parse_pairs, predict_candidates, train, write_predictions, LinkModel, Predictor, TrainConfig,
};
use hypograph_service::config::AppConfig;
use hypograph_service::gateway::HttpTransport;
use hypograph_service::session::{repl_loop, Engine, SystemClock, UuidIds};
use hypograph_service::startup::{build_embedder, load_graph, load_resources, StartupError};
use hypograph_service::http;

#[derive(Parser)]
#[command(name = "hypograph", version, about = "Knowledge graph, literature and link prediction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Knowledge graph utilities.
    #[command(subcommand)]
    Kg(KgCommand),
    /// Run a Cypher query against an edge list and print TSV.
    Cypher(CypherArgs),
    /// Corpus utilities.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Build or query the embedding index of a config.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Train a link prediction checkpoint.
    Train(TrainArgs),
    /// Train on a graph, score candidate pairs and explain the top ones.
    Predict(PredictArgs),
    /// Interactive session, or the HTTP service with --serve.
    Session(SessionArgs),
}

#[derive(Subcommand)]
enum KgCommand {
    /// Keep everything within k hops of the given diseases.
    Filter {
        #[arg(long, default_value_t = DEFAULT_HOPS)]
        k: usize,
        /// Comma-separated node ids.
        #[arg(long, value_delimiter = ',', required = true)]
        disease: Vec<String>,
        #[arg(long = "input_file")]
        input_file: PathBuf,
        #[arg(long = "output_file")]
        output_file: PathBuf,
    },
    /// Union of edge lists; the first file's weight wins on conflicts.
    Merge {
        #[arg(required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long = "output_file")]
        output_file: PathBuf,
    },
    /// Node, edge and degree statistics.
    Summary {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct GraphInput {
    #[arg(long = "input_file", short = 'i')]
    input_file: PathBuf,
    /// Text-mining edges merged into the graph.
    #[arg(long = "text_mining")]
    text_mining: Option<PathBuf>,
    /// Node description TSV.
    #[arg(long = "node_text")]
    node_text: Option<PathBuf>,
}

#[derive(Args)]
struct CypherArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    query: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Document counts by article type.
    Stats { path: PathBuf },
}

#[derive(Subcommand)]
enum IndexCommand {
    Build {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the config's index path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        query: String,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Trains on the config's graph and writes its model path.
    #[arg(long, required_unless_present = "input_file")]
    config: Option<PathBuf>,
    #[arg(short = 'i', long = "input_file", requires = "model", conflicts_with = "config")]
    input_file: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PredictArgs {
    /// Pairs file, one `head<TAB>tail` per line.
    #[arg(short = 'p')]
    pairs: PathBuf,
    /// Graph edge list.
    #[arg(short = 'i')]
    input: PathBuf,
    #[arg(short = 'o')]
    output: PathBuf,
    /// Predictions to keep and explain.
    #[arg(short = 'n', default_value_t = 5)]
    top_n: usize,
    /// Most important edges per explanation.
    #[arg(short = 'k', default_value_t = 10)]
    top_k: usize,
    /// Use this checkpoint instead of training.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SessionArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    serve: bool,
    #[arg(long)]
    port: Option<u16>,
    #[arg(long = "log-dir")]
    log_dir: Option<PathBuf>,
}

type Fallible<T> = Result<T, String>;

fn fail(what: impl std::fmt::Display, e: impl std::fmt::Display) -> String {
    format!("{what}: {e}")
}

fn read_graph(input: &GraphInput) -> Fallible<KnowledgeGraph> {
    let (mut g, report) =
        load_edge_list(&input.input_file, Provenance::KnowledgeBase, '\t').map_err(|e| fail(input.input_file.display(), e))?;
    log::info!("{}: {report:?}", input.input_file.display());
    if let Some(tm) = &input.text_mining {
        let (overlay, _) = load_edge_list(tm, Provenance::TextMining, '\t').map_err(|e| fail(tm.display(), e))?;
        g = merge_graphs(&g, &overlay).map_err(|e| fail("merge", e))?;
    }
    if let Some(nt) = &input.node_text {
        load_node_text(&mut g, nt).map_err(|e| fail(nt.display(), e))?;
    }
    Ok(g)
}

fn read_edges(path: &Path) -> Fallible<KnowledgeGraph> {
    read_graph(&GraphInput { input_file: path.to_path_buf(), text_mining: None, node_text: None })
}

fn load_config(path: &Path) -> Fallible<AppConfig> {
    AppConfig::load(path).map_err(|e| e.to_string())
}

fn train_config(base: TrainConfig, epochs: Option<usize>, seed: Option<u64>) -> TrainConfig {
    TrainConfig { epochs: epochs.unwrap_or(base.epochs), seed: seed.unwrap_or(base.seed), ..base }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

fn train_and_report(g: &KnowledgeGraph, cfg: &TrainConfig) -> Fallible<LinkModel> {
    let (model, report) = train(g, cfg).map_err(|e| fail("training", e))?;
    eprintln!(
        "trained {} epochs: test F1 {:.4} at threshold {:.4}, AUROC {}, AUPRC {}",
        cfg.epochs,
        report.test.f1,
        report.threshold,
        fmt_opt(report.test.auroc),
        fmt_opt(report.test.auprc)
    );
    Ok(model)
}

fn kg(cmd: KgCommand) -> Fallible<u8> {
    match cmd {
        KgCommand::Filter { k, disease, input_file, output_file } => {
            let g = read_edges(&input_file)?;
            let seeds = disease
                .iter()
                .map(|s| NodeId::parse(s.trim()).map_err(|e| e.to_string()))
                .collect::<Fallible<Vec<_>>>()?;
            let sub = k_hop_filter(&g, &seeds, k).map_err(|e| e.to_string())?;
            write_edge_list(&sub, &output_file).map_err(|e| fail(output_file.display(), e))?;
            eprintln!(
                "kept {} of {} nodes and {} of {} edges",
                sub.node_count(),
                g.node_count(),
                sub.edge_count(),
                g.edge_count()
            );
        }
        KgCommand::Merge { inputs, output_file } => {
            let mut merged = KnowledgeGraph::new();
            for path in &inputs {
                merged = merge_graphs(&merged, &read_edges(path)?).map_err(|e| fail(path.display(), e))?;
            }
            write_edge_list(&merged, &output_file).map_err(|e| fail(output_file.display(), e))?;
            eprintln!("merged {} files: {} nodes, {} edges", inputs.len(), merged.node_count(), merged.edge_count());
        }
        KgCommand::Summary { input, json } => {
            let g = read_edges(&input)?;
            let s = graph_summary(&g).map_err(|e| e.to_string())?;
            if json {
                println!("{}", serde_json::to_string_pretty(&s).map_err(|e| e.to_string())?);
            } else {
                println!("Number of nodes: {}", s.node_count);
                println!("Number of edges: {}", s.edge_count);
                println!("Average node degree: {:.2}", s.average_degree);
                println!("Number of node features: {}", s.feature_dim);
                println!("Contains isolated nodes: {}", if s.has_isolated_nodes { "True" } else { "False" });
                println!("Contains self-loops: {}", if s.has_self_loops { "True" } else { "False" });
                println!("Is undirected: True");
            }
        }
    }
    Ok(0)
}

fn run_cypher(args: CypherArgs) -> Fallible<u8> {
    let text = match (&args.query, &args.file) {
        (Some(q), _) => q.clone(),
        (None, Some(f)) => std::fs::read_to_string(f).map_err(|e| fail(f.display(), e))?,
        (None, None) => unreachable!("clap requires one of --query and --file"),
    };
    let g = read_graph(&args.graph)?;
    match cypher::run(&text, &g) {
        Ok(table) => {
            print!("{}", table.to_tsv());
            Ok(0)
        }
        Err(diag) => {
            eprintln!("{diag}");
            Ok(2)
        }
    }
}

fn corpus(cmd: CorpusCommand) -> Fallible<u8> {
    let CorpusCommand::Stats { path } = cmd;
    let (docs, load) = load_corpus(&path).map_err(|e| fail(path.display(), e))?;
    if load.missing_pmid + load.duplicate_pmid > 0 {
        eprintln!("skipped {} records without a PMID and {} duplicates", load.missing_pmid, load.duplicate_pmid);
    }
    let s = docs.stats();
    println!("PMIDs\tOriginal contributions\tReview articles\tClinical case reports\tOther");
    println!("{}\t{}\t{}\t{}\t{}", s.pmids, s.original_contributions, s.review_articles, s.case_reports, s.other);
    Ok(0)
}

fn index(cmd: IndexCommand) -> Fallible<u8> {
    let transport = Arc::new(HttpTransport::new(Duration::from_secs(60)));
    match cmd {
        IndexCommand::Build { config, output } => {
            let cfg = load_config(&config)?;
            let out = output.or_else(|| cfg.index.clone()).ok_or("the config sets no index path; pass --output")?;
            let g = load_graph(&cfg).map_err(|e| e.to_string())?;
            let (docs, _) = load_corpus(&cfg.corpus).map_err(|e| fail(cfg.corpus.display(), e))?;
            let embedder = build_embedder(&cfg, transport).map_err(|e| e.to_string())?;
            let sources = IndexSources { graph: Some(&g), docs: Some(&docs) };
            let ix = EmbeddingIndex::build(sources, &cfg.index_config, embedder.as_ref()).map_err(|e| e.to_string())?;
            ix.save(&out).map_err(|e| fail(out.display(), e))?;
            eprintln!("indexed {} chunks into {}", ix.len(), out.display());
        }
        IndexCommand::Search { config, query, top } => {
            let cfg = load_config(&config)?;
            let path = cfg.index.clone().ok_or("the config sets no index path")?;
            let g = load_graph(&cfg).map_err(|e| e.to_string())?;
            let (docs, _) = load_corpus(&cfg.corpus).map_err(|e| fail(cfg.corpus.display(), e))?;
            let sources = IndexSources { graph: Some(&g), docs: Some(&docs) };
            let ix = EmbeddingIndex::load(&path, sources, &cfg.index_config).map_err(|e| fail(path.display(), e))?;
            let embedder = build_embedder(&cfg, transport).map_err(|e| e.to_string())?;
            let q = embedder.embed(&query).map_err(|e| e.to_string())?;
            let hits = ix.search(&q, top).map_err(|e| e.to_string())?;
            println!("similarity\tsource\tid\ttext");
            for h in hits {
                let text: String = h.chunk.text.chars().take(120).collect();
                let source = serde_json::to_value(h.chunk.source).map_err(|e| e.to_string())?;
                println!(
                    "{:.6}\t{}\t{}\t{}",
                    h.similarity,
                    source.as_str().unwrap_or_default(),
                    h.chunk.source_id,
                    text.replace(['\t', '\n'], " ")
                );
            }
        }
    }
    Ok(0)
}

fn run_train(args: TrainArgs) -> Fallible<u8> {
    let (g, base, out) = match (&args.config, &args.input_file) {
        (Some(c), _) => {
            let cfg = load_config(c)?;
            let g = load_graph(&cfg).map_err(|e| e.to_string())?;
            let out = args.model.clone().unwrap_or_else(|| cfg.model.clone());
            (g, cfg.train, out)
        }
        (None, Some(i)) => (read_edges(i)?, TrainConfig::default(), args.model.clone().expect("clap requires --model")),
        (None, None) => unreachable!("clap requires --config or --input_file"),
    };
    let model = train_and_report(&g, &train_config(base, args.epochs, args.seed))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| fail(dir.display(), e))?;
    }
    model.save(&out).map_err(|e| fail(out.display(), e))?;
    eprintln!("checkpoint written to {}", out.display());
    Ok(0)
}

fn run_predict(args: PredictArgs) -> Fallible<u8> {
    let g = read_edges(&args.input)?;
    let text = std::fs::read_to_string(&args.pairs).map_err(|e| fail(args.pairs.display(), e))?;
    let pairs = parse_pairs(&text).map_err(|e| fail(args.pairs.display(), e))?;
    let model = match &args.model {
        Some(p) => LinkModel::load(p).map_err(|e| fail(p.display(), e))?,
        None => {
            let model = train_and_report(&g, &train_config(TrainConfig::default(), args.epochs, args.seed))?;
            std::fs::create_dir_all(&args.output).map_err(|e| fail(args.output.display(), e))?;
            let ckpt = args.output.join("model.rglm");
            model.save(&ckpt).map_err(|e| fail(ckpt.display(), e))?;
            model
        }
    };
    let predictor = Predictor::new(&model, &g).map_err(|e| e.to_string())?;
    let (top, rows) = predict_candidates(&predictor, &pairs, args.top_n).map_err(|e| e.to_string())?;
    let csv = write_predictions(&args.output, &rows).map_err(|e| fail(args.output.display(), e))?;
    println!("{}", csv.display());
    let cfg = ExplainConfig::default();
    for p in &top {
        let target = (p.head.clone(), p.tail.clone());
        let expl = explain_edge(&predictor, &target, args.top_k, &cfg).map_err(|e| e.to_string())?;
        let files = export_explanation(&expl, &args.output).map_err(|e| fail(args.output.display(), e))?;
        eprintln!("{}. {} -- {}: {:.4}", p.rank, p.head, p.tail, p.probability);
        println!("{}\n{}", files.tsv.display(), files.dot.display());
    }
    Ok(0)
}

fn session(args: SessionArgs) -> Fallible<u8> {
    let mut cfg = load_config(&args.config)?;
    if let Some(d) = args.log_dir {
        cfg.log_dir = d;
    }
    let port = args.port.unwrap_or(cfg.port);
    let transport = Arc::new(HttpTransport::new(Duration::from_secs(120)));
    let res = match load_resources(&cfg, transport) {
        Ok(r) => r,
        Err(StartupError::Missing(paths)) => {
            for p in paths {
                eprintln!("missing input file: {}", p.display());
            }
            return Ok(1);
        }
        Err(e) => return Err(e.to_string()),
    };
    let engine = Engine::new(res, Arc::new(SystemClock), Arc::new(UuidIds), cfg.log_dir.clone());
    if args.serve {
        let rt = tokio::runtime::Runtime::new().map_err(|e| fail("runtime", e))?;
        rt.block_on(http::serve(Arc::new(engine), port)).map_err(|e| fail(format!("port {port}"), e))?;
        return Ok(0);
    }
    let stdin = std::io::stdin();
    let echo = !stdin.is_terminal();
    let mut out = std::io::stdout();
    let code = repl_loop(&engine, stdin.lock(), &mut out, echo);
    let _ = out.flush();
    Ok(code as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Kg(c) => kg(c),
        Command::Cypher(a) => run_cypher(a),
        Command::Corpus(c) => corpus(c),
        Command::Index(c) => index(c),
        Command::Train(a) => run_train(a),
        Command::Predict(a) => run_predict(a),
        Command::Session(a) => session(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
