use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use although_core::although::{explain_instance, render_explanation, RenderMode};
use although_core::blocksworld::{
    figure2_instance, generate_corpus, micro_domain_corpus, InjectionKind, InjectionScenario,
};
use although_core::pipeline::{learn_kb, render_report, LearnOptions, PrinciplesConfig, ReportFormat};
use although_core::{parse_corpus, serialize_corpus, Atom, Corpus, KnowledgeBase};

#[derive(Parser)]
#[command(
    name = "although",
    version,
    about = "Learn symbolic descriptions of behaviour traces and explain perplexing actions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus.
    Generate {
        #[arg(long, value_enum)]
        domain: Domain,
        #[arg(long, value_enum)]
        inject: Option<Inject>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn a knowledge base from a corpus.
    Learn {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        plan_bound: Option<usize>,
        /// Use these atoms as the goal instead of learning it (repeatable).
        #[arg(long = "goal")]
        goal: Vec<String>,
    },
    /// Explain one instance with Although facts.
    Explain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        principles: PathBuf,
        #[arg(long)]
        instance: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Render::Json)]
        render: Render,
        /// Also check principles learned into the KB.
        #[arg(long)]
        use_learned_principles: bool,
    },
    /// Print a summary of a knowledge base.
    Report {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, value_enum, default_value_t = Render::Text)]
        format: Render,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    Blocksworld,
    Microblock,
    Figure2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Inject {
    PreventionA,
    PreventionB,
    Stacked,
}

#[derive(Clone, Copy, ValueEnum)]
enum Render {
    Text,
    Json,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    parse_corpus(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    KnowledgeBase::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn generate(domain: Domain, inject: Option<Inject>, seed: u64, out: &Path) -> Result<()> {
    let corpus = match (domain, inject) {
        (Domain::Blocksworld, inject) => {
            let kind = match inject {
                None => InjectionKind::None,
                Some(Inject::PreventionA) => InjectionKind::PreventionA,
                Some(Inject::PreventionB) => InjectionKind::PreventionB,
                Some(Inject::Stacked) => InjectionKind::Stacked,
            };
            generate_corpus(InjectionScenario::new(kind, seed))
        }
        (Domain::Microblock, None) => micro_domain_corpus(),
        (Domain::Figure2, None) => Corpus::new("figure2", vec![figure2_instance()])?,
        (_, Some(_)) => bail!("--inject only applies to --domain blocksworld"),
    };
    log::info!("generated {} instances", corpus.instances().len());
    write(out, &serialize_corpus(&corpus))
}

fn learn(corpus: &Path, out: &Path, plan_bound: Option<usize>, goal: &[String]) -> Result<()> {
    let corpus = load_corpus(corpus)?;
    let goal_override = if goal.is_empty() {
        None
    } else {
        Some(
            goal.iter()
                .map(|g| Atom::parse(g).with_context(|| format!("bad --goal `{g}`")))
                .collect::<Result<_>>()?,
        )
    };
    let kb = learn_kb(
        &corpus,
        &LearnOptions {
            plan_bound,
            goal_override,
        },
    )?;
    write(out, &kb.to_json())
}

struct ExplainArgs<'a> {
    corpus: &'a Path,
    kb: &'a Path,
    principles: &'a Path,
    instance: &'a str,
    out: &'a Path,
    render: Render,
    use_learned: bool,
}

fn explain(args: ExplainArgs) -> Result<()> {
    let corpus = load_corpus(args.corpus)?;
    let kb = load_kb(args.kb)?;
    let mut config =
        PrinciplesConfig::parse(&read(args.principles)?).with_context(|| format!("{}", args.principles.display()))?;
    if args.use_learned {
        config.extend_from_kb(&kb);
    }
    let inst = corpus
        .instance(args.instance)
        .ok_or_else(|| anyhow!("unknown instance `{}`", args.instance))?;
    let facts = explain_instance(inst, &config.principles, &config.order(), &kb)?;
    let mode = match args.render {
        Render::Text => RenderMode::Text,
        Render::Json => RenderMode::Json,
    };
    let mut text = String::new();
    for f in &facts {
        text.push_str(&render_explanation(f, mode, &kb));
        text.push('\n');
    }
    write(args.out, &text)
}

fn report(kb: &Path, format: Render) -> Result<()> {
    let kb = load_kb(kb)?;
    let format = match format {
        Render::Text => ReportFormat::Text,
        Render::Json => ReportFormat::Json,
    };
    print!("{}", render_report(&kb, format));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            domain,
            inject,
            seed,
            out,
        } => generate(domain, inject, seed, &out),
        Command::Learn {
            corpus,
            out,
            plan_bound,
            goal,
        } => learn(&corpus, &out, plan_bound, &goal),
        Command::Explain {
            corpus,
            kb,
            principles,
            instance,
            out,
            render,
            use_learned_principles,
        } => explain(ExplainArgs {
            corpus: &corpus,
            kb: &kb,
            principles: &principles,
            instance: &instance,
            out: &out,
            render,
            use_learned: use_learned_principles,
        }),
        Command::Report { kb, format } => report(&kb, format),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
