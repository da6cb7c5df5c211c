//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gaussord_core::datasets::{
    DEFAULT_CIRCLE_FACTOR, DEFAULT_CIRCLE_NOISE, DEFAULT_FINES_PER_SUPER, DEFAULT_MOON_NOISE, DEFAULT_SUPERS,
};
use gaussord_core::{SamplingConfig, SamplingStrategy, TrainConfig};

use crate::checkpoint::save_checkpoint;
use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::formats;
use crate::pipeline::{self, Dataset, DatasetSpec, EvalInputs, TripletSource};
use crate::svg::PlotOptions;

/// Exit code when training stops at `max_epochs` without a loss plateau.
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gaussord", version, about = "Gaussian ordinal embeddings from triplet comparisons")]
pub struct Cli {
    /// Run configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path (file, or prefix for `triplets`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (blobs, moons, circles, linear, hierarchy).
    Gen(GenArgs),
    /// Sample labelled triplets and write PREFIX.train / PREFIX.test.
    Triplets(TripletArgs),
    /// Train the encoder and write the embedding CSV plus a report.
    Embed(EmbedArgs),
    /// Compute evaluation metrics for an embedding.
    Eval(EvalArgs),
    /// Render a 2-D embedding as SVG ellipses.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub generator: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian noise standard deviation (moons, circles).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Inner/outer radius ratio (circles).
    #[arg(long)]
    pub factor: Option<f64>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub items_per_class: Option<usize>,
    #[arg(long)]
    pub items_per_fine: Option<usize>,
    #[arg(long)]
    pub fines_per_super: Option<usize>,
    #[arg(long)]
    pub supers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TripletArgs {
    /// Ground-truth points CSV.
    #[arg(long, conflicts_with = "graph")]
    pub points: Option<PathBuf>,
    /// Relation graph edge list.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Budget multiplier p in p·d²·n·ln n.
    #[arg(long)]
    pub p: Option<f64>,
    /// Label flip probability.
    #[arg(long)]
    pub noise: Option<f64>,
    /// uniform or graph-hop.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Embedding dimension used by the budget rule.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Explicit triplet count, overriding the budget rule.
    #[arg(long)]
    pub budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub train: PathBuf,
    /// Held-out triplets; defaults to the sibling `.test` file if present.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Item count; inferred from the triplets when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub clamp: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub input_dim: Option<usize>,
    #[arg(long)]
    pub hidden_dim: Option<usize>,
    /// Fix every variance at the floor (point-embedding baseline).
    #[arg(long)]
    pub dirac: bool,
    /// Also save the trained encoder.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Ground-truth points CSV for Procrustes (and labels, if it has them).
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Graph whose edges are scored for link prediction.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// k for k-means; defaults to the number of distinct labels.
    #[arg(long)]
    pub clusters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Semi-axis multiplier k (ellipse axes are k·√σ).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Canvas side in pixels.
    #[arg(long)]
    pub canvas: Option<u32>,
}

/// What a successful command produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    /// Some(false) when training hit `max_epochs` without a plateau.
    pub converged: Option<bool>,
    pub message: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.converged == Some(false) {
            EXIT_NOT_CONVERGED
        } else {
            0
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Messages go to stdout/stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(out) => {
            if !out.message.is_empty() {
                println!("{}", out.message);
            }
            out.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx { cli, cfg: &cfg };
    match &cli.command {
        Command::Gen(a) => ctx.gen(a),
        Command::Triplets(a) => ctx.triplets(a),
        Command::Embed(a) => ctx.embed(a),
        Command::Eval(a) => ctx.eval(a),
        Command::Plot(a) => ctx.plot(a),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: &'a ConfigFile,
}

impl Ctx<'_> {
    fn seed(&self, section: &str) -> Result<u64> {
        self.cfg.pick(self.cli.seed, section, "seed", 0)
    }

    fn out(&self, default_name: &str) -> Result<PathBuf> {
        if let Some(p) = &self.cli.out {
            return Ok(p.clone());
        }
        match self.cfg.raw("output", "dir") {
            Some(dir) => Ok(Path::new(dir).join(default_name)),
            None => Err(Error::Usage("--out is required".into())),
        }
    }

    fn path_flag(&self, flag: &Option<PathBuf>, section: &str, key: &str) -> Option<PathBuf> {
        flag.clone().or_else(|| self.cfg.raw(section, key).map(PathBuf::from))
    }

    fn gen(&self, a: &GenArgs) -> Result<Outcome> {
        let c = self.cfg;
        let s = "dataset";
        let seed = self.seed(s)?;
        let spec = match a.generator.as_str() {
            "blobs" => DatasetSpec::Blobs {
                n: c.pick(a.n, s, "n", 500)?,
                seed,
            },
            "moons" => DatasetSpec::Moons {
                n: c.pick(a.n, s, "n", 500)?,
                noise: c.pick(a.noise, s, "noise", DEFAULT_MOON_NOISE)?,
                seed,
            },
            "circles" => DatasetSpec::Circles {
                n: c.pick(a.n, s, "n", 500)?,
                factor: c.pick(a.factor, s, "factor", DEFAULT_CIRCLE_FACTOR)?,
                noise: c.pick(a.noise, s, "noise", DEFAULT_CIRCLE_NOISE)?,
                seed,
            },
            "linear" => DatasetSpec::Linear {
                classes: c.pick(a.classes, s, "classes", 10)?,
                items_per_class: c.pick(a.items_per_class, s, "items_per_class", 49)?,
            },
            "hierarchy" => DatasetSpec::Hierarchy {
                items_per_fine: c.pick(a.items_per_fine, s, "items_per_fine", 5)?,
                fines_per_super: c.pick(a.fines_per_super, s, "fines_per_super", DEFAULT_FINES_PER_SUPER)?,
                supers: c.pick(a.supers, s, "supers", DEFAULT_SUPERS)?,
            },
            other => {
                return Err(Error::Usage(format!(
                    "unknown generator {other:?}; expected blobs, moons, circles, linear or hierarchy"
                )))
            }
        };
        let ds = pipeline::generate(&spec)?;
        let ext = if matches!(ds, Dataset::Points(_)) { "csv" } else { "edges" };
        let out = self.out(&format!("{}.{ext}", a.generator))?;
        pipeline::save_dataset(&out, &ds)?;
        let mut written = vec![out.clone()];
        if matches!(ds, Dataset::Graph { .. }) {
            written.push(pipeline::labels_path(&out));
        }
        Ok(Outcome {
            message: format!("wrote {} items to {}", ds.len(), out.display()),
            written,
            converged: None,
        })
    }

    fn triplets(&self, a: &TripletArgs) -> Result<Outcome> {
        let c = self.cfg;
        let s = "sampling";
        let strategy = match c.pick(a.strategy.clone(), s, "strategy", "uniform".to_owned())?.as_str() {
            "uniform" => SamplingStrategy::Uniform,
            "graph-hop" | "graph_hop" | "hop" => SamplingStrategy::GraphHop,
            other => return Err(Error::Usage(format!("unknown strategy {other:?}; expected uniform or graph-hop"))),
        };
        let cfg = SamplingConfig {
            budget_multiplier: c.pick(a.p, s, "p", SamplingConfig::default().budget_multiplier)?,
            noise_rate: c.pick(a.noise, s, "noise", 0.0)?,
            strategy,
            seed: self.seed(s)?,
        };
        let dim = match a.dim {
            Some(d) => d,
            None => match c.get(s, "dim")? {
                Some(d) => d,
                None => c.pick(None, "train", "dim", TrainConfig::default().dim)?,
            },
        };
        let budget = c.pick_opt(a.budget, s, "budget")?;
        let points = self.path_flag(&a.points, "dataset", "points");
        let graph = self.path_flag(&a.graph, "dataset", "graph");
        let sample = match (points, graph) {
            (Some(p), None) => {
                let ds = formats::load_points(&p)?;
                pipeline::make_triplets(TripletSource::Points(&ds), &cfg, dim, budget)?
            }
            (None, Some(g)) => {
                let g = formats::load_graph(&g)?;
                pipeline::make_triplets(TripletSource::Graph(&g), &cfg, dim, budget)?
            }
            _ => return Err(Error::Usage("give exactly one of --points or --graph".into())),
        };
        let prefix = self.out("triplets")?;
        let (train, test) = pipeline::save_triplet_sample(&prefix, &sample)?;
        Ok(Outcome {
            message: format!(
                "wrote {} triplets ({} train, {} test)",
                sample.train.len() + sample.test.len(),
                sample.train.len(),
                sample.test.len()
            ),
            written: vec![train, test],
            converged: None,
        })
    }

    fn train_config(&self, a: &EmbedArgs) -> Result<TrainConfig> {
        let c = self.cfg;
        let s = "train";
        let d = TrainConfig::default();
        let max_epochs = c.pick(a.max_epochs, s, "max_epochs", d.max_epochs)?;
        let cfg = TrainConfig {
            dim: c.pick(a.dim, s, "dim", d.dim)?,
            clamp: c.pick(a.clamp, s, "clamp", d.clamp)?,
            learning_rate: c.pick(a.lr, s, "lr", d.learning_rate)?,
            lr_decay: c.pick(a.lr_decay, s, "lr_decay", d.lr_decay)?,
            batch_size: c.pick(a.batch_size, s, "batch_size", d.batch_size)?,
            max_epochs,
            // an unset patience shrinks with a short epoch cap
            patience: c.pick(a.patience, s, "patience", d.patience.min(max_epochs))?,
            margin: c.pick(a.margin, s, "margin", d.margin)?,
            input_dim: c.pick(a.input_dim, s, "input_dim", d.input_dim)?,
            hidden_dim: c.pick(a.hidden_dim, s, "hidden_dim", d.hidden_dim)?,
            dirac: a.dirac || c.get(s, "dirac")?.unwrap_or(false),
            seed: self.seed(s)?,
        };
        cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn embed(&self, a: &EmbedArgs) -> Result<Outcome> {
        let cfg = self.train_config(a)?;
        let train = formats::load_triplets(&a.train)?;
        let test_path = a.test.clone().or_else(|| {
            let sibling = a.train.with_extension("test");
            (a.train.extension().is_some_and(|e| e == "train") && sibling.exists()).then_some(sibling)
        });
        let test = match &test_path {
            Some(p) => formats::load_triplets(p)?,
            None => Vec::new(),
        };
        let inferred = pipeline::infer_item_count(&train, &test);
        let n = match a.n {
            Some(n) if n < inferred => {
                return Err(Error::Data(format!("triplets reference item {} but --n is {n}", inferred - 1)))
            }
            Some(n) => n,
            None => inferred,
        };
        let out = pipeline::embed(&train, &test, n, &cfg)?;
        let csv = self.out("embedding.csv")?;
        formats::save_embeddings(&csv, &out.embeddings)?;
        let report_path = pipeline::with_suffix(&csv, ".report");
        formats::write_file(&report_path, &pipeline::report_metrics(&out).render())?;
        let mut written = vec![csv.clone(), report_path];
        if let Some(ck) = &a.checkpoint {
            save_checkpoint(ck, &out.params)?;
            written.push(ck.clone());
        }
        let r = &out.report;
        let held = r
            .held_out_error
            .map_or_else(|| "n/a".to_owned(), |e| format!("{e:.4}"));
        Ok(Outcome {
            message: format!(
                "epochs={} converged={} loss={:.6} train_error={:.4} held_out_error={held} seconds={:.2}",
                r.epochs,
                r.converged,
                r.final_loss(),
                r.final_train_error(),
                r.wall_clock_secs
            ),
            written,
            converged: Some(r.converged),
        })
    }

    fn eval(&self, a: &EvalArgs) -> Result<Outcome> {
        let embeddings = formats::load_embeddings(&a.embedding)?;
        let test = a.test.as_deref().map(formats::load_triplets).transpose()?;
        let points = self
            .path_flag(&a.points, "dataset", "points")
            .map(|p| formats::load_points(&p))
            .transpose()?;
        let labels = a.labels.as_deref().map(formats::load_labels).transpose()?;
        let graph = a.graph.as_deref().map(formats::load_graph).transpose()?;
        let metrics = pipeline::evaluate(&EvalInputs {
            embeddings: &embeddings,
            test: test.as_deref(),
            ground_truth: points.as_ref(),
            labels: labels.as_deref(),
            clusters: a.clusters,
            graph: graph.as_ref(),
            seed: self.seed("eval")?,
        })?;
        let text = metrics.render();
        let mut written = Vec::new();
        if let Some(out) = self.cli.out.clone().or_else(|| self.out("metrics.txt").ok()) {
            formats::write_file(&out, &text)?;
            written.push(out);
        }
        Ok(Outcome {
            message: text.trim_end().to_owned(),
            written,
            converged: None,
        })
    }

    fn plot(&self, a: &PlotArgs) -> Result<Outcome> {
        let embeddings = formats::load_embeddings(&a.embedding)?;
        let labels = a.labels.as_deref().map(formats::load_labels).transpose()?;
        let d = PlotOptions::default();
        let opts = PlotOptions {
            radius_multiplier: self.cfg.pick(a.radius, "plot", "radius", d.radius_multiplier)?,
            canvas: self.cfg.pick(a.canvas, "plot", "canvas", d.canvas)?,
        };
        let svg = pipeline::plot(&embeddings, labels.as_deref(), &opts)?;
        let out = self.out("embedding.svg")?;
        formats::write_file(&out, &svg)?;
        Ok(Outcome {
            message: format!("wrote {} ellipses to {}", embeddings.len(), out.display()),
            written: vec![out],
            converged: None,
        })
    }
}
