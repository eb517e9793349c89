// Copyright 2026 The hvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hvec_core::exec::{ExecContext, IndexConfig, IndexRegistry};
use hvec_core::metrics::{emit_report, read_report, render_records, summary_table};
use hvec_core::placement::{HardwareProfile, MemoryBudget};
use hvec_core::strategy::{choose_strategy, crossover_sweep, run_matrix, AnnKind, ArtifactSizes, Strategy, STRATEGIES};
use hvec_core::tuning::{render_tuning, tune};
use hvec_core::vecops::{IndexKind, SearchParams, VectorIndex};
use hvec_core::workload::io::{read_dataset, write_dataset};
use hvec_core::workload::{
    builtin_plan, generate, make_query_vectors, Dataset, DatasetSpec, PlanParams, VectorKind, VsMode, QUERIES, VS_MODES,
};

#[derive(Parser)]
#[command(name = "hvec", version, about = "Hybrid relational + vector query engine with a simulated CPU/GPU interconnect")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a dataset directory.
    Gen {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute built-in queries under one or more strategies.
    Run(RunOpts),
    /// Print a built-in plan in the plan-file grammar.
    Plan {
        #[arg(long)]
        query: String,
        #[arg(long, default_value = "ivf")]
        vs: VsMode,
        #[arg(long)]
        strategy: Option<Strategy>,
        #[arg(long, default_value = "nvlink-c2c")]
        profile: String,
    },
    /// Vector-search-only time per query batch size and strategy.
    Sweep {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
        batches: Vec<usize>,
        #[arg(long, default_value = "nvlink-c2c")]
        profile: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        k_prime: usize,
        #[arg(long, default_value_t = 8)]
        nprobe: usize,
        #[arg(long, default_value_t = 128)]
        ef: usize,
    },
    /// Pick a strategy from device memory, artifact sizes and batch size.
    Decide {
        #[arg(long)]
        device_mem: u64,
        #[arg(long, default_value = "ivf")]
        index: AnnKind,
        #[arg(long, default_value_t = 1)]
        batch: usize,
        #[arg(long)]
        index_bytes: u64,
        #[arg(long, default_value_t = 0)]
        emb_bytes: u64,
        #[arg(long, default_value_t = 0)]
        rel_bytes: u64,
        #[arg(long, default_value = "nvlink-c2c")]
        profile: String,
    },
    /// Print or summarize an emitted report directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        summary: bool,
    },
    /// Find the smallest nprobe and ef meeting the quality targets.
    Tune {
        #[command(flatten)]
        data: DataOpts,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct DataOpts {
    #[arg(long, default_value_t = 0.01)]
    sf: f64,
    #[arg(long, default_value_t = 64)]
    dr: usize,
    #[arg(long, default_value_t = 64)]
    di: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Read a generated dataset instead of generating one.
    #[arg(long)]
    data: Option<PathBuf>,
}

impl DataOpts {
    fn spec(&self) -> DatasetSpec {
        DatasetSpec {
            sf: self.sf,
            d_r: self.dr,
            d_i: self.di,
            seed: self.seed,
            ..DatasetSpec::default()
        }
    }

    fn load(&self) -> Result<Dataset> {
        match &self.data {
            Some(dir) => read_dataset(dir).with_context(|| format!("reading {}", dir.display())),
            None => Ok(generate(&self.spec())?),
        }
    }
}

#[derive(Args)]
struct RunOpts {
    #[command(flatten)]
    data: DataOpts,
    /// Query name or `all`.
    #[arg(long, default_value = "all")]
    query: String,
    /// enn, ivf, graph or `all`.
    #[arg(long, default_value = "all")]
    vs: String,
    /// Strategy name or `all`.
    #[arg(long, default_value = "all")]
    strategy: String,
    #[arg(long, default_value = "nvlink-c2c")]
    profile: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    nprobe: usize,
    #[arg(long, default_value_t = 128)]
    ef: usize,
    #[arg(long, default_value_t = 1)]
    batch: usize,
    /// Write runs.tsv and summary.txt here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn profile(name: &str) -> Result<HardwareProfile> {
    Ok(HardwareProfile::resolve(name)?)
}

fn indexes(ds: &Dataset, kinds: &[IndexKind]) -> Result<IndexRegistry> {
    Ok(IndexRegistry::build(ds, kinds, &IndexConfig::default())?)
}

fn all_or<T: std::str::FromStr<Err = hvec_core::Error> + Copy>(arg: &str, all: &[T]) -> Result<Vec<T>> {
    if arg.eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    arg.split(',').map(|s| Ok(s.trim().parse::<T>()?)).collect()
}

fn run(o: RunOpts) -> Result<()> {
    let queries: Vec<&str> = if o.query.eq_ignore_ascii_case("all") {
        QUERIES.to_vec()
    } else {
        let mut v = Vec::new();
        for q in o.query.split(',') {
            match QUERIES.iter().find(|n| n.eq_ignore_ascii_case(q.trim())) {
                Some(n) => v.push(*n),
                None => bail!("unknown query `{q}` (expected one of {})", QUERIES.join(", ")),
            }
        }
        v
    };
    let modes = all_or(&o.vs, &VS_MODES)?;
    let strategies = all_or(&o.strategy, &STRATEGIES)?;
    let prof = profile(&o.profile)?;
    let ds = o.data.load()?;
    let kinds: Vec<IndexKind> = modes.iter().filter(|m| !m.is_exact()).map(|m| m.index_kind()).collect();
    let reg = indexes(&ds, &kinds)?;
    let ctx = ExecContext {
        dataset: &ds,
        indexes: &reg,
        profile: &prof,
    };
    let params = PlanParams {
        k: o.k,
        nprobe: o.nprobe,
        ef: o.ef,
        batch: o.batch,
        ..PlanParams::default()
    };
    let (records, skipped) = run_matrix(&ctx, &queries, &modes, &strategies, &params)?;
    for (q, m, s, e) in &skipped {
        eprintln!("skipped {q} {m} {s}: {e}");
    }
    print!("{}", summary_table(&records));
    if let Some(dir) = o.out {
        let (runs, summary) = emit_report(&records, &dir)?;
        eprintln!("wrote {} and {}", runs.display(), summary.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen { data, out } => {
            let ds = generate(&data.spec())?;
            write_dataset(&ds, &out)?;
            eprintln!(
                "wrote {} ({} parts, {} reviews, {} images)",
                out.display(),
                ds.part.row_count(),
                ds.reviews.row_count(),
                ds.images.row_count()
            );
        }
        Cmd::Run(o) => run(o)?,
        Cmd::Plan {
            query,
            vs,
            strategy,
            profile: p,
        } => {
            let plan = builtin_plan(&query, vs, &PlanParams::default())?;
            let plan = match strategy {
                Some(s) => hvec_core::strategy::realize(&plan, s, &profile(&p)?)?,
                None => plan,
            };
            print!("{plan}");
        }
        Cmd::Sweep {
            data,
            batches,
            profile: p,
            k,
            k_prime,
            nprobe,
            ef,
        } => {
            let prof = profile(&p)?;
            let ds = data.load()?;
            let max = batches.iter().copied().max().unwrap_or(1);
            let queries = make_query_vectors(&ds, VectorKind::Review, max, data.seed)?;
            let params = SearchParams::new(k).with_k_prime(k_prime).with_nprobe(nprobe).with_ef(ef);
            let reg = indexes(&ds, &[IndexKind::Ivf, IndexKind::Graph])?;
            println!("index\tbatch\tline\tseconds");
            for kind in [IndexKind::Ivf, IndexKind::Graph] {
                let index: &VectorIndex = reg.get("reviews", "rv_embedding", kind)?;
                for pt in crossover_sweep(index, &queries, &batches, &params, &prof)? {
                    println!("{}\t{}\t{}\t{:.9}", pt.index, pt.batch, pt.line, pt.seconds);
                }
            }
        }
        Cmd::Decide {
            device_mem,
            index,
            batch,
            index_bytes,
            emb_bytes,
            rel_bytes,
            profile: p,
        } => {
            let sizes = ArtifactSizes {
                index_bytes,
                embedding_bytes: emb_bytes,
                relational_bytes: rel_bytes,
            };
            let d = choose_strategy(&MemoryBudget::new(device_mem), &sizes, index, batch, &profile(&p)?);
            match d.alternative {
                Some(alt) => println!("{} (alternative: {alt})", d.chosen),
                None => println!("{}", d.chosen),
            }
            println!("{}", d.rationale);
        }
        Cmd::Report { input, summary } => {
            let records = read_report(&input)?;
            if summary {
                print!("{}", summary_table(&records));
            } else {
                print!("{}", render_records(&records));
            }
        }
        Cmd::Tune { data, out } => {
            let prof = HardwareProfile::nvlink_c2c();
            let ds = data.load()?;
            let reg = indexes(&ds, &[IndexKind::Ivf, IndexKind::Graph])?;
            let ctx = ExecContext {
                dataset: &ds,
                indexes: &reg,
                profile: &prof,
            };
            let results = tune(&ctx, &PlanParams::default())?;
            for r in &results {
                match r.minimal {
                    Some(v) => println!("{}: minimal {} = {v}", r.mode, if r.mode == VsMode::Ivf { "nprobe" } else { "ef" }),
                    None => println!("{}: no setting met the targets", r.mode),
                }
            }
            if let Some(path) = out {
                std::fs::write(&path, render_tuning(&results))?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
