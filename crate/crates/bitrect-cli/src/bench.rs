use crate::util::{self, EXIT_OK};
use bitrect::benchgen::{gen_suite, presets, FamilyParams, SuiteEntry, SuiteSpec};
use clap::Args;
use std::path::PathBuf;

#[derive(Args)]
pub struct BenchArgs {
    /// Output directory for the `.bm` files and `manifest.jsonl`
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; per-instance seeds are derived from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Preset: random 10x10/10x20/10x30 at occupancies 10%..90%, 10 each
    #[arg(long, conflicts_with_all = ["family", "paper_random_large", "paper_planted", "paper_gap"])]
    pub paper_random_small: bool,
    /// Preset: random 100x100 at occupancies 1/2/5/10/20%, 10 each
    #[arg(long, conflicts_with_all = ["family", "paper_planted", "paper_gap"])]
    pub paper_random_large: bool,
    /// Preset: planted 10x10 optima k=1..=10, 10 each
    #[arg(long, conflicts_with_all = ["family", "paper_gap"])]
    pub paper_planted: bool,
    /// Preset: gap 10x10 with 2..=5 row pairs, 100 each
    #[arg(long, conflicts_with = "family")]
    pub paper_gap: bool,

    /// Custom family: random, planted, or gap
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub rows: usize,
    #[arg(long, default_value_t = 10)]
    pub cols: usize,
    /// Occupancy for the random family
    #[arg(long)]
    pub p: Option<f64>,
    /// Rank / pair count for the planted and gap families
    #[arg(long)]
    pub k: Option<usize>,
    /// Instances to generate for a custom family
    #[arg(long, default_value_t = 10)]
    pub count: usize,
}

pub fn run(args: &BenchArgs) -> u8 {
    let mut specs: Vec<SuiteSpec> = Vec::new();
    if args.paper_random_small {
        specs.push(presets::random_small(args.seed));
    }
    if args.paper_random_large {
        specs.push(presets::random_large(args.seed));
    }
    if args.paper_planted {
        specs.push(presets::planted(args.seed));
    }
    if args.paper_gap {
        specs.push(presets::gap(args.seed));
    }
    if let Some(family) = &args.family {
        let params = match family.as_str() {
            "random" => match args.p {
                Some(p) => FamilyParams::Random {
                    rows: args.rows,
                    cols: args.cols,
                    p,
                },
                None => return util::input_error("--family random", "requires --p"),
            },
            "planted" => match args.k {
                Some(k) => FamilyParams::Planted {
                    rows: args.rows,
                    cols: args.cols,
                    k,
                },
                None => return util::input_error("--family planted", "requires --k"),
            },
            "gap" => match args.k {
                Some(k) => FamilyParams::Gap {
                    rows: args.rows,
                    cols: args.cols,
                    k,
                },
                None => return util::input_error("--family gap", "requires --k"),
            },
            other => return util::input_error("--family", format!("unknown family {other}")),
        };
        specs.push(SuiteSpec {
            name: "custom".into(),
            master_seed: args.seed,
            entries: vec![SuiteEntry {
                params,
                count: args.count,
            }],
        });
    }
    if specs.is_empty() {
        return util::input_error("bench", "choose a preset or --family");
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return util::input_error(&format!("creating {}", args.out.display()), e);
    }
    let mut manifest = String::new();
    let mut total = 0usize;
    for spec in &specs {
        let suite = match gen_suite(spec) {
            Ok(s) => s,
            Err(e) => return util::input_error("generating", e),
        };
        for (record, instance) in &suite.items {
            let path = args.out.join(&record.path);
            if let Err(e) = std::fs::write(&path, instance.matrix.to_text()) {
                return util::input_error(&format!("writing {}", path.display()), e);
            }
            total += 1;
        }
        manifest.push_str(&suite.manifest_jsonl());
    }
    let manifest_path = args.out.join("manifest.jsonl");
    if let Err(e) = std::fs::write(&manifest_path, manifest) {
        return util::input_error(&format!("writing {}", manifest_path.display()), e);
    }
    eprintln!("generated {total} instances in {}", args.out.display());
    EXIT_OK
}
