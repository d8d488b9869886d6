use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use conjlab::arith::parse_decimal;
use conjlab::cryptanalysis::{bsgs_break, platform_orbit_stats};
use conjlab::kex::{effective_key_count, run_demo, GroupValue, Platform, Transcript};
use conjlab::treegroup::{
    derived_subgroup, group_order, level_subgroup_elements, minimal_generating_size, SylowTree,
    TreeParams, Variant,
};
use conjlab::verify::{self, Suite, VerifyConfig};
use conjlab::group::GroupLaw;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "conjlab", version, about = "Conjugacy key exchange laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a key exchange between two seeded parties
    Demo(DemoArgs),
    /// Check the structural claims by enumeration
    Verify(VerifyArgs),
    /// Recover the shared key of a metacyclic transcript
    Attack(AttackArgs),
    /// Sylow 2-subgroup facts for one tree depth
    Tree(TreeArgs),
    /// Conjugacy class histogram and key-space figures
    Stats(StatsArgs),
    /// Multiply, invert or conjugate canonical element strings
    Element(ElementArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PlatformArg {
    Metacyclic,
    Heisenberg,
    Tree,
}

#[derive(Args)]
struct PlatformArgs {
    #[arg(long, value_enum)]
    platform: PlatformArg,
    #[arg(short = 'p')]
    p: Option<String>,
    #[arg(short = 'm')]
    m: Option<u32>,
    #[arg(short = 'n')]
    n: Option<u32>,
    #[arg(short = 'k')]
    k: Option<u32>,
}

impl PlatformArgs {
    fn build(&self) -> Result<Platform, String> {
        match self.platform {
            PlatformArg::Metacyclic | PlatformArg::Heisenberg => {
                let p = self.p.as_deref().ok_or("-p is required")?;
                let p = parse_decimal(p).map_err(|e| e.to_string())?;
                let m = self.m.ok_or("-m is required")?;
                let n = self.n.ok_or("-n is required")?;
                let built = match self.platform {
                    PlatformArg::Metacyclic => Platform::metacyclic(p, m, n),
                    _ => Platform::heisenberg(p, m, n),
                };
                built.map_err(|e| e.to_string())
            }
            PlatformArg::Tree => {
                let k = self.k.ok_or("-k is required")?;
                Platform::tree(k).map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    platform: PlatformArgs,
    #[arg(long, default_value_t = 1)]
    seed_a: u64,
    #[arg(long, default_value_t = 2)]
    seed_b: u64,
    /// Where to write the transcript
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Append the honest key to the transcript, for grading attacks
    #[arg(long)]
    debug_key: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = verify::DEFAULT_MAX_ORDER)]
    max_order: u64,
    /// Include depth-4 tree checks
    #[arg(long)]
    long: bool,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    transcript: PathBuf,
}

#[derive(Args)]
struct TreeArgs {
    #[arg(short = 'k')]
    k: u32,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    platform: PlatformArgs,
    #[arg(long, default_value_t = verify::DEFAULT_MAX_ORDER)]
    cap: u64,
}

#[derive(Args)]
#[group(id = "op", required = true, multiple = false)]
struct ElementOp {
    #[arg(long)]
    mul: bool,
    #[arg(long)]
    inv: bool,
    #[arg(long)]
    conj: bool,
}

#[derive(Args)]
struct ElementArgs {
    #[command(flatten)]
    op: ElementOp,
    #[arg(required = true)]
    elements: Vec<String>,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn cmd_demo(args: DemoArgs) -> ExitCode {
    let platform = match args.platform.build() {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let outcome = match run_demo(&platform, args.seed_a, args.seed_b) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let alice = String::from_utf8_lossy(&outcome.alice_key).into_owned();
    let bob = String::from_utf8_lossy(&outcome.bob_key).into_owned();
    if let Some(path) = &args.transcript {
        let mut transcript = outcome.transcript.clone();
        if args.debug_key {
            transcript.debug_key = Some(alice.clone());
        }
        if let Err(e) = fs::write(path, transcript.to_ndjson()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_FAILED);
        }
    }
    println!("alice_key={alice}");
    println!("bob_key={bob}");
    if outcome.keys_match() {
        eprintln!("keys match");
        ExitCode::SUCCESS
    } else {
        eprintln!("keys differ");
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let suite: Suite = match args.suite.parse() {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let results = verify::run_suite(
        suite,
        VerifyConfig {
            max_order: args.max_order,
            long: args.long,
        },
    );
    for r in &results {
        println!("{}", r.to_json());
    }
    eprint!("{}", verify::summary_table(&results));
    if verify::all_pass(&results) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn cmd_attack(args: AttackArgs) -> ExitCode {
    let text = match fs::read_to_string(&args.transcript) {
        Ok(t) => t,
        Err(e) => return usage(format!("cannot read {}: {e}", args.transcript.display())),
    };
    let transcript = match Transcript::parse(&text) {
        Ok(t) => t,
        Err(e) => return usage(format!("malformed transcript: {e}")),
    };
    if !matches!(transcript.platform, Platform::Metacyclic(_)) {
        return usage("the attack supports metacyclic transcripts only");
    }
    let Some(honest) = transcript.debug_key.clone() else {
        return usage("transcript carries no debug key to grade against");
    };
    let report = match bsgs_break(&transcript.base, &transcript.alice_public, &transcript.bob_public) {
        Ok(r) => r,
        Err(e) => return usage(format!("attack failed: {e}")),
    };
    println!("{}", report.to_json());
    if report.recovered_key == honest {
        eprintln!("recovered key matches");
        ExitCode::SUCCESS
    } else {
        eprintln!("recovered key differs from the honest key");
        ExitCode::from(EXIT_FAILED)
    }
}

fn cmd_tree(args: TreeArgs) -> ExitCode {
    let params = match TreeParams::new(args.k) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    println!("k={}", args.k);
    println!("sylow_s_order={}", group_order(Variant::Symmetric, params));
    println!("sylow_a_order={}", group_order(Variant::Alternating, params));
    for level in 0..args.k.min(conjlab::treegroup::MAX_ENUM_LEVEL + 1) {
        match level_subgroup_elements(level, params, false) {
            Ok(elems) => println!("level_subgroup_order[{level}]={}", elems.len()),
            Err(e) => return usage(e),
        }
    }
    let alt = SylowTree::new(params, Variant::Alternating);
    match derived_subgroup(&alt.generators(), params) {
        Ok(derived) => {
            println!("derived_order={}", derived.len());
            match minimal_generating_size(&derived, params) {
                Ok(d) => println!("derived_min_generators={d}"),
                Err(e) => return usage(e),
            }
        }
        Err(e) => eprintln!("derived subgroup skipped: {e}"),
    }
    ExitCode::SUCCESS
}

fn cmd_stats(args: StatsArgs) -> ExitCode {
    let platform = match args.platform.build() {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let hist = match platform_orbit_stats(&platform, args.cap) {
        Ok(h) => h,
        Err(e) => return usage(e),
    };
    for (size, count) in &hist {
        println!("class_size={size} count={count}");
    }
    if let Platform::Metacyclic(g) = &platform {
        println!("center_order={}", g.center_order());
        println!("claimed_key_space=p^(m+n-2)={}", g.center_order());
    }
    match effective_key_count(&platform, &platform.default_base()) {
        Ok(n) => println!("effective_key_count={n}"),
        Err(e) => return usage(e),
    }
    ExitCode::SUCCESS
}

fn cmd_element(args: ElementArgs) -> ExitCode {
    let values: Result<Vec<GroupValue>, _> = args.elements.iter().map(|s| s.parse()).collect();
    let values = match values {
        Ok(v) => v,
        Err(e) => return usage(e),
    };
    let platform = Platform::of_value(&values[0]);
    let (arity, result) = if args.op.mul {
        (2, values.get(1).map(|h| platform.multiply(&values[0], h)))
    } else if args.op.inv {
        (1, Some(platform.inverse(&values[0])))
    } else {
        (2, values.get(1).map(|x| platform.conjugate(&values[0], x)))
    };
    if values.len() != arity {
        return usage(format!("expected {arity} element(s), got {}", values.len()));
    }
    match result.expect("arity checked") {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => usage(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Demo(a) => cmd_demo(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Tree(a) => cmd_tree(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Element(a) => cmd_element(a),
    }
}
