use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use branchlab::blocks::{build_block, verify_block, BlockStructure, DiagonalSpec, VerifyBudget};
use branchlab::detect::{block_detect, DetectBudget, SubgroupHandle};
use branchlab::group_defs::preset;
use branchlab::level_quotient::{LevelQuotient, SubgroupImage};
use branchlab::structure::{
    check_prop_4_2, check_prop_4_3, declared_branching, maximal_branching_candidate, regular_branch_check,
    spherical_transitivity, tree_primitive, KGeneration,
};
use branchlab::{
    ggs, parse_group, EqBudget, GgsSpec, SelfSimilarGroup, Status, TreeAutomorphism, Verdict, VertexSet, Word,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "bl", version, about = "Exact computation in self-similar groups")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Preset (`grigorchuk`, `ggs:3:1,2`) or path to a group definition file.
    #[arg(long, global = true, default_value = "grigorchuk")]
    group: String,
    #[arg(long, global = true, value_enum, default_value_t = Report::Text)]
    report: Report,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Recursion depth for the word problem.
    #[arg(long, global = true, default_value_t = 64)]
    budget_depth: usize,
    /// Distinct states visited by the word problem.
    #[arg(long, global = true, default_value_t = 100_000)]
    budget_states: usize,
    /// Allow quotients above the default point cap.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Report {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KMode {
    Subgroup,
    Normal,
}

#[derive(Subcommand)]
enum Cmd {
    /// Image of a vertex under an element.
    Act {
        #[arg(long)]
        elem: String,
        #[arg(long)]
        word: String,
    },
    /// Section of an element at a vertex.
    Section {
        #[arg(long)]
        elem: String,
        #[arg(long)]
        vertex: String,
    },
    /// Decides whether two elements are equal.
    Eq {
        #[arg(long)]
        elem: String,
        #[arg(long, default_value = "e")]
        other: String,
    },
    /// Order of the level quotient or of a subgroup image in it.
    Quotient {
        #[arg(short = 'n', long)]
        level: usize,
        #[command(flatten)]
        sub: SubArg,
    },
    /// Orbits on a level.
    Orbits {
        #[arg(short = 'n', long)]
        level: usize,
        /// Level whose orbits are listed (defaults to `n`).
        #[arg(long)]
        at: Option<usize>,
        #[command(flatten)]
        sub: SubArg,
    },
    /// Tree-primitivity with the invariant partition census.
    Treeprim {
        #[arg(short = 'n', long)]
        level: usize,
        #[command(flatten)]
        sub: SubArg,
    },
    /// Primitivity on children and the fix-one-move-other condition.
    Prop42 {
        #[arg(short = 'n', long)]
        level: usize,
        #[command(flatten)]
        sub: SubArg,
    },
    /// Self-replicating two-level condition.
    Prop43 {
        #[arg(short = 'n', long, default_value_t = 2)]
        level: usize,
        #[arg(long, requires = "y0")]
        x0: Option<u8>,
        #[arg(long, requires = "x0")]
        y0: Option<u8>,
    },
    /// Regular branch check over K.
    BranchCheck {
        #[arg(short = 'n', long)]
        level: usize,
        #[command(flatten)]
        k: KArg,
    },
    /// Section images of rigid stabilizers along the leftmost ray.
    Maxbranch {
        #[arg(short = 'n', long)]
        level: usize,
        #[command(flatten)]
        k: KArg,
    },
    /// Generators of a block subgroup over K.
    BlockBuild {
        /// Parts separated by `;`, vertices by `,`, e.g. `000,001;1`.
        #[arg(long)]
        parts: String,
        #[command(flatten)]
        k: KArg,
    },
    /// Checks the block clauses for given generators and structure.
    BlockVerify {
        /// Generator elements separated by `;`.
        #[arg(long)]
        gens: String,
        #[arg(long, conflicts_with = "structure")]
        parts: Option<String>,
        /// File with `part:` and `regular-over:` lines.
        #[arg(long)]
        structure: Option<String>,
        /// Also check that every section image equals K.
        #[arg(long)]
        regular: bool,
        #[arg(short = 'n', long, default_value_t = 5)]
        level: usize,
        #[arg(long, default_value_t = 4)]
        budget_kernel: usize,
        #[command(flatten)]
        k: KArg,
    },
    /// Recovers the block structure of a finitely generated subgroup.
    Detect {
        #[arg(long)]
        gens: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(short = 'n', long, default_value_t = 5)]
        level: usize,
        #[arg(long, default_value_t = 12)]
        budget_srist: usize,
        #[arg(long, default_value_t = 512)]
        budget_finite: usize,
        #[arg(long, default_value_t = 1000)]
        budget_pool: usize,
    },
    /// A GGS group and its torsion criterion.
    Ggs {
        #[arg(long)]
        p: usize,
        /// Defining vector, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        e: String,
        /// Report only the torsion criterion; exit 0 when torsion, 1 otherwise.
        #[arg(long)]
        torsion: bool,
    },
}

#[derive(Args)]
struct SubArg {
    /// Subgroup generators separated by `;` (defaults to the whole group).
    #[arg(long)]
    gens: Option<String>,
}

#[derive(Args)]
struct KArg {
    /// Generators of K separated by `;` (defaults to the declared branching subgroup).
    #[arg(long)]
    k: Option<String>,
    #[arg(long, value_enum, default_value_t = KMode::Normal)]
    k_mode: KMode,
}

struct Usage(String);

fn usage(flag: &str, e: impl std::fmt::Display) -> Usage {
    Usage(format!("{flag}: {e}"))
}

struct Outcome {
    status: Status,
    text: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(USAGE);
        }
    }
    match run(&cli) {
        Ok(out) => {
            let body = match cli.report {
                Report::Text => out.text,
                Report::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
            };
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}

fn load_group(spec: &str) -> Result<Arc<SelfSimilarGroup>, Usage> {
    if std::path::Path::new(spec).is_file() {
        let text = std::fs::read_to_string(spec).map_err(|e| usage("--group", e))?;
        return parse_group(&text).map(Arc::new).map_err(|e| usage("--group", e));
    }
    preset(spec).map_err(|e| usage("--group", e))
}

fn elem(g: &Arc<SelfSimilarGroup>, flag: &str, text: &str) -> Result<TreeAutomorphism, Usage> {
    TreeAutomorphism::parse(g, text).map_err(|e| usage(flag, e))
}

fn elems(g: &Arc<SelfSimilarGroup>, flag: &str, text: &str) -> Result<Vec<TreeAutomorphism>, Usage> {
    let out: Vec<TreeAutomorphism> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| elem(g, flag, s))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(usage(flag, "no elements given"));
    }
    Ok(out)
}

fn parse_parts(d: usize, flag: &str, text: &str) -> Result<BlockStructure, Usage> {
    let parts: Vec<VertexSet> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| VertexSet::parse(d, s))
        .collect::<Result<_, _>>()
        .map_err(|e| usage(flag, e))?;
    BlockStructure::new(parts).map_err(|e| usage(flag, e))
}

fn k_gens(g: &Arc<SelfSimilarGroup>, k: &KArg) -> Result<(Vec<TreeAutomorphism>, KGeneration), Usage> {
    let mode = match k.k_mode {
        KMode::Subgroup => KGeneration::Subgroup,
        KMode::Normal => KGeneration::NormalClosure,
    };
    match &k.k {
        Some(text) => Ok((elems(g, "--k", text)?, mode)),
        None => {
            let gens = declared_branching(g);
            if gens.is_empty() {
                return Err(usage("--k", "the group declares no branching subgroup"));
            }
            Ok((gens, KGeneration::NormalClosure))
        }
    }
}

impl Cli {
    fn eq_budget(&self) -> EqBudget {
        EqBudget {
            max_depth: self.budget_depth,
            max_states: self.budget_states,
        }
    }

    fn quotient(&self, g: &Arc<SelfSimilarGroup>, n: usize) -> Result<LevelQuotient, Usage> {
        let q = if self.force {
            LevelQuotient::build_with_cap(g, n, usize::MAX)
        } else {
            LevelQuotient::build(g, n)
        };
        q.map_err(|e| usage("--level", e))
    }

    fn image(&self, g: &Arc<SelfSimilarGroup>, n: usize, sub: &SubArg) -> Result<SubgroupImage, Usage> {
        let q = self.quotient(g, n)?;
        Ok(match &sub.gens {
            Some(text) => q.image_of(&elems(g, "--gens", text)?),
            None => q.whole(),
        })
    }
}

fn verdict_outcome(v: &Verdict, mut text: String, json: Value) -> Outcome {
    text.push_str(&format!("{v}\n"));
    Outcome {
        status: v.status,
        text,
        json,
    }
}

fn lib(flag: &'static str) -> impl Fn(branchlab::Error) -> Usage {
    move |e| usage(flag, e)
}

fn join_words<'a>(ws: impl IntoIterator<Item = &'a Word>) -> String {
    let v: Vec<String> = ws.into_iter().map(|w| w.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

fn run(cli: &Cli) -> Result<Outcome, Usage> {
    if let Cmd::Ggs { p, e, torsion } = &cli.cmd {
        return run_ggs(*p, e, *torsion);
    }
    let g = load_group(&cli.group)?;
    let d = g.arity();
    Ok(match &cli.cmd {
        Cmd::Act { elem: e, word } => {
            let x = elem(&g, "--elem", e)?;
            let w = Word::parse(d, word).map_err(lib("--word"))?;
            let img = x.act(&w);
            Outcome {
                status: Status::Proven,
                text: format!("{img}\n"),
                json: json!({"elem": x, "word": w, "image": img}),
            }
        }
        Cmd::Section { elem: e, vertex } => {
            let x = elem(&g, "--elem", e)?;
            let v = Word::parse(d, vertex).map_err(lib("--vertex"))?;
            let s = x.section(&v);
            Outcome {
                status: Status::Proven,
                text: format!("{s}\n"),
                json: json!({"elem": x, "vertex": v, "section": s}),
            }
        }
        Cmd::Eq { elem: e, other } => {
            let x = elem(&g, "--elem", e)?;
            let y = elem(&g, "--other", other)?;
            let v = x.equals(&y, &cli.eq_budget());
            verdict_outcome(&v, String::new(), json!({"elem": x, "other": y, "verdict": v}))
        }
        Cmd::Quotient { level, sub } => {
            let img = cli.image(&g, *level, sub)?;
            let whole = img.quotient().order();
            let order = img.order();
            let mut text = format!("level: {level}\npoints: {}\norder: {order}\n", img.quotient().degree());
            let mut json = json!({"level": level, "order": order.to_string(), "group_order": whole.to_string()});
            if sub.gens.is_some() {
                let index = img.index_in(&img.quotient().whole()).map(|i| i.to_string());
                text.push_str(&format!(
                    "group order: {whole}\nindex: {}\n",
                    index.as_deref().unwrap_or("?")
                ));
                json["index"] = json!(index);
            }
            Outcome {
                status: Status::Proven,
                text,
                json,
            }
        }
        Cmd::Orbits { level, at, sub } => {
            let img = cli.image(&g, *level, sub)?;
            let k = at.unwrap_or(*level);
            if k > *level {
                return Err(usage("--at", format!("level {k} is above the quotient level {level}")));
            }
            let orbits: Vec<Vec<Word>> = img
                .orbits(k)
                .into_iter()
                .map(|o| o.into_iter().map(|i| Word::from_level_index(d, k, i)).collect())
                .collect();
            let mut text = format!("orbits on level {k}: {}\n", orbits.len());
            for o in &orbits {
                text.push_str(&format!("{}\n", join_words(o)));
            }
            let transitive = spherical_transitivity(&img);
            Outcome {
                status: Status::Proven,
                text,
                json: json!({"level": k, "orbits": orbits, "spherically_transitive": transitive}),
            }
        }
        Cmd::Treeprim { level, sub } => {
            let img = cli.image(&g, *level, sub)?;
            let r = tree_primitive(&img);
            let counts: Vec<String> = r.census.iter().map(|c| c.to_string()).collect();
            let mut text = format!(
                "census: levels 0..{}: {} invariant partitions\n",
                r.census.len() - 1,
                counts.join(",")
            );
            if let Some(x) = &r.exotic {
                let parts: Vec<String> = x.parts.iter().map(join_words).collect();
                text.push_str(&format!("exotic partition at level {}: {}\n", x.level, parts.join(" ")));
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::Prop42 { level, sub } => {
            let img = cli.image(&g, *level, sub)?;
            let r = check_prop_4_2(&img);
            let status = r.primitive_on_children.status.and(r.fix_one_move_other.status);
            Outcome {
                status,
                text: format!(
                    "primitive on children: {}\nfix one, move other: {}\n",
                    r.primitive_on_children, r.fix_one_move_other
                ),
                json: json!(r),
            }
        }
        Cmd::Prop43 { level, x0, y0 } => {
            let pair = x0.zip(*y0);
            let r = check_prop_4_3(&g, *level, pair).map_err(lib("--level"))?;
            let mut text = String::new();
            for c in &r.conditions {
                text.push_str(&format!("{}: {}\n", c.name, c.verdict));
            }
            if let (Some(x), Some(y), Some(e)) = (r.x0, r.y0, &r.element) {
                text.push_str(&format!("witness: x0={x} y0={y} element {e}\n"));
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::BranchCheck { level, k } => {
            let (gens, mode) = k_gens(&g, k)?;
            let r = regular_branch_check(&g, &gens, mode, *level).map_err(lib("--level"))?;
            let mut text = String::new();
            for e in &r.index_chain {
                text.push_str(&format!(
                    "level {}: [G:K] = {}, projection index {}\n",
                    e.level,
                    e.index_in_g,
                    e.projection_index.as_deref().unwrap_or("-")
                ));
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::Maxbranch { level, k } => {
            let (gens, mode) = k_gens(&g, k)?;
            let r = maximal_branching_candidate(&g, &gens, mode, *level).map_err(lib("--level"))?;
            let mut text = String::new();
            for row in &r.rows {
                text.push_str(&format!(
                    "k {} (level {}): section order {}, index of K {}\n",
                    row.k,
                    row.quotient_level,
                    row.section_order,
                    row.index.as_deref().unwrap_or("-")
                ));
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::BlockBuild { parts, k } => {
            let s = parse_parts(d, "--parts", parts)?;
            let (kg, _) = k_gens(&g, k)?;
            let specs: Vec<DiagonalSpec> = s
                .parts
                .iter()
                .map(|p| DiagonalSpec {
                    support: p.clone(),
                    generators: kg.clone(),
                })
                .collect();
            let (gens, mut structure) = build_block(&specs).map_err(lib("--parts"))?;
            structure.regular_over = Some("K".into());
            let mut text = String::new();
            for x in &gens {
                text.push_str(&format!("gen: {x}\n"));
            }
            text.push_str(&structure.to_string());
            Outcome {
                status: Status::Proven,
                text,
                json: json!({"generators": gens, "structure": structure}),
            }
        }
        Cmd::BlockVerify {
            gens,
            parts,
            structure,
            regular,
            level,
            budget_kernel,
            k,
        } => {
            let h = elems(&g, "--gens", gens)?;
            let s = match (parts, structure) {
                (Some(p), _) => parse_parts(d, "--parts", p)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(|e| usage("--structure", e))?;
                    BlockStructure::parse(d, &text).map_err(lib("--structure"))?
                }
                (None, None) => return Err(Usage("one of --parts or --structure is required".into())),
            };
            let kk = if *regular || s.regular_over.is_some() {
                Some(k_gens(&g, k)?)
            } else {
                None
            };
            let budget = VerifyBudget {
                levels: *level,
                eq: cli.eq_budget(),
                kernel_len: *budget_kernel,
            };
            let r = verify_block(&g, &h, &s, kk.as_ref().map(|(x, m)| (x.as_slice(), *m)), &budget)
                .map_err(lib("--structure"))?;
            let mut text = String::new();
            for p in &r.parts {
                text.push_str(&format!("part {}\n", p.support));
                text.push_str(&format!("  srist: {}\n", p.srist.status));
                text.push_str(&format!("  finite index: {}\n", p.finite_index.status));
                text.push_str(&format!("  injective: {}\n", p.injective.status));
                if let Some(v) = &p.regular {
                    text.push_str(&format!("  regular: {}\n", v.status));
                }
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::Detect {
            gens,
            depth,
            level,
            budget_srist,
            budget_finite,
            budget_pool,
        } => {
            let h = SubgroupHandle::new(&g, elems(&g, "--gens", gens)?).map_err(lib("--gens"))?;
            let budget = DetectBudget {
                depth: *depth,
                levels: *level,
                srist_len: *budget_srist,
                finite_cap: *budget_finite,
                pool_cap: *budget_pool,
                eq: cli.eq_budget(),
            };
            let r = block_detect(&h, &budget).map_err(lib("--gens"))?;
            let mut text = format!("supporting set: {}\n", join_words(&r.support.supporting));
            if let Some(s) = &r.structure {
                text.push_str(&s.to_string());
            }
            if let (Some(s), Some(c)) = (&r.structure, &r.coarsened) {
                if c.parts != s.parts {
                    text.push_str("descendant refinement of:\n");
                    for p in &c.parts {
                        text.push_str(&format!("  part: {p}\n"));
                    }
                }
            }
            verdict_outcome(&r.verdict, text, json!(r))
        }
        Cmd::Ggs { .. } => unreachable!("handled above"),
    })
}

fn run_ggs(p: usize, e: &str, torsion_only: bool) -> Result<Outcome, Usage> {
    let e: Vec<i64> = e
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|err| usage("--e", err))?;
    let spec = GgsSpec::new(p, &e).map_err(|err| usage("--e", err))?;
    let (group, torsion) = ggs(&spec);
    let status = match torsion {
        Some(true) => Status::Proven,
        Some(false) => Status::Refuted,
        None => Status::UnknownAtBudget,
    };
    let torsion_line = match torsion {
        Some(t) => format!("torsion: {t}\n"),
        None => "torsion: undetermined (alphabet size is not prime)\n".to_string(),
    };
    let text = if torsion_only {
        torsion_line
    } else {
        format!("{}{torsion_line}", group.to_text())
    };
    Ok(Outcome {
        status: if torsion_only { status } else { Status::Proven },
        text,
        json: json!({"p": p, "e": spec.exponents(), "torsion": torsion, "group": group.to_text()}),
    })
}
