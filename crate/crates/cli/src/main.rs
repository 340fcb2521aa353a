use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;

use richset::arithfun::{
    convergents, discrepancy, epsilon_dense_threshold, leveque_bound, weyl_sum, HpReal, Poly, TorusSample,
};
use richset::certificate::Certificate;
use richset::constructions::{self, ASeq, DSeq};
use richset::density::{banach_density_lower_bound, folner_drift, lower_density_profile, parse_pool, translate_level_set, FolnerWindow};
use richset::finitefield::{empirical_threshold, field_build, kth_power_subgroup, prime_power, witness_certificate, witness_translate, Field, FieldFamily};
use richset::largeness::{
    check_piecewise_syndetic, check_syndetic, combinatorial_richness_witness, ip_r_certificate, ip_r_star_refute,
    mult_thick_witness, richness_certificate, thick_certificate, thick_profile, SyndeticOutcome,
};
use richset::normform::{ap_search, closure_check, enumerate_represented, prime_relative_density, NormForm};
use richset::patterns::{self, find_combinatorial_line, GeoArithPools, Pools, VariableWord};
use richset::registry::{load_set, parse_int};
use richset::{Error, GroundStructure, Result, Set, SetHandle};

#[derive(Parser)]
#[command(name = "richset", version, about = "Largeness certificates, densities and patterns for sets of integers")]
struct Cli {
    /// Cap on elements scanned by budgeted searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the primary output here instead of stdout (a directory for `run`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sampling (never changes search results).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit members of a named construction, or its hypothesis report.
    Construct(ConstructArgs),
    #[command(subcommand)]
    Largeness(LargenessCmd),
    /// Banach density lower bounds, translate level sets, profiles, drift.
    Density(DensityArgs),
    #[command(subcommand)]
    Patterns(PatternsCmd),
    #[command(subcommand)]
    Equidist(EquidistCmd),
    #[command(subcommand)]
    Ff(FfCmd),
    #[command(subcommand)]
    Normform(NormformCmd),
    /// Check a certificate against a set; exit code 0 iff every claim holds.
    Verify {
        certificate: PathBuf,
        /// Set literal file (JSON) or descriptor file; a descriptor may also be given inline.
        set: Option<String>,
    },
    /// Run an experiment config.
    Run { config: PathBuf },
}

#[derive(Args)]
struct ConstructArgs {
    /// Construction name or full descriptor, e.g. `divisible_union` or `thick_no_kxy(5)`.
    name: String,
    /// Extra positional parameters, appended as `name(p1, p2, ...)`.
    params: Vec<String>,
    #[arg(long)]
    emit_upto: Option<String>,
    #[arg(long)]
    validate: bool,
}

#[derive(Args)]
struct SetArg {
    /// Set descriptor, JSON literal, or @file.
    #[arg(long)]
    set: String,
    #[arg(long, default_value = "nat+")]
    ground: String,
}

#[derive(Subcommand)]
enum LargenessCmd {
    /// Check that F covers every n in [1, horizon].
    Syndetic {
        #[command(flatten)]
        s: SetArg,
        #[arg(long, value_delimiter = ',')]
        f: Vec<String>,
        #[arg(long)]
        horizon: u64,
    },
    /// Maximal runs in [1, horizon]; with --f, a translate x with xF ⊆ A.
    Thick {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        horizon: String,
        #[arg(long, value_delimiter = ',')]
        f: Vec<String>,
    },
    /// Thick profile of the union of quotients f⁻¹A.
    Piecewise {
        #[command(flatten)]
        s: SetArg,
        #[arg(long, value_delimiter = ',')]
        f: Vec<String>,
        #[arg(long)]
        horizon: String,
    },
    /// Least IP_r certificate with generators <= bound.
    Ip {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        bound: String,
    },
    /// IP_r set inside the complement of A over [lo, hi).
    IpStar {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
    },
    /// Combinatorial richness witness for a matrix (rows separated by `;`).
    Rich {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        pool: String,
    },
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    s: SetArg,
    /// add:n,m or mult:n,m
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    pool: Option<String>,
    /// With --window and --pool: list the shifts reaching density beta (a/b).
    #[arg(long)]
    beta: Option<String>,
    /// Lower-density profile up to this N.
    #[arg(long)]
    profile: Option<String>,
    /// Følner drift of --window under this element.
    #[arg(long)]
    drift: Option<String>,
}

#[derive(Args)]
struct RangeArg {
    #[command(flatten)]
    s: SetArg,
    #[arg(long, default_value = "1")]
    lo: String,
    #[arg(long)]
    hi: String,
}

#[derive(Subcommand)]
enum PatternsCmd {
    Ap(RangeArg),
    Gp(RangeArg),
    Genap {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        bound: u64,
    },
    Geocube {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        bound: u64,
    },
    Geoarith {
        #[command(flatten)]
        s: SetArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        bound: u64,
    },
    /// Combinatorial line in a set of words over [n]^r, one word per line in --words.
    Hjline {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        words: PathBuf,
    },
}

#[derive(Subcommand)]
enum EquidistCmd {
    Weyl {
        /// Coefficients, constant term first: `0,0,sqrt(2)`.
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 0)]
        m: i64,
        #[arg(long)]
        n: u64,
    },
    Disc {
        #[arg(long)]
        poly: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        h: u64,
    },
    Leveque {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        h: u64,
    },
    Threshold {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "1")]
        xi: String,
        #[arg(long)]
        eps: String,
        #[arg(long, value_delimiter = ';', default_value = "0")]
        beta: Vec<String>,
        #[arg(long, default_value_t = 1_000_000)]
        n_max: u64,
    },
    Convergents {
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 10)]
        terms: usize,
    },
}

#[derive(Subcommand)]
enum FfCmd {
    Build {
        #[arg(long)]
        q: u64,
    },
    Subgroup {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
    },
    Witness {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, value_delimiter = ',')]
        f: Vec<u32>,
        #[arg(long, default_value_t = 1)]
        g: u32,
    },
    Threshold {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 2)]
        qmin: u64,
        #[arg(long)]
        qmax: u64,
        #[arg(long, default_value = "prime")]
        family: String,
    },
}

#[derive(Args)]
struct FormArg {
    /// quadratic:a=-1, cubic:a=2, or form:c:e1,e2;...
    #[arg(long)]
    preset: String,
    #[arg(long = "box")]
    box_b: i64,
    #[arg(long)]
    limit: String,
}

#[derive(Subcommand)]
enum NormformCmd {
    Enum(FormArg),
    Closure {
        #[command(flatten)]
        f: FormArg,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    Ap {
        #[command(flatten)]
        f: FormArg,
        #[arg(long, default_value_t = 3)]
        len: u64,
    },
    Primes {
        #[command(flatten)]
        f: FormArg,
        #[arg(long)]
        n: u64,
    },
    Eval {
        #[arg(long)]
        preset: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        z: Vec<String>,
    },
}

struct Ctx {
    out: Option<PathBuf>,
    seed: u64,
    budget: Option<u64>,
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text)?,
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }

    fn json<T: Serialize>(&self, v: &T) -> Result<()> {
        self.emit(&(serde_json::to_string_pretty(v)? + "\n"))
    }

    fn csv(&self, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        self.emit(&String::from_utf8(bytes).expect("utf8"))
    }

    fn check_budget(&self, n: u64) -> Result<()> {
        match self.budget {
            Some(b) if n > b => Err(Error::BudgetExceeded(format!("{n} elements requested, budget {b}"))),
            _ => Ok(()),
        }
    }
}

fn read_set(s: &str) -> Result<SetHandle> {
    match s.strip_prefix('@') {
        Some(path) => load_set(&std::fs::read_to_string(path)?),
        None => load_set(s),
    }
}

fn ints(v: &[String]) -> Result<Vec<BigInt>> {
    v.iter().map(|x| parse_int(x)).collect()
}

fn u64_of(x: &BigInt) -> Result<u64> {
    u64::try_from(x.clone()).map_err(|_| Error::InvalidArgument(format!("{x} does not fit in 64 bits")))
}

fn maybe_cert(ctx: &Ctx, cert: Option<Certificate>, what: &str) -> Result<()> {
    match cert {
        Some(c) => ctx.emit(&(c.to_json() + "\n")),
        None => ctx.json(&serde_json::json!({ "result": "absent", "search": what })),
    }
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> Result<()> {
    let descr = if a.params.is_empty() { a.name.clone() } else { format!("{}({})", a.name, a.params.join(",")) };
    if a.validate {
        let base = descr.split('(').next().unwrap_or("").trim();
        return match base {
            "thick_no_kxy" => {
                let i_max = a.params.first().map(|s| s.parse::<u32>()).transpose().map_err(|_| Error::Parse("i_max".into()))?.unwrap_or(5);
                let (_, blocks) = constructions::thick_no_kxy(i_max)?;
                let kxy = constructions::find_kxy(&blocks.elements());
                ctx.json(&serde_json::json!({ "report": blocks.growth_report(), "kxy_pattern": kxy }))
            }
            "divisible_union" => {
                let get = |i: usize, d: &str| a.params.get(i).cloned().unwrap_or_else(|| d.to_string());
                let dseq: DSeq = get(0, "double_exp").parse()?;
                let aseq: ASeq = get(1, "upto").parse()?;
                let i_max: u32 = get(2, "12").parse().map_err(|_| Error::Parse("i_max".into()))?;
                let (_, report, du) = constructions::divisible_union(dseq, aseq, i_max)?;
                ctx.json(&serde_json::json!({
                    "report": report,
                    "elements": du.elements.len(),
                    "max_difference_multiplicity": du.max_difference_multiplicity(),
                }))
            }
            other => Err(Error::InvalidArgument(format!("{other} has no hypothesis report"))),
        };
    }
    let bound = parse_int(a.emit_upto.as_deref().ok_or_else(|| Error::InvalidArgument("--emit-upto or --validate required".into()))?)?;
    let set = read_set(&descr)?;
    let members = set.enumerate_upto(&bound)?;
    let mut text = String::new();
    for m in members {
        text.push_str(&m.to_string());
        text.push('\n');
    }
    ctx.emit(&text)
}

fn largeness(ctx: &Ctx, c: &LargenessCmd) -> Result<()> {
    match c {
        LargenessCmd::Syndetic { s, f, horizon } => {
            ctx.check_budget(horizon.saturating_mul(f.len() as u64))?;
            let g = GroundStructure::parse(&s.ground)?;
            let out = check_syndetic(read_set(&s.set)?.as_ref(), &ints(f)?, *horizon, &g)?;
            match out {
                SyndeticOutcome::Certified(_) => maybe_cert(ctx, out.certificate(), "syndetic"),
                SyndeticOutcome::Fails { n } => ctx.json(&serde_json::json!({ "result": "fails", "first_uncovered": n })),
            }
        }
        LargenessCmd::Thick { s, horizon, f } => {
            let g = GroundStructure::parse(&s.ground)?;
            let set = read_set(&s.set)?;
            let h = parse_int(horizon)?;
            if f.is_empty() {
                ctx.json(&thick_profile(set.as_ref(), &h, &g)?)
            } else {
                let f = ints(f)?;
                let x = mult_thick_witness(set.as_ref(), &f, &h, &g)?;
                maybe_cert(ctx, x.map(|x| thick_certificate(&f, &x, &g)), "thick translate")
            }
        }
        LargenessCmd::Piecewise { s, f, horizon } => {
            let g = GroundStructure::parse(&s.ground)?;
            ctx.json(&check_piecewise_syndetic(read_set(&s.set)?, &ints(f)?, &parse_int(horizon)?, &g)?)
        }
        LargenessCmd::Ip { s, r, bound } => {
            let g = GroundStructure::parse(&s.ground)?;
            let b = parse_int(bound)?;
            ctx.check_budget(u64_of(&b)?)?;
            let c = ip_r_certificate(read_set(&s.set)?.as_ref(), *r, &g, &b)?;
            maybe_cert(ctx, c.map(|c| c.certificate()), "ip_r")
        }
        LargenessCmd::IpStar { s, r, lo, hi } => {
            let g = GroundStructure::parse(&s.ground)?;
            let c = ip_r_star_refute(read_set(&s.set)?.as_ref(), *r, &parse_int(lo)?, &parse_int(hi)?, &g)?;
            maybe_cert(ctx, c.map(|c| c.refutation_certificate()), "ip_r refutation")
        }
        LargenessCmd::Rich { s, matrix, pool } => {
            let g = GroundStructure::parse(&s.ground)?;
            let m: Vec<Vec<BigInt>> = matrix
                .split(';')
                .map(|row| row.split(',').map(parse_int).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let pool = parse_pool(pool)?;
            let w = combinatorial_richness_witness(read_set(&s.set)?.as_ref(), &m, &g, &pool)?;
            maybe_cert(ctx, w.map(|w| richness_certificate(&w, &m, &g)), "combinatorial richness")
        }
    }
}

fn density(ctx: &Ctx, d: &DensityArgs) -> Result<()> {
    let set = read_set(&d.s.set)?;
    if let Some(n) = &d.profile {
        let n = u64_of(&parse_int(n)?)?;
        ctx.check_budget(n)?;
        let p = lower_density_profile(set.as_ref(), n)?;
        let rows = p
            .iter()
            .map(|x| vec![x.n.to_string(), x.count.to_string(), format!("{:.12}", x.ratio), format!("{:.12}", x.running_inf)])
            .collect();
        return ctx.csv(&["n", "count", "ratio", "running_inf"], rows);
    }
    let window: FolnerWindow = d.window.as_deref().ok_or_else(|| Error::InvalidArgument("--window required".into()))?.parse()?;
    let g = if d.s.ground == "nat+" { window.ground() } else { GroundStructure::parse(&d.s.ground)? };
    if let Some(s) = &d.drift {
        let r = folner_drift(&window, &parse_int(s)?, &g)?;
        return ctx.json(&serde_json::json!({ "window": window.to_string(), "ratio": format!("{}/{}", r.numer(), r.denom()) }));
    }
    let pool = parse_pool(d.pool.as_deref().ok_or_else(|| Error::InvalidArgument("--pool required".into()))?)?;
    ctx.check_budget(window.size()?.saturating_mul(pool.len() as u64))?;
    let f = window.multiset()?;
    if let Some(beta) = &d.beta {
        let (a, b) = beta.split_once('/').unwrap_or((beta, "1"));
        let beta = num_rational::BigRational::new(parse_int(a)?, parse_int(b)?);
        let shifts = translate_level_set(set.as_ref(), &f, &beta, &pool, &g)?;
        return ctx.csv(&["shift"], shifts.iter().map(|s| vec![s.to_string()]).collect());
    }
    let e = banach_density_lower_bound(set.as_ref(), &f, &pool, &g)?;
    eprintln!("lower bound only: maximum over {} declared shifts", pool.len());
    ctx.csv(
        &["window_descriptor", "best_shift", "numerator", "denominator"],
        vec![vec![window.to_string(), e.best_shift.to_string(), e.count.to_string(), e.size.to_string()]],
    )
}

fn patterns_cmd(ctx: &Ctx, c: &PatternsCmd) -> Result<()> {
    match c {
        PatternsCmd::Ap(r) | PatternsCmd::Gp(r) => {
            let (lo, hi) = (parse_int(&r.lo)?, parse_int(&r.hi)?);
            ctx.check_budget(u64_of(&(&hi - &lo)).unwrap_or(u64::MAX))?;
            let set = read_set(&r.s.set)?;
            let cert = if matches!(c, PatternsCmd::Ap(_)) {
                patterns::longest_ap(set.as_ref(), &lo, &hi, 1)?.map(|a| a.certificate())
            } else {
                patterns::longest_gp(set.as_ref(), &lo, &hi)?.map(|a| a.certificate())
            };
            maybe_cert(ctx, cert, "progression")
        }
        PatternsCmd::Genap { s, n, m, bound } | PatternsCmd::Geocube { s, n, m, bound } => {
            let set = read_set(&s.set)?;
            let pools = Pools::from_set(set.as_ref(), *bound)?;
            let cert = if matches!(c, PatternsCmd::Genap { .. }) {
                patterns::find_generalized_ap(set.as_ref(), *n, *m, &pools)?
            } else {
                patterns::find_geometric_cube(set.as_ref(), *n, *m, &pools)?
            };
            maybe_cert(ctx, cert, "cube")
        }
        PatternsCmd::Geoarith { s, n, bound } => {
            let set = read_set(&s.set)?;
            let pools = GeoArithPools::default_for(set.as_ref(), *bound)?;
            maybe_cert(ctx, patterns::find_geo_arithmetic(set.as_ref(), *n, &pools)?, "geo-arithmetic configuration")
        }
        PatternsCmd::Hjline { n, r, words } => {
            let text = std::fs::read_to_string(words)?;
            let ws: Vec<Vec<u32>> = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| {
                    l.chars()
                        .map(|ch| ch.to_digit(36).ok_or_else(|| Error::Parse(format!("letter {ch:?}"))))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            maybe_cert(ctx, find_combinatorial_line(*n, *r, &ws)?.map(|w: VariableWord| w.certificate()), "combinatorial line")
        }
    }
}

fn equidist(ctx: &Ctx, c: &EquidistCmd) -> Result<()> {
    match c {
        EquidistCmd::Weyl { poly, m, n } => {
            ctx.check_budget(*n)?;
            ctx.json(&weyl_sum(&Poly::parse(poly)?, *m, *n)?)
        }
        EquidistCmd::Disc { poly, n, h } => {
            let p = Poly::parse(poly)?;
            let mut rows = Vec::new();
            for &count in n {
                ctx.check_budget(count)?;
                let s = TorusSample::from_poly(&p, count);
                let d = discrepancy(&s)?;
                let l = leveque_bound(&s, *h)?;
                rows.push(vec![count.to_string(), format!("{d:.12}"), format!("{:.12}", l.bound)]);
            }
            ctx.csv(&["N", "D_N", "bound"], rows)
        }
        EquidistCmd::Leveque { poly, n, h } => {
            ctx.check_budget(*n)?;
            let s = TorusSample::from_poly(&Poly::parse(poly)?, *n);
            let l = leveque_bound(&s, *h)?;
            ctx.json(&serde_json::json!({ "discrepancy": discrepancy(&s)?, "leveque": l }))
        }
        EquidistCmd::Threshold { poly, xi, eps, beta, n_max } => {
            let pool = beta.iter().map(|b| HpReal::parse(b)).collect::<Result<Vec<_>>>()?;
            ctx.json(&epsilon_dense_threshold(&Poly::parse(poly)?, &HpReal::parse(xi)?, &HpReal::parse(eps)?, &pool, *n_max)?)
        }
        EquidistCmd::Convergents { x, terms } => {
            let c: Vec<(String, String)> = convergents(&HpReal::parse(x)?, *terms).into_iter().map(|(p, q)| (p.to_string(), q.to_string())).collect();
            ctx.json(&c)
        }
    }
}

fn ff(ctx: &Ctx, c: &FfCmd) -> Result<()> {
    let field = |q: u64| -> Result<Field> {
        let (p, m) = prime_power(q)?;
        field_build(p, m)
    };
    match c {
        FfCmd::Build { q } => {
            let f = field(*q)?;
            ctx.json(&serde_json::json!({ "spec": f.spec(), "primitive": f.primitive() }))
        }
        FfCmd::Subgroup { q, k } => ctx.json(&kth_power_subgroup(&field(*q)?, *k)?),
        FfCmd::Witness { q, k, f, g } => {
            let fld = field(*q)?;
            let x = witness_translate(&fld, *k, f, *g)?;
            maybe_cert(ctx, x.map(|x| witness_certificate(&fld, *k, f, *g, x)), "field witness")
        }
        FfCmd::Threshold { n, k, qmin, qmax, family } => {
            let fam: FieldFamily = family.parse()?;
            let budget = ctx.budget.unwrap_or(richset::finitefield::DEFAULT_THRESHOLD_BUDGET);
            ctx.json(&empirical_threshold(*n, *k, *qmin, *qmax, fam, budget)?)
        }
    }
}

fn normform(ctx: &Ctx, c: &NormformCmd) -> Result<()> {
    let build = |f: &FormArg| -> Result<richset::normform::RepresentedSet> {
        let form = NormForm::parse(&f.preset)?;
        enumerate_represented(&form, f.box_b, &parse_int(&f.limit)?)
    };
    match c {
        NormformCmd::Enum(f) => {
            let r = build(f)?;
            let rows = r
                .iter()
                .map(|(v, w)| vec![v.to_string(), w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")])
                .collect();
            ctx.csv(&["value", "witness"], rows)
        }
        NormformCmd::Closure { f, samples } => ctx.json(&closure_check(&build(f)?, *samples, ctx.seed)?),
        NormformCmd::Ap { f, len } => {
            let r = build(f)?;
            let hi = &r.limit + 1;
            maybe_cert(ctx, ap_search(&r, *len, &hi)?.map(|a| a.certificate()), "progression")
        }
        NormformCmd::Primes { f, n } => ctx.json(&prime_relative_density(&build(f)?, *n)?),
        NormformCmd::Eval { preset, z } => {
            let form = NormForm::parse(preset)?;
            ctx.json(&serde_json::json!({ "value": form.eval(&ints(z)?)?.to_string() }))
        }
    }
}

fn verify_cmd(ctx: &Ctx, cert: &PathBuf, set: Option<&str>) -> Result<bool> {
    let c = Certificate::from_json(&std::fs::read_to_string(cert)?)?;
    let set = match set {
        Some(s) if std::path::Path::new(s).is_file() => Some(load_set(&std::fs::read_to_string(s)?)?),
        Some(s) => Some(load_set(s)?),
        None => None,
    };
    let rep = richset::verify::verify(&c, set.as_ref().map(|s| s.as_ref() as &dyn Set))?;
    ctx.json(&rep)?;
    Ok(rep.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { out: cli.out.clone(), seed: cli.seed, budget: cli.budget };
    let res: Result<bool> = match &cli.cmd {
        Cmd::Construct(a) => construct(&ctx, a).map(|_| true),
        Cmd::Largeness(c) => largeness(&ctx, c).map(|_| true),
        Cmd::Density(d) => density(&ctx, d).map(|_| true),
        Cmd::Patterns(c) => patterns_cmd(&ctx, c).map(|_| true),
        Cmd::Equidist(c) => equidist(&ctx, c).map(|_| true),
        Cmd::Ff(c) => ff(&ctx, c).map(|_| true),
        Cmd::Normform(c) => normform(&ctx, c).map(|_| true),
        Cmd::Verify { certificate, set } => verify_cmd(&ctx, certificate, set.as_deref()),
        Cmd::Run { config } => (|| {
            let cfg = richset::experiment::ExperimentConfig::from_json(&std::fs::read_to_string(config)?)?;
            let mut cfg = cfg;
            if let Some(b) = cli.budget {
                cfg.budget.get_or_insert(richset::experiment::Budget { max_elements: None, wall_clock_hint_s: None }).max_elements = Some(b);
            }
            let s = richset::experiment::run(&cfg, cli.out.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&s)?);
            Ok(true)
        })(),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
