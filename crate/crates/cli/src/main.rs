//! `gsite`: batch checks over the site of finite discrete G-sets plus `G`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 input error,
//! 3 no witness exists for the requested target.

mod descriptor;
mod records;
mod report;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsite_core::corpus::Corpus;
use gsite_core::sheaves::{subcanonicality_witness, NoWitness};
use gsite_core::{RObject, Site, StabilityCase, Tower, TowerSpec};
use serde::Deserialize;
use serde_json::json;

use records::{CertificateRecord, MorphismRecord, ObjectRecord};
use report::{CheckReport, ConfigEcho};
use suites::{Suite, SuiteContext};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NO_WITNESS: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gsite",
    version,
    about = "Check suites for the site of finite discrete G-sets extended by G"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Tower spec file (JSON); defaults to the cyclic 2-power tower of depth 3.
    #[arg(long)]
    tower: Option<PathBuf>,
    /// Truncate the tower to this depth.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run check suites and emit a report.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Extra object descriptor for the sheaf and witness suites.
        #[arg(long = "object")]
        objects: Vec<String>,
        /// Stability instances generated per case.
        #[arg(long, default_value_t = 40)]
        per_case: usize,
        /// Inject a non-commuting certificate into the stability suite.
        #[arg(long)]
        self_test: bool,
    },
    /// Search for a failure of the sheaf condition for Hom(-, TARGET).
    Witness {
        #[command(flatten)]
        common: Common,
        target: String,
        /// Test object summand G/U, as `level:generators`; default is the point.
        #[arg(long = "subgroup")]
        subgroups: Vec<String>,
    },
    /// Orbit decomposition of a finite object.
    Orbits {
        #[command(flatten)]
        common: Common,
        object: String,
    },
    /// Enumerate Hom(SOURCE, TARGET), truncated at the top level for G.
    Hom {
        #[command(flatten)]
        common: Common,
        source: String,
        target: String,
    },
    /// Generate and verify stability certificates, or re-verify a file of them.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Case label: 1, 2, 3, 4a, 4b or 5; all cases when absent.
        #[arg(long)]
        case: Option<String>,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Certificate file to re-verify: `refine --format json` output, or bare records.
        #[arg(long, conflicts_with_all = ["case"])]
        verify: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
}

type Outcome = Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Failure> {
    let (common, result) = match cmd {
        Command::Check {
            common,
            suite,
            seed,
            objects,
            per_case,
            self_test,
        } => {
            let r = cmd_check(&common, suite, seed, &objects, per_case, self_test);
            (common, r)
        }
        Command::Witness {
            common,
            target,
            subgroups,
        } => {
            let r = cmd_witness(&common, &target, &subgroups);
            (common, r)
        }
        Command::Orbits { common, object } => {
            let r = cmd_orbits(&common, &object);
            (common, r)
        }
        Command::Hom {
            common,
            source,
            target,
        } => {
            let r = cmd_hom(&common, &source, &target);
            (common, r)
        }
        Command::Refine {
            common,
            case,
            count,
            seed,
            verify,
        } => {
            let r = cmd_refine(&common, case.as_deref(), count, seed, verify.as_deref());
            (common, r)
        }
    };
    let (body, code) = result?;
    match &common.out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => print!("{body}"),
    }
    Ok(code)
}

fn load_site(common: &Common) -> Result<(Site, String), Failure> {
    let (tower, name) = match &common.tower {
        None => (
            Tower::cyclic_p(2, 3).expect("2 is prime"),
            "cyclic_p p=2".to_string(),
        ),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let spec = TowerSpec::from_json(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let tower = Tower::from_spec(&spec)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            (tower, path.display().to_string())
        }
    };
    let tower = match common.depth {
        Some(d) => tower
            .truncate(d)
            .map_err(|e| Failure::Input(e.to_string()))?,
        None => tower,
    };
    Ok((Site::new(Arc::new(tower)), name))
}

fn parse(site: &Site, text: &str) -> Result<RObject, Failure> {
    descriptor::parse_object(site.tower(), text).map_err(Failure::Input)
}

fn cmd_check(
    common: &Common,
    suite: Suite,
    seed: u64,
    objects: &[String],
    per_case: usize,
    self_test: bool,
) -> Outcome {
    let (site, tower_name) = load_site(common)?;
    let parsed = objects
        .iter()
        .map(|o| parse(&site, o).map(|x| (o.clone(), x)))
        .collect::<Result<Vec<_>, _>>()?;
    let ctx = SuiteContext {
        site: site.clone(),
        seed,
        objects: parsed,
        self_test,
        per_case,
    };
    let config = ConfigEcho {
        tower: tower_name,
        depth: site.tower().depth(),
        suite: suite.name().into(),
        seed,
        objects: objects.to_vec(),
        self_test,
    };
    let report = CheckReport::new(config, suites::run(&ctx, suite));
    let body = match common.format {
        Format::Json => report::to_json(&report),
        Format::Text => report::to_text(&report),
    };
    Ok((body, if report.all_pass() { 0 } else { EXIT_FAIL }))
}

fn cmd_witness(common: &Common, target: &str, subgroups: &[String]) -> Outcome {
    let (site, _) = load_site(common)?;
    let x = parse(&site, target)?;
    let subs = subgroups
        .iter()
        .map(|s| match parse(&site, &format!("coset({s})"))? {
            RObject::Finite(c) => Ok(c.stabilizer(0)),
            RObject::Group => unreachable!("coset descriptors are finite"),
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let result = subcanonicality_witness(&site, &x, (!subs.is_empty()).then_some(subs.as_slice()));
    if let Err(NoWitness::Sheaf(e)) = &result {
        return Err(Failure::Input(e.to_string()));
    }
    let payload = suites::witness_payload(target, &result);
    let code = if result.is_ok() { 0 } else { EXIT_NO_WITNESS };
    let body = match common.format {
        Format::Json => report::to_json(&payload),
        Format::Text => {
            let mut s = String::new();
            for (k, v) in payload.as_object().expect("payload is an object") {
                s.push_str(&format!("{k}: {v}\n"));
            }
            s
        }
    };
    Ok((body, code))
}

fn cmd_orbits(common: &Common, object: &str) -> Outcome {
    let (site, _) = load_site(common)?;
    let RObject::Finite(x) = parse(&site, object)? else {
        return Err(Failure::Input("orbits needs a finite object".into()));
    };
    let dec = x.orbits();
    let orbits: Vec<_> = dec
        .orbits
        .iter()
        .map(|o| json!({"representative": o.representative, "stabilizer": o.stabilizer, "elements": o.elements}))
        .collect();
    let body = match common.format {
        Format::Json => report::to_json(&json!({
            "object": ObjectRecord::from_object(&RObject::Finite(x.clone())),
            "orbits": orbits,
            "decomposition_bijective": dec.is_bijective(),
        })),
        Format::Text => {
            let t = site.tower();
            let mut s = String::new();
            for o in &dec.orbits {
                s.push_str(&format!(
                    "orbit of {}: {:?}, stabilizer of index {} at level {}\n",
                    o.representative,
                    o.elements,
                    o.stabilizer.index(t),
                    o.stabilizer.level()
                ));
            }
            s
        }
    };
    Ok((body, 0))
}

fn cmd_hom(common: &Common, source: &str, target: &str) -> Outcome {
    let (site, _) = load_site(common)?;
    let a = parse(&site, source)?;
    let b = parse(&site, target)?;
    let homs = site.hom(&a, &b);
    let body = match common.format {
        Format::Json => report::to_json(&json!({
            "count": homs.len(),
            "morphisms": homs.iter().map(MorphismRecord::from_morphism).collect::<Vec<_>>(),
        })),
        Format::Text => {
            let mut s = format!("{} morphisms\n", homs.len());
            for f in &homs {
                s.push_str(
                    &serde_json::to_string(&MorphismRecord::from_morphism(f))
                        .expect("records serialize"),
                );
                s.push('\n');
            }
            s
        }
    };
    Ok((body, 0))
}

/// A certificate file: one record or an array, each either bare or in the
/// `{"certificate": ..}` form that `refine --format json` writes.
#[derive(Deserialize)]
#[serde(untagged)]
enum CertificateFile {
    Many(Vec<CertificateEntry>),
    One(CertificateEntry),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CertificateEntry {
    Wrapped { certificate: CertificateRecord },
    Bare(CertificateRecord),
}

impl CertificateEntry {
    fn into_record(self) -> CertificateRecord {
        match self {
            CertificateEntry::Wrapped { certificate } | CertificateEntry::Bare(certificate) => {
                certificate
            }
        }
    }
}

fn cmd_refine(
    common: &Common,
    case: Option<&str>,
    count: usize,
    seed: u64,
    verify: Option<&std::path::Path>,
) -> Outcome {
    let (site, _) = load_site(common)?;
    let mut results = Vec::new();
    if let Some(path) = verify {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let file: CertificateFile = serde_json::from_str(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let recs: Vec<CertificateRecord> = match file {
            CertificateFile::One(entry) => vec![entry.into_record()],
            CertificateFile::Many(v) => v.into_iter().map(CertificateEntry::into_record).collect(),
        };
        for rec in recs {
            let verdict = rec.verify(&site).err();
            results
                .push(json!({"certificate": rec, "verified": verdict.is_none(), "error": verdict}));
        }
    } else {
        let cases: Vec<StabilityCase> = match case {
            None => StabilityCase::ALL.to_vec(),
            Some(l) => vec![StabilityCase::from_label(l)
                .ok_or_else(|| Failure::Input(format!("unknown case `{l}`")))?],
        };
        let mut corpus = Corpus::new(site.clone(), seed);
        for c in cases {
            for _ in 0..count {
                let (cover, g) = corpus.stability_instance(c, 6);
                match site.stability_refine(&cover, &g) {
                    Ok(cert) => results.push(json!({
                        "certificate": CertificateRecord::from_certificate(&cert),
                        "verified": true,
                        "error": null,
                    })),
                    Err(e) => results.push(json!({
                        "input": cover.members().iter().map(MorphismRecord::from_morphism).collect::<Vec<_>>(),
                        "morphism": MorphismRecord::from_morphism(&g),
                        "verified": false,
                        "error": e.to_string(),
                    })),
                }
            }
        }
    }
    let ok = results.iter().all(|r| r["verified"] == json!(true));
    let body = match common.format {
        Format::Json => report::to_json(&results),
        Format::Text => results
            .iter()
            .map(|r| {
                let case = r["certificate"]["case"].as_str().unwrap_or("?");
                if r["verified"] == json!(true) {
                    format!("PASS case {case}\n")
                } else {
                    format!("FAIL case {case}: {}\n", r["error"])
                }
            })
            .collect(),
    };
    Ok((body, if ok { 0 } else { EXIT_FAIL }))
}
