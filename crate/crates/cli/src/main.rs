//! `bdg` — file-based front end for braided diagram and tree-end
//! similarity computations.
//!
//! Every verb reads its inputs, runs one library operation, and writes the
//! result to stdout (or to `-o`). Exit codes: 2 on any parse or validation
//! failure, 1 when `equal` finds the inputs differ, 0 otherwise. Output is
//! byte-identical across runs on identical inputs.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use bdg_core::calculus::{equal, reduce};
use bdg_core::catalog::{
    houghton_build, houghton_interpret_diagram, parse_hmap, relabel_embed, serialize_hmap, Builtin,
};
use bdg_core::diagram::{
    bdg_presentation_ref, concatenate, invert, parse_bdg, same_presentation, serialize_bdg,
    Diagram,
};
use bdg_core::fss::{
    fst_presentation_ref, parse_fst, psi, serialize_fst, triple_from_diagram, DefiningTriple,
};
use bdg_core::presentation::{parse_sgp, Presentation};
use bdg_core::treespace::{Address, TreeSpace};

#[derive(Parser)]
#[command(name = "bdg", version, about = "Braided diagrams over semigroup presentations")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Parse and validate a .sgp, .bdg, or .fst file
    Validate { file: PathBuf },
    /// Report whether a .sgp presentation is tree-like
    Treelike { file: PathBuf },
    /// Reduce a diagram to its unique reduced form
    Reduce {
        file: PathBuf,
        /// Write the result here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compose two diagrams, the first applied after the second
    Compose { a: PathBuf, b: PathBuf },
    /// Invert a diagram
    Invert { file: PathBuf },
    /// Compare two group elements (.bdg or .fst) for equality
    Equal { a: PathBuf, b: PathBuf },
    /// Turn a defining triple into its reduced diagram
    ToDiagram { file: PathBuf },
    /// Turn a diagram over a tree-like presentation into a defining triple
    ToTriple { file: PathBuf },
    /// Apply a defining triple to a point of its tree space
    Eval {
        file: PathBuf,
        /// Point to map: `eps` or dot-separated child indices like 0.1.1
        #[arg(long)]
        point: String,
        /// Treat the address as a complete (leaf-ended) point
        #[arg(long)]
        terminal: bool,
        /// Reject points deeper than this many components
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Print a stock presentation as .sgp text
    Catalog {
        /// thompson, houghton, qaut — or a full name like thompson(3)
        name: String,
        /// Arity for thompson
        #[arg(long)]
        d: Option<usize>,
        /// Ray count for houghton
        #[arg(long)]
        n: Option<usize>,
    },
    /// Read a houghton(n) diagram as an eventual-translation table
    InterpretHoughton { file: PathBuf },
    /// Build the reduced diagram of an eventual-translation table
    BuildHoughton { file: PathBuf },
    /// Relabel a qaut diagram into the thompson(3) presentation
    EmbedRelabel { file: PathBuf },
    /// Draw a diagram as a standalone SVG file
    Render {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().verb) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(verb: Verb) -> Result<ExitCode, String> {
    match verb {
        Verb::Validate { file } => {
            match extension(&file) {
                "sgp" => {
                    parse_sgp(&read_file(&file)?).map_err(|e| at(&file, e))?;
                }
                "bdg" => {
                    load_diagram(&file)?;
                }
                "fst" => {
                    load_triple(&file)?;
                }
                other => {
                    return Err(format!(
                        "{}: unsupported extension `{other}` (expected .sgp, .bdg, or .fst)",
                        file.display()
                    ))
                }
            }
            println!("valid");
            Ok(ExitCode::SUCCESS)
        }

        Verb::Treelike { file } => {
            let p = parse_sgp(&read_file(&file)?).map_err(|e| at(&file, e))?;
            let report = p.validate_tree_like();
            if report.is_tree_like() {
                println!("tree-like");
            } else {
                println!("not tree-like");
                for v in report.violations() {
                    println!("  {v}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Verb::Reduce { file, output } => {
            let (d, reference) = load_diagram(&file)?;
            emit(output.as_deref(), &serialize_bdg(&reduce(&d), &reference))
        }

        Verb::Compose { a, b } => {
            let (da, reference) = load_diagram(&a)?;
            let (db, _) = load_diagram(&b)?;
            if !same_presentation(&da, &db) {
                return Err("compose: inputs are over different presentations".into());
            }
            let c = concatenate(&da, &db).map_err(|e| e.to_string())?;
            emit(None, &serialize_bdg(&reduce(&c), &reference))
        }

        Verb::Invert { file } => {
            let (d, reference) = load_diagram(&file)?;
            emit(None, &serialize_bdg(&invert(&d), &reference))
        }

        Verb::Equal { a, b } => {
            let d1 = load_element(&a)?;
            let d2 = load_element(&b)?;
            if equal(&d1, &d2).map_err(|e| e.to_string())? {
                println!("equal");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("differ");
                Ok(ExitCode::from(1))
            }
        }

        Verb::ToDiagram { file } => {
            let (t, reference) = load_triple(&file)?;
            emit(None, &serialize_bdg(&reduce(&psi(&t)), &reference))
        }

        Verb::ToTriple { file } => {
            let (d, reference) = load_diagram(&file)?;
            let top = d.top_label();
            if top.len() != 1 {
                return Err(format!(
                    "{}: frame top reads `{top}`; a triple diagram starts from a single base letter",
                    file.display()
                ));
            }
            let base = top.letters()[0].clone();
            let space = TreeSpace::new(Arc::clone(d.presentation()), base)
                .map_err(|e| at(&file, e))?;
            let t = triple_from_diagram(&Arc::new(space), &d).map_err(|e| at(&file, e))?;
            emit(None, &serialize_fst(&t, &reference))
        }

        Verb::Eval {
            file,
            point,
            terminal,
            depth,
        } => {
            let (t, _) = load_triple(&file)?;
            let address: Address = point.parse().map_err(|e: bdg_core::Error| e.to_string())?;
            if let Some(n) = depth {
                if address.len() > n {
                    return Err(format!(
                        "point {address} has {} components, more than --depth {n}",
                        address.len()
                    ));
                }
            }
            let p = t.space().point(address, terminal).map_err(|e| e.to_string())?;
            let image = t.evaluate(&p).map_err(|e| e.to_string())?;
            println!("{}", image.address());
            Ok(ExitCode::SUCCESS)
        }

        Verb::Catalog { name, d, n } => {
            let full = match (name.as_str(), d, n) {
                ("thompson", Some(d), None) => format!("thompson({d})"),
                ("houghton", None, Some(n)) => format!("houghton({n})"),
                (_, None, None) => name,
                _ => {
                    return Err(
                        "catalog: use --d only with thompson and --n only with houghton".into(),
                    )
                }
            };
            let builtin: Builtin = full.parse().map_err(|e: bdg_core::Error| e.to_string())?;
            println!("# {builtin}, base {}", builtin.base_name());
            print!("{}", builtin.presentation().to_sgp());
            Ok(ExitCode::SUCCESS)
        }

        Verb::InterpretHoughton { file } => {
            let (d, _) = load_diagram(&file)?;
            let map = houghton_interpret_diagram(&d).map_err(|e| at(&file, e))?;
            emit(None, &serialize_hmap(&map))
        }

        Verb::BuildHoughton { file } => {
            let map = parse_hmap(&read_file(&file)?).map_err(|e| at(&file, e))?;
            let element = houghton_build(&map).map_err(|e| e.to_string())?;
            let reference = Builtin::Houghton { rays: map.rays() }.to_string();
            emit(None, &serialize_bdg(&reduce(&psi(element.triple())), &reference))
        }

        Verb::EmbedRelabel { file } => {
            let (d, _) = load_diagram(&file)?;
            let e = relabel_embed(&d).map_err(|e| at(&file, e))?;
            emit(None, &serialize_bdg(&e, "thompson(3)"))
        }

        Verb::Render { file, output } => {
            let (d, _) = load_diagram(&file)?;
            std::fs::write(&output, render::to_svg(&d)).map_err(|e| at(&output, e))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn extension(path: &Path) -> &str {
    path.extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| at(path, e))
}

fn at(path: &Path, e: impl std::fmt::Display) -> String {
    format!("{}: {e}", path.display())
}

/// Resolves a `presentation:` reference: a catalog name like `thompson(2)`,
/// else a .sgp path relative to the referring file.
fn resolve_presentation(reference: &str, referring: &Path) -> Result<Arc<Presentation>, String> {
    if let Ok(builtin) = reference.parse::<Builtin>() {
        return Ok(Arc::new(builtin.presentation()));
    }
    let path = referring
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(reference);
    let p = parse_sgp(&read_file(&path)?).map_err(|e| at(&path, e))?;
    Ok(Arc::new(p))
}

fn load_diagram(path: &Path) -> Result<(Diagram, String), String> {
    let text = read_file(path)?;
    let reference = bdg_presentation_ref(&text).map_err(|e| at(path, e))?;
    let p = resolve_presentation(&reference, path)?;
    let d = parse_bdg(&text, p).map_err(|e| at(path, e))?;
    Ok((d, reference))
}

fn load_triple(path: &Path) -> Result<(DefiningTriple, String), String> {
    let text = read_file(path)?;
    let reference = fst_presentation_ref(&text).map_err(|e| at(path, e))?;
    let p = resolve_presentation(&reference, path)?;
    let t = parse_fst(&text, p).map_err(|e| at(path, e))?;
    Ok((t, reference))
}

/// Loads either element format as a diagram; .fst goes through the
/// triple-to-diagram translation.
fn load_element(path: &Path) -> Result<Diagram, String> {
    match extension(path) {
        "bdg" => load_diagram(path).map(|(d, _)| d),
        "fst" => load_triple(path).map(|(t, _)| psi(&t)),
        other => Err(format!(
            "{}: unsupported extension `{other}` (expected .bdg or .fst)",
            path.display()
        )),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<ExitCode, String> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| at(path, e))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
