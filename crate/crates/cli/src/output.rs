use std::fmt::Write;

use lattice_riemann::{Element, IntegralResult, VerificationReport};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn list(e: &Element) -> String {
    e.coords()
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn integral(r: &IntegralResult, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut out = String::from("atom,value,lower,upper,gap,depth,converged\n");
            for i in 0..r.value.dim() {
                writeln!(
                    out,
                    "{i},{},{},{},{},{},{}",
                    r.value.get(i),
                    r.lower.get(i),
                    r.upper.get(i),
                    r.gap.get(i),
                    r.depth,
                    r.converged
                )
                .unwrap();
            }
            out.pop();
            out
        }
        Format::Text => format!(
            "value     {}\nlower     {}\nupper     {}\ngap       {}\ndepth     {}\nconverged {}",
            r.value, r.lower, r.upper, r.gap, r.depth, r.converged
        ),
    }
}

pub fn report(r: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut out = String::from("sample,atom,x,y,residual,witness\n");
            for (k, d) in r.details.iter().enumerate() {
                for i in 0..d.residual.dim() {
                    let y =
                        d.y.as_ref()
                            .map(|y| y.get(i).to_string())
                            .unwrap_or_default();
                    let w = d
                        .witness
                        .as_ref()
                        .map(|c| c.get(i).to_string())
                        .unwrap_or_default();
                    writeln!(out, "{k},{i},{},{y},{},{w}", d.x.get(i), d.residual.get(i)).unwrap();
                }
            }
            out.pop();
            out
        }
        Format::Text => {
            let mut out = format!(
                "{}: {} (max residual {}, tolerance {}, {} samples)",
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                r.max_residual,
                r.tolerance,
                r.samples
            );
            for d in r.details.iter().filter(|d| d.witness.is_some()).take(5) {
                write!(out, "\n  c = {}", d.witness.as_ref().unwrap()).unwrap();
            }
            out
        }
    }
}

pub fn chain(points: &[Element], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string(points).expect("elements serialize"),
        Format::Csv | Format::Text => points
            .iter()
            .map(|p| {
                p.coords()
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

pub fn element_line(label: &str, e: &Element) -> String {
    format!("{label} {}", list(e))
}
