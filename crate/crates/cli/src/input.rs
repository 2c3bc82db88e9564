use std::fs;

use lattice_riemann::{Element, FunctionDescriptor, LatticeFunction, OrderInterval};

pub type CliResult<T> = Result<T, String>;

/// Parses `"1,0.5,-2"` into an element.
pub fn parse_element(src: &str) -> CliResult<Element> {
    let coords = src
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .map_err(|_| format!("invalid number `{s}` in `{src}`"))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Element::new(coords).map_err(|e| format!("invalid element `{src}`: {e}"))
}

/// Parses `"1,0;0,1"` into a list of elements.
pub fn parse_points(src: &str) -> CliResult<Vec<Element>> {
    let points = src
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_element)
        .collect::<CliResult<Vec<_>>>()?;
    if points.is_empty() {
        return Err("no points given".into());
    }
    Ok(points)
}

/// The dimension from `--dim`, or else from the first element given.
pub fn resolve_dim(dim: Option<usize>, elements: &[&Element]) -> CliResult<usize> {
    let d = match (dim, elements.first()) {
        (Some(d), _) => d,
        (None, Some(e)) => e.dim(),
        (None, None) => 1,
    };
    if d == 0 {
        return Err("--dim must be positive".into());
    }
    for e in elements {
        if e.dim() != d {
            return Err(format!(
                "element {e} has dimension {}, expected {d}",
                e.dim()
            ));
        }
    }
    Ok(d)
}

pub fn order_interval(lo: &Element, hi: &Element) -> CliResult<OrderInterval> {
    OrderInterval::new(lo.clone(), hi.clone()).map_err(|e| e.to_string())
}

/// Kernel sources (broadcast when there is one) or a JSON descriptor, given
/// inline or as a file path.
pub fn build_function(
    kernels: &[String],
    descriptor: Option<&str>,
    dim: usize,
) -> CliResult<LatticeFunction> {
    match (kernels.is_empty(), descriptor) {
        (false, Some(_)) => Err("give either --kernel or --function, not both".into()),
        (true, None) => Err("missing --kernel".into()),
        (false, None) => kernel_function(kernels, dim, "--kernel"),
        (true, Some(src)) => {
            let text = if src.trim_start().starts_with('{') {
                src.to_string()
            } else {
                fs::read_to_string(src).map_err(|e| format!("cannot read {src}: {e}"))?
            };
            let d: FunctionDescriptor = serde_json::from_str(&text)
                .map_err(|e| format!("invalid function descriptor: {e}"))?;
            d.build(dim).map_err(|e| e.to_string())
        }
    }
}

pub fn kernel_function(sources: &[String], dim: usize, flag: &str) -> CliResult<LatticeFunction> {
    let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
    LatticeFunction::parse(&refs, dim).map_err(|e| format!("{flag}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elements_and_points() {
        assert_eq!(parse_element("1, -0.5").unwrap().coords(), &[1.0, -0.5]);
        assert!(parse_element("1,,2").is_err());
        assert!(parse_element("1,nan").is_err());
        let pts = parse_points("1,0;0,1").unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].coords(), &[0.0, 1.0]);
        assert!(parse_points(";").is_err());
    }

    #[test]
    fn dimension_resolution() {
        let a = parse_element("1,2").unwrap();
        assert_eq!(resolve_dim(None, &[&a]).unwrap(), 2);
        assert_eq!(resolve_dim(Some(2), &[&a]).unwrap(), 2);
        assert!(resolve_dim(Some(3), &[&a]).is_err());
        assert_eq!(resolve_dim(None, &[]).unwrap(), 1);
    }

    #[test]
    fn functions_from_flags_or_descriptors() {
        assert_eq!(build_function(&["t".into()], None, 3).unwrap().dim(), 3);
        let swap = build_function(&[], Some(r#"{"kind":"swap-demo"}"#), 2).unwrap();
        assert!(swap.kernels().is_none());
        assert!(build_function(&[], None, 2).is_err());
        assert!(build_function(&["t".into()], Some("{}"), 2).is_err());
        assert!(build_function(&["t".into(), "t".into()], None, 3).is_err());
    }
}
