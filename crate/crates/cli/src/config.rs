//! Run configuration: a line-based, sectioned `key = value` text file.
//!
//! ```text
//! # backward heat on a small grid
//! [grid]
//! n = 1
//! J = 4
//! inv_h = 32
//!
//! [symbol]
//! text = -(1 + 4*pi^2*xi^2)
//!
//! [evolve]
//! times = -1, 0
//! method = both
//! tol = 1e-8
//!
//! [init]
//! field = gaussian-hat
//!
//! [output]
//! directory = out
//! formats = csv
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. `[symbol]` takes
//! either `text = <expression>` or `diffop = <alpha:re,im;...>` with
//! `convention = d | partial`. `[init] field` is `ones`, `gaussian-hat`,
//! `delta@<xi>` (comma separated in 2-D) or `file:<path>` to a binary field.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use frechet_flow::symbol::{diffop_to_symbol, parse_diffop};
use frechet_flow::{parse_symbol, Convention, FrequencyGrid, PolynomialSymbol, SpectralField};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}: {message}", match .line { Some(l) => format!("line {l}"), None => "override".to_string() })]
pub struct ConfigError {
    /// 1-based line in the config text; `None` for `--set` overrides and missing keys.
    pub line: Option<usize>,
    pub message: String,
}

fn err(line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError { line, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Raw sections before interpretation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDoc {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("grid", &["n", "J", "inv_h", "h"]),
    ("symbol", &["text", "diffop", "convention"]),
    ("evolve", &["times", "method", "tol"]),
    ("init", &["field"]),
    ("output", &["directory", "formats"]),
];

fn check_known(section: &str, key: &str, line: Option<usize>) -> Result<(), ConfigError> {
    let keys = KNOWN
        .iter()
        .find(|(s, _)| *s == section)
        .ok_or_else(|| err(line, format!("unknown section [{section}]")))?
        .1;
    if !keys.contains(&key) {
        return Err(err(line, format!("unknown key `{key}` in [{section}]")));
    }
    Ok(())
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = ConfigDoc::default();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = Some(k + 1);
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?.trim();
                if !KNOWN.iter().any(|(n, _)| *n == name) {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                doc.sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = s.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
            let section = current.as_ref().ok_or_else(|| err(line, "key outside of any section"))?;
            let key = key.trim();
            check_known(section, key, line)?;
            let map = doc.sections.get_mut(section).expect("section exists");
            if map.contains_key(key) {
                return Err(err(line, format!("duplicate key `{key}` in [{section}]")));
            }
            map.insert(key.to_string(), Entry { value: value.trim().to_string(), line });
        }
        Ok(doc)
    }

    /// Applies one `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(None, format!("override `{assignment}` is not section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| err(None, format!("override key `{path}` is not section.key")))?;
        check_known(section, key, None)?;
        let map = self.sections.entry(section.to_string()).or_default();
        // text and diffop are alternatives: setting one drops the other
        match key {
            "text" => {
                map.remove("diffop");
                map.remove("convention");
            }
            "diffop" => {
                map.remove("text");
            }
            "inv_h" => {
                map.remove("h");
            }
            "h" => {
                map.remove("inv_h");
            }
            _ => {}
        }
        map.insert(key.to_string(), Entry { value: value.trim().to_string(), line: None });
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section).and_then(|m| m.get(key))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
    pub radius: u32,
    pub inv_h: u32,
}

impl GridSpec {
    pub fn build(&self) -> Result<FrequencyGrid, ConfigError> {
        FrequencyGrid::new(self.n, self.radius, self.inv_h).map_err(|e| err(None, format!("[grid]: {e}")))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n: 1, radius: 8, inv_h: 32 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Text(String),
    DiffOp { text: String, convention: Convention },
}

impl SymbolSpec {
    pub fn polynomial(&self, dim: usize) -> Result<PolynomialSymbol, ConfigError> {
        let e = |m: String| err(None, format!("[symbol]: {m}"));
        match self {
            SymbolSpec::Text(t) => parse_symbol(t, dim)
                .and_then(|p| p.to_polynomial())
                .map_err(|x| e(x.to_string())),
            SymbolSpec::DiffOp { text, convention } => parse_diffop(text, dim)
                .and_then(|c| diffop_to_symbol(dim, &c, *convention))
                .map_err(|x| e(x.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Series,
    Multiplier,
    Both,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Series => "series",
            MethodChoice::Multiplier => "multiplier",
            MethodChoice::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Ones,
    GaussianHat,
    Delta(Vec<f64>),
    File(PathBuf),
}

impl InitSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "ones" => Ok(InitSpec::Ones),
            "gaussian-hat" => Ok(InitSpec::GaussianHat),
            _ => {
                if let Some(rest) = s.strip_prefix("delta@") {
                    let xi = rest
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad delta location `{rest}`")))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(InitSpec::Delta(xi))
                } else if let Some(rest) = s.strip_prefix("file:") {
                    Ok(InitSpec::File(PathBuf::from(rest.trim())))
                } else {
                    Err(format!("unknown field `{s}` (ones, gaussian-hat, delta@<xi>, file:<path>)"))
                }
            }
        }
    }

    pub fn build(&self, grid: FrequencyGrid) -> Result<SpectralField, String> {
        match self {
            InitSpec::Ones => Ok(SpectralField::ones(grid)),
            InitSpec::GaussianHat => Ok(SpectralField::gaussian_hat(grid)),
            InitSpec::Delta(xi) => {
                if xi.len() != grid.dim() {
                    return Err(format!("delta location has {} coordinates, grid has {}", xi.len(), grid.dim()));
                }
                let idx = grid.nearest_index(xi).ok_or_else(|| format!("delta location {xi:?} is off the grid"))?;
                SpectralField::delta(grid, idx).map_err(|e| e.to_string())
            }
            InitSpec::File(path) => {
                let f = std::fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let u = frechet_flow::spectral::read_field(std::io::BufReader::new(f)).map_err(|e| e.to_string())?;
                u.grid().ensure_compatible(&grid).map_err(|e| e.to_string())?;
                Ok(u)
            }
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Ones => f.write_str("ones"),
            InitSpec::GaussianHat => f.write_str("gaussian-hat"),
            InitSpec::Delta(xi) => {
                let parts: Vec<String> = xi.iter().map(|v| v.to_string()).collect();
                write!(f, "delta@{}", parts.join(","))
            }
            InitSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub symbol: SymbolSpec,
    pub times: Vec<f64>,
    pub method: MethodChoice,
    pub tol: f64,
    pub init: InitSpec,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

fn parse_num<T: std::str::FromStr>(e: &Entry, what: &str) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| err(e.line, format!("{what}: cannot parse `{}`", e.value)))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_doc(&ConfigDoc::parse(text)?)
    }

    /// Parses, applies overrides in order, then interprets.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = ConfigDoc::parse(text)?;
        for o in overrides {
            doc.set(o)?;
        }
        Self::from_doc(&doc)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(None, format!("{}: {e}", path.display())))?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn from_doc(doc: &ConfigDoc) -> Result<Self, ConfigError> {
        let mut grid = GridSpec::default();
        if let Some(e) = doc.get("grid", "n") {
            grid.n = parse_num(e, "grid.n")?;
        }
        if let Some(e) = doc.get("grid", "J") {
            grid.radius = parse_num(e, "grid.J")?;
        }
        match (doc.get("grid", "inv_h"), doc.get("grid", "h")) {
            (Some(a), Some(_)) => return Err(err(a.line, "give either inv_h or h, not both")),
            (Some(e), None) => grid.inv_h = parse_num(e, "grid.inv_h")?,
            (None, Some(e)) => {
                let h: f64 = parse_num(e, "grid.h")?;
                let g = frechet_flow::make_grid(grid.n, grid.radius, h).map_err(|x| err(e.line, x.to_string()))?;
                grid.inv_h = g.inv_spacing();
            }
            (None, None) => {}
        }
        let built = FrequencyGrid::new(grid.n, grid.radius, grid.inv_h);
        if let Err(e) = built {
            let line = doc.get("grid", "n").or(doc.get("grid", "J")).and_then(|e| e.line);
            return Err(err(line, format!("[grid]: {e}")));
        }

        let symbol = match (doc.get("symbol", "text"), doc.get("symbol", "diffop")) {
            (Some(t), None) => {
                if let Some(c) = doc.get("symbol", "convention") {
                    return Err(err(c.line, "convention only applies to diffop"));
                }
                SymbolSpec::Text(t.value.clone())
            }
            (None, Some(d)) => {
                let convention = match doc.get("symbol", "convention") {
                    Some(c) => c.value.parse().map_err(|x: frechet_flow::SymbolError| err(c.line, x.to_string()))?,
                    None => Convention::Partial,
                };
                SymbolSpec::DiffOp { text: d.value.clone(), convention }
            }
            (Some(t), Some(_)) => return Err(err(t.line, "give either text or diffop, not both")),
            (None, None) => return Err(err(None, "[symbol] needs `text` or `diffop`")),
        };
        let symbol_line = doc.get("symbol", "text").or(doc.get("symbol", "diffop")).and_then(|e| e.line);
        symbol.polynomial(grid.n).map_err(|e| err(symbol_line, e.message))?;

        let times_entry = doc.get("evolve", "times").ok_or_else(|| err(None, "[evolve] needs `times`"))?;
        let times = times_entry
            .value
            .split(',')
            .map(|v| {
                let t: f64 = v.trim().parse().map_err(|_| err(times_entry.line, format!("bad time `{}`", v.trim())))?;
                if !t.is_finite() {
                    return Err(err(times_entry.line, format!("time `{}` is not finite", v.trim())));
                }
                Ok(t)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(err(times_entry.line, "times must be strictly increasing"));
        }
        let method = match doc.get("evolve", "method") {
            None => MethodChoice::Multiplier,
            Some(e) => match e.value.as_str() {
                "series" => MethodChoice::Series,
                "multiplier" => MethodChoice::Multiplier,
                "both" => MethodChoice::Both,
                other => return Err(err(e.line, format!("method `{other}` is not series, multiplier or both"))),
            },
        };
        let tol = match doc.get("evolve", "tol") {
            None => 1e-8,
            Some(e) => {
                let t: f64 = parse_num(e, "evolve.tol")?;
                if !(t > 0.0 && t.is_finite()) {
                    return Err(err(e.line, "tol must be positive"));
                }
                t
            }
        };

        let init = match doc.get("init", "field") {
            None => InitSpec::Ones,
            Some(e) => {
                let spec = InitSpec::parse(&e.value).map_err(|m| err(e.line, m))?;
                if let InitSpec::File(p) = &spec {
                    if !p.exists() {
                        return Err(err(e.line, format!("field file {} does not exist", p.display())));
                    }
                }
                if let InitSpec::Delta(xi) = &spec {
                    if xi.len() != grid.n {
                        return Err(err(e.line, format!("delta location needs {} coordinates", grid.n)));
                    }
                }
                spec
            }
        };

        let directory = doc.get("output", "directory").map_or_else(|| PathBuf::from("out"), |e| PathBuf::from(&e.value));
        let formats = match doc.get("output", "formats") {
            None => vec![Format::Csv],
            Some(e) => e
                .value
                .split(',')
                .map(|f| match f.trim() {
                    "csv" => Ok(Format::Csv),
                    "binary" => Ok(Format::Binary),
                    other => Err(err(e.line, format!("unknown format `{other}` (csv, binary)"))),
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        Ok(RunConfig { grid, symbol, times, method, tol, init, directory, formats })
    }

    /// Canonical text; [`RunConfig::parse`] maps it back to an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("[grid]\nn = {}\nJ = {}\ninv_h = {}\n\n", self.grid.n, self.grid.radius, self.grid.inv_h));
        match &self.symbol {
            SymbolSpec::Text(t) => s.push_str(&format!("[symbol]\ntext = {t}\n\n")),
            SymbolSpec::DiffOp { text, convention } => {
                let c = match convention {
                    Convention::D => "d",
                    Convention::Partial => "partial",
                };
                s.push_str(&format!("[symbol]\ndiffop = {text}\nconvention = {c}\n\n"));
            }
        }
        let times: Vec<String> = self.times.iter().map(|t| t.to_string()).collect();
        s.push_str(&format!("[evolve]\ntimes = {}\nmethod = {}\ntol = {:e}\n\n", times.join(", "), self.method, self.tol));
        s.push_str(&format!("[init]\nfield = {}\n\n", self.init));
        let formats: Vec<&str> = self
            .formats
            .iter()
            .map(|f| match f {
                Format::Csv => "csv",
                Format::Binary => "binary",
            })
            .collect();
        s.push_str(&format!("[output]\ndirectory = {}\nformats = {}\n", self.directory.display(), formats.join(", ")));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# heat
[grid]
n = 1
J = 4
inv_h = 16

[symbol]
text = -(1 + 4*pi^2*xi^2)

[evolve]
times = 0, 0.1, 1
method = both

[init]
field = delta@0.5
";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.grid, GridSpec { n: 1, radius: 4, inv_h: 16 });
        assert_eq!(c.times, vec![0.0, 0.1, 1.0]);
        assert_eq!(c.method, MethodChoice::Both);
        assert_eq!(c.init, InitSpec::Delta(vec![0.5]));
        assert_eq!(c.tol, 1e-8);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn errors_carry_lines() {
        let bad = SAMPLE.replace("times = 0, 0.1, 1", "times = 0, x");
        assert_eq!(RunConfig::parse(&bad).unwrap_err().line, Some(11));
        let bad = SAMPLE.replace("method = both", "method = euler");
        assert_eq!(RunConfig::parse(&bad).unwrap_err().line, Some(12));
        let bad = SAMPLE.replace("[init]", "[inits]");
        assert_eq!(RunConfig::parse(&bad).unwrap_err().line, Some(14));
        let bad = SAMPLE.replace("text = -(1 + 4*pi^2*xi^2)", "text = xi +");
        assert_eq!(RunConfig::parse(&bad).unwrap_err().line, Some(8));
        let bad = SAMPLE.replace("times = 0, 0.1, 1", "times = 1, 0");
        assert!(RunConfig::parse(&bad).is_err());
        let bad = SAMPLE.replace("field = delta@0.5", "field = file:/no/such/file");
        assert_eq!(RunConfig::parse(&bad).unwrap_err().line, Some(15));
    }

    #[test]
    fn overrides() {
        let c = RunConfig::parse_with_overrides(SAMPLE, &["evolve.method=series".into(), "grid.J=2".into()]).unwrap();
        assert_eq!((c.method, c.grid.radius), (MethodChoice::Series, 2));
        let c = RunConfig::parse_with_overrides(SAMPLE, &["symbol.diffop=1:1,0".into()]).unwrap();
        assert!(matches!(c.symbol, SymbolSpec::DiffOp { convention: Convention::Partial, .. }));
        let e = RunConfig::parse_with_overrides(SAMPLE, &["evolve.speed=3".into()]).unwrap_err();
        assert_eq!(e.line, None);
    }
}
