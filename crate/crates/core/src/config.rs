//! Model files in TOML.
//!
//! ```toml
//! [initial_state]
//! x0 = 0.04
//!
//! [immigration]
//! beta = 0.08
//! [immigration.jumps]          # optional, defaults to family = "none"
//! family = "stable"            # alpha in (0, 1); keys alpha, scale, c
//!
//! [branching]
//! b = 2.0
//! sigma = 0.3
//! [branching.jumps]
//! family = "stable"            # or "tempered-stable" (alpha, theta, c); alpha in (1, 2)
//! alpha = 1.5
//! scale = 0.2
//! c = 0.3761                   # optional, defaults to 1 / |Gamma(-alpha)|
//!
//! [noise]
//! b = -0.5
//! sigma = 1.0
//! [noise.jumps]
//! family = "cgmy"              # keys c (optional), g, m, y
//!
//! [correlation]
//! rho = -0.5
//! ```
//!
//! Unknown sections and keys are rejected.

use crate::error::{CbitclError, Result};
use crate::levy::{default_normalization, LevyMeasureSpec};
use crate::mechanisms::{BranchingMechanism, CbitclModel, ImmigrationMechanism, NoiseExponent};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use toml::{Table, Value};

fn err(section: &str, key: &str, message: impl Into<String>) -> CbitclError {
    CbitclError::ModelFile { section: section.into(), key: key.into(), message: message.into() }
}

struct Section<'a> {
    name: &'a str,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn get(root: &'a Table, path: &'a str) -> Result<Option<Self>> {
        let mut t = root;
        for part in path.split('.') {
            match t.get(part) {
                None => return Ok(None),
                Some(Value::Table(inner)) => t = inner,
                Some(_) => return Err(err(path, part, "expected a table")),
            }
        }
        Ok(Some(Section { name: path, table: t }))
    }

    fn require(root: &'a Table, path: &'a str) -> Result<Self> {
        Self::get(root, path)?.ok_or_else(|| err(path, "", "missing section"))
    }

    fn number(&self, key: &str) -> Result<f64> {
        self.opt_number(key)?.ok_or_else(|| err(self.name, key, "missing key"))
    }

    fn opt_number(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(err(self.name, key, format!("expected a number, found {}", v.type_str()))),
        }
    }

    fn string(&self, key: &str) -> Result<&'a str> {
        match self.table.get(key) {
            None => Err(err(self.name, key, "missing key")),
            Some(Value::String(s)) => Ok(s),
            Some(v) => Err(err(self.name, key, format!("expected a string, found {}", v.type_str()))),
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.table.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(err(self.name, k, "unknown key")),
            None => Ok(()),
        }
    }
}

const SECTIONS: [&str; 5] = ["initial_state", "immigration", "branching", "noise", "correlation"];

fn jumps(root: &Table, path: &str) -> Result<LevyMeasureSpec> {
    let Some(s) = Section::get(root, path)? else { return Ok(LevyMeasureSpec::None) };
    let family = s.string("family")?;
    let spec = match family {
        "none" => {
            s.only(&["family"])?;
            LevyMeasureSpec::None
        }
        "stable" => {
            s.only(&["family", "alpha", "scale", "c"])?;
            let alpha = s.number("alpha")?;
            LevyMeasureSpec::StablePositive {
                alpha,
                scale: s.opt_number("scale")?.unwrap_or(1.0),
                c: s.opt_number("c")?.unwrap_or_else(|| default_normalization(alpha)),
            }
        }
        "tempered-stable" => {
            s.only(&["family", "alpha", "theta", "c"])?;
            let alpha = s.number("alpha")?;
            LevyMeasureSpec::TemperedStablePositive {
                alpha,
                theta: s.number("theta")?,
                c: s.opt_number("c")?.unwrap_or_else(|| default_normalization(alpha)),
            }
        }
        "cgmy" => {
            s.only(&["family", "c", "g", "m", "y"])?;
            let y = s.number("y")?;
            LevyMeasureSpec::Cgmy {
                c: s.opt_number("c")?.unwrap_or_else(|| default_normalization(y)),
                g: s.number("g")?,
                m: s.number("m")?,
                y,
            }
        }
        other => return Err(err(path, "family", format!("unknown family `{other}`"))),
    };
    Ok(spec)
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<CbitclModel> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| err("", "", e.message().to_string()))?;
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(err(k, "", "unknown section"));
    }
    let init = Section::require(&root, "initial_state")?;
    init.only(&["x0"])?;
    let imm = Section::require(&root, "immigration")?;
    imm.only(&["beta", "jumps"])?;
    let br = Section::require(&root, "branching")?;
    br.only(&["b", "sigma", "jumps"])?;
    let nz = Section::require(&root, "noise")?;
    nz.only(&["b", "sigma", "jumps"])?;
    let rho = match Section::get(&root, "correlation")? {
        Some(c) => {
            c.only(&["rho"])?;
            c.opt_number("rho")?.unwrap_or(0.0)
        }
        None => 0.0,
    };
    CbitclModel::new(
        init.number("x0")?,
        ImmigrationMechanism { beta: imm.number("beta")?, nu: jumps(&root, "immigration.jumps")? },
        BranchingMechanism {
            b: br.number("b")?,
            sigma: br.opt_number("sigma")?.unwrap_or(0.0),
            pi: jumps(&root, "branching.jumps")?,
        },
        NoiseExponent {
            b: nz.number("b")?,
            sigma: nz.opt_number("sigma")?.unwrap_or(0.0),
            gamma: jumps(&root, "noise.jumps")?,
        },
        rho,
    )
}

pub fn load_model(path: &std::path::Path) -> Result<CbitclModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CbitclError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

/// Shortest decimal that parses back to the same `f64`, in TOML syntax.
fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

fn write_jumps(out: &mut String, section: &str, mu: &LevyMeasureSpec) {
    let _ = writeln!(out, "\n[{section}.jumps]\nfamily = \"{}\"", mu.family_name());
    match *mu {
        LevyMeasureSpec::None => {}
        LevyMeasureSpec::StablePositive { alpha, scale, c } => {
            let _ = writeln!(out, "alpha = {}\nscale = {}\nc = {}", num(alpha), num(scale), num(c));
        }
        LevyMeasureSpec::TemperedStablePositive { alpha, theta, c } => {
            let _ = writeln!(out, "alpha = {}\ntheta = {}\nc = {}", num(alpha), num(theta), num(c));
        }
        LevyMeasureSpec::Cgmy { c, g, m, y } => {
            let _ = writeln!(out, "c = {}\ng = {}\nm = {}\ny = {}", num(c), num(g), num(m), num(y));
        }
    }
}

/// Canonical model file: fixed section and key order, every parameter explicit.
pub fn model_to_toml(model: &CbitclModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[initial_state]\nx0 = {}", num(model.x0));
    let _ = writeln!(s, "\n[immigration]\nbeta = {}", num(model.immigration.beta));
    write_jumps(&mut s, "immigration", &model.immigration.nu);
    let _ = writeln!(s, "\n[branching]\nb = {}\nsigma = {}", num(model.branching.b), num(model.branching.sigma));
    write_jumps(&mut s, "branching", &model.branching.pi);
    let _ = writeln!(s, "\n[noise]\nb = {}\nsigma = {}", num(model.noise.b), num(model.noise.sigma));
    write_jumps(&mut s, "noise", &model.noise.gamma);
    let _ = writeln!(s, "\n[correlation]\nrho = {}", num(model.rho));
    s
}

/// SHA-256 of the canonical model file, hex encoded.
pub fn model_hash(model: &CbitclModel) -> String {
    hex::encode(Sha256::digest(model_to_toml(model).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trip_presets() {
        for n in presets::NAMES {
            let m = presets::by_name(n).unwrap();
            let text = model_to_toml(&m);
            assert_eq!(parse_model(&text).unwrap(), m, "{n}");
        }
    }

    #[test]
    fn defaults_and_integers() {
        let m = parse_model(
            "[initial_state]\nx0 = 1\n[immigration]\nbeta = 0\n[branching]\nb = 1\n[branching.jumps]\nfamily = \"stable\"\nalpha = 1.5\n[noise]\nb = -0.5\nsigma = 1\n",
        )
        .unwrap();
        assert_eq!(m.rho, 0.0);
        assert_eq!(m.branching.pi, LevyMeasureSpec::StablePositive { alpha: 1.5, scale: 1.0, c: default_normalization(1.5) });
    }

    #[test]
    fn errors_name_section_and_key() {
        let base = model_to_toml(&presets::alpha_cir());
        let bad = base.replace("rho = -0.5", "rho = \"x\"");
        match parse_model(&bad) {
            Err(CbitclError::ModelFile { section, key, .. }) => assert_eq!((section.as_str(), key.as_str()), ("correlation", "rho")),
            other => panic!("{other:?}"),
        }
        let bad = base.replace("scale = 0.2", "scael = 0.2");
        match parse_model(&bad) {
            Err(CbitclError::ModelFile { section, key, .. }) => {
                assert_eq!((section.as_str(), key.as_str()), ("branching.jumps", "scael"))
            }
            other => panic!("{other:?}"),
        }
        let bad = base.replace("[noise]\nb = -0.5\n", "[noise]\n");
        assert!(matches!(parse_model(&bad), Err(CbitclError::ModelFile { key, .. }) if key == "b"));
    }

    #[test]
    fn hash_is_stable() {
        let a = model_hash(&presets::alpha_cir());
        assert_eq!(a.len(), 64);
        assert_eq!(a, model_hash(&parse_model(&model_to_toml(&presets::alpha_cir())).unwrap()));
        assert_ne!(a, model_hash(&presets::tempered_cgmy()));
    }
}
