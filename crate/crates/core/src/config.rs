//! Run configuration in a small INI dialect.
//!
//! ```text
//! [domain]
//! xmin = -1
//! xmax = 1
//! ymin = -1
//! ymax = 1
//!
//! [interface]
//! kind = ellipse        # circle | ellipse | star
//! center = 0, 0
//! a = 0.6
//! b = 0.4
//!
//! [discretization]
//! k = 2
//! h = 0.1
//! tau_rule = c_h2       # fixed | c_hk | c_h2
//! tau_c = 0.25
//!
//! [physics]
//! T = 0.5
//! nu_minus = 1
//! nu_plus = 1
//!
//! [output]
//! dir = out
//! snapshot_every = 10
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::geometry::{InterfaceDescriptor, Point, Shape};
use crate::mesh::Rect;
use crate::scheme::Physics;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauRule {
    Fixed(f64),
    /// `τ = c h^k`
    CHk(f64),
    /// `τ = c h²`
    CH2(f64),
}

impl TauRule {
    pub fn tau(&self, h: f64, k: usize) -> f64 {
        match *self {
            TauRule::Fixed(t) => t,
            TauRule::CHk(c) => c * h.powi(k as i32),
            TauRule::CH2(c) => c * h * h,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub domain: Rect,
    pub interface: InterfaceDescriptor,
    pub k: usize,
    pub h: f64,
    pub tau_rule: TauRule,
    pub t_final: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub gamma0: f64,
    pub force: f64,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
}

impl RunConfig {
    pub fn tau(&self) -> f64 {
        self.tau_rule.tau(self.h, self.k)
    }

    pub fn physics(&self) -> Physics {
        Physics { nu_minus: self.nu_minus, nu_plus: self.nu_plus }
    }

    /// Number of steps `⌈T / τ⌉`, tolerant to rounding in `T / τ`.
    pub fn n_steps(&self) -> usize {
        let ratio = self.t_final / self.tau();
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
    }

    pub fn parse(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.build()
    }

    /// Parse and apply `section.key=value` overrides before validation.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.set_override(o)?;
        }
        raw.build()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let d = &self.domain;
        let _ = writeln!(out, "[domain]");
        let _ = writeln!(out, "xmin = {:?}\nxmax = {:?}\nymin = {:?}\nymax = {:?}", d.min.x, d.max.x, d.min.y, d.max.y);
        let _ = writeln!(out, "\n[interface]");
        let c = self.interface.center;
        match self.interface.shape {
            Shape::Circle { radius } => {
                let _ = writeln!(out, "kind = circle\ncenter = {:?}, {:?}\nradius = {radius:?}", c.x, c.y);
            }
            Shape::Ellipse { a, b } => {
                let _ = writeln!(out, "kind = ellipse\ncenter = {:?}, {:?}\na = {a:?}\nb = {b:?}", c.x, c.y);
            }
            Shape::Star { r0, amplitude, lobes } => {
                let _ = writeln!(
                    out,
                    "kind = star\ncenter = {:?}, {:?}\nr0 = {r0:?}\namplitude = {amplitude:?}\nlobes = {lobes}",
                    c.x, c.y
                );
            }
        }
        let _ = writeln!(out, "\n[discretization]\nk = {}\nh = {:?}", self.k, self.h);
        match self.tau_rule {
            TauRule::Fixed(t) => {
                let _ = writeln!(out, "tau_rule = fixed\ntau = {t:?}");
            }
            TauRule::CHk(c) => {
                let _ = writeln!(out, "tau_rule = c_hk\ntau_c = {c:?}");
            }
            TauRule::CH2(c) => {
                let _ = writeln!(out, "tau_rule = c_h2\ntau_c = {c:?}");
            }
        }
        let _ = writeln!(
            out,
            "\n[physics]\nT = {:?}\nnu_minus = {:?}\nnu_plus = {:?}\ngamma0 = {:?}\nforce = {:?}",
            self.t_final, self.nu_minus, self.nu_plus, self.gamma0, self.force
        );
        let _ = writeln!(
            out,
            "\n[output]\ndir = {}\nsnapshot_every = {}",
            self.output_dir.display(),
            self.snapshot_every
        );
        out
    }
}

/// Key-value pairs by `section.key`, with the line they came from.
#[derive(Clone, Debug, Default)]
struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse { line: line_no, msg: "unterminated section header".into() })?;
                section = Some(name.trim().to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected 'key = value', got '{line}'") })?;
            let section = section
                .as_ref()
                .ok_or_else(|| Error::Parse { line: line_no, msg: "key outside of a section".into() })?;
            let full = format!("{section}.{}", key.trim());
            if raw.entries.insert(full.clone(), (value.trim().to_string(), line_no)).is_some() {
                return Err(Error::Parse { line: line_no, msg: format!("duplicate key '{full}'") });
            }
        }
        Ok(raw)
    }

    fn set_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .filter(|(k, _)| k.contains('.'))
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("override '{spec}' must look like section.key=value") })?;
        self.entries.insert(key.trim().to_string(), (value.trim().to_string(), 0));
        Ok(())
    }

    fn num(&mut self, key: &str, default: Option<f64>, errors: &mut Vec<String>) -> f64 {
        match self.entries.remove(key) {
            Some((v, line)) => v.parse::<f64>().unwrap_or_else(|_| {
                errors.push(format!("{key} (line {line}): '{v}' is not a number"));
                f64::NAN
            }),
            None => default.unwrap_or_else(|| {
                errors.push(format!("{key} is required"));
                f64::NAN
            }),
        }
    }

    fn build(mut self) -> Result<RunConfig> {
        let mut errors = Vec::new();
        let xmin = self.num("domain.xmin", Some(-1.0), &mut errors);
        let xmax = self.num("domain.xmax", Some(1.0), &mut errors);
        let ymin = self.num("domain.ymin", Some(-1.0), &mut errors);
        let ymax = self.num("domain.ymax", Some(1.0), &mut errors);
        let kind = self.entries.remove("interface.kind").map(|(v, _)| v);
        let center = match self.entries.remove("interface.center") {
            None => Some(Point::zeros()),
            Some((v, line)) => {
                let parts: Vec<Option<f64>> = v.split(',').map(|s| s.trim().parse().ok()).collect();
                match parts.as_slice() {
                    [Some(x), Some(y)] => Some(Point::new(*x, *y)),
                    _ => {
                        errors.push(format!("interface.center (line {line}): expected 'x, y', got '{v}'"));
                        None
                    }
                }
            }
        };
        let shape = match kind.as_deref() {
            Some("circle") => Some(Shape::Circle { radius: self.num("interface.radius", None, &mut errors) }),
            Some("ellipse") => Some(Shape::Ellipse {
                a: self.num("interface.a", None, &mut errors),
                b: self.num("interface.b", None, &mut errors),
            }),
            Some("star") => {
                let r0 = self.num("interface.r0", None, &mut errors);
                let amplitude = self.num("interface.amplitude", None, &mut errors);
                let lobes = self.num("interface.lobes", None, &mut errors);
                if lobes.is_finite() && (lobes.fract() != 0.0 || lobes < 1.0) {
                    errors.push(format!("interface.lobes must be a positive integer, got {lobes}"));
                }
                Some(Shape::Star { r0, amplitude, lobes: lobes.max(0.0) as u32 })
            }
            Some(other) => {
                errors.push(format!("interface.kind '{other}' is not one of circle, ellipse, star"));
                None
            }
            None => {
                errors.push("interface.kind is required".into());
                None
            }
        };
        let k = self.num("discretization.k", None, &mut errors);
        if k.is_finite() && (k.fract() != 0.0 || k < 2.0) {
            errors.push("k must be ≥ 2 (inf-sup)".into());
        }
        let h = self.num("discretization.h", None, &mut errors);
        if !(h > 0.0) {
            errors.push(format!("discretization.h must be positive, got {h}"));
        }
        let tau_rule = match self.entries.remove("discretization.tau_rule").map(|(v, _)| v).as_deref() {
            Some("fixed") => Some(TauRule::Fixed(self.num("discretization.tau", None, &mut errors))),
            Some("c_hk") => Some(TauRule::CHk(self.num("discretization.tau_c", None, &mut errors))),
            Some("c_h2") => Some(TauRule::CH2(self.num("discretization.tau_c", None, &mut errors))),
            Some(other) => {
                errors.push(format!("discretization.tau_rule '{other}' is not one of fixed, c_hk, c_h2"));
                None
            }
            None => {
                errors.push("discretization.tau_rule is required".into());
                None
            }
        };
        if let Some(TauRule::Fixed(c) | TauRule::CHk(c) | TauRule::CH2(c)) = tau_rule {
            if !(c > 0.0) {
                errors.push(format!("time step constant must be positive, got {c}"));
            }
        }
        let t_final = self.num("physics.T", None, &mut errors);
        if !(t_final >= 0.0) {
            errors.push(format!("physics.T must be nonnegative, got {t_final}"));
        }
        let nu_minus = self.num("physics.nu_minus", None, &mut errors);
        let nu_plus = self.num("physics.nu_plus", None, &mut errors);
        for (name, nu) in [("nu_minus", nu_minus), ("nu_plus", nu_plus)] {
            if !(nu > 0.0) {
                errors.push(format!("physics.{name} must be positive, got {nu}"));
            }
        }
        let gamma0 = self.num("physics.gamma0", Some(1.0), &mut errors);
        if gamma0 != 1.0 {
            errors.push(format!("physics.gamma0 is fixed to 1, got {gamma0}"));
        }
        let force = self.num("physics.force", Some(0.0), &mut errors);
        if force != 0.0 {
            errors.push(format!("physics.force is fixed to 0, got {force}"));
        }
        let output_dir = PathBuf::from(self.entries.remove("output.dir").map_or("output".to_string(), |(v, _)| v));
        let snapshot_every = self.num("output.snapshot_every", Some(10.0), &mut errors);
        if !(snapshot_every >= 1.0 && snapshot_every.fract() == 0.0) {
            errors.push(format!("output.snapshot_every must be a positive integer, got {snapshot_every}"));
        }
        for (key, (_, line)) in &self.entries {
            errors.push(format!("unknown key '{key}' (line {line})"));
        }

        let domain = Rect::new(xmin, ymin, xmax, ymax).map_err(|e| errors.push(e.to_string())).ok();
        let interface = match (center, shape) {
            (Some(center), Some(shape)) => {
                InterfaceDescriptor::new(center, shape).map_err(|e| errors.push(e.to_string())).ok()
            }
            _ => None,
        };
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let (Some(domain), Some(interface), Some(tau_rule)) = (domain, interface, tau_rule) else {
            unreachable!("missing parts are reported as validation errors")
        };
        Ok(RunConfig {
            domain,
            interface,
            k: k as usize,
            h,
            tau_rule,
            t_final,
            nu_minus,
            nu_plus,
            gamma0,
            force,
            output_dir,
            snapshot_every: snapshot_every as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[interface]
kind = circle
radius = 0.5

[discretization]
k = 2
h = 0.1
tau_rule = c_h2
tau_c = 1

[physics]
T = 0.1
nu_minus = 1
nu_plus = 10
";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.snapshot_every, 10);
        assert_eq!(c.domain, Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap());
        assert_eq!(c.gamma0, 1.0);
        assert!((c.tau() - 0.01).abs() < 1e-15);
        assert_eq!(c.n_steps(), 10);
    }

    #[test]
    fn k_one_is_rejected() {
        let err = RunConfig::parse(&MINIMAL.replace("k = 2", "k = 1")).unwrap_err();
        let Error::Validation(msgs) = err else { panic!("{err}") };
        assert!(msgs.iter().any(|m| m == "k must be ≥ 2 (inf-sup)"));
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL.replace("nu_minus = 1", "nu_minus = 0").replace("T = 0.1", "T = -1");
        let Error::Validation(msgs) = RunConfig::parse(&text).unwrap_err() else { panic!() };
        assert_eq!(msgs.len(), 2, "{msgs:?}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::parse("[physics]\nT 0.1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::parse_with_overrides(MINIMAL, &["discretization.h=0.05".into()]).unwrap();
        assert_eq!(c.h, 0.05);
    }

    #[test]
    fn round_trip() {
        for text in [
            MINIMAL.to_string(),
            MINIMAL.replace("kind = circle\nradius = 0.5", "kind = star\ncenter = 0.1, -0.2\nr0 = 0.5\namplitude = 0.1\nlobes = 5"),
            MINIMAL.replace("tau_rule = c_h2\ntau_c = 1", "tau_rule = fixed\ntau = 0.003"),
        ] {
            let c = RunConfig::parse(&text).unwrap();
            let again = RunConfig::parse(&c.serialize()).unwrap();
            assert_eq!(c, again);
            assert_eq!(c.serialize(), again.serialize());
        }
    }
}
