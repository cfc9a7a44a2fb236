//! Name-keyed registries for the pluggable strategies: removal rules,
//! frontier policies and measure oracles.
//!
//! Names may carry one parameter after a colon, as in `beam:64`.

use crate::cantor::{
    BeamFrontier, DangerousWindowRule, DiverseFrontier, FrontierPolicy, FullFrontier, LatticeEscapeRule, MeasureRule,
    RemovalRule,
};
use crate::error::CantorError;
use crate::measure::{Lebesgue, MeasureOracle, ScaledLebesgue};
use crate::rational::{parse_q, Q};

type Factory<T> = fn(Option<&str>) -> Result<T, String>;

/// A family of named constructors.
pub struct Registry<T> {
    family: &'static str,
    entries: Vec<(&'static str, Factory<T>)>,
}

impl<T> Registry<T> {
    pub fn new(family: &'static str) -> Self {
        Registry { family, entries: Vec::new() }
    }

    pub fn register(&mut self, name: &'static str, f: Factory<T>) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, f));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    /// Builds `name` or `name:param`.
    pub fn build(&self, spec: &str) -> Result<T, CantorError> {
        let spec = spec.trim();
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let unknown = |detail: Option<String>| CantorError::UnknownStrategy {
            family: self.family.to_string(),
            name: match detail {
                Some(d) => format!("{spec} ({d})"),
                None => spec.to_string(),
            },
            available: self.names().join(", "),
        };
        let f = self.entries.iter().find(|(n, _)| *n == name).ok_or_else(|| unknown(None))?;
        (f.1)(param).map_err(|e| unknown(Some(e)))
    }
}

fn no_param(p: Option<&str>) -> Result<(), String> {
    match p {
        None => Ok(()),
        Some(p) => Err(format!("takes no parameter, got {p:?}")),
    }
}

fn width(p: Option<&str>) -> Result<usize, String> {
    let w: usize = p.ok_or("needs a width, as in name:64")?.parse().map_err(|e| format!("{e}"))?;
    if w == 0 {
        return Err("width must be positive".into());
    }
    Ok(w)
}

pub const DEFAULT_FULL_LIMIT: usize = 1 << 20;

pub fn rule_registry() -> Registry<Box<dyn RemovalRule>> {
    let mut r: Registry<Box<dyn RemovalRule>> = Registry::new("removal rule");
    r.register("measure", |p| no_param(p).map(|_| Box::new(MeasureRule) as Box<dyn RemovalRule>));
    r.register("dangerous-window", |p| no_param(p).map(|_| Box::new(DangerousWindowRule) as Box<dyn RemovalRule>));
    r.register("lattice-escape", |p| no_param(p).map(|_| Box::new(LatticeEscapeRule) as Box<dyn RemovalRule>));
    r
}

pub fn frontier_registry() -> Registry<Box<dyn FrontierPolicy>> {
    let mut r: Registry<Box<dyn FrontierPolicy>> = Registry::new("frontier policy");
    r.register("full", |p| {
        let limit = match p {
            None => DEFAULT_FULL_LIMIT,
            Some(_) => width(p)?,
        };
        Ok(Box::new(FullFrontier { limit }))
    });
    r.register("beam", |p| Ok(Box::new(BeamFrontier { width: width(p)? })));
    r.register("diverse", |p| Ok(Box::new(DiverseFrontier { width: width(p)? })));
    r
}

/// Measures are built with `ρ₀` supplied separately.
pub fn measure_registry() -> Registry<Box<dyn Fn(Q) -> Box<dyn MeasureOracle>>> {
    let mut r: Registry<Box<dyn Fn(Q) -> Box<dyn MeasureOracle>>> = Registry::new("measure");
    r.register("lebesgue", |p| {
        no_param(p)?;
        Ok(Box::new(|rho0| Box::new(Lebesgue::new(rho0)) as Box<dyn MeasureOracle>))
    });
    r.register("scaled-lebesgue", |p| {
        let k = parse_q(p.ok_or("needs a factor, as in scaled-lebesgue:1/2")?)?;
        if k <= Q::from_integer(0.into()) {
            return Err("factor must be positive".into());
        }
        Ok(Box::new(move |rho0| Box::new(ScaledLebesgue { k: k.clone(), rho0 }) as Box<dyn MeasureOracle>))
    });
    r
}

/// Builds the rules of a comma-separated list, in order.
pub fn build_rules(list: &str) -> Result<Vec<Box<dyn RemovalRule>>, CantorError> {
    let reg = rule_registry();
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| reg.build(s)).collect()
}

pub fn build_frontier(spec: &str) -> Result<Box<dyn FrontierPolicy>, CantorError> {
    frontier_registry().build(spec)
}

pub fn build_measure(spec: &str, rho0: Q) -> Result<Box<dyn MeasureOracle>, CantorError> {
    Ok(measure_registry().build(spec)?(rho0))
}
