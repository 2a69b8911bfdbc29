//! Method labels such as `IP-BFGS(d=2)` and the solver plans they decode to.

use std::fmt;
use std::str::FromStr;

use qnop::operators::DEFAULT_DISCARD_TOL;
use qnop::{
    CoefficientFamily, InitialMatrix, InnerProductWeight, OperatorMode, Regularization, SolverConfig, StoppingRule,
    SystemMethod, UpdateRule,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Dfp,
    Bfgs,
    Psb,
    Lbfgs { memory: usize },
    Newton,
    Bgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Standard,
    Image,
    Projection { d: usize },
}

/// A named method: a base family plus an operator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Method {
    pub family: Family,
    pub variant: Variant,
}

/// Which driver runs a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Driver {
    Dense,
    Lbfgs,
    System(SystemMethod),
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub driver: Driver,
    pub config: SolverConfig,
}

impl Method {
    pub const fn new(family: Family, variant: Variant) -> Self {
        Self { family, variant }
    }

    pub fn standard(family: Family) -> Self {
        Self::new(family, Variant::Standard)
    }

    pub fn image(family: Family) -> Self {
        Self::new(family, Variant::Image)
    }

    pub fn projection(family: Family, d: usize) -> Self {
        Self::new(family, Variant::Projection { d })
    }

    fn check(self) -> Result<Self, CliError> {
        let bad = |why: &str| Err(CliError::Usage(format!("{self}: {why}")));
        match (self.family, self.variant) {
            (Family::Newton, Variant::Standard) => Ok(self),
            (Family::Newton, _) => bad("Newton's method has no operator variants"),
            (Family::Bgm, Variant::Image) => bad("no image operator for systems"),
            (Family::Lbfgs { memory: 0 }, _) => bad("memory must be positive"),
            (_, Variant::Projection { d: 0 }) => bad("d must be positive"),
            (Family::Lbfgs { memory }, Variant::Projection { d }) if d >= memory => bad("d must be below N"),
            _ => Ok(self),
        }
    }

    pub fn is_system(&self) -> bool {
        matches!(self.family, Family::Newton | Family::Bgm)
    }

    fn rule(&self) -> UpdateRule {
        match self.family {
            Family::Dfp => UpdateRule::dfp(),
            Family::Psb => UpdateRule::psb(),
            Family::Bgm => UpdateRule::bgm(),
            Family::Bfgs | Family::Lbfgs { .. } | Family::Newton => UpdateRule::bfgs(),
        }
    }

    fn coefficient_family(&self) -> CoefficientFamily {
        match self.family {
            Family::Psb => CoefficientFamily::Gpsb(InnerProductWeight::Identity),
            Family::Bgm => CoefficientFamily::Bgm,
            _ => CoefficientFamily::Broyden,
        }
    }

    fn mode(&self) -> OperatorMode {
        match self.variant {
            Variant::Standard => OperatorMode::None,
            Variant::Image => OperatorMode::image(),
            Variant::Projection { d } => OperatorMode::NormalEqProjection {
                d,
                regularization: Regularization::Fixed(0.0),
                family: self.coefficient_family(),
                discard_tol: DEFAULT_DISCARD_TOL,
            },
        }
    }

    /// The plan for this method with the given stopping rule and `B₀`.
    pub fn plan(&self, stop: StoppingRule, b0: InitialMatrix, max_iters: usize) -> RunPlan {
        let mut config =
            SolverConfig::new(self.rule(), stop).with_mode(self.mode()).with_b0(b0).with_max_iters(max_iters);
        let driver = match self.family {
            Family::Lbfgs { memory } => {
                config = config.with_memory(memory);
                Driver::Lbfgs
            }
            Family::Newton => Driver::System(SystemMethod::Newton),
            Family::Bgm => Driver::System(SystemMethod::QuasiNewton),
            _ => Driver::Dense,
        };
        RunPlan { driver, config }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (base, image_base, memory) = match self.family {
            Family::Dfp => ("DFP", "DFP", None),
            Family::Bfgs => ("BFGS", "BFGS", None),
            Family::Psb => ("PSB", "PSB", None),
            Family::Lbfgs { memory } => ("L-BFGS", "LBFGS", Some(memory)),
            Family::Newton => ("Newton", "Newton", None),
            Family::Bgm => ("BGM", "BGM", None),
        };
        let mut params = Vec::new();
        if let Some(n) = memory {
            params.push(format!("N={n}"));
        }
        if let Variant::Projection { d } = self.variant {
            params.push(format!("d={d}"));
        }
        match self.variant {
            Variant::Standard => write!(f, "{base}")?,
            Variant::Image => write!(f, "Im-{image_base}")?,
            Variant::Projection { .. } => write!(f, "IP-{image_base}")?,
        }
        if !params.is_empty() {
            write!(f, "({})", params.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(label: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("unknown method label `{label}`"));
        let label = label.trim();
        let (head, params) = match label.find('(') {
            Some(i) if label.ends_with(')') => (&label[..i], Some(&label[i + 1..label.len() - 1])),
            Some(_) => return Err(bad()),
            None => (label, None),
        };
        let (prefix, base) = if let Some(rest) = head.strip_prefix("Im-") {
            ("Im", rest)
        } else if let Some(rest) = head.strip_prefix("IP-") {
            ("IP", rest)
        } else {
            ("", head)
        };
        let mut memory = None;
        let mut d = None;
        for kv in params.into_iter().flat_map(|p| p.split(',')) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            let slot = match k.trim() {
                "N" => &mut memory,
                "d" => &mut d,
                _ => return Err(bad()),
            };
            if slot.replace(v).is_some() {
                return Err(bad());
            }
        }
        let lbfgs_name = if prefix.is_empty() { "L-BFGS" } else { "LBFGS" };
        let family = match base {
            "DFP" => Family::Dfp,
            "BFGS" => Family::Bfgs,
            "PSB" => Family::Psb,
            "Newton" => Family::Newton,
            "BGM" => Family::Bgm,
            b if b == lbfgs_name => Family::Lbfgs { memory: memory.take().ok_or_else(bad)? },
            _ => return Err(bad()),
        };
        if memory.is_some() {
            return Err(bad());
        }
        let variant = match (prefix, d) {
            ("", None) => Variant::Standard,
            ("Im", None) => Variant::Image,
            ("IP", Some(d)) => Variant::Projection { d },
            _ => return Err(bad()),
        };
        Method::new(family, variant).check()
    }
}

/// Splits a comma-separated label list, ignoring commas inside parentheses.
pub fn split_labels(list: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out.retain(|s| !s.is_empty());
    out
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    split_labels(list).iter().map(|s| s.parse()).collect()
}

/// The quadratic-benchmark table rows: for each dense family its standard,
/// image and projection variants, then the L-BFGS blocks.
pub fn table2_methods(ds: &[usize], memories: &[usize]) -> Vec<Method> {
    let mut out = Vec::new();
    for family in [Family::Dfp, Family::Bfgs, Family::Psb] {
        out.push(Method::standard(family));
        out.push(Method::image(family));
        out.extend(ds.iter().map(|&d| Method::projection(family, d)));
    }
    for &memory in memories {
        let family = Family::Lbfgs { memory };
        out.push(Method::standard(family));
        out.push(Method::image(family));
        out.extend(ds.iter().filter(|&&d| d < memory).map(|&d| Method::projection(family, d)));
    }
    out
}

/// Small-memory L-BFGS blocks: standard plus projection with every `d < N`
/// (restricted to `ds` when given).
pub fn table3_methods(memories: &[usize], ds: Option<&[usize]>) -> Vec<Method> {
    let mut out = Vec::new();
    for &memory in memories {
        let family = Family::Lbfgs { memory };
        out.push(Method::standard(family));
        for d in 1..memory {
            if ds.map_or(true, |ds| ds.contains(&d)) {
                out.push(Method::projection(family, d));
            }
        }
    }
    out
}

pub fn system_methods(ds: &[usize]) -> Vec<Method> {
    let mut out = vec![Method::standard(Family::Newton), Method::standard(Family::Bgm)];
    out.extend(ds.iter().map(|&d| Method::projection(Family::Bgm, d)));
    out
}
