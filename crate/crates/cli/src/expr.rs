//! Expressions for data fields and custom ambient functions.
//!
//! Field expressions are functions of the chart coordinates: `x`, `y`, the
//! chart radius `r = |u|` and the σ-distance `s` from the chart origin.
//! Conformal factors are functions of `t` alone.

use ckg_core::geometry::Vec2;
use exmex::{Express, FlatEx};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Var {
    X,
    Y,
    R,
    S,
    T,
}

/// How the σ-distance `s` from the chart origin is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadialDistance {
    /// `s = r`.
    Flat,
    /// Round unit sphere in the stereographic chart: `s = 2 atan r`.
    Sphere,
    /// No closed form; expressions may not use `s`.
    Unknown,
}

/// A point of the chart with its derived coordinates.
#[derive(Clone, Copy, Debug)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub s: f64,
}

impl ChartPoint {
    pub fn new(u: Vec2, radial: RadialDistance) -> Self {
        let r = u.norm();
        let s = match radial {
            RadialDistance::Flat => r,
            RadialDistance::Sphere => 2.0 * r.atan(),
            RadialDistance::Unknown => f64::NAN,
        };
        Self { x: u.x, y: u.y, r, s }
    }
}

#[derive(Clone, Debug)]
pub struct Expr {
    text: String,
    ex: FlatEx<f64>,
    vars: Vec<Var>,
}

fn parse(text: &str, pointer: &str) -> CliResult<FlatEx<f64>> {
    exmex::parse::<f64>(text).map_err(|e| CliError::input(pointer, format!("cannot parse expression '{text}': {e}")))
}

impl Expr {
    /// Parses a field expression over `x, y, r, s`. A reference to `t` is
    /// rejected: prescribed data live on the base domain.
    pub fn chart(text: &str, pointer: &str, radial: RadialDistance) -> CliResult<Self> {
        let ex = parse(text, pointer)?;
        let mut vars = Vec::new();
        for name in ex.var_names() {
            let v = match name.as_str() {
                "x" => Var::X,
                "y" => Var::Y,
                "r" => Var::R,
                "s" if radial != RadialDistance::Unknown => Var::S,
                "s" => {
                    return Err(CliError::input(
                        pointer,
                        "'s' needs a base metric with a known distance from the origin",
                    ))
                }
                "t" => {
                    return Err(CliError::input(
                        pointer,
                        "expression depends on t; H and phi must be functions of the chart coordinates x, y, r, s",
                    ))
                }
                other => {
                    return Err(CliError::input(
                        pointer,
                        format!("unknown variable '{other}' (allowed: x, y, r, s)"),
                    ))
                }
            };
            vars.push(v);
        }
        Ok(Self {
            text: text.into(),
            ex,
            vars,
        })
    }

    /// Parses a function of `t` alone.
    pub fn time(text: &str, pointer: &str) -> CliResult<Self> {
        let ex = parse(text, pointer)?;
        let mut vars = Vec::new();
        for name in ex.var_names() {
            if name != "t" {
                return Err(CliError::input(
                    pointer,
                    format!("unknown variable '{name}' (only t is allowed)"),
                ));
            }
            vars.push(Var::T);
        }
        Ok(Self {
            text: text.into(),
            ex,
            vars,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Value at a chart point; `NaN` if the evaluation fails.
    pub fn at_point(&self, p: ChartPoint) -> f64 {
        let args: Vec<f64> = self
            .vars
            .iter()
            .map(|v| match v {
                Var::X => p.x,
                Var::Y => p.y,
                Var::R => p.r,
                Var::S => p.s,
                Var::T => f64::NAN,
            })
            .collect();
        self.ex.eval(&args).unwrap_or(f64::NAN)
    }

    pub fn at_time(&self, t: f64) -> f64 {
        let args = vec![t; self.vars.len()];
        self.ex.eval(&args).unwrap_or(f64::NAN)
    }
}
