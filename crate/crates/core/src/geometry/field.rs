//! Per-vertex scalar fields bound to a mesh, with CSV exchange.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{DomainMesh, Vec2};

/// Per-vertex real values over a [`DomainMesh`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    mesh_id: u64,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(mesh: &DomainMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.vertex_count() {
            return Err(Error::FieldMismatch(format!(
                "{} values for {} vertices",
                values.len(),
                mesh.vertex_count()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::FieldMismatch(format!(
                "value at vertex {i} is not finite"
            )));
        }
        Ok(Self {
            mesh_id: mesh.id(),
            values,
        })
    }

    pub fn constant(mesh: &DomainMesh, value: f64) -> Self {
        Self {
            mesh_id: mesh.id(),
            values: vec![value; mesh.vertex_count()],
        }
    }

    pub fn from_fn(mesh: &DomainMesh, f: impl Fn(Vec2) -> f64) -> Result<Self> {
        Self::new(mesh, mesh.vertices().iter().map(|&u| f(u)).collect())
    }

    pub fn mesh_id(&self) -> u64 {
        self.mesh_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Errors unless the field belongs to `mesh`.
    pub fn check_mesh(&self, mesh: &DomainMesh) -> Result<()> {
        if self.mesh_id != mesh.id() {
            return Err(Error::FieldMismatch(format!(
                "field is bound to mesh {}, not mesh {}",
                self.mesh_id,
                mesh.id()
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self, mesh: &DomainMesh) -> Result<String> {
        self.check_mesh(mesh)?;
        let mut out = String::from("vertex,x,y,value\n");
        for (i, (u, v)) in mesh.vertices().iter().zip(&self.values).enumerate() {
            writeln!(out, "{i},{},{},{}", u.x, u.y, v).unwrap();
        }
        Ok(out)
    }

    pub fn write_csv(&self, mesh: &DomainMesh, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv(mesh)?)?;
        Ok(())
    }

    /// Parses a CSV written by [`Self::to_csv`]; coordinates must match the
    /// mesh to `1e-9`.
    pub fn from_csv(mesh: &DomainMesh, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["vertex", "x", "y", "value"] {
            return Err(Error::Csv(format!(
                "expected header 'vertex,x,y,value', found '{header}'"
            )));
        }
        let mut values = vec![f64::NAN; mesh.vertex_count()];
        let mut seen = vec![false; mesh.vertex_count()];
        for (lineno, line) in lines.enumerate() {
            let row = lineno + 2;
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(Error::Csv(format!("line {row}: expected 4 columns")));
            }
            let idx: usize = parts[0]
                .parse()
                .map_err(|_| Error::Csv(format!("line {row}: bad vertex index '{}'", parts[0])))?;
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Csv(format!("line {row}: bad number '{s}'")))
            };
            let (x, y, v) = (num(parts[1])?, num(parts[2])?, num(parts[3])?);
            if idx >= values.len() {
                return Err(Error::Csv(format!("line {row}: vertex {idx} out of range")));
            }
            if seen[idx] {
                return Err(Error::Csv(format!("line {row}: vertex {idx} repeated")));
            }
            let u = mesh.vertices()[idx];
            if (u.x - x).abs() > 1e-9 || (u.y - y).abs() > 1e-9 {
                return Err(Error::Csv(format!(
                    "line {row}: coordinates of vertex {idx} do not match the mesh"
                )));
            }
            seen[idx] = true;
            values[idx] = v;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Csv(format!("vertex {i} missing")));
        }
        Self::new(mesh, values)
    }

    pub fn read_csv(mesh: &DomainMesh, path: &Path) -> Result<Self> {
        Self::from_csv(mesh, &std::fs::read_to_string(path)?)
    }
}
