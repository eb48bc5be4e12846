//! Grid sampling, branch-aware triangulation and text export.
//!
//! Branch cuts are rendered by dropping the grid cells that straddle them; no
//! vertical walls are generated. Multi-sheet meshes stack several sheets of
//! the same height function, each in its own OBJ group.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::diffops::{HeightFunction, ResidualReport};
use crate::energy::EnergyScan;
use crate::error::{Error, Result};
use crate::surface::{BranchPolicy, GrainAngle, HeightSample, Point, Rect, Scherk, DEFAULT_CORE_RADIUS};

/// Samples of one sheet on a regular grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightField {
    pub nx: usize,
    pub ny: usize,
    pub window: Rect,
    /// Row-major: node `(i, j)` is at index `j * nx + i`.
    pub samples: Vec<HeightSample>,
    pub sheet: i64,
    /// Height offset of this sheet relative to the principal one.
    pub sheet_offset: f64,
}

impl HeightField {
    pub fn sample(&self, i: usize, j: usize) -> &HeightSample {
        &self.samples[j * self.nx + i]
    }

    pub fn flagged(&self) -> usize {
        self.samples.iter().filter(|s| s.near_core).count()
    }
}

/// Sample `h` on an `nx` by `ny` grid.
///
/// Nodes within the default core radius of a singular point, or where the
/// height is undefined, are flagged and carry `z = NaN`.
pub fn sample_grid(h: &dyn HeightFunction, window: &Rect, nx: usize, ny: usize, b: BranchPolicy) -> Result<HeightField> {
    if nx < 2 || ny < 2 {
        return Err(Error::EmptyGrid);
    }
    let offset = b.offset(h.sheet_quantum());
    let rows: Vec<Result<Vec<HeightSample>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = window.y_node(j, ny);
            (0..nx)
                .map(|i| {
                    let point = Point::new(window.x_node(i, nx), y);
                    let flagged = HeightSample { point, z: f64::NAN, branch: b, near_core: true };
                    if h.core_distance(point) <= DEFAULT_CORE_RADIUS {
                        return Ok(flagged);
                    }
                    match h.value(point) {
                        Ok(z) if z.is_finite() => Ok(HeightSample { point, z: z + offset, branch: b, near_core: false }),
                        Ok(_) | Err(Error::CorePoint { .. }) | Err(Error::DerivativeUnavailable { .. }) => Ok(flagged),
                        Err(e) => Err(e),
                    }
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(nx * ny);
    for row in rows {
        samples.extend(row?);
    }
    if samples.iter().all(|s| s.near_core) {
        return Err(Error::EmptyGrid);
    }
    Ok(HeightField { nx, ny, window: *window, samples, sheet: b.sheet_index(), sheet_offset: offset })
}

/// Vertex and triangle ranges of one sheet inside a [`Mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SheetRange {
    pub sheet: i64,
    pub first_vertex: usize,
    pub vertices: usize,
    pub first_triangle: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub triangles: Vec<[usize; 3]>,
    pub sheets: Vec<SheetRange>,
    /// Grid cells left out because they straddle a branch cut or touch a core.
    pub dropped: usize,
}

impl Mesh {
    /// Append another mesh, shifting its indices.
    pub fn merge(&mut self, other: Mesh) {
        let (dv, dt) = (self.vertices.len(), self.triangles.len());
        self.vertices.extend(other.vertices);
        self.triangles.extend(other.triangles.into_iter().map(|t| [t[0] + dv, t[1] + dv, t[2] + dv]));
        self.sheets.extend(other.sheets.into_iter().map(|s| SheetRange {
            first_vertex: s.first_vertex + dv,
            first_triangle: s.first_triangle + dt,
            ..s
        }));
        self.dropped += other.dropped;
    }

    /// All indices in range and all coordinates finite.
    pub fn is_valid(&self) -> bool {
        let n = self.vertices.len();
        self.vertices.iter().all(|v| v.iter().all(|c| c.is_finite()))
            && self.triangles.iter().all(|t| t.iter().all(|&i| i < n))
    }
}

/// Two triangles per grid cell, except cells whose corner heights spread by
/// more than `jump_threshold` or that touch a flagged node.
///
/// Flagged nodes still get a vertex, placed at the sheet's base height, so the
/// vertex count is always `nx * ny`; no triangle references them.
pub fn triangulate(f: &HeightField, jump_threshold: f64) -> Mesh {
    let vertices: Vec<[f64; 3]> = f
        .samples
        .iter()
        .map(|s| [s.point.x, s.point.y, if s.near_core { f.sheet_offset } else { s.z }])
        .collect();
    let mut triangles = Vec::with_capacity(2 * (f.nx - 1) * (f.ny - 1));
    let mut dropped = 0;
    for j in 0..f.ny - 1 {
        for i in 0..f.nx - 1 {
            let idx = [j * f.nx + i, j * f.nx + i + 1, (j + 1) * f.nx + i + 1, (j + 1) * f.nx + i];
            let corners = idx.map(|k| &f.samples[k]);
            if corners.iter().any(|s| s.near_core) {
                dropped += 1;
                continue;
            }
            let lo = corners.iter().map(|s| s.z).fold(f64::INFINITY, f64::min);
            let hi = corners.iter().map(|s| s.z).fold(f64::NEG_INFINITY, f64::max);
            if hi - lo > jump_threshold {
                dropped += 1;
                continue;
            }
            triangles.push([idx[0], idx[1], idx[2]]);
            triangles.push([idx[0], idx[2], idx[3]]);
        }
    }
    let sheet = SheetRange {
        sheet: f.sheet,
        first_vertex: 0,
        vertices: vertices.len(),
        first_triangle: 0,
        triangles: triangles.len(),
    };
    Mesh { vertices, triangles, sheets: vec![sheet], dropped }
}

fn fixed(v: f64) -> String {
    let s = format!("{v:.9}");
    if s == "-0.000000000" {
        "0.000000000".to_string()
    } else {
        s
    }
}

/// Wavefront OBJ text: header comment, `v` lines, then one `g` group of `f`
/// lines per sheet with 1-based indices.
pub fn export_obj<W: Write>(m: &Mesh, mut out: W) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "# scherk mesh: {} vertices, {} triangles, {} dropped cells", m.vertices.len(), m.triangles.len(), m.dropped)
        .unwrap();
    for v in &m.vertices {
        writeln!(s, "v {} {} {}", fixed(v[0]), fixed(v[1]), fixed(v[2])).unwrap();
    }
    for sheet in &m.sheets {
        if sheet.triangles == 0 {
            continue;
        }
        writeln!(s, "g sheet_{}", sheet.sheet).unwrap();
        for t in &m.triangles[sheet.first_triangle..sheet.first_triangle + sheet.triangles] {
            writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_obj_file(m: &Mesh, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    export_obj(m, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Vertices and zero-based triangles read back from OBJ text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjData {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

pub fn parse_obj(text: &str) -> Result<ObjData> {
    let bad = |line: &str| Error::InvalidParameter(format!("malformed OBJ line: {line}"));
    let mut data = ObjData::default();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad(line))?;
                if c.len() != 3 {
                    return Err(bad(line));
                }
                data.vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let c: Vec<usize> = it
                    .map(|t| t.split('/').next().unwrap_or("").parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| bad(line))?;
                if c.len() != 3 || c.contains(&0) {
                    return Err(bad(line));
                }
                data.triangles.push([c[0] - 1, c[1] - 1, c[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(data)
}

/// Tabular payloads with a fixed column order.
pub trait CsvTable {
    fn header(&self) -> Vec<String>;
    fn rows(&self) -> Vec<Vec<String>>;
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `x, y, z, sheet, flagged`; flagged nodes have an empty `z`.
impl CsvTable for HeightField {
    fn header(&self) -> Vec<String> {
        ["x", "y", "z", "sheet", "flagged"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.samples
            .iter()
            .map(|s| {
                let z = if s.near_core { String::new() } else { num(s.z) };
                vec![num(s.point.x), num(s.point.y), z, self.sheet.to_string(), u8::from(s.near_core).to_string()]
            })
            .collect()
    }
}

/// Columns `<parameter>, energy`.
impl CsvTable for EnergyScan {
    fn header(&self) -> Vec<String> {
        vec![self.parameter.clone(), "energy".into()]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.values.iter().zip(&self.energies).map(|(v, e)| vec![num(*v), num(*e)]).collect()
    }
}

/// Columns `x, y, residual, excluded`; excluded nodes have an empty residual.
impl CsvTable for ResidualReport {
    fn header(&self) -> Vec<String> {
        ["x", "y", "residual", "excluded"].map(String::from).to_vec()
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.nodes
            .iter()
            .map(|n| {
                let r = n.residual.map(num).unwrap_or_default();
                vec![num(n.point.x), num(n.point.y), r, u8::from(n.excluded()).to_string()]
            })
            .collect()
    }
}

pub fn export_csv<T: CsvTable + ?Sized, W: Write>(table: &T, mut out: W) -> Result<()> {
    let mut s = table.header().join(",");
    s.push('\n');
    for row in table.rows() {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

/// Parameters of the stacked three-sheet rendering of Scherk's surface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure1Preset {
    pub alpha: f64,
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    pub sheets: Vec<i64>,
    pub jump_threshold: f64,
}

impl Default for Figure1Preset {
    fn default() -> Self {
        let g = GrainAngle::new(std::f64::consts::FRAC_PI_2).expect("right angle is valid");
        let ell = g.ell();
        Self {
            alpha: g.alpha(),
            window: Rect::new(-4.0, 4.0, -2.0 * ell, 2.0 * ell).expect("non-empty window"),
            nx: 97,
            ny: 97,
            sheets: vec![-1, 0, 1],
            jump_threshold: 0.5 * g.jump_quantum(),
        }
    }
}

/// Sample and triangulate every sheet of `scherk` and merge the results.
pub fn multi_sheet_mesh(
    scherk: &Scherk,
    window: &Rect,
    nx: usize,
    ny: usize,
    sheets: &[i64],
    jump_threshold: f64,
) -> Result<Mesh> {
    let mut mesh = Mesh::default();
    for &k in sheets {
        let field = sample_grid(scherk, window, nx, ny, BranchPolicy::Sheet(k))?;
        mesh.merge(triangulate(&field, jump_threshold));
    }
    Ok(mesh)
}

pub fn figure1_mesh(preset: &Figure1Preset) -> Result<Mesh> {
    let scherk = Scherk::from_alpha(preset.alpha)?;
    multi_sheet_mesh(&scherk, &preset.window, preset.nx, preset.ny, &preset.sheets, preset.jump_threshold)
}
