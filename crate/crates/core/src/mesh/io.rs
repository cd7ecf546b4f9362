//! OFF / OBJ mesh files with a JSON sidecar for multiplicities and tags.
//!
//! The sidecar lives next to the mesh with the extension replaced by
//! `.json` and has the shape
//! `{ "face_multiplicity": [..], "vertex_tags": { "junction": [..], "boundary": [..] } }`.
//! A missing sidecar means θ ≡ 1. Tags are always recomputed from
//! connectivity when a mesh is loaded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DiscreteVarifold, VertexTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_multiplicity: Option<Vec<i64>>,
    #[serde(default)]
    pub vertex_tags: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Ok(MeshFormat::Off),
            Some("obj") => Ok(MeshFormat::Obj),
            other => Err(Error::Parse(format!("unsupported mesh extension {other:?}"))),
        }
    }
}

pub fn sidecar_path(mesh: &Path) -> PathBuf {
    mesh.with_extension("json")
}

/// Geometry and connectivity as read from a mesh file.
pub struct RawMesh {
    pub dim: usize,
    pub vertices: Vec<f64>,
    pub faces: Vec<[usize; 3]>,
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace)
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, what: &str) -> Result<T> {
    let t = tok.ok_or_else(|| Error::Parse(format!("unexpected end of file reading {what}")))?;
    t.parse().map_err(|_| Error::Parse(format!("bad {what}: `{t}`")))
}

fn triangulate(poly: &[usize], faces: &mut Vec<[usize; 3]>) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::Parse(format!("polygon with {} vertices", poly.len())));
    }
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
    Ok(())
}

/// Parses `OFF` (ℝ³) or `nOFF` (dimension on the following token).
pub fn parse_off(text: &str) -> Result<RawMesh> {
    let mut it = tokens(text);
    let header = it.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    let dim = match header {
        "OFF" => 3,
        "nOFF" => parse(it.next(), "dimension")?,
        h => return Err(Error::Parse(format!("unknown OFF header `{h}`"))),
    };
    let nv: usize = parse(it.next(), "vertex count")?;
    let nf: usize = parse(it.next(), "face count")?;
    let _ne: usize = parse(it.next(), "edge count")?;
    let mut vertices = Vec::with_capacity(nv * dim);
    for _ in 0..nv * dim {
        vertices.push(parse::<f64>(it.next(), "coordinate")?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let k: usize = parse(it.next(), "face size")?;
        let poly = (0..k).map(|_| parse::<usize>(it.next(), "face index")).collect::<Result<Vec<_>>>()?;
        triangulate(&poly, &mut faces)?;
    }
    Ok(RawMesh { dim, vertices, faces })
}

/// Parses OBJ `v` and `f` records. Vertex lines may carry any fixed number
/// (≥ 3) of coordinates; texture/normal indices in faces are ignored.
pub fn parse_obj(text: &str) -> Result<RawMesh> {
    let mut dim = 0;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords = parts.map(|t| parse::<f64>(Some(t), "coordinate")).collect::<Result<Vec<_>>>()?;
                if dim == 0 {
                    dim = coords.len();
                } else if coords.len() != dim {
                    return Err(Error::Parse("OBJ vertices of mixed dimension".into()));
                }
                vertices.extend(coords);
            }
            Some("f") => {
                let nv = if dim == 0 { 0 } else { vertices.len() / dim } as i64;
                let poly = parts
                    .map(|t| {
                        let idx: i64 = parse(t.split('/').next(), "face index")?;
                        let i = if idx < 0 { nv + idx } else { idx - 1 };
                        if i < 0 {
                            return Err(Error::Parse(format!("bad OBJ index {idx}")));
                        }
                        Ok(i as usize)
                    })
                    .collect::<Result<Vec<_>>>()?;
                triangulate(&poly, &mut faces)?;
            }
            _ => {}
        }
    }
    Ok(RawMesh { dim: dim.max(3), vertices, faces })
}

pub fn format_off(mesh: &DiscreteVarifold) -> String {
    let mut s = String::new();
    if mesh.dim() == 3 {
        s.push_str("OFF\n");
    } else {
        let _ = writeln!(s, "nOFF\n{}", mesh.dim());
    }
    let _ = writeln!(s, "{} {} 0", mesh.num_vertices(), mesh.num_faces());
    for v in 0..mesh.num_vertices() {
        let line: Vec<String> = mesh.vertex(v).iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    for t in mesh.faces() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn format_obj(mesh: &DiscreteVarifold) -> String {
    let mut s = String::new();
    for v in 0..mesh.num_vertices() {
        let line: Vec<String> = mesh.vertex(v).iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(s, "v {}", line.join(" "));
    }
    for t in mesh.faces() {
        let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    s
}

pub fn sidecar_for(mesh: &DiscreteVarifold) -> Sidecar {
    let mut vertex_tags: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (v, tag) in mesh.tags().iter().enumerate() {
        let key = match tag {
            VertexTag::Interior => continue,
            VertexTag::Boundary => "boundary",
            VertexTag::Junction => "junction",
        };
        vertex_tags.entry(key.to_string()).or_default().push(v);
    }
    let uniform = mesh.multiplicity().iter().all(|&t| t == 1);
    Sidecar { face_multiplicity: (!uniform).then(|| mesh.multiplicity_i64()), vertex_tags }
}

/// Loads a mesh and its optional sidecar.
pub fn load(path: &Path) -> Result<DiscreteVarifold> {
    let text = fs::read_to_string(path)?;
    let raw = match MeshFormat::from_path(path)? {
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Obj => parse_obj(&text)?,
    };
    let side = sidecar_path(path);
    let multiplicity = if side.exists() {
        let sc: Sidecar = serde_json::from_str(&fs::read_to_string(&side)?)?;
        sc.face_multiplicity
    } else {
        None
    };
    DiscreteVarifold::build(raw.dim, raw.vertices, raw.faces, multiplicity)
}

/// Writes the mesh and its sidecar (always written, so stale sidecars are
/// replaced).
pub fn save(mesh: &DiscreteVarifold, path: &Path) -> Result<()> {
    let text = match MeshFormat::from_path(path)? {
        MeshFormat::Off => format_off(mesh),
        MeshFormat::Obj => format_obj(mesh),
    };
    fs::write(path, text)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar_for(mesh))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_quad_is_triangulated() {
        let raw = parse_off("OFF\n# square\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n").unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn noff_reads_dimension() {
        let raw = parse_off("nOFF 4\n3 1 0\n0 0 0 0\n1 0 0 1\n0 1 0 0\n3 0 1 2\n").unwrap();
        assert_eq!(raw.dim, 4);
        assert_eq!(raw.vertices.len(), 12);
    }

    #[test]
    fn obj_negative_and_slashed_indices() {
        let raw = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2//2 -1\n").unwrap();
        assert_eq!(raw.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn round_trip_with_multiplicity() {
        let dir = std::env::temp_dir().join(format!("varilab-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let m = DiscreteVarifold::build(
            4,
            vec![0., 0., 0., 0., 1., 0., 0., 0.5, 0., 1., 0., 0., 1., 1., 0., 0.25],
            vec![[0, 1, 2], [1, 3, 2]],
            Some(vec![2, 3]),
        )
        .unwrap();
        for name in ["m.off", "m.obj"] {
            let p = dir.join(name);
            save(&m, &p).unwrap();
            let back = load(&p).unwrap();
            assert_eq!(back.dim(), 4);
            assert_eq!(back.multiplicity(), m.multiplicity());
            assert_eq!(back.faces(), m.faces());
            assert_eq!(back.vertex_coords(), m.vertex_coords());
        }
        fs::remove_dir_all(&dir).ok();
    }
}
