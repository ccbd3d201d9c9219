use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::obj::parse_obj;
use super::validate::{validate_scene, ViolationCode};
use super::{starter_material, Clip, Material, Mesh, NoiseSource, Physics, Scene, SourceRegion};
use crate::bands::NUM_BANDS;
use crate::error::{Error, Result};
use crate::geometry::{Aabb, Triangle, Vec3};

/// Scattering used when a config material gives absorption but no scattering.
const DEFAULT_SCATTERING: f64 = 0.1;

/// On-disk scene description (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub mesh: MeshDocument,
    pub air: Vec<Aabb>,
    pub materials: Vec<MaterialEntry>,
    #[serde(default)]
    pub sources: Vec<SourceRegion>,
    #[serde(default)]
    pub noise: Vec<NoiseSource>,
    #[serde(default)]
    pub listener_boxes: Vec<Aabb>,
    #[serde(default)]
    pub physics: Physics,
}

/// Either an OBJ file with a group-to-material map, or inline triangles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    /// OBJ path relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obj: Option<String>,
    /// OBJ `usemtl` name to scene material name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, String>,
    /// Material for OBJ faces without a mapped `usemtl`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_material: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triangles: Vec<InlineTriangle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineTriangle {
    pub v: [Vec3; 3],
    pub material: String,
}

/// A material; a bare name picks up the starter-set values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption: Option<[f64; NUM_BANDS]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scattering: Option<[f64; NUM_BANDS]>,
}

/// Reads, resolves and validates a scene config file.
pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let scene = load_scene_unchecked(path)?;
    check(&scene)?;
    Ok(scene)
}

/// Reads and resolves a scene config without running [`validate_scene`], so
/// every problem can be listed at once.
pub fn load_scene_unchecked(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    if !path.is_file() {
        return Err(Error::ConfigNotFound(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_document(&text, &path.display().to_string())?.build(&base)
}

/// Parses config text; relative mesh and clip paths resolve against `base_dir`.
pub fn load_scene_str(text: &str, origin: &str, base_dir: &Path) -> Result<Scene> {
    parse_document(text, origin)?.resolve(base_dir)
}

fn parse_document(text: &str, origin: &str) -> Result<SceneDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse { path: origin.to_string(), message: e.to_string() })
}

fn resolve_path(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl SceneDocument {
    /// Builds and validates the scene.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scene> {
        let scene = self.build(base_dir)?;
        check(&scene)?;
        Ok(scene)
    }

    /// Builds the scene, resolving materials, mesh and clips, without validation.
    pub fn build(&self, base_dir: &Path) -> Result<Scene> {
        let materials = self
            .materials
            .iter()
            .enumerate()
            .map(|(i, m)| resolve_material(m, i))
            .collect::<Result<Vec<_>>>()?;
        let lookup = |name: &str, element: String| {
            materials
                .iter()
                .position(|m| m.name == name)
                .ok_or_else(|| Error::DanglingMaterial { name: name.to_string(), element })
        };

        let mut mesh = Mesh::default();
        match (&self.mesh.obj, self.mesh.triangles.is_empty()) {
            (Some(_), false) => {
                return Err(Error::InvalidScene("mesh: give either `obj` or `triangles`, not both".into()));
            }
            (Some(rel), true) => {
                let file = resolve_path(base_dir, rel);
                if !file.is_file() {
                    return Err(Error::ConfigNotFound(file));
                }
                let obj = parse_obj(&std::fs::read_to_string(&file)?, &file.display().to_string())?;
                for (i, (f, group)) in obj.faces.iter().enumerate() {
                    let name = group
                        .as_ref()
                        .map(|g| self.mesh.materials.get(g).unwrap_or(g))
                        .or(self.mesh.default_material.as_ref())
                        .ok_or_else(|| Error::InvalidScene(format!("{rel}: face {i} has no material and no default_material is set")))?;
                    let material = lookup(name, format!("{rel} face {i}"))?;
                    mesh.push(Triangle::new(obj.vertices[f[0]], obj.vertices[f[1]], obj.vertices[f[2]]), material);
                }
            }
            (None, _) => {
                for (i, t) in self.mesh.triangles.iter().enumerate() {
                    let material = lookup(&t.material, format!("mesh.triangles[{i}]"))?;
                    mesh.push(Triangle::new(t.v[0], t.v[1], t.v[2]), material);
                }
            }
        }

        let mut clips = BTreeMap::new();
        for s in &self.sources {
            if let Some(rel) = &s.clip {
                if !clips.contains_key(rel) {
                    let audio = crate::io::read_wav_mono(resolve_path(base_dir, rel))?;
                    let samples = crate::dsp::resample(&audio.samples, audio.sample_rate, self.physics.sample_rate);
                    clips.insert(rel.clone(), Clip { samples, sample_rate: self.physics.sample_rate });
                }
            }
        }

        let scene = Scene {
            mesh,
            air: self.air.clone(),
            materials,
            sources: self.sources.clone(),
            noise: self.noise.clone(),
            listener_boxes: self.listener_boxes.clone(),
            physics: self.physics.clone(),
            clips,
        };
        Ok(scene)
    }
}

fn resolve_material(m: &MaterialEntry, i: usize) -> Result<Material> {
    let starter = starter_material(&m.name);
    let absorption = m.absorption.or(starter.as_ref().map(|s| s.absorption)).ok_or_else(|| {
        Error::InvalidScene(format!("materials[{i}]: `{}` has no absorption and is not a starter material", m.name))
    })?;
    let scattering = m
        .scattering
        .or(starter.as_ref().map(|s| s.scattering))
        .unwrap_or([DEFAULT_SCATTERING; NUM_BANDS]);
    Ok(Material::new(m.name.clone(), absorption, scattering))
}

/// Turns the first violation into an error of the matching class.
fn check(scene: &Scene) -> Result<()> {
    let violations = validate_scene(scene);
    let Some(first) = violations.first() else {
        return Ok(());
    };
    Err(match first.code {
        ViolationCode::BoxOutsideAir | ViolationCode::SourceOutsideAir | ViolationCode::NoiseOutsideAir => {
            Error::OutsideAir { element: first.element.clone() }
        }
        _ => Error::InvalidScene(violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")),
    })
}

impl Scene {
    /// Self-contained document (inline mesh, explicit material values) that
    /// loads back to an equal scene.
    pub fn to_document(&self) -> SceneDocument {
        let name = |id: usize| self.materials.get(id).map(|m| m.name.clone()).unwrap_or_else(|| format!("#{id}"));
        SceneDocument {
            mesh: MeshDocument {
                triangles: self
                    .mesh
                    .triangles
                    .iter()
                    .map(|t| InlineTriangle { v: t.triangle.v, material: name(t.material) })
                    .collect(),
                ..Default::default()
            },
            air: self.air.clone(),
            materials: self
                .materials
                .iter()
                .map(|m| MaterialEntry { name: m.name.clone(), absorption: Some(m.absorption), scattering: Some(m.scattering) })
                .collect(),
            sources: self.sources.clone(),
            noise: self.noise.clone(),
            listener_boxes: self.listener_boxes.clone(),
            physics: self.physics.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("scene documents always serialize")
    }

    /// Short stable fingerprint of the scene content (FNV-1a over its JSON).
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_json().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}
