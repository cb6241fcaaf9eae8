//! Neutral FEM exchange deck.
//!
//! The deck is UTF-8 text made of keyword lines and data lines:
//!
//! ```text
//! ** comment
//! *KEYWORD, key=value, key=value
//! data line
//! ```
//!
//! Keywords, in emission order:
//!
//! | keyword        | parameters                                                  | data lines            |
//! |----------------|-------------------------------------------------------------|-----------------------|
//! | `*DECK`        | `version`                                                   | none                  |
//! | `*HEADING`     |                                                             | one line of text      |
//! | `*GEOMETRY`    | `format=json`                                               | one line, spec JSON   |
//! | `*MATERIAL`    | `name`, `kind`, model coefficients, `fibre_radius`, `halved` | none                  |
//! | `*SURFACE`     | `tag`, `kind` (`cap_base`, `outer`, `chamber_wall`), `chamber` | none               |
//! | `*SOLID`       | `name`, `material`, `element`                               | none                  |
//! | `*LAYER`       | `name`, `material`, `element`, `y_bottom`, `thickness`      | none                  |
//! | `*RIGID`       | `name`, `material`                                          | none                  |
//! | `*FIBRE`       | `name`, `material`, `element`, `style`, `turns`, `chirality`, `chamber` | `x, y, z` per point |
//! | `*TIE`/`*MERGE`| `primary`, `secondary`                                      | none                  |
//! | `*ENCASTRE`    | `surface`                                                   | none                  |
//! | `*AMPLITUDE`   | `name`, `kind`                                              | `xi, a` per point     |
//! | `*STEP`        | `name`, `period`                                            | none                  |
//! | `*PRESSURE`    | `surface`, `magnitude_kpa`, `amplitude`                     | none                  |
//! | `*END STEP`    |                                                             | none                  |
//!
//! Numbers are written in their shortest round-trip decimal form, so
//! parsing a serialized deck reproduces it exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fiberpath::{FiberPath, HelixStyle, Point3};
use crate::geometry::{ActuatorSpec, Chirality};
use crate::materials::{
    HyperelasticModel, MaterialEntry, MaterialError, MaterialLibrary, ECOFLEX_00_50, FIBERGLASS_LAYER, KEVLAR,
};
use crate::postprocess::{PostprocessError, PressureSchedule};

pub const DECK_VERSION: u32 = 1;
pub const SOLID_ELEMENT: &str = "tet10_hybrid";
pub const FIBRE_ELEMENT: &str = "beam3_quadratic";
pub const CAP_BASE: &str = "CAP_BASE";

#[derive(Debug, Error, PartialEq)]
pub enum ExportError {
    #[error("amplitude argument {0} outside [0, 1]")]
    AmplitudeDomain(f64),
    #[error("surface tag '{0}' is referenced but not defined")]
    UnresolvedSurface(String),
    #[error("region '{0}' is referenced but not defined")]
    UnresolvedRegion(String),
    #[error("material '{0}' is referenced but not defined")]
    UnresolvedMaterial(String),
    #[error("deck needs exactly one encastre, found {0}")]
    EncastreCount(usize),
    #[error("invalid deck: {0}")]
    Invalid(String),
    #[error("line {line}: {detail}")]
    Parse { line: usize, detail: String },
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Schedule(#[from] PostprocessError),
}

/// Quintic smooth step: zero slope and curvature at both ends.
pub fn smooth_amplitude(xi: f64) -> Result<f64, ExportError> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(ExportError::AmplitudeDomain(xi));
    }
    Ok(xi * xi * xi * (10.0 - 15.0 * xi + 6.0 * xi * xi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    CapBase,
    Outer,
    ChamberWall { chamber: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTag {
    pub tag: String,
    pub kind: SurfaceKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolidGroup {
    pub name: String,
    pub material: String,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGroup {
    pub name: String,
    pub material: String,
    pub element: String,
    pub y_bottom: f64,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidInclusion {
    pub name: String,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FibreSet {
    pub name: String,
    pub material: String,
    pub element: String,
    pub style: HelixStyle,
    pub turns: u32,
    pub chirality: Chirality,
    pub chamber: usize,
    pub points: Vec<Point3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    /// Nodes of the secondary region follow the primary region.
    Tie,
    /// Shared nodes on the common interface.
    Merge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub primary: String,
    pub secondary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Amplitude {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureLoad {
    pub surface: String,
    pub magnitude_kpa: f64,
    pub amplitude: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemDeck {
    pub version: u32,
    pub heading: String,
    pub geometry: ActuatorSpec,
    pub materials: BTreeMap<String, MaterialEntry>,
    pub surfaces: Vec<SurfaceTag>,
    pub solids: Vec<SolidGroup>,
    pub layers: Vec<LayerGroup>,
    pub rigids: Vec<RigidInclusion>,
    pub fibres: Vec<FibreSet>,
    pub constraints: Vec<Constraint>,
    pub encastre: Vec<String>,
    pub amplitude: Amplitude,
    pub step_period: f64,
    pub loads: Vec<PressureLoad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeckOptions {
    pub silicone: String,
    pub fibre_material: String,
    /// Points used to tabulate the amplitude curve.
    pub amplitude_samples: usize,
}

impl Default for DeckOptions {
    fn default() -> Self {
        Self { silicone: ECOFLEX_00_50.into(), fibre_material: KEVLAR.into(), amplitude_samples: 21 }
    }
}

pub fn emit_deck(
    spec: &ActuatorSpec,
    paths: &[FiberPath],
    materials: &MaterialLibrary,
    schedule: &PressureSchedule,
    opts: &DeckOptions,
) -> Result<FemDeck, ExportError> {
    let levels = schedule.levels()?;
    let (t0, t1) = schedule.span();
    let peak = levels.iter().cloned().fold(0.0, f64::max);
    if opts.amplitude_samples < 2 {
        return Err(ExportError::Invalid("amplitude needs at least two samples".into()));
    }

    let mut used = vec![opts.silicone.clone()];
    let mut surfaces = vec![
        SurfaceTag { tag: CAP_BASE.into(), kind: SurfaceKind::CapBase },
        SurfaceTag { tag: "OUTER".into(), kind: SurfaceKind::Outer },
    ];
    let mut loads = Vec::new();
    for k in 0..spec.chambers.len() {
        let tag = format!("CHAMBER_{}_WALL", k + 1);
        surfaces.push(SurfaceTag { tag: tag.clone(), kind: SurfaceKind::ChamberWall { chamber: k } });
        loads.push(PressureLoad { surface: tag, magnitude_kpa: peak, amplitude: "SMOOTH".into() });
    }
    let solids =
        vec![SolidGroup { name: "BODY".into(), material: opts.silicone.clone(), element: SOLID_ELEMENT.into() }];
    let mut constraints = Vec::new();
    let mut layers = Vec::new();
    if let Some(l) = &spec.inextensible_layer {
        used.push(FIBERGLASS_LAYER.into());
        layers.push(LayerGroup {
            name: "LAYER".into(),
            material: FIBERGLASS_LAYER.into(),
            element: SOLID_ELEMENT.into(),
            y_bottom: l.y_bottom,
            thickness: l.thickness,
        });
        constraints.push(Constraint { kind: ConstraintKind::Merge, primary: "BODY".into(), secondary: "LAYER".into() });
    }
    let mut solids = solids;
    let mut rigids = Vec::new();
    if let Some(dc) = &spec.device {
        used.push(dc.device.body_material.clone());
        solids.push(SolidGroup {
            name: "DEVICE_BODY".into(),
            material: dc.device.body_material.clone(),
            element: SOLID_ELEMENT.into(),
        });
        constraints.push(Constraint {
            kind: ConstraintKind::Merge,
            primary: "DEVICE_BODY".into(),
            secondary: "BODY".into(),
        });
        if let (true, Some(p)) = (dc.payload_active, &dc.device.embedded_payload) {
            used.push(p.material.clone());
            rigids.push(RigidInclusion { name: "PAYLOAD".into(), material: p.material.clone() });
            constraints.push(Constraint {
                kind: ConstraintKind::Tie,
                primary: "DEVICE_BODY".into(),
                secondary: "PAYLOAD".into(),
            });
        }
    }
    let mut fibres = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        let name = format!("FIBRE_{}", i + 1);
        constraints.push(Constraint { kind: ConstraintKind::Tie, primary: "BODY".into(), secondary: name.clone() });
        fibres.push(FibreSet {
            name,
            material: opts.fibre_material.clone(),
            element: FIBRE_ELEMENT.into(),
            style: p.style,
            turns: p.turns,
            chirality: p.chirality,
            chamber: p.chamber,
            points: p.points.clone(),
        });
    }
    if !paths.is_empty() {
        used.push(opts.fibre_material.clone());
    }
    let mut mats = BTreeMap::new();
    for m in used {
        mats.insert(m.clone(), materials.entry(&m)?.clone());
    }
    let n = opts.amplitude_samples;
    let amplitude = Amplitude {
        name: "SMOOTH".into(),
        points: (0..n)
            .map(|i| {
                let xi = i as f64 / (n - 1) as f64;
                smooth_amplitude(xi).map(|a| (xi, a))
            })
            .collect::<Result<_, _>>()?,
    };
    let deck = FemDeck {
        version: DECK_VERSION,
        heading: format!("softbend {} actuator deck", crate::VERSION),
        geometry: spec.clone(),
        materials: mats,
        surfaces,
        solids,
        layers,
        rigids,
        fibres,
        constraints,
        encastre: vec![CAP_BASE.into()],
        amplitude,
        step_period: t1 - t0,
        loads,
    };
    deck.validate()?;
    Ok(deck)
}

impl FemDeck {
    pub fn validate(&self) -> Result<(), ExportError> {
        if self.version != DECK_VERSION {
            return Err(ExportError::Invalid(format!("unsupported deck version {}", self.version)));
        }
        let tags: Vec<&str> = self.surfaces.iter().map(|s| s.tag.as_str()).collect();
        let has_tag = |t: &str| tags.contains(&t);
        if self.encastre.len() != 1 {
            return Err(ExportError::EncastreCount(self.encastre.len()));
        }
        for t in self.encastre.iter().chain(self.loads.iter().map(|l| &l.surface)) {
            if !has_tag(t) {
                return Err(ExportError::UnresolvedSurface(t.clone()));
            }
        }
        let regions: Vec<&str> = self
            .solids
            .iter()
            .map(|s| s.name.as_str())
            .chain(self.layers.iter().map(|l| l.name.as_str()))
            .chain(self.rigids.iter().map(|r| r.name.as_str()))
            .chain(self.fibres.iter().map(|f| f.name.as_str()))
            .collect();
        for c in &self.constraints {
            for r in [&c.primary, &c.secondary] {
                if !regions.contains(&r.as_str()) {
                    return Err(ExportError::UnresolvedRegion(r.clone()));
                }
            }
        }
        let mats = self
            .solids
            .iter()
            .map(|s| &s.material)
            .chain(self.layers.iter().map(|l| &l.material))
            .chain(self.rigids.iter().map(|r| &r.material))
            .chain(self.fibres.iter().map(|f| &f.material));
        for m in mats {
            if !self.materials.contains_key(m) {
                return Err(ExportError::UnresolvedMaterial(m.clone()));
            }
        }
        for l in &self.loads {
            if l.amplitude != self.amplitude.name {
                return Err(ExportError::Invalid(format!("load references unknown amplitude '{}'", l.amplitude)));
            }
        }
        let a = &self.amplitude.points;
        let ok = a.len() >= 2
            && a[0] == (0.0, 0.0)
            && a[a.len() - 1] == (1.0, 1.0)
            && a.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 >= w[0].1);
        if !ok {
            return Err(ExportError::Invalid("amplitude must rise monotonically from (0, 0) to (1, 1)".into()));
        }
        if self.fibres.iter().any(|f| f.points.len() < 2) {
            return Err(ExportError::Invalid("fibre sets need at least two points".into()));
        }
        if !(self.step_period > 0.0) {
            return Err(ExportError::Invalid("step period must be positive".into()));
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "*DECK, version={}", self.version);
        let _ = writeln!(s, "*HEADING\n{}", self.heading);
        let _ =
            writeln!(s, "*GEOMETRY, format=json\n{}", serde_json::to_string(&self.geometry).expect("spec serialises"));
        for (name, m) in &self.materials {
            let _ = write!(s, "*MATERIAL, name={name}");
            match m.model {
                HyperelasticModel::MooneyRivlin { c10, c01, d1 } => {
                    let _ = write!(s, ", kind=mooney_rivlin, c10={c10}, c01={c01}");
                    if let Some(d) = d1 {
                        let _ = write!(s, ", d1={d}");
                    }
                }
                HyperelasticModel::Yeoh1 { c10 } => {
                    let _ = write!(s, ", kind=yeoh1, c10={c10}");
                }
                HyperelasticModel::LinearElastic { e, nu } => {
                    let _ = write!(s, ", kind=linear_elastic, e={e}, nu={nu}");
                }
            }
            if let Some(r) = m.fibre_radius {
                let _ = write!(s, ", fibre_radius={r}");
            }
            let _ = writeln!(s, ", halved={}", m.halved_radius);
        }
        for t in &self.surfaces {
            match t.kind {
                SurfaceKind::CapBase => writeln!(s, "*SURFACE, tag={}, kind=cap_base", t.tag),
                SurfaceKind::Outer => writeln!(s, "*SURFACE, tag={}, kind=outer", t.tag),
                SurfaceKind::ChamberWall { chamber } => {
                    writeln!(s, "*SURFACE, tag={}, kind=chamber_wall, chamber={chamber}", t.tag)
                }
            }
            .expect("write to string");
        }
        for g in &self.solids {
            let _ = writeln!(s, "*SOLID, name={}, material={}, element={}", g.name, g.material, g.element);
        }
        for l in &self.layers {
            let _ = writeln!(
                s,
                "*LAYER, name={}, material={}, element={}, y_bottom={}, thickness={}",
                l.name, l.material, l.element, l.y_bottom, l.thickness
            );
        }
        for r in &self.rigids {
            let _ = writeln!(s, "*RIGID, name={}, material={}", r.name, r.material);
        }
        for f in &self.fibres {
            let _ = writeln!(
                s,
                "*FIBRE, name={}, material={}, element={}, style={}, turns={}, chirality={}, chamber={}",
                f.name, f.material, f.element, f.style, f.turns, f.chirality, f.chamber
            );
            for p in &f.points {
                let _ = writeln!(s, "{}, {}, {}", p[0], p[1], p[2]);
            }
        }
        for c in &self.constraints {
            let kw = match c.kind {
                ConstraintKind::Tie => "TIE",
                ConstraintKind::Merge => "MERGE",
            };
            let _ = writeln!(s, "*{kw}, primary={}, secondary={}", c.primary, c.secondary);
        }
        for e in &self.encastre {
            let _ = writeln!(s, "*ENCASTRE, surface={e}");
        }
        let _ = writeln!(s, "*AMPLITUDE, name={}, kind=smooth_step", self.amplitude.name);
        for (x, a) in &self.amplitude.points {
            let _ = writeln!(s, "{x}, {a}");
        }
        let _ = writeln!(s, "*STEP, name=INFLATE, period={}", self.step_period);
        for l in &self.loads {
            let _ = writeln!(
                s,
                "*PRESSURE, surface={}, magnitude_kpa={}, amplitude={}",
                l.surface, l.magnitude_kpa, l.amplitude
            );
        }
        s.push_str("*END STEP\n");
        s
    }

    pub fn parse(text: &str) -> Result<FemDeck, ExportError> {
        Parser::default().run(text)
    }
}

type Params = BTreeMap<String, String>;

enum Block {
    None,
    Heading,
    Geometry,
    Fibre,
    Amplitude,
}

struct Parser {
    line: usize,
    block: Block,
    version: Option<u32>,
    heading: Option<String>,
    geometry: Option<ActuatorSpec>,
    materials: BTreeMap<String, MaterialEntry>,
    surfaces: Vec<SurfaceTag>,
    solids: Vec<SolidGroup>,
    layers: Vec<LayerGroup>,
    rigids: Vec<RigidInclusion>,
    fibres: Vec<FibreSet>,
    constraints: Vec<Constraint>,
    encastre: Vec<String>,
    amplitude: Option<Amplitude>,
    step_period: Option<f64>,
    in_step: bool,
    step_closed: bool,
    loads: Vec<PressureLoad>,
}

impl Default for Parser {
    fn default() -> Self {
        Self {
            line: 0,
            block: Block::None,
            version: None,
            heading: None,
            geometry: None,
            materials: BTreeMap::new(),
            surfaces: Vec::new(),
            solids: Vec::new(),
            layers: Vec::new(),
            rigids: Vec::new(),
            fibres: Vec::new(),
            constraints: Vec::new(),
            encastre: Vec::new(),
            amplitude: None,
            step_period: None,
            in_step: false,
            step_closed: false,
            loads: Vec::new(),
        }
    }
}

impl Parser {
    fn err(&self, detail: impl Into<String>) -> ExportError {
        ExportError::Parse { line: self.line, detail: detail.into() }
    }

    fn take(&self, p: &mut Params, key: &str) -> Result<String, ExportError> {
        p.remove(key).ok_or_else(|| self.err(format!("missing parameter '{key}'")))
    }

    fn num<T: std::str::FromStr>(&self, p: &mut Params, key: &str) -> Result<T, ExportError> {
        let v = self.take(p, key)?;
        v.parse().map_err(|_| self.err(format!("bad value '{v}' for '{key}'")))
    }

    fn done(&self, p: Params) -> Result<(), ExportError> {
        match p.keys().next() {
            Some(k) => Err(self.err(format!("unknown parameter '{k}'"))),
            None => Ok(()),
        }
    }

    fn floats(&self, line: &str, n: usize) -> Result<Vec<f64>, ExportError> {
        let v: Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        match v {
            Ok(v) if v.len() == n => Ok(v),
            _ => Err(self.err(format!("expected {n} numbers"))),
        }
    }

    fn run(mut self, text: &str) -> Result<FemDeck, ExportError> {
        for (i, raw) in text.lines().enumerate() {
            self.line = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with("**") {
                continue;
            }
            if let Some(kw) = line.strip_prefix('*') {
                self.keyword(kw)?;
            } else {
                self.data(line)?;
            }
        }
        let missing = |what: &str| ExportError::Invalid(format!("deck has no {what}"));
        if !self.step_closed {
            return Err(missing("closed step"));
        }
        let deck = FemDeck {
            version: self.version.ok_or_else(|| missing("*DECK header"))?,
            heading: self.heading.unwrap_or_default(),
            geometry: self.geometry.ok_or_else(|| missing("geometry"))?,
            materials: self.materials,
            surfaces: self.surfaces,
            solids: self.solids,
            layers: self.layers,
            rigids: self.rigids,
            fibres: self.fibres,
            constraints: self.constraints,
            encastre: self.encastre,
            amplitude: self.amplitude.ok_or_else(|| missing("amplitude"))?,
            step_period: self.step_period.ok_or_else(|| missing("step"))?,
            loads: self.loads,
        };
        deck.validate()?;
        Ok(deck)
    }

    fn data(&mut self, line: &str) -> Result<(), ExportError> {
        match self.block {
            Block::Heading => {
                self.heading = Some(line.to_string());
                self.block = Block::None;
            }
            Block::Geometry => {
                self.geometry = Some(serde_json::from_str(line).map_err(|e| self.err(format!("geometry: {e}")))?);
                self.block = Block::None;
            }
            Block::Fibre => {
                let v = self.floats(line, 3)?;
                self.fibres.last_mut().expect("fibre block").points.push([v[0], v[1], v[2]]);
            }
            Block::Amplitude => {
                let v = self.floats(line, 2)?;
                self.amplitude.as_mut().expect("amplitude block").points.push((v[0], v[1]));
            }
            Block::None => return Err(self.err("data line outside a data block")),
        }
        Ok(())
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ExportError> {
        let mut parts = kw.split(',');
        let name = parts.next().unwrap_or("").trim().to_ascii_uppercase();
        let mut p = Params::new();
        for part in parts {
            let (k, v) =
                part.split_once('=').ok_or_else(|| self.err(format!("parameter '{}' lacks '='", part.trim())))?;
            if p.insert(k.trim().to_ascii_lowercase(), v.trim().to_string()).is_some() {
                return Err(self.err(format!("parameter '{}' repeated", k.trim())));
            }
        }
        if self.version.is_none() && name != "DECK" {
            return Err(self.err("deck must start with *DECK"));
        }
        if self.step_closed {
            return Err(self.err("keyword after *END STEP"));
        }
        self.block = Block::None;
        match name.as_str() {
            "DECK" => {
                let v: u32 = self.num(&mut p, "version")?;
                if v != DECK_VERSION {
                    return Err(self.err(format!("unsupported deck version {v}")));
                }
                self.version = Some(v);
            }
            "HEADING" => self.block = Block::Heading,
            "GEOMETRY" => {
                let f = self.take(&mut p, "format")?;
                if f != "json" {
                    return Err(self.err(format!("unsupported geometry format '{f}'")));
                }
                self.block = Block::Geometry;
            }
            "MATERIAL" => {
                let name = self.take(&mut p, "name")?;
                let kind = self.take(&mut p, "kind")?;
                let model = match kind.as_str() {
                    "mooney_rivlin" => HyperelasticModel::MooneyRivlin {
                        c10: self.num(&mut p, "c10")?,
                        c01: self.num(&mut p, "c01")?,
                        d1: if p.contains_key("d1") { Some(self.num(&mut p, "d1")?) } else { None },
                    },
                    "yeoh1" => HyperelasticModel::Yeoh1 { c10: self.num(&mut p, "c10")? },
                    "linear_elastic" => {
                        HyperelasticModel::LinearElastic { e: self.num(&mut p, "e")?, nu: self.num(&mut p, "nu")? }
                    }
                    other => return Err(self.err(format!("unknown material kind '{other}'"))),
                };
                let fibre_radius =
                    if p.contains_key("fibre_radius") { Some(self.num(&mut p, "fibre_radius")?) } else { None };
                let halved_radius = self.num(&mut p, "halved")?;
                self.materials.insert(name, MaterialEntry { model, fibre_radius, halved_radius });
            }
            "SURFACE" => {
                let tag = self.take(&mut p, "tag")?;
                let kind = match self.take(&mut p, "kind")?.as_str() {
                    "cap_base" => SurfaceKind::CapBase,
                    "outer" => SurfaceKind::Outer,
                    "chamber_wall" => SurfaceKind::ChamberWall { chamber: self.num(&mut p, "chamber")? },
                    other => return Err(self.err(format!("unknown surface kind '{other}'"))),
                };
                self.surfaces.push(SurfaceTag { tag, kind });
            }
            "SOLID" => self.solids.push(SolidGroup {
                name: self.take(&mut p, "name")?,
                material: self.take(&mut p, "material")?,
                element: self.take(&mut p, "element")?,
            }),
            "LAYER" => self.layers.push(LayerGroup {
                name: self.take(&mut p, "name")?,
                material: self.take(&mut p, "material")?,
                element: self.take(&mut p, "element")?,
                y_bottom: self.num(&mut p, "y_bottom")?,
                thickness: self.num(&mut p, "thickness")?,
            }),
            "RIGID" => self
                .rigids
                .push(RigidInclusion { name: self.take(&mut p, "name")?, material: self.take(&mut p, "material")? }),
            "FIBRE" => {
                let f = FibreSet {
                    name: self.take(&mut p, "name")?,
                    material: self.take(&mut p, "material")?,
                    element: self.take(&mut p, "element")?,
                    style: self.num(&mut p, "style")?,
                    turns: self.num(&mut p, "turns")?,
                    chirality: self.num(&mut p, "chirality")?,
                    chamber: self.num(&mut p, "chamber")?,
                    points: Vec::new(),
                };
                self.fibres.push(f);
                self.block = Block::Fibre;
            }
            "TIE" | "MERGE" => self.constraints.push(Constraint {
                kind: if name == "TIE" { ConstraintKind::Tie } else { ConstraintKind::Merge },
                primary: self.take(&mut p, "primary")?,
                secondary: self.take(&mut p, "secondary")?,
            }),
            "ENCASTRE" => self.encastre.push(self.take(&mut p, "surface")?),
            "AMPLITUDE" => {
                if self.amplitude.is_some() {
                    return Err(self.err("only one amplitude is supported"));
                }
                let name = self.take(&mut p, "name")?;
                let kind = self.take(&mut p, "kind")?;
                if kind != "smooth_step" {
                    return Err(self.err(format!("unknown amplitude kind '{kind}'")));
                }
                self.amplitude = Some(Amplitude { name, points: Vec::new() });
                self.block = Block::Amplitude;
            }
            "STEP" => {
                if self.step_period.is_some() {
                    return Err(self.err("only one step is supported"));
                }
                let _ = self.take(&mut p, "name")?;
                self.step_period = Some(self.num(&mut p, "period")?);
                self.in_step = true;
            }
            "PRESSURE" => {
                if !self.in_step {
                    return Err(self.err("*PRESSURE outside a step"));
                }
                self.loads.push(PressureLoad {
                    surface: self.take(&mut p, "surface")?,
                    magnitude_kpa: self.num(&mut p, "magnitude_kpa")?,
                    amplitude: self.take(&mut p, "amplitude")?,
                });
            }
            "END STEP" => {
                if !self.in_step {
                    return Err(self.err("*END STEP without *STEP"));
                }
                self.in_step = false;
                self.step_closed = true;
            }
            other => return Err(self.err(format!("unknown keyword '*{other}'"))),
        }
        self.done(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiberpath::{generate_helix, WindingSpec};
    use crate::geometry::{build_geometry_a, build_geometry_b, DeviceSpec, GeometryAParams, GeometryBParams};
    use crate::mechanics::compose_device;

    fn ramp() -> PressureSchedule {
        PressureSchedule::Proportional { t_end: 1.0, p_max: 100.0, samples: 11 }
    }

    fn deck_a(style: HelixStyle) -> FemDeck {
        let spec = build_geometry_a(&GeometryAParams::default()).unwrap();
        let path = generate_helix(&spec, &WindingSpec::for_spec(&spec, style, 100)).unwrap();
        emit_deck(&spec, &[path], &MaterialLibrary::default(), &ramp(), &DeckOptions::default()).unwrap()
    }

    #[test]
    fn amplitude_shape() {
        assert_eq!(smooth_amplitude(0.0).unwrap(), 0.0);
        assert_eq!(smooth_amplitude(1.0).unwrap(), 1.0);
        assert_eq!(smooth_amplitude(0.5).unwrap(), 0.5);
        let h = 1e-6;
        assert!(((smooth_amplitude(h).unwrap() - 0.0) / h).abs() < 1e-8);
        assert!(((1.0 - smooth_amplitude(1.0 - h).unwrap()) / h).abs() < 1e-8);
        assert_eq!(smooth_amplitude(1.5), Err(ExportError::AmplitudeDomain(1.5)));
        assert!(smooth_amplitude(-0.1).is_err());
    }

    #[test]
    fn structure_for_geometry_a() {
        let d = deck_a(HelixStyle::Sh);
        assert_eq!(d.solids.len(), 1);
        assert_eq!(d.fibres.len(), 1);
        assert_eq!(d.encastre.len(), 1);
        assert_eq!(d.loads.len(), 1);
        assert_eq!(d.loads[0].magnitude_kpa, 100.0);
        assert_eq!(d.layers.len(), 1);
        assert!(d.constraints.iter().any(|c| c.kind == ConstraintKind::Tie && c.secondary == "FIBRE_1"));
    }

    #[test]
    fn round_trip_and_determinism() {
        for style in [HelixStyle::Sh, HelixStyle::Dh] {
            let d = deck_a(style);
            let text = d.serialize();
            assert_eq!(text, deck_a(style).serialize());
            assert_eq!(FemDeck::parse(&text).unwrap(), d);
        }
    }

    #[test]
    fn device_and_geometry_b() {
        let a = build_geometry_a(&GeometryAParams::default()).unwrap();
        let dev = compose_device(&a, &DeviceSpec::default(), true).unwrap();
        let d = emit_deck(&dev, &[], &MaterialLibrary::default(), &ramp(), &DeckOptions::default()).unwrap();
        assert_eq!(d.solids.len(), 2);
        assert_eq!(d.rigids[0].material, crate::materials::CLEAR_V4);
        assert_eq!(FemDeck::parse(&d.serialize()).unwrap(), d);
        let b = build_geometry_b(&GeometryBParams::default()).unwrap();
        let d = emit_deck(&b, &[], &MaterialLibrary::default(), &ramp(), &DeckOptions::default()).unwrap();
        assert_eq!(d.loads.len(), 2);
        assert!(d.layers.is_empty());
    }

    #[test]
    fn unresolved_tags_rejected() {
        let mut d = deck_a(HelixStyle::Sh);
        d.surfaces.retain(|s| s.tag != CAP_BASE);
        assert_eq!(d.validate(), Err(ExportError::UnresolvedSurface(CAP_BASE.into())));
        let text = deck_a(HelixStyle::Sh).serialize().replace("*SURFACE, tag=CAP_BASE, kind=cap_base\n", "");
        assert!(matches!(FemDeck::parse(&text), Err(ExportError::UnresolvedSurface(_))));
        let mut d = deck_a(HelixStyle::Sh);
        d.encastre.push(CAP_BASE.into());
        assert_eq!(d.validate(), Err(ExportError::EncastreCount(2)));
    }

    #[test]
    fn malformed_text_rejected() {
        let text = deck_a(HelixStyle::Sh).serialize();
        assert!(matches!(
            FemDeck::parse(&text.replace("*DECK, version=1", "*DECK, version=9")),
            Err(ExportError::Parse { .. })
        ));
        assert!(matches!(FemDeck::parse(&text.replace("*END STEP\n", "")), Err(ExportError::Invalid(_))));
        assert!(matches!(FemDeck::parse(&format!("{text}*SOLID, name=X\n")), Err(ExportError::Parse { .. })));
        assert!(matches!(FemDeck::parse(&text.replacen("*STEP", "*BOGUS", 1)), Err(ExportError::Parse { .. })));
    }
}
