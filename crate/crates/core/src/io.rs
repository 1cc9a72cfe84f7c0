//! JSON wire formats and DOT export.
//!
//! Factor indices are 1-based in every external format.

use crate::autos::{AutoGen, OuterAutoWord};
use crate::gog::{GraphOfGroups, VertexLabel};
use crate::groups::{build_group, cyclic, symmetric, Elem, FactorSystem, FiniteGroup};
use crate::spine::{classify, SpineBall};
use crate::words::{self, Word};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("factor index {got} out of range 1..={n}")]
    FactorRange { got: usize, n: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupDescriptor {
    Cyclic { cyclic: usize },
    Symmetric { symmetric: usize },
    Table { name: String, table: Vec<Vec<Elem>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorsJson {
    pub factors: Vec<GroupDescriptor>,
}

pub fn group_from_descriptor(d: &GroupDescriptor) -> Result<FiniteGroup, IoError> {
    match d {
        GroupDescriptor::Cyclic { cyclic: k } => {
            cyclic(*k).map_err(|e| IoError::Parse(e.to_string()))
        }
        GroupDescriptor::Symmetric { symmetric: k } => {
            symmetric(*k).map_err(|e| IoError::Parse(e.to_string()))
        }
        GroupDescriptor::Table { name, table } => {
            build_group(table.clone(), name).map_err(|e| IoError::Parse(e.to_string()))
        }
    }
}

pub fn system_from_json(j: &FactorsJson) -> Result<FactorSystem, IoError> {
    let factors = j
        .factors
        .iter()
        .map(group_from_descriptor)
        .collect::<Result<Vec<_>, _>>()?;
    FactorSystem::new(factors).map_err(|e| IoError::Parse(e.to_string()))
}

/// Word: `[[factor, elem], ...]` with 1-based factor indices.
pub type WordJson = Vec<(usize, Elem)>;

pub fn word_to_json(w: &Word) -> WordJson {
    w.letters().iter().map(|l| (l.factor + 1, l.elem)).collect()
}

pub fn word_from_json(sys: &FactorSystem, j: &WordJson) -> Result<Word, IoError> {
    let pairs: Vec<(usize, Elem)> = j
        .iter()
        .map(|&(f, e)| {
            if f == 0 || f > sys.n() {
                Err(IoError::FactorRange { got: f, n: sys.n() })
            } else {
                Ok((f - 1, e))
            }
        })
        .collect::<Result<_, _>>()?;
    words::reduce(sys, &pairs).map_err(|e| IoError::Parse(e.to_string()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenJson {
    pub i: usize,
    pub w: WordJson,
    pub exp: i8,
}

pub type AutoJson = Vec<GenJson>;

pub fn auto_to_json(f: &OuterAutoWord) -> AutoJson {
    f.gens
        .iter()
        .map(|g| GenJson {
            i: g.factor + 1,
            w: word_to_json(&g.conj),
            exp: g.exponent,
        })
        .collect()
}

pub fn auto_from_json(sys: &FactorSystem, j: &AutoJson) -> Result<OuterAutoWord, IoError> {
    let gens = j
        .iter()
        .map(|g| {
            if g.i == 0 || g.i > sys.n() {
                return Err(IoError::FactorRange { got: g.i, n: sys.n() });
            }
            if g.exp != 1 && g.exp != -1 {
                return Err(IoError::Parse(format!("exp must be 1 or -1, got {}", g.exp)));
            }
            let conj = word_from_json(sys, &g.w)?;
            if conj.is_empty() {
                return Err(IoError::Parse("empty generator conjugator".into()));
            }
            Ok(AutoGen {
                factor: g.i - 1,
                conj,
                exponent: g.exp,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OuterAutoWord { gens })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelJson {
    pub factor: usize,
    pub conj: WordJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexJson {
    pub label: Option<LabelJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkingJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<(usize, usize)>,
}

pub fn marking_to_json(x: &GraphOfGroups) -> MarkingJson {
    MarkingJson {
        vertices: x
            .labels
            .iter()
            .map(|l| VertexJson {
                label: match l {
                    VertexLabel::Trivial => None,
                    VertexLabel::Peripheral { factor, conj } => Some(LabelJson {
                        factor: factor + 1,
                        conj: word_to_json(conj),
                    }),
                },
            })
            .collect(),
        edges: x.edges.clone(),
    }
}

pub fn marking_from_json(sys: &FactorSystem, j: &MarkingJson) -> Result<GraphOfGroups, IoError> {
    let labels = j
        .vertices
        .iter()
        .map(|v| match &v.label {
            None => Ok(VertexLabel::Trivial),
            Some(l) => {
                if l.factor == 0 || l.factor > sys.n() {
                    return Err(IoError::FactorRange {
                        got: l.factor,
                        n: sys.n(),
                    });
                }
                let conj = word_from_json(sys, &l.conj)?;
                Ok(VertexLabel::peripheral(sys, l.factor - 1, &conj))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GraphOfGroups::new(labels, j.edges.clone()))
}

fn label_display(sys: &FactorSystem, l: &VertexLabel) -> String {
    match l {
        VertexLabel::Trivial => "1".to_string(),
        VertexLabel::Peripheral { factor, conj } => {
            let base = format!("A{}({})", factor + 1, sys.factor(*factor).name());
            if conj.is_empty() {
                base
            } else {
                let w: Vec<String> = conj
                    .letters()
                    .iter()
                    .map(|lt| format!("a{}.{}", lt.factor + 1, lt.elem))
                    .collect();
                format!("{} w={}", base, w.join(" "))
            }
        }
    }
}

/// DOT rendering of a quotient graph with label annotations.
pub fn marking_to_dot(sys: &FactorSystem, x: &GraphOfGroups) -> String {
    let mut out = String::from("graph marking {\n");
    for (v, l) in x.labels.iter().enumerate() {
        out.push_str(&format!("  v{} [label=\"{}\"];\n", v, label_display(sys, l)));
    }
    for &(a, b) in &x.edges {
        out.push_str(&format!("  v{a} -- v{b};\n"));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpineBallJson {
    pub base: String,
    pub radius: u32,
    pub truncated: bool,
    pub vertices: Vec<SpineBallVertexJson>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpineBallVertexJson {
    pub key: String,
    pub depth: u32,
    pub tags: Vec<String>,
    pub marking: MarkingJson,
}

pub fn spine_ball_to_json(sys: &FactorSystem, ball: &SpineBall) -> SpineBallJson {
    SpineBallJson {
        base: ball.base.digest(),
        radius: ball.radius,
        truncated: ball.truncated,
        vertices: ball
            .vertices
            .iter()
            .map(|(k, sv)| SpineBallVertexJson {
                key: k.digest(),
                depth: ball.depth[k],
                tags: classify(sys, &sv.rep).iter().map(|t| t.to_string()).collect(),
                marking: marking_to_json(&sv.rep),
            })
            .collect(),
        edges: ball
            .edges
            .keys()
            .map(|(a, b)| (a.digest(), b.digest()))
            .collect(),
    }
}

/// DOT rendering of a spine ball, nodes keyed by canonical digest.
pub fn spine_ball_to_dot(sys: &FactorSystem, ball: &SpineBall) -> String {
    let mut out = String::from("graph spine {\n");
    for (k, sv) in &ball.vertices {
        let tags: Vec<String> = classify(sys, &sv.rep).iter().map(|t| t.to_string()).collect();
        out.push_str(&format!(
            "  n{} [label=\"{} d{} [{}]\"];\n",
            k.digest(),
            &k.digest()[..8],
            ball.depth[k],
            tags.join(",")
        ));
    }
    for (a, b) in ball.edges.keys() {
        out.push_str(&format!("  n{} -- n{};\n", a.digest(), b.digest()));
    }
    out.push_str("}\n");
    out
}

pub fn distortion_csv(rows: &[crate::metrics::DistortionRow]) -> String {
    let mut out = String::from("name,word,sub_length,spine_distance,g_lower_bound,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.name,
            r.word.replace(',', ";"),
            r.sub_length,
            r.spine_distance.map(|d| d.to_string()).unwrap_or_default(),
            r.g_lower_bound.map(|d| d.to_string()).unwrap_or_default(),
            r.status
        ));
    }
    out
}
