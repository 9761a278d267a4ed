//! Reduced-graph templates on the torus.
//!
//! A template lists edge classes (each a band of parallel edges in a
//! labelled graph) together with the ccw corner word at every vertex. Each
//! class carries a homology tag: the displacement from its `A` end to its
//! `B` end in the universal cover, in half-lattice units.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fatgraph::FatGraph;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("malformed template: {0}")]
    Malformed(String),
    #[error("embedding error: {0}")]
    Embedding(String),
    #[error("cannot read template: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse template: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum End {
    A,
    B,
}

impl End {
    pub fn other(self) -> End {
        match self {
            End::A => End::B,
            End::B => End::A,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClass {
    pub id: String,
    /// 0-based endpoint vertices.
    pub end_a: usize,
    pub end_b: usize,
    pub tag: [i64; 2],
    /// 1-based index into a weight vector.
    pub weight_index: usize,
}

impl EdgeClass {
    pub fn is_loop(&self) -> bool {
        self.end_a == self.end_b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corner {
    pub class: usize,
    pub end: End,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusTemplate {
    pub name: String,
    pub vertices: usize,
    pub classes: Vec<EdgeClass>,
    pub corner_words: Vec<Vec<Corner>>,
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassFile {
    id: String,
    end_a: usize,
    end_b: usize,
    isotopy_tag: [i64; 2],
    weight_index: usize,
}

#[derive(Deserialize, Serialize)]
#[serde(rename_all = "camelCase")]
struct TemplateFile {
    #[serde(default)]
    name: String,
    vertices: usize,
    classes: Vec<ClassFile>,
    corner_words: Vec<Vec<String>>,
}

pub fn load_template(text: &str) -> Result<TorusTemplate, TemplateError> {
    let file: TemplateFile = serde_json::from_str(text)?;
    build_template(file)
}

pub fn load_template_file(path: &Path) -> Result<TorusTemplate, TemplateError> {
    load_template(&std::fs::read_to_string(path)?)
}

fn build_template(file: TemplateFile) -> Result<TorusTemplate, TemplateError> {
    let malformed = |m: String| Err(TemplateError::Malformed(m));
    if file.classes.is_empty() {
        return Err(TemplateError::Embedding(
            "no edge classes: the template graph is disconnected".into(),
        ));
    }
    if file.corner_words.len() != file.vertices {
        return malformed(format!(
            "{} corner words for {} vertices",
            file.corner_words.len(),
            file.vertices
        ));
    }
    let mut classes = Vec::new();
    for c in &file.classes {
        if c.end_a == 0 || c.end_a > file.vertices || c.end_b == 0 || c.end_b > file.vertices {
            return malformed(format!("class {} has an endpoint out of range", c.id));
        }
        if c.weight_index == 0 {
            return malformed(format!("class {} has weight index 0", c.id));
        }
        if classes.iter().any(|k: &EdgeClass| k.id == c.id) {
            return malformed(format!("duplicate class id {}", c.id));
        }
        classes.push(EdgeClass {
            id: c.id.clone(),
            end_a: c.end_a - 1,
            end_b: c.end_b - 1,
            tag: c.isotopy_tag,
            weight_index: c.weight_index,
        });
    }

    let mut corner_words = Vec::new();
    for (v, word) in file.corner_words.iter().enumerate() {
        let mut out = Vec::new();
        for token in word {
            let (id, suffix) = match token.split_once('@') {
                Some((id, s)) => (id, Some(s)),
                None => (token.as_str(), None),
            };
            let Some(ci) = classes.iter().position(|c| c.id == id) else {
                return malformed(format!("corner word of vertex {} names unknown class {id}", v + 1));
            };
            let class = &classes[ci];
            let end = match suffix {
                Some("A") => End::A,
                Some("B") => End::B,
                Some(s) => return malformed(format!("bad end marker {s:?} in {token}")),
                None if class.is_loop() => {
                    return malformed(format!("loop class {id} needs an @A/@B end marker"))
                }
                None if class.end_a == v => End::A,
                None if class.end_b == v => End::B,
                None => return malformed(format!("class {id} does not end at vertex {}", v + 1)),
            };
            let expected = if end == End::A { class.end_a } else { class.end_b };
            if expected != v {
                return malformed(format!("{token} appears at vertex {}", v + 1));
            }
            out.push(Corner { class: ci, end });
        }
        corner_words.push(out);
    }

    for (ci, class) in classes.iter().enumerate() {
        for end in [End::A, End::B] {
            let n = corner_words
                .iter()
                .flatten()
                .filter(|c| c.class == ci && c.end == end)
                .count();
            if n != 1 {
                return malformed(format!(
                    "class {} end {:?} occurs {n} times in the corner words (expected once)",
                    class.id, end
                ));
            }
        }
    }

    let t = TorusTemplate {
        name: file.name,
        vertices: file.vertices,
        classes,
        corner_words,
    };
    let g = t.skeleton(&vec![1; t.classes.len()]);
    if !g.is_connected() {
        return Err(TemplateError::Embedding("template graph is disconnected".into()));
    }
    let chi = g.euler_characteristic();
    if chi != 0 {
        return Err(TemplateError::Embedding(format!(
            "rotation system has Euler characteristic {chi}, not a torus"
        )));
    }
    Ok(t)
}

impl TorusTemplate {
    pub fn class_index(&self, id: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.id == id)
    }

    /// Number of entries of a weight vector for this template.
    pub fn weight_len(&self) -> usize {
        self.classes.iter().map(|c| c.weight_index).max().unwrap_or(0)
    }

    /// Fat graph with `mult[c]` parallel edges in class `c`; classes with
    /// multiplicity zero are dropped from the corner words.
    pub fn skeleton(&self, mult: &[usize]) -> FatGraph {
        // Dart ids: per class, per edge, A end then B end.
        let mut base = Vec::with_capacity(self.classes.len());
        let mut next = 0;
        for &m in mult {
            base.push(next);
            next += 2 * m;
        }
        let dart = |c: usize, i: usize, end: End| base[c] + 2 * i + usize::from(end == End::B);
        let rotations: Vec<Vec<usize>> = self
            .corner_words
            .iter()
            .map(|word| {
                let mut rot = Vec::new();
                for corner in word {
                    let m = mult[corner.class];
                    let order: Box<dyn Iterator<Item = usize>> = match corner.end {
                        End::A => Box::new(0..m),
                        End::B => Box::new((0..m).rev()),
                    };
                    rot.extend(order.map(|i| dart(corner.class, i, corner.end)));
                }
                rot
            })
            .collect();
        let edges: Vec<(usize, usize)> = (0..self.classes.len())
            .flat_map(|c| (0..mult[c]).map(move |i| (c, i)))
            .map(|(c, i)| (dart(c, i, End::A), dart(c, i, End::B)))
            .collect();
        FatGraph::from_rotations(&rotations, &edges)
    }

    /// Euler characteristic of the template with the given class weights,
    /// counting only the vertices that keep at least one edge.
    pub fn euler_characteristic_with(&self, mult: &[usize]) -> i64 {
        self.skeleton(mult).euler_characteristic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = include_str!("../../../data/figure2.template");

    #[test]
    fn figure2_loads_as_torus() {
        let t = load_template(FIG2).unwrap();
        assert_eq!(t.vertices, 2);
        assert_eq!(t.classes.iter().filter(|c| c.is_loop()).count(), 2);
        assert_eq!(t.classes.len(), 6);
        assert_eq!(t.euler_characteristic_with(&[1; 6]), 0);
        assert_eq!(t.weight_len(), 5);
    }

    #[test]
    fn loop_listed_once_is_malformed() {
        let bad = FIG2.replace("\"L1@A\", ", "");
        assert!(matches!(load_template(&bad), Err(TemplateError::Malformed(_))));
    }

    #[test]
    fn empty_class_list_is_embedding_error() {
        let text = r#"{"vertices": 1, "classes": [], "cornerWords": [[]]}"#;
        assert!(matches!(load_template(text), Err(TemplateError::Embedding(_))));
    }

    #[test]
    fn planar_template_fails_genus_check() {
        let text = r#"{"vertices": 2, "classes": [
            {"id": "a", "endA": 1, "endB": 2, "isotopyTag": [0, 0], "weightIndex": 1},
            {"id": "b", "endA": 1, "endB": 2, "isotopyTag": [0, 0], "weightIndex": 2}],
            "cornerWords": [["a", "b"], ["b", "a"]]}"#;
        assert!(matches!(load_template(text), Err(TemplateError::Embedding(_))));
    }
}
