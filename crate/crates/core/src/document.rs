//! JSON document formats. Tensor indices are 1-based on the wire and every
//! rational is an exact `"p/q"` string.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraicCurvatureOperator, Signature};
use crate::error::{Error, Result};
use crate::frame::{CoordinateMap, MetricField};
use crate::jet::{Jet, JetRecord};
use crate::rational::{self, Rational};
use crate::realizer::ChristoffelField;
use crate::tensor::{Tensor2, Tensor3, Tensor4};

pub const FORMAT_VERSION: u32 = 1;

pub fn check_format_version(version: u32) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported format_version {version}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

/// One nonzero component of a constant tensor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseEntry {
    pub indices: Vec<usize>,
    pub value: String,
}

fn to_zero_based(indices: &[usize], rank: usize, dim: usize) -> Result<Vec<usize>> {
    if indices.len() != rank {
        return Err(Error::Parse(format!("expected {rank} indices, got {}", indices.len())));
    }
    indices
        .iter()
        .map(|&i| {
            if (1..=dim).contains(&i) {
                Ok(i - 1)
            } else {
                Err(Error::Parse(format!("index {i} outside 1..={dim}")))
            }
        })
        .collect()
}

pub fn operator_to_sparse(a: &AlgebraicCurvatureOperator) -> Vec<SparseEntry> {
    a.tensor()
        .indexed()
        .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
        .map(|(idx, v)| SparseEntry {
            indices: idx.iter().map(|i| i + 1).collect(),
            value: rational::format_rational(v),
        })
        .collect()
}

/// Builds and validates an operator. Repeated indices are an error.
pub fn operator_from_sparse(dim: usize, entries: &[SparseEntry]) -> Result<AlgebraicCurvatureOperator> {
    let mut values = std::collections::BTreeMap::new();
    for e in entries {
        let idx = to_zero_based(&e.indices, 4, dim)?;
        if values.insert(idx, rational::parse_rational(&e.value)?).is_some() {
            return Err(Error::Parse(format!("operator component {:?} listed twice", e.indices)));
        }
    }
    let t = Tensor4::from_fn(dim, |idx| values.get(idx.as_slice()).cloned().unwrap_or_default());
    AlgebraicCurvatureOperator::new(t)
}

/// A jet-valued metric component `g_{ij}` with `i ≤ j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub i: usize,
    pub j: usize,
    pub jet: Vec<JetRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricSource {
    /// Constant matrix of rational strings.
    Constant(Vec<Vec<String>>),
    /// Jet components; unlisted components are zero and `(j, i)` mirrors `(i, j)`.
    Jet { entries: Vec<MetricEntry> },
}

impl MetricSource {
    pub fn from_metric(g: &MetricField) -> Self {
        let entries = g
            .components()
            .indexed()
            .filter(|([i, j], jet)| i <= j && !jet.is_zero())
            .map(|([i, j], jet)| MetricEntry { i: i + 1, j: j + 1, jet: jet.to_records() })
            .collect();
        MetricSource::Jet { entries }
    }

    /// Materializes the metric at the given cap, truncating higher terms.
    pub fn to_metric(&self, signature: Signature, cap: u32) -> Result<MetricField> {
        let m = signature.dim();
        let comps = match self {
            MetricSource::Constant(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::Parse(format!("constant metric must be {m}×{m}")));
                }
                let vals = rows
                    .iter()
                    .map(|r| r.iter().map(|s| rational::parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Tensor2::from_fn(m, |[i, j]| Jet::constant(m, cap, vals[i][j].clone()))
            }
            MetricSource::Jet { entries } => {
                let mut slots: Vec<Option<Jet>> = vec![None; m * m];
                for e in entries {
                    let idx = to_zero_based(&[e.i, e.j], 2, m)?;
                    let (a, b) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
                    let jet = records_to_jet(m, cap, &e.jet)?;
                    if slots[a * m + b].is_some() {
                        return Err(Error::Parse(format!("metric component ({}, {}) listed twice", e.i, e.j)));
                    }
                    slots[a * m + b] = Some(jet.clone());
                    slots[b * m + a] = Some(jet);
                }
                Tensor2::from_fn(m, |[i, j]| slots[i * m + j].clone().unwrap_or_else(|| Jet::zero(m, cap)))
            }
        };
        MetricField::new(signature, comps)
    }
}

/// Parses jet records of any degree, dropping terms above `cap`.
fn records_to_jet(dim: usize, cap: u32, records: &[JetRecord]) -> Result<Jet> {
    let top = records.iter().map(|r| r.exponents.iter().sum::<u32>()).max().unwrap_or(0);
    Ok(Jet::from_records(dim, top.max(cap), records)?.recap(cap))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ModelOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// An operator `A` with the metric `g` it should be realized against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub dim: usize,
    pub signature: Signature,
    /// Omitted metric means the flat metric `diag(ε)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSource>,
    pub operator: Vec<SparseEntry>,
    #[serde(default)]
    pub options: ModelOptions,
}

/// A validated model.
#[derive(Clone, Debug)]
pub struct Model {
    pub operator: AlgebraicCurvatureOperator,
    pub signature: Signature,
    metric: Option<MetricSource>,
    pub options: ModelOptions,
}

impl Model {
    pub fn new(operator: AlgebraicCurvatureOperator, signature: Signature, options: ModelOptions) -> Result<Self> {
        if operator.dim() != signature.dim() {
            return Err(Error::shape("operator and signature dimensions differ"));
        }
        Ok(Model { operator, signature, metric: None, options })
    }

    pub fn with_metric(mut self, g: &MetricField) -> Self {
        self.metric = Some(MetricSource::from_metric(g));
        self
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn metric(&self, cap: u32) -> Result<MetricField> {
        match &self.metric {
            None => Ok(MetricField::flat(self.signature, cap)),
            Some(source) => source.to_metric(self.signature, cap),
        }
    }
}

impl ModelDocument {
    pub fn from_model(model: &Model) -> Self {
        ModelDocument {
            format_version: FORMAT_VERSION,
            dim: model.dim(),
            signature: model.signature,
            metric: model.metric.clone(),
            operator: operator_to_sparse(&model.operator),
            options: model.options.clone(),
        }
    }

    /// Runs every load-time validator, including a trial materialization of
    /// the metric.
    pub fn into_model(self) -> Result<Model> {
        check_format_version(self.format_version)?;
        if self.signature.dim() != self.dim {
            return Err(Error::shape(format!(
                "signature ({}, {}) does not match dim {}",
                self.signature.timelike, self.signature.spacelike, self.dim
            )));
        }
        let operator = operator_from_sparse(self.dim, &self.operator)?;
        let model = Model { operator, signature: self.signature, metric: self.metric, options: self.options };
        model.metric(model.options.order.unwrap_or(4) + 1)?;
        Ok(model)
    }
}

/// A torsion-free Christoffel field `Γ_{ij}^k`. Both `(i, j)` and `(j, i)`
/// are stored; loading rejects any mismatch between them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChristoffelDocument {
    pub format_version: u32,
    pub dim: usize,
    pub cap: u32,
    pub components: Vec<ChristoffelEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChristoffelEntry {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub jet: Vec<JetRecord>,
}

impl ChristoffelDocument {
    pub fn from_field(gamma: &ChristoffelField) -> Self {
        let components = gamma
            .components()
            .indexed()
            .filter(|(_, jet)| !jet.is_zero())
            .map(|([i, j, k], jet)| ChristoffelEntry { i: i + 1, j: j + 1, k: k + 1, jet: jet.to_records() })
            .collect();
        ChristoffelDocument { format_version: FORMAT_VERSION, dim: gamma.dim(), cap: gamma.cap(), components }
    }

    pub fn into_field(self) -> Result<ChristoffelField> {
        check_format_version(self.format_version)?;
        let m = self.dim;
        let mut slots: Vec<Option<Jet>> = vec![None; m * m * m];
        for e in &self.components {
            let idx = to_zero_based(&[e.i, e.j, e.k], 3, m)?;
            let jet = Jet::from_records(m, self.cap, &e.jet)?;
            if slots[(idx[0] * m + idx[1]) * m + idx[2]].replace(jet).is_some() {
                return Err(Error::Parse(format!("component ({}, {}, {}) listed twice", e.i, e.j, e.k)));
            }
        }
        let t = Tensor3::from_fn(m, |[i, j, k]| slots[(i * m + j) * m + k].clone().unwrap_or_else(|| Jet::zero(m, self.cap)));
        ChristoffelField::new(t)
    }
}

/// Serialized [`CoordinateMap`]: the constants `c^i_{jk}` and the images
/// `x^i(y)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinateMapRecord {
    pub identity: bool,
    /// Entries `[j, k, i]` holding `c^i_{jk}`.
    pub christoffel: Vec<SparseEntry>,
    pub images: Vec<Vec<JetRecord>>,
}

impl From<&CoordinateMap> for CoordinateMapRecord {
    fn from(map: &CoordinateMap) -> Self {
        let christoffel = map
            .christoffel
            .indexed()
            .filter(|(_, v)| !num_traits::Zero::is_zero(*v))
            .map(|(idx, v)| SparseEntry {
                indices: idx.iter().map(|i| i + 1).collect(),
                value: rational::format_rational(v),
            })
            .collect();
        CoordinateMapRecord {
            identity: map.is_identity(),
            christoffel,
            images: map.images.iter().map(Jet::to_records).collect(),
        }
    }
}

/// A constant form as rows of rational strings.
pub fn form_rows(form: &Tensor2<Rational>) -> Vec<Vec<String>> {
    (0..form.dim()).map(|i| (0..form.dim()).map(|j| rational::format_rational(&form[[i, j]])).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_aco;

    #[test]
    fn operator_round_trip() {
        let a = random_aco(4, 3, 2).unwrap();
        let back = operator_from_sparse(3, &operator_to_sparse(&a)).unwrap();
        assert_eq!(a, back);
        assert!(operator_to_sparse(&a).iter().all(|e| e.indices.iter().all(|&i| (1..=3).contains(&i))));
    }

    #[test]
    fn operator_validation_errors() {
        let e = |idx: [usize; 4], v: &str| SparseEntry { indices: idx.to_vec(), value: v.into() };
        // Only R_{121}^2 set: antisymmetry fails.
        assert!(matches!(operator_from_sparse(3, &[e([1, 2, 1, 2], "1")]), Err(Error::Invalid(_))));
        assert!(operator_from_sparse(3, &[e([0, 2, 1, 2], "1")]).is_err());
        assert!(operator_from_sparse(3, &[e([1, 2, 1, 2], "0.5")]).is_err());
        let dup = [e([1, 2, 1, 2], "1"), e([1, 2, 1, 2], "1")];
        assert!(operator_from_sparse(3, &dup).is_err());
    }

    #[test]
    fn metric_sources() {
        let sig = Signature::new(1, 2);
        let constant = MetricSource::Constant(vec![
            vec!["-1".into(), "0".into(), "0".into()],
            vec!["0".into(), "1".into(), "0".into()],
            vec!["0".into(), "0".into(), "1".into()],
        ]);
        assert_eq!(constant.to_metric(sig, 3).unwrap(), MetricField::flat(sig, 3));
        let g = MetricField::flat(sig, 3);
        assert_eq!(MetricSource::from_metric(&g).to_metric(sig, 3).unwrap(), g);
        let json = r#"{"entries":[{"i":1,"j":1,"jet":[{"exponents":[0,0,0],"coeff":"-1/1"}]},
            {"i":2,"j":2,"jet":[{"exponents":[0,0,0],"coeff":"1"},{"exponents":[0,0,7],"coeff":"5"}]},
            {"i":3,"j":3,"jet":[{"exponents":[0,0,0],"coeff":"1"}]}]}"#;
        let source: MetricSource = serde_json::from_str(json).unwrap();
        assert_eq!(source.to_metric(sig, 3).unwrap(), g);
        // Wrong signature for the matrix.
        assert!(constant.to_metric(Signature::new(0, 3), 3).is_err());
    }

    #[test]
    fn christoffel_round_trip_and_torsion() {
        let a = random_aco(9, 3, 2).unwrap();
        let gamma = crate::realizer::initial_gamma(&a, 5);
        let doc = ChristoffelDocument::from_field(&gamma);
        let json = serde_json::to_string(&doc).unwrap();
        let back: ChristoffelDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_field().unwrap(), gamma);
        let mut tampered = doc.clone();
        let entry = tampered.components.iter_mut().find(|e| e.i != e.j).unwrap();
        entry.jet[0].coeff = "17".into();
        assert!(tampered.into_field().unwrap_err().to_string().contains("torsion"));
    }

    #[test]
    fn model_document_round_trip() {
        let model = Model::new(random_aco(2, 4, 2).unwrap(), Signature::new(1, 3), ModelOptions::default()).unwrap();
        let doc = ModelDocument::from_model(&model);
        let json = serde_json::to_string_pretty(&doc).unwrap();
        assert!(json.contains("\"format_version\": 1"));
        let back: ModelDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let m = back.into_model().unwrap();
        assert_eq!(m.operator, model.operator);
        let mut bad = doc.clone();
        bad.format_version = 2;
        assert!(bad.into_model().is_err());
        assert_eq!(form_rows(&Tensor2::identity(2))[0], vec!["1/1".to_string(), "0/1".to_string()]);
    }
}
