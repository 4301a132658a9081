//! JSON bundles of characterizations for external solvers, and their re-import.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objects::{AffineConstraintSet, AffineEquation, Characterization, Gamma, LinearSpace, ObjectSet, Roles};
use crate::operator::{CMat, Operator, C64, DEFAULT_TOL};
use crate::projmap::{DenseSuperMap, OpMap, SubsetMap, SubsetMapFile};
use crate::rational::{q_frac, q_parts};
use crate::space::{CompositeSpace, Label};
use crate::transforms::{Route, TransformSpec};

pub const BUNDLE_FORMAT: &str = "hoq-transform/1";

type Subsystems = Vec<(String, usize)>;

fn subsystems(s: &CompositeSpace) -> Subsystems {
    s.subsystems().iter().map(|(l, d)| (l.0.clone(), *d)).collect()
}

fn space_of(s: &Subsystems) -> Result<CompositeSpace> {
    CompositeSpace::new(s.iter().map(|(l, d)| (l.as_str(), *d)))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProjectorFile {
    Subset(SubsetMapFile),
    /// Supermatrix acting on column-stacked operators.
    Dense { in_labels: Subsystems, out_labels: Subsystems, matrix: Vec<Vec<[f64; 2]>> },
}

impl ProjectorFile {
    pub fn from_map(p: &OpMap) -> Result<Self> {
        Ok(match p {
            OpMap::Symbolic(m) => ProjectorFile::Subset(m.to_file()?),
            OpMap::Dense(d) => {
                let m = d.matrix();
                ProjectorFile::Dense {
                    in_labels: subsystems(d.in_space()),
                    out_labels: subsystems(d.out_space()),
                    matrix: (0..m.nrows())
                        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                        .collect(),
                }
            }
        })
    }

    pub fn to_map(&self) -> Result<OpMap> {
        match self {
            ProjectorFile::Subset(f) => Ok(OpMap::Symbolic(SubsetMap::from_file(f)?)),
            ProjectorFile::Dense { in_labels, out_labels, matrix } => {
                let rows = matrix.len();
                let cols = matrix.first().map_or(0, |r| r.len());
                if matrix.iter().any(|r| r.len() != cols) {
                    return Err(Error::InvalidMatrix("ragged supermatrix".into()));
                }
                let mat = CMat::from_fn(rows, cols, |r, c| C64::new(matrix[r][c][0], matrix[r][c][1]));
                Ok(OpMap::Dense(DenseSuperMap::from_matrix(space_of(in_labels)?, space_of(out_labels)?, mat)?))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GammaFile {
    pub coeff_num: i64,
    pub coeff_den: i64,
    /// Exponent of each subsystem dimension.
    pub dims: BTreeMap<String, i32>,
    pub symbolic: String,
}

impl GammaFile {
    pub fn from_gamma(g: &Gamma) -> Result<Self> {
        let (coeff_num, coeff_den) = q_parts(&g.coeff).ok_or_else(|| Error::BadDims("coefficient exceeds 64 bits".into()))?;
        Ok(GammaFile {
            coeff_num,
            coeff_den,
            dims: g.dims.iter().map(|(l, e)| (l.0.clone(), *e)).collect(),
            symbolic: g.to_string(),
        })
    }

    pub fn to_gamma(&self) -> Result<Gamma> {
        if self.coeff_den == 0 {
            return Err(Error::BadDims("zero denominator".into()));
        }
        Ok(Gamma {
            coeff: q_frac(self.coeff_num, self.coeff_den),
            dims: self.dims.iter().filter(|(_, e)| **e != 0).map(|(l, e)| (Label::from(l), *e)).collect(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AffineFile {
    pub traced: Vec<Label>,
    pub transpose: bool,
    pub map: ProjectorFile,
    pub rhs: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SetFile {
    /// `object`, `affine` or `linear`.
    pub kind: String,
    pub name: String,
    pub labels: Subsystems,
    pub projector: ProjectorFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaFile>,
    /// Trace value evaluated on `labels`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine_equation: Option<AffineFile>,
    pub require_psd: bool,
    pub roles: Roles,
}

impl SetFile {
    pub fn from_characterization(c: &Characterization) -> Result<Self> {
        let mut f = SetFile {
            kind: String::new(),
            name: c.name().to_string(),
            labels: subsystems(c.space()),
            projector: ProjectorFile::from_map(c.projector())?,
            gamma: None,
            gamma_num: None,
            gamma_den: None,
            affine_equation: None,
            require_psd: false,
            roles: c.roles().clone(),
        };
        match c {
            Characterization::Object(s) => {
                f.kind = "object".into();
                f.gamma = Some(GammaFile::from_gamma(&s.gamma)?);
                let (n, d) = q_parts(&s.gamma_value()?).ok_or_else(|| Error::BadDims("trace value exceeds 64 bits".into()))?;
                f.gamma_num = Some(n);
                f.gamma_den = Some(d);
                f.require_psd = s.require_psd;
            }
            Characterization::Affine(a) => {
                f.kind = "affine".into();
                f.require_psd = a.require_psd;
                f.affine_equation = Some(AffineFile {
                    traced: a.equation.traced.clone(),
                    transpose: a.equation.transpose,
                    map: ProjectorFile::from_map(&a.equation.map)?,
                    rhs: a.equation.rhs.to_json_value(),
                });
            }
            Characterization::Linear(_) => f.kind = "linear".into(),
        }
        Ok(f)
    }

    pub fn to_characterization(&self) -> Result<Characterization> {
        let space = space_of(&self.labels)?;
        let projector = self.projector.to_map()?;
        if !projector.in_space().same_set(&space) {
            return Err(Error::SpaceMismatch(format!("projector acts on {}, set on {space}", projector.in_space())));
        }
        let name = self.name.clone();
        let roles = self.roles.clone();
        let missing = |what: &str| Error::BadDims(format!("{} set `{name}` lacks {what}", self.kind));
        match self.kind.as_str() {
            "object" => {
                let gamma = self.gamma.as_ref().ok_or_else(|| missing("gamma"))?.to_gamma()?;
                Ok(Characterization::Object(ObjectSet {
                    name: name.clone(),
                    space,
                    projector,
                    gamma,
                    require_psd: self.require_psd,
                    roles,
                }))
            }
            "affine" => {
                let eq = self.affine_equation.as_ref().ok_or_else(|| missing("affine_equation"))?;
                Ok(Characterization::Affine(AffineConstraintSet {
                    name: name.clone(),
                    space,
                    projector,
                    equation: AffineEquation {
                        traced: eq.traced.clone(),
                        transpose: eq.transpose,
                        map: eq.map.to_map()?,
                        rhs: Operator::from_json_value(eq.rhs.clone())?,
                    },
                    require_psd: self.require_psd,
                    roles,
                }))
            }
            "linear" => Ok(Characterization::Linear(LinearSpace { name: name.clone(), space, projector, roles })),
            other => Err(Error::BadDims(format!("unknown set kind `{other}`"))),
        }
    }
}

/// Everything needed to rebuild a [`TransformSpec`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TransformBundle {
    pub format: String,
    pub route: Route,
    pub input_set: SetFile,
    pub output_set: SetFile,
    pub rescale: GammaFile,
    pub result: SetFile,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TransformBundle {
    pub fn from_spec(t: &TransformSpec) -> Result<Self> {
        Ok(TransformBundle {
            format: BUNDLE_FORMAT.into(),
            route: t.route,
            input_set: SetFile::from_characterization(&Characterization::Object(t.input.clone()))?,
            output_set: SetFile::from_characterization(&Characterization::Object(t.output.clone()))?,
            rescale: GammaFile::from_gamma(&t.rescale)?,
            result: SetFile::from_characterization(&t.result)?,
            warnings: t.warnings.clone(),
        })
    }

    pub fn to_spec(&self) -> Result<TransformSpec> {
        if self.format != BUNDLE_FORMAT {
            return Err(Error::BadDims(format!("unsupported bundle format `{}`", self.format)));
        }
        Ok(TransformSpec {
            input: self.input_set.to_characterization()?.into_object()?,
            output: self.output_set.to_characterization()?.into_object()?,
            rescale: self.rescale.to_gamma()?,
            result: self.result.to_characterization()?,
            route: self.route,
            warnings: self.warnings.clone(),
        })
    }
}

/// Either a full transformation bundle or a single set.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ExportFile {
    Transform(Box<TransformBundle>),
    Set(Box<SetFile>),
}

impl ExportFile {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn characterization(&self) -> Result<Characterization> {
        match self {
            ExportFile::Transform(b) => b.result.to_characterization(),
            ExportFile::Set(s) => s.to_characterization(),
        }
    }
}

/// Writes an orthonormal basis of the image of `p` as operator files
/// `basis_000.json`, `basis_001.json`, … in `dir`.
pub fn write_image_basis(p: &OpMap, budget: usize, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let basis = p.to_dense(budget)?.image_basis(DEFAULT_TOL)?;
    let mut paths = Vec::with_capacity(basis.len());
    for (k, b) in basis.iter().enumerate() {
        let path = dir.join(format!("basis_{k:03}.json"));
        b.write_json(&path)?;
        paths.push(path);
    }
    Ok(paths)
}
