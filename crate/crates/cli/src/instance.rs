//! Instance files: an algebra, named maps, measures and subalgebras.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "algebra": { "ambient_dim": 2, "generators": "full" },
//!   "maps": {
//!     "e1": { "density": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]] },
//!     "phi": { "unit_images": ["..."] }
//!   },
//!   "measures": { "mu1": { "atoms": ["e1", "plus"], "weights": [0.5, 0.5] } },
//!   "subalgebras": { "b": { "map": "phi", "rn_maps": ["e1_half"] } },
//!   "tolerance": { "atol": 1e-8 }
//! }
//! ```
//!
//! A map is given by exactly one of `images` (on the algebra basis),
//! `unit_images` (on the matrix units `E_ij` in row-major order, full
//! algebras only), `kraus`, `density` or `values` (states on the basis).
//! A subalgebra lives in the commutant of the minimal dilation of `map` and
//! is given by its minimal `projections`, by commuting Hermitian
//! `generators`, or by `rn_maps` whose Radon-Nikodym operators generate it.

use std::collections::BTreeMap;
use std::sync::Arc;

use orthomeasure::algebra::{close_star_algebra, minimal_projections, AbelianSubalgebra, StarAlgebra};
use orthomeasure::dilation::StinespringTriple;
use orthomeasure::gallery;
use orthomeasure::measures::canonicalize;
use orthomeasure::numkernel::{c, matrix_unit};
use orthomeasure::radon_nikodym::rn_operator;
use orthomeasure::{CMat, CpMap, DiscreteMeasure, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{complex_from_json, complex_to_json, JsonMatrix};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub subalgebras: BTreeMap<String, SubalgebraSpec>,
    #[serde(default, skip_serializing_if = "ToleranceOverrides::is_empty")]
    pub tolerance: ToleranceOverrides,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub ambient_dim: usize,
    pub generators: Generators,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Generators {
    Keyword(String),
    Matrices(Vec<JsonMatrix>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_images: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<String>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubalgebraSpec {
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projections: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rn_maps: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub atol: Option<f64>,
    pub rank_rtol: Option<f64>,
    pub ortho_tol: Option<f64>,
    pub merge_tol: Option<f64>,
    pub exhaustive_cap: Option<usize>,
}

impl ToleranceOverrides {
    pub fn is_empty(&self) -> bool {
        self.atol.is_none()
            && self.rank_rtol.is_none()
            && self.ortho_tol.is_none()
            && self.merge_tol.is_none()
            && self.exhaustive_cap.is_none()
    }

    pub fn apply(&self, tol: &mut Tolerance) {
        if let Some(x) = self.atol {
            tol.atol = x;
        }
        if let Some(x) = self.rank_rtol {
            tol.rank_rtol = x;
        }
        if let Some(x) = self.ortho_tol {
            tol.ortho_tol = x;
        }
        if let Some(x) = self.merge_tol {
            tol.merge_tol = x;
        }
        if let Some(x) = self.exhaustive_cap {
            tol.exhaustive_cap = x;
        }
    }
}

fn matrices(list: &[JsonMatrix], what: &str) -> Result<Vec<CMat>, CliError> {
    list.iter()
        .enumerate()
        .map(|(i, m)| m.to_cmat().map_err(|e| CliError::Input(format!("{what}[{i}]: {e}"))))
        .collect()
}

/// A parsed instance with its algebra built.
pub struct Instance {
    pub file: InstanceFile,
    pub algebra: Arc<StarAlgebra>,
}

impl Instance {
    pub fn parse(text: &str, tol: &Tolerance) -> Result<Self, CliError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("instance file: {e}")))?;
        Self::from_file(file, tol)
    }

    pub fn from_file(file: InstanceFile, tol: &Tolerance) -> Result<Self, CliError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        let d = file.algebra.ambient_dim;
        if d == 0 {
            return Err(CliError::Input("ambient_dim must be positive".into()));
        }
        let algebra = match &file.algebra.generators {
            Generators::Keyword(k) if k == "full" => StarAlgebra::full(d),
            Generators::Keyword(k) => {
                return Err(CliError::Input(format!("unknown algebra keyword {k:?}")));
            }
            Generators::Matrices(list) => close_star_algebra(d, &matrices(list, "generators")?, tol)?,
        };
        Ok(Self { file, algebra: Arc::new(algebra) })
    }

    pub fn map(&self, name: &str, tol: &Tolerance) -> Result<CpMap, CliError> {
        let spec = self
            .file
            .maps
            .get(name)
            .ok_or_else(|| CliError::Input(format!("no map named {name:?}")))?;
        let given = [
            spec.images.is_some(),
            spec.unit_images.is_some(),
            spec.kraus.is_some(),
            spec.density.is_some(),
            spec.values.is_some(),
        ];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(CliError::Input(format!(
                "map {name:?}: give exactly one of images, unit_images, kraus, density, values"
            )));
        }
        let alg = self.algebra.clone();
        let map = if let Some(list) = &spec.images {
            let imgs = matrices(list, "images")?;
            let n = imgs.first().map_or(0, |m| m.nrows());
            CpMap::new(alg, n, imgs)?
        } else if let Some(list) = &spec.unit_images {
            let d = alg.ambient_dim();
            if !alg.is_full() {
                return Err(CliError::Input(format!("map {name:?}: unit_images needs a full matrix algebra")));
            }
            let imgs = matrices(list, "unit_images")?;
            if imgs.len() != d * d {
                return Err(CliError::Input(format!("map {name:?}: expected {} unit images", d * d)));
            }
            // the basis is sqrt(d) E_ij in the same order
            let s = c((d as f64).sqrt(), 0.0);
            let n = imgs[0].nrows();
            CpMap::new(alg, n, imgs.into_iter().map(|m| m * s).collect())?
        } else if let Some(list) = &spec.kraus {
            CpMap::from_kraus(alg, &matrices(list, "kraus")?)?
        } else if let Some(rho) = &spec.density {
            let rho = rho.to_cmat().map_err(|e| CliError::Input(format!("density: {e}")))?;
            gallery::state_from_density(alg, &rho, tol)?
        } else {
            let values: Vec<_> = spec.values.as_ref().unwrap().iter().map(|z| complex_from_json(*z)).collect();
            gallery::state_from_values(alg, &values, tol)?
        };
        Ok(map)
    }

    /// The measure after merging coincident atoms, with the merge groups.
    pub fn measure(&self, name: &str, tol: &Tolerance) -> Result<(DiscreteMeasure, Vec<Vec<usize>>), CliError> {
        let spec = self
            .file
            .measures
            .get(name)
            .ok_or_else(|| CliError::Input(format!("no measure named {name:?}")))?;
        let atoms = spec
            .atoms
            .iter()
            .map(|a| self.map(a, tol))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(canonicalize(&atoms, &spec.weights, tol)?)
    }

    pub fn subalgebra_spec(&self, name: &str) -> Result<&SubalgebraSpec, CliError> {
        self.file
            .subalgebras
            .get(name)
            .ok_or_else(|| CliError::Input(format!("no subalgebra named {name:?}")))
    }

    pub fn subalgebra(
        &self,
        spec: &SubalgebraSpec,
        base: &StinespringTriple,
        seed: u64,
        tol: &Tolerance,
    ) -> Result<AbelianSubalgebra, CliError> {
        let given = [spec.projections.is_some(), spec.generators.is_some(), spec.rn_maps.is_some()];
        if given.iter().filter(|&&g| g).count() != 1 {
            return Err(CliError::Input("give exactly one of projections, generators, rn_maps".into()));
        }
        let r = base.dil_dim();
        if let Some(list) = &spec.projections {
            return Ok(AbelianSubalgebra::new(matrices(list, "projections")?, tol)?);
        }
        let family = if let Some(list) = &spec.generators {
            matrices(list, "generators")?
        } else {
            spec.rn_maps
                .as_ref()
                .unwrap()
                .iter()
                .map(|m| Ok(rn_operator(&self.map(m, tol)?, base, tol)?.t))
                .collect::<Result<Vec<_>, CliError>>()?
        };
        Ok(minimal_projections(r, &family, seed, tol)?)
    }
}

/// Instance file for a measure on a full matrix algebra, atoms named
/// `atom0`, `atom1`, ... and the measure named `mu`.
pub fn measure_instance(mu: &DiscreteMeasure) -> Result<InstanceFile, CliError> {
    let alg = mu.atoms()[0].algebra();
    if !alg.is_full() {
        return Err(CliError::Input("only measures on full matrix algebras can be exported".into()));
    }
    let d = alg.ambient_dim();
    let mut maps = BTreeMap::new();
    let mut names = Vec::new();
    for (i, atom) in mu.atoms().iter().enumerate() {
        let name = format!("atom{i}");
        let spec = if atom.out_dim() == 1 {
            let values = atom.images().iter().map(|m| complex_to_json(m[(0, 0)])).collect();
            MapSpec { values: Some(values), ..Default::default() }
        } else {
            let imgs = (0..d * d)
                .map(|ij| JsonMatrix::from(&atom.apply(&matrix_unit(d, ij / d, ij % d))))
                .collect();
            MapSpec { unit_images: Some(imgs), ..Default::default() }
        };
        maps.insert(name.clone(), spec);
        names.push(name);
    }
    let mut measures = BTreeMap::new();
    measures.insert("mu".to_string(), MeasureSpec { atoms: names, weights: mu.weights().to_vec() });
    Ok(InstanceFile {
        schema_version: SCHEMA_VERSION.into(),
        algebra: AlgebraSpec { ambient_dim: d, generators: Generators::Keyword("full".into()) },
        maps,
        measures,
        subalgebras: BTreeMap::new(),
        tolerance: ToleranceOverrides::default(),
    })
}
