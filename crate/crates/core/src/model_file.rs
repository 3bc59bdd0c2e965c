//! Versioned JSON persistence for [`DiscriminantModel`].
//!
//! Reals are written with 17 significant digits so that every `f64`
//! survives a round trip exactly. Header fields come first and can be read
//! on their own with [`read_model_header`].

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::discriminant::DiscriminantModel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    n_classes: usize,
    n_features: usize,
    n_functions: usize,
    class_labels: Vec<String>,
    priors: Vec<f64>,
    feature_names: Vec<String>,
    feature_means: Vec<f64>,
    feature_scales: Vec<f64>,
    eigenvalues: Vec<f64>,
    /// `n_features × n_functions`, row-major.
    directions: Vec<f64>,
    /// `n_classes × n_functions`, row-major.
    centroids: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    pub n_classes: usize,
    pub n_features: usize,
    pub n_functions: usize,
    pub class_labels: Vec<String>,
}

// Unknown fields are skipped without being interpreted.
#[derive(Deserialize)]
struct VersionOnly {
    version: u32,
}

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn save_model(model: &DiscriminantModel) -> Result<Vec<u8>> {
    model.validate()?;
    let doc = ModelDocument {
        version: MODEL_VERSION,
        n_classes: model.n_classes(),
        n_features: model.n_features(),
        n_functions: model.n_functions(),
        class_labels: model.class_labels.clone(),
        priors: model.priors.clone(),
        feature_names: model.feature_names.clone(),
        feature_means: model.feature_means.clone(),
        feature_scales: model.feature_scales.clone(),
        eigenvalues: model.eigenvalues.clone(),
        directions: model.directions.as_slice().to_vec(),
        centroids: model.class_centroids.as_slice().to_vec(),
    };
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    doc.serialize(&mut ser)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn check_version(bytes: &[u8]) -> Result<()> {
    let v: VersionOnly =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if v.version != MODEL_VERSION {
        return Err(Error::IncompatibleModel {
            found: v.version,
            expected: MODEL_VERSION,
        });
    }
    Ok(())
}

/// Reads the version and dimensions without interpreting any matrix data.
pub fn read_model_header(bytes: &[u8]) -> Result<ModelHeader> {
    check_version(bytes)?;
    let header: ModelHeader =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptModel(e.to_string()))?;
    if header.class_labels.len() != header.n_classes {
        return Err(Error::CorruptModel(format!(
            "n_classes is {} but {} class labels are listed",
            header.n_classes,
            header.class_labels.len()
        )));
    }
    Ok(header)
}

pub fn load_model(bytes: &[u8]) -> Result<DiscriminantModel> {
    let header = read_model_header(bytes)?;
    let doc: ModelDocument =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let shape_err = |e: Error| Error::CorruptModel(e.to_string());
    let model = DiscriminantModel {
        directions: Matrix::from_row_major(header.n_features, header.n_functions, doc.directions)
            .map_err(shape_err)?,
        class_centroids: Matrix::from_row_major(header.n_classes, header.n_functions, doc.centroids)
            .map_err(shape_err)?,
        class_labels: doc.class_labels,
        priors: doc.priors,
        feature_names: doc.feature_names,
        feature_means: doc.feature_means,
        feature_scales: doc.feature_scales,
        eigenvalues: doc.eigenvalues,
    };
    if model.n_features() != header.n_features || model.n_functions() != header.n_functions {
        return Err(Error::CorruptModel(
            "vector lengths disagree with the header".into(),
        ));
    }
    model.validate()?;
    Ok(model)
}
