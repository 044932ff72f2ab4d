//! Bundle directories: Matrix Market files plus a JSON manifest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::la::mm::{read_sparse_file, read_vector_file, write_sparse_file, write_vector_file, Symmetry};
use crate::la::{AffineOperator, SparseMatrix, ThetaMap};
use crate::problems::{MeshMeta, Norms, ProblemBundle, ProblemKind};

pub const BUNDLE_MANIFEST: &str = "bundle.json";
const FORMAT: &str = "krb-problem-bundle";

#[derive(Debug, Serialize, Deserialize)]
struct BundleManifest {
    format: String,
    kind: ProblemKind,
    theta_map: ThetaMap,
    arity: usize,
    dim: usize,
    mesh_meta: MeshMeta,
    block_offsets: Vec<usize>,
    terms: Vec<String>,
    rhs: String,
    h1_semi: String,
    l2: String,
}

fn write_matrix(dir: &Path, name: &str, a: &SparseMatrix) -> Result<String> {
    let file = format!("{name}.mtx");
    let sym = if a.asymmetry() == 0.0 { Symmetry::Symmetric } else { Symmetry::General };
    write_sparse_file(dir.join(&file), a, sym)?;
    Ok(file)
}

pub fn export_bundle(bundle: &ProblemBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let terms = bundle
        .op
        .terms()
        .iter()
        .enumerate()
        .map(|(j, a)| write_matrix(dir, &format!("A{}", j + 1), a))
        .collect::<Result<Vec<_>>>()?;
    write_vector_file(dir.join("rhs.mtx"), &bundle.rhs)?;
    let manifest = BundleManifest {
        format: FORMAT.into(),
        kind: bundle.kind,
        theta_map: bundle.theta_map.clone(),
        arity: bundle.op.arity(),
        dim: bundle.dim(),
        mesh_meta: bundle.mesh_meta.clone(),
        block_offsets: bundle.block_offsets.clone(),
        terms,
        rhs: "rhs.mtx".into(),
        h1_semi: write_matrix(dir, "h1_semi", &bundle.norms.h1_semi)?,
        l2: write_matrix(dir, "l2", &bundle.norms.l2)?,
    };
    fs::write(dir.join(BUNDLE_MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn import_bundle(dir: impl AsRef<Path>) -> Result<ProblemBundle> {
    let dir = dir.as_ref();
    let text = fs::read_to_string(dir.join(BUNDLE_MANIFEST))?;
    let man: BundleManifest = serde_json::from_str(&text).map_err(|e| Error::CorruptManifest(e.to_string()))?;
    if man.format != FORMAT {
        return Err(Error::CorruptManifest(format!("unsupported format {}", man.format)));
    }
    if man.terms.len() != man.arity || man.theta_map.arity() != man.arity {
        return Err(Error::ArityMismatch {
            expected: man.arity,
            got: man.terms.len(),
        });
    }
    let terms = man.terms.iter().map(|f| read_sparse_file(dir.join(f))).collect::<Result<Vec<_>>>()?;
    let op = AffineOperator::new(terms)?;
    check_dim("bundle dimension", man.dim, op.dim())?;
    let rhs = read_vector_file(dir.join(&man.rhs))?;
    check_dim("bundle rhs", man.dim, rhs.len())?;
    let norms = Norms {
        h1_semi: read_sparse_file(dir.join(&man.h1_semi))?,
        l2: read_sparse_file(dir.join(&man.l2))?,
    };
    check_dim("h1 norm matrix", man.dim, norms.h1_semi.nrows())?;
    check_dim("l2 norm matrix", man.dim, norms.l2.nrows())?;
    Ok(ProblemBundle {
        kind: man.kind,
        op,
        rhs,
        theta_map: man.theta_map,
        norms,
        mesh_meta: man.mesh_meta,
        block_offsets: man.block_offsets,
    })
}
