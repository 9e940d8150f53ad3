//! Named test systems and their provenance sidecar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vtm_core::netgen::{self, OpampParams};
use vtm_core::LinearSystem;

use crate::error::{read_file, FormatError, Result};
use crate::{mm, netlist};

/// Default Grid2d analog size.
pub const GRID2D_DEFAULT: [usize; 2] = [100, 100];
/// Default Grid3d analog size.
pub const GRID3D_DEFAULT: [usize; 3] = [30, 30, 30];

/// Where a system comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Grid2d {
        nx: usize,
        ny: usize,
        branch: f64,
        ground: f64,
        seed: u64,
    },
    Grid3d {
        nx: usize,
        ny: usize,
        nz: usize,
        branch: f64,
        ground: f64,
        seed: u64,
    },
    Opamp,
    Random {
        nodes: usize,
        seed: u64,
    },
    Netlist {
        file: PathBuf,
    },
    /// Matrix Market files; a missing right-hand side is seeded.
    File {
        matrix: PathBuf,
        rhs: Option<PathBuf>,
        seed: u64,
    },
}

impl Source {
    /// Parses `grid2d[:NXxNY]`, `grid3d[:NXxNYxNZ]`, `opamp`,
    /// `random[:N]`, a `.net` netlist or a `.mtx` matrix path.
    pub fn parse(spec: &str, seed: u64) -> Result<Self> {
        let (name, arg) = spec.split_once(':').map_or((spec, None), |(a, b)| (a, Some(b)));
        let dims = |arg: Option<&str>, want: usize| -> Result<Option<Vec<usize>>> {
            let Some(a) = arg else { return Ok(None) };
            let d: Vec<usize> = a
                .split('x')
                .map(|t| t.parse().map_err(|_| FormatError::Unsupported(format!("bad size '{a}' in '{spec}'"))))
                .collect::<Result<_>>()?;
            if d.len() != want {
                return Err(FormatError::Unsupported(format!("'{spec}' needs {want} sizes")));
            }
            Ok(Some(d))
        };
        let (b, g) = (netgen::DEFAULT_BRANCH_G, netgen::DEFAULT_GROUND_G);
        Ok(match name {
            "grid2d" => {
                let d = dims(arg, 2)?.unwrap_or(GRID2D_DEFAULT.to_vec());
                Self::Grid2d { nx: d[0], ny: d[1], branch: b, ground: g, seed }
            }
            "grid3d" => {
                let d = dims(arg, 3)?.unwrap_or(GRID3D_DEFAULT.to_vec());
                Self::Grid3d { nx: d[0], ny: d[1], nz: d[2], branch: b, ground: g, seed }
            }
            "opamp" if arg.is_none() => Self::Opamp,
            "random" => {
                let nodes = dims(arg, 1)?.map_or(500, |d| d[0]);
                Self::Random { nodes, seed }
            }
            _ if spec.ends_with(".mtx") => Self::File { matrix: spec.into(), rhs: None, seed },
            _ if spec.ends_with(".net") => Self::Netlist { file: spec.into() },
            _ => return Err(FormatError::Unsupported(format!("unknown system '{spec}'"))),
        })
    }

    /// Short tag used in reports and CSV rows.
    pub fn tag(&self) -> String {
        match self {
            Self::Grid2d { nx, ny, .. } => format!("grid2d-{nx}x{ny}"),
            Self::Grid3d { nx, ny, nz, .. } => format!("grid3d-{nx}x{ny}x{nz}"),
            Self::Opamp => "opamp".into(),
            Self::Random { nodes, .. } => format!("random-{nodes}"),
            Self::Netlist { file } | Self::File { matrix: file, .. } => {
                file.file_stem().map_or_else(|| file.display().to_string(), |s| s.to_string_lossy().into_owned())
            }
        }
    }

    pub fn build(&self) -> Result<LinearSystem> {
        let mut sys = match self {
            &Self::Grid2d { nx, ny, branch, ground, seed } => netgen::grid2d(nx, ny, branch, ground, seed)?,
            &Self::Grid3d { nx, ny, nz, branch, ground, seed } => netgen::grid3d(nx, ny, nz, branch, ground, seed)?,
            Self::Opamp => netgen::opamp_ring(&OpampParams::default())?,
            &Self::Random { nodes, seed } => netgen::random_resistor_network(nodes, 1.0, seed)?,
            Self::Netlist { file } => netgen::assemble(&netlist::parse_netlist(&read_file(file)?)?)?,
            Self::File { matrix, rhs, seed } => {
                let a = mm::read_matrix(&read_file(matrix)?)?;
                let b = match rhs {
                    Some(r) => mm::read_vector(&read_file(r)?)?,
                    None => netgen::seeded_rhs(a.nrows(), *seed),
                };
                // a generated file keeps its generator's tag and grid layout
                let meta = Meta::find(matrix);
                let mut s = LinearSystem::new(a, b, meta.as_ref().map_or_else(|| self.tag(), |m| m.tag.clone()))?;
                s.grid_dims = meta.and_then(|m| m.grid_dims);
                return Ok(s);
            }
        };
        sys.tag = self.tag();
        Ok(sys)
    }
}

/// Provenance sidecar written next to generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub source: Source,
    pub tag: String,
    pub n: usize,
    pub nnz: usize,
    pub symmetric: bool,
    pub grid_dims: Option<[usize; 3]>,
    pub matrix: String,
    pub rhs: String,
    pub generator: String,
}

pub const META_FILE: &str = "meta.json";

impl Meta {
    pub fn new(source: &Source, sys: &LinearSystem, matrix: &str, rhs: &str) -> Self {
        Self {
            source: source.clone(),
            tag: sys.tag.clone(),
            n: sys.n(),
            nnz: sys.a.nnz(),
            symmetric: sys.symmetric,
            grid_dims: sys.grid_dims,
            matrix: matrix.into(),
            rhs: rhs.into(),
            generator: format!("vtm {}", env!("CARGO_PKG_VERSION")),
        }
    }

    /// The sidecar in the directory of `matrix`, if it describes that file.
    pub fn find(matrix: &Path) -> Option<Self> {
        let dir = matrix.parent().unwrap_or(Path::new("."));
        let text = std::fs::read_to_string(dir.join(META_FILE)).ok()?;
        let meta: Self = serde_json::from_str(&text).ok()?;
        let name = matrix.file_name()?.to_string_lossy();
        (meta.matrix == name).then_some(meta)
    }
}
