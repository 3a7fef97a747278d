//! A path is stored as a directory holding one SRV CSV per point
//! (`tau_000.csv`, `tau_001.csv`, ...) and a `manifest.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{path_energy, path_length, GeodesicPath, Status};
use crate::curve::{read_srv_csv, write_srv_csv, Domain};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    segments: usize,
    domain: Domain,
    length: f64,
    energy: f64,
    iterations: usize,
    status: Status,
    energy_trace: Vec<f64>,
    points: Vec<String>,
}

impl GeodesicPath {
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut names = Vec::with_capacity(self.points.len());
        for (j, p) in self.points.iter().enumerate() {
            let name = format!("tau_{j:03}.csv");
            std::fs::write(dir.join(&name), write_srv_csv(p))?;
            names.push(name);
        }
        let manifest = Manifest {
            segments: self.segments(),
            domain: self.domain(),
            length: path_length(self),
            energy: path_energy(self),
            iterations: self.iterations,
            status: self.status,
            energy_trace: self.energy_trace.clone(),
            points: names,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), json + "\n")?;
        Ok(())
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let text = std::fs::read_to_string(dir.join("manifest.json"))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        if manifest.points.len() != manifest.segments + 1 {
            return Err(Error::Format(format!(
                "manifest lists {} points for {} segments",
                manifest.points.len(),
                manifest.segments
            )));
        }
        let points = manifest
            .points
            .iter()
            .map(|name| read_srv_csv(&std::fs::read_to_string(dir.join(name))?))
            .collect::<Result<Vec<_>>>()?;
        if points[0].domain() != manifest.domain {
            return Err(Error::Format("manifest domain does not match the points".into()));
        }
        GeodesicPath::with_trace(points, manifest.energy_trace, manifest.iterations, manifest.status)
    }
}
