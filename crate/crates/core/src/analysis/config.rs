use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::render::{RotationSet, ViewScheme};

/// Which point set the discrepancy is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sampling {
    /// The mesh vertices with their backprojected features.
    RawMesh,
    /// This many area-weighted surface samples with interpolated features.
    FeatureMesh(usize),
}

/// How each point is paired before comparing features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pairing {
    /// With the point nearest to its mirror image.
    Symmetric,
    /// With a uniformly random other point.
    Random,
}

/// One cell of the ablation grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct InvarianceConfig {
    pub scheme: ViewScheme,
    pub n_views: usize,
    pub rotations: RotationSet,
    pub sampling: Sampling,
    pub pairing: Pairing,
}

impl Default for InvarianceConfig {
    fn default() -> Self {
        InvarianceConfig {
            scheme: ViewScheme::Fibonacci,
            n_views: 42,
            rotations: RotationSet::R1,
            sampling: Sampling::FeatureMesh(10_000),
            pairing: Pairing::Symmetric,
        }
    }
}

impl InvarianceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_views == 0 {
            return Err(Error::InvalidArgument("n_views must be at least 1".into()));
        }
        if self.sampling == Sampling::FeatureMesh(0) {
            return Err(Error::InvalidArgument("feature-mesh sampling needs at least 1 point".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampling::RawMesh => f.write_str("rm"),
            Sampling::FeatureMesh(n) => write!(f, "fm:{n}"),
        }
    }
}

impl FromStr for Sampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "rm" || s == "raw" {
            return Ok(Sampling::RawMesh);
        }
        s.strip_prefix("fm:")
            .and_then(|n| n.parse().ok())
            .map(Sampling::FeatureMesh)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sampling `{s}` (use rm or fm:<points>)")))
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::Symmetric => "symmetric",
            Pairing::Random => "random",
        })
    }
}

impl FromStr for Pairing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" | "sym" => Ok(Pairing::Symmetric),
            "random" | "rand" => Ok(Pairing::Random),
            _ => Err(Error::InvalidArgument(format!("unknown pairing `{s}`"))),
        }
    }
}

impl fmt::Display for InvarianceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "scheme={} views={} rotations={} sampling={} pairing={}",
            self.scheme, self.n_views, self.rotations, self.sampling, self.pairing
        )
    }
}

/// Parses whitespace-separated `key=value` pairs; omitted keys keep their
/// defaults.
impl FromStr for InvarianceConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut cfg = InvarianceConfig::default();
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got `{tok}`")))?;
            match k {
                "scheme" => cfg.scheme = v.parse()?,
                "views" | "n_views" => {
                    cfg.n_views = v.parse().map_err(|_| Error::InvalidArgument(format!("bad view count `{v}`")))?
                }
                "rotations" => cfg.rotations = v.parse()?,
                "sampling" => cfg.sampling = v.parse()?,
                "pairing" => cfg.pairing = v.parse()?,
                _ => return Err(Error::InvalidArgument(format!("unknown grid key `{k}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a grid file: one configuration per line, `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<Vec<InvarianceConfig>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}
