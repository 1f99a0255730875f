use clap::ValueEnum;
use unital_nm::channels::{
    AffineMap, Coherence, ColoredNoise, ColoredNoiseParams, DynamicalMap, KrausChannel,
    OhmicDephasing,
};
use unital_nm::spectral::SpectralParams;
use unital_nm::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    OhmicDephasing,
    ColoredNoise,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::OhmicDephasing => "ohmic-dephasing",
            FamilyKind::ColoredNoise => "colored-noise",
        }
    }

    pub fn default_horizon(self) -> f64 {
        match self {
            FamilyKind::OhmicDephasing => 10.0,
            FamilyKind::ColoredNoise => 30.0,
        }
    }

    pub fn diagnostic_column(self) -> &'static str {
        match self {
            FamilyKind::OhmicDephasing => "gamma_rate",
            FamilyKind::ColoredNoise => "Lambda",
        }
    }
}

/// One parameter point of either family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub family: FamilyKind,
    pub s: Option<f64>,
    pub omega_c: Option<f64>,
    pub a_tau: Option<f64>,
}

pub enum Family {
    Ohmic(OhmicDephasing),
    Colored(ColoredNoise),
}

impl Family {
    pub fn build(p: &Point) -> Result<Self> {
        Ok(match p.family {
            FamilyKind::OhmicDephasing => Family::Ohmic(OhmicDephasing::new(SpectralParams::new(
                p.s.unwrap_or(1.0),
                p.omega_c.unwrap_or(1.0),
            )?)),
            FamilyKind::ColoredNoise => Family::Colored(ColoredNoise::new(
                ColoredNoiseParams::from_a_tau(p.a_tau.unwrap_or(1.0))?,
            )),
        })
    }

    /// γ(t) for the Ohmic family, Λ(t) for colored noise.
    pub fn diagnostic(&self, t: f64) -> Result<f64> {
        match self {
            Family::Ohmic(m) => m.gamma_rate(t),
            Family::Colored(m) => m.lambda(t),
        }
    }
}

impl DynamicalMap for Family {
    fn channel(&self, t: f64) -> Result<KrausChannel> {
        match self {
            Family::Ohmic(m) => m.channel(t),
            Family::Colored(m) => m.channel(t),
        }
    }

    fn coherence(&self, t: f64) -> Result<Option<Coherence>> {
        match self {
            Family::Ohmic(m) => m.coherence(t),
            Family::Colored(m) => m.coherence(t),
        }
    }

    fn affine(&self, t: f64) -> Result<AffineMap> {
        match self {
            Family::Ohmic(m) => m.affine(t),
            Family::Colored(m) => m.affine(t),
        }
    }
}
