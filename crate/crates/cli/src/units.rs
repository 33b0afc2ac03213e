//! Physical quantities written as `"<number> <unit>"` in config files and
//! stored in SI. Angular frequencies accept Hz-family units and are
//! multiplied by 2π.

use std::f64::consts::TAU;
use std::fmt;
use std::marker::PhantomData;

use electron_qc::constants::{BOLTZMANN, ELEMENTARY_CHARGE};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Angular,
    Time,
    Length,
    Temperature,
    Voltage,
    Rate,
    Field,
    Gradient,
    ThirdOrder,
    InverseArea,
    InverseQuartic,
    InverseSextic,
    Energy,
}

impl Dim {
    /// Canonical SI unit used when rendering.
    pub fn si(self) -> &'static str {
        match self {
            Dim::Angular => "rad/s",
            Dim::Time => "s",
            Dim::Length => "m",
            Dim::Temperature => "K",
            Dim::Voltage => "V",
            Dim::Rate => "1/s",
            Dim::Field => "T",
            Dim::Gradient => "T/m",
            Dim::ThirdOrder => "T/m^3",
            Dim::InverseArea => "m^-2",
            Dim::InverseQuartic => "m^-4",
            Dim::InverseSextic => "m^-6",
            Dim::Energy => "eV",
        }
    }

    fn scale(self, unit: &str) -> Option<f64> {
        let um = 1e-6;
        let s = match (self, unit) {
            (Dim::Angular, "rad/s") => 1.0,
            (Dim::Angular, "Hz") => TAU,
            (Dim::Angular, "kHz") => TAU * 1e3,
            (Dim::Angular, "MHz") => TAU * 1e6,
            (Dim::Angular, "GHz") => TAU * 1e9,
            (Dim::Time, "s") => 1.0,
            (Dim::Time, "ms") => 1e-3,
            (Dim::Time, "us" | "µs" | "μs") => 1e-6,
            (Dim::Time, "ns") => 1e-9,
            (Dim::Time, "ps") => 1e-12,
            (Dim::Length, "m") => 1.0,
            (Dim::Length, "mm") => 1e-3,
            (Dim::Length, "um" | "µm" | "μm") => um,
            (Dim::Length, "nm") => 1e-9,
            (Dim::Temperature, "K") => 1.0,
            (Dim::Temperature, "mK") => 1e-3,
            (Dim::Voltage, "V") => 1.0,
            (Dim::Voltage, "mV") => 1e-3,
            (Dim::Rate, "1/s" | "s^-1" | "quanta/s") => 1.0,
            (Dim::Field, "T") => 1.0,
            (Dim::Field, "mT") => 1e-3,
            (Dim::Gradient, "T/m") => 1.0,
            (Dim::Gradient, "T/um" | "T/µm" | "T/μm") => 1.0 / um,
            (Dim::ThirdOrder, "T/m^3") => 1.0,
            (Dim::ThirdOrder, "T/um^3" | "T/µm^3" | "T/μm^3") => um.powi(-3),
            (Dim::InverseArea, "m^-2") => 1.0,
            (Dim::InverseArea, "um^-2" | "µm^-2" | "μm^-2") => um.powi(-2),
            (Dim::InverseQuartic, "m^-4") => 1.0,
            (Dim::InverseQuartic, "um^-4" | "µm^-4" | "μm^-4") => um.powi(-4),
            (Dim::InverseSextic, "m^-6") => 1.0,
            (Dim::InverseSextic, "um^-6" | "µm^-6" | "μm^-6") => um.powi(-6),
            (Dim::Energy, "eV") => 1.0,
            (Dim::Energy, "meV") => 1e-3,
            (Dim::Energy, "K") => BOLTZMANN / ELEMENTARY_CHARGE,
            _ => return None,
        };
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitError(pub String);

impl fmt::Display for UnitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UnitError {}

/// Parses `"<number> <unit>"` into SI.
pub fn parse(text: &str, dim: Dim) -> Result<f64, UnitError> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| UnitError(format!("`{text}` has no unit; expected e.g. `1.0 {}`", dim.si())))?;
    let (num, unit) = (&text[..split], text[split..].trim());
    let value: f64 = num
        .parse()
        .map_err(|_| UnitError(format!("`{num}` is not a number")))?;
    let scale = dim
        .scale(unit)
        .ok_or_else(|| UnitError(format!("unit `{unit}` does not fit a quantity measured in {}", dim.si())))?;
    if !value.is_finite() {
        return Err(UnitError(format!("`{text}` is not finite")));
    }
    Ok(value * scale)
}

pub fn render(value: f64, dim: Dim) -> String {
    format!("{value:e} {}", dim.si())
}

pub trait Unit {
    const DIM: Dim;
}

macro_rules! units {
    ($($name:ident => $dim:ident),* $(,)?) => {
        $(
            #[derive(Debug, Clone, Copy, PartialEq)]
            pub struct $name;
            impl Unit for $name {
                const DIM: Dim = Dim::$dim;
            }
        )*
    };
}

units! {
    Angular => Angular,
    Time => Time,
    Length => Length,
    Temperature => Temperature,
    Voltage => Voltage,
    Rate => Rate,
    Field => Field,
    Gradient => Gradient,
    ThirdOrder => ThirdOrder,
    InverseArea => InverseArea,
    InverseQuartic => InverseQuartic,
    InverseSextic => InverseSextic,
    Energy => Energy,
}

/// SI value tagged with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<U> {
    pub si: f64,
    unit: PhantomData<U>,
}

impl<U: Unit> Quantity<U> {
    pub fn new(si: f64) -> Self {
        Self { si, unit: PhantomData }
    }
}

impl<U: Unit> Serialize for Quantity<U> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&render(self.si, U::DIM))
    }
}

impl<'de, U: Unit> Deserialize<'de> for Quantity<U> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text, U::DIM).map(Quantity::new).map_err(de::Error::custom)
    }
}
