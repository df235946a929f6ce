//! The mechanism zoo and its command-line identifiers.

mod amd;
mod lds3;
mod zoo;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use amd::{amd_h, amd_price, Amd};
pub use lds3::{run_lds3, Lds3};
pub use zoo::{price_mb, price_mmvip, price_set, price_vcg, MinimalBundle, Mmvip, SetMechanism, Vcg};

use crate::error::{Error, Result};
use crate::porf::{AllocationRule, CachedPrices, PriceFunction};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MechanismId {
    Vcg,
    Set,
    Mb,
    Mmvip,
    Lds3,
    Amd(Box<MechanismId>),
}

impl MechanismId {
    /// The price-based mechanisms, in table order.
    pub fn price_based() -> Vec<MechanismId> {
        vec![MechanismId::Vcg, MechanismId::Set, MechanismId::Mb, MechanismId::Mmvip]
    }

    pub fn is_price_based(&self) -> bool {
        match self {
            MechanismId::Lds3 => false,
            MechanismId::Amd(base) => base.is_price_based(),
            _ => true,
        }
    }

    /// A fresh (uncached) price function.
    pub fn price_function(&self) -> Result<Arc<dyn PriceFunction>> {
        Ok(match self {
            MechanismId::Vcg => Arc::new(Vcg),
            MechanismId::Set => Arc::new(SetMechanism),
            MechanismId::Mb => Arc::new(MinimalBundle),
            MechanismId::Mmvip => Arc::new(Mmvip),
            MechanismId::Lds3 => return Err(Error::NotPriceBased(self.to_string())),
            MechanismId::Amd(base) => Arc::new(Amd::new(base.price_function()?)),
        })
    }

    /// A price function whose rows are memoized by multiset of others.
    pub fn cached_price_function(&self) -> Result<Arc<dyn PriceFunction>> {
        Ok(Arc::new(CachedPrices::new(self.price_function()?)))
    }

    pub fn allocation_rule(&self) -> Result<Arc<dyn AllocationRule>> {
        match self {
            MechanismId::Lds3 => Ok(Arc::new(Lds3)),
            _ => Ok(Arc::new(self.price_function()?)),
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanismId::Vcg => f.write_str("vcg"),
            MechanismId::Set => f.write_str("set"),
            MechanismId::Mb => f.write_str("mb"),
            MechanismId::Mmvip => f.write_str("mmvip"),
            MechanismId::Lds3 => f.write_str("lds3"),
            MechanismId::Amd(base) => write!(f, "amd:{base}"),
        }
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(base) = s.strip_prefix("amd:") {
            let base: MechanismId = base.parse()?;
            if !base.is_price_based() {
                return Err(Error::NotPriceBased(base.to_string()));
            }
            return Ok(MechanismId::Amd(Box::new(base)));
        }
        match s.to_ascii_lowercase().as_str() {
            "vcg" => Ok(MechanismId::Vcg),
            "set" => Ok(MechanismId::Set),
            "mb" => Ok(MechanismId::Mb),
            "mmvip" => Ok(MechanismId::Mmvip),
            "lds3" => Ok(MechanismId::Lds3),
            _ => Err(Error::UnknownMechanism(s.to_string())),
        }
    }
}
