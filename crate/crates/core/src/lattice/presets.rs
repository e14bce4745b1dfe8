//! The figure configurations as one-parameter families in the
//! system–reservoir coupling `t′`.

use serde::{Deserialize, Serialize};

use super::builders::{
    add_uniform_shift, build_lieb_tail, build_reservoir, build_ssh, build_three_site_tail, join,
    mirror_reflect,
};
use super::{LatticeGraph, Region};
use crate::error::{Error, Result};

/// A lattice parametrized by the coupling `t′`.
pub trait LatticeFamily: Sync {
    fn build(&self, t_prime: f64) -> Result<LatticeGraph>;
}

impl<F> LatticeFamily for F
where
    F: Fn(f64) -> Result<LatticeGraph> + Sync,
{
    fn build(&self, t_prime: f64) -> Result<LatticeGraph> {
        self(t_prime)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// System 1 coupled to an open-ended reservoir.
    SingleSystemReservoir,
    /// As above, reservoir terminated by an 11-site Lieb tail.
    ReservoirLieb,
    /// As above, reservoir end coupled to both ends of a three-site chain.
    ReservoirThreeSite,
    /// Systems 1 and 2 (mirror images) bridged by an odd reservoir.
    MirrorBridge,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::SingleSystemReservoir => "single_system_reservoir",
            Variant::ReservoirLieb => "reservoir_lieb",
            Variant::ReservoirThreeSite => "reservoir_three_site",
            Variant::MirrorBridge => "mirror_bridge",
        }
    }

    pub const ALL: [Variant; 4] = [
        Variant::SingleSystemReservoir,
        Variant::ReservoirLieb,
        Variant::ReservoirThreeSite,
        Variant::MirrorBridge,
    ];
}

/// Physical parameters in units of the reservoir coupling `t = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetParams {
    pub t_a: f64,
    pub t_b: f64,
    pub kappa0: f64,
    pub gamma: f64,
    pub system_sites: usize,
    pub reservoir_sites: usize,
    pub tail_sites: usize,
    /// Extra uniform loss applied to every site.
    pub shift: f64,
}

impl PresetParams {
    /// Caption parameters for a variant.
    pub fn defaults(variant: Variant) -> Self {
        Self {
            t_a: 0.2,
            t_b: 1.0,
            kappa0: 1.0,
            gamma: 2.0,
            system_sites: 9,
            reservoir_sites: if variant == Variant::MirrorBridge {
                11
            } else {
                10
            },
            tail_sites: match variant {
                Variant::ReservoirLieb => 11,
                Variant::ReservoirThreeSite => 3,
                _ => 0,
            },
            shift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub variant: Variant,
    pub params: PresetParams,
}

/// Reservoir (and inter-system) coupling; the energy unit.
const T: f64 = 1.0;

impl Preset {
    pub fn new(variant: Variant) -> Self {
        Self {
            variant,
            params: PresetParams::defaults(variant),
        }
    }

    pub fn with_params(variant: Variant, params: PresetParams) -> Result<Self> {
        let preset = Self { variant, params };
        preset.validate()?;
        Ok(preset)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        for (key, v) in [("gamma", p.gamma), ("kappa0", p.kappa0)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::semantic(
                    key,
                    format!("must be nonnegative, got {v}"),
                ));
            }
        }
        for (key, v) in [("t_a", p.t_a), ("t_b", p.t_b)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::semantic(key, format!("must be positive, got {v}")));
            }
        }
        if !p.shift.is_finite() {
            return Err(Error::semantic("shift", "must be finite"));
        }
        if p.system_sites.is_multiple_of(2) {
            return Err(Error::semantic("system_sites", "must be odd"));
        }
        if p.reservoir_sites < 5 {
            return Err(Error::semantic("reservoir_sites", "must be at least 5"));
        }
        match self.variant {
            Variant::MirrorBridge if p.reservoir_sites.is_multiple_of(2) => Err(Error::semantic(
                "reservoir_sites",
                "mirror bridge needs an odd reservoir",
            )),
            Variant::ReservoirLieb if p.tail_sites < 5 || !(p.tail_sites - 2).is_multiple_of(3) => {
                Err(Error::semantic(
                    "tail_sites",
                    "Lieb tail needs 3k + 2 sites",
                ))
            }
            Variant::ReservoirThreeSite if p.tail_sites != 3 => Err(Error::semantic(
                "tail_sites",
                "three-site tail has exactly 3 sites",
            )),
            _ => Ok(()),
        }
    }

    /// System 1: SSH chain oriented so that its weak `t_A` bond, and hence its
    /// edge mode, sits next to the reservoir.
    fn system1(&self) -> Result<LatticeGraph> {
        let p = &self.params;
        Ok(mirror_reflect(&build_ssh(
            p.system_sites,
            p.t_a,
            p.t_b,
            p.kappa0,
        )?))
    }

    fn system_reservoir(&self, t_prime: f64) -> Result<LatticeGraph> {
        let p = &self.params;
        let sys = self.system1()?;
        let res = build_reservoir(p.reservoir_sites, T, p.gamma, sys.last_site() + 1)?;
        let (a, b) = (sys.last_site(), res.first_site());
        join(sys, res, a, b, t_prime)
    }

    pub fn build(&self, t_prime: f64) -> Result<LatticeGraph> {
        self.validate()?;
        if !t_prime.is_finite() {
            return Err(Error::semantic("t_prime", "must be finite"));
        }
        let base = self.system_reservoir(t_prime)?;
        let end = base.last_site();
        let g = match self.variant {
            Variant::SingleSystemReservoir => base,
            Variant::ReservoirLieb => {
                join(base, build_lieb_tail(self.params.tail_sites, T)?, end, 1, T)?
            }
            Variant::ReservoirThreeSite => {
                join(base, build_three_site_tail(T)?, end, 1, T)?.with_bond(end, end + 3, T)?
            }
            Variant::MirrorBridge => {
                let sys2 = mirror_reflect(&self.system1()?).with_region(Region::System2);
                join(base, sys2, end, 1, t_prime)?
            }
        };
        Ok(if self.params.shift != 0.0 {
            add_uniform_shift(&g, self.params.shift)
        } else {
            g
        })
    }
}

impl LatticeFamily for Preset {
    fn build(&self, t_prime: f64) -> Result<LatticeGraph> {
        Preset::build(self, t_prime)
    }
}
