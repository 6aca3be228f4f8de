//! Step-like potential models, physical units, and the branch-cut channel
//! momentum.
//!
//! A potential here is `V(x) = 0` for `x < a`, `V(x) = V0` for `x > b`, and
//! piecewise constant (plus delta spikes) on the finite support `[a, b]`.
//! Everything downstream — transfer matrices, Green's functions, the
//! integral-equation solvers — consumes these types.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working unit system. Defaults to atomic units `m = 1`, `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units { hbar: 1.0, mass: 1.0 }
    }
}

impl Units {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar > 0.0) || !(mass > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "units must be positive: hbar = {hbar}, mass = {mass}"
            )));
        }
        Ok(Units { hbar, mass })
    }

    /// Threshold momentum `p0 = (2 m V0)^(1/2)` of the right channel.
    pub fn threshold_momentum(&self, v0: f64) -> f64 {
        (2.0 * self.mass * v0).sqrt()
    }
}

/// One constant piece of the potential on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub v: f64,
}

/// A delta spike `strength * delta(x - x0)` with `x0` inside the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpike {
    pub x0: f64,
    pub strength: f64,
}

/// Relative tolerance used when checking that segments tile the support.
const TILE_TOL: f64 = 1e-12;

/// A step-like potential: asymptotic levels `(0, V0)` and structure on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    v0: f64,
    support_lo: f64,
    support_hi: f64,
    segments: Vec<Segment>,
    deltas: Vec<DeltaSpike>,
}

impl Potential {
    /// The pure step `V(x) = V0 theta(x)`: empty support `[0, 0]`, no structure.
    pub fn pure_step(v0: f64) -> Result<Self> {
        Self::new(v0, 0.0, 0.0, Vec::new(), Vec::new())
    }

    /// The pure step with a single delta spike at the origin, `V0 theta(x) + v1 delta(x)`.
    pub fn step_delta(v0: f64, v1: f64) -> Result<Self> {
        Self::new(v0, 0.0, 0.0, Vec::new(), vec![DeltaSpike { x0: 0.0, strength: v1 }])
    }

    pub fn new(
        v0: f64,
        support_lo: f64,
        support_hi: f64,
        mut segments: Vec<Segment>,
        deltas: Vec<DeltaSpike>,
    ) -> Result<Self> {
        if !v0.is_finite() || v0 < 0.0 {
            return Err(Error::InvalidPotential(format!("V0 must be >= 0, got {v0}")));
        }
        if !(support_lo <= 0.0) || !(support_hi >= 0.0) {
            return Err(Error::InvalidPotential(format!(
                "support must satisfy a <= 0 <= b, got [{support_lo}, {support_hi}]"
            )));
        }
        segments.sort_by(|s, t| s.lo.partial_cmp(&t.lo).unwrap());
        let scale = (support_hi - support_lo).max(1.0);
        if segments.is_empty() {
            if (support_hi - support_lo).abs() > TILE_TOL * scale {
                return Err(Error::InvalidPotential(
                    "segments must tile [a, b] exactly; empty segment list needs a = b".into(),
                ));
            }
        } else {
            let mut edge = support_lo;
            for s in &segments {
                if !s.v.is_finite() {
                    return Err(Error::InvalidPotential("segment height must be finite".into()));
                }
                if (s.lo - edge).abs() > TILE_TOL * scale || s.hi <= s.lo {
                    return Err(Error::InvalidPotential(format!(
                        "segments must be disjoint, sorted and tile [a, b]; gap or overlap at x = {edge}"
                    )));
                }
                edge = s.hi;
            }
            if (edge - support_hi).abs() > TILE_TOL * scale {
                return Err(Error::InvalidPotential(format!(
                    "segments end at {edge}, expected b = {support_hi}"
                )));
            }
        }
        for d in &deltas {
            if d.x0 < support_lo - TILE_TOL * scale || d.x0 > support_hi + TILE_TOL * scale {
                return Err(Error::InvalidPotential(format!(
                    "delta position {} outside support [{support_lo}, {support_hi}]",
                    d.x0
                )));
            }
            if !d.strength.is_finite() {
                return Err(Error::InvalidPotential("delta strength must be finite".into()));
            }
        }
        Ok(Potential { v0, support_lo, support_hi, segments, deltas })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    pub fn support_hi(&self) -> f64 {
        self.support_hi
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn deltas(&self) -> &[DeltaSpike] {
        &self.deltas
    }

    /// Pointwise value, excluding delta spikes: segment height inside
    /// `[a, b]`, `0` left of the support, `V0` right of it.
    pub fn evaluate(&self, x: f64) -> f64 {
        if x < self.support_lo {
            return 0.0;
        }
        if x > self.support_hi {
            return self.v0;
        }
        for s in &self.segments {
            if x >= s.lo && x <= s.hi {
                return s.v;
            }
        }
        // a = b support: convention V(a) = 0 (measure-zero point).
        if self.segments.is_empty() {
            return 0.0;
        }
        self.v0
    }

    /// All interior breakpoints where the integrand of a quadrature may lose
    /// smoothness: segment edges and delta positions, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = Vec::new();
        for s in &self.segments {
            pts.push(s.lo);
            pts.push(s.hi);
        }
        for d in &self.deltas {
            pts.push(d.x0);
        }
        pts.push(self.support_lo);
        pts.push(self.support_hi);
        pts.sort_by(|u, v| u.partial_cmp(v).unwrap());
        pts.dedup_by(|u, v| (*u - *v).abs() < 1e-14);
        pts
    }
}

/// The Hamiltonian partitionings `H = H_ref + V_resid` supported by the theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    /// `V_l = V`: free reference, vanishes for `x < a`.
    Left,
    /// `V_r = V - V0`: shifted-free reference, vanishes for `x > b`.
    Right,
    /// `V_s = V - V0 theta(x)`: pure-step reference, compact support.
    Step,
    /// `V_in = V - V0 F_-`: momentum-space non-local (negative-momentum projector).
    In,
    /// `V_out = V - V0 F_+`: momentum-space non-local (positive-momentum projector).
    Out,
}

/// A view of a potential through one partitioning.
///
/// `In`/`Out` views are non-local in momentum space; they carry no pointwise
/// value and may only be consumed by the Born module, never by the
/// integral-equation engine.
#[derive(Debug, Clone)]
pub struct PartitionedPotential {
    pub kind: PartitionKind,
    pub base: Potential,
}

impl PartitionedPotential {
    /// Pointwise residual-potential value (excluding delta spikes).
    ///
    /// Errors for the non-local `In`/`Out` kinds.
    pub fn local_value(&self, x: f64) -> Result<f64> {
        let v = self.base.evaluate(x);
        match self.kind {
            PartitionKind::Left => Ok(v),
            PartitionKind::Right => Ok(v - self.base.v0()),
            PartitionKind::Step => Ok(v - if x > 0.0 { self.base.v0() } else { 0.0 }),
            PartitionKind::In | PartitionKind::Out => Err(Error::Domain(
                "in/out residual potentials are non-local; no pointwise value".into(),
            )),
        }
    }
}

/// Builds the partitioned view, checking the preconditions of each kind.
pub fn partition(potential: &Potential, kind: PartitionKind) -> Result<PartitionedPotential> {
    if kind == PartitionKind::Step
        && !(potential.support_lo() <= 0.0 && potential.support_hi() >= 0.0)
    {
        return Err(Error::InvalidPotential(
            "step partitioning requires 0 in [a, b] so that V - V0 theta(x) has finite support".into(),
        ));
    }
    Ok(PartitionedPotential { kind, base: potential.clone() })
}

/// Open/closed classification of the right channel at energy label `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// `|p| > p0`: both asymptotic channels propagate.
    TwoOpen,
    /// `|p| < p0`: the right channel is evanescent.
    Evanescent,
}

/// The pair `(p, q(p))` with the branch convention of the scattering states:
/// `q^2 = p^2 - p0^2`, `sign(q) = sign(p)` above threshold, `q` positive
/// imaginary between the branch points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchMomentum {
    pub p: f64,
    pub q: Complex64,
    pub p0: f64,
    pub channel: Channel,
    /// `|p|` equals `p0` to machine precision; `q = 0` makes the
    /// `(p/q)^(1/2)` normalization singular and two-open-only formulas
    /// must reject this label.
    pub at_threshold: bool,
    pub units: Units,
    pub v0: f64,
}

impl BranchMomentum {
    /// Shared energy of the `p` and `q` channels, `E_p = p^2 / 2m`.
    pub fn energy(&self) -> f64 {
        self.p * self.p / (2.0 * self.units.mass)
    }

    pub fn is_open(&self) -> bool {
        self.channel == Channel::TwoOpen
    }

    /// Errors unless both channels are open and off threshold.
    pub fn require_open(&self) -> Result<()> {
        if self.at_threshold {
            return Err(Error::AtThreshold { p0: self.p0 });
        }
        match self.channel {
            Channel::TwoOpen => Ok(()),
            Channel::Evanescent => Err(Error::ChannelClosed { p: self.p.abs(), p0: self.p0 }),
        }
    }

    /// The branch momentum at the opposite label `-p` (same energy).
    pub fn negated(&self) -> BranchMomentum {
        BranchMomentum {
            p: -self.p,
            q: -self.q,
            p0: self.p0,
            channel: self.channel,
            at_threshold: self.at_threshold,
            units: self.units,
            v0: self.v0,
        }
    }
}

/// Computes `q(p)` for a real nonzero energy label `p`.
///
/// Above threshold `q` is real with the sign of `p`; between the branch
/// points it is positive imaginary (evanescent right channel). `p = 0` is
/// rejected: the formulas of the theory carry explicit `1/p` factors.
pub fn branch_momentum(p: f64, v0: f64, units: Units) -> Result<BranchMomentum> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::ZeroMomentum);
    }
    let p0 = units.threshold_momentum(v0);
    let disc = p * p - p0 * p0;
    let at_threshold = disc == 0.0 || disc.abs() < f64::EPSILON * p0 * p0;
    let (q, channel) = if disc >= 0.0 {
        (Complex64::new(p.signum() * disc.sqrt(), 0.0), Channel::TwoOpen)
    } else {
        (Complex64::new(0.0, (-disc).sqrt()), Channel::Evanescent)
    };
    Ok(BranchMomentum { p, q, p0, channel, at_threshold, units, v0 })
}

/// JSON ingestion format for potentials, the single format used by the CLI.
///
/// ```json
/// {"v0": 1.0, "a": -1.0, "b": 1.0,
///  "segments": [{"lo": -1.0, "hi": 1.0, "v": 3.0}],
///  "deltas": [{"x0": 0.0, "strength": 0.01}],
///  "units": {"hbar": 1.0, "mass": 1.0}}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub v0: f64,
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub segments: Vec<Segment>,
    #[serde(default)]
    pub deltas: Vec<DeltaSpike>,
    #[serde(default)]
    pub units: Option<Units>,
}

impl PotentialSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("potential JSON: {e}")))
    }

    pub fn build(&self) -> Result<(Potential, Units)> {
        let units = match self.units {
            Some(u) => Units::new(u.hbar, u.mass)?,
            None => Units::default(),
        };
        let pot = Potential::new(self.v0, self.a, self.b, self.segments.clone(), self.deltas.clone())?;
        Ok((pot, units))
    }

    pub fn from_potential(pot: &Potential, units: Units) -> Self {
        PotentialSpec {
            v0: pot.v0(),
            a: pot.support_lo(),
            b: pot.support_hi(),
            segments: pot.segments().to_vec(),
            deltas: pot.deltas().to_vec(),
            units: Some(units),
        }
    }
}
