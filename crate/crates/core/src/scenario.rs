//! Physical constants, pinhole packet parameters and the three presets.
//!
//! Everything is SI. A [`Scenario`] is an immutable value; derived
//! time-dependent packet quantities come from [`packet_state_at`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.05457180e-34;
/// Electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.10938356e-31;

/// Pinhole centre offset along x, m.
pub const PINHOLE_OFFSET: f64 = 5e-7;
/// Width of the narrow (−x₀) packet, m.
pub const NARROW_WIDTH: f64 = 7e-8;
pub const KX: f64 = 1.295698717e6;
pub const KY: f64 = 1.122938132e12;

/// Flight time to the detecting screen used for the intensity frames, s.
pub const SCREEN_TIME: f64 = 1.5e-9;
/// Flight time of the original electron biprism geometry (0.35 m), s.
pub const LONG_SCREEN_TIME: f64 = 2.6923e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub m: f64,
    /// ħ/m, m²/s.
    pub alpha: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, m: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
        }
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::param("m", format!("must be positive, got {m}")));
        }
        Ok(Self {
            hbar,
            m,
            alpha: hbar / m,
        })
    }

    pub fn electron() -> Self {
        Self::new(HBAR, ELECTRON_MASS).expect("electron constants are valid")
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::electron()
    }
}

/// Which pinhole a packet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Centred at −x₀; carries `exp(+i kx (x + x0))`.
    Negative,
    /// Centred at +x₀; carries `exp(−i kx (x − x0))` and the phase shift χ.
    Positive,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Negative, Side::Positive];

    pub fn label(self) -> &'static str {
        match self {
            Side::Negative => "neg",
            Side::Positive => "pos",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketParams {
    pub side: Side,
    /// Centre offset magnitude along x, m. The sign comes from `side`.
    pub x0: f64,
    /// Centre offset magnitude along z, m.
    pub z0: f64,
    /// Initial width, identical in x and z, m.
    pub dx0: f64,
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    /// Amplitude weight R̃ (cos²b or sin²b).
    pub amp: f64,
    /// Phase shift, rad. Only meaningful on the positive packet.
    pub chi: f64,
}

impl PacketParams {
    fn preset_default(side: Side, amp: f64, dx0: f64) -> Self {
        Self {
            side,
            x0: PINHOLE_OFFSET,
            z0: 0.0,
            dx0,
            kx: KX,
            ky: KY,
            kz: 0.0,
            amp,
            chi: 0.0,
        }
    }

    /// Signed x coordinate of the packet centre at t = 0.
    pub fn center_x(&self) -> f64 {
        match self.side {
            Side::Negative => -self.x0,
            Side::Positive => self.x0,
        }
    }

    pub fn center_z(&self) -> f64 {
        match self.side {
            Side::Negative => -self.z0,
            Side::Positive => self.z0,
        }
    }

    fn validate(&self) -> Result<()> {
        let name = |field: &str| format!("{field}_{}", self.side.label());
        if !(self.dx0.is_finite() && self.dx0 > 0.0) {
            return Err(Error::param(
                name("dx0"),
                format!("width must be positive, got {}", self.dx0),
            ));
        }
        if !(0.0..=1.0).contains(&self.amp) {
            return Err(Error::param(
                name("amp"),
                format!("must lie in [0, 1], got {}", self.amp),
            ));
        }
        for (field, v) in [
            ("x0", self.x0),
            ("z0", self.z0),
            ("kx", self.kx),
            ("ky", self.ky),
            ("kz", self.kz),
            ("chi", self.chi),
        ] {
            if !v.is_finite() {
                return Err(Error::param(name(field), "must be finite"));
            }
        }
        if self.side == Side::Negative && self.chi != 0.0 {
            return Err(Error::param(
                name("chi"),
                "the phase shift lives on the positive packet",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Equal widths, equal amplitudes.
    Ewea,
    /// Equal widths, unequal amplitudes (¼, ¾).
    Ewua,
    /// Unequal widths (1 : 2), equal amplitudes.
    Uwea,
    Custom,
}

impl ScenarioKind {
    pub const PRESETS: [ScenarioKind; 3] = [ScenarioKind::Ewea, ScenarioKind::Ewua, ScenarioKind::Uwea];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Ewea => "ewea",
            ScenarioKind::Ewua => "ewua",
            ScenarioKind::Uwea => "uwea",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Mixing angle b with R̃₁ = cos²b, R̃₂ = sin²b.
    pub fn mixing_angle(self) -> f64 {
        match self {
            ScenarioKind::Ewua => (1.0 / 4f64.sqrt()).acos(),
            _ => PI / 4.0,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ewea" => Ok(ScenarioKind::Ewea),
            "ewua" => Ok(ScenarioKind::Ewua),
            "uwea" => Ok(ScenarioKind::Uwea),
            "custom" => Ok(ScenarioKind::Custom),
            other => Err(Error::param("scenario", format!("unknown scenario `{other}`"))),
        }
    }
}

/// Optional replacements for individual packet parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PacketOverrides {
    pub x0: Option<f64>,
    pub z0: Option<f64>,
    pub dx0: Option<f64>,
    pub kx: Option<f64>,
    pub ky: Option<f64>,
    pub kz: Option<f64>,
    pub amp: Option<f64>,
    pub chi: Option<f64>,
}

impl PacketOverrides {
    fn apply(&self, p: &mut PacketParams) {
        let set = |dst: &mut f64, src: Option<f64>| {
            if let Some(v) = src {
                *dst = v;
            }
        };
        set(&mut p.x0, self.x0);
        set(&mut p.z0, self.z0);
        set(&mut p.dx0, self.dx0);
        set(&mut p.kx, self.kx);
        set(&mut p.ky, self.ky);
        set(&mut p.kz, self.kz);
        set(&mut p.amp, self.amp);
        set(&mut p.chi, self.chi);
    }

    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub hbar: Option<f64>,
    pub m: Option<f64>,
    pub neg: PacketOverrides,
    pub pos: PacketOverrides,
}

impl ScenarioOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub constants: PhysicalConstants,
    pub packet_neg: PacketParams,
    pub packet_pos: PacketParams,
}

impl Scenario {
    pub fn preset(kind: ScenarioKind) -> Self {
        make_scenario(kind, None).expect("presets are valid")
    }

    pub fn packet(&self, side: Side) -> &PacketParams {
        match side {
            Side::Negative => &self.packet_neg,
            Side::Positive => &self.packet_pos,
        }
    }

    /// y-velocity α·k_y shared by both packets.
    pub fn vy(&self) -> f64 {
        self.constants.alpha * self.packet_neg.ky
    }

    pub fn validate(&self) -> Result<()> {
        self.packet_neg.validate()?;
        self.packet_pos.validate()?;
        let (n, p) = (&self.packet_neg, &self.packet_pos);
        if (n.amp + p.amp - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "amp",
                format!(
                    "amplitude weights must sum to 1 (cos²b + sin²b), got {} + {}",
                    n.amp, p.amp
                ),
            ));
        }
        if n.x0 != p.x0 || n.z0 != p.z0 {
            return Err(Error::param("x0", "pinholes must be placed symmetrically at ±(x0, z0)"));
        }
        if n.ky != p.ky {
            return Err(Error::param("ky", "both packets must share the same y plane wave"));
        }
        Ok(())
    }
}

/// Builds a preset and applies overrides. `Custom` starts from EWEA values.
pub fn make_scenario(kind: ScenarioKind, overrides: Option<&ScenarioOverrides>) -> Result<Scenario> {
    let (amp_neg, amp_pos, dx_pos) = match kind {
        ScenarioKind::Ewea | ScenarioKind::Custom => (0.5, 0.5, NARROW_WIDTH),
        ScenarioKind::Ewua => (0.25, 0.75, NARROW_WIDTH),
        ScenarioKind::Uwea => (0.5, 0.5, 2.0 * NARROW_WIDTH),
    };
    let mut constants = PhysicalConstants::electron();
    let mut packet_neg = PacketParams::preset_default(Side::Negative, amp_neg, NARROW_WIDTH);
    let mut packet_pos = PacketParams::preset_default(Side::Positive, amp_pos, dx_pos);

    if let Some(o) = overrides {
        if o.hbar.is_some() || o.m.is_some() {
            constants = PhysicalConstants::new(o.hbar.unwrap_or(constants.hbar), o.m.unwrap_or(constants.m))?;
        }
        o.neg.apply(&mut packet_neg);
        o.pos.apply(&mut packet_pos);
    }

    let scenario = Scenario {
        kind,
        constants,
        packet_neg,
        packet_pos,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Time-dependent quantities of one spreading packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketState {
    pub t: f64,
    /// Δx²(t) = Δx₀² + α²t²/Δx₀², m².
    pub dx_t_sq: f64,
    /// Δx₁²(t) = Δx₀⁴ + α²t², m⁴.
    pub dx1_t_sq: f64,
    /// |A(t)| = (4π²/Δx₁²)^{1/2}.
    pub beta: f64,
    /// Half the argument of A(t), principal branch.
    pub theta: f64,
    pub vx: f64,
    pub vz: f64,
    pub omega_x: f64,
    pub omega_z: f64,
}

pub fn packet_state_at(scenario: &Scenario, side: Side, t: f64) -> PacketState {
    let p = scenario.packet(side);
    let alpha = scenario.constants.alpha;
    let w2 = p.dx0 * p.dx0;
    let at = alpha * t;
    let dx1_t_sq = w2 * w2 + at * at;
    PacketState {
        t,
        dx_t_sq: w2 + at * at / w2,
        dx1_t_sq,
        beta: (4.0 * PI * PI / dx1_t_sq).sqrt(),
        theta: 0.5 * (-at / w2).atan(),
        vx: alpha * p.kx,
        vz: alpha * p.kz,
        omega_x: alpha * p.kx * p.kx / 2.0,
        omega_z: alpha * p.kz * p.kz / 2.0,
    }
}
