//! Typed network parameters, unit conventions, and validation.
//!
//! Unit convention used everywhere in this crate: powers and noises are in
//! linear milliwatts, distances in meters, densities per square meter, and
//! the path loss ||x - y||^(-alpha) is dimensionless at a 1 m reference.
//! Anything quoted in dBm is converted exactly once, at the boundary
//! (config files and CLI flags).

/// dBm to linear milliwatts.
pub fn dbm_to_mw(x_dbm: f64) -> f64 {
    10f64.powf(x_dbm / 10.0)
}

/// Linear milliwatts to dBm (caller guarantees x > 0).
pub fn mw_to_dbm(x_mw: f64) -> f64 {
    10.0 * x_mw.log10()
}

/// SWIPT receiver scheme: power splitting or time switching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ps,
    Ts,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ps => "ps",
            Scheme::Ts => "ts",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ps" => Ok(Scheme::Ps),
            "ts" => Ok(Scheme::Ts),
            other => Err(format!("unknown scheme '{other}' (expected ps or ts)")),
        }
    }
}

/// The leader's decision: scheme, SWIPT power p_s (mW), splitting
/// coefficient rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub scheme: Scheme,
    pub p_s: f64,
    pub rho: f64,
}

impl Strategy {
    pub fn new(scheme: Scheme, p_s: f64, rho: f64) -> Self {
        Strategy { scheme, p_s, rho }
    }
}

/// All physical and game parameters of the model. See the README for the
/// meaning and default of each field.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Density of D2D transmitters, per m^2.
    pub lambda_d: f64,
    /// Density of adversaries, per m^2.
    pub lambda_a: f64,
    /// Density of base stations, per m^2.
    pub lambda_b: f64,
    /// Density of cellular users, per m^2. Carried for completeness; no
    /// implemented formula uses it (cellular users enter the model only
    /// through the BS activity probability).
    pub lambda_u: f64,
    /// Probability a transmitter is active in a slot.
    pub p_active_d: f64,
    /// Probability a BS is active in a slot.
    pub p_active_b: f64,
    /// Cellular transmit power, mW.
    pub p_cell: f64,
    /// Path-loss exponent; must exceed 2 for the interference field to have
    /// a proper distribution.
    pub alpha: f64,
    /// Antenna count at transmitters.
    pub m_antennas: u32,
    /// D2D link distance, meters.
    pub r_link: f64,
    /// Noise power at the adversary, mW.
    pub noise_adv: f64,
    /// RF energy-harvesting circuit noise, mW.
    pub noise_rf: f64,
    /// Receiver additive noise, mW.
    pub noise_rx: f64,
    /// Packet size per Hz (bits).
    pub packet_bits: f64,
    /// Slot duration, seconds.
    pub slot_s: f64,
    /// Harvested-power threshold, mW.
    pub ph_threshold: f64,
    /// Detection-error slack: covertness requires FA+MD >= 1 - eps_covert.
    pub eps_covert: f64,
    /// Power-outage slack: requires P_PH >= 1 - eps_power.
    pub eps_power: f64,
    /// Reliability reward in the utility.
    pub u_reward: f64,
    /// Unit power price in the utility.
    pub u_price: f64,
    /// Lower bound of p_s, mW.
    pub ps_min: f64,
    /// Upper bound of p_s, mW.
    pub ps_max: f64,
    /// Lower bound of rho.
    pub rho_min: f64,
    /// Scale applied to p_s inside the utility cost term. The default 1e-3
    /// prices power in watts, which keeps utilities O(1) for mW powers;
    /// set to 1.0 to price in mW directly.
    pub u_power_scale: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            lambda_d: 0.1,
            lambda_a: 0.002,
            lambda_b: 0.01,
            lambda_u: 0.1,
            p_active_d: 0.5,
            p_active_b: 0.5,
            p_cell: dbm_to_mw(30.0),
            alpha: 4.0,
            m_antennas: 10,
            r_link: 1.0,
            noise_adv: dbm_to_mw(-90.0),
            noise_rf: dbm_to_mw(-90.0),
            noise_rx: dbm_to_mw(-90.0),
            packet_bits: 2.0,
            slot_s: 1.0,
            ph_threshold: dbm_to_mw(10.0),
            eps_covert: 0.01,
            eps_power: 0.01,
            u_reward: 1.0,
            u_price: 1.0,
            ps_min: 1.0,
            ps_max: dbm_to_mw(30.0),
            rho_min: 0.01,
            u_power_scale: 1e-3,
        }
    }
}

/// A single violated invariant: which field, and why.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Invalid(Vec<Violation>),
    Parse { line: usize, message: String },
    UnknownField(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(vs) => {
                write!(f, "invalid config:")?;
                for v in vs {
                    write!(f, " [{v}]")?;
                }
                Ok(())
            }
            ConfigError::Parse { line, message } => write!(f, "config parse error, line {line}: {message}"),
            ConfigError::UnknownField(k) => write!(f, "unknown config field '{k}'"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Power-valued fields: these take a `_dbm` or `_mw` suffix in config files.
const POWER_FIELDS: [&str; 7] = [
    "p_cell",
    "noise_adv",
    "noise_rf",
    "noise_rx",
    "ph_threshold",
    "ps_min",
    "ps_max",
];

impl NetworkConfig {
    /// Check every invariant; returns the full list of violations
    /// (empty means the config is valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut positive = |name: &'static str, x: f64| {
            if !(x > 0.0) || !x.is_finite() {
                v.push(Violation { field: name, message: format!("must be strictly positive, got {x}") });
            }
        };
        positive("lambda_d", self.lambda_d);
        positive("lambda_a", self.lambda_a);
        positive("lambda_b", self.lambda_b);
        positive("lambda_u", self.lambda_u);
        positive("p_cell", self.p_cell);
        positive("r_link", self.r_link);
        positive("noise_adv", self.noise_adv);
        positive("noise_rf", self.noise_rf);
        positive("noise_rx", self.noise_rx);
        positive("packet_bits", self.packet_bits);
        positive("slot_s", self.slot_s);
        positive("ph_threshold", self.ph_threshold);
        positive("ps_min", self.ps_min);
        positive("u_power_scale", self.u_power_scale);

        let mut unit = |name: &'static str, x: f64| {
            if !(0.0..=1.0).contains(&x) {
                v.push(Violation { field: name, message: format!("must lie in [0, 1], got {x}") });
            }
        };
        unit("p_active_d", self.p_active_d);
        unit("p_active_b", self.p_active_b);
        unit("eps_covert", self.eps_covert);
        unit("eps_power", self.eps_power);

        if !(self.alpha > 2.0) {
            v.push(Violation {
                field: "alpha",
                message: format!("alpha must exceed 2 for the interference field to converge, got {}", self.alpha),
            });
        }
        if self.m_antennas < 1 {
            v.push(Violation { field: "m_antennas", message: "must be at least 1".into() });
        }
        if self.m_antennas > 170 {
            v.push(Violation { field: "m_antennas", message: "must be at most 170 (factorial overflow)".into() });
        }
        if !(self.rho_min > 0.0 && self.rho_min < 1.0) {
            v.push(Violation {
                field: "rho_min",
                message: format!("rho lower bound must be positive and below 1, got {}", self.rho_min),
            });
        }
        if self.ps_min > 0.0 && !(self.ps_min < self.ps_max) {
            v.push(Violation {
                field: "ps_max",
                message: format!("ps_max ({}) must exceed ps_min ({})", self.ps_max, self.ps_min),
            });
        }
        if !(self.u_reward >= 0.0 && self.u_reward.is_finite()) {
            v.push(Violation { field: "u_reward", message: format!("must be finite and nonnegative, got {}", self.u_reward) });
        }
        if !(self.u_price >= 0.0 && self.u_price.is_finite()) {
            v.push(Violation { field: "u_price", message: format!("must be finite and nonnegative, got {}", self.u_price) });
        }
        v
    }

    /// `Ok(())` iff all invariants hold.
    pub fn validated(&self) -> Result<(), ConfigError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    /// Check a strategy against this config's bounds.
    pub fn validate_strategy(&self, s: &Strategy) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(s.p_s >= self.ps_min && s.p_s <= self.ps_max) {
            v.push(Violation {
                field: "p_s",
                message: format!("must lie in [{}, {}] mW, got {}", self.ps_min, self.ps_max, s.p_s),
            });
        }
        if !(s.rho >= self.rho_min && s.rho <= 1.0) {
            v.push(Violation {
                field: "rho",
                message: format!("must lie in [{}, 1], got {}", self.rho_min, s.rho),
            });
        }
        v
    }

    /// Set a field by config-file key. Power fields take `_dbm`/`_mw`
    /// suffixes; everything else uses the bare field name.
    pub fn set_field(&mut self, key: &str, value: f64) -> Result<(), ConfigError> {
        if let Some(base) = key.strip_suffix("_dbm") {
            if POWER_FIELDS.contains(&base) {
                return self.set_power(base, dbm_to_mw(value));
            }
            return Err(ConfigError::UnknownField(key.to_string()));
        }
        if let Some(base) = key.strip_suffix("_mw") {
            if POWER_FIELDS.contains(&base) {
                return self.set_power(base, value);
            }
            return Err(ConfigError::UnknownField(key.to_string()));
        }
        if POWER_FIELDS.contains(&key) {
            return Err(ConfigError::UnknownField(format!(
                "{key} is a power field; use {key}_dbm or {key}_mw"
            )));
        }
        match key {
            "lambda_d" => self.lambda_d = value,
            "lambda_a" => self.lambda_a = value,
            "lambda_b" => self.lambda_b = value,
            "lambda_u" => self.lambda_u = value,
            "p_active_d" => self.p_active_d = value,
            "p_active_b" => self.p_active_b = value,
            "alpha" => self.alpha = value,
            "m_antennas" => self.m_antennas = value as u32,
            "r_link" => self.r_link = value,
            "packet_bits" => self.packet_bits = value,
            "slot_s" => self.slot_s = value,
            "eps_covert" => self.eps_covert = value,
            "eps_power" => self.eps_power = value,
            "u_reward" => self.u_reward = value,
            "u_price" => self.u_price = value,
            "rho_min" => self.rho_min = value,
            "u_power_scale" => self.u_power_scale = value,
            other => return Err(ConfigError::UnknownField(other.to_string())),
        }
        Ok(())
    }

    fn set_power(&mut self, base: &str, mw: f64) -> Result<(), ConfigError> {
        match base {
            "p_cell" => self.p_cell = mw,
            "noise_adv" => self.noise_adv = mw,
            "noise_rf" => self.noise_rf = mw,
            "noise_rx" => self.noise_rx = mw,
            "ph_threshold" => self.ph_threshold = mw,
            "ps_min" => self.ps_min = mw,
            "ps_max" => self.ps_max = mw,
            other => return Err(ConfigError::UnknownField(other.to_string())),
        }
        Ok(())
    }

    /// Canonical dump of every field, used for config hashing and the CSV
    /// metadata line.
    pub fn canonical_string(&self) -> String {
        format!(
            "lambda_d={};lambda_a={};lambda_b={};lambda_u={};p_active_d={};p_active_b={};p_cell={};alpha={};m_antennas={};r_link={};noise_adv={};noise_rf={};noise_rx={};packet_bits={};slot_s={};ph_threshold={};eps_covert={};eps_power={};u_reward={};u_price={};ps_min={};ps_max={};rho_min={};u_power_scale={}",
            self.lambda_d, self.lambda_a, self.lambda_b, self.lambda_u,
            self.p_active_d, self.p_active_b, self.p_cell, self.alpha,
            self.m_antennas, self.r_link, self.noise_adv, self.noise_rf,
            self.noise_rx, self.packet_bits, self.slot_s, self.ph_threshold,
            self.eps_covert, self.eps_power, self.u_reward, self.u_price,
            self.ps_min, self.ps_max, self.rho_min, self.u_power_scale,
        )
    }

    /// FNV-1a hash of the canonical dump; stable across runs and platforms.
    pub fn hash_hex(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_string().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// Parse a flat key-value config file (`key = value`, `#` comments).
/// Missing keys keep their defaults; the result is validated.
impl std::str::FromStr for NetworkConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<NetworkConfig, ConfigError> {
        let mut cfg = NetworkConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, val)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: i + 1,
                    message: format!("expected 'key = value', got '{line}'"),
                });
            };
            let key = key.trim();
            let val: f64 = val.trim().parse().map_err(|e| ConfigError::Parse {
                line: i + 1,
                message: format!("bad number for '{key}': {e}"),
            })?;
            cfg.set_field(key, val).map_err(|e| match e {
                ConfigError::UnknownField(k) => ConfigError::Parse { line: i + 1, message: format!("unknown field '{k}'") },
                other => other,
            })?;
        }
        cfg.validated()?;
        Ok(cfg)
    }
}

/// A Monte Carlo probability estimate with its 95% Wilson half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub value: f64,
    pub trials: u64,
    pub ci_halfwidth: f64,
}

impl ProbabilityEstimate {
    /// Build from a hit count; attaches the Wilson 95% half-width.
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        assert!(trials > 0, "trials must be positive");
        let n = trials as f64;
        let p = hits as f64 / n;
        let z = 1.959_963_984_540_054_4_f64;
        let z2 = z * z;
        let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        ProbabilityEstimate { value: p, trials, ci_halfwidth: half }
    }

    /// Lower CI edge, clipped to [0, 1].
    pub fn lo(&self) -> f64 {
        (self.value - self.ci_halfwidth).max(0.0)
    }

    /// Upper CI edge, clipped to [0, 1].
    pub fn hi(&self) -> f64 {
        (self.value + self.ci_halfwidth).min(1.0)
    }
}
