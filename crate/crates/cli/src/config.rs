//! Run configuration: JSON schema, loading with field-path diagnostics, and
//! validation.

use dskg_core::kernels::classify_mass;
use dskg_core::semilinear::{expected_gamma, DecayProblem, Nonlinearity};
use dskg_core::transform::QuadratureSpec;
use dskg_core::wave::{Field, GridKind, Operator, SpatialGrid, MAX_CFL};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    SolveLinear,
    SolveSource,
    SolveSemilinear,
    VerifyKernels,
    VerifyEstimates,
    VerifyHuygens,
    VerifyAsymptotics,
    FitDecay,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::SolveLinear => "solve-linear",
            Subcommand::SolveSource => "solve-source",
            Subcommand::SolveSemilinear => "solve-semilinear",
            Subcommand::VerifyKernels => "verify-kernels",
            Subcommand::VerifyEstimates => "verify-estimates",
            Subcommand::VerifyHuygens => "verify-huygens",
            Subcommand::VerifyAsymptotics => "verify-asymptotics",
            Subcommand::FitDecay => "fit-decay",
        }
    }

    /// Whether the command integrates the equation in time.
    pub fn needs_solver(self) -> bool {
        !matches!(self, Subcommand::VerifyKernels | Subcommand::VerifyEstimates)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSpec {
    pub n: u32,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// c²Δ
    Laplacian {
        #[serde(default = "one")]
        c: f64,
    },
    /// ∂x(a∂x) with a(x) = a0 + a1 cos(2πx/L), periodic grids only.
    VarCoeff {
        a0: f64,
        #[serde(default)]
        a1: f64,
        #[serde(default = "default_cfl")]
        cfl: f64,
    },
}

impl Default for OperatorSpec {
    fn default() -> Self {
        OperatorSpec::Laplacian { c: 1.0 }
    }
}

impl OperatorSpec {
    pub fn build(&self, grid: SpatialGrid) -> Operator {
        match *self {
            OperatorSpec::Laplacian { c } => Operator::ConstantLaplacian { c },
            OperatorSpec::VarCoeff { a0, a1, cfl } => {
                let l = grid.l;
                let a = grid.points().iter().map(|x| a0 + a1 * (2.0 * PI * x / l).cos()).collect();
                Operator::VarCoeff1D { a, cfl }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKindSpec {
    Periodic,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kind: GridKindSpec,
    pub n: usize,
    pub l: f64,
}

impl GridSpec {
    pub fn build(&self) -> dskg_core::Result<SpatialGrid> {
        let kind = match self.kind {
            GridKindSpec::Periodic => GridKind::Periodic1D,
            GridKindSpec::Radial => GridKind::Radial3D,
        };
        SpatialGrid::new(kind, self.n, self.l)
    }
}

/// Named data profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Preset {
    /// amplitude · exp(−(x − center)²/(2 width²))
    GaussianBump {
        #[serde(default)]
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// amplitude · sin(2πkx/L) on periodic grids; on radial grids the
    /// profile amplitude · sin(πkr/L)/(πkr/L), a single mode of the odd
    /// extension of r·u.
    SineMode {
        k: u32,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Constant {
        #[serde(default = "one")]
        amplitude: f64,
    },
}

impl Preset {
    pub fn sample(&self, grid: SpatialGrid) -> Field {
        match *self {
            Preset::GaussianBump { center, width, amplitude } => {
                Field::from_fn(grid, |x| amplitude * (-(x - center).powi(2) / (2.0 * width * width)).exp())
            }
            Preset::SineMode { k, amplitude } => {
                let l = grid.l;
                match grid.kind {
                    GridKind::Periodic1D => Field::from_fn(grid, |x| amplitude * (2.0 * PI * k as f64 * x / l).sin()),
                    GridKind::Radial3D => Field::from_fn(grid, |r| {
                        let a = PI * k as f64 * r / l;
                        if a == 0.0 {
                            amplitude
                        } else {
                            amplitude * a.sin() / a
                        }
                    }),
                }
            }
            Preset::Constant { amplitude } => Field::constant(grid, amplitude),
        }
    }

    fn check(&self, field: &str, diags: &mut Vec<Diagnostic>) {
        match *self {
            Preset::GaussianBump { width, amplitude, center } => {
                if !(width > 0.0 && width.is_finite()) {
                    diags.push(Diagnostic::error(format!("{field}.width"), format!("width must be positive, got {width}")));
                }
                if !amplitude.is_finite() || !center.is_finite() {
                    diags.push(Diagnostic::error(field, "center and amplitude must be finite"));
                }
            }
            Preset::SineMode { k, amplitude } => {
                if k == 0 {
                    diags.push(Diagnostic::error(format!("{field}.k"), "mode index must be at least 1"));
                }
                if !amplitude.is_finite() {
                    diags.push(Diagnostic::error(format!("{field}.amplitude"), "amplitude must be finite"));
                }
            }
            Preset::Constant { amplitude } => {
                if !amplitude.is_finite() {
                    diags.push(Diagnostic::error(format!("{field}.amplitude"), "amplitude must be finite"));
                }
            }
        }
    }

    /// Radius of the region where the profile exceeds e^{−18} of its peak.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Preset::GaussianBump { width, .. } => Some(6.0 * width),
            _ => None,
        }
    }

    pub fn center(&self) -> f64 {
        match *self {
            Preset::GaussianBump { center, .. } => center,
            _ => 0.0,
        }
    }
}

/// Source f(x, b) = profile(x) · e^{−γ_rhs b}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub profile: Preset,
    pub gamma_rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub psi0: Option<Preset>,
    #[serde(default)]
    pub psi1: Option<Preset>,
    #[serde(default)]
    pub source: Option<SourceSpec>,
    /// Rescales the data so that ‖ψ0‖ + ‖ψ1‖ (or ‖f(·, 0)‖ without Cauchy
    /// data) equals ε in H_(s).
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl DataSpec {
    pub fn has_cauchy(&self) -> bool {
        self.psi0.is_some() || self.psi1.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub samples: usize,
}

/// Decay exponent of the weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaChoice {
    #[default]
    Auto,
    Value(f64),
}

impl Serialize for GammaChoice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            GammaChoice::Auto => s.serialize_str("auto"),
            GammaChoice::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for GammaChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(GammaChoice::Value(v)),
            Raw::Text(t) if t == "auto" => Ok(GammaChoice::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"auto\", got \"{t}\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub gamma: GammaChoice,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self { s: 2.0, gamma: GammaChoice::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelCheck {
    /// Coarse finite-difference step; the fine step is half of it.
    pub h: f64,
    pub points: usize,
}

impl Default for KernelCheck {
    fn default() -> Self {
        Self { h: 2e-2, points: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateCheck {
    pub a: Vec<f64>,
    pub mu: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub count: usize,
    pub tol: f64,
}

impl Default for EstimateCheck {
    fn default() -> Self {
        Self { a: vec![-0.5, 0.0], mu: vec![0.0, 1.0], z_min: 1.1, z_max: 1e3, count: 13, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HuygensCheck {
    /// Defaults to six widths of the Gaussian data.
    pub support_radius: Option<f64>,
    pub probe_radius: f64,
}

impl Default for HuygensCheck {
    fn default() -> Self {
        Self { support_radius: None, probe_radius: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsCheck {
    pub order: usize,
    /// First sample of the window; must satisfy e^{−t} ≤ 0.1.
    pub t_start: f64,
}

impl Default for AsymptoticsCheck {
    fn default() -> Self {
        Self { order: 1, t_start: 10f64.ln() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitCheck {
    /// Fit window; the late window [ln 10, T] when absent.
    pub window: Option<(f64, f64)>,
    /// Include the ln(1 + t) column; regime-dependent when absent.
    pub log_correction: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    pub kernels: KernelCheck,
    pub estimates: EstimateCheck,
    pub huygens: HuygensCheck,
    pub asymptotics: AsymptoticsCheck,
    pub fit: FitCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub subcommand: Option<Subcommand>,
    pub mass: MassSpec,
    #[serde(default)]
    pub operator: OperatorSpec,
    /// Required by every command that integrates in time.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub nonlinearity: Option<Nonlinearity>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub norm: NormConfig,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    0.5
}

fn default_s() -> f64 {
    2.0
}

/// Parse failure with the offending field path and source position.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config error at `{}`: {}", self.path, self.message)
        } else {
            write!(f, "config error at `{}` (line {}, column {}): {}", self.path, self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = (inner.line(), inner.column());
            // serde_json appends its own position; keep the bare message
            let message = inner.to_string();
            let message = match message.rfind(" at line ") {
                Some(i) => message[..i].to_string(),
                None => message,
            };
            ConfigError { path, line, column, message }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: ".".into(),
            line: 0,
            column: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, field: field.into(), message: message.into() }
    }

    fn warning(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, field: field.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

/// Renders small-denominator rationals as fractions.
pub fn pretty_number(v: f64) -> String {
    for d in 1..=12u32 {
        let num = v * d as f64;
        if (num - num.round()).abs() < 1e-9 {
            let num = num.round() as i64;
            return if d == 1 { format!("{num}") } else { format!("{num}/{d}") };
        }
    }
    format!("{v:.6}")
}

/// Every violation of `config` for `cmd`, errors and warnings alike.
pub fn validate(config: &RunConfig, cmd: Subcommand) -> Vec<Diagnostic> {
    let mut d = Vec::new();
    if let Some(declared) = config.subcommand {
        if declared != cmd {
            d.push(Diagnostic::error(
                "subcommand",
                format!("config is for `{}` but `{}` was requested", declared.name(), cmd.name()),
            ));
        }
    }

    let mp = match classify_mass(config.mass.n, config.mass.m) {
        Ok(mp) => Some(mp),
        Err(e) => {
            d.push(Diagnostic::error("mass", e.to_string()));
            None
        }
    };

    if !cmd.needs_solver() {
        check_verify_only(config, cmd, &mut d);
        return d;
    }

    let (Some(grid), Some(t)) = (config.grid, config.time) else {
        for (field, missing) in [("grid", config.grid.is_none()), ("time", config.time.is_none())] {
            if missing {
                d.push(Diagnostic::error(field, format!("missing section, required by {}", cmd.name())));
            }
        }
        return d;
    };
    if let Err(e) = grid.build() {
        d.push(Diagnostic::error("grid", e.to_string()));
    }
    match config.operator {
        OperatorSpec::Laplacian { c } => {
            if !(c > 0.0 && c.is_finite()) {
                d.push(Diagnostic::error("operator.c", format!("wave speed must be positive, got {c}")));
            }
        }
        OperatorSpec::VarCoeff { a0, a1, cfl } => {
            if grid.kind != GridKindSpec::Periodic {
                d.push(Diagnostic::error("operator", "variable coefficients need a periodic grid"));
            }
            if !(a0 - a1.abs() > 0.0) {
                d.push(Diagnostic::error("operator", "coefficient a0 + a1 cos(2πx/L) must stay positive"));
            }
            if !(cfl > 0.0 && cfl <= MAX_CFL) {
                d.push(Diagnostic::error("operator.cfl", format!("Courant number must lie in (0, {MAX_CFL}]")));
            }
            if matches!(cmd, Subcommand::VerifyAsymptotics) {
                d.push(Diagnostic::error("operator", "asymptotic coefficients need the spectral (constant-coefficient) path"));
            }
        }
    }

    if !(t.t_end > 0.0 && t.t_end.is_finite()) {
        d.push(Diagnostic::error("time.T", format!("T must be positive, got {}", t.t_end)));
    }
    if t.samples < 2 {
        d.push(Diagnostic::error("time.samples", "need at least 2 samples"));
    }
    if let Err(e) = config.quadrature.validate() {
        d.push(Diagnostic::error("quadrature", e.to_string()));
    }
    if !(config.norm.s >= 0.0) {
        d.push(Diagnostic::error("norm.s", format!("Sobolev index must be non-negative, got {}", config.norm.s)));
    }
    if let GammaChoice::Value(g) = config.norm.gamma {
        if !g.is_finite() {
            d.push(Diagnostic::error("norm.gamma", "gamma must be finite"));
        }
    }

    let data = &config.data;
    for (name, p) in [("data.psi0", data.psi0), ("data.psi1", data.psi1)] {
        if let Some(p) = p {
            p.check(name, &mut d);
        }
    }
    if let Some(src) = data.source {
        src.profile.check("data.source.profile", &mut d);
        if !(src.gamma_rhs > 0.0 && src.gamma_rhs.is_finite()) {
            d.push(Diagnostic::error("data.source.gamma_rhs", "source decay rate must be positive"));
        }
    }
    if let Some(eps) = data.epsilon {
        if !(eps > 0.0 && eps.is_finite()) {
            d.push(Diagnostic::error("data.epsilon", format!("ε must be positive, got {eps}")));
        }
    }
    match cmd {
        Subcommand::SolveSource => {
            if data.source.is_none() {
                d.push(Diagnostic::error("data.source", "solve-source needs a source preset"));
            }
        }
        Subcommand::SolveSemilinear => {
            if !data.has_cauchy() && data.source.is_none() {
                d.push(Diagnostic::error("data", "solve-semilinear needs Cauchy data or a source"));
            }
            if data.has_cauchy() && data.source.is_some() {
                d.push(Diagnostic::error("data", "solve-semilinear takes either Cauchy data or a source, not both"));
            }
            match &config.nonlinearity {
                None => d.push(Diagnostic::error("nonlinearity", "solve-semilinear needs a nonlinearity")),
                Some(nl) => {
                    if let Err(e) = nl.validate() {
                        d.push(Diagnostic::error("nonlinearity", e.to_string()));
                    }
                }
            }
            if !(config.picard.tol > 0.0) || config.picard.max_iter == 0 {
                d.push(Diagnostic::error("picard", "tolerance and iteration cap must be positive"));
            }
        }
        _ => {
            if !data.has_cauchy() {
                d.push(Diagnostic::error("data", format!("{} needs psi0 or psi1", cmd.name())));
            }
        }
    }

    if cmd == Subcommand::VerifyHuygens {
        let h = config.verify.huygens;
        let support = h.support_radius.or_else(|| {
            [data.psi0, data.psi1].iter().flatten().filter_map(|p| p.support_radius()).reduce(f64::max)
        });
        match support {
            None => d.push(Diagnostic::error(
                "verify.huygens.support_radius",
                "support radius needed for data without a Gaussian profile",
            )),
            Some(s) => {
                if !(s > 0.0 && h.probe_radius >= 0.0 && s + h.probe_radius < 1.0) {
                    d.push(Diagnostic::error(
                        "verify.huygens",
                        "support + probe radius must lie below the horizon distance 1",
                    ));
                }
            }
        }
    }
    if cmd == Subcommand::VerifyAsymptotics {
        let a = config.verify.asymptotics;
        if a.order == 0 {
            d.push(Diagnostic::error("verify.asymptotics.order", "expansion order must be at least 1"));
        }
        if (-a.t_start).exp() > 0.1 + 1e-12 {
            d.push(Diagnostic::error("verify.asymptotics.t_start", "window must start at t >= ln 10"));
        }
        if !(t.t_end > a.t_start) {
            d.push(Diagnostic::error("time.T", "T must exceed verify.asymptotics.t_start"));
        }
        if let Some(mp) = mp {
            if !mp.is_critical() {
                d.push(Diagnostic::warning("mass.m", "the expansion holds at the critical mass; m is ignored"));
            }
        }
    }

    if let (Some(mp), Some(nl)) = (mp, &config.nonlinearity) {
        if nl.validate().is_ok() {
            let problem = decay_problem(config);
            match expected_gamma(&mp, nl.alpha(), problem) {
                Ok(bound) => {
                    if let GammaChoice::Value(g) = config.norm.gamma {
                        if !bound.admits(g) {
                            d.push(Diagnostic::warning(
                                "norm.gamma",
                                format!("γ exceeds theorem bound {}", pretty_number(bound.value)),
                            ));
                        }
                    }
                    if bound.forbidden_interval_warning {
                        d.push(Diagnostic::warning("mass.m", "mass lies in the interval where zero ψ0 data is required"));
                    }
                }
                Err(e) => {
                    let sev = if config.norm.gamma == GammaChoice::Auto && cmd == Subcommand::SolveSemilinear {
                        Diagnostic::error
                    } else {
                        Diagnostic::warning
                    };
                    d.push(sev("mass.m", e.to_string()));
                }
            }
        }
    }
    d
}

fn check_verify_only(config: &RunConfig, cmd: Subcommand, d: &mut Vec<Diagnostic>) {
    match cmd {
        Subcommand::VerifyKernels => {
            let k = config.verify.kernels;
            if !(k.h > 0.0 && k.h <= 0.05) {
                d.push(Diagnostic::error("verify.kernels.h", "step must lie in (0, 0.05]"));
            }
            if k.points == 0 {
                d.push(Diagnostic::error("verify.kernels.points", "need at least one point"));
            }
        }
        Subcommand::VerifyEstimates => {
            let e = &config.verify.estimates;
            if e.a.is_empty() || e.a.iter().any(|a| !(*a > -1.0)) {
                d.push(Diagnostic::error("verify.estimates.a", "exponents must exceed -1"));
            }
            if e.mu.iter().any(|m| !(*m >= 0.0)) {
                d.push(Diagnostic::error("verify.estimates.mu", "μ must be non-negative"));
            }
            if !(e.z_min > 1.0 && e.z_max > e.z_min) {
                d.push(Diagnostic::error("verify.estimates", "need 1 < z_min < z_max"));
            }
            if e.count < 2 {
                d.push(Diagnostic::error("verify.estimates.count", "need at least 2 sweep points"));
            }
            if !(e.tol > 0.0) {
                d.push(Diagnostic::error("verify.estimates.tol", "tolerance must be positive"));
            }
        }
        _ => {}
    }
}

/// Decay problem implied by the data section.
pub fn decay_problem(config: &RunConfig) -> DecayProblem {
    match config.data.source {
        Some(src) if !config.data.has_cauchy() => DecayProblem::SourceDriven { gamma_rhs: src.gamma_rhs },
        _ => DecayProblem::CauchyData { gamma0: None, psi0_zero: config.data.psi0.is_none() },
    }
}
