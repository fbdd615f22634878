//! Steady 1-D open-channel forward model.
//!
//! The channel is a prismatic reach with rectangular cross-sections, a
//! piecewise-constant Strickler friction field and a power-law rating curve as
//! downstream boundary condition. Given a discharge `Q` and the Strickler
//! coefficient of the downstream friction zone, [`ChannelModel::solve`]
//! integrates the backwater-curve equation
//!
//! ```text
//! dh/da = (S0 - Sf) / (1 - Fr^2)
//! ```
//!
//! upstream from the rating-curve level with classical fixed-step RK4 and
//! extracts the water level at the observation stations. Only subcritical
//! flow is supported; the march aborts once `Fr^2` enters a guard band below
//! the critical value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity (m s^-2).
pub const GRAVITY: f64 = 9.81;

/// Guard band below criticality: the solver errors out once `Fr^2 >= 1 - EPS_CRITICAL`.
pub const EPS_CRITICAL: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("non-positive depth {depth:.6} m at abscissa {abscissa:.1} m")]
    NonPositiveDepth { abscissa: f64, depth: f64 },
    #[error("transcritical flow at abscissa {abscissa:.1} m (Fr^2 = {froude_sq:.4}, Q = {discharge:.1} m3/s)")]
    Transcritical {
        abscissa: f64,
        froude_sq: f64,
        discharge: f64,
    },
    #[error("non-positive discharge {0} m3/s")]
    NonPositiveDischarge(f64),
    #[error("non-positive Strickler coefficient {0}")]
    NonPositiveStrickler(f64),
    #[error("invalid channel definition: {0}")]
    InvalidDefinition(String),
    #[error("normal-depth solve failed: {0}")]
    NormalDepth(String),
}

/// Friction slope of the Manning–Strickler law for a rectangular section:
/// `Sf = Q^2 / (Ks^2 A^2 R^(4/3))` with `A = W h` and `R = A / (W + 2h)`.
pub fn friction_slope(
    discharge: f64,
    depth: f64,
    strickler: f64,
    width: f64,
) -> Result<f64, ChannelError> {
    if depth <= 0.0 {
        return Err(ChannelError::NonPositiveDepth {
            abscissa: f64::NAN,
            depth,
        });
    }
    if strickler <= 0.0 {
        return Err(ChannelError::NonPositiveStrickler(strickler));
    }
    let area = width * depth;
    let radius = area / (width + 2.0 * depth);
    Ok(discharge * discharge / (strickler * strickler * area * area * radius.powf(4.0 / 3.0)))
}

/// Squared Froude number of a rectangular section: `Fr^2 = Q^2 W / (g A^3) = Q^2 / (g W^2 h^3)`.
pub fn froude_squared(
    discharge: f64,
    depth: f64,
    width: f64,
    gravity: f64,
) -> Result<f64, ChannelError> {
    if depth <= 0.0 {
        return Err(ChannelError::NonPositiveDepth {
            abscissa: f64::NAN,
            depth,
        });
    }
    Ok(discharge * discharge / (gravity * width * width * depth * depth * depth))
}

/// Uniform-flow conveyance of a rectangular section at depth `h`:
/// `K(h) = Ks W h R(h)^(2/3)`, so that `Q = K(h) sqrt(S0)` at normal depth.
fn conveyance(depth: f64, strickler: f64, width: f64) -> f64 {
    let radius = width * depth / (width + 2.0 * depth);
    strickler * width * depth * radius.powf(2.0 / 3.0)
}

/// d(conveyance)/dh, used by the Newton iteration and the rating-curve calibration.
fn conveyance_gradient(depth: f64, strickler: f64, width: f64) -> f64 {
    let wetted = width + 2.0 * depth;
    let radius = width * depth / wetted;
    let dradius = width * width / (wetted * wetted);
    strickler * width * (radius.powf(2.0 / 3.0) + depth * (2.0 / 3.0) * radius.powf(-1.0 / 3.0) * dradius)
}

/// Normal depth of a uniform rectangular reach, solving
/// `Q = Ks W h R(h)^(2/3) sqrt(S0)` by Newton iteration with a
/// wide-channel starting guess.
pub fn normal_depth(
    discharge: f64,
    strickler: f64,
    width: f64,
    slope: f64,
) -> Result<f64, ChannelError> {
    if discharge <= 0.0 {
        return Err(ChannelError::NonPositiveDischarge(discharge));
    }
    if strickler <= 0.0 {
        return Err(ChannelError::NonPositiveStrickler(strickler));
    }
    if width <= 0.0 || slope <= 0.0 {
        return Err(ChannelError::NormalDepth(format!(
            "width and slope must be positive (W = {width}, S0 = {slope})"
        )));
    }
    let target = discharge / slope.sqrt();
    // Wide-channel estimate R ~ h.
    let mut h = (target / (strickler * width)).powf(0.6).max(1e-6);
    for _ in 0..100 {
        let f = conveyance(h, strickler, width) - target;
        let df = conveyance_gradient(h, strickler, width);
        let step = f / df;
        let next = (h - step).max(0.5 * h);
        if (next - h).abs() <= 1e-13 * next.max(1.0) {
            return Ok(next);
        }
        h = next;
    }
    Err(ChannelError::NormalDepth(format!(
        "Newton iteration did not converge (Q = {discharge}, Ks = {strickler})"
    )))
}

/// Sensitivity of the normal depth to discharge, `dh_n/dQ`, from the implicit
/// relation `K(h_n) sqrt(S0) = Q`.
pub fn normal_depth_discharge_gradient(
    normal_depth: f64,
    strickler: f64,
    width: f64,
    slope: f64,
) -> f64 {
    1.0 / (conveyance_gradient(normal_depth, strickler, width) * slope.sqrt())
}

/// Rectangular cross-section of the reach geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    /// Curvilinear abscissa (m).
    pub abscissa: f64,
    /// Bed elevation (m).
    pub bed_elevation: f64,
    /// Channel width (m).
    pub width: f64,
}

/// Smooth Gaussian perturbation of the bed profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BedFeature {
    /// Centre abscissa (m).
    pub center: f64,
    /// Gaussian standard width (m).
    pub std_width: f64,
    /// Signed crest amplitude (m); positive for a sill, negative for a pool.
    pub amplitude: f64,
}

impl BedFeature {
    fn elevation(&self, a: f64) -> f64 {
        let u = (a - self.center) / self.std_width;
        self.amplitude * (-0.5 * u * u).exp()
    }

    fn gradient(&self, a: f64) -> f64 {
        let u = (a - self.center) / self.std_width;
        -self.amplitude * u / self.std_width * (-0.5 * u * u).exp()
    }
}

/// Bed geometry, either an analytic synthetic profile or a table of surveyed
/// cross-sections interpolated linearly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BedProfile {
    Synthetic {
        /// Downstream end of the reach (m); the datum applies there.
        downstream_abscissa: f64,
        /// Bed elevation at the downstream end (m).
        datum: f64,
        /// Mean bed slope (m/m), positive for a bed falling downstream.
        mean_slope: f64,
        /// Uniform channel width (m).
        width: f64,
        /// Local bed perturbations.
        features: Vec<BedFeature>,
    },
    Sections(Vec<CrossSection>),
}

impl BedProfile {
    pub fn elevation(&self, a: f64) -> f64 {
        match self {
            BedProfile::Synthetic {
                downstream_abscissa,
                datum,
                mean_slope,
                features,
                ..
            } => {
                let base = datum + mean_slope * (downstream_abscissa - a);
                base + features.iter().map(|f| f.elevation(a)).sum::<f64>()
            }
            BedProfile::Sections(sections) => {
                let (lo, hi, t) = segment(sections, a);
                lo.bed_elevation + t * (hi.bed_elevation - lo.bed_elevation)
            }
        }
    }

    /// d(z_b)/da; the local channel slope is the negative of this.
    pub fn gradient(&self, a: f64) -> f64 {
        match self {
            BedProfile::Synthetic {
                mean_slope,
                features,
                ..
            } => -mean_slope + features.iter().map(|f| f.gradient(a)).sum::<f64>(),
            BedProfile::Sections(sections) => {
                let (lo, hi, _) = segment(sections, a);
                (hi.bed_elevation - lo.bed_elevation) / (hi.abscissa - lo.abscissa)
            }
        }
    }

    pub fn width(&self, a: f64) -> f64 {
        match self {
            BedProfile::Synthetic { width, .. } => *width,
            BedProfile::Sections(sections) => {
                let (lo, hi, t) = segment(sections, a);
                lo.width + t * (hi.width - lo.width)
            }
        }
    }
}

fn segment<'a>(sections: &'a [CrossSection], a: f64) -> (&'a CrossSection, &'a CrossSection, f64) {
    let n = sections.len();
    let idx = sections
        .partition_point(|s| s.abscissa <= a)
        .clamp(1, n - 1);
    let lo = &sections[idx - 1];
    let hi = &sections[idx];
    let t = (a - lo.abscissa) / (hi.abscissa - lo.abscissa);
    (lo, hi, t)
}

/// Piecewise-constant Strickler field over contiguous zones partitioning the reach.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrictionZones {
    /// Zone boundaries (m), strictly increasing, from upstream end to downstream end.
    boundaries: Vec<f64>,
    /// Strickler coefficient per zone (m^(1/3) s^-1); `strickler[i]` applies on
    /// `[boundaries[i], boundaries[i+1])`.
    strickler: Vec<f64>,
    /// Index of the zone whose Strickler value is an uncertain input and gets
    /// replaced per solve.
    uncertain_zone: usize,
}

impl FrictionZones {
    pub fn new(
        boundaries: Vec<f64>,
        strickler: Vec<f64>,
        uncertain_zone: usize,
    ) -> Result<Self, ChannelError> {
        if boundaries.len() != strickler.len() + 1 {
            return Err(ChannelError::InvalidDefinition(
                "friction zones need one more boundary than Strickler values".into(),
            ));
        }
        if boundaries.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ChannelError::InvalidDefinition(
                "friction-zone boundaries must be strictly increasing".into(),
            ));
        }
        if strickler.iter().any(|&k| k <= 0.0) {
            return Err(ChannelError::InvalidDefinition(
                "Strickler coefficients must be positive".into(),
            ));
        }
        if uncertain_zone >= strickler.len() {
            return Err(ChannelError::InvalidDefinition(format!(
                "uncertain zone index {uncertain_zone} out of range"
            )));
        }
        Ok(Self {
            boundaries,
            strickler,
            uncertain_zone,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn zone_count(&self) -> usize {
        self.strickler.len()
    }

    pub fn uncertain_zone(&self) -> usize {
        self.uncertain_zone
    }

    /// Strickler value at abscissa `a`, with the uncertain zone overridden.
    pub fn strickler_at(&self, a: f64, uncertain_value: f64) -> f64 {
        let idx = self
            .boundaries
            .partition_point(|&b| b <= a)
            .clamp(1, self.strickler.len())
            - 1;
        if idx == self.uncertain_zone {
            uncertain_value
        } else {
            self.strickler[idx]
        }
    }

    /// Nominal (calibrated) Strickler value of a zone.
    pub fn nominal(&self, zone: usize) -> f64 {
        self.strickler[zone]
    }
}

/// Monotone power-law rating curve `h_out = c Q^e` imposed at the downstream end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingCurve {
    pub coefficient: f64,
    pub exponent: f64,
}

impl RatingCurve {
    /// Calibrate `c` and `e` so that the curve passes through the normal depth
    /// of a uniform sub-reach at `discharge` and matches its sensitivity
    /// `dh_n/dQ` there.
    pub fn calibrated_to_normal_depth(
        discharge: f64,
        strickler: f64,
        width: f64,
        slope: f64,
    ) -> Result<Self, ChannelError> {
        let hn = normal_depth(discharge, strickler, width, slope)?;
        let dh_dq = normal_depth_discharge_gradient(hn, strickler, width, slope);
        let exponent = discharge * dh_dq / hn;
        let coefficient = hn / discharge.powf(exponent);
        Ok(Self {
            coefficient,
            exponent,
        })
    }

    /// Downstream water depth for a given discharge.
    pub fn level(&self, discharge: f64) -> f64 {
        self.coefficient * discharge.powf(self.exponent)
    }
}

/// Boundary conditions: nominal upstream discharge (used for calibration and
/// reporting) and the downstream rating curve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub nominal_discharge: f64,
    pub rating_curve: RatingCurve,
}

/// Immutable steady-flow channel model. Solves are pure functions of
/// `(model, Q, Ks)` and safe to run concurrently.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelModel {
    upstream_abscissa: f64,
    downstream_abscissa: f64,
    bed: BedProfile,
    friction: FrictionZones,
    bc: BoundaryConditions,
    gravity: f64,
    grid_step: f64,
    stations: Vec<f64>,
}

impl ChannelModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        upstream_abscissa: f64,
        downstream_abscissa: f64,
        bed: BedProfile,
        friction: FrictionZones,
        bc: BoundaryConditions,
        gravity: f64,
        grid_step: f64,
        station_count: usize,
    ) -> Result<Self, ChannelError> {
        let length = downstream_abscissa - upstream_abscissa;
        if length <= 0.0 {
            return Err(ChannelError::InvalidDefinition(
                "downstream abscissa must exceed upstream abscissa".into(),
            ));
        }
        if gravity <= 0.0 {
            return Err(ChannelError::InvalidDefinition("gravity must be positive".into()));
        }
        if grid_step <= 0.0 {
            return Err(ChannelError::InvalidDefinition("grid step must be positive".into()));
        }
        let steps = length / grid_step;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(ChannelError::InvalidDefinition(format!(
                "grid step {grid_step} m does not divide the reach length {length} m"
            )));
        }
        if station_count < 2 {
            return Err(ChannelError::InvalidDefinition(
                "at least two stations are required".into(),
            ));
        }
        let tol = 1e-6 * length;
        if (friction.boundaries[0] - upstream_abscissa).abs() > tol
            || (friction.boundaries[friction.boundaries.len() - 1] - downstream_abscissa).abs()
                > tol
        {
            return Err(ChannelError::InvalidDefinition(
                "friction zones must partition the reach".into(),
            ));
        }
        if let BedProfile::Sections(sections) = &bed {
            if sections.len() < 2 {
                return Err(ChannelError::InvalidDefinition(
                    "at least two cross-sections are required".into(),
                ));
            }
            if sections.windows(2).any(|w| w[1].abscissa <= w[0].abscissa) {
                return Err(ChannelError::InvalidDefinition(
                    "cross-section abscissas must be strictly increasing".into(),
                ));
            }
            if sections.iter().any(|s| s.width <= 0.0) {
                return Err(ChannelError::InvalidDefinition(
                    "cross-section widths must be positive".into(),
                ));
            }
            if sections[0].abscissa > upstream_abscissa + tol
                || sections[sections.len() - 1].abscissa < downstream_abscissa - tol
            {
                return Err(ChannelError::InvalidDefinition(
                    "cross-sections must cover the reach".into(),
                ));
            }
        }
        if bc.rating_curve.coefficient <= 0.0 || bc.rating_curve.exponent <= 0.0 {
            return Err(ChannelError::InvalidDefinition(
                "rating curve must be strictly increasing".into(),
            ));
        }
        // Stations sit strictly inside the reach at cell centres; a station on
        // the downstream boundary would be pinned to the rating curve and
        // carry no friction signal at all.
        let stations = (0..station_count)
            .map(|i| upstream_abscissa + length * (i as f64 + 0.5) / station_count as f64)
            .collect();
        Ok(Self {
            upstream_abscissa,
            downstream_abscissa,
            bed,
            friction,
            bc,
            gravity,
            grid_step,
            stations,
        })
    }

    pub fn upstream_abscissa(&self) -> f64 {
        self.upstream_abscissa
    }

    pub fn downstream_abscissa(&self) -> f64 {
        self.downstream_abscissa
    }

    pub fn gravity(&self) -> f64 {
        self.gravity
    }

    pub fn grid_step(&self) -> f64 {
        self.grid_step
    }

    pub fn bed(&self) -> &BedProfile {
        &self.bed
    }

    pub fn friction(&self) -> &FrictionZones {
        &self.friction
    }

    pub fn boundary_conditions(&self) -> &BoundaryConditions {
        &self.bc
    }

    /// Observation stations, evenly spaced from the upstream to the downstream end.
    pub fn stations(&self) -> &[f64] {
        &self.stations
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    /// Zero-based index of the station closest to abscissa `a`.
    pub fn station_nearest(&self, a: f64) -> usize {
        self.stations
            .iter()
            .enumerate()
            .min_by(|(_, x), (_, y)| {
                (*x - a).abs().partial_cmp(&(*y - a).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    }

    /// Copy of the model with a different raster resolution, for convergence studies.
    pub fn with_grid_step(&self, grid_step: f64) -> Result<Self, ChannelError> {
        let mut model = self.clone();
        let length = model.downstream_abscissa - model.upstream_abscissa;
        let steps = length / grid_step;
        if (steps - steps.round()).abs() > 1e-6 {
            return Err(ChannelError::InvalidDefinition(format!(
                "grid step {grid_step} m does not divide the reach length {length} m"
            )));
        }
        model.grid_step = grid_step;
        Ok(model)
    }

    /// Integrate the backwater curve for the input pair `(Q, Ks_uncertain)`.
    ///
    /// The march starts at the rating-curve level `RC(Q)` at the downstream end
    /// and proceeds upstream with fixed-step RK4. Stations and friction-zone
    /// boundaries are inserted as grid nodes so station values are exact RK4
    /// states and every step sees a single Strickler value.
    pub fn solve(&self, discharge: f64, uncertain_strickler: f64) -> Result<BackwaterSolution, ChannelError> {
        if discharge <= 0.0 {
            return Err(ChannelError::NonPositiveDischarge(discharge));
        }
        if uncertain_strickler <= 0.0 {
            return Err(ChannelError::NonPositiveStrickler(uncertain_strickler));
        }

        let nodes = self.march_nodes();
        let h_out = self.bc.rating_curve.level(discharge);
        if h_out <= 0.0 {
            return Err(ChannelError::NonPositiveDepth {
                abscissa: self.downstream_abscissa,
                depth: h_out,
            });
        }

        let mut depths = Vec::with_capacity(nodes.len());
        depths.push(h_out);
        let mut h = h_out;
        for pair in nodes.windows(2) {
            let (a_from, a_to) = (pair[0], pair[1]);
            let da = a_to - a_from;
            let ks = self
                .friction
                .strickler_at(0.5 * (a_from + a_to), uncertain_strickler);
            let k1 = self.slope_rhs(a_from, h, discharge, ks)?;
            let k2 = self.slope_rhs(a_from + 0.5 * da, h + 0.5 * da * k1, discharge, ks)?;
            let k3 = self.slope_rhs(a_from + 0.5 * da, h + 0.5 * da * k2, discharge, ks)?;
            let k4 = self.slope_rhs(a_to, h + da * k3, discharge, ks)?;
            h += da / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if h <= 0.0 {
                return Err(ChannelError::NonPositiveDepth {
                    abscissa: a_to,
                    depth: h,
                });
            }
            depths.push(h);
        }

        // Marched downstream-to-upstream; store ascending in abscissa.
        let mut abscissas = nodes;
        abscissas.reverse();
        depths.reverse();
        let bed_elevations: Vec<f64> = abscissas.iter().map(|&a| self.bed.elevation(a)).collect();

        let station_depths: Vec<f64> = self
            .stations
            .iter()
            .map(|&s| {
                let idx = abscissas
                    .binary_search_by(|a| a.partial_cmp(&s).unwrap())
                    .unwrap_or_else(|i| i.min(abscissas.len() - 1));
                depths[idx]
            })
            .collect();
        let station_levels: Vec<f64> = self
            .stations
            .iter()
            .zip(&station_depths)
            .map(|(&s, &d)| self.bed.elevation(s) + d)
            .collect();

        Ok(BackwaterSolution {
            discharge,
            abscissas,
            depths,
            bed_elevations,
            station_depths,
            station_levels,
        })
    }

    /// Water elevation at the stations for the input pair, as consumed by the
    /// surrogate pipeline.
    pub fn solve_levels(&self, discharge: f64, uncertain_strickler: f64) -> Result<Vec<f64>, ChannelError> {
        Ok(self.solve(discharge, uncertain_strickler)?.station_levels)
    }

    fn slope_rhs(&self, a: f64, h: f64, discharge: f64, ks: f64) -> Result<f64, ChannelError> {
        if h <= 0.0 {
            return Err(ChannelError::NonPositiveDepth { abscissa: a, depth: h });
        }
        let width = self.bed.width(a);
        let bed_slope = -self.bed.gradient(a);
        let sf = friction_slope(discharge, h, ks, width)?;
        let fr2 = froude_squared(discharge, h, width, self.gravity)?;
        if fr2 >= 1.0 - EPS_CRITICAL {
            return Err(ChannelError::Transcritical {
                abscissa: a,
                froude_sq: fr2,
                discharge,
            });
        }
        Ok((bed_slope - sf) / (1.0 - fr2))
    }

    /// Marching grid, descending from the downstream end: the uniform raster
    /// plus stations and friction-zone boundaries.
    fn march_nodes(&self) -> Vec<f64> {
        let length = self.downstream_abscissa - self.upstream_abscissa;
        let steps = (length / self.grid_step).round() as usize;
        let mut nodes: Vec<f64> = (0..=steps)
            .map(|k| self.downstream_abscissa - k as f64 * self.grid_step)
            .collect();
        nodes.extend(self.stations.iter().copied());
        nodes.extend(
            self.friction
                .boundaries
                .iter()
                .copied()
                .filter(|&b| b > self.upstream_abscissa && b < self.downstream_abscissa),
        );
        nodes.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let tol = 1e-6 * self.grid_step;
        nodes.dedup_by(|x, y| (*x - *y).abs() <= tol);
        nodes
    }

    /// Geometry dump with header `abscissa_km,bed_elevation_m,width_m,Ks`,
    /// one row per raster node (nominal Strickler values).
    pub fn geometry_csv(&self) -> String {
        let length = self.downstream_abscissa - self.upstream_abscissa;
        let steps = (length / self.grid_step).round() as usize;
        let mut out = String::from("abscissa_km,bed_elevation_m,width_m,Ks\n");
        for k in 0..=steps {
            let a = self.upstream_abscissa + k as f64 * self.grid_step;
            let ks = self
                .friction
                .strickler_at(a, self.friction.nominal(self.friction.uncertain_zone));
            out.push_str(&format!(
                "{},{},{},{}\n",
                a / 1000.0,
                self.bed.elevation(a),
                self.bed.width(a),
                ks
            ));
        }
        out
    }
}

/// Water-surface profile produced by one backwater solve.
#[derive(Clone, Debug)]
pub struct BackwaterSolution {
    /// The single discharge holding over the whole reach (m3/s).
    pub discharge: f64,
    /// Grid abscissas, ascending (m).
    pub abscissas: Vec<f64>,
    /// Water depth at each grid abscissa (m).
    pub depths: Vec<f64>,
    /// Bed elevation at each grid abscissa (m).
    pub bed_elevations: Vec<f64>,
    /// Water depth at the observation stations (m).
    pub station_depths: Vec<f64>,
    /// Water elevation `z_b + h` at the observation stations (m).
    pub station_levels: Vec<f64>,
}

impl BackwaterSolution {
    /// Water elevation `z_b + h` along the whole grid.
    pub fn surface_elevations(&self) -> Vec<f64> {
        self.depths
            .iter()
            .zip(&self.bed_elevations)
            .map(|(h, z)| h + z)
            .collect()
    }
}

/// Parameters of the built-in synthetic reach, a stand-in for a gauged river
/// stretch with three friction zones and a heterogeneous mid-reach bed.
///
/// All abscissas are kilometres; the model itself works in metres.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticChannelSpec {
    pub upstream_km: f64,
    pub downstream_km: f64,
    /// Mean bed slope (m/km).
    pub mean_slope_m_per_km: f64,
    pub width_m: f64,
    /// Bed elevation at the downstream end (m).
    pub datum_m: f64,
    /// Friction-zone boundaries (km), upstream to downstream.
    pub zone_boundaries_km: Vec<f64>,
    /// Nominal Strickler coefficient per zone.
    pub strickler: Vec<f64>,
    /// Zero-based index of the zone driven by the uncertain Strickler input.
    pub uncertain_zone: usize,
    /// Bed features as (centre km, std width km, amplitude m).
    pub bed_features: Vec<(f64, f64, f64)>,
    /// Discharge at which the rating curve is calibrated (m3/s).
    pub nominal_discharge: f64,
    pub gravity: f64,
    pub grid_step_m: f64,
    pub station_count: usize,
}

impl Default for SyntheticChannelSpec {
    fn default() -> Self {
        Self {
            upstream_km: 13.0,
            downstream_km: 62.0,
            mean_slope_m_per_km: 0.33,
            width_m: 250.0,
            datum_m: 0.0,
            zone_boundaries_km: vec![13.0, 25.0, 36.0, 62.0],
            strickler: vec![38.0, 38.0, 38.0],
            uncertain_zone: 2,
            bed_features: vec![(34.2, 0.9, -1.5), (36.8, 0.9, 1.5)],
            nominal_discharge: 4031.0,
            gravity: GRAVITY,
            grid_step_m: 50.0,
            station_count: 14,
        }
    }
}

impl SyntheticChannelSpec {
    pub fn build(&self) -> Result<ChannelModel, ChannelError> {
        let slope = self.mean_slope_m_per_km / 1000.0;
        let bed = BedProfile::Synthetic {
            downstream_abscissa: self.downstream_km * 1000.0,
            datum: self.datum_m,
            mean_slope: slope,
            width: self.width_m,
            features: self
                .bed_features
                .iter()
                .map(|&(c, w, amp)| BedFeature {
                    center: c * 1000.0,
                    std_width: w * 1000.0,
                    amplitude: amp,
                })
                .collect(),
        };
        let friction = FrictionZones::new(
            self.zone_boundaries_km.iter().map(|&b| b * 1000.0).collect(),
            self.strickler.clone(),
            self.uncertain_zone,
        )?;
        // The rating curve mirrors a gauged downstream station: normal depth of
        // the terminal uniform sub-reach at the nominal discharge, with matching
        // discharge sensitivity.
        let terminal_ks = self.strickler[self.strickler.len() - 1];
        let rating_curve = RatingCurve::calibrated_to_normal_depth(
            self.nominal_discharge,
            terminal_ks,
            self.width_m,
            slope,
        )?;
        ChannelModel::new(
            self.upstream_km * 1000.0,
            self.downstream_km * 1000.0,
            bed,
            friction,
            BoundaryConditions {
                nominal_discharge: self.nominal_discharge,
                rating_curve,
            },
            self.gravity,
            self.grid_step_m,
            self.station_count,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn friction_slope_vanishes_with_discharge() {
        let sf = friction_slope(0.0, 2.0, 30.0, 100.0).unwrap();
        assert_eq!(sf, 0.0);
    }

    #[test]
    fn friction_slope_scales_inverse_square_of_strickler() {
        let sf1 = friction_slope(250.0, 3.0, 20.0, 120.0).unwrap();
        let sf2 = friction_slope(250.0, 3.0, 40.0, 120.0).unwrap();
        assert_relative_eq!(sf2, sf1 / 4.0, max_relative = 1e-14);
    }

    #[test]
    fn friction_slope_closed_form_value() {
        // Q=200, h=2, Ks=30, W=100: A=200, R=200/104.
        let expected = 200.0_f64.powi(2)
            / (30.0_f64.powi(2) * 200.0_f64.powi(2) * (200.0_f64 / 104.0).powf(4.0 / 3.0));
        let sf = friction_slope(200.0, 2.0, 30.0, 100.0).unwrap();
        assert_relative_eq!(sf, expected, max_relative = 1e-14);
    }

    #[test]
    fn friction_slope_rejects_non_positive_depth() {
        assert!(friction_slope(10.0, 0.0, 30.0, 100.0).is_err());
        assert!(friction_slope(10.0, -1.0, 30.0, 100.0).is_err());
    }

    #[test]
    fn froude_squared_examples() {
        assert_eq!(froude_squared(0.0, 2.0, 100.0, GRAVITY).unwrap(), 0.0);
        let fr2 = froude_squared(200.0, 2.0, 100.0, 9.81).unwrap();
        assert_relative_eq!(fr2, 200.0_f64.powi(2) / (9.81 * 1e4 * 8.0), max_relative = 1e-14);
        assert_relative_eq!(fr2, 0.05096, max_relative = 1e-3);
        // Fr^2 = 1 exactly at the critical depth.
        let q = 350.0;
        let w = 80.0;
        let hc = (q * q / (GRAVITY * w * w)).powf(1.0 / 3.0);
        assert_relative_eq!(froude_squared(q, hc, w, GRAVITY).unwrap(), 1.0, max_relative = 1e-12);
        assert!(froude_squared(10.0, -0.1, 50.0, GRAVITY).is_err());
    }

    #[test]
    fn normal_depth_satisfies_uniform_flow_balance() {
        let q = 4031.0;
        let ks = 38.0;
        let w = 250.0;
        let s0 = 3.3e-4;
        let hn = normal_depth(q, ks, w, s0).unwrap();
        let sf = friction_slope(q, hn, ks, w).unwrap();
        assert_relative_eq!(sf, s0, max_relative = 1e-10);
    }

    #[test]
    fn rating_curve_calibration_matches_normal_depth_and_sensitivity() {
        let q = 4031.0;
        let rc = RatingCurve::calibrated_to_normal_depth(q, 38.0, 250.0, 3.3e-4).unwrap();
        let hn = normal_depth(q, 38.0, 250.0, 3.3e-4).unwrap();
        assert_relative_eq!(rc.level(q), hn, max_relative = 1e-12);
        let dq = 1.0;
        let fd = (normal_depth(q + dq, 38.0, 250.0, 3.3e-4).unwrap()
            - normal_depth(q - dq, 38.0, 250.0, 3.3e-4).unwrap())
            / (2.0 * dq);
        let rc_slope = (rc.level(q + dq) - rc.level(q - dq)) / (2.0 * dq);
        assert_relative_eq!(rc_slope, fd, max_relative = 1e-6);
    }

    #[test]
    fn friction_zone_lookup_overrides_uncertain_zone() {
        let zones = FrictionZones::new(
            vec![0.0, 100.0, 200.0, 300.0],
            vec![30.0, 35.0, 40.0],
            2,
        )
        .unwrap();
        assert_eq!(zones.strickler_at(50.0, 99.0), 30.0);
        assert_eq!(zones.strickler_at(150.0, 99.0), 35.0);
        assert_eq!(zones.strickler_at(250.0, 99.0), 99.0);
        assert_eq!(zones.strickler_at(100.0, 99.0), 35.0);
        assert_eq!(zones.strickler_at(300.0, 99.0), 99.0);
    }

    #[test]
    fn synthetic_model_has_fourteen_evenly_spaced_stations() {
        let model = SyntheticChannelSpec::default().build().unwrap();
        let stations = model.stations();
        assert_eq!(stations.len(), 14);
        assert_relative_eq!(stations[0], 14_750.0);
        assert_relative_eq!(stations[13], 60_250.0);
        let spacing = stations[1] - stations[0];
        for w in stations.windows(2) {
            assert_relative_eq!(w[1] - w[0], spacing, max_relative = 1e-12);
        }
        // The heterogeneous mid-reach station sits next to the bed features.
        assert_eq!(model.station_nearest(36_000.0), 6);
        assert_relative_eq!(stations[6], 35_750.0);
    }

    #[test]
    fn solve_reports_fourteen_levels_and_downstream_consistency() {
        let model = SyntheticChannelSpec::default().build().unwrap();
        let sol = model.solve(4031.0, 30.0).unwrap();
        assert_eq!(sol.station_levels.len(), 14);
        assert_eq!(sol.discharge, 4031.0);
        // Solved depth at the downstream end equals RC(Q) exactly.
        let rc = model.boundary_conditions().rating_curve.level(4031.0);
        assert_eq!(*sol.depths.last().unwrap(), rc);
        assert_eq!(*sol.abscissas.last().unwrap(), model.downstream_abscissa());
        // Elevation = bed + depth at the stations.
        for (s, (&depth, &level)) in sol
            .station_depths
            .iter()
            .zip(&sol.station_levels)
            .enumerate()
        {
            let z = model.bed().elevation(model.stations()[s]);
            assert_relative_eq!(level, z + depth, max_relative = 1e-14);
        }
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        let model = SyntheticChannelSpec::default().build().unwrap();
        assert!(model.solve(-5.0, 30.0).is_err());
        assert!(model.solve(4031.0, 0.0).is_err());
    }

    #[test]
    fn grid_step_must_divide_reach() {
        let spec = SyntheticChannelSpec {
            grid_step_m: 73.0,
            ..SyntheticChannelSpec::default()
        };
        assert!(spec.build().is_err());
    }

    #[test]
    fn geometry_csv_has_header_and_rows() {
        let model = SyntheticChannelSpec::default().build().unwrap();
        let csv = model.geometry_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "abscissa_km,bed_elevation_m,width_m,Ks");
        assert_eq!(csv.lines().count(), 982);
        let first = lines.next().unwrap();
        assert!(first.starts_with("13,"));
    }

    #[test]
    fn sections_profile_interpolates_linearly() {
        let sections = vec![
            CrossSection { abscissa: 0.0, bed_elevation: 10.0, width: 100.0 },
            CrossSection { abscissa: 1000.0, bed_elevation: 9.0, width: 120.0 },
            CrossSection { abscissa: 2000.0, bed_elevation: 8.5, width: 110.0 },
        ];
        let bed = BedProfile::Sections(sections);
        assert_relative_eq!(bed.elevation(500.0), 9.5);
        assert_relative_eq!(bed.width(500.0), 110.0);
        assert_relative_eq!(bed.gradient(500.0), -1e-3);
        assert_relative_eq!(bed.gradient(1500.0), -5e-4);
    }
}
