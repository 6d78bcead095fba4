//! Experiment configuration files.
//!
//! One `key = value` per line, dotted section prefixes, `#` comments,
//! booleans written `on`/`off`. Every key may appear at most once and unknown
//! keys are rejected.
//!
//! ```text
//! name = Circle 1
//! grid.n = 192
//! energy.length = off
//! init.kind = curves
//! init.curves = circle 0 0 0.3 +
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::flow::{FlowParams, ImprovedWinding, RunOptions, ScheduleSpec};
use crate::functionals::EnergyParams;
use crate::grid::{Domain, GridSpec, ScalarField};
use crate::image::{init_from_gray, init_from_image, FoldedShape, GrayImage, ImageInitParams, LobedShape};
use crate::recovery::{build_recovery_field, Component, CurveSpec, CutoffWidth, Orientation, Primitive, RecoveryParams};
use crate::topology::TvSolveParams;

const KEYS: &[&str] = &[
    "name",
    "grid.n",
    "grid.extent",
    "energy.epsilon",
    "energy.alpha",
    "energy.beta",
    "energy.c_beta",
    "energy.sigma_mis",
    "energy.length_target",
    "energy.winding_target",
    "energy.length",
    "energy.winding",
    "energy.mismatch",
    "flow.tau_relax",
    "flow.tau_main",
    "flow.relax_steps",
    "flow.newton_tol",
    "flow.newton_max",
    "flow.cg_tol",
    "flow.cg_max",
    "flow.max_halvings",
    "flow.dissipation_factor",
    "flow.tau_growth",
    "flow.tau_max",
    "schedule.penalty_ramp_steps",
    "schedule.l_ramp_steps",
    "run.steps",
    "run.snapshot_every",
    "output.dir",
    "init.kind",
    "init.curves",
    "init.cutoff",
    "init.image",
    "init.blur_sigma",
    "init.pixels",
    "init.core_radius",
    "init.lobe_radius",
    "init.lobe_distance",
    "init.neck_width",
    "init.rotation",
    "init.radius",
    "init.half_width",
    "init.half_angle",
    "topology.gamma",
    "topology.max_iters",
    "topology.gap_tol",
    "topology.every",
    "topology.penalize",
];

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Recovery field of analytic curves.
    Curves { spec: CurveSpec, cutoff: CutoffWidth },
    /// Blurred PGM image.
    Image(ImageInitParams),
    /// Procedural three-lobed raster, blurred like an image.
    Lobed { shape: LobedShape, pixels: usize, blur_sigma: f64 },
    /// Procedural bent band raster, blurred like an image.
    Folded { shape: FoldedShape, pixels: usize, blur_sigma: f64 },
}

impl InitialCondition {
    pub fn build(&self, domain: &Domain, epsilon: f64) -> Result<ScalarField> {
        match self {
            Self::Curves { spec, cutoff } => {
                build_recovery_field(spec, &RecoveryParams::new(epsilon).with_cutoff(*cutoff), domain)
            }
            Self::Image(p) => init_from_image(p, domain),
            Self::Lobed {
                shape,
                pixels,
                blur_sigma,
            } => init_from_gray(&GrayImage::from_indicator(*pixels, |x, y| shape.contains(x, y))?, *blur_sigma, domain),
            Self::Folded {
                shape,
                pixels,
                blur_sigma,
            } => init_from_gray(&GrayImage::from_indicator(*pixels, |x, y| shape.contains(x, y))?, *blur_sigma, domain),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub name: String,
    pub grid: GridSpec,
    pub energy: EnergyParams,
    pub flow: FlowParams,
    pub init: InitialCondition,
    pub run: RunOptions,
    pub output_dir: Option<PathBuf>,
}

impl SimulationConfig {
    pub fn domain(&self) -> Domain {
        Domain::new(self.grid)
    }

    pub fn initial_field(&self, domain: &Domain) -> Result<ScalarField> {
        self.init.build(domain, self.energy.epsilon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    /// Parses config text; `origin` labels errors and relative image paths
    /// resolve against `base`.
    pub fn parse(text: &str, origin: &str, base: &Path) -> Result<Self> {
        let mut entries = Entries::read(text, origin)?;
        let cfg = Self::from_entries(&mut entries, base)?;
        if let Some((key, line)) = entries.unused().next() {
            return Err(entries.error(line, format!("key `{key}` is not used by init.kind")));
        }
        Ok(cfg)
    }

    fn from_entries(e: &mut Entries, base: &Path) -> Result<Self> {
        let name = e.string("name")?.unwrap_or_else(|| "unnamed".into());
        let n = e.required("grid.n", Entries::usize)?;
        let extent = e.get("grid.extent", Entries::real)?.unwrap_or(1.1);
        let grid = GridSpec::new(n, extent).map_err(|err| e.error(e.line_of("grid.n"), err.to_string()))?;

        let d = EnergyParams::default();
        let epsilon = e.get("energy.epsilon", Entries::real)?.unwrap_or(d.epsilon);
        let energy = EnergyParams {
            epsilon,
            alpha: e.get("energy.alpha", Entries::real)?.unwrap_or(d.alpha),
            beta: e.get("energy.beta", Entries::real)?.unwrap_or(d.beta),
            c_beta: e.get("energy.c_beta", Entries::real)?.unwrap_or(d.c_beta),
            sigma_mis: e
                .get("energy.sigma_mis", Entries::real)?
                .unwrap_or(0.02 / (epsilon * epsilon)),
            length_target: e.get("energy.length_target", Entries::real)?.unwrap_or(d.length_target),
            winding_target: e.get("energy.winding_target", Entries::real)?.unwrap_or(d.winding_target),
            length_on: e.get("energy.length", Entries::switch)?.unwrap_or(d.length_on),
            winding_on: e.get("energy.winding", Entries::switch)?.unwrap_or(d.winding_on),
            mismatch_on: e.get("energy.mismatch", Entries::switch)?.unwrap_or(d.mismatch_on),
            penalty_scale: 1.0,
        };
        energy
            .validate()
            .map_err(|err| e.error(0, err.to_string()))?;

        let fd = FlowParams::default();
        let flow = FlowParams {
            tau_relax: e.get("flow.tau_relax", Entries::real)?.unwrap_or(fd.tau_relax),
            tau_main: e.get("flow.tau_main", Entries::real)?.unwrap_or(fd.tau_main),
            relax_steps: e.get("flow.relax_steps", Entries::usize)?.unwrap_or(fd.relax_steps),
            newton_tol: e.get("flow.newton_tol", Entries::real)?.or(fd.newton_tol),
            newton_max: e.get("flow.newton_max", Entries::usize)?.unwrap_or(fd.newton_max),
            cg_tol: e.get("flow.cg_tol", Entries::real)?.unwrap_or(fd.cg_tol),
            cg_max: e.get("flow.cg_max", Entries::usize)?.unwrap_or(fd.cg_max),
            max_halvings: e.get("flow.max_halvings", Entries::usize)?.unwrap_or(fd.max_halvings),
            dissipation_factor: e
                .get("flow.dissipation_factor", Entries::real)?
                .unwrap_or(fd.dissipation_factor),
            tau_growth: e.get("flow.tau_growth", Entries::real)?.unwrap_or(fd.tau_growth),
            tau_max: e.get("flow.tau_max", Entries::real)?,
            schedule: ScheduleSpec {
                penalty_ramp_steps: e
                    .get("schedule.penalty_ramp_steps", Entries::usize)?
                    .unwrap_or(fd.schedule.penalty_ramp_steps),
                l_ramp_steps: e
                    .get("schedule.l_ramp_steps", Entries::usize)?
                    .unwrap_or(fd.schedule.l_ramp_steps),
            },
        };
        flow.validate().map_err(|err| e.error(0, err.to_string()))?;

        let td = TvSolveParams::default();
        let tv = TvSolveParams {
            gamma: e.get("topology.gamma", Entries::real)?.unwrap_or(td.gamma),
            max_iters: e.get("topology.max_iters", Entries::usize)?.unwrap_or(td.max_iters),
            gap_tol: e.get("topology.gap_tol", Entries::real)?.unwrap_or(td.gap_tol),
        };
        tv.validate().map_err(|err| e.error(0, err.to_string()))?;
        let run = RunOptions {
            n_steps: e.required("run.steps", Entries::usize)?,
            snapshot_every: e.get("run.snapshot_every", Entries::usize)?.unwrap_or(0),
            improved: ImprovedWinding {
                tv,
                every: e.get("topology.every", Entries::usize)?.unwrap_or(0),
                penalize: e.get("topology.penalize", Entries::switch)?.unwrap_or(false),
            },
        };
        let output_dir = e.string("output.dir")?.map(PathBuf::from);

        let kind = e.required("init.kind", Entries::text)?;
        let init = match kind.as_str() {
            "curves" => {
                let spec = e.required("init.curves", Entries::curves)?;
                let cutoff = e.get("init.cutoff", Entries::cutoff)?.unwrap_or(CutoffWidth::Auto);
                InitialCondition::Curves { spec, cutoff }
            }
            "image" => {
                let path = PathBuf::from(e.required("init.image", Entries::text)?);
                InitialCondition::Image(ImageInitParams {
                    path: if path.is_absolute() { path } else { base.join(path) },
                    blur_sigma: e.get("init.blur_sigma", Entries::real)?.unwrap_or(0.0),
                })
            }
            "lobed" => {
                let s = LobedShape::default();
                InitialCondition::Lobed {
                    shape: LobedShape {
                        core_radius: e.get("init.core_radius", Entries::real)?.unwrap_or(s.core_radius),
                        lobe_radius: e.get("init.lobe_radius", Entries::real)?.unwrap_or(s.lobe_radius),
                        lobe_distance: e.get("init.lobe_distance", Entries::real)?.unwrap_or(s.lobe_distance),
                        neck_width: e.get("init.neck_width", Entries::real)?.unwrap_or(s.neck_width),
                        rotation: e.get("init.rotation", Entries::real)?.unwrap_or(s.rotation),
                    },
                    pixels: e.get("init.pixels", Entries::usize)?.unwrap_or(512),
                    blur_sigma: e.get("init.blur_sigma", Entries::real)?.unwrap_or(2.0),
                }
            }
            "folded" => {
                let s = FoldedShape::default();
                InitialCondition::Folded {
                    shape: FoldedShape {
                        radius: e.get("init.radius", Entries::real)?.unwrap_or(s.radius),
                        half_width: e.get("init.half_width", Entries::real)?.unwrap_or(s.half_width),
                        half_angle: e.get("init.half_angle", Entries::real)?.unwrap_or(s.half_angle),
                    },
                    pixels: e.get("init.pixels", Entries::usize)?.unwrap_or(512),
                    blur_sigma: e.get("init.blur_sigma", Entries::real)?.unwrap_or(2.0),
                }
            }
            other => {
                return Err(e.error(
                    e.line_of("init.kind"),
                    format!("unknown init.kind `{other}` (curves, image, lobed, folded)"),
                ))
            }
        };
        Ok(Self {
            name,
            grid,
            energy,
            flow,
            init,
            run,
            output_dir,
        })
    }
}

struct Entries {
    origin: String,
    values: BTreeMap<String, (String, usize)>,
    used: Vec<String>,
}

impl Entries {
    fn read(text: &str, origin: &str) -> Result<Self> {
        let mut out = Self {
            origin: origin.to_string(),
            values: BTreeMap::new(),
            used: Vec::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(out.error(i + 1, format!("expected `key = value`, found {line:?}")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(out.error(i + 1, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(out.error(i + 1, format!("key `{key}` has no value")));
            }
            if out.values.insert(key.to_string(), (value.to_string(), i + 1)).is_some() {
                return Err(out.error(i + 1, format!("key `{key}` given twice")));
            }
        }
        Ok(out)
    }

    fn error(&self, line: usize, message: String) -> Error {
        Error::Config {
            path: self.origin.clone(),
            line,
            message,
        }
    }

    fn line_of(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |v| v.1)
    }

    fn unused(&self) -> impl Iterator<Item = (&str, usize)> {
        self.values
            .iter()
            .filter(|(k, _)| !self.used.iter().any(|u| u == *k))
            .map(|(k, v)| (k.as_str(), v.1))
    }

    fn get<T>(&mut self, key: &str, parse: fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        self.used.push(key.to_string());
        match self.values.get(key) {
            None => Ok(None),
            Some((v, line)) => parse(v)
                .map(Some)
                .map_err(|m| self.error(*line, format!("`{key}`: {m}"))),
        }
    }

    fn required<T>(&mut self, key: &str, parse: fn(&str) -> std::result::Result<T, String>) -> Result<T> {
        self.get(key, parse)?
            .ok_or_else(|| self.error(0, format!("missing required key `{key}`")))
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        self.get(key, Self::text)
    }

    fn text(v: &str) -> std::result::Result<String, String> {
        Ok(v.to_string())
    }

    fn real(v: &str) -> std::result::Result<f64, String> {
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(format!("expected a finite number, found {v:?}")),
        }
    }

    fn usize(v: &str) -> std::result::Result<usize, String> {
        v.parse().map_err(|_| format!("expected a nonnegative integer, found {v:?}"))
    }

    fn switch(v: &str) -> std::result::Result<bool, String> {
        match v {
            "on" => Ok(true),
            "off" => Ok(false),
            _ => Err(format!("expected `on` or `off`, found {v:?}")),
        }
    }

    fn cutoff(v: &str) -> std::result::Result<CutoffWidth, String> {
        match v {
            "auto" => Ok(CutoffWidth::Auto),
            "none" => Ok(CutoffWidth::None),
            _ => Self::real(v).map(CutoffWidth::Fixed),
        }
    }

    /// `circle cx cy r ±` or `polygon ± x1 y1 x2 y2 …`, separated by `;`.
    fn curves(v: &str) -> std::result::Result<CurveSpec, String> {
        let orient = |t: &str| match t {
            "+" => Ok(Orientation::Positive),
            "-" => Ok(Orientation::Negative),
            _ => Err(format!("orientation must be + or -, found {t:?}")),
        };
        let mut comps = Vec::new();
        for part in v.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let tok: Vec<&str> = part.split_whitespace().collect();
            let nums = |t: &[&str]| t.iter().map(|x| Self::real(x)).collect::<std::result::Result<Vec<f64>, _>>();
            match tok[0] {
                "circle" if tok.len() == 5 => {
                    let x = nums(&tok[1..4])?;
                    comps.push(Component::circle([x[0], x[1]], x[2], orient(tok[4])?));
                }
                "polygon" if tok.len() >= 8 && tok.len() % 2 == 0 => {
                    let x = nums(&tok[2..])?;
                    comps.push(Component {
                        shape: Primitive::Polyline {
                            vertices: x.chunks(2).map(|c| [c[0], c[1]]).collect(),
                        },
                        orientation: orient(tok[1])?,
                    });
                }
                _ => return Err(format!("cannot parse curve {part:?}")),
            }
        }
        CurveSpec::new(comps).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = "
        name = test run   # trailing comment
        grid.n = 64
        grid.extent = 1.1
        energy.length = off
        energy.winding = off
        energy.mismatch = off
        run.steps = 10
        init.kind = curves
        init.curves = circle 0 0 0.5 + ; circle 0 0 0.25 -
        init.cutoff = none
    ";

    fn parse(text: &str) -> Result<SimulationConfig> {
        SimulationConfig::parse(text, "test.cfg", Path::new("."))
    }

    #[test]
    fn parses_basic_config() {
        let c = parse(BASIC).unwrap();
        assert_eq!(c.name, "test run");
        assert_eq!(c.grid.n(), 64);
        assert!(!c.energy.length_on && !c.energy.winding_on && !c.energy.mismatch_on);
        assert!((c.energy.sigma_mis - 32.0).abs() < 1e-9);
        assert_eq!(c.run.n_steps, 10);
        assert_eq!(c.flow, FlowParams::default());
        match &c.init {
            InitialCondition::Curves { spec, cutoff } => {
                assert_eq!(spec.len(), 2);
                assert_eq!(*cutoff, CutoffWidth::None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed() {
        let err = parse(&format!("{BASIC}\nenergy.gamma = 1")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 13, .. }), "{err}");
        assert!(parse(&format!("{BASIC}\ngrid.n = 65")).is_err());
        assert!(parse(&BASIC.replace("energy.length = off", "energy.length = yes")).is_err());
        assert!(parse(&BASIC.replace("grid.n = 64", "grid.n = -3")).is_err());
        assert!(parse(&BASIC.replace("grid.n = 64", "grid.n 64")).is_err());
        assert!(parse(&BASIC.replace("run.steps = 10", "")).is_err());
        assert!(parse(&BASIC.replace("0.25 -", "0.25 +")).is_err());
        // keys that belong to another init kind
        assert!(parse(&format!("{BASIC}\ninit.neck_width = 0.1")).is_err());
    }

    #[test]
    fn procedural_initial_conditions() {
        let text = BASIC
            .replace("init.kind = curves", "init.kind = lobed\ninit.neck_width = 0.1")
            .replace("init.curves = circle 0 0 0.5 + ; circle 0 0 0.25 -", "")
            .replace("init.cutoff = none", "");
        let c = parse(&text).unwrap();
        let d = c.domain();
        let u = c.initial_field(&d).unwrap();
        assert!(u.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        let g = *d.grid();
        // the origin is inside the core
        assert!(u.values[g.index(g.n() / 2, g.n() / 2)] > 0.9);
    }

    #[test]
    fn polygon_curves() {
        let text = BASIC.replace(
            "circle 0 0 0.5 + ; circle 0 0 0.25 -",
            "polygon + -0.3 -0.3 0.3 -0.3 0.3 0.3 -0.3 0.3",
        );
        let c = parse(&text).unwrap();
        let u = c.initial_field(&c.domain()).unwrap();
        assert!(u.is_finite());
    }
}
