//! Config to certificate: base interval, shift, constants, construction.

use crate::cantor::certificate::{emit_certificate, Certificate};
use crate::cantor::{CantorState, Engine, EngineSettings, StepReport};
use crate::config::RunConfig;
use crate::constants::{derive_sheet, ConstantSheet, XiEstimate};
use crate::curve::{build_curve, select_base_interval, three_pow, CurveModel, ShiftField};
use crate::dangerous::WindowContext;
use crate::error::Error;
use crate::measure::MeasureOracle;
use crate::registry::{build_frontier, build_measure, build_rules};
use crate::weight::validate_weights;

/// Everything a finished (or extinct) construction produced.
pub struct Construction {
    pub curve: CurveModel,
    pub shift: ShiftField,
    pub measure: Box<dyn MeasureOracle>,
    pub sheet: ConstantSheet,
    pub xi: XiEstimate,
    pub state: CantorState,
    pub config_hash: String,
    pub fit: Option<crate::cantor::certificate::FitParams>,
}

impl Construction {
    /// Fails with `Extinct` when no interval survived.
    pub fn certificate(&self) -> Result<Certificate, Error> {
        Ok(emit_certificate(&self.state, &self.sheet, &self.curve, &self.shift, &self.config_hash, self.fit.as_ref())?)
    }

    pub fn window_ctx(&self) -> WindowContext {
        WindowContext::from_sheet(&self.sheet)
    }
}

/// The curve, shift and constants a config describes.
pub fn prepare(
    cfg: &RunConfig,
) -> Result<(CurveModel, ShiftField, Box<dyn MeasureOracle>, ConstantSheet, XiEstimate), Error> {
    let curve = build_curve(cfg.curve()?, cfg.domain()?)?;
    let weight = validate_weights(&cfg.weights()?)?;
    if weight.n() != curve.n() {
        return Err(crate::error::CoreError::DimensionMismatch {
            what: "weights".into(),
            expected: curve.n(),
            found: weight.n(),
        }
        .into());
    }
    let measure = build_measure(cfg.measure(), cfg.rho0()?)?;
    let r = cfg.r()?;
    let i0 = select_base_interval(&curve, r, measure.as_ref(), cfg.center()?.as_ref())?;
    let shift = ShiftField::derive(cfg.shift()?, curve.n(), &i0.dilate(&three_pow(curve.n() + 1)), cfg.lipschitz()?)?;
    let (sheet, xi) = derive_sheet(&curve, &shift, &weight, &i0, r, measure.as_ref(), cfg.q_max()?, cfg.xi_samples()?)?;
    Ok((curve, shift, measure, sheet, xi))
}

/// Runs the construction to `q_max` or extinction.
pub fn construct(cfg: &RunConfig, sink: &mut dyn FnMut(&StepReport)) -> Result<Construction, Error> {
    let (curve, shift, measure, sheet, xi) = prepare(cfg)?;
    let rules = build_rules(cfg.rules())?;
    let frontier = build_frontier(cfg.frontier())?;
    let settings =
        EngineSettings { q_max: cfg.q_max()?, escape_samples: cfg.escape_samples()?, scan_limit: cfg.scan_limit()? };
    let state = {
        let engine = Engine {
            curve: &curve,
            shift: &shift,
            sheet: &sheet,
            window_ctx: WindowContext::from_sheet(&sheet),
            measure: measure.as_ref(),
            rules,
            frontier,
            settings,
        };
        engine.run(sink)?
    };
    Ok(Construction { curve, shift, measure, sheet, xi, state, config_hash: cfg.hash(), fit: cfg.fit()? })
}
