use delta_core::DeltaParams;
use folner_atlas::FolnerAtlas;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use profile_forge::{
    build_sequences, default_delta, hypothesis_report, lamp_series, ExponentFit, PiecewiseAffine,
    ProfileSpec, SeriesVerdict,
};
use serde::Serialize;

use crate::{DDError, Result};

/// Smallest `ε` for which the growth hypothesis counts as satisfied; fitted
/// slopes are least-squares estimates, so `ε` within this margin of 0 is
/// treated as a failure.
pub const EPSILON_FLOOR: f64 = 0.05;

/// Verdicts on the two hypotheses that make the integrability sums bounded.
#[derive(Clone, Debug, Serialize)]
pub struct Hypotheses {
    /// `l_m exp(-l_{m-1})` for the target sequences.
    pub lamp_series: SeriesVerdict,
    /// Fitted exponent of `φ = ρ̃ ∘ ρ_bij⁻¹`.
    pub exponent: Option<ExponentFit>,
    pub epsilon: f64,
    pub holds: bool,
}

/// A source and a target diagonal product sharing `κ` and `A × B`, with the
/// profiles they realize.
///
/// The concrete parameters are the materialized levels; the profiles describe
/// the families they belong to and drive `φ` and the hypothesis verdicts.
#[derive(Clone, Debug)]
pub struct DDParams {
    source: FolnerAtlas,
    target: FolnerAtlas,
    source_profile: ProfileSpec,
    target_profile: ProfileSpec,
    target_bij: PiecewiseAffine,
    hypotheses: Hypotheses,
}

impl DDParams {
    /// `lambda` and `m_max` build the profile sequences used for the verdicts.
    pub fn new(
        source: DeltaParams,
        target: DeltaParams,
        source_profile: ProfileSpec,
        target_profile: ProfileSpec,
        lambda: u64,
        m_max: usize,
    ) -> Result<Self> {
        let kappa = source.kappa();
        if kappa < 3 || target.kappa() != kappa {
            return Err(DDError::Params(format!(
                "source and target need a common kappa >= 3, got {kappa} and {}",
                target.kappa()
            )));
        }
        if source.a_order() != target.a_order() || source.b_order() != target.b_order() {
            return Err(DDError::Params(
                "source and target must share A and B".into(),
            ));
        }
        let src_seq = build_sequences(&source_profile, kappa, lambda, m_max)?;
        let tgt_seq = build_sequences(&target_profile, kappa, lambda, m_max)?;
        let delta: BigRational = default_delta();
        let target_bij = tgt_seq.rho_bij(&delta)?;
        let report = hypothesis_report(&source_profile, &src_seq, m_max, Some((&tgt_seq, &delta)));
        let lamp = lamp_series(&tgt_seq);
        let epsilon = report
            .exponent
            .as_ref()
            .map_or(f64::NEG_INFINITY, |e| e.epsilon);
        let hypotheses = Hypotheses {
            holds: lamp.summable && epsilon >= EPSILON_FLOOR,
            lamp_series: lamp,
            exponent: report.exponent,
            epsilon,
        };
        Ok(Self {
            source: FolnerAtlas::new(source)?,
            target: FolnerAtlas::new(target)?,
            source_profile,
            target_profile,
            target_bij,
            hypotheses,
        })
    }

    pub fn source(&self) -> &FolnerAtlas {
        &self.source
    }

    pub fn target(&self) -> &FolnerAtlas {
        &self.target
    }

    pub fn kappa(&self) -> u64 {
        self.source.params().kappa()
    }

    pub fn q(&self) -> u64 {
        self.source.params().q() as u64
    }

    pub fn source_profile(&self) -> &ProfileSpec {
        &self.source_profile
    }

    pub fn target_profile(&self) -> &ProfileSpec {
        &self.target_profile
    }

    pub fn hypotheses(&self) -> &Hypotheses {
        &self.hypotheses
    }

    /// `φ(r) = ρ̃(ρ_bij⁻¹(r))`, with `r` clamped to the domain of `ρ_bij⁻¹`.
    pub fn phi(&self, r: f64) -> f64 {
        let mut y = r.max(1.0);
        if let Some(end) = self.target_bij.image_end() {
            y = y.min(end.to_f64().unwrap_or(f64::MAX));
        }
        let x = BigRational::from_float(y)
            .and_then(|y| self.target_bij.inverse(&y).ok())
            .map_or(y, |x| x.to_f64().unwrap_or(y));
        self.source_profile.eval(x)
    }
}
