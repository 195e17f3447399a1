//! Subcommand implementations: each builds a [`Report`] from the
//! resolved configuration.

use polarsim_core::bell::{
    chsh_from_correlations, classical_max, qm_pair_correlation, search_operator_max,
    BellSettings, CommutationScenario,
};
use polarsim_core::cascade::{
    hv_cascade, qm_cascade, min_beta_sweep, CascadeSpec, InputConvention, SweepModel,
};
use polarsim_core::eprmc::epr_curve;
use polarsim_core::{Angle, Error as CoreError, HvResponseParams, ResponseLaw};

use crate::config::{LawChoice, ModelChoice, RunConfig, ScenarioKey};
use crate::report::{fmt_g, Report};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(CoreError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(CoreError::BudgetExceeded { .. }) => 3,
            CliError::Core(CoreError::InvalidArgument(_)) => 2,
        }
    }
}

fn hv_law(cfg: &RunConfig) -> Result<ResponseLaw, CliError> {
    Ok(ResponseLaw::HvStep(HvResponseParams::new(
        cfg.hv.a, cfg.hv.e, cfg.hv.c,
    )?))
}

pub fn run_transmit(cfg: &RunConfig) -> Result<Report, CliError> {
    let law = match cfg.transmit_law {
        LawChoice::Ideal => ResponseLaw::IdealMalus,
        LawChoice::Malus => ResponseLaw::generalized_malus(cfg.epsilon)?,
        LawChoice::Hv => hv_law(cfg)?,
    };
    let rows = cfg
        .grid
        .degrees()
        .into_iter()
        .map(|deg| {
            let p = law.evaluate(deg.to_radians())?;
            Ok(vec![fmt_g(deg), fmt_g(p)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report {
        command: "transmit".into(),
        config: cfg.clone(),
        extra: vec![],
        columns: vec!["deviation_deg", "p"],
        rows,
    })
}

fn axes_angles(cfg: &RunConfig) -> Result<Vec<Angle>, CliError> {
    if cfg.cascade_axes.first() != Some(&0.0) {
        return Err(CliError::Config(format!(
            "key `cascade.axes`: first axis is the reference and must be 0, got {:?}",
            cfg.cascade_axes.first()
        )));
    }
    cfg.cascade_axes
        .iter()
        .map(|&d| Angle::from_degrees(d).map_err(CliError::from))
        .collect()
}

pub fn run_cascade(cfg: &RunConfig) -> Result<Report, CliError> {
    let axes = axes_angles(cfg)?;
    let axes_label = cfg
        .cascade_axes
        .iter()
        .map(|&d| fmt_g(d))
        .collect::<Vec<_>>()
        .join(";");
    let mut rows = Vec::new();
    if matches!(cfg.cascade_model, ModelChoice::Qm | ModelChoice::Both) {
        let laws = vec![ResponseLaw::generalized_malus(cfg.epsilon)?; axes.len()];
        let spec = CascadeSpec::new(axes.clone(), laws, InputConvention::PolarizedAlongFirstAxis)?;
        rows.push(vec![axes_label.clone(), "qm".into(), fmt_g(qm_cascade(&spec)?)]);
    }
    if matches!(cfg.cascade_model, ModelChoice::Hv | ModelChoice::Both) {
        let laws = vec![hv_law(cfg)?; axes.len()];
        let spec = CascadeSpec::new(axes.clone(), laws, InputConvention::UnpolarizedUniformLambda)?;
        rows.push(vec![
            axes_label.clone(),
            "hv".into(),
            fmt_g(hv_cascade(&spec, cfg.tol)?),
        ]);
    }
    Ok(Report {
        command: "cascade".into(),
        config: cfg.clone(),
        extra: vec![],
        columns: vec!["axes_deg", "model", "p"],
        rows,
    })
}

const SWEEP_REFINE_TOL: f64 = 1e-9; // radians, bracket width at termination

pub fn run_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid: Vec<Angle> = cfg
        .grid
        .degrees()
        .into_iter()
        .map(Angle::from_degrees)
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut push_rows = |model: &SweepModel| -> Result<(), CliError> {
        for row in min_beta_sweep(&grid, model, SWEEP_REFINE_TOL)? {
            rows.push(vec![
                fmt_g(row.alpha.degrees()),
                fmt_g(row.beta_star.degrees()),
                fmt_g(row.p_min),
                row.model.to_string(),
            ]);
        }
        Ok(())
    };
    if matches!(cfg.sweep_model, ModelChoice::Qm | ModelChoice::Both) {
        push_rows(&SweepModel::Qm {
            epsilon: cfg.epsilon,
        })?;
    }
    if matches!(cfg.sweep_model, ModelChoice::Hv | ModelChoice::Both) {
        let law = hv_law(cfg)?;
        push_rows(&SweepModel::Hv {
            laws: [law.clone(), law.clone(), law],
            quad_tol: cfg.tol,
        })?;
    }
    Ok(Report {
        command: "sweep".into(),
        config: cfg.clone(),
        extra: vec![],
        columns: vec!["alpha_deg", "beta_star_deg", "p_min", "model"],
        rows,
    })
}

pub fn run_bell(cfg: &RunConfig) -> Result<Report, CliError> {
    let scenario = match cfg.bell_scenario {
        ScenarioKey::Classical => CommutationScenario::Classical,
        ScenarioKey::Tensor => CommutationScenario::TensorLocal,
        ScenarioKey::Free => CommutationScenario::Free,
    };
    let settings = BellSettings {
        alpha: Angle::from_degrees(cfg.bell_settings[0])?,
        alpha_prime: Angle::from_degrees(cfg.bell_settings[1])?,
        beta: Angle::from_degrees(cfg.bell_settings[2])?,
        beta_prime: Angle::from_degrees(cfg.bell_settings[3])?,
    };
    let chsh = chsh_from_correlations(&settings, qm_pair_correlation)?;
    let result = search_operator_max(scenario, cfg.bell_dim, cfg.bell_restarts, cfg.seed)?;
    let extra = vec![
        ("classical_max".into(), fmt_g(classical_max())),
        ("chsh_correlation_value".into(), fmt_g(chsh)),
        (
            "chsh_settings_deg".into(),
            cfg.bell_settings
                .iter()
                .map(|&d| fmt_g(d))
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("restarts_used".into(), format!("{}", result.restarts_used)),
    ];
    let rows = vec![vec![
        result.scenario.to_string(),
        format!("{}", result.dimension),
        fmt_g(result.achieved_max),
        format!("{}", cfg.bell_restarts),
        format!("{}", cfg.seed),
    ]];
    Ok(Report {
        command: "bell".into(),
        config: cfg.clone(),
        extra,
        columns: vec!["scenario", "dim", "achieved_max", "restarts", "seed"],
        rows,
    })
}

pub fn run_epr(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid: Vec<Angle> = cfg
        .epr_angles
        .iter()
        .map(|&d| Angle::from_degrees(d))
        .collect::<Result<_, _>>()?;
    let law = hv_law(cfg)?;
    let points = epr_curve(&grid, cfg.n_pairs, &law, &law, cfg.seed, cfg.tol)?;
    let rows = points
        .iter()
        .zip(&cfg.epr_angles)
        .map(|(pt, &deg)| {
            vec![
                fmt_g(deg),
                fmt_g(pt.p_hat),
                fmt_g(pt.stderr),
                fmt_g(pt.p_quadrature),
                format!("{}", cfg.n_pairs),
            ]
        })
        .collect();
    Ok(Report {
        command: "epr".into(),
        config: cfg.clone(),
        extra: vec![],
        columns: vec!["rel_angle_deg", "p_hat", "stderr", "p_quadrature", "n_pairs"],
        rows,
    })
}
