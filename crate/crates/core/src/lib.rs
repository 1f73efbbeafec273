//! Closed-form relative entropies of diffeomorphism-induced states in chiral
//! conformal field theory, evaluated numerically.
//!
//! Vector fields ([`fields`]) are exponentiated into flows ([`flows`]) whose
//! jets feed Schwarzian-type quadratures ([`entropy`], [`cocycles`],
//! [`asymptotics`]).

pub mod asymptotics;
pub mod cocycles;
pub mod counterexample;
pub mod diffeo;
pub mod entropy;
pub mod error;
pub mod fields;
pub mod flows;
pub mod ode;
pub mod quad;
pub mod random;
pub mod roots;
pub mod verify;

pub use asymptotics::{
    extensivity_delta, extensivity_report, glued_sequence, h_seq, h_seq_integral, nu_limit_integrals, schwarzian_limit_check, sigma_seq,
    zeta_seq, zeta_seq_parts, ExtensivityReport, LimitTerm, LimitTrace, NuLimits, SigmaExponent, ZetaSeq,
};
pub use cocycles::{anomaly_beta, bott_cocycle, central_term_omega, coboundary_check, CoboundaryRecord, CocycleValue};
pub use counterexample::{counterexample, CounterexampleReport};
pub use diffeo::{compose, invert, log_derivative_ratio, moebius_fixing, schwarzian, ClassTag, Diffeomorphism, Jet3};
pub use entropy::{
    bekenstein_check, dilation_density, entropy_exchanged_derivative_formula, entropy_half_line, entropy_half_line_derivatives,
    entropy_interval, entropy_interval_fixed_endpoint_forms, qnec_energy_density, vacuum_energy, BekensteinRecord, CutDerivatives,
    Direction, EntropyReport, ExchangedDerivatives, FixedEndpointForms, Interval,
};
pub use error::{Error, Result};
pub use fields::{FieldJet, FieldSpec, Picture, Smoothness, Support, VectorField};
pub use quad::{Integral, QuadConfig};
pub use random::FieldSampler;
pub use flows::{closed_form_flow, exponentiate, flow_jet, flow_value, inverse_flow, FlowConfig, FlowMethod};
