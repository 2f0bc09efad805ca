//! Complex special functions and the explicitly multivalued Coulomb factors.

mod coulomb;
mod factors;
mod gamma;
mod humblet;
mod kinematics;

pub use coulomb::{
    apply_log_winding, coulomb_f_series, coulomb_fg, coulomb_h, coulomb_h_complex, hankel_pair_complex, hankel_pair_for,
    CoulombFG, HankelPair, WaveSign, COMPLEX_H_IM_E_BAND,
};
pub use factors::{barrier_c, barrier_c0_squared, coulomb_phase, d_factor, h_function, m_factor};
pub use gamma::{digamma, ln_gamma};
pub use humblet::{humblet_tilde, HumbletTilde};
pub use kinematics::{Kinematics, SheetSelector};
