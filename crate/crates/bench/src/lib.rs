//! Fixtures shared by the benchmarks.

use crnoma_core::config::{db_to_linear, two_user_reference};
use crnoma_core::SystemConfig;

/// Reference network with every impairment switched on and a binding ITC,
/// so each benchmark exercises both power branches and the Ei term.
pub fn impaired_network() -> SystemConfig {
    let mut c = two_user_reference();
    c.p_t = db_to_linear(10.0);
    c.i_itc = db_to_linear(20.0);
    c.csi_theta = 0.01;
    c.set_hardware_impairment(0.05);
    c.set_sic_residue(0.005);
    c.at_snr(db_to_linear(30.0))
}
