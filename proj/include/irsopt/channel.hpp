// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

#include "irsopt/rng.hpp"
#include "irsopt/units.hpp"

namespace irsopt {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Node separations in meters. PB = power beacon, R = IRS, S = source,
/// D = destination, I = interferer.
struct Distances {
    double rs = 15.0;
    double is = 15.0;
    double rd = 15.0;
    double ir = 15.0;
    double sd = 25.0;
    double bs = 25.0;
    double id = 30.0;
    double br = 15.0;
};

/// Physical and geometric constants of one scenario. All powers in watts.
/// Defaults are the noise-limited reference scenario (P_I = 0).
struct SystemParams {
    std::size_t m = 2;     // PB antennas
    std::size_t n = 8;     // IRS elements
    double p_b = 10.0;     // PB transmit power
    double p_i = 0.0;      // interferer power; 0 selects the noise-limited model
    double sigma_z2 = dbm_to_watts(-104.0);
    double eta = 1.0;      // energy conversion efficiency
    double t_c = 1.0;      // coherence time [s]; cancels out of the SINR
    double l_c = 1e-3;     // path-loss coefficient
    double alpha_irs = 2.2;
    double alpha_direct = 2.57;
    Distances d;

    bool interference() const { return p_i > 0.0; }

    /// Throws std::invalid_argument on the first violated invariant.
    void validate() const;
};

/// Per-link variances sigma_ij^2 = L_c * d_ij^-alpha.
struct LinkVariances {
    double h_bs, g_br, g_rs, g_ir, g_rd, h_is, h_id, h_sd;
};

/// L_c * distance^-exponent. Throws std::domain_error for distance <= 0.
double pathloss_variance(double distance, double exponent, double l_c);

LinkVariances link_variances(const SystemParams& p);

/// One block-fading draw of every link.
struct ChannelRealization {
    ComplexVector h_bs; // M, PB -> S
    ComplexMatrix g_br; // N x M, PB -> IRS
    ComplexVector g_rs; // N, IRS -> S
    ComplexVector g_ir; // N, interferer -> IRS
    ComplexVector g_rd; // N, IRS -> D
    Complex h_is{};     // interferer -> S
    Complex h_id{};     // interferer -> D
    Complex h_sd{};     // S -> D

    std::size_t m() const { return static_cast<std::size_t>(h_bs.size()); }
    std::size_t n() const { return static_cast<std::size_t>(g_rs.size()); }
};

/// Draws a realization. Entries are consumed from `rng` in the fixed order
/// h_BS, G_BR (column-major), g_RS, g_IR, g_RD, h_IS, h_ID, h_SD; all links are
/// drawn even in the noise-limited model so streams do not depend on P_I.
ChannelRealization sample_channels(const SystemParams& p, Rng& rng);

} // namespace irsopt
