// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "irsopt/channel.hpp"
#include "irsopt/features.hpp"

namespace irsopt {

/// Margin that solvers keep tau away from 0 and 1.
inline constexpr double kTauEpsilon = 1e-6;

/// Decision variables: IRS phases for the energy-transfer and
/// information-transfer slots, and the energy-harvesting time fraction.
/// Reflection amplitudes are fixed to 1.
struct PhaseConfig {
    std::vector<double> theta_et;
    std::vector<double> theta_it;
    double tau = 0.5;

    /// Wraps every phase into [0, 2pi) and clamps tau to [kTauEpsilon, 1 - kTauEpsilon].
    void canonicalize();
    std::size_t n() const { return theta_et.size(); }
};

double wrap_phase(double theta);
double clamp_tau(double tau);

struct ThroughputReport {
    double energy = 0.0;       // E_s [J]
    double source_power = 0.0; // P_S [W]
    double sinr = 0.0;         // gamma_D
    double throughput = 0.0;   // C [bit/s/Hz]
};

/// h_eff[m] = a[m] + sum_n exp(j theta[n]) V[n, m].
ComplexVector effective_et_channel(const FeatureVector& f, std::span<const double> theta_et);

/// Unit-norm conjugate-matched beamformer, |h^T w| = ||h||. Throws
/// SingularChannel for a zero channel.
ComplexVector mrt_beamformer(const ComplexVector& h_eff);

/// Received power factor of the energy slot (per unit tau, eta, T_c):
/// P_B ||h_eff||^2 + P_I |h_IS + sum_n e^{j theta_n} u_IS[n]|^2.
double et_gain(const FeatureVector& f, std::span<const double> theta_et, const SystemParams& p);

/// Information-slot link ratio |h_SD + e^T u_SD|^2 / (P_I |h_ID + e^T u_ID|^2 + sigma^2).
double it_ratio(const FeatureVector& f, std::span<const double> theta_it, const SystemParams& p);

/// SINR from the two slot factors: eta tau / (1 - tau) * et * it.
double sinr_from_gains(double et, double it, double tau, const SystemParams& p);

/// (1 - tau) log2(1 + gamma).
double throughput_from_sinr(double gamma, double tau);

/// The functions below require tau in the open interval (0, 1) and throw
/// DegenerateSplit otherwise; no clamping is applied here.
double harvested_energy(const FeatureVector& f, std::span<const double> theta_et, double tau, const SystemParams& p);
double source_power(double energy, double tau, double t_c);
double sinr(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p);
double throughput(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p);
ThroughputReport evaluate(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p);

/// -(1/|F|) sum C(f, cfg(f)).
double batch_loss(std::span<const FeatureVector> features, std::span<const PhaseConfig> cfgs, const SystemParams& p);

} // namespace irsopt
