// SPDX-License-Identifier: Apache-2.0
#include "irsopt/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "irsopt/errors.hpp"
#include "irsopt/units.hpp"

namespace irsopt {

double wrap_phase(double theta)
{
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0)
        w += kTwoPi;
    if (w >= kTwoPi) // fmod of a tiny negative value can round up to 2pi
        w = 0.0;
    return w;
}

double clamp_tau(double tau) { return std::clamp(tau, kTauEpsilon, 1.0 - kTauEpsilon); }

void PhaseConfig::canonicalize()
{
    for (auto& t : theta_et)
        t = wrap_phase(t);
    for (auto& t : theta_it)
        t = wrap_phase(t);
    tau = clamp_tau(tau);
}

namespace {

void check_tau(double tau, const char* where)
{
    if (!(tau > 0.0 && tau < 1.0))
        throw DegenerateSplit(std::string(where) + ": tau must lie in (0, 1), got " + std::to_string(tau));
}

void check_phases(const FeatureVector& f, std::span<const double> theta, const char* where)
{
    if (theta.size() != f.n)
        throw ContractViolation(std::string(where) + ": expected " + std::to_string(f.n) + " phases, got "
                                + std::to_string(theta.size()));
}

void check_mode(const FeatureVector& f, const SystemParams& p)
{
    if (p.interference() && !f.interference)
        throw ContractViolation("noise-limited feature vector evaluated with P_I > 0");
}

// base + sum_n e^{j theta_n} u[n]
Complex reflected(Complex base, const ComplexVector& u, std::span<const double> theta)
{
    Complex acc = base;
    for (std::size_t i = 0; i < theta.size(); ++i)
        acc += std::polar(1.0, theta[i]) * u(static_cast<Eigen::Index>(i));
    return acc;
}

} // namespace

ComplexVector effective_et_channel(const FeatureVector& f, std::span<const double> theta_et)
{
    check_phases(f, theta_et, "effective_et_channel");
    ComplexVector phasors(static_cast<Eigen::Index>(f.n));
    for (std::size_t i = 0; i < f.n; ++i)
        phasors(static_cast<Eigen::Index>(i)) = std::polar(1.0, theta_et[i]);
    return f.a + f.v.transpose() * phasors;
}

ComplexVector mrt_beamformer(const ComplexVector& h_eff)
{
    const double norm = h_eff.norm();
    if (!(norm > 0.0))
        throw SingularChannel("mrt_beamformer: effective channel is zero");
    return h_eff.conjugate() / norm;
}

double et_gain(const FeatureVector& f, std::span<const double> theta_et, const SystemParams& p)
{
    check_mode(f, p);
    double gain = p.p_b * effective_et_channel(f, theta_et).squaredNorm();
    if (p.interference())
        gain += p.p_i * std::norm(reflected(f.h_is, f.u_is, theta_et));
    return gain;
}

double it_ratio(const FeatureVector& f, std::span<const double> theta_it, const SystemParams& p)
{
    check_phases(f, theta_it, "it_ratio");
    check_mode(f, p);
    const double signal = std::norm(reflected(f.h_sd, f.u_sd, theta_it));
    double disturbance = p.sigma_z2;
    if (p.interference())
        disturbance += p.p_i * std::norm(reflected(f.h_id, f.u_id, theta_it));
    return signal / disturbance;
}

double sinr_from_gains(double et, double it, double tau, const SystemParams& p)
{
    return p.eta * tau * et * it / (1.0 - tau);
}

double throughput_from_sinr(double gamma, double tau) { return (1.0 - tau) * (std::log(1.0 + gamma) / kLn2); }

double harvested_energy(const FeatureVector& f, std::span<const double> theta_et, double tau, const SystemParams& p)
{
    check_tau(tau, "harvested_energy");
    return p.eta * tau * p.t_c * et_gain(f, theta_et, p);
}

double source_power(double energy, double tau, double t_c)
{
    check_tau(tau, "source_power");
    return energy / ((1.0 - tau) * t_c);
}

double sinr(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p)
{
    check_tau(cfg.tau, "sinr");
    return sinr_from_gains(et_gain(f, cfg.theta_et, p), it_ratio(f, cfg.theta_it, p), cfg.tau, p);
}

double throughput(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p)
{
    return throughput_from_sinr(sinr(f, cfg, p), cfg.tau);
}

ThroughputReport evaluate(const FeatureVector& f, const PhaseConfig& cfg, const SystemParams& p)
{
    ThroughputReport r;
    r.energy = harvested_energy(f, cfg.theta_et, cfg.tau, p);
    r.source_power = source_power(r.energy, cfg.tau, p.t_c);
    r.sinr = r.source_power * it_ratio(f, cfg.theta_it, p);
    r.throughput = throughput_from_sinr(r.sinr, cfg.tau);
    return r;
}

double batch_loss(std::span<const FeatureVector> features, std::span<const PhaseConfig> cfgs, const SystemParams& p)
{
    if (features.empty())
        throw ContractViolation("batch_loss: empty batch");
    if (features.size() != cfgs.size())
        throw ContractViolation("batch_loss: feature and config batches differ in length");
    double sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i)
        sum += throughput(features[i], cfgs[i], p);
    return -sum / static_cast<double>(features.size());
}

} // namespace irsopt
