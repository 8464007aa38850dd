// fas-keygen: fluid-antenna-assisted physical-layer secret key generation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef FAS_KEYGEN_KGR_HPP
#define FAS_KEYGEN_KGR_HPP

#include <complex>
#include <string>
#include <vector>

#include "fas_keygen/channel.hpp"
#include "fas_keygen/numerics.hpp"

namespace faskeygen {

enum class Scenario { iid, correlated };

// Complex beamforming vector (entries in sqrt-watts) plus its support.
struct Beamformer {
    cvec w;
    std::vector<int> support; // 0-based indices of the nonzero entries

    static Beamformer from(cvec v);

    double power() const; // ||w||_2^2
    bool is_zero() const { return support.empty(); }
};

// The six scalar covariances of the channel estimates (Alice uplink, Bob
// downlink, Eve downlink). Cross terms are complex in general; with a real
// correlation matrix they are real-valued but kept complex for the oracle
// path.
struct CovarianceSet {
    double r_aa = 0.0;
    double r_bb = 0.0;
    double r_ee = 0.0;
    std::complex<double> r_ab{0.0, 0.0};
    std::complex<double> r_ae{0.0, 0.0};
    std::complex<double> r_be{0.0, 0.0};
};

// Everything the closed forms need besides the beamformer itself.
struct KgrModel {
    const SpatialCorrelation *corr = nullptr;
    double beta_ab = 0.0;
    double beta_ae = 0.0;
    double P_B = 0.0;
    double sigma2 = 0.0;
    double rho = 1.0;
};

struct KgrResult {
    double bits = 0.0;
    Scenario scenario = Scenario::iid;
    std::string method;
    int iterations = 0;
    std::vector<double> objective_trace;
    bool degenerate = false; // w == 0 limit
};

// w^H J w, real for symmetric J (tiny negative rounding clamped to zero).
double quad_form(const SpatialCorrelation &corr, const cvec &w);

// Lemma-1 covariance structure: with t = w^H J w,
//   R_aa = P_B*beta_ab*t + ||w||^2*sigma2     R_ab = sqrt(P_B)*beta_ab*t
//   R_bb = beta_ab*t + sigma2                 R_ae = rho*sqrt(P_B*beta_ab*beta_ae)*t
//   R_ee = beta_ae*t + sigma2                 R_be = rho*sqrt(beta_ab*beta_ae)*t
CovarianceSet assemble_covariances(const Beamformer &w, const SpatialCorrelation &corr,
                                   const LinkBudget &budget, double P_B, double sigma2,
                                   double rho);

// Closed-form i.i.d.-scenario KGR. w == 0 returns 0 bits with the degenerate
// flag (the analytic limit of the ratio is 1).
KgrResult kgr_iid_closed(const Beamformer &w, const KgrModel &model);

// Determinant route for the i.i.d. scenario: log2(Raa*Rbb / det2x2).
// Singular 2x2 returns +infinity.
double kgr_iid_oracle(const CovarianceSet &cov);

// Closed-form correlated-scenario KGR. Printed form encodes fully correlated
// small-scale fading, so rho != 1 is a contract error; use kgr_cc_oracle for
// generalized rho.
KgrResult kgr_cc_closed(const Beamformer &w, const KgrModel &model);

// Determinant route for the correlated scenario:
// log2(det(R_ae)*det(R_be) / (det(R_abe)*R_ee)), valid for any rho.
double kgr_cc_oracle(const CovarianceSet &cov);

// beta_ab*t - beta_ab*beta_ae*t^2 / (beta_ae*t + sigma2)
double x0_objective(const Beamformer &w, const KgrModel &model);

// f(x) = ((P_B x + P_A s)(x + s)) / ((P_A s + P_B s) x + P_A s^2), s = sigma2.
// Monotonically increasing for x > 0; assumes the power constraint is tight.
double lemma2_f(double x, double P_A, double P_B, double sigma2);

// d f / d P_A = (P_B x0 + s) P_B x0^2 / (s (P_A x0 + P_B x0 + s)^2)
double kgr_pa_derivative(double x0, double P_A, double P_B, double sigma2);

// Scenario-appropriate KGR of a beamformer. Dispatches to the closed form,
// or to the covariance oracle when rho != 1.
double evaluate_kgr_bits(const Beamformer &w, const KgrModel &model, Scenario scenario);

// Both closed forms depend on w only through t = w^H J w and ||w||^2; this
// scalar entry point lets subset enumeration skip the O(M^2) quadratic form.
double kgr_bits_from_t(double t, double w_norm2, const KgrModel &model, Scenario scenario);

// Simulates the probing round (LS estimates with fresh noise) over the given
// channel draws, forms the sample covariances and feeds the matching oracle.
// Requires at least 10^4 draws.
double empirical_kgr(const std::vector<ChannelDraw> &draws, const Beamformer &w,
                     const KgrModel &model, Scenario scenario, CounterRng &rng);

// Same estimator without materializing the draw sequence; draws are
// generated in shards seeded as seed+shard so the result is independent of
// scheduling.
double empirical_kgr_streamed(const SpatialCorrelation &corr, const LinkBudget &budget,
                              const Beamformer &w, const KgrModel &model, Scenario scenario,
                              long count, std::uint64_t seed);

} // namespace faskeygen

#endif
